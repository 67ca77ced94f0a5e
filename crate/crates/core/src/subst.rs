//! Type substitution: rebinding node types, repairing acceptability with
//! secondary substitutions, and choosing a cheapest substitution pair.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::accept::{expand_tuples, AcceptTuple, AcceptabilitySet, Policy};
use crate::budget::{Budget, BudgetExceeded};
use crate::compare::find_bijection;
use crate::recipe::{NodeId, Recipe, RecipeError};
use crate::typekb::{DistanceModel, Hierarchies, Kind, TypeError, TypeId};

/// A functional map from nodes to replacement types.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct SubstitutionSet {
    bindings: BTreeMap<NodeId, TypeId>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SubstError {
    #[error("node {node} is bound to both `{first}` and `{second}`")]
    ConflictingBinding { node: NodeId, first: TypeId, second: TypeId },
    #[error("node {0} is not in the recipe")]
    UnknownNode(NodeId),
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("substituted typing is invalid: {0}")]
    Invalid(RecipeError),
    #[error("the recipe graphs are not isomorphic")]
    NotIsomorphic,
}

impl SubstitutionSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_bindings(bindings: impl IntoIterator<Item = (NodeId, TypeId)>) -> Result<Self, SubstError> {
        let mut s = SubstitutionSet::new();
        for (n, t) in bindings {
            s.bind(n, t)?;
        }
        Ok(s)
    }

    /// Adds a binding; binding a node twice to different types is an error.
    pub fn bind(&mut self, n: NodeId, t: TypeId) -> Result<(), SubstError> {
        match self.bindings.get(&n) {
            Some(old) if *old != t => Err(SubstError::ConflictingBinding {
                node: n,
                first: old.clone(),
                second: t,
            }),
            _ => {
                self.bindings.insert(n, t);
                Ok(())
            }
        }
    }

    pub fn get(&self, n: &NodeId) -> Option<&TypeId> {
        self.bindings.get(n)
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&NodeId, &TypeId)> {
        self.bindings.iter()
    }

    pub fn domain(&self) -> BTreeSet<NodeId> {
        self.bindings.keys().cloned().collect()
    }

    pub fn union(&self, other: &SubstitutionSet) -> Result<SubstitutionSet, SubstError> {
        let mut s = self.clone();
        for (n, t) in other.iter() {
            s.bind(n.clone(), t.clone())?;
        }
        Ok(s)
    }

    /// Subset of bindings (not of domains).
    pub fn is_subset(&self, other: &SubstitutionSet) -> bool {
        self.bindings.iter().all(|(n, t)| other.bindings.get(n) == Some(t))
    }
}

impl fmt::Display for SubstitutionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (n, t)) in self.bindings.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "({n}, {t})")?;
        }
        f.write_str("}")
    }
}

/// Primary bindings forced by the user plus secondary repair bindings.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct SubstitutionPair {
    pub primary: SubstitutionSet,
    pub secondary: SubstitutionSet,
}

impl SubstitutionPair {
    pub fn combined(&self) -> Result<SubstitutionSet, SubstError> {
        self.primary.union(&self.secondary)
    }
}

/// `F ⊗ T`: rebinds the types of `r` and re-validates the typing. Bindings
/// on nodes outside `r` are ignored.
pub fn apply_substitution(r: &Recipe, t: &SubstitutionSet, hs: &Hierarchies) -> Result<Recipe, SubstError> {
    Recipe::new(r.graph().clone(), substitute_typing(r.typing(), t), hs).map_err(SubstError::Invalid)
}

/// `F ⊗ T` on a bare typing, without validation. Bindings on nodes outside
/// the typing's domain are ignored.
pub fn substitute_typing(typing: &BTreeMap<NodeId, TypeId>, t: &SubstitutionSet) -> BTreeMap<NodeId, TypeId> {
    let mut out = typing.clone();
    for (n, ty) in t.iter() {
        if let Some(slot) = out.get_mut(n) {
            *slot = ty.clone();
        }
    }
    out
}

/// The bindings that turn `r1`'s typing into `r2`'s along a structural
/// isomorphism (nodes keyed by `r1`).
pub fn substitution_to(r1: &Recipe, r2: &Recipe) -> Result<SubstitutionSet, SubstError> {
    let prefer = |a: &NodeId, b: &NodeId| r1.type_of(a) == r2.type_of(b);
    let b = find_bijection(r1.graph(), r2.graph(), &|_, _| true, &prefer, &mut Budget::unlimited())
        .expect("unlimited budget")
        .ok_or(SubstError::NotIsomorphic)?;
    let mut s = SubstitutionSet::new();
    for (n, m) in &b.forward {
        let t2 = &r2.typing()[m];
        if r1.typing()[n] != *t2 {
            s.bind(n.clone(), t2.clone())?;
        }
    }
    Ok(s)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    #[default]
    Sum,
    Max,
}

/// How substitution cost is computed from per-binding distances.
#[derive(Debug, Clone, Copy)]
pub struct CostModel<'a> {
    pub distance: &'a DistanceModel,
    pub aggregation: Aggregation,
}

impl<'a> CostModel<'a> {
    pub fn sum(distance: &'a DistanceModel) -> Self {
        CostModel {
            distance,
            aggregation: Aggregation::Sum,
        }
    }

    fn combine(&self, acc: f64, d: f64) -> f64 {
        match self.aggregation {
            Aggregation::Sum => acc + d,
            Aggregation::Max => acc.max(d),
        }
    }

    fn binding(&self, r: &Recipe, hs: &Hierarchies, n: &NodeId, t: &TypeId) -> Result<f64, SubstError> {
        let kind = r.kind_of(n).ok_or_else(|| SubstError::UnknownNode(n.clone()))?;
        Ok(self.distance.distance(hs.get(kind), &r.typing()[n], t)?)
    }

    /// Aggregated distance `d(F(n), t)` over the given bindings.
    pub fn bindings_cost<'b>(
        &self,
        r: &Recipe,
        hs: &Hierarchies,
        bindings: impl IntoIterator<Item = (&'b NodeId, &'b TypeId)>,
    ) -> Result<f64, SubstError> {
        let mut acc = 0.0;
        for (n, t) in bindings {
            acc = self.combine(acc, self.binding(r, hs, n, t)?);
        }
        Ok(acc)
    }
}

/// `Cost_d(P, S)` over both sets of the pair.
pub fn cost(pair: &SubstitutionPair, r: &Recipe, model: &CostModel, hs: &Hierarchies) -> Result<f64, SubstError> {
    model.bindings_cost(r, hs, pair.primary.iter().chain(pair.secondary.iter()))
}

/// Alternative types considered for each node.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct Candidates(pub BTreeMap<NodeId, Vec<TypeId>>);

impl Candidates {
    pub fn for_node(&self, n: &NodeId) -> &[TypeId] {
        self.0.get(n).map(Vec::as_slice).unwrap_or(&[])
    }
}

pub const DEFAULT_CANDIDATE_RADIUS: u32 = 2;

/// Default candidates: types that occur in the matching slot of the
/// expanded acceptability set, plus hierarchy relatives of the current
/// type within `radius` undirected steps. The current type is excluded.
pub fn default_candidates(
    r: &Recipe,
    x: &AcceptabilitySet,
    hs: &Hierarchies,
    radius: u32,
) -> Result<Candidates, TypeError> {
    let expanded = match x.policy() {
        Policy::Exact => x.clone(),
        Policy::PathComparable => expand_tuples(x, hs, x.policy(), x.depth_limit())?,
    };
    let mut slot_types: BTreeMap<Kind, BTreeSet<TypeId>> = BTreeMap::new();
    for AcceptTuple { input, action, output } in expanded.tuples() {
        let com = slot_types.entry(Kind::Comestible).or_default();
        com.insert(input.clone());
        com.insert(output.clone());
        slot_types.entry(Kind::Action).or_default().insert(action.clone());
    }
    let mut out = BTreeMap::new();
    for n in r.nodes() {
        let kind = r.kind_of(n).expect("recipe node");
        let current = &r.typing()[n];
        let mut c: BTreeSet<TypeId> = slot_types.get(&kind).cloned().unwrap_or_default();
        c.extend(hs.get(kind).neighbourhood(current, radius)?);
        c.remove(current);
        out.insert(n.clone(), c.into_iter().collect());
    }
    Ok(Candidates(out))
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SecondaryError {
    #[error(transparent)]
    Budget(#[from] BudgetExceeded),
    #[error("no secondary substitution restores acceptability within the candidate space")]
    NoSolution,
    #[error(transparent)]
    Subst(#[from] SubstError),
}

/// A minimal secondary substitution with its pair cost.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedSecondary {
    pub secondary: SubstitutionSet,
    pub cost: f64,
}

struct Search<'a> {
    r: &'a Recipe,
    x: &'a AcceptabilitySet,
    hs: &'a Hierarchies,
    candidates: &'a Candidates,
    model: &'a CostModel<'a>,
    forbidden: &'a BTreeSet<TypeId>,
    triples: Vec<[NodeId; 3]>,
    bound: Option<f64>,
}

impl Search<'_> {
    fn new<'a>(
        r: &'a Recipe,
        x: &'a AcceptabilitySet,
        hs: &'a Hierarchies,
        candidates: &'a Candidates,
        model: &'a CostModel<'a>,
        forbidden: &'a BTreeSet<TypeId>,
    ) -> Search<'a> {
        let triples = crate::accept::arc_triples(r)
            .into_iter()
            .map(|t| [t.input, t.action, t.output])
            .collect();
        Search {
            r,
            x,
            hs,
            candidates,
            model,
            forbidden,
            triples,
            bound: None,
        }
    }

    /// Nodes of the first unlicensed arc pair or comparable comestible pair.
    fn first_violation(&self, typing: &BTreeMap<NodeId, TypeId>) -> Option<Vec<NodeId>> {
        for [c, a, d] in &self.triples {
            let t = AcceptTuple {
                input: typing[c].clone(),
                action: typing[a].clone(),
                output: typing[d].clone(),
            };
            if !self.x.licenses(&t, self.hs) {
                let mut v = vec![c.clone(), a.clone(), d.clone()];
                v.dedup();
                return Some(v);
            }
        }
        let coms: Vec<&NodeId> = self.r.comestibles().iter().collect();
        for (i, &a) in coms.iter().enumerate() {
            for &b in &coms[i + 1..] {
                if self.hs.comestible.comparable(&typing[a], &typing[b]).unwrap_or(false) {
                    return Some(vec![a.clone(), b.clone()]);
                }
            }
        }
        None
    }

    /// Branches on which node of each violation changes. A leaf with no
    /// violation yields the secondary bindings made along the way.
    fn run(
        &self,
        typing: &mut BTreeMap<NodeId, TypeId>,
        locked: &mut BTreeSet<NodeId>,
        primary: &SubstitutionSet,
        changed: &mut SubstitutionSet,
        budget: &mut Budget,
        out: &mut Vec<SubstitutionSet>,
    ) -> Result<(), SecondaryError> {
        budget.tick()?;
        if let Some(bound) = self.bound {
            let c = self
                .model
                .bindings_cost(self.r, self.hs, primary.iter().chain(changed.iter()))?;
            if c > bound {
                return Ok(());
            }
        }
        let Some(violation) = self.first_violation(typing) else {
            out.push(changed.clone());
            return Ok(());
        };
        let free: Vec<NodeId> = violation.into_iter().filter(|n| !locked.contains(n)).collect();
        let mut kept = Vec::new();
        for u in &free {
            let original = typing[u].clone();
            locked.insert(u.clone());
            for t in self.candidates.for_node(u) {
                if *t == original || self.forbidden.contains(t) {
                    continue;
                }
                typing.insert(u.clone(), t.clone());
                changed.bindings.insert(u.clone(), t.clone());
                self.run(typing, locked, primary, changed, budget, out)?;
                changed.bindings.remove(u);
            }
            typing.insert(u.clone(), original);
            // later branches keep this node at its current type
            kept.push(u.clone());
        }
        for u in kept {
            locked.remove(&u);
        }
        Ok(())
    }
}

/// Every subset-minimal secondary set `S` (disjoint from `P`'s domain) such
/// that `R ⊗ (P ∪ S)` is an acceptable recipe, cheapest first.
///
/// Each violated arc pair or comparable pair must be repaired by changing at
/// least one of its nodes, so branching on the first changed node of each
/// violation reaches every minimal set in the candidate space.
pub fn find_secondary(
    r: &Recipe,
    p: &SubstitutionSet,
    x: &AcceptabilitySet,
    candidates: &Candidates,
    model: &CostModel,
    hs: &Hierarchies,
    budget: &mut Budget,
) -> Result<Vec<RankedSecondary>, SecondaryError> {
    let none = BTreeSet::new();
    let search = Search::new(r, x, hs, candidates, model, &none);
    let mut typing = primary_typing(r, p, hs)?;
    let mut locked: BTreeSet<NodeId> = p.domain();
    let mut leaves = Vec::new();
    search.run(&mut typing, &mut locked, p, &mut SubstitutionSet::new(), budget, &mut leaves)?;

    let minimal: Vec<&SubstitutionSet> = leaves
        .iter()
        .filter(|s| !leaves.iter().any(|o| o != *s && o.is_subset(s)))
        .collect();
    if minimal.is_empty() {
        return Err(SecondaryError::NoSolution);
    }
    let mut ranked = Vec::with_capacity(minimal.len());
    for s in minimal {
        let c = model.bindings_cost(r, hs, p.iter().chain(s.iter()))?;
        ranked.push(RankedSecondary {
            secondary: s.clone(),
            cost: c,
        });
    }
    ranked.sort_by(|a, b| a.cost.total_cmp(&b.cost).then_with(|| a.secondary.cmp(&b.secondary)));
    Ok(ranked)
}

/// Typing of `r` after applying `p`, checking node membership and kinds.
fn primary_typing(r: &Recipe, p: &SubstitutionSet, hs: &Hierarchies) -> Result<BTreeMap<NodeId, TypeId>, SubstError> {
    let mut typing = r.typing().clone();
    for (n, t) in p.iter() {
        let kind = r.kind_of(n).ok_or_else(|| SubstError::UnknownNode(n.clone()))?;
        if !hs.get(kind).contains(t) {
            return Err(SubstError::Type(match hs.kind_of(t.as_str()) {
                Some(found) => TypeError::KindMismatch {
                    name: t.to_string(),
                    expected: kind,
                    found,
                },
                None => TypeError::UnknownType {
                    kind,
                    name: t.to_string(),
                },
            }));
        }
        typing.insert(n.clone(), t.clone());
    }
    Ok(typing)
}

/// What the cook cannot use: specific types, or specific nodes.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Unavailable {
    pub types: BTreeSet<TypeId>,
    pub nodes: BTreeSet<NodeId>,
}

impl Unavailable {
    /// Nodes of `r` that must be rebound, and the types nothing may use.
    pub fn resolve(&self, r: &Recipe) -> (Vec<NodeId>, BTreeSet<TypeId>) {
        let mut forbidden = self.types.clone();
        let mut targets = BTreeSet::new();
        for (n, t) in r.typing() {
            if self.nodes.contains(n) || self.types.contains(t) {
                targets.insert(n.clone());
                forbidden.insert(t.clone());
            }
        }
        (targets.into_iter().collect(), forbidden)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PreferredPair {
    pub pair: SubstitutionPair,
    pub cost: f64,
}

fn better(a: &PreferredPair, b: &PreferredPair) -> bool {
    let key = |p: &PreferredPair| (p.pair.primary.clone(), p.pair.secondary.len(), p.pair.secondary.clone());
    match a.cost.total_cmp(&b.cost) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => key(a) < key(b),
    }
}

/// A cheapest substitution pair whose primary set rebinds exactly the
/// unavailable nodes. Ties are broken by primary set, then by the size and
/// content of the secondary set, so the secondary set is always minimal.
pub fn preferred_pair(
    r: &Recipe,
    unavailable: &Unavailable,
    x: &AcceptabilitySet,
    model: &CostModel,
    candidates: &Candidates,
    hs: &Hierarchies,
    budget: &mut Budget,
) -> Result<Option<PreferredPair>, SecondaryError> {
    let (targets, forbidden) = unavailable.resolve(r);
    let mut search = Search::new(r, x, hs, candidates, model, &forbidden);

    // candidate types per target, cheapest first
    let mut options: Vec<Vec<(f64, TypeId)>> = Vec::new();
    for n in &targets {
        let mut opts = Vec::new();
        for t in candidates.for_node(n) {
            if forbidden.contains(t) || *t == r.typing()[n] {
                continue;
            }
            opts.push((model.bindings_cost(r, hs, [(n, t)])?, t.clone()));
        }
        opts.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        options.push(opts);
    }

    let mut best: Option<PreferredPair> = None;
    let mut primary = SubstitutionSet::new();
    assign_primary(0, &targets, &options, &mut primary, &mut search, budget, &mut best)?;
    Ok(best)
}

fn assign_primary(
    i: usize,
    targets: &[NodeId],
    options: &[Vec<(f64, TypeId)>],
    primary: &mut SubstitutionSet,
    search: &mut Search,
    budget: &mut Budget,
    best: &mut Option<PreferredPair>,
) -> Result<(), SecondaryError> {
    budget.tick()?;
    let partial = search.model.bindings_cost(search.r, search.hs, primary.iter())?;
    if best.as_ref().is_some_and(|b| partial > b.cost) {
        return Ok(());
    }
    if i == targets.len() {
        search.bound = best.as_ref().map(|b| b.cost);
        let mut typing = primary_typing(search.r, primary, search.hs)?;
        let mut locked: BTreeSet<NodeId> = primary.domain();
        let mut leaves = Vec::new();
        search.run(&mut typing, &mut locked, primary, &mut SubstitutionSet::new(), budget, &mut leaves)?;
        for s in leaves {
            let c = search
                .model
                .bindings_cost(search.r, search.hs, primary.iter().chain(s.iter()))?;
            let cand = PreferredPair {
                pair: SubstitutionPair {
                    primary: primary.clone(),
                    secondary: s,
                },
                cost: c,
            };
            if best.as_ref().is_none_or(|b| better(&cand, b)) {
                *best = Some(cand);
            }
        }
        return Ok(());
    }
    for (_, t) in &options[i] {
        primary.bindings.insert(targets[i].clone(), t.clone());
        assign_primary(i + 1, targets, options, primary, search, budget, best)?;
        primary.bindings.remove(&targets[i]);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::synthetic_hierarchies;
    use crate::recipe::RecipeGraph;

    fn n(s: &str) -> NodeId {
        NodeId::from(s)
    }

    fn t(s: &str) -> TypeId {
        TypeId::from(s)
    }

    fn chain() -> (Recipe, Hierarchies) {
        let hs = synthetic_hierarchies();
        let g = RecipeGraph::new([n("c1"), n("c2")], [n("a1")], [(n("c1"), n("a1")), (n("a1"), n("c2"))]);
        let typing = [("c1", "com0.0"), ("a1", "act0"), ("c2", "com1")].map(|(a, b)| (n(a), t(b)));
        (Recipe::new(g, typing.into(), &hs).unwrap(), hs)
    }

    #[test]
    fn a_node_takes_one_type() {
        let mut s = SubstitutionSet::new();
        s.bind(n("c1"), t("com0")).unwrap();
        s.bind(n("c1"), t("com0")).unwrap();
        assert!(matches!(s.bind(n("c1"), t("com0.1")), Err(SubstError::ConflictingBinding { .. })));
        let other = SubstitutionSet::from_bindings([(n("c1"), t("com0.2"))]).unwrap();
        assert!(s.union(&other).is_err());
        assert_eq!(s.to_string(), "{(c1, com0)}");
    }

    #[test]
    fn subset_compares_bindings() {
        let a = SubstitutionSet::from_bindings([(n("c1"), t("com0"))]).unwrap();
        let b = SubstitutionSet::from_bindings([(n("c1"), t("com0")), (n("c2"), t("com1"))]).unwrap();
        let c = SubstitutionSet::from_bindings([(n("c1"), t("com0.1"))]).unwrap();
        assert!(a.is_subset(&b));
        assert!(!b.is_subset(&a));
        assert!(!c.is_subset(&b));
    }

    #[test]
    fn invalid_typing_is_rejected() {
        let (r, hs) = chain();
        // both comestibles on one branch
        let bad = SubstitutionSet::from_bindings([(n("c2"), t("com0"))]).unwrap();
        assert!(matches!(apply_substitution(&r, &bad, &hs), Err(SubstError::Invalid(_))));
    }

    #[test]
    fn substitution_between_retypings() {
        let (r, hs) = chain();
        let s = SubstitutionSet::from_bindings([(n("c1"), t("com0.2")), (n("a1"), t("act3"))]).unwrap();
        let r2 = apply_substitution(&r, &s, &hs).unwrap();
        assert_eq!(substitution_to(&r, &r2).unwrap(), s);
    }

    #[test]
    fn sum_and_max_costs() {
        let (r, hs) = chain();
        let d = DistanceModel::default();
        let bindings = [(n("c1"), t("com0")), (n("a1"), t("act1"))];
        let sum = CostModel::sum(&d).bindings_cost(&r, &hs, bindings.iter().map(|(a, b)| (a, b))).unwrap();
        let max = CostModel { distance: &d, aggregation: Aggregation::Max }
            .bindings_cost(&r, &hs, bindings.iter().map(|(a, b)| (a, b)))
            .unwrap();
        assert!(sum > max && max > 0.0);
    }
}
