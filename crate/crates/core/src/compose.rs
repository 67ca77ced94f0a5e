//! Bipartite union, recipe composition, composition closure and
//! decomposition into atomic recipes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::recipe::{list, NodeId, Recipe, RecipeError, RecipeGraph};
use crate::typekb::Hierarchies;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("node {node} is a comestible in one graph and an action in the other")]
pub struct KindConflict {
    pub node: NodeId,
}

/// Component-wise union of two graphs. The result is generally not a
/// recipe graph and must be validated by the caller.
pub fn bipartite_union(g1: &RecipeGraph, g2: &RecipeGraph) -> Result<RecipeGraph, KindConflict> {
    let mut clash = g1.comestibles.intersection(&g2.actions).chain(g1.actions.intersection(&g2.comestibles));
    if let Some(n) = clash.next() {
        return Err(KindConflict { node: n.clone() });
    }
    Ok(g1.union(g2))
}

/// One violated composition condition with the nodes that witness it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConditionViolation {
    pub condition: u8,
    pub nodes: Vec<NodeId>,
}

impl ConditionViolation {
    fn describe(&self) -> &'static str {
        match self.condition {
            1 => "no output of the first recipe is an input of the second",
            2 => "intermediate nodes are shared",
            3 => "action nodes are shared",
            4 => "an output of the second recipe is an input of the first",
            5 => "shared nodes are typed differently",
            _ => "comparable types across the two recipes",
        }
    }
}

impl fmt::Display for ConditionViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "condition {} violated: {}", self.condition, self.describe())?;
        if !self.nodes.is_empty() {
            write!(f, " ({})", list(&self.nodes))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ComposeError {
    #[error("composition fails: {}", list(.0))]
    Conditions(Vec<ConditionViolation>),
    #[error("composition is not a recipe: {0}")]
    InvalidResult(RecipeError),
}

impl ComposeError {
    /// Numbers of the violated conditions, ascending.
    pub fn conditions(&self) -> Vec<u8> {
        match self {
            ComposeError::Conditions(v) => v.iter().map(|c| c.condition).collect(),
            ComposeError::InvalidResult(_) => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ComposeOptions {
    /// Let an output of the first recipe feed an input of the second when
    /// its type is a subtype of the expected one. The shared node keeps the
    /// more specific type. Off by default.
    pub match_subtypes: bool,
}

pub fn compose(r1: &Recipe, r2: &Recipe, hs: &Hierarchies) -> Result<Recipe, ComposeError> {
    compose_with(r1, r2, hs, ComposeOptions::default())
}

/// `r1 ⊕ r2`. Every violated condition is reported, not just the first.
pub fn compose_with(r1: &Recipe, r2: &Recipe, hs: &Hierarchies, opts: ComposeOptions) -> Result<Recipe, ComposeError> {
    let (p, q) = (r1.roles(), r2.roles());
    let mut violations = Vec::new();
    let mut check = |condition: u8, nodes: Vec<NodeId>, failed: bool| {
        if failed {
            violations.push(ConditionViolation { condition, nodes });
        }
    };

    let glue: Vec<NodeId> = p.outputs.intersection(&q.inputs).cloned().collect();
    check(1, Vec::new(), glue.is_empty());
    let mids: Vec<NodeId> = p.mids.intersection(&q.mids).cloned().collect();
    check(2, mids.clone(), !mids.is_empty());
    let acts: Vec<NodeId> = r1.actions().intersection(r2.actions()).cloned().collect();
    check(3, acts.clone(), !acts.is_empty());
    let back: Vec<NodeId> = q.outputs.intersection(&p.inputs).cloned().collect();
    check(4, back.clone(), !back.is_empty());

    // Types must agree on every shared node, since the result's typing is
    // the union of both. On glue nodes a subtype may be allowed instead.
    let mut disagree = Vec::new();
    for n in r1.nodes().filter(|n| r2.contains(n)) {
        let (t1, t2) = (&r1.typing()[n], &r2.typing()[n]);
        let ok = t1 == t2
            || (opts.match_subtypes
                && glue.contains(n)
                && hs.comestible.is_subtype(t1, t2).unwrap_or(false));
        if !ok {
            disagree.push(n.clone());
        }
    }
    check(5, disagree.clone(), !disagree.is_empty());

    let left: Vec<&NodeId> = r1.comestibles().iter().filter(|n| !p.outputs.contains(*n)).collect();
    let right: Vec<&NodeId> = r2.comestibles().iter().filter(|n| !q.inputs.contains(*n)).collect();
    // A node on both sides is covered by conditions 2, 4 and 5; like the
    // typing rule of a recipe, only distinct nodes are compared.
    let mut comparable = BTreeSet::new();
    for &n in &left {
        for &m in right.iter().filter(|m| **m != n) {
            if hs
                .comestible
                .comparable(&r1.typing()[n], &r2.typing()[m])
                .unwrap_or(false)
            {
                comparable.insert(n.clone());
                comparable.insert(m.clone());
            }
        }
    }
    check(6, comparable.iter().cloned().collect(), !comparable.is_empty());

    if !violations.is_empty() {
        return Err(ComposeError::Conditions(violations));
    }

    let graph = r1.graph().union(r2.graph());
    let mut typing: BTreeMap<NodeId, _> = r2.typing().clone();
    typing.extend(r1.typing().iter().map(|(n, t)| (n.clone(), t.clone())));
    Recipe::new(graph, typing, hs).map_err(ComposeError::InvalidResult)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClosureLimits {
    pub max_recipes: usize,
    pub max_nodes: usize,
}

impl Default for ClosureLimits {
    fn default() -> Self {
        ClosureLimits {
            max_recipes: 10_000,
            max_nodes: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("closure truncated after {} recipes", .partial.len())]
pub struct LimitReached {
    pub partial: BTreeSet<Recipe>,
}

/// Least superset of `seeds` closed under successful composition.
///
/// Results larger than `max_nodes` are dropped and the call reports
/// [`LimitReached`], as does growing beyond `max_recipes`.
pub fn compose_closure(
    seeds: impl IntoIterator<Item = Recipe>,
    hs: &Hierarchies,
    limits: ClosureLimits,
) -> Result<BTreeSet<Recipe>, LimitReached> {
    let mut found: BTreeSet<Recipe> = BTreeSet::new();
    let mut list: Vec<Recipe> = Vec::new();
    for r in seeds {
        if found.insert(r.clone()) {
            list.push(r);
        }
    }
    let mut truncated = found.len() > limits.max_recipes;
    let mut i = 0;
    while i < list.len() && !truncated {
        for j in 0..=i {
            for (x, y) in [(i, j), (j, i)] {
                let Ok(r) = compose(&list[x], &list[y], hs) else {
                    continue;
                };
                if r.node_count() > limits.max_nodes {
                    truncated = true;
                } else if !found.contains(&r) {
                    found.insert(r.clone());
                    list.push(r);
                    if found.len() > limits.max_recipes {
                        truncated = true;
                    }
                }
            }
        }
        i += 1;
    }
    if truncated {
        Err(LimitReached { partial: found })
    } else {
        Ok(found)
    }
}

/// One atomic subrecipe per action: the action, its adjacent comestibles,
/// the arcs between them, and their types.
pub fn decompose(r: &Recipe) -> Vec<Recipe> {
    r.actions().iter().map(|a| atomic_around(r, a)).collect()
}

pub(crate) fn atomic_around(r: &Recipe, a: &NodeId) -> Recipe {
    let arcs: BTreeSet<(NodeId, NodeId)> = r
        .arcs()
        .iter()
        .filter(|(x, y)| x == a || y == a)
        .cloned()
        .collect();
    let coms: BTreeSet<NodeId> = arcs
        .iter()
        .map(|(x, y)| if x == a { y.clone() } else { x.clone() })
        .collect();
    induced(r, &coms, &BTreeSet::from([a.clone()]))
}

/// The subrecipe induced by the given node sets, without validation.
pub(crate) fn induced(r: &Recipe, coms: &BTreeSet<NodeId>, acts: &BTreeSet<NodeId>) -> Recipe {
    let arcs = r
        .arcs()
        .iter()
        .filter(|(x, y)| (coms.contains(x) && acts.contains(y)) || (acts.contains(x) && coms.contains(y)))
        .cloned()
        .collect();
    let typing = r
        .typing()
        .iter()
        .filter(|(n, _)| coms.contains(*n) || acts.contains(*n))
        .map(|(n, t)| (n.clone(), t.clone()))
        .collect();
    Recipe::unchecked(
        RecipeGraph {
            comestibles: coms.clone(),
            actions: acts.clone(),
            arcs,
        },
        typing,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::synthetic_hierarchies;
    use crate::typekb::TypeId;

    /// Atomic recipe `ins -> act -> outs`, each node written `id:type`.
    fn atomic(hs: &Hierarchies, ins: &[&str], act: &str, outs: &[&str]) -> Recipe {
        let split = |s: &&str| {
            let (id, ty) = s.split_once(':').unwrap();
            (NodeId::from(id), TypeId::from(ty))
        };
        let (a, at) = split(&act);
        let ins: Vec<_> = ins.iter().map(split).collect();
        let outs: Vec<_> = outs.iter().map(split).collect();
        let graph = RecipeGraph::new(
            ins.iter().chain(&outs).map(|(n, _)| n.clone()),
            [a.clone()],
            ins.iter()
                .map(|(n, _)| (n.clone(), a.clone()))
                .chain(outs.iter().map(|(n, _)| (a.clone(), n.clone()))),
        );
        let typing = ins.iter().chain(&outs).cloned().chain([(a, at)]).collect();
        Recipe::new(graph, typing, hs).unwrap()
    }

    fn conditions(r1: &Recipe, r2: &Recipe, hs: &Hierarchies) -> Vec<u8> {
        compose(r1, r2, hs).err().map(|e| e.conditions()).unwrap_or_default()
    }

    #[test]
    fn glued_chain() {
        let hs = synthetic_hierarchies();
        let r1 = atomic(&hs, &["c1:com0"], "a1:act0", &["c2:com1"]);
        let r2 = atomic(&hs, &["c2:com1"], "a2:act1", &["c3:com2"]);
        let r = compose(&r1, &r2, &hs).unwrap();
        assert_eq!(r.mids(), BTreeSet::from([NodeId::from("c2")]));
        assert_eq!(conditions(&r2, &r1, &hs), vec![1, 4]);
    }

    #[test]
    fn each_condition_has_its_number() {
        let hs = synthetic_hierarchies();
        let r1 = atomic(&hs, &["c1:com0"], "a1:act0", &["c2:com1"]);
        // nothing glued
        let apart = atomic(&hs, &["c5:com5"], "a2:act1", &["c6:com6"]);
        assert_eq!(conditions(&r1, &apart, &hs), vec![1]);
        // shared action
        let same_action = atomic(&hs, &["c2:com1"], "a1:act0", &["c3:com2"]);
        assert_eq!(conditions(&r1, &same_action, &hs), vec![3]);
        // glue node typed differently
        let retyped = atomic(&hs, &["c2:com1.0"], "a2:act1", &["c3:com2"]);
        assert_eq!(conditions(&r1, &retyped, &hs), vec![5]);
        // an output of the second comparable with an input of the first
        let echo = atomic(&hs, &["c2:com1"], "a2:act1", &["c3:com0.1"]);
        assert_eq!(conditions(&r1, &echo, &hs), vec![6]);
        // a subtype glue is allowed on request
        let general = atomic(&hs, &["c2:com1"], "a2:act1", &["c3:com2"]);
        let specific = atomic(&hs, &["c1:com0"], "a1:act0", &["c2:com1.0"]);
        let opts = ComposeOptions { match_subtypes: true };
        assert!(compose_with(&specific, &general, &hs, opts).is_ok());
        assert_eq!(conditions(&specific, &general, &hs), vec![5]);
    }

    #[test]
    fn closure_limits_truncate() {
        let hs = synthetic_hierarchies();
        let seeds = vec![
            atomic(&hs, &["c1:com0"], "a1:act0", &["c2:com1"]),
            atomic(&hs, &["c2:com1"], "a2:act1", &["c3:com2"]),
            atomic(&hs, &["c3:com2"], "a3:act2", &["c4:com3"]),
        ];
        let full = compose_closure(seeds.clone(), &hs, ClosureLimits::default()).unwrap();
        assert_eq!(full.len(), 6);
        let few = ClosureLimits { max_recipes: 4, ..ClosureLimits::default() };
        let err = compose_closure(seeds.clone(), &hs, few).unwrap_err();
        assert!(err.partial.len() > 4 && err.partial.is_subset(&full));
        let small = ClosureLimits { max_nodes: 4, ..ClosureLimits::default() };
        let err = compose_closure(seeds.clone(), &hs, small).unwrap_err();
        assert_eq!(err.partial, seeds.into_iter().collect());
    }
}
