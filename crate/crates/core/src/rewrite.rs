//! Structural substitution: replacing an untrimmed subrecipe of a recipe by
//! another recipe that meets it at the same front nodes.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::accept::{is_acceptable, AcceptabilitySet};
use crate::budget::{Budget, BudgetExceeded};
use crate::compare::is_subrecipe;
use crate::recipe::{list, NodeId, Recipe, RecipeError, RecipeGraph};
use crate::typekb::{DistanceModel, Hierarchies, Kind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("the first recipe is not a subrecipe of the second")]
pub struct NotSubrecipe;

/// `Front(R, R1)`: comestibles that are inputs or outputs of `r1` without
/// being inputs or outputs of `r`.
pub fn front(r: &Recipe, r1: &Recipe) -> Result<BTreeSet<NodeId>, NotSubrecipe> {
    if !is_subrecipe(r1, r) {
        return Err(NotSubrecipe);
    }
    Ok(front_unchecked(r, r1))
}

fn front_unchecked(r: &Recipe, r1: &Recipe) -> BTreeSet<NodeId> {
    let (outer, inner) = (r.roles(), r1.roles());
    let outs = inner.outputs.difference(&outer.outputs);
    let ins = inner.inputs.difference(&outer.inputs);
    outs.chain(ins).cloned().collect()
}

/// Comestibles of `r` adjacent to an action of `r1` but missing from `r1`.
fn trimmed_neighbours(r1: &Recipe, r: &Recipe) -> BTreeSet<NodeId> {
    r.arcs()
        .iter()
        .filter_map(|(x, y)| {
            if r1.actions().contains(x) && !r1.contains(y) {
                Some(y.clone())
            } else if r1.actions().contains(y) && !r1.contains(x) {
                Some(x.clone())
            } else {
                None
            }
        })
        .collect()
}

/// `r1 ⊑* r`: a subrecipe that keeps every comestible adjacent to its actions.
pub fn is_untrimmed_subrecipe(r1: &Recipe, r: &Recipe) -> bool {
    is_subrecipe(r1, r) && trimmed_neighbours(r1, r).is_empty()
}

fn non_parallel_nodes(r1: &Recipe, r2: &Recipe, r: &Recipe) -> Vec<NodeId> {
    let mut bad = Vec::new();
    for c in front_unchecked(r, r1) {
        let uses_out = r1.arcs().iter().any(|(x, _)| *x == c);
        let uses_in = r1.arcs().iter().any(|(_, y)| *y == c);
        let has_out = r2.arcs().iter().any(|(x, _)| *x == c);
        let has_in = r2.arcs().iter().any(|(_, y)| *y == c);
        if (uses_out && !has_out) || (uses_in && !has_in) {
            bad.push(c);
        }
    }
    bad
}

/// `r1` is parallel to `r2` w.r.t. `r`: at each front node, every arc
/// direction used by `r1` is also used by `r2`.
pub fn is_parallel(r1: &Recipe, r2: &Recipe, r: &Recipe) -> bool {
    non_parallel_nodes(r1, r2, r).is_empty()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum RewriteCondition {
    #[serde(rename = "i")]
    FrontCovered,
    #[serde(rename = "ii")]
    Parallel,
    #[serde(rename = "iii")]
    Untrimmed,
    #[serde(rename = "iv")]
    DisjointInsert,
    #[serde(rename = "v")]
    NoComparableTypes,
    #[serde(rename = "empty-front")]
    EmptyFront,
}

impl fmt::Display for RewriteCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RewriteCondition::FrontCovered => "i",
            RewriteCondition::Parallel => "ii",
            RewriteCondition::Untrimmed => "iii",
            RewriteCondition::DisjointInsert => "iv",
            RewriteCondition::NoComparableTypes => "v",
            RewriteCondition::EmptyFront => "empty-front",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RewriteViolation {
    pub condition: RewriteCondition,
    pub nodes: Vec<NodeId>,
}

impl fmt::Display for RewriteViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.condition {
            RewriteCondition::FrontCovered => "front nodes missing from the replacement's inputs and outputs",
            RewriteCondition::Parallel => "replacement meets front nodes in a different direction",
            RewriteCondition::Untrimmed => "removed part is not an untrimmed subrecipe",
            RewriteCondition::DisjointInsert => "replacement reuses nodes that are kept",
            RewriteCondition::NoComparableTypes => "kept and inserted nodes have comparable types",
            RewriteCondition::EmptyFront => "removed part has an empty front",
        };
        write!(f, "condition {} violated: {what}", self.condition)?;
        if !self.nodes.is_empty() {
            write!(f, " ({})", list(&self.nodes))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RewriteError {
    #[error("structural substitution fails: {}", list(.0))]
    Conditions(Vec<RewriteViolation>),
    #[error("substitution result is not a recipe: {0}")]
    InvalidResult(RecipeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RewriteOptions {
    /// Also forbid comparable action types between kept and inserted nodes.
    /// Off by default: with it, `R[R1/R1] = R` fails for any recipe that has
    /// two actions of comparable type.
    pub literal_action_check: bool,
    /// Permit replacing a part with an empty front, such as the whole recipe.
    pub allow_empty_front: bool,
}

impl Default for RewriteOptions {
    fn default() -> Self {
        RewriteOptions {
            literal_action_check: false,
            allow_empty_front: true,
        }
    }
}

pub fn structural_substitute(r: &Recipe, r1: &Recipe, r2: &Recipe, hs: &Hierarchies) -> Result<Recipe, RewriteError> {
    structural_substitute_with(r, r1, r2, hs, RewriteOptions::default())
}

/// `R[R1/R2]`, reporting every violated side condition.
pub fn structural_substitute_with(
    r: &Recipe,
    r1: &Recipe,
    r2: &Recipe,
    hs: &Hierarchies,
    opts: RewriteOptions,
) -> Result<Recipe, RewriteError> {
    let mut violations = Vec::new();
    let mut check = |condition, nodes: Vec<NodeId>, failed: bool| {
        if failed {
            violations.push(RewriteViolation { condition, nodes });
        }
    };

    let front = front_unchecked(r, r1);
    let roles2 = r2.roles();
    let uncovered: Vec<NodeId> = front
        .iter()
        .filter(|c| !roles2.inputs.contains(*c) && !roles2.outputs.contains(*c))
        .cloned()
        .collect();
    check(RewriteCondition::FrontCovered, uncovered.clone(), !uncovered.is_empty());
    let skew = non_parallel_nodes(r1, r2, r);
    check(RewriteCondition::Parallel, skew.clone(), !skew.is_empty());

    let sub = is_subrecipe(r1, r);
    let mut untrimmed_evidence: Vec<NodeId> = trimmed_neighbours(r1, r).into_iter().collect();
    if !sub {
        untrimmed_evidence.extend(r1.nodes().filter(|n| !r.contains(n)).cloned());
    }
    check(
        RewriteCondition::Untrimmed,
        untrimmed_evidence.clone(),
        !sub || !untrimmed_evidence.is_empty(),
    );

    let kept: Vec<&NodeId> = r.nodes().filter(|n| !r1.contains(n)).collect();
    let reused: Vec<NodeId> = kept.iter().filter(|n| r2.contains(n)).map(|&n| n.clone()).collect();
    check(RewriteCondition::DisjointInsert, reused.clone(), !reused.is_empty());

    let mut clashing = BTreeSet::new();
    for &n in &kept {
        let kind = r.kind_of(n).expect("recipe node");
        if kind == Kind::Action && !opts.literal_action_check {
            continue;
        }
        for m in r2.nodes().filter(|m| r2.kind_of(m) == Some(kind)) {
            if n != m
                && hs
                    .get(kind)
                    .comparable(&r.typing()[n], &r2.typing()[m])
                    .unwrap_or(false)
            {
                clashing.insert(n.clone());
                clashing.insert(m.clone());
            }
        }
    }
    check(
        RewriteCondition::NoComparableTypes,
        clashing.iter().cloned().collect(),
        !clashing.is_empty(),
    );
    check(RewriteCondition::EmptyFront, Vec::new(), !opts.allow_empty_front && front.is_empty());

    if !violations.is_empty() {
        return Err(RewriteError::Conditions(violations));
    }

    let keep = |s: &BTreeSet<NodeId>, s1: &BTreeSet<NodeId>, s2: &BTreeSet<NodeId>| -> BTreeSet<NodeId> {
        s.difference(s1).chain(s2).cloned().collect()
    };
    let graph = RecipeGraph {
        comestibles: keep(r.comestibles(), r1.comestibles(), r2.comestibles()),
        actions: keep(r.actions(), r1.actions(), r2.actions()),
        arcs: r.arcs().difference(r1.arcs()).chain(r2.arcs()).cloned().collect(),
    };
    let mut typing = BTreeMap::new();
    for n in graph.nodes() {
        let t = r2.type_of(n).or_else(|| r.type_of(n)).expect("node typed by one side");
        typing.insert(n.clone(), t.clone());
    }
    Recipe::new(graph, typing, hs).map_err(RewriteError::InvalidResult)
}

/// One replacement `[remove/insert]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewriteStep {
    pub remove: Recipe,
    pub insert: Recipe,
}

impl RewriteStep {
    pub fn new(remove: Recipe, insert: Recipe) -> Self {
        RewriteStep { remove, insert }
    }

    pub fn reversed(&self) -> Self {
        RewriteStep {
            remove: self.insert.clone(),
            insert: self.remove.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("step {step}: {error}")]
pub struct SequenceFailure {
    pub step: usize,
    pub error: RewriteError,
}

/// Applies the steps left to right, stopping at the first failure.
pub fn apply_sequence(
    r: &Recipe,
    steps: &[RewriteStep],
    hs: &Hierarchies,
    opts: RewriteOptions,
) -> Result<Recipe, SequenceFailure> {
    let mut current = r.clone();
    for (step, s) in steps.iter().enumerate() {
        current = structural_substitute_with(&current, &s.remove, &s.insert, hs, opts)
            .map_err(|error| SequenceFailure { step, error })?;
    }
    Ok(current)
}

/// Whether `secondary` repairs `primary`: the whole sequence applies and the
/// result is acceptable.
pub fn verify_secondary_sequence(
    r: &Recipe,
    primary: &[RewriteStep],
    secondary: &[RewriteStep],
    x: &AcceptabilitySet,
    hs: &Hierarchies,
    opts: RewriteOptions,
) -> Result<bool, SequenceFailure> {
    let steps: Vec<RewriteStep> = primary.iter().chain(secondary).cloned().collect();
    let out = apply_sequence(r, &steps, hs, opts)?;
    Ok(is_acceptable(&out, x, hs))
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthesisError {
    #[error(transparent)]
    Budget(#[from] BudgetExceeded),
    #[error("primary sequence fails at {0}")]
    Primary(SequenceFailure),
}

/// Shortest sequence of library steps (by index, lexicographically first
/// among the shortest) that makes the primary result acceptable.
pub fn synthesize_secondary(
    r: &Recipe,
    primary: &[RewriteStep],
    library: &[RewriteStep],
    x: &AcceptabilitySet,
    hs: &Hierarchies,
    opts: RewriteOptions,
    max_len: usize,
    budget: &mut Budget,
) -> Result<Option<Vec<usize>>, SynthesisError> {
    let start = apply_sequence(r, primary, hs, opts).map_err(SynthesisError::Primary)?;
    let mut queue: VecDeque<(Vec<usize>, Recipe)> = VecDeque::from([(Vec::new(), start)]);
    let mut seen: BTreeSet<Recipe> = BTreeSet::new();
    while let Some((path, current)) = queue.pop_front() {
        budget.tick()?;
        if is_acceptable(&current, x, hs) {
            return Ok(Some(path));
        }
        if path.len() == max_len || !seen.insert(current.clone()) {
            continue;
        }
        for (i, s) in library.iter().enumerate() {
            if let Ok(next) = structural_substitute_with(&current, &s.remove, &s.insert, hs, opts) {
                let mut p = path.clone();
                p.push(i);
                queue.push_back((p, next));
            }
        }
    }
    Ok(None)
}

/// Weights of the structural cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StructuralCostParams {
    /// Cost of inserting or deleting one node or one arc.
    pub edit_weight: f64,
    /// Multiplier on the type distance of matched nodes.
    pub type_weight: f64,
}

impl Default for StructuralCostParams {
    fn default() -> Self {
        StructuralCostParams {
            edit_weight: 1.0,
            type_weight: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructuralCost {
    pub value: f64,
    /// Matched pairs of the optimal edit script; unmatched nodes are edits.
    pub matching: BTreeMap<NodeId, NodeId>,
    /// Always false: this cost is a configurable default, not a definition.
    pub normative: bool,
}

/// Graph edit distance between two recipes.
///
/// Node insertions, deletions and arc edits cost `edit_weight` each; a node
/// matched to a node of the same kind costs `type_weight` times the type
/// distance. The minimum over all matchings is found by branch and bound.
pub fn structural_cost(
    r1: &Recipe,
    r2: &Recipe,
    hs: &Hierarchies,
    distances: &DistanceModel,
    params: StructuralCostParams,
    budget: &mut Budget,
) -> Result<StructuralCost, BudgetExceeded> {
    let n1: Vec<&NodeId> = r1.nodes().collect();
    let n2: Vec<&NodeId> = r2.nodes().collect();
    let w = params.edit_weight;

    let node_cost: Vec<Vec<Option<f64>>> = n1
        .iter()
        .map(|a| {
            n2.iter()
                .map(|b| {
                    let k = r1.kind_of(a)?;
                    if r2.kind_of(b) != Some(k) {
                        return None;
                    }
                    let d = distances
                        .distance(hs.get(k), &r1.typing()[*a], &r2.typing()[*b])
                        .unwrap_or(f64::INFINITY);
                    Some(params.type_weight * d)
                })
                .collect()
        })
        .collect();
    let arc1 = |i: usize, j: usize| r1.arcs().contains(&(n1[i].clone(), n1[j].clone()));
    let arc2 = |i: usize, j: usize| r2.arcs().contains(&(n2[i].clone(), n2[j].clone()));
    let arcs2: Vec<(usize, usize)> = (0..n2.len())
        .flat_map(|i| (0..n2.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| arc2(i, j))
        .collect();

    struct State {
        assign: Vec<Option<usize>>,
        used: Vec<bool>,
        best: f64,
        best_assign: Vec<Option<usize>>,
    }
    let mut st = State {
        assign: Vec::with_capacity(n1.len()),
        used: vec![false; n2.len()],
        best: f64::INFINITY,
        best_assign: Vec::new(),
    };

    // remaining cost once every node of r1 is decided
    let finish = |st: &State| -> f64 {
        let unmatched = st.used.iter().filter(|u| !**u).count() as f64;
        let dangling = arcs2.iter().filter(|&&(i, j)| !st.used[i] || !st.used[j]).count() as f64;
        w * (unmatched + dangling)
    };

    #[allow(clippy::too_many_arguments)]
    fn go(
        i: usize,
        acc: f64,
        st: &mut State,
        node_cost: &[Vec<Option<f64>>],
        arc1: &dyn Fn(usize, usize) -> bool,
        arc2: &dyn Fn(usize, usize) -> bool,
        finish: &dyn Fn(&State) -> f64,
        w: f64,
        budget: &mut Budget,
    ) -> Result<(), BudgetExceeded> {
        budget.tick()?;
        if acc >= st.best {
            return Ok(());
        }
        if i == node_cost.len() {
            let total = acc + finish(st);
            if total < st.best {
                st.best = total;
                st.best_assign = st.assign.clone();
            }
            return Ok(());
        }
        let mut options: Vec<(f64, Option<usize>)> = node_cost[i]
            .iter()
            .enumerate()
            .filter(|(j, c)| c.is_some() && !st.used[*j])
            .map(|(j, c)| (c.unwrap_or(0.0), Some(j)))
            .collect();
        options.push((w, None));
        options.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (c, choice) in options {
            // arcs between node i and earlier nodes
            let mut arc_cost = 0.0;
            for k in 0..i {
                for (x, y, xi, yi) in [(i, k, choice, st.assign[k]), (k, i, st.assign[k], choice)] {
                    let here = arc1(x, y);
                    let there = matches!((xi, yi), (Some(a), Some(b)) if arc2(a, b));
                    if here != there {
                        arc_cost += w;
                    }
                }
            }
            if let Some(j) = choice {
                st.used[j] = true;
            }
            st.assign.push(choice);
            go(i + 1, acc + c + arc_cost, st, node_cost, arc1, arc2, finish, w, budget)?;
            st.assign.pop();
            if let Some(j) = choice {
                st.used[j] = false;
            }
        }
        Ok(())
    }
    go(0, 0.0, &mut st, &node_cost, &arc1, &arc2, &finish, w, budget)?;

    let matching = st
        .best_assign
        .iter()
        .enumerate()
        .filter_map(|(i, j)| j.map(|j| (n1[i].clone(), n2[j].clone())))
        .collect();
    Ok(StructuralCost {
        value: st.best,
        matching,
        normative: false,
    })
}
