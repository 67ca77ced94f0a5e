//! Exhaustive reference implementations for small instances.

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use recipe_calculus::accept::{is_acceptable, AcceptTuple, AcceptabilitySet};
use recipe_calculus::compose::compose;
use recipe_calculus::recipe::{NodeId, Recipe};
use recipe_calculus::subst::{Candidates, CostModel, Unavailable};
use recipe_calculus::typekb::{DistanceModel, Hierarchies, Kind, TypeHierarchy, TypeId};

fn by_kind(r: &Recipe, kind: Kind) -> Vec<NodeId> {
    r.nodes().filter(|n| r.kind_of(n) == Some(kind)).cloned().collect()
}

/// Tries every kind-preserving bijection.
fn any_bijection(r1: &Recipe, r2: &Recipe, label_ok: impl Fn(&NodeId, &NodeId) -> bool) -> bool {
    let (c1, a1) = (by_kind(r1, Kind::Comestible), by_kind(r1, Kind::Action));
    let (c2, a2) = (by_kind(r2, Kind::Comestible), by_kind(r2, Kind::Action));
    if c1.len() != c2.len() || a1.len() != a2.len() || r1.arcs().len() != r2.arcs().len() {
        return false;
    }
    for pc in c2.iter().permutations(c2.len()) {
        for pa in a2.iter().permutations(a2.len()) {
            let map: BTreeMap<&NodeId, &NodeId> = c1.iter().zip(pc.iter().copied()).chain(a1.iter().zip(pa.iter().copied())).collect();
            let arcs_ok = r1
                .arcs()
                .iter()
                .all(|(x, y)| r2.arcs().contains(&(map[x].clone(), map[y].clone())));
            if arcs_ok && map.iter().all(|(a, b)| label_ok(a, b)) {
                return true;
            }
        }
    }
    false
}

pub fn isomorphic(r1: &Recipe, r2: &Recipe) -> bool {
    any_bijection(r1, r2, |_, _| true)
}

pub fn equivalent(r1: &Recipe, r2: &Recipe) -> bool {
    any_bijection(r1, r2, |a, b| r1.typing()[a] == r2.typing()[b])
}

fn aligned(r1: &Recipe, r2: &Recipe) -> bool {
    let (p, q) = (r1.roles(), r2.roles());
    p.inputs == q.inputs
        && p.outputs == q.outputs
        && p.inputs.iter().chain(&p.outputs).all(|c| r1.typing()[c] == r2.typing()[c])
}

/// Walks every total map `Nodes(r1) → Nodes(r2)` in id order, abandoning a
/// prefix only once it already breaks order preservation.
pub fn finer_grained(r1: &Recipe, r2: &Recipe, strict: bool) -> bool {
    if !aligned(r1, r2) {
        return false;
    }
    let n1: Vec<NodeId> = r1.nodes().cloned().collect();
    let n2: Vec<NodeId> = r2.nodes().cloned().collect();
    let leq1: Vec<Vec<bool>> = n1.iter().map(|a| n1.iter().map(|b| r1.leq(a, b).unwrap()).collect()).collect();
    let leq2: Vec<Vec<bool>> = n2.iter().map(|a| n2.iter().map(|b| r2.leq(a, b).unwrap()).collect()).collect();
    let roles = r1.roles();
    let pinned: Vec<Option<usize>> = n1
        .iter()
        .map(|n| {
            (strict && (roles.inputs.contains(n) || roles.outputs.contains(n)))
                .then(|| n2.iter().position(|m| m == n).expect("aligned node"))
        })
        .collect();

    fn go(i: usize, g: &mut Vec<usize>, leq1: &[Vec<bool>], leq2: &[Vec<bool>], k2: usize, pinned: &[Option<usize>]) -> bool {
        if i == leq1.len() {
            return true;
        }
        let choices: Vec<usize> = match pinned[i] {
            Some(j) => vec![j],
            None => (0..k2).collect(),
        };
        for j in choices {
            let ok = (0..i).all(|m| (!leq1[m][i] || leq2[g[m]][j]) && (!leq1[i][m] || leq2[j][g[m]]));
            if ok {
                g.push(j);
                if go(i + 1, g, leq1, leq2, k2, pinned) {
                    return true;
                }
                g.pop();
            }
        }
        false
    }
    go(0, &mut Vec::new(), &leq1, &leq2, n2.len(), &pinned)
}

/// Every acceptable `R ⊗ (P ∪ S)` over the candidate space; returns the
/// cheapest cost.
pub fn preferred_cost(
    r: &Recipe,
    unavailable: &Unavailable,
    x: &AcceptabilitySet,
    model: &CostModel,
    candidates: &Candidates,
    hs: &Hierarchies,
) -> Option<f64> {
    let (targets, forbidden) = unavailable.resolve(r);
    let nodes: Vec<NodeId> = r.nodes().cloned().collect();
    let options: Vec<Vec<Option<TypeId>>> = nodes
        .iter()
        .map(|n| {
            let current = &r.typing()[n];
            let alts = candidates
                .for_node(n)
                .iter()
                .filter(|t| !forbidden.contains(*t) && *t != current)
                .cloned()
                .map(Some);
            if targets.contains(n) {
                alts.collect()
            } else {
                std::iter::once(None).chain(alts).collect()
            }
        })
        .collect();
    let mut best: Option<f64> = None;
    for choice in options.iter().multi_cartesian_product() {
        let mut typing = r.typing().clone();
        let mut changed = Vec::new();
        for (n, t) in nodes.iter().zip(&choice) {
            if let Some(t) = t {
                typing.insert(n.clone(), t.clone());
                changed.push((n, t));
            }
        }
        let Ok(out) = Recipe::new(r.graph().clone(), typing, hs) else {
            continue;
        };
        if !is_acceptable(&out, x, hs) {
            continue;
        }
        let c = model.bindings_cost(r, hs, changed.iter().map(|(n, t)| (*n, *t))).unwrap();
        if best.is_none_or(|b| c < b) {
            best = Some(c);
        }
    }
    best
}

/// All tuples whose every slot is within `depth` ancestor steps of the
/// matching slot of some tuple in `x`, found by scanning the whole hierarchy.
pub fn expand(x: &AcceptabilitySet, hs: &Hierarchies, depth: u32) -> BTreeSet<AcceptTuple> {
    let near = |h: &TypeHierarchy, a: &TypeId, b: &TypeId| {
        let up = |s: &TypeId, t: &TypeId| h.up_distance(s, t).unwrap().is_some_and(|d| d <= depth);
        up(a, b) || up(b, a)
    };
    let mut out = BTreeSet::new();
    for t in x.tuples() {
        for i in hs.comestible.types().filter(|i| near(&hs.comestible, i, &t.input)) {
            for a in hs.action.types().filter(|a| near(&hs.action, a, &t.action)) {
                for o in hs.comestible.types().filter(|o| near(&hs.comestible, o, &t.output)) {
                    out.insert(AcceptTuple::new(i.clone(), a.clone(), o.clone()));
                }
            }
        }
    }
    out
}

/// Naive fixpoint: compose every ordered pair until nothing new appears.
pub fn closure(seeds: &[Recipe], hs: &Hierarchies, cap: usize) -> Option<BTreeSet<Recipe>> {
    let mut set: BTreeSet<Recipe> = seeds.iter().cloned().collect();
    loop {
        let mut grown = set.clone();
        for a in &set {
            for b in &set {
                if let Ok(r) = compose(a, b, hs) {
                    grown.insert(r);
                }
            }
        }
        if grown.len() > cap {
            return None;
        }
        if grown.len() == set.len() {
            return Some(set);
        }
        set = grown;
    }
}

/// Graph edit cost by trying every partial kind-preserving injection.
pub fn edit_cost(r1: &Recipe, r2: &Recipe, hs: &Hierarchies, d: &DistanceModel, edit: f64, type_weight: f64) -> f64 {
    let n1: Vec<NodeId> = r1.nodes().cloned().collect();
    let n2: Vec<NodeId> = r2.nodes().cloned().collect();
    let mut best = f64::INFINITY;
    let mut assign: Vec<Option<usize>> = Vec::new();

    fn go(
        assign: &mut Vec<Option<usize>>,
        best: &mut f64,
        n1: &[NodeId],
        n2: &[NodeId],
        score: &dyn Fn(&[Option<usize>]) -> f64,
        ok: &dyn Fn(usize, usize) -> bool,
    ) {
        let i = assign.len();
        if i == n1.len() {
            *best = best.min(score(assign));
            return;
        }
        assign.push(None);
        go(assign, best, n1, n2, score, ok);
        assign.pop();
        for j in 0..n2.len() {
            if ok(i, j) && !assign.contains(&Some(j)) {
                assign.push(Some(j));
                go(assign, best, n1, n2, score, ok);
                assign.pop();
            }
        }
    }

    let ok = |i: usize, j: usize| r1.kind_of(&n1[i]) == r2.kind_of(&n2[j]);
    let score = |assign: &[Option<usize>]| -> f64 {
        let image: BTreeMap<&NodeId, &NodeId> = assign
            .iter()
            .enumerate()
            .filter_map(|(i, j)| j.map(|j| (&n1[i], &n2[j])))
            .collect();
        let mut cost = 0.0;
        for (a, b) in &image {
            let k = r1.kind_of(a).unwrap();
            cost += type_weight * d.distance(hs.get(k), &r1.typing()[*a], &r2.typing()[*b]).unwrap();
        }
        cost += edit * ((n1.len() - image.len()) + (n2.len() - image.len())) as f64;
        let mapped: BTreeSet<(NodeId, NodeId)> = r1
            .arcs()
            .iter()
            .filter_map(|(x, y)| Some(((*image.get(x)?).clone(), (*image.get(y)?).clone())))
            .collect();
        let kept = mapped.iter().filter(|arc| r2.arcs().contains(*arc)).count();
        cost += edit * ((r1.arcs().len() - kept) + (r2.arcs().len() - kept)) as f64;
        cost
    };
    go(&mut assign, &mut best, &n1, &n2, &score, &ok);
    best
}
