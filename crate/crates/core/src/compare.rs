//! Comparison relations between recipes: isomorphism, subrecipes,
//! equivalence, in-out alignment, granularity and specificity.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::budget::{Budget, BudgetExceeded};
use crate::recipe::{NodeId, Recipe, RecipeGraph};
use crate::typekb::{Hierarchies, Kind, TypeId};

/// A kind- and arc-preserving bijection between the nodes of two graphs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct NodeBijection {
    pub forward: BTreeMap<NodeId, NodeId>,
}

impl NodeBijection {
    pub fn identity<'a>(nodes: impl IntoIterator<Item = &'a NodeId>) -> Self {
        NodeBijection {
            forward: nodes.into_iter().map(|n| (n.clone(), n.clone())).collect(),
        }
    }

    pub fn get(&self, n: &NodeId) -> Option<&NodeId> {
        self.forward.get(n)
    }

    pub fn inverse(&self) -> NodeBijection {
        NodeBijection {
            forward: self.forward.iter().map(|(a, b)| (b.clone(), a.clone())).collect(),
        }
    }

    /// `other ∘ self`: first this map, then `other`.
    pub fn then(&self, other: &NodeBijection) -> Option<NodeBijection> {
        let mut forward = BTreeMap::new();
        for (a, b) in &self.forward {
            forward.insert(a.clone(), other.forward.get(b)?.clone());
        }
        Some(NodeBijection { forward })
    }

    pub fn is_identity(&self) -> bool {
        self.forward.iter().all(|(a, b)| a == b)
    }
}

/// An order-preserving total map between the nodes of two recipes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct OrderMap {
    pub g: BTreeMap<NodeId, NodeId>,
}

/// Dense view of a graph for the searches below.
struct Dense<'a> {
    nodes: Vec<&'a NodeId>,
    kinds: Vec<Kind>,
    adj: Vec<Vec<bool>>,
    indeg: Vec<usize>,
    outdeg: Vec<usize>,
}

impl<'a> Dense<'a> {
    fn new(g: &'a RecipeGraph) -> Self {
        let nodes: Vec<&NodeId> = g.nodes().collect();
        let pos: BTreeMap<&NodeId, usize> = nodes.iter().enumerate().map(|(i, &n)| (n, i)).collect();
        let kinds = nodes.iter().map(|n| g.kind_of(n).expect("graph node")).collect();
        let k = nodes.len();
        let mut adj = vec![vec![false; k]; k];
        let mut indeg = vec![0; k];
        let mut outdeg = vec![0; k];
        for (a, b) in &g.arcs {
            if let (Some(&i), Some(&j)) = (pos.get(a), pos.get(b)) {
                adj[i][j] = true;
                outdeg[i] += 1;
                indeg[j] += 1;
            }
        }
        Dense {
            nodes,
            kinds,
            adj,
            indeg,
            outdeg,
        }
    }

    /// Transitive-reflexive closure of the arc relation.
    fn reach(&self) -> Vec<Vec<bool>> {
        let k = self.nodes.len();
        let mut r = self.adj.clone();
        for (i, row) in r.iter_mut().enumerate() {
            row[i] = true;
        }
        for m in 0..k {
            for i in 0..k {
                if r[i][m] {
                    for j in 0..k {
                        if r[m][j] {
                            r[i][j] = true;
                        }
                    }
                }
            }
        }
        r
    }

    /// Visit order in which each node after the first is adjacent to an
    /// earlier one where possible, so arc checks prune early.
    fn connected_order(&self) -> Vec<usize> {
        let k = self.nodes.len();
        let mut order = Vec::with_capacity(k);
        let mut placed = vec![false; k];
        while order.len() < k {
            let start = (0..k).find(|&i| !placed[i]).expect("unplaced node");
            placed[start] = true;
            order.push(start);
            let mut cursor = order.len() - 1;
            while cursor < order.len() {
                let v = order[cursor];
                for w in 0..k {
                    if !placed[w] && (self.adj[v][w] || self.adj[w][v]) {
                        placed[w] = true;
                        order.push(w);
                    }
                }
                cursor += 1;
            }
        }
        order
    }
}

/// Searches for an isomorphism `g1 → g2` whose pairs all satisfy `label_ok`.
///
/// Candidates for a node are tried with the same id first, then nodes with
/// `prefer` returning true, then the rest in id order, which makes the
/// witness deterministic.
pub fn find_bijection(
    g1: &RecipeGraph,
    g2: &RecipeGraph,
    label_ok: &dyn Fn(&NodeId, &NodeId) -> bool,
    prefer: &dyn Fn(&NodeId, &NodeId) -> bool,
    budget: &mut Budget,
) -> Result<Option<NodeBijection>, BudgetExceeded> {
    if g1.comestibles.len() != g2.comestibles.len()
        || g1.actions.len() != g2.actions.len()
        || g1.arcs.len() != g2.arcs.len()
    {
        return Ok(None);
    }
    let d1 = Dense::new(g1);
    let d2 = Dense::new(g2);
    let k = d1.nodes.len();
    let order = d1.connected_order();

    let mut candidates: Vec<Vec<usize>> = Vec::with_capacity(k);
    for i in 0..k {
        let mut c: Vec<usize> = (0..k)
            .filter(|&j| {
                d1.kinds[i] == d2.kinds[j]
                    && d1.indeg[i] == d2.indeg[j]
                    && d1.outdeg[i] == d2.outdeg[j]
                    && label_ok(d1.nodes[i], d2.nodes[j])
            })
            .collect();
        if c.is_empty() {
            return Ok(None);
        }
        c.sort_by_key(|&j| {
            (
                d1.nodes[i] != d2.nodes[j],
                !prefer(d1.nodes[i], d2.nodes[j]),
                d2.nodes[j],
            )
        });
        candidates.push(c);
    }

    let mut map = vec![usize::MAX; k];
    let mut used = vec![false; k];
    if extend(0, &order, &candidates, &d1, &d2, &mut map, &mut used, budget)? {
        Ok(Some(NodeBijection {
            forward: (0..k).map(|i| (d1.nodes[i].clone(), d2.nodes[map[i]].clone())).collect(),
        }))
    } else {
        Ok(None)
    }
}

#[allow(clippy::too_many_arguments)]
fn extend(
    depth: usize,
    order: &[usize],
    candidates: &[Vec<usize>],
    d1: &Dense,
    d2: &Dense,
    map: &mut [usize],
    used: &mut [bool],
    budget: &mut Budget,
) -> Result<bool, BudgetExceeded> {
    if depth == order.len() {
        return Ok(true);
    }
    let i = order[depth];
    for &j in &candidates[i] {
        if used[j] {
            continue;
        }
        budget.tick()?;
        let consistent = order[..depth].iter().all(|&m| {
            let mj = map[m];
            d1.adj[i][m] == d2.adj[j][mj] && d1.adj[m][i] == d2.adj[mj][j]
        });
        if !consistent {
            continue;
        }
        map[i] = j;
        used[j] = true;
        if extend(depth + 1, order, candidates, d1, d2, map, used, budget)? {
            return Ok(true);
        }
        used[j] = false;
        map[i] = usize::MAX;
    }
    Ok(false)
}

fn same_type<'a>(r1: &'a Recipe, r2: &'a Recipe) -> impl Fn(&NodeId, &NodeId) -> bool + 'a {
    move |a, b| r1.type_of(a) == r2.type_of(b)
}

/// Structural isomorphism of the two recipe graphs (types ignored).
pub fn isomorphic(r1: &Recipe, r2: &Recipe) -> Option<NodeBijection> {
    isomorphic_within(r1, r2, &mut Budget::unlimited()).expect("unlimited budget")
}

pub fn isomorphic_within(
    r1: &Recipe,
    r2: &Recipe,
    budget: &mut Budget,
) -> Result<Option<NodeBijection>, BudgetExceeded> {
    find_bijection(r1.graph(), r2.graph(), &|_, _| true, &same_type(r1, r2), budget)
}

/// `r1 ⊑ r2`: node subsets, induced arcs, agreeing types.
pub fn is_subrecipe(r1: &Recipe, r2: &Recipe) -> bool {
    if !r1.comestibles().is_subset(r2.comestibles()) || !r1.actions().is_subset(r2.actions()) {
        return false;
    }
    let induced: BTreeSet<&(NodeId, NodeId)> = r2
        .arcs()
        .iter()
        .filter(|(a, b)| r1.contains(a) && r1.contains(b))
        .collect();
    if induced.len() != r1.arcs().len() || !r1.arcs().iter().all(|e| induced.contains(e)) {
        return false;
    }
    r1.typing().iter().all(|(n, t)| r2.type_of(n) == Some(t))
}

/// `r1 ≡ r2`: isomorphic through a type-preserving bijection.
pub fn equivalent(r1: &Recipe, r2: &Recipe) -> Option<NodeBijection> {
    equivalent_within(r1, r2, &mut Budget::unlimited()).expect("unlimited budget")
}

pub fn equivalent_within(
    r1: &Recipe,
    r2: &Recipe,
    budget: &mut Budget,
) -> Result<Option<NodeBijection>, BudgetExceeded> {
    let label = same_type(r1, r2);
    find_bijection(r1.graph(), r2.graph(), &label, &|_, _| true, budget)
}

/// `r1 ≡io r2`: same input and output node ids, with equal types on them.
pub fn in_out_aligned(r1: &Recipe, r2: &Recipe) -> bool {
    let (a, b) = (r1.roles(), r2.roles());
    a.inputs == b.inputs
        && a.outputs == b.outputs
        && a.inputs
            .iter()
            .chain(&a.outputs)
            .all(|n| r1.type_of(n) == r2.type_of(n))
}

/// Searches for an order-preserving total map from `r1`'s nodes to `r2`'s.
///
/// Returns `None` when the recipes are not in-out aligned or no map exists.
/// With `strict`, the map must also fix every input and output node.
pub fn finer_grained(
    r1: &Recipe,
    r2: &Recipe,
    strict: bool,
    budget: &mut Budget,
) -> Result<Option<OrderMap>, BudgetExceeded> {
    if !in_out_aligned(r1, r2) {
        return Ok(None);
    }
    let d1 = Dense::new(r1.graph());
    let d2 = Dense::new(r2.graph());
    let (reach1, reach2) = (d1.reach(), d2.reach());
    let pos2: BTreeMap<&NodeId, usize> = d2.nodes.iter().enumerate().map(|(i, &n)| (n, i)).collect();
    let roles = r1.roles();
    let fixed: BTreeSet<&NodeId> = if strict {
        roles.inputs.iter().chain(&roles.outputs).collect()
    } else {
        BTreeSet::new()
    };

    let position: BTreeMap<&NodeId, usize> = d1.nodes.iter().enumerate().map(|(i, &n)| (n, i)).collect();
    let order: Vec<usize> = r1.topological_order().iter().map(|n| position[n]).collect();
    let candidates: Vec<Vec<usize>> = (0..d1.nodes.len())
        .map(|i| {
            let n = d1.nodes[i];
            if fixed.contains(n) {
                vec![pos2[n]]
            } else {
                let mut c: Vec<usize> = (0..d2.nodes.len()).collect();
                c.sort_by_key(|&j| (d2.nodes[j] != n, d2.nodes[j]));
                c
            }
        })
        .collect();

    let mut g = vec![usize::MAX; d1.nodes.len()];
    fn go(
        depth: usize,
        order: &[usize],
        candidates: &[Vec<usize>],
        reach1: &[Vec<bool>],
        reach2: &[Vec<bool>],
        g: &mut [usize],
        budget: &mut Budget,
    ) -> Result<bool, BudgetExceeded> {
        if depth == order.len() {
            return Ok(true);
        }
        let i = order[depth];
        for &j in &candidates[i] {
            budget.tick()?;
            let ok = order[..depth].iter().all(|&m| {
                (!reach1[m][i] || reach2[g[m]][j]) && (!reach1[i][m] || reach2[j][g[m]])
            });
            if ok {
                g[i] = j;
                if go(depth + 1, order, candidates, reach1, reach2, g, budget)? {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }
    if go(0, &order, &candidates, &reach1, &reach2, &mut g, budget)? {
        Ok(Some(OrderMap {
            g: (0..d1.nodes.len())
                .map(|i| (d1.nodes[i].clone(), d2.nodes[g[i]].clone()))
                .collect(),
        }))
    } else {
        Ok(None)
    }
}

/// `r1` is more specific than `r2`: isomorphic via `b` with every type of
/// `r1` at or below the type of its image in `r2`.
pub fn more_specific(r1: &Recipe, r2: &Recipe, hs: &Hierarchies) -> Option<NodeBijection> {
    more_specific_within(r1, r2, hs, &mut Budget::unlimited()).expect("unlimited budget")
}

pub fn more_specific_within(
    r1: &Recipe,
    r2: &Recipe,
    hs: &Hierarchies,
    budget: &mut Budget,
) -> Result<Option<NodeBijection>, BudgetExceeded> {
    let below = |a: &NodeId, b: &NodeId| -> bool {
        let (Some(k), Some(t1), Some(t2)) = (r1.kind_of(a), r1.type_of(a), r2.type_of(b)) else {
            return false;
        };
        hs.get(k).is_subtype(t1, t2).unwrap_or(false)
    };
    find_bijection(r1.graph(), r2.graph(), &below, &same_type(r1, r2), budget)
}

/// Types of `r`'s nodes under a bijection, keyed by the image node.
pub fn transport_typing(r: &Recipe, b: &NodeBijection) -> BTreeMap<NodeId, TypeId> {
    r.typing()
        .iter()
        .filter_map(|(n, t)| b.get(n).map(|m| (m.clone(), t.clone())))
        .collect()
}
