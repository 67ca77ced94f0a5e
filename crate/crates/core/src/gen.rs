//! Seeded random recipes over a synthetic pair of hierarchies, for property
//! tests and oracle comparisons.
//!
//! Recipes grow one action at a time. Each new action consumes at least one
//! current output plus optional fresh inputs and produces fresh outputs, so
//! every generated graph is connected, acyclic and has at most one producer
//! per comestible. Each comestible gets a type from its own top-level branch,
//! which keeps comestible types pairwise non-comparable.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::compose::induced;
use crate::recipe::{NodeId, Recipe, RecipeGraph};
use crate::typekb::{Hierarchies, HierarchyDoc, Kind, TypeEntry, TypeHierarchy, TypeId};

pub const COMESTIBLE_BRANCHES: usize = 64;
pub const ACTION_BRANCHES: usize = 12;
pub const CHILDREN: usize = 3;

fn tree(kind: Kind, root: &str, prefix: &str, branches: usize) -> TypeHierarchy {
    let mut types = vec![TypeEntry {
        id: root.into(),
        parents: vec![],
        aliases: vec![],
    }];
    for i in 0..branches {
        let b = format!("{prefix}{i}");
        for j in 0..CHILDREN {
            types.push(TypeEntry {
                id: format!("{b}.{j}"),
                parents: vec![b.clone()],
                aliases: vec![],
            });
        }
        types.push(TypeEntry {
            id: b,
            parents: vec![root.into()],
            aliases: vec![],
        });
    }
    TypeHierarchy::load(&HierarchyDoc {
        kind,
        root: root.into(),
        types,
    })
    .expect("synthetic hierarchy is well formed")
}

/// Comestible types `com{i}` with children `com{i}.{j}`; action types
/// `act{i}` with children `act{i}.{j}`.
pub fn synthetic_hierarchies() -> Hierarchies {
    Hierarchies {
        action: tree(Kind::Action, "action", "act", ACTION_BRANCHES),
        comestible: tree(Kind::Comestible, "comestible", "com", COMESTIBLE_BRANCHES),
    }
}

pub struct Generator {
    rng: ChaCha8Rng,
}

impl Generator {
    pub fn new(seed: u64) -> Self {
        Generator {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// A type from comestible branch `branch`: the branch itself or a child.
    pub fn comestible_type(&mut self, branch: usize) -> TypeId {
        match self.rng.random_range(0..=CHILDREN) {
            0 => TypeId::new(format!("com{branch}")),
            j => TypeId::new(format!("com{branch}.{}", j - 1)),
        }
    }

    pub fn action_type(&mut self) -> TypeId {
        let i = self.rng.random_range(0..ACTION_BRANCHES);
        match self.rng.random_range(0..=CHILDREN) {
            0 => TypeId::new(format!("act{i}")),
            j => TypeId::new(format!("act{i}.{}", j - 1)),
        }
    }

    fn branches(&mut self) -> Vec<usize> {
        let mut b: Vec<usize> = (0..COMESTIBLE_BRANCHES).collect();
        b.shuffle(&mut self.rng);
        b
    }

    /// A random recipe with at most `max_nodes` nodes (at least 3).
    pub fn recipe(&mut self, hs: &Hierarchies, max_nodes: usize) -> Recipe {
        let mut branches = self.branches();
        self.recipe_from(hs, max_nodes, "", &mut branches)
    }

    /// Like [`Generator::recipe`], with node ids prefixed and comestible
    /// branches drawn from `branches`.
    pub fn recipe_from(&mut self, hs: &Hierarchies, max_nodes: usize, prefix: &str, branches: &mut Vec<usize>) -> Recipe {
        let max_nodes = max_nodes.max(3);
        let mut coms: Vec<NodeId> = Vec::new();
        let mut acts: Vec<NodeId> = Vec::new();
        let mut arcs = BTreeSet::new();
        let mut typing = BTreeMap::new();
        let mut outputs: Vec<NodeId> = Vec::new();

        let mut fresh_com = |g: &mut Generator, coms: &mut Vec<NodeId>, typing: &mut BTreeMap<NodeId, TypeId>| {
            let id = NodeId::new(format!("{prefix}c{}", coms.len()));
            let branch = branches.pop().expect("enough comestible branches");
            typing.insert(id.clone(), g.comestible_type(branch));
            coms.push(id.clone());
            id
        };

        loop {
            let first = acts.is_empty();
            let room = max_nodes - coms.len() - acts.len();
            // an action needs itself, one output, and one fresh input if it is the first
            let minimum = if first { 3 } else { 2 };
            if room < minimum || (!first && self.rng.random_bool(0.2)) {
                break;
            }
            let a = NodeId::new(format!("{prefix}a{}", acts.len()));
            typing.insert(a.clone(), self.action_type());
            acts.push(a.clone());
            let mut room = room - 1;

            let mut consumed = Vec::new();
            if !first {
                outputs.shuffle(&mut self.rng);
                let take = self.rng.random_range(1..=outputs.len().min(2));
                consumed = outputs.drain(..take).collect();
            }
            let fresh_inputs = if first {
                self.rng.random_range(1..=2.min(room - 1))
            } else if room >= 2 && self.rng.random_bool(0.3) {
                1
            } else {
                0
            };
            for _ in 0..fresh_inputs {
                consumed.push(fresh_com(self, &mut coms, &mut typing));
            }
            room -= fresh_inputs;
            for c in consumed {
                arcs.insert((c, a.clone()));
            }
            let outs = self.rng.random_range(1..=2.min(room));
            for _ in 0..outs {
                let c = fresh_com(self, &mut coms, &mut typing);
                arcs.insert((a.clone(), c.clone()));
                outputs.push(c);
            }
        }
        Recipe::new(RecipeGraph::new(coms, acts, arcs), typing, hs).expect("generated recipe is valid")
    }

    /// A recipe in-out aligned with `r`: same input and output nodes and
    /// types, joined by a chain of fresh actions and intermediates whose
    /// types avoid every branch used in `host`.
    pub fn interface_partner(&mut self, hs: &Hierarchies, r: &Recipe, host: &Recipe, max_actions: usize) -> Recipe {
        let roles = r.roles();
        let used: BTreeSet<usize> = host
            .typing()
            .iter()
            .filter(|(n, _)| host.kind_of(n) == Some(Kind::Comestible))
            .map(|(_, t)| branch_of(t))
            .collect();
        let mut free: Vec<usize> = (0..COMESTIBLE_BRANCHES).filter(|b| !used.contains(b)).collect();
        free.shuffle(&mut self.rng);

        let k = self.rng.random_range(1..=max_actions.max(1));
        let acts: Vec<NodeId> = (0..k).map(|i| NodeId::new(format!("y{i}"))).collect();
        let mids: Vec<NodeId> = (1..k).map(|i| NodeId::new(format!("m{i}"))).collect();
        let mut arcs = BTreeSet::new();
        let mut typing = BTreeMap::new();
        for a in &acts {
            typing.insert(a.clone(), self.action_type());
        }
        for (i, m) in mids.iter().enumerate() {
            let branch = free.pop().expect("free branch");
            typing.insert(m.clone(), self.comestible_type(branch));
            arcs.insert((acts[i].clone(), m.clone()));
            arcs.insert((m.clone(), acts[i + 1].clone()));
        }
        for (j, c) in roles.inputs.iter().enumerate() {
            let at = if j == 0 { 0 } else { self.rng.random_range(0..k) };
            arcs.insert((c.clone(), acts[at].clone()));
            typing.insert(c.clone(), r.typing()[c].clone());
        }
        for (j, c) in roles.outputs.iter().enumerate() {
            let at = if j == 0 { k - 1 } else { self.rng.random_range(0..k) };
            arcs.insert((acts[at].clone(), c.clone()));
            typing.insert(c.clone(), r.typing()[c].clone());
        }
        let coms = roles.inputs.iter().chain(&roles.outputs).chain(&mids).cloned();
        Recipe::new(RecipeGraph::new(coms, acts, arcs), typing, hs).expect("partner recipe is valid")
    }

    /// A random untrimmed subrecipe of `r`: a connected set of actions with
    /// all their adjacent comestibles.
    pub fn untrimmed_part(&mut self, r: &Recipe) -> Recipe {
        let acts: Vec<&NodeId> = r.actions().iter().collect();
        let start = acts[self.rng.random_range(0..acts.len())].clone();
        let target = self.rng.random_range(1..=acts.len());
        let mut chosen = BTreeSet::from([start]);
        while chosen.len() < target {
            let frontier: Vec<NodeId> = r
                .actions()
                .iter()
                .filter(|a| !chosen.contains(*a) && shares_comestible(r, a, &chosen))
                .cloned()
                .collect();
            if frontier.is_empty() {
                break;
            }
            chosen.insert(frontier[self.rng.random_range(0..frontier.len())].clone());
        }
        let coms: BTreeSet<NodeId> = r
            .arcs()
            .iter()
            .filter_map(|(x, y)| {
                if chosen.contains(x) {
                    Some(y.clone())
                } else if chosen.contains(y) {
                    Some(x.clone())
                } else {
                    None
                }
            })
            .collect();
        induced(r, &coms, &chosen)
    }

    /// Atomic recipes over a shared pool of comestible ids with fixed types,
    /// so that some of them compose.
    pub fn atomic_pool(&mut self, hs: &Hierarchies, count: usize, pool: usize, max_nodes: usize) -> Vec<Recipe> {
        let mut branches = self.branches();
        let ids: Vec<NodeId> = (0..pool).map(|i| NodeId::new(format!("p{i}"))).collect();
        let types: Vec<TypeId> = (0..pool)
            .map(|_| {
                let b = branches.pop().expect("branch");
                self.comestible_type(b)
            })
            .collect();
        let mut out = Vec::new();
        while out.len() < count {
            let size = self.rng.random_range(3..=max_nodes.max(3)).min(pool + 1);
            let mut picks: Vec<usize> = (0..pool).collect();
            picks.shuffle(&mut self.rng);
            let coms = &picks[..size - 1];
            let split = self.rng.random_range(1..coms.len());
            let a = NodeId::new(format!("q{}", out.len()));
            let mut arcs = BTreeSet::new();
            let mut typing = BTreeMap::from([(a.clone(), self.action_type())]);
            for (k, &i) in coms.iter().enumerate() {
                if k < split {
                    arcs.insert((ids[i].clone(), a.clone()));
                } else {
                    arcs.insert((a.clone(), ids[i].clone()));
                }
                typing.insert(ids[i].clone(), types[i].clone());
            }
            let graph = RecipeGraph::new(coms.iter().map(|&i| ids[i].clone()), [a], arcs);
            out.push(Recipe::new(graph, typing, hs).expect("atomic recipe is valid"));
        }
        out
    }
}

fn shares_comestible(r: &Recipe, a: &NodeId, chosen: &BTreeSet<NodeId>) -> bool {
    let around = |x: &NodeId| -> BTreeSet<&NodeId> {
        r.arcs()
            .iter()
            .filter_map(|(p, q)| {
                if p == x {
                    Some(q)
                } else if q == x {
                    Some(p)
                } else {
                    None
                }
            })
            .collect()
    };
    let mine = around(a);
    chosen.iter().any(|c| around(c).iter().any(|n| mine.contains(n)))
}

/// Top-level branch index of a synthetic comestible type.
pub fn branch_of(t: &TypeId) -> usize {
    t.as_str()
        .trim_start_matches("com")
        .split('.')
        .next()
        .and_then(|s| s.parse().ok())
        .unwrap_or(usize::MAX)
}

/// Replaces `part` by one fresh action from its inputs to its outputs.
pub fn collapse(part: &Recipe, action: NodeId, action_type: TypeId, hs: &Hierarchies) -> Recipe {
    let roles = part.roles();
    let mut arcs = BTreeSet::new();
    let mut typing = BTreeMap::from([(action.clone(), action_type)]);
    for c in &roles.inputs {
        arcs.insert((c.clone(), action.clone()));
        typing.insert(c.clone(), part.typing()[c].clone());
    }
    for c in &roles.outputs {
        arcs.insert((action.clone(), c.clone()));
        typing.insert(c.clone(), part.typing()[c].clone());
    }
    let coms = roles.inputs.iter().chain(&roles.outputs).cloned();
    Recipe::new(RecipeGraph::new(coms, [action], arcs), typing, hs).expect("collapsed part is valid")
}
