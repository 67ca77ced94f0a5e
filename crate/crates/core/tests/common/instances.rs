//! Small generated instances shared by the oracle and acceptance suites.

use std::collections::BTreeMap;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use recipe_calculus::accept::{arc_triples, AcceptTuple, AcceptabilitySet};
use recipe_calculus::gen::{Generator, CHILDREN};
use recipe_calculus::recipe::{NodeId, Recipe, RecipeGraph};
use recipe_calculus::subst::{Candidates, Unavailable};
use recipe_calculus::typekb::{Hierarchies, Kind, TypeId};

/// A type in the same top-level branch as `t`, so comestible typings stay valid.
pub fn near_type(g: &mut Generator, t: &TypeId) -> TypeId {
    let base = t.as_str().split('.').next().unwrap().to_owned();
    match g.rng().random_range(0..=CHILDREN) {
        0 => TypeId::new(base),
        j => TypeId::new(format!("{base}.{}", j - 1)),
    }
}

/// Same recipe under shuffled node names, so id order carries no hint.
pub fn shuffled_copy(g: &mut Generator, r: &Recipe, hs: &Hierarchies) -> Recipe {
    let mut names = BTreeMap::new();
    for (kind, set) in [("k", r.comestibles()), ("b", r.actions())] {
        let mut fresh: Vec<usize> = (0..set.len()).collect();
        fresh.shuffle(g.rng());
        for (n, i) in set.iter().zip(fresh) {
            names.insert(n.clone(), NodeId::new(format!("{kind}{i}")));
        }
    }
    let graph = RecipeGraph::new(
        r.comestibles().iter().map(|n| names[n].clone()),
        r.actions().iter().map(|n| names[n].clone()),
        r.arcs().iter().map(|(a, b)| (names[a].clone(), names[b].clone())),
    );
    let typing = r.typing().iter().map(|(n, t)| (names[n].clone(), t.clone())).collect();
    Recipe::new(graph, typing, hs).unwrap()
}

pub fn retype_one(g: &mut Generator, r: &Recipe, hs: &Hierarchies) -> Recipe {
    let nodes: Vec<NodeId> = r.nodes().cloned().collect();
    let n = nodes.choose(g.rng()).unwrap().clone();
    let mut typing = r.typing().clone();
    let t = match r.kind_of(&n).unwrap() {
        Kind::Comestible => near_type(g, &typing[&n]),
        Kind::Action => g.action_type(),
    };
    typing.insert(n, t);
    Recipe::new(r.graph().clone(), typing, hs).unwrap()
}

pub struct PlanningInstance {
    pub recipe: Recipe,
    pub accept: AcceptabilitySet,
    pub candidates: Candidates,
    pub unavailable: Unavailable,
}

/// A recipe of at most 5 nodes, up to 2 unavailable types and at most 4
/// candidates per node. The tuples come from a retyped variant, so a
/// repair often exists.
pub fn planning_instance(g: &mut Generator, hs: &Hierarchies) -> PlanningInstance {
    let r = g.recipe(hs, 5);
    let mut variant = r.clone();
    for _ in 0..2 {
        variant = retype_one(g, &variant, hs);
    }
    let mut tuples: Vec<AcceptTuple> = arc_triples(&variant).into_iter().map(|t| t.types).collect();
    tuples.extend(arc_triples(&r).into_iter().map(|t| t.types).filter(|_| g.rng().random_bool(0.5)));

    let mut cands = BTreeMap::new();
    for n in r.nodes() {
        let mut c: Vec<TypeId> = vec![variant.typing()[n].clone()];
        for _ in 0..3 {
            c.push(match r.kind_of(n).unwrap() {
                Kind::Comestible => near_type(g, &r.typing()[n]),
                Kind::Action => g.action_type(),
            });
        }
        c.sort();
        c.dedup();
        c.retain(|t| t != &r.typing()[n]);
        c.truncate(4);
        cands.insert(n.clone(), c);
    }

    let comestibles: Vec<&NodeId> = r.comestibles().iter().collect();
    let k = g.rng().random_range(1..=2.min(comestibles.len()));
    let unavailable = Unavailable {
        types: comestibles.choose_multiple(g.rng(), k).map(|n| r.typing()[*n].clone()).collect(),
        nodes: Default::default(),
    };
    PlanningInstance {
        recipe: r,
        accept: AcceptabilitySet::exact(tuples),
        candidates: Candidates(cands),
        unavailable,
    }
}
