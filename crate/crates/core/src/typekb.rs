//! Type hierarchies for actions and comestibles.
//!
//! A hierarchy is a rooted DAG: every type may have several parents, exactly
//! one type (the root) has none, and every type reaches the root. Subtyping
//! (`t1 ⪯ t2`) is reachability along child→parent edges, and two types are
//! *comparable* when one is a subtype of the other.
//!
//! Alternative spellings of a type are stored as explicit aliases and are
//! resolved to the canonical identifier before any query.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The two kinds of node (and of type hierarchy) in a recipe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Action,
    Comestible,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kind::Action => f.write_str("action"),
            Kind::Comestible => f.write_str("comestible"),
        }
    }
}

/// Canonical identifier of a type within one hierarchy.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TypeId(String);

impl TypeId {
    pub fn new(name: impl Into<String>) -> Self {
        TypeId(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for TypeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for TypeId {
    fn from(s: &str) -> Self {
        TypeId(s.to_owned())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TypeError {
    #[error("unknown {kind} type `{name}`")]
    UnknownType { kind: Kind, name: String },
    #[error("`{name}` is a {found} type, expected a {expected} type")]
    KindMismatch {
        name: String,
        expected: Kind,
        found: Kind,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HierarchyError {
    #[error("cycle detected: {}", join(.0))]
    CycleDetected(Vec<String>),
    #[error("multiple roots: {}", join(.0))]
    MultipleRoots(Vec<String>),
    #[error("hierarchy has no root")]
    NoRoot,
    #[error("edge {child} -> {parent} refers to an undeclared type")]
    DanglingEdge { child: String, parent: String },
    #[error("alias `{0}` is declared more than once or shadows a type")]
    DuplicateAlias(String),
    #[error("type `{0}` is declared more than once")]
    DuplicateType(String),
    #[error("declared root `{declared}` differs from the parentless type `{actual}`")]
    RootMismatch { declared: String, actual: String },
}

fn join(items: &[String]) -> String {
    items.join(", ")
}

/// Serialized form of a hierarchy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HierarchyDoc {
    pub kind: Kind,
    pub root: String,
    pub types: Vec<TypeEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TypeEntry {
    pub id: String,
    #[serde(default)]
    pub parents: Vec<String>,
    #[serde(default)]
    pub aliases: Vec<String>,
}

impl HierarchyDoc {
    /// Sorts types, parents and aliases so that serialization is stable.
    pub fn canonicalize(&mut self) {
        for t in &mut self.types {
            t.parents.sort();
            t.parents.dedup();
            t.aliases.sort();
            t.aliases.dedup();
        }
        self.types.sort_by(|a, b| a.id.cmp(&b.id));
    }
}

/// A validated, immutable type hierarchy.
#[derive(Debug, Clone)]
pub struct TypeHierarchy {
    kind: Kind,
    names: Vec<TypeId>,
    index: HashMap<String, usize>,
    aliases: BTreeMap<String, usize>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    root: usize,
    // shortest child->parent distance to every ancestor, including self at 0
    up: Vec<HashMap<usize, u32>>,
    depth: u32,
}

impl TypeHierarchy {
    pub fn load(doc: &HierarchyDoc) -> Result<Self, HierarchyError> {
        let mut index = HashMap::new();
        let mut names = Vec::with_capacity(doc.types.len());
        for entry in &doc.types {
            if index.insert(entry.id.clone(), names.len()).is_some() {
                return Err(HierarchyError::DuplicateType(entry.id.clone()));
            }
            names.push(TypeId(entry.id.clone()));
        }

        let n = names.len();
        let mut parents = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        for (i, entry) in doc.types.iter().enumerate() {
            for p in &entry.parents {
                let Some(&j) = index.get(p) else {
                    return Err(HierarchyError::DanglingEdge {
                        child: entry.id.clone(),
                        parent: p.clone(),
                    });
                };
                if !parents[i].contains(&j) {
                    parents[i].push(j);
                    children[j].push(i);
                }
            }
        }

        if let Some(cycle) = find_cycle(&parents) {
            return Err(HierarchyError::CycleDetected(
                cycle.into_iter().map(|i| names[i].0.clone()).collect(),
            ));
        }

        let roots: Vec<usize> = (0..n).filter(|&i| parents[i].is_empty()).collect();
        let root = match roots.as_slice() {
            [] => return Err(HierarchyError::NoRoot),
            [r] => *r,
            many => {
                let mut listed: Vec<String> = many.iter().map(|&i| names[i].0.clone()).collect();
                listed.sort();
                return Err(HierarchyError::MultipleRoots(listed));
            }
        };
        if names[root].0 != doc.root {
            return Err(HierarchyError::RootMismatch {
                declared: doc.root.clone(),
                actual: names[root].0.clone(),
            });
        }

        let mut aliases = BTreeMap::new();
        for (i, entry) in doc.types.iter().enumerate() {
            for alias in &entry.aliases {
                if index.contains_key(alias) || aliases.insert(alias.clone(), i).is_some() {
                    return Err(HierarchyError::DuplicateAlias(alias.clone()));
                }
            }
        }

        let up: Vec<HashMap<usize, u32>> = (0..n).map(|i| bfs(i, &parents)).collect();
        let depth = up.iter().map(|m| m[&root]).max().unwrap_or(0);

        Ok(TypeHierarchy {
            kind: doc.kind,
            names,
            index,
            aliases,
            parents,
            children,
            root,
            up,
            depth,
        })
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn root(&self) -> &TypeId {
        &self.names[self.root]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Longest shortest-path distance from any type to the root.
    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn types(&self) -> impl Iterator<Item = &TypeId> {
        self.names.iter()
    }

    pub fn contains(&self, t: &TypeId) -> bool {
        self.index.contains_key(t.as_str())
    }

    /// Resolves a canonical name or alias to its canonical [`TypeId`].
    pub fn resolve(&self, text: &str) -> Result<TypeId, TypeError> {
        self.lookup(text).map(|i| self.names[i].clone())
    }

    fn lookup(&self, text: &str) -> Result<usize, TypeError> {
        self.index
            .get(text)
            .or_else(|| self.aliases.get(text))
            .copied()
            .ok_or_else(|| TypeError::UnknownType {
                kind: self.kind,
                name: text.to_owned(),
            })
    }

    fn idx(&self, t: &TypeId) -> Result<usize, TypeError> {
        self.index
            .get(t.as_str())
            .copied()
            .ok_or_else(|| TypeError::UnknownType {
                kind: self.kind,
                name: t.0.clone(),
            })
    }

    pub fn parents(&self, t: &TypeId) -> Result<Vec<&TypeId>, TypeError> {
        let i = self.idx(t)?;
        Ok(self.parents[i].iter().map(|&j| &self.names[j]).collect())
    }

    pub fn children(&self, t: &TypeId) -> Result<Vec<&TypeId>, TypeError> {
        let i = self.idx(t)?;
        Ok(self.children[i].iter().map(|&j| &self.names[j]).collect())
    }

    pub fn aliases_of(&self, t: &TypeId) -> Result<Vec<&str>, TypeError> {
        let i = self.idx(t)?;
        Ok(self
            .aliases
            .iter()
            .filter(|(_, &j)| j == i)
            .map(|(a, _)| a.as_str())
            .collect())
    }

    /// `t1 ⪯ t2`: `t1` equals `t2` or lies below it.
    pub fn is_subtype(&self, t1: &TypeId, t2: &TypeId) -> Result<bool, TypeError> {
        let (i, j) = (self.idx(t1)?, self.idx(t2)?);
        Ok(self.up[i].contains_key(&j))
    }

    /// `t1 ≃ t2`: the two types lie on a common ancestor path.
    pub fn comparable(&self, t1: &TypeId, t2: &TypeId) -> Result<bool, TypeError> {
        let (i, j) = (self.idx(t1)?, self.idx(t2)?);
        Ok(self.up[i].contains_key(&j) || self.up[j].contains_key(&i))
    }

    /// Number of upward steps from `t` to its ancestor `ancestor`, if it is one.
    pub fn up_distance(&self, t: &TypeId, ancestor: &TypeId) -> Result<Option<u32>, TypeError> {
        let (i, j) = (self.idx(t)?, self.idx(ancestor)?);
        Ok(self.up[i].get(&j).copied())
    }

    /// Types comparable with `t` whose ancestor/descendant distance is at most `limit`.
    pub fn comparable_within(&self, t: &TypeId, limit: u32) -> Result<BTreeSet<TypeId>, TypeError> {
        let i = self.idx(t)?;
        let mut out = BTreeSet::new();
        for (&j, &d) in &self.up[i] {
            if d <= limit {
                out.insert(self.names[j].clone());
            }
        }
        for (j, ups) in self.up.iter().enumerate() {
            if let Some(&d) = ups.get(&i) {
                if d <= limit {
                    out.insert(self.names[j].clone());
                }
            }
        }
        Ok(out)
    }

    /// Types within `radius` undirected hierarchy edges of `t` (parents,
    /// children, siblings, ...), excluding `t` itself.
    pub fn neighbourhood(&self, t: &TypeId, radius: u32) -> Result<BTreeSet<TypeId>, TypeError> {
        let start = self.idx(t)?;
        let mut seen = HashMap::from([(start, 0u32)]);
        let mut queue = VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            let d = seen[&i];
            if d == radius {
                continue;
            }
            for &j in self.parents[i].iter().chain(&self.children[i]) {
                if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(j) {
                    e.insert(d + 1);
                    queue.push_back(j);
                }
            }
        }
        Ok(seen
            .into_keys()
            .filter(|&j| j != start)
            .map(|j| self.names[j].clone())
            .collect())
    }

    /// Hierarchy-path fallback distance; see [`DistanceModel`].
    fn path_distance(&self, t1: &TypeId, t2: &TypeId, penalty: f64, step: f64) -> Result<f64, TypeError> {
        let (i, j) = (self.idx(t1)?, self.idx(t2)?);
        if i == j {
            return Ok(0.0);
        }
        let mut best = f64::INFINITY;
        for (a, &u1) in &self.up[i] {
            if let Some(&u2) = self.up[j].get(a) {
                let cost = step * f64::from(u1 + u2) + penalty * f64::from(u1.abs_diff(u2));
                best = best.min(cost);
            }
        }
        Ok(best / f64::from(self.depth.max(1)))
    }

    /// Rebuilds a canonical document for this hierarchy.
    pub fn to_doc(&self) -> HierarchyDoc {
        let mut doc = HierarchyDoc {
            kind: self.kind,
            root: self.root().0.clone(),
            types: self
                .names
                .iter()
                .enumerate()
                .map(|(i, name)| TypeEntry {
                    id: name.0.clone(),
                    parents: self.parents[i].iter().map(|&j| self.names[j].0.clone()).collect(),
                    aliases: self
                        .aliases
                        .iter()
                        .filter(|(_, &k)| k == i)
                        .map(|(a, _)| a.clone())
                        .collect(),
                })
                .collect(),
        };
        doc.canonicalize();
        doc
    }
}

fn bfs(start: usize, parents: &[Vec<usize>]) -> HashMap<usize, u32> {
    let mut dist = HashMap::from([(start, 0)]);
    let mut queue = VecDeque::from([start]);
    while let Some(i) = queue.pop_front() {
        let d = dist[&i];
        for &p in &parents[i] {
            if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(p) {
                e.insert(d + 1);
                queue.push_back(p);
            }
        }
    }
    dist
}

/// Returns the nodes of one directed cycle, if any.
fn find_cycle(succ: &[Vec<usize>]) -> Option<Vec<usize>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Open,
        Done,
    }
    let n = succ.len();
    let mut mark = vec![Mark::New; n];
    let mut stack: Vec<(usize, usize)> = Vec::new();
    let mut path: Vec<usize> = Vec::new();
    for s in 0..n {
        if mark[s] != Mark::New {
            continue;
        }
        mark[s] = Mark::Open;
        stack.push((s, 0));
        path.push(s);
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            if let Some(&w) = succ[v].get(*next) {
                *next += 1;
                match mark[w] {
                    Mark::New => {
                        mark[w] = Mark::Open;
                        stack.push((w, 0));
                        path.push(w);
                    }
                    Mark::Open => {
                        let at = path.iter().position(|&x| x == w).unwrap_or(0);
                        return Some(path[at..].to_vec());
                    }
                    Mark::Done => {}
                }
            } else {
                mark[v] = Mark::Done;
                stack.pop();
                path.pop();
            }
        }
    }
    None
}

/// The action and comestible hierarchies of one workspace.
#[derive(Debug, Clone)]
pub struct Hierarchies {
    pub action: TypeHierarchy,
    pub comestible: TypeHierarchy,
}

impl Hierarchies {
    pub fn new(action: TypeHierarchy, comestible: TypeHierarchy) -> Result<Self, TypeError> {
        for (h, expected) in [(&action, Kind::Action), (&comestible, Kind::Comestible)] {
            if h.kind() != expected {
                return Err(TypeError::KindMismatch {
                    name: h.root().to_string(),
                    expected,
                    found: h.kind(),
                });
            }
        }
        Ok(Hierarchies { action, comestible })
    }

    pub fn get(&self, kind: Kind) -> &TypeHierarchy {
        match kind {
            Kind::Action => &self.action,
            Kind::Comestible => &self.comestible,
        }
    }

    /// Resolves `text` in the hierarchy of `kind`, reporting a kind mismatch
    /// when the text names a type of the other kind.
    pub fn resolve(&self, kind: Kind, text: &str) -> Result<TypeId, TypeError> {
        let other = match kind {
            Kind::Action => Kind::Comestible,
            Kind::Comestible => Kind::Action,
        };
        self.get(kind).resolve(text).map_err(|e| {
            if self.get(other).resolve(text).is_ok() {
                TypeError::KindMismatch {
                    name: text.to_owned(),
                    expected: kind,
                    found: other,
                }
            } else {
                e
            }
        })
    }

    /// The kind of hierarchy that declares `text`, if any.
    pub fn kind_of(&self, text: &str) -> Option<Kind> {
        if self.comestible.resolve(text).is_ok() {
            Some(Kind::Comestible)
        } else if self.action.resolve(text).is_ok() {
            Some(Kind::Action)
        } else {
            None
        }
    }
}

pub const DEFAULT_GENERALIZATION_PENALTY: f64 = 2.0;

fn default_penalty() -> f64 {
    DEFAULT_GENERALIZATION_PENALTY
}

/// Serialized distance table. Accepts either a bare array of `[t1, t2, d]`
/// triples or an object with `entries` and `generalization_penalty`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DistanceDoc {
    Full {
        entries: Vec<(String, String, f64)>,
        #[serde(default = "default_penalty")]
        generalization_penalty: f64,
    },
    Table(Vec<(String, String, f64)>),
}

impl Default for DistanceDoc {
    fn default() -> Self {
        DistanceDoc::Full {
            entries: Vec::new(),
            generalization_penalty: DEFAULT_GENERALIZATION_PENALTY,
        }
    }
}

impl DistanceDoc {
    pub fn entries(&self) -> &[(String, String, f64)] {
        match self {
            DistanceDoc::Full { entries, .. } | DistanceDoc::Table(entries) => entries,
        }
    }

    pub fn generalization_penalty(&self) -> f64 {
        match self {
            DistanceDoc::Full {
                generalization_penalty,
                ..
            } => *generalization_penalty,
            DistanceDoc::Table(_) => DEFAULT_GENERALIZATION_PENALTY,
        }
    }

    /// Object form with each pair ordered and entries sorted.
    pub fn canonical(&self) -> DistanceDoc {
        let mut entries: Vec<(String, String, f64)> = self
            .entries()
            .iter()
            .map(|(a, b, d)| if a <= b { (a.clone(), b.clone(), *d) } else { (b.clone(), a.clone(), *d) })
            .collect();
        entries.sort_by(|x, y| (&x.0, &x.1).cmp(&(&y.0, &y.1)));
        DistanceDoc::Full {
            entries,
            generalization_penalty: self.generalization_penalty(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistanceError {
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("distance between `{0}` and `{1}` must be finite and non-negative, got {2}")]
    Invalid(String, String, f64),
    #[error("conflicting distances for `{0}` / `{1}`")]
    Conflict(String, String),
    #[error("`{0}` and `{1}` belong to different hierarchies")]
    CrossKind(String, String),
    #[error("generalization penalty must be finite and non-negative, got {0}")]
    Penalty(f64),
}

/// Symmetric, non-negative distance between types of the same hierarchy.
///
/// Explicit table entries win; otherwise the distance falls back to the
/// cheapest route through a common ancestor. With `u1`, `u2` the upward
/// steps from each type to that ancestor, the route costs
/// `step·(u1 + u2) + penalty·|u1 − u2|`, normalised by the hierarchy depth.
/// The second term charges every step by which one type is more general
/// than the other, so replacing `carrot` by `vegetable` costs more than by
/// a sibling such as `parsnip`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceModel {
    table: BTreeMap<(TypeId, TypeId), f64>,
    generalization_penalty: f64,
    step_cost: f64,
}

impl Default for DistanceModel {
    fn default() -> Self {
        DistanceModel {
            table: BTreeMap::new(),
            generalization_penalty: DEFAULT_GENERALIZATION_PENALTY,
            step_cost: 1.0,
        }
    }
}

fn ordered(a: TypeId, b: TypeId) -> (TypeId, TypeId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl DistanceModel {
    pub fn from_doc(doc: &DistanceDoc, hs: &Hierarchies) -> Result<Self, DistanceError> {
        let penalty = doc.generalization_penalty();
        if !penalty.is_finite() || penalty < 0.0 {
            return Err(DistanceError::Penalty(penalty));
        }
        let mut model = DistanceModel {
            generalization_penalty: penalty,
            ..DistanceModel::default()
        };
        for (a, b, d) in doc.entries() {
            let ka = hs.kind_of(a).ok_or_else(|| TypeError::UnknownType {
                kind: Kind::Comestible,
                name: a.clone(),
            })?;
            let kb = hs.kind_of(b).ok_or_else(|| TypeError::UnknownType {
                kind: ka,
                name: b.clone(),
            })?;
            if ka != kb {
                return Err(DistanceError::CrossKind(a.clone(), b.clone()));
            }
            let h = hs.get(ka);
            model.insert(h.resolve(a)?, h.resolve(b)?, *d)?;
        }
        Ok(model)
    }

    pub fn with_penalty(mut self, penalty: f64) -> Self {
        self.generalization_penalty = penalty;
        self
    }

    pub fn generalization_penalty(&self) -> f64 {
        self.generalization_penalty
    }

    /// Adds a table entry; a pair may only be given one value.
    pub fn insert(&mut self, a: TypeId, b: TypeId, d: f64) -> Result<(), DistanceError> {
        if !d.is_finite() || d < 0.0 {
            return Err(DistanceError::Invalid(a.0, b.0, d));
        }
        let key = ordered(a, b);
        match self.table.get(&key) {
            Some(&old) if old != d => Err(DistanceError::Conflict(key.0 .0, key.1 .0)),
            _ => {
                self.table.insert(key, d);
                Ok(())
            }
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (&TypeId, &TypeId, f64)> {
        self.table.iter().map(|((a, b), d)| (a, b, *d))
    }

    pub fn distance(&self, h: &TypeHierarchy, t1: &TypeId, t2: &TypeId) -> Result<f64, TypeError> {
        if !h.contains(t1) {
            return Err(TypeError::UnknownType { kind: h.kind(), name: t1.0.clone() });
        }
        if !h.contains(t2) {
            return Err(TypeError::UnknownType { kind: h.kind(), name: t2.0.clone() });
        }
        if t1 == t2 {
            return Ok(0.0);
        }
        if let Some(&d) = self.table.get(&ordered(t1.clone(), t2.clone())) {
            return Ok(d);
        }
        h.path_distance(t1, t2, self.generalization_penalty, self.step_cost)
    }

    pub fn to_doc(&self) -> DistanceDoc {
        DistanceDoc::Full {
            entries: self.entries().map(|(a, b, d)| (a.0.clone(), b.0.clone(), d)).collect(),
            generalization_penalty: self.generalization_penalty,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(id: &str, parents: &[&str]) -> TypeEntry {
        TypeEntry {
            id: id.into(),
            parents: parents.iter().map(|s| s.to_string()).collect(),
            aliases: vec![],
        }
    }

    fn doc(kind: Kind, root: &str, types: Vec<TypeEntry>) -> HierarchyDoc {
        HierarchyDoc { kind, root: root.into(), types }
    }

    fn onions() -> TypeHierarchy {
        TypeHierarchy::load(&doc(
            Kind::Comestible,
            "comestible",
            vec![
                entry("comestible", &[]),
                entry("vegetable", &["comestible"]),
                entry("pasta", &["comestible"]),
                entry("onion", &["vegetable"]),
                entry("carrot", &["vegetable"]),
                entry("spaghetti", &["pasta"]),
                entry("raw onion", &["onion"]),
                entry("fried onion", &["onion"]),
            ],
        ))
        .unwrap()
    }

    #[test]
    fn smallest_hierarchy() {
        let h = TypeHierarchy::load(&doc(Kind::Comestible, "comestible", vec![entry("comestible", &[])])).unwrap();
        assert_eq!(h.root().as_str(), "comestible");
        assert_eq!(h.depth(), 0);
    }

    #[test]
    fn two_cycle_is_rejected() {
        let err = TypeHierarchy::load(&doc(
            Kind::Action,
            "action",
            vec![entry("action", &[]), entry("a", &["b", "action"]), entry("b", &["a"])],
        ))
        .unwrap_err();
        match err {
            HierarchyError::CycleDetected(mut c) => {
                c.sort();
                assert_eq!(c, vec!["a", "b"]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn structural_errors() {
        let multi = TypeHierarchy::load(&doc(Kind::Action, "x", vec![entry("x", &[]), entry("y", &[])]));
        assert_eq!(multi.unwrap_err(), HierarchyError::MultipleRoots(vec!["x".into(), "y".into()]));

        let dangling = TypeHierarchy::load(&doc(Kind::Action, "x", vec![entry("x", &[]), entry("y", &["z"])]));
        assert!(matches!(dangling.unwrap_err(), HierarchyError::DanglingEdge { .. }));

        let none = TypeHierarchy::load(&doc(Kind::Action, "x", vec![]));
        assert_eq!(none.unwrap_err(), HierarchyError::NoRoot);

        let mut d = doc(Kind::Action, "x", vec![entry("x", &[]), entry("y", &["x"])]);
        d.types[1].aliases = vec!["x".into()];
        assert_eq!(TypeHierarchy::load(&d).unwrap_err(), HierarchyError::DuplicateAlias("x".into()));

        let wrong_root = TypeHierarchy::load(&doc(Kind::Action, "y", vec![entry("x", &[]), entry("y", &["x"])]));
        assert!(matches!(wrong_root.unwrap_err(), HierarchyError::RootMismatch { .. }));
    }

    #[test]
    fn subtype_and_comparable() {
        let h = onions();
        let t = |s: &str| TypeId::from(s);
        assert!(h.is_subtype(&t("raw onion"), &t("vegetable")).unwrap());
        assert!(h.is_subtype(&t("onion"), &t("onion")).unwrap());
        assert!(!h.is_subtype(&t("raw onion"), &t("fried onion")).unwrap());
        assert!(h.comparable(&t("raw onion"), &t("onion")).unwrap());
        assert!(h.comparable(&t("onion"), &t("raw onion")).unwrap());
        assert!(!h.comparable(&t("spaghetti"), &t("carrot")).unwrap());
        assert!(matches!(
            h.is_subtype(&t("tofu"), &t("onion")),
            Err(TypeError::UnknownType { .. })
        ));
    }

    #[test]
    fn aliases_resolve_to_canonical() {
        let mut d = doc(Kind::Action, "action", vec![entry("action", &[]), entry("bake at 180C for 45min", &["action"])]);
        d.types[1].aliases = vec!["bake at 356F for 45min".into()];
        let h = TypeHierarchy::load(&d).unwrap();
        let canon = h.resolve("bake at 356F for 45min").unwrap();
        assert_eq!(canon.as_str(), "bake at 180C for 45min");
        assert_eq!(h.resolve(canon.as_str()).unwrap(), canon);
    }

    #[test]
    fn fallback_distance_by_hand() {
        // depth 3: comestible > vegetable > onion > raw onion
        let h = onions();
        let m = DistanceModel::default().with_penalty(0.5);
        let t = |s: &str| TypeId::from(s);
        // siblings: one step up each, no net generalization
        let d = m.distance(&h, &t("raw onion"), &t("fried onion")).unwrap();
        assert!((d - 2.0 / 3.0).abs() < 1e-12);
        // raw onion -> vegetable: two steps, both generalizing
        let d = m.distance(&h, &t("raw onion"), &t("vegetable")).unwrap();
        assert!((d - (2.0 + 0.5 * 2.0) / 3.0).abs() < 1e-12);
        // default penalty makes a sibling cheaper than the parent
        let m = DistanceModel::default();
        let sib = m.distance(&h, &t("onion"), &t("carrot")).unwrap();
        let parent = m.distance(&h, &t("onion"), &t("vegetable")).unwrap();
        assert!(sib < parent);
    }

    #[test]
    fn table_entries_and_identity() {
        let h = onions();
        let mut m = DistanceModel::default();
        m.insert("onion".into(), "carrot".into(), 0.25).unwrap();
        assert_eq!(m.distance(&h, &"carrot".into(), &"onion".into()).unwrap(), 0.25);
        assert_eq!(m.distance(&h, &"onion".into(), &"onion".into()).unwrap(), 0.0);
        assert!(m.insert("carrot".into(), "onion".into(), 0.5).is_err());
        assert!(m.insert("carrot".into(), "pasta".into(), -1.0).is_err());
    }

    #[test]
    fn neighbourhood_radius() {
        let h = onions();
        let n = h.neighbourhood(&"raw onion".into(), 2).unwrap();
        let names: Vec<&str> = n.iter().map(|t| t.as_str()).collect();
        assert_eq!(names, vec!["fried onion", "onion", "vegetable"]);
    }
}
