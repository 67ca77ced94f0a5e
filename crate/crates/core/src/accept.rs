//! Acceptability tuples and acceptability checking.
//!
//! A tuple `(input, action, output)` licenses every arc pair `(c, a), (a, c′)`
//! whose node types match it. Under the `path-comparable` policy each slot
//! may also be matched by a comparable type at most `depth_limit` hierarchy
//! steps away; slots can be switched off individually.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::recipe::{NodeId, Recipe};
use crate::typekb::{Hierarchies, Kind, TypeError, TypeHierarchy, TypeId};

pub const DEFAULT_DEPTH_LIMIT: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "(TypeId, TypeId, TypeId)", into = "(TypeId, TypeId, TypeId)")]
pub struct AcceptTuple {
    pub input: TypeId,
    pub action: TypeId,
    pub output: TypeId,
}

impl AcceptTuple {
    pub fn new(input: impl Into<TypeId>, action: impl Into<TypeId>, output: impl Into<TypeId>) -> Self {
        AcceptTuple {
            input: input.into(),
            action: action.into(),
            output: output.into(),
        }
    }
}

impl From<(TypeId, TypeId, TypeId)> for AcceptTuple {
    fn from((input, action, output): (TypeId, TypeId, TypeId)) -> Self {
        AcceptTuple { input, action, output }
    }
}

impl From<AcceptTuple> for (TypeId, TypeId, TypeId) {
    fn from(t: AcceptTuple) -> Self {
        (t.input, t.action, t.output)
    }
}

impl fmt::Display for AcceptTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.input, self.action, self.output)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Policy {
    #[default]
    Exact,
    PathComparable,
}

/// Which tuple slots may vary under the `path-comparable` policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlotMask {
    pub input: bool,
    pub action: bool,
    pub output: bool,
}

impl SlotMask {
    pub const ALL: SlotMask = SlotMask {
        input: true,
        action: true,
        output: true,
    };

    pub fn is_all(&self) -> bool {
        *self == SlotMask::ALL
    }
}

impl Default for SlotMask {
    fn default() -> Self {
        SlotMask::ALL
    }
}

fn default_depth() -> u32 {
    DEFAULT_DEPTH_LIMIT
}

/// Serialized acceptability set: a bare array of triples or an object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AcceptabilityDoc {
    Full {
        tuples: Vec<(String, String, String)>,
        #[serde(default)]
        policy: Policy,
        #[serde(default = "default_depth")]
        depth_limit: u32,
        #[serde(default, skip_serializing_if = "SlotMask::is_all")]
        slots: SlotMask,
    },
    Table(Vec<(String, String, String)>),
}

impl Default for AcceptabilityDoc {
    fn default() -> Self {
        AcceptabilityDoc::Table(Vec::new()).canonical()
    }
}

impl AcceptabilityDoc {
    pub fn tuples(&self) -> &[(String, String, String)] {
        match self {
            AcceptabilityDoc::Full { tuples, .. } | AcceptabilityDoc::Table(tuples) => tuples,
        }
    }

    pub fn canonical(&self) -> AcceptabilityDoc {
        let (policy, depth_limit, slots) = match self {
            AcceptabilityDoc::Full {
                policy,
                depth_limit,
                slots,
                ..
            } => (*policy, *depth_limit, *slots),
            AcceptabilityDoc::Table(_) => (Policy::Exact, DEFAULT_DEPTH_LIMIT, SlotMask::ALL),
        };
        let mut tuples = self.tuples().to_vec();
        tuples.sort();
        tuples.dedup();
        AcceptabilityDoc::Full {
            tuples,
            policy,
            depth_limit,
            slots,
        }
    }
}

/// A typed arc pair `(c, a), (a, c′)` of a recipe.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct ArcTriple {
    pub input: NodeId,
    pub action: NodeId,
    pub output: NodeId,
    pub types: AcceptTuple,
}

impl fmt::Display for ArcTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {} -> {} {}", self.input, self.action, self.output, self.types)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AcceptabilitySet {
    tuples: BTreeSet<AcceptTuple>,
    policy: Policy,
    depth_limit: u32,
    slots: SlotMask,
}

impl AcceptabilitySet {
    /// An `exact` set over the given tuples.
    pub fn exact(tuples: impl IntoIterator<Item = AcceptTuple>) -> Self {
        AcceptabilitySet {
            tuples: tuples.into_iter().collect(),
            policy: Policy::Exact,
            depth_limit: DEFAULT_DEPTH_LIMIT,
            slots: SlotMask::ALL,
        }
    }

    pub fn with_policy(mut self, policy: Policy, depth_limit: u32) -> Self {
        self.policy = policy;
        self.depth_limit = depth_limit;
        self
    }

    pub fn with_slots(mut self, slots: SlotMask) -> Self {
        self.slots = slots;
        self
    }

    /// Resolves aliases and checks that every type exists with the right kind.
    pub fn from_doc(doc: &AcceptabilityDoc, hs: &Hierarchies) -> Result<Self, TypeError> {
        let mut tuples = BTreeSet::new();
        for (i, a, o) in doc.tuples() {
            tuples.insert(AcceptTuple {
                input: hs.resolve(Kind::Comestible, i)?,
                action: hs.resolve(Kind::Action, a)?,
                output: hs.resolve(Kind::Comestible, o)?,
            });
        }
        let set = AcceptabilitySet::exact(tuples);
        Ok(match doc {
            AcceptabilityDoc::Full {
                policy,
                depth_limit,
                slots,
                ..
            } => set.with_policy(*policy, *depth_limit).with_slots(*slots),
            AcceptabilityDoc::Table(_) => set,
        })
    }

    pub fn to_doc(&self) -> AcceptabilityDoc {
        AcceptabilityDoc::Full {
            tuples: self
                .tuples
                .iter()
                .map(|t| (t.input.to_string(), t.action.to_string(), t.output.to_string()))
                .collect(),
            policy: self.policy,
            depth_limit: self.depth_limit,
            slots: self.slots,
        }
    }

    pub fn tuples(&self) -> &BTreeSet<AcceptTuple> {
        &self.tuples
    }

    pub fn policy(&self) -> Policy {
        self.policy
    }

    pub fn depth_limit(&self) -> u32 {
        self.depth_limit
    }

    pub fn slots(&self) -> SlotMask {
        self.slots
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    /// Whether the typed triple is licensed under this set's policy.
    pub fn licenses(&self, triple: &AcceptTuple, hs: &Hierarchies) -> bool {
        if self.tuples.contains(triple) {
            return true;
        }
        if self.policy == Policy::Exact {
            return false;
        }
        let near = |h: &TypeHierarchy, on: bool, a: &TypeId, b: &TypeId| -> bool {
            if !on {
                return a == b;
            }
            let within = |x: &TypeId, y: &TypeId| {
                h.up_distance(x, y)
                    .ok()
                    .flatten()
                    .is_some_and(|d| d <= self.depth_limit)
            };
            within(a, b) || within(b, a)
        };
        self.tuples.iter().any(|t| {
            near(&hs.comestible, self.slots.input, &t.input, &triple.input)
                && near(&hs.action, self.slots.action, &t.action, &triple.action)
                && near(&hs.comestible, self.slots.output, &t.output, &triple.output)
        })
    }
}

/// Every typed arc pair of `r`, in canonical order.
pub fn arc_triples(r: &Recipe) -> Vec<ArcTriple> {
    arc_triples_with(r, r.typing())
}

/// Arc pairs of `r` typed by an alternative typing over the same graph.
pub fn arc_triples_with(r: &Recipe, typing: &BTreeMap<NodeId, TypeId>) -> Vec<ArcTriple> {
    let pred = r.graph().predecessors();
    let succ = r.graph().successors();
    let mut out = Vec::new();
    for a in r.actions() {
        for &c in &pred[a] {
            for &d in &succ[a] {
                out.push(ArcTriple {
                    input: c.clone(),
                    action: a.clone(),
                    output: d.clone(),
                    types: AcceptTuple {
                        input: typing[c].clone(),
                        action: typing[a].clone(),
                        output: typing[d].clone(),
                    },
                });
            }
        }
    }
    out.sort();
    out
}

/// Lists every arc pair of `r` that `x` does not license; empty means acceptable.
pub fn unlicensed(r: &Recipe, x: &AcceptabilitySet, hs: &Hierarchies) -> Vec<ArcTriple> {
    arc_triples(r)
        .into_iter()
        .filter(|t| !x.licenses(&t.types, hs))
        .collect()
}

pub fn is_acceptable(r: &Recipe, x: &AcceptabilitySet, hs: &Hierarchies) -> bool {
    arc_triples(r).iter().all(|t| x.licenses(&t.types, hs))
}

/// Materialises the tuples licensed by `x` under `policy` and `depth_limit`.
///
/// The result is an `exact` set. Under `Policy::Exact` the tuples are
/// returned unchanged.
pub fn expand_tuples(
    x: &AcceptabilitySet,
    hs: &Hierarchies,
    policy: Policy,
    depth_limit: u32,
) -> Result<AcceptabilitySet, TypeError> {
    expand_tuples_with(x, hs, policy, depth_limit, SlotMask::ALL)
}

pub fn expand_tuples_with(
    x: &AcceptabilitySet,
    hs: &Hierarchies,
    policy: Policy,
    depth_limit: u32,
    slots: SlotMask,
) -> Result<AcceptabilitySet, TypeError> {
    if policy == Policy::Exact {
        return Ok(AcceptabilitySet::exact(x.tuples.iter().cloned()));
    }
    let around = |h: &TypeHierarchy, on: bool, t: &TypeId| -> Result<BTreeSet<TypeId>, TypeError> {
        if on {
            h.comparable_within(t, depth_limit)
        } else {
            h.resolve(t.as_str()).map(|t| BTreeSet::from([t]))
        }
    };
    let mut out = BTreeSet::new();
    for t in &x.tuples {
        let ins = around(&hs.comestible, slots.input, &t.input)?;
        let acts = around(&hs.action, slots.action, &t.action)?;
        let outs = around(&hs.comestible, slots.output, &t.output)?;
        for i in &ins {
            for a in &acts {
                for o in &outs {
                    out.insert(AcceptTuple {
                        input: i.clone(),
                        action: a.clone(),
                        output: o.clone(),
                    });
                }
            }
        }
    }
    Ok(AcceptabilitySet::exact(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::synthetic_hierarchies;

    fn tuple(i: &str, a: &str, o: &str) -> AcceptTuple {
        AcceptTuple::new(i, a, o)
    }

    #[test]
    fn exact_policy_needs_the_tuple() {
        let hs = synthetic_hierarchies();
        let x = AcceptabilitySet::exact([tuple("com0", "act0", "com1")]);
        assert!(x.licenses(&tuple("com0", "act0", "com1"), &hs));
        assert!(!x.licenses(&tuple("com0.1", "act0", "com1"), &hs));
    }

    #[test]
    fn path_comparable_respects_depth_and_slots() {
        let hs = synthetic_hierarchies();
        let x = AcceptabilitySet::exact([tuple("com0", "act0", "com1")]).with_policy(Policy::PathComparable, 1);
        assert!(x.licenses(&tuple("com0.1", "act0.2", "com1"), &hs));
        assert!(x.licenses(&tuple("comestible", "act0", "com1"), &hs));
        // siblings are not on a path; the root is two steps above a leaf
        assert!(!x.licenses(&tuple("com2", "act0", "com1"), &hs));
        let leaf = AcceptabilitySet::exact([tuple("com0.1", "act0", "com1")]).with_policy(Policy::PathComparable, 1);
        assert!(!leaf.licenses(&tuple("comestible", "act0", "com1"), &hs));
        assert!(!leaf.licenses(&tuple("com0.2", "act0", "com1"), &hs));
        let deeper = x.clone().with_policy(Policy::PathComparable, 0);
        assert!(!deeper.licenses(&tuple("com0.1", "act0", "com1"), &hs));
        let fixed_action = x.with_slots(SlotMask { action: false, ..SlotMask::ALL });
        assert!(fixed_action.licenses(&tuple("com0.1", "act0", "com1"), &hs));
        assert!(!fixed_action.licenses(&tuple("com0", "act0.1", "com1"), &hs));
    }

    #[test]
    fn bare_array_and_object_documents() {
        let bare: AcceptabilityDoc = serde_json::from_str(r#"[["com0", "act0", "com1"]]"#).unwrap();
        let obj: AcceptabilityDoc =
            serde_json::from_str(r#"{"policy": "path-comparable", "tuples": [["com0", "act0", "com1"]]}"#).unwrap();
        let hs = synthetic_hierarchies();
        let a = AcceptabilitySet::from_doc(&bare, &hs).unwrap();
        let b = AcceptabilitySet::from_doc(&obj, &hs).unwrap();
        assert_eq!(a.tuples(), b.tuples());
        assert_eq!((a.policy(), b.policy()), (Policy::Exact, Policy::PathComparable));
        assert_eq!(b.depth_limit(), DEFAULT_DEPTH_LIMIT);
        assert!(AcceptabilitySet::from_doc(
            &serde_json::from_str(r#"[["com0", "teleport", "com1"]]"#).unwrap(),
            &hs
        )
        .is_err());
    }
}
