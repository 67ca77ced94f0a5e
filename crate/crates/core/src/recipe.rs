//! Recipe graphs, typed recipes, role sets and the path order.
//!
//! Validation is staged: [`RecipeGraph::validate`] checks the five
//! structural conditions, and [`Recipe::new`] adds the typing checks on top.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::typekb::{Hierarchies, Kind, TypeError, TypeId};

/// Workspace-global node identifier.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(name: impl Into<String>) -> Self {
        NodeId(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        NodeId(s.to_owned())
    }
}

pub(crate) fn list<T: fmt::Display>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

/// One violated structural condition of a recipe graph.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum GraphViolation {
    NoComestibles,
    NoActions,
    KindOverlap { node: NodeId },
    ArcNotBipartite { from: NodeId, to: NodeId },
    Disconnected { components: Vec<Vec<NodeId>> },
    Cycle { nodes: Vec<NodeId> },
    ActionWithoutInput { action: NodeId },
    ActionWithoutOutput { action: NodeId },
    MultipleProducers { comestible: NodeId, actions: Vec<NodeId> },
}

impl GraphViolation {
    /// The recipe-graph condition (1 to 5) this violation breaks.
    pub fn condition(&self) -> u8 {
        match self {
            GraphViolation::NoComestibles | GraphViolation::NoActions => 1,
            GraphViolation::KindOverlap { .. } | GraphViolation::ArcNotBipartite { .. } => 2,
            GraphViolation::Disconnected { .. } | GraphViolation::Cycle { .. } => 3,
            GraphViolation::ActionWithoutInput { .. } | GraphViolation::ActionWithoutOutput { .. } => 4,
            GraphViolation::MultipleProducers { .. } => 5,
        }
    }
}

impl fmt::Display for GraphViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "condition {}: ", self.condition())?;
        match self {
            GraphViolation::NoComestibles => f.write_str("no comestible nodes"),
            GraphViolation::NoActions => f.write_str("no action nodes"),
            GraphViolation::KindOverlap { node } => write!(f, "{node} is both a comestible and an action"),
            GraphViolation::ArcNotBipartite { from, to } => {
                write!(f, "arc {from} -> {to} does not join a comestible and an action of the graph")
            }
            GraphViolation::Disconnected { components } => write!(
                f,
                "graph has {} components: {}",
                components.len(),
                components.iter().map(|c| format!("{{{}}}", list(c))).collect::<Vec<_>>().join(" ")
            ),
            GraphViolation::Cycle { nodes } => write!(f, "directed cycle through {}", list(nodes)),
            GraphViolation::ActionWithoutInput { action } => write!(f, "action {action} has no incoming arc"),
            GraphViolation::ActionWithoutOutput { action } => write!(f, "action {action} has no outgoing arc"),
            GraphViolation::MultipleProducers { comestible, actions } => {
                write!(f, "comestible {comestible} is produced by several actions: {}", list(actions))
            }
        }
    }
}

/// One violated typing constraint.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum TypingViolation {
    UntypedNode { node: NodeId },
    TypedNodeNotInGraph { node: NodeId },
    UnknownType { node: NodeId, ty: String },
    KindMismatch { node: NodeId, ty: String, expected: Kind },
    ComparableComestiblePair { first: NodeId, second: NodeId, first_type: TypeId, second_type: TypeId },
}

impl fmt::Display for TypingViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypingViolation::UntypedNode { node } => write!(f, "node {node} has no type"),
            TypingViolation::TypedNodeNotInGraph { node } => write!(f, "typed node {node} is not in the graph"),
            TypingViolation::UnknownType { node, ty } => write!(f, "node {node}: unknown type `{ty}`"),
            TypingViolation::KindMismatch { node, ty, expected } => {
                write!(f, "node {node}: `{ty}` is not a {expected} type")
            }
            TypingViolation::ComparableComestiblePair {
                first,
                second,
                first_type,
                second_type,
            } => write!(
                f,
                "comestibles {first} ({first_type}) and {second} ({second_type}) have comparable types"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RecipeError {
    #[error("not a recipe graph: {}", list(.0))]
    Graph(Vec<GraphViolation>),
    #[error("invalid typing: {}", list(.0))]
    Typing(Vec<TypingViolation>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("node {0} is not in the recipe")]
pub struct UnknownNode(pub NodeId);

/// An unvalidated bipartite graph `(C, A, E)`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RecipeGraph {
    pub comestibles: BTreeSet<NodeId>,
    pub actions: BTreeSet<NodeId>,
    pub arcs: BTreeSet<(NodeId, NodeId)>,
}

impl RecipeGraph {
    pub fn new(
        comestibles: impl IntoIterator<Item = NodeId>,
        actions: impl IntoIterator<Item = NodeId>,
        arcs: impl IntoIterator<Item = (NodeId, NodeId)>,
    ) -> Self {
        RecipeGraph {
            comestibles: comestibles.into_iter().collect(),
            actions: actions.into_iter().collect(),
            arcs: arcs.into_iter().collect(),
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = &NodeId> {
        self.comestibles.iter().chain(&self.actions)
    }

    pub fn contains(&self, n: &NodeId) -> bool {
        self.comestibles.contains(n) || self.actions.contains(n)
    }

    pub fn kind_of(&self, n: &NodeId) -> Option<Kind> {
        if self.comestibles.contains(n) {
            Some(Kind::Comestible)
        } else if self.actions.contains(n) {
            Some(Kind::Action)
        } else {
            None
        }
    }

    pub fn node_count(&self) -> usize {
        self.comestibles.len() + self.actions.len()
    }

    pub fn successors(&self) -> BTreeMap<&NodeId, Vec<&NodeId>> {
        let mut m: BTreeMap<&NodeId, Vec<&NodeId>> = self.nodes().map(|n| (n, Vec::new())).collect();
        for (a, b) in &self.arcs {
            m.entry(a).or_default().push(b);
        }
        m
    }

    pub fn predecessors(&self) -> BTreeMap<&NodeId, Vec<&NodeId>> {
        let mut m: BTreeMap<&NodeId, Vec<&NodeId>> = self.nodes().map(|n| (n, Vec::new())).collect();
        for (a, b) in &self.arcs {
            m.entry(b).or_default().push(a);
        }
        m
    }

    pub fn in_degree(&self, n: &NodeId) -> usize {
        self.arcs.iter().filter(|(_, b)| b == n).count()
    }

    pub fn out_degree(&self, n: &NodeId) -> usize {
        self.arcs.iter().filter(|(a, _)| a == n).count()
    }

    /// Component-wise union; the result is not necessarily a recipe graph.
    pub fn union(&self, other: &RecipeGraph) -> RecipeGraph {
        RecipeGraph {
            comestibles: self.comestibles.union(&other.comestibles).cloned().collect(),
            actions: self.actions.union(&other.actions).cloned().collect(),
            arcs: self.arcs.union(&other.arcs).cloned().collect(),
        }
    }

    /// Checks the five recipe-graph conditions and returns every violation.
    pub fn validate(&self) -> Vec<GraphViolation> {
        let mut out = Vec::new();
        if self.comestibles.is_empty() {
            out.push(GraphViolation::NoComestibles);
        }
        if self.actions.is_empty() {
            out.push(GraphViolation::NoActions);
        }
        for n in self.comestibles.intersection(&self.actions) {
            out.push(GraphViolation::KindOverlap { node: n.clone() });
        }
        for (a, b) in &self.arcs {
            let ok = (self.comestibles.contains(a) && self.actions.contains(b))
                || (self.actions.contains(a) && self.comestibles.contains(b));
            if !ok {
                out.push(GraphViolation::ArcNotBipartite {
                    from: a.clone(),
                    to: b.clone(),
                });
            }
        }

        let components = self.components();
        if components.len() > 1 {
            out.push(GraphViolation::Disconnected { components });
        }
        if let Some(nodes) = self.find_cycle() {
            out.push(GraphViolation::Cycle { nodes });
        }

        let succ = self.successors();
        let pred = self.predecessors();
        for a in &self.actions {
            if pred.get(a).is_none_or(|p| p.is_empty()) {
                out.push(GraphViolation::ActionWithoutInput { action: a.clone() });
            }
            if succ.get(a).is_none_or(|s| s.is_empty()) {
                out.push(GraphViolation::ActionWithoutOutput { action: a.clone() });
            }
        }
        for c in &self.comestibles {
            if let Some(p) = pred.get(c) {
                if p.len() > 1 {
                    out.push(GraphViolation::MultipleProducers {
                        comestible: c.clone(),
                        actions: p.iter().map(|&x| x.clone()).collect(),
                    });
                }
            }
        }
        out
    }

    /// Weakly connected components over the declared nodes, each sorted.
    fn components(&self) -> Vec<Vec<NodeId>> {
        let mut adj: BTreeMap<&NodeId, Vec<&NodeId>> = self.nodes().map(|n| (n, Vec::new())).collect();
        for (a, b) in &self.arcs {
            if self.contains(a) && self.contains(b) {
                adj.entry(a).or_default().push(b);
                adj.entry(b).or_default().push(a);
            }
        }
        let mut seen = BTreeSet::new();
        let mut comps = Vec::new();
        for start in adj.keys().copied().collect::<Vec<_>>() {
            if !seen.insert(start) {
                continue;
            }
            let mut comp = vec![start.clone()];
            let mut queue = VecDeque::from([start]);
            while let Some(n) = queue.pop_front() {
                for &m in &adj[n] {
                    if seen.insert(m) {
                        comp.push(m.clone());
                        queue.push_back(m);
                    }
                }
            }
            comp.sort();
            comps.push(comp);
        }
        comps
    }

    fn find_cycle(&self) -> Option<Vec<NodeId>> {
        let succ = self.successors();
        let mut state: BTreeMap<&NodeId, u8> = BTreeMap::new();
        for start in succ.keys().copied() {
            if state.contains_key(start) {
                continue;
            }
            let mut stack: Vec<(&NodeId, usize)> = vec![(start, 0)];
            let mut path: Vec<&NodeId> = vec![start];
            state.insert(start, 1);
            while let Some(top) = stack.last_mut() {
                let (v, i) = (top.0, top.1);
                let next = succ.get(v).and_then(|s| s.get(i)).copied();
                top.1 += 1;
                match next {
                    Some(w) => match state.get(w) {
                        None => {
                            state.insert(w, 1);
                            stack.push((w, 0));
                            path.push(w);
                        }
                        Some(1) => {
                            let at = path.iter().position(|&x| x == w).unwrap_or(0);
                            return Some(path[at..].iter().map(|&x| x.clone()).collect());
                        }
                        Some(_) => {}
                    },
                    None => {
                        state.insert(v, 2);
                        stack.pop();
                        path.pop();
                    }
                }
            }
        }
        None
    }
}

/// The comestible role sets of a recipe.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RoleSets {
    pub inputs: BTreeSet<NodeId>,
    pub outputs: BTreeSet<NodeId>,
    pub mids: BTreeSet<NodeId>,
}

/// A recipe graph together with a validated typing function.
///
/// Equality, ordering and hashing are structural: two recipes are equal when
/// their node sets, arcs and typings coincide.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Recipe {
    graph: RecipeGraph,
    typing: BTreeMap<NodeId, TypeId>,
}

impl Recipe {
    /// Validates `graph` and a typing given as canonical type ids.
    pub fn new(graph: RecipeGraph, typing: BTreeMap<NodeId, TypeId>, hs: &Hierarchies) -> Result<Self, RecipeError> {
        let gv = graph.validate();
        if !gv.is_empty() {
            return Err(RecipeError::Graph(gv));
        }
        let tv = check_typing(&graph, &typing, hs);
        if !tv.is_empty() {
            return Err(RecipeError::Typing(tv));
        }
        Ok(Recipe { graph, typing })
    }

    /// Like [`Recipe::new`], but resolves aliases in the typing first.
    pub fn from_names(
        graph: RecipeGraph,
        typing: &BTreeMap<NodeId, String>,
        hs: &Hierarchies,
    ) -> Result<Self, RecipeError> {
        let gv = graph.validate();
        if !gv.is_empty() {
            return Err(RecipeError::Graph(gv));
        }
        let mut resolved = BTreeMap::new();
        let mut tv = Vec::new();
        for (n, text) in typing {
            let Some(kind) = graph.kind_of(n) else {
                tv.push(TypingViolation::TypedNodeNotInGraph { node: n.clone() });
                continue;
            };
            match hs.resolve(kind, text) {
                Ok(t) => {
                    resolved.insert(n.clone(), t);
                }
                Err(TypeError::KindMismatch { .. }) => tv.push(TypingViolation::KindMismatch {
                    node: n.clone(),
                    ty: text.clone(),
                    expected: kind,
                }),
                Err(TypeError::UnknownType { .. }) => tv.push(TypingViolation::UnknownType {
                    node: n.clone(),
                    ty: text.clone(),
                }),
            }
        }
        if !tv.is_empty() {
            tv.sort();
            return Err(RecipeError::Typing(tv));
        }
        Recipe::new(graph, resolved, hs)
    }

    /// For parts already known to satisfy every recipe condition.
    pub(crate) fn unchecked(graph: RecipeGraph, typing: BTreeMap<NodeId, TypeId>) -> Self {
        debug_assert!(graph.validate().is_empty());
        Recipe { graph, typing }
    }

    pub fn graph(&self) -> &RecipeGraph {
        &self.graph
    }

    pub fn typing(&self) -> &BTreeMap<NodeId, TypeId> {
        &self.typing
    }

    pub fn into_parts(self) -> (RecipeGraph, BTreeMap<NodeId, TypeId>) {
        (self.graph, self.typing)
    }

    pub fn type_of(&self, n: &NodeId) -> Option<&TypeId> {
        self.typing.get(n)
    }

    pub fn comestibles(&self) -> &BTreeSet<NodeId> {
        &self.graph.comestibles
    }

    pub fn actions(&self) -> &BTreeSet<NodeId> {
        &self.graph.actions
    }

    pub fn arcs(&self) -> &BTreeSet<(NodeId, NodeId)> {
        &self.graph.arcs
    }

    pub fn nodes(&self) -> impl Iterator<Item = &NodeId> {
        self.graph.nodes()
    }

    pub fn contains(&self, n: &NodeId) -> bool {
        self.graph.contains(n)
    }

    pub fn kind_of(&self, n: &NodeId) -> Option<Kind> {
        self.graph.kind_of(n)
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn is_atomic(&self) -> bool {
        self.graph.actions.len() == 1
    }

    pub fn roles(&self) -> RoleSets {
        let mut has_in = BTreeSet::new();
        let mut has_out = BTreeSet::new();
        for (a, b) in &self.graph.arcs {
            has_out.insert(a);
            has_in.insert(b);
        }
        let mut roles = RoleSets {
            inputs: BTreeSet::new(),
            outputs: BTreeSet::new(),
            mids: BTreeSet::new(),
        };
        for c in &self.graph.comestibles {
            match (has_in.contains(c), has_out.contains(c)) {
                (false, _) => roles.inputs.insert(c.clone()),
                (true, false) => roles.outputs.insert(c.clone()),
                (true, true) => roles.mids.insert(c.clone()),
            };
        }
        roles
    }

    pub fn inputs(&self) -> BTreeSet<NodeId> {
        self.roles().inputs
    }

    pub fn outputs(&self) -> BTreeSet<NodeId> {
        self.roles().outputs
    }

    pub fn mids(&self) -> BTreeSet<NodeId> {
        self.roles().mids
    }

    /// `{F(n) | n ∈ In(R)}`
    pub fn input_types(&self) -> BTreeSet<TypeId> {
        self.inputs().iter().map(|n| self.typing[n].clone()).collect()
    }

    /// `{F(n) | n ∈ Out(R)}`
    pub fn output_types(&self) -> BTreeSet<TypeId> {
        self.outputs().iter().map(|n| self.typing[n].clone()).collect()
    }

    /// Path order: `n ≤ n′` iff `n = n′` or a directed path leads from `n` to `n′`.
    pub fn leq(&self, n: &NodeId, m: &NodeId) -> Result<bool, UnknownNode> {
        for x in [n, m] {
            if !self.contains(x) {
                return Err(UnknownNode(x.clone()));
            }
        }
        Ok(self.reachable_from(n).contains(m))
    }

    /// All nodes reachable from `n`, including `n`.
    pub fn reachable_from(&self, n: &NodeId) -> BTreeSet<NodeId> {
        let succ = self.graph.successors();
        let mut seen = BTreeSet::from([n.clone()]);
        let mut queue = VecDeque::from([n]);
        while let Some(v) = queue.pop_front() {
            for &w in succ.get(v).map(Vec::as_slice).unwrap_or(&[]) {
                if seen.insert(w.clone()) {
                    queue.push_back(w);
                }
            }
        }
        seen
    }

    /// Topological order with ties broken by id.
    pub fn topological_order(&self) -> Vec<NodeId> {
        let succ = self.graph.successors();
        let mut indeg: BTreeMap<&NodeId, usize> = self.nodes().map(|n| (n, 0)).collect();
        for (_, b) in &self.graph.arcs {
            *indeg.get_mut(b).expect("validated arc") += 1;
        }
        let mut ready: BTreeSet<&NodeId> = indeg.iter().filter(|(_, &d)| d == 0).map(|(&n, _)| n).collect();
        let mut order = Vec::with_capacity(indeg.len());
        while let Some(n) = ready.pop_first() {
            order.push(n.clone());
            for &m in &succ[n] {
                let d = indeg.get_mut(m).expect("validated arc");
                *d -= 1;
                if *d == 0 {
                    ready.insert(m);
                }
            }
        }
        order
    }
}

/// Typing checks: totality, kind, and pairwise non-comparable comestible types.
pub fn check_typing(graph: &RecipeGraph, typing: &BTreeMap<NodeId, TypeId>, hs: &Hierarchies) -> Vec<TypingViolation> {
    let mut out = Vec::new();
    for n in typing.keys() {
        if !graph.contains(n) {
            out.push(TypingViolation::TypedNodeNotInGraph { node: n.clone() });
        }
    }
    for n in graph.nodes() {
        let kind = graph.kind_of(n).expect("node from graph");
        match typing.get(n) {
            None => out.push(TypingViolation::UntypedNode { node: n.clone() }),
            Some(t) if !hs.get(kind).contains(t) => {
                if hs.kind_of(t.as_str()).is_some() {
                    out.push(TypingViolation::KindMismatch {
                        node: n.clone(),
                        ty: t.to_string(),
                        expected: kind,
                    });
                } else {
                    out.push(TypingViolation::UnknownType {
                        node: n.clone(),
                        ty: t.to_string(),
                    });
                }
            }
            Some(_) => {}
        }
    }
    if !out.is_empty() {
        return out;
    }
    let coms: Vec<&NodeId> = graph.comestibles.iter().collect();
    for (i, a) in coms.iter().enumerate() {
        for b in &coms[i + 1..] {
            let (ta, tb) = (&typing[*a], &typing[*b]);
            if hs.comestible.comparable(ta, tb).unwrap_or(false) {
                out.push(TypingViolation::ComparableComestiblePair {
                    first: (*a).clone(),
                    second: (*b).clone(),
                    first_type: ta.clone(),
                    second_type: tb.clone(),
                });
            }
        }
    }
    out
}
