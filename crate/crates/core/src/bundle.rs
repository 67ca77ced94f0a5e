//! Workspace bundles: one JSON document holding both hierarchies, the node
//! registry, recipes, acceptability tuples and the distance table.
//!
//! Serialization is canonical: every set and map is sorted by id, so a
//! parsed bundle re-serializes byte for byte.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::accept::{AcceptabilityDoc, AcceptabilitySet};
use crate::recipe::{NodeId, Recipe, RecipeError, RecipeGraph};
use crate::typekb::{
    DistanceDoc, DistanceError, DistanceModel, Hierarchies, HierarchyDoc, HierarchyError, Kind, TypeError,
    TypeHierarchy,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HierarchyDocs {
    pub action: HierarchyDoc,
    pub comestible: HierarchyDoc,
}

/// Serialized recipe. Types are kept as written; aliases resolve when the
/// recipe is built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecipeDoc {
    pub id: String,
    pub comestibles: Vec<NodeId>,
    pub actions: Vec<NodeId>,
    pub arcs: Vec<(NodeId, NodeId)>,
    pub types: BTreeMap<NodeId, String>,
}

impl RecipeDoc {
    pub fn from_recipe(id: impl Into<String>, r: &Recipe) -> Self {
        RecipeDoc {
            id: id.into(),
            comestibles: r.comestibles().iter().cloned().collect(),
            actions: r.actions().iter().cloned().collect(),
            arcs: r.arcs().iter().cloned().collect(),
            types: r.typing().iter().map(|(n, t)| (n.clone(), t.to_string())).collect(),
        }
    }

    pub fn canonicalize(&mut self) {
        self.comestibles.sort();
        self.comestibles.dedup();
        self.actions.sort();
        self.actions.dedup();
        self.arcs.sort();
        self.arcs.dedup();
    }

    pub fn graph(&self) -> RecipeGraph {
        RecipeGraph::new(self.comestibles.iter().cloned(), self.actions.iter().cloned(), self.arcs.iter().cloned())
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
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleDoc {
    pub hierarchies: HierarchyDocs,
    #[serde(default)]
    pub nodes: BTreeMap<NodeId, Kind>,
    #[serde(default)]
    pub recipes: Vec<RecipeDoc>,
    #[serde(default)]
    pub acceptability: AcceptabilityDoc,
    #[serde(default)]
    pub distances: DistanceDoc,
}

impl BundleDoc {
    pub fn canonicalize(&mut self) {
        self.hierarchies.action.canonicalize();
        self.hierarchies.comestible.canonicalize();
        for r in &mut self.recipes {
            r.canonicalize();
        }
        self.recipes.sort_by(|a, b| a.id.cmp(&b.id));
        self.acceptability = self.acceptability.canonical();
        self.distances = self.distances.canonical();
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BundleError {
    #[error("schema error at `{path}`: {reason}")]
    Schema { path: String, reason: String },
    #[error("{kind} hierarchy: {source}")]
    Hierarchy { kind: Kind, source: HierarchyError },
    #[error("{context}: unknown reference `{name}`")]
    UnknownReference { context: String, name: String },
    #[error("node {node} is registered as {registered} but used as {used}")]
    KindConflict { node: NodeId, registered: Kind, used: Kind },
    #[error("recipe id `{0}` appears more than once")]
    DuplicateRecipe(String),
    #[error("distances: {0}")]
    Distance(DistanceError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WorkspaceError {
    #[error("no recipe with id `{0}`")]
    UnknownRecipe(String),
    #[error("recipe `{id}`: {error}")]
    Invalid { id: String, error: RecipeError },
    #[error(transparent)]
    Bundle(#[from] BundleError),
}

fn unknown(context: impl Into<String>, name: impl Into<String>) -> BundleError {
    BundleError::UnknownReference {
        context: context.into(),
        name: name.into(),
    }
}

fn type_ref(context: &str, e: TypeError) -> BundleError {
    match e {
        TypeError::UnknownType { name, .. } | TypeError::KindMismatch { name, .. } => unknown(context, name),
    }
}

/// Parses any JSON document with schema errors reported by path.
pub fn from_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, BundleError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| BundleError::Schema {
        path: e.path().to_string(),
        reason: e.inner().to_string(),
    })
}

/// A parsed, cross-checked bundle with its hierarchies and models loaded.
#[derive(Debug, Clone)]
pub struct Workspace {
    doc: BundleDoc,
    hierarchies: Hierarchies,
    acceptability: AcceptabilitySet,
    distances: DistanceModel,
}

pub fn parse_bundle(text: &str) -> Result<Workspace, BundleError> {
    Workspace::from_doc(from_json(text)?)
}

pub fn serialize_bundle(ws: &Workspace) -> String {
    ws.serialize()
}

impl Workspace {
    pub fn from_doc(mut doc: BundleDoc) -> Result<Self, BundleError> {
        doc.canonicalize();
        let load = |d: &HierarchyDoc, kind: Kind| -> Result<TypeHierarchy, BundleError> {
            if d.kind != kind {
                return Err(BundleError::Schema {
                    path: format!("hierarchies.{kind}.kind"),
                    reason: format!("expected `{kind}`, found `{}`", d.kind),
                });
            }
            TypeHierarchy::load(d).map_err(|source| BundleError::Hierarchy { kind, source })
        };
        let hierarchies = Hierarchies {
            action: load(&doc.hierarchies.action, Kind::Action)?,
            comestible: load(&doc.hierarchies.comestible, Kind::Comestible)?,
        };

        let mut ids = BTreeSet::new();
        for r in &doc.recipes {
            if !ids.insert(r.id.as_str()) {
                return Err(BundleError::DuplicateRecipe(r.id.clone()));
            }
            check_recipe_refs(r, &doc.nodes, &hierarchies, true)?;
        }

        let acceptability =
            AcceptabilitySet::from_doc(&doc.acceptability, &hierarchies).map_err(|e| type_ref("acceptability", e))?;
        let distances = DistanceModel::from_doc(&doc.distances, &hierarchies).map_err(|e| match e {
            DistanceError::Type(t) => type_ref("distances", t),
            other => BundleError::Distance(other),
        })?;
        Ok(Workspace {
            doc,
            hierarchies,
            acceptability,
            distances,
        })
    }

    /// Canonical pretty-printed JSON with a trailing newline.
    pub fn serialize(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.doc).expect("bundle serializes");
        s.push('\n');
        s
    }

    pub fn doc(&self) -> &BundleDoc {
        &self.doc
    }

    pub fn hierarchies(&self) -> &Hierarchies {
        &self.hierarchies
    }

    pub fn acceptability(&self) -> &AcceptabilitySet {
        &self.acceptability
    }

    pub fn distances(&self) -> &DistanceModel {
        &self.distances
    }

    pub fn recipe_ids(&self) -> impl Iterator<Item = &str> {
        self.doc.recipes.iter().map(|r| r.id.as_str())
    }

    pub fn recipe_doc(&self, id: &str) -> Result<&RecipeDoc, WorkspaceError> {
        self.doc
            .recipes
            .iter()
            .find(|r| r.id == id)
            .ok_or_else(|| WorkspaceError::UnknownRecipe(id.to_owned()))
    }

    /// Builds and validates the recipe with the given id.
    pub fn recipe(&self, id: &str) -> Result<Recipe, WorkspaceError> {
        self.build(self.recipe_doc(id)?)
    }

    /// Builds a recipe from a document that may use nodes outside the
    /// registry. Registered nodes must be used with their registered kind.
    pub fn build(&self, doc: &RecipeDoc) -> Result<Recipe, WorkspaceError> {
        check_recipe_refs(doc, &self.doc.nodes, &self.hierarchies, false)?;
        Recipe::from_names(doc.graph(), &doc.types, &self.hierarchies).map_err(|error| WorkspaceError::Invalid {
            id: doc.id.clone(),
            error,
        })
    }

    /// Adds or replaces a recipe, registering its nodes.
    pub fn insert_recipe(&mut self, id: &str, r: &Recipe) -> Result<(), BundleError> {
        let doc = RecipeDoc::from_recipe(id, r);
        check_recipe_refs(&doc, &self.doc.nodes, &self.hierarchies, false)?;
        for n in r.nodes() {
            self.doc.nodes.insert(n.clone(), r.kind_of(n).expect("recipe node"));
        }
        self.doc.recipes.retain(|d| d.id != id);
        self.doc.recipes.push(doc);
        self.doc.canonicalize();
        Ok(())
    }
}

fn check_recipe_refs(
    r: &RecipeDoc,
    registry: &BTreeMap<NodeId, Kind>,
    hs: &Hierarchies,
    require_registered: bool,
) -> Result<(), BundleError> {
    let context = format!("recipe `{}`", r.id);
    let listed = r
        .comestibles
        .iter()
        .map(|n| (n, Kind::Comestible))
        .chain(r.actions.iter().map(|n| (n, Kind::Action)));
    for (n, used) in listed {
        match registry.get(n) {
            Some(&registered) if registered != used => {
                return Err(BundleError::KindConflict {
                    node: n.clone(),
                    registered,
                    used,
                })
            }
            None if require_registered => return Err(unknown(context, n.as_str())),
            _ => {}
        }
    }
    for (n, ty) in &r.types {
        let kind = match r.kind_of(n).or_else(|| registry.get(n).copied()) {
            Some(k) => k,
            None => return Err(unknown(context, n.as_str())),
        };
        if hs.get(kind).resolve(ty).is_err() {
            return Err(unknown(format!("{context}, node {n}"), ty.as_str()));
        }
    }
    Ok(())
}
