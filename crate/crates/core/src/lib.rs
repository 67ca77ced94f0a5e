//! Typed recipe graphs: validation, comparison, composition, type
//! substitution and structural rewriting over a pair of type hierarchies.

pub mod accept;
pub mod budget;
pub mod bundle;
#[cfg(feature = "cli")]
pub mod cli;
pub mod compare;
pub mod compose;
pub mod dot;
pub mod gen;
pub mod recipe;
pub mod rewrite;
pub mod subst;
pub mod typekb;

pub use accept::{AcceptTuple, AcceptabilitySet, Policy};
pub use budget::{Budget, BudgetExceeded};
pub use bundle::{parse_bundle, serialize_bundle, Workspace};
pub use recipe::{NodeId, Recipe, RecipeError, RecipeGraph, RoleSets};
pub use typekb::{DistanceModel, Hierarchies, Kind, TypeHierarchy, TypeId};
