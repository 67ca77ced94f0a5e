#![allow(dead_code)]

pub mod instances;
pub mod oracles;

use std::collections::BTreeMap;
use std::path::PathBuf;

use recipe_calculus::bundle::{parse_bundle, Workspace};
use recipe_calculus::recipe::{NodeId, Recipe};
use recipe_calculus::typekb::TypeId;

/// Seed shared by every randomized suite.
pub const SEED: u64 = 0x5eed_2024;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).expect("fixture is readable")
}

pub fn kitchen() -> Workspace {
    parse_bundle(&read_fixture("kitchen.json")).expect("kitchen bundle parses")
}

pub fn recipe(ws: &Workspace, id: &str) -> Recipe {
    ws.recipe(id).unwrap_or_else(|e| panic!("{id}: {e}"))
}

pub fn ids<'a>(names: impl IntoIterator<Item = &'a str>) -> std::collections::BTreeSet<NodeId> {
    names.into_iter().map(NodeId::new).collect()
}

/// Typing as plain strings, for cell-by-cell comparisons.
pub fn typing_text(r: &Recipe) -> BTreeMap<String, String> {
    r.typing()
        .iter()
        .map(|(n, t): (&NodeId, &TypeId)| (n.to_string(), t.to_string()))
        .collect()
}
