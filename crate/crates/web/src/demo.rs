//! The demo's operations as plain functions over bundle text, returning
//! JSON strings for the page.

use std::collections::BTreeSet;

use recipe_calculus::accept::unlicensed;
use recipe_calculus::compose::{compose, ComposeError};
use recipe_calculus::subst::{apply_substitution, default_candidates, preferred_pair, CostModel, Unavailable, DEFAULT_CANDIDATE_RADIUS};
use recipe_calculus::{parse_bundle, Budget, Kind, NodeId, Recipe, Workspace};
use serde_json::{json, Value};

use crate::svg::render;

/// The kitchen bundle shipped with the core crate.
pub const KITCHEN: &str = include_str!("../../core/fixtures/kitchen.json");

/// Search budget for the planner; small enough to keep the page responsive.
pub const PLAN_BUDGET: u64 = 200_000;

fn workspace(bundle: &str) -> Result<Workspace, String> {
    parse_bundle(bundle).map_err(|e| e.to_string())
}

fn load(ws: &Workspace, id: &str) -> Result<Recipe, String> {
    ws.recipe(id).map_err(|e| e.to_string())
}

fn recipe_view(r: &Recipe, highlight: &BTreeSet<NodeId>) -> Value {
    let roles = r.roles();
    json!({
        "svg": render(r, highlight),
        "inputs": roles.inputs,
        "outputs": roles.outputs,
        "mids": roles.mids,
    })
}

/// Recipe ids of the bundle, as a JSON array.
pub fn recipe_ids(bundle: &str) -> Result<String, String> {
    let ws = workspace(bundle)?;
    Ok(json!(ws.recipe_ids().collect::<Vec<_>>()).to_string())
}

/// Drawing, role sets and acceptability of one recipe.
pub fn render_recipe(bundle: &str, id: &str) -> Result<String, String> {
    let ws = workspace(bundle)?;
    let r = load(&ws, id)?;
    let bad = unlicensed(&r, ws.acceptability(), ws.hierarchies());
    let mut v = recipe_view(&r, &BTreeSet::new());
    v["acceptable"] = json!(bad.is_empty());
    v["unlicensed"] = json!(bad.iter().map(|t| t.to_string()).collect::<Vec<_>>());
    Ok(v.to_string())
}

/// `first ⊕ second`: the drawing on success, the failed conditions otherwise.
pub fn compose_recipes(bundle: &str, first: &str, second: &str) -> Result<String, String> {
    let ws = workspace(bundle)?;
    let (r1, r2) = (load(&ws, first)?, load(&ws, second)?);
    let v = match compose(&r1, &r2, ws.hierarchies()) {
        Ok(r) => {
            let glue: BTreeSet<NodeId> = r1.outputs().intersection(&r2.inputs()).cloned().collect();
            let mut v = recipe_view(&r, &glue);
            v["ok"] = json!(true);
            v
        }
        Err(ComposeError::Conditions(vs)) => json!({
            "ok": false,
            "violations": vs.iter().map(|c| json!({ "condition": c.condition, "nodes": c.nodes, "text": c.to_string() })).collect::<Vec<_>>(),
        }),
        Err(e) => json!({ "ok": false, "violations": [{ "condition": null, "nodes": [], "text": e.to_string() }] }),
    };
    Ok(v.to_string())
}

/// Cheapest acceptable retyping of `id` once the `missing` types or node
/// ids (comma separated) are unavailable.
pub fn plan_substitution(bundle: &str, id: &str, missing: &str) -> Result<String, String> {
    let ws = workspace(bundle)?;
    let hs = ws.hierarchies();
    let r = load(&ws, id)?;
    let mut unavailable = Unavailable::default();
    for m in missing.split(',').map(str::trim).filter(|m| !m.is_empty()) {
        let n = NodeId::new(m);
        if r.contains(&n) {
            unavailable.nodes.insert(n);
        } else {
            let t = hs
                .resolve(Kind::Comestible, m)
                .or_else(|_| hs.resolve(Kind::Action, m))
                .map_err(|e| e.to_string())?;
            unavailable.types.insert(t);
        }
    }
    if unavailable.nodes.is_empty() && unavailable.types.is_empty() {
        return Err("nothing marked as missing".into());
    }
    let x = ws.acceptability();
    let candidates = default_candidates(&r, x, hs, DEFAULT_CANDIDATE_RADIUS).map_err(|e| e.to_string())?;
    let model = CostModel::sum(ws.distances());
    let found = preferred_pair(&r, &unavailable, x, &model, &candidates, hs, &mut Budget::new(PLAN_BUDGET))
        .map_err(|e| e.to_string())?;
    let v = match found {
        Some(p) => {
            let all = p.pair.combined().map_err(|e| e.to_string())?;
            let out = apply_substitution(&r, &all, hs).map_err(|e| e.to_string())?;
            let mut v = recipe_view(&out, &all.domain());
            v["found"] = json!(true);
            v["primary"] = json!(p.pair.primary);
            v["secondary"] = json!(p.pair.secondary);
            v["cost"] = json!(p.cost);
            v
        }
        None => json!({ "found": false }),
    };
    Ok(v.to_string())
}
