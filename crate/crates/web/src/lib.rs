//! Browser bindings for the recipe calculator demo. Every entry point takes
//! the bundle text and returns a JSON string.

pub mod demo;
pub mod svg;

use wasm_bindgen::prelude::*;

fn js(r: Result<String, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn fixture_bundle() -> String {
    demo::KITCHEN.to_owned()
}

#[wasm_bindgen]
pub fn recipe_ids(bundle: &str) -> Result<String, JsError> {
    js(demo::recipe_ids(bundle))
}

#[wasm_bindgen]
pub fn render_recipe(bundle: &str, id: &str) -> Result<String, JsError> {
    js(demo::render_recipe(bundle, id))
}

#[wasm_bindgen]
pub fn compose_recipes(bundle: &str, first: &str, second: &str) -> Result<String, JsError> {
    js(demo::compose_recipes(bundle, first, second))
}

#[wasm_bindgen]
pub fn plan_substitution(bundle: &str, id: &str, missing: &str) -> Result<String, JsError> {
    js(demo::plan_substitution(bundle, id, missing))
}
