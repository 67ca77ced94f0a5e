use recipe_calculus_web::demo::{compose_recipes, plan_substitution, recipe_ids, render_recipe, KITCHEN};
use serde_json::Value;

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn lists_the_kitchen_recipes() {
    let ids = parse(recipe_ids(KITCHEN).unwrap());
    let ids: Vec<&str> = ids.as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert!(ids.contains(&"spaghetti-pasata"));
    assert!(ids.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn renders_every_recipe() {
    let ids = parse(recipe_ids(KITCHEN).unwrap());
    for id in ids.as_array().unwrap() {
        let v = parse(render_recipe(KITCHEN, id.as_str().unwrap()).unwrap());
        let svg = v["svg"].as_str().unwrap();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(v["acceptable"].is_boolean());
    }
}

#[test]
fn drawing_has_one_box_per_node_and_one_line_per_arc() {
    let v = parse(render_recipe(KITCHEN, "spaghetti-pasata").unwrap());
    let svg = v["svg"].as_str().unwrap();
    assert_eq!(svg.matches("<rect").count(), 13);
    assert_eq!(svg.matches("<line").count(), 12);
    assert_eq!(svg.matches("class=\"comestible\"").count(), 9);
    assert_eq!(v["inputs"].as_array().unwrap().len(), 4);
    assert_eq!(v["acceptable"], true);
}

#[test]
fn composition_success_and_failure() {
    let ok = parse(compose_recipes(KITCHEN, "chop-onion", "fry-chopped-onion").unwrap());
    assert_eq!(ok["ok"], true);
    assert!(ok["svg"].as_str().unwrap().contains("changed"));
    let bad = parse(compose_recipes(KITCHEN, "melt-ice", "freeze-water").unwrap());
    assert_eq!(bad["ok"], false);
    assert_eq!(bad["violations"][0]["condition"], 4);
}

#[test]
fn plans_the_parsnip_substitution() {
    let v = parse(plan_substitution(KITCHEN, "carrot-soup", "raw carrot").unwrap());
    assert_eq!(v["found"], true);
    assert_eq!(v["primary"]["c1"], "raw parsnip");
    assert_eq!(v["secondary"]["c2"], "chopped parsnip");
    assert!((v["cost"].as_f64().unwrap() - 0.4).abs() < 1e-9);
    assert_eq!(v["svg"].as_str().unwrap().matches("changed").count(), 2);
}

#[test]
fn reports_bad_input() {
    assert!(render_recipe(KITCHEN, "nope").is_err());
    assert!(plan_substitution(KITCHEN, "carrot-soup", "kohlrabi").is_err());
    assert!(plan_substitution(KITCHEN, "carrot-soup", " , ").is_err());
    assert!(recipe_ids("{").is_err());
}
