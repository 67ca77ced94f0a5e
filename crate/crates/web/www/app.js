import init, {
  fixture_bundle,
  recipe_ids,
  render_recipe,
  compose_recipes,
  plan_substitution,
} from "./pkg/recipe_calculus_web.js";

const defaults = {
  view: { recipe: "spaghetti-pasata" },
  compose: { first: "chop-onion", second: "fry-chopped-onion" },
  plan: { recipe: "carrot-soup" },
};

function list(values) {
  return values.length ? values.join(", ") : "none";
}

function facts(rows) {
  const dl = document.createElement("dl");
  dl.className = "facts";
  for (const [name, value] of rows) {
    const dt = document.createElement("dt");
    dt.textContent = name;
    const dd = document.createElement("dd");
    dd.textContent = value;
    dl.append(dt, dd);
  }
  return dl;
}

function show(section, rows, svg) {
  const out = section.querySelector(".result");
  out.replaceChildren(facts(rows));
  if (svg) {
    const holder = document.createElement("div");
    // markup is generated by the wasm module, labels are escaped there
    holder.innerHTML = svg;
    out.append(holder);
  }
}

function fail(section, err) {
  const p = document.createElement("p");
  p.className = "error";
  p.textContent = String(err.message ?? err);
  section.querySelector(".result").replaceChildren(p);
}

function roles(v) {
  return [
    ["inputs", list(v.inputs)],
    ["outputs", list(v.outputs)],
    ["intermediates", list(v.mids)],
  ];
}

function bindings(set) {
  const pairs = Object.entries(set ?? {});
  return pairs.length ? pairs.map(([n, t]) => `${n} → ${t}`).join(", ") : "none";
}

const actions = {
  view(bundle, form) {
    const v = JSON.parse(render_recipe(bundle, form.recipe.value));
    const acc = v.acceptable ? "yes" : `no: ${v.unlicensed.join("; ")}`;
    return { rows: [...roles(v), ["acceptable", acc]], svg: v.svg };
  },
  compose(bundle, form) {
    const v = JSON.parse(compose_recipes(bundle, form.first.value, form.second.value));
    if (!v.ok) {
      return { rows: v.violations.map((c) => ["fails", c.text]) };
    }
    return { rows: [["result", "composed; glued nodes are highlighted"], ...roles(v)], svg: v.svg };
  },
  plan(bundle, form) {
    const v = JSON.parse(plan_substitution(bundle, form.recipe.value, form.missing.value));
    if (!v.found) {
      return { rows: [["result", "no acceptable substitution in the candidate space"]] };
    }
    return {
      rows: [
        ["primary", bindings(v.primary)],
        ["secondary", bindings(v.secondary)],
        ["cost", v.cost.toFixed(3)],
      ],
      svg: v.svg,
    };
  },
};

async function main() {
  await init();
  const bundle = fixture_bundle();
  const ids = JSON.parse(recipe_ids(bundle));

  for (const select of document.querySelectorAll(".recipe-list")) {
    for (const id of ids) {
      select.add(new Option(id, id));
    }
  }

  for (const [name, run] of Object.entries(actions)) {
    const section = document.getElementById(name);
    const form = section.querySelector("form");
    for (const [field, value] of Object.entries(defaults[name])) {
      form.elements[field].value = value;
    }
    const update = (event) => {
      event?.preventDefault();
      try {
        const { rows, svg } = run(bundle, form.elements);
        show(section, rows, svg);
      } catch (err) {
        fail(section, err);
      }
    };
    form.addEventListener("submit", update);
    if (name === "view") {
      form.addEventListener("change", update);
    }
    update();
  }
}

main();
