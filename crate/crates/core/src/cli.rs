//! The `recipe-calc` command line.
//!
//! Exit codes: 0 success or a positive answer, 1 a well-formed negative
//! answer, 2 an input error, 3 an exhausted search budget.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::accept::{unlicensed, AcceptabilityDoc, AcceptabilitySet, Policy};
use crate::budget::{Budget, DEFAULT_BUDGET};
use crate::bundle::{from_json, parse_bundle, RecipeDoc, Workspace};
use crate::compare::{equivalent_within, finer_grained, in_out_aligned, is_subrecipe, isomorphic_within, more_specific_within};
use crate::compose::{compose_closure, compose_with, decompose, ClosureLimits, ComposeError, ComposeOptions};
use crate::dot::export_dot;
use crate::recipe::{NodeId, Recipe, RecipeError};
use crate::rewrite::{
    apply_sequence, structural_cost, structural_substitute_with, RewriteError, RewriteOptions, RewriteStep,
    StructuralCostParams,
};
use crate::subst::{
    apply_substitution, default_candidates, preferred_pair, Aggregation, CostModel, SecondaryError, SubstError,
    SubstitutionSet, Unavailable, DEFAULT_CANDIDATE_RADIUS,
};
use crate::typekb::{DistanceDoc, DistanceModel, Kind, TypeId};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "recipe-calc", version, about = "Validate, compare, compose and rewrite typed recipe graphs")]
pub struct Cli {
    /// Workspace bundle (JSON)
    #[arg(short, long, global = true)]
    pub bundle: Option<PathBuf>,
    /// Output format
    #[arg(short, long, global = true, value_enum, default_value_t = Format::Human)]
    pub format: Format,
    /// Maximum search expansions
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Json,
    Dot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Relation {
    Iso,
    Sub,
    Equiv,
    Io,
    Finer,
    Specific,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Exact,
    PathComparable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AggregationArg {
    Sum,
    Max,
}

#[derive(Debug, clap::Args)]
pub struct AcceptArgs {
    /// Acceptability file replacing the bundle's tuples
    #[arg(long = "accept")]
    pub file: Option<PathBuf>,
    /// Override the expansion policy
    #[arg(long, value_enum)]
    pub policy: Option<PolicyArg>,
    /// Override the expansion depth limit
    #[arg(long)]
    pub depth: Option<u32>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check recipes against the recipe-graph and typing conditions
    Validate {
        /// Recipe ids (all recipes when omitted)
        ids: Vec<String>,
    },
    /// Input, output and intermediate comestibles of a recipe
    Roles { id: String },
    /// Compare two recipes
    Compare {
        #[arg(long, value_enum)]
        relation: Relation,
        first: String,
        second: String,
        /// For `finer`: the map must fix input and output nodes
        #[arg(long)]
        strict: bool,
    },
    /// Compose two recipes
    Compose {
        first: String,
        second: String,
        /// Let an output feed an input whose expected type is a supertype
        #[arg(long)]
        match_subtypes: bool,
    },
    /// Closure of a set of recipes under composition
    Closure {
        /// Seed recipe ids (all recipes when omitted)
        ids: Vec<String>,
        #[arg(long, default_value_t = 10_000)]
        max_recipes: usize,
        #[arg(long, default_value_t = 200)]
        max_nodes: usize,
    },
    /// Split a recipe into one atomic recipe per action
    Decompose { id: String },
    /// Check a recipe against acceptability tuples
    Accept {
        id: String,
        #[command(flatten)]
        accept: AcceptArgs,
    },
    /// Apply a type substitution
    Substitute {
        id: String,
        /// Binding `node=type` (repeatable); underscores may stand for spaces
        #[arg(long = "bind", required = true)]
        bindings: Vec<String>,
        #[command(flatten)]
        accept: AcceptArgs,
    },
    /// Find a cheapest substitution pair replacing unavailable types or nodes
    Plan {
        id: String,
        /// Unavailable type or node id (repeatable)
        #[arg(long = "missing")]
        missing: Vec<String>,
        #[command(flatten)]
        accept: AcceptArgs,
        /// Distance file replacing the bundle's table
        #[arg(long)]
        distances: Option<PathBuf>,
        /// Override the generalization penalty of the distance fallback
        #[arg(long)]
        penalty: Option<f64>,
        #[arg(long, value_enum, default_value_t = AggregationArg::Sum)]
        aggregation: AggregationArg,
        /// Hierarchy radius for default candidate types
        #[arg(long, default_value_t = DEFAULT_CANDIDATE_RADIUS)]
        radius: u32,
    },
    /// Replace a subrecipe by another recipe
    Rewrite {
        id: String,
        /// Recipe id or recipe file to remove
        #[arg(long)]
        remove: String,
        /// Recipe id or recipe file to insert
        #[arg(long)]
        insert: String,
        /// Also forbid comparable action types between kept and inserted nodes
        #[arg(long)]
        literal_action_check: bool,
        /// Reject replacements whose removed part has an empty front
        #[arg(long)]
        forbid_empty_front: bool,
    },
    /// Apply a primary and secondary rewrite plan and check acceptability
    RewriteSeq {
        id: String,
        plan: PathBuf,
        #[command(flatten)]
        accept: AcceptArgs,
    },
    /// Graph edit cost between two recipes (non-normative default)
    StructuralCost {
        first: String,
        second: String,
        #[arg(long, default_value_t = 1.0)]
        edit_weight: f64,
        #[arg(long, default_value_t = 1.0)]
        type_weight: f64,
    },
    /// Render a recipe as Graphviz DOT
    ExportDot {
        id: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rewrite the bundle in canonical form
    Canonicalize {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Outcome of a command: exit code and report.
struct Report {
    code: i32,
    human: String,
    json: Value,
    dot: Option<String>,
}

impl Report {
    fn new(code: i32, human: impl Into<String>, json: Value) -> Self {
        Report {
            code,
            human: human.into(),
            json,
            dot: None,
        }
    }
}

struct Failure {
    code: i32,
    message: String,
    detail: Value,
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message: message.into(),
        detail: Value::Null,
    }
}

impl From<crate::bundle::BundleError> for Failure {
    fn from(e: crate::bundle::BundleError) -> Self {
        input_error(e.to_string())
    }
}

impl From<crate::bundle::WorkspaceError> for Failure {
    fn from(e: crate::bundle::WorkspaceError) -> Self {
        let detail = match &e {
            crate::bundle::WorkspaceError::Invalid { error, .. } => recipe_error_json(error),
            _ => Value::Null,
        };
        Failure {
            code: EXIT_INPUT,
            message: e.to_string(),
            detail,
        }
    }
}

impl From<crate::budget::BudgetExceeded> for Failure {
    fn from(e: crate::budget::BudgetExceeded) -> Self {
        Failure {
            code: EXIT_BUDGET,
            message: e.to_string(),
            detail: Value::Null,
        }
    }
}

fn recipe_error_json(e: &RecipeError) -> Value {
    match e {
        RecipeError::Graph(v) => json!({
            "graph_violations": v.iter().map(|x| {
                let mut o = serde_json::to_value(x).expect("violation serializes");
                o["condition"] = json!(x.condition());
                o
            }).collect::<Vec<_>>()
        }),
        RecipeError::Typing(v) => json!({ "typing_violations": v }),
    }
}

/// Runs the CLI on `args` (including the program name), writing the report
/// to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return code;
        }
    };
    let format = cli.format;
    match dispatch(&cli) {
        Ok(report) => {
            let _ = match format {
                Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&report.json).unwrap_or_default()),
                Format::Dot => match &report.dot {
                    Some(d) => write!(out, "{d}"),
                    None => writeln!(out, "{}", report.human),
                },
                Format::Human => writeln!(out, "{}", report.human),
            };
            report.code
        }
        Err(f) => {
            if format == Format::Json {
                let body = json!({ "error": f.message, "detail": f.detail, "exit_code": f.code });
                let _ = writeln!(out, "{}", serde_json::to_string_pretty(&body).unwrap_or_default());
            }
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn load_workspace(cli: &Cli) -> Result<Workspace, Failure> {
    let path = cli
        .bundle
        .as_ref()
        .ok_or_else(|| input_error("no bundle given (use --bundle)"))?;
    Ok(parse_bundle(&read(path)?)?)
}

/// A recipe id from the bundle, or a path to a recipe JSON file.
fn recipe_arg(ws: &Workspace, arg: &str) -> Result<Recipe, Failure> {
    if ws.recipe_ids().any(|id| id == arg) {
        return Ok(ws.recipe(arg)?);
    }
    let path = Path::new(arg);
    if path.exists() {
        let doc: RecipeDoc = from_json(&read(path)?)?;
        return Ok(ws.build(&doc)?);
    }
    Err(input_error(format!("`{arg}` is neither a recipe id nor a recipe file")))
}

fn acceptability(ws: &Workspace, args: &AcceptArgs) -> Result<AcceptabilitySet, Failure> {
    let mut x = match &args.file {
        Some(p) => {
            let doc: AcceptabilityDoc = from_json(&read(p)?)?;
            AcceptabilitySet::from_doc(&doc, ws.hierarchies()).map_err(|e| input_error(format!("acceptability: {e}")))?
        }
        None => ws.acceptability().clone(),
    };
    if args.policy.is_some() || args.depth.is_some() {
        let policy = match args.policy {
            Some(PolicyArg::Exact) => Policy::Exact,
            Some(PolicyArg::PathComparable) => Policy::PathComparable,
            None => x.policy(),
        };
        let depth = args.depth.unwrap_or(x.depth_limit());
        x = x.with_policy(policy, depth);
    }
    Ok(x)
}

fn recipe_json(r: &Recipe) -> Value {
    let roles = r.roles();
    json!({
        "comestibles": r.comestibles(),
        "actions": r.actions(),
        "arcs": r.arcs(),
        "types": r.typing(),
        "roles": { "inputs": roles.inputs, "outputs": roles.outputs, "mids": roles.mids },
    })
}

fn recipe_human(r: &Recipe) -> String {
    let mut s = String::new();
    for n in r.nodes() {
        s.push_str(&format!("  {n}: {}\n", r.typing()[n]));
    }
    let arcs: Vec<String> = r.arcs().iter().map(|(a, b)| format!("{a}->{b}")).collect();
    s.push_str(&format!("  arcs: {}", arcs.join(" ")));
    s
}

fn set(nodes: &BTreeSet<NodeId>) -> String {
    format!("{{{}}}", nodes.iter().map(|n| n.as_str()).collect::<Vec<_>>().join(", "))
}

fn resolve_type(ws: &Workspace, kind: Kind, text: &str) -> Result<TypeId, Failure> {
    let hs = ws.hierarchies();
    hs.resolve(kind, text)
        .or_else(|e| hs.resolve(kind, &text.replace('_', " ")).map_err(|_| e))
        .map_err(|e| input_error(e.to_string()))
}

fn dispatch(cli: &Cli) -> Result<Report, Failure> {
    let ws = load_workspace(cli)?;
    let hs = ws.hierarchies();
    let mut budget = Budget::new(cli.budget);
    match &cli.command {
        Command::Validate { ids } => {
            let ids: Vec<String> = if ids.is_empty() {
                ws.recipe_ids().map(str::to_owned).collect()
            } else {
                ids.clone()
            };
            let mut lines = Vec::new();
            let mut results = BTreeMap::new();
            let mut code = EXIT_OK;
            for id in &ids {
                let doc = ws.recipe_doc(id)?;
                match ws.build(doc) {
                    Ok(_) => {
                        lines.push(format!("{id}: valid"));
                        results.insert(id.clone(), json!({ "valid": true }));
                    }
                    Err(crate::bundle::WorkspaceError::Invalid { error, .. }) => {
                        code = EXIT_INPUT;
                        lines.push(format!("{id}: invalid"));
                        match &error {
                            RecipeError::Graph(v) => lines.extend(v.iter().map(|x| format!("  {x}"))),
                            RecipeError::Typing(v) => lines.extend(v.iter().map(|x| format!("  {x}"))),
                        }
                        let mut o = recipe_error_json(&error);
                        o["valid"] = json!(false);
                        results.insert(id.clone(), o);
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            Ok(Report::new(code, lines.join("\n"), json!({ "command": "validate", "recipes": results })))
        }
        Command::Roles { id } => {
            let r = ws.recipe(id)?;
            let roles = r.roles();
            let human = format!(
                "In = {}\nOut = {}\nMid = {}\nActs = {}\natomic = {}",
                set(&roles.inputs),
                set(&roles.outputs),
                set(&roles.mids),
                set(r.actions()),
                r.is_atomic()
            );
            Ok(Report::new(
                EXIT_OK,
                human,
                json!({ "command": "roles", "recipe": id, "inputs": roles.inputs, "outputs": roles.outputs,
                        "mids": roles.mids, "actions": r.actions(), "atomic": r.is_atomic() }),
            ))
        }
        Command::Compare {
            relation,
            first,
            second,
            strict,
        } => {
            let (r1, r2) = (recipe_arg(&ws, first)?, recipe_arg(&ws, second)?);
            let (holds, witness): (bool, Value) = match relation {
                Relation::Iso => {
                    let w = isomorphic_within(&r1, &r2, &mut budget)?;
                    (w.is_some(), json!(w))
                }
                Relation::Equiv => {
                    let w = equivalent_within(&r1, &r2, &mut budget)?;
                    (w.is_some(), json!(w))
                }
                Relation::Specific => {
                    let w = more_specific_within(&r1, &r2, hs, &mut budget)?;
                    (w.is_some(), json!(w))
                }
                Relation::Finer => {
                    let w = finer_grained(&r1, &r2, *strict, &mut budget)?;
                    (w.is_some(), json!(w))
                }
                Relation::Sub => (is_subrecipe(&r1, &r2), Value::Null),
                Relation::Io => (in_out_aligned(&r1, &r2), Value::Null),
            };
            let name = format!("{relation:?}").to_lowercase();
            let mut human = format!("{name}({first}, {second}) = {holds}");
            if let Some(map) = witness.as_object() {
                for (k, v) in map {
                    human.push_str(&format!("\n  {k} -> {}", v.as_str().unwrap_or_default()));
                }
            }
            Ok(Report::new(
                if holds { EXIT_OK } else { EXIT_NEGATIVE },
                human,
                json!({ "command": "compare", "relation": name, "first": first, "second": second,
                        "holds": holds, "witness": witness }),
            ))
        }
        Command::Compose {
            first,
            second,
            match_subtypes,
        } => {
            let (r1, r2) = (recipe_arg(&ws, first)?, recipe_arg(&ws, second)?);
            let opts = ComposeOptions {
                match_subtypes: *match_subtypes,
            };
            match compose_with(&r1, &r2, hs, opts) {
                Ok(r) => Ok(Report {
                    dot: Some(export_dot(&r, &format!("{first}+{second}"))),
                    ..Report::new(
                        EXIT_OK,
                        format!("{first} (+) {second}:\n{}", recipe_human(&r)),
                        json!({ "command": "compose", "ok": true, "recipe": recipe_json(&r) }),
                    )
                }),
                Err(ComposeError::Conditions(v)) => Ok(Report::new(
                    EXIT_NEGATIVE,
                    format!(
                        "{first} (+) {second} fails\n{}",
                        v.iter().map(|c| format!("  {c}")).collect::<Vec<_>>().join("\n")
                    ),
                    json!({ "command": "compose", "ok": false, "violations": v }),
                )),
                Err(ComposeError::InvalidResult(e)) => Ok(Report::new(
                    EXIT_NEGATIVE,
                    format!("{first} (+) {second} fails: {e}"),
                    json!({ "command": "compose", "ok": false, "invalid_result": recipe_error_json(&e) }),
                )),
            }
        }
        Command::Closure {
            ids,
            max_recipes,
            max_nodes,
        } => {
            let ids: Vec<String> = if ids.is_empty() {
                ws.recipe_ids().map(str::to_owned).collect()
            } else {
                ids.clone()
            };
            let seeds = ids.iter().map(|id| ws.recipe(id)).collect::<Result<Vec<_>, _>>()?;
            let limits = ClosureLimits {
                max_recipes: *max_recipes,
                max_nodes: *max_nodes,
            };
            let (set, truncated) = match compose_closure(seeds, hs, limits) {
                Ok(s) => (s, false),
                Err(e) => (e.partial, true),
            };
            let mut human = format!("{} recipes{}", set.len(), if truncated { " (truncated)" } else { "" });
            for (i, r) in set.iter().enumerate() {
                human.push_str(&format!("\n#{i}: actions {}", set_of(r.actions())));
            }
            Ok(Report::new(
                if truncated { EXIT_BUDGET } else { EXIT_OK },
                human,
                json!({ "command": "closure", "truncated": truncated, "size": set.len(),
                        "recipes": set.iter().map(recipe_json).collect::<Vec<_>>() }),
            ))
        }
        Command::Decompose { id } => {
            let r = ws.recipe(id)?;
            let parts = decompose(&r);
            let human = parts
                .iter()
                .map(|p| format!("{}:\n{}", set_of(p.actions()), recipe_human(p)))
                .collect::<Vec<_>>()
                .join("\n");
            Ok(Report::new(
                EXIT_OK,
                human,
                json!({ "command": "decompose", "recipe": id,
                        "atomics": parts.iter().map(recipe_json).collect::<Vec<_>>() }),
            ))
        }
        Command::Accept { id, accept } => {
            let r = ws.recipe(id)?;
            let x = acceptability(&ws, accept)?;
            let bad = unlicensed(&r, &x, hs);
            let human = if bad.is_empty() {
                format!("{id} is acceptable")
            } else {
                format!(
                    "{id} is not acceptable; unlicensed arc pairs:\n{}",
                    bad.iter().map(|t| format!("  {t}")).collect::<Vec<_>>().join("\n")
                )
            };
            Ok(Report::new(
                if bad.is_empty() { EXIT_OK } else { EXIT_NEGATIVE },
                human,
                json!({ "command": "accept", "recipe": id, "acceptable": bad.is_empty(), "unlicensed": bad }),
            ))
        }
        Command::Substitute { id, bindings, accept } => {
            let r = ws.recipe(id)?;
            let mut t = SubstitutionSet::new();
            for b in bindings {
                let (n, ty) = b
                    .split_once('=')
                    .ok_or_else(|| input_error(format!("binding `{b}` is not of the form node=type")))?;
                let n = NodeId::new(n);
                let kind = r
                    .kind_of(&n)
                    .ok_or_else(|| input_error(format!("node {n} is not in recipe {id}")))?;
                t.bind(n, resolve_type(&ws, kind, ty)?)
                    .map_err(|e| input_error(e.to_string()))?;
            }
            match apply_substitution(&r, &t, hs) {
                Ok(out) => {
                    let x = acceptability(&ws, accept)?;
                    let bad = unlicensed(&out, &x, hs);
                    Ok(Report {
                        dot: Some(export_dot(&out, id)),
                        ..Report::new(
                            EXIT_OK,
                            format!(
                                "{id} (x) {t}:\n{}\nacceptable: {}",
                                recipe_human(&out),
                                bad.is_empty()
                            ),
                            json!({ "command": "substitute", "ok": true, "substitution": t,
                                    "recipe": recipe_json(&out), "acceptable": bad.is_empty(), "unlicensed": bad }),
                        )
                    })
                }
                Err(SubstError::Invalid(e)) => Ok(Report::new(
                    EXIT_NEGATIVE,
                    format!("{id} (x) {t} is not a recipe: {e}"),
                    json!({ "command": "substitute", "ok": false, "substitution": t,
                            "invalid_result": recipe_error_json(&e) }),
                )),
                Err(e) => Err(input_error(e.to_string())),
            }
        }
        Command::Plan {
            id,
            missing,
            accept,
            distances,
            penalty,
            aggregation,
            radius,
        } => {
            let r = ws.recipe(id)?;
            let x = acceptability(&ws, accept)?;
            let mut model: DistanceModel = match distances {
                Some(p) => {
                    let doc: DistanceDoc = from_json(&read(p)?)?;
                    DistanceModel::from_doc(&doc, hs).map_err(|e| input_error(format!("distances: {e}")))?
                }
                None => ws.distances().clone(),
            };
            if let Some(p) = penalty {
                model = model.with_penalty(*p);
            }
            let mut unavailable = Unavailable::default();
            for m in missing {
                let n = NodeId::new(m.as_str());
                if r.contains(&n) {
                    unavailable.nodes.insert(n);
                } else {
                    unavailable.types.insert(resolve_type(&ws, Kind::Comestible, m).or_else(|_| resolve_type(&ws, Kind::Action, m))?);
                }
            }
            let cost_model = CostModel {
                distance: &model,
                aggregation: match aggregation {
                    AggregationArg::Sum => Aggregation::Sum,
                    AggregationArg::Max => Aggregation::Max,
                },
            };
            let cands = default_candidates(&r, &x, hs, *radius).map_err(|e| input_error(e.to_string()))?;
            match preferred_pair(&r, &unavailable, &x, &cost_model, &cands, hs, &mut budget) {
                Ok(Some(p)) => {
                    let applied = apply_substitution(&r, &p.pair.combined().map_err(|e| input_error(e.to_string()))?, hs)
                        .map_err(|e| input_error(e.to_string()))?;
                    Ok(Report {
                        dot: Some(export_dot(&applied, id)),
                        ..Report::new(
                            EXIT_OK,
                            format!(
                                "primary: {}\nsecondary: {}\ncost: {}\n{}",
                                p.pair.primary,
                                p.pair.secondary,
                                p.cost,
                                recipe_human(&applied)
                            ),
                            json!({ "command": "plan", "found": true, "primary": p.pair.primary,
                                    "secondary": p.pair.secondary, "cost": p.cost, "recipe": recipe_json(&applied) }),
                        )
                    })
                }
                Ok(None) => Ok(Report::new(
                    EXIT_NEGATIVE,
                    "no acceptable substitution pair in the candidate space",
                    json!({ "command": "plan", "found": false }),
                )),
                Err(SecondaryError::Budget(b)) => Err(b.into()),
                Err(e) => Err(input_error(e.to_string())),
            }
        }
        Command::Rewrite {
            id,
            remove,
            insert,
            literal_action_check,
            forbid_empty_front,
        } => {
            let r = ws.recipe(id)?;
            let (r1, r2) = (recipe_arg(&ws, remove)?, recipe_arg(&ws, insert)?);
            let opts = RewriteOptions {
                literal_action_check: *literal_action_check,
                allow_empty_front: !*forbid_empty_front,
            };
            Ok(rewrite_report(id, structural_substitute_with(&r, &r1, &r2, hs, opts), None))
        }
        Command::RewriteSeq { id, plan, accept } => {
            let r = ws.recipe(id)?;
            let plan: PlanDoc = from_json(&read(plan)?)?;
            let mut steps = Vec::new();
            for s in plan.primary.iter().chain(&plan.secondary) {
                steps.push(RewriteStep::new(step_recipe(&ws, &s.remove)?, step_recipe(&ws, &s.insert)?));
            }
            let x = acceptability(&ws, accept)?;
            match apply_sequence(&r, &steps, hs, RewriteOptions::default()) {
                Ok(out) => {
                    let bad = unlicensed(&out, &x, hs);
                    let mut rep = rewrite_report(id, Ok(out), Some(bad.is_empty()));
                    rep.json["unlicensed"] = json!(bad);
                    if !bad.is_empty() {
                        rep.code = EXIT_NEGATIVE;
                    }
                    Ok(rep)
                }
                Err(f) => {
                    let mut rep = rewrite_report(id, Err(f.error), None);
                    rep.human = format!("step {}: {}", f.step, rep.human);
                    rep.json["failed_step"] = json!(f.step);
                    Ok(rep)
                }
            }
        }
        Command::StructuralCost {
            first,
            second,
            edit_weight,
            type_weight,
        } => {
            let (r1, r2) = (recipe_arg(&ws, first)?, recipe_arg(&ws, second)?);
            let params = StructuralCostParams {
                edit_weight: *edit_weight,
                type_weight: *type_weight,
            };
            let c = structural_cost(&r1, &r2, hs, ws.distances(), params, &mut budget)?;
            Ok(Report::new(
                EXIT_OK,
                format!("structural cost (non-normative): {}", c.value),
                json!({ "command": "structural-cost", "cost": c }),
            ))
        }
        Command::ExportDot { id, out } => {
            let r = ws.recipe(id)?;
            let dot = export_dot(&r, id);
            if let Some(p) = out {
                fs::write(p, &dot).map_err(|e| input_error(format!("{}: {e}", p.display())))?;
                return Ok(Report::new(
                    EXIT_OK,
                    format!("wrote {}", p.display()),
                    json!({ "command": "export-dot", "written": p }),
                ));
            }
            Ok(Report {
                dot: Some(dot.clone()),
                ..Report::new(EXIT_OK, dot.trim_end(), json!({ "command": "export-dot", "dot": dot }))
            })
        }
        Command::Canonicalize { out } => {
            let text = ws.serialize();
            if let Some(p) = out {
                fs::write(p, &text).map_err(|e| input_error(format!("{}: {e}", p.display())))?;
                Ok(Report::new(
                    EXIT_OK,
                    format!("wrote {}", p.display()),
                    json!({ "command": "canonicalize", "written": p }),
                ))
            } else {
                Ok(Report::new(EXIT_OK, text.trim_end(), serde_json::from_str(&text).unwrap_or(Value::Null)))
            }
        }
    }
}

fn set_of(nodes: &BTreeSet<NodeId>) -> String {
    set(nodes)
}

fn rewrite_report(id: &str, result: Result<Recipe, RewriteError>, acceptable: Option<bool>) -> Report {
    match result {
        Ok(r) => {
            let mut human = format!("{id} rewritten:\n{}", recipe_human(&r));
            if let Some(a) = acceptable {
                human.push_str(&format!("\nacceptable: {a}"));
            }
            Report {
                dot: Some(export_dot(&r, id)),
                ..Report::new(
                    EXIT_OK,
                    human,
                    json!({ "command": "rewrite", "ok": true, "recipe": recipe_json(&r), "acceptable": acceptable }),
                )
            }
        }
        Err(RewriteError::Conditions(v)) => Report::new(
            EXIT_NEGATIVE,
            format!(
                "rewrite fails\n{}",
                v.iter().map(|c| format!("  {c}")).collect::<Vec<_>>().join("\n")
            ),
            json!({ "command": "rewrite", "ok": false, "violations": v }),
        ),
        Err(RewriteError::InvalidResult(e)) => Report::new(
            EXIT_NEGATIVE,
            format!("rewrite fails: {e}"),
            json!({ "command": "rewrite", "ok": false, "invalid_result": recipe_error_json(&e) }),
        ),
    }
}

/// A rewrite plan file: steps name bundle recipes or embed recipe documents.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanDoc {
    #[serde(default)]
    primary: Vec<StepDoc>,
    #[serde(default)]
    secondary: Vec<StepDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StepDoc {
    remove: RecipeRef,
    insert: RecipeRef,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RecipeRef {
    Id(String),
    Inline(RecipeDoc),
}

fn step_recipe(ws: &Workspace, r: &RecipeRef) -> Result<Recipe, Failure> {
    match r {
        RecipeRef::Id(id) => Ok(ws.recipe(id)?),
        RecipeRef::Inline(doc) => Ok(ws.build(doc)?),
    }
}
