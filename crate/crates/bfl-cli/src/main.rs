use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use bfl::{
    parse_fault_tree, parse_formula, parse_unvalidated, Analyzer, CexOutcome, FaultTree,
    ResultCube, ScopeMode, StatusVector, Verdict,
};

/// Model checking for static fault trees: evaluate formulas against status
/// vectors, enumerate satisfying vectors, and repair failing vectors.
#[derive(Parser)]
#[command(name = "bfl", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check whether a status vector (or the tree itself) satisfies a formula.
    Check {
        #[command(flatten)]
        tree: TreeArg,
        #[command(flatten)]
        query: QueryArgs,
        #[command(flatten)]
        vector: VectorArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// List every satisfying status vector of a formula, grouped into sets.
    Allsat {
        #[command(flatten)]
        tree: TreeArg,
        #[command(flatten)]
        query: QueryArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Multiply don't-cares out into fully determined vectors, refusing
        /// to print more than LIMIT of them.
        #[arg(long, value_name = "LIMIT", num_args = 0..=1, default_missing_value = "4096")]
        expand: Option<usize>,
    },
    /// Repair a status vector that fails a formula, flipping as few
    /// individually necessary bits as the diagram walk requires.
    Cex {
        #[command(flatten)]
        tree: TreeArg,
        #[command(flatten)]
        query: QueryArgs,
        #[command(flatten)]
        vector: VectorArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Print the tree as a Graphviz digraph; with a vector, mark every
    /// element the failures propagate to.
    Dot {
        #[command(flatten)]
        tree: TreeArg,
        #[command(flatten)]
        vector: VectorArgs,
    },
    /// Parse a tree file and report structural violations.
    Validate {
        #[command(flatten)]
        tree: TreeArg,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args)]
struct TreeArg {
    /// Fault tree file.
    #[arg(long = "ft", value_name = "PATH")]
    ft: PathBuf,
}

#[derive(Args)]
struct QueryArgs {
    /// Formula to analyze.
    #[arg(short = 'f', long = "formula", value_name = "FORMULA")]
    formula: String,
    /// What minimization ranges over: the events a formula depends on, or
    /// every event of the tree.
    #[arg(long, value_enum, default_value_t = ScopeArg::Support)]
    scope: ScopeArg,
}

#[derive(Args)]
struct VectorArgs {
    /// Status vector as comma-separated `name=0|1`; unlisted basic events
    /// default to operational (with a warning on stderr).
    #[arg(short = 'v', long = "vector", value_name = "BITS")]
    vector: Option<String>,
    /// Treat unlisted basic events as an error instead of defaulting them.
    #[arg(long)]
    strict_vector: bool,
}

#[derive(Args)]
struct OutputArgs {
    /// Emit a JSON report instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScopeArg {
    Support,
    Global,
}

impl ScopeArg {
    fn mode(self) -> ScopeMode {
        match self {
            ScopeArg::Support => ScopeMode::Support,
            ScopeArg::Global => ScopeMode::Global,
        }
    }

    fn name(self) -> &'static str {
        match self {
            ScopeArg::Support => "support",
            ScopeArg::Global => "global",
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Check { tree, query, vector, output } => cmd_check(tree, query, vector, output),
        Command::Allsat { tree, query, output, expand } => {
            cmd_allsat(tree, query, output, expand)
        }
        Command::Cex { tree, query, vector, output } => cmd_cex(tree, query, vector, output),
        Command::Dot { tree, vector } => cmd_dot(tree, vector),
        Command::Validate { tree, output } => cmd_validate(tree, output),
    }
}

fn load_tree(path: &Path) -> Result<FaultTree, String> {
    let text =
        fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_fault_tree(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn parse_vector(ft: &FaultTree, spec: &str, strict: bool) -> Result<StatusVector, String> {
    let mut pairs = Vec::new();
    for item in spec.split(',') {
        let item = item.trim();
        if item.is_empty() {
            continue;
        }
        let (name, bit) = item
            .split_once('=')
            .ok_or_else(|| format!("bad assignment `{item}`, expected name=0|1"))?;
        let bit = match bit.trim() {
            "0" => false,
            "1" => true,
            other => {
                return Err(format!("bad status `{other}` for `{}`, expected 0 or 1", name.trim()))
            }
        };
        pairs.push((name.trim().to_string(), bit));
    }
    let (vector, defaulted) =
        StatusVector::from_assignments(ft, &pairs, strict).map_err(|e| e.to_string())?;
    if !defaulted.is_empty() {
        eprintln!("warning: defaulting to operational: {}", defaulted.join(", "));
    }
    Ok(vector)
}

fn vector_csv(ft: &FaultTree, v: &StatusVector) -> String {
    ft.basic_event_order()
        .iter()
        .enumerate()
        .map(|(i, name)| format!("{name}={}", v.bit(i) as u8))
        .collect::<Vec<_>>()
        .join(",")
}

fn vector_json(ft: &FaultTree, v: &StatusVector) -> serde_json::Value {
    let map: serde_json::Map<String, serde_json::Value> = ft
        .basic_event_order()
        .iter()
        .enumerate()
        .map(|(i, name)| (name.clone(), json!(v.bit(i) as u8)))
        .collect();
    serde_json::Value::Object(map)
}

fn report_tail(formula: &str, scope: ScopeArg, tree: &Path) -> serde_json::Value {
    json!({
        "formula": formula,
        "scope": scope.name(),
        "tree": tree.display().to_string(),
        "version": env!("CARGO_PKG_VERSION"),
    })
}

/// Merges `extra` into the common report fields and prints the result.
fn print_json(mut tail: serde_json::Value, extra: serde_json::Value) {
    let (Some(base), serde_json::Value::Object(extra)) = (tail.as_object_mut(), extra) else {
        unreachable!("reports are objects");
    };
    for (k, v) in extra {
        base.insert(k, v);
    }
    println!("{}", serde_json::to_string_pretty(&tail).expect("report serializes"));
}

fn cmd_check(
    tree: TreeArg,
    query: QueryArgs,
    vector: VectorArgs,
    output: OutputArgs,
) -> Result<ExitCode, String> {
    let ft = load_tree(&tree.ft)?;
    let f = parse_formula(&query.formula, &ft).map_err(|e| e.to_string())?;
    let b = vector
        .vector
        .as_deref()
        .map(|spec| parse_vector(&ft, spec, vector.strict_vector))
        .transpose()?;
    let mut analyzer = Analyzer::new(&ft, query.scope.mode());
    let verdict = analyzer.evaluate(&f, b.as_ref()).map_err(|e| e.to_string())?;
    let (holds, layer) = match verdict {
        Verdict::Vector(holds) => (holds, "vector"),
        Verdict::Tree(holds) => (holds, "tree"),
    };
    if output.json {
        print_json(
            report_tail(&query.formula, query.scope, &tree.ft),
            json!({ "verdict": holds, "layer": layer }),
        );
    } else {
        println!("{}", if holds { "holds" } else { "does not hold" });
    }
    Ok(ExitCode::from(u8::from(!holds)))
}

fn cube_json(cube: &ResultCube) -> serde_json::Value {
    json!({
        "failed": cube.failed,
        "operational": cube.operational,
        "dont_care": cube.dont_care,
    })
}

fn cmd_allsat(
    tree: TreeArg,
    query: QueryArgs,
    output: OutputArgs,
    expand: Option<usize>,
) -> Result<ExitCode, String> {
    let ft = load_tree(&tree.ft)?;
    let f = parse_formula(&query.formula, &ft).map_err(|e| e.to_string())?;
    let mut analyzer = Analyzer::new(&ft, query.scope.mode());
    let set = analyzer.satisfying_set(&f).map_err(|e| e.to_string())?;
    let cubes = match expand {
        Some(limit) => set
            .expanded(limit)
            .ok_or_else(|| format!("expansion would exceed {limit} vectors"))?,
        None => set.cubes.clone(),
    };
    if output.json {
        print_json(
            report_tail(&query.formula, query.scope, &tree.ft),
            json!({
                "sets": cubes.iter().map(cube_json).collect::<Vec<_>>(),
                "count": cubes.len(),
                "events": set.scope,
                "path_semantics": set.path_semantics,
            }),
        );
        return Ok(ExitCode::SUCCESS);
    }
    let kind = if set.path_semantics { "path set" } else { "failure set" };
    if cubes.is_empty() {
        println!("0 {kind}s");
        return Ok(ExitCode::SUCCESS);
    }
    let plural = if cubes.len() == 1 { "" } else { "s" };
    println!("{} {kind}{plural} over {{{}}}", cubes.len(), set.scope.join(", "));
    for cube in &cubes {
        let names = if set.path_semantics { &cube.operational } else { &cube.failed };
        let mut line = format!("  {{{}}}", names.join(", "));
        if !cube.dont_care.is_empty() {
            line.push_str(&format!(" (either way: {})", cube.dont_care.join(", ")));
        }
        println!("{line}");
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_cex(
    tree: TreeArg,
    query: QueryArgs,
    vector: VectorArgs,
    output: OutputArgs,
) -> Result<ExitCode, String> {
    let ft = load_tree(&tree.ft)?;
    let f = parse_formula(&query.formula, &ft).map_err(|e| e.to_string())?;
    let spec = vector.vector.as_deref().ok_or("a status vector is required (-v)")?;
    let b = parse_vector(&ft, spec, vector.strict_vector)?;
    let mut analyzer = Analyzer::new(&ft, query.scope.mode());
    let outcome = analyzer.counterexample(&f, &b).map_err(|e| e.to_string())?;
    let tail = report_tail(&query.formula, query.scope, &tree.ft);
    match outcome {
        CexOutcome::AlreadySatisfies => {
            if output.json {
                print_json(tail, json!({ "counterexample": null, "status": "already-satisfies" }));
            } else {
                println!("already satisfies");
            }
            Ok(ExitCode::SUCCESS)
        }
        CexOutcome::Unsatisfiable => {
            if output.json {
                print_json(tail, json!({ "counterexample": null, "status": "unsatisfiable" }));
            } else {
                println!("no counterexample: no vector satisfies the formula");
            }
            Ok(ExitCode::from(3))
        }
        CexOutcome::Found(cex) => {
            if output.json {
                print_json(
                    tail,
                    json!({
                        "counterexample": {
                            "revised": vector_json(&ft, &cex.revised),
                            "flipped": cex.flipped,
                        },
                        "status": "found",
                    }),
                );
            } else {
                println!("does not hold; counterexample:");
                println!("  flipped: {}", cex.flipped.join(", "));
                println!("  revised: {}", vector_csv(&ft, &cex.revised));
            }
            Ok(ExitCode::from(1))
        }
    }
}

fn cmd_dot(tree: TreeArg, vector: VectorArgs) -> Result<ExitCode, String> {
    let ft = load_tree(&tree.ft)?;
    let b = vector
        .vector
        .as_deref()
        .map(|spec| parse_vector(&ft, spec, vector.strict_vector))
        .transpose()?;
    let dot = ft.to_dot(b.as_ref()).map_err(|e| e.to_string())?;
    print!("{dot}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_validate(tree: TreeArg, output: OutputArgs) -> Result<ExitCode, String> {
    let text =
        fs::read_to_string(&tree.ft).map_err(|e| format!("{}: {e}", tree.ft.display()))?;
    let ft = parse_unvalidated(&text).map_err(|e| format!("{}: {e}", tree.ft.display()))?;
    let report = ft.validate();
    if output.json {
        let tail = json!({
            "tree": tree.ft.display().to_string(),
            "version": env!("CARGO_PKG_VERSION"),
        });
        print_json(
            tail,
            json!({
                "verdict": report.is_empty(),
                "violations": report.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            }),
        );
    } else if report.is_empty() {
        println!("ok");
    } else {
        for violation in &report.violations {
            println!("{violation}");
        }
    }
    Ok(ExitCode::from(u8::from(!report.is_empty())))
}
