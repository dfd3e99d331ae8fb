//! Command-line front end: file in, formula (or set, or report) out.
//!
//! Exit codes: 0 on success, 1 when a describe query has no referring
//! expression (a legitimate answer, distinct from failure), 2 on usage,
//! IO, or library errors. Results go to stdout, diagnostics and traces to
//! stderr.

use std::collections::BTreeSet;
use std::error::Error;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use lgre::gre_graph::{make_re_with, AtomCount, CostFunction, GraphOptions};
use lgre::gre_sim::{compute_gre, measure_blowup, re_for, Scheduler};
use lgre::logic::{parse_formula, FormulaLayer};
use lgre::{minimize, ElementId, Formula, Language, RelationalModel, SimOptions};

#[derive(Parser)]
#[command(
    name = "lgre",
    version,
    about = "Referring expressions over finite relational models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a formula whose extension is exactly the target.
    Describe(DescribeArgs),
    /// Print every element's simulator set.
    Simulate(SimulateArgs),
    /// Evaluate a formula against a model.
    Eval(EvalArgs),
    /// Quotient a model by mutual similarity.
    Minimize(MinimizeArgs),
    /// Measure formula sizes on the worst-case linear-order family.
    Blowup(BlowupArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum LogicArg {
    Fol,
    Epfol,
    Alc,
    El,
    Elan,
}

impl From<LogicArg> for Language {
    fn from(l: LogicArg) -> Language {
        match l {
            LogicArg::Fol => Language::Fol,
            LogicArg::Epfol => Language::Epfol,
            LogicArg::Alc => Language::Alc,
            LogicArg::El => Language::El,
            LogicArg::Elan => Language::Elan,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    /// Simulator-set refinement; supports el and elan.
    Sim,
    /// Branch-and-bound graph search; supports epfol and el.
    Graph,
    /// Minimize by mutual similarity, then search the quotient.
    Combined,
}

#[derive(Clone, Copy, ValueEnum)]
enum CostArg {
    /// Number of nodes plus number of facts.
    AtomCount,
}

impl CostArg {
    fn function(self) -> &'static dyn CostFunction {
        match self {
            CostArg::AtomCount => &AtomCount,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SchedArg {
    Fifo,
    Naive,
    Adversarial,
    Quadratic,
}

impl From<SchedArg> for Scheduler {
    fn from(s: SchedArg) -> Scheduler {
        match s {
            SchedArg::Fifo => Scheduler::Fifo,
            SchedArg::Naive => Scheduler::Naive,
            SchedArg::Adversarial => Scheduler::AdversarialExponential,
            SchedArg::Quadratic => Scheduler::Quadratic,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum LayerArg {
    /// Pick the layer that parses (description logic first).
    Auto,
    /// Description-logic concepts: `dog & some sniffs . cat`.
    Dl,
    /// First-order formulas: `ex x2 . sniffs(x1,x2)`.
    Fo,
}

#[derive(Args)]
struct DescribeArgs {
    /// Model file; `.json` selects the JSON format, anything else text.
    #[arg(long)]
    model: PathBuf,
    /// Element to describe.
    #[arg(long)]
    target: String,
    #[arg(long, value_enum)]
    logic: LogicArg,
    #[arg(long, value_enum, default_value = "graph")]
    algo: AlgoArg,
    #[arg(long, value_enum, default_value = "atom-count")]
    cost: CostArg,
    /// Refinement scheduler (sim algorithm only).
    #[arg(long, value_enum, default_value = "fifo")]
    scheduler: SchedArg,
    #[arg(long, value_enum, default_value = "text")]
    format: FormatArg,
    /// Emit the search or refinement trace on stderr.
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, value_enum)]
    logic: LogicArg,
    #[arg(long, value_enum, default_value = "text")]
    format: FormatArg,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    /// Formula text, e.g. `dog & small` or `ex x2 . sniffs(x1,x2)`.
    formula: String,
    #[arg(long, value_enum, default_value = "auto")]
    layer: LayerArg,
    #[arg(long, value_enum, default_value = "text")]
    format: FormatArg,
}

#[derive(Args)]
struct MinimizeArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, value_enum)]
    logic: LogicArg,
    /// Write the quotient model here (text format); stdout otherwise.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: FormatArg,
}

#[derive(Args)]
struct BlowupArgs {
    /// Length of the linear order.
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum, default_value = "adversarial")]
    scheduler: SchedArg,
    #[arg(long, value_enum, default_value = "text")]
    format: FormatArg,
}

fn main() -> ExitCode {
    // Restore the default SIGPIPE disposition so `lgre simulate | head`
    // dies quietly; Rust's runtime ignores the signal and println! would
    // panic on the closed pipe instead.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

type CliResult = Result<ExitCode, Box<dyn Error>>;

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Describe(args) => cmd_describe(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Minimize(args) => cmd_minimize(args),
        Command::Blowup(args) => cmd_blowup(args),
    }
}

fn load_model(path: &Path) -> Result<RelationalModel, Box<dyn Error>> {
    let text = fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let model = if path.extension().is_some_and(|ext| ext == "json") {
        RelationalModel::from_json_str(&text)?
    } else {
        RelationalModel::from_text(&text)?
    };
    Ok(model)
}

fn render_set(set: &BTreeSet<ElementId>) -> String {
    let mut out = String::from("{");
    for (i, e) in set.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(e.as_str());
    }
    out.push('}');
    out
}

fn json_set(set: &BTreeSet<ElementId>) -> serde_json::Value {
    set.iter().map(|e| e.as_str()).collect()
}

fn cmd_describe(args: DescribeArgs) -> CliResult {
    let model = load_model(&args.model)?;
    let lang = Language::from(args.logic);
    let sim = SimOptions::default();

    // Each route produces the formula and, where meaningful, a cost.
    let found: Option<(Formula, Option<u64>)> = match args.algo {
        AlgoArg::Sim => {
            let run = compute_gre(&model, lang, &args.scheduler.into())?;
            if args.trace {
                for step in &run.steps {
                    eprintln!("{step}");
                }
            }
            re_for(&run.state, &args.target)?.map(|phi| (Formula::Dl(phi), None))
        }
        AlgoArg::Graph => {
            let opts = GraphOptions {
                sim,
                trace: args.trace,
            };
            let outcome = make_re_with(&model, &args.target, lang, args.cost.function(), &opts)?;
            for line in &outcome.trace {
                eprintln!("{line}");
            }
            outcome.re.map(|re| (re.formula, Some(re.cost)))
        }
        AlgoArg::Combined => {
            let minimized = minimize(&model, lang, &sim)?;
            if model.element(&args.target).is_none() {
                return Err(format!("unknown element `{}`", args.target).into());
            }
            if args.trace {
                for (element, class) in minimized.classes() {
                    eprintln!("class of {element}: {class}");
                }
            }
            if minimized.class_members(&args.target).len() > 1 {
                None
            } else {
                let class = minimized.class_of(&args.target).unwrap().as_str().to_owned();
                let opts = GraphOptions {
                    sim,
                    trace: args.trace,
                };
                let outcome =
                    make_re_with(minimized.model(), &class, lang, args.cost.function(), &opts)?;
                for line in &outcome.trace {
                    eprintln!("{line}");
                }
                outcome.re.map(|re| (re.formula, Some(re.cost)))
            }
        }
    };

    let Some((formula, cost)) = found else {
        match args.format {
            FormatArg::Text => println!("no referring expression"),
            FormatArg::Json => println!("{}", json!({ "formula": null })),
        }
        return Ok(ExitCode::from(1));
    };

    let extension = formula.extension(&model)?;
    match args.format {
        FormatArg::Text => println!("{formula}"),
        FormatArg::Json => {
            let payload = json!({
                "formula": formula.to_string(),
                "extension": json_set(&extension),
                "dag_size": formula.dag_size(),
                "tree_size": formula.tree_size().to_string(),
                "cost": cost,
            });
            println!("{payload}");
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_simulate(args: SimulateArgs) -> CliResult {
    let model = load_model(&args.model)?;
    let lang = Language::from(args.logic);
    let mut sets = Vec::new();
    for v in model.domain() {
        let set = lgre::simulation::simulator_set(&model, v.as_str(), lang, &SimOptions::default())?;
        sets.push((v.clone(), set));
    }
    match args.format {
        FormatArg::Text => {
            for (v, set) in &sets {
                println!("{v}: {}", render_set(set));
            }
        }
        FormatArg::Json => {
            let payload: serde_json::Map<String, serde_json::Value> = sets
                .iter()
                .map(|(v, set)| (v.to_string(), json_set(set)))
                .collect();
            println!("{}", serde_json::Value::from(payload));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_eval(args: EvalArgs) -> CliResult {
    let model = load_model(&args.model)?;
    let formula = match args.layer {
        LayerArg::Dl => parse_formula(&args.formula, FormulaLayer::Dl)?,
        LayerArg::Fo => parse_formula(&args.formula, FormulaLayer::Fo)?,
        LayerArg::Auto => parse_formula(&args.formula, FormulaLayer::Dl)
            .or_else(|_| parse_formula(&args.formula, FormulaLayer::Fo))?,
    };
    let extension = formula.extension(&model)?;
    match args.format {
        FormatArg::Text => println!("{}", render_set(&extension)),
        FormatArg::Json => {
            let payload = json!({
                "extension": json_set(&extension),
                "dag_size": formula.dag_size(),
                "tree_size": formula.tree_size().to_string(),
            });
            println!("{payload}");
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_minimize(args: MinimizeArgs) -> CliResult {
    let model = load_model(&args.model)?;
    let lang = Language::from(args.logic);
    let minimized = minimize(&model, lang, &SimOptions::default())?;
    let model_text = minimized.model().to_text();
    if let Some(path) = &args.output {
        fs::write(path, &model_text)
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    match args.format {
        FormatArg::Text => {
            if args.output.is_none() {
                print!("{model_text}");
            }
            let mut line = String::new();
            for class in minimized.model().domain() {
                line.clear();
                write!(line, "class {class}:").unwrap();
                for member in minimized.class_members(class.as_str()) {
                    write!(line, " {member}").unwrap();
                }
                println!("{line}");
            }
        }
        FormatArg::Json => {
            let classes: serde_json::Map<String, serde_json::Value> = minimized
                .classes()
                .iter()
                .map(|(e, c)| (e.to_string(), c.to_string().into()))
                .collect();
            let payload = json!({
                "model": model_text,
                "classes": classes,
                "class_count": minimized.class_count(),
            });
            println!("{payload}");
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_blowup(args: BlowupArgs) -> CliResult {
    let report = measure_blowup(args.n, &args.scheduler.into())?;
    match args.format {
        FormatArg::Text => println!(
            "n={} dag_size={} tree_size={} removals={} ops={}",
            report.n, report.dag_size, report.tree_size, report.removals, report.ops
        ),
        FormatArg::Json => {
            let payload = json!({
                "n": report.n,
                "dag_size": report.dag_size,
                "tree_size": report.tree_size.to_string(),
                "removals": report.removals,
                "ops": report.ops,
            });
            println!("{payload}");
        }
    }
    Ok(ExitCode::SUCCESS)
}
