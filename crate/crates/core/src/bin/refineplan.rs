//! Command-line front end: project queries against domain actions, build
//! abstractions, run the refinement planner, verify the randomized soundness
//! suites, and exercise the synthetic uniform networks.

use std::fs;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value as Json};

use refineplan::actions::AbstractStyle;
use refineplan::domain::{
    build_abstraction, format_action, format_sentence, parse_domain, parse_grouping, parse_query,
    DomainFile,
};
use refineplan::netgen::{exhaustive_bound, maximal_pruning_bound, uniform_network};
use refineplan::oracle::{
    run_abstraction_suite, run_ordering_suite, run_planner_suite, VerificationReport,
};
use refineplan::planner::search;
use refineplan::projection::project;
use refineplan::{Error, Result};

#[derive(Parser)]
#[command(name = "refineplan", version, about = "Interval projection and refinement planning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Json,
}

#[derive(Args)]
struct OutputOpts {
    /// Output format.
    #[arg(long, value_enum, default_value = "human")]
    format: Format,
    /// Decimal places for probabilities and utilities.
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u8).range(1..=12))]
    precision: u8,
}

#[derive(Subcommand)]
enum Command {
    /// Project a query sentence against one action of a domain file.
    Project {
        file: String,
        /// Action name to project.
        #[arg(long)]
        action: String,
        /// Query sentence, e.g. "fuel@end = fuel@start - 8".
        #[arg(long)]
        query: String,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// Build an abstract action from instances declared in a domain file.
    Abstract {
        file: String,
        /// Comma-separated instance action names.
        #[arg(long)]
        action: String,
        /// Abstraction method.
        #[arg(long)]
        method: String,
        /// Grouping sets, e.g. "(a c) (b d)" or "(m.a v.i) (m.b)".
        #[arg(long)]
        grouping: String,
        /// Name of the constructed action.
        #[arg(long, default_value = "abs")]
        name: String,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// Run the refinement planner on a domain file's network.
    Plan {
        file: String,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// Run the randomized soundness and admissibility suites.
    Verify {
        /// Random cases per abstraction method.
        #[arg(long, default_value_t = 100)]
        cases: u64,
        /// Random networks for the planner suite.
        #[arg(long, default_value_t = 10)]
        networks: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// Generate a uniform maximal-pruning network and search it.
    GenNetwork {
        /// Instances per abstract action.
        #[arg(long)]
        n: u64,
        /// Abstract actions per plan step fanout.
        #[arg(long)]
        p: u64,
        /// Hierarchy depth.
        #[arg(long)]
        k: u64,
        #[command(flatten)]
        out: OutputOpts,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(output) => {
            println!("{output}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load(path: &str) -> Result<DomainFile> {
    parse_domain(&fs::read_to_string(path)?)
}

fn fmt_num(x: f64, precision: u8) -> String {
    format!("{x:.*}", precision as usize)
}

fn run(cli: Cli) -> Result<String> {
    match cli.command {
        Command::Project { file, action, query, out } => {
            let d = load(&file)?;
            let a = d.description(&action)?;
            let phi = parse_query(&query)?;
            let r = project(&d.vocab, a, d.init()?, &phi)?;
            if out.format == Format::Json {
                let branches: Vec<Json> = r
                    .branches
                    .iter()
                    .map(|b| json!({"label": b.label, "lo": b.lo, "hi": b.hi}))
                    .collect();
                return to_json(json!({
                    "action": action,
                    "query": format_sentence(&r.query),
                    "interval": [r.interval.lo, r.interval.hi],
                    "branches": branches,
                }));
            }
            let p = out.precision;
            if r.interval.is_point() {
                Ok(fmt_num(r.interval.lo, p))
            } else {
                let mut lines =
                    vec![format!("[{}, {}]", fmt_num(r.interval.lo, p), fmt_num(r.interval.hi, p))];
                for b in &r.branches {
                    lines.push(format!(
                        "branch {}: [{}, {}]",
                        b.label,
                        fmt_num(b.lo, p),
                        fmt_num(b.hi, p)
                    ));
                }
                Ok(lines.join("\n"))
            }
        }
        Command::Abstract { file, action, method, grouping, name, out } => {
            let d = load(&file)?;
            let style = AbstractStyle::parse(&method).ok_or_else(|| {
                Error::Validation(format!(
                    "unknown abstraction method `{method}` (expected intra1, intra2, inter1 or inter2)"
                ))
            })?;
            let instances: Vec<String> =
                action.split(',').map(|s| s.trim().to_string()).collect();
            let plan = parse_grouping(style, &instances, &grouping)?;
            let descs = instances
                .iter()
                .map(|i| d.description(i))
                .collect::<Result<Vec<_>>>()?;
            let built = build_abstraction(&name, style, &descs, &plan)?;
            if out.format == Format::Json {
                return to_json(json!({
                    "name": built.name,
                    "method": style.id(),
                    "duration": built.duration,
                    "text": format_action(&built),
                }));
            }
            Ok(format_action(&built))
        }
        Command::Plan { file, out } => {
            let d = load(&file)?;
            let net = d.network()?;
            let o = search(&net)?;
            if out.format == Format::Json {
                return to_json(json!({
                    "plan": o.plan,
                    "eu": [o.eu.0, o.eu.1],
                    "optimal": o.optimal,
                    "stats": serde_json::to_value(&o.stats)
                        .map_err(|e| Error::Validation(e.to_string()))?,
                }));
            }
            let p = out.precision;
            let mut lines = vec![
                format!("plan: {}", o.plan.join(", ")),
                format!("eu: [{}, {}]", fmt_num(o.eu.0, p), fmt_num(o.eu.1, p)),
            ];
            for alt in &o.optimal {
                lines.push(format!("optimal: {}", alt.join(", ")));
            }
            lines.push(format!("plans-examined: {}", o.stats.plans_examined));
            lines.push(format!("concrete-examined: {}", o.stats.concrete_examined));
            lines.push(format!("total-concrete: {}", o.stats.total_concrete));
            lines.push(format!("pruned: {}", o.stats.pruned));
            lines.push(format!("refinements: {}", o.stats.refinements));
            Ok(lines.join("\n"))
        }
        Command::Verify { cases, networks, seed, out } => {
            let mut sections: Vec<(String, VerificationReport)> = Vec::new();
            for style in [
                AbstractStyle::IntraI,
                AbstractStyle::IntraII,
                AbstractStyle::InterI,
                AbstractStyle::InterII,
            ] {
                sections.push((
                    format!("abstraction-{}", style.id()),
                    run_abstraction_suite(style, cases, seed)?,
                ));
            }
            sections.push(("ordering".into(), run_ordering_suite(cases, seed)?));
            sections.push(("planner".into(), run_planner_suite(networks, seed)?));
            let total_failures: usize = sections.iter().map(|(_, r)| r.failures.len()).sum();
            let output = if out.format == Format::Json {
                let mut obj = serde_json::Map::new();
                for (name, r) in &sections {
                    obj.insert(
                        name.clone(),
                        json!({
                            "cases": r.cases,
                            "failures": r.failures.len(),
                            "elapsed_ms": r.elapsed.as_millis() as u64,
                        }),
                    );
                }
                obj.insert("sound".into(), json!(total_failures == 0));
                to_json(Json::Object(obj))?
            } else {
                let mut lines = Vec::new();
                for (name, r) in &sections {
                    lines.push(format!(
                        "{name}: {} cases, {} failures, {:.2}s",
                        r.cases,
                        r.failures.len(),
                        r.elapsed.as_secs_f64()
                    ));
                    for f in r.failures.iter().take(5) {
                        lines.push(format!("  case {}: {}", f.case, f.detail));
                    }
                }
                lines.push(if total_failures == 0 {
                    "result: sound".into()
                } else {
                    format!("result: {total_failures} failures")
                });
                lines.join("\n")
            };
            if total_failures > 0 {
                println!("{output}");
                return Err(Error::Verification(format!("{total_failures} failed checks")));
            }
            Ok(output)
        }
        Command::GenNetwork { n, p, k, out } => {
            let net = uniform_network(n, p, k)?;
            let o = search(&net)?;
            let bound = maximal_pruning_bound(n, p, k);
            let exhaustive = exhaustive_bound(n, p, k);
            if out.format == Format::Json {
                return to_json(json!({
                    "n": n, "p": p, "k": k,
                    "plans_examined": o.stats.plans_examined,
                    "examined_bound": bound,
                    "exhaustive_bound": exhaustive.to_string(),
                    "total_concrete": o.stats.total_concrete.to_string(),
                    "plan": o.plan,
                }));
            }
            Ok([
                format!("plan: {}", o.plan.join(", ")),
                format!("plans-examined: {}", o.stats.plans_examined),
                format!("examined-bound: {bound}"),
                format!("exhaustive-bound: {exhaustive}"),
                format!("total-concrete: {}", o.stats.total_concrete),
            ]
            .join("\n"))
        }
    }
}

fn to_json(v: Json) -> Result<String> {
    serde_json::to_string_pretty(&v).map_err(|e| Error::Validation(e.to_string()))
}
