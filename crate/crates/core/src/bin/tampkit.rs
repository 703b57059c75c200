//! Command-line front end: plan single instances, author rules through a
//! recorded or live endpoint, and generate/run/report benchmark suites.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tampkit::constraints::{self, RuleSet};
use tampkit::grounding::{ground, reachable_prune, GroundTask};
use tampkit::pddl::{parse_domain, parse_problem, DomainModel, ProblemModel};
use tampkit::sat::Budget;
use tampkit::satplan::{self, PlanOutcome};
use tampkit::tamp::{self, InstanceMeta, Mode, TampConfig};
use tampkit::vrm::{self, ChatEndpoint};

#[derive(Parser)]
#[command(name = "tampkit", about = "SAT-based task planning with geometric feasibility constraints")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan one instance and print the plan.
    Plan(PlanArgs),
    /// Rule authoring through a vision-language endpoint.
    #[command(subcommand)]
    Vrm(VrmCommand),
    /// Benchmark suites.
    #[command(subcommand)]
    Bench(BenchCommand),
}

#[derive(Args)]
struct PlanArgs {
    #[arg(long)]
    domain: PathBuf,
    #[arg(long)]
    problem: PathBuf,
    /// Constraint rule file; its `.learned` sidecar is loaded when present.
    #[arg(long)]
    rules: Option<PathBuf>,
    #[arg(long, default_value_t = 30)]
    max_horizon: usize,
    /// Print the ground task and exit.
    #[arg(long)]
    dump_ground: bool,
    /// Print the DIMACS formula for this horizon and exit.
    #[arg(long, value_name = "H")]
    dump_cnf: Option<usize>,
}

#[derive(Subcommand)]
enum VrmCommand {
    /// Author constraint rules for a domain from a scene.
    Generate(VrmGenerateArgs),
}

#[derive(Args)]
struct VrmGenerateArgs {
    #[arg(long)]
    domain: PathBuf,
    /// Initial scene JSON, as produced by the refinement oracle.
    #[arg(long)]
    scene: PathBuf,
    /// Rendered scene image (PNG).
    #[arg(long)]
    image: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Comma-separated attribute names guards may reference.
    #[arg(long, value_delimiter = ',')]
    attributes: Vec<String>,
    /// Single-prompt ablation instead of the staged pipeline.
    #[arg(long)]
    condensed: bool,
    /// Serve responses from this replay directory instead of the network.
    #[arg(long, conflicts_with = "record")]
    replay: Option<PathBuf>,
    /// Record live responses into this directory.
    #[arg(long)]
    record: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    max_repair_rounds: usize,
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Generate a suite of problem files.
    Gen(BenchGenArgs),
    /// Run the loop over a suite and write per-trial metrics.
    Run(BenchRunArgs),
    /// Aggregate a metrics CSV into a table.
    Report(BenchReportArgs),
}

#[derive(Args)]
struct BenchGenArgs {
    /// blocks | containers
    #[arg(long)]
    domain: String,
    /// Inclusive size range, e.g. 1..7 (blocks) or 1..6 (goal counts).
    #[arg(long)]
    sizes: String,
    #[arg(long, default_value_t = 5)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchRunArgs {
    /// apriori | failure-driven | combined
    #[arg(long)]
    mode: String,
    /// Directory of problem files produced by `bench gen`.
    #[arg(long)]
    instances: PathBuf,
    #[arg(long)]
    rules: Option<PathBuf>,
    /// Write constraints learned during the run to this `.learned` file.
    #[arg(long)]
    save_learned: Option<PathBuf>,
    #[arg(long)]
    csv: PathBuf,
    #[arg(long, default_value_t = 30)]
    max_horizon: usize,
    #[arg(long, default_value_t = 40)]
    max_refinement_failures: usize,
}

#[derive(Args)]
struct BenchReportArgs {
    #[arg(long)]
    csv: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Plan(args) => cmd_plan(args),
        Command::Vrm(VrmCommand::Generate(args)) => cmd_vrm_generate(args),
        Command::Bench(BenchCommand::Gen(args)) => cmd_bench_gen(args),
        Command::Bench(BenchCommand::Run(args)) => cmd_bench_run(args),
        Command::Bench(BenchCommand::Report(args)) => cmd_bench_report(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

type CmdResult = Result<ExitCode, Box<dyn std::error::Error>>;

fn attr_names(problem: &ProblemModel) -> BTreeSet<String> {
    problem
        .attributes
        .values()
        .flat_map(|m| m.keys().cloned())
        .collect()
}

fn load_rules(
    path: Option<&Path>,
    domain: &DomainModel,
    attrs: &BTreeSet<String>,
) -> Result<RuleSet, Box<dyn std::error::Error>> {
    let Some(path) = path else {
        return Ok(RuleSet::default());
    };
    let text = std::fs::read_to_string(path)?;
    let mut rules = constraints::parse_rules(&text, domain, attrs)
        .map_err(|e| format!("{}: {e}", path.display()))?;
    let sidecar = path.with_extension(format!(
        "{}learned",
        path.extension().map_or(String::new(), |e| format!(
            "{}.",
            e.to_string_lossy()
        ))
    ));
    if sidecar.exists() {
        rules.learned = constraints::load_learned(&std::fs::read_to_string(&sidecar)?)?;
    }
    Ok(rules)
}

fn cmd_plan(args: PlanArgs) -> CmdResult {
    let domain = parse_domain(&std::fs::read_to_string(&args.domain)?)?;
    let problem = parse_problem(&std::fs::read_to_string(&args.problem)?, &domain)?;
    let task = reachable_prune(&ground(&domain, &problem));
    let rules = load_rules(args.rules.as_deref(), &domain, &attr_names(&problem))?;

    if args.dump_ground {
        print!("{}", tampkit::grounding::dump(&task));
        return Ok(ExitCode::SUCCESS);
    }
    if let Some(h) = args.dump_cnf {
        print!("{}", satplan::dump_cnf(&task, &rules, h));
        return Ok(ExitCode::SUCCESS);
    }

    let result = satplan::plan(&task, &rules, args.max_horizon, Budget::Unlimited);
    match result.outcome {
        PlanOutcome::Solved(plan) => {
            for name in plan.names(&task) {
                println!("{name}");
            }
            eprintln!(
                "; horizon {} | {} conflicts | {:.3}s",
                result.horizon.unwrap_or(0),
                result.conflicts,
                result.solve_time.as_secs_f64()
            );
            Ok(ExitCode::SUCCESS)
        }
        PlanOutcome::UnsolvableWithin(h) => {
            eprintln!("unsolvable within horizon {h}");
            Ok(ExitCode::FAILURE)
        }
        PlanOutcome::BudgetExceeded { horizon } => {
            eprintln!("budget exceeded at horizon {horizon}");
            Ok(ExitCode::FAILURE)
        }
    }
}

fn cmd_vrm_generate(args: VrmGenerateArgs) -> CmdResult {
    let domain_text = std::fs::read_to_string(&args.domain)?;
    let domain = parse_domain(&domain_text)?;
    let scene_json = std::fs::read_to_string(&args.scene)?;
    let image = args.image.as_ref().map(std::fs::read).transpose()?;
    let attributes: BTreeSet<String> = args.attributes.iter().cloned().collect();
    let mut request = vrm::VrmRequest::new(
        &domain_text,
        &domain,
        &scene_json,
        image.as_deref(),
        attributes,
    );
    request.max_repair_rounds = args.max_repair_rounds;

    let endpoint: Box<dyn ChatEndpoint> = match (&args.replay, &args.record) {
        (Some(dir), _) => Box::new(vrm::ReplayEndpoint::new(dir)),
        (None, Some(dir)) => Box::new(vrm::RecordingEndpoint::new(
            vrm::LiveEndpoint::from_env()?,
            dir,
        )),
        (None, None) => Box::new(vrm::LiveEndpoint::from_env()?),
    };

    let (rules, transcript) = if args.condensed {
        vrm::generate_condensed(endpoint.as_ref(), &request)?
    } else {
        vrm::generate_constraints(endpoint.as_ref(), &request)?
    };
    std::fs::write(&args.out, constraints::print_rules(&rules))?;
    eprintln!(
        "wrote {} rule(s) to {} after {} stage(s)",
        rules.rules.len(),
        args.out.display(),
        transcript.stages.len()
    );
    Ok(ExitCode::SUCCESS)
}

fn parse_sizes(spec: &str) -> Result<(usize, usize), String> {
    let (lo, hi) = spec
        .split_once("..")
        .ok_or_else(|| format!("sizes must look like 1..7, got {spec}"))?;
    let lo: usize = lo.trim().parse().map_err(|_| format!("bad size {lo}"))?;
    let hi: usize = hi.trim().parse().map_err(|_| format!("bad size {hi}"))?;
    if lo == 0 || hi < lo {
        return Err(format!("sizes must satisfy 1 <= lo <= hi, got {spec}"));
    }
    Ok((lo, hi))
}

fn cmd_bench_gen(args: BenchGenArgs) -> CmdResult {
    let (lo, hi) = parse_sizes(&args.sizes)?;
    std::fs::create_dir_all(&args.out)?;
    let mut count = 0;
    for size in lo..=hi {
        for trial in 0..args.trials {
            let seed = args
                .seed
                .wrapping_add((size as u64) << 32)
                .wrapping_add(trial as u64);
            let (name, text) = match args.domain.as_str() {
                "blocks" => (
                    format!("blocks-n{size}-t{trial}.pddl"),
                    tampkit::bench::gen_blocks(seed, size),
                ),
                "containers" => (
                    format!("containers-g{size}-t{trial}.pddl"),
                    tampkit::bench::gen_containers(seed, size),
                ),
                other => return Err(format!("unknown benchmark domain {other}").into()),
            };
            std::fs::write(args.out.join(name), text)?;
            count += 1;
        }
    }
    eprintln!("wrote {count} instance(s) to {}", args.out.display());
    Ok(ExitCode::SUCCESS)
}

fn builtin_domain(name: &str) -> Result<(&'static str, DomainModel), String> {
    let text = match name {
        "blocks" => tampkit::fixtures::BLOCKS_DOMAIN,
        "containers" => tampkit::fixtures::CONTAINERS_DOMAIN,
        other => return Err(format!("no built-in domain named {other}")),
    };
    Ok((text, parse_domain(text).map_err(|e| e.to_string())?))
}

/// Loads every `.pddl` file in the directory as an instance of its declared
/// built-in domain, sorted by file name.
fn load_instances(
    dir: &Path,
) -> Result<Vec<(InstanceMeta, GroundTask)>, Box<dyn std::error::Error>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "pddl"))
        .collect();
    paths.sort();
    let mut out = Vec::new();
    for path in paths {
        let text = std::fs::read_to_string(&path)?;
        let name_form = tampkit::sexpr::read_one(&text)?;
        let domain_name = name_form
            .as_list()
            .and_then(|items| {
                items.iter().find_map(|i| {
                    let l = i.as_list()?;
                    (l.first()?.as_atom()? == ":domain").then(|| l.get(1)?.as_atom())?
                })
            })
            .ok_or_else(|| format!("{}: no (:domain ...) form", path.display()))?
            .to_ascii_lowercase();
        let (_, domain) = builtin_domain(&domain_name)?;
        let problem = parse_problem(&text, &domain)?;
        let task = reachable_prune(&ground(&domain, &problem));
        let n_goals = problem.goal.len();
        let n_objects = match domain_name.as_str() {
            "blocks" => task.objects.iter().filter(|(_, t)| t == "block").count(),
            _ => n_goals,
        };
        let id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        out.push((
            InstanceMeta {
                id,
                n_objects,
                n_goals,
            },
            task,
        ));
    }
    Ok(out)
}

fn cmd_bench_run(args: BenchRunArgs) -> CmdResult {
    let mode = Mode::parse(&args.mode)
        .ok_or_else(|| format!("unknown mode {}; use apriori, failure-driven or combined", args.mode))?;
    let instances = load_instances(&args.instances)?;
    if instances.is_empty() {
        return Err(format!("no .pddl instances in {}", args.instances.display()).into());
    }
    // every instance in a suite shares one domain; use it to parse rules
    let domain = instances[0].1.domain.clone();
    let attrs: BTreeSet<String> = instances
        .iter()
        .flat_map(|(_, t)| t.attributes.values().flat_map(|m| m.keys().cloned()))
        .collect();
    let mut rules = load_rules(args.rules.as_deref(), &domain, &attrs)?;

    let mut config = TampConfig::new(mode);
    config.max_horizon = args.max_horizon;
    config.max_refinement_failures = args.max_refinement_failures;

    let metrics = tamp::run_suite(&instances, &mut rules, &config);
    std::fs::write(&args.csv, tamp::metrics_to_csv(&metrics))?;
    if let Some(path) = &args.save_learned {
        std::fs::write(path, constraints::save_learned(&rules.learned))?;
    }
    let solved = metrics.iter().filter(|m| m.success).count();
    eprintln!(
        "{solved}/{} solved; metrics written to {}",
        metrics.len(),
        args.csv.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_bench_report(args: BenchReportArgs) -> CmdResult {
    let metrics = tamp::metrics_from_csv(&std::fs::read_to_string(&args.csv)?)?;
    print!("{}", tampkit::bench::report_table(&metrics));
    Ok(ExitCode::SUCCESS)
}
