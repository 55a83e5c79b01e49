use std::collections::BTreeMap;
use std::fs::File;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::LevelFilter;

use frugal_core::bbh::{
    count_publications, institution_indicators, preselect_candidates, refine_preselection, substantial,
    write_indicator_csv, FieldYearDistribution, RefineRule,
};
use frugal_core::envmodel::{
    load_environment, load_institutions, load_papers, load_researchers, save_environment, simulate_bibliometric_world,
    simulate_environment, SimSpec,
};
use frugal_core::fftbuild::{build_fft, CostRatio, ExitPolicy, FastFrugalTree, OrderingRule};
use frugal_core::harness::{cross_validate, emit_report, CrossValidateOptions, EnvSource, ReportFormat, StrategySpec, Task};
use frugal_core::toolbox::fft_classify;

/// Fast-and-frugal heuristics, trees and bibliometric rules.
#[derive(Parser)]
#[command(name = "frugal", version)]
struct Cli {
    /// Master seed; falls back to FRUGAL_SEED.
    #[arg(long, global = true, env = "FRUGAL_SEED")]
    seed: Option<u64>,
    /// Only report errors.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a synthetic environment from a JSON SimSpec.
    Simulate {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "criterion")]
        criterion: String,
    },
    /// Cross-validate strategies on a fixed or simulated environment.
    Bench(BenchArgs),
    #[command(subcommand)]
    Fft(FftCommand),
    #[command(subcommand)]
    Bbh(BbhCommand),
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["env", "spec"]))]
struct BenchArgs {
    #[arg(long)]
    env: Option<PathBuf>,
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, default_value = "criterion")]
    criterion: String,
    /// JSON list of strategy specs.
    #[arg(long)]
    strategies: PathBuf,
    #[arg(long, default_value_t = 100)]
    reps: usize,
    #[arg(long, default_value_t = 0.5)]
    train_frac: f64,
    #[arg(long, value_enum, default_value_t = TaskArg::Classification)]
    task: TaskArg,
    /// Record wall time per strategy (makes the report irreproducible).
    #[arg(long)]
    timing: bool,
    /// Report path; `.json` selects JSON, anything else CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum TaskArg {
    Classification,
    Paired,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderingArg {
    Validity,
    Maxpv,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExitArg {
    Zigzag,
    Max,
}

#[derive(Subcommand)]
enum FftCommand {
    /// Build a tree from a training environment.
    Build {
        #[arg(long)]
        train: PathBuf,
        #[arg(long, default_value = "criterion")]
        criterion: String,
        #[arg(long, value_enum, default_value_t = OrderingArg::Validity)]
        ordering: OrderingArg,
        #[arg(long, value_enum, default_value_t = ExitArg::Zigzag)]
        exit: ExitArg,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long, default_value_t = 1.0)]
        cost_fn: f64,
        #[arg(long, default_value_t = 1.0)]
        cost_fp: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Classify cases (an `id` column plus cue columns) with a saved tree.
    Classify {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        cases: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum BbhCommand {
    /// Write a simulated bibliometric world as three CSV files.
    World {
        #[arg(long, default_value_t = 500)]
        researchers: usize,
        #[arg(long, default_value_t = 10)]
        institutions: usize,
        #[arg(long, default_value_t = 2)]
        fields: usize,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Institutional top-decile verdicts as `unit_id,indicator,value` rows.
    Assess {
        #[arg(long)]
        papers: PathBuf,
        #[arg(long)]
        institutions: PathBuf,
        #[arg(long, default_value_t = 0.10)]
        top: f64,
        #[arg(long, default_value_t = 0.20)]
        x: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Shortlist by PhD-window publication counts.
    Preselect {
        #[arg(long)]
        researchers: PathBuf,
        #[arg(long)]
        papers: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        min_citations: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .filter_level(if cli.quiet { LevelFilter::Error } else { LevelFilter::Warn })
        .parse_default_env()
        .init();
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    serde_json::from_reader(file).with_context(|| format!("parsing {}", path.display()))
}

fn run(cli: Cli) -> Result<()> {
    let say = |msg: String| {
        if !cli.quiet {
            eprintln!("{msg}");
        }
    };
    match cli.command {
        Command::Simulate { spec, out, criterion } => {
            let mut spec: SimSpec = read_json(&spec)?;
            if let Some(seed) = cli.seed {
                spec.seed = seed;
            }
            let env = simulate_environment(&spec)?;
            save_environment(&env, &out, &criterion)?;
            say(format!("wrote {} objects x {} cues to {}", env.n_objects(), env.n_cues(), out.display()));
        }
        Command::Bench(args) => {
            let source = match (&args.env, &args.spec) {
                (Some(path), _) => EnvSource::Fixed(load_environment(path, &args.criterion)?),
                (None, Some(path)) => EnvSource::Simulated(read_json(path)?),
                (None, None) => unreachable!("clap requires a source"),
            };
            let strategies: Vec<StrategySpec> = read_json(&args.strategies)?;
            let task = match args.task {
                TaskArg::Classification => Task::Classification,
                TaskArg::Paired => Task::PairedComparison,
            };
            let mut opts = CrossValidateOptions::new(args.reps, args.train_frac, cli.seed.unwrap_or(0), task);
            opts.timing = args.timing;
            let report = cross_validate(&source, &strategies, &opts)?;
            emit_report(&report, ReportFormat::from_path(&args.out), &args.out)?;
            for s in &report.strategies {
                if !s.failures.is_empty() {
                    log::warn!("{}: {} of {} replications failed: {}", s.strategy, s.failures.len(), args.reps, s.failures[0].error);
                }
            }
            say(format!("wrote report for {} strategies to {}", strategies.len(), args.out.display()));
        }
        Command::Fft(FftCommand::Build { train, criterion, ordering, exit, depth, cost_fn, cost_fp, out }) => {
            let env = load_environment(&train, &criterion)?;
            let ordering = match ordering {
                OrderingArg::Validity => OrderingRule::ByValidity,
                OrderingArg::Maxpv => OrderingRule::ByMaxPredictiveValue,
            };
            let exit = match exit {
                ExitArg::Zigzag => ExitPolicy::Zigzag,
                ExitArg::Max => ExitPolicy::MaxSide,
            };
            let tree = build_fft(&env, ordering, exit, depth, CostRatio::new(cost_fn, cost_fp)?)?;
            std::fs::write(&out, tree.to_text()).with_context(|| format!("writing {}", out.display()))?;
            say(format!("wrote depth-{} tree to {}", tree.depth(), out.display()));
        }
        Command::Fft(FftCommand::Classify { tree, cases, out }) => {
            let text = std::fs::read_to_string(&tree).with_context(|| format!("reading {}", tree.display()))?;
            let tree: FastFrugalTree = text.parse()?;
            classify_cases(&tree, &cases, &out)?;
            say(format!("wrote labels to {}", out.display()));
        }
        Command::Bbh(BbhCommand::World { researchers, institutions, fields, out_dir }) => {
            let world = simulate_bibliometric_world(researchers, institutions, fields, cli.seed.unwrap_or(0))?;
            std::fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
            world.write_csv(&out_dir)?;
            say(format!("wrote {} papers to {}", world.papers.len(), out_dir.display()));
        }
        Command::Bbh(BbhCommand::Assess { papers, institutions, top, x, out }) => {
            let papers = load_papers(&papers)?;
            let institutions = load_institutions(&institutions, &papers)?;
            let dist = FieldYearDistribution::from_papers(papers.iter().map(|a| &a.paper));
            let mut rows = Vec::new();
            for inst in institutions.iter().filter(|i| !i.papers.is_empty()) {
                rows.push((inst.id.as_str(), institution_indicators(inst, &dist, x, top)?));
            }
            let file = File::create(&out).with_context(|| format!("creating {}", out.display()))?;
            write_indicator_csv(file, rows.iter().flat_map(|(id, inds)| inds.iter().map(move |i| (*id, i))))?;
            say(format!("assessed {} institutions", rows.len()));
        }
        Command::Bbh(BbhCommand::Preselect { researchers, papers, k, min_citations, out }) => {
            let papers = load_papers(&papers)?;
            let researchers = load_researchers(&researchers, &papers)?;
            let dist = FieldYearDistribution::from_papers(papers.iter().map(|a| &a.paper));
            let mut shortlist = preselect_candidates(&researchers, k)?;
            if let Some(threshold) = min_citations {
                let pre: Vec<_> = researchers.iter().filter(|r| shortlist.contains(&r.id)).cloned().collect();
                shortlist = refine_preselection(&pre, &dist, RefineRule::MinCitations(threshold))?;
            }
            let mut wtr = csv::Writer::from_path(&out).with_context(|| format!("creating {}", out.display()))?;
            wtr.write_record(["researcher_id", "phd_publications", "total_citations"])?;
            for r in researchers.iter().filter(|r| shortlist.contains(&r.id)) {
                let phd = count_publications(r, Some((r.phd_start, r.phd_end)), &substantial())?;
                let cites: u64 = r.papers.iter().map(|p| p.citations).sum();
                wtr.write_record([r.id.clone(), phd.to_string(), cites.to_string()])?;
            }
            wtr.flush()?;
            say(format!("shortlisted {} of {} researchers", shortlist.len(), researchers.len()));
        }
    }
    Ok(())
}

/// Reads `id,<cue>,...` rows, binds the tree to the header and writes
/// `id,label,exit_depth`.
fn classify_cases(tree: &FastFrugalTree, cases: &Path, out: &Path) -> Result<()> {
    let mut rdr = csv::Reader::from_path(cases).with_context(|| format!("opening {}", cases.display()))?;
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.first().map(String::as_str) != Some("id") {
        bail!("{}: first column must be `id`", cases.display());
    }
    let names = header[1..].to_vec();
    let bound = tree.bind(&names)?;
    let used: BTreeMap<usize, &str> = (0..names.len())
        .filter(|&k| bound.nodes().iter().map(|n| &n.condition).chain([&bound.final_node().condition]).any(|c| c.cues.contains(&k)))
        .map(|k| (k, names[k].as_str()))
        .collect();
    let mut wtr = csv::Writer::from_path(out).with_context(|| format!("creating {}", out.display()))?;
    wtr.write_record(["id", "label", "exit_depth"])?;
    for (line, record) in rdr.records().enumerate() {
        let record = record?;
        let mut values = vec![0.0; names.len()];
        for (&k, &name) in &used {
            let cell = record.get(k + 1).unwrap_or("");
            values[k] = cell
                .trim()
                .parse()
                .with_context(|| format!("{} row {}, column `{name}`: `{cell}` is not a number", cases.display(), line + 2))?;
        }
        let outcome = fft_classify(&bound, &values)?;
        wtr.write_record([record.get(0).unwrap_or(""), &outcome.label.to_string(), &outcome.exit_depth.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}
