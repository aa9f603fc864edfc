mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use stlstar::experiments::{self, BenchMode};
use stlstar::{
    monitor, monitor_baseline, oracle_sat, parse, robustness_with_range, Formula, FreezeEnv,
    GenKind, GenSpec, MonitorOptions, RangeMode, RobustnessMode, Trace,
};

use report::{digest, RunReport};

#[derive(Parser)]
#[command(
    name = "stlstar",
    version,
    about = "Offline monitoring of STL* formulas over sampled traces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether a trace satisfies a formula (exit 0 if so, 1 if not).
    Monitor(MonitorArgs),
    /// Estimate the robustness of a formula on a trace.
    Robustness(RobustnessArgs),
    /// Time the benchmark formulas on generated traces.
    Bench(BenchArgs),
    /// Write a generated trace as CSV.
    Gen(GenArgs),
}

#[derive(Args)]
struct Inputs {
    /// File holding the formula.
    #[arg(long)]
    formula: PathBuf,
    /// CSV trace with header `time,s1,...,sD`.
    #[arg(long)]
    trace: PathBuf,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum MonitorMode {
    Interval,
    Baseline,
    Oracle,
}

#[derive(Args)]
struct MonitorArgs {
    #[command(flatten)]
    inputs: Inputs,
    #[arg(long, value_enum, default_value = "interval")]
    mode: MonitorMode,
    /// Stop the outermost G/F loop at the first decisive instantiation.
    #[arg(long)]
    early_stop: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum RobustMode {
    /// Binary search with the interval monitor.
    Interval,
    /// Direct computation by the pointwise baseline.
    Baseline,
    /// Binary search with the pointwise baseline monitor.
    BaselineSearch,
}

#[derive(Clone, Copy, ValueEnum)]
enum RangeArg {
    Exact,
    PerVariable,
}

#[derive(Args)]
struct RobustnessArgs {
    #[command(flatten)]
    inputs: Inputs,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, value_enum, default_value = "interval")]
    mode: RobustMode,
    /// How frozen values are bounded in the initial range.
    #[arg(long, value_enum, default_value = "exact")]
    range: RangeArg,
}

#[derive(Args)]
struct TraceShape {
    /// Uniform noise amplitude added to the first signal.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// Draw sampling times at random instead of a fixed rate.
    #[arg(long)]
    nonuniform: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "500,1000")]
    sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "interval,baseline")]
    modes: Vec<BenchModeArg>,
    #[arg(long, value_delimiter = ',', default_value = "phi1,phi2,phi3,phi4")]
    formulas: Vec<String>,
    #[arg(long, default_value_t = 1)]
    reps: usize,
    #[arg(long)]
    early_stop: bool,
    #[command(flatten)]
    shape: TraceShape,
    /// Print rows as JSON lines.
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum BenchModeArg {
    Interval,
    Baseline,
}

#[derive(Args)]
struct GenArgs {
    /// pulse, drifting-pulse, stairs, stabilize or crossing.
    #[arg(long)]
    kind: GenKind,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[command(flatten)]
    shape: TraceShape,
    /// Produce the variant that violates the matching benchmark formula.
    #[arg(long)]
    violating: bool,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Monitor(a) => cmd_monitor(a),
        Command::Robustness(a) => cmd_robustness(a),
        Command::Bench(a) => cmd_bench(a).map(|_| ExitCode::SUCCESS),
        Command::Gen(a) => cmd_gen(a).map(|_| ExitCode::SUCCESS),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

struct Loaded {
    formula: Formula,
    trace: Trace,
    formula_sha256: String,
    trace_sha256: String,
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).with_context(|| format!("reading {}", path.display()))
}

fn load(inputs: &Inputs) -> Result<Loaded> {
    let fbytes = read(&inputs.formula)?;
    let tbytes = read(&inputs.trace)?;
    let src = String::from_utf8(fbytes.clone()).context("formula file is not UTF-8")?;
    let formula = parse(&src).with_context(|| format!("parsing {}", inputs.formula.display()))?;
    let trace = Trace::read_csv(tbytes.as_slice())
        .with_context(|| format!("loading {}", inputs.trace.display()))?;
    Ok(Loaded {
        formula,
        trace,
        formula_sha256: digest(&fbytes),
        trace_sha256: digest(&tbytes),
    })
}

fn base_report(command: &'static str, mode: &str, l: &Loaded) -> RunReport {
    RunReport {
        command,
        mode: mode.to_string(),
        trace_len: l.trace.len(),
        trace_dims: l.trace.dims(),
        formula_sha256: l.formula_sha256.clone(),
        trace_sha256: l.trace_sha256.clone(),
        ..RunReport::default()
    }
}

fn cmd_monitor(a: MonitorArgs) -> Result<ExitCode> {
    let l = load(&a.inputs)?;
    let mode = match a.mode {
        MonitorMode::Interval => "interval",
        MonitorMode::Baseline => "baseline",
        MonitorMode::Oracle => "oracle",
    };
    let mut r = base_report("monitor", mode, &l);
    let start = Instant::now();
    let satisfied = match a.mode {
        MonitorMode::Interval => {
            let v = monitor(
                &l.formula,
                &l.trace,
                MonitorOptions {
                    early_stop: a.early_stop,
                },
            )?;
            r.early_stop = Some(a.early_stop);
            r.subupdates = Some(v.stats.subupdates);
            r.instantiations = Some(v.stats.scope_iterations);
            r.outer_iterations = Some(v.stats.outer_iterations);
            r.max_intvl = Some(v.stats.max_intvl_overall());
            r.max_intvl_per_node = Some(v.stats.max_intvl.clone());
            v.satisfied
        }
        MonitorMode::Baseline => monitor_baseline(&l.formula, &l.trace)?,
        MonitorMode::Oracle => oracle_sat(
            &l.formula,
            &l.trace,
            0,
            &FreezeEnv::zero(&l.formula, &l.trace),
        )?,
    };
    r.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    r.verdict = Some(if satisfied { "satisfied" } else { "violated" });
    println!("{}", r.render(a.inputs.json));
    Ok(if satisfied {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_robustness(a: RobustnessArgs) -> Result<ExitCode> {
    let l = load(&a.inputs)?;
    let (mode, name) = match a.mode {
        RobustMode::Interval => (RobustnessMode::Interval, "interval"),
        RobustMode::Baseline => (RobustnessMode::Baseline, "baseline"),
        RobustMode::BaselineSearch => (RobustnessMode::BaselineSearch, "baseline-search"),
    };
    let range = match a.range {
        RangeArg::Exact => RangeMode::Exact,
        RangeArg::PerVariable => RangeMode::PerVariable,
    };
    let mut r = base_report("robustness", name, &l);
    let start = Instant::now();
    let e = robustness_with_range(&l.formula, &l.trace, a.epsilon, mode, range)?;
    r.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    r.estimate = Some(e.estimate);
    r.lo = Some(e.lo);
    r.hi = Some(e.hi);
    r.epsilon = Some(e.epsilon);
    r.initial_lo = Some(e.initial.lo);
    r.initial_hi = Some(e.initial.hi);
    r.initial_width = Some(e.initial.width());
    r.n_calls = Some(e.n_calls);
    println!("{}", r.render(a.inputs.json));
    Ok(ExitCode::SUCCESS)
}

fn cmd_bench(a: BenchArgs) -> Result<()> {
    let suite = experiments::suite();
    let chosen: Vec<_> = a
        .formulas
        .iter()
        .map(|name| {
            suite
                .iter()
                .find(|e| e.name == name)
                .with_context(|| format!("unknown benchmark formula '{name}'"))
        })
        .collect::<Result<_>>()?;
    if a.reps == 0 {
        bail!("--reps must be at least 1");
    }
    if !a.json {
        println!(
            "{:<6} {:>6} {:<10} {:<9} {:>10} {:>10} {:>7} {:<9}",
            "phi", "n", "trace", "mode", "median_s", "min_s", "|intvl|", "verdict"
        );
    }
    for exp in chosen {
        for &n in &a.sizes {
            for violating in [false, true] {
                for &m in &a.modes {
                    let mode = match m {
                        BenchModeArg::Interval => BenchMode::Interval,
                        BenchModeArg::Baseline => BenchMode::Baseline,
                    };
                    let spec = GenSpec {
                        noise: a.shape.noise,
                        nonuniform: a.shape.nonuniform,
                        seed: a.shape.seed,
                        violating,
                        ..GenSpec::new(exp.kind, n)
                    };
                    let rows = (0..a.reps)
                        .map(|_| experiments::run_case(exp, &spec, mode, a.early_stop))
                        .collect::<stlstar::Result<Vec<_>>>()?;
                    let mut secs: Vec<f64> = rows.iter().map(|r| r.seconds).collect();
                    secs.sort_by(f64::total_cmp);
                    let row = &rows[0];
                    let trace = if violating { "violating" } else { "satisfying" };
                    let mode = match mode {
                        BenchMode::Interval => "interval",
                        BenchMode::Baseline => "baseline",
                    };
                    let verdict = if row.satisfied {
                        "satisfied"
                    } else {
                        "violated"
                    };
                    if a.json {
                        println!(
                            "{}",
                            serde_json::json!({
                                "formula": exp.name, "n": n, "trace": trace, "mode": mode,
                                "early_stop": a.early_stop, "nonuniform": a.shape.nonuniform,
                                "median_s": secs[secs.len() / 2], "min_s": secs[0],
                                "max_intvl": row.max_intvl, "subupdates": row.subupdates,
                                "instantiations": row.instantiations, "verdict": verdict,
                            })
                        );
                    } else {
                        println!(
                            "{:<6} {:>6} {:<10} {:<9} {:>10.4} {:>10.4} {:>7} {:<9}",
                            exp.name,
                            n,
                            trace,
                            mode,
                            secs[secs.len() / 2],
                            secs[0],
                            row.max_intvl,
                            verdict
                        );
                    }
                }
            }
        }
    }
    Ok(())
}

fn cmd_gen(a: GenArgs) -> Result<()> {
    let spec = GenSpec {
        noise: a.shape.noise,
        nonuniform: a.shape.nonuniform,
        seed: a.shape.seed,
        violating: a.violating,
        ..GenSpec::new(a.kind, a.n)
    };
    let trace = Trace::generate(&spec)?;
    trace
        .save_csv(&a.out)
        .with_context(|| format!("writing {}", a.out.display()))?;
    Ok(())
}
