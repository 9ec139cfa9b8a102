use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use sffcc::chronology::{
    check_timing, convert_benchmarks, count_resources, optical_depth, tau_bounds, Thresholds,
    TimingParams,
};
use sffcc::config::{parse_values, ExperimentConfig, Grid};
use sffcc::decoder::{DecoderConfig, MatcherKind};
use sffcc::fusion::{EmissionSchedule, ReinitBudget, RusPolicy};
use sffcc::montecarlo::{point_seed, run_clock, sweep_n, NSweep, SweepRow};
use sffcc::noise::{Channel, NoiseParams};
use sffcc::report::{Manifest, OutputDir, OUT_DIR_ENV};
use sffcc::{dephasing, oracle, Error, LatticeSpec, SyndromeGraph};

#[derive(Parser)]
#[command(name = "sffcc", version, about = "Fusion-based colour-code simulations with quantum-dot emitters")]
struct Cli {
    /// Worker threads for trial ensembles; defaults to the available parallelism.
    #[arg(long, global = true, env = "SFFCC_WORKERS")]
    workers: Option<usize>,
    /// Directory for CSV, JSON and manifest files.
    #[arg(long, global = true, env = OUT_DIR_ENV, default_value = "out")]
    out_dir: PathBuf,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Failure-rate curves and the threshold crossing for one attempt budget.
    Threshold(SweepArgs),
    /// Thresholds as a function of the attempt budget N.
    SweepN(SweepArgs),
    /// Logical clock-cycle statistics.
    Clock(ClockArgs),
    /// Component counts for a distance-L patch.
    CountResources(ResourceArgs),
    /// Evaluates the hardware timing constraints.
    CheckTiming(TimingArgs),
    /// Converts channel thresholds into hardware benchmarks.
    Benchmarks(BenchmarkArgs),
    /// Stochastic vs analytic dephasing infidelity of encoded cluster states.
    Dephasing(DephasingArgs),
    /// Writes the lattice, checks and logical surfaces as JSON.
    DumpLattice(DumpArgs),
    /// State-vector checks of the Pauli-frame rules.
    #[command(subcommand)]
    Oracle(OracleCmd),
}

#[derive(Clone, Copy, ValueEnum)]
enum Schedule {
    FullBlock,
    OnDemand,
}

impl From<Schedule> for EmissionSchedule {
    fn from(s: Schedule) -> Self {
        match s {
            Schedule::FullBlock => EmissionSchedule::FullBlock,
            Schedule::OnDemand => EmissionSchedule::OnDemand,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Matcher {
    Mwpm,
    UnionFind,
}

#[derive(Args)]
struct SweepArgs {
    /// TOML experiment config; flags given below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    channel: Option<Channel>,
    /// Code distances, comma separated.
    #[arg(long = "L", value_delimiter = ',')]
    l: Vec<usize>,
    /// Attempt budgets, comma separated.
    #[arg(long = "N", value_delimiter = ',')]
    n: Vec<u32>,
    /// `start:stop:step` or a comma-separated list.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    bootstrap: Option<usize>,
    /// `p_a + p_d` for blinking sweeps.
    #[arg(long)]
    blink_sum: Option<f64>,
    #[arg(long, value_enum)]
    schedule: Option<Schedule>,
    #[arg(long, value_enum)]
    matcher: Option<Matcher>,
    /// Clear spin frames after a ZZ-only readout.
    #[arg(long)]
    reinit: bool,
    /// With --reinit, restart the encoded fusion once within the remaining budget.
    #[arg(long)]
    reattempt: bool,
    /// Background uniform photon loss held fixed during the sweep.
    #[arg(long)]
    loss: Option<f64>,
}

impl SweepArgs {
    fn config(&self) -> sffcc::Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig {
                channel: self.channel.ok_or_else(|| Error::Config("--channel or --config is required".into()))?,
                distances: vec![3, 5],
                attempts: vec![8],
                grid: Grid::List(Vec::new()),
                trials: 1000,
                seed: 0,
                bootstrap: 200,
                blink_sum: 1.0,
                policy: RusPolicy::default(),
                noise: NoiseParams::default(),
                decoder: DecoderConfig::default(),
            },
        };
        if let Some(c) = self.channel {
            cfg.channel = c;
        }
        if !self.l.is_empty() {
            cfg.distances = self.l.clone();
        }
        if !self.n.is_empty() {
            cfg.attempts = self.n.clone();
        }
        if let Some(g) = &self.grid {
            cfg.grid = if g.contains(':') { Grid::Range(g.clone()) } else { Grid::List(parse_values(g)?) };
        }
        if let Some(t) = self.trials {
            cfg.trials = t;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(b) = self.bootstrap {
            cfg.bootstrap = b;
        }
        if let Some(s) = self.blink_sum {
            cfg.blink_sum = s;
        }
        if let Some(s) = self.schedule {
            cfg.policy.schedule = s.into();
        }
        if let Some(m) = self.matcher {
            cfg.decoder.matcher = match m {
                Matcher::Mwpm => MatcherKind::Mwpm,
                Matcher::UnionFind => MatcherKind::UnionFind,
            };
        }
        if self.reinit {
            cfg.policy.reinit_after_zz_only = true;
            cfg.policy.reattempt_after_reinit = self.reattempt;
            cfg.policy.reinit_budget = ReinitBudget::Shared;
        }
        if let Some(p) = self.loss {
            cfg.noise.p_loss = p;
        }
        if let Grid::List(v) = &cfg.grid {
            if v.is_empty() {
                return Err(Error::Config("--grid is required".into()));
            }
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct ClockArgs {
    #[arg(long = "L", value_delimiter = ',', default_value = "3")]
    l: Vec<usize>,
    #[arg(long = "N", default_value_t = 8)]
    n: u32,
    /// Photon loss, a list or `start:stop:step`.
    #[arg(long, default_value = "0.08")]
    loss: String,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    tau_echo_ns: Option<f64>,
    /// The clock model idles finished emitters, so on-demand is the default.
    #[arg(long, value_enum, default_value = "on-demand")]
    schedule: Schedule,
}

#[derive(Args)]
struct ResourceArgs {
    #[arg(long = "L", value_delimiter = ',', default_value = "3")]
    l: Vec<u64>,
    /// Excitation-based feedback at the sources.
    #[arg(long)]
    ebf: bool,
}

#[derive(Args)]
struct TimingArgs {
    /// TOML file of durations in ns; defaults to the reference device.
    #[arg(long, conflicts_with = "consistent")]
    params: Option<PathBuf>,
    /// Use the constructed parameter set that satisfies every constraint.
    #[arg(long)]
    consistent: bool,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// TOML file of thresholds; defaults to the reported values.
    #[arg(long)]
    thresholds: Option<PathBuf>,
}

#[derive(Args)]
struct DephasingArgs {
    #[arg(long = "N", default_value_t = 8)]
    n: u32,
    /// Spin Z probabilities per emission round.
    #[arg(long, default_value = "0.001,0.005,0.01,0.03")]
    pz: String,
    /// Encoded-qubit counts, a list or `start:stop:step`.
    #[arg(long = "M", default_value = "1:8:1")]
    m: String,
    #[arg(long, default_value_t = 20000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct DumpArgs {
    #[arg(long = "L", default_value_t = 2)]
    l: usize,
}

#[derive(Subcommand)]
enum OracleCmd {
    /// Checks every single fault for all N, M up to the given bounds.
    VerifyRules {
        #[arg(long, default_value_t = 3)]
        max_n: usize,
        #[arg(long, default_value_t = 2)]
        max_m: usize,
    },
}

#[derive(Serialize)]
struct ThresholdRow {
    channel: Channel,
    n: u32,
    l_small: Option<usize>,
    l_big: Option<usize>,
    estimate: Option<f64>,
    std_err: Option<f64>,
    resample_hit_rate: Option<f64>,
}

fn threshold_rows(sweep: &NSweep) -> Vec<ThresholdRow> {
    sweep
        .points
        .iter()
        .map(|(n, t)| ThresholdRow {
            channel: sweep.channel,
            n: *n,
            l_small: t.as_ref().map(|t| t.l_small),
            l_big: t.as_ref().map(|t| t.l_big),
            estimate: t.as_ref().map(|t| t.estimate),
            std_err: t.as_ref().map(|t| t.std_err),
            resample_hit_rate: t.as_ref().map(|t| t.resample_hit_rate),
        })
        .collect()
}

#[derive(Serialize)]
struct ClockRow {
    l: usize,
    n: u32,
    loss: f64,
    trials: u64,
    mean_tau_echo: f64,
    sem_tau_echo: f64,
    max_tau_echo: u64,
    lower_bound: u64,
    upper_bound: u64,
    mean_tau_ns: Option<f64>,
}

#[derive(Serialize)]
struct DephasingRow {
    n: u32,
    p_z: f64,
    m: usize,
    analytic_infidelity: f64,
    stochastic_infidelity: f64,
    std_dev: f64,
    std_err: f64,
    deviation_sigma: f64,
}

#[derive(Serialize)]
struct RuleRow {
    n: usize,
    m: usize,
    kind: String,
    block: usize,
    round: usize,
    step: String,
    pred_x: u64,
    pred_z: u64,
    lost: String,
    verdict: String,
    passed: bool,
}

fn tag<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        Ok(serde_json::Value::Object(o)) => {
            o.get("verdict").and_then(|v| v.as_str()).unwrap_or_default().to_string()
        }
        Ok(other) => other.to_string(),
        Err(_) => String::new(),
    }
}

fn run(cli: Cli) -> sffcc::Result<bool> {
    let workers = cli.workers.unwrap_or_else(|| {
        std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
    });
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .map_err(|e| Error::Config(e.to_string()))?;
    let t0 = Instant::now();
    let mut out = OutputDir::create(&cli.out_dir)?;
    let (stem, mut manifest, ok) = match cli.cmd {
        Cmd::Threshold(a) => sweep_cmd("threshold", &a, &mut out, workers)?,
        Cmd::SweepN(a) => sweep_cmd("sweep_n", &a, &mut out, workers)?,
        Cmd::Clock(a) => {
            let losses = parse_values(&a.loss)?;
            let mut rows = Vec::new();
            for &l in &a.l {
                let spec = LatticeSpec::new(l)?;
                let policy = RusPolicy { n: a.n, schedule: a.schedule.into(), ..RusPolicy::default() };
                let (lo, hi) = tau_bounds(l as u64, a.n as u64);
                for &p in &losses {
                    let noise = NoiseParams { p_loss: p, ..NoiseParams::default() };
                    let seed = point_seed(a.seed, &[l as u64, a.n as u64, p.to_bits()]);
                    let t = run_clock(&spec, &policy, &noise, a.trials, seed)?;
                    rows.push(ClockRow {
                        l,
                        n: a.n,
                        loss: p,
                        trials: t.trials,
                        mean_tau_echo: t.mean_tau(),
                        sem_tau_echo: t.tau_sem(),
                        max_tau_echo: t.tau_max,
                        lower_bound: lo,
                        upper_bound: hi,
                        mean_tau_ns: a.tau_echo_ns.map(|ns| ns * t.mean_tau()),
                    });
                }
            }
            for r in &rows {
                println!(
                    "L={} N={} loss={} mean tau_logical = {:.2} +- {:.2} tau_echo (max {}, bound {}){}",
                    r.l,
                    r.n,
                    r.loss,
                    r.mean_tau_echo,
                    r.sem_tau_echo,
                    r.max_tau_echo,
                    r.upper_bound,
                    r.mean_tau_ns.map(|ns| format!(", {:.0} ns", ns)).unwrap_or_default()
                );
            }
            out.csv("clock.csv", &rows)?;
            let mut m = Manifest::new("clock", workers);
            m.seed = Some(a.seed);
            ("clock", m, true)
        }
        Cmd::CountResources(a) => {
            let rows = a.l.iter().map(|&l| count_resources(l, a.ebf)).collect::<sffcc::Result<Vec<_>>>()?;
            let depth = optical_depth(a.ebf);
            println!("{}", serde_json::to_string_pretty(&serde_json::json!({ "counts": rows, "optical_depth": depth }))?);
            out.csv("resources.csv", &rows)?;
            out.json("optical_depth.json", &depth)?;
            ("resources", Manifest::new("count-resources", workers), true)
        }
        Cmd::CheckTiming(a) => {
            let p = match (&a.params, a.consistent) {
                (Some(path), _) => toml::from_str::<TimingParams>(&std::fs::read_to_string(path)?)
                    .map_err(|e| Error::Config(e.to_string()))?,
                (None, true) => TimingParams::consistent(),
                (None, false) => TimingParams::reference(),
            };
            p.validate()?;
            let checks = check_timing(&p);
            let all = checks.iter().all(|c| c.satisfied);
            for c in &checks {
                println!("{:<12} {:<45} {:<5} margin {:+.2} ns", c.id, c.constraint, c.satisfied, c.margin);
            }
            println!("consistent: {all}");
            out.csv("timing.csv", &checks)?;
            out.json("timing_params.json", &p)?;
            let mut m = Manifest::new("check-timing", workers);
            m.summary = serde_json::json!({ "consistent": all });
            ("timing", m, true)
        }
        Cmd::Benchmarks(a) => {
            let t = match &a.thresholds {
                Some(path) => toml::from_str::<Thresholds>(&std::fs::read_to_string(path)?)
                    .map_err(|e| Error::Config(e.to_string()))?,
                None => Thresholds::reported(),
            };
            let rows = convert_benchmarks(&t)?;
            for r in &rows {
                println!("{:<17} {:>9.5} -> {}", r.quantity, r.threshold, r.requirement);
            }
            out.csv("benchmarks.csv", &rows)?;
            ("benchmarks", Manifest::new("benchmarks", workers), true)
        }
        Cmd::Dephasing(a) => {
            let ms: Vec<usize> = parse_values(&a.m)?
                .into_iter()
                .map(|v| {
                    if v >= 1.0 && v.fract() == 0.0 {
                        Ok(v as usize)
                    } else {
                        Err(Error::Config(format!("M must be a positive integer, got {v}")))
                    }
                })
                .collect::<sffcc::Result<_>>()?;
            let mut rows = Vec::new();
            for p in parse_values(&a.pz)? {
                for pt in dephasing::stochastic_infidelity(p, a.n, &ms, a.trials, a.seed)? {
                    rows.push(DephasingRow {
                        n: a.n,
                        p_z: p,
                        m: pt.m,
                        analytic_infidelity: pt.analytic_infidelity,
                        stochastic_infidelity: pt.stochastic_infidelity,
                        std_dev: pt.std_dev,
                        std_err: pt.std_err,
                        deviation_sigma: pt.deviation_sigma(),
                    });
                }
            }
            for r in &rows {
                println!(
                    "p_z={:<6} M={:<3} analytic {:.4}  stochastic {:.4} +- {:.4}",
                    r.p_z, r.m, r.analytic_infidelity, r.stochastic_infidelity, r.std_dev
                );
            }
            out.csv("dephasing.csv", &rows)?;
            let mut m = Manifest::new("dephasing", workers);
            m.seed = Some(a.seed);
            ("dephasing", m, true)
        }
        Cmd::DumpLattice(a) => {
            let g = SyndromeGraph::new(LatticeSpec::new(a.l)?);
            let p = out.json(&format!("lattice_L{}.json", a.l), &g.dump())?;
            println!("wrote {}", p.display());
            ("lattice", Manifest::new("dump-lattice", workers), true)
        }
        Cmd::Oracle(OracleCmd::VerifyRules { max_n, max_m }) => {
            let checks = oracle::verify_rules(max_n, max_m)?;
            let rows: Vec<RuleRow> = checks
                .iter()
                .map(|c| RuleRow {
                    n: c.n,
                    m: c.m,
                    kind: tag(&c.fault.kind),
                    block: c.fault.block,
                    round: c.fault.round,
                    step: tag(&c.fault.step),
                    pred_x: c.prediction.x,
                    pred_z: c.prediction.z,
                    lost: c.prediction.lost.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" "),
                    verdict: tag(&c.verdict),
                    passed: c.verdict.passed(),
                })
                .collect();
            let failed = rows.iter().filter(|r| !r.passed).count();
            for r in rows.iter().filter(|r| !r.passed) {
                println!("FAIL N={} M={} {} block {} round {} {}", r.n, r.m, r.kind, r.block, r.round, r.step);
            }
            println!("{} fault locations checked, {} failed", rows.len(), failed);
            out.csv("oracle_rules.csv", &rows)?;
            let mut m = Manifest::new("oracle verify-rules", workers);
            m.summary = serde_json::json!({ "checked": rows.len(), "failed": failed });
            ("oracle", m, failed == 0)
        }
    };
    manifest.elapsed_s = t0.elapsed().as_secs_f64();
    out.finish(stem, manifest)?;
    Ok(ok)
}

fn sweep_cmd(
    stem: &'static str,
    a: &SweepArgs,
    out: &mut OutputDir,
    workers: usize,
) -> sffcc::Result<(&'static str, Manifest, bool)> {
    let cfg = a.config()?;
    let plan = cfg.plan()?;
    let (rows, sweep): (Vec<SweepRow>, NSweep) = sweep_n(&plan)?;
    for r in &rows {
        println!(
            "N={} L={} x={} failures {}/{} rate {:.4} [{:.4}, {:.4}]",
            r.n, r.l, r.x, r.failures, r.trials, r.rate, r.ci_low, r.ci_high
        );
    }
    let trows = threshold_rows(&sweep);
    for t in &trows {
        match t.estimate {
            Some(e) => println!("N={} threshold {:.5} +- {:.5}", t.n, e, t.std_err.unwrap_or(0.0)),
            None => println!("N={} no crossing inside the grid", t.n),
        }
    }
    out.csv(&format!("{stem}.csv"), &rows)?;
    out.csv(&format!("{stem}_thresholds.csv"), &trows)?;
    out.text(&format!("{stem}.config.toml"), &cfg.normalised()?.to_toml()?)?;
    let mut m = Manifest::new(stem, workers);
    m.config_hash = Some(cfg.hash()?);
    m.seed = Some(cfg.seed);
    m.summary = serde_json::to_value(&sweep)?;
    Ok((stem, m, true))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
