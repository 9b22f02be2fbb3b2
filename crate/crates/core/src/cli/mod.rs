//! Batch front-end: `impatience <command> --config FILE [--seed N] [--out DIR] [--threads N]`.
//!
//! Every command writes a JSON report (and CSV tables where useful) into the
//! output directory. Each file carries the SHA-256 of the effective
//! configuration and the seed, and the same configuration always produces
//! byte-identical files regardless of the thread count.
//!
//! Exit codes: 0 pass, 1 check failed, 2 bad configuration or arguments,
//! 3 resource cap exceeded.

pub mod config;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::coupling::{
    cftp, detect_renovation, h_set_profile, verify_coalescence, CoalescenceSummary,
};
use crate::error::{Error, Result};
use crate::loynes::estimate_conditions;
use crate::metrics::{bound_report, loss_probability, Estimate};
use crate::oracle_des::{cross_validate, run, write_trace_csv, ArrivalRecord, CrossValidation};
use crate::scalar::Scalar;
use crate::sequences::StationaryPath;

pub use config::ExperimentConfig;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_BAD_CONFIG: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "impatience",
    version,
    about = "Stationary FCFS multi-server queue with impatient customers"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the seed of the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = "results")]
    pub out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Cross-validate the event simulation against the workload recursion.
    Validate,
    /// Estimate the loss-probability sandwich bounds.
    Bounds,
    /// Perfect sample of the stationary workload vector.
    Cftp,
    /// Detect renovation indices and re-check coalescence at each.
    Renovate,
    /// Lattice H-set sizes versus depth.
    Hset,
    /// Plain event simulation with a loss estimate.
    Simulate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Bounds => "bounds",
            Command::Cftp => "cftp",
            Command::Renovate => "renovate",
            Command::Hset => "hset",
            Command::Simulate => "simulate",
        }
    }
}

/// Result of one command: whether its checks passed and a one-line summary.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub passed: bool,
    pub summary: String,
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Argument(_) | Error::Contract(_) => EXIT_BAD_CONFIG,
            Error::Resource { .. } => EXIT_RESOURCE,
            Error::Check(_) => EXIT_CHECK_FAILED,
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_BAD_CONFIG
            } else {
                EXIT_PASS
            };
            let _ = e.print();
            return code;
        }
    };
    let result = load_config(&cli).and_then(|cfg| {
        let work = || execute(cli.command, &cfg, &cli.out);
        match cli.threads {
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Argument(format!("thread pool: {e}")))?
                .install(work),
            None => work(),
        }
    });
    match result {
        Ok(outcome) => {
            println!("{}: {}", cli.command.name(), outcome.summary);
            if outcome.passed {
                EXIT_PASS
            } else {
                eprintln!("{}: check failed", cli.command.name());
                EXIT_CHECK_FAILED
            }
        }
        Err(e) => {
            eprintln!("{}: {e}", cli.command.name());
            e.exit_code()
        }
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Argument("--threads must be at least 1".into()));
        }
    }
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("--config is required".into()))?;
    let text =
        fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let mut cfg = ExperimentConfig::parse(&text)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

/// Runs `command` on an already parsed configuration, writing into `out`.
pub fn execute(command: Command, cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    cfg.validate()?;
    let writer = Output::new(out, cfg)?;
    match command {
        Command::Validate => cmd_validate(cfg, &writer),
        Command::Bounds => cmd_bounds(cfg, &writer),
        Command::Cftp => cmd_cftp(cfg, &writer),
        Command::Renovate => cmd_renovate(cfg, &writer),
        Command::Hset => cmd_hset(cfg, &writer),
        Command::Simulate => cmd_simulate(cfg, &writer),
    }
}

struct Output<'a> {
    dir: &'a Path,
    hash: String,
    seed: u64,
}

#[derive(Serialize)]
struct Envelope<'a, R: Serialize> {
    command: &'a str,
    config_hash: &'a str,
    seed: u64,
    report: &'a R,
}

impl<'a> Output<'a> {
    fn new(dir: &'a Path, cfg: &ExperimentConfig) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
        Ok(Self {
            dir,
            hash: cfg.hash(),
            seed: cfg.seed,
        })
    }

    fn json<R: Serialize>(&self, command: Command, report: &R) -> Result<()> {
        let env = Envelope {
            command: command.name(),
            config_hash: &self.hash,
            seed: self.seed,
            report,
        };
        let mut text = serde_json::to_string_pretty(&env)
            .map_err(|e| Error::Check(format!("serialize report: {e}")))?;
        text.push('\n');
        self.write(&format!("{}.json", command.name()), text.as_bytes())
    }

    fn csv(&self, name: &str, body: &[u8]) -> Result<()> {
        let mut bytes = format!("# config_hash={} seed={}\n", self.hash, self.seed).into_bytes();
        bytes.extend_from_slice(body);
        self.write(name, &bytes)
    }

    fn write(&self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        let mut f = fs::File::create(&path).map_err(|e| io_error(&path, e))?;
        f.write_all(bytes).map_err(|e| io_error(&path, e))
    }

    fn trace<T: Scalar>(&self, trace: &[ArrivalRecord<T>]) -> Result<()> {
        let mut buf = Vec::new();
        write_trace_csv(trace, &mut buf).map_err(|e| io_error(self.dir, e))?;
        self.csv("trace.csv", &buf)
    }
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Config(format!("{}: {e}", path.display()))
}

fn path_of(cfg: &ExperimentConfig) -> Result<StationaryPath> {
    StationaryPath::new(cfg.sequence_spec())
}

#[derive(Serialize)]
struct ValidateReport {
    exact: bool,
    #[serde(flatten)]
    check: CrossValidation,
}

fn cmd_validate(cfg: &ExperimentConfig, out: &Output) -> Result<Outcome> {
    let p = &cfg.validate;
    let path = path_of(cfg)?;
    let exact = p.exact && cfg.sequence_spec().alpha().is_some();
    let check = if exact {
        let lattice = path.lattice()?;
        let (check, trace) = cross_validate(&lattice, cfg.servers, p.start, p.arrivals, 0.0)?;
        if p.trace {
            out.trace(&trace)?;
        }
        check
    } else {
        let (check, trace) = cross_validate(&path, cfg.servers, p.start, p.arrivals, p.tolerance)?;
        if p.trace {
            out.trace(&trace)?;
        }
        check
    };
    let summary = match &check.first_divergence {
        None => format!(
            "{} arrivals agree, max discrepancy {:e}{}",
            check.n_arrivals,
            check.max_discrepancy,
            if exact {
                " (exact lattice arithmetic)"
            } else {
                ""
            }
        ),
        Some(d) => format!(
            "divergence at index {}: simulated {:?} served={}, recursion {:?} served={}",
            d.index, d.simulated, d.simulated_served, d.recursion, d.recursion_served
        ),
    };
    let passed = check.passed;
    out.json(Command::Validate, &ValidateReport { exact, check })?;
    Ok(Outcome { passed, summary })
}

fn cmd_bounds(cfg: &ExperimentConfig, out: &Output) -> Result<Outcome> {
    let path = path_of(cfg)?;
    let p = &cfg.bounds;
    let (report, samples) = bound_report(
        &path,
        cfg.servers,
        p.start,
        p.samples,
        &cfg.loynes,
        &cfg.cftp.options(),
    )?;
    let conditions = estimate_conditions(&path, cfg.servers, p.start, p.samples, &cfg.loynes)?;

    #[derive(Serialize)]
    struct Full<'a> {
        bounds: &'a crate::metrics::BoundReport,
        conditions: &'a crate::loynes::ConditionReport,
    }
    out.json(
        Command::Bounds,
        &Full {
            bounds: &report,
            conditions: &conditions,
        },
    )?;

    let mut table = String::from("quantity,probability,half_width,n\n");
    for (name, e) in [
        ("p_lower", report.p_lower),
        ("p_loss", report.p_loss),
        ("p_upper", report.p_upper),
        ("p_z", report.p_z),
    ] {
        writeln!(table, "{name},{},{},{}", e.mean, e.half_width, e.n).expect("string write");
    }
    out.csv("bounds.csv", table.as_bytes())?;

    let s = cfg.servers;
    let mut rows = String::from("index");
    for prefix in ["lower", "w", "upper"] {
        for j in 1..=s {
            write!(rows, ",{prefix}{j}").expect("string write");
        }
    }
    rows.push_str(",z_s,patience\n");
    for b in &samples {
        write!(rows, "{}", b.index).expect("string write");
        for v in [&b.lower, &b.workload, &b.upper] {
            for x in v.as_slice() {
                write!(rows, ",{x}").expect("string write");
            }
        }
        writeln!(rows, ",{},{}", b.z_s, b.patience).expect("string write");
    }
    out.csv("bounds_samples.csv", rows.as_bytes())?;

    let mut summary = format!(
        "P(lower>D)={:.4} <= P_loss={:.4} <= P(upper>D)={:.4} <= P(Z_S>D)={:.4} over {} indices",
        report.p_lower.mean,
        report.p_loss.mean,
        report.p_upper.mean,
        report.p_z.mean,
        report.n_samples
    );
    if report.unstabilized + report.z_unstabilized > 0 {
        write!(
            summary,
            "; {} Loynes and {} Z estimates unstabilized",
            report.unstabilized, report.z_unstabilized
        )
        .expect("string write");
    }
    if !report.workload_coalesced {
        summary.push_str("; workload from warm-up, coupling did not coalesce");
    }
    Ok(Outcome {
        passed: report.ordered && report.pathwise_violations == 0,
        summary,
    })
}

fn cmd_cftp(cfg: &ExperimentConfig, out: &Output) -> Result<Outcome> {
    let path = path_of(cfg)?;
    let result = cftp(
        &path,
        cfg.cftp.at,
        cfg.servers,
        &cfg.cftp.options(),
        &cfg.loynes,
    )?;
    out.json(Command::Cftp, &result)?;
    let summary = match &result.value {
        Some(w) => format!(
            "coalesced at horizon {} to {:?}",
            result.horizon_used,
            w.as_slice()
        ),
        None => format!("no coalescence within horizon {}", result.horizon_used),
    };
    Ok(Outcome {
        passed: result.coalesced(),
        summary,
    })
}

fn cmd_renovate(cfg: &ExperimentConfig, out: &Output) -> Result<Outcome> {
    let path = path_of(cfg)?;
    let p = &cfg.renovate;
    let scan = detect_renovation(&path, cfg.servers, p.from, p.to, &cfg.loynes)?;
    let coalescence: CoalescenceSummary =
        verify_coalescence(&path, &scan, p.coalescence_sets, p.set_size)?;

    #[derive(Serialize)]
    struct Full<'a> {
        from: i64,
        to: i64,
        n_events: usize,
        frequency: Estimate,
        unstabilized: usize,
        coalescence: CoalescenceSummary,
        events: &'a [crate::coupling::RenovationEvent],
    }
    out.json(
        Command::Renovate,
        &Full {
            from: scan.from,
            to: scan.to,
            n_events: scan.events.len(),
            frequency: scan.frequency,
            unstabilized: scan.unstabilized,
            coalescence,
            events: &scan.events,
        },
    )?;

    let mut table = String::from("index");
    for j in 1..=cfg.servers {
        write!(table, ",upper{j}").expect("string write");
    }
    table.push('\n');
    for e in &scan.events {
        write!(table, "{}", e.index).expect("string write");
        for x in e.upper.as_slice() {
            write!(table, ",{x}").expect("string write");
        }
        table.push('\n');
    }
    out.csv("renovate.csv", table.as_bytes())?;

    let summary = format!(
        "{} renovation indices in [{}, {}] (frequency {:.4} ± {:.4}); {} coalescence failures in {} checks",
        scan.events.len(),
        scan.from,
        scan.to,
        scan.frequency.mean,
        scan.frequency.half_width,
        coalescence.failures,
        coalescence.checks
    );
    Ok(Outcome {
        passed: coalescence.failures == 0,
        summary,
    })
}

fn cmd_hset(cfg: &ExperimentConfig, out: &Output) -> Result<Outcome> {
    let path = path_of(cfg)?;
    let lattice = path
        .lattice()
        .map_err(|e| Error::Config(format!("hset needs a lattice model: {e}")))?;
    let p = &cfg.hset;
    let depth = cfg.hset_depth();
    let profiles = (0..p.starts as i64)
        .map(|k| {
            h_set_profile(
                &lattice,
                p.start + k,
                cfg.servers,
                depth,
                p.cap,
                &cfg.loynes,
            )
        })
        .collect::<Result<Vec<_>>>()?;

    #[derive(Serialize)]
    struct Row {
        at: i64,
        sizes: Vec<usize>,
        box_sizes: Vec<u128>,
        nesting_violation: Option<usize>,
        all_stabilized: bool,
        final_points: Vec<Vec<f64>>,
    }
    #[derive(Serialize)]
    struct Full {
        depth: usize,
        alpha: f64,
        starts: usize,
        nested: usize,
        singleton_fraction: f64,
        profiles: Vec<Row>,
    }
    let nested = profiles.iter().filter(|h| h.nested()).count();
    let singletons = profiles.iter().filter(|h| h.singleton_at(depth)).count();
    let alpha = lattice.alpha();
    let full = Full {
        depth,
        alpha,
        starts: profiles.len(),
        nested,
        singleton_fraction: singletons as f64 / profiles.len() as f64,
        profiles: profiles
            .iter()
            .map(|h| Row {
                at: h.at,
                sizes: h.sizes.clone(),
                box_sizes: h.box_sizes.clone(),
                nesting_violation: h.nesting_violation,
                all_stabilized: h.all_stabilized,
                final_points: h
                    .last
                    .points
                    .iter()
                    .map(|x| x.as_slice().iter().map(|&k| k as f64 * alpha).collect())
                    .collect(),
            })
            .collect(),
    };
    out.json(Command::Hset, &full)?;

    let mut table = String::from("start,depth,size,box_size\n");
    for h in &profiles {
        for (n, (size, b)) in h.sizes.iter().zip(&h.box_sizes).enumerate() {
            writeln!(table, "{},{},{size},{b}", h.at, n + 1).expect("string write");
        }
    }
    out.csv("hset.csv", table.as_bytes())?;

    let summary = format!(
        "{nested}/{} profiles nested; |H^{depth}| = 1 at {singletons} of {} indices",
        profiles.len(),
        profiles.len()
    );
    Ok(Outcome {
        passed: nested == profiles.len(),
        summary,
    })
}

fn cmd_simulate(cfg: &ExperimentConfig, out: &Output) -> Result<Outcome> {
    let path = path_of(cfg)?;
    let p = &cfg.simulate;
    let trace = run(&path, cfg.servers, p.start, p.arrivals)?;

    #[derive(Serialize)]
    struct Full {
        n_arrivals: usize,
        served: usize,
        losses: usize,
        loss_probability: Estimate,
        empty_server_probability: Estimate,
    }
    let served = trace.iter().filter(|r| r.served).count();
    let full = Full {
        n_arrivals: trace.len(),
        served,
        losses: trace.len() - served,
        loss_probability: loss_probability(&trace)?,
        empty_server_probability: Estimate::from_indicators(
            trace.iter().map(|r| r.workload_seen.min() == 0.0),
        ),
    };
    out.json(Command::Simulate, &full)?;
    out.trace(&trace)?;
    Ok(Outcome {
        passed: true,
        summary: format!(
            "{} arrivals, loss probability {:.4} ± {:.4}",
            full.n_arrivals, full.loss_probability.mean, full.loss_probability.half_width
        ),
    })
}
