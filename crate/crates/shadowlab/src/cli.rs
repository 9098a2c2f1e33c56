//! Command-line front end. `main.rs` only calls [`main_with_args`].

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::channel::{
    block_estimates, channel_spectrum, measurement_channel_exact, sn_gt_channel, BlockEstimate, GtIsotypic, Rational,
    EXACT_CLUSTER_TOL,
};
use crate::error::{Error, Result};
use crate::io::{
    format_table, parse_observable, parse_state, sweep_svg, table_rows, write_sweep_csv, write_table_csv,
    ExperimentConfig, SweepConfig,
};
use crate::protocol::{build_protocol, ProtocolId, SizeParams};
use crate::rep::young::Partition;
use crate::shadows::{
    estimate_from_records, read_snapshots, run_snapshots, write_snapshots, ShadowEstimate, ShadowEstimator,
    SnapshotRecord,
};
use crate::suites::{run_suite, suite_names, Check, SuiteOptions, SIGMAS, SUITES};
use crate::sweep::run_sweep;
use crate::variance::variance_report;

pub const SEED_ENV: &str = "SHADOWLAB_SEED";
pub const MAX_N: usize = 10;
pub const MAX_D: usize = 64;
pub const MAX_SAMPLES: usize = 10_000_000;
const EXACT_TOL: f64 = 1e-10;

#[derive(Parser, Debug)]
#[command(name = "shadowlab", version, about = "Classical shadows from group representations")]
pub struct Cli {
    /// Worker threads for Monte-Carlo loops (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Suppress the human-readable report on stdout.
    #[arg(long, short, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct ProtocolArgs {
    /// Protocol id, e.g. local-clifford, su2-tensor, sn-gt.
    #[arg(value_name = "PROTOCOL")]
    pub name: Option<String>,
    #[arg(long)]
    pub protocol: Option<String>,
    /// Qubits, modes or permuted points.
    #[arg(long)]
    pub n: Option<usize>,
    /// Hilbert-space dimension.
    #[arg(long)]
    pub d: Option<usize>,
    /// Partition such as 3,1,1 (sn-gt).
    #[arg(long)]
    pub lambda: Option<String>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct RunArgs {
    /// RNG seed; falls back to the config file, then SHADOWLAB_SEED, then 0.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory for data files.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Measured against predicted channel eigenvalues; exit 0 iff all match.
    Channel {
        #[command(flatten)]
        proto: ProtocolArgs,
        /// Average over the whole (finite) group.
        #[arg(long, conflicts_with = "mc")]
        exact: bool,
        /// Monte-Carlo samples.
        #[arg(long)]
        mc: Option<usize>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Sample snapshots and estimate Tr[ρO]; writes snapshots.jsonl and estimate.json.
    Estimate {
        #[command(flatten)]
        proto: ProtocolArgs,
        /// Flat TOML config; flags override its keys.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        observable: Option<String>,
        #[arg(long)]
        state: Option<String>,
        #[arg(long)]
        state_seed: Option<u64>,
        #[arg(long)]
        snapshots: Option<usize>,
        /// Median-of-means groups K (1 = plain mean).
        #[arg(long)]
        groups: Option<usize>,
        /// Re-estimate from a snapshots file instead of sampling.
        #[arg(long)]
        replay: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Protocol summary table (dim L^V, #λ, multiplicity-free).
    Table {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Variance against system size; writes sweep.csv and sweep.svg.
    Sweep {
        /// Flat TOML grid config.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Comma-separated protocol ids.
        #[arg(long)]
        protocol: Option<String>,
        /// Comma-separated observable names.
        #[arg(long)]
        observable: Option<String>,
        /// Sizes as a list (2,3,4) or range (2..8, inclusive).
        #[arg(long)]
        n: Option<String>,
        #[arg(long)]
        snapshots: Option<usize>,
        #[arg(long)]
        state: Option<String>,
        /// Record wall-clock seconds in the runtime column (breaks byte identity).
        #[arg(long)]
        timing: bool,
        #[arg(long)]
        no_plot: bool,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run verification suites by name (or `all`).
    Verify {
        #[arg(value_name = "SUITE", required = true)]
        suites: Vec<String>,
        /// Monte-Carlo samples per check.
        #[arg(long)]
        mc: Option<usize>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Channel specification files.
    Spec {
        #[command(subcommand)]
        action: SpecAction,
    },
    /// Variance bounds next to an empirical estimate; writes variance.json.
    Variance {
        #[command(flatten)]
        proto: ProtocolArgs,
        #[arg(long)]
        observable: String,
        #[arg(long, default_value = "haar")]
        state: String,
        #[arg(long)]
        state_seed: Option<u64>,
        #[arg(long, default_value_t = 10_000)]
        snapshots: usize,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Measurement-basis labels (index, eta, i, alpha) as CSV.
    BasisLabels {
        #[command(flatten)]
        proto: ProtocolArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum SpecAction {
    /// Component table as JSON.
    Export {
        #[command(flatten)]
        proto: ProtocolArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parses arguments, runs, and returns the process exit code: 0 on success,
/// 1 when a check fails, 2 on usage or runtime errors.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

/// Runs a parsed command; `Ok(false)` means a check failed.
pub fn run(cli: &Cli) -> Result<bool> {
    match cli.threads {
        Some(t) => {
            if t == 0 {
                return Err(Error::InvalidArgument("--threads must be at least 1".into()));
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::InvalidArgument(e.to_string()))?;
            pool.install(|| dispatch(cli))
        }
        None => dispatch(cli),
    }
}

struct Out {
    quiet: bool,
}

impl Out {
    fn say(&self, s: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", s.as_ref());
        }
    }
}

fn dispatch(cli: &Cli) -> Result<bool> {
    let out = Out { quiet: cli.quiet };
    match &cli.command {
        Command::Channel { proto, exact, mc, run } => cmd_channel(&out, proto, *exact, *mc, run),
        Command::Estimate { proto, config, observable, state, state_seed, snapshots, groups, replay, run } => {
            let mut cfg = match config {
                Some(p) => ExperimentConfig::load(p)?,
                None => ExperimentConfig::default(),
            };
            merge_protocol(&mut cfg, proto);
            cfg.observable = observable.clone().or(cfg.observable);
            cfg.state = state.clone().or(cfg.state);
            cfg.state_seed = state_seed.or(cfg.state_seed);
            cfg.snapshots = snapshots.or(cfg.snapshots);
            cfg.groups = groups.or(cfg.groups);
            cfg.seed = Some(resolve_seed(run.seed, cfg.seed)?);
            if let Some(o) = &run.out {
                cfg.out = Some(o.display().to_string());
            }
            cmd_estimate(&out, &cfg, replay.as_deref())
        }
        Command::Table { out: dir } => cmd_table(&out, dir.as_deref()),
        Command::Sweep { config, protocol, observable, n, snapshots, state, timing, no_plot, run } => {
            let mut cfg = match config {
                Some(p) => SweepConfig::load(p)?,
                None => SweepConfig {
                    protocols: vec!["su2-tensor".into(), "local-clifford".into()],
                    observables: vec!["zsym".into()],
                    n: (2..=8).collect(),
                    snapshots: 10_000,
                    seed: 0,
                    state: "haar".into(),
                    state_seed: None,
                    out: None,
                    plot: true,
                },
            };
            if let Some(p) = protocol {
                cfg.protocols = split_list(p);
            }
            if let Some(o) = observable {
                cfg.observables = split_list(o);
            }
            if let Some(n) = n {
                cfg.n = parse_sizes(n)?;
            }
            if let Some(s) = snapshots {
                cfg.snapshots = *s;
            }
            if let Some(s) = state {
                cfg.state = s.clone();
            }
            let file_seed = config.as_ref().map(|_| cfg.seed);
            cfg.seed = resolve_seed(run.seed, file_seed)?;
            if let Some(o) = &run.out {
                cfg.out = Some(o.display().to_string());
            }
            if *no_plot {
                cfg.plot = false;
            }
            cmd_sweep(&out, &cfg, *timing)
        }
        Command::Verify { suites, mc, run } => cmd_verify(&out, suites, *mc, run),
        Command::Spec { action: SpecAction::Export { proto, out: dir } } => cmd_spec_export(&out, proto, dir.as_deref()),
        Command::Variance { proto, observable, state, state_seed, snapshots, run } => {
            cmd_variance(&out, proto, observable, state, *state_seed, *snapshots, run)
        }
        Command::BasisLabels { proto, out: dir } => cmd_basis_labels(&out, proto, dir.as_deref()),
    }
}

fn split_list(s: &str) -> Vec<String> {
    s.split(',').map(|t| t.trim().to_string()).filter(|t| !t.is_empty()).collect()
}

/// `2..8` (inclusive) or `2,3,5`.
pub fn parse_sizes(s: &str) -> Result<Vec<usize>> {
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| Error::InvalidArgument(format!("bad size `{t}`")));
    if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
        return Ok((a..=b).collect());
    }
    split_list(s).iter().map(|t| num(t)).collect()
}

/// Flag, then config value, then SHADOWLAB_SEED, then 0.
fn resolve_seed(flag: Option<u64>, config: Option<u64>) -> Result<u64> {
    if let Some(s) = flag.or(config) {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| Error::Config(format!("{SEED_ENV}={v} is not an integer"))),
        Err(_) => Ok(0),
    }
}

fn merge_protocol(cfg: &mut ExperimentConfig, p: &ProtocolArgs) {
    if let Some(name) = p.protocol.clone().or_else(|| p.name.clone()) {
        cfg.protocol = Some(name);
    }
    cfg.n = p.n.or(cfg.n);
    cfg.d = p.d.or(cfg.d);
    cfg.lambda = p.lambda.clone().or(cfg.lambda.clone());
}

fn resolve_protocol(p: &ProtocolArgs) -> Result<(ProtocolId, SizeParams)> {
    let name = p
        .protocol
        .as_deref()
        .or(p.name.as_deref())
        .ok_or_else(|| Error::InvalidArgument("missing protocol (positional or --protocol)".into()))?;
    let id: ProtocolId = name.parse()?;
    let lambda = p.lambda.as_deref().map(Partition::parse).transpose()?;
    let size = SizeParams { n: p.n, d: p.d, lambda };
    guard_size(&size)?;
    Ok((id, size))
}

/// Resource caps enforced by the CLI only.
pub fn guard_size(size: &SizeParams) -> Result<()> {
    if let Some(n) = size.n {
        if n > MAX_N {
            return Err(Error::InvalidArgument(format!("n = {n} exceeds the CLI cap of {MAX_N}")));
        }
    }
    if let Some(d) = size.d {
        if d > MAX_D {
            return Err(Error::InvalidArgument(format!("d = {d} exceeds the CLI cap of {MAX_D}")));
        }
    }
    Ok(())
}

fn guard_samples(n: usize) -> Result<()> {
    if n > MAX_SAMPLES {
        return Err(Error::InvalidArgument(format!("{n} samples exceeds the CLI cap of {MAX_SAMPLES}")));
    }
    Ok(())
}

fn out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    Ok(())
}

/// Timestamps and wall-clock time go only to this sidecar, never to data files.
fn sidecar_log(dir: &Path, name: &str, started: Instant, extra: &str) -> Result<()> {
    let ts = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let mut f = fs::OpenOptions::new().create(true).append(true).open(dir.join(format!("{name}.log")))?;
    writeln!(f, "unix_time={ts} elapsed_s={:.3} {extra}", started.elapsed().as_secs_f64())?;
    Ok(())
}

#[derive(Serialize)]
struct ClusterRow {
    measured: Option<f64>,
    measured_mult: usize,
    predicted: Option<String>,
    predicted_mult: usize,
    pass: bool,
}

#[derive(Serialize)]
struct ChannelReport {
    protocol: String,
    size: String,
    mode: String,
    pass: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    clusters: Vec<ClusterRow>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    blocks: Vec<BlockEstimate>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    isotypics: Vec<GtIsotypic>,
    non_central: Option<bool>,
}

fn rational_str(r: &Rational) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn cmd_channel(out: &Out, proto: &ProtocolArgs, exact: bool, mc: Option<usize>, run: &RunArgs) -> Result<bool> {
    let started = Instant::now();
    let (id, size) = resolve_protocol(proto)?;
    let seed = resolve_seed(run.seed, None)?;
    let mut report = ChannelReport {
        protocol: id.to_string(),
        size: size.tag(),
        mode: String::new(),
        pass: true,
        clusters: Vec::new(),
        blocks: Vec::new(),
        isotypics: Vec::new(),
        non_central: None,
    };
    if id == ProtocolId::SnGt {
        let shape = size.lambda.clone().ok_or_else(|| Error::InvalidArgument("sn-gt needs --lambda".into()))?;
        let (_, gt) = sn_gt_channel(&shape)?;
        report.mode = "exact".into();
        out.say(format!("sn-gt {shape}: exact channel spectrum on End(V^{shape})"));
        for (v, m) in &gt.spectrum {
            out.say(format!("  {v:>12.8} x{m}"));
            report.clusters.push(ClusterRow { measured: Some(*v), measured_mult: *m, predicted: None, predicted_mult: 0, pass: true });
        }
        for iso in &gt.isotypics {
            out.say(format!(
                "  isotypic {:<10} dim {:>3}  scalar {:.8}  residual {:.2e}  {}",
                iso.label,
                iso.dim,
                iso.scalar,
                iso.residual,
                if iso.central { "central" } else { "NON-CENTRAL" }
            ));
        }
        if gt.non_central {
            out.say("NON-CENTRAL: the Gelfand-Tsetlin basis does not centralize this channel");
        }
        report.isotypics = gt.isotypics;
        report.non_central = Some(gt.non_central);
    } else {
        let protocol = build_protocol(id, &size)?;
        let spec = protocol.spec()?;
        let use_exact = exact || (mc.is_none() && protocol.ensemble.has_enumerator());
        if use_exact {
            report.mode = "exact".into();
            let m = measurement_channel_exact(&protocol.ensemble, &protocol.basis)?;
            let measured = channel_spectrum(&m, EXACT_CLUSTER_TOL)?;
            let predicted = spec.predicted_spectrum();
            out.say(format!("{id} {}: exact channel, {} clusters", size.tag(), measured.len()));
            for k in 0..measured.len().max(predicted.len()) {
                let me = measured.get(k);
                let pr = predicted.get(k);
                let pass = match (me, pr) {
                    (Some((v, m)), Some((a, pm))) => (v - a_f64(a)).abs() <= EXACT_TOL && m == pm,
                    _ => false,
                };
                report.pass &= pass;
                out.say(format!(
                    "  measured {:>12} x{:<4} predicted {:>8} x{:<4} {}",
                    me.map_or("-".into(), |(v, _)| format!("{v:.8}")),
                    me.map_or(0, |(_, m)| *m),
                    pr.map_or("-".into(), |(a, _)| rational_str(a)),
                    pr.map_or(0, |(_, m)| *m),
                    if pass { "PASS" } else { "FAIL" }
                ));
                report.clusters.push(ClusterRow {
                    measured: me.map(|(v, _)| *v),
                    measured_mult: me.map_or(0, |(_, m)| *m),
                    predicted: pr.map(|(a, _)| rational_str(a)),
                    predicted_mult: pr.map_or(0, |(_, m)| *m),
                    pass,
                });
            }
        } else {
            let samples = mc.unwrap_or(100_000);
            guard_samples(samples)?;
            report.mode = format!("mc {samples}");
            let blocks = block_estimates(&protocol.ensemble, &protocol.basis, spec, None, samples, seed)?;
            out.say(format!("{id} {}: Monte-Carlo channel, N = {samples}, seed {seed}", size.tag()));
            for b in &blocks {
                let pass = b.within(SIGMAS);
                report.pass &= pass;
                out.say(format!(
                    "  {:<12} measured {:.6} ± {:.1e}  predicted {:.6}  {}",
                    b.label,
                    b.mean,
                    b.stderr,
                    b.predicted,
                    if pass { "PASS" } else { "FAIL" }
                ));
            }
            report.blocks = blocks;
        }
        out.say(if report.pass { "PASS" } else { "FAIL" });
    }
    if let Some(dir) = &run.out {
        out_dir(dir)?;
        write_json(&dir.join("channel.json"), &report)?;
        sidecar_log(dir, "channel", started, &format!("seed={seed}"))?;
    }
    Ok(report.pass)
}

fn a_f64(a: &Rational) -> f64 {
    *a.numer() as f64 / *a.denom() as f64
}

#[derive(Serialize)]
struct EstimateReport<'a> {
    protocol: String,
    size: String,
    observable: &'a str,
    state: &'a str,
    seed: u64,
    value: f64,
    stderr: f64,
    truth: Option<f64>,
    #[serde(flatten)]
    estimate: &'a ShadowEstimate,
}

fn cmd_estimate(out: &Out, cfg: &ExperimentConfig, replay: Option<&Path>) -> Result<bool> {
    let started = Instant::now();
    cfg.validate()?;
    let id = cfg.protocol_id()?;
    let size = cfg.size()?;
    guard_size(&size)?;
    let seed = cfg.seed.unwrap_or(0);
    let protocol = build_protocol(id, &size)?;
    let obs_name = cfg.observable.as_deref().ok_or_else(|| Error::Config("missing `observable`".into()))?;
    let o = parse_observable(obs_name, protocol.dim())?;
    let groups = cfg.groups.unwrap_or(1);
    let state_name = cfg.state.as_deref().unwrap_or("zero");
    let (estimate, records, truth) = match replay {
        Some(path) => {
            let records = read_snapshots(std::io::BufReader::new(fs::File::open(path)?))?;
            (estimate_from_records(&protocol, &records, &o, groups)?, None, None)
        }
        None => {
            let n = cfg.snapshots.unwrap_or(1000);
            guard_samples(n)?;
            let state = parse_state(state_name, protocol.dim(), cfg.state_seed.unwrap_or(seed))?;
            let est = ShadowEstimator::new(&protocol, &o)?;
            let shots = run_snapshots(&protocol, &state, &est, n, seed)?;
            let values: Vec<f64> = shots.iter().map(|(_, v)| *v).collect();
            let estimate = ShadowEstimate::from_values(&values, groups, est.visibility)?;
            let records: Vec<SnapshotRecord> = shots
                .into_iter()
                .enumerate()
                .map(|(k, (s, _))| SnapshotRecord {
                    protocol: id,
                    seed,
                    counter: k as u64,
                    descriptor: s.descriptor,
                    outcome: s.outcome,
                })
                .collect();
            (estimate, Some(records), Some(state.expectation(&o.matrix)))
        }
    };
    out.say(format!(
        "{id} {} {obs_name}: estimate {:.6} ± {:.1e} (N = {}, K = {})",
        size.tag(),
        estimate.value(),
        estimate.stderr(),
        estimate.samples,
        estimate.groups
    ));
    if let Some(t) = truth {
        out.say(format!("  Tr[rho O] = {t:.6}"));
    }
    if let Some(w) = &estimate.warning {
        out.say(format!("  warning: {w}"));
    }
    if let Some(dir) = cfg.out.as_deref().map(Path::new) {
        out_dir(dir)?;
        if let Some(records) = &records {
            let f = std::io::BufWriter::new(fs::File::create(dir.join("snapshots.jsonl"))?);
            write_snapshots(f, records)?;
        }
        let report = EstimateReport {
            protocol: id.to_string(),
            size: size.tag(),
            observable: obs_name,
            state: if replay.is_some() { "replay" } else { state_name },
            seed,
            value: estimate.value(),
            stderr: estimate.stderr(),
            truth,
            estimate: &estimate,
        };
        write_json(&dir.join("estimate.json"), &report)?;
        sidecar_log(dir, "estimate", started, &format!("seed={seed}"))?;
    }
    Ok(true)
}

fn cmd_table(out: &Out, dir: Option<&Path>) -> Result<bool> {
    let rows = table_rows()?;
    out.say(format_table(&rows).trim_end());
    if let Some(dir) = dir {
        out_dir(dir)?;
        write_table_csv(fs::File::create(dir.join("table.csv"))?, &rows)?;
    }
    Ok(true)
}

fn cmd_sweep(out: &Out, cfg: &SweepConfig, timing: bool) -> Result<bool> {
    let started = Instant::now();
    for p in &cfg.protocols {
        let id: ProtocolId = p.parse()?;
        for &n in &cfg.n {
            guard_size(&crate::sweep::sweep_size(id, n))?;
        }
    }
    guard_samples(cfg.snapshots)?;
    let points = if cfg.n.is_empty() || cfg.protocols.is_empty() || cfg.observables.is_empty() {
        Vec::new()
    } else {
        run_sweep(cfg, timing)?
    };
    let rows: Vec<_> = points.iter().map(|p| p.row.clone()).collect();
    let mut all_ok = true;
    for p in &points {
        let r = &p.row;
        let ok = p.within_bounds(SIGMAS);
        all_ok &= ok;
        out.say(format!(
            "{:<16} {:<10} n={:<2} mean {:>10.5} var {:>12.5} ± {:<9.2e} l2 {:>12.5} inf {:>12.5} exact {:>12} {}",
            r.protocol,
            r.observable,
            r.n,
            r.mean,
            r.empirical_variance,
            p.variance_stderr,
            r.bound_l2,
            r.bound_inf,
            r.exact.map_or("-".into(), |v| format!("{v:.5}")),
            if ok { "" } else { "ABOVE BOUND" }
        ));
    }
    match cfg.out.as_deref().map(Path::new) {
        Some(dir) => {
            out_dir(dir)?;
            write_sweep_csv(fs::File::create(dir.join("sweep.csv"))?, &rows)?;
            if cfg.plot {
                fs::write(dir.join("sweep.svg"), sweep_svg(&rows))?;
            }
            sidecar_log(dir, "sweep", started, &format!("seed={} points={}", cfg.seed, rows.len()))?;
        }
        None => {
            if !out.quiet {
                write_sweep_csv(std::io::stdout().lock(), &rows)?;
            }
        }
    }
    Ok(all_ok)
}

fn cmd_verify(out: &Out, suites: &[String], mc: Option<usize>, run: &RunArgs) -> Result<bool> {
    let started = Instant::now();
    let mut opts = SuiteOptions::default();
    if let Some(n) = mc {
        guard_samples(n)?;
        opts.samples = n;
    }
    // suites keep their own default seed unless one is given
    if run.seed.is_some() || std::env::var_os(SEED_ENV).is_some() {
        opts.seed = resolve_seed(run.seed, None)?;
    }
    let names: Vec<String> = if suites.iter().any(|s| s == "all") {
        suite_names().iter().map(|s| s.to_string()).collect()
    } else {
        suites.to_vec()
    };
    for name in &names {
        if !SUITES.iter().any(|(s, _)| s == name) {
            return Err(Error::InvalidArgument(format!("unknown suite `{name}`; available: {}", suite_names().join(", "))));
        }
    }
    let mut checks: Vec<Check> = Vec::new();
    for name in &names {
        for c in run_suite(name, &opts)? {
            out.say(c.line());
            checks.push(c);
        }
    }
    let pass = checks.iter().all(|c| c.pass);
    let failed = checks.iter().filter(|c| !c.pass).count();
    out.say(format!("{} checks, {failed} failed", checks.len()));
    if let Some(dir) = &run.out {
        out_dir(dir)?;
        write_json(&dir.join("verify.json"), &checks)?;
        let timings: Vec<String> =
            checks.iter().filter_map(|c| c.elapsed.map(|t| format!("{}={t:.2}s", c.suite))).collect();
        sidecar_log(dir, "verify", started, &timings.join(" "))?;
    }
    Ok(pass)
}

fn cmd_spec_export(out: &Out, proto: &ProtocolArgs, dir: Option<&Path>) -> Result<bool> {
    let (id, size) = resolve_protocol(proto)?;
    let spec = crate::channel::analytic_channel_spec(id, &size)?;
    let json = serde_json::to_string_pretty(&spec.export())?;
    match dir {
        Some(dir) => {
            out_dir(dir)?;
            fs::write(dir.join("spec.json"), format!("{json}\n"))?;
        }
        None => out.say(json),
    }
    Ok(true)
}

fn cmd_variance(
    out: &Out,
    proto: &ProtocolArgs,
    observable: &str,
    state: &str,
    state_seed: Option<u64>,
    snapshots: usize,
    run: &RunArgs,
) -> Result<bool> {
    let started = Instant::now();
    let (id, size) = resolve_protocol(proto)?;
    guard_samples(snapshots)?;
    let seed = resolve_seed(run.seed, None)?;
    let protocol = build_protocol(id, &size)?;
    let o = parse_observable(observable, protocol.dim())?;
    let st = parse_state(state, protocol.dim(), state_seed.unwrap_or(seed))?;
    let report = variance_report(&protocol, &st, &o, snapshots, seed)?;
    let json = serde_json::to_string_pretty(&report)?;
    out.say(&json);
    if let Some(dir) = &run.out {
        out_dir(dir)?;
        fs::write(dir.join("variance.json"), format!("{json}\n"))?;
        sidecar_log(dir, "variance", started, &format!("seed={seed}"))?;
    }
    Ok(report.exact_agrees().unwrap_or(true))
}

fn cmd_basis_labels(out: &Out, proto: &ProtocolArgs, dir: Option<&Path>) -> Result<bool> {
    let (id, size) = resolve_protocol(proto)?;
    let protocol = build_protocol(id, &size)?;
    match dir {
        Some(dir) => {
            out_dir(dir)?;
            protocol.basis.write_labels_csv(fs::File::create(dir.join("basis_labels.csv"))?)?;
        }
        None => {
            if !out.quiet {
                protocol.basis.write_labels_csv(std::io::stdout().lock())?;
            }
        }
    }
    Ok(true)
}

/// Command lines exercised by the determinism check; `--seed` and `--out` are appended.
pub fn determinism_commands() -> Vec<Vec<&'static str>> {
    vec![
        vec!["channel", "local-clifford", "--n", "1", "--exact"],
        vec!["channel", "matchgate", "--n", "2", "--mc", "2000"],
        vec!["channel", "sn-gt", "--lambda", "2,1"],
        vec!["estimate", "su2-tensor", "--n", "3", "--observable", "ghz", "--state", "ghz", "--snapshots", "2000", "--groups", "5"],
        vec!["estimate", "local-clifford", "--n", "2", "--observable", "pauli:XZ", "--state", "haar", "--snapshots", "1000"],
        vec!["table"],
        vec!["sweep", "--protocol", "su2-tensor,local-clifford", "--observable", "zsym,zall", "--n", "2..3", "--snapshots", "500"],
        vec!["spec", "export", "symplectic", "--d", "4"],
        vec!["variance", "local-clifford", "--n", "2", "--observable", "pauli:XZ", "--snapshots", "2000"],
        vec!["basis-labels", "su2-tensor", "--n", "3"],
        vec!["verify", "htwirl"],
    ]
}

/// Data files in an output directory (which is always flat), without sidecar logs.
fn collect_files(root: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(root)? {
        let name = PathBuf::from(entry?.file_name());
        if name.extension().is_none_or(|e| e != "log") {
            out.push(name);
        }
    }
    out.sort();
    Ok(out)
}

/// Runs every determinism command twice (with 2 and then 1 worker threads)
/// into separate directories and compares the data files byte for byte.
pub fn determinism_checks(seed: u64) -> Result<Vec<Check>> {
    let base = std::env::temp_dir().join(format!(
        "shadowlab-determinism-{}-{}",
        std::process::id(),
        SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_nanos()).unwrap_or(0)
    ));
    let mut checks = Vec::new();
    for (k, cmd) in determinism_commands().iter().enumerate() {
        let mut dirs = Vec::new();
        let mut codes = Vec::new();
        for (run, threads) in [(0, "2"), (1, "1")] {
            let dir = base.join(format!("run{run}")).join(format!("{k:02}-{}", cmd[0]));
            let seed_s = seed.to_string();
            let mut args: Vec<String> = vec!["shadowlab".into(), "--quiet".into(), "--threads".into(), threads.into()];
            args.extend(cmd.iter().map(|s| s.to_string()));
            args.extend(["--seed".to_string(), seed_s, "--out".to_string(), dir.display().to_string()]);
            if cmd[0] == "table" || cmd[0] == "spec" || cmd[0] == "basis-labels" {
                // these take no seed
                let pos = args.iter().position(|a| a == "--seed").expect("seed flag");
                args.drain(pos..pos + 2);
            }
            codes.push(main_with_args(&args));
            dirs.push(dir);
        }
        let a = collect_files(&dirs[0])?;
        let b = collect_files(&dirs[1])?;
        let mut same = a == b && !a.is_empty();
        for f in &a {
            same &= fs::read(dirs[0].join(f))? == fs::read(dirs[1].join(f)).unwrap_or_default();
        }
        let names: Vec<String> = a.iter().map(|p| p.display().to_string()).collect();
        checks.push(Check {
            suite: "determinism".into(),
            name: cmd.join(" "),
            pass: same && codes[0] == codes[1] && codes[0] != 2,
            detail: format!("files [{}], exit codes {:?}", names.join(", "), codes),
            elapsed: None,
        });
    }
    let _ = fs::remove_dir_all(&base);
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_parse() {
        assert_eq!(parse_sizes("2..4").unwrap(), vec![2, 3, 4]);
        assert_eq!(parse_sizes("2, 5").unwrap(), vec![2, 5]);
        assert!(parse_sizes("x").is_err());
    }

    #[test]
    fn guardrails() {
        assert!(guard_size(&SizeParams::qubits(11)).is_err());
        assert!(guard_size(&SizeParams::dim(65)).is_err());
        assert!(guard_size(&SizeParams::dim(64)).is_ok());
    }

    #[test]
    fn flag_seed_wins() {
        assert_eq!(resolve_seed(Some(5), Some(7)).unwrap(), 5);
        assert_eq!(resolve_seed(None, Some(7)).unwrap(), 7);
    }

    #[test]
    fn unknown_suite_is_an_error() {
        assert_eq!(main_with_args(["shadowlab", "-q", "verify", "bogus"]), 2);
    }

    #[test]
    fn channel_exit_code() {
        assert_eq!(main_with_args(["shadowlab", "-q", "channel", "local-clifford", "--n", "2", "--exact"]), 0);
        assert_eq!(main_with_args(["shadowlab", "-q", "channel", "pauli", "--n", "11"]), 2);
    }
}
