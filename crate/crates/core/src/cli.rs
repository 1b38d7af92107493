//! Command-line front end. Every subcommand produces one [`Table`], written as
//! CSV (default) or JSON to stdout or `--output`.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bounds::{lower_bound_rate, mc_mutual_information, upper_bound_rate, GAMMA_LADDER};
use crate::config::{load_pmf, load_scenario, Cell, Table};
use crate::error::{Error, Result};
use crate::measures::{
    afh_report, backoff_comparison, fd_report, fh_report, poisson_sweep, proposition1_check, proposition2_check,
    FdConfig, MeasureReport, UserCountPmf, DEFAULT_BACKOFF,
};
use crate::model::enumerate_interference_spectrum;
use crate::rng::derive_key;
use crate::sim::{run as run_sim, sample_received, SimConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "fhshare", version, about = "Frequency-hopping spectrum sharing: rate bounds, simulation and load measures")]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "csv")]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Maximum worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Interference levels seen at each receiver.
    Levels(LevelsArgs),
    /// Upper and lower rate bounds, optionally with a Monte-Carlo rate estimate.
    Bounds(BoundsArgs),
    /// Slot simulation of free sub-bands, interference levels and occupancy.
    Simulate(SimulateArgs),
    /// All measures for FH, FD and adaptive FH under one user-count law.
    Measures(MeasuresArgs),
    /// Measures over a grid of Poisson loads.
    Sweep(SweepArgs),
    /// FH against FD per measure, with backoff and sufficient-condition diagnostics.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
pub struct LevelsArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    /// Only this receiver (zero-based).
    #[arg(long)]
    pub user: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long)]
    pub user: Option<usize>,
    /// SNR values, comma separated; default is the scenario's own `P/sigma2`.
    #[arg(long, value_delimiter = ',')]
    pub gammas: Vec<f64>,
    /// Use the decade ladder 1e2..1e8.
    #[arg(long, conflicts_with = "gammas")]
    pub ladder: bool,
    /// Monte-Carlo samples per entropy estimate; 0 disables the estimate.
    #[arg(long, default_value_t = 0)]
    pub mc_samples: usize,
    /// Required when `--mc-samples` is positive.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long)]
    pub slots: u64,
    #[arg(long)]
    pub seed: u64,
    /// Also write raw received samples to this binary file.
    #[arg(long)]
    pub dump: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub dump_user: usize,
    #[arg(long, default_value_t = 10_000)]
    pub dump_samples: usize,
}

#[derive(Debug, Args)]
pub struct MeasuresArgs {
    /// User-count file.
    #[arg(long)]
    pub pmf: PathBuf,
    /// Number of sub-bands.
    #[arg(long)]
    pub u: usize,
    /// FD design size; default `min(n_max, u)`.
    #[arg(long)]
    pub n_des: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Poisson means, comma separated.
    #[arg(long, value_delimiter = ',', required_unless_present = "lambda_range")]
    pub lambdas: Vec<f64>,
    /// `start:stop:step`, inclusive.
    #[arg(long, conflicts_with = "lambdas")]
    pub lambda_range: Option<String>,
    /// Sub-band counts, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "7")]
    pub u: Vec<usize>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub pmf: PathBuf,
    #[arg(long)]
    pub u: usize,
    #[arg(long)]
    pub n_des: Option<usize>,
    /// Backoff below full-band hopping; default `1e-3 u`.
    #[arg(long)]
    pub eps: Option<f64>,
}

fn levels(a: &LevelsArgs) -> Result<Table> {
    let (scenario, profiles) = load_scenario(&a.scenario)?;
    let receivers: Vec<usize> = match a.user {
        Some(u) => vec![u],
        None => (0..scenario.n_users()).collect(),
    };
    let mut t = Table::new(&["receiver", "level", "a", "c", "sigma2"]);
    for i in receivers {
        let spectrum = enumerate_interference_spectrum(&scenario, &profiles, i)?;
        for (l, lev) in spectrum.levels().iter().enumerate() {
            t.push(vec![i.into(), l.into(), lev.prob.into(), lev.c.into(), lev.sigma2.into()]);
        }
    }
    Ok(t)
}

fn bounds(a: &BoundsArgs) -> Result<Table> {
    let (scenario, profiles) = load_scenario(&a.scenario)?;
    if a.mc_samples > 0 && a.seed.is_none() {
        return Err(Error::InvalidArgument("--seed is required with --mc-samples".into()));
    }
    let gammas: Vec<f64> = if a.ladder {
        GAMMA_LADDER.to_vec()
    } else if a.gammas.is_empty() {
        vec![scenario.snr()]
    } else {
        a.gammas.clone()
    };
    let users: Vec<usize> = match a.user {
        Some(u) => vec![u],
        None => (0..scenario.n_users()).collect(),
    };
    let mut t = Table::new(&["user", "gamma", "r_ub", "r_lb", "mi_mc", "mi_se", "slope"]);
    for &user in &users {
        for (g, &gamma) in gammas.iter().enumerate() {
            let s = scenario.with_snr(gamma)?;
            let ub = upper_bound_rate(&s, &profiles, user)?;
            let lb = lower_bound_rate(&s, &profiles, user)?;
            let (mi, se) = match a.seed {
                Some(seed) if a.mc_samples > 0 => {
                    let est = mc_mutual_information(&s, &profiles, user, a.mc_samples, derive_key(seed, &[g as u64]))?;
                    (Cell::from(est.bits), Cell::from(est.std_error))
                }
                _ => (Cell::Empty, Cell::Empty),
            };
            t.push(vec![user.into(), gamma.into(), ub.value_bits.into(), lb.value_bits.into(), mi, se, ub.slope.into()]);
        }
    }
    Ok(t)
}

fn simulate(a: &SimulateArgs) -> Result<Table> {
    let (scenario, profiles) = load_scenario(&a.scenario)?;
    let cfg = SimConfig { scenario, profiles, n_slots: a.slots, master_seed: a.seed };
    let stats = run_sim(&cfg)?;
    let mut t = Table::new(&["user", "quantity", "key", "mean", "std_error"]);
    for u in &stats.users {
        t.push(vec![
            u.user.into(),
            "free_subbands".into(),
            Cell::Empty,
            u.free_subbands.mean.into(),
            u.free_subbands.std_error.into(),
        ]);
        for lev in &u.levels {
            t.push(vec![u.user.into(), "level".into(), lev.c.into(), lev.freq.mean.into(), lev.freq.std_error.into()]);
        }
        for (j, o) in u.occupancy.iter().enumerate() {
            t.push(vec![u.user.into(), "occupancy".into(), j.into(), o.mean.into(), o.std_error.into()]);
        }
    }
    if let Some(path) = &a.dump {
        let samples = sample_received(&cfg, a.dump_user, a.dump_samples, derive_key(a.seed, &[0x64756d70]))?;
        let file = std::io::BufWriter::new(std::fs::File::create(path)?);
        samples.write_to(file)?;
    }
    Ok(t)
}

fn fd_config(pmf: &UserCountPmf, u: usize, n_des: Option<usize>) -> Result<FdConfig> {
    match n_des {
        Some(n) => {
            let fd = FdConfig::new(n)?;
            fd.check_divides(u)?;
            Ok(fd)
        }
        None => Ok(FdConfig::default_for(pmf, u)),
    }
}

fn push_report(t: &mut Table, r: &MeasureReport) {
    let u = r.n_subbands as f64;
    let scheme = Cell::from(r.scheme.as_str());
    let rows: [(&str, Option<f64>, bool, Option<f64>); 4] = [
        ("eta1", Some(r.eta1), true, r.v_star),
        ("eta2", Some(r.eta2), true, r.v_dagger),
        ("eta3", r.eta3, true, None),
        ("eta4", Some(r.eta4), false, r.v_star),
    ];
    for (name, value, scaled, arg) in rows {
        t.push(vec![
            scheme.clone(),
            name.into(),
            r.n_subbands.into(),
            r.n_des.into(),
            value.into(),
            value.filter(|_| scaled).map(|v| v / u).into(),
            arg.into(),
        ]);
    }
}

fn measures(a: &MeasuresArgs) -> Result<Table> {
    let pmf = load_pmf(&a.pmf)?;
    let fd = fd_config(&pmf, a.u, a.n_des)?;
    let mut t = Table::new(&["scheme", "measure", "u", "n_des", "value", "value_over_u", "argmax"]);
    push_report(&mut t, &fh_report(&pmf, a.u)?);
    push_report(&mut t, &fd_report(&pmf, fd, a.u)?);
    push_report(&mut t, &afh_report(&pmf, a.u)?);
    Ok(t)
}

fn parse_range(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidArgument(format!("range '{spec}' is not start:stop:step"));
    let parts: Vec<f64> = spec.split(':').map(|p| p.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<_>>()?;
    let [start, stop, step] = parts[..] else { return Err(bad()) };
    if !(step > 0.0 && stop >= start) {
        return Err(bad());
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| start + k as f64 * step).collect())
}

fn sweep(a: &SweepArgs) -> Result<Table> {
    let lambdas = match &a.lambda_range {
        Some(r) => parse_range(r)?,
        None => a.lambdas.clone(),
    };
    if lambdas.is_empty() || a.u.is_empty() {
        return Err(Error::InvalidArgument("empty sweep grid".into()));
    }
    let mut t = Table::new(&[
        "lambda",
        "u",
        "eta1_fh",
        "eta1_fh_over_u",
        "v_star",
        "eta2_fh",
        "eta2_fh_over_u",
        "v_dagger",
        "eta1_fd",
        "eta1_fd_over_u",
        "eta2_fd",
        "eta2_fd_over_u",
        "eta4_fd",
        "eta1_afh",
        "eta1_afh_over_u",
        "eta2_afh",
        "eta2_afh_over_u",
    ]);
    for p in poisson_sweep(&lambdas, &a.u)? {
        let u = p.n_subbands as f64;
        t.push(vec![
            p.lambda.into(),
            p.n_subbands.into(),
            p.eta1_fh.into(),
            (p.eta1_fh / u).into(),
            p.v_star.into(),
            p.eta2_fh.into(),
            (p.eta2_fh / u).into(),
            p.v_dagger.into(),
            p.eta1_fd.into(),
            (p.eta1_fd / u).into(),
            p.eta2_fd.into(),
            (p.eta2_fd / u).into(),
            p.eta4_fd.into(),
            p.eta1_afh.into(),
            (p.eta1_afh / u).into(),
            p.eta2_afh.into(),
            (p.eta2_afh / u).into(),
        ]);
    }
    Ok(t)
}

fn winner(fh: Option<f64>, fd: Option<f64>) -> Cell {
    match (fh, fd) {
        (Some(a), Some(b)) if a > b => "FH".into(),
        (Some(a), Some(b)) if b > a => "FD".into(),
        (Some(_), Some(_)) => "tie".into(),
        _ => Cell::Empty,
    }
}

fn compare(a: &CompareArgs) -> Result<Table> {
    let pmf = load_pmf(&a.pmf)?;
    let fd = fd_config(&pmf, a.u, a.n_des)?;
    let eps = a.eps.unwrap_or(DEFAULT_BACKOFF * a.u as f64);
    let fh_r = fh_report(&pmf, a.u)?;
    let fd_r = fd_report(&pmf, fd, a.u)?;
    let mut t = Table::new(&["item", "fh", "fd", "winner", "condition", "mean_users"]);
    let pairs = [
        ("eta1", Some(fh_r.eta1), Some(fd_r.eta1)),
        ("eta2", Some(fh_r.eta2), Some(fd_r.eta2)),
        ("eta3", fh_r.eta3, fd_r.eta3),
        ("eta4", Some(fh_r.eta4), Some(fd_r.eta4)),
    ];
    for (name, x, y) in pairs {
        t.push(vec![name.into(), x.into(), y.into(), winner(x, y), Cell::Empty, Cell::Empty]);
    }
    let b = backoff_comparison(&pmf, fd, a.u, eps)?;
    t.push(vec![
        "eta1_backoff".into(),
        b.fh_eta1.into(),
        b.fd_eta1.into(),
        winner(Some(b.fh_eta1), Some(b.fd_eta1)),
        Cell::Empty,
        Cell::Empty,
    ]);
    t.push(vec![
        "eta2_backoff".into(),
        b.fh_eta2.into(),
        b.fd_eta2.into(),
        winner(Some(b.fh_eta2), Some(b.fd_eta2)),
        Cell::Empty,
        Cell::Empty,
    ]);
    if pmf.n_max().is_some() {
        for (name, c) in [("sufficient_eta1", proposition1_check(&pmf)?), ("sufficient_eta2", proposition2_check(&pmf)?)] {
            t.push(vec![
                name.into(),
                c.fh_value.into(),
                c.fd_value.into(),
                winner(Some(c.fh_value), Some(c.fd_value)),
                c.condition.into(),
                c.mean_users.into(),
            ]);
        }
    }
    Ok(t)
}

fn table_for(cli: &Cli) -> Result<Table> {
    match &cli.command {
        Command::Levels(a) => levels(a),
        Command::Bounds(a) => bounds(a),
        Command::Simulate(a) => simulate(a),
        Command::Measures(a) => measures(a),
        Command::Sweep(a) => sweep(a),
        Command::Compare(a) => compare(a),
    }
}

/// Runs a parsed command and writes its table to `--output` or `stdout`.
pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    let table = match cli.threads {
        Some(0) => return Err(Error::InvalidArgument("--threads must be positive".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?
            .install(|| table_for(cli))?,
        None => table_for(cli)?,
    };
    let mut buf = Vec::new();
    match cli.format {
        Format::Csv => table.write_csv(&mut buf)?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut buf, &table.to_json())?;
            buf.push(b'\n');
        }
    }
    match &cli.output {
        Some(path) => std::fs::write(path, &buf)?,
        None => stdout.write_all(&buf)?,
    }
    Ok(())
}

fn error_json(kind: &str, message: &str) -> String {
    serde_json::json!({ "error": kind, "message": message }).to_string()
}

/// Full entry point; returns the process exit code. Failures print one JSON
/// object `{"error": kind, "message": text}` to `stderr`.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            let _ = writeln!(stderr, "{}", error_json("usage", first));
            return 2;
        }
    };
    match execute(&cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "{}", error_json(e.kind(), &e.to_string()));
            1
        }
    }
}
