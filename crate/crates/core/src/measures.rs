//! Performance measures for FH, FD and adaptive FH under a random number of
//! active users.
//!
//! `eta1` is the average sum multiplexing gain, `eta2` the average minimum
//! per-user gain (zero whenever some active user is not served), `eta3` the
//! smallest nonzero per-user gain at the worst user count, `eta4` the expected
//! fraction of active users that get a positive gain. Gains are in the same
//! units as `u`; divide by `u` for the normalized figures.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gains::{smg_fair, smg_fair_sup};
use crate::optimize::{maximize, Maximum};

/// Target for the neglected Poisson tail mass.
pub const POISSON_TAIL: f64 = 1e-12;
/// Tolerance on the total mass of a finite user-count table.
pub const PMF_SUM_TOL: f64 = 1e-12;
/// Default backoff `v = u - eps` as a fraction of `u`.
pub const DEFAULT_BACKOFF: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Finite,
    Poisson { lambda: f64 },
}

/// Distribution of the number of active users.
///
/// `probs()[n]` is `Pr{N = n}`. Poisson laws are stored truncated at the first
/// `n >= 20 lambda` whose tail mass is below [`POISSON_TAIL`].
#[derive(Debug, Clone, PartialEq)]
pub struct UserCountPmf {
    kind: Kind,
    q: Vec<f64>,
}

impl UserCountPmf {
    /// `q[n] = Pr{N = n}` for `n = 0..`.
    pub fn finite(q: Vec<f64>) -> Result<Self> {
        if q.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidDistribution("probabilities must be finite and nonnegative".into()));
        }
        let total: f64 = q.iter().sum();
        if (total - 1.0).abs() > PMF_SUM_TOL {
            return Err(Error::InvalidDistribution(format!("probabilities sum to {total}, not 1")));
        }
        if q.iter().skip(1).all(|p| *p == 0.0) {
            return Err(Error::InvalidDistribution("no mass on a positive user count".into()));
        }
        let mut q = q;
        while q.last() == Some(&0.0) {
            q.pop();
        }
        Ok(Self { kind: Kind::Finite, q })
    }

    pub fn poisson(lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidDistribution(format!("Poisson mean must be positive, got {lambda}")));
        }
        if lambda > 1e5 {
            return Err(Error::TooLarge { what: "Poisson mean", size: lambda, limit: 1e5 });
        }
        let ln_lambda = lambda.ln();
        let min_n = (20.0 * lambda).ceil().max(1.0) as usize;
        let mut q = Vec::new();
        let mut ln_fact = 0.0;
        let mut n = 0usize;
        loop {
            if n > 0 {
                ln_fact += (n as f64).ln();
            }
            q.push((-lambda + n as f64 * ln_lambda - ln_fact).exp());
            if n >= min_n && lambda < (n + 2) as f64 {
                let next = (-lambda + (n + 1) as f64 * ln_lambda - ln_fact - ((n + 1) as f64).ln()).exp();
                if next / (1.0 - lambda / (n + 2) as f64) < POISSON_TAIL {
                    break;
                }
            }
            n += 1;
        }
        Ok(Self { kind: Kind::Poisson { lambda }, q })
    }

    pub fn probs(&self) -> &[f64] {
        &self.q
    }

    pub fn lambda(&self) -> Option<f64> {
        match self.kind {
            Kind::Poisson { lambda } => Some(lambda),
            Kind::Finite => None,
        }
    }

    pub fn is_poisson(&self) -> bool {
        self.lambda().is_some()
    }

    /// Largest user count with positive probability; `None` for Poisson.
    pub fn n_max(&self) -> Option<usize> {
        match self.kind {
            Kind::Finite => Some(self.q.len() - 1),
            Kind::Poisson { .. } => None,
        }
    }

    /// Largest `n` kept in [`probs`](Self::probs).
    pub fn truncation(&self) -> usize {
        self.q.len() - 1
    }

    pub fn prob(&self, n: usize) -> f64 {
        self.q.get(n).copied().unwrap_or(0.0)
    }

    pub fn mean(&self) -> f64 {
        match self.kind {
            Kind::Poisson { lambda } => lambda,
            Kind::Finite => self.q.iter().enumerate().map(|(n, p)| n as f64 * p).sum(),
        }
    }

    /// `Pr{1 <= N <= n}`.
    pub fn prob_active_up_to(&self, n: usize) -> f64 {
        self.q.iter().take(n + 1).skip(1).sum()
    }

    fn terms(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.q.iter().copied().enumerate().filter(|(_, p)| *p > 0.0)
    }
}

/// Centralized frequency division designed for `n_des` users.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FdConfig {
    pub n_des: usize,
}

impl FdConfig {
    pub fn new(n_des: usize) -> Result<Self> {
        if n_des == 0 {
            return Err(Error::InvalidArgument("n_des must be positive".into()));
        }
        Ok(Self { n_des })
    }

    /// `min(n_max, u)`; `u` for Poisson user counts.
    pub fn default_for(pmf: &UserCountPmf, n_subbands: usize) -> Self {
        let n_des = pmf.n_max().map_or(n_subbands, |n| n.min(n_subbands)).max(1);
        Self { n_des }
    }

    /// Rejects designs that cannot split `u` evenly.
    pub fn check_divides(&self, n_subbands: usize) -> Result<()> {
        if !n_subbands.is_multiple_of(self.n_des) {
            return Err(Error::InvalidArgument(format!(
                "{n_subbands} sub-bands cannot be split evenly among {} users",
                self.n_des
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Scheme {
    Fh,
    Fd,
    Afh,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Fh => "FH",
            Scheme::Fd => "FD",
            Scheme::Afh => "AFH",
        }
    }
}

/// All four measures for one scheme. `eta3` is absent for unbounded user counts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureReport {
    pub scheme: Scheme,
    pub n_subbands: usize,
    pub eta1: f64,
    pub eta2: f64,
    pub eta3: Option<f64>,
    pub eta4: f64,
    /// FH: the hopping parameter maximizing `eta1`; `eta4` is evaluated there.
    pub v_star: Option<f64>,
    /// FH: the hopping parameter maximizing `eta2`.
    pub v_dagger: Option<f64>,
    pub n_des: Option<usize>,
}

/// Sum gain of FD with `n` active users.
pub fn fd_smg(n_des: usize, n: usize, n_subbands: usize) -> f64 {
    let u = n_subbands as f64;
    if n <= n_des {
        0.5 * n as f64 * u / n_des as f64
    } else {
        0.5 * u
    }
}

pub fn fd_n_served(n_des: usize, n: usize) -> usize {
    n.min(n_des)
}

/// Full-band hopping (`v = u`) only serves a lone user.
pub fn fh_n_served(v: f64, n: usize, n_subbands: usize) -> usize {
    if n == 1 || v < n_subbands as f64 {
        n
    } else {
        0
    }
}

fn check_v(v: f64, n_subbands: usize) -> Result<()> {
    if !(v.is_finite() && (0.0..=n_subbands as f64).contains(&v)) {
        return Err(Error::InvalidArgument(format!("hopping parameter {v} outside [0, {n_subbands}]")));
    }
    Ok(())
}

fn check_u(n_subbands: usize) -> Result<()> {
    if n_subbands == 0 {
        return Err(Error::InvalidArgument("need at least one sub-band".into()));
    }
    Ok(())
}

/// `E{smg_fair(v, N)}`.
pub fn eta1_fh_at(pmf: &UserCountPmf, v: f64, n_subbands: usize) -> f64 {
    pmf.terms().map(|(n, p)| p * smg_fair(v, n, n_subbands)).sum()
}

/// `E{smg_fair(v, N)/N * 1(all N served)}`; at `v = u` only `N = 1` counts.
pub fn eta2_fh_at(pmf: &UserCountPmf, v: f64, n_subbands: usize) -> f64 {
    if v >= n_subbands as f64 {
        return pmf.prob(1) * 0.5 * n_subbands as f64;
    }
    pmf.terms()
        .filter(|(n, _)| *n > 0 && fh_n_served(v, *n, n_subbands) == *n)
        .map(|(n, p)| p * smg_fair(v, n, n_subbands) / n as f64)
        .sum()
}

/// Robust hopping parameter for the average sum gain: `(eta1, v*)`.
pub fn eta1_fh(pmf: &UserCountPmf, n_subbands: usize) -> Result<Maximum> {
    check_u(n_subbands)?;
    Ok(maximize(|v| eta1_fh_at(pmf, v, n_subbands), 0.0, n_subbands as f64))
}

/// Robust hopping parameter for the average minimum gain: `(eta2, v_dagger)`.
pub fn eta2_fh(pmf: &UserCountPmf, n_subbands: usize) -> Result<Maximum> {
    check_u(n_subbands)?;
    let u = n_subbands as f64;
    // the objective jumps at v = u, so the endpoint is scored on its own
    let interior = maximize(|v| if v < u { eta2_fh_at(pmf, v, n_subbands) } else { 0.0 }, 0.0, u);
    let edge = Maximum { x: u, value: eta2_fh_at(pmf, u, n_subbands) };
    Ok(if edge.value > interior.value { edge } else { interior })
}

pub fn eta1_fd(pmf: &UserCountPmf, fd: FdConfig, n_subbands: usize) -> f64 {
    pmf.terms().map(|(n, p)| p * fd_smg(fd.n_des, n, n_subbands)).sum()
}

/// `(u / (2 n_des)) Pr{1 <= N <= n_des}`.
pub fn eta2_fd(pmf: &UserCountPmf, fd: FdConfig, n_subbands: usize) -> f64 {
    0.5 * n_subbands as f64 / fd.n_des as f64 * pmf.prob_active_up_to(fd.n_des)
}

/// Closed-form `(eta1, v*)` for Poisson user counts.
pub fn eta1_fh_poisson_closed(lambda: f64, n_subbands: usize) -> (f64, f64) {
    let u = n_subbands as f64;
    if lambda <= 1.0 {
        (0.5 * lambda * (-lambda).exp() * u, u)
    } else {
        (u / (2.0 * std::f64::consts::E), u / lambda)
    }
}

/// Closed-form `(eta2, omega)` for Poisson user counts, `omega = 1 - v/u`.
///
/// `omega` solves `exp(-lambda w) = 1 - lambda w + lambda w^2` on `(0, 1)`;
/// for `lambda <= 2` the optimum sits at `v = u` and `omega = 0`.
pub fn eta2_fh_poisson_closed(lambda: f64, n_subbands: usize) -> Result<(f64, f64)> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidDistribution(format!("Poisson mean must be positive, got {lambda}")));
    }
    let u = n_subbands as f64;
    if lambda <= 2.0 {
        return Ok((0.5 * lambda * (-lambda).exp() * u, 0.0));
    }
    let g = |w: f64| (-lambda * w).exp() - 1.0 + lambda * w - lambda * w * w;
    const SCAN: usize = 1000;
    let mut lo = 0.0;
    let mut hi = 1.0;
    for k in 1..=SCAN {
        let w = k as f64 / SCAN as f64;
        if g(w) < 0.0 {
            hi = w;
            break;
        }
        lo = w;
    }
    if lo == 0.0 {
        // the root is closer to zero than the scan step
        lo = f64::MIN_POSITIVE;
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let w = 0.5 * (lo + hi);
    let value = (-lambda).exp() * (1.0 - w) * (lambda * w).exp_m1() * u / (2.0 * w);
    Ok((value, w))
}

/// FD's smallest nonzero per-user gain, `u / (2 n_des)`.
pub fn eta3_fd(fd: FdConfig, n_subbands: usize) -> f64 {
    0.5 * n_subbands as f64 / fd.n_des as f64
}

/// FH's smallest nonzero per-user gain over `1..=n_max` users with a common `v`.
pub fn eta3_fh(n_max: usize, n_subbands: usize, v: f64) -> Result<f64> {
    check_v(v, n_subbands)?;
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be positive".into()));
    }
    let smallest = (1..=n_max)
        .map(|n| smg_fair(v, n, n_subbands) / n as f64)
        .filter(|g| *g > 0.0)
        .fold(f64::INFINITY, f64::min);
    Ok(if smallest.is_finite() { smallest } else { 0.0 })
}

/// `eta3_fh / eta3_fd` with `v = u / n_max` and `n_des = n_max`.
pub fn eta3_ratio(n_max: usize) -> f64 {
    (1.0 - 1.0 / n_max as f64).powi(n_max as i32 - 1)
}

/// Expected served fraction for FH. An empty network counts as fully served.
pub fn eta4_fh(pmf: &UserCountPmf, v: f64, n_subbands: usize) -> Result<f64> {
    check_v(v, n_subbands)?;
    Ok(if v < n_subbands as f64 { 1.0 } else { pmf.prob(0) + pmf.prob(1) })
}

/// `1 - sum_{n > n_des} q_n (1 - n_des / n)`.
pub fn eta4_fd(pmf: &UserCountPmf, fd: FdConfig) -> f64 {
    let lost: f64 = pmf
        .terms()
        .filter(|(n, _)| *n > fd.n_des)
        .map(|(n, p)| p * (1.0 - fd.n_des as f64 / n as f64))
        .sum();
    1.0 - lost
}

/// Average sum gain when every user re-tunes to `v = u/N`.
pub fn eta1_afh(pmf: &UserCountPmf, n_subbands: usize) -> f64 {
    pmf.terms().map(|(n, p)| p * smg_fair_sup(n, n_subbands)).sum()
}

/// Average per-user gain when every user re-tunes to `v = u/N`.
pub fn eta2_afh(pmf: &UserCountPmf, n_subbands: usize) -> f64 {
    pmf.terms()
        .filter(|(n, _)| *n > 0)
        .map(|(n, p)| p * smg_fair_sup(n, n_subbands) / n as f64)
        .sum()
}

/// Hopping parameter actually used when full service is required:
/// `v` itself if below `u`, otherwise `u - eps`.
pub fn service_parameter(v: f64, n_subbands: usize, eps: f64) -> Result<f64> {
    let u = n_subbands as f64;
    if !(eps > 0.0 && eps < 0.5 * u) {
        return Err(Error::InvalidArgument(format!("backoff {eps} outside (0, u/2)")));
    }
    Ok(if v < u { v } else { u - eps })
}

/// Two-user networks: FH at `v = u - eps` beats FD on the average sum gain
/// iff `q1 > k q2`; returns `k`.
pub fn backoff_q2_multiplier_eta1(eps: f64, n_subbands: usize) -> Result<f64> {
    let e = backoff_fraction(eps, n_subbands)?;
    Ok(2.0 * (1.0 - 2.0 * e * (1.0 - e)) / (1.0 - 2.0 * e))
}

/// Two-user networks: FH at `v = u - eps` beats FD on the average minimum
/// gain iff `q1` exceeds the returned threshold.
pub fn backoff_q1_threshold_eta2(eps: f64, n_subbands: usize) -> Result<f64> {
    let t = 1.0 - backoff_fraction(eps, n_subbands)?;
    Ok(1.0 - (2.0 * t - 1.0) / (2.0 * t * t))
}

fn backoff_fraction(eps: f64, n_subbands: usize) -> Result<f64> {
    let u = n_subbands as f64;
    if !(eps >= 0.0 && eps < 0.5 * u) {
        return Err(Error::InvalidArgument(format!("backoff {eps} outside [0, u/2)")));
    }
    Ok(eps / u)
}

/// FH at `v = u - eps` against FD on both average measures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BackoffComparison {
    pub v: f64,
    pub fh_eta1: f64,
    pub fd_eta1: f64,
    pub fh_eta2: f64,
    pub fd_eta2: f64,
}

impl BackoffComparison {
    pub fn fh_wins_eta1(&self) -> bool {
        self.fh_eta1 > self.fd_eta1
    }

    pub fn fh_wins_eta2(&self) -> bool {
        self.fh_eta2 > self.fd_eta2
    }
}

pub fn backoff_comparison(pmf: &UserCountPmf, fd: FdConfig, n_subbands: usize, eps: f64) -> Result<BackoffComparison> {
    let v = n_subbands as f64 - eps;
    backoff_fraction(eps, n_subbands)?;
    Ok(BackoffComparison {
        v,
        fh_eta1: eta1_fh_at(pmf, v, n_subbands),
        fd_eta1: eta1_fd(pmf, fd, n_subbands),
        fh_eta2: eta2_fh_at(pmf, v, n_subbands),
        fd_eta2: eta2_fd(pmf, fd, n_subbands),
    })
}

/// Outcome of a sufficient-condition check: whether the condition holds and
/// whether FH beats FD when computed directly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PropositionCheck {
    pub mean_users: f64,
    pub condition: bool,
    pub fh_value: f64,
    pub fd_value: f64,
    pub fh_wins: bool,
}

impl PropositionCheck {
    /// False only when the condition holds but FH does not win.
    pub fn consistent(&self) -> bool {
        !self.condition || self.fh_wins
    }
}

fn finite_n_max(pmf: &UserCountPmf) -> Result<usize> {
    pmf.n_max().ok_or_else(|| Error::InvalidDistribution("needs a finite user-count table".into()))
}

/// `E{N} < ln((e^2 - 1) n_max) / 2` is sufficient for FH to beat FD
/// (`n_des = n_max`) on the average sum gain. Both measures scale with `u`,
/// so they are compared at `u = n_max`.
pub fn proposition1_check(pmf: &UserCountPmf) -> Result<PropositionCheck> {
    let n_max = finite_n_max(pmf)?;
    let mean = pmf.mean();
    let e2 = std::f64::consts::E * std::f64::consts::E;
    let fh = eta1_fh(pmf, n_max)?.value;
    let fd = eta1_fd(pmf, FdConfig { n_des: n_max }, n_max);
    Ok(PropositionCheck {
        mean_users: mean,
        condition: mean < 0.5 * ((e2 - 1.0) * n_max as f64).ln(),
        fh_value: fh,
        fd_value: fd,
        fh_wins: fh > fd,
    })
}

/// `(1/E{N}) (1 - 1/E{N})^(E{N} - 1) > 1/n_max` is sufficient for FH to beat
/// FD (`n_des = n_max`) on the average minimum gain.
pub fn proposition2_check(pmf: &UserCountPmf) -> Result<PropositionCheck> {
    let n_max = finite_n_max(pmf)?;
    let mean = pmf.mean();
    let fh = eta2_fh(pmf, n_max)?.value;
    let fd = eta2_fd(pmf, FdConfig { n_des: n_max }, n_max);
    Ok(PropositionCheck {
        mean_users: mean,
        condition: (1.0 - 1.0 / mean).powf(mean - 1.0) / mean > 1.0 / n_max as f64,
        fh_value: fh,
        fd_value: fd,
        fh_wins: fh > fd,
    })
}

pub fn fh_report(pmf: &UserCountPmf, n_subbands: usize) -> Result<MeasureReport> {
    let m1 = eta1_fh(pmf, n_subbands)?;
    let m2 = eta2_fh(pmf, n_subbands)?;
    let eta3 = match pmf.n_max() {
        Some(n_max) => Some(eta3_fh(n_max, n_subbands, n_subbands as f64 / n_max as f64)?),
        None => None,
    };
    Ok(MeasureReport {
        scheme: Scheme::Fh,
        n_subbands,
        eta1: m1.value,
        eta2: m2.value,
        eta3,
        eta4: eta4_fh(pmf, m1.x, n_subbands)?,
        v_star: Some(m1.x),
        v_dagger: Some(m2.x),
        n_des: None,
    })
}

pub fn fd_report(pmf: &UserCountPmf, fd: FdConfig, n_subbands: usize) -> Result<MeasureReport> {
    check_u(n_subbands)?;
    Ok(MeasureReport {
        scheme: Scheme::Fd,
        n_subbands,
        eta1: eta1_fd(pmf, fd, n_subbands),
        eta2: eta2_fd(pmf, fd, n_subbands),
        eta3: pmf.n_max().map(|_| eta3_fd(fd, n_subbands)),
        eta4: eta4_fd(pmf, fd),
        v_star: None,
        v_dagger: None,
        n_des: Some(fd.n_des),
    })
}

pub fn afh_report(pmf: &UserCountPmf, n_subbands: usize) -> Result<MeasureReport> {
    check_u(n_subbands)?;
    let eta3 = pmf
        .n_max()
        .map(|n_max| 0.5 * n_subbands as f64 / n_max as f64 * eta3_ratio(n_max));
    Ok(MeasureReport {
        scheme: Scheme::Afh,
        n_subbands,
        eta1: eta1_afh(pmf, n_subbands),
        eta2: eta2_afh(pmf, n_subbands),
        eta3,
        eta4: 1.0,
        v_star: None,
        v_dagger: None,
        n_des: None,
    })
}

/// One point of a Poisson load sweep; FD uses `n_des = u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub lambda: f64,
    pub n_subbands: usize,
    pub eta1_fh: f64,
    pub v_star: f64,
    pub eta2_fh: f64,
    pub v_dagger: f64,
    pub eta1_fd: f64,
    pub eta2_fd: f64,
    pub eta4_fd: f64,
    pub eta1_afh: f64,
    pub eta2_afh: f64,
}

pub fn poisson_sweep_point(lambda: f64, n_subbands: usize) -> Result<SweepPoint> {
    check_u(n_subbands)?;
    let pmf = UserCountPmf::poisson(lambda)?;
    let fd = FdConfig { n_des: n_subbands };
    let m1 = eta1_fh(&pmf, n_subbands)?;
    let m2 = eta2_fh(&pmf, n_subbands)?;
    Ok(SweepPoint {
        lambda,
        n_subbands,
        eta1_fh: m1.value,
        v_star: m1.x,
        eta2_fh: m2.value,
        v_dagger: m2.x,
        eta1_fd: eta1_fd(&pmf, fd, n_subbands),
        eta2_fd: eta2_fd(&pmf, fd, n_subbands),
        eta4_fd: eta4_fd(&pmf, fd),
        eta1_afh: eta1_afh(&pmf, n_subbands),
        eta2_afh: eta2_afh(&pmf, n_subbands),
    })
}

/// Evaluates every `(lambda, u)` pair in parallel; rows come back in
/// `u`-major, `lambda`-minor order.
pub fn poisson_sweep(lambdas: &[f64], subbands: &[usize]) -> Result<Vec<SweepPoint>> {
    let grid: Vec<(f64, usize)> = subbands.iter().flat_map(|&u| lambdas.iter().map(move |&l| (l, u))).collect();
    grid.into_par_iter().map(|(l, u)| poisson_sweep_point(l, u)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two(q1: f64) -> UserCountPmf {
        UserCountPmf::finite(vec![0.0, q1, 1.0 - q1]).unwrap()
    }

    fn ten_point() -> UserCountPmf {
        let mut q = vec![0.0, 0.22, 0.24, 0.24, 0.24];
        q.extend([0.01; 6]);
        UserCountPmf::finite(q).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn pmf_validation() {
        assert!(UserCountPmf::finite(vec![0.0, 0.5, 0.4]).is_err());
        assert!(UserCountPmf::finite(vec![1.0]).is_err());
        assert!(UserCountPmf::finite(vec![0.0, -0.1, 1.1]).is_err());
        assert!(UserCountPmf::poisson(0.0).is_err());
        let p = UserCountPmf::finite(vec![0.0, 0.5, 0.5, 0.0]).unwrap();
        assert_eq!(p.n_max(), Some(2));
        assert!(close(ten_point().mean(), 2.83, 1e-12));
    }

    #[test]
    fn poisson_truncation() {
        for lambda in [0.01, 0.5, 3.0, 10.0, 40.0] {
            let p = UserCountPmf::poisson(lambda).unwrap();
            assert!(p.truncation() as f64 >= 20.0 * lambda);
            let kept: f64 = p.probs().iter().sum();
            assert!(1.0 - kept < 1e-12, "lambda {lambda}: {}", 1.0 - kept);
            let mean: f64 = p.probs().iter().enumerate().map(|(n, q)| n as f64 * q).sum();
            assert!(close(mean, lambda, 1e-10 * lambda.max(1.0)));
        }
    }

    #[test]
    fn fd_pieces() {
        assert_eq!(fd_smg(2, 1, 4), 1.0);
        assert_eq!(fd_smg(3, 3, 6), 3.0);
        assert_eq!(fd_smg(3, 7, 6), 3.0);
        assert_eq!(fd_n_served(3, 5), 3);
        assert_eq!(fh_n_served(4.0, 1, 4), 1);
        assert_eq!(fh_n_served(4.0, 2, 4), 0);
        assert_eq!(fh_n_served(3.9, 2, 4), 2);
        assert!(FdConfig::new(3).unwrap().check_divides(4).is_err());
        assert!(FdConfig::new(2).unwrap().check_divides(4).is_ok());
        assert_eq!(FdConfig::default_for(&ten_point(), 7).n_des, 7);
        assert_eq!(FdConfig::default_for(&ten_point(), 12).n_des, 10);
    }

    #[test]
    fn eta1_two_user_closed_forms() {
        let m = eta1_fh(&two(0.8), 1).unwrap();
        assert_eq!(m.x, 1.0);
        assert!(close(m.value, 0.4, 1e-12));
        let m = eta1_fh(&two(0.4), 3).unwrap();
        assert!(close(m.x, 2.0, 1e-6));
        assert!(close(m.value, 1.6f64.powi(2) * 3.0 / (16.0 * 0.6), 1e-12));
        let fd = eta1_fd(&two(0.4), FdConfig { n_des: 2 }, 4);
        assert!(close(fd, (0.4 + 1.2) * 4.0 / 4.0, 1e-12));
    }

    #[test]
    fn eta1_poisson() {
        for lambda in [2.0, 5.0, 10.0] {
            let m = eta1_fh(&UserCountPmf::poisson(lambda).unwrap(), 6).unwrap();
            let (value, v) = eta1_fh_poisson_closed(lambda, 6);
            assert!(close(m.value, value, 1e-9 * 6.0));
            assert!(close(m.x, v, 1e-6 * 6.0));
        }
        let p = UserCountPmf::poisson(0.5).unwrap();
        let m = eta1_fh(&p, 2).unwrap();
        assert_eq!(m.x, 2.0);
        assert!(close(m.value, eta1_fh_poisson_closed(0.5, 2).0, 1e-12));
    }

    #[test]
    fn eta2_two_user_closed_forms() {
        let m = eta2_fh(&two(0.3), 7).unwrap();
        assert!(close(m.x, 7.0 / 1.4, 1e-6));
        assert!(close(m.value, 7.0 / (8.0 * 0.7), 1e-12));
        assert!(close(eta2_fd(&two(0.3), FdConfig { n_des: 2 }, 8), 2.0, 1e-15));
        // a lone user dominating makes full-band hopping optimal
        let m = eta2_fh(&two(0.9), 4).unwrap();
        assert_eq!(m.x, 4.0);
        assert!(close(m.value, 0.9 * 2.0, 1e-12));
    }

    #[test]
    fn eta2_ten_point() {
        let m = eta2_fh(&ten_point(), 1).unwrap();
        assert!(close(m.x, 0.72, 0.005), "{m:?}");
        assert!(close(m.value, 0.1121, 0.0005));
        assert!(close(eta2_fd(&ten_point(), FdConfig { n_des: 10 }, 1), 0.05, 1e-15));
    }

    #[test]
    fn eta2_poisson_closed_agrees_with_optimizer() {
        for lambda in [1.5, 3.0, 5.5, 10.0] {
            let (value, w) = eta2_fh_poisson_closed(lambda, 1).unwrap();
            let m = eta2_fh(&UserCountPmf::poisson(lambda).unwrap(), 1).unwrap();
            assert!(close(value, m.value, 1e-4), "lambda {lambda}");
            assert!(close(1.0 - w, m.x, 1e-3), "lambda {lambda}: {w} vs {}", m.x);
            let at = eta2_fh_at(&UserCountPmf::poisson(lambda).unwrap(), 1.0 - w, 1);
            assert!(close(value, at, 1e-9));
        }
        let (value, w) = eta2_fh_poisson_closed(5.0, 1).unwrap();
        assert!(close(w, 0.7347, 0.0005) && close(value, 0.0467, 0.0005));
    }

    #[test]
    fn eta2_fd_poisson_matches_series() {
        let p = UserCountPmf::poisson(3.0).unwrap();
        let mut term = (-3.0f64).exp();
        let mut series = 0.0;
        for n in 1..=5 {
            term *= 3.0 / n as f64;
            series += term;
        }
        assert!(close(eta2_fd(&p, FdConfig { n_des: 5 }, 5), 0.5 * series, 1e-14));
    }

    #[test]
    fn eta3_values() {
        assert_eq!(eta3_ratio(1), 1.0);
        assert_eq!(eta3_ratio(2), 0.5);
        let r = eta3_ratio(50);
        assert!(r > (-1.0f64).exp() && r < 0.375);
        assert!(close(eta3_fh(4, 8, 2.0).unwrap() / eta3_fd(FdConfig { n_des: 4 }, 8), eta3_ratio(4), 1e-15));
        assert_eq!(eta3_fh(3, 4, 4.0).unwrap(), 2.0);
        assert_eq!(eta3_fh(3, 4, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn eta4_values() {
        let p = UserCountPmf::poisson(3.0).unwrap();
        assert!(close(eta4_fd(&p, FdConfig { n_des: 5 }), 0.9806, 0.0005));
        assert_eq!(eta4_fh(&p, 5.0 / 3.0, 5).unwrap(), 1.0);
        assert_eq!(eta4_fh(&two(0.3), 4.0, 4).unwrap(), 0.3);
        assert_eq!(eta4_fd(&two(0.3), FdConfig { n_des: 2 }), 1.0);
    }

    #[test]
    fn backoff_thresholds() {
        assert!(close(backoff_q2_multiplier_eta1(0.0, 4).unwrap(), 2.0, 1e-15));
        assert!(close(backoff_q2_multiplier_eta1(0.4, 4).unwrap(), 2.05, 1e-12));
        assert!(close(backoff_q1_threshold_eta2(0.0, 4).unwrap(), 0.5, 1e-15));
        assert!(backoff_q2_multiplier_eta1(2.0, 4).is_err());
        // the thresholds are where the direct comparison flips
        let (u, eps) = (4, 0.4);
        let k = backoff_q2_multiplier_eta1(eps, u).unwrap();
        let q1 = k / (1.0 + k);
        let fd = FdConfig { n_des: 2 };
        assert!(backoff_comparison(&two(q1 + 1e-6), fd, u, eps).unwrap().fh_wins_eta1());
        assert!(!backoff_comparison(&two(q1 - 1e-6), fd, u, eps).unwrap().fh_wins_eta1());
        let t = backoff_q1_threshold_eta2(eps, u).unwrap();
        assert!(backoff_comparison(&two(t + 1e-6), fd, u, eps).unwrap().fh_wins_eta2());
        assert!(!backoff_comparison(&two(t - 1e-6), fd, u, eps).unwrap().fh_wins_eta2());
        assert_eq!(service_parameter(4.0, 4, 0.004).unwrap(), 3.996);
        assert_eq!(service_parameter(2.0, 4, 0.004).unwrap(), 2.0);
    }

    #[test]
    fn afh_values() {
        let single = UserCountPmf::finite(vec![0.0, 0.0, 0.0, 1.0]).unwrap();
        assert!(close(eta1_afh(&single, 6), smg_fair_sup(3, 6), 1e-15));
        let p = UserCountPmf::poisson(1.0).unwrap();
        assert!(eta1_afh(&p, 2) >= (-1.0f64).exp());
        assert!(eta1_afh(&p, 2) >= eta1_fh(&p, 2).unwrap().value);
    }

    #[test]
    fn proposition_examples() {
        let c = proposition1_check(&two(0.9)).unwrap();
        assert!(c.condition && c.fh_wins);
        let c = proposition1_check(&two(0.7)).unwrap();
        assert!(!c.condition && c.fh_wins);
        let c = proposition2_check(&ten_point()).unwrap();
        assert!(c.condition && c.fh_wins);
        let c = proposition2_check(&UserCountPmf::finite(vec![0.0, 0.0, 0.0, 0.0, 1.0]).unwrap()).unwrap();
        assert!(!c.condition);
        assert!(proposition1_check(&UserCountPmf::poisson(2.0).unwrap()).is_err());
    }

    #[test]
    fn reports() {
        let p = ten_point();
        let fh = fh_report(&p, 10).unwrap();
        assert!(fh.eta1 >= fh.eta2);
        let fd = fd_report(&p, FdConfig::default_for(&p, 10), 10).unwrap();
        assert_eq!(fd.eta3, Some(0.5));
        let afh = afh_report(&p, 10).unwrap();
        assert!(afh.eta1 >= fh.eta1);
        assert_eq!(fh_report(&UserCountPmf::poisson(3.0).unwrap(), 5).unwrap().eta3, None);
    }

    #[test]
    fn sweep_order() {
        let rows = poisson_sweep(&[2.0, 3.0], &[7, 20]).unwrap();
        let keys: Vec<(f64, usize)> = rows.iter().map(|r| (r.lambda, r.n_subbands)).collect();
        assert_eq!(keys, vec![(2.0, 7), (3.0, 7), (2.0, 20), (3.0, 20)]);
    }
}
