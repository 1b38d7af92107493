//! Network scenarios, per-user hopping laws and the exact mixed-Gaussian
//! interference spectrum seen on any sub-band at a receiver.
//!
//! Channel gains are real amplitudes `h[k][i]` from transmitter `k` to
//! receiver `i`. A user hopping over `v` sub-bands spreads its power `P`
//! evenly, so an interferer `k` occupying a sub-band adds `|h[k][i]|^2 P / v_k`
//! to the noise floor `sigma^2` there. Summing over every subset of active
//! interferers gives the levels `sigma^2 + c_l P` of the interference mixture.

use crate::error::{Error, Result};
use crate::mixture::GaussianMixture1D;

/// Largest user count accepted by the exhaustive spectrum enumeration.
pub const MAX_ENUMERATION_USERS: usize = 20;

/// Relative tolerance under which two interference variances are one level.
pub const LEVEL_MERGE_RTOL: f64 = 1e-9;

const PMF_SUM_TOL: f64 = 1e-12;

/// The physical instance: user count, sub-band count, gains, power and noise.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkScenario {
    n_users: usize,
    n_subbands: usize,
    /// Row-major `n_users x n_users`, row = transmitter, column = receiver.
    gains: Vec<f64>,
    total_power: f64,
    noise_power: f64,
}

impl NetworkScenario {
    pub fn new(
        n_subbands: usize,
        gains: Vec<Vec<f64>>,
        total_power: f64,
        noise_power: f64,
    ) -> Result<Self> {
        let n_users = gains.len();
        if n_users == 0 {
            return Err(Error::InvalidScenario("at least one user is required".into()));
        }
        if n_subbands == 0 {
            return Err(Error::InvalidScenario("at least one sub-band is required".into()));
        }
        if !(total_power.is_finite() && total_power > 0.0) {
            return Err(Error::InvalidScenario(format!(
                "total power must be positive and finite, got {total_power}"
            )));
        }
        if !(noise_power.is_finite() && noise_power > 0.0) {
            return Err(Error::InvalidScenario(format!(
                "noise power must be positive and finite, got {noise_power}"
            )));
        }
        let mut flat = Vec::with_capacity(n_users * n_users);
        for (k, row) in gains.iter().enumerate() {
            if row.len() != n_users {
                return Err(Error::InvalidScenario(format!(
                    "gain row {k} has {} entries, expected {n_users}",
                    row.len()
                )));
            }
            if let Some(bad) = row.iter().find(|g| !g.is_finite()) {
                return Err(Error::InvalidScenario(format!("non-finite gain {bad} in row {k}")));
            }
            flat.extend_from_slice(row);
        }
        Ok(Self {
            n_users,
            n_subbands,
            gains: flat,
            total_power,
            noise_power,
        })
    }

    /// All direct links `direct`, all cross links `cross`.
    pub fn symmetric(
        n_users: usize,
        n_subbands: usize,
        direct: f64,
        cross: f64,
        total_power: f64,
        noise_power: f64,
    ) -> Result<Self> {
        let gains = (0..n_users)
            .map(|k| (0..n_users).map(|i| if k == i { direct } else { cross }).collect())
            .collect();
        Self::new(n_subbands, gains, total_power, noise_power)
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn n_subbands(&self) -> usize {
        self.n_subbands
    }

    pub fn total_power(&self) -> f64 {
        self.total_power
    }

    pub fn noise_power(&self) -> f64 {
        self.noise_power
    }

    /// `P / sigma^2`.
    pub fn snr(&self) -> f64 {
        self.total_power / self.noise_power
    }

    /// Amplitude gain from transmitter `k` to receiver `i`.
    pub fn gain(&self, k: usize, i: usize) -> f64 {
        self.gains[k * self.n_users + i]
    }

    pub fn gain_sq(&self, k: usize, i: usize) -> f64 {
        let h = self.gain(k, i);
        h * h
    }

    pub fn gain_rows(&self) -> Vec<Vec<f64>> {
        self.gains.chunks(self.n_users).map(<[f64]>::to_vec).collect()
    }

    /// Same network at SNR `gamma`, keeping the noise floor and rescaling `P`.
    pub fn with_snr(&self, gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidArgument(format!("SNR must be positive, got {gamma}")));
        }
        let mut out = self.clone();
        out.total_power = gamma * self.noise_power;
        Ok(out)
    }

    pub(crate) fn check_user(&self, user: usize) -> Result<()> {
        if user >= self.n_users {
            return Err(Error::InvalidArgument(format!(
                "user index {user} out of range for {} users",
                self.n_users
            )));
        }
        Ok(())
    }

    pub(crate) fn check_profiles(&self, profiles: &[HoppingProfile]) -> Result<()> {
        if profiles.len() != self.n_users {
            return Err(Error::InvalidScenario(format!(
                "{} hopping profiles given for {} users",
                profiles.len(),
                self.n_users
            )));
        }
        for (user, p) in profiles.iter().enumerate() {
            p.validate(self.n_subbands)
                .map_err(|reason| Error::InvalidProfile { user, reason })?;
        }
        Ok(())
    }
}

/// How many sub-bands a user occupies in each slot.
#[derive(Debug, Clone, PartialEq)]
pub enum HoppingProfile {
    /// Always exactly `v` sub-bands.
    Fixed(usize),
    /// `pmf[v]` is the probability of occupying `v` sub-bands, `v = 0..=u`.
    Pmf(Vec<f64>),
}

impl HoppingProfile {
    pub fn validate(&self, n_subbands: usize) -> std::result::Result<(), String> {
        match self {
            HoppingProfile::Fixed(v) if *v > n_subbands => {
                Err(format!("v = {v} exceeds the {n_subbands} sub-bands"))
            }
            HoppingProfile::Fixed(_) => Ok(()),
            HoppingProfile::Pmf(mu) => {
                if mu.len() != n_subbands + 1 {
                    return Err(format!(
                        "pmf has {} entries, expected u + 1 = {}",
                        mu.len(),
                        n_subbands + 1
                    ));
                }
                if let Some(bad) = mu.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
                    return Err(format!("pmf weight {bad} is not a probability"));
                }
                let total: f64 = mu.iter().sum();
                if (total - 1.0).abs() > PMF_SUM_TOL {
                    return Err(format!("pmf sums to {total}, expected 1"));
                }
                Ok(())
            }
        }
    }

    /// Expected number of occupied sub-bands.
    pub fn mean_v(&self) -> f64 {
        match self {
            HoppingProfile::Fixed(v) => *v as f64,
            HoppingProfile::Pmf(mu) => mu.iter().enumerate().map(|(v, p)| v as f64 * p).sum(),
        }
    }

    /// `(v, probability)` for every sub-band count with positive probability.
    pub fn law(&self) -> Vec<(usize, f64)> {
        match self {
            HoppingProfile::Fixed(v) => vec![(*v, 1.0)],
            HoppingProfile::Pmf(mu) => mu
                .iter()
                .enumerate()
                .filter(|(_, p)| **p > 0.0)
                .map(|(v, p)| (v, *p))
                .collect(),
        }
    }

    /// Probability that a given sub-band is occupied by this user in a slot.
    pub fn occupancy(&self, n_subbands: usize) -> f64 {
        self.mean_v() / n_subbands as f64
    }

    pub fn is_fixed(&self) -> bool {
        matches!(self, HoppingProfile::Fixed(_))
    }
}

/// One level of the interference mixture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferenceLevel {
    /// Occurrence probability `a_l`.
    pub prob: f64,
    /// Variance increment per unit power, `sigma2 = noise + c * P`.
    pub c: f64,
    pub sigma2: f64,
}

/// Noise-plus-interference law on one sub-band at one receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceSpectrum {
    receiver: usize,
    noise_power: f64,
    total_power: f64,
    levels: Vec<InterferenceLevel>,
}

impl InterferenceSpectrum {
    pub fn receiver(&self) -> usize {
        self.receiver
    }

    /// Levels sorted by variance; the first is always the noise-only level.
    pub fn levels(&self) -> &[InterferenceLevel] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Probability that the sub-band carries no interference.
    pub fn a0(&self) -> f64 {
        self.levels[0].prob
    }

    /// Largest variance increment with positive probability.
    pub fn c_max(&self) -> f64 {
        self.levels
            .iter()
            .rev()
            .find(|l| l.prob > 0.0)
            .map_or(0.0, |l| l.c)
    }

    /// Entropy in bits of the level index.
    pub fn discrete_entropy(&self) -> f64 {
        self.levels
            .iter()
            .filter(|l| l.prob > 0.0)
            .map(|l| -l.prob * l.prob.log2())
            .sum()
    }

    pub fn snr(&self) -> f64 {
        self.total_power / self.noise_power
    }

    pub fn noise_power(&self) -> f64 {
        self.noise_power
    }

    /// Mean noise-plus-interference power.
    pub fn mean_variance(&self) -> f64 {
        self.levels.iter().map(|l| l.prob * l.sigma2).sum()
    }

    pub fn to_mixture(&self) -> GaussianMixture1D {
        GaussianMixture1D::new(self.levels.iter().map(|l| (l.prob, l.sigma2)).collect())
            .expect("spectrum levels form a valid mixture")
    }
}

/// `(probability, variance increment)` outcomes of one interferer on one sub-band.
fn interferer_outcomes(profile: &HoppingProfile, n_subbands: usize, gain_sq: f64) -> Vec<(f64, f64)> {
    let u = n_subbands as f64;
    let mut out = vec![(1.0 - profile.occupancy(n_subbands), 0.0)];
    for (v, mu) in profile.law() {
        if v == 0 {
            continue;
        }
        out.push((mu * v as f64 / u, gain_sq / v as f64));
    }
    out
}

/// Sorts by `c` and merges variances equal within [`LEVEL_MERGE_RTOL`].
/// Merged levels take the probability-weighted `c`, preserving the mean variance.
fn merge_levels(mut levels: Vec<(f64, f64)>, noise: f64, power: f64) -> Vec<(f64, f64)> {
    levels.retain(|(p, _)| *p > 0.0);
    levels.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(levels.len());
    for (p, c) in levels {
        if let Some(last) = merged.last_mut() {
            let s_last = noise + last.1 * power;
            let s_new = noise + c * power;
            if (s_new - s_last).abs() <= LEVEL_MERGE_RTOL * s_new.max(s_last) {
                let total = last.0 + p;
                last.1 = (last.0 * last.1 + p * c) / total;
                last.0 = total;
                continue;
            }
        }
        merged.push((p, c));
    }
    merged
}

/// Exact interference mixture on any sub-band at `receiver`.
///
/// Interferers act independently; each contributes nothing with probability
/// `1 - vbar_k / u` and `|h_ki|^2 P / v` with probability `mu_{k,v} v / u`.
pub fn enumerate_interference_spectrum(
    scenario: &NetworkScenario,
    profiles: &[HoppingProfile],
    receiver: usize,
) -> Result<InterferenceSpectrum> {
    scenario.check_user(receiver)?;
    scenario.check_profiles(profiles)?;
    let n = scenario.n_users();
    if n > MAX_ENUMERATION_USERS {
        return Err(Error::TooLarge {
            what: "interference spectrum",
            size: n as f64,
            limit: MAX_ENUMERATION_USERS as f64,
        });
    }
    let noise = scenario.noise_power();
    let power = scenario.total_power();
    let mut levels = vec![(1.0, 0.0)];
    for (k, profile) in profiles.iter().enumerate() {
        if k == receiver {
            continue;
        }
        let outcomes = interferer_outcomes(profile, scenario.n_subbands(), scenario.gain_sq(k, receiver));
        if outcomes.len() == 1 {
            continue;
        }
        let mut next = Vec::with_capacity(levels.len() * outcomes.len());
        for &(a, c) in &levels {
            for &(p, dc) in &outcomes {
                next.push((a * p, c + dc));
            }
        }
        levels = merge_levels(next, noise, power);
    }
    if levels.first().is_none_or(|l| l.1 != 0.0) {
        levels.insert(0, (0.0, 0.0));
    }
    Ok(InterferenceSpectrum {
        receiver,
        noise_power: noise,
        total_power: power,
        levels: levels
            .into_iter()
            .map(|(prob, c)| InterferenceLevel {
                prob,
                c,
                sigma2: noise + c * power,
            })
            .collect(),
    })
}

/// Probability that a sub-band at `receiver` is free of interference.
pub fn prob_interference_free(profiles: &[HoppingProfile], n_subbands: usize, receiver: usize) -> f64 {
    profiles
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != receiver)
        .map(|(_, p)| 1.0 - p.occupancy(n_subbands))
        .product()
}
