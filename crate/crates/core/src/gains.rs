//! Sum multiplexing gain (SMG) and hopping-parameter design.
//!
//! With mean hopping parameters `vbar`, user `i` attains multiplexing gain
//! `(vbar_i / 2) prod_{k != i}(1 - vbar_k / u)`; the SMG is their sum. In a
//! fair system every user uses the same `v` and the SMG is
//! `(N/2) v (1 - v/u)^(N-1)`, maximized at `v = u/N`. A non-integer `v` is
//! realized by randomizing between `floor(v)` and `floor(v) + 1` sub-bands.

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::model::HoppingProfile;

/// Mean hopping parameters of all users, each in `[0, u]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmgProfile {
    vbar: Vec<f64>,
    n_subbands: usize,
}

impl SmgProfile {
    pub fn new(vbar: Vec<f64>, n_subbands: usize) -> Result<Self> {
        if vbar.is_empty() || n_subbands == 0 {
            return Err(Error::InvalidArgument("need at least one user and one sub-band".into()));
        }
        let u = n_subbands as f64;
        if let Some(v) = vbar.iter().find(|v| !(v.is_finite() && **v >= 0.0 && **v <= u)) {
            return Err(Error::InvalidArgument(format!("hopping parameter {v} outside [0, {u}]")));
        }
        Ok(Self { vbar, n_subbands })
    }

    pub fn from_profiles(profiles: &[HoppingProfile], n_subbands: usize) -> Result<Self> {
        Self::new(profiles.iter().map(HoppingProfile::mean_v).collect(), n_subbands)
    }

    pub fn vbar(&self) -> &[f64] {
        &self.vbar
    }

    pub fn n_subbands(&self) -> usize {
        self.n_subbands
    }

    /// Multiplexing gain of user `i`.
    pub fn user_gain(&self, i: usize) -> f64 {
        let u = self.n_subbands as f64;
        let others: f64 = self
            .vbar
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != i)
            .map(|(_, v)| 1.0 - v / u)
            .product();
        0.5 * self.vbar[i] * others
    }
}

/// Sum multiplexing gain.
pub fn smg(profile: &SmgProfile) -> f64 {
    (0..profile.vbar.len()).map(|i| profile.user_gain(i)).sum()
}

/// SMG of the fair system where all `n` users hop over `v` of `u` sub-bands.
pub fn smg_fair(v: f64, n: usize, n_subbands: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let u = n_subbands as f64;
    0.5 * n as f64 * v * (1.0 - v / u).powi(n as i32 - 1)
}

/// Fair hopping parameter maximizing [`smg_fair`] for a known user count.
pub fn v_opt(n: usize, n_subbands: usize) -> f64 {
    n_subbands as f64 / n as f64
}

/// Highest fair SMG, `(u/2)(1 - 1/N)^(N-1)`.
pub fn smg_fair_sup(n: usize, n_subbands: usize) -> f64 {
    smg_fair(v_opt(n, n_subbands), n, n_subbands)
}

/// Two-generator realization of a real hopping parameter: `v_floor` with
/// probability `mu`, `v_ceil = v_floor + 1` otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegerHopMixture {
    pub v_floor: usize,
    pub v_ceil: usize,
    pub mu: f64,
}

impl IntegerHopMixture {
    pub fn mean(&self) -> f64 {
        self.mu * self.v_floor as f64 + (1.0 - self.mu) * self.v_ceil as f64
    }

    /// Equivalent per-slot sub-band count law over `0..=u`.
    pub fn to_profile(&self, n_subbands: usize) -> HoppingProfile {
        let mut pmf = vec![0.0; n_subbands + 1];
        pmf[self.v_floor] += self.mu;
        if self.v_ceil <= n_subbands {
            pmf[self.v_ceil] += 1.0 - self.mu;
        }
        HoppingProfile::Pmf(pmf)
    }
}

pub fn integer_hop_mixture(v: f64, n_subbands: usize) -> Result<IntegerHopMixture> {
    let u = n_subbands as f64;
    if !(v.is_finite() && (0.0..=u).contains(&v)) {
        return Err(Error::InvalidArgument(format!("hopping parameter {v} outside [0, {u}]")));
    }
    let v_floor = v.floor() as usize;
    let v_ceil = v_floor + 1;
    Ok(IntegerHopMixture {
        v_floor,
        v_ceil,
        mu: v_ceil as f64 - v,
    })
}

/// Draws the sub-band count from the profile, then a uniform subset of that
/// size. Returned indices are sorted and zero-based.
pub fn sample_hop<R: Rng + ?Sized>(profile: &HoppingProfile, n_subbands: usize, rng: &mut R) -> Vec<usize> {
    let v = match profile {
        HoppingProfile::Fixed(v) => *v,
        HoppingProfile::Pmf(mu) => {
            let x: f64 = rng.random();
            let mut acc = 0.0;
            let mut pick = mu.len() - 1;
            for (v, p) in mu.iter().enumerate() {
                acc += p;
                if x < acc {
                    pick = v;
                    break;
                }
            }
            // rounding can leave x above the final sum; fall back to the last positive weight
            if x >= acc {
                pick = mu.iter().rposition(|p| *p > 0.0).unwrap_or(0);
            }
            pick
        }
    };
    let mut set = index::sample(rng, n_subbands, v.min(n_subbands)).into_vec();
    set.sort_unstable();
    set
}

/// `sum_i log2((vbar_i/2) prod_{k != i}(1 - vbar_k/u))`, the SNR-free part of
/// the proportional-fair utility. `-inf` when any user's gain is zero.
pub fn proportional_fair_objective(profile: &SmgProfile) -> f64 {
    (0..profile.vbar.len())
        .map(|i| {
            let g = profile.user_gain(i);
            if g > 0.0 {
                g.log2()
            } else {
                f64::NEG_INFINITY
            }
        })
        .sum()
}

/// Full asymptotic proportional-fair utility at SNR `gamma`:
/// the objective plus `N log2 log2 gamma`.
pub fn proportional_fair_utility(profile: &SmgProfile, gamma: f64) -> f64 {
    proportional_fair_objective(profile) + profile.vbar.len() as f64 * gamma.log2().log2()
}
