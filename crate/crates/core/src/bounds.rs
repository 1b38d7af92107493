//! Achievable-rate bounds for one user of the hopping network.
//!
//! The user's state (which sub-bands it picked) is known at both ends and by
//! symmetry can be fixed to the first `v` sub-bands. The rate is then
//! `h(Y) - h(Z)` with `Y` and `Z` vector Gaussian mixtures. The upper bound
//! averages the Gaussian-channel rate over interference realizations
//! (convexity); the lower bound applies the entropy power inequality on the
//! user's own sub-bands and bounds each coordinate's mixture entropy.
//! Both grow as `(vbar/2) a0 log2(SNR)` with `a0` the interference-free
//! probability.
//!
//! All rates are in bits per slot (sum over sub-bands).

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::mixture::{GaussianMixtureDiag, McEstimate};
use crate::model::{enumerate_interference_spectrum, prob_interference_free, HoppingProfile, NetworkScenario};

/// SNR decade ladder used for convergence sweeps.
pub const GAMMA_LADDER: [f64; 7] = [1e2, 1e3, 1e4, 1e5, 1e6, 1e7, 1e8];

/// Largest number of distinct interference-vector components the Monte-Carlo
/// mutual-information estimator will build.
pub const MAX_VECTOR_COMPONENTS: usize = 200_000;

/// A rate bound split into its SNR-scaling part and a saturating residual.
///
/// For the upper bound `value = sum_v mu_v (v a0 / 2) log2(1 + |h|^2 SNR / v) + residual`;
/// for the lower bound `value = slope * log2(SNR) + residual`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateBound {
    pub value_bits: f64,
    /// Coefficient of `log2(SNR)`, the multiplexing gain.
    pub slope: f64,
    pub residual_bits: f64,
}

/// Expected number of the user's sub-bands that carry no interference.
pub fn expected_free_subbands(scenario: &NetworkScenario, profiles: &[HoppingProfile], user: usize) -> Result<f64> {
    scenario.check_user(user)?;
    scenario.check_profiles(profiles)?;
    Ok(profiles[user].mean_v() * prob_interference_free(profiles, scenario.n_subbands(), user))
}

/// `vbar_i / 2 * prod_{k != i}(1 - vbar_k / u)`.
pub fn asymptotic_multiplexing_gain(profiles: &[HoppingProfile], n_subbands: usize, user: usize) -> f64 {
    0.5 * profiles[user].mean_v() * prob_interference_free(profiles, n_subbands, user)
}

pub fn upper_bound_rate(scenario: &NetworkScenario, profiles: &[HoppingProfile], user: usize) -> Result<RateBound> {
    let spectrum = enumerate_interference_spectrum(scenario, profiles, user)?;
    let direct = scenario.gain_sq(user, user) * scenario.total_power();
    let gamma = scenario.snr();
    let a0 = spectrum.a0();
    let mut bound = RateBound { value_bits: 0.0, slope: 0.0, residual_bits: 0.0 };
    for (v, mu) in profiles[user].law() {
        if v == 0 {
            continue;
        }
        let vf = v as f64;
        // every interference realization is a parallel Gaussian channel; averaging
        // its rate over realizations only needs each sub-band's marginal law
        let residual: f64 = spectrum.levels()[1..]
            .iter()
            .map(|l| l.prob * (1.0 + direct / (vf * l.sigma2)).log2())
            .sum::<f64>()
            * vf
            / 2.0;
        let free = 0.5 * vf * a0 * (1.0 + scenario.gain_sq(user, user) * gamma / vf).log2();
        bound.value_bits += mu * (free + residual);
        bound.slope += mu * 0.5 * vf * a0;
        bound.residual_bits += mu * residual;
    }
    Ok(bound)
}

pub fn lower_bound_rate(scenario: &NetworkScenario, profiles: &[HoppingProfile], user: usize) -> Result<RateBound> {
    let spectrum = enumerate_interference_spectrum(scenario, profiles, user)?;
    let gamma = scenario.snr();
    let g = scenario.gain_sq(user, user);
    let a0 = spectrum.a0();
    let c_top = spectrum.c_max();
    let penalty = (-2.0 * spectrum.discrete_entropy()).exp2();
    let mut bound = RateBound { value_bits: 0.0, slope: 0.0, residual_bits: 0.0 };
    for (v, mu) in profiles[user].law() {
        if v == 0 {
            continue;
        }
        let vf = v as f64;
        let value = 0.5 * vf * (penalty * g * gamma / (vf * (c_top * gamma + 1.0).powf(1.0 - a0)) + 1.0).log2();
        let residual =
            0.5 * vf * (penalty * g / (vf * (c_top + 1.0 / gamma).powf(1.0 - a0)) + gamma.powf(-a0)).log2();
        bound.value_bits += mu * value;
        bound.slope += mu * 0.5 * vf * a0;
        bound.residual_bits += mu * residual;
    }
    Ok(bound)
}

fn check_regulation_args(scenario: &NetworkScenario, user: usize, n_active: usize, v_star: f64) -> Result<()> {
    scenario.check_user(user)?;
    let u = scenario.n_subbands() as f64;
    if n_active == 0 {
        return Err(Error::InvalidArgument("at least one active user is required".into()));
    }
    if !(v_star.is_finite() && v_star > 0.0 && v_star <= u) {
        return Err(Error::InvalidArgument(format!("hopping parameter {v_star} outside (0, {u}]")));
    }
    Ok(())
}

fn regulated(scenario: &NetworkScenario, user: usize, n_active: usize, v_star: f64, sign: f64) -> f64 {
    let u = scenario.n_subbands() as f64;
    let gamma = scenario.snr();
    let p = v_star / u;
    let others = (n_active - 1) as f64;
    let spread = p.powf(sign * 2.0 * others * p) * (1.0 - p).powf(sign * 2.0 * others * (1.0 - p));
    let interference: f64 = (0..scenario.n_users())
        .filter(|j| *j != user)
        .map(|j| scenario.gain_sq(j, user))
        .sum();
    let exposure = 1.0 - (1.0 - p).powi(n_active as i32 - 1);
    let denom = v_star * (1.0 + interference * gamma / v_star).powf(exposure);
    0.5 * v_star * (spread * scenario.gain_sq(user, user) * gamma / denom + 1.0).log2()
}

/// Operating rate a transmitter picks from its direct gain, the total cross
/// gain into its receiver and the number of active users, as published:
/// the occupancy-entropy factor `p^(-2(N-1)p) (1-p)^(-2(N-1)(1-p))`,
/// `p = v/u`, multiplies the SNR term.
pub fn regulated_rate(scenario: &NetworkScenario, user: usize, n_active: usize, v_star: f64) -> Result<f64> {
    check_regulation_args(scenario, user, n_active, v_star)?;
    Ok(regulated(scenario, user, n_active, v_star, -1.0))
}

/// [`regulated_rate`] with the occupancy-entropy factor inverted, so that it
/// is the lower bound evaluated with the largest possible level entropy
/// `(N-1) H_b(v/u)` and the all-interferers-active level. Never exceeds
/// [`lower_bound_rate`] for a fair network with integer `v_star`.
pub fn conservative_regulated_rate(scenario: &NetworkScenario, user: usize, n_active: usize, v_star: f64) -> Result<f64> {
    check_regulation_args(scenario, user, n_active, v_star)?;
    Ok(regulated(scenario, user, n_active, v_star, 1.0))
}

fn subsets(n_subbands: usize, size: usize) -> impl Iterator<Item = u64> {
    (0u64..1 << n_subbands).filter(move |m| m.count_ones() as usize == size)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Joint law of the noise-plus-interference vector over all `u` sub-bands at
/// `user`'s receiver: one diagonal component per distinct pattern of
/// interferer sub-band choices.
pub fn interference_vector_mixture(
    scenario: &NetworkScenario,
    profiles: &[HoppingProfile],
    user: usize,
) -> Result<GaussianMixtureDiag> {
    scenario.check_user(user)?;
    scenario.check_profiles(profiles)?;
    let u = scenario.n_subbands();
    if u > 20 {
        return Err(Error::TooLarge { what: "sub-band count for vector mixtures", size: u as f64, limit: 20.0 });
    }
    let noise = scenario.noise_power();
    let mut states: BTreeMap<Vec<u64>, f64> = BTreeMap::new();
    states.insert(vec![noise.to_bits(); u], 1.0);
    for (k, profile) in profiles.iter().enumerate() {
        if k == user {
            continue;
        }
        let mut options: Vec<(f64, u64, f64)> = Vec::new();
        for (v, mu) in profile.law() {
            if v == 0 {
                options.push((mu, 0, 0.0));
                continue;
            }
            let w = mu / binomial(u, v);
            let add = scenario.gain_sq(k, user) * scenario.total_power() / v as f64;
            options.extend(subsets(u, v).map(|m| (w, m, add)));
        }
        let projected = states.len() * options.len();
        if projected > MAX_VECTOR_COMPONENTS * 8 {
            return Err(Error::TooLarge {
                what: "interference vector mixture",
                size: projected as f64,
                limit: (MAX_VECTOR_COMPONENTS * 8) as f64,
            });
        }
        let mut next: BTreeMap<Vec<u64>, f64> = BTreeMap::new();
        for (key, weight) in &states {
            for &(w, mask, add) in &options {
                let var: Vec<u64> = key
                    .iter()
                    .enumerate()
                    .map(|(j, bits)| {
                        let s = f64::from_bits(*bits);
                        if mask >> j & 1 == 1 { s + add } else { s }.to_bits()
                    })
                    .collect();
                *next.entry(var).or_insert(0.0) += weight * w;
            }
        }
        if next.len() > MAX_VECTOR_COMPONENTS {
            return Err(Error::TooLarge {
                what: "interference vector mixture",
                size: next.len() as f64,
                limit: MAX_VECTOR_COMPONENTS as f64,
            });
        }
        states = next;
    }
    let total: f64 = states.values().sum();
    let comps = states
        .into_iter()
        .map(|(key, w)| (w / total, key.into_iter().map(f64::from_bits).collect()))
        .collect();
    GaussianMixtureDiag::new(u, comps)
}

/// Law of the received vector when `user` transmits on its first `v` sub-bands.
pub fn received_vector_mixture(
    scenario: &NetworkScenario,
    profiles: &[HoppingProfile],
    user: usize,
    v: usize,
) -> Result<GaussianMixtureDiag> {
    let z = interference_vector_mixture(scenario, profiles, user)?;
    with_signal(scenario, &z, user, v)
}

fn with_signal(scenario: &NetworkScenario, z: &GaussianMixtureDiag, user: usize, v: usize) -> Result<GaussianMixtureDiag> {
    let u = scenario.n_subbands();
    if v > u {
        return Err(Error::InvalidArgument(format!("v = {v} exceeds {u} sub-bands")));
    }
    let signal = if v == 0 { 0.0 } else { scenario.gain_sq(user, user) * scenario.total_power() / v as f64 };
    let comps = z
        .components()
        .map(|(w, vars)| {
            let vars = vars.iter().enumerate().map(|(j, s)| if j < v { s + signal } else { *s }).collect();
            (w, vars)
        })
        .collect();
    GaussianMixtureDiag::new(u, comps)
}

/// Monte-Carlo estimate of the user's true rate `h(Y) - h(Z)` in bits,
/// averaged over the user's own sub-band count law.
pub fn mc_mutual_information(
    scenario: &NetworkScenario,
    profiles: &[HoppingProfile],
    user: usize,
    n_samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    let z = interference_vector_mixture(scenario, profiles, user)?;
    let h_z = z.entropy_mc(n_samples, crate::rng::derive_key(seed, &[user as u64, 0]))?;
    let mut bits = 0.0;
    let mut var = 0.0;
    let mut active = 0.0;
    for (v, mu) in profiles[user].law() {
        if v == 0 {
            continue;
        }
        let y = with_signal(scenario, &z, user, v)?;
        let h_y = y.entropy_mc(n_samples, crate::rng::derive_key(seed, &[user as u64, 1 + v as u64]))?;
        bits += mu * h_y.bits;
        var += mu * mu * h_y.std_error * h_y.std_error;
        active += mu;
    }
    bits -= active * h_z.bits;
    var += active * active * h_z.std_error * h_z.std_error;
    Ok(McEstimate { bits, std_error: var.sqrt(), n_samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::HoppingProfile::Fixed;

    fn two_user(gamma: f64) -> (NetworkScenario, Vec<HoppingProfile>) {
        (NetworkScenario::symmetric(2, 2, 1.0, 1.0, gamma, 1.0).unwrap(), vec![Fixed(1), Fixed(1)])
    }

    /// Averages the Gaussian-channel rate over every joint placement of the
    /// interferers (all Fixed), straight from the parallel-channel formula.
    fn brute_force_upper(s: &NetworkScenario, vs: &[usize], user: usize) -> (f64, f64) {
        let u = s.n_subbands();
        let others: Vec<usize> = (0..vs.len()).filter(|k| *k != user).collect();
        let choices: Vec<Vec<u64>> = others.iter().map(|&k| subsets(u, vs[k]).collect()).collect();
        let mut idx = vec![0usize; others.len()];
        let (mut rate_sum, mut free_sum, mut count) = (0.0, 0.0, 0.0);
        loop {
            let mut rate = 0.0;
            let mut free = 0.0;
            for j in 0..vs[user] {
                let d: f64 = others
                    .iter()
                    .enumerate()
                    .filter(|(pos, _)| choices[*pos][idx[*pos]] >> j & 1 == 1)
                    .map(|(_, &k)| s.gain_sq(k, user) * s.total_power() / vs[k] as f64)
                    .sum();
                if d == 0.0 {
                    free += 1.0;
                }
                let sig = s.gain_sq(user, user) * s.total_power() / vs[user] as f64;
                rate += 0.5 * (1.0 + sig / (d + s.noise_power())).log2();
            }
            rate_sum += rate;
            free_sum += free;
            count += 1.0;
            let mut pos = 0;
            loop {
                if pos == idx.len() {
                    return (rate_sum / count, free_sum / count);
                }
                idx[pos] += 1;
                if idx[pos] < choices[pos].len() {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
        }
    }

    #[test]
    fn free_subband_examples() {
        let s1 = NetworkScenario::symmetric(1, 5, 1.0, 0.0, 1.0, 1.0).unwrap();
        assert_eq!(expected_free_subbands(&s1, &[Fixed(3)], 0).unwrap(), 3.0);
        let (s, p) = two_user(100.0);
        assert_eq!(expected_free_subbands(&s, &p, 0).unwrap(), 0.5);
        assert_eq!(brute_force_upper(&s, &[1, 1], 0).1, 0.5);
        let s3 = NetworkScenario::symmetric(3, 4, 1.0, 0.6, 10.0, 1.0).unwrap();
        let p3 = vec![Fixed(1); 3];
        assert_eq!(expected_free_subbands(&s3, &p3, 0).unwrap(), 0.5625);
        assert_eq!(brute_force_upper(&s3, &[1, 1, 1], 0).1, 0.5625);
    }

    #[test]
    fn upper_bound_single_user_is_awgn() {
        let s = NetworkScenario::symmetric(1, 4, 0.8, 0.0, 50.0, 1.0).unwrap();
        let b = upper_bound_rate(&s, &[Fixed(3)], 0).unwrap();
        let expect = 1.5 * (1.0 + 0.64 * 50.0 / 3.0f64).log2();
        assert!((b.value_bits - expect).abs() < 1e-12);
        assert_eq!(b.residual_bits, 0.0);
        assert_eq!(b.slope, 1.5);
    }

    #[test]
    fn upper_bound_two_user_example() {
        let (s, p) = two_user(100.0);
        let b = upper_bound_rate(&s, &p, 0).unwrap();
        let expect = 0.25 * 101f64.log2() + 0.5 * 0.5 * (1.0 + 100.0 / 101.0f64).log2();
        assert!((b.value_bits - expect).abs() < 1e-12);
        assert_eq!(b.slope, 0.25);
        assert!((b.value_bits - brute_force_upper(&s, &[1, 1], 0).0).abs() < 1e-12);
    }

    #[test]
    fn upper_bound_matches_brute_force_enumeration() {
        let gains = vec![
            vec![1.0, 0.4, 0.9, 0.2],
            vec![0.3, 0.8, 0.5, 0.7],
            vec![0.6, 0.1, 1.2, 0.35],
            vec![0.45, 0.55, 0.25, 0.9],
        ];
        let s = NetworkScenario::new(5, gains, 300.0, 1.5).unwrap();
        let vs = [2, 1, 3, 2];
        let p: Vec<_> = vs.iter().map(|v| Fixed(*v)).collect();
        for user in 0..4 {
            let b = upper_bound_rate(&s, &p, user).unwrap();
            let (rate, free) = brute_force_upper(&s, &vs, user);
            assert!((b.value_bits - rate).abs() < 1e-11, "user {user}: {} vs {rate}", b.value_bits);
            assert!((2.0 * b.slope - free).abs() < 1e-12);
        }
        let s3 = NetworkScenario::symmetric(3, 4, 1.0, 0.7, 10.0, 1.0).unwrap();
        assert_eq!(upper_bound_rate(&s3, &vec![Fixed(1); 3], 0).unwrap().slope, 0.28125);
    }

    #[test]
    fn lower_bound_examples() {
        let s = NetworkScenario::symmetric(1, 4, 1.3, 0.0, 20.0, 1.0).unwrap();
        let b = lower_bound_rate(&s, &[Fixed(2)], 0).unwrap();
        assert!((b.value_bits - (1.0 + 1.69 * 20.0 / 2.0f64).log2()).abs() < 1e-12);

        let (s, p) = two_user(100.0);
        let b = lower_bound_rate(&s, &p, 0).unwrap();
        let expect = 0.5 * (0.25 * 100.0 / 101f64.sqrt() + 1.0).log2();
        assert!((b.value_bits - expect).abs() < 1e-12);
        assert_eq!(b.slope, 0.25);
        assert!((b.value_bits - (b.slope * 100f64.log2() + b.residual_bits)).abs() < 1e-12);
    }

    #[test]
    fn lower_bound_without_free_subbands_saturates() {
        let s = NetworkScenario::symmetric(2, 3, 1.0, 1.0, 1e4, 1.0).unwrap();
        let p = vec![Fixed(1), Fixed(3)];
        let lo = lower_bound_rate(&s, &p, 0).unwrap();
        assert_eq!(lo.slope, 0.0);
        let hi = lower_bound_rate(&s.with_snr(1e8).unwrap(), &p, 0).unwrap();
        assert!((hi.value_bits - lo.value_bits).abs() < 1e-3);
        let limit = 0.5 * (1.0 / (1.0 / 3.0f64)).log2().max(0.0);
        assert!(hi.value_bits <= 0.5 * (1.0 + 3.0f64).log2() + 1e-9 && limit >= 0.0);
    }

    #[test]
    fn slopes_agree_with_asymptotic_gain() {
        let u = 6;
        let mut pmf = vec![0.0; u + 1];
        pmf[1] = 0.3;
        pmf[2] = 0.5;
        pmf[4] = 0.2;
        let p = vec![Fixed(2), HoppingProfile::Pmf(pmf), Fixed(1)];
        let s = NetworkScenario::new(u, vec![vec![1.0, 0.3, 0.5], vec![0.4, 0.9, 0.6], vec![0.7, 0.2, 1.1]], 1e3, 1.0)
            .unwrap();
        for user in 0..3 {
            let g = asymptotic_multiplexing_gain(&p, u, user);
            assert!((upper_bound_rate(&s, &p, user).unwrap().slope - g).abs() < 1e-12);
            assert!((lower_bound_rate(&s, &p, user).unwrap().slope - g).abs() < 1e-12);
        }
    }

    #[test]
    fn regulated_rate_examples() {
        let s = NetworkScenario::symmetric(1, 4, 1.0, 0.0, 100.0, 1.0).unwrap();
        let r = regulated_rate(&s, 0, 1, 4.0).unwrap();
        assert!((r - 2.0 * (100.0 / 4.0 + 1.0f64).log2()).abs() < 1e-12);

        let (s, _) = two_user(100.0);
        let r = regulated_rate(&s, 0, 2, 1.0).unwrap();
        let expect = 0.5 * (2.0 * 2.0 * 100.0 / (1.0 * 101f64.powf(0.5)) + 1.0).log2();
        assert!((r - expect).abs() < 1e-12);

        assert!(regulated_rate(&s, 0, 2, 2.0).unwrap().is_finite());
        assert!(regulated_rate(&s, 0, 2, 0.0).is_err());
        assert!(regulated_rate(&s, 0, 2, 2.5).is_err());
        assert!(regulated_rate(&s, 0, 0, 1.0).is_err());
    }

    #[test]
    fn conservative_regulated_rate_respects_lower_bound() {
        for (n, u, v) in [(2, 2, 1), (3, 6, 2), (4, 8, 2), (3, 5, 4)] {
            for gamma in GAMMA_LADDER {
                let s = NetworkScenario::symmetric(n, u, 1.0, 0.8, gamma, 1.0).unwrap();
                let p = vec![Fixed(v); n];
                let lb = lower_bound_rate(&s, &p, 0).unwrap().value_bits;
                let r = conservative_regulated_rate(&s, 0, n, v as f64).unwrap();
                assert!(r <= lb + 1e-12, "n {n} u {u} v {v} gamma {gamma}: {r} > {lb}");
            }
        }
        // the published form exceeds even the upper bound here
        let (s, p) = two_user(100.0);
        let ub = upper_bound_rate(&s, &p, 0).unwrap().value_bits;
        assert!(regulated_rate(&s, 0, 2, 1.0).unwrap() > ub);
    }

    #[test]
    fn vector_mixture_has_one_component_per_placement() {
        let (s, p) = two_user(100.0);
        let z = interference_vector_mixture(&s, &p, 0).unwrap();
        assert_eq!(z.n_components(), 2);
        let comps: Vec<(f64, Vec<f64>)> = z.components().map(|(w, v)| (w, v.to_vec())).collect();
        assert!(comps.contains(&(0.5, vec![101.0, 1.0])));
        assert!(comps.contains(&(0.5, vec![1.0, 101.0])));
        let y = received_vector_mixture(&s, &p, 0, 1).unwrap();
        let comps: Vec<Vec<f64>> = y.components().map(|(_, v)| v.to_vec()).collect();
        assert!(comps.contains(&vec![201.0, 1.0]));
    }

    #[test]
    fn mc_mi_single_user_is_awgn() {
        let s = NetworkScenario::symmetric(1, 1, 1.0, 0.0, 30.0, 1.0).unwrap();
        let est = mc_mutual_information(&s, &[Fixed(1)], 0, 50_000, 4).unwrap();
        let expect = 0.5 * 31f64.log2();
        assert!((est.bits - expect).abs() < 4.0 * est.std_error, "{est:?} vs {expect}");
    }

    #[test]
    fn mc_mi_sits_between_bounds() {
        let (s, p) = two_user(1e4);
        let est = mc_mutual_information(&s, &p, 0, 100_000, 8).unwrap();
        let lo = lower_bound_rate(&s, &p, 0).unwrap().value_bits;
        let hi = upper_bound_rate(&s, &p, 0).unwrap().value_bits;
        assert!(lo <= est.bits + 4.0 * est.std_error);
        assert!(est.bits - 4.0 * est.std_error <= hi);
    }
}
