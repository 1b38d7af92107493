//! Zero-mean Gaussian mixtures: scalar and diagonal-covariance vector forms.
//!
//! Entropies are reported in bits. `log_density` returns natural logs.
//!
//! Vector components may have zero-variance coordinates (a sub-band that
//! carries no interference). Such a component is a density on the subspace
//! where those coordinates vanish. At a point `x`, only components whose
//! degenerate coordinates are all zero in `x` are compatible, and among those
//! only the ones living on the lowest-dimensional subspace contribute; the
//! density is taken with respect to Lebesgue measure on that subspace.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature;
use crate::rng::keyed_rng;

const LN_2PI: f64 = 1.837_877_066_409_345_5;
const WEIGHT_SUM_TOL: f64 = 1e-12;
/// Samples per counter-keyed partition in Monte-Carlo estimators.
pub const MC_CHUNK: usize = 4096;
/// Default absolute tolerance (bits) for [`GaussianMixture1D::entropy_quadrature`].
pub const DEFAULT_QUADRATURE_TOL: f64 = 1e-6;

/// Differential entropy in bits of a zero-mean Gaussian with variance `var`.
pub fn gaussian_entropy_bits(var: f64) -> f64 {
    0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E * var).log2()
}

fn log_sum_exp(terms: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = terms.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.map(|t| (t - max).exp()).sum::<f64>().ln()
}

fn check_weights(weights: impl Iterator<Item = f64>) -> Result<()> {
    let mut total = 0.0;
    for w in weights {
        if !(w.is_finite() && w >= 0.0) {
            return Err(Error::InvalidDistribution(format!("mixture weight {w} is not a probability")));
        }
        total += w;
    }
    if (total - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(Error::InvalidDistribution(format!("mixture weights sum to {total}")));
    }
    Ok(())
}

/// Scalar zero-mean Gaussian mixture, components `(weight, variance)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture1D {
    components: Vec<(f64, f64)>,
}

impl GaussianMixture1D {
    pub fn new(components: Vec<(f64, f64)>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidDistribution("mixture has no components".into()));
        }
        check_weights(components.iter().map(|c| c.0))?;
        if let Some((_, v)) = components.iter().find(|(_, v)| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidDistribution(format!("component variance {v} must be positive")));
        }
        Ok(Self { components })
    }

    pub fn gaussian(variance: f64) -> Result<Self> {
        Self::new(vec![(1.0, variance)])
    }

    pub fn components(&self) -> &[(f64, f64)] {
        &self.components
    }

    pub fn variance(&self) -> f64 {
        self.components.iter().map(|(w, v)| w * v).sum()
    }

    pub fn log_density(&self, x: f64) -> f64 {
        let terms = self
            .components
            .iter()
            .filter(|(w, _)| *w > 0.0)
            .map(move |&(w, v)| w.ln() - 0.5 * (LN_2PI + v.ln()) - 0.5 * x * x / v);
        log_sum_exp(terms)
    }

    pub fn density(&self, x: f64) -> f64 {
        self.log_density(x).exp()
    }

    /// Differential entropy in bits by adaptive quadrature, absolute error `tol`.
    pub fn entropy_quadrature(&self, tol: f64) -> Result<f64> {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
        }
        let live = self.components.iter().filter(|(w, _)| *w > 0.0);
        let s_min = live.clone().map(|(_, v)| v.sqrt()).fold(f64::INFINITY, f64::min);
        let s_max = live.map(|(_, v)| v.sqrt()).fold(0.0, f64::max);
        // beyond k * s_max the integrand carries far less than tol / 10
        let k = (2.0 * (1.0 / tol).ln()).sqrt().max(6.0) + 4.0;
        let reach = k * s_max;
        let mut breaks: Vec<f64> = (0..=8).map(|j| s_min * j as f64 / 8.0).collect();
        let mut edge = s_min;
        while edge * 2.0 < reach {
            edge *= 2.0;
            breaks.push(edge);
        }
        breaks.push(reach);

        let integrand = |x: f64| {
            let lp = self.log_density(x);
            if lp == f64::NEG_INFINITY {
                0.0
            } else {
                -lp.exp() * lp
            }
        };
        // symmetric integrand: integrate the half line and double
        let nats_tol = 0.5 * tol * std::f64::consts::LN_2 * 0.9;
        let half = quadrature::integrate(integrand, &breaks, nats_tol, 200_000)?;
        Ok(2.0 * half / std::f64::consts::LN_2)
    }

    /// Upper bound on the differential entropy (bits) from the level
    /// probabilities: `(1 - a0)/2 log2(s_L / s_0) + log2(sqrt(2 pi e) s_0) + H(a)`
    /// where `s_0` is the smallest variance and `s_L` the largest.
    pub fn entropy_upper_bound(&self) -> f64 {
        let mut comps = self.components.clone();
        comps.sort_by(|a, b| a.1.total_cmp(&b.1));
        let base = comps[0].1;
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(comps.len());
        for (w, v) in comps {
            match merged.last_mut() {
                Some(last) if (v - last.1).abs() <= 1e-9 * v.max(last.1) => last.0 += w,
                _ => merged.push((w, v)),
            }
        }
        let a0 = merged[0].0;
        let top = merged.iter().rev().find(|(w, _)| *w > 0.0).map_or(base, |c| c.1);
        let discrete: f64 = merged.iter().filter(|(w, _)| *w > 0.0).map(|(w, _)| -w * w.log2()).sum();
        0.5 * (1.0 - a0) * (top / base).log2() + gaussian_entropy_bits(base) + discrete
    }

    pub fn to_diag(&self) -> GaussianMixtureDiag {
        GaussianMixtureDiag::new(
            1,
            self.components.iter().map(|&(w, v)| (w, vec![v])).collect(),
        )
        .expect("scalar mixture is a valid vector mixture")
    }
}

#[derive(Debug, Clone, PartialEq)]
struct DiagComponent {
    weight: f64,
    variances: Vec<f64>,
    ln_weight: f64,
    /// `-0.5 * sum(ln(2 pi var))` over the positive-variance coordinates.
    ln_norm: f64,
    n_degenerate: usize,
}

/// Zero-mean mixture of Gaussians with diagonal covariances in `dim` dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixtureDiag {
    dim: usize,
    components: Vec<DiagComponent>,
    cumulative: Vec<f64>,
    any_degenerate: bool,
}

/// Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub bits: f64,
    pub std_error: f64,
    pub n_samples: usize,
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let d = x - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, o: Moments) -> Moments {
        if self.n == 0.0 {
            return o;
        }
        if o.n == 0.0 {
            return self;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        Moments {
            n,
            mean: self.mean + d * o.n / n,
            m2: self.m2 + o.m2 + d * d * self.n * o.n / n,
        }
    }
}

impl GaussianMixtureDiag {
    /// Components are `(weight, diagonal variances)`.
    pub fn new(dim: usize, components: Vec<(f64, Vec<f64>)>) -> Result<Self> {
        if dim == 0 || components.is_empty() {
            return Err(Error::InvalidDistribution("vector mixture needs a dimension and components".into()));
        }
        check_weights(components.iter().map(|c| c.0))?;
        let mut out = Vec::with_capacity(components.len());
        let mut cumulative = Vec::with_capacity(components.len());
        let mut acc = 0.0;
        for (weight, variances) in components {
            if variances.len() != dim {
                return Err(Error::InvalidDistribution(format!(
                    "component has {} variances, expected {dim}",
                    variances.len()
                )));
            }
            if let Some(v) = variances.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                return Err(Error::InvalidDistribution(format!("variance {v} must be nonnegative")));
            }
            let n_degenerate = variances.iter().filter(|v| **v == 0.0).count();
            let ln_norm = variances
                .iter()
                .filter(|v| **v > 0.0)
                .map(|v| -0.5 * (LN_2PI + v.ln()))
                .sum();
            acc += weight;
            cumulative.push(acc);
            out.push(DiagComponent {
                weight,
                ln_weight: weight.ln(),
                variances,
                ln_norm,
                n_degenerate,
            });
        }
        let any_degenerate = out.iter().any(|c| c.n_degenerate > 0);
        Ok(Self {
            dim,
            components: out,
            cumulative,
            any_degenerate,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `(weight, variances)` per component.
    pub fn components(&self) -> impl Iterator<Item = (f64, &[f64])> {
        self.components.iter().map(|c| (c.weight, c.variances.as_slice()))
    }

    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    fn component_log_term(c: &DiagComponent, x: &[f64]) -> f64 {
        let quad: f64 = c
            .variances
            .iter()
            .zip(x)
            .filter(|(v, _)| **v > 0.0)
            .map(|(v, xi)| xi * xi / v)
            .sum();
        c.ln_weight + c.ln_norm - 0.5 * quad
    }

    /// Natural log of the mixture density at `x`; `-inf` outside every
    /// component's support.
    pub fn log_density(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::InvalidArgument(format!(
                "point has dimension {}, mixture has {}",
                x.len(),
                self.dim
            )));
        }
        Ok(self.log_density_unchecked(x))
    }

    fn log_density_unchecked(&self, x: &[f64]) -> f64 {
        let live = self.components.iter().filter(|c| c.weight > 0.0);
        if !self.any_degenerate {
            return log_sum_exp(live.map(|c| Self::component_log_term(c, x)));
        }
        let compatible = |c: &&DiagComponent| c.variances.iter().zip(x).all(|(v, xi)| *v > 0.0 || *xi == 0.0);
        let Some(depth) = live.clone().filter(compatible).map(|c| c.n_degenerate).max() else {
            return f64::NEG_INFINITY;
        };
        log_sum_exp(
            live.filter(compatible)
                .filter(move |c| c.n_degenerate == depth)
                .map(|c| Self::component_log_term(c, x)),
        )
    }

    /// Draws one point into `out`.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let u: f64 = rng.random::<f64>() * self.cumulative[self.cumulative.len() - 1];
        let idx = self.cumulative.partition_point(|c| *c <= u).min(self.components.len() - 1);
        let comp = &self.components[idx];
        for (o, v) in out.iter_mut().zip(&comp.variances) {
            *o = if *v > 0.0 {
                let z: f64 = rng.sample(StandardNormal);
                z * v.sqrt()
            } else {
                0.0
            };
        }
    }

    /// Plug-in entropy estimate `-mean log2 p(X)`, `X` drawn from the mixture.
    ///
    /// Samples are split into fixed partitions of [`MC_CHUNK`] draws, each
    /// with its own keyed stream, so the result does not depend on how many
    /// threads run them.
    pub fn entropy_mc(&self, n_samples: usize, seed: u64) -> Result<McEstimate> {
        if n_samples < 100 {
            return Err(Error::InvalidArgument(format!(
                "at least 100 samples required, got {n_samples}"
            )));
        }
        let n_chunks = n_samples.div_ceil(MC_CHUNK);
        let parts: Vec<Moments> = (0..n_chunks)
            .into_par_iter()
            .map(|chunk| {
                let mut rng = keyed_rng(seed, &[0x6d63_656e_7472_6f70, chunk as u64]);
                let len = MC_CHUNK.min(n_samples - chunk * MC_CHUNK);
                let mut x = vec![0.0; self.dim];
                let mut m = Moments::default();
                for _ in 0..len {
                    self.sample_into(&mut rng, &mut x);
                    m.push(-self.log_density_unchecked(&x) / std::f64::consts::LN_2);
                }
                m
            })
            .collect();
        let total = parts.into_iter().fold(Moments::default(), Moments::merge);
        let var = total.m2 / (total.n - 1.0);
        Ok(McEstimate {
            bits: total.mean,
            std_error: (var / total.n).sqrt(),
            n_samples,
        })
    }

    /// Mean of `log2 p(x)` over the rows of `samples` (row-major, `dim` columns).
    pub fn mean_log2_density(&self, samples: &[f64]) -> Result<McEstimate> {
        if samples.is_empty() || !samples.len().is_multiple_of(self.dim) {
            return Err(Error::InvalidArgument("sample matrix does not match the mixture dimension".into()));
        }
        let mut m = Moments::default();
        for row in samples.chunks(self.dim) {
            m.push(self.log_density_unchecked(row) / std::f64::consts::LN_2);
        }
        Ok(McEstimate {
            bits: m.mean,
            std_error: (m.m2 / (m.n - 1.0).max(1.0) / m.n).sqrt(),
            n_samples: m.n as usize,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, PI};

    #[test]
    fn scalar_log_density_examples() {
        let g = GaussianMixture1D::gaussian(1.0).unwrap();
        assert!((g.log_density(0.0) - (1.0 / (2.0 * PI).sqrt()).ln()).abs() < 1e-15);
        let twin = GaussianMixture1D::new(vec![(0.5, 1.0), (0.5, 1.0)]).unwrap();
        for x in [0.0, 0.3, -2.0] {
            assert!((twin.log_density(x) - g.log_density(x)).abs() < 1e-14);
        }
        let m = GaussianMixture1D::new(vec![(0.5, 1.0), (0.5, 4.0)]).unwrap();
        let expect = (0.5 * (2.0 * PI).powf(-0.5) + 0.5 * (8.0 * PI).powf(-0.5)).ln();
        assert!((m.log_density(0.0) - expect).abs() < 1e-15);
        let d = m.to_diag();
        assert!((d.log_density(&[0.0]).unwrap() - expect).abs() < 1e-15);
    }

    #[test]
    fn log_density_survives_extreme_variance_ratios() {
        let m = GaussianMixture1D::new(vec![(0.5, 1.0), (0.5, 1e16)]).unwrap();
        let lp = m.log_density(50.0);
        assert!(lp.is_finite());
        let far = (0.5f64).ln() - 0.5 * (LN_2PI + 1e16f64.ln()) - 0.5 * 2500.0 / 1e16;
        assert!((lp - far).abs() < 1e-12);
    }

    #[test]
    fn quadrature_gaussian_entropy() {
        for var in [1e-3, 1.0, 7.5, 1e6] {
            let g = GaussianMixture1D::gaussian(var).unwrap();
            let h = g.entropy_quadrature(DEFAULT_QUADRATURE_TOL).unwrap();
            assert!((h - gaussian_entropy_bits(var)).abs() < 1e-6, "var {var}: {h}");
        }
        let twin = GaussianMixture1D::new(vec![(0.5, 1.0), (0.5, 1.0)]).unwrap();
        let h = twin.entropy_quadrature(1e-6).unwrap();
        assert!((h - 0.5 * (2.0 * PI * E).log2()).abs() < 1e-6);
    }

    #[test]
    fn quadrature_matches_fine_riemann_sum() {
        let m = GaussianMixture1D::new(vec![(0.5, 1.0), (0.5, 4.0)]).unwrap();
        let h = m.entropy_quadrature(1e-6).unwrap();
        // midpoint rule on a wide fine grid, integrand is smooth and decays fast
        let (lo, hi, n) = (-40.0, 40.0, 400_000);
        let dx = (hi - lo) / n as f64;
        let riemann: f64 = (0..n)
            .map(|k| {
                let x = lo + (k as f64 + 0.5) * dx;
                let p = 0.5 * (-x * x / 2.0).exp() / (2.0 * PI).sqrt() + 0.5 * (-x * x / 8.0).exp() / (8.0 * PI).sqrt();
                -p * p.log2() * dx
            })
            .sum();
        assert!((h - riemann).abs() < 1e-6, "{h} vs {riemann}");
        assert!(h <= gaussian_entropy_bits(2.5));
        assert!(h >= 0.5 * gaussian_entropy_bits(1.0) + 0.5 * gaussian_entropy_bits(4.0));
        // frozen from an independent 30-digit quadrature
        assert!((h - 2.680_881_575_035_638).abs() < 2e-6, "{h}");
    }

    #[test]
    fn upper_bound_examples() {
        let g = GaussianMixture1D::gaussian(3.0).unwrap();
        assert!((g.entropy_upper_bound() - gaussian_entropy_bits(3.0)).abs() < 1e-15);
        let m = GaussianMixture1D::new(vec![(0.5, 1.0), (0.5, 4.0)]).unwrap();
        let expect = 1.5 + (2.0 * PI * E).sqrt().log2();
        assert!((m.entropy_upper_bound() - expect).abs() < 1e-14);
        assert!(m.entropy_upper_bound() >= m.entropy_quadrature(1e-6).unwrap());
    }

    #[test]
    fn mc_gaussian_and_product() {
        let g = GaussianMixture1D::gaussian(2.0).unwrap().to_diag();
        let est = g.entropy_mc(100_000, 11).unwrap();
        assert!((est.bits - gaussian_entropy_bits(2.0)).abs() < 3.0 * est.std_error);

        let prod = GaussianMixtureDiag::new(2, vec![(1.0, vec![1.0, 1.0])]).unwrap();
        let est = prod.entropy_mc(100_000, 5).unwrap();
        assert!((est.bits - 2.0 * gaussian_entropy_bits(1.0)).abs() < 3.0 * est.std_error);
    }

    #[test]
    fn mc_agrees_with_quadrature() {
        let m = GaussianMixture1D::new(vec![(0.5, 1.0), (0.5, 4.0)]).unwrap();
        let est = m.to_diag().entropy_mc(200_000, 3).unwrap();
        let h = m.entropy_quadrature(1e-6).unwrap();
        assert!((est.bits - h).abs() < 3.0 * est.std_error, "{est:?} vs {h}");
    }

    #[test]
    fn mc_is_deterministic_for_a_seed() {
        let m = GaussianMixture1D::new(vec![(0.3, 1.0), (0.7, 9.0)]).unwrap().to_diag();
        assert_eq!(m.entropy_mc(10_000, 1).unwrap(), m.entropy_mc(10_000, 1).unwrap());
        assert_ne!(m.entropy_mc(10_000, 1).unwrap(), m.entropy_mc(10_000, 2).unwrap());
        assert!(m.entropy_mc(99, 1).is_err());
    }

    #[test]
    fn degenerate_components_use_support_measure() {
        // atom at zero plus a unit Gaussian: entropy = 1 bit + 0.5 h(N(0,1))
        let m = GaussianMixtureDiag::new(1, vec![(0.5, vec![0.0]), (0.5, vec![1.0])]).unwrap();
        assert!((m.log_density(&[0.0]).unwrap() - 0.5f64.ln()).abs() < 1e-15);
        let off = m.log_density(&[0.7]).unwrap();
        assert!((off - (0.5f64.ln() - 0.5 * LN_2PI - 0.245)).abs() < 1e-14);
        let est = m.entropy_mc(100_000, 9).unwrap();
        let expect = 1.0 + 0.5 * gaussian_entropy_bits(1.0);
        assert!((est.bits - expect).abs() < 4.0 * est.std_error, "{est:?} vs {expect}");

        let only_atom = GaussianMixtureDiag::new(2, vec![(1.0, vec![0.0, 1.0])]).unwrap();
        assert_eq!(only_atom.log_density(&[0.1, 0.0]).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn rejects_invalid_mixtures() {
        assert!(GaussianMixture1D::new(vec![]).is_err());
        assert!(GaussianMixture1D::new(vec![(0.5, 1.0)]).is_err());
        assert!(GaussianMixture1D::new(vec![(1.0, 0.0)]).is_err());
        assert!(GaussianMixture1D::new(vec![(1.5, 1.0), (-0.5, 1.0)]).is_err());
        assert!(GaussianMixtureDiag::new(2, vec![(1.0, vec![1.0])]).is_err());
        assert!(GaussianMixtureDiag::new(1, vec![(1.0, vec![-1.0])]).is_err());
        let m = GaussianMixtureDiag::new(2, vec![(1.0, vec![1.0, 1.0])]).unwrap();
        assert!(m.log_density(&[1.0]).is_err());
        assert!(GaussianMixture1D::gaussian(1.0).unwrap().entropy_quadrature(0.0).is_err());
    }
}
