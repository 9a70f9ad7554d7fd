//! Numerical oracle for the Hajek linearization of the exact two-sample
//! linear rank statistic.
//!
//! For univariate scores with known positive/negative distributions `G`, `H`
//! and mixture `F = p G + (1-p) H`, the exact statistic decomposes as
//!
//! `W_exact = n * W_hat + (V_X - E[V_X]) + (V_Y - E[V_Y]) + R`
//!
//! with
//!
//! * `W_hat  = (1/n) * sum_i phi(F(x_i))`,
//! * `V_X    = ((n-1)/(N+1)) * sum_i int_{x_i}^inf phi'(F(u)) dG(u)`,
//! * `V_Y    = (n/(N+1))     * sum_j int_{y_j}^inf phi'(F(u)) dG(u)`,
//!
//! and the remainder `R` defined as the residual of the identity (the
//! degenerate U-statistics it aggregates are costly to enumerate, and the
//! residual definition is algebraically equivalent). The first three terms
//! grow with the sample while `R` stays bounded in probability, which
//! [`remainder_scaling`] checks empirically.
//!
//! All integrals use one 201-node Gauss-Legendre rule - the component sums
//! and their centering expectations alike, so the centering is consistent.

use crate::error::{Error, Result};
use crate::gauss::{norm_cdf, norm_pdf};
use crate::quadrature::rule_201;
use crate::ranks::PooledSample;
use crate::scoregen::ScoreGen;
use crate::synthdata::derive_seed;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// A univariate Gaussian distribution handle with evaluable c.d.f. and
/// density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianDist {
    pub mean: f64,
    pub sd: f64,
}

impl GaussianDist {
    pub fn new(mean: f64, sd: f64) -> Result<Self> {
        if !(mean.is_finite() && sd.is_finite() && sd > 0.0) {
            return Err(Error::InvalidInput("need finite mean and sd > 0".into()));
        }
        Ok(Self { mean, sd })
    }

    pub fn standard() -> Self {
        Self { mean: 0.0, sd: 1.0 }
    }

    pub fn cdf(&self, t: f64) -> f64 {
        norm_cdf((t - self.mean) / self.sd)
    }

    pub fn pdf(&self, t: f64) -> f64 {
        norm_pdf((t - self.mean) / self.sd) / self.sd
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        self.mean + self.sd * z
    }
}

/// Known univariate pair `(G, H)` with positive-class proportion `p`; the
/// pooled mixture is `F = p G + (1-p) H`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnownUnivariatePair {
    pub g: GaussianDist,
    pub h: GaussianDist,
    pub p: f64,
}

impl KnownUnivariatePair {
    pub fn new(g: GaussianDist, h: GaussianDist, p: f64) -> Result<Self> {
        if !(0.0 < p && p < 1.0) {
            return Err(Error::InvalidInput("proportion p must lie in (0,1)".into()));
        }
        Ok(Self { g, h, p })
    }

    pub fn mixture_cdf(&self, t: f64) -> f64 {
        self.p * self.g.cdf(t) + (1.0 - self.p) * self.h.cdf(t)
    }

    /// Effective support: ten standard deviations beyond both means.
    fn support(&self) -> (f64, f64) {
        let spread = 10.0 * self.g.sd.max(self.h.sd);
        (
            self.g.mean.min(self.h.mean) - spread,
            self.g.mean.max(self.h.mean) + spread,
        )
    }
}

/// The decomposition evaluated on one pooled sample.
#[derive(Debug, Clone, PartialEq)]
pub struct HajekComponents {
    /// `(1/n) * sum_i phi(F(x_i))`.
    pub w_hat: f64,
    /// `V_X - E[V_X]`, centered by quadrature expectation.
    pub v_x_centered: f64,
    /// `V_Y - E[V_Y]`, centered by quadrature expectation.
    pub v_y_centered: f64,
    /// Residual `W_exact - n W_hat - v_x_centered - v_y_centered`.
    pub remainder: f64,
}

impl HajekComponents {
    /// Reassembles the exact statistic from the components.
    pub fn reconstruction(&self, n: usize) -> f64 {
        n as f64 * self.w_hat + self.v_x_centered + self.v_y_centered + self.remainder
    }
}

/// Evaluates the decomposition components on a pooled sample whose score
/// distributions are known.
pub fn hajek_components(
    sample: &PooledSample,
    pair: &KnownUnivariatePair,
    phi: &ScoreGen,
) -> Result<HajekComponents> {
    if !phi.is_differentiable() {
        return Err(Error::NotDifferentiable(phi.name()));
    }
    let n = sample.n();
    let m = sample.m();
    let total = sample.pooled_size() as f64;
    let (lo, hi) = pair.support();
    let rule = rule_201();

    let w_exact = sample.linear_rank_statistic(phi);

    let mut w_hat = 0.0;
    for &x in sample.positives() {
        w_hat += phi.value(pair.mixture_cdf(x))?;
    }
    w_hat /= n as f64;

    // phi'(F(u)) g(u), the integrand of every V component.
    let weight = |u: f64| -> f64 {
        let f = pair.mixture_cdf(u).clamp(0.0, 1.0);
        phi.derivative(f).unwrap_or(f64::NAN) * pair.g.pdf(u)
    };
    let upper_tail = |t: f64| rule.integrate(t.max(lo), hi, weight);

    let v_x_raw: f64 = sample.positives().iter().map(|&x| upper_tail(x)).sum();
    let v_y_raw: f64 = sample.negatives().iter().map(|&y| upper_tail(y)).sum();
    let v_x_raw = v_x_raw * (n as f64 - 1.0) / (total + 1.0);
    let v_y_raw = v_y_raw * n as f64 / (total + 1.0);

    // E[upper_tail(X)] = int phi'(F(u)) G(u) dG(u),
    // E[upper_tail(Y)] = int phi'(F(u)) H(u) dG(u).
    let mean_tail_g = rule.integrate(lo, hi, |u| weight(u) * pair.g.cdf(u));
    let mean_tail_h = rule.integrate(lo, hi, |u| weight(u) * pair.h.cdf(u));
    let e_v_x = (n as f64) * (n as f64 - 1.0) / (total + 1.0) * mean_tail_g;
    let e_v_y = (n as f64) * (m as f64) / (total + 1.0) * mean_tail_h;

    let v_x_centered = v_x_raw - e_v_x;
    let v_y_centered = v_y_raw - e_v_y;
    if !(v_x_centered.is_finite() && v_y_centered.is_finite() && w_hat.is_finite()) {
        return Err(Error::InvalidInput(
            "linearization quadrature produced non-finite components".into(),
        ));
    }
    let remainder = w_exact - n as f64 * w_hat - v_x_centered - v_y_centered;

    Ok(HajekComponents {
        w_hat,
        v_x_centered,
        v_y_centered,
        remainder,
    })
}

/// Draws a pooled sample of size `n_pooled` from the pair (with
/// `n = floor(p N)` positives) and returns it with its components.
pub fn sampled_components(
    pair: &KnownUnivariatePair,
    phi: &ScoreGen,
    n_pooled: usize,
    seed: u64,
) -> Result<HajekComponents> {
    let n = ((pair.p * n_pooled as f64).floor() as usize).max(1);
    let m = n_pooled.saturating_sub(n).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pos: Vec<f64> = (0..n).map(|_| pair.g.sample(&mut rng)).collect();
    let neg: Vec<f64> = (0..m).map(|_| pair.h.sample(&mut rng)).collect();
    hajek_components(&PooledSample::new(pos, neg)?, pair, phi)
}

/// Mean absolute remainder per pooled size, over seeded replications.
///
/// The remainder is bounded in probability while the reconstructed statistic
/// grows with `N`, so `mean|R| / N` must shrink as `N` grows; the regression
/// slope of `log(mean|R|/N)` against `log N` sits below `-1/2`.
pub fn remainder_scaling(
    pair: &KnownUnivariatePair,
    phi: &ScoreGen,
    n_values: &[usize],
    replications: usize,
    seed: u64,
) -> Result<Vec<(usize, f64)>> {
    if n_values.is_empty() || replications == 0 {
        return Err(Error::InvalidInput(
            "need at least one pooled size and one replication".into(),
        ));
    }
    if n_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput(
            "pooled sizes must be strictly increasing".into(),
        ));
    }
    let mut out = Vec::with_capacity(n_values.len());
    for (idx, &n_pooled) in n_values.iter().enumerate() {
        if n_pooled < 2 {
            return Err(Error::InvalidInput("pooled sizes must be >= 2".into()));
        }
        let mut acc = 0.0;
        for rep in 0..replications {
            let rep_seed = derive_seed(derive_seed(seed, idx as u64), rep as u64);
            acc += sampled_components(pair, phi, n_pooled, rep_seed)?
                .remainder
                .abs();
        }
        out.push((n_pooled, acc / replications as f64));
    }
    Ok(out)
}

/// Least-squares slope of `log(mean|R|/N)` against `log N`.
pub fn remainder_slope(table: &[(usize, f64)]) -> f64 {
    let points: Vec<(f64, f64)> = table
        .iter()
        .map(|&(n, r)| ((n as f64).ln(), (r / n as f64).max(1e-300).ln()))
        .collect();
    least_squares_slope(&points)
}

pub(crate) fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let count = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / count;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / count;
    let cov: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let var: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    cov / var
}
