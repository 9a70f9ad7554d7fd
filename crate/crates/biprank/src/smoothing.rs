//! Kernel machinery: smoothed empirical c.d.f., the smoothed empirical
//! ranking criterion, and its analytic parameter gradient.
//!
//! The smoothed pooled c.d.f. replaces each indicator of the raw empirical
//! c.d.f. by the integrated kernel `kappa((t - v)/h)`. The sum keeps the
//! diagonal self-term, so at a sample point and vanishing bandwidth it
//! tends to `(rank - 1/2) / N` rather than `rank / N`.
//!
//! [`criterion_gradient`] is the exact gradient of [`smoothed_criterion`]
//! (the per-positive average), assembled from the kernel-density chain rule.
//! The raw-sum form used by the ascent update is `n` times this vector.

use crate::error::{Error, Result};
use crate::gauss::norm_cdf;
use crate::models::{dot, FeatureSample, ScoringModel};
use crate::scoregen::ScoreGen;

/// Kernel family for c.d.f. smoothing. Gaussian is the only supported
/// second-order kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Gaussian,
}

/// A smoothing kernel with its bandwidth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub bandwidth: f64,
}

impl KernelSpec {
    pub fn gaussian(bandwidth: f64) -> Result<Self> {
        if !(bandwidth.is_finite() && bandwidth > 0.0) {
            return Err(Error::InvalidInput("bandwidth must be > 0".into()));
        }
        Ok(Self {
            kind: KernelKind::Gaussian,
            bandwidth,
        })
    }

    /// Kernel density `K(t)`.
    pub fn density(&self, t: f64) -> f64 {
        match self.kind {
            KernelKind::Gaussian => (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt(),
        }
    }

    /// Integrated kernel `kappa(t) = int_{-inf}^t K(u) du`; for the Gaussian
    /// kernel this is the standard normal c.d.f.
    pub fn integrated(&self, t: f64) -> f64 {
        match self.kind {
            KernelKind::Gaussian => norm_cdf(t),
        }
    }
}

/// Bandwidth rule `h = c * N^(-1/5)` with the default constant `c = 1`.
pub fn default_bandwidth(n_pooled: usize) -> f64 {
    scaled_bandwidth(1.0, n_pooled)
}

/// Bandwidth rule `h = constant * N^(-1/5)`.
pub fn scaled_bandwidth(constant: f64, n_pooled: usize) -> f64 {
    constant * (n_pooled as f64).powf(-0.2)
}

/// Smoothed pooled empirical c.d.f.
/// `(1/N) * sum_v kappa((t - v) / h)` over all pooled scores.
pub fn smoothed_ecdf(pooled_scores: &[f64], t: f64, spec: &KernelSpec) -> f64 {
    let h = spec.bandwidth;
    let sum: f64 = pooled_scores
        .iter()
        .map(|&v| spec.integrated((t - v) / h))
        .sum();
    sum / pooled_scores.len() as f64
}

/// Smoothed empirical ranking criterion
/// `(1/n) * sum_i phi(F_hat(s(x_i)))`, where `F_hat` is the smoothed pooled
/// c.d.f. of the scored sample.
///
/// Works for every catalogue `phi` (evaluation needs values only); domain
/// errors of singular `phi` propagate.
pub fn smoothed_criterion(
    model: &ScoringModel,
    data: &FeatureSample,
    phi: &ScoreGen,
    spec: &KernelSpec,
) -> Result<f64> {
    let scores = pooled_scores(model, data)?;
    let n = data.n();
    let mut acc = 0.0;
    for &t in &scores[..n] {
        acc += phi.value(smoothed_ecdf(&scores, t, spec))?;
    }
    Ok(acc / n as f64)
}

/// Analytic gradient of [`smoothed_criterion`] with respect to the packed
/// model parameters:
///
/// `(1/n) * sum_i phi'(F_hat(s(x_i))) * (1/(N h)) * sum_v K((s(x_i) - s(v))/h) * (g(x_i) - g(v))`
///
/// where `g` is the parameter-gradient of the score and `v` runs over all
/// pooled points (the self-term vanishes because the paired difference is
/// zero).
pub fn criterion_gradient(
    model: &ScoringModel,
    data: &FeatureSample,
    phi: &ScoreGen,
    spec: &KernelSpec,
) -> Result<Vec<f64>> {
    if !phi.is_differentiable() {
        return Err(Error::NotDifferentiable(phi.name()));
    }
    let scores = pooled_scores(model, data)?;
    let feats: Vec<Vec<f64>> = data
        .pooled_rows()
        .map(|z| model.param_gradient(z))
        .collect::<Result<_>>()?;
    let n = data.n();
    let total = data.pooled_size();
    let h = spec.bandwidth;
    let p = feats[0].len();

    let mut grad = vec![0.0; p];
    let mut inner = vec![0.0; p];
    for i in 0..n {
        let t = scores[i];
        let weight = phi.derivative(smoothed_ecdf(&scores, t, spec))?;
        inner.iter_mut().for_each(|v| *v = 0.0);
        for v in 0..total {
            let k = spec.density((t - scores[v]) / h);
            if k == 0.0 {
                continue;
            }
            let gi = &feats[i];
            let gv = &feats[v];
            for (acc, (a, b)) in inner.iter_mut().zip(gi.iter().zip(gv.iter())) {
                *acc += k * (a - b);
            }
        }
        let scale = weight / (total as f64 * h);
        for (g, acc) in grad.iter_mut().zip(&inner) {
            *g += scale * acc;
        }
    }
    let inv_n = 1.0 / n as f64;
    grad.iter_mut().for_each(|g| *g *= inv_n);
    Ok(grad)
}

/// Scores of all pooled feature rows, positives first.
pub(crate) fn pooled_scores(model: &ScoringModel, data: &FeatureSample) -> Result<Vec<f64>> {
    if model.dim() != data.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: data.dim(),
        });
    }
    let params = model.params();
    data.pooled_rows()
        .map(|z| model.param_gradient(z).map(|g| dot(params, &g)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ModelKind;
    use crate::ranks::PooledSample;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn spec(h: f64) -> KernelSpec {
        KernelSpec::gaussian(h).unwrap()
    }

    fn random_sample(rng: &mut ChaCha8Rng, n: usize, m: usize, d: usize) -> FeatureSample {
        let row = |rng: &mut ChaCha8Rng| (0..d).map(|_| rng.sample(StandardNormal)).collect();
        FeatureSample::new(
            (0..n).map(|_| row(rng)).collect(),
            (0..m).map(|_| row(rng)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn kernel_is_a_second_order_density() {
        let k = spec(1.0);
        let rule = crate::quadrature::rule_201();
        let mass = rule.integrate(-12.0, 12.0, |t| k.density(t));
        assert!((mass - 1.0).abs() < 1e-12);
        let second_moment = rule.integrate(-12.0, 12.0, |t| t * t * k.density(t));
        assert!(second_moment.is_finite() && (second_moment - 1.0).abs() < 1e-9);
        for t in [0.3, 1.7, 4.0] {
            assert_eq!(k.density(t), k.density(-t));
        }
    }

    #[test]
    fn integrated_kernel_values() {
        let k = spec(1.0);
        assert_eq!(k.integrated(0.0), 0.5);
        assert!((k.integrated(10.0) - 1.0).abs() < 1e-12);
        assert!((k.integrated(1.0) - 0.841345).abs() < 1e-5);
    }

    #[test]
    fn smoothed_ecdf_values() {
        for h in [0.1, 1.0, 3.0] {
            assert_eq!(smoothed_ecdf(&[0.0], 0.0, &spec(h)), 0.5);
            assert!((smoothed_ecdf(&[0.0], 10.0 * h, &spec(h)) - 1.0).abs() < 1e-12);
        }
        assert!((smoothed_ecdf(&[-1.0, 1.0], 0.0, &spec(1.0)) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn smoothed_ecdf_is_nondecreasing() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let scores: Vec<f64> = (0..40).map(|_| rng.sample(StandardNormal)).collect();
        let k = spec(0.3);
        let mut prev = -1.0;
        for i in -50..=50 {
            let t = f64::from(i) * 0.1;
            let v = smoothed_ecdf(&scores, t, &k);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn smoothing_approaches_raw_ecdf_away_from_sample_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let pos: Vec<f64> = (0..20).map(|_| rng.sample(StandardNormal)).collect();
        let neg: Vec<f64> = (0..20).map(|_| rng.sample(StandardNormal)).collect();
        let sample = PooledSample::new(pos.clone(), neg.clone()).unwrap();
        let pooled: Vec<f64> = sample.pooled_values().collect();
        let h = 1e-3;
        let k = spec(h);
        for i in -40..=40 {
            let t = f64::from(i) * 0.1 + 0.0123;
            if pooled.iter().any(|&v| (v - t).abs() < 10.0 * h) {
                continue;
            }
            assert!((smoothed_ecdf(&pooled, t, &k) - sample.pooled_ecdf(t)).abs() < 1e-6);
        }
    }

    #[test]
    fn bandwidth_rule() {
        assert_eq!(default_bandwidth(1), 1.0);
        assert!((default_bandwidth(300) - 0.3195).abs() < 1e-4);
        assert!((default_bandwidth(100_000) - 0.1).abs() < 1e-12);
        assert_eq!(scaled_bandwidth(2.0, 1), 2.0);
    }

    #[test]
    fn criterion_with_single_tied_pair_is_phi_of_half() {
        let data = FeatureSample::new(vec![vec![0.0, 0.0]], vec![vec![0.0, 0.0]]).unwrap();
        let model = ScoringModel::linear(vec![1.0, 1.0]).unwrap();
        for h in [0.05, 1.0, 7.0] {
            let w = smoothed_criterion(&model, &data, &ScoreGen::Mww, &spec(h)).unwrap();
            assert!((w - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn vanishing_bandwidth_recovers_midpoint_ranks() {
        // As h -> 0 the smoothed c.d.f. at the i-th positive tends to
        // (rank_i - 1/2) / N on tie-free data (the self-term contributes 1/2).
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let data = random_sample(&mut rng, 12, 9, 3);
        let model = ScoringModel::linear(vec![0.4, -1.0, 0.2]).unwrap();
        let scores = pooled_scores(&model, &data).unwrap();
        let sample =
            PooledSample::new(scores[..data.n()].to_vec(), scores[data.n()..].to_vec()).unwrap();
        let total = sample.pooled_size() as f64;
        let phi = ScoreGen::pol(3).unwrap();
        let expected: f64 = sample
            .rank_positives()
            .iter()
            .map(|&r| phi.value((r - 0.5) / total).unwrap())
            .sum::<f64>()
            / sample.n() as f64;
        let w = smoothed_criterion(&model, &data, &phi, &spec(1e-8)).unwrap();
        assert!((w - expected).abs() < 1e-6, "{w} vs {expected}");
    }

    #[test]
    fn criterion_matches_term_by_term_reimplementation() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let data = random_sample(&mut rng, 50, 50, 4);
        let theta: Vec<f64> = (0..4).map(|_| rng.sample(StandardNormal)).collect();
        let model = ScoringModel::linear(theta.clone()).unwrap();
        let h = default_bandwidth(data.pooled_size());
        let phi = ScoreGen::rtb_default(0.9).unwrap();

        // Independent term-by-term evaluation of the defining formula.
        let score = |z: &[f64]| z.iter().zip(&theta).map(|(a, b)| a * b).sum::<f64>();
        let total = data.pooled_size() as f64;
        let mut expected = 0.0;
        for x in data.positives() {
            let t = score(x);
            let mut f = 0.0;
            for z in data.pooled_rows() {
                f += crate::gauss::norm_cdf((t - score(z)) / h);
            }
            expected += phi.value(f / total).unwrap();
        }
        expected /= data.n() as f64;

        let w = smoothed_criterion(&model, &data, &phi, &spec(h)).unwrap();
        assert!((w - expected).abs() < 1e-12);
    }

    #[test]
    fn gradient_vanishes_when_all_rows_coincide() {
        let row = vec![0.7, -0.3];
        let data = FeatureSample::new(vec![row.clone(); 4], vec![row; 3]).unwrap();
        let model = ScoringModel::linear(vec![1.0, 2.0]).unwrap();
        let g = criterion_gradient(&model, &data, &ScoreGen::Mww, &spec(0.5)).unwrap();
        assert!(g.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn gradient_requires_smooth_phi() {
        let data = FeatureSample::new(vec![vec![1.0]], vec![vec![0.0]]).unwrap();
        let model = ScoringModel::linear(vec![1.0]).unwrap();
        assert!(matches!(
            criterion_gradient(&model, &data, &ScoreGen::Median, &spec(0.5)),
            Err(Error::NotDifferentiable(_))
        ));
    }

    fn finite_difference_check(kind: ModelKind, d: usize, phi: &ScoreGen, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = random_sample(&mut rng, 10, 10, d);
        let p = kind.param_dim(d);
        let params: Vec<f64> = (0..p).map(|_| rng.sample(StandardNormal)).collect();
        let model = ScoringModel::from_params(kind, d, &params).unwrap();
        let k = spec(default_bandwidth(data.pooled_size()));
        let grad = criterion_gradient(&model, &data, phi, &k).unwrap();

        let step = 1e-5;
        let mut fd = vec![0.0; p];
        for j in 0..p {
            let mut hi = params.clone();
            let mut lo = params.clone();
            hi[j] += step;
            lo[j] -= step;
            let whi = smoothed_criterion(
                &ScoringModel::from_params(kind, d, &hi).unwrap(),
                &data,
                phi,
                &k,
            )
            .unwrap();
            let wlo = smoothed_criterion(
                &ScoringModel::from_params(kind, d, &lo).unwrap(),
                &data,
                phi,
                &k,
            )
            .unwrap();
            fd[j] = (whi - wlo) / (2.0 * step);
        }
        let scale = grad.iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(1e-10);
        let err = grad
            .iter()
            .zip(&fd)
            .fold(0.0f64, |a, (g, f)| a.max((g - f).abs()))
            / scale;
        assert!(err < 1e-4, "relative max-norm error {err}");
    }

    #[test]
    fn gradient_matches_finite_differences_linear() {
        finite_difference_check(ModelKind::Linear, 3, &ScoreGen::Mww, 21);
        finite_difference_check(
            ModelKind::Linear,
            3,
            &ScoreGen::rtb_default(0.9).unwrap(),
            22,
        );
    }

    #[test]
    fn gradient_matches_finite_differences_quadratic() {
        finite_difference_check(ModelKind::QuadraticScale, 4, &ScoreGen::pol(3).unwrap(), 23);
    }
}
