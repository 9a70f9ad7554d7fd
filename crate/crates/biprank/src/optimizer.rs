//! Gradient ascent on the smoothed ranking criterion with early stopping.
//!
//! The update rule is the plain ascent step on the raw-sum criterion,
//! `theta <- theta + eta * grad(W_hat)`; no line search, no momentum.
//! Iterations stop once the parameter movement becomes negligible relative
//! to the parameter norm.

use crate::error::{Error, Result};
use crate::models::{FeatureSample, ModelKind, ScoringModel};
use crate::scoregen::ScoreGen;
use crate::smoothing::{criterion_gradient, scaled_bandwidth, smoothed_criterion, KernelSpec};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// How the smoothing bandwidth is chosen for a training sample of pooled
/// size `N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BandwidthRule {
    /// Fixed bandwidth, independent of the sample.
    Fixed(f64),
    /// `h = constant * N^(-1/5)`, the bias/variance-balancing rate.
    PowerLaw { constant: f64 },
}

impl BandwidthRule {
    pub fn bandwidth(self, n_pooled: usize) -> f64 {
        match self {
            BandwidthRule::Fixed(h) => h,
            BandwidthRule::PowerLaw { constant } => scaled_bandwidth(constant, n_pooled),
        }
    }
}

impl Default for BandwidthRule {
    fn default() -> Self {
        BandwidthRule::PowerLaw { constant: 1.0 }
    }
}

/// Gradient-ascent configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct GaConfig {
    /// Maximum number of ascent steps `T >= 1`.
    pub iterations: usize,
    /// Step size `eta > 0`.
    pub step_size: f64,
    pub bandwidth: BandwidthRule,
    /// Relative movement threshold: stop once
    /// `|theta_new - theta| < stop_tolerance * (1 + |theta_new|)`.
    /// Zero disables early stopping.
    pub stop_tolerance: f64,
    /// Record the criterion value at the initial point and after every step.
    pub record_trajectory: bool,
    /// Renormalize the parameter vector to unit norm after each step. The
    /// exact criterion is invariant under positive scaling of the scores, so
    /// this only reconditions the smoothing; off by default.
    pub renormalize: bool,
}

impl GaConfig {
    /// `T` iterations with the step size `eta = 1/sqrt(T)` and defaults
    /// everywhere else.
    pub fn with_iterations(iterations: usize) -> Self {
        Self {
            iterations: iterations.max(1),
            step_size: 1.0 / (iterations.max(1) as f64).sqrt(),
            bandwidth: BandwidthRule::default(),
            stop_tolerance: 1e-6,
            record_trajectory: true,
            renormalize: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidInput("iterations T must be >= 1".into()));
        }
        if !(self.step_size.is_finite() && self.step_size >= 0.0) {
            return Err(Error::InvalidInput(
                "step size must be finite and >= 0".into(),
            ));
        }
        if !(self.stop_tolerance.is_finite() && self.stop_tolerance >= 0.0) {
            return Err(Error::InvalidInput("stop tolerance must be >= 0".into()));
        }
        Ok(())
    }
}

impl Default for GaConfig {
    fn default() -> Self {
        Self::with_iterations(50)
    }
}

/// Outcome of a gradient-ascent run.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub final_params: Vec<f64>,
    /// Criterion at the initial point and after each performed step
    /// (`stopped_at + 1` entries); empty when recording is off.
    pub criterion_trajectory: Vec<f64>,
    /// Number of ascent steps actually performed.
    pub stopped_at: usize,
}

/// Runs gradient ascent over the chosen scoring class.
///
/// When `init_params` is `None` the start point is a standard-normal
/// direction of unit norm drawn from `seed`. The result is deterministic in
/// `(data, init, phi, cfg, seed)`.
pub fn fit(
    data: &FeatureSample,
    kind: ModelKind,
    init_params: Option<&[f64]>,
    phi: &ScoreGen,
    cfg: &GaConfig,
    seed: u64,
) -> Result<FitResult> {
    cfg.validate()?;
    if !phi.is_differentiable() {
        return Err(Error::NotDifferentiable(phi.name()));
    }
    let dim = kind.param_dim(data.dim());
    let mut params: Vec<f64> = match init_params {
        Some(p) => {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            p.to_vec()
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut direction: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
            let norm = norm(&direction);
            direction.iter_mut().for_each(|v| *v /= norm);
            direction
        }
    };

    let spec = KernelSpec::gaussian(cfg.bandwidth.bandwidth(data.pooled_size()))?;
    let n = data.n() as f64;
    let mut trajectory = Vec::new();
    if cfg.record_trajectory {
        let model = ScoringModel::from_params(kind, data.dim(), &params)?;
        trajectory.push(smoothed_criterion(&model, data, phi, &spec)?);
    }

    let mut stopped_at = 0;
    for step in 0..cfg.iterations {
        let model = ScoringModel::from_params(kind, data.dim(), &params)?;
        let grad = criterion_gradient(&model, data, phi, &spec)?;
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFiniteGradient(step));
        }
        // The raw-sum criterion is n times the per-positive average.
        let scale = cfg.step_size * n;
        let mut next: Vec<f64> = params
            .iter()
            .zip(&grad)
            .map(|(p, g)| p + scale * g)
            .collect();
        if cfg.renormalize {
            let norm = norm(&next);
            if norm > 0.0 {
                next.iter_mut().for_each(|v| *v /= norm);
            }
        }
        let movement = params
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        params = next;
        stopped_at = step + 1;
        if cfg.record_trajectory {
            let model = ScoringModel::from_params(kind, data.dim(), &params)?;
            trajectory.push(smoothed_criterion(&model, data, phi, &spec)?);
        }
        if cfg.stop_tolerance > 0.0 && movement < cfg.stop_tolerance * (1.0 + norm(&params)) {
            break;
        }
    }

    Ok(FitResult {
        final_params: params,
        criterion_trajectory: trajectory,
        stopped_at,
    })
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shifted_gaussian_sample(
        seed: u64,
        n: usize,
        m: usize,
        d: usize,
        shift: f64,
    ) -> FeatureSample {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut row = |offset: f64| -> Vec<f64> {
            (0..d)
                .map(|j| {
                    let z: f64 = rng.sample(StandardNormal);
                    if j == 0 {
                        z + offset
                    } else {
                        z
                    }
                })
                .collect()
        };
        let pos = (0..n).map(|_| row(shift)).collect();
        let neg = (0..m).map(|_| row(0.0)).collect();
        FeatureSample::new(pos, neg).unwrap()
    }

    #[test]
    fn zero_step_size_is_a_no_op() {
        let data = shifted_gaussian_sample(1, 15, 15, 3, 0.5);
        let mut cfg = GaConfig::with_iterations(10);
        cfg.step_size = 0.0;
        let init = vec![0.3, -0.2, 0.1];
        let fit = fit(
            &data,
            ModelKind::Linear,
            Some(&init),
            &ScoreGen::Mww,
            &cfg,
            7,
        )
        .unwrap();
        assert_eq!(fit.final_params, init);
        assert!(fit.criterion_trajectory.windows(2).all(|w| w[0] == w[1]));
        assert_eq!(fit.criterion_trajectory.len(), fit.stopped_at + 1);
    }

    #[test]
    fn identical_inputs_give_bitwise_identical_results() {
        let data = shifted_gaussian_sample(2, 20, 20, 4, 0.4);
        let cfg = GaConfig::with_iterations(8);
        let a = fit(&data, ModelKind::Linear, None, &ScoreGen::Mww, &cfg, 99).unwrap();
        let b = fit(&data, ModelKind::Linear, None, &ScoreGen::Mww, &cfg, 99).unwrap();
        assert_eq!(a, b);
        let c = fit(&data, ModelKind::Linear, None, &ScoreGen::Mww, &cfg, 100).unwrap();
        assert_ne!(a.final_params, c.final_params);
    }

    #[test]
    fn one_dimensional_ascent_keeps_the_informative_sign() {
        for seed in 0..10 {
            let data = shifted_gaussian_sample(seed, 40, 40, 1, 1.0);
            let cfg = GaConfig::with_iterations(30);
            let fit = fit(
                &data,
                ModelKind::Linear,
                Some(&[1.0]),
                &ScoreGen::Mww,
                &cfg,
                seed,
            )
            .unwrap();
            assert!(
                fit.final_params[0] > 0.0,
                "seed {seed}: theta drifted to {}",
                fit.final_params[0]
            );
        }
    }

    #[test]
    fn ascent_improves_the_criterion_on_separated_data() {
        let mut improvements = 0;
        let runs = 20;
        for seed in 0..runs {
            let data = shifted_gaussian_sample(seed, 40, 40, 5, 0.6);
            let cfg = GaConfig::with_iterations(25);
            let fit = fit(&data, ModelKind::Linear, None, &ScoreGen::Mww, &cfg, seed).unwrap();
            let w = &fit.criterion_trajectory;
            if w[w.len() - 1] >= w[0] {
                improvements += 1;
            }
        }
        assert!(
            improvements >= runs - 2,
            "only {improvements}/{runs} improved"
        );
    }

    #[test]
    fn trajectory_length_matches_stop_step() {
        let data = shifted_gaussian_sample(3, 10, 10, 2, 0.2);
        let mut cfg = GaConfig::with_iterations(40);
        cfg.stop_tolerance = 1e-2;
        let fit = fit(&data, ModelKind::Linear, None, &ScoreGen::Mww, &cfg, 5).unwrap();
        assert_eq!(fit.criterion_trajectory.len(), fit.stopped_at + 1);
        assert!(fit.stopped_at <= 40);
    }

    #[test]
    fn rejects_bad_inputs() {
        let data = shifted_gaussian_sample(4, 5, 5, 2, 0.0);
        let cfg = GaConfig::default();
        assert!(matches!(
            fit(&data, ModelKind::Linear, None, &ScoreGen::Median, &cfg, 0),
            Err(Error::NotDifferentiable(_))
        ));
        assert!(matches!(
            fit(
                &data,
                ModelKind::Linear,
                Some(&[1.0]),
                &ScoreGen::Mww,
                &cfg,
                0
            ),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn quadratic_class_fits_too() {
        let data = shifted_gaussian_sample(8, 25, 25, 3, 0.5);
        let cfg = GaConfig::with_iterations(10);
        let fit = fit(
            &data,
            ModelKind::QuadraticScale,
            None,
            &ScoreGen::pol(3).unwrap(),
            &cfg,
            11,
        )
        .unwrap();
        assert_eq!(fit.final_params.len(), 6);
        assert!(fit.final_params.iter().all(|p| p.is_finite()));
    }
}
