//! Fast self-check suite behind the `check` CLI subcommand: one smoke-scale
//! probe per core identity, printed as pass/fail lines.

use crate::config::PartialConfig;
use crate::experiment::{artifacts, execute};
use crate::models::{ModelKind, ScoringModel};
use crate::ranks::PooledSample;
use crate::roceval::{empirical_auc, empirical_roc, w_phi_from_roc};
use crate::scoregen::ScoreGen;
use crate::smoothing::{criterion_gradient, default_bandwidth, smoothed_criterion, KernelSpec};
use crate::synthdata::{derive_seed, optimal_roc_location, LocationConfig};
use crate::{linearization, models::FeatureSample};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Outcome of one self check.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self {
            name,
            passed,
            detail,
        }
    }
}

/// Runs every self check with streams derived from `seed`.
pub fn self_check(seed: u64) -> Vec<CheckOutcome> {
    vec![
        wilcoxon_identity(derive_seed(seed, 1)),
        rank_invariance(derive_seed(seed, 2)),
        gradient_agreement(derive_seed(seed, 3)),
        w_phi_identity(derive_seed(seed, 4)),
        roc_star_dominance(),
        hajek_reconstruction(derive_seed(seed, 5)),
        determinism(derive_seed(seed, 6)),
    ]
}

fn wilcoxon_identity(seed: u64) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let n = rng.gen_range(1..=50);
        let m = rng.gen_range(1..=50);
        let pos: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let neg: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
        let sample = PooledSample::new(pos.clone(), neg.clone()).unwrap();
        let auc = empirical_auc(&pos, &neg).unwrap();
        let expected = (n * m) as f64 * auc + (n * (n + 1)) as f64 / 2.0;
        worst = worst.max((sample.wilcoxon_statistic() - expected).abs());
    }
    CheckOutcome::new(
        "wilcoxon-auc-identity",
        worst < 1e-12,
        format!("max |difference| = {worst:.3e}"),
    )
}

fn rank_invariance(seed: u64) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phi = ScoreGen::pol(3).unwrap();
    let mut ok = true;
    for _ in 0..20 {
        let pos: Vec<f64> = (0..15).map(|_| rng.sample(StandardNormal)).collect();
        let neg: Vec<f64> = (0..15).map(|_| rng.sample(StandardNormal)).collect();
        let base = PooledSample::new(pos.clone(), neg.clone()).unwrap();
        for transform in [
            |v: f64| v.exp(),
            |v: f64| 2.5 * v + 1.0,
            |v: f64| v.powi(3) + v,
        ] {
            let mapped = PooledSample::new(
                pos.iter().map(|&v| transform(v)).collect(),
                neg.iter().map(|&v| transform(v)).collect(),
            )
            .unwrap();
            ok &= base.rank_positives() == mapped.rank_positives();
            ok &= base.linear_rank_statistic(&phi) == mapped.linear_rank_statistic(&phi);
        }
    }
    CheckOutcome::new(
        "rank-invariance",
        ok,
        "ranks bitwise equal under increasing transforms".to_string(),
    )
}

fn gradient_agreement(seed: u64) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for case in 0..10 {
        let d = rng.gen_range(2..=4);
        let kind = if case % 2 == 0 {
            ModelKind::Linear
        } else {
            ModelKind::QuadraticScale
        };
        let row = |rng: &mut ChaCha8Rng| (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let data = FeatureSample::new(
            (0..10).map(|_| row(&mut rng)).collect(),
            (0..10).map(|_| row(&mut rng)).collect(),
        )
        .unwrap();
        let p = kind.param_dim(d);
        let params: Vec<f64> = (0..p).map(|_| rng.sample(StandardNormal)).collect();
        let model = ScoringModel::from_params(kind, d, &params).unwrap();
        let spec = KernelSpec::gaussian(default_bandwidth(data.pooled_size())).unwrap();
        let phi = ScoreGen::Mww;
        let grad = criterion_gradient(&model, &data, &phi, &spec).unwrap();
        let step = 1e-5;
        let mut err: f64 = 0.0;
        let scale = grad.iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(1e-10);
        for j in 0..p {
            let mut hi = params.clone();
            let mut lo = params.clone();
            hi[j] += step;
            lo[j] -= step;
            let whi = smoothed_criterion(
                &ScoringModel::from_params(kind, d, &hi).unwrap(),
                &data,
                &phi,
                &spec,
            )
            .unwrap();
            let wlo = smoothed_criterion(
                &ScoringModel::from_params(kind, d, &lo).unwrap(),
                &data,
                &phi,
                &spec,
            )
            .unwrap();
            err = err.max((grad[j] - (whi - wlo) / (2.0 * step)).abs());
        }
        worst = worst.max(err / scale);
    }
    CheckOutcome::new(
        "gradient-finite-difference",
        worst < 1e-4,
        format!("max relative error = {worst:.3e}"),
    )
}

fn w_phi_identity(seed: u64) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let pos: Vec<f64> = (0..20)
            .map(|_| rng.sample::<f64, _>(StandardNormal) + 0.7)
            .collect();
        let neg: Vec<f64> = (0..15).map(|_| rng.sample(StandardNormal)).collect();
        let curve = empirical_roc(&pos, &neg).unwrap();
        for p in [0.25, 0.5, 0.75] {
            let w = w_phi_from_roc(&curve, &ScoreGen::Mww, p).unwrap();
            worst = worst.max((w - (p / 2.0 + (1.0 - p) * curve.auc())).abs());
        }
    }
    CheckOutcome::new(
        "w-phi-roc-identity",
        worst < 2e-4,
        format!("max |difference| = {worst:.3e}"),
    )
}

fn roc_star_dominance() -> CheckOutcome {
    let mut ok = true;
    let mut detail = String::new();
    for level in 1..=3u8 {
        let cfg = LocationConfig::preset(level, 15).unwrap();
        let mut prev = 0.0;
        let mut prev_diff = f64::INFINITY;
        for i in 1..=999 {
            let alpha = f64::from(i) / 1000.0;
            let beta = optimal_roc_location(&cfg, alpha).unwrap();
            if beta < alpha - 1e-12 {
                ok = false;
                detail = format!("loc{level} dips below the diagonal at alpha = {alpha}");
            }
            let diff = beta - prev;
            if diff > prev_diff + 1e-9 {
                ok = false;
                detail = format!("loc{level} is not concave at alpha = {alpha}");
            }
            prev = beta;
            prev_diff = diff;
        }
    }
    if ok {
        detail = "closed form dominates the diagonal and is concave".to_string();
    }
    CheckOutcome::new("optimal-roc-shape", ok, detail)
}

fn hajek_reconstruction(seed: u64) -> CheckOutcome {
    let pair = linearization::KnownUnivariatePair::new(
        linearization::GaussianDist::new(1.0, 1.0).unwrap(),
        linearization::GaussianDist::standard(),
        0.5,
    )
    .unwrap();
    let mut worst: f64 = 0.0;
    for rep in 0..5 {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, rep));
        let pos: Vec<f64> = (0..30)
            .map(|_| 1.0 + rng.sample::<f64, _>(StandardNormal))
            .collect();
        let neg: Vec<f64> = (0..30).map(|_| rng.sample(StandardNormal)).collect();
        let sample = PooledSample::new(pos, neg).unwrap();
        let exact = sample.linear_rank_statistic(&ScoreGen::Mww);
        let c = linearization::hajek_components(&sample, &pair, &ScoreGen::Mww).unwrap();
        worst = worst.max((c.reconstruction(30) - exact).abs());
    }
    CheckOutcome::new(
        "hajek-reconstruction",
        worst < 1e-10,
        format!("max residual = {worst:.3e}"),
    )
}

fn determinism(seed: u64) -> CheckOutcome {
    let cfg = PartialConfig {
        preset: Some("loc:eps=0.3".into()),
        dim: Some(2),
        phi_specs: Some(vec!["mww".into()]),
        n_train: Some(15),
        m_train: Some(15),
        n_test: Some(100),
        m_test: Some(100),
        replications: Some(2),
        iterations: Some(4),
        seed: Some(seed),
        ..Default::default()
    }
    .resolve()
    .unwrap();
    let a = execute(&cfg).map(|r| artifacts(&cfg, &r));
    let b = execute(&cfg).map(|r| artifacts(&cfg, &r));
    let passed = matches!((&a, &b), (Ok(x), Ok(y)) if x == y);
    CheckOutcome::new(
        "determinism",
        passed,
        "two smoke runs produce identical artifacts".to_string(),
    )
}
