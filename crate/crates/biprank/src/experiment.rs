//! Seeded Monte-Carlo experiment harness: replication loop, training per
//! score-generating function, test-set ROC evaluation, and file emission.
//!
//! Everything derives deterministically from the master seed: replication
//! `b` trains on a sample seeded with `derive_seed(seed_b, 1)`, evaluates on
//! one shared test sample seeded with `derive_seed(seed_b, 2)`, and the fit
//! for the `i`-th score-generating function starts from
//! `derive_seed(seed_b, 3 + i)`, where `seed_b = derive_seed(master, b)`.
//! Replications run on a worker pool; records are collected in replication
//! order, so outputs are byte-identical across runs and thread counts.

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::models::{FeatureSample, ModelKind, ScoringModel};
use crate::optimizer::{fit, GaConfig};
use crate::roceval::{
    average_curves_with, empirical_auc, empirical_roc, w_phi_from_roc, CurveSummary, RocCurve,
};
use crate::scoregen::ScoreGen;
use crate::svg;
use crate::synthdata::{
    derive_seed, draw_location_sample, draw_scale_sample, optimal_roc_location,
    optimal_theta_location, optimal_theta_scale_lr, LocationConfig, ScaleConfig,
};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use std::path::Path;

/// Breakpoint count used when sampling closed-form reference curves.
const REFERENCE_BREAKS: usize = 2001;
/// Seed stream of the scale-model reference sample.
const REFERENCE_STREAM: u64 = u64::MAX;

/// One successful (replication, phi) cell.
#[derive(Debug, Clone)]
pub struct RepRecord {
    pub rep: usize,
    pub phi: String,
    pub params: Vec<f64>,
    pub trajectory: Vec<f64>,
    pub stopped_at: usize,
    pub test_auc: f64,
    pub curve: RocCurve,
}

/// One failed (replication, phi) cell; the run continues past it.
#[derive(Debug, Clone)]
pub struct RepFailure {
    pub rep: usize,
    pub phi: String,
    pub message: String,
}

/// Per-phi aggregate over the successful replications.
#[derive(Debug, Clone)]
pub struct PhiAggregate {
    pub phi: String,
    pub mean_auc: f64,
    pub std_auc: f64,
    /// Replication index whose test curve is closest to the reference.
    pub best_rep: usize,
    /// Replication index whose test curve is farthest from the reference.
    pub worst_rep: usize,
    pub summary: CurveSummary,
    best_curve: RocCurve,
    worst_curve: RocCurve,
}

/// Full outcome of [`execute`].
#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub records: Vec<RepRecord>,
    pub failures: Vec<RepFailure>,
    pub aggregates: Vec<PhiAggregate>,
    /// Reference optimal curve: closed form for location models, the
    /// empirical curve of the likelihood-ratio scorer for scale models.
    pub reference: RocCurve,
    pub reference_auc: f64,
}

enum ModelInstance {
    Location(LocationConfig),
    Scale(ScaleConfig),
}

impl ModelInstance {
    fn draw(&self, n: usize, m: usize, seed: u64) -> Result<FeatureSample> {
        match self {
            ModelInstance::Location(cfg) => draw_location_sample(cfg, n, m, seed),
            ModelInstance::Scale(cfg) => draw_scale_sample(cfg, n, m, seed),
        }
    }
}

/// Runs the configured experiment in memory; writes nothing.
pub fn execute(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let instance = if cfg.model.is_location() {
        ModelInstance::Location(cfg.model.location_config(cfg.dim)?)
    } else {
        ModelInstance::Scale(cfg.model.scale_config(cfg.dim)?)
    };
    let (reference, reference_auc) = reference_curve(cfg, &instance)?;

    // The harness always needs trajectories for its outputs.
    let mut ga = cfg.ga.clone();
    ga.record_trajectory = true;

    let cells: Vec<(Vec<RepRecord>, Vec<RepFailure>)> = (0..cfg.replications)
        .into_par_iter()
        .map(|rep| run_replication(cfg, &instance, &ga, rep))
        .collect::<Result<_>>()?;

    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (mut recs, mut fails) in cells {
        records.append(&mut recs);
        failures.append(&mut fails);
    }

    let mut aggregates = Vec::new();
    for phi in &cfg.phis {
        let label = phi.label();
        let phi_records: Vec<&RepRecord> = records.iter().filter(|r| r.phi == label).collect();
        if phi_records.is_empty() {
            continue;
        }
        let curves: Vec<RocCurve> = phi_records.iter().map(|r| r.curve.clone()).collect();
        let summary =
            average_curves_with(&curves, cfg.roc_grid, &reference, cfg.best_worst_metric)?;
        let count = phi_records.len() as f64;
        let mean_auc = phi_records.iter().map(|r| r.test_auc).sum::<f64>() / count;
        let var = phi_records
            .iter()
            .map(|r| (r.test_auc - mean_auc).powi(2))
            .sum::<f64>()
            / count;
        aggregates.push(PhiAggregate {
            phi: label,
            mean_auc,
            std_auc: var.sqrt(),
            best_rep: phi_records[summary.best].rep,
            worst_rep: phi_records[summary.worst].rep,
            best_curve: curves[summary.best].clone(),
            worst_curve: curves[summary.worst].clone(),
            summary,
        });
    }

    Ok(ExperimentResult {
        records,
        failures,
        aggregates,
        reference,
        reference_auc,
    })
}

/// Runs the experiment and writes `config.resolved.txt`, `replications.csv`,
/// `roc_grid.csv`, `trajectory.csv` (plus the SVG charts when enabled) into
/// the configured output directory.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let result = execute(cfg)?;
    std::fs::create_dir_all(&cfg.out_dir)?;
    for (name, content) in artifacts(cfg, &result) {
        write_file(&cfg.out_dir.join(name), &content)?;
    }
    Ok(result)
}

fn run_replication(
    cfg: &ExperimentConfig,
    instance: &ModelInstance,
    ga: &GaConfig,
    rep: usize,
) -> Result<(Vec<RepRecord>, Vec<RepFailure>)> {
    let rep_seed = derive_seed(cfg.master_seed, rep as u64);
    let train = instance.draw(cfg.n_train, cfg.m_train, derive_seed(rep_seed, 1))?;
    let test = instance.draw(cfg.n_test, cfg.m_test, derive_seed(rep_seed, 2))?;

    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (idx, phi) in cfg.phis.iter().enumerate() {
        let fit_seed = derive_seed(rep_seed, 3 + idx as u64);
        match fit_and_evaluate(cfg, ga, &train, &test, phi, fit_seed) {
            Ok(mut record) => {
                record.rep = rep;
                records.push(record);
            }
            Err(err) => failures.push(RepFailure {
                rep,
                phi: phi.label(),
                message: err.to_string(),
            }),
        }
    }
    Ok((records, failures))
}

fn fit_and_evaluate(
    cfg: &ExperimentConfig,
    ga: &GaConfig,
    train: &FeatureSample,
    test: &FeatureSample,
    phi: &ScoreGen,
    fit_seed: u64,
) -> Result<RepRecord> {
    let outcome = fit(train, cfg.scorer, None, phi, ga, fit_seed)?;
    let model = ScoringModel::from_params(cfg.scorer, cfg.dim, &outcome.final_params)?;
    let (pos, neg) = score_sample(&model, test)?;
    let curve = empirical_roc(&pos, &neg)?;
    let test_auc = empirical_auc(&pos, &neg)?;
    Ok(RepRecord {
        rep: 0,
        phi: phi.label(),
        params: outcome.final_params,
        trajectory: outcome.criterion_trajectory,
        stopped_at: outcome.stopped_at,
        test_auc,
        curve,
    })
}

fn score_sample(model: &ScoringModel, data: &FeatureSample) -> Result<(Vec<f64>, Vec<f64>)> {
    let pos = data
        .positives()
        .iter()
        .map(|z| model.score(z))
        .collect::<Result<Vec<f64>>>()?;
    let neg = data
        .negatives()
        .iter()
        .map(|z| model.score(z))
        .collect::<Result<Vec<f64>>>()?;
    Ok((pos, neg))
}

fn reference_curve(cfg: &ExperimentConfig, instance: &ModelInstance) -> Result<(RocCurve, f64)> {
    match instance {
        ModelInstance::Location(loc) => {
            let theta = optimal_theta_location(loc)?;
            // theta* of a null model (eps = 0) is the zero vector; fall back
            // to the diagonal reference instead of scoring with it.
            let curve = if theta.iter().all(|&v| v == 0.0) {
                RocCurve::diagonal()
            } else {
                RocCurve::from_function(
                    |alpha| optimal_roc_location(loc, alpha).unwrap_or(alpha),
                    REFERENCE_BREAKS,
                )?
            };
            let auc = curve.auc();
            Ok((curve, auc))
        }
        ModelInstance::Scale(scale) => {
            let packed = optimal_theta_scale_lr(scale)?;
            let model = ScoringModel::from_params(ModelKind::QuadraticScale, cfg.dim, &packed)?;
            let sample = draw_scale_sample(
                scale,
                cfg.n_test,
                cfg.m_test,
                derive_seed(cfg.master_seed, REFERENCE_STREAM),
            )?;
            let (pos, neg) = score_sample(&model, &sample)?;
            let curve = empirical_roc(&pos, &neg)?;
            let auc = curve.auc();
            Ok((curve, auc))
        }
    }
}

/// Renders the output files as `(name, content)` pairs, in the order they
/// are written.
pub fn artifacts(cfg: &ExperimentConfig, result: &ExperimentResult) -> Vec<(String, String)> {
    let mut files = vec![
        ("config.resolved.txt".to_string(), cfg.resolved_echo()),
        ("replications.csv".to_string(), replications_csv(result)),
        ("roc_grid.csv".to_string(), roc_grid_csv(result)),
        ("trajectory.csv".to_string(), trajectory_csv(result)),
    ];
    if cfg.emit_svg {
        files.push(("roc.svg".to_string(), roc_svg(result)));
        files.push(("trajectory.svg".to_string(), trajectory_svg(result)));
    }
    files
}

fn replications_csv(result: &ExperimentResult) -> String {
    let mut out = String::from("rep,phi,test_auc,train_criterion_final,stopped_at\n");
    for r in &result.records {
        let final_criterion = r.trajectory.last().copied().unwrap_or(f64::NAN);
        out.push_str(&format!(
            "{},{},{:.6},{:.6},{}\n",
            r.rep, r.phi, r.test_auc, final_criterion, r.stopped_at
        ));
    }
    out
}

fn roc_grid_csv(result: &ExperimentResult) -> String {
    let mut out = String::from("phi,alpha,mean_beta,std_beta,best_beta,worst_beta,optimal_beta\n");
    for agg in &result.aggregates {
        for (idx, &alpha) in agg.summary.alphas.iter().enumerate() {
            out.push_str(&format!(
                "{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
                agg.phi,
                alpha,
                agg.summary.mean[idx],
                agg.summary.std[idx],
                agg.best_curve.beta_at(alpha),
                agg.worst_curve.beta_at(alpha),
                result.reference.beta_at(alpha),
            ));
        }
    }
    out
}

fn trajectory_csv(result: &ExperimentResult) -> String {
    let mut out = String::from("rep,phi,step,criterion\n");
    for r in &result.records {
        for (step, w) in r.trajectory.iter().enumerate() {
            out.push_str(&format!("{},{},{},{:.6}\n", r.rep, r.phi, step, w));
        }
    }
    out
}

fn roc_svg(result: &ExperimentResult) -> String {
    let mut series = Vec::new();
    for agg in &result.aggregates {
        let points = agg
            .summary
            .alphas
            .iter()
            .zip(&agg.summary.mean)
            .map(|(&a, &b)| (a, b))
            .collect();
        series.push(svg::Series {
            label: agg.phi.clone(),
            points,
        });
    }
    series.push(svg::Series {
        label: "optimal".to_string(),
        points: result.reference.points().to_vec(),
    });
    svg::line_chart("mean test ROC", "alpha", "beta", &series)
}

fn trajectory_svg(result: &ExperimentResult) -> String {
    let mut series = Vec::new();
    let labels: Vec<String> = result
        .aggregates
        .iter()
        .map(|agg| agg.phi.clone())
        .collect();
    for label in labels {
        let trajectories: Vec<&Vec<f64>> = result
            .records
            .iter()
            .filter(|r| r.phi == label)
            .map(|r| &r.trajectory)
            .collect();
        let longest = trajectories.iter().map(|t| t.len()).max().unwrap_or(0);
        let mut points = Vec::with_capacity(longest);
        for step in 0..longest {
            let values: Vec<f64> = trajectories
                .iter()
                .filter_map(|t| t.get(step).copied())
                .collect();
            if values.is_empty() {
                break;
            }
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            points.push((step as f64, mean));
        }
        series.push(svg::Series { label, points });
    }
    svg::line_chart("mean train criterion", "step", "criterion", &series)
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    std::fs::write(path, content.as_bytes())?;
    Ok(())
}

/// Configuration of the deviation-rate study.
#[derive(Debug, Clone)]
pub struct RateConfig {
    /// Score-generating function of the statistic under study.
    pub phi: ScoreGen,
    /// Pooled sizes of the ladder (balanced samples, `n = m = N/2`).
    pub n_ladder: Vec<usize>,
    /// Number of fixed random linear scorers.
    pub scorer_count: usize,
    pub dim: usize,
    /// Location-model shift of the data-generating pair.
    pub epsilon: f64,
    pub seed: u64,
}

impl Default for RateConfig {
    fn default() -> Self {
        Self {
            phi: ScoreGen::Mww,
            n_ladder: vec![100, 400, 1600, 6400],
            scorer_count: 25,
            dim: 15,
            epsilon: 0.2,
            seed: 42,
        }
    }
}

/// One row of the rate table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint {
    pub n_pooled: usize,
    /// `max_s | (1/n) W_hat(s) - W(s) |` over the fixed scorer set.
    pub sup_deviation: f64,
}

/// Estimates the sup deviation of the normalized rank statistic from its
/// population value over a fixed set of linear scorers, for each pooled size
/// of the ladder. Population values come from the scorer's closed-form
/// Gaussian ROC curve via [`w_phi_from_roc`].
pub fn rate_experiment(cfg: &RateConfig) -> Result<Vec<RatePoint>> {
    if cfg.n_ladder.is_empty() || cfg.scorer_count == 0 {
        return Err(Error::Config(
            "rate study needs a ladder and scorers".into(),
        ));
    }
    let loc = LocationConfig::custom(cfg.epsilon, cfg.dim)?;
    let p = 0.5;

    // Fixed scorer set, independent of the ladder.
    let mut scorers = Vec::with_capacity(cfg.scorer_count);
    for s in 0..cfg.scorer_count {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 1000 + s as u64));
        let mut theta: Vec<f64> = (0..cfg.dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = theta.iter().map(|v| v * v).sum::<f64>().sqrt();
        theta.iter_mut().for_each(|v| *v /= norm);
        scorers.push(theta);
    }

    // Population value per scorer: a linear score of a Gaussian pair is a
    // univariate Gaussian pair with common variance, so its ROC curve is the
    // binormal form with (signed) separation <theta, mu_x - mu_y> / sd.
    let mu_diff: Vec<f64> = loc.mu_y.iter().map(|v| loc.epsilon * v).collect();
    let mut targets = Vec::with_capacity(scorers.len());
    for theta in &scorers {
        let shift: f64 = theta.iter().zip(&mu_diff).map(|(a, b)| a * b).sum();
        let t = nalgebra::DVector::from_column_slice(theta);
        let sd = (&loc.sigma * &t).dot(&t).max(1e-300).sqrt();
        let separation = shift / sd;
        let curve = RocCurve::from_function(
            |alpha| {
                1.0 - crate::gauss::norm_cdf(crate::gauss::norm_quantile(1.0 - alpha) - separation)
            },
            REFERENCE_BREAKS,
        )?;
        targets.push(w_phi_from_roc(&curve, &cfg.phi, p)?);
    }

    let mut table = Vec::with_capacity(cfg.n_ladder.len());
    for (idx, &n_pooled) in cfg.n_ladder.iter().enumerate() {
        let n = (n_pooled / 2).max(1);
        let m = (n_pooled - n).max(1);
        let sample = draw_location_sample(&loc, n, m, derive_seed(cfg.seed, 2000 + idx as u64))?;
        let mut sup = 0.0f64;
        for (theta, target) in scorers.iter().zip(&targets) {
            let score = |z: &[f64]| z.iter().zip(theta).map(|(a, b)| a * b).sum::<f64>();
            let pos: Vec<f64> = sample.positives().iter().map(|z| score(z)).collect();
            let neg: Vec<f64> = sample.negatives().iter().map(|z| score(z)).collect();
            let pooled = crate::ranks::PooledSample::new(pos, neg)?;
            let normalized = pooled.linear_rank_statistic(&cfg.phi) / n as f64;
            sup = sup.max((normalized - target).abs());
        }
        table.push(RatePoint {
            n_pooled,
            sup_deviation: sup,
        });
    }
    Ok(table)
}

/// Least-squares slope of `log(sup deviation)` against `log N`.
pub fn rate_slope(table: &[RatePoint]) -> f64 {
    let points: Vec<(f64, f64)> = table
        .iter()
        .map(|p| ((p.n_pooled as f64).ln(), p.sup_deviation.max(1e-300).ln()))
        .collect();
    crate::linearization::least_squares_slope(&points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::PartialConfig;

    fn smoke_config(seed: u64) -> ExperimentConfig {
        PartialConfig {
            preset: Some("loc:eps=0.3".into()),
            dim: Some(2),
            phi_specs: Some(vec!["mww".into()]),
            n_train: Some(20),
            m_train: Some(20),
            n_test: Some(200),
            m_test: Some(200),
            replications: Some(2),
            iterations: Some(5),
            seed: Some(seed),
            ..Default::default()
        }
        .resolve()
        .unwrap()
    }

    #[test]
    fn smoke_run_produces_complete_results() {
        let cfg = smoke_config(7);
        let result = execute(&cfg).unwrap();
        assert_eq!(result.records.len(), 2);
        assert!(result.failures.is_empty());
        assert_eq!(result.aggregates.len(), 1);
        for r in &result.records {
            assert!((0.0..=1.0).contains(&r.test_auc));
            assert_eq!(r.trajectory.len(), r.stopped_at + 1);
        }
        let files = artifacts(&cfg, &result);
        assert_eq!(files.len(), 4);
        assert!(files.iter().all(|(_, content)| !content.is_empty()));
    }

    #[test]
    fn execution_is_deterministic_per_master_seed() {
        let cfg = smoke_config(11);
        let a = artifacts(&cfg, &execute(&cfg).unwrap());
        let b = artifacts(&cfg, &execute(&cfg).unwrap());
        assert_eq!(a, b);
        let other = smoke_config(12);
        let c = artifacts(&other, &execute(&other).unwrap());
        assert_ne!(a[1].1, c[1].1);
    }

    #[test]
    fn scale_models_run_with_an_empirical_reference() {
        let cfg = PartialConfig {
            preset: Some("scale2".into()),
            dim: Some(3),
            phi_specs: Some(vec!["mww".into()]),
            n_train: Some(25),
            m_train: Some(25),
            n_test: Some(400),
            m_test: Some(400),
            replications: Some(1),
            iterations: Some(5),
            seed: Some(3),
            ..Default::default()
        }
        .resolve()
        .unwrap();
        let result = execute(&cfg).unwrap();
        // The likelihood-ratio reference scorer must beat chance.
        assert!(result.reference_auc > 0.5, "{}", result.reference_auc);
    }

    #[test]
    fn rate_table_shrinks_with_n() {
        let table = rate_experiment(&RateConfig::default()).unwrap();
        assert_eq!(table.len(), 4);
        // The acceptance suite pins the [-0.65, -0.35] band on a 10-seed
        // median; a single seed only gets a loose decay check.
        assert!(
            rate_slope(&table) < -0.2,
            "slope {} (table {table:?})",
            rate_slope(&table)
        );
    }

    #[test]
    fn one_dimensional_deviation_shrinks_across_seeds() {
        // In d = 1 the single unit scorer is the optimal direction up to
        // sign; the deviation at the large end of the ladder should beat
        // the small end in nearly every seeded draw.
        let mut shrank = 0;
        for seed in 0..10 {
            let cfg = RateConfig {
                n_ladder: vec![100, 6400],
                scorer_count: 1,
                dim: 1,
                seed: 300 + seed,
                ..Default::default()
            };
            let table = rate_experiment(&cfg).unwrap();
            if table[1].sup_deviation < table[0].sup_deviation {
                shrank += 1;
            }
        }
        assert!(shrank >= 9, "deviation shrank in only {shrank}/10 seeds");
    }

    #[test]
    fn csv_headers_match_the_documented_schema() {
        let cfg = smoke_config(1);
        let result = execute(&cfg).unwrap();
        let files = artifacts(&cfg, &result);
        assert!(files[1]
            .1
            .starts_with("rep,phi,test_auc,train_criterion_final,stopped_at\n"));
        assert!(files[2]
            .1
            .starts_with("phi,alpha,mean_beta,std_beta,best_beta,worst_beta,optimal_beta\n"));
        assert!(files[3].1.starts_with("rep,phi,step,criterion\n"));
    }
}
