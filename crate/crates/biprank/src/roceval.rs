//! Empirical ROC curves, AUC, curve distances, the scalar `W_phi` summary of
//! a ROC curve, and the complexity-penalized model selector.
//!
//! A [`RocCurve`] is the increasing broken line through its stored
//! breakpoints. Vertical runs (several points sharing one alpha) are jumps of
//! the underlying function; [`RocCurve::beta_at`] resolves a query exactly at
//! a jump to the upper value, matching the right-continuous convention.

use crate::error::{Error, Result};
use crate::scoregen::ScoreGen;

/// Number of trapezoid nodes used by [`w_phi_from_roc`].
pub const W_PHI_GRID: usize = 2001;

/// A piecewise-linear nondecreasing curve in the unit square from (0,0) to
/// (1,1).
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    points: Vec<(f64, f64)>,
}

impl RocCurve {
    /// Validates the breakpoint list: endpoints (0,0) and (1,1), both
    /// coordinates nondecreasing and inside the unit square, consecutive
    /// points distinct.
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidInput(
                "a curve needs at least two points".into(),
            ));
        }
        let first = points[0];
        let last = points[points.len() - 1];
        if first != (0.0, 0.0) || last != (1.0, 1.0) {
            return Err(Error::InvalidInput(
                "curve must start at (0,0) and end at (1,1)".into(),
            ));
        }
        for w in points.windows(2) {
            let (a0, b0) = w[0];
            let (a1, b1) = w[1];
            if !(a1.is_finite() && b1.is_finite()) || !(0.0..=1.0).contains(&a1) {
                return Err(Error::InvalidInput(
                    "curve points must lie in the unit square".into(),
                ));
            }
            if a1 < a0 || b1 < b0 {
                return Err(Error::InvalidInput(
                    "curve coordinates must be nondecreasing".into(),
                ));
            }
            if a1 == a0 && b1 == b0 {
                return Err(Error::InvalidInput("duplicate curve point".into()));
            }
        }
        Ok(Self { points })
    }

    /// The chance line beta = alpha.
    pub fn diagonal() -> Self {
        Self {
            points: vec![(0.0, 0.0), (1.0, 1.0)],
        }
    }

    /// Samples a closed-form curve `alpha -> beta` on a uniform grid of
    /// `breaks >= 2` alphas; the endpoints are pinned to (0,0) and (1,1) so
    /// functions defined only on the open interval are admissible.
    pub fn from_function(f: impl Fn(f64) -> f64, breaks: usize) -> Result<Self> {
        if breaks < 2 {
            return Err(Error::InvalidInput("need at least two breakpoints".into()));
        }
        let mut points = Vec::with_capacity(breaks);
        points.push((0.0, 0.0));
        let mut running = 0.0f64;
        for i in 1..breaks - 1 {
            let alpha = i as f64 / (breaks - 1) as f64;
            running = running.max(f(alpha).clamp(0.0, 1.0));
            points.push((alpha, running));
        }
        points.push((1.0, 1.0));
        Self::new(points)
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Curve value at `alpha` under linear interpolation; exactly at a jump
    /// alpha the upper value is returned.
    pub fn beta_at(&self, alpha: f64) -> f64 {
        let a = alpha.clamp(0.0, 1.0);
        let idx = self.points.partition_point(|p| p.0 <= a);
        let k = idx.saturating_sub(1);
        let (a0, b0) = self.points[k];
        if a0 == a {
            return b0;
        }
        let (a1, b1) = self.points[k + 1];
        b0 + (b1 - b0) * (a - a0) / (a1 - a0)
    }

    /// Left limit of the curve at `alpha` (the lower value at a jump).
    fn beta_before(&self, alpha: f64) -> f64 {
        let a = alpha.clamp(0.0, 1.0);
        let idx = self.points.partition_point(|p| p.0 < a);
        if idx == self.points.len() {
            return self.points[idx - 1].1;
        }
        let (a1, b1) = self.points[idx];
        if a1 == a {
            return b1;
        }
        let (a0, b0) = self.points[idx - 1];
        b0 + (b1 - b0) * (a - a0) / (a1 - a0)
    }

    /// Exact area under the broken line (trapezoid rule over the
    /// breakpoints; vertical runs contribute nothing).
    pub fn auc(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
            .sum()
    }

    /// CSV serialization: header `alpha,beta`, one breakpoint per row, six
    /// decimal places.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("alpha,beta\n");
        for (a, b) in &self.points {
            out.push_str(&format!("{a:.6},{b:.6}\n"));
        }
        out
    }

    fn breakpoint_alphas(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.0)
    }
}

/// Empirical ROC curve of two score samples: the broken line through the
/// gridpoints `(j/m, i/n)` visited in decreasing threshold order. A tied
/// group containing both labels moves diagonally.
pub fn empirical_roc(pos_scores: &[f64], neg_scores: &[f64]) -> Result<RocCurve> {
    if pos_scores.is_empty() || neg_scores.is_empty() {
        return Err(Error::InvalidInput(
            "both score samples must be nonempty".into(),
        ));
    }
    let mut pos = pos_scores.to_vec();
    let mut neg = neg_scores.to_vec();
    pos.sort_by(|a, b| b.partial_cmp(a).expect("finite scores"));
    neg.sort_by(|a, b| b.partial_cmp(a).expect("finite scores"));
    let (n, m) = (pos.len(), neg.len());

    let mut points = Vec::with_capacity(n + m + 1);
    points.push((0.0, 0.0));
    let (mut i, mut j) = (0usize, 0usize);
    while i < n || j < m {
        let threshold = match (pos.get(i), neg.get(j)) {
            (Some(&a), Some(&b)) => a.max(b),
            (Some(&a), None) => a,
            (None, Some(&b)) => b,
            (None, None) => unreachable!(),
        };
        while i < n && pos[i] == threshold {
            i += 1;
        }
        while j < m && neg[j] == threshold {
            j += 1;
        }
        points.push((j as f64 / m as f64, i as f64 / n as f64));
    }
    RocCurve::new(points)
}

/// Tie-corrected empirical AUC
/// `(1/nm) * sum_{i,j} [ 1{y_j < x_i} + 1/2 * 1{y_j = x_i} ]`,
/// evaluated with sorted negatives and binary search. This route never
/// computes pooled ranks, so the Wilcoxon identity against
/// [`crate::ranks::PooledSample::wilcoxon_statistic`] is a genuine
/// cross-check.
pub fn empirical_auc(pos_scores: &[f64], neg_scores: &[f64]) -> Result<f64> {
    if pos_scores.is_empty() || neg_scores.is_empty() {
        return Err(Error::InvalidInput(
            "both score samples must be nonempty".into(),
        ));
    }
    let mut neg = neg_scores.to_vec();
    neg.sort_by(|a, b| a.partial_cmp(b).expect("finite scores"));
    let mut acc = 0.0;
    for &x in pos_scores {
        let below = neg.partition_point(|&y| y < x);
        let not_above = neg.partition_point(|&y| y <= x);
        acc += below as f64 + 0.5 * (not_above - below) as f64;
    }
    Ok(acc / (pos_scores.len() * neg_scores.len()) as f64)
}

/// Distance in sup norm between two curves, evaluated over the union of
/// their breakpoint alphas plus a uniform 1e-3 grid.
pub fn sup_distance(c1: &RocCurve, c2: &RocCurve) -> f64 {
    let mut worst = 0.0f64;
    let mut eval = |alpha: f64| {
        worst = worst.max((c1.beta_at(alpha) - c2.beta_at(alpha)).abs());
    };
    for alpha in c1.breakpoint_alphas().chain(c2.breakpoint_alphas()) {
        eval(alpha);
    }
    for i in 0..=1000 {
        eval(f64::from(i) / 1000.0);
    }
    worst
}

/// `L1` distance between a curve and a reference optimal curve:
/// `int_0^1 |ROC*(a) - ROC(a)| da`, integrated exactly over the union of
/// breakpoints (plus segment crossings when the reference does not dominate).
/// When `c_star` dominates `c`, this equals `auc(c_star) - auc(c)`.
pub fn l1_distance_to_optimal(c: &RocCurve, c_star: &RocCurve) -> f64 {
    let mut alphas: Vec<f64> = c
        .breakpoint_alphas()
        .chain(c_star.breakpoint_alphas())
        .collect();
    alphas.sort_by(|a, b| a.partial_cmp(b).expect("alphas are finite"));
    alphas.dedup();

    // Between consecutive union alphas both curves are linear, so their
    // difference is too; one-sided limits at the interval ends and an exact
    // split at a sign crossing make the trapezoid exact.
    let mut area = 0.0;
    for w in alphas.windows(2) {
        let (a0, a1) = (w[0], w[1]);
        let width = a1 - a0;
        if width <= 0.0 {
            continue;
        }
        let d0 = c_star.beta_at(a0) - c.beta_at(a0);
        let d1 = c_star.beta_before(a1) - c.beta_before(a1);
        if d0 * d1 < 0.0 {
            let t = d0 / (d0 - d1);
            area += width * (t * d0.abs() + (1.0 - t) * d1.abs()) / 2.0;
        } else {
            area += width * (d0.abs() + d1.abs()) / 2.0;
        }
    }
    area
}

/// Scalar `W_phi` summary of a ROC curve at positive-class proportion `p`:
///
/// `W = (1/p) int_0^1 phi(u) du - ((1-p)/p) int_0^1 phi(p(1-ROC(a)) + (1-p)(1-a)) da`
///
/// by the composite trapezoid rule on a fixed 2001-node grid. For `phi`
/// singular at an endpoint (`logrank`, `vdw`), arguments are clamped to
/// `[1/(2(G-1)), 1 - 1/(2(G-1))]` with `G` the grid size - the
/// endpoint-avoiding rule.
pub fn w_phi_from_roc(curve: &RocCurve, phi: &ScoreGen, p: f64) -> Result<f64> {
    if !(0.0 < p && p < 1.0) {
        return Err(Error::InvalidInput("proportion p must lie in (0,1)".into()));
    }
    let singular = matches!(phi, ScoreGen::Logrank | ScoreGen::VdW);
    let eps = 0.5 / (W_PHI_GRID - 1) as f64;
    let eval = |u: f64| -> Result<f64> {
        let u = if singular {
            u.clamp(eps, 1.0 - eps)
        } else {
            u.clamp(0.0, 1.0)
        };
        phi.value(u)
    };

    let mut plain = 0.0;
    let mut composed = 0.0;
    for i in 0..W_PHI_GRID {
        let alpha = i as f64 / (W_PHI_GRID - 1) as f64;
        let weight = if i == 0 || i == W_PHI_GRID - 1 {
            0.5
        } else {
            1.0
        };
        plain += weight * eval(alpha)?;
        let u = p * (1.0 - curve.beta_at(alpha)) + (1.0 - p) * (1.0 - alpha);
        composed += weight * eval(u)?;
    }
    let h = 1.0 / (W_PHI_GRID - 1) as f64;
    Ok((plain * h) / p - (1.0 - p) / p * (composed * h))
}

/// Complexity penalty
/// `pen(N, k) = B1 * sqrt(V_k / (p N)) + sqrt(2 C log k / (p^2 N))` with
/// `C = 6 (|phi|^2 + 9 |phi'|^2 + 9 |phi''|^2)` (sup norms over `[0,1]`,
/// estimated on a grid).
///
/// `B1` is a user-supplied constant (the theory fixes it only existentially);
/// the default used by the harness is 1.
pub fn penalty(
    n_pooled: usize,
    p: f64,
    k: usize,
    vc_dim: f64,
    phi: &ScoreGen,
    b1: f64,
) -> Result<f64> {
    if n_pooled == 0 || k == 0 {
        return Err(Error::InvalidInput(
            "penalty needs N >= 1 and k >= 1".into(),
        ));
    }
    if !(0.0 < p && p < 1.0) || vc_dim <= 0.0 {
        return Err(Error::InvalidInput(
            "penalty needs p in (0,1) and V_k > 0".into(),
        ));
    }
    let (v, d, dd) = phi.sup_norms()?;
    let c = 6.0 * (v * v + 9.0 * d * d + 9.0 * dd * dd);
    let n = n_pooled as f64;
    Ok(b1 * (vc_dim / (p * n)).sqrt() + (2.0 * c * (k as f64).ln() / (p * p * n)).sqrt())
}

/// A fitted candidate entering model selection.
#[derive(Debug, Clone)]
pub struct ModelCandidate {
    pub params: Vec<f64>,
    /// VC dimension `V_k` of the class the candidate was fitted in.
    pub vc_dim: f64,
    /// Empirical criterion `(1/n) W_hat` of the candidate.
    pub criterion: f64,
}

/// Selects `argmax_k { criterion_k - pen(N, k) }` over the candidate list
/// (`k` is the 1-based list position); ties break toward the smaller `k`.
pub fn select_model(
    candidates: &[ModelCandidate],
    n_pooled: usize,
    p: f64,
    phi: &ScoreGen,
    b1: f64,
) -> Result<usize> {
    if candidates.is_empty() {
        return Err(Error::InvalidInput("no candidates to select from".into()));
    }
    let mut best = 0;
    let mut best_value = f64::NEG_INFINITY;
    for (idx, cand) in candidates.iter().enumerate() {
        let value = cand.criterion - penalty(n_pooled, p, idx + 1, cand.vc_dim, phi, b1)?;
        if value > best_value {
            best_value = value;
            best = idx;
        }
    }
    Ok(best)
}

/// Which functional distance ranks curves against the reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CurveMetric {
    /// Sup-norm distance.
    #[default]
    SupNorm,
    /// `L1` distance (integrated absolute gap).
    L1,
}

impl CurveMetric {
    pub fn parse(spec: &str) -> Result<Self> {
        match spec.trim().to_ascii_lowercase().as_str() {
            "sup" => Ok(CurveMetric::SupNorm),
            "l1" => Ok(CurveMetric::L1),
            other => Err(Error::InvalidInput(format!(
                "unknown curve metric `{other}` (expected `sup` or `l1`)"
            ))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CurveMetric::SupNorm => "sup",
            CurveMetric::L1 => "l1",
        }
    }

    fn distance(self, curve: &RocCurve, reference: &RocCurve) -> f64 {
        match self {
            CurveMetric::SupNorm => sup_distance(curve, reference),
            CurveMetric::L1 => l1_distance_to_optimal(curve, reference),
        }
    }
}

/// Pointwise aggregate of a family of curves on a uniform alpha grid.
#[derive(Debug, Clone)]
pub struct CurveSummary {
    pub alphas: Vec<f64>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// Index of the curve closest to the reference.
    pub best: usize,
    /// Index of the curve farthest from the reference.
    pub worst: usize,
}

/// [`average_curves_with`] under the default sup-norm metric.
pub fn average_curves(
    curves: &[RocCurve],
    grid_size: usize,
    reference: &RocCurve,
) -> Result<CurveSummary> {
    average_curves_with(curves, grid_size, reference, CurveMetric::SupNorm)
}

/// Pointwise mean and standard deviation of `curves` on a `grid_size`-point
/// alpha grid, plus the best/worst curve indices relative to `reference`
/// (smallest/largest distance under `metric`; earlier index wins ties).
pub fn average_curves_with(
    curves: &[RocCurve],
    grid_size: usize,
    reference: &RocCurve,
    metric: CurveMetric,
) -> Result<CurveSummary> {
    if curves.is_empty() {
        return Err(Error::InvalidInput("need at least one curve".into()));
    }
    if grid_size < 2 {
        return Err(Error::InvalidInput("grid size must be >= 2".into()));
    }
    let count = curves.len() as f64;
    let alphas: Vec<f64> = (0..grid_size)
        .map(|i| i as f64 / (grid_size - 1) as f64)
        .collect();
    let mut mean = vec![0.0; grid_size];
    let mut second = vec![0.0; grid_size];
    for curve in curves {
        for (idx, &alpha) in alphas.iter().enumerate() {
            let b = curve.beta_at(alpha);
            mean[idx] += b;
            second[idx] += b * b;
        }
    }
    let mut std = vec![0.0; grid_size];
    for idx in 0..grid_size {
        mean[idx] /= count;
        std[idx] = (second[idx] / count - mean[idx] * mean[idx])
            .max(0.0)
            .sqrt();
    }

    let mut best = 0;
    let mut worst = 0;
    let mut best_d = f64::INFINITY;
    let mut worst_d = f64::NEG_INFINITY;
    for (idx, curve) in curves.iter().enumerate() {
        let d = metric.distance(curve, reference);
        if d < best_d {
            best_d = d;
            best = idx;
        }
        if d > worst_d {
            worst_d = d;
            worst = idx;
        }
    }
    Ok(CurveSummary {
        alphas,
        mean,
        std,
        best,
        worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn perfect() -> RocCurve {
        RocCurve::new(vec![(0.0, 0.0), (0.0, 1.0), (1.0, 1.0)]).unwrap()
    }

    #[test]
    fn curve_validation() {
        assert!(RocCurve::new(vec![(0.0, 0.0)]).is_err());
        assert!(RocCurve::new(vec![(0.0, 0.1), (1.0, 1.0)]).is_err());
        assert!(RocCurve::new(vec![(0.0, 0.0), (0.5, 0.8), (0.4, 0.9), (1.0, 1.0)]).is_err());
        assert!(RocCurve::new(vec![(0.0, 0.0), (0.5, 0.8), (0.5, 0.7), (1.0, 1.0)]).is_err());
    }

    #[test]
    fn empirical_roc_breakpoints() {
        let c = empirical_roc(&[2.0, 4.0], &[1.0, 3.0]).unwrap();
        assert_eq!(
            c.points(),
            &[(0.0, 0.0), (0.0, 0.5), (0.5, 0.5), (0.5, 1.0), (1.0, 1.0)]
        );

        let perfect = empirical_roc(&[2.0, 3.0], &[0.0, 1.0]).unwrap();
        assert_eq!(perfect.beta_at(0.0), 1.0);
        assert_eq!(perfect.auc(), 1.0);

        let worst = empirical_roc(&[0.0, 1.0], &[2.0, 3.0]).unwrap();
        assert_eq!(worst.beta_at(0.5), 0.0);
        assert_eq!(worst.auc(), 0.0);
    }

    #[test]
    fn empirical_auc_values() {
        assert_eq!(empirical_auc(&[2.0, 4.0], &[1.0, 3.0]).unwrap(), 0.75);
        assert_eq!(empirical_auc(&[1.0], &[1.0]).unwrap(), 0.5);
        assert_eq!(empirical_auc(&[2.0, 3.0], &[0.0, 1.0]).unwrap(), 1.0);
    }

    #[test]
    fn auc_equals_trapezoid_area_of_roc() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..1000 {
            let n = rng.gen_range(1..=30);
            let m = rng.gen_range(1..=30);
            // Mix continuous and coarse scores so ties are exercised too.
            let coarse = rng.gen_bool(0.3);
            let draw = |rng: &mut ChaCha8Rng| {
                if coarse {
                    f64::from(rng.gen_range(0..4))
                } else {
                    rng.sample(StandardNormal)
                }
            };
            let pos: Vec<f64> = (0..n).map(|_| draw(&mut rng)).collect();
            let neg: Vec<f64> = (0..m).map(|_| draw(&mut rng)).collect();
            let auc = empirical_auc(&pos, &neg).unwrap();
            let area = empirical_roc(&pos, &neg).unwrap().auc();
            assert!((auc - area).abs() < 1e-12, "{auc} vs {area}");
        }
    }

    #[test]
    fn sup_distance_examples() {
        let d = RocCurve::diagonal();
        assert_eq!(sup_distance(&d, &d), 0.0);
        assert!(sup_distance(&d, &perfect()) >= 0.99);
        let mid = RocCurve::new(vec![(0.0, 0.0), (0.5, 0.75), (1.0, 1.0)]).unwrap();
        assert!((sup_distance(&d, &mid) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn l1_distance_examples() {
        let d = RocCurve::diagonal();
        assert_eq!(l1_distance_to_optimal(&d, &d), 0.0);
        assert!((l1_distance_to_optimal(&d, &perfect()) - 0.5).abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let pos: Vec<f64> = (0..12)
                .map(|_| rng.sample::<f64, _>(StandardNormal) + 0.8)
                .collect();
            let neg: Vec<f64> = (0..9).map(|_| rng.sample(StandardNormal)).collect();
            let c = empirical_roc(&pos, &neg).unwrap();
            // The perfect curve dominates everything.
            let star = perfect();
            let l1 = l1_distance_to_optimal(&c, &star);
            assert!((l1 - (star.auc() - c.auc())).abs() < 1e-12);
        }
    }

    #[test]
    fn l1_distance_uses_absolute_integrand_without_domination() {
        // Symmetric gap, no sign change.
        let up = RocCurve::new(vec![(0.0, 0.0), (0.5, 0.7), (1.0, 1.0)]).unwrap();
        let down = RocCurve::new(vec![(0.0, 0.0), (0.5, 0.3), (1.0, 1.0)]).unwrap();
        assert!((l1_distance_to_optimal(&up, &down) - 0.2).abs() < 1e-12);

        // Sign change at alpha = 0.6: pieces 0.04 + 0.08 + 0.02 + 0.02.
        let crossing = RocCurve::new(vec![(0.0, 0.0), (0.2, 0.6), (0.8, 0.6), (1.0, 1.0)]).unwrap();
        let l1 = l1_distance_to_optimal(&crossing, &RocCurve::diagonal());
        assert!((l1 - 0.16).abs() < 1e-12, "{l1}");
    }

    #[test]
    fn w_phi_identity_for_mww() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for &p in &[0.25, 0.5, 0.75] {
            for _ in 0..20 {
                let pos: Vec<f64> = (0..15)
                    .map(|_| rng.sample::<f64, _>(StandardNormal) + 0.5)
                    .collect();
                let neg: Vec<f64> = (0..10).map(|_| rng.sample(StandardNormal)).collect();
                let c = empirical_roc(&pos, &neg).unwrap();
                let w = w_phi_from_roc(&c, &ScoreGen::Mww, p).unwrap();
                let expected = p / 2.0 + (1.0 - p) * c.auc();
                assert!((w - expected).abs() < 2e-4, "p={p}: {w} vs {expected}");
            }
        }
        let w = w_phi_from_roc(&perfect(), &ScoreGen::Mww, 0.5).unwrap();
        assert!((w - 0.75).abs() < 2e-4);
        let w = w_phi_from_roc(&RocCurve::diagonal(), &ScoreGen::Mww, 0.3).unwrap();
        assert!((w - 0.5).abs() < 2e-4);
    }

    #[test]
    fn w_phi_accepts_singular_phi() {
        let c = RocCurve::diagonal();
        // -log(1-u) integrates to 1 over [0,1]; the clamped grid gets close.
        let w = w_phi_from_roc(&c, &ScoreGen::Logrank, 0.5).unwrap();
        assert!(w.is_finite());
        let w = w_phi_from_roc(&c, &ScoreGen::VdW, 0.5).unwrap();
        assert!(w.is_finite());
    }

    #[test]
    fn penalty_formula() {
        let phi = ScoreGen::Mww;
        // k = 1: the log term vanishes.
        let pen = penalty(1000, 0.5, 1, 3.0, &phi, 1.0).unwrap();
        assert!((pen - (3.0f64 / 500.0).sqrt()).abs() < 1e-15);
        // Doubling N divides a k=1 penalty by sqrt(2).
        let pen2 = penalty(2000, 0.5, 1, 3.0, &phi, 1.0).unwrap();
        assert!((pen / pen2 - 2.0f64.sqrt()).abs() < 1e-12);
        // MWW: C = 6 * (1 + 9) = 60.
        let pen_k2 = penalty(1000, 0.5, 2, 3.0, &phi, 1.0).unwrap();
        let expected = (3.0f64 / 500.0).sqrt() + (120.0 * 2.0f64.ln() / 250.0).sqrt();
        assert!((pen_k2 - expected).abs() < 1e-12);
    }

    #[test]
    fn model_selection() {
        let phi = ScoreGen::Mww;
        let cand = |criterion: f64, vc_dim: f64| ModelCandidate {
            params: vec![],
            vc_dim,
            criterion,
        };
        assert_eq!(
            select_model(&[cand(0.5, 1.0)], 100, 0.5, &phi, 1.0).unwrap(),
            0
        );
        // Equal criteria: the smaller class (and smaller k) wins.
        assert_eq!(
            select_model(&[cand(0.9, 1.0), cand(0.9, 5.0)], 100, 0.5, &phi, 1.0).unwrap(),
            0
        );
        // Built-in numbers: penalized 0.89 vs 0.86.
        let picked =
            select_model(&[cand(0.9, 1.0), cand(0.91, 25.0)], 400, 0.5, &phi, 1.0).unwrap();
        assert_eq!(picked, 0);
    }

    #[test]
    fn curve_averaging() {
        let d = RocCurve::diagonal();
        let p = perfect();
        let single = average_curves(std::slice::from_ref(&d), 11, &p).unwrap();
        assert_eq!(single.best, 0);
        assert_eq!(single.worst, 0);
        assert!(single.std.iter().all(|&s| s == 0.0));

        let summary = average_curves(&[d, p.clone()], 3, &p).unwrap();
        assert_eq!(summary.best, 1);
        assert_eq!(summary.worst, 0);
        assert!((summary.mean[1] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn metric_choice_can_change_best_and_worst() {
        // A rises late: a full-height gap on a narrow alpha band (sup 1.0,
        // L1 only 0.02). B lags uniformly (sup 0.1, L1 0.05).
        let a = RocCurve::new(vec![(0.0, 0.0), (0.02, 0.0), (0.02, 1.0), (1.0, 1.0)]).unwrap();
        let b = RocCurve::new(vec![(0.0, 0.0), (0.0, 0.9), (1.0, 1.0)]).unwrap();
        let reference = perfect();

        let by_sup = average_curves_with(
            &[a.clone(), b.clone()],
            11,
            &reference,
            CurveMetric::SupNorm,
        )
        .unwrap();
        assert_eq!((by_sup.best, by_sup.worst), (1, 0));

        let by_l1 = average_curves_with(&[a, b], 11, &reference, CurveMetric::L1).unwrap();
        assert_eq!((by_l1.best, by_l1.worst), (0, 1));
    }

    #[test]
    fn metric_parse_grammar() {
        assert_eq!(CurveMetric::parse("sup").unwrap(), CurveMetric::SupNorm);
        assert_eq!(CurveMetric::parse("L1").unwrap(), CurveMetric::L1);
        assert!(CurveMetric::parse("linf").is_err());
    }

    #[test]
    fn csv_serialization() {
        let c = RocCurve::new(vec![(0.0, 0.0), (0.5, 0.75), (1.0, 1.0)]).unwrap();
        assert_eq!(
            c.to_csv(),
            "alpha,beta\n0.000000,0.000000\n0.500000,0.750000\n1.000000,1.000000\n"
        );
    }
}
