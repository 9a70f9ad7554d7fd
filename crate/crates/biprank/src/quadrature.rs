//! Fixed-order Gauss-Legendre quadrature.

use std::sync::OnceLock;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub(crate) struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Computes the rule by Newton iteration on the Legendre polynomial,
    /// starting from the Chebyshev-angle approximation of each root.
    pub fn new(order: usize) -> Self {
        assert!(order >= 2);
        let mut nodes = vec![0.0; order];
        let mut weights = vec![0.0; order];
        let n = order as f64;
        for k in 0..order {
            let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre_with_derivative(order, x);
                let delta = p / dp;
                x -= delta;
                if delta.abs() < 1e-15 {
                    break;
                }
            }
            let (_, dp) = legendre_with_derivative(order, x);
            nodes[order - 1 - k] = x;
            weights[order - 1 - k] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        Self { nodes, weights }
    }

    /// Integrates `f` over `[a, b]`; returns 0 when the interval is empty.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let half = 0.5 * (b - a);
        let center = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(center + half * x);
        }
        acc * half
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre_with_derivative(order: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    for j in 2..=order {
        let jf = j as f64;
        let p_next = ((2.0 * jf - 1.0) * x * p - (jf - 1.0) * p_prev) / jf;
        p_prev = p;
        p = p_next;
    }
    let dp = order as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

/// The 201-point rule shared by the linearization quadratures.
pub(crate) fn rule_201() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(201))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_point_nodes_match_reference() {
        let rule = GaussLegendre::new(5);
        let expected = [
            -0.906_179_845_938_664,
            -0.538_469_310_105_683,
            0.0,
            0.538_469_310_105_683,
            0.906_179_845_938_664,
        ];
        for (node, want) in rule.nodes.iter().zip(expected) {
            assert!((node - want).abs() < 1e-12, "{node} vs {want}");
        }
        assert!((rule.weights.iter().sum::<f64>() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn exact_for_polynomials_below_double_order() {
        // An 8-point rule is exact up to degree 15.
        let rule = GaussLegendre::new(8);
        let i14 = rule.integrate(-1.0, 1.0, |x| x.powi(14));
        assert!((i14 - 2.0 / 15.0).abs() < 1e-13);
        let i15 = rule.integrate(-1.0, 1.0, |x| x.powi(15));
        assert!(i15.abs() < 1e-13);
    }

    #[test]
    fn integrates_smooth_functions_on_shifted_intervals() {
        let rule = rule_201();
        let v = rule.integrate(0.0, std::f64::consts::PI, f64::sin);
        assert!((v - 2.0).abs() < 1e-12);
        let v = rule.integrate(1.0, 3.0, |x| 1.0 / x);
        assert!((v - 3.0f64.ln()).abs() < 1e-12);
        assert_eq!(rule.integrate(2.0, 2.0, |_| 1.0), 0.0);
        assert_eq!(rule.integrate(3.0, 2.0, |_| 1.0), 0.0);
    }
}
