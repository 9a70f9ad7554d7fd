//! Standard normal distribution helpers shared across the crate.

use statrs::distribution::{Continuous, ContinuousCDF, Normal};

fn standard() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal is well defined")
}

/// Standard normal c.d.f.
pub fn norm_cdf(t: f64) -> f64 {
    standard().cdf(t)
}

/// Standard normal density.
pub fn norm_pdf(t: f64) -> f64 {
    standard().pdf(t)
}

/// Standard normal quantile function, defined on (0, 1).
pub fn norm_quantile(u: f64) -> f64 {
    standard().inverse_cdf(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Power-series oracle for the c.d.f.: Phi(t) = 1/2 + phi(t) * sum_k t^(2k+1) / (1*3*...*(2k+1)).
    fn series_cdf(t: f64) -> f64 {
        let mut term = t;
        let mut sum = t;
        let mut k = 0u32;
        while term.abs() > 1e-17 && k < 200 {
            k += 1;
            term *= t * t / (2.0 * f64::from(k) + 1.0);
            sum += term;
        }
        0.5 + sum * (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt()
    }

    #[test]
    fn cdf_matches_series_oracle() {
        // statrs's erf is accurate to ~2e-11 in absolute terms, far below
        // every tolerance in this crate.
        for i in -40..=40 {
            let t = f64::from(i) * 0.1;
            assert!((norm_cdf(t) - series_cdf(t)).abs() < 1e-9, "t={t}");
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        for i in 1..100 {
            let u = f64::from(i) / 100.0;
            let t = norm_quantile(u);
            assert!((norm_cdf(t) - u).abs() < 1e-9, "u={u}");
        }
    }

    #[test]
    fn tails() {
        assert!((norm_cdf(10.0) - 1.0).abs() < 1e-12);
        assert!(norm_cdf(-10.0) < 1e-12);
        assert!((norm_cdf(0.0) - 0.5).abs() < 1e-15);
    }
}
