//! The catalogue of score-generating functions.
//!
//! A score-generating function is a nondecreasing map `phi: [0,1] -> R`
//! weighting normalized ranks in a two-sample linear rank statistic. The
//! catalogue covers the ranking criteria (`Mww`, `Pol`, `Rtb`, hard local
//! AUC, DCG) and the classical two-sample test score functions (`Logistic`,
//! `Logrank`, `Median`, van der Waerden).
//!
//! Only the smooth kinds expose a derivative; the others are evaluation-only
//! and asking for their derivative is a hard error, which keeps the
//! smoothness contract of the gradient path explicit instead of silently
//! falling back to subgradients.

use crate::error::{Error, Result};
use crate::gauss::{norm_pdf, norm_quantile};

/// Default slope hyperparameters for [`ScoreGen::Rtb`]: a visually faithful
/// smoothing of `u * 1{u >= u0}` at grid resolution 1e-3.
pub const RTB_DEFAULT_SLOPE: f64 = 50.0;

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// A score-generating function `phi` with value and (when smooth) derivative.
#[derive(Debug, Clone, PartialEq)]
pub enum ScoreGen {
    /// `phi(u) = u`, the Wilcoxon-Mann-Whitney weight; maximizing it targets
    /// the AUC.
    Mww,
    /// `phi(u) = u^q`, emphasis on high ranks (`q`-norm push flavor).
    Pol { q: u32 },
    /// Smooth surrogate of `u * 1{u >= u0}`:
    /// `SoftPlus_beta(u - u0) + u0 * Sigmoid_lambda(u - u0)`.
    Rtb { u0: f64, beta: f64, lambda: f64 },
    /// Hard local-AUC weight `u * 1{u >= u0}`. Evaluation only.
    LocalAucHard { u0: f64 },
    /// Discounted cumulative gain weight: `c((N+1)u) * 1{u >= k/(N+1)}` with
    /// a nondecreasing discount vector `c(1..=N)`. Evaluation only.
    Dcg { discounts: Vec<f64>, k: usize },
    /// Logistic test weight `2*sqrt(3)*(u - 1/2)`.
    Logistic,
    /// Logrank test weight `-log(1 - u)`, singular at `u = 1`.
    Logrank,
    /// Median test weight `sgn(u - 1/2)`. Evaluation only.
    Median,
    /// Van der Waerden weight, the standard normal quantile; singular at both
    /// endpoints.
    VdW,
}

impl ScoreGen {
    /// Polynomial weight `u^q` with `q >= 1`.
    pub fn pol(q: u32) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidInput("pol exponent q must be >= 1".into()));
        }
        Ok(ScoreGen::Pol { q })
    }

    /// Smoothed top-of-the-list weight with explicit slope hyperparameters.
    pub fn rtb(u0: f64, beta: f64, lambda: f64) -> Result<Self> {
        if !(0.0 < u0 && u0 < 1.0) {
            return Err(Error::InvalidInput(
                "rtb threshold u0 must lie in (0,1)".into(),
            ));
        }
        if beta <= 0.0 || lambda <= 0.0 {
            return Err(Error::InvalidInput(
                "rtb slopes beta, lambda must be > 0".into(),
            ));
        }
        Ok(ScoreGen::Rtb { u0, beta, lambda })
    }

    /// Smoothed top-of-the-list weight with the default slopes.
    pub fn rtb_default(u0: f64) -> Result<Self> {
        Self::rtb(u0, RTB_DEFAULT_SLOPE, RTB_DEFAULT_SLOPE)
    }

    pub fn local_auc_hard(u0: f64) -> Result<Self> {
        if !(0.0 < u0 && u0 < 1.0) {
            return Err(Error::InvalidInput(
                "local AUC threshold u0 must lie in (0,1)".into(),
            ));
        }
        Ok(ScoreGen::LocalAucHard { u0 })
    }

    /// DCG weight from an explicit nondecreasing discount vector `c(1..=N)`.
    pub fn dcg(discounts: Vec<f64>, k: usize) -> Result<Self> {
        if discounts.is_empty() {
            return Err(Error::InvalidInput(
                "dcg needs at least one discount".into(),
            ));
        }
        if discounts.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidInput(
                "dcg discounts must be nondecreasing".into(),
            ));
        }
        if discounts.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::InvalidInput(
                "dcg discounts must be finite and >= 0".into(),
            ));
        }
        if k == 0 || k > discounts.len() {
            return Err(Error::InvalidInput("dcg cutoff k must lie in 1..=N".into()));
        }
        Ok(ScoreGen::Dcg { discounts, k })
    }

    /// DCG weight with the standard information-retrieval discount
    /// `c(i) = log2(1 + i)` over a pooled sample of size `n_pooled`.
    pub fn dcg_log2(n_pooled: usize, k: usize) -> Result<Self> {
        let discounts = (1..=n_pooled).map(|i| (1.0 + i as f64).log2()).collect();
        Self::dcg(discounts, k)
    }

    /// Short identifier of the kind, used in error messages.
    pub fn name(&self) -> &'static str {
        match self {
            ScoreGen::Mww => "mww",
            ScoreGen::Pol { .. } => "pol",
            ScoreGen::Rtb { .. } => "rtb",
            ScoreGen::LocalAucHard { .. } => "localauc",
            ScoreGen::Dcg { .. } => "dcg",
            ScoreGen::Logistic => "logistic",
            ScoreGen::Logrank => "logrank",
            ScoreGen::Median => "median",
            ScoreGen::VdW => "vdw",
        }
    }

    /// Canonical spec string, re-parseable by [`ScoreGen::parse`].
    pub fn spec_string(&self) -> String {
        match self {
            ScoreGen::Pol { q } => format!("pol:q={q}"),
            ScoreGen::Rtb { u0, beta, lambda } => {
                format!("rtb:u0={u0},beta={beta},lambda={lambda}")
            }
            ScoreGen::LocalAucHard { u0 } => format!("localauc:u0={u0}"),
            ScoreGen::Dcg { discounts, k } => format!("dcg:n={},k={k}", discounts.len()),
            _ => self.name().to_string(),
        }
    }

    /// Comma-free label carrying the parameters, used in CSV output.
    pub fn label(&self) -> String {
        match self {
            ScoreGen::Pol { q } => format!("pol-q{q}"),
            ScoreGen::Rtb { u0, beta, lambda } => format!("rtb-u{u0}-b{beta}-l{lambda}"),
            ScoreGen::LocalAucHard { u0 } => format!("localauc-u{u0}"),
            ScoreGen::Dcg { discounts, k } => format!("dcg-k{k}-n{}", discounts.len()),
            _ => self.name().to_string(),
        }
    }

    /// Whether the gradient path may use this kind.
    pub fn is_differentiable(&self) -> bool {
        !matches!(
            self,
            ScoreGen::LocalAucHard { .. } | ScoreGen::Dcg { .. } | ScoreGen::Median
        )
    }

    /// Evaluates `phi(u)` for `u` in `[0,1]`.
    ///
    /// `Logrank` is undefined at `u = 1` and `VdW` at both endpoints; those
    /// arguments yield a domain error.
    pub fn value(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::Domain {
                kind: self.name(),
                arg: u,
            });
        }
        Ok(match self {
            ScoreGen::Mww => u,
            ScoreGen::Pol { q } => u.powi(*q as i32),
            ScoreGen::Rtb { u0, beta, lambda } => {
                softplus(*beta, u - u0) + u0 * sigmoid(*lambda, u - u0)
            }
            ScoreGen::LocalAucHard { u0 } => {
                if u >= *u0 {
                    u
                } else {
                    0.0
                }
            }
            ScoreGen::Dcg { discounts, k } => {
                let n = discounts.len() as f64;
                if u < *k as f64 / (n + 1.0) {
                    0.0
                } else {
                    interpolate_discount(discounts, (n + 1.0) * u)
                }
            }
            ScoreGen::Logistic => 2.0 * SQRT3 * (u - 0.5),
            ScoreGen::Logrank => {
                if u >= 1.0 {
                    return Err(Error::Domain {
                        kind: self.name(),
                        arg: u,
                    });
                }
                -(1.0 - u).ln()
            }
            ScoreGen::Median => {
                if u > 0.5 {
                    1.0
                } else if u < 0.5 {
                    -1.0
                } else {
                    0.0
                }
            }
            ScoreGen::VdW => {
                if u <= 0.0 || u >= 1.0 {
                    return Err(Error::Domain {
                        kind: self.name(),
                        arg: u,
                    });
                }
                norm_quantile(u)
            }
        })
    }

    /// Evaluates `phi'(u) >= 0` for the smooth kinds.
    pub fn derivative(&self, u: f64) -> Result<f64> {
        if !self.is_differentiable() {
            return Err(Error::NotDifferentiable(self.name()));
        }
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::Domain {
                kind: self.name(),
                arg: u,
            });
        }
        Ok(match self {
            ScoreGen::Mww => 1.0,
            ScoreGen::Pol { q } => f64::from(*q) * u.powi(*q as i32 - 1),
            ScoreGen::Rtb { u0, beta, lambda } => {
                let s = sigmoid(*lambda, u - u0);
                sigmoid(*beta, u - u0) + u0 * lambda * s * (1.0 - s)
            }
            ScoreGen::Logistic => 2.0 * SQRT3,
            ScoreGen::Logrank => {
                if u >= 1.0 {
                    return Err(Error::Domain {
                        kind: self.name(),
                        arg: u,
                    });
                }
                1.0 / (1.0 - u)
            }
            ScoreGen::VdW => {
                if u <= 0.0 || u >= 1.0 {
                    return Err(Error::Domain {
                        kind: self.name(),
                        arg: u,
                    });
                }
                1.0 / norm_pdf(norm_quantile(u))
            }
            ScoreGen::LocalAucHard { .. } | ScoreGen::Dcg { .. } | ScoreGen::Median => {
                unreachable!("rejected above")
            }
        })
    }

    /// Sup norms `(|phi|_inf, |phi'|_inf, |phi''|_inf)` over `[0,1]`,
    /// estimated on a 1001-point grid; the second derivative comes from
    /// central differences of [`ScoreGen::derivative`].
    ///
    /// Kinds singular at an endpoint are evaluated on the grid's interior
    /// points only, so for them the result is a (large) grid estimate rather
    /// than a true supremum.
    pub fn sup_norms(&self) -> Result<(f64, f64, f64)> {
        if !self.is_differentiable() {
            return Err(Error::NotDifferentiable(self.name()));
        }
        let mut sup_v: f64 = 0.0;
        let mut sup_d: f64 = 0.0;
        let mut sup_dd: f64 = 0.0;
        let fd_step = 1e-4;
        for i in 0..=1000 {
            let u = f64::from(i) / 1000.0;
            if self.value(u).is_err() {
                continue;
            }
            sup_v = sup_v.max(self.value(u)?.abs());
            sup_d = sup_d.max(self.derivative(u)?.abs());
            let lo = u - fd_step;
            let hi = u + fd_step;
            if self.derivative(lo).is_ok() && self.derivative(hi).is_ok() && lo >= 0.0 && hi <= 1.0
            {
                let dd = (self.derivative(hi)? - self.derivative(lo)?) / (2.0 * fd_step);
                sup_dd = sup_dd.max(dd.abs());
            }
        }
        Ok((sup_v, sup_d, sup_dd))
    }

    /// Parses a text spec such as `mww`, `pol:q=3` or
    /// `rtb:u0=0.9,beta=50,lambda=50` (slopes default to 50 when omitted).
    /// Also accepted: `logistic`, `logrank`, `median`, `vdw`,
    /// `localauc:u0=0.9`, `dcg:n=300,k=30`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (head, args) = match spec.split_once(':') {
            Some((h, a)) => (h.trim(), Some(a)),
            None => (spec, None),
        };
        let fields = parse_fields(args)?;
        let get = |key: &str| fields.iter().find(|(k, _)| k == key).map(|(_, v)| *v);
        let bad = |msg: &str| Error::InvalidInput(format!("phi spec `{spec}`: {msg}"));

        match head.to_ascii_lowercase().as_str() {
            "mww" => Ok(ScoreGen::Mww),
            "logistic" => Ok(ScoreGen::Logistic),
            "logrank" => Ok(ScoreGen::Logrank),
            "median" => Ok(ScoreGen::Median),
            "vdw" => Ok(ScoreGen::VdW),
            "pol" => {
                let q = get("q").ok_or_else(|| bad("needs q=<int>"))?;
                let q: u32 = q.parse().map_err(|_| bad("q must be a positive integer"))?;
                Self::pol(q)
            }
            "rtb" => {
                let u0 = parse_f64(get("u0").ok_or_else(|| bad("needs u0=<real>"))?, &bad)?;
                let beta = match get("beta") {
                    Some(v) => parse_f64(v, &bad)?,
                    None => RTB_DEFAULT_SLOPE,
                };
                let lambda = match get("lambda") {
                    Some(v) => parse_f64(v, &bad)?,
                    None => RTB_DEFAULT_SLOPE,
                };
                Self::rtb(u0, beta, lambda)
            }
            "localauc" => {
                let u0 = parse_f64(get("u0").ok_or_else(|| bad("needs u0=<real>"))?, &bad)?;
                Self::local_auc_hard(u0)
            }
            "dcg" => {
                let n = get("n").ok_or_else(|| bad("needs n=<pooled size>"))?;
                let n: usize = n.parse().map_err(|_| bad("n must be a positive integer"))?;
                let k = get("k").ok_or_else(|| bad("needs k=<cutoff>"))?;
                let k: usize = k.parse().map_err(|_| bad("k must be a positive integer"))?;
                Self::dcg_log2(n, k)
            }
            other => Err(bad(&format!("unknown kind `{other}`"))),
        }
    }
}

fn parse_fields(args: Option<&str>) -> Result<Vec<(String, &str)>> {
    let Some(args) = args else {
        return Ok(Vec::new());
    };
    args.split(',')
        .filter(|part| !part.trim().is_empty())
        .map(|part| {
            part.split_once('=')
                .map(|(k, v)| (k.trim().to_ascii_lowercase(), v.trim()))
                .ok_or_else(|| {
                    Error::InvalidInput(format!("phi spec field `{part}` is not key=value"))
                })
        })
        .collect()
}

fn parse_f64(v: &str, bad: &dyn Fn(&str) -> Error) -> Result<f64> {
    v.parse::<f64>()
        .map_err(|_| bad(&format!("`{v}` is not a real number")))
}

/// Numerically stable `(1/beta) * log(1 + exp(beta * x))`.
fn softplus(beta: f64, x: f64) -> f64 {
    let t = beta * x;
    if t > 0.0 {
        x + (-t).exp().ln_1p() / beta
    } else {
        t.exp().ln_1p() / beta
    }
}

/// Numerically stable `1 / (1 + exp(-lambda * x))`.
fn sigmoid(lambda: f64, x: f64) -> f64 {
    let t = lambda * x;
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Linear interpolation of the discount vector at fractional rank `r`,
/// clamped to `[1, N]`.
fn interpolate_discount(discounts: &[f64], r: f64) -> f64 {
    let n = discounts.len();
    if r <= 1.0 {
        return discounts[0];
    }
    if r >= n as f64 {
        return discounts[n - 1];
    }
    let lo = r.floor() as usize;
    let frac = r - lo as f64;
    discounts[lo - 1] * (1.0 - frac) + discounts[lo] * frac
}
