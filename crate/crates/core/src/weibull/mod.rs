//! Two- and three-parameter Weibull estimators.
//!
//! Parameter order is always (α shape, β scale, μ location); two-parameter
//! fits report μ = 0.

mod three;
mod two;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::distribution::{Dist, Family};
use crate::error::{Error, Result};
use crate::gof::GofBlock;

pub use three::mps_objective;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeibullMethod {
    Greg1,
    Greg2,
    Lm,
    Ml,
    Mlm,
    Moment,
    Pm,
    Rank,
    Reg,
    Ustat,
    Wml,
    Wreg,
    Mle,
    Mm1,
    Mm2,
    Mm3,
    Mml1,
    Mml2,
    Mml3,
    Mml4,
    Mps,
    Tlm,
}

impl WeibullMethod {
    pub const TWO_PARAMETER: [WeibullMethod; 12] = [
        Self::Greg1,
        Self::Greg2,
        Self::Lm,
        Self::Ml,
        Self::Mlm,
        Self::Moment,
        Self::Pm,
        Self::Rank,
        Self::Reg,
        Self::Ustat,
        Self::Wml,
        Self::Wreg,
    ];
    pub const THREE_PARAMETER: [WeibullMethod; 11] = [
        Self::Mle,
        Self::Mm1,
        Self::Mm2,
        Self::Mm3,
        Self::Mml1,
        Self::Mml2,
        Self::Mml3,
        Self::Mml4,
        Self::Mps,
        Self::Tlm,
        Self::Wml,
    ];

    pub fn code(&self) -> &'static str {
        match self {
            Self::Greg1 => "greg1",
            Self::Greg2 => "greg2",
            Self::Lm => "lm",
            Self::Ml => "ml",
            Self::Mlm => "mlm",
            Self::Moment => "moment",
            Self::Pm => "pm",
            Self::Rank => "rank",
            Self::Reg => "reg",
            Self::Ustat => "ustat",
            Self::Wml => "wml",
            Self::Wreg => "wreg",
            Self::Mle => "mle",
            Self::Mm1 => "mm1",
            Self::Mm2 => "mm2",
            Self::Mm3 => "mm3",
            Self::Mml1 => "mml1",
            Self::Mml2 => "mml2",
            Self::Mml3 => "mml3",
            Self::Mml4 => "mml4",
            Self::Mps => "mps",
            Self::Tlm => "tlm",
        }
    }

    /// Whether the method is defined for the given parameter count.
    pub fn supports(&self, location: bool) -> bool {
        if location {
            Self::THREE_PARAMETER.contains(self)
        } else {
            Self::TWO_PARAMETER.contains(self)
        }
    }
}

impl fmt::Display for WeibullMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for WeibullMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::TWO_PARAMETER
            .iter()
            .chain(Self::THREE_PARAMETER.iter())
            .find(|m| m.code() == s)
            .copied()
            .ok_or_else(|| Error::Unknown {
                kind: "weibull method",
                name: s.to_string(),
            })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeibullFit {
    /// (α, β, μ)
    pub estimate: [f64; 3],
    pub measures: GofBlock,
    pub method: WeibullMethod,
    pub converged: bool,
    pub iterations: usize,
}

impl WeibullFit {
    pub fn dist(&self) -> Dist {
        Dist::new(Family::Weibull, &self.estimate).expect("fitted parameters are valid")
    }
}

pub(crate) struct Estimate {
    pub params: [f64; 3],
    pub converged: bool,
    pub iterations: usize,
}

impl Estimate {
    fn closed(alpha: f64, beta: f64, mu: f64) -> Self {
        Estimate {
            params: [alpha, beta, mu],
            converged: true,
            iterations: 0,
        }
    }
}

/// Median-rank plotting positions `(i - 0.375)/(n + 0.25)`.
pub(crate) fn median_ranks(n: usize) -> Vec<f64> {
    (1..=n).map(|i| (i as f64 - 0.375) / (n as f64 + 0.25)).collect()
}

/// Sample quantile by linear interpolation between order statistics
/// (R's default, type 7).
pub(crate) fn quantile7(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub(crate) fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let v = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, v)
}

/// Three-parameter Weibull log-likelihood.
pub fn loglik(data: &[f64], alpha: f64, beta: f64, mu: f64) -> f64 {
    match Dist::new(Family::Weibull, &[alpha, beta, mu]) {
        Ok(d) => data.iter().map(|&x| d.ln_pdf(x)).sum(),
        Err(_) => f64::NEG_INFINITY,
    }
}

/// Default starting point for iterative three-parameter methods: μ₀ just
/// below the sample minimum, then the two-parameter ML fit of `data - μ₀`.
pub fn default_starts(data: &[f64]) -> Result<[f64; 3]> {
    let min = data.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = data.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mu = if min > 0.0 { 0.9 * min } else { min - 0.1 * (max - min) };
    let shifted: Vec<f64> = data.iter().map(|x| x - mu).collect();
    let (a, b) = crate::mle::weibull2(&shifted, &vec![1.0; shifted.len()])?;
    Ok([a, b, mu])
}

/// Fit a Weibull distribution by one of the supported methods.
pub fn fit_weibull(
    data: &[f64],
    location: bool,
    method: WeibullMethod,
    starts: Option<&[f64]>,
) -> Result<WeibullFit> {
    if !method.supports(location) {
        return Err(Error::Domain(format!(
            "method {method} is not defined for the {}-parameter Weibull",
            if location { 3 } else { 2 }
        )));
    }
    if data.iter().any(|x| !x.is_finite()) {
        return Err(Error::Input("data contain non-finite values".into()));
    }
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    let distinct = 1 + sorted.windows(2).filter(|w| w[1] > w[0]).count();
    if sorted.is_empty() || distinct < 5 {
        return Err(Error::DegenerateSample(format!(
            "need at least 5 distinct values, got {}",
            if sorted.is_empty() { 0 } else { distinct }
        )));
    }

    let est = if location {
        let st = match starts {
            Some(s) => {
                if s.len() != 3 {
                    return Err(Error::ParamCount {
                        what: "weibull starts".into(),
                        expected: "3 (alpha, beta, mu)".into(),
                        got: s.len(),
                    });
                }
                Dist::new(Family::Weibull, s)?;
                if s[2] >= sorted[0] {
                    return Err(Error::ParamDomain {
                        family: "weibull",
                        field: "mu",
                        value: s[2],
                        reason: "starting location must lie below the sample minimum",
                    });
                }
                [s[0], s[1], s[2]]
            }
            None => default_starts(&sorted)?,
        };
        three::fit(&sorted, method, st)?
    } else {
        if sorted[0] <= 0.0 {
            return Err(Error::Domain("two-parameter Weibull needs positive data".into()));
        }
        two::fit(&sorted, method)?
    };

    let [a, b, mu] = est.params;
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite() && mu.is_finite()) || (location && mu >= sorted[0]) {
        return Err(Error::NonConvergence {
            what: format!("weibull {method}"),
            iterations: est.iterations,
            last: est.params.to_vec(),
        });
    }
    let dist = Dist::new(Family::Weibull, &est.params)?;
    let ll: f64 = sorted.iter().map(|&x| dist.ln_pdf(x)).sum();
    let k = if location { 3 } else { 2 };
    let (measures, _) = GofBlock::individual(&sorted, k, ll, |x| dist.cdf(x))?;
    Ok(WeibullFit {
        estimate: est.params,
        measures,
        method,
        converged: est.converged,
        iterations: est.iterations,
    })
}
