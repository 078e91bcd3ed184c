//! Goodness-of-fit measures attached to every fit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grouped::GroupedSample;

const CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InformationCriteria {
    pub aic: f64,
    /// Corrected AIC, `AIC + 2k(k+1)/(n-k-1)`.
    pub caic: f64,
    pub bic: f64,
    pub hqic: f64,
}

/// Information criteria from a maximized log-likelihood, `k` free parameters
/// and sample size `n`. Requires `n > k + 1`.
pub fn information_criteria(loglik: f64, k: usize, n: usize) -> Result<InformationCriteria> {
    if n <= k + 1 {
        return Err(Error::DegenerateSample(format!(
            "information criteria need n > k + 1 (n = {n}, k = {k})"
        )));
    }
    let kf = k as f64;
    let nf = n as f64;
    let aic = 2.0 * kf - 2.0 * loglik;
    Ok(InformationCriteria {
        aic,
        caic: aic + 2.0 * kf * (kf + 1.0) / (nf - kf - 1.0),
        bic: kf * nf.ln() - 2.0 * loglik,
        hqic: 2.0 * kf * nf.ln().ln() - 2.0 * loglik,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdfStats {
    pub ad: f64,
    pub cvm: f64,
    pub ks: f64,
    /// True when some fitted CDF value hit 0 or 1 and had to be clamped.
    pub clamped: bool,
}

/// Anderson–Darling, Cramér–von Mises and Kolmogorov–Smirnov statistics of
/// `data` against a fitted CDF.
pub fn edf_statistics<C: Fn(f64) -> f64>(data: &[f64], cdf: C) -> Result<EdfStats> {
    if data.is_empty() {
        return Err(Error::DegenerateSample("empty sample".into()));
    }
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    let u: Vec<f64> = sorted.iter().map(|&x| cdf(x)).collect();
    Ok(edf_from_uniforms(&u))
}

/// Statistics from already-sorted probability-integral-transformed values.
pub fn edf_from_uniforms(u_sorted: &[f64]) -> EdfStats {
    let n = u_sorted.len();
    let nf = n as f64;
    let mut clamped = false;
    let u: Vec<f64> = u_sorted
        .iter()
        .map(|&v| {
            if !(v > CLAMP && v < 1.0 - CLAMP) {
                clamped = true;
            }
            v.clamp(CLAMP, 1.0 - CLAMP)
        })
        .collect();
    let mut ad_sum = 0.0;
    let mut cvm = 1.0 / (12.0 * nf);
    let mut ks: f64 = 0.0;
    for i in 0..n {
        let w = (2 * i + 1) as f64;
        ad_sum += w * (u[i].ln() + (1.0 - u[n - 1 - i]).ln());
        cvm += (u[i] - w / (2.0 * nf)).powi(2);
        let hi = (i + 1) as f64 / nf - u[i];
        let lo = u[i] - i as f64 / nf;
        ks = ks.max(hi).max(lo);
    }
    EdfStats {
        ad: -nf - ad_sum / nf,
        cvm,
        ks,
        clamped,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquare {
    pub statistic: f64,
    /// Number of class merges forced by vanishing expected counts.
    pub merged_classes: usize,
}

/// Pearson chi-square of grouped frequencies against a fitted CDF. Tail mass
/// beyond the outer boundaries is folded into the first and last classes.
pub fn grouped_chi_square<C: Fn(f64) -> f64>(grp: &GroupedSample, cdf: C) -> Result<ChiSquare> {
    let n = grp.total() as f64;
    if n <= 0.0 {
        return Err(Error::DegenerateSample("total frequency is zero".into()));
    }
    let m = grp.classes();
    let mut probs = Vec::with_capacity(m);
    for i in 0..m {
        let lo = if i == 0 { 0.0 } else { cdf(grp.bounds()[i]) };
        let hi = if i + 1 == m { 1.0 } else { cdf(grp.bounds()[i + 1]) };
        probs.push((hi - lo).max(0.0));
    }
    let mut freqs: Vec<f64> = grp.freqs().iter().map(|&f| f as f64).collect();
    let mut merged = 0;
    while let Some(i) = probs.iter().position(|&p| p < CLAMP) {
        if probs.len() == 1 {
            break;
        }
        let j = if i == 0 { 1 } else { i - 1 };
        let (p, f) = (probs.remove(i), freqs.remove(i));
        let j = if j > i { j - 1 } else { j };
        probs[j] += p;
        freqs[j] += f;
        merged += 1;
    }
    let statistic = probs
        .iter()
        .zip(&freqs)
        .map(|(&p, &f)| {
            let e = n * p;
            (f - e) * (f - e) / e
        })
        .sum();
    Ok(ChiSquare {
        statistic,
        merged_classes: merged,
    })
}

/// EDF statistics for grouped data: class midpoints repeated by frequency.
pub fn grouped_edf_statistics<C: Fn(f64) -> f64>(grp: &GroupedSample, cdf: C) -> Result<EdfStats> {
    let mut u = Vec::with_capacity(grp.total() as usize);
    for (mid, &f) in grp.midpoints().iter().zip(grp.freqs()) {
        let v = cdf(*mid);
        u.extend(std::iter::repeat_n(v, f as usize));
    }
    if u.is_empty() {
        return Err(Error::DegenerateSample("total frequency is zero".into()));
    }
    Ok(edf_from_uniforms(&u))
}

/// The measures block reported with a fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofBlock {
    #[serde(flatten, default, skip_serializing_if = "Option::is_none")]
    pub criteria: Option<InformationCriteria>,
    pub ad: f64,
    pub cvm: f64,
    pub ks: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi_square: Option<f64>,
    pub log_likelihood: f64,
}

impl GofBlock {
    /// Full block for individual data.
    pub fn individual<C: Fn(f64) -> f64>(
        data: &[f64],
        k: usize,
        loglik: f64,
        cdf: C,
    ) -> Result<(Self, EdfStats)> {
        let edf = edf_statistics(data, cdf)?;
        let criteria = information_criteria(loglik, k, data.len()).ok();
        Ok((
            GofBlock {
                criteria,
                ad: edf.ad,
                cvm: edf.cvm,
                ks: edf.ks,
                chi_square: None,
                log_likelihood: loglik,
            },
            edf,
        ))
    }

    /// EDF statistics and log-likelihood only.
    pub fn edf_only<C: Fn(f64) -> f64>(data: &[f64], loglik: f64, cdf: C) -> Result<(Self, EdfStats)> {
        let (mut b, edf) = Self::individual(data, 0, loglik, cdf)?;
        b.criteria = None;
        Ok((b, edf))
    }

    /// Grouped block: criteria use the total frequency as sample size.
    pub fn grouped<C: Fn(f64) -> f64>(
        grp: &GroupedSample,
        k: usize,
        loglik: f64,
        cdf: C,
    ) -> Result<(Self, ChiSquare)> {
        let edf = grouped_edf_statistics(grp, &cdf)?;
        let chi = grouped_chi_square(grp, &cdf)?;
        let criteria = information_criteria(loglik, k, grp.total() as usize).ok();
        Ok((
            GofBlock {
                criteria,
                ad: edf.ad,
                cvm: edf.cvm,
                ks: edf.ks,
                chi_square: Some(chi.statistic),
                log_likelihood: loglik,
            },
            chi,
        ))
    }
}
