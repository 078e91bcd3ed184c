//! Two-parameter estimators (μ = 0). All take sorted positive data.

use super::{mean_var, median_ranks, quantile7, Estimate, WeibullMethod};
use crate::error::{Error, Result};
use crate::mle::weibull2;
use crate::roots;
use crate::special::{ln_gamma, EULER_GAMMA};

pub(super) fn fit(x: &[f64], method: WeibullMethod) -> Result<Estimate> {
    let (a, b) = match method {
        WeibullMethod::Ml => ml(x)?,
        WeibullMethod::Wml => wml(x)?,
        WeibullMethod::Moment => moment(x)?,
        WeibullMethod::Lm => lmoment(x)?,
        WeibullMethod::Mlm => log_moment(x),
        WeibullMethod::Pm => percentile(x)?,
        WeibullMethod::Rank => rank(x),
        WeibullMethod::Reg => regression(x, None),
        WeibullMethod::Wreg => regression(x, Some(&zhang_weights(x.len()))),
        WeibullMethod::Greg1 => generalized(x, true)?,
        WeibullMethod::Greg2 => generalized(x, false)?,
        WeibullMethod::Ustat => ustat(x),
        _ => unreachable!("three-parameter method routed to two-parameter fit"),
    };
    Ok(Estimate::closed(a, b, 0.0))
}

fn ml(x: &[f64]) -> Result<(f64, f64)> {
    weibull2(x, &vec![1.0; x.len()])
}

/// Scale at a given shape from the likelihood equation `β^α = mean(x^α)`.
pub(super) fn ml_scale(x: &[f64], mu: f64, alpha: f64) -> f64 {
    let xmax = x.iter().cloned().fold(f64::MIN, f64::max) - mu;
    let s: f64 = x.iter().map(|&v| ((v - mu) / xmax).powf(alpha)).sum::<f64>() / x.len() as f64;
    xmax * s.powf(1.0 / alpha)
}

/// Small-sample shape correction `(n-2)/(n-0.68)` applied to the ML shape,
/// scale re-solved from its likelihood equation.
pub(super) fn shape_weight(n: usize) -> f64 {
    (n as f64 - 2.0) / (n as f64 - 0.68)
}

fn wml(x: &[f64]) -> Result<(f64, f64)> {
    let (a, _) = ml(x)?;
    let a = a * shape_weight(x.len());
    Ok((a, ml_scale(x, 0.0, a)))
}

/// `Γ(1+2/α)/Γ(1+1/α)² - 1`, the squared coefficient of variation.
pub(super) fn cv2(alpha: f64) -> f64 {
    (ln_gamma(1.0 + 2.0 / alpha) - 2.0 * ln_gamma(1.0 + 1.0 / alpha)).exp() - 1.0
}

fn moment(x: &[f64]) -> Result<(f64, f64)> {
    let (m, v) = mean_var(x);
    let target = v / (m * m);
    let la = roots::bracket_and_solve(|la: f64| cv2(la.exp()) - target, -1.0, 2.0, -6.0, 8.0, 1e-13)?;
    let a = la.exp();
    Ok((a, m / ln_gamma(1.0 + 1.0 / a).exp()))
}

/// Unbiased sample L-moments `l1`, `l2`.
pub(crate) fn sample_l12(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let b0 = x.iter().sum::<f64>() / n;
    let b1 = x
        .iter()
        .enumerate()
        .map(|(i, &v)| i as f64 / (n - 1.0) * v)
        .sum::<f64>()
        / n;
    (b0, 2.0 * b1 - b0)
}

fn lmoment(x: &[f64]) -> Result<(f64, f64)> {
    let (l1, l2) = sample_l12(x);
    let t = l2 / l1;
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::DegenerateSample("L-CV outside (0, 1)".into()));
    }
    let a = -std::f64::consts::LN_2 / (1.0 - t).ln();
    Ok((a, l1 / ln_gamma(1.0 + 1.0 / a).exp()))
}

fn log_moment(x: &[f64]) -> (f64, f64) {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let (m, v) = mean_var(&lx);
    let a = std::f64::consts::PI / (6.0 * v).sqrt();
    (a, (m + EULER_GAMMA / a).exp())
}

fn percentile(x: &[f64]) -> Result<(f64, f64)> {
    let (p1, p2) = (0.25f64, 0.75f64);
    let (q1, q2) = (quantile7(x, p1), quantile7(x, p2));
    if !(q2 > q1) {
        return Err(Error::DegenerateSample("quartiles coincide".into()));
    }
    let (k1, k2) = (-(1.0 - p1).ln(), -(1.0 - p2).ln());
    let a = (k2.ln() - k1.ln()) / (q2.ln() - q1.ln());
    Ok((a, q1 / k1.powf(1.0 / a)))
}

// correlation between order statistics and the shape-α Weibull scores
fn rank_corr(x: &[f64], q0: &[f64], alpha: f64) -> f64 {
    let q: Vec<f64> = q0.iter().map(|v| v.powf(1.0 / alpha)).collect();
    pearson(x, &q)
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    sxy / (sxx * syy).sqrt()
}

fn rank(x: &[f64]) -> (f64, f64) {
    let q0: Vec<f64> = median_ranks(x.len()).iter().map(|p| -(1.0 - p).ln()).collect();
    // coarse scan in ln α, then golden refinement around the best cell
    let (lo, hi, steps) = (-3.0f64, 4.5f64, 150);
    let h = (hi - lo) / steps as f64;
    let best = (0..=steps)
        .map(|i| lo + i as f64 * h)
        .map(|la| (la, rank_corr(x, &q0, la.exp())))
        .fold((lo, f64::NEG_INFINITY), |acc, v| if v.1 > acc.1 { v } else { acc });
    let la = roots::golden_max(|la| rank_corr(x, &q0, la.exp()), best.0 - h, best.0 + h, 1e-10);
    let a = la.exp();
    let q: Vec<f64> = q0.iter().map(|v| v.powf(1.0 / a)).collect();
    let b = x.iter().zip(&q).map(|(u, v)| u * v).sum::<f64>() / q.iter().map(|v| v * v).sum::<f64>();
    (a, b)
}

/// Weighted least squares of `y` on `t`: returns (slope, intercept).
fn wls(t: &[f64], y: &[f64], w: &[f64]) -> (f64, f64) {
    let sw: f64 = w.iter().sum();
    let mt = t.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let my = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let mut sty = 0.0;
    let mut stt = 0.0;
    for ((a, b), c) in t.iter().zip(y).zip(w) {
        sty += c * (a - mt) * (b - my);
        stt += c * (a - mt).powi(2);
    }
    let slope = sty / stt;
    (slope, my - slope * mt)
}

fn linearized(x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let lx = x.iter().map(|v| v.ln()).collect();
    let y = median_ranks(x.len()).iter().map(|p| (-(1.0 - p).ln()).ln()).collect();
    (lx, y)
}

/// Zhang-type weights `3.3F - 27.5[1 - (1-F)^0.025]` at the plotting
/// positions, floored at zero (they turn negative for F above ~0.998).
fn zhang_weights(n: usize) -> Vec<f64> {
    median_ranks(n)
        .iter()
        .map(|&f| (3.3 * f - 27.5 * (1.0 - (1.0 - f).powf(0.025))).max(0.0))
        .collect()
}

fn regression(x: &[f64], w: Option<&[f64]>) -> (f64, f64) {
    let (lx, y) = linearized(x);
    let ones = vec![1.0; x.len()];
    let (a, c) = wls(&lx, &y, w.unwrap_or(&ones));
    (a, (-c / a).exp())
}

/// Generalized least squares of `ln x₍ᵢ₎ = ln β + zᵢ/α` where `zᵢ` is the
/// linearized plotting position. The covariance of `ln X₍ᵢ₎` is taken from
/// the delta method on uniform order statistics,
/// `g'(pᵢ) g'(pⱼ) min(pᵢ,pⱼ)(1-max(pᵢ,pⱼ))/(n+2)` with `g(p) = ln(-ln(1-p))`
/// and `pᵢ = i/(n+1)`. Its inverse is `D⁻¹ T D⁻¹` with `T = tridiag(-1, 2, -1)`.
/// With `full = false` only the diagonal of the covariance is used.
fn generalized(x: &[f64], full: bool) -> Result<(f64, f64)> {
    let n = x.len();
    let (lx, z) = linearized(x);
    let p: Vec<f64> = (1..=n).map(|i| i as f64 / (n as f64 + 1.0)).collect();
    let dinv: Vec<f64> = p.iter().map(|&p| (1.0 - p) * -(1.0 - p).ln()).collect();
    let quad = |u: &[f64], v: &[f64]| {
        let mut s = 0.0;
        for i in 0..n {
            if full {
                let ui = u[i] * dinv[i];
                s += 2.0 * ui * v[i] * dinv[i];
                if i + 1 < n {
                    s -= ui * v[i + 1] * dinv[i + 1] + u[i + 1] * dinv[i + 1] * v[i] * dinv[i];
                }
            } else {
                s += u[i] * v[i] * dinv[i] * dinv[i] / (p[i] * (1.0 - p[i]));
            }
        }
        s
    };
    let ones = vec![1.0; n];
    let s11 = quad(&ones, &ones);
    let s1z = quad(&ones, &z);
    let szz = quad(&z, &z);
    let s1r = quad(&ones, &lx);
    let szr = quad(&z, &lx);
    let det = s11 * szz - s1z * s1z;
    if !(det.abs() > 0.0) {
        return Err(Error::Singular("generalized regression normal equations".into()));
    }
    let slope = (s11 * szr - s1z * s1r) / det;
    let icpt = (szz * s1r - s1z * szr) / det;
    if !(slope > 0.0) {
        return Err(Error::DegenerateSample("generalized regression slope is not positive".into()));
    }
    Ok((1.0 / slope, icpt.exp()))
}

/// Gini mean difference of ln x estimates `2 ln 2 / α`.
fn ustat(x: &[f64]) -> (f64, f64) {
    let n = x.len();
    let nf = n as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let gmd = lx
        .iter()
        .enumerate()
        .map(|(i, v)| (2.0 * (i + 1) as f64 - nf - 1.0) * v)
        .sum::<f64>()
        * 2.0
        / (nf * (nf - 1.0));
    let a = 2.0 * std::f64::consts::LN_2 / gmd;
    let m = lx.iter().sum::<f64>() / nf;
    (a, (m + EULER_GAMMA / a).exp())
}
