//! Fitting three-parameter distributions to class-frequency data.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::distribution::{Dist, Family};
use crate::error::{Error, Result};
use crate::gof::GofBlock;
use crate::mle;
use crate::optim::Optimizer;
use crate::quad::gauss_legendre;
use crate::special::{digamma, gamma, ln_factorial};

/// Class boundaries `r₀ < r₁ < … < r_m` and frequencies `f₁ … f_m`; class
/// `i` is the half-open interval `(rᵢ₋₁, rᵢ]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupedSample {
    bounds: Vec<f64>,
    freqs: Vec<u64>,
}

impl GroupedSample {
    pub fn new(bounds: Vec<f64>, freqs: Vec<u64>) -> Result<Self> {
        if freqs.is_empty() || bounds.len() != freqs.len() + 1 {
            return Err(Error::Domain(format!(
                "need m + 1 boundaries for m classes (got {} boundaries, {} frequencies)",
                bounds.len(),
                freqs.len()
            )));
        }
        if bounds.iter().any(|b| !b.is_finite()) || bounds.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain("class boundaries must be finite and strictly increasing".into()));
        }
        if freqs.iter().sum::<u64>() == 0 {
            return Err(Error::DegenerateSample("total frequency is zero".into()));
        }
        Ok(GroupedSample { bounds, freqs })
    }

    pub fn bounds(&self) -> &[f64] {
        &self.bounds
    }

    pub fn freqs(&self) -> &[u64] {
        &self.freqs
    }

    pub fn classes(&self) -> usize {
        self.freqs.len()
    }

    pub fn total(&self) -> u64 {
        self.freqs.iter().sum()
    }

    pub fn midpoints(&self) -> Vec<f64> {
        self.bounds.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// `ln(n! / Π fᵢ!)`.
    pub fn ln_multinomial_coef(&self) -> f64 {
        ln_factorial(self.total()) - self.freqs.iter().map(|&f| ln_factorial(f)).sum::<f64>()
    }

    /// Multinomial log-likelihood of a fitted CDF, including the
    /// combinatorial coefficient. Empty classes contribute nothing.
    pub fn loglik<C: Fn(f64) -> f64>(&self, cdf: C) -> f64 {
        self.kernel(cdf) + self.ln_multinomial_coef()
    }

    /// `Σ fᵢ ln pᵢ` without the coefficient.
    pub fn kernel<C: Fn(f64) -> f64>(&self, cdf: C) -> f64 {
        let cdfs: Vec<f64> = self.bounds.iter().map(|&r| cdf(r)).collect();
        let mut s = 0.0;
        for (i, &f) in self.freqs.iter().enumerate() {
            if f == 0 {
                continue;
            }
            let p = cdfs[i + 1] - cdfs[i];
            if !(p > 0.0) {
                return f64::NEG_INFINITY;
            }
            s += f as f64 * p.ln();
        }
        s
    }
}

// R's seq(from, to, length.out = m + 1): interior points from + i·by, last
// point exactly `to`.
fn equal_width_bounds(data: &[f64], m: usize) -> Result<Vec<f64>> {
    if m < 2 {
        return Err(Error::Domain("need at least 2 classes".into()));
    }
    if data.is_empty() {
        return Err(Error::DegenerateSample("empty sample".into()));
    }
    let lo = data.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = data.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return Err(Error::DegenerateSample("all observations are equal; range is zero".into()));
    }
    let by = (hi - lo) / m as f64;
    let mut r: Vec<f64> = (0..m).map(|i| lo + i as f64 * by).collect();
    r.push(hi);
    Ok(r)
}

fn count_into(bounds: &[f64], data: &[f64], keep_min: bool) -> Vec<u64> {
    let m = bounds.len() - 1;
    let mut f = vec![0u64; m];
    for &x in data {
        if x <= bounds[0] {
            if keep_min && x == bounds[0] {
                f[0] += 1;
            }
            continue;
        }
        // first boundary ≥ x closes the class
        let k = bounds.partition_point(|&b| b < x);
        if k >= 1 && k <= m {
            f[k - 1] += 1;
        }
    }
    f
}

/// Equal-width classes from `min` to `max`; the minimum is counted in class 1.
pub fn group(data: &[f64], m: usize) -> Result<GroupedSample> {
    let r = equal_width_bounds(data, m)?;
    let f = count_into(&r, data, true);
    GroupedSample::new(r, f)
}

/// Same boundaries as [`group`] but with every class open on the left, so
/// observations equal to the minimum are dropped (R's `cut` default).
pub fn group_open_lower(data: &[f64], m: usize) -> Result<GroupedSample> {
    let r = equal_width_bounds(data, m)?;
    let f = count_into(&r, data, false);
    GroupedSample::new(r, f)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupedMethod {
    /// Approximated ML: class midpoints stand in for the observations.
    Aml,
    Em,
    Ml,
}

impl FromStr for GroupedMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "aml" => Ok(GroupedMethod::Aml),
            "em" => Ok(GroupedMethod::Em),
            "ml" => Ok(GroupedMethod::Ml),
            _ => Err(Error::Unknown {
                kind: "grouped method",
                name: s.to_string(),
            }),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupedFit {
    pub family: Family,
    pub method: GroupedMethod,
    /// (α, β, μ)
    pub estimate: Vec<f64>,
    pub measures: GofBlock,
    pub converged: bool,
    pub iterations: usize,
    /// Grouped log-likelihood after each EM iteration (empty for aml/ml).
    #[serde(skip)]
    pub loglik_trace: Vec<f64>,
    pub merged_classes: usize,
}

const EM_TOL: f64 = 1e-8;
const EM_MAX_ITER: usize = 5000;
const GL_NODES: usize = 24;

fn check_family(family: Family) -> Result<()> {
    match family {
        Family::Weibull | Family::BirnbaumSaunders | Family::Ge => Ok(()),
        f => Err(Error::Domain(format!(
            "grouped fitting supports weibull, birnbaum-saunders and ge, not {f}"
        ))),
    }
}

/// Fit a three-parameter family to grouped data.
pub fn fit_grouped(
    grp: &GroupedSample,
    family: Family,
    method: GroupedMethod,
    starts: Option<&[f64]>,
    optimizer: Option<Optimizer>,
) -> Result<GroupedFit> {
    check_family(family)?;
    if grp.freqs().iter().filter(|&&f| f > 0).count() < 2 {
        return Err(Error::DegenerateSample(
            "a single non-empty class leaves the likelihood flat".into(),
        ));
    }
    if let Some(s) = starts {
        if s.len() != 3 {
            return Err(Error::ParamCount {
                what: "grouped starts".into(),
                expected: "3 (shape, scale, location)".into(),
                got: s.len(),
            });
        }
        Dist::new(family, s)?;
    }
    let (estimate, converged, iterations, trace) = match method {
        GroupedMethod::Ml => {
            let s = starts.ok_or_else(|| Error::Domain("ml needs starting values".into()))?;
            let (p, conv, it) = grouped_ml(grp, family, s, optimizer.unwrap_or_default())?;
            (p, conv, it, Vec::new())
        }
        GroupedMethod::Aml => {
            let s = starts.ok_or_else(|| Error::Domain("aml needs starting values".into()))?;
            let w: Vec<f64> = grp.freqs().iter().map(|&f| f as f64).collect();
            let p = mle::fit_weighted(family, &grp.midpoints(), &w, s, Some(grp.bounds()[0]))?;
            (p, true, 1, Vec::new())
        }
        GroupedMethod::Em => {
            let init = match starts {
                Some(s) => s.to_vec(),
                None => initial_guess(grp, family),
            };
            grouped_em(grp, family, &init)?
        }
    };
    let dist = Dist::new(family, &estimate)?;
    let ll = grp.loglik(|x| dist.cdf(x));
    let (measures, chi) = GofBlock::grouped(grp, 3, ll, |x| dist.cdf(x))?;
    Ok(GroupedFit {
        family,
        method,
        estimate,
        measures,
        converged,
        iterations,
        loglik_trace: trace,
        merged_classes: chi.merged_classes,
    })
}

fn grouped_ml(
    grp: &GroupedSample,
    family: Family,
    start: &[f64],
    optimizer: Optimizer,
) -> Result<(Vec<f64>, bool, usize)> {
    let r0 = grp.bounds()[0];
    let mut s = start.to_vec();
    if s[2] >= r0 {
        s[2] = r0 - 0.5 * (grp.bounds()[1] - r0);
    }
    let n = grp.total() as f64;
    let gap0 = r0 - s[2];
    let to_params = |u: &[f64]| vec![s[0] * u[0].exp(), s[1] * u[1].exp(), r0 - gap0 * u[2].exp()];
    let objective = |u: &[f64]| match Dist::new(family, &to_params(u)) {
        Ok(d) => {
            let k = grp.kernel(|x| d.cdf(x));
            if k.is_finite() {
                -k / n
            } else {
                f64::INFINITY
            }
        }
        Err(_) => f64::INFINITY,
    };
    let r = optimizer.minimize(objective, &[0.0, 0.0, 0.0]);
    if !r.value.is_finite() {
        return Err(Error::NonConvergence {
            what: "grouped ml".into(),
            iterations: r.iterations,
            last: to_params(&r.x),
        });
    }
    Ok((to_params(&r.x), r.converged, r.iterations))
}

/// Moment-style starting point from class midpoints.
pub fn initial_guess(grp: &GroupedSample, family: Family) -> Vec<f64> {
    let r0 = grp.bounds()[0];
    let width = grp.bounds()[1] - r0;
    let mu = r0 - 0.5 * width;
    let mids = grp.midpoints();
    let n = grp.total() as f64;
    let ys: Vec<(f64, f64)> = mids
        .iter()
        .zip(grp.freqs())
        .map(|(&m, &f)| (m - mu, f as f64))
        .collect();
    let mean = ys.iter().map(|(y, f)| y * f).sum::<f64>() / n;
    let var = ys.iter().map(|(y, f)| f * (y - mean).powi(2)).sum::<f64>() / n;
    let cv = (var.sqrt() / mean).max(0.05);
    match family {
        Family::BirnbaumSaunders => {
            let harm = n / ys.iter().map(|(y, f)| f / y).sum::<f64>();
            let beta = (mean * harm).sqrt();
            let alpha = (2.0 * ((mean / harm).sqrt() - 1.0)).max(1e-4).sqrt();
            vec![alpha.max(0.05), beta, mu]
        }
        Family::Ge => {
            let alpha = (1.0 / (cv * cv)).clamp(0.2, 50.0);
            let beta = (digamma(alpha + 1.0) - digamma(1.0)) / mean;
            vec![alpha, beta, mu]
        }
        _ => {
            let alpha = cv.powf(-1.086).clamp(0.2, 50.0);
            let beta = mean / gamma(1.0 + 1.0 / alpha);
            vec![alpha, beta, mu]
        }
    }
}

/// Quadrature nodes inside every non-empty class together with
/// conditional-expectation weights under `dist`: class `i` carries total
/// weight `scale_i`, spread in proportion to the density.
pub(crate) fn class_nodes(
    grp: &GroupedSample,
    dist: &Dist,
    scales: &[f64],
    nodes: &mut Vec<f64>,
    weights: &mut Vec<f64>,
) {
    let (gx, gw) = gauss_legendre(GL_NODES);
    nodes.clear();
    weights.clear();
    for (i, w) in grp.bounds().windows(2).enumerate() {
        if scales[i] <= 0.0 {
            continue;
        }
        let (a, b) = (w[0].max(dist.lower()), w[1].min(dist.upper()));
        if !(b > a) {
            continue;
        }
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let start = nodes.len();
        let mut mass = 0.0;
        for (t, wt) in gx.iter().zip(&gw) {
            let x = c + h * t;
            let v = wt * h * dist.pdf(x);
            nodes.push(x);
            weights.push(v);
            mass += v;
        }
        if mass > 0.0 && mass.is_finite() {
            for v in &mut weights[start..] {
                *v *= scales[i] / mass;
            }
        } else {
            // density vanishes numerically: spread uniformly
            for (v, wt) in weights[start..].iter_mut().zip(&gw) {
                *v = scales[i] * wt / 2.0;
            }
        }
    }
}

fn grouped_em(
    grp: &GroupedSample,
    family: Family,
    init: &[f64],
) -> Result<(Vec<f64>, bool, usize, Vec<f64>)> {
    let r0 = grp.bounds()[0];
    let mut theta = init.to_vec();
    if theta[2] >= r0 {
        theta[2] = r0 - 0.5 * (grp.bounds()[1] - r0);
    }
    let mut dist = Dist::new(family, &theta)?;
    let mut ll = grp.kernel(|x| dist.cdf(x));
    if !ll.is_finite() {
        return Err(Error::Domain("initial values give zero probability to an occupied class".into()));
    }
    let scales: Vec<f64> = grp.freqs().iter().map(|&f| f as f64).collect();
    let mut trace = vec![ll + grp.ln_multinomial_coef()];
    let (mut nodes, mut weights) = (Vec::new(), Vec::new());
    for it in 1..=EM_MAX_ITER {
        class_nodes(grp, &dist, &scales, &mut nodes, &mut weights);
        let next = mle::fit_weighted(family, &nodes, &weights, &theta, Some(r0))?;
        let next_dist = Dist::new(family, &next)?;
        let next_ll = grp.kernel(|x| next_dist.cdf(x));
        if !(next_ll >= ll) {
            // quadrature noise at the optimum; keep the better iterate
            return Ok((theta, true, it, trace));
        }
        let delta = next_ll - ll;
        theta = next;
        dist = next_dist;
        ll = next_ll;
        trace.push(ll + grp.ln_multinomial_coef());
        if delta < EM_TOL {
            return Ok((theta, true, it, trace));
        }
    }
    Err(Error::NonConvergence {
        what: "grouped EM".into(),
        iterations: EM_MAX_ITER,
        last: theta,
    })
}
