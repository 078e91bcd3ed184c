//! Weighted maximum likelihood for a single family.
//!
//! Every EM M-step in the crate reduces to maximizing `Σ wᵢ ln f(xᵢ | θ)`:
//! responsibility-weighted observations for mixtures, quadrature nodes for
//! grouped data. Closed forms or one-dimensional profiles are used where
//! they exist; the rest run a simplex search on an unconstrained
//! reparameterization, started from the caller's current estimate so the
//! objective never decreases.

use crate::distribution::{Dist, Family};
use crate::error::{Error, Result};
use crate::optim::NelderMead;
use crate::roots;
use crate::special::digamma;

/// Weighted log-likelihood `Σ wᵢ ln f(xᵢ)`.
pub fn weighted_loglik(dist: &Dist, x: &[f64], w: &[f64]) -> f64 {
    x.iter()
        .zip(w)
        .filter(|(_, &wi)| wi > 0.0)
        .map(|(&xi, &wi)| wi * dist.ln_pdf(xi))
        .sum()
}

/// Two-parameter Weibull weighted ML via the profile shape equation.
pub fn weibull2(x: &[f64], w: &[f64]) -> Result<(f64, f64)> {
    let sw: f64 = w.iter().sum();
    if sw <= 0.0 {
        return Err(Error::DegenerateSample("zero total weight".into()));
    }
    let mean_ln: f64 = x.iter().zip(w).map(|(&xi, &wi)| wi * xi.ln()).sum::<f64>() / sw;
    // work with x / max for overflow safety; the shape equation is scale free
    let xmax = x.iter().cloned().fold(f64::MIN, f64::max);
    let lz: Vec<f64> = x.iter().map(|&xi| (xi / xmax).ln()).collect();
    let mean_lz = mean_ln - xmax.ln();
    let spread = lz
        .iter()
        .zip(w)
        .filter(|(_, &wi)| wi > 0.0)
        .map(|(&l, _)| (l - mean_lz).abs())
        .fold(0.0, f64::max);
    if spread < 1e-12 {
        return Err(Error::DegenerateSample("all weighted observations are equal".into()));
    }
    let g = |a: f64| {
        let mut s0 = 0.0;
        let mut s1 = 0.0;
        for (&l, &wi) in lz.iter().zip(w) {
            let t = wi * (a * l).exp();
            s0 += t;
            s1 += t * l;
        }
        s1 / s0 - 1.0 / a - mean_lz
    };
    let a = roots::bracket_and_solve(g, 0.5, 5.0, 0.0, f64::INFINITY, 1e-13)?;
    let s0: f64 = lz.iter().zip(w).map(|(&l, &wi)| wi * (a * l).exp()).sum::<f64>() / sw;
    let b = xmax * s0.powf(1.0 / a);
    Ok((a, b))
}

/// Gamma (shape, scale) weighted ML.
pub fn gamma2(x: &[f64], w: &[f64]) -> Result<(f64, f64)> {
    let sw: f64 = w.iter().sum();
    let m: f64 = x.iter().zip(w).map(|(&xi, &wi)| wi * xi).sum::<f64>() / sw;
    let ml: f64 = x.iter().zip(w).map(|(&xi, &wi)| wi * xi.ln()).sum::<f64>() / sw;
    let s = m.ln() - ml;
    if !(s > 1e-14) {
        return Err(Error::DegenerateSample("all weighted observations are equal".into()));
    }
    let a0 = (3.0 - s + ((s - 3.0).powi(2) + 24.0 * s).sqrt()) / (12.0 * s);
    let a = roots::bracket_and_solve(
        |a: f64| a.ln() - digamma(a) - s,
        0.5 * a0,
        2.0 * a0,
        0.0,
        f64::INFINITY,
        1e-14 * a0,
    )?;
    Ok((a, m / a))
}

/// Log-normal (log-mean, log-sd) weighted ML.
pub fn lognormal2(x: &[f64], w: &[f64]) -> Result<(f64, f64)> {
    let sw: f64 = w.iter().sum();
    let mu: f64 = x.iter().zip(w).map(|(&xi, &wi)| wi * xi.ln()).sum::<f64>() / sw;
    let var: f64 = x
        .iter()
        .zip(w)
        .map(|(&xi, &wi)| wi * (xi.ln() - mu).powi(2))
        .sum::<f64>()
        / sw;
    if !(var > 0.0) {
        return Err(Error::DegenerateSample("all weighted observations are equal".into()));
    }
    Ok((mu, var.sqrt()))
}

/// Birnbaum-Saunders (shape, scale) weighted ML. For fixed β the shape is
/// `α² = s/β + β/r - 2` (s the weighted mean, r the weighted harmonic mean);
/// β̂ solves the profile score and lies in `[r, s]`.
pub fn birnbaum_saunders2(x: &[f64], w: &[f64]) -> Result<(f64, f64)> {
    let sw: f64 = w.iter().sum();
    let s: f64 = x.iter().zip(w).map(|(&xi, &wi)| wi * xi).sum::<f64>() / sw;
    let inv: f64 = x.iter().zip(w).map(|(&xi, &wi)| wi / xi).sum::<f64>() / sw;
    let r = 1.0 / inv;
    if !(s - r > 1e-14 * s) {
        return Err(Error::DegenerateSample("all weighted observations are equal".into()));
    }
    let alpha2 = |b: f64| s / b + b * inv - 2.0;
    let score = |b: f64| {
        let m: f64 = x.iter().zip(w).map(|(&xi, &wi)| wi / (xi + b)).sum::<f64>() / sw;
        -0.5 * (inv - s / (b * b)) / alpha2(b) - 0.5 / b + m
    };
    let b = roots::brent(score, r, s, 1e-14 * s)?;
    Ok((alpha2(b).sqrt(), b))
}

/// Maps parameters to an unconstrained space around a reference point.
struct Reparam {
    family: Family,
    start: Vec<f64>,
    /// upper bound for the location parameter, if it is free
    loc_bound: Option<f64>,
}

impl Reparam {
    fn loc_index(&self) -> Option<usize> {
        self.loc_bound.map(|_| 2)
    }

    fn to_free(&self, p: &[f64]) -> Vec<f64> {
        p.iter()
            .enumerate()
            .map(|(i, &v)| self.coord_to_free(i, v))
            .collect()
    }

    fn coord_to_free(&self, i: usize, v: f64) -> f64 {
        if Some(i) == self.loc_index() {
            let bound = self.loc_bound.unwrap();
            let gap0 = bound - self.start[i];
            ((bound - v) / gap0).ln()
        } else if self.is_positive(i) {
            (v / self.start[i]).ln()
        } else {
            (v - self.start[i]) / self.real_scale(i)
        }
    }

    fn from_free(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .enumerate()
            .map(|(i, &t)| {
                if Some(i) == self.loc_index() {
                    let bound = self.loc_bound.unwrap();
                    bound - (bound - self.start[i]) * t.exp()
                } else if self.is_positive(i) {
                    self.start[i] * t.exp()
                } else {
                    self.start[i] + t * self.real_scale(i)
                }
            })
            .collect()
    }

    fn is_positive(&self, i: usize) -> bool {
        match self.family {
            Family::LogNormal | Family::SkewNormal => i == 1,
            _ => i < 2,
        }
    }

    fn real_scale(&self, i: usize) -> f64 {
        match (self.family, i) {
            (Family::SkewNormal, 0) => self.start[1],
            (Family::LogNormal, 0) => self.start[1],
            _ => 1.0,
        }
    }
}

/// Weighted ML for `family` from `start`. When `start` includes a location
/// parameter it is estimated subject to `μ < loc_bound` (defaults to the
/// smallest positively weighted observation).
pub fn fit_weighted(
    family: Family,
    x: &[f64],
    w: &[f64],
    start: &[f64],
    loc_bound: Option<f64>,
) -> Result<Vec<f64>> {
    Dist::new(family, start)?;
    let with_loc = family.has_location() && start.len() == family.base_len() + 1;
    let sw: f64 = w.iter().sum();
    if !(sw > 0.0) {
        return Err(Error::DegenerateSample("zero total weight".into()));
    }

    if !with_loc {
        let closed = match family {
            Family::Weibull => Some(weibull2(x, w)),
            Family::Gamma => Some(gamma2(x, w)),
            Family::LogNormal => Some(lognormal2(x, w)),
            // an unbracketed profile score falls through to the simplex
            Family::BirnbaumSaunders => birnbaum_saunders2(x, w).ok().map(Ok),
            _ => None,
        };
        if let Some(r) = closed {
            let (a, b) = r?;
            return Ok(vec![a, b]);
        }
    }

    let mut start = start.to_vec();
    let loc_bound = if with_loc {
        let xmin = x
            .iter()
            .zip(w)
            .filter(|(_, &wi)| wi > 0.0)
            .map(|(&xi, _)| xi)
            .fold(f64::INFINITY, f64::min);
        let bound = loc_bound.unwrap_or(xmin).min(xmin);
        if start[2] >= bound {
            let width = (bound.abs()).max(1.0);
            start[2] = bound - 0.05 * width;
        }
        Some(bound)
    } else {
        None
    };
    let rp = Reparam {
        family,
        start: start.clone(),
        loc_bound,
    };
    let objective = |u: &[f64]| {
        let p = rp.from_free(u);
        match Dist::new(family, &p) {
            Ok(d) => {
                let v = -weighted_loglik(&d, x, w) / sw;
                if v.is_nan() {
                    f64::INFINITY
                } else {
                    v
                }
            }
            Err(_) => f64::INFINITY,
        }
    };
    let u0 = rp.to_free(&start);
    let f0 = objective(&u0);
    let nm = NelderMead {
        step: 0.2,
        max_iter: 4000,
        ftol: 1e-13,
        xtol: 1e-10,
        restarts: 3,
    };
    let r = nm.minimize(&objective, &u0);
    if r.value <= f0 {
        Ok(rp.from_free(&r.x))
    } else {
        Ok(start)
    }
}
