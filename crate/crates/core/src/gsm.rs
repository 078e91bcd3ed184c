//! Gamma shape mixtures: component `j = 1..K` is gamma with shape `j` and a
//! common rate `β`.

use serde::{Deserialize, Serialize};

use crate::distribution::Family;
use crate::error::{Error, Result};
use crate::gof::GofBlock;
use crate::mixture::MixtureSpec;
use crate::rng::RngStream;
use crate::special::{gamma_lr, gamma_ur, ln_gamma};

const WEIGHT_TOL: f64 = 1e-9;
const EM_TOL: f64 = 1e-8;
const EM_MAX_ITER: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GsmSpec {
    omega: Vec<f64>,
    beta: f64,
}

impl GsmSpec {
    pub fn new(omega: Vec<f64>, beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::ParamDomain {
                family: "gsm",
                field: "beta",
                value: beta,
                reason: "rate must be positive",
            });
        }
        if omega.is_empty() {
            return Err(Error::Domain("gsm needs at least one weight".into()));
        }
        if let Some(&w) = omega.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
            return Err(Error::ParamDomain {
                family: "gsm",
                field: "omega",
                value: w,
                reason: "weights must be non-negative",
            });
        }
        let total: f64 = omega.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::ParamDomain {
                family: "gsm",
                field: "omega",
                value: total,
                reason: "weights must sum to one",
            });
        }
        Ok(GsmSpec { omega, beta })
    }

    pub fn k(&self) -> usize {
        self.omega.len()
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// ln of each weighted component density at `x > 0`.
    fn ln_terms(&self, x: f64) -> impl Iterator<Item = f64> + '_ {
        let lb = self.beta.ln();
        let lx = x.ln();
        self.omega.iter().enumerate().map(move |(i, &w)| {
            let j = (i + 1) as f64;
            w.ln() + j * lb + (j - 1.0) * lx - self.beta * x - ln_gamma(j)
        })
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        if x < 0.0 || x.is_nan() {
            return f64::NEG_INFINITY;
        }
        if x == 0.0 {
            return (self.omega[0] * self.beta).ln();
        }
        let t: Vec<f64> = self.ln_terms(x).collect();
        let m = t.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if m == f64::NEG_INFINITY {
            return m;
        }
        m + t.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
    }

    /// Density, or its natural log when `log` is set.
    pub fn pdf(&self, x: f64, log: bool) -> f64 {
        let l = self.ln_pdf(x);
        if log {
            l
        } else {
            l.exp()
        }
    }

    /// Distribution function with the usual `log_p` / `lower_tail` flags.
    pub fn cdf(&self, x: f64, log_p: bool, lower_tail: bool) -> f64 {
        let p = if x <= 0.0 {
            if lower_tail {
                0.0
            } else {
                1.0
            }
        } else {
            let bx = self.beta * x;
            let f = if lower_tail { gamma_lr } else { gamma_ur };
            let s: f64 = self
                .omega
                .iter()
                .enumerate()
                .filter(|(_, &w)| w > 0.0)
                .map(|(i, &w)| w * f((i + 1) as f64, bx))
                .sum();
            s.clamp(0.0, 1.0)
        };
        if log_p {
            p.ln()
        } else {
            p
        }
    }

    /// Draw `n` variates: a shape index from ω, then a gamma variate.
    pub fn sample(&self, n: usize, rng: &mut RngStream) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::Domain("sample size must be positive".into()));
        }
        Ok((0..n)
            .map(|_| {
                let j = rng.categorical(&self.omega) + 1;
                rng.gamma(j as f64) / self.beta
            })
            .collect())
    }

    /// The same model as a gamma [`MixtureSpec`] (shape `j`, scale `1/β`).
    pub fn to_mixture(&self) -> Result<MixtureSpec> {
        let params = (1..=self.k()).map(|j| vec![j as f64, 1.0 / self.beta]).collect();
        MixtureSpec::new(Family::Gamma, self.omega.clone(), params)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GsmFit {
    pub beta: f64,
    pub omega: Vec<f64>,
    pub measures: GofBlock,
    pub iterations: usize,
    #[serde(skip)]
    pub loglik_trace: Vec<f64>,
}

impl GsmFit {
    pub fn spec(&self) -> GsmSpec {
        GsmSpec::new(self.omega.clone(), self.beta).expect("fitted spec is valid")
    }
}

/// EM fit of a `k`-shape gamma mixture.
pub fn fit_gsm(data: &[f64], k: usize) -> Result<GsmFit> {
    if k == 0 {
        return Err(Error::Domain("need at least one shape component".into()));
    }
    if data.len() < 2 {
        return Err(Error::DegenerateSample("need at least two observations".into()));
    }
    if data.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(Error::Domain("gsm fitting needs positive finite data".into()));
    }
    let n = data.len() as f64;
    let sum: f64 = data.iter().sum();
    let (xmin, xmax) = data
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    let mut spec = GsmSpec {
        omega: vec![1.0 / k as f64; k],
        beta: (k as f64 + 1.0) / 2.0 * n / sum,
    };
    let mut wsum = vec![0.0; k];
    // one EM map: ℓ at the input and the M-step image
    let mut em = |s: &GsmSpec| {
        let (shape_total, ll) = e_step(s, data, xmin, xmax, &mut wsum);
        let next = GsmSpec {
            omega: wsum.iter().map(|w| w / n).collect(),
            beta: shape_total / sum,
        };
        (ll, next)
    };
    let mut trace: Vec<f64> = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < EM_MAX_ITER {
        let (l0, t1) = em(&spec);
        let done = trace.last().is_some_and(|&prev| (l0 - prev).abs() < EM_TOL);
        trace.push(l0);
        if done {
            converged = true;
            break;
        }
        let (l1, t2) = em(&t1);
        iterations += 2;
        let p0 = flat(&spec);
        let r: Vec<f64> = flat(&t1).iter().zip(&p0).map(|(a, b)| a - b).collect();
        let v: Vec<f64> = flat(&t2).iter().zip(flat(&t1)).zip(&r).map(|((a, b), c)| a - b - c).collect();
        let (rr, vv) = (norm(&r), norm(&v));
        if !(vv > 0.0) || !(rr > 0.0) {
            spec = t2;
            continue;
        }
        // squared extrapolation, pulled back toward the plain double step
        // (α = -1) until the point is a valid spec
        let mut alpha = -rr / vv;
        let mut jump = None;
        for _ in 0..10 {
            if alpha >= -1.0 {
                break;
            }
            let q: Vec<f64> = p0
                .iter()
                .zip(&r)
                .zip(&v)
                .map(|((p, r), v)| p - 2.0 * alpha * r + alpha * alpha * v)
                .collect();
            jump = unflat(&q);
            if jump.is_some() {
                break;
            }
            alpha = (alpha - 1.0) / 2.0;
        }
        spec = match jump {
            Some(s) => {
                let (lj, tj) = em(&s);
                iterations += 1;
                // keep the jump only if it is at least as good as plain EM
                if lj >= l1 {
                    tj
                } else {
                    t2
                }
            }
            None => t2,
        };
    }
    if !converged {
        let mut last = spec.omega.clone();
        last.push(spec.beta);
        return Err(Error::NonConvergence {
            what: "gsm EM".into(),
            iterations,
            last,
        });
    }
    let total: f64 = spec.omega.iter().sum();
    spec.omega.iter_mut().for_each(|w| *w /= total);
    let ll = *trace.last().expect("at least one E-step");
    let (measures, _) = GofBlock::individual(data, k + 1, ll, |x| spec.cdf(x, false, true))?;
    Ok(GsmFit {
        beta: spec.beta,
        omega: spec.omega,
        measures,
        iterations,
        loglik_trace: trace,
    })
}

fn flat(s: &GsmSpec) -> Vec<f64> {
    let mut v = s.omega.clone();
    v.push(s.beta);
    v
}

fn unflat(v: &[f64]) -> Option<GsmSpec> {
    let (omega, beta) = v.split_at(v.len() - 1);
    let beta = beta[0];
    if !(beta > 0.0) || omega.iter().any(|w| !(*w >= 0.0)) {
        return None;
    }
    // long extrapolations amplify rounding in Σω; renormalize so ℓ is honest
    let total: f64 = omega.iter().sum();
    Some(GsmSpec {
        omega: omega.iter().map(|w| w / total).collect(),
        beta,
    })
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// One E-step: fills the responsibility totals per shape and returns the
/// responsibility-weighted shape total together with ℓ at `spec`.
///
/// `e^{-βx}` is common to every component, so responsibilities only need
/// `ωⱼ (βx)^{j-1} / (j-1)!`; the log-space route is kept for the case where
/// those powers would leave the floating-point range.
fn e_step(spec: &GsmSpec, data: &[f64], xmin: f64, xmax: f64, wsum: &mut [f64]) -> (f64, f64) {
    let k = spec.k();
    let beta = spec.beta;
    let reach = (k - 1) as f64 * (beta * xmax).ln().max((beta * xmin).ln().abs());
    wsum.iter_mut().for_each(|w| *w = 0.0);
    let mut shape_total = 0.0;
    let mut ll = 0.0;
    let lb = beta.ln();
    if reach < 600.0 && k <= 150 {
        // ωⱼ / (j-1)!
        let mut q = Vec::with_capacity(k);
        let mut fact = 1.0;
        for (j, w) in spec.omega.iter().enumerate() {
            if j > 0 {
                fact *= j as f64;
            }
            q.push(w / fact);
        }
        let mut t = vec![0.0; k];
        for &x in data {
            let y = beta * x;
            let mut pw = 1.0;
            let mut z = 0.0;
            for (tj, qj) in t.iter_mut().zip(&q) {
                *tj = qj * pw;
                z += *tj;
                pw *= y;
            }
            ll += lb - y + z.ln();
            for (j, tj) in t.iter().enumerate() {
                let r = tj / z;
                wsum[j] += r;
                shape_total += r * (j + 1) as f64;
            }
        }
    } else {
        let mut t = vec![0.0; k];
        for &x in data {
            let m = spec.ln_terms(x).fold(f64::NEG_INFINITY, f64::max);
            let mut z = 0.0;
            for (tj, l) in t.iter_mut().zip(spec.ln_terms(x)) {
                *tj = (l - m).exp();
                z += *tj;
            }
            ll += m + z.ln();
            for (j, tj) in t.iter().enumerate() {
                let r = tj / z;
                wsum[j] += r;
                shape_total += r * (j + 1) as f64;
            }
        }
    }
    (shape_total, ll)
}
