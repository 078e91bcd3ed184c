//! Unconstrained minimizers used by the fitting routines.
//!
//! Callers map constrained parameters (positive scales, locations bounded by
//! the data) onto an unconstrained space before calling in here. Infeasible
//! points should evaluate to `+inf`; every method treats that as a rejected
//! step.

use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::rng::RngStream;

#[derive(Debug, Clone)]
pub struct OptimResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Optimizer codes accepted by the grouped fitting routines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Optimizer {
    #[serde(rename = "BFGS")]
    Bfgs,
    #[serde(rename = "CG")]
    ConjugateGradient,
    /// Quasi-Newton in the transformed (already bounded) parameter space.
    #[serde(rename = "L-BFGS-B")]
    BoundedBfgs,
    #[default]
    #[serde(rename = "Nelder-Mead")]
    NelderMead,
    #[serde(rename = "SANN")]
    Annealing,
}

impl FromStr for Optimizer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "BFGS" | "bfgs" => Ok(Optimizer::Bfgs),
            "CG" | "cg" => Ok(Optimizer::ConjugateGradient),
            "L-BFGS-B" | "l-bfgs-b" => Ok(Optimizer::BoundedBfgs),
            // "Nelder-Mean" is how the option is spelled in some published usage
            "Nelder-Mead" | "nelder-mead" | "Nelder-Mean" => Ok(Optimizer::NelderMead),
            "SANN" | "sann" => Ok(Optimizer::Annealing),
            _ => Err(Error::Unknown {
                kind: "optimizer",
                name: s.to_string(),
            }),
        }
    }
}

impl Optimizer {
    /// Minimize `f` from `x0` with this method.
    pub fn minimize<F: Fn(&[f64]) -> f64>(&self, f: F, x0: &[f64]) -> OptimResult {
        match self {
            Optimizer::NelderMead => NelderMead::default().minimize(&f, x0),
            Optimizer::Bfgs | Optimizer::BoundedBfgs => {
                let r = bfgs(&f, |x: &[f64]| numeric_gradient(&f, x), x0, 2000, 1e-10);
                polish(&f, r)
            }
            Optimizer::ConjugateGradient => {
                let r = conjugate_gradient(&f, x0, 5000, 1e-10);
                polish(&f, r)
            }
            Optimizer::Annealing => {
                let mut rng = RngStream::new(0x5A77);
                let r = anneal(&f, x0, 10_000, &mut rng);
                let nm = NelderMead::default().minimize(&f, &r.x);
                OptimResult {
                    iterations: r.iterations + nm.iterations,
                    ..nm
                }
            }
        }
    }
}

// Gradient methods can stall on flat or kinked objectives; finish with a
// simplex pass from wherever they stopped.
fn polish<F: Fn(&[f64]) -> f64>(f: &F, r: OptimResult) -> OptimResult {
    let nm = NelderMead::default().minimize(f, &r.x);
    if nm.value <= r.value {
        OptimResult {
            iterations: r.iterations + nm.iterations,
            ..nm
        }
    } else {
        r
    }
}

/// Nelder–Mead simplex with absolute initial steps.
#[derive(Debug, Clone)]
pub struct NelderMead {
    pub step: f64,
    pub max_iter: usize,
    pub ftol: f64,
    pub xtol: f64,
    pub restarts: usize,
}

impl Default for NelderMead {
    fn default() -> Self {
        NelderMead {
            step: 0.1,
            max_iter: 2000,
            ftol: 1e-12,
            xtol: 1e-9,
            restarts: 2,
        }
    }
}

impl NelderMead {
    pub fn minimize<F: Fn(&[f64]) -> f64>(&self, f: &F, x0: &[f64]) -> OptimResult {
        let mut best = self.run(f, x0, self.step);
        let mut total = best.iterations;
        // Restarting from the optimum guards against premature collapse.
        for _ in 0..self.restarts {
            let next = self.run(f, &best.x, self.step * 0.1);
            total += next.iterations;
            let improved = next.value < best.value - self.ftol * (best.value.abs() + 1e-12);
            if next.value <= best.value {
                best = next;
            }
            if !improved {
                break;
            }
        }
        best.iterations = total;
        best
    }

    fn run<F: Fn(&[f64]) -> f64>(&self, f: &F, x0: &[f64], step: f64) -> OptimResult {
        let n = x0.len();
        let eval = |x: &[f64]| {
            let v = f(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };
        let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        pts.push(x0.to_vec());
        for i in 0..n {
            let mut p = x0.to_vec();
            p[i] += step;
            if !eval(&p).is_finite() {
                p[i] = x0[i] - step;
            }
            pts.push(p);
        }
        let mut vals: Vec<f64> = pts.iter().map(|p| eval(p)).collect();
        let mut it = 0;
        let mut converged = false;
        while it < self.max_iter {
            it += 1;
            let mut order: Vec<usize> = (0..=n).collect();
            order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
            pts = order.iter().map(|&i| pts[i].clone()).collect();
            vals = order.iter().map(|&i| vals[i]).collect();

            let spread = (vals[n] - vals[0]).abs();
            let size = pts[1..]
                .iter()
                .flat_map(|p| p.iter().zip(&pts[0]).map(|(a, b)| (a - b).abs()))
                .fold(0.0, f64::max);
            if vals[0].is_finite()
                && spread <= self.ftol * (vals[0].abs() + 1e-12)
                && size <= self.xtol * (1.0 + pts[0].iter().fold(0.0f64, |m, v| m.max(v.abs())))
            {
                converged = true;
                break;
            }

            let mut centroid = vec![0.0; n];
            for p in &pts[..n] {
                for (c, v) in centroid.iter_mut().zip(p) {
                    *c += v / n as f64;
                }
            }
            let lerp = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&pts[n])
                    .map(|(c, w)| c + t * (c - w))
                    .collect()
            };
            let xr = lerp(1.0);
            let fr = eval(&xr);
            if fr < vals[0] {
                let xe = lerp(2.0);
                let fe = eval(&xe);
                if fe < fr {
                    pts[n] = xe;
                    vals[n] = fe;
                } else {
                    pts[n] = xr;
                    vals[n] = fr;
                }
            } else if fr < vals[n - 1] {
                pts[n] = xr;
                vals[n] = fr;
            } else {
                let (xc, fc) = if fr < vals[n] {
                    let xc = lerp(0.5);
                    let fc = eval(&xc);
                    (xc, fc)
                } else {
                    let xc = lerp(-0.5);
                    let fc = eval(&xc);
                    (xc, fc)
                };
                if fc < vals[n].min(fr) {
                    pts[n] = xc;
                    vals[n] = fc;
                } else {
                    for i in 1..=n {
                        let shrunk: Vec<f64> = pts[i]
                            .iter()
                            .zip(&pts[0])
                            .map(|(p, b)| b + 0.5 * (p - b))
                            .collect();
                        vals[i] = eval(&shrunk);
                        pts[i] = shrunk;
                    }
                }
            }
        }
        let (bi, _) = vals
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
        OptimResult {
            x: pts[bi].clone(),
            value: vals[bi],
            iterations: it,
            converged,
        }
    }
}

/// Central-difference gradient.
pub fn numeric_gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; x.len()];
    let mut xp = x.to_vec();
    for i in 0..x.len() {
        let h = 1e-6 * (1.0 + x[i].abs());
        xp[i] = x[i] + h;
        let fp = f(&xp);
        xp[i] = x[i] - h;
        let fm = f(&xp);
        xp[i] = x[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
    g
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

// Backtracking line search with the Armijo condition.
fn line_search<F: Fn(&[f64]) -> f64>(
    f: &F,
    x: &[f64],
    fx: f64,
    g: &[f64],
    dir: &[f64],
) -> Option<(Vec<f64>, f64)> {
    let slope = dot(g, dir);
    if slope >= 0.0 {
        return None;
    }
    let mut t = 1.0;
    for _ in 0..60 {
        let xn: Vec<f64> = x.iter().zip(dir).map(|(a, d)| a + t * d).collect();
        let fxn = f(&xn);
        if fxn.is_finite() && fxn <= fx + 1e-4 * t * slope {
            return Some((xn, fxn));
        }
        t *= 0.5;
    }
    None
}

/// BFGS with a user-supplied gradient.
pub fn bfgs<F, G>(f: &F, grad: G, x0: &[f64], max_iter: usize, ftol: f64) -> OptimResult
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    let mut g = grad(&x);
    let mut h = vec![vec![0.0; n]; n];
    for (i, row) in h.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let mut converged = false;
    let mut it = 0;
    while it < max_iter {
        it += 1;
        let dir: Vec<f64> = (0..n).map(|i| -dot(&h[i], &g)).collect();
        let step = line_search(f, &x, fx, &g, &dir).or_else(|| {
            // reset curvature and retry along steepest descent
            for (i, row) in h.iter_mut().enumerate() {
                row.iter_mut().for_each(|v| *v = 0.0);
                row[i] = 1.0;
            }
            let sd: Vec<f64> = g.iter().map(|v| -v).collect();
            line_search(f, &x, fx, &g, &sd)
        });
        let Some((xn, fxn)) = step else {
            converged = g.iter().all(|v| v.abs() < 1e-6);
            break;
        };
        let gn = grad(&xn);
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let df = (fx - fxn).abs();
        let xmax = s.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        x = xn;
        g = gn;
        let fprev = fx;
        fx = fxn;
        if df <= ftol * (fprev.abs() + 1e-12) || xmax < 1e-12 {
            converged = true;
            break;
        }
        let sy = dot(&s, &y);
        if sy > 1e-14 {
            let hy: Vec<f64> = (0..n).map(|i| dot(&h[i], &y)).collect();
            let yhy = dot(&y, &hy);
            let rho = 1.0 / sy;
            for i in 0..n {
                for j in 0..n {
                    h[i][j] += (1.0 + yhy * rho) * rho * s[i] * s[j]
                        - rho * (hy[i] * s[j] + s[i] * hy[j]);
                }
            }
        }
    }
    OptimResult {
        x,
        value: fx,
        iterations: it,
        converged,
    }
}

/// Polak–Ribière conjugate gradient with numeric gradients.
pub fn conjugate_gradient<F: Fn(&[f64]) -> f64>(
    f: &F,
    x0: &[f64],
    max_iter: usize,
    ftol: f64,
) -> OptimResult {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    let mut g = numeric_gradient(f, &x);
    let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
    let mut converged = false;
    let mut it = 0;
    while it < max_iter {
        it += 1;
        let Some((xn, fxn)) = line_search(f, &x, fx, &g, &d).or_else(|| {
            d = g.iter().map(|v| -v).collect();
            line_search(f, &x, fx, &g, &d)
        }) else {
            break;
        };
        let gn = numeric_gradient(f, &xn);
        let beta = (dot(&gn, &gn) - dot(&gn, &g)) / dot(&g, &g).max(1e-300);
        let beta = if it % n.max(1) == 0 { 0.0 } else { beta.max(0.0) };
        d = gn.iter().zip(&d).map(|(gi, di)| -gi + beta * di).collect();
        let df = (fx - fxn).abs();
        let fprev = fx;
        x = xn;
        fx = fxn;
        g = gn;
        if df <= ftol * (fprev.abs() + 1e-12) {
            converged = true;
            break;
        }
    }
    OptimResult {
        x,
        value: fx,
        iterations: it,
        converged,
    }
}

/// Simulated annealing with Gaussian moves and logarithmic cooling.
pub fn anneal<F: Fn(&[f64]) -> f64>(
    f: &F,
    x0: &[f64],
    iterations: usize,
    rng: &mut RngStream,
) -> OptimResult {
    let t0: f64 = 10.0;
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    let mut best = x.clone();
    let mut fbest = fx;
    for k in 0..iterations {
        let temp = t0 / ((k / 10) as f64 * 10.0 + std::f64::consts::E).ln();
        let scale = 0.1 * temp / t0;
        let cand: Vec<f64> = x.iter().map(|v| v + scale * rng.standard_normal()).collect();
        let fc = f(&cand);
        if !fc.is_finite() {
            continue;
        }
        let accept = fc <= fx || rng.inner().random::<f64>() < ((fx - fc) / temp).exp();
        if accept {
            x = cand;
            fx = fc;
            if fx < fbest {
                fbest = fx;
                best = x.clone();
            }
        }
    }
    OptimResult {
        x: best,
        value: fbest,
        iterations,
        converged: true,
    }
}
