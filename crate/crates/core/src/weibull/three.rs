//! Three-parameter estimators. All take sorted data and a feasible start.

use super::two::{ml_scale, shape_weight};
use super::{loglik, mean_var, Estimate, WeibullMethod};
use crate::error::{Error, Result};
use crate::mle::weibull2;
use crate::optim::{bfgs, numeric_gradient, NelderMead, OptimResult};
use crate::roots;
use crate::special::ln_gamma;

const MAX_ITER: usize = 2000;

pub(super) fn fit(x: &[f64], method: WeibullMethod, start: [f64; 3]) -> Result<Estimate> {
    match method {
        WeibullMethod::Mle => mle(x, start),
        WeibullMethod::Wml => {
            let e = mle(x, start)?;
            let [a, _, mu] = e.params;
            let a = a * shape_weight(x.len());
            Ok(Estimate {
                params: [a, ml_scale(x, mu, a), mu],
                ..e
            })
        }
        WeibullMethod::Mps => mps(x, start),
        WeibullMethod::Mm1 | WeibullMethod::Mm2 | WeibullMethod::Mm3 => modified_moments(x, method),
        WeibullMethod::Mml1 | WeibullMethod::Mml2 | WeibullMethod::Mml3 | WeibullMethod::Mml4 => {
            modified_ml(x, method)
        }
        WeibullMethod::Tlm => tl_moments(x),
        _ => unreachable!("two-parameter method routed to three-parameter fit"),
    }
}

// free coordinates (ln α, ln β, ln(x₍₁₎ - μ))
fn to_free(x1: f64, p: [f64; 3]) -> [f64; 3] {
    [p[0].ln(), p[1].ln(), (x1 - p[2]).ln()]
}

fn from_free(x1: f64, u: &[f64]) -> [f64; 3] {
    [u[0].exp(), u[1].exp(), x1 - u[2].exp()]
}

fn finish(x1: f64, r: OptimResult, what: &str) -> Result<Estimate> {
    let params = from_free(x1, &r.x);
    if !r.converged || !r.value.is_finite() {
        return Err(Error::NonConvergence {
            what: what.into(),
            iterations: r.iterations,
            last: params.to_vec(),
        });
    }
    Ok(Estimate {
        params,
        converged: true,
        iterations: r.iterations,
    })
}

// -ℓ/n and its gradient in free coordinates
fn neg_loglik(x: &[f64], u: &[f64]) -> (f64, [f64; 3]) {
    let x1 = x[0];
    let [a, b, mu] = from_free(x1, u);
    let n = x.len() as f64;
    let (mut sl, mut st, mut stl, mut sinv, mut stz) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &xi in x {
        let z = xi - mu;
        let l = (z / b).ln();
        let t = (a * l).exp();
        sl += l;
        st += t;
        stl += t * l;
        sinv += 1.0 / z;
        stz += t / z;
    }
    // ℓ = n ln α - n ln β + (α-1) Σ ln(z/β) - Σ (z/β)^α
    let ll = n * a.ln() - n * b.ln() + (a - 1.0) * sl - st;
    let d_a = n / a + sl - stl;
    let d_b = a / b * (st - n);
    let d_mu = -(a - 1.0) * sinv + a * stz;
    let grad = [-a * d_a / n, -b * d_b / n, (x1 - mu) * d_mu / n];
    if ll.is_finite() {
        (-ll / n, grad)
    } else {
        (f64::INFINITY, [0.0; 3])
    }
}

fn mle(x: &[f64], start: [f64; 3]) -> Result<Estimate> {
    let x1 = x[0];
    let f = |u: &[f64]| neg_loglik(x, u).0;
    let g = |u: &[f64]| neg_loglik(x, u).1.to_vec();
    let u0 = to_free(x1, start);
    let r = bfgs(&f, g, &u0, MAX_ITER, 1e-10);
    let nm = simplex().minimize(&f, &r.x);
    let best = if nm.value <= r.value {
        OptimResult {
            converged: nm.converged || r.converged,
            iterations: r.iterations + nm.iterations,
            ..nm
        }
    } else {
        r
    };
    finish(x1, best, "weibull mle")
}

fn simplex() -> NelderMead {
    NelderMead {
        step: 0.1,
        max_iter: MAX_ITER,
        ftol: 1e-10,
        xtol: 1e-8,
        restarts: 2,
    }
}

/// Mean log-spacing `Σ ln[F(x₍ᵢ₎) - F(x₍ᵢ₋₁₎)] / (n+1)` with `F(x₍₀₎) = 0`
/// and `F(x₍ₙ₊₁₎) = 1`. A zero spacing from tied observations is replaced by
/// the density at the tie. `x` must be sorted.
pub fn mps_objective(x: &[f64], alpha: f64, beta: f64, mu: f64) -> f64 {
    if !(alpha > 0.0 && beta > 0.0) || mu >= x[0] {
        return f64::NEG_INFINITY;
    }
    let n = x.len();
    let h = |v: f64| ((v - mu) / beta).powf(alpha);
    // F(x₍₁₎), accurate for small arguments
    let mut s = (-(-h(x[0])).exp_m1()).ln();
    for i in 1..n {
        let (lo, hi) = (x[i - 1], x[i]);
        let hl = h(lo);
        s += if hi == lo {
            let z = (hi - mu) / beta;
            (alpha / beta * z.powf(alpha - 1.0)).ln() - hl
        } else {
            // S(lo)·(1 - exp(-Δ)), Δ = H(hi) - H(lo) built from the exact gap
            let delta = hl * (alpha * ((hi - lo) / (lo - mu)).ln_1p()).exp_m1();
            -hl + (-(-delta).exp_m1()).ln()
        };
    }
    s -= h(x[n - 1]);
    s / (n + 1) as f64
}

fn mps(x: &[f64], start: [f64; 3]) -> Result<Estimate> {
    let x1 = x[0];
    let f = |u: &[f64]| {
        let [a, b, mu] = from_free(x1, u);
        let v = -mps_objective(x, a, b, mu);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let r = simplex().minimize(&f, &to_free(x1, start));
    if !r.converged {
        return finish(x1, r, "weibull mps");
    }
    // the simplex stalls short of the optimum on flat ridges
    let p = bfgs(&f, |u| numeric_gradient(&f, u), &r.x, 200, 0.0);
    let best = if p.value.is_finite() && p.value <= r.value {
        OptimResult { iterations: r.iterations + p.iterations, converged: true, ..p }
    } else {
        r
    };
    finish(x1, best, "weibull mps")
}

fn g1g2(a: f64) -> (f64, f64) {
    (ln_gamma(1.0 + 1.0 / a).exp(), ln_gamma(1.0 + 2.0 / a).exp())
}

/// Roots of `f` over `[lo, hi]` located by a uniform scan then refined.
fn scan_roots<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    let h = (hi - lo) / steps as f64;
    let mut out = Vec::new();
    let mut prev = (lo, f(lo));
    for i in 1..=steps {
        let t = lo + i as f64 * h;
        let ft = f(t);
        if prev.1.is_finite() && ft.is_finite() && prev.1.signum() != ft.signum() {
            if let Ok(r) = roots::brent(&f, prev.0, t, 1e-12) {
                out.push(r);
            }
        }
        prev = (t, ft);
    }
    out
}

/// Pick the root with the largest likelihood.
fn best_by_likelihood(x: &[f64], cands: Vec<[f64; 3]>, what: &str) -> Result<Estimate> {
    cands
        .into_iter()
        .filter(|p| p[0] > 0.0 && p[1] > 0.0 && p[2] < x[0])
        .map(|p| (loglik(x, p[0], p[1], p[2]), p))
        .filter(|(l, _)| !l.is_nan())
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, p)| Estimate {
            params: p,
            converged: true,
            iterations: 0,
        })
        .ok_or_else(|| Error::Domain(format!("{what}: the estimating equations have no admissible root")))
}

/// Mean and variance equations plus one equation tying the location to the
/// lower tail: `E[X₍₁₎] = x₍₁₎` (mm1), `F(x₍₁₎) = 1/(n+1)` (mm2) or
/// `x₍₁₎` = median of the first order statistic, `F(x₍₁₎) = 1 - 2^(-1/n)` (mm3).
fn modified_moments(x: &[f64], method: WeibullMethod) -> Result<Estimate> {
    let n = x.len() as f64;
    let (m, v) = mean_var(x);
    let s = v.sqrt();
    let (anchor, c): (f64, Box<dyn Fn(f64) -> f64>) = match method {
        WeibullMethod::Mm1 => (x[0], Box::new(move |a: f64| n.powf(-1.0 / a) * g1g2(a).0)),
        WeibullMethod::Mm2 => (x[0], Box::new(move |a: f64| ((n + 1.0) / n).ln().powf(1.0 / a))),
        _ => (x[0], Box::new(move |a: f64| (std::f64::consts::LN_2 / n).powf(1.0 / a))),
    };
    let target = (m - anchor) / s;
    let g = |la: f64| {
        let a = la.exp();
        let (g1, g2) = g1g2(a);
        (g1 - c(a)) / (g2 - g1 * g1).sqrt() - target
    };
    let cands = scan_roots(g, (0.05f64).ln(), (60f64).ln(), 200)
        .into_iter()
        .map(|la| {
            let a = la.exp();
            let (g1, g2) = g1g2(a);
            let b = s / (g2 - g1 * g1).sqrt();
            [a, b, m - b * g1]
        })
        .collect();
    best_by_likelihood(x, cands, method.code())
}

/// Likelihood equations for (α, β) given μ, with the μ equation replaced by
/// `E[X₍₁₎] = x₍₁₎` (mml1), `F(x₍₁₎) = 1/(n+1)` (mml2), `E[X] = x̄` (mml3) or
/// `Var[X] = s²` (mml4).
fn modified_ml(x: &[f64], method: WeibullMethod) -> Result<Estimate> {
    let n = x.len();
    let nf = n as f64;
    let x1 = x[0];
    let (m, v) = mean_var(x);
    let range = x[n - 1] - x1;
    let ones = vec![1.0; n];
    let profile = |t: f64| -> Option<[f64; 3]> {
        let mu = x1 - t.exp();
        let z: Vec<f64> = x.iter().map(|xi| xi - mu).collect();
        weibull2(&z, &ones).ok().map(|(a, b)| [a, b, mu])
    };
    let h = |t: f64| -> f64 {
        let Some([a, b, mu]) = profile(t) else {
            return f64::NAN;
        };
        let (g1, g2) = g1g2(a);
        match method {
            WeibullMethod::Mml1 => (mu + b * g1 * nf.powf(-1.0 / a) - x1) / range,
            WeibullMethod::Mml2 => (mu + b * ((nf + 1.0) / nf).ln().powf(1.0 / a) - x1) / range,
            WeibullMethod::Mml3 => (mu + b * g1 - m) / range,
            _ => (b * b * (g2 - g1 * g1)).sqrt() / v.sqrt() - 1.0,
        }
    };
    let lo = (range * 1e-7).ln();
    let hi = (range * 1e3).ln();
    let cands = scan_roots(h, lo, hi, 160).into_iter().filter_map(profile).collect();
    best_by_likelihood(x, cands, method.code())
}

fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Sample TL-moments with symmetric trimming `t`, orders 1..=3.
pub(crate) fn sample_tl(x: &[f64], t: usize) -> [f64; 3] {
    let n = x.len();
    let mut out = [0.0; 3];
    for (r_idx, o) in out.iter_mut().enumerate() {
        let r = r_idx + 1;
        let denom = binom(n, r + 2 * t);
        let mut s = 0.0;
        for i in (t + 1)..=(n - t) {
            let mut w = 0.0;
            for k in 0..r {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                let hi_idx = r + t - 1 - k;
                w += sign * binom(r - 1, k) * binom(i - 1, hi_idx) * binom(n - i, t + k);
            }
            s += w * x[i - 1];
        }
        *o = s / (r as f64 * denom);
    }
    out
}

/// `E[W₍ⱼ:ₘ₎]` for the unit-scale Weibull with shape `a`.
fn weibull_order_mean(a: f64, j: usize, m: usize) -> f64 {
    let g = ln_gamma(1.0 + 1.0 / a).exp();
    let c = m as f64 * binom(m - 1, j - 1);
    let s: f64 = (0..j)
        .map(|l| {
            let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
            sign * binom(j - 1, l) / ((m - j + l + 1) as f64).powf(1.0 + 1.0 / a)
        })
        .sum();
    c * g * s
}

/// Population TL(1) moments of the unit-scale Weibull.
pub(crate) fn weibull_tl1(a: f64) -> [f64; 3] {
    let e = |j, m| weibull_order_mean(a, j, m);
    [
        e(2, 3),
        0.5 * (e(3, 4) - e(2, 4)),
        (e(4, 5) - 2.0 * e(3, 5) + e(2, 5)) / 3.0,
    ]
}

fn tl_moments(x: &[f64]) -> Result<Estimate> {
    let [l1, l2, l3] = sample_tl(x, 1);
    if !(l2 > 0.0) {
        return Err(Error::DegenerateSample("second TL-moment is not positive".into()));
    }
    let target = l3 / l2;
    let g = |la: f64| {
        let p = weibull_tl1(la.exp());
        p[2] / p[1] - target
    };
    let cands = scan_roots(g, (0.1f64).ln(), (60f64).ln(), 200)
        .into_iter()
        .map(|la| {
            let a = la.exp();
            let p = weibull_tl1(a);
            let b = l2 / p[1];
            [a, b, l1 - b * p[0]]
        })
        .collect();
    best_by_likelihood(x, cands, "tlm")
}
