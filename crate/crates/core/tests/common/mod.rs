#![allow(dead_code)]

//! Test-only oracles, independent of the crate's own numerics.

use difit_core::mixture::MixtureSpec;
use difit_core::{Dist, Family};

/// Tanh-sinh quadrature on [a, b] (finite), halving the step until two
/// successive levels agree to `tol`.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let half = 0.5 * (b - a);
    let pi2 = std::f64::consts::FRAC_PI_2;
    // node offset from the nearer endpoint, computed without cancellation
    let eval = |t: f64| -> f64 {
        let s = pi2 * t.sinh();
        let w = pi2 * t.cosh() / s.cosh().powi(2);
        let gap = (-s.abs()).exp() / s.cosh(); // 1 - |tanh s|
        if gap == 0.0 {
            return 0.0;
        }
        let x = if s >= 0.0 { b - half * gap } else { a + half * gap };
        if x <= a || x >= b {
            return 0.0;
        }
        let v = f(x);
        if v.is_finite() {
            w * v
        } else {
            0.0
        }
    };
    let tmax = 4.0;
    let mut h = 0.5;
    let mut sum = eval(0.0);
    let mut k = 1;
    while k as f64 * h <= tmax {
        sum += eval(k as f64 * h) + eval(-(k as f64) * h);
        k += 1;
    }
    let mut prev = sum * h * half;
    for _ in 0..10 {
        h *= 0.5;
        let mut k = 1;
        while k as f64 * h <= tmax {
            sum += eval(k as f64 * h) + eval(-(k as f64) * h);
            k += 2;
        }
        let est = sum * h * half;
        if (est - prev).abs() <= tol {
            return est;
        }
        prev = est;
    }
    prev
}

/// ∫_a^∞ f via x = a + t/(1 - t).
pub fn tanh_sinh_upper<F: Fn(f64) -> f64>(f: F, a: f64, tol: f64) -> f64 {
    tanh_sinh(
        |t| {
            let u = 1.0 - t;
            f(a + t / u) / (u * u)
        },
        0.0,
        1.0,
        tol,
    )
}

/// ∫ f over the real line, split at `c`.
pub fn tanh_sinh_line<F: Fn(f64) -> f64>(f: F, c: f64, tol: f64) -> f64 {
    tanh_sinh_upper(&f, c, tol) + tanh_sinh_upper(|y| f(2.0 * c - y), c, tol)
}

/// Kolmogorov-Smirnov distance of a sample against a CDF.
pub fn ks(x: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = x.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &v)| {
            let u = cdf(v);
            ((i + 1) as f64 / n - u).max(u - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

/// Path to the tree table used by the golden checks.
pub fn dbh_path() -> std::path::PathBuf {
    match std::env::var_os("DIFIT_DBH_CSV") {
        Some(p) => p.into(),
        None => std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/DBH.csv"),
    }
}

/// Parameters inside a family's domain, spread over typical shapes by `u ∈ [0,1]⁴`.
pub fn family_params(fam: Family, u: [f64; 4], loc: bool) -> Vec<f64> {
    let r = |i: usize, lo: f64, hi: f64| lo + (hi - lo) * u[i];
    let mut p = match fam {
        Family::BirnbaumSaunders => vec![r(0, 0.2, 2.0), r(1, 0.5, 5.0)],
        Family::BurrXii => vec![r(0, 0.5, 4.0), r(1, 0.5, 4.0)],
        Family::Chen => vec![r(0, 0.3, 2.0), r(1, 0.05, 2.0)],
        Family::Fisher => vec![r(0, 1.0, 20.0), r(1, 1.0, 30.0)],
        Family::Frechet => vec![r(0, 0.8, 5.0), r(1, 0.5, 5.0)],
        Family::Gamma => vec![r(0, 0.5, 6.0), r(1, 0.5, 4.0)],
        Family::Ge => vec![r(0, 0.5, 5.0), r(1, 0.2, 3.0)],
        Family::Gompertz => vec![r(0, 0.05, 1.0), r(1, 0.05, 2.0)],
        Family::Jsb => vec![r(0, 0.3, 3.0), r(1, -2.0, 2.0), r(2, 1.0, 20.0), r(3, -5.0, 5.0)],
        Family::LogLogistic => vec![r(0, 0.8, 6.0), r(1, 0.5, 5.0)],
        Family::LogNormal => vec![r(0, -1.0, 3.0), r(1, 0.2, 1.5)],
        Family::Lomax => vec![r(0, 0.2, 3.0), r(1, 0.5, 5.0)],
        Family::SkewNormal => vec![r(0, -5.0, 5.0), r(1, 0.3, 4.0), r(2, -5.0, 5.0)],
        Family::Weibull => vec![r(0, 0.6, 5.0), r(1, 0.5, 5.0)],
    };
    if loc && fam.has_location() {
        p.push(r(3, -2.0, 2.0));
    }
    p
}

/// Integral of a density over its support, split at the median.
pub fn dist_mass(d: &Dist) -> f64 {
    let m = d.quantile(0.5).unwrap();
    let f = |x: f64| d.pdf(x);
    let left = if d.lower().is_finite() {
        tanh_sinh(f, d.lower(), m, 1e-11)
    } else {
        tanh_sinh_upper(|y| f(2.0 * m - y), m, 1e-11)
    };
    let right = if d.upper().is_finite() {
        tanh_sinh(f, m, d.upper(), 1e-11)
    } else {
        tanh_sinh_upper(f, m, 1e-11)
    };
    left + right
}

/// Integral of the mixture density over its support, split at component
/// quantiles so each piece is smooth and unimodal-ish.
pub fn mixture_mass(m: &MixtureSpec) -> f64 {
    let mut cuts: Vec<f64> = m
        .components()
        .iter()
        .flat_map(|d| [0.01, 0.5, 0.99].map(|p| d.quantile(p).unwrap()))
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let f = |x: f64| m.pdf(x);
    let lower = m.components().iter().map(|d| d.lower()).fold(f64::INFINITY, f64::min);
    let first = cuts[0];
    let mut total = if lower.is_finite() {
        tanh_sinh(f, lower, first, 1e-12)
    } else {
        tanh_sinh_upper(|y| f(2.0 * first - y), first, 1e-12)
    };
    for w in cuts.windows(2) {
        total += tanh_sinh(f, w[0], w[1], 1e-12);
    }
    total + tanh_sinh_upper(f, *cuts.last().unwrap(), 1e-12)
}
