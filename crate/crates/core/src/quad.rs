//! Adaptive Gauss–Kronrod quadrature and fixed Gauss–Legendre rules.

#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        resk += WGK[j] * s;
        if j % 2 == 1 {
            resg += WG[j / 2] * s;
        }
    }
    (resk * h, ((resk - resg) * h).abs())
}

/// Adaptive G7/K15 quadrature on a finite interval with absolute tolerance.
/// Non-finite integrand values are treated as 0.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> Integral {
    if a == b {
        return Integral { value: 0.0, error: 0.0 };
    }
    if b < a {
        let r = integrate(f, b, a, abs_tol);
        return Integral { value: -r.value, error: r.error };
    }
    let g = |x: f64| {
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let (v0, e0) = gk15(&g, a, b);
    let mut segs: Vec<(f64, f64, f64, f64)> = vec![(a, b, v0, e0)];
    let mut err = e0;
    let mut evals = 0usize;
    while err > abs_tol && evals < 4000 {
        // split the worst segment
        let (idx, _) = segs
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, s)| if s.3 > acc.1 { (i, s.3) } else { acc });
        let (sa, sb, sv, se) = segs.swap_remove(idx);
        let m = 0.5 * (sa + sb);
        if m <= sa || m >= sb {
            segs.push((sa, sb, sv, 0.0));
            err -= se;
            continue;
        }
        let (lv, le) = gk15(&g, sa, m);
        let (rv, re) = gk15(&g, m, sb);
        err += le + re - se;
        segs.push((sa, m, lv, le));
        segs.push((m, sb, rv, re));
        evals += 1;
    }
    // resum to shed accumulated drift
    let value = segs.iter().map(|s| s.2).sum();
    let error = segs.iter().map(|s| s.3).sum();
    Integral { value, error }
}

/// Integral over `[a, ∞)` via the map `x = a + t/(1-t)`.
pub fn integrate_upper<F: Fn(f64) -> f64>(f: F, a: f64, abs_tol: f64) -> Integral {
    integrate(
        |t: f64| {
            let s = 1.0 - t;
            f(a + t / s) / (s * s)
        },
        0.0,
        1.0,
        abs_tol,
    )
}

/// Integral over the whole real line, split at `center`.
pub fn integrate_real_line<F: Fn(f64) -> f64>(f: F, center: f64, abs_tol: f64) -> Integral {
    let r = integrate_upper(&f, center, 0.5 * abs_tol);
    let l = integrate_upper(|x| f(2.0 * center - x), center, 0.5 * abs_tol);
    Integral {
        value: r.value + l.value,
        error: r.error + l.error,
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
            }
            pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_and_gaussian() {
        let r = integrate(|x| x * x, 0.0, 3.0, 1e-12);
        assert_relative_eq!(r.value, 9.0, max_relative = 1e-13);
        let g = integrate_real_line(|x| (-0.5 * x * x).exp(), 0.0, 1e-12);
        assert_relative_eq!(g.value, (2.0 * std::f64::consts::PI).sqrt(), max_relative = 1e-10);
        let e = integrate_upper(|x| (-x).exp(), 0.0, 1e-12);
        assert_relative_eq!(e.value, 1.0, max_relative = 1e-10);
    }

    #[test]
    fn legendre_rule_exact_for_degree_2n_minus_1() {
        let (x, w) = gauss_legendre(5);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(8)).sum();
        assert_relative_eq!(s, 2.0 / 9.0, max_relative = 1e-13);
        assert_relative_eq!(w.iter().sum::<f64>(), 2.0, max_relative = 1e-14);
    }
}
