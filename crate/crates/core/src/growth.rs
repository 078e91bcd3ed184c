//! Height-diameter curves `H = 1.3 + h(D; β₁, β₂, β₃)` fitted by nonlinear
//! least squares.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::t_two_sided_p;

/// Breast height in metres.
pub const BREAST_HEIGHT: f64 = 1.3;

const MAX_ITER: usize = 500;
const PARAM_NAMES: [&str; 3] = ["beta1", "beta2", "beta3"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GrowthModel {
    ChapmanRichards,
    Gompertz,
    #[serde(rename = "hossfeldiv")]
    HossfeldIv,
    Korf,
    Logistic,
    Prodan,
    Ratkowsky,
    Sibbesen,
    Weibull,
}

impl GrowthModel {
    pub const ALL: [GrowthModel; 9] = [
        Self::ChapmanRichards,
        Self::Gompertz,
        Self::HossfeldIv,
        Self::Korf,
        Self::Logistic,
        Self::Prodan,
        Self::Ratkowsky,
        Self::Sibbesen,
        Self::Weibull,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::ChapmanRichards => "chapman-richards",
            Self::Gompertz => "gompertz",
            Self::HossfeldIv => "hossfeldiv",
            Self::Korf => "korf",
            Self::Logistic => "logistic",
            Self::Prodan => "prodan",
            Self::Ratkowsky => "ratkowsky",
            Self::Sibbesen => "sibbesen",
            Self::Weibull => "weibull",
        }
    }

    /// Predicted height and its gradient in (β₁, β₂, β₃).
    pub fn eval(&self, d: f64, b: &[f64; 3]) -> (f64, [f64; 3]) {
        let [b1, b2, b3] = *b;
        let (h, g) = match self {
            Self::ChapmanRichards => {
                let s = d + b3;
                (b1 + b2 / s, [1.0, 1.0 / s, -b2 / (s * s)])
            }
            Self::Gompertz => {
                let u = (-b3 * d).exp();
                let g = (-b2 * u).exp();
                (b1 * g, [g, -b1 * g * u, b1 * g * b2 * d * u])
            }
            Self::HossfeldIv => {
                let p = d.powf(b3);
                let v = b2 * p;
                let q = b1 / ((1.0 + v) * (1.0 + v));
                (b1 * v / (1.0 + v), [v / (1.0 + v), q * p, q * v * d.ln()])
            }
            Self::Korf => {
                let p = d.powf(-b3);
                let g = (-b2 * p).exp();
                (b1 * g, [g, -b1 * g * p, b1 * g * b2 * p * d.ln()])
            }
            Self::Logistic => {
                let e = (-b3 * d).exp();
                let den = 1.0 + b2 * e;
                let q = b1 / (den * den);
                (b1 / den, [1.0 / den, -q * e, q * b2 * d * e])
            }
            Self::Prodan => {
                let d2 = d * d;
                let den = b1 * d2 + b2 * d + b3;
                let q = -d2 / (den * den);
                (d2 / den, [q * d2, q * d, q])
            }
            Self::Ratkowsky => {
                let s = d + b3;
                let g = (-b2 / s).exp();
                (b1 * g, [g, -b1 * g / s, b1 * g * b2 / (s * s)])
            }
            Self::Sibbesen => {
                let ld = d.ln();
                let p = d.powf(-b3);
                let q = b2 * p;
                let dq = d.powf(q);
                (b1 * dq, [dq, b1 * dq * ld * p, -b1 * dq * ld * ld * q])
            }
            Self::Weibull => {
                let p = d.powf(b3);
                let e = (-b2 * p).exp();
                (b1 * (1.0 - e), [1.0 - e, b1 * e * p, b1 * e * b2 * p * d.ln()])
            }
        };
        (BREAST_HEIGHT + h, g)
    }

    pub fn predict(&self, d: f64, b: &[f64; 3]) -> f64 {
        self.eval(d, b).0
    }
}

impl fmt::Display for GrowthModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GrowthModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        Self::ALL
            .iter()
            .find(|m| m.name() == lower)
            .copied()
            .ok_or_else(|| Error::Unknown {
                kind: "growth model",
                name: s.to_string(),
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub parameter: String,
    pub estimate: f64,
    pub std_error: f64,
    pub t_value: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub model: GrowthModel,
    pub estimate: [f64; 3],
    pub summary: Vec<SummaryRow>,
    /// `h - Ĥ` in input order.
    pub residuals: Vec<f64>,
    /// `σ̂²(JᵀJ)⁻¹`.
    pub var_cov: [[f64; 3]; 3],
    /// `(JᵀJ)⁻¹`, the matrix the reference package prints as var-cov.
    pub cov_unscaled: [[f64; 3]; 3],
    pub residual_std_error: f64,
    pub iterations: usize,
}

fn rss_of(model: GrowthModel, h: &[f64], d: &[f64], b: &[f64; 3]) -> f64 {
    h.iter()
        .zip(d)
        .map(|(&hi, &di)| (hi - model.predict(di, b)).powi(2))
        .sum()
}

/// `JᵀJ` and `Jᵀr` with `r = h - Ĥ`.
fn normal_equations(model: GrowthModel, h: &[f64], d: &[f64], b: &[f64; 3]) -> (Matrix3<f64>, Vector3<f64>) {
    let mut a = Matrix3::zeros();
    let mut g = Vector3::zeros();
    for (&hi, &di) in h.iter().zip(d) {
        let (p, j) = model.eval(di, b);
        let j = Vector3::from(j);
        a += j * j.transpose();
        g += j * (hi - p);
    }
    (a, g)
}

fn gradient_small(g: &Vector3<f64>, rss: f64, tol: f64) -> bool {
    g.iter().all(|v| v.abs() <= tol * (1.0 + rss))
}

/// Levenberg-Marquardt fit of `model` to heights `h` at diameters `d`.
pub fn fit_growth(h: &[f64], d: &[f64], model: GrowthModel, starts: &[f64]) -> Result<GrowthFit> {
    if h.len() != d.len() {
        return Err(Error::Input(format!(
            "height and diameter lengths differ ({} vs {})",
            h.len(),
            d.len()
        )));
    }
    let n = h.len();
    if n < 4 {
        return Err(Error::DegenerateSample(format!("need at least 4 trees, got {n}")));
    }
    if d.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::Domain("diameters must be positive and finite".into()));
    }
    if h.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("heights contain non-finite values".into()));
    }
    let mut b: [f64; 3] = starts.try_into().map_err(|_| Error::ParamCount {
        what: format!("{model} starts"),
        expected: "3".into(),
        got: starts.len(),
    })?;
    let mut rss = rss_of(model, h, d, &b);
    if !rss.is_finite() {
        return Err(Error::Domain(format!("starting values {b:?} are outside the {model} model's domain")));
    }

    let mut lambda = 1e-3;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_ITER {
        iterations += 1;
        let (a, g) = normal_equations(model, h, d, &b);
        if gradient_small(&g, rss, 1e-12) {
            converged = true;
            break;
        }
        let mut accepted = None;
        while lambda < 1e16 {
            let mut m = a;
            for i in 0..3 {
                m[(i, i)] += lambda * a[(i, i)].max(1e-300);
            }
            if let Some(step) = m.cholesky().map(|c| c.solve(&g)) {
                let cand = [b[0] + step[0], b[1] + step[1], b[2] + step[2]];
                let r = rss_of(model, h, d, &cand);
                if r.is_finite() && r <= rss {
                    accepted = Some((cand, r, step));
                    break;
                }
            }
            lambda *= 10.0;
        }
        let Some((cand, r, step)) = accepted else {
            // no descent direction left: at a minimum up to rounding
            converged = gradient_small(&g, rss, 1e-6);
            break;
        };
        lambda = (lambda / 10.0).max(1e-15);
        b = cand;
        let drop = rss - r;
        rss = r;
        let small_step = (0..3).all(|i| step[i].abs() <= 1e-10 * (b[i].abs() + 1e-10));
        if small_step || drop <= 1e-15 * rss {
            let (_, g) = normal_equations(model, h, d, &b);
            if gradient_small(&g, rss, 1e-6) {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        return Err(Error::NonConvergence {
            what: format!("{model} growth fit"),
            iterations,
            last: b.to_vec(),
        });
    }

    let (a, _) = normal_equations(model, h, d, &b);
    let eig = SymmetricEigen::new(a);
    let (imin, emin) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .map(|(i, &v)| (i, v))
        .unwrap();
    let emax = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    if !(emin > 1e-14 * emax) {
        let v = eig.eigenvectors.column(imin);
        let worst = (0..3).max_by(|&i, &j| v[i].abs().total_cmp(&v[j].abs())).unwrap();
        return Err(Error::Singular(format!(
            "J'J is singular at the optimum; {} is not identified",
            PARAM_NAMES[worst]
        )));
    }
    let inv = a
        .try_inverse()
        .ok_or_else(|| Error::Singular("J'J could not be inverted".into()))?;
    let df = (n - 3) as f64;
    let sigma2 = rss / df;
    let cov = inv * sigma2;
    let mut var_cov = [[0.0; 3]; 3];
    let mut cov_unscaled = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            var_cov[i][j] = 0.5 * (cov[(i, j)] + cov[(j, i)]);
            cov_unscaled[i][j] = 0.5 * (inv[(i, j)] + inv[(j, i)]);
        }
    }
    let summary = (0..3)
        .map(|i| {
            let se = var_cov[i][i].sqrt();
            let t = b[i] / se;
            SummaryRow {
                parameter: PARAM_NAMES[i].to_string(),
                estimate: b[i],
                std_error: se,
                t_value: t,
                p_value: t_two_sided_p(t, df),
            }
        })
        .collect();
    let residuals = h.iter().zip(d).map(|(&hi, &di)| hi - model.predict(di, &b)).collect();
    Ok(GrowthFit {
        model,
        estimate: b,
        summary,
        residuals,
        var_cov,
        cov_unscaled,
        residual_std_error: sigma2.sqrt(),
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_params(m: GrowthModel) -> [f64; 3] {
        match m {
            GrowthModel::ChapmanRichards => [30.0, -200.0, 8.0],
            GrowthModel::Gompertz => [25.0, 3.0, 0.08],
            GrowthModel::HossfeldIv => [30.0, 0.01, 1.5],
            GrowthModel::Korf => [40.0, 8.0, 0.6],
            GrowthModel::Logistic => [25.0, 10.0, 0.1],
            GrowthModel::Prodan => [0.03, 1.0, 5.0],
            GrowthModel::Ratkowsky => [35.0, 30.0, 5.0],
            GrowthModel::Sibbesen => [2.0, 1.5, 0.2],
            GrowthModel::Weibull => [20.0, 0.05, 1.2],
        }
    }

    #[test]
    fn jacobians_match_finite_differences() {
        for m in GrowthModel::ALL {
            let b = sample_params(m);
            for &d in &[3.0, 12.5, 40.0] {
                let (_, g) = m.eval(d, &b);
                for i in 0..3 {
                    let h = 1e-6 * b[i].abs();
                    let (mut up, mut dn) = (b, b);
                    up[i] += h;
                    dn[i] -= h;
                    let fd = (m.predict(d, &up) - m.predict(d, &dn)) / (2.0 * h);
                    assert!((fd - g[i]).abs() <= 1e-6 * (1.0 + g[i].abs()), "{m} d={d} i={i}: {fd} vs {}", g[i]);
                }
            }
        }
    }

    #[test]
    fn names_round_trip() {
        for m in GrowthModel::ALL {
            assert_eq!(m.name().parse::<GrowthModel>().unwrap(), m);
            assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{}\"", m.name()));
        }
        assert_eq!("Sibbesen".parse::<GrowthModel>().unwrap(), GrowthModel::Sibbesen);
        assert!("richards".parse::<GrowthModel>().is_err());
    }

    #[test]
    fn noiseless_weibull_is_recovered() {
        let truth = [20.0, 0.05, 1.2];
        let d: Vec<f64> = (1..=30).map(|i| 2.0 + 1.5 * i as f64).collect();
        let h: Vec<f64> = d.iter().map(|&x| GrowthModel::Weibull.predict(x, &truth)).collect();
        let f = fit_growth(&h, &d, GrowthModel::Weibull, &[18.0, 0.03, 1.0]).unwrap();
        for i in 0..3 {
            assert!((f.estimate[i] - truth[i]).abs() < 1e-6, "{:?}", f.estimate);
        }
        assert!(f.residuals.iter().all(|r| r.abs() < 1e-8));
        assert!(f.residual_std_error < 1e-7);
    }

    #[test]
    fn rejects_bad_input() {
        let d = [1.0, 2.0, 3.0, 4.0, 5.0];
        let h = [2.0, 3.0, 4.0, 5.0, 6.0];
        assert!(fit_growth(&h[..4], &d, GrowthModel::Weibull, &[1.0, 1.0, 1.0]).is_err());
        assert!(fit_growth(&h[..3], &d[..3], GrowthModel::Weibull, &[1.0, 1.0, 1.0]).is_err());
        assert!(fit_growth(&h, &[0.0, 2.0, 3.0, 4.0, 5.0], GrowthModel::Korf, &[1.0, 1.0, 1.0]).is_err());
        assert!(fit_growth(&h, &d, GrowthModel::Weibull, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn unidentified_parameter_is_named() {
        // with β₂ = 0 the Weibull curve is flat, so β₃ drops out
        let d = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let h = [1.3; 6];
        let e = fit_growth(&h, &d, GrowthModel::Weibull, &[0.0, 0.0, 1.0]).unwrap_err();
        assert!(matches!(e, Error::Singular(ref s) if s.contains("beta")), "{e}");
    }
}
