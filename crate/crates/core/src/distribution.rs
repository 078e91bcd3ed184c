//! Density, distribution, quantile and sampling functions for every family
//! used in diameter-distribution modelling.
//!
//! Parameter layouts (all positional):
//!
//! | family              | parameters                         |
//! |---------------------|------------------------------------|
//! | birnbaum-saunders   | α shape, β scale, [μ location]     |
//! | burrxii             | α, β                               |
//! | chen                | α, β                               |
//! | f                   | α, β (degrees of freedom)          |
//! | frechet             | α shape, β scale                   |
//! | gamma               | α shape, β scale, [μ location]     |
//! | ge                  | α shape, β rate, [μ location]      |
//! | gompertz            | α, β                               |
//! | jsb                 | δ, γ, λ range, ξ lower bound       |
//! | log-logistic        | α shape, β scale                   |
//! | log-normal          | α log-mean, β log-sd               |
//! | lomax               | α, β                               |
//! | skew-normal         | α location, β scale, λ slant       |
//! | weibull             | α shape, β scale, [μ location]     |
//!
//! A missing location parameter means μ = 0.

use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;
use crate::rng::RngStream;
use crate::roots;
use crate::special::{
    beta_reg, gamma_lr, gamma_ur, ln_gamma, norm_cdf, norm_ln_pdf, norm_quantile, norm_sf, owens_t,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    BirnbaumSaunders,
    #[serde(rename = "burrxii")]
    BurrXii,
    Chen,
    #[serde(rename = "f")]
    Fisher,
    Frechet,
    Gamma,
    #[serde(rename = "ge")]
    Ge,
    Gompertz,
    Jsb,
    LogLogistic,
    LogNormal,
    Lomax,
    SkewNormal,
    Weibull,
}

impl Family {
    pub const ALL: [Family; 14] = [
        Family::BirnbaumSaunders,
        Family::BurrXii,
        Family::Chen,
        Family::Fisher,
        Family::Frechet,
        Family::Gamma,
        Family::Ge,
        Family::Gompertz,
        Family::Jsb,
        Family::LogLogistic,
        Family::LogNormal,
        Family::Lomax,
        Family::SkewNormal,
        Family::Weibull,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Family::BirnbaumSaunders => "birnbaum-saunders",
            Family::BurrXii => "burrxii",
            Family::Chen => "chen",
            Family::Fisher => "f",
            Family::Frechet => "frechet",
            Family::Gamma => "gamma",
            Family::Ge => "ge",
            Family::Gompertz => "gompertz",
            Family::Jsb => "jsb",
            Family::LogLogistic => "log-logistic",
            Family::LogNormal => "log-normal",
            Family::Lomax => "lomax",
            Family::SkewNormal => "skew-normal",
            Family::Weibull => "weibull",
        }
    }

    /// Whether the family accepts an optional trailing location parameter.
    pub fn has_location(&self) -> bool {
        matches!(
            self,
            Family::BirnbaumSaunders | Family::Gamma | Family::Ge | Family::Weibull
        )
    }

    /// Number of parameters without the optional location.
    pub fn base_len(&self) -> usize {
        match self {
            Family::Jsb => 4,
            Family::SkewNormal => 3,
            _ => 2,
        }
    }

    pub fn param_names(&self) -> &'static [&'static str] {
        match self {
            Family::Jsb => &["delta", "gamma", "lambda", "xi"],
            Family::SkewNormal => &["alpha", "beta", "lambda"],
            f if f.has_location() => &["alpha", "beta", "mu"],
            _ => &["alpha", "beta"],
        }
    }

    /// Parameter positions that must be strictly positive.
    fn positive_fields(&self) -> &'static [usize] {
        match self {
            Family::LogNormal | Family::SkewNormal => &[1],
            Family::Jsb => &[0, 2],
            _ => &[0, 1],
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        let fam = match lower.as_str() {
            "birnbaum-saunders" | "bs" => Family::BirnbaumSaunders,
            "burrxii" | "burr" => Family::BurrXii,
            "chen" => Family::Chen,
            "f" | "fisher" => Family::Fisher,
            "frechet" | "fréchet" => Family::Frechet,
            "gamma" => Family::Gamma,
            "ge" => Family::Ge,
            "gompertz" => Family::Gompertz,
            "jsb" | "johnson-sb" => Family::Jsb,
            "log-logistic" => Family::LogLogistic,
            "log-normal" | "lognormal" => Family::LogNormal,
            "lomax" => Family::Lomax,
            "skew-normal" => Family::SkewNormal,
            "weibull" => Family::Weibull,
            _ => {
                return Err(Error::Unknown {
                    kind: "family",
                    name: s.to_string(),
                })
            }
        };
        Ok(fam)
    }
}

/// A validated member of a family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dist {
    family: Family,
    p: [f64; 4],
    len: usize,
}

// x·ln(y) with the convention 0·ln(0) = 0.
fn xlny(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * y.ln()
    }
}

// ln Φ(t), accurate in the far lower tail.
fn ln_norm_cdf(t: f64) -> f64 {
    if t > -30.0 {
        norm_cdf(t).ln()
    } else {
        norm_ln_pdf(t) - (-t).ln() + (-1.0 / (t * t)).ln_1p()
    }
}

impl Dist {
    pub fn new(family: Family, params: &[f64]) -> Result<Self> {
        let base = family.base_len();
        let ok_len = params.len() == base || (family.has_location() && params.len() == base + 1);
        if !ok_len {
            return Err(Error::ParamCount {
                what: family.name().to_string(),
                expected: if family.has_location() {
                    format!("{base} or {}", base + 1)
                } else {
                    base.to_string()
                },
                got: params.len(),
            });
        }
        let names = family.param_names();
        for (i, &v) in params.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::ParamDomain {
                    family: family.name(),
                    field: names[i],
                    value: v,
                    reason: "must be finite",
                });
            }
        }
        for &i in family.positive_fields() {
            if params[i] <= 0.0 {
                return Err(Error::ParamDomain {
                    family: family.name(),
                    field: names[i],
                    value: params[i],
                    reason: "must be > 0",
                });
            }
        }
        let mut p = [0.0; 4];
        p[..params.len()].copy_from_slice(params);
        Ok(Dist {
            family,
            p,
            len: params.len(),
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn params(&self) -> &[f64] {
        &self.p[..self.len]
    }

    /// Location parameter (0 when absent or not applicable).
    pub fn location(&self) -> f64 {
        if self.family.has_location() {
            self.p[2]
        } else {
            0.0
        }
    }

    pub fn lower(&self) -> f64 {
        match self.family {
            Family::SkewNormal => f64::NEG_INFINITY,
            Family::Jsb => self.p[3],
            f if f.has_location() => self.p[2],
            _ => 0.0,
        }
    }

    pub fn upper(&self) -> f64 {
        match self.family {
            Family::Jsb => self.p[3] + self.p[2],
            _ => f64::INFINITY,
        }
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        if x.is_nan() || x < self.lower() || x > self.upper() {
            return f64::NEG_INFINITY;
        }
        let [a, b, c, d] = self.p;
        let v = match self.family {
            Family::BirnbaumSaunders => {
                let y = x - c;
                if y <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                let s = (y / b).sqrt();
                let t = (s - 1.0 / s) / a;
                (s + 1.0 / s).ln() - (2.0 * a * y).ln() + norm_ln_pdf(t)
            }
            Family::BurrXii => {
                let xa = x.powf(a);
                let l1 = if xa < 1e100 {
                    xa.ln_1p()
                } else {
                    a * x.ln() + (1.0 / xa).ln_1p()
                };
                a.ln() + b.ln() + xlny(a - 1.0, x) - (b + 1.0) * l1
            }
            Family::Chen => {
                let xa = x.powf(a);
                a.ln() + b.ln() + xlny(a - 1.0, x) + xa - b * xa.exp_m1()
            }
            Family::Fisher => {
                ln_gamma(0.5 * (a + b)) - ln_gamma(0.5 * a) - ln_gamma(0.5 * b)
                    + 0.5 * a * (a / b).ln()
                    + xlny(0.5 * a - 1.0, x)
                    - 0.5 * (a + b) * (a * x / b).ln_1p()
            }
            Family::Frechet => {
                let z = x / b;
                a.ln() - b.ln() - (a + 1.0) * z.ln() - z.powf(-a)
            }
            Family::Gamma => {
                let y = x - c;
                -a * b.ln() - ln_gamma(a) + xlny(a - 1.0, y) - y / b
            }
            Family::Ge => {
                let y = x - c;
                a.ln() + b.ln() - b * y + xlny(a - 1.0, -(-b * y).exp_m1())
            }
            Family::Gompertz => b.ln() + a * x - b * (a * x).exp_m1() / a,
            Family::Jsb => {
                let (delta, gam, lam, xi) = (a, b, c, d);
                let lo = x - xi;
                let hi = lam + xi - x;
                if lo <= 0.0 || hi <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                let z = gam + delta * (lo / hi).ln();
                delta.ln() + lam.ln() - 0.5 * (2.0 * PI).ln() - lo.ln() - hi.ln() - 0.5 * z * z
            }
            Family::LogLogistic => {
                let z = x / b;
                a.ln() - b.ln() + xlny(a - 1.0, z) - 2.0 * z.powf(a).ln_1p()
            }
            Family::LogNormal => {
                let z = (x.ln() - a) / b;
                norm_ln_pdf(z) - b.ln() - x.ln()
            }
            Family::Lomax => a.ln() + b.ln() - (b + 1.0) * (a * x).ln_1p(),
            Family::SkewNormal => {
                let z = (x - a) / b;
                LN_2 - b.ln() + norm_ln_pdf(z) + ln_norm_cdf(c * z)
            }
            Family::Weibull => {
                let y = x - c;
                if y < 0.0 {
                    return f64::NEG_INFINITY;
                }
                let z = y / b;
                a.ln() - b.ln() + xlny(a - 1.0, z) - z.powf(a)
            }
        };
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.lower() {
            return 0.0;
        }
        if x >= self.upper() {
            return 1.0;
        }
        let [a, b, c, d] = self.p;
        let v = match self.family {
            Family::BirnbaumSaunders => {
                let s = ((x - c) / b).sqrt();
                norm_cdf((s - 1.0 / s) / a)
            }
            Family::BurrXii => -(-b * x.powf(a).ln_1p()).exp_m1(),
            Family::Chen => -(-b * x.powf(a).exp_m1()).exp_m1(),
            Family::Fisher => beta_reg(0.5 * a, 0.5 * b, a * x / (a * x + b)),
            Family::Frechet => (-(x / b).powf(-a)).exp(),
            Family::Gamma => gamma_lr(a, (x - c) / b),
            Family::Ge => (-(-b * (x - c)).exp_m1()).powf(a),
            Family::Gompertz => -(-b * (a * x).exp_m1() / a).exp_m1(),
            Family::Jsb => norm_cdf(b + a * ((x - d) / (c + d - x)).ln()),
            Family::LogLogistic => 1.0 / (1.0 + (x / b).powf(-a)),
            Family::LogNormal => norm_cdf((x.ln() - a) / b),
            Family::Lomax => -(-b * (a * x).ln_1p()).exp_m1(),
            Family::SkewNormal => {
                let z = (x - a) / b;
                norm_cdf(z) - 2.0 * owens_t(z, c)
            }
            Family::Weibull => -(-((x - c) / b).powf(a)).exp_m1(),
        };
        v.clamp(0.0, 1.0)
    }

    /// Survival function `1 - F(x)`, computed directly where cancellation matters.
    pub fn sf(&self, x: f64) -> f64 {
        if x <= self.lower() {
            return 1.0;
        }
        if x >= self.upper() {
            return 0.0;
        }
        let [a, b, c, d] = self.p;
        let v = match self.family {
            Family::BirnbaumSaunders => {
                let s = ((x - c) / b).sqrt();
                norm_sf((s - 1.0 / s) / a)
            }
            Family::BurrXii => (-b * x.powf(a).ln_1p()).exp(),
            Family::Chen => (-b * x.powf(a).exp_m1()).exp(),
            Family::Gamma => gamma_ur(a, (x - c) / b),
            Family::Gompertz => (-b * (a * x).exp_m1() / a).exp(),
            Family::Jsb => norm_sf(b + a * ((x - d) / (c + d - x)).ln()),
            Family::LogNormal => norm_sf((x.ln() - a) / b),
            Family::Lomax => (-b * (a * x).ln_1p()).exp(),
            Family::SkewNormal => {
                let z = (x - a) / b;
                norm_sf(z) + 2.0 * owens_t(z, c)
            }
            Family::Weibull => (-((x - c) / b).powf(a)).exp(),
            _ => 1.0 - self.cdf(x),
        };
        v.clamp(0.0, 1.0)
    }

    /// `P(lo < X ≤ hi)`, taken from the survival function when `lo` is in
    /// the upper half. Masses below 1e-6 on a finite interval are integrated
    /// from the density, since both differences lose their digits there.
    pub fn interval(&self, lo: f64, hi: f64) -> f64 {
        let c = self.cdf(lo);
        let v = if c > 0.5 { self.sf(lo) - self.sf(hi) } else { self.cdf(hi) - c };
        let (a, b) = (lo.max(self.lower()), hi.min(self.upper()));
        if v < 1e-6 && a.is_finite() && b.is_finite() && a < b {
            let f = |x: f64| self.pdf(x);
            let rough = quad::integrate(f, a, b, f64::INFINITY).value;
            if rough > 0.0 {
                return quad::integrate(f, a, b, 1e-10 * rough).value.max(0.0);
            }
        }
        v.max(0.0)
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!("probability {p} is outside (0, 1)")));
        }
        let [a, b, c, d] = self.p;
        // -ln(1-p) without cancellation
        let e = -(-p).ln_1p();
        let x = match self.family {
            Family::BirnbaumSaunders => {
                let w = 0.5 * a * norm_quantile(p);
                c + b * (w + (w * w + 1.0).sqrt()).powi(2)
            }
            Family::BurrXii => (e / b).exp_m1().powf(1.0 / a),
            Family::Chen => (e / b).ln_1p().powf(1.0 / a),
            Family::Frechet => b * (-p.ln()).powf(-1.0 / a),
            Family::Ge => c - (-p.powf(1.0 / a)).ln_1p() / b,
            Family::Gompertz => (a * e / b).ln_1p() / a,
            Family::Jsb => {
                let u = (norm_quantile(p) - b) / a;
                d + c / (1.0 + (-u).exp())
            }
            Family::LogLogistic => b * (p / (1.0 - p)).powf(1.0 / a),
            Family::LogNormal => (a + b * norm_quantile(p)).exp(),
            Family::Lomax => (e / b).exp_m1() / a,
            Family::Weibull => c + b * e.powf(1.0 / a),
            Family::Fisher | Family::Gamma | Family::SkewNormal => self.numeric_quantile(p)?,
        };
        Ok(x)
    }

    fn numeric_quantile(&self, p: f64) -> Result<f64> {
        let [a, b, c, _] = self.p;
        let (lo, hi) = match self.family {
            Family::Gamma => {
                // Wilson–Hilferty starting bracket
                let z = norm_quantile(p);
                let t = 1.0 - 1.0 / (9.0 * a) + z / (3.0 * a.sqrt());
                let g = (a * t.max(0.05).powi(3)).max(1e-8);
                (c + 0.5 * g * b, c + 1.5 * g * b)
            }
            Family::SkewNormal => {
                let z = norm_quantile(p);
                (a + b * (z - 1.0), a + b * (z + 1.0))
            }
            _ => (0.5, 2.0),
        };
        let lower = self.lower();
        let scale = hi.abs().max(1.0);
        let use_sf = p > 0.5;
        let target = if use_sf { 1.0 - p } else { p };
        let x = roots::bracket_and_solve(
            |x| {
                if use_sf {
                    target - self.sf(x)
                } else {
                    self.cdf(x) - target
                }
            },
            lo.max(if lower.is_finite() { lower + 1e-300 } else { lo }),
            hi,
            lower,
            f64::INFINITY,
            1e-15 * scale,
        )?;
        Ok(x)
    }

    /// Draw `n` variates.
    pub fn sample(&self, n: usize, rng: &mut RngStream) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            out.push(self.draw(rng)?);
        }
        Ok(out)
    }

    pub fn draw(&self, rng: &mut RngStream) -> Result<f64> {
        let [a, b, c, _] = self.p;
        let x = match self.family {
            Family::LogNormal => (a + b * rng.standard_normal()).exp(),
            Family::SkewNormal => {
                let delta = c / (1.0 + c * c).sqrt();
                let u0 = rng.standard_normal().abs();
                let u1 = rng.standard_normal();
                a + b * (delta * u0 + (1.0 - delta * delta).sqrt() * u1)
            }
            Family::BirnbaumSaunders => {
                let w = 0.5 * a * rng.standard_normal();
                c + b * (w + (w * w + 1.0).sqrt()).powi(2)
            }
            Family::Gamma => c + b * rng.gamma(a),
            _ => self.quantile(rng.uniform_open())?,
        };
        Ok(x)
    }

    /// Integral of the density over its support by adaptive quadrature.
    /// Used by tests and by the normalization checks.
    pub fn total_mass(&self, abs_tol: f64) -> f64 {
        let (lo, hi) = (self.lower(), self.upper());
        let f = |x: f64| self.pdf(x);
        match (lo.is_finite(), hi.is_finite()) {
            (true, true) => quad::integrate(f, lo, hi, abs_tol).value,
            (true, false) => {
                let m = self.quantile(0.5).unwrap_or(lo + 1.0);
                quad::integrate(f, lo, m, 0.5 * abs_tol).value
                    + quad::integrate_upper(f, m, 0.5 * abs_tol).value
            }
            _ => {
                let m = self.quantile(0.5).unwrap_or(0.0);
                quad::integrate_real_line(f, m, abs_tol).value
            }
        }
    }
}

pub fn pdf(family: Family, params: &[f64], x: f64) -> Result<f64> {
    Ok(Dist::new(family, params)?.pdf(x))
}

pub fn cdf(family: Family, params: &[f64], x: f64) -> Result<f64> {
    Ok(Dist::new(family, params)?.cdf(x))
}

pub fn quantile(family: Family, params: &[f64], p: f64) -> Result<f64> {
    Dist::new(family, params)?.quantile(p)
}

pub fn sample(family: Family, params: &[f64], n: usize, rng: &mut RngStream) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Domain("sample size must be at least 1".into()));
    }
    Dist::new(family, params)?.sample(n, rng)
}
