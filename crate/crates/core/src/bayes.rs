//! Gibbs samplers for the three-parameter Weibull and Johnson's SB.

use serde::{Deserialize, Serialize};

use crate::distribution::{Dist, Family};
use crate::error::{Error, Result};
use crate::gof::GofBlock;
use crate::rng::RngStream;
use crate::weibull::default_starts;

/// Shape and rate of the inverse-gamma prior on variance-like quantities.
const IG_PRIOR: f64 = 0.001;
/// Rate of the exponential prior on the Weibull shape.
const SHAPE_PRIOR_RATE: f64 = 0.001;
const ADAPT_BATCH: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McmcConfig {
    pub n_simul: usize,
    pub n_burn: usize,
    pub seed: u64,
}

impl Default for McmcConfig {
    fn default() -> Self {
        McmcConfig {
            n_simul: 10_000,
            n_burn: 8_000,
            seed: 0,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_burn == 0 || self.n_burn >= self.n_simul {
            return Err(Error::Domain(format!(
                "need 0 < n_burn < n_simul (got n_burn = {}, n_simul = {})",
                self.n_burn, self.n_simul
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BayesFit {
    pub family: Family,
    pub param_names: Vec<String>,
    /// Posterior means over retained draws.
    pub estimate: Vec<f64>,
    pub measures: GofBlock,
    /// Retained chain per parameter, in `param_names` order.
    #[serde(skip)]
    pub traces: Vec<Vec<f64>>,
    /// Post-burn-in acceptance rate of each Metropolis step.
    pub acceptance: Vec<(String, f64)>,
    pub warnings: Vec<String>,
}

impl BayesFit {
    /// Trace dump: header `iteration,<params>` then one row per retained draw.
    pub fn trace_csv(&self) -> String {
        let mut s = String::from("iteration");
        for p in &self.param_names {
            s.push(',');
            s.push_str(p);
        }
        s.push('\n');
        let len = self.traces.first().map_or(0, Vec::len);
        for i in 0..len {
            s.push_str(&(i + 1).to_string());
            for t in &self.traces {
                s.push(',');
                s.push_str(&t[i].to_string());
            }
            s.push('\n');
        }
        s
    }
}

/// Random-walk proposal scale tuned during burn-in toward 30–40% acceptance.
struct Proposal {
    name: &'static str,
    scale: f64,
    batch_accept: usize,
    batch_total: usize,
    kept_accept: usize,
    kept_total: usize,
}

impl Proposal {
    fn new(name: &'static str, scale: f64) -> Self {
        Proposal {
            name,
            scale,
            batch_accept: 0,
            batch_total: 0,
            kept_accept: 0,
            kept_total: 0,
        }
    }

    fn record(&mut self, accepted: bool, burning: bool) {
        if burning {
            self.batch_accept += accepted as usize;
            self.batch_total += 1;
            if self.batch_total == ADAPT_BATCH {
                let rate = self.batch_accept as f64 / ADAPT_BATCH as f64;
                if rate < 0.3 {
                    self.scale *= 0.8;
                } else if rate > 0.4 {
                    self.scale *= 1.25;
                }
                self.batch_accept = 0;
                self.batch_total = 0;
            }
        } else {
            self.kept_accept += accepted as usize;
            self.kept_total += 1;
        }
    }

    fn rate(&self) -> f64 {
        self.kept_accept as f64 / self.kept_total.max(1) as f64
    }
}

fn metropolis(rng: &mut RngStream, log_ratio: f64) -> bool {
    log_ratio >= 0.0 || rng.uniform_open().ln() < log_ratio
}

fn check_data(data: &[f64]) -> Result<(f64, f64)> {
    if data.len() < 10 {
        return Err(Error::DegenerateSample(format!("need at least 10 observations, got {}", data.len())));
    }
    if data.iter().any(|x| !x.is_finite()) {
        return Err(Error::Input("data contain non-finite values".into()));
    }
    let min = data.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = data.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(max > min) {
        return Err(Error::DegenerateSample("all observations are equal".into()));
    }
    Ok((min, max))
}

fn finish(
    family: Family,
    data: &[f64],
    names: &[&str],
    traces: Vec<Vec<f64>>,
    props: &[&Proposal],
) -> Result<BayesFit> {
    let estimate: Vec<f64> = traces
        .iter()
        .map(|t| t.iter().sum::<f64>() / t.len() as f64)
        .collect();
    let dist = Dist::new(family, &estimate)?;
    let ll: f64 = data.iter().map(|&x| dist.ln_pdf(x)).sum();
    let (measures, _) = GofBlock::edf_only(data, ll, |x| dist.cdf(x))?;
    let mut warnings = Vec::new();
    let acceptance = props
        .iter()
        .map(|p| {
            let r = p.rate();
            if !(0.05..=0.95).contains(&r) {
                warnings.push(format!("acceptance rate for {} is {:.3} after burn-in", p.name, r));
            }
            (p.name.to_string(), r)
        })
        .collect();
    Ok(BayesFit {
        family,
        param_names: names.iter().map(|s| s.to_string()).collect(),
        estimate,
        measures,
        traces,
        acceptance,
        warnings,
    })
}

/// Weibull (α, β, μ). The sampler runs on (α, θ = β^α, μ): θ has a
/// conjugate inverse-gamma conditional, α and μ get Metropolis steps.
pub fn fit_bayes_weibull(data: &[f64], cfg: &McmcConfig) -> Result<BayesFit> {
    cfg.validate()?;
    let (min, max) = check_data(data)?;
    let n = data.len() as f64;
    let mut rng = RngStream::new(cfg.seed);

    let [mut alpha, _, mut mu] = default_starts(data)?;
    let mut z: Vec<f64> = data.iter().map(|x| x - mu).collect();

    // log conditional of (α, μ) given θ, up to constants
    let log_target = |alpha: f64, theta: f64, z: &[f64]| -> f64 {
        let mut slog = 0.0;
        let mut spow = 0.0;
        for &zi in z {
            let l = zi.ln();
            slog += l;
            spow += (alpha * l).exp();
        }
        n * alpha.ln() + (alpha - 1.0) * slog - spow / theta - SHAPE_PRIOR_RATE * alpha
    };

    let mut pa = Proposal::new("alpha", 0.1);
    let mut pm = Proposal::new("mu", 0.05 * (max - min));
    let keep = cfg.n_simul - cfg.n_burn;
    let mut traces: Vec<Vec<f64>> = (0..3).map(|_| Vec::with_capacity(keep)).collect();
    for it in 0..cfg.n_simul {
        let burning = it < cfg.n_burn;

        // θ | α, μ ~ IG(a + n, b + Σ zᵅ)
        let spow: f64 = z.iter().map(|&zi| zi.powf(alpha)).sum();
        let g = rng.gamma(IG_PRIOR + n);
        let theta = (IG_PRIOR + spow) / g;
        let mut cur = log_target(alpha, theta, &z);

        // α: log-normal proposal, Jacobian α'/α
        let prop = alpha * (pa.scale * rng.standard_normal()).exp();
        let cand = log_target(prop, theta, &z);
        let ok = metropolis(&mut rng, cand - cur + (prop / alpha).ln());
        if ok {
            alpha = prop;
            cur = cand;
        }
        pa.record(ok, burning);

        // μ: random walk restricted to μ < min(data)
        let prop = mu + pm.scale * rng.standard_normal();
        let ok = if prop < min {
            let zp: Vec<f64> = data.iter().map(|x| x - prop).collect();
            let cand = log_target(alpha, theta, &zp);
            if metropolis(&mut rng, cand - cur) {
                mu = prop;
                z = zp;
                cur = cand;
                true
            } else {
                false
            }
        } else {
            false
        };
        pm.record(ok, burning);

        if !burning {
            traces[0].push(alpha);
            traces[1].push(theta.powf(1.0 / alpha));
            traces[2].push(mu);
        }
    }
    finish(Family::Weibull, data, &["alpha", "beta", "mu"], traces, &[&pa, &pm])
}

/// Options for the JSB sampler.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct JsbOptions {
    /// Hold (λ, ξ) fixed instead of sampling them.
    pub fixed_bounds: Option<(f64, f64)>,
}

/// Johnson's SB (δ, γ, λ, ξ). Given (λ, ξ) the logit-scale values
/// `u = ln((x-ξ)/(ξ+λ-x))` are normal with mean `-γ/δ` and sd `1/δ`, so
/// (mean, variance) have normal / inverse-gamma conditionals. The support
/// endpoints `ξ` and `ξ + λ` get Metropolis steps under a flat prior on
/// `ξ ∈ (x₍₁₎ - R, x₍₁₎)`, `ξ + λ ∈ (x₍ₙ₎, x₍ₙ₎ + R)` with `R` the sample
/// range.
pub fn fit_bayes_jsb(data: &[f64], cfg: &McmcConfig) -> Result<BayesFit> {
    fit_bayes_jsb_with(data, cfg, JsbOptions::default())
}

pub fn fit_bayes_jsb_with(data: &[f64], cfg: &McmcConfig, opts: JsbOptions) -> Result<BayesFit> {
    cfg.validate()?;
    let (min, max) = check_data(data)?;
    let n = data.len() as f64;
    let range = max - min;
    let mut rng = RngStream::new(cfg.seed);

    let (mut lo, mut hi) = match opts.fixed_bounds {
        Some((lambda, xi)) => {
            if !(lambda > 0.0) || xi >= min || xi + lambda <= max {
                return Err(Error::Domain("fixed (lambda, xi) must bracket the data".into()));
            }
            (xi, xi + lambda)
        }
        None => (min - 0.1 * range, max + 0.1 * range),
    };
    let (lo_min, hi_max) = (min - range, max + range);

    let logits = |lo: f64, hi: f64| -> Vec<f64> { data.iter().map(|&x| ((x - lo) / (hi - x)).ln()).collect() };
    // log-likelihood in (m, s²) plus the Jacobian of x ↦ u
    let log_target = |lo: f64, hi: f64, m: f64, s2: f64| -> f64 {
        let lambda = hi - lo;
        let mut ll = 0.0;
        for &x in data {
            let (a, b) = (x - lo, hi - x);
            let u = (a / b).ln();
            ll += -0.5 * (u - m) * (u - m) / s2 + lambda.ln() - a.ln() - b.ln();
        }
        ll - 0.5 * n * s2.ln()
    };

    let mut u = logits(lo, hi);
    let mut m = u.iter().sum::<f64>() / n;

    let mut plo = Proposal::new("xi", 0.02 * range);
    let mut phi = Proposal::new("xi_plus_lambda", 0.02 * range);
    let keep = cfg.n_simul - cfg.n_burn;
    let mut traces: Vec<Vec<f64>> = (0..4).map(|_| Vec::with_capacity(keep)).collect();

    for it in 0..cfg.n_simul {
        let burning = it < cfg.n_burn;

        // s² | m, u ~ IG(a + n/2, b + Σ(u-m)²/2), then m | s², u ~ N(ū, s²/n)
        let ss: f64 = u.iter().map(|v| (v - m).powi(2)).sum();
        let s2 = (IG_PRIOR + 0.5 * ss) / rng.gamma(IG_PRIOR + 0.5 * n);
        let ubar = u.iter().sum::<f64>() / n;
        m = ubar + (s2 / n).sqrt() * rng.standard_normal();

        if opts.fixed_bounds.is_none() {
            let cur = log_target(lo, hi, m, s2);
            let prop = lo + plo.scale * rng.standard_normal();
            let ok = prop > lo_min && prop < min && {
                let cand = log_target(prop, hi, m, s2);
                metropolis(&mut rng, cand - cur)
            };
            if ok {
                lo = prop;
            }
            plo.record(ok, burning);

            let cur = log_target(lo, hi, m, s2);
            let prop = hi + phi.scale * rng.standard_normal();
            let ok = prop > max && prop < hi_max && {
                let cand = log_target(lo, prop, m, s2);
                metropolis(&mut rng, cand - cur)
            };
            if ok {
                hi = prop;
            }
            phi.record(ok, burning);
            u = logits(lo, hi);
        }

        if !burning {
            let s = s2.sqrt();
            traces[0].push(1.0 / s);
            traces[1].push(-m / s);
            traces[2].push(hi - lo);
            traces[3].push(lo);
        }
    }
    let props: Vec<&Proposal> = if opts.fixed_bounds.is_some() { vec![] } else { vec![&plo, &phi] };
    finish(Family::Jsb, data, &["delta", "gamma", "lambda", "xi"], traces, &props)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(family: Family, p: &[f64], n: usize, seed: u64) -> Vec<f64> {
        Dist::new(family, p).unwrap().sample(n, &mut RngStream::new(seed)).unwrap()
    }

    #[test]
    fn config_bounds() {
        assert!(McmcConfig { n_simul: 10, n_burn: 10, seed: 1 }.validate().is_err());
        assert!(McmcConfig { n_simul: 10, n_burn: 0, seed: 1 }.validate().is_err());
        assert!(McmcConfig::default().validate().is_ok());
    }

    #[test]
    fn single_retained_draw() {
        let x = sample(Family::Weibull, &[2.0, 10.0, 5.0], 50, 3);
        let cfg = McmcConfig { n_simul: 200, n_burn: 199, seed: 9 };
        let f = fit_bayes_weibull(&x, &cfg).unwrap();
        for (t, e) in f.traces.iter().zip(&f.estimate) {
            assert_eq!(t.len(), 1);
            assert_eq!(t[0], *e);
        }
    }

    #[test]
    fn deterministic_and_valid() {
        let x = sample(Family::Jsb, &[1.0, 0.5, 30.0, 10.0], 60, 4);
        let cfg = McmcConfig { n_simul: 1500, n_burn: 1000, seed: 17 };
        let a = fit_bayes_jsb(&x, &cfg).unwrap();
        let b = fit_bayes_jsb(&x, &cfg).unwrap();
        assert_eq!(a.traces, b.traces);
        let min = x.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for i in 0..a.traces[0].len() {
            assert!(a.traces[0][i] > 0.0 && a.traces[2][i] > 0.0);
            assert!(a.traces[3][i] < min && a.traces[3][i] + a.traces[2][i] > max);
        }
        let csv = a.trace_csv();
        assert!(csv.starts_with("iteration,delta,gamma,lambda,xi\n1,"));
        assert_eq!(csv.lines().count(), 501);
    }

    #[test]
    fn rejects_short_or_flat_data() {
        let cfg = McmcConfig::default();
        assert!(fit_bayes_weibull(&[1.0; 5], &cfg).is_err());
        assert!(fit_bayes_jsb(&[2.0; 20], &cfg).is_err());
    }
}
