//! Finite mixtures `g(x) = Σ ωₖ f(x | θₖ)` of a single family.

use serde::{Deserialize, Serialize};

use crate::distribution::{Dist, Family};
use crate::error::{Error, Result};
use crate::gof::GofBlock;
use crate::grouped::{class_nodes, GroupedSample};
use crate::mle;
use crate::rng::RngStream;
use crate::roots;
use crate::special::{digamma, ln_gamma};

const WEIGHT_TOL: f64 = 1e-9;
const EM_TOL: f64 = 1e-8;
const EM_MAX_ITER: usize = 5000;
const MAX_RESTARTS: usize = 5;
const COLLAPSE_WEIGHT: f64 = 1e-6;

/// Families accepted by [`fit_mixture`].
pub const MIXTURE_FAMILIES: [Family; 13] = [
    Family::BirnbaumSaunders,
    Family::BurrXii,
    Family::Chen,
    Family::Fisher,
    Family::Frechet,
    Family::Gamma,
    Family::Ge,
    Family::Gompertz,
    Family::LogNormal,
    Family::LogLogistic,
    Family::Lomax,
    Family::SkewNormal,
    Family::Weibull,
];

/// Families accepted by [`fit_mixture_grouped`].
pub const GROUPED_MIXTURE_FAMILIES: [Family; 4] =
    [Family::Gamma, Family::LogNormal, Family::SkewNormal, Family::Weibull];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecRows", into = "SpecRows")]
pub struct MixtureSpec {
    family: Family,
    weights: Vec<f64>,
    components: Vec<Dist>,
}

/// Serialized form: one row `(ω, θ…)` per component.
#[derive(Serialize, Deserialize)]
struct SpecRows {
    family: Family,
    components: Vec<Vec<f64>>,
}

impl From<MixtureSpec> for SpecRows {
    fn from(s: MixtureSpec) -> Self {
        SpecRows {
            family: s.family,
            components: s.rows(),
        }
    }
}

impl TryFrom<SpecRows> for MixtureSpec {
    type Error = Error;

    fn try_from(r: SpecRows) -> Result<Self> {
        let mut w = Vec::new();
        let mut p = Vec::new();
        for row in r.components {
            let (first, rest) = row.split_first().ok_or_else(|| Error::Input("empty mixture row".into()))?;
            w.push(*first);
            p.push(rest.to_vec());
        }
        MixtureSpec::new(r.family, w, p)
    }
}

impl MixtureSpec {
    pub fn new(family: Family, weights: Vec<f64>, params: Vec<Vec<f64>>) -> Result<Self> {
        if weights.is_empty() || weights.len() != params.len() {
            return Err(Error::ParamCount {
                what: "mixture components".into(),
                expected: format!("{} parameter vectors", weights.len()),
                got: params.len(),
            });
        }
        if let Some(&w) = weights.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
            return Err(Error::ParamDomain {
                family: "mixture",
                field: "omega",
                value: w,
                reason: "weights must be non-negative",
            });
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::ParamDomain {
                family: "mixture",
                field: "omega",
                value: total,
                reason: "weights must sum to one",
            });
        }
        let components = params
            .iter()
            .map(|p| Dist::new(family, p))
            .collect::<Result<Vec<_>>>()?;
        Ok(MixtureSpec {
            family,
            weights,
            components,
        })
    }

    /// Parse the flat layout `(ω…, α…, β…[, λ…][, μ…])`: one block of `k`
    /// values per parameter. Location families accept an optional trailing
    /// μ block.
    pub fn from_flat(family: Family, k: usize, flat: &[f64]) -> Result<Self> {
        if k == 0 {
            return Err(Error::Domain("mixture needs at least one component".into()));
        }
        let base = family.base_len();
        let blocks = flat.len() / k;
        let ok_len = flat.len() % k == 0
            && (blocks == base + 1 || (family.has_location() && blocks == base + 2));
        if !ok_len {
            return Err(Error::ParamCount {
                what: format!("{family} mixture parameters for k = {k}"),
                expected: if family.has_location() {
                    format!("{} or {}", k * (base + 1), k * (base + 2))
                } else {
                    format!("{}", k * (base + 1))
                },
                got: flat.len(),
            });
        }
        let weights = flat[..k].to_vec();
        let params = (0..k)
            .map(|j| (1..blocks).map(|b| flat[b * k + j]).collect())
            .collect();
        Self::new(family, weights, params)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn k(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn components(&self) -> &[Dist] {
        &self.components
    }

    /// One row `(ω, θ…)` per component.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.weights
            .iter()
            .zip(&self.components)
            .map(|(&w, d)| std::iter::once(w).chain(d.params().iter().copied()).collect())
            .collect()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.weights
            .iter()
            .zip(&self.components)
            .map(|(w, d)| w * d.pdf(x))
            .sum()
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        log_sum_exp(self.weights.iter().zip(&self.components).map(|(w, d)| w.ln() + d.ln_pdf(x)))
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let v: f64 = self
            .weights
            .iter()
            .zip(&self.components)
            .map(|(w, d)| w * d.cdf(x))
            .sum();
        v.clamp(0.0, 1.0)
    }

    pub fn sf(&self, x: f64) -> f64 {
        let v: f64 = self
            .weights
            .iter()
            .zip(&self.components)
            .map(|(w, d)| w * d.sf(x))
            .sum();
        v.clamp(0.0, 1.0)
    }

    /// Inverse of the mixture CDF. The answer lies between the smallest and
    /// largest component quantiles at `p`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!("probability {p} is outside (0, 1)")));
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (w, d) in self.weights.iter().zip(&self.components) {
            if *w > 0.0 {
                let q = d.quantile(p)?;
                lo = lo.min(q);
                hi = hi.max(q);
            }
        }
        if hi - lo <= 1e-15 * hi.abs().max(1.0) {
            return Ok(lo);
        }
        let use_sf = p > 0.5;
        roots::brent(
            |x| if use_sf { (1.0 - p) - self.sf(x) } else { self.cdf(x) - p },
            lo,
            hi,
            1e-14 * hi.abs().max(1.0),
        )
    }

    /// Draw `n` variates. Each draw consumes one uniform to pick the
    /// component, then whatever the component sampler consumes.
    pub fn sample(&self, n: usize, rng: &mut RngStream) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::Domain("sample size must be positive".into()));
        }
        (0..n)
            .map(|_| {
                let k = rng.categorical(&self.weights);
                self.components[k].draw(rng)
            })
            .collect()
    }

    fn sort_by_median(&mut self) {
        let mut idx: Vec<usize> = (0..self.k()).collect();
        let med: Vec<f64> = self
            .components
            .iter()
            .map(|d| d.quantile(0.5).unwrap_or(f64::NAN))
            .collect();
        idx.sort_by(|&a, &b| med[a].total_cmp(&med[b]));
        self.weights = idx.iter().map(|&i| self.weights[i]).collect();
        self.components = idx.iter().map(|&i| self.components[i].clone()).collect();
    }
}

fn log_sum_exp<I: Iterator<Item = f64>>(it: I) -> f64 {
    let v: Vec<f64> = it.collect();
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MixtureFit {
    pub estimate: MixtureSpec,
    pub measures: GofBlock,
    /// Component label (1-based) of each observation, in input order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cluster: Option<Vec<usize>>,
    pub iterations: usize,
    pub converged: bool,
    pub restarts: usize,
    /// Observed-data log-likelihood after each EM iteration.
    #[serde(skip)]
    pub loglik_trace: Vec<f64>,
}

/// Number of free parameters of a `k`-component mixture.
pub fn free_parameters(family: Family, k: usize) -> usize {
    k * (family.base_len() + 1) - 1
}

fn split_starts(family: Family, k: usize, starts: &[f64]) -> Result<Starts> {
    let spec = MixtureSpec::from_flat(family, k, starts)?;
    if spec.components.iter().any(|d| d.params().len() != family.base_len()) {
        return Err(Error::Domain("mixture fitting does not estimate a location parameter".into()));
    }
    let params = spec.components.iter().map(|d| d.params().to_vec()).collect();
    Ok((spec.weights, params))
}

struct WeightedSummary {
    mean: f64,
    var: f64,
    lmean: f64,
    lsd: f64,
    q25: f64,
    q50: f64,
    q75: f64,
    harm: f64,
    max: f64,
    skew: f64,
}

fn summarize(x: &[f64], w: &[f64]) -> WeightedSummary {
    let sw: f64 = w.iter().sum();
    let mean = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let var = x.iter().zip(w).map(|(a, b)| b * (a - mean).powi(2)).sum::<f64>() / sw;
    let m3 = x.iter().zip(w).map(|(a, b)| b * (a - mean).powi(3)).sum::<f64>() / sw;
    let pos = x.iter().all(|&v| v > 0.0);
    let (lmean, lsd, harm) = if pos {
        let lm = x.iter().zip(w).map(|(a, b)| b * a.ln()).sum::<f64>() / sw;
        let lv = x.iter().zip(w).map(|(a, b)| b * (a.ln() - lm).powi(2)).sum::<f64>() / sw;
        let h = sw / x.iter().zip(w).map(|(a, b)| b / a).sum::<f64>();
        (lm, lv.sqrt(), h)
    } else {
        (f64::NAN, f64::NAN, f64::NAN)
    };
    let mut idx: Vec<usize> = (0..x.len()).filter(|&i| w[i] > 0.0).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let wq = |p: f64| {
        let mut acc = 0.0;
        for &i in &idx {
            acc += w[i];
            if acc >= p * sw {
                return x[i];
            }
        }
        x[*idx.last().unwrap()]
    };
    let max = idx.last().map_or(f64::NAN, |&i| x[i]);
    WeightedSummary {
        mean,
        var,
        lmean,
        lsd,
        q25: wq(0.25),
        q50: wq(0.5),
        q75: wq(0.75),
        harm,
        max,
        skew: m3 / var.powf(1.5),
    }
}

/// Rough parameter guess for one family from weighted summaries.
fn moment_guess(family: Family, s: &WeightedSummary) -> Vec<f64> {
    let cv = (s.var.sqrt() / s.mean).clamp(0.02, 5.0);
    let lsd = s.lsd.max(1e-3);
    match family {
        Family::BirnbaumSaunders => {
            let beta = (s.mean * s.harm).sqrt();
            let alpha = (2.0 * ((s.mean / s.harm).sqrt() - 1.0)).max(1e-6).sqrt();
            vec![alpha.max(0.02), beta]
        }
        Family::BurrXii => {
            let alpha = 1.3 / lsd;
            let beta = std::f64::consts::LN_2 / (alpha * s.q50.ln()).exp().ln_1p();
            vec![alpha, beta]
        }
        Family::Chen => {
            let alpha = (3f64.ln() / s.max.ln().max(0.1)).clamp(1e-3, 5.0);
            let beta = std::f64::consts::LN_2 / s.q50.powf(alpha).exp_m1();
            vec![alpha, beta]
        }
        Family::Fisher => {
            let d2 = if s.mean > 1.05 { 2.0 * s.mean / (s.mean - 1.0) } else { 20.0 };
            vec![2.0, d2]
        }
        Family::Frechet => {
            let alpha = std::f64::consts::PI / (6f64.sqrt() * lsd);
            vec![alpha, s.q50 * std::f64::consts::LN_2.powf(1.0 / alpha)]
        }
        Family::Gamma => vec![s.mean * s.mean / s.var, s.var / s.mean],
        Family::Ge => {
            let alpha = (1.0 / (cv * cv)).clamp(0.2, 200.0);
            vec![alpha, (digamma(alpha + 1.0) - digamma(1.0)) / s.mean]
        }
        Family::Gompertz => {
            let spread = (s.q75 - s.q25).max(1e-6 * s.mean);
            let alpha = 1.5725 / spread;
            let beta = alpha * std::f64::consts::LN_2 / (alpha * s.q50).exp_m1();
            vec![alpha, beta]
        }
        Family::LogLogistic => {
            let ratio = (s.q75 / s.q25).max(1.0 + 1e-6);
            vec![2.0 * 3f64.ln() / ratio.ln(), s.q50]
        }
        Family::LogNormal => vec![s.lmean, lsd],
        Family::Lomax => vec![1.0 / (2.0 * s.mean), 3.0],
        Family::SkewNormal => vec![s.mean, s.var.sqrt(), s.skew.signum()],
        Family::Weibull => {
            let alpha = cv.powf(-1.086);
            vec![alpha, s.mean / ln_gamma(1.0 + 1.0 / alpha).exp()]
        }
        Family::Jsb => unreachable!("jsb mixtures are not supported"),
    }
}

type Starts = (Vec<f64>, Vec<Vec<f64>>);

/// Default starts: equal weights and one component per weight-quantile
/// slice. Two candidates are returned, the moment-style slice guesses
/// refined by weighted ML and the raw guesses.
fn default_starts(family: Family, k: usize, x: &[f64], w: &[f64]) -> Result<Vec<Starts>> {
    let mut idx: Vec<usize> = (0..x.len()).filter(|&i| w[i] > 0.0).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let total: f64 = idx.iter().map(|&i| w[i]).sum();
    let mut slices: Vec<(Vec<f64>, Vec<f64>)> = vec![(Vec::new(), Vec::new()); k];
    let mut acc = 0.0;
    for &i in &idx {
        let j = ((acc / total * k as f64) as usize).min(k - 1);
        slices[j].0.push(x[i]);
        slices[j].1.push(w[i]);
        acc += w[i];
    }
    let mut params = Vec::with_capacity(k);
    let mut raw = Vec::with_capacity(k);
    for (sx, sw) in &slices {
        let distinct = sx.windows(2).filter(|p| p[1] > p[0]).count() + 1;
        if sx.is_empty() || distinct < 2 {
            return Err(Error::DegenerateSample("a starting slice has fewer than two distinct values".into()));
        }
        let guess = moment_guess(family, &summarize(sx, sw));
        let guess = if Dist::new(family, &guess).is_ok() {
            guess
        } else {
            fallback_guess(family, sx)
        };
        // a slice can push ML to a boundary; keep the guess then
        let fitted = mle::fit_weighted(family, sx, sw, &guess, None)
            .ok()
            .filter(|p| interior(family, p));
        params.push(fitted.unwrap_or_else(|| guess.clone()));
        raw.push(guess);
    }
    let w0 = vec![1.0 / k as f64; k];
    let mut out = vec![(w0.clone(), params)];
    if out[0].1 != raw {
        out.push((w0, raw));
    }
    Ok(out)
}

fn fallback_guess(family: Family, x: &[f64]) -> Vec<f64> {
    let m = x.iter().sum::<f64>() / x.len() as f64;
    match family {
        Family::SkewNormal => vec![m, m.abs().max(1.0), 0.0],
        Family::LogNormal => vec![m.ln(), 0.5],
        _ => vec![1.0, 1.0],
    }
}

fn perturb(family: Family, params: &[Vec<f64>], scale: f64, rng: &mut RngStream) -> Vec<Vec<f64>> {
    params
        .iter()
        .map(|p| loop {
            let q: Vec<f64> = p
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    let real = matches!((family, i), (Family::SkewNormal, 0 | 2) | (Family::LogNormal, 0));
                    if real {
                        v + 0.2 * scale.max(v.abs()) * rng.standard_normal()
                    } else {
                        v * (0.2 * rng.standard_normal()).exp()
                    }
                })
                .collect();
            if Dist::new(family, &q).is_ok() {
                break q;
            }
        })
        .collect()
}

/// A component collapses when its weight vanishes or its interquartile
/// range shrinks to nothing relative to the data spread.
fn collapsed(weights: &[f64], comps: &[Vec<f64>], family: Family, spread: f64) -> bool {
    weights.iter().any(|&w| w < COLLAPSE_WEIGHT)
        || comps.iter().any(|p| match Dist::new(family, p) {
            Ok(d) => match (d.quantile(0.25), d.quantile(0.75)) {
                (Ok(a), Ok(b)) => !(b - a > 1e-8 * spread),
                _ => true,
            },
            Err(_) => true,
        })
}

fn interior(family: Family, p: &[f64]) -> bool {
    Dist::new(family, p).is_ok() && p.iter().all(|v| v.abs() < 1e6 && (v.abs() > 1e-6 || *v == 0.0))
}

/// Shared EM driver. `estep` returns (ℓ, per-component weight totals) and
/// fills responsibilities; `mstep` refits one component.
trait EmProblem {
    fn family(&self) -> Family;
    /// Observed-data log-likelihood (kernel only for grouped data).
    fn loglik(&self, weights: &[f64], comps: &[Dist]) -> f64;
    /// One EM update from the current state.
    fn update(&self, weights: &[f64], comps: &[Dist]) -> Result<(Vec<f64>, Vec<Vec<f64>>)>;
}

struct EmOutcome {
    weights: Vec<f64>,
    comps: Vec<Dist>,
    iterations: usize,
    converged: bool,
    trace: Vec<f64>,
}

fn run_em<P: EmProblem>(prob: &P, weights: Vec<f64>, params: Vec<Vec<f64>>, spread: f64) -> Result<Option<EmOutcome>> {
    let family = prob.family();
    let mut weights = weights;
    let mut comps = params
        .iter()
        .map(|p| Dist::new(family, p))
        .collect::<Result<Vec<_>>>()?;
    let mut ll = prob.loglik(&weights, &comps);
    if !ll.is_finite() {
        return Err(Error::Domain("starting values give zero likelihood to some observation".into()));
    }
    let mut trace = vec![ll];
    for it in 1..=EM_MAX_ITER {
        let (w_new, p_new) = prob.update(&weights, &comps)?;
        if collapsed(&w_new, &p_new, family, spread) {
            return Ok(None);
        }
        let c_new = p_new
            .iter()
            .map(|p| Dist::new(family, p))
            .collect::<Result<Vec<_>>>()?;
        let ll_new = prob.loglik(&w_new, &c_new);
        if !(ll_new >= ll) {
            // numerical noise at a fixed point; keep the better state
            return Ok(Some(EmOutcome {
                weights,
                comps,
                iterations: it,
                converged: true,
                trace,
            }));
        }
        let delta = ll_new - ll;
        weights = w_new;
        comps = c_new;
        ll = ll_new;
        trace.push(ll);
        if delta < EM_TOL {
            return Ok(Some(EmOutcome {
                weights,
                comps,
                iterations: it,
                converged: true,
                trace,
            }));
        }
    }
    Ok(Some(EmOutcome {
        weights,
        comps,
        iterations: EM_MAX_ITER,
        converged: false,
        trace,
    }))
}

fn run_with_restarts<P: EmProblem>(
    prob: &P,
    weights: Vec<f64>,
    params: Vec<Vec<f64>>,
    spread: f64,
) -> Result<(EmOutcome, usize)> {
    let k = weights.len();
    let mut rng = RngStream::new(0x4D49_5854);
    let mut cur = (weights, params.clone());
    for attempt in 0..=MAX_RESTARTS {
        if let Some(out) = run_em(prob, cur.0.clone(), cur.1.clone(), spread)? {
            return Ok((out, attempt));
        }
        cur = (vec![1.0 / k as f64; k], perturb(prob.family(), &params, spread, &mut rng));
    }
    Err(Error::NonConvergence {
        what: format!("mixture EM (component collapse after {MAX_RESTARTS} restarts)"),
        iterations: EM_MAX_ITER,
        last: cur.1.concat(),
    })
}

/// Run EM from each candidate and keep the highest final likelihood.
fn best_run<P: EmProblem>(prob: &P, candidates: Vec<Starts>, spread: f64) -> Result<(EmOutcome, usize)> {
    let mut best: Option<(EmOutcome, usize)> = None;
    let mut first_err = None;
    for (w, p) in candidates {
        match run_with_restarts(prob, w, p, spread) {
            Ok(r) => {
                let better = best
                    .as_ref()
                    .is_none_or(|b| r.0.trace.last() > b.0.trace.last());
                if better {
                    best = Some(r);
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    best.ok_or_else(|| first_err.expect("at least one candidate"))
}

fn finalize(family: Family, out: &EmOutcome) -> Result<MixtureSpec> {
    let mut w = out.weights.clone();
    let s: f64 = w.iter().sum();
    for v in &mut w {
        *v /= s;
    }
    let mut spec = MixtureSpec::new(family, w, out.comps.iter().map(|d| d.params().to_vec()).collect())?;
    spec.sort_by_median();
    Ok(spec)
}

struct Ungrouped<'a> {
    family: Family,
    x: &'a [f64],
}

impl Ungrouped<'_> {
    fn responsibilities(&self, weights: &[f64], comps: &[Dist]) -> Vec<Vec<f64>> {
        let k = weights.len();
        let mut tau = vec![vec![0.0; self.x.len()]; k];
        let mut lw = vec![0.0; k];
        for (i, &xi) in self.x.iter().enumerate() {
            for j in 0..k {
                lw[j] = weights[j].ln() + comps[j].ln_pdf(xi);
            }
            let m = log_sum_exp(lw.iter().copied());
            for j in 0..k {
                tau[j][i] = (lw[j] - m).exp();
            }
        }
        tau
    }
}

impl EmProblem for Ungrouped<'_> {
    fn family(&self) -> Family {
        self.family
    }

    fn loglik(&self, weights: &[f64], comps: &[Dist]) -> f64 {
        self.x
            .iter()
            .map(|&xi| log_sum_exp(weights.iter().zip(comps).map(|(w, d)| w.ln() + d.ln_pdf(xi))))
            .sum()
    }

    fn update(&self, weights: &[f64], comps: &[Dist]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        let tau = self.responsibilities(weights, comps);
        let n = self.x.len() as f64;
        let mut w = Vec::with_capacity(weights.len());
        let mut p = Vec::with_capacity(weights.len());
        for (j, t) in tau.iter().enumerate() {
            let tot: f64 = t.iter().sum();
            w.push(tot / n);
            let cur = comps[j].params();
            if tot < COLLAPSE_WEIGHT * n {
                p.push(cur.to_vec());
                continue;
            }
            p.push(mle::fit_weighted(self.family, self.x, t, cur, None).unwrap_or_else(|_| cur.to_vec()));
        }
        Ok((w, p))
    }
}

fn check_family(family: Family, allowed: &[Family]) -> Result<()> {
    if allowed.contains(&family) {
        Ok(())
    } else {
        Err(Error::Domain(format!("family {family} is not available for this mixture fit")))
    }
}

/// EM fit of a `k`-component mixture to individual observations. `starts`
/// uses the flat layout `(ω…, α…, β…[, λ…])`.
pub fn fit_mixture(data: &[f64], family: Family, k: usize, starts: Option<&[f64]>) -> Result<MixtureFit> {
    check_family(family, &MIXTURE_FAMILIES)?;
    if k == 0 {
        return Err(Error::Domain("need at least one component".into()));
    }
    if data.len() < 5 * k {
        return Err(Error::DegenerateSample(format!(
            "need at least 5k = {} observations, got {}",
            5 * k,
            data.len()
        )));
    }
    if data.iter().any(|x| !x.is_finite()) {
        return Err(Error::Input("data contain non-finite values".into()));
    }
    if family != Family::SkewNormal && data.iter().any(|&x| x <= 0.0) {
        return Err(Error::Domain(format!("{family} mixtures need positive data")));
    }
    let ones = vec![1.0; data.len()];
    let candidates = match starts {
        Some(s) => vec![split_starts(family, k, s)?],
        None => default_starts(family, k, data, &ones)?,
    };
    let sd = {
        let s = summarize(data, &ones);
        s.var.sqrt()
    };
    let prob = Ungrouped { family, x: data };
    let (out, restarts) = best_run(&prob, candidates, sd)?;
    let spec = finalize(family, &out)?;

    let ll: f64 = data.iter().map(|&x| spec.ln_pdf(x)).sum();
    let (measures, _) = GofBlock::individual(data, free_parameters(family, k), ll, |x| spec.cdf(x))?;
    let cluster = data
        .iter()
        .map(|&x| {
            spec.weights
                .iter()
                .zip(&spec.components)
                .enumerate()
                .map(|(j, (w, d))| (j, w.ln() + d.ln_pdf(x)))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .map_or(1, |(j, _)| j + 1)
        })
        .collect();
    Ok(MixtureFit {
        estimate: spec,
        measures,
        cluster: Some(cluster),
        iterations: out.iterations,
        converged: out.converged,
        restarts,
        loglik_trace: out.trace,
    })
}

struct Grouped<'a> {
    family: Family,
    grp: &'a GroupedSample,
}

impl Grouped<'_> {
    fn class_probs(&self, comps: &[Dist]) -> Vec<Vec<f64>> {
        comps
            .iter()
            .map(|d| self.grp.bounds().windows(2).map(|w| d.interval(w[0], w[1])).collect())
            .collect()
    }
}

impl EmProblem for Grouped<'_> {
    fn family(&self) -> Family {
        self.family
    }

    fn loglik(&self, weights: &[f64], comps: &[Dist]) -> f64 {
        let probs = self.class_probs(comps);
        let mut s = 0.0;
        for (i, &f) in self.grp.freqs().iter().enumerate() {
            if f == 0 {
                continue;
            }
            let p: f64 = weights.iter().zip(&probs).map(|(w, pk)| w * pk[i]).sum();
            if !(p > 0.0) {
                return f64::NEG_INFINITY;
            }
            s += f as f64 * p.ln();
        }
        s
    }

    fn update(&self, weights: &[f64], comps: &[Dist]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        let probs = self.class_probs(comps);
        let m = self.grp.classes();
        let k = weights.len();
        let n = self.grp.total() as f64;
        // class-level responsibilities scaled by frequency
        let mut scaled = vec![vec![0.0; m]; k];
        for (i, &f) in self.grp.freqs().iter().enumerate() {
            if f == 0 {
                continue;
            }
            let tot: f64 = (0..k).map(|j| weights[j] * probs[j][i]).sum();
            if tot > 0.0 {
                for j in 0..k {
                    scaled[j][i] = f as f64 * weights[j] * probs[j][i] / tot;
                }
            }
        }
        let (mut nodes, mut nw) = (Vec::new(), Vec::new());
        let mut w = Vec::with_capacity(k);
        let mut p = Vec::with_capacity(k);
        for j in 0..k {
            let tot: f64 = scaled[j].iter().sum();
            w.push(tot / n);
            let cur = comps[j].params();
            if tot < COLLAPSE_WEIGHT * n {
                p.push(cur.to_vec());
                continue;
            }
            class_nodes(self.grp, &comps[j], &scaled[j], &mut nodes, &mut nw);
            p.push(mle::fit_weighted(self.family, &nodes, &nw, cur, None).unwrap_or_else(|_| cur.to_vec()));
        }
        Ok((w, p))
    }
}

/// EM fit of a `k`-component mixture to grouped data.
pub fn fit_mixture_grouped(
    grp: &GroupedSample,
    family: Family,
    k: usize,
    starts: Option<&[f64]>,
) -> Result<MixtureFit> {
    check_family(family, &GROUPED_MIXTURE_FAMILIES)?;
    if k == 0 {
        return Err(Error::Domain("need at least one component".into()));
    }
    let occupied = grp.freqs().iter().filter(|&&f| f > 0).count();
    if occupied < k.max(2) {
        return Err(Error::DegenerateSample(format!(
            "need at least {} occupied classes, got {occupied}",
            k.max(2)
        )));
    }
    if family != Family::SkewNormal && grp.bounds()[0] < 0.0 {
        return Err(Error::Domain(format!("{family} mixtures need non-negative class boundaries")));
    }
    let mids = grp.midpoints();
    let fw: Vec<f64> = grp.freqs().iter().map(|&f| f as f64).collect();
    let candidates = match starts {
        Some(s) => vec![split_starts(family, k, s)?],
        None => default_starts(family, k, &mids, &fw)?,
    };
    let spread = summarize(&mids, &fw).var.sqrt();
    let prob = Grouped { family, grp };
    let (out, restarts) = best_run(&prob, candidates, spread)?;
    let spec = finalize(family, &out)?;
    let ll = grp.loglik(|x| spec.cdf(x));
    let (measures, _) = GofBlock::grouped(grp, free_parameters(family, k), ll, |x| spec.cdf(x))?;
    let coef = grp.ln_multinomial_coef();
    Ok(MixtureFit {
        estimate: spec,
        measures,
        cluster: None,
        iterations: out.iterations,
        converged: out.converged,
        restarts,
        loglik_trace: out.trace.iter().map(|v| v + coef).collect(),
    })
}
