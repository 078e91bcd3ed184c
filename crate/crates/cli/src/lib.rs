//! `difit` command-line front end. Every subcommand loads its input, makes
//! one library call and prints a JSON report (or a CSV table).

mod report;

use std::ffi::OsString;
use std::fs::File;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use difit_core::grouped::{group, group_open_lower};
use difit_core::io::{load_dbh_pairs, load_values, tabulate, write_table, Column};
use difit_core::optim::Optimizer;
use difit_core::{
    fit_bayes_jsb, fit_bayes_weibull, fit_grouped, fit_growth, fit_gsm, fit_mixture, fit_mixture_grouped,
    fit_weibull, load_dbh, BayesFit, DbhLayout, Dist, Error, Family, GroupedMethod, GroupedSample, GrowthModel,
    GsmSpec, InputDigest, McmcConfig, Measure, MixtureSpec, RngStream, WeibullMethod,
};
use serde_json::{json, Value};

pub use report::{round_sig, Report, SIGNIFICANT};

/// Seed used when neither `--seed` nor `DIFIT_SEED` is given.
pub const DEFAULT_SEED: u64 = 1;

#[derive(Parser, Debug)]
#[command(name = "difit", version, about = "Fit and simulate tree-diameter distributions")]
struct Cli {
    /// Seed for randomized commands (falls back to DIFIT_SEED)
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct DataArgs {
    /// Input CSV (comma-delimited, optional header)
    #[arg(long)]
    data: Option<PathBuf>,
    /// Plot id; reads the file as a tree table
    #[arg(long)]
    plot: Option<i64>,
    /// Measurement read from a tree table
    #[arg(long, default_value = "dbh")]
    column: Measure,
    /// Plot id column, by position or header name
    #[arg(long, default_value = "1")]
    plot_col: Column,
    #[arg(long, default_value = "10")]
    dbh_col: Column,
    #[arg(long, default_value = "11")]
    height_col: Column,
    /// Value column when no plot is given (default: first column)
    #[arg(long)]
    value_col: Option<Column>,
}

#[derive(Args, Debug)]
struct GroupArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Number of equal-width classes from min to max of the data
    #[arg(long)]
    classes: Option<usize>,
    /// Classes open at the lower end, so the minimum falls outside
    #[arg(long)]
    open_lower: bool,
    /// Class boundaries r0 < r1 < ... < rm (instead of --data)
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    bounds: Option<Vec<f64>>,
    /// Class frequencies f1..fm
    #[arg(long, value_delimiter = ',')]
    freqs: Option<Vec<u64>>,
}

#[derive(Args, Debug)]
struct McmcArgs {
    #[arg(long, default_value_t = 10_000)]
    n_simul: usize,
    #[arg(long, default_value_t = 8_000)]
    n_burn: usize,
}

#[derive(Args, Debug)]
struct SpecArgs {
    #[arg(long)]
    family: Family,
    /// Mixture components; without it --params are plain family parameters
    #[arg(long)]
    k: Option<usize>,
    /// (ω…, α…, β…[, λ…][, μ…]) for mixtures, family parameters otherwise
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    params: Vec<f64>,
}

#[derive(Args, Debug)]
struct GsmArgs {
    /// Shape weights ω1..ωK
    #[arg(long, value_delimiter = ',', required = true)]
    omega: Vec<f64>,
    /// Common rate
    #[arg(long)]
    beta: f64,
}

#[derive(Args, Debug)]
struct GridArgs {
    #[arg(long, allow_negative_numbers = true)]
    min: f64,
    #[arg(long, allow_negative_numbers = true)]
    max: f64,
    #[arg(long, default_value_t = 201)]
    points: usize,
    /// Write the table here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Eval {
    Pdf,
    Cdf,
    Quantile,
    Sample,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Weibull fit by one of the two- or three-parameter methods
    FitWeibull {
        #[command(flatten)]
        data: DataArgs,
        /// Fit the location parameter too
        #[arg(long)]
        three_param: bool,
        /// Default: ml, or mle with --three-param
        #[arg(long)]
        method: Option<WeibullMethod>,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        starts: Option<Vec<f64>>,
    },
    /// Posterior means of the three-parameter Weibull by Gibbs sampling
    FitBayesWeibull {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        mcmc: McmcArgs,
    },
    /// Posterior means of the Johnson SB by Gibbs sampling
    FitBayesJsb {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        mcmc: McmcArgs,
    },
    /// Three-parameter Weibull or Birnbaum-Saunders fit to grouped data
    FitGrouped {
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long, default_value = "weibull")]
        family: Family,
        #[arg(long, default_value = "em")]
        method: GroupedMethod,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        starts: Option<Vec<f64>>,
        /// BFGS, CG, L-BFGS-B, Nelder-Mead or SANN (ml method)
        #[arg(long)]
        optimizer: Option<Optimizer>,
    },
    /// Finite mixture fit by EM
    FitMixture {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        family: Family,
        #[arg(long)]
        k: usize,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        starts: Option<Vec<f64>>,
    },
    /// Finite mixture fit to grouped data by EM
    FitMixtureGrouped {
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long)]
        family: Family,
        #[arg(long)]
        k: usize,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        starts: Option<Vec<f64>>,
    },
    /// Gamma shape mixture fit by EM
    FitGsm {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        k: usize,
    },
    /// Height-diameter curve by nonlinear least squares
    FitGrowth {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        model: GrowthModel,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        starts: Vec<f64>,
        /// Add the fitted curve on this many diameters to the report
        #[arg(long)]
        curve: Option<usize>,
    },
    /// Evaluate a mixture (or a single family) at points
    Mixture {
        op: Eval,
        #[command(flatten)]
        spec: SpecArgs,
        /// Points for pdf/cdf, probabilities for quantile
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        x: Vec<f64>,
        /// Draws for sample
        #[arg(long, default_value_t = 1)]
        n: usize,
    },
    /// Evaluate a gamma shape mixture at points
    Gsm {
        op: Eval,
        #[command(flatten)]
        spec: GsmArgs,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        x: Vec<f64>,
        #[arg(long, default_value_t = 1)]
        n: usize,
        /// Natural-log densities and probabilities
        #[arg(long)]
        log: bool,
        /// Upper-tail probabilities for cdf
        #[arg(long)]
        upper: bool,
    },
    /// Draw a sample and write it as a one-column CSV
    Simulate {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Density on an even grid as a two-column CSV
    Tabulate {
        #[arg(long, required_unless_present_any = ["fit", "omega"])]
        family: Option<Family>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        params: Option<Vec<f64>>,
        /// Gamma shape mixture weights (with --beta)
        #[arg(long, value_delimiter = ',', requires = "beta")]
        omega: Option<Vec<f64>>,
        #[arg(long)]
        beta: Option<f64>,
        /// A report written by one of the fit commands
        #[arg(long)]
        fit: Option<PathBuf>,
        #[command(flatten)]
        grid: GridArgs,
    },
}

enum Failure {
    Usage(String),
    Fit(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Fit(e)
    }
}

type Outcome = std::result::Result<(), Failure>;

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::ParamDomain { .. } => "param-domain",
        Error::ParamCount { .. } => "param-count",
        Error::Domain(_) => "domain",
        Error::DegenerateSample(_) => "degenerate-sample",
        Error::NonConvergence { .. } => "non-convergence",
        Error::Singular(_) => "singular",
        Error::Unknown { .. } => "unknown",
        Error::Input(_) => "input",
    }
}

/// Run with the process environment's `DIFIT_SEED`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let env_seed = std::env::var("DIFIT_SEED").ok();
    run_with_env(args, env_seed.as_deref(), out, err)
}

/// Exit code 0 on success, 2 on usage errors, 1 when a fit or evaluation
/// fails (the error is then written to `out` as JSON).
pub fn run_with_env<I, T>(args: I, env_seed: Option<&str>, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let echo: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let seed = match (cli.seed, env_seed) {
        (Some(s), _) => s,
        (None, Some(s)) => match s.trim().parse() {
            Ok(v) => v,
            Err(_) => {
                let _ = writeln!(err, "error: DIFIT_SEED must be an unsigned integer, got `{s}`");
                return 2;
            }
        },
        (None, None) => DEFAULT_SEED,
    };
    let name = command_name(&cli.command);
    match dispatch(cli.command, seed, &echo, out) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}\n\nFor more information, try '--help'.");
            2
        }
        Err(Failure::Fit(e)) => {
            let body = Report::new(name, &echo)
                .set(
                    "error",
                    json!({ "kind": error_kind(&e), "message": e.to_string() }),
                )
                .render();
            let _ = out.write_all(body.as_bytes());
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::FitWeibull { .. } => "fit-weibull",
        Command::FitBayesWeibull { .. } => "fit-bayes-weibull",
        Command::FitBayesJsb { .. } => "fit-bayes-jsb",
        Command::FitGrouped { .. } => "fit-grouped",
        Command::FitMixture { .. } => "fit-mixture",
        Command::FitMixtureGrouped { .. } => "fit-mixture-grouped",
        Command::FitGsm { .. } => "fit-gsm",
        Command::FitGrowth { .. } => "fit-growth",
        Command::Mixture { .. } => "mixture",
        Command::Gsm { .. } => "gsm",
        Command::Simulate { .. } => "simulate",
        Command::Tabulate { .. } => "tabulate",
    }
}

fn layout(d: &DataArgs) -> DbhLayout {
    DbhLayout {
        plot: d.plot_col.clone(),
        dbh: d.dbh_col.clone(),
        height: d.height_col.clone(),
    }
}

fn load(d: &DataArgs) -> std::result::Result<Vec<f64>, Failure> {
    let path = d.data.as_ref().ok_or_else(|| Failure::Usage("--data is required".into()))?;
    Ok(match d.plot {
        Some(p) => load_dbh(path, p, d.column, &layout(d))?,
        None => load_values(path, d.value_col.as_ref())?,
    })
}

/// Grouped sample plus, when built from raw data, that data's digest.
fn load_grouped(g: &GroupArgs) -> std::result::Result<(GroupedSample, Option<InputDigest>), Failure> {
    match (&g.bounds, &g.freqs) {
        (Some(b), Some(f)) => {
            if g.data.data.is_some() || g.classes.is_some() {
                return Err(Failure::Usage("--bounds/--freqs cannot be combined with --data/--classes".into()));
            }
            Ok((GroupedSample::new(b.clone(), f.clone())?, None))
        }
        (None, None) => {
            let m = g
                .classes
                .ok_or_else(|| Failure::Usage("--classes is required with --data".into()))?;
            let x = load(&g.data)?;
            let grp = if g.open_lower { group_open_lower(&x, m)? } else { group(&x, m)? };
            Ok((grp, Some(InputDigest::of(&x))))
        }
        _ => Err(Failure::Usage("--bounds and --freqs must be given together".into())),
    }
}

fn named(names: &[&str], values: &[f64]) -> Value {
    Value::Object(
        names
            .iter()
            .zip(values)
            .map(|(n, v)| (n.to_string(), json!(v)))
            .collect(),
    )
}

fn spec_from(s: &SpecArgs) -> std::result::Result<Sampler, Failure> {
    Ok(match s.k {
        Some(k) => Sampler::Mixture(MixtureSpec::from_flat(s.family, k, &s.params)?),
        None => Sampler::Single(Dist::new(s.family, &s.params)?),
    })
}

enum Sampler {
    Single(Dist),
    Mixture(MixtureSpec),
    Gsm(GsmSpec),
}

impl Sampler {
    fn pdf(&self, x: f64) -> f64 {
        match self {
            Sampler::Single(d) => d.pdf(x),
            Sampler::Mixture(m) => m.pdf(x),
            Sampler::Gsm(g) => g.pdf(x, false),
        }
    }

    fn cdf(&self, x: f64) -> f64 {
        match self {
            Sampler::Single(d) => d.cdf(x),
            Sampler::Mixture(m) => m.cdf(x),
            Sampler::Gsm(g) => g.cdf(x, false, true),
        }
    }

    fn quantile(&self, p: f64) -> difit_core::Result<f64> {
        match self {
            Sampler::Single(d) => d.quantile(p),
            Sampler::Mixture(m) => m.quantile(p),
            Sampler::Gsm(g) => g.to_mixture()?.quantile(p),
        }
    }

    fn sample(&self, n: usize, rng: &mut RngStream) -> difit_core::Result<Vec<f64>> {
        match self {
            Sampler::Single(d) => d.sample(n, rng),
            Sampler::Mixture(m) => m.sample(n, rng),
            Sampler::Gsm(g) => g.sample(n, rng),
        }
    }

    fn describe(&self) -> Value {
        match self {
            Sampler::Single(d) => json!({ "family": d.family(), "params": named(d.family().param_names(), d.params()) }),
            Sampler::Mixture(m) => serde_json::to_value(m).unwrap_or(Value::Null),
            Sampler::Gsm(g) => serde_json::to_value(g).unwrap_or(Value::Null),
        }
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Outcome {
    out.write_all(text.as_bytes())
        .map_err(|e| Failure::Fit(Error::Input(e.to_string())))
}

fn bayes_report(name: &str, echo: &[String], x: &[f64], f: &BayesFit, cfg: &McmcConfig) -> String {
    let names: Vec<&str> = f.param_names.iter().map(String::as_str).collect();
    Report::new(name, echo)
        .set("input", InputDigest::of(x))
        .set("estimate", named(&names, &f.estimate))
        .set("measures", &f.measures)
        .set("diagnostics", json!({ "acceptance": f.acceptance }))
        .set("seed", cfg.seed)
        .set("config", json!({ "n_simul": cfg.n_simul, "n_burn": cfg.n_burn }))
        .render()
}

fn dispatch(cmd: Command, seed: u64, echo: &[String], out: &mut dyn Write) -> Outcome {
    let name = command_name(&cmd);
    match cmd {
        Command::FitWeibull {
            data,
            three_param,
            method,
            starts,
        } => {
            let x = load(&data)?;
            let method = method.unwrap_or(if three_param { WeibullMethod::Mle } else { WeibullMethod::Ml });
            let f = fit_weibull(&x, three_param, method, starts.as_deref())?;
            let est = if three_param { &f.estimate[..] } else { &f.estimate[..2] };
            let names: &[&str] = if three_param { &["alpha", "beta", "mu"] } else { &["alpha", "beta"] };
            let text = Report::new(name, echo)
                .set("input", InputDigest::of(&x))
                .set("estimate", named(names, est))
                .set("measures", &f.measures)
                .set(
                    "diagnostics",
                    json!({ "method": f.method, "converged": f.converged, "iterations": f.iterations }),
                )
                .render();
            emit(out, &text)
        }
        Command::FitBayesWeibull { data, mcmc } | Command::FitBayesJsb { data, mcmc } => {
            let x = load(&data)?;
            let cfg = McmcConfig {
                n_simul: mcmc.n_simul,
                n_burn: mcmc.n_burn,
                seed,
            };
            let f = if name == "fit-bayes-jsb" {
                fit_bayes_jsb(&x, &cfg)?
            } else {
                fit_bayes_weibull(&x, &cfg)?
            };
            emit(out, &bayes_report(name, echo, &x, &f, &cfg))
        }
        Command::FitGrouped {
            group,
            family,
            method,
            starts,
            optimizer,
        } => {
            let (grp, digest) = load_grouped(&group)?;
            let f = fit_grouped(&grp, family, method, starts.as_deref(), optimizer)?;
            let text = Report::new(name, echo)
                .set("input", json!({ "data": digest, "bounds": grp.bounds(), "freqs": grp.freqs() }))
                .set("estimate", named(&["alpha", "beta", "mu"], &f.estimate))
                .set("measures", &f.measures)
                .set(
                    "diagnostics",
                    json!({
                        "family": f.family,
                        "method": f.method,
                        "optimizer": optimizer,
                        "converged": f.converged,
                        "iterations": f.iterations,
                    }),
                )
                .render();
            emit(out, &text)
        }
        Command::FitMixture { data, family, k, starts } => {
            let x = load(&data)?;
            let f = fit_mixture(&x, family, k, starts.as_deref())?;
            let text = Report::new(name, echo)
                .set("input", InputDigest::of(&x))
                .set("estimate", &f.estimate)
                .set("measures", &f.measures)
                .set(
                    "diagnostics",
                    json!({
                        "converged": f.converged,
                        "iterations": f.iterations,
                        "restarts": f.restarts,
                        "cluster": f.cluster,
                    }),
                )
                .render();
            emit(out, &text)
        }
        Command::FitMixtureGrouped {
            group,
            family,
            k,
            starts,
        } => {
            let (grp, digest) = load_grouped(&group)?;
            let f = fit_mixture_grouped(&grp, family, k, starts.as_deref())?;
            let text = Report::new(name, echo)
                .set("input", json!({ "data": digest, "bounds": grp.bounds(), "freqs": grp.freqs() }))
                .set("estimate", &f.estimate)
                .set("measures", &f.measures)
                .set(
                    "diagnostics",
                    json!({ "converged": f.converged, "iterations": f.iterations, "restarts": f.restarts }),
                )
                .render();
            emit(out, &text)
        }
        Command::FitGsm { data, k } => {
            let x = load(&data)?;
            let f = fit_gsm(&x, k)?;
            let text = Report::new(name, echo)
                .set("input", InputDigest::of(&x))
                .set("estimate", json!({ "beta": f.beta, "omega": f.omega }))
                .set("measures", &f.measures)
                .set("diagnostics", json!({ "iterations": f.iterations }))
                .render();
            emit(out, &text)
        }
        Command::FitGrowth {
            data,
            model,
            starts,
            curve,
        } => {
            let path = data.data.as_ref().ok_or_else(|| Failure::Usage("--data is required".into()))?;
            let plot = data
                .plot
                .ok_or_else(|| Failure::Usage("--plot is required for fit-growth".into()))?;
            let (h, d) = load_dbh_pairs(path, plot, &layout(&data))?;
            let f = fit_growth(&h, &d, model, &starts)?;
            let mut diagnostics = json!({ "iterations": f.iterations, "residuals": f.residuals });
            if let Some(points) = curve {
                let lo = d.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let rows = tabulate(|v| model.predict(v, &f.estimate), lo, hi, points)?;
                diagnostics["curve"] = json!(rows);
            }
            let text = Report::new(name, echo)
                .set("input", json!({ "height": InputDigest::of(&h), "dbh": InputDigest::of(&d) }))
                .set(
                    "estimate",
                    json!({
                        "model": f.model,
                        "summary": f.summary,
                        "var_cov": f.var_cov,
                        "cov_unscaled": f.cov_unscaled,
                        "residual_std_error": f.residual_std_error,
                    }),
                )
                .set("diagnostics", diagnostics)
                .render();
            emit(out, &text)
        }
        Command::Mixture { op, spec, x, n } => {
            let s = spec_from(&spec)?;
            evaluate(name, echo, &s, op, &x, n, seed, out)
        }
        Command::Gsm {
            op,
            spec,
            x,
            n,
            log,
            upper,
        } => {
            let g = GsmSpec::new(spec.omega.clone(), spec.beta)?;
            if matches!(op, Eval::Pdf | Eval::Cdf) && (log || upper) {
                if x.is_empty() {
                    return Err(Failure::Usage("--x is required".into()));
                }
                let values: Vec<f64> = x
                    .iter()
                    .map(|&v| if op == Eval::Pdf { g.pdf(v, log) } else { g.cdf(v, log, !upper) })
                    .collect();
                let text = Report::new(name, echo)
                    .set("spec", &g)
                    .set("x", &x)
                    .set(if op == Eval::Pdf { "pdf" } else { "cdf" }, values)
                    .render();
                return emit(out, &text);
            }
            evaluate(name, echo, &Sampler::Gsm(g), op, &x, n, seed, out)
        }
        Command::Simulate { spec, n, out: path } => {
            let s = spec_from(&spec)?;
            let draws = s.sample(n, &mut RngStream::new(seed))?;
            let mut table = String::from("x\n");
            for v in &draws {
                table.push_str(&v.to_string());
                table.push('\n');
            }
            match path {
                Some(p) => {
                    std::fs::write(&p, table).map_err(|e| Failure::Fit(Error::Input(format!("{}: {e}", p.display()))))?;
                    let text = Report::new(name, echo)
                        .set("spec", s.describe())
                        .set("n", n)
                        .set("seed", seed)
                        .set("out", p.display().to_string())
                        .render();
                    emit(out, &text)
                }
                None => emit(out, &table),
            }
        }
        Command::Tabulate {
            family,
            k,
            params,
            omega,
            beta,
            fit,
            grid,
        } => {
            let s = match (fit, omega, family) {
                (Some(p), None, None) => spec_from_report(&p)?,
                (None, Some(w), None) => Sampler::Gsm(GsmSpec::new(w, beta.unwrap_or(f64::NAN))?),
                (None, None, Some(family)) => {
                    let params = params.ok_or_else(|| Failure::Usage("--params is required with --family".into()))?;
                    spec_from(&SpecArgs { family, k, params })?
                }
                _ => return Err(Failure::Usage("give exactly one of --family, --omega or --fit".into())),
            };
            if !(grid.min <= grid.max) || grid.points == 0 {
                return Err(Failure::Usage(format!(
                    "empty grid: need --min <= --max and --points >= 1 (got {}, {}, {})",
                    grid.min, grid.max, grid.points
                )));
            }
            let rows = tabulate(|v| s.pdf(v), grid.min, grid.max, grid.points)?;
            match grid.out {
                Some(p) => {
                    let f = File::create(&p).map_err(|e| Failure::Fit(Error::Input(format!("{}: {e}", p.display()))))?;
                    write_table(f, "density", &rows)?;
                    Ok(())
                }
                None => {
                    let mut buf = Vec::new();
                    write_table(&mut buf, "density", &rows)?;
                    emit(out, &String::from_utf8_lossy(&buf))
                }
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn evaluate(
    name: &str,
    echo: &[String],
    s: &Sampler,
    op: Eval,
    x: &[f64],
    n: usize,
    seed: u64,
    out: &mut dyn Write,
) -> Outcome {
    let report = Report::new(name, echo).set("spec", s.describe());
    let report = match op {
        Eval::Sample => report
            .set("seed", seed)
            .set("sample", s.sample(n, &mut RngStream::new(seed))?),
        _ => {
            if x.is_empty() {
                return Err(Failure::Usage("--x is required".into()));
            }
            let values = match op {
                Eval::Pdf => x.iter().map(|&v| s.pdf(v)).collect::<Vec<_>>(),
                Eval::Cdf => x.iter().map(|&v| s.cdf(v)).collect(),
                _ => x.iter().map(|&p| s.quantile(p)).collect::<difit_core::Result<_>>()?,
            };
            let label = match op {
                Eval::Pdf => "pdf",
                Eval::Cdf => "cdf",
                _ => "quantile",
            };
            report.set("x", x).set(label, values)
        }
    };
    emit(out, &report.render())
}

/// Rebuild the fitted density from a report written by a fit command.
fn spec_from_report(path: &PathBuf) -> std::result::Result<Sampler, Failure> {
    let bad = |why: &str| Failure::Fit(Error::Input(format!("{}: {why}", path.display())));
    let text = std::fs::read_to_string(path).map_err(|e| bad(&e.to_string()))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| bad(&e.to_string()))?;
    let command = v["command"].as_str().ok_or_else(|| bad("no command field"))?;
    let est = &v["estimate"];
    let numbers = |keys: &[&str]| -> std::result::Result<Vec<f64>, Failure> {
        keys.iter()
            .map(|k| est[*k].as_f64().ok_or_else(|| bad(&format!("estimate has no `{k}`"))))
            .collect()
    };
    Ok(match command {
        "fit-weibull" | "fit-bayes-weibull" => {
            let keys: &[&str] = if est.get("mu").is_some() { &["alpha", "beta", "mu"] } else { &["alpha", "beta"] };
            Sampler::Single(Dist::new(Family::Weibull, &numbers(keys)?)?)
        }
        "fit-bayes-jsb" => Sampler::Single(Dist::new(Family::Jsb, &numbers(&["delta", "gamma", "lambda", "xi"])?)?),
        "fit-grouped" => {
            let family: Family = serde_json::from_value(v["diagnostics"]["family"].clone()).map_err(|e| bad(&e.to_string()))?;
            Sampler::Single(Dist::new(family, &numbers(&["alpha", "beta", "mu"])?)?)
        }
        "fit-mixture" | "fit-mixture-grouped" => {
            Sampler::Mixture(serde_json::from_value(est.clone()).map_err(|e| bad(&e.to_string()))?)
        }
        "fit-gsm" => {
            let omega: Vec<f64> = serde_json::from_value(est["omega"].clone()).map_err(|e| bad(&e.to_string()))?;
            let beta = est["beta"].as_f64().ok_or_else(|| bad("estimate has no `beta`"))?;
            // weights were rounded in the report
            let total: f64 = omega.iter().sum();
            Sampler::Gsm(GsmSpec::new(omega.iter().map(|w| w / total).collect(), beta)?)
        }
        other => return Err(bad(&format!("cannot tabulate a `{other}` report"))),
    })
}
