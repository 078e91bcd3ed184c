//! Distribution fitting for tree-diameter and height data.
//!
//! Fourteen continuous families, Weibull estimators, grouped-data and
//! finite-mixture EM, gamma shape mixtures, Bayesian samplers and
//! height-diameter curves, each fit reporting a [`GofBlock`].

// `!(a > b)` is used throughout to send NaN down the failure branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bayes;
pub mod distribution;
pub mod error;
pub mod gof;
pub mod grouped;
pub mod growth;
pub mod gsm;
pub mod io;
pub mod mixture;
pub mod mle;
pub mod optim;
pub mod quad;
pub mod rng;
pub mod roots;
pub mod special;
pub mod weibull;

pub use bayes::{fit_bayes_jsb, fit_bayes_weibull, BayesFit, McmcConfig};
pub use distribution::{Dist, Family};
pub use error::{Error, Result};
pub use gof::{information_criteria, GofBlock, InformationCriteria};
pub use grouped::{fit_grouped, GroupedFit, GroupedMethod, GroupedSample};
pub use growth::{fit_growth, GrowthFit, GrowthModel};
pub use gsm::{fit_gsm, GsmFit, GsmSpec};
pub use io::{load_dbh, DbhLayout, InputDigest, Measure};
pub use mixture::{fit_mixture, fit_mixture_grouped, MixtureFit, MixtureSpec};
pub use rng::RngStream;
pub use weibull::{fit_weibull, WeibullFit, WeibullMethod};
