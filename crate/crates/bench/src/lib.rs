//! Shared synthetic inputs for the benchmarks.

use difit_core::{Dist, Family, MixtureSpec, RngStream};

pub fn weibull_sample(n: usize, seed: u64) -> Vec<f64> {
    let d = Dist::new(Family::Weibull, &[2.0, 20.0, 5.0]).expect("valid parameters");
    d.sample(n, &mut RngStream::new(seed)).expect("sample")
}

pub fn mixture_sample(n: usize, seed: u64) -> Vec<f64> {
    let m = MixtureSpec::from_flat(Family::Weibull, 2, &[0.6, 0.4, 3.0, 6.0, 10.0, 30.0]).expect("valid mixture");
    m.sample(n, &mut RngStream::new(seed)).expect("sample")
}

/// Diameters on [5, 50] and heights around a Weibull curve.
pub fn growth_sample(n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let truth = [20.0, 0.05, 1.2];
    let mut rng = RngStream::new(seed);
    let d: Vec<f64> = (0..n).map(|_| 5.0 + 45.0 * rng.uniform_open()).collect();
    let h = d
        .iter()
        .map(|&x| difit_core::GrowthModel::Weibull.predict(x, &truth) + 1.5 * rng.standard_normal())
        .collect();
    (h, d)
}
