mod common;

use common::tanh_sinh;
use difit_core::distribution::{Dist, Family};
use difit_core::gof::{edf_statistics, grouped_chi_square, information_criteria};
use difit_core::grouped::GroupedSample;
use difit_core::rng::RngStream;
use proptest::prelude::*;

/// Statistics from their defining integrals over the uniform empirical
/// process, evaluated numerically piece by piece.
fn brute_force(u_sorted: &[f64]) -> (f64, f64, f64) {
    let n = u_sorted.len() as f64;
    let mut knots = vec![0.0];
    knots.extend_from_slice(u_sorted);
    knots.push(1.0);
    let (mut ad, mut cvm, mut ks) = (0.0f64, 0.0f64, 0.0f64);
    for (i, w) in knots.windows(2).enumerate() {
        let fnv = i as f64 / n;
        if w[1] > w[0] {
            cvm += tanh_sinh(|u| (fnv - u).powi(2), w[0], w[1], 1e-14);
            ad += tanh_sinh(|u| (fnv - u).powi(2) / (u * (1.0 - u)), w[0], w[1], 1e-13);
        }
        // sup over a piece is attained at its ends
        ks = ks.max((fnv - w[0]).abs()).max((fnv - w[1]).abs());
    }
    (n * ad, n * cvm, ks)
}

#[test]
fn five_point_sample_matches_definitions() {
    let d = Dist::new(Family::Weibull, &[1.7, 3.0]).unwrap();
    let x = [0.8, 4.1, 2.2, 1.5, 3.3];
    let s = edf_statistics(&x, |v| d.cdf(v)).unwrap();
    let mut u: Vec<f64> = x.iter().map(|&v| d.cdf(v)).collect();
    u.sort_by(f64::total_cmp);
    let (ad, cvm, ks) = brute_force(&u);
    assert!((s.ad - ad).abs() < 1e-9, "{} vs {ad}", s.ad);
    assert!((s.cvm - cvm).abs() < 1e-12, "{} vs {cvm}", s.cvm);
    assert!((s.ks - ks).abs() < 1e-15, "{} vs {ks}", s.ks);
}

#[test]
fn three_class_chi_square_by_hand() {
    // Exp(1) against frequencies (2, 5, 3) on [0,1], (1,2], (2,3]; the upper
    // tail beyond 3 belongs to the last class
    let grp = GroupedSample::new(vec![0.0, 1.0, 2.0, 3.0], vec![2, 5, 3]).unwrap();
    let d = Dist::new(Family::Weibull, &[1.0, 1.0]).unwrap();
    let e1 = (-1.0f64).exp();
    let e2 = (-2.0f64).exp();
    let expected = [10.0 * (1.0 - e1), 10.0 * (e1 - e2), 10.0 * e2];
    let observed = [2.0, 5.0, 3.0];
    let hand: f64 = observed
        .iter()
        .zip(expected)
        .map(|(o, e)| (o - e) * (o - e) / e)
        .sum();
    let chi = grouped_chi_square(&grp, |v| d.cdf(v)).unwrap();
    assert!((chi.statistic - hand).abs() < 1e-12);
    assert!((hand - 8.0336).abs() < 1e-3);
}

#[test]
fn ks_invariant_under_log_transform() {
    let d = Dist::new(Family::Weibull, &[2.5, 7.0]).unwrap();
    let x = d.sample(300, &mut RngStream::new(4)).unwrap();
    let y: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let a = edf_statistics(&x, |v| d.cdf(v)).unwrap();
    let b = edf_statistics(&y, |v| d.cdf(v.exp())).unwrap();
    assert!((a.ks - b.ks).abs() < 1e-14);
}

proptest! {
    #[test]
    fn statistics_ignore_data_order(seed in 0u64..1000, shift in 0usize..200) {
        let d = Dist::new(Family::Gamma, &[2.0, 1.5]).unwrap();
        let x = d.sample(200, &mut RngStream::new(seed)).unwrap();
        let mut y = x.clone();
        y.rotate_left(shift);
        y.reverse();
        let a = edf_statistics(&x, |v| d.cdf(v)).unwrap();
        let b = edf_statistics(&y, |v| d.cdf(v)).unwrap();
        prop_assert_eq!(a, b);
        prop_assert!(a.ks >= 0.0 && a.ks <= 1.0 && a.cvm > 0.0 && a.ad >= -200.0);
    }

    #[test]
    fn corrected_aic_exceeds_aic(ll in -1e4..1e4f64, k in 0usize..10, extra in 2usize..500) {
        let ic = information_criteria(ll, k, k + extra).unwrap();
        prop_assert!(ic.aic <= ic.caic);
        prop_assert!((ic.aic - (2.0 * k as f64 - 2.0 * ll)).abs() < 1e-9 * (1.0 + ll.abs()));
    }
}

#[test]
fn zero_parameter_limit() {
    let ic = information_criteria(0.0, 0, 10).unwrap();
    assert_eq!(ic.aic, 0.0);
    assert!(information_criteria(-1.0, 3, 4).is_err());
}
