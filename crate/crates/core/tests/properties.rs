use std::sync::Arc;

use proptest::prelude::*;

use arw::chaos::{chaos_statistics, fourth_chaos, sample_draw, second_chaos, X4Source};
use arw::correlations::{census_4, PairBuckets};
use arw::experiment::{run_campaign, ExperimentConfig, Pipeline};
use arw::field::{evaluate, synthesize};
use arw::lattice::{enumerate_frequencies, is_admissible, Dim};
use arw::nodal::{band_bound, epsilon_band, isosurface_area};
use arw::stats::{ks_distance, moments, Law};

fn admissible_n() -> impl Strategy<Value = u64> {
    (1u64..3000).prop_filter("admissible", |&n| is_admissible(n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn points_lie_on_the_sphere_and_pair_with_antipodes(n in 1u64..5000, three in any::<bool>()) {
        let dim = if three { Dim::Three } else { Dim::Two };
        let s = enumerate_frequencies(n, dim).unwrap();
        prop_assert!(s.points().windows(2).all(|w| w[0] < w[1]));
        for (i, p) in s.points().iter().enumerate() {
            prop_assert_eq!(p.norm_sq(), n as i64);
            prop_assert_eq!(s.point(s.antipode(i)), p.neg());
        }
    }

    #[test]
    fn census_identity(n in 1u64..400) {
        let s = enumerate_frequencies(n, Dim::Three).unwrap();
        prop_assume!(!s.is_empty());
        let c = census_4(&s, usize::MAX).unwrap();
        let big_n = s.len() as u64;
        prop_assert_eq!(c.total_c4, 3 * big_n * big_n - 3 * big_n + c.nondegenerate_x4);
    }

    #[test]
    fn draws_are_conjugate_symmetric(n in admissible_n(), seed in any::<u64>()) {
        let s = Arc::new(enumerate_frequencies(n, Dim::Three).unwrap());
        let d = sample_draw(s.clone(), seed).unwrap();
        for i in 0..s.len() {
            prop_assert_eq!(d.value(s.antipode(i)), d.value(i).conj());
        }
    }

    #[test]
    fn second_chaos_vanishes_and_fourth_is_real(n in 1u64..200, seed in any::<u64>()) {
        let s = Arc::new(enumerate_frequencies(n, Dim::Three).unwrap());
        prop_assume!(!s.is_empty());
        let b = PairBuckets::build(&s);
        let d = sample_draw(s, seed).unwrap();
        let stats = chaos_statistics(&d, X4Source::Buckets(&b)).unwrap();
        prop_assert!(second_chaos(&d).abs() <= 1e-12 * (1.0 + stats.w.abs()));
        prop_assert!(stats.max_imaginary() < 1e-9);
        prop_assert!(fourth_chaos(&stats).is_finite());
    }

    #[test]
    fn synthesis_is_translation_covariant(seed in any::<u64>(), shift in 0usize..16) {
        // shifting by whole grid steps permutes grid values
        let s = Arc::new(enumerate_frequencies(5, Dim::Three).unwrap());
        let d = sample_draw(s, seed).unwrap();
        let g = 16;
        let x0 = [shift as f64 / g as f64, 0.0, 0.0];
        let a = synthesize(&d, g).unwrap();
        let b = synthesize(&d.translated(&x0), g).unwrap();
        for idx in [[0, 3, 5], [7, 1, 2], [15, 15, 15]] {
            let moved = a.index(&[idx[0] + shift, idx[1], idx[2]]);
            prop_assert!((b.values[b.index(&idx)] - a.values[moved]).abs() < 1e-12);
        }
        let x = [0.3, 0.1, 0.7];
        prop_assert!((evaluate(&d.translated(&x0), &x) - evaluate(&d, &[x[0] + x0[0], x[1], x[2]])).abs() < 1e-12);
    }

    #[test]
    fn estimates_respect_the_band_bound(seed in any::<u64>(), eps in 0.02f64..0.5) {
        let s = Arc::new(enumerate_frequencies(6, Dim::Three).unwrap());
        let grid = synthesize(&sample_draw(s, seed).unwrap(), 32).unwrap();
        let band = epsilon_band(&grid, eps).unwrap().value;
        prop_assert!((0.0..=band_bound(6, 3)).contains(&band));
        prop_assert!(isosurface_area(&grid).unwrap().value >= 0.0);
    }

    #[test]
    fn ks_distance_is_order_free(mut xs in prop::collection::vec(-4.0f64..4.0, 100..300)) {
        let d = ks_distance(&xs, &Law::StandardNormal).unwrap();
        prop_assert!((0.0..=1.0).contains(&d));
        xs.reverse();
        prop_assert_eq!(ks_distance(&xs, &Law::StandardNormal).unwrap(), d);
    }
}

#[test]
fn campaigns_are_thread_count_independent() {
    let mut cfg = ExperimentConfig::new(26, 3, 40, 3, Pipeline::Both);
    cfg.grid = Some(48);
    cfg.threads = Some(1);
    let one = run_campaign(&cfg).unwrap();
    cfg.threads = Some(4);
    let four = run_campaign(&cfg).unwrap();
    assert_eq!(one.algebraic, four.algebraic);
    assert_eq!(one.geometric, four.geometric);
    assert_eq!(one.algebraic_summary, four.algebraic_summary);
    assert_eq!(one.content_hash(), four.content_hash());
}

#[test]
fn summaries_match_stored_values() {
    let rec = run_campaign(&ExperimentConfig::new(101, 3, 150, 0, Pipeline::Algebraic)).unwrap();
    let s = rec.algebraic_summary.as_ref().unwrap();
    let m = moments(&rec.algebraic);
    let mean = rec.algebraic.iter().sum::<f64>() / 150.0;
    let var = rec.algebraic.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 149.0;
    assert!((s.mean - mean).abs() <= 1e-12 * (1.0 + mean.abs()));
    assert!((s.variance - var).abs() <= 1e-12 * var);
    assert_eq!(s.skewness, m.skewness);
    assert!(s.ks_empirical.is_some() && s.ks_theoretical.is_some());
    // the stored config reproduces the values exactly
    let again = run_campaign(&rec.config).unwrap();
    assert_eq!(again.algebraic, rec.algebraic);
    assert_eq!(again.to_csv().lines().last(), rec.to_csv().lines().last());
}
