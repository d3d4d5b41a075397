use kappa_income::inequality::{coeff_variation, empirical_gini, empirical_lorenz, gini, lorenz, lorenz_curve};
use kappa_income::{KappaParams, WeightedSample};
use kappa_oracles as oracle;
use proptest::prelude::*;

#[test]
fn gini_is_one_minus_twice_lorenz_area() {
    for (a, k) in [(0.8, 0.5), (1.0, 0.0), (1.5, 0.2), (2.0, 0.5), (3.0, 0.75)] {
        let p = KappaParams::with_unit_mean(a, k).unwrap();
        let area = oracle::integrate(|u| lorenz(&p, u).unwrap(), 0.0, 1.0, 1e-13, 1e-12).value;
        assert!((gini(&p).unwrap() - (1.0 - 2.0 * area)).abs() < 1e-7, "a={a} k={k}");
    }
}

#[test]
fn gini_ignores_beta_and_falls_with_alpha() {
    for k in [0.0, 0.2, 0.45] {
        let mut prev = 1.0;
        for i in 1..40 {
            let a = 0.5 + i as f64 * 0.1;
            let g = gini(&KappaParams::new(a, 1.0, k).unwrap()).unwrap();
            assert!(g > 0.0 && g < prev, "a={a} k={k}");
            prev = g;
            for b in [0.1, 10.0] {
                assert_eq!(gini(&KappaParams::new(a, b, k).unwrap()).unwrap(), g);
            }
        }
    }
}

#[test]
fn lorenz_is_convex_below_diagonal() {
    for (a, k) in [(0.8, 0.7), (2.0, 0.6), (3.0, 0.0)] {
        let p = KappaParams::with_unit_mean(a, k).unwrap();
        let pts = lorenz_curve(&p, 1000).unwrap().points;
        assert_eq!(pts.len(), 1001);
        for w in pts.windows(3) {
            let second = w[2].1 - 2.0 * w[1].1 + w[0].1;
            assert!(second >= -1e-12, "a={a} k={k} at u={}", w[1].0);
        }
        assert!(pts.iter().all(|&(u, l)| l <= u + 1e-15 && l >= 0.0));
    }
}

#[test]
fn coeff_variation_matches_moments() {
    for (a, k) in [(3.0, 0.5), (2.0, 0.3), (1.0, 0.0), (4.0, 1.0 / 3.0)] {
        let p = KappaParams::with_unit_mean(a, k).unwrap();
        let m = p.moment_summary();
        let direct = m.variance.unwrap().sqrt() / m.mean.unwrap();
        assert!((coeff_variation(&p).unwrap() - direct).abs() < 1e-12, "a={a} k={k}");
    }
    assert!(coeff_variation(&KappaParams::new(1.0, 1.0, 0.5).unwrap()).is_err());
}

#[test]
fn empirical_converges_to_model() {
    let p = KappaParams::with_unit_mean(2.0, 0.6).unwrap();
    let s = WeightedSample::unweighted(p.sample(100_000, 3).unwrap()).unwrap();
    assert!((empirical_gini(&s) - gini(&p).unwrap()).abs() < 0.01);
    let dev = empirical_lorenz(&s)
        .points
        .iter()
        .map(|&(u, l)| (l - lorenz(&p, u).unwrap()).abs())
        .fold(0.0, f64::max);
    assert!(dev < 0.01, "{dev}");
}

#[test]
fn weighted_gini_matches_replicated_records() {
    let xs = vec![0.4, 1.1, 2.0, 0.7, 5.0];
    let ws = vec![3.0, 1.0, 2.0, 1.0, 1.0];
    let weighted = WeightedSample::new(xs.clone(), ws.clone()).unwrap();
    let mut expanded = Vec::new();
    for (x, w) in xs.iter().zip(&ws) {
        expanded.extend(std::iter::repeat(*x).take(*w as usize));
    }
    expanded.sort_by(f64::total_cmp);
    assert!((empirical_gini(&weighted) - oracle::printed_gini(&expanded)).abs() < 1e-14);
}

proptest! {
    #[test]
    fn empirical_measures_are_scale_free(
        xs in prop::collection::vec(0.01f64..100.0, 2..60),
        c in 1e-3f64..1e3,
    ) {
        let s = WeightedSample::unweighted(xs.clone()).unwrap();
        let t = WeightedSample::unweighted(xs.iter().map(|x| x * c).collect()).unwrap();
        prop_assert!((empirical_gini(&s) - empirical_gini(&t)).abs() < 1e-13);
        for (a, b) in empirical_lorenz(&s).points.iter().zip(&empirical_lorenz(&t).points) {
            prop_assert!((a.1 - b.1).abs() < 1e-13);
        }
    }

    #[test]
    fn empirical_gini_in_unit_interval(
        xs in prop::collection::vec(0.01f64..100.0, 1..60),
        ws in prop::collection::vec(0.1f64..5.0, 60),
    ) {
        let s = WeightedSample::new(xs.clone(), ws[..xs.len()].to_vec()).unwrap();
        let g = empirical_gini(&s);
        prop_assert!((0.0..1.0).contains(&g) || g.abs() < 1e-15);
    }
}
