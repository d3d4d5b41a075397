use kappa_income::gof::{bootstrap_gini_ci, exp_transform, gof_report, ks_pvalue, ks_statistic, BootstrapConfig};
use kappa_income::inequality::gini;
use kappa_income::{KappaParams, WeightedSample};

#[test]
fn transformed_draws_are_unit_exponential() {
    let p = KappaParams::with_unit_mean(2.2, 0.45).unwrap();
    let unit = KappaParams::new(1.0, 1.0, 0.0).unwrap();
    let passing = (0..100)
        .filter(|&seed| {
            let z: Vec<f64> = p
                .sample(2_000, seed)
                .unwrap()
                .into_iter()
                .map(|x| exp_transform(&p, x).unwrap())
                .collect();
            let s = WeightedSample::unweighted(z).unwrap();
            ks_pvalue(ks_statistic(&unit, &s), s.len()) > 0.01
        })
        .count();
    assert!(passing >= 95, "{passing}");
}

#[test]
fn transform_agrees_with_ccdf() {
    let p = KappaParams::with_unit_mean(1.7, 0.6).unwrap();
    let xs = p.sample(100, 17).unwrap();
    for x in xs.into_iter().chain([0.01, 100.0]) {
        let z = exp_transform(&p, x).unwrap();
        assert!(((-z).exp() / p.ccdf(x).unwrap() - 1.0).abs() < 1e-13);
    }
}

#[test]
fn pvalue_strictly_decreasing() {
    for n in [10, 100, 5_000] {
        let mut prev = 1.0;
        for i in 1..200 {
            let v = ks_pvalue(i as f64 * 0.002, n);
            // Below the smallest subnormal the tail probability flushes to zero.
            assert!(v < prev || prev == 0.0, "n={n} d={}", i as f64 * 0.002);
            prev = v;
        }
    }
}

#[test]
fn interval_width_scales_as_inverse_root_n() {
    let p = KappaParams::with_unit_mean(2.0, 0.3).unwrap();
    let mut ratios = Vec::new();
    for seed in 0..5 {
        let width = |n: usize| {
            let s = WeightedSample::unweighted(p.sample(n, seed).unwrap()).unwrap();
            let (lo, hi) = bootstrap_gini_ci(&s, 1000, 0.95, seed).unwrap();
            hi - lo
        };
        ratios.push(width(40_000) / width(10_000));
    }
    for r in ratios {
        assert!((0.4..=0.6).contains(&r), "{r}");
    }
}

#[test]
fn report_is_consistent() {
    let p = KappaParams::with_unit_mean(2.0, 0.6).unwrap();
    let s = WeightedSample::unweighted(p.sample(5_000, 4).unwrap()).unwrap();
    let boot = BootstrapConfig {
        replications: 300,
        level: 0.9,
        seed: 1,
    };
    let r = gof_report(&p, &s, &boot).unwrap();
    assert_eq!(r.qq_pairs.len(), 5_000);
    assert_eq!(r.gini_theoretical, gini(&p).unwrap());
    assert!(r.gini_ci.0 < r.gini_ci.1);
    assert_eq!(r.p_value, ks_pvalue(r.ks_d_plus, 5_000));
    assert_eq!(r, gof_report(&p, &s, &boot).unwrap());
}
