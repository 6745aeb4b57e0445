mod common;

use common::*;
use evse_scaling::dataset::Dataset;
use evse_scaling::glm::{
    fit_gaussian_quadratic, fit_powerlaw_negbin, fit_powerlaw_poisson, FitFlag, FitOptions,
};

#[test]
fn poisson_matches_grid_search_on_rounded_power_law() {
    let rows: Vec<(u64, u64)> = [10u64, 30, 100, 300, 1000, 3000]
        .iter()
        .map(|&n| (n, (0.5 * (n as f64).powf(0.8)).round() as u64))
        .collect();
    let fit = fit_powerlaw_poisson(
        &Dataset::from_pairs("p", &rows).unwrap(),
        &FitOptions::default(),
    )
    .unwrap();
    let (a, b) = poisson_mle(&rows);
    assert!(
        (fit.param("beta").unwrap() - b).abs() < 1e-6,
        "{} vs {b}",
        fit.param("beta").unwrap()
    );
    assert!((fit.param("log_y0").unwrap() - a).abs() < 1e-5);
    assert!((b - 0.8).abs() < 0.01);
}

#[test]
fn poisson_and_negbin_match_oracle_on_small_sets() {
    for rows in SMALL {
        let data = Dataset::from_pairs("s", rows).unwrap();
        let opts = FitOptions::default();

        let p = fit_powerlaw_poisson(&data, &opts).unwrap();
        let (pa, pb) = poisson_mle(rows);
        assert!(
            agrees_3sf(p.param("log_y0").unwrap(), pa),
            "poisson log_y0 {} vs {pa}",
            p.param("log_y0").unwrap()
        );
        assert!(
            agrees_3sf(p.param("beta").unwrap(), pb),
            "poisson beta {} vs {pb}",
            p.param("beta").unwrap()
        );

        let nb = fit_powerlaw_negbin(&data, &opts).unwrap();
        assert!(!nb.has_flag(FitFlag::DispersionBoundary));
        let (na, nbeta, nr) = negbin_mle(rows);
        let r = nb.dispersion.unwrap();
        assert!(
            agrees_3sf(nb.param("log_y0").unwrap(), na),
            "nb log_y0 {} vs {na}",
            nb.param("log_y0").unwrap()
        );
        assert!(
            agrees_3sf(nb.param("beta").unwrap(), nbeta),
            "nb beta {} vs {nbeta}",
            nb.param("beta").unwrap()
        );
        assert!(agrees_3sf(r, nr), "nb r {r} vs {nr}");
    }
}

#[test]
fn quadratic_matches_normal_equations() {
    let rows = [(1u64, 3u64), (2, 4), (4, 13), (7, 30), (11, 70)];
    let fit = fit_gaussian_quadratic(&Dataset::from_pairs("q", &rows).unwrap()).unwrap();
    let design: Vec<Vec<f64>> = rows
        .iter()
        .map(|&(n, _)| vec![(n * n) as f64, n as f64, 1.0])
        .collect();
    let y: Vec<f64> = rows.iter().map(|&(_, y)| y as f64).collect();
    let c = normal_equations(&design, &y);
    for (name, expected) in ["a", "b", "c"].iter().zip(&c) {
        let got = fit.param(name).unwrap();
        assert!(
            (got - expected).abs() < 1e-9 * expected.abs().max(1.0),
            "{name}: {got} vs {expected}"
        );
    }
    let rss: f64 = design
        .iter()
        .zip(&y)
        .map(|(row, yi)| (yi - row.iter().zip(&c).map(|(x, b)| x * b).sum::<f64>()).powi(2))
        .sum();
    assert!((fit.param("sigma2").unwrap() - rss / 5.0).abs() < 1e-9);
}

#[test]
fn oracle_log_likelihood_agrees_with_fit() {
    let rows = SMALL[0];
    let data = Dataset::from_pairs("s", rows).unwrap();
    let nb = fit_powerlaw_negbin(&data, &FitOptions::default()).unwrap();
    let ll = negbin_ll(
        nb.param("log_y0").unwrap(),
        nb.param("beta").unwrap(),
        nb.dispersion.unwrap(),
        rows,
    );
    assert!((ll - nb.log_likelihood).abs() < 1e-9 * ll.abs());
    let p = fit_powerlaw_poisson(&data, &FitOptions::default()).unwrap();
    let ll = poisson_ll(p.param("log_y0").unwrap(), p.param("beta").unwrap(), rows);
    assert!((ll - p.log_likelihood).abs() < 1e-9 * ll.abs());
}
