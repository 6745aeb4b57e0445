use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use evse_scaling::gap::{pump_power, ParityParams};
use evse_scaling::glm::ScalingFit;
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_evse-scaling");
const HEADER: &str =
    "fips,population,gas_stations,evse_stations,evse_ports,level1,level2,dcfast,evse_power_w";

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_counties(dir: &Path, rows: &[&str]) {
    fs::write(
        dir.join("counties.csv"),
        format!("{HEADER}\n{}\n", rows.join("\n")),
    )
    .unwrap();
}

fn read_fit(dir: &Path, dataset: &str, family: &str) -> ScalingFit {
    let text = fs::read_to_string(
        dir.join("fits")
            .join(dataset)
            .join(format!("{family}.json")),
    )
    .unwrap();
    serde_json::from_str(&text).unwrap()
}

fn gap_rows(dir: &Path) -> Vec<(String, f64, f64)> {
    fs::read_to_string(dir.join("county_gap.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (
                f[0].to_string(),
                f[3].parse().unwrap(),
                f[4].parse().unwrap(),
            )
        })
        .collect()
}

const THREE_COUNTIES: [&str; 3] = [
    "01001,1000,3,0,0,0,0,0,0",
    "01003,20000,25,2,2,0,2,0,14400",
    "01005,300000,140,9,12,0,8,4,257600",
];

#[test]
fn synthetic_fit_is_deterministic() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    for dir in [&a, &b] {
        let out = run(&[
            "fit",
            "--family",
            "nb",
            "--dataset",
            "synthetic",
            "--seed",
            "7",
            "--out",
            path(dir.path()),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    for file in ["power_law_neg_bin.json", "null_neg_bin.json", "data.csv"] {
        let read = |d: &TempDir| fs::read(d.path().join("fits/synthetic").join(file)).unwrap();
        assert_eq!(read(&a), read(&b), "{file}");
    }
}

#[test]
fn missing_input_exits_3_with_path() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nowhere");
    let out = run(&[
        "fit",
        "--dataset",
        "evse",
        "--input",
        path(&missing),
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nowhere/counties.csv"));
}

#[test]
fn usage_errors_exit_64() {
    let dir = TempDir::new().unwrap();
    let out = run(&["meanfield", "--out", path(dir.path()), "--alpha-grid", ""]);
    assert_eq!(out.status.code(), Some(64));
    assert_eq!(
        run(&["fit", "--family", "cubic", "--out", "x"])
            .status
            .code(),
        Some(64)
    );
}

#[test]
fn compare_single_fit_gives_one_row() {
    let dir = TempDir::new().unwrap();
    let d = path(dir.path());
    assert!(run(&[
        "fit",
        "--family",
        "poisson",
        "--dataset",
        "synthetic",
        "--rows",
        "200",
        "--out",
        d
    ])
    .status
    .success());
    let out = run(&["compare", "--dataset", "synthetic", "--out", d]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(dir.path().join("comparison/synthetic.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("power_law_poisson,"));
}

#[test]
fn compare_rejects_fits_from_other_data() {
    let dir = TempDir::new().unwrap();
    let d = path(dir.path());
    write_counties(dir.path(), &THREE_COUNTIES);
    assert!(run(&["fit", "--family", "poisson", "--out", d])
        .status
        .success());
    fs::copy(
        dir.path().join("fits/gasoline/power_law_poisson.json"),
        dir.path().join("fits/evse/power_law_poisson.json"),
    )
    .unwrap();
    let out = run(&["compare", "--dataset", "evse", "--out", d]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("different data"));
}

#[test]
fn compare_without_fits_exits_3() {
    let dir = TempDir::new().unwrap();
    assert_eq!(
        run(&["compare", "--out", path(dir.path())]).status.code(),
        Some(3)
    );
    assert_eq!(
        run(&["gap", "--out", path(dir.path())]).status.code(),
        Some(3)
    );
}

#[test]
fn gap_matches_hand_computation() {
    let dir = TempDir::new().unwrap();
    let d = path(dir.path());
    write_counties(dir.path(), &THREE_COUNTIES);
    assert!(
        run(&["fit", "--family", "nb", "--dataset", "gasoline", "--out", d])
            .status
            .success()
    );
    let out = run(&["gap", "--out", d]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let fit = read_fit(dir.path(), "gasoline", "power_law_neg_bin");
    let (log_y0, beta) = (fit.param("log_y0").unwrap(), fit.param("beta").unwrap());
    // 10 gal/min · 60 · 33.705 kWh/gal · 1000 W/kW = 20 223 000 W, a third of it over 400 kW.
    let ratio = 20_223_000.0 / 3.0 / 400_000.0;
    let observed = [0.0, 2.0, 9.0];
    for ((row, n), obs) in gap_rows(dir.path())
        .iter()
        .zip([1000.0f64, 20000.0, 300000.0])
        .zip(observed)
    {
        let predicted = ratio * (log_y0 + beta * n.ln()).exp();
        assert!(
            (row.1 - predicted).abs() < 1e-9 * predicted,
            "{}: {} vs {predicted}",
            row.0,
            row.1
        );
        assert!((row.2 - (predicted - obs)).abs() < 1e-9 * predicted);
    }
}

#[test]
fn unit_ratio_gap_is_predicted_gasoline_minus_observed() {
    let dir = TempDir::new().unwrap();
    let d = path(dir.path());
    write_counties(dir.path(), &THREE_COUNTIES);
    assert!(
        run(&["fit", "--family", "nb", "--dataset", "gasoline", "--out", d])
            .status
            .success()
    );
    let p = ParityParams::default();
    let p_evse = format!("{}", p.consumption_ratio * pump_power(&p));
    let out = run(&[
        "gap",
        "--out",
        d,
        "--p-evse",
        &p_evse,
        "--pumps-per-station",
        "8",
        "--ports-per-station",
        "8",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let fit = read_fit(dir.path(), "gasoline", "power_law_neg_bin");
    for ((_, predicted, gap), (n, obs)) in
        gap_rows(dir.path())
            .iter()
            .zip([(1000.0f64, 0.0), (20000.0, 2.0), (300000.0, 9.0)])
    {
        let gs = fit.predict(n);
        assert!((predicted - gs).abs() < 1e-9 * gs);
        assert!((gap - (gs - obs)).abs() < 1e-9 * gs);
    }
}

#[test]
fn meanfield_default_grid() {
    let dir = TempDir::new().unwrap();
    let out = run(&["meanfield", "--out", path(dir.path())]);
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("fig2a_avg_speed.csv")).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 5 * 999);
    let spot = rows
        .iter()
        .filter(|r| r[0] == 1920.0)
        .min_by(|a, b| {
            (a[1] - 1.0 / 3.0)
                .abs()
                .total_cmp(&(b[1] - 1.0 / 3.0).abs())
        })
        .unwrap();
    assert!(
        (spot[2] * 2.23694 - 28.6).abs() < 0.15,
        "{}",
        spot[2] * 2.23694
    );
}

#[test]
fn meanfield_accepts_power_suffixes_and_alpha_lists() {
    let dir = TempDir::new().unwrap();
    let out = run(&[
        "meanfield",
        "--out",
        path(dir.path()),
        "--power-levels",
        "1.92kW,0.4MW",
        "--alpha-grid",
        "0.1,0.5",
    ]);
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("fig2a_avg_speed.csv")).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.lines().nth(3).unwrap().starts_with("400000,0.1,"));
}
