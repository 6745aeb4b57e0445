//! File-level orchestration behind the command-line subcommands.
//!
//! A run works in one directory: `ingest` writes `counties.csv`, `fit`
//! writes `fits/<dataset>/`, and `compare`, `gap` and `meanfield` write
//! their reports and plot data next to them. Every step records the files it
//! produced in `manifest.json`.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Dataset, DatasetError};
use crate::gap::{
    gaps_to_csv, parity_ratio, power_parity_curve, station_gap, station_ratio, GapError,
    GasBaseline, ParityParams,
};
use crate::glm::{
    fit_gaussian_linear, fit_gaussian_quadratic, fit_loglog_ols, fit_null, fit_powerlaw_negbin,
    fit_powerlaw_poisson, Family, FitError, FitFlag, FitOptions, NullFamily, ScalingFit,
};
use crate::ingest::{
    counties_to_csv, evse_dataset, gasoline_dataset, geocode_stations, join_counties,
    parse_counties_geojson, parse_gas_csv, parse_population_csv, parse_stations_json,
    read_counties_csv, CountyRecord, IngestError,
};
use crate::meanfield::{open_alpha_grid, sweep_curves, sweep_to_csv, MeanFieldError};
use crate::stats::{self, compare_models, StatsError, WaldResult};
use crate::synthetic::{synthetic_dataset, synthetic_snapshot, PowerLawSpec, SnapshotSpec};

pub const COUNTIES_FILE: &str = "counties.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("missing fit file {0}")]
    MissingFit(PathBuf),
    #[error("usage: {0}")]
    Usage(String),
    #[error("station conservation violated: {0}")]
    Conservation(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Gap(#[from] GapError),
    #[error(transparent)]
    MeanField(#[from] MeanFieldError),
    #[error("malformed fit file {path}: {reason}")]
    MalformedFit { path: String, reason: String },
}

impl PipelineError {
    /// 1 data error, 2 convergence failure, 3 I/O, 64 usage.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Io { .. }
            | PipelineError::MissingFit(_)
            | PipelineError::Dataset(DatasetError::Io { .. })
            | PipelineError::Ingest(IngestError::Io { .. }) => 3,
            PipelineError::Fit(FitError::NonConvergence { .. })
            | PipelineError::Gap(GapError::UnconvergedFit(_)) => 2,
            PipelineError::Usage(_) | PipelineError::MeanField(MeanFieldError::EmptyGrid(_)) => 64,
            _ => 1,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), PipelineError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    fs::write(path, contents).map_err(io_err(path))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("value serialises");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub description: String,
}

/// Output files keyed by role, kept sorted for stable serialisation.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub figures: BTreeMap<String, ManifestEntry>,
    pub outputs: BTreeMap<String, ManifestEntry>,
}

impl Manifest {
    pub fn load(dir: &Path) -> Result<Self, PipelineError> {
        let path = dir.join(MANIFEST_FILE);
        if !path.exists() {
            return Ok(Self::default());
        }
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        serde_json::from_str(&text).map_err(|e| PipelineError::MalformedFit {
            path: path.display().to_string(),
            reason: e.to_string(),
        })
    }

    fn record(
        dir: &Path,
        figures: &[(&str, &str, &str)],
        outputs: &[(&str, &str, &str)],
    ) -> Result<(), PipelineError> {
        let mut m = Self::load(dir)?;
        let entry = |file: &str, description: &str| ManifestEntry {
            file: file.to_string(),
            description: description.to_string(),
        };
        for (key, file, desc) in figures {
            m.figures.insert(key.to_string(), entry(file, desc));
        }
        for (key, file, desc) in outputs {
            m.outputs.insert(key.to_string(), entry(file, desc));
        }
        write_file(&dir.join(MANIFEST_FILE), &to_json(&m))
    }
}

// ---------------------------------------------------------------- ingest

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub counties: usize,
    pub stations_parsed: usize,
    pub stations_rejected: usize,
    pub stations_matched: u64,
    pub stations_unmatched: usize,
    pub gas_imputed: usize,
    pub evse_imputed: usize,
    pub gas_dropped: usize,
    pub evse_dropped: usize,
    pub evse_zero_fraction: f64,
    pub gas_zero_fraction: f64,
}

#[derive(Serialize)]
struct UnmatchedReport<'a> {
    unmatched: &'a [crate::ingest::StationRecord],
    rejected: Vec<String>,
}

/// Reads `population.csv`, `gas.csv`, `stations.json` and `counties.geojson`
/// from `input` and writes `counties.csv` and `unmatched.json` to `out`.
pub fn run_ingest(input: &Path, out: &Path) -> Result<IngestSummary, PipelineError> {
    let population = parse_population_csv(&input.join("population.csv"))?;
    let gas = parse_gas_csv(&input.join("gas.csv"))?;
    let batch = parse_stations_json(&input.join("stations.json"))?;
    let shapes = parse_counties_geojson(&input.join("counties.geojson"))?;
    for rejected in &batch.rejected {
        log::warn!("{rejected}");
    }

    let geocoded = geocode_stations(&batch.stations, &shapes);
    let matched = geocoded.matched_stations();
    if matched as usize + geocoded.unmatched.len() != batch.stations.len() {
        return Err(PipelineError::Conservation(format!(
            "{matched} matched + {} unmatched != {} stations",
            geocoded.unmatched.len(),
            batch.stations.len()
        )));
    }
    let report = join_counties(&population, &gas, &geocoded);
    let records = &report.records;
    let zero_fraction = |f: fn(&CountyRecord) -> u64| {
        records.iter().filter(|r| f(r) == 0).count() as f64 / records.len().max(1) as f64
    };
    let summary = IngestSummary {
        counties: records.len(),
        stations_parsed: batch.parsed(),
        stations_rejected: batch.rejected.len(),
        stations_matched: matched,
        stations_unmatched: geocoded.unmatched.len(),
        gas_imputed: report.gas_imputed,
        evse_imputed: report.evse_imputed,
        gas_dropped: report.gas_dropped,
        evse_dropped: report.evse_dropped,
        evse_zero_fraction: zero_fraction(|r| r.evse_stations),
        gas_zero_fraction: zero_fraction(|r| r.gas_stations),
    };

    write_file(&out.join(COUNTIES_FILE), &counties_to_csv(records))?;
    let unmatched = UnmatchedReport {
        unmatched: &geocoded.unmatched,
        rejected: batch.rejected.iter().map(ToString::to_string).collect(),
    };
    write_file(&out.join("unmatched.json"), &to_json(&unmatched))?;
    write_file(&out.join("ingest_summary.json"), &to_json(&summary))?;
    Manifest::record(
        out,
        &[],
        &[
            ("counties", COUNTIES_FILE, "joined per-county records"),
            (
                "unmatched",
                "unmatched.json",
                "stations outside every county and rejected records",
            ),
            (
                "ingest_summary",
                "ingest_summary.json",
                "ingestion counts and imputations",
            ),
        ],
    )?;
    Ok(summary)
}

// ---------------------------------------------------------------- fit

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetChoice {
    Evse,
    Gasoline,
    Synthetic,
}

impl DatasetChoice {
    pub fn label(self) -> &'static str {
        match self {
            DatasetChoice::Evse => "evse",
            DatasetChoice::Gasoline => "gasoline",
            DatasetChoice::Synthetic => "synthetic",
        }
    }
}

/// The regression families `fit` can be asked for; nulls are fitted as needed.
pub const FITTABLE: [Family; 5] = [
    Family::PowerLawPoisson,
    Family::PowerLawNegBin,
    Family::GaussianLinear,
    Family::GaussianQuadratic,
    Family::LogLogOls,
];

#[derive(Debug, Clone)]
pub struct FitRequest {
    pub families: Vec<Family>,
    pub datasets: Vec<DatasetChoice>,
    pub options: FitOptions,
    pub seed: u64,
    pub synthetic: PowerLawSpec,
}

impl Default for FitRequest {
    fn default() -> Self {
        Self {
            families: FITTABLE.to_vec(),
            datasets: vec![DatasetChoice::Evse, DatasetChoice::Gasoline],
            options: FitOptions::default(),
            seed: 0,
            synthetic: PowerLawSpec::default(),
        }
    }
}

pub fn fit_family(
    family: Family,
    data: &Dataset,
    opts: &FitOptions,
) -> Result<ScalingFit, FitError> {
    match family {
        Family::PowerLawPoisson => fit_powerlaw_poisson(data, opts),
        Family::PowerLawNegBin => fit_powerlaw_negbin(data, opts),
        Family::GaussianLinear => fit_gaussian_linear(data),
        Family::GaussianQuadratic => fit_gaussian_quadratic(data),
        Family::LogLogOls => fit_loglog_ols(data),
        Family::NullPoisson => fit_null(NullFamily::Poisson, data, opts),
        Family::NullNegBin => fit_null(NullFamily::NegBin, data, opts),
        Family::NullGaussian => fit_null(NullFamily::Gaussian, data, opts),
    }
}

fn null_family(f: NullFamily) -> Family {
    match f {
        NullFamily::Poisson => Family::NullPoisson,
        NullFamily::NegBin => Family::NullNegBin,
        NullFamily::Gaussian => Family::NullGaussian,
    }
}

pub fn fits_dir(work: &Path, label: &str) -> PathBuf {
    work.join("fits").join(label)
}

fn fit_path(work: &Path, label: &str, family: Family) -> PathBuf {
    fits_dir(work, label).join(format!("{}.json", family.as_str()))
}

pub fn load_fit(work: &Path, label: &str, family: Family) -> Result<ScalingFit, PipelineError> {
    let path = fit_path(work, label, family);
    if !path.exists() {
        return Err(PipelineError::MissingFit(path));
    }
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    serde_json::from_str(&text).map_err(|e| PipelineError::MalformedFit {
        path: path.display().to_string(),
        reason: e.to_string(),
    })
}

fn load_counties(work: &Path) -> Result<Vec<CountyRecord>, PipelineError> {
    Ok(read_counties_csv(&work.join(COUNTIES_FILE))?)
}

fn dataset_csv(data: &Dataset) -> String {
    let mut out = String::from("population,count\n");
    for o in data.rows() {
        out.push_str(&format!("{},{}\n", o.population, o.count));
    }
    out
}

/// Fits every requested family plus the nulls they need, writing one JSON
/// file per fit under `fits/<dataset>/` along with the fitted data.
pub fn run_fit(
    input: &Path,
    out: &Path,
    req: &FitRequest,
) -> Result<Vec<ScalingFit>, PipelineError> {
    let mut datasets = Vec::new();
    let mut counties = None;
    for &choice in &req.datasets {
        let data = match choice {
            DatasetChoice::Synthetic => synthetic_dataset(choice.label(), &req.synthetic, req.seed),
            DatasetChoice::Evse | DatasetChoice::Gasoline => {
                if counties.is_none() {
                    counties = Some(load_counties(input)?);
                }
                let records = counties.as_deref().unwrap_or_default();
                if choice == DatasetChoice::Evse {
                    evse_dataset(records)?
                } else {
                    gasoline_dataset(records)?
                }
            }
        };
        datasets.push(data);
    }

    let mut all = Vec::new();
    let mut first_unconverged = None;
    for data in &datasets {
        let mut families = req.families.clone();
        for f in &req.families {
            if let Some(nf) = f.null_counterpart() {
                families.push(null_family(nf));
            }
        }
        families.sort();
        families.dedup();
        let fits: Vec<ScalingFit> = families
            .par_iter()
            .map(|&f| fit_family(f, data, &req.options))
            .collect::<Result<_, _>>()?;
        write_file(
            &fits_dir(out, data.label()).join("data.csv"),
            &dataset_csv(data),
        )?;
        for fit in &fits {
            if fit.has_flag(FitFlag::DispersionBoundary) {
                log::warn!(
                    "{} {}: dispersion at search boundary",
                    data.label(),
                    fit.family
                );
            }
            if !fit.converged && first_unconverged.is_none() {
                first_unconverged = Some(FitError::NonConvergence {
                    family: fit.family,
                    iterations: fit.iterations,
                });
            }
            write_file(&fit_path(out, data.label(), fit.family), &to_json(fit))?;
        }
        all.extend(fits);
    }

    if let Some(records) = &counties {
        let nb = |label: &str| {
            all.iter()
                .find(|f| f.dataset == label && f.family == Family::PowerLawNegBin)
        };
        if let (Some(evse), Some(gas)) = (nb("evse"), nb("gasoline")) {
            write_file(
                &out.join("fig1a_scaling.csv"),
                &scaling_figure(records, evse, gas),
            )?;
            Manifest::record(
                out,
                &[(
                    "fig1a",
                    "fig1a_scaling.csv",
                    "station counts vs population with NB power-law fits",
                )],
                &[],
            )?;
        }
    }
    Manifest::record(
        out,
        &[],
        &[("fits", "fits", "one JSON file per fitted model and dataset")],
    )?;
    match first_unconverged {
        Some(err) => Err(err.into()),
        None => Ok(all),
    }
}

fn scaling_figure(records: &[CountyRecord], evse: &ScalingFit, gas: &ScalingFit) -> String {
    let mut out = String::from("fips,population,evse_stations,gas_stations,evse_fit,gas_fit\n");
    for r in records {
        let n = r.population as f64;
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.fips,
            r.population,
            r.evse_stations,
            r.gas_stations,
            evse.predict(n),
            gas.predict(n)
        ));
    }
    out
}

// ---------------------------------------------------------------- compare

/// Families scored in the model comparison table.
pub const COMPARED: [Family; 4] = [
    Family::PowerLawNegBin,
    Family::PowerLawPoisson,
    Family::GaussianLinear,
    Family::GaussianQuadratic,
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentTest {
    pub family: Family,
    pub beta: f64,
    pub se: f64,
    pub ci95: (f64, f64),
    pub wald_vs_linear: WaldResult,
    pub p_display: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareOutput {
    pub comparison: stats::ModelComparison,
    pub exponent_tests: Vec<ExponentTest>,
}

/// Scores the fits of one dataset and writes `comparison/<dataset>.{csv,json,txt}`.
pub fn run_compare(input: &Path, out: &Path, label: &str) -> Result<CompareOutput, PipelineError> {
    let data_path = fits_dir(input, label).join("data.csv");
    if !data_path.exists() {
        return Err(PipelineError::MissingFit(data_path));
    }
    let data = Dataset::from_csv_path(label, &data_path)?;
    let mut fits = Vec::new();
    for family in COMPARED {
        match load_fit(input, label, family) {
            Ok(fit) => fits.push(fit),
            Err(PipelineError::MissingFit(_)) => {}
            Err(e) => return Err(e),
        }
    }
    if fits.is_empty() {
        return Err(PipelineError::MissingFit(fits_dir(input, label)));
    }
    let mut nulls = HashMap::new();
    for fit in &fits {
        if let Some(nf) = fit.family.null_counterpart() {
            if let std::collections::hash_map::Entry::Vacant(slot) = nulls.entry(nf) {
                slot.insert(load_fit(input, label, null_family(nf))?);
            }
        }
    }
    let comparison = compare_models(&fits, &nulls, &data)?;
    let mut exponent_tests = Vec::new();
    for fit in fits.iter().filter(|f| f.param("beta").is_some()) {
        let wald = stats::wald_test(fit, 1.0)?;
        exponent_tests.push(ExponentTest {
            family: fit.family,
            beta: wald.beta_hat,
            se: wald.se,
            ci95: stats::confidence_interval(fit, 0.95)?,
            p_display: wald.p_display(),
            wald_vs_linear: wald,
        });
    }

    let dir = out.join("comparison");
    write_file(
        &dir.join(format!("{label}.csv")),
        &stats::to_csv(&comparison),
    )?;
    write_file(
        &dir.join(format!("{label}.json")),
        &to_json(&CompareOutput {
            comparison: comparison.clone(),
            exponent_tests: exponent_tests.clone(),
        }),
    )?;
    let mut table = stats::render_table(&comparison);
    for t in &exponent_tests {
        table.push_str(&format!(
            "{}: beta = {:.4} +/- {:.4} (95% CI), SE = {:.4}, W = {:.2}, p {}\n",
            t.family,
            t.beta,
            (t.ci95.1 - t.ci95.0) / 2.0,
            t.se,
            t.wald_vs_linear.w,
            t.p_display
        ));
    }
    write_file(&dir.join(format!("{label}.txt")), &table)?;
    let key = format!("comparison_{label}");
    let file = format!("comparison/{label}.csv");
    Manifest::record(
        out,
        &[],
        &[(
            key.as_str(),
            file.as_str(),
            "model statistics ranked by BIC",
        )],
    )?;
    Ok(CompareOutput {
        comparison,
        exponent_tests,
    })
}

// ---------------------------------------------------------------- gap

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapSummary {
    pub params: ParityParams,
    pub baseline: GasBaseline,
    pub parity_ratio: f64,
    pub station_ratio: f64,
    pub counties: usize,
    pub counties_at_parity: usize,
    pub total_gap: f64,
    pub counties_at_power_parity: usize,
}

/// Writes `county_gap.csv`, `fig1b_power.csv` and `gap_summary.json`.
pub fn run_gap(
    input: &Path,
    out: &Path,
    params: &ParityParams,
    baseline: GasBaseline,
) -> Result<GapSummary, PipelineError> {
    params.validate()?;
    let records = load_counties(input)?;
    let gs_fit = load_fit(
        input,
        DatasetChoice::Gasoline.label(),
        Family::PowerLawNegBin,
    )?;
    let gaps = records
        .iter()
        .map(|c| station_gap(c, &gs_fit, params, baseline))
        .collect::<Result<Vec<_>, _>>()?;

    let populations: Vec<f64> = records.iter().map(|r| r.population as f64).collect();
    let curve = power_parity_curve(&gs_fit, params, &populations)?;
    let mut fig = String::from("fips,population,evse_power_w,gas_equivalent_power_w\n");
    let mut at_power_parity = 0;
    for (r, (_, gas_w)) in records.iter().zip(&curve) {
        if r.evse_power_w >= *gas_w {
            at_power_parity += 1;
        }
        fig.push_str(&format!(
            "{},{},{},{}\n",
            r.fips, r.population, r.evse_power_w, gas_w
        ));
    }

    let summary = GapSummary {
        params: *params,
        baseline,
        parity_ratio: parity_ratio(params),
        station_ratio: station_ratio(params),
        counties: gaps.len(),
        counties_at_parity: gaps.iter().filter(|g| g.gap <= 0.0).count(),
        total_gap: gaps.iter().map(|g| g.gap).sum(),
        counties_at_power_parity: at_power_parity,
    };
    write_file(&out.join("county_gap.csv"), &gaps_to_csv(&gaps))?;
    write_file(&out.join("fig1b_power.csv"), &fig)?;
    write_file(&out.join("gap_summary.json"), &to_json(&summary))?;
    Manifest::record(
        out,
        &[
            (
                "fig1b",
                "fig1b_power.csv",
                "county charger power vs gasoline-equivalent power",
            ),
            ("fig3", "county_gap.csv", "per-county charging station gap"),
        ],
        &[("gap_summary", "gap_summary.json", "national gap totals")],
    )?;
    Ok(summary)
}

// ---------------------------------------------------------------- meanfield

pub const DEFAULT_POWER_LEVELS_W: [f64; 5] = [1_920.0, 7_200.0, 11_500.0, 50_000.0, 400_000.0];
/// Charge fractions traced against charger power in the speed/power plot.
pub const TRADEOFF_ALPHAS: [f64; 4] = [0.002, 0.01, 0.1, 1.0 / 3.0];

#[derive(Debug, Clone, PartialEq)]
pub struct MeanFieldRequest {
    pub power_levels_w: Vec<f64>,
    pub alpha_grid: Vec<f64>,
    pub rho: f64,
    pub cda: f64,
}

impl Default for MeanFieldRequest {
    fn default() -> Self {
        Self {
            power_levels_w: DEFAULT_POWER_LEVELS_W.to_vec(),
            alpha_grid: open_alpha_grid(999),
            rho: 1.225,
            cda: 0.75,
        }
    }
}

/// Log-spaced charger powers from 1 kW to 1 MW, 20 per decade.
pub fn tradeoff_power_grid() -> Vec<f64> {
    (0..=60)
        .map(|k| 1e3 * 10f64.powf(k as f64 / 20.0))
        .collect()
}

/// Writes `fig2a_avg_speed.csv` (speed vs charge fraction per power level)
/// and `fig2b_driving_speed.csv` (speed vs power per charge fraction).
pub fn run_meanfield(out: &Path, req: &MeanFieldRequest) -> Result<usize, PipelineError> {
    let rows = sweep_curves(&req.power_levels_w, &req.alpha_grid, req.rho, req.cda)?;
    let tradeoff = sweep_curves(&tradeoff_power_grid(), &TRADEOFF_ALPHAS, req.rho, req.cda)?;
    write_file(&out.join("fig2a_avg_speed.csv"), &sweep_to_csv(&rows))?;
    write_file(
        &out.join("fig2b_driving_speed.csv"),
        &sweep_to_csv(&tradeoff),
    )?;
    Manifest::record(
        out,
        &[
            (
                "fig2a",
                "fig2a_avg_speed.csv",
                "driving and average speed vs charge fraction",
            ),
            (
                "fig2b",
                "fig2b_driving_speed.csv",
                "driving speed vs charger power",
            ),
        ],
        &[],
    )?;
    Ok(rows.len())
}

/// Parses a power such as `400kW`, `1.92 kW`, `2MW` or `7200` (watts).
pub fn parse_power(text: &str) -> Result<f64, PipelineError> {
    let t = text.trim();
    let lower = t.to_ascii_lowercase();
    let (number, scale) = if let Some(n) = lower.strip_suffix("mw") {
        (n, 1e6)
    } else if let Some(n) = lower.strip_suffix("kw") {
        (n, 1e3)
    } else if let Some(n) = lower.strip_suffix('w') {
        (n, 1.0)
    } else {
        (lower.as_str(), 1.0)
    };
    match number.trim().parse::<f64>() {
        Ok(v) if v.is_finite() && v > 0.0 => Ok(v * scale),
        _ => Err(PipelineError::Usage(format!("invalid power `{t}`"))),
    }
}

/// Comma-separated powers; an empty list is a usage error.
pub fn parse_power_list(text: &str) -> Result<Vec<f64>, PipelineError> {
    let items: Vec<&str> = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    if items.is_empty() {
        return Err(PipelineError::Usage("power level list is empty".into()));
    }
    items.into_iter().map(parse_power).collect()
}

/// Either a point count `n` (the open grid `k/(n+1)`) or a comma-separated
/// list of charge fractions.
pub fn parse_alpha_grid(text: &str) -> Result<Vec<f64>, PipelineError> {
    let t = text.trim();
    if let Ok(n) = t.parse::<usize>() {
        if n == 0 {
            return Err(PipelineError::Usage("alpha grid is empty".into()));
        }
        return Ok(open_alpha_grid(n));
    }
    let items: Vec<&str> = t
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    if items.is_empty() {
        return Err(PipelineError::Usage("alpha grid is empty".into()));
    }
    items
        .into_iter()
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| PipelineError::Usage(format!("invalid alpha `{s}`")))
        })
        .collect()
}

// ---------------------------------------------------------------- snapshot

/// Writes a seeded raw snapshot (the four `ingest` inputs) into `out`.
pub fn write_synthetic_snapshot(
    out: &Path,
    spec: &SnapshotSpec,
    seed: u64,
) -> Result<(), PipelineError> {
    let snap = synthetic_snapshot(spec, seed);
    write_file(&out.join("population.csv"), &snap.population_csv)?;
    write_file(&out.join("gas.csv"), &snap.gas_csv)?;
    write_file(&out.join("stations.json"), &snap.stations_json)?;
    write_file(&out.join("counties.geojson"), &snap.counties_geojson)
}

/// `ingest → fit → compare → gap → meanfield` with default settings.
pub fn run_report(
    raw: &Path,
    out: &Path,
    params: &ParityParams,
    options: &FitOptions,
) -> Result<(), PipelineError> {
    run_ingest(raw, out)?;
    let req = FitRequest {
        options: *options,
        ..Default::default()
    };
    run_fit(out, out, &req)?;
    for label in ["evse", "gasoline"] {
        run_compare(out, out, label)?;
    }
    run_gap(out, out, params, GasBaseline::Fitted)?;
    run_meanfield(out, &MeanFieldRequest::default())?;
    Ok(())
}
