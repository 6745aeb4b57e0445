use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::geocode::Geocoded;
use super::{normalize_fips, read_file, CountyRecord, IngestError};
use crate::dataset::{Dataset, DatasetError, Observation};
use crate::gap::{county_power, ChargerLevelCounts};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JoinReport {
    pub records: Vec<CountyRecord>,
    /// Counties with no gasoline row, filled with 0.
    pub gas_imputed: usize,
    /// Counties with no geocoded station, filled with 0.
    pub evse_imputed: usize,
    /// Gasoline rows whose fips is absent from the population table.
    pub gas_dropped: usize,
    /// Geocoded counties absent from the population table.
    pub evse_dropped: usize,
}

/// One record per population fips, in fips order. The population table
/// defines the county universe.
pub fn join_counties(
    population: &BTreeMap<String, u64>,
    gas: &BTreeMap<String, u64>,
    geocoded: &Geocoded,
) -> JoinReport {
    let mut gas_imputed = 0;
    let mut evse_imputed = 0;
    let records = population
        .iter()
        .map(|(fips, &pop)| {
            let gas_stations = gas.get(fips).copied().unwrap_or_else(|| {
                gas_imputed += 1;
                0
            });
            let charging = geocoded.by_county.get(fips).copied().unwrap_or_else(|| {
                evse_imputed += 1;
                Default::default()
            });
            CountyRecord {
                fips: fips.clone(),
                population: pop,
                gas_stations,
                evse_stations: charging.stations,
                evse_ports: charging.ports,
                evse_levels: charging.levels,
                evse_power_w: county_power(&charging.levels),
            }
        })
        .collect();
    let gas_dropped = gas.keys().filter(|k| !population.contains_key(*k)).count();
    let evse_dropped = geocoded
        .by_county
        .keys()
        .filter(|k| !population.contains_key(*k))
        .count();
    log::info!(
        "joined {} counties; imputed zero gasoline for {gas_imputed}, zero charging for {evse_imputed}; \
         dropped {gas_dropped} gasoline and {evse_dropped} charging counties outside the population table",
        population.len()
    );
    JoinReport {
        records,
        gas_imputed,
        evse_imputed,
        gas_dropped,
        evse_dropped,
    }
}

const HEADER: &str =
    "fips,population,gas_stations,evse_stations,evse_ports,level1,level2,dcfast,evse_power_w";

/// Canonical serialisation: header plus one row per county in fips order.
pub fn counties_to_csv(records: &[CountyRecord]) -> String {
    let mut sorted: Vec<&CountyRecord> = records.iter().collect();
    sorted.sort_by(|a, b| a.fips.cmp(&b.fips));
    let mut out = format!("{HEADER}\n");
    for r in sorted {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.fips,
            r.population,
            r.gas_stations,
            r.evse_stations,
            r.evse_ports,
            r.evse_levels.level1,
            r.evse_levels.level2,
            r.evse_levels.dcfast,
            r.evse_power_w
        ));
    }
    out
}

pub fn read_counties_csv(path: &Path) -> Result<Vec<CountyRecord>, IngestError> {
    read_counties_csv_str(&path.display().to_string(), &read_file(path)?)
}

pub fn read_counties_csv_str(name: &str, text: &str) -> Result<Vec<CountyRecord>, IngestError> {
    let malformed = |line: u64, reason: String| IngestError::MalformedRow {
        file: name.to_string(),
        line,
        reason,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| malformed(1, e.to_string()))?;
    if headers.iter().collect::<Vec<_>>().join(",") != HEADER {
        return Err(malformed(1, format!("expected header `{HEADER}`")));
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for record in rdr.records() {
        let record =
            record.map_err(|e| malformed(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        let int = |i: usize| -> Result<u64, IngestError> {
            record.get(i).and_then(|v| v.parse().ok()).ok_or_else(|| {
                malformed(
                    line,
                    format!("column {} is not a non-negative integer", i + 1),
                )
            })
        };
        let fips = normalize_fips(record.get(0).unwrap_or(""))
            .ok_or_else(|| malformed(line, "invalid fips".into()))?;
        if !seen.insert(fips.clone()) {
            return Err(IngestError::DuplicateFips(fips));
        }
        let population = int(1)?;
        if population == 0 {
            return Err(malformed(line, "population must be at least 1".into()));
        }
        let evse_power_w: f64 = record
            .get(8)
            .and_then(|v| v.parse().ok())
            .filter(|v: &f64| *v >= 0.0)
            .ok_or_else(|| malformed(line, "evse_power_w is not a non-negative number".into()))?;
        out.push(CountyRecord {
            fips,
            population,
            gas_stations: int(2)?,
            evse_stations: int(3)?,
            evse_ports: int(4)?,
            evse_levels: ChargerLevelCounts::new(int(5)?, int(6)?, int(7)?),
            evse_power_w,
        });
    }
    Ok(out)
}

fn dataset_from(
    label: &str,
    records: &[CountyRecord],
    count: impl Fn(&CountyRecord) -> u64,
) -> Result<Dataset, DatasetError> {
    Dataset::new(
        label,
        records
            .iter()
            .map(|r| Observation::new(r.population, count(r)))
            .collect(),
    )
}

/// `(population, charging stations)` per county.
pub fn evse_dataset(records: &[CountyRecord]) -> Result<Dataset, DatasetError> {
    dataset_from("evse", records, |r| r.evse_stations)
}

/// `(population, gasoline stations)` per county.
pub fn gasoline_dataset(records: &[CountyRecord]) -> Result<Dataset, DatasetError> {
    dataset_from("gasoline", records, |r| r.gas_stations)
}
