//! Local data snapshots: county population and gasoline station tables,
//! charging station locations, county polygons, and the joined per-county
//! records the models consume.

mod geocode;
mod geometry;
mod join;
mod stations;
mod tables;

pub use geocode::{geocode_stations, CountyCharging, Geocoded};
pub use geometry::{
    parse_counties_geojson, parse_counties_geojson_str, point_in_polygon, BoundingBox, CountyShape,
    Polygon, Ring,
};
pub use join::{
    counties_to_csv, evse_dataset, gasoline_dataset, join_counties, read_counties_csv,
    read_counties_csv_str, JoinReport,
};
pub use stations::{parse_stations_json, parse_stations_json_str, StationBatch, StationRecord};
pub use tables::{parse_gas_csv, parse_gas_reader, parse_population_csv, parse_population_reader};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gap::ChargerLevelCounts;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}: malformed row at line {line}: {reason}")]
    MalformedRow {
        file: String,
        line: u64,
        reason: String,
    },
    #[error("duplicate fips code {0}")]
    DuplicateFips(String),
    #[error("malformed JSON: {0}")]
    MalformedJson(String),
    #[error("station {id}: coordinate ({longitude}, {latitude}) out of range")]
    InvalidCoordinate {
        id: String,
        longitude: f64,
        latitude: f64,
    },
    #[error("county {fips}: invalid geometry: {reason}")]
    InvalidGeometry { fips: String, reason: String },
}

pub(crate) fn read_file(path: &std::path::Path) -> Result<String, IngestError> {
    std::fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Normalises a county code to five digits, left-padding short numeric codes.
pub fn normalize_fips(raw: &str) -> Option<String> {
    let raw = raw.trim();
    if raw.is_empty() || raw.len() > 5 || !raw.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    Some(format!("{raw:0>5}"))
}

/// One county's population, station counts, and charger power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountyRecord {
    pub fips: String,
    pub population: u64,
    pub gas_stations: u64,
    pub evse_stations: u64,
    pub evse_ports: u64,
    pub evse_levels: ChargerLevelCounts,
    pub evse_power_w: f64,
}
