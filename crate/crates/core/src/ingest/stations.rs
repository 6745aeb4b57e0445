use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{read_file, IngestError};
use crate::gap::ChargerLevelCounts;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationRecord {
    pub id: String,
    pub longitude: f64,
    pub latitude: f64,
    pub level1: u64,
    pub level2: u64,
    pub dcfast: u64,
}

impl StationRecord {
    pub fn levels(&self) -> ChargerLevelCounts {
        ChargerLevelCounts::new(self.level1, self.level2, self.dcfast)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum StationId {
    Text(String),
    Number(serde_json::Number),
}

#[derive(Deserialize)]
struct RawStation {
    id: StationId,
    longitude: f64,
    latitude: f64,
    #[serde(default)]
    level1: u64,
    #[serde(default)]
    level2: u64,
    #[serde(default)]
    dcfast: u64,
}

/// Valid stations plus the per-record rejections.
#[derive(Debug, Default)]
pub struct StationBatch {
    pub stations: Vec<StationRecord>,
    /// One [`IngestError::InvalidCoordinate`] per rejected record.
    pub rejected: Vec<IngestError>,
}

impl StationBatch {
    pub fn parsed(&self) -> usize {
        self.stations.len() + self.rejected.len()
    }
}

pub fn parse_stations_json(path: &Path) -> Result<StationBatch, IngestError> {
    parse_stations_json_str(&read_file(path)?)
}

/// Parses a JSON array of `{id, longitude, latitude, level1?, level2?, dcfast?}`.
pub fn parse_stations_json_str(text: &str) -> Result<StationBatch, IngestError> {
    let raw: Vec<RawStation> =
        serde_json::from_str(text).map_err(|e| IngestError::MalformedJson(e.to_string()))?;
    let mut batch = StationBatch::default();
    for r in raw {
        let id = match r.id {
            StationId::Text(s) => s,
            StationId::Number(n) => n.to_string(),
        };
        let in_range =
            (-180.0..=180.0).contains(&r.longitude) && (-90.0..=90.0).contains(&r.latitude);
        if !in_range {
            batch.rejected.push(IngestError::InvalidCoordinate {
                id,
                longitude: r.longitude,
                latitude: r.latitude,
            });
            continue;
        }
        batch.stations.push(StationRecord {
            id,
            longitude: r.longitude,
            latitude: r.latitude,
            level1: r.level1,
            level2: r.level2,
            dcfast: r.dcfast,
        });
    }
    Ok(batch)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_array() {
        let b = parse_stations_json_str("[]").unwrap();
        assert!(b.stations.is_empty() && b.rejected.is_empty());
    }

    #[test]
    fn absent_levels_default_to_zero() {
        let b = parse_stations_json_str(
            r#"[{"id": 7, "longitude": -86.5, "latitude": 32.4, "dcfast": 2}]"#,
        )
        .unwrap();
        assert_eq!(b.stations[0].id, "7");
        assert_eq!(b.stations[0].levels(), ChargerLevelCounts::new(0, 0, 2));
    }

    #[test]
    fn out_of_range_latitude_is_collected() {
        let text = r#"[
            {"id": "a", "longitude": 0.0, "latitude": 95.0, "level2": 1},
            {"id": "b", "longitude": 10.0, "latitude": 45.0, "level2": 1}
        ]"#;
        let b = parse_stations_json_str(text).unwrap();
        assert_eq!(b.stations.len(), 1);
        assert_eq!(b.parsed(), 2);
        assert!(matches!(&b.rejected[0], IngestError::InvalidCoordinate { id, .. } if id == "a"));
    }

    #[test]
    fn malformed_json() {
        assert!(matches!(
            parse_stations_json_str(r#"[{"id": "a"}]"#),
            Err(IngestError::MalformedJson(_))
        ));
        assert!(matches!(
            parse_stations_json_str("{"),
            Err(IngestError::MalformedJson(_))
        ));
    }
}
