use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::geometry::{point_in_polygon, CountyShape};
use super::stations::StationRecord;
use crate::gap::ChargerLevelCounts;

/// Charging stations aggregated within one county.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountyCharging {
    pub stations: u64,
    pub ports: u64,
    pub levels: ChargerLevelCounts,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Geocoded {
    pub by_county: BTreeMap<String, CountyCharging>,
    /// Stations inside no county polygon.
    pub unmatched: Vec<StationRecord>,
}

impl Geocoded {
    pub fn matched_stations(&self) -> u64 {
        self.by_county.values().map(|c| c.stations).sum()
    }
}

/// Assigns each station to the lowest-fips county whose polygon contains it.
pub fn geocode_stations(stations: &[StationRecord], shapes: &[CountyShape]) -> Geocoded {
    let mut order: Vec<&CountyShape> = shapes.iter().collect();
    order.sort_by(|a, b| a.fips.cmp(&b.fips));
    let indexed: Vec<_> = order.iter().map(|s| (s.bounding_box(), *s)).collect();

    let assignment: Vec<Option<&str>> = stations
        .par_iter()
        .map(|st| {
            let pt = (st.longitude, st.latitude);
            indexed
                .iter()
                .find(|(bb, shape)| bb.contains(pt) && point_in_polygon(pt, shape))
                .map(|(_, shape)| shape.fips.as_str())
        })
        .collect();

    let mut out = Geocoded::default();
    for (st, fips) in stations.iter().zip(assignment) {
        match fips {
            Some(fips) => {
                let entry = out.by_county.entry(fips.to_string()).or_default();
                entry.stations += 1;
                entry.ports += st.levels().ports();
                entry.levels = entry.levels + st.levels();
            }
            None => out.unmatched.push(st.clone()),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::geometry::{Polygon, Ring};

    fn cell(fips: &str, x0: f64, y0: f64) -> CountyShape {
        let ring = Ring::new(vec![
            (x0, y0),
            (x0 + 1.0, y0),
            (x0 + 1.0, y0 + 1.0),
            (x0, y0 + 1.0),
            (x0, y0),
        ])
        .unwrap();
        CountyShape::new(
            fips,
            vec![Polygon {
                exterior: ring,
                holes: vec![],
            }],
        )
    }

    fn station(id: &str, lon: f64, lat: f64, l2: u64) -> StationRecord {
        StationRecord {
            id: id.into(),
            longitude: lon,
            latitude: lat,
            level1: 0,
            level2: l2,
            dcfast: 1,
        }
    }

    #[test]
    fn single_station_single_county() {
        let g = geocode_stations(&[station("a", 0.5, 0.5, 2)], &[cell("01001", 0.0, 0.0)]);
        let c = g.by_county["01001"];
        assert_eq!((c.stations, c.ports), (1, 3));
        assert!(g.unmatched.is_empty());
    }

    #[test]
    fn shared_border_goes_to_lowest_fips() {
        let shapes = [cell("01003", 1.0, 0.0), cell("01001", 0.0, 0.0)];
        let g = geocode_stations(&[station("edge", 1.0, 0.5, 1)], &shapes);
        assert_eq!(g.by_county.len(), 1);
        assert_eq!(g.by_county["01001"].stations, 1);
    }

    #[test]
    fn stations_outside_all_counties_are_reported() {
        let g = geocode_stations(
            &[station("in", 0.5, 0.5, 1), station("sea", 9.0, 9.0, 1)],
            &[cell("01001", 0.0, 0.0)],
        );
        assert_eq!(g.matched_stations(), 1);
        assert_eq!(g.unmatched[0].id, "sea");
    }
}
