//! Seeded synthetic data: NB2 power-law datasets and complete raw snapshots
//! (population, gasoline, station and county-polygon files).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::dataset::{Dataset, Observation};

/// Draws from NB2 with mean `mu` and dispersion `r` as a gamma-Poisson mixture.
pub fn sample_negbin<R: Rng + ?Sized>(rng: &mut R, mu: f64, r: f64) -> u64 {
    if mu <= 0.0 {
        return 0;
    }
    let rate = Gamma::new(r, mu / r)
        .expect("positive shape and scale")
        .sample(rng);
    if rate <= 0.0 {
        return 0;
    }
    Poisson::new(rate).expect("positive rate").sample(rng) as u64
}

/// Population drawn log-uniformly on `[min, max]`, rounded to an integer ≥ 1.
pub fn sample_population<R: Rng + ?Sized>(rng: &mut R, min: f64, max: f64) -> u64 {
    let t: f64 = rng.gen_range(min.ln()..=max.ln());
    t.exp().round().max(1.0) as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawSpec {
    pub y0: f64,
    pub beta: f64,
    pub dispersion: f64,
    pub rows: usize,
    pub population_min: f64,
    pub population_max: f64,
}

impl Default for PowerLawSpec {
    fn default() -> Self {
        Self {
            y0: 2.0,
            beta: 1.1,
            dispersion: 1.5,
            rows: 3000,
            population_min: 1e2,
            population_max: 1e7,
        }
    }
}

impl PowerLawSpec {
    pub fn mean(&self, population: f64) -> f64 {
        self.y0 * population.powf(self.beta)
    }
}

/// `rows` observations with `N` log-uniform and `Y ~ NB2(Y₀N^β, r)`.
pub fn synthetic_dataset(label: &str, spec: &PowerLawSpec, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..spec.rows)
        .map(|_| {
            let n = sample_population(&mut rng, spec.population_min, spec.population_max);
            Observation::new(
                n,
                sample_negbin(&mut rng, spec.mean(n as f64), spec.dispersion),
            )
        })
        .collect();
    Dataset::new(label, rows).expect("populations are at least 1")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnapshotSpec {
    pub counties: usize,
    pub gasoline: PowerLawSpec,
    pub evse: PowerLawSpec,
    /// Stations placed outside every county.
    pub offshore_stations: usize,
    /// Every k-th county is left out of the gasoline table.
    pub gas_gap_every: usize,
}

impl Default for SnapshotSpec {
    fn default() -> Self {
        Self {
            counties: 50,
            gasoline: PowerLawSpec {
                y0: 0.02,
                beta: 0.77,
                dispersion: 8.0,
                rows: 0,
                population_min: 2e3,
                population_max: 2e6,
            },
            evse: PowerLawSpec {
                y0: 1e-5,
                beta: 1.17,
                dispersion: 2.0,
                rows: 0,
                population_min: 2e3,
                population_max: 2e6,
            },
            offshore_stations: 3,
            gas_gap_every: 17,
        }
    }
}

/// Raw input files, as text, in the formats `ingest` reads.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub population_csv: String,
    pub gas_csv: String,
    pub stations_json: String,
    pub counties_geojson: String,
}

/// Counties are unit squares on a 10-wide grid anchored at (−100°, 30°).
pub fn synthetic_snapshot(spec: &SnapshotSpec, seed: u64) -> Snapshot {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut population_csv = String::from("fips,population\n");
    let mut gas_csv = String::from("fips,gas_stations\n");
    let mut features = Vec::with_capacity(spec.counties);
    let mut stations = Vec::new();

    for i in 0..spec.counties {
        let fips = format!("{:02}{:03}", 1 + i / 500, 1 + 2 * (i % 500));
        let (x0, y0) = (-100.0 + (i % 10) as f64, 30.0 + (i / 10) as f64);
        let pop = sample_population(
            &mut rng,
            spec.gasoline.population_min,
            spec.gasoline.population_max,
        );
        let n = pop as f64;
        let gas = sample_negbin(&mut rng, spec.gasoline.mean(n), spec.gasoline.dispersion);
        let evse = sample_negbin(&mut rng, spec.evse.mean(n), spec.evse.dispersion);

        population_csv.push_str(&format!("{fips},{pop}\n"));
        if spec.gas_gap_every == 0 || (i + 1) % spec.gas_gap_every != 0 {
            gas_csv.push_str(&format!("{fips},{gas}\n"));
        }
        features.push(json!({
            "type": "Feature",
            "properties": { "fips": fips },
            "geometry": {
                "type": "Polygon",
                "coordinates": [[[x0, y0], [x0 + 1.0, y0], [x0 + 1.0, y0 + 1.0], [x0, y0 + 1.0], [x0, y0]]]
            }
        }));
        for k in 0..evse {
            let lon = x0 + rng.gen_range(0.01..0.99);
            let lat = y0 + rng.gen_range(0.01..0.99);
            stations.push(station_json(&mut rng, format!("{fips}-{k}"), lon, lat));
        }
    }
    for k in 0..spec.offshore_stations {
        let lat = rng.gen_range(0.0..10.0);
        stations.push(station_json(&mut rng, format!("offshore-{k}"), -140.0, lat));
    }

    Snapshot {
        population_csv,
        gas_csv,
        stations_json: pretty(&json!(stations)),
        counties_geojson: pretty(&json!({ "type": "FeatureCollection", "features": features })),
    }
}

fn station_json<R: Rng>(rng: &mut R, id: String, lon: f64, lat: f64) -> serde_json::Value {
    let mut v = json!({ "id": id, "longitude": lon, "latitude": lat });
    let level2: u64 = rng.gen_range(1..=4);
    v["level2"] = json!(level2);
    if rng.gen_bool(0.2) {
        v["dcfast"] = json!(rng.gen_range(1..=6u64));
    }
    if rng.gen_bool(0.1) {
        v["level1"] = json!(1);
    }
    v
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value serialises");
    s.push('\n');
    s
}
