//! Regional (population, count) observations.

use std::fmt;
use std::hash::Hasher;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("row {row}: population must be at least 1")]
    ZeroPopulation { row: usize },
    #[error("malformed row at line {line}: {reason}")]
    MalformedRow { line: usize, reason: String },
    #[error("missing column `{0}` in header")]
    MissingColumn(&'static str),
    #[error("dataset is empty")]
    Empty,
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// One region: population `N` and observed count `Y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Observation {
    pub population: u64,
    pub count: u64,
}

impl Observation {
    pub fn new(population: u64, count: u64) -> Self {
        Self { population, count }
    }
}

/// A labelled set of observations.
///
/// Rows are held in canonical `(population, count)` order so that every
/// fitted quantity is independent of the order rows were supplied in, down
/// to the last bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    label: String,
    rows: Vec<Observation>,
}

impl Dataset {
    pub fn new(label: impl Into<String>, mut rows: Vec<Observation>) -> Result<Self, DatasetError> {
        if rows.is_empty() {
            return Err(DatasetError::Empty);
        }
        if let Some(row) = rows.iter().position(|o| o.population == 0) {
            return Err(DatasetError::ZeroPopulation { row });
        }
        rows.sort_unstable();
        Ok(Self {
            label: label.into(),
            rows,
        })
    }

    pub fn from_pairs(
        label: impl Into<String>,
        pairs: &[(u64, u64)],
    ) -> Result<Self, DatasetError> {
        Self::new(
            label,
            pairs.iter().map(|&(n, y)| Observation::new(n, y)).collect(),
        )
    }

    /// Reads a two-column CSV with header `population,count`.
    pub fn from_csv_path(label: impl Into<String>, path: &Path) -> Result<Self, DatasetError> {
        let file = std::fs::File::open(path).map_err(|source| DatasetError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_csv_reader(label, file)
    }

    pub fn from_csv_reader<R: Read>(
        label: impl Into<String>,
        reader: R,
    ) -> Result<Self, DatasetError> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        let col = |name: &'static str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or(DatasetError::MissingColumn(name))
        };
        let (pop_col, count_col) = (col("population")?, col("count")?);
        let mut rows = Vec::new();
        for (i, record) in rdr.records().enumerate() {
            let record = record?;
            let line = i + 2;
            let parse = |idx: usize, what: &str| -> Result<u64, DatasetError> {
                let raw = record.get(idx).unwrap_or("");
                raw.parse::<u64>().map_err(|_| DatasetError::MalformedRow {
                    line,
                    reason: format!("{what} `{raw}` is not a non-negative integer"),
                })
            };
            let population = parse(pop_col, "population")?;
            if population == 0 {
                return Err(DatasetError::MalformedRow {
                    line,
                    reason: "population must be at least 1".into(),
                });
            }
            rows.push(Observation::new(population, parse(count_col, "count")?));
        }
        Self::new(label, rows)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn rows(&self) -> &[Observation] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn populations(&self) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(|o| o.population as f64)
    }

    pub fn counts(&self) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(|o| o.count as f64)
    }

    pub fn mean_count(&self) -> f64 {
        self.counts().sum::<f64>() / self.len() as f64
    }

    /// Order-independent fingerprint of the rows (FNV-1a over canonical order).
    pub fn digest(&self) -> u64 {
        let mut h = Fnv1a::default();
        for o in &self.rows {
            h.write_u64(o.population);
            h.write_u64(o.count);
        }
        h.finish()
    }

    /// Returns a copy with every population multiplied by `factor`.
    pub fn scaled_populations(&self, factor: u64) -> Self {
        Self {
            label: self.label.clone(),
            rows: self
                .rows
                .iter()
                .map(|o| Observation::new(o.population * factor, o.count))
                .collect(),
        }
    }
}

impl fmt::Display for Dataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({} rows)", self.label, self.rows.len())
    }
}

struct Fnv1a(u64);

impl Default for Fnv1a {
    fn default() -> Self {
        Self(0xcbf2_9ce4_8422_2325)
    }
}

impl Hasher for Fnv1a {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        for b in bytes {
            self.0 ^= u64::from(*b);
            self.0 = self.0.wrapping_mul(0x0100_0000_01b3);
        }
    }
}
