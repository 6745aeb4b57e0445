use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use super::{normalize_fips, read_file, IngestError};

/// Reads `fips,population`; every population must be at least 1.
pub fn parse_population_csv(path: &Path) -> Result<BTreeMap<String, u64>, IngestError> {
    parse_population_reader(&path.display().to_string(), read_file(path)?.as_bytes())
}

pub fn parse_population_reader<R: Read>(
    name: &str,
    reader: R,
) -> Result<BTreeMap<String, u64>, IngestError> {
    parse_fips_table(name, reader, "population", 1)
}

/// Reads `fips,gas_stations`; counts may be zero.
pub fn parse_gas_csv(path: &Path) -> Result<BTreeMap<String, u64>, IngestError> {
    parse_gas_reader(&path.display().to_string(), read_file(path)?.as_bytes())
}

pub fn parse_gas_reader<R: Read>(
    name: &str,
    reader: R,
) -> Result<BTreeMap<String, u64>, IngestError> {
    parse_fips_table(name, reader, "gas_stations", 0)
}

fn parse_fips_table<R: Read>(
    name: &str,
    reader: R,
    value_column: &str,
    min_value: u64,
) -> Result<BTreeMap<String, u64>, IngestError> {
    let malformed = |line: u64, reason: String| IngestError::MalformedRow {
        file: name.to_string(),
        line,
        reason,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| malformed(1, e.to_string()))?
        .clone();
    let column = |want: &str| {
        headers
            .iter()
            .position(|h| h == want)
            .ok_or_else(|| malformed(1, format!("header has no `{want}` column")))
    };
    let fips_col = column("fips")?;
    let value_col = column(value_column)?;

    let mut out = BTreeMap::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            malformed(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let raw_fips = record.get(fips_col).unwrap_or("");
        let fips = normalize_fips(raw_fips)
            .ok_or_else(|| malformed(line, format!("invalid fips `{raw_fips}`")))?;
        let raw_value = record.get(value_col).unwrap_or("");
        let value: u64 = raw_value.parse().map_err(|_| {
            malformed(
                line,
                format!("{value_column} `{raw_value}` is not a non-negative integer"),
            )
        })?;
        if value < min_value {
            return Err(malformed(
                line,
                format!("{value_column} must be at least {min_value}"),
            ));
        }
        if out.insert(fips.clone(), value).is_some() {
            return Err(IngestError::DuplicateFips(fips));
        }
    }
    Ok(out)
}
