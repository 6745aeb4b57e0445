//! Power parity between gasoline pumps and chargers, and the per-county
//! charging-station gap implied by the gasoline scaling law.
//!
//! All powers are in watts.

use std::ops::Add;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::glm::ScalingFit;
use crate::ingest::CountyRecord;

const SECONDS_PER_MINUTE: f64 = 60.0;
const WATTS_PER_KW: f64 = 1_000.0;

#[derive(Debug, Error, PartialEq)]
pub enum GapError {
    #[error("gasoline {0} fit is not converged")]
    UnconvergedFit(String),
    #[error("invalid parity parameter: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParityParams {
    /// Regulated pump flow, gallons per minute.
    pub pump_flow_gpm: f64,
    /// Energy content of gasoline, kWh per gallon.
    pub energy_kwh_per_gallon: f64,
    /// EV energy per mile divided by ICE energy per mile.
    pub consumption_ratio: f64,
    /// Charger power per port, W.
    pub p_evse_w: f64,
    pub pumps_per_station: u32,
    pub ports_per_station: u32,
}

impl Default for ParityParams {
    fn default() -> Self {
        Self {
            pump_flow_gpm: 10.0,
            energy_kwh_per_gallon: 33.705,
            consumption_ratio: 1.0 / 3.0,
            p_evse_w: 400_000.0,
            pumps_per_station: 12,
            ports_per_station: 12,
        }
    }
}

impl ParityParams {
    pub fn validate(&self) -> Result<(), GapError> {
        let positive = [
            ("pump_flow_gpm", self.pump_flow_gpm),
            ("energy_kwh_per_gallon", self.energy_kwh_per_gallon),
            ("p_evse_w", self.p_evse_w),
            ("consumption_ratio", self.consumption_ratio),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(GapError::InvalidParams(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if self.consumption_ratio > 1.0 {
            return Err(GapError::InvalidParams(format!(
                "consumption_ratio must be at most 1, got {}",
                self.consumption_ratio
            )));
        }
        if self.ports_per_station == 0 {
            return Err(GapError::InvalidParams(
                "ports_per_station must be positive".into(),
            ));
        }
        if self.pumps_per_station == 0 {
            log::warn!("pumps_per_station is 0; gasoline-equivalent power is zero");
        }
        Ok(())
    }
}

/// Peak power delivered by one gasoline pump, W.
pub fn pump_power(params: &ParityParams) -> f64 {
    params.pump_flow_gpm * SECONDS_PER_MINUTE * params.energy_kwh_per_gallon * WATTS_PER_KW
}

/// Charging ports needed to match one pump's consumption-adjusted power.
pub fn parity_ratio(params: &ParityParams) -> f64 {
    params.consumption_ratio * pump_power(params) / params.p_evse_w
}

/// Charging stations needed per gasoline station at power parity.
pub fn station_ratio(params: &ParityParams) -> f64 {
    parity_ratio(params) * f64::from(params.pumps_per_station) / f64::from(params.ports_per_station)
}

fn converged(gs_fit: &ScalingFit) -> Result<(), GapError> {
    if gs_fit.converged {
        Ok(())
    } else {
        Err(GapError::UnconvergedFit(gs_fit.family.to_string()))
    }
}

/// Charging stations needed at population `n` to match the power of the
/// gasoline stations predicted by `gs_fit`.
pub fn predicted_evse(n: f64, gs_fit: &ScalingFit, params: &ParityParams) -> Result<f64, GapError> {
    params.validate()?;
    converged(gs_fit)?;
    Ok((station_ratio(params) * gs_fit.predict(n)).max(0.0))
}

/// Which gasoline station count drives the prediction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GasBaseline {
    /// The fitted scaling curve `Y₀·N^β`.
    #[default]
    Fitted,
    /// The county's own observed gasoline station count.
    Observed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountyGap {
    pub fips: String,
    pub population: u64,
    pub observed_evse: u64,
    pub predicted_evse: f64,
    /// `predicted_evse − observed_evse`; negative when a county is in surplus.
    pub gap: f64,
}

pub fn station_gap(
    county: &CountyRecord,
    gs_fit: &ScalingFit,
    params: &ParityParams,
    baseline: GasBaseline,
) -> Result<CountyGap, GapError> {
    let predicted = match baseline {
        GasBaseline::Fitted => predicted_evse(county.population as f64, gs_fit, params)?,
        GasBaseline::Observed => {
            params.validate()?;
            station_ratio(params) * county.gas_stations as f64
        }
    };
    Ok(CountyGap {
        fips: county.fips.clone(),
        population: county.population,
        observed_evse: county.evse_stations,
        predicted_evse: predicted,
        gap: predicted - county.evse_stations as f64,
    })
}

pub fn gaps_to_csv(gaps: &[CountyGap]) -> String {
    let mut out = String::from("fips,population,observed_evse,predicted_evse,gap\n");
    for g in gaps {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            g.fips, g.population, g.observed_evse, g.predicted_evse, g.gap
        ));
    }
    out
}

/// Per-level charger power ratings, W.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelPowers {
    pub level1_w: f64,
    pub level2_w: f64,
    pub dcfast_w: f64,
}

impl Default for LevelPowers {
    fn default() -> Self {
        Self {
            level1_w: 1_400.0,
            level2_w: 7_200.0,
            dcfast_w: 50_000.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChargerLevelCounts {
    pub level1: u64,
    pub level2: u64,
    pub dcfast: u64,
}

impl ChargerLevelCounts {
    pub fn new(level1: u64, level2: u64, dcfast: u64) -> Self {
        Self {
            level1,
            level2,
            dcfast,
        }
    }

    pub fn ports(&self) -> u64 {
        self.level1 + self.level2 + self.dcfast
    }
}

impl Add for ChargerLevelCounts {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        Self {
            level1: self.level1 + rhs.level1,
            level2: self.level2 + rhs.level2,
            dcfast: self.dcfast + rhs.dcfast,
        }
    }
}

/// Aggregate charger power at the default level ratings.
pub fn county_power(levels: &ChargerLevelCounts) -> f64 {
    county_power_with(levels, &LevelPowers::default())
}

pub fn county_power_with(levels: &ChargerLevelCounts, powers: &LevelPowers) -> f64 {
    levels.level1 as f64 * powers.level1_w
        + levels.level2 as f64 * powers.level2_w
        + levels.dcfast as f64 * powers.dcfast_w
}

/// Consumption-adjusted power of the gasoline stations predicted at each
/// population, as `(N, W)` pairs.
pub fn power_parity_curve(
    gs_fit: &ScalingFit,
    params: &ParityParams,
    populations: &[f64],
) -> Result<Vec<(f64, f64)>, GapError> {
    params.validate()?;
    converged(gs_fit)?;
    let per_station =
        f64::from(params.pumps_per_station) * pump_power(params) * params.consumption_ratio;
    Ok(populations
        .iter()
        .map(|&n| (n, gs_fit.predict(n) * per_station))
        .collect())
}
