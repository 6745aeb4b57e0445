//! Mean-field drive cycle: a vehicle charges at `P` for a fraction `α` of the
//! time and drives at speed `v` for the rest, with aerodynamic drag as the
//! only load. Energy balance gives
//!
//! ```text
//! ½ρC_dA·v³·(1 − α) = α·P   ⇒   v = ∛(α/(1−α) · 2P/(ρC_dA))
//! ```
//!
//! and the cycle-average speed `v̄ = v(1 − α)`, which peaks at `α = 1/3`.
//!
//! Rolling resistance is ignored, so results are upper bounds on speed and
//! are least realistic below roughly 10 m/s.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Metres per second to miles per hour.
pub const MPH_PER_MPS: f64 = 2.23694;

/// Below this driving speed the drag-only model is an upper bound only.
pub const LOW_SPEED_MPS: f64 = 10.0;

#[derive(Debug, Error, PartialEq)]
pub enum MeanFieldError {
    #[error("charge fraction must lie strictly between 0 and 1, got {0}")]
    AlphaOutOfRange(f64),
    #[error("{0} must be positive and finite, got {1}")]
    NonPositive(&'static str, f64),
    #[error("{0} grid is empty")]
    EmptyGrid(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveCycleParams {
    /// Air density, kg/m³.
    pub rho: f64,
    /// Drag coefficient times frontal area, m².
    pub cda: f64,
    /// Charger power, W.
    pub p_evse: f64,
    /// Fraction of the cycle spent charging.
    pub alpha: f64,
}

impl Default for DriveCycleParams {
    fn default() -> Self {
        Self {
            rho: 1.225,
            cda: 0.75,
            p_evse: 1_920.0,
            alpha: optimal_alpha(),
        }
    }
}

impl DriveCycleParams {
    pub fn with_power(self, p_evse: f64) -> Self {
        Self { p_evse, ..self }
    }

    pub fn with_alpha(self, alpha: f64) -> Self {
        Self { alpha, ..self }
    }

    fn check_body(&self) -> Result<(), MeanFieldError> {
        positive("rho", self.rho)?;
        positive("cda", self.cda)?;
        positive("p_evse", self.p_evse)
    }

    pub fn validate(&self) -> Result<(), MeanFieldError> {
        self.check_body()?;
        check_alpha(self.alpha)
    }
}

fn positive(name: &'static str, v: f64) -> Result<(), MeanFieldError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(MeanFieldError::NonPositive(name, v))
    }
}

fn check_alpha(alpha: f64) -> Result<(), MeanFieldError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(MeanFieldError::AlphaOutOfRange(alpha))
    }
}

/// Aerodynamic power draw `½ρC_dA·v³`, W.
pub fn drag_power(v: f64, rho: f64, cda: f64) -> f64 {
    0.5 * rho * cda * v.powi(3)
}

/// Driving speed sustained by the charger, m/s.
pub fn driving_speed(p: &DriveCycleParams) -> Result<f64, MeanFieldError> {
    p.validate()?;
    Ok((p.alpha / (1.0 - p.alpha) * 2.0 * p.p_evse / (p.rho * p.cda)).cbrt())
}

/// Cycle-average speed `v(1 − α)`, m/s.
pub fn average_speed(p: &DriveCycleParams) -> Result<f64, MeanFieldError> {
    Ok(driving_speed(p)? * (1.0 - p.alpha))
}

/// Maximiser of `α^(1/3)(1 − α)^(2/3)`; at this point the charger runs at
/// twice the driving power draw.
pub fn optimal_alpha() -> f64 {
    1.0 / 3.0
}

/// Charge fraction needed to drive at `v`: `P_D / (P_D + P)`. Ignores
/// `p.alpha`.
pub fn charge_fraction(v: f64, p: &DriveCycleParams) -> Result<f64, MeanFieldError> {
    p.check_body()?;
    positive("speed", v)?;
    let draw = drag_power(v, p.rho, p.cda);
    Ok(draw / (draw + p.p_evse))
}

/// Charger power needed to drive at `v` while charging a fraction `alpha`
/// of the time, W.
pub fn required_power(v: f64, alpha: f64, rho: f64, cda: f64) -> Result<f64, MeanFieldError> {
    check_alpha(alpha)?;
    positive("speed", v)?;
    positive("rho", rho)?;
    positive("cda", cda)?;
    Ok((1.0 - alpha) / alpha * drag_power(v, rho, cda))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub power_w: f64,
    pub alpha: f64,
    pub v_mps: f64,
    pub vbar_mps: f64,
    /// Driving speed below [`LOW_SPEED_MPS`], where rolling resistance matters.
    pub upper_bound_only: bool,
}

/// Every `(power, α)` combination, power-major.
pub fn sweep_curves(
    power_levels: &[f64],
    alpha_grid: &[f64],
    rho: f64,
    cda: f64,
) -> Result<Vec<SweepRow>, MeanFieldError> {
    if power_levels.is_empty() {
        return Err(MeanFieldError::EmptyGrid("power"));
    }
    if alpha_grid.is_empty() {
        return Err(MeanFieldError::EmptyGrid("alpha"));
    }
    let mut rows = Vec::with_capacity(power_levels.len() * alpha_grid.len());
    for &power_w in power_levels {
        for &alpha in alpha_grid {
            let p = DriveCycleParams {
                rho,
                cda,
                p_evse: power_w,
                alpha,
            };
            let v_mps = driving_speed(&p)?;
            rows.push(SweepRow {
                power_w,
                alpha,
                v_mps,
                vbar_mps: v_mps * (1.0 - alpha),
                upper_bound_only: v_mps < LOW_SPEED_MPS,
            });
        }
    }
    Ok(rows)
}

/// `n` evenly spaced interior points of (0, 1): `k/(n+1)`.
pub fn open_alpha_grid(n: usize) -> Vec<f64> {
    (1..=n).map(|k| k as f64 / (n + 1) as f64).collect()
}

pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("power_w,alpha,v_mps,vbar_mps\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.power_w, r.alpha, r.v_mps, r.vbar_mps
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn residential_charger_speeds() {
        let p = DriveCycleParams::default();
        let v = driving_speed(&p).unwrap() * MPH_PER_MPS;
        let vbar = average_speed(&p).unwrap() * MPH_PER_MPS;
        assert!((v - 28.6).abs() / 28.6 < 0.005, "{v}");
        assert!((vbar - 19.0).abs() / 19.0 < 0.005, "{vbar}");
    }

    #[test]
    fn doubling_power_scales_speed_by_cube_root_two() {
        let p = DriveCycleParams::default();
        let v1 = driving_speed(&p).unwrap();
        let v2 = driving_speed(&p.with_power(2.0 * p.p_evse)).unwrap();
        assert!((v2 / v1 - 2f64.cbrt()).abs() < 1e-12);
    }

    #[test]
    fn half_time_charging_halves_average_speed() {
        let p = DriveCycleParams::default().with_alpha(0.5);
        let v = driving_speed(&p).unwrap();
        assert_eq!(average_speed(&p).unwrap(), v / 2.0);
    }

    #[test]
    fn alpha_endpoints_are_rejected() {
        for a in [0.0, 1.0, -0.1, 1.5] {
            let p = DriveCycleParams::default().with_alpha(a);
            assert_eq!(driving_speed(&p), Err(MeanFieldError::AlphaOutOfRange(a)));
            assert!(required_power(10.0, a, 1.225, 0.75).is_err());
        }
    }

    #[test]
    fn optimum_doubles_driving_draw() {
        let p = DriveCycleParams::default();
        let v = driving_speed(&p).unwrap();
        let draw = drag_power(v, p.rho, p.cda);
        assert!((p.p_evse / draw - 2.0).abs() < 1e-12);
    }

    #[test]
    fn equal_draw_and_charger_power_gives_half() {
        let p = DriveCycleParams::default();
        let v = (2.0 * p.p_evse / (p.rho * p.cda)).cbrt();
        assert!((charge_fraction(v, &p).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn required_power_inverts_driving_speed() {
        let p = DriveCycleParams::default();
        let v = driving_speed(&p).unwrap();
        let back = required_power(v, p.alpha, p.rho, p.cda).unwrap();
        assert!((back - p.p_evse).abs() / p.p_evse < 1e-9);
        let near_one = required_power(v, 1.0 - 1e-9, p.rho, p.cda).unwrap();
        assert!(near_one < 1e-5);
    }

    #[test]
    fn required_power_for_worked_residential_speed() {
        let p = required_power(28.6 / MPH_PER_MPS, 1.0 / 3.0, 1.225, 0.75).unwrap();
        assert!((p - 1_920.0).abs() / 1_920.0 < 0.01, "{p}");
    }

    #[test]
    fn sweep_rejects_empty_grids() {
        assert_eq!(
            sweep_curves(&[1e3], &[], 1.225, 0.75),
            Err(MeanFieldError::EmptyGrid("alpha"))
        );
        assert_eq!(
            sweep_curves(&[], &[0.5], 1.225, 0.75),
            Err(MeanFieldError::EmptyGrid("power"))
        );
    }

    #[test]
    fn sweep_spot_value() {
        let rows = sweep_curves(&[7_200.0], &[0.25], 1.225, 0.75).unwrap();
        let expected = (0.25f64 / 0.75 * 2.0 * 7_200.0 / (1.225 * 0.75)).cbrt();
        assert!((rows[0].v_mps - expected).abs() < 1e-12);
        assert!((rows[0].vbar_mps - 0.75 * expected).abs() < 1e-12);
    }

    #[test]
    fn slow_rows_are_annotated() {
        let rows = sweep_curves(&[1_920.0], &[0.01, 0.5], 1.225, 0.75).unwrap();
        assert!(rows[0].upper_bound_only);
        assert!(!rows[1].upper_bound_only);
    }
}
