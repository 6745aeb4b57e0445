//! Maximum-likelihood fits of the scaling model families.
//!
//! Count families use a log link, `log μ = log Y₀ + β log N`, and are fitted
//! by iteratively reweighted least squares. The negative binomial uses the
//! NB2 variance `μ + μ²/r` with `r` profiled on a log-spaced bracket. The
//! Gaussian families are closed-form least squares with the MLE variance so
//! that their likelihoods are comparable with the count families.

mod count;
mod gaussian;
mod likelihood;
mod linalg;

pub use count::{fit_null, fit_powerlaw_negbin, fit_powerlaw_poisson, NullFamily};
pub use gaussian::{fit_gaussian_linear, fit_gaussian_quadratic, fit_loglog_ols};
pub use likelihood::{gaussian_log_likelihood, negbin_log_pmf, poisson_log_pmf};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::Dataset;

#[derive(Debug, Error)]
pub enum FitError {
    #[error("degenerate data: {0}")]
    DegenerateData(String),
    #[error("invalid fit options: {0}")]
    InvalidOptions(String),
    #[error("{family} fit did not converge after {iterations} iterations")]
    NonConvergence { family: Family, iterations: usize },
}

/// The eight model families that can appear in a [`ScalingFit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    PowerLawPoisson,
    PowerLawNegBin,
    GaussianLinear,
    GaussianQuadratic,
    LogLogOls,
    NullPoisson,
    NullNegBin,
    NullGaussian,
}

impl Family {
    pub const ALL: [Family; 8] = [
        Family::PowerLawPoisson,
        Family::PowerLawNegBin,
        Family::GaussianLinear,
        Family::GaussianQuadratic,
        Family::LogLogOls,
        Family::NullPoisson,
        Family::NullNegBin,
        Family::NullGaussian,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::PowerLawPoisson => "power_law_poisson",
            Family::PowerLawNegBin => "power_law_neg_bin",
            Family::GaussianLinear => "gaussian_linear",
            Family::GaussianQuadratic => "gaussian_quadratic",
            Family::LogLogOls => "log_log_ols",
            Family::NullPoisson => "null_poisson",
            Family::NullNegBin => "null_neg_bin",
            Family::NullGaussian => "null_gaussian",
        }
    }

    /// Free parameters counted by information criteria, including the
    /// dispersion `r` and Gaussian `σ²`.
    pub fn parameter_count(self) -> usize {
        match self {
            Family::NullPoisson => 1,
            Family::PowerLawPoisson | Family::NullNegBin | Family::NullGaussian => 2,
            Family::PowerLawNegBin | Family::GaussianLinear | Family::LogLogOls => 3,
            Family::GaussianQuadratic => 4,
        }
    }

    /// Intercept-only counterpart used by the likelihood-ratio statistics.
    pub fn null_counterpart(self) -> Option<NullFamily> {
        match self {
            Family::PowerLawPoisson | Family::NullPoisson => Some(NullFamily::Poisson),
            Family::PowerLawNegBin | Family::NullNegBin => Some(NullFamily::NegBin),
            Family::GaussianLinear | Family::GaussianQuadratic | Family::NullGaussian => {
                Some(NullFamily::Gaussian)
            }
            Family::LogLogOls => None,
        }
    }

    pub fn is_null(self) -> bool {
        matches!(
            self,
            Family::NullPoisson | Family::NullNegBin | Family::NullGaussian
        )
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| format!("unknown model family `{s}`"))
    }
}

/// Log-spaced bracket searched for the negative binomial dispersion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionGrid {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Default for DispersionGrid {
    fn default() -> Self {
        Self {
            min: 1e-3,
            max: 1e6,
            steps: 50,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Relative change in deviance (or joint log-likelihood for the
    /// negative binomial) below which a fit is declared converged.
    pub tolerance: f64,
    pub dispersion_grid: DispersionGrid,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iterations: 60,
            tolerance: 1e-8,
            dispersion_grid: DispersionGrid::default(),
        }
    }
}

impl FitOptions {
    pub fn validate(&self) -> Result<(), FitError> {
        let g = &self.dispersion_grid;
        if self.max_iterations == 0 {
            return Err(FitError::InvalidOptions(
                "max_iterations must be >= 1".into(),
            ));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(FitError::InvalidOptions("tolerance must be > 0".into()));
        }
        if !(g.min > 0.0 && g.max > g.min && g.steps >= 3) {
            return Err(FitError::InvalidOptions(
                "dispersion grid needs 0 < min < max and at least 3 steps".into(),
            ));
        }
        Ok(())
    }
}

/// Diagnostics attached to a fit that did not fail outright.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitFlag {
    /// Residual variance is exactly zero; the Gaussian likelihood is unbounded.
    PerfectFit,
    /// The dispersion optimum sat on the edge of the widened search bracket.
    DispersionBoundary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Param {
    pub name: String,
    pub value: f64,
}

/// A fitted model together with everything needed to score it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub family: Family,
    pub dataset: String,
    /// Fingerprint of the full dataset the fit was produced from.
    pub data_digest: u64,
    pub params: Vec<Param>,
    /// NB2 dispersion `r`; absent for every other family.
    pub dispersion: Option<f64>,
    #[serde(with = "extended_float")]
    pub log_likelihood: f64,
    /// Covariance of `params`, in the same order.
    pub covariance: Vec<Vec<f64>>,
    pub n_obs: usize,
    pub converged: bool,
    pub iterations: usize,
    /// Rows dropped before fitting (zero counts for the log-log OLS fit).
    pub excluded_rows: usize,
    pub flags: Vec<FitFlag>,
}

impl ScalingFit {
    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|p| p.name == name).map(|p| p.value)
    }

    pub fn std_error(&self, name: &str) -> Option<f64> {
        let i = self.params.iter().position(|p| p.name == name)?;
        let var = self.covariance.get(i)?.get(i).copied()?;
        (var.is_finite() && var >= 0.0).then(|| var.sqrt())
    }

    pub fn parameter_count(&self) -> usize {
        self.family.parameter_count()
    }

    pub fn has_flag(&self, flag: FitFlag) -> bool {
        self.flags.contains(&flag)
    }

    /// Fraction of dataset rows excluded before fitting.
    pub fn excluded_fraction(&self) -> f64 {
        self.excluded_rows as f64 / (self.n_obs + self.excluded_rows) as f64
    }

    pub fn require_converged(&self) -> Result<&Self, FitError> {
        if self.converged {
            Ok(self)
        } else {
            Err(FitError::NonConvergence {
                family: self.family,
                iterations: self.iterations,
            })
        }
    }

    /// Mean function at population `n`.
    ///
    /// Unconverged fits still predict; gate on [`Self::require_converged`]
    /// where that matters. The log-log OLS prediction is `exp` of the fitted
    /// log-mean with no retransformation bias correction.
    pub fn predict(&self, n: f64) -> f64 {
        let p = |name| self.param(name).unwrap_or(f64::NAN);
        match self.family {
            Family::PowerLawPoisson | Family::PowerLawNegBin | Family::LogLogOls => {
                (p("log_y0") + p("beta") * n.ln()).exp()
            }
            Family::GaussianLinear => p("a") * n + p("b"),
            Family::GaussianQuadratic => p("a") * n * n + p("b") * n + p("c"),
            Family::NullPoisson | Family::NullNegBin => p("log_mu").exp(),
            Family::NullGaussian => p("mean"),
        }
    }

    /// Re-evaluates the log-likelihood of this fit's parameters on `data`.
    pub fn log_likelihood_on(&self, data: &Dataset) -> f64 {
        let rows = data
            .rows()
            .iter()
            .map(|o| (o.population as f64, o.count as f64));
        match self.family {
            Family::PowerLawPoisson | Family::NullPoisson => {
                rows.map(|(n, y)| poisson_log_pmf(y, self.predict(n))).sum()
            }
            Family::PowerLawNegBin | Family::NullNegBin => {
                let r = self.dispersion.unwrap_or(f64::NAN);
                rows.map(|(n, y)| negbin_log_pmf(y, self.predict(n), r))
                    .sum()
            }
            Family::GaussianLinear | Family::GaussianQuadratic | Family::NullGaussian => {
                let sigma2 = self.param("sigma2").unwrap_or(f64::NAN);
                let resid: Vec<f64> = rows.map(|(n, y)| y - self.predict(n)).collect();
                gaussian_log_likelihood(&resid, sigma2)
            }
            Family::LogLogOls => {
                let sigma2 = self.param("sigma2").unwrap_or(f64::NAN);
                let resid: Vec<f64> = rows
                    .filter(|&(_, y)| y > 0.0)
                    .map(|(n, y)| y.ln() - self.predict(n).ln())
                    .collect();
                gaussian_log_likelihood(&resid, sigma2)
            }
        }
    }
}

/// Serialises non-finite floats as the strings `"inf"`, `"-inf"`, `"nan"`.
mod extended_float {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(de::Error::custom(format!("invalid float `{other}`"))),
            },
        }
    }
}

pub(crate) fn require_rows(data: &Dataset, min: usize) -> Result<(), FitError> {
    if data.len() < min {
        return Err(FitError::DegenerateData(format!(
            "{} rows, need at least {min}",
            data.len()
        )));
    }
    Ok(())
}
