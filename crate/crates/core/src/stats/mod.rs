//! Model-selection and hypothesis-test statistics for fitted scaling models.

mod report;
mod tail;

pub use report::{render_table, to_csv, to_json};
pub use tail::{ln_chi2_sf, ln_normal_sf};

use std::collections::HashMap;
use std::f64::consts::LN_10;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::dataset::Dataset;
use crate::glm::{Family, NullFamily, ScalingFit};

/// ΔBIC above which one model is taken as decisively better than another.
pub const DECISIVE_DELTA_BIC: f64 = 6.0;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("fits come from different data: {0}")]
    MismatchedData(String),
    #[error("{0} fit has no finite standard error for `{1}`")]
    MissingSe(Family, &'static str),
    #[error("no null fit supplied for {0}")]
    MissingNull(Family),
    #[error("confidence level must lie in (0, 1), got {0}")]
    InvalidLevel(f64),
}

fn same_data(a: &ScalingFit, b: &ScalingFit) -> Result<(), StatsError> {
    if a.n_obs != b.n_obs || a.data_digest != b.data_digest {
        return Err(StatsError::MismatchedData(format!(
            "{} ({} on {} rows) vs {} ({} on {} rows)",
            a.family, a.dataset, a.n_obs, b.family, b.dataset, b.n_obs
        )));
    }
    Ok(())
}

/// `λ_LR = 2(logL_fit − logL_null)`.
pub fn likelihood_ratio(fit: &ScalingFit, null_fit: &ScalingFit) -> Result<f64, StatsError> {
    same_data(fit, null_fit)?;
    Ok(2.0 * (fit.log_likelihood - null_fit.log_likelihood))
}

/// Degrees of freedom for the likelihood-ratio test of `fit` against its null.
///
/// Both NB models profile `r`, so NB-vs-null has one degree of freedom.
pub fn lrt_df(fit: &ScalingFit, null_fit: &ScalingFit) -> usize {
    fit.parameter_count()
        .saturating_sub(null_fit.parameter_count())
}

/// `log₁₀` of the chi-square p-value of a likelihood-ratio statistic.
pub fn lrt_log10_p(lambda: f64, df: usize) -> f64 {
    ln_chi2_sf(lambda, df) / LN_10
}

/// McFadden's pseudo-R², `1 − logL_fit / logL_null`.
pub fn mcfadden_r2(fit: &ScalingFit, null_fit: &ScalingFit) -> Result<f64, StatsError> {
    same_data(fit, null_fit)?;
    Ok(1.0 - fit.log_likelihood / null_fit.log_likelihood)
}

/// `BIC = k·ln(n) − 2·logL`, with `k` counting dispersion and variance terms.
pub fn bic(fit: &ScalingFit) -> f64 {
    fit.parameter_count() as f64 * (fit.n_obs as f64).ln() - 2.0 * fit.log_likelihood
}

/// Root-mean-square deviation of observed counts from the fitted mean.
pub fn rmsd(fit: &ScalingFit, data: &Dataset) -> f64 {
    let sse: f64 = data
        .rows()
        .iter()
        .map(|o| (o.count as f64 - fit.predict(o.population as f64)).powi(2))
        .sum();
    (sse / data.len() as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaldResult {
    pub beta_hat: f64,
    pub null_value: f64,
    pub se: f64,
    pub w: f64,
    /// Two-sided p-value; zero when it underflows, see `log10_p`.
    pub p_value: f64,
    pub log10_p: f64,
}

impl WaldResult {
    pub fn from_estimate(beta_hat: f64, se: f64, null_value: f64) -> Self {
        let w = (beta_hat - null_value) / se;
        let ln_p = if w == 0.0 {
            0.0
        } else {
            std::f64::consts::LN_2 + ln_normal_sf(w.abs())
        };
        Self {
            beta_hat,
            null_value,
            se,
            w,
            p_value: ln_p.exp().min(1.0),
            log10_p: (ln_p / LN_10).min(0.0),
        }
    }

    /// p-value for display, as an ordering statement when very small.
    pub fn p_display(&self) -> String {
        format_p(self.log10_p)
    }
}

pub fn format_p(log10_p: f64) -> String {
    if log10_p < -99.0 {
        "< 1e-99".to_string()
    } else {
        format!("{:.3e}", 10f64.powf(log10_p))
    }
}

/// Wald test of the scaling exponent `β` against `null_value`.
pub fn wald_test(fit: &ScalingFit, null_value: f64) -> Result<WaldResult, StatsError> {
    let (beta, se) = beta_and_se(fit)?;
    if se == 0.0 {
        return Err(StatsError::MissingSe(fit.family, "beta"));
    }
    Ok(WaldResult::from_estimate(beta, se, null_value))
}

fn beta_and_se(fit: &ScalingFit) -> Result<(f64, f64), StatsError> {
    let beta = fit
        .param("beta")
        .ok_or(StatsError::MissingSe(fit.family, "beta"))?;
    let se = fit
        .std_error("beta")
        .ok_or(StatsError::MissingSe(fit.family, "beta"))?;
    Ok((beta, se))
}

/// Two-sided normal quantile `z` with `P(|Z| < z) = level`.
pub fn normal_quantile(level: f64) -> Result<f64, StatsError> {
    if !(level > 0.0 && level < 1.0) {
        return Err(StatsError::InvalidLevel(level));
    }
    let n = Normal::new(0.0, 1.0).expect("standard normal");
    Ok(n.inverse_cdf(0.5 + level / 2.0))
}

/// Symmetric interval `estimate ± z·se`.
pub fn wald_interval(estimate: f64, se: f64, level: f64) -> Result<(f64, f64), StatsError> {
    let half = normal_quantile(level)? * se;
    Ok((estimate - half, estimate + half))
}

/// Confidence interval for `β`.
pub fn confidence_interval(fit: &ScalingFit, level: f64) -> Result<(f64, f64), StatsError> {
    let (beta, se) = beta_and_se(fit)?;
    wald_interval(beta, se, level)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonEntry {
    pub family: Family,
    pub rmsd: f64,
    pub r2_mcf: f64,
    pub lambda_lr: f64,
    pub bic: f64,
    pub parameters: usize,
    pub lrt_df: usize,
    pub lrt_log10_p: f64,
}

/// One row per model, ascending by BIC.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelComparison {
    pub dataset: String,
    pub n_obs: usize,
    pub entries: Vec<ComparisonEntry>,
    /// `decisive[i]` is true when entry `i + 1` trails entry `i` by ΔBIC > 6.
    pub decisive: Vec<bool>,
}

impl ModelComparison {
    pub fn ranking(&self) -> Vec<Family> {
        self.entries.iter().map(|e| e.family).collect()
    }

    pub fn best(&self) -> Option<&ComparisonEntry> {
        self.entries.first()
    }

    pub fn entry(&self, family: Family) -> Option<&ComparisonEntry> {
        self.entries.iter().find(|e| e.family == family)
    }
}

/// Scores every fit against its null counterpart on `data` and ranks by BIC.
pub fn compare_models(
    fits: &[ScalingFit],
    nulls: &HashMap<NullFamily, ScalingFit>,
    data: &Dataset,
) -> Result<ModelComparison, StatsError> {
    let mut entries = Vec::with_capacity(fits.len());
    for fit in fits {
        if fit.data_digest != data.digest() {
            return Err(StatsError::MismatchedData(format!(
                "{} fit on `{}` does not match dataset `{}`",
                fit.family,
                fit.dataset,
                data.label()
            )));
        }
        let null_fit = fit
            .family
            .null_counterpart()
            .and_then(|nf| nulls.get(&nf))
            .ok_or(StatsError::MissingNull(fit.family))?;
        let lambda_lr = likelihood_ratio(fit, null_fit)?;
        let df = lrt_df(fit, null_fit);
        entries.push(ComparisonEntry {
            family: fit.family,
            rmsd: rmsd(fit, data),
            r2_mcf: mcfadden_r2(fit, null_fit)?,
            lambda_lr,
            bic: bic(fit),
            parameters: fit.parameter_count(),
            lrt_df: df,
            lrt_log10_p: lrt_log10_p(lambda_lr, df),
        });
    }
    entries.sort_by(|a, b| a.bic.total_cmp(&b.bic).then(a.family.cmp(&b.family)));
    let decisive = entries
        .windows(2)
        .map(|w| w[1].bic - w[0].bic > DECISIVE_DELTA_BIC)
        .collect();
    Ok(ModelComparison {
        dataset: data.label().to_string(),
        n_obs: data.len(),
        entries,
        decisive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::glm::{fit_null, fit_powerlaw_poisson, FitOptions};

    fn data() -> Dataset {
        Dataset::from_pairs(
            "s",
            &[
                (10, 3),
                (40, 9),
                (100, 14),
                (300, 40),
                (1_000, 90),
                (5_000, 380),
            ],
        )
        .unwrap()
    }

    #[test]
    fn fit_against_itself_is_zero() {
        let fit = fit_powerlaw_poisson(&data(), &FitOptions::default()).unwrap();
        assert_eq!(likelihood_ratio(&fit, &fit).unwrap(), 0.0);
        assert_eq!(mcfadden_r2(&fit, &fit).unwrap(), 0.0);
    }

    #[test]
    fn mismatched_data_is_rejected() {
        let fit = fit_powerlaw_poisson(&data(), &FitOptions::default()).unwrap();
        let other = Dataset::from_pairs("t", &[(1, 1), (2, 2), (3, 3)]).unwrap();
        let null = fit_null(NullFamily::Poisson, &other, &FitOptions::default()).unwrap();
        assert!(matches!(
            likelihood_ratio(&fit, &null),
            Err(StatsError::MismatchedData(_))
        ));
    }

    #[test]
    fn bic_of_trivial_model() {
        let mut fit = fit_null(NullFamily::Poisson, &data(), &FitOptions::default()).unwrap();
        fit.log_likelihood = 0.0;
        fit.n_obs = 1;
        assert_eq!(bic(&fit), 0.0);
    }

    #[test]
    fn wald_identities() {
        let r = WaldResult::from_estimate(1.17, 0.026, 1.0);
        assert_eq!(r.w, (1.17 - 1.0) / 0.026);
        assert!(r.p_value < 1e-9);
        let r = WaldResult::from_estimate(0.77, 0.0047, 1.0);
        assert!(r.log10_p < -99.0);
        assert_eq!(r.p_display(), "< 1e-99");
        let r = WaldResult::from_estimate(0.8, 0.1, 0.8);
        assert_eq!((r.w, r.p_value), (0.0, 1.0));
    }

    #[test]
    fn interval_half_widths() {
        let (lo, hi) = wald_interval(1.17, 0.026, 0.95).unwrap();
        assert!(((hi - lo) / 2.0 - 0.051).abs() < 5e-4);
        let (lo, hi) = wald_interval(1.17, 0.0, 0.95).unwrap();
        assert_eq!((lo, hi), (1.17, 1.17));
        assert!(wald_interval(1.0, 0.1, 1.0).is_err());
    }

    #[test]
    fn single_fit_comparison() {
        let d = data();
        let opts = FitOptions::default();
        let fit = fit_powerlaw_poisson(&d, &opts).unwrap();
        let nulls = HashMap::from([(
            NullFamily::Poisson,
            fit_null(NullFamily::Poisson, &d, &opts).unwrap(),
        )]);
        let cmp = compare_models(&[fit], &nulls, &d).unwrap();
        assert_eq!(cmp.entries.len(), 1);
        assert!(cmp.decisive.is_empty());
        assert!(cmp.entries[0].lambda_lr > 0.0);
    }

    #[test]
    fn missing_null_is_an_error() {
        let d = data();
        let fit = fit_powerlaw_poisson(&d, &FitOptions::default()).unwrap();
        assert!(matches!(
            compare_models(&[fit], &HashMap::new(), &d),
            Err(StatsError::MissingNull(Family::PowerLawPoisson))
        ));
    }
}
