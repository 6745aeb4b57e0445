//! Closed-form least-squares families.

use nalgebra::{DMatrix, DVector};

use super::likelihood::gaussian_log_likelihood;
use super::linalg::{least_squares, to_rows};
use super::{require_rows, Family, FitError, FitFlag, Param, ScalingFit};
use crate::dataset::Dataset;

struct LeastSquares {
    coefs: Vec<f64>,
    /// `σ̂²(XᵀX)⁻¹` with the MLE variance.
    coef_cov: DMatrix<f64>,
    residuals: Vec<f64>,
    sigma2: f64,
}

/// Regresses `y` on polynomial columns `[u^(p-1), …, u, 1]` of `x`, where
/// `u = x / scale`, then maps coefficients back to the unscaled `x`.
fn polynomial_fit(x: &[f64], y: &[f64], degree: usize) -> Option<LeastSquares> {
    let n = x.len();
    let p = degree + 1;
    let scale = x
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let design = DMatrix::from_fn(n, p, |i, j| (x[i] / scale).powi((degree - j) as i32));
    let (scaled, xtx_inv) = least_squares(&design, &DVector::from_column_slice(y))?;
    let fitted = &design * &scaled;
    let residuals: Vec<f64> = y.iter().zip(fitted.iter()).map(|(a, b)| a - b).collect();
    let sigma2 = residuals.iter().map(|r| r * r).sum::<f64>() / n as f64;
    let unscale = DVector::from_fn(p, |j, _| scale.powi(-((degree - j) as i32)));
    let d = DMatrix::from_diagonal(&unscale);
    Some(LeastSquares {
        coefs: scaled.component_mul(&unscale).iter().copied().collect(),
        coef_cov: &d * (xtx_inv * sigma2) * &d,
        residuals,
        sigma2,
    })
}

fn gaussian_fit(
    family: Family,
    data: &Dataset,
    names: &[&str],
    ls: LeastSquares,
    n_obs: usize,
    excluded_rows: usize,
) -> ScalingFit {
    let k = ls.coefs.len();
    let mut cov = DMatrix::zeros(k + 1, k + 1);
    cov.view_mut((0, 0), (k, k)).copy_from(&ls.coef_cov);
    cov[(k, k)] = 2.0 * ls.sigma2 * ls.sigma2 / n_obs as f64;
    let mut params: Vec<Param> = names
        .iter()
        .zip(&ls.coefs)
        .map(|(name, &value)| Param {
            name: (*name).into(),
            value,
        })
        .collect();
    params.push(Param {
        name: "sigma2".into(),
        value: ls.sigma2,
    });
    let flags = if ls.sigma2 == 0.0 {
        vec![FitFlag::PerfectFit]
    } else {
        Vec::new()
    };
    ScalingFit {
        family,
        dataset: data.label().to_string(),
        data_digest: data.digest(),
        params,
        dispersion: None,
        log_likelihood: gaussian_log_likelihood(&ls.residuals, ls.sigma2),
        covariance: to_rows(&cov),
        n_obs,
        converged: true,
        iterations: 0,
        excluded_rows,
        flags,
    }
}

fn distinct_populations(data: &Dataset) -> usize {
    let mut n: Vec<u64> = data.rows().iter().map(|o| o.population).collect();
    n.dedup();
    n.len()
}

/// `Y ~ 𝒩(aN + b, σ²)`.
pub fn fit_gaussian_linear(data: &Dataset) -> Result<ScalingFit, FitError> {
    require_rows(data, 3)?;
    if distinct_populations(data) < 2 {
        return Err(FitError::DegenerateData("all populations identical".into()));
    }
    let x: Vec<f64> = data.populations().collect();
    let y: Vec<f64> = data.counts().collect();
    let ls = polynomial_fit(&x, &y, 1)
        .ok_or_else(|| FitError::DegenerateData("rank-deficient design".into()))?;
    Ok(gaussian_fit(
        Family::GaussianLinear,
        data,
        &["a", "b"],
        ls,
        data.len(),
        0,
    ))
}

/// `Y ~ 𝒩(aN² + bN + c, σ²)`.
pub fn fit_gaussian_quadratic(data: &Dataset) -> Result<ScalingFit, FitError> {
    require_rows(data, 3)?;
    if distinct_populations(data) < 3 {
        return Err(FitError::DegenerateData(
            "fewer than 3 distinct populations".into(),
        ));
    }
    let x: Vec<f64> = data.populations().collect();
    let y: Vec<f64> = data.counts().collect();
    let ls = polynomial_fit(&x, &y, 2)
        .ok_or_else(|| FitError::DegenerateData("rank-deficient design".into()))?;
    Ok(gaussian_fit(
        Family::GaussianQuadratic,
        data,
        &["a", "b", "c"],
        ls,
        data.len(),
        0,
    ))
}

/// OLS of `log Y` on `log N` over the rows with `Y > 0`.
///
/// Zero counts cannot be log-transformed; the number dropped is recorded in
/// `excluded_rows`.
pub fn fit_loglog_ols(data: &Dataset) -> Result<ScalingFit, FitError> {
    let kept: Vec<(f64, f64)> = data
        .rows()
        .iter()
        .filter(|o| o.count > 0)
        .map(|o| ((o.population as f64).ln(), (o.count as f64).ln()))
        .collect();
    let excluded = data.len() - kept.len();
    if kept.len() < 3 {
        return Err(FitError::DegenerateData(format!(
            "{} rows remain after excluding zero counts, need at least 3",
            kept.len()
        )));
    }
    let (x, y): (Vec<f64>, Vec<f64>) = kept.into_iter().unzip();
    // centre log N so the intercept is estimated without cancellation
    let x_mean = x.iter().sum::<f64>() / x.len() as f64;
    let xc: Vec<f64> = x.iter().map(|v| v - x_mean).collect();
    let design = DMatrix::from_fn(xc.len(), 2, |i, j| if j == 0 { xc[i] } else { 1.0 });
    let (coefs, xtx_inv) = least_squares(&design, &DVector::from_column_slice(&y))
        .ok_or_else(|| FitError::DegenerateData("all populations identical".into()))?;
    let residuals: Vec<f64> = y
        .iter()
        .zip((&design * &coefs).iter())
        .map(|(a, b)| a - b)
        .collect();
    let n = residuals.len();
    let sigma2 = residuals.iter().map(|r| r * r).sum::<f64>() / n as f64;
    // (beta, centred intercept) -> (log_y0, beta)
    let jac = DMatrix::from_row_slice(2, 2, &[-x_mean, 1.0, 1.0, 0.0]);
    let ls = LeastSquares {
        coefs: vec![coefs[1] - coefs[0] * x_mean, coefs[0]],
        coef_cov: &jac * (xtx_inv * sigma2) * jac.transpose(),
        residuals,
        sigma2,
    };
    Ok(gaussian_fit(
        Family::LogLogOls,
        data,
        &["log_y0", "beta"],
        ls,
        n,
        excluded,
    ))
}
