use std::f64::consts::PI;

use statrs::function::gamma::ln_gamma;

/// `log P(Y = y)` for a Poisson with mean `mu`.
pub fn poisson_log_pmf(y: f64, mu: f64) -> f64 {
    if y == 0.0 {
        return -mu;
    }
    y * mu.ln() - mu - ln_gamma(y + 1.0)
}

/// `log P(Y = y)` for NB2 with mean `mu` and dispersion `r`
/// (variance `mu + mu²/r`).
pub fn negbin_log_pmf(y: f64, mu: f64, r: f64) -> f64 {
    // r·ln(r/(r+μ)) written with ln_1p so that large r stays accurate
    let base = -r * (mu / r).ln_1p();
    if y == 0.0 {
        return base;
    }
    ln_gamma_ratio(y, r) - ln_gamma(y + 1.0) + base + y * (mu.ln() - (r + mu).ln())
}

/// `lnΓ(y + r) − lnΓ(r)` for integer-valued `y ≥ 0`.
///
/// Small counts use the exact product `r(r+1)…(r+y−1)`, which stays
/// accurate when `r` is large enough for the gamma difference to cancel.
fn ln_gamma_ratio(y: f64, r: f64) -> f64 {
    if y < 24.0 {
        (0..y as u32).map(|j| (r + f64::from(j)).ln()).sum()
    } else {
        ln_gamma(y + r) - ln_gamma(r)
    }
}

/// Gaussian log-likelihood of `residuals` with variance `sigma2`.
pub fn gaussian_log_likelihood(residuals: &[f64], sigma2: f64) -> f64 {
    let n = residuals.len() as f64;
    if sigma2 == 0.0 {
        return if residuals.iter().all(|r| *r == 0.0) {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        };
    }
    let rss: f64 = residuals.iter().map(|r| r * r).sum();
    -0.5 * n * (2.0 * PI * sigma2).ln() - 0.5 * rss / sigma2
}

/// Terms of the NB2 log-likelihood that depend on `r`, at fixed means.
///
/// Drops `-lnΓ(y+1) + y·ln μ`, which is constant in `r`.
pub(crate) fn negbin_profile_terms(ys: &[f64], mus: &[f64], r: f64) -> f64 {
    ys.iter()
        .zip(mus)
        .map(|(&y, &mu)| ln_gamma_ratio(y, r) - r * (mu / r).ln_1p() - y * (r + mu).ln())
        .sum()
}
