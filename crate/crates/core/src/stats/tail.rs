//! Log-scale tail probabilities that stay finite far past `f64` underflow.

use std::f64::consts::{LN_2, PI};

use statrs::function::erf::erfc;
use statrs::function::gamma::{gamma_ur, ln_gamma};

/// `ln P(Z > x)` for a standard normal `Z`.
pub fn ln_normal_sf(x: f64) -> f64 {
    if x < 20.0 {
        return (0.5 * erfc(x / std::f64::consts::SQRT_2)).ln();
    }
    // Mills ratio by backward continued fraction: x + 1/(x + 2/(x + 3/(x + …)))
    let mut cf = x;
    for k in (1..=80).rev() {
        cf = x + f64::from(k) / cf;
    }
    -0.5 * x * x - 0.5 * (2.0 * PI).ln() - cf.ln()
}

/// `ln P(X > x)` for `X ~ χ²(df)`.
pub fn ln_chi2_sf(x: f64, df: usize) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    match df {
        0 => f64::NEG_INFINITY,
        1 => LN_2 + ln_normal_sf(x.sqrt()),
        2 => -x / 2.0,
        _ => {
            let s = df as f64 / 2.0;
            let half = x / 2.0;
            let q = gamma_ur(s, half);
            if q > 1e-300 {
                q.ln()
            } else {
                // Γ(s, t) ~ t^(s-1) e^(-t) (1 + (s-1)/t + (s-1)(s-2)/t² …)
                let mut term = 1.0;
                let mut sum = 1.0;
                for k in 1..20 {
                    term *= (s - k as f64) / half;
                    sum += term;
                    if term.abs() < 1e-17 {
                        break;
                    }
                }
                (s - 1.0) * half.ln() - half + sum.ln() - ln_gamma(s)
            }
        }
    }
}
