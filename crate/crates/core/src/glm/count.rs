//! Log-link count models: power-law Poisson and NB2, plus their
//! intercept-only nulls.

use nalgebra::{DMatrix, Matrix2};
use serde::{Deserialize, Serialize};

use super::likelihood::{negbin_log_pmf, negbin_profile_terms, poisson_log_pmf};
use super::linalg::{to_rows, weighted_line};
use super::{
    require_rows, DispersionGrid, Family, FitError, FitFlag, FitOptions, Param, ScalingFit,
};
use crate::dataset::Dataset;

const ETA_LIMIT: f64 = 700.0;
/// Absolute slack on the deviance when deciding whether to halve a step.
const STEP_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NullFamily {
    Poisson,
    NegBin,
    Gaussian,
}

#[derive(Debug, Clone, Copy)]
enum Kind {
    Poisson,
    NegBin(f64),
}

impl Kind {
    fn unit_deviance(self, y: f64, mu: f64) -> f64 {
        let ylogy = if y > 0.0 { y * (y / mu).ln() } else { 0.0 };
        match self {
            Kind::Poisson => 2.0 * (ylogy - (y - mu)),
            Kind::NegBin(r) => 2.0 * (ylogy - (y + r) * ((y + r) / (mu + r)).ln()),
        }
    }

    fn working_weight(self, mu: f64) -> f64 {
        match self {
            Kind::Poisson => mu,
            Kind::NegBin(r) => mu * r / (r + mu),
        }
    }

    /// Negative second derivative of the log-likelihood in the linear predictor.
    fn observed_weight(self, y: f64, mu: f64) -> f64 {
        match self {
            Kind::Poisson => mu,
            Kind::NegBin(r) => mu * r * (y + r) / ((r + mu) * (r + mu)),
        }
    }

    fn log_pmf(self, y: f64, mu: f64) -> f64 {
        match self {
            Kind::Poisson => poisson_log_pmf(y, mu),
            Kind::NegBin(r) => negbin_log_pmf(y, mu, r),
        }
    }
}

/// `log μ = a + b·(log N − x̄)`; centring keeps the normal equations well
/// conditioned and makes the slope invariant to rescaling `N`.
struct LogLinear {
    x: Vec<f64>,
    x_mean: f64,
    y: Vec<f64>,
}

impl LogLinear {
    fn new(data: &Dataset) -> Self {
        let logs: Vec<f64> = data.populations().map(f64::ln).collect();
        let x_mean = logs.iter().sum::<f64>() / logs.len() as f64;
        Self {
            x: logs.iter().map(|l| l - x_mean).collect(),
            x_mean,
            y: data.counts().collect(),
        }
    }

    fn means(&self, coef: [f64; 2]) -> Vec<f64> {
        self.x
            .iter()
            .map(|x| (coef[0] + coef[1] * x).clamp(-ETA_LIMIT, ETA_LIMIT).exp())
            .collect()
    }

    fn deviance(&self, coef: [f64; 2], kind: Kind) -> f64 {
        self.means(coef)
            .iter()
            .zip(&self.y)
            .map(|(&mu, &y)| kind.unit_deviance(y, mu))
            .sum()
    }

    fn log_likelihood(&self, coef: [f64; 2], kind: Kind) -> f64 {
        self.means(coef)
            .iter()
            .zip(&self.y)
            .map(|(&mu, &y)| kind.log_pmf(y, mu))
            .sum()
    }

    /// OLS of `log(Y + 1)` on centred `log N`.
    fn initial(&self) -> Result<[f64; 2], FitError> {
        let z: Vec<f64> = self.y.iter().map(|y| y.ln_1p()).collect();
        let w = vec![1.0; z.len()];
        weighted_line(&self.x, &z, &w)
            .map(|b| [b[0], b[1]])
            .ok_or_else(|| FitError::DegenerateData("all populations identical".into()))
    }

    /// Covariance of `(log Y₀, β)` from the observed information.
    fn covariance(&self, coef: [f64; 2], kind: Kind) -> Option<Matrix2<f64>> {
        let mut info = Matrix2::zeros();
        for (&x, (&mu, &y)) in self.x.iter().zip(self.means(coef).iter().zip(&self.y)) {
            let w = kind.observed_weight(y, mu);
            info[(0, 0)] += w;
            info[(0, 1)] += w * x;
            info[(1, 1)] += w * x * x;
        }
        info[(1, 0)] = info[(0, 1)];
        let centred = info.cholesky()?.inverse();
        let jac = Matrix2::new(1.0, -self.x_mean, 0.0, 1.0);
        let cov = jac * centred * jac.transpose();
        Some((cov + cov.transpose()) * 0.5)
    }

    fn uncentre(&self, coef: [f64; 2]) -> [f64; 2] {
        [coef[0] - coef[1] * self.x_mean, coef[1]]
    }
}

struct IrlsOutcome {
    coef: [f64; 2],
    iterations: usize,
    converged: bool,
}

fn irls(
    model: &LogLinear,
    start: [f64; 2],
    kind: Kind,
    opts: &FitOptions,
) -> Result<IrlsOutcome, FitError> {
    let mut coef = start;
    let mut dev = model.deviance(coef, kind);
    for it in 1..=opts.max_iterations {
        let mus = model.means(coef);
        let mut z = Vec::with_capacity(mus.len());
        let mut w = Vec::with_capacity(mus.len());
        for ((&x, &mu), &y) in model.x.iter().zip(&mus).zip(&model.y) {
            z.push(coef[0] + coef[1] * x + (y - mu) / mu);
            w.push(kind.working_weight(mu));
        }
        let step = weighted_line(&model.x, &z, &w)
            .ok_or_else(|| FitError::DegenerateData("singular weighted normal equations".into()))?;
        let mut next = [step[0], step[1]];
        let mut next_dev = model.deviance(next, kind);
        let mut halvings = 0;
        let improves = |d: f64| d <= dev + STEP_SLACK; // false for NaN
        while !improves(next_dev) && halvings < 50 {
            next = [(next[0] + coef[0]) / 2.0, (next[1] + coef[1]) / 2.0];
            next_dev = model.deviance(next, kind);
            halvings += 1;
        }
        if !improves(next_dev) {
            // no improving step exists along the scoring direction
            return Ok(IrlsOutcome {
                coef,
                iterations: it,
                converged: true,
            });
        }
        let change = (dev - next_dev).abs() / (next_dev.abs() + 0.1);
        coef = next;
        dev = next_dev;
        if change < opts.tolerance {
            return Ok(IrlsOutcome {
                coef,
                iterations: it,
                converged: true,
            });
        }
    }
    Ok(IrlsOutcome {
        coef,
        iterations: opts.max_iterations,
        converged: false,
    })
}

fn check_counts(data: &Dataset) -> Result<(), FitError> {
    if data.counts().all(|y| y == 0.0) {
        return Err(FitError::DegenerateData("all counts are zero".into()));
    }
    Ok(())
}

fn power_law_fit(
    family: Family,
    data: &Dataset,
    model: &LogLinear,
    coef: [f64; 2],
    kind: Kind,
) -> Result<ScalingFit, FitError> {
    let cov = model
        .covariance(coef, kind)
        .ok_or_else(|| FitError::DegenerateData("information matrix is singular".into()))?;
    let [log_y0, beta] = model.uncentre(coef);
    Ok(ScalingFit {
        family,
        dataset: data.label().to_string(),
        data_digest: data.digest(),
        params: vec![
            Param {
                name: "log_y0".into(),
                value: log_y0,
            },
            Param {
                name: "beta".into(),
                value: beta,
            },
        ],
        dispersion: match kind {
            Kind::Poisson => None,
            Kind::NegBin(r) => Some(r),
        },
        log_likelihood: model.log_likelihood(coef, kind),
        covariance: vec![
            vec![cov[(0, 0)], cov[(0, 1)]],
            vec![cov[(1, 0)], cov[(1, 1)]],
        ],
        n_obs: data.len(),
        converged: false,
        iterations: 0,
        excluded_rows: 0,
        flags: Vec::new(),
    })
}

/// Poisson regression with `μ = Y₀·N^β`.
pub fn fit_powerlaw_poisson(data: &Dataset, opts: &FitOptions) -> Result<ScalingFit, FitError> {
    opts.validate()?;
    require_rows(data, 3)?;
    check_counts(data)?;
    let model = LogLinear::new(data);
    let start = model.initial()?;
    let out = irls(&model, start, Kind::Poisson, opts)?;
    let mut fit = power_law_fit(
        Family::PowerLawPoisson,
        data,
        &model,
        out.coef,
        Kind::Poisson,
    )?;
    fit.converged = out.converged;
    fit.iterations = out.iterations;
    Ok(fit)
}

/// NB2 regression with `μ = Y₀·N^β`, alternating IRLS for the regression
/// coefficients with a profile search over `r`.
///
/// Standard errors condition on the final `r`.
pub fn fit_powerlaw_negbin(data: &Dataset, opts: &FitOptions) -> Result<ScalingFit, FitError> {
    opts.validate()?;
    require_rows(data, 3)?;
    check_counts(data)?;
    let model = LogLinear::new(data);
    let mut coef = model.initial()?;
    let grid = opts.dispersion_grid;
    let mut r = moment_dispersion(&model.y, &model.means(coef)).clamp(grid.min, grid.max);
    let mut at_edge = false;
    let mut prev_ll = f64::NEG_INFINITY;
    let mut converged = false;
    let mut iterations = opts.max_iterations;

    for outer in 1..=opts.max_iterations {
        coef = irls(&model, coef, Kind::NegBin(r), opts)?.coef;
        let mus = model.means(coef);
        let profile = profile_dispersion(&model.y, &mus, &grid);
        if negbin_profile_terms(&model.y, &mus, profile.r)
            >= negbin_profile_terms(&model.y, &mus, r)
        {
            r = profile.r;
            at_edge = profile.at_edge;
        }
        let ll = model.log_likelihood(coef, Kind::NegBin(r));
        if (ll - prev_ll).abs() / (ll.abs() + 0.1) < opts.tolerance {
            converged = true;
            iterations = outer;
            break;
        }
        prev_ll = ll;
    }

    let mut fit = power_law_fit(Family::PowerLawNegBin, data, &model, coef, Kind::NegBin(r))?;
    fit.converged = converged;
    fit.iterations = iterations;
    if at_edge {
        log::warn!(
            "{}: dispersion optimum at search boundary (r = {r:e})",
            data.label()
        );
        fit.flags.push(FitFlag::DispersionBoundary);
    }
    Ok(fit)
}

/// Method-of-moments NB2 dispersion from Pearson-type residuals.
fn moment_dispersion(ys: &[f64], mus: &[f64]) -> f64 {
    let (num, den) = ys.iter().zip(mus).fold((0.0, 0.0), |(n, d), (&y, &mu)| {
        (n + mu * mu, d + (y - mu) * (y - mu) - mu)
    });
    if den > 0.0 && num > 0.0 {
        num / den
    } else {
        f64::INFINITY
    }
}

struct Profile {
    r: f64,
    at_edge: bool,
}

/// Maximises the NB2 likelihood over `r` at fixed means: a coarse
/// log-spaced scan, golden-section refinement around the best point, and one
/// retry on a bracket widened by 10³ each way if the scan lands on an edge.
fn profile_dispersion(ys: &[f64], mus: &[f64], grid: &DispersionGrid) -> Profile {
    let first = scan_dispersion(ys, mus, grid.min, grid.max, grid.steps);
    if !first.at_edge {
        return first;
    }
    scan_dispersion(ys, mus, grid.min * 1e-3, grid.max * 1e3, grid.steps)
}

fn scan_dispersion(ys: &[f64], mus: &[f64], min: f64, max: f64, steps: usize) -> Profile {
    let f = |t: f64| negbin_profile_terms(ys, mus, t.exp());
    let (lo, hi) = (min.ln(), max.ln());
    let h = (hi - lo) / (steps - 1) as f64;
    let knots: Vec<f64> = (0..steps).map(|k| lo + h * k as f64).collect();
    let values: Vec<f64> = knots.iter().map(|&t| f(t)).collect();
    let best = values
        .iter()
        .enumerate()
        .fold(0, |b, (k, v)| if *v > values[b] { k } else { b });
    let a = knots[best.saturating_sub(1)];
    let b = knots[(best + 1).min(steps - 1)];
    let t = golden_section_max(f, a, b, 1e-10);
    let t = if f(t) >= values[best] { t } else { knots[best] };
    Profile {
        r: t.exp(),
        at_edge: best == 0 || best == steps - 1,
    }
}

fn golden_section_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    (a + b) / 2.0
}

/// Intercept-only counterpart of a model family.
///
/// Poisson and NB nulls use `μ̂ = ȳ` (the NB null re-profiles `r`); the
/// Gaussian null uses the sample mean and population variance.
pub fn fit_null(
    family: NullFamily,
    data: &Dataset,
    opts: &FitOptions,
) -> Result<ScalingFit, FitError> {
    opts.validate()?;
    require_rows(data, 1)?;
    let ys: Vec<f64> = data.counts().collect();
    let n = ys.len() as f64;
    let mean = data.mean_count();
    let base = ScalingFit {
        family: Family::NullPoisson,
        dataset: data.label().to_string(),
        data_digest: data.digest(),
        params: Vec::new(),
        dispersion: None,
        log_likelihood: 0.0,
        covariance: Vec::new(),
        n_obs: data.len(),
        converged: true,
        iterations: 0,
        excluded_rows: 0,
        flags: Vec::new(),
    };
    let log_mu = |mean: f64| -> Result<Vec<Param>, FitError> {
        if mean == 0.0 {
            return Err(FitError::DegenerateData("all counts are zero".into()));
        }
        Ok(vec![Param {
            name: "log_mu".into(),
            value: mean.ln(),
        }])
    };
    match family {
        NullFamily::Poisson => Ok(ScalingFit {
            family: Family::NullPoisson,
            params: log_mu(mean)?,
            log_likelihood: ys.iter().map(|&y| poisson_log_pmf(y, mean)).sum(),
            covariance: vec![vec![1.0 / (n * mean)]],
            ..base
        }),
        NullFamily::NegBin => {
            let params = log_mu(mean)?;
            let mus = vec![mean; ys.len()];
            let profile = profile_dispersion(&ys, &mus, &opts.dispersion_grid);
            let r = profile.r;
            let info: f64 = ys
                .iter()
                .map(|&y| Kind::NegBin(r).observed_weight(y, mean))
                .sum();
            let mut fit = ScalingFit {
                family: Family::NullNegBin,
                params,
                dispersion: Some(r),
                log_likelihood: ys.iter().map(|&y| negbin_log_pmf(y, mean, r)).sum(),
                covariance: vec![vec![1.0 / info]],
                iterations: 1,
                ..base
            };
            if profile.at_edge {
                fit.flags.push(FitFlag::DispersionBoundary);
            }
            Ok(fit)
        }
        NullFamily::Gaussian => {
            let sigma2 = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / n;
            let resid: Vec<f64> = ys.iter().map(|y| y - mean).collect();
            let cov = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                sigma2 / n,
                2.0 * sigma2 * sigma2 / n,
            ]));
            let mut fit = ScalingFit {
                family: Family::NullGaussian,
                params: vec![
                    Param {
                        name: "mean".into(),
                        value: mean,
                    },
                    Param {
                        name: "sigma2".into(),
                        value: sigma2,
                    },
                ],
                log_likelihood: super::gaussian_log_likelihood(&resid, sigma2),
                covariance: to_rows(&cov),
                ..base
            };
            if sigma2 == 0.0 {
                fit.flags.push(FitFlag::PerfectFit);
            }
            Ok(fit)
        }
    }
}
