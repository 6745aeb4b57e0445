//! Independent reference implementations used to check the library.
//!
//! Nothing here calls into the fitting or geometry code under test.

#![allow(dead_code)]

/// Small fixed datasets with clearly overdispersed counts.
pub const SMALL: [&[(u64, u64)]; 5] = [
    &[
        (10, 3),
        (20, 1),
        (50, 9),
        (100, 4),
        (200, 30),
        (500, 18),
        (1000, 95),
        (2000, 41),
    ],
    &[
        (120, 0),
        (300, 5),
        (800, 2),
        (1500, 19),
        (4000, 11),
        (9000, 70),
        (20000, 33),
    ],
    &[
        (5, 1),
        (9, 0),
        (14, 6),
        (30, 2),
        (61, 15),
        (77, 3),
        (150, 40),
        (260, 12),
        (400, 88),
        (700, 25),
    ],
    &[
        (1000, 12),
        (2500, 4),
        (6000, 55),
        (15000, 20),
        (40000, 160),
        (90000, 61),
    ],
    &[
        (3, 2),
        (7, 11),
        (12, 1),
        (25, 19),
        (40, 4),
        (90, 52),
        (130, 9),
        (300, 140),
        (600, 37),
    ],
];

/// `ln y!` by direct summation.
pub fn ln_factorial(y: u64) -> f64 {
    (2..=y).map(|k| (k as f64).ln()).sum()
}

pub fn poisson_ll(log_y0: f64, beta: f64, rows: &[(u64, u64)]) -> f64 {
    rows.iter()
        .map(|&(n, y)| {
            let log_mu = log_y0 + beta * (n as f64).ln();
            y as f64 * log_mu - log_mu.exp() - ln_factorial(y)
        })
        .sum()
}

/// NB2 log-likelihood with `Γ(y+r)/Γ(r)` expanded as a finite product.
pub fn negbin_ll(log_y0: f64, beta: f64, r: f64, rows: &[(u64, u64)]) -> f64 {
    rows.iter()
        .map(|&(n, y)| {
            let mu = (log_y0 + beta * (n as f64).ln()).exp();
            let rising: f64 = (0..y).map(|j| (r + j as f64).ln()).sum();
            rising - ln_factorial(y) + r * (r / (r + mu)).ln() + y as f64 * (mu / (r + mu)).ln()
        })
        .sum()
}

/// Maximises `f` by repeated grid search. The box recentres on the best
/// point each round and shrinks only once that point is interior.
pub fn zoom_max<const D: usize>(
    f: impl Fn(&[f64; D]) -> f64,
    mut center: [f64; D],
    mut half: [f64; D],
    points: usize,
) -> [f64; D] {
    assert!(points >= 5 && points % 2 == 1);
    for _ in 0..400 {
        let mut best = (f64::NEG_INFINITY, center, [0usize; D]);
        let total = points.pow(D as u32);
        for flat in 0..total {
            let mut idx = [0usize; D];
            let mut rem = flat;
            let mut x = center;
            for d in 0..D {
                idx[d] = rem % points;
                rem /= points;
                x[d] = center[d] - half[d] + 2.0 * half[d] * idx[d] as f64 / (points - 1) as f64;
            }
            let v = f(&x);
            if v > best.0 {
                best = (v, x, idx);
            }
        }
        center = best.1;
        let interior = best.2.iter().all(|&i| i > 0 && i < points - 1);
        if interior {
            for h in half.iter_mut() {
                *h *= 4.0 / (points - 1) as f64;
            }
        }
        if half.iter().all(|h| *h < 1e-11) {
            break;
        }
    }
    center
}

fn centred(rows: &[(u64, u64)]) -> (f64, f64) {
    let xbar = rows.iter().map(|&(n, _)| (n as f64).ln()).sum::<f64>() / rows.len() as f64;
    let ybar = rows.iter().map(|&(_, y)| y as f64).sum::<f64>() / rows.len() as f64;
    (xbar, ybar.max(0.5).ln())
}

/// Grid-search Poisson power-law MLE, returned as `(log Y₀, β)`.
pub fn poisson_mle(rows: &[(u64, u64)]) -> (f64, f64) {
    let (xbar, a0) = centred(rows);
    let [a, b] = zoom_max(
        |p: &[f64; 2]| poisson_ll(p[0] - p[1] * xbar, p[1], rows),
        [a0, 1.0],
        [3.0, 3.0],
        21,
    );
    (a - b * xbar, b)
}

/// Grid-search NB power-law MLE, returned as `(log Y₀, β, r)`.
pub fn negbin_mle(rows: &[(u64, u64)]) -> (f64, f64, f64) {
    let (xbar, a0) = centred(rows);
    let [a, b, lr] = zoom_max(
        |p: &[f64; 3]| negbin_ll(p[0] - p[1] * xbar, p[1], p[2].exp(), rows),
        [a0, 1.0, 0.0],
        [3.0, 3.0, 6.0],
        15,
    );
    (a - b * xbar, b, lr.exp())
}

/// Agreement to three significant figures: within half a unit of the third
/// significant digit of the reference value.
pub fn agrees_3sf(value: f64, reference: f64) -> bool {
    if reference == 0.0 {
        return value.abs() < 5e-4;
    }
    let unit = 10f64.powf(reference.abs().log10().floor() - 2.0);
    (value - reference).abs() <= 0.5 * unit
}

/// Winding number of a closed ring around `p`; zero means outside.
pub fn winding_number(p: (f64, f64), ring: &[(f64, f64)]) -> i32 {
    let mut wn = 0;
    for w in ring.windows(2) {
        let (a, b) = (w[0], w[1]);
        let side = (b.0 - a.0) * (p.1 - a.1) - (p.0 - a.0) * (b.1 - a.1);
        if a.1 <= p.1 {
            if b.1 > p.1 && side > 0.0 {
                wn += 1;
            }
        } else if b.1 <= p.1 && side < 0.0 {
            wn -= 1;
        }
    }
    wn
}

/// Inside the exterior and outside every hole, by winding number.
pub fn winding_contains(p: (f64, f64), exterior: &[(f64, f64)], holes: &[Vec<(f64, f64)>]) -> bool {
    winding_number(p, exterior) != 0 && holes.iter().all(|h| winding_number(p, h) == 0)
}

/// Distance from `p` to the nearest edge of any ring.
pub fn edge_distance(p: (f64, f64), rings: &[&[(f64, f64)]]) -> f64 {
    let mut best = f64::INFINITY;
    for ring in rings {
        for w in ring.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (dx, dy) = (b.0 - a.0, b.1 - a.1);
            let t = (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
            let (cx, cy) = (a.0 + t * dx, a.1 + t * dy);
            best = best.min(((p.0 - cx).powi(2) + (p.1 - cy).powi(2)).sqrt());
        }
    }
    best
}

/// Solves the normal equations `XᵀX c = Xᵀy` by Gaussian elimination.
pub fn normal_equations(design: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let k = design[0].len();
    let mut m = vec![vec![0.0; k + 1]; k];
    for (row, &yi) in design.iter().zip(y) {
        for i in 0..k {
            for j in 0..k {
                m[i][j] += row[i] * row[j];
            }
            m[i][k] += row[i] * yi;
        }
    }
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap();
        m.swap(col, pivot);
        for r in 0..k {
            if r != col {
                let factor = m[r][col] / m[col][col];
                let pivot_row = m[col].clone();
                for (cell, p) in m[r].iter_mut().zip(&pivot_row).skip(col) {
                    *cell -= factor * p;
                }
            }
        }
    }
    (0..k).map(|i| m[i][k] / m[i][i]).collect()
}
