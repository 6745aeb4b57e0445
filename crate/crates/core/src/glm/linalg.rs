use nalgebra::{DMatrix, DVector, Matrix2, Vector2};

/// Weighted least squares of `z` on `[1, x]`.
pub(crate) fn weighted_line(x: &[f64], z: &[f64], w: &[f64]) -> Option<Vector2<f64>> {
    let mut xtwx = Matrix2::zeros();
    let mut xtwz = Vector2::zeros();
    for ((&xi, &zi), &wi) in x.iter().zip(z).zip(w) {
        xtwx[(0, 0)] += wi;
        xtwx[(0, 1)] += wi * xi;
        xtwx[(1, 1)] += wi * xi * xi;
        xtwz[0] += wi * zi;
        xtwz[1] += wi * xi * zi;
    }
    xtwx[(1, 0)] = xtwx[(0, 1)];
    xtwx.cholesky().map(|c| c.solve(&xtwz))
}

/// Ordinary least squares via QR. Returns coefficients and `(XᵀX)⁻¹`.
pub(crate) fn least_squares(
    design: &DMatrix<f64>,
    y: &DVector<f64>,
) -> Option<(DVector<f64>, DMatrix<f64>)> {
    let p = design.ncols();
    if design.nrows() < p {
        return None;
    }
    let qr = design.clone().qr();
    let r = qr.r();
    let scale = r.diagonal().amax();
    if r.diagonal().iter().any(|d| d.abs() <= scale * 1e-12) {
        return None;
    }
    let qty = qr.q().transpose() * y;
    let coefs = r.solve_upper_triangular(&qty)?;
    let r_inv = r.solve_upper_triangular(&DMatrix::identity(p, p))?;
    let xtx_inv = &r_inv * r_inv.transpose();
    Some((coefs, xtx_inv))
}

pub(crate) fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weighted_line_recovers_exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let z: Vec<f64> = x.iter().map(|v| 1.5 - 0.25 * v).collect();
        let w = [1.0, 2.0, 0.5, 3.0];
        let b = weighted_line(&x, &z, &w).unwrap();
        assert!((b[0] - 1.5).abs() < 1e-12 && (b[1] + 0.25).abs() < 1e-12);
    }

    #[test]
    fn least_squares_rejects_rank_deficient_design() {
        let design = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 1.0, 2.0, 1.0, 2.0]);
        let y = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        assert!(least_squares(&design, &y).is_none());
    }
}
