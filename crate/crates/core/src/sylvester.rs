//! Dense solver for `X P − A X = C` via the Kronecker-vectorized system
//! `(Pᵀ ⊗ I − I ⊗ A) vec(X) = vec(C)`. Fine for the small sizes here.

use crate::error::{Error, Result};
use crate::interval::Mat;

/// Pivot ratio below which the system is treated as singular.
const SINGULAR_RATIO: f64 = 1e-13;

pub fn solve_sylvester(a: &Mat, p: &Mat, c: &Mat) -> Result<Mat> {
    let (m, k) = (a.nrows(), p.nrows());
    if !a.is_square() || !p.is_square() || c.shape() != (m, k) {
        return Err(Error::Dimension(format!(
            "A {:?}, P {:?}, C {:?}",
            a.shape(),
            p.shape(),
            c.shape()
        )));
    }
    let n = m * k;
    let mut big = Mat::zeros(n, n);
    // column-major vec: X[(i, j)] sits at j*m + i
    for j in 0..k {
        for l in 0..k {
            let pl = p[(l, j)];
            if pl != 0.0 {
                for i in 0..m {
                    big[(j * m + i, l * m + i)] += pl;
                }
            }
        }
        for i in 0..m {
            for r in 0..m {
                big[(j * m + i, j * m + r)] -= a[(i, r)];
            }
        }
    }
    let rhs = nalgebra::DVector::from_column_slice(c.as_slice());
    let lu = big.lu();
    let u = lu.u();
    let diag = u.diagonal().map(f64::abs);
    if diag.min() <= SINGULAR_RATIO * diag.max().max(f64::MIN_POSITIVE) {
        return Err(Error::Resonant);
    }
    let x = lu.solve(&rhs).ok_or(Error::Resonant)?;
    Ok(Mat::from_column_slice(m, k, x.as_slice()))
}
