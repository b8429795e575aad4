//! Dense vector/matrix primitives shared by the observer: the nonnegative
//! split `M = M⁺ − M⁻`, guaranteed interval images and the ∞-norm.
//!
//! The ∞-norm is used everywhere in this crate. Splits use exact
//! comparison against zero, so `split_pos(M) - split_neg(M)` reproduces
//! `M` bit for bit.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Entrywise `max{0, m_ij}`.
pub fn split_pos(m: &Mat) -> Mat {
    m.map(|v| if v > 0.0 { v } else { 0.0 })
}

/// `split_pos(m) - m`, i.e. entrywise `max{0, -m_ij}`.
pub fn split_neg(m: &Mat) -> Mat {
    m.map(|v| if v < 0.0 { -v } else { 0.0 })
}

/// Entrywise absolute value, equal to `split_pos(m) + split_neg(m)`.
pub fn abs_mat(m: &Mat) -> Mat {
    m.map(f64::abs)
}

/// Returns `(lo, hi)` with `lo <= m a <= hi` for every `a_lo <= a <= a_hi`.
pub fn interval_image(m: &Mat, a_lo: &Vector, a_hi: &Vector) -> Result<(Vector, Vector)> {
    if a_lo.len() != m.ncols() || a_hi.len() != m.ncols() {
        return Err(Error::Dimension(format!(
            "matrix has {} columns, bounds have lengths {} and {}",
            m.ncols(),
            a_lo.len(),
            a_hi.len()
        )));
    }
    check_order(a_lo, a_hi)?;
    let pos = split_pos(m);
    let neg = split_neg(m);
    let lo = &pos * a_lo - &neg * a_hi;
    let hi = &pos * a_hi - &neg * a_lo;
    Ok((lo, hi))
}

pub fn inf_norm(v: &Vector) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Induced ∞-norm (maximum absolute row sum).
pub fn op_inf_norm(m: &Mat) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Errors unless `lo <= hi` componentwise.
pub fn check_order(lo: &Vector, hi: &Vector) -> Result<()> {
    if lo.len() != hi.len() {
        return Err(Error::Dimension(format!(
            "bound lengths {} and {}",
            lo.len(),
            hi.len()
        )));
    }
    if let Some(i) = (0..lo.len()).find(|&i| !(lo[i] <= hi[i])) {
        return Err(Error::BoundOrder(format!(
            "component {i}: lower {} > upper {}",
            lo[i], hi[i]
        )));
    }
    Ok(())
}

/// Block-diagonal assembly of square or rectangular blocks.
pub fn block_diag(blocks: &[Mat]) -> Mat {
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = Mat::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), (b.nrows(), b.ncols())).copy_from(b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

/// Axis-aligned box `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxRegion {
    pub lo: Vector,
    pub hi: Vector,
}

impl BoxRegion {
    pub fn new(lo: Vector, hi: Vector) -> Result<Self> {
        check_order(&lo, &hi)?;
        if lo.iter().chain(hi.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("box corners must be finite".into()));
        }
        Ok(Self { lo, hi })
    }

    /// `[-r, r]^n`.
    pub fn symmetric(n: usize, r: f64) -> Self {
        Self {
            lo: Vector::from_element(n, -r),
            hi: Vector::from_element(n, r),
        }
    }

    /// `[c - r, c + r]`.
    pub fn around(center: &Vector, r: f64) -> Self {
        Self {
            lo: center.add_scalar(-r),
            hi: center.add_scalar(r),
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn center(&self) -> Vector {
        (&self.lo + &self.hi) * 0.5
    }

    pub fn widths(&self) -> Vector {
        &self.hi - &self.lo
    }

    pub fn is_degenerate(&self) -> bool {
        self.widths().iter().any(|w| !(*w > 0.0))
    }

    pub fn contains(&self, x: &Vector) -> bool {
        x.len() == self.dim() && (0..x.len()).all(|i| self.lo[i] <= x[i] && x[i] <= self.hi[i])
    }

    pub fn contains_box(&self, other: &BoxRegion) -> bool {
        self.contains(&other.lo) && self.contains(&other.hi)
    }

    pub fn clamp(&self, x: &Vector) -> Vector {
        Vector::from_fn(x.len(), |i, _| x[i].clamp(self.lo[i], self.hi[i]))
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vector {
        Vector::from_fn(self.dim(), |i, _| {
            let (a, b) = (self.lo[i], self.hi[i]);
            if a < b {
                rng.random_range(a..=b)
            } else {
                a
            }
        })
    }

    /// The `2^n` corners, in binary counting order (bit `i` set = upper on axis `i`).
    pub fn vertices(&self) -> Vec<Vector> {
        let n = self.dim();
        (0..1usize << n)
            .map(|mask| {
                Vector::from_fn(n, |i, _| {
                    if mask >> i & 1 == 1 {
                        self.hi[i]
                    } else {
                        self.lo[i]
                    }
                })
            })
            .collect()
    }

    /// Regular lattice with `per_axis` points on each axis, first axis fastest.
    /// `per_axis == 1` gives the center.
    pub fn lattice(&self, per_axis: usize) -> Vec<Vector> {
        let n = self.dim();
        let per_axis = per_axis.max(1);
        let total = per_axis.pow(n as u32);
        (0..total)
            .map(|mut idx| {
                Vector::from_fn(n, |i, _| {
                    let j = idx % per_axis;
                    idx /= per_axis;
                    if per_axis == 1 {
                        0.5 * (self.lo[i] + self.hi[i])
                    } else {
                        self.lo[i] + (self.hi[i] - self.lo[i]) * j as f64 / (per_axis - 1) as f64
                    }
                })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn split_examples() {
        let m = dmatrix![1.0, -2.0; 0.0, 3.0];
        assert_eq!(split_pos(&m), dmatrix![1.0, 0.0; 0.0, 3.0]);
        assert_eq!(split_neg(&m), dmatrix![0.0, 2.0; 0.0, 0.0]);

        let z = Mat::zeros(2, 2);
        assert_eq!(split_pos(&z), z);

        let s = dmatrix![-0.5];
        assert_eq!(split_pos(&s), dmatrix![0.0]);
        assert_eq!(split_neg(&s), dmatrix![0.5]);

        assert_eq!(split_neg(&Mat::identity(3, 3)), Mat::zeros(3, 3));
    }

    #[test]
    fn interval_image_examples() {
        let (lo, hi) = interval_image(
            &Mat::identity(2, 2),
            &dvector![-1.0, 0.0],
            &dvector![1.0, 2.0],
        )
        .unwrap();
        assert_eq!((lo, hi), (dvector![-1.0, 0.0], dvector![1.0, 2.0]));

        let (lo, hi) = interval_image(&dmatrix![-1.0], &dvector![2.0], &dvector![3.0]).unwrap();
        assert_eq!((lo, hi), (dvector![-3.0], dvector![-2.0]));
    }

    #[test]
    fn interval_image_errors() {
        let m = Mat::identity(2, 2);
        assert!(matches!(
            interval_image(&m, &dvector![0.0], &dvector![1.0]),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            interval_image(&m, &dvector![1.0, 0.0], &dvector![0.0, 1.0]),
            Err(Error::BoundOrder(_))
        ));
    }

    #[test]
    fn norms() {
        assert_eq!(inf_norm(&dvector![1.0, -3.0, 2.0]), 3.0);
        assert_eq!(inf_norm(&dvector![0.0, 0.0]), 0.0);
        assert_eq!(inf_norm(&dvector![-0.2]), 0.2);
        assert_eq!(op_inf_norm(&dmatrix![1.0, -2.0; 0.5, 0.5]), 3.0);
    }

    #[test]
    fn box_helpers() {
        let b = BoxRegion::symmetric(2, 1.0);
        assert_eq!(b.vertices().len(), 4);
        assert_eq!(b.lattice(3).len(), 9);
        assert_eq!(b.lattice(1), vec![dvector![0.0, 0.0]]);
        assert_eq!(b.clamp(&dvector![2.0, -0.5]), dvector![1.0, -0.5]);
        assert!(BoxRegion::new(dvector![1.0], dvector![0.0]).is_err());
        assert!(BoxRegion::new(dvector![0.0], dvector![0.0])
            .unwrap()
            .is_degenerate());
    }

    fn mat_strategy() -> impl Strategy<Value = Mat> {
        (1usize..5, 1usize..5).prop_flat_map(|(r, c)| {
            prop::collection::vec(-10.0f64..10.0, r * c)
                .prop_map(move |v| Mat::from_row_slice(r, c, &v))
        })
    }

    proptest! {
        #[test]
        fn split_reconstructs_exactly(m in mat_strategy()) {
            let p = split_pos(&m);
            let n = split_neg(&m);
            prop_assert_eq!(&p - &n, m.clone());
            prop_assert!(p.iter().all(|v| *v >= 0.0));
            prop_assert!(n.iter().all(|v| *v >= 0.0));
            prop_assert!(p.iter().zip(m.iter()).all(|(a, b)| a >= b));
        }

        #[test]
        fn degenerate_interval_is_exact(m in mat_strategy(), seed in any::<u64>()) {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let a = Vector::from_fn(m.ncols(), |_, _| rng.random_range(-5.0..5.0));
            let (lo, hi) = interval_image(&m, &a, &a).unwrap();
            // One of the split products is zero in every entry, so the
            // sums contain no cancellation.
            let ma = &split_pos(&m) * &a - &split_neg(&m) * &a;
            prop_assert_eq!(&lo, &ma);
            prop_assert_eq!(&hi, &ma);
            prop_assert!((&lo - &m * &a).amax() <= 1e-12 * (1.0 + (&m * &a).amax()));
        }
    }
}
