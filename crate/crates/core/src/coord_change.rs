//! Time-varying frames `R_k` that turn the target matrix `A` into a
//! constant nonnegative Schur matrix `Λ = R_{k+1} A R_k⁻¹`.
//!
//! Only block-diagonal canonical forms are supported: nonnegative reals,
//! negative reals (sign-alternating frame) and scaled rotations
//! (counter-rotating frame). `R_k` is evaluated in closed form from `k`.

use std::f64::consts::{FRAC_PI_2, SQRT_2, TAU};

use crate::error::{Error, Result};
use crate::interval::{block_diag, Mat};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CanonicalBlock {
    /// `[λ]` with `λ >= 0`.
    PositiveReal(f64),
    /// `[λ]` with `λ < 0`.
    NegativeReal(f64),
    /// `ρ · rot(θ)`, a 2×2 block with eigenvalues `ρ e^{±iθ}`.
    Rotation { rho: f64, theta: f64 },
}

impl CanonicalBlock {
    /// Classifies a real eigenvalue.
    pub fn real(lambda: f64) -> Self {
        if lambda >= 0.0 {
            Self::PositiveReal(lambda)
        } else {
            Self::NegativeReal(lambda)
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Self::PositiveReal(_) | Self::NegativeReal(_) => 1,
            Self::Rotation { .. } => 2,
        }
    }

    pub fn modulus(&self) -> f64 {
        match *self {
            Self::PositiveReal(l) | Self::NegativeReal(l) => l.abs(),
            Self::Rotation { rho, .. } => rho,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::PositiveReal(l) => l >= 0.0 && l.is_finite(),
            Self::NegativeReal(l) => l < 0.0 && l.is_finite(),
            Self::Rotation { rho, theta } => rho > 0.0 && rho.is_finite() && theta.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("malformed block {self:?}")))
        }
    }

    /// The unscaled block matrix.
    pub fn matrix(&self) -> Mat {
        match *self {
            Self::PositiveReal(l) | Self::NegativeReal(l) => Mat::from_element(1, 1, l),
            Self::Rotation { rho, theta } => turn(theta, 1) * rho,
        }
    }

    /// Frame `R_k` for this block.
    pub fn frame(&self, k: u64) -> Mat {
        match *self {
            Self::PositiveReal(_) => Mat::identity(1, 1),
            Self::NegativeReal(_) => Mat::from_element(1, 1, sign_power(k)),
            Self::Rotation { theta, .. } => turn(theta, -i128::from(k)),
        }
    }

    /// `R_k⁻¹` for this block.
    pub fn frame_inverse(&self, k: u64) -> Mat {
        match *self {
            Self::Rotation { theta, .. } => turn(theta, i128::from(k)),
            _ => self.frame(k),
        }
    }

    /// Constant propagation block `R_{k+1}(γ·block)R_k⁻¹`.
    pub fn lambda(&self, gamma: f64) -> Mat {
        match *self {
            Self::PositiveReal(l) | Self::NegativeReal(l) => {
                Mat::from_element(1, 1, gamma * l.abs())
            }
            Self::Rotation { rho, .. } => Mat::identity(2, 2) * (gamma * rho),
        }
    }

    /// `sup_k ‖R_k‖∞`; rotations reach `√2` unless `θ` is a multiple of π/2.
    fn frame_norm_sup(&self) -> f64 {
        match *self {
            Self::Rotation { theta, .. } => match quarter_turns(theta) {
                Some(_) => 1.0,
                None => SQRT_2,
            },
            _ => 1.0,
        }
    }
}

fn sign_power(k: u64) -> f64 {
    if k.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `θ` as a whole number of quarter turns, when it is one.
fn quarter_turns(theta: f64) -> Option<i128> {
    let q = theta / FRAC_PI_2;
    ((q - q.round()).abs() < 1e-15 * q.abs().max(1.0)).then(|| q.round() as i128)
}

/// Rotation by `k θ`; exact for quarter-turn angles. Otherwise `k θ` is
/// formed without rounding and reduced modulo 2π, so large `k` keeps full
/// precision.
fn turn(theta: f64, k: i128) -> Mat {
    if let Some(q) = quarter_turns(theta) {
        let (c, s) = match (q * k).rem_euclid(4) {
            0 => (1.0, 0.0),
            1 => (0.0, 1.0),
            2 => (-1.0, 0.0),
            _ => (0.0, -1.0),
        };
        return Mat::from_row_slice(2, 2, &[c, -s, s, c]);
    }
    let t = theta.rem_euclid(TAU);
    let n = k.unsigned_abs() as f64;
    // p + e == t·n exactly
    let p = t * n;
    let e = t.mul_add(n, -p);
    let angle = p.rem_euclid(TAU) + e;
    rotation(if k < 0 { -angle } else { angle })
}

pub fn rotation(theta: f64) -> Mat {
    let (s, c) = theta.sin_cos();
    Mat::from_row_slice(2, 2, &[c, -s, s, c])
}

#[derive(Debug, Clone)]
pub struct CoordChangeSeq {
    pub blocks: Vec<CanonicalBlock>,
    pub gamma: f64,
    /// Bound on `‖R_k‖ + ‖R_k⁻¹‖` over all `k`.
    pub sigma: f64,
    pub lambda: Mat,
}

impl CoordChangeSeq {
    pub fn new(blocks: &[CanonicalBlock], gamma: f64) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidArgument("no blocks".into()));
        }
        if !(gamma > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "gamma must be positive, got {gamma}"
            )));
        }
        for b in blocks {
            b.validate()?;
            let rho = gamma * b.modulus();
            if rho >= 1.0 {
                return Err(Error::NotSchur(rho));
            }
        }
        let lambda = block_diag(&blocks.iter().map(|b| b.lambda(gamma)).collect::<Vec<_>>());
        let sigma = 2.0
            * blocks
                .iter()
                .map(|b| b.frame_norm_sup())
                .fold(0.0, f64::max);
        Ok(Self {
            blocks: blocks.to_vec(),
            gamma,
            sigma,
            lambda,
        })
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.size()).sum()
    }

    /// The γ-scaled target matrix these frames were built for.
    pub fn target_matrix(&self) -> Mat {
        block_diag(
            &self
                .blocks
                .iter()
                .map(|b| b.matrix() * self.gamma)
                .collect::<Vec<_>>(),
        )
    }

    pub fn r(&self, k: u64) -> Mat {
        block_diag(&self.blocks.iter().map(|b| b.frame(k)).collect::<Vec<_>>())
    }

    pub fn s(&self, k: u64) -> Mat {
        block_diag(
            &self
                .blocks
                .iter()
                .map(|b| b.frame_inverse(k))
                .collect::<Vec<_>>(),
        )
    }

    /// True when every frame is the identity.
    pub fn is_trivial(&self) -> bool {
        self.blocks
            .iter()
            .all(|b| matches!(b, CanonicalBlock::PositiveReal(_)))
    }

    pub fn spectral_radius(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| self.gamma * b.modulus())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::op_inf_norm;
    use std::f64::consts::PI;

    fn max_abs(m: &Mat) -> f64 {
        m.amax()
    }

    #[test]
    fn negative_block_alternates() {
        let seq = CoordChangeSeq::new(&[CanonicalBlock::real(-0.5)], 1.0).unwrap();
        assert_eq!(seq.sigma, 2.0);
        assert_eq!(seq.lambda, Mat::from_element(1, 1, 0.5));
        let a = seq.target_matrix();
        for k in 0..6 {
            let l = seq.r(k + 1) * &a * seq.s(k);
            assert_eq!(l[(0, 0)], 0.5);
        }
        assert_eq!(seq.r(3)[(0, 0)], -1.0);
    }

    #[test]
    fn positive_diagonal_has_identity_frames() {
        let blocks: Vec<_> = [0.1, 0.2, 0.3, 0.4]
            .iter()
            .map(|&l| CanonicalBlock::real(l))
            .collect();
        let seq = CoordChangeSeq::new(&blocks, 0.7).unwrap();
        assert!(seq.is_trivial());
        for k in [0, 1, 17] {
            assert_eq!(seq.r(k), Mat::identity(4, 4));
            assert_eq!(seq.s(k), Mat::identity(4, 4));
        }
        let expect = Mat::from_diagonal(&nalgebra::dvector![0.07, 0.14, 0.21, 0.28]);
        assert!(max_abs(&(&seq.lambda - expect)) < 1e-15);
    }

    #[test]
    fn rotation_block_constant_lambda() {
        let b = CanonicalBlock::Rotation {
            rho: 0.9,
            theta: PI / 3.0,
        };
        let seq = CoordChangeSeq::new(&[b], 1.0).unwrap();
        assert!(max_abs(&(&seq.lambda - Mat::identity(2, 2) * 0.9)) < 1e-15);
        let a = seq.target_matrix();
        for k in 0..6 {
            let l = seq.r(k + 1) * &a * seq.s(k);
            assert!(max_abs(&(&l - &seq.lambda)) < 1e-12);
            let rk = seq.r(k);
            assert!(max_abs(&(&rk * rk.transpose() - Mat::identity(2, 2))) < 1e-12);
        }
        assert!((seq.sigma - 2.0 * SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn quarter_turn_frames() {
        let b = CanonicalBlock::Rotation {
            rho: 0.5,
            theta: PI / 2.0,
        };
        let seq = CoordChangeSeq::new(&[b], 1.0).unwrap();
        assert!(max_abs(&(seq.r(1) - rotation(-PI / 2.0))) < 1e-15);
        assert!(max_abs(&(seq.s(1) - rotation(PI / 2.0))) < 1e-15);
        assert!(max_abs(&(seq.r(1) * seq.s(1) - Mat::identity(2, 2))) < 1e-12);
        assert_eq!(seq.sigma, 2.0);
    }

    #[test]
    fn non_schur_rejected() {
        assert!(matches!(
            CoordChangeSeq::new(&[CanonicalBlock::real(0.8)], 1.3),
            Err(Error::NotSchur(_))
        ));
        assert!(matches!(
            CoordChangeSeq::new(
                &[CanonicalBlock::Rotation {
                    rho: 1.0,
                    theta: 0.3
                }],
                1.0
            ),
            Err(Error::NotSchur(_))
        ));
    }

    #[test]
    fn sigma_bounds_mixed_blocks() {
        let blocks = [
            CanonicalBlock::real(0.3),
            CanonicalBlock::real(-0.6),
            CanonicalBlock::Rotation {
                rho: 0.8,
                theta: 1.0,
            },
        ];
        let seq = CoordChangeSeq::new(&blocks, 1.0).unwrap();
        for k in (0..10_000).step_by(37) {
            let total = op_inf_norm(&seq.r(k)) + op_inf_norm(&seq.s(k));
            assert!(total <= seq.sigma + 1e-12);
        }
    }
}
