//! Interval observer in KKL coordinates.
//!
//! Bounds on `z = T(x)` are propagated in framed coordinates `ẑ = R_k z`,
//! where the propagation matrix `Λ` is constant and nonnegative, mapped back
//! to `z` through `S_k = R_k⁻¹`, then turned into state bounds by inverting
//! `T` at both ends and widening by the inverse-Lipschitz margin.

use std::sync::Arc;

use crate::coord_change::CoordChangeSeq;
use crate::error::{Error, Result};
use crate::interval::{
    abs_mat, check_order, inf_norm, interval_image, split_neg, split_pos, Vector,
};
use crate::transform::{DerivedConstants, InverseConfig, KklTransform};

/// How the two inverse images `T*(z⁺)`, `T*(z⁻)` are combined before the
/// margin is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RecoveryVariant {
    /// Upper bound from the componentwise min, lower from the max.
    #[default]
    MinMax,
    /// Both bounds centered on `T*(z⁺)`.
    PlusOnly,
    /// Both bounds centered on `T*(z⁻)`.
    MinusOnly,
    /// Upper bound from the max, lower from the min.
    Swapped,
}

impl std::str::FromStr for RecoveryVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "minmax" => Ok(Self::MinMax),
            "plusonly" | "plus" => Ok(Self::PlusOnly),
            "minusonly" | "minus" => Ok(Self::MinusOnly),
            "swapped" | "maxmin" => Ok(Self::Swapped),
            other => Err(Error::Config(format!("unknown recovery variant '{other}'"))),
        }
    }
}

impl std::fmt::Display for RecoveryVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::MinMax => "minmax",
            Self::PlusOnly => "plus-only",
            Self::MinusOnly => "minus-only",
            Self::Swapped => "swapped",
        })
    }
}

#[derive(Debug, Clone)]
pub struct ObserverConfig {
    pub transform: Arc<KklTransform>,
    pub coord: CoordChangeSeq,
    pub constants: DerivedConstants,
    pub gamma: f64,
    pub inverse_cfg: InverseConfig,
    /// `c / γ^{m̄−1}`.
    pub margin_c_over_gamma: f64,
    pub recovery_variant: RecoveryVariant,
}

impl ObserverConfig {
    pub fn new(
        transform: Arc<KklTransform>,
        constants: DerivedConstants,
        inverse_cfg: InverseConfig,
        recovery_variant: RecoveryVariant,
    ) -> Result<Self> {
        let target = transform.target();
        let gamma = target.gamma;
        let coord = CoordChangeSeq::new(&target.design.blocks(), gamma)?;
        let margin = constants.margin(gamma, target.m_bar());
        if !(margin > 0.0 && margin.is_finite() && constants.c_l > 0.0 && constants.c_l.is_finite())
        {
            return Err(Error::InvalidArgument(format!(
                "observer constants must be positive and finite (c_L = {}, margin = {margin})",
                constants.c_l
            )));
        }
        Ok(Self {
            transform,
            coord,
            constants,
            gamma,
            inverse_cfg,
            margin_c_over_gamma: margin,
            recovery_variant,
        })
    }

    fn n_z(&self) -> usize {
        self.coord.dim()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObserverState {
    pub k: u64,
    pub zhat_hi: Vector,
    pub zhat_lo: Vector,
    pub z_hi: Vector,
    pub z_lo: Vector,
    pub x_hi: Vector,
    pub x_lo: Vector,
    /// `‖T(T*(z⁺)) − z⁺‖∞` from the latest recovery.
    pub resid_hi: f64,
    /// `‖T(T*(z⁻)) − z⁻‖∞` from the latest recovery.
    pub resid_lo: f64,
    warm_hi: Option<Vector>,
    warm_lo: Option<Vector>,
}

impl ObserverState {
    pub fn width_x(&self) -> f64 {
        inf_norm(&(&self.x_hi - &self.x_lo))
    }

    pub fn width_z(&self) -> f64 {
        inf_norm(&(&self.z_hi - &self.z_lo))
    }

    pub fn width_zhat(&self) -> f64 {
        inf_norm(&(&self.zhat_hi - &self.zhat_lo))
    }
}

/// Initial bounds from the corners of the initial box.
pub fn init_observer(
    cfg: &ObserverConfig,
    x0_lo: &Vector,
    x0_hi: &Vector,
) -> Result<ObserverState> {
    let t = &cfg.transform;
    if x0_lo.len() != t.plant().n_x || x0_hi.len() != t.plant().n_x {
        return Err(Error::Dimension(
            "initial corners must have the state dimension".into(),
        ));
    }
    check_order(x0_lo, x0_hi)?;
    let t_hi = t.eval(x0_hi);
    let t_lo = t.eval(x0_lo);
    let spread = cfg.constants.c_l * (x0_hi - x0_lo).max();
    let z_hi = t_hi.zip_map(&t_lo, |a, b| a.min(b) + spread);
    let z_lo = t_hi.zip_map(&t_lo, |a, b| a.max(b) - spread);
    let (zhat_lo, zhat_hi) = interval_image(&cfg.coord.r(0), &z_lo, &z_hi)?;
    Ok(ObserverState {
        k: 0,
        zhat_hi,
        zhat_lo,
        z_hi,
        z_lo,
        x_hi: x0_hi.clone(),
        x_lo: x0_lo.clone(),
        resid_hi: 0.0,
        resid_lo: 0.0,
        warm_hi: None,
        warm_lo: None,
    })
}

/// One observer step with output `y_k` and bounds on its noise and on the
/// state disturbance, followed by recovery of the state bounds.
pub fn step(
    state: &ObserverState,
    cfg: &ObserverConfig,
    y: &Vector,
    w_lo: &Vector,
    w_hi: &Vector,
    d_lo: &Vector,
    d_hi: &Vector,
) -> Result<ObserverState> {
    let mut next = propagate(state, cfg, y, w_lo, w_hi, d_lo, d_hi)?;
    recover_x_bounds(&mut next, cfg)?;
    Ok(next)
}

/// Framed propagation and z-bound recovery only; x-bounds are carried over.
pub fn propagate(
    state: &ObserverState,
    cfg: &ObserverConfig,
    y: &Vector,
    w_lo: &Vector,
    w_hi: &Vector,
    d_lo: &Vector,
    d_hi: &Vector,
) -> Result<ObserverState> {
    check_order(w_lo, w_hi)?;
    check_order(d_lo, d_hi)?;
    let target = cfg.transform.target();
    if y.len() != target.b.ncols() || w_lo.len() != y.len() {
        return Err(Error::Dimension(
            "output and noise bounds must have n_y entries".into(),
        ));
    }
    let k1 = state.k + 1;
    let r1 = cfg.coord.r(k1);
    let rb = &r1 * &target.b;
    let (rb_pos, rb_neg) = (split_pos(&rb), split_neg(&rb));
    let lam = &cfg.coord.lambda;
    let drive = &rb * y;
    let mut zhat_hi = lam * &state.zhat_hi + &drive + &rb_neg * w_hi - &rb_pos * w_lo;
    let mut zhat_lo = lam * &state.zhat_lo + &drive + &rb_neg * w_lo - &rb_pos * w_hi;

    let d_max = d_lo.amax().max(d_hi.amax());
    if d_max > 0.0 {
        let delta = cfg.constants.c_l * d_max;
        let widen = abs_mat(&r1) * Vector::from_element(cfg.n_z(), delta);
        zhat_hi += &widen;
        zhat_lo -= &widen;
    }

    let (z_lo, z_hi) = interval_image(&cfg.coord.s(k1), &zhat_lo, &zhat_hi)?;
    Ok(ObserverState {
        k: k1,
        zhat_hi,
        zhat_lo,
        z_hi,
        z_lo,
        x_hi: state.x_hi.clone(),
        x_lo: state.x_lo.clone(),
        resid_hi: state.resid_hi,
        resid_lo: state.resid_lo,
        warm_hi: state.warm_hi.clone(),
        warm_lo: state.warm_lo.clone(),
    })
}

/// State bounds from the current z-bounds; the margin is
/// `(c/γ^{m̄−1})·(width + worst inversion residual)`.
pub fn recover_x_bounds(state: &mut ObserverState, cfg: &ObserverConfig) -> Result<()> {
    if state.k == 0 {
        return Ok(());
    }
    let t = &cfg.transform;
    let inv_hi = t.invert(
        &state.z_hi,
        &cfg.inverse_cfg
            .clone()
            .with_warm_start(state.warm_hi.clone()),
    )?;
    let inv_lo = t.invert(
        &state.z_lo,
        &cfg.inverse_cfg
            .clone()
            .with_warm_start(state.warm_lo.clone()),
    )?;
    let width = (&state.z_hi - &state.z_lo).max();
    let resid = inv_hi.residual.max(inv_lo.residual);
    if resid > 10.0 * cfg.inverse_cfg.tol {
        log::debug!(
            "step {}: inversion residual {resid:e} added to the recovery margin",
            state.k
        );
    }
    let margin = cfg.margin_c_over_gamma * (width + resid);
    let (a, b) = (&inv_hi.x, &inv_lo.x);
    let (upper, lower) = match cfg.recovery_variant {
        RecoveryVariant::MinMax => (a.zip_map(b, f64::min), a.zip_map(b, f64::max)),
        RecoveryVariant::PlusOnly => (a.clone(), a.clone()),
        RecoveryVariant::MinusOnly => (b.clone(), b.clone()),
        RecoveryVariant::Swapped => (a.zip_map(b, f64::max), a.zip_map(b, f64::min)),
    };
    state.x_hi = upper.add_scalar(margin);
    state.x_lo = lower.add_scalar(-margin);
    state.resid_hi = inv_hi.residual;
    state.resid_lo = inv_lo.residual;
    state.warm_hi = Some(inv_hi.x);
    state.warm_lo = Some(inv_lo.x);
    Ok(())
}

/// Bounds `(T_d(z⁻, z⁺), T_d(z⁺, z⁻))` from a decomposition function of a
/// left inverse. Valid only when `T_d` is increasing in its first argument
/// and decreasing in its second. `T_d(z, z) = T*(z)` is spot-checked at both
/// ends and the midpoint of the interval.
pub fn recover_x_mixed_monotone<D, S>(
    z_lo: &Vector,
    z_hi: &Vector,
    decomposition: D,
    t_star: S,
    tol: f64,
) -> Result<(Vector, Vector)>
where
    D: Fn(&Vector, &Vector) -> Vector,
    S: Fn(&Vector) -> Vector,
{
    check_order(z_lo, z_hi)?;
    let mid = (z_lo + z_hi) * 0.5;
    for z in [z_lo, z_hi, &mid] {
        let gap = inf_norm(&(decomposition(z, z) - t_star(z)));
        if !(gap <= tol) {
            return Err(Error::BadDecomposition(gap));
        }
    }
    Ok((decomposition(z_lo, z_hi), decomposition(z_hi, z_lo)))
}

impl ObserverState {
    /// Mixed-monotone recovery on this state's z-bounds.
    pub fn mixed_monotone_bounds<D, S>(
        &self,
        decomposition: D,
        t_star: S,
        tol: f64,
    ) -> Result<(Vector, Vector)>
    where
        D: Fn(&Vector, &Vector) -> Vector,
        S: Fn(&Vector) -> Vector,
    {
        recover_x_mixed_monotone(&self.z_lo, &self.z_hi, decomposition, t_star, tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::{BoxRegion, Mat};
    use crate::plant::PlantModel;
    use crate::transform::{monomials_up_to, ConstantSource, TargetDesign};
    use nalgebra::{dmatrix, dvector};

    fn oscillator_cfg(variant: RecoveryVariant) -> ObserverConfig {
        let plant = Arc::new(PlantModel::oscillator(0.1).unwrap());
        let target = TargetDesign::diagonal(&[0.1, 0.2, 0.3, 0.4])
            .unwrap()
            .with_gamma(1.0)
            .unwrap();
        let t = KklTransform::polynomial(plant.clone(), target, &monomials_up_to(2, 2)).unwrap();
        let consts = DerivedConstants {
            c_l: 25.0,
            c_i: 1e-5,
            c: 1e5,
            source: ConstantSource::Sampled,
        };
        ObserverConfig::new(
            Arc::new(t),
            consts,
            InverseConfig::for_plant(&plant),
            variant,
        )
        .unwrap()
    }

    #[test]
    fn point_initialization() {
        let cfg = oscillator_cfg(RecoveryVariant::MinMax);
        let x0 = dvector![0.7, -0.2];
        let s = init_observer(&cfg, &x0, &x0).unwrap();
        let z = cfg.transform.eval(&x0);
        assert_eq!(s.z_hi, z);
        assert_eq!(s.z_lo, z);
        assert_eq!(s.zhat_hi, z);
        assert_eq!(s.x_hi, x0);
    }

    #[test]
    fn initial_width_identity() {
        let cfg = oscillator_cfg(RecoveryVariant::MinMax);
        let (lo, hi) = (dvector![0.5, -0.5], dvector![1.5, 0.5]);
        let s = init_observer(&cfg, &lo, &hi).unwrap();
        let gap = (cfg.transform.eval(&hi) - cfg.transform.eval(&lo)).abs();
        let expected = gap.map(|g| 2.0 * cfg.constants.c_l - g);
        assert!(((&s.z_hi - &s.z_lo) - expected).amax() < 1e-12);
        assert!(s.z_lo.iter().zip(s.z_hi.iter()).all(|(a, b)| a <= b));
        assert!(init_observer(&cfg, &hi, &lo).is_err());
    }

    #[test]
    fn known_noise_collapses() {
        let cfg = oscillator_cfg(RecoveryVariant::MinMax);
        let x0 = dvector![1.0, 0.0];
        let s0 = init_observer(&cfg, &x0, &x0).unwrap();
        let w = dvector![0.05];
        let y = cfg.transform.plant().h(&x0) + &w;
        let z0 = Vector::zeros(2);
        let s1 = propagate(&s0, &cfg, &y, &w, &w, &z0, &z0).unwrap();
        let truth = cfg.transform.eval(&cfg.transform.plant().f(&x0));
        assert!((&s1.z_hi - &truth).amax() < 1e-12);
        assert!((&s1.z_lo - &truth).amax() < 1e-12);
    }

    #[test]
    fn zero_width_recovery_is_exact() {
        let cfg = oscillator_cfg(RecoveryVariant::MinMax);
        let x0 = dvector![0.9, 0.3];
        let s0 = init_observer(&cfg, &x0, &x0).unwrap();
        let y = cfg.transform.plant().h(&x0);
        let zero1 = Vector::zeros(1);
        let zero2 = Vector::zeros(2);
        let s1 = step(&s0, &cfg, &y, &zero1, &zero1, &zero2, &zero2).unwrap();
        let x1 = cfg.transform.plant().f(&x0);
        assert!((&s1.x_hi - &x1).amax() < 1e-4);
        assert!((&s1.x_lo - &x1).amax() < 1e-4);
    }

    #[test]
    fn bad_noise_order_rejected() {
        let cfg = oscillator_cfg(RecoveryVariant::MinMax);
        let x0 = dvector![1.0, 0.0];
        let s0 = init_observer(&cfg, &x0, &x0).unwrap();
        let z2 = Vector::zeros(2);
        let r = propagate(
            &s0,
            &cfg,
            &dvector![0.0],
            &dvector![0.1],
            &dvector![-0.1],
            &z2,
            &z2,
        );
        assert!(matches!(r, Err(Error::BoundOrder(_))));
    }

    #[test]
    fn variant_parsing() {
        for v in [
            RecoveryVariant::MinMax,
            RecoveryVariant::PlusOnly,
            RecoveryVariant::MinusOnly,
            RecoveryVariant::Swapped,
        ] {
            assert_eq!(v.to_string().parse::<RecoveryVariant>().unwrap(), v);
        }
        assert!("sideways".parse::<RecoveryVariant>().is_err());
    }

    #[test]
    fn linear_decomposition_matches_interval_image() {
        let p = dmatrix![1.0, -2.0; 0.5, 3.0];
        let (pp, pn) = (split_pos(&p), split_neg(&p));
        let td = |u: &Vector, v: &Vector| &pp * u - &pn * v;
        let ts = |z: &Vector| &p * z;
        let (lo, hi) = (dvector![-1.0, 0.5], dvector![2.0, 0.75]);
        let (xl, xh) = recover_x_mixed_monotone(&lo, &hi, td, ts, 1e-12).unwrap();
        let (il, ih) = interval_image(&p, &lo, &hi).unwrap();
        assert_eq!((xl, xh), (il, ih));
    }

    #[test]
    fn degenerate_mixed_monotone() {
        let p: Mat = dmatrix![2.0, -1.0; 0.0, 1.0];
        let (pp, pn) = (split_pos(&p), split_neg(&p));
        let z = dvector![0.3, -0.4];
        let (xl, xh) = recover_x_mixed_monotone(
            &z,
            &z,
            |u: &Vector, v: &Vector| &pp * u - &pn * v,
            |q: &Vector| &p * q,
            1e-12,
        )
        .unwrap();
        assert_eq!(xl, &p * &z);
        assert_eq!(xh, &p * &z);
    }

    #[test]
    fn inconsistent_decomposition_rejected() {
        let z = BoxRegion::symmetric(1, 1.0);
        let r = recover_x_mixed_monotone(
            &z.lo,
            &z.hi,
            |u: &Vector, _: &Vector| u * 2.0,
            |q: &Vector| q.clone(),
            1e-9,
        );
        assert!(matches!(r, Err(Error::BadDecomposition(_))));
    }
}
