//! Nonlinear discrete-time plants `x⁺ = f(x) + d`, `y = h(x) + w`, with a
//! user-supplied inverse `f⁻¹`, the boxes the observer design relies on,
//! and sampling estimators for the Lipschitz and distinguishability
//! constants.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::interval::{check_order, BoxRegion, Mat, Vector};
use crate::poly::Polynomial;
use crate::sampling::{collision_infimum, refined_extremum, sampled_sup};

pub type StateMap = Arc<dyn Fn(&Vector) -> Vector + Send + Sync>;
pub type BoundSeq = Arc<dyn Fn(usize) -> Vector + Send + Sync>;

/// Inflation applied to sampled upper-bound constants.
pub const UPPER_SAFETY: f64 = 1.1;
/// Deflation applied to sampled lower-bound constants.
pub const LOWER_SAFETY: f64 = 0.9;

/// Present when `f(x) = F x + g` and every output is a polynomial.
#[derive(Debug, Clone)]
pub struct PolynomialStructure {
    pub f_matrix: Mat,
    pub f_offset: Vector,
    pub outputs: Vec<Polynomial>,
}

#[derive(Clone)]
pub struct PlantModel {
    pub name: String,
    pub n_x: usize,
    pub n_y: usize,
    f: StateMap,
    f_inv: StateMap,
    h: StateMap,
    /// The invariant set.
    pub box_x: BoxRegion,
    /// Initial box `[x₀⁻, x₀⁺]`.
    pub box_x0: BoxRegion,
    /// Saturation box for backward chains and the inverse search.
    pub box_x_enlarged: BoxRegion,
    pub structure: Option<PolynomialStructure>,
}

impl fmt::Debug for PlantModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PlantModel")
            .field("name", &self.name)
            .field("n_x", &self.n_x)
            .field("n_y", &self.n_y)
            .field("box_x", &self.box_x)
            .field("box_x0", &self.box_x0)
            .field("box_x_enlarged", &self.box_x_enlarged)
            .finish_non_exhaustive()
    }
}

impl PlantModel {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        n_x: usize,
        n_y: usize,
        f: StateMap,
        f_inv: StateMap,
        h: StateMap,
        box_x: BoxRegion,
        box_x0: BoxRegion,
        box_x_enlarged: BoxRegion,
    ) -> Result<Self> {
        if n_x == 0 || n_y == 0 {
            return Err(Error::InvalidArgument("dimensions must be positive".into()));
        }
        for (label, b) in [
            ("X", &box_x),
            ("X0", &box_x0),
            ("enlarged X", &box_x_enlarged),
        ] {
            if b.dim() != n_x {
                return Err(Error::Dimension(format!(
                    "box {label} has dimension {}",
                    b.dim()
                )));
            }
        }
        if !box_x.contains_box(&box_x0) || !box_x_enlarged.contains_box(&box_x) {
            return Err(Error::InvalidArgument(
                "boxes must be nested: X0 ⊆ X ⊆ enlarged X".into(),
            ));
        }
        Ok(Self {
            name: name.into(),
            n_x,
            n_y,
            f,
            f_inv,
            h,
            box_x,
            box_x0,
            box_x_enlarged,
            structure: None,
        })
    }

    pub fn with_structure(mut self, structure: PolynomialStructure) -> Result<Self> {
        if structure.f_matrix.shape() != (self.n_x, self.n_x)
            || structure.f_offset.len() != self.n_x
            || structure.outputs.len() != self.n_y
        {
            return Err(Error::Dimension(
                "polynomial structure does not match plant".into(),
            ));
        }
        self.structure = Some(structure);
        Ok(self)
    }

    /// Semi-implicit Euler discretization of the harmonic oscillator with
    /// output `x1² − x2² + x1 + x2`.
    pub fn oscillator(tau: f64) -> Result<Self> {
        if !(tau > 0.0 && tau < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "tau must lie in (0, 1), got {tau}"
            )));
        }
        let fm = Mat::from_row_slice(2, 2, &[1.0, -tau, tau, 1.0 - tau * tau]);
        // det F = 1
        let fi = Mat::from_row_slice(2, 2, &[1.0 - tau * tau, tau, -tau, 1.0]);
        let (fm2, fi2) = (fm.clone(), fi.clone());
        let h = |x: &Vector| Vector::from_element(1, x[0] * x[0] - x[1] * x[1] + x[0] + x[1]);
        let output = Polynomial::from_terms(
            2,
            [
                (vec![2, 0], 1.0),
                (vec![0, 2], -1.0),
                (vec![1, 0], 1.0),
                (vec![0, 1], 1.0),
            ],
        );
        let plant = Self::new(
            "oscillator-siE",
            2,
            1,
            Arc::new(move |x| &fm2 * x),
            Arc::new(move |x| &fi2 * x),
            Arc::new(h),
            BoxRegion::symmetric(2, 2.0),
            BoxRegion::around(&Vector::from_vec(vec![1.0, 0.0]), 0.5),
            BoxRegion::symmetric(2, 3.0),
        )?;
        plant.with_structure(PolynomialStructure {
            f_matrix: fm,
            f_offset: Vector::zeros(2),
            outputs: vec![output],
        })
    }

    /// `x⁺ = F x`, `y = H x`.
    pub fn linear(
        f: Mat,
        h: Mat,
        box_x: BoxRegion,
        box_x0: BoxRegion,
        box_x_enlarged: BoxRegion,
    ) -> Result<Self> {
        let n_x = f.nrows();
        if f.ncols() != n_x || h.ncols() != n_x {
            return Err(Error::Dimension(
                "F must be square and H must match it".into(),
            ));
        }
        let f_inv = f
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidArgument("F is not invertible".into()))?;
        let outputs = (0..h.nrows())
            .map(|i| {
                Polynomial::from_terms(
                    n_x,
                    (0..n_x).map(|j| {
                        let mut e = vec![0; n_x];
                        e[j] = 1;
                        (e, h[(i, j)])
                    }),
                )
            })
            .collect();
        let (f2, h2) = (f.clone(), h.clone());
        let plant = Self::new(
            "linear",
            n_x,
            h.nrows(),
            Arc::new(move |x| &f2 * x),
            Arc::new(move |x| &f_inv * x),
            Arc::new(move |x| &h2 * x),
            box_x,
            box_x0,
            box_x_enlarged,
        )?;
        plant.with_structure(PolynomialStructure {
            f_matrix: f,
            f_offset: Vector::zeros(n_x),
            outputs,
        })
    }

    pub fn f(&self, x: &Vector) -> Vector {
        (self.f)(x)
    }

    pub fn f_inv(&self, x: &Vector) -> Vector {
        (self.f_inv)(x)
    }

    pub fn h(&self, x: &Vector) -> Vector {
        (self.h)(x)
    }

    /// `f⁻¹(x)` clamped to the enlarged box.
    pub fn f_inv_saturated(&self, x: &Vector) -> Vector {
        self.box_x_enlarged.clamp(&self.f_inv(x))
    }

    /// The saturated backward chain `f⁻¹(x), f⁻²(x), …` of the given length.
    pub fn backward_chain(&self, x: &Vector, len: usize) -> Vec<Vector> {
        let mut out = Vec::with_capacity(len);
        let mut cur = x.clone();
        for _ in 0..len {
            cur = self.f_inv_saturated(&cur);
            out.push(cur.clone());
        }
        out
    }

    /// Stacked map `𝒪(x)`: for each output `i`, `h_i` along the first
    /// `orders[i]` backward iterates.
    pub fn observability_map(&self, x: &Vector, orders: &[usize]) -> Vector {
        let depth = orders.iter().copied().max().unwrap_or(0);
        let chain = self.backward_chain(x, depth);
        let outputs: Vec<Vector> = chain.iter().map(|p| self.h(p)).collect();
        let mut v = Vec::with_capacity(orders.iter().sum());
        for (i, &m) in orders.iter().enumerate() {
            for y in outputs.iter().take(m) {
                v.push(y[i]);
            }
        }
        Vector::from_vec(v)
    }
}

/// Known bounds on measurement noise and additive disturbance, as
/// functions of the step index.
#[derive(Clone)]
pub struct NoiseSpec {
    pub w_lo: BoundSeq,
    pub w_hi: BoundSeq,
    pub d_lo: BoundSeq,
    pub d_hi: BoundSeq,
}

impl fmt::Debug for NoiseSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("NoiseSpec { .. }")
    }
}

impl NoiseSpec {
    pub fn zero(n_y: usize, n_x: usize) -> Self {
        Self {
            w_lo: Arc::new(move |_| Vector::zeros(n_y)),
            w_hi: Arc::new(move |_| Vector::zeros(n_y)),
            d_lo: Arc::new(move |_| Vector::zeros(n_x)),
            d_hi: Arc::new(move |_| Vector::zeros(n_x)),
        }
    }

    /// `w_k = 0.2 cos(20k)` bracketed by `0.5 / max(k, 1)²`.
    pub fn oscillator_measurement(n_x: usize) -> Self {
        let hi =
            |k: usize| Vector::from_element(1, oscillator_noise(k).max(oscillator_envelope(k)));
        let lo =
            |k: usize| Vector::from_element(1, oscillator_noise(k).min(oscillator_envelope(k)));
        Self {
            w_lo: Arc::new(lo),
            w_hi: Arc::new(hi),
            ..Self::zero(1, n_x)
        }
    }

    /// Constant disturbance bounds `[-amp, amp]^{n_x}`.
    pub fn with_disturbance(mut self, n_x: usize, amp: f64) -> Self {
        self.d_lo = Arc::new(move |_| Vector::from_element(n_x, -amp));
        self.d_hi = Arc::new(move |_| Vector::from_element(n_x, amp));
        self
    }

    pub fn check(&self, k: usize) -> Result<()> {
        check_order(&(self.w_lo)(k), &(self.w_hi)(k))?;
        check_order(&(self.d_lo)(k), &(self.d_hi)(k))
    }
}

pub fn oscillator_noise(k: usize) -> f64 {
    0.2 * (20.0 * k as f64).cos()
}

/// `0.5 / k²`, guarded at `k = 0`.
pub fn oscillator_envelope(k: usize) -> f64 {
    let k = k.max(1) as f64;
    0.5 / (k * k)
}

#[derive(Debug, Clone)]
pub struct PlantTrace {
    pub xs: Vec<Vector>,
    pub ys: Vec<Vector>,
    pub ws: Vec<Vector>,
    pub ds: Vec<Vector>,
    /// Steps whose state lies outside the enlarged box.
    pub escaped: Vec<usize>,
}

/// Runs `steps` transitions from `x0`; the trace holds `steps + 1` states
/// and outputs.
pub fn simulate_plant(
    model: &PlantModel,
    x0: &Vector,
    steps: usize,
    w: &dyn Fn(usize) -> Vector,
    d: &dyn Fn(usize) -> Vector,
) -> Result<PlantTrace> {
    if !model.box_x0.contains(x0) {
        return Err(Error::InvalidArgument(
            "x0 must lie in the initial box".into(),
        ));
    }
    let mut trace = PlantTrace {
        xs: Vec::with_capacity(steps + 1),
        ys: Vec::with_capacity(steps + 1),
        ws: Vec::with_capacity(steps + 1),
        ds: Vec::with_capacity(steps),
        escaped: Vec::new(),
    };
    let mut x = x0.clone();
    for k in 0..=steps {
        if !model.box_x_enlarged.contains(&x) {
            log::warn!("state left the enlarged box at step {k}");
            trace.escaped.push(k);
        }
        let wk = w(k);
        trace.ys.push(model.h(&x) + &wk);
        trace.ws.push(wk);
        trace.xs.push(x.clone());
        if k < steps {
            let dk = d(k);
            x = model.f(&x) + &dk;
            trace.ds.push(dk);
        }
    }
    Ok(trace)
}

/// Constants from the plant assumptions plus the target-design constant
/// `c_c`. `c_n` is the norm-equivalence constant, 1 for the ∞-norm.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConstants {
    pub c_f: f64,
    pub c_h: f64,
    pub c_o: f64,
    pub orders: Vec<usize>,
    pub c_c: f64,
    pub c_n: f64,
}

impl SystemConstants {
    pub fn new(c_f: f64, c_h: f64, c_o: f64, orders: Vec<usize>, c_c: f64) -> Result<Self> {
        for (name, v) in [("c_f", c_f), ("c_h", c_h), ("c_o", c_o), ("c_c", c_c)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if orders.is_empty() || orders.contains(&0) {
            return Err(Error::InvalidArgument("orders must be >= 1".into()));
        }
        Ok(Self {
            c_f,
            c_h,
            c_o,
            orders,
            c_c,
            c_n: 1.0,
        })
    }

    pub fn m_bar(&self) -> usize {
        self.orders.iter().copied().max().unwrap_or(1)
    }
}

/// Sampled `(c_f, c_h)` over the enlarged box, inflated by 1.1.
pub fn estimate_lipschitz(model: &PlantModel, samples: usize, seed: u64) -> Result<(f64, f64)> {
    let region = &model.box_x_enlarged;
    let c_f = sampled_sup(&|x: &Vector| model.f_inv(x), region, samples, seed)?;
    let c_h = sampled_sup(
        &|x: &Vector| model.h(x),
        region,
        samples,
        seed.wrapping_add(1),
    )?;
    Ok((UPPER_SAFETY * c_f, UPPER_SAFETY * c_h))
}

/// Sampled and collision-searched lower bound on the Lipschitz
/// injectivity of `𝒪` over `X`, deflated by 0.9.
pub fn estimate_c_o(
    model: &PlantModel,
    orders: &[usize],
    samples: usize,
    seed: u64,
) -> Result<f64> {
    if orders.len() != model.n_y || orders.contains(&0) {
        return Err(Error::InvalidArgument(format!(
            "need one order >= 1 per output ({} outputs)",
            model.n_y
        )));
    }
    let map = |x: &Vector| model.observability_map(x, orders);
    let sampled = refined_extremum(&map, &model.box_x, samples, seed, 4, false)?;
    let min = sampled.min(collision_infimum(&map, &model.box_x, 21, 3, 8)?);
    if !(min > 1e-12) {
        return Err(Error::NotDistinguishable(min));
    }
    Ok(LOWER_SAFETY * min)
}
