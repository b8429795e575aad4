//! The KKL transformation `T` solving `T(f(x)) = A T(x) + B h(x)`, its
//! design constants, and a numerical left inverse `T*`.
//!
//! `T` is evaluated either as the truncated backward series
//! `Σ Aⁱ B h(f^{-(i+1)}(x))` (any plant with an inverse) or as an exact
//! polynomial obtained by coefficient matching when `f` is affine and `h`
//! polynomial. `T*` is a box-constrained least-squares minimizer of
//! `‖T(x) − z‖`, multi-started from a fixed lattice plus an optional warm
//! start.

use std::fmt::Write as _;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::coord_change::CanonicalBlock;
use crate::error::{Error, Result};
use crate::interval::{block_diag, inf_norm, op_inf_norm, BoxRegion, Mat, Vector};
use crate::optim::{levenberg_marquardt_box, LmOptions};
use crate::plant::{PlantModel, SystemConstants, LOWER_SAFETY, UPPER_SAFETY};
use crate::poly::{eval_monomial, format_exponents, Exponents, Polynomial};
use crate::sampling::{collision_infimum, refined_extremum};
use crate::sylvester::solve_sylvester;

pub const DEFAULT_SERIES_TOL: f64 = 1e-9;
/// Sylvester residual accepted for polynomial-mode transforms.
pub const POLY_RESIDUAL_TOL: f64 = 1e-8;

/// One output channel of the target system: `Ã_i` as a list of canonical
/// blocks and its input vector `B̃_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    pub blocks: Vec<CanonicalBlock>,
    pub b_tilde: Vector,
}

impl Channel {
    pub fn order(&self) -> usize {
        self.blocks.iter().map(|b| b.size()).sum()
    }

    pub fn a_tilde(&self) -> Mat {
        block_diag(&self.blocks.iter().map(|b| b.matrix()).collect::<Vec<_>>())
    }

    /// `[B̃, ÃB̃, …, Ã^{m−1}B̃]`.
    pub fn controllability_matrix(&self) -> Mat {
        let a = self.a_tilde();
        let m = self.order();
        let mut cols = Vec::with_capacity(m);
        let mut v = self.b_tilde.clone();
        for _ in 0..m {
            cols.push(v.clone());
            v = &a * v;
        }
        Mat::from_columns(&cols)
    }
}

/// Unscaled target design `(Ã_i, B̃_i)`, one channel per output.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetDesign {
    pub channels: Vec<Channel>,
}

impl TargetDesign {
    pub fn new(channels: Vec<Channel>) -> Result<Self> {
        if channels.is_empty() {
            return Err(Error::InvalidArgument(
                "target design needs at least one channel".into(),
            ));
        }
        for ch in &channels {
            if ch.blocks.is_empty() || ch.b_tilde.len() != ch.order() {
                return Err(Error::Dimension(format!(
                    "channel of order {} has B̃ of length {}",
                    ch.order(),
                    ch.b_tilde.len()
                )));
            }
            for b in &ch.blocks {
                b.validate()?;
                if b.modulus() >= 1.0 {
                    return Err(Error::NotSchur(b.modulus()));
                }
            }
            if ch.controllability_matrix().try_inverse().is_none() {
                return Err(Error::NotControllable);
            }
        }
        Ok(Self { channels })
    }

    /// Single channel `Ã = diag(λ)`, `B̃ = (1, …, 1)`.
    pub fn diagonal(lambdas: &[f64]) -> Result<Self> {
        Self::new(vec![Channel {
            blocks: lambdas.iter().map(|&l| CanonicalBlock::real(l)).collect(),
            b_tilde: Vector::from_element(lambdas.len(), 1.0),
        }])
    }

    pub fn orders(&self) -> Vec<usize> {
        self.channels.iter().map(Channel::order).collect()
    }

    pub fn n_z(&self) -> usize {
        self.orders().iter().sum()
    }

    pub fn n_y(&self) -> usize {
        self.channels.len()
    }

    pub fn a_tilde(&self) -> Mat {
        block_diag(
            &self
                .channels
                .iter()
                .map(Channel::a_tilde)
                .collect::<Vec<_>>(),
        )
    }

    pub fn b(&self) -> Mat {
        let cols: Vec<Mat> = self
            .channels
            .iter()
            .map(|c| Mat::from_column_slice(c.order(), 1, c.b_tilde.as_slice()))
            .collect();
        block_diag(&cols)
    }

    pub fn blocks(&self) -> Vec<CanonicalBlock> {
        self.channels
            .iter()
            .flat_map(|c| c.blocks.iter().copied())
            .collect()
    }

    /// `min_i 1/‖C_i⁻¹‖∞` over the channel controllability matrices.
    pub fn c_c(&self) -> f64 {
        self.channels
            .iter()
            .map(|c| {
                let inv = c
                    .controllability_matrix()
                    .try_inverse()
                    .expect("checked at construction");
                1.0 / op_inf_norm(&inv)
            })
            .fold(f64::INFINITY, f64::min)
    }

    fn max_block_norm(&self) -> f64 {
        self.channels
            .iter()
            .map(|c| op_inf_norm(&c.a_tilde()))
            .fold(0.0, f64::max)
    }

    fn max_b_norm(&self) -> f64 {
        self.channels
            .iter()
            .map(|c| inf_norm(&c.b_tilde))
            .fold(0.0, f64::max)
    }

    pub fn with_gamma(&self, gamma: f64) -> Result<TargetSystem> {
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "gamma must lie in (0, 1], got {gamma}"
            )));
        }
        Ok(TargetSystem {
            design: self.clone(),
            gamma,
            a: self.a_tilde() * gamma,
            b: self.b(),
        })
    }
}

/// `A = γ·blockdiag(Ã_i)`, `B = blockdiag(B̃_i)`.
#[derive(Debug, Clone)]
pub struct TargetSystem {
    pub design: TargetDesign,
    pub gamma: f64,
    pub a: Mat,
    pub b: Mat,
}

impl TargetSystem {
    pub fn n_z(&self) -> usize {
        self.a.nrows()
    }

    pub fn m_bar(&self) -> usize {
        self.design.orders().into_iter().max().unwrap_or(1)
    }
}

/// Upper limit on `γ` below which the injectivity bound is positive,
/// capped at 1.
pub fn gamma_star(consts: &SystemConstants, design: &TargetDesign) -> f64 {
    let a_full = op_inf_norm(&design.a_tilde());
    let a_max = design.max_block_norm();
    let b_max = design.max_b_norm();
    let pow_max = design
        .channels
        .iter()
        .map(|c| (op_inf_norm(&c.a_tilde()) * consts.c_f).powi(c.order() as i32))
        .fold(0.0, f64::max);
    let cc_co = consts.c_c * consts.c_o;
    let t1 = 1.0 / a_full;
    let t2 = 1.0 / (a_max * consts.c_f);
    let t3 = cc_co / (a_max * consts.c_f * cc_co + b_max * consts.c_h * consts.c_f * pow_max);
    t1.min(t2).min(t3).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstantSource {
    /// Closed-form bounds from the plant constants; require `γ < γ*`.
    Analytic,
    /// Sampled directly on `T` over the enlarged box.
    Sampled,
}

/// `c_L` (Lipschitz bound of `T`), `c_I` (injectivity: `‖ΔT‖ ≥ c_I γ^{m̄−1}‖Δx‖`)
/// and `c = 1/c_I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants {
    pub c_l: f64,
    pub c_i: f64,
    pub c: f64,
    pub source: ConstantSource,
}

impl DerivedConstants {
    /// Recovery gain `c / γ^{m̄−1}`.
    pub fn margin(&self, gamma: f64, m_bar: usize) -> f64 {
        self.c / gamma.powi(m_bar as i32 - 1)
    }
}

pub fn derived_constants(
    consts: &SystemConstants,
    design: &TargetDesign,
    gamma: f64,
) -> Result<DerivedConstants> {
    let gs = gamma_star(consts, design);
    if !(gamma > 0.0) || gamma >= gs {
        return Err(Error::InjectivityNotGuaranteed {
            gamma,
            gamma_star: gs,
        });
    }
    let a_max = design.max_block_norm();
    let b_max = design.max_b_norm();
    let pow_max = design
        .channels
        .iter()
        .map(|c| (op_inf_norm(&c.a_tilde()) * consts.c_f).powi(c.order() as i32))
        .fold(0.0, f64::max);
    let contraction = 1.0 - gamma * a_max * consts.c_f;
    let lead = b_max * consts.c_h * consts.c_f;
    let c_l = lead / contraction;
    let c_i = consts.c_n * (consts.c_c * consts.c_o - lead * gamma * pow_max / contraction);
    if !(c_i > 0.0) {
        return Err(Error::InjectivityNotGuaranteed {
            gamma,
            gamma_star: gs,
        });
    }
    Ok(DerivedConstants {
        c_l,
        c_i,
        c: 1.0 / c_i,
        source: ConstantSource::Analytic,
    })
}

/// Polynomial-mode coefficients: row `i` of `coeffs` holds `T_i` over `basis`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyCoefficients {
    pub basis: Vec<Exponents>,
    pub coeffs: Mat,
}

impl PolyCoefficients {
    pub fn eval(&self, x: &Vector) -> Vector {
        let phi = Vector::from_iterator(
            self.basis.len(),
            self.basis.iter().map(|e| eval_monomial(e, x)),
        );
        &self.coeffs * phi
    }

    /// Plain-text table, one `row exponents coefficient` line per entry.
    pub fn to_table(&self) -> String {
        let mut s = String::from("# row exponents coefficient\n");
        for i in 0..self.coeffs.nrows() {
            for (j, e) in self.basis.iter().enumerate() {
                let _ = writeln!(
                    s,
                    "{} {} {:.16e}",
                    i,
                    format_exponents(e),
                    self.coeffs[(i, j)]
                );
            }
        }
        s
    }

    pub fn from_table(text: &str) -> Result<Self> {
        let mut basis: Vec<Exponents> = Vec::new();
        let mut entries: Vec<(usize, usize, f64)> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: &str| Error::Parse {
                line: lineno + 1,
                msg: msg.to_string(),
            };
            let mut parts = line.split_whitespace();
            let (Some(row), Some(exps), Some(coeff), None) =
                (parts.next(), parts.next(), parts.next(), parts.next())
            else {
                return Err(err("expected three fields"));
            };
            let row: usize = row.parse().map_err(|_| err("bad row index"))?;
            let exps: Exponents = exps
                .split(',')
                .map(|t| t.parse::<u32>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| err("bad exponent tuple"))?;
            let coeff: f64 = coeff.parse().map_err(|_| err("bad coefficient"))?;
            if basis.first().is_some_and(|b| b.len() != exps.len()) {
                return Err(err("exponent tuples differ in length"));
            }
            let col = match basis.iter().position(|b| *b == exps) {
                Some(c) => c,
                None => {
                    basis.push(exps);
                    basis.len() - 1
                }
            };
            entries.push((row, col, coeff));
        }
        if entries.is_empty() {
            return Err(Error::Parse {
                line: 0,
                msg: "empty table".into(),
            });
        }
        let rows = entries.iter().map(|e| e.0).max().unwrap_or(0) + 1;
        let mut coeffs = Mat::zeros(rows, basis.len());
        for (r, c, v) in entries {
            coeffs[(r, c)] = v;
        }
        Ok(Self { basis, coeffs })
    }
}

/// Solves for polynomial `T = C φ(x)` over `basis` by matching
/// coefficients of `T(f(x)) = A T(x) + B h(x)`.
pub fn solve_poly_t(
    plant: &PlantModel,
    target: &TargetSystem,
    basis: &[Exponents],
) -> Result<PolyCoefficients> {
    let structure = plant.structure.as_ref().ok_or(Error::NotPolynomial)?;
    if basis.is_empty() || basis.iter().any(|e| e.len() != plant.n_x) {
        return Err(Error::InvalidArgument(
            "basis exponents must match the state dimension".into(),
        ));
    }
    let k = basis.len();
    let index = |e: &Exponents| basis.iter().position(|b| b == e);

    // φ(f(x)) = P φ(x)
    let mut p = Mat::zeros(k, k);
    for (row, e) in basis.iter().enumerate() {
        let composed = Polynomial::monomial(e.clone(), 1.0)
            .compose_affine(&structure.f_matrix, &structure.f_offset);
        for (term, c) in composed.terms() {
            let col = index(term).ok_or_else(|| {
                Error::BasisNotClosed(format!(
                    "x^({}) ∘ f produces x^({})",
                    format_exponents(e),
                    format_exponents(term)
                ))
            })?;
            p[(row, col)] = c;
        }
    }
    let mut h = Mat::zeros(plant.n_y, k);
    for (i, out) in structure.outputs.iter().enumerate() {
        for (term, c) in out.terms() {
            let col = index(term).ok_or_else(|| {
                Error::BasisNotClosed(format!(
                    "output {i} has term x^({})",
                    format_exponents(term)
                ))
            })?;
            h[(i, col)] = c;
        }
    }
    if target.b.ncols() != plant.n_y {
        return Err(Error::Dimension(
            "target B must have one column per output".into(),
        ));
    }
    let rhs = &target.b * h;
    let coeffs = solve_sylvester(&target.a, &p, &rhs)?;
    Ok(PolyCoefficients {
        basis: basis.to_vec(),
        coeffs,
    })
}

/// All monomials of total degree `1..=degree` in `n` variables, graded
/// then reverse-lexicographic.
pub fn monomials_up_to(n: usize, degree: u32) -> Vec<Exponents> {
    fn rec(n: usize, left: u32, prefix: &mut Exponents, out: &mut Vec<Exponents>) {
        if prefix.len() == n - 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in (0..=left).rev() {
            prefix.push(k);
            rec(n, left - k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    for d in (1..=degree).rev() {
        rec(n, d, &mut Vec::new(), &mut out);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformMode {
    Series,
    Polynomial,
}

#[derive(Debug, Clone)]
pub struct InverseConfig {
    /// Lattice points per axis of the multi-start grid (`starts^{n_x}` starts).
    pub starts: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub region: BoxRegion,
    pub warm_start: Option<Vector>,
}

impl InverseConfig {
    pub fn for_plant(plant: &PlantModel) -> Self {
        Self {
            starts: 3,
            max_iters: 100,
            tol: 1e-13,
            region: plant.box_x_enlarged.clone(),
            warm_start: None,
        }
    }

    pub fn with_warm_start(mut self, x: Option<Vector>) -> Self {
        self.warm_start = x;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.starts == 0 || !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(
                "inverse config needs starts >= 1 and tol > 0".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InverseResult {
    pub x: Vector,
    /// `‖T(x) − z‖∞`.
    pub residual: f64,
}

#[derive(Debug, Clone)]
enum Evaluator {
    Series { terms: usize },
    Polynomial(PolyCoefficients),
}

#[derive(Debug, Clone)]
pub struct KklTransform {
    plant: Arc<PlantModel>,
    target: TargetSystem,
    series_tol: f64,
    series_terms: usize,
    eval: Evaluator,
}

impl KklTransform {
    /// Truncated-series transform with tail bound `series_tol`.
    pub fn series(plant: Arc<PlantModel>, target: TargetSystem, series_tol: f64) -> Result<Self> {
        let terms = series_terms(&plant, &target, series_tol)?;
        Ok(Self {
            plant,
            target,
            series_tol,
            series_terms: terms,
            eval: Evaluator::Series { terms },
        })
    }

    /// Exact polynomial transform over `basis`.
    pub fn polynomial(
        plant: Arc<PlantModel>,
        target: TargetSystem,
        basis: &[Exponents],
    ) -> Result<Self> {
        let coeffs = solve_poly_t(&plant, &target, basis)?;
        Self::from_coefficients(plant, target, coeffs)
    }

    /// Polynomial transform from previously solved coefficients; rejects
    /// tables whose Sylvester residual exceeds the polynomial tolerance.
    pub fn from_coefficients(
        plant: Arc<PlantModel>,
        target: TargetSystem,
        coeffs: PolyCoefficients,
    ) -> Result<Self> {
        if coeffs.coeffs.nrows() != target.n_z()
            || coeffs.basis.iter().any(|e| e.len() != plant.n_x)
        {
            return Err(Error::Dimension(
                "coefficient table does not match plant/target".into(),
            ));
        }
        // The series path is kept available for cross-checks; an invalid
        // gamma only disables it.
        let terms = series_terms(&plant, &target, DEFAULT_SERIES_TOL).unwrap_or(0);
        let t = Self {
            plant,
            target,
            series_tol: DEFAULT_SERIES_TOL,
            series_terms: terms,
            eval: Evaluator::Polynomial(coeffs),
        };
        let worst = t.max_sylvester_residual(1000, 0x5eed);
        if !(worst <= POLY_RESIDUAL_TOL) {
            return Err(Error::InvalidArgument(format!(
                "polynomial transform violates the Sylvester identity (residual {worst:e})"
            )));
        }
        Ok(t)
    }

    pub fn mode(&self) -> TransformMode {
        match self.eval {
            Evaluator::Series { .. } => TransformMode::Series,
            Evaluator::Polynomial(_) => TransformMode::Polynomial,
        }
    }

    pub fn plant(&self) -> &Arc<PlantModel> {
        &self.plant
    }

    pub fn target(&self) -> &TargetSystem {
        &self.target
    }

    pub fn series_tol(&self) -> f64 {
        self.series_tol
    }

    pub fn series_terms(&self) -> usize {
        self.series_terms
    }

    pub fn coefficients(&self) -> Option<&PolyCoefficients> {
        match &self.eval {
            Evaluator::Polynomial(c) => Some(c),
            Evaluator::Series { .. } => None,
        }
    }

    pub fn eval(&self, x: &Vector) -> Vector {
        match &self.eval {
            Evaluator::Series { terms } => self.series_sum(x, *terms),
            Evaluator::Polynomial(c) => c.eval(x),
        }
    }

    /// Series evaluation regardless of mode.
    pub fn eval_series(&self, x: &Vector) -> Result<Vector> {
        let q = self.target.gamma * op_inf_norm(&self.target.design.a_tilde());
        if q >= 1.0 {
            return Err(Error::SeriesDivergent(q));
        }
        Ok(self.series_sum(x, self.series_terms))
    }

    fn series_sum(&self, x: &Vector, terms: usize) -> Vector {
        let chain = self.plant.backward_chain(x, terms);
        let mut acc = Vector::zeros(self.target.n_z());
        for p in chain.iter().rev() {
            acc = &self.target.a * acc + &self.target.b * self.plant.h(p);
        }
        acc
    }

    /// `‖T(f(x)) − A T(x) − B h(x)‖∞`.
    pub fn sylvester_residual(&self, x: &Vector) -> f64 {
        let lhs = self.eval(&self.plant.f(x));
        let rhs = &self.target.a * self.eval(x) + &self.target.b * self.plant.h(x);
        inf_norm(&(lhs - rhs))
    }

    fn max_sylvester_residual(&self, samples: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..samples)
            .map(|_| self.sylvester_residual(&self.plant.box_x.sample(&mut rng)))
            .fold(0.0, f64::max)
    }

    /// Sampled `c_L`, `c_I` over the enlarged box; the lower ratio also
    /// includes a near-collision search.
    pub fn sampled_constants(&self, samples: usize, seed: u64) -> Result<DerivedConstants> {
        let region = &self.plant.box_x_enlarged;
        let t = |x: &Vector| self.eval(x);
        let sup = refined_extremum(&t, region, samples, seed, 4, true)?;
        let sampled_inf = refined_extremum(&t, region, samples, seed.wrapping_add(1), 8, false)?;
        let inf = sampled_inf.min(collision_infimum(&t, region, 21, 3, 8)?);
        if !(inf > 1e-14) {
            return Err(Error::NotDistinguishable(inf));
        }
        let c_l = UPPER_SAFETY * sup;
        let c_i = LOWER_SAFETY * inf / self.target.gamma.powi(self.target.m_bar() as i32 - 1);
        Ok(DerivedConstants {
            c_l,
            c_i,
            c: 1.0 / c_i,
            source: ConstantSource::Sampled,
        })
    }

    /// Box-constrained least-squares preimage of `z`.
    pub fn invert(&self, z: &Vector, cfg: &InverseConfig) -> Result<InverseResult> {
        cfg.validate()?;
        if z.len() != self.target.n_z() {
            return Err(Error::Dimension(format!(
                "z has length {}, expected {}",
                z.len(),
                self.target.n_z()
            )));
        }
        let resid = |x: &Vector| self.eval(x) - z;
        let opts = LmOptions {
            max_iters: cfg.max_iters,
            tol: cfg.tol,
            fd_step: 1e-6,
        };
        let mut best: Option<InverseResult> = None;
        let consider = |cand: InverseResult, best: &mut Option<InverseResult>| {
            if best.as_ref().is_none_or(|b| better(&cand, b)) {
                *best = Some(cand);
            }
        };
        if let Some(w) = &cfg.warm_start {
            let out = levenberg_marquardt_box(&resid, w, &cfg.region, &opts);
            let cand = InverseResult {
                x: out.x,
                residual: out.residual,
            };
            if cand.residual <= cfg.tol {
                return Ok(cand);
            }
            consider(cand, &mut best);
        }
        for start in cfg.region.lattice(cfg.starts) {
            let out = levenberg_marquardt_box(&resid, &start, &cfg.region, &opts);
            consider(
                InverseResult {
                    x: out.x,
                    residual: out.residual,
                },
                &mut best,
            );
        }
        Ok(best.expect("lattice has at least one point"))
    }
}

/// Smaller residual, then smaller ∞-norm, then lexicographically smaller.
fn better(a: &InverseResult, b: &InverseResult) -> bool {
    use std::cmp::Ordering;
    match a.residual.total_cmp(&b.residual) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => match inf_norm(&a.x).total_cmp(&inf_norm(&b.x)) {
            Ordering::Less => true,
            Ordering::Greater => false,
            Ordering::Equal => {
                a.x.iter()
                    .zip(b.x.iter())
                    .map(|(p, q)| p.total_cmp(q))
                    .find(|o| *o != Ordering::Equal)
                    == Some(Ordering::Less)
            }
        },
    }
}

/// Sup of `‖h‖∞` on the enlarged box from a lattice, inflated by 1.1.
fn output_bound(plant: &PlantModel) -> f64 {
    let n = plant.n_x as f64;
    let per_axis = (1e5f64.powf(1.0 / n).floor() as usize).clamp(2, 51);
    UPPER_SAFETY
        * plant
            .box_x_enlarged
            .lattice(per_axis)
            .iter()
            .map(|x| inf_norm(&plant.h(x)))
            .fold(0.0, f64::max)
}

fn series_terms(plant: &PlantModel, target: &TargetSystem, tol: f64) -> Result<usize> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(
            "series tolerance must be positive".into(),
        ));
    }
    let q = target.gamma * op_inf_norm(&target.design.a_tilde());
    if q >= 1.0 {
        return Err(Error::SeriesDivergent(q));
    }
    let scale = op_inf_norm(&target.b) * output_bound(plant) / (1.0 - q);
    if scale == 0.0 {
        return Ok(1);
    }
    if q == 0.0 {
        return Ok(1);
    }
    // smallest N with q^N * scale <= tol
    let n = ((tol / scale).ln() / q.ln()).ceil().max(1.0);
    Ok(n as usize)
}
