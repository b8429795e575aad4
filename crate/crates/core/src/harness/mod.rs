//! Experiment runner: builds the oscillator preset, simulates it, runs the
//! observer, and reports traces and summary statistics.

pub mod config;
pub mod csv;
pub mod svg;

use std::fs::File;
use std::io::BufWriter;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use config::{ConstantMode, RunConfig};

use crate::error::{Error, Result};
use crate::interval::Vector;
use crate::observer::{init_observer, step, ObserverConfig};
use crate::plant::{
    estimate_c_o, estimate_lipschitz, simulate_plant, NoiseSpec, PlantModel, SystemConstants,
};
use crate::transform::{
    derived_constants, gamma_star, monomials_up_to, DerivedConstants, InverseConfig, KklTransform,
    PolyCoefficients, TargetDesign,
};

pub const OSCILLATOR_PRESET: &str = "oscillator-siE";
/// Enclosure slack for floating-point comparisons.
pub const ENCLOSURE_SLACK: f64 = 1e-9;
/// Seed for constant estimation, independent of the run seed so that runs
/// differing only in noise share constants.
pub const CONSTANTS_SEED: u64 = 0x006b_6b6c;
/// Per-component bound on the injected disturbance.
pub const DISTURBANCE_AMPLITUDE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub k: u64,
    pub x: Vector,
    pub x_lo: Vector,
    pub x_hi: Vector,
    pub z: Vector,
    pub z_lo: Vector,
    pub z_hi: Vector,
    pub y: Vector,
    pub w: Vector,
    pub resid_hi: f64,
    pub resid_lo: f64,
    pub width_x: f64,
    pub width_z: f64,
    /// Componentwise framed widths `ẑ⁺ − ẑ⁻`; not part of the CSV schema.
    pub width_zhat: Vector,
}

impl TraceRow {
    /// Largest amount by which the true `x` or `T(x)` leaves its bounds.
    pub fn excess(&self) -> f64 {
        let out = |v: &Vector, lo: &Vector, hi: &Vector| {
            v.iter()
                .zip(lo.iter().zip(hi.iter()))
                .map(|(&c, (&l, &h))| (l - c).max(c - h))
                .fold(f64::NEG_INFINITY, f64::max)
        };
        out(&self.x, &self.x_lo, &self.x_hi).max(out(&self.z, &self.z_lo, &self.z_hi))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub gamma: f64,
    pub steps: usize,
    pub violations: usize,
    pub first_violation: Option<u64>,
    pub window: (usize, usize),
    pub mean_width_x: f64,
    /// Per-step factor of a log-linear fit to the z-width.
    pub decay_rate_z: Option<f64>,
    pub final_width_x: f64,
    pub max_residual: f64,
    pub constants: DerivedConstants,
    pub margin: f64,
    /// Steps at which the true state left the enlarged box.
    pub escaped: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub rows: Vec<TraceRow>,
    pub summary: RunSummary,
}

/// The preset plant and its KKL transform for `cfg`.
pub fn build_transform(cfg: &RunConfig) -> Result<KklTransform> {
    if cfg.preset != OSCILLATOR_PRESET {
        return Err(Error::Config(format!("unknown preset '{}'", cfg.preset)));
    }
    let plant = Arc::new(PlantModel::oscillator(cfg.tau)?);
    let target = TargetDesign::diagonal(&cfg.lambdas)?.with_gamma(cfg.gamma)?;
    match &cfg.load_coeffs {
        Some(path) => {
            let table = PolyCoefficients::from_table(&std::fs::read_to_string(path)?)?;
            KklTransform::from_coefficients(plant, target, table)
        }
        None => KklTransform::polynomial(plant, target, &monomials_up_to(2, 2)),
    }
}

/// Sampled plant constants plus the design's controllability constant.
pub fn estimate_system_constants(
    plant: &PlantModel,
    design: &TargetDesign,
    samples: usize,
    seed: u64,
) -> Result<SystemConstants> {
    let (c_f, c_h) = estimate_lipschitz(plant, samples, seed)?;
    let orders = design.orders();
    let c_o = estimate_c_o(plant, &orders, samples, seed.wrapping_add(2))?;
    SystemConstants::new(c_f, c_h, c_o, orders, design.c_c())
}

/// Constants used by the observer. `Auto` takes the closed form when `γ`
/// is below `γ*` and falls back to sampling `T` otherwise.
pub fn resolve_constants(
    t: &KklTransform,
    mode: ConstantMode,
    samples: usize,
) -> Result<DerivedConstants> {
    let analytic = || {
        let target = t.target();
        let sys = estimate_system_constants(t.plant(), &target.design, samples, CONSTANTS_SEED)?;
        derived_constants(&sys, &target.design, target.gamma).inspect_err(|_| {
            log::info!(
                "closed-form constants unavailable (gamma = {}, gamma* = {:e})",
                target.gamma,
                gamma_star(&sys, &target.design)
            );
        })
    };
    match mode {
        ConstantMode::Analytic => analytic(),
        ConstantMode::Sampled => t.sampled_constants(samples, CONSTANTS_SEED),
        ConstantMode::Auto => match analytic() {
            Ok(c) => Ok(c),
            Err(Error::InjectivityNotGuaranteed { .. }) => {
                t.sampled_constants(samples, CONSTANTS_SEED)
            }
            Err(e) => Err(e),
        },
    }
}

pub fn run_experiment(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let t = Arc::new(build_transform(cfg)?);
    if let Some(path) = &cfg.save_coeffs {
        if let Some(c) = t.coefficients() {
            std::fs::write(path, c.to_table())?;
        }
    }
    let constants = resolve_constants(&t, cfg.constants, cfg.constant_samples)?;
    let plant = t.plant().clone();
    let obs_cfg = ObserverConfig::new(
        t.clone(),
        constants,
        InverseConfig::for_plant(&plant),
        cfg.variant,
    )?;

    let mut noise = if cfg.noise {
        NoiseSpec::oscillator_measurement(plant.n_x)
    } else {
        NoiseSpec::zero(plant.n_y, plant.n_x)
    };
    let disturbances: Vec<Vector> = if cfg.disturbance {
        noise = noise.with_disturbance(plant.n_x, DISTURBANCE_AMPLITUDE);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        (0..cfg.steps)
            .map(|_| {
                Vector::from_fn(plant.n_x, |_, _| {
                    rng.random_range(-DISTURBANCE_AMPLITUDE..=DISTURBANCE_AMPLITUDE)
                })
            })
            .collect()
    } else {
        vec![Vector::zeros(plant.n_x); cfg.steps]
    };
    let w_actual = |k: usize| {
        if cfg.noise {
            Vector::from_element(plant.n_y, crate::plant::oscillator_noise(k))
        } else {
            Vector::zeros(plant.n_y)
        }
    };
    let x0 = Vector::from_column_slice(&cfg.x0);
    let trace = simulate_plant(&plant, &x0, cfg.steps, &w_actual, &|k| {
        disturbances[k].clone()
    })?;

    let (x0_lo, x0_hi) = (plant.box_x0.lo.clone(), plant.box_x0.hi.clone());
    let mut state = init_observer(&obs_cfg, &x0_lo, &x0_hi)?;
    let mut rows = Vec::with_capacity(cfg.steps + 1);
    for k in 0..=cfg.steps {
        if k > 0 {
            let j = k - 1;
            noise.check(j)?;
            state = step(
                &state,
                &obs_cfg,
                &trace.ys[j],
                &(noise.w_lo)(j),
                &(noise.w_hi)(j),
                &(noise.d_lo)(j),
                &(noise.d_hi)(j),
            )?;
        }
        let x = &trace.xs[k];
        rows.push(TraceRow {
            k: k as u64,
            x: x.clone(),
            x_lo: state.x_lo.clone(),
            x_hi: state.x_hi.clone(),
            z: t.eval(x),
            z_lo: state.z_lo.clone(),
            z_hi: state.z_hi.clone(),
            y: trace.ys[k].clone(),
            w: trace.ws[k].clone(),
            resid_hi: state.resid_hi,
            resid_lo: state.resid_lo,
            width_x: state.width_x(),
            width_z: state.width_z(),
            width_zhat: &state.zhat_hi - &state.zhat_lo,
        });
    }

    let summary = summarize(
        cfg,
        &rows,
        constants,
        obs_cfg.margin_c_over_gamma,
        trace.escaped,
    );
    if let Some(path) = &cfg.out {
        csv::write_trace(BufWriter::new(File::create(path)?), &rows)?;
    }
    if let Some(path) = &cfg.svg {
        let title = format!("{} gamma={} steps={}", cfg.preset, cfg.gamma, cfg.steps);
        std::fs::write(path, svg::render(&rows, &plant.box_x_enlarged, &title))?;
    }
    Ok(RunOutput { rows, summary })
}

fn summarize(
    cfg: &RunConfig,
    rows: &[TraceRow],
    constants: DerivedConstants,
    margin: f64,
    escaped: Vec<usize>,
) -> RunSummary {
    let bad: Vec<u64> = rows
        .iter()
        .filter(|r| r.excess() > ENCLOSURE_SLACK)
        .map(|r| r.k)
        .collect();
    let (a, b) = (cfg.window.0.min(cfg.steps), cfg.window.1.min(cfg.steps));
    let in_window = &rows[a..=b];
    let mean_width_x = in_window.iter().map(|r| r.width_x).sum::<f64>() / in_window.len() as f64;
    RunSummary {
        gamma: cfg.gamma,
        steps: cfg.steps,
        violations: bad.len(),
        first_violation: bad.first().copied(),
        window: (a, b),
        mean_width_x,
        decay_rate_z: decay_fit(rows.iter().skip(1).map(|r| (r.k as f64, r.width_z))),
        final_width_x: rows.last().map_or(f64::NAN, |r| r.width_x),
        max_residual: rows
            .iter()
            .map(|r| r.resid_hi.max(r.resid_lo))
            .fold(0.0, f64::max),
        constants,
        margin,
        escaped,
    }
}

/// `exp` of the least-squares slope of `ln width` against `k`, over
/// points with width above `1e-12`; `None` with fewer than two.
pub fn decay_fit(points: impl Iterator<Item = (f64, f64)>) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .filter(|p| p.1 > 1e-12 && p.1.is_finite())
        .map(|(k, w)| (k, w.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mk = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ml = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mk).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mk) * (p.1 - ml)).sum();
    Some((sxy / sxx).exp())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub gamma: f64,
    pub mean_width_x: f64,
    pub decay_rate_z: Option<f64>,
    pub margin: f64,
    pub violations: usize,
}

/// Runs `cfg` once per `γ` with everything else fixed; rows sorted by `γ`.
/// Any enclosure violation aborts the comparison.
pub fn compare_gammas(cfg: &RunConfig, gammas: &[f64]) -> Result<Vec<ComparisonRow>> {
    if gammas.is_empty() {
        return Err(Error::Config("no gamma values given".into()));
    }
    let mut sorted = gammas.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let mut table = Vec::with_capacity(sorted.len());
    for gamma in sorted {
        let run_cfg = RunConfig {
            gamma,
            out: None,
            svg: None,
            save_coeffs: None,
            load_coeffs: None,
            ..cfg.clone()
        };
        let out = run_experiment(&run_cfg)?;
        if let Some(step) = out.summary.first_violation {
            return Err(Error::EnclosureViolation {
                step: step as usize,
            });
        }
        table.push(ComparisonRow {
            gamma,
            mean_width_x: out.summary.mean_width_x,
            decay_rate_z: out.summary.decay_rate_z,
            margin: out.summary.margin,
            violations: out.summary.violations,
        });
    }
    Ok(table)
}
