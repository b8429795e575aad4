use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{dmatrix, dvector};
use proptest::prelude::*;

use kkl_core::coord_change::rotation;
use kkl_core::harness::{
    build_transform, resolve_constants, run_experiment, ConstantMode, RunConfig, ENCLOSURE_SLACK,
};
use kkl_core::interval::{inf_norm, split_neg, split_pos, BoxRegion, Vector};
use kkl_core::observer::{
    init_observer, propagate, recover_x_mixed_monotone, step, ObserverConfig, RecoveryVariant,
};
use kkl_core::plant::{simulate_plant, NoiseSpec, PlantModel};
use kkl_core::transform::{monomials_up_to, Channel, InverseConfig, KklTransform, TargetDesign};
use kkl_core::CanonicalBlock;

fn oscillator_cfg(gamma: f64) -> ObserverConfig {
    let t = Arc::new(
        build_transform(&RunConfig {
            gamma,
            ..RunConfig::default()
        })
        .unwrap(),
    );
    let consts = resolve_constants(&t, ConstantMode::Sampled, 20_000).unwrap();
    ObserverConfig::new(
        t.clone(),
        consts,
        InverseConfig::for_plant(t.plant()),
        RecoveryVariant::MinMax,
    )
    .unwrap()
}

#[test]
fn every_recovery_variant_encloses() {
    for variant in [
        RecoveryVariant::PlusOnly,
        RecoveryVariant::MinusOnly,
        RecoveryVariant::Swapped,
    ] {
        let out = run_experiment(&RunConfig {
            variant,
            ..RunConfig::default()
        })
        .unwrap();
        assert_eq!(out.summary.violations, 0, "{variant}");
    }
}

#[test]
fn width_bound_along_runs() {
    // ‖x⁺ − x⁻‖ ≤ 3M‖z⁺ − z⁻‖ + 4M·(worst inversion residual)
    for noise in [false, true] {
        let out = run_experiment(&RunConfig {
            noise,
            steps: 200,
            ..RunConfig::default()
        })
        .unwrap();
        let m = out.summary.margin;
        for row in &out.rows[1..] {
            let bound = 3.0 * m * row.width_z + 4.0 * m * row.resid_hi.max(row.resid_lo) + 1e-6;
            assert!(
                row.width_x <= bound,
                "k={} {} > {}",
                row.k,
                row.width_x,
                bound
            );
        }
    }
}

#[test]
fn noise_free_width_bound_is_three_margins() {
    let out = run_experiment(&RunConfig {
        noise: false,
        steps: 120,
        ..RunConfig::default()
    })
    .unwrap();
    let m = out.summary.margin;
    for row in out.rows.iter().skip(20) {
        assert!(row.width_x <= 3.0 * m * row.width_z + 1e-4, "k={}", row.k);
    }
}

#[test]
fn z_bounds_follow_true_transform() {
    let cfg = oscillator_cfg(1.0);
    let plant = cfg.transform.plant().clone();
    let noise = NoiseSpec::oscillator_measurement(2);
    let w = |k: usize| dvector![kkl_core::plant::oscillator_noise(k)];
    let trace =
        simulate_plant(&plant, &dvector![1.0, 0.0], 100, &w, &|_| Vector::zeros(2)).unwrap();
    let mut s = init_observer(&cfg, &plant.box_x0.lo, &plant.box_x0.hi).unwrap();
    for k in 0..100 {
        s = propagate(
            &s,
            &cfg,
            &trace.ys[k],
            &(noise.w_lo)(k),
            &(noise.w_hi)(k),
            &Vector::zeros(2),
            &Vector::zeros(2),
        )
        .unwrap();
        let z = cfg.transform.eval(&trace.xs[k + 1]);
        for i in 0..4 {
            assert!(s.z_lo[i] - ENCLOSURE_SLACK <= z[i] && z[i] <= s.z_hi[i] + ENCLOSURE_SLACK);
        }
        assert_eq!(s.zhat_hi, s.z_hi);
    }
}

/// `x⁺ = F x` with `F` a rotation, observed through `y = x1 + 0.5 x2`, with a
/// target whose frames are nontrivial (negative and rotation blocks).
fn rotating_linear_cfg(gamma: f64) -> ObserverConfig {
    let plant = Arc::new(
        PlantModel::linear(
            rotation(0.3),
            dmatrix![1.0, 0.5],
            BoxRegion::symmetric(2, 2.0),
            BoxRegion::around(&dvector![1.0, 0.0], 0.2),
            BoxRegion::symmetric(2, 3.0),
        )
        .unwrap(),
    );
    let design = TargetDesign::new(vec![Channel {
        blocks: vec![
            CanonicalBlock::real(-0.5),
            CanonicalBlock::Rotation {
                rho: 0.6,
                theta: PI / 3.0,
            },
        ],
        b_tilde: dvector![1.0, 1.0, 1.0],
    }])
    .unwrap();
    let t = Arc::new(
        KklTransform::polynomial(
            plant.clone(),
            design.with_gamma(gamma).unwrap(),
            &monomials_up_to(2, 1),
        )
        .unwrap(),
    );
    let consts = t.sampled_constants(20_000, 5).unwrap();
    ObserverConfig::new(
        t,
        consts,
        InverseConfig::for_plant(&plant),
        RecoveryVariant::MinMax,
    )
    .unwrap()
}

#[test]
fn nontrivial_frames_enclose_and_converge() {
    for gamma in [1.0, 0.7] {
        let cfg = rotating_linear_cfg(gamma);
        assert!(!cfg.coord.is_trivial());
        let plant = cfg.transform.plant().clone();
        let w = |k: usize| dvector![0.05 * (k as f64).sin()];
        let trace =
            simulate_plant(&plant, &dvector![1.1, -0.1], 150, &w, &|_| Vector::zeros(2)).unwrap();
        let mut s = init_observer(&cfg, &plant.box_x0.lo, &plant.box_x0.hi).unwrap();
        let (lo, hi) = (dvector![-0.05], dvector![0.05]);
        for k in 0..150 {
            s = step(
                &s,
                &cfg,
                &trace.ys[k],
                &lo,
                &hi,
                &Vector::zeros(2),
                &Vector::zeros(2),
            )
            .unwrap();
            let x = &trace.xs[k + 1];
            let z = cfg.transform.eval(x);
            for i in 0..3 {
                assert!(
                    s.z_lo[i] - ENCLOSURE_SLACK <= z[i] && z[i] <= s.z_hi[i] + ENCLOSURE_SLACK,
                    "z k={k}"
                );
                assert!(s.zhat_lo[i] <= s.zhat_hi[i]);
            }
            for i in 0..2 {
                assert!(
                    s.x_lo[i] - ENCLOSURE_SLACK <= x[i] && x[i] <= s.x_hi[i] + ENCLOSURE_SLACK,
                    "x k={k}"
                );
            }
        }
        // noise-free tail: framed widths contract by Λ exactly
        let zero = dvector![0.0];
        let before = &s.zhat_hi - &s.zhat_lo;
        let after = propagate(
            &s,
            &cfg,
            &trace.ys[150],
            &zero,
            &zero,
            &Vector::zeros(2),
            &Vector::zeros(2),
        )
        .unwrap();
        let expected = &cfg.coord.lambda * before;
        assert!(inf_norm(&((&after.zhat_hi - &after.zhat_lo) - expected)) < 1e-12);
    }
}

#[test]
fn frame_split_reconstructs_inverse() {
    let cfg = rotating_linear_cfg(1.0);
    for k in 0..20 {
        let s = cfg.coord.s(k);
        assert_eq!(split_pos(&s) - split_neg(&s), s);
    }
}

#[test]
fn monotone_in_decomposition_is_tighter() {
    // T*(z) = (z1 + z1³/3, atan z2) is increasing, so T_d(u, v) = T*(u)
    let t_star = |z: &Vector| dvector![z[0] + z[0].powi(3) / 3.0, z[1].atan()];
    let t_d = |u: &Vector, _v: &Vector| t_star(u);
    let lip = 1.0 + 1.0; // on [-1, 1]²
    let boxes = [
        (dvector![-1.0, -1.0], dvector![1.0, 1.0]),
        (dvector![0.2, -0.7], dvector![0.3, 0.9]),
        (dvector![0.5, 0.5], dvector![0.5, 0.5]),
    ];
    for (lo, hi) in boxes {
        let (m_lo, m_hi) = recover_x_mixed_monotone(&lo, &hi, t_d, t_star, 1e-14).unwrap();
        let w = (&hi - &lo).max();
        let (a, b) = (t_star(&hi), t_star(&lo));
        let x_hi = a.zip_map(&b, f64::min).add_scalar(lip * w);
        let x_lo = a.zip_map(&b, f64::max).add_scalar(-lip * w);
        for i in 0..2 {
            assert!(x_lo[i] <= m_lo[i] && m_hi[i] <= x_hi[i]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn wider_noise_never_shrinks_frames(extra_lo in prop::collection::vec(0.0f64..0.3, 30), extra_hi in prop::collection::vec(0.0f64..0.3, 30)) {
        let cfg = oscillator_cfg(1.0);
        let plant = cfg.transform.plant().clone();
        let noise = NoiseSpec::oscillator_measurement(2);
        let w = |k: usize| dvector![kkl_core::plant::oscillator_noise(k)];
        let trace = simulate_plant(&plant, &dvector![1.0, 0.0], 30, &w, &|_| Vector::zeros(2)).unwrap();
        let init = init_observer(&cfg, &plant.box_x0.lo, &plant.box_x0.hi).unwrap();
        let (mut a, mut b) = (init.clone(), init);
        let z2 = Vector::zeros(2);
        for k in 0..30 {
            let (lo, hi) = ((noise.w_lo)(k), (noise.w_hi)(k));
            a = propagate(&a, &cfg, &trace.ys[k], &lo, &hi, &z2, &z2).unwrap();
            let (lo2, hi2) = (lo.add_scalar(-extra_lo[k]), hi.add_scalar(extra_hi[k]));
            b = propagate(&b, &cfg, &trace.ys[k], &lo2, &hi2, &z2, &z2).unwrap();
            for i in 0..4 {
                prop_assert!(b.zhat_lo[i] <= a.zhat_lo[i] && a.zhat_hi[i] <= b.zhat_hi[i]);
            }
        }
    }
}
