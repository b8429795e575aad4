//! Interval observers built on KKL (Kazantzis–Kravaris/Luenberger)
//! transformations for discrete-time nonlinear systems.
//!
//! The plant `x⁺ = f(x)`, `y = h(x) + w` is mapped by `T` into stable linear
//! coordinates `z⁺ = A z + B y`. Guaranteed bounds on `z` are propagated with
//! a nonnegative system matrix after a time-varying change of frame, and
//! state bounds are recovered through a numerical left inverse of `T`.

// Negated comparisons are used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coord_change;
pub mod error;
pub mod harness;
pub mod interval;
pub mod observer;
pub mod optim;
pub mod plant;
pub mod poly;
pub mod sampling;
pub mod sylvester;
pub mod transform;

pub use coord_change::{CanonicalBlock, CoordChangeSeq};
pub use error::{Error, Result};
pub use interval::{interval_image, BoxRegion, Mat, Vector};
pub use observer::{init_observer, step, ObserverConfig, ObserverState, RecoveryVariant};
pub use plant::{NoiseSpec, PlantModel, SystemConstants};
pub use transform::{
    derived_constants, gamma_star, DerivedConstants, InverseConfig, KklTransform, TargetDesign,
    TargetSystem,
};
