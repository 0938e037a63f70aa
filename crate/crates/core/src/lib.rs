//! Third-order algebraic curves `h^3 - 3 (P2/Pi4) h + 2 (P1/Pi4) = 0` with
//! four given branch points: discriminant and genus, hyperelliptic
//! uniformization, the genus-one parametrization, the real period
//! condition, the set of equal potentials and Hermite–Padé denominators.

#![allow(clippy::excessive_precision, clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod curve;
pub mod error;
pub mod gamma;
pub mod genus1;
pub mod hppade;
pub mod periods;
pub mod poly;
pub mod quad;
pub mod uniform;

pub use curve::{build_config, build_curve, BranchConfig, CubicCurve, CurveParams};
pub use error::{Error, Result};
pub use gamma::{pair_potential, trace_gamma, GammaArc, GammaOptions, GammaSet};
pub use genus1::{params_from_r0, symmetric_params, Genus1Params};
pub use hppade::{solve_hp, HPSystem};
pub use num_complex::Complex64;
pub use periods::{re_i, solve_r0, PeriodResult};
pub use poly::{CPoly, Root, RootSet};
pub use uniform::{build_hyper, HyperCurve, SurfacePoint};
