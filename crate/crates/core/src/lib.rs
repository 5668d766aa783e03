//! Heights, volumes and integer-point counts for decomposable forms:
//! forms that factor into linear terms over ℂ. The library makes the
//! associated quantities executable — H(F), the geometric height 𝔪(F) and
//! its certificates, the arithmetic reduction bound, V(F), N_F(m), the
//! exceptional exponent a′(F), Q(F) and NS(F) — together with a check
//! suite that exercises the inequalities tying them together.
//!
//! Everything is pure and deterministic given the configured seeds; values
//! are immutable after construction and safe to share across threads.

pub mod count;
pub mod error;
pub mod exceptional;
pub mod families;
pub mod form;
pub mod geom;
pub mod height;
pub mod intlin;
pub mod linalg;
pub mod report;
pub mod roots;
pub mod verify;
pub mod volume;

pub use count::{count_exact, restrict, union_count_check, CountResult, RationalBound, Strategy, Subspace};
pub use error::{Error, Result};
pub use exceptional::{a_prime, s_j_compute, ExceptionalReport};
pub use form::{parse_form, to_document, DecomposableForm, FormDoc, LinearFactor, PolyCoeffs, Transform};
pub use geom::{constants, select_factors, wedge_norm, ConstantTable, FactorSelection};
pub use height::{
    height, lemma3_bound, minimize_height_real, q_invariant, reduce_integral, successive_minima,
    MinimizationResult, OptimizerCfg,
};
pub use report::ReportEnvelope;
pub use verify::CheckReport;
pub use volume::{sphere_min, volume_monte_carlo, volume_radial, VolumeEstimate};
