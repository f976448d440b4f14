//! Fourier-Galerkin solver for the Functionalized Cahn-Hilliard gradient flow
//! `u_t = ∇·(M(u)∇μ)`, `μ = -Δω + W″(u)ω - ηω`, `ω = -Δu + W′(u)` on the
//! periodic cube `(0, 2π)^d`, with a cutoff mobility `M(u) = max(u, 0)`
//! regularized from below at `θ`.

// `!(x > 0.0)` style guards reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod galerkin;
pub mod mobility;
pub mod output;
pub mod potential;
pub mod spectral;
pub mod sweep;
pub mod timestepper;

pub use config::{InitialData, OutputConfig, SimConfig};
pub use diagnostics::{DiagnosticsRecord, DiagnosticsSeries, StepStats};
pub use dynamics::{Evaluation, FchParams};
pub use error::{FchError, Result};
pub use galerkin::{galerkin_rhs_dense, DenseGalerkin, RealBasis};
pub use mobility::MobilitySpec;
pub use potential::{GrowthConstants, PotentialSpec, Wells};
pub use spectral::{Basis, BasisRef, Direction, Field, VectorField};
pub use sweep::{run_sweep, SweepPlan, SweepReport};
pub use timestepper::{integrate, step, Observer, Schedule, StepControl, TrajectoryState};
