//! Solvers and diagnostics for `∂ₜu = (∫₀^∞ u dz)·∂ₓₓu` on the half-line with
//! `u(t, 0) = 0`, and for the same equation on `(0, π)` with Dirichlet ends.
//!
//! Three backends cross-check each other:
//!
//! * [`kernel`] evaluates the exact image-Gaussian representation with the
//!   rescaled time `a(t) = ∫₀ᵗ M` from [`mass_ode`];
//! * [`fd`] runs the explicit scheme with the lagged mass as diffusivity;
//! * [`spectral`] solves the bounded problem by sine series.
//!
//! [`profile`] holds the self-similar family and the attractor, and
//! [`diagnostics`] the decay fits and collapse measurements.

pub mod diagnostics;
pub mod error;
pub mod exec;
pub mod fd;
pub mod field;
pub mod grid;
pub mod ic;
pub mod interp;
pub mod kernel;
pub mod mass_ode;
pub mod ode;
pub mod profile;
pub mod quad;
pub mod special;
pub mod spectral;

pub use error::{Error, Result};
pub use exec::Execution;
pub use field::{moments, sample_ic, DensityField, MomentRecord};
pub use fd::{FdConfig, FdRecord, FdRun, FdState};
pub use grid::Grid1D;
pub use ic::{AnalyticMoments, InitialCondition, Moment};
pub use kernel::{KernelControls, KernelRun};
pub use mass_ode::{solve_a, AsymptoticConstants, RescalingDomain, TimeRescaling};
pub use ode::OdeControls;
pub use spectral::{evaluate_bounded, solve_bounded_a, ExplicitSolution, SineCoefficients, SpectralState};
pub use profile::{attractor, f_mu, kummer_1f1, AttractorParams, ProfileSpec};
