//! Simulation toolkit for a 2D drift-diffusion model of a self-attracting
//! cloud whose force is a direction-wise sign-kernel convolution.
//!
//! - [`fv`]: finite-volume solver for the singular or mollified PDE.
//! - [`particles`]: mean-field interacting particle system and its coupled
//!   nonlinear (McKean-Vlasov) reference process.
//! - [`diagnostics`]: mass, norms, moments, entropy and related observables.
//! - [`transport`]: Wasserstein-1 distances (exact LP, 1D, sliced).
//! - [`experiments`]: ready-made studies used by the `mot` binary.

pub mod config;
pub mod diagnostics;
pub mod ensemble;
pub mod error;
pub mod experiments;
pub mod forces;
pub mod fv;
pub mod grid;
pub mod ic;
pub mod io;
pub mod particles;
pub mod transport;

pub use config::{DriftMode, ForceMode, InitialCondition, Limiter, SimConfig};
pub use ensemble::{sample_particles_from_density, ParticleEnsemble};
pub use error::{MotError, Result};
pub use grid::{DensityField, ForceField, Grid2D};
