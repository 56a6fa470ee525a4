//! Solvers and diagnostics for the space-time nonlocal traffic model
//!
//! ```text
//! d_t rho + d_x (rho v(q)) = 0,
//! q(t, x) = int_0^inf rho(t - gamma s, x + s) w(s) ds,
//! ```
//!
//! posed as an initial-value problem by extending the initial density
//! vertically into the past. Three solvers are provided:
//!
//! - [`characteristics`]: Picard iteration of the transport of
//!   `z = rho (1 + gamma v(q))` along characteristics, for general kernels;
//! - [`relaxation`]: finite-volume solver for the equivalent 2x2 relaxation
//!   system when the kernel is exponential;
//! - [`lwr`]: Godunov scheme for the local LWR limit.
//!
//! [`diagnostics`] measures bounds, total variation, `q - rho`, entropy
//! production and L1 stability; [`experiment`] wires everything into
//! reproducible runs and sweeps.

pub mod characteristics;
pub mod diagnostics;
pub mod error;
pub mod experiment;
pub mod grid;
pub mod lwr;
pub mod model;
pub mod quadrature;
pub mod relaxation;
pub mod solution;

pub use error::{Error, Result};
pub use grid::{Grid1D, SamplePoint, SpaceTimeField};
pub use model::{InitialData, KernelSpec, ModelParams, VelocityModel};
pub use solution::{SolverKind, SpaceTimeSolution};
