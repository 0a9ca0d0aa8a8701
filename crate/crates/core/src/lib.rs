//! Numerical laboratory for bubble dynamics in the axisymmetric harmonic map
//! flow into S²: closed-form profiles and kernels, the linearized operator
//! and its mode algebra, the nonlocal modulation operator with its Γ kernels,
//! the reduced dynamics for scale/rotation/center, and a finite-difference
//! simulator of the flow with blow-up diagnostics.

pub mod error;
pub mod geom;
pub mod grid;
pub mod interp;
pub mod linearized;
pub mod modulation;
pub mod nonlocal;
pub mod norms;
pub mod profiles;
pub mod quad;
pub mod sim;

pub use error::{Error, Result};
