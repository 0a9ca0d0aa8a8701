//! Finite-difference simulation of the axisymmetric harmonic map flow and
//! its corotational scalar reductions, with blow-up diagnostics.

pub mod diag;
pub mod init;
pub mod map;
pub mod scalar;

pub use diag::{
    degree, detect_scale_map, detect_scale_scalar, energy_map, energy_scalar, fit_rate,
    max_grad_map, max_grad_scalar, DiagRow, EnergyPair, RateFit, Region, ScaleEstimate,
};
pub use init::{bubble_map_data, bubble_scalar_data, cutoff_eta, embed_corotational};
pub use map::{harmonic_residual, residual_s, run_map, step_map, MapRunConfig};
pub use scalar::{run_corotational, step_scalar, CorotationalMode, ScalarRunConfig};

use std::path::PathBuf;

/// Time integrator of the explicit step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TimeScheme {
    #[default]
    Euler,
    /// Heun's two-stage scheme with projection after each stage.
    Rk2,
}

/// Why a run stopped.
#[derive(Debug, Clone, PartialEq)]
pub enum StopReason {
    ReachedEndTime,
    /// λ_est fell under the configured number of grid cells.
    ResolutionLimit { lambda_est: f64, t: f64 },
    /// The state went non-finite; the returned field is the last valid one.
    NonFinite { last_valid_t: f64 },
    MaxSteps,
}

/// Shared run controls.
#[derive(Debug, Clone)]
pub struct RunControls {
    /// dt = dt_factor · min(dr, dz)².
    pub dt_factor: f64,
    pub t_end: f64,
    pub max_steps: usize,
    /// Emit a diagnostics row every `diag_every` steps.
    pub diag_every: usize,
    /// Stop when λ_est drops below `stop_cells` grid spacings (0 disables).
    pub stop_cells: f64,
    pub scheme: TimeScheme,
    /// Optional snapshot emission cadence (in diagnostic rows) and target.
    pub snapshot_every: Option<usize>,
    pub snapshot_dir: Option<PathBuf>,
}

impl Default for RunControls {
    fn default() -> Self {
        RunControls {
            dt_factor: 0.2,
            t_end: 0.05,
            max_steps: 50_000_000,
            diag_every: 50,
            stop_cells: 3.0,
            scheme: TimeScheme::Euler,
            snapshot_every: None,
            snapshot_dir: None,
        }
    }
}
