//! Time-bin extraction and the entanglement / Bell-test quantities built on
//! it.

pub mod bell;
pub mod calibrate;
pub mod modes;
pub mod scan;

pub use bell::{bell_combination, bell_diagonal, bell_scan, entanglement_entropy, wigner, BellScanResult};
pub use calibrate::{calibrate_omega, Calibration, CalibrationOptions};
pub use modes::{check_orthogonality, split_modes, ModeSplit, Orthogonality, OrthogonalityOptions, SplitOptions};
pub use scan::{scan_z, ZScan};

use crate::kernel::{state_at, KernelQuadrature, TwoChannelState};
use crate::medium::{derive_params, DerivedParams, PhysicalConfig, SimFrame};
use crate::pulse::{gaussian_envelope, Envelope, TimeGrid};
use crate::Result;

/// How a Gaussian input is set up and propagated through the medium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationOptions {
    /// Time step of the grid (units of `T`).
    pub dt: f64,
    /// Padding before the input and after the slow-channel arrival.
    pub margin: f64,
    pub quad: KernelQuadrature,
    pub split: SplitOptions,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        PropagationOptions { dt: 0.01, margin: 6.0, quad: KernelQuadrature::default(), split: SplitOptions::default() }
    }
}

/// Everything produced by propagating the Gaussian input to `z = L` and
/// splitting the output.
#[derive(Debug, Clone)]
pub struct ModesRun {
    pub params: DerivedParams,
    pub frame: SimFrame,
    pub input: Envelope,
    pub state: TwoChannelState,
    pub split: ModeSplit,
}

/// Gaussian input on a window long enough for propagation to `z_max`.
pub fn gaussian_input(frame: &SimFrame, z_max: f64, opts: &PropagationOptions) -> Result<Envelope> {
    let grid = TimeGrid::for_propagation(frame, z_max, opts.dt, opts.margin)?;
    gaussian_envelope(grid, frame.measure)
}

pub fn run_modes(cfg: &PhysicalConfig, opts: &PropagationOptions) -> Result<ModesRun> {
    let params = derive_params(cfg)?;
    let frame = params.frame();
    let input = gaussian_input(&frame, 1.0, opts)?;
    let state = state_at(&input, 1.0, &frame, &opts.quad)?;
    let split = split_modes(&state, frame.measure, &opts.split)?;
    Ok(ModesRun { params, frame, input, state, split })
}
