//! Choosing the drive strength that produces a requested time-bin amplitude.

use crate::medium::PhysicalConfig;
use crate::{Error, Result};

use super::{run_modes, PropagationOptions};

/// Requested accuracy on `r1`.
pub const R1_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationOptions {
    /// Drive range `[Ω_lo, Ω_hi]` in units of `Γ`.
    pub bracket: (f64, f64),
    /// Number of equally spaced scan points across the bracket.
    pub scan_points: usize,
    pub max_bisections: usize,
    pub propagation: PropagationOptions,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        CalibrationOptions {
            bracket: (5.0, 20.0),
            scan_points: 16,
            max_bisections: 60,
            propagation: PropagationOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Crossing {
    /// Ω/Γ at which `r1` meets the target.
    pub omega_over_gamma: f64,
    pub r1: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub target_r1: f64,
    /// Lowest-drive crossing; the one used downstream.
    pub omega: f64,
    pub omega_over_gamma: f64,
    pub r1: f64,
    /// Every crossing found in the bracket, in ascending Ω.
    pub crossings: Vec<Crossing>,
    /// `(Ω/Γ, r1)` scan; `None` where the output did not split into two bins.
    pub scan: Vec<(f64, Option<f64>)>,
}

/// `r1` at drive `Ω = x Γ`, or `None` if the output has no two-bin structure.
fn r1_at(cfg: &PhysicalConfig, x: f64, opts: &PropagationOptions) -> Result<Option<f64>> {
    let c = cfg.with_rabi_drive(x * cfg.optical_decay);
    match run_modes(&c, opts) {
        Ok(run) => Ok(Some(run.split.r1)),
        Err(Error::Regime(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Finds `Ω` such that the fast-bin amplitude `r1` equals `target_r1`.
///
/// `r1(Ω)` is scanned over the bracket and every sign change of
/// `r1 - target` is refined by bisection. No monotonicity is assumed.
pub fn calibrate_omega(target_r1: f64, cfg: &PhysicalConfig, opts: &CalibrationOptions) -> Result<Calibration> {
    if !(target_r1 > 0.0 && target_r1 < 1.0) {
        return Err(Error::Domain(format!("target r1 must lie in (0, 1), got {target_r1}")));
    }
    let (lo, hi) = opts.bracket;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::Domain(format!("invalid drive bracket [{lo}, {hi}]·Γ")));
    }
    let n = opts.scan_points.max(2);
    let mut scan = Vec::with_capacity(n);
    for k in 0..n {
        let x = lo + (hi - lo) * k as f64 / (n - 1) as f64;
        scan.push((x, r1_at(cfg, x, &opts.propagation)?));
    }

    let mut crossings = Vec::new();
    for w in scan.windows(2) {
        let ((mut a, ra), (mut b, rb)) = match (w[0], w[1]) {
            ((a, Some(ra)), (b, Some(rb))) => ((a, ra), (b, rb)),
            _ => continue,
        };
        let (mut fa, fb) = (ra - target_r1, rb - target_r1);
        if fa == 0.0 {
            crossings.push(Crossing { omega_over_gamma: a, r1: ra, iterations: 0 });
            continue;
        }
        if fa * fb > 0.0 || fb == 0.0 {
            continue;
        }
        let mut best = if fa.abs() < fb.abs() { (a, ra) } else { (b, rb) };
        let mut iterations = 0;
        while (best.1 - target_r1).abs() >= R1_TOLERANCE && iterations < opts.max_bisections {
            iterations += 1;
            let mid = 0.5 * (a + b);
            let Some(rm) = r1_at(cfg, mid, &opts.propagation)? else {
                break;
            };
            let fm = rm - target_r1;
            if (fm).abs() < (best.1 - target_r1).abs() {
                best = (mid, rm);
            }
            if fa * fm <= 0.0 {
                b = mid;
            } else {
                a = mid;
                fa = fm;
            }
        }
        if (best.1 - target_r1).abs() < R1_TOLERANCE {
            crossings.push(Crossing { omega_over_gamma: best.0, r1: best.1, iterations });
        }
    }

    let Some(first) = crossings.first().cloned() else {
        let seen: Vec<f64> = scan.iter().filter_map(|s| s.1).collect();
        let range = if seen.is_empty() {
            "no two-bin output anywhere in the bracket".to_string()
        } else {
            let min = seen.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = seen.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            format!("scanned r1 range [{min:.4}, {max:.4}]")
        };
        return Err(Error::Calibration(format!("r1 = {target_r1} not reached for Ω in [{lo}, {hi}]·Γ: {range}")));
    };
    Ok(Calibration {
        target_r1,
        omega: first.omega_over_gamma * cfg.optical_decay,
        omega_over_gamma: first.omega_over_gamma,
        r1: first.r1,
        crossings,
        scan,
    })
}
