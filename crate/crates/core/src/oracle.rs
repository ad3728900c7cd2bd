//! Direct integration of the lossless transport equations by a
//! semi-Lagrangian scheme.
//!
//! Each channel is carried exactly along its own characteristic
//! `dt/dz = 1/ṽi`; the coupling `-iβ̃ E_other` is integrated along that
//! characteristic with the trapezoid rule, which is implicit in the new values
//! and solved in closed form. For a step `h` and `b = β̃h/2`:
//!
//! ```text
//! E1' (1 + b²) = E1(t - h/ṽ1) - i b (E2(t - h/ṽ1) + E2(t - h/ṽ2)) - b² E1(t - h/ṽ2)
//! E2' (1 + b²) = E2(t - h/ṽ2) - i b (E1(t - h/ṽ2) + E1(t - h/ṽ1)) - b² E2(t - h/ṽ1)
//! ```
//!
//! The local update is a Cayley transform of the coupling and therefore
//! norm-preserving; the only other error source is cubic-spline resampling.
//! This module exists to cross-check [`crate::kernel`], not as a production
//! solver.

use num_complex::Complex64;

use crate::kernel::TwoChannelState;
use crate::medium::SimFrame;
use crate::pulse::{Envelope, Spline, TimeGrid};
use crate::{Error, Result};

/// Largest accepted `β̃ Δz`.
pub const MAX_COUPLING_STEP: f64 = 0.05;

/// Smallest accepted number of steps per unit length.
pub const MIN_STEPS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    /// Steps per unit length `L`.
    pub n_z_steps: usize,
    /// Distances (units of `L`) at which the state is recorded, ascending.
    pub checkpoints: Vec<f64>,
    /// Allowed `|n1 + n2 - n_in|` at every checkpoint.
    pub conservation_tol: f64,
}

impl IntegratorConfig {
    pub fn new(n_z_steps: usize, checkpoints: Vec<f64>) -> Self {
        IntegratorConfig { n_z_steps, checkpoints, conservation_tol: 1e-3 }
    }

    fn validate(&self, frame: &SimFrame) -> Result<()> {
        if self.n_z_steps < MIN_STEPS {
            return Err(Error::Domain(format!(
                "oracle needs at least {MIN_STEPS} steps per length, got {}",
                self.n_z_steps
            )));
        }
        let coupling_step = frame.beta.abs() / self.n_z_steps as f64;
        if coupling_step > MAX_COUPLING_STEP {
            return Err(Error::Domain(format!(
                "β̃Δz = {coupling_step:.4} exceeds {MAX_COUPLING_STEP}; use at least {} steps",
                (frame.beta.abs() / MAX_COUPLING_STEP).ceil()
            )));
        }
        if self.checkpoints.is_empty() {
            return Err(Error::Domain("no oracle checkpoints requested".into()));
        }
        let mut last = 0.0;
        for &z in &self.checkpoints {
            if !(z.is_finite() && z >= last) {
                return Err(Error::Domain(format!(
                    "checkpoints must be finite, non-negative and ascending (got {z} after {last})"
                )));
            }
            last = z;
        }
        Ok(())
    }
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig::new(400, vec![1.0])
    }
}

/// One semi-Lagrangian step of length `h`.
fn step(
    grid: &TimeGrid,
    e1: &[Complex64],
    e2: &[Complex64],
    h: f64,
    frame: &SimFrame,
) -> (Vec<Complex64>, Vec<Complex64>) {
    let s1 = Spline::new(grid, e1);
    let s2 = Spline::new(grid, e2);
    let (d1, d2) = (h / frame.v1, h / frame.v2);
    let b = 0.5 * frame.beta * h;
    let ib = Complex64::new(0.0, b);
    let denom = 1.0 / (1.0 + b * b);
    let mut out1 = Vec::with_capacity(grid.n_points);
    let mut out2 = Vec::with_capacity(grid.n_points);
    for t in grid.times() {
        let a1 = s1.eval(t - d1);
        let c1 = s1.eval(t - d2);
        let a2 = s2.eval(t - d1);
        let c2 = s2.eval(t - d2);
        out1.push((a1 - ib * (a2 + c2) - b * b * c1) * denom);
        out2.push((c2 - ib * (c1 + a1) - b * b * a2) * denom);
    }
    (out1, out2)
}

/// Integrates `(e1_in, e2_in)` from `z = 0` and returns the state at each
/// checkpoint.
pub fn integrate(
    e1_in: &Envelope,
    e2_in: &Envelope,
    cfg: &IntegratorConfig,
    frame: &SimFrame,
) -> Result<Vec<TwoChannelState>> {
    e1_in.check_grid(e2_in)?;
    cfg.validate(frame)?;
    let grid = *e1_in.grid();
    let z_end = *cfg.checkpoints.last().unwrap_or(&0.0);
    let arrival = z_end / frame.v1.min(frame.v2);
    if grid.t_max < arrival + 4.0 {
        return Err(Error::Domain(format!(
            "time window ends at {} but the slow channel arrives at {arrival:.3} after z = {z_end}; \
             extend t_max to at least {:.3}",
            grid.t_max,
            arrival + 4.0
        )));
    }

    let m = frame.measure;
    let n_in = e1_in.norm(m) + e2_in.norm(m);
    let mut e1 = e1_in.values().to_vec();
    let mut e2 = e2_in.values().to_vec();
    let mut z = 0.0;
    let mut out = Vec::with_capacity(cfg.checkpoints.len());
    for &target in &cfg.checkpoints {
        let span = target - z;
        let n = (span * cfg.n_z_steps as f64 - 1e-9).ceil().max(0.0) as usize;
        if n > 0 {
            let h = span / n as f64;
            for _ in 0..n {
                let (a, b) = step(&grid, &e1, &e2, h, frame);
                e1 = a;
                e2 = b;
            }
        }
        z = target;
        let phi1 = Envelope::new(grid, e1.clone())?;
        let phi2 = Envelope::new(grid, e2.clone())?;
        let (n1, n2) = (phi1.norm(m), phi2.norm(m));
        let residual = (n1 + n2 - n_in).abs();
        if residual > cfg.conservation_tol * n_in.max(f64::MIN_POSITIVE) {
            return Err(Error::Numerical(format!(
                "oracle norm drifted by {residual:.3e} at z = {target} (tolerance {:.1e})",
                cfg.conservation_tol
            )));
        }
        out.push(TwoChannelState { z: target, phi1, phi2, n1, n2, residual });
    }
    Ok(out)
}

/// Errors against a reference solution for a sequence of step counts.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub steps: Vec<usize>,
    /// Relative L2 error of the two-channel state at each resolution.
    pub errors: Vec<f64>,
    /// `log2(e_k / e_{k+1}) / log2(n_{k+1} / n_k)` for consecutive pairs.
    pub orders: Vec<f64>,
    /// Least-squares slope of `log e` against `log h`.
    pub order: f64,
    pub warnings: Vec<String>,
}

fn two_channel_error(state: &TwoChannelState, reference: (&Envelope, &Envelope)) -> Result<f64> {
    let diff_sq = |a: &Envelope, b: &Envelope| -> Result<f64> {
        a.check_grid(b)?;
        Ok(a.values().iter().zip(b.values()).map(|(x, y)| (x - y).norm_sqr()).sum())
    };
    let ref_sq: f64 = reference.0.values().iter().chain(reference.1.values()).map(|v| v.norm_sqr()).sum();
    let err = diff_sq(&state.phi1, reference.0)? + diff_sq(&state.phi2, reference.1)?;
    Ok((err / ref_sq.max(f64::MIN_POSITIVE)).sqrt())
}

/// Measures the convergence order of [`integrate`] at distance `z` against a
/// reference `(Φ1, Φ2)` (normally the Bessel-kernel solution).
pub fn convergence_order(
    e1_in: &Envelope,
    e2_in: &Envelope,
    frame: &SimFrame,
    z: f64,
    steps: &[usize],
    reference: (&Envelope, &Envelope),
) -> Result<ConvergenceReport> {
    if steps.len() < 3 {
        return Err(Error::Domain(format!("need at least three resolutions, got {}", steps.len())));
    }
    let ratio = steps[1] as f64 / steps[0] as f64;
    for w in steps.windows(2) {
        let r = w[1] as f64 / w[0] as f64;
        if !(r > 1.0) || (r - ratio).abs() > 1e-12 * ratio {
            return Err(Error::Domain(format!("step counts {steps:?} are not an increasing geometric progression")));
        }
    }
    let mut errors = Vec::with_capacity(steps.len());
    for &n in steps {
        let cfg = IntegratorConfig::new(n, vec![z]);
        let state = integrate(e1_in, e2_in, &cfg, frame)?;
        errors.push(two_channel_error(&state[0], reference)?);
    }
    let orders: Vec<f64> = errors.windows(2).map(|e| (e[0] / e[1]).ln() / ratio.ln()).collect();
    let mut warnings = Vec::new();
    if errors.windows(2).any(|e| e[1] >= e[0]) {
        warnings.push(format!("errors are not monotone under refinement: {errors:?}"));
    }
    // slope of log e against log h = -log n
    let xs: Vec<f64> = steps.iter().map(|&n| -(n as f64).ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.max(f64::MIN_POSITIVE).ln()).collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(ConvergenceReport { steps: steps.to_vec(), errors, orders, order: sxy / sxx, warnings })
}
