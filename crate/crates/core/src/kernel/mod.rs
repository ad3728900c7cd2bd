//! Analytic Green-function solution of the lossless two-channel transport
//! equations
//!
//! ```text
//! (∂z + 1/ṽ1 ∂t) E1 = -i β̃ E2
//! (∂z + 1/ṽ2 ∂t) E2 = -i β̃ E1
//! ```
//!
//! For an input `f` in channel `i` and vacuum in channel `j` the solution at
//! distance `z` is
//!
//! ```text
//! Φi(z,t) = f(t - z/ṽi) - zβ̃ ∫_0^1 dy f(t - z/ṽj - (1/ṽi - 1/ṽj) z y) J1(ψ) √(y/(1-y))
//! Φj(z,t) = -iβ̃ ∫_0^z dx f(t - z/ṽj - (1/ṽi - 1/ṽj) x) J0(2β̃ √(x(z-x)))
//! ```
//!
//! with `ψ = 2β̃z√(y(1-y))`. The `y` integral is evaluated after the
//! substitution `y = 1 - u²`, which turns the integrand into
//! `2√(1-u²) f(..) J1(2β̃z u√(1-u²))`, a smooth function of `u`.

pub mod bessel;
pub mod quadrature;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::medium::SimFrame;
use crate::pulse::{Envelope, Spline, TimeGrid};
use crate::{Error, Result};

use bessel::{j0, j1};
use quadrature::GaussLegendre;

/// Quadrature settings for the Bessel-kernel integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelQuadrature {
    /// Gauss-Legendre order used for both integrals (at least 64).
    pub n_nodes: usize,
    /// Raise the order with the group delay `(1/ṽ1 - 1/ṽ2) z` so that the
    /// delayed pulse stays resolved.
    pub adaptive: bool,
    /// Re-evaluate at twice the order and fail if the sup-norm change exceeds
    /// `convergence_tol · sup|f|`.
    pub verify: bool,
    pub convergence_tol: f64,
    /// Allowed `|n1 + n2 - n_in|` in [`state_at`].
    pub conservation_tol: f64,
}

impl Default for KernelQuadrature {
    fn default() -> Self {
        KernelQuadrature { n_nodes: 256, adaptive: true, verify: true, convergence_tol: 1e-6, conservation_tol: 1e-4 }
    }
}

impl KernelQuadrature {
    pub fn fixed(n_nodes: usize) -> Self {
        KernelQuadrature { n_nodes, adaptive: false, verify: false, ..Default::default() }
    }

    /// Order actually used for a propagation over `z` in `frame`.
    pub fn order_for(&self, frame: &SimFrame, z: f64) -> usize {
        let base = self.n_nodes.max(64);
        if !self.adaptive {
            return base;
        }
        // about 24 nodes per pulse duration of delay spread, plus the Bessel
        // oscillations over ψ ∈ [0, β̃z]
        let spread = frame.delay_per_length().abs() * z;
        let need = (24.0 * spread + 8.0 * frame.beta.abs() * z).ceil() as usize;
        base.max(need.div_ceil(64) * 64)
    }

    fn validate(&self) -> Result<()> {
        if self.n_nodes < 64 {
            return Err(Error::Domain(format!("kernel quadrature needs at least 64 nodes, got {}", self.n_nodes)));
        }
        Ok(())
    }
}

/// Both channel wavefunctions at one distance, with their photon numbers.
#[derive(Debug, Clone)]
pub struct TwoChannelState {
    /// Distance in units of `L`.
    pub z: f64,
    pub phi1: Envelope,
    pub phi2: Envelope,
    pub n1: f64,
    pub n2: f64,
    /// `|n1 + n2 - n_in|`.
    pub residual: f64,
}

fn check_z(z: f64) -> Result<()> {
    if !(z >= 0.0 && z.is_finite()) {
        return Err(Error::Domain(format!("distance must be finite and ≥ 0, got {z}")));
    }
    Ok(())
}

/// Nodes on `u ∈ [0, 1]` for the self-channel integral: delays and the
/// combined weights `2√(1-u²) J1(2β̃z u√(1-u²)) w`.
fn self_channel_terms(rule: &GaussLegendre, z: f64, v_self: f64, v_other: f64, beta: f64) -> (Vec<f64>, Vec<f64>) {
    let d = 1.0 / v_self - 1.0 / v_other;
    let (u, w) = rule.on_interval(0.0, 1.0);
    let mut delays = Vec::with_capacity(u.len());
    let mut weights = Vec::with_capacity(u.len());
    for (u, w) in u.iter().zip(&w) {
        let s = (1.0 - u * u).max(0.0).sqrt();
        let y = 1.0 - u * u;
        let psi = 2.0 * beta * z * u * s;
        delays.push(z / v_other + d * z * y);
        weights.push(2.0 * s * j1(psi) * w);
    }
    (delays, weights)
}

/// Nodes on `x ∈ [0, z]` for the cross-channel integral.
fn cross_channel_terms(rule: &GaussLegendre, z: f64, v_target: f64, v_source: f64, beta: f64) -> (Vec<f64>, Vec<f64>) {
    let d = 1.0 / v_source - 1.0 / v_target;
    let (x, w) = rule.on_interval(0.0, z);
    let delays = x.iter().map(|x| z / v_target + d * x).collect();
    let weights = x.iter().zip(&w).map(|(x, w)| j0(2.0 * beta * (x * (z - x)).max(0.0).sqrt()) * w).collect();
    (delays, weights)
}

/// `Σ_k weights[k] · f(t - delays[k])` at every grid time.
fn delayed_sum(spline: &Spline, grid: &TimeGrid, delays: &[f64], weights: &[f64]) -> Vec<Complex64> {
    (0..grid.n_points)
        .into_par_iter()
        .map(|i| {
            let t = grid.time(i);
            delays.iter().zip(weights).map(|(d, w)| spline.eval(t - d) * *w).sum::<Complex64>()
        })
        .collect()
}

/// Wavefunction in the input channel (`v_self`) for a source in that channel.
fn self_channel(f: &Envelope, z: f64, v_self: f64, v_other: f64, beta: f64, order: usize) -> Vec<Complex64> {
    let grid = *f.grid();
    let spline = f.interpolant();
    let direct: Vec<Complex64> = grid.times().map(|t| spline.eval(t - z / v_self)).collect();
    if z == 0.0 || beta == 0.0 {
        return direct;
    }
    let rule = GaussLegendre::new(order);
    let (delays, weights) = self_channel_terms(&rule, z, v_self, v_other, beta);
    let regen = delayed_sum(&spline, &grid, &delays, &weights);
    direct.iter().zip(regen).map(|(a, r)| a - r * (z * beta)).collect()
}

/// Wavefunction generated in the other channel (`v_target`) from a source in
/// the channel moving at `v_source`.
fn cross_channel(f: &Envelope, z: f64, v_target: f64, v_source: f64, beta: f64, order: usize) -> Vec<Complex64> {
    let grid = *f.grid();
    if z == 0.0 || beta == 0.0 {
        return vec![Complex64::new(0.0, 0.0); grid.n_points];
    }
    let spline = f.interpolant();
    let rule = GaussLegendre::new(order);
    let (delays, weights) = cross_channel_terms(&rule, z, v_target, v_source, beta);
    let minus_i_beta = Complex64::new(0.0, -beta);
    delayed_sum(&spline, &grid, &delays, &weights).into_iter().map(|v| v * minus_i_beta).collect()
}

fn evaluate_checked(
    f: &Envelope,
    frame: &SimFrame,
    z: f64,
    quad: &KernelQuadrature,
    eval: impl Fn(usize) -> Vec<Complex64>,
) -> Result<Envelope> {
    quad.validate()?;
    check_z(z)?;
    let order = quad.order_for(frame, z);
    let values = eval(order);
    if quad.verify && z > 0.0 && frame.beta != 0.0 {
        let refined = eval(2 * order);
        let change = values.iter().zip(&refined).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        let scale = f.sup_norm().max(f64::MIN_POSITIVE);
        if change > quad.convergence_tol * scale {
            return Err(Error::Numerical(format!(
                "kernel quadrature not converged at z = {z}: doubling {order} nodes changed the \
                 result by {change:.3e} (sup|f| = {scale:.3e}, tol = {:.1e})",
                quad.convergence_tol
            )));
        }
    }
    Envelope::new(*f.grid(), values)
}

/// `Φ1(z, ·)` for input `f1` in channel 1 and vacuum in channel 2.
pub fn propagate_phi1(f1: &Envelope, z: f64, frame: &SimFrame, quad: &KernelQuadrature) -> Result<Envelope> {
    evaluate_checked(f1, frame, z, quad, |n| self_channel(f1, z, frame.v1, frame.v2, frame.beta, n))
}

/// `Φ2(z, ·)` for input `f1` in channel 1 and vacuum in channel 2.
pub fn propagate_phi2(f1: &Envelope, z: f64, frame: &SimFrame, quad: &KernelQuadrature) -> Result<Envelope> {
    evaluate_checked(f1, frame, z, quad, |n| cross_channel(f1, z, frame.v2, frame.v1, frame.beta, n))
}

/// The parametric-regeneration contribution to `Φ1`:
/// `zβ̃ ∫_0^1 dy f1(..) J1(ψ) √(y/(1-y))`, so that `Φ1 = f1(t - z/ṽ1) - R`.
pub fn regeneration_term(f1: &Envelope, z: f64, frame: &SimFrame, quad: &KernelQuadrature) -> Result<Envelope> {
    evaluate_checked(f1, frame, z, quad, |n| {
        if z == 0.0 || frame.beta == 0.0 {
            return vec![Complex64::new(0.0, 0.0); f1.grid().n_points];
        }
        let rule = GaussLegendre::new(n);
        let (delays, weights) = self_channel_terms(&rule, z, frame.v1, frame.v2, frame.beta);
        let spline = f1.interpolant();
        delayed_sum(&spline, f1.grid(), &delays, &weights).into_iter().map(|v| v * (z * frame.beta)).collect()
    })
}

/// General two-channel input: superposition of the channel-1 and channel-2
/// source solutions.
pub fn propagate_pair(
    e1: &Envelope,
    e2: &Envelope,
    z: f64,
    frame: &SimFrame,
    quad: &KernelQuadrature,
) -> Result<(Envelope, Envelope)> {
    e1.check_grid(e2)?;
    let swapped = frame.swapped();
    let a1 = propagate_phi1(e1, z, frame, quad)?;
    let a2 = propagate_phi2(e1, z, frame, quad)?;
    // channel-2 source: same formulas with the roles of the channels exchanged
    let b2 = propagate_phi1(e2, z, &swapped, quad)?;
    let b1 = propagate_phi2(e2, z, &swapped, quad)?;
    Ok((a1.add(&b1)?, a2.add(&b2)?))
}

/// Closed form for equal group velocities `ṽ`:
/// `ê1 = e1(τ) cos β̃z - i e2(τ) sin β̃z`, `ê2 = e2(τ) cos β̃z - i e1(τ) sin β̃z`,
/// `τ = t - z/ṽ`.
pub fn propagate_equal_velocity(
    e1: &Envelope,
    e2: &Envelope,
    z: f64,
    beta: f64,
    v: f64,
) -> Result<(Envelope, Envelope)> {
    e1.check_grid(e2)?;
    check_z(z)?;
    let d1 = e1.shift(z / v)?;
    let d2 = e2.shift(z / v)?;
    let c = Complex64::new((beta * z).cos(), 0.0);
    let s = Complex64::new(0.0, -(beta * z).sin());
    let out1 = d1.scale(c).add(&d2.scale(s))?;
    let out2 = d2.scale(c).add(&d1.scale(s))?;
    Ok((out1, out2))
}

/// Both wavefunctions at `z` with photon numbers and the conservation check.
pub fn state_at(f1: &Envelope, z: f64, frame: &SimFrame, quad: &KernelQuadrature) -> Result<TwoChannelState> {
    let phi1 = propagate_phi1(f1, z, frame, quad)?;
    let phi2 = propagate_phi2(f1, z, frame, quad)?;
    let m = frame.measure;
    let n_in = f1.norm(m);
    let n1 = phi1.norm(m);
    let n2 = phi2.norm(m);
    let residual = (n1 + n2 - n_in).abs();
    if residual > quad.conservation_tol {
        return Err(Error::Numerical(format!(
            "photon number not conserved at z = {z}: n1 + n2 = {:.8}, input {:.8} \
             (residual {residual:.3e} > {:.1e}); is the time window wide enough?",
            n1 + n2,
            n_in,
            quad.conservation_tol
        )));
    }
    Ok(TwoChannelState { z, phi1, phi2, n1, n2, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::medium::{derive_params, PhysicalConfig};
    use crate::pulse::{gaussian_envelope, inner_product};
    use std::f64::consts::PI;

    fn rb_frame() -> SimFrame {
        derive_params(&PhysicalConfig::rb87()).unwrap().frame()
    }

    fn input(frame: &SimFrame, z_max: f64) -> Envelope {
        let grid = TimeGrid::for_propagation(frame, z_max, 0.01, 6.0).unwrap();
        gaussian_envelope(grid, frame.measure).unwrap()
    }

    #[test]
    fn z_zero_is_identity() {
        let frame = rb_frame();
        let f = input(&frame, 1.0);
        let s = state_at(&f, 0.0, &frame, &KernelQuadrature::default()).unwrap();
        assert!(s.phi1.max_abs_diff(&f).unwrap() < 1e-15);
        assert_eq!(s.phi2.sup_norm(), 0.0);
        assert!((s.n1 - 1.0).abs() < 1e-10 && s.n2 == 0.0);
    }

    #[test]
    fn no_coupling_is_pure_delay() {
        let frame = SimFrame { beta: 0.0, ..rb_frame() };
        let f = input(&frame, 1.0);
        let q = KernelQuadrature::default();
        let phi1 = propagate_phi1(&f, 1.0, &frame, &q).unwrap();
        let target = f.shift(1.0 / frame.v1).unwrap();
        assert_eq!(phi1.max_abs_diff(&target).unwrap(), 0.0);
        assert_eq!(propagate_phi2(&f, 1.0, &frame, &q).unwrap().sup_norm(), 0.0);
    }

    #[test]
    fn equal_velocity_limit_matches_rotation() {
        let frame = SimFrame { v1: 0.25, v2: 0.25, beta: 2.7, measure: 6.0 };
        let f = input(&frame, 1.0);
        let zero = Envelope::zeros(*f.grid());
        let q = KernelQuadrature::default();
        for z in [0.3, 0.7, 1.0] {
            let (r1, r2) = propagate_equal_velocity(&f, &zero, z, frame.beta, frame.v1).unwrap();
            let p1 = propagate_phi1(&f, z, &frame, &q).unwrap();
            let p2 = propagate_phi2(&f, z, &frame, &q).unwrap();
            let scale = f.sup_norm();
            assert!(p1.max_abs_diff(&r1).unwrap() < 1e-8 * scale, "z={z}");
            assert!(p2.max_abs_diff(&r2).unwrap() < 1e-8 * scale, "z={z}");
        }
    }

    #[test]
    fn complete_conversion_at_quarter_period() {
        let frame = SimFrame { v1: 0.4, v2: 0.4, beta: 3.0, measure: 5.0 };
        let f = input(&frame, 1.0);
        let z = PI / (2.0 * frame.beta);
        let s = state_at(&f, z, &frame, &KernelQuadrature::default()).unwrap();
        assert!((s.n2 - 1.0).abs() < 1e-6, "n2 = {}", s.n2);
        let target = f.shift(z / frame.v1).unwrap();
        for (a, b) in s.phi2.values().iter().zip(target.values()) {
            assert!((a.norm() - b.norm()).abs() < 1e-8 * f.sup_norm());
        }
    }

    #[test]
    fn equal_velocity_rotation_identities() {
        let frame = SimFrame { v1: 0.5, v2: 0.5, beta: 1.0, measure: 1.0 };
        let f = input(&frame, 1.0);
        let zero = Envelope::zeros(*f.grid());
        let (a, b) = propagate_equal_velocity(&f, &zero, 0.0, 1.0, 0.5).unwrap();
        assert_eq!(a, f);
        assert_eq!(b.sup_norm(), 0.0);
        // β̃z = π: sign flip of the delayed input
        let (a, b) = propagate_equal_velocity(&f, &zero, 1.0, PI, 0.5).unwrap();
        let target = f.shift(2.0).unwrap().scale(Complex64::new(-1.0, 0.0));
        assert!(a.max_abs_diff(&target).unwrap() < 1e-14);
        assert!(b.sup_norm() < 1e-15);
    }

    #[test]
    fn rotation_preserves_norm_for_random_inputs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let grid = TimeGrid::with_spacing(-8.0, 16.0, 0.01).unwrap();
        for _ in 0..10 {
            let mut mk = || {
                let (a, b, c): (f64, f64, f64) =
                    (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                Envelope::from_fn(grid, |t| Complex64::new(a, b) * (-2.0 * (t - c).powi(2)).exp()).unwrap()
            };
            let (e1, e2) = (mk(), mk());
            let z: f64 = rng.gen_range(0.0..1.0);
            let before = e1.norm(1.0) + e2.norm(1.0);
            let (o1, o2) = propagate_equal_velocity(&e1, &e2, z, 2.3, 0.2).unwrap();
            assert!((o1.norm(1.0) + o2.norm(1.0) - before).abs() < 1e-8 * before);
        }
    }

    #[test]
    fn cross_channel_is_imaginary_for_real_input() {
        let frame = rb_frame();
        let f = input(&frame, 1.0);
        let p2 = propagate_phi2(&f, 1.0, &frame, &KernelQuadrature::default()).unwrap();
        assert!(p2.values().iter().all(|v| v.re.abs() < 1e-10));
        let p1 = propagate_phi1(&f, 1.0, &frame, &KernelQuadrature::default()).unwrap();
        assert!(p1.values().iter().all(|v| v.im == 0.0));
    }

    #[test]
    fn conservation_along_rb_path() {
        let frame = rb_frame();
        let f = input(&frame, 1.0);
        let q = KernelQuadrature::default();
        for k in 1..=10 {
            let z = k as f64 / 10.0;
            let s = state_at(&f, z, &frame, &q).unwrap();
            assert!(s.residual < 1e-4, "z={z}: {}", s.residual);
        }
    }

    #[test]
    fn two_channel_input_conserves_total_norm() {
        let frame = rb_frame();
        let f = input(&frame, 1.0);
        let g = f.shift(1.5).unwrap().scale(Complex64::new(0.3, -0.8));
        let q = KernelQuadrature::default();
        let m = frame.measure;
        let before = f.norm(m) + g.norm(m);
        for z in [0.25, 0.6, 1.0] {
            let (a, b) = propagate_pair(&f, &g, z, &frame, &q).unwrap();
            let after = a.norm(m) + b.norm(m);
            assert!((after - before).abs() < 1e-4 * before, "z={z}: {after} vs {before}");
        }
    }

    #[test]
    fn regeneration_term_is_nonnegative() {
        // J1(ψ) > 0 for ψ < 3.83 and β̃z ≤ 3 keeps ψ in that range.
        let frame = rb_frame();
        assert!(frame.beta <= 3.0);
        let f = input(&frame, 1.0);
        let q = KernelQuadrature::default();
        for z in [0.2, 0.5, 1.0] {
            let r = regeneration_term(&f, z, &frame, &q).unwrap();
            let scale = f.sup_norm();
            assert!(r.values().iter().all(|v| v.re >= -1e-14 * scale && v.im == 0.0));
            let p1 = propagate_phi1(&f, z, &frame, &q).unwrap();
            let direct = f.shift(z / frame.v1).unwrap();
            let rebuilt = direct.add(&r.scale(Complex64::new(-1.0, 0.0))).unwrap();
            assert!(rebuilt.max_abs_diff(&p1).unwrap() < 1e-10 * scale);
        }
    }

    #[test]
    fn quadrature_converges_at_default_order() {
        let frame = rb_frame();
        let f = input(&frame, 1.0);
        let a = propagate_phi1(&f, 1.0, &frame, &KernelQuadrature::fixed(256)).unwrap();
        let b = propagate_phi1(&f, 1.0, &frame, &KernelQuadrature::fixed(512)).unwrap();
        assert!(a.max_abs_diff(&b).unwrap() < 1e-8, "{}", a.max_abs_diff(&b).unwrap());
    }

    #[test]
    fn under_resolved_quadrature_is_reported() {
        // long delay spread with the order pinned low
        let frame = SimFrame { v1: 0.01, v2: 1.0, beta: 3.0, measure: 1.0 };
        let f = input(&frame, 1.0);
        let q = KernelQuadrature { n_nodes: 64, adaptive: false, verify: true, ..Default::default() };
        assert!(matches!(propagate_phi1(&f, 1.0, &frame, &q), Err(Error::Numerical(_))));
    }

    #[test]
    fn truncated_window_fails_conservation() {
        let frame = rb_frame();
        let grid = TimeGrid::with_spacing(-6.0, 8.0, 0.01).unwrap();
        let f = gaussian_envelope(grid, frame.measure).unwrap();
        let r = state_at(&f, 1.0, &frame, &KernelQuadrature::default());
        assert!(matches!(r, Err(Error::Numerical(_))));
    }

    #[test]
    fn rejects_bad_inputs() {
        let frame = rb_frame();
        let f = input(&frame, 1.0);
        assert!(propagate_phi1(&f, -0.1, &frame, &KernelQuadrature::default()).is_err());
        assert!(propagate_phi1(&f, 1.0, &frame, &KernelQuadrature::fixed(32)).is_err());
        let other = Envelope::zeros(TimeGrid::new(0.0, 1.0, 300).unwrap());
        assert!(propagate_pair(&f, &other, 0.5, &frame, &KernelQuadrature::default()).is_err());
    }

    #[test]
    fn orthogonality_of_windowed_halves_uses_inner_product() {
        let frame = rb_frame();
        let f = input(&frame, 1.0);
        let s = state_at(&f, 1.0, &frame, &KernelQuadrature::default()).unwrap();
        let ip = inner_product(&s.phi1, &s.phi1, frame.measure).unwrap();
        assert!((ip.re - s.n1).abs() < 1e-12);
    }
}
