//! Sampled complex temporal envelopes on a uniform time grid.
//!
//! Times are in units of the pulse duration `T`. Photon numbers are
//! `m ∫ |f|² dt` with the measure factor `m = cT/L`, evaluated by the
//! trapezoid rule.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::medium::SimFrame;
use crate::{Error, Result};

/// Smallest grid accepted for simulation use.
pub const MIN_POINTS: usize = 256;

/// Fraction of the norm allowed to be lost off the edge of a window.
pub const TAIL_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub n_points: usize,
}

impl TimeGrid {
    pub fn new(t_min: f64, t_max: f64, n_points: usize) -> Result<Self> {
        if n_points < MIN_POINTS {
            return Err(Error::Domain(format!("time grid needs at least {MIN_POINTS} points, got {n_points}")));
        }
        if !(t_min.is_finite() && t_max.is_finite() && t_max > t_min) {
            return Err(Error::Domain(format!("invalid time window [{t_min}, {t_max}]")));
        }
        Ok(TimeGrid { t_min, t_max, n_points })
    }

    /// Grid on `[t_min, t_max]` whose spacing does not exceed `dt`.
    pub fn with_spacing(t_min: f64, t_max: f64, dt: f64) -> Result<Self> {
        let n = ((t_max - t_min) / dt).ceil() as usize + 1;
        TimeGrid::new(t_min, t_max, n.max(MIN_POINTS))
    }

    /// Window for propagating a pulse centred at `t = 0` through `z_max`
    /// lengths of medium: `[-margin, z_max/ṽ_slow + margin]`.
    pub fn for_propagation(frame: &SimFrame, z_max: f64, dt: f64, margin: f64) -> Result<Self> {
        let slowest = frame.v1.min(frame.v2);
        TimeGrid::with_spacing(-margin, z_max / slowest + margin, dt)
    }

    pub fn dt(&self) -> f64 {
        (self.t_max - self.t_min) / (self.n_points - 1) as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        // endpoint-exact evaluation
        if i + 1 == self.n_points {
            self.t_max
        } else {
            self.t_min + i as f64 * self.dt()
        }
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |i| self.time(i))
    }

    /// True when the window reaches past the slow-channel arrival at `z = 1`
    /// by at least four pulse durations.
    pub fn covers_arrival(&self, frame: &SimFrame) -> bool {
        self.t_max >= 1.0 / frame.v1.min(frame.v2) + 4.0
    }

    fn same_as(&self, other: &TimeGrid) -> bool {
        self.n_points == other.n_points
            && (self.t_min - other.t_min).abs() <= 1e-12 * (1.0 + self.t_min.abs())
            && (self.t_max - other.t_max).abs() <= 1e-12 * (1.0 + self.t_max.abs())
    }
}

/// Trapezoid rule for uniformly spaced samples.
pub fn trapezoid(values: &[f64], dt: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => {
            let inner: f64 = values[1..n - 1].iter().sum();
            dt * (inner + 0.5 * (values[0] + values[n - 1]))
        }
    }
}

/// A complex envelope sampled on a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    grid: TimeGrid,
    values: Vec<Complex64>,
}

impl Envelope {
    pub fn new(grid: TimeGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n_points {
            return Err(Error::Domain(format!("{} samples for a grid of {} points", values.len(), grid.n_points)));
        }
        if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Numerical(format!("non-finite sample at t = {}", grid.time(i))));
        }
        Ok(Envelope { grid, values })
    }

    pub fn zeros(grid: TimeGrid) -> Self {
        Envelope { grid, values: vec![Complex64::new(0.0, 0.0); grid.n_points] }
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let values = grid.times().map(f).collect();
        Envelope::new(grid, values)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    /// Photon number `m ∫ |f|² dt`.
    pub fn norm(&self, measure: f64) -> f64 {
        measure * trapezoid(&self.intensity(), self.grid.dt())
    }

    pub fn scale(&self, a: Complex64) -> Envelope {
        Envelope { grid: self.grid, values: self.values.iter().map(|v| v * a).collect() }
    }

    pub fn add(&self, other: &Envelope) -> Result<Envelope> {
        self.check_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(Envelope { grid: self.grid, values })
    }

    pub fn max_abs_diff(&self, other: &Envelope) -> Result<f64> {
        self.check_grid(other)?;
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    /// Relative L2 distance `‖self − reference‖ / ‖reference‖`.
    pub fn relative_l2(&self, reference: &Envelope) -> Result<f64> {
        self.check_grid(reference)?;
        let num: f64 = self.values.iter().zip(&reference.values).map(|(a, b)| (a - b).norm_sqr()).sum();
        let den: f64 = reference.values.iter().map(|b| b.norm_sqr()).sum();
        Ok((num / den).sqrt())
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn interpolant(&self) -> Spline {
        Spline::new(&self.grid, &self.values)
    }

    /// The envelope delayed by `tau`: `g(t) = f(t - tau)`, resampled by cubic
    /// spline interpolation.
    pub fn shift(&self, tau: f64) -> Result<Envelope> {
        if tau == 0.0 {
            return Ok(self.clone());
        }
        let lost = self.fraction_lost(tau);
        if lost > TAIL_TOLERANCE {
            return Err(Error::Domain(format!(
                "shift by {tau} pushes {lost:.3e} of the norm outside the window [{}, {}]",
                self.grid.t_min, self.grid.t_max
            )));
        }
        let spline = self.interpolant();
        let values = self.grid.times().map(|t| spline.eval(t - tau)).collect();
        Ok(Envelope { grid: self.grid, values })
    }

    /// Fraction of the norm carried by samples that a delay of `tau` moves
    /// outside the window.
    fn fraction_lost(&self, tau: f64) -> f64 {
        let total: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        if total == 0.0 {
            return 0.0;
        }
        let (lo, hi) = (self.grid.t_min, self.grid.t_max);
        let lost: f64 = self
            .grid
            .times()
            .zip(&self.values)
            .filter(|(t, _)| t + tau > hi || t + tau < lo)
            .map(|(_, v)| v.norm_sqr())
            .sum();
        lost / total
    }

    pub fn check_grid(&self, other: &Envelope) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::Domain(format!("grid mismatch: {:?} vs {:?}", self.grid, other.grid)))
        }
    }

    /// CSV with columns `t,re,im`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,re,im\n");
        for (t, v) in self.grid.times().zip(&self.values) {
            let _ = writeln!(out, "{},{},{}", format_sig17(t), format_sig17(v.re), format_sig17(v.im));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Envelope> {
        let mut lines = text.lines();
        match lines.next().map(str::trim) {
            Some("t,re,im") => {}
            other => return Err(Error::Domain(format!("expected header `t,re,im`, got {other:?}"))),
        }
        let mut ts = Vec::new();
        let mut vs = Vec::new();
        for (k, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<_> = line.split(',').collect();
            let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::Domain(format!("line {}: {e}", k + 2)));
            if cols.len() != 3 {
                return Err(Error::Domain(format!("line {}: expected 3 columns", k + 2)));
            }
            ts.push(parse(cols[0])?);
            vs.push(Complex64::new(parse(cols[1])?, parse(cols[2])?));
        }
        if ts.len() < 2 {
            return Err(Error::Domain("envelope CSV needs at least two rows".into()));
        }
        let grid = TimeGrid::new(ts[0], ts[ts.len() - 1], ts.len())?;
        let dt = grid.dt();
        for (i, t) in ts.iter().enumerate() {
            if (t - grid.time(i)).abs() > 1e-9 * dt.max(1.0) {
                return Err(Error::Domain(format!("non-uniform time column at row {}", i + 2)));
            }
        }
        Envelope::new(grid, vs)
    }
}

/// Formats a float with 17 significant digits in scientific notation.
pub fn format_sig17(x: f64) -> String {
    format!("{x:.16e}")
}

/// `m ∫ conj(a) b dt` by the trapezoid rule.
pub fn inner_product(a: &Envelope, b: &Envelope, measure: f64) -> Result<Complex64> {
    a.check_grid(b)?;
    let n = a.values.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, (x, y)) in a.values.iter().zip(&b.values).enumerate() {
        let w = if i == 0 || i + 1 == n { 0.5 } else { 1.0 };
        acc += x.conj() * y * w;
    }
    Ok(acc * (measure * a.grid.dt()))
}

/// Normalised Gaussian input `C exp(-2 t²)` with `m ∫ |f|² dt = 1` on the grid.
pub fn gaussian_envelope(grid: TimeGrid, measure: f64) -> Result<Envelope> {
    if !(measure > 0.0 && measure.is_finite()) {
        return Err(Error::Domain(format!("measure must be positive, got {measure}")));
    }
    // ∫_{|t|>a} e^{-4t²} dt / ∫ e^{-4t²} dt = erfc(2a) ≤ e^{-4a²} / (2a√π)
    let tail = |a: f64| if a <= 0.0 { 1.0 } else { (-4.0 * a * a).exp() / (2.0 * a * PI.sqrt()) };
    let lost = 0.5 * (tail(grid.t_max) + tail(-grid.t_min));
    if lost > TAIL_TOLERANCE {
        return Err(Error::Domain(format!(
            "window [{}, {}] truncates {lost:.3e} of the Gaussian norm",
            grid.t_min, grid.t_max
        )));
    }
    let raw = Envelope::from_fn(grid, |t| Complex64::new((-2.0 * t * t).exp(), 0.0))?;
    let c = raw.norm(measure).sqrt().recip();
    Ok(raw.scale(Complex64::new(c, 0.0)))
}

/// Analytic normalisation constant of `C exp(-2t²)` under measure `m`.
pub fn gaussian_constant(measure: f64) -> f64 {
    (measure * PI.sqrt() / 2.0).powf(-0.5)
}

/// Natural cubic spline through complex samples on a uniform grid; zero
/// outside the sampled window.
#[derive(Debug, Clone)]
pub struct Spline {
    t0: f64,
    h: f64,
    y: Vec<Complex64>,
    m: Vec<Complex64>,
}

impl Spline {
    pub fn new(grid: &TimeGrid, y: &[Complex64]) -> Self {
        let n = y.len();
        let h = grid.dt();
        let mut m = vec![Complex64::new(0.0, 0.0); n];
        if n > 2 {
            // M[i-1] + 4 M[i] + M[i+1] = 6/h² (y[i+1] - 2y[i] + y[i-1]), M[0] = M[n-1] = 0
            let k = n - 2;
            let mut c = vec![0.0; k];
            let mut d = vec![Complex64::new(0.0, 0.0); k];
            let s = 6.0 / (h * h);
            for j in 0..k {
                let i = j + 1;
                let rhs = (y[i + 1] - y[i] * 2.0 + y[i - 1]) * s;
                if j == 0 {
                    c[j] = 1.0 / 4.0;
                    d[j] = rhs / 4.0;
                } else {
                    let denom = 4.0 - c[j - 1];
                    c[j] = 1.0 / denom;
                    d[j] = (rhs - d[j - 1]) / denom;
                }
            }
            m[k] = d[k - 1];
            for j in (0..k - 1).rev() {
                m[j + 1] = d[j] - m[j + 2] * c[j];
            }
        }
        Spline { t0: grid.t_min, h, y: y.to_vec(), m }
    }

    #[inline]
    pub fn eval(&self, t: f64) -> Complex64 {
        let x = (t - self.t0) / self.h;
        let last = self.y.len() - 1;
        if !(x >= 0.0 && x <= last as f64) {
            return Complex64::new(0.0, 0.0);
        }
        let i = (x.floor() as usize).min(last - 1);
        let s = x - i as f64;
        let r = 1.0 - s;
        let h2 = self.h * self.h / 6.0;
        self.y[i] * r + self.y[i + 1] * s + (self.m[i] * (r * r * r - r) + self.m[i + 1] * (s * s * s - s)) * h2
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::medium::{derive_params, PhysicalConfig};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid(a: f64, b: f64, n: usize) -> TimeGrid {
        TimeGrid::new(a, b, n).unwrap()
    }

    fn random_envelope(g: TimeGrid, rng: &mut ChaCha8Rng) -> Envelope {
        let (c, w, a, b): (f64, f64, f64, f64) =
            (rng.gen_range(-2.0..2.0), rng.gen_range(0.5..1.5), rng.gen(), rng.gen());
        Envelope::from_fn(g, |t| Complex64::new(a, b - 0.5) * (-(t - c).powi(2) / w).exp()).unwrap()
    }

    #[test]
    fn grid_rejects_small_or_empty() {
        assert!(TimeGrid::new(0.0, 1.0, 10).is_err());
        assert!(TimeGrid::new(1.0, 1.0, 512).is_err());
        let g = grid(-1.0, 1.0, 257);
        assert_relative_eq!(g.dt(), 2.0 / 256.0);
        assert_eq!(g.time(256), 1.0);
    }

    #[test]
    fn gaussian_is_normalised_for_rb_measure() {
        let m = derive_params(&PhysicalConfig::rb87()).unwrap().frame().measure;
        let f = gaussian_envelope(grid(-8.0, 8.0, 2001), m).unwrap();
        assert!((f.norm(m) - 1.0).abs() < 1e-10);
        let ip = inner_product(&f, &f, m).unwrap();
        assert!((ip.re - 1.0).abs() < 1e-10 && ip.im == 0.0);
    }

    #[test]
    fn gaussian_constant_matches_closed_form() {
        // ∫ e^{-4t²} dt = √π / 2, so C = (m √π / 2)^{-1/2}; m = 1 gives 1.0623...
        let f = gaussian_envelope(grid(-8.0, 8.0, 4001), 1.0).unwrap();
        let c = f.values()[2000].re;
        assert!((c - gaussian_constant(1.0)).abs() < 1e-12);
        assert!((gaussian_constant(1.0) - 1.062_251_932_027_196_9).abs() < 1e-12);
    }

    #[test]
    fn gaussian_rejects_narrow_window() {
        assert!(matches!(gaussian_envelope(grid(-1.0, 8.0, 1000), 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn gaussian_refinement_is_pointwise() {
        let coarse = gaussian_envelope(grid(-8.0, 8.0, 1601), 1.0).unwrap();
        let fine = gaussian_envelope(grid(-8.0, 8.0, 3201), 1.0).unwrap();
        for i in 0..1601 {
            assert!((coarse.values()[i] - fine.values()[2 * i]).norm() < 1e-12);
        }
    }

    #[test]
    fn trapezoid_is_second_order_on_a_truncated_interval() {
        // On [0, 1] the endpoint derivatives of e^{-4t²} differ, so the
        // trapezoid error is c·Δt².
        let exact = 0.441_040_695_381_210_8; // ∫_0^1 e^{-4t²} dt = √π erf(2) / 4
        let err = |n: usize| {
            let dt = 1.0 / (n - 1) as f64;
            let v: Vec<f64> = (0..n).map(|i| (-4.0 * (i as f64 * dt).powi(2)).exp()).collect();
            (trapezoid(&v, dt) - exact).abs()
        };
        let ratio = err(101) / err(201);
        assert!((ratio - 4.0).abs() < 0.05, "ratio {ratio}");
    }

    #[test]
    fn trapezoid_on_full_gaussian_is_spectrally_accurate() {
        let exact = PI.sqrt() / 2.0;
        for n in [161, 321] {
            let dt = 16.0 / (n - 1) as f64;
            let v: Vec<f64> = (0..n).map(|i| (-4.0 * (-8.0 + i as f64 * dt).powi(2)).exp()).collect();
            assert!((trapezoid(&v, dt) - exact).abs() < 1e-14);
        }
    }

    #[test]
    fn disjoint_supports_are_orthogonal() {
        let g = grid(-10.0, 10.0, 4001);
        let a = Envelope::from_fn(g, |t| Complex64::new((-4.0 * (t + 5.0).powi(2)).exp(), 0.0)).unwrap();
        let b = Envelope::from_fn(g, |t| Complex64::new(0.0, (-4.0 * (t - 5.0).powi(2)).exp())).unwrap();
        assert!(inner_product(&a, &b, 1.0).unwrap().norm() < 1e-30);
    }

    #[test]
    fn inner_product_rejects_grid_mismatch() {
        let a = Envelope::zeros(grid(-1.0, 1.0, 300));
        let b = Envelope::zeros(grid(-1.0, 1.0, 301));
        assert!(matches!(inner_product(&a, &b, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn inner_product_symmetry_and_linearity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = grid(-8.0, 8.0, 1024);
        for _ in 0..20 {
            let a = random_envelope(g, &mut rng);
            let b = random_envelope(g, &mut rng);
            let c = random_envelope(g, &mut rng);
            let k = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let ab = inner_product(&a, &b, 3.0).unwrap();
            let ba = inner_product(&b, &a, 3.0).unwrap();
            assert!((ab - ba.conj()).norm() < 1e-12);
            let lhs = inner_product(&a, &b.scale(k).add(&c).unwrap(), 3.0).unwrap();
            let rhs = ab * k + inner_product(&a, &c, 3.0).unwrap();
            assert!((lhs - rhs).norm() < 1e-12);
            assert!(inner_product(&a, &a, 3.0).unwrap().re >= 0.0);
        }
    }

    #[test]
    fn zero_shift_is_identity() {
        let f = gaussian_envelope(grid(-8.0, 8.0, 1024), 1.0).unwrap();
        assert_eq!(f.shift(0.0).unwrap(), f);
    }

    #[test]
    fn shift_matches_translated_gaussian() {
        let m = 6.0;
        let tau = 1.0 / 0.074_022;
        let g = TimeGrid::with_spacing(-8.0, tau + 8.0, 0.01).unwrap();
        let f = gaussian_envelope(g, m).unwrap();
        let shifted = f.shift(tau).unwrap();
        let c = gaussian_constant(m);
        let target = Envelope::from_fn(g, |t| Complex64::new(c * (-2.0 * (t - tau).powi(2)).exp(), 0.0)).unwrap();
        assert!(shifted.max_abs_diff(&target).unwrap() < 1e-6);
        assert!((shifted.norm(m) - f.norm(m)).abs() < 1e-8);
    }

    #[test]
    fn shift_round_trip() {
        let g = grid(-10.0, 10.0, 2001);
        let f = gaussian_envelope(g, 1.0).unwrap();
        let back = f.shift(2.345).unwrap().shift(-2.345).unwrap();
        assert!(back.max_abs_diff(&f).unwrap() < 1e-6);
    }

    #[test]
    fn shift_out_of_window_is_an_error() {
        let f = gaussian_envelope(grid(-8.0, 8.0, 1024), 1.0).unwrap();
        assert!(matches!(f.shift(8.0), Err(Error::Domain(_))));
        assert!(matches!(f.shift(-8.0), Err(Error::Domain(_))));
    }

    #[test]
    fn spline_reproduces_cubics_away_from_edges() {
        let g = grid(-4.0, 4.0, 801);
        let f = |t: f64| (-t * t).exp() * Complex64::new(t.cos(), t.sin());
        let env = Envelope::from_fn(g, f).unwrap();
        let s = env.interpolant();
        for k in 0..100 {
            let t = -3.0 + 6.0 * (k as f64 + 0.37) / 100.0;
            assert!((s.eval(t) - f(t)).norm() < 1e-8);
        }
        assert_eq!(s.eval(5.0), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn csv_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let env = random_envelope(grid(-3.0, 5.0, 300), &mut rng);
        let text = env.to_csv();
        assert!(text.starts_with("t,re,im\n"));
        let back = Envelope::from_csv(&text).unwrap();
        assert_eq!(back.values(), env.values());
    }
}
