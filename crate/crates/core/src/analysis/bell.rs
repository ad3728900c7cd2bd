//! Entanglement entropy, two-mode Wigner function and the
//! Banaszek-Wodkiewicz combination for the time-bin state
//! `r1 |1,0⟩ + r2 |0,1⟩`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::{Error, Result};

/// Tolerance on `r1² + r2² = 1` accepted by [`wigner`].
pub const NORMALIZATION_TOL: f64 = 1e-9;

fn check_r1(r1: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&r1) {
        return Err(Error::Domain(format!("amplitude r1 must lie in [0, 1], got {r1}")));
    }
    Ok(())
}

/// `p log2 p` with the convention `0 log 0 = 0`.
fn plogp(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        p * p.log2()
    }
}

/// Von Neumann entropy (bits) of either mode of `r1|1,0⟩ + r2|0,1⟩`.
pub fn entanglement_entropy(r1: f64) -> Result<f64> {
    check_r1(r1)?;
    let p = r1 * r1;
    // `0.0 - x` keeps the endpoints at +0 rather than -0
    Ok(0.0 - (plogp(p) + plogp(1.0 - p)))
}

/// Two-mode Wigner function of the state with amplitudes `(r1, r2)`:
/// `(4/π²) [4|r1 α1 + r2 α2|² - 1] exp(-2|α1|² - 2|α2|²)`.
pub fn wigner(alpha1: Complex64, alpha2: Complex64, r1: f64, r2: f64) -> Result<f64> {
    if (r1 * r1 + r2 * r2 - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::Domain(format!("amplitudes are not normalised: r1² + r2² = {}", r1 * r1 + r2 * r2)));
    }
    let overlap = (alpha1 * r1 + alpha2 * r2).norm_sqr();
    let gauss = (-2.0 * alpha1.norm_sqr() - 2.0 * alpha2.norm_sqr()).exp();
    Ok(4.0 / (PI * PI) * (4.0 * overlap - 1.0) * gauss)
}

/// `B = (π²/4) [W(0,0) + W(α1,0) + W(0,α2) - W(α1,α2)]` with `r2 = √(1 - r1²)`.
pub fn bell_combination(alpha1: Complex64, alpha2: Complex64, r1: f64) -> Result<f64> {
    check_r1(r1)?;
    let r2 = (1.0 - r1 * r1).sqrt();
    let zero = Complex64::new(0.0, 0.0);
    let w = |a, b| wigner(a, b, r1, r2);
    let sum = w(zero, zero)? + w(alpha1, zero)? + w(zero, alpha2)? - w(alpha1, alpha2)?;
    Ok(PI * PI / 4.0 * sum)
}

/// Closed form of [`bell_combination`] for `α1 = α2 = √J` real:
/// `-1 + (4J - 2) e^{-2J} - [4J (r1 + r2)² - 1] e^{-4J}`.
pub fn bell_diagonal(j: f64, r1: f64) -> Result<f64> {
    check_r1(r1)?;
    if !(j >= 0.0 && j.is_finite()) {
        return Err(Error::Domain(format!("J = α² must be finite and ≥ 0, got {j}")));
    }
    let s = r1 + (1.0 - r1 * r1).sqrt();
    Ok(-1.0 + (4.0 * j - 2.0) * (-2.0 * j).exp() - (4.0 * j * s * s - 1.0) * (-4.0 * j).exp())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BellScanResult {
    pub r1: f64,
    pub j: Vec<f64>,
    pub b: Vec<f64>,
    /// Location of the most negative `B`, refined between grid points.
    pub j_opt: f64,
    pub b_opt: f64,
}

impl BellScanResult {
    /// `|B|` at the extremum.
    pub fn max_violation(&self) -> f64 {
        self.b_opt.abs()
    }

    pub fn to_csv(&self) -> String {
        use crate::pulse::format_sig17 as f;
        let mut out = String::from("J,B\n");
        for (j, b) in self.j.iter().zip(&self.b) {
            out.push_str(&format!("{},{}\n", f(*j), f(*b)));
        }
        out
    }
}

/// Uniform grid of `n` values on `[0, j_max]`.
pub fn j_grid(j_max: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n).map(|k| j_max * k as f64 / (n - 1) as f64).collect()
}

/// Evaluates `B(J)` on `j_grid` and locates its minimum, refined by
/// golden-section search around the best grid point.
pub fn bell_scan(r1: f64, j_grid: &[f64]) -> Result<BellScanResult> {
    check_r1(r1)?;
    if j_grid.is_empty() {
        return Err(Error::Domain("empty J grid".into()));
    }
    let b = j_grid.par_iter().map(|&j| bell_diagonal(j, r1)).collect::<Result<Vec<f64>>>()?;
    let k = (0..b.len()).fold(0, |best, i| if b[i] < b[best] { i } else { best });
    let lo = j_grid[k.saturating_sub(1)];
    let hi = j_grid[(k + 1).min(j_grid.len() - 1)];
    let (mut j_opt, mut b_opt) = (j_grid[k], b[k]);
    if hi > lo {
        let f = |j: f64| bell_diagonal(j, r1).unwrap_or(f64::INFINITY);
        let j = golden_min(f, lo, hi, 1e-12);
        if f(j) < b_opt {
            j_opt = j;
            b_opt = f(j);
        }
    }
    Ok(BellScanResult { r1, j: j_grid.to_vec(), b, j_opt, b_opt })
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn entropy_values() {
        assert_eq!(entanglement_entropy(FRAC_1_SQRT_2).unwrap(), 1.0);
        assert_eq!(entanglement_entropy(0.0).unwrap(), 0.0);
        assert_eq!(entanglement_entropy(1.0).unwrap(), 0.0);
        // -(0.16 log2 0.16 + 0.84 log2 0.84)
        assert!((entanglement_entropy(0.4).unwrap() - 0.634_309_554_640_566).abs() < 1e-12);
        assert!(entanglement_entropy(1.01).is_err());
        assert!(entanglement_entropy(-0.1).is_err());
    }

    #[test]
    fn entropy_symmetric_and_peaked() {
        let grid: Vec<f64> = (0..=100).map(|k| k as f64 / 100.0).collect();
        for &r in &grid {
            let partner = (1.0 - r * r).sqrt();
            let (a, b) = (entanglement_entropy(r).unwrap(), entanglement_entropy(partner).unwrap());
            assert!((a - b).abs() < 1e-12, "r = {r}");
        }
        // increasing up to 1/√2, decreasing after
        let e: Vec<f64> = grid.iter().map(|&r| entanglement_entropy(r).unwrap()).collect();
        for k in 1..=70 {
            assert!(e[k] > e[k - 1]);
        }
        for k in 72..=100 {
            assert!(e[k] < e[k - 1]);
        }
    }

    #[test]
    fn wigner_at_origin_is_negative() {
        for k in 0..100 {
            let r1 = k as f64 / 99.0;
            let r2 = (1.0 - r1 * r1).sqrt();
            let w = wigner(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), r1, r2).unwrap();
            assert!((w + 4.0 / (PI * PI)).abs() < 1e-12);
        }
    }

    #[test]
    fn wigner_reference_point() {
        let w = wigner(Complex64::new(0.3, 0.0), Complex64::new(0.0, 0.0), FRAC_1_SQRT_2, FRAC_1_SQRT_2).unwrap();
        // (4/π²)(4·0.045 - 1) e^{-0.18}
        assert!((w + 0.277_588_258_058_912_6).abs() < 1e-12, "{w}");
        let far = wigner(Complex64::new(6.0, 0.0), Complex64::new(0.0, 6.0), 0.6, 0.8).unwrap();
        assert!(far.abs() < 1e-30);
        assert!(wigner(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), 0.6, 0.6).is_err());
    }

    #[test]
    fn combination_reduces_to_diagonal_form() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let j: f64 = rng.gen_range(0.0..3.0);
            let r1: f64 = rng.gen_range(0.0..1.0);
            let a = Complex64::new(j.sqrt(), 0.0);
            let full = bell_combination(a, a, r1).unwrap();
            assert!((full - bell_diagonal(j, r1).unwrap()).abs() < 1e-12);
        }
        assert!(
            (bell_combination(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), 0.3).unwrap() + 2.0).abs() < 1e-12
        );
    }

    #[test]
    fn diagonal_limits() {
        for r1 in [0.0, 0.4, FRAC_1_SQRT_2, 0.9, 1.0] {
            assert!((bell_diagonal(0.0, r1).unwrap() + 2.0).abs() < 1e-15);
            assert!((bell_diagonal(40.0, r1).unwrap() + 1.0).abs() < 1e-12);
        }
        assert!(bell_diagonal(-0.1, 0.5).is_err());
    }

    #[test]
    fn maximal_violation_for_balanced_state() {
        let grid = j_grid(3.0, 3001);
        let mid = bell_scan(FRAC_1_SQRT_2, &grid).unwrap();
        assert!(mid.b_opt < -2.0 && mid.b_opt > -2.2);
        assert!((0.08..=0.12).contains(&mid.j_opt), "{}", mid.j_opt);
        for r1 in [0.4, 0.9] {
            let other = bell_scan(r1, &grid).unwrap();
            assert!(other.max_violation() < mid.max_violation());
            assert!((other.b[0] + 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn golden_section_finds_parabola_vertex() {
        let x = golden_min(|x| (x - 0.37).powi(2), 0.0, 1.0, 1e-12);
        assert!((x - 0.37).abs() < 1e-9);
    }
}
