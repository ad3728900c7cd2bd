//! Physical parameters of the driven atomic medium and their reduction to the
//! dimensionless simulation frame.
//!
//! Only the combinations `g_i^2 N / c` enter the propagation. They are fixed
//! from the optical depth and the velocity ratio: `g_2^2 N / c = Γ α / L` and
//! `g_1^2 = g_2^2 / ρ`, so the quantization volume and dipole moments never
//! need to be specified separately.

use std::f64::consts::PI;
use std::fmt;

use crate::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// How the two atom-field couplings are specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coupling {
    /// Ratio of group velocities `v1 / v2` in `(0, 1]`.
    VelocityRatio(f64),
    /// Explicit single-atom couplings `g1`, `g2` in rad/s. Only their ratio is
    /// used; the overall scale is fixed by the optical depth.
    Explicit { g1: f64, g2: f64 },
}

/// SI experimental parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConfig {
    /// Optical wavelength λ (m).
    pub wavelength: f64,
    /// Optical coherence decay rate Γ, shared by both transitions (rad/s).
    pub optical_decay: f64,
    /// Rabi frequency Ω of the classical drive (rad/s).
    pub rabi_drive: f64,
    /// Atomic number density (1/m³).
    pub atom_density: f64,
    /// Medium length L (m).
    pub medium_length: f64,
    /// Input pulse duration T (s).
    pub pulse_duration: f64,
    pub coupling: Coupling,
}

impl PhysicalConfig {
    /// Builds a configuration from optional coupling inputs, rejecting the case
    /// where both or neither of the velocity ratio and explicit couplings are
    /// given.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        wavelength: f64,
        optical_decay: f64,
        rabi_drive: f64,
        atom_density: f64,
        medium_length: f64,
        pulse_duration: f64,
        velocity_ratio: Option<f64>,
        couplings: Option<(f64, f64)>,
    ) -> Result<Self> {
        let coupling = match (velocity_ratio, couplings) {
            (Some(rho), None) => Coupling::VelocityRatio(rho),
            (None, Some((g1, g2))) => Coupling::Explicit { g1, g2 },
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "both velocity_ratio and explicit couplings g1/g2 given; supply exactly one".into(),
                ))
            }
            (None, None) => {
                return Err(Error::Config("neither velocity_ratio nor explicit couplings g1/g2 given".into()))
            }
        };
        let cfg = PhysicalConfig {
            wavelength,
            optical_decay,
            rabi_drive,
            atom_density,
            medium_length,
            pulse_duration,
            coupling,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// The ⁸⁷Rb reference parameters: λ = 0.8 µm, Γ = 2π·3 MHz,
    /// density 10¹² cm⁻³, L = 100 µm, Ω = 10Γ, T = 2 ns, v1/v2 = 0.3.
    pub fn rb87() -> Self {
        let gamma = 2.0 * PI * 3.0e6;
        PhysicalConfig {
            wavelength: 0.8e-6,
            optical_decay: gamma,
            rabi_drive: 10.0 * gamma,
            atom_density: 1.0e18,
            medium_length: 100.0e-6,
            pulse_duration: 2.0e-9,
            coupling: Coupling::VelocityRatio(0.3),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("wavelength", self.wavelength),
            ("optical_decay", self.optical_decay),
            ("rabi_drive", self.rabi_drive),
            ("atom_density", self.atom_density),
            ("medium_length", self.medium_length),
            ("pulse_duration", self.pulse_duration),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive and finite, got {v}")));
            }
        }
        match self.coupling {
            Coupling::VelocityRatio(rho) => {
                if !(rho > 0.0 && rho <= 1.0) {
                    return Err(Error::Config(format!("velocity_ratio must lie in (0, 1], got {rho}")));
                }
            }
            Coupling::Explicit { g1, g2 } => {
                if !(g1.is_finite() && g1 > 0.0 && g2.is_finite() && g2 > 0.0) {
                    return Err(Error::Config(format!("couplings must be positive and finite, got g1={g1}, g2={g2}")));
                }
                if g2 > g1 {
                    return Err(Error::Config(format!(
                        "g2 > g1 gives v1/v2 = {} > 1; channel 1 must be the slower one",
                        (g2 / g1).powi(2)
                    )));
                }
            }
        }
        Ok(())
    }

    /// Group-velocity ratio ρ = v1/v2 = g2²/g1².
    pub fn velocity_ratio(&self) -> f64 {
        match self.coupling {
            Coupling::VelocityRatio(rho) => rho,
            Coupling::Explicit { g1, g2 } => (g2 / g1).powi(2),
        }
    }

    pub fn with_rabi_drive(&self, rabi_drive: f64) -> Self {
        PhysicalConfig { rabi_drive, ..*self }
    }

    pub fn with_medium_length(&self, medium_length: f64) -> Self {
        PhysicalConfig { medium_length, ..*self }
    }

    pub fn with_pulse_duration(&self, pulse_duration: f64) -> Self {
        PhysicalConfig { pulse_duration, ..*self }
    }
}

/// Dimensionless constants of the simulation frame: time in units of `T`,
/// distance in units of `L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimFrame {
    /// ṽ1 = v1 T / L.
    pub v1: f64,
    /// ṽ2 = v2 T / L.
    pub v2: f64,
    /// β̃ = β L.
    pub beta: f64,
    /// Photon-number measure factor m = c T / L.
    pub measure: f64,
}

impl SimFrame {
    pub fn new(v1: f64, v2: f64, beta: f64, measure: f64) -> Self {
        SimFrame { v1, v2, beta, measure }
    }

    /// Inverse-velocity mismatch 1/ṽ1 - 1/ṽ2: the group delay per unit length
    /// between the two channels, in units of `T`.
    pub fn delay_per_length(&self) -> f64 {
        1.0 / self.v1 - 1.0 / self.v2
    }

    /// Converts back to SI `(v1, v2, β, c)` for the given length and duration.
    pub fn to_si(&self, medium_length: f64, pulse_duration: f64) -> (f64, f64, f64, f64) {
        let speed = medium_length / pulse_duration;
        (self.v1 * speed, self.v2 * speed, self.beta / medium_length, self.measure * speed)
    }

    /// The same frame with the two channels exchanged.
    pub fn swapped(&self) -> Self {
        SimFrame { v1: self.v2, v2: self.v1, ..*self }
    }
}

/// Simulation constants derived from a [`PhysicalConfig`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedParams {
    /// Resonant absorption cross-section σ = 3λ²/(4π), m².
    pub cross_section: f64,
    /// Optical depth α = density · σ · L.
    pub optical_depth: f64,
    /// `g_i^2 N / c` for both channels, 1/(m·s).
    pub coupling_density: [f64; 2],
    /// Group velocities v1, v2 (m/s).
    pub group_velocity: [f64; 2],
    /// Parametric coupling β (1/m).
    pub beta: f64,
    /// Field absorption coefficients κ1, κ2 (1/m).
    pub absorption: [f64; 2],
    /// EIT window Ω²/(Γ√α), rad/s.
    pub eit_window: f64,
    pub beta_l: f64,
    pub kappa_l: [f64; 2],
    /// Ω²/Γ².
    pub drive_ratio_sq: f64,
    /// T v_i / L.
    pub transit: [f64; 2],
    pub medium_length: f64,
    pub pulse_duration: f64,
    pub optical_decay: f64,
    pub rabi_drive: f64,
}

impl DerivedParams {
    pub fn frame(&self) -> SimFrame {
        nondimensionalize(self)
    }

    /// κ_i L computed through the order-of-magnitude route Γ²α/Ω² scaled by the
    /// coupling ratio g_i²/g_2².
    pub fn kappa_l_closed_form(&self, channel: usize) -> f64 {
        let ratio = self.coupling_density[channel] / self.coupling_density[1];
        self.optical_depth / self.drive_ratio_sq * ratio
    }
}

pub fn derive_params(cfg: &PhysicalConfig) -> Result<DerivedParams> {
    cfg.validate()?;
    let gamma = cfg.optical_decay;
    let omega = cfg.rabi_drive;
    let len = cfg.medium_length;

    let cross_section = 3.0 * cfg.wavelength * cfg.wavelength / (4.0 * PI);
    let optical_depth = cfg.atom_density * cross_section * len;

    let g2n = gamma * optical_depth / len;
    let g1n = g2n / cfg.velocity_ratio();
    let coupling_density = [g1n, g2n];

    let omega_sq = omega * omega;
    let group_velocity = [omega_sq / g1n, omega_sq / g2n];
    // β = g1 g2 N / (c Ω)
    let beta = (g1n * g2n).sqrt() / omega;
    let absorption = [g1n * gamma / omega_sq, g2n * gamma / omega_sq];
    let eit_window = omega_sq / (gamma * optical_depth.sqrt());
    let transit = [group_velocity[0] * cfg.pulse_duration / len, group_velocity[1] * cfg.pulse_duration / len];

    Ok(DerivedParams {
        cross_section,
        optical_depth,
        coupling_density,
        group_velocity,
        beta,
        absorption,
        eit_window,
        beta_l: beta * len,
        kappa_l: [absorption[0] * len, absorption[1] * len],
        drive_ratio_sq: omega_sq / (gamma * gamma),
        transit,
        medium_length: len,
        pulse_duration: cfg.pulse_duration,
        optical_decay: gamma,
        rabi_drive: omega,
    })
}

pub fn nondimensionalize(p: &DerivedParams) -> SimFrame {
    SimFrame {
        v1: p.transit[0],
        v2: p.transit[1],
        beta: p.beta_l,
        measure: SPEED_OF_LIGHT * p.pulse_duration / p.medium_length,
    }
}

/// Thresholds that turn the "≫" / "≪" conditions into checkable inequalities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeThresholds {
    /// Ω²/Γ² ≥ r_min · α.
    pub r_min: f64,
    /// T v_i / L ≥ s_min / √α.
    pub s_min: f64,
    /// κ_i L ≤ kappa_max.
    pub kappa_max: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        RegimeThresholds { r_min: 5.0, s_min: 2.0, kappa_max: 0.2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constraint {
    /// Ω²/Γ² ≫ α
    StrongDrive,
    /// 1/√α ≪ T v_i / L
    EitWindow { channel: usize },
    /// T v_i / L < 1
    PulseFitsMedium { channel: usize },
    /// κ_i L ≪ 1
    WeakAbsorption { channel: usize },
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::StrongDrive => write!(f, "Ω²/Γ² ≫ α"),
            Constraint::EitWindow { channel } => write!(f, "1/√α ≪ Tv{channel}/L"),
            Constraint::PulseFitsMedium { channel } => write!(f, "Tv{channel}/L < 1"),
            Constraint::WeakAbsorption { channel } => write!(f, "κ{channel}L ≪ 1"),
        }
    }
}

/// A failed regime inequality `lhs <op> rhs` with both sides evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeViolation {
    pub constraint: Constraint,
    pub lhs: f64,
    pub rhs: f64,
}

impl fmt::Display for RegimeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} violated: lhs = {:.6e}, rhs = {:.6e}", self.constraint, self.lhs, self.rhs)
    }
}

/// Lists every regime inequality that fails; an empty list means the
/// parameters sit inside the regime of validity.
pub fn validate_regime(p: &DerivedParams, th: &RegimeThresholds) -> Vec<RegimeViolation> {
    let mut out = Vec::new();
    let alpha = p.optical_depth;

    let rhs = th.r_min * alpha;
    if p.drive_ratio_sq < rhs {
        out.push(RegimeViolation { constraint: Constraint::StrongDrive, lhs: p.drive_ratio_sq, rhs });
    }
    for i in 0..2 {
        let channel = i + 1;
        let lower = th.s_min / alpha.sqrt();
        if p.transit[i] < lower {
            out.push(RegimeViolation { constraint: Constraint::EitWindow { channel }, lhs: p.transit[i], rhs: lower });
        }
        if p.transit[i] >= 1.0 {
            out.push(RegimeViolation {
                constraint: Constraint::PulseFitsMedium { channel },
                lhs: p.transit[i],
                rhs: 1.0,
            });
        }
        if p.kappa_l[i] > th.kappa_max {
            out.push(RegimeViolation {
                constraint: Constraint::WeakAbsorption { channel },
                lhs: p.kappa_l[i],
                rhs: th.kappa_max,
            });
        }
    }
    out
}
