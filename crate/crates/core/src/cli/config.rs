//! Flat `key = value` job configuration.
//!
//! One setting per line, `#` starts a comment. Physical quantities accept an
//! optional unit suffix; a bare number is read in SI units (metres, seconds,
//! rad/s, m⁻³). Unknown keys are rejected so that typos cannot silently fall
//! back to defaults.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt::Write as _;

use crate::medium::{Coupling, PhysicalConfig, RegimeThresholds};
use crate::pulse::format_sig17;
use crate::{Error, Result};

/// What a key's value means and which unit suffixes it accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKind {
    Length,
    Time,
    /// Angular frequency; `Hz`-family suffixes are cycles and get a factor 2π.
    AngularFrequency,
    /// Like [`ValueKind::AngularFrequency`], also accepts `Gamma` (units of
    /// `optical_decay`).
    Drive,
    Density,
    Number,
    Count,
    Flag,
    /// Comma-separated numbers.
    List,
    /// Two comma-separated numbers.
    Pair,
}

#[derive(Debug, Clone, Copy)]
pub struct KeySpec {
    pub name: &'static str,
    pub kind: ValueKind,
    /// Required in every configuration.
    pub required: bool,
    pub doc: &'static str,
}

const fn key(name: &'static str, kind: ValueKind, required: bool, doc: &'static str) -> KeySpec {
    KeySpec { name, kind, required, doc }
}

/// Every accepted key, in canonical order.
pub const KEYS: &[KeySpec] = &[
    key("wavelength", ValueKind::Length, true, "optical wavelength λ"),
    key("optical_decay", ValueKind::AngularFrequency, true, "optical decay rate Γ of both transitions"),
    key("rabi_drive", ValueKind::Drive, true, "Rabi frequency Ω of the drive"),
    key("atom_density", ValueKind::Density, true, "atomic number density"),
    key("medium_length", ValueKind::Length, true, "medium length L"),
    key("pulse_duration", ValueKind::Time, true, "input pulse duration T"),
    key("velocity_ratio", ValueKind::Number, false, "v1/v2 in (0, 1]; give this or coupling_g1 + coupling_g2"),
    key("coupling_g1", ValueKind::AngularFrequency, false, "single-atom coupling g1 (only g2/g1 is used)"),
    key("coupling_g2", ValueKind::AngularFrequency, false, "single-atom coupling g2"),
    key(
        "coupling_scale",
        ValueKind::Number,
        false,
        "multiplier on β (0 switches the parametric coupling off); default 1",
    ),
    key("t_min", ValueKind::Number, false, "grid start in units of T; default -time_margin"),
    key("t_max", ValueKind::Number, false, "grid end in units of T; default slow arrival + time_margin"),
    key("n_points", ValueKind::Count, false, "grid points; default from time_step"),
    key("time_step", ValueKind::Number, false, "grid spacing in units of T when n_points is absent; default 0.01"),
    key("time_margin", ValueKind::Number, false, "padding around the pulse in units of T; default 6"),
    key("quad_nodes", ValueKind::Count, false, "Gauss-Legendre nodes of the kernel integrals (≥ 64); default 256"),
    key("z_checkpoints", ValueKind::List, false, "distances in units of L written by `propagate`; default 1"),
    key(
        "oracle_steps",
        ValueKind::Count,
        false,
        "if set, `propagate` also runs the direct integrator with this many steps per L",
    ),
    key("bell_r1", ValueKind::Number, false, "fast-bin amplitude for `bell`; default 1/√2"),
    key("bell_j_max", ValueKind::Number, false, "upper end of the J = α² scan; default 3"),
    key("bell_j_points", ValueKind::Count, false, "points in the J scan; default 3001"),
    key("calibrate_target_r1", ValueKind::Number, false, "target r1 for `calibrate` (required by that job)"),
    key("calibrate_bracket", ValueKind::Pair, false, "Ω range in units of Γ for `calibrate`; default 5, 20"),
    key("calibrate_scan_points", ValueKind::Count, false, "scan points across the bracket; default 16"),
    key("scan_z_max", ValueKind::Number, false, "end of the `scan-z` range in units of L; default 1"),
    key("scan_z_points", ValueKind::Count, false, "points in the `scan-z` range; default 101"),
    key(
        "orthogonality_points",
        ValueKind::Count,
        false,
        "distances sampled for the spatial overlap in `modes`; default 21",
    ),
    key("regime_r_min", ValueKind::Number, false, "Ω²/Γ² ≥ r_min·α; default 5"),
    key("regime_s_min", ValueKind::Number, false, "Tv_i/L ≥ s_min/√α; default 2"),
    key("regime_kappa_max", ValueKind::Number, false, "κ_i L ≤ kappa_max; default 0.2"),
    key("regime_strict", ValueKind::Flag, false, "fail (exit 2) on regime violations; default true"),
];

fn spec(name: &str) -> Option<&'static KeySpec> {
    KEYS.iter().find(|k| k.name == name)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum JobKind {
    Derive,
    Propagate,
    ScanZ,
    Modes,
    Bell,
    Calibrate,
}

impl JobKind {
    pub const ALL: [JobKind; 6] =
        [JobKind::Derive, JobKind::Propagate, JobKind::ScanZ, JobKind::Modes, JobKind::Bell, JobKind::Calibrate];

    pub fn as_str(self) -> &'static str {
        match self {
            JobKind::Derive => "derive",
            JobKind::Propagate => "propagate",
            JobKind::ScanZ => "scan-z",
            JobKind::Modes => "modes",
            JobKind::Bell => "bell",
            JobKind::Calibrate => "calibrate",
        }
    }
}

impl std::str::FromStr for JobKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        JobKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown job kind `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSettings {
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
    pub n_points: Option<usize>,
}

/// A fully typed job configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct JobConfig {
    pub physical: PhysicalConfig,
    pub coupling_scale: f64,
    pub grid: GridSettings,
    pub time_step: f64,
    pub time_margin: f64,
    pub quad_nodes: usize,
    pub z_checkpoints: Vec<f64>,
    pub oracle_steps: Option<usize>,
    pub bell_r1: f64,
    pub bell_j_max: f64,
    pub bell_j_points: usize,
    pub calibrate_target_r1: Option<f64>,
    pub calibrate_bracket: (f64, f64),
    pub calibrate_scan_points: usize,
    pub scan_z_max: f64,
    pub scan_z_points: usize,
    pub orthogonality_points: usize,
    pub regime: RegimeThresholds,
    pub regime_strict: bool,
}

/// Multiplier for a unit suffix of the given kind, or `None` if the suffix is
/// not accepted there.
fn unit_factor(kind: ValueKind, unit: &str) -> Option<f64> {
    let two_pi = 2.0 * PI;
    let f = match (kind, unit) {
        (_, "") => 1.0,
        (ValueKind::Length, "m") => 1.0,
        (ValueKind::Length, "cm") => 1e-2,
        (ValueKind::Length, "mm") => 1e-3,
        (ValueKind::Length, "um" | "µm") => 1e-6,
        (ValueKind::Length, "nm") => 1e-9,
        (ValueKind::Time, "s") => 1.0,
        (ValueKind::Time, "ms") => 1e-3,
        (ValueKind::Time, "us" | "µs") => 1e-6,
        (ValueKind::Time, "ns") => 1e-9,
        (ValueKind::Time, "ps") => 1e-12,
        (ValueKind::AngularFrequency | ValueKind::Drive, "rad/s") => 1.0,
        (ValueKind::AngularFrequency | ValueKind::Drive, "Hz") => two_pi,
        (ValueKind::AngularFrequency | ValueKind::Drive, "kHz") => two_pi * 1e3,
        (ValueKind::AngularFrequency | ValueKind::Drive, "MHz") => two_pi * 1e6,
        (ValueKind::AngularFrequency | ValueKind::Drive, "GHz") => two_pi * 1e9,
        (ValueKind::Density, "m^-3") => 1.0,
        (ValueKind::Density, "cm^-3") => 1e6,
        _ => return None,
    };
    Some(f)
}

fn accepted_units(kind: ValueKind) -> &'static str {
    match kind {
        ValueKind::Length => "m, cm, mm, um, nm",
        ValueKind::Time => "s, ms, us, ns, ps",
        ValueKind::AngularFrequency => "rad/s, Hz, kHz, MHz, GHz (cycles, multiplied by 2π)",
        ValueKind::Drive => "rad/s, Hz, kHz, MHz, GHz, Gamma",
        ValueKind::Density => "m^-3, cm^-3",
        _ => "none",
    }
}

/// A scalar value as written: number and unit suffix.
fn split_quantity(raw: &str) -> (&str, &str) {
    let raw = raw.trim();
    match raw.find(char::is_whitespace) {
        Some(i) => (raw[..i].trim(), raw[i..].trim()),
        None => (raw, ""),
    }
}

fn parse_number(text: &str) -> std::result::Result<f64, String> {
    let v: f64 = text.parse().map_err(|_| format!("`{text}` is not a number"))?;
    if !v.is_finite() {
        return Err(format!("`{text}` is not finite"));
    }
    Ok(v)
}

/// Parsed but not yet interpreted value of one key.
#[derive(Debug, Clone, PartialEq)]
enum Value {
    Scalar(f64),
    /// A drive given in units of Γ.
    InGamma(f64),
    Count(usize),
    Flag(bool),
    List(Vec<f64>),
}

fn parse_value(kind: ValueKind, raw: &str) -> std::result::Result<Value, String> {
    match kind {
        ValueKind::Count => {
            let n: usize = raw.trim().parse().map_err(|_| format!("`{}` is not a non-negative integer", raw.trim()))?;
            Ok(Value::Count(n))
        }
        ValueKind::Flag => match raw.trim() {
            "true" => Ok(Value::Flag(true)),
            "false" => Ok(Value::Flag(false)),
            other => Err(format!("`{other}` is not `true` or `false`")),
        },
        ValueKind::List | ValueKind::Pair => {
            let items =
                raw.split(',').map(|s| parse_number(s.trim())).collect::<std::result::Result<Vec<f64>, String>>()?;
            if kind == ValueKind::Pair && items.len() != 2 {
                return Err(format!("expected two comma-separated numbers, got {}", items.len()));
            }
            if items.is_empty() {
                return Err("empty list".into());
            }
            Ok(Value::List(items))
        }
        _ => {
            let (number, unit) = split_quantity(raw);
            let v = parse_number(number)?;
            if kind == ValueKind::Drive && unit == "Gamma" {
                return Ok(Value::InGamma(v));
            }
            match unit_factor(kind, unit) {
                Some(f) => Ok(Value::Scalar(v * f)),
                None => Err(format!("unit `{unit}` not accepted here (accepted: {})", accepted_units(kind))),
            }
        }
    }
}

/// Raw `key = value` entries with their line numbers.
#[derive(Debug)]
struct Entry {
    line: usize,
    value: Value,
}

impl JobConfig {
    /// Parses configuration text. All problems found are reported together,
    /// each with its line number.
    pub fn parse(text: &str) -> Result<JobConfig> {
        let mut errors = Vec::new();
        let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
        let mut entries: BTreeMap<&'static str, Entry> = BTreeMap::new();

        for (idx, raw_line) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw_line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((k, v)) = content.split_once('=') else {
                errors.push(format!("line {line}: expected `key = value`, got `{content}`"));
                continue;
            };
            let (k, v) = (k.trim(), v.trim());
            let Some(spec) = spec(k) else {
                errors.push(format!("line {line}: unknown key `{k}`"));
                continue;
            };
            if let Some(first) = seen.insert(spec.name, line) {
                errors.push(format!("line {line}: duplicate key `{k}` (first set on line {first})"));
                continue;
            }
            if v.is_empty() {
                errors.push(format!("line {line}: `{k}` has no value"));
                continue;
            }
            match parse_value(spec.kind, v) {
                Ok(value) => {
                    entries.insert(spec.name, Entry { line, value });
                }
                Err(msg) => errors.push(format!("line {line}: `{k}`: {msg}")),
            }
        }

        let missing: Vec<&str> =
            KEYS.iter().filter(|k| k.required && !seen.contains_key(k.name)).map(|k| k.name).collect();
        if !missing.is_empty() {
            errors.push(format!("missing required keys: {}", missing.join(", ")));
        }
        let has_ratio = seen.contains_key("velocity_ratio");
        let has_g = (seen.contains_key("coupling_g1"), seen.contains_key("coupling_g2"));
        match (has_ratio, has_g) {
            (true, (false, false)) | (false, (true, true)) => {}
            (true, _) => errors.push(format!(
                "line {}: velocity_ratio conflicts with explicit couplings; give exactly one of them",
                seen["velocity_ratio"]
            )),
            (false, (false, false)) => {
                errors.push("missing coupling: give velocity_ratio or both coupling_g1 and coupling_g2".into())
            }
            (false, _) => errors.push("explicit couplings need both coupling_g1 and coupling_g2".into()),
        }
        if !errors.is_empty() {
            return Err(Error::Config(errors.join("\n")));
        }

        let scalar = |name: &str| -> Option<(f64, usize)> {
            entries.get(name).and_then(|e| match e.value {
                Value::Scalar(v) => Some((v, e.line)),
                _ => None,
            })
        };
        let count = |name: &str| -> Option<usize> {
            entries.get(name).and_then(|e| match e.value {
                Value::Count(v) => Some(v),
                _ => None,
            })
        };
        let list = |name: &str| -> Option<Vec<f64>> {
            entries.get(name).and_then(|e| match &e.value {
                Value::List(v) => Some(v.clone()),
                _ => None,
            })
        };
        let req = |name: &str| scalar(name).map(|s| s.0).unwrap_or(f64::NAN);

        let optical_decay = req("optical_decay");
        let rabi_drive = match entries.get("rabi_drive").map(|e| &e.value) {
            Some(Value::InGamma(x)) => x * optical_decay,
            _ => req("rabi_drive"),
        };
        let couplings = match (scalar("coupling_g1"), scalar("coupling_g2")) {
            (Some(a), Some(b)) => Some((a.0, b.0)),
            _ => None,
        };
        let physical = PhysicalConfig::from_parts(
            req("wavelength"),
            optical_decay,
            rabi_drive,
            req("atom_density"),
            req("medium_length"),
            req("pulse_duration"),
            scalar("velocity_ratio").map(|s| s.0),
            couplings,
        )?;

        let bracket = list("calibrate_bracket").map(|v| (v[0], v[1])).unwrap_or((5.0, 20.0));
        let defaults = RegimeThresholds::default();
        let cfg = JobConfig {
            physical,
            coupling_scale: scalar("coupling_scale").map_or(1.0, |s| s.0),
            grid: GridSettings {
                t_min: scalar("t_min").map(|s| s.0),
                t_max: scalar("t_max").map(|s| s.0),
                n_points: count("n_points"),
            },
            time_step: scalar("time_step").map_or(0.01, |s| s.0),
            time_margin: scalar("time_margin").map_or(6.0, |s| s.0),
            quad_nodes: count("quad_nodes").unwrap_or(256),
            z_checkpoints: list("z_checkpoints").unwrap_or_else(|| vec![1.0]),
            oracle_steps: count("oracle_steps"),
            bell_r1: scalar("bell_r1").map_or(FRAC_1_SQRT_2, |s| s.0),
            bell_j_max: scalar("bell_j_max").map_or(3.0, |s| s.0),
            bell_j_points: count("bell_j_points").unwrap_or(3001),
            calibrate_target_r1: scalar("calibrate_target_r1").map(|s| s.0),
            calibrate_bracket: bracket,
            calibrate_scan_points: count("calibrate_scan_points").unwrap_or(16),
            scan_z_max: scalar("scan_z_max").map_or(1.0, |s| s.0),
            scan_z_points: count("scan_z_points").unwrap_or(101),
            orthogonality_points: count("orthogonality_points").unwrap_or(21),
            regime: RegimeThresholds {
                r_min: scalar("regime_r_min").map_or(defaults.r_min, |s| s.0),
                s_min: scalar("regime_s_min").map_or(defaults.s_min, |s| s.0),
                kappa_max: scalar("regime_kappa_max").map_or(defaults.kappa_max, |s| s.0),
            },
            regime_strict: entries.get("regime_strict").map(|e| matches!(e.value, Value::Flag(true))).unwrap_or(true),
        };
        cfg.check_ranges(&|name| entries.get(name).map(|e| e.line))?;
        Ok(cfg)
    }

    fn check_ranges(&self, line_of: &dyn Fn(&str) -> Option<usize>) -> Result<()> {
        let mut errors = Vec::new();
        let mut bad = |name: &str, msg: String| {
            let at = line_of(name).map(|l| format!("line {l}: ")).unwrap_or_default();
            errors.push(format!("{at}`{name}` {msg}"));
        };
        if !(self.coupling_scale >= 0.0) {
            bad("coupling_scale", format!("must be ≥ 0, got {}", self.coupling_scale));
        }
        if !(self.time_step > 0.0) {
            bad("time_step", format!("must be positive, got {}", self.time_step));
        }
        if !(self.time_margin > 0.0) {
            bad("time_margin", format!("must be positive, got {}", self.time_margin));
        }
        if let (Some(a), Some(b)) = (self.grid.t_min, self.grid.t_max) {
            if !(b > a) {
                bad("t_max", format!("must exceed t_min ({a}), got {b}"));
            }
        }
        if self.quad_nodes < 64 {
            bad("quad_nodes", format!("must be at least 64, got {}", self.quad_nodes));
        }
        if self.z_checkpoints.iter().any(|z| *z < 0.0) || self.z_checkpoints.windows(2).any(|w| w[1] <= w[0]) {
            bad("z_checkpoints", "must be non-negative and strictly ascending".into());
        }
        if !(0.0..=1.0).contains(&self.bell_r1) {
            bad("bell_r1", format!("must lie in [0, 1], got {}", self.bell_r1));
        }
        if !(self.bell_j_max > 0.0) || self.bell_j_points < 2 {
            bad("bell_j_points", "J scan needs j_max > 0 and at least 2 points".into());
        }
        if let Some(t) = self.calibrate_target_r1 {
            if !(t > 0.0 && t < 1.0) {
                bad("calibrate_target_r1", format!("must lie in (0, 1), got {t}"));
            }
        }
        let (lo, hi) = self.calibrate_bracket;
        if !(lo > 0.0 && hi > lo) {
            bad("calibrate_bracket", format!("needs 0 < lo < hi, got {lo}, {hi}"));
        }
        if !(self.scan_z_max > 0.0) || self.scan_z_points < 3 {
            bad("scan_z_points", "z scan needs scan_z_max > 0 and at least 3 points".into());
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errors.join("\n")))
        }
    }

    /// Canonical text form: every setting in SI units with 17 significant
    /// digits. [`JobConfig::parse`] reads it back to an equal configuration.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.canonical_entries() {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    /// `(key, value)` pairs of the canonical form, in [`KEYS`] order.
    pub fn canonical_entries(&self) -> Vec<(&'static str, String)> {
        let f = format_sig17;
        let p = &self.physical;
        let mut v: Vec<(&'static str, String)> = vec![
            ("wavelength", f(p.wavelength)),
            ("optical_decay", f(p.optical_decay)),
            ("rabi_drive", f(p.rabi_drive)),
            ("atom_density", f(p.atom_density)),
            ("medium_length", f(p.medium_length)),
            ("pulse_duration", f(p.pulse_duration)),
        ];
        match p.coupling {
            Coupling::VelocityRatio(rho) => v.push(("velocity_ratio", f(rho))),
            Coupling::Explicit { g1, g2 } => {
                v.push(("coupling_g1", f(g1)));
                v.push(("coupling_g2", f(g2)));
            }
        }
        v.push(("coupling_scale", f(self.coupling_scale)));
        if let Some(t) = self.grid.t_min {
            v.push(("t_min", f(t)));
        }
        if let Some(t) = self.grid.t_max {
            v.push(("t_max", f(t)));
        }
        if let Some(n) = self.grid.n_points {
            v.push(("n_points", n.to_string()));
        }
        v.push(("time_step", f(self.time_step)));
        v.push(("time_margin", f(self.time_margin)));
        v.push(("quad_nodes", self.quad_nodes.to_string()));
        v.push(("z_checkpoints", self.z_checkpoints.iter().map(|z| f(*z)).collect::<Vec<_>>().join(", ")));
        if let Some(n) = self.oracle_steps {
            v.push(("oracle_steps", n.to_string()));
        }
        v.push(("bell_r1", f(self.bell_r1)));
        v.push(("bell_j_max", f(self.bell_j_max)));
        v.push(("bell_j_points", self.bell_j_points.to_string()));
        if let Some(t) = self.calibrate_target_r1 {
            v.push(("calibrate_target_r1", f(t)));
        }
        v.push(("calibrate_bracket", format!("{}, {}", f(self.calibrate_bracket.0), f(self.calibrate_bracket.1))));
        v.push(("calibrate_scan_points", self.calibrate_scan_points.to_string()));
        v.push(("scan_z_max", f(self.scan_z_max)));
        v.push(("scan_z_points", self.scan_z_points.to_string()));
        v.push(("orthogonality_points", self.orthogonality_points.to_string()));
        v.push(("regime_r_min", f(self.regime.r_min)));
        v.push(("regime_s_min", f(self.regime.s_min)));
        v.push(("regime_kappa_max", f(self.regime.kappa_max)));
        v.push(("regime_strict", self.regime_strict.to_string()));
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const RB: &str = "\
wavelength = 0.8 um
optical_decay = 3 MHz
rabi_drive = 10 Gamma   # Ω = 10Γ
atom_density = 1e12 cm^-3
medium_length = 100 um
pulse_duration = 2 ns
velocity_ratio = 0.3
";

    #[test]
    fn parses_units() {
        let c = JobConfig::parse(RB).unwrap();
        let (p, rb) = (c.physical, PhysicalConfig::rb87());
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-15 * b.abs();
        assert!(close(p.wavelength, rb.wavelength) && close(p.optical_decay, rb.optical_decay));
        assert!(close(p.rabi_drive, rb.rabi_drive) && close(p.atom_density, rb.atom_density));
        assert!(close(p.medium_length, rb.medium_length) && close(p.pulse_duration, rb.pulse_duration));
        assert_eq!(p.coupling, rb.coupling);
        assert_eq!(c.z_checkpoints, vec![1.0]);
        assert!(c.regime_strict);
    }

    #[test]
    fn canonical_text_round_trips() {
        let mut text = RB.to_string();
        text.push_str(
            "oracle_steps = 400\nz_checkpoints = 0.25, 0.5, 1\ncalibrate_target_r1 = 0.7\nregime_strict = false\n",
        );
        let c = JobConfig::parse(&text).unwrap();
        let again = JobConfig::parse(&c.to_text()).unwrap();
        assert_eq!(c, again);
        assert_eq!(again.to_text(), c.to_text());
    }

    #[test]
    fn empty_file_lists_every_missing_key() {
        let msg = JobConfig::parse("").unwrap_err().to_string();
        for k in KEYS.iter().filter(|k| k.required) {
            assert!(msg.contains(k.name), "{msg}");
        }
        assert!(msg.contains("velocity_ratio"));
    }

    #[test]
    fn duplicate_names_both_lines() {
        let text = format!("{RB}# again\nwavelength = 1 um\n");
        let msg = JobConfig::parse(&text).unwrap_err().to_string();
        assert!(msg.contains("line 9") && msg.contains("line 1") && msg.contains("wavelength"), "{msg}");
    }

    #[test]
    fn unknown_key_and_bad_unit_carry_line_numbers() {
        let text = format!("{RB}wavelenght = 1\n");
        let msg = JobConfig::parse(&text).unwrap_err().to_string();
        assert!(msg.contains("line 8") && msg.contains("wavelenght"), "{msg}");
        let text = RB.replace("100 um", "100 furlongs");
        let msg = JobConfig::parse(&text).unwrap_err().to_string();
        assert!(msg.contains("line 5") && msg.contains("furlongs"), "{msg}");
        let text = RB.replace("0.3", "zero point three");
        assert!(JobConfig::parse(&text).unwrap_err().to_string().contains("line 7"));
    }

    #[test]
    fn coupling_modes_are_exclusive() {
        let both = format!("{RB}coupling_g1 = 1\ncoupling_g2 = 0.5\n");
        assert!(matches!(JobConfig::parse(&both), Err(Error::Config(_))));
        let explicit = RB.replace("velocity_ratio = 0.3", "coupling_g1 = 2 MHz\ncoupling_g2 = 1 MHz");
        let c = JobConfig::parse(&explicit).unwrap();
        assert!((c.physical.velocity_ratio() - 0.25).abs() < 1e-15);
        let half = RB.replace("velocity_ratio = 0.3", "coupling_g1 = 2 MHz");
        assert!(JobConfig::parse(&half).is_err());
    }

    #[test]
    fn range_checks() {
        for extra in [
            "quad_nodes = 32",
            "bell_r1 = 1.5",
            "z_checkpoints = 1, 0.5",
            "calibrate_bracket = 20, 5",
            "regime_strict = maybe",
        ] {
            let text = format!("{RB}{extra}\n");
            assert!(JobConfig::parse(&text).is_err(), "{extra}");
        }
    }

    #[test]
    fn job_kinds_parse() {
        for k in JobKind::ALL {
            assert_eq!(k.as_str().parse::<JobKind>().unwrap(), k);
        }
        assert!("scan_z".parse::<JobKind>().is_err());
    }
}
