//! Job orchestration: derive the frame, run the requested computation and
//! write CSV tables plus `summary.txt` into the output directory.

use std::fs;
use std::path::{Path, PathBuf};

use crate::analysis::{
    bell, bell_scan, calibrate_omega, check_orthogonality, entanglement_entropy, scan, scan_z, split_modes,
    CalibrationOptions, OrthogonalityOptions, PropagationOptions, SplitOptions,
};
use crate::kernel::{propagate_pair, state_at, KernelQuadrature};
use crate::medium::{derive_params, validate_regime, DerivedParams, PhysicalConfig, SimFrame};
use crate::oracle::{integrate, IntegratorConfig};
use crate::pulse::{format_sig17, gaussian_envelope, Envelope, TimeGrid};
use crate::{Error, Result};

use super::config::{JobConfig, JobKind};
use super::summary::{config_hash, envelope_csv, Summary};

/// Relative L2 gap between kernel and direct integration above which a
/// `propagate` run is flagged.
pub const ORACLE_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// Completed, but a numerical self-check exceeded its tolerance.
    FailedCheck,
}

impl Status {
    fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::FailedCheck => "failed-check",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub status: Status,
    pub summary: Summary,
    /// Files written, relative to the output directory, in write order.
    pub files: Vec<String>,
    pub warnings: Vec<String>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Ok => 0,
            Status::FailedCheck => 3,
        }
    }
}

/// Exit status for a failed run: 3 for numerical self-check failures, 2 for
/// everything else (configuration, regime, domain, calibration, I/O).
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Numerical(_) => 3,
        _ => 2,
    }
}

struct Job<'a> {
    cfg: &'a JobConfig,
    out_dir: &'a Path,
    summary: Summary,
    files: Vec<String>,
    warnings: Vec<String>,
    status: Status,
}

impl Job<'_> {
    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        fs::write(self.out_dir.join(name), contents)?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn warn(&mut self, msg: String) {
        self.warnings.push(msg);
    }

    fn quad(&self) -> KernelQuadrature {
        KernelQuadrature { n_nodes: self.cfg.quad_nodes, ..Default::default() }
    }

    fn propagation(&self) -> PropagationOptions {
        PropagationOptions {
            dt: self.cfg.time_step,
            margin: self.cfg.time_margin,
            quad: self.quad(),
            split: SplitOptions::default(),
        }
    }
}

/// Simulation frame of a physical configuration, with the coupling scaled.
pub fn frame_for(cfg: &JobConfig, params: &DerivedParams) -> SimFrame {
    let mut frame = params.frame();
    frame.beta *= cfg.coupling_scale;
    frame
}

/// Time grid for propagation to `z_max` (units of `L`), honouring explicit
/// grid settings.
pub fn grid_for(cfg: &JobConfig, frame: &SimFrame, z_max: f64) -> Result<TimeGrid> {
    let slowest = frame.v1.min(frame.v2);
    let t_min = cfg.grid.t_min.unwrap_or(-cfg.time_margin);
    let t_max = cfg.grid.t_max.unwrap_or(z_max / slowest + cfg.time_margin);
    match cfg.grid.n_points {
        Some(n) => TimeGrid::new(t_min, t_max, n),
        None => TimeGrid::with_spacing(t_min, t_max, cfg.time_step),
    }
}

fn echo_physical(s: &mut Summary, p: &DerivedParams, frame: &SimFrame) {
    s.num("derived.cross_section_m2", p.cross_section);
    s.num("derived.optical_depth", p.optical_depth);
    s.num("derived.v1_m_per_s", p.group_velocity[0]);
    s.num("derived.v2_m_per_s", p.group_velocity[1]);
    s.num("derived.beta_per_m", p.beta);
    s.num("derived.kappa1_per_m", p.absorption[0]);
    s.num("derived.kappa2_per_m", p.absorption[1]);
    s.num("derived.eit_window_rad_per_s", p.eit_window);
    s.num("derived.beta_l", p.beta_l);
    s.num("derived.kappa1_l", p.kappa_l[0]);
    s.num("derived.kappa2_l", p.kappa_l[1]);
    s.num("derived.drive_ratio_sq", p.drive_ratio_sq);
    s.num("derived.transit1", p.transit[0]);
    s.num("derived.transit2", p.transit[1]);
    s.num("frame.v1", frame.v1);
    s.num("frame.v2", frame.v2);
    s.num("frame.beta", frame.beta);
    s.num("frame.measure", frame.measure);
}

fn echo_grid(s: &mut Summary, g: &TimeGrid) {
    s.num("grid.t_min", g.t_min);
    s.num("grid.t_max", g.t_max);
    s.count("grid.n_points", g.n_points);
    s.num("grid.dt", g.dt());
}

/// Runs `kind` on `cfg`, writing outputs into `out_dir` (created if needed).
pub fn run(kind: JobKind, cfg: &JobConfig, out_dir: &Path) -> Result<RunOutcome> {
    let params = derive_params(&cfg.physical)?;
    let frame = frame_for(cfg, &params);
    let violations = validate_regime(&params, &cfg.regime);
    if cfg.regime_strict && !violations.is_empty() {
        let list: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(Error::Regime(format!(
            "parameters outside the regime of validity (set regime_strict = false to proceed):\n  {}",
            list.join("\n  ")
        )));
    }
    if kind == JobKind::Calibrate && cfg.calibrate_target_r1.is_none() {
        return Err(Error::Config("job `calibrate` needs calibrate_target_r1".into()));
    }
    fs::create_dir_all(out_dir)?;

    let mut job =
        Job { cfg, out_dir, summary: Summary::new(), files: Vec::new(), warnings: Vec::new(), status: Status::Ok };
    let s = &mut job.summary;
    s.text("tool.name", env!("CARGO_PKG_NAME"));
    s.text("tool.version", env!("CARGO_PKG_VERSION"));
    s.text("run.job", kind.as_str());
    s.text("run.config_hash", config_hash(cfg));
    s.text("run.status", "ok");
    for (k, v) in cfg.canonical_entries() {
        s.text(format!("config.{k}"), v);
    }
    echo_physical(s, &params, &frame);
    s.count("regime.violations", violations.len());
    for (i, v) in violations.iter().enumerate() {
        s.text(format!("regime.violation.{}", i + 1), v.to_string());
    }
    for v in &violations {
        job.warn(format!("regime: {v}"));
    }

    match kind {
        JobKind::Derive => {}
        JobKind::Propagate => run_propagate(&mut job, &frame)?,
        JobKind::ScanZ => run_scan(&mut job, &params, &frame)?,
        JobKind::Modes => run_modes_job(&mut job, &frame)?,
        JobKind::Bell => run_bell(&mut job, cfg.bell_r1, "")?,
        JobKind::Calibrate => run_calibrate(&mut job)?,
    }

    let warnings = job.warnings.clone();
    job.summary.count("warnings.count", warnings.len());
    for (i, w) in warnings.iter().enumerate() {
        job.summary.text(format!("warning.{}", i + 1), w.clone());
    }
    job.summary.set("run.status", job.status.as_str());
    job.summary.text("files", job.files.join(", "));
    let rendered = job.summary.render();
    fs::write(out_dir.join("summary.txt"), rendered)?;
    job.files.push("summary.txt".into());
    Ok(RunOutcome { status: job.status, summary: job.summary, files: job.files, warnings })
}

fn run_propagate(job: &mut Job, frame: &SimFrame) -> Result<()> {
    let cfg = job.cfg;
    let z_max = cfg.z_checkpoints.last().copied().unwrap_or(1.0).max(1.0);
    let grid = grid_for(cfg, frame, z_max)?;
    echo_grid(&mut job.summary, &grid);
    let input = gaussian_envelope(grid, frame.measure)?;
    job.write("input.csv", &input.to_csv())?;
    let quad = job.quad();
    let zero = Envelope::zeros(grid);

    let mut states = Vec::with_capacity(cfg.z_checkpoints.len());
    let mut worst = 0.0f64;
    for (k, &z) in cfg.z_checkpoints.iter().enumerate() {
        let state = state_at(&input, z, frame, &quad)?;
        let name = format!("envelope_{:02}.csv", k + 1);
        job.write(&name, &envelope_csv(&state.phi1, &state.phi2)?)?;
        let s = &mut job.summary;
        let key = format!("results.checkpoint.{}", k + 1);
        s.num(format!("{key}.z"), z);
        s.num(format!("{key}.n1"), state.n1);
        s.num(format!("{key}.n2"), state.n2);
        s.num(format!("{key}.residual"), state.residual);
        s.text(format!("{key}.file"), name);
        worst = worst.max(state.residual);
        states.push(state);
    }
    job.summary.num("results.conservation_residual", worst);

    if let Some(steps) = cfg.oracle_steps {
        let ic = IntegratorConfig::new(steps, cfg.z_checkpoints.clone());
        let direct = integrate(&input, &zero, &ic, frame)?;
        let mut gap = 0.0f64;
        for (k, (d, s)) in direct.iter().zip(&states).enumerate() {
            let (p1, p2) = propagate_pair(&input, &zero, s.z, frame, &quad)?;
            let g1 = if p1.sup_norm() > 0.0 { d.phi1.relative_l2(&p1)? } else { d.phi1.sup_norm() };
            let g2 = if p2.sup_norm() > 0.0 { d.phi2.relative_l2(&p2)? } else { d.phi2.sup_norm() };
            let key = format!("results.oracle.checkpoint.{}", k + 1);
            job.summary.num(format!("{key}.phi1_rel_l2"), g1);
            job.summary.num(format!("{key}.phi2_rel_l2"), g2);
            job.summary.num(format!("{key}.residual"), d.residual);
            gap = gap.max(g1).max(g2);
        }
        job.summary.count("results.oracle.steps", steps);
        job.summary.num("results.oracle_disagreement", gap);
        if gap > ORACLE_TOLERANCE {
            job.status = Status::FailedCheck;
            job.warn(format!(
                "kernel and direct integration differ by {gap:.3e} (relative L2) > {ORACLE_TOLERANCE:.0e}"
            ));
        }
    }
    Ok(())
}

fn run_scan(job: &mut Job, params: &DerivedParams, frame: &SimFrame) -> Result<()> {
    let cfg = job.cfg;
    let grid = grid_for(cfg, frame, cfg.scan_z_max)?;
    echo_grid(&mut job.summary, &grid);
    let input = gaussian_envelope(grid, frame.measure)?;
    let zs = scan::z_grid(cfg.scan_z_max, cfg.scan_z_points);
    let result = scan_z(&input, frame, &zs, &job.quad())?;
    job.write("scan_z.csv", &result.to_csv())?;
    let len = params.medium_length;
    let s = &mut job.summary;
    s.num("results.n2_peak_z", result.peak_z);
    s.num("results.n2_peak_z_m", result.peak_z * len);
    s.num("results.n2_peak", result.peak_n2);
    match result.revival_z {
        Some(z) => {
            s.num("results.revival_z", z);
            s.num("results.revival_z_m", z * len);
        }
        None => {
            s.text("results.revival_z", "none");
            s.text("results.revival_z_m", "none");
        }
    }
    s.num("results.conservation_residual", result.max_residual);
    if result.max_residual > 1e-4 {
        job.status = Status::FailedCheck;
        job.warn(format!("photon-number residual {:.3e} exceeds 1e-4 in the z scan", result.max_residual));
    }
    Ok(())
}

fn run_modes_job(job: &mut Job, frame: &SimFrame) -> Result<()> {
    let cfg = job.cfg;
    let grid = grid_for(cfg, frame, 1.0)?;
    echo_grid(&mut job.summary, &grid);
    let input = gaussian_envelope(grid, frame.measure)?;
    let quad = job.quad();
    let state = state_at(&input, 1.0, frame, &quad)?;
    job.write("envelope_L.csv", &envelope_csv(&state.phi1, &state.phi2)?)?;
    let split = split_modes(&state, frame.measure, &SplitOptions::default())?;
    let orth_opts = OrthogonalityOptions { n_z: cfg.orthogonality_points.max(2), ..Default::default() };
    let orth = check_orthogonality(&split, &input, frame, &quad, &orth_opts)?;
    for w in &split.warnings {
        job.warn(format!("modes: {w}"));
    }
    let s = &mut job.summary;
    s.num("results.n1", state.n1);
    s.num("results.n2", state.n2);
    s.num("results.conservation_residual", state.residual);
    s.num("results.t_star", split.t_star);
    s.num("results.peak_fast_t", split.peak_times[0]);
    s.num("results.peak_slow_t", split.peak_times[1]);
    s.num("results.peak_separation", split.peak_times[1] - split.peak_times[0]);
    s.num("results.r1", split.r1);
    s.num("results.r2", split.r2);
    s.num("results.r1_raw", split.raw[0]);
    s.num("results.r2_raw", split.raw[1]);
    s.num("results.entropy", entanglement_entropy(split.r1.clamp(0.0, 1.0))?);
    s.num("results.overlap_residual", split.overlap_residual);
    s.num("results.norm_residual", split.norm_residual);
    s.num("results.discarded_n2", split.discarded_n2);
    s.num("results.temporal_overlap", orth.temporal.norm());
    s.num("results.spatial_overlap", orth.spatial.norm());
    s.count("results.spatial_overlap_points", orth.z_used.len());
    run_bell(job, split.r1.clamp(0.0, 1.0), "bell.")
}

fn run_bell(job: &mut Job, r1: f64, prefix: &str) -> Result<()> {
    let cfg = job.cfg;
    let result = bell_scan(r1, &bell::j_grid(cfg.bell_j_max, cfg.bell_j_points))?;
    job.write("bell.csv", &result.to_csv())?;
    let s = &mut job.summary;
    if prefix.is_empty() {
        s.num("results.r1", r1);
        s.num("results.entropy", entanglement_entropy(r1)?);
    }
    s.num(format!("results.{prefix}j_opt"), result.j_opt);
    s.num(format!("results.{prefix}b_opt"), result.b_opt);
    s.num(format!("results.{prefix}b_opt_abs"), result.max_violation());
    s.text(format!("results.{prefix}violates_local_bound"), (result.max_violation() > 2.0).to_string());
    Ok(())
}

fn run_calibrate(job: &mut Job) -> Result<()> {
    let cfg = job.cfg;
    let target = cfg.calibrate_target_r1.unwrap_or(f64::NAN);
    if cfg.coupling_scale != 1.0 {
        job.warn("calibrate ignores coupling_scale".into());
    }
    if cfg.grid.t_min.is_some() || cfg.grid.t_max.is_some() || cfg.grid.n_points.is_some() {
        job.warn("calibrate builds its own time grid per drive value; t_min/t_max/n_points ignored".into());
    }
    let opts = CalibrationOptions {
        bracket: cfg.calibrate_bracket,
        scan_points: cfg.calibrate_scan_points,
        propagation: job.propagation(),
        ..Default::default()
    };
    let cal = calibrate_omega(target, &cfg.physical, &opts)?;
    let mut csv = String::from("omega_over_gamma,r1\n");
    for (x, r) in &cal.scan {
        let r = r.map(format_sig17).unwrap_or_else(|| "nan".into());
        csv.push_str(&format!("{},{}\n", format_sig17(*x), r));
    }
    job.write("calibration_scan.csv", &csv)?;

    let tuned = PhysicalConfig { rabi_drive: cal.omega, ..cfg.physical };
    let run = crate::analysis::run_modes(&tuned, &job.propagation())?;
    job.write("envelope_L.csv", &envelope_csv(&run.state.phi1, &run.state.phi2)?)?;
    for w in &run.split.warnings {
        job.warn(format!("modes at calibrated drive: {w}"));
    }
    let s = &mut job.summary;
    s.num("results.target_r1", target);
    s.num("results.omega_rad_per_s", cal.omega);
    s.num("results.omega_over_gamma", cal.omega_over_gamma);
    s.num("results.r1", cal.r1);
    s.num("results.r2", (1.0 - cal.r1 * cal.r1).sqrt());
    s.num("results.entropy", entanglement_entropy(cal.r1)?);
    s.count("results.crossings", cal.crossings.len());
    for (i, c) in cal.crossings.iter().enumerate() {
        s.num(format!("results.crossing.{}.omega_over_gamma", i + 1), c.omega_over_gamma);
        s.num(format!("results.crossing.{}.r1", i + 1), c.r1);
    }
    s.num("results.n2", run.state.n2);
    s.num("results.peak_separation", run.split.peak_times[1] - run.split.peak_times[0]);
    s.num("results.overlap_residual", run.split.overlap_residual);
    s.num("results.beta_l", run.params.beta_l);
    Ok(())
}

/// Reads a configuration file.
pub fn load_config(path: &Path) -> Result<JobConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    JobConfig::parse(&text)
}

/// Absolute paths of the files a run wrote.
pub fn output_paths(out_dir: &Path, outcome: &RunOutcome) -> Vec<PathBuf> {
    outcome.files.iter().map(|f| out_dir.join(f)).collect()
}
