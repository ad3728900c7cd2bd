//! Fast/slow decomposition of the output wavefunction into two time bins.
//!
//! The output `Φ1(L, t)` is cut at the intensity minimum `t*` between its two
//! peaks; the earlier part is the fast bin `Φ^F`, the later part the slow bin
//! `Φ^S`. Because the windows are disjoint the two modes are exactly
//! orthogonal in time at every `z`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::kernel::{propagate_phi1, KernelQuadrature, TwoChannelState};
use crate::medium::SimFrame;
use crate::pulse::{inner_product, trapezoid, Envelope};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitOptions {
    /// Local maxima below this fraction of the global maximum are ignored.
    pub peak_fraction: f64,
    /// Valley-to-smaller-peak ratio above which a warning is recorded.
    pub max_valley_ratio: f64,
    /// Converted photon number `n2` above which a warning is recorded.
    pub max_converted: f64,
}

impl Default for SplitOptions {
    fn default() -> Self {
        SplitOptions { peak_fraction: 0.05, max_valley_ratio: 0.10, max_converted: 0.05 }
    }
}

#[derive(Debug, Clone)]
pub struct ModeSplit {
    /// Split time (units of `T`).
    pub t_star: f64,
    /// Times of the fast and slow intensity peaks.
    pub peak_times: [f64; 2],
    /// Peak intensities `|Φ1|²` of the fast and slow bins.
    pub peak_heights: [f64; 2],
    pub phi_f: Envelope,
    pub phi_s: Envelope,
    /// Renormalised amplitudes, `r1² + r2² = 1`; `r1` belongs to the fast bin.
    pub r1: f64,
    pub r2: f64,
    /// Amplitudes before renormalisation, `m ∫ |Φ^{F,S}|² dt` under the root.
    pub raw: [f64; 2],
    /// `|Φ1(t*)|²` relative to the smaller peak.
    pub overlap_residual: f64,
    /// `|raw1² + raw2² - n1|`.
    pub norm_residual: f64,
    /// Photon number left in the converted channel, discarded by the
    /// renormalisation.
    pub discarded_n2: f64,
    pub warnings: Vec<String>,
}

/// Indices of local maxima of `y` that reach `fraction · max(y)`.
fn significant_peaks(y: &[f64], fraction: f64) -> Vec<usize> {
    let top = y.iter().cloned().fold(0.0, f64::max);
    if top <= 0.0 {
        return Vec::new();
    }
    let floor = fraction * top;
    let n = y.len();
    let mut peaks = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if y[i] > y[i - 1] && y[i] >= floor {
            // walk across a flat top
            let mut j = i;
            while j + 1 < n && y[j + 1] == y[i] {
                j += 1;
            }
            if j + 1 < n && y[j + 1] < y[i] {
                peaks.push((i + j) / 2);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    peaks
}

fn window(env: &Envelope, keep: impl Fn(usize) -> bool) -> Result<Envelope> {
    let zero = Complex64::new(0.0, 0.0);
    let values = env.values().iter().enumerate().map(|(i, v)| if keep(i) { *v } else { zero }).collect();
    Envelope::new(*env.grid(), values)
}

/// Splits `Φ1` of `state` into its fast and slow time bins.
pub fn split_modes(state: &TwoChannelState, measure: f64, opts: &SplitOptions) -> Result<ModeSplit> {
    let phi = &state.phi1;
    let grid = *phi.grid();
    let intensity = phi.intensity();
    let peaks = significant_peaks(&intensity, opts.peak_fraction);
    if peaks.len() != 2 {
        return Err(Error::Regime(format!(
            "modes not well separated: |Φ1|² has {} local maxima above {}% of its maximum at z = {} (need 2)",
            peaks.len(),
            100.0 * opts.peak_fraction,
            state.z
        )));
    }
    let (p, q) = (peaks[0], peaks[1]);
    let i_star = (p..=q).fold(p, |best, i| if intensity[i] < intensity[best] { i } else { best });

    let dt = grid.dt();
    let fast = measure * trapezoid(&intensity[..=i_star], dt);
    let slow = measure * trapezoid(&intensity[i_star..], dt);
    let total = fast + slow;
    if !(total > 0.0) {
        return Err(Error::Numerical("empty output wavefunction".into()));
    }
    let raw = [fast.sqrt(), slow.sqrt()];
    let (r1, r2) = ((fast / total).sqrt(), (slow / total).sqrt());

    let smaller = intensity[p].min(intensity[q]);
    let overlap_residual = intensity[i_star] / smaller;
    let mut warnings = Vec::new();
    if overlap_residual > opts.max_valley_ratio {
        warnings.push(format!(
            "inter-peak minimum is {:.1}% of the smaller peak (limit {:.0}%)",
            100.0 * overlap_residual,
            100.0 * opts.max_valley_ratio
        ));
    }
    if state.n2 > opts.max_converted {
        warnings.push(format!(
            "n2 = {:.4} remains in the converted channel (limit {}); r1, r2 are renormalised",
            state.n2, opts.max_converted
        ));
    }

    Ok(ModeSplit {
        t_star: grid.time(i_star),
        peak_times: [grid.time(p), grid.time(q)],
        peak_heights: [intensity[p], intensity[q]],
        phi_f: window(phi, |i| i <= i_star)?,
        phi_s: window(phi, |i| i > i_star)?,
        r1,
        r2,
        raw,
        overlap_residual,
        norm_residual: (total - state.n1).abs(),
        discarded_n2: state.n2,
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrthogonalityOptions {
    /// Distances (units of `L`) sampled for the spatial overlap.
    pub z_min: f64,
    pub z_max: f64,
    pub n_z: usize,
}

impl Default for OrthogonalityOptions {
    fn default() -> Self {
        OrthogonalityOptions { z_min: 0.5, z_max: 1.0, n_z: 41 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Orthogonality {
    /// `m ∫ conj(Φ^F) Φ^S dt` at the split distance.
    pub temporal: Complex64,
    /// `∫ Φ^F(z, t*) Φ^S(z, t*) dz` over the sampled distances, each split
    /// at its own inter-peak minimum.
    pub spatial: Complex64,
    /// Distances where the split succeeded.
    pub z_used: Vec<f64>,
    /// Distances skipped because `Φ1(z)` did not show two peaks.
    pub z_skipped: Vec<f64>,
}

/// Temporal and spatial overlaps of the fast and slow bins.
///
/// `f1` and `frame` must be the input and frame that produced `split`; the
/// spatial overlap re-propagates `f1` to each sampled distance.
pub fn check_orthogonality(
    split: &ModeSplit,
    f1: &Envelope,
    frame: &SimFrame,
    quad: &KernelQuadrature,
    opts: &OrthogonalityOptions,
) -> Result<Orthogonality> {
    let temporal = inner_product(&split.phi_f, &split.phi_s, frame.measure)?;
    let grid = *f1.grid();
    let n_z = opts.n_z.max(2);
    let zs: Vec<f64> = (0..n_z).map(|k| opts.z_min + (opts.z_max - opts.z_min) * k as f64 / (n_z - 1) as f64).collect();
    let t_fixed = split.t_star;
    let samples = zs
        .par_iter()
        .map(|&z| -> Result<Option<Complex64>> {
            let phi1 = propagate_phi1(f1, z, frame, quad)?;
            let state = TwoChannelState { z, phi1, phi2: Envelope::zeros(grid), n1: 0.0, n2: 0.0, residual: 0.0 };
            match split_modes(&state, frame.measure, &SplitOptions::default()) {
                Ok(s) => {
                    // nearest sample rather than interpolation: the windows
                    // are sample-exact and a spline would smear the cut
                    let i = ((t_fixed - grid.t_min) / grid.dt()).round() as usize;
                    let i = i.min(grid.n_points - 1);
                    Ok(Some(s.phi_f.values()[i].conj() * s.phi_s.values()[i]))
                }
                Err(Error::Regime(_)) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let mut z_used = Vec::new();
    let mut z_skipped = Vec::new();
    let mut products = Vec::new();
    for (z, s) in zs.iter().zip(samples) {
        match s {
            Some(v) => {
                z_used.push(*z);
                products.push(v);
            }
            None => z_skipped.push(*z),
        }
    }
    // trapezoid over the (possibly non-uniform) set of used distances
    let spatial = z_used.windows(2).zip(products.windows(2)).map(|(z, p)| (p[0] + p[1]) * (0.5 * (z[1] - z[0]))).sum();
    Ok(Orthogonality { temporal, spatial, z_used, z_skipped })
}
