//! Photon-number conversion dynamics along the medium.

use rayon::prelude::*;

use crate::kernel::{propagate_phi1, propagate_phi2, KernelQuadrature};
use crate::medium::SimFrame;
use crate::pulse::{format_sig17, Envelope};
use crate::{Error, Result};

/// `n2` level used to detect the revival of conversion.
pub const REVIVAL_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct ZScan {
    pub z: Vec<f64>,
    pub n1: Vec<f64>,
    pub n2: Vec<f64>,
    /// Location and value of the largest `n2` (parabolic refinement between
    /// grid points).
    pub peak_z: f64,
    pub peak_n2: f64,
    /// First distance past the peak where `n2`, having fallen below
    /// [`REVIVAL_THRESHOLD`], climbs back above it.
    pub revival_z: Option<f64>,
    /// Largest `|n1 + n2 - n_in|` over the scan.
    pub max_residual: f64,
}

impl ZScan {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("z,n1,n2\n");
        for k in 0..self.z.len() {
            out.push_str(&format!(
                "{},{},{}\n",
                format_sig17(self.z[k]),
                format_sig17(self.n1[k]),
                format_sig17(self.n2[k])
            ));
        }
        out
    }
}

/// Evaluates `n1(z)`, `n2(z)` on `z_grid` (units of `L`, ascending).
///
/// Unlike [`crate::kernel::state_at`] the scan does not fail on a
/// conservation residual; the worst one is reported instead.
pub fn scan_z(f1: &Envelope, frame: &SimFrame, z_grid: &[f64], quad: &KernelQuadrature) -> Result<ZScan> {
    if z_grid.len() < 3 {
        return Err(Error::Domain(format!("z scan needs at least three points, got {}", z_grid.len())));
    }
    if z_grid.windows(2).any(|w| !(w[1] > w[0])) || z_grid[0] < 0.0 {
        return Err(Error::Domain("z grid must be non-negative and strictly ascending".into()));
    }
    let m = frame.measure;
    let n_in = f1.norm(m);
    let rows = z_grid
        .par_iter()
        .map(|&z| -> Result<(f64, f64)> {
            let n1 = propagate_phi1(f1, z, frame, quad)?.norm(m);
            let n2 = propagate_phi2(f1, z, frame, quad)?.norm(m);
            Ok((n1, n2))
        })
        .collect::<Result<Vec<_>>>()?;
    let n1: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let n2: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let max_residual = rows.iter().map(|(a, b)| (a + b - n_in).abs()).fold(0.0, f64::max);

    let k = (0..n2.len()).fold(0, |best, i| if n2[i] > n2[best] { i } else { best });
    let (peak_z, peak_n2) = refine_peak(z_grid, &n2, k);
    let revival_z = find_revival(z_grid, &n2, k, REVIVAL_THRESHOLD);
    Ok(ZScan { z: z_grid.to_vec(), n1, n2, peak_z, peak_n2, revival_z, max_residual })
}

/// Vertex of the parabola through the peak sample and its neighbours.
fn refine_peak(z: &[f64], y: &[f64], k: usize) -> (f64, f64) {
    if k == 0 || k + 1 >= z.len() {
        return (z[k], y[k]);
    }
    let (x0, x1, x2) = (z[k - 1], z[k], z[k + 1]);
    let (y0, y1, y2) = (y[k - 1], y[k], y[k + 1]);
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let a = (d12 - d01) / (x2 - x0);
    if a >= 0.0 {
        return (x1, y1);
    }
    let b = d01 - a * (x0 + x1);
    let xv = -b / (2.0 * a);
    let yv = y1 + (xv - x1) * (d01 + a * (xv - x0));
    (xv, yv.max(y1))
}

fn find_revival(z: &[f64], y: &[f64], peak: usize, threshold: f64) -> Option<f64> {
    let dip = (peak..y.len()).find(|&i| y[i] < threshold)?;
    let up = (dip + 1..y.len()).find(|&i| y[i] >= threshold)?;
    // linear interpolation of the crossing
    let (za, zb, ya, yb) = (z[up - 1], z[up], y[up - 1], y[up]);
    Some(za + (threshold - ya) * (zb - za) / (yb - ya))
}

/// `n` equally spaced distances on `[0, z_max]`.
pub fn z_grid(z_max: f64, n: usize) -> Vec<f64> {
    let n = n.max(3);
    (0..n).map(|k| z_max * k as f64 / (n - 1) as f64).collect()
}
