//! Non-isometry certificate from scalar curvature: the blended metric is
//! constant-curvature on the cutoff core, so that constant is a critical
//! value of its curvature; if the base metric's curvature never attains it
//! as a near-critical value, no diffeomorphism can match the two.
//!
//! The check is a sufficient condition only: a true verdict claims
//! non-isometry, a false one reports "inconclusive, re-parameterize the
//! patch curvature", never "isometric". Critical points are approximated on
//! a bounded grid window by a small-gradient margin, and the window is part
//! of the report.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::ChartedMetric;
use crate::spacetimes::BumpCutoff;

/// Rectangular scan lattice for curvature fields.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScanWindow {
    pub t_range: (f64, f64),
    pub x_range: (f64, f64),
    pub nt: usize,
    pub nx: usize,
}

impl ScanWindow {
    pub fn t(&self, i: usize) -> f64 {
        self.t_range.0 + (self.t_range.1 - self.t_range.0) * i as f64 / (self.nt - 1) as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x_range.0 + (self.x_range.1 - self.x_range.0) * j as f64 / (self.nx - 1) as f64
    }
}

/// Scalar curvature field over a window plus lattice-difference gradient
/// norms.
#[derive(Debug, Clone, Serialize)]
pub struct CurvatureScan {
    pub label: String,
    pub window: ScanWindow,
    pub values: Vec<f64>,
    pub grad_norms: Vec<f64>,
}

impl CurvatureScan {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.window.nx + j]
    }

    pub fn grad_at(&self, i: usize, j: usize) -> f64 {
        self.grad_norms[i * self.window.nx + j]
    }
}

/// Evaluate S over the lattice; the gradient comes from central differences
/// of the scanned field (one-sided at the window edges).
pub fn curvature_scan(
    metric: &ChartedMetric,
    window: ScanWindow,
    fd_step: f64,
) -> Result<CurvatureScan> {
    if window.nt < 3 || window.nx < 3 {
        return Err(Error::Grid("scan window needs at least 3x3 points".to_string()));
    }
    let rows: Vec<Result<Vec<f64>>> = (0..window.nt)
        .into_par_iter()
        .map(|i| {
            let mut row = Vec::with_capacity(window.nx);
            for j in 0..window.nx {
                row.push(metric.scalar_curvature(&[window.t(i), window.x(j)], fd_step)?);
            }
            Ok(row)
        })
        .collect();
    let mut values = Vec::with_capacity(window.nt * window.nx);
    for row in rows {
        values.extend(row?);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite curvature in scan".to_string()));
    }
    let dt = (window.t_range.1 - window.t_range.0) / (window.nt - 1) as f64;
    let dx = (window.x_range.1 - window.x_range.0) / (window.nx - 1) as f64;
    let at = |i: usize, j: usize| values[i * window.nx + j];
    let mut grad = Vec::with_capacity(values.len());
    for i in 0..window.nt {
        for j in 0..window.nx {
            let st = if i == 0 {
                (at(1, j) - at(0, j)) / dt
            } else if i == window.nt - 1 {
                (at(i, j) - at(i - 1, j)) / dt
            } else {
                (at(i + 1, j) - at(i - 1, j)) / (2.0 * dt)
            };
            let sx = if j == 0 {
                (at(i, 1) - at(i, 0)) / dx
            } else if j == window.nx - 1 {
                (at(i, j) - at(i, j - 1)) / dx
            } else {
                (at(i, j + 1) - at(i, j - 1)) / (2.0 * dx)
            };
            grad.push((st * st + sx * sx).sqrt());
        }
    }
    Ok(CurvatureScan {
        label: metric.label().to_string(),
        window,
        values,
        grad_norms: grad,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WitnessOutcome {
    /// Curvature witness separates the metrics.
    NonIsometric,
    /// The patch curvature collides with base near-critical values;
    /// re-parameterize the curvature radius.
    Inconclusive,
    /// No cutoff core inside the window (e.g. the blend is trivial).
    NotApplicable,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct WitnessParams {
    /// Constancy tolerance on the cutoff core (finite-difference floor).
    pub tol_c: f64,
    /// Gradient threshold below which a lattice point counts as critical.
    pub eps_critical: f64,
}

impl Default for WitnessParams {
    fn default() -> Self {
        WitnessParams {
            tol_c: 1e-4,
            eps_critical: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessVerdict {
    /// Constant curvature value measured on the {chi = 1} core.
    pub c: f64,
    pub constancy_residual: f64,
    /// min |grad S_base| over the band |S_base - c| < delta; None when the
    /// band is empty.
    pub regularity_margin: Option<f64>,
    pub band_width: f64,
    pub verdict: bool,
    pub outcome: WitnessOutcome,
    pub core_points: usize,
    pub params: WitnessParams,
    pub window: ScanWindow,
}

/// Compare base and blended curvature over a window. `c` is the mean of the
/// blended curvature over lattice points whose whole FD stencil sits inside
/// the {chi = 1} ball; the verdict follows the critical-value separation
/// rule.
pub fn non_isometry_witness(
    base_scan: &CurvatureScan,
    blended_scan: &CurvatureScan,
    bump: &BumpCutoff,
    fd_step: f64,
    params: WitnessParams,
) -> Result<WitnessVerdict> {
    let window = blended_scan.window;
    // Stencil depth of the nested curvature differences is 4 fd steps; keep
    // a margin of 6 so core samples read only patch values.
    let core_radius = bump.inner_radius - 6.0 * fd_step;
    let mut core_vals = Vec::new();
    for i in 0..window.nt {
        for j in 0..window.nx {
            let p = [window.t(i), window.x(j)];
            let dist2: f64 = p
                .iter()
                .zip(&bump.center)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            if dist2.sqrt() <= core_radius {
                core_vals.push(blended_scan.at(i, j));
            }
        }
    }
    if core_vals.is_empty() {
        return Ok(WitnessVerdict {
            c: f64::NAN,
            constancy_residual: f64::NAN,
            regularity_margin: None,
            band_width: 0.0,
            verdict: false,
            outcome: WitnessOutcome::NotApplicable,
            core_points: 0,
            params,
            window,
        });
    }
    let c = core_vals.iter().sum::<f64>() / core_vals.len() as f64;
    let constancy_residual = core_vals
        .iter()
        .map(|v| (v - c).abs())
        .fold(0.0_f64, f64::max);
    let delta = 10.0 * params.tol_c * (1.0 + c.abs());
    let mut margin: Option<f64> = None;
    let base_window = base_scan.window;
    for i in 0..base_window.nt {
        for j in 0..base_window.nx {
            if (base_scan.at(i, j) - c).abs() < delta {
                let g = base_scan.grad_at(i, j);
                margin = Some(match margin {
                    Some(m) => m.min(g),
                    None => g,
                });
            }
        }
    }
    let separated = match margin {
        None => true,
        Some(m) => m > params.eps_critical,
    };
    let verdict = constancy_residual <= params.tol_c * (1.0 + c.abs()) && separated;
    Ok(WitnessVerdict {
        c,
        constancy_residual,
        regularity_margin: margin,
        band_width: delta,
        verdict,
        outcome: if verdict {
            WitnessOutcome::NonIsometric
        } else {
            WitnessOutcome::Inconclusive
        },
        core_points: core_vals.len(),
        params,
        window,
    })
}
