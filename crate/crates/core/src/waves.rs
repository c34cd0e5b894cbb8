//! Finite-difference solver for Box_g u = f on 1+1 charts, with
//! Dirichlet-to-Neumann extraction on strip charts and exterior
//! source-to-solution sampling on ambient rectangles.
//!
//! The operator -|g|^{-1/2} d_mu(|g|^{1/2} g^{mu nu} d_nu u) is expanded with
//! centered flux differences in space and time. The metric cross term g_tx
//! couples the newest level's neighbors, so each step solves a strictly
//! diagonally dominant tridiagonal system for the new row; for diagonal
//! metrics the off-diagonals vanish and the update is the classic explicit
//! three-level scheme. Zero data on the two start levels realizes "zero in
//! the far past" exactly by finite propagation speed.

use std::sync::Arc;

use serde::Serialize;

use crate::causality::characteristic_speeds;
use crate::error::{Error, Result};
use crate::geometry::ChartedMetric;
use crate::spacetimes::CylinderDomain;

pub const CFL_SAFETY: f64 = 0.5;

pub type SourceFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Uniform space-time lattice. `dt` is certified against the fastest
/// characteristic speed at construction.
#[derive(Debug, Clone, Serialize)]
pub struct WaveGrid {
    pub label: String,
    pub t_range: (f64, f64),
    pub x_range: (f64, f64),
    pub nt: usize,
    pub nx: usize,
    /// Fastest coordinate light speed found when the grid was built.
    pub c_max: f64,
}

impl WaveGrid {
    pub fn dt(&self) -> f64 {
        (self.t_range.1 - self.t_range.0) / (self.nt - 1) as f64
    }

    pub fn dx(&self) -> f64 {
        (self.x_range.1 - self.x_range.0) / (self.nx - 1) as f64
    }

    pub fn t(&self, n: usize) -> f64 {
        self.t_range.0 + n as f64 * self.dt()
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x_range.0 + j as f64 * self.dx()
    }

    /// Grid signal speed dx/dt; the numerical domain of dependence expands
    /// at this rate.
    pub fn grid_speed(&self) -> f64 {
        self.dx() / self.dt()
    }

    /// Build a grid whose timestep satisfies dt = safety * dx / c_max, with
    /// c_max the largest characteristic speed of any of the given metrics
    /// over the rectangle.
    pub fn from_cfl(
        label: &str,
        metrics: &[&ChartedMetric],
        t_range: (f64, f64),
        x_range: (f64, f64),
        nx: usize,
        safety: f64,
    ) -> Result<WaveGrid> {
        if nx < 16 {
            return Err(Error::Grid(format!("nx = {nx} < 16")));
        }
        if !(t_range.1 > t_range.0 && x_range.1 > x_range.0) {
            return Err(Error::Grid("empty grid ranges".to_string()));
        }
        let c_max = max_characteristic_speed(metrics, t_range, x_range)?;
        let dx = (x_range.1 - x_range.0) / (nx - 1) as f64;
        let dt_max = safety * dx / c_max;
        let nt = ((t_range.1 - t_range.0) / dt_max).ceil() as usize + 1;
        Ok(WaveGrid {
            label: label.to_string(),
            t_range,
            x_range,
            nt,
            nx,
            c_max,
        })
    }
}

/// Largest |dx/dt| over sampled grid points, from the roots of
/// g_tt + 2 g_tx c + g_xx c^2 = 0.
pub fn max_characteristic_speed(
    metrics: &[&ChartedMetric],
    t_range: (f64, f64),
    x_range: (f64, f64),
) -> Result<f64> {
    let nt_s = 160;
    let nx_s = 160;
    let mut c_max: f64 = 0.0;
    for metric in metrics {
        for i in 0..=nt_s {
            let t = t_range.0 + (t_range.1 - t_range.0) * i as f64 / nt_s as f64;
            for j in 0..=nx_s {
                let x = x_range.0 + (x_range.1 - x_range.0) * j as f64 / nx_s as f64;
                let g = metric.components_at(&[t, x])?;
                let (c_lo, c_hi) = characteristic_speeds(&g)?;
                c_max = c_max.max(c_lo.abs()).max(c_hi.abs());
            }
        }
    }
    if !(c_max > 0.0 && c_max.is_finite()) {
        return Err(Error::Signature(format!(
            "characteristic speed scan produced {c_max}"
        )));
    }
    Ok(c_max)
}

/// CFL-certified timestep for the given grid resolution.
pub fn cfl_timestep(
    metric: &ChartedMetric,
    t_range: (f64, f64),
    x_range: (f64, f64),
    nx: usize,
) -> Result<f64> {
    let c_max = max_characteristic_speed(&[metric], t_range, x_range)?;
    let dx = (x_range.1 - x_range.0) / (nx - 1) as f64;
    Ok(CFL_SAFETY * dx / c_max)
}

/// Compactly supported source with a declared bounding box.
#[derive(Clone)]
pub struct SourceSpec {
    pub eval: SourceFn,
    /// ((t_lo, t_hi), (x_lo, x_hi)) containing the support.
    pub support: ((f64, f64), (f64, f64)),
}

impl SourceSpec {
    pub fn gaussian(center: (f64, f64), sigma: f64, amp: f64) -> SourceSpec {
        let w = 8.0 * sigma;
        SourceSpec {
            eval: Arc::new(move |t, x| {
                let dt = t - center.0;
                let dx = x - center.1;
                amp * (-(dt * dt + dx * dx) / (sigma * sigma)).exp()
            }),
            support: ((center.0 - w, center.0 + w), (center.1 - w, center.1 + w)),
        }
    }

    /// Smooth compactly supported ball source built from the cutoff profile.
    pub fn bump(center: (f64, f64), radius: f64, amp: f64) -> SourceSpec {
        SourceSpec {
            eval: Arc::new(move |t, x| {
                let r2 = (t - center.0).powi(2) + (x - center.1).powi(2);
                let s = r2.sqrt() / radius;
                amp * crate::spacetimes::smooth_step(s)
            }),
            support: (
                (center.0 - radius, center.0 + radius),
                (center.1 - radius, center.1 + radius),
            ),
        }
    }

    pub fn zero() -> SourceSpec {
        SourceSpec {
            eval: Arc::new(|_t, _x| 0.0),
            support: ((0.0, 0.0), (0.0, 0.0)),
        }
    }
}

/// Discretized solution field, row-major over (time level, space node).
#[derive(Clone)]
pub struct WaveField {
    pub grid: WaveGrid,
    pub values: Vec<f64>,
    pub metric_label: String,
}

impl WaveField {
    pub fn at(&self, n: usize, j: usize) -> f64 {
        self.values[n * self.grid.nx + j]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Bilinear interpolation at an interior point.
    pub fn interp(&self, t: f64, x: f64) -> Result<f64> {
        let (t0, t1) = self.grid.t_range;
        let (x0, x1) = self.grid.x_range;
        if !(t >= t0 && t <= t1 && x >= x0 && x <= x1) {
            return Err(Error::Data(format!(
                "probe ({t}, {x}) outside grid [{t0}, {t1}] x [{x0}, {x1}]"
            )));
        }
        let ft = ((t - t0) / self.grid.dt()).min((self.grid.nt - 1) as f64 - 1e-9);
        let fx = ((x - x0) / self.grid.dx()).min((self.grid.nx - 1) as f64 - 1e-9);
        let n = ft.floor() as usize;
        let j = fx.floor() as usize;
        let wt = ft - n as f64;
        let wx = fx - j as f64;
        Ok(self.at(n, j) * (1.0 - wt) * (1.0 - wx)
            + self.at(n, j + 1) * (1.0 - wt) * wx
            + self.at(n + 1, j) * wt * (1.0 - wx)
            + self.at(n + 1, j + 1) * wt * wx)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TraceKind {
    Dirichlet,
    Neumann,
}

/// Boundary data or extracted boundary response on one side of the strip.
#[derive(Debug, Clone, Serialize)]
pub struct BoundaryTrace {
    pub side: Side,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub kind: TraceKind,
    /// Worst deviation of g(nu, nu) from 1 and of g(nu, boundary tangent)
    /// from 0 over the trace; meaningful for Neumann traces.
    pub normal_certificate: f64,
}

impl BoundaryTrace {
    /// Sample a Dirichlet pulse onto grid times.
    pub fn dirichlet_from_fn(
        grid: &WaveGrid,
        side: Side,
        pulse: &dyn Fn(f64) -> f64,
    ) -> BoundaryTrace {
        let times: Vec<f64> = (0..grid.nt).map(|n| grid.t(n)).collect();
        let values: Vec<f64> = times.iter().map(|t| pulse(*t)).collect();
        BoundaryTrace {
            side,
            times,
            values,
            kind: TraceKind::Dirichlet,
            normal_certificate: 0.0,
        }
    }

    pub fn zero(grid: &WaveGrid, side: Side) -> BoundaryTrace {
        BoundaryTrace {
            side,
            times: (0..grid.nt).map(|n| grid.t(n)).collect(),
            values: vec![0.0; grid.nt],
            kind: TraceKind::Dirichlet,
            normal_certificate: 0.0,
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// a^{mu nu} = |g|^{1/2} g^{mu nu} and the volume factor A = |g|^{1/2}.
struct CoeffEvaluator<'a> {
    metric: &'a ChartedMetric,
}

impl<'a> CoeffEvaluator<'a> {
    /// Returns (a_tt, a_tx, a_xx, A).
    fn eval(&self, t: f64, x: f64) -> Result<(f64, f64, f64, f64)> {
        let g = self.metric.components_at(&[t, x])?;
        let det = g[(0, 0)] * g[(1, 1)] - g[(0, 1)] * g[(1, 0)];
        if !(det < 0.0) {
            return Err(Error::Signature(format!(
                "metric determinant {det:.3e} not negative at ({t}, {x})"
            )));
        }
        let vol = (-det).sqrt();
        let inv_tt = g[(1, 1)] / det;
        let inv_tx = -g[(0, 1)] / det;
        let inv_xx = g[(0, 0)] / det;
        Ok((vol * inv_tt, vol * inv_tx, vol * inv_xx, vol))
    }
}

/// Per-level rows of solver coefficients.
struct CoeffRows {
    att_half: Vec<Vec<f64>>, // att at t0 + (k + 1/2) dt, indexed k
    atx: Vec<Vec<f64>>,      // atx at level k
    axx_half: Vec<Vec<f64>>, // axx at (level k, x0 + (j + 1/2) dx)
    vol: Vec<Vec<f64>>,      // A at level k
}

fn build_coeff_rows(metric: &ChartedMetric, grid: &WaveGrid) -> Result<CoeffRows> {
    let ev = CoeffEvaluator { metric };
    let (nt, nx) = (grid.nt, grid.nx);
    let dt = grid.dt();
    let dx = grid.dx();
    let mut att_half = Vec::with_capacity(nt);
    let mut atx = Vec::with_capacity(nt);
    let mut axx_half = Vec::with_capacity(nt);
    let mut vol = Vec::with_capacity(nt);
    for n in 0..nt {
        let t = grid.t(n);
        let mut row_atx = Vec::with_capacity(nx);
        let mut row_vol = Vec::with_capacity(nx);
        for j in 0..nx {
            let (_, a_tx, _, a_vol) = ev.eval(t, grid.x(j))?;
            row_atx.push(a_tx);
            row_vol.push(a_vol);
        }
        let t_half = t + 0.5 * dt;
        let mut row_att = Vec::with_capacity(nx);
        if n + 1 < nt {
            for j in 0..nx {
                let (a_tt, _, _, _) = ev.eval(t_half, grid.x(j))?;
                row_att.push(a_tt);
            }
        }
        let mut row_axx = Vec::with_capacity(nx - 1);
        for j in 0..nx - 1 {
            let (_, _, a_xx, _) = ev.eval(t, grid.x(j) + 0.5 * dx)?;
            row_axx.push(a_xx);
        }
        att_half.push(row_att);
        atx.push(row_atx);
        axx_half.push(row_axx);
        vol.push(row_vol);
    }
    Ok(CoeffRows {
        att_half,
        atx,
        axx_half,
        vol,
    })
}

/// Tridiagonal solve; rows are strictly diagonally dominant.
fn thomas_solve(
    sub: &[f64],
    diag: &[f64],
    sup: &[f64],
    rhs: &[f64],
    scratch_c: &mut Vec<f64>,
    scratch_d: &mut Vec<f64>,
    out: &mut [f64],
) {
    let n = diag.len();
    scratch_c.clear();
    scratch_d.clear();
    scratch_c.resize(n, 0.0);
    scratch_d.resize(n, 0.0);
    let mut beta = diag[0];
    scratch_c[0] = sup[0] / beta;
    scratch_d[0] = rhs[0] / beta;
    for i in 1..n {
        beta = diag[i] - sub[i] * scratch_c[i - 1];
        scratch_c[i] = sup[i] / beta;
        scratch_d[i] = (rhs[i] - sub[i] * scratch_d[i - 1]) / beta;
    }
    out[n - 1] = scratch_d[n - 1];
    for i in (0..n - 1).rev() {
        out[i] = scratch_d[i] - scratch_c[i] * out[i + 1];
    }
}

fn solve_inner(
    metric: &ChartedMetric,
    grid: &WaveGrid,
    source: Option<&SourceSpec>,
    left: &BoundaryTrace,
    right: &BoundaryTrace,
) -> Result<WaveField> {
    let (nt, nx) = (grid.nt, grid.nx);
    if nx < 16 {
        return Err(Error::Grid(format!("nx = {nx} < 16")));
    }
    if left.values.len() != nt || right.values.len() != nt {
        return Err(Error::Data(
            "boundary trace length does not match grid".to_string(),
        ));
    }
    for trace in [left, right] {
        if trace.values[0] != 0.0 || trace.values[1] != 0.0 {
            return Err(Error::Data(
                "boundary data must vanish on the two start levels".to_string(),
            ));
        }
    }
    let dt = grid.dt();
    let dx = grid.dx();
    // Re-certify the CFL bound with a fresh coarse speed scan.
    let c_now = max_characteristic_speed(&[metric], grid.t_range, grid.x_range)?;
    if dt > (CFL_SAFETY * dx / c_now) * (1.0 + 1e-9) {
        return Err(Error::Stability(format!(
            "dt = {dt:.3e} violates the CFL bound {:.3e}",
            CFL_SAFETY * dx / c_now
        )));
    }
    let rows = build_coeff_rows(metric, grid)?;
    let mut values = vec![0.0_f64; nt * nx];
    // Levels 0 and 1 are zero except for the imposed boundary values.
    for n in 0..2.min(nt) {
        values[n * nx] = left.values[n];
        values[n * nx + nx - 1] = right.values[n];
    }
    let inv_dt2 = 1.0 / (dt * dt);
    let inv_dx2 = 1.0 / (dx * dx);
    let cross = 1.0 / (4.0 * dt * dx);
    let m = nx - 2;
    let mut sub = vec![0.0; m];
    let mut diag = vec![0.0; m];
    let mut sup = vec![0.0; m];
    let mut rhs = vec![0.0; m];
    let mut c_scratch = Vec::new();
    let mut d_scratch = Vec::new();
    let mut new_row = vec![0.0; m];
    for n in 1..nt - 1 {
        let t_n = grid.t(n);
        let (prev, cur) = {
            let (a, b) = values.split_at(n * nx);
            (&a[(n - 1) * nx..], &b[..nx])
        };
        let att_p = &rows.att_half[n]; // t_n + dt/2
        let att_m = &rows.att_half[n - 1]; // t_n - dt/2
        let atx_next = &rows.atx[n + 1];
        let atx_prev = &rows.atx[n - 1];
        let atx_cur = &rows.atx[n];
        let axx = &rows.axx_half[n];
        let vol = &rows.vol[n];
        for j in 1..nx - 1 {
            let i = j - 1;
            let d = att_p[j] * inv_dt2;
            let sp = (atx_next[j] + atx_cur[j + 1]) * cross;
            let sb = -(atx_next[j] + atx_cur[j - 1]) * cross;
            // Dominance guards the Thomas elimination.
            if sp.abs() + sb.abs() >= d.abs() {
                return Err(Error::Stability(format!(
                    "cross-term rows not diagonally dominant at (n={n}, j={j})"
                )));
            }
            let t1_known = (-att_p[j] * cur[j] - att_m[j] * (cur[j] - prev[j])) * inv_dt2;
            let t2_known = -atx_prev[j] * (prev[j + 1] - prev[j - 1]) * cross;
            let t3_known =
                (-atx_cur[j + 1] * prev[j + 1] + atx_cur[j - 1] * prev[j - 1]) * cross;
            let t4_known = (axx[j] * (cur[j + 1] - cur[j])
                - axx[j - 1] * (cur[j] - cur[j - 1]))
                * inv_dx2;
            let f = match source {
                Some(src) => (src.eval)(t_n, grid.x(j)),
                None => 0.0,
            };
            sub[i] = sb;
            diag[i] = d;
            sup[i] = sp;
            rhs[i] = -vol[j] * f - t1_known - t2_known - t3_known - t4_known;
        }
        // Fold prescribed boundary values of the new level into the RHS.
        let bl = left.values[n + 1];
        let br = right.values[n + 1];
        rhs[0] -= sub[0] * bl;
        rhs[m - 1] -= sup[m - 1] * br;
        thomas_solve(
            &sub,
            &diag,
            &sup,
            &rhs,
            &mut c_scratch,
            &mut d_scratch,
            &mut new_row,
        );
        let base = (n + 1) * nx;
        values[base] = bl;
        values[base + nx - 1] = br;
        values[base + 1..base + nx - 1].copy_from_slice(&new_row);
        for v in &values[base..base + nx] {
            if !v.is_finite() {
                return Err(Error::Stability(format!(
                    "non-finite field value at level {}",
                    n + 1
                )));
            }
        }
    }
    Ok(WaveField {
        grid: grid.clone(),
        values,
        metric_label: metric.label().to_string(),
    })
}

/// Forward problem on an ambient rectangle: zero data in the past, zero
/// edges, interior source. The grid must be wide enough that the source's
/// numerical influence cone never reaches the spatial edges.
pub fn solve_cauchy(
    metric: &ChartedMetric,
    grid: &WaveGrid,
    source: &SourceSpec,
) -> Result<WaveField> {
    let ((ts0, _), (xs0, xs1)) = source.support;
    if xs1 > xs0 {
        let speed = grid.grid_speed();
        let horizon = grid.t_range.1 - ts0.max(grid.t_range.0);
        if horizon > 0.0 {
            let reach = speed * horizon + 2.0 * grid.dx();
            if xs0 - reach < grid.x_range.0 || xs1 + reach > grid.x_range.1 {
                return Err(Error::Grid(format!(
                    "source influence cone (reach {reach:.3}) touches the grid edges"
                )));
            }
        }
    }
    let left = BoundaryTrace::zero(grid, Side::Left);
    let right = BoundaryTrace::zero(grid, Side::Right);
    solve_inner(metric, grid, Some(source), &left, &right)
}

/// Initial-boundary value problem on a strip chart: Dirichlet data imposed
/// at both walls each level, zero past data.
pub fn solve_ibvp(
    metric: &ChartedMetric,
    grid: &WaveGrid,
    left: &BoundaryTrace,
    right: &BoundaryTrace,
) -> Result<WaveField> {
    solve_inner(metric, grid, None, left, right)
}

/// IBVP with an interior source as well; used for interior probe runs.
pub fn solve_ibvp_with_source(
    metric: &ChartedMetric,
    grid: &WaveGrid,
    left: &BoundaryTrace,
    right: &BoundaryTrace,
    source: &SourceSpec,
) -> Result<WaveField> {
    solve_inner(metric, grid, Some(source), left, right)
}

/// Inward unit normal contraction nu^mu = -+ g^{mu x}/sqrt(g^{xx}) at the
/// requested wall, certified g(nu, nu) = 1 and g(nu, d_t) = 0; the
/// directional derivative combines a second-order one-sided x-stencil with
/// centered t-stencils.
pub fn neumann_trace(
    field: &WaveField,
    metric: &ChartedMetric,
    side: Side,
) -> Result<BoundaryTrace> {
    let grid = &field.grid;
    let (nt, nx) = (grid.nt, grid.nx);
    if nx < 3 || nt < 3 {
        return Err(Error::Grid(
            "grid too small for trace extraction".to_string(),
        ));
    }
    let dt = grid.dt();
    let dx = grid.dx();
    let (j0, orient) = match side {
        Side::Left => (0usize, 1.0),
        Side::Right => (nx - 1, -1.0),
    };
    let x_b = grid.x(j0);
    let mut times = Vec::with_capacity(nt);
    let mut values = Vec::with_capacity(nt);
    let mut certificate = 0.0_f64;
    for n in 0..nt {
        let t_n = grid.t(n);
        let g = metric.metric_at(&[t_n, x_b])?;
        let det = g[(0, 0)] * g[(1, 1)] - g[(0, 1)] * g[(1, 0)];
        let inv_tx = -g[(0, 1)] / det;
        let inv_xx = g[(0, 0)] / det;
        if inv_xx <= 0.0 {
            return Err(Error::Signature(format!(
                "boundary not timelike at t = {t_n}: g^xx = {inv_xx:.3e}"
            )));
        }
        let beta = inv_xx.sqrt();
        let nu_t = orient * inv_tx / beta;
        let nu_x = orient * inv_xx / beta;
        // Certificates: unit length and orthogonality to the wall tangent.
        let norm = g[(0, 0)] * nu_t * nu_t
            + 2.0 * g[(0, 1)] * nu_t * nu_x
            + g[(1, 1)] * nu_x * nu_x;
        let tangent = g[(0, 0)] * nu_t + g[(0, 1)] * nu_x;
        certificate = certificate.max((norm - 1.0).abs()).max(tangent.abs());
        let du_dx = match side {
            Side::Left => {
                (-3.0 * field.at(n, 0) + 4.0 * field.at(n, 1) - field.at(n, 2)) / (2.0 * dx)
            }
            Side::Right => {
                (3.0 * field.at(n, nx - 1) - 4.0 * field.at(n, nx - 2) + field.at(n, nx - 3))
                    / (2.0 * dx)
            }
        };
        let du_dt = if n == 0 {
            (-3.0 * field.at(0, j0) + 4.0 * field.at(1, j0) - field.at(2, j0)) / (2.0 * dt)
        } else if n == nt - 1 {
            (3.0 * field.at(nt - 1, j0) - 4.0 * field.at(nt - 2, j0) + field.at(nt - 3, j0))
                / (2.0 * dt)
        } else {
            (field.at(n + 1, j0) - field.at(n - 1, j0)) / (2.0 * dt)
        };
        times.push(t_n);
        values.push(nu_t * du_dt + nu_x * du_dx);
    }
    if certificate > 1e-10 {
        return Err(Error::Signature(format!(
            "normal certificate {certificate:.3e} exceeds 1e-10"
        )));
    }
    Ok(BoundaryTrace {
        side,
        times,
        values,
        kind: TraceKind::Neumann,
        normal_certificate: certificate,
    })
}

/// Dirichlet-to-Neumann response: solve the IBVP and extract both Neumann
/// traces.
pub struct DnOutput {
    pub left: BoundaryTrace,
    pub right: BoundaryTrace,
    pub field: WaveField,
}

pub fn dn_map(
    metric: &ChartedMetric,
    grid: &WaveGrid,
    left: &BoundaryTrace,
    right: &BoundaryTrace,
) -> Result<DnOutput> {
    let field = solve_ibvp(metric, grid, left, right)?;
    let out_left = neumann_trace(&field, metric, Side::Left)?;
    let out_right = neumann_trace(&field, metric, Side::Right)?;
    Ok(DnOutput {
        left: out_left,
        right: out_right,
        field,
    })
}

/// Exterior source-to-solution samples: forward solve, then restrict to
/// probe points outside the cylinder.
pub fn source_to_solution(
    metric: &ChartedMetric,
    cyl: &CylinderDomain,
    source: &SourceSpec,
    grid: &WaveGrid,
    probes: &[(f64, f64)],
) -> Result<Vec<f64>> {
    // Source support must be disjoint from M = {f <= 0}.
    let ((ts0, ts1), (xs0, xs1)) = source.support;
    if ts1 > ts0 {
        let samples = 24;
        for i in 0..=samples {
            for j in 0..=samples {
                let t = ts0 + (ts1 - ts0) * i as f64 / samples as f64;
                let x = xs0 + (xs1 - xs0) * j as f64 / samples as f64;
                if cyl.f(&[t, x]) <= 0.0 {
                    return Err(Error::Data(format!(
                        "source support meets the cylinder at ({t:.3}, {x:.3})"
                    )));
                }
            }
        }
    }
    for (t, x) in probes {
        if cyl.f(&[*t, *x]) <= 0.0 {
            return Err(Error::Data(format!(
                "probe ({t}, {x}) lies inside the cylinder"
            )));
        }
    }
    let field = solve_cauchy(metric, grid, source)?;
    probes.iter().map(|(t, x)| field.interp(*t, *x)).collect()
}

/// High-order reference evaluation of Box_g u for a closed-form u; an
/// oracle for manufactured-solution tests, independent of the stepping
/// scheme.
pub fn box_operator_reference(
    metric: &ChartedMetric,
    u: &dyn Fn(f64, f64) -> f64,
    t: f64,
    x: f64,
    h: f64,
) -> Result<f64> {
    let ev = CoeffEvaluator { metric };
    let flux = |mu: usize, t: f64, x: f64| -> Result<f64> {
        let (a_tt, a_tx, a_xx, _) = ev.eval(t, x)?;
        let ut = (u(t - 2.0 * h, x) - 8.0 * u(t - h, x) + 8.0 * u(t + h, x)
            - u(t + 2.0 * h, x))
            / (12.0 * h);
        let ux = (u(t, x - 2.0 * h) - 8.0 * u(t, x - h) + 8.0 * u(t, x + h)
            - u(t, x + 2.0 * h))
            / (12.0 * h);
        Ok(match mu {
            0 => a_tt * ut + a_tx * ux,
            _ => a_tx * ut + a_xx * ux,
        })
    };
    let div_t = (flux(0, t - 2.0 * h, x)? - 8.0 * flux(0, t - h, x)? + 8.0 * flux(0, t + h, x)?
        - flux(0, t + 2.0 * h, x)?)
        / (12.0 * h);
    let div_x = (flux(1, t, x - 2.0 * h)? - 8.0 * flux(1, t, x - h)? + 8.0 * flux(1, t, x + h)?
        - flux(1, t, x + 2.0 * h)?)
        / (12.0 * h);
    let (_, _, _, vol) = ev.eval(t, x)?;
    Ok(-(div_t + div_x) / vol)
}

/// Smooth compactly supported boundary pulse.
#[derive(Clone, Serialize)]
pub struct PulseSpec {
    pub side: Side,
    pub center: f64,
    pub width: f64,
    pub amp: f64,
}

impl PulseSpec {
    pub fn eval(&self, t: f64) -> f64 {
        self.amp * crate::spacetimes::smooth_step((t - self.center).abs() / self.width)
    }
}

/// Everything a boundary-data comparison run needs: the metric pair on both
/// charts, the cylinder, the causal-hull indicator for the interior gap
/// measurement, and the probing inputs.
pub struct CompareSetup {
    pub label: String,
    pub strip_g: ChartedMetric,
    pub strip_gp: ChartedMetric,
    pub ambient_g: ChartedMetric,
    pub ambient_gp: ChartedMetric,
    pub cylinder: CylinderDomain,
    pub strip_to_ambient: crate::geometry::ChartMap,
    /// Indicator of the causal future hull of the hidden region, ambient
    /// coordinates; the interior gap is measured there.
    pub future_hull: crate::spacetimes::IndicatorField,
    pub strip_t_range: (f64, f64),
    pub ambient_t_range: (f64, f64),
    pub ambient_x_range: (f64, f64),
    /// Spatial resolutions, coarse to fine.
    pub levels: Vec<usize>,
    pub pulse: PulseSpec,
    /// Interior probe source in strip coordinates; drives the "perturbation
    /// is real" measurement, not the boundary maps.
    pub interior_source_strip: SourceSpec,
    pub exterior_source: SourceSpec,
    /// Source placed entirely after the cutoff's active window, so the two
    /// runs never read differing coefficients with nonzero data.
    pub case1_source: SourceSpec,
    pub probes: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareLevel {
    pub nx: usize,
    pub nt_strip: usize,
    pub dt_strip: f64,
    /// sup |Lambda_g phi - Lambda_g' phi| over both walls.
    pub d_bdy: f64,
    /// sup norm of the base Neumann response, the comparison scale.
    pub dn_scale: f64,
    /// max |L_g f - L_g' f| over exterior probes.
    pub d_ext: f64,
    pub d_ext_case1: f64,
}

/// Finest-level Neumann traces kept for CSV export; not part of the JSON
/// report.
#[derive(Debug, Clone)]
pub struct FinestDnTraces {
    pub base_left: BoundaryTrace,
    pub base_right: BoundaryTrace,
    pub blended_left: BoundaryTrace,
    pub blended_right: BoundaryTrace,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub scenario: String,
    pub levels: Vec<CompareLevel>,
    pub d_bdy_ratios: Vec<f64>,
    pub d_ext_ratios: Vec<f64>,
    /// max |u_g - u_g'| over the causal-future hull, finest level, interior
    /// probe run.
    pub d_int: f64,
    pub d_bdy_finest: f64,
    pub dn_scale_finest: f64,
    pub d_ext_case1_max: f64,
    #[serde(skip)]
    pub finest_traces: Option<FinestDnTraces>,
    /// Decimated |u_g - u_g'| snapshot of the interior probe run in strip
    /// coordinates (t, xi, gap); CSV export only.
    #[serde(skip)]
    pub interior_gap_snapshot: Vec<(f64, f64, f64)>,
}

/// Which halves of the comparison to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompareMode {
    /// Boundary response gap plus the interior probe.
    Dn,
    /// Exterior source-to-solution gaps.
    Sts,
    Both,
}

/// Run the boundary-data comparison across refinement levels: identical
/// grids and inputs for both metrics at every level, Neumann-trace gaps and
/// exterior-probe gaps per level, and the interior gap at the finest level.
pub fn compare_maps(setup: &CompareSetup, mode: CompareMode) -> Result<ComparisonReport> {
    if setup.levels.is_empty() {
        return Err(Error::Config("no refinement levels given".to_string()));
    }
    let run_dn = mode != CompareMode::Sts;
    let run_sts = mode != CompareMode::Dn;
    let mut levels = Vec::new();
    let mut d_int = 0.0_f64;
    let mut finest_traces = None;
    let mut gap_snapshot = Vec::new();
    let finest = *setup.levels.last().unwrap();
    for &nx in &setup.levels {
        // One grid for both metrics: the timestep obeys the tighter of the
        // two CFL bounds.
        let strip_grid = WaveGrid::from_cfl(
            "strip",
            &[&setup.strip_g, &setup.strip_gp],
            setup.strip_t_range,
            (-1.0, 1.0),
            nx,
            CFL_SAFETY,
        )?;
        let mut d_bdy = 0.0_f64;
        let mut dn_scale = 0.0_f64;
        if run_dn {
            let pulse = setup.pulse.clone();
            let (left, right) = match setup.pulse.side {
                Side::Left => (
                    BoundaryTrace::dirichlet_from_fn(&strip_grid, Side::Left, &|t| {
                        pulse.eval(t)
                    }),
                    BoundaryTrace::zero(&strip_grid, Side::Right),
                ),
                Side::Right => (
                    BoundaryTrace::zero(&strip_grid, Side::Left),
                    BoundaryTrace::dirichlet_from_fn(&strip_grid, Side::Right, &|t| {
                        pulse.eval(t)
                    }),
                ),
            };
            let dn_g = dn_map(&setup.strip_g, &strip_grid, &left, &right)?;
            let dn_gp = dn_map(&setup.strip_gp, &strip_grid, &left, &right)?;
            for (a, b) in [(&dn_g.left, &dn_gp.left), (&dn_g.right, &dn_gp.right)] {
                for (va, vb) in a.values.iter().zip(&b.values) {
                    d_bdy = d_bdy.max((va - vb).abs());
                }
            }
            dn_scale = dn_g.left.sup_norm().max(dn_g.right.sup_norm());
            if nx == finest {
                finest_traces = Some(FinestDnTraces {
                    base_left: dn_g.left.clone(),
                    base_right: dn_g.right.clone(),
                    blended_left: dn_gp.left.clone(),
                    blended_right: dn_gp.right.clone(),
                });
            }
        }
        let mut d_ext = 0.0_f64;
        let mut d_ext_case1 = 0.0_f64;
        if run_sts {
            // Exterior source-to-solution gap on the ambient rectangle.
            let ambient_grid = WaveGrid::from_cfl(
                "ambient",
                &[&setup.ambient_g, &setup.ambient_gp],
                setup.ambient_t_range,
                setup.ambient_x_range,
                nx,
                CFL_SAFETY,
            )?;
            let s_g = source_to_solution(
                &setup.ambient_g,
                &setup.cylinder,
                &setup.exterior_source,
                &ambient_grid,
                &setup.probes,
            )?;
            let s_gp = source_to_solution(
                &setup.ambient_gp,
                &setup.cylinder,
                &setup.exterior_source,
                &ambient_grid,
                &setup.probes,
            )?;
            d_ext = s_g
                .iter()
                .zip(&s_gp)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0_f64, f64::max);
            let c_g = source_to_solution(
                &setup.ambient_g,
                &setup.cylinder,
                &setup.case1_source,
                &ambient_grid,
                &setup.probes,
            )?;
            let c_gp = source_to_solution(
                &setup.ambient_gp,
                &setup.cylinder,
                &setup.case1_source,
                &ambient_grid,
                &setup.probes,
            )?;
            d_ext_case1 = c_g
                .iter()
                .zip(&c_gp)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0_f64, f64::max);
        }
        if run_dn && nx == finest {
            // Interior probe: same strip grid, zero walls, source inside
            // the hidden region overlapping the cutoff.
            let zl = BoundaryTrace::zero(&strip_grid, Side::Left);
            let zr = BoundaryTrace::zero(&strip_grid, Side::Right);
            let u_g = solve_ibvp_with_source(
                &setup.strip_g,
                &strip_grid,
                &zl,
                &zr,
                &setup.interior_source_strip,
            )?;
            let u_gp = solve_ibvp_with_source(
                &setup.strip_gp,
                &strip_grid,
                &zl,
                &zr,
                &setup.interior_source_strip,
            )?;
            for n in 0..strip_grid.nt {
                for j in 0..strip_grid.nx {
                    let q = setup
                        .strip_to_ambient
                        .forward(&[strip_grid.t(n), strip_grid.x(j)]);
                    if (setup.future_hull)(&q) && setup.cylinder.f(&q) < 0.0 {
                        d_int = d_int.max((u_g.at(n, j) - u_gp.at(n, j)).abs());
                    }
                }
            }
            let stride_t = (strip_grid.nt / 128).max(1);
            let stride_x = (strip_grid.nx / 128).max(1);
            for n in (0..strip_grid.nt).step_by(stride_t) {
                for j in (0..strip_grid.nx).step_by(stride_x) {
                    gap_snapshot.push((
                        strip_grid.t(n),
                        strip_grid.x(j),
                        (u_g.at(n, j) - u_gp.at(n, j)).abs(),
                    ));
                }
            }
        }
        levels.push(CompareLevel {
            nx,
            nt_strip: strip_grid.nt,
            dt_strip: strip_grid.dt(),
            d_bdy,
            dn_scale,
            d_ext,
            d_ext_case1,
        });
    }
    let ratio = |vals: Vec<f64>| -> Vec<f64> {
        vals.windows(2).map(|w| w[0] / w[1]).collect()
    };
    let d_bdy_ratios = ratio(levels.iter().map(|l| l.d_bdy).collect());
    let d_ext_ratios = ratio(levels.iter().map(|l| l.d_ext).collect());
    let last = levels.last().unwrap();
    Ok(ComparisonReport {
        scenario: setup.label.clone(),
        d_bdy_finest: last.d_bdy,
        dn_scale_finest: last.dn_scale,
        d_ext_case1_max: levels.iter().map(|l| l.d_ext_case1).fold(0.0, f64::max),
        levels,
        d_bdy_ratios,
        d_ext_ratios,
        d_int,
        finest_traces,
        interior_gap_snapshot: gap_snapshot,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spacetimes::{flrw_bounce, minkowski, slab_cylinder};
    use approx::assert_abs_diff_eq;

    fn mink_grid(t_range: (f64, f64), x_range: (f64, f64), nx: usize) -> WaveGrid {
        let m = minkowski(1).unwrap();
        WaveGrid::from_cfl("test", &[&m], t_range, x_range, nx, CFL_SAFETY).unwrap()
    }

    /// C^5 bump with exact compact support on |q| < 1.
    fn poly_bump(q: f64) -> f64 {
        if q.abs() >= 1.0 {
            0.0
        } else {
            (1.0 - q * q).powi(6)
        }
    }

    fn poly_bump_deriv(q: f64) -> f64 {
        if q.abs() >= 1.0 {
            0.0
        } else {
            -12.0 * q * (1.0 - q * q).powi(5)
        }
    }

    #[test]
    fn cfl_minkowski_and_flrw() {
        let m = minkowski(1).unwrap();
        let dt = cfl_timestep(&m, (0.0, 1.0), (-1.0, 1.0), 101).unwrap();
        assert_abs_diff_eq!(dt, 0.5 * 0.02, epsilon = 1e-12);
        // FLRW speeds 1/cosh(Ht) peak at t = 0.
        let f = flrw_bounce(1.0, 1).unwrap();
        let dt = cfl_timestep(&f, (-1.0, 1.0), (-1.0, 1.0), 101).unwrap();
        assert_abs_diff_eq!(dt, 0.5 * 0.02, epsilon = 1e-6);
        // Strip chart speeds stay finite and positive.
        let strip = crate::geometry::pullback_metric(
            &crate::spacetimes::strip_chart_map(2.0),
            &m,
            "strip",
        );
        let c = max_characteristic_speed(&[&strip], (-2.0, 2.0), (-1.0, 1.0)).unwrap();
        assert!(c > 0.0 && c < 1.0, "strip c_max = {c}");
    }

    #[test]
    fn zero_source_gives_zero_field() {
        let grid = mink_grid((0.0, 1.0), (-2.0, 2.0), 64);
        let m = minkowski(1).unwrap();
        let field = solve_cauchy(&m, &grid, &SourceSpec::zero()).unwrap();
        assert_eq!(field.max_abs(), 0.0);
    }

    #[test]
    fn finite_propagation_support() {
        let m = minkowski(1).unwrap();
        let grid = mink_grid((0.0, 1.2), (-6.0, 6.0), 301);
        let src = SourceSpec::bump((0.3, 0.0), 0.2, 1.0);
        let field = solve_cauchy(&m, &grid, &src).unwrap();
        let peak = field.max_abs();
        assert!(peak > 1e-4);
        // Outside the numerical cone of the support the field is zero to
        // rounding: |x| > 0.2 + grid_speed * (t - 0.1) + 2 dx.
        let speed = grid.grid_speed();
        for n in 0..grid.nt {
            let t = grid.t(n);
            let reach = 0.2 + speed * (t - 0.1).max(0.0) + 2.0 * grid.dx();
            for j in 0..grid.nx {
                if grid.x(j).abs() > reach {
                    assert!(
                        field.at(n, j).abs() <= 1e-14 * peak.max(1.0),
                        "leak at ({t}, {})",
                        grid.x(j)
                    );
                }
            }
        }
    }

    #[test]
    fn manufactured_solution_second_order() {
        // u* Gaussian; Box u* = u*_tt - u*_xx has the closed form below.
        let m = minkowski(1).unwrap();
        let sigma = 0.4;
        let center = (1.6, 0.0);
        let u_star = move |t: f64, x: f64| {
            let dt = t - center.0;
            let dx = x - center.1;
            (-(dt * dt + dx * dx) / (sigma * sigma)).exp()
        };
        let f = move |t: f64, x: f64| {
            let dt = t - center.0;
            let dx = x - center.1;
            let s2 = sigma * sigma;
            4.0 * (dt * dt - dx * dx) / (s2 * s2) * u_star(t, x)
        };
        let mut errors = Vec::new();
        for nx in [129usize, 257, 513] {
            let grid = mink_grid((0.0, 2.2), (-8.0, 8.0), nx);
            let src = SourceSpec {
                eval: Arc::new(f),
                support: (
                    (center.0 - 8.0 * sigma, center.0 + 8.0 * sigma),
                    (center.1 - 8.0 * sigma, center.1 + 8.0 * sigma),
                ),
            };
            let field = solve_cauchy(&m, &grid, &src).unwrap();
            // Discrete L2 error over the final third of the run.
            let mut err2 = 0.0;
            let mut count = 0usize;
            for n in (2 * grid.nt / 3)..grid.nt {
                for j in 0..grid.nx {
                    let d = field.at(n, j) - u_star(grid.t(n), grid.x(j));
                    err2 += d * d;
                    count += 1;
                }
            }
            errors.push((err2 / count as f64).sqrt());
        }
        let r1 = errors[0] / errors[1];
        let r2 = errors[1] / errors[2];
        assert!(
            (3.0..=5.0).contains(&r1) && (3.0..=5.0).contains(&r2),
            "convergence ratios {r1:.2}, {r2:.2} (errors {errors:?})"
        );
    }

    #[test]
    fn manufactured_solution_on_strip_chart() {
        // The cross-term path, checked against the high-order reference
        // operator rather than a closed form.
        let a = 2.0;
        let m = minkowski(1).unwrap();
        let strip = crate::geometry::pullback_metric(
            &crate::spacetimes::strip_chart_map(a),
            &m,
            "strip",
        );
        let sigma = 0.35;
        let center = (0.8, 0.1);
        // Gaussian windowed by a smooth time ramp so the field vanishes
        // exactly on the start levels and the walls start quiet.
        let u_star = move |t: f64, x: f64| {
            let ramp = crate::spacetimes::smooth_step((0.35 - t) / 0.3);
            let dt = t - center.0;
            let dx = x - center.1;
            ramp * (-(dt * dt + dx * dx) / (sigma * sigma)).exp()
        };
        let mut errors = Vec::new();
        for nx in [65usize, 129, 257] {
            let grid = WaveGrid::from_cfl(
                "strip",
                &[&strip],
                (0.0, 1.6),
                (-0.9, 0.9),
                nx,
                CFL_SAFETY,
            )
            .unwrap();
            let strip_for_src = strip.clone();
            let src = SourceSpec {
                eval: Arc::new(move |t, x| {
                    box_operator_reference(&strip_for_src, &u_star, t, x, 2e-3).unwrap()
                }),
                support: (
                    (center.0 - 8.0 * sigma, center.0 + 8.0 * sigma),
                    (center.1 - 8.0 * sigma, center.1 + 8.0 * sigma),
                ),
            };
            // u* is not zero at the walls late in the run; impose matching
            // Dirichlet data so the comparison stays clean.
            let left =
                BoundaryTrace::dirichlet_from_fn(&grid, Side::Left, &move |t| u_star(t, -0.9));
            let right =
                BoundaryTrace::dirichlet_from_fn(&grid, Side::Right, &move |t| u_star(t, 0.9));
            let field = solve_ibvp_with_source(&strip, &grid, &left, &right, &src).unwrap();
            let mut err2 = 0.0;
            let mut count = 0usize;
            for n in (2 * grid.nt / 3)..grid.nt {
                for j in 0..grid.nx {
                    let d = field.at(n, j) - u_star(grid.t(n), grid.x(j));
                    err2 += d * d;
                    count += 1;
                }
            }
            errors.push((err2 / count as f64).sqrt());
        }
        let r1 = errors[0] / errors[1];
        let r2 = errors[1] / errors[2];
        assert!(
            (3.0..=5.2).contains(&r1) && (3.0..=5.2).contains(&r2),
            "strip convergence ratios {r1:.2}, {r2:.2} (errors {errors:?})"
        );
    }

    #[test]
    fn ibvp_dalembert_oracle() {
        // Constant-width slab: u(t,x) = pulse(t - (x + 1)) until reflection.
        let m = minkowski(1).unwrap();
        let pulse = |s: f64| poly_bump((s - 0.5) / 0.3);
        let mut errors = Vec::new();
        for nx in [101usize, 201, 401] {
            let grid = mink_grid((0.0, 1.1), (-1.0, 1.0), nx);
            let left = BoundaryTrace::dirichlet_from_fn(&grid, Side::Left, &pulse);
            let right = BoundaryTrace::zero(&grid, Side::Right);
            let field = solve_ibvp(&m, &grid, &left, &right).unwrap();
            let mut worst = 0.0_f64;
            for n in 0..grid.nt {
                for j in 0..grid.nx {
                    let expect = pulse(grid.t(n) - (grid.x(j) + 1.0));
                    worst = worst.max((field.at(n, j) - expect).abs());
                }
            }
            errors.push(worst);
        }
        assert!(errors[2] < 2e-3, "finest error {}", errors[2]);
        let r = errors[1] / errors[2];
        assert!(r > 2.5, "refinement ratio {r}");
        // Stability smoke: the field stays bounded by a small multiple of
        // the data over a long run.
        let grid = mink_grid((0.0, 3.0), (-1.0, 1.0), 101);
        let left = BoundaryTrace::dirichlet_from_fn(&grid, Side::Left, &pulse);
        let right = BoundaryTrace::zero(&grid, Side::Right);
        let field = solve_ibvp(&m, &grid, &left, &right).unwrap();
        assert!(field.max_abs() <= 10.0);
    }

    #[test]
    fn neumann_trace_travelling_wave() {
        let m = minkowski(1).unwrap();
        let pulse = |s: f64| poly_bump((s - 0.5) / 0.25);
        let dpulse = |s: f64| poly_bump_deriv((s - 0.5) / 0.25) / 0.25;
        let grid = mink_grid((0.0, 1.2), (-1.0, 1.0), 801);
        let left = BoundaryTrace::dirichlet_from_fn(&grid, Side::Left, &pulse);
        let right = BoundaryTrace::zero(&grid, Side::Right);
        let out = dn_map(&m, &grid, &left, &right).unwrap();
        assert!(out.left.normal_certificate <= 1e-10);
        // u = pulse(t - (x+1)): d_nu u at the left wall (nu = +d_x) is
        // -pulse'(t).
        let mut worst = 0.0_f64;
        for (k, t) in out.left.times.iter().enumerate() {
            if *t < 1.0 {
                worst = worst.max((out.left.values[k] + dpulse(*t)).abs());
            }
        }
        let scale = out.left.sup_norm();
        assert!(
            worst <= 6e-3 * scale.max(1.0),
            "worst {worst:.3e} scale {scale:.3}"
        );
    }

    #[test]
    fn trace_of_zero_field_and_linearity() {
        let m = minkowski(1).unwrap();
        let grid = mink_grid((0.0, 1.0), (-1.0, 1.0), 101);
        let zero_l = BoundaryTrace::zero(&grid, Side::Left);
        let zero_r = BoundaryTrace::zero(&grid, Side::Right);
        let out = dn_map(&m, &grid, &zero_l, &zero_r).unwrap();
        assert_eq!(out.left.sup_norm(), 0.0);
        assert_eq!(out.right.sup_norm(), 0.0);
        // dn(alpha phi) = alpha dn(phi) to rounding.
        let pulse = |t: f64| poly_bump((t - 0.45) / 0.2);
        let phi = BoundaryTrace::dirichlet_from_fn(&grid, Side::Left, &pulse);
        let phi3 = BoundaryTrace::dirichlet_from_fn(&grid, Side::Left, &|t| 3.0 * pulse(t));
        let a = dn_map(&m, &grid, &phi, &zero_r).unwrap();
        let b = dn_map(&m, &grid, &phi3, &zero_r).unwrap();
        let mut worst = 0.0_f64;
        for k in 0..grid.nt {
            worst = worst.max((b.left.values[k] - 3.0 * a.left.values[k]).abs());
        }
        assert!(worst <= 1e-12 * b.left.sup_norm().max(1.0));
    }

    #[test]
    fn dn_refinement_is_second_order() {
        // Successive DN traces on the hyperboloid strip contract by ~4x.
        let a = 2.0;
        let m = minkowski(1).unwrap();
        let strip = crate::geometry::pullback_metric(
            &crate::spacetimes::strip_chart_map(a),
            &m,
            "strip",
        );
        let pulse = |t: f64| poly_bump((t + 0.8) / 0.35);
        let mut traces = Vec::new();
        for nx in [257usize, 513, 1025] {
            let grid = WaveGrid::from_cfl(
                "strip",
                &[&strip],
                (-1.6, 0.6),
                (-1.0, 1.0),
                nx,
                CFL_SAFETY,
            )
            .unwrap();
            let left = BoundaryTrace::dirichlet_from_fn(&grid, Side::Left, &pulse);
            let right = BoundaryTrace::zero(&grid, Side::Right);
            let out = dn_map(&strip, &grid, &left, &right).unwrap();
            traces.push((grid, out.left));
        }
        // Compare each level against the next on the coarse time axis.
        let mut diffs = Vec::new();
        for k in 0..2 {
            let (coarse_grid, coarse) = &traces[k];
            let (_, fine) = &traces[k + 1];
            let mut worst = 0.0_f64;
            for (i, t) in coarse.times.iter().enumerate() {
                // Linear interpolation of the fine trace in time.
                let pos = (t - fine.times[0]) / (fine.times[1] - fine.times[0]);
                let idx = (pos.floor() as usize).min(fine.times.len() - 2);
                let w = pos - idx as f64;
                let fv = fine.values[idx] * (1.0 - w) + fine.values[idx + 1] * w;
                let margin = 3.0 * coarse_grid.dt();
                if *t > coarse.times[0] + margin
                    && *t < coarse.times[coarse.times.len() - 1] - margin
                {
                    worst = worst.max((coarse.values[i] - fv).abs());
                }
            }
            diffs.push(worst);
        }
        let ratio = diffs[0] / diffs[1];
        assert!(
            (3.0..=5.5).contains(&ratio),
            "DN refinement ratio {ratio:.2} (diffs {diffs:?})"
        );
    }

    #[test]
    fn source_to_solution_probes() {
        let m = minkowski(1).unwrap();
        let cyl = slab_cylinder(1.0, 1).unwrap();
        let grid = mink_grid((0.0, 1.5), (-8.0, 8.0), 401);
        let src = SourceSpec::bump((0.3, 3.0), 0.25, 1.0);
        // Probe inside the numerical cone sees signal; probe far outside is
        // zero to rounding; probes inside M are rejected.
        let probes = vec![(1.2, 2.6), (0.4, -5.0)];
        let vals = source_to_solution(&m, &cyl, &src, &grid, &probes).unwrap();
        assert!(vals[0].abs() > 1e-6);
        assert!(vals[1].abs() <= 1e-12);
        let bad = vec![(1.2, 0.0)];
        assert!(matches!(
            source_to_solution(&m, &cyl, &src, &grid, &bad),
            Err(Error::Data(_))
        ));
        // A source overlapping M is rejected.
        let overlapping = SourceSpec::bump((0.3, 0.9), 0.3, 1.0);
        assert!(matches!(
            source_to_solution(&m, &cyl, &overlapping, &grid, &probes),
            Err(Error::Data(_))
        ));
        // f = 0 gives zero probes.
        let vals = source_to_solution(&m, &cyl, &SourceSpec::zero(), &grid, &probes).unwrap();
        assert!(vals.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn cauchy_edge_contamination_rejected() {
        let m = minkowski(1).unwrap();
        let grid = mink_grid((0.0, 3.0), (-2.0, 2.0), 64);
        let src = SourceSpec::bump((0.2, 0.0), 0.3, 1.0);
        assert!(matches!(solve_cauchy(&m, &grid, &src), Err(Error::Grid(_))));
    }

    #[test]
    fn solver_is_bitwise_deterministic() {
        let m = minkowski(1).unwrap();
        let grid = mink_grid((0.0, 1.0), (-4.0, 4.0), 129);
        let src = SourceSpec::bump((0.3, 0.0), 0.2, 1.0);
        let f1 = solve_cauchy(&m, &grid, &src).unwrap();
        let f2 = solve_cauchy(&m, &grid, &src).unwrap();
        assert!(f1.values.iter().zip(&f2.values).all(|(a, b)| a == b));
    }

    #[test]
    fn compare_with_identical_metrics_gives_exact_zeros() {
        // Trivial blend: both sides run the same metric objects, so every
        // gap is zero to the bit through identical code paths.
        let a = 2.0;
        let m = minkowski(1).unwrap();
        let strip = crate::geometry::pullback_metric(
            &crate::spacetimes::strip_chart_map(a),
            &m,
            "strip",
        );
        let setup = CompareSetup {
            label: "trivial".to_string(),
            strip_g: strip.clone(),
            strip_gp: strip.clone(),
            ambient_g: m.clone(),
            ambient_gp: m.clone(),
            cylinder: crate::spacetimes::hyperboloid_cylinder(a, 1).unwrap(),
            strip_to_ambient: crate::spacetimes::strip_chart_map(a),
            future_hull: Arc::new(move |p: &[f64]| p[1].abs() < p[0] + 0.5 * a),
            strip_t_range: (-2.2, 1.8),
            ambient_t_range: (-1.6, 1.8),
            ambient_x_range: (-11.0, 13.0),
            levels: vec![64],
            pulse: PulseSpec {
                side: Side::Left,
                center: -1.2,
                width: 0.5,
                amp: 1.0,
            },
            interior_source_strip: SourceSpec::bump((-0.2, 0.0), 0.2, 1.0),
            exterior_source: SourceSpec::bump((-1.0, 4.2), 0.25, 1.0),
            case1_source: SourceSpec::bump((1.0, 4.5), 0.25, 1.0),
            probes: vec![(1.4, 4.5), (1.2, 3.6)],
        };
        let report = compare_maps(&setup, CompareMode::Both).unwrap();
        assert_eq!(report.d_bdy_finest, 0.0);
        assert_eq!(report.d_int, 0.0);
        assert_eq!(report.d_ext_case1_max, 0.0);
        assert!(report.levels.iter().all(|l| l.d_ext == 0.0));
        // The responses themselves are not degenerate.
        assert!(report.dn_scale_finest > 0.1);
    }

    #[test]
    fn strip_ibvp_stays_bounded() {
        // Energy smoke test from the curved-wall chart: a unit pulse never
        // drives the field beyond a small multiple of the data.
        let a = 2.0;
        let m = minkowski(1).unwrap();
        let strip = crate::geometry::pullback_metric(
            &crate::spacetimes::strip_chart_map(a),
            &m,
            "strip",
        );
        let grid = WaveGrid::from_cfl(
            "strip",
            &[&strip],
            (-2.0, 2.0),
            (-1.0, 1.0),
            129,
            CFL_SAFETY,
        )
        .unwrap();
        let pulse = |t: f64| poly_bump((t + 1.2) / 0.4);
        let left = BoundaryTrace::dirichlet_from_fn(&grid, Side::Left, &pulse);
        let right = BoundaryTrace::zero(&grid, Side::Right);
        let field = solve_ibvp(&strip, &grid, &left, &right).unwrap();
        assert!(field.max_abs() <= 10.0 * left.sup_norm());
        assert!(field.max_abs() > 0.1);
    }

    #[test]
    fn boundary_data_must_start_quiet() {
        let m = minkowski(1).unwrap();
        let grid = mink_grid((0.0, 1.0), (-1.0, 1.0), 64);
        let bad = BoundaryTrace::dirichlet_from_fn(&grid, Side::Left, &|_| 1.0);
        let right = BoundaryTrace::zero(&grid, Side::Right);
        assert!(matches!(
            solve_ibvp(&m, &grid, &bad, &right),
            Err(Error::Data(_))
        ));
    }
}
