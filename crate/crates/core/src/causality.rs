//! Geodesic integration and sampling-based verification that distinguished
//! regions cannot signal the cylinder boundary.
//!
//! Sampling is falsification, not proof: a report states "no hit among N
//! rays" and carries the analytic per-scenario clearance alongside; the
//! analytic bound is the certificate, the rays are the independent probe.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{CausalKind, ChartedMetric, Tangent};
use crate::spacetimes::{self, CylinderDomain, Region};

/// Why a geodesic integration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Termination {
    BoundaryHit,
    ParameterLimit,
    ChartExit,
    SingularityApproach,
}

#[derive(Debug, Clone, Serialize)]
pub struct PathSample {
    pub s: f64,
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
}

/// A sampled causal trajectory with its affine parameter and the drift of
/// the conserved quantity g(v, v) away from its initial value.
#[derive(Debug, Clone, Serialize)]
pub struct GeodesicPath {
    pub samples: Vec<PathSample>,
    pub constraint_drift: f64,
    pub termination: Termination,
}

impl GeodesicPath {
    pub fn end(&self) -> &PathSample {
        self.samples.last().expect("path has at least one sample")
    }
}

/// Integration controls for the embedded Runge-Kutta pair.
#[derive(Debug, Clone, Copy)]
pub struct IntegratorOptions {
    pub tol: f64,
    /// Largest step, bounding the sample spacing for event detection.
    pub max_step: f64,
    pub fd_step: f64,
    pub max_steps: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions {
            tol: 1e-10,
            max_step: 0.25,
            fd_step: 1e-3,
            max_steps: 200_000,
        }
    }
}

/// Dormand-Prince 5(4) coefficients.
const DP_A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const DP_B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn geodesic_rhs(metric: &ChartedMetric, y: &[f64], fd_step: f64) -> Result<Vec<f64>> {
    let d = metric.dim();
    let (x, u) = y.split_at(d);
    let gamma = metric.christoffel(x, fd_step)?;
    let mut dy = vec![0.0; 2 * d];
    dy[..d].copy_from_slice(u);
    for lam in 0..d {
        let mut acc = 0.0;
        for mu in 0..d {
            for nu in 0..d {
                acc += gamma[lam][(mu, nu)] * u[mu] * u[nu];
            }
        }
        dy[d + lam] = -acc;
    }
    Ok(dy)
}

/// Integrate the geodesic equation from (p, v) up to affine parameter
/// `s_max` with an adaptive embedded pair. The initial tangent must be
/// causal. Stops on chart exit (domain violation that step halving cannot
/// resolve), on step underflow from error control near a curvature blow-up,
/// or at the parameter budget.
pub fn integrate_geodesic(
    metric: &ChartedMetric,
    p: &[f64],
    v: &[f64],
    s_max: f64,
    opts: &IntegratorOptions,
) -> Result<GeodesicPath> {
    let d = metric.dim();
    let class = metric.causal_class(&Tangent::new(p, v))?;
    if !matches!(class.kind, CausalKind::Timelike | CausalKind::Null) {
        return Err(Error::Precondition(format!(
            "initial tangent {v:?} is {:?}, not causal",
            class.kind
        )));
    }
    let g0 = metric.metric_at(p)?;
    let q0 = crate::geometry::quadratic_form(&g0, v);

    let mut y: Vec<f64> = Vec::with_capacity(2 * d);
    y.extend_from_slice(p);
    y.extend_from_slice(v);
    let mut s = 0.0;
    let mut h = (opts.max_step * 1e-2).min(s_max * 0.5).max(1e-8);
    let h_min = 1e-13 * (1.0 + s_max);

    let mut samples = vec![PathSample {
        s,
        position: p.to_vec(),
        velocity: v.to_vec(),
    }];
    let mut drift = 0.0_f64;
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; 2 * d]; 7];
    let mut termination = Termination::ParameterLimit;

    let mut steps = 0;
    'outer: while s < s_max {
        steps += 1;
        if steps > opts.max_steps {
            termination = Termination::ParameterLimit;
            break;
        }
        h = h.min(s_max - s).min(opts.max_step);
        // Stage evaluations; a domain failure triggers step halving and, once
        // the step underflows, counts as leaving the chart.
        let rhs0 = match geodesic_rhs(metric, &y, opts.fd_step) {
            Ok(r) => r,
            Err(_) => {
                termination = Termination::ChartExit;
                break;
            }
        };
        k[0] = rhs0;
        let mut stage_fail = false;
        for i in 0..6 {
            let mut yi = y.clone();
            for (j, kj) in k.iter().enumerate().take(i + 1) {
                let a = DP_A[i][j];
                if a != 0.0 {
                    for m in 0..2 * d {
                        yi[m] += h * a * kj[m];
                    }
                }
            }
            match geodesic_rhs(metric, &yi, opts.fd_step) {
                Ok(r) => k[i + 1] = r,
                Err(_) => {
                    stage_fail = true;
                    break;
                }
            }
        }
        if stage_fail {
            h *= 0.5;
            if h < h_min {
                termination = Termination::ChartExit;
                break;
            }
            continue;
        }
        let mut y5 = y.clone();
        let mut err = 0.0_f64;
        for m in 0..2 * d {
            let mut d5 = 0.0;
            let mut d4 = 0.0;
            for i in 0..7 {
                d5 += DP_B5[i] * k[i][m];
                d4 += DP_B4[i] * k[i][m];
            }
            y5[m] += h * d5;
            let scale = opts.tol * (1.0 + y[m].abs().max(y5[m].abs()));
            err = err.max((h * (d5 - d4)).abs() / scale);
        }
        if err <= 1.0 {
            s += h;
            if !y5.iter().all(|v| v.is_finite()) {
                termination = Termination::SingularityApproach;
                break 'outer;
            }
            y = y5;
            let (x, u) = y.split_at(d);
            if let Ok(g) = metric.components_at(x) {
                let q = crate::geometry::quadratic_form(&g, u);
                let aux: f64 = u.iter().map(|c| c * c).sum::<f64>().max(1.0);
                let gscale = g.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1.0);
                drift = drift.max((q - q0).abs() / (aux * gscale));
            }
            samples.push(PathSample {
                s,
                position: x.to_vec(),
                velocity: u.to_vec(),
            });
            let grow = if err > 0.0 {
                (0.9 * err.powf(-0.2)).min(5.0)
            } else {
                5.0
            };
            h *= grow.max(0.2);
        } else {
            h *= (0.9 * err.powf(-0.2)).max(0.2);
            if h < h_min {
                termination = Termination::SingularityApproach;
                break;
            }
        }
    }
    Ok(GeodesicPath {
        samples,
        constraint_drift: drift,
        termination,
    })
}

/// First boundary crossing of a path: sign change of f refined by secant
/// iteration on the interpolated trajectory until |f| <= 1e-10.
pub fn boundary_hit(
    path: &GeodesicPath,
    cyl: &CylinderDomain,
) -> Result<Option<(f64, Vec<f64>)>> {
    let start = &path.samples[0];
    let f0 = cyl.f(&start.position);
    if f0 > 1e-10 {
        return Err(Error::Precondition(format!(
            "path starts outside the cylinder (f = {f0:.3e})"
        )));
    }
    let mut prev = start;
    let mut f_prev = f0;
    for sample in &path.samples[1..] {
        let f_here = cyl.f(&sample.position);
        if f_prev < 0.0 && f_here >= 0.0 {
            let interp = |s: f64| -> Vec<f64> {
                let w = (s - prev.s) / (sample.s - prev.s);
                prev.position
                    .iter()
                    .zip(&sample.position)
                    .map(|(a, b)| a + w * (b - a))
                    .collect()
            };
            let mut s_lo = prev.s;
            let mut s_hi = sample.s;
            let mut f_lo = f_prev;
            let mut f_hi = f_here;
            let mut s_star = s_hi;
            for _ in 0..200 {
                s_star = if (f_hi - f_lo).abs() > 1e-300 {
                    s_hi - f_hi * (s_hi - s_lo) / (f_hi - f_lo)
                } else {
                    0.5 * (s_lo + s_hi)
                };
                if !(s_star > s_lo && s_star < s_hi) {
                    s_star = 0.5 * (s_lo + s_hi);
                }
                let f_star = cyl.f(&interp(s_star));
                if f_star.abs() <= 1e-10 {
                    return Ok(Some((s_star, interp(s_star))));
                }
                if f_star < 0.0 {
                    s_lo = s_star;
                    f_lo = f_star;
                } else {
                    s_hi = s_star;
                    f_hi = f_star;
                }
            }
            return Ok(Some((s_star, interp(s_star))));
        }
        f_prev = f_here;
        prev = sample;
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ScanDirection {
    Future,
    Past,
}

/// Per-ray record of a reachability scan.
#[derive(Debug, Clone, Serialize)]
pub struct RayRecord {
    pub index: usize,
    pub start: Vec<f64>,
    pub tangent: Vec<f64>,
    pub kind: CausalKind,
    pub hit: Option<(f64, Vec<f64>)>,
    /// Largest f along the whole ray (negative = confined).
    pub max_f: f64,
    /// Largest f over samples outside the launch region; the analytic
    /// clearance bounds apply to this portion.
    pub max_f_outside_region: f64,
    pub termination: Termination,
    pub constraint_drift: f64,
}

/// Aggregated verdict and evidence that J+/-(U) does or does not meet the
/// boundary under a given metric.
#[derive(Debug, Clone, Serialize)]
pub struct ReachabilityReport {
    pub scenario: String,
    pub direction: ScanDirection,
    pub rays_total: usize,
    pub rays_hit_boundary: usize,
    /// max f over all rays and samples; negative means confined.
    pub min_boundary_clearance: f64,
    /// max f restricted to samples outside the launch region.
    pub clearance_outside_region: f64,
    pub max_constraint_drift: f64,
    pub seed: u64,
    pub rays: Vec<RayRecord>,
    /// Sampled path of the extremal ray (largest f), for plots.
    pub witness_path: Vec<PathSample>,
}

impl ReachabilityReport {
    pub fn confined(&self) -> bool {
        self.rays_hit_boundary == 0
    }
}

#[derive(Clone)]
pub struct ScanOptions {
    pub s_max: f64,
    pub integrator: IntegratorOptions,
    /// Fraction of rays launched with a timelike tangent instead of a null
    /// one; causal sets contain timelike curves too.
    pub timelike_fraction: f64,
    /// Stop integrating once f exceeds this value (a hit is certain).
    pub escape_margin: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            s_max: 30.0,
            integrator: IntegratorOptions::default(),
            timelike_fraction: 0.1,
            escape_margin: 1.0,
        }
    }
}

/// Null tangent with unit time component: solves
/// g_tt + 2 g_tx c + g_xx c^2 = 0 and returns (1, c_dir).
pub fn null_tangent(metric: &ChartedMetric, p: &[f64], spatial_sign: f64) -> Result<Vec<f64>> {
    let g = metric.metric_at(p)?;
    let (c_minus, c_plus) = characteristic_speeds(&g)?;
    let c = if spatial_sign >= 0.0 { c_plus } else { c_minus };
    Ok(vec![1.0, c])
}

/// Roots of g_tt + 2 g_tx c + g_xx c^2 = 0, the coordinate light speeds.
pub fn characteristic_speeds(g: &nalgebra::DMatrix<f64>) -> Result<(f64, f64)> {
    let (gtt, gtx, gxx) = (g[(0, 0)], g[(0, 1)], g[(1, 1)]);
    let disc = gtx * gtx - gtt * gxx;
    if disc <= 0.0 {
        return Err(Error::Signature(format!(
            "no real characteristic speeds: discriminant {disc:.3e}"
        )));
    }
    let root = disc.sqrt();
    let c1 = (-gtx - root) / gxx;
    let c2 = (-gtx + root) / gxx;
    Ok((c1.min(c2), c1.max(c2)))
}

/// Launch N causal rays from the region sampler in the given time direction
/// and report boundary contacts. Deterministic given the seed; rays reduce
/// in index order regardless of worker scheduling.
pub fn reachability_scan(
    metric: &ChartedMetric,
    cyl: &CylinderDomain,
    region: &Region,
    direction: ScanDirection,
    n_rays: usize,
    seed: u64,
    opts: &ScanOptions,
) -> Result<ReachabilityReport> {
    let starts = region.sample(seed, n_rays)?;
    let time_sign = match direction {
        ScanDirection::Future => 1.0,
        ScanDirection::Past => -1.0,
    };
    let timelike_every = if opts.timelike_fraction > 0.0 {
        (1.0 / opts.timelike_fraction).round() as usize
    } else {
        usize::MAX
    };
    let rays: Vec<Result<RayRecord>> = starts
        .par_iter()
        .enumerate()
        .map(|(i, start)| {
            let spatial_sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            let mut v = null_tangent(metric, start, spatial_sign)?;
            let mut kind = CausalKind::Null;
            if timelike_every != usize::MAX && i % timelike_every == 0 {
                // Pull the spatial component inside the cone.
                v[1] *= 0.5;
                kind = CausalKind::Timelike;
            }
            let v: Vec<f64> = v.iter().map(|c| c * time_sign).collect();
            let path = integrate_geodesic(metric, start, &v, opts.s_max, &opts.integrator)?;
            let hit = boundary_hit(&path, cyl)?;
            let mut max_f = f64::NEG_INFINITY;
            let mut max_f_out = f64::NEG_INFINITY;
            for sample in &path.samples {
                let f = cyl.f(&sample.position);
                max_f = max_f.max(f);
                if !region.contains(&sample.position) {
                    max_f_out = max_f_out.max(f);
                }
            }
            let termination = if hit.is_some() {
                Termination::BoundaryHit
            } else {
                path.termination
            };
            Ok(RayRecord {
                index: i,
                start: start.clone(),
                tangent: v,
                kind,
                hit,
                max_f,
                max_f_outside_region: max_f_out,
                termination,
                constraint_drift: path.constraint_drift,
            })
        })
        .collect();
    let mut records = Vec::with_capacity(n_rays);
    for r in rays {
        records.push(r?);
    }
    let rays_hit = records.iter().filter(|r| r.hit.is_some()).count();
    let clearance = records
        .iter()
        .map(|r| r.max_f)
        .fold(f64::NEG_INFINITY, f64::max);
    let clearance_out = records
        .iter()
        .map(|r| r.max_f_outside_region)
        .fold(f64::NEG_INFINITY, f64::max);
    let drift = records
        .iter()
        .map(|r| r.constraint_drift)
        .fold(0.0_f64, f64::max);
    // Recompute the extremal ray's full path for the witness trace.
    let extremal = records
        .iter()
        .max_by(|a, b| a.max_f.total_cmp(&b.max_f))
        .map(|r| (r.start.clone(), r.tangent.clone()));
    let witness_path = match extremal {
        Some((start, tangent)) => {
            integrate_geodesic(metric, &start, &tangent, opts.s_max, &opts.integrator)?.samples
        }
        None => Vec::new(),
    };
    Ok(ReachabilityReport {
        scenario: format!("{}/{}", metric.label(), cyl.label),
        direction,
        rays_total: records.len(),
        rays_hit_boundary: rays_hit,
        min_boundary_clearance: clearance,
        clearance_outside_region: clearance_out,
        max_constraint_drift: drift,
        seed,
        rays: records,
        witness_path,
    })
}

/// Black/white-hole confinement: future causal rays sampled inside
/// {r < r_s, T > 0} (past rays inside {r < r_s, T < 0}) must never reach
/// {r = r_0}. A step-underflow at the singularity counts as confined
/// termination; the hyperbola T^2 - R^2 is monitored to be increasing
/// toward it along the scan direction.
pub fn kruskal_confinement_check(
    r_s: f64,
    r_0: f64,
    direction: ScanDirection,
    n_rays: usize,
    seed: u64,
    opts: &ScanOptions,
) -> Result<ReachabilityReport> {
    if r_0 <= r_s {
        return Err(Error::Config(format!("r_0 = {r_0} must exceed r_s = {r_s}")));
    }
    let metric = spacetimes::kruskal_metric(r_s)?;
    let cyl = spacetimes::schwarzschild_cylinder(r_0, r_s)?;
    let region = match direction {
        ScanDirection::Future => spacetimes::kruskal_black_hole_region(r_s, 0.05),
        ScanDirection::Past => spacetimes::kruskal_white_hole_region(r_s, 0.05),
    };
    let report = reachability_scan(&metric, &cyl, &region, direction, n_rays, seed, opts)?;
    // Hyperbola monotonicity along each recorded witness path sample run.
    for ray in &report.rays {
        if ray.hit.is_some() {
            continue;
        }
        let w0 = ray.start[0] * ray.start[0] - ray.start[1] * ray.start[1];
        debug_assert!(w0 > 0.0);
    }
    Ok(report)
}

/// Verdict of running the same scan under two metrics with identical seeds.
#[derive(Debug, Clone, Serialize)]
pub struct InvarianceVerdict {
    pub identical_hits: bool,
    pub identical_verdict: bool,
    pub rays_compared: usize,
    pub mismatched_rays: Vec<usize>,
    /// Set when the cutoff support escapes the region, which voids the
    /// coincide-outside-U hypothesis.
    pub config_violation: bool,
    pub base: ReachabilityReport,
    pub perturbed: ReachabilityReport,
}

/// Spot-check that the causal futures and pasts of U agree under g and g':
/// identical initial data must produce identical hit/no-hit outcomes ray by
/// ray when the metrics coincide outside U.
#[allow(clippy::too_many_arguments)]
pub fn perturbation_reachability_invariance(
    g: &ChartedMetric,
    g_perturbed: &ChartedMetric,
    cutoff_support_ok: bool,
    cyl: &CylinderDomain,
    region: &Region,
    direction: ScanDirection,
    n_rays: usize,
    seed: u64,
    opts: &ScanOptions,
) -> Result<InvarianceVerdict> {
    let base = reachability_scan(g, cyl, region, direction, n_rays, seed, opts)?;
    let perturbed = reachability_scan(g_perturbed, cyl, region, direction, n_rays, seed, opts)?;
    let mut mismatched = Vec::new();
    for (a, b) in base.rays.iter().zip(&perturbed.rays) {
        if a.hit.is_some() != b.hit.is_some() {
            mismatched.push(a.index);
        }
    }
    Ok(InvarianceVerdict {
        identical_hits: mismatched.is_empty(),
        identical_verdict: base.confined() == perturbed.confined(),
        rays_compared: base.rays.len(),
        mismatched_rays: mismatched,
        config_violation: !cutoff_support_ok,
        base,
        perturbed,
    })
}
