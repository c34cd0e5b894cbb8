//! Catalog of explicit spacetimes, cylinder domains with timelike boundary,
//! distinguished interior regions, and the blended metric
//! g' = (1 - chi) g + chi h.
//!
//! Everything here is a pure constructor; samplers take explicit seeds.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{ChartMap, ChartedMetric, FoliatedMetric};

pub type ScalarField = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type CovectorField = Arc<dyn Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync>;
pub type IndicatorField = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;

/// Boundary-defining function machinery: M = {f <= 0}, boundary {f = 0}.
#[derive(Clone)]
pub struct CylinderDomain {
    pub label: String,
    f: ScalarField,
    df: CovectorField,
}

impl CylinderDomain {
    pub fn new(label: &str, f: ScalarField, df: CovectorField) -> Self {
        CylinderDomain {
            label: label.to_string(),
            f,
            df,
        }
    }

    pub fn f(&self, p: &[f64]) -> f64 {
        (self.f)(p)
    }

    pub fn df(&self, p: &[f64]) -> Result<Vec<f64>> {
        (self.df)(p)
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        self.f(p) <= 0.0
    }

    /// g(df, df) at a boundary point; positive values certify a timelike
    /// boundary there.
    pub fn boundary_norm2(&self, metric: &ChartedMetric, p: &[f64]) -> Result<f64> {
        metric.covector_norm2(p, &self.df(p)?)
    }
}

/// An open interior region with a seeded rejection sampler.
#[derive(Clone)]
pub struct Region {
    pub label: String,
    indicator: IndicatorField,
    bbox: Vec<(f64, f64)>,
}

impl Region {
    pub fn new(label: &str, indicator: IndicatorField, bbox: Vec<(f64, f64)>) -> Self {
        Region {
            label: label.to_string(),
            indicator,
            bbox,
        }
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        (self.indicator)(p)
    }

    pub fn bbox(&self) -> &[(f64, f64)] {
        &self.bbox
    }

    /// Deterministic rejection sampler over the bounding box.
    pub fn sample(&self, seed: u64, n: usize) -> Result<Vec<Vec<f64>>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(n);
        let budget = 10_000usize.saturating_mul(n.max(1));
        let mut attempts = 0;
        while out.len() < n {
            attempts += 1;
            if attempts > budget {
                return Err(Error::Config(format!(
                    "sampler for region '{}' exhausted {} attempts",
                    self.label, budget
                )));
            }
            let p: Vec<f64> = self
                .bbox
                .iter()
                .map(|(lo, hi)| rng.random_range(*lo..*hi))
                .collect();
            if (self.indicator)(&p) {
                out.push(p);
            }
        }
        Ok(out)
    }
}

/// Minkowski space in natural coordinates: diag(-1, 1, ..., 1).
pub fn minkowski(n: usize) -> Result<ChartedMetric> {
    if n < 1 {
        return Err(Error::Config(format!("spatial dimension {n} < 1")));
    }
    let d = 1 + n;
    let components = Arc::new(move |_p: &[f64]| {
        let mut g = DMatrix::<f64>::identity(d, d);
        g[(0, 0)] = -1.0;
        Ok(g)
    });
    let orientation = Arc::new(move |_p: &[f64]| {
        let mut t = DVector::<f64>::zeros(d);
        t[0] = 1.0;
        Ok(t)
    });
    let derivs = Arc::new(move |_p: &[f64]| Ok(vec![DMatrix::<f64>::zeros(d, d); d]));
    Ok(
        ChartedMetric::new("minkowski", &coord_names(n), components, orientation)
            .with_exact_derivs(derivs),
    )
}

fn coord_names(n: usize) -> Vec<&'static str> {
    const NAMES: [&str; 4] = ["t", "x", "y", "z"];
    NAMES[..=n].to_vec()
}

/// Half-width b(t) of the hyperboloid cylinder: the positive root of
/// x^2 - a x - t^2 = 0.
pub fn hyperboloid_half_width(a: f64, t: f64) -> f64 {
    0.5 * (a + (a * a + 4.0 * t * t).sqrt())
}

/// Cylinder bounded by the hyperboloid |x|^2 - a|x| - t^2 = 0 in Minkowski
/// space. The differential of f has a kink at x = 0; evaluation there is an
/// error while f itself extends continuously as -t^2.
pub fn hyperboloid_cylinder(a: f64, n: usize) -> Result<CylinderDomain> {
    if a <= 0.0 {
        return Err(Error::Config(format!("hyperboloid parameter a = {a} <= 0")));
    }
    if n < 1 {
        return Err(Error::Config(format!("spatial dimension {n} < 1")));
    }
    let f = Arc::new(move |p: &[f64]| {
        let t = p[0];
        let r: f64 = p[1..].iter().map(|x| x * x).sum::<f64>().sqrt();
        r * r - a * r - t * t
    });
    let df = Arc::new(move |p: &[f64]| {
        let t = p[0];
        let r: f64 = p[1..].iter().map(|x| x * x).sum::<f64>().sqrt();
        if r == 0.0 {
            return Err(Error::Domain(
                "df undefined at x = 0 (kink of |x|)".to_string(),
            ));
        }
        let mut d = vec![-2.0 * t];
        for x in &p[1..] {
            d.push(2.0 * x - a * x / r);
        }
        Ok(d)
    });
    Ok(CylinderDomain::new("hyperboloid", f, df))
}

/// The open diamond |t| + |x| < a/2, unreachable from the hyperboloid
/// boundary in both time directions.
pub fn diamond_region(a: f64, n: usize) -> Region {
    let indicator = Arc::new(move |p: &[f64]| {
        let t = p[0].abs();
        let r: f64 = p[1..].iter().map(|x| x * x).sum::<f64>().sqrt();
        t + r < 0.5 * a
    });
    let mut bbox = vec![(-0.5 * a, 0.5 * a)];
    for _ in 0..n {
        bbox.push((-0.5 * a, 0.5 * a));
    }
    Region::new("diamond", indicator, bbox)
}

/// Vertical slab |x| <= w in Minkowski space; a reachable negative control.
pub fn slab_cylinder(half_width: f64, n: usize) -> Result<CylinderDomain> {
    if half_width <= 0.0 {
        return Err(Error::Config(format!("slab half width {half_width} <= 0")));
    }
    if n < 1 {
        return Err(Error::Config(format!("spatial dimension {n} < 1")));
    }
    let f = Arc::new(move |p: &[f64]| {
        let r: f64 = p[1..].iter().map(|x| x * x).sum::<f64>().sqrt();
        r - half_width
    });
    let df = Arc::new(move |p: &[f64]| {
        let r: f64 = p[1..].iter().map(|x| x * x).sum::<f64>().sqrt();
        if r == 0.0 {
            return Err(Error::Domain("df undefined at x = 0".to_string()));
        }
        let mut d = vec![0.0];
        for x in &p[1..] {
            d.push(x / r);
        }
        Ok(d)
    });
    Ok(CylinderDomain::new("slab", f, df))
}

/// Big Bounce cosmology: -dt^2 + cosh^2(Ht) (Euclidean n-metric).
pub fn flrw_bounce(h_rate: f64, n: usize) -> Result<ChartedMetric> {
    if h_rate <= 0.0 {
        return Err(Error::Config(format!("expansion rate H = {h_rate} <= 0")));
    }
    if n < 1 {
        return Err(Error::Config(format!("spatial dimension {n} < 1")));
    }
    let d = 1 + n;
    let fol = FoliatedMetric::new(
        "flrw-bounce",
        &coord_names(n),
        Arc::new(|_p: &[f64]| 1.0),
        Arc::new(move |p: &[f64]| {
            let a2 = (h_rate * p[0]).cosh().powi(2);
            DMatrix::<f64>::identity(d - 1, d - 1) * a2
        }),
    );
    let derivs = Arc::new(move |p: &[f64]| {
        let mut out = vec![DMatrix::<f64>::zeros(d, d); d];
        let c = (h_rate * p[0]).cosh();
        let s = (h_rate * p[0]).sinh();
        for i in 1..d {
            out[0][(i, i)] = 2.0 * h_rate * c * s;
        }
        Ok(out)
    });
    Ok(fol.charted().with_exact_derivs(derivs))
}

/// Conformal time eta(t) = integral of sech(Ht'), ranging over (0, pi/H).
pub fn conformal_time(h_rate: f64, t: f64) -> f64 {
    // acot with range (-pi/2, 0) for negative arguments, (0, pi/2] else.
    let acot = |x: f64| (1.0 / x).atan();
    if t < 0.0 {
        -acot((h_rate * t).sinh()) / h_rate
    } else {
        (PI - acot((h_rate * t).sinh())) / h_rate
    }
}

/// Inverse of `conformal_time` by bracketed bisection plus Newton polish.
pub fn cosmic_time(h_rate: f64, eta: f64) -> Result<f64> {
    if !(eta > 0.0 && eta < PI / h_rate) {
        return Err(Error::Domain(format!(
            "eta = {eta} outside (0, {:.6})",
            PI / h_rate
        )));
    }
    // Expand a bracket around 0; eta is strictly increasing in t.
    let mut lo = -1.0 / h_rate;
    let mut hi = 1.0 / h_rate;
    while conformal_time(h_rate, lo) > eta {
        lo *= 2.0;
    }
    while conformal_time(h_rate, hi) < eta {
        hi *= 2.0;
    }
    let mut t = 0.5 * (lo + hi);
    for _ in 0..200 {
        let val = conformal_time(h_rate, t) - eta;
        if val == 0.0 {
            break;
        }
        if val > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        // eta'(t) = sech(Ht); Newton in t resolves the inverse even where
        // eta saturates and residuals in eta lose precision.
        let slope = 1.0 / (h_rate * t).cosh();
        let newton = t - val / slope;
        let next = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let step = (next - t).abs();
        t = next;
        if step <= 1e-14 * (1.0 + t.abs()) {
            break;
        }
    }
    let resid = (conformal_time(h_rate, t) - eta).abs();
    if resid <= 1e-12 * (1.0 + eta.abs()) {
        Ok(t)
    } else {
        Err(Error::Domain(format!(
            "cosmic_time failed to converge (residual {resid:.3e})"
        )))
    }
}

/// Chart map (eta, x) -> (t(eta), x) onto the bounce spacetime.
pub fn conformal_chart_map(h_rate: f64) -> ChartMap {
    ChartMap::new(
        "flrw-conformal-time",
        Arc::new(move |p: &[f64]| {
            let mut q = p.to_vec();
            q[0] = cosmic_time(h_rate, p[0]).expect("eta outside (0, pi/H)");
            q
        }),
        Arc::new(move |p: &[f64]| {
            let t = cosmic_time(h_rate, p[0]).expect("eta outside (0, pi/H)");
            let mut j = DMatrix::<f64>::identity(p.len(), p.len());
            // dt/deta = cosh(Ht)
            j[(0, 0)] = (h_rate * t).cosh();
            j
        }),
    )
    .with_domain(Arc::new(move |p: &[f64]| {
        p[0] > 0.0 && p[0] < PI / h_rate
    }))
    .with_inverse(Arc::new(move |q: &[f64]| {
        let mut p = q.to_vec();
        p[0] = conformal_time(h_rate, q[0]);
        p
    }))
}

/// Central region of the bounce cylinder |x| < R whose causal future misses
/// the boundary: |x| < eta(t) + R - pi/H.
pub fn flrw_future_confined_region(h_rate: f64, r_cyl: f64, t_window: f64) -> Region {
    let indicator = Arc::new(move |p: &[f64]| {
        let r: f64 = p[1..].iter().map(|x| x * x).sum::<f64>().sqrt();
        r < conformal_time(h_rate, p[0]) + r_cyl - PI / h_rate
    });
    Region::new(
        "flrw-cone-future",
        indicator,
        vec![(-t_window, t_window), (-r_cyl, r_cyl)],
    )
}

/// Region whose causal past misses the boundary: |x| < R - eta(t).
pub fn flrw_past_confined_region(h_rate: f64, r_cyl: f64, t_window: f64) -> Region {
    let indicator = Arc::new(move |p: &[f64]| {
        let r: f64 = p[1..].iter().map(|x| x * x).sum::<f64>().sqrt();
        r < r_cyl - conformal_time(h_rate, p[0])
    });
    Region::new(
        "flrw-cone-past",
        indicator,
        vec![(-t_window, t_window), (-r_cyl, r_cyl)],
    )
}

/// Cylinder |x| <= R in the bounce spacetime.
pub fn flrw_cylinder(r_cyl: f64, n: usize) -> Result<CylinderDomain> {
    let c = slab_cylinder(r_cyl, n)?;
    Ok(CylinderDomain::new(
        "flrw-cylinder",
        Arc::new(move |p: &[f64]| c.f(p)),
        {
            let c2 = slab_cylinder(r_cyl, n)?;
            Arc::new(move |p: &[f64]| c2.df(p))
        },
    ))
}

/// Solve (1 - r/r_s) e^{r/r_s} = w for the unique r > 0, given w < 1.
/// Bracketed bisection with Newton polish; residual below 1e-13.
pub fn kruskal_r(t_coord: f64, r_coord: f64, r_s: f64) -> Result<f64> {
    let w = t_coord * t_coord - r_coord * r_coord;
    if w >= 1.0 {
        return Err(Error::Domain(format!(
            "T^2 - R^2 = {w} >= 1 lies beyond the singularity"
        )));
    }
    let phi = |r: f64| (1.0 - r / r_s) * (r / r_s).exp();
    // phi is strictly decreasing: phi(0) = 1, phi(r_s) = 0, phi -> -inf.
    let mut lo = 0.0;
    let mut hi = if w >= 0.0 {
        r_s
    } else {
        let mut hi = 2.0 * r_s;
        while phi(hi) > w {
            hi *= 2.0;
        }
        hi
    };
    let mut r = 0.5 * (lo + hi);
    for _ in 0..300 {
        let val = phi(r) - w;
        if val > 0.0 {
            lo = r;
        } else {
            hi = r;
        }
        let slope = -(r / (r_s * r_s)) * (r / r_s).exp();
        let newton = if slope != 0.0 { r - val / slope } else { r };
        r = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (phi(r) - w).abs() <= 1e-14 * (1.0 + w.abs()) {
            break;
        }
    }
    let resid = (phi(r) - w).abs();
    if resid <= 1e-12 * (1.0 + w.abs()) {
        Ok(r)
    } else {
        Err(Error::Domain(format!(
            "implicit r solve stalled at residual {resid:.3e} for w = {w}"
        )))
    }
}

/// Kruskal-plane metric (4 r_s^3 / r) e^{-r/r_s} diag(-1, 1) on T^2 < R^2 + 1.
/// The angular sector is suppressed; radial null rays are exact 45-degree
/// lines in this chart.
pub fn kruskal_metric(r_s: f64) -> Result<ChartedMetric> {
    if r_s <= 0.0 {
        return Err(Error::Config(format!("Schwarzschild radius {r_s} <= 0")));
    }
    let factor = move |r: f64| 4.0 * r_s.powi(3) / r * (-r / r_s).exp();
    let components = Arc::new(move |p: &[f64]| {
        let r = kruskal_r(p[0], p[1], r_s)?;
        let c = factor(r);
        Ok(DMatrix::from_row_slice(2, 2, &[-c, 0.0, 0.0, c]))
    });
    let orientation = Arc::new(|_p: &[f64]| Ok(DVector::from_row_slice(&[1.0, 0.0])));
    // dr = -(2 r_s^2 / (r e^{r/r_s})) (T dT - R dR) by implicit differentiation.
    let derivs = Arc::new(move |p: &[f64]| {
        let r = kruskal_r(p[0], p[1], r_s)?;
        let dr_dw = -(r_s * r_s) / (r * (r / r_s).exp());
        let dr_dt = dr_dw * 2.0 * p[0];
        let dr_dr_coord = dr_dw * (-2.0 * p[1]);
        let c = factor(r);
        let dc_dr = -c * (1.0 / r + 1.0 / r_s);
        let mut out = vec![DMatrix::<f64>::zeros(2, 2); 2];
        out[0][(0, 0)] = -dc_dr * dr_dt;
        out[0][(1, 1)] = dc_dr * dr_dt;
        out[1][(0, 0)] = -dc_dr * dr_dr_coord;
        out[1][(1, 1)] = dc_dr * dr_dr_coord;
        Ok(out)
    });
    Ok(
        ChartedMetric::new("kruskal", &["T", "R"], components, orientation)
            .with_domain(Arc::new(|p: &[f64]| {
                p[0] * p[0] - p[1] * p[1] < 1.0
            }))
            .with_exact_derivs(derivs),
    )
}

/// Black hole region {r < r_s, T > 0} of the Kruskal plane.
pub fn kruskal_black_hole_region(_r_s: f64, w_margin: f64) -> Region {
    let indicator = Arc::new(move |p: &[f64]| {
        let w = p[0] * p[0] - p[1] * p[1];
        p[0] > 0.0 && w > 0.0 && w < 1.0 - w_margin
    });
    Region::new(
        "kruskal-black-hole",
        indicator,
        vec![(0.0, 1.2), (-1.1, 1.1)],
    )
}

/// White hole region {r < r_s, T < 0}.
pub fn kruskal_white_hole_region(_r_s: f64, w_margin: f64) -> Region {
    let indicator = Arc::new(move |p: &[f64]| {
        let w = p[0] * p[0] - p[1] * p[1];
        p[0] < 0.0 && w > 0.0 && w < 1.0 - w_margin
    });
    Region::new(
        "kruskal-white-hole",
        indicator,
        vec![(-1.2, 0.0), (-1.1, 1.1)],
    )
}

pub fn kruskal_in_black_hole(p: &[f64], r_s: f64) -> bool {
    kruskal_black_hole_region(r_s, 0.0).contains(p)
}

pub fn kruskal_in_white_hole(p: &[f64], r_s: f64) -> bool {
    kruskal_white_hole_region(r_s, 0.0).contains(p)
}

/// Exterior-patch map to Kruskal coordinates via the null pair
/// u = -sqrt(r/r_s - 1) e^{(r-t)/2r_s}, v = sqrt(r/r_s - 1) e^{(r+t)/2r_s}.
pub fn schwarzschild_to_kruskal(t: f64, r: f64, r_s: f64) -> Result<(f64, f64)> {
    if r <= r_s {
        return Err(Error::Domain(format!(
            "r = {r} <= r_s = {r_s}: exterior null coordinates undefined"
        )));
    }
    let root = (r / r_s - 1.0).sqrt();
    let u = -root * ((r - t) / (2.0 * r_s)).exp();
    let v = root * ((r + t) / (2.0 * r_s)).exp();
    Ok((0.5 * (v + u), 0.5 * (v - u)))
}

/// Cylinder {r <= r_0} over the Kruskal chart, r_0 > r_s.
pub fn schwarzschild_cylinder(r_0: f64, r_s: f64) -> Result<CylinderDomain> {
    if r_0 <= r_s {
        return Err(Error::Config(format!("r_0 = {r_0} must exceed r_s = {r_s}")));
    }
    let f = Arc::new(move |p: &[f64]| match kruskal_r(p[0], p[1], r_s) {
        Ok(r) => r - r_0,
        // Beyond the singularity locus counts as deep inside the hole.
        Err(_) => -r_0,
    });
    let df = Arc::new(move |p: &[f64]| {
        let r = kruskal_r(p[0], p[1], r_s)?;
        let c = -(2.0 * r_s * r_s) / (r * (r / r_s).exp());
        Ok(vec![c * p[0], -c * p[1]])
    });
    Ok(CylinderDomain::new("kruskal-cylinder", f, df))
}

/// Full exterior Schwarzschild chart (t, r, theta, phi); Ricci-flat, used as
/// the vacuum curvature oracle.
pub fn schwarzschild_exterior(r_s: f64) -> Result<ChartedMetric> {
    if r_s <= 0.0 {
        return Err(Error::Config(format!("Schwarzschild radius {r_s} <= 0")));
    }
    let components = Arc::new(move |p: &[f64]| {
        let (r, theta) = (p[1], p[2]);
        let fac = 1.0 - r_s / r;
        let mut g = DMatrix::<f64>::zeros(4, 4);
        g[(0, 0)] = -fac;
        g[(1, 1)] = 1.0 / fac;
        g[(2, 2)] = r * r;
        g[(3, 3)] = r * r * theta.sin().powi(2);
        Ok(g)
    });
    let orientation = Arc::new(|_p: &[f64]| {
        Ok(DVector::from_row_slice(&[1.0, 0.0, 0.0, 0.0]))
    });
    Ok(ChartedMetric::new(
        "schwarzschild-exterior",
        &["t", "r", "theta", "phi"],
        components,
        orientation,
    )
    .with_domain(Arc::new(move |p: &[f64]| {
        p[1] > r_s * 1.01 && p[2] > 0.05 && p[2] < PI - 0.05
    })))
}

/// Local constant-curvature patch h = (Rc^2 / (tau - pole)^2)(-dtau^2 + E_n);
/// scalar curvature 2/Rc^2 in 1+1. The chart excludes the hyperplane
/// tau = pole.
pub fn de_sitter_patch(r_c: f64, pole: f64, n: usize) -> Result<ChartedMetric> {
    if r_c <= 0.0 {
        return Err(Error::Config(format!("curvature radius {r_c} <= 0")));
    }
    if n < 1 {
        return Err(Error::Config(format!("spatial dimension {n} < 1")));
    }
    let d = 1 + n;
    let conf = move |tau: f64| (r_c / (tau - pole)).powi(2);
    let components = Arc::new(move |p: &[f64]| {
        let c = conf(p[0]);
        let mut g = DMatrix::<f64>::identity(d, d) * c;
        g[(0, 0)] = -c;
        Ok(g)
    });
    let orientation = Arc::new(move |_p: &[f64]| {
        let mut t = DVector::<f64>::zeros(d);
        t[0] = 1.0;
        Ok(t)
    });
    let derivs = Arc::new(move |p: &[f64]| {
        let dc = -2.0 * r_c * r_c / (p[0] - pole).powi(3);
        let mut out = vec![DMatrix::<f64>::zeros(d, d); d];
        out[0] = DMatrix::<f64>::identity(d, d) * dc;
        out[0][(0, 0)] = -dc;
        Ok(out)
    });
    Ok(ChartedMetric::new(
        "de-sitter-patch",
        &coord_names(n),
        components,
        orientation,
    )
    .with_domain(Arc::new(move |p: &[f64]| (p[0] - pole).abs() > 1e-9))
    .with_exact_derivs(derivs))
}

/// Smooth cutoff that is 1 on the inner ball and 0 outside the outer ball,
/// built from the standard e^{-1/s} step.
#[derive(Clone)]
pub struct BumpCutoff {
    pub center: Vec<f64>,
    pub inner_radius: f64,
    pub outer_radius: f64,
}

impl BumpCutoff {
    pub fn chi(&self, p: &[f64]) -> f64 {
        let dist2: f64 = p
            .iter()
            .zip(&self.center)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let dist = dist2.sqrt();
        smooth_step((dist - self.inner_radius) / (self.outer_radius - self.inner_radius))
    }

    /// True if the closed support ball lies inside the region.
    pub fn support_inside(&self, region: &Region, probes: usize) -> bool {
        let d = self.center.len();
        // Probe the support sphere along coordinate axes and diagonals plus
        // the center itself.
        if !region.contains(&self.center) {
            return false;
        }
        let mut dirs: Vec<Vec<f64>> = Vec::new();
        for i in 0..d {
            for s in [-1.0, 1.0] {
                let mut e = vec![0.0; d];
                e[i] = s;
                dirs.push(e);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0xB0B);
        while dirs.len() < probes {
            let v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-6 {
                dirs.push(v.iter().map(|x| x / norm).collect());
            }
        }
        dirs.iter().all(|dir| {
            let p: Vec<f64> = self
                .center
                .iter()
                .zip(dir)
                .map(|(c, d)| c + d * self.outer_radius)
                .collect();
            region.contains(&p)
        })
    }
}

fn exp_bump(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp()
    }
}

/// psi(s) = 1 for s <= 0, 0 for s >= 1, strictly monotone between.
pub fn smooth_step(s: f64) -> f64 {
    if s <= 0.0 {
        1.0
    } else if s >= 1.0 {
        0.0
    } else {
        let a = exp_bump(1.0 - s);
        let b = exp_bump(s);
        a / (a + b)
    }
}

pub fn bump_cutoff(center: &[f64], r_in: f64, r_out: f64) -> Result<BumpCutoff> {
    if !(0.0 < r_in && r_in < r_out) {
        return Err(Error::Config(format!(
            "bump radii must satisfy 0 < r_in < r_out, got {r_in}, {r_out}"
        )));
    }
    Ok(BumpCutoff {
        center: center.to_vec(),
        inner_radius: r_in,
        outer_radius: r_out,
    })
}

/// Ingredients of the blended metric g' = (1 - chi) g + chi h.
#[derive(Clone)]
pub struct PerturbationSpec {
    pub base: ChartedMetric,
    pub patch: ChartedMetric,
    pub cutoff: BumpCutoff,
    pub region: Region,
}

impl PerturbationSpec {
    /// Check the convexity precondition: both metrics block-diagonal in the
    /// shared temporal coordinate on the cutoff support, and the support
    /// contained in the region.
    pub fn validate(&self, seed: u64, samples: usize) -> Result<()> {
        if !self.cutoff.support_inside(&self.region, 64) {
            return Err(Error::Precondition(format!(
                "cutoff support not contained in region '{}'",
                self.region.label
            )));
        }
        let d = self.base.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut checked = 0;
        let mut attempts = 0;
        while checked < samples && attempts < samples * 1000 {
            attempts += 1;
            let p: Vec<f64> = self
                .cutoff
                .center
                .iter()
                .map(|c| c + rng.random_range(-self.cutoff.outer_radius..self.cutoff.outer_radius))
                .collect();
            if self.cutoff.chi(&p) == 0.0 {
                continue;
            }
            for m in [&self.base, &self.patch] {
                let g = m.metric_at(&p)?;
                if !(g[(0, 0)] < 0.0) {
                    return Err(Error::Precondition(format!(
                        "metric '{}' has non-negative tau-tau component on cutoff support",
                        m.label()
                    )));
                }
                for i in 1..d {
                    if g[(0, i)].abs() > 1e-12 {
                        return Err(Error::Precondition(format!(
                            "metric '{}' not block-diagonal in tau on cutoff support",
                            m.label()
                        )));
                    }
                }
            }
            checked += 1;
        }
        Ok(())
    }
}

/// The blended metric. Equal to g bitwise wherever chi = 0: the patch is
/// never evaluated there, so its values away from the support (including any
/// pole) cannot influence results.
pub fn perturbed_metric(spec: &PerturbationSpec) -> Result<ChartedMetric> {
    spec.validate(0xC0FFEE, 64)?;
    let base = spec.base.clone();
    let patch = spec.patch.clone();
    let cutoff = spec.cutoff.clone();
    let label = format!("{}-perturbed", spec.base.label());
    let b2 = base.clone();
    let p2 = patch.clone();
    let c2 = cutoff.clone();
    let components = Arc::new(move |p: &[f64]| {
        let chi = c2.chi(p);
        if chi == 0.0 {
            return b2.components_at(p);
        }
        let g = b2.components_at(p)?;
        let h = p2.components_at(p)?;
        Ok(g * (1.0 - chi) + h * chi)
    });
    let b3 = base.clone();
    let orientation = Arc::new(move |p: &[f64]| b3.orientation_at(p));
    let b4 = base.clone();
    let p4 = patch.clone();
    let c4 = cutoff.clone();
    let derivs_ok = base.has_exact_derivs() && patch.has_exact_derivs();
    let mut metric = ChartedMetric::new(
        &label,
        &base
            .coord_names()
            .iter()
            .map(|s| s.as_str())
            .collect::<Vec<_>>(),
        components,
        orientation,
    )
    .with_domain({
        let b = base.clone();
        let pm = patch.clone();
        let c = cutoff.clone();
        Arc::new(move |p: &[f64]| b.in_domain(p) && (c.chi(p) == 0.0 || pm.in_domain(p)))
    });
    if derivs_ok {
        // d g' = (1 - chi) dg + chi dh + dchi (h - g); chi's gradient comes
        // from the smooth-step closed form.
        metric = metric.with_exact_derivs(Arc::new(move |p: &[f64]| {
            let chi = c4.chi(p);
            let d = p.len();
            if chi == 0.0 {
                return b4.metric_derivs(p, 1e-3);
            }
            let g = b4.components_at(p)?;
            let h = p4.components_at(p)?;
            let dg = b4.metric_derivs(p, 1e-3)?;
            let dh = p4.metric_derivs(p, 1e-3)?;
            let grad_chi = chi_gradient(&c4, p);
            let mut out = Vec::with_capacity(d);
            for mu in 0..d {
                out.push(&dg[mu] * (1.0 - chi) + &dh[mu] * chi + (&h - &g) * grad_chi[mu]);
            }
            Ok(out)
        }));
    }
    Ok(metric)
}

fn chi_gradient(cut: &BumpCutoff, p: &[f64]) -> Vec<f64> {
    let d = p.len();
    let dist2: f64 = p
        .iter()
        .zip(&cut.center)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let dist = dist2.sqrt();
    let width = cut.outer_radius - cut.inner_radius;
    let s = (dist - cut.inner_radius) / width;
    if s <= 0.0 || s >= 1.0 || dist == 0.0 {
        return vec![0.0; d];
    }
    // psi(s) = a/(a+b), a = e^{-1/(1-s)}, b = e^{-1/s}
    let a = exp_bump(1.0 - s);
    let b = exp_bump(s);
    let da = -a / ((1.0 - s) * (1.0 - s));
    let db = b / (s * s);
    let dpsi = (da * (a + b) - a * (da + db)) / ((a + b) * (a + b));
    let dsdx: Vec<f64> = p
        .iter()
        .zip(&cut.center)
        .map(|(x, c)| (x - c) / (dist * width))
        .collect();
    dsdx.iter().map(|v| dpsi * v).collect()
}

/// Chart map (t, xi) -> (t, xi b(t)) flattening the hyperboloid cylinder to
/// the strip xi in [-1, 1]; the canonical wave-solver chart.
pub fn strip_chart_map(a: f64) -> ChartMap {
    ChartMap::new(
        "hyperboloid-strip",
        Arc::new(move |p: &[f64]| vec![p[0], p[1] * hyperboloid_half_width(a, p[0])]),
        Arc::new(move |p: &[f64]| {
            let b = hyperboloid_half_width(a, p[0]);
            let bp = 2.0 * p[0] / (a * a + 4.0 * p[0] * p[0]).sqrt();
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, p[1] * bp, b])
        }),
    )
    .with_inverse(Arc::new(move |q: &[f64]| {
        vec![q[0], q[1] / hyperboloid_half_width(a, q[0])]
    }))
}

/// Inverse strip map (t, x) -> (t, x / b(t)).
pub fn strip_chart_map_inverse(a: f64) -> ChartMap {
    ChartMap::new(
        "hyperboloid-strip-inverse",
        Arc::new(move |q: &[f64]| vec![q[0], q[1] / hyperboloid_half_width(a, q[0])]),
        Arc::new(move |q: &[f64]| {
            let b = hyperboloid_half_width(a, q[0]);
            let bp = 2.0 * q[0] / (a * a + 4.0 * q[0] * q[0]).sqrt();
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, -q[1] * bp / (b * b), 1.0 / b])
        }),
    )
    .with_inverse(Arc::new(move |p: &[f64]| {
        vec![p[0], p[1] * hyperboloid_half_width(a, p[0])]
    }))
}

/// Timelike-boundary certificate: g(df, df) over sampled boundary points.
/// Returns (min, max) of the boundary norm.
pub fn certify_timelike_boundary(
    metric: &ChartedMetric,
    cylinder: &CylinderDomain,
    boundary_points: &[Vec<f64>],
) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for p in boundary_points {
        let norm = cylinder.boundary_norm2(metric, p)?;
        if norm <= 0.0 {
            return Err(Error::Signature(format!(
                "boundary of '{}' not timelike at {p:?}: g(df,df) = {norm}",
                cylinder.label
            )));
        }
        lo = lo.min(norm);
        hi = hi.max(norm);
    }
    Ok((lo, hi))
}

/// Sample points on the hyperboloid boundary |x| = b(t).
pub fn hyperboloid_boundary_points(
    a: f64,
    n: usize,
    t_range: (f64, f64),
    seed: u64,
    count: usize,
) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let t = rng.random_range(t_range.0..t_range.1);
            let b = hyperboloid_half_width(a, t);
            let mut dir: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let norm: f64 = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm < 1e-9 {
                dir = vec![1.0; n];
            }
            let norm: f64 = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
            let mut p = vec![t];
            p.extend(dir.iter().map(|x| x / norm * b));
            p
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn minkowski_examples() {
        let m = minkowski(3).unwrap();
        let g = m.metric_at(&[0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(g[(0, 0)], -1.0);
        assert_eq!(g[(1, 1)], 1.0);
        assert_eq!(g[(2, 2)], 1.0);
        assert_eq!(g[(3, 3)], 1.0);
        assert!(minkowski(0).is_err());
    }

    #[test]
    fn hyperboloid_boundary_and_half_width() {
        let a = 2.0;
        let cyl = hyperboloid_cylinder(a, 1).unwrap();
        // f(0, x) = 0 at |x| = a.
        assert_abs_diff_eq!(cyl.f(&[0.0, a]), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(hyperboloid_half_width(a, 0.0), a, epsilon = 1e-14);
        // Boundary norm is exactly a^2.
        let m = minkowski(1).unwrap();
        for p in hyperboloid_boundary_points(a, 1, (-3.0, 3.0), 5, 200) {
            let norm = cyl.boundary_norm2(&m, &p).unwrap();
            assert_abs_diff_eq!(norm, a * a, epsilon = 1e-10);
        }
        // Kink: df undefined at x = 0, f extends as -t^2.
        assert!(cyl.df(&[1.0, 0.0]).is_err());
        assert_abs_diff_eq!(cyl.f(&[1.5, 0.0]), -2.25, epsilon = 1e-14);
    }

    #[test]
    fn diamond_membership_and_depth() {
        let a = 2.0;
        let u = diamond_region(a, 1);
        assert!(u.contains(&[0.0, 0.0]));
        assert!(!u.contains(&[0.5 * a, 0.0]));
        let cyl = hyperboloid_cylinder(a, 1).unwrap();
        let samples = u.sample(42, 1000).unwrap();
        let mut min_f = f64::INFINITY;
        for p in &samples {
            let f = cyl.f(p);
            assert!(f < 0.0, "diamond sample escaped the cylinder: {p:?}");
            min_f = min_f.min(f);
        }
        // The diamond edge sits on the level set f = -a^2/4: interior
        // samples stay strictly above the bound and approach it.
        assert!(min_f > -a * a / 4.0, "min f = {min_f} crossed the edge level");
        assert!(min_f <= -a * a / 4.0 + 0.02, "min f = {min_f}");
    }

    #[test]
    fn flrw_metric_values() {
        let m = flrw_bounce(1.0, 1).unwrap();
        let g = m.metric_at(&[0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(g[(0, 0)], -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g[(1, 1)], 1.0, epsilon = 1e-15);
        let g = m.metric_at(&[1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(g[(1, 1)], 1.0_f64.cosh().powi(2), epsilon = 1e-9);
        assert_abs_diff_eq!(g[(1, 1)], 2.381097845, epsilon = 1e-9);
    }

    #[test]
    fn conformal_time_range_and_midpoint() {
        let h = 1.0;
        // eta(0) = pi/2H; the quadrature oracle lives in the acceptance suite.
        assert_abs_diff_eq!(conformal_time(h, 0.0), PI / 2.0, epsilon = 1e-12);
        assert!(conformal_time(h, 50.0) > PI - 1e-6);
        assert!(conformal_time(h, -50.0) < 1e-6);
        assert!(cosmic_time(h, -0.1).is_err());
        assert!(cosmic_time(h, PI + 0.1).is_err());
    }

    proptest! {
        #[test]
        fn conformal_time_round_trip(t in -20.0_f64..20.0) {
            let h = 0.7;
            let eta = conformal_time(h, t);
            let back = cosmic_time(h, eta).unwrap();
            prop_assert!((back - t).abs() <= 1e-10 * (1.0 + t.abs()));
        }

        #[test]
        fn conformal_time_monotone(t1 in -15.0_f64..15.0, dt in 1e-6_f64..5.0) {
            let h = 1.3;
            prop_assert!(conformal_time(h, t1 + dt) > conformal_time(h, t1));
        }

        #[test]
        fn kruskal_r_round_trip(t in -4.0_f64..4.0, r in 1.05_f64..6.0) {
            let r_s = 1.0;
            let (big_t, big_r) = schwarzschild_to_kruskal(t, r, r_s).unwrap();
            let back = kruskal_r(big_t, big_r, r_s).unwrap();
            prop_assert!((back - r).abs() <= 1e-9 * (1.0 + r));
        }
    }

    #[test]
    fn kruskal_r_exact_points() {
        let r_s = 1.3;
        // w = 0 at the horizon: r = r_s.
        assert_abs_diff_eq!(kruskal_r(0.0, 0.0, r_s).unwrap(), r_s, epsilon = 1e-12);
        // w = -e^2 has the exact root r = 2 r_s: (1 - 2) e^2 = -e^2.
        let e = std::f64::consts::E;
        let big_r = e; // T = 0, R = e gives w = -e^2
        assert_abs_diff_eq!(
            kruskal_r(0.0, big_r, r_s).unwrap(),
            2.0 * r_s,
            epsilon = 1e-10
        );
        // w -> 1^- sends r -> 0^+.
        let r = kruskal_r((1.0 - 1e-9_f64).sqrt(), 0.0, r_s).unwrap();
        assert!(r < 1e-3);
        assert!(kruskal_r(1.0, 0.0, r_s).is_err());
    }

    #[test]
    fn kruskal_metric_values_and_regions() {
        let r_s = 1.0;
        let m = kruskal_metric(r_s).unwrap();
        // At the origin r = r_s, conformal factor 4 r_s^2 / e.
        let g = m.metric_at(&[0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(
            g[(1, 1)],
            4.0 * r_s * r_s / std::f64::consts::E,
            epsilon = 1e-10
        );
        assert!(kruskal_in_black_hole(&[0.5, 0.0], r_s));
        assert!(!kruskal_in_black_hole(&[-0.5, 0.0], r_s));
        assert!(kruskal_in_white_hole(&[-0.5, 0.0], r_s));
        assert!(m.metric_at(&[1.5, 0.0]).is_err());
    }

    #[test]
    fn exterior_map_example_and_hyperbola() {
        let r_s = 1.0;
        let e = std::f64::consts::E;
        let (t_k, r_k) = schwarzschild_to_kruskal(0.0, 2.0 * r_s, r_s).unwrap();
        assert_abs_diff_eq!(t_k, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r_k, e, epsilon = 1e-12);
        // Schwarzschild time translation slides along T^2 - R^2 = const.
        let (t1, r1) = schwarzschild_to_kruskal(0.7, 3.0, r_s).unwrap();
        let (t2, r2) = schwarzschild_to_kruskal(1.9, 3.0, r_s).unwrap();
        assert_abs_diff_eq!(
            t1 * t1 - r1 * r1,
            t2 * t2 - r2 * r2,
            epsilon = 1e-10 * (1.0 + (t1 * t1 - r1 * r1).abs())
        );
        assert!(schwarzschild_to_kruskal(0.0, 0.9, r_s).is_err());
    }

    #[test]
    fn kruskal_cylinder_boundary() {
        let r_s = 1.0;
        let r_0 = 1.5;
        let cyl = schwarzschild_cylinder(r_0, r_s).unwrap();
        assert_abs_diff_eq!(cyl.f(&[0.0, 0.0]), r_s - r_0, epsilon = 1e-10);
        // On the T = 0 slice the boundary differential has no dT component.
        let (_, big_r) = schwarzschild_to_kruskal(0.0, r_0, r_s).unwrap();
        let df = cyl.df(&[0.0, big_r]).unwrap();
        assert_abs_diff_eq!(df[0], 0.0, epsilon = 1e-12);
        assert!(df[1] > 0.0);
        // Timelike boundary: g(df,df) > 0 on sampled boundary points.
        let m = kruskal_metric(r_s).unwrap();
        for t_s in [-1.0, 0.0, 0.8, 2.0] {
            let (bt, br) = schwarzschild_to_kruskal(t_s, r_0, r_s).unwrap();
            let norm = cyl.boundary_norm2(&m, &[bt, br]).unwrap();
            assert!(norm > 0.0, "boundary norm {norm} at t_s = {t_s}");
        }
    }

    #[test]
    fn de_sitter_values() {
        let m = de_sitter_patch(1.0, 0.0, 1).unwrap();
        let g = m.metric_at(&[2.0, 0.0]).unwrap();
        assert_abs_diff_eq!(g[(0, 0)], -0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(g[(1, 1)], 0.25, epsilon = 1e-15);
    }

    #[test]
    fn bump_cutoff_profile() {
        let b = bump_cutoff(&[0.0, 0.0], 0.2, 0.5).unwrap();
        assert_eq!(b.chi(&[0.0, 0.0]), 1.0);
        assert_eq!(b.chi(&[0.1, 0.1]), 1.0);
        assert_eq!(b.chi(&[0.51, 0.0]), 0.0);
        let mid = b.chi(&[0.35, 0.0]);
        assert!(mid > 0.0 && mid < 1.0);
        // Flat on the inner ball: finite-difference gradient vanishes.
        let h = 1e-4;
        let g = (b.chi(&[0.1 + h, 0.0]) - b.chi(&[0.1 - h, 0.0])) / (2.0 * h);
        assert!(g.abs() < 1e-10);
        // Finite-difference derivatives bounded across the collar.
        for i in 0..60 {
            let r = 0.2 + 0.3 * (i as f64 + 0.5) / 60.0;
            let g = (b.chi(&[r + h, 0.0]) - b.chi(&[r - h, 0.0])) / (2.0 * h);
            assert!(g.abs() < 50.0, "collar slope {g} at r = {r}");
        }
        assert!(bump_cutoff(&[0.0], 0.5, 0.2).is_err());
    }

    #[test]
    fn chi_gradient_matches_finite_differences() {
        let b = bump_cutoff(&[0.1, -0.2], 0.15, 0.4).unwrap();
        let h = 1e-5;
        for p in [[0.3, 0.0], [0.1, 0.1], [-0.1, -0.3]] {
            let grad = chi_gradient(&b, &p);
            for mu in 0..2 {
                let mut q = p;
                q[mu] += h;
                let fp = b.chi(&q);
                q[mu] -= 2.0 * h;
                let fm = b.chi(&q);
                let fd = (fp - fm) / (2.0 * h);
                assert_abs_diff_eq!(grad[mu], fd, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn perturbed_metric_blend() {
        let a = 2.0;
        let g = minkowski(1).unwrap();
        let pole = -3.0;
        let rc = 1.0;
        let h = de_sitter_patch(rc, pole, 1).unwrap();
        let cutoff = bump_cutoff(&[0.0, 0.0], 0.15, 0.4).unwrap();
        let spec = PerturbationSpec {
            base: g.clone(),
            patch: h.clone(),
            cutoff: cutoff.clone(),
            region: diamond_region(a, 1),
        };
        let gp = perturbed_metric(&spec).unwrap();
        // chi = 0: exactly g, bitwise, on a thousand sampled points.
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mut outside = 0;
        while outside < 1000 {
            let p = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
            if cutoff.chi(&p) != 0.0 {
                continue;
            }
            let g0 = g.metric_at(&p).unwrap();
            let g1 = gp.metric_at(&p).unwrap();
            assert!(
                g0.iter().zip(g1.iter()).all(|(a, b)| a == b),
                "blend altered the metric outside its support at {p:?}"
            );
            outside += 1;
        }
        // chi = 1: exactly the patch.
        let p_in = [0.05, 0.05];
        assert_eq!(cutoff.chi(&p_in), 1.0);
        let hm = h.metric_at(&p_in).unwrap();
        let g1 = gp.metric_at(&p_in).unwrap();
        assert!(hm.iter().zip(g1.iter()).all(|(a, b)| a == b));
        // Collar values match the hand formula.
        let p_mid = [0.0, 0.3];
        let chi = cutoff.chi(&p_mid);
        assert!(chi > 0.0 && chi < 1.0);
        let g1 = gp.metric_at(&p_mid).unwrap();
        let expect_tt = -(1.0 - chi) - chi * rc * rc / (p_mid[0] - pole).powi(2);
        let expect_xx = (1.0 - chi) + chi * rc * rc / (p_mid[0] - pole).powi(2);
        assert_abs_diff_eq!(g1[(0, 0)], expect_tt, epsilon = 1e-14);
        assert_abs_diff_eq!(g1[(1, 1)], expect_xx, epsilon = 1e-14);
        // dtau stays timelike for g' on a grid over the support.
        for i in 0..20 {
            for j in 0..20 {
                let p = [
                    -0.45 + 0.9 * (i as f64) / 19.0,
                    -0.45 + 0.9 * (j as f64) / 19.0,
                ];
                let norm = gp.covector_norm2(&p, &[1.0, 0.0]).unwrap();
                assert!(norm < 0.0, "dtau not timelike at {p:?}: {norm}");
            }
        }
    }

    #[test]
    fn perturbed_metric_rejects_support_escape() {
        let g = minkowski(1).unwrap();
        let h = de_sitter_patch(1.0, -3.0, 1).unwrap();
        // Bump centered near the diamond edge with support poking out.
        let cutoff = bump_cutoff(&[0.8, 0.0], 0.1, 0.4).unwrap();
        let spec = PerturbationSpec {
            base: g,
            patch: h,
            cutoff,
            region: diamond_region(2.0, 1),
        };
        assert!(matches!(
            perturbed_metric(&spec),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn perturbed_signature_on_support_grid() {
        let g = flrw_bounce(1.0, 1).unwrap();
        let h = de_sitter_patch(0.7, -4.0, 1).unwrap();
        let cutoff = bump_cutoff(&[0.0, 0.0], 0.1, 0.3).unwrap();
        let region = Region::new(
            "ball",
            Arc::new(|p: &[f64]| p.iter().map(|x| x * x).sum::<f64>() < 0.25),
            vec![(-0.5, 0.5), (-0.5, 0.5)],
        );
        let spec = PerturbationSpec {
            base: g,
            patch: h,
            cutoff,
            region,
        };
        let gp = perturbed_metric(&spec).unwrap();
        for i in 0..30 {
            for j in 0..30 {
                let p = [
                    -0.35 + 0.7 * (i as f64) / 29.0,
                    -0.35 + 0.7 * (j as f64) / 29.0,
                ];
                assert!(gp.metric_at(&p).is_ok(), "signature lost at {p:?}");
            }
        }
    }

    #[test]
    fn flrw_regions_are_inside_cylinder() {
        let h = 1.0;
        let r_cyl = PI / h + 0.5;
        let cyl = flrw_cylinder(r_cyl, 1).unwrap();
        let u = flrw_future_confined_region(h, r_cyl, 2.0);
        let upast = flrw_past_confined_region(h, r_cyl, 2.0);
        for region in [&u, &upast] {
            for p in region.sample(9, 300).unwrap() {
                assert!(cyl.f(&p) < -0.2, "sample {p:?} too close to boundary");
            }
        }
    }

    #[test]
    fn schwarzschild_exterior_is_lorentzian() {
        let m = schwarzschild_exterior(1.0).unwrap();
        assert!(m.metric_at(&[0.0, 3.0, 1.2, 0.4]).is_ok());
        assert!(m.metric_at(&[0.0, 0.9, 1.2, 0.4]).is_err());
    }
}
