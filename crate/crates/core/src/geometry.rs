//! Chart-based Lorentzian metric evaluation: components, inverses, Christoffel
//! symbols, curvature tensors, causal classification and chart pullbacks.
//!
//! A metric is a component evaluator over a single coordinate chart together
//! with a time-orientation field and a domain predicate. Derivatives default
//! to 4th-order central differences; exact first-derivative hooks override
//! them when a catalog metric can supply closed forms.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative tolerance deciding the null band of `causal_class`.
pub const DEFAULT_NULL_TOL: f64 = 1e-10;
/// Eigenvalue threshold below which a metric counts as degenerate.
pub const SIGNATURE_EIG_TOL: f64 = 1e-12;

/// A point of a chart, stored as bare coordinate values.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: &[f64]) -> Self {
        Point {
            coords: coords.to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|c| c.is_finite())
    }
}

/// A tangent vector attached to a base point.
#[derive(Debug, Clone)]
pub struct Tangent {
    pub base: Point,
    pub components: Vec<f64>,
}

impl Tangent {
    pub fn new(base: &[f64], components: &[f64]) -> Self {
        assert_eq!(base.len(), components.len(), "tangent dim mismatch");
        Tangent {
            base: Point::new(base),
            components: components.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum CausalKind {
    Timelike,
    Null,
    Spacelike,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum TimeSense {
    Future,
    Past,
    None,
}

/// Causal type of a tangent vector plus its time orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct CausalClass {
    pub kind: CausalKind,
    pub time_sense: TimeSense,
}

pub type ScalarFieldFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type MatrixFieldFn = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;
type ComponentsFn = Arc<dyn Fn(&[f64]) -> Result<DMatrix<f64>> + Send + Sync>;
type OrientationFn = Arc<dyn Fn(&[f64]) -> Result<DVector<f64>> + Send + Sync>;
type DerivsFn = Arc<dyn Fn(&[f64]) -> Result<Vec<DMatrix<f64>>> + Send + Sync>;
type DomainFn = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;

/// A Lorentzian metric presented in a single coordinate chart.
///
/// `components` evaluates the symmetric matrix g_{mu nu}(p); `orientation`
/// evaluates a timelike vector field fixing the future direction; `derivs`
/// optionally evaluates the exact first derivatives (one matrix per
/// coordinate direction). Evaluation outside `domain` is an error, never an
/// extrapolation.
#[derive(Clone)]
pub struct ChartedMetric {
    dim: usize,
    coord_names: Vec<String>,
    label: String,
    components: ComponentsFn,
    orientation: OrientationFn,
    derivs: Option<DerivsFn>,
    domain: DomainFn,
}

impl std::fmt::Debug for ChartedMetric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChartedMetric")
            .field("dim", &self.dim)
            .field("label", &self.label)
            .field("coord_names", &self.coord_names)
            .finish()
    }
}

impl ChartedMetric {
    pub fn new(
        label: &str,
        coord_names: &[&str],
        components: ComponentsFn,
        orientation: OrientationFn,
    ) -> Self {
        ChartedMetric {
            dim: coord_names.len(),
            coord_names: coord_names.iter().map(|s| s.to_string()).collect(),
            label: label.to_string(),
            components,
            orientation,
            derivs: None,
            domain: Arc::new(|_| true),
        }
    }

    pub fn with_domain(mut self, domain: DomainFn) -> Self {
        self.domain = domain;
        self
    }

    pub fn with_exact_derivs(mut self, derivs: DerivsFn) -> Self {
        self.derivs = Some(derivs);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn coord_names(&self) -> &[String] {
        &self.coord_names
    }

    pub fn has_exact_derivs(&self) -> bool {
        self.derivs.is_some()
    }

    pub fn in_domain(&self, p: &[f64]) -> bool {
        p.len() == self.dim && p.iter().all(|c| c.is_finite()) && (self.domain)(p)
    }

    /// Raw component evaluation without symmetry or signature checks.
    /// Hot loops use this after `metric_at` has validated a sample.
    pub fn components_at(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        if !self.in_domain(p) {
            return Err(Error::Domain(format!(
                "point {:?} outside domain of chart '{}'",
                p, self.label
            )));
        }
        let g = (self.components)(p)?;
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "non-finite metric components at {:?} in '{}'",
                p, self.label
            )));
        }
        Ok(g)
    }

    /// Evaluate g at `p`, checking symmetry and the (-,+,...,+) signature.
    pub fn metric_at(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        let g = self.components_at(p)?;
        let scale = g.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1.0);
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                if (g[(i, j)] - g[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::Signature(format!(
                        "asymmetric components at {:?} in '{}'",
                        p, self.label
                    )));
                }
            }
        }
        check_lorentzian(&g, &self.label, p)?;
        Ok(g)
    }

    /// Inverse metric g^{mu nu} at `p`; product with g matches identity to 1e-12.
    pub fn inverse_metric_at(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        let g = self.metric_at(p)?;
        invert_metric(&g, &self.label, p)
    }

    pub fn orientation_at(&self, p: &[f64]) -> Result<DVector<f64>> {
        if !self.in_domain(p) {
            return Err(Error::Domain(format!(
                "point {:?} outside domain of chart '{}'",
                p, self.label
            )));
        }
        (self.orientation)(p)
    }

    /// First derivatives of the components, one matrix per coordinate:
    /// exact hooks when present, else 4th-order central differences of
    /// stencil radius 2h.
    pub fn metric_derivs(&self, p: &[f64], h: f64) -> Result<Vec<DMatrix<f64>>> {
        if let Some(exact) = &self.derivs {
            if !self.in_domain(p) {
                return Err(Error::Domain(format!(
                    "point {:?} outside domain of chart '{}'",
                    p, self.label
                )));
            }
            return exact(p);
        }
        let mut out = Vec::with_capacity(self.dim);
        let mut q = p.to_vec();
        for mu in 0..self.dim {
            let x0 = p[mu];
            let mut stencil = Vec::with_capacity(4);
            for step in [-2.0, -1.0, 1.0, 2.0] {
                q[mu] = x0 + step * h;
                stencil.push(self.components_at(&q)?);
            }
            q[mu] = x0;
            // (g(-2h) - 8 g(-h) + 8 g(+h) - g(+2h)) / 12h
            let d = (&stencil[0] - &stencil[1] * 8.0 + &stencil[2] * 8.0 - &stencil[3])
                / (12.0 * h);
            out.push(d);
        }
        Ok(out)
    }

    /// Christoffel symbols of the second kind; `gamma[lam][(mu, nu)]`.
    /// Symmetric in the lower pair by construction.
    pub fn christoffel(&self, p: &[f64], h: f64) -> Result<Vec<DMatrix<f64>>> {
        let d = self.dim;
        let g = self.components_at(p)?;
        let ginv = invert_metric(&g, &self.label, p)?;
        let dg = self.metric_derivs(p, h)?;
        let mut gamma = vec![DMatrix::<f64>::zeros(d, d); d];
        for lam in 0..d {
            for mu in 0..d {
                for nu in mu..d {
                    let mut sum = 0.0;
                    for sig in 0..d {
                        sum += ginv[(lam, sig)]
                            * (dg[mu][(sig, nu)] + dg[nu][(sig, mu)] - dg[sig][(mu, nu)]);
                    }
                    let v = 0.5 * sum;
                    gamma[lam][(mu, nu)] = v;
                    gamma[lam][(nu, mu)] = v;
                }
            }
        }
        Ok(gamma)
    }

    /// Riemann tensor R^rho_{sigma mu nu}, indexed `[rho][sigma][(mu, nu)]`.
    /// Convention fixed so that the de Sitter patch has positive scalar
    /// curvature; the catalog oracles pin this down.
    pub fn riemann(&self, p: &[f64], h: f64) -> Result<Vec<Vec<DMatrix<f64>>>> {
        let d = self.dim;
        let gamma0 = self.christoffel(p, h)?;
        // 4th-order differences of the Christoffel field, stencil radius 2h.
        // dgamma[mu][lam] is the matrix of d_mu Gamma^lam over the lower pair.
        let mut dgamma: Vec<Vec<DMatrix<f64>>> = Vec::with_capacity(d);
        let mut q = p.to_vec();
        for mu in 0..d {
            let x0 = p[mu];
            let mut stencil = Vec::with_capacity(4);
            for step in [-2.0, -1.0, 1.0, 2.0] {
                q[mu] = x0 + step * h;
                stencil.push(self.christoffel(&q, h)?);
            }
            q[mu] = x0;
            let mut per_lam = Vec::with_capacity(d);
            for lam in 0..d {
                per_lam.push(
                    (&stencil[0][lam] - &stencil[1][lam] * 8.0 + &stencil[2][lam] * 8.0
                        - &stencil[3][lam])
                        / (12.0 * h),
                );
            }
            dgamma.push(per_lam);
        }
        let mut riem = vec![vec![DMatrix::<f64>::zeros(d, d); d]; d];
        for rho in 0..d {
            for sig in 0..d {
                for mu in 0..d {
                    for nu in 0..d {
                        let mut v =
                            dgamma[mu][rho][(nu, sig)] - dgamma[nu][rho][(mu, sig)];
                        for lam in 0..d {
                            v += gamma0[rho][(mu, lam)] * gamma0[lam][(nu, sig)]
                                - gamma0[rho][(nu, lam)] * gamma0[lam][(mu, sig)];
                        }
                        riem[rho][sig][(mu, nu)] = v;
                    }
                }
            }
        }
        Ok(riem)
    }

    /// Ricci tensor R_{sigma nu} = R^rho_{sigma rho nu}.
    pub fn ricci(&self, p: &[f64], h: f64) -> Result<DMatrix<f64>> {
        let d = self.dim;
        let riem = self.riemann(p, h)?;
        let mut ric = DMatrix::<f64>::zeros(d, d);
        for sig in 0..d {
            for nu in 0..d {
                let mut v = 0.0;
                for rho in 0..d {
                    v += riem[rho][sig][(rho, nu)];
                }
                ric[(sig, nu)] = v;
            }
        }
        Ok(ric)
    }

    /// Scalar curvature S = g^{sigma nu} R_{sigma nu}.
    pub fn scalar_curvature(&self, p: &[f64], h: f64) -> Result<f64> {
        let g = self.components_at(p)?;
        let ginv = invert_metric(&g, &self.label, p)?;
        let ric = self.ricci(p, h)?;
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                s += ginv[(i, j)] * ric[(i, j)];
            }
        }
        Ok(s)
    }

    /// Classify a tangent vector with the default null band.
    pub fn causal_class(&self, v: &Tangent) -> Result<CausalClass> {
        self.causal_class_with_tol(v, DEFAULT_NULL_TOL)
    }

    /// Classify by the sign of g(v,v), with |g(v,v)| <= eps * |v|^2_euclid
    /// counting as null; the time sense comes from the sign of g(v,T).
    pub fn causal_class_with_tol(&self, v: &Tangent, eps_null: f64) -> Result<CausalClass> {
        let p = &v.base.coords;
        let g = self.metric_at(p)?;
        let aux2: f64 = v.components.iter().map(|c| c * c).sum();
        if aux2 == 0.0 {
            return Ok(CausalClass {
                kind: CausalKind::Zero,
                time_sense: TimeSense::None,
            });
        }
        let q = quadratic_form(&g, &v.components);
        let kind = if q.abs() <= eps_null * aux2 {
            CausalKind::Null
        } else if q < 0.0 {
            CausalKind::Timelike
        } else {
            CausalKind::Spacelike
        };
        let time_sense = match kind {
            CausalKind::Timelike | CausalKind::Null => {
                let t = self.orientation_at(p)?;
                let mut gvt = 0.0;
                for i in 0..self.dim {
                    for j in 0..self.dim {
                        gvt += g[(i, j)] * v.components[i] * t[j];
                    }
                }
                if gvt < 0.0 {
                    TimeSense::Future
                } else {
                    TimeSense::Past
                }
            }
            _ => TimeSense::None,
        };
        Ok(CausalClass { kind, time_sense })
    }

    /// Squared norm g^{mu nu} w_mu w_nu of a covector.
    pub fn covector_norm2(&self, p: &[f64], w: &[f64]) -> Result<f64> {
        let ginv = self.inverse_metric_at(p)?;
        Ok(quadratic_form(&ginv, w))
    }
}

pub fn quadratic_form(m: &DMatrix<f64>, v: &[f64]) -> f64 {
    let d = v.len();
    let mut q = 0.0;
    for i in 0..d {
        for j in 0..d {
            q += m[(i, j)] * v[i] * v[j];
        }
    }
    q
}

fn check_lorentzian(g: &DMatrix<f64>, label: &str, p: &[f64]) -> Result<()> {
    let sym = nalgebra::SymmetricEigen::new(g.clone());
    let scale = sym
        .eigenvalues
        .iter()
        .fold(0.0_f64, |m, v| m.max(v.abs()))
        .max(1.0);
    let mut neg = 0;
    for ev in sym.eigenvalues.iter() {
        if ev.abs() <= SIGNATURE_EIG_TOL * scale {
            return Err(Error::Signature(format!(
                "near-degenerate metric (eigenvalue {ev:.3e}) at {p:?} in '{label}'"
            )));
        }
        if *ev < 0.0 {
            neg += 1;
        }
    }
    if neg != 1 {
        return Err(Error::Signature(format!(
            "expected signature (-,+,...,+), found {neg} negative eigenvalues at {p:?} in '{label}'"
        )));
    }
    Ok(())
}

fn invert_metric(g: &DMatrix<f64>, label: &str, p: &[f64]) -> Result<DMatrix<f64>> {
    g.clone().try_inverse().ok_or_else(|| {
        Error::SingularMetric(format!("metric not invertible at {p:?} in '{label}'"))
    })
}

/// Block-form metric -kappa dtau^2 + g_tau, the shape every globally
/// hyperbolic metric takes in temporal-function coordinates. `kappa` is the
/// lapse, `spatial` the positive-definite metric on tau-slices.
#[derive(Clone)]
pub struct FoliatedMetric {
    pub kappa: ScalarFieldFn,
    pub spatial: MatrixFieldFn,
    charted: ChartedMetric,
}

impl FoliatedMetric {
    pub fn new(
        label: &str,
        coord_names: &[&str],
        kappa: ScalarFieldFn,
        spatial: MatrixFieldFn,
    ) -> Self {
        let d = coord_names.len();
        let k = kappa.clone();
        let sp = spatial.clone();
        let label_owned = label.to_string();
        let components: ComponentsFn = Arc::new(move |p: &[f64]| {
            let kap = k(p);
            if !(kap > 0.0) {
                return Err(Error::Signature(format!(
                    "lapse {kap} not positive at {p:?} in '{label_owned}'"
                )));
            }
            let s = sp(p);
            let mut g = DMatrix::<f64>::zeros(d, d);
            g[(0, 0)] = -kap;
            for i in 0..d - 1 {
                for j in 0..d - 1 {
                    g[(i + 1, j + 1)] = s[(i, j)];
                }
            }
            Ok(g)
        });
        let orientation: OrientationFn = Arc::new(move |p: &[f64]| {
            let mut t = DVector::<f64>::zeros(p.len());
            t[0] = 1.0;
            Ok(t)
        });
        FoliatedMetric {
            kappa,
            spatial,
            charted: ChartedMetric::new(label, coord_names, components, orientation),
        }
    }

    pub fn with_domain(mut self, domain: DomainFn) -> Self {
        self.charted = self.charted.with_domain(domain);
        self
    }

    pub fn with_exact_derivs(mut self, derivs: DerivsFn) -> Self {
        self.charted = self.charted.with_exact_derivs(derivs);
        self
    }

    pub fn charted(&self) -> ChartedMetric {
        self.charted.clone()
    }

    /// Verify the block form at sampled points: g_tt = -kappa < 0, zero
    /// cross terms, spatial block positive definite.
    pub fn check_block_form(&self, points: &[Vec<f64>]) -> Result<()> {
        for p in points {
            let g = self.charted.metric_at(p)?;
            let d = g.nrows();
            if !(g[(0, 0)] < 0.0) {
                return Err(Error::Signature(format!("g_tt not negative at {p:?}")));
            }
            for i in 1..d {
                if g[(0, i)].abs() > 1e-12 {
                    return Err(Error::Signature(format!(
                        "nonzero lapse-shift cross term at {p:?}"
                    )));
                }
            }
            let spatial = g.view((1, 1), (d - 1, d - 1)).into_owned();
            let eig = nalgebra::SymmetricEigen::new(spatial);
            if eig.eigenvalues.iter().any(|ev| *ev <= 0.0) {
                return Err(Error::Signature(format!(
                    "spatial block not positive definite at {p:?}"
                )));
            }
        }
        Ok(())
    }
}

type ForwardFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
type JacobianFn = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;

/// A coordinate change between charts of equal dimension.
#[derive(Clone)]
pub struct ChartMap {
    pub label: String,
    forward: ForwardFn,
    jacobian: JacobianFn,
    inverse: Option<ForwardFn>,
    domain: DomainFn,
}

impl ChartMap {
    pub fn new(label: &str, forward: ForwardFn, jacobian: JacobianFn) -> Self {
        ChartMap {
            label: label.to_string(),
            forward,
            jacobian,
            inverse: None,
            domain: Arc::new(|_| true),
        }
    }

    pub fn with_inverse(mut self, inverse: ForwardFn) -> Self {
        self.inverse = Some(inverse);
        self
    }

    pub fn with_domain(mut self, domain: DomainFn) -> Self {
        self.domain = domain;
        self
    }

    pub fn forward(&self, p: &[f64]) -> Vec<f64> {
        (self.forward)(p)
    }

    pub fn jacobian(&self, p: &[f64]) -> DMatrix<f64> {
        (self.jacobian)(p)
    }

    pub fn inverse(&self, p: &[f64]) -> Result<Vec<f64>> {
        match &self.inverse {
            Some(inv) => Ok(inv(p)),
            None => Err(Error::Chart(format!(
                "chart map '{}' has no declared inverse",
                self.label
            ))),
        }
    }

    pub fn in_domain(&self, p: &[f64]) -> bool {
        (self.domain)(p)
    }
}

/// Pull a metric back through a chart map: components J^T g(F(p)) J.
pub fn pullback_metric(map: &ChartMap, metric: &ChartedMetric, label: &str) -> ChartedMetric {
    let m = metric.clone();
    let mp = map.clone();
    let lbl = label.to_string();
    let components: ComponentsFn = Arc::new(move |p: &[f64]| {
        if !mp.in_domain(p) {
            return Err(Error::Domain(format!(
                "point {:?} outside domain of chart map '{}'",
                p, mp.label
            )));
        }
        let q = mp.forward(p);
        let j = mp.jacobian(p);
        let det = j.determinant();
        if !det.is_finite() || det.abs() < 1e-14 {
            return Err(Error::Chart(format!(
                "singular jacobian (det {det:.3e}) of '{}' at {p:?}",
                mp.label
            )));
        }
        let g = m.components_at(&q)?;
        Ok(j.transpose() * g * j)
    });
    let m2 = metric.clone();
    let mp2 = map.clone();
    let orientation: OrientationFn = Arc::new(move |p: &[f64]| {
        // Pull the orientation field back through the inverse jacobian so the
        // future direction is preserved.
        let q = mp2.forward(p);
        let t_ambient = m2.orientation_at(&q)?;
        let j = mp2.jacobian(p);
        let jinv = j.clone().try_inverse().ok_or_else(|| {
            Error::Chart(format!("singular jacobian of '{}' at {p:?}", mp2.label))
        })?;
        Ok(jinv * t_ambient)
    });
    let m3 = metric.clone();
    let mp3 = map.clone();
    let domain: DomainFn = Arc::new(move |p: &[f64]| {
        mp3.in_domain(p) && m3.in_domain(&mp3.forward(p))
    });
    ChartedMetric::new(
        &lbl,
        &metric
            .coord_names()
            .iter()
            .map(|s| s.as_str())
            .collect::<Vec<_>>(),
        components,
        orientation,
    )
    .with_domain(domain)
}
