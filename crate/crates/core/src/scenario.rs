//! Scenario registry: named configurations tying the catalog, causality
//! scans, wave comparisons and the curvature witness into reproducible
//! runs. Configurations load from JSON and validate before anything runs.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::causality::{
    kruskal_confinement_check, perturbation_reachability_invariance, reachability_scan,
    InvarianceVerdict, ReachabilityReport, ScanDirection, ScanOptions,
};
use crate::error::{Error, Result};
use crate::geometry::{pullback_metric, ChartedMetric};
use crate::spacetimes::{
    self, bump_cutoff, de_sitter_patch, diamond_region, flrw_bounce, flrw_cylinder,
    flrw_future_confined_region, flrw_past_confined_region, hyperboloid_cylinder, minkowski,
    perturbed_metric, strip_chart_map, BumpCutoff, CylinderDomain, PerturbationSpec, Region,
};
use crate::waves::{CompareSetup, PulseSpec, Side, SourceSpec};
use crate::witness::{
    curvature_scan, non_isometry_witness, ScanWindow, WitnessParams, WitnessVerdict,
};

pub const SCENARIO_NAMES: [&str; 3] = ["hyperboloid", "kruskal", "flrw-bounce"];

fn default_seed() -> u64 {
    42
}
fn default_rays() -> usize {
    1000
}
fn default_a() -> f64 {
    2.0
}
fn default_n() -> usize {
    1
}
fn default_r_s() -> f64 {
    1.0
}
fn default_r0() -> f64 {
    1.5
}
fn default_h_rate() -> f64 {
    1.0
}
fn default_bump_center() -> Vec<f64> {
    vec![0.0, 0.0]
}
fn default_r_in() -> f64 {
    0.15
}
fn default_r_out() -> f64 {
    0.4
}
fn default_r_c() -> f64 {
    1.0
}
fn default_pole() -> f64 {
    -3.0
}
fn default_levels() -> Vec<usize> {
    vec![129, 257, 513]
}
fn default_strip_t_range() -> (f64, f64) {
    (-2.2, 1.8)
}
fn default_ray_tol() -> f64 {
    1e-10
}
fn default_fd_step() -> f64 {
    1e-3
}
fn default_timelike_fraction() -> f64 {
    0.1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HyperboloidParams {
    #[serde(default = "default_a")]
    pub a: f64,
    #[serde(default = "default_n")]
    pub n: usize,
}

impl Default for HyperboloidParams {
    fn default() -> Self {
        HyperboloidParams {
            a: default_a(),
            n: default_n(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KruskalParams {
    #[serde(default = "default_r_s")]
    pub r_s: f64,
    #[serde(default = "default_r0")]
    pub r0: f64,
}

impl Default for KruskalParams {
    fn default() -> Self {
        KruskalParams {
            r_s: default_r_s(),
            r0: default_r0(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlrwParams {
    #[serde(default = "default_h_rate")]
    pub h_rate: f64,
    /// Cylinder radius; defaults to pi/H + 0.5, the smallest comfortable
    /// radius exceeding the total conformal lifetime.
    #[serde(default)]
    pub r_cylinder: Option<f64>,
}

impl Default for FlrwParams {
    fn default() -> Self {
        FlrwParams {
            h_rate: default_h_rate(),
            r_cylinder: None,
        }
    }
}

impl FlrwParams {
    pub fn cylinder_radius(&self) -> f64 {
        self.r_cylinder.unwrap_or(PI / self.h_rate + 0.5)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BumpParams {
    #[serde(default = "default_bump_center")]
    pub center: Vec<f64>,
    #[serde(default = "default_r_in")]
    pub r_in: f64,
    #[serde(default = "default_r_out")]
    pub r_out: f64,
    /// Curvature radius of the constant-curvature patch.
    #[serde(default = "default_r_c")]
    pub r_c: f64,
    /// Pole of the patch chart, kept outside the cutoff support.
    #[serde(default = "default_pole")]
    pub pole: f64,
}

impl Default for BumpParams {
    fn default() -> Self {
        BumpParams {
            center: default_bump_center(),
            r_in: default_r_in(),
            r_out: default_r_out(),
            r_c: default_r_c(),
            pole: default_pole(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridParams {
    /// Spatial resolutions, coarse to fine.
    #[serde(default = "default_levels")]
    pub levels: Vec<usize>,
    #[serde(default = "default_strip_t_range")]
    pub strip_t_range: (f64, f64),
}

impl Default for GridParams {
    fn default() -> Self {
        GridParams {
            levels: default_levels(),
            strip_t_range: default_strip_t_range(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ToleranceParams {
    #[serde(default = "default_ray_tol")]
    pub ray_tol: f64,
    #[serde(default = "default_fd_step")]
    pub fd_step: f64,
    #[serde(default = "default_timelike_fraction")]
    pub timelike_fraction: f64,
}

impl Default for ToleranceParams {
    fn default() -> Self {
        ToleranceParams {
            ray_tol: default_ray_tol(),
            fd_step: default_fd_step(),
            timelike_fraction: default_timelike_fraction(),
        }
    }
}

/// One self-describing run configuration; all defaults are recorded into
/// the emitted report for provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub scenario: String,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_rays")]
    pub rays: usize,
    #[serde(default)]
    pub hyperboloid: HyperboloidParams,
    #[serde(default)]
    pub kruskal: KruskalParams,
    #[serde(default)]
    pub flrw: FlrwParams,
    #[serde(default)]
    pub bump: BumpParams,
    #[serde(default)]
    pub grid: GridParams,
    #[serde(default)]
    pub tolerances: ToleranceParams,
    /// Where artifacts land; not part of the experiment, so reports omit it
    /// and stay byte-identical across output locations.
    #[serde(default, skip_serializing)]
    pub output_dir: Option<String>,
}

impl RunConfig {
    pub fn for_scenario(name: &str) -> RunConfig {
        RunConfig {
            scenario: name.to_string(),
            seed: default_seed(),
            rays: default_rays(),
            hyperboloid: HyperboloidParams::default(),
            kruskal: KruskalParams::default(),
            flrw: FlrwParams::default(),
            bump: BumpParams::default(),
            grid: GridParams::default(),
            tolerances: ToleranceParams::default(),
            output_dir: None,
        }
    }

    pub fn from_json(json: &str) -> Result<RunConfig> {
        let cfg: RunConfig = serde_json::from_str(json)
            .map_err(|e| Error::Config(format!("config parse error: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !SCENARIO_NAMES.contains(&self.scenario.as_str()) {
            return Err(Error::Config(format!(
                "unknown scenario '{}'; expected one of {:?}",
                self.scenario, SCENARIO_NAMES
            )));
        }
        if self.rays == 0 {
            return Err(Error::Config("ray count must be positive".to_string()));
        }
        if self.hyperboloid.a <= 0.0 {
            return Err(Error::Config("hyperboloid.a must be positive".to_string()));
        }
        if self.hyperboloid.n < 1 {
            return Err(Error::Config("hyperboloid.n must be >= 1".to_string()));
        }
        if self.kruskal.r0 <= self.kruskal.r_s {
            return Err(Error::Config(format!(
                "kruskal.r0 = {} must exceed r_s = {}",
                self.kruskal.r0, self.kruskal.r_s
            )));
        }
        if self.flrw.h_rate <= 0.0 {
            return Err(Error::Config("flrw.h_rate must be positive".to_string()));
        }
        let r_cyl = self.flrw.cylinder_radius();
        if r_cyl <= PI / self.flrw.h_rate {
            return Err(Error::Config(format!(
                "flrw.r_cylinder = {r_cyl} must exceed pi/H = {}",
                PI / self.flrw.h_rate
            )));
        }
        if !(0.0 < self.bump.r_in && self.bump.r_in < self.bump.r_out) {
            return Err(Error::Config(
                "bump radii must satisfy 0 < r_in < r_out".to_string(),
            ));
        }
        if self.scenario == "hyperboloid" {
            let reach = self.bump.center[0].abs().max(self.bump.center[1].abs())
                + self.bump.r_out;
            if reach >= 0.5 * self.hyperboloid.a {
                return Err(Error::Config(
                    "bump support escapes the diamond".to_string(),
                ));
            }
            if (self.bump.pole - self.bump.center[0]).abs() <= self.bump.r_out {
                return Err(Error::Config(
                    "patch pole must stay outside the cutoff support".to_string(),
                ));
            }
        }
        if self.grid.levels.is_empty() || self.grid.levels.iter().any(|nx| *nx < 16) {
            return Err(Error::Config("grid.levels must all be >= 16".to_string()));
        }
        Ok(())
    }

    pub fn scan_options(&self, s_max: f64) -> ScanOptions {
        let mut opts = ScanOptions {
            s_max,
            timelike_fraction: self.tolerances.timelike_fraction,
            ..Default::default()
        };
        opts.integrator.tol = self.tolerances.ray_tol;
        opts.integrator.fd_step = self.tolerances.fd_step;
        opts
    }
}

/// The hyperboloid cylinder scenario, fully assembled: ambient and strip
/// metrics for the base and blended geometry, cylinder, hidden diamond.
pub struct HyperboloidScenario {
    pub config: RunConfig,
    pub ambient_g: ChartedMetric,
    pub ambient_gp: ChartedMetric,
    pub strip_g: ChartedMetric,
    pub strip_gp: ChartedMetric,
    pub cylinder: CylinderDomain,
    pub diamond: Region,
    pub cutoff: BumpCutoff,
    pub cutoff_inside_region: bool,
}

impl HyperboloidScenario {
    pub fn build(config: &RunConfig) -> Result<HyperboloidScenario> {
        config.validate()?;
        let a = config.hyperboloid.a;
        let g = minkowski(1)?;
        let patch = de_sitter_patch(config.bump.r_c, config.bump.pole, 1)?;
        let cutoff = bump_cutoff(&config.bump.center, config.bump.r_in, config.bump.r_out)?;
        let diamond = diamond_region(a, 1);
        let spec = PerturbationSpec {
            base: g.clone(),
            patch,
            cutoff: cutoff.clone(),
            region: diamond.clone(),
        };
        let cutoff_inside = cutoff.support_inside(&diamond, 64);
        let gp = perturbed_metric(&spec)?;
        let map = strip_chart_map(a);
        let strip_g = pullback_metric(&map, &g, "hyperboloid-strip");
        let strip_gp = pullback_metric(&map, &gp, "hyperboloid-strip-perturbed");
        Ok(HyperboloidScenario {
            config: config.clone(),
            ambient_g: g,
            ambient_gp: gp,
            strip_g,
            strip_gp,
            cylinder: hyperboloid_cylinder(a, 1)?,
            diamond,
            cutoff,
            cutoff_inside_region: cutoff_inside,
        })
    }

    pub fn a(&self) -> f64 {
        self.config.hyperboloid.a
    }

    /// Scan budget: rays run until |t| = 10a.
    pub fn scan_options(&self) -> ScanOptions {
        self.config.scan_options(12.0 * self.a())
    }

    /// Causal future hull of the diamond: |x| < t + a/2.
    pub fn future_hull(&self) -> crate::spacetimes::IndicatorField {
        let a = self.a();
        Arc::new(move |p: &[f64]| p[1].abs() < p[0] + 0.5 * a)
    }

    /// Default boundary-comparison inputs for this geometry.
    pub fn compare_setup(&self) -> CompareSetup {
        let a = self.a();
        let map = strip_chart_map(a);
        // Interior probe: a ball straddling the cutoff core, expressed in
        // strip coordinates through x = xi b(t). The blended metric couples
        // sources through a different volume factor there, so the two runs
        // separate at leading order inside the hidden region.
        let probe_center = (-0.15, 0.0);
        let probe_radius = 0.25;
        let probe_amp = 1.0;
        let interior_source_strip = SourceSpec {
            eval: {
                let map = strip_chart_map(a);
                Arc::new(move |t: f64, xi: f64| {
                    let q = map.forward(&[t, xi]);
                    let r2 =
                        (q[0] - probe_center.0).powi(2) + (q[1] - probe_center.1).powi(2);
                    probe_amp
                        * crate::spacetimes::smooth_step(r2.sqrt() / probe_radius)
                })
            },
            support: (
                (probe_center.0 - probe_radius, probe_center.0 + probe_radius),
                (-1.0, 1.0),
            ),
        };
        // Exterior source in the past wedge, outside the cylinder; a second
        // source strictly after the cutoff window for the exact-equality
        // configuration.
        let exterior_source = SourceSpec::bump((-1.0, 4.2), 0.25, 1.0);
        let case1_source = SourceSpec::bump((1.0, 4.5), 0.25, 1.0);
        let probes = vec![(1.4, 4.5), (1.2, 3.6), (0.5, 4.0), (1.6, 5.2)];
        CompareSetup {
            label: "hyperboloid".to_string(),
            strip_g: self.strip_g.clone(),
            strip_gp: self.strip_gp.clone(),
            ambient_g: self.ambient_g.clone(),
            ambient_gp: self.ambient_gp.clone(),
            cylinder: hyperboloid_cylinder(a, 1).expect("validated"),
            strip_to_ambient: map,
            future_hull: self.future_hull(),
            strip_t_range: self.config.grid.strip_t_range,
            ambient_t_range: (-1.6, 1.8),
            ambient_x_range: (-11.0, 13.0),
            levels: self.config.grid.levels.clone(),
            pulse: PulseSpec {
                side: Side::Left,
                center: -1.2,
                width: 0.5,
                amp: 1.0,
            },
            interior_source_strip,
            exterior_source,
            case1_source,
            probes,
        }
    }

    pub fn witness_window(&self) -> ScanWindow {
        ScanWindow {
            t_range: (-0.8, 0.8),
            x_range: (-0.8, 0.8),
            nt: 41,
            nx: 41,
        }
    }
}

/// Serializable result envelope for the causality suite.
#[derive(Serialize)]
pub struct CausalitySuiteReport {
    pub config: RunConfig,
    pub reports: Vec<ReachabilityReport>,
    pub invariance: Option<InvarianceVerdict>,
    pub pass: bool,
}

/// Run the reachability verification for the configured scenario.
pub fn run_causality_suite(config: &RunConfig) -> Result<CausalitySuiteReport> {
    config.validate()?;
    match config.scenario.as_str() {
        "hyperboloid" => {
            let sc = HyperboloidScenario::build(config)?;
            let opts = sc.scan_options();
            let half = config.rays / 2;
            let fut = reachability_scan(
                &sc.ambient_g,
                &sc.cylinder,
                &sc.diamond,
                ScanDirection::Future,
                half,
                config.seed,
                &opts,
            )?;
            let past = reachability_scan(
                &sc.ambient_g,
                &sc.cylinder,
                &sc.diamond,
                ScanDirection::Past,
                config.rays - half,
                config.seed + 1,
                &opts,
            )?;
            let invariance = perturbation_reachability_invariance(
                &sc.ambient_g,
                &sc.ambient_gp,
                sc.cutoff_inside_region,
                &sc.cylinder,
                &sc.diamond,
                ScanDirection::Future,
                (config.rays / 4).max(16),
                config.seed + 2,
                &opts,
            )?;
            let bound = -sc.a() * sc.a() / 4.0 + 1e-6;
            let pass = fut.confined()
                && past.confined()
                && fut.clearance_outside_region <= bound
                && past.clearance_outside_region <= bound
                && invariance.identical_hits
                && !invariance.config_violation;
            Ok(CausalitySuiteReport {
                config: config.clone(),
                reports: vec![fut, past],
                invariance: Some(invariance),
                pass,
            })
        }
        "kruskal" => {
            let opts = config.scan_options(8.0);
            let half = config.rays / 2;
            let bh = kruskal_confinement_check(
                config.kruskal.r_s,
                config.kruskal.r0,
                ScanDirection::Future,
                half,
                config.seed,
                &opts,
            )?;
            let wh = kruskal_confinement_check(
                config.kruskal.r_s,
                config.kruskal.r0,
                ScanDirection::Past,
                config.rays - half,
                config.seed + 1,
                &opts,
            )?;
            let pass = bh.confined() && wh.confined();
            Ok(CausalitySuiteReport {
                config: config.clone(),
                reports: vec![bh, wh],
                invariance: None,
                pass,
            })
        }
        "flrw-bounce" => {
            let h = config.flrw.h_rate;
            let r_cyl = config.flrw.cylinder_radius();
            let metric = flrw_bounce(h, 1)?;
            let cyl = flrw_cylinder(r_cyl, 1)?;
            // Budget: cover the conformal lifetime with slack.
            let opts = config.scan_options(30.0 / h);
            let u_future = flrw_future_confined_region(h, r_cyl, 2.0 / h);
            let u_past = flrw_past_confined_region(h, r_cyl, 2.0 / h);
            let fut = reachability_scan(
                &metric,
                &cyl,
                &u_future,
                ScanDirection::Future,
                config.rays,
                config.seed,
                &opts,
            )?;
            let past = reachability_scan(
                &metric,
                &cyl,
                &u_past,
                ScanDirection::Past,
                config.rays,
                config.seed + 1,
                &opts,
            )?;
            let pass = fut.confined() && past.confined();
            Ok(CausalitySuiteReport {
                config: config.clone(),
                reports: vec![fut, past],
                invariance: None,
                pass,
            })
        }
        other => Err(Error::Config(format!("unknown scenario '{other}'"))),
    }
}

/// Serializable result envelope for the witness suite.
#[derive(Serialize)]
pub struct WitnessSuiteReport {
    pub config: RunConfig,
    pub verdict: WitnessVerdict,
    pub base_curvature_max: f64,
    pub pass: bool,
}

pub struct WitnessSuiteOutput {
    pub report: WitnessSuiteReport,
    pub base_scan: crate::witness::CurvatureScan,
    pub blended_scan: crate::witness::CurvatureScan,
}

pub fn run_witness_suite(config: &RunConfig) -> Result<WitnessSuiteOutput> {
    config.validate()?;
    if config.scenario != "hyperboloid" {
        return Err(Error::Config(
            "the curvature witness runs on the hyperboloid scenario".to_string(),
        ));
    }
    let sc = HyperboloidScenario::build(config)?;
    let window = sc.witness_window();
    let fd = config.tolerances.fd_step;
    let base = curvature_scan(&sc.ambient_g, window, fd)?;
    let blended = curvature_scan(&sc.ambient_gp, window, fd)?;
    let verdict = non_isometry_witness(&base, &blended, &sc.cutoff, fd, WitnessParams::default())?;
    let base_max = base.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let pass = verdict.verdict;
    Ok(WitnessSuiteOutput {
        report: WitnessSuiteReport {
            config: config.clone(),
            verdict,
            base_curvature_max: base_max,
            pass,
        },
        base_scan: base,
        blended_scan: blended,
    })
}

/// Serializable envelope for the boundary-data comparison suite.
#[derive(Serialize)]
pub struct CompareSuiteReport {
    pub config: RunConfig,
    pub report: crate::waves::ComparisonReport,
    pub pass: bool,
}

/// Run the wave comparison for the hyperboloid scenario in the given mode.
/// The pass flag gates what the mode actually measured: boundary and
/// exterior gaps must sit at the discretization floor relative to the
/// response scale while the interior gap stays solidly nonzero.
pub fn run_compare_suite(
    config: &RunConfig,
    mode: crate::waves::CompareMode,
) -> Result<CompareSuiteReport> {
    config.validate()?;
    if config.scenario != "hyperboloid" {
        return Err(Error::Config(
            "wave comparisons run on the hyperboloid scenario".to_string(),
        ));
    }
    let sc = HyperboloidScenario::build(config)?;
    let setup = sc.compare_setup();
    let report = crate::waves::compare_maps(&setup, mode)?;
    let dn_ok = report.d_bdy_finest <= 1e-5 * report.dn_scale_finest.max(f64::MIN_POSITIVE)
        && report.d_int >= 1e3 * report.d_bdy_finest;
    let sts_ok = report.d_ext_case1_max <= 1e-13;
    let pass = match mode {
        crate::waves::CompareMode::Dn => dn_ok,
        crate::waves::CompareMode::Sts => sts_ok,
        crate::waves::CompareMode::Both => dn_ok && sts_ok,
    };
    Ok(CompareSuiteReport {
        config: config.clone(),
        report,
        pass,
    })
}

/// Boundary-curve and region-outline samples for plotting.
#[derive(Serialize)]
pub struct FigureBundle {
    pub scenario: String,
    /// Rows of (t, x) or (T, R) or (eta, r) samples per named curve.
    pub curves: Vec<(String, Vec<(f64, f64)>)>,
}

pub fn figure_bundle(config: &RunConfig) -> Result<FigureBundle> {
    config.validate()?;
    let samples = 241;
    let mut curves = Vec::new();
    match config.scenario.as_str() {
        "hyperboloid" => {
            let a = config.hyperboloid.a;
            for (name, sign) in [("boundary_right", 1.0), ("boundary_left", -1.0)] {
                let pts = (0..samples)
                    .map(|k| {
                        let t = -3.0 + 6.0 * k as f64 / (samples - 1) as f64;
                        (t, sign * spacetimes::hyperboloid_half_width(a, t))
                    })
                    .collect();
                curves.push((name.to_string(), pts));
            }
            let diamond = [
                (0.0, 0.5 * a),
                (0.5 * a, 0.0),
                (0.0, -0.5 * a),
                (-0.5 * a, 0.0),
                (0.0, 0.5 * a),
            ];
            curves.push((
                "diamond".to_string(),
                diamond.iter().map(|(t, x)| (*t, *x)).collect(),
            ));
        }
        "kruskal" => {
            for (name, sign) in [("horizon_up", 1.0), ("horizon_down", -1.0)] {
                let pts = (0..samples)
                    .map(|k| {
                        let r_coord = -3.0 + 6.0 * k as f64 / (samples - 1) as f64;
                        (sign * r_coord, r_coord)
                    })
                    .collect();
                curves.push((name.to_string(), pts));
            }
            for (name, sign) in [("singularity_future", 1.0), ("singularity_past", -1.0)] {
                let pts = (0..samples)
                    .map(|k| {
                        let r_coord = -3.0 + 6.0 * k as f64 / (samples - 1) as f64;
                        (sign * (1.0 + r_coord * r_coord).sqrt(), r_coord)
                    })
                    .collect();
                curves.push((name.to_string(), pts));
            }
            // Cylinder wall r = r0 in the right exterior wedge.
            let r_s = config.kruskal.r_s;
            let r0 = config.kruskal.r0;
            let pts = (0..samples)
                .map(|k| {
                    let t_s = -6.0 + 12.0 * k as f64 / (samples - 1) as f64;
                    let (bt, br) = spacetimes::schwarzschild_to_kruskal(t_s, r0, r_s)
                        .expect("r0 > r_s");
                    (bt, br)
                })
                .collect();
            curves.push(("cylinder_wall".to_string(), pts));
        }
        "flrw-bounce" => {
            let h = config.flrw.h_rate;
            let r_cyl = config.flrw.cylinder_radius();
            let eta_max = PI / h;
            let up = (0..samples)
                .map(|k| {
                    let eta = eta_max * k as f64 / (samples - 1) as f64;
                    (eta, (eta + r_cyl - eta_max).max(0.0))
                })
                .collect();
            curves.push(("cone_future".to_string(), up));
            let down = (0..samples)
                .map(|k| {
                    let eta = eta_max * k as f64 / (samples - 1) as f64;
                    (eta, (r_cyl - eta).max(0.0))
                })
                .collect();
            curves.push(("cone_past".to_string(), down));
            curves.push((
                "boundary".to_string(),
                vec![(0.0, r_cyl), (eta_max, r_cyl)],
            ));
        }
        other => return Err(Error::Config(format!("unknown scenario '{other}'"))),
    }
    Ok(FigureBundle {
        scenario: config.scenario.clone(),
        curves,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_validate() {
        for name in SCENARIO_NAMES {
            RunConfig::for_scenario(name).validate().unwrap();
        }
    }

    #[test]
    fn config_json_round_trip_and_rejects() {
        let cfg = RunConfig::for_scenario("hyperboloid");
        let json = serde_json::to_string(&cfg).unwrap();
        let back = RunConfig::from_json(&json).unwrap();
        assert_eq!(back.scenario, "hyperboloid");
        assert!(RunConfig::from_json("{\"scenario\": \"nonsense\"}").is_err());
        let bad = r#"{"scenario": "kruskal", "kruskal": {"r_s": 2.0, "r0": 1.0}}"#;
        assert!(RunConfig::from_json(bad).is_err());
        let bad = r#"{"scenario": "flrw-bounce", "flrw": {"h_rate": 1.0, "r_cylinder": 2.0}}"#;
        assert!(RunConfig::from_json(bad).is_err());
        // Bump poking out of the diamond.
        let bad = r#"{"scenario": "hyperboloid", "bump": {"center": [0.8, 0.0]}}"#;
        assert!(RunConfig::from_json(bad).is_err());
        // Partial configs inherit defaults.
        let cfg = RunConfig::from_json(r#"{"scenario": "hyperboloid", "rays": 64}"#).unwrap();
        assert_eq!(cfg.rays, 64);
        assert_eq!(cfg.seed, 42);
    }

    #[test]
    fn hyperboloid_scenario_builds() {
        let cfg = RunConfig::for_scenario("hyperboloid");
        let sc = HyperboloidScenario::build(&cfg).unwrap();
        assert!(sc.cutoff_inside_region);
        // Blended metric differs from the base inside the cutoff.
        let g0 = sc.ambient_g.metric_at(&[0.0, 0.0]).unwrap();
        let g1 = sc.ambient_gp.metric_at(&[0.0, 0.0]).unwrap();
        assert!((g0[(0, 0)] - g1[(0, 0)]).abs() > 1e-3);
        // And coincides outside.
        let g0 = sc.ambient_g.metric_at(&[1.5, 0.5]).unwrap();
        let g1 = sc.ambient_gp.metric_at(&[1.5, 0.5]).unwrap();
        assert_eq!(g0[(0, 0)], g1[(0, 0)]);
    }

    #[test]
    fn figure_bundles_have_expected_curves() {
        for name in SCENARIO_NAMES {
            let cfg = RunConfig::for_scenario(name);
            let bundle = figure_bundle(&cfg).unwrap();
            assert!(!bundle.curves.is_empty());
        }
        // Hyperboloid wall matches b(t).
        let cfg = RunConfig::for_scenario("hyperboloid");
        let bundle = figure_bundle(&cfg).unwrap();
        let wall = &bundle.curves[0].1;
        for (t, x) in wall.iter().take(10) {
            assert!((x - spacetimes::hyperboloid_half_width(cfg.hyperboloid.a, *t)).abs() < 1e-12);
        }
    }
}
