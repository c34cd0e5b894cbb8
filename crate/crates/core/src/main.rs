//! Scenario runner: reproducible verification suites with JSON reports and
//! CSV traces. Exit code 0 when every verdict passes, 1 on a failed
//! verdict, 2 on an invalid configuration.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cloakwave::error::Error;
use cloakwave::report;
use cloakwave::scenario::{
    figure_bundle, run_causality_suite, run_compare_suite, run_witness_suite, RunConfig,
};
use cloakwave::waves::CompareMode;

/// Output directory override, lowest to highest precedence: config file,
/// CLOAKWAVE_OUT_DIR, --out.
const OUT_DIR_ENV: &str = "CLOAKWAVE_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "cloakwave",
    about = "Certify that causally hidden metric perturbations are invisible to boundary wave data",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Geodesic-based verification suites.
    Verify {
        #[command(subcommand)]
        what: VerifyWhat,
    },
    /// Boundary-data comparisons between the base and blended metric.
    Compare {
        #[command(subcommand)]
        what: CompareWhat,
    },
    /// Scalar-curvature non-isometry witness.
    Witness(CommonArgs),
    /// Emit boundary curves, region outlines and witness ray paths as CSV.
    Figures(FiguresArgs),
}

#[derive(Subcommand)]
enum VerifyWhat {
    /// Confinement scans: causal rays from the hidden region must miss the
    /// cylinder boundary.
    Causality(CommonArgs),
}

#[derive(Subcommand)]
enum CompareWhat {
    /// Dirichlet-to-Neumann gap across refinement levels plus the interior
    /// probe gap.
    Dn(CommonArgs),
    /// Exterior source-to-solution gaps, including the exact-equality
    /// configuration.
    Sts(CommonArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// JSON config file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Scenario name: hyperboloid | kruskal | flrw-bounce.
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of rays for scan suites.
    #[arg(long)]
    rays: Option<usize>,
    /// Hyperboloid opening parameter.
    #[arg(long)]
    a: Option<f64>,
    /// Schwarzschild radius.
    #[arg(long)]
    r_s: Option<f64>,
    /// Cylinder radius in the black-hole scenario.
    #[arg(long)]
    r0: Option<f64>,
    /// Expansion rate of the bounce cosmology.
    #[arg(long)]
    h_rate: Option<f64>,
    /// Cylinder radius of the bounce cosmology (default pi/H + 0.5).
    #[arg(long)]
    r_cylinder: Option<f64>,
    /// Curvature radius of the blended patch.
    #[arg(long, value_name = "RC")]
    rc: Option<f64>,
    /// Number of refinement levels for comparisons (from 129 upward,
    /// doubling).
    #[arg(long)]
    levels: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct FiguresArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Directory holding a previous run's report.json; its witness paths are
    /// exported alongside the curve outlines.
    #[arg(long)]
    from: Option<PathBuf>,
}

fn load_config(args: &CommonArgs) -> Result<RunConfig, Error> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            RunConfig::from_json(&text)?
        }
        None => {
            let name = args.scenario.as_deref().unwrap_or("hyperboloid");
            RunConfig::for_scenario(name)
        }
    };
    if let Some(name) = &args.scenario {
        cfg.scenario = name.clone();
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(rays) = args.rays {
        cfg.rays = rays;
    }
    if let Some(a) = args.a {
        cfg.hyperboloid.a = a;
    }
    if let Some(r_s) = args.r_s {
        cfg.kruskal.r_s = r_s;
    }
    if let Some(r0) = args.r0 {
        cfg.kruskal.r0 = r0;
    }
    if let Some(h) = args.h_rate {
        cfg.flrw.h_rate = h;
    }
    if let Some(rcyl) = args.r_cylinder {
        cfg.flrw.r_cylinder = Some(rcyl);
    }
    if let Some(rc) = args.rc {
        cfg.bump.r_c = rc;
    }
    if let Some(levels) = args.levels {
        let all = [129usize, 257, 513, 1025, 2049];
        if levels == 0 || levels > all.len() {
            return Err(Error::Config(format!(
                "--levels must be between 1 and {}",
                all.len()
            )));
        }
        cfg.grid.levels = all[..levels].to_vec();
    }
    if let Some(out) = &args.out {
        cfg.output_dir = Some(out.display().to_string());
    } else if cfg.output_dir.is_none() {
        if let Ok(dir) = std::env::var(OUT_DIR_ENV) {
            cfg.output_dir = Some(dir);
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(cfg: &RunConfig) -> PathBuf {
    PathBuf::from(
        cfg.output_dir
            .clone()
            .unwrap_or_else(|| "cloakwave-out".to_string()),
    )
}

fn scenario_cylinder(cfg: &RunConfig) -> Result<cloakwave::spacetimes::CylinderDomain, Error> {
    match cfg.scenario.as_str() {
        "hyperboloid" => cloakwave::spacetimes::hyperboloid_cylinder(cfg.hyperboloid.a, 1),
        "kruskal" => cloakwave::spacetimes::schwarzschild_cylinder(cfg.kruskal.r0, cfg.kruskal.r_s),
        "flrw-bounce" => cloakwave::spacetimes::flrw_cylinder(cfg.flrw.cylinder_radius(), 1),
        other => Err(Error::Config(format!("unknown scenario '{other}'"))),
    }
}

fn run(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::Verify {
            what: VerifyWhat::Causality(args),
        } => {
            let cfg = load_config(&args)?;
            let dir = out_dir(&cfg);
            let suite = run_causality_suite(&cfg)?;
            report::write_json(&dir.join("report.json"), &suite)?;
            let cyl = scenario_cylinder(&cfg)?;
            for r in &suite.reports {
                let name = format!(
                    "traces/witness_{}.csv",
                    match r.direction {
                        cloakwave::causality::ScanDirection::Future => "future",
                        cloakwave::causality::ScanDirection::Past => "past",
                    }
                );
                report::write_witness_path_csv(&dir.join(name), r, &cyl)?;
                println!(
                    "{} {:?}: {} rays, {} boundary hits, clearance {:.3e}",
                    r.scenario,
                    r.direction,
                    r.rays_total,
                    r.rays_hit_boundary,
                    r.min_boundary_clearance
                );
            }
            println!(
                "causality[{}]: {}  (report: {})",
                cfg.scenario,
                if suite.pass { "PASS" } else { "FAIL" },
                dir.join("report.json").display()
            );
            Ok(suite.pass)
        }
        Command::Compare { what } => {
            let (args, mode, label) = match what {
                CompareWhat::Dn(a) => (a, CompareMode::Dn, "dn"),
                CompareWhat::Sts(a) => (a, CompareMode::Sts, "sts"),
            };
            let cfg = load_config(&args)?;
            let dir = out_dir(&cfg);
            let suite = run_compare_suite(&cfg, mode)?;
            report::write_json(&dir.join("report.json"), &suite)?;
            for level in &suite.report.levels {
                match mode {
                    CompareMode::Dn => println!(
                        "nx={:5}  D_bdy={:.3e}  scale={:.3e}",
                        level.nx, level.d_bdy, level.dn_scale
                    ),
                    _ => println!(
                        "nx={:5}  D_bdy={:.3e}  scale={:.3e}  D_ext={:.3e}  D_ext_case1={:.3e}",
                        level.nx, level.d_bdy, level.dn_scale, level.d_ext, level.d_ext_case1
                    ),
                }
            }
            if mode != CompareMode::Sts {
                println!(
                    "D_int={:.3e}  D_bdy(finest)={:.3e}  ratios={:?}",
                    suite.report.d_int, suite.report.d_bdy_finest, suite.report.d_bdy_ratios
                );
            }
            if let Some(traces) = &suite.report.finest_traces {
                report::write_trace_csv(&dir.join("traces/dn_base_left.csv"), &traces.base_left)?;
                report::write_trace_csv(
                    &dir.join("traces/dn_base_right.csv"),
                    &traces.base_right,
                )?;
                report::write_trace_csv(
                    &dir.join("traces/dn_blended_left.csv"),
                    &traces.blended_left,
                )?;
                report::write_trace_csv(
                    &dir.join("traces/dn_blended_right.csv"),
                    &traces.blended_right,
                )?;
            }
            if !suite.report.interior_gap_snapshot.is_empty() {
                report::write_snapshot_csv(
                    &dir.join("traces/interior_gap.csv"),
                    &suite.report.interior_gap_snapshot,
                )?;
            }
            println!(
                "compare {label}[{}]: {}  (report: {})",
                cfg.scenario,
                if suite.pass { "PASS" } else { "FAIL" },
                dir.join("report.json").display()
            );
            Ok(suite.pass)
        }
        Command::Witness(args) => {
            let cfg = load_config(&args)?;
            let dir = out_dir(&cfg);
            let out = run_witness_suite(&cfg)?;
            report::write_json(&dir.join("report.json"), &out.report)?;
            report::write_scan_csv(&dir.join("traces/curvature_base.csv"), &out.base_scan)?;
            report::write_scan_csv(
                &dir.join("traces/curvature_blended.csv"),
                &out.blended_scan,
            )?;
            println!(
                "witness[{}]: c = {:.6}, residual = {:.3e}, verdict = {:?}",
                cfg.scenario,
                out.report.verdict.c,
                out.report.verdict.constancy_residual,
                out.report.verdict.outcome
            );
            println!(
                "witness[{}]: {}  (report: {})",
                cfg.scenario,
                if out.report.pass { "PASS" } else { "FAIL" },
                dir.join("report.json").display()
            );
            Ok(out.report.pass)
        }
        Command::Figures(args) => {
            let cfg = load_config(&args.common)?;
            let dir = out_dir(&cfg);
            let from = args.from.clone().unwrap_or_else(|| dir.clone());
            let report_path = from.join("report.json");
            if !report_path.exists() {
                return Err(Error::Config(format!(
                    "no report at {} (run a verification suite first)",
                    report_path.display()
                )));
            }
            let bundle = figure_bundle(&cfg)?;
            report::write_curves_csv(&dir.join("figures/curves.csv"), &bundle)?;
            // Copy witness ray traces alongside when the source run has them.
            let mut copied = 0;
            for name in ["witness_future.csv", "witness_past.csv"] {
                let src = from.join("traces").join(name);
                if src.exists() {
                    let dst = dir.join("figures").join(name);
                    if let Some(parent) = dst.parent() {
                        std::fs::create_dir_all(parent)?;
                    }
                    std::fs::copy(&src, &dst)?;
                    copied += 1;
                }
            }
            println!(
                "figures[{}]: wrote {} curves and {copied} ray traces under {}",
                cfg.scenario,
                bundle.curves.len(),
                dir.join("figures").display()
            );
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::from(0),
        Ok(false) => ExitCode::from(1),
        Err(Error::Config(msg)) => {
            eprintln!("config error: {msg}");
            eprintln!("expected schema: see docs/config.schema.json");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
