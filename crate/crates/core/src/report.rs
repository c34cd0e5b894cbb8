//! Report serialization: JSON result envelopes and CSV traces. Output is
//! byte-deterministic for identical inputs; reports carry no timestamps.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::causality::ReachabilityReport;
use crate::error::{Error, Result};
use crate::scenario::FigureBundle;
use crate::spacetimes::CylinderDomain;
use crate::waves::BoundaryTrace;
use crate::witness::CurvatureScan;

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut buf = serde_json::to_vec_pretty(value)
        .map_err(|e| Error::Io(format!("json serialize: {e}")))?;
    buf.push(b'\n');
    fs::write(path, buf)?;
    Ok(())
}

pub fn to_json_bytes<T: serde::Serialize>(value: &T) -> Result<Vec<u8>> {
    serde_json::to_vec_pretty(value).map_err(|e| Error::Io(format!("json serialize: {e}")))
}

/// Witness path of the extremal ray: columns s, coords..., f.
pub fn write_witness_path_csv(
    path: &Path,
    report: &ReachabilityReport,
    cyl: &CylinderDomain,
) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut out = fs::File::create(path)?;
    let dim = report
        .witness_path
        .first()
        .map(|s| s.position.len())
        .unwrap_or(0);
    let coords: Vec<String> = (0..dim).map(|i| format!("x{i}")).collect();
    writeln!(out, "s,{},f", coords.join(","))?;
    for sample in &report.witness_path {
        let pos: Vec<String> = sample.position.iter().map(|v| format!("{v}")).collect();
        writeln!(out, "{},{},{}", sample.s, pos.join(","), cyl.f(&sample.position))?;
    }
    Ok(())
}

pub fn write_trace_csv(path: &Path, trace: &BoundaryTrace) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut out = fs::File::create(path)?;
    writeln!(out, "t,value")?;
    for (t, v) in trace.times.iter().zip(&trace.values) {
        writeln!(out, "{t},{v}")?;
    }
    Ok(())
}

pub fn write_curves_csv(path: &Path, bundle: &FigureBundle) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut out = fs::File::create(path)?;
    writeln!(out, "curve,u,v")?;
    for (name, points) in &bundle.curves {
        for (u, v) in points {
            writeln!(out, "{name},{u},{v}")?;
        }
    }
    Ok(())
}

/// Decimated field snapshot rows of (t, x, value).
pub fn write_snapshot_csv(path: &Path, rows: &[(f64, f64, f64)]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut out = fs::File::create(path)?;
    writeln!(out, "t,x,value")?;
    for (t, x, v) in rows {
        writeln!(out, "{t},{x},{v}")?;
    }
    Ok(())
}

pub fn write_scan_csv(path: &Path, scan: &CurvatureScan) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut out = fs::File::create(path)?;
    writeln!(out, "t,x,scalar_curvature,grad_norm")?;
    for i in 0..scan.window.nt {
        for j in 0..scan.window.nx {
            writeln!(
                out,
                "{},{},{},{}",
                scan.window.t(i),
                scan.window.x(j),
                scan.at(i, j),
                scan.grad_at(i, j)
            )?;
        }
    }
    Ok(())
}
