//! Drivers that combine meshing, solving, analysis and the closed forms into
//! reports with named boolean claims.
//!
//! Every report serializes to JSON with a fixed field order and sorted claim
//! keys. Output files are named `<experiment>_<hash>.json` / `.csv`, where
//! the hash is taken over the fully resolved configuration.

mod adhoc;
mod annulus;
mod narrow;
mod suite;
mod triangles;
mod validate;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use adhoc::{
    fail_point_experiment, solve_experiment, FailPointConfig, FailPointExperimentReport, SolveConfig, SolveReport,
};
pub use annulus::{
    annulus_experiment, AnnulusConfig, AnnulusReport, AnnulusSample, AnnulusTolerances, ConcentricControl,
};
pub use narrow::{
    endpoint_exclusion_check, narrow_side_comparison, narrow_sweep, symmetric_parabolas, EndpointConfig,
    EndpointReport, EndpointRow, GapReading, NarrowCompareConfig, NarrowComparison, NarrowFailX, NarrowResolution,
    NarrowRow, NarrowSweepConfig, NarrowSweepReport, NarrowSweepTolerances, RefinementCheck, Winner,
};
pub use suite::{
    random_triangle_suite, suite_triangles, SuiteConfig, SuiteReport, SuiteRow, SuiteTolerances, SuiteTriangle,
    TriangleKind,
};
pub use triangles::{
    triangle_family, w2_bound_experiment, FamilyConfig, PerturbationReport, PerturbationRow, W2Config, W2Report,
    W2Tolerances,
};
pub use validate::{validate_oracles, OracleCheck, ValidateReport};

use crate::error::Result;
use crate::fem::{solve_torsion, SolveOptions, TorsionSolution};
use crate::geometry::{build_mesh, DomainSpec};

/// Named pass/fail outcomes of a report, in sorted order.
pub type Claims = BTreeMap<String, bool>;

/// Common surface of every experiment report.
pub trait Report: Serialize {
    /// File-name prefix.
    const NAME: &'static str;

    fn claims(&self) -> &Claims;

    /// Main table of the report as CSV text with a header line.
    fn csv(&self) -> String;

    fn all_claims_hold(&self) -> bool {
        self.claims().values().all(|&ok| ok)
    }
}

/// Mesh and solver facts recorded with every solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveInfo {
    pub h: f64,
    pub n_nodes: usize,
    pub n_elements: usize,
    pub iterations: usize,
    pub relative_residual: f64,
    pub rel_tol: f64,
}

impl SolveInfo {
    pub fn of(solution: &TorsionSolution, rel_tol: f64) -> Self {
        Self {
            h: solution.mesh.h,
            n_nodes: solution.mesh.n_nodes(),
            n_elements: solution.mesh.n_elements(),
            iterations: solution.iterations,
            relative_residual: solution.relative_residual,
            rel_tol,
        }
    }
}

/// Default relative residual for experiment solves.
pub const DEFAULT_REL_TOL: f64 = 1e-12;

pub(crate) fn solve_domain(spec: &DomainSpec, h: f64, rel_tol: f64) -> Result<TorsionSolution> {
    let mesh = Arc::new(build_mesh(spec, h)?);
    solve_torsion(mesh, SolveOptions::with_tol(rel_tol))
}

/// First 16 hex digits of the SHA-256 of the configuration's JSON.
pub fn config_hash<C: Serialize>(config: &C) -> Result<String> {
    let json = serde_json::to_string(config)?;
    let digest = Sha256::digest(json.as_bytes());
    Ok(digest.iter().take(8).map(|b| format!("{b:02x}")).collect())
}

/// Paths written for one report.
#[derive(Clone, Debug, PartialEq)]
pub struct WrittenReport {
    pub json: PathBuf,
    pub csv: PathBuf,
    pub extra: Vec<PathBuf>,
}

/// Write `<NAME>_<hash>.json`, `<NAME>_<hash>.csv` and any extra tables
/// `<NAME>_<hash>_<suffix>.csv` into `dir`, creating it if needed.
pub fn write_report<C: Serialize, R: Report>(
    dir: &Path,
    config: &C,
    report: &R,
    extra: &[(&str, String)],
) -> Result<WrittenReport> {
    std::fs::create_dir_all(dir)?;
    let stem = format!("{}_{}", R::NAME, config_hash(config)?);
    let json = dir.join(format!("{stem}.json"));
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    std::fs::write(&json, text)?;
    let csv = dir.join(format!("{stem}.csv"));
    std::fs::write(&csv, report.csv())?;
    let mut written = Vec::new();
    for (suffix, body) in extra {
        let path = dir.join(format!("{stem}_{suffix}.csv"));
        std::fs::write(&path, body)?;
        written.push(path);
    }
    Ok(WrittenReport { json, csv, extra: written })
}

/// Least-squares slope of `ln y` against `ln x`.
pub(crate) fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.abs().ln()).collect();
    crate::numeric::linear_fit(&lx, &ly).0
}

/// CSV table builder writing shortest round-trip floats.
pub(crate) struct Table {
    out: String,
}

impl Table {
    pub(crate) fn new(header: &str) -> Self {
        Self { out: format!("{header}\n") }
    }

    pub(crate) fn row(&mut self, cells: &[String]) {
        self.out.push_str(&cells.join(","));
        self.out.push('\n');
    }

    pub(crate) fn finish(self) -> String {
        self.out
    }
}

/// Shortest round-trip text of a float (`NaN` and infinities spelled out).
pub(crate) fn num(v: f64) -> String {
    format!("{v:?}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_stable_and_short() {
        let h1 = config_hash(&serde_json::json!({"a": 1, "b": [0.1, 0.2]})).unwrap();
        let h2 = config_hash(&serde_json::json!({"a": 1, "b": [0.1, 0.2]})).unwrap();
        assert_eq!(h1, h2);
        assert_eq!(h1.len(), 16);
        assert_ne!(h1, config_hash(&serde_json::json!({"a": 2})).unwrap());
    }

    #[test]
    fn slope_of_power_law() {
        let x = [0.2, 0.1, 0.05];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powi(6)).collect();
        assert!((log_log_slope(&x, &y) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn float_text_round_trips() {
        for v in [0.1, 1.0 / 3.0, 1e-300, -2.5e17] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(num(0.1), "0.1");
    }
}
