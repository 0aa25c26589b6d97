//! CSV writers. Every file has a header row; column order is fixed by the
//! row structs below. Missing values are empty fields.
#![allow(non_snake_case)]

use std::fs;
use std::path::{Path, PathBuf};

use dform_core::dform::{EvolutionRow, Refinement};
use dform_core::dynamics::{DecayRecord, DiagnosticsRow, PhaseRow};
use serde::Serialize;

use crate::error::{HarnessError, Result};

/// Writes `rows` to `dir/name`, creating `dir` if needed, and returns the path.
pub fn write_csv<T: Serialize>(dir: &Path, name: &str, rows: &[T]) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|source| HarnessError::Io { path: dir.into(), source })?;
    let path = dir.join(name);
    let csv_err = |source| HarnessError::Csv { path: path.clone(), source };
    let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush().map_err(|source| HarnessError::Io { path: path.clone(), source })?;
    Ok(path)
}

/// Writes a header-only file when `rows` is empty (serde cannot infer headers
/// without a row).
pub fn write_csv_with_header<T: Serialize>(dir: &Path, name: &str, header: &[&str], rows: &[T]) -> Result<PathBuf> {
    if !rows.is_empty() {
        return write_csv(dir, name, rows);
    }
    fs::create_dir_all(dir).map_err(|source| HarnessError::Io { path: dir.into(), source })?;
    let path = dir.join(name);
    let mut w = csv::Writer::from_path(&path).map_err(|source| HarnessError::Csv { path: path.clone(), source })?;
    w.write_record(header).map_err(|source| HarnessError::Csv { path: path.clone(), source })?;
    w.flush().map_err(|source| HarnessError::Io { path: path.clone(), source })?;
    Ok(path)
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsCsv {
    pub s: f64,
    #[serde(rename = "E")]
    pub energy: f64,
    #[serde(rename = "Z")]
    pub enstrophy: f64,
    pub norm_V: f64,
    pub norm_DA: f64,
    pub delta_H: f64,
    pub delta_V: f64,
    pub delta_DA: f64,
}

impl From<&DiagnosticsRow> for DiagnosticsCsv {
    fn from(r: &DiagnosticsRow) -> Self {
        DiagnosticsCsv {
            s: r.s,
            energy: r.energy,
            enstrophy: r.enstrophy,
            norm_V: r.norm_v,
            norm_DA: r.norm_a,
            delta_H: r.delta_h,
            delta_V: r.delta_v,
            delta_DA: r.delta_a,
        }
    }
}

pub const DIAGNOSTICS_HEADER: [&str; 8] = ["s", "E", "Z", "norm_V", "norm_DA", "delta_H", "delta_V", "delta_DA"];

pub fn diagnostics_rows(rows: &[DiagnosticsRow]) -> Vec<DiagnosticsCsv> {
    rows.iter().map(DiagnosticsCsv::from).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SyncSummaryCsv {
    pub mu: f64,
    pub h: f64,
    pub kind: &'static str,
    pub status: &'static str,
    pub decay_rate: Option<f64>,
    pub sync_time: Option<f64>,
    pub final_relative: f64,
    /// `2μκ₀²c_J h²`; synchronization is guaranteed when it is at most one.
    pub mucond1: Option<f64>,
}

impl SyncSummaryCsv {
    pub fn new(rec: &DecayRecord, mucond1: Option<f64>) -> Self {
        SyncSummaryCsv {
            mu: rec.mu,
            h: rec.h,
            kind: rec.kind,
            status: rec.status.as_str(),
            decay_rate: rec.rate,
            sync_time: rec.sync_time,
            final_relative: rec.final_relative,
            mucond1,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PhaseCsv {
    pub mu: f64,
    pub h: f64,
    pub kind: &'static str,
    pub decay_rate: Option<f64>,
    pub synchronized: bool,
    pub resolution: u64,
    pub status: String,
    pub dt: f64,
}

impl From<&PhaseRow> for PhaseCsv {
    fn from(r: &PhaseRow) -> Self {
        PhaseCsv {
            mu: r.mu,
            h: r.h,
            kind: r.kind,
            decay_rate: r.decay_rate,
            synchronized: r.synchronized,
            resolution: r.resolution,
            status: r.status.clone(),
            dt: r.dt,
        }
    }
}

pub const PHASE_HEADER: [&str; 8] = ["mu", "h", "kind", "decay_rate", "synchronized", "resolution", "status", "dt"];

#[derive(Debug, Clone, Serialize)]
pub struct EvolutionCsv {
    pub t: f64,
    pub a: f64,
    pub g: f64,
    pub xnorm_dist: f64,
    pub dadt: f64,
}

impl From<&EvolutionRow> for EvolutionCsv {
    fn from(r: &EvolutionRow) -> Self {
        EvolutionCsv { t: r.t, a: r.a, g: r.g, xnorm_dist: r.xnorm_dist, dadt: r.dadt }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WAuditCsv {
    pub s: f64,
    pub norm_w: f64,
    pub norm_wprime: f64,
    pub norm_Aw: f64,
}

impl From<&(f64, f64, f64, f64)> for WAuditCsv {
    fn from(&(s, norm_w, norm_wprime, norm_aw): &(f64, f64, f64, f64)) -> Self {
        WAuditCsv { s, norm_w, norm_wprime, norm_Aw: norm_aw }
    }
}

/// Scalar results of a `dform` run, one `quantity,value` pair per row.
#[derive(Debug, Clone, Serialize)]
pub struct SummaryCsv {
    pub quantity: String,
    pub value: f64,
}

pub fn summary(pairs: &[(&str, f64)]) -> Vec<SummaryCsv> {
    pairs.iter().map(|&(q, v)| SummaryCsv { quantity: q.into(), value: v }).collect()
}

pub fn refinement_summary(r: &Refinement) -> Vec<(&'static str, f64)> {
    vec![("g_base", r.g_base), ("g_refined", r.g_refined), ("eps_disc", r.eps_disc)]
}

#[derive(Debug, Clone, Serialize)]
pub struct InequalityCsv {
    pub id: &'static str,
    pub constant: f64,
    pub ensemble_size: usize,
    pub resolution: usize,
    pub seed: u64,
    pub skipped: usize,
    pub heldout_violations: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityCsv {
    pub identity: &'static str,
    pub max_violation: f64,
    pub samples: usize,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct LemmaCsv {
    pub samples: usize,
    pub checks: usize,
    pub violations: usize,
    pub worst_ratio: f64,
    pub worst_n: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstantsCsv {
    pub kind: &'static str,
    pub h: f64,
    pub c1: f64,
    pub c2: f64,
    pub c1t: f64,
    pub c2t: f64,
    pub cJ: f64,
    pub ensemble_seed: u64,
    pub resolution: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ThresholdCsv {
    /// `measured` or `2x` (constants inflated by two).
    pub margin: &'static str,
    pub kind: &'static str,
    pub resolution: u64,
    pub h: f64,
    pub mu: f64,
    pub grashof: f64,
    pub c_T: f64,
    pub c_B: f64,
    pub c0: f64,
    pub mu_min_sync: f64,
    pub h_max: f64,
    pub sync_admissible: bool,
    pub h_max_W: f64,
}
