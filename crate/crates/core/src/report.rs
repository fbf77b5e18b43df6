//! CSV and JSON reports of pipeline runs.
//!
//! Column order is fixed. Floats are written with 17 significant digits;
//! undefined values (missing reference, effectivity at round-off) are empty
//! cells in CSV and `null` in JSON.

use serde::{Deserialize, Serialize};

use crate::mdgrid::CellMesh;
use crate::pipeline::{Deviation, RunResult};
use crate::{Error, Real, Result};

pub const MAJORANT_COLUMNS: [&str; 12] = [
    "scenario",
    "h",
    "config",
    "n_unknowns",
    "majorant",
    "eta_df",
    "eta_r",
    "error_primal",
    "error_dual",
    "eff_primal",
    "eff_dual",
    "conservation",
];

pub const INDICATOR_COLUMNS: [&str; 8] = [
    "scenario",
    "h",
    "config",
    "eta_omega_2",
    "eta_omega_1",
    "eta_omega_0",
    "eta_gamma_1",
    "eta_gamma_0",
];

pub const DEVIATION_COLUMNS: [&str; 7] = ["scenario", "h", "quantity", "baseline", "perturbed_mean", "perturbed_std", "relative"];

pub fn format_float<T: Real>(x: T) -> String {
    format!("{:.16e}", x.to_f64_lossy())
}

fn opt<T: Real>(x: Option<T>) -> String {
    x.map(format_float).unwrap_or_default()
}

fn write_table(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Config(format!("csv: {e}"));
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Config(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// One row per run: mesh size, majorant, true errors and effectivities.
pub fn majorant_csv<T: Real>(runs: &[RunResult<T>]) -> Result<String> {
    write_table(
        &MAJORANT_COLUMNS,
        runs.iter().map(|r| {
            let rep = &r.report;
            vec![
                r.scenario.clone(),
                format_float(r.h),
                r.config.label(),
                r.n_unknowns.to_string(),
                format_float(rep.majorant),
                format_float(rep.eta_df),
                format_float(rep.eta_res),
                opt(rep.errors.map(|e| e.primal)),
                opt(rep.errors.map(|e| e.dual)),
                opt(rep.effectivity_primal),
                opt(rep.effectivity_dual),
                format_float(r.conservation),
            ]
        }),
    )
}

/// One row per run: estimator contributions by subdomain and interface
/// dimension.
pub fn indicator_csv<T: Real>(runs: &[RunResult<T>]) -> Result<String> {
    write_table(
        &INDICATOR_COLUMNS,
        runs.iter().map(|r| {
            let s = &r.report.eta_subdomain_by_dim;
            let g = &r.report.eta_interface_by_dim;
            vec![
                r.scenario.clone(),
                format_float(r.h),
                r.config.label(),
                format_float(s[2]),
                format_float(s[1]),
                format_float(s[0]),
                format_float(g[1]),
                format_float(g[0]),
            ]
        }),
    )
}

pub fn deviation_csv<T: Real>(scenario: &str, devs: &[Deviation<T>]) -> Result<String> {
    write_table(
        &DEVIATION_COLUMNS,
        devs.iter().map(|d| {
            vec![
                scenario.to_string(),
                format_float(d.h),
                d.quantity.to_string(),
                format_float(d.baseline),
                format_float(d.perturbed_mean),
                format_float(d.perturbed_std),
                format_float(d.relative),
            ]
        }),
    )
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubdomainDetail {
    pub id: usize,
    pub dim: usize,
    pub eta: f64,
    pub eta_df: Vec<f64>,
    pub eta_r: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InterfaceDetail {
    pub id: usize,
    pub dim: usize,
    pub eta: f64,
    pub eta_df: Vec<f64>,
}

/// Per-cell estimator values of one run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunDetail {
    pub scenario: String,
    pub h: f64,
    pub config: String,
    pub majorant: f64,
    pub eta_df: f64,
    pub eta_r: f64,
    pub error_primal: Option<f64>,
    pub error_dual: Option<f64>,
    pub eff_primal: Option<f64>,
    pub eff_dual: Option<f64>,
    pub subdomains: Vec<SubdomainDetail>,
    pub interfaces: Vec<InterfaceDetail>,
}

fn lossy<T: Real>(v: &[T]) -> Vec<f64> {
    v.iter().map(|x| x.to_f64_lossy()).collect()
}

impl RunDetail {
    pub fn from_run<T: Real>(r: &RunResult<T>) -> Self {
        let rep = &r.report;
        Self {
            scenario: r.scenario.clone(),
            h: r.h.to_f64_lossy(),
            config: r.config.label(),
            majorant: rep.majorant.to_f64_lossy(),
            eta_df: rep.eta_df.to_f64_lossy(),
            eta_r: rep.eta_res.to_f64_lossy(),
            error_primal: rep.errors.map(|e| e.primal.to_f64_lossy()),
            error_dual: rep.errors.map(|e| e.dual.to_f64_lossy()),
            eff_primal: rep.effectivity_primal.map(|x| x.to_f64_lossy()),
            eff_dual: rep.effectivity_dual.map(|x| x.to_f64_lossy()),
            subdomains: (0..rep.eta_subdomain.len())
                .map(|i| SubdomainDetail {
                    id: i,
                    dim: r.bundle.subdomain_grids[i].dim(),
                    eta: rep.eta_subdomain[i].to_f64_lossy(),
                    eta_df: lossy(&rep.eta_df_par[i]),
                    eta_r: lossy(&rep.eta_r[i]),
                })
                .collect(),
            interfaces: (0..rep.eta_interface.len())
                .map(|j| InterfaceDetail {
                    id: j,
                    dim: r.bundle.interface_grids[j].dim(),
                    eta: rep.eta_interface[j].to_f64_lossy(),
                    eta_df: lossy(&rep.eta_df_perp[j]),
                })
                .collect(),
        }
    }

    /// `(Σ η_DF²)^{1/2} + (Σ η_R²)^{1/2}` from the per-cell values.
    pub fn recomputed_majorant(&self) -> f64 {
        let sq = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
        let df = self.subdomains.iter().map(|s| sq(&s.eta_df)).sum::<f64>() + self.interfaces.iter().map(|i| sq(&i.eta_df)).sum::<f64>();
        let r = self.subdomains.iter().map(|s| sq(&s.eta_r)).sum::<f64>();
        df.sqrt() + r.sqrt()
    }
}

pub fn detail_json<T: Real>(runs: &[RunResult<T>]) -> Result<String> {
    let details: Vec<RunDetail> = runs.iter().map(RunDetail::from_run).collect();
    Ok(serde_json::to_string_pretty(&details)?)
}
