//! The run report (`holoeq-report/v1`), atomic artifact writes and plot data.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use holoeq_core::deformed::ThresholdRule;
use holoeq_core::local_model::LocalRow;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

pub const REPORT_SCHEMA: &str = "holoeq-report/v1";
pub const REPORT_FILE: &str = "report.json";

/// Ordered by severity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Unresolved,
    Fail,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Unresolved => 3,
        }
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Unresolved => "unresolved",
            Status::Fail => "fail",
        })
    }
}

/// Where a number came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub model: String,
    pub cutoff: usize,
    pub t: Option<f64>,
    pub threshold: ThresholdRule,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CellData {
    Spectrum {
        degree: i32,
        dimension: usize,
        kernel_count: usize,
        /// None when the spectrum has no gap (all zero or all nonzero).
        gap_ratio: Option<f64>,
        resolved: bool,
        lowest: Vec<f64>,
    },
    ComplexDefect { value: f64, bound: f64 },
    Growth { lambda_min: f64, ratio: f64 },
    Bochner { residual: f64, bound: f64 },
    Local { row: LocalRow, isometry_defect: Option<f64> },
    Identities { checks: usize, failures: usize, mirror_gap: f64, golden_rows: usize },
    Error { message: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub provenance: Provenance,
    pub data: CellData,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub id: String,
    pub kind: String,
    pub cells: Vec<Cell>,
    /// Paths relative to the output directory.
    pub artifacts: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    /// Acceptance criterion identifier, "1" through "9".
    pub criterion: String,
    pub experiment: String,
    pub status: Status,
    pub detail: String,
    pub provenance: Vec<Provenance>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub holoeq_core: String,
    pub holoeq_lab: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub name: String,
    /// sha256 of the config file bytes.
    pub config_hash: String,
    pub versions: Versions,
    pub threshold: ThresholdRule,
    pub experiments: Vec<ExperimentRecord>,
    pub verdicts: Vec<Verdict>,
    /// Worst status per criterion.
    pub summary: BTreeMap<String, Status>,
    pub worst: Status,
}

impl Report {
    pub fn summarize(verdicts: &[Verdict]) -> (BTreeMap<String, Status>, Status) {
        let mut summary: BTreeMap<String, Status> = BTreeMap::new();
        for v in verdicts {
            let slot = summary.entry(v.criterion.clone()).or_insert(Status::Pass);
            *slot = (*slot).max(v.status);
        }
        let worst = summary.values().copied().max().unwrap_or(Status::Pass);
        (summary, worst)
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(REPORT_FILE);
        let text = std::fs::read_to_string(&path).map_err(|source| LabError::Io { path: path.clone(), source })?;
        let report: Report =
            serde_json::from_str(&text).map_err(|e| LabError::Report { path: path.clone(), message: e.to_string() })?;
        if report.schema != REPORT_SCHEMA {
            return Err(LabError::Report { path, message: format!("unexpected schema {}", report.schema) });
        }
        Ok(report)
    }
}

/// Write through a temporary file in the target directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let io = |source| LabError::Io { path: path.to_path_buf(), source };
    let parent = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(parent).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(parent).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

pub const PLOT_EIGENVALUES: &str = "plot/eigenvalues.csv";
pub const PLOT_GAP: &str = "plot/gap.csv";
pub const PLOT_GROWTH: &str = "plot/growth.csv";
pub const PLOT_LOCAL: &str = "plot/local.csv";

fn cells_of<'a>(report: &'a Report) -> impl Iterator<Item = (&'a str, &'a Cell)> {
    report.experiments.iter().flat_map(|e| e.cells.iter().map(move |c| (e.id.as_str(), c)))
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn t_of(c: &Cell) -> String {
    opt(c.provenance.t)
}

fn csv_bytes(header: &[&str], rows: Vec<Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// The four plot files as (relative path, bytes).
pub fn plot_tables(report: &Report) -> Vec<(&'static str, Vec<u8>)> {
    let mut eigen = Vec::new();
    let mut gap = Vec::new();
    let mut growth = Vec::new();
    let mut local = Vec::new();
    for (exp, c) in cells_of(report) {
        let p = &c.provenance;
        let tag = || vec![exp.to_string(), p.model.clone(), p.cutoff.to_string(), t_of(c)];
        match &c.data {
            CellData::Spectrum { degree, kernel_count, gap_ratio, resolved, lowest, .. } => {
                for (i, ev) in lowest.iter().enumerate() {
                    let mut row = tag();
                    row.extend([degree.to_string(), i.to_string(), ev.to_string()]);
                    eigen.push(row);
                }
                let first = lowest.get(*kernel_count).copied();
                let over_t = match (first, p.t) {
                    (Some(f), Some(t)) if t > 0.0 => Some(f / t),
                    _ => None,
                };
                let mut row = tag();
                row.extend([
                    degree.to_string(),
                    kernel_count.to_string(),
                    resolved.to_string(),
                    opt(*gap_ratio),
                    opt(first),
                    opt(over_t),
                ]);
                gap.push(row);
            }
            CellData::Growth { lambda_min, ratio } => {
                let mut row = tag();
                row.extend([lambda_min.to_string(), ratio.to_string()]);
                growth.push(row);
            }
            CellData::Local { row: r, .. } => local.push(vec![
                exp.to_string(),
                r.m.to_string(),
                r.cutoff.to_string(),
                r.epsilon.to_string(),
                r.t.to_string(),
                r.kernel_dim.to_string(),
                r.gap.to_string(),
                r.gap_over_t.to_string(),
                r.alpha_t.to_string(),
                r.alpha_scaled.to_string(),
            ]),
            _ => {}
        }
    }
    vec![
        (PLOT_EIGENVALUES, csv_bytes(&["experiment", "model", "cutoff", "t", "degree", "index", "eigenvalue"], eigen)),
        (
            PLOT_GAP,
            csv_bytes(
                &["experiment", "model", "cutoff", "t", "degree", "kernel_count", "resolved", "gap_ratio", "first_nonzero", "first_nonzero_over_t"],
                gap,
            ),
        ),
        (PLOT_GROWTH, csv_bytes(&["experiment", "model", "cutoff", "t", "lambda_min", "ratio"], growth)),
        (
            PLOT_LOCAL,
            csv_bytes(
                &["experiment", "m", "cutoff", "epsilon", "t", "kernel_dim", "gap", "gap_over_t", "alpha_t", "alpha_scaled"],
                local,
            ),
        ),
    ]
}

/// Write the plot files under `dir`, returning their paths.
pub fn emit_plotdata(report: &Report, dir: &Path) -> Result<Vec<PathBuf>> {
    plot_tables(report)
        .into_iter()
        .map(|(rel, bytes)| {
            let path = dir.join(rel);
            write_atomic(&path, &bytes)?;
            Ok(path)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prov(t: f64) -> Provenance {
        Provenance { model: "m".into(), cutoff: 3, t: Some(t), threshold: ThresholdRule::default() }
    }

    fn spectrum(t: f64, degree: i32) -> Cell {
        Cell {
            provenance: prov(t),
            data: CellData::Spectrum {
                degree,
                dimension: 3,
                kernel_count: 1,
                gap_ratio: None,
                resolved: true,
                lowest: vec![0.0, 2.0 * t, 3.0],
            },
        }
    }

    fn sample() -> Report {
        let cells = vec![spectrum(1.0, 0), spectrum(1.0, 1), spectrum(2.0, 0), spectrum(2.0, 1)];
        let verdicts = vec![
            Verdict { criterion: "7".into(), experiment: "e".into(), status: Status::Pass, detail: String::new(), provenance: vec![] },
            Verdict { criterion: "7".into(), experiment: "f".into(), status: Status::Unresolved, detail: String::new(), provenance: vec![] },
        ];
        let (summary, worst) = Report::summarize(&verdicts);
        Report {
            schema: REPORT_SCHEMA.into(),
            name: "n".into(),
            config_hash: "0".into(),
            versions: Versions { holoeq_core: "0".into(), holoeq_lab: "0".into() },
            threshold: ThresholdRule::default(),
            experiments: vec![ExperimentRecord { id: "e".into(), kind: "sweep".into(), cells, artifacts: vec![] }],
            verdicts,
            summary,
            worst,
        }
    }

    #[test]
    fn worst_status_wins() {
        let r = sample();
        assert_eq!(r.worst, Status::Unresolved);
        assert_eq!(r.summary["7"], Status::Unresolved);
        assert!(Status::Fail > Status::Unresolved);
    }

    #[test]
    fn gap_file_has_one_row_per_t_and_degree() {
        let tables = plot_tables(&sample());
        let gap = String::from_utf8(tables[1].1.clone()).unwrap();
        let lines: Vec<&str> = gap.lines().collect();
        assert_eq!(lines.len(), 1 + 4);
        assert!(lines[1].ends_with(",true,,2,2"));
    }

    #[test]
    fn report_roundtrips_through_json() {
        let r = sample();
        let back: Report = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(back, r);
    }
}
