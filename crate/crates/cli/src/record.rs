//! Serializable analysis records and their CSV layout.

use std::io::Write;

use coalition_forge::{EquilibriumReport, GameConfig};
use serde::{Deserialize, Serialize};

/// One analysis result as emitted by `analyze` and `sweep`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub n: usize,
    pub eta: f64,
    pub adamant: bool,
    pub ne_partitions: Vec<String>,
    pub so_partitions: Vec<String>,
    pub so_value: f64,
    pub worst_ne_sum: f64,
    pub poa: f64,
    pub multiple_partition_ne: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<f64>,
}

impl ReportRecord {
    pub fn new(config: &GameConfig, report: &EquilibriumReport) -> Self {
        ReportRecord {
            n: config.n(),
            eta: config.eta(),
            adamant: config.adamant_present(),
            ne_partitions: report.ne_labels().iter().map(|l| l.to_string()).collect(),
            so_partitions: report
                .so_partition_classes
                .iter()
                .map(|l| l.to_string())
                .collect(),
            so_value: report.so_value,
            worst_ne_sum: report.worst_ne_sum,
            poa: report.poa,
            multiple_partition_ne: report.multiple_partition_ne,
            runtime_ms: None,
        }
    }

    pub fn with_runtime(mut self, runtime_ms: f64) -> Self {
        self.runtime_ms = Some(runtime_ms);
        self
    }
}

/// Fixed CSV columns. Label lists are joined with `;`.
pub const CSV_HEADER: [&str; 9] = [
    "n",
    "eta",
    "adamant",
    "ne_partitions",
    "so_partitions",
    "so_value",
    "worst_ne_sum",
    "poa",
    "multiple_partition_ne",
];

/// Writes `records` as CSV. Run times are left out so that identical
/// inputs give identical bytes.
pub fn write_csv<W: Write>(out: W, records: &[ReportRecord]) -> csv::Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(CSV_HEADER)?;
    for r in records {
        writer.write_record([
            r.n.to_string(),
            r.eta.to_string(),
            r.adamant.to_string(),
            r.ne_partitions.join(";"),
            r.so_partitions.join(";"),
            r.so_value.to_string(),
            r.worst_ne_sum.to_string(),
            r.poa.to_string(),
            r.multiple_partition_ne.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// One JSON object per line.
pub fn write_json_lines<W: Write>(mut out: W, records: &[ReportRecord]) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}
