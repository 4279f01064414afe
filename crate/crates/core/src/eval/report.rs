use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::metrics::MetricsRecord;
use super::plot::render_f1_plot;
use super::StrategyId;
use crate::error::{Error, Result};

pub const RESULTS_FILE: &str = "results.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const PLOT_FILE: &str = "f1_vs_k.png";

/// Mean and sample standard deviation of F1 over the repetitions of one cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub strategy: StrategyId,
    pub k: usize,
    pub f1_mean: f64,
    pub f1_std: f64,
    pub n: usize,
}

pub fn write_results_csv(records: &[MetricsRecord], path: impl AsRef<Path>) -> Result<()> {
    let mut sorted = records.to_vec();
    sorted.sort_by_key(MetricsRecord::sort_key);
    let mut w = csv::Writer::from_path(path)?;
    for r in &sorted {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_results_csv(path: impl AsRef<Path>) -> Result<Vec<MetricsRecord>> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path)?;
    let records = r.deserialize().collect::<std::result::Result<Vec<MetricsRecord>, _>>()?;
    if records.is_empty() {
        return Err(Error::Format { path: path.to_path_buf(), reason: "results table has no rows".into() });
    }
    Ok(records)
}

/// Groups by (strategy, k). The standard deviation uses `n − 1` and is 0 for
/// a single repetition.
pub fn summarize(records: &[MetricsRecord]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(StrategyId, usize), Vec<f64>> = BTreeMap::new();
    for r in records {
        groups.entry((r.strategy, r.k)).or_default().push(r.f1);
    }
    groups
        .into_iter()
        .map(|((strategy, k), f1)| {
            let n = f1.len();
            let mean = f1.iter().sum::<f64>() / n as f64;
            let std = if n > 1 {
                (f1.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
            } else {
                0.0
            };
            SummaryRow { strategy, k, f1_mean: mean, f1_std: std, n }
        })
        .collect()
}

pub fn write_summary_csv(rows: &[SummaryRow], path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReportFiles {
    pub results: PathBuf,
    pub summary: PathBuf,
    pub plot: PathBuf,
}

/// Writes the results table, the summary and the F1-vs-k plot into `dir`.
pub fn emit_report(records: &[MetricsRecord], dir: impl AsRef<Path>) -> Result<ReportFiles> {
    if records.is_empty() {
        return Err(Error::invalid("cannot report an empty results table"));
    }
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let files = ReportFiles {
        results: dir.join(RESULTS_FILE),
        summary: dir.join(SUMMARY_FILE),
        plot: dir.join(PLOT_FILE),
    };
    write_results_csv(records, &files.results)?;
    let rows = summarize(records);
    write_summary_csv(&rows, &files.summary)?;
    render_f1_plot(&rows)?.save(&files.plot)?;
    Ok(files)
}
