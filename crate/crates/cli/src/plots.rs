//! Plot-ready tables: the Nash distribution and uniform-vs-Nash averages.

use std::path::Path;

use nashavg::io::{format_number, EvaluationReport};

use crate::pipeline::Failure;

pub const DISTRIBUTION_FILE: &str = "nash_distribution.csv";
pub const AVERAGES_FILE: &str = "averages_comparison.csv";

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), Failure> {
    let fail = |e: &dyn std::fmt::Display| Failure::Input(format!("cannot write {}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(|e| fail(&e))?;
    w.write_record(header).map_err(|e| fail(&e))?;
    for row in rows {
        w.write_record(row).map_err(|e| fail(&e))?;
    }
    w.flush().map_err(|e| fail(&e))
}

/// Writes both tables into `dir`; averages are sorted by Nash average,
/// largest first, ties kept in label order.
pub fn emit_plot_data(report: &EvaluationReport, dir: &Path) -> Result<(), Failure> {
    let nash = report.nash.as_ref().ok_or_else(|| Failure::Flags("report has no Nash block to plot".into()))?;
    let dist: Vec<Vec<String>> = report
        .labels
        .iter()
        .zip(&nash.distribution)
        .map(|(l, p)| vec![l.clone(), format_number(p.0)])
        .collect();
    write_csv(&dir.join(DISTRIBUTION_FILE), &["label", "probability"], &dist)?;

    let mut order: Vec<usize> = (0..report.labels.len()).collect();
    order.sort_by(|&a, &b| nash.nash_average[b].0.total_cmp(&nash.nash_average[a].0));
    let avgs: Vec<Vec<String>> = order
        .into_iter()
        .map(|i| {
            vec![report.labels[i].clone(), format_number(nash.uniform_average[i].0), format_number(nash.nash_average[i].0)]
        })
        .collect();
    write_csv(&dir.join(AVERAGES_FILE), &["label", "uniform_avg", "nash_avg"], &avgs)
}
