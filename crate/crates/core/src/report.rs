//! CSV and JSON writers for run and sweep results.
//!
//! Numbers are written with Rust's shortest round-trip decimal formatting,
//! which never switches to exponent notation.

use std::io::Write;

use serde::Serialize;

use crate::error::Result;
use crate::harness::{msd_in_db, MonteCarloResult, SweepResult};

fn num(v: f64) -> String {
    format!("{v}")
}

pub fn run_header(result: &MonteCarloResult) -> Vec<String> {
    let mut header = vec!["iteration".to_string(), "stage".into(), "sr".into()];
    header.extend(result.curves.iter().map(|c| format!("msd_{}", c.algorithm)));
    header
}

/// One row per iteration: `iteration, stage, sr, msd_<algorithm>...`
/// (1-based iteration and stage, linear MSD).
pub fn write_run_csv<W: Write>(result: &MonteCarloResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(run_header(result))?;
    for (k, stage) in result.stage_of_iteration().into_iter().enumerate() {
        let mut row = vec![
            (k + 1).to_string(),
            (stage + 1).to_string(),
            num(result.stage_sparsity[stage]),
        ];
        row.extend(result.curves.iter().map(|c| num(c.per_iteration_msd[k])));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub stage: usize,
    pub sr: f64,
    pub algorithm: String,
    pub ssmsd: f64,
    pub ssmsd_db: f64,
}

pub fn summary_rows(result: &MonteCarloResult) -> Vec<SummaryRow> {
    let mut rows = Vec::new();
    for (s, &sr) in result.stage_sparsity.iter().enumerate() {
        for c in &result.curves {
            let ssmsd = c.steady_state_msd_per_stage[s];
            rows.push(SummaryRow {
                stage: s + 1,
                sr,
                algorithm: c.algorithm.clone(),
                ssmsd,
                ssmsd_db: msd_in_db(ssmsd).unwrap_or(f64::NEG_INFINITY),
            });
        }
    }
    rows
}

/// `stage, sr, algorithm, ssmsd, ssmsd_db`
pub fn write_summary_csv<W: Write>(result: &MonteCarloResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["stage", "sr", "algorithm", "ssmsd", "ssmsd_db"])?;
    for row in summary_rows(result) {
        w.write_record([
            row.stage.to_string(),
            num(row.sr),
            row.algorithm,
            num(row.ssmsd),
            num(row.ssmsd_db),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct RunDocument<'a> {
    result: &'a MonteCarloResult,
    summary: Vec<SummaryRow>,
}

pub fn write_run_json<W: Write>(result: &MonteCarloResult, mut out: W) -> Result<()> {
    let doc = RunDocument {
        result,
        summary: summary_rows(result),
    };
    serde_json::to_writer_pretty(&mut out, &doc)?;
    writeln!(out)?;
    Ok(())
}

/// `sr, ssmsd_<algorithm>...`
pub fn write_sweep_csv<W: Write>(sweep: &SweepResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["sr".to_string()];
    header.extend(sweep.algorithms.iter().map(|a| format!("ssmsd_{a}")));
    w.write_record(&header)?;
    for (sr, row) in sweep.sparsity_ratios().into_iter().zip(&sweep.steady_state) {
        let mut record = vec![num(sr)];
        record.extend(row.iter().map(|v| num(*v)));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep_json<W: Write>(sweep: &SweepResult, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, sweep)?;
    writeln!(out)?;
    Ok(())
}
