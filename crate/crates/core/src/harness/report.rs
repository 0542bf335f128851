//! CSV, Markdown and JSON output for experiment tables and verification
//! reports.

use std::io::Write;
use std::str::FromStr;

use serde::Serialize;

use super::bounds::BoundReport;
use super::exact::FiniteSetReport;
use super::experiment::TableReport;
use super::tails::TailCheckReport;
use super::verify::SafetyRunSummary;
use crate::error::{Error, Result};

pub const TABLE_CSV_HEADER: &str = "dimension,iterations,min,max,mean,std,failures";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    Csv,
    #[default]
    Markdown,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::Parse(format!("unknown format {other:?}"))),
        }
    }
}

/// A report that renders as one table.
pub trait Tabular: Serialize {
    fn title(&self) -> String;
    fn master_seed(&self) -> u64;
    fn headers(&self) -> Vec<&'static str>;
    fn rows(&self) -> Vec<Vec<String>>;
}

fn sci(v: f64) -> String {
    format!("{v:.2e}")
}

impl Tabular for TableReport {
    fn title(&self) -> String {
        self.title.clone()
    }
    fn master_seed(&self) -> u64 {
        self.master_seed
    }
    fn headers(&self) -> Vec<&'static str> {
        TABLE_CSV_HEADER.split(',').collect()
    }
    fn rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    r.dimension.to_string(),
                    r.iterations.to_string(),
                    sci(r.min),
                    sci(r.max),
                    sci(r.mean),
                    sci(r.std),
                    r.failures.to_string(),
                ]
            })
            .collect()
    }
}

impl Tabular for BoundReport {
    fn title(&self) -> String {
        format!("{} ({} trials)", self.title, self.trials)
    }
    fn master_seed(&self) -> u64 {
        self.master_seed
    }
    fn headers(&self) -> Vec<&'static str> {
        vec!["family", "checks", "violations", "worst_excess", "diagnostic", "verdict"]
    }
    fn rows(&self) -> Vec<Vec<String>> {
        self.families
            .iter()
            .map(|f| {
                vec![
                    f.name.clone(),
                    f.checks.to_string(),
                    f.violations.to_string(),
                    sci(f.worst_excess),
                    f.diagnostic.to_string(),
                    verdict(f.passed()),
                ]
            })
            .collect()
    }
}

impl Tabular for TailCheckReport {
    fn title(&self) -> String {
        format!("tail bounds ({} samples per point)", self.samples)
    }
    fn master_seed(&self) -> u64 {
        self.master_seed
    }
    fn headers(&self) -> Vec<&'static str> {
        vec!["theorem", "m", "n", "parameter", "bound", "empirical", "margin", "diagnostic", "verdict"]
    }
    fn rows(&self) -> Vec<Vec<String>> {
        self.points
            .iter()
            .map(|p| {
                vec![
                    p.theorem.clone(),
                    p.m.to_string(),
                    p.n.to_string(),
                    format!("{}={}", p.parameter_name, p.parameter),
                    sci(p.bound),
                    sci(p.empirical),
                    sci(p.margin),
                    p.diagnostic.to_string(),
                    verdict(p.verdict),
                ]
            })
            .collect()
    }
}

impl Tabular for FiniteSetReport {
    fn title(&self) -> String {
        format!("finite-set singularity, k={}, |set|={}, {} trials", self.k, self.cardinality, self.trials)
    }
    fn master_seed(&self) -> u64 {
        self.master_seed
    }
    fn headers(&self) -> Vec<&'static str> {
        vec!["event", "kind", "empirical", "bound", "margin", "verdict"]
    }
    fn rows(&self) -> Vec<Vec<String>> {
        self.checks
            .iter()
            .map(|c| {
                vec![
                    c.event.clone(),
                    format!("{:?}", c.kind).to_lowercase(),
                    format!("{:.5}", c.empirical),
                    format!("{:.5}", c.bound),
                    format!("{:.5}", c.margin),
                    verdict(c.verdict),
                ]
            })
            .collect()
    }
}

impl Tabular for SafetyRunSummary {
    fn title(&self) -> String {
        format!("safety bounds, n={}, {} trials", self.n, self.trials)
    }
    fn master_seed(&self) -> u64 {
        self.master_seed
    }
    fn headers(&self) -> Vec<&'static str> {
        vec!["worst_pivot_ratio", "worst_inverse_ratio", "worst_growth_ratio", "failures", "verdict"]
    }
    fn rows(&self) -> Vec<Vec<String>> {
        vec![vec![
            sci(self.worst_pivot_ratio),
            sci(self.worst_inverse_ratio),
            sci(self.worst_growth_ratio),
            self.failures.len().to_string(),
            verdict(self.passed),
        ]]
    }
}

fn verdict(ok: bool) -> String {
    if ok { "pass" } else { "FAIL" }.to_string()
}

fn io(e: std::io::Error) -> Error {
    Error::Io(e.to_string())
}

/// Writes `report` in `format`. CSV has exactly one header line; the
/// Markdown title line carries the master seed.
pub fn emit_report<T: Tabular, W: Write>(report: &T, format: ReportFormat, out: &mut W) -> Result<()> {
    match format {
        ReportFormat::Csv => {
            writeln!(out, "{}", report.headers().join(",")).map_err(io)?;
            for row in report.rows() {
                writeln!(out, "{}", row.join(",")).map_err(io)?;
            }
        }
        ReportFormat::Markdown => {
            writeln!(out, "### {} (seed {})\n", report.title(), report.master_seed()).map_err(io)?;
            let headers = report.headers();
            writeln!(out, "| {} |", headers.join(" | ")).map_err(io)?;
            writeln!(out, "|{}", "---|".repeat(headers.len())).map_err(io)?;
            for row in report.rows() {
                writeln!(out, "| {} |", row.join(" | ")).map_err(io)?;
            }
        }
        ReportFormat::Json => {
            serde_json::to_writer_pretty(&mut *out, report).map_err(|e| Error::Io(e.to_string()))?;
            writeln!(out).map_err(io)?;
        }
    }
    Ok(())
}
