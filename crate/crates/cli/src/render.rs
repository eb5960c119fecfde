//! A command's output in all three formats.

use serde_json::Value;
use wallcross_core::mu::StateVector;
use wallcross_core::report::CheckReport;
use wallcross_core::series::{fmt_rational, TruncatedSeries};

use crate::config::OutputFormat;

/// Rendered output. `passed` is set by checks and drives the exit status.
#[derive(Clone, Debug, PartialEq)]
pub struct Doc {
    pub passed: Option<bool>,
    pub json: Value,
    pub text: String,
    pub csv: String,
}

impl Doc {
    pub fn render(&self, format: OutputFormat) -> String {
        let mut out = match format {
            // A failed check always reports in JSON.
            _ if self.passed == Some(false) => pretty(&self.json),
            OutputFormat::Json => pretty(&self.json),
            OutputFormat::Text => self.text.clone(),
            OutputFormat::Csv => self.csv.clone(),
        };
        if !out.ends_with('\n') {
            out.push('\n');
        }
        out
    }

    pub fn from_report(report: &CheckReport) -> Self {
        Doc {
            passed: Some(report.passed),
            json: report.to_json(),
            text: report.to_string(),
            csv: format!("{}\n{}", REPORT_CSV_HEADER, report_csv_row(report)),
        }
    }
}

pub const REPORT_CSV_HEADER: &str = "check,passed,compared,mismatches";

pub fn report_csv_row(r: &CheckReport) -> String {
    format!("{},{},{},{}", csv_field(&r.check), r.passed, r.compared, r.mismatch_count)
}

pub fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("values serialize")
}

/// Quotes a CSV field when needed.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn series_csv_rows(label: &str, s: &TruncatedSeries, out: &mut String) {
    for (m, c) in s.terms() {
        out.push_str(&format!("{},{},{}\n", csv_field(label), csv_field(&m.to_string()), fmt_rational(c)));
    }
}

pub fn state_vector_csv(v: &StateVector) -> String {
    let mut out = String::from("state,monomial,coefficient\n");
    for (i, c) in v.components().iter().enumerate() {
        series_csv_rows(&format!("phi{}", i + 1), c, &mut out);
    }
    out
}
