//! Outcome of an identity check.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Number of mismatches kept in a report; the total is still counted.
pub const MAX_REPORTED: usize = 8;

/// A coefficient that differs between the two sides of an identity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mismatch {
    /// The correlator symbol or state the coefficient belongs to.
    pub symbol: String,
    pub monomial: String,
    pub left: String,
    pub right: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub passed: bool,
    /// Number of coefficients compared.
    pub compared: usize,
    pub mismatch_count: usize,
    pub mismatches: Vec<Mismatch>,
    pub notes: Vec<String>,
}

impl CheckReport {
    pub fn new(check: impl Into<String>) -> Self {
        Self {
            check: check.into(),
            passed: true,
            compared: 0,
            mismatch_count: 0,
            mismatches: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn record(&mut self, m: Mismatch) {
        self.passed = false;
        self.mismatch_count += 1;
        if self.mismatches.len() < MAX_REPORTED {
            self.mismatches.push(m);
        }
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    pub fn first_mismatch(&self) -> Option<&Mismatch> {
        self.mismatches.first()
    }

    /// Folds another report into this one.
    pub fn absorb(&mut self, other: CheckReport) {
        self.compared += other.compared;
        self.passed &= other.passed;
        self.mismatch_count += other.mismatch_count;
        for m in other.mismatches {
            if self.mismatches.len() < MAX_REPORTED {
                self.mismatches.push(m);
            }
        }
        for n in other.notes {
            self.notes.push(format!("{}: {}", other.check, n));
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "ok" } else { "MISMATCH" };
        writeln!(f, "{}: {} ({} coefficients compared, {} mismatches)", self.check, status, self.compared, self.mismatch_count)?;
        for m in &self.mismatches {
            writeln!(f, "  {} [{}]: left {} right {}", m.symbol, m.monomial, m.left, m.right)?;
        }
        for n in &self.notes {
            writeln!(f, "  note: {n}")?;
        }
        Ok(())
    }
}
