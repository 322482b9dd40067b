//! Machine-readable verification reports.
//!
//! A certificate is a flat list of named checks, printed one per line as
//! `CHECK <name> <indices> PASS|FAIL`, followed by a `RESULT VALID|INVALID`
//! line. Failed checks carry a short detail string after the verdict.

use std::fmt;

use crate::partition::{LatticeShape, PartitionTuple};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckRecord {
    pub name: &'static str,
    pub indices: String,
    pub passed: bool,
    pub detail: Option<String>,
}

impl fmt::Display for CheckRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "CHECK {} {} {verdict}", self.name, self.indices)?;
        if let Some(d) = &self.detail {
            write!(f, " {d}")?;
        }
        Ok(())
    }
}

/// Pairwise order relations among the generators: `leq[i][j]` is `g_i <= g_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderTypeReport {
    pub leq: Vec<Vec<bool>>,
}

impl OrderTypeReport {
    pub fn from_generators(gens: &[PartitionTuple]) -> Self {
        let leq = gens
            .iter()
            .map(|a| gens.iter().map(|b| a.leq(b).unwrap_or(false)).collect())
            .collect();
        OrderTypeReport { leq }
    }

    /// Unordered pairs `(i, j)`, `i < j`, that are comparable in either direction.
    pub fn comparable_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.leq.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if self.leq[i][j] || self.leq[j][i] {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct GeneratorCertificate {
    pub shape: LatticeShape,
    pub generators: Vec<PartitionTuple>,
    pub checks: Vec<CheckRecord>,
    pub order_type: OrderTypeReport,
}

impl GeneratorCertificate {
    pub fn new(shape: LatticeShape, generators: Vec<PartitionTuple>) -> Self {
        let order_type = OrderTypeReport::from_generators(&generators);
        GeneratorCertificate {
            shape,
            generators,
            checks: Vec::new(),
            order_type,
        }
    }

    pub fn record(&mut self, name: &'static str, indices: impl Into<String>, passed: bool, detail: Option<String>) {
        self.checks.push(CheckRecord {
            name,
            indices: indices.into(),
            passed,
            detail,
        });
    }

    pub fn is_valid(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| !c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn count(&self, name: &str) -> usize {
        self.checks.iter().filter(|c| c.name == name).count()
    }

    pub fn verdict(&self) -> &'static str {
        if self.is_valid() {
            "VALID"
        } else {
            "INVALID"
        }
    }
}

impl fmt::Display for GeneratorCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        writeln!(f, "RESULT {}", self.verdict())
    }
}
