use alloc::string::String;
use alloc::vec::Vec;

/// Outcome of one named identity, swept over an index range or a set of
/// random probes.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCheck {
    pub id: String,
    pub max_residual: f64,
    /// Zero-based index tuple (or probe number) of the largest residual.
    /// Ties keep the lexicographically smallest tuple.
    pub worst_index: Vec<usize>,
    pub pass: bool,
}

impl IdentityCheck {
    pub fn new(id: impl Into<String>) -> Self {
        IdentityCheck {
            id: id.into(),
            max_residual: 0.0,
            worst_index: Vec::new(),
            pass: true,
        }
    }

    /// Records one residual. Callers sweep indices in lexicographic order,
    /// so replacing only on a strictly larger value keeps the smallest tuple.
    /// A NaN residual always wins and fails the check.
    pub fn record(&mut self, residual: f64, index: &[usize]) {
        let first_nan = residual.is_nan() && !self.max_residual.is_nan();
        if residual > self.max_residual || first_nan {
            self.max_residual = residual;
            self.worst_index.clear();
            self.worst_index.extend_from_slice(index);
        }
    }

    pub fn finish(mut self, tol: f64) -> Self {
        self.pass = self.max_residual < tol;
        self
    }
}

/// A set of identity checks sharing one tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub checks: Vec<IdentityCheck>,
    pub pass: bool,
    pub tol: f64,
}

impl IdentityReport {
    pub fn new(tol: f64) -> Self {
        IdentityReport {
            checks: Vec::new(),
            pass: true,
            tol,
        }
    }

    pub fn push(&mut self, check: IdentityCheck) {
        let check = check.finish(self.tol);
        self.pass &= check.pass;
        self.checks.push(check);
    }

    pub fn extend(&mut self, other: IdentityReport) {
        for check in other.checks {
            self.push(check);
        }
    }

    pub fn get(&self, id: &str) -> Option<&IdentityCheck> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn failures(&self) -> impl Iterator<Item = &IdentityCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// One scalar condition of a model checker.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionResult {
    pub id: &'static str,
    /// Noise channel the condition belongs to, if it is per channel.
    pub channel: Option<usize>,
    /// `|lhs - rhs|_F / (1 + |lhs|_F)`.
    pub residual: f64,
    pub pass: bool,
}

impl ConditionResult {
    pub fn new(id: &'static str, channel: Option<usize>, residual: f64, tol: f64) -> Self {
        ConditionResult {
            id,
            channel,
            residual,
            pass: residual < tol,
        }
    }
}

pub(crate) fn all_pass(conditions: &[ConditionResult]) -> bool {
    conditions.iter().all(|c| c.pass)
}
