use std::fmt;

/// Outcome of a single check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// Cannot be stated for finite-dimensional data.
    NotApplicable,
    /// Holds automatically in finite dimension.
    Trivial,
    /// The optional structure was not supplied.
    NotSupplied,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::NotApplicable => "not-applicable",
            Status::Trivial => "trivial",
            Status::NotSupplied => "not-supplied",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub residual: Option<f64>,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, status: Status, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            status,
            residual: None,
            detail: detail.into(),
        }
    }

    /// Pass iff `residual <= tol`. NaN fails.
    pub fn residual(name: impl Into<String>, residual: f64, tol: f64) -> Self {
        let status = if residual <= tol { Status::Pass } else { Status::Fail };
        Self {
            name: name.into(),
            status,
            residual: Some(residual),
            detail: String::new(),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

/// Ordered list of checks; it passes iff no check fails.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn extend(&mut self, other: Report) {
        self.checks.extend(other.checks);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.status == Status::Fail)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn worst_residual(&self) -> f64 {
        self.checks
            .iter()
            .filter_map(|c| c.residual)
            .fold(0.0, f64::max)
    }
}
