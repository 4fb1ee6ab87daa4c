//! Pass/fail bookkeeping shared by the checks.

use std::fmt;

use crate::symexpr::Expr;

/// One checked identity: its residue and whether it passed.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckItem {
    pub name: String,
    pub pass: bool,
    pub residue: Option<Expr>,
    pub detail: Option<String>,
}

impl CheckItem {
    /// Passes iff the residue is zero.
    pub fn residue(name: &str, r: Expr) -> CheckItem {
        CheckItem {
            name: name.to_string(),
            pass: r.is_zero(),
            residue: Some(r),
            detail: None,
        }
    }

    pub fn flag(name: &str, pass: bool, detail: impl Into<String>) -> CheckItem {
        CheckItem {
            name: name.to_string(),
            pass,
            residue: None,
            detail: Some(detail.into()),
        }
    }
}

/// Summary of a randomized numeric comparison.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NumericSummary {
    pub samples: usize,
    pub max_rel_err: f64,
    pub tolerance: f64,
}

impl NumericSummary {
    pub fn pass(&self) -> bool {
        self.samples > 0 && self.max_rel_err < self.tolerance
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub title: String,
    pub items: Vec<CheckItem>,
    pub numeric: Option<NumericSummary>,
}

impl CheckReport {
    pub fn new(title: &str) -> CheckReport {
        CheckReport {
            title: title.to_string(),
            items: Vec::new(),
            numeric: None,
        }
    }

    pub fn push(&mut self, item: CheckItem) {
        self.items.push(item);
    }

    pub fn passed(&self) -> bool {
        self.items.iter().all(|i| i.pass) && self.numeric.is_none_or(|n| n.pass())
    }

    pub fn failures(&self) -> Vec<&CheckItem> {
        self.items.iter().filter(|i| !i.pass).collect()
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{}: {}",
            self.title,
            if self.passed() { "pass" } else { "FAIL" }
        )?;
        for i in &self.items {
            write!(f, "  {:<24} {}", i.name, if i.pass { "ok" } else { "FAIL" })?;
            if let Some(r) = &i.residue {
                if !r.is_zero() {
                    write!(f, "  residue with {} terms", r.len())?;
                }
            }
            if let Some(d) = &i.detail {
                write!(f, "  {d}")?;
            }
            writeln!(f)?;
        }
        if let Some(n) = &self.numeric {
            writeln!(
                f,
                "  numeric: {} samples, max rel err {:.3e} (tol {:.0e})",
                n.samples, n.max_rel_err, n.tolerance
            )?;
        }
        Ok(())
    }
}
