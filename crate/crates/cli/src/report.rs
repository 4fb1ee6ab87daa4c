//! Machine-readable report and its text renderings.

use std::fmt::Write;

use serde::Serialize;

use jetvar::modeldef::{latex_expr, render_expr, Model};
use jetvar::report::NumericSummary;
use jetvar::symexpr::Expr;
use jetvar::Result;

pub const SCHEMA_VERSION: u32 = 1;

/// Residues with more terms than this are summarized instead of printed.
const MAX_RESIDUE_TERMS: usize = 64;

#[derive(Serialize, Clone, Copy, PartialEq, Eq, Debug)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// A symbolic identity left a nonzero remainder.
    Residue,
}

#[derive(Serialize, Debug)]
pub struct Item {
    pub name: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terms: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residue: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Serialize, Debug)]
pub struct Emitted {
    pub name: String,
    pub text: String,
}

#[derive(Serialize, Debug)]
pub struct Numeric {
    pub name: String,
    pub seed: u64,
    pub samples: usize,
    pub max_rel_err: f64,
    pub tolerance: f64,
    pub status: Status,
}

#[derive(Serialize, Debug)]
pub struct ModelInfo {
    pub name: String,
    pub dim: usize,
    pub fingerprint: String,
}

#[derive(Serialize, Debug)]
pub struct Report {
    pub schema_version: u32,
    pub command: Vec<String>,
    pub model: ModelInfo,
    pub items: Vec<Item>,
    pub expressions: Vec<Emitted>,
    pub numeric: Vec<Numeric>,
    pub passed: bool,
    pub wall_time_s: f64,
}

/// Collects results while a command runs; expressions are rendered at the end.
pub struct Builder<'m> {
    pub model: &'m Model,
    pub items: Vec<Item>,
    pub exprs: Vec<(String, Expr)>,
    pub values: Vec<(String, f64)>,
    pub numeric: Vec<Numeric>,
}

impl<'m> Builder<'m> {
    pub fn new(model: &'m Model) -> Self {
        Builder {
            model,
            items: Vec::new(),
            exprs: Vec::new(),
            values: Vec::new(),
            numeric: Vec::new(),
        }
    }

    /// Passes iff `r` is zero.
    pub fn residue(&mut self, name: impl Into<String>, r: &Expr) -> Result<()> {
        let zero = r.is_zero();
        let text = if !zero && r.len() <= MAX_RESIDUE_TERMS {
            Some(render_expr(r, self.model)?)
        } else {
            None
        };
        self.items.push(Item {
            name: name.into(),
            status: if zero { Status::Pass } else { Status::Residue },
            terms: Some(r.len()),
            residue: text,
            detail: None,
        });
        Ok(())
    }

    pub fn flag(&mut self, name: impl Into<String>, pass: bool, detail: impl Into<String>) {
        self.items.push(Item {
            name: name.into(),
            status: if pass { Status::Pass } else { Status::Fail },
            terms: None,
            residue: None,
            detail: Some(detail.into()),
        });
    }

    pub fn emit(&mut self, name: impl Into<String>, e: Expr) {
        self.exprs.push((name.into(), e));
    }

    pub fn numeric(&mut self, name: impl Into<String>, seed: u64, s: NumericSummary) {
        self.numeric.push(Numeric {
            name: name.into(),
            seed,
            samples: s.samples,
            max_rel_err: s.max_rel_err,
            tolerance: s.tolerance,
            status: if s.pass() { Status::Pass } else { Status::Fail },
        });
    }

    pub fn passed(&self) -> bool {
        self.items.iter().all(|i| i.status == Status::Pass)
            && self.numeric.iter().all(|n| n.status == Status::Pass)
    }

    pub fn finish(
        self,
        command: Vec<String>,
        fingerprint: String,
        latex: bool,
        secs: f64,
    ) -> Result<Report> {
        let passed = self.passed();
        let mut expressions = Vec::with_capacity(self.exprs.len() + self.values.len());
        for (name, e) in &self.exprs {
            let text = if latex {
                latex_expr(e, self.model)?
            } else {
                render_expr(e, self.model)?
            };
            expressions.push(Emitted {
                name: name.clone(),
                text,
            });
        }
        for (name, v) in self.values {
            expressions.push(Emitted {
                name,
                text: format!("{v:.17e}"),
            });
        }
        Ok(Report {
            schema_version: SCHEMA_VERSION,
            command,
            model: ModelInfo {
                name: self.model.name.clone(),
                dim: self.model.n,
                fingerprint,
            },
            items: self.items,
            expressions,
            numeric: self.numeric,
            passed,
            wall_time_s: secs,
        })
    }
}

impl Report {
    pub fn text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "model {} (n = {}) {}",
            self.model.name, self.model.dim, self.model.fingerprint
        );
        for i in &self.items {
            let tag = match i.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Residue => "RESIDUE",
            };
            let _ = write!(out, "{tag:<8}{}", i.name);
            match (&i.residue, i.terms) {
                (Some(r), _) => {
                    let _ = write!(out, ": {r}");
                }
                (None, Some(t)) if i.status != Status::Pass => {
                    let _ = write!(out, ": {t} terms");
                }
                _ => {}
            }
            if let Some(d) = &i.detail {
                let _ = write!(out, "  ({d})");
            }
            out.push('\n');
        }
        for n in &self.numeric {
            let _ = writeln!(
                out,
                "{:<8}{}: {} samples (seed {}), max rel err {:.3e}, tolerance {:.0e}",
                if n.status == Status::Pass {
                    "PASS"
                } else {
                    "FAIL"
                },
                n.name,
                n.samples,
                n.seed,
                n.max_rel_err,
                n.tolerance
            );
        }
        for e in &self.expressions {
            let _ = writeln!(out, "{} = {}", e.name, e.text);
        }
        let _ = writeln!(
            out,
            "{} in {:.2} s",
            if self.passed { "passed" } else { "FAILED" },
            self.wall_time_s
        );
        out
    }
}
