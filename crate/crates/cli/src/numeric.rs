//! Seeded numeric comparison of expression pairs at random jet points.

use std::collections::BTreeSet;

use jetvar::modeldef::Model;
use jetvar::report::NumericSummary;
use jetvar::symexpr::eval::{eval_magnitude, rel_err, JetPoint};
use jetvar::symexpr::{eval_numeric, Expr, PointSampler};
use jetvar::Result;

pub const TOLERANCE: f64 = 1e-9;

/// Relative size below which a difference counts as cancellation noise.
const FLOOR: f64 = 1e-6;

/// Random points on the constraint submanifold of `m` covering the jets of `exprs`.
pub fn points<'a>(
    m: &Model,
    exprs: impl IntoIterator<Item = &'a Expr>,
    seed: u64,
    samples: usize,
) -> Result<Vec<JetPoint>> {
    let mut vars = BTreeSet::new();
    for e in exprs {
        vars.extend(e.jet_vars());
    }
    let mut sampler = PointSampler::new(seed);
    let mut out = Vec::with_capacity(samples);
    for _ in 0..samples {
        let mut p = sampler.sample(&m.ctx, &vars, &m.params);
        for c in &m.constraints {
            c.project_point(&mut p, &mut sampler, &m.ctx)?;
        }
        out.push(p);
    }
    Ok(out)
}

/// Largest relative difference between the sides of each pair over all points.
pub fn compare(
    m: &Model,
    pairs: &[(Expr, Expr)],
    seed: u64,
    samples: usize,
) -> Result<NumericSummary> {
    let ctx = &m.ctx;
    let pts = points(m, pairs.iter().flat_map(|(a, b)| [a, b]), seed, samples)?;
    let mut worst: f64 = 0.0;
    for p in &pts {
        for (a, b) in pairs {
            let (va, vb) = (eval_numeric(a, p, ctx)?, eval_numeric(b, p, ctx)?);
            let scale = eval_magnitude(a, p, ctx)?.max(eval_magnitude(b, p, ctx)?);
            worst = worst.max(rel_err(va, vb, FLOOR * scale.max(1e-12)));
        }
    }
    Ok(NumericSummary {
        samples,
        max_rel_err: worst,
        tolerance: TOLERANCE,
    })
}
