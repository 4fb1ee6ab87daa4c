//! Levi-Civita geometry of the metric field written out in jet coordinates.

use super::calculus::total_derivative;
use super::ctx::Ctx;
use super::expr::Expr;
use super::index::MultiIndex;
use crate::coeff::Q;
use crate::error::Result;

/// Christoffel symbols, Ricci tensor and scalar curvature of the metric in `ctx`.
#[derive(Clone, Debug)]
pub struct Geometry {
    pub n: usize,
    /// `gamma[l][m][k]` is `Gamma^l_{mk}`.
    pub gamma: Vec<Vec<Vec<Expr>>>,
    ricci: Option<Vec<Vec<Expr>>>,
    scalar: Option<Expr>,
}

/// `Gamma_{s mk} = 1/2 (g_{sm,k} + g_{sk,m} - g_{mk,s})`.
pub fn christoffel_lower(ctx: &Ctx, s: usize, m: usize, k: usize) -> Expr {
    let d = |a: usize, b: usize, c: usize| ctx.g_jet(a, b, MultiIndex::unit(c));
    (&(&d(s, m, k) + &d(s, k, m)) - &d(m, k, s)).scale(&Q::frac(1, 2))
}

/// `Gamma^l_{mk}`.
pub fn christoffel(ctx: &Ctx, l: usize, m: usize, k: usize) -> Expr {
    Expr::sum((0..ctx.n).map(|s| &ctx.ginv(l, s) * &christoffel_lower(ctx, s, m, k)))
}

impl Geometry {
    /// Christoffel symbols only; curvature is computed on demand.
    pub fn new(ctx: &Ctx) -> Geometry {
        let n = ctx.n;
        let gamma = (0..n)
            .map(|l| {
                (0..n)
                    .map(|m| (0..n).map(|k| christoffel(ctx, l, m, k)).collect())
                    .collect()
            })
            .collect();
        Geometry {
            n,
            gamma,
            ricci: None,
            scalar: None,
        }
    }

    pub fn christoffel(&self, l: usize, m: usize, k: usize) -> &Expr {
        &self.gamma[l][m][k]
    }

    /// `R_{bd} = d_a Gamma^a_{db} - d_d Gamma^a_{ab} + Gamma^a_{ae} Gamma^e_{db} - Gamma^a_{de} Gamma^e_{ab}`.
    pub fn ricci(&mut self, ctx: &Ctx) -> Result<&Vec<Vec<Expr>>> {
        if self.ricci.is_none() {
            let n = self.n;
            let mut trace = Vec::with_capacity(n);
            for b in 0..n {
                trace.push(Expr::sum((0..n).map(|a| self.gamma[a][a][b].clone())));
            }
            let mut r = vec![vec![Expr::zero(); n]; n];
            for b in 0..n {
                for d in b..n {
                    let mut acc = Expr::zero();
                    for a in 0..n {
                        acc = &acc + &total_derivative(&self.gamma[a][d][b], a, ctx)?;
                    }
                    acc = &acc - &total_derivative(&trace[b], d, ctx)?;
                    for e in 0..n {
                        acc = &acc + &(&trace[e] * &self.gamma[e][d][b]);
                        for a in 0..n {
                            acc = &acc - &(&self.gamma[a][d][e] * &self.gamma[e][a][b]);
                        }
                    }
                    r[d][b] = acc.clone();
                    r[b][d] = acc;
                }
            }
            self.ricci = Some(r);
        }
        Ok(self.ricci.as_ref().unwrap())
    }

    /// `R = g^{bd} R_{bd}`.
    pub fn scalar_curvature(&mut self, ctx: &Ctx) -> Result<Expr> {
        if self.scalar.is_none() {
            let n = self.n;
            let r = self.ricci(ctx)?.clone();
            let mut acc = Expr::zero();
            for b in 0..n {
                for d in 0..n {
                    acc = &acc + &(&ctx.ginv(b, d) * &r[b][d]);
                }
            }
            self.scalar = Some(acc);
        }
        Ok(self.scalar.clone().unwrap())
    }

    /// `G^{mn} = g^{ma} g^{nb} R_{ab} - 1/2 R g^{mn}`.
    pub fn einstein_upper(&mut self, ctx: &Ctx, m: usize, nn: usize) -> Result<Expr> {
        let n = self.n;
        let r = self.ricci(ctx)?.clone();
        let s = self.scalar_curvature(ctx)?;
        let mut acc = Expr::zero();
        for a in 0..n {
            for b in 0..n {
                acc = &acc + &(&(&ctx.ginv(m, a) * &ctx.ginv(nn, b)) * &r[a][b]);
            }
        }
        Ok(&acc - &(&s * &ctx.ginv(m, nn)).scale(&Q::frac(1, 2)))
    }

    /// `nabla_k V^m` for vector components `v`.
    pub fn nabla_vector(&self, ctx: &Ctx, v: &[Expr], m: usize, k: usize) -> Result<Expr> {
        let mut acc = total_derivative(&v[m], k, ctx)?;
        for l in 0..self.n {
            acc = &acc + &(&self.gamma[m][k][l] * &v[l]);
        }
        Ok(acc)
    }

    /// `nabla_k W_m` for covector components `w`.
    pub fn nabla_covector(&self, ctx: &Ctx, w: &[Expr], m: usize, k: usize) -> Result<Expr> {
        let mut acc = total_derivative(&w[m], k, ctx)?;
        for l in 0..self.n {
            acc = &acc - &(&self.gamma[l][k][m] * &w[l]);
        }
        Ok(acc)
    }

    /// `nabla_k D^m` for a vector density of weight one.
    pub fn nabla_density(&self, ctx: &Ctx, d: &[Expr], m: usize, k: usize) -> Result<Expr> {
        let mut acc = self.nabla_vector(ctx, d, m, k)?;
        for l in 0..self.n {
            acc = &acc - &(&self.gamma[l][l][k] * &d[m]);
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::eval::{eval_numeric, PointSampler};
    use crate::symexpr::Atom;
    use std::collections::BTreeSet;

    #[test]
    fn contracted_christoffel_is_log_derivative_of_volume() {
        // Gamma^a_{ab} = d_b sqrt|g| / sqrt|g|
        let ctx = Ctx::new(3).with_metric(0);
        let g = Geometry::new(&ctx);
        let s = Expr::atom(Atom::SqrtG);
        for b in 0..3 {
            let lhs = &Expr::sum((0..3).map(|a| g.christoffel(a, a, b).clone())) * &s;
            let rhs = total_derivative(&s, b, &ctx).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn flat_metric_jets_give_zero_curvature() {
        let ctx = Ctx::new(2).with_metric(0);
        let mut g = Geometry::new(&ctx);
        let r = g.scalar_curvature(&ctx).unwrap();
        let mut vars = BTreeSet::new();
        for v in r.jet_vars() {
            vars.insert(v);
        }
        let mut p = PointSampler::new(1).sample(&ctx, &BTreeSet::new(), &[]);
        for v in vars {
            if v.order() > 0 {
                p.jets.insert(v, 0.0);
            }
        }
        assert_eq!(eval_numeric(&r, &p, &ctx).unwrap(), 0.0);
    }
}
