//! Numeric evaluation at jet points and the random point sampler.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashMap;

use super::atom::{Atom, FunId, Sym};
use super::ctx::Ctx;
use super::expr::Expr;
use super::index::{JetVar, MAX_DIM};
use crate::error::{JetError, Result};

/// Values for base coordinates, parameters, jet variables and abstract functions.
#[derive(Clone, Debug, Default)]
pub struct JetPoint {
    pub x: [f64; MAX_DIM],
    pub params: FxHashMap<Sym, f64>,
    pub jets: FxHashMap<JetVar, f64>,
    pub funs: FxHashMap<FunId, f64>,
}

/// Values of the derived atoms at a point.
#[derive(Clone, Debug)]
pub struct DerivedValues {
    pub ginv: [[f64; MAX_DIM]; MAX_DIM],
    pub det: f64,
    pub sqrtg: f64,
    pub rho: Option<f64>,
}

impl JetPoint {
    pub fn jet(&self, v: &JetVar) -> Result<f64> {
        self.jets
            .get(v)
            .copied()
            .ok_or_else(|| JetError::MissingValue(format!("{v:?}")))
    }

    /// Metric matrix at the point.
    pub fn metric(&self, ctx: &Ctx) -> Result<DMatrix<f64>> {
        let n = ctx.n;
        let mut g = DMatrix::zeros(n, n);
        for a in 0..n {
            for b in a..n {
                let v = self.jet(&JetVar::base(ctx.g(a, b)))?;
                g[(a, b)] = v;
                g[(b, a)] = v;
            }
        }
        Ok(g)
    }

    pub fn derived(&self, ctx: &Ctx) -> Result<DerivedValues> {
        let n = ctx.n;
        let g = self.metric(ctx)?;
        let det = g.determinant();
        if det.abs() < 1e-12 {
            return Err(JetError::SingularPoint(format!("det g = {det:e}")));
        }
        let inv = g
            .clone()
            .try_inverse()
            .ok_or_else(|| JetError::SingularPoint("metric not invertible".into()))?;
        let mut ginv = [[0.0; MAX_DIM]; MAX_DIM];
        for a in 0..n {
            for b in 0..n {
                ginv[a][b] = inv[(a, b)];
            }
        }
        let sqrtg = det.abs().sqrt();
        let rho = if ctx.density.is_some() {
            let mut q = 0.0;
            for a in 0..n {
                for b in 0..n {
                    q += g[(a, b)]
                        * self.jet(&JetVar::base(ctx.j(a)))?
                        * self.jet(&JetVar::base(ctx.j(b)))?;
                }
            }
            let r2 = q / det.abs();
            if r2 <= 0.0 {
                return Err(JetError::SingularPoint(format!("rho^2 = {r2:e}")));
            }
            Some(r2.sqrt())
        } else {
            None
        };
        Ok(DerivedValues {
            ginv,
            det,
            sqrtg,
            rho,
        })
    }
}

fn atom_value(a: &Atom, p: &JetPoint, ctx: &Ctx, d: &mut Option<DerivedValues>) -> Result<f64> {
    let mut derived = || -> Result<DerivedValues> {
        if d.is_none() {
            *d = Some(p.derived(ctx)?);
        }
        Ok(d.clone().unwrap())
    };
    Ok(match a {
        Atom::X(m) => p.x[*m as usize],
        Atom::Param(s) => *p
            .params
            .get(s)
            .ok_or_else(|| JetError::MissingValue(s.name().to_string()))?,
        Atom::Jet(v) => p.jet(v)?,
        Atom::Fun(f) => *p
            .funs
            .get(f)
            .ok_or_else(|| JetError::MissingValue(format!("{f:?}")))?,
        Atom::Inv(a, b) => derived()?.ginv[*a as usize][*b as usize],
        Atom::SqrtG => derived()?.sqrtg,
        Atom::Rho => derived()?
            .rho
            .ok_or_else(|| JetError::SingularPoint("no density field".into()))?,
        Atom::Energy(k) => {
            let r = derived()?
                .rho
                .ok_or_else(|| JetError::SingularPoint("no density field".into()))?;
            (ctx.energy)(r, *k as usize)
        }
        Atom::Mu => {
            let r = derived()?
                .rho
                .ok_or_else(|| JetError::SingularPoint("no density field".into()))?;
            r * (1.0 + (ctx.energy)(r, 0))
        }
        Atom::Pressure => {
            let r = derived()?
                .rho
                .ok_or_else(|| JetError::SingularPoint("no density field".into()))?;
            r * r * (ctx.energy)(r, 1)
        }
    })
}

/// Evaluates `e` at `p`. Coefficients are converted to floating point only
/// when multiplied into the product of atom values.
pub fn eval_numeric(e: &Expr, p: &JetPoint, ctx: &Ctx) -> Result<f64> {
    let mut cache: FxHashMap<Atom, f64> = FxHashMap::default();
    let mut derived: Option<DerivedValues> = None;
    let mut total = 0.0;
    for (m, c) in e.terms() {
        let mut t = c.to_f64();
        for (a, k) in m.factors() {
            let v = match cache.get(a) {
                Some(v) => *v,
                None => {
                    let v = atom_value(a, p, ctx, &mut derived)?;
                    cache.insert(*a, v);
                    v
                }
            };
            t *= v.powi(*k);
        }
        total += t;
    }
    Ok(total)
}

/// Sum of absolute term values; a natural scale for relative errors.
pub fn eval_magnitude(e: &Expr, p: &JetPoint, ctx: &Ctx) -> Result<f64> {
    let mut derived: Option<DerivedValues> = None;
    let mut total = 0.0;
    for (m, c) in e.terms() {
        let mut t = c.to_f64().abs();
        for (a, k) in m.factors() {
            t *= atom_value(a, p, ctx, &mut derived)?.abs().powi(*k);
        }
        total += t;
    }
    Ok(total)
}

/// Seeded sampler of well-conditioned jet points.
pub struct PointSampler {
    rng: ChaCha8Rng,
}

impl PointSampler {
    pub fn new(seed: u64) -> PointSampler {
        PointSampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// Samples values for `vars`, every metric and density component, the
    /// base point and `params`. The metric is `diag(+1,-1,...,-1)` plus a
    /// perturbation of at most 0.2 per component; points are resampled until
    /// `|det g| > 0.1` and `g_{mn} J^m J^n / |g| > 0.05`.
    pub fn sample(&mut self, ctx: &Ctx, vars: &BTreeSet<JetVar>, params: &[Sym]) -> JetPoint {
        let n = ctx.n;
        loop {
            let mut p = JetPoint::default();
            for m in 0..n {
                p.x[m] = self.rng.random_range(-1.0..1.0);
            }
            for s in params {
                p.params.insert(*s, self.rng.random_range(0.5..1.5));
            }
            if ctx.metric.is_some() {
                for a in 0..n {
                    for b in a..n {
                        let base = if a != b {
                            0.0
                        } else if a == 0 {
                            1.0
                        } else {
                            -1.0
                        };
                        p.jets.insert(
                            JetVar::base(ctx.g(a, b)),
                            base + self.rng.random_range(-0.2..0.2),
                        );
                    }
                }
            }
            if ctx.density.is_some() {
                for m in 0..n {
                    let v = if m == 0 {
                        self.rng.random_range(1.0..2.0)
                    } else {
                        self.rng.random_range(-0.5..0.5)
                    };
                    p.jets.insert(JetVar::base(ctx.j(m)), v);
                }
            }
            for v in vars {
                if !p.jets.contains_key(v) {
                    p.jets.insert(*v, self.rng.random_range(-1.0..1.0));
                }
            }
            if ctx.metric.is_some() {
                let Ok(d) = p.derived(ctx) else { continue };
                if d.det.abs() <= 0.1 {
                    continue;
                }
                if let Some(r) = d.rho {
                    if r * r <= 0.05 {
                        continue;
                    }
                }
            }
            return p;
        }
    }
}

/// Relative difference `|a - b| / max(|a|, |b|, floor)`.
pub fn rel_err(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::Q;

    #[test]
    fn zero_evaluates_to_zero() {
        let ctx = Ctx::new(2);
        assert_eq!(
            eval_numeric(&Expr::zero(), &JetPoint::default(), &ctx).unwrap(),
            0.0
        );
    }

    #[test]
    fn inverse_metric_identity() {
        let ctx = Ctx::new(4).with_metric(0);
        let mut s = PointSampler::new(3);
        let p = s.sample(&ctx, &BTreeSet::new(), &[]);
        for m in 0..4 {
            for l in 0..4 {
                let e = Expr::sum((0..4).map(|nu| &ctx.ginv(m, nu) * &ctx.g_expr(nu, l)));
                let v = eval_numeric(&e, &p, &ctx).unwrap();
                assert!((v - (m == l) as i64 as f64).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn singular_metric_is_reported() {
        let ctx = Ctx::new(2).with_metric(0);
        let mut p = JetPoint::default();
        for (a, b) in [(0, 0), (0, 1), (1, 1)] {
            p.jets.insert(JetVar::base(ctx.g(a, b)), 1.0);
        }
        let r = eval_numeric(&Expr::atom(Atom::SqrtG), &p, &ctx);
        assert!(matches!(r, Err(JetError::SingularPoint(_))));
    }

    #[test]
    fn sampler_respects_conditioning() {
        let ctx = Ctx::new(4).with_metric(0).with_density(10);
        let mut s = PointSampler::new(11);
        for _ in 0..50 {
            let p = s.sample(&ctx, &BTreeSet::new(), &[]);
            let d = p.derived(&ctx).unwrap();
            assert!(d.det.abs() > 0.1);
            assert!(d.rho.unwrap().powi(2) > 0.05);
        }
        let e = Expr::constant(Q::frac(1, 3));
        assert!((eval_numeric(&e, &JetPoint::default(), &ctx).unwrap() - 1.0 / 3.0).abs() < 1e-16);
    }
}
