//! Partial derivatives by jet variables and total (formal) derivatives.

use rayon::prelude::*;

use super::atom::Atom;
use super::ctx::Ctx;
use super::expr::{Expr, ExprBuilder, Mono};
use super::index::{JetVar, MultiIndex};
use crate::coeff::Q;
use crate::error::{JetError, Result};

const PAR_THRESHOLD: usize = 4096;

fn fold_terms<F>(e: &Expr, f: F) -> Result<Expr>
where
    F: Fn(&Mono, &Q, &mut ExprBuilder) -> Result<()> + Sync,
{
    let terms = e.terms();
    if terms.len() < PAR_THRESHOLD {
        let mut b = ExprBuilder::new();
        for (m, c) in terms {
            f(m, c, &mut b)?;
        }
        return Ok(b.finish());
    }
    let parts: Vec<Result<Expr>> = terms
        .par_chunks(PAR_THRESHOLD / 4)
        .map(|chunk| {
            let mut b = ExprBuilder::new();
            for (m, c) in chunk {
                f(m, c, &mut b)?;
            }
            Ok(b.finish())
        })
        .collect();
    let mut b = ExprBuilder::new();
    for p in parts {
        b.add_expr(&p?);
    }
    Ok(b.finish())
}

/// `d e / d v`, treating every other jet variable as independent and
/// differentiating derived atoms through their registered rules.
pub fn partial(e: &Expr, v: &JetVar, ctx: &Ctx) -> Expr {
    fold_terms(e, |m, c, b| {
        for &(a, k) in m.factors() {
            let da = match a {
                Atom::Jet(w) if w != *v => continue,
                Atom::X(_) | Atom::Param(_) => continue,
                _ => ctx.partial_atom_cached(&a, v),
            };
            if da.is_zero() {
                continue;
            }
            b.add_scaled(&da, &m.mul_atom(a, -1), &c.mul(&Q::int(k as i64)));
        }
        Ok(())
    })
    .expect("partial derivatives cannot fail")
}

/// Formal derivative `d_mu e`.
pub fn total_derivative(e: &Expr, mu: usize, ctx: &Ctx) -> Result<Expr> {
    fold_terms(e, |m, c, b| {
        for &(a, k) in m.factors() {
            if let Atom::Param(_) = a {
                continue;
            }
            if let Atom::Jet(v) = a {
                let w = JetVar::new(v.comp, v.idx.plus(mu));
                if w.order() > ctx.max_order {
                    return Err(JetError::MaxJetOrderExceeded {
                        order: w.order(),
                        max: ctx.max_order,
                    });
                }
                let nm = m.mul_atom(a, -1).mul_atom(Atom::Jet(w), 1);
                b.add_term(nm, c.mul(&Q::int(k as i64)));
                continue;
            }
            let da = ctx.total_atom_cached(&a, mu)?;
            if da.is_zero() {
                continue;
            }
            b.add_scaled(&da, &m.mul_atom(a, -1), &c.mul(&Q::int(k as i64)));
        }
        Ok(())
    })
}

/// Iterated formal derivative `d_alpha e`.
pub fn total_derivative_multi(e: &Expr, alpha: &MultiIndex, ctx: &Ctx) -> Result<Expr> {
    let mut out = e.clone();
    for mu in alpha.dirs() {
        out = total_derivative(&out, mu, ctx)?;
    }
    Ok(out)
}

/// Derivative by a derived atom, treating all other atoms as independent
/// except for the functional dependence of `e`, `mu` and `P` on `rho`.
pub fn partial_by_atom(e: &Expr, by: &Atom) -> Expr {
    let rule = |a: &Atom| -> Option<Expr> {
        if a == by {
            return Some(Expr::int(1));
        }
        if *by != Atom::Rho {
            return None;
        }
        let rho = Expr::atom(Atom::Rho);
        match a {
            Atom::Energy(k) => Some(Expr::atom(Atom::Energy(k + 1))),
            Atom::Mu => Some(
                &(&Expr::int(1) + &Expr::atom(Atom::Energy(0)))
                    + &(&rho * &Expr::atom(Atom::Energy(1))),
            ),
            Atom::Pressure => Some(
                (&rho * &Expr::atom(Atom::Energy(1))).scale(&Q::int(2))
                    + &(&(&rho * &rho) * &Expr::atom(Atom::Energy(2))),
            ),
            _ => None,
        }
    };
    e.map_terms(|m, c, b| {
        for &(a, k) in m.factors() {
            if let Some(da) = rule(&a) {
                b.add_scaled(&da, &m.mul_atom(a, -1), &c.mul(&Q::int(k as i64)));
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::index::Comp;

    fn y(idx: &[usize]) -> Expr {
        Expr::jet(JetVar::new(Comp::field(0), MultiIndex::from_dirs(idx)))
    }

    #[test]
    fn power_rule() {
        let ctx = Ctx::new(2);
        let v = JetVar::new(Comp::field(0), MultiIndex::unit(1));
        let e = &y(&[1]) * &y(&[1]);
        assert_eq!(partial(&e, &v, &ctx), &Expr::int(2) * &y(&[1]));
    }

    #[test]
    fn base_coordinates_are_independent() {
        let ctx = Ctx::new(2);
        let e = Expr::atom(Atom::X(0));
        assert!(partial(&e, &JetVar::base(Comp::field(0)), &ctx).is_zero());
    }

    #[test]
    fn leibniz_for_total_derivative() {
        let ctx = Ctx::new(2);
        let e = &y(&[]) * &y(&[1]);
        let d = total_derivative(&e, 0, &ctx).unwrap();
        assert_eq!(d, &(&y(&[0]) * &y(&[1])) + &(&y(&[]) * &y(&[0, 1])));
    }

    #[test]
    fn base_coordinate_derivative_is_kronecker() {
        let ctx = Ctx::new(3);
        let e = Expr::atom(Atom::X(2));
        assert_eq!(total_derivative(&e, 2, &ctx).unwrap(), Expr::int(1));
        assert!(total_derivative(&e, 1, &ctx).unwrap().is_zero());
    }

    #[test]
    fn jet_ceiling_is_enforced() {
        let ctx = Ctx::new(2).with_max_order(2);
        let e = y(&[0, 1]);
        assert_eq!(
            total_derivative(&e, 0, &ctx),
            Err(JetError::MaxJetOrderExceeded { order: 3, max: 2 })
        );
    }

    #[test]
    fn sqrt_g_derivative_formula() {
        // d_l sqrt|g| = 1/2 sqrt|g| g^{mn} g_{mn,l}, summed over all (m, n).
        let ctx = Ctx::new(2).with_metric(0);
        let d = total_derivative(&Expr::atom(Atom::SqrtG), 1, &ctx).unwrap();
        let mut expect = Expr::zero();
        for m in 0..2 {
            for n in 0..2 {
                let t = &(&Expr::atom(Atom::SqrtG) * &ctx.ginv(m, n))
                    * &ctx.g_jet(m, n, MultiIndex::unit(1));
                expect = &expect + &t.scale(&Q::frac(1, 2));
            }
        }
        assert_eq!(d, expect);
    }
}
