//! First variation, parametrized Euler-Lagrange and Poincare-Cartan morphisms.
//!
//! The parametrized first variation is computed in two stages. The ordinary
//! variation `<dL | j V>` is split into `<EL | V> + Div <PC | j V>`; then
//! `<EL | P(eps)>` is split once more. The boundary part is
//! `<PC | j P(eps)>` plus the boundary of the second split. Both stages use
//! the same integration-by-parts routine, and the volume part does not
//! depend on the order in which derivatives are removed.

pub mod morphism;
pub mod split;

use std::collections::BTreeMap;

use crate::constraints::reduce_all;
use crate::error::Result;
use crate::modeldef::{Model, Parametrization};
use crate::symexpr::{partial, BaseSet, Bundle, Ctx, Expr, MultiIndex};

pub use morphism::{
    aux_jet, div_components, divergence, linear_coeffs, JetTable, Key, VarMorphism,
};
pub use split::{reduce_codegree, split, Split, SplitOrder};

/// `<dL | j V>` with `V` the formal variation.
pub fn first_variation(l: &Expr, ctx: &Ctx) -> VarMorphism {
    let mut m = VarMorphism::zero(0, Bundle::Var);
    for v in ctx.dependencies(l) {
        if v.comp.bundle != Bundle::Field {
            continue;
        }
        m.add_term((v.comp.index, v.idx, BaseSet::EMPTY), &partial(l, &v, ctx));
    }
    m
}

/// `d_alpha (delta y^a)` for `|alpha| <= k`.
pub fn parametrization_table(p: &Parametrization, k: usize, ctx: &Ctx) -> Result<JetTable> {
    JetTable::prolong(&p.delta, Bundle::Var, Bundle::Eps, k, ctx)
}

impl VarMorphism {
    /// Relabels the auxiliary bundle, keeping component indices.
    pub fn retarget(&self, b: Bundle) -> VarMorphism {
        VarMorphism {
            codegree: self.codegree,
            target: b,
            coeffs: self.coeffs.clone(),
        }
    }
}

/// `<dL | j P(eps)> = <E | eps> + Div F`.
#[derive(Clone, Debug, PartialEq)]
pub struct FirstVariation {
    /// Parametrized Euler-Lagrange morphism, rank 0 on the parameter bundle.
    pub euler: VarMorphism,
    /// Parametrized Poincare-Cartan morphism, codegree 1.
    pub boundary: VarMorphism,
}

impl FirstVariation {
    /// Coefficient of `eps^A`.
    pub fn equation(&self, a: usize) -> Expr {
        self.euler
            .get(&(a as u16, MultiIndex::ZERO, BaseSet::EMPTY))
    }

    pub fn equations(&self, neps: usize) -> Vec<Expr> {
        (0..neps).map(|a| self.equation(a)).collect()
    }
}

/// Staged parametrized first variation of `l` under `p`.
pub fn p_first_variation(l: &Expr, p: &Parametrization, ctx: &Ctx) -> Result<FirstVariation> {
    let dl = first_variation(l, ctx);
    let s1 = split(&dl, SplitOrder::Lexicographic, ctx)?;
    if p.is_trivial() {
        return Ok(FirstVariation {
            euler: s1.volume.retarget(Bundle::Eps),
            boundary: s1.boundary.retarget(Bundle::Eps),
        });
    }
    let t0 = parametrization_table(p, 0, ctx)?;
    let el = s1.volume.contract(&t0)?;
    let s2 = split(&el, SplitOrder::Lexicographic, ctx)?;
    let k = dl.rank();
    let tk = parametrization_table(p, k.saturating_sub(1), ctx)?;
    let pc = s1.boundary.contract(&tk)?;
    Ok(FirstVariation {
        euler: s2.volume,
        boundary: pc.add(&s2.boundary),
    })
}

/// Single-stage route: contract first, then split in the given order.
pub fn p_first_variation_direct(
    l: &Expr,
    p: &Parametrization,
    order: SplitOrder,
    ctx: &Ctx,
) -> Result<FirstVariation> {
    let dl = first_variation(l, ctx);
    let t = parametrization_table(p, dl.rank(), ctx)?;
    let s = split(&dl.contract(&t)?, order, ctx)?;
    Ok(FirstVariation {
        euler: s.volume,
        boundary: s.boundary,
    })
}

/// `<dL | j P(eps)> - <E | eps> - Div F`, zero when the formula holds.
pub fn first_variation_residue(
    l: &Expr,
    p: &Parametrization,
    fv: &FirstVariation,
    ctx: &Ctx,
) -> Result<Expr> {
    let dl = first_variation(l, ctx);
    let t = parametrization_table(p, dl.rank(), ctx)?;
    let lhs = dl.contract(&t)?.component(BaseSet::EMPTY);
    let vol = fv.euler.component(BaseSet::EMPTY);
    let div = div_components(&fv.boundary.pair(), ctx.n, ctx)?
        .remove(&BaseSet::EMPTY)
        .unwrap_or_default();
    Ok(&(&lhs - &vol) - &div)
}

/// Field equations of a model: one equation per parameter component, their
/// reductions modulo the constraints, and the constraint equations.
#[derive(Clone, Debug, PartialEq)]
pub struct EulerLagrange {
    pub equations: Vec<Expr>,
    pub reduced: Vec<Expr>,
    pub constraints: Vec<Expr>,
    /// Per Lagrangian term, in declaration order.
    pub by_term: BTreeMap<String, Vec<Expr>>,
}

pub fn p_first_variation_model(m: &Model) -> Result<FirstVariation> {
    p_first_variation(&m.lagrangian_total(), &m.parametrization, &m.ctx)
}

pub fn p_euler_lagrange(m: &Model) -> Result<EulerLagrange> {
    let neps = m.neps();
    let mut equations = vec![Expr::zero(); neps];
    let mut by_term = BTreeMap::new();
    for t in &m.lagrangian {
        let fv = p_first_variation(&t.expr, &m.parametrization, &m.ctx)?;
        let eqs = fv.equations(neps);
        for (acc, e) in equations.iter_mut().zip(&eqs) {
            *acc = &*acc + e;
        }
        by_term.insert(t.name.clone(), eqs);
    }
    let reduced = equations
        .iter()
        .map(|e| reduce_all(e, &m.constraints, &m.ctx))
        .collect::<Result<Vec<_>>>()?;
    let constraints = m
        .constraints
        .iter()
        .flat_map(|c| c.exprs.iter().cloned())
        .collect();
    Ok(EulerLagrange {
        equations,
        reduced,
        constraints,
        by_term,
    })
}

/// Codegree-1 boundary morphism `F` of the model.
pub fn p_poincare_cartan(m: &Model) -> Result<VarMorphism> {
    Ok(p_first_variation_model(m)?.boundary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::Q;
    use crate::modeldef::model::layout;
    use crate::modeldef::FieldKind;
    use crate::symexpr::{Comp, JetVar};

    fn y(i: &[usize]) -> Expr {
        Expr::jet(JetVar::new(Comp::field(0), MultiIndex::from_dirs(i)))
    }

    #[test]
    fn klein_gordon_in_flat_two_dimensions() {
        let ctx = Ctx::new(2);
        let half = Q::frac(1, 2);
        let l = (&(&(&y(&[0]) * &y(&[0])) - &(&y(&[1]) * &y(&[1]))) - &(&y(&[]) * &y(&[])))
            .scale(&half);
        let fields = layout(2, &[("phi", FieldKind::Scalar)]);
        let p = Parametrization::trivial(&fields, 2);
        let fv = p_first_variation(&l, &p, &ctx).unwrap();
        let expect = &(&(-&y(&[0, 0])) + &y(&[1, 1])) - &y(&[]);
        assert_eq!(fv.equation(0), expect);
        assert!(first_variation_residue(&l, &p, &fv, &ctx)
            .unwrap()
            .is_zero());
    }

    #[test]
    fn staged_and_direct_routes_share_the_volume_part() {
        let ctx = Ctx::new(2);
        let fields = layout(2, &[("phi", FieldKind::Scalar)]);
        let mut p = Parametrization::trivial(&fields, 2);
        let e = |i: &[usize]| Expr::jet(JetVar::new(Comp::eps(0), MultiIndex::from_dirs(i)));
        p.delta = vec![&(&y(&[]) * &e(&[1])) + &e(&[])];
        p.measure();
        let l = &(&y(&[0]) * &y(&[1])) + &(&y(&[0, 1]) * &y(&[]));
        let staged = p_first_variation(&l, &p, &ctx).unwrap();
        let direct = p_first_variation_direct(&l, &p, SplitOrder::Random(11), &ctx).unwrap();
        assert_eq!(staged.euler, direct.euler);
        assert!(first_variation_residue(&l, &p, &staged, &ctx)
            .unwrap()
            .is_zero());
        assert!(first_variation_residue(&l, &p, &direct, &ctx)
            .unwrap()
            .is_zero());
    }
}
