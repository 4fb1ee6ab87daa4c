//! Constraint submanifolds of jet space, their prolongations, reduction
//! modulo the constraint ideal, and adaptedness of parametrizations.
//!
//! Ideal membership is decided by solving each equation for a leading jet
//! coordinate and substituting the solution (and the solutions of all its
//! prolongations) wherever the coordinate or one of its derivatives occurs.
//!
//! Faithfulness is not decided; a constraint only records the declared flag.
//! A faithful adapted parametrization makes criticality for the parametrized
//! problem equivalent to criticality for the constrained one; without it only
//! the forward implication holds.

use std::collections::BTreeSet;
use std::sync::RwLock;

use rustc_hash::FxHashMap;

use crate::error::{JetError, Result};
use crate::modeldef::{Model, Parametrization};
use crate::report::{CheckItem, CheckReport};
use crate::symexpr::eval::{eval_numeric, JetPoint, PointSampler};
use crate::symexpr::{
    partial, total_derivative_multi, Atom, Bundle, Ctx, Expr, JetVar, MultiIndex,
};

/// Equations `Phi_i = 0` together with the jet coordinate each is solved for.
#[derive(Debug)]
pub struct Constraint {
    pub exprs: Vec<Expr>,
    pub leading: Vec<JetVar>,
    /// Highest jet order in the equations (`p`).
    pub order: usize,
    pub faithful: bool,
    solutions: RwLock<FxHashMap<(usize, MultiIndex), Expr>>,
}

impl Clone for Constraint {
    fn clone(&self) -> Constraint {
        Constraint {
            exprs: self.exprs.clone(),
            leading: self.leading.clone(),
            order: self.order,
            faithful: self.faithful,
            solutions: RwLock::new(FxHashMap::default()),
        }
    }
}

impl PartialEq for Constraint {
    fn eq(&self, o: &Constraint) -> bool {
        self.exprs == o.exprs && self.leading == o.leading && self.faithful == o.faithful
    }
}

/// Default leading coordinate: highest order, then the lexicographically
/// largest multi-index count array, then the smallest component.
pub fn default_leading(phi: &Expr) -> Option<JetVar> {
    phi.jet_vars()
        .into_iter()
        .filter(|v| v.comp.bundle == Bundle::Field)
        .max_by(|a, b| {
            a.order()
                .cmp(&b.order())
                .then(a.idx.0.cmp(&b.idx.0))
                .then(b.comp.cmp(&a.comp))
        })
}

fn invertible(c: &Expr) -> bool {
    if let Some(q) = c.as_constant() {
        return !q.is_zero();
    }
    match c.as_monomial() {
        Some((m, _)) => m
            .factors()
            .iter()
            .all(|(a, _)| matches!(a, Atom::SqrtG | Atom::Rho)),
        None => false,
    }
}

impl Constraint {
    /// Builds a constraint, choosing default leading coordinates where `leading` is `None`.
    pub fn new(
        exprs: Vec<Expr>,
        leading: Vec<Option<JetVar>>,
        faithful: bool,
        ctx: &Ctx,
    ) -> Result<Constraint> {
        let mut lead = Vec::new();
        for (i, phi) in exprs.iter().enumerate() {
            let l = match leading.get(i).copied().flatten() {
                Some(l) => l,
                None => default_leading(phi).ok_or_else(|| {
                    JetError::UnsolvableLeading(format!("equation {i} has no field jet"))
                })?,
            };
            let c = partial(phi, &l, ctx);
            if !invertible(&c) {
                return Err(JetError::UnsolvableLeading(format!(
                    "coefficient of the leading coordinate in equation {i} is not invertible"
                )));
            }
            lead.push(l);
        }
        let order = exprs
            .iter()
            .filter_map(|e| e.max_order(Bundle::Field))
            .max()
            .unwrap_or(0);
        let c = Constraint {
            exprs,
            leading: lead,
            order,
            faithful,
            solutions: RwLock::new(FxHashMap::default()),
        };
        for (i, phi) in c.exprs.iter().enumerate() {
            let rest = phi.filter(|m| m.degree_of(&Atom::Jet(c.leading[i])) == 0);
            if rest.jet_vars().iter().any(|v| c.family(v).is_some()) {
                return Err(JetError::UnsolvableLeading(format!(
                    "equation {i} involves derivatives of a leading coordinate"
                )));
            }
        }
        Ok(c)
    }

    pub fn codimension(&self) -> usize {
        self.exprs.len()
    }

    /// `(i, alpha)` if `v` is the leading coordinate of equation `i` differentiated by `alpha`.
    pub fn family(&self, v: &JetVar) -> Option<(usize, MultiIndex)> {
        self.leading.iter().enumerate().find_map(|(i, l)| {
            if l.comp == v.comp {
                v.idx.sub(&l.idx).map(|a| (i, a))
            } else {
                None
            }
        })
    }

    /// Solved value of the prolonged leading coordinate `l_i` differentiated by `alpha`.
    fn solution(&self, i: usize, alpha: MultiIndex, ctx: &Ctx) -> Result<Expr> {
        if let Some(e) = self.solutions.read().unwrap().get(&(i, alpha)) {
            return Ok(e.clone());
        }
        let l = self.leading[i];
        let target = JetVar::new(l.comp, l.idx.add(&alpha));
        let psi = total_derivative_multi(&self.exprs[i], &alpha, ctx)?;
        let c = partial(&psi, &target, ctx);
        let rest = psi.filter(|m| m.degree_of(&Atom::Jet(target)) == 0);
        let inv = c.try_pow(-1).ok_or_else(|| {
            JetError::UnsolvableLeading("leading coefficient is not a monomial".into())
        })?;
        let sol = self.reduce_inner(&(-&(&rest * &inv)), ctx)?;
        self.solutions
            .write()
            .unwrap()
            .insert((i, alpha), sol.clone());
        Ok(sol)
    }

    fn reduce_inner(&self, e: &Expr, ctx: &Ctx) -> Result<Expr> {
        let mut e = e.clone();
        for _ in 0..64 {
            let hits: Vec<(JetVar, usize, MultiIndex)> = e
                .jet_vars()
                .into_iter()
                .filter_map(|v| self.family(&v).map(|(i, a)| (v, i, a)))
                .collect();
            if hits.is_empty() {
                return Ok(e);
            }
            let mut subs: FxHashMap<Atom, Expr> = FxHashMap::default();
            for (v, i, a) in hits {
                subs.insert(Atom::Jet(v), self.solution(i, a, ctx)?);
            }
            e = e.substitute_with(|a| subs.get(a).cloned());
        }
        Err(JetError::UnsolvableLeading(
            "reduction does not terminate".into(),
        ))
    }

    /// All `d_alpha Phi_i` with `|alpha| <= q`.
    pub fn prolong(&self, q: usize, ctx: &Ctx) -> Result<Vec<Expr>> {
        let mut out = Vec::new();
        for phi in &self.exprs {
            for a in MultiIndex::all_up_to(ctx.n, q) {
                out.push(total_derivative_multi(phi, &a, ctx)?);
            }
        }
        Ok(out)
    }

    /// Substitutes every prolonged leading coordinate by its solution.
    pub fn reduce(&self, e: &Expr, ctx: &Ctx) -> Result<Expr> {
        self.reduce_inner(e, ctx)
    }

    /// Overwrites the values of prolonged leading coordinates in `p` so that
    /// the point lies on the prolonged constraint, sampling any jet the
    /// solutions need that `p` lacks.
    pub fn project_point(
        &self,
        p: &mut JetPoint,
        sampler: &mut PointSampler,
        ctx: &Ctx,
    ) -> Result<()> {
        let mut members: Vec<(JetVar, usize, MultiIndex)> = p
            .jets
            .keys()
            .filter_map(|v| self.family(v).map(|(i, a)| (*v, i, a)))
            .collect();
        members.sort_by_key(|m| m.0);
        for (v, i, a) in members {
            let sol = self.solution(i, a, ctx)?;
            let missing: BTreeSet<JetVar> = sol
                .jet_vars()
                .into_iter()
                .filter(|w| !p.jets.contains_key(w))
                .collect();
            if !missing.is_empty() {
                let extra = sampler.sample(ctx, &missing, &[]);
                for w in missing {
                    p.jets.insert(w, extra.jets[&w]);
                }
            }
            let val = eval_numeric(&sol, p, ctx)?;
            p.jets.insert(v, val);
        }
        Ok(())
    }
}

/// Reduces `e` modulo every constraint of the list.
pub fn reduce_all(e: &Expr, cs: &[Constraint], ctx: &Ctx) -> Result<Expr> {
    let mut out = e.clone();
    for c in cs {
        out = c.reduce(&out, ctx)?;
    }
    Ok(out)
}

/// `d_q Phi` for `|q| <= order`, the prolonged equations.
pub fn prolong_constraint(c: &Constraint, q: usize, ctx: &Ctx) -> Result<Vec<Expr>> {
    c.prolong(q, ctx)
}

pub fn reduce_mod_constraint(e: &Expr, c: &Constraint, ctx: &Ctx) -> Result<Expr> {
    c.reduce(e, ctx)
}

/// Variation of `phi` along the parametrized variation `delta`:
/// `sum_alpha dPhi/dy^a_alpha d_alpha(delta y^a)`.
pub fn vary(phi: &Expr, delta: &[Expr], ctx: &Ctx) -> Result<Expr> {
    let mut acc = Expr::zero();
    for v in ctx.dependencies(phi) {
        if v.comp.bundle != Bundle::Field {
            continue;
        }
        let dv = total_derivative_multi(&delta[v.comp.index as usize], &v.idx, ctx)?;
        acc = &acc + &(&partial(phi, &v, ctx) * &dv);
    }
    Ok(acc)
}

/// Whether every parametrized variation is tangent to the prolonged constraint.
pub fn check_adapted(p: &Parametrization, c: &Constraint, m: &Model) -> Result<CheckReport> {
    let ctx = &m.ctx;
    let mut rep = CheckReport::new("adapted");
    for (i, phi) in c.exprs.iter().enumerate() {
        let d = vary(phi, &p.delta, ctx)?;
        let r = c.reduce(&d, ctx)?;
        rep.push(CheckItem::residue(&format!("Phi[{i}]"), r));
    }
    Ok(rep)
}
