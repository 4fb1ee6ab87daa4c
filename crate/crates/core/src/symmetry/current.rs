//! Lie derivatives of sections, covariance of Lagrangians and Noether currents.
//!
//! Everything is computed for the formal generator, whose components are the
//! free auxiliary fields `xi^mu` and `zeta`; a concrete generator is applied
//! afterwards by substituting its components and their derivatives.

use std::collections::BTreeMap;

use rayon::prelude::*;
use rustc_hash::FxHashMap;

use crate::constraints::reduce_all;
use crate::error::{JetError, Result};
use crate::modeldef::Model;
use crate::symexpr::{
    normal_form, total_derivative, total_derivative_multi, Atom, BaseSet, Bundle, Ctx, Expr,
    MultiIndex,
};
use crate::varcalc::{
    div_components, first_variation, linear_coeffs, p_first_variation, split, JetTable, SplitOrder,
    VarMorphism,
};

use super::lift::{lie_template, xi_jet, zeta_jet, FieldRef, GeneratorLift};

impl GeneratorLift {
    /// Components `(xi^0, ..., xi^{n-1}, zeta)`; `zeta` only when `gauge`.
    pub fn section(&self, gauge: bool) -> Vec<Expr> {
        let mut s = self.xi.clone();
        if gauge {
            s.push(self.zeta.clone().unwrap_or_default());
        }
        s
    }

    /// Whether the components are the free auxiliary fields themselves.
    pub fn is_formal(&self) -> bool {
        let n = self.xi.len();
        self.xi
            .iter()
            .enumerate()
            .all(|(m, e)| *e == xi_jet(m, MultiIndex::ZERO))
            && self
                .zeta
                .as_ref()
                .is_none_or(|z| *z == zeta_jet(n, MultiIndex::ZERO))
    }
}

/// Substitutes the jets of the formal generator by the derivatives of `section`.
pub fn apply_generator(e: &Expr, section: &[Expr], ctx: &Ctx) -> Result<Expr> {
    let mut subs: FxHashMap<Atom, Expr> = FxHashMap::default();
    for v in e.jet_vars() {
        if v.comp.bundle != Bundle::Gen {
            continue;
        }
        let base = section
            .get(v.comp.index as usize)
            .cloned()
            .unwrap_or_default();
        subs.insert(Atom::Jet(v), total_derivative_multi(&base, &v.idx, ctx)?);
    }
    Ok(e.substitute_with(|a| subs.get(a).cloned()))
}

/// `L_Xi y^a` for every field component, in the jets of the formal generator.
/// Overrides of `g` replace the kind templates: `L_Xi y^a = y^a_mu xi^mu - Xi^a`.
pub fn lie_section(m: &Model, g: &GeneratorLift) -> Result<Vec<Expr>> {
    let n = m.n;
    let formal = GeneratorLift::formal("formal", n, m.gauge_field().is_some());
    let mut out = Vec::with_capacity(m.ncomp());
    for f in &m.fields {
        let r = FieldRef {
            decl: f,
            bundle: Bundle::Field,
            n,
        };
        for o in 0..f.count(n) {
            let c = f.first + o;
            let e = match g.overrides.get(&c) {
                Some(hat) => {
                    let mut acc = Expr::zero();
                    for mu in 0..n {
                        acc = &acc + &(&formal.xi[mu] * &m.y(c, MultiIndex::unit(mu)));
                    }
                    &acc - hat
                }
                None => lie_template(
                    &m.ctx,
                    r,
                    &f.kind.indices(n, o),
                    &formal.xi,
                    formal.zeta.as_ref(),
                )?,
            };
            out.push(e);
        }
    }
    Ok(out)
}

/// `d_alpha (L_Xi y^a)`.
pub fn lie_derivative_jet(
    m: &Model,
    g: &GeneratorLift,
    a: usize,
    alpha: &MultiIndex,
) -> Result<Expr> {
    let s = lie_section(m, g)?;
    total_derivative_multi(&s[a], alpha, &m.ctx)
}

/// Reduction modulo the constraints followed by the normal form.
pub fn settle(e: &Expr, m: &Model) -> Result<Expr> {
    Ok(normal_form(&reduce_all(e, &m.constraints, &m.ctx)?, &m.ctx))
}

/// [`settle`] applied coefficient by coefficient of an expression linear in
/// the generator jets.
pub fn settle_linear(e: &Expr, m: &Model) -> Result<Expr> {
    let Ok(parts) = linear_coeffs(e, Bundle::Gen) else {
        return settle(e, m);
    };
    let done: Vec<Result<Expr>> = parts
        .into_par_iter()
        .map(|((c, idx), k)| {
            let s = settle(&k, m)?;
            Ok(&s
                * &Expr::jet(crate::symexpr::JetVar::new(
                    crate::symexpr::Comp::gen(c as usize),
                    idx,
                )))
        })
        .collect();
    let mut out = Expr::zero();
    for d in done {
        out = &out + &d?;
    }
    Ok(out)
}

/// Result of the covariance check of one Lagrangian under one generator.
#[derive(Clone, Debug, PartialEq)]
pub struct Covariance {
    /// `pi_2 L_Xi L` as a codegree-0 morphism on the generator jets.
    pub lie: VarMorphism,
    /// Volume part after reduction; zero iff the Lagrangian is covariant.
    pub residue: Expr,
    /// Boundary part `alpha` with `pi_2 L_Xi L = Div alpha` on the constraint.
    pub alpha: VarMorphism,
}

impl Covariance {
    pub fn covariant(&self) -> bool {
        self.residue.is_zero()
    }
}

/// `pi_2 L_Xi L = <dL | j L_Xi sigma> - Div(xi L)` for the formal generator.
pub fn lie_of_lagrangian(m: &Model, l: &Expr, g: &GeneratorLift) -> Result<VarMorphism> {
    let ctx = &m.ctx;
    let dl = first_variation(l, ctx);
    let lie = lie_section(m, g)?;
    let t = JetTable::prolong(&lie, Bundle::Var, Bundle::Gen, dl.rank(), ctx)?;
    let mut out = dl.contract(&t)?;
    for mu in 0..m.n {
        out.add_term(
            (mu as u16, MultiIndex::ZERO, BaseSet::EMPTY),
            &-&total_derivative(l, mu, ctx)?,
        );
        out.add_term((mu as u16, MultiIndex::unit(mu), BaseSet::EMPTY), &-l);
    }
    Ok(out)
}

/// Splits `pi_2 L_Xi L` into a reduced volume residue and the boundary `alpha`.
/// For a concrete generator the residue is evaluated on its components.
pub fn check_covariance(m: &Model, l: &Expr, g: &GeneratorLift) -> Result<Covariance> {
    let lie = lie_of_lagrangian(m, l, g)?;
    let s = split(&lie, SplitOrder::Lexicographic, &m.ctx)?;
    let vol = s.volume.component(BaseSet::EMPTY);
    let residue = if g.is_formal() {
        settle_linear(&vol, m)?
    } else {
        let sec = g.section(m.gauge_field().is_some());
        settle(&apply_generator(&vol, &sec, &m.ctx)?, m)?
    };
    Ok(Covariance {
        lie,
        residue,
        alpha: s.boundary,
    })
}

/// Parameter section `J(Xi)` of the model in the formal generator jets.
pub fn jmap_section(m: &Model, g: &GeneratorLift) -> Result<Vec<Expr>> {
    match &m.jmap {
        Some(j) => Ok(j.clone()),
        None if m.parametrization.is_trivial() => lie_section(m, g),
        None => Err(JetError::Validation(
            "model with a nontrivial parametrization declares no jmap".into(),
        )),
    }
}

/// `P(J(Xi)) - L_Xi sigma`, reduced; all zero iff `J` lifts the Lie derivative.
pub fn check_jmap(m: &Model, g: &GeneratorLift) -> Result<Vec<Expr>> {
    let ctx = &m.ctx;
    let j = jmap_section(m, g)?;
    let lie = lie_section(m, g)?;
    let p = &m.parametrization;
    let rank = p.rank;
    let t = JetTable::prolong(&j, Bundle::Eps, Bundle::Gen, rank, ctx)?;
    let mut out = Vec::new();
    for (a, d) in p.delta.iter().enumerate() {
        let subs: FxHashMap<Atom, Expr> = d
            .jet_vars()
            .into_iter()
            .filter(|v| v.comp.bundle == Bundle::Eps)
            .map(|v| (Atom::Jet(v), t.entries[&(v.comp.index, v.idx)].clone()))
            .collect();
        let pj = d.substitute_with(|x| subs.get(x).cloned());
        out.push(settle_linear(&(&pj - &lie[a]), m)?);
    }
    Ok(out)
}

/// Noether current of one Lagrangian for the formal generator:
/// `E = <F | j J(Xi)> - xi L - alpha`.
#[derive(Clone, Debug, PartialEq)]
pub struct NoetherCurrent {
    pub current: VarMorphism,
    pub covariance: Covariance,
    /// `<E_vol | J(Xi)>`.
    pub euler: VarMorphism,
}

pub fn noether_current(m: &Model, l: &Expr, g: &GeneratorLift) -> Result<NoetherCurrent> {
    let ctx = &m.ctx;
    let covariance = check_covariance(m, l, g)?;
    let fv = p_first_variation(l, &m.parametrization, ctx)?;
    let j = jmap_section(m, g)?;
    let tf = JetTable::prolong(&j, Bundle::Eps, Bundle::Gen, fv.boundary.rank(), ctx)?;
    let mut current = fv.boundary.contract(&tf)?;
    for mu in 0..m.n {
        current.add_term((mu as u16, MultiIndex::ZERO, BaseSet::single(mu)), &-l);
    }
    current = current.sub(&covariance.alpha);
    let t0 = JetTable::prolong(&j, Bundle::Eps, Bundle::Gen, 0, ctx)?;
    let euler = fv.euler.contract(&t0)?;
    Ok(NoetherCurrent {
        current,
        covariance,
        euler,
    })
}

impl NoetherCurrent {
    pub fn add(&self, o: &NoetherCurrent) -> NoetherCurrent {
        NoetherCurrent {
            current: self.current.add(&o.current),
            covariance: Covariance {
                lie: self.covariance.lie.add(&o.covariance.lie),
                residue: &self.covariance.residue + &o.covariance.residue,
                alpha: self.covariance.alpha.add(&o.covariance.alpha),
            },
            euler: self.euler.add(&o.euler),
        }
    }

    /// `E^mu` evaluated on a generator section.
    pub fn components(&self, section: &[Expr], ctx: &Ctx) -> Result<Vec<Expr>> {
        let p = self.current.evaluate_on(section, ctx)?;
        Ok((0..ctx.n)
            .map(|mu| p.get(&BaseSet::single(mu)).cloned().unwrap_or_default())
            .collect())
    }

    /// `Div E + <E_vol | J(Xi)>` for the formal generator, unreduced.
    pub fn offshell_raw(&self, ctx: &Ctx) -> Result<Expr> {
        let div = div_components(&self.current.pair(), ctx.n, ctx)?
            .remove(&BaseSet::EMPTY)
            .unwrap_or_default();
        Ok(&div + &self.euler.component(BaseSet::EMPTY))
    }
}

/// Off-shell identity residue, reduced modulo constraints and the normal form.
pub fn check_offshell_identity(m: &Model, nc: &NoetherCurrent) -> Result<Expr> {
    settle_linear(&nc.offshell_raw(&m.ctx)?, m)
}

/// Noether current of the whole Lagrangian, summed over terms.
pub fn noether_current_total(m: &Model, g: &GeneratorLift) -> Result<NoetherCurrent> {
    let mut parts = m.lagrangian.iter().map(|t| noether_current(m, &t.expr, g));
    let mut acc = parts
        .next()
        .ok_or_else(|| JetError::Validation("empty Lagrangian".into()))??;
    for p in parts {
        acc = acc.add(&p?);
    }
    Ok(acc)
}

/// `A_rho xi^rho` for the gauge potential of the model.
fn contraction_with_potential(m: &Model, xi: &[Expr]) -> Result<Expr> {
    let a = m.gauge_field().ok_or(JetError::NoConnectionField)?;
    let mut acc = Expr::zero();
    for (r, x) in xi.iter().enumerate() {
        acc = &acc + &(&m.y(a.first + r, MultiIndex::ZERO) * x);
    }
    Ok(acc)
}

/// Horizontal part `(xi, -A_rho xi^rho)` and vertical part `(0, zeta + A_rho xi^rho)`
/// of a generator, as sections.
pub fn split_generator(m: &Model, g: &GeneratorLift) -> Result<(Vec<Expr>, Vec<Expr>)> {
    let ax = contraction_with_potential(m, &g.xi)?;
    let zeta = g.zeta.clone().unwrap_or_default();
    let mut h = g.xi.clone();
    h.push(-&ax);
    let mut v = vec![Expr::zero(); m.n];
    v.push(&zeta + &ax);
    Ok((h, v))
}

/// `E_V = W zeta + Div U` for the vertical current.
#[derive(Clone, Debug, PartialEq)]
pub struct Superpotential {
    /// `U^{alpha mu}`, `alpha < mu`, for a formal vertical component `zeta`.
    pub formal: BTreeMap<BaseSet, Expr>,
    /// `U` evaluated on the vertical part of the generator.
    pub u: BTreeMap<BaseSet, Expr>,
    /// Coefficients `W^alpha` of the undifferentiated `zeta`.
    pub onshell: Vec<Expr>,
    /// `W^alpha = sum_A c^alpha_A E_A`: the nonzero multipliers per `alpha`.
    pub multipliers: Vec<Vec<(usize, Expr)>>,
}

/// Parameter components moved by a variation of the gauge potential.
pub fn gauge_parameter_components(m: &Model) -> Result<Vec<usize>> {
    let a = m.gauge_field().ok_or(JetError::NoConnectionField)?;
    let mut out: Vec<usize> = Vec::new();
    for c in a.first..a.first + a.count(m.n) {
        for v in m.parametrization.delta[c].jet_vars() {
            if v.comp.bundle == Bundle::Eps && !out.contains(&(v.comp.index as usize)) {
                out.push(v.comp.index as usize);
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Superpotential of the vertical part of `nc`, with the on-shell part written
/// as a combination of the field equations `eqs` (indexed by parameter component).
pub fn superpotential(
    m: &Model,
    nc: &NoetherCurrent,
    g: &GeneratorLift,
    eqs: &BTreeMap<usize, Expr>,
) -> Result<Superpotential> {
    let ctx = &m.ctx;
    let n = m.n;
    m.gauge_field().ok_or(JetError::NoConnectionField)?;
    let mut vsec = vec![Expr::zero(); n];
    vsec.push(zeta_jet(n, MultiIndex::ZERO));
    let ev = VarMorphism::from_pairing(&nc.current.evaluate_on(&vsec, ctx)?, 1, Bundle::Gen)?;
    let s = crate::varcalc::reduce_codegree(&ev, ctx)?;
    if s.volume.rank() > 0 {
        return Err(JetError::OnShellDecompositionFailed(
            "derivatives of zeta remain in the volume part".into(),
        ));
    }
    let onshell: Vec<Expr> = (0..n)
        .map(|a| {
            s.volume
                .get(&(n as u16, MultiIndex::ZERO, BaseSet::single(a)))
        })
        .collect();
    let multipliers = onshell
        .iter()
        .map(|w| solve_multipliers(m, w, eqs))
        .collect::<Result<Vec<_>>>()?;
    let formal = s.boundary.pair();
    let (_, v) = split_generator(m, g)?;
    let u = s.boundary.evaluate_on(&v, ctx)?;
    Ok(Superpotential {
        formal,
        u,
        onshell,
        multipliers,
    })
}

/// Finds constants `c_A` with `w = sum_A c_A eqs[A]` modulo the constraints.
fn solve_multipliers(
    m: &Model,
    w: &Expr,
    eqs: &BTreeMap<usize, Expr>,
) -> Result<Vec<(usize, Expr)>> {
    use crate::symexpr::eval::{eval_numeric, PointSampler};
    use nalgebra::{DMatrix, DVector};

    let target = settle(w, m)?;
    if target.is_zero() {
        return Ok(Vec::new());
    }
    let keys: Vec<usize> = eqs.keys().copied().collect();
    let settled: Vec<Expr> = keys
        .iter()
        .map(|k| settle(&eqs[k], m))
        .collect::<Result<_>>()?;
    let mut vars = target.jet_vars();
    for e in &settled {
        vars.extend(e.jet_vars());
    }
    let rows = keys.len() + 6;
    let mut sampler = PointSampler::new(0x5eed);
    let mut a = DMatrix::zeros(rows, keys.len());
    let mut b = DVector::zeros(rows);
    for r in 0..rows {
        let p = sampler.sample(&m.ctx, &vars, &m.params);
        b[r] = eval_numeric(&target, &p, &m.ctx)?;
        for (c, e) in settled.iter().enumerate() {
            a[(r, c)] = eval_numeric(e, &p, &m.ctx)?;
        }
    }
    let fail = || {
        JetError::OnShellDecompositionFailed(
            "no constant combination of field equations matches".into(),
        )
    };
    let x = a.svd(true, true).solve(&b, 1e-9).map_err(|_| fail())?;
    let mut out = Vec::new();
    let mut residue = target.clone();
    for (c, k) in keys.iter().enumerate() {
        let q = rationalize(x[c]).ok_or_else(fail)?;
        if q.is_zero() {
            continue;
        }
        let qe = Expr::constant(q.clone());
        residue = &residue - &settled[c].scale(&q);
        out.push((*k, qe));
    }
    if !settle(&residue, m)?.is_zero() {
        return Err(fail());
    }
    Ok(out)
}

fn rationalize(x: f64) -> Option<crate::coeff::Q> {
    for den in 1..=24i64 {
        let num = (x * den as f64).round();
        if (num / den as f64 - x).abs() < 1e-7 {
            return Some(crate::coeff::Q::frac(num as i64, den));
        }
    }
    None
}
