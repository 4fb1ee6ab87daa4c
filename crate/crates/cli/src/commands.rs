//! Subcommand implementations.

use std::collections::BTreeMap;

use jetvar::constraints::{check_adapted, vary};
use jetvar::modeldef::{Model, Parametrization};
use jetvar::symexpr::{eval_numeric, normal_form, Atom, BaseSet, Bundle, Comp, Expr, MultiIndex};
use jetvar::symmetry::{
    apply_generator, check_covariance, check_jmap, check_offshell_identity, jmap_section,
    lie_of_lagrangian, lie_section, noether_current_total, settle, superpotential, zeta_jet,
    GeneratorLift, NoetherCurrent,
};
use jetvar::varcalc::{div_components, p_euler_lagrange, p_poincare_cartan, JetTable};
use jetvar::{JetError, Result};

use crate::numeric::{compare, points};
use crate::report::Builder;

pub struct Sampling {
    pub seed: u64,
    pub samples: usize,
}

fn eps_label(m: &Model, a: usize) -> String {
    m.comp_label(Comp::eps(a))
}

fn set_label(t: BaseSet) -> String {
    t.indices()
        .iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

pub fn generator<'m>(m: &'m Model, name: Option<&str>) -> Result<&'m GeneratorLift> {
    match name {
        Some(n) => m.generator(n).ok_or_else(|| {
            JetError::Validation(format!("model `{}` declares no generator `{n}`", m.name))
        }),
        None => m.generators.first().ok_or_else(|| {
            JetError::Validation(format!("model `{}` declares no generator", m.name))
        }),
    }
}

/// Field equations, their reductions and the boundary morphism.
pub fn derive(m: &Model, out: &mut Builder) -> Result<()> {
    let el = p_euler_lagrange(m)?;
    for (a, e) in el.equations.iter().enumerate() {
        out.emit(format!("E[{}]", eps_label(m, a)), normal_form(e, &m.ctx));
    }
    if !m.constraints.is_empty() {
        for (a, e) in el.reduced.iter().enumerate() {
            out.emit(
                format!("E_reduced[{}]", eps_label(m, a)),
                normal_form(e, &m.ctx),
            );
        }
        for (i, c) in el.constraints.iter().enumerate() {
            out.emit(format!("constraint[{i}]"), c.clone());
        }
    }
    let f = p_poincare_cartan(m)?;
    for ((a, idx, t), e) in &f.coeffs {
        let e = normal_form(e, &m.ctx);
        if e.is_zero() {
            continue;
        }
        let dirs: Vec<String> = idx.dirs().iter().map(|d| d.to_string()).collect();
        out.emit(
            format!(
                "F^{}[{};{}]",
                set_label(*t),
                eps_label(m, *a as usize),
                dirs.join(",")
            ),
            e,
        );
    }
    Ok(())
}

/// `Div E` and `-<E_vol | J(Xi)>`: equal on the constraint for a symmetry.
fn offshell_sides(m: &Model, nc: &NoetherCurrent) -> Result<(Expr, Expr)> {
    let div = div_components(&nc.current.pair(), m.n, &m.ctx)?
        .remove(&BaseSet::EMPTY)
        .unwrap_or_default();
    Ok((div, -&nc.euler.component(BaseSet::EMPTY)))
}

fn offshell_items(m: &Model, nc: &NoetherCurrent, s: &Sampling, out: &mut Builder) -> Result<()> {
    out.residue("offshell identity", &check_offshell_identity(m, nc)?)?;
    let pair = offshell_sides(m, nc)?;
    out.numeric(
        "Div E = -<E_vol|J(Xi)>",
        s.seed,
        compare(m, &[pair], s.seed, s.samples)?,
    );
    Ok(())
}

pub fn noether(m: &Model, g: &GeneratorLift, s: &Sampling, out: &mut Builder) -> Result<()> {
    let nc = noether_current_total(m, g)?;
    out.residue("covariance", &normal_form(&nc.covariance.residue, &m.ctx))?;
    offshell_items(m, &nc, s, out)?;
    let section = g.section(m.gauge_field().is_some());
    for (mu, e) in nc.components(&section, &m.ctx)?.into_iter().enumerate() {
        out.emit(format!("E^{mu}"), normal_form(&e, &m.ctx));
    }
    Ok(())
}

pub fn superpotential_cmd(
    m: &Model,
    g: &GeneratorLift,
    s: &Sampling,
    out: &mut Builder,
) -> Result<()> {
    let n = m.n;
    let ctx = &m.ctx;
    let nc = noether_current_total(m, g)?;
    let el = p_euler_lagrange(m)?;
    let eqs: BTreeMap<usize, Expr> = el.reduced.iter().cloned().enumerate().collect();
    let sp = superpotential(m, &nc, g, &eqs)?;
    for (a, w) in sp.onshell.iter().enumerate() {
        let terms: Vec<String> = sp.multipliers[a]
            .iter()
            .map(|(c, k)| {
                format!(
                    "({}) E[{}]",
                    jetvar::modeldef::render_expr(k, m).unwrap_or_default(),
                    eps_label(m, *c)
                )
            })
            .collect();
        let settled = settle(w, m)?;
        let ok = settled.is_zero() || !terms.is_empty();
        let detail = if terms.is_empty() {
            "W vanishes".to_string()
        } else {
            terms.join(" + ")
        };
        out.flag(
            format!("W^{a} is a combination of field equations"),
            ok,
            detail,
        );
        out.emit(format!("W^{a}"), settled);
    }
    for (t, u) in &sp.u {
        out.emit(format!("U^{{{}}}", set_label(*t)), normal_form(u, ctx));
    }
    // E_V = W zeta + Div U for the formal vertical component.
    let mut vsec = vec![Expr::zero(); n];
    vsec.push(zeta_jet(n, MultiIndex::ZERO));
    let ev = nc.current.evaluate_on(&vsec, ctx)?;
    let div = div_components(&sp.formal, n, ctx)?;
    let zeta = zeta_jet(n, MultiIndex::ZERO);
    let pairs: Vec<(Expr, Expr)> = (0..n)
        .map(|a| {
            let t = BaseSet::single(a);
            let rhs = &(&sp.onshell[a] * &zeta) + &div.get(&t).cloned().unwrap_or_default();
            (ev.get(&t).cloned().unwrap_or_default(), rhs)
        })
        .collect();
    out.numeric(
        "E_V = W zeta + Div U",
        s.seed,
        compare(m, &pairs, s.seed, s.samples)?,
    );
    Ok(())
}

pub fn covariance(m: &Model, g: &GeneratorLift, s: &Sampling, out: &mut Builder) -> Result<()> {
    let section = g.section(m.gauge_field().is_some());
    let concrete = |e: &Expr| -> Result<Expr> {
        if g.is_formal() {
            Ok(e.clone())
        } else {
            apply_generator(e, &section, &m.ctx)
        }
    };
    for t in &m.lagrangian {
        let c = check_covariance(m, &t.expr, g)?;
        out.residue(format!("covariance {}", t.name), &c.residue)?;
        let lie = lie_of_lagrangian(m, &t.expr, g)?.component(BaseSet::EMPTY);
        let div = div_components(&c.alpha.pair(), m.n, &m.ctx)?
            .remove(&BaseSet::EMPTY)
            .unwrap_or_default();
        let pair = (concrete(&lie)?, concrete(&div)?);
        out.numeric(
            format!("L_Xi {} = Div alpha", t.name),
            s.seed,
            compare(m, &[pair], s.seed, s.samples)?,
        );
    }
    Ok(())
}

pub fn adapted(m: &Model, s: &Sampling, out: &mut Builder) -> Result<()> {
    if m.constraints.is_empty() {
        out.flag("adapted", true, "model declares no constraints");
        return Ok(());
    }
    let mut pairs = Vec::new();
    for (i, c) in m.constraints.iter().enumerate() {
        let rep = check_adapted(&m.parametrization, c, m)?;
        for item in rep.items {
            out.residue(
                format!("adapted constraint[{i}] {}", item.name),
                &item.residue.unwrap_or_default(),
            )?;
        }
        for phi in &c.exprs {
            pairs.push((vary(phi, &m.parametrization.delta, &m.ctx)?, Expr::zero()));
        }
    }
    out.numeric(
        "delta Phi = 0 on the constraint",
        s.seed,
        compare(m, &pairs, s.seed, s.samples)?,
    );
    Ok(())
}

pub fn jmap(m: &Model, g: &GeneratorLift, s: &Sampling, out: &mut Builder) -> Result<()> {
    for (a, r) in check_jmap(m, g)?.iter().enumerate() {
        out.residue(format!("jmap {}", m.comp_label(Comp::field(a))), r)?;
    }
    let p: &Parametrization = &m.parametrization;
    let j = jmap_section(m, g)?;
    let lie = lie_section(m, g)?;
    let t = JetTable::prolong(&j, Bundle::Eps, Bundle::Gen, p.rank, &m.ctx)?;
    let pairs: Vec<(Expr, Expr)> = p
        .delta
        .iter()
        .zip(lie)
        .map(|(d, l)| {
            let pj = d.substitute_with(|x| match x {
                Atom::Jet(v) if v.comp.bundle == Bundle::Eps => {
                    t.entries.get(&(v.comp.index, v.idx)).cloned()
                }
                _ => None,
            });
            (pj, l)
        })
        .collect();
    out.numeric(
        "P(J(Xi)) = L_Xi y",
        s.seed,
        compare(m, &pairs, s.seed, s.samples)?,
    );
    Ok(())
}

pub fn offshell(m: &Model, g: &GeneratorLift, s: &Sampling, out: &mut Builder) -> Result<()> {
    let nc = noether_current_total(m, g)?;
    offshell_items(m, &nc, s, out)
}

/// Lagrangian terms and field equations at seeded points, with the raw and
/// reduced equations compared on the constraint.
pub fn eval(m: &Model, s: &Sampling, out: &mut Builder) -> Result<()> {
    let el = p_euler_lagrange(m)?;
    let mut exprs: Vec<(String, &Expr)> = m
        .lagrangian
        .iter()
        .map(|t| (t.name.clone(), &t.expr))
        .collect();
    for (a, e) in el.reduced.iter().enumerate() {
        exprs.push((format!("E[{}]", eps_label(m, a)), e));
    }
    let pts = points(
        m,
        exprs.iter().map(|(_, e)| *e).chain(&el.equations),
        s.seed,
        s.samples,
    )?;
    for (i, p) in pts.iter().enumerate() {
        for (name, e) in &exprs {
            out.values
                .push((format!("{name}@{i}"), eval_numeric(e, p, &m.ctx)?));
        }
    }
    if !m.constraints.is_empty() {
        let pairs: Vec<(Expr, Expr)> = el
            .equations
            .iter()
            .cloned()
            .zip(el.reduced.iter().cloned())
            .collect();
        out.numeric(
            "E = E_reduced on the constraint",
            s.seed,
            compare(m, &pairs, s.seed, s.samples)?,
        );
    }
    Ok(())
}

/// Expressions that make up the model, for `emit`.
pub fn contents(m: &Model, out: &mut Builder) {
    for t in &m.lagrangian {
        out.emit(t.name.clone(), t.expr.clone());
    }
    if m.parametrization != Parametrization::trivial(&m.fields, m.n) {
        for (a, d) in m.parametrization.delta.iter().enumerate() {
            out.emit(format!("delta {}", m.comp_label(Comp::field(a))), d.clone());
        }
    }
    for (i, c) in m.constraints.iter().enumerate() {
        for (k, e) in c.exprs.iter().enumerate() {
            out.emit(format!("constraint[{i}][{k}]"), e.clone());
        }
    }
    if let Some(j) = &m.jmap {
        for (a, e) in j.iter().enumerate() {
            out.emit(format!("jmap {}", eps_label(m, a)), e.clone());
        }
    }
}
