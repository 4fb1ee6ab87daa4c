//! Normal form modulo the algebraic relations between derived atoms.
//!
//! Plain canonical form treats `g^{mn}`, `sqrt|g|` and `rho` as free symbols,
//! so identities such as `g^{ma} g_{an} = delta^m_n` or
//! `rho^2 |g| = g_{mn} J^m J^n` are invisible to it. [`normal_form`] decides
//! zero-ness in the quotient ring: the order-zero metric is rewritten through
//! the inverse metric `h`, and `sqrt|g|` and `rho` are reduced to at most
//! linear occurrences using
//!
//! ```text
//! g_{mn} = s S^2 adj(h)_{mn}
//! S^{-2} = s det(h)
//! rho^2  = s adj(h)_{mn} J^m J^n
//! ```
//!
//! where `S = sqrt|g|` and `s` is the sign of `det g`. Terms are grouped by
//! their factors that do not take part in the relations; each group is
//! rescaled by a nonvanishing monomial before reduction, so the result is zero
//! iff the input is zero as a function on the sampled domain.

use rayon::prelude::*;
use rustc_hash::FxHashMap;

use super::atom::Atom;
use super::ctx::Ctx;
use super::expr::{Expr, ExprBuilder, Mono};
use crate::coeff::Q;

/// Determinant by cofactor expansion along the first row.
pub fn det_expr(m: &[Vec<Expr>]) -> Expr {
    let n = m.len();
    match n {
        0 => Expr::int(1),
        1 => m[0][0].clone(),
        _ => {
            let mut acc = ExprBuilder::new();
            for j in 0..n {
                if m[0][j].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<Expr>> = (1..n)
                    .map(|r| {
                        (0..n)
                            .filter(|&c| c != j)
                            .map(|c| m[r][c].clone())
                            .collect()
                    })
                    .collect();
                let t = &m[0][j] * &det_expr(&minor);
                let sign = if j % 2 == 0 { Q::one() } else { Q::int(-1) };
                acc.add_scaled(&t, &Mono::one(), &sign);
            }
            acc.finish()
        }
    }
}

/// Adjugate matrix, `adj(m) m = det(m) 1`.
pub fn adjugate(m: &[Vec<Expr>]) -> Vec<Vec<Expr>> {
    let n = m.len();
    let mut out = vec![vec![Expr::zero(); n]; n];
    for a in 0..n {
        for b in 0..n {
            let minor: Vec<Vec<Expr>> = (0..n)
                .filter(|&r| r != b)
                .map(|r| {
                    (0..n)
                        .filter(|&c| c != a)
                        .map(|c| m[r][c].clone())
                        .collect()
                })
                .collect();
            let d = det_expr(&minor);
            out[a][b] = if (a + b) % 2 == 0 { d } else { -d };
        }
    }
    out
}

/// Replaces `mu` and `P` by their definitions in `rho` and `e`.
pub fn unfold_thermo(e: &Expr) -> Expr {
    let mut out = e.clone();
    for a in [Atom::Mu, Atom::Pressure] {
        if out.contains_atom(&a) {
            out = out.substitute(&a, &Ctx::unfold(&a).unwrap());
        }
    }
    out
}

struct Tables {
    /// `s adj(h)_{ab}` for `a <= b`, keyed by the stored metric component.
    adj: FxHashMap<Atom, Expr>,
    /// `s det h`, the value of `|g|^{-1}`.
    inv_det: Expr,
    /// `s adj(h)_{mn} J^m J^n`, the value of `rho^2`.
    rho2: Expr,
}

impl Tables {
    fn new(ctx: &Ctx) -> Tables {
        let n = ctx.n;
        let s = Q::int(ctx.metric_sign);
        let h: Vec<Vec<Expr>> = (0..n)
            .map(|a| (0..n).map(|b| ctx.ginv(a, b)).collect())
            .collect();
        let adj = adjugate(&h);
        let mut map = FxHashMap::default();
        for a in 0..n {
            for b in a..n {
                map.insert(
                    Atom::Jet(super::index::JetVar::base(ctx.g(a, b))),
                    adj[a][b].scale(&s),
                );
            }
        }
        let inv_det = det_expr(&h).scale(&s);
        let rho2 = if ctx.density.is_some() {
            let j = |m: usize| Expr::jet(super::index::JetVar::base(ctx.j(m)));
            Expr::sum((0..n).flat_map(|a| {
                let adj = &adj;
                let j = &j;
                (0..n).map(move |b| &(&adj[a][b] * &j(a)) * &j(b))
            }))
            .scale(&s)
        } else {
            Expr::zero()
        };
        Tables {
            adj: map,
            inv_det,
            rho2,
        }
    }
}

fn is_core(a: &Atom, ctx: &Ctx) -> bool {
    match a {
        Atom::Inv(..) | Atom::SqrtG | Atom::Rho => true,
        Atom::Jet(v) => {
            v.order() == 0
                && (ctx.metric_pair(v.comp).is_some() || ctx.density_index(v.comp).is_some())
        }
        _ => false,
    }
}

/// Memoized integer powers of a fixed expression.
struct Powers<'a> {
    base: &'a Expr,
    cache: Vec<Expr>,
}

impl<'a> Powers<'a> {
    fn new(base: &'a Expr) -> Powers<'a> {
        Powers {
            base,
            cache: vec![Expr::int(1)],
        }
    }

    fn get(&mut self, k: usize) -> &Expr {
        while self.cache.len() <= k {
            let next = self.cache.last().unwrap() * self.base;
            self.cache.push(next);
        }
        &self.cache[k]
    }
}

fn normalize_group(terms: &[(Mono, Q)], t: &Tables) -> Expr {
    // Clear negative powers of polynomial generators.
    let mut mins: FxHashMap<Atom, i32> = FxHashMap::default();
    for (m, _) in terms {
        for &(a, k) in m.factors() {
            if k < 0 && !matches!(a, Atom::SqrtG | Atom::Rho) {
                let e = mins.entry(a).or_insert(0);
                *e = (*e).min(k);
            }
        }
    }
    let clear = Mono::from_factors(mins.iter().map(|(a, k)| (*a, -k)));

    // Rewrite the order-zero metric through the inverse metric.
    let sqrtg2 = Mono::atom(Atom::SqrtG, 2);
    let mut b = ExprBuilder::new();
    for (m, c) in terms {
        let m = m.mul(&clear);
        let mut acc = Expr::mono(Mono::one(), c.clone());
        let mut rest = Vec::new();
        for &(a, k) in m.factors() {
            if let Some(adj) = t.adj.get(&a) {
                acc = &acc * &adj.pow(k as u32).mul_mono(&sqrtg2.pow(k), &Q::one());
            } else {
                rest.push((a, k));
            }
        }
        b.add_scaled(&acc, &Mono::from_factors(rest), &Q::one());
    }
    let e = b.finish();
    if e.is_zero() {
        return e;
    }

    // Shift so that sqrt|g| exponents are <= 0 and rho exponents >= 0.
    let smax = e
        .terms()
        .iter()
        .map(|(m, _)| m.degree_of(&Atom::SqrtG))
        .max()
        .unwrap();
    let rmin = e
        .terms()
        .iter()
        .map(|(m, _)| m.degree_of(&Atom::Rho))
        .min()
        .unwrap();
    let mut det_pows = Powers::new(&t.inv_det);
    let mut rho_pows = Powers::new(&t.rho2);
    let mut out = ExprBuilder::new();
    for (m, c) in e.terms() {
        let ks = m.degree_of(&Atom::SqrtG) - smax;
        let kr = m.degree_of(&Atom::Rho) - rmin;
        let (qs, rs) = ((-ks) / 2, (-ks) % 2);
        let (qr, rr) = (kr / 2, kr % 2);
        let base = m
            .without(&Atom::SqrtG)
            .without(&Atom::Rho)
            .mul_atom(Atom::SqrtG, -rs)
            .mul_atom(Atom::Rho, rr);
        let f = det_pows.get(qs as usize) * rho_pows.get(qr as usize);
        out.add_scaled(&f, &base, c);
    }
    out.finish()
}

/// Normal form of `e` modulo the relations between metric, inverse metric,
/// `sqrt|g|` and `rho`. Zero iff `e` vanishes identically.
pub fn normal_form(e: &Expr, ctx: &Ctx) -> Expr {
    let e = unfold_thermo(e);
    if ctx.metric.is_none() {
        return e;
    }
    let tables = Tables::new(ctx);
    let mut groups: FxHashMap<Mono, Vec<(Mono, Q)>> = FxHashMap::default();
    for (m, c) in e.terms() {
        let (core, rest): (Vec<_>, Vec<_>) = m.factors().iter().partition(|(a, _)| is_core(a, ctx));
        groups
            .entry(Mono::from_factors(rest))
            .or_default()
            .push((Mono::from_factors(core), c.clone()));
    }
    let mut keys: Vec<_> = groups.into_iter().collect();
    keys.sort_by(|a, b| a.0.cmp(&b.0));
    let parts: Vec<Expr> = keys
        .par_iter()
        .map(|(rest, terms)| normalize_group(terms, &tables).mul_mono(rest, &Q::one()))
        .collect();
    let mut b = ExprBuilder::new();
    for p in &parts {
        b.add_expr(p);
    }
    b.finish()
}

/// `a` and `b` agree modulo the derived-atom relations.
pub fn equivalent(a: &Expr, b: &Expr, ctx: &Ctx) -> bool {
    normal_form(&(a - b), ctx).is_zero()
}
