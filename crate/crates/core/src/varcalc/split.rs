//! Integration by parts: splitting morphisms into a volume part of rank zero
//! (or reduced rank in higher codegree) plus the divergence of a boundary part.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::coeff::Q;
use crate::error::Result;
use crate::symexpr::{total_derivative, BaseSet, Ctx, Expr, MultiIndex};

use super::morphism::{Key, VarMorphism};

/// Which derivative direction is peeled off first.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplitOrder {
    /// Smallest direction of the multi-index first.
    Lexicographic,
    /// Uniformly random direction, seeded.
    Random(u64),
}

/// `M = Vol + Div B`.
#[derive(Clone, Debug, PartialEq)]
pub struct Split {
    pub volume: VarMorphism,
    pub boundary: VarMorphism,
}

fn add_into(map: &mut BTreeMap<(MultiIndex, BaseSet), Expr>, k: (MultiIndex, BaseSet), e: &Expr) {
    if e.is_zero() {
        return;
    }
    let slot = map.entry(k).or_default();
    *slot = &*slot + e;
    if slot.is_zero() {
        map.remove(&k);
    }
}

type Work = BTreeMap<(MultiIndex, BaseSet), Expr>;

fn by_component(m: &VarMorphism) -> BTreeMap<u16, Work> {
    let mut out: BTreeMap<u16, Work> = BTreeMap::new();
    for ((a, idx, t), c) in &m.coeffs {
        out.entry(*a).or_default().insert((*idx, *t), c.clone());
    }
    out
}

fn assemble(codegree: usize, m: &VarMorphism, parts: Vec<(u16, Work)>) -> VarMorphism {
    let mut out = VarMorphism::zero(codegree, m.target);
    for (a, w) in parts {
        for ((idx, t), c) in w {
            let key: Key = (a, idx, t);
            out.add_term(key, &c);
        }
    }
    out
}

/// Splits a codegree-0 morphism. The volume part has rank 0.
pub fn split(m: &VarMorphism, order: SplitOrder, ctx: &Ctx) -> Result<Split> {
    assert_eq!(m.codegree, 0, "split expects a codegree-0 morphism");
    let comps: Vec<(u16, Work)> = by_component(m).into_iter().collect();
    let done: Vec<Result<(u16, Work, Work)>> = comps
        .into_par_iter()
        .map(|(a, mut work)| {
            let mut rng = match order {
                SplitOrder::Random(s) => Some(ChaCha8Rng::seed_from_u64(s ^ ((a as u64) << 32))),
                SplitOrder::Lexicographic => None,
            };
            let mut bnd: Work = BTreeMap::new();
            loop {
                let top = work.keys().map(|(i, _)| i.order()).max().unwrap_or(0);
                if top == 0 {
                    break;
                }
                let layer: Vec<(MultiIndex, Expr)> = work
                    .iter()
                    .filter(|((i, _), _)| i.order() == top)
                    .map(|((i, _), c)| (*i, c.clone()))
                    .collect();
                for (alpha, c) in layer {
                    work.remove(&(alpha, BaseSet::EMPTY));
                    let dirs: Vec<usize> = (0..ctx.n).filter(|&m| alpha.count(m) > 0).collect();
                    let mu = match rng.as_mut() {
                        Some(r) => dirs[r.random_range(0..dirs.len())],
                        None => dirs[0],
                    };
                    let beta = alpha.minus(mu).unwrap();
                    // c V_alpha = d_mu(c V_beta) - (d_mu c) V_beta
                    add_into(&mut bnd, (beta, BaseSet::single(mu)), &c);
                    let dc = total_derivative(&c, mu, ctx)?;
                    add_into(&mut work, (beta, BaseSet::EMPTY), &-&dc);
                }
            }
            Ok((a, work, bnd))
        })
        .collect();
    let mut vol = Vec::new();
    let mut bnd = Vec::new();
    for r in done {
        let (a, w, b) = r?;
        vol.push((a, w));
        bnd.push((a, b));
    }
    Ok(Split {
        volume: assemble(0, m, vol),
        boundary: assemble(1, m, bnd),
    })
}

/// Reduces a morphism of codegree `p >= 1`: a derivative direction `nu` is
/// moved into the boundary component `T nu` only when `nu > max(T)`, taking
/// the largest direction first. Terminates with a volume part in which no
/// such move is possible.
pub fn reduce_codegree(m: &VarMorphism, ctx: &Ctx) -> Result<Split> {
    let p = m.codegree;
    assert!(p >= 1, "reduce_codegree expects codegree >= 1");
    let movable = |idx: &MultiIndex, t: &BaseSet| -> Option<usize> {
        let nu = (0..ctx.n).rev().find(|&d| idx.count(d) > 0)?;
        match t.max_index() {
            Some(mx) if nu <= mx => None,
            _ => Some(nu),
        }
    };
    let comps: Vec<(u16, Work)> = by_component(m).into_iter().collect();
    let done: Vec<Result<(u16, Work, Work)>> = comps
        .into_par_iter()
        .map(|(a, mut work)| {
            let mut bnd: Work = BTreeMap::new();
            loop {
                let cand: Vec<(MultiIndex, BaseSet)> = work
                    .keys()
                    .filter(|(i, t)| movable(i, t).is_some())
                    .copied()
                    .collect();
                let Some(top) = cand.iter().map(|(i, _)| i.order()).max() else {
                    break;
                };
                for (alpha, t) in cand.into_iter().filter(|(i, _)| i.order() == top) {
                    let Some(c) = work.remove(&(alpha, t)) else {
                        continue;
                    };
                    let nu = movable(&alpha, &t).unwrap();
                    let beta = alpha.minus(nu).unwrap();
                    let (s, sign) = t.push(nu).unwrap();
                    // b = sign * c V_beta placed in B^S; Div b feeds every S \ sigma.
                    let b = c.scale(&Q::int(sign));
                    add_into(&mut bnd, (beta, s), &b);
                    let dc = total_derivative(&c, nu, ctx)?;
                    add_into(&mut work, (beta, t), &-&dc);
                    for tau in t.indices() {
                        let t2 = BaseSet(s.0 & !(1 << tau));
                        let (_, s2) = t2.push(tau).unwrap();
                        let db = total_derivative(&b, tau, ctx)?;
                        let k = Q::int(-s2);
                        add_into(&mut work, (beta, t2), &db.scale(&k));
                        add_into(&mut work, (beta.plus(tau), t2), &b.scale(&k));
                    }
                }
            }
            Ok((a, work, bnd))
        })
        .collect();
    let mut vol = Vec::new();
    let mut bnd = Vec::new();
    for r in done {
        let (a, w, b) = r?;
        vol.push((a, w));
        bnd.push((a, b));
    }
    Ok(Split {
        volume: assemble(p, m, vol),
        boundary: assemble(p + 1, m, bnd),
    })
}
