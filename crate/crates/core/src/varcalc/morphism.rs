//! Variational morphisms as coefficient tables over jets of an auxiliary bundle.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::coeff::Q;
use crate::error::{JetError, Result};
use crate::symexpr::{
    total_derivative, total_derivative_multi, Atom, BaseSet, Bundle, Comp, Ctx, Expr, ExprBuilder,
    JetVar, Mono, MultiIndex,
};

/// `(component, multi-index, suppressed base indices)`.
pub type Key = (u16, MultiIndex, BaseSet);

/// Linear functional `<M | j V>` on the jets of sections of `target`, valued
/// in base forms of codegree `codegree`. The component with suppressed index
/// set `T` reads `sum_{A, alpha} coeffs[(A, alpha, T)] V^A_alpha`.
#[derive(Clone, PartialEq, Debug)]
pub struct VarMorphism {
    pub codegree: usize,
    pub target: Bundle,
    pub coeffs: BTreeMap<Key, Expr>,
}

/// Splits a linear expression in the jets of `bundle` into its coefficients.
pub fn linear_coeffs(e: &Expr, bundle: Bundle) -> Result<BTreeMap<(u16, MultiIndex), Expr>> {
    let mut builders: BTreeMap<(u16, MultiIndex), ExprBuilder> = BTreeMap::new();
    for (m, c) in e.terms() {
        let mut hit: Option<(JetVar, i32)> = None;
        for (a, k) in m.factors() {
            if let Atom::Jet(v) = a {
                if v.comp.bundle == bundle {
                    if hit.is_some() {
                        return Err(JetError::NotLinear(format!("{bundle:?} jets")));
                    }
                    hit = Some((*v, *k));
                }
            }
        }
        match hit {
            Some((v, 1)) => {
                builders
                    .entry((v.comp.index, v.idx))
                    .or_default()
                    .add_term(m.without(&Atom::Jet(v)), c.clone());
            }
            _ => return Err(JetError::NotLinear(format!("{bundle:?} jets"))),
        }
    }
    Ok(builders
        .into_iter()
        .map(|(k, b)| (k, b.finish()))
        .filter(|(_, e)| !e.is_zero())
        .collect())
}

/// Formal jet `V^A_alpha` of the auxiliary bundle.
pub fn aux_jet(bundle: Bundle, comp: u16, idx: MultiIndex) -> Expr {
    Expr::jet(JetVar::new(
        Comp {
            bundle,
            index: comp,
        },
        idx,
    ))
}

impl VarMorphism {
    pub fn zero(codegree: usize, target: Bundle) -> VarMorphism {
        VarMorphism {
            codegree,
            target,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn add_term(&mut self, key: Key, e: &Expr) {
        if e.is_zero() {
            return;
        }
        let slot = self.coeffs.entry(key).or_default();
        *slot = &*slot + e;
        if slot.is_zero() {
            self.coeffs.remove(&key);
        }
    }

    pub fn get(&self, key: &Key) -> Expr {
        self.coeffs.get(key).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Highest multi-index order present.
    pub fn rank(&self) -> usize {
        self.coeffs.keys().map(|k| k.1.order()).max().unwrap_or(0)
    }

    pub fn add(&self, o: &VarMorphism) -> VarMorphism {
        assert_eq!((self.codegree, self.target), (o.codegree, o.target));
        let mut out = self.clone();
        for (k, v) in &o.coeffs {
            out.add_term(*k, v);
        }
        out
    }

    pub fn scale(&self, c: &Q) -> VarMorphism {
        let mut out = VarMorphism::zero(self.codegree, self.target);
        for (k, v) in &self.coeffs {
            out.add_term(*k, &v.scale(c));
        }
        out
    }

    pub fn sub(&self, o: &VarMorphism) -> VarMorphism {
        self.add(&o.scale(&Q::int(-1)))
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr + Sync) -> VarMorphism {
        let entries: Vec<(Key, Expr)> = self.coeffs.par_iter().map(|(k, v)| (*k, f(v))).collect();
        let mut out = VarMorphism::zero(self.codegree, self.target);
        for (k, v) in entries {
            out.add_term(k, &v);
        }
        out
    }

    pub fn try_map(&self, f: impl Fn(&Expr) -> Result<Expr> + Sync) -> Result<VarMorphism> {
        let entries: Vec<Result<(Key, Expr)>> = self
            .coeffs
            .par_iter()
            .map(|(k, v)| Ok((*k, f(v)?)))
            .collect();
        let mut out = VarMorphism::zero(self.codegree, self.target);
        for e in entries {
            let (k, v) = e?;
            out.add_term(k, &v);
        }
        Ok(out)
    }

    /// Components of `<M | j V>` keyed by suppressed index set.
    pub fn pair(&self) -> BTreeMap<BaseSet, Expr> {
        let mut b: BTreeMap<BaseSet, ExprBuilder> = BTreeMap::new();
        for ((a, idx, t), c) in &self.coeffs {
            let v = Mono::atom(
                Atom::Jet(JetVar::new(
                    Comp {
                        bundle: self.target,
                        index: *a,
                    },
                    *idx,
                )),
                1,
            );
            b.entry(*t).or_default().add_scaled(c, &v, &Q::one());
        }
        b.into_iter()
            .map(|(k, v)| (k, v.finish()))
            .filter(|(_, e)| !e.is_zero())
            .collect()
    }

    /// Inverse of [`pair`](Self::pair).
    pub fn from_pairing(
        parts: &BTreeMap<BaseSet, Expr>,
        codegree: usize,
        target: Bundle,
    ) -> Result<VarMorphism> {
        let mut out = VarMorphism::zero(codegree, target);
        for (t, e) in parts {
            if t.len() != codegree {
                return Err(JetError::ShapeMismatch(format!(
                    "component of size {} in codegree {codegree}",
                    t.len()
                )));
            }
            for ((a, idx), c) in linear_coeffs(e, target)? {
                out.add_term((a, idx, *t), &c);
            }
        }
        Ok(out)
    }

    /// Component `T` of the pairing.
    pub fn component(&self, t: BaseSet) -> Expr {
        self.pair().remove(&t).unwrap_or_default()
    }

    /// Coefficients of the codegree-1 morphism as `n` expressions `M^mu`.
    pub fn components1(&self, n: usize) -> Vec<Expr> {
        let p = self.pair();
        (0..n)
            .map(|m| p.get(&BaseSet::single(m)).cloned().unwrap_or_default())
            .collect()
    }

    /// Replaces auxiliary jets by the entries of `table`.
    pub fn contract(&self, table: &JetTable) -> Result<VarMorphism> {
        if table.source != self.target {
            return Err(JetError::ShapeMismatch(format!(
                "morphism on {:?} contracted with table on {:?}",
                self.target, table.source
            )));
        }
        let mut parts: BTreeMap<BaseSet, ExprBuilder> = BTreeMap::new();
        for ((a, idx, t), c) in &self.coeffs {
            let v = table.entries.get(&(*a, *idx)).ok_or_else(|| {
                JetError::ShapeMismatch(format!("table lacks component {a} at {idx:?}"))
            })?;
            if v.is_zero() {
                continue;
            }
            let prod = c * v;
            parts.entry(*t).or_default().add_expr(&prod);
        }
        let parts: BTreeMap<BaseSet, Expr> =
            parts.into_iter().map(|(k, v)| (k, v.finish())).collect();
        VarMorphism::from_pairing(&parts, self.codegree, table.target)
    }

    /// Pairing with a concrete section: auxiliary jets replaced by the
    /// formal derivatives of `section[A]`.
    pub fn evaluate_on(&self, section: &[Expr], ctx: &Ctx) -> Result<BTreeMap<BaseSet, Expr>> {
        let mut cache: BTreeMap<(u16, MultiIndex), Expr> = BTreeMap::new();
        let mut parts: BTreeMap<BaseSet, ExprBuilder> = BTreeMap::new();
        for ((a, idx, t), c) in &self.coeffs {
            if !cache.contains_key(&(*a, *idx)) {
                let v = total_derivative_multi(&section[*a as usize], idx, ctx)?;
                cache.insert((*a, *idx), v);
            }
            let prod = c * &cache[&(*a, *idx)];
            parts.entry(*t).or_default().add_expr(&prod);
        }
        Ok(parts.into_iter().map(|(k, v)| (k, v.finish())).collect())
    }
}

/// `(Div U)^T = sum_{mu not in T} sign(T, mu) d_mu U^{T mu}` on pairings.
pub fn div_components(
    parts: &BTreeMap<BaseSet, Expr>,
    n: usize,
    ctx: &Ctx,
) -> Result<BTreeMap<BaseSet, Expr>> {
    let mut out: BTreeMap<BaseSet, ExprBuilder> = BTreeMap::new();
    for (s, e) in parts {
        for mu in s.indices() {
            let t = BaseSet(s.0 & !(1 << mu));
            let (_, sign) = t.push(mu).unwrap();
            let d = total_derivative(e, mu, ctx)?;
            out.entry(t)
                .or_default()
                .add_scaled(&d, &Mono::one(), &Q::int(sign));
        }
    }
    let _ = n;
    Ok(out
        .into_iter()
        .map(|(k, v)| (k, v.finish()))
        .filter(|(_, e)| !e.is_zero())
        .collect())
}

/// Divergence of a morphism of codegree `p >= 1`, a morphism of codegree `p - 1`.
pub fn divergence(m: &VarMorphism, ctx: &Ctx) -> Result<VarMorphism> {
    if m.codegree == 0 {
        return Err(JetError::ShapeMismatch(
            "divergence of a codegree-0 morphism".into(),
        ));
    }
    let parts = div_components(&m.pair(), ctx.n, ctx)?;
    VarMorphism::from_pairing(&parts, m.codegree - 1, m.target)
}

/// Formal jets `d_alpha(section^A)` of a linear operator from `target` jets
/// to `source` components, the prolongation used in contractions.
#[derive(Clone, PartialEq, Debug)]
pub struct JetTable {
    pub source: Bundle,
    pub target: Bundle,
    pub entries: BTreeMap<(u16, MultiIndex), Expr>,
}

impl JetTable {
    /// `entries[(A, alpha)] = d_alpha base[A]` for `|alpha| <= k`.
    pub fn prolong(
        base: &[Expr],
        source: Bundle,
        target: Bundle,
        k: usize,
        ctx: &Ctx,
    ) -> Result<JetTable> {
        let idxs = MultiIndex::all_up_to(ctx.n, k);
        let jobs: Vec<(usize, MultiIndex)> = (0..base.len())
            .flat_map(|a| idxs.iter().map(move |i| (a, *i)))
            .collect();
        // Reuse lower-order derivatives: d_alpha = d_mu d_{alpha - mu}.
        let mut entries: BTreeMap<(u16, MultiIndex), Expr> = BTreeMap::new();
        for ord in 0..=k {
            let layer: Vec<Result<((u16, MultiIndex), Expr)>> = jobs
                .par_iter()
                .filter(|(_, i)| i.order() == ord)
                .map(|(a, i)| {
                    let e = if ord == 0 {
                        base[*a].clone()
                    } else {
                        let mu = i.dirs()[0];
                        let prev = &entries[&(*a as u16, i.minus(mu).unwrap())];
                        total_derivative(prev, mu, ctx)?
                    };
                    Ok(((*a as u16, *i), e))
                })
                .collect();
            for r in layer {
                let (key, e) = r?;
                entries.insert(key, e);
            }
        }
        Ok(JetTable {
            source,
            target,
            entries,
        })
    }

    /// Identity table `V^A_alpha -> W^A_alpha`.
    pub fn identity(ncomp: usize, source: Bundle, target: Bundle, k: usize, n: usize) -> JetTable {
        let mut entries = BTreeMap::new();
        for a in 0..ncomp {
            for i in MultiIndex::all_up_to(n, k) {
                entries.insert((a as u16, i), aux_jet(target, a as u16, i));
            }
        }
        JetTable {
            source,
            target,
            entries,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_coefficients_round_trip() {
        let v = |i: usize| aux_jet(Bundle::Var, 0, MultiIndex::unit(i));
        let y = Expr::jet(JetVar::base(Comp::field(0)));
        let e = &(&y * &v(0)) + &v(1).scale(&Q::int(3));
        let c = linear_coeffs(&e, Bundle::Var).unwrap();
        assert_eq!(c[&(0, MultiIndex::unit(0))], y);
        assert_eq!(c[&(0, MultiIndex::unit(1))], Expr::int(3));
        assert!(matches!(
            linear_coeffs(&(&v(0) * &v(1)), Bundle::Var),
            Err(JetError::NotLinear(_))
        ));
    }

    #[test]
    fn contraction_with_identity_is_identity() {
        let ctx = Ctx::new(2);
        let mut m = VarMorphism::zero(0, Bundle::Var);
        m.add_term(
            (0, MultiIndex::unit(1), BaseSet::EMPTY),
            &Expr::jet(JetVar::base(Comp::field(0))),
        );
        let t = JetTable::identity(1, Bundle::Var, Bundle::Var, 1, ctx.n);
        assert_eq!(m.contract(&t).unwrap(), m);
    }
}
