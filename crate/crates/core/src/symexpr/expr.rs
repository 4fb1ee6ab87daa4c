//! Canonical expressions: sums of rational multiples of Laurent monomials.

use std::collections::BTreeSet;
use std::ops::{Add, Mul, Neg, Sub};

use rustc_hash::FxHashMap;
use smallvec::SmallVec;

use super::atom::Atom;
use super::index::{Bundle, JetVar};
use crate::coeff::Q;

/// Product of atoms with nonzero integer exponents, sorted by atom.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct Mono(SmallVec<[(Atom, i32); 4]>);

impl Mono {
    pub fn one() -> Mono {
        Mono(SmallVec::new())
    }

    pub fn atom(a: Atom, k: i32) -> Mono {
        if k == 0 {
            return Mono::one();
        }
        let mut v = SmallVec::new();
        v.push((a, k));
        Mono(v)
    }

    /// Builds a monomial from unsorted factors, merging repeats.
    pub fn from_factors(factors: impl IntoIterator<Item = (Atom, i32)>) -> Mono {
        let mut v: SmallVec<[(Atom, i32); 4]> = factors.into_iter().collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out: SmallVec<[(Atom, i32); 4]> = SmallVec::with_capacity(v.len());
        for (a, k) in v {
            match out.last_mut() {
                Some(last) if last.0 == a => last.1 += k,
                _ => out.push((a, k)),
            }
        }
        out.retain(|f| f.1 != 0);
        Mono(out)
    }

    pub fn factors(&self) -> &[(Atom, i32)] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree_of(&self, a: &Atom) -> i32 {
        match self.0.binary_search_by(|f| f.0.cmp(a)) {
            Ok(i) => self.0[i].1,
            Err(_) => 0,
        }
    }

    pub fn mul(&self, o: &Mono) -> Mono {
        if self.0.is_empty() {
            return o.clone();
        }
        if o.0.is_empty() {
            return self.clone();
        }
        let mut out: SmallVec<[(Atom, i32); 4]> = SmallVec::with_capacity(self.0.len() + o.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < o.0.len() {
            let (a, b) = (&self.0[i], &o.0[j]);
            match a.0.cmp(&b.0) {
                std::cmp::Ordering::Less => {
                    out.push(*a);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(*b);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    if a.1 + b.1 != 0 {
                        out.push((a.0, a.1 + b.1));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&o.0[j..]);
        Mono(out)
    }

    /// Multiplies by `a^k`.
    pub fn mul_atom(&self, a: Atom, k: i32) -> Mono {
        self.mul(&Mono::atom(a, k))
    }

    pub fn pow(&self, k: i32) -> Mono {
        if k == 0 {
            return Mono::one();
        }
        Mono(self.0.iter().map(|&(a, e)| (a, e * k)).collect())
    }

    /// The monomial with factor `a` removed entirely.
    pub fn without(&self, a: &Atom) -> Mono {
        Mono(self.0.iter().filter(|f| f.0 != *a).copied().collect())
    }

    /// Total degree in jets of the given bundle.
    pub fn bundle_degree(&self, b: Bundle) -> i32 {
        self.0
            .iter()
            .filter(|f| matches!(f.0, Atom::Jet(v) if v.comp.bundle == b))
            .map(|f| f.1)
            .sum()
    }
}

/// Canonical expression. Terms are sorted by monomial, merged, and never zero,
/// so structural equality is canonical equality.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Expr {
    terms: Vec<(Mono, Q)>,
}

/// Hash-map accumulator for building large sums.
#[derive(Default)]
pub struct ExprBuilder {
    map: FxHashMap<Mono, Q>,
}

impl ExprBuilder {
    pub fn new() -> ExprBuilder {
        ExprBuilder::default()
    }

    pub fn add_term(&mut self, m: Mono, c: Q) {
        if c.is_zero() {
            return;
        }
        match self.map.get_mut(&m) {
            Some(v) => *v = v.add(&c),
            None => {
                self.map.insert(m, c);
            }
        }
    }

    /// Adds `c * m * e`.
    pub fn add_scaled(&mut self, e: &Expr, m: &Mono, c: &Q) {
        for (tm, tc) in &e.terms {
            self.add_term(tm.mul(m), tc.mul(c));
        }
    }

    pub fn add_expr(&mut self, e: &Expr) {
        for (tm, tc) in &e.terms {
            self.add_term(tm.clone(), tc.clone());
        }
    }

    pub fn finish(self) -> Expr {
        let mut terms: Vec<(Mono, Q)> =
            self.map.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        Expr { terms }
    }
}

impl Expr {
    pub fn zero() -> Expr {
        Expr { terms: Vec::new() }
    }

    pub fn constant(c: Q) -> Expr {
        if c.is_zero() {
            Expr::zero()
        } else {
            Expr {
                terms: vec![(Mono::one(), c)],
            }
        }
    }

    pub fn int(n: i64) -> Expr {
        Expr::constant(Q::int(n))
    }

    pub fn frac(a: i64, b: i64) -> Expr {
        Expr::constant(Q::frac(a, b))
    }

    pub fn atom(a: Atom) -> Expr {
        Expr {
            terms: vec![(Mono::atom(a, 1), Q::one())],
        }
    }

    pub fn jet(v: JetVar) -> Expr {
        Expr::atom(Atom::Jet(v))
    }

    pub fn mono(m: Mono, c: Q) -> Expr {
        if c.is_zero() {
            Expr::zero()
        } else {
            Expr {
                terms: vec![(m, c)],
            }
        }
    }

    /// Canonicalizes an arbitrary list of terms.
    pub fn from_terms(terms: impl IntoIterator<Item = (Mono, Q)>) -> Expr {
        let mut v: Vec<(Mono, Q)> = terms.into_iter().filter(|t| !t.1.is_zero()).collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out: Vec<(Mono, Q)> = Vec::with_capacity(v.len());
        for (m, c) in v {
            match out.last_mut() {
                Some(last) if last.0 == m => last.1 = last.1.add(&c),
                _ => out.push((m, c)),
            }
        }
        out.retain(|t| !t.1.is_zero());
        Expr { terms: out }
    }

    pub fn terms(&self) -> &[(Mono, Q)] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<(Mono, Q)> {
        self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The value if the expression is a rational constant.
    pub fn as_constant(&self) -> Option<Q> {
        match self.terms.as_slice() {
            [] => Some(Q::zero()),
            [(m, c)] if m.is_one() => Some(c.clone()),
            _ => None,
        }
    }

    /// The single term if the expression is a monomial.
    pub fn as_monomial(&self) -> Option<(&Mono, &Q)> {
        match self.terms.as_slice() {
            [(m, c)] => Some((m, c)),
            _ => None,
        }
    }

    pub fn scale(&self, c: &Q) -> Expr {
        if c.is_zero() {
            return Expr::zero();
        }
        Expr {
            terms: self
                .terms
                .iter()
                .map(|(m, k)| (m.clone(), k.mul(c)))
                .collect(),
        }
    }

    /// Multiplies by `c * m`; stays sorted only after re-canonicalizing.
    pub fn mul_mono(&self, m: &Mono, c: &Q) -> Expr {
        if c.is_zero() {
            return Expr::zero();
        }
        Expr::from_terms(self.terms.iter().map(|(tm, k)| (tm.mul(m), k.mul(c))))
    }

    pub fn mul_atom(&self, a: Atom, k: i32) -> Expr {
        self.mul_mono(&Mono::atom(a, k), &Q::one())
    }

    pub fn add_ref(&self, o: &Expr) -> Expr {
        if self.terms.is_empty() {
            return o.clone();
        }
        if o.terms.is_empty() {
            return self.clone();
        }
        let mut out = Vec::with_capacity(self.terms.len() + o.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() && j < o.terms.len() {
            let (a, b) = (&self.terms[i], &o.terms[j]);
            match a.0.cmp(&b.0) {
                std::cmp::Ordering::Less => {
                    out.push(a.clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b.clone());
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let c = a.1.add(&b.1);
                    if !c.is_zero() {
                        out.push((a.0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.terms[i..]);
        out.extend_from_slice(&o.terms[j..]);
        Expr { terms: out }
    }

    pub fn neg_ref(&self) -> Expr {
        Expr {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c.neg()))
                .collect(),
        }
    }

    pub fn sub_ref(&self, o: &Expr) -> Expr {
        self.add_ref(&o.neg_ref())
    }

    pub fn mul_ref(&self, o: &Expr) -> Expr {
        if self.terms.is_empty() || o.terms.is_empty() {
            return Expr::zero();
        }
        if let Some((m, c)) = o.as_monomial() {
            return self.mul_mono(m, c);
        }
        if let Some((m, c)) = self.as_monomial() {
            return o.mul_mono(m, c);
        }
        let mut b = ExprBuilder::new();
        for (m, c) in &self.terms {
            b.add_scaled(o, m, c);
        }
        b.finish()
    }

    /// Nonnegative integer power.
    pub fn pow(&self, k: u32) -> Expr {
        let mut acc = Expr::int(1);
        for _ in 0..k {
            acc = acc.mul_ref(self);
        }
        acc
    }

    /// Integer power; negative exponents need a monomial base.
    pub fn try_pow(&self, k: i32) -> Option<Expr> {
        if k >= 0 {
            return Some(self.pow(k as u32));
        }
        let (m, c) = self.as_monomial()?;
        Some(Expr::mono(m.pow(k), c.pow(k)))
    }

    /// Sum of a sequence of expressions.
    pub fn sum<I: IntoIterator<Item = Expr>>(it: I) -> Expr {
        let mut b = ExprBuilder::new();
        for e in it {
            b.add_expr(&e);
        }
        b.finish()
    }

    /// All atoms occurring in the expression.
    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut s = BTreeSet::new();
        for (m, _) in &self.terms {
            for (a, _) in m.factors() {
                s.insert(*a);
            }
        }
        s
    }

    pub fn jet_vars(&self) -> BTreeSet<JetVar> {
        let mut s = BTreeSet::new();
        for (m, _) in &self.terms {
            for (a, _) in m.factors() {
                if let Atom::Jet(v) = a {
                    s.insert(*v);
                }
            }
        }
        s
    }

    pub fn contains_atom(&self, a: &Atom) -> bool {
        self.terms.iter().any(|(m, _)| m.degree_of(a) != 0)
    }

    /// Highest derivative order among jets of the given bundle.
    pub fn max_order(&self, b: Bundle) -> Option<usize> {
        self.jet_vars()
            .iter()
            .filter(|v| v.comp.bundle == b)
            .map(|v| v.order())
            .max()
    }

    /// Applies `f` to every term and sums the results.
    pub fn map_terms(&self, mut f: impl FnMut(&Mono, &Q, &mut ExprBuilder)) -> Expr {
        let mut b = ExprBuilder::new();
        for (m, c) in &self.terms {
            f(m, c, &mut b);
        }
        b.finish()
    }

    /// Keeps only terms satisfying `p`.
    pub fn filter(&self, p: impl Fn(&Mono) -> bool) -> Expr {
        Expr {
            terms: self.terms.iter().filter(|t| p(&t.0)).cloned().collect(),
        }
    }

    /// Replaces every occurrence of atom `a` by the expression `by`.
    /// Negative powers of `a` are only allowed when `by` is a monomial.
    pub fn substitute(&self, a: &Atom, by: &Expr) -> Expr {
        let mut cache: FxHashMap<i32, Expr> = FxHashMap::default();
        self.map_terms(|m, c, b| {
            let k = m.degree_of(a);
            if k == 0 {
                b.add_term(m.clone(), c.clone());
                return;
            }
            let p = cache.entry(k).or_insert_with(|| {
                by.try_pow(k)
                    .expect("negative power of a non-monomial substitution")
            });
            b.add_scaled(p, &m.without(a), c);
        })
    }

    /// Simultaneous substitution of every atom for which `f` returns a value.
    /// Substituted atoms must occur with nonnegative exponents unless their
    /// replacement is a monomial.
    pub fn substitute_with(&self, f: impl Fn(&Atom) -> Option<Expr>) -> Expr {
        let mut cache: FxHashMap<(Atom, i32), Option<Expr>> = FxHashMap::default();
        self.map_terms(|m, c, b| {
            let mut kept: SmallVec<[(Atom, i32); 4]> = SmallVec::new();
            let mut acc: Option<Expr> = None;
            for &(a, k) in m.factors() {
                let p = cache.entry((a, k)).or_insert_with(|| {
                    f(&a).map(|by| {
                        by.try_pow(k)
                            .expect("negative power of a non-monomial substitution")
                    })
                });
                match p {
                    None => kept.push((a, k)),
                    Some(p) => {
                        acc = Some(match acc.take() {
                            None => p.clone(),
                            Some(x) => x.mul_ref(p),
                        })
                    }
                }
            }
            let rest = Mono(kept);
            match acc {
                None => b.add_term(rest, c.clone()),
                Some(x) => b.add_scaled(&x, &rest, c),
            }
        })
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Expr {
        Expr::int(n)
    }
}

impl From<Atom> for Expr {
    fn from(a: Atom) -> Expr {
        Expr::atom(a)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $f:ident) => {
        impl $tr<&Expr> for &Expr {
            type Output = Expr;
            fn $m(self, o: &Expr) -> Expr {
                self.$f(o)
            }
        }
        impl $tr<Expr> for Expr {
            type Output = Expr;
            fn $m(self, o: Expr) -> Expr {
                self.$f(&o)
            }
        }
        impl $tr<&Expr> for Expr {
            type Output = Expr;
            fn $m(self, o: &Expr) -> Expr {
                self.$f(o)
            }
        }
        impl $tr<Expr> for &Expr {
            type Output = Expr;
            fn $m(self, o: Expr) -> Expr {
                self.$f(&o)
            }
        }
    };
}

binop!(Add, add, add_ref);
binop!(Sub, sub, sub_ref);
binop!(Mul, mul, mul_ref);

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        self.neg_ref()
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        self.neg_ref()
    }
}

/// Returns the canonical form of `e`. Expressions are canonical by
/// construction, so this re-sorts and re-merges the terms and is idempotent.
pub fn canonicalize(e: &Expr) -> Expr {
    Expr::from_terms(e.terms.iter().cloned())
}
