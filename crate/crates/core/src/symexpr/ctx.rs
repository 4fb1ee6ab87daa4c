//! Engine context: base dimension, jet ceiling, and the registered chain rules
//! of derived atoms.

use std::fmt;
use std::sync::{Arc, RwLock};

use rustc_hash::FxHashMap;

use super::atom::{Atom, FunVar};
use super::expr::{Expr, ExprBuilder, Mono};
use super::index::{Comp, JetVar, MultiIndex};
use crate::coeff::Q;
use crate::error::JetError;

/// Default jet ceiling when `JETVAR_MAX_JET_ORDER` is unset.
pub const DEFAULT_MAX_JET_ORDER: usize = 4;

/// Internal energy `e(rho)` and its derivatives, used by numeric evaluation.
pub type EnergyFn = Arc<dyn Fn(f64, usize) -> f64 + Send + Sync>;

/// The default test closure `e(rho) = rho`.
pub fn linear_energy() -> EnergyFn {
    Arc::new(|rho, k| match k {
        0 => rho,
        1 => 1.0,
        _ => 0.0,
    })
}

/// Position of `(mu, nu)` in the upper-triangle enumeration of a symmetric tensor.
pub fn sym_index(n: usize, mu: usize, nu: usize) -> usize {
    let (a, b) = if mu <= nu { (mu, nu) } else { (nu, mu) };
    a * n - a * a.saturating_sub(1) / 2 + (b - a)
}

/// Base dimension, jet ceiling, and where the metric and the density live.
pub struct Ctx {
    pub n: usize,
    pub max_order: usize,
    /// Field index of `g_{00}`; the metric occupies `n(n+1)/2` consecutive components.
    pub metric: Option<usize>,
    /// Field index of `J^0`; the density occupies `n` consecutive components.
    pub density: Option<usize>,
    /// Sign of `det g` in the sampling signature `(+,-,...,-)`.
    pub metric_sign: i64,
    pub energy: EnergyFn,
    partials: RwLock<FxHashMap<(Atom, JetVar), Expr>>,
    totals: RwLock<FxHashMap<(Atom, u8), Expr>>,
}

impl fmt::Debug for Ctx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Ctx")
            .field("n", &self.n)
            .field("max_order", &self.max_order)
            .field("metric", &self.metric)
            .field("density", &self.density)
            .finish()
    }
}

impl Ctx {
    pub fn new(n: usize) -> Ctx {
        assert!(
            (1..=super::index::MAX_DIM).contains(&n),
            "base dimension must be 1..=4"
        );
        let max_order = std::env::var("JETVAR_MAX_JET_ORDER")
            .ok()
            .and_then(|s| s.trim().parse().ok())
            .unwrap_or(DEFAULT_MAX_JET_ORDER);
        Ctx {
            n,
            max_order,
            metric: None,
            density: None,
            metric_sign: if n % 2 == 1 { 1 } else { -1 },
            energy: linear_energy(),
            partials: RwLock::new(FxHashMap::default()),
            totals: RwLock::new(FxHashMap::default()),
        }
    }

    pub fn with_metric(mut self, first: usize) -> Ctx {
        self.metric = Some(first);
        self
    }

    pub fn with_density(mut self, first: usize) -> Ctx {
        self.density = Some(first);
        self
    }

    pub fn with_max_order(mut self, k: usize) -> Ctx {
        self.max_order = k;
        self
    }

    pub fn with_energy(mut self, e: EnergyFn) -> Ctx {
        self.energy = e;
        self
    }

    /// Same configuration with another jet ceiling and empty caches.
    pub fn with_ceiling(&self, k: usize) -> Ctx {
        let mut c = Ctx::new(self.n)
            .with_max_order(k)
            .with_energy(self.energy.clone());
        c.metric = self.metric;
        c.density = self.density;
        c.metric_sign = self.metric_sign;
        c
    }

    /// Stored component of `g_{mu nu}`.
    pub fn g(&self, mu: usize, nu: usize) -> Comp {
        let base = self.metric.expect("model has no metric field");
        Comp::field(base + sym_index(self.n, mu, nu))
    }

    /// Stored component of `J^mu`.
    pub fn j(&self, mu: usize) -> Comp {
        Comp::field(self.density.expect("model has no density field") + mu)
    }

    /// `(mu, nu)` with `mu <= nu` if `c` is a metric component.
    pub fn metric_pair(&self, c: Comp) -> Option<(usize, usize)> {
        let base = self.metric?;
        if c.bundle != super::index::Bundle::Field {
            return None;
        }
        let i = (c.index as usize).checked_sub(base)?;
        let mut k = 0;
        for a in 0..self.n {
            for b in a..self.n {
                if k == i {
                    return Some((a, b));
                }
                k += 1;
            }
        }
        None
    }

    pub fn density_index(&self, c: Comp) -> Option<usize> {
        let base = self.density?;
        if c.bundle != super::index::Bundle::Field {
            return None;
        }
        let i = (c.index as usize).checked_sub(base)?;
        (i < self.n).then_some(i)
    }

    /// Metric components as order-zero jet variables.
    pub fn metric_vars(&self) -> Vec<JetVar> {
        let mut v = Vec::new();
        if self.metric.is_some() {
            for a in 0..self.n {
                for b in a..self.n {
                    v.push(JetVar::base(self.g(a, b)));
                }
            }
        }
        v
    }

    pub fn density_vars(&self) -> Vec<JetVar> {
        if self.density.is_none() {
            return Vec::new();
        }
        (0..self.n).map(|m| JetVar::base(self.j(m))).collect()
    }

    /// Jet variables `e` depends on, including those hidden in derived atoms.
    pub fn dependencies(&self, e: &Expr) -> std::collections::BTreeSet<JetVar> {
        let mut out = std::collections::BTreeSet::new();
        let (mut metric, mut density) = (false, false);
        for a in e.atoms() {
            match a {
                Atom::Jet(v) => {
                    out.insert(v);
                }
                Atom::Inv(..) | Atom::SqrtG => metric = true,
                Atom::Rho | Atom::Energy(_) | Atom::Mu | Atom::Pressure => {
                    metric = true;
                    density = true;
                }
                Atom::Fun(f) => out.extend(f.spec().deps.jet_vars()),
                Atom::X(_) | Atom::Param(_) => {}
            }
        }
        if metric {
            out.extend(self.metric_vars());
        }
        if density {
            out.extend(self.density_vars());
        }
        out
    }

    /// Expression of `g_{mu nu}` (any index order).
    pub fn g_expr(&self, mu: usize, nu: usize) -> Expr {
        Expr::jet(JetVar::base(self.g(mu, nu)))
    }

    /// Expression of the jet `g_{mu nu, idx}`.
    pub fn g_jet(&self, mu: usize, nu: usize, idx: MultiIndex) -> Expr {
        Expr::jet(JetVar::new(self.g(mu, nu), idx))
    }

    pub fn ginv(&self, mu: usize, nu: usize) -> Expr {
        Expr::atom(Atom::inv(mu, nu))
    }

    /// Order-zero jet variables a derived atom depends on.
    fn deps(&self, a: &Atom) -> Vec<JetVar> {
        match a {
            Atom::Inv(..) | Atom::SqrtG => self.metric_vars(),
            Atom::Rho | Atom::Energy(_) | Atom::Mu | Atom::Pressure => {
                let mut v = self.metric_vars();
                v.extend(self.density_vars());
                v
            }
            _ => Vec::new(),
        }
    }

    /// Definition of `mu` and `P` in terms of `rho` and `e`.
    pub fn unfold(a: &Atom) -> Option<Expr> {
        let rho = Expr::atom(Atom::Rho);
        match a {
            Atom::Mu => Some(&rho + &(&rho * &Expr::atom(Atom::Energy(0)))),
            Atom::Pressure => Some(&(&rho * &rho) * &Expr::atom(Atom::Energy(1))),
            _ => None,
        }
    }

    fn compute_partial(&self, a: &Atom, v: &JetVar) -> Expr {
        match a {
            Atom::Jet(w) => {
                if w == v {
                    Expr::int(1)
                } else {
                    Expr::zero()
                }
            }
            Atom::Fun(f) => {
                if f.spec().deps.depends_on(v) {
                    Expr::atom(Atom::Fun(f.derive(FunVar::Jet(*v))))
                } else {
                    Expr::zero()
                }
            }
            Atom::X(_) | Atom::Param(_) => Expr::zero(),
            _ if v.order() > 0 => Expr::zero(),
            Atom::Inv(a, b) => match self.metric_pair(v.comp) {
                Some((m, n)) => {
                    let (a, b) = (*a as usize, *b as usize);
                    let mut e = &self.ginv(a, m) * &self.ginv(n, b);
                    if m != n {
                        e = &e + &(&self.ginv(a, n) * &self.ginv(m, b));
                    }
                    -e
                }
                None => Expr::zero(),
            },
            Atom::SqrtG => match self.metric_pair(v.comp) {
                Some((m, n)) => {
                    let c = if m == n { Q::frac(1, 2) } else { Q::one() };
                    (&Expr::atom(Atom::SqrtG) * &self.ginv(m, n)).scale(&c)
                }
                None => Expr::zero(),
            },
            Atom::Rho => {
                let rho = Expr::atom(Atom::Rho);
                let rho_inv = rho.try_pow(-1).unwrap();
                let s_m2 = Expr::atom(Atom::SqrtG).try_pow(-2).unwrap();
                if let Some(mu) = self.density_index(v.comp) {
                    let gj = Expr::sum(
                        (0..self.n)
                            .map(|nu| &self.g_expr(mu, nu) * &Expr::jet(JetVar::base(self.j(nu)))),
                    );
                    &(&gj * &s_m2) * &rho_inv
                } else if let Some((m, n)) = self.metric_pair(v.comp) {
                    let c = if m == n { Q::frac(1, 2) } else { Q::one() };
                    let jj =
                        &Expr::jet(JetVar::base(self.j(m))) * &Expr::jet(JetVar::base(self.j(n)));
                    let first = &(&jj * &s_m2) * &rho_inv;
                    let second = &rho * &self.ginv(m, n);
                    (&first - &second).scale(&c)
                } else {
                    Expr::zero()
                }
            }
            Atom::Energy(k) => {
                let dr = self.partial_atom_cached(&Atom::Rho, v);
                &Expr::atom(Atom::Energy(k + 1)) * &dr
            }
            Atom::Mu | Atom::Pressure => {
                super::calculus::partial(&Ctx::unfold(a).unwrap(), v, self)
            }
        }
    }

    /// Cached `d atom / d v`.
    pub fn partial_atom_cached(&self, a: &Atom, v: &JetVar) -> Expr {
        if let Atom::Jet(w) = a {
            return if w == v { Expr::int(1) } else { Expr::zero() };
        }
        if matches!(a, Atom::X(_) | Atom::Param(_)) {
            return Expr::zero();
        }
        if let Some(e) = self.partials.read().unwrap().get(&(*a, *v)) {
            return e.clone();
        }
        let e = self.compute_partial(a, v);
        self.partials.write().unwrap().insert((*a, *v), e.clone());
        e
    }

    fn compute_total(&self, a: &Atom, mu: usize) -> Result<Expr, JetError> {
        Ok(match a {
            Atom::X(nu) => Expr::int((*nu as usize == mu) as i64),
            Atom::Param(_) => Expr::zero(),
            Atom::Jet(v) => {
                let w = JetVar::new(v.comp, v.idx.plus(mu));
                if w.order() > self.max_order {
                    return Err(JetError::MaxJetOrderExceeded {
                        order: w.order(),
                        max: self.max_order,
                    });
                }
                Expr::jet(w)
            }
            Atom::Fun(f) => {
                let spec = f.spec();
                let mut b = ExprBuilder::new();
                if spec.deps.x {
                    b.add_term(
                        Mono::atom(Atom::Fun(f.derive(FunVar::X(mu as u8))), 1),
                        Q::one(),
                    );
                }
                for w in spec.deps.jet_vars() {
                    let up = w.idx.plus(mu);
                    if up.order() > self.max_order {
                        return Err(JetError::MaxJetOrderExceeded {
                            order: up.order(),
                            max: self.max_order,
                        });
                    }
                    let m = Mono::atom(Atom::Fun(f.derive(FunVar::Jet(w))), 1)
                        .mul_atom(Atom::jet(w.comp, up), 1);
                    b.add_term(m, Q::one());
                }
                b.finish()
            }
            _ => {
                if self.max_order < 1 {
                    return Err(JetError::MaxJetOrderExceeded {
                        order: 1,
                        max: self.max_order,
                    });
                }
                let mut b = ExprBuilder::new();
                for w in self.deps(a) {
                    let p = self.partial_atom_cached(a, &w);
                    if !p.is_zero() {
                        b.add_scaled(
                            &p,
                            &Mono::atom(Atom::jet(w.comp, w.idx.plus(mu)), 1),
                            &Q::one(),
                        );
                    }
                }
                b.finish()
            }
        })
    }

    /// Cached `d_mu atom`.
    pub fn total_atom_cached(&self, a: &Atom, mu: usize) -> Result<Expr, JetError> {
        match a {
            Atom::Jet(_) | Atom::X(_) | Atom::Param(_) => return self.compute_total(a, mu),
            _ => {}
        }
        if let Some(e) = self.totals.read().unwrap().get(&(*a, mu as u8)) {
            return Ok(e.clone());
        }
        let e = self.compute_total(a, mu)?;
        self.totals
            .write()
            .unwrap()
            .insert((*a, mu as u8), e.clone());
        Ok(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn upper_triangle_positions() {
        let mut k = 0;
        for n in 1..=4 {
            k = 0;
            for a in 0..n {
                for b in a..n {
                    assert_eq!(sym_index(n, a, b), k);
                    assert_eq!(sym_index(n, b, a), k);
                    k += 1;
                }
            }
        }
        assert_eq!(k, 10);
    }
}
