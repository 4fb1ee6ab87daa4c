//! Generator lifts and the Lie-derivative templates of the field kinds.

use std::collections::BTreeMap;

use crate::coeff::Q;
use crate::error::Result;
use crate::modeldef::{FieldDecl, FieldKind};
use crate::symexpr::{total_derivative, Bundle, Comp, Ctx, Expr, JetVar, MultiIndex};

/// Infinitesimal generator `xi^mu d_mu + zeta d_theta` of principal
/// automorphisms, together with optional per-component lift overrides.
#[derive(Clone, PartialEq, Debug)]
pub struct GeneratorLift {
    pub name: String,
    /// Base components `xi^mu`.
    pub xi: Vec<Expr>,
    /// Gauge component; `None` for purely natural models.
    pub zeta: Option<Expr>,
    /// User-supplied lifts `Xi^a` replacing the kind template of field component `a`.
    pub overrides: BTreeMap<usize, Expr>,
}

/// Jet of the formal base component `xi^mu`.
pub fn xi_jet(mu: usize, idx: MultiIndex) -> Expr {
    Expr::jet(JetVar::new(Comp::gen(mu), idx))
}

/// Jet of the formal gauge component, stored after the `n` base components.
pub fn zeta_jet(n: usize, idx: MultiIndex) -> Expr {
    Expr::jet(JetVar::new(Comp::gen(n), idx))
}

impl GeneratorLift {
    /// Generator whose components are the free auxiliary fields `xi^mu`, `zeta`.
    pub fn formal(name: &str, n: usize, gauge: bool) -> GeneratorLift {
        GeneratorLift {
            name: name.to_string(),
            xi: (0..n).map(|m| xi_jet(m, MultiIndex::ZERO)).collect(),
            zeta: gauge.then(|| zeta_jet(n, MultiIndex::ZERO)),
            overrides: BTreeMap::new(),
        }
    }

    pub fn zero(name: &str, n: usize, gauge: bool) -> GeneratorLift {
        GeneratorLift {
            name: name.to_string(),
            xi: vec![Expr::zero(); n],
            zeta: gauge.then(Expr::zero),
            overrides: BTreeMap::new(),
        }
    }

    /// Componentwise sum; overrides are added where present on either side.
    pub fn add(&self, o: &GeneratorLift, name: &str) -> GeneratorLift {
        let zeta = match (&self.zeta, &o.zeta) {
            (None, None) => None,
            (a, b) => Some(a.clone().unwrap_or_default() + b.clone().unwrap_or_default()),
        };
        let mut overrides = self.overrides.clone();
        for (k, v) in &o.overrides {
            let e = overrides.entry(*k).or_default();
            *e = &*e + v;
        }
        GeneratorLift {
            name: name.to_string(),
            xi: self.xi.iter().zip(&o.xi).map(|(a, b)| a + b).collect(),
            zeta,
            overrides,
        }
    }

    pub fn scale(&self, c: &Q) -> GeneratorLift {
        GeneratorLift {
            name: self.name.clone(),
            xi: self.xi.iter().map(|e| e.scale(c)).collect(),
            zeta: self.zeta.as_ref().map(|e| e.scale(c)),
            overrides: self
                .overrides
                .iter()
                .map(|(k, v)| (*k, v.scale(c)))
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.xi.iter().all(Expr::is_zero)
            && self.zeta.as_ref().is_none_or(Expr::is_zero)
            && self.overrides.values().all(Expr::is_zero)
    }
}

/// Jet accessor for the components of a declared field in a given bundle.
#[derive(Clone, Copy, Debug)]
pub struct FieldRef<'a> {
    pub decl: &'a FieldDecl,
    pub bundle: Bundle,
    pub n: usize,
}

impl FieldRef<'_> {
    pub fn jet(&self, tensor: &[usize], idx: MultiIndex) -> Expr {
        let c = self
            .decl
            .offset(self.n, tensor)
            .expect("tensor index out of range");
        Expr::jet(JetVar::new(
            Comp {
                bundle: self.bundle,
                index: c as u16,
            },
            idx,
        ))
    }
}

/// Formal Lie derivative of the component of `f` with tensor indices `tensor`
/// along the vector field `xi` and gauge component `zeta`.
pub fn lie_template(
    ctx: &Ctx,
    f: FieldRef<'_>,
    tensor: &[usize],
    xi: &[Expr],
    zeta: Option<&Expr>,
) -> Result<Expr> {
    let n = f.n;
    let dxi = |r: usize, s: usize| total_derivative(&xi[r], s, ctx);
    let u = |mu: usize| MultiIndex::unit(mu);
    let mut acc = Expr::zero();
    for r in 0..n {
        acc = &acc + &(&xi[r] * &f.jet(tensor, u(r)));
    }
    match f.decl.kind {
        FieldKind::Scalar => {}
        FieldKind::Vector | FieldKind::VectorDensity => {
            let m = tensor[0];
            for v in 0..n {
                acc = &acc - &(&f.jet(&[v], MultiIndex::ZERO) * &dxi(m, v)?);
            }
            if f.decl.kind == FieldKind::VectorDensity {
                for v in 0..n {
                    acc = &acc + &(&f.jet(&[m], MultiIndex::ZERO) * &dxi(v, v)?);
                }
            }
        }
        FieldKind::Covector | FieldKind::GaugePotential => {
            let s = tensor[0];
            for r in 0..n {
                acc = &acc + &(&f.jet(&[r], MultiIndex::ZERO) * &dxi(r, s)?);
            }
            if f.decl.kind == FieldKind::GaugePotential {
                if let Some(z) = zeta {
                    acc = &acc + &total_derivative(z, s, ctx)?;
                }
            }
        }
        FieldKind::Sym2 => {
            let (a, b) = (tensor[0], tensor[1]);
            for r in 0..n {
                acc = &acc + &(&f.jet(&[r, b], MultiIndex::ZERO) * &dxi(r, a)?);
                acc = &acc + &(&f.jet(&[a, r], MultiIndex::ZERO) * &dxi(r, b)?);
            }
        }
    }
    Ok(acc)
}
