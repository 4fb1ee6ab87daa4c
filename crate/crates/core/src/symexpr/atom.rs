//! Atoms: the indivisible factors of a monomial.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use super::index::{Comp, JetVar, MultiIndex};

/// Interned name of a scalar parameter.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sym(u32);

struct SymTable {
    names: Vec<&'static str>,
    ids: HashMap<&'static str, u32>,
}

fn sym_table() -> &'static RwLock<SymTable> {
    static T: OnceLock<RwLock<SymTable>> = OnceLock::new();
    T.get_or_init(|| {
        RwLock::new(SymTable {
            names: Vec::new(),
            ids: HashMap::new(),
        })
    })
}

impl Sym {
    pub fn new(name: &str) -> Sym {
        if let Some(&id) = sym_table().read().unwrap().ids.get(name) {
            return Sym(id);
        }
        let mut t = sym_table().write().unwrap();
        if let Some(&id) = t.ids.get(name) {
            return Sym(id);
        }
        let leaked: &'static str = Box::leak(name.to_string().into_boxed_str());
        let id = t.names.len() as u32;
        t.names.push(leaked);
        t.ids.insert(leaked, id);
        Sym(id)
    }

    pub fn name(&self) -> &'static str {
        sym_table().read().unwrap().names[self.0 as usize]
    }
}

impl fmt::Debug for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Variable an abstract function can be differentiated by.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum FunVar {
    X(u8),
    Jet(JetVar),
}

/// What an abstract function depends on: the base point (optionally) and all
/// jets of the listed components up to `order`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct FunDeps {
    pub x: bool,
    pub comps: Vec<Comp>,
    pub order: u8,
    pub n: u8,
}

impl FunDeps {
    pub fn depends_on(&self, v: &JetVar) -> bool {
        v.order() <= self.order as usize && self.comps.contains(&v.comp)
    }

    /// All jet variables in the dependency set.
    pub fn jet_vars(&self) -> Vec<JetVar> {
        let idxs = MultiIndex::all_up_to(self.n as usize, self.order as usize);
        let mut out = Vec::new();
        for c in &self.comps {
            for i in &idxs {
                out.push(JetVar::new(*c, *i));
            }
        }
        out
    }
}

/// An abstract (unspecified) function together with a list of partial
/// derivatives taken of it, e.g. `dL/dy^a_mu`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct FunSpec {
    pub name: String,
    pub deps: FunDeps,
    /// Sorted list of differentiation variables.
    pub derivs: Vec<FunVar>,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FunId(u32);

struct FunTable {
    specs: Vec<Arc<FunSpec>>,
    ids: HashMap<FunSpec, u32>,
}

fn fun_table() -> &'static RwLock<FunTable> {
    static T: OnceLock<RwLock<FunTable>> = OnceLock::new();
    T.get_or_init(|| {
        RwLock::new(FunTable {
            specs: Vec::new(),
            ids: HashMap::new(),
        })
    })
}

impl FunId {
    pub fn intern(spec: FunSpec) -> FunId {
        if let Some(&id) = fun_table().read().unwrap().ids.get(&spec) {
            return FunId(id);
        }
        let mut t = fun_table().write().unwrap();
        if let Some(&id) = t.ids.get(&spec) {
            return FunId(id);
        }
        let id = t.specs.len() as u32;
        t.specs.push(Arc::new(spec.clone()));
        t.ids.insert(spec, id);
        FunId(id)
    }

    /// A fresh underived abstract function.
    pub fn new(name: &str, deps: FunDeps) -> FunId {
        FunId::intern(FunSpec {
            name: name.to_string(),
            deps,
            derivs: Vec::new(),
        })
    }

    pub fn spec(&self) -> Arc<FunSpec> {
        fun_table().read().unwrap().specs[self.0 as usize].clone()
    }

    /// The same function differentiated once more by `v`.
    pub fn derive(&self, v: FunVar) -> FunId {
        let s = self.spec();
        let mut derivs = s.derivs.clone();
        let pos = derivs.partition_point(|d| *d <= v);
        derivs.insert(pos, v);
        FunId::intern(FunSpec {
            name: s.name.clone(),
            deps: s.deps.clone(),
            derivs,
        })
    }
}

impl fmt::Debug for FunId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.spec();
        write!(f, "{}", s.name)?;
        if !s.derivs.is_empty() {
            write!(f, "{:?}", s.derivs)?;
        }
        Ok(())
    }
}

/// Indivisible symbolic factor.
///
/// Derived atoms (`Inv`, `SqrtG`, `Rho`, `Energy`, `Mu`, `Pressure`) stand for
/// functions of the order-zero metric and density jets; their partial
/// derivatives are registered in [`super::Ctx`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Atom {
    /// Base coordinate `x^mu`.
    X(u8),
    /// Named scalar parameter such as `kappa` or `q`.
    Param(Sym),
    Jet(JetVar),
    /// Inverse metric `g^{mu nu}` with `mu <= nu`.
    Inv(u8, u8),
    /// `sqrt|det g|`.
    SqrtG,
    /// Rest density `sqrt(g_{mu nu} J^mu J^nu / |g|)`.
    Rho,
    /// `k`-th derivative of the internal energy `e(rho)`.
    Energy(u8),
    /// Energy density `rho (1 + e)`.
    Mu,
    /// Pressure `rho^2 e'`.
    Pressure,
    Fun(FunId),
}

impl Atom {
    pub fn inv(a: usize, b: usize) -> Atom {
        if a <= b {
            Atom::Inv(a as u8, b as u8)
        } else {
            Atom::Inv(b as u8, a as u8)
        }
    }

    pub fn jet(comp: Comp, idx: MultiIndex) -> Atom {
        Atom::Jet(JetVar::new(comp, idx))
    }

    pub fn as_jet(&self) -> Option<&JetVar> {
        match self {
            Atom::Jet(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_derived(&self) -> bool {
        matches!(
            self,
            Atom::Inv(..) | Atom::SqrtG | Atom::Rho | Atom::Energy(_) | Atom::Mu | Atom::Pressure
        )
    }
}
