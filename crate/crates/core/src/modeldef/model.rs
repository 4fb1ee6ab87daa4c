//! Field declarations, parametrizations and the assembled [`Model`].

use std::fmt;
use std::sync::Arc;

use crate::constraints::Constraint;
use crate::symexpr::ctx::sym_index;
use crate::symexpr::{Bundle, Comp, Ctx, Expr, JetVar, MultiIndex, Sym};
use crate::symmetry::GeneratorLift;

/// Tensor type of a declared field or parameter field.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum FieldKind {
    Scalar,
    Vector,
    Covector,
    /// Vector density such as the matter current `J^mu`.
    VectorDensity,
    /// Symmetric covariant 2-tensor, stored as its upper triangle.
    Sym2,
    /// Connection of a principal U(1) bundle.
    GaugePotential,
}

impl FieldKind {
    pub const ALL: [FieldKind; 6] = [
        FieldKind::Scalar,
        FieldKind::Vector,
        FieldKind::Covector,
        FieldKind::VectorDensity,
        FieldKind::Sym2,
        FieldKind::GaugePotential,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            FieldKind::Scalar => "scalar",
            FieldKind::Vector => "vector",
            FieldKind::Covector => "covector",
            FieldKind::VectorDensity => "density",
            FieldKind::Sym2 => "sym2",
            FieldKind::GaugePotential => "gauge",
        }
    }

    pub fn from_keyword(s: &str) -> Option<FieldKind> {
        FieldKind::ALL.into_iter().find(|k| k.keyword() == s)
    }

    /// Number of tensor indices.
    pub fn rank(self) -> usize {
        match self {
            FieldKind::Scalar => 0,
            FieldKind::Sym2 => 2,
            _ => 1,
        }
    }

    pub fn components(self, n: usize) -> usize {
        match self {
            FieldKind::Scalar => 1,
            FieldKind::Sym2 => n * (n + 1) / 2,
            _ => n,
        }
    }

    /// Offset of the component with tensor indices `idx`.
    pub fn offset(self, n: usize, idx: &[usize]) -> Option<usize> {
        if idx.len() != self.rank() || idx.iter().any(|&i| i >= n) {
            return None;
        }
        Some(match self {
            FieldKind::Scalar => 0,
            FieldKind::Sym2 => sym_index(n, idx[0], idx[1]),
            _ => idx[0],
        })
    }

    /// Tensor indices of the component at `offset` (sorted for `Sym2`).
    pub fn indices(self, n: usize, offset: usize) -> Vec<usize> {
        match self {
            FieldKind::Scalar => vec![],
            FieldKind::Sym2 => {
                let mut k = 0;
                for a in 0..n {
                    for b in a..n {
                        if k == offset {
                            return vec![a, b];
                        }
                        k += 1;
                    }
                }
                panic!("offset {offset} out of range")
            }
            _ => vec![offset],
        }
    }

    /// Whether the index sits upstairs in the usual notation.
    pub fn upper(self) -> bool {
        matches!(self, FieldKind::Vector | FieldKind::VectorDensity)
    }
}

/// A named field (or parameter field) occupying consecutive components.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FieldDecl {
    pub name: String,
    pub kind: FieldKind,
    pub first: usize,
}

impl FieldDecl {
    pub fn count(&self, n: usize) -> usize {
        self.kind.components(n)
    }

    pub fn offset(&self, n: usize, idx: &[usize]) -> Option<usize> {
        self.kind.offset(n, idx).map(|o| self.first + o)
    }

    pub fn contains(&self, n: usize, c: usize) -> bool {
        c >= self.first && c < self.first + self.count(n)
    }
}

/// A named summand of the Lagrangian density.
#[derive(Clone, PartialEq, Debug)]
pub struct LagrangianTerm {
    pub name: String,
    pub expr: Expr,
}

/// Linear differential operator `eps -> delta y`, stored as one expression
/// per field component, linear in the jets of the parameter bundle.
#[derive(Clone, PartialEq, Debug)]
pub struct Parametrization {
    pub eps: Vec<FieldDecl>,
    pub delta: Vec<Expr>,
    /// Highest field-jet order in the coefficients (`s`).
    pub order: usize,
    /// Highest parameter-jet order (`l`).
    pub rank: usize,
}

impl Parametrization {
    /// `delta y^a = eps^a`, with one parameter field mirroring each field.
    pub fn trivial(fields: &[FieldDecl], n: usize) -> Parametrization {
        let eps: Vec<FieldDecl> = fields
            .iter()
            .map(|f| FieldDecl {
                name: format!("d{}", f.name),
                kind: match f.kind {
                    FieldKind::GaugePotential => FieldKind::Covector,
                    k => k,
                },
                first: f.first,
            })
            .collect();
        let total: usize = fields.iter().map(|f| f.count(n)).sum();
        let delta = (0..total)
            .map(|a| Expr::jet(JetVar::base(Comp::eps(a))))
            .collect();
        Parametrization {
            eps,
            delta,
            order: 0,
            rank: 0,
        }
    }

    pub fn neps(&self, n: usize) -> usize {
        self.eps.iter().map(|e| e.count(n)).sum()
    }

    pub fn is_trivial(&self) -> bool {
        self.delta
            .iter()
            .enumerate()
            .all(|(a, d)| *d == Expr::jet(JetVar::base(Comp::eps(a))))
    }

    /// Recomputes `order` and `rank` from the expressions.
    pub fn measure(&mut self) {
        self.order = self
            .delta
            .iter()
            .filter_map(|d| d.max_order(Bundle::Field))
            .max()
            .unwrap_or(0);
        self.rank = self
            .delta
            .iter()
            .filter_map(|d| d.max_order(Bundle::Eps))
            .max()
            .unwrap_or(0);
    }
}

/// A complete variational problem with parametrized variations.
#[derive(Clone)]
pub struct Model {
    pub name: String,
    pub n: usize,
    pub params: Vec<Sym>,
    pub fields: Vec<FieldDecl>,
    pub lagrangian: Vec<LagrangianTerm>,
    pub parametrization: Parametrization,
    pub constraints: Vec<Constraint>,
    pub generators: Vec<GeneratorLift>,
    /// Parameter section induced by the formal generator, one expression per
    /// parameter component in the jets of `xi` and `zeta`.
    pub jmap: Option<Vec<Expr>>,
    pub ctx: Arc<Ctx>,
}

impl fmt::Debug for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Model")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("fields", &self.fields)
            .field("lagrangian_terms", &self.lagrangian.len())
            .finish()
    }
}

impl PartialEq for Model {
    fn eq(&self, o: &Model) -> bool {
        self.name == o.name
            && self.n == o.n
            && self.params == o.params
            && self.fields == o.fields
            && self.lagrangian == o.lagrangian
            && self.parametrization == o.parametrization
            && self.constraints == o.constraints
            && self.generators == o.generators
            && self.jmap == o.jmap
    }
}

/// Engine context for a field list: the first `sym2` field is the metric and
/// the first vector density is the matter current.
pub fn context_for(n: usize, fields: &[FieldDecl]) -> Ctx {
    let mut ctx = Ctx::new(n);
    if let Some(g) = fields.iter().find(|f| f.kind == FieldKind::Sym2) {
        ctx = ctx.with_metric(g.first);
    }
    if let Some(j) = fields.iter().find(|f| f.kind == FieldKind::VectorDensity) {
        ctx = ctx.with_density(j.first);
    }
    ctx
}

/// Lays out declarations consecutively.
pub fn layout(n: usize, decls: &[(&str, FieldKind)]) -> Vec<FieldDecl> {
    let mut first = 0;
    decls
        .iter()
        .map(|(name, kind)| {
            let d = FieldDecl {
                name: name.to_string(),
                kind: *kind,
                first,
            };
            first += kind.components(n);
            d
        })
        .collect()
}

impl Model {
    pub fn ncomp(&self) -> usize {
        self.fields.iter().map(|f| f.count(self.n)).sum()
    }

    pub fn neps(&self) -> usize {
        self.parametrization.neps(self.n)
    }

    /// `n` base components plus one gauge component when a gauge potential is declared.
    pub fn ngen(&self) -> usize {
        self.n + self.gauge_field().is_some() as usize
    }

    pub fn lagrangian_total(&self) -> Expr {
        Expr::sum(self.lagrangian.iter().map(|t| t.expr.clone()))
    }

    pub fn term(&self, name: &str) -> Option<&Expr> {
        self.lagrangian
            .iter()
            .find(|t| t.name == name)
            .map(|t| &t.expr)
    }

    /// Highest field-jet order in the Lagrangian (`k`).
    pub fn lagrangian_order(&self) -> usize {
        self.lagrangian
            .iter()
            .filter_map(|t| t.expr.max_order(Bundle::Field))
            .max()
            .unwrap_or(0)
    }

    pub fn field(&self, name: &str) -> Option<&FieldDecl> {
        self.fields.iter().find(|f| f.name == name)
    }

    pub fn field_of(&self, c: usize) -> Option<&FieldDecl> {
        self.fields.iter().find(|f| f.contains(self.n, c))
    }

    pub fn eps_of(&self, c: usize) -> Option<&FieldDecl> {
        self.parametrization
            .eps
            .iter()
            .find(|f| f.contains(self.n, c))
    }

    pub fn gauge_field(&self) -> Option<&FieldDecl> {
        self.fields
            .iter()
            .find(|f| f.kind == FieldKind::GaugePotential)
    }

    pub fn generator(&self, name: &str) -> Option<&GeneratorLift> {
        self.generators.iter().find(|g| g.name == name)
    }

    /// Human-readable label of a component, e.g. `g[0,1]` or `X[2]`.
    pub fn comp_label(&self, c: Comp) -> String {
        let idx = c.index as usize;
        let (decl, gen) = match c.bundle {
            Bundle::Field | Bundle::Var => (self.field_of(idx), false),
            Bundle::Eps => (self.eps_of(idx), false),
            Bundle::Gen => (None, true),
        };
        if gen {
            return if idx < self.n {
                format!("xi[{idx}]")
            } else {
                "zeta".to_string()
            };
        }
        match decl {
            Some(d) => {
                let ix = d.kind.indices(self.n, idx - d.first);
                let prefix = if c.bundle == Bundle::Var { "V:" } else { "" };
                if ix.is_empty() {
                    format!("{prefix}{}", d.name)
                } else {
                    let s: Vec<String> = ix.iter().map(|i| i.to_string()).collect();
                    format!("{prefix}{}[{}]", d.name, s.join(","))
                }
            }
            None => format!("{:?}", c),
        }
    }

    /// Copy with another jet ceiling.
    pub fn with_max_order(&self, k: usize) -> Model {
        let mut m = self.clone();
        m.ctx = Arc::new(self.ctx.with_ceiling(k));
        m
    }

    /// Order-zero jet of field component `c` differentiated along `idx`.
    pub fn y(&self, c: usize, idx: MultiIndex) -> Expr {
        Expr::jet(JetVar::new(Comp::field(c), idx))
    }
}
