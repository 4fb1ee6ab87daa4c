//! Built-in models: flat scalar field, Maxwell on a metric background, Hilbert
//! gravity and the charged relativistic fluid.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::coeff::Q;
use crate::constraints::Constraint;
use crate::error::{JetError, Result};
use crate::modeldef::{
    context_for, layout, FieldDecl, FieldKind, LagrangianTerm, Model, Parametrization,
};
use crate::report::{CheckItem, CheckReport};
use crate::symexpr::{
    normal_form, partial_by_atom, total_derivative, Atom, Comp, Ctx, Expr, Geometry, JetVar,
    MultiIndex, Sym,
};
use crate::symmetry::{lie_section, lie_template, xi_jet, FieldRef, GeneratorLift};

/// Identifier of a built-in model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BuiltinKind {
    ScalarField,
    Maxwell,
    Hilbert,
    ChargedFluid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BuiltinModelId {
    pub kind: BuiltinKind,
    pub n: usize,
}

impl BuiltinKind {
    pub const ALL: [BuiltinKind; 4] = [
        BuiltinKind::ScalarField,
        BuiltinKind::Maxwell,
        BuiltinKind::Hilbert,
        BuiltinKind::ChargedFluid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BuiltinKind::ScalarField => "scalar_field",
            BuiltinKind::Maxwell => "maxwell",
            BuiltinKind::Hilbert => "hilbert",
            BuiltinKind::ChargedFluid => "charged_fluid",
        }
    }

    pub fn dims(self) -> std::ops::RangeInclusive<usize> {
        match self {
            BuiltinKind::Hilbert | BuiltinKind::ChargedFluid => 2..=4,
            _ => 1..=4,
        }
    }
}

impl fmt::Display for BuiltinKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BuiltinKind {
    type Err = JetError;
    fn from_str(s: &str) -> Result<BuiltinKind> {
        BuiltinKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| JetError::Validation(format!("unknown builtin model `{s}`")))
    }
}

impl BuiltinModelId {
    pub fn new(kind: BuiltinKind, n: usize) -> Result<BuiltinModelId> {
        if !kind.dims().contains(&n) {
            return Err(JetError::Validation(format!(
                "{kind} is not available in dimension {n}"
            )));
        }
        Ok(BuiltinModelId { kind, n })
    }
}

pub fn build(id: BuiltinModelId) -> Model {
    match id.kind {
        BuiltinKind::ScalarField => scalar_field(id.n),
        BuiltinKind::Maxwell => maxwell(id.n),
        BuiltinKind::Hilbert => hilbert(id.n),
        BuiltinKind::ChargedFluid => charged_fluid(id.n),
    }
}

pub fn kappa() -> Expr {
    Expr::atom(Atom::Param(Sym::new("kappa")))
}

pub fn charge() -> Expr {
    Expr::atom(Atom::Param(Sym::new("q")))
}

fn assemble(
    name: &str,
    n: usize,
    params: &[&str],
    fields: Vec<FieldDecl>,
    terms: Vec<(&str, Expr)>,
    ctx: Ctx,
) -> Model {
    let parametrization = Parametrization::trivial(&fields, n);
    let gauge = fields.iter().any(|f| f.kind == FieldKind::GaugePotential);
    Model {
        name: name.to_string(),
        n,
        params: params.iter().map(|p| Sym::new(p)).collect(),
        parametrization,
        lagrangian: terms
            .into_iter()
            .map(|(name, expr)| LagrangianTerm {
                name: name.to_string(),
                expr,
            })
            .collect(),
        constraints: Vec::new(),
        generators: vec![GeneratorLift::formal("Y", n, gauge)],
        jmap: None,
        fields,
        ctx: Arc::new(ctx),
    }
}

fn jet(c: usize, idx: MultiIndex) -> Expr {
    Expr::jet(JetVar::new(Comp::field(c), idx))
}

/// `L = 1/2 sum_mu (y_mu)^2`.
pub fn scalar_field(n: usize) -> Model {
    let fields = layout(n, &[("phi", FieldKind::Scalar)]);
    let ctx = context_for(n, &fields);
    let l = Expr::sum((0..n).map(|m| jet(0, MultiIndex::unit(m)).pow(2))).scale(&Q::frac(1, 2));
    let mut m = assemble("scalar_field", n, &[], fields, vec![("L", l)], ctx);
    m.generators.clear();
    m
}

/// `F_{ab} = d_a A_b - d_b A_a` for the gauge field starting at component `a0`.
pub fn field_strength(a0: usize, a: usize, b: usize) -> Expr {
    &jet(a0 + b, MultiIndex::unit(a)) - &jet(a0 + a, MultiIndex::unit(b))
}

/// `-1/4 sqrt|g| F_{ab} F_{cd} g^{ac} g^{bd}`.
pub fn maxwell_lagrangian(ctx: &Ctx, a0: usize) -> Expr {
    let n = ctx.n;
    let mut acc = Expr::zero();
    for a in 0..n {
        for b in 0..n {
            if a == b {
                continue;
            }
            let fab = field_strength(a0, a, b);
            for c in 0..n {
                for d in 0..n {
                    if c == d {
                        continue;
                    }
                    let w = &ctx.ginv(a, c) * &ctx.ginv(b, d);
                    acc = &acc + &(&(&fab * &field_strength(a0, c, d)) * &w);
                }
            }
        }
    }
    (&acc * &Expr::atom(Atom::SqrtG)).scale(&Q::frac(-1, 4))
}

/// `sqrt|g| R / (2 kappa)`.
pub fn hilbert_lagrangian(ctx: &Ctx) -> Expr {
    let mut geo = Geometry::new(ctx);
    let r = geo
        .scalar_curvature(ctx)
        .expect("curvature needs second jets");
    (&(&r * &Expr::atom(Atom::SqrtG)) * &kappa().try_pow(-1).unwrap()).scale(&Q::frac(1, 2))
}

/// Maxwell field on a dynamical metric background.
pub fn maxwell(n: usize) -> Model {
    let fields = layout(
        n,
        &[("g", FieldKind::Sym2), ("A", FieldKind::GaugePotential)],
    );
    let ctx = context_for(n, &fields);
    let l = maxwell_lagrangian(&ctx, fields[1].first);
    assemble("maxwell", n, &[], fields, vec![("L_EM", l)], ctx)
}

pub fn hilbert(n: usize) -> Model {
    let fields = layout(n, &[("g", FieldKind::Sym2)]);
    let ctx = context_for(n, &fields);
    let l = hilbert_lagrangian(&ctx);
    assemble("hilbert", n, &["kappa"], fields, vec![("L_H", l)], ctx)
}

/// Hilbert gravity coupled to Maxwell and to a charged perfect fluid described
/// by its conserved current density `J`, with variations `delta J = L_X J`.
pub fn charged_fluid(n: usize) -> Model {
    let fields = layout(
        n,
        &[
            ("g", FieldKind::Sym2),
            ("A", FieldKind::GaugePotential),
            ("J", FieldKind::VectorDensity),
        ],
    );
    let ctx = context_for(n, &fields);
    let (aa, ja) = (fields[1].first, fields[2].first);
    let l_int =
        Expr::sum((0..n).map(|m| {
            &(&charge() * &jet(ja + m, MultiIndex::ZERO)) * &jet(aa + m, MultiIndex::ZERO)
        }));
    let terms = vec![
        ("L_H", hilbert_lagrangian(&ctx)),
        ("L_EM", maxwell_lagrangian(&ctx, aa)),
        ("L_F", -&(&Expr::atom(Atom::SqrtG) * &Expr::atom(Atom::Mu))),
        ("L_int", l_int),
    ];
    let phi = Expr::sum((0..n).map(|m| jet(ja + m, MultiIndex::unit(m))));
    let constraint =
        Constraint::new(vec![phi], vec![None], false, &ctx).expect("conservation law is solvable");
    let mut m = assemble("charged_fluid", n, &["kappa", "q"], fields, terms, ctx);

    let eps = layout(
        n,
        &[
            ("dg", FieldKind::Sym2),
            ("dA", FieldKind::Covector),
            ("X", FieldKind::Vector),
        ],
    );
    let x0 = eps[2].first;
    let xs: Vec<Expr> = (0..n)
        .map(|nu| Expr::jet(JetVar::base(Comp::eps(x0 + nu))))
        .collect();
    let mut delta: Vec<Expr> = (0..ja)
        .map(|a| Expr::jet(JetVar::base(Comp::eps(a))))
        .collect();
    let jref = FieldRef {
        decl: &m.fields[2],
        bundle: crate::symexpr::Bundle::Field,
        n,
    };
    for mu in 0..n {
        delta.push(lie_template(&m.ctx, jref, &[mu], &xs, None).expect("first jets are available"));
    }
    let mut p = Parametrization {
        eps,
        delta,
        order: 0,
        rank: 0,
    };
    p.measure();
    m.parametrization = p;
    m.constraints = vec![constraint];

    let lie = lie_section(&m, &m.generators[0]).expect("lift templates");
    let mut jmap: Vec<Expr> = lie[..ja].to_vec();
    jmap.extend((0..n).map(|nu| xi_jet(nu, MultiIndex::ZERO)));
    m.jmap = Some(jmap);
    m
}

/// Thermodynamic consequences of `mu = rho (1 + e)` and `P = rho^2 e'`.
pub fn fluid_identities(m: &Model) -> Result<CheckReport> {
    let ctx = &m.ctx;
    if ctx.density.is_none() {
        return Err(JetError::Validation("model has no matter current".into()));
    }
    let rho = Expr::atom(Atom::Rho);
    let mu = Expr::atom(Atom::Mu);
    let p = Expr::atom(Atom::Pressure);
    let dmu = partial_by_atom(&mu, &Atom::Rho);
    let mut rep = CheckReport::new("fluid identities");
    let first = &(&rho * &dmu) - &(&mu + &p);
    rep.push(CheckItem::residue(
        "rho dmu/drho = mu + P",
        normal_form(&first, ctx),
    ));
    for nu in 0..m.n {
        let lhs = &rho * &total_derivative(&dmu, nu, ctx)?;
        let rhs = total_derivative(&p, nu, ctx)?;
        rep.push(CheckItem::residue(
            &format!("rho d{nu}(dmu/drho) = d{nu} P"),
            normal_form(&(&lhs - &rhs), ctx),
        ));
    }
    let dust = |e: &Expr| {
        crate::symexpr::normal::unfold_thermo(e).substitute_with(|a| match a {
            Atom::Energy(_) => Some(Expr::zero()),
            _ => None,
        })
    };
    rep.push(CheckItem::residue(
        "dust: P = 0",
        normal_form(&dust(&p), ctx),
    ));
    rep.push(CheckItem::residue(
        "dust: mu = rho",
        normal_form(&(&dust(&mu) - &rho), ctx),
    ));
    Ok(rep)
}
