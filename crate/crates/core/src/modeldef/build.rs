//! Evaluation of the syntax tree into a validated [`Model`].

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::constraints::Constraint;
use crate::error::{JetError, Result};
use crate::symexpr::{
    total_derivative, Atom, Bundle, Comp, Ctx, Expr, Geometry, JetVar, MultiIndex, Sym, MAX_DIM,
};
use crate::symmetry::{lie_template, xi_jet, zeta_jet, FieldRef, GeneratorLift};
use crate::varcalc::linear_coeffs;

use super::lexer::Pos;
use super::model::{context_for, FieldDecl, FieldKind, LagrangianTerm, Model, Parametrization};
use super::parser::{
    parse_expression, parse_statements, Assign, BinOp, GenItem, GeoFn, Ix, Node, PStmt, Range, Ref,
    Stmt,
};

/// Names with a fixed meaning inside expressions.
pub const RESERVED: &[&str] = &[
    "n",
    "y",
    "eps",
    "xi",
    "zeta",
    "x",
    "ginv",
    "sqrtg",
    "rho",
    "mu",
    "P",
    "energy",
    "d",
    "sum",
    "lie",
    "nabla",
    "christoffel",
    "ricci",
    "einstein",
    "curvature",
    "for",
    "in",
    "leading",
    "faithful",
    "lift",
    "delta",
];

fn invalid<T>(pos: Pos, msg: impl AsRef<str>) -> Result<T> {
    Err(JetError::Validation(format!("{pos}: {}", msg.as_ref())))
}

struct Eval<'a> {
    ctx: &'a Ctx,
    params: &'a [Sym],
    fields: &'a [FieldDecl],
    eps: &'a [FieldDecl],
    gauge: bool,
    geo: Option<Geometry>,
    env: Vec<(String, i64)>,
}

/// Where a reference points to.
enum Target<'d> {
    Field(&'d FieldDecl, Bundle),
    Global(Bundle),
}

impl<'a> Eval<'a> {
    fn new(ctx: &'a Ctx, params: &'a [Sym], fields: &'a [FieldDecl], eps: &'a [FieldDecl]) -> Self {
        Eval {
            ctx,
            params,
            fields,
            eps,
            gauge: fields.iter().any(|f| f.kind == FieldKind::GaugePotential),
            geo: None,
            env: Vec::new(),
        }
    }

    fn n(&self) -> usize {
        self.ctx.n
    }

    fn ix(&self, ix: &Ix) -> Result<i64> {
        Ok(match ix {
            Ix::Int(v) => *v,
            Ix::Var(name, pos) => match self.env.iter().rev().find(|(v, _)| v == name) {
                Some((_, v)) => *v,
                None if name == "n" => self.n() as i64,
                None => return invalid(*pos, format!("unknown index `{name}`")),
            },
            Ix::Add(a, b) => self.ix(a)? + self.ix(b)?,
            Ix::Sub(a, b) => self.ix(a)? - self.ix(b)?,
        })
    }

    fn below(&self, ix: &Ix, bound: usize, pos: Pos) -> Result<usize> {
        let v = self.ix(ix)?;
        if v < 0 || v as usize >= bound {
            return invalid(pos, format!("index {v} out of range 0..{bound}"));
        }
        Ok(v as usize)
    }

    fn indices(&self, ixs: &[Ix], pos: Pos) -> Result<Vec<usize>> {
        ixs.iter().map(|i| self.below(i, self.n(), pos)).collect()
    }

    fn multi_index(&self, r: &Ref) -> Result<MultiIndex> {
        Ok(MultiIndex::from_dirs(&self.indices(&r.dirs, r.pos)?))
    }

    fn metric(&self, pos: Pos, what: &str) -> Result<()> {
        if self.ctx.metric.is_none() {
            return invalid(pos, format!("`{what}` needs a sym2 field acting as metric"));
        }
        Ok(())
    }

    fn density(&self, pos: Pos, what: &str) -> Result<()> {
        self.metric(pos, what)?;
        if self.ctx.density.is_none() {
            return invalid(
                pos,
                format!("`{what}` needs a density field acting as matter current"),
            );
        }
        Ok(())
    }

    fn target(&self, name: &str) -> Option<Target<'a>> {
        if let Some(f) = self.fields.iter().find(|f| f.name == name) {
            return Some(Target::Field(f, Bundle::Field));
        }
        if let Some(f) = self.eps.iter().find(|f| f.name == name) {
            return Some(Target::Field(f, Bundle::Eps));
        }
        match name {
            "y" => Some(Target::Global(Bundle::Field)),
            "eps" => Some(Target::Global(Bundle::Eps)),
            _ => None,
        }
    }

    /// Component addressed by the tensor part of a field reference.
    fn component(&self, r: &Ref) -> Result<Option<Comp>> {
        let Some(t) = self.target(&r.name) else {
            return Ok(None);
        };
        let n = self.n();
        let (bundle, index) = match t {
            Target::Field(f, b) => {
                if r.tensor.len() != f.kind.rank() {
                    return invalid(
                        r.pos,
                        format!("`{}` takes {} tensor indices", f.name, f.kind.rank()),
                    );
                }
                (
                    b,
                    f.offset(n, &self.indices(&r.tensor, r.pos)?)
                        .expect("indices checked"),
                )
            }
            Target::Global(b) => {
                let total: usize = match b {
                    Bundle::Eps => self.eps.iter().map(|f| f.count(n)).sum(),
                    _ => self.fields.iter().map(|f| f.count(n)).sum(),
                };
                if r.tensor.len() != 1 {
                    return invalid(r.pos, format!("`{}` takes one component index", r.name));
                }
                (b, self.below(&r.tensor[0], total, r.pos)?)
            }
        };
        Ok(Some(Comp {
            bundle,
            index: index as u16,
        }))
    }

    fn no_dirs(&self, r: &Ref) -> Result<()> {
        if !r.dirs.is_empty() {
            return invalid(
                r.pos,
                format!("`{}` cannot carry derivative indices", r.name),
            );
        }
        Ok(())
    }

    fn arity(&self, r: &Ref, k: usize) -> Result<()> {
        if r.tensor.len() != k {
            return invalid(r.pos, format!("`{}` takes {k} indices", r.name));
        }
        Ok(())
    }

    fn reference(&mut self, r: &Ref) -> Result<Expr> {
        if let Some(c) = self.component(r)? {
            return Ok(Expr::jet(JetVar::new(c, self.multi_index(r)?)));
        }
        let pos = r.pos;
        let name = r.name.as_str();
        if let Some(gen) = match name {
            "xi" => {
                self.arity(r, 1)?;
                Some(self.below(&r.tensor[0], self.n(), pos)?)
            }
            "zeta" => {
                self.arity(r, 0)?;
                if !self.gauge {
                    return invalid(pos, "`zeta` needs a gauge field");
                }
                Some(self.n())
            }
            _ => None,
        } {
            return Ok(Expr::jet(JetVar::new(Comp::gen(gen), self.multi_index(r)?)));
        }
        self.no_dirs(r)?;
        if r.tensor.is_empty() {
            if let Some((_, v)) = self.env.iter().rev().find(|(v, _)| v == name) {
                return Ok(Expr::int(*v));
            }
            if let Some(s) = self.params.iter().find(|s| s.name() == name) {
                return Ok(Expr::atom(Atom::Param(*s)));
            }
        }
        let atom = match name {
            "n" => {
                self.arity(r, 0)?;
                return Ok(Expr::int(self.n() as i64));
            }
            "x" => {
                self.arity(r, 1)?;
                Atom::X(self.below(&r.tensor[0], self.n(), pos)? as u8)
            }
            "ginv" => {
                self.arity(r, 2)?;
                self.metric(pos, name)?;
                let ix = self.indices(&r.tensor, pos)?;
                Atom::inv(ix[0], ix[1])
            }
            "sqrtg" => {
                self.arity(r, 0)?;
                self.metric(pos, name)?;
                Atom::SqrtG
            }
            "rho" | "mu" | "P" => {
                self.arity(r, 0)?;
                self.density(pos, name)?;
                match name {
                    "rho" => Atom::Rho,
                    "mu" => Atom::Mu,
                    _ => Atom::Pressure,
                }
            }
            "energy" => {
                self.arity(r, 1)?;
                self.density(pos, name)?;
                Atom::Energy(self.below(&r.tensor[0], 8, pos)? as u8)
            }
            _ => return invalid(pos, format!("unknown symbol `{name}`")),
        };
        Ok(Expr::atom(atom))
    }

    fn geometry(&mut self, pos: Pos, what: &str) -> Result<&mut Geometry> {
        self.metric(pos, what)?;
        Ok(self.geo.get_or_insert_with(|| Geometry::new(self.ctx)))
    }

    fn field_decl(&self, r: &Ref, what: &str) -> Result<(&'a FieldDecl, Bundle)> {
        self.no_dirs(r)?;
        match self.target(&r.name) {
            Some(Target::Field(f, b)) => Ok((f, b)),
            _ => invalid(
                r.pos,
                format!("`{what}` expects a declared field, found `{}`", r.name),
            ),
        }
    }

    fn tensor(&self, r: &Ref, f: &FieldDecl) -> Result<Vec<usize>> {
        if r.tensor.len() != f.kind.rank() {
            return invalid(
                r.pos,
                format!("`{}` takes {} tensor indices", f.name, f.kind.rank()),
            );
        }
        self.indices(&r.tensor, r.pos)
    }

    fn with_var<T>(
        &mut self,
        var: &str,
        v: i64,
        f: impl FnOnce(&mut Self) -> Result<T>,
    ) -> Result<T> {
        self.env.push((var.to_string(), v));
        let out = f(self);
        self.env.pop();
        out
    }

    fn eval(&mut self, node: &Node) -> Result<Expr> {
        let ctx = self.ctx;
        Ok(match node {
            Node::Num(v) => Expr::int(*v),
            Node::Neg(e) => -&self.eval(e)?,
            Node::Bin(op, a, b, pos) => {
                let (a, b) = (self.eval(a)?, self.eval(b)?);
                match op {
                    BinOp::Add => &a + &b,
                    BinOp::Sub => &a - &b,
                    BinOp::Mul => &a * &b,
                    BinOp::Div => match b.try_pow(-1) {
                        Some(inv) => &a * &inv,
                        None => return invalid(*pos, "divisor must be a nonzero monomial"),
                    },
                }
            }
            Node::Pow(b, k, pos) => match self.eval(b)?.try_pow(*k) {
                Some(e) => e,
                None => return invalid(*pos, "negative power of a non-monomial expression"),
            },
            Node::Ref(r) => self.reference(r)?,
            Node::D(e, dirs, pos) => {
                let mut acc = self.eval(e)?;
                for mu in self.indices(dirs, *pos)? {
                    acc = total_derivative(&acc, mu, ctx)?;
                }
                acc
            }
            Node::Sum(var, lo, hi, body) => {
                let (lo, hi) = (self.ix(lo)?, self.ix(hi)?);
                let mut acc = Expr::zero();
                for v in lo..hi {
                    acc = &acc + &self.with_var(var, v, |s| s.eval(body))?;
                }
                acc
            }
            Node::Lie(r, along) => {
                let (f, bundle) = self.field_decl(r, "lie")?;
                if bundle != Bundle::Field {
                    return invalid(r.pos, "`lie` acts on fields");
                }
                let tensor = self.tensor(r, f)?;
                let n = self.n();
                let (xs, zeta): (Vec<Expr>, Option<Expr>) = match along {
                    None => (
                        (0..n).map(|mu| xi_jet(mu, MultiIndex::ZERO)).collect(),
                        self.gauge.then(|| zeta_jet(n, MultiIndex::ZERO)),
                    ),
                    Some((name, pos)) => match self.eps.iter().find(|e| &e.name == name) {
                        Some(v) if v.kind == FieldKind::Vector => (
                            (0..n)
                                .map(|mu| Expr::jet(JetVar::base(Comp::eps(v.first + mu))))
                                .collect(),
                            None,
                        ),
                        _ => {
                            return invalid(
                                *pos,
                                format!("`{name}` is not a vector parameter field"),
                            )
                        }
                    },
                };
                let fr = FieldRef { decl: f, bundle, n };
                lie_template(ctx, fr, &tensor, &xs, zeta.as_ref())?
            }
            Node::Nabla(r, k) => {
                let (f, bundle) = self.field_decl(r, "nabla")?;
                let tensor = self.tensor(r, f)?;
                let k = self.below(k, self.n(), r.pos)?;
                let fr = FieldRef {
                    decl: f,
                    bundle,
                    n: self.n(),
                };
                if f.kind == FieldKind::Scalar {
                    return Ok(total_derivative(&fr.jet(&[], MultiIndex::ZERO), k, ctx)?);
                }
                if f.kind == FieldKind::Sym2 {
                    return invalid(
                        r.pos,
                        "`nabla` supports scalar, vector, covector and density fields",
                    );
                }
                let comps: Vec<Expr> = (0..self.n())
                    .map(|i| fr.jet(&[i], MultiIndex::ZERO))
                    .collect();
                let m = tensor[0];
                let geo = self.geometry(r.pos, "nabla")?;
                match f.kind {
                    FieldKind::Vector => geo.nabla_vector(ctx, &comps, m, k)?,
                    FieldKind::VectorDensity => geo.nabla_density(ctx, &comps, m, k)?,
                    _ => geo.nabla_covector(ctx, &comps, m, k)?,
                }
            }
            Node::Geo(fun, args, pos) => {
                let want = match fun {
                    GeoFn::Christoffel => 3,
                    GeoFn::Ricci | GeoFn::Einstein => 2,
                    GeoFn::Curvature => 0,
                };
                if args.len() != want {
                    return invalid(*pos, format!("expected {want} arguments"));
                }
                let ix = self.indices(args, *pos)?;
                let geo = self.geometry(*pos, "curvature")?;
                match fun {
                    GeoFn::Christoffel => geo.christoffel(ix[0], ix[1], ix[2]).clone(),
                    GeoFn::Ricci => geo.ricci(ctx)?[ix[0]][ix[1]].clone(),
                    GeoFn::Einstein => geo.einstein_upper(ctx, ix[0], ix[1])?,
                    GeoFn::Curvature => geo.scalar_curvature(ctx)?,
                }
            }
        })
    }

    /// Runs `f` once per point of the ranges, innermost last.
    fn expand(
        &mut self,
        ranges: &[Range],
        f: &mut dyn FnMut(&mut Self) -> Result<()>,
    ) -> Result<()> {
        let Some((r, rest)) = ranges.split_first() else {
            return f(self);
        };
        let (lo, hi) = (self.ix(&r.lo)?, self.ix(&r.hi)?);
        for v in lo..hi {
            self.with_var(&r.var, v, |s| s.expand(rest, f))?;
        }
        Ok(())
    }

    /// Evaluates an assignment at every range point as `(lhs component, rhs)`.
    fn assignments(&mut self, a: &Assign) -> Result<Vec<(Comp, Expr)>> {
        let mut out = Vec::new();
        self.expand(&a.ranges, &mut |s| {
            s.no_dirs(&a.lhs)?;
            let c = match s.component(&a.lhs)? {
                Some(c) => c,
                None => return invalid(a.lhs.pos, format!("`{}` is not a field", a.lhs.name)),
            };
            out.push((c, s.eval(&a.rhs)?));
            Ok(())
        })?;
        Ok(out)
    }
}

/// Jet bundles allowed in an expression.
#[derive(Clone, Copy)]
struct Allowed {
    bundles: &'static [Bundle],
    what: &'static str,
}

fn check_atoms(e: &Expr, allowed: Allowed, pos: Pos) -> Result<()> {
    for a in e.atoms() {
        match a {
            Atom::Fun(_) => {
                return invalid(
                    pos,
                    format!("{} cannot contain abstract functions", allowed.what),
                )
            }
            Atom::Jet(v) if !allowed.bundles.contains(&v.comp.bundle) => {
                let kind = match v.comp.bundle {
                    Bundle::Field => "field",
                    Bundle::Eps => "parameter",
                    Bundle::Gen => "generator",
                    Bundle::Var => "variation",
                };
                return invalid(pos, format!("{} cannot contain {kind} jets", allowed.what));
            }
            _ => {}
        }
    }
    Ok(())
}

struct Decls {
    name: String,
    n: usize,
    params: Vec<Sym>,
    fields: Vec<FieldDecl>,
    eps: Option<Vec<FieldDecl>>,
}

fn lay(n: usize, decls: &[(String, FieldKind)]) -> Vec<FieldDecl> {
    let mut first = 0;
    decls
        .iter()
        .map(|(name, kind)| {
            let d = FieldDecl {
                name: name.clone(),
                kind: *kind,
                first,
            };
            first += kind.components(n);
            d
        })
        .collect()
}

fn declarations(stmts: &[Stmt]) -> Result<Decls> {
    let mut name = None;
    let mut dim = None;
    let mut params = Vec::new();
    let mut fields = Vec::new();
    let mut eps: Option<Vec<(String, FieldKind)>> = None;
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut claim = |s: &str, pos: Pos| -> Result<()> {
        if RESERVED.contains(&s) {
            return invalid(pos, format!("`{s}` is a reserved name"));
        }
        if !seen.insert(s.to_string()) {
            return invalid(pos, format!("`{s}` is declared twice"));
        }
        Ok(())
    };
    for st in stmts {
        match st {
            Stmt::Model(s) => {
                if name.replace(s.clone()).is_some() {
                    return Err(JetError::Validation("model name given twice".into()));
                }
            }
            Stmt::Dim(v, pos) => {
                if !(1..=MAX_DIM as i64).contains(v) {
                    return invalid(*pos, format!("dimension must be 1..={MAX_DIM}"));
                }
                if dim.replace(*v as usize).is_some() {
                    return invalid(*pos, "dimension given twice");
                }
            }
            Stmt::Param(ps) => {
                for (p, pos) in ps {
                    claim(p, *pos)?;
                    params.push(Sym::new(p));
                }
            }
            Stmt::Field(f, kind, pos) => {
                claim(f, *pos)?;
                fields.push((f.clone(), *kind));
            }
            Stmt::Parametrization(items) => {
                if eps.is_some() {
                    return Err(JetError::Validation("parametrization given twice".into()));
                }
                let mut list = Vec::new();
                for it in items {
                    if let PStmt::Eps(e, kind, pos) = it {
                        claim(e, *pos)?;
                        list.push((e.clone(), *kind));
                    }
                }
                eps = Some(list);
            }
            _ => {}
        }
    }
    let name = name.ok_or_else(|| JetError::Validation("missing `model` statement".into()))?;
    let n = dim.ok_or_else(|| JetError::Validation("missing `dim` statement".into()))?;
    if fields.is_empty() {
        return Err(JetError::Validation("model declares no fields".into()));
    }
    Ok(Decls {
        name,
        n,
        params,
        fields: lay(n, &fields),
        eps: eps.map(|e| lay(n, &e)),
    })
}

/// Collects one expression per component, rejecting gaps and repeats.
fn fill(
    slots: usize,
    assigned: Vec<(Comp, Expr, Pos)>,
    what: &str,
    label: impl Fn(usize) -> String,
) -> Result<Vec<Expr>> {
    let mut out: Vec<Option<Expr>> = vec![None; slots];
    for (c, e, pos) in assigned {
        let slot = &mut out[c.index as usize];
        if slot.is_some() {
            return invalid(
                pos,
                format!("{what} for {} assigned twice", label(c.index as usize)),
            );
        }
        *slot = Some(e);
    }
    out.into_iter()
        .enumerate()
        .map(|(i, e)| {
            e.ok_or_else(|| JetError::Validation(format!("{what} for {} is missing", label(i))))
        })
        .collect()
}

fn label(decls: &[FieldDecl], n: usize, c: usize) -> String {
    match decls.iter().find(|d| d.contains(n, c)) {
        Some(d) => {
            let ix: Vec<String> = d
                .kind
                .indices(n, c - d.first)
                .iter()
                .map(|i| i.to_string())
                .collect();
            if ix.is_empty() {
                d.name.clone()
            } else {
                format!("{}[{}]", d.name, ix.join(","))
            }
        }
        None => format!("component {c}"),
    }
}

fn parametrization(ev: &mut Eval, items: &[PStmt], eps: Vec<FieldDecl>) -> Result<Parametrization> {
    let n = ev.n();
    let mut assigned = Vec::new();
    for it in items {
        let PStmt::Delta(a) = it else { continue };
        for (c, e) in ev.assignments(a)? {
            if c.bundle != Bundle::Field {
                return invalid(a.lhs.pos, "`delta` assigns field components");
            }
            check_atoms(
                &e,
                Allowed {
                    bundles: &[Bundle::Field, Bundle::Eps],
                    what: "a variation",
                },
                a.lhs.pos,
            )?;
            if linear_coeffs(&e, Bundle::Eps).is_err() {
                return invalid(
                    a.lhs.pos,
                    format!(
                        "delta {} is not linear in the parameter jets",
                        label(ev.fields, n, c.index as usize)
                    ),
                );
            }
            assigned.push((c, e, a.lhs.pos));
        }
    }
    let ncomp: usize = ev.fields.iter().map(|f| f.count(n)).sum();
    let delta = fill(ncomp, assigned, "delta", |c| label(ev.fields, n, c))?;
    let mut p = Parametrization {
        eps,
        delta,
        order: 0,
        rank: 0,
    };
    p.measure();
    if p.rank > 1 {
        return Err(JetError::Validation(format!(
            "variations use parameter jets of order {}, at most 1 is supported",
            p.rank
        )));
    }
    if p.order > 1 {
        return Err(JetError::Validation(format!(
            "variations use field jets of order {}, at most 1 is supported",
            p.order
        )));
    }
    Ok(p)
}

fn leading(ev: &mut Eval, r: &Ref) -> Result<JetVar> {
    match ev.component(r)? {
        Some(c) if c.bundle == Bundle::Field => Ok(JetVar::new(c, ev.multi_index(r)?)),
        _ => invalid(
            r.pos,
            format!("leading coordinate must be a field jet, found `{}`", r.name),
        ),
    }
}

fn generator(ev: &mut Eval, name: &str, items: &[GenItem], pos: Pos) -> Result<GeneratorLift> {
    let n = ev.n();
    let mut g = GeneratorLift::formal(name, n, ev.gauge);
    let ok = Allowed {
        bundles: &[Bundle::Field, Bundle::Gen],
        what: "a generator",
    };
    for it in items {
        match it {
            GenItem::Zeta(e) => {
                if !ev.gauge {
                    return invalid(pos, "`zeta` needs a gauge field");
                }
                let e = ev.eval(e)?;
                check_atoms(&e, ok, pos)?;
                g.zeta = Some(e);
            }
            GenItem::Xi(a) => {
                let mut out = Vec::new();
                ev.expand(&a.ranges, &mut |s| {
                    s.no_dirs(&a.lhs)?;
                    s.arity(&a.lhs, 1)?;
                    let mu = s.below(&a.lhs.tensor[0], n, a.lhs.pos)?;
                    out.push((mu, s.eval(&a.rhs)?));
                    Ok(())
                })?;
                for (mu, e) in out {
                    check_atoms(&e, ok, a.lhs.pos)?;
                    g.xi[mu] = e;
                }
            }
            GenItem::Lift(a) => {
                for (c, e) in ev.assignments(a)? {
                    if c.bundle != Bundle::Field {
                        return invalid(a.lhs.pos, "`lift` assigns field components");
                    }
                    check_atoms(&e, ok, a.lhs.pos)?;
                    g.overrides.insert(c.index as usize, e);
                }
            }
        }
    }
    Ok(g)
}

/// Builds and validates a model from its textual definition.
pub fn parse_model(src: &str) -> Result<Model> {
    let stmts = parse_statements(src)?;
    let d = declarations(&stmts)?;
    let n = d.n;
    let ctx = context_for(n, &d.fields);
    let trivial = Parametrization::trivial(&d.fields, n);
    let eps = d.eps.clone().unwrap_or_else(|| trivial.eps.clone());
    let mut ev = Eval::new(&ctx, &d.params, &d.fields, &eps);

    let mut lagrangian: Vec<LagrangianTerm> = Vec::new();
    let mut param = None;
    let mut constraints = Vec::new();
    let mut generators: Vec<GeneratorLift> = Vec::new();
    let mut jmap = None;
    for st in &stmts {
        match st {
            Stmt::Lagrangian(name, e, pos) => {
                let name = name.clone().unwrap_or_else(|| "L".to_string());
                if lagrangian.iter().any(|t| t.name == name) {
                    return invalid(*pos, format!("Lagrangian term `{name}` defined twice"));
                }
                let expr = ev.eval(e)?;
                check_atoms(
                    &expr,
                    Allowed {
                        bundles: &[Bundle::Field],
                        what: "a Lagrangian",
                    },
                    *pos,
                )?;
                if let Some(k) = expr.max_order(Bundle::Field).filter(|&k| k > 2) {
                    return invalid(
                        *pos,
                        format!("Lagrangian has order {k}, at most 2 is supported"),
                    );
                }
                lagrangian.push(LagrangianTerm { name, expr });
            }
            Stmt::Parametrization(items) => {
                param = Some(parametrization(&mut ev, items, eps.clone())?);
            }
            Stmt::Constraint(faithful, eqs, pos) => {
                let mut exprs = Vec::new();
                let mut lead = Vec::new();
                for eq in eqs {
                    let e = ev.eval(&eq.expr)?;
                    check_atoms(
                        &e,
                        Allowed {
                            bundles: &[Bundle::Field],
                            what: "a constraint",
                        },
                        eq.pos,
                    )?;
                    lead.push(
                        eq.leading
                            .as_ref()
                            .map(|r| leading(&mut ev, r))
                            .transpose()?,
                    );
                    exprs.push(e);
                }
                if exprs.is_empty() {
                    return invalid(*pos, "constraint block has no equations");
                }
                constraints.push(Constraint::new(exprs, lead, *faithful, &ctx)?);
            }
            Stmt::Generator(name, items, pos) => {
                if generators.iter().any(|g| &g.name == name) {
                    return invalid(*pos, format!("generator `{name}` defined twice"));
                }
                generators.push(generator(&mut ev, name, items, *pos)?);
            }
            Stmt::Jmap(items, pos) => {
                if jmap.is_some() {
                    return invalid(*pos, "jmap given twice");
                }
                let mut assigned = Vec::new();
                for a in items {
                    for (c, e) in ev.assignments(a)? {
                        if c.bundle != Bundle::Eps {
                            return invalid(a.lhs.pos, "jmap assigns parameter components");
                        }
                        check_atoms(
                            &e,
                            Allowed {
                                bundles: &[Bundle::Field, Bundle::Gen],
                                what: "a jmap",
                            },
                            a.lhs.pos,
                        )?;
                        if linear_coeffs(&e, Bundle::Gen).is_err() {
                            return invalid(a.lhs.pos, "jmap must be linear in the generator jets");
                        }
                        assigned.push((c, e, a.lhs.pos));
                    }
                }
                let neps: usize = eps.iter().map(|f| f.count(n)).sum();
                jmap = Some(fill(neps, assigned, "jmap", |c| label(&eps, n, c))?);
            }
            _ => {}
        }
    }
    if lagrangian.is_empty() {
        return Err(JetError::Validation("model has no Lagrangian".into()));
    }
    Ok(Model {
        name: d.name,
        n,
        params: d.params,
        fields: d.fields,
        lagrangian,
        parametrization: param.unwrap_or(trivial),
        constraints,
        generators,
        jmap,
        ctx: Arc::new(ctx),
    })
}

/// Parses an expression in the namespace of `m`.
pub fn parse_expr(src: &str, m: &Model) -> Result<Expr> {
    let node = parse_expression(src)?;
    let mut ev = Eval::new(&m.ctx, &m.params, &m.fields, &m.parametrization.eps);
    ev.eval(&node)
}
