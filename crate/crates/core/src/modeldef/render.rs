//! Printing models and expressions back as model files or LaTeX.

use std::fmt::Write;

use crate::coeff::Q;
use crate::error::{JetError, Result};
use crate::symexpr::{Atom, Bundle, Expr, JetVar, Mono};
use crate::symmetry::GeneratorLift;

use super::model::{Model, Parametrization};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Style {
    Dsl,
    Latex,
}

const GREEK: &[&str] = &[
    "alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta", "iota", "kappa",
    "lambda", "mu", "nu", "xi", "pi", "rho", "sigma", "tau", "upsilon", "phi", "chi", "psi",
    "omega", "Gamma", "Delta", "Theta", "Lambda", "Xi", "Pi", "Sigma", "Phi", "Psi", "Omega",
];

const WIDTH: usize = 96;

fn latex_name(s: &str) -> String {
    if GREEK.contains(&s) {
        format!("\\{s}")
    } else if s.len() == 1 {
        s.to_string()
    } else {
        format!("\\mathrm{{{s}}}")
    }
}

fn join(ix: &[usize]) -> String {
    ix.iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn subscript(name: &str, tensor: &[usize], dirs: &[usize], style: Style) -> String {
    let body = if dirs.is_empty() {
        join(tensor)
    } else {
        format!("{};{}", join(tensor), join(dirs))
    };
    match style {
        Style::Dsl if body.is_empty() => name.to_string(),
        Style::Dsl => format!("{name}[{body}]"),
        Style::Latex if body.is_empty() => latex_name(name),
        Style::Latex => format!("{}_{{{body}}}", latex_name(name)),
    }
}

fn jet_text(v: &JetVar, m: &Model, style: Style) -> Result<String> {
    let n = m.n;
    let c = v.comp.index as usize;
    let dirs = v.idx.dirs();
    let decl = match v.comp.bundle {
        Bundle::Field => m.field_of(c),
        Bundle::Eps => m.eps_of(c),
        Bundle::Gen => {
            return Ok(if c < n {
                subscript("xi", &[c], &dirs, style)
            } else {
                subscript("zeta", &[], &dirs, style)
            })
        }
        Bundle::Var => None,
    };
    let d = decl.ok_or_else(|| {
        JetError::Validation(format!(
            "jet {} has no name in model `{}`",
            m.comp_label(v.comp),
            m.name
        ))
    })?;
    Ok(subscript(
        &d.name,
        &d.kind.indices(n, c - d.first),
        &dirs,
        style,
    ))
}

fn atom_text(a: &Atom, m: &Model, style: Style) -> Result<String> {
    let latex = style == Style::Latex;
    Ok(match a {
        Atom::X(mu) => subscript("x", &[*mu as usize], &[], style),
        Atom::Param(s) if latex => latex_name(s.name()),
        Atom::Param(s) => s.name().to_string(),
        Atom::Jet(v) => jet_text(v, m, style)?,
        Atom::Inv(a, b) if latex => format!("\\mathrm{{ginv}}_{{{a},{b}}}"),
        Atom::Inv(a, b) => format!("ginv[{a},{b}]"),
        Atom::SqrtG if latex => "\\sqrt{|g|}".into(),
        Atom::SqrtG => "sqrtg".into(),
        Atom::Rho if latex => "\\rho".into(),
        Atom::Rho => "rho".into(),
        Atom::Mu if latex => "\\mu".into(),
        Atom::Mu => "mu".into(),
        Atom::Pressure => "P".into(),
        Atom::Energy(k) if latex => format!("\\mathrm{{energy}}_{{{k}}}"),
        Atom::Energy(k) => format!("energy[{k}]"),
        Atom::Fun(_) => {
            return Err(JetError::Validation(
                "abstract functions have no textual form".into(),
            ))
        }
    })
}

fn coeff_text(q: &Q, style: Style) -> String {
    let s = q.abs().to_string();
    match (style, s.split_once('/')) {
        (Style::Latex, Some((a, b))) => format!("\\frac{{{a}}}{{{b}}}"),
        _ => s,
    }
}

/// Unsigned text of one term.
fn term_text(mono: &Mono, c: &Q, m: &Model, style: Style) -> Result<String> {
    let (sep, mut parts) = match style {
        Style::Dsl => ("*", Vec::new()),
        Style::Latex => (" \\, ", Vec::new()),
    };
    if mono.is_one() || !c.abs().is_one() {
        parts.push(coeff_text(c, style));
    }
    for (a, k) in mono.factors() {
        let t = atom_text(a, m, style)?;
        parts.push(match (k, style) {
            (1, _) => t,
            (k, Style::Dsl) => format!("{t}^{k}"),
            (k, Style::Latex) => format!("{t}^{{{k}}}"),
        });
    }
    Ok(parts.join(sep))
}

fn terms(e: &Expr, m: &Model, style: Style) -> Result<Vec<(bool, String)>> {
    e.terms()
        .iter()
        .map(|(mono, c)| Ok((c.is_negative(), term_text(mono, c, m, style)?)))
        .collect()
}

/// Model-file text of `e`, breaking lines after operators past the page width.
fn wrapped(e: &Expr, m: &Model, indent: &str) -> Result<String> {
    let ts = terms(e, m, Style::Dsl)?;
    if ts.is_empty() {
        return Ok("0".into());
    }
    let mut out = String::new();
    let mut line = 0;
    for (i, (neg, t)) in ts.iter().enumerate() {
        let piece = match (i, neg) {
            (0, true) => format!("-{t}"),
            (0, false) => t.clone(),
            (_, true) => format!(" - {t}"),
            (_, false) => format!(" + {t}"),
        };
        if i > 0 && line + piece.len() > WIDTH {
            let (op, rest) = piece.split_at(2);
            let _ = write!(out, "{}\n{indent}", op.trim_end());
            out.push_str(rest.trim_start());
            line = indent.len() + rest.trim_start().len();
        } else {
            line += piece.len();
            out.push_str(&piece);
        }
    }
    Ok(out)
}

/// `e` in model-file syntax.
pub fn render_expr(e: &Expr, m: &Model) -> Result<String> {
    let ts = terms(e, m, Style::Dsl)?;
    Ok(signed_join(&ts))
}

fn signed_join(ts: &[(bool, String)]) -> String {
    if ts.is_empty() {
        return "0".into();
    }
    let mut out = String::new();
    for (i, (neg, t)) in ts.iter().enumerate() {
        match (i, neg) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        out.push_str(t);
    }
    out
}

/// `e` as LaTeX in the subset accepted back by the parser.
pub fn latex_expr(e: &Expr, m: &Model) -> Result<String> {
    Ok(signed_join(&terms(e, m, Style::Latex)?))
}

fn field_ref(m: &Model, bundle: Bundle, c: usize) -> Result<String> {
    jet_text(
        &JetVar::base(crate::symexpr::Comp {
            bundle,
            index: c as u16,
        }),
        m,
        Style::Dsl,
    )
}

fn generator_block(out: &mut String, g: &GeneratorLift, m: &Model) -> Result<()> {
    let formal = GeneratorLift::formal(&g.name, m.n, m.gauge_field().is_some());
    if g.zeta.is_some() != formal.zeta.is_some() {
        return Err(JetError::Validation(format!(
            "generator `{}` has a gauge component that does not match the fields",
            g.name
        )));
    }
    let mut lines = Vec::new();
    for (mu, (a, b)) in g.xi.iter().zip(&formal.xi).enumerate() {
        if a != b {
            lines.push(format!("xi[{mu}] = {}", wrapped(a, m, "    ")?));
        }
    }
    if let (Some(z), Some(f)) = (&g.zeta, &formal.zeta) {
        if z != f {
            lines.push(format!("zeta = {}", wrapped(z, m, "    ")?));
        }
    }
    for (c, e) in &g.overrides {
        lines.push(format!(
            "lift {} = {}",
            field_ref(m, Bundle::Field, *c)?,
            wrapped(e, m, "    ")?
        ));
    }
    if lines.is_empty() {
        let _ = writeln!(out, "\ngenerator {}", g.name);
    } else {
        let _ = writeln!(out, "\ngenerator {} {{", g.name);
        for l in lines {
            let _ = writeln!(out, "  {l}");
        }
        out.push_str("}\n");
    }
    Ok(())
}

/// Model-file text that parses back to a model equal to `m`.
pub fn render_model(m: &Model) -> Result<String> {
    let mut out = String::new();
    let _ = writeln!(out, "model {}\ndim {}", m.name, m.n);
    if !m.params.is_empty() {
        let names: Vec<&str> = m.params.iter().map(|s| s.name()).collect();
        let _ = writeln!(out, "param {}", names.join(", "));
    }
    for f in &m.fields {
        let _ = writeln!(out, "field {} : {}", f.name, f.kind.keyword());
    }
    for t in &m.lagrangian {
        let _ = writeln!(
            out,
            "\nlagrangian {} {{\n  {}\n}}",
            t.name,
            wrapped(&t.expr, m, "  ")?
        );
    }
    let p = &m.parametrization;
    if *p != Parametrization::trivial(&m.fields, m.n) {
        out.push_str("\nparametrization {\n");
        for e in &p.eps {
            let _ = writeln!(out, "  eps {} : {}", e.name, e.kind.keyword());
        }
        for (c, d) in p.delta.iter().enumerate() {
            let lhs = field_ref(m, Bundle::Field, c)?;
            let _ = writeln!(out, "  delta {lhs} = {}", wrapped(d, m, "    ")?);
        }
        out.push_str("}\n");
    }
    for c in &m.constraints {
        let kw = if c.faithful {
            "constraint faithful"
        } else {
            "constraint"
        };
        let _ = writeln!(out, "\n{kw} {{");
        for (e, l) in c.exprs.iter().zip(&c.leading) {
            let lead = jet_text(l, m, Style::Dsl)?;
            let _ = writeln!(out, "  {} = 0; leading {lead}", wrapped(e, m, "    ")?);
        }
        out.push_str("}\n");
    }
    for g in &m.generators {
        generator_block(&mut out, g, m)?;
    }
    if let Some(j) = &m.jmap {
        out.push_str("\njmap {\n");
        for (c, e) in j.iter().enumerate() {
            let lhs = field_ref(m, Bundle::Eps, c)?;
            let _ = writeln!(out, "  {lhs} = {}", wrapped(e, m, "    ")?);
        }
        out.push_str("}\n");
    }
    Ok(out)
}
