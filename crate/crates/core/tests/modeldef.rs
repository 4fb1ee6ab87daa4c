use std::path::PathBuf;

use jetvar::modeldef::{latex_expr, parse_expr, parse_model, render_expr, render_model};
use jetvar::models::{build, BuiltinKind, BuiltinModelId};
use jetvar::symexpr::{Atom, Expr, FunDeps, FunId};
use jetvar::JetError;

fn shipped(name: &str) -> String {
    let path: PathBuf = [
        env!("CARGO_MANIFEST_DIR"),
        "..",
        "..",
        "models",
        &format!("{name}.jv"),
    ]
    .iter()
    .collect();
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn shipped_files_match_the_builtins() {
    for kind in BuiltinKind::ALL {
        let parsed = parse_model(&shipped(kind.name())).unwrap();
        let built = build(BuiltinModelId::new(kind, 4).unwrap());
        assert_eq!(parsed, built, "{kind}");
    }
}

#[test]
fn rendered_builtins_parse_back() {
    for kind in BuiltinKind::ALL {
        for n in [2, 3] {
            let m = build(BuiltinModelId::new(kind, n).unwrap());
            let text = render_model(&m).unwrap();
            let back = parse_model(&text).unwrap_or_else(|e| panic!("{kind} n={n}: {e}"));
            assert_eq!(back, m, "{kind} n={n}");
        }
    }
}

#[test]
fn latex_parses_back() {
    let m = build(BuiltinModelId::new(BuiltinKind::ChargedFluid, 3).unwrap());
    let mut exprs: Vec<Expr> = m.lagrangian.iter().map(|t| t.expr.clone()).collect();
    exprs.extend(m.parametrization.delta.iter().cloned());
    exprs.extend(m.jmap.clone().unwrap());
    for e in exprs {
        let tex = latex_expr(&e, &m).unwrap();
        assert_eq!(parse_expr(&tex, &m).unwrap(), e, "{tex}");
        let dsl = render_expr(&e, &m).unwrap();
        assert_eq!(parse_expr(&dsl, &m).unwrap(), e, "{dsl}");
    }
}

#[test]
fn latex_uses_familiar_notation() {
    let m = build(BuiltinModelId::new(BuiltinKind::ChargedFluid, 2).unwrap());
    let e = parse_expr("-3/4 * sqrtg * kappa^-1 * g[0,1;1]^2 + rho*q", &m).unwrap();
    let tex = latex_expr(&e, &m).unwrap();
    assert!(tex.contains("\\frac{3}{4}"), "{tex}");
    assert!(tex.contains("\\sqrt{|g|}"), "{tex}");
    assert!(tex.contains("\\kappa^{-1}"), "{tex}");
    assert!(tex.contains("g_{0,1;1}^{2}"), "{tex}");
}

#[test]
fn abstract_functions_cannot_be_printed() {
    let m = build(BuiltinModelId::new(BuiltinKind::ScalarField, 2).unwrap());
    let f = Expr::atom(Atom::Fun(FunId::new(
        "L",
        FunDeps {
            x: false,
            comps: vec![],
            order: 0,
            n: 2,
        },
    )));
    assert!(matches!(latex_expr(&f, &m), Err(JetError::Validation(_))));
    assert!(matches!(
        render_model(&{
            let mut m2 = m.clone();
            m2.lagrangian[0].expr = f;
            m2
        }),
        Err(JetError::Validation(_))
    ));
}

fn syntax_at(src: &str) -> (usize, usize, Vec<String>) {
    match parse_model(src) {
        Err(JetError::Syntax {
            line,
            col,
            expected,
            ..
        }) => (line, col, expected),
        other => panic!("expected a syntax error, got {other:?}"),
    }
}

#[test]
fn syntax_errors_point_at_the_token() {
    let (line, col, expected) =
        syntax_at("model m\ndim 2\nfield phi : scalar\nlagrangian { phi[;0] * }\n");
    assert_eq!((line, col), (4, 24));
    assert!(expected.iter().any(|e| e == "identifier"), "{expected:?}");

    let (line, col, expected) = syntax_at("model m\ndim 2\nfield phi scalar\n");
    assert_eq!((line, col), (3, 11));
    assert_eq!(expected, vec!["`:`"]);

    let (line, _, expected) = syntax_at("model m\ndim 2\nfield phi : spinor\n");
    assert_eq!(line, 3);
    assert!(expected.iter().any(|e| e == "sym2"));

    let (line, col, _) = syntax_at("model m\ndim 2\nlagrange { 1 }\n");
    assert_eq!((line, col), (3, 1));
}

fn validation(src: &str) -> String {
    match parse_model(src) {
        Err(JetError::Validation(msg)) => msg,
        other => panic!("expected a validation error, got {other:?}"),
    }
}

const HEAD: &str = "model m\ndim 2\nfield phi : scalar\nfield V : vector\n";

#[test]
fn nonlinear_variation_is_rejected() {
    let src = format!(
        "{HEAD}lagrangian {{ phi[;0]^2 }}\nparametrization {{\n  eps e : scalar\n  eps W : vector\n  \
         delta phi = e^2\n  delta V[a] = W[a] for a in 0..n\n}}\n"
    );
    let msg = validation(&src);
    assert!(
        msg.starts_with("9:9:") && msg.contains("not linear"),
        "{msg}"
    );
}

#[test]
fn semantic_errors_are_reported() {
    let cases = [
        ("lagrangian { psi }", "unknown symbol `psi`"),
        ("lagrangian { phi[;0,0,1] }", "order 3"),
        ("lagrangian { sqrtg }", "metric"),
        ("lagrangian { V[0] / (V[0] + V[1]) }", "nonzero monomial"),
        ("lagrangian { V[2] }", "out of range"),
        ("lagrangian { xi[0] }", "generator jets"),
        ("lagrangian { phi }\nlagrangian { phi }", "defined twice"),
        ("param mu\nlagrangian { phi }", "reserved"),
        (
            "lagrangian { phi }\nparametrization {\n eps e : scalar\n eps W : vector\n delta phi = e\n}",
            "missing",
        ),
        (
            "lagrangian { phi }\nparametrization {\n eps e : scalar\n eps W : vector\n delta phi = e[;0,1]\n delta V[a] = W[a] for a in 0..n\n}",
            "parameter jets of order 2",
        ),
    ];
    for (body, needle) in cases {
        let msg = validation(&format!("{HEAD}{body}\n"));
        assert!(msg.contains(needle), "{body}: {msg}");
    }
}

#[test]
fn missing_header_statements() {
    assert!(validation("dim 2\nfield phi : scalar\nlagrangian { phi }\n").contains("model"));
    assert!(validation("model m\nfield phi : scalar\nlagrangian { phi }\n").contains("dim"));
    assert!(validation("model m\ndim 5\nfield phi : scalar\n").contains("dimension"));
}

#[test]
fn builtin_functions_evaluate() {
    let m = build(BuiltinModelId::new(BuiltinKind::ChargedFluid, 2).unwrap());
    let e = parse_expr("d(g[0,0], 1) - g[0,0;1]", &m).unwrap();
    assert!(e.is_zero());
    let e = parse_expr("sum(a, 0, n, J[a;a])", &m).unwrap();
    assert_eq!(e, m.constraints[0].exprs[0]);
    let nabla = parse_expr("nabla(J[0], 0) + nabla(J[1], 1)", &m).unwrap();
    assert_eq!(
        jetvar::symexpr::normal_form(&nabla, &m.ctx),
        jetvar::symexpr::normal_form(&e, &m.ctx)
    );
    let r = parse_expr("curvature()", &m).unwrap();
    let trace = parse_expr("sum(a, 0, n, sum(b, 0, n, ginv[a,b] * ricci(a, b)))", &m).unwrap();
    assert!(jetvar::symexpr::normal_form(&(&r - &trace), &m.ctx).is_zero());
}

#[test]
fn generator_items_and_lift_overrides() {
    let src = "model m\ndim 2\nfield g : sym2\nfield A : gauge\nlagrangian { sqrtg }\n\
               generator K {\n  xi[0] = 1\n  xi[1] = x[0]\n  zeta = 0\n  lift A[0] = 0\n}\n";
    let m = parse_model(src).unwrap();
    let k = m.generator("K").unwrap();
    assert_eq!(k.xi[0], Expr::int(1));
    assert_eq!(k.xi[1], Expr::atom(Atom::X(0)));
    assert_eq!(k.zeta, Some(Expr::zero()));
    assert_eq!(k.overrides.get(&3), Some(&Expr::zero()));
    assert_eq!(parse_model(&render_model(&m).unwrap()).unwrap(), m);
}
