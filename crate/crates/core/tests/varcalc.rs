mod common;

use jetvar::models::{maxwell, scalar_field};
use jetvar::symexpr::{normal_form, total_derivative, Comp, Expr, JetVar, MultiIndex};
use jetvar::varcalc::{
    first_variation_residue, p_euler_lagrange, p_first_variation, p_first_variation_direct,
    SplitOrder,
};

#[test]
fn free_scalar_field_gives_the_laplacian() {
    for n in 1..=4 {
        let m = scalar_field(n);
        let el = p_euler_lagrange(&m).unwrap();
        let lap = Expr::sum((0..n).map(|mu| {
            Expr::jet(JetVar::new(
                Comp::field(0),
                MultiIndex::from_dirs(&[mu, mu]),
            ))
        }));
        assert_eq!(el.equations[0], -&lap);
    }
}

#[test]
fn maxwell_equations_in_curved_space() {
    let n = 3;
    let m = maxwell(n);
    let el = p_euler_lagrange(&m).unwrap();
    let a0 = m.field("A").unwrap().first;
    let da0 = m.parametrization.eps[1].first;
    for nu in 0..n {
        let mut want = Expr::zero();
        for mu in 0..n {
            let t = &common::s() * &common::f_up(&m.ctx, a0, mu, nu);
            want = &want + &total_derivative(&t, mu, &m.ctx).unwrap();
        }
        let d = &el.equations[da0 + nu] - &want;
        assert!(normal_form(&d, &m.ctx).is_zero(), "component {nu}");
    }
}

#[test]
fn first_variation_formula_holds_for_the_fluid() {
    let m = jetvar::models::charged_fluid(2);
    for t in &m.lagrangian {
        let fv = p_first_variation(&t.expr, &m.parametrization, &m.ctx).unwrap();
        let r = first_variation_residue(&t.expr, &m.parametrization, &fv, &m.ctx).unwrap();
        assert!(normal_form(&r, &m.ctx).is_zero(), "{}", t.name);
    }
}

#[test]
fn both_routes_agree_on_the_fluid_equations() {
    let m = jetvar::models::charged_fluid(2);
    let l = m.lagrangian_total();
    let a = p_first_variation(&l, &m.parametrization, &m.ctx).unwrap();
    let b =
        p_first_variation_direct(&l, &m.parametrization, SplitOrder::Random(5), &m.ctx).unwrap();
    for i in 0..m.neps() {
        assert!(
            normal_form(&(&a.equation(i) - &b.equation(i)), &m.ctx).is_zero(),
            "equation {i}"
        );
    }
}

#[test]
fn order_bound_is_respected() {
    let m = jetvar::models::charged_fluid(3);
    let el = p_euler_lagrange(&m).unwrap();
    let (k, l, s) = (
        m.lagrangian_order(),
        m.parametrization.rank,
        m.parametrization.order,
    );
    let bound = 2 * k + l + s;
    for e in &el.equations {
        assert!(e.max_order(jetvar::symexpr::Bundle::Field).unwrap_or(0) <= bound);
    }
}
