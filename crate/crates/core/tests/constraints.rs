use jetvar::constraints::{check_adapted, vary};
use jetvar::modeldef::Parametrization;
use jetvar::models::charged_fluid;

#[test]
fn hydrodynamic_variations_preserve_conservation() {
    for n in 2..=4 {
        let m = charged_fluid(n);
        let c = &m.constraints[0];
        assert!(
            check_adapted(&m.parametrization, c, &m).unwrap().passed(),
            "n={n}"
        );
        let triv = Parametrization::trivial(&m.fields, n);
        assert!(!check_adapted(&triv, c, &m).unwrap().passed(), "n={n}");
    }
}

#[test]
fn variation_of_the_constraint_is_a_total_divergence() {
    let m = charged_fluid(3);
    let c = &m.constraints[0];
    let d = vary(&c.exprs[0], &m.parametrization.delta, &m.ctx).unwrap();
    assert!(!d.is_zero());
    assert!(c.reduce(&d, &m.ctx).unwrap().is_zero());
}
