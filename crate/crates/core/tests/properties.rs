use std::collections::BTreeMap;

use proptest::prelude::*;

use jetvar::coeff::Q;
use jetvar::constraints::Constraint;
use jetvar::modeldef::{context_for, layout, FieldKind};
use jetvar::symexpr::expr::canonicalize;
use jetvar::symexpr::random::{random_expr_seeded, RandomSpec};
use jetvar::symexpr::{
    normal_form, partial, total_derivative, BaseSet, Bundle, Comp, Ctx, Expr, JetVar, MultiIndex,
};
use jetvar::varcalc::{
    div_components, first_variation, reduce_codegree, split, SplitOrder, VarMorphism,
};

const N: usize = 3;

fn flat() -> Ctx {
    Ctx::new(N)
}

fn curved() -> Ctx {
    context_for(
        N,
        &layout(N, &[("g", FieldKind::Sym2), ("y", FieldKind::Scalar)]),
    )
}

fn flat_expr(seed: u64) -> Expr {
    let spec = RandomSpec {
        ncomp: 2,
        max_order: 2,
        ..RandomSpec::default()
    };
    random_expr_seeded(seed, &flat(), &spec)
}

fn curved_expr(seed: u64) -> Expr {
    let spec = RandomSpec {
        ncomp: 7,
        max_order: 1,
        terms: 3,
        derived: true,
        ..RandomSpec::default()
    };
    random_expr_seeded(seed, &curved(), &spec)
}

fn conservation() -> (Ctx, Constraint) {
    let ctx = Ctx::new(N).with_density(0);
    let phi = Expr::sum((0..N).map(|m| Expr::jet(JetVar::new(ctx.j(m), MultiIndex::unit(m)))));
    let c = Constraint::new(vec![phi], vec![None], false, &ctx).unwrap();
    (ctx, c)
}

fn density_expr(seed: u64, ctx: &Ctx) -> Expr {
    let spec = RandomSpec {
        ncomp: N,
        max_order: 2,
        ..RandomSpec::default()
    };
    random_expr_seeded(seed, ctx, &spec)
}

fn var() -> impl Strategy<Value = JetVar> {
    (0..2u16, prop::collection::vec(0..N, 0..=3))
        .prop_map(|(c, d)| JetVar::new(Comp::field(c as usize), MultiIndex::from_dirs(&d)))
}

fn rebuild(s: &jetvar::varcalc::Split, ctx: &Ctx) -> BTreeMap<BaseSet, Expr> {
    let mut out = s.volume.pair();
    for (t, e) in div_components(&s.boundary.pair(), ctx.n, ctx).unwrap() {
        let slot = out.entry(t).or_default();
        *slot = &*slot + &e;
    }
    out.retain(|_, e| !e.is_zero());
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn canonicalize_is_idempotent(seed in any::<u64>()) {
        let e = curved_expr(seed);
        let c = canonicalize(&e);
        prop_assert_eq!(canonicalize(&c), c);
    }

    #[test]
    fn normal_form_is_idempotent(seed in any::<u64>()) {
        let ctx = curved();
        let nf = normal_form(&curved_expr(seed), &ctx);
        prop_assert_eq!(normal_form(&nf, &ctx), nf);
    }

    #[test]
    fn total_derivatives_commute(seed in any::<u64>(), mu in 0..N, nu in 0..N) {
        let ctx = curved();
        let e = curved_expr(seed);
        let a = total_derivative(&total_derivative(&e, mu, &ctx).unwrap(), nu, &ctx).unwrap();
        let b = total_derivative(&total_derivative(&e, nu, &ctx).unwrap(), mu, &ctx).unwrap();
        prop_assert!(normal_form(&(&a - &b), &ctx).is_zero());
    }

    #[test]
    fn partial_and_total_derivative_commutator(seed in any::<u64>(), mu in 0..N, v in var()) {
        let ctx = flat();
        let f = flat_expr(seed);
        let lhs = &partial(&total_derivative(&f, mu, &ctx).unwrap(), &v, &ctx)
            - &total_derivative(&partial(&f, &v, &ctx), mu, &ctx).unwrap();
        let rhs = match v.idx.minus(mu) {
            Some(b) => partial(&f, &v.with_idx(b), &ctx),
            None => Expr::zero(),
        };
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn total_derivative_is_linear(a in any::<u64>(), b in any::<u64>(), k in -7i64..7, mu in 0..N) {
        let ctx = curved();
        let (x, y) = (curved_expr(a), curved_expr(b));
        let lhs = total_derivative(&(&x + &y.scale(&Q::int(k))), mu, &ctx).unwrap();
        let rhs = &total_derivative(&x, mu, &ctx).unwrap()
            + &total_derivative(&y, mu, &ctx).unwrap().scale(&Q::int(k));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn split_reconstructs_the_variation(seed in any::<u64>(), order in any::<u64>()) {
        let ctx = flat();
        let dl = first_variation(&flat_expr(seed), &ctx);
        let s = split(&dl, SplitOrder::Random(order), &ctx).unwrap();
        prop_assert_eq!(s.volume.rank(), 0);
        prop_assert_eq!(rebuild(&s, &ctx), dl.pair());
    }

    #[test]
    fn volume_part_is_independent_of_the_order(seed in any::<u64>(), order in any::<u64>()) {
        let ctx = flat();
        let dl = first_variation(&flat_expr(seed), &ctx);
        let a = split(&dl, SplitOrder::Lexicographic, &ctx).unwrap();
        let b = split(&dl, SplitOrder::Random(order), &ctx).unwrap();
        prop_assert_eq!(a.volume, b.volume);
    }

    #[test]
    fn variation_of_a_divergence_has_no_volume(seed in any::<u64>()) {
        let ctx = flat().with_ceiling(6);
        let l = Expr::sum((0..N).map(|m| {
            total_derivative(&flat_expr(seed.wrapping_add(m as u64)), m, &ctx).unwrap()
        }));
        let s = split(&first_variation(&l, &ctx), SplitOrder::Lexicographic, &ctx).unwrap();
        prop_assert!(s.volume.is_zero());
    }

    #[test]
    fn split_is_linear(a in any::<u64>(), b in any::<u64>(), k in -5i64..5) {
        let ctx = flat();
        let (x, y) = (flat_expr(a), flat_expr(b));
        let k = Q::int(k);
        let lhs = split(&first_variation(&(&x + &y.scale(&k)), &ctx), SplitOrder::Lexicographic, &ctx).unwrap();
        let sx = split(&first_variation(&x, &ctx), SplitOrder::Lexicographic, &ctx).unwrap();
        let sy = split(&first_variation(&y, &ctx), SplitOrder::Lexicographic, &ctx).unwrap();
        prop_assert_eq!(lhs.volume, sx.volume.add(&sy.volume.scale(&k)));
    }

    #[test]
    fn divergence_of_a_divergence_vanishes(seed in any::<u64>()) {
        let ctx = flat();
        let parts: BTreeMap<BaseSet, Expr> = BaseSet::all_of_size(N, 2)
            .into_iter()
            .enumerate()
            .map(|(i, t)| (t, flat_expr(seed.wrapping_add(i as u64))))
            .collect();
        let once = div_components(&parts, N, &ctx).unwrap();
        let twice = div_components(&once, N, &ctx).unwrap();
        prop_assert!(twice.values().all(Expr::is_zero));
    }

    #[test]
    fn codegree_reduction_reconstructs(seed in any::<u64>()) {
        let ctx = flat();
        let mut m = VarMorphism::zero(1, Bundle::Gen);
        for t in 0..N {
            for (i, idx) in MultiIndex::all_up_to(N, 2).into_iter().enumerate() {
                if (seed >> ((t * 10 + i) % 64)) & 1 == 1 {
                    m.add_term((0, idx, BaseSet::single(t)), &flat_expr(seed ^ (i as u64 + 31 * t as u64)));
                }
            }
        }
        let s = reduce_codegree(&m, &ctx).unwrap();
        prop_assert_eq!(rebuild(&s, &ctx), m.pair());
        let again = reduce_codegree(&s.volume, &ctx).unwrap();
        prop_assert_eq!(again.volume, s.volume);
        prop_assert!(again.boundary.is_zero());
    }

    #[test]
    fn constraint_reduction_is_a_homomorphism(a in any::<u64>(), b in any::<u64>()) {
        let (ctx, c) = conservation();
        let (x, y) = (density_expr(a, &ctx), density_expr(b, &ctx));
        let r = |e: &Expr| c.reduce(e, &ctx).unwrap();
        prop_assert_eq!(r(&(&x + &y)), &r(&x) + &r(&y));
        prop_assert_eq!(r(&(&x * &y)), &r(&x) * &r(&y));
    }

    #[test]
    fn constraint_reduction_is_idempotent(seed in any::<u64>()) {
        let (ctx, c) = conservation();
        let once = c.reduce(&density_expr(seed, &ctx), &ctx).unwrap();
        prop_assert_eq!(c.reduce(&once, &ctx).unwrap(), once);
    }

    #[test]
    fn prolonged_constraint_multiples_reduce_to_zero(seed in any::<u64>(), mu in 0..N) {
        let (ctx, c) = conservation();
        let d = total_derivative(&c.exprs[0], mu, &ctx).unwrap();
        let e = &density_expr(seed, &ctx) * &d;
        prop_assert!(c.reduce(&e, &ctx).unwrap().is_zero());
    }
}
