//! Seeded random expressions for property tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::atom::{Atom, Sym};
use super::ctx::Ctx;
use super::expr::{Expr, ExprBuilder, Mono};
use super::index::{Bundle, Comp, JetVar, MultiIndex};
use crate::coeff::Q;

/// Shape of the generated polynomials.
#[derive(Clone, Debug)]
pub struct RandomSpec {
    pub bundle: Bundle,
    pub ncomp: usize,
    pub max_order: usize,
    pub terms: usize,
    pub max_degree: usize,
    /// Allow inverse metric, `sqrt|g|` and `rho` factors when the context has them.
    pub derived: bool,
    /// Allow base coordinates and the parameter `c`.
    pub explicit: bool,
}

impl Default for RandomSpec {
    fn default() -> RandomSpec {
        RandomSpec {
            bundle: Bundle::Field,
            ncomp: 2,
            max_order: 2,
            terms: 4,
            max_degree: 3,
            derived: false,
            explicit: true,
        }
    }
}

fn random_atom(rng: &mut ChaCha8Rng, ctx: &Ctx, spec: &RandomSpec) -> (Atom, i32) {
    let roll = rng.random_range(0..10);
    if spec.derived && ctx.metric.is_some() && roll < 2 {
        let a = rng.random_range(0..ctx.n);
        let b = rng.random_range(0..ctx.n);
        return (Atom::inv(a, b), 1);
    }
    if spec.derived && ctx.metric.is_some() && roll == 2 {
        let k = if rng.random_bool(0.5) { 1 } else { -1 };
        return (
            if ctx.density.is_some() && rng.random_bool(0.5) {
                Atom::Rho
            } else {
                Atom::SqrtG
            },
            k,
        );
    }
    if spec.explicit && roll == 3 {
        return (Atom::X(rng.random_range(0..ctx.n) as u8), 1);
    }
    if spec.explicit && roll == 4 {
        return (Atom::Param(Sym::new("c")), 1);
    }
    let order = rng.random_range(0..=spec.max_order);
    let dirs: Vec<usize> = (0..order).map(|_| rng.random_range(0..ctx.n)).collect();
    let comp = Comp {
        bundle: spec.bundle,
        index: rng.random_range(0..spec.ncomp) as u16,
    };
    (
        Atom::Jet(JetVar::new(comp, MultiIndex::from_dirs(&dirs))),
        1,
    )
}

/// Random polynomial with small integer coefficients.
pub fn random_expr(rng: &mut ChaCha8Rng, ctx: &Ctx, spec: &RandomSpec) -> Expr {
    let mut b = ExprBuilder::new();
    for _ in 0..spec.terms {
        let deg = rng.random_range(0..=spec.max_degree);
        let m = Mono::from_factors((0..deg).map(|_| random_atom(rng, ctx, spec)));
        let mut c = rng.random_range(-5..=5i64);
        if c == 0 {
            c = 1;
        }
        b.add_term(m, Q::int(c));
    }
    b.finish()
}

pub fn random_expr_seeded(seed: u64, ctx: &Ctx, spec: &RandomSpec) -> Expr {
    random_expr(&mut ChaCha8Rng::seed_from_u64(seed), ctx, spec)
}
