//! Reference formulas written in covariant form, and numeric comparison helpers.
#![allow(dead_code)]

use jetvar::coeff::Q;
use jetvar::modeldef::Model;
use jetvar::models::{charge, field_strength, kappa};
use jetvar::report::NumericSummary;
use jetvar::symexpr::eval::{eval_magnitude, rel_err};
use jetvar::symexpr::{
    eval_numeric, total_derivative, Atom, Ctx, Expr, Geometry, JetVar, MultiIndex, PointSampler,
};
use jetvar::Result;

pub fn s() -> Expr {
    Expr::atom(Atom::SqrtG)
}

pub fn rho() -> Expr {
    Expr::atom(Atom::Rho)
}

pub fn j(ctx: &Ctx, a: usize) -> Expr {
    Expr::jet(JetVar::base(ctx.j(a)))
}

/// `u^a = J^a / (rho sqrt|g|)`.
pub fn u_up(ctx: &Ctx, a: usize) -> Expr {
    &j(ctx, a) * &(&rho() * &s()).try_pow(-1).unwrap()
}

/// `u_a = g_{ab} u^b`.
pub fn u_down(ctx: &Ctx, a: usize) -> Expr {
    Expr::sum((0..ctx.n).map(|b| &ctx.g_expr(a, b) * &u_up(ctx, b)))
}

pub fn f_up(ctx: &Ctx, a0: usize, a: usize, b: usize) -> Expr {
    let n = ctx.n;
    let mut acc = Expr::zero();
    for c in 0..n {
        for d in 0..n {
            if c != d {
                acc = &acc + &(&(&ctx.ginv(a, c) * &ctx.ginv(b, d)) * &field_strength(a0, c, d));
            }
        }
    }
    acc
}

/// `F^{ac} F^b_c - 1/4 F^2 g^{ab}`.
pub fn h_em_up(ctx: &Ctx, a0: usize, a: usize, b: usize) -> Expr {
    let n = ctx.n;
    let mut ff = Expr::zero();
    let mut f2 = Expr::zero();
    for c in 0..n {
        for d in 0..n {
            ff = &ff + &(&(&f_up(ctx, a0, a, c) * &ctx.ginv(b, d)) * &field_strength(a0, d, c));
            f2 = &f2 + &(&f_up(ctx, a0, c, d) * &field_strength(a0, c, d));
        }
    }
    &ff - &(&f2 * &ctx.ginv(a, b)).scale(&Q::frac(1, 4))
}

/// `P g^{ab} - (mu + P) u^a u^b`.
pub fn h_f_up(ctx: &Ctx, a: usize, b: usize) -> Expr {
    let p = Expr::atom(Atom::Pressure);
    let mp = &Expr::atom(Atom::Mu) + &p;
    &(&p * &ctx.ginv(a, b)) - &(&(&mp * &u_up(ctx, a)) * &u_up(ctx, b))
}

/// Field equations of the charged fluid, one per parameter component
/// `(dg_{ab} with a <= b, dA_nu, X_nu)`. With `conservation` the term
/// proportional to `d_mu J^mu` in the `X` equations is included.
pub fn fluid_equations(m: &Model, conservation: bool) -> Result<Vec<Expr>> {
    let ctx = &m.ctx;
    let n = m.n;
    let a0 = m.field("A").unwrap().first;
    let a = |i: usize| m.y(a0 + i, MultiIndex::ZERO);
    let mut geo = Geometry::new(ctx);
    let half_s = s().scale(&Q::frac(1, 2));
    let grav = &s() * &kappa().try_pow(-1).unwrap();
    let mut out = Vec::new();
    for x in 0..n {
        for y in x..n {
            let c = Q::int(if x == y { 1 } else { 2 });
            let g = geo.einstein_upper(ctx, x, y)?;
            let matter = &h_em_up(ctx, a0, x, y) + &h_f_up(ctx, x, y);
            let e = &(&half_s * &matter) - &(&grav * &g).scale(&Q::frac(1, 2));
            out.push(e.scale(&c));
        }
    }
    for nu in 0..n {
        let mut e = &charge() * &j(ctx, nu);
        for mu in 0..n {
            e = &e + &total_derivative(&(&s() * &f_up(ctx, a0, mu, nu)), mu, ctx)?;
        }
        out.push(e);
    }
    let p = Expr::atom(Atom::Pressure);
    let mp = &Expr::atom(Atom::Mu) + &p;
    let phi = Expr::sum((0..n).map(|mu| Expr::jet(JetVar::new(ctx.j(mu), MultiIndex::unit(mu)))));
    for c in 0..n {
        let mut acc = Expr::zero();
        for nu in 0..n {
            let mut nabla = total_derivative(&u_down(ctx, c), nu, ctx)?;
            for l in 0..n {
                nabla = &nabla - &(geo.christoffel(l, nu, c) * &u_down(ctx, l));
            }
            acc = &acc + &(&(&mp * &u_up(ctx, nu)) * &nabla);
            let mut proj = &u_down(ctx, c) * &u_up(ctx, nu);
            if nu == c {
                proj = &proj - &Expr::int(1);
            }
            acc = &acc + &(&proj * &total_derivative(&p, nu, ctx)?);
        }
        let mut e = -&(&s() * &acc);
        for nu in 0..n {
            e = &e + &(&(&charge() * &j(ctx, nu)) * &field_strength(a0, nu, c));
        }
        if conservation {
            let w =
                &(&(&charge() * &a(c)) - &(&(&mp * &rho().try_pow(-1).unwrap()) * &u_down(ctx, c)));
            e = &e + &(w * &phi);
        }
        out.push(e);
    }
    Ok(out)
}

/// Compares `a[i]` with `b[i]` at `samples` seeded random jet points. When the
/// model has constraints the points are projected onto them first.
pub fn compare_numeric(
    a: &[Expr],
    b: &[Expr],
    m: &Model,
    samples: usize,
    seed: u64,
) -> Result<NumericSummary> {
    let ctx = &m.ctx;
    let mut vars = std::collections::BTreeSet::new();
    for e in a.iter().chain(b) {
        vars.extend(e.jet_vars());
    }
    let mut sampler = PointSampler::new(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let mut p = sampler.sample(ctx, &vars, &m.params);
        for c in &m.constraints {
            c.project_point(&mut p, &mut sampler, ctx)?;
        }
        for (x, y) in a.iter().zip(b) {
            let vx = eval_numeric(x, &p, ctx)?;
            let vy = eval_numeric(y, &p, ctx)?;
            let scale = eval_magnitude(x, &p, ctx)?.max(eval_magnitude(y, &p, ctx)?);
            worst = worst.max(rel_err(vx, vy, 1e-6 * scale.max(1e-12)));
        }
    }
    Ok(NumericSummary {
        samples,
        max_rel_err: worst,
        tolerance: 1e-9,
    })
}
