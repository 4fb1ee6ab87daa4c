//! Acceptance suite: one line per criterion, nonzero exit status on any failure.

mod common;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use jetvar::coeff::Q;
use jetvar::constraints::check_adapted;
use jetvar::modeldef::{layout, FieldKind, LagrangianTerm, Model, Parametrization};
use jetvar::models::{charged_fluid, fluid_identities, hilbert, scalar_field};
use jetvar::symexpr::eval::eval_magnitude;
use jetvar::symexpr::expr::canonicalize;
use jetvar::symexpr::random::{random_expr_seeded, RandomSpec};
use jetvar::symexpr::{
    eval_numeric, normal_form, partial, total_derivative, Atom, BaseSet, Comp, Ctx, Expr, FunDeps,
    FunId, Geometry, JetPoint, JetVar, MultiIndex, PointSampler, Sym,
};
use jetvar::symmetry::{
    check_covariance, check_offshell_identity, noether_current_total, settle, superpotential,
    xi_jet, zeta_jet,
};
use jetvar::varcalc::{
    div_components, first_variation, p_euler_lagrange, p_first_variation, p_first_variation_direct,
    split, SplitOrder,
};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn eps_jet(a: usize, idx: MultiIndex) -> Expr {
    Expr::jet(JetVar::new(Comp::eps(a), idx))
}

fn field_jet(a: usize, idx: MultiIndex) -> Expr {
    Expr::jet(JetVar::new(Comp::field(a), idx))
}

/// Generic first-order Lagrangian, two field components, two parameters, n = 2.
fn criterion_1() -> Outcome {
    let n = 2;
    let fields = layout(n, &[("y", FieldKind::Scalar), ("z", FieldKind::Scalar)]);
    let ctx = jetvar::modeldef::context_for(n, &fields);
    let comps = vec![Comp::field(0), Comp::field(1)];
    let deps = |order| FunDeps {
        x: true,
        comps: comps.clone(),
        order,
        n: n as u8,
    };
    let l = Expr::atom(Atom::Fun(FunId::new("L", deps(1))));
    let p0 = |a: usize, b: usize| Expr::atom(Atom::Fun(FunId::new(&format!("p{a}{b}"), deps(0))));
    let p1 = |a: usize, b: usize, mu: usize| {
        Expr::atom(Atom::Fun(FunId::new(&format!("p{a}{b}^{mu}"), deps(0))))
    };
    let neps = 2;
    let delta: Vec<Expr> = (0..2)
        .map(|a| {
            Expr::sum((0..neps).map(|b| {
                let mut t = &p0(a, b) * &eps_jet(b, MultiIndex::ZERO);
                for mu in 0..n {
                    t = &t + &(&p1(a, b, mu) * &eps_jet(b, MultiIndex::unit(mu)));
                }
                t
            }))
        })
        .collect();
    let eps = layout(n, &[("e", FieldKind::Scalar), ("f", FieldKind::Scalar)]);
    let mut p = Parametrization {
        eps,
        delta,
        order: 0,
        rank: 0,
    };
    p.measure();
    ensure(
        p.order == 0 && p.rank == 1,
        "parametrization should have rank 1",
    )?;

    let mut el = Vec::new();
    for a in 0..2 {
        let mut e = partial(&l, &JetVar::base(Comp::field(a)), &ctx);
        for nu in 0..n {
            let d = partial(&l, &JetVar::new(Comp::field(a), MultiIndex::unit(nu)), &ctx);
            e = &e - &total_derivative(&d, nu, &ctx).map_err(err)?;
        }
        el.push(e);
    }
    let mut e_expect = Expr::zero();
    let mut f_expect: Vec<Expr> = vec![Expr::zero(); n];
    for b in 0..neps {
        let eb = eps_jet(b, MultiIndex::ZERO);
        let mut coeff = Expr::zero();
        for a in 0..2 {
            coeff = &coeff + &(&el[a] * &p0(a, b));
            for mu in 0..n {
                coeff =
                    &coeff - &total_derivative(&(&el[a] * &p1(a, b, mu)), mu, &ctx).map_err(err)?;
            }
        }
        e_expect = &e_expect + &(&coeff * &eb);
        for mu in 0..n {
            let mut f = Expr::zero();
            for a in 0..2 {
                let lmu = partial(&l, &JetVar::new(Comp::field(a), MultiIndex::unit(mu)), &ctx);
                let mut pv = &p0(a, b) * &eb;
                for nu in 0..n {
                    pv = &pv + &(&p1(a, b, nu) * &eps_jet(b, MultiIndex::unit(nu)));
                }
                f = &f + &(&(&el[a] * &p1(a, b, mu)) * &eb);
                f = &f + &(&lmu * &pv);
            }
            f_expect[mu] = &f_expect[mu] + &f;
        }
    }
    let fv = p_first_variation(&l, &p, &ctx).map_err(err)?;
    ensure(
        fv.euler.component(BaseSet::EMPTY) == e_expect,
        "E differs from the closed form",
    )?;
    for mu in 0..n {
        ensure(
            fv.boundary.component(BaseSet::single(mu)) == f_expect[mu],
            format!("F^{mu} differs from the closed form"),
        )?;
    }
    let direct = p_first_variation_direct(&l, &p, SplitOrder::Random(17), &ctx).map_err(err)?;
    ensure(direct.euler == fv.euler, "direct route gives a different E")?;
    Ok("E and F equal the closed forms; direct route agrees on E".into())
}

fn fluid_check(n: usize) -> Outcome {
    let m = charged_fluid(n);
    let el = p_euler_lagrange(&m).map_err(err)?;
    let full = common::fluid_equations(&m, true).map_err(err)?;
    let short = common::fluid_equations(&m, false).map_err(err)?;
    ensure(
        el.equations.len() == full.len(),
        "wrong number of equations",
    )?;
    for (i, (e, x)) in el.equations.iter().zip(&full).enumerate() {
        ensure(
            normal_form(&(e - x), &m.ctx).is_zero(),
            format!("equation {i} differs"),
        )?;
    }
    for (i, (e, x)) in el.reduced.iter().zip(&short).enumerate() {
        ensure(
            settle(&(e - x), &m).map_err(err)?.is_zero(),
            format!("reduced equation {i} differs"),
        )?;
    }
    let num =
        common::compare_numeric(&el.reduced, &short, &m, 20, 0xf1u64 + n as u64).map_err(err)?;
    ensure(
        num.pass(),
        format!("numeric max rel err {:e}", num.max_rel_err),
    )?;
    Ok(format!(
        "{} equations, max rel err {:.1e}",
        el.equations.len(),
        num.max_rel_err
    ))
}

fn criterion_2() -> Outcome {
    let t = Instant::now();
    let d3 = fluid_check(3)?;
    let t3 = t.elapsed();
    ensure(t3 < Duration::from_secs(30), format!("n=3 took {t3:.1?}"))?;
    let t = Instant::now();
    let d4 = fluid_check(4)?;
    Ok(format!(
        "n=3: {d3} in {t3:.1?}; n=4: {d4} in {:.1?}",
        t.elapsed()
    ))
}

/// Second-order central differences on a periodic grid with `pts` points per axis.
struct Grid {
    n: usize,
    pts: usize,
    h: f64,
}

impl Grid {
    fn len(&self) -> usize {
        self.pts.pow(self.n as u32)
    }

    fn shift(&self, i: usize, mu: usize, s: isize) -> usize {
        let stride = self.pts.pow(mu as u32);
        let c = (i / stride) % self.pts;
        let c2 = (c as isize + s).rem_euclid(self.pts as isize) as usize;
        i - c * stride + c2 * stride
    }

    fn d(&self, f: &[f64], mu: usize) -> Vec<f64> {
        (0..f.len())
            .map(|i| (f[self.shift(i, mu, 1)] - f[self.shift(i, mu, -1)]) / (2.0 * self.h))
            .collect()
    }
}

/// Engine field equation against the gradient of the discretized action,
/// `L = 1/2 |d phi|^2 + 3/4 phi^2 + 1/12 phi^4`.
fn criterion_3() -> Outcome {
    let (m2, lam) = (Q::frac(3, 4), Q::frac(1, 12));
    let mut worst: f64 = 0.0;
    for n in 1..=2 {
        let model = scalar_field(n);
        let y = field_jet(0, MultiIndex::ZERO);
        let pot = &(&y * &y).scale(&m2) + &y.pow(4).scale(&lam);
        let l = &model.lagrangian_total() + &pot;
        let fv = p_first_variation(&l, &model.parametrization, &model.ctx).map_err(err)?;
        let eq = fv.equation(0);
        let grid = Grid {
            n,
            pts: 16,
            h: 1.0 / 16.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3 + n as u64);
        let phi: Vec<f64> = (0..grid.len())
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let (m2f, lamf) = (m2.to_f64(), lam.to_f64());
        let action = |f: &[f64]| -> f64 {
            let mut s = 0.0;
            for mu in 0..n {
                s += grid.d(f, mu).iter().map(|v| 0.5 * v * v).sum::<f64>();
            }
            s += f
                .iter()
                .map(|v| m2f * v * v + lamf * v.powi(4))
                .sum::<f64>();
            s * grid.h.powi(n as i32)
        };
        let dphi: Vec<Vec<f64>> = (0..n).map(|mu| grid.d(&phi, mu)).collect();
        let ddphi: Vec<Vec<Vec<f64>>> = (0..n)
            .map(|mu| (0..n).map(|nu| grid.d(&dphi[mu], nu)).collect())
            .collect();
        let step = 1e-4;
        let mut num = 0.0f64;
        let mut den = 0.0f64;
        for i in 0..grid.len() {
            let mut p = JetPoint::default();
            p.jets.insert(JetVar::base(Comp::field(0)), phi[i]);
            for mu in 0..n {
                p.jets.insert(
                    JetVar::new(Comp::field(0), MultiIndex::unit(mu)),
                    dphi[mu][i],
                );
                for nu in 0..n {
                    p.jets.insert(
                        JetVar::new(Comp::field(0), MultiIndex::from_dirs(&[mu, nu])),
                        ddphi[mu][nu][i],
                    );
                }
            }
            let engine = eval_numeric(&eq, &p, &model.ctx).map_err(err)?;
            let mut up = phi.clone();
            let mut dn = phi.clone();
            up[i] += step;
            dn[i] -= step;
            let grad = (action(&up) - action(&dn)) / (2.0 * step) / grid.h.powi(n as i32);
            num = num.max((engine - grad).abs());
            den = den.max(grad.abs());
        }
        worst = worst.max(num / den);
    }
    ensure(worst < 1e-4, format!("relative error {worst:e}"))?;
    Ok(format!("16^n grids, n=1,2: max rel err {worst:.1e}"))
}

fn criterion_4() -> Outcome {
    let m = hilbert(2);
    let el = p_euler_lagrange(&m).map_err(err)?;
    for (i, e) in el.equations.iter().enumerate() {
        ensure(
            normal_form(e, &m.ctx).is_zero(),
            format!("component {i} is nonzero"),
        )?;
    }
    Ok(format!("{} components vanish", el.equations.len()))
}

/// `d_a T^{ab} + Gamma^b_{ac} T^{ac}` for the Hilbert field equations at n = 3.
fn criterion_5() -> Outcome {
    let n = 3;
    let m = hilbert(n);
    let ctx: &Ctx = &m.ctx;
    let el = p_euler_lagrange(&m).map_err(err)?;
    let decl = &m.parametrization.eps[0];
    let t = |a: usize, b: usize| -> Expr {
        let e = &el.equations[decl.offset(n, &[a, b]).unwrap()];
        if a == b {
            e.clone()
        } else {
            e.scale(&Q::frac(1, 2))
        }
    };
    let geo = Geometry::new(ctx);
    let mut divs = Vec::new();
    for b in 0..n {
        let mut acc = Expr::zero();
        for a in 0..n {
            acc = &acc + &total_derivative(&t(a, b), a, ctx).map_err(err)?;
            for c in 0..n {
                acc = &acc + &(geo.christoffel(b, a, c) * &t(a, c));
            }
        }
        divs.push(acc);
    }
    let exact = divs.iter().filter(|d| d.is_zero()).count();
    let mut vars = std::collections::BTreeSet::new();
    for d in &divs {
        vars.extend(d.jet_vars());
    }
    let mut sampler = PointSampler::new(0xb1a);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let p = sampler.sample(ctx, &vars, &m.params);
        for d in &divs {
            let v = eval_numeric(d, &p, ctx).map_err(err)?;
            let mag = eval_magnitude(d, &p, ctx).map_err(err)?;
            if mag > 0.0 {
                worst = worst.max(v.abs() / mag);
            }
        }
    }
    ensure(worst < 1e-8, format!("relative residue {worst:e}"))?;
    Ok(format!(
        "20 points, max relative residue {worst:.1e}; {exact} of {n} components vanish identically"
    ))
}

fn criterion_6() -> Outcome {
    let m = charged_fluid(4);
    let g = m.generators[0].clone();
    for t in &m.lagrangian {
        let c = check_covariance(&m, &t.expr, &g).map_err(err)?;
        ensure(c.covariant(), format!("{} is not covariant", t.name))?;
    }
    let mut free = m.clone();
    free.constraints.clear();
    let l_int = m.term("L_int").unwrap();
    let c = check_covariance(&free, l_int, &g).map_err(err)?;
    ensure(!c.covariant(), "L_int is covariant without the constraint")?;
    let mut broken = g.clone();
    broken
        .overrides
        .insert(m.field("A").unwrap().first, Expr::zero());
    let c = check_covariance(&m, m.term("L_EM").unwrap(), &broken).map_err(err)?;
    ensure(!c.covariant(), "broken lift is covariant")?;
    Ok(
        "L_H, L_EM, L_F, L_int covariant on the constraint; L_int off it and broken lift are not"
            .into(),
    )
}

fn criterion_7() -> Outcome {
    let mut detail = Vec::new();
    for n in [3, 4] {
        let t = Instant::now();
        let m = charged_fluid(n);
        let nc = noether_current_total(&m, &m.generators[0]).map_err(err)?;
        let r = check_offshell_identity(&m, &nc).map_err(err)?;
        ensure(
            r.is_zero(),
            format!("n={n}: residue with {} terms", r.len()),
        )?;
        detail.push(format!("n={n} in {:.1?}", t.elapsed()));
    }
    Ok(format!("identity holds: {}", detail.join(", ")))
}

fn criterion_8() -> Outcome {
    let n = 4;
    let m = charged_fluid(n);
    let ctx: &Ctx = &m.ctx;
    let g = m.generators[0].clone();
    let nc = noether_current_total(&m, &g).map_err(err)?;
    let el = p_euler_lagrange(&m).map_err(err)?;
    let eqs: BTreeMap<usize, Expr> = el.reduced.iter().cloned().enumerate().collect();
    let sp = superpotential(&m, &nc, &g, &eqs).map_err(err)?;
    let a0 = m.field("A").unwrap().first;
    let da0 = m.parametrization.eps[1].first;
    let mut ax = zeta_jet(n, MultiIndex::ZERO);
    for r in 0..n {
        ax = &ax + &(&m.y(a0 + r, MultiIndex::ZERO) * &xi_jet(r, MultiIndex::ZERO));
    }
    let q = Atom::Param(Sym::new("q"));
    for a in 0..n {
        for mu in a + 1..n {
            let key = BaseSet(((1 << a) | (1 << mu)) as u8);
            let got = sp.u.get(&key).cloned().unwrap_or_default();
            let want = -&(&(&common::s() * &common::f_up(ctx, a0, a, mu)) * &ax);
            ensure(
                normal_form(&(&got - &want), ctx).is_zero(),
                format!("U^{{{a}{mu}}} differs"),
            )?;
        }
    }
    ensure(
        sp.u.values().all(|e| !e.contains_atom(&q)),
        "U depends on the charge",
    )?;
    for a in 0..n {
        ensure(
            settle(&(&sp.onshell[a] + &el.reduced[da0 + a]), &m)
                .map_err(err)?
                .is_zero(),
            format!("W^{a} is not minus the Maxwell equation"),
        )?;
        ensure(
            sp.multipliers[a] == vec![(da0 + a, Expr::int(-1))],
            format!("multiplier of W^{a}: {:?}", sp.multipliers[a]),
        )?;
    }
    Ok("U = -sqrt|g| F^{am} (zeta + A.xi) for a<m, charge-free; W = -Maxwell".into())
}

fn criterion_9() -> Outcome {
    let m = charged_fluid(4);
    let c = &m.constraints[0];
    let hydro = check_adapted(&m.parametrization, c, &m).map_err(err)?;
    ensure(
        hydro.passed(),
        "hydrodynamic parametrization is not adapted",
    )?;
    let trivial = Parametrization::trivial(&m.fields, m.n);
    let t = check_adapted(&trivial, c, &m).map_err(err)?;
    ensure(!t.passed(), "trivial parametrization passes")?;
    Ok("hydrodynamic adapted, trivial rejected".into())
}

fn criterion_10() -> Outcome {
    let m = charged_fluid(4);
    let j0 = m.field("J").unwrap().first;
    let phi = Expr::sum((0..m.n).map(|mu| field_jet(j0 + mu, MultiIndex::unit(mu))));
    let c = Sym::new("c");
    let mut m2: Model = m.clone();
    m2.params.push(c.clone());
    m2.lagrangian.push(LagrangianTerm {
        name: "L_c".into(),
        expr: &Expr::atom(Atom::Param(c)) * &phi,
    });
    let a = p_euler_lagrange(&m).map_err(err)?;
    let b = p_euler_lagrange(&m2).map_err(err)?;
    for (i, (x, y)) in a.reduced.iter().zip(&b.reduced).enumerate() {
        ensure(
            settle(&(x - y), &m).map_err(err)?.is_zero(),
            format!("equation {i} changed"),
        )?;
    }
    Ok(format!("{} reduced equations unchanged", a.reduced.len()))
}

fn criterion_11() -> Outcome {
    for n in 2..=4 {
        let r = fluid_identities(&charged_fluid(n)).map_err(err)?;
        ensure(r.passed(), format!("n={n}: {:?}", r.failures()))?;
    }
    Ok("rho mu' = mu + P, rho d(mu') = dP, dust limit".into())
}

const CASES: u64 = 100;

fn metric_ctx(n: usize) -> Ctx {
    let fields = layout(n, &[("g", FieldKind::Sym2), ("y", FieldKind::Scalar)]);
    jetvar::modeldef::context_for(n, &fields)
}

fn random_var(seed: u64, n: usize, ncomp: usize, max_order: usize) -> JetVar {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let k = r.random_range(0..=max_order);
    let dirs: Vec<usize> = (0..k).map(|_| r.random_range(0..n)).collect();
    JetVar::new(
        Comp::field(r.random_range(0..ncomp)),
        MultiIndex::from_dirs(&dirs),
    )
}

fn criterion_12() -> Outcome {
    let n = 3;
    let plain = Ctx::new(n);
    let curved = metric_ctx(n);
    let flat_spec = RandomSpec {
        ncomp: 2,
        max_order: 2,
        ..RandomSpec::default()
    };
    let curved_spec = RandomSpec {
        ncomp: 7,
        max_order: 1,
        derived: true,
        terms: 3,
        ..RandomSpec::default()
    };
    let mut counts = [0u64; 5];
    for s in 0..CASES {
        let e = random_expr_seeded(s, &curved, &curved_spec);
        let c = canonicalize(&e);
        ensure(
            canonicalize(&c) == c,
            format!("canonicalize not idempotent, seed {s}"),
        )?;
        let nf = normal_form(&e, &curved);
        ensure(
            normal_form(&nf, &curved) == nf,
            format!("normal form not idempotent, seed {s}"),
        )?;
        counts[0] += 1;

        let (mu, nu) = ((s % 3) as usize, ((s / 3) % 3) as usize);
        let dd = |a, b| -> Result<Expr, String> {
            total_derivative(&total_derivative(&e, a, &curved).map_err(err)?, b, &curved)
                .map_err(err)
        };
        ensure(
            dd(mu, nu)? == dd(nu, mu)?,
            format!("d_mu d_nu differ, seed {s}"),
        )?;
        counts[1] += 1;

        let f = random_expr_seeded(1000 + s, &plain, &flat_spec);
        let v = random_var(2000 + s, n, 2, 3);
        let lhs = &partial(&total_derivative(&f, mu, &plain).map_err(err)?, &v, &plain)
            - &total_derivative(&partial(&f, &v, &plain), mu, &plain).map_err(err)?;
        let rhs = match v.idx.minus(mu) {
            Some(b) => partial(&f, &v.with_idx(b), &plain),
            None => Expr::zero(),
        };
        ensure(lhs == rhs, format!("commutator identity fails, seed {s}"))?;
        counts[2] += 1;

        let dl = first_variation(&f, &plain);
        let sp = split(&dl, SplitOrder::Random(s), &plain).map_err(err)?;
        ensure(sp.volume.rank() == 0, "volume part has positive rank")?;
        let mut rebuilt = sp.volume.component(BaseSet::EMPTY);
        if let Some(d) = div_components(&sp.boundary.pair(), n, &plain)
            .map_err(err)?
            .remove(&BaseSet::EMPTY)
        {
            rebuilt = &rebuilt + &d;
        }
        ensure(
            rebuilt == dl.component(BaseSet::EMPTY),
            format!("split does not reconstruct, seed {s}"),
        )?;
        counts[3] += 1;

        let lex = split(&dl, SplitOrder::Lexicographic, &plain).map_err(err)?;
        ensure(
            lex.volume == sp.volume,
            format!("volume depends on the order, seed {s}"),
        )?;
        counts[4] += 1;
    }
    Ok(format!(
        "idempotence {}, d commutativity {}, commutator {}, reconstruction {}, order independence {}",
        counts[0], counts[1], counts[2], counts[3], counts[4]
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("k=l=s=1 splitting", criterion_1),
        ("charged fluid field equations", criterion_2),
        ("scalar field against discretized action", criterion_3),
        ("2D Hilbert identity", criterion_4),
        ("contracted Bianchi identity", criterion_5),
        ("covariance suite", criterion_6),
        ("off-shell Noether identity", criterion_7),
        ("superpotential", criterion_8),
        ("adaptedness", criterion_9),
        ("off-constraint independence", criterion_10),
        ("thermodynamic identities", criterion_11),
        ("infrastructure properties", criterion_12),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let r = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        let secs = t.elapsed().as_secs_f64();
        match r {
            Ok(d) => println!("criterion {:>2} PASS  {name}: {d} [{secs:.2} s]", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {d} [{secs:.2} s]", i + 1)
            }
        }
    }
    println!("{} of 12 criteria passed", 12 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
