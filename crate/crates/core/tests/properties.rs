use std::f64::consts::PI;

use expgm::cohomology::{fiber_basis, reduce_form, twisted_differential, FiberType, ProblemSpec};
use expgm::cycles::valley_config;
use expgm::pipeline::Problem;
use expgm::quadrature::QuadratureOptions;
use expgm::symbolic::{rat, solve_linear_ratfun, LaurentPoly, RatFun, TPoly, Var};
use expgm::verify::monodromy_along;
use num_complex::Complex64;
use proptest::prelude::*;

fn tpoly() -> impl Strategy<Value = TPoly> {
    prop::collection::vec((-6i64..=6, 1i64..=4), 0..3)
        .prop_map(|c| TPoly::new(c.into_iter().map(|(n, d)| rat(n, d)).collect()))
}

fn laurent(low: i64, high: i64) -> impl Strategy<Value = LaurentPoly> {
    prop::collection::vec((low..=high, tpoly()), 0..4).prop_map(LaurentPoly::from_terms)
}

fn ratfun() -> impl Strategy<Value = RatFun> {
    (tpoly(), tpoly()).prop_map(|(n, d)| RatFun::new(n, d).unwrap_or_else(RatFun::one))
}

fn specs() -> Vec<ProblemSpec> {
    vec![
        ProblemSpec::parse(FiberType::AffineLine, "u^3/3 - t*u", "airy").unwrap(),
        ProblemSpec::parse(FiberType::PuncturedLine, "(t/2)*(u - u^-1)", "bessel").unwrap(),
        ProblemSpec::parse(FiberType::AffineLine, "-t*u^2", "gaussian").unwrap(),
        ProblemSpec::parse(FiberType::PuncturedLine, "u^2 + t*u - u^-1", "mixed").unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn leibniz(p in laurent(-3, 3), q in laurent(-3, 3)) {
        for var in [Var::U, Var::T] {
            let lhs = (&p * &q).partial(var);
            let rhs = &(&p.partial(var) * &q) + &(&p * &q.partial(var));
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn ring_laws(a in laurent(-2, 2), b in laurent(-2, 2), c in laurent(-2, 2)) {
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&a - &a).is_zero());
    }

    #[test]
    fn solve_has_zero_residual(m in prop::collection::vec(ratfun(), 9), b in prop::collection::vec(ratfun(), 3)) {
        let m: Vec<Vec<RatFun>> = m.chunks(3).map(<[_]>::to_vec).collect();
        if let Ok(x) = solve_linear_ratfun(&m, &b) {
            for (row, bi) in m.iter().zip(&b) {
                let lhs = row.iter().zip(&x).fold(RatFun::zero(), |acc, (a, xi)| &acc + &(a * xi));
                prop_assert!((&lhs - bi).is_zero());
            }
        }
    }

    #[test]
    fn reduction_is_linear_with_exact_kernel(
        which in 0usize..4,
        p in laurent(-4, 5),
        q in laurent(-4, 5),
        gauge in laurent(-3, 4),
        a in -5i64..=5,
    ) {
        let spec = &specs()[which];
        let keep = |x: &LaurentPoly| if spec.fiber == FiberType::AffineLine {
            LaurentPoly::from_terms(x.terms().iter().filter(|(k, _)| **k >= 0).map(|(k, c)| (*k, c.clone())))
        } else {
            x.clone()
        };
        let (p, q, gauge) = (keep(&p), keep(&q), keep(&gauge));
        let basis = fiber_basis(spec).unwrap();
        let rp = reduce_form(&p, spec, &basis).unwrap();
        let rq = reduce_form(&q, spec, &basis).unwrap();
        let combo = &p.scale(&rat(a, 1)) + &q;
        let rc = reduce_form(&combo, spec, &basis).unwrap();
        for i in 0..basis.rank {
            let expect = &(&rp[i] * &RatFun::from_int(a)) + &rq[i];
            prop_assert_eq!(&rc[i], &expect);
        }
        let exact = reduce_form(&twisted_differential(&gauge, spec), spec, &basis).unwrap();
        prop_assert!(exact.iter().all(RatFun::is_zero));
    }

    #[test]
    fn valley_counts(re in -3.0f64..3.0, im in -3.0f64..3.0) {
        let t = Complex64::new(re, im);
        prop_assume!(t.norm() > 1e-3);
        for spec in specs() {
            let cfg = valley_config(&spec, t).unwrap();
            prop_assert_eq!(cfg.at_infinity.len(), spec.degree_at_infinity());
            prop_assert_eq!(cfg.at_zero.len(), spec.order_at_zero());
            for s in cfg.at_infinity.iter().chain(&cfg.at_zero) {
                prop_assert!((0.0..2.0 * PI).contains(&s.center));
            }
        }
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn periods(p: &Problem, cycles: &expgm::cycles::CycleBasis) -> nalgebra::DMatrix<Complex64> {
    p.periods(cycles, &QuadratureOptions::new(1e-12)).unwrap().values()
}

#[test]
fn tracking_composes_and_is_discretization_stable() {
    let p = Problem::new(specs()[1].clone()).unwrap();
    let base = p.cycles_at(c(1.0, 0.0)).unwrap();
    let arc = |n: usize| -> Vec<Complex64> {
        (1..=n).map(|k| Complex64::from_polar(1.0 + 0.5 * k as f64 / n as f64, 2.5 * k as f64 / n as f64)).collect()
    };
    let coarse = periods(&p, &p.track(&base, &arc(8)).unwrap());
    let fine = periods(&p, &p.track(&base, &arc(16)).unwrap());
    assert!((&coarse - &fine).norm() < 1e-9 * coarse.norm());

    let mid = arc(16)[7];
    let first = p.track(&base, &arc(16)[..8]).unwrap();
    let second = p.track(&first, &arc(16)[8..]).unwrap();
    assert_eq!(first.t, mid);
    assert!((&periods(&p, &second) - &fine).norm() < 1e-9 * fine.norm());
}

#[test]
fn double_loop_is_square() {
    let p = Problem::new(specs()[1].clone()).unwrap();
    let t0 = c(1.0, 0.0);
    let once: Vec<Complex64> = (1..=48).map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / 48.0)).collect();
    let twice: Vec<Complex64> = once.iter().chain(&once).copied().collect();
    let m1 = monodromy_along(&p, t0, &once).unwrap();
    let m2 = monodromy_along(&p, t0, &twice).unwrap();
    let sq = &m1.cycles * &m1.cycles;
    assert!((&m2.cycles - &sq).norm() < 1e-8 * sq.norm());
    assert!(m1.cycles.determinant().norm() > 0.5);
}

#[test]
fn airy_matrix_against_extended_rerun() {
    let p = Problem::new(specs()[0].clone()).unwrap();
    let cycles = p.cycles_at(c(0.0, 0.0)).unwrap();
    let d = p.periods(&cycles, &QuadratureOptions::new(1e-10)).unwrap();
    let x = p.periods(&cycles, &QuadratureOptions::extended(1e-22)).unwrap();
    for (rd, rx) in d.entries.iter().zip(&x.entries) {
        for (a, b) in rd.iter().zip(rx) {
            assert!((a.value - b.value).norm() <= a.total_error() + 1e-15);
        }
    }
    assert!(x.values().determinant().norm() > 1e-3);
}
