use clp_kernel::number::{float_to_rational, mk_rational, rational_to_interval};
use clp_kernel::{Breal, Engine, Number};
use num_rational::BigRational;
use proptest::prelude::*;

fn rat() -> impl Strategy<Value = BigRational> {
    (-10_000i64..10_000, 1i64..1_000).prop_map(|(n, d)| mk_rational(n, d).unwrap())
}

fn encloses(i: &Breal, r: &BigRational) -> bool {
    let lo = float_to_rational(i.lo()).unwrap();
    let hi = float_to_rational(i.hi()).unwrap();
    &lo <= r && r <= &hi
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    /// Outward rounding: the interval result encloses the exact one.
    #[test]
    fn interval_ops_enclose_exact_results(a in rat(), b in rat(), op in 0usize..6) {
        let (ia, ib) = (rational_to_interval(&a), rational_to_interval(&b));
        prop_assert!(encloses(&ia, &a) && encloses(&ib, &b));
        let (i, exact) = match op {
            0 => (ia.add(&ib), &a + &b),
            1 => (ia.sub(&ib), &a - &b),
            2 => (ia.mul(&ib), &a * &b),
            3 => {
                prop_assume!(b != BigRational::from_integer(0.into()));
                (ia.div(&ib).unwrap(), &a / &b)
            }
            4 => (ia.powi(3), &a * &a * &a),
            _ => (ia.neg().abs(), if a < BigRational::from_integer(0.into()) { -a.clone() } else { a.clone() }),
        };
        prop_assert!(encloses(&i, &exact), "{} does not enclose {}", i, exact);
    }

    /// The same through the number tower, mixing types.
    #[test]
    fn breal_arithmetic_encloses_rational_arithmetic(a in rat(), b in rat()) {
        let (ra, rb) = (Number::Rat(a.clone()), Number::Rat(b.clone()));
        let exact = ra.mul(&rb).unwrap().add(&ra).unwrap();
        let approx = ra.to_breal().mul(&rb).unwrap().add(&ra.to_breal()).unwrap();
        match (exact.to_rational(), approx) {
            (Some(x), Number::Breal(i)) => prop_assert!(encloses(&i, &x)),
            (x, y) => prop_assert!(false, "{:?} {:?}", x, y),
        }
    }
}

#[test]
fn numbers_of_different_types_never_unify() {
    let mut e = Engine::new();
    let forms = ["3", "3.0", "3_1", "3.0__3.0"];
    for (i, a) in forms.iter().enumerate() {
        for (j, b) in forms.iter().enumerate() {
            let unify = e.succeeds(&format!("{} = {}.", a, b)).unwrap();
            assert_eq!(unify, i == j, "{} = {}", a, b);
            assert!(e.succeeds(&format!("{} =:= {}.", a, b)).unwrap(), "{} =:= {}", a, b);
        }
    }
    assert!(e.succeeds("rational(3_1), \\+ integer(3_1), breal(3.0__3.0), float(3.0), integer(3).").unwrap());
}

#[test]
fn breal_comparison_is_undecided_on_overlap() {
    let mut e = Engine::new();
    assert!(e.succeeds("1.0__2.0 < 3.").unwrap());
    assert!(!e.succeeds("1.0__2.0 > 3.").unwrap());
    assert!(e.query("1.0__2.0 < 1.5.").unwrap().next().unwrap().is_err());
    assert_eq!(
        e.once("X is breal(1_3) * 3.").unwrap().unwrap().to_string(),
        "X = 0.9999999999999999__1.0000000000000002\n"
    );
}

#[test]
fn rationals_are_normalised_on_read() {
    let mut e = Engine::new();
    assert_eq!(e.once("X = 2_4.").unwrap().unwrap().to_string(), "X = 1_2\n");
    assert_eq!(e.once("X = -3_6.").unwrap().unwrap().to_string(), "X = -1_2\n");
    assert!(e.query("X = 1_0.").is_err());
}
