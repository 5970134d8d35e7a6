use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::Zero;
use proptest::prelude::*;

use kbb_core::fqm::{DiscElement, FiniteQuadraticModule};
use kbb_core::lattice::make_l2d;

/// `D(L_{2d})` in the named presentation, for a few `d`.
fn module(d: i64) -> FiniteQuadraticModule {
    make_l2d(d).unwrap().discriminant_module().unwrap().clone()
}

fn element(orders: Vec<i64>) -> impl Strategy<Value = DiscElement> {
    orders.into_iter().map(|n| 0..n).collect::<Vec<_>>().prop_map(DiscElement)
}

fn frac(x: Rational64) -> BigRational {
    BigRational::new(BigInt::from(*x.numer()), BigInt::from(*x.denom()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn polarisation(
        (d, x, y) in prop_oneof![Just(1i64), Just(2), Just(25), Just(49)].prop_flat_map(|d| {
            let orders = module(d).orders().to_vec();
            (Just(d), element(orders.clone()), element(orders))
        })
    ) {
        let m = module(d);
        // q(x + y) - q(x) - q(y) = 2 b(x, y) mod 2
        let lhs = frac(m.q_value(&m.add(&x, &y))) - frac(m.q_value(&x)) - frac(m.q_value(&y));
        let rhs = frac(m.b_value(&x, &y)) * BigInt::from(2);
        let diff = (lhs - rhs) / BigInt::from(2);
        prop_assert!(diff.is_integer());
    }

    #[test]
    fn order_annihilates(d in prop_oneof![Just(1i64), Just(4), Just(25), Just(121)], coords in prop::collection::vec(0i64..10_000, 3)) {
        let m = module(d);
        let x = m.reduce(&coords[..m.rank()]);
        let n = m.order(&x);
        prop_assert!(m.scale(n, &x).0.iter().all(|c| *c == 0));
        for k in 1..n {
            prop_assert!(m.scale(k, &x).0.iter().any(|c| *c != 0));
        }
        prop_assert_eq!(m.q_value(&m.neg(&x)), m.q_value(&x));
        prop_assert!((frac(m.q_value(&x)) * BigInt::from(n) * BigInt::from(n) / BigInt::from(2)).is_integer());
    }
}

#[test]
fn isotropic_set_is_symmetric_and_sized() {
    for d in [1i64, 25, 49, 121] {
        let m = module(d);
        let iso = m.isotropic_elements();
        assert!(iso.iter().all(|x| iso.contains(&m.neg(x))));
        assert_eq!(m.size() as i64, 12 * d);
        let brute = m.elements().filter(|x| m.q_value(x).is_zero()).count();
        assert_eq!(iso.len(), brute, "d = {d}");
    }
}
