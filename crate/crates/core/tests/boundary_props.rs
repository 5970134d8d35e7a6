use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed};
use proptest::prelude::*;

use kbb_core::boundary::{
    boundary_points, check_shape, classify_isotropic_vector, curve_group, in_gamma1, lift_parabolic, pi_e,
    rank2_normal_form, rank2_representatives, rank2_type, NormalForm,
};
use kbb_core::classnum::{class_number, class_number_by_reduction};
use kbb_core::lattice::{make_l2d, Lattice, Sublattice};
use kbb_core::sampling::{random_gamma1, random_gamma_element, random_primitive_vector, seeded};

fn l50() -> Arc<Lattice> {
    static L: OnceLock<Arc<Lattice>> = OnceLock::new();
    L.get_or_init(|| Arc::new(make_l2d(25).unwrap())).clone()
}

fn representatives() -> &'static Vec<(i64, Sublattice, NormalForm)> {
    static R: OnceLock<Vec<(i64, Sublattice, NormalForm)>> = OnceLock::new();
    R.get_or_init(|| {
        let l = l50();
        rank2_representatives(&l, 5)
            .unwrap()
            .into_iter()
            .map(|(a, e)| {
                let nf = rank2_normal_form(&l, &e).unwrap();
                (a, e, nf)
            })
            .collect()
    })
}

fn mul2(x: &[[i64; 2]; 2], y: &[[i64; 2]; 2]) -> [[i64; 2]; 2] {
    let mut out = [[0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = x[i][0] * y[0][j] + x[i][1] * y[1][j];
        }
    }
    out
}

fn euler_phi(n: i64) -> i64 {
    (1..=n).filter(|&k| k.gcd(&n) == 1).count() as i64
}

/// Reduced primitive positive definite forms, counted directly.
fn naive_class_number(d: i64) -> u64 {
    let mut h = 0;
    let mut a = 1;
    while 3 * a * a <= -d {
        for b in -a + 1..=a {
            let num = b * b - d;
            if num % (4 * a) == 0 {
                let c = num / (4 * a);
                if c >= a && !(c == a && b < 0) && a.gcd(&b).gcd(&c) == 1 {
                    h += 1;
                }
            }
        }
        a += 1;
    }
    h
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn star_order_is_divisor(seed in any::<u64>(), d in prop_oneof![Just(1i64), Just(25), Just(49)]) {
        let l = make_l2d(d).unwrap();
        let v = random_primitive_vector(&mut seeded(seed), 6, 20);
        let star = l.star(&v).unwrap();
        let order = l.discriminant_module().unwrap().order(&star);
        prop_assert_eq!(BigInt::from(order), l.divisor(&v).unwrap());
    }

    #[test]
    fn point_class_is_gamma_invariant(seed in any::<u64>(), len in 1usize..5) {
        let l = l50();
        let g = random_gamma_element(&l, &mut seeded(seed), len).unwrap();
        for pt in boundary_points(&l, 5).unwrap() {
            let moved = classify_isotropic_vector(&l, &g.apply(&pt.representative), 5).unwrap();
            prop_assert_eq!((moved.family, moved.k), (pt.family, pt.k));
            prop_assert_eq!(moved.star, pt.star);
        }
    }

    #[test]
    fn normal_form_of_translates(seed in any::<u64>(), len in 1usize..4, which in 0usize..4) {
        let l = l50();
        let (a, e, _) = &representatives()[which];
        let g = random_gamma_element(&l, &mut seeded(seed), len).unwrap();
        let moved = Sublattice::new(g.matrix() * &e.basis).unwrap();
        prop_assert_eq!(rank2_type(&l, &moved).unwrap(), *a);
        let nf = rank2_normal_form(&l, &moved).unwrap();
        prop_assert_eq!(nf.a, *a);
        check_shape(&nf, &l, 5).unwrap();
        let product = nf.transcript.iter().skip(1).fold(nf.transcript[0].matrix.clone(), |acc, s| &acc * &s.matrix);
        prop_assert_eq!(&product, &nf.basis);
        for step in &nf.transcript {
            prop_assert!(step.matrix.det().unwrap().abs().is_one(), "step {} not unimodular", step.step);
        }
        prop_assert_eq!(&(&nf.basis.transpose() * l.gram()) * &nf.basis, nf.assemble());
        // The first two basis vectors span the moved plane.
        let span = nf.basis.select_columns(&[0, 1]);
        for v in moved.vectors() {
            prop_assert!(Sublattice::new(span.clone()).unwrap().contains(&v));
        }
    }

    #[test]
    fn lift_is_a_section(seed in any::<u64>(), which in 0usize..4) {
        let l = l50();
        let (a, _, nf) = &representatives()[which];
        let mut rng = seeded(seed);
        let u1 = random_gamma1(&mut rng, *a, 60);
        let u2 = random_gamma1(&mut rng, *a, 60);
        let g1 = lift_parabolic(l.clone(), nf, &u1).unwrap();
        let g2 = lift_parabolic(l.clone(), nf, &u2).unwrap();
        let prod = g1.compose(&g2);
        prop_assert_eq!(pi_e(nf, &g1).unwrap(), u1);
        prop_assert_eq!(pi_e(nf, &prod).unwrap(), mul2(&u1, &u2));
        prop_assert!(prod.in_gamma().unwrap());
        prop_assert!(in_gamma1(&mul2(&u1, &u2), *a));
    }

    #[test]
    fn class_number_oracles_agree(k in 1i64..1000, odd in any::<bool>()) {
        // Negative discriminants are 0 or 1 mod 4.
        let d = if odd { 1 - 4 * k } else { -4 * k };
        prop_assume!(d < -2);
        let h = class_number(d).unwrap();
        prop_assert_eq!(h, class_number_by_reduction(d).unwrap());
        prop_assert_eq!(h, naive_class_number(d));
    }
}

#[test]
fn curve_groups_match_formulas() {
    for n in 1..=40i64 {
        let g = curve_group(n).unwrap();
        let primes: Vec<i64> = (2..=n).filter(|q| n % q == 0 && (2..*q).all(|r| q % r != 0)).collect();
        // |SL2(Z/N)| / N restricted to bottom rows: N^2 prod (1 - 1/q^2).
        let rows = primes.iter().fold(n * n, |acc, q| acc / (q * q) * (q * q - 1));
        let index = if n <= 2 { rows } else { rows / 2 };
        assert_eq!(g.index as i64, if n == 1 { 1 } else { index }, "index at {n}");
        if n >= 5 {
            let cusps: i64 = (1..=n).filter(|d| n % d == 0).map(|d| euler_phi(d) * euler_phi(n / d)).sum::<i64>() / 2;
            assert_eq!(g.cusps as i64, cusps, "cusps at {n}");
        }
    }
    assert_eq!((curve_group(2).unwrap().cusps, curve_group(3).unwrap().cusps, curve_group(4).unwrap().cusps), (2, 2, 3));
}
