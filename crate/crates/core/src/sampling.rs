//! Seeded random generators for lattice vectors, transvections, group
//! elements and congruence-subgroup matrices.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::Zero;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::arith::{egcd, gcd_i64};
use crate::error::{Error, Result};
use crate::isometry::{eichler_transvection, o2u_from_sl2_pair, reflection, Isometry, Mat2};
use crate::lattice::{Lattice, Vector};
use crate::linalg::int_vec;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Nonzero primitive vector with entries in `[-bound, bound]`.
pub fn random_primitive_vector<R: Rng>(rng: &mut R, n: usize, bound: i64) -> Vector {
    loop {
        let v: Vec<i64> = (0..n).map(|_| rng.random_range(-bound..=bound)).collect();
        if v.iter().fold(0, |g, &x| gcd_i64(g, x)) == 1 {
            return int_vec(&v);
        }
    }
}

/// A random `t(e, a)` with `e` one of the marked hyperbolic basis vectors and
/// `a` a random vector orthogonal to it. Returns `(e, a, t(e, a))`.
pub fn random_transvection<R: Rng>(l: &Arc<Lattice>, rng: &mut R, bound: i64) -> Result<(Vector, Vector, Isometry)> {
    let marks = l.marks();
    let isotropic: Vec<usize> = marks.e.iter().chain(&marks.f).copied().collect();
    if isotropic.is_empty() {
        return Err(Error::MissingMark("e/f"));
    }
    let idx = isotropic[rng.random_range(0..isotropic.len())];
    let e = l.basis_vector(idx);
    let ge = l.gram().mul_vec(&e);
    let mut a: Vector = (0..l.rank()).map(|_| BigInt::from(rng.random_range(-bound..=bound))).collect();
    for (ai, gi) in a.iter_mut().zip(&ge) {
        if !gi.is_zero() {
            *ai = BigInt::zero();
        }
    }
    let t = eichler_transvection(l.clone(), &e, &a)?;
    Ok((e, a, t))
}

const SL2_GENERATORS: [Mat2; 4] = [[[0, -1], [1, 0]], [[1, 1], [0, 1]], [[1, -1], [0, 1]], [[1, 0], [1, 1]]];

/// Word of `len` generators of `Gamma`: transvections, the reflection in the
/// `w` mark and `O(2U)` elements from pairs of `SL(2, Z)` generators.
pub fn random_gamma_element<R: Rng>(l: &Arc<Lattice>, rng: &mut R, len: usize) -> Result<Isometry> {
    let w = l.w_mark()?;
    let mut g = Isometry::identity(l.clone());
    for _ in 0..len {
        let h = match rng.random_range(0..3) {
            0 => random_transvection(l, rng, 2)?.2,
            1 => reflection(l.clone(), &w)?,
            _ => {
                let a = SL2_GENERATORS[rng.random_range(0..4)];
                let b = SL2_GENERATORS[rng.random_range(0..4)];
                o2u_from_sl2_pair(l.clone(), &a, &b)?
            }
        };
        g = h.compose(&g);
    }
    Ok(g)
}

/// A random element of `Gamma_1(a)` (of `SL(2, Z)` when `a = 1`) with entries
/// bounded by `bound` in absolute value.
pub fn random_gamma1<R: Rng>(rng: &mut R, a: i64, bound: i64) -> Mat2 {
    assert!(a >= 1 && bound > 2 * a, "bound too small for level");
    loop {
        let x = rng.random_range(-(bound - 1) / a..=(bound - 1) / a);
        let y = rng.random_range(-bound / a..=bound / a);
        let (alpha, beta) = (1 + a * x, a * y);
        let (g, s, t) = egcd(alpha, beta);
        if g != 1 {
            continue;
        }
        // alpha s + beta t = 1: U = [[alpha, beta], [-t, s]], shifted to keep entries small.
        let (mut c, mut d) = (-t, s);
        if beta != 0 {
            let k = (d as f64 / beta as f64).round() as i64;
            c -= k * alpha;
            d -= k * beta;
        }
        if c.abs() <= bound && d.abs() <= bound {
            return [[alpha, beta], [c, d]];
        }
    }
}

/// Vector of `L_2` whose hyperplane mod `p` is nondegenerate.
pub fn random_hyperplane_vector<R: Rng>(l2: &Lattice, rng: &mut R, p: i64) -> Vector {
    let pb = BigInt::from(p);
    loop {
        let v = random_primitive_vector(rng, 6, p * p);
        if !(l2.norm(&v) % &pb).is_zero() {
            return v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::in_gamma1;
    use crate::lattice::make_l2d;

    #[test]
    fn gamma1_samples() {
        let mut rng = seeded(7);
        for a in [1, 2, 5, 10] {
            for _ in 0..200 {
                let u = random_gamma1(&mut rng, a, 10_000);
                assert!(in_gamma1(&u, a), "{u:?} for a = {a}");
                assert!(u.iter().flatten().all(|x| x.abs() <= 10_000));
            }
        }
    }

    #[test]
    fn deterministic_words() {
        let l = Arc::new(make_l2d(25).unwrap());
        let g1 = random_gamma_element(&l, &mut seeded(3), 4).unwrap();
        let g2 = random_gamma_element(&l, &mut seeded(3), 4).unwrap();
        assert_eq!(g1, g2);
        assert!(g1.in_gamma().unwrap());
    }
}
