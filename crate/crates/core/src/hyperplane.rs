//! Hyperplanes of `L_2 / p L_2`: reduction to a standard line and explicit
//! equivalences between hyperplanes with the same square class.

use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::arith::{check_boundary_prime, egcd, legendre, mod_inverse, sqrt_mod};
use crate::error::{Error, Result};
use crate::fp::{classify_fp_space, finite_orthogonal_order};
use crate::isometry::{eichler_transvection, o2u_from_sl2_pair, Isometry, Mat2};
use crate::lattice::{make_l2d, Lattice, Vector};
use crate::linalg::{int_vec, smith_normal_form, IntMatrix};

fn residues(v: &[BigInt], p: i64) -> Vec<i64> {
    let pb = BigInt::from(p);
    v.iter().map(|x| x.mod_floor(&pb).to_i64().expect("residue fits")).collect()
}

/// `x` and `y` span the same line of `F_p^n` (both nonzero).
pub fn same_line_mod_p(x: &[BigInt], y: &[BigInt], p: i64) -> bool {
    let (a, b) = (residues(x, p), residues(y, p));
    if a.iter().all(|&c| c == 0) || b.iter().all(|&c| c == 0) {
        return false;
    }
    (0..a.len()).all(|i| (0..a.len()).all(|j| (a[i] as i128 * b[j] as i128 - a[j] as i128 * b[i] as i128) % p as i128 == 0))
}

#[derive(Clone, Debug)]
pub struct HyperplaneReduction {
    /// `(1, a, 0, 0, 0, 0)` with `a` in `[0, p)`.
    pub standard: Vector,
    /// Applied left to right: the composite is `transcript[k-1] ... transcript[0]`.
    pub transcript: Vec<Isometry>,
    pub composite: Isometry,
}

fn check_hyperplane(l2: &Lattice, w: &[BigInt], p: i64) -> Result<()> {
    if w.len() != 6 {
        return Err(Error::Dimension("vectors of L_2 have 6 coordinates".into()));
    }
    if residues(w, p).iter().all(|&c| c == 0) {
        return Err(Error::Degenerate(format!("vector vanishes mod {p}")));
    }
    if (l2.norm(w) % BigInt::from(p)).is_zero() {
        return Err(Error::Degenerate(format!("w^2 = 0 mod {p}: hyperplane is degenerate")));
    }
    Ok(())
}

/// Carries the line of `w` in `L_2 / p` to a standard line `(1, a, 0, 0, 0, 0)`
/// by transvections `t(e2, c v1)`, `t(e2, c v2)` and elements of `O(2U)`.
pub fn reduce_vector_mod_p(l2: &Arc<Lattice>, w: &[BigInt], p: i64) -> Result<HyperplaneReduction> {
    check_boundary_prime(p)?;
    check_hyperplane(l2, w, p)?;
    let e2 = l2.e(1)?;
    let v1 = l2.w_mark()?;
    let v2 = l2.v_mark()?;
    let mut transcript: Vec<Isometry> = Vec::new();
    let mut cur: Vector = w.to_vec();
    let push = |g: Isometry, cur: &mut Vector, transcript: &mut Vec<Isometry>| {
        *cur = g.apply(cur);
        transcript.push(g);
    };
    let r = residues(&cur, p);
    let already_standard = r[2..].iter().all(|&c| c == 0) && r[0] != 0;
    if !already_standard {
        if r[..4].iter().all(|&c| c == 0) {
            // Make w3 nonzero: t(e2, v1) adds 6 w5, t(e2, v2) adds 2 w6.
            let a = if r[4] != 0 { &v1 } else { &v2 };
            push(eichler_transvection(l2.clone(), &e2, a)?, &mut cur, &mut transcript);
        }
        if residues(&cur, p)[3] == 0 {
            let s: Mat2 = [[0, -1], [1, 0]];
            let id: Mat2 = [[1, 0], [0, 1]];
            let mut moved = false;
            for (a, b) in [(s, id), (id, s), (s, s)] {
                let g = o2u_from_sl2_pair(l2.clone(), &a, &b)?;
                if residues(&g.apply(&cur), p)[3] != 0 {
                    push(g, &mut cur, &mut transcript);
                    moved = true;
                    break;
                }
            }
            if !moved {
                return Err(Error::Invariant("no O(2U) move makes w4 nonzero".into()));
            }
        }
        for (idx, a) in [(4usize, &v1), (5usize, &v2)] {
            let r = residues(&cur, p);
            if r[idx] != 0 {
                let inv = mod_inverse(r[3], p).expect("w4 is a unit");
                let c = (-(r[idx] as i128) * inv as i128).rem_euclid(p as i128) as i64;
                let a_c: Vector = a.iter().map(|x| x * c).collect();
                push(eichler_transvection(l2.clone(), &e2, &a_c)?, &mut cur, &mut transcript);
            }
        }
        let r = residues(&cur, p);
        let x = IntMatrix::from_i64_rows(&[vec![r[0], -r[2]], vec![r[3], r[1]]]);
        let snf = smith_normal_form(&x);
        let (mut u, mut v) = (snf.u.clone(), snf.v.clone());
        let neg_first_row = |m: &mut IntMatrix| {
            for j in 0..2 {
                m[(0, j)] = -m[(0, j)].clone();
            }
        };
        if u.det()? != BigInt::from(1) {
            neg_first_row(&mut u);
        }
        if v.det()? != BigInt::from(1) {
            // negate the first column
            for i in 0..2 {
                v[(i, 0)] = -v[(i, 0)].clone();
            }
        }
        let to_mat2 = |m: &IntMatrix| -> Mat2 {
            let e = |i, j| m[(i, j)].to_i64().expect("small SL2 entry");
            [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
        };
        let a = to_mat2(&u);
        let v_inv = v.inverse_unimodular()?;
        let b = to_mat2(&v_inv);
        let g = o2u_from_sl2_pair(l2.clone(), &a, &b)?;
        push(g, &mut cur, &mut transcript);
    }
    let r = residues(&cur, p);
    if r[2..].iter().any(|&c| c != 0) || r[0] == 0 {
        return Err(Error::Invariant(format!("reduction ended at {r:?}")));
    }
    let a = (r[1] as i128 * mod_inverse(r[0], p).expect("unit") as i128).rem_euclid(p as i128) as i64;
    let standard = int_vec(&[1, a, 0, 0, 0, 0]);
    let composite = transcript.iter().fold(Isometry::identity(l2.clone()), |acc, g| g.compose(&acc));
    if !same_line_mod_p(&composite.apply(w), &standard, p) {
        return Err(Error::Invariant("reduction composite misses the standard line".into()));
    }
    Ok(HyperplaneReduction { standard, transcript, composite })
}

/// An integral isometry of `L_2` taking the line of `u` to the line of `v`
/// mod `p` (hence `Pi_u` to `Pi_v`), assuming `u^2 / v^2` is a nonzero square.
pub fn hyperplane_equivalence(l2: &Arc<Lattice>, u: &[BigInt], v: &[BigInt], p: i64) -> Result<Isometry> {
    check_boundary_prime(p)?;
    check_hyperplane(l2, u, p)?;
    check_hyperplane(l2, v, p)?;
    let pb = BigInt::from(p);
    let ratio = (l2.norm(u) * l2.norm(v)).mod_floor(&pb).to_i64().expect("residue");
    if legendre(ratio, p) != 1 {
        return Err(Error::InvalidArgument("u^2 and v^2 lie in different square classes".into()));
    }
    if same_line_mod_p(u, v, p) {
        return Ok(Isometry::identity(l2.clone()));
    }
    let ru = reduce_vector_mod_p(l2, u, p)?;
    let rv = reduce_vector_mod_p(l2, v, p)?;
    let a = ru.standard[1].to_i64().expect("residue");
    let b = rv.standard[1].to_i64().expect("residue");
    let middle = standard_line_equivalence(l2, a, b, p)?;
    let g = rv.composite.inverse().compose(&middle).compose(&ru.composite);
    if !same_line_mod_p(&g.apply(u), v, p) {
        return Err(Error::Invariant("hyperplane equivalence failed verification".into()));
    }
    Ok(g)
}

/// `t(e2, v') t(f2, w) t(e2, u')` carrying `u^ = mu (1, a)` to `v^ = (1, b)`
/// mod `p`, where `mu^2 = b / a`. Vectors `u', v', w` live in the first `U`.
pub fn standard_line_equivalence(l2: &Arc<Lattice>, a: i64, b: i64, p: i64) -> Result<Isometry> {
    let ratio = (b as i128 * mod_inverse(a, p).ok_or_else(|| Error::Degenerate("a = 0 mod p".into()))? as i128)
        .rem_euclid(p as i128) as i64;
    let mu = sqrt_mod(ratio, p).ok_or_else(|| Error::InvalidArgument("b/a is not a square".into()))?;
    if mu == 1 {
        return Ok(Isometry::identity(l2.clone()));
    }
    // Primitive lift of u^ so that (u^, u') = q is solvable.
    let u1 = mu;
    let base = (mu as i128 * a as i128).rem_euclid(p as i128) as i64;
    let u2 = (0..).map(|k| base + k * p).find(|&y| u1.gcd(&y) == 1).expect("coprime lift exists");
    let (v1, v2) = (1i64, b);
    let (r, s) = (u1 - v1, u2 - v2);
    if r.rem_euclid(p) == 0 && s.rem_euclid(p) == 0 {
        return Ok(Isometry::identity(l2.clone()));
    }
    let q = r.gcd(&s);
    let in_u = |x: i64, y: i64| int_vec(&[x, y, 0, 0, 0, 0]);
    let w = in_u(r / q, s / q);
    // (x, y)_U = x1 y2 + x2 y1.
    let (_, s1, t1) = egcd(u1, u2);
    let u_prime = in_u(q * t1, q * s1);
    let v_prime = in_u(0, -q);
    let e2 = l2.e(1)?;
    let f2 = l2.f(1)?;
    let g = eichler_transvection(l2.clone(), &e2, &v_prime)?
        .compose(&eichler_transvection(l2.clone(), &f2, &w)?)
        .compose(&eichler_transvection(l2.clone(), &e2, &u_prime)?);
    let u_hat = in_u(u1, u2);
    let image = residues(&g.apply(&u_hat), p);
    let target = residues(&in_u(v1, v2), p);
    if image != target {
        return Err(Error::Invariant(format!("three-transvection map sends u^ to {image:?}")));
    }
    Ok(g)
}

/// `2(p^5 + p^2)`.
pub fn index_bound(p: i64) -> Result<BigInt> {
    check_boundary_prime(p)?;
    let pb = BigInt::from(p);
    Ok(BigInt::from(2) * (pb.pow(5) + pb.pow(2)))
}

/// `2 |O(V^6_eps)| / |O(V^5)|` for `V = L_2 / p L_2`, together with `eps`.
/// This equals `2 p^2 (p^3 - eps)`, which never exceeds [`index_bound`].
pub fn index_from_orders(p: i64) -> Result<(i64, BigInt)> {
    check_boundary_prime(p)?;
    let l2 = make_l2d(1)?;
    let space = classify_fp_space(l2.gram(), p)?;
    let eps = space.epsilon.expect("even dimension");
    let o6 = finite_orthogonal_order(6, Some(eps), p)?;
    let o5 = finite_orthogonal_order(5, None, p)?;
    Ok((eps, BigInt::from(2) * o6 / o5))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l2() -> Arc<Lattice> {
        Arc::new(make_l2d(1).unwrap())
    }

    #[test]
    fn index_values() {
        assert_eq!(index_bound(5).unwrap(), BigInt::from(6300));
        assert_eq!(index_bound(7).unwrap(), BigInt::from(33712));
        assert_eq!(index_bound(11).unwrap(), BigInt::from(322344));
        assert!(index_bound(4).is_err() && index_bound(3).is_err());
        for p in [5, 7, 11, 13] {
            let (eps, idx) = index_from_orders(p).unwrap();
            assert_eq!(idx, BigInt::from(2 * p * p * (p * p * p - eps)));
            assert!(idx <= index_bound(p).unwrap());
        }
    }

    #[test]
    fn standard_vector_needs_no_moves() {
        let r = reduce_vector_mod_p(&l2(), &int_vec(&[1, 3, 0, 0, 0, 0]), 5).unwrap();
        assert!(r.transcript.is_empty());
        assert_eq!(r.standard, int_vec(&[1, 3, 0, 0, 0, 0]));
    }

    #[test]
    fn reduction_of_awkward_vectors() {
        let l = l2();
        for w in [[0, 0, 0, 0, 1, 0], [0, 0, 0, 0, 0, 1], [0, 0, 1, 0, 2, 3], [3, 4, 0, 0, 1, 1], [7, 0, 0, 0, 0, 2]] {
            let w = int_vec(&w);
            if (l.norm(&w) % BigInt::from(5)).is_zero() {
                continue;
            }
            let r = reduce_vector_mod_p(&l, &w, 5).unwrap();
            assert!(same_line_mod_p(&r.composite.apply(&w), &r.standard, 5));
        }
        assert!(reduce_vector_mod_p(&l, &int_vec(&[5, 0, 0, 0, 0, 0]), 5).is_err());
        assert!(reduce_vector_mod_p(&l, &int_vec(&[1, 0, 0, 0, 0, 0]), 5).is_err());
    }

    #[test]
    fn equivalences() {
        let l = l2();
        let u = int_vec(&[1, 1, 0, 0, 0, 0]);
        let v = int_vec(&[0, 0, 1, 4, 0, 0]);
        let g = hyperplane_equivalence(&l, &u, &v, 5).unwrap();
        assert!(same_line_mod_p(&g.apply(&u), &v, 5));
        assert!(hyperplane_equivalence(&l, &u, &u, 5).unwrap().is_identity());
        // 2 and 4 are both squares mod 7 but 2 and 3 are not in the same class mod 5
        let bad = int_vec(&[1, 3, 0, 0, 0, 0]);
        assert!(hyperplane_equivalence(&l, &u, &bad, 5).is_err());
    }
}
