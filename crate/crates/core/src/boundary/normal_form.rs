//! Rank-two isotropic sublattices: type, Gram normal form and parabolic lifts.
//!
//! For a primitive totally isotropic `E = <v1, v2>` we build a basis
//! `v1, ..., v6` of `L` with `<v1, ..., v4> = E^perp` and Gram matrix
//!
//! ```text
//!     | 0   0   A |        A = | 0 1 |     D = | d 0 |
//! Q = | 0   B   C |            | a 0 |         | 0 0 |
//!     | A^T C^T D |
//! ```
//!
//! so that `(v1, v6) = 1` and `(v2, v5) = a`, i.e. `div(v2) = a`.

use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::arith::{check_boundary_prime, mod_inverse};
use crate::error::{Error, Result};
use crate::isometry::{Isometry, Mat2};
use crate::lattice::{Lattice, Sublattice};
use crate::linalg::{complete_to_basis, int_vec, smith_normal_form, solve_integer, IntMatrix};

/// One step of the base change; the final basis is `initial * m_1 * m_2 * ...`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaseChange {
    pub step: &'static str,
    pub matrix: IntMatrix,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalForm {
    pub a: i64,
    pub b: IntMatrix,
    pub c: IntMatrix,
    pub d: i64,
    /// Columns `v1, ..., v6` in the coordinates of the ambient lattice.
    pub basis: IntMatrix,
    pub transcript: Vec<BaseChange>,
    /// The admissible `B` that this `E` did not realise, when there is a choice.
    pub alternative_b: Option<IntMatrix>,
}

#[derive(Serialize)]
struct NormalFormJson {
    a: i64,
    b: Vec<Vec<String>>,
    c: Vec<Vec<String>>,
    d: i64,
    basis: Vec<Vec<String>>,
}

fn m2(rows: [[i64; 2]; 2]) -> IntMatrix {
    IntMatrix::from_i64_rows(&[rows[0].to_vec(), rows[1].to_vec()])
}

impl NormalForm {
    pub fn a_block(&self) -> IntMatrix {
        m2([[0, 1], [self.a, 0]])
    }

    pub fn d_block(&self) -> IntMatrix {
        m2([[self.d, 0], [0, 0]])
    }

    /// The Gram matrix `Q` assembled from the blocks.
    pub fn assemble(&self) -> IntMatrix {
        let z = IntMatrix::zeros(2, 2);
        let a = self.a_block();
        let (at, ct) = (a.transpose(), self.c.transpose());
        let d = self.d_block();
        IntMatrix::from_blocks(&[vec![&z, &z, &a], vec![&z, &self.b, &self.c], vec![&at, &ct, &d]])
    }

    pub fn plane(&self) -> Sublattice {
        Sublattice { basis: self.basis.select_columns(&[0, 1]) }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(NormalFormJson {
            a: self.a,
            b: self.b.to_string_rows(),
            c: self.c.to_string_rows(),
            d: self.d,
            basis: self.basis.to_string_rows(),
        })
        .expect("normal form serializes")
    }
}

fn to_i128(x: &BigInt) -> Result<i128> {
    x.to_i128().ok_or_else(|| Error::Invariant(format!("entry {x} exceeds i128")))
}

fn to_i64(x: &BigInt) -> Result<i64> {
    x.to_i64().ok_or_else(|| Error::Invariant(format!("entry {x} exceeds i64")))
}

fn check_plane(l: &Lattice, e: &Sublattice) -> Result<()> {
    if e.basis.rows() != l.rank() {
        return Err(Error::Dimension("plane lives in a different lattice".into()));
    }
    if e.rank() != 2 {
        return Err(Error::InvalidArgument(format!("expected a rank-2 sublattice, got rank {}", e.rank())));
    }
    if !l.is_totally_isotropic(e) {
        return Err(Error::NotIsotropic("E is not totally isotropic".into()));
    }
    if !e.is_primitive() {
        return Err(Error::NotPrimitive);
    }
    Ok(())
}

/// Second Smith invariant of the pairing `E x L -> Z`; the first must be 1.
pub fn rank2_type(l: &Lattice, e: &Sublattice) -> Result<i64> {
    check_plane(l, e)?;
    let pairing = &e.basis.transpose() * l.gram();
    let inv = smith_normal_form(&pairing).invariants();
    if !inv[0].is_one() || inv[1].is_zero() {
        return Err(Error::InvalidArgument(format!("pairing of E with L has invariants {inv:?}")));
    }
    to_i64(&inv[1])
}

/// Gauss reduction of a positive definite binary Gram `[[a, b], [b, c]]`
/// under `GL(2, Z)`: returns `(reduced, R)` with `R^T G R = reduced`,
/// `0 <= 2b <= a <= c`.
fn reduce_binary(g: [[i128; 2]; 2]) -> ([[i128; 2]; 2], [[i128; 2]; 2]) {
    let (mut a, mut b, mut c) = (g[0][0], g[0][1], g[1][1]);
    let mut r = [[1i128, 0], [0, 1]];
    loop {
        // y -> y - k x
        let k = (2 * b + a).div_euclid(2 * a);
        if k != 0 {
            c += k * k * a - 2 * k * b;
            b -= k * a;
            r[0][1] -= k * r[0][0];
            r[1][1] -= k * r[1][0];
        }
        if c < a {
            (a, c) = (c, a);
            r = [[r[0][1], r[0][0]], [r[1][1], r[1][0]]];
            continue;
        }
        break;
    }
    if b < 0 {
        b = -b;
        r[0][0] = -r[0][0];
        r[1][0] = -r[1][0];
    }
    ([[a, b], [b, c]], r)
}

fn embed(n: usize, blocks: &[((usize, usize), IntMatrix)]) -> IntMatrix {
    let mut m = IntMatrix::identity(n);
    for ((r0, c0), blk) in blocks {
        for i in 0..blk.rows() {
            for j in 0..blk.cols() {
                m[(r0 + i, c0 + j)] = blk[(i, j)].clone();
            }
        }
    }
    m
}

/// Realises the block form above for a primitive totally isotropic plane of
/// a rank-six lattice of signature `(2, 4)`. `C` is cleared completely and
/// `d` is reduced into `[0, 2a)`.
pub fn rank2_normal_form(l: &Lattice, e: &Sublattice) -> Result<NormalForm> {
    check_plane(l, e)?;
    if l.rank() != 6 {
        return Err(Error::Dimension("normal forms are for rank-6 lattices".into()));
    }
    let g = l.gram();
    let mut transcript = Vec::new();

    // E^perp with E's basis first, then a completion to L.
    let perp = l.orthogonal_complement(e);
    let coords = e
        .vectors()
        .iter()
        .map(|x| solve_integer(&perp.basis, x).ok_or_else(|| Error::Invariant("E not inside E^perp".into())))
        .collect::<Result<Vec<_>>>()?;
    let k = complete_to_basis(&IntMatrix::from_columns(4, &coords)?)?;
    let perp_basis = &perp.basis * &k;
    let initial = complete_to_basis(&perp_basis)?;
    transcript.push(BaseChange { step: "initial", matrix: initial.clone() });
    let mut basis = initial;
    let gram_of = |b: &IntMatrix| &(&b.transpose() * g) * b;

    // A -> [[0, 1], [a, 0]]
    let q = gram_of(&basis);
    let snf = smith_normal_form(&q.submatrix(0, 2, 4, 6));
    let inv = snf.invariants();
    if !inv[0].is_one() || inv[1].is_zero() {
        return Err(Error::InvalidArgument(format!("pairing block has invariants {inv:?}")));
    }
    let a = to_i64(&inv[1])?;
    let swap = m2([[0, 1], [1, 0]]);
    let m = embed(6, &[((0, 0), snf.u.transpose()), ((4, 4), &snf.v * &swap)]);
    basis = &basis * &m;
    transcript.push(BaseChange { step: "pairing", matrix: m });

    // Reduce B.
    let q = gram_of(&basis);
    let nb = [[-to_i128(&q[(2, 2)])?, -to_i128(&q[(2, 3)])?], [-to_i128(&q[(3, 2)])?, -to_i128(&q[(3, 3)])?]];
    if nb[0][0] <= 0 || nb[0][0] * nb[1][1] - nb[0][1] * nb[1][0] <= 0 {
        return Err(Error::InvalidArgument("E^perp / E is not negative definite".into()));
    }
    let (_, r) = reduce_binary(nb);
    let r = IntMatrix::from_rows(r.iter().map(|row| row.iter().map(|&x| BigInt::from(x)).collect()).collect())?;
    let m = embed(6, &[((2, 2), r)]);
    basis = &basis * &m;
    transcript.push(BaseChange { step: "reduce-b", matrix: m });

    // Clear C: choose T with B t = -c (first column) mod a, then S.
    let q = gram_of(&basis);
    let b = q.submatrix(2, 4, 2, 4);
    let c = q.submatrix(2, 4, 4, 6);
    let bi = |i, j| to_i128(&b[(i, j)]);
    let (b11, b12, b21, b22) = (bi(0, 0)?, bi(0, 1)?, bi(1, 0)?, bi(1, 1)?);
    let (c11, c21) = (to_i128(&c[(0, 0)])?, to_i128(&c[(1, 0)])?);
    let (t1, t2) = if a == 1 {
        (0, 0)
    } else {
        let det = (b11 * b22 - b12 * b21).rem_euclid(a as i128) as i64;
        let det_inv = mod_inverse(det, a)
            .ok_or_else(|| Error::Invariant(format!("det B is not a unit mod {a}")))? as i128;
        let a128 = a as i128;
        let t1 = (-(b22 * c11 - b12 * c21) * det_inv).rem_euclid(a128);
        let t2 = (-(-b21 * c11 + b11 * c21) * det_inv).rem_euclid(a128);
        (t1, t2)
    };
    let t = IntMatrix::from_rows(vec![
        vec![BigInt::from(t1), BigInt::zero()],
        vec![BigInt::from(t2), BigInt::zero()],
    ])?;
    let x = (&b * &t).add(&c);
    let ab = BigInt::from(a);
    if !x[(0, 0)].is_multiple_of(&ab) || !x[(1, 0)].is_multiple_of(&ab) {
        return Err(Error::Invariant("C reduction left a residue mod a".into()));
    }
    let s = IntMatrix::from_rows(vec![
        vec![-&x[(0, 1)], -&x[(1, 1)]],
        vec![-(&x[(0, 0)] / &ab), -(&x[(1, 0)] / &ab)],
    ])?;
    let m = embed(6, &[((0, 2), s), ((2, 4), t)]);
    basis = &basis * &m;
    transcript.push(BaseChange { step: "clear-c", matrix: m });

    // D -> diag(d, 0) with 0 <= d < 2a.
    let q = gram_of(&basis);
    let (d11, d12, d22) = (q[(4, 4)].clone(), q[(4, 5)].clone(), q[(5, 5)].clone());
    let w = IntMatrix::from_rows(vec![
        vec![-d12, -(d22 / BigInt::from(2))],
        vec![-Integer::div_floor(&d11, &(BigInt::from(2) * &ab)), BigInt::zero()],
    ])?;
    let m = embed(6, &[((0, 4), w)]);
    basis = &basis * &m;
    transcript.push(BaseChange { step: "reduce-d", matrix: m });

    let q = gram_of(&basis);
    let nf = NormalForm {
        a,
        b: q.submatrix(2, 4, 2, 4),
        c: q.submatrix(2, 4, 4, 6),
        d: to_i64(&q[(4, 4)])?,
        basis,
        transcript,
        alternative_b: None,
    };
    if nf.assemble() != q {
        return Err(Error::Invariant(format!("normal form did not reach block shape:\n{q}")));
    }
    if !(0..2 * a).contains(&nf.d) || nf.d % 2 != 0 {
        return Err(Error::Invariant(format!("d = {} not reduced mod {}", nf.d, 2 * a)));
    }
    Ok(with_alternative(nf))
}

fn with_alternative(mut nf: NormalForm) -> NormalForm {
    let split = m2([[-2, 0], [0, -6]]);
    let hex = m2([[-4, -2], [-2, -4]]);
    if nf.b == split {
        nf.alternative_b = Some(hex);
    } else if nf.b == hex {
        nf.alternative_b = Some(split);
    }
    nf
}

/// The reduced `B` blocks allowed for type `a` in `L_{2p^2}`; empty when
/// the type does not constrain `B`.
pub fn admissible_b(a: i64, p: i64) -> Vec<IntMatrix> {
    if a == p {
        vec![m2([[-2, 0], [0, -6]]), m2([[-4, -2], [-2, -4]])]
    } else if a == 2 * p {
        vec![m2([[-2, -1], [-1, -2]])]
    } else {
        Vec::new()
    }
}

/// Shape constraints on a normal form of a plane in `L_{2p^2}`.
pub fn check_shape(nf: &NormalForm, l: &Lattice, p: i64) -> Result<()> {
    let fail = |msg: String| Err(Error::Invariant(msg));
    if ![1, 2, p, 2 * p].contains(&nf.a) {
        return fail(format!("type {} is not one of 1, 2, p, 2p", nf.a));
    }
    if !nf.c.is_zero() {
        return fail("C block is nonzero".into());
    }
    if nf.a == 1 && nf.d != 0 {
        return fail("type 1 needs d = 0".into());
    }
    let allowed = admissible_b(nf.a, p);
    if !allowed.is_empty() && !allowed.contains(&nf.b) {
        return fail(format!("B = {} is not admissible for a = {}", nf.b, nf.a));
    }
    if !nf.basis.det()?.abs().is_one() {
        return fail("basis is not unimodular".into());
    }
    let q = nf.assemble();
    if (&(&nf.basis.transpose() * l.gram()) * &nf.basis) != q {
        return fail("basis does not realise Q".into());
    }
    if q.det()?.abs() != BigInt::from(12 * p * p) {
        return fail(format!("|det Q| = {}", q.det()?.abs()));
    }
    Ok(())
}

/// `E = <e1, v2>` for each of the four types, with `v2` taken in
/// `U + <-6> + <-2p^2>` (the second hyperbolic plane and the two marks).
pub fn rank2_representatives(l: &Lattice, p: i64) -> Result<Vec<(i64, Sublattice)>> {
    check_boundary_prime(p)?;
    let tails: [(i64, [i64; 4]); 4] = [
        (1, [1, 0, 0, 0]),
        (2, [2, 2 * p * p, p, 1]),
        (p, [p, p, 0, 1]),
        (2 * p, [2 * p, 2 * p, p, 1]),
    ];
    tails
        .iter()
        .map(|&(a, t)| {
            let e = Sublattice::from_vectors(6, &[int_vec(&[1, 0, 0, 0, 0, 0]), int_vec(&[0, 0, t[0], t[1], t[2], t[3]])])?;
            let got = rank2_type(l, &e)?;
            if got != a {
                return Err(Error::Invariant(format!("representative for type {a} has type {got}")));
            }
            Ok((a, e))
        })
        .collect()
}

/// `det u = 1` and, for `a > 1`, `u = [[1, 0], [*, 1]] mod a`.
pub fn in_gamma1(u: &Mat2, a: i64) -> bool {
    let det = u[0][0] as i128 * u[1][1] as i128 - u[0][1] as i128 * u[1][0] as i128;
    det == 1
        && (a == 1
            || (u[0][0].rem_euclid(a) == 1 % a && u[0][1].rem_euclid(a) == 0 && u[1][1].rem_euclid(a) == 1 % a))
}

fn mat2_to_int(m: &[[i128; 2]; 2]) -> IntMatrix {
    IntMatrix::from_rows(m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect())
        .expect("2x2 rows")
}

/// The `E`-block of `g` in the normal-form basis: `g v_j = sum_i U_ij v_i`
/// for `j = 1, 2`. Fails if `g` does not stabilise `E`.
pub fn pi_e(nf: &NormalForm, g: &Isometry) -> Result<Mat2> {
    let m = &(&nf.basis.inverse_unimodular()? * g.matrix()) * &nf.basis;
    for j in 0..2 {
        if (2..6).any(|i| !m[(i, j)].is_zero()) {
            return Err(Error::InvalidArgument("isometry does not stabilise E".into()));
        }
    }
    Ok([[to_i64(&m[(0, 0)])?, to_i64(&m[(0, 1)])?], [to_i64(&m[(1, 0)])?, to_i64(&m[(1, 1)])?]])
}

/// An element of the stabiliser of `E` with `E`-block `u`.
///
/// With `Z = [[r, s], [t, v]] = A^{-1} U^{-T} A`, the lift is
/// `[[U, V, U W], [0, I, 0], [0, 0, Z]]` where `W` solves
/// `W^T A + A^T W + Z^T D Z = D`, i.e. `2a w21 = d (1 - r^2)`,
/// `w11 = -d r s`, `2 w12 = -d s^2`, and `V^T = C (Z^{-1} - I) A^{-1}`.
pub fn lift_parabolic(parent: Arc<Lattice>, nf: &NormalForm, u: &Mat2) -> Result<Isometry> {
    let a = nf.a;
    if !in_gamma1(u, a) {
        let group = if a == 1 { "SL(2, Z)".to_string() } else { format!("Gamma_1({a})") };
        return Err(Error::InvalidArgument(format!("U = {u:?} is not in {group}")));
    }
    let (a128, d) = (a as i128, nf.d as i128);
    let uu = u.map(|row| row.map(|x| x as i128));
    let (r, s, t, v) = (uu[0][0], -uu[0][1] / a128, -a128 * uu[1][0], uu[1][1]);
    let z = [[r, s], [t, v]];

    let w21_num = d * (1 - r * r);
    if w21_num % (2 * a128) != 0 || (d * s * s) % 2 != 0 {
        return Err(Error::Invariant("W-equation has no integral solution".into()));
    }
    let w = [[-d * r * s, -d * s * s / 2], [w21_num / (2 * a128), 0]];
    let uw = [
        [uu[0][0] * w[0][0] + uu[0][1] * w[1][0], uu[0][0] * w[0][1] + uu[0][1] * w[1][1]],
        [uu[1][0] * w[0][0] + uu[1][1] * w[1][0], uu[1][0] * w[0][1] + uu[1][1] * w[1][1]],
    ];

    // V^T = C (Z^{-1} - I) A^{-1}; the first column of X is divided by a.
    let c = [[to_i128(&nf.c[(0, 0)])?, to_i128(&nf.c[(0, 1)])?], [to_i128(&nf.c[(1, 0)])?, to_i128(&nf.c[(1, 1)])?]];
    let zi = [[v - 1, -s], [-t, r - 1]];
    let x = [
        [c[0][0] * zi[0][0] + c[0][1] * zi[1][0], c[0][0] * zi[0][1] + c[0][1] * zi[1][1]],
        [c[1][0] * zi[0][0] + c[1][1] * zi[1][0], c[1][0] * zi[0][1] + c[1][1] * zi[1][1]],
    ];
    if x[0][0] % a128 != 0 || x[1][0] % a128 != 0 {
        return Err(Error::Invariant("V block is not integral".into()));
    }
    let vt = [[x[0][1], x[0][0] / a128], [x[1][1], x[1][0] / a128]];
    let vblk = [[vt[0][0], vt[1][0]], [vt[0][1], vt[1][1]]];

    let local = embed(
        6,
        &[
            ((0, 0), mat2_to_int(&uu)),
            ((0, 2), mat2_to_int(&vblk)),
            ((0, 4), mat2_to_int(&uw)),
            ((4, 4), mat2_to_int(&z)),
        ],
    );
    let g = &(&nf.basis * &local) * &nf.basis.inverse_unimodular()?;
    let iso = Isometry::new(parent, g)?;
    if pi_e(nf, &iso)? != *u {
        return Err(Error::Invariant("lift has the wrong E-block".into()));
    }
    Ok(iso)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::make_l2d;

    #[test]
    fn binary_reduction() {
        let (red, r) = reduce_binary([[6, 5], [5, 6]]);
        assert_eq!(red, [[2, 1], [1, 6]]);
        let rm = mat2_to_int(&r);
        let g = mat2_to_int(&[[6, 5], [5, 6]]);
        assert_eq!(&(&rm.transpose() * &g) * &rm, mat2_to_int(&red));
    }

    #[test]
    fn representative_types_and_shapes() {
        for p in [5i64, 7] {
            let l = make_l2d(p * p).unwrap();
            for (a, e) in rank2_representatives(&l, p).unwrap() {
                let nf = rank2_normal_form(&l, &e).unwrap();
                assert_eq!(nf.a, a);
                check_shape(&nf, &l, p).unwrap();
                assert!(nf.plane().basis.columns().iter().all(|x| e.contains(x)));
                if a == 1 {
                    assert_eq!(nf.d, 0);
                }
                if a == 2 * p {
                    assert_eq!(nf.b, m2([[-2, -1], [-1, -2]]));
                }
                if a == p {
                    assert!(nf.alternative_b.is_some());
                }
            }
        }
    }

    #[test]
    fn rejects_bad_planes() {
        let l = make_l2d(25).unwrap();
        let not_iso = Sublattice::from_vectors(6, &[int_vec(&[1, 0, 0, 0, 0, 0]), int_vec(&[0, 1, 0, 0, 0, 0])]).unwrap();
        assert!(matches!(rank2_type(&l, &not_iso), Err(Error::NotIsotropic(_))));
        let imprimitive =
            Sublattice::from_vectors(6, &[int_vec(&[1, 0, 0, 0, 0, 0]), int_vec(&[0, 0, 2, 0, 0, 0])]).unwrap();
        assert_eq!(rank2_type(&l, &imprimitive), Err(Error::NotPrimitive));
        let line = Sublattice::from_vectors(6, &[int_vec(&[1, 0, 0, 0, 0, 0])]).unwrap();
        assert!(rank2_type(&l, &line).is_err());
    }

    #[test]
    fn lifts_of_generators() {
        let p = 5;
        let l = Arc::new(make_l2d(p * p).unwrap());
        for (a, e) in rank2_representatives(&l, p).unwrap() {
            let nf = rank2_normal_form(&l, &e).unwrap();
            let id = lift_parabolic(l.clone(), &nf, &[[1, 0], [0, 1]]).unwrap();
            assert!(id.is_identity());
            let g = lift_parabolic(l.clone(), &nf, &[[1, 0], [a, 1]]).unwrap();
            assert!(g.in_gamma().unwrap(), "type {a}");
            let h = lift_parabolic(l.clone(), &nf, &[[1 + a, a], [-a, 1 - a]]).unwrap();
            assert!(h.in_gamma().unwrap(), "type {a}");
        }
        let nf = rank2_normal_form(&l, &rank2_representatives(&l, p).unwrap()[2].1).unwrap();
        assert!(matches!(lift_parabolic(l.clone(), &nf, &[[2, 1], [1, 1]]), Err(Error::InvalidArgument(_))));
    }
}
