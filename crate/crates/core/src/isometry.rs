//! Lattice isometries: reflections, spinor norm, Eichler transvections,
//! discriminant action and the group-membership tests built on them.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fqm::DiscElement;
use crate::lattice::{Lattice, RatVector, Vector};
use crate::linalg::{kernel_basis, rat_vec, IntMatrix, RatMatrix};

/// An integral isometry `g` of its parent lattice: `g^T G g = G`.
#[derive(Clone, Debug)]
pub struct Isometry {
    matrix: IntMatrix,
    parent: Arc<Lattice>,
}

impl PartialEq for Isometry {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix && self.parent.gram() == other.parent.gram()
    }
}

#[derive(Serialize, Deserialize)]
struct IsometryJson {
    matrix: Vec<Vec<String>>,
    lattice_hash: String,
}

impl Isometry {
    pub fn new(parent: Arc<Lattice>, matrix: IntMatrix) -> Result<Self> {
        let g = parent.gram();
        if matrix.rows() != g.rows() || matrix.cols() != g.cols() {
            return Err(Error::Dimension("isometry must be square of lattice rank".into()));
        }
        if &(&(&matrix.transpose() * g) * &matrix) != g {
            return Err(Error::NotIsometry("g^T G g != G".into()));
        }
        Ok(Isometry { matrix, parent })
    }

    pub fn identity(parent: Arc<Lattice>) -> Self {
        let n = parent.rank();
        Isometry { matrix: IntMatrix::identity(n), parent }
    }

    pub fn minus_identity(parent: Arc<Lattice>) -> Self {
        let n = parent.rank();
        Isometry { matrix: IntMatrix::identity(n).neg(), parent }
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    pub fn parent(&self) -> &Arc<Lattice> {
        &self.parent
    }

    pub fn is_identity(&self) -> bool {
        self.matrix.is_identity()
    }

    /// `self` after `other`, i.e. the matrix product `self * other`.
    pub fn compose(&self, other: &Isometry) -> Isometry {
        Isometry { matrix: &self.matrix * &other.matrix, parent: self.parent.clone() }
    }

    /// `G^{-1} g^T G`.
    pub fn inverse(&self) -> Isometry {
        let g = self.parent.gram();
        let inv = &(&g.to_rat().inverse().expect("nondegenerate") * &self.matrix.transpose().to_rat()) * &g.to_rat();
        Isometry { matrix: inv.to_int().expect("isometry inverse is integral"), parent: self.parent.clone() }
    }

    pub fn apply(&self, v: &[BigInt]) -> Vector {
        self.matrix.mul_vec(v)
    }

    pub fn apply_rat(&self, v: &[BigRational]) -> RatVector {
        self.matrix.to_rat().mul_vec(v)
    }

    /// Images of the discriminant generators, in the parent's presentation.
    pub fn discriminant_action(&self) -> Result<Vec<DiscElement>> {
        let disc = self.parent.discriminant()?;
        disc.generators().iter().map(|x| disc.class_of(&self.apply_rat(x))).collect()
    }

    pub fn act_on_discriminant(&self, x: &DiscElement) -> Result<DiscElement> {
        let disc = self.parent.discriminant()?;
        disc.class_of(&self.apply_rat(&disc.lift(x)))
    }

    /// Trivial action on `D(L)`.
    pub fn in_stable(&self) -> Result<bool> {
        let disc = self.parent.discriminant()?;
        let module = &disc.module;
        let images = self.discriminant_action()?;
        Ok(images.iter().enumerate().all(|(i, y)| *y == module.generator(i)))
    }

    pub fn spinor_norm(&self) -> Result<i8> {
        spinor_norm(&self.parent, &self.matrix.to_rat())
    }

    pub fn in_oplus(&self) -> Result<bool> {
        Ok(self.spinor_norm()? == 1)
    }

    /// `g` in `O+(L)` with `g v* = v*` in `D(L)`, for the marked `v`.
    pub fn in_gamma(&self) -> Result<bool> {
        let v = self.parent.v_mark()?;
        if !self.in_oplus()? {
            return Ok(false);
        }
        let star = self.parent.star(&v)?;
        Ok(self.act_on_discriminant(&star)? == star)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(IsometryJson {
            matrix: self.matrix.to_string_rows(),
            lattice_hash: self.parent.content_hash(),
        })
        .expect("isometry serializes")
    }

    pub fn from_json(parent: Arc<Lattice>, v: &serde_json::Value) -> Result<Self> {
        let j: IsometryJson = serde_json::from_value(v.clone()).map_err(|e| Error::Serde(e.to_string()))?;
        if j.lattice_hash != parent.content_hash() {
            return Err(Error::Serde("isometry belongs to a different lattice".into()));
        }
        let n = j.matrix.len();
        let flat: Vec<String> = j.matrix.into_iter().flatten().collect();
        Isometry::new(parent, IntMatrix::from_decimal_strings(n, n, &flat)?)
    }
}

/// Rational matrix of `x -> x - 2 (x,w)/(w,w) w`.
pub fn reflection_matrix(l: &Lattice, w: &[BigRational]) -> Result<RatMatrix> {
    let ww = l.pair_rat(w, w);
    if ww.is_zero() {
        return Err(Error::NotIsotropic("cannot reflect in an isotropic vector".into()));
    }
    let n = l.rank();
    let gw = l.gram().to_rat().mul_vec(w);
    let two = BigRational::from_integer(BigInt::from(2));
    let mut m = RatMatrix::identity(n);
    for i in 0..n {
        for j in 0..n {
            let c = &two * &w[i] * &gw[j] / &ww;
            m[(i, j)] -= c;
        }
    }
    Ok(m)
}

/// `sigma_w` as an integral isometry; fails if it does not preserve `L`.
pub fn reflection(parent: Arc<Lattice>, w: &[BigInt]) -> Result<Isometry> {
    let m = reflection_matrix(&parent, &rat_vec(w))?;
    let m = m.to_int().ok_or_else(|| Error::NotIntegral("reflection does not preserve L".into()))?;
    Isometry::new(parent, m)
}

/// `g = sigma_{w_1} ... sigma_{w_k}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReflectionWord {
    pub vectors: Vec<RatVector>,
}

impl ReflectionWord {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn composite(&self, l: &Lattice) -> Result<RatMatrix> {
        let mut acc = RatMatrix::identity(l.rank());
        for w in &self.vectors {
            acc = &acc * &reflection_matrix(l, w)?;
        }
        Ok(acc)
    }

    /// Product of the signs of `-(w_i, w_i)/2`.
    pub fn spinor_norm(&self, l: &Lattice) -> i8 {
        let negatives = self.vectors.iter().filter(|w| l.pair_rat(w, w).is_positive()).count();
        if negatives % 2 == 0 {
            1
        } else {
            -1
        }
    }
}

/// Decomposes a rational isometry into reflections.
///
/// Maintains `h = sigma_{w_j} ... sigma_{w_1} g` and an anisotropic,
/// pairwise orthogonal set `F` fixed by `h`. Each step picks `x` in `F^perp`
/// with `(x,x) != 0`: free if `hx = x`, one reflection in `hx - x` when that is
/// anisotropic, otherwise two reflections (`hx + x`, then `x`).
pub fn decompose_reflections(l: &Lattice, g: &RatMatrix) -> Result<ReflectionWord> {
    let n = l.rank();
    let gram = l.gram().to_rat();
    if &(&g.transpose() * &gram) * g != gram {
        return Err(Error::NotIsometry("matrix does not preserve the form".into()));
    }
    let mut h = g.clone();
    let mut fixed: Vec<RatVector> = Vec::new();
    let mut applied: Vec<RatVector> = Vec::new();
    let diff = |h: &RatMatrix, x: &RatVector, sign: i32| -> RatVector {
        let hx = h.mul_vec(x);
        hx.iter()
            .zip(x)
            .map(|(a, b)| if sign > 0 { a - b } else { a + b })
            .collect()
    };
    let is_zero = |v: &RatVector| v.iter().all(Zero::is_zero);
    while fixed.len() < n {
        let rest = orthogonal_basis(l, &complement_basis(l, &fixed))?;
        let mut candidates = rest.clone();
        for i in 0..rest.len() {
            for j in i + 1..rest.len() {
                candidates.push(rest[i].iter().zip(&rest[j]).map(|(a, b)| a + b).collect());
            }
        }
        candidates.retain(|x| !l.pair_rat(x, x).is_zero());
        if let Some(x) = candidates.iter().find(|x| is_zero(&diff(&h, x, 1))) {
            fixed.push(x.clone());
            continue;
        }
        if let Some(x) = candidates.iter().find(|x| !l.pair_rat(&diff(&h, x, 1), &diff(&h, x, 1)).is_zero()) {
            let w = diff(&h, x, 1);
            h = &reflection_matrix(l, &w)? * &h;
            applied.push(w);
            fixed.push(x.clone());
            continue;
        }
        let x = rest[0].clone();
        let w = diff(&h, &x, -1);
        h = &reflection_matrix(l, &w)? * &h;
        h = &reflection_matrix(l, &x)? * &h;
        applied.push(w);
        applied.push(x.clone());
        fixed.push(x);
    }
    if !h.is_identity() {
        return Err(Error::Invariant("reflection decomposition did not terminate at id".into()));
    }
    // sigma_{a_k} ... sigma_{a_1} g = id, so g = sigma_{a_1} ... sigma_{a_k}.
    Ok(ReflectionWord { vectors: applied })
}

/// Integral basis of the orthogonal complement of the span of `fixed`.
fn complement_basis(l: &Lattice, fixed: &[RatVector]) -> Vec<RatVector> {
    let n = l.rank();
    if fixed.is_empty() {
        return (0..n).map(|i| rat_vec(&l.basis_vector(i))).collect();
    }
    let rows: Vec<Vec<BigInt>> = fixed
        .iter()
        .map(|f| {
            let gf = l.gram().to_rat().mul_vec(f);
            let den = gf.iter().fold(BigInt::one(), |acc, x| num_integer::lcm(acc, x.denom().clone()));
            gf.iter().map(|x| (x * BigRational::from_integer(den.clone())).to_integer()).collect()
        })
        .collect();
    let m = IntMatrix::from_rows(rows).expect("rectangular");
    kernel_basis(&m).columns().iter().map(|c| rat_vec(c)).collect()
}

/// Pairwise orthogonal anisotropic basis of a nondegenerate subspace.
fn orthogonal_basis(l: &Lattice, span: &[RatVector]) -> Result<Vec<RatVector>> {
    let mut vs: Vec<RatVector> = span.to_vec();
    let mut out = Vec::new();
    while !vs.is_empty() {
        let pos = vs.iter().position(|x| !l.pair_rat(x, x).is_zero());
        let pivot = match pos {
            Some(i) => vs.remove(i),
            None => {
                // All remaining are isotropic; some pair must pair nontrivially.
                let (i, j) = (0..vs.len())
                    .flat_map(|i| (i + 1..vs.len()).map(move |j| (i, j)))
                    .find(|&(i, j)| !l.pair_rat(&vs[i], &vs[j]).is_zero())
                    .ok_or_else(|| Error::Degenerate("degenerate subspace".into()))?;
                let s: RatVector = vs[i].iter().zip(&vs[j]).map(|(a, b)| a + b).collect();
                vs[i] = s;
                continue;
            }
        };
        let pp = l.pair_rat(&pivot, &pivot);
        for x in vs.iter_mut() {
            let c = l.pair_rat(x, &pivot) / &pp;
            for (xi, pi) in x.iter_mut().zip(&pivot) {
                *xi -= &c * pi;
            }
        }
        vs.retain(|x| x.iter().any(|c| !c.is_zero()));
        out.push(pivot);
    }
    Ok(out)
}

/// Real spinor norm with the `-(w,w)/2` convention, from a reflection word.
pub fn spinor_norm(l: &Lattice, g: &RatMatrix) -> Result<i8> {
    Ok(decompose_reflections(l, g)?.spinor_norm(l))
}

/// `t(e,a): w -> w - (a,w) e + (e,w) a - (a,a)/2 (e,w) e`.
pub fn eichler_transvection(parent: Arc<Lattice>, e: &[BigInt], a: &[BigInt]) -> Result<Isometry> {
    if !parent.norm(e).is_zero() {
        return Err(Error::NotIsotropic("t(e,a) needs isotropic e".into()));
    }
    if !parent.pair(e, a).is_zero() {
        return Err(Error::InvalidArgument("t(e,a) needs (e,a) = 0".into()));
    }
    let n = parent.rank();
    let half_aa = parent.norm(a) / 2;
    let ge = parent.gram().mul_vec(e);
    let ga = parent.gram().mul_vec(a);
    let mut m = IntMatrix::zeros(n, n);
    for j in 0..n {
        // image of basis vector j
        let (aw, ew) = (&ga[j], &ge[j]);
        for i in 0..n {
            let mut x = if i == j { BigInt::one() } else { BigInt::zero() };
            x -= aw * &e[i];
            x += ew * &a[i];
            x -= &half_aa * ew * &e[i];
            m[(i, j)] = x;
        }
    }
    Isometry::new(parent, m)
}

/// Which hyperbolic planes of the parent carry the `M_2(Z)` picture.
fn two_u_coords(l: &Lattice) -> Result<[usize; 4]> {
    let m = l.marks();
    if m.e.len() < 2 || m.f.len() < 2 {
        return Err(Error::MissingMark("e/f (two hyperbolic planes)"));
    }
    Ok([m.e[0], m.f[0], m.e[1], m.f[1]])
}

/// 2x2 integer matrix as `[[a, b], [c, d]]`.
pub type Mat2 = [[i64; 2]; 2];

fn det2(m: &Mat2) -> i64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// The isometry `X -> A X B^{-1}` of `2U = M_2(Z)`, where
/// `w e1 + x f1 + y e2 + z f2 <-> [[w, -y], [z, x]]` and the form is `2 det`.
/// Identity on the rest of the lattice.
pub fn o2u_from_sl2_pair(parent: Arc<Lattice>, a: &Mat2, b: &Mat2) -> Result<Isometry> {
    if det2(a) != 1 || det2(b) != 1 {
        return Err(Error::InvalidArgument("A and B must lie in SL2(Z)".into()));
    }
    let idx = two_u_coords(&parent)?;
    let b_inv: Mat2 = [[b[1][1], -b[0][1]], [-b[1][0], b[0][0]]];
    let mul = |x: &Mat2, y: &Mat2| -> Mat2 {
        let mut r = [[0i64; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                r[i][j] = x[i][0] * y[0][j] + x[i][1] * y[1][j];
            }
        }
        r
    };
    let n = parent.rank();
    let mut m = IntMatrix::identity(n);
    for (k, &col) in idx.iter().enumerate() {
        let mut c = [0i64; 4];
        c[k] = 1;
        let x: Mat2 = [[c[0], -c[2]], [c[3], c[1]]];
        let y = mul(&mul(a, &x), &b_inv);
        let image = [y[0][0], y[1][1], -y[0][1], y[1][0]];
        for (r, &row) in idx.iter().enumerate() {
            m[(row, col)] = BigInt::from(image[r]);
        }
    }
    Isometry::new(parent, m)
}

/// `(v^2, v*)`: by the Eichler criterion this determines the `O~+(L)`-orbit
/// of a primitive vector when `L` contains two hyperbolic planes.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EichlerInvariant {
    pub norm: BigInt,
    pub star: DiscElement,
}

pub fn eichler_invariant(l: &Lattice, v: &[BigInt]) -> Result<EichlerInvariant> {
    Ok(EichlerInvariant { norm: l.norm(v), star: l.star(v)? })
}

pub fn same_orbit_invariant(l: &Lattice, v1: &[BigInt], v2: &[BigInt]) -> Result<bool> {
    Ok(eichler_invariant(l, v1)? == eichler_invariant(l, v2)?)
}

/// `L_{2p^2} -> L_2`, `v -> p v` on the `<-2d>` generator.
pub fn embed_in_l2(v: &[BigInt], p: i64) -> Vector {
    let mut out = v.to_vec();
    out[5] *= BigInt::from(p);
    out
}

/// `J g J^{-1}` with `J = diag(1,1,1,1,1,p)`; must be integral and lie in `Gamma_2`.
pub fn extend_isometry_to_l2(g: &Isometry, l2: Arc<Lattice>, p: i64) -> Result<Isometry> {
    let n = g.matrix.rows();
    let pb = BigInt::from(p);
    let mut m = g.matrix.clone();
    for i in 0..n {
        if i != 5 {
            let x = &m[(i, 5)];
            if !(x % &pb).is_zero() {
                return Err(Error::NotIntegral(format!("extension has entry {x}/{p}")));
            }
            m[(i, 5)] = x / &pb;
            m[(5, i)] = &m[(5, i)] * &pb;
        }
    }
    let ext = Isometry::new(l2, m)?;
    if !ext.in_gamma()? {
        return Err(Error::Invariant("extension is not in Gamma_2".into()));
    }
    Ok(ext)
}

/// `t(e, c a)` for integer `c`.
pub fn scaled(a: &[BigInt], c: &BigInt) -> Vector {
    a.iter().map(|x| x * c).collect()
}
