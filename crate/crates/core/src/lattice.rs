//! Even integral lattices, their discriminant forms and sublattices.

use std::collections::HashMap;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::arith::big_gcd_all;
use crate::error::{Error, Result};
use crate::fqm::{DiscElement, FiniteQuadraticModule, QValue};
use crate::linalg::{
    int_vec, is_saturated, kernel_basis, rat_vec, signature, smith_normal_form, solve_integer,
    IntMatrix, RatMatrix,
};

/// Integer coordinates with respect to a lattice basis.
pub type Vector = Vec<BigInt>;
/// Rational coordinates, used for vectors of the dual lattice.
pub type RatVector = Vec<BigRational>;

/// Named basis vectors, by index. `e[i]`, `f[i]` span the i-th copy of `U`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Marks {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<usize>,
    #[serde(default)]
    pub e: Vec<usize>,
    #[serde(default)]
    pub f: Vec<usize>,
}

impl Marks {
    fn shifted(&self, by: usize) -> Marks {
        Marks {
            v: self.v.map(|i| i + by),
            w: self.w.map(|i| i + by),
            e: self.e.iter().map(|i| i + by).collect(),
            f: self.f.iter().map(|i| i + by).collect(),
        }
    }
}

#[derive(Debug)]
pub struct Lattice {
    gram: IntMatrix,
    marks: Marks,
    disc: OnceLock<std::result::Result<Discriminant, Error>>,
}

impl Clone for Lattice {
    fn clone(&self) -> Self {
        Lattice { gram: self.gram.clone(), marks: self.marks.clone(), disc: self.disc.clone() }
    }
}

impl PartialEq for Lattice {
    fn eq(&self, other: &Self) -> bool {
        self.gram == other.gram && self.marks == other.marks
    }
}

impl Eq for Lattice {}

#[derive(Serialize, Deserialize)]
struct LatticeJson {
    rank: usize,
    gram: Vec<String>,
    marks: Marks,
}

impl Lattice {
    /// An even, nondegenerate lattice.
    pub fn new(gram: IntMatrix) -> Result<Self> {
        let l = Self::new_possibly_degenerate(gram)?;
        if l.gram.det()?.is_zero() {
            return Err(Error::Degenerate("Gram matrix is singular".into()));
        }
        Ok(l)
    }

    /// An even lattice whose form may be degenerate (e.g. `E^perp`).
    pub fn new_possibly_degenerate(gram: IntMatrix) -> Result<Self> {
        if !gram.is_symmetric() {
            return Err(Error::InvalidArgument("Gram matrix must be symmetric".into()));
        }
        let two = BigInt::from(2);
        if let Some(i) = (0..gram.rows()).find(|&i| !gram[(i, i)].is_multiple_of(&two)) {
            return Err(Error::NotEven(format!("diagonal entry {i} is {}", gram[(i, i)])));
        }
        Ok(Lattice { gram, marks: Marks::default(), disc: OnceLock::new() })
    }

    pub fn with_marks(mut self, marks: Marks) -> Result<Self> {
        let n = self.rank();
        let all = marks.v.iter().chain(&marks.w).chain(&marks.e).chain(&marks.f);
        if let Some(i) = all.into_iter().find(|&&i| i >= n) {
            return Err(Error::InvalidArgument(format!("mark index {i} out of range")));
        }
        self.marks = marks;
        self.disc = OnceLock::new();
        Ok(self)
    }

    pub fn gram(&self) -> &IntMatrix {
        &self.gram
    }

    pub fn marks(&self) -> &Marks {
        &self.marks
    }

    pub fn rank(&self) -> usize {
        self.gram.rows()
    }

    pub fn det(&self) -> BigInt {
        self.gram.det().expect("Gram is square")
    }

    pub fn signature(&self) -> Result<(usize, usize)> {
        signature(&self.gram)
    }

    pub fn basis_vector(&self, i: usize) -> Vector {
        let mut v = vec![BigInt::zero(); self.rank()];
        v[i] = BigInt::one();
        v
    }

    fn mark(&self, idx: Option<usize>, name: &'static str) -> Result<Vector> {
        idx.map(|i| self.basis_vector(i)).ok_or(Error::MissingMark(name))
    }

    /// The marked generator of the `<-2d>` summand.
    pub fn v_mark(&self) -> Result<Vector> {
        self.mark(self.marks.v, "v")
    }

    /// The marked generator of the `<-6>` summand.
    pub fn w_mark(&self) -> Result<Vector> {
        self.mark(self.marks.w, "w")
    }

    pub fn e(&self, i: usize) -> Result<Vector> {
        self.mark(self.marks.e.get(i).copied(), "e")
    }

    pub fn f(&self, i: usize) -> Result<Vector> {
        self.mark(self.marks.f.get(i).copied(), "f")
    }

    pub fn pair(&self, x: &[BigInt], y: &[BigInt]) -> BigInt {
        self.gram.bilinear(x, y)
    }

    pub fn norm(&self, x: &[BigInt]) -> BigInt {
        self.pair(x, x)
    }

    pub fn pair_rat(&self, x: &[BigRational], y: &[BigRational]) -> BigRational {
        let g = self.gram.to_rat();
        x.iter().zip(g.mul_vec(y)).map(|(a, b)| a * b).sum()
    }

    pub fn is_isotropic(&self, x: &[BigInt]) -> bool {
        self.norm(x).is_zero()
    }

    pub fn is_primitive(&self, x: &[BigInt]) -> bool {
        big_gcd_all(x).is_one()
    }

    /// Positive generator of the ideal `(x, L)`.
    pub fn divisor(&self, x: &[BigInt]) -> Result<BigInt> {
        if x.iter().all(Zero::is_zero) {
            return Err(Error::ZeroVector);
        }
        Ok(big_gcd_all(&self.gram.mul_vec(x)))
    }

    /// `x* = x / div(x)` as an element of `D(L)`.
    pub fn star(&self, x: &[BigInt]) -> Result<DiscElement> {
        if !self.is_primitive(x) {
            return Err(Error::NotPrimitive);
        }
        let d = self.divisor(x)?;
        let y: RatVector = x.iter().map(|c| BigRational::new(c.clone(), d.clone())).collect();
        self.discriminant()?.class_of(&y)
    }

    pub fn discriminant(&self) -> Result<&Discriminant> {
        self.disc
            .get_or_init(|| Discriminant::build(self))
            .as_ref()
            .map_err(Clone::clone)
    }

    pub fn discriminant_module(&self) -> Result<&FiniteQuadraticModule> {
        Ok(&self.discriminant()?.module)
    }

    pub fn is_totally_isotropic(&self, s: &Sublattice) -> bool {
        (&(&s.basis.transpose() * &self.gram) * &s.basis).is_zero()
    }

    /// Saturated kernel of the pairing with `s`.
    pub fn orthogonal_complement(&self, s: &Sublattice) -> Sublattice {
        Sublattice { basis: kernel_basis(&(&s.basis.transpose() * &self.gram)) }
    }

    /// Gram matrix of the restriction of the form to `s`.
    pub fn restrict(&self, s: &Sublattice) -> IntMatrix {
        &(&s.basis.transpose() * &self.gram) * &s.basis
    }

    /// `H_E = (E tensor Q  intersect  L^dual) / E`, as a sorted subgroup of `D(L)`.
    pub fn h_group(&self, e: &Sublattice) -> Result<Vec<DiscElement>> {
        if !self.is_totally_isotropic(e) {
            return Err(Error::NotIsotropic("H_E needs a totally isotropic E".into()));
        }
        let disc = self.discriminant()?;
        let m = &self.gram * &e.basis;
        let s = smith_normal_form(&m);
        let inv = s.invariants();
        let mut gens = Vec::new();
        for (i, di) in inv.iter().enumerate() {
            if di.is_zero() {
                return Err(Error::Degenerate("E has dependent columns".into()));
            }
            let y: RatVector = s.v.column(i).into_iter().map(|c| BigRational::new(c, di.clone())).collect();
            let x = e.basis.to_rat().mul_vec(&y);
            gens.push(disc.class_of(&x)?);
        }
        Ok(disc.module.generated_subgroup(&gens))
    }

    /// Lattice whose Gram is `m` times this one; marks are kept.
    pub fn rescale(&self, m: i64) -> Result<Lattice> {
        Lattice::new_possibly_degenerate(self.gram.scale(&BigInt::from(m)))?.with_marks(self.marks.clone())
    }

    pub fn direct_sum(&self, other: &Lattice) -> Lattice {
        let gram = IntMatrix::block_diag(&[&self.gram, &other.gram]);
        let o = other.marks.shifted(self.rank());
        let marks = Marks {
            v: self.marks.v.or(o.v),
            w: self.marks.w.or(o.w),
            e: self.marks.e.iter().chain(&o.e).copied().collect(),
            f: self.marks.f.iter().chain(&o.f).copied().collect(),
        };
        Lattice { gram, marks, disc: OnceLock::new() }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(LatticeJson {
            rank: self.rank(),
            gram: self.gram.to_decimal_strings(),
            marks: self.marks.clone(),
        })
        .expect("lattice serializes")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Lattice> {
        let j: LatticeJson = serde_json::from_value(v.clone()).map_err(|e| Error::Serde(e.to_string()))?;
        let gram = IntMatrix::from_decimal_strings(j.rank, j.rank, &j.gram)?;
        Lattice::new_possibly_degenerate(gram)?.with_marks(j.marks)
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn content_hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().to_string().as_bytes()))
    }
}

/// Columns of `basis` are vectors in the coordinates of some parent lattice.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Sublattice {
    pub basis: IntMatrix,
}

impl Sublattice {
    pub fn new(basis: IntMatrix) -> Result<Self> {
        if smith_normal_form(&basis).rank() != basis.cols() {
            return Err(Error::Degenerate("sublattice generators are dependent".into()));
        }
        Ok(Sublattice { basis })
    }

    pub fn from_vectors(n: usize, vs: &[Vector]) -> Result<Self> {
        Self::new(IntMatrix::from_columns(n, vs)?)
    }

    pub fn rank(&self) -> usize {
        self.basis.cols()
    }

    pub fn vectors(&self) -> Vec<Vector> {
        self.basis.columns()
    }

    /// `L / S` torsion free.
    pub fn is_primitive(&self) -> bool {
        is_saturated(&self.basis)
    }

    pub fn contains(&self, x: &[BigInt]) -> bool {
        solve_integer(&self.basis, x).is_some()
    }

    /// Coordinates of `x` in this basis, if `x` lies in the sublattice.
    pub fn coordinates(&self, x: &[BigInt]) -> Option<Vector> {
        solve_integer(&self.basis, x)
    }
}

/// `D(L)` with a fixed presentation.
///
/// Elements are first located in invariant-factor coordinates
/// `z = (U G x) mod d_i` taken from the Smith form `U G V = diag(d)`. Lattices
/// carrying both `v` and `w` marks in the shape `2U + <-6> + <-2d>` are then
/// re-expressed in the named generators (`w/6`, `v/2d`; or `v/2`, `w/2`, `w/3`
/// when `d = 1`) through a precomputed lookup table.
#[derive(Clone, Debug)]
pub struct Discriminant {
    pub module: FiniteQuadraticModule,
    /// Invariant-factor presentation taken directly from the Smith form.
    pub snf_module: FiniteQuadraticModule,
    u: IntMatrix,
    gram_rat: RatMatrix,
    snf_index: Vec<usize>,
    snf_orders: Vec<BigInt>,
    snf_generators: Vec<RatVector>,
    generators: Vec<RatVector>,
    to_named: Option<HashMap<Vec<i64>, DiscElement>>,
}

impl Discriminant {
    fn build(l: &Lattice) -> Result<Discriminant> {
        let s = smith_normal_form(&l.gram);
        let inv = s.invariants();
        if inv.iter().any(Zero::is_zero) {
            return Err(Error::Degenerate("discriminant of a degenerate lattice".into()));
        }
        let gram_rat = l.gram.to_rat();
        let g_inv = gram_rat.inverse()?;
        let u_inv = s.u.inverse_unimodular()?.to_rat();
        let snf_index: Vec<usize> = (0..inv.len()).filter(|&i| !inv[i].is_one()).collect();
        let snf_orders: Vec<BigInt> = snf_index.iter().map(|&i| inv[i].clone()).collect();
        let gu = &g_inv * &u_inv;
        let snf_generators: Vec<RatVector> = snf_index.iter().map(|&i| gu.column(i)).collect();
        let snf_module = module_from_generators(l, &snf_generators, &snf_orders)?;
        let mut d = Discriminant {
            module: snf_module.clone(),
            snf_module,
            u: s.u,
            gram_rat,
            snf_index,
            snf_orders,
            generators: snf_generators.clone(),
            snf_generators,
            to_named: None,
        };
        if let Some(gens) = named_generators(l)? {
            d.install_presentation(l, gens)?;
        }
        Ok(d)
    }

    fn install_presentation(&mut self, l: &Lattice, gens: Vec<RatVector>) -> Result<()> {
        let snf_images = gens.iter().map(|g| self.snf_class(g)).collect::<Result<Vec<_>>>()?;
        let orders: Vec<BigInt> = snf_images.iter().map(|z| BigInt::from(self.snf_module.order(z))).collect();
        let module = module_from_generators(l, &gens, &orders)?;
        if module.size() != self.snf_module.size() {
            return Ok(());
        }
        let mut table = HashMap::with_capacity(module.size() as usize);
        for c in module.elements() {
            let z = module.apply_hom(&self.snf_module, &snf_images, &c);
            if table.insert(z.0, c).is_some() {
                // Not a basis of D(L): keep the invariant-factor presentation.
                return Ok(());
            }
        }
        self.module = module;
        self.generators = gens;
        self.to_named = Some(table);
        Ok(())
    }

    fn snf_class(&self, x: &[BigRational]) -> Result<DiscElement> {
        let gx = self.gram_rat.mul_vec(x);
        if !gx.iter().all(BigRational::is_integer) {
            return Err(Error::NotIntegral("vector is not in the dual lattice".into()));
        }
        let gx: Vector = gx.iter().map(BigRational::to_integer).collect();
        let z = self.u.mul_vec(&gx);
        let coords = self
            .snf_index
            .iter()
            .zip(&self.snf_orders)
            .map(|(&i, d)| z[i].mod_floor(d).to_i64().expect("invariant factor fits i64"))
            .collect();
        Ok(DiscElement(coords))
    }

    /// Class of a dual-lattice vector in the active presentation.
    pub fn class_of(&self, x: &[BigRational]) -> Result<DiscElement> {
        let z = self.snf_class(x)?;
        match &self.to_named {
            None => Ok(z),
            Some(t) => t.get(&z.0).cloned().ok_or_else(|| Error::Invariant("class missing from table".into())),
        }
    }

    pub fn class_of_integral(&self, x: &[BigInt]) -> Result<DiscElement> {
        self.class_of(&rat_vec(x))
    }

    /// Dual-lattice lifts of the active generators.
    pub fn generators(&self) -> &[RatVector] {
        &self.generators
    }

    pub fn snf_generators(&self) -> &[RatVector] {
        &self.snf_generators
    }

    /// A dual-lattice lift of `x`.
    pub fn lift(&self, x: &DiscElement) -> RatVector {
        let n = self.gram_rat.rows();
        let mut acc = vec![BigRational::zero(); n];
        for (c, g) in x.0.iter().zip(&self.generators) {
            for (a, gi) in acc.iter_mut().zip(g) {
                *a += gi * BigRational::from_integer(BigInt::from(*c));
            }
        }
        acc
    }

    pub fn has_named_presentation(&self) -> bool {
        self.to_named.is_some()
    }
}

fn module_from_generators(l: &Lattice, gens: &[RatVector], orders: &[BigInt]) -> Result<FiniteQuadraticModule> {
    let to_q = |x: BigRational| -> Result<QValue> {
        let n = x.numer().to_i64();
        let d = x.denom().to_i64();
        match (n, d) {
            (Some(n), Some(d)) => Ok(QValue::new(n, d)),
            _ => Err(Error::InvalidArgument("discriminant form values exceed i64".into())),
        }
    };
    // Shift into a small window first so numerators stay small.
    let reduce = |x: BigRational| -> BigRational {
        let two = BigRational::from_integer(BigInt::from(2));
        let k = (&x / &two).floor();
        x - k * two
    };
    let mut gram = vec![vec![QValue::from_integer(0); gens.len()]; gens.len()];
    for i in 0..gens.len() {
        for j in 0..gens.len() {
            gram[i][j] = to_q(reduce(l.pair_rat(&gens[i], &gens[j])))?;
        }
    }
    let orders = orders
        .iter()
        .map(|o| o.to_i64().ok_or_else(|| Error::InvalidArgument("group order exceeds i64".into())))
        .collect::<Result<Vec<_>>>()?;
    if orders.is_empty() {
        return Ok(FiniteQuadraticModule::trivial());
    }
    FiniteQuadraticModule::from_gram(orders, &gram)
}

/// Named generators for lattices marked with `v` (norm `-2d`) and `w` (norm `-6`).
fn named_generators(l: &Lattice) -> Result<Option<Vec<RatVector>>> {
    let (Some(vi), Some(wi)) = (l.marks.v, l.marks.w) else {
        return Ok(None);
    };
    let v = l.basis_vector(vi);
    let w = l.basis_vector(wi);
    if l.norm(&w) != BigInt::from(-6) {
        return Ok(None);
    }
    let two_d = -l.norm(&v);
    if !two_d.is_positive() {
        return Ok(None);
    }
    let frac = |x: &Vector, k: &BigInt| -> RatVector {
        x.iter().map(|c| BigRational::new(c.clone(), k.clone())).collect()
    };
    let gens = if two_d == BigInt::from(2) {
        vec![frac(&v, &BigInt::from(2)), frac(&w, &BigInt::from(2)), frac(&w, &BigInt::from(3))]
    } else {
        vec![frac(&w, &BigInt::from(6)), frac(&v, &two_d)]
    };
    Ok(Some(gens))
}

pub fn make_u() -> Lattice {
    Lattice::new(IntMatrix::from_i64_rows(&[vec![0, 1], vec![1, 0]]))
        .expect("U is even")
        .with_marks(Marks { e: vec![0], f: vec![1], ..Marks::default() })
        .expect("marks in range")
}

/// `<d>` for even nonzero `d`.
pub fn make_rank_one(d: i64) -> Result<Lattice> {
    if d == 0 {
        return Err(Error::Degenerate("<0> is degenerate".into()));
    }
    Lattice::new(IntMatrix::from_i64_rows(&[vec![d]]))
}

pub fn make_a2() -> Lattice {
    Lattice::new(IntMatrix::from_i64_rows(&[vec![2, -1], vec![-1, 2]])).expect("A2 is even")
}

/// `L_{2d} = 2U + <-6> + <-2d>` in the basis `(e1, f1, e2, f2, w, v)`.
pub fn make_l2d(d: i64) -> Result<Lattice> {
    if d < 1 {
        return Err(Error::InvalidArgument(format!("d must be >= 1 (got {d})")));
    }
    let u = make_u();
    let mut l = u.direct_sum(&u).direct_sum(&make_rank_one(-6)?).direct_sum(&make_rank_one(-2 * d)?);
    l.marks.w = Some(4);
    l.marks.v = Some(5);
    Ok(l)
}

/// `M = 3U + <-2(n+1)>`.
pub fn make_m(n: i64) -> Result<Lattice> {
    if n < 1 {
        return Err(Error::InvalidArgument(format!("n must be >= 1 (got {n})")));
    }
    let u = make_u();
    Ok(u.direct_sum(&u).direct_sum(&u).direct_sum(&make_rank_one(-2 * (n + 1))?))
}

#[derive(Clone, Debug)]
pub struct SplitComplement {
    pub m: Lattice,
    pub h: Vector,
    /// Basis of `h^perp` in `M` as returned by the kernel computation.
    pub complement: Sublattice,
    /// Gram matrix of `h^perp` in that basis.
    pub l: Lattice,
    /// Unimodular `P` with `P^T Gram(l) P = Gram(2U + <-2(n+1)> + <-2d>)`.
    pub witness: IntMatrix,
    pub target: Lattice,
}

/// Complement of the split polarisation `h = e3 + d f3` in `M = 3U + <-2(n+1)>`.
pub fn split_polarisation_complement(n: i64, d: i64) -> Result<SplitComplement> {
    if d < 1 {
        return Err(Error::InvalidArgument(format!("d must be >= 1 (got {d})")));
    }
    let m = make_m(n)?;
    let e3 = m.e(2)?;
    let f3 = m.f(2)?;
    let db = BigInt::from(d);
    let h: Vector = e3.iter().zip(&f3).map(|(a, b)| a + &db * b).collect();
    let complement = m.orthogonal_complement(&Sublattice::from_vectors(m.rank(), std::slice::from_ref(&h))?);
    let l = Lattice::new(m.restrict(&complement))?;

    // e1, f1, e2, f2, the <-2(n+1)> generator and e3 - d f3.
    let mut explicit = vec![m.e(0)?, m.f(0)?, m.e(1)?, m.f(1)?, m.basis_vector(6)];
    explicit.push(e3.iter().zip(&f3).map(|(a, b)| a - &db * b).collect());
    let cols = explicit
        .iter()
        .map(|x| solve_integer(&complement.basis, x).ok_or_else(|| Error::Invariant("vector not in h^perp".into())))
        .collect::<Result<Vec<_>>>()?;
    let witness = IntMatrix::from_columns(complement.rank(), &cols)?;

    let u = make_u();
    let mut target = u.direct_sum(&u).direct_sum(&make_rank_one(-2 * (n + 1))?).direct_sum(&make_rank_one(-2 * d)?);
    if n == 2 {
        target.marks.w = Some(4);
        target.marks.v = Some(5);
    }
    let check = &(&witness.transpose() * l.gram()) * &witness;
    if &check != target.gram() || !witness.det()?.abs().is_one() {
        return Err(Error::Invariant("split complement witness failed".into()));
    }
    Ok(SplitComplement { m, h, complement, l, witness, target })
}

/// Convenience for tests and examples.
pub fn vector(v: &[i64]) -> Vector {
    int_vec(v)
}
