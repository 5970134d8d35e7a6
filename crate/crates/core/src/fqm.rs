//! Finite quadratic modules: a finite abelian group given by generator orders,
//! with a quadratic form to Q/2Z and bilinear form to Q/Z.
//!
//! Generator orders need not form a divisibility chain, so presentations
//! such as `C6 + C_{2p^2}` can be used verbatim.

use std::collections::BTreeSet;

use num_integer::Integer;
use num_rational::Rational64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact value of `q` (in `[0, 2)`) or `b` (in `[0, 1)`).
pub type QValue = Rational64;

/// Coordinates of an element with respect to a module's generators, each
/// reduced into `[0, n_i)`. The derived ordering is lexicographic.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DiscElement(pub Vec<i64>);

impl DiscElement {
    pub fn coords(&self) -> &[i64] {
        &self.0
    }
}

impl std::fmt::Display for DiscElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteQuadraticModule {
    orders: Vec<i64>,
    /// Common denominator of all generator values.
    den: i64,
    /// `q(g_i) * den`, reduced mod `2 * den`.
    q_num: Vec<i64>,
    /// `b(g_i, g_j) * den`, reduced mod `den`.
    b_num: Vec<Vec<i64>>,
}

impl FiniteQuadraticModule {
    pub fn trivial() -> Self {
        FiniteQuadraticModule { orders: vec![], den: 1, q_num: vec![], b_num: vec![] }
    }

    /// Builds the module from the rational Gram matrix of lifts of the
    /// generators: `q(g_i) = gram[i][i] mod 2`, `b(g_i, g_j) = gram[i][j] mod 1`.
    pub fn from_gram(orders: Vec<i64>, gram: &[Vec<QValue>]) -> Result<Self> {
        let n = orders.len();
        if gram.len() != n || gram.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension("generator Gram must be square of size rank".into()));
        }
        if orders.iter().any(|&o| o < 2) {
            return Err(Error::InvalidArgument("generator orders must be at least 2".into()));
        }
        let den = gram.iter().flatten().fold(1i64, |acc, x| acc.lcm(x.denom()));
        let scaled = |x: &QValue| x.numer() * (den / x.denom());
        let q_num = (0..n).map(|i| scaled(&gram[i][i]).rem_euclid(2 * den)).collect();
        let mut b_num = vec![vec![0; n]; n];
        for i in 0..n {
            for j in 0..n {
                if gram[i][j] != gram[j][i] {
                    return Err(Error::InvalidArgument("generator Gram not symmetric".into()));
                }
                b_num[i][j] = scaled(&gram[i][j]).rem_euclid(den);
            }
        }
        let m = FiniteQuadraticModule { orders, den, q_num, b_num };
        m.check_well_defined()?;
        Ok(m)
    }

    pub fn cyclic(n: i64, q: QValue) -> Result<Self> {
        Self::from_gram(vec![n], &[vec![q]])
    }

    /// Orthogonal direct sum.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let n = self.rank() + other.rank();
        let mut gram = vec![vec![QValue::from_integer(0); n]; n];
        for i in 0..n {
            for j in 0..n {
                gram[i][j] = match (i < self.rank(), j < self.rank()) {
                    (true, true) => self.gram_entry(i, j),
                    (false, false) => other.gram_entry(i - self.rank(), j - self.rank()),
                    _ => QValue::from_integer(0),
                };
            }
        }
        let mut orders = self.orders.clone();
        orders.extend(&other.orders);
        Self::from_gram(orders, &gram).expect("sum of well-defined modules")
    }

    fn gram_entry(&self, i: usize, j: usize) -> QValue {
        if i == j {
            QValue::new(self.q_num[i], self.den)
        } else {
            QValue::new(self.b_num[i][j], self.den)
        }
    }

    fn check_well_defined(&self) -> Result<()> {
        let n = self.rank();
        for i in 0..n {
            let o = self.orders[i] as i128;
            let den = self.den as i128;
            if (o * o * self.q_num[i] as i128) % (2 * den) != 0 {
                return Err(Error::InvalidArgument(format!("n_{i}^2 q(g_{i}) is not 0 mod 2")));
            }
            if (self.q_num[i] - self.b_num[i][i]).rem_euclid(self.den) != 0 {
                return Err(Error::InvalidArgument(format!("q(g_{i}) != b(g_{i},g_{i}) mod 1")));
            }
            for j in 0..n {
                if (o * self.b_num[i][j] as i128) % den != 0 {
                    return Err(Error::InvalidArgument(format!("n_{i} b(g_{i},g_{j}) not integral")));
                }
            }
        }
        Ok(())
    }

    pub fn orders(&self) -> &[i64] {
        &self.orders
    }

    pub fn rank(&self) -> usize {
        self.orders.len()
    }

    pub fn size(&self) -> u64 {
        self.orders.iter().map(|&o| o as u64).product()
    }

    pub fn zero(&self) -> DiscElement {
        DiscElement(vec![0; self.rank()])
    }

    pub fn generator(&self, i: usize) -> DiscElement {
        let mut v = vec![0; self.rank()];
        v[i] = 1 % self.orders[i];
        DiscElement(v)
    }

    pub fn reduce(&self, coords: &[i64]) -> DiscElement {
        assert_eq!(coords.len(), self.rank(), "element has wrong rank");
        DiscElement(coords.iter().zip(&self.orders).map(|(x, n)| x.rem_euclid(*n)).collect())
    }

    pub fn add(&self, x: &DiscElement, y: &DiscElement) -> DiscElement {
        let s: Vec<i64> = x.0.iter().zip(&y.0).map(|(a, b)| a + b).collect();
        self.reduce(&s)
    }

    pub fn neg(&self, x: &DiscElement) -> DiscElement {
        let s: Vec<i64> = x.0.iter().map(|a| -a).collect();
        self.reduce(&s)
    }

    pub fn scale(&self, k: i64, x: &DiscElement) -> DiscElement {
        let s: Vec<i64> = x
            .0
            .iter()
            .zip(&self.orders)
            .map(|(a, n)| ((k.rem_euclid(*n) as i128 * *a as i128) % *n as i128) as i64)
            .collect();
        self.reduce(&s)
    }

    pub fn order(&self, x: &DiscElement) -> i64 {
        x.0.iter().zip(&self.orders).fold(1, |acc, (a, n)| acc.lcm(&(n / a.gcd(n))))
    }

    fn q_scaled(&self, x: &[i64]) -> i128 {
        let m = 2 * self.den as i128;
        let mut acc: i128 = 0;
        for i in 0..x.len() {
            if x[i] == 0 {
                continue;
            }
            let xi = x[i] as i128;
            acc = (acc + xi * xi % m * self.q_num[i] as i128) % m;
            for j in i + 1..x.len() {
                if x[j] != 0 {
                    acc = (acc + 2 * (xi * x[j] as i128 % m) * self.b_num[i][j] as i128) % m;
                }
            }
        }
        acc.rem_euclid(m)
    }

    /// `q(x)` in `[0, 2)`.
    pub fn q_value(&self, x: &DiscElement) -> QValue {
        QValue::new(self.q_scaled(&x.0) as i64, self.den)
    }

    /// `b(x, y)` in `[0, 1)`.
    pub fn b_value(&self, x: &DiscElement, y: &DiscElement) -> QValue {
        let m = self.den as i128;
        let mut acc: i128 = 0;
        for i in 0..self.rank() {
            for j in 0..self.rank() {
                if x.0[i] != 0 && y.0[j] != 0 {
                    acc = (acc + (x.0[i] as i128 * y.0[j] as i128 % m) * self.b_num[i][j] as i128) % m;
                }
            }
        }
        QValue::new(acc.rem_euclid(m) as i64, self.den)
    }

    pub fn is_isotropic(&self, x: &DiscElement) -> bool {
        self.q_scaled(&x.0) == 0
    }

    /// All elements in lexicographic coordinate order.
    pub fn elements(&self) -> impl Iterator<Item = DiscElement> + '_ {
        let total = self.size();
        (0..total).map(move |mut idx| {
            let mut c = vec![0; self.rank()];
            for i in (0..self.rank()).rev() {
                let n = self.orders[i] as u64;
                c[i] = (idx % n) as i64;
                idx /= n;
            }
            DiscElement(c)
        })
    }

    /// Every `x` with `q(x) = 0 mod 2`, in lexicographic order. The search is
    /// split over the first coordinate and run in parallel.
    pub fn isotropic_elements(&self) -> Vec<DiscElement> {
        if self.rank() == 0 {
            return vec![self.zero()];
        }
        let tail = FiniteQuadraticModule {
            orders: self.orders[1..].to_vec(),
            den: self.den,
            q_num: self.q_num[1..].to_vec(),
            b_num: self.b_num[1..].iter().map(|r| r[1..].to_vec()).collect(),
        };
        let chunks: Vec<Vec<DiscElement>> = (0..self.orders[0])
            .into_par_iter()
            .map(|a| {
                let mut out = Vec::new();
                let mut full = vec![0; self.rank()];
                full[0] = a;
                for rest in tail.elements() {
                    full[1..].copy_from_slice(&rest.0);
                    if self.q_scaled(&full) == 0 {
                        out.push(DiscElement(full.clone()));
                    }
                }
                out
            })
            .collect();
        chunks.into_iter().flatten().collect()
    }

    /// All elements of order exactly 2 together with their `q` values.
    pub fn order_two_profile(&self) -> Vec<(DiscElement, QValue)> {
        self.elements()
            .filter(|x| self.order(x) == 2)
            .map(|x| {
                let q = self.q_value(&x);
                (x, q)
            })
            .collect()
    }

    /// The subgroup generated by `gens`, sorted.
    pub fn generated_subgroup(&self, gens: &[DiscElement]) -> Vec<DiscElement> {
        let mut seen: BTreeSet<DiscElement> = BTreeSet::new();
        seen.insert(self.zero());
        let mut frontier = vec![self.zero()];
        while let Some(x) = frontier.pop() {
            for g in gens {
                let y = self.add(&x, g);
                if seen.insert(y.clone()) {
                    frontier.push(y);
                }
            }
        }
        seen.into_iter().collect()
    }

    /// Image of `x` under the homomorphism sending generator `i` to `images[i]`
    /// in `target`.
    pub fn apply_hom(&self, target: &Self, images: &[DiscElement], x: &DiscElement) -> DiscElement {
        let mut acc = target.zero();
        for (xi, img) in x.0.iter().zip(images) {
            acc = target.add(&acc, &target.scale(*xi, img));
        }
        acc
    }

    /// Searches for an isometric isomorphism `self -> other`, returned as the
    /// images of `self`'s generators. Backtracks over images with matching
    /// order and `q`, pruning on `b` against already chosen images.
    pub fn find_isomorphism(&self, other: &Self) -> Option<Vec<DiscElement>> {
        if self.size() != other.size() {
            return None;
        }
        let candidates: Vec<Vec<DiscElement>> = (0..self.rank())
            .map(|i| {
                let g = self.generator(i);
                let (o, q) = (self.orders[i], self.q_value(&g));
                other.elements().filter(|y| other.order(y) == o && other.q_value(y) == q).collect()
            })
            .collect();
        let mut chosen = Vec::with_capacity(self.rank());
        self.iso_search(other, &candidates, &mut chosen).then_some(chosen)
    }

    fn iso_search(
        &self,
        other: &Self,
        candidates: &[Vec<DiscElement>],
        chosen: &mut Vec<DiscElement>,
    ) -> bool {
        let i = chosen.len();
        if i == self.rank() {
            return other.generated_subgroup(chosen).len() as u64 == other.size();
        }
        let gi = self.generator(i);
        for y in &candidates[i] {
            let consistent = chosen
                .iter()
                .enumerate()
                .all(|(j, img)| other.b_value(y, img) == self.b_value(&gi, &self.generator(j)));
            if consistent {
                chosen.push(y.clone());
                if self.iso_search(other, candidates, chosen) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
}
