//! Nondegenerate quadratic spaces over F_p (p odd) and their orthogonal groups.

use num_bigint::BigInt;
use num_traits::{One, Pow};
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{is_prime, legendre};
use crate::error::{Error, Result};
use crate::linalg::IntMatrix;

/// Largest `p^(dim^2)` the exhaustive group count will attempt.
pub const BRUTE_FORCE_BUDGET: u64 = 100_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FpQuadraticSpace {
    pub p: i64,
    /// Symmetric Gram matrix with entries in `[0, p)`.
    pub gram: Vec<Vec<i64>>,
    pub dim: usize,
    /// Legendre symbol of the determinant: its square class.
    pub delta: i64,
    /// `legendre((-1)^m det)` when `dim = 2m`.
    pub epsilon: Option<i64>,
}

fn check_odd_prime(p: i64) -> Result<()> {
    if p > 2 && is_prime(p) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{p} is not an odd prime")))
    }
}

/// Reduces an integral symmetric matrix mod `p` and classifies the result.
/// A determinant divisible by `p` is reported as [`Error::Degenerate`].
pub fn classify_fp_space(gram: &IntMatrix, p: i64) -> Result<FpQuadraticSpace> {
    check_odd_prime(p)?;
    if !gram.is_symmetric() {
        return Err(Error::InvalidArgument("Gram matrix must be symmetric".into()));
    }
    let pb = BigInt::from(p);
    let n = gram.rows();
    let g: Vec<Vec<i64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| i64::try_from(((&gram[(i, j)] % &pb) + &pb) % &pb).expect("reduced mod p"))
                .collect()
        })
        .collect();
    let det = i64::try_from(((gram.det()? % &pb) + &pb) % &pb).expect("reduced mod p");
    if det == 0 {
        return Err(Error::Degenerate(format!("determinant vanishes mod {p}")));
    }
    let epsilon = n.is_multiple_of(2).then(|| {
        let m = (n / 2) as i64;
        let sign = if m % 2 == 0 { 1 } else { -1 };
        legendre(sign * det, p)
    });
    Ok(FpQuadraticSpace { p, gram: g, dim: n, delta: legendre(det, p), epsilon })
}

impl FpQuadraticSpace {
    /// A diagonal model `diag(1, ..., 1, c)` with the requested invariant.
    pub fn standard(dim: usize, epsilon: Option<i64>, p: i64) -> Result<Self> {
        check_odd_prime(p)?;
        let mut diag = vec![1i64; dim];
        if dim.is_multiple_of(2) && dim > 0 {
            let eps = epsilon.ok_or_else(|| Error::InvalidArgument("epsilon required for even dim".into()))?;
            if eps != 1 && eps != -1 {
                return Err(Error::InvalidArgument(format!("epsilon must be +-1, got {eps}")));
            }
            let m = (dim / 2) as i64;
            let sign = if m % 2 == 0 { 1 } else { -1 };
            if legendre(sign, p) != eps {
                diag[dim - 1] = (2..p).find(|&c| legendre(c, p) == -1).expect("non-residue exists");
            }
        } else if epsilon.is_some() {
            return Err(Error::InvalidArgument("epsilon only applies to even dim".into()));
        }
        let ints: Vec<Vec<i64>> = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { diag[i] } else { 0 }).collect())
            .collect();
        classify_fp_space(&IntMatrix::from_i64_rows(&ints), p)
    }

    fn form(&self, x: &[i64], y: &[i64]) -> i64 {
        let p = self.p;
        let mut acc = 0i64;
        for i in 0..self.dim {
            if x[i] == 0 {
                continue;
            }
            for j in 0..self.dim {
                acc = (acc + x[i] * self.gram[i][j] % p * y[j]) % p;
            }
        }
        acc
    }
}

/// `|O(V)|` from the closed formulas: `2 p^{m^2} prod_{i=1}^m (p^{2i} - 1)` in
/// dimension `2m+1`, and `2 p^{m(m-1)} (p^m - eps) prod_{i=1}^{m-1} (p^{2i} - 1)`
/// in dimension `2m`.
pub fn finite_orthogonal_order(dim: usize, epsilon: Option<i64>, p: i64) -> Result<BigInt> {
    check_odd_prime(p)?;
    let pb = BigInt::from(p);
    let two = BigInt::from(2);
    if dim == 0 {
        return Ok(BigInt::one());
    }
    let m = (dim / 2) as u32;
    let prod = |upto: u32| -> BigInt { (1..=upto).map(|i| Pow::pow(&pb, 2 * i) - 1).product() };
    if dim % 2 == 1 {
        if epsilon.is_some() {
            return Err(Error::InvalidArgument("epsilon only applies to even dim".into()));
        }
        Ok(two * Pow::pow(&pb, m * m) * prod(m))
    } else {
        let eps = match epsilon {
            Some(e @ (1 | -1)) => e,
            other => return Err(Error::InvalidArgument(format!("bad epsilon {other:?} for even dim"))),
        };
        Ok(two * Pow::pow(&pb, m * (m - 1)) * (Pow::pow(&pb, m) - eps) * prod(m - 1))
    }
}

/// Counts matrices `g` over F_p with `g^T G g = G` by choosing columns one at
/// a time subject to the pairings with earlier columns. The first column is
/// distributed over the rayon pool.
pub fn brute_force_orthogonal_order(space: &FpQuadraticSpace) -> Result<u64> {
    let (p, n) = (space.p, space.dim);
    let cost = (p as f64).powi((n * n) as i32);
    if cost > BRUTE_FORCE_BUDGET as f64 {
        return Err(Error::Budget(format!("p^(dim^2) = {p}^{} exceeds {BRUTE_FORCE_BUDGET}", n * n)));
    }
    if n == 0 {
        return Ok(1);
    }
    let vectors: Vec<Vec<i64>> = (0..(p as u64).pow(n as u32))
        .map(|mut idx| {
            let mut v = vec![0i64; n];
            for c in v.iter_mut() {
                *c = (idx % p as u64) as i64;
                idx /= p as u64;
            }
            v
        })
        .collect();
    let first: Vec<usize> = (0..vectors.len())
        .filter(|&i| space.form(&vectors[i], &vectors[i]) == space.gram[0][0])
        .collect();
    let count = first
        .par_iter()
        .map(|&i| {
            let mut chosen = vec![i];
            extend_columns(space, &vectors, &mut chosen)
        })
        .sum();
    Ok(count)
}

fn extend_columns(space: &FpQuadraticSpace, vectors: &[Vec<i64>], chosen: &mut Vec<usize>) -> u64 {
    let k = chosen.len();
    if k == space.dim {
        return 1;
    }
    let mut total = 0;
    for (idx, v) in vectors.iter().enumerate() {
        if space.form(v, v) != space.gram[k][k] {
            continue;
        }
        if chosen.iter().enumerate().all(|(j, &c)| space.form(&vectors[c], v) == space.gram[j][k]) {
            chosen.push(idx);
            total += extend_columns(space, vectors, chosen);
            chosen.pop();
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formula_examples() {
        assert_eq!(finite_orthogonal_order(3, None, 5).unwrap(), BigInt::from(240));
        assert_eq!(finite_orthogonal_order(2, Some(1), 5).unwrap(), BigInt::from(8));
        assert_eq!(finite_orthogonal_order(2, Some(-1), 5).unwrap(), BigInt::from(12));
        assert_eq!(finite_orthogonal_order(1, None, 7).unwrap(), BigInt::from(2));
        assert!(finite_orthogonal_order(2, None, 5).is_err());
        assert!(finite_orthogonal_order(3, Some(1), 5).is_err());
    }

    #[test]
    fn classification() {
        let h = IntMatrix::from_i64_rows(&[vec![0, 1], vec![1, 0]]);
        let s = classify_fp_space(&h, 5).unwrap();
        assert_eq!((s.dim, s.epsilon), (2, Some(1)));
        // <1> + <-theta> with -(-theta) = theta a non-square mod 5 gives eps = -1.
        let v = IntMatrix::from_i64_rows(&[vec![1, 0], vec![0, -2]]);
        assert_eq!(classify_fp_space(&v, 5).unwrap().epsilon, Some(-1));
        let deg = IntMatrix::from_i64_rows(&[vec![5, 0], vec![0, 1]]);
        assert!(matches!(classify_fp_space(&deg, 5), Err(Error::Degenerate(_))));
    }

    #[test]
    fn brute_force_small() {
        let s = FpQuadraticSpace::standard(1, None, 7).unwrap();
        assert_eq!(brute_force_orthogonal_order(&s).unwrap(), 2);
        let s = FpQuadraticSpace::standard(2, Some(-1), 5).unwrap();
        assert_eq!(s.epsilon, Some(-1));
        assert_eq!(brute_force_orthogonal_order(&s).unwrap(), 12);
        let s = FpQuadraticSpace::standard(3, None, 3).unwrap();
        assert_eq!(brute_force_orthogonal_order(&s).unwrap(), 48);
        let s = FpQuadraticSpace::standard(3, None, 11).unwrap();
        assert!(matches!(brute_force_orthogonal_order(&s), Err(Error::Budget(_))));
    }
}
