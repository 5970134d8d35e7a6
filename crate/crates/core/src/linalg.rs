//! Exact integer and rational matrices.
//!
//! Everything here is arbitrary precision. The Smith normal form uses a
//! smallest-absolute-value pivot chosen in row-major order, so transforms are
//! reproducible run to run.

use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<BigInt>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(IntMatrix { rows, cols, data })
    }

    /// Builds a matrix from small integer rows. Panics on ragged input.
    pub fn from_i64_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        let data = rows.iter().flatten().map(|&x| BigInt::from(x)).collect();
        IntMatrix { rows: r, cols: c, data }
    }

    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Ok(IntMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    /// Columns given as vectors of equal length `n`; result is `n x k`.
    pub fn from_columns(n: usize, cols: &[Vec<BigInt>]) -> Result<Self> {
        if cols.iter().any(|c| c.len() != n) {
            return Err(Error::Dimension("column length mismatch".into()));
        }
        let mut m = Self::zeros(n, cols.len());
        for (j, col) in cols.iter().enumerate() {
            for (i, x) in col.iter().enumerate() {
                m[(i, j)] = x.clone();
            }
        }
        Ok(m)
    }

    pub fn diagonal(entries: &[BigInt]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, x) in entries.iter().enumerate() {
            m[(i, i)] = x.clone();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.data
    }

    pub fn row(&self, i: usize) -> Vec<BigInt> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vec<BigInt>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    let x = &self[(i, j)];
                    if i == j {
                        x.is_one()
                    } else {
                        x.is_zero()
                    }
                })
            })
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self[(i, j)].is_zero()))
    }

    pub fn neg(&self) -> Self {
        IntMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| -x).collect() }
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        IntMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * k).collect() }
    }

    pub fn add(&self, other: &IntMatrix) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &IntMatrix) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(v.len(), self.cols, "mul_vec dimension mismatch");
        (0..self.rows)
            .map(|i| {
                let row = &self.data[i * self.cols..(i + 1) * self.cols];
                row.iter().zip(v).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    /// `x^T M y`.
    pub fn bilinear(&self, x: &[BigInt], y: &[BigInt]) -> BigInt {
        x.iter().zip(self.mul_vec(y)).map(|(a, b)| a * b).sum()
    }

    /// Rows `r0..r1`, columns `c0..c1`.
    pub fn submatrix(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Self {
        let mut m = Self::zeros(r1 - r0, c1 - c0);
        for i in r0..r1 {
            for j in c0..c1 {
                m[(i - r0, j - c0)] = self[(i, j)].clone();
            }
        }
        m
    }

    pub fn select_columns(&self, idx: &[usize]) -> Self {
        let cols: Vec<Vec<BigInt>> = idx.iter().map(|&j| self.column(j)).collect();
        Self::from_columns(self.rows, &cols).expect("consistent column length")
    }

    pub fn hstack(&self, other: &IntMatrix) -> Self {
        assert_eq!(self.rows, other.rows);
        let mut cols = self.columns();
        cols.extend(other.columns());
        Self::from_columns(self.rows, &cols).expect("consistent column length")
    }

    pub fn block_diag(blocks: &[&IntMatrix]) -> Self {
        let n: usize = blocks.iter().map(|b| b.rows).sum();
        let m: usize = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(n, m);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    out[(r0 + i, c0 + j)] = b[(i, j)].clone();
                }
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        out
    }

    /// Assembles a matrix from a grid of blocks with compatible shapes.
    pub fn from_blocks(grid: &[Vec<&IntMatrix>]) -> Self {
        let heights: Vec<usize> = grid.iter().map(|row| row[0].rows).collect();
        let widths: Vec<usize> = grid[0].iter().map(|b| b.cols).collect();
        let mut out = Self::zeros(heights.iter().sum(), widths.iter().sum());
        let mut r0 = 0;
        for (bi, row) in grid.iter().enumerate() {
            let mut c0 = 0;
            for (bj, b) in row.iter().enumerate() {
                assert_eq!((b.rows, b.cols), (heights[bi], widths[bj]), "block shape");
                for i in 0..b.rows {
                    for j in 0..b.cols {
                        out[(r0 + i, c0 + j)] = b[(i, j)].clone();
                    }
                }
                c0 += widths[bj];
            }
            r0 += heights[bi];
        }
        out
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[dst] += k * row[src]
    fn add_row_multiple(&mut self, dst: usize, src: usize, k: &BigInt) {
        for j in 0..self.cols {
            let s = &self.data[src * self.cols + j] * k;
            self.data[dst * self.cols + j] += s;
        }
    }

    /// col[dst] += k * col[src]
    fn add_col_multiple(&mut self, dst: usize, src: usize, k: &BigInt) {
        for i in 0..self.rows {
            let s = &self.data[i * self.cols + src] * k;
            self.data[i * self.cols + dst] += s;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let x = std::mem::take(&mut self.data[i * self.cols + j]);
            self.data[i * self.cols + j] = -x;
        }
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> Result<BigInt> {
        if !self.is_square() {
            return Err(Error::Dimension(format!("det of {}x{}", self.rows, self.cols)));
        }
        let n = self.rows;
        if n == 0 {
            return Ok(BigInt::one());
        }
        let mut a = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[(k, k)].is_zero() {
                match (k + 1..n).find(|&i| !a[(i, k)].is_zero()) {
                    Some(i) => {
                        a.swap_rows(k, i);
                        sign = -sign;
                    }
                    None => return Ok(BigInt::zero()),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (&a[(i, j)] * &a[(k, k)] - &a[(i, k)] * &a[(k, j)]) / &prev;
                    a[(i, j)] = v;
                }
            }
            prev = a[(k, k)].clone();
        }
        Ok(sign * &a[(n - 1, n - 1)])
    }

    pub fn to_rat(&self) -> RatMatrix {
        RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| BigRational::from_integer(x.clone())).collect(),
        }
    }

    /// Inverse of a unimodular matrix.
    pub fn inverse_unimodular(&self) -> Result<IntMatrix> {
        let inv = self.to_rat().inverse()?;
        inv.to_int().ok_or_else(|| Error::NotIntegral("matrix is not unimodular".into()))
    }

    pub fn to_string_rows(&self) -> Vec<Vec<String>> {
        (0..self.rows).map(|i| self.row(i).iter().map(ToString::to_string).collect()).collect()
    }

    /// Row-major decimal strings.
    pub fn to_decimal_strings(&self) -> Vec<String> {
        self.data.iter().map(ToString::to_string).collect()
    }

    pub fn from_decimal_strings(rows: usize, cols: usize, s: &[String]) -> Result<Self> {
        let data = s
            .iter()
            .map(|x| x.parse::<BigInt>().map_err(|e| Error::Serde(format!("{x}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::from_vec(rows, cols, data)
    }
}

impl Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &IntMatrix {
    type Output = IntMatrix;
    fn mul(self, rhs: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        let mut out = IntMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = &rhs[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(ToString::to_string).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigRational>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix { rows, cols, data: vec![BigRational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigRational::one();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn from_columns(n: usize, cols: &[Vec<BigRational>]) -> Self {
        let mut m = Self::zeros(n, cols.len());
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), n);
            for (i, x) in col.iter().enumerate() {
                m[(i, j)] = x.clone();
            }
        }
        m
    }

    pub fn column(&self, j: usize) -> Vec<BigRational> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul_vec(&self, v: &[BigRational]) -> Vec<BigRational> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| &self[(i, j)] * &v[j]).sum())
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    if i == j {
                        self[(i, j)].is_one()
                    } else {
                        self[(i, j)].is_zero()
                    }
                })
            })
    }

    /// Gauss-Jordan inverse over the rationals.
    pub fn inverse(&self) -> Result<RatMatrix> {
        if self.rows != self.cols {
            return Err(Error::Dimension("inverse of non-square matrix".into()));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = RatMatrix::identity(n);
        for col in 0..n {
            let piv = (col..n)
                .find(|&i| !a[(i, col)].is_zero())
                .ok_or_else(|| Error::Degenerate("singular matrix".into()))?;
            a.swap_rows(col, piv);
            inv.swap_rows(col, piv);
            let p = a[(col, col)].clone();
            for j in 0..n {
                a[(col, j)] = &a[(col, j)] / &p;
                inv[(col, j)] = &inv[(col, j)] / &p;
            }
            for i in 0..n {
                if i != col && !a[(i, col)].is_zero() {
                    let f = a[(i, col)].clone();
                    for j in 0..n {
                        let x = &a[(col, j)] * &f;
                        a[(i, j)] -= x;
                        let y = &inv[(col, j)] * &f;
                        inv[(i, j)] -= y;
                    }
                }
            }
        }
        Ok(inv)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// `Some` iff every entry is an integer.
    pub fn to_int(&self) -> Option<IntMatrix> {
        if self.data.iter().all(BigRational::is_integer) {
            Some(IntMatrix {
                rows: self.rows,
                cols: self.cols,
                data: self.data.iter().map(BigRational::to_integer).collect(),
            })
        } else {
            None
        }
    }
}

impl Index<(usize, usize)> for RatMatrix {
    type Output = BigRational;
    fn index(&self, (i, j): (usize, usize)) -> &BigRational {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for RatMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigRational {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &RatMatrix {
    type Output = RatMatrix;
    fn mul(self, rhs: &RatMatrix) -> RatMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        let mut out = RatMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = &rhs[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }
}

/// `u * m * v == d`, `u` and `v` unimodular, `d` diagonal with
/// non-negative entries forming a divisibility chain.
#[derive(Clone, Debug)]
pub struct Smith {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
}

impl Smith {
    /// Diagonal entries `d_1 | d_2 | ...` (length `min(rows, cols)`).
    pub fn invariants(&self) -> Vec<BigInt> {
        (0..self.d.rows.min(self.d.cols)).map(|i| self.d[(i, i)].clone()).collect()
    }

    pub fn rank(&self) -> usize {
        self.invariants().iter().filter(|x| !x.is_zero()).count()
    }
}

pub fn smith_normal_form(m: &IntMatrix) -> Smith {
    let (r, c) = (m.rows, m.cols);
    let mut a = m.clone();
    let mut u = IntMatrix::identity(r);
    let mut v = IntMatrix::identity(c);
    'outer: for t in 0..r.min(c) {
        loop {
            let Some((pi, pj)) = smallest_pivot(&a, t) else {
                break 'outer;
            };
            a.swap_rows(t, pi);
            u.swap_rows(t, pi);
            a.swap_cols(t, pj);
            v.swap_cols(t, pj);

            let mut clean = true;
            for i in t + 1..r {
                if !a[(i, t)].is_zero() {
                    let q = -a[(i, t)].div_floor(&a[(t, t)]);
                    a.add_row_multiple(i, t, &q);
                    u.add_row_multiple(i, t, &q);
                    clean &= a[(i, t)].is_zero();
                }
            }
            for j in t + 1..c {
                if !a[(t, j)].is_zero() {
                    let q = -a[(t, j)].div_floor(&a[(t, t)]);
                    a.add_col_multiple(j, t, &q);
                    v.add_col_multiple(j, t, &q);
                    clean &= a[(t, j)].is_zero();
                }
            }
            if !clean {
                continue;
            }
            let piv = a[(t, t)].clone();
            let bad_row = (t + 1..r).find(|&i| (t + 1..c).any(|j| !a[(i, j)].is_multiple_of(&piv)));
            match bad_row {
                Some(i) => {
                    let one = BigInt::one();
                    a.add_row_multiple(t, i, &one);
                    u.add_row_multiple(t, i, &one);
                }
                None => break,
            }
        }
        if a[(t, t)].is_negative() {
            a.negate_row(t);
            u.negate_row(t);
        }
    }
    Smith { u, d: a, v }
}

fn smallest_pivot(a: &IntMatrix, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<((usize, usize), BigInt)> = None;
    for i in t..a.rows {
        for j in t..a.cols {
            let x = a[(i, j)].abs();
            if x.is_zero() {
                continue;
            }
            if best.as_ref().is_none_or(|(_, b)| &x < b) {
                best = Some(((i, j), x));
            }
        }
    }
    best.map(|(pos, _)| pos)
}

/// Saturated basis (as columns) of the integer kernel `{x : m x = 0}`.
pub fn kernel_basis(m: &IntMatrix) -> IntMatrix {
    let s = smith_normal_form(m);
    let rank = s.rank();
    let idx: Vec<usize> = (rank..m.cols).collect();
    s.v.select_columns(&idx)
}

/// One integral solution of `m x = b`, if any exists.
pub fn solve_integer(m: &IntMatrix, b: &[BigInt]) -> Option<Vec<BigInt>> {
    assert_eq!(b.len(), m.rows);
    let s = smith_normal_form(m);
    let y = s.u.mul_vec(b);
    let inv = s.invariants();
    let mut z = vec![BigInt::zero(); m.cols];
    for (i, yi) in y.iter().enumerate() {
        let di = inv.get(i).cloned().unwrap_or_else(BigInt::zero);
        if di.is_zero() {
            if !yi.is_zero() {
                return None;
            }
        } else {
            if !yi.is_multiple_of(&di) {
                return None;
            }
            z[i] = yi / &di;
        }
    }
    Some(s.v.mul_vec(&z))
}

/// `true` iff the columns of `m` are independent and span a saturated
/// (primitive) sublattice of `Z^rows`.
pub fn is_saturated(m: &IntMatrix) -> bool {
    let s = smith_normal_form(m);
    s.rank() == m.cols && s.invariants().iter().all(One::is_one)
}

/// Extends the (saturated) columns of `n` to a unimodular matrix whose first
/// columns are exactly those of `n`.
pub fn complete_to_basis(n: &IntMatrix) -> Result<IntMatrix> {
    let s = smith_normal_form(n);
    if s.rank() != n.cols || !s.invariants().iter().all(One::is_one) {
        return Err(Error::InvalidArgument("columns are not a primitive system".into()));
    }
    let u_inv = s.u.inverse_unimodular()?;
    let extra: Vec<usize> = (n.cols..n.rows).collect();
    Ok(n.hstack(&u_inv.select_columns(&extra)))
}

/// Numbers of positive and negative eigenvalues of a nondegenerate symmetric
/// matrix, via exact congruence diagonalisation over the rationals.
pub fn signature(q: &IntMatrix) -> Result<(usize, usize)> {
    if !q.is_symmetric() {
        return Err(Error::InvalidArgument("signature of non-symmetric matrix".into()));
    }
    let mut a = q.to_rat();
    let n = a.rows;
    let (mut pos, mut neg) = (0, 0);
    for k in 0..n {
        if a[(k, k)].is_zero() {
            if let Some(j) = (k + 1..n).find(|&j| !a[(j, j)].is_zero()) {
                swap_sym(&mut a, k, j);
            } else if let Some(j) = (k + 1..n).find(|&j| !a[(k, j)].is_zero()) {
                // a_kk = a_jj = 0, a_kj != 0: e_k + e_j has norm 2 a_kj.
                add_sym(&mut a, k, j);
            } else {
                return Err(Error::Degenerate(format!("null direction at index {k}")));
            }
        }
        let p = a[(k, k)].clone();
        if p.is_positive() {
            pos += 1;
        } else {
            neg += 1;
        }
        for i in k + 1..n {
            if a[(i, k)].is_zero() {
                continue;
            }
            let f = &a[(i, k)] / &p;
            for j in k..n {
                let x = &f * &a[(k, j)];
                a[(i, j)] -= x;
            }
            for j in k..n {
                let x = &f * &a[(j, k)];
                a[(j, i)] -= x;
            }
        }
    }
    Ok((pos, neg))
}

fn swap_sym(a: &mut RatMatrix, i: usize, j: usize) {
    a.swap_rows(i, j);
    for r in 0..a.rows {
        a.data.swap(r * a.cols + i, r * a.cols + j);
    }
}

/// Basis change e_i <- e_i + e_j applied as a congruence.
fn add_sym(a: &mut RatMatrix, i: usize, j: usize) {
    let n = a.rows;
    for c in 0..n {
        let x = a[(j, c)].clone();
        a[(i, c)] += x;
    }
    for r in 0..n {
        let x = a[(r, j)].clone();
        a[(r, i)] += x;
    }
}

pub fn int_vec(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

pub fn rat_vec(v: &[BigInt]) -> Vec<BigRational> {
    v.iter().map(|x| BigRational::from_integer(x.clone())).collect()
}
