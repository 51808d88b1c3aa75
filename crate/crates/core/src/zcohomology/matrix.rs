//! Dense integer matrices with unbounded entries and Smith normal form.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major dense matrix over the integers.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    /// Scalar multiple of the identity.
    pub fn scalar(n: usize, value: i64) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::from(value);
        }
        m
    }

    pub fn from_i64(rows: usize, cols: usize, data: &[i64]) -> Self {
        assert_eq!(data.len(), rows * cols, "data length does not match shape");
        Self {
            rows,
            cols,
            entries: data.iter().map(|&x| BigInt::from(x)).collect(),
        }
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Self::from_i64(r, c, &data)
    }

    /// Matrix whose columns are the given vectors, all of length `rows`.
    pub fn from_columns(rows: usize, columns: &[Vec<BigInt>]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows, "column length mismatch");
            for (i, x) in col.iter().enumerate() {
                m[(i, j)] = x.clone();
            }
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

    pub fn mul(&self, rhs: &IntMatrix) -> Result<IntMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: rhs.rows,
            });
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
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
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Result<Vec<BigInt>> {
        if self.cols != v.len() {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: v.len(),
            });
        }
        Ok((0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| &self[(i, j)] * &v[j])
                    .fold(BigInt::zero(), |acc, x| acc + x)
            })
            .collect())
    }

    pub fn sub(&self, rhs: &IntMatrix) -> Result<IntMatrix> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                got: rhs.rows * rhs.cols,
            });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// Stacks matrices with equal column counts on top of each other.
    pub fn vstack(blocks: &[&IntMatrix]) -> Result<IntMatrix> {
        let cols = blocks.first().map_or(0, |b| b.cols);
        let mut entries = Vec::new();
        let mut rows = 0;
        for b in blocks {
            if b.cols != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    got: b.cols,
                });
            }
            rows += b.rows;
            entries.extend(b.entries.iter().cloned());
        }
        Ok(Self { rows, cols, entries })
    }

    /// Places matrices with equal row counts side by side.
    pub fn hstack(blocks: &[&IntMatrix]) -> Result<IntMatrix> {
        let rows = blocks.first().map_or(0, |b| b.rows);
        let cols: usize = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(rows, cols);
        let mut offset = 0;
        for b in blocks {
            if b.rows != rows {
                return Err(Error::DimensionMismatch {
                    expected: rows,
                    got: b.rows,
                });
            }
            for i in 0..rows {
                for j in 0..b.cols {
                    out[(i, offset + j)] = b[(i, j)].clone();
                }
            }
            offset += b.cols;
        }
        Ok(out)
    }

    pub fn select_columns(&self, range: std::ops::Range<usize>) -> IntMatrix {
        let mut out = Self::zeros(self.rows, range.len());
        for i in 0..self.rows {
            for (jj, j) in range.clone().enumerate() {
                out[(i, jj)] = self[(i, j)].clone();
            }
        }
        out
    }

    pub fn select_rows(&self, range: std::ops::Range<usize>) -> IntMatrix {
        let mut out = Self::zeros(range.len(), self.cols);
        for (ii, i) in range.enumerate() {
            for j in 0..self.cols {
                out[(ii, j)] = self[(i, j)].clone();
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    /// Entries as `i64`, if they all fit.
    pub fn to_i64(&self) -> Option<Vec<i64>> {
        self.entries.iter().map(ToPrimitive::to_i64).collect()
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> Result<BigInt> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                got: self.cols,
            });
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
                let Some(p) = (k + 1..n).find(|&i| !a[(i, k)].is_zero()) else {
                    return Ok(BigInt::zero());
                };
                a.swap_rows(k, p);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (&a[(i, j)] * &a[(k, k)] - &a[(i, k)] * &a[(k, j)]) / &prev;
                    a[(i, j)] = v;
                }
                a[(i, k)] = BigInt::zero();
            }
            prev = a[(k, k)].clone();
        }
        Ok(sign * &a[(n - 1, n - 1)])
    }

    pub fn is_unimodular(&self) -> bool {
        self.is_square()
            && self
                .determinant()
                .map(|d| d.abs().is_one())
                .unwrap_or(false)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.entries.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.entries.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[dst] += factor * row[src]
    fn add_row_multiple(&mut self, dst: usize, src: usize, factor: &BigInt) {
        for j in 0..self.cols {
            let delta = factor * &self[(src, j)];
            if !delta.is_zero() {
                self[(dst, j)] += delta;
            }
        }
    }

    /// col[dst] += factor * col[src]
    fn add_col_multiple(&mut self, dst: usize, src: usize, factor: &BigInt) {
        for i in 0..self.rows {
            let delta = factor * &self[(i, src)];
            if !delta.is_zero() {
                self[(i, dst)] += delta;
            }
        }
    }

    fn negate_row(&mut self, r: usize) {
        for j in 0..self.cols {
            let v = -std::mem::take(&mut self[(r, j)]);
            self[(r, j)] = v;
        }
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.entries[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.entries[i * self.cols + j]
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self[(i, j)])?;
            }
        }
        write!(f, "]")
    }
}

/// Result of a Smith normal form computation: `left * input * right == diagonal`.
#[derive(Clone, Debug)]
pub struct SmithForm {
    pub diagonal: IntMatrix,
    pub left: IntMatrix,
    pub right: IntMatrix,
}

impl SmithForm {
    /// Non-zero diagonal entries, in order; each divides the next.
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        let n = self.diagonal.rows().min(self.diagonal.cols());
        (0..n)
            .map(|i| self.diagonal[(i, i)].clone())
            .take_while(|d| !d.is_zero())
            .collect()
    }

    pub fn rank(&self) -> usize {
        self.invariant_factors().len()
    }
}

/// Smith normal form with unimodular transforms.
///
/// Pivoting is deterministic: the pivot is the entry of smallest non-zero
/// absolute value in the remaining block, ties broken by row-major position.
pub fn smith_normal_form(input: &IntMatrix) -> SmithForm {
    smith_impl(input, true)
}

/// Smith normal form tracking only the column transform; `left` is returned
/// as the empty matrix. Cheaper for tall matrices where only kernels matter.
pub fn smith_normal_form_right(input: &IntMatrix) -> SmithForm {
    smith_impl(input, false)
}

fn smith_impl(input: &IntMatrix, track_left: bool) -> SmithForm {
    let m = input.rows();
    let n = input.cols();
    let mut a = input.clone();
    let mut left = if track_left {
        IntMatrix::identity(m)
    } else {
        IntMatrix::zeros(0, 0)
    };
    let mut right = IntMatrix::identity(n);

    for t in 0..m.min(n) {
        while let Some((pi, pj)) = smallest_entry(&a, t) {
            a.swap_rows(t, pi);
            if track_left {
                left.swap_rows(t, pi);
            }
            a.swap_cols(t, pj);
            right.swap_cols(t, pj);

            let mut dirty = false;
            for i in t + 1..m {
                if a[(i, t)].is_zero() {
                    continue;
                }
                let q = &a[(i, t)] / &a[(t, t)];
                if !q.is_zero() {
                    let f = -q;
                    a.add_row_multiple(i, t, &f);
                    if track_left {
                        left.add_row_multiple(i, t, &f);
                    }
                }
                dirty |= !a[(i, t)].is_zero();
            }
            for j in t + 1..n {
                if a[(t, j)].is_zero() {
                    continue;
                }
                let q = &a[(t, j)] / &a[(t, t)];
                if !q.is_zero() {
                    let f = -q;
                    a.add_col_multiple(j, t, &f);
                    right.add_col_multiple(j, t, &f);
                }
                dirty |= !a[(t, j)].is_zero();
            }
            if dirty {
                continue;
            }

            // Row and column t are clear; enforce divisibility of the rest.
            let pivot = a[(t, t)].clone();
            let offender = (t + 1..m).find(|&i| {
                (t + 1..n).any(|j| !a[(i, j)].is_multiple_of(&pivot))
            });
            match offender {
                Some(i) => {
                    let one = BigInt::one();
                    a.add_row_multiple(t, i, &one);
                    if track_left {
                        left.add_row_multiple(t, i, &one);
                    }
                }
                None => break,
            }
        }
        if a[(t, t)].is_negative() {
            a.negate_row(t);
            if track_left {
                left.negate_row(t);
            }
        }
    }

    SmithForm {
        diagonal: a,
        left,
        right,
    }
}

fn smallest_entry(a: &IntMatrix, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for i in t..a.rows() {
        for j in t..a.cols() {
            let v = &a[(i, j)];
            if v.is_zero() {
                continue;
            }
            match best {
                Some((bi, bj)) if a[(bi, bj)].abs() <= v.abs() => {}
                _ => best = Some((i, j)),
            }
        }
    }
    best
}

/// A Z-basis (as columns) of the kernel of `a`.
pub fn integer_kernel(a: &IntMatrix) -> IntMatrix {
    let snf = smith_normal_form_right(a);
    let rank = snf.rank();
    snf.right.select_columns(rank..a.cols())
}

/// A Z-basis (as columns) of the lattice generated by the columns of `gens`.
pub fn lattice_basis(gens: &IntMatrix) -> IntMatrix {
    let snf = smith_normal_form(gens);
    let factors = snf.invariant_factors();
    // gens * right = left^{-1} * diagonal, so the image is spanned by the
    // first `rank` columns of left^{-1} scaled by the invariant factors.
    let left_inv = unimodular_inverse(&snf.left);
    let mut basis = left_inv.select_columns(0..factors.len());
    for (j, d) in factors.iter().enumerate() {
        for i in 0..basis.rows() {
            basis[(i, j)] *= d;
        }
    }
    basis
}

/// Inverse of a unimodular matrix.
pub fn unimodular_inverse(u: &IntMatrix) -> IntMatrix {
    let snf = smith_normal_form(u);
    // left * u * right = I (diagonal is the identity for unimodular input).
    debug_assert!(snf.invariant_factors().iter().all(One::is_one));
    snf.right
        .mul(&snf.left)
        .expect("square matrices of equal size")
}

/// Coordinates of each column of `vectors` with respect to the column basis
/// `basis` (full column rank). Fails if some vector is outside the lattice.
pub fn coordinates_in(basis: &IntMatrix, vectors: &IntMatrix) -> Result<IntMatrix> {
    if basis.rows() != vectors.rows() {
        return Err(Error::DimensionMismatch {
            expected: basis.rows(),
            got: vectors.rows(),
        });
    }
    let k = basis.cols();
    let snf = smith_normal_form(basis);
    let factors = snf.invariant_factors();
    if factors.len() != k {
        return Err(Error::InvalidArgument(
            "basis does not have full column rank".into(),
        ));
    }
    let transformed = snf.left.mul(vectors)?;
    let mut y = IntMatrix::zeros(k, vectors.cols());
    for j in 0..vectors.cols() {
        for i in 0..transformed.rows() {
            let v = &transformed[(i, j)];
            if i < k {
                let (q, r) = v.div_rem(&factors[i]);
                if !r.is_zero() {
                    return Err(Error::InvalidArgument(
                        "vector is not in the lattice".into(),
                    ));
                }
                y[(i, j)] = q;
            } else if !v.is_zero() {
                return Err(Error::InvalidArgument(
                    "vector is not in the span of the basis".into(),
                ));
            }
        }
    }
    snf.right.mul(&y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(a: &IntMatrix) -> SmithForm {
        let snf = smith_normal_form(a);
        assert!(snf.left.is_unimodular());
        assert!(snf.right.is_unimodular());
        let prod = snf.left.mul(a).unwrap().mul(&snf.right).unwrap();
        assert_eq!(prod, snf.diagonal);
        let d = &snf.diagonal;
        for i in 0..d.rows() {
            for j in 0..d.cols() {
                if i != j {
                    assert!(d[(i, j)].is_zero());
                }
            }
        }
        let f = snf.invariant_factors();
        for w in f.windows(2) {
            assert!(w[1].is_multiple_of(&w[0]));
        }
        snf
    }

    fn factors(a: &IntMatrix) -> Vec<i64> {
        check(a)
            .invariant_factors()
            .iter()
            .map(|x| x.to_i64().unwrap())
            .collect()
    }

    #[test]
    fn identity_is_fixed() {
        assert_eq!(factors(&IntMatrix::identity(3)), vec![1, 1, 1]);
    }

    #[test]
    fn coprime_diagonal_merges() {
        assert_eq!(factors(&IntMatrix::from_rows(&[vec![2, 0], vec![0, 3]])), vec![1, 6]);
    }

    #[test]
    fn small_dense_example() {
        // gcd of entries is 2 and |det| = 8, so the factors are 2 and 4.
        assert_eq!(factors(&IntMatrix::from_rows(&[vec![2, 4], vec![6, 8]])), vec![2, 4]);
    }

    #[test]
    fn rectangular_and_rank_deficient() {
        let a = IntMatrix::from_rows(&[vec![1, 2, 3], vec![2, 4, 6]]);
        assert_eq!(factors(&a), vec![1]);
        let k = integer_kernel(&a);
        assert_eq!(k.cols(), 2);
        assert!(a.mul(&k).unwrap().is_zero());
    }

    #[test]
    fn determinant_matches_known_values() {
        let a = IntMatrix::from_rows(&[vec![2, 1, 0], vec![1, 3, 1], vec![0, 1, 4]]);
        assert_eq!(a.determinant().unwrap(), BigInt::from(18));
        let swap = IntMatrix::from_rows(&[vec![0, 1], vec![1, 0]]);
        assert_eq!(swap.determinant().unwrap(), BigInt::from(-1));
    }

    #[test]
    fn coordinates_reject_outside_vectors() {
        let basis = IntMatrix::from_rows(&[vec![2, 0], vec![0, 1]]);
        let inside = IntMatrix::from_rows(&[vec![4], vec![3]]);
        let c = coordinates_in(&basis, &inside).unwrap();
        assert_eq!(c, IntMatrix::from_rows(&[vec![2], vec![3]]));
        let outside = IntMatrix::from_rows(&[vec![1], vec![0]]);
        assert!(coordinates_in(&basis, &outside).is_err());
    }

    #[test]
    fn lattice_basis_spans_generators() {
        let gens = IntMatrix::from_rows(&[vec![2, 4, 6], vec![0, 2, 2]]);
        let b = lattice_basis(&gens);
        assert_eq!(b.cols(), 2);
        // every generator has integral coordinates in the basis and |det| = 4
        coordinates_in(&b, &gens).unwrap();
        assert_eq!(b.determinant().unwrap().abs(), BigInt::from(4));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn snf_transforms_are_consistent(
                rows in 1usize..5,
                cols in 1usize..5,
                data in proptest::collection::vec(-9i64..10, 25),
            ) {
                let a = IntMatrix::from_i64(rows, cols, &data[..rows * cols]);
                check(&a);
            }
        }
    }
}
