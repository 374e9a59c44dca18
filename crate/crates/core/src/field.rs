//! Prime-field arithmetic and dense matrices over `F_p`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_MODULUS: u64 = 61;

/// A prime field `F_p` with `2 <= p <= 61`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct FieldSpec {
    p: u64,
}

impl TryFrom<u64> for FieldSpec {
    type Error = Error;

    fn try_from(p: u64) -> Result<Self> {
        FieldSpec::new(p)
    }
}

impl From<FieldSpec> for u64 {
    fn from(f: FieldSpec) -> u64 {
        f.p
    }
}

impl FieldSpec {
    pub fn new(p: u64) -> Result<Self> {
        if !(2..=MAX_MODULUS).contains(&p)
            || !(2..p)
                .take_while(|d| d * d <= p)
                .all(|d| !p.is_multiple_of(d))
        {
            return Err(Error::InvalidModulus(p));
        }
        Ok(FieldSpec { p })
    }

    #[inline]
    pub fn modulus(self) -> u64 {
        self.p
    }

    #[inline]
    pub fn reduce(self, v: u64) -> u64 {
        v % self.p
    }

    #[inline]
    pub fn add(self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(self, a: u64, b: u64) -> u64 {
        (a * b) % self.p
    }

    pub fn pow(self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.p;
        base %= self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse by Fermat's little theorem.
    pub fn inv(self, a: u64) -> Result<u64> {
        let a = a % self.p;
        if a == 0 {
            return Err(Error::ZeroInverse);
        }
        Ok(self.pow(a, self.p - 2))
    }

    /// The field element `-1`, used for alternating signs.
    #[inline]
    pub fn minus_one(self) -> u64 {
        self.p - 1
    }

    pub fn element(self, value: u64) -> FieldElement {
        FieldElement {
            value: value % self.p,
            field: self,
        }
    }

    pub fn zero(self) -> FieldElement {
        self.element(0)
    }

    pub fn one(self) -> FieldElement {
        self.element(1)
    }

    pub(crate) fn ensure_same(self, other: FieldSpec) -> Result<()> {
        if self != other {
            return Err(Error::FieldMismatch {
                left: self.p,
                right: other.p,
            });
        }
        Ok(())
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.p)
    }
}

/// An element of `F_p`, always stored reduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u64,
    field: FieldSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Sub,
    Mul,
    Inv,
    Neg,
}

impl FieldElement {
    #[inline]
    pub fn value(self) -> u64 {
        self.value
    }

    #[inline]
    pub fn field(self) -> FieldSpec {
        self.field
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    pub fn inv(self) -> Result<FieldElement> {
        Ok(self.field.element(self.field.inv(self.value)?))
    }

    /// Applies `op` to `self` and `other`. Unary ops ignore `other` but still
    /// require it to live in the same field.
    pub fn apply(self, op: FieldOp, other: FieldElement) -> Result<FieldElement> {
        self.field.ensure_same(other.field)?;
        let f = self.field;
        let v = match op {
            FieldOp::Add => f.add(self.value, other.value),
            FieldOp::Sub => f.sub(self.value, other.value),
            FieldOp::Mul => f.mul(self.value, other.value),
            FieldOp::Inv => f.inv(self.value)?,
            FieldOp::Neg => f.neg(self.value),
        };
        Ok(f.element(v))
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $op:expr) => {
        /// Panics when the operands live in different fields; use
        /// [`FieldElement::apply`] for a checked variant.
        impl $tr for FieldElement {
            type Output = FieldElement;

            fn $m(self, rhs: FieldElement) -> FieldElement {
                self.apply($op, rhs)
                    .expect("field element operands from different fields")
            }
        }
    };
}

binop!(Add, add, FieldOp::Add);
binop!(Sub, sub, FieldOp::Sub);
binop!(Mul, mul, FieldOp::Mul);

impl Neg for FieldElement {
    type Output = FieldElement;

    fn neg(self) -> FieldElement {
        self.field.element(self.field.neg(self.value))
    }
}

/// Dense row-major matrix over `F_p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    field: FieldSpec,
    rows: usize,
    cols: usize,
    entries: Vec<u64>,
}

impl Matrix {
    pub fn zeros(field: FieldSpec, rows: usize, cols: usize) -> Self {
        Matrix {
            field,
            rows,
            cols,
            entries: vec![0; rows * cols],
        }
    }

    pub fn identity(field: FieldSpec, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(field: FieldSpec, rows: &[Vec<u64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Invalid("ragged matrix rows".into()));
        }
        let entries = rows.iter().flatten().map(|&v| field.reduce(v)).collect();
        Ok(Matrix {
            field,
            rows: rows.len(),
            cols,
            entries,
        })
    }

    pub fn field(&self) -> FieldSpec {
        self.field
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

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.entries[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u64) {
        self.entries[r * self.cols + c] = self.field.reduce(v);
    }

    pub fn entry(&self, r: usize, c: usize) -> FieldElement {
        self.field.element(self.get(r, c))
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    pub fn try_add(&self, other: &Matrix) -> Result<Matrix> {
        self.field.ensure_same(other.field)?;
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Invalid("matrix shapes differ".into()));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(&a, &b)| self.field.add(a, b))
            .collect();
        Ok(Matrix {
            field: self.field,
            rows: self.rows,
            cols: self.cols,
            entries,
        })
    }

    /// `A + A^t`, the matrix governing the bias of the quadratic phase `x^t A x`.
    pub fn symmetrized(&self) -> Result<Matrix> {
        if !self.is_square() {
            return Err(Error::Precondition(
                "symmetrization needs a square matrix".into(),
            ));
        }
        self.try_add(&self.transpose())
    }

    /// Rank over `F_p` by Gaussian elimination.
    pub fn rank(&self) -> usize {
        let mut work = self.entries.clone();
        eliminate(self.field, self.rows, self.cols, &mut work)
    }

    pub fn inverse(&self) -> Result<Matrix> {
        if !self.is_square() {
            return Err(Error::Precondition("inverse needs a square matrix".into()));
        }
        let n = self.rows;
        let f = self.field;
        let w = 2 * n;
        let mut aug = vec![0u64; n * w];
        for r in 0..n {
            aug[r * w..r * w + n].copy_from_slice(&self.entries[r * n..(r + 1) * n]);
            aug[r * w + n + r] = 1;
        }
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| aug[r * w + col] != 0)
                .ok_or_else(|| Error::Precondition("matrix is singular".into()))?;
            if pivot != col {
                for c in 0..w {
                    aug.swap(pivot * w + c, col * w + c);
                }
            }
            let inv = f.inv(aug[col * w + col])?;
            for c in 0..w {
                aug[col * w + c] = f.mul(aug[col * w + c], inv);
            }
            for r in 0..n {
                let factor = aug[r * w + col];
                if r == col || factor == 0 {
                    continue;
                }
                for c in 0..w {
                    let v = f.mul(factor, aug[col * w + c]);
                    aug[r * w + c] = f.sub(aug[r * w + c], v);
                }
            }
        }
        let mut out = Matrix::zeros(f, n, n);
        for r in 0..n {
            out.entries[r * n..(r + 1) * n].copy_from_slice(&aug[r * w + n..r * w + w]);
        }
        Ok(out)
    }
}

/// In-place row reduction of a `rows x cols` block; returns the rank.
pub(crate) fn eliminate(f: FieldSpec, rows: usize, cols: usize, m: &mut [u64]) -> usize {
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(pivot) = (rank..rows).find(|&r| m[r * cols + col] != 0) else {
            continue;
        };
        if pivot != rank {
            for c in col..cols {
                m.swap(pivot * cols + c, rank * cols + c);
            }
        }
        let inv = f.inv(m[rank * cols + col]).expect("pivot is nonzero");
        for r in rank + 1..rows {
            let factor = f.mul(m[r * cols + col], inv);
            if factor == 0 {
                continue;
            }
            for c in col..cols {
                let v = f.mul(factor, m[rank * cols + c]);
                m[r * cols + c] = f.sub(m[r * cols + c], v);
            }
        }
        rank += 1;
    }
    rank
}

/// Rank over `F_2` of rows packed as bitmasks.
pub(crate) fn rank_gf2(rows: &mut [u64]) -> usize {
    let mut rank = 0;
    for i in 0..rows.len() {
        let pivot_row = rows[i];
        if pivot_row == 0 {
            continue;
        }
        rank += 1;
        let low = pivot_row & pivot_row.wrapping_neg();
        for r in rows[i + 1..].iter_mut() {
            if *r & low != 0 {
                *r ^= pivot_row;
            }
        }
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn f(p: u64) -> FieldSpec {
        FieldSpec::new(p).unwrap()
    }

    #[test]
    fn rejects_composite_and_out_of_range_moduli() {
        for p in [0, 1, 4, 9, 15, 49, 67, 64] {
            assert_eq!(FieldSpec::new(p), Err(Error::InvalidModulus(p)));
        }
        for p in [2, 3, 5, 7, 11, 13, 59, 61] {
            assert!(FieldSpec::new(p).is_ok());
        }
    }

    #[test]
    fn arithmetic_examples() {
        let f3 = f(3);
        assert_eq!(f3.element(2) + f3.element(1), f3.zero());
        let f5 = f(5);
        assert_eq!(f5.element(2).inv().unwrap(), f5.element(3));
        let f2 = f(2);
        assert_eq!(f2.one() + f2.one(), f2.zero());
        assert_eq!(-f5.element(2), f5.element(3));
        assert_eq!(f5.element(4) * f5.element(4), f5.element(1));
    }

    #[test]
    fn zero_inverse_and_mismatch_are_errors() {
        assert_eq!(f(7).zero().inv(), Err(Error::ZeroInverse));
        let err = f(3).one().apply(FieldOp::Add, f(5).one()).unwrap_err();
        assert_eq!(err, Error::FieldMismatch { left: 3, right: 5 });
    }

    #[test]
    fn rank_examples() {
        let f2 = f(2);
        assert_eq!(Matrix::identity(f2, 5).rank(), 5);
        assert_eq!(Matrix::zeros(f2, 4, 3).rank(), 0);
        let m = Matrix::from_rows(f2, &[vec![1, 1], vec![1, 1]]).unwrap();
        assert_eq!(m.rank(), 1);
    }

    fn random_matrix(rng: &mut ChaCha8Rng, field: FieldSpec) -> Matrix {
        let rows = rng.gen_range(1..=6);
        let cols = rng.gen_range(1..=6);
        let data: Vec<Vec<u64>> = (0..rows)
            .map(|_| {
                (0..cols)
                    .map(|_| rng.gen_range(0..field.modulus()))
                    .collect()
            })
            .collect();
        Matrix::from_rows(field, &data).unwrap()
    }

    #[test]
    fn rank_is_transpose_and_row_permutation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for p in [2, 3, 5, 7] {
            for _ in 0..100 {
                let m = random_matrix(&mut rng, f(p));
                let r = m.rank();
                assert!(r <= m.rows().min(m.cols()));
                assert_eq!(r, m.transpose().rank());
                let mut perm: Vec<usize> = (0..m.rows()).collect();
                for i in (1..perm.len()).rev() {
                    perm.swap(i, rng.gen_range(0..=i));
                }
                let rows: Vec<Vec<u64>> = perm
                    .iter()
                    .map(|&i| (0..m.cols()).map(|c| m.get(i, c)).collect())
                    .collect();
                assert_eq!(Matrix::from_rows(f(p), &rows).unwrap().rank(), r);
            }
        }
    }

    #[test]
    fn gf2_bit_rank_agrees_with_generic_elimination() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let m = random_matrix(&mut rng, f(2));
            let mut bits: Vec<u64> = (0..m.rows())
                .map(|r| (0..m.cols()).fold(0, |acc, c| acc | (m.get(r, c) << c)))
                .collect();
            assert_eq!(rank_gf2(&mut bits), m.rank());
        }
    }

    #[test]
    fn inverse_round_trips() {
        let f7 = f(7);
        let m = Matrix::from_rows(f7, &[vec![1, 2, 0], vec![0, 3, 1], vec![4, 0, 5]]).unwrap();
        let inv = m.inverse().unwrap();
        for r in 0..3 {
            for c in 0..3 {
                let v = (0..3).fold(0, |acc, k| f7.add(acc, f7.mul(m.get(r, k), inv.get(k, c))));
                assert_eq!(v, u64::from(r == c));
            }
        }
        let singular = Matrix::from_rows(f7, &[vec![1, 2], vec![2, 4]]).unwrap();
        assert!(singular.inverse().is_err());
    }
}
