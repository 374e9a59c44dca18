use std::fmt;

use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSpec};
use crate::space::Space;

/// A point of `F_p^n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Point {
    field: FieldSpec,
    coords: Vec<u64>,
}

impl Point {
    pub fn new(field: FieldSpec, coords: &[u64]) -> Self {
        Point {
            field,
            coords: coords.iter().map(|&c| field.reduce(c)).collect(),
        }
    }

    pub fn zero(field: FieldSpec, n: usize) -> Self {
        Point {
            field,
            coords: vec![0; n],
        }
    }

    /// The unit vector `e_i`.
    pub fn basis(field: FieldSpec, n: usize, i: usize) -> Self {
        let mut p = Self::zero(field, n);
        p.coords[i] = 1;
        p
    }

    pub fn from_index(space: &Space, idx: usize) -> Self {
        Point {
            field: space.field(),
            coords: space.digits(idx),
        }
    }

    pub fn index(&self, space: &Space) -> usize {
        space.encode(&self.coords)
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    pub fn coords(&self) -> &[u64] {
        &self.coords
    }

    pub fn coord(&self, i: usize) -> FieldElement {
        self.field.element(self.coords[i])
    }

    pub fn try_add(&self, other: &Point) -> Result<Point> {
        self.field.ensure_same(other.field)?;
        if self.len() != other.len() {
            return Err(Error::ArityMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        Ok(Point {
            field: self.field,
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(&a, &b)| self.field.add(a, b))
                .collect(),
        })
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Dense value table of a function `F_p^n -> F_p`, one byte per point,
/// indexed little-endian base `p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionTable {
    field: FieldSpec,
    n: usize,
    values: Vec<u8>,
}

impl FunctionTable {
    pub fn from_values(field: FieldSpec, n: usize, values: Vec<u8>) -> Result<Self> {
        let expected = crate::budget::saturating_pow(field.modulus(), n);
        if values.len() as u64 != expected {
            return Err(Error::Invalid(format!(
                "table has {} entries, expected {expected}",
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|&&v| u64::from(v) >= field.modulus()) {
            return Err(Error::Invalid(format!("table value {bad} outside {field}")));
        }
        Ok(FunctionTable { field, n, values })
    }

    /// Tabulates an arbitrary function given on digit vectors.
    pub fn from_fn(field: FieldSpec, n: usize, mut f: impl FnMut(&[u64]) -> u64) -> Result<Self> {
        let space = Space::new(field, n)?;
        let values = (0..space.size())
            .map(|i| field.reduce(f(&space.digits(i))) as u8)
            .collect();
        Ok(FunctionTable { field, n, values })
    }

    pub(crate) fn from_raw(field: FieldSpec, n: usize, values: Vec<u8>) -> Self {
        debug_assert_eq!(
            values.len() as u64,
            crate::budget::saturating_pow(field.modulus(), n)
        );
        FunctionTable { field, n, values }
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, idx: usize) -> FieldElement {
        self.field.element(u64::from(self.values[idx]))
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    pub fn into_values(self) -> Vec<u8> {
        self.values
    }

    pub fn space(&self) -> Space {
        Space::new(self.field, self.n).expect("an existing table fits the budget")
    }

    /// Pointwise `self - other`.
    pub fn try_sub(&self, other: &FunctionTable) -> Result<FunctionTable> {
        self.field.ensure_same(other.field)?;
        if self.n != other.n {
            return Err(Error::ArityMismatch {
                left: self.n,
                right: other.n,
            });
        }
        let f = self.field;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f.sub(u64::from(a), u64::from(b)) as u8)
            .collect();
        Ok(FunctionTable::from_raw(f, self.n, values))
    }
}
