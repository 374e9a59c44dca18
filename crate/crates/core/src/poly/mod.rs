//! Multivariate polynomials over `F_p`, viewed as functions on `F_p^n`.
//!
//! Every exponent is kept below `p` (using `x^p = x`), so two polynomials
//! are equal as functions exactly when their canonical term lists agree,
//! and `degree` is the degree of the function.

mod file;
mod parse;
mod table;

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

pub use file::{parse_system, PolySystem};
pub use parse::parse_polynomial;
pub use table::{FunctionTable, Point};

use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSpec, Matrix};
use crate::space::Space;

/// A single term `coeff * x_0^e_0 * .. * x_{n-1}^e_{n-1}` with every `e_i < p`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial {
    exponents: Vec<u8>,
    coeff: FieldElement,
}

impl Monomial {
    pub fn exponents(&self) -> &[u8] {
        &self.exponents
    }

    pub fn coefficient(&self) -> FieldElement {
        self.coeff
    }

    pub fn degree(&self) -> usize {
        self.exponents.iter().map(|&e| e as usize).sum()
    }
}

/// Graded lexicographic order on exponent vectors, `x_0` most significant.
pub(crate) fn grlex(a: &[u8], b: &[u8]) -> Ordering {
    let da: usize = a.iter().map(|&e| e as usize).sum();
    let db: usize = b.iter().map(|&e| e as usize).sum();
    da.cmp(&db).then_with(|| a.cmp(b))
}

/// `x^e` as a function on `F_p` equals `x^e'` with `e' < p`.
#[inline]
pub(crate) fn frobenius_exponent(p: u64, e: u64) -> u8 {
    if e == 0 {
        0
    } else {
        (((e - 1) % (p - 1)) + 1) as u8
    }
}

/// Canonical reduced polynomial; terms are stored in descending graded-lex order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Polynomial {
    field: FieldSpec,
    n: usize,
    terms: Vec<Monomial>,
}

/// `constant + sum coeffs[j].1 * x_{coeffs[j].0}` over the target variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineForm {
    pub coeffs: Vec<(usize, u64)>,
    pub constant: u64,
}

impl AffineForm {
    pub fn var(i: usize) -> Self {
        AffineForm {
            coeffs: vec![(i, 1)],
            constant: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolyOp {
    Add,
    Sub,
    Mul,
}

impl Polynomial {
    pub fn zero(field: FieldSpec, n: usize) -> Self {
        Polynomial {
            field,
            n,
            terms: Vec::new(),
        }
    }

    pub fn constant(field: FieldSpec, n: usize, c: u64) -> Self {
        Self::from_terms(field, n, [(vec![0u64; n], c)])
    }

    /// The coordinate function `x_i`.
    pub fn var(field: FieldSpec, n: usize, i: usize) -> Self {
        let mut e = vec![0u64; n];
        e[i] = 1;
        Self::from_terms(field, n, [(e, 1)])
    }

    /// Builds the canonical form from arbitrary `(exponents, coefficient)`
    /// pairs: exponents are Frobenius-reduced and like terms merged.
    pub fn from_terms<I, E>(field: FieldSpec, n: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (E, u64)>,
        E: AsRef<[u64]>,
    {
        let p = field.modulus();
        let mut acc: HashMap<Vec<u8>, u64> = HashMap::new();
        for (exps, c) in terms {
            let exps = exps.as_ref();
            assert_eq!(exps.len(), n, "exponent vector length must equal the arity");
            let key: Vec<u8> = exps.iter().map(|&e| frobenius_exponent(p, e)).collect();
            let slot = acc.entry(key).or_insert(0);
            *slot = field.add(*slot, field.reduce(c));
        }
        Self::from_reduced_map(field, n, acc)
    }

    fn from_reduced_map(field: FieldSpec, n: usize, acc: HashMap<Vec<u8>, u64>) -> Self {
        let mut terms: Vec<Monomial> = acc
            .into_iter()
            .filter(|&(_, c)| c != 0)
            .map(|(exponents, c)| Monomial {
                exponents,
                coeff: field.element(c),
            })
            .collect();
        terms.sort_by(|a, b| grlex(&b.exponents, &a.exponents));
        Polynomial { field, n, terms }
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    /// Number of variables.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree of the canonical form; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.terms.first().map_or(0, Monomial::degree)
    }

    pub fn is_constant(&self) -> bool {
        self.degree() == 0
    }

    pub fn constant_term(&self) -> u64 {
        self.terms
            .last()
            .filter(|t| t.degree() == 0)
            .map_or(0, |t| t.coeff.value())
    }

    /// Re-canonicalizes; a no-op for values built through this API.
    pub fn reduce_frobenius(&self) -> Polynomial {
        Self::from_terms(
            self.field,
            self.n,
            self.terms.iter().map(|t| {
                (
                    t.exponents
                        .iter()
                        .map(|&e| u64::from(e))
                        .collect::<Vec<_>>(),
                    t.coeff.value(),
                )
            }),
        )
    }

    fn ensure_compatible(&self, other: &Polynomial) -> Result<()> {
        self.field.ensure_same(other.field)?;
        if self.n != other.n {
            return Err(Error::ArityMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }

    fn to_map(&self) -> HashMap<Vec<u8>, u64> {
        self.terms
            .iter()
            .map(|t| (t.exponents.clone(), t.coeff.value()))
            .collect()
    }

    pub fn try_add(&self, other: &Polynomial) -> Result<Polynomial> {
        self.ensure_compatible(other)?;
        let f = self.field;
        let mut acc = self.to_map();
        for t in &other.terms {
            let slot = acc.entry(t.exponents.clone()).or_insert(0);
            *slot = f.add(*slot, t.coeff.value());
        }
        Ok(Self::from_reduced_map(f, self.n, acc))
    }

    pub fn try_sub(&self, other: &Polynomial) -> Result<Polynomial> {
        self.try_add(&other.neg())
    }

    pub fn try_mul(&self, other: &Polynomial) -> Result<Polynomial> {
        self.ensure_compatible(other)?;
        let f = self.field;
        let p = f.modulus();
        let mut acc: HashMap<Vec<u8>, u64> = HashMap::new();
        for a in &self.terms {
            for b in &other.terms {
                let key: Vec<u8> = a
                    .exponents
                    .iter()
                    .zip(&b.exponents)
                    .map(|(&x, &y)| frobenius_exponent(p, u64::from(x) + u64::from(y)))
                    .collect();
                let slot = acc.entry(key).or_insert(0);
                *slot = f.add(*slot, f.mul(a.coeff.value(), b.coeff.value()));
            }
        }
        Ok(Self::from_reduced_map(f, self.n, acc))
    }

    pub fn scale(&self, c: FieldElement) -> Result<Polynomial> {
        self.field.ensure_same(c.field())?;
        let f = self.field;
        Ok(Self::from_reduced_map(
            f,
            self.n,
            self.terms
                .iter()
                .map(|t| (t.exponents.clone(), f.mul(t.coeff.value(), c.value())))
                .collect(),
        ))
    }

    pub fn neg(&self) -> Polynomial {
        let f = self.field;
        Polynomial {
            field: f,
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|t| Monomial {
                    exponents: t.exponents.clone(),
                    coeff: -t.coeff,
                })
                .collect(),
        }
    }

    /// Evaluates at a point given as raw coordinates (reduced mod `p`).
    pub fn eval_raw(&self, x: &[u64]) -> u64 {
        let f = self.field;
        let mut acc = 0;
        for t in &self.terms {
            let mut v = t.coeff.value();
            for (&e, &xi) in t.exponents.iter().zip(x) {
                if e != 0 {
                    v = f.mul(v, f.pow(xi, u64::from(e)));
                    if v == 0 {
                        break;
                    }
                }
            }
            acc = f.add(acc, v);
        }
        acc
    }

    pub fn evaluate(&self, x: &Point) -> Result<FieldElement> {
        self.field.ensure_same(x.field())?;
        if x.len() != self.n {
            return Err(Error::ArityMismatch {
                left: self.n,
                right: x.len(),
            });
        }
        Ok(self.field.element(self.eval_raw(x.coords())))
    }

    /// Exhaustive value table, built from the dense coefficient array by a
    /// per-variable Vandermonde transform in `O(n p^(n+1))`.
    pub fn tabulate(&self) -> Result<FunctionTable> {
        let space = Space::new(self.field, self.n)?;
        let mut data = vec![0u8; space.size()];
        for t in &self.terms {
            let idx: usize = t.exponents.iter().rev().fold(0, |acc, &e| {
                acc * self.field.modulus() as usize + e as usize
            });
            data[idx] = t.coeff.value() as u8;
        }
        let p = self.field.modulus();
        let vandermonde: Vec<u64> = (0..p)
            .flat_map(|x| (0..p).map(move |e| (x, e)))
            .map(|(x, e)| self.field.pow(x, e))
            .collect();
        axis_transform(self.field, self.n, &mut data, &vandermonde);
        Ok(FunctionTable::from_raw(self.field, self.n, data))
    }

    /// The unique reduced polynomial with the given value table.
    pub fn interpolate(table: &FunctionTable) -> Polynomial {
        let f = table.field();
        let p = f.modulus();
        let rows: Vec<Vec<u64>> = (0..p)
            .map(|x| (0..p).map(|e| f.pow(x, e)).collect())
            .collect();
        let inv = Matrix::from_rows(f, &rows)
            .and_then(|m| m.inverse())
            .expect("Vandermonde matrix on distinct nodes is invertible");
        let inv: Vec<u64> = (0..p as usize)
            .flat_map(|r| (0..p as usize).map(move |c| (r, c)))
            .map(|(r, c)| inv.get(r, c))
            .collect();
        let mut data = table.values().to_vec();
        axis_transform(f, table.n(), &mut data, &inv);
        let space = table.space();
        let acc = data
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| {
                (
                    space.digits(i).into_iter().map(|d| d as u8).collect(),
                    u64::from(c),
                )
            })
            .collect();
        Self::from_reduced_map(f, table.n(), acc)
    }

    /// Substitutes `x_j := forms[j]`, producing a polynomial in `n_out` variables.
    pub fn substitute_affine(&self, n_out: usize, forms: &[AffineForm]) -> Result<Polynomial> {
        if forms.len() != self.n {
            return Err(Error::ArityMismatch {
                left: self.n,
                right: forms.len(),
            });
        }
        let f = self.field;
        let lifted: Vec<Polynomial> = forms
            .iter()
            .map(|form| {
                if form.coeffs.iter().any(|&(v, _)| v >= n_out) {
                    return Err(Error::Invalid(
                        "affine form refers to a missing variable".into(),
                    ));
                }
                let mut terms: Vec<(Vec<u64>, u64)> = form
                    .coeffs
                    .iter()
                    .map(|&(v, c)| {
                        let mut e = vec![0u64; n_out];
                        e[v] = 1;
                        (e, c)
                    })
                    .collect();
                terms.push((vec![0; n_out], form.constant));
                Ok(Polynomial::from_terms(f, n_out, terms))
            })
            .collect::<Result<_>>()?;
        let mut powers: HashMap<(usize, u8), Polynomial> = HashMap::new();
        let one = Polynomial::constant(f, n_out, 1);
        let mut acc = Polynomial::zero(f, n_out);
        for t in &self.terms {
            let mut prod = Polynomial::constant(f, n_out, t.coeff.value());
            for (j, &e) in t.exponents.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                if let std::collections::hash_map::Entry::Vacant(slot) = powers.entry((j, e)) {
                    let mut pw = one.clone();
                    for _ in 0..e {
                        pw = pw.try_mul(&lifted[j])?;
                    }
                    slot.insert(pw);
                }
                prod = prod.try_mul(&powers[&(j, e)])?;
                if prod.is_zero() {
                    break;
                }
            }
            acc = acc.try_add(&prod)?;
        }
        Ok(acc)
    }

    /// Canonical form of `q(X + a)`.
    pub fn shift(&self, a: &Point) -> Result<Polynomial> {
        self.field.ensure_same(a.field())?;
        if a.len() != self.n {
            return Err(Error::ArityMismatch {
                left: self.n,
                right: a.len(),
            });
        }
        if a.is_zero() {
            return Ok(self.clone());
        }
        let forms: Vec<AffineForm> = (0..self.n)
            .map(|j| AffineForm {
                coeffs: vec![(j, 1)],
                constant: a.coords()[j],
            })
            .collect();
        self.substitute_affine(self.n, &forms)
    }

    /// Renames `x_j` to `x_{offset + j}` inside an `n_out`-variable ring.
    pub fn embed(&self, n_out: usize, offset: usize) -> Result<Polynomial> {
        if offset + self.n > n_out {
            return Err(Error::Invalid("embedding does not fit".into()));
        }
        let terms: Vec<Monomial> = self
            .terms
            .iter()
            .map(|t| {
                let mut e = vec![0u8; n_out];
                e[offset..offset + self.n].copy_from_slice(&t.exponents);
                Monomial {
                    exponents: e,
                    coeff: t.coeff,
                }
            })
            .collect();
        let mut out = Polynomial {
            field: self.field,
            n: n_out,
            terms,
        };
        out.terms.sort_by(|a, b| grlex(&b.exponents, &a.exponents));
        Ok(out)
    }

    /// Indices of variables that occur in some term.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n)
            .filter(|&j| self.terms.iter().any(|t| t.exponents[j] != 0))
            .collect()
    }
}

/// Applies the `p x p` matrix `mat` along every axis of a dense `p^n` array.
fn axis_transform(field: FieldSpec, n: usize, data: &mut [u8], mat: &[u64]) {
    let p = field.modulus() as usize;
    if p == 2 && mat == [1, 0, 1, 1] {
        // Binary Moebius transform: v1 = c0 + c1.
        let mut stride = 1;
        for _ in 0..n {
            for base in (0..data.len()).step_by(2 * stride) {
                for i in base..base + stride {
                    data[i + stride] ^= data[i];
                }
            }
            stride *= 2;
        }
        return;
    }
    let mut gathered = vec![0u64; p];
    let mut stride = 1;
    for _ in 0..n {
        let block = stride * p;
        for base in (0..data.len()).step_by(block) {
            for off in 0..stride {
                for (k, g) in gathered.iter_mut().enumerate() {
                    *g = u64::from(data[base + off + k * stride]);
                }
                for x in 0..p {
                    let row = &mat[x * p..(x + 1) * p];
                    let s: u64 = row.iter().zip(&gathered).map(|(a, b)| a * b).sum();
                    data[base + off + x * stride] = (s % p as u64) as u8;
                }
            }
        }
        stride = block;
    }
}

/// `q1 op q2`, optionally multiplying the result by `scalar`.
pub fn poly_algebra(
    q1: &Polynomial,
    q2: &Polynomial,
    op: PolyOp,
    scalar: Option<FieldElement>,
) -> Result<Polynomial> {
    let r = match op {
        PolyOp::Add => q1.try_add(q2)?,
        PolyOp::Sub => q1.try_sub(q2)?,
        PolyOp::Mul => q1.try_mul(q2)?,
    };
    match scalar {
        Some(c) => r.scale(c),
        None => Ok(r),
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            let c = t.coeff.value();
            let mut wrote = false;
            if c != 1 || t.degree() == 0 {
                write!(f, "{c}")?;
                wrote = true;
            }
            for (j, &e) in t.exponents.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                if wrote {
                    write!(f, "*")?;
                }
                write!(f, "x{j}")?;
                if e > 1 {
                    write!(f, "^{e}")?;
                }
                wrote = true;
            }
        }
        Ok(())
    }
}
