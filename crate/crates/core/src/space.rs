//! Index arithmetic on `F_p^n`.
//!
//! Points are encoded little-endian base `p` (coordinate 0 least
//! significant). All dense tables in the crate use this encoding.

use crate::budget;
use crate::error::Result;
use crate::field::FieldSpec;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Space {
    field: FieldSpec,
    n: usize,
    size: usize,
    pows: Vec<usize>,
}

impl Space {
    /// Fails when `p^n` exceeds the table budget.
    pub fn new(field: FieldSpec, n: usize) -> Result<Self> {
        let size = budget::check_table(field.modulus(), n)?;
        let p = field.modulus() as usize;
        let pows = std::iter::successors(Some(1usize), |&x| Some(x * p))
            .take(n)
            .collect();
        Ok(Space {
            field,
            n,
            size,
            pows,
        })
    }

    #[inline]
    pub fn field(&self) -> FieldSpec {
        self.field
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    fn binary(&self) -> bool {
        self.field.modulus() == 2
    }

    pub fn digits(&self, mut idx: usize) -> Vec<u64> {
        let p = self.field.modulus() as usize;
        (0..self.n)
            .map(|_| {
                let d = idx % p;
                idx /= p;
                d as u64
            })
            .collect()
    }

    pub fn encode(&self, digits: &[u64]) -> usize {
        debug_assert_eq!(digits.len(), self.n);
        digits
            .iter()
            .zip(&self.pows)
            .map(|(&d, &w)| (d % self.field.modulus()) as usize * w)
            .sum()
    }

    /// Index of `e_i`.
    pub fn basis(&self, i: usize) -> usize {
        self.pows[i]
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        if self.binary() {
            return a ^ b;
        }
        let p = self.field.modulus() as usize;
        let (mut a, mut b) = (a, b);
        let mut out = 0;
        for &w in &self.pows {
            let s = a % p + b % p;
            out += if s >= p { s - p } else { s } * w;
            a /= p;
            b /= p;
        }
        out
    }

    pub fn neg(&self, a: usize) -> usize {
        if self.binary() {
            return a;
        }
        let p = self.field.modulus() as usize;
        let mut a = a;
        let mut out = 0;
        for &w in &self.pows {
            let d = a % p;
            out += if d == 0 { 0 } else { p - d } * w;
            a /= p;
        }
        out
    }

    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.add(a, self.neg(b))
    }

    /// `c * a` coordinatewise.
    pub fn scale(&self, c: u64, a: usize) -> usize {
        let p = self.field.modulus() as usize;
        let c = (c % self.field.modulus()) as usize;
        let mut a = a;
        let mut out = 0;
        for &w in &self.pows {
            out += (a % p * c % p) * w;
            a /= p;
        }
        out
    }

    /// Inner product `a . b` in `F_p`.
    pub fn dot(&self, a: usize, b: usize) -> u64 {
        let p = self.field.modulus() as usize;
        let (mut a, mut b) = (a, b);
        let mut acc = 0usize;
        for _ in 0..self.n {
            acc += (a % p) * (b % p);
            a /= p;
            b /= p;
        }
        (acc % p) as u64
    }

    /// `out[x] = values[x + shift]` for every `x`.
    pub fn shifted(&self, values: &[u8], shift: usize) -> Vec<u8> {
        debug_assert_eq!(values.len(), self.size);
        if self.binary() {
            return (0..self.size).map(|x| values[x ^ shift]).collect();
        }
        let mut out = vec![0u8; self.size];
        self.for_each_shifted(shift, |x, y| out[x] = values[y]);
        out
    }

    /// Calls `f(x, x + shift)` for every `x` in index order, tracking the
    /// shifted index incrementally.
    pub fn for_each_shifted(&self, shift: usize, mut f: impl FnMut(usize, usize)) {
        if self.binary() {
            for x in 0..self.size {
                f(x, x ^ shift);
            }
            return;
        }
        let p = self.field.modulus() as usize;
        let sd: Vec<usize> = self.digits(shift).into_iter().map(|d| d as usize).collect();
        let mut xd = vec![0usize; self.n];
        let mut y = shift;
        for x in 0..self.size {
            f(x, y);
            for j in 0..self.n {
                let old = (xd[j] + sd[j]) % p;
                xd[j] += 1;
                if xd[j] == p {
                    xd[j] = 0;
                }
                let new = (xd[j] + sd[j]) % p;
                y = y + new * self.pows[j] - old * self.pows[j];
                if xd[j] != 0 {
                    break;
                }
            }
        }
    }

    /// Table over `blocks * n` variables (block 0 least significant) whose
    /// value at `(z_0, .., z_{blocks-1})` is `values[sum of z_b for b in mask]`.
    pub fn block_sum_table(&self, blocks: usize, mask: u64, values: &[u8]) -> Result<Vec<u8>> {
        let total = budget::check_table(self.field.modulus(), self.n * blocks)?;
        let mut out = Vec::with_capacity(total);
        for big in 0..total {
            out.push(values[self.block_sum(blocks, mask, big)]);
        }
        Ok(out)
    }

    /// `sum of z_b for b in mask` for a point of the `blocks`-fold product space.
    pub fn block_sum(&self, blocks: usize, mask: u64, mut big: usize) -> usize {
        let mut acc = 0;
        for b in 0..blocks {
            let z = big % self.size;
            big /= self.size;
            if mask >> b & 1 == 1 {
                acc = self.add(acc, z);
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(p: u64, n: usize) -> Space {
        Space::new(FieldSpec::new(p).unwrap(), n).unwrap()
    }

    #[test]
    fn encode_is_little_endian() {
        let s = space(3, 3);
        assert_eq!(s.encode(&[1, 0, 0]), 1);
        assert_eq!(s.encode(&[0, 1, 0]), 3);
        assert_eq!(s.encode(&[2, 1, 1]), 2 + 3 + 9);
        assert_eq!(s.digits(17), vec![2, 2, 1]);
    }

    #[test]
    fn shifted_iteration_matches_digit_addition() {
        for (p, n) in [(2, 4), (3, 3), (5, 2)] {
            let s = space(p, n);
            for shift in [0, 1, s.size() - 1, s.size() / 2] {
                let mut seen = vec![];
                s.for_each_shifted(shift, |x, y| seen.push((x, y)));
                assert_eq!(seen.len(), s.size());
                for (x, y) in seen {
                    assert_eq!(y, s.add(x, shift));
                }
            }
        }
    }

    #[test]
    fn add_neg_sub_are_consistent() {
        let s = space(5, 3);
        for a in (0..s.size()).step_by(7) {
            assert_eq!(s.add(a, s.neg(a)), 0);
            for b in (0..s.size()).step_by(11) {
                assert_eq!(s.sub(s.add(a, b), b), a);
            }
        }
    }

    #[test]
    fn budget_is_enforced() {
        let f = FieldSpec::new(61).unwrap();
        assert!(Space::new(f, 10).unwrap_err().is_budget());
    }
}
