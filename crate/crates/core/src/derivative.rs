//! Directional and iterated derivatives.
//!
//! `D_a q(X) = q(X + a) - q(X)`. Every derivative lowers the degree by at
//! least one, so a `(d+1)`-fold derivative of a degree-`d` polynomial
//! vanishes identically; the cube sums below are that identity evaluated at
//! a point.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::budget;
use crate::error::{Error, Result};
use crate::field::{eliminate, rank_gf2, FieldElement, FieldSpec};
use crate::poly::{AffineForm, Point, Polynomial};
use crate::space::Space;
use crate::spectral;

/// `q(X + a) - q(X)`.
pub fn derivative(q: &Polynomial, a: &Point) -> Result<Polynomial> {
    q.shift(a)?.try_sub(q)
}

fn check_point(q: &Polynomial, x: &Point) -> Result<()> {
    q.field().ensure_same(x.field())?;
    if x.len() != q.n() {
        return Err(Error::ArityMismatch {
            left: q.n(),
            right: x.len(),
        });
    }
    Ok(())
}

/// `sum over I of (-1)^|I| q(x + y_I)` with `y_I = sum_{i in I} y_i`.
pub fn cube_sum(q: &Polynomial, x: &Point, ys: &[Point]) -> Result<FieldElement> {
    check_point(q, x)?;
    for y in ys {
        check_point(q, y)?;
    }
    let raw: Vec<&[u64]> = ys.iter().map(Point::coords).collect();
    Ok(q.field().element(cube_sum_raw(q, x.coords(), &raw)))
}

pub(crate) fn cube_sum_raw(q: &Polynomial, x: &[u64], ys: &[&[u64]]) -> u64 {
    let f = q.field();
    let mut acc = 0;
    let mut point = vec![0u64; x.len()];
    for mask in 0u64..(1 << ys.len()) {
        point.copy_from_slice(x);
        for (i, y) in ys.iter().enumerate() {
            if mask >> i & 1 == 1 {
                for (c, &v) in point.iter_mut().zip(y.iter()) {
                    *c = f.add(*c, v);
                }
            }
        }
        let v = q.eval_raw(&point);
        acc = if mask.count_ones() % 2 == 0 {
            f.add(acc, v)
        } else {
            f.sub(acc, v)
        };
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegreeMode {
    /// Read the degree off the canonical form.
    Formal,
    /// Sample random `(d+1)`-cubes and reject on a nonzero cube sum.
    Randomized,
}

pub const DEFAULT_DEGREE_TRIALS: usize = 64;

/// Whether `q` has degree at most `d`. The randomized mode never rejects a
/// polynomial that truly has degree at most `d`.
pub fn degree_le(q: &Polynomial, d: usize, mode: DegreeMode, trials: usize, seed: u64) -> bool {
    match mode {
        DegreeMode::Formal => q.degree() <= d,
        DegreeMode::Randomized => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = q.field().modulus();
            let n = q.n();
            let draw = |rng: &mut ChaCha8Rng| -> Vec<u64> {
                (0..n).map(|_| rng.gen_range(0..p)).collect()
            };
            for _ in 0..trials {
                let x = draw(&mut rng);
                let ys: Vec<Vec<u64>> = (0..=d).map(|_| draw(&mut rng)).collect();
                let refs: Vec<&[u64]> = ys.iter().map(Vec::as_slice).collect();
                if cube_sum_raw(q, &x, &refs) != 0 {
                    return false;
                }
            }
            true
        }
    }
}

/// A polynomial over several equal-width variable blocks `Y_1, .., Y_k`.
/// Block `b` occupies variables `b*width .. (b+1)*width` of the body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPolynomial {
    width: usize,
    blocks: Vec<String>,
    body: Polynomial,
}

impl BlockPolynomial {
    pub fn new(width: usize, blocks: Vec<String>, body: Polynomial) -> Result<Self> {
        if body.n() != width * blocks.len() {
            return Err(Error::ArityMismatch {
                left: width * blocks.len(),
                right: body.n(),
            });
        }
        Ok(BlockPolynomial {
            width,
            blocks,
            body,
        })
    }

    /// Blocks named `Y1..Yk`.
    pub fn with_default_names(width: usize, k: usize, body: Polynomial) -> Result<Self> {
        Self::new(width, (1..=k).map(|i| format!("Y{i}")).collect(), body)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn blocks(&self) -> &[String] {
        &self.blocks
    }

    pub fn body(&self) -> &Polynomial {
        &self.body
    }

    pub fn field(&self) -> FieldSpec {
        self.body.field()
    }

    fn fresh_name(&self, stem: &str) -> String {
        (1..)
            .map(|i| format!("{stem}{i}"))
            .find(|name| !self.blocks.contains(name))
            .expect("unbounded name supply")
    }

    /// Single-block step `h - h(.., Y_t + Z, ..)` with `Z` appended as a new block.
    pub fn derive_block(&self, t: usize) -> Result<BlockPolynomial> {
        if t >= self.blocks.len() {
            return Err(Error::Precondition(format!(
                "block {t} out of range for {} blocks",
                self.blocks.len()
            )));
        }
        let k = self.blocks.len();
        let n_out = (k + 1) * self.width;
        let lifted = self.body.embed(n_out, 0)?;
        let forms: Vec<AffineForm> = (0..k * self.width)
            .map(|v| {
                let mut form = AffineForm::var(v);
                if v / self.width == t {
                    form.coeffs.push((k * self.width + v % self.width, 1));
                }
                form
            })
            .collect();
        let moved = self.body.substitute_affine(n_out, &forms)?;
        let mut blocks = self.blocks.clone();
        blocks.push(self.fresh_name("Z"));
        BlockPolynomial::new(self.width, blocks, lifted.try_sub(&moved)?)
    }
}

/// `h'(Y, Z) = sum over w in {0,1}^r of (-1)^|w| h(Y_1 + w_1 Z_1, .., Y_r + w_r Z_r, Y_{r+1}, ..)`,
/// with fresh blocks `Z_1..Z_r` appended.
pub fn block_derive(h: &BlockPolynomial, r: usize) -> Result<BlockPolynomial> {
    let k = h.blocks.len();
    if r > k {
        return Err(Error::Precondition(format!(
            "cannot derive {r} blocks of a {k}-block polynomial"
        )));
    }
    let w = h.width;
    let f = h.field();
    let n_out = (k + r) * w;
    let mut acc = Polynomial::zero(f, n_out);
    for mask in 0u64..(1 << r) {
        let forms: Vec<AffineForm> = (0..k * w)
            .map(|v| {
                let b = v / w;
                let mut form = AffineForm::var(v);
                if b < r && mask >> b & 1 == 1 {
                    form.coeffs.push(((k + b) * w + v % w, 1));
                }
                form
            })
            .collect();
        let term = h.body.substitute_affine(n_out, &forms)?;
        acc = if mask.count_ones() % 2 == 0 {
            acc.try_add(&term)?
        } else {
            acc.try_sub(&term)?
        };
    }
    let mut blocks = h.blocks.clone();
    let mut probe = h.clone();
    for _ in 0..r {
        let name = probe.fresh_name("Z");
        probe.blocks.push(name.clone());
        blocks.push(name);
    }
    BlockPolynomial::new(w, blocks, acc)
}

/// Bias of `G(X, Y_1..Y_d) = sum over I of (-1)^(d-|I|) q(X + Y_I)`, the
/// `d`-fold derivative of `q`.
///
/// The first `d-2` directions are enumerated over derivative tables; the
/// last two are averaged in closed form. When `deg q <= d` the remaining
/// function is quadratic and contributes `p^-rank` of its bilinear form;
/// otherwise the fourth moment of its character spectrum is used. The
/// enumeration never touches the `(d+1)n`-dimensional space directly.
pub fn gowers_derivative_bias(q: &Polynomial, d: usize) -> Result<f64> {
    if d == 0 {
        return Err(Error::Precondition(
            "the derivative order d must be at least 1".into(),
        ));
    }
    if q.degree() < d {
        return Ok(1.0);
    }
    let f = q.field();
    let n = q.n();
    let table = q.tabulate()?;
    let space = table.space();
    if d == 1 {
        let b = spectral::bias_exact(&table).magnitude;
        return Ok(b * b);
    }
    budget::check_entries(budget::saturating_pow(f.modulus(), (d - 2) * n))?;
    let leaf = if q.degree() <= d {
        Leaf::Quadratic(QuadraticProbe::new(&space))
    } else {
        Leaf::Fourier
    };
    gowers_level(&space, table.values(), d, &leaf, true)
}

enum Leaf {
    Quadratic(QuadraticProbe),
    Fourier,
}

/// Evaluation points `0, e_j, e_j + e_k` used to read off the bilinear form
/// `B(a, b) = g(a+b) - g(a) - g(b) + g(0)` of a quadratic `g`.
struct QuadraticProbe {
    n: usize,
    field: FieldSpec,
    basis: Vec<usize>,
    pairs: Vec<usize>,
}

impl QuadraticProbe {
    fn new(space: &Space) -> Self {
        let n = space.n();
        let basis: Vec<usize> = (0..n).map(|j| space.basis(j)).collect();
        let pairs = (0..n)
            .flat_map(|j| (0..n).map(move |k| (j, k)))
            .map(|(j, k)| space.add(basis[j], basis[k]))
            .collect();
        QuadraticProbe {
            n,
            field: space.field(),
            basis,
            pairs,
        }
    }

    /// `E_{a,b} w^{B(a,b)} = p^{-rank B}` for `g(z) = eval(z)`.
    fn bias(&self, eval: impl Fn(usize) -> u64) -> f64 {
        let f = self.field;
        let n = self.n;
        let g0 = eval(0);
        let gb: Vec<u64> = self.basis.iter().map(|&e| eval(e)).collect();
        let entry = |j: usize, k: usize| {
            let v = eval(self.pairs[j * n + k]);
            f.add(f.sub(f.sub(v, gb[j]), gb[k]), g0)
        };
        let rank = if f.modulus() == 2 {
            let mut rows: Vec<u64> = (0..n)
                .map(|j| {
                    (0..n).fold(0u64, |acc, k| {
                        if k != j && entry(j, k) == 1 {
                            acc | 1 << k
                        } else {
                            acc
                        }
                    })
                })
                .collect();
            // Over F_2 the diagonal of B is g(2e_j) - 2g(e_j) + g(0) = 0.
            rank_gf2(&mut rows)
        } else {
            let mut m: Vec<u64> = (0..n * n).map(|i| entry(i / n, i % n)).collect();
            eliminate(f, n, n, &mut m)
        };
        (f.modulus() as f64).powi(-(rank as i32))
    }
}

/// Averages over one more direction `y` of the derivative table `D_y g`.
fn gowers_level(space: &Space, g: &[u8], remaining: usize, leaf: &Leaf, top: bool) -> Result<f64> {
    let f = space.field();
    if remaining == 2 {
        return Ok(match leaf {
            Leaf::Quadratic(probe) => probe.bias(|z| u64::from(g[z])),
            Leaf::Fourier => fourth_moment(space, g)?,
        });
    }
    let size = space.size();
    if remaining == 3 && f.modulus() == 2 && matches!(leaf, Leaf::Quadratic(_)) {
        return Ok(cubic_gray_average(space, g));
    }
    let per_direction = |y: usize| -> Result<f64> {
        if remaining == 3 {
            if let Leaf::Quadratic(probe) = leaf {
                return Ok(probe.bias(|z| f.sub(u64::from(g[space.add(z, y)]), u64::from(g[z]))));
            }
        }
        let shifted = space.shifted(g, y);
        let next: Vec<u8> = shifted
            .iter()
            .zip(g)
            .map(|(&a, &b)| f.sub(u64::from(a), u64::from(b)) as u8)
            .collect();
        gowers_level(space, &next, remaining - 1, leaf, false)
    };
    // Partial sums are collected per direction and added in index order so
    // the result does not depend on the thread count.
    let parts: Vec<f64> = if top {
        (0..size)
            .into_par_iter()
            .map(per_direction)
            .collect::<Result<_>>()?
    } else {
        (0..size).map(per_direction).collect::<Result<_>>()?
    };
    Ok(parts.iter().sum::<f64>() / size as f64)
}

/// `E_y 2^{-rank B_y}` over `F_2^n` for a cubic `g`, where `B_y` is the
/// bilinear form of `D_y g`. `B_y[j][k] = sum_l y_l T[j][k][l]` with `T` the
/// constant third derivative of `g`, so visiting `y` in Gray-code order
/// changes `B_y` by one slice `T[.][.][l]` per step.
fn cubic_gray_average(space: &Space, g: &[u8]) -> f64 {
    let n = space.n();
    let at = |mask: usize| g[mask] & 1;
    let mut slices = vec![0u64; n * n];
    for j in 0..n {
        for k in j + 1..n {
            for l in (0..n).filter(|&l| l != j && l != k) {
                let (ej, ek, el) = (1usize << j, 1usize << k, 1usize << l);
                let v = at(0)
                    ^ at(ej)
                    ^ at(ek)
                    ^ at(el)
                    ^ at(ej | ek)
                    ^ at(ej | el)
                    ^ at(ek | el)
                    ^ at(ej | ek | el);
                if v == 1 {
                    slices[l * n + j] |= 1 << k;
                    slices[l * n + k] |= 1 << j;
                }
            }
        }
    }
    let weights: Vec<f64> = (0..=n).map(|r| 0.5f64.powi(r as i32)).collect();
    let mut rows = vec![0u64; n];
    let mut scratch = vec![0u64; n];
    let mut total = 1.0;
    for i in 1..space.size() {
        let l = i.trailing_zeros() as usize;
        for (row, &t) in rows.iter_mut().zip(&slices[l * n..(l + 1) * n]) {
            *row ^= t;
        }
        scratch.copy_from_slice(&rows);
        total += weights[rank_gf2(&mut scratch)];
    }
    total / space.size() as f64
}

/// `E_{x,a,b} w^{D_a D_b g(x)} = sum over alpha of |hat g(alpha)|^4`.
fn fourth_moment(space: &Space, g: &[u8]) -> Result<f64> {
    let table = crate::poly::FunctionTable::from_values(space.field(), space.n(), g.to_vec())?;
    let spectrum = spectral::character_spectrum(&table)?;
    Ok(spectrum
        .coefficients()
        .iter()
        .map(|c| c.norm_sqr().powi(2))
        .sum())
}

pub const SAMPLED_POOL_SIZE: usize = 256;

/// Directions used to enumerate `Der(q)`: every point of `F_p^n` when
/// `n <= 4` or `p^n <= 256`, otherwise `256` seeded uniform draws.
pub fn direction_pool(field: FieldSpec, n: usize, seed: u64) -> Result<Vec<Point>> {
    if n <= 4 || budget::saturating_pow(field.modulus(), n) <= SAMPLED_POOL_SIZE as u64 {
        let space = Space::new(field, n)?;
        return Ok((0..space.size())
            .map(|i| Point::from_index(&space, i))
            .collect());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..SAMPLED_POOL_SIZE)
        .map(|_| {
            let coords: Vec<u64> = (0..n).map(|_| rng.gen_range(0..field.modulus())).collect();
            Point::new(field, &coords)
        })
        .collect())
}

/// One member of a sampled iterated-derivative space with the chain of
/// shifts that produced it from `base[origin]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivedMember {
    pub poly: Polynomial,
    pub origin: usize,
    pub shifts: Vec<Point>,
}

impl DerivedMember {
    /// Replays the provenance chain from the base set.
    pub fn reconstruct(&self, base: &[Polynomial]) -> Result<Polynomial> {
        let mut q = base
            .get(self.origin)
            .ok_or_else(|| Error::Invalid("provenance refers to a missing base polynomial".into()))?
            .clone();
        for a in &self.shifts {
            q = derivative(&q, a)?;
        }
        Ok(q)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivativeSpaceSample {
    pub base: Vec<Polynomial>,
    pub depth: usize,
    pub members: Vec<DerivedMember>,
}

/// Samples `count` members of `Der_C(F)` by random shift chains of length
/// at most `C`. With `C = 0` the sample is `F` itself.
pub fn der_space_sample(
    base: &[Polynomial],
    depth: usize,
    count: usize,
    seed: u64,
) -> Result<DerivativeSpaceSample> {
    let mut members = Vec::new();
    if count > 0 && depth == 0 {
        members = base
            .iter()
            .enumerate()
            .map(|(origin, q)| DerivedMember {
                poly: q.clone(),
                origin,
                shifts: Vec::new(),
            })
            .collect();
    } else if count > 0 && !base.is_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..count {
            let origin = rng.gen_range(0..base.len());
            let len = rng.gen_range(0..=depth);
            let q0 = &base[origin];
            let f = q0.field();
            let mut q = q0.clone();
            let mut shifts = Vec::with_capacity(len);
            for _ in 0..len {
                let coords: Vec<u64> = (0..q0.n()).map(|_| rng.gen_range(0..f.modulus())).collect();
                let a = Point::new(f, &coords);
                q = derivative(&q, &a)?;
                shifts.push(a);
            }
            members.push(DerivedMember {
                poly: q,
                origin,
                shifts,
            });
        }
    }
    Ok(DerivativeSpaceSample {
        base: base.to_vec(),
        depth,
        members,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_polynomial;
    use proptest::prelude::*;

    fn f(p: u64) -> FieldSpec {
        FieldSpec::new(p).unwrap()
    }

    fn parse(s: &str, p: u64, n: usize) -> Polynomial {
        parse_polynomial(s, f(p), n).unwrap()
    }

    #[test]
    fn derivative_examples() {
        let f5 = f(5);
        let lin = parse("2*x0 + 3*x1 + 4", 5, 2);
        let a = Point::new(f5, &[1, 3]);
        // alpha . a = 2 + 9 = 11 = 1 mod 5
        assert_eq!(derivative(&lin, &a).unwrap(), parse("1", 5, 2));
        let and = parse("x0*x1", 2, 2);
        assert_eq!(
            derivative(&and, &Point::basis(f(2), 2, 0)).unwrap(),
            parse("x1", 2, 2)
        );
        assert!(derivative(&and, &Point::zero(f(2), 2)).unwrap().is_zero());
    }

    #[test]
    fn cube_sum_examples() {
        let f2 = f(2);
        let q = parse("x0*x1*x2", 2, 3);
        let ys: Vec<Point> = (0..3).map(|i| Point::basis(f2, 3, i)).collect();
        // Only the full corner (1,1,1) is nonzero; it enters with sign (-1)^3 = 1 in F_2.
        assert_eq!(cube_sum(&q, &Point::zero(f2, 3), &ys).unwrap().value(), 1);
        let f3 = f(3);
        let lin = parse("x0", 3, 2);
        let ys = [Point::new(f3, &[1, 2]), Point::new(f3, &[2, 2])];
        assert_eq!(
            cube_sum(&lin, &Point::new(f3, &[1, 1]), &ys)
                .unwrap()
                .value(),
            0
        );
    }

    #[test]
    fn formal_degree_examples() {
        let and = parse("x0*x1", 2, 2);
        assert!(degree_le(&and, 2, DegreeMode::Formal, 0, 0));
        assert!(degree_le(&parse("0", 2, 2), 0, DegreeMode::Formal, 0, 0));
        assert!(degree_le(
            &parse("0", 2, 2),
            0,
            DegreeMode::Randomized,
            64,
            1
        ));
    }

    #[test]
    fn randomized_degree_test_rejects_and_at_d1() {
        // At n=2, (x, y1, y2) in F_2^6: the 2-cube sum of x0*x1 is y1_0 y2_1 + y1_1 y2_0,
        // nonzero on 6 of 16 direction pairs, so 50 trials miss with probability (5/8)^50.
        let q = parse("x0*x1", 2, 2);
        let mut violating = 0;
        for idx in 0..64u64 {
            let b: Vec<u64> = (0..6).map(|i| idx >> i & 1).collect();
            if cube_sum_raw(&q, &b[0..2], &[&b[2..4], &b[4..6]]) != 0 {
                violating += 1;
            }
        }
        assert_eq!(violating, 24);
        assert!(!degree_le(&q, 1, DegreeMode::Randomized, 50, 3));
    }

    #[test]
    fn block_derive_examples() {
        let f2 = f(2);
        let c = BlockPolynomial::with_default_names(2, 1, parse("1", 2, 2)).unwrap();
        assert!(block_derive(&c, 1).unwrap().body().is_zero());

        // h = l(Y1) linear: h' = l(Y1) - l(Y1 + Z1) = -l(Z1) + l(0), no Y1 dependence.
        let h = BlockPolynomial::with_default_names(2, 1, parse("2*x0 + x1 + 1", 3, 2)).unwrap();
        let d = block_derive(&h, 1).unwrap();
        assert_eq!(d.blocks(), &["Y1".to_string(), "Z1".to_string()]);
        assert_eq!(d.body(), &parse("x2 + 2*x3", 3, 4));

        // h = Y1_0 * Y1_1 at width 2: compare against the 2-term definition on all 16 points.
        let h = BlockPolynomial::with_default_names(2, 1, parse("x0*x1", 2, 2)).unwrap();
        let d = block_derive(&h, 1).unwrap();
        let t = d.body().tabulate().unwrap();
        for idx in 0..16usize {
            let b: Vec<u64> = (0..4).map(|i| (idx >> i & 1) as u64).collect();
            let expect = (b[0] * b[1] + (b[0] ^ b[2]) * (b[1] ^ b[3])) % 2;
            assert_eq!(u64::from(t.values()[idx]), expect);
        }
        assert!(block_derive(&h, 2).is_err());
        let _ = f2;
    }

    #[test]
    fn block_derive_matches_iterated_single_steps() {
        for (p, body) in [
            (2, "x0*x1*x2 + x1*x3 + x0"),
            (3, "x0^2*x1 + 2*x2*x3 + x1^2"),
        ] {
            let h = BlockPolynomial::with_default_names(2, 2, parse(body, p, 4)).unwrap();
            let once = block_derive(&h, 2).unwrap();
            let stepped = h.derive_block(0).unwrap().derive_block(1).unwrap();
            assert_eq!(once.body(), stepped.body());
            assert_eq!(once.blocks(), stepped.blocks());
        }
    }

    #[test]
    fn gowers_trivial_cases() {
        assert_eq!(
            gowers_derivative_bias(&parse("x0*x1 + x2", 2, 3), 3).unwrap(),
            1.0
        );
        assert!(gowers_derivative_bias(&parse("x0", 2, 1), 1).unwrap() < 1e-12);
        assert!(gowers_derivative_bias(&parse("x0", 2, 1), 0).is_err());
    }

    #[test]
    fn der_space_examples() {
        let f2 = f(2);
        let base = vec![parse("x0*x1", 2, 2)];
        let s0 = der_space_sample(&base, 0, 5, 1).unwrap();
        assert_eq!(s0.members.len(), 1);
        assert_eq!(s0.members[0].poly, base[0]);
        assert!(der_space_sample(&base, 3, 0, 1).unwrap().members.is_empty());

        // Der(x0*x1) at n=2, all four shift directions.
        let allowed: Vec<Polynomial> = (0..4u64)
            .map(|i| derivative(&base[0], &Point::new(f2, &[i & 1, i >> 1])).unwrap())
            .chain([base[0].clone()])
            .collect();
        let s1 = der_space_sample(&base, 1, 40, 9).unwrap();
        for m in &s1.members {
            assert!(allowed.contains(&m.poly), "{} not in Der_1", m.poly);
            assert!(m.shifts.len() <= 1);
            assert_eq!(m.reconstruct(&base).unwrap(), m.poly);
        }
    }

    fn arb_poly(p: u64, n: usize) -> impl Strategy<Value = Polynomial> {
        prop::collection::vec((prop::collection::vec(0u64..p, n), 0u64..p), 0..8)
            .prop_map(move |t| Polynomial::from_terms(FieldSpec::new(p).unwrap(), n, t))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn derivatives_drop_degree(q in arb_poly(3, 3), a in prop::collection::vec(0u64..3, 3)) {
            let dq = derivative(&q, &Point::new(f(3), &a)).unwrap();
            prop_assert!(dq.is_zero() || dq.degree() < q.degree());
        }

        #[test]
        fn one_direction_cube_is_negated_derivative(q in arb_poly(3, 2), x in prop::collection::vec(0u64..3, 2), y in prop::collection::vec(0u64..3, 2)) {
            let f3 = f(3);
            let dq = derivative(&q, &Point::new(f3, &y)).unwrap();
            prop_assert_eq!(cube_sum_raw(&q, &x, &[&y]), f3.neg(dq.eval_raw(&x)));
        }

        #[test]
        fn cube_sum_is_symmetric_in_directions(q in arb_poly(3, 2), pts in prop::collection::vec(prop::collection::vec(0u64..3, 2), 4)) {
            let ys: Vec<&[u64]> = pts[1..].iter().map(Vec::as_slice).collect();
            let rev: Vec<&[u64]> = ys.iter().rev().copied().collect();
            prop_assert_eq!(cube_sum_raw(&q, &pts[0], &ys), cube_sum_raw(&q, &pts[0], &rev));
        }

        #[test]
        fn low_degree_cubes_vanish(q in arb_poly(2, 4), pts in prop::collection::vec(prop::collection::vec(0u64..2, 4), 6)) {
            let d = q.degree();
            prop_assume!(d + 2 <= pts.len());
            let ys: Vec<&[u64]> = pts[1..=d + 1].iter().map(Vec::as_slice).collect();
            prop_assert_eq!(cube_sum_raw(&q, &pts[0], &ys), 0);
        }
    }
}
