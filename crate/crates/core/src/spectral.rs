//! Bias and character spectra over `F_p^n`.
//!
//! With `w = exp(2 pi i / p)`, `bias(f) = E_X w^{f(X)}` and the spectrum of
//! `f` is `hat f(alpha) = E_X w^{f(X) - alpha.X}`, so `hat f(0) = bias(f)`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::budget;
use crate::derivative::{block_derive, BlockPolynomial};
use crate::error::{Error, Result};
use crate::factor::Factor;
use crate::field::{FieldElement, FieldSpec};
use crate::poly::{FunctionTable, Point};
use crate::space::Space;

/// `w^k` for `k = 0..p`.
pub fn roots_of_unity(p: u64) -> Vec<Complex64> {
    (0..p)
        .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / p as f64))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiasReport {
    pub bias_value: Complex64,
    pub magnitude: f64,
    /// Fraction of points taking each value `0..p`.
    pub value_distribution: Vec<f64>,
    /// Most frequent value, smallest on ties.
    pub plurality_value: FieldElement,
}

impl BiasReport {
    fn from_counts(field: FieldSpec, counts: &[u64]) -> Self {
        let total: u64 = counts.iter().sum();
        let dist: Vec<f64> = counts.iter().map(|&c| c as f64 / total as f64).collect();
        let roots = roots_of_unity(field.modulus());
        let bias_value: Complex64 = dist.iter().zip(&roots).map(|(&d, &w)| w * d).sum();
        let plurality = counts
            .iter()
            .enumerate()
            .fold(0, |best, (b, &c)| if c > counts[best] { b } else { best });
        BiasReport {
            bias_value,
            magnitude: bias_value.norm(),
            value_distribution: dist,
            plurality_value: field.element(plurality as u64),
        }
    }
}

pub fn bias_exact(t: &FunctionTable) -> BiasReport {
    let p = t.field().modulus() as usize;
    let mut counts = vec![0u64; p];
    for &v in t.values() {
        counts[v as usize] += 1;
    }
    BiasReport::from_counts(t.field(), &counts)
}

/// Dense character coefficients indexed like the points of `F_p^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    field: FieldSpec,
    n: usize,
    coefficients: Vec<Complex64>,
}

impl Spectrum {
    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn coefficient(&self, alpha: &Point) -> Result<Complex64> {
        let space = Space::new(self.field, self.n)?;
        Ok(self.coefficients[alpha.index(&space)])
    }

    /// `sum |hat f(alpha)|^2`, equal to 1 for phase functions.
    pub fn energy(&self) -> f64 {
        self.coefficients.iter().map(Complex64::norm_sqr).sum()
    }

    /// Reconstructs `w^{f(x)} = sum_alpha hat f(alpha) w^{alpha.x}` for every `x`.
    pub fn inverse(&self) -> Vec<Complex64> {
        let p = self.field.modulus() as usize;
        let mut data = self.coefficients.clone();
        let roots = roots_of_unity(self.field.modulus());
        axis_dft(&mut data, p, self.n, |a, x| roots[(a * x) % p], 1.0);
        data
    }

    /// One `alpha_index,re,im` row per character.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("alpha_index,re,im\n");
        for (i, c) in self.coefficients.iter().enumerate() {
            let _ = writeln!(out, "{i},{:e},{:e}", c.re, c.im);
        }
        out
    }
}

/// Applies the `p x p` kernel `k(a, x)` along every axis, scaling each pass.
fn axis_dft(
    data: &mut [Complex64],
    p: usize,
    n: usize,
    kernel: impl Fn(usize, usize) -> Complex64,
    scale: f64,
) {
    let mat: Vec<Complex64> = (0..p * p).map(|i| kernel(i / p, i % p) * scale).collect();
    let mut gathered = vec![Complex64::new(0.0, 0.0); p];
    let mut stride = 1;
    for _ in 0..n {
        let block = stride * p;
        for base in (0..data.len()).step_by(block) {
            for off in 0..stride {
                for (x, g) in gathered.iter_mut().enumerate() {
                    *g = data[base + off + x * stride];
                }
                for a in 0..p {
                    let row = &mat[a * p..(a + 1) * p];
                    data[base + off + a * stride] =
                        row.iter().zip(&gathered).map(|(m, g)| m * g).sum();
                }
            }
        }
        stride = block;
    }
}

/// Spectrum by the tensor-structured transform, `O(n p^{n+1})` operations.
pub fn character_spectrum(t: &FunctionTable) -> Result<Spectrum> {
    let f = t.field();
    budget::check_table(f.modulus(), t.n())?;
    let p = f.modulus() as usize;
    let roots = roots_of_unity(f.modulus());
    let mut data: Vec<Complex64> = t.values().iter().map(|&v| roots[v as usize]).collect();
    axis_dft(
        &mut data,
        p,
        t.n(),
        |a, x| roots[(p - (a * x) % p) % p],
        1.0 / p as f64,
    );
    Ok(Spectrum {
        field: f,
        n: t.n(),
        coefficients: data,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasEstimate {
    pub estimate: Complex64,
    /// Hoeffding radius per real and imaginary part at 99% confidence.
    pub radius: f64,
}

pub fn hoeffding_radius(samples: usize) -> f64 {
    (2.0 * (2.0f64 / 0.01).ln() / samples as f64).sqrt()
}

/// Empirical mean of `w^{f(X)}` over `samples` uniform points.
pub fn bias_estimate(
    field: FieldSpec,
    n: usize,
    mut oracle: impl FnMut(&Point) -> FieldElement,
    samples: usize,
    seed: u64,
) -> Result<BiasEstimate> {
    if samples == 0 {
        return Err(Error::Precondition(
            "bias estimation needs at least one sample".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let roots = roots_of_unity(field.modulus());
    let mut acc = Complex64::new(0.0, 0.0);
    let mut coords = vec![0u64; n];
    for _ in 0..samples {
        for c in coords.iter_mut() {
            *c = rng.gen_range(0..field.modulus());
        }
        let v = oracle(&Point::new(field, &coords));
        field.ensure_same(v.field())?;
        acc += roots[v.value() as usize];
    }
    Ok(BiasEstimate {
        estimate: acc / samples as f64,
        radius: hoeffding_radius(samples),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeBiasCheck {
    pub bias_h: f64,
    pub bias_h_prime: f64,
    pub holds: bool,
}

/// Compares `|bias(h')|` against `|bias(h)|^{2^r}` for `h' = block_derive(h, r)`.
pub fn derivative_bias_check(h: &BlockPolynomial, r: usize) -> Result<DerivativeBiasCheck> {
    let derived = block_derive(h, r)?;
    let bias_h = bias_exact(&h.body().tabulate()?).magnitude;
    let bias_h_prime = bias_exact(&derived.body().tabulate()?).magnitude;
    let exp = 1i32.checked_shl(r as u32).unwrap_or(i32::MAX);
    Ok(DerivativeBiasCheck {
        bias_h,
        bias_h_prime,
        holds: bias_h_prime >= bias_h.powi(exp) - 1e-9,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JointMode {
    Exhaustive,
    Sampled { samples: usize, seed: u64 },
}

/// Index sets `I` with `1 <= |I| <= delta`, by size then lexicographically.
pub(crate) fn subsets_up_to(k: usize, delta: usize) -> Vec<u64> {
    let mut out = Vec::new();
    for size in 1..=delta.min(k) {
        let mut by_size: Vec<u64> = (0u64..(1 << k))
            .filter(|m| m.count_ones() as usize == size)
            .collect();
        by_size.sort_by_key(|&m| (0..k).filter(|&b| m >> b & 1 == 1).collect::<Vec<_>>());
        out.extend(by_size);
    }
    out
}

/// Statistical distance between the law of `(g_i(x + Y_I))` over uniform
/// directions `Y_1..Y_k` (with `1 <= |I| <= Delta(g_i)`) and the uniform
/// law on the same number of coordinates.
pub fn joint_dist_distance(g: &Factor, x: &Point, k: usize, mode: JointMode) -> Result<f64> {
    if g.is_empty() {
        return Ok(0.0);
    }
    let f = g.field();
    let space = Space::new(f, g.n())?;
    if x.len() != g.n() {
        return Err(Error::ArityMismatch {
            left: g.n(),
            right: x.len(),
        });
    }
    let x_idx = x.index(&space);
    let tables: Vec<FunctionTable> = g
        .polys()
        .iter()
        .map(|q| q.tabulate())
        .collect::<Result<_>>()?;
    let slots: Vec<(usize, u64)> = (0..g.len())
        .flat_map(|i| {
            subsets_up_to(k, g.delta(i))
                .into_iter()
                .map(move |m| (i, m))
        })
        .collect();
    let dim = slots.len();
    let mut counts: HashMap<Vec<u8>, u64> = HashMap::new();
    let mut sums = vec![0usize; 1 << k];
    let mut observe = |dirs: &[usize], counts: &mut HashMap<Vec<u8>, u64>| {
        for mask in 1usize..(1 << k) {
            let low = mask.trailing_zeros() as usize;
            sums[mask] = space.add(sums[mask & (mask - 1)], dirs[low]);
        }
        let key: Vec<u8> = slots
            .iter()
            .map(|&(i, m)| tables[i].values()[space.add(x_idx, sums[m as usize])])
            .collect();
        *counts.entry(key).or_insert(0) += 1;
    };
    let total = match mode {
        JointMode::Exhaustive => {
            let total = budget::check_table(f.modulus(), k * g.n())?;
            let mut dirs = vec![0usize; k];
            for big in 0..total {
                let mut rest = big;
                for d in dirs.iter_mut() {
                    *d = rest % space.size();
                    rest /= space.size();
                }
                observe(&dirs, &mut counts);
            }
            total as u64
        }
        JointMode::Sampled { samples, seed } => {
            if samples == 0 {
                return Err(Error::Precondition(
                    "sampled mode needs at least one sample".into(),
                ));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut dirs = vec![0usize; k];
            for _ in 0..samples {
                for d in dirs.iter_mut() {
                    *d = rng.gen_range(0..space.size());
                }
                observe(&dirs, &mut counts);
            }
            samples as u64
        }
    };
    let uniform = (f.modulus() as f64).powi(-(dim as i32));
    let mut dist = 0.0;
    let mut covered = 0.0;
    for &c in counts.values() {
        dist += (c as f64 / total as f64 - uniform).abs();
        covered += uniform;
    }
    // Every value outside the support contributes its uniform mass.
    dist += (1.0 - covered).max(0.0);
    Ok(dist / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{parse_polynomial, Polynomial};
    use proptest::prelude::*;
    use rand::Rng;

    fn f(p: u64) -> FieldSpec {
        FieldSpec::new(p).unwrap()
    }

    fn table(s: &str, p: u64, n: usize) -> FunctionTable {
        parse_polynomial(s, f(p), n).unwrap().tabulate().unwrap()
    }

    #[test]
    fn bias_examples() {
        let zero = bias_exact(&table("0", 3, 2));
        assert!((zero.bias_value - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(bias_exact(&table("x0", 2, 1)).magnitude < 1e-12);
        let and = bias_exact(&table("x0*x1", 2, 2));
        assert!((and.bias_value.re - 0.5).abs() < 1e-12);
        assert_eq!(and.value_distribution, vec![0.75, 0.25]);
        assert_eq!(and.plurality_value.value(), 0);
    }

    #[test]
    fn spectrum_examples() {
        let s = character_spectrum(&table("0", 2, 3)).unwrap();
        assert!((s.coefficients()[0].re - 1.0).abs() < 1e-12);
        assert!(s.coefficients()[1..].iter().all(|c| c.norm() < 1e-12));
        let s = character_spectrum(&table("x0", 2, 1)).unwrap();
        assert!(s.coefficients()[0].norm() < 1e-12);
        assert!((s.coefficients()[1].re - 1.0).abs() < 1e-12);
        let s = character_spectrum(&table("2*x0 + x1", 5, 2)).unwrap();
        let alpha = Point::new(f(5), &[2, 1]);
        assert!((s.coefficient(&alpha).unwrap().re - 1.0).abs() < 1e-12);
        assert!(s.to_csv().starts_with("alpha_index,re,im\n0,"));
    }

    #[test]
    fn spectrum_matches_naive_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (p, n) = (3u64, 4usize);
        let f3 = f(p);
        let values: Vec<u8> = (0..81).map(|_| rng.gen_range(0..3)).collect();
        let t = FunctionTable::from_values(f3, n, values.clone()).unwrap();
        let s = character_spectrum(&t).unwrap();
        let space = t.space();
        let roots = roots_of_unity(p);
        for a in 0..space.size() {
            let naive: Complex64 = (0..space.size())
                .map(|x| {
                    let e = f3.sub(u64::from(values[x]), space.dot(a, x));
                    roots[e as usize]
                })
                .sum::<Complex64>()
                / space.size() as f64;
            assert!((naive - s.coefficients()[a]).norm() < 1e-12);
        }
    }

    #[test]
    fn estimate_examples() {
        let f2 = f(2);
        let e = bias_estimate(f2, 3, |_| f2.zero(), 17, 0).unwrap();
        assert_eq!(e.estimate, Complex64::new(1.0, 0.0));
        assert!((e.radius - hoeffding_radius(17)).abs() < 1e-15);
        let e = bias_estimate(f2, 3, |x| x.coord(0), 10_000, 2024).unwrap();
        assert!(e.estimate.norm() < 0.05);
        let f5 = f(5);
        let e = bias_estimate(f5, 2, |x| x.coord(1), 1, 5).unwrap();
        assert!((e.estimate.norm() - 1.0).abs() < 1e-12);
        assert!(bias_estimate(f2, 1, |_| f2.zero(), 0, 0).is_err());
    }

    #[test]
    fn derivative_bias_examples() {
        let c = BlockPolynomial::with_default_names(2, 1, parse_polynomial("1", f(2), 2).unwrap())
            .unwrap();
        let r = derivative_bias_check(&c, 1).unwrap();
        assert!(r.holds && (r.bias_h - 1.0).abs() < 1e-12 && (r.bias_h_prime - 1.0).abs() < 1e-12);
        let h =
            BlockPolynomial::with_default_names(2, 1, parse_polynomial("x0*x1", f(2), 2).unwrap())
                .unwrap();
        let r = derivative_bias_check(&h, 1).unwrap();
        // h' = x0 x1 + (x0+z0)(x1+z1) = x0 z1 + z0 x1 + z0 z1 on 16 points has 6 ones.
        assert!((r.bias_h - 0.5).abs() < 1e-12);
        assert!((r.bias_h_prime - 0.25).abs() < 1e-12);
        assert!(r.holds);
        let bal =
            BlockPolynomial::with_default_names(2, 1, parse_polynomial("x0", f(2), 2).unwrap())
                .unwrap();
        assert!(derivative_bias_check(&bal, 1).unwrap().holds);
    }

    #[test]
    fn derivative_bias_sweep_over_all_quadratics() {
        // Every polynomial of degree <= 2 over F_2 in 3 variables: 2^7 coefficient patterns.
        let f2 = f(2);
        let monos: Vec<Vec<u64>> = vec![
            vec![0, 0, 0],
            vec![1, 0, 0],
            vec![0, 1, 0],
            vec![0, 0, 1],
            vec![1, 1, 0],
            vec![1, 0, 1],
            vec![0, 1, 1],
        ];
        for pattern in 0u32..128 {
            let terms = monos
                .iter()
                .enumerate()
                .filter(|(i, _)| pattern >> i & 1 == 1)
                .map(|(_, m)| (m.clone(), 1u64))
                .collect::<Vec<_>>();
            let q = Polynomial::from_terms(f2, 3, terms);
            for (width, k) in [(3, 1), (1, 3)] {
                let h = BlockPolynomial::with_default_names(width, k, q.clone()).unwrap();
                for r in 1..=2.min(k) {
                    assert!(
                        derivative_bias_check(&h, r).unwrap().holds,
                        "{q} width {width} r {r}"
                    );
                }
            }
        }
    }

    fn factor(polys: &[&str], p: u64, n: usize, deltas: &[usize]) -> Factor {
        let polys = polys
            .iter()
            .map(|s| parse_polynomial(s, f(p), n).unwrap())
            .collect();
        Factor::with_deltas(f(p), n, polys, deltas.to_vec()).unwrap()
    }

    #[test]
    fn joint_distance_examples() {
        let lin = factor(&["x0", "x1"], 3, 2, &[1, 1]);
        let d = joint_dist_distance(&lin, &Point::new(f(3), &[1, 2]), 1, JointMode::Exhaustive)
            .unwrap();
        assert!(d.abs() < 1e-12);
        let empty = Factor::new(f(2), 2, vec![]).unwrap();
        assert_eq!(
            joint_dist_distance(&empty, &Point::zero(f(2), 2), 2, JointMode::Exhaustive).unwrap(),
            0.0
        );
    }

    #[test]
    fn joint_distance_matches_naive_count() {
        // G = {x0 x1}, Delta = 2, k = 2, x = 0: coordinates (g(Y1), g(Y2), g(Y1+Y2)).
        let g = factor(&["x0*x1"], 2, 2, &[2]);
        let x = Point::zero(f(2), 2);
        let got = joint_dist_distance(&g, &x, 2, JointMode::Exhaustive).unwrap();
        let and = |a: usize| (a & 1) * (a >> 1 & 1);
        let mut counts = [0u32; 8];
        for y1 in 0..4 {
            for y2 in 0..4 {
                counts[and(y1) | and(y2) << 1 | and(y1 ^ y2) << 2] += 1;
            }
        }
        let naive: f64 = counts
            .iter()
            .map(|&c| (c as f64 / 16.0 - 0.125).abs())
            .sum::<f64>()
            / 2.0;
        assert!((got - naive).abs() < 1e-12, "{got} vs {naive}");
        let sampled = joint_dist_distance(
            &g,
            &x,
            2,
            JointMode::Sampled {
                samples: 20_000,
                seed: 1,
            },
        )
        .unwrap();
        assert!((sampled - naive).abs() < 0.03);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn parseval_and_inversion(p in 2u64..=3, n in 1usize..=8, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let size = p.pow(n as u32) as usize;
            let values: Vec<u8> = (0..size).map(|_| rng.gen_range(0..p) as u8).collect();
            let t = FunctionTable::from_values(f(p), n, values.clone()).unwrap();
            let s = character_spectrum(&t).unwrap();
            prop_assert!((s.energy() - 1.0).abs() < 1e-9);
            prop_assert!((s.coefficients()[0] - bias_exact(&t).bias_value).norm() < 1e-12);
            let roots = roots_of_unity(p);
            for (rec, &v) in s.inverse().iter().zip(&values) {
                prop_assert!((rec - roots[v as usize]).norm() < 1e-9);
            }
        }
    }
}
