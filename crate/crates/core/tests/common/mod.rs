//! Brute-force oracles shared by the integration tests. None of them call
//! the library's algorithms; they only use the parser and raw evaluation.

#![allow(dead_code)]

use polylab::{FieldSpec, Polynomial};
use rand::Rng;

/// Random polynomial over `F_p` in `n` variables of total degree at most `d`.
pub fn random_poly(rng: &mut impl Rng, p: u64, n: usize, d: usize) -> Polynomial {
    let f = FieldSpec::new(p).unwrap();
    let terms = rng.gen_range(0..=10);
    let mut out = Vec::new();
    for _ in 0..terms {
        let mut exps = vec![0u64; n];
        let deg = rng.gen_range(0..=d);
        for _ in 0..deg {
            let i = rng.gen_range(0..n);
            if exps[i] + 1 < p {
                exps[i] += 1;
            }
        }
        out.push((exps, rng.gen_range(1..p)));
    }
    Polynomial::from_terms(f, n, out)
}

pub fn digits(mut idx: u64, p: u64, n: usize) -> Vec<u64> {
    (0..n)
        .map(|_| {
            let d = idx % p;
            idx /= p;
            d
        })
        .collect()
}

/// `|E_X w^{q(X)}|` by plain enumeration.
pub fn naive_bias(q: &Polynomial) -> f64 {
    let p = q.field().modulus();
    let n = q.n();
    let size = p.pow(n as u32);
    let (mut re, mut im) = (0.0f64, 0.0f64);
    for x in 0..size {
        let v = q.eval_raw(&digits(x, p, n));
        let ang = 2.0 * std::f64::consts::PI * v as f64 / p as f64;
        re += ang.cos();
        im += ang.sin();
    }
    (re * re + im * im).sqrt() / size as f64
}

/// `|E w^{G(X, Y_1..Y_d)}|` where `G` is the alternating sum of `q` over
/// the cube spanned by `Y_1..Y_d` at `X`, enumerating all `(d+1) n` inputs.
pub fn naive_gowers(q: &Polynomial, d: usize) -> f64 {
    let p = q.field().modulus();
    let n = q.n();
    let total = p.pow(((d + 1) * n) as u32);
    let (mut re, mut im) = (0.0f64, 0.0f64);
    for idx in 0..total {
        let all = digits(idx, p, (d + 1) * n);
        let x = &all[..n];
        let mut g = 0u64;
        for mask in 0u32..(1 << d) {
            let mut pt = x.to_vec();
            for t in 0..d {
                if mask >> t & 1 == 1 {
                    for j in 0..n {
                        pt[j] = (pt[j] + all[(t + 1) * n + j]) % p;
                    }
                }
            }
            let v = q.eval_raw(&pt);
            // Sign (-1)^{d - |S|}.
            g = if (d as u32 - mask.count_ones()).is_multiple_of(2) {
                (g + v) % p
            } else {
                (g + p - v) % p
            };
        }
        let ang = 2.0 * std::f64::consts::PI * g as f64 / p as f64;
        re += ang.cos();
        im += ang.sin();
    }
    (re * re + im * im).sqrt() / total as f64
}

/// Elementary symmetric polynomial of degree 4 over `F_2` as text.
pub fn symmetric4_text(n: usize) -> String {
    let mut terms = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                for d in c + 1..n {
                    terms.push(format!("x{a}*x{b}*x{c}*x{d}"));
                }
            }
        }
    }
    terms.join(" + ")
}

/// Exact 4-fold derivative bias of `S_4` over `F_2^n` for `n <= 6`, with
/// truth tables packed in one `u64`: for every `(Y_1..Y_4)` the derivative
/// is the XOR of 16 translates of the table of `S_4`.
pub fn packed_s4_gowers(n: usize) -> f64 {
    assert!(n <= 6);
    let size = 1usize << n;
    let s4 = |x: usize| {
        let w = x.count_ones() as u64;
        // C(w, 4) mod 2.
        (w * w.saturating_sub(1) * w.saturating_sub(2) * w.saturating_sub(3) / 24) & 1
    };
    let mask = if size == 64 {
        u64::MAX
    } else {
        (1u64 << size) - 1
    };
    let translate: Vec<u64> = (0..size)
        .map(|y| (0..size).fold(0u64, |acc, x| acc | s4(x ^ y) << x))
        .collect();
    let mut ones: u64 = 0;
    for y1 in 0..size {
        for y2 in 0..size {
            for y3 in 0..size {
                for y4 in 0..size {
                    let ys = [y1, y2, y3, y4];
                    let mut g = 0u64;
                    for m in 0..16usize {
                        let shift = (0..4).filter(|t| m >> t & 1 == 1).fold(0, |a, t| a ^ ys[t]);
                        g ^= translate[shift];
                    }
                    ones += u64::from((g & mask).count_ones());
                }
            }
        }
    }
    let total = (size as u64).pow(5);
    (total as f64 - 2.0 * ones as f64) / total as f64
}

/// Rank of a matrix over `F_p` by Gaussian elimination on plain vectors.
pub fn naive_rank(p: u64, rows: &[Vec<u64>]) -> usize {
    let mut m: Vec<Vec<u64>> = rows.to_vec();
    let cols = m.first().map_or(0, Vec::len);
    let inv = |a: u64| (1..p).find(|b| a * b % p == 1).unwrap();
    let mut r = 0;
    for c in 0..cols {
        let Some(piv) = (r..m.len()).find(|&i| m[i][c] != 0) else {
            continue;
        };
        m.swap(r, piv);
        let s = inv(m[r][c]);
        for v in m[r].iter_mut() {
            *v = *v * s % p;
        }
        for i in 0..m.len() {
            if i != r && m[i][c] != 0 {
                let k = m[i][c];
                let pivot = m[r].clone();
                for (v, &w) in m[i].iter_mut().zip(&pivot) {
                    *v = (*v + p * p - k * w) % p;
                }
            }
        }
        r += 1;
    }
    r
}

/// Exact `|E_{x,y} w^{x^T A y}|` and `|E_x w^{x^T A x}|`.
pub fn naive_forms_bias(p: u64, a: &[Vec<u64>]) -> (f64, f64) {
    let n = a.len();
    let size = p.pow(n as u32);
    let form = |x: &[u64], y: &[u64]| {
        let mut s = 0;
        for i in 0..n {
            for j in 0..n {
                s = (s + x[i] * a[i][j] % p * y[j]) % p;
            }
        }
        s
    };
    let mag = |vals: &mut dyn Iterator<Item = u64>, count: f64| {
        let (mut re, mut im) = (0.0f64, 0.0f64);
        for v in vals {
            let ang = 2.0 * std::f64::consts::PI * v as f64 / p as f64;
            re += ang.cos();
            im += ang.sin();
        }
        (re * re + im * im).sqrt() / count
    };
    let pts: Vec<Vec<u64>> = (0..size).map(|i| digits(i, p, n)).collect();
    let bil = mag(
        &mut pts.iter().flat_map(|x| pts.iter().map(move |y| form(x, y))),
        (size * size) as f64,
    );
    let quad = mag(&mut pts.iter().map(|x| form(x, x)), size as f64);
    (bil, quad)
}
