//! From bias to structure: majority-vote approximation, Fourier peeling,
//! derivative-restricted rank search and verified computation certificates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::budget;
use crate::derivative::derivative;
use crate::error::{Error, Result};
use crate::factor::{combinations, function_of_tables, Lookup};
use crate::field::{FieldElement, FieldSpec, Matrix};
use crate::poly::{parse_polynomial, FunctionTable, Point, Polynomial};
use crate::space::Space;
use crate::spectral::{bias_exact, character_spectrum};

/// Default closeness constant `eps_d = 2^{-2(d+1)}`.
pub fn default_epsilon(d: usize) -> f64 {
    0.5f64.powi(2 * (d as i32 + 1))
}

/// Exhaustive agreement is measured up to this many points; beyond it a
/// seeded sample of `AGREEMENT_SAMPLES` points is used.
pub const EXHAUSTIVE_AGREEMENT_LIMIT: usize = 1 << 16;
pub const AGREEMENT_SAMPLES: usize = 10_000;

/// Plurality of votes `beta - D_{a_j} q(x)` over fixed directions `a_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Approximator {
    pub shifts: Vec<Point>,
    pub beta: FieldElement,
    /// `D_{a_j} q` for every shift.
    pub derivatives: Vec<Polynomial>,
    pub measured_agreement: f64,
    pub exhaustive: bool,
}

/// Most frequent symbol, smallest on ties.
pub(crate) fn plurality(p: u64, votes: impl Iterator<Item = u64>) -> u64 {
    let mut counts = [0u32; 64];
    for v in votes {
        counts[v as usize] += 1;
    }
    (0..p as usize).fold(0, |best, b| if counts[b] > counts[best] { b } else { best }) as u64
}

impl Approximator {
    pub fn predict(&self, x: &[u64]) -> u64 {
        let f = self.beta.field();
        plurality(
            f.modulus(),
            self.derivatives
                .iter()
                .map(|h| f.sub(self.beta.value(), h.eval_raw(x))),
        )
    }

    /// The combiner `F(z_1..z_s) = plurality_j (beta - z_j)` as a lookup.
    pub fn combiner(&self) -> Result<Lookup> {
        let f = self.beta.field();
        let space = Space::new(f, self.shifts.len())?;
        let entries = (0..space.size())
            .map(|i| {
                plurality(
                    f.modulus(),
                    space
                        .digits(i)
                        .into_iter()
                        .map(|z| f.sub(self.beta.value(), z)),
                ) as u8
            })
            .collect();
        Lookup::from_entries(f, self.shifts.len(), entries, Vec::new())
    }
}

/// Majority-vote approximator from `s` seeded random directions.
pub fn bv_approximator(q: &Polynomial, s: usize, seed: u64) -> Result<Approximator> {
    if s == 0 {
        return Err(Error::Precondition(
            "the approximator needs at least one direction".into(),
        ));
    }
    let f = q.field();
    let table = q.tabulate()?;
    let report = bias_exact(&table);
    if report.magnitude < 1e-12 {
        return Err(Error::Precondition(
            "q has zero bias, so no value is a plurality and votes carry no signal".into(),
        ));
    }
    let beta = report.plurality_value;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shifts: Vec<Point> = (0..s)
        .map(|_| {
            let coords: Vec<u64> = (0..q.n()).map(|_| rng.gen_range(0..f.modulus())).collect();
            Point::new(f, &coords)
        })
        .collect();
    let space = table.space();
    let mut approx = Approximator {
        derivatives: shifts
            .iter()
            .map(|a| derivative(q, a))
            .collect::<Result<_>>()?,
        shifts,
        beta,
        measured_agreement: 0.0,
        exhaustive: space.size() <= EXHAUSTIVE_AGREEMENT_LIMIT,
    };
    // Votes read q(x + a) - q(x) straight from the table.
    let shift_idx: Vec<usize> = approx.shifts.iter().map(|a| a.index(&space)).collect();
    let vote_at = |x: usize| {
        let qx = u64::from(table.values()[x]);
        plurality(
            f.modulus(),
            shift_idx.iter().map(|&a| {
                let d = f.sub(u64::from(table.values()[space.add(x, a)]), qx);
                f.sub(beta.value(), d)
            }),
        ) == qx
    };
    approx.measured_agreement = if approx.exhaustive {
        (0..space.size()).filter(|&x| vote_at(x)).count() as f64 / space.size() as f64
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        (0..AGREEMENT_SAMPLES)
            .filter(|_| vote_at(rng.gen_range(0..space.size())))
            .count() as f64
            / AGREEMENT_SAMPLES as f64
    };
    Ok(approx)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeelResult {
    pub alphas: Vec<u64>,
    /// `|bias(q - sum alpha_i g_i)|` for the chosen `alpha`.
    pub peeled_bias: f64,
    /// `|bias(q - F(g_1..g_c))|`.
    pub approximation_bias: f64,
}

fn check_compatible(q: &Polynomial, gs: &[Polynomial]) -> Result<()> {
    for g in gs {
        q.field().ensure_same(g.field())?;
        if g.n() != q.n() {
            return Err(Error::ArityMismatch {
                left: q.n(),
                right: g.n(),
            });
        }
    }
    Ok(())
}

fn linear_combination(q: &Polynomial, gs: &[Polynomial], alphas: &[u64]) -> Result<Polynomial> {
    let f = q.field();
    let mut out = q.clone();
    for (g, &a) in gs.iter().zip(alphas) {
        if a != 0 {
            out = out.try_sub(&g.scale(f.element(a))?)?;
        }
    }
    Ok(out)
}

/// Picks the character `alpha` of `w^{F}` on `F^c` whose linear part
/// `sum alpha_i g_i` best correlates with `q`.
pub fn fourier_peel(lookup: &Lookup, gs: &[Polynomial], q: &Polynomial) -> Result<PeelResult> {
    check_compatible(q, gs)?;
    if lookup.arity() != gs.len() {
        return Err(Error::ArityMismatch {
            left: gs.len(),
            right: lookup.arity(),
        });
    }
    let f = q.field();
    let c = gs.len();
    let outer = FunctionTable::from_values(f, c, lookup.entries().to_vec())?;
    let spectrum = character_spectrum(&outer)?;
    let q_table = q.tabulate()?;
    let g_tables: Vec<FunctionTable> =
        gs.iter().map(Polynomial::tabulate).collect::<Result<_>>()?;
    let composed: Vec<u8> = (0..q_table.len())
        .map(|x| {
            let args: Vec<u64> = g_tables.iter().map(|t| u64::from(t.values()[x])).collect();
            lookup.eval(&args) as u8
        })
        .collect();
    let diff = q_table.try_sub(&FunctionTable::from_values(f, q.n(), composed)?)?;
    let approximation_bias = bias_exact(&diff).magnitude;

    let cells = Space::new(f, c)?;
    let mut best: Option<(Vec<u64>, f64)> = None;
    // alpha_1 is the most significant coordinate of the lexicographic scan.
    for rank in 0..cells.size() {
        let mut alphas = cells.digits(rank);
        alphas.reverse();
        let idx = cells.encode(&alphas);
        if spectrum.coefficients()[idx].norm() < 1e-12 {
            continue;
        }
        let mut vals = q_table.values().to_vec();
        for (t, &a) in g_tables.iter().zip(&alphas) {
            if a != 0 {
                for (v, &g) in vals.iter_mut().zip(t.values()) {
                    *v = f.sub(u64::from(*v), f.mul(a, u64::from(g))) as u8;
                }
            }
        }
        let b = bias_exact(&FunctionTable::from_values(f, q.n(), vals)?).magnitude;
        if best.as_ref().is_none_or(|(_, bb)| b > bb + 1e-12) {
            best = Some((alphas, b));
        }
    }
    let (alphas, peeled_bias) = best.unwrap_or((vec![0; c], bias_exact(&q_table).magnitude));
    Ok(PeelResult {
        alphas,
        peeled_bias,
        approximation_bias,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentKind {
    /// `base(X + shift) - base(X)`.
    Derivative,
    /// `base(X + shift)`.
    ShiftedG,
}

impl ComponentKind {
    fn as_str(self) -> &'static str {
        match self {
            ComponentKind::Derivative => "derivative",
            ComponentKind::ShiftedG => "shifted_g",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertificateComponent {
    pub kind: ComponentKind,
    pub shift: Point,
    pub base: Polynomial,
    pub g_index: Option<usize>,
}

impl CertificateComponent {
    pub fn poly(&self) -> Result<Polynomial> {
        match self.kind {
            ComponentKind::Derivative => derivative(&self.base, &self.shift),
            ComponentKind::ShiftedG => self.base.shift(&self.shift),
        }
    }
}

/// `q = F'(h_1(X), .., h_c(X))` with the `h_j` listed as components.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComputationCertificate {
    pub field: FieldSpec,
    pub n: usize,
    pub components: Vec<CertificateComponent>,
    pub lookup: Lookup,
    pub verified: bool,
}

impl ComputationCertificate {
    pub fn size(&self) -> usize {
        self.components.len()
    }

    pub fn to_json(&self) -> Value {
        let components: Vec<Value> = self
            .components
            .iter()
            .map(|c| {
                let mut v = json!({
                    "kind": c.kind.as_str(),
                    "shift": c.shift.coords(),
                    "base": c.base.to_string(),
                });
                if let Some(i) = c.g_index {
                    v["g_index"] = json!(i);
                }
                v
            })
            .collect();
        json!({
            "field": self.field.modulus(),
            "n": self.n,
            "components": components,
            "lookup": {
                "arity": self.lookup.arity(),
                "entries": self.lookup.entries(),
                "empty": self.lookup.empty(),
            },
            "verified": self.verified,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad =
            |what: &str| Error::Invalid(format!("certificate: missing or malformed '{what}'"));
        let field = FieldSpec::new(v["field"].as_u64().ok_or_else(|| bad("field"))?)?;
        let n = v["n"].as_u64().ok_or_else(|| bad("n"))? as usize;
        let mut components = Vec::new();
        for c in v["components"]
            .as_array()
            .ok_or_else(|| bad("components"))?
        {
            let kind = match c["kind"].as_str() {
                Some("derivative") => ComponentKind::Derivative,
                Some("shifted_g") => ComponentKind::ShiftedG,
                _ => return Err(bad("kind")),
            };
            let shift: Vec<u64> = c["shift"]
                .as_array()
                .ok_or_else(|| bad("shift"))?
                .iter()
                .map(|s| s.as_u64().ok_or_else(|| bad("shift")))
                .collect::<Result<_>>()?;
            if shift.len() != n || shift.iter().any(|&s| s >= field.modulus()) {
                return Err(bad("shift"));
            }
            let base = parse_polynomial(c["base"].as_str().ok_or_else(|| bad("base"))?, field, n)?;
            components.push(CertificateComponent {
                kind,
                shift: Point::new(field, &shift),
                base,
                g_index: c["g_index"].as_u64().map(|i| i as usize),
            });
        }
        let lk = &v["lookup"];
        let arity = lk["arity"].as_u64().ok_or_else(|| bad("lookup.arity"))? as usize;
        let to_vec = |key: &str| -> Result<Vec<u64>> {
            lk[key]
                .as_array()
                .ok_or_else(|| bad(key))?
                .iter()
                .map(|e| e.as_u64().ok_or_else(|| bad(key)))
                .collect()
        };
        let entries = to_vec("entries")?
            .into_iter()
            .map(|e| e.min(255) as u8)
            .collect();
        let empty = to_vec("empty")?.into_iter().map(|e| e as usize).collect();
        Ok(ComputationCertificate {
            field,
            n,
            components,
            lookup: Lookup::from_entries(field, arity, entries, empty)?,
            verified: v["verified"].as_bool().unwrap_or(false),
        })
    }
}

/// Exhaustive check that the lookup of the components reproduces `q`.
pub fn verify_certificate(cert: &ComputationCertificate, q: &Polynomial) -> Result<bool> {
    if cert.field != q.field() || cert.n != q.n() || cert.lookup.arity() != cert.components.len() {
        return Ok(false);
    }
    let q_table = q.tabulate()?;
    let tables: Vec<FunctionTable> = cert
        .components
        .iter()
        .map(|c| c.poly()?.tabulate())
        .collect::<Result<_>>()?;
    let mut args = vec![0u64; tables.len()];
    for (x, &want) in q_table.values().iter().enumerate() {
        for (a, t) in args.iter_mut().zip(&tables) {
            *a = u64::from(t.values()[x]);
        }
        if cert.lookup.eval(&args) != u64::from(want) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankSearch {
    pub certificate: Option<ComputationCertificate>,
    pub c_max: usize,
    pub directions: usize,
    /// Distinct nonconstant derivatives after identifying `h` with `h + c`.
    pub distinct_derivatives: usize,
    pub subsets_checked: u64,
    /// `q` is not a function of the whole derivative pool, so no subset can work.
    pub pool_insufficient: bool,
}

/// Searches subsets of `{D_a q : a in pool}` by size, then lexicographically,
/// for the first one through which `q` factors.
pub fn rank_via_derivatives(q: &Polynomial, c_max: usize, pool: &[Point]) -> Result<RankSearch> {
    let f = q.field();
    let q_table = q.tabulate()?;
    let mut search = RankSearch {
        certificate: None,
        c_max,
        directions: pool.len(),
        distinct_derivatives: 0,
        subsets_checked: 0,
        pool_insufficient: false,
    };
    if q.degree() == 0 {
        search.certificate = Some(ComputationCertificate {
            field: f,
            n: q.n(),
            components: Vec::new(),
            lookup: Lookup::constant(f, q.constant_term()),
            verified: true,
        });
        return Ok(search);
    }
    let mut derivs: Vec<(Point, FunctionTable)> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for a in pool {
        let h = derivative(q, a)?;
        if h.degree() == 0 {
            continue;
        }
        let key = h.try_sub(&Polynomial::constant(f, q.n(), h.constant_term()))?;
        if seen.insert(key) {
            derivs.push((a.clone(), h.tabulate()?));
        }
    }
    search.distinct_derivatives = derivs.len();
    let all: Vec<&[u8]> = derivs.iter().map(|(_, t)| t.values()).collect();
    if !crate::factor::determined_by(f.modulus(), q_table.values(), &all) {
        search.pool_insufficient = true;
        return Ok(search);
    }
    for c in 1..=c_max.min(derivs.len()) {
        for combo in combinations(derivs.len(), c) {
            search.subsets_checked += 1;
            let inputs: Vec<&[u8]> = combo.iter().map(|&k| derivs[k].1.values()).collect();
            if let Ok(lookup) = function_of_tables(f, q_table.values(), &inputs)? {
                let cert = ComputationCertificate {
                    field: f,
                    n: q.n(),
                    components: combo
                        .iter()
                        .map(|&k| CertificateComponent {
                            kind: ComponentKind::Derivative,
                            shift: derivs[k].0.clone(),
                            base: q.clone(),
                            g_index: None,
                        })
                        .collect(),
                    lookup,
                    verified: false,
                };
                return finish(search, cert, q);
            }
        }
    }
    Ok(search)
}

fn finish(
    mut search: RankSearch,
    mut cert: ComputationCertificate,
    q: &Polynomial,
) -> Result<RankSearch> {
    if !verify_certificate(&cert, q)? {
        return Err(Error::Internal(
            "rank certificate failed verification".into(),
        ));
    }
    cert.verified = true;
    search.certificate = Some(cert);
    Ok(search)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AvgToWorst {
    pub peel: PeelResult,
    /// `q - sum alpha_i g_i`.
    pub residual: Polynomial,
    pub rank: RankSearch,
    pub certificate: Option<ComputationCertificate>,
}

/// Peels the best character, certifies the residual by derivatives and
/// merges both into a certificate for `q`.
pub fn avg_to_worst(
    q: &Polynomial,
    gs: &[Polynomial],
    lookup: &Lookup,
    c_max: usize,
    pool: &[Point],
) -> Result<AvgToWorst> {
    let peel = fourier_peel(lookup, gs, q)?;
    let residual = linear_combination(q, gs, &peel.alphas)?;
    let rank = rank_via_derivatives(&residual, c_max, pool)?;
    let certificate = match &rank.certificate {
        None => None,
        Some(inner) => Some(merge_certificate(q, gs, &peel.alphas, inner)?),
    };
    Ok(AvgToWorst {
        peel,
        residual,
        rank,
        certificate,
    })
}

fn merge_certificate(
    q: &Polynomial,
    gs: &[Polynomial],
    alphas: &[u64],
    inner: &ComputationCertificate,
) -> Result<ComputationCertificate> {
    let f = q.field();
    let used: Vec<usize> = (0..gs.len()).filter(|&j| alphas[j] != 0).collect();
    let mut components = inner.components.clone();
    for &j in &used {
        components.push(CertificateComponent {
            kind: ComponentKind::ShiftedG,
            shift: Point::zero(f, q.n()),
            base: gs[j].clone(),
            g_index: Some(j),
        });
    }
    let c = inner.components.len();
    let arity = components.len();
    let cells = Space::new(f, arity)?;
    let entries = (0..cells.size())
        .map(|i| {
            let z = cells.digits(i);
            let linear = used
                .iter()
                .zip(&z[c..])
                .fold(0, |acc, (&j, &w)| f.add(acc, f.mul(alphas[j], w)));
            f.add(inner.lookup.eval(&z[..c]), linear) as u8
        })
        .collect();
    let mut cert = ComputationCertificate {
        field: f,
        n: q.n(),
        components,
        lookup: Lookup::from_entries(f, arity, entries, Vec::new())?,
        verified: false,
    };
    if !verify_certificate(&cert, q)? {
        return Err(Error::Internal(
            "merged certificate failed verification".into(),
        ));
    }
    cert.verified = true;
    Ok(cert)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DixonReport {
    /// `|E_{x,y} w^{x^T A y}|`.
    pub bias_mag: f64,
    pub rank_a: usize,
    pub rank_sym: usize,
    /// `bias_mag = p^{-rank A}` within `1e-9`.
    pub bilinear_law_holds: bool,
    /// `|E_x w^{x^T A x}|`.
    pub quadratic_bias: f64,
    /// Over `F_2`: `quadratic_bias` is 0 or `2^{-rank(A + A^T)/2}`; for odd
    /// `p` it equals `p^{-rank(A + A^T)/2}`.
    pub quadratic_law_holds: bool,
}

pub fn bilinear_dixon_check(a: &Matrix) -> Result<DixonReport> {
    if !a.is_square() {
        return Err(Error::Precondition(format!(
            "the quadratic phase needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let f = a.field();
    let p = f.modulus();
    let n = a.rows();
    budget::check_table(p, 2 * n)?;
    let space = Space::new(f, n)?;
    let roots = crate::spectral::roots_of_unity(p);
    let mut bilinear = num_complex::Complex64::new(0.0, 0.0);
    let mut quadratic = num_complex::Complex64::new(0.0, 0.0);
    for xi in 0..space.size() {
        let x = space.digits(xi);
        let xa: Vec<u64> = (0..n)
            .map(|j| (0..n).fold(0, |acc, i| f.add(acc, f.mul(x[i], a.get(i, j)))))
            .collect();
        // Linear form y -> (x^T A) y: E_y is 1 when it vanishes, else 0.
        if xa.iter().all(|&v| v == 0) {
            bilinear += 1.0;
        }
        let qx = (0..n).fold(0, |acc, j| f.add(acc, f.mul(xa[j], x[j])));
        quadratic += roots[qx as usize];
    }
    let size = space.size() as f64;
    let bias_mag = (bilinear / size).norm();
    let quadratic_bias = (quadratic / size).norm();
    let rank_a = a.rank();
    let rank_sym = a.symmetrized()?.rank();
    let pf = p as f64;
    let expected_quad = pf.powf(-(rank_sym as f64) / 2.0);
    let quadratic_law_holds = if p == 2 {
        quadratic_bias < 1e-9 || (quadratic_bias - expected_quad).abs() < 1e-9
    } else {
        (quadratic_bias - expected_quad).abs() < 1e-9
    };
    Ok(DixonReport {
        bias_mag,
        rank_a,
        rank_sym,
        bilinear_law_holds: (bias_mag - pf.powi(-(rank_a as i32))).abs() < 1e-9,
        quadratic_bias,
        quadratic_law_holds,
    })
}

/// Brute-force `|E_{x,y} w^{x^T A y}|`, the reference for [`bilinear_dixon_check`].
pub fn bilinear_bias_naive(a: &Matrix) -> Result<f64> {
    let f = a.field();
    let (r, c) = (a.rows(), a.cols());
    let xs = Space::new(f, r)?;
    let ys = Space::new(f, c)?;
    budget::check_table(f.modulus(), r + c)?;
    let roots = crate::spectral::roots_of_unity(f.modulus());
    let mut acc = num_complex::Complex64::new(0.0, 0.0);
    for xi in 0..xs.size() {
        let x = xs.digits(xi);
        for yi in 0..ys.size() {
            let y = ys.digits(yi);
            let mut v = 0;
            for (i, &xv) in x.iter().enumerate().take(r) {
                for (j, &yv) in y.iter().enumerate().take(c) {
                    v = f.add(v, f.mul(xv, f.mul(a.get(i, j), yv)));
                }
            }
            acc += roots[v as usize];
        }
    }
    Ok((acc / (xs.size() * ys.size()) as f64).norm())
}

/// A form on `d` blocks of width `n`, linear in each block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultilinearForm {
    field: FieldSpec,
    d: usize,
    n: usize,
    /// `(coordinate in each block, coefficient)`.
    terms: Vec<(Vec<usize>, u64)>,
}

impl MultilinearForm {
    pub fn new(
        field: FieldSpec,
        d: usize,
        n: usize,
        terms: Vec<(Vec<usize>, u64)>,
    ) -> Result<Self> {
        for (idx, _) in &terms {
            if idx.len() != d || idx.iter().any(|&j| j >= n) {
                return Err(Error::Invalid(
                    "multilinear term must pick one coordinate per block".into(),
                ));
            }
        }
        Ok(MultilinearForm { field, d, n, terms })
    }

    /// `x^T A y` as a two-block form.
    pub fn bilinear(a: &Matrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Precondition(
                "bilinear blocks must have equal width".into(),
            ));
        }
        let n = a.rows();
        let terms = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| a.get(i, j) != 0)
            .map(|(i, j)| (vec![i, j], a.get(i, j)))
            .collect();
        Self::new(a.field(), 2, n, terms)
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn blocks(&self) -> usize {
        self.d
    }

    pub fn width(&self) -> usize {
        self.n
    }

    /// Block `t`, coordinate `j` is variable `t*n + j`.
    pub fn to_polynomial(&self) -> Polynomial {
        let vars = self.d * self.n;
        Polynomial::from_terms(
            self.field,
            vars,
            self.terms.iter().map(|(idx, c)| {
                let mut e = vec![0u64; vars];
                for (t, &j) in idx.iter().enumerate() {
                    e[t * self.n + j] += 1;
                }
                (e, *c)
            }),
        )
    }

    /// `L` with block `t` fixed to `a`: a form on the remaining blocks,
    /// returned as a polynomial on all `d*n` variables.
    pub fn restrict(&self, t: usize, a: &[u64]) -> Polynomial {
        let f = self.field;
        let vars = self.d * self.n;
        Polynomial::from_terms(
            f,
            vars,
            self.terms.iter().map(|(idx, c)| {
                let mut e = vec![0u64; vars];
                for (b, &j) in idx.iter().enumerate() {
                    if b != t {
                        e[b * self.n + j] += 1;
                    }
                }
                (e, f.mul(*c, a[idx[t]]))
            }),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultilinearComponent {
    /// Block fixed by the restriction (0-based).
    pub block: usize,
    pub point: Point,
    pub poly: Polynomial,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultilinearRank {
    pub bias: f64,
    pub components: Option<Vec<MultilinearComponent>>,
    pub lookup: Option<Lookup>,
    pub pool_size: usize,
}

/// Bias of `L` and the smallest set (up to `c_max`) of one-block
/// restrictions `L(.., X_t := a, ..)` through which `L` factors.
pub fn multilinear_bias_rank(l: &MultilinearForm, c_max: usize) -> Result<MultilinearRank> {
    let f = l.field;
    let whole = l.to_polynomial();
    let table = whole.tabulate()?;
    let bias = bias_exact(&table).magnitude;
    let block_space = Space::new(f, l.n)?;
    let mut pool: Vec<MultilinearComponent> = Vec::new();
    let mut tables: Vec<FunctionTable> = Vec::new();
    for t in 0..l.d {
        for ai in 1..block_space.size() {
            let a = block_space.digits(ai);
            let poly = l.restrict(t, &a);
            if poly.degree() == 0 || pool.iter().any(|c| c.poly == poly) {
                continue;
            }
            tables.push(poly.tabulate()?);
            pool.push(MultilinearComponent {
                block: t,
                point: Point::new(f, &a),
                poly,
            });
        }
    }
    let mut out = MultilinearRank {
        bias,
        components: None,
        lookup: None,
        pool_size: pool.len(),
    };
    if whole.degree() == 0 {
        out.components = Some(Vec::new());
        out.lookup = Some(Lookup::constant(f, whole.constant_term()));
        return Ok(out);
    }
    for c in 1..=c_max.min(pool.len()) {
        for combo in combinations(pool.len(), c) {
            let inputs: Vec<&[u8]> = combo.iter().map(|&k| tables[k].values()).collect();
            if let Ok(lookup) = function_of_tables(f, table.values(), &inputs)? {
                out.components = Some(combo.iter().map(|&k| pool[k].clone()).collect());
                out.lookup = Some(lookup);
                return Ok(out);
            }
        }
    }
    Ok(out)
}
