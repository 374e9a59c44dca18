//! Factors, regions and strong-regularity refinement.
//!
//! A factor `G = {g_1..g_m}` splits `F_p^n` into the regions
//! `R_c = {x : g_i(x) = c_i}` for `c` in `F_p^m`. Each member carries a degree
//! bound `1 <= Delta(g_i) <= deg g_i` restricting which shifted copies
//! `g_i(X + Y_I)`, `|I| <= Delta(g_i)`, take part in linear combinations.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use crate::budget;
use crate::derivative::{derivative, direction_pool, DerivedMember};
use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::poly::PolySystem;
use crate::poly::{AffineForm, FunctionTable, Point, Polynomial};
use crate::space::Space;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factor {
    field: FieldSpec,
    n: usize,
    names: Vec<String>,
    polys: Vec<Polynomial>,
    deltas: Vec<usize>,
}

impl Factor {
    /// Degree bounds default to the degrees.
    pub fn new(field: FieldSpec, n: usize, polys: Vec<Polynomial>) -> Result<Self> {
        let deltas = polys.iter().map(Polynomial::degree).collect();
        Self::with_deltas(field, n, polys, deltas)
    }

    pub fn with_deltas(
        field: FieldSpec,
        n: usize,
        polys: Vec<Polynomial>,
        deltas: Vec<usize>,
    ) -> Result<Self> {
        let names = (1..=polys.len()).map(|i| format!("g{i}")).collect();
        Self::named(field, n, names, polys, deltas)
    }

    pub fn named(
        field: FieldSpec,
        n: usize,
        names: Vec<String>,
        polys: Vec<Polynomial>,
        deltas: Vec<usize>,
    ) -> Result<Self> {
        if names.len() != polys.len() || deltas.len() != polys.len() {
            return Err(Error::Invalid(
                "names, polynomials and degree bounds differ in length".into(),
            ));
        }
        for ((name, q), &d) in names.iter().zip(&polys).zip(&deltas) {
            field.ensure_same(q.field())?;
            if q.n() != n {
                return Err(Error::ArityMismatch {
                    left: n,
                    right: q.n(),
                });
            }
            if q.degree() == 0 {
                return Err(Error::Invalid(format!("factor member {name} is constant")));
            }
            if d < 1 || d > q.degree() {
                return Err(Error::Invalid(format!(
                    "degree bound {d} for {name} outside [1, {}]",
                    q.degree()
                )));
            }
        }
        Ok(Factor {
            field,
            n,
            names,
            polys,
            deltas,
        })
    }

    /// Every polynomial of the file, with `delta` lines overriding the degree default.
    pub fn from_system(sys: &PolySystem) -> Result<Self> {
        let names = sys.polys.iter().map(|(k, _)| k.clone()).collect();
        let polys: Vec<Polynomial> = sys.polys.iter().map(|(_, q)| q.clone()).collect();
        let deltas = sys
            .polys
            .iter()
            .map(|(k, q)| sys.delta(k).unwrap_or(q.degree()))
            .collect();
        Self::named(sys.field, sys.n, names, polys, deltas)
    }

    pub fn to_system(&self) -> PolySystem {
        PolySystem {
            field: self.field,
            n: self.n,
            polys: self
                .names
                .iter()
                .cloned()
                .zip(self.polys.iter().cloned())
                .collect(),
            deltas: self
                .names
                .iter()
                .cloned()
                .zip(self.deltas.iter().copied())
                .collect(),
        }
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }

    /// Number of members `m`.
    pub fn dimension(&self) -> usize {
        self.polys.len()
    }

    /// Largest member degree.
    pub fn order(&self) -> usize {
        self.polys.iter().map(Polynomial::degree).max().unwrap_or(0)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn polys(&self) -> &[Polynomial] {
        &self.polys
    }

    pub fn delta(&self, i: usize) -> usize {
        self.deltas[i]
    }

    pub fn deltas(&self) -> &[usize] {
        &self.deltas
    }

    pub fn tables(&self) -> Result<Vec<FunctionTable>> {
        self.polys.iter().map(Polynomial::tabulate).collect()
    }
}

/// A function `F_p^arity -> F_p` stored densely, arguments little-endian.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lookup {
    field: FieldSpec,
    arity: usize,
    entries: Vec<u8>,
    empty: Vec<usize>,
}

impl Lookup {
    pub fn constant(field: FieldSpec, c: u64) -> Self {
        Lookup {
            field,
            arity: 0,
            entries: vec![field.reduce(c) as u8],
            empty: Vec::new(),
        }
    }

    pub fn from_entries(
        field: FieldSpec,
        arity: usize,
        entries: Vec<u8>,
        empty: Vec<usize>,
    ) -> Result<Self> {
        if entries.len() as u64 != budget::saturating_pow(field.modulus(), arity) {
            return Err(Error::Invalid(format!(
                "lookup of arity {arity} has {} entries",
                entries.len()
            )));
        }
        if entries.iter().any(|&v| u64::from(v) >= field.modulus())
            || empty.iter().any(|&i| i >= entries.len())
        {
            return Err(Error::Invalid("lookup entry out of range".into()));
        }
        Ok(Lookup {
            field,
            arity,
            entries,
            empty,
        })
    }

    /// `z_1 + .. + z_k` as a lookup of arity `k`.
    pub fn sum(field: FieldSpec, arity: usize) -> Result<Self> {
        let space = Space::new(field, arity)?;
        let entries = (0..space.size())
            .map(|i| {
                space
                    .digits(i)
                    .into_iter()
                    .fold(0, |acc, d| field.add(acc, d)) as u8
            })
            .collect();
        Self::from_entries(field, arity, entries, Vec::new())
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn entries(&self) -> &[u8] {
        &self.entries
    }

    /// Argument indices never observed when the lookup was built; they hold 0.
    pub fn empty(&self) -> &[usize] {
        &self.empty
    }

    pub fn index_of(&self, args: &[u64]) -> usize {
        let p = self.field.modulus() as usize;
        args.iter().rev().fold(0, |acc, &a| acc * p + a as usize)
    }

    pub fn eval(&self, args: &[u64]) -> u64 {
        u64::from(self.entries[self.index_of(args)])
    }

    /// Copy with one entry replaced.
    pub fn with_entry(&self, idx: usize, value: u64) -> Lookup {
        let mut out = self.clone();
        out.entries[idx] = self.field.reduce(value) as u8;
        out
    }
}

/// Two points in the same cell with different target values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Conflict {
    pub region: usize,
    pub first: usize,
    pub second: usize,
}

const UNSET: u8 = u8::MAX;

/// Whether `target` factors through `inputs`, returning the lookup if so.
pub(crate) fn function_of_tables(
    field: FieldSpec,
    target: &[u8],
    inputs: &[&[u8]],
) -> Result<std::result::Result<Lookup, Conflict>> {
    let p = field.modulus() as usize;
    let cells = budget::check_table(field.modulus(), inputs.len())?;
    let mut entries = vec![UNSET; cells];
    let mut first_seen = vec![0usize; cells];
    for (x, &v) in target.iter().enumerate() {
        let region = inputs
            .iter()
            .rev()
            .fold(0, |acc, t| acc * p + t[x] as usize);
        match entries[region] {
            UNSET => {
                entries[region] = v;
                first_seen[region] = x;
            }
            seen if seen != v => {
                return Ok(Err(Conflict {
                    region,
                    first: first_seen[region],
                    second: x,
                }))
            }
            _ => {}
        }
    }
    let empty: Vec<usize> = (0..cells).filter(|&c| entries[c] == UNSET).collect();
    for &c in &empty {
        entries[c] = 0;
    }
    Ok(Ok(Lookup {
        field,
        arity: inputs.len(),
        entries,
        empty,
    }))
}

/// Whether `target` is constant on every cell of `inputs`.
pub(crate) fn determined_by(p: u64, target: &[u8], inputs: &[&[u8]]) -> bool {
    if budget::saturating_pow(p, inputs.len()) <= 1 << 20 {
        let p = p as usize;
        let mut entries = vec![UNSET; p.pow(inputs.len() as u32)];
        for (x, &v) in target.iter().enumerate() {
            let region = inputs
                .iter()
                .rev()
                .fold(0, |acc, t| acc * p + t[x] as usize);
            if entries[region] == UNSET {
                entries[region] = v;
            } else if entries[region] != v {
                return false;
            }
        }
        return true;
    }
    let mut seen: HashMap<Vec<u8>, u8> = HashMap::new();
    for (x, &v) in target.iter().enumerate() {
        let key: Vec<u8> = inputs.iter().map(|t| t[x]).collect();
        if *seen.entry(key).or_insert(v) != v {
            return false;
        }
    }
    true
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionMap {
    field: FieldSpec,
    m: usize,
    counts: Vec<u64>,
}

impl RegionMap {
    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn dimension(&self) -> usize {
        self.m
    }

    /// Point counts indexed by `c` encoded little-endian (`c_1` least significant).
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn count(&self, c: &[u64]) -> u64 {
        let p = self.field.modulus();
        self.counts[c.iter().rev().fold(0, |acc, &v| acc * p + v) as usize]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn empty_regions(&self) -> usize {
        self.counts.iter().filter(|&&c| c == 0).count()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("region_index,count\n");
        for (i, c) in self.counts.iter().enumerate() {
            let _ = writeln!(out, "{i},{c}");
        }
        out
    }
}

pub fn region_decompose(g: &Factor) -> Result<RegionMap> {
    let f = g.field();
    let cells = budget::check_table(f.modulus(), g.len())?;
    let space = Space::new(f, g.n())?;
    let tables = g.tables()?;
    let p = f.modulus() as usize;
    let mut counts = vec![0u64; cells];
    for x in 0..space.size() {
        let region = tables
            .iter()
            .rev()
            .fold(0, |acc, t| acc * p + t.values()[x] as usize);
        counts[region] += 1;
    }
    Ok(RegionMap {
        field: f,
        m: g.len(),
        counts,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformityReport {
    /// `max_c | |R_c| p^{m-n} - 1 |`.
    pub max_rel_dev: f64,
    pub empty_regions: usize,
}

pub fn uniformity_report(g: &Factor) -> Result<UniformityReport> {
    let map = region_decompose(g)?;
    let expected = map.total() as f64 / map.counts.len() as f64;
    let max_rel_dev = map
        .counts
        .iter()
        .map(|&c| (c as f64 / expected - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(UniformityReport {
        max_rel_dev,
        empty_regions: map.empty_regions(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FunctionOf {
    Lookup(Lookup),
    /// `q` differs at two points of one region.
    Witness {
        region: Vec<u64>,
        first: Point,
        second: Point,
    },
}

impl FunctionOf {
    pub fn lookup(&self) -> Option<&Lookup> {
        match self {
            FunctionOf::Lookup(l) => Some(l),
            FunctionOf::Witness { .. } => None,
        }
    }
}

pub fn is_function_of(q: &Polynomial, g: &Factor) -> Result<FunctionOf> {
    g.field().ensure_same(q.field())?;
    if q.n() != g.n() {
        return Err(Error::ArityMismatch {
            left: g.n(),
            right: q.n(),
        });
    }
    let target = q.tabulate()?;
    let tables = g.tables()?;
    let inputs: Vec<&[u8]> = tables.iter().map(FunctionTable::values).collect();
    Ok(
        match function_of_tables(g.field(), target.values(), &inputs)? {
            Ok(lookup) => FunctionOf::Lookup(lookup),
            Err(conflict) => {
                let space = target.space();
                let cells = Space::new(g.field(), g.len())?;
                FunctionOf::Witness {
                    region: cells.digits(conflict.region),
                    first: Point::from_index(&space, conflict.first),
                    second: Point::from_index(&space, conflict.second),
                }
            }
        },
    )
}

/// Forms `x_j + sum_{b in mask} y_{b,j}` over blocks `X, Y_1..Y_r`.
fn shifted_forms(n: usize, mask: u64) -> Vec<AffineForm> {
    (0..n)
        .map(|j| {
            let mut form = AffineForm::var(j);
            for b in 0..64 {
                if mask >> b & 1 == 1 {
                    form.coeffs.push(((b + 1) * n + j, 1));
                }
            }
            form
        })
        .collect()
}

/// Checks `f(X + Y_[r]) = sum over proper I of (-1)^(r-|I|+1) f(X + Y_I)`
/// symbolically; requires `r > deg f`.
pub fn high_deriv_identity_check(f: &Polynomial, r: usize) -> Result<bool> {
    if r <= f.degree() {
        return Err(Error::Precondition(format!(
            "identity needs r > deg f = {}, got r = {r}",
            f.degree()
        )));
    }
    if r >= 63 {
        return Err(Error::Precondition(
            "r too large for symbolic expansion".into(),
        ));
    }
    let field = f.field();
    let n = f.n();
    let n_out = (r + 1) * n;
    let full = (1u64 << r) - 1;
    let lhs = f.substitute_affine(n_out, &shifted_forms(n, full))?;
    let mut rhs = Polynomial::zero(field, n_out);
    for mask in 0..full {
        let term = f.substitute_affine(n_out, &shifted_forms(n, mask))?;
        let exp = (r - mask.count_ones() as usize + 1) as u64;
        let sign = field.element(field.pow(field.minus_one(), exp));
        rhs = rhs.try_add(&term.scale(sign)?)?;
    }
    Ok(lhs == rhs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    /// Largest number of direction blocks `Y_1..Y_r` searched.
    pub r_max: usize,
    /// Largest number `l` of expressing polynomials.
    pub growth_budget: usize,
    /// Ceiling on expressibility checks; reaching it truncates the search.
    pub rank_budget: u64,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            r_max: 2,
            growth_budget: 2,
            rank_budget: 200_000,
            seed: 0,
        }
    }
}

/// `alpha * g_index(X + Y_I)` with `I` given as 1-based block numbers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CombinationTerm {
    pub index: usize,
    pub blocks: Vec<usize>,
    pub alpha: u64,
}

/// `h(X + Y_I)` for `h = D_shift g_origin`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShiftedComponent {
    pub poly: Polynomial,
    pub origin: usize,
    pub shift: Point,
    pub blocks: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViolationWitness {
    pub r: usize,
    pub coefficients: Vec<CombinationTerm>,
    pub components: Vec<ShiftedComponent>,
    /// `H` with `a(X, Y) = H(h_1(X + Y_{I_1}), ..)`.
    pub lookup: Lookup,
}

fn blocks_of(mask: u64) -> Vec<usize> {
    (0..64)
        .filter(|b| mask >> b & 1 == 1)
        .map(|b| b + 1)
        .collect()
}

fn mask_of(blocks: &[usize]) -> u64 {
    blocks.iter().fold(0, |m, &b| m | 1 << (b - 1))
}

impl ViolationWitness {
    /// Indices of the members with a nonzero coefficient.
    pub fn participants(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self.coefficients.iter().map(|t| t.index).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Re-evaluates both sides over all of `F^{(r+1)n}`.
    pub fn replay(&self, g: &Factor) -> Result<bool> {
        let f = g.field();
        let space = Space::new(f, g.n())?;
        let size = budget::check_table(f.modulus(), (self.r + 1) * g.n())?;
        let mut a = vec![0u64; size];
        for term in &self.coefficients {
            let table = g.polys()[term.index].tabulate()?;
            let lifted = space.block_sum_table(
                self.r + 1,
                1 | mask_of(&term.blocks) << 1,
                table.values(),
            )?;
            for (acc, &v) in a.iter_mut().zip(&lifted) {
                *acc = f.add(*acc, f.mul(term.alpha, u64::from(v)));
            }
        }
        let mut comps = Vec::with_capacity(self.components.len());
        for c in &self.components {
            if derivative(&g.polys()[c.origin], &c.shift)? != c.poly {
                return Ok(false);
            }
            let table = c.poly.tabulate()?;
            comps.push(space.block_sum_table(
                self.r + 1,
                1 | mask_of(&c.blocks) << 1,
                table.values(),
            )?);
        }
        let mut args = vec![0u64; comps.len()];
        for (x, &want) in a.iter().enumerate() {
            for (arg, t) in args.iter_mut().zip(&comps) {
                *arg = u64::from(t[x]);
            }
            if self.lookup.eval(&args) != want {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchReport {
    pub witness: Option<ViolationWitness>,
    /// The search stopped at the check ceiling or the table budget.
    pub truncated: bool,
    /// Every `r` up to this value was searched completely.
    pub searched_up_to: Option<usize>,
    pub patterns_checked: u64,
    pub oracle_checks: u64,
}

struct Candidate {
    origin: usize,
    poly: Polynomial,
    shift: Point,
    mask: u64,
    table: Vec<u8>,
}

/// Distinct nonconstant derivatives of each member over the direction pool,
/// identified up to an additive constant.
fn derivative_pool(g: &Factor, seed: u64) -> Result<Vec<Vec<(Polynomial, Point, FunctionTable)>>> {
    let pool = direction_pool(g.field(), g.n(), seed)?;
    g.polys()
        .iter()
        .map(|q| {
            let mut seen = HashSet::new();
            let mut out = Vec::new();
            for a in &pool {
                let h = derivative(q, a)?;
                if h.degree() == 0 {
                    continue;
                }
                let key = h.try_sub(&Polynomial::constant(h.field(), h.n(), h.constant_term()))?;
                if seen.insert(key) {
                    let t = h.tabulate()?;
                    out.push((h, a.clone(), t));
                }
            }
            Ok(out)
        })
        .collect()
}

/// Subsets of `[r]` as masks, by size then lexicographically.
fn masks_up_to(r: usize, max: usize) -> Vec<u64> {
    let mut out = vec![0];
    out.extend(crate::spectral::subsets_up_to(r, max));
    out
}

/// Lexicographic `l`-subsets of `0..k`.
pub(crate) fn combinations(k: usize, l: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut next = if l <= k {
        Some((0..l).collect::<Vec<_>>())
    } else {
        None
    };
    std::iter::from_fn(move || {
        let cur = next.take()?;
        let mut succ = cur.clone();
        let mut i = l;
        while i > 0 {
            i -= 1;
            if succ[i] < k - l + i {
                succ[i] += 1;
                for j in i + 1..l {
                    succ[j] = succ[j - 1] + 1;
                }
                next = Some(succ);
                break;
            }
        }
        Some(cur)
    })
}

/// Searches for a nonzero combination `a(X, Y_1..Y_r)` of shifted members
/// that is a function of at most `growth_budget` shifted derivatives of
/// its participants.
pub fn violation_search(g: &Factor, cfg: &SearchConfig) -> Result<SearchReport> {
    let f = g.field();
    let p = f.modulus();
    let mut report = SearchReport {
        witness: None,
        truncated: false,
        searched_up_to: None,
        patterns_checked: 0,
        oracle_checks: 0,
    };
    if g.is_empty() {
        report.searched_up_to = Some(cfg.r_max);
        return Ok(report);
    }
    let space = Space::new(f, g.n())?;
    let tables = g.tables()?;
    let ders = derivative_pool(g, cfg.seed)?;
    for r in 0..=cfg.r_max {
        let size = match budget::check_table(p, (r + 1) * g.n()) {
            Ok(size) => size,
            Err(e) if e.is_budget() => {
                report.truncated = true;
                return Ok(report);
            }
            Err(e) => return Err(e),
        };
        let slots: Vec<(usize, u64)> = (0..g.len())
            .flat_map(|i| masks_up_to(r, g.delta(i)).into_iter().map(move |m| (i, m)))
            .collect();
        let slot_tables: Vec<Vec<u8>> = slots
            .iter()
            .map(|&(i, m)| space.block_sum_table(r + 1, 1 | m << 1, tables[i].values()))
            .collect::<Result<_>>()?;
        let mut candidates: Vec<Candidate> = Vec::new();
        if cfg.growth_budget > 0 {
            let mut seen: HashSet<Vec<u8>> = HashSet::new();
            for (origin, list) in ders.iter().enumerate() {
                for (h, a, t) in list {
                    for mask in 0..(1u64 << r) {
                        let table = space.block_sum_table(r + 1, 1 | mask << 1, t.values())?;
                        if seen.insert(table.clone()) {
                            candidates.push(Candidate {
                                origin,
                                poly: h.clone(),
                                shift: a.clone(),
                                mask,
                                table,
                            });
                        }
                    }
                }
            }
        }
        let s = slots.len();
        let mut alpha = vec![0u64; s];
        let mut a = vec![0u8; size];
        loop {
            // Next pattern in lexicographic order whose leading nonzero is 1.
            let mut i = s;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                alpha[i] += 1;
                if alpha[i] < p {
                    break;
                }
                alpha[i] = 0;
            }
            if alpha.iter().all(|&v| v == 0) {
                break;
            }
            if alpha.iter().find(|&&v| v != 0) != Some(&1) {
                continue;
            }
            if report.oracle_checks >= cfg.rank_budget {
                report.truncated = true;
                return Ok(report);
            }
            report.patterns_checked += 1;
            a.iter_mut().for_each(|v| *v = 0);
            for (k, &c) in alpha.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                for (acc, &v) in a.iter_mut().zip(&slot_tables[k]) {
                    *acc = f.add(u64::from(*acc), f.mul(c, u64::from(v))) as u8;
                }
            }
            let participants: Vec<usize> = {
                let mut v: Vec<usize> = (0..s)
                    .filter(|&k| alpha[k] != 0)
                    .map(|k| slots[k].0)
                    .collect();
                v.dedup();
                v
            };
            let terms: Vec<CombinationTerm> = (0..s)
                .filter(|&k| alpha[k] != 0)
                .map(|k| CombinationTerm {
                    index: slots[k].0,
                    blocks: blocks_of(slots[k].1),
                    alpha: alpha[k],
                })
                .collect();
            report.oracle_checks += 1;
            if a.iter().all(|&v| v == a[0]) {
                report.witness = Some(ViolationWitness {
                    r,
                    coefficients: terms,
                    components: Vec::new(),
                    lookup: Lookup::constant(f, u64::from(a[0])),
                });
                return Ok(report);
            }
            let usable: Vec<&Candidate> = candidates
                .iter()
                .filter(|c| participants.contains(&c.origin))
                .collect();
            if usable.is_empty() {
                continue;
            }
            report.oracle_checks += 1;
            let all: Vec<&[u8]> = usable.iter().map(|c| c.table.as_slice()).collect();
            if !determined_by(p, &a, &all) {
                continue;
            }
            for l in 1..=cfg.growth_budget.min(usable.len()) {
                for combo in combinations(usable.len(), l) {
                    if report.oracle_checks >= cfg.rank_budget {
                        report.truncated = true;
                        return Ok(report);
                    }
                    report.oracle_checks += 1;
                    let inputs: Vec<&[u8]> =
                        combo.iter().map(|&k| usable[k].table.as_slice()).collect();
                    if !determined_by(p, &a, &inputs) {
                        continue;
                    }
                    let lookup = function_of_tables(f, &a, &inputs)?.map_err(|_| {
                        Error::Internal("expressibility check disagreed with lookup".into())
                    })?;
                    report.witness = Some(ViolationWitness {
                        r,
                        coefficients: terms,
                        components: combo
                            .iter()
                            .map(|&k| ShiftedComponent {
                                poly: usable[k].poly.clone(),
                                origin: usable[k].origin,
                                shift: usable[k].shift.clone(),
                                blocks: blocks_of(usable[k].mask),
                            })
                            .collect(),
                        lookup,
                    });
                    return Ok(report);
                }
            }
        }
        report.searched_up_to = Some(r);
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegularizeConfig {
    pub growth_budget: usize,
    pub iteration_cap: usize,
    pub r_max: usize,
    pub rank_budget: u64,
    pub seed: u64,
}

impl Default for RegularizeConfig {
    fn default() -> Self {
        RegularizeConfig {
            growth_budget: 2,
            iteration_cap: 32,
            r_max: 2,
            rank_budget: 200_000,
            seed: 0,
        }
    }
}

/// One refinement step. Members are identified by ids that stay stable
/// across removals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IterationRecord {
    pub witness_r: usize,
    /// `(id, degree, Delta)` before the step.
    pub before: Vec<(usize, usize, usize)>,
    pub lowered: usize,
    pub lowered_degree: usize,
    /// `None` when the member was removed.
    pub new_delta: Option<usize>,
    /// `(id, degree)` of members added by the step.
    pub added: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    NoViolation,
    SearchTruncated,
    IterationCap,
    /// Removing a member would have lost an input; the loop stops instead.
    RemovalBlocked,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Regularization {
    pub factor: Factor,
    pub ids: Vec<usize>,
    pub provenance: Vec<DerivedMember>,
    pub refined: bool,
    pub stop: StopReason,
    pub iterations: Vec<IterationRecord>,
    pub last_search: SearchReport,
}

#[derive(Clone)]
struct Member {
    id: usize,
    poly: Polynomial,
    delta: usize,
    prov: DerivedMember,
}

fn build_factor(field: FieldSpec, n: usize, members: &[Member]) -> Result<Factor> {
    Factor::named(
        field,
        n,
        members.iter().map(|m| format!("g{}", m.id)).collect(),
        members.iter().map(|m| m.poly.clone()).collect(),
        members.iter().map(|m| m.delta).collect(),
    )
}

fn same_up_to_constant(a: &Polynomial, b: &Polynomial) -> bool {
    a.try_sub(b).map(|d| d.degree() == 0).unwrap_or(false)
}

fn computes_all(inputs: &[Polynomial], g: &Factor) -> Result<bool> {
    for q in inputs {
        if is_function_of(q, g)?.lookup().is_none() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Refines `inputs` until no violation is found within the search
/// configuration or the iteration cap is reached. Every input is a function
/// of the returned factor.
pub fn regularize(inputs: &[Polynomial], cfg: &RegularizeConfig) -> Result<Regularization> {
    let Some(first) = inputs.first() else {
        return Err(Error::Invalid(
            "regularize needs at least one polynomial".into(),
        ));
    };
    let (field, n) = (first.field(), first.n());
    for q in inputs {
        field.ensure_same(q.field())?;
        if q.n() != n {
            return Err(Error::ArityMismatch {
                left: n,
                right: q.n(),
            });
        }
    }
    let mut next_id = 1;
    let mut members: Vec<Member> = Vec::new();
    for (origin, q) in inputs.iter().enumerate() {
        if q.degree() == 0 {
            continue;
        }
        members.push(Member {
            id: next_id,
            poly: q.clone(),
            delta: q.degree(),
            prov: DerivedMember {
                poly: q.clone(),
                origin,
                shifts: Vec::new(),
            },
        });
        next_id += 1;
    }
    let search = SearchConfig {
        r_max: cfg.r_max,
        growth_budget: cfg.growth_budget,
        rank_budget: cfg.rank_budget,
        seed: cfg.seed,
    };
    let mut iterations = Vec::new();
    let mut stop = StopReason::IterationCap;
    let mut last_search;
    let mut round = 0;
    loop {
        let factor = build_factor(field, n, &members)?;
        last_search = violation_search(&factor, &search)?;
        let Some(w) = last_search.witness.clone() else {
            stop = if last_search.truncated {
                StopReason::SearchTruncated
            } else {
                StopReason::NoViolation
            };
            break;
        };
        if round == cfg.iteration_cap {
            break;
        }
        round += 1;
        let i0 = w
            .participants()
            .into_iter()
            .max_by_key(|&i| (members[i].poly.degree(), i))
            .expect("a witness has a nonzero coefficient");
        let i0_size = w
            .coefficients
            .iter()
            .filter(|t| t.index == i0)
            .map(|t| t.blocks.len())
            .max()
            .expect("i0 participates");
        let before = members
            .iter()
            .map(|m| (m.id, m.poly.degree(), m.delta))
            .collect();
        let lowered = members[i0].id;
        let lowered_degree = members[i0].poly.degree();

        let mut added = Vec::new();
        let mut next = members.clone();
        for c in &w.components {
            let h = &c.poly;
            if h.degree() == 0 || next.iter().any(|m| same_up_to_constant(&m.poly, h)) {
                continue;
            }
            let parent = &members[c.origin].prov;
            let mut shifts = parent.shifts.clone();
            shifts.push(c.shift.clone());
            next.push(Member {
                id: next_id,
                poly: h.clone(),
                delta: h.degree(),
                prov: DerivedMember {
                    poly: h.clone(),
                    origin: parent.origin,
                    shifts,
                },
            });
            added.push((next_id, h.degree()));
            next_id += 1;
        }
        let new_delta = if i0_size == 0 {
            None
        } else {
            Some(i0_size - 1).filter(|&d| d > 0)
        };
        match new_delta {
            Some(d) => next[i0].delta = d,
            None => {
                next.remove(i0);
                if !computes_all(inputs, &build_factor(field, n, &next)?)? {
                    stop = StopReason::RemovalBlocked;
                    break;
                }
            }
        }
        members = next;
        iterations.push(IterationRecord {
            witness_r: w.r,
            before,
            lowered,
            lowered_degree,
            new_delta,
            added,
        });
    }
    let factor = build_factor(field, n, &members)?;
    if !computes_all(inputs, &factor)? {
        return Err(Error::Internal(
            "refinement lost an input polynomial".into(),
        ));
    }
    Ok(Regularization {
        factor,
        ids: members.iter().map(|m| m.id).collect(),
        provenance: members.into_iter().map(|m| m.prov).collect(),
        refined: stop == StopReason::NoViolation,
        stop,
        iterations,
        last_search,
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

    fn poly(s: &str, p: u64, n: usize) -> Polynomial {
        parse_polynomial(s, f(p), n).unwrap()
    }

    fn factor(polys: &[&str], p: u64, n: usize) -> Factor {
        Factor::new(f(p), n, polys.iter().map(|s| poly(s, p, n)).collect()).unwrap()
    }

    #[test]
    fn factor_validation() {
        assert!(Factor::new(f(2), 2, vec![poly("1", 2, 2)]).is_err());
        assert!(Factor::with_deltas(f(2), 2, vec![poly("x0*x1", 2, 2)], vec![3]).is_err());
        assert!(Factor::with_deltas(f(2), 2, vec![poly("x0*x1", 2, 2)], vec![0]).is_err());
        let g = factor(&["x0*x1", "x1"], 2, 2);
        assert_eq!((g.dimension(), g.order()), (2, 2));
        assert_eq!(Factor::from_system(&g.to_system()).unwrap(), g);
    }

    #[test]
    fn region_examples() {
        let g = factor(&["x0", "x1"], 2, 4);
        assert_eq!(region_decompose(&g).unwrap().counts(), &[4, 4, 4, 4]);
        let g = factor(&["x0*x1"], 2, 2);
        let map = region_decompose(&g).unwrap();
        assert_eq!(map.counts(), &[3, 1]);
        assert_eq!(map.to_csv(), "region_index,count\n0,3\n1,1\n");
        let empty = Factor::new(f(3), 2, vec![]).unwrap();
        assert_eq!(region_decompose(&empty).unwrap().counts(), &[9]);
    }

    #[test]
    fn uniformity_examples() {
        let r = uniformity_report(&factor(&["x0", "x1 + x2"], 3, 3)).unwrap();
        assert_eq!((r.max_rel_dev, r.empty_regions), (0.0, 0));
        for n in 2..=5 {
            let r = uniformity_report(&factor(&["x0*x1"], 2, n)).unwrap();
            assert!((r.max_rel_dev - 0.5).abs() < 1e-12);
        }
        let r = uniformity_report(&Factor::new(f(2), 3, vec![]).unwrap()).unwrap();
        assert_eq!(r.max_rel_dev, 0.0);
    }

    #[test]
    fn function_of_examples() {
        let g = factor(&["x0"], 3, 1);
        let l = is_function_of(&poly("x0 + 1", 3, 1), &g).unwrap();
        assert_eq!(l.lookup().unwrap().entries(), &[1, 2, 0]);

        let g = factor(&["x0"], 2, 2);
        match is_function_of(&poly("x1", 2, 2), &g).unwrap() {
            FunctionOf::Witness {
                region,
                first,
                second,
            } => {
                assert_eq!(region, vec![0]);
                assert_eq!(first.coords(), &[0, 0]);
                assert_eq!(second.coords(), &[0, 1]);
            }
            other => panic!("expected witness, got {other:?}"),
        }

        let g = factor(&["x0", "x1", "x2", "x3"], 2, 4);
        let q = poly("x0*x1 + x2*x3", 2, 4);
        let l = is_function_of(&q, &g).unwrap();
        let l = l.lookup().unwrap();
        for c in 0..16u64 {
            let z: Vec<u64> = (0..4).map(|i| c >> i & 1).collect();
            assert_eq!(l.eval(&z), q.eval_raw(&z));
        }
        assert!(l.empty().is_empty());
    }

    #[test]
    fn empty_regions_are_flagged() {
        // x0 and x0 + 1 never agree, so cells (0,0) and (1,1) are empty.
        let g = Factor::new(f(2), 1, vec![poly("x0", 2, 1), poly("x0 + 1", 2, 1)]).unwrap();
        let l = is_function_of(&poly("x0", 2, 1), &g).unwrap();
        assert_eq!(l.lookup().unwrap().empty(), &[0, 3]);
    }

    #[test]
    fn identity_examples() {
        assert!(high_deriv_identity_check(&poly("x0 + 2*x1", 3, 2), 2).unwrap());
        assert!(high_deriv_identity_check(&poly("x0*x1", 2, 2), 3).unwrap());
        assert!(high_deriv_identity_check(&poly("x0*x1", 2, 2), 2).is_err());
        assert!(high_deriv_identity_check(&poly("x0^2*x1 + x1", 3, 2), 4).unwrap());
    }

    #[test]
    fn combinations_are_lexicographic() {
        let all: Vec<Vec<usize>> = combinations(4, 2).collect();
        assert_eq!(
            all,
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
        assert_eq!(combinations(3, 0).count(), 1);
        assert_eq!(combinations(2, 3).count(), 0);
    }

    #[test]
    fn violation_search_examples() {
        let cfg = SearchConfig::default();
        let single = violation_search(&factor(&["x0"], 2, 2), &cfg).unwrap();
        assert!(single.witness.is_none());
        assert!(!single.truncated);
        assert_eq!(single.searched_up_to, Some(2));

        let g = factor(&["x0", "x0 + 1"], 2, 2);
        let rep = violation_search(&g, &cfg).unwrap();
        let w = rep.witness.unwrap();
        assert_eq!(w.r, 0);
        assert!(w.components.is_empty());
        assert_eq!(w.participants(), vec![0, 1]);
        assert!(w.replay(&g).unwrap());

        let none = SearchConfig {
            growth_budget: 0,
            ..cfg
        };
        let indep = violation_search(&factor(&["x0", "x1"], 3, 2), &none).unwrap();
        assert!(indep.witness.is_none());
    }

    #[test]
    fn violation_search_finds_expressible_quadratic_combinations() {
        // x0*x1 at r = 1: g(X + Y1) - g(X) = D_{Y1} g is bilinear in (X, Y1);
        // expressible through shifted derivatives x1, x0 of g.
        let g = factor(&["x0*x1"], 2, 2);
        let rep = violation_search(&g, &SearchConfig::default()).unwrap();
        let w = rep
            .witness
            .expect("a quadratic of rank 1 is not strongly regular");
        assert!(w.replay(&g).unwrap());
        assert!(w.components.len() <= 2);
        assert!(w.components.iter().all(|c| c.poly.degree() < 2));
    }

    #[test]
    fn truncation_is_reported() {
        let g = factor(&["x0*x1 + x2*x3"], 2, 4);
        let cfg = SearchConfig {
            rank_budget: 3,
            ..SearchConfig::default()
        };
        let rep = violation_search(&g, &cfg).unwrap();
        assert!(rep.truncated);
        assert!(rep.witness.is_none());
    }

    #[test]
    fn regularize_examples() {
        let cfg = RegularizeConfig::default();
        let one = regularize(&[poly("x0", 2, 2)], &cfg).unwrap();
        assert!(one.refined);
        assert_eq!(one.factor.polys(), &[poly("x0", 2, 2)]);

        let dup = [poly("x0", 2, 2), poly("x0", 2, 2)];
        let out = regularize(&dup, &cfg).unwrap();
        assert!(out.refined);
        assert_eq!(out.factor.len(), 1);

        let triple = [poly("x0", 2, 2), poly("x0 + x1", 2, 2), poly("x1", 2, 2)];
        let out = regularize(&triple, &cfg).unwrap();
        assert!(out.refined);
        assert!(out.factor.len() <= 2);
        assert!(out.factor.polys().iter().all(|q| q.degree() == 1));
        for q in &triple {
            assert!(is_function_of(q, &out.factor).unwrap().lookup().is_some());
        }
    }

    fn check_history(out: &Regularization, inputs: &[Polynomial]) {
        for q in inputs {
            assert!(is_function_of(q, &out.factor).unwrap().lookup().is_some());
        }
        for (m, id) in out.provenance.iter().zip(&out.ids) {
            assert_eq!(m.reconstruct(inputs).unwrap(), m.poly, "member g{id}");
        }
        for step in &out.iterations {
            for &(_, degree) in &step.added {
                assert!(degree < step.lowered_degree);
            }
        }
        for pair in out.iterations.windows(2) {
            for &(id, _, after) in &pair[1].before {
                if let Some(&(_, _, before)) = pair[0].before.iter().find(|e| e.0 == id) {
                    assert!(after <= before, "Delta of g{id} increased");
                }
            }
        }
    }

    #[test]
    fn regularize_quadratics_keeps_history_consistent() {
        let inputs = [poly("x0*x1", 2, 3), poly("x0*x1 + x2", 2, 3)];
        let out = regularize(&inputs, &RegularizeConfig::default()).unwrap();
        check_history(&out, &inputs);
        assert!(!out.iterations.is_empty());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn region_counts_sum_to_space(p in prop::sample::select(vec![2u64, 3]), seeds in prop::collection::vec(any::<u8>(), 1..4)) {
            let n = 3;
            let polys: Vec<Polynomial> = seeds
                .iter()
                .map(|&s| Polynomial::from_terms(f(p), n, vec![(vec![u64::from(s % 2), u64::from(s / 2 % 2), 1], 1), (vec![u64::from(s / 4 % 2), 0, 0], u64::from(s / 8) % p)]))
                .collect();
            let g = Factor::new(f(p), n, polys).unwrap();
            prop_assert_eq!(region_decompose(&g).unwrap().total(), p.pow(3));
        }

        // For independent linear forms x_i, i in S, q is a function of the
        // forms iff q only uses variables from S.
        #[test]
        fn linear_span_criterion(support in 1u8..16, terms in prop::collection::vec((prop::collection::vec(0u64..2, 4), 0u64..2), 0..6)) {
            let f2 = f(2);
            let q = Polynomial::from_terms(f2, 4, terms);
            let vars: Vec<usize> = (0..4).filter(|i| support >> i & 1 == 1).collect();
            let g = Factor::new(f2, 4, vars.iter().map(|&i| Polynomial::var(f2, 4, i)).collect()).unwrap();
            let uses_only_span = q.support().iter().all(|v| vars.contains(v));
            prop_assert_eq!(is_function_of(&q, &g).unwrap().lookup().is_some(), uses_only_span);
        }
    }
}
