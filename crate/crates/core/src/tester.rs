//! Query-access tester: cube constraints for low degree, then a sampled
//! bias estimate against a threshold.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSpec};
use crate::poly::{FunctionTable, Point, Polynomial};
use crate::spectral::{hoeffding_radius, roots_of_unity, BiasEstimate};

/// Black-box access to a function `F_p^n -> F_p`.
pub trait Oracle {
    fn field(&self) -> FieldSpec;
    fn arity(&self) -> usize;
    fn query(&mut self, x: &Point) -> FieldElement;
}

impl Oracle for Polynomial {
    fn field(&self) -> FieldSpec {
        Polynomial::field(self)
    }

    fn arity(&self) -> usize {
        self.n()
    }

    fn query(&mut self, x: &Point) -> FieldElement {
        Polynomial::field(self).element(self.eval_raw(x.coords()))
    }
}

impl Oracle for FunctionTable {
    fn field(&self) -> FieldSpec {
        FunctionTable::field(self)
    }

    fn arity(&self) -> usize {
        self.n()
    }

    fn query(&mut self, x: &Point) -> FieldElement {
        let p = FunctionTable::field(self).modulus() as usize;
        let idx = x
            .coords()
            .iter()
            .rev()
            .fold(0, |acc, &c| acc * p + c as usize);
        self.get(idx)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Accept,
    Reject,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Degree,
    Bias,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Degree => "degree",
            Phase::Bias => "bias",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub batch: usize,
    pub phase: Phase,
    pub point: Point,
    pub response: FieldElement,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TesterVerdict {
    pub decision: Decision,
    /// The failing phase on reject, the last phase run on accept.
    pub phase: Phase,
    pub queries_used: usize,
    pub transcript: Vec<Query>,
    pub estimate: Option<BiasEstimate>,
    /// `|estimate| - (theta - radius)` when the bias phase ran.
    pub margin: Option<f64>,
    /// Accepted without any cube trial.
    pub vacuous: bool,
}

impl TesterVerdict {
    /// One JSON object per query batch.
    pub fn transcript_jsonl(&self) -> String {
        let mut out = String::new();
        if self.vacuous {
            out.push_str(&json!({"batch": 0, "phase": "degree", "points": [], "responses": [], "vacuous": true}).to_string());
            out.push('\n');
        }
        let mut start = 0;
        while start < self.transcript.len() {
            let batch = self.transcript[start].batch;
            let end = self.transcript[start..]
                .iter()
                .position(|q| q.batch != batch)
                .map_or(self.transcript.len(), |k| start + k);
            let slice = &self.transcript[start..end];
            let line = json!({
                "batch": batch,
                "phase": slice[0].phase.as_str(),
                "points": slice.iter().map(|q| q.point.coords().to_vec()).collect::<Vec<_>>(),
                "responses": slice.iter().map(|q| q.response.value()).collect::<Vec<_>>(),
            });
            out.push_str(&line.to_string());
            out.push('\n');
            start = end;
        }
        out
    }
}

fn random_point(rng: &mut ChaCha8Rng, field: FieldSpec, n: usize) -> Vec<u64> {
    (0..n).map(|_| rng.gen_range(0..field.modulus())).collect()
}

/// Runs `trials` random `(d+1)`-cube checks, stopping at the first nonzero
/// cube sum. Returns whether all passed.
fn degree_phase(
    oracle: &mut dyn Oracle,
    d: usize,
    trials: usize,
    rng: &mut ChaCha8Rng,
    transcript: &mut Vec<Query>,
) -> bool {
    let f = oracle.field();
    let n = oracle.arity();
    for trial in 0..trials {
        let x = random_point(rng, f, n);
        let ys: Vec<Vec<u64>> = (0..=d).map(|_| random_point(rng, f, n)).collect();
        let mut sum = 0;
        for mask in 0u64..(1 << (d + 1)) {
            let mut pt = x.clone();
            for (i, y) in ys.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    for (c, &v) in pt.iter_mut().zip(y) {
                        *c = f.add(*c, v);
                    }
                }
            }
            let point = Point::new(f, &pt);
            let response = oracle.query(&point);
            let sign = f.pow(f.minus_one(), u64::from(mask.count_ones()));
            sum = f.add(sum, f.mul(sign, response.value()));
            transcript.push(Query {
                batch: trial,
                phase: Phase::Degree,
                point,
                response,
            });
        }
        if sum != 0 {
            return false;
        }
    }
    true
}

/// Accepts iff every sampled `(d+1)`-cube sum vanishes. A polynomial of
/// degree at most `d` is always accepted.
pub fn low_degree_test(
    oracle: &mut dyn Oracle,
    d: usize,
    trials: usize,
    seed: u64,
) -> TesterVerdict {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut transcript = Vec::new();
    let pass = degree_phase(oracle, d, trials, &mut rng, &mut transcript);
    TesterVerdict {
        decision: if pass {
            Decision::Accept
        } else {
            Decision::Reject
        },
        phase: Phase::Degree,
        queries_used: transcript.len(),
        transcript,
        estimate: None,
        margin: None,
        vacuous: trials == 0,
    }
}

/// Low-degree phase, then accept iff `|estimate| >= theta - radius` for a
/// bias estimate from `samples` queries.
pub fn concise_test(
    oracle: &mut dyn Oracle,
    d: usize,
    theta: f64,
    samples: usize,
    trials: usize,
    seed: u64,
) -> Result<TesterVerdict> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::Precondition(format!(
            "threshold {theta} outside (0, 1]"
        )));
    }
    if samples == 0 {
        return Err(Error::Precondition(
            "bias phase needs at least one sample".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut transcript = Vec::new();
    if !degree_phase(oracle, d, trials, &mut rng, &mut transcript) {
        return Ok(TesterVerdict {
            decision: Decision::Reject,
            phase: Phase::Degree,
            queries_used: transcript.len(),
            transcript,
            estimate: None,
            margin: None,
            vacuous: false,
        });
    }
    let f = oracle.field();
    let n = oracle.arity();
    let roots = roots_of_unity(f.modulus());
    let mut acc = num_complex::Complex64::new(0.0, 0.0);
    for _ in 0..samples {
        let point = Point::new(f, &random_point(&mut rng, f, n));
        let response = oracle.query(&point);
        acc += roots[response.value() as usize];
        transcript.push(Query {
            batch: trials,
            phase: Phase::Bias,
            point,
            response,
        });
    }
    let estimate = BiasEstimate {
        estimate: acc / samples as f64,
        radius: hoeffding_radius(samples),
    };
    let margin = estimate.estimate.norm() - (theta - estimate.radius);
    Ok(TesterVerdict {
        decision: if margin >= 0.0 {
            Decision::Accept
        } else {
            Decision::Reject
        },
        phase: Phase::Bias,
        queries_used: transcript.len(),
        transcript,
        estimate: Some(estimate),
        margin: Some(margin),
        vacuous: trials == 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_polynomial;
    use proptest::prelude::*;

    fn poly(s: &str, p: u64, n: usize) -> Polynomial {
        parse_polynomial(s, FieldSpec::new(p).unwrap(), n).unwrap()
    }

    #[test]
    fn low_degree_examples() {
        let mut q = poly("x0*x1*x2 + x3^2 + 1", 3, 4);
        let v = low_degree_test(&mut q, 3, 30, 1);
        assert_eq!(v.decision, Decision::Accept);
        assert_eq!(v.queries_used, 30 * 16);

        let mut and = poly("x0*x1", 2, 2);
        let v = low_degree_test(&mut and, 1, 100, 7);
        assert_eq!(v.decision, Decision::Reject);
        assert_eq!(v.phase, Phase::Degree);
        assert_eq!(v.queries_used % 4, 0);

        let v = low_degree_test(&mut and, 1, 0, 7);
        assert_eq!(v.decision, Decision::Accept);
        assert!(v.vacuous);
        assert_eq!(v.queries_used, 0);
        assert!(v.transcript_jsonl().contains("\"vacuous\":true"));
    }

    #[test]
    fn concise_examples() {
        let mut c = poly("1", 2, 3);
        let v = concise_test(&mut c, 2, 0.3, 1000, 10, 0).unwrap();
        assert_eq!(v.decision, Decision::Accept);

        let mut lin = poly("x0", 2, 4);
        let v = concise_test(&mut lin, 2, 0.3, 10_000, 20, 11).unwrap();
        assert_eq!((v.decision, v.phase), (Decision::Reject, Phase::Bias));
        assert!(v.estimate.unwrap().estimate.norm() < 0.05);

        let mut and = poly("x0*x1", 2, 4);
        let v = concise_test(&mut and, 2, 0.3, 10_000, 20, 11).unwrap();
        assert_eq!(v.decision, Decision::Accept);
        assert_eq!(v.queries_used, 20 * 8 + 10_000);
        assert!(v.margin.unwrap() > 0.0);

        assert!(concise_test(&mut and, 2, 0.0, 10, 1, 0).is_err());
        assert!(concise_test(&mut and, 2, 0.5, 0, 1, 0).is_err());
    }

    #[test]
    fn table_oracle_agrees_with_polynomial() {
        let q = poly("x0*x1 + 2*x2", 3, 3);
        let mut t = q.tabulate().unwrap();
        let mut qq = q.clone();
        let a = low_degree_test(&mut t, 2, 5, 9);
        let b = low_degree_test(&mut qq, 2, 5, 9);
        assert_eq!(a.transcript, b.transcript);
    }

    #[test]
    fn transcript_lines_follow_batches() {
        let mut q = poly("x0*x1", 2, 3);
        let v = concise_test(&mut q, 2, 0.2, 5, 3, 4).unwrap();
        let jsonl = v.transcript_jsonl();
        let lines: Vec<&str> = jsonl.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[3].contains("\"phase\":\"bias\""));
    }

    fn arb_low_degree(p: u64, d: usize, n: usize) -> impl Strategy<Value = Polynomial> {
        prop::collection::vec((prop::collection::vec(0u64..p, n), 1u64..p), 0..10).prop_map(
            move |terms| {
                // Keep only monomials of total degree <= d.
                let terms: Vec<(Vec<u64>, u64)> = terms
                    .into_iter()
                    .map(|(mut e, c)| {
                        let mut budget = d as u64;
                        for x in e.iter_mut() {
                            *x = (*x).min(budget);
                            budget -= *x;
                        }
                        (e, c)
                    })
                    .collect();
                Polynomial::from_terms(FieldSpec::new(p).unwrap(), n, terms)
            },
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn perfect_completeness(
            (_p, d, _n, mut q) in (prop::sample::select(vec![2u64, 3]), 0usize..=3, 1usize..=8)
                .prop_flat_map(|(p, d, n)| (Just(p), Just(d), Just(n), arb_low_degree(p, d, n))),
            seed in any::<u64>(),
        ) {
            prop_assert!(q.degree() <= d);
            let v = low_degree_test(&mut q, d, 10, seed);
            prop_assert_eq!(v.decision, Decision::Accept);
            prop_assert_eq!(v.queries_used, 10 << (d + 1));
        }

        #[test]
        fn seeded_runs_are_identical(seed in any::<u64>()) {
            let mut a = poly("x0*x1*x2 + x3", 2, 5);
            let mut b = a.clone();
            let va = concise_test(&mut a, 2, 0.4, 50, 4, seed).unwrap();
            let vb = concise_test(&mut b, 2, 0.4, 50, 4, seed).unwrap();
            prop_assert_eq!(va, vb);
        }
    }
}
