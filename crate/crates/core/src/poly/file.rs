//! Polynomial and factor files.
//!
//! ```text
//! # comment
//! field p=2
//! vars n=4
//! poly g1 = x0*x1
//! poly g2 = x2 + x3
//! delta g1 = 1
//! ```
//!
//! `delta` lines are only meaningful for factor files.

use std::fmt::Write as _;

use super::{parse_polynomial, Polynomial};
use crate::error::{Error, Result};
use crate::field::FieldSpec;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolySystem {
    pub field: FieldSpec,
    pub n: usize,
    pub polys: Vec<(String, Polynomial)>,
    pub deltas: Vec<(String, usize)>,
}

impl PolySystem {
    pub fn get(&self, name: &str) -> Option<&Polynomial> {
        self.polys.iter().find(|(k, _)| k == name).map(|(_, q)| q)
    }

    pub fn delta(&self, name: &str) -> Option<usize> {
        self.deltas.iter().find(|(k, _)| k == name).map(|&(_, d)| d)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "field p={}", self.field.modulus());
        let _ = writeln!(out, "vars n={}", self.n);
        for (name, q) in &self.polys {
            let _ = writeln!(out, "poly {name} = {q}");
        }
        for (name, d) in &self.deltas {
            let _ = writeln!(out, "delta {name} = {d}");
        }
        out
    }
}

fn header_value(line: &str, key: &str, offset: usize) -> Result<u64> {
    let rest = line
        .strip_prefix(key)
        .map(str::trim)
        .ok_or_else(|| Error::parse(offset, format!("expected '{key}=<int>'")))?;
    rest.strip_prefix('=')
        .map(str::trim)
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::parse(offset, format!("expected '{key}=<int>'")))
}

fn split_assignment(rest: &str, offset: usize) -> Result<(String, &str, usize)> {
    let eq = rest
        .find('=')
        .ok_or_else(|| Error::parse(offset, "expected '<name> = <value>'"))?;
    let name = rest[..eq].trim();
    if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(Error::parse(offset, format!("invalid name '{name}'")));
    }
    Ok((name.to_string(), &rest[eq + 1..], offset + eq + 1))
}

pub fn parse_system(text: &str) -> Result<PolySystem> {
    let mut field = None;
    let mut n = None;
    let mut polys: Vec<(String, Polynomial)> = Vec::new();
    let mut deltas = Vec::new();
    let mut offset = 0;
    for raw in text.split_inclusive('\n') {
        let line_start = offset;
        offset += raw.len();
        let line = raw.split('#').next().unwrap_or("");
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let lead = line.len() - line.trim_start().len();
        let at = line_start + lead;
        let (keyword, rest) = trimmed
            .split_once(char::is_whitespace)
            .unwrap_or((trimmed, ""));
        let rest_at = at + keyword.len() + (rest.len() - rest.trim_start().len()) + 1;
        let rest = rest.trim_start();
        match keyword {
            "field" => field = Some(FieldSpec::new(header_value(rest, "p", rest_at)?)?),
            "vars" => n = Some(header_value(rest, "n", rest_at)? as usize),
            "poly" => {
                let (Some(f), Some(n)) = (field, n) else {
                    return Err(Error::parse(at, "'field' and 'vars' must precede 'poly'"));
                };
                let (name, expr, expr_at) = split_assignment(rest, rest_at)?;
                if polys.iter().any(|(k, _)| *k == name) {
                    return Err(Error::parse(at, format!("duplicate polynomial '{name}'")));
                }
                let q = parse_polynomial(expr, f, n).map_err(|e| match e {
                    Error::Parse { pos, msg } => Error::Parse {
                        pos: expr_at + pos,
                        msg,
                    },
                    other => other,
                })?;
                polys.push((name, q));
            }
            "delta" => {
                let (name, value, value_at) = split_assignment(rest, rest_at)?;
                let d: usize = value
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse(value_at, "expected an integer degree bound"))?;
                deltas.push((name, d));
            }
            other => return Err(Error::parse(at, format!("unknown directive '{other}'"))),
        }
    }
    let field = field.ok_or_else(|| Error::parse(0, "missing 'field p=<p>' header"))?;
    let n = n.ok_or_else(|| Error::parse(0, "missing 'vars n=<n>' header"))?;
    for (name, _) in &deltas {
        if !polys.iter().any(|(k, _)| k == name) {
            return Err(Error::Invalid(format!(
                "delta for unknown polynomial '{name}'"
            )));
        }
    }
    Ok(PolySystem {
        field,
        n,
        polys,
        deltas,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_factor_file() {
        let text = "# and of two bits\nfield p=2\nvars n=4\npoly g1 = x0*x1\npoly g2 = x2 + x3\ndelta g1 = 1\n";
        let sys = parse_system(text).unwrap();
        assert_eq!(sys.field.modulus(), 2);
        assert_eq!(sys.n, 4);
        assert_eq!(sys.polys.len(), 2);
        assert_eq!(sys.delta("g1"), Some(1));
        assert_eq!(sys.delta("g2"), None);
        assert_eq!(parse_system(&sys.to_text()).unwrap(), sys);
    }

    #[test]
    fn reports_file_offsets_for_expression_errors() {
        let text = "field p=2\nvars n=2\npoly q = x0 + x5\n";
        match parse_system(text) {
            Err(Error::Parse { pos, .. }) => assert_eq!(&text[pos..pos + 1], "5"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_missing_headers_and_unknown_lines() {
        assert!(parse_system("vars n=2\npoly q = x0\n").is_err());
        assert!(parse_system("field p=4\nvars n=2\n").is_err());
        assert!(parse_system("field p=2\nvars n=2\nfoo bar\n").is_err());
        assert!(parse_system("field p=2\nvars n=2\ndelta q = 1\n").is_err());
    }
}
