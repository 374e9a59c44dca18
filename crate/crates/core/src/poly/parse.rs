//! Text grammar (whitespace ignored):
//!
//! ```text
//! poly := ['-'] term (('+' | '-') term)*
//! term := coeff? ('*'? var)*
//! var  := 'x' index ('^' exp)?
//! ```

use super::Polynomial;
use crate::error::{Error, Result};
use crate::field::FieldSpec;

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn number(&mut self) -> Result<u64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::parse(start, "expected a decimal number"));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .expect("ascii digits")
            .parse()
            .map_err(|_| Error::parse(start, "number too large"))
    }
}

pub fn parse_polynomial(text: &str, field: FieldSpec, n: usize) -> Result<Polynomial> {
    let mut cur = Cursor {
        bytes: text.as_bytes(),
        pos: 0,
    };
    let mut terms: Vec<(Vec<u64>, u64)> = Vec::new();
    let mut negate = false;
    if cur.peek() == Some(b'-') {
        cur.pos += 1;
        negate = true;
    }
    loop {
        let (exps, c) = term(&mut cur, field, n)?;
        terms.push((exps, if negate { field.neg(c) } else { c }));
        match cur.peek() {
            None => break,
            Some(b'+') => negate = false,
            Some(b'-') => negate = true,
            Some(other) => {
                return Err(Error::parse(
                    cur.pos,
                    format!("unexpected character '{}'", other as char),
                ))
            }
        }
        cur.pos += 1;
    }
    Ok(Polynomial::from_terms(field, n, terms))
}

fn term(cur: &mut Cursor<'_>, field: FieldSpec, n: usize) -> Result<(Vec<u64>, u64)> {
    let mut exps = vec![0u64; n];
    let mut coeff = 1;
    let mut seen_anything = false;
    if cur.peek().is_some_and(|b| b.is_ascii_digit()) {
        let at = cur.pos;
        let c = cur.number()?;
        if c >= field.modulus() {
            return Err(Error::parse(
                at,
                format!("coefficient {c} not in [0, {})", field.modulus()),
            ));
        }
        coeff = c;
        seen_anything = true;
    }
    loop {
        let save = cur.pos;
        let mut star = false;
        if cur.peek() == Some(b'*') {
            cur.pos += 1;
            star = true;
        }
        if cur.peek() != Some(b'x') {
            if star {
                return Err(Error::parse(cur.pos, "expected a variable after '*'"));
            }
            cur.pos = save;
            break;
        }
        if star && !seen_anything {
            return Err(Error::parse(save, "term cannot start with '*'"));
        }
        cur.pos += 1;
        let at = cur.pos;
        let idx = cur.number()? as usize;
        if idx >= n {
            return Err(Error::parse(
                at,
                format!("variable x{idx} out of range for n={n}"),
            ));
        }
        let mut e = 1;
        if cur.peek() == Some(b'^') {
            cur.pos += 1;
            e = cur.number()?;
        }
        exps[idx] = exps[idx]
            .checked_add(e)
            .ok_or_else(|| Error::parse(at, "exponent overflow"))?;
        seen_anything = true;
    }
    if !seen_anything {
        return Err(Error::parse(cur.pos, "expected a term"));
    }
    Ok((exps, coeff))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(p: u64) -> FieldSpec {
        FieldSpec::new(p).unwrap()
    }

    #[test]
    fn reads_the_documented_examples() {
        let q = parse_polynomial("x0*x1 + x2", f(2), 3).unwrap();
        assert_eq!(q.terms().len(), 2);
        assert_eq!(q.degree(), 2);
        assert_eq!(parse_polynomial("x0^2", f(2), 1).unwrap().to_string(), "x0");
        assert!(parse_polynomial("0", f(3), 4).unwrap().is_zero());
    }

    #[test]
    fn accepts_implicit_products_and_whitespace() {
        let a = parse_polynomial("2x0x1 + 1", f(3), 2).unwrap();
        let b = parse_polynomial(" 2 * x0 * x1+1 ", f(3), 2).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_string(), "2*x0*x1 + 1");
        let c = parse_polynomial("x0 - x1", f(5), 2).unwrap();
        assert_eq!(c.to_string(), "x0 + 4*x1");
    }

    #[test]
    fn reports_errors_with_positions() {
        assert!(matches!(
            parse_polynomial("x0 + x3", f(2), 3),
            Err(Error::Parse { pos: 6, .. })
        ));
        assert!(matches!(
            parse_polynomial("5*x0", f(5), 1),
            Err(Error::Parse { pos: 0, .. })
        ));
        assert!(matches!(
            parse_polynomial("x0 + ", f(2), 1),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse_polynomial("x0 ? x1", f(2), 2),
            Err(Error::Parse { pos: 3, .. })
        ));
        assert!(matches!(
            parse_polynomial("*x0", f(2), 1),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse_polynomial("", f(2), 1),
            Err(Error::Parse { .. })
        ));
    }
}
