//! Line-oriented text form of expansions.
//!
//! One term per line, `coeff ; pole ; chains ; c|d`, exactly as printed by
//! the `Display` impls. [`parse_expansion`] inverts that output.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

use super::expansion::{Expansion, OperatorTerm, PoleMonomial};
use super::expr::{Atom, FieldKind, ParamMatrix, Point, TraceChain};
use crate::coeff::{Coeff, Monomial, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn fail<T>(line: usize, message: impl ToString) -> Result<T, ParseError> {
    Err(ParseError { line, message: message.to_string() })
}

fn parse_rational(s: &str, line: usize) -> Result<Rational, ParseError> {
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a, b),
        None => (s, "1"),
    };
    match (num.parse::<i128>(), den.parse::<i128>()) {
        (Ok(a), Ok(b)) if b != 0 => Ok(Rational::new(a, b)),
        _ => fail(line, alloc::format!("bad rational `{s}`")),
    }
}

pub fn parse_coeff(s: &str) -> Result<Coeff, ParseError> {
    coeff_at(s.trim(), 0)
}

fn coeff_at(s: &str, line: usize) -> Result<Coeff, ParseError> {
    if s == "0" {
        return Ok(Coeff::zero());
    }
    let mut total = Coeff::zero();
    for term in s.split(" + ") {
        let mut parts = term.split('*');
        let r = parse_rational(parts.next().unwrap_or(""), line)?;
        let mut m = Monomial::ONE;
        for f in parts {
            let (name, exp) = match f.split_once('^') {
                Some((a, b)) => match b.parse::<i64>() {
                    Ok(e) => (a, e),
                    Err(_) => return fail(line, alloc::format!("bad exponent in `{f}`")),
                },
                None => (f, 1),
            };
            if !m.set_factor(name, exp) {
                return fail(line, alloc::format!("unknown factor `{f}`"));
            }
        }
        total += &Coeff::monomial(r, m);
    }
    Ok(total)
}

fn pole_at(s: &str, line: usize) -> Result<PoleMonomial, ParseError> {
    let mut pole = PoleMonomial::finite();
    if s == "1" {
        return Ok(pole);
    }
    for f in s.split('*') {
        let Some((base, k)) = f.split_once("^-") else {
            return fail(line, alloc::format!("bad pole factor `{f}`"));
        };
        let Ok(k) = k.parse::<u32>() else {
            return fail(line, alloc::format!("bad pole order `{f}`"));
        };
        let mut chars = base.chars();
        let (Some(p), rest) = (chars.next(), chars.as_str()) else {
            return fail(line, "empty pole label");
        };
        match rest {
            "" => pole.multiply(Point(p), k, 0),
            "b" => pole.multiply(Point(p), 0, k),
            _ => return fail(line, alloc::format!("bad pole label `{base}`")),
        }
    }
    Ok(pole)
}

fn atom_at(s: &str, line: usize) -> Result<Atom, ParseError> {
    if let Some((kind, point)) = s.split_once('@') {
        let kind = match kind {
            "J" => FieldKind::J,
            "Jb" => FieldKind::Jb,
            "M" => FieldKind::M,
            "Mi" => FieldKind::Minv,
            _ => return fail(line, alloc::format!("unknown field `{kind}`")),
        };
        let mut cs = point.chars();
        return match (cs.next(), cs.next()) {
            (Some(p), None) => Ok(Atom::field(kind, Point(p))),
            _ => fail(line, alloc::format!("bad point `{point}`")),
        };
    }
    Ok(Atom::param(match s {
        "1" => ParamMatrix::Identity,
        "I" => ParamMatrix::I,
        "Ii" => ParamMatrix::IInverse,
        name if !name.is_empty() && name.chars().all(|c| c.is_alphanumeric() || c == '_') => {
            ParamMatrix::named(name)
        }
        _ => return fail(line, alloc::format!("bad parameter `{s}`")),
    }))
}

fn chains_at(s: &str, line: usize) -> Result<Vec<TraceChain>, ParseError> {
    let mut out = Vec::new();
    if s == "1" {
        return Ok(out);
    }
    let mut rest = s;
    while !rest.is_empty() {
        let Some(body) = rest.strip_prefix("STr(") else {
            return fail(line, alloc::format!("expected `STr(` at `{rest}`"));
        };
        let Some(end) = body.find(')') else {
            return fail(line, "unclosed supertrace");
        };
        let word = body[..end]
            .split_whitespace()
            .map(|a| atom_at(a, line))
            .collect::<Result<Vec<_>, _>>()?;
        if word.is_empty() {
            return fail(line, "empty supertrace");
        }
        out.push(TraceChain::new(word));
        rest = body[end + 1..].trim_start();
    }
    Ok(out)
}

/// Parse the text form of an expansion. Blank lines are skipped.
pub fn parse_expansion(s: &str) -> Result<Expansion, ParseError> {
    let mut terms = Vec::new();
    for (i, raw) in s.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(" ; ").map(str::trim).collect();
        let [c, p, ch, conn] = fields[..] else {
            return fail(line, "expected four `;`-separated fields");
        };
        let mut t = OperatorTerm::new(coeff_at(c, line)?, pole_at(p, line)?, chains_at(ch, line)?);
        t.connected = match conn {
            "c" => true,
            "d" => false,
            _ => return fail(line, alloc::format!("expected `c` or `d`, got `{conn}`")),
        };
        terms.push(t);
    }
    Ok(Expansion::from_terms(terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ope::{ope, Operator};
    use alloc::format;

    #[test]
    fn engine_output_round_trips() {
        let z = Point('z');
        let e = ope(&Operator::OI.at(z), &Operator::OI.at(Point::ORIGIN)).unwrap();
        let text = format!("{e}");
        let back = parse_expansion(&text).unwrap();
        assert!(back.equivalent(&e));
        assert_eq!(format!("{back}"), text);
    }

    #[test]
    fn coefficient_forms() {
        let c = parse_coeff("-1/2*n^-2*gamma + 3*pi*lambda").unwrap();
        assert_eq!(format!("{c}"), "-1/2*n^-2*gamma + 3*pi*lambda");
        assert!(parse_coeff("2*mu").is_err());
        assert!(parse_coeff("1/0").is_err());
    }

    #[test]
    fn errors_carry_the_line() {
        let err = parse_expansion("1 ; 1 ; STr(J@0) ; c\n1 ; zq^-1 ; STr(J@0) ; c").unwrap_err();
        assert_eq!(err.line, 2);
    }
}
