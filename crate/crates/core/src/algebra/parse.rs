//! Recursive-descent parser for polynomial text.
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := factor ('*' factor)*
//! factor   := base ('^' uint)?
//! base     := rational | var | '(' expr ')'
//! rational := int ('/' uint)?
//! int      := '-'? digits
//! ```
//!
//! Base variables are `x1..xd` on real charts and `z1..zd`, `w1..wd` on complex charts.
//! Formal functions additionally accept the fiber variables (`xi`, `zeta`, `zetab`),
//! `nu`, and a `_c` copy suffix on product charts. Whitespace is ignored.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{BaseSpace, Chart, Flavor, FormalFunction, Polynomial};
use crate::error::{Error, Result};
use crate::Rational;

/// Exponents above this are rejected rather than expanded.
pub const MAX_EXPONENT: u32 = 1000;

type Terms = BTreeMap<Vec<u32>, Rational>;

pub fn parse_poly(text: &str, space: BaseSpace) -> Result<Polynomial> {
    let resolve = |name: &str, index: usize, copy: Option<usize>| -> Option<usize> {
        if copy.is_some() || index == 0 || index > space.dim {
            return None;
        }
        match (space.flavor, name) {
            (Flavor::Real, "x") => Some(index - 1),
            (Flavor::Complex, "z") => Some(space.z(index - 1)),
            (Flavor::Complex, "w") => Some(space.w(index - 1)),
            _ => None,
        }
    };
    let terms = Parser::new(text, space.nvars(), &resolve).run()?;
    Ok(Polynomial::from_terms(space, terms))
}

pub fn parse_formal(text: &str, chart: Chart) -> Result<FormalFunction> {
    let resolve = |name: &str, index: usize, copy: Option<usize>| -> Option<usize> {
        if name == "nu" {
            return (index == 0 && copy.is_none()).then(|| chart.nu_index());
        }
        let copy = match copy {
            Some(c) if chart.copies > 1 && (1..=chart.copies).contains(&c) => c - 1,
            None if chart.copies == 1 => 0,
            _ => return None,
        };
        if index == 0 || index > chart.dim() {
            return None;
        }
        let k = index - 1;
        let d = chart.dim();
        match (chart.flavor(), name) {
            (Flavor::Real, "x") => Some(chart.base_index(copy, k)),
            (Flavor::Real, "xi") => Some(chart.fiber_index(copy, k)),
            (Flavor::Complex, "z") => Some(chart.base_index(copy, k)),
            (Flavor::Complex, "w") => Some(chart.base_index(copy, d + k)),
            (Flavor::Complex, "zeta") => Some(chart.fiber_index(copy, k)),
            (Flavor::Complex, "zetab") => Some(chart.fiber_index(copy, d + k)),
            _ => None,
        }
    };
    let terms = Parser::new(text, chart.nvars() + 1, &resolve).run()?;
    Ok(FormalFunction::from_terms(chart, terms))
}

type Resolver<'r> = &'r dyn Fn(&str, usize, Option<usize>) -> Option<usize>;

struct Parser<'a, 'r> {
    src: &'a [u8],
    pos: usize,
    nvars: usize,
    resolve: Resolver<'r>,
}

impl<'a, 'r> Parser<'a, 'r> {
    fn new(text: &'a str, nvars: usize, resolve: Resolver<'r>) -> Self {
        Parser {
            src: text.as_bytes(),
            pos: 0,
            nvars,
            resolve,
        }
    }

    fn run(mut self) -> Result<Terms> {
        let e = self.expr()?;
        self.skip_ws();
        if self.pos < self.src.len() {
            return Err(self.error("unexpected trailing input"));
        }
        Ok(e)
    }

    fn error(&self, message: &str) -> Error {
        Error::Syntax {
            position: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Terms> {
        let mut acc = self.term()?;
        while let Some(op @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            let sign = if op == b'+' {
                Rational::one()
            } else {
                -Rational::one()
            };
            for (e, c) in rhs {
                add_into(&mut acc, e, c * &sign);
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Terms> {
        let mut acc = self.factor()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            let start = self.pos;
            let rhs = self.factor()?;
            acc = multiply(&acc, &rhs).ok_or(Error::ExponentOverflow { position: start })?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Terms> {
        let base = self.base()?;
        if self.peek() != Some(b'^') {
            return Ok(base);
        }
        self.pos += 1;
        self.skip_ws();
        let start = self.pos;
        let digits = self.digits().ok_or_else(|| self.error("expected exponent"))?;
        let n: u32 = digits
            .parse()
            .ok()
            .filter(|&n| n <= MAX_EXPONENT)
            .ok_or(Error::ExponentOverflow { position: start })?;
        let mut acc = self.unit();
        for _ in 0..n {
            acc = multiply(&acc, &base).ok_or(Error::ExponentOverflow { position: start })?;
        }
        Ok(acc)
    }

    fn base(&mut self) -> Result<Terms> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected `)`"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(b'-') | Some(b'0'..=b'9') => self.rational(),
            Some(c) if c.is_ascii_alphabetic() => self.variable(),
            Some(_) => Err(self.error("expected a number, variable or `(`")),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn digits(&mut self) -> Option<String> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        (self.pos > start)
            .then(|| String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn rational(&mut self) -> Result<Terms> {
        let negative = self.src[self.pos] == b'-';
        if negative {
            self.pos += 1;
        }
        let num = self.digits().ok_or_else(|| self.error("expected digits"))?;
        let mut value = Rational::from_integer(num.parse::<BigInt>().expect("digit string"));
        if negative {
            value = -value;
        }
        if self.peek() == Some(b'/') {
            self.pos += 1;
            self.skip_ws();
            let den = self.digits().ok_or_else(|| self.error("expected denominator"))?;
            let den = den.parse::<BigInt>().expect("digit string");
            if den.is_zero() {
                return Err(self.error("zero denominator"));
            }
            value /= Rational::from_integer(den);
        }
        let mut t = Terms::new();
        add_into(&mut t, vec![0; self.nvars], value);
        Ok(t)
    }

    fn variable(&mut self) -> Result<Terms> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphabetic() {
            self.pos += 1;
        }
        let name = String::from_utf8_lossy(&self.src[start..self.pos]).into_owned();
        let index = match self.digits() {
            Some(d) => d.parse::<usize>().unwrap_or(usize::MAX),
            None => 0,
        };
        let mut copy = None;
        if self.src.get(self.pos) == Some(&b'_') {
            self.pos += 1;
            copy = Some(
                self.digits()
                    .and_then(|d| d.parse::<usize>().ok())
                    .ok_or_else(|| self.error("expected copy index after `_`"))?,
            );
        }
        let text = String::from_utf8_lossy(&self.src[start..self.pos]).into_owned();
        let var = (self.resolve)(&name, index, copy).ok_or(Error::UnknownVariable {
            name: text,
            position: start,
        })?;
        let mut exps = vec![0; self.nvars];
        exps[var] = 1;
        let mut t = Terms::new();
        t.insert(exps, Rational::one());
        Ok(t)
    }

    fn unit(&self) -> Terms {
        let mut t = Terms::new();
        t.insert(vec![0; self.nvars], Rational::one());
        t
    }
}

fn add_into(t: &mut Terms, e: Vec<u32>, c: Rational) {
    if c.is_zero() {
        return;
    }
    match t.entry(e) {
        std::collections::btree_map::Entry::Vacant(v) => {
            v.insert(c);
        }
        std::collections::btree_map::Entry::Occupied(mut o) => {
            *o.get_mut() += c;
            if o.get().is_zero() {
                o.remove();
            }
        }
    }
}

fn multiply(a: &Terms, b: &Terms) -> Option<Terms> {
    let mut out = Terms::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let mut e = Vec::with_capacity(ea.len());
            for (x, y) in ea.iter().zip(eb) {
                let s = x.checked_add(*y).filter(|&s| s <= MAX_EXPONENT)?;
                e.push(s);
            }
            add_into(&mut out, e, ca * cb);
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal() {
        let s = BaseSpace::complex(1);
        let p = parse_poly("z1*w1 + 1", s).unwrap();
        assert_eq!(p.to_string(), "1 + z1*w1");
    }

    #[test]
    fn zero() {
        let p = parse_poly("0", BaseSpace::complex(1)).unwrap();
        assert!(p.is_zero());
    }

    #[test]
    fn binomial() {
        let p = parse_poly("(z1 + w1)^2", BaseSpace::complex(1)).unwrap();
        assert_eq!(p.to_string(), "z1^2 + 2*z1*w1 + w1^2");
    }

    #[test]
    fn rationals_and_signs() {
        let s = BaseSpace::real(2);
        let p = parse_poly("-3/6*x1 - x2*2 + 1/2*x1", s).unwrap();
        assert_eq!(p.to_string(), "-2*x2");
    }

    #[test]
    fn errors_carry_positions() {
        let s = BaseSpace::complex(1);
        assert_eq!(
            parse_poly("z1 + z2", s),
            Err(Error::UnknownVariable {
                name: "z2".into(),
                position: 5
            })
        );
        assert!(matches!(
            parse_poly("z1 +", s),
            Err(Error::Syntax { position: 4, .. })
        ));
        assert!(matches!(
            parse_poly("z1^99999999999", s),
            Err(Error::ExponentOverflow { position: 3 })
        ));
        assert!(matches!(parse_poly("x1", s), Err(Error::UnknownVariable { .. })));
        assert!(matches!(parse_poly("1/0", s), Err(Error::Syntax { .. })));
    }

    #[test]
    fn formal_variables() {
        let c = Chart::complex(1, 4, 2);
        let f = parse_formal("zeta1*zetab1*nu^2 + w1", c).unwrap();
        assert_eq!(f.to_string(), "w1 + zeta1*zetab1*nu^2");
        let d = c.power(2, 4);
        let g = parse_formal("z1_2*zeta1_1", d).unwrap();
        assert_eq!(g.to_string(), "zeta1_1*z1_2");
        assert!(parse_formal("z1", d).is_err());
    }
}
