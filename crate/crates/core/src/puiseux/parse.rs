//! Recursive-descent parser for the textual series grammar.
//!
//! ```text
//! series = term {("+"|"-") term} ["+" "O(" mono ")"]
//! term   = coeff ["*"] [mono] | mono
//! mono   = "t" ["^" rat]
//! rat    = int | "(" int "/" int ")"
//! coeff  = real | "(" real ("+"|"-") real "i" ")" | ["-"] "i"
//! ```
//!
//! Whitespace is ignored. A few harmless extensions are accepted: a leading
//! sign, `2i`, `(3i)`, `(1+i)`, `t^(-3)` and `O(1)`.

use num_traits::Zero;

use super::{PuiseuxScalar, RationalExp, C64};
use crate::error::{Error, Result};

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse { offset: self.pos, message: message.into() })
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

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, b: u8) -> Result<()> {
        if self.eat(b) {
            Ok(())
        } else {
            self.err(format!("expected '{}'", b as char))
        }
    }

    fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }

    fn unsigned_real(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        let s = self.src;
        let mut i = self.pos;
        while i < s.len() && (s[i].is_ascii_digit() || s[i] == b'.') {
            i += 1;
        }
        if i == start {
            return self.err("expected a number");
        }
        if i < s.len() && (s[i] == b'e' || s[i] == b'E') {
            let mut j = i + 1;
            if j < s.len() && (s[j] == b'+' || s[j] == b'-') {
                j += 1;
            }
            let digits = j;
            while j < s.len() && s[j].is_ascii_digit() {
                j += 1;
            }
            if j > digits {
                i = j;
            }
        }
        let text = std::str::from_utf8(&s[start..i]).expect("ascii slice");
        match text.parse::<f64>() {
            Ok(v) => {
                self.pos = i;
                Ok(v)
            }
            Err(_) => self.err(format!("malformed number '{text}'")),
        }
    }

    fn signed_real(&mut self) -> Result<f64> {
        if self.eat(b'-') {
            Ok(-self.unsigned_real()?)
        } else {
            self.eat(b'+');
            self.unsigned_real()
        }
    }

    fn int(&mut self) -> Result<i64> {
        self.skip_ws();
        let neg = if self.eat(b'-') {
            true
        } else {
            self.eat(b'+');
            false
        };
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return self.err("expected an integer");
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii slice");
        let v: i64 = match text.parse() {
            Ok(v) => v,
            Err(_) => {
                self.pos = start;
                return self.err("integer out of range");
            }
        };
        Ok(if neg { -v } else { v })
    }

    fn rational(&mut self) -> Result<RationalExp> {
        if self.eat(b'(') {
            let num = self.int()?;
            let den = if self.eat(b'/') {
                let at = self.pos;
                let den = self.int()?;
                if den == 0 {
                    self.pos = at;
                    return self.err("denominator 0");
                }
                den
            } else {
                1
            };
            self.expect(b')')?;
            Ok(RationalExp::new(num, den))
        } else {
            Ok(RationalExp::from_integer(self.int()?))
        }
    }

    fn mono(&mut self) -> Result<RationalExp> {
        self.expect(b't')?;
        if self.eat(b'^') {
            self.rational()
        } else {
            Ok(RationalExp::from_integer(1))
        }
    }

    /// Parenthesized coefficient: `(re)`, `(im i)`, `(re + im i)`, `(re + i)`.
    fn paren_coeff(&mut self) -> Result<C64> {
        let first = self.signed_real()?;
        if self.eat(b'i') {
            self.expect(b')')?;
            return Ok(C64::new(0.0, first));
        }
        if self.eat(b')') {
            return Ok(C64::new(first, 0.0));
        }
        let sign = if self.eat(b'+') {
            1.0
        } else if self.eat(b'-') {
            -1.0
        } else {
            return self.err("expected '+', '-' or ')' in complex coefficient");
        };
        let im = if self.peek() == Some(b'i') { 1.0 } else { self.unsigned_real()? };
        self.expect(b'i')?;
        self.expect(b')')?;
        Ok(C64::new(first, sign * im))
    }

    /// One term without its sign.
    fn term(&mut self) -> Result<(RationalExp, C64)> {
        let start = self.pos;
        let coeff = match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                Some(self.paren_coeff()?)
            }
            Some(b) if b.is_ascii_digit() || b == b'.' => {
                let v = self.unsigned_real()?;
                // `2i` without whitespace is an imaginary literal.
                if self.src.get(self.pos) == Some(&b'i') {
                    self.pos += 1;
                    Some(C64::new(0.0, v))
                } else {
                    Some(C64::new(v, 0.0))
                }
            }
            Some(b'i') => {
                self.pos += 1;
                Some(C64::new(0.0, 1.0))
            }
            _ => None,
        };
        if coeff.is_some() {
            self.eat(b'*');
        }
        let exponent = if self.peek() == Some(b't') {
            self.mono()?
        } else if coeff.is_some() {
            RationalExp::zero()
        } else {
            self.pos = start;
            return self.err("expected a term");
        };
        Ok((exponent, coeff.unwrap_or(C64::new(1.0, 0.0))))
    }

    fn big_o(&mut self) -> Result<RationalExp> {
        self.expect(b'O')?;
        self.expect(b'(')?;
        let p = if self.peek() == Some(b't') {
            self.mono()?
        } else {
            let at = self.pos;
            let one = self.unsigned_real()?;
            if one != 1.0 {
                self.pos = at;
                return self.err("O(...) must contain a monomial in t or 1");
            }
            RationalExp::zero()
        };
        self.expect(b')')?;
        Ok(p)
    }

    fn series(&mut self) -> Result<PuiseuxScalar> {
        let mut terms = Vec::new();
        let mut precision: Option<RationalExp> = None;
        if self.at_end() {
            return self.err("empty input");
        }
        let mut sign = if self.eat(b'-') {
            -1.0
        } else {
            self.eat(b'+');
            1.0
        };
        loop {
            if self.peek() == Some(b'O') {
                let at = self.pos;
                if sign < 0.0 {
                    return self.err("O(...) must be added, not subtracted");
                }
                let p = self.big_o()?;
                if precision.is_some() {
                    self.pos = at;
                    return self.err("duplicate O(...) marker");
                }
                precision = Some(p);
            } else {
                let (e, c) = self.term()?;
                // Adding 0.0 turns negative zeros into positive ones.
                terms.push((e, C64::new(c.re * sign + 0.0, c.im * sign + 0.0)));
            }
            if self.at_end() {
                break;
            }
            sign = if self.eat(b'+') {
                1.0
            } else if self.eat(b'-') {
                -1.0
            } else {
                return self.err("expected '+' or '-'");
            };
        }
        Ok(PuiseuxScalar::from_terms(terms, precision))
    }
}

pub(super) fn parse_series(text: &str) -> Result<PuiseuxScalar> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    p.series()
}
