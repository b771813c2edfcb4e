//! Text syntax for formulas and CTL properties.
//!
//! ```text
//! formula := formula ("=>" | "->") formula | formula "||" formula
//!          | formula "&&" formula | "!" formula
//!          | ("exists" | "forall") ident ("," ident)* "." formula
//!          | term (rel term)+ | num "|" term | "true" | "false" | "(" formula ")"
//! rel     := "<=" | "<" | ">=" | ">" | "=" | "!="
//! term    := ["-"] product (("+" | "-") product)*
//! product := factor ("*" factor)*        (at most one non-constant factor)
//! ctl     := formula operators plus "EX" "EF" "EG" "AX" "AF" "AG" prefixes
//!            and "E" "[" ctl "U" ctl "]", "A" "[" ctl "U" ctl "]"
//! ```
//!
//! Identifiers may carry trailing primes (`x'`). Comments run from `#` or
//! `//` to the end of the line.

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::ctl::Ctl;
use crate::int::Int;
use crate::presburger::{Formula, LinearTerm, Var};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

impl core::error::Error for ParseError {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Num(Int),
    Sym(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Num(n) => write!(f, "`{n}`"),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
}

const SYMBOLS: &[&str] = &[
    "&&", "||", "=>", "->", "<=", ">=", "!=", "==", "..", "+", "-", "*", "(", ")", "[", "]", "<",
    ">", "=", "!", "|", ".", ",", ";", ":", "{", "}",
];

pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let bytes = src.as_bytes();
    let mut i = 0;
    let mut line = 1;
    let mut col = 1;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' || src[i..].starts_with("//") {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let (tl, tc) = (line, col);
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
            {
                i += 1;
            }
            while i < bytes.len() && bytes[i] == b'\'' {
                i += 1;
            }
            col += i - start;
            out.push(Token {
                tok: Tok::Ident(src[start..i].to_string()),
                line: tl,
                column: tc,
            });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            col += i - start;
            let n: Int = src[start..i].parse().map_err(|_| ParseError {
                line: tl,
                column: tc,
                message: "malformed number".to_string(),
            })?;
            out.push(Token {
                tok: Tok::Num(n),
                line: tl,
                column: tc,
            });
            continue;
        }
        match SYMBOLS.iter().find(|s| src[i..].starts_with(**s)) {
            Some(s) => {
                i += s.len();
                col += s.len();
                out.push(Token {
                    tok: Tok::Sym(s),
                    line: tl,
                    column: tc,
                });
            }
            None => {
                return Err(ParseError {
                    line: tl,
                    column: tc,
                    message: alloc::format!("unexpected character `{c}`"),
                })
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(out)
}

const KEYWORDS: &[&str] = &["true", "false", "exists", "forall"];
const CTL_KEYWORDS: &[&str] = &["EX", "EF", "EG", "AX", "AF", "AG", "E", "A", "U"];

/// Recursive-descent parser over a token stream. Public so that file
/// formats embedding formulas can drive it.
pub struct Parser {
    toks: Vec<Token>,
    pos: usize,
    ctl_mode: bool,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    pub fn new(src: &str) -> PResult<Parser> {
        Ok(Parser {
            toks: tokenize(src)?,
            pos: 0,
            ctl_mode: false,
        })
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    pub fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    pub fn advance(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    pub fn error(&self, message: impl Into<String>) -> ParseError {
        let t = &self.toks[self.pos];
        ParseError {
            line: t.line,
            column: t.column,
            message: message.into(),
        }
    }

    fn unexpected(&self, what: &str) -> ParseError {
        self.error(alloc::format!("expected {what}, found {}", self.peek()))
    }

    pub fn eat_sym(&mut self, s: &str) -> bool {
        if matches!(self.peek(), Tok::Sym(t) if *t == s) {
            self.advance();
            true
        } else {
            false
        }
    }

    pub fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(self.unexpected(&alloc::format!("`{s}`")))
        }
    }

    pub fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Tok::Ident(t) if t == w)
    }

    pub fn eat_word(&mut self, w: &str) -> bool {
        if self.is_word(w) {
            self.advance();
            true
        } else {
            false
        }
    }

    pub fn expect_word(&mut self, w: &str) -> PResult<()> {
        if self.eat_word(w) {
            Ok(())
        } else {
            Err(self.unexpected(&alloc::format!("`{w}`")))
        }
    }

    pub fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.advance();
                Ok(s)
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    pub fn number(&mut self) -> PResult<Int> {
        let neg = self.eat_sym("-");
        match self.peek().clone() {
            Tok::Num(n) => {
                self.advance();
                Ok(if neg { -n } else { n })
            }
            _ => Err(self.unexpected("number")),
        }
    }

    pub fn expect_eof(&self) -> PResult<()> {
        if self.at_eof() {
            Ok(())
        } else {
            Err(self.unexpected("end of input"))
        }
    }

    // ----- formulas -----------------------------------------------------

    pub fn formula(&mut self) -> PResult<Formula> {
        let lhs = self.disjunction()?;
        if self.eat_sym("=>") || self.eat_sym("->") {
            let rhs = self.formula()?;
            return Ok(Formula::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> PResult<Formula> {
        let mut parts = alloc::vec![self.conjunction()?];
        while self.eat_sym("||") {
            parts.push(self.conjunction()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Formula::Or(parts)
        })
    }

    fn conjunction(&mut self) -> PResult<Formula> {
        let mut parts = alloc::vec![self.unary()?];
        while self.eat_sym("&&") {
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Formula::And(parts)
        })
    }

    fn unary(&mut self) -> PResult<Formula> {
        if self.eat_sym("!") {
            return Ok(Formula::Not(Box::new(self.unary()?)));
        }
        if self.is_word("exists") || self.is_word("forall") {
            let ex = self.is_word("exists");
            self.advance();
            let mut vars = alloc::vec![Var::new(&self.ident()?)];
            while self.eat_sym(",") {
                vars.push(Var::new(&self.ident()?));
            }
            self.expect_sym(".")?;
            let mut body = self.formula()?;
            for v in vars.into_iter().rev() {
                body = if ex {
                    Formula::Exists(v, Box::new(body))
                } else {
                    Formula::Forall(v, Box::new(body))
                };
            }
            return Ok(body);
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Formula> {
        if self.eat_word("true") {
            return Ok(Formula::True);
        }
        if self.eat_word("false") {
            return Ok(Formula::False);
        }
        if matches!(self.peek(), Tok::Sym("(")) {
            let save = self.pos;
            if let Ok(f) = self.comparison() {
                return Ok(f);
            }
            self.pos = save;
            self.advance();
            let f = self.formula()?;
            self.expect_sym(")")?;
            return Ok(f);
        }
        self.comparison()
    }

    fn comparison(&mut self) -> PResult<Formula> {
        let first = self.term()?;
        if self.eat_sym("|") {
            let d = match first.is_constant() {
                true => first.constant_part().clone(),
                false => return Err(self.error("divisor must be a constant")),
            };
            if d.is_zero() {
                return Err(self.error("divisor must be nonzero"));
            }
            let t = self.term()?;
            return Ok(Formula::divides(d, t));
        }
        let mut parts = Vec::new();
        let mut lhs = first;
        loop {
            let op = match self.peek() {
                Tok::Sym(s @ ("<=" | "<" | ">=" | ">" | "=" | "==" | "!=")) => *s,
                _ => break,
            };
            self.advance();
            let rhs = self.term()?;
            parts.push(match op {
                "<=" => Formula::le(&lhs, &rhs),
                "<" => Formula::lt(&lhs, &rhs),
                ">=" => Formula::ge(&lhs, &rhs),
                ">" => Formula::gt(&lhs, &rhs),
                "!=" => Formula::ne(&lhs, &rhs),
                _ => Formula::eq(&lhs, &rhs),
            });
            lhs = rhs;
        }
        if parts.is_empty() {
            return Err(self.unexpected("comparison operator"));
        }
        Ok(Formula::and(parts))
    }

    pub fn term(&mut self) -> PResult<LinearTerm> {
        let mut acc = if self.eat_sym("-") {
            self.product()?.negate()
        } else {
            self.product()?
        };
        loop {
            if self.eat_sym("+") {
                acc = acc.add(&self.product()?);
            } else if self.eat_sym("-") {
                acc = acc.sub(&self.product()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn product(&mut self) -> PResult<LinearTerm> {
        let mut acc = self.factor()?;
        while self.eat_sym("*") {
            let rhs = self.factor()?;
            acc = if acc.is_constant() {
                rhs.scale(acc.constant_part())
            } else if rhs.is_constant() {
                acc.scale(rhs.constant_part())
            } else {
                return Err(self.error("nonlinear product"));
            };
        }
        Ok(acc)
    }

    fn factor(&mut self) -> PResult<LinearTerm> {
        if self.eat_sym("-") {
            return Ok(self.factor()?.negate());
        }
        match self.peek().clone() {
            Tok::Num(n) => {
                self.advance();
                Ok(LinearTerm::constant(n))
            }
            Tok::Ident(s)
                if !KEYWORDS.contains(&s.as_str())
                    && !(self.ctl_mode && CTL_KEYWORDS.contains(&s.as_str())) =>
            {
                self.advance();
                Ok(LinearTerm::var(Var::new(&s)))
            }
            Tok::Sym("(") => {
                self.advance();
                let t = self.term()?;
                self.expect_sym(")")?;
                Ok(t)
            }
            _ => Err(self.unexpected("term")),
        }
    }

    // ----- CTL ------------------------------------------------------------

    pub fn ctl(&mut self) -> PResult<Ctl> {
        let was = self.ctl_mode;
        self.ctl_mode = true;
        let r = self.ctl_implies();
        self.ctl_mode = was;
        r
    }

    fn ctl_implies(&mut self) -> PResult<Ctl> {
        let lhs = self.ctl_or()?;
        if self.eat_sym("->") || self.eat_sym("=>") {
            let rhs = self.ctl_implies()?;
            return Ok(Ctl::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn ctl_or(&mut self) -> PResult<Ctl> {
        let mut acc = self.ctl_and()?;
        while self.eat_sym("||") {
            acc = Ctl::Or(Box::new(acc), Box::new(self.ctl_and()?));
        }
        Ok(acc)
    }

    fn ctl_and(&mut self) -> PResult<Ctl> {
        let mut acc = self.ctl_unary()?;
        while self.eat_sym("&&") {
            acc = Ctl::And(Box::new(acc), Box::new(self.ctl_unary()?));
        }
        Ok(acc)
    }

    fn ctl_until(&mut self) -> PResult<(Ctl, Ctl)> {
        self.expect_sym("[")?;
        let a = self.ctl_implies()?;
        self.expect_word("U")?;
        let b = self.ctl_implies()?;
        self.expect_sym("]")?;
        Ok((a, b))
    }

    fn ctl_unary(&mut self) -> PResult<Ctl> {
        if self.eat_sym("!") {
            return Ok(Ctl::Not(Box::new(self.ctl_unary()?)));
        }
        if let Tok::Ident(w) = self.peek().clone() {
            let unary: Option<fn(Box<Ctl>) -> Ctl> = match w.as_str() {
                "EX" => Some(Ctl::EX),
                "EF" => Some(Ctl::EF),
                "EG" => Some(Ctl::EG),
                "AX" => Some(Ctl::AX),
                "AF" => Some(Ctl::AF),
                "AG" => Some(Ctl::AG),
                _ => None,
            };
            if let Some(k) = unary {
                self.advance();
                return Ok(k(Box::new(self.ctl_unary()?)));
            }
            if w == "E" || w == "A" {
                self.advance();
                let (a, b) = self.ctl_until()?;
                return Ok(if w == "E" {
                    Ctl::EU(Box::new(a), Box::new(b))
                } else {
                    Ctl::AU(Box::new(a), Box::new(b))
                });
            }
        }
        if matches!(self.peek(), Tok::Sym("(")) {
            let save = self.pos;
            if let Ok(f) = self.comparison() {
                return Ok(Ctl::Prop(f));
            }
            self.pos = save;
            self.advance();
            let c = self.ctl_implies()?;
            self.expect_sym(")")?;
            return Ok(c);
        }
        if self.is_word("exists") || self.is_word("forall") {
            return Ok(Ctl::Prop(self.unary()?));
        }
        Ok(Ctl::Prop(self.primary()?))
    }
}

/// Parses a complete formula. Bound variables are standardized apart.
pub fn parse_formula(src: &str) -> Result<Formula, ParseError> {
    let mut p = Parser::new(src)?;
    let f = p.formula()?;
    p.expect_eof()?;
    Ok(f.standardize_apart())
}

/// Parses a complete surface CTL property.
pub fn parse_ctl(src: &str) -> Result<Ctl, ParseError> {
    let mut p = Parser::new(src)?;
    let f = p.ctl()?;
    p.expect_eof()?;
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ctl::CtlFormula;
    use alloc::format;

    #[test]
    fn formulas_round_trip() {
        for src in [
            "x >= 0 && x < 100",
            "0 < x && x < 5",
            "2 | x + 1",
            "exists y. (x = 2*y)",
            "!(x = 3) || y' = y + 1",
            "x <= 4 => (x >= 0 || q = 2)",
            "forall k. (k >= 0 => x >= 4 - k)",
        ] {
            let f = parse_formula(src).unwrap();
            let g = parse_formula(&format!("{f}")).unwrap();
            assert_eq!(f, g, "{src} printed as {f}");
        }
    }

    #[test]
    fn chained_and_parenthesized() {
        let a = parse_formula("0 <= x < 5").unwrap();
        let b = parse_formula("x >= 0 && x < 5").unwrap();
        assert_eq!(a, b);
        let c = parse_formula("(x + 1) * 2 <= 3").unwrap();
        assert_eq!(c, parse_formula("x <= 0").unwrap());
    }

    #[test]
    fn errors_have_positions() {
        let e = parse_formula("x <= \n  y *").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(parse_formula("x * y <= 1").is_err());
        assert!(parse_formula("x <= 1 )").is_err());
    }

    #[test]
    fn ctl_surface() {
        let p = parse_ctl("EG (x < 10)").unwrap().to_enf();
        assert!(matches!(p, CtlFormula::EG(_)));
        let u = parse_ctl("E [ (x > 0) U (x = 5) ]").unwrap().to_enf();
        assert!(matches!(u, CtlFormula::EU(..)));
        let n = parse_ctl("!EX x = 1 || x > 0 && x < 3").unwrap().to_enf();
        assert!(matches!(n, CtlFormula::Or(..)));
        let ag = parse_ctl("AG (x >= 0 -> EF x = 0)").unwrap().to_enf();
        assert!(matches!(ag, CtlFormula::Not(_)));
        // propositional combinations fold into one leaf
        let p = parse_ctl("x > 0 && !(y = 1)").unwrap().to_enf();
        assert!(matches!(p, CtlFormula::Prop(_)));
    }
}
