//! Model files: structure equations `dφ^i` as signed two-generator monomials.
//!
//! ```text
//! # Iwasawa
//! n = 3
//! d1 = 0
//! d2 = 0
//! d3 = -12
//! ```
//!
//! A family declares `family t in disc(<radius>)` before its equations and may
//! use `t`, `tbar`, `t^k`, `tbar^k` in coefficients, e.g. `d3 = -12 - t*21'`.

use hdeform_core::models::{FamilySpec, FamilyTerm, Gen, Poly, StructureSpec, Term};
use hdeform_core::CatalogEntry;
use num_complex::Complex64;
use std::fmt;
use std::path::Path;

#[derive(Clone, Debug, PartialEq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    /// A number immediately followed by `i`, or a bare `i`.
    Imag(f64),
    T,
    TBar,
    /// Generator string such as `12'`; stored raw and split later.
    Mono(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    col: usize,
    text: String,
}

struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    /// Column of `chars[0]` in the original line (1-based).
    base: usize,
}

impl Lexer {
    fn new(src: &str, line: usize, base: usize) -> Self {
        Lexer {
            chars: src.chars().collect(),
            pos: 0,
            line,
            base,
        }
    }

    fn err(&self, col: usize, message: String) -> ParseError {
        ParseError {
            line: self.line,
            column: col,
            message,
        }
    }

    fn tokens(mut self) -> Result<Vec<Spanned>, ParseError> {
        let mut out = Vec::new();
        while self.pos < self.chars.len() {
            let c = self.chars[self.pos];
            let col = self.base + self.pos;
            if c.is_whitespace() {
                self.pos += 1;
                continue;
            }
            let single = match c {
                '+' => Some(Tok::Plus),
                '-' => Some(Tok::Minus),
                '*' => Some(Tok::Star),
                '^' => Some(Tok::Caret),
                '(' => Some(Tok::LParen),
                ')' => Some(Tok::RParen),
                _ => None,
            };
            if let Some(tok) = single {
                out.push(Spanned {
                    tok,
                    col,
                    text: c.to_string(),
                });
                self.pos += 1;
                continue;
            }
            if c.is_ascii_digit() || c == '.' {
                out.push(self.number_or_monomial(col)?);
                continue;
            }
            if c.is_ascii_alphabetic() {
                let start = self.pos;
                while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                let word: String = self.chars[start..self.pos].iter().collect();
                let tok = match word.as_str() {
                    "i" => Tok::Imag(1.0),
                    "t" => Tok::T,
                    "tbar" => Tok::TBar,
                    _ => return Err(self.err(col, format!("unexpected token '{word}'"))),
                };
                out.push(Spanned { tok, col, text: word });
                continue;
            }
            return Err(self.err(col, format!("unexpected character '{c}'")));
        }
        Ok(out)
    }

    /// A digit run followed by `.`, an exponent or `i` is a number; otherwise it
    /// is lexed as `Mono` and the parser reads it as an integer where a
    /// coefficient is expected.
    fn number_or_monomial(&mut self, col: usize) -> Result<Spanned, ParseError> {
        let start = self.pos;
        let at = |s: &Self, k: usize| s.chars.get(k).copied();
        let mut k = self.pos;
        while at(self, k).is_some_and(|c| c.is_ascii_digit()) {
            k += 1;
        }
        let is_float = at(self, k) == Some('.')
            || (at(self, k) == Some('e')
                && (at(self, k + 1).is_some_and(|c| c.is_ascii_digit())
                    || (matches!(at(self, k + 1), Some('+') | Some('-'))
                        && at(self, k + 2).is_some_and(|c| c.is_ascii_digit()))));
        if at(self, k) == Some('\'') || (!is_float && at(self, k) != Some('i')) {
            // monomial (possibly with bars), or a plain integer run
            let mut m = k;
            while let Some(c) = at(self, m) {
                if c.is_ascii_digit() || c == '\'' {
                    m += 1;
                } else {
                    break;
                }
            }
            self.pos = m;
            let text: String = self.chars[start..m].iter().collect();
            return Ok(Spanned {
                tok: Tok::Mono(text.clone()),
                col,
                text,
            });
        }
        if at(self, k) == Some('.') {
            k += 1;
            while at(self, k).is_some_and(|c| c.is_ascii_digit()) {
                k += 1;
            }
        }
        if at(self, k) == Some('e') {
            let mut e = k + 1;
            if matches!(at(self, e), Some('+') | Some('-')) {
                e += 1;
            }
            if at(self, e).is_some_and(|c| c.is_ascii_digit()) {
                while at(self, e).is_some_and(|c| c.is_ascii_digit()) {
                    e += 1;
                }
                k = e;
            }
        }
        let text: String = self.chars[start..k].iter().collect();
        let value: f64 = text
            .parse()
            .map_err(|_| self.err(col, format!("malformed number '{text}'")))?;
        self.pos = k;
        if at(self, k) == Some('i') && !at(self, k + 1).is_some_and(|c| c.is_ascii_alphanumeric()) {
            self.pos += 1;
            return Ok(Spanned {
                tok: Tok::Imag(value),
                col,
                text: format!("{text}i"),
            });
        }
        Ok(Spanned {
            tok: Tok::Num(value),
            col,
            text,
        })
    }
}

/// Recursive-descent parser over one right-hand side.
struct Rhs<'a> {
    toks: &'a [Spanned],
    pos: usize,
    line: usize,
    end_col: usize,
    family: bool,
}

impl<'a> Rhs<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |s| s.col)
    }

    fn err_here(&self, message: String) -> ParseError {
        ParseError {
            line: self.line,
            column: self.col(),
            message,
        }
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        match self.toks.get(self.pos) {
            Some(s) => self.err_here(format!("unexpected token '{}', expected {wanted}", s.text)),
            None => self.err_here(format!("unexpected end of line, expected {wanted}")),
        }
    }

    /// `sum := [sign] product (sign product)*`
    fn sum(&mut self) -> Result<Poly, ParseError> {
        let mut terms = Vec::new();
        let mut first = true;
        loop {
            let sign = match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    1.0
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    -1.0
                }
                _ if first => 1.0,
                _ => break,
            };
            first = false;
            let p = self.product()?;
            terms.extend(p.terms.into_iter().map(|(c, a, b)| (c * sign, a, b)));
        }
        Ok(Poly { terms })
    }

    /// `product := factor ('*' factor)*`
    fn product(&mut self) -> Result<Poly, ParseError> {
        let mut acc = self.factor()?;
        while self.peek() == Some(&Tok::Star) {
            self.pos += 1;
            acc = acc.mul(&self.factor()?);
        }
        Ok(acc)
    }

    fn exponent(&mut self) -> Result<u32, ParseError> {
        if self.peek() != Some(&Tok::Caret) {
            return Ok(1);
        }
        self.pos += 1;
        match self.toks.get(self.pos).map(|s| s.tok.clone()) {
            Some(Tok::Mono(s)) if !s.contains('\'') => {
                let v = s.parse().map_err(|_| self.err_here(format!("bad exponent '{s}'")))?;
                self.pos += 1;
                Ok(v)
            }
            _ => Err(self.unexpected("an integer exponent")),
        }
    }

    fn factor(&mut self) -> Result<Poly, ParseError> {
        let col = self.col();
        let tok = self.peek().cloned();
        let c = |re: f64, im: f64| Poly::constant(Complex64::new(re, im));
        match tok {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(c(v, 0.0))
            }
            Some(Tok::Imag(v)) => {
                self.pos += 1;
                Ok(c(0.0, v))
            }
            Some(Tok::Mono(s)) if !s.contains('\'') => {
                self.pos += 1;
                let v: f64 = s.parse().map_err(|_| self.err_here(format!("bad number '{s}'")))?;
                Ok(c(v, 0.0))
            }
            Some(Tok::T) | Some(Tok::TBar) => {
                if !self.family {
                    return Err(ParseError {
                        line: self.line,
                        column: col,
                        message: "'t' is only allowed after a 'family' declaration".into(),
                    });
                }
                self.pos += 1;
                let e = self.exponent()?;
                let (a, b) = if tok == Some(Tok::T) { (e, 0) } else { (0, e) };
                Ok(Poly {
                    terms: vec![(Complex64::new(1.0, 0.0), a, b)],
                })
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.sum()?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err(self.unexpected("')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            _ => Err(self.unexpected("a coefficient")),
        }
    }

    /// `rhs := '0' | term+`, `term := sign? (product '*')? monomial`
    fn equation(&mut self, n: usize) -> Result<Vec<FamilyTerm>, ParseError> {
        if self.toks.len() == 1 && self.toks[0].text == "0" {
            return Ok(Vec::new());
        }
        let mut out = Vec::new();
        let mut first = true;
        while self.pos < self.toks.len() {
            let sign = match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    1.0
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    -1.0
                }
                _ if first => 1.0,
                _ => return Err(self.unexpected("'+' or '-' between terms")),
            };
            first = false;
            // factors up to the last '*' before the monomial form the coefficient
            let mut coef = Poly::constant(Complex64::new(sign, 0.0));
            loop {
                if let Some(Tok::Mono(m)) = self.peek().cloned() {
                    let next = self.toks.get(self.pos + 1).map(|s| &s.tok);
                    if next != Some(&Tok::Star) && next != Some(&Tok::Caret) {
                        let col = self.col();
                        self.pos += 1;
                        let (a, b) = generators(&m, n, self.line, col)?;
                        out.push(FamilyTerm {
                            coef: collect_like(coef),
                            a,
                            b,
                        });
                        break;
                    }
                }
                let f = self.factor()?;
                coef = coef.mul(&f);
                if self.peek() != Some(&Tok::Star) {
                    return Err(self.unexpected("'*' followed by a monomial"));
                }
                self.pos += 1;
            }
        }
        if out.is_empty() {
            return Err(self.unexpected("a monomial or 0"));
        }
        Ok(out)
    }
}

/// Merges terms with equal exponents (first occurrence order) and drops zeros.
fn collect_like(p: Poly) -> Poly {
    let mut terms: Vec<(Complex64, u32, u32)> = Vec::new();
    for (c, a, b) in p.terms {
        match terms.iter_mut().find(|t| t.1 == a && t.2 == b) {
            Some(t) => t.0 += c,
            None => terms.push((c, a, b)),
        }
    }
    terms.retain(|t| t.0 != Complex64::new(0.0, 0.0));
    Poly { terms }
}

fn generators(m: &str, n: usize, line: usize, col: usize) -> Result<(Gen, Gen), ParseError> {
    let err = |off: usize, message: String| ParseError {
        line,
        column: col + off,
        message,
    };
    let chars: Vec<char> = m.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let d = chars[i];
        if d == '\'' {
            return Err(err(i, format!("stray quote in monomial '{m}'")));
        }
        let index = d.to_digit(10).unwrap_or(0) as usize;
        if index == 0 || index > n {
            return Err(err(i, format!("generator index {d} outside 1..={n} in '{m}'")));
        }
        let bar = chars.get(i + 1) == Some(&'\'');
        out.push(Gen { index, bar });
        i += if bar { 2 } else { 1 };
    }
    if out.len() != 2 {
        return Err(err(0, format!("monomial '{m}' must have exactly two generators")));
    }
    if out[0] == out[1] {
        return Err(err(0, format!("monomial '{m}' repeats a generator")));
    }
    Ok((out[0], out[1]))
}

/// Parses model-file text into a structure spec or a family.
pub fn parse_model(text: &str) -> Result<CatalogEntry, ParseError> {
    let mut n: Option<usize> = None;
    let mut radius: Option<f64> = None;
    let mut eqs: Vec<Option<Vec<FamilyTerm>>> = Vec::new();
    let mut last_line = 0;
    for (li, raw) in text.lines().enumerate() {
        let line = li + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let lead = content.len() - content.trim_start().len();
        let body = content.trim();
        let at = |col: usize, message: String| ParseError {
            line,
            column: col,
            message,
        };
        if let Some(rest) = body.strip_prefix("family") {
            if n.is_none() {
                return Err(at(lead + 1, "'family' must follow 'n = ...'".into()));
            }
            if eqs.iter().any(|e| e.is_some()) {
                return Err(at(lead + 1, "'family' must precede the equations".into()));
            }
            if radius.is_some() {
                return Err(at(lead + 1, "duplicate 'family' declaration".into()));
            }
            let rest = rest.trim();
            let inner = rest
                .strip_prefix("t")
                .map(str::trim)
                .and_then(|r| r.strip_prefix("in"))
                .map(str::trim)
                .and_then(|r| r.strip_prefix("disc("))
                .and_then(|r| r.strip_suffix(')'))
                .ok_or_else(|| at(lead + 1, "expected 'family t in disc(<radius>)'".into()))?;
            let r: f64 = inner
                .trim()
                .parse()
                .map_err(|_| at(lead + 1, format!("bad radius '{}'", inner.trim())))?;
            if !(r > 0.0) || !r.is_finite() {
                return Err(at(lead + 1, format!("radius must be positive, got {r}")));
            }
            radius = Some(r);
            continue;
        }
        let Some(eq_pos) = body.find('=') else {
            return Err(at(lead + 1, format!("expected a declaration, found '{body}'")));
        };
        let lhs = body[..eq_pos].trim();
        let rhs = &body[eq_pos + 1..];
        let rhs_col = lead + eq_pos + 2;
        if lhs == "n" {
            if n.is_some() {
                return Err(at(lead + 1, "duplicate declaration of n".into()));
            }
            let v: usize = rhs
                .trim()
                .parse()
                .map_err(|_| at(rhs_col + (rhs.len() - rhs.trim_start().len()), format!("bad dimension '{}'", rhs.trim())))?;
            if !(1..=9).contains(&v) {
                return Err(at(rhs_col, format!("n must be between 1 and 9, got {v}")));
            }
            n = Some(v);
            eqs = vec![None; v];
            continue;
        }
        let Some(idx) = lhs.strip_prefix('d') else {
            return Err(at(lead + 1, format!("unknown declaration '{lhs}'")));
        };
        let Some(nv) = n else {
            return Err(at(lead + 1, "equations must follow 'n = ...'".into()));
        };
        let i: usize = idx
            .parse()
            .map_err(|_| at(lead + 2, format!("bad equation index '{idx}'")))?;
        if i == 0 || i > nv {
            return Err(at(lead + 2, format!("equation index {i} outside 1..={nv}")));
        }
        if eqs[i - 1].is_some() {
            return Err(at(lead + 1, format!("duplicate equation for d{i}")));
        }
        let toks = Lexer::new(rhs, line, rhs_col).tokens()?;
        let mut p = Rhs {
            toks: &toks,
            pos: 0,
            line,
            end_col: lead + body.len() + 1,
            family: radius.is_some(),
        };
        eqs[i - 1] = Some(p.equation(nv)?);
    }
    let n = n.ok_or(ParseError {
        line: last_line.max(1),
        column: 1,
        message: "missing 'n = ...'".into(),
    })?;
    let mut equations = Vec::with_capacity(n);
    for (i, e) in eqs.into_iter().enumerate() {
        equations.push(e.ok_or(ParseError {
            line: last_line,
            column: 1,
            message: format!("missing equation for d{}", i + 1),
        })?);
    }
    let domain = |e: hdeform_core::Error| ParseError {
        line: last_line,
        column: 1,
        message: e.to_string(),
    };
    match radius {
        Some(r) => Ok(CatalogEntry::Family(FamilySpec::new(n, r, equations).map_err(domain)?)),
        None => {
            let eqs = equations
                .into_iter()
                .map(|eq| {
                    eq.into_iter()
                        .map(|ft| Term::new(ft.coef.eval(Complex64::new(0.0, 0.0)), ft.a, ft.b))
                        .collect()
                })
                .collect();
            Ok(CatalogEntry::Model(StructureSpec::new(n, eqs).map_err(domain)?))
        }
    }
}

#[derive(Debug)]
pub enum LoadError {
    Io(std::io::Error),
    Parse(ParseError),
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoadError::Io(e) => write!(f, "{e}"),
            LoadError::Parse(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for LoadError {}

pub fn parse_model_file(path: &Path) -> Result<CatalogEntry, LoadError> {
    let text = std::fs::read_to_string(path).map_err(LoadError::Io)?;
    parse_model(&text).map_err(LoadError::Parse)
}

/// Complex literal such as `0.5`, `-i`, `2i`, `1-0.5i`, `(1+2i)`.
pub fn parse_complex(s: &str) -> Result<Complex64, ParseError> {
    let toks = Lexer::new(s, 1, 1).tokens()?;
    let mut p = Rhs {
        toks: &toks,
        pos: 0,
        line: 1,
        end_col: s.len() + 1,
        family: false,
    };
    let poly = p.sum()?;
    if p.pos != toks.len() {
        return Err(p.unexpected("end of value"));
    }
    Ok(poly.eval(Complex64::new(0.0, 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use hdeform_core::catalog;

    fn model(text: &str) -> StructureSpec {
        match parse_model(text).unwrap() {
            CatalogEntry::Model(s) => s,
            CatalogEntry::Family(_) => panic!("expected a model"),
        }
    }

    #[test]
    fn iwasawa_file_matches_catalog() {
        let s = model("n = 3\nd1 = 0\nd2 = 0\nd3 = -12");
        assert_eq!(CatalogEntry::Model(s), catalog("iwasawa").unwrap());
    }

    #[test]
    fn torus_file() {
        assert_eq!(model("n = 2\nd1 = 0\nd2 = 0"), StructureSpec::torus(2));
    }

    #[test]
    fn bad_token_reports_line_and_column() {
        let e = parse_model("n = 3\nd1 = 0\nd2 = 0\nd3 = -1x").unwrap_err();
        assert_eq!(e.line, 4);
        assert_eq!(e.column, 8);
        assert!(e.message.contains('x'), "{}", e.message);
    }

    #[test]
    fn bars_coefficients_and_comments() {
        let s = model("# a comment\nn = 2\nd1 = 0   # trailing\nd2 = +1'2' + (1+2i)*12' - 2i*21 + 0.5*1'1\n");
        let eq = &s.equations[1];
        assert_eq!(eq.len(), 4);
        assert_eq!((eq[0].a, eq[0].b), (Gen::anti(1), Gen::anti(2)));
        assert_eq!(eq[1].coef, Complex64::new(1.0, 2.0));
        assert_eq!((eq[1].a, eq[1].b), (Gen::holo(1), Gen::anti(2)));
        assert_eq!(eq[2].coef, Complex64::new(0.0, -2.0));
        assert_eq!(eq[3].coef, Complex64::new(0.5, 0.0));
        assert_eq!((eq[3].a, eq[3].b), (Gen::anti(1), Gen::holo(1)));
    }

    #[test]
    fn family_polynomials() {
        let f = match parse_model("n = 3\nfamily t in disc(0.5)\nd1 = 0\nd2 = 0\nd3 = -12 - t*21' + 2*tbar^2*t*11'").unwrap() {
            CatalogEntry::Family(f) => f,
            _ => panic!(),
        };
        assert_eq!(f.radius, 0.5);
        let eq = &f.equations[2];
        assert_eq!(eq[1].coef.terms, vec![(Complex64::new(-1.0, 0.0), 1, 0)]);
        assert_eq!(eq[2].coef.terms, vec![(Complex64::new(2.0, 0.0), 1, 2)]);
    }

    #[test]
    fn canonical_text_round_trips() {
        for name in hdeform_core::models::catalog_names() {
            let entry = catalog(&name).unwrap();
            let text = match &entry {
                CatalogEntry::Model(s) => s.to_text(),
                CatalogEntry::Family(f) => f.to_text(),
            };
            assert_eq!(parse_model(&text).unwrap(), entry, "{name}:\n{text}");
        }
    }

    #[test]
    fn structural_errors() {
        let cases = [
            ("d1 = 0", 1, "follow"),
            ("n = 2\nd1 = 0\nd1 = 0\nd2 = 0", 3, "duplicate"),
            ("n = 2\nd1 = 0", 2, "missing equation for d2"),
            ("n = 2\nd3 = 0", 2, "outside"),
            ("n = 2\nd1 = 13\nd2 = 0", 2, "outside"),
            ("n = 2\nd1 = 11\nd2 = 0", 2, "repeats"),
            ("n = 2\nd1 = t*12\nd2 = 0", 2, "family"),
            ("n = 2\nd1 = 12 12\nd2 = 0", 2, "between terms"),
            ("n = 2\nd1 = 2*\nd2 = 0", 2, "end of line"),
            ("n = 2\nfamily t in disk(1)\nd1 = 0\nd2 = 0", 2, "disc"),
            ("n = 0", 1, "between"),
        ];
        for (text, line, needle) in cases {
            let e = parse_model(text).unwrap_err();
            assert_eq!(e.line, line, "{text}: {e}");
            assert!(e.message.contains(needle), "{text}: {e}");
        }
    }

    #[test]
    fn complex_literals() {
        assert_eq!(parse_complex("0.5").unwrap(), Complex64::new(0.5, 0.0));
        assert_eq!(parse_complex("-i").unwrap(), Complex64::new(0.0, -1.0));
        assert_eq!(parse_complex("1-0.25i").unwrap(), Complex64::new(1.0, -0.25));
        assert_eq!(parse_complex("(2e-1+3i)").unwrap(), Complex64::new(0.2, 3.0));
        assert_eq!(parse_complex("3").unwrap(), Complex64::new(3.0, 0.0));
        assert!(parse_complex("1+").is_err());
        assert!(parse_complex("t").is_err());
    }
}
