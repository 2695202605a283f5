//! The input language: polynomial expressions and system files.
//!
//! A system file is line oriented. `#` starts a comment. Declaration lines
//! come first:
//!
//! ```text
//! funcs: u, v, w        # unknown functions of t
//! params: chi           # real parameters
//! order: 2              # optional, raises the jet order
//! prolong: 3            # optional, prolongation target
//! reduce: on            # optional, on by default
//! eq: t*v*u' - t*u + 1  # equation, implicitly = 0
//! eq: v' = w            # or with an explicit right-hand side
//! ineq: u > 0           # strict and weak inequalities, !=
//! ```
//!
//! Expressions use `+ - * ^` with integer exponents, integer and rational
//! literals (`3`, `1/2`), parentheses, and variable tokens: the independent
//! variable is always `t`, derivatives are written `u'`, `u''` or `D(u,k)`.

use std::sync::Arc;

use num_bigint::BigInt;

use crate::formula::Relation;
use crate::jet::{DifferentialSystem, JetError, RowSelection};
use crate::poly::{Poly, Rat, VariableId};

/// Syntax or validation error with a source position.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}, column {col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, col: usize, message: impl Into<String>) -> Self {
        ParseError { line, col, message: message.into() }
    }
}

/// Options read from a system file; command-line flags override them.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FileOptions {
    pub order: Option<u32>,
    pub prolong_to: Option<u32>,
    pub reduce: Option<bool>,
    pub rows: Option<RowSelection>,
}

/// A parsed system file.
#[derive(Debug, Clone)]
pub struct SystemFile {
    pub system: DifferentialSystem,
    pub options: FileOptions,
}

/// Declared variable names used to resolve identifiers.
#[derive(Debug, Clone, Default)]
pub struct VarTable {
    pub funcs: Vec<Arc<str>>,
    pub params: Vec<Arc<str>>,
}

impl VarTable {
    fn resolve(&self, name: &str, order: u32, line: usize, col: usize) -> Result<VariableId, ParseError> {
        if name == "t" {
            if order > 0 {
                return Err(ParseError::new(line, col, "`t` cannot carry a derivative"));
            }
            return Ok(VariableId::Time);
        }
        if let Some(alpha) = self.funcs.iter().position(|f| **f == *name) {
            return Ok(VariableId::Dependent {
                alpha: alpha as u32,
                order,
                name: self.funcs[alpha].clone(),
            });
        }
        if let Some(idx) = self.params.iter().position(|p| **p == *name) {
            if order > 0 {
                return Err(ParseError::new(line, col, format!("parameter `{name}` cannot carry a derivative")));
            }
            return Ok(VariableId::Parameter { name: self.params[idx].clone() });
        }
        Err(ParseError::new(line, col, format!("undeclared identifier `{name}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Ident(String, u32), // name with prime count
    Int(BigInt),
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
    LParen,
    RParen,
    Comma,
    Rel(Relation),
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

type Spanned = (Token, usize, usize);

impl<'a> Lexer<'a> {
    fn new(src: &'a str, line: usize) -> Self {
        Lexer { src: src.as_bytes(), pos: 0, line, col: 1 }
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError::new(self.line, self.col, message)
    }

    fn bump(&mut self) -> Option<u8> {
        let b = self.src.get(self.pos).copied()?;
        self.pos += 1;
        self.col += 1;
        Some(b)
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn tokens(mut self) -> Result<Vec<Spanned>, ParseError> {
        let mut out = Vec::new();
        while let Some(b) = self.peek() {
            let start_col = self.col;
            match b {
                b' ' | b'\t' => {
                    self.bump();
                }
                b'+' => {
                    self.bump();
                    out.push((Token::Plus, self.line, start_col));
                }
                b'-' => {
                    self.bump();
                    out.push((Token::Minus, self.line, start_col));
                }
                b'*' => {
                    self.bump();
                    out.push((Token::Star, self.line, start_col));
                }
                b'^' => {
                    self.bump();
                    out.push((Token::Caret, self.line, start_col));
                }
                b'/' => {
                    self.bump();
                    out.push((Token::Slash, self.line, start_col));
                }
                b'(' => {
                    self.bump();
                    out.push((Token::LParen, self.line, start_col));
                }
                b')' => {
                    self.bump();
                    out.push((Token::RParen, self.line, start_col));
                }
                b',' => {
                    self.bump();
                    out.push((Token::Comma, self.line, start_col));
                }
                b'=' => {
                    self.bump();
                    out.push((Token::Rel(Relation::Eq), self.line, start_col));
                }
                b'!' => {
                    self.bump();
                    if self.peek() == Some(b'=') {
                        self.bump();
                        out.push((Token::Rel(Relation::Ne), self.line, start_col));
                    } else {
                        return Err(self.error("expected `=` after `!`"));
                    }
                }
                b'<' => {
                    self.bump();
                    if self.peek() == Some(b'=') {
                        self.bump();
                        out.push((Token::Rel(Relation::Le), self.line, start_col));
                    } else {
                        out.push((Token::Rel(Relation::Lt), self.line, start_col));
                    }
                }
                b'>' => {
                    self.bump();
                    if self.peek() == Some(b'=') {
                        self.bump();
                        out.push((Token::Rel(Relation::Ge), self.line, start_col));
                    } else {
                        out.push((Token::Rel(Relation::Gt), self.line, start_col));
                    }
                }
                b'0'..=b'9' => {
                    let mut digits = Vec::new();
                    while let Some(d @ b'0'..=b'9') = self.peek() {
                        digits.push(d);
                        self.bump();
                    }
                    let text = String::from_utf8(digits).unwrap();
                    out.push((Token::Int(text.parse().unwrap()), self.line, start_col));
                }
                b'A'..=b'Z' | b'a'..=b'z' | b'_' => {
                    let mut name = Vec::new();
                    while let Some(c) = self.peek() {
                        if c.is_ascii_alphanumeric() || c == b'_' {
                            name.push(c);
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    let mut primes = 0u32;
                    while self.peek() == Some(b'\'') {
                        primes += 1;
                        self.bump();
                    }
                    out.push((
                        Token::Ident(String::from_utf8(name).unwrap(), primes),
                        self.line,
                        start_col,
                    ));
                }
                other => {
                    return Err(self.error(format!("unexpected character `{}`", other as char)));
                }
            }
        }
        Ok(out)
    }
}

struct ExprParser<'a> {
    tokens: &'a [Spanned],
    pos: usize,
    vars: &'a VarTable,
    line: usize,
}

impl<'a> ExprParser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(t, _, _)| t)
    }

    fn here(&self) -> (usize, usize) {
        self.tokens
            .get(self.pos)
            .or_else(|| self.tokens.last())
            .map(|(_, l, c)| (*l, *c))
            .unwrap_or((self.line, 1))
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        let (l, c) = self.here();
        ParseError::new(l, c, message)
    }

    fn bump(&mut self) -> Option<&Token> {
        let t = self.tokens.get(self.pos).map(|(t, _, _)| t);
        self.pos += 1;
        t
    }

    fn expect(&mut self, token: Token, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&token) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    fn expr(&mut self) -> Result<Poly, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Some(Token::Minus) => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Poly, ParseError> {
        let mut acc = self.factor()?;
        while self.peek() == Some(&Token::Star) {
            self.pos += 1;
            acc = &acc * &self.factor()?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Poly, ParseError> {
        if self.peek() == Some(&Token::Minus) {
            self.pos += 1;
            return Ok(-&self.factor()?);
        }
        let base = self.atom()?;
        if self.peek() == Some(&Token::Caret) {
            self.pos += 1;
            let (l, c) = self.here();
            match self.bump() {
                Some(Token::Int(n)) => {
                    let e: u32 = n
                        .try_into()
                        .map_err(|_| ParseError::new(l, c, "exponent out of range"))?;
                    return Ok(base.pow(e));
                }
                _ => return Err(ParseError::new(l, c, "expected an integer exponent")),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Poly, ParseError> {
        let (l, c) = self.here();
        match self.bump().cloned() {
            Some(Token::LParen) => {
                let inner = self.expr()?;
                self.expect(Token::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Token::Int(n)) => {
                // Rational literal: INT / INT.
                if self.peek() == Some(&Token::Slash) {
                    self.pos += 1;
                    let (l2, c2) = self.here();
                    match self.bump() {
                        Some(Token::Int(d)) if !d.eq(&BigInt::from(0)) => {
                            Ok(Poly::constant(Rat::new(n, d.clone())))
                        }
                        Some(Token::Int(_)) => {
                            Err(ParseError::new(l2, c2, "zero denominator"))
                        }
                        _ => Err(ParseError::new(l2, c2, "expected a denominator")),
                    }
                } else {
                    Ok(Poly::constant(Rat::from_integer(n)))
                }
            }
            Some(Token::Ident(name, primes)) => {
                if name == "D" && primes == 0 && self.peek() == Some(&Token::LParen) {
                    // D(u, k)
                    self.pos += 1;
                    let (l2, c2) = self.here();
                    let inner = match self.bump().cloned() {
                        Some(Token::Ident(f, 0)) => f,
                        _ => return Err(ParseError::new(l2, c2, "expected a function name")),
                    };
                    self.expect(Token::Comma, "`,`")?;
                    let (l3, c3) = self.here();
                    let order: u32 = match self.bump() {
                        Some(Token::Int(k)) => k
                            .try_into()
                            .map_err(|_| ParseError::new(l3, c3, "derivative order out of range"))?,
                        _ => return Err(ParseError::new(l3, c3, "expected a derivative order")),
                    };
                    self.expect(Token::RParen, "`)`")?;
                    Ok(Poly::var(self.vars.resolve(&inner, order, l2, c2)?))
                } else {
                    Ok(Poly::var(self.vars.resolve(&name, primes, l, c)?))
                }
            }
            _ => Err(ParseError::new(l, c, "expected an expression")),
        }
    }
}

/// Parses a polynomial expression against a variable table.
pub fn parse_poly(src: &str, vars: &VarTable) -> Result<Poly, ParseError> {
    parse_poly_at(src, vars, 1)
}

fn parse_poly_at(src: &str, vars: &VarTable, line: usize) -> Result<Poly, ParseError> {
    let tokens = Lexer::new(src, line).tokens()?;
    let mut p = ExprParser { tokens: &tokens, pos: 0, vars, line };
    let poly = p.expr()?;
    if p.pos != tokens.len() {
        return Err(p.error("trailing input after expression"));
    }
    Ok(poly)
}

/// `lhs REL rhs` normalized to `lhs - rhs REL 0`; the relation is optional
/// for equations.
fn parse_relational(
    src: &str,
    vars: &VarTable,
    line: usize,
) -> Result<(Poly, Option<Relation>), ParseError> {
    let tokens = Lexer::new(src, line).tokens()?;
    let mut p = ExprParser { tokens: &tokens, pos: 0, vars, line };
    let lhs = p.expr()?;
    match p.peek().cloned() {
        None => Ok((lhs, None)),
        Some(Token::Rel(rel)) => {
            p.pos += 1;
            let rhs = p.expr()?;
            if p.pos != tokens.len() {
                return Err(p.error("trailing input after relation"));
            }
            Ok((&lhs - &rhs, Some(rel)))
        }
        _ => Err(p.error("expected a relation or end of line")),
    }
}

fn split_names(value: &str, line: usize) -> Result<Vec<Arc<str>>, ParseError> {
    let mut out: Vec<Arc<str>> = Vec::new();
    for raw in value.split(|c: char| c == ',' || c.is_whitespace()) {
        let name = raw.trim();
        if name.is_empty() {
            continue;
        }
        if !name.chars().next().map(|c| c.is_ascii_alphabetic() || c == '_').unwrap_or(false)
            || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        {
            return Err(ParseError::new(line, 1, format!("invalid name `{name}`")));
        }
        if name == "t" || name == "D" {
            return Err(ParseError::new(line, 1, format!("`{name}` is reserved")));
        }
        if out.iter().any(|n| **n == *name) {
            return Err(ParseError::new(line, 1, format!("duplicate name `{name}`")));
        }
        out.push(Arc::from(name));
    }
    Ok(out)
}

/// Parses a complete system file.
pub fn parse_system(text: &str) -> Result<SystemFile, ParseError> {
    let mut vars = VarTable::default();
    let mut options = FileOptions::default();
    let mut equations: Vec<(Poly, usize)> = Vec::new();
    let mut inequalities: Vec<(Poly, Relation, usize)> = Vec::new();

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once(':') else {
            return Err(ParseError::new(line_no, 1, "expected `key: value`"));
        };
        let key = key.trim();
        let value = value.trim();
        match key {
            "funcs" => {
                if !vars.funcs.is_empty() {
                    return Err(ParseError::new(line_no, 1, "`funcs` given twice"));
                }
                vars.funcs = split_names(value, line_no)?;
            }
            "params" => {
                if !vars.params.is_empty() {
                    return Err(ParseError::new(line_no, 1, "`params` given twice"));
                }
                vars.params = split_names(value, line_no)?;
                if let Some(clash) = vars.params.iter().find(|p| vars.funcs.contains(p)) {
                    return Err(ParseError::new(
                        line_no,
                        1,
                        format!("`{clash}` is both a function and a parameter"),
                    ));
                }
            }
            "order" => {
                options.order = Some(parse_u32(value, line_no)?);
            }
            "prolong" => {
                options.prolong_to = Some(parse_u32(value, line_no)?);
            }
            "reduce" => {
                options.reduce = Some(parse_on_off(value, line_no)?);
            }
            "rows" => {
                options.rows = Some(match value {
                    "top" => RowSelection::TopOrderOnly,
                    "all" => RowSelection::All,
                    _ => return Err(ParseError::new(line_no, 1, "expected `top` or `all`")),
                });
            }
            "eq" => {
                if vars.funcs.is_empty() {
                    return Err(ParseError::new(line_no, 1, "`funcs` must be declared first"));
                }
                let (p, rel) = parse_relational(value, &vars, line_no)?;
                match rel {
                    None | Some(Relation::Eq) => equations.push((p, line_no)),
                    Some(other) => {
                        return Err(ParseError::new(
                            line_no,
                            1,
                            format!("`eq` lines take `=`, found `{other}`; use `ineq:`"),
                        ));
                    }
                }
            }
            "ineq" => {
                if vars.funcs.is_empty() {
                    return Err(ParseError::new(line_no, 1, "`funcs` must be declared first"));
                }
                let (p, rel) = parse_relational(value, &vars, line_no)?;
                match rel {
                    Some(Relation::Eq) | None => {
                        return Err(ParseError::new(line_no, 1, "`ineq` lines need `> >= < <= !=`"));
                    }
                    Some(rel) => inequalities.push((p, rel, line_no)),
                }
            }
            other => {
                return Err(ParseError::new(line_no, 1, format!("unknown key `{other}`")));
            }
        }
    }

    if vars.funcs.is_empty() {
        return Err(ParseError::new(1, 1, "no `funcs` declaration"));
    }
    if equations.is_empty() {
        return Err(ParseError::new(1, 1, "no equations"));
    }
    // The closure condition: an equation in t (or parameters) alone does not
    // define a differential equation.
    for (p, line_no) in &equations {
        let depends_on_funcs = p.vars().iter().any(|v| matches!(v, VariableId::Dependent { .. }));
        if !depends_on_funcs {
            return Err(ParseError::new(
                *line_no,
                1,
                "equation depends on no unknown function; the projection to the t-axis would not be dense",
            ));
        }
    }

    let max_order = equations
        .iter()
        .map(|(p, _)| p.max_order())
        .chain(inequalities.iter().map(|(q, _, _)| q.max_order()))
        .max()
        .unwrap_or(0);
    let order = match options.order {
        Some(declared) if declared < max_order => {
            return Err(ParseError::new(
                1,
                1,
                format!("declared order {declared} below the highest derivative {max_order}"),
            ));
        }
        Some(declared) => declared,
        None => max_order,
    };
    if order == 0 {
        return Err(ParseError::new(1, 1, "the system involves no derivative"));
    }

    let system = DifferentialSystem::new(
        vars.funcs.clone(),
        order,
        equations.into_iter().map(|(p, _)| p).collect(),
        inequalities.into_iter().map(|(p, r, _)| (p, r)).collect(),
        vars.params.clone(),
    )
    .map_err(|e: JetError| ParseError::new(1, 1, e.to_string()))?;

    Ok(SystemFile { system, options })
}

fn parse_u32(value: &str, line: usize) -> Result<u32, ParseError> {
    value.parse().map_err(|_| ParseError::new(line, 1, "expected a nonnegative integer"))
}

fn parse_on_off(value: &str, line: usize) -> Result<bool, ParseError> {
    match value {
        "on" => Ok(true),
        "off" => Ok(false),
        _ => Err(ParseError::new(line, 1, "expected `on` or `off`")),
    }
}
