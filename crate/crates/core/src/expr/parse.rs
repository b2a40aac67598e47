use thiserror::Error;

use super::{rational_from_f64, Expr};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: expected {expected}, found {found}")]
    Syntax { offset: usize, expected: &'static str, found: String },
    #[error("more than one variable: `{first}` and `{second}` (offset {offset})")]
    MultipleVariables { first: String, second: String, offset: usize },
    #[error("exponent at offset {offset} is not a rational literal")]
    Exponent { offset: usize },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. }
            | ParseError::MultipleVariables { offset, .. }
            | ParseError::Exponent { offset } => *offset,
        }
    }
}

/// Parses an expression in which every identifier is the variable.
pub fn parse(source: &str) -> Result<Expr, ParseError> {
    parse_with(source, &[])
}

/// Parses an expression; identifiers listed in `constants` become named
/// constants, any other identifier is the variable.
pub fn parse_with(source: &str, constants: &[&str]) -> Result<Expr, ParseError> {
    let tokens = lex(source)?;
    let mut p = Parser { tokens, pos: 0, constants, variable: None };
    let e = p.expr()?;
    match p.peek() {
        (Tok::End, _) => Ok(e),
        (_, offset) => Err(p.unexpected(offset, "operator or end of input")),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\r' | b'\n' => {
                i += 1;
                continue;
            }
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text = &src[start..i];
                let v: f64 = text.parse().map_err(|_| ParseError::Syntax {
                    offset: start,
                    expected: "decimal literal",
                    found: format!("`{text}`"),
                })?;
                out.push((Tok::Num(v), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
                continue;
            }
            _ => {
                let ch = src[start..].chars().next().unwrap_or('?');
                return Err(ParseError::Syntax { offset: start, expected: "expression", found: format!("`{ch}`") });
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<(Tok, usize)>,
    pos: usize,
    constants: &'a [&'a str],
    variable: Option<String>,
}

impl Parser<'_> {
    fn peek(&self) -> (Tok, usize) {
        self.tokens[self.pos].clone()
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.peek();
        if t.0 != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, offset: usize, expected: &'static str) -> ParseError {
        let found = self
            .tokens
            .iter()
            .find(|(_, o)| *o == offset)
            .map_or_else(|| "end of input".to_string(), |(t, _)| t.describe());
        ParseError::Syntax { offset, expected, found }
    }

    fn expect(&mut self, tok: Tok, expected: &'static str) -> Result<(), ParseError> {
        let (t, offset) = self.bump();
        if t == tok {
            Ok(())
        } else {
            Err(ParseError::Syntax { offset, expected, found: t.describe() })
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek().0 {
                Tok::Plus => {
                    self.bump();
                    lhs = Expr::add(lhs, self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Expr::sub(lhs, self.term()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek().0 {
                Tok::Star => {
                    self.bump();
                    lhs = Expr::mul(lhs, self.unary()?);
                }
                Tok::Slash => {
                    self.bump();
                    lhs = Expr::div(lhs, self.unary()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek().0 == Tok::Minus {
            self.bump();
            return Ok(Expr::neg(self.unary()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if self.peek().0 != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let offset = self.peek().1;
        let exponent = match self.peek().0 {
            Tok::Minus => {
                self.bump();
                Expr::neg(self.exponent_atom()?)
            }
            _ => self.exponent_atom()?,
        };
        let k = self.rational(exponent, offset)?;
        Ok(Expr::pow(base, k))
    }

    fn exponent_atom(&mut self) -> Result<Expr, ParseError> {
        match self.bump() {
            (Tok::Num(v), _) => Ok(Expr::Num(v)),
            (Tok::LParen, _) => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            (t, offset) => Err(ParseError::Syntax { offset, expected: "rational exponent", found: t.describe() }),
        }
    }

    fn rational(&self, e: Expr, offset: usize) -> Result<super::Exponent, ParseError> {
        match e {
            Expr::Num(v) => rational_from_f64(v).ok_or(ParseError::Exponent { offset }),
            _ => Err(ParseError::Exponent { offset }),
        }
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let (tok, offset) = self.bump();
        match tok {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) if self.peek().0 == Tok::LParen => {
                self.bump();
                match name.as_str() {
                    "sqrt" => {
                        let arg = self.expr()?;
                        self.expect(Tok::RParen, "`)`")?;
                        Ok(Expr::sqrt(arg))
                    }
                    "pow" => {
                        let base = self.expr()?;
                        self.expect(Tok::Comma, "`,`")?;
                        let at = self.peek().1;
                        let exponent = self.expr()?;
                        self.expect(Tok::RParen, "`)`")?;
                        Ok(Expr::pow(base, self.rational(exponent, at)?))
                    }
                    _ => Err(ParseError::Syntax { offset, expected: "`sqrt` or `pow`", found: format!("`{name}`") }),
                }
            }
            Tok::Ident(name) => {
                if self.constants.contains(&name.as_str()) {
                    return Ok(Expr::Const(name));
                }
                match &self.variable {
                    Some(v) if *v != name => {
                        Err(ParseError::MultipleVariables { first: v.clone(), second: name, offset })
                    }
                    _ => {
                        self.variable = Some(name.clone());
                        Ok(Expr::Var(name))
                    }
                }
            }
            t => Err(ParseError::Syntax { offset, expected: "number, identifier or `(`", found: t.describe() }),
        }
    }
}
