//! Formula parsing for both layers.
//!
//! DL layer: `phi := 'T' | ident | '!' phi | phi '&' phi
//!                 | 'some' ident '.' phi | '(' phi ')'`
//! FO layer: `phi := 'T' | ident '(' var (',' var)* ')' | var '!=' var
//!                 | '!' phi | phi '&' phi | 'ex' var '.' phi | '(' phi ')'`
//!
//! `&` is left-associative, `!` binds tightest, and quantifier bodies
//! extend as far right as possible. Variables are `x1, x2, ...`.

use thiserror::Error;

use super::dl::DlFormula;
use super::fo::{FoFormula, Var};
use super::Formula;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FormulaLayer {
    Dl,
    Fo,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("syntax error at column {col}: {msg}")]
pub struct ParseFormulaError {
    pub col: usize,
    pub msg: String,
}

pub fn parse_formula(text: &str, layer: FormulaLayer) -> Result<Formula, ParseFormulaError> {
    match layer {
        FormulaLayer::Dl => parse_dl(text).map(Formula::Dl),
        FormulaLayer::Fo => parse_fo(text).map(Formula::Fo),
    }
}

pub fn parse_dl(text: &str) -> Result<DlFormula, ParseFormulaError> {
    let mut parser = Parser::new(text)?;
    let phi = parser.dl_conj()?;
    parser.expect_end()?;
    Ok(phi)
}

pub fn parse_fo(text: &str) -> Result<FoFormula, ParseFormulaError> {
    let mut parser = Parser::new(text)?;
    let phi = parser.fo_conj()?;
    parser.expect_end()?;
    Ok(phi)
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Bang,
    Amp,
    Dot,
    Neq,
    LParen,
    RParen,
    Comma,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Bang => "`!`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Neq => "`!=`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
        }
    }
}

struct Parser {
    /// Tokens with their 1-based starting columns; `end` is the column just
    /// past the input, used for "unexpected end" errors.
    toks: Vec<(Tok, usize)>,
    end: usize,
    idx: usize,
}

fn lex(text: &str) -> Result<(Vec<(Tok, usize)>, usize), ParseFormulaError> {
    let mut toks = Vec::new();
    let mut col = 1usize;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let start = col;
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            chars.next();
            col += 1;
        };
        match c {
            c if c.is_whitespace() => bump(&mut chars),
            '&' => {
                bump(&mut chars);
                toks.push((Tok::Amp, start));
            }
            '.' => {
                bump(&mut chars);
                toks.push((Tok::Dot, start));
            }
            '(' => {
                bump(&mut chars);
                toks.push((Tok::LParen, start));
            }
            ')' => {
                bump(&mut chars);
                toks.push((Tok::RParen, start));
            }
            ',' => {
                bump(&mut chars);
                toks.push((Tok::Comma, start));
            }
            '!' => {
                bump(&mut chars);
                if chars.peek() == Some(&'=') {
                    bump(&mut chars);
                    toks.push((Tok::Neq, start));
                } else {
                    toks.push((Tok::Bang, start));
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut ident = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        ident.push(c);
                        bump(&mut chars);
                    } else {
                        break;
                    }
                }
                toks.push((Tok::Ident(ident), start));
            }
            other => {
                return Err(ParseFormulaError {
                    col: start,
                    msg: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    Ok((toks, col))
}

impl Parser {
    fn new(text: &str) -> Result<Self, ParseFormulaError> {
        let (toks, end) = lex(text)?;
        Ok(Parser { toks, end, idx: 0 })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|(t, _)| t)
    }

    fn col(&self) -> usize {
        self.toks.get(self.idx).map_or(self.end, |(_, c)| *c)
    }

    fn error(&self, msg: impl Into<String>) -> ParseFormulaError {
        ParseFormulaError {
            col: self.col(),
            msg: msg.into(),
        }
    }

    fn unexpected(&self, wanted: &str) -> ParseFormulaError {
        match self.peek() {
            Some(tok) => self.error(format!("expected {wanted}, found {}", tok.describe())),
            None => self.error(format!("expected {wanted}, found end of input")),
        }
    }

    fn expect(&mut self, tok: Tok, wanted: &str) -> Result<(), ParseFormulaError> {
        if self.peek() == Some(&tok) {
            self.idx += 1;
            Ok(())
        } else {
            Err(self.unexpected(wanted))
        }
    }

    fn expect_end(&self) -> Result<(), ParseFormulaError> {
        match self.peek() {
            None => Ok(()),
            Some(tok) => Err(self.error(format!("unexpected trailing {}", tok.describe()))),
        }
    }

    /// An identifier that is not a keyword, for relation-name positions.
    fn relation_name(&mut self) -> Result<String, ParseFormulaError> {
        match self.peek() {
            Some(Tok::Ident(s)) if !matches!(s.as_str(), "T" | "some" | "ex") => {
                let name = s.clone();
                self.idx += 1;
                Ok(name)
            }
            _ => Err(self.unexpected("a relation name")),
        }
    }

    // DL layer -------------------------------------------------------------

    fn dl_conj(&mut self) -> Result<DlFormula, ParseFormulaError> {
        let mut phi = self.dl_unary()?;
        while self.peek() == Some(&Tok::Amp) {
            self.idx += 1;
            phi = DlFormula::and(phi, self.dl_unary()?);
        }
        Ok(phi)
    }

    fn dl_unary(&mut self) -> Result<DlFormula, ParseFormulaError> {
        match self.peek() {
            Some(Tok::Bang) => {
                self.idx += 1;
                Ok(DlFormula::not(self.dl_unary()?))
            }
            Some(Tok::LParen) => {
                self.idx += 1;
                let phi = self.dl_conj()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(phi)
            }
            Some(Tok::Ident(s)) => match s.as_str() {
                "T" => {
                    self.idx += 1;
                    Ok(DlFormula::top())
                }
                "some" => {
                    self.idx += 1;
                    let relation = self.relation_name()?;
                    self.expect(Tok::Dot, "`.`")?;
                    Ok(DlFormula::exists(relation, self.dl_conj()?))
                }
                "ex" => Err(self.error("`ex` quantifies variables; use the FO layer")),
                _ => {
                    let name = s.clone();
                    self.idx += 1;
                    Ok(DlFormula::atom(name))
                }
            },
            _ => Err(self.unexpected("a formula")),
        }
    }

    // FO layer -------------------------------------------------------------

    fn variable(&mut self) -> Result<Var, ParseFormulaError> {
        let err = || "a variable like `x1`".to_string();
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let digits = s.strip_prefix('x').unwrap_or("");
                if digits.is_empty() || digits.starts_with('0') || !digits.bytes().all(|b| b.is_ascii_digit()) {
                    return Err(self.unexpected(&err()));
                }
                let index: u32 = digits
                    .parse()
                    .map_err(|_| self.error("variable index out of range"))?;
                self.idx += 1;
                Ok(Var::new(index))
            }
            _ => Err(self.unexpected(&err())),
        }
    }

    fn fo_conj(&mut self) -> Result<FoFormula, ParseFormulaError> {
        let mut phi = self.fo_unary()?;
        while self.peek() == Some(&Tok::Amp) {
            self.idx += 1;
            phi = FoFormula::and(phi, self.fo_unary()?);
        }
        Ok(phi)
    }

    fn fo_unary(&mut self) -> Result<FoFormula, ParseFormulaError> {
        match self.peek() {
            Some(Tok::Bang) => {
                self.idx += 1;
                Ok(FoFormula::not(self.fo_unary()?))
            }
            Some(Tok::LParen) => {
                self.idx += 1;
                let phi = self.fo_conj()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(phi)
            }
            Some(Tok::Ident(s)) => match s.as_str() {
                "T" => {
                    self.idx += 1;
                    Ok(FoFormula::top())
                }
                "ex" => {
                    self.idx += 1;
                    let var = self.variable()?;
                    self.expect(Tok::Dot, "`.`")?;
                    Ok(FoFormula::exists(var, self.fo_conj()?))
                }
                "some" => Err(self.error("`some` is DL syntax; use `ex x2 . ...`")),
                _ => {
                    // Either `name(vars)` or the left side of `var != var`.
                    if self.toks.get(self.idx + 1).map(|(t, _)| t) == Some(&Tok::LParen) {
                        let name = s.clone();
                        self.idx += 2;
                        let mut vars = vec![self.variable()?];
                        while self.peek() == Some(&Tok::Comma) {
                            self.idx += 1;
                            vars.push(self.variable()?);
                        }
                        self.expect(Tok::RParen, "`)`")?;
                        Ok(FoFormula::rel_atom(name, vars))
                    } else {
                        let lhs = self.variable()?;
                        self.expect(Tok::Neq, "`!=`")?;
                        Ok(FoFormula::neq(lhs, self.variable()?))
                    }
                }
            },
            _ => Err(self.unexpected("a formula")),
        }
    }
}
