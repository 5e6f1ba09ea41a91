//! Concrete syntax.
//!
//! ```text
//! sterm   ::= x | \x.sterm | <sterm>[bag]
//! bag     ::= ε | sterm('^'n)? (',' sterm('^'n)?)*
//! comb    ::= '0' | summand (('+'|'-') summand)*
//! summand ::= (coeff '*')? sterm
//! coeff   ::= n | n/m
//!
//! aterm   ::= x | '(' aterm ')' | \x(:type)?.aterm | /\a.aterm
//!           | aterm '(' acomb ')' | aterm '{' type '}'
//! acomb   ::= '0' | (coeff '*')? aterm (('+'|'-') (coeff '*')? aterm)*
//! type    ::= a | type -> type | forall a. type | '(' type ')'
//! ```
//!
//! `λ`, `Λ`, `∀` and `→` are accepted for `\`, `/\`, `forall` and `->`. An
//! annotation type extends up to the `.` that ends the binder.

use num_bigint::BigUint;
use num_traits::Signed;

use crate::algebra::{LinComb, Natural, Rational, Semiring};
use crate::error::ParseError;
use crate::syntax::{Bag, Term};
use crate::sysf::{Context, TypeExpr};
use crate::taylor::{AlgComb, AlgTerm};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(BigUint),
    Lambda,
    TyLambda,
    Forall,
    Arrow,
    Dot,
    Colon,
    Lt,
    Gt,
    LBrack,
    RBrack,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Caret,
    Slash,
    Star,
    Plus,
    Minus,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier {s:?}"),
            Tok::Num(n) => format!("number {n}"),
            Tok::Lambda => "'\\'".into(),
            Tok::TyLambda => "'/\\'".into(),
            Tok::Forall => "'forall'".into(),
            Tok::Arrow => "'->'".into(),
            Tok::Dot => "'.'".into(),
            Tok::Colon => "':'".into(),
            Tok::Lt => "'<'".into(),
            Tok::Gt => "'>'".into(),
            Tok::LBrack => "'['".into(),
            Tok::RBrack => "']'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::LBrace => "'{'".into(),
            Tok::RBrace => "'}'".into(),
            Tok::Comma => "','".into(),
            Tok::Caret => "'^'".into(),
            Tok::Slash => "'/'".into(),
            Tok::Star => "'*'".into(),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Pos {
    line: usize,
    column: usize,
}

fn error(pos: Pos, message: impl Into<String>) -> ParseError {
    ParseError { line: pos.line, column: pos.column, message: message.into() }
}

fn lex(src: &str) -> Result<(Vec<(Tok, Pos)>, Pos), ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut line, mut column) = (1, 1);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column };
        let mut width = 1;
        let tok = match c {
            '\n' => {
                line += 1;
                column = 1;
                i += 1;
                continue;
            }
            c if c.is_whitespace() => None,
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i + width < chars.len() && {
                    let d = chars[i + width];
                    d.is_ascii_alphanumeric() || d == '_' || d == '\''
                } {
                    width += 1;
                }
                let word: String = chars[start..start + width].iter().collect();
                Some(if word == "forall" { Tok::Forall } else { Tok::Ident(word) })
            }
            c if c.is_ascii_digit() => {
                while i + width < chars.len() && chars[i + width].is_ascii_digit() {
                    width += 1;
                }
                let digits: String = chars[i..i + width].iter().collect();
                Some(Tok::Num(digits.parse().expect("digits")))
            }
            '\\' | 'λ' => Some(Tok::Lambda),
            'Λ' => Some(Tok::TyLambda),
            '∀' => Some(Tok::Forall),
            '→' => Some(Tok::Arrow),
            '/' if chars.get(i + 1) == Some(&'\\') => {
                width = 2;
                Some(Tok::TyLambda)
            }
            '-' if chars.get(i + 1) == Some(&'>') => {
                width = 2;
                Some(Tok::Arrow)
            }
            '.' => Some(Tok::Dot),
            ':' => Some(Tok::Colon),
            '<' => Some(Tok::Lt),
            '>' => Some(Tok::Gt),
            '[' => Some(Tok::LBrack),
            ']' => Some(Tok::RBrack),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            ',' => Some(Tok::Comma),
            '^' => Some(Tok::Caret),
            '/' => Some(Tok::Slash),
            '*' => Some(Tok::Star),
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            other => return Err(error(pos, format!("unexpected character {other:?}"))),
        };
        if let Some(tok) = tok {
            out.push((tok, pos));
        }
        i += width;
        column += width;
    }
    Ok((out, Pos { line, column }))
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    end: Pos,
    at: usize,
}

impl Parser {
    fn new(src: &str) -> Result<Parser, ParseError> {
        let (toks, end) = lex(src)?;
        Ok(Parser { toks, end, at: 0 })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(t, _)| t)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.at + 1).map(|(t, _)| t)
    }

    fn pos(&self) -> Pos {
        self.toks.get(self.at).map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        let found = match self.peek() {
            Some(t) => t.describe(),
            None => "end of input".to_string(),
        };
        error(self.pos(), format!("expected {wanted}, found {found}"))
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if self.eat(&tok) {
            Ok(())
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.at += 1;
                Ok(s)
            }
            _ => Err(self.unexpected("an identifier")),
        }
    }

    fn finish(&self) -> Result<(), ParseError> {
        if self.at < self.toks.len() {
            Err(self.unexpected("end of input"))
        } else {
            Ok(())
        }
    }

    fn number(&mut self) -> Result<BigUint, ParseError> {
        match self.peek() {
            Some(Tok::Num(n)) => {
                let n = n.clone();
                self.at += 1;
                Ok(n)
            }
            _ => Err(self.unexpected("a number")),
        }
    }

    fn sterm(&mut self) -> Result<Term, ParseError> {
        match self.peek() {
            Some(Tok::Ident(_)) => Ok(Term::var(&self.ident()?)),
            Some(Tok::Lambda) => {
                self.at += 1;
                let x = self.ident()?;
                self.expect(Tok::Dot)?;
                Ok(Term::abs(&x, self.sterm()?))
            }
            Some(Tok::Lt) => {
                self.at += 1;
                let head = self.sterm()?;
                self.expect(Tok::Gt)?;
                Ok(Term::app(head, self.bracketed_bag()?))
            }
            _ => Err(self.unexpected("a term")),
        }
    }

    fn bracketed_bag(&mut self) -> Result<Bag, ParseError> {
        self.expect(Tok::LBrack)?;
        let mut bag = Bag::one();
        if self.eat(&Tok::RBrack) {
            return Ok(bag);
        }
        loop {
            let t = self.sterm()?;
            let mult = if self.eat(&Tok::Caret) {
                let pos = self.pos();
                let n = self.number()?;
                usize::try_from(n).map_err(|_| error(pos, "multiplicity too large"))?
            } else {
                1
            };
            bag.insert(t, mult);
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(Tok::RBrack)?;
        Ok(bag)
    }

    /// `n` or `n/m`, with the sign applied by the caller.
    fn coeff(&mut self) -> Result<Rational, ParseError> {
        let num = self.number()?;
        if self.eat(&Tok::Slash) {
            let pos = self.pos();
            let den = self.number()?;
            if den.is_zero() {
                return Err(error(pos, "zero denominator"));
            }
            Ok(Rational::new(num.into(), den.into()))
        } else {
            Ok(Rational::from_integer(num.into()))
        }
    }

    /// Parses a signed sum of `(coeff '*')? item` summands, or `0`.
    fn sum<K: Ord>(
        &mut self,
        mut item: impl FnMut(&mut Self) -> Result<K, ParseError>,
        stop: Option<&Tok>,
    ) -> Result<Vec<(Rational, K, Pos)>, ParseError> {
        let is_zero = matches!(self.peek(), Some(Tok::Num(n)) if n.is_zero())
            && (self.peek2().is_none() || self.peek2() == stop);
        if is_zero {
            self.at += 1;
            return Ok(Vec::new());
        }
        let mut out = Vec::new();
        let mut negative = self.eat(&Tok::Minus);
        loop {
            let pos = self.pos();
            let mut c = if matches!(self.peek(), Some(Tok::Num(_))) {
                let c = self.coeff()?;
                self.expect(Tok::Star)?;
                c
            } else {
                Rational::one()
            };
            if negative {
                c = -c;
            }
            out.push((c, item(self)?, pos));
            if self.eat(&Tok::Plus) {
                negative = false;
            } else if self.eat(&Tok::Minus) {
                negative = true;
            } else {
                break;
            }
        }
        Ok(out)
    }

    fn ty(&mut self) -> Result<TypeExpr, ParseError> {
        let dom = match self.peek() {
            Some(Tok::Forall) => {
                self.at += 1;
                let a = self.ident()?;
                self.expect(Tok::Dot)?;
                return Ok(TypeExpr::forall(&a, self.ty()?));
            }
            Some(Tok::Ident(_)) => TypeExpr::var(&self.ident()?),
            Some(Tok::LParen) => {
                self.at += 1;
                let t = self.ty()?;
                self.expect(Tok::RParen)?;
                t
            }
            _ => return Err(self.unexpected("a type")),
        };
        if self.eat(&Tok::Arrow) {
            Ok(TypeExpr::arrow(dom, self.ty()?))
        } else {
            Ok(dom)
        }
    }

    fn aterm(&mut self) -> Result<AlgTerm, ParseError> {
        let mut head = match self.peek() {
            Some(Tok::Lambda) => {
                self.at += 1;
                let binder = self.ident()?;
                let ty = if self.eat(&Tok::Colon) { Some(self.ty()?) } else { None };
                self.expect(Tok::Dot)?;
                let body = self.aterm()?;
                return Ok(AlgTerm::Abs { binder, ty, body: Box::new(body) });
            }
            Some(Tok::TyLambda) => {
                self.at += 1;
                let tyvar = self.ident()?;
                self.expect(Tok::Dot)?;
                let body = self.aterm()?;
                return Ok(AlgTerm::TyAbs { tyvar, body: Box::new(body) });
            }
            Some(Tok::Ident(_)) => AlgTerm::Var(self.ident()?),
            Some(Tok::LParen) => {
                self.at += 1;
                let t = self.aterm()?;
                self.expect(Tok::RParen)?;
                t
            }
            _ => return Err(self.unexpected("a term")),
        };
        loop {
            if self.eat(&Tok::LParen) {
                let arg = self.acomb(Some(&Tok::RParen))?;
                self.expect(Tok::RParen)?;
                head = AlgTerm::App { fun: Box::new(head), arg };
            } else if self.eat(&Tok::LBrace) {
                let ty = self.ty()?;
                self.expect(Tok::RBrace)?;
                head = AlgTerm::TyApp { body: Box::new(head), ty };
            } else {
                return Ok(head);
            }
        }
    }

    fn acomb(&mut self, stop: Option<&Tok>) -> Result<AlgComb, ParseError> {
        let mut out = LinComb::zero();
        for (c, t, _) in self.sum(|p| p.aterm(), stop)? {
            out.add_term(c, t);
        }
        Ok(out)
    }
}

pub fn parse_term(src: &str) -> Result<Term, ParseError> {
    let mut p = Parser::new(src)?;
    let t = p.sterm()?;
    p.finish()?;
    Ok(t)
}

/// A bag in brackets, `[t1,...,tn]`.
pub fn parse_bag(src: &str) -> Result<Bag, ParseError> {
    let mut p = Parser::new(src)?;
    let b = p.bracketed_bag()?;
    p.finish()?;
    Ok(b)
}

/// A finite rational combination of simple terms.
pub fn parse_comb(src: &str) -> Result<LinComb<Rational, Term>, ParseError> {
    let mut p = Parser::new(src)?;
    let mut out = LinComb::zero();
    for (c, t, _) in p.sum(|p| p.sterm(), None)? {
        out.add_term(c, t);
    }
    p.finish()?;
    Ok(out)
}

/// A combination with natural coefficients; negative or fractional
/// coefficients are rejected.
pub fn parse_natural_comb(src: &str) -> Result<LinComb<Natural, Term>, ParseError> {
    let mut p = Parser::new(src)?;
    let summands = p.sum(|p| p.sterm(), None)?;
    p.finish()?;
    let mut out = LinComb::zero();
    for (c, t, pos) in summands {
        if !c.is_integer() || c.is_negative() {
            return Err(error(pos, format!("coefficient {c} is not a natural number")));
        }
        out.add_term(Natural::try_from(c.to_integer()).expect("non-negative"), t);
    }
    Ok(out)
}

pub fn parse_alg(src: &str) -> Result<AlgTerm, ParseError> {
    let mut p = Parser::new(src)?;
    let t = p.aterm()?;
    p.finish()?;
    Ok(t)
}

pub fn parse_alg_comb(src: &str) -> Result<AlgComb, ParseError> {
    let mut p = Parser::new(src)?;
    let c = p.acomb(None)?;
    p.finish()?;
    Ok(c)
}

pub fn parse_type(src: &str) -> Result<TypeExpr, ParseError> {
    let mut p = Parser::new(src)?;
    let t = p.ty()?;
    p.finish()?;
    Ok(t)
}

/// One `x : type` declaration per line; blank lines and lines starting with
/// `#` are skipped. A variable may be declared once.
pub fn parse_context(src: &str) -> Result<Context, ParseError> {
    let mut ctx = Context::new();
    for (n, line) in src.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let shift = |e: ParseError| ParseError { line: n + 1, ..e };
        let mut p = Parser::new(line).map_err(shift)?;
        let x = p.ident().map_err(shift)?;
        p.expect(Tok::Colon).map_err(shift)?;
        let ty = p.ty().map_err(shift)?;
        p.finish().map_err(shift)?;
        if ctx.contains_key(&x) {
            return Err(ParseError { line: n + 1, column: 1, message: format!("variable {x} declared twice") });
        }
        ctx.insert(x, ty);
    }
    Ok(ctx)
}
