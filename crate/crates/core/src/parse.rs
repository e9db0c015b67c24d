//! Parser for the ASCII formula grammar.
//!
//! Precedence, loosest first: `->` (right-assoc), `-<` (left-assoc), `|`,
//! `&`, then the prefix quantifiers `forall x.` / `exists x.`, which scope
//! over the next unit only. Unicode connectives are accepted as synonyms.

use crate::syntax::{Formula, Signature, Term};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at offset {pos}")]
pub struct ParseError {
    pub pos: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected character {0:?}")]
    Lexical(char),
    #[error("expected {expected}, found {found}")]
    Unexpected { expected: &'static str, found: String },
    #[error("symbol {name} used with arity {used}, declared {declared}")]
    Arity { name: String, used: usize, declared: usize },
    #[error("undeclared predicate {0}")]
    UnknownPredicate(String),
    #[error("undeclared function {0}")]
    UnknownFunction(String),
    #[error("{0} is a keyword")]
    Keyword(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Dot,
    And,
    Or,
    Impl,
    Excl,
    Bot,
    Top,
    Forall,
    Exists,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier {s}"),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Comma => "','".into(),
            Tok::Dot => "'.'".into(),
            Tok::And => "'&'".into(),
            Tok::Or => "'|'".into(),
            Tok::Impl => "'->'".into(),
            Tok::Excl => "'-<'".into(),
            Tok::Bot => "bot".into(),
            Tok::Top => "top".into(),
            Tok::Forall => "forall".into(),
            Tok::Exists => "exists".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

pub(crate) fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

pub(crate) fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

const KEYWORDS: [&str; 4] = ["bot", "top", "forall", "exists"];

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if is_ident_start(c)) && cs.all(is_ident_char) && !KEYWORDS.contains(&s)
}

fn lex(text: &str, base: usize) -> Result<Vec<(usize, Tok)>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        let pos = pos + base;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let next = chars.get(i + 1).map(|&(_, c)| c);
        let single = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            '.' => Some(Tok::Dot),
            '&' | '∧' => Some(Tok::And),
            '|' | '∨' => Some(Tok::Or),
            '→' => Some(Tok::Impl),
            '≺' => Some(Tok::Excl),
            '⊥' => Some(Tok::Bot),
            '⊤' => Some(Tok::Top),
            '∀' => Some(Tok::Forall),
            '∃' => Some(Tok::Exists),
            _ => None,
        };
        if let Some(t) = single {
            out.push((pos, t));
            i += 1;
            continue;
        }
        if c == '-' && next == Some('>') {
            out.push((pos, Tok::Impl));
            i += 2;
            continue;
        }
        if c == '-' && next == Some('<') {
            out.push((pos, Tok::Excl));
            i += 2;
            continue;
        }
        if is_ident_start(c) {
            let mut j = i;
            while j < chars.len() && is_ident_char(chars[j].1) {
                j += 1;
            }
            let end = chars.get(j).map(|&(p, _)| p).unwrap_or(text.len());
            let word = &text[chars[i].0..end];
            let tok = match word {
                "bot" => Tok::Bot,
                "top" => Tok::Top,
                "forall" => Tok::Forall,
                "exists" => Tok::Exists,
                _ => Tok::Ident(word.to_string()),
            };
            out.push((pos, tok));
            i = j;
            continue;
        }
        return Err(ParseError { pos, kind: ParseErrorKind::Lexical(c) });
    }
    out.push((text.len() + base, Tok::Eof));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    at: usize,
    sig: SigMode<'a>,
    bound: Vec<String>,
}

enum SigMode<'a> {
    Strict(&'a Signature),
    Open(&'a mut Signature),
}

impl SigMode<'_> {
    fn sig(&self) -> &Signature {
        match self {
            SigMode::Strict(s) => s,
            SigMode::Open(s) => s,
        }
    }
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at.min(self.toks.len() - 1)].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at.min(self.toks.len() - 1)].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.peek().clone();
        self.at += 1;
        t
    }

    fn unexpected(&self, expected: &'static str) -> ParseError {
        ParseError {
            pos: self.pos(),
            kind: ParseErrorKind::Unexpected { expected, found: self.peek().describe() },
        }
    }

    fn expect(&mut self, t: Tok, expected: &'static str) -> Result<(), ParseError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(expected))
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.excl()?;
        if *self.peek() == Tok::Impl {
            self.bump();
            let rhs = self.formula()?;
            return Ok(Formula::imp(lhs, rhs));
        }
        Ok(lhs)
    }

    fn excl(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.or()?;
        while *self.peek() == Tok::Excl {
            self.bump();
            lhs = Formula::excl(lhs, self.or()?);
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.and()?;
        while *self.peek() == Tok::Or {
            self.bump();
            lhs = Formula::or(lhs, self.and()?);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unit()?;
        while *self.peek() == Tok::And {
            self.bump();
            lhs = Formula::and(lhs, self.unit()?);
        }
        Ok(lhs)
    }

    fn unit(&mut self) -> Result<Formula, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Bot => Ok(Formula::Bot),
            Tok::Top => Ok(Formula::Top),
            Tok::LParen => {
                let f = self.formula()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(f)
            }
            q @ (Tok::Forall | Tok::Exists) => {
                let x = match self.bump() {
                    Tok::Ident(x) => x,
                    _ => {
                        self.at -= 1;
                        return Err(self.unexpected("a bound variable"));
                    }
                };
                self.expect(Tok::Dot, "'.'")?;
                self.bound.push(x.clone());
                let body = self.unit();
                self.bound.pop();
                let body = body?;
                Ok(if q == Tok::Forall { Formula::forall(&x, body) } else { Formula::exists(&x, body) })
            }
            Tok::Ident(p) => {
                let args = if *self.peek() == Tok::LParen {
                    self.bump();
                    self.term_list()?
                } else {
                    Vec::new()
                };
                self.predicate(&p, args.len(), pos)?;
                Ok(Formula::Atom(p, args))
            }
            _ => {
                self.at -= 1;
                Err(self.unexpected("a formula"))
            }
        }
    }

    fn predicate(&mut self, p: &str, n: usize, pos: usize) -> Result<(), ParseError> {
        match self.sig.sig().predicates.get(p) {
            Some(&m) if m == n => Ok(()),
            Some(&m) => Err(ParseError { pos, kind: ParseErrorKind::Arity { name: p.into(), used: n, declared: m } }),
            None => match &mut self.sig {
                SigMode::Strict(_) => Err(ParseError { pos, kind: ParseErrorKind::UnknownPredicate(p.into()) }),
                SigMode::Open(s) => {
                    s.predicates.insert(p.to_string(), n);
                    Ok(())
                }
            },
        }
    }

    fn term_list(&mut self) -> Result<Vec<Term>, ParseError> {
        let mut args = Vec::new();
        if *self.peek() == Tok::RParen {
            self.bump();
            return Ok(args);
        }
        loop {
            args.push(self.term()?);
            match self.bump() {
                Tok::Comma => continue,
                Tok::RParen => return Ok(args),
                _ => {
                    self.at -= 1;
                    return Err(self.unexpected("',' or ')'"));
                }
            }
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let pos = self.pos();
        let name = match self.bump() {
            Tok::Ident(n) => n,
            t @ (Tok::Bot | Tok::Top | Tok::Forall | Tok::Exists) => {
                return Err(ParseError { pos, kind: ParseErrorKind::Keyword(t.describe()) })
            }
            _ => {
                self.at -= 1;
                return Err(self.unexpected("a term"));
            }
        };
        if *self.peek() == Tok::LParen {
            self.bump();
            let args = self.term_list()?;
            self.function(&name, args.len(), pos)?;
            return Ok(Term::App(name, args));
        }
        if self.bound.contains(&name) {
            return Ok(Term::Var(name));
        }
        match self.sig.sig().functions.get(&name) {
            Some(0) => Ok(Term::App(name, Vec::new())),
            Some(&m) => Err(ParseError { pos, kind: ParseErrorKind::Arity { name, used: 0, declared: m } }),
            None => Ok(Term::Var(name)),
        }
    }

    fn function(&mut self, f: &str, n: usize, pos: usize) -> Result<(), ParseError> {
        match self.sig.sig().functions.get(f) {
            Some(&m) if m == n => Ok(()),
            Some(&m) => Err(ParseError { pos, kind: ParseErrorKind::Arity { name: f.into(), used: n, declared: m } }),
            None => match &mut self.sig {
                SigMode::Strict(_) => Err(ParseError { pos, kind: ParseErrorKind::UnknownFunction(f.into()) }),
                SigMode::Open(s) => {
                    s.functions.insert(f.to_string(), n);
                    Ok(())
                }
            },
        }
    }
}

fn run(text: &str, base: usize, sig: SigMode<'_>) -> Result<Formula, ParseError> {
    let toks = lex(text, base)?;
    let mut p = Parser { toks, at: 0, sig, bound: Vec::new() };
    let f = p.formula()?;
    if *p.peek() != Tok::Eof {
        return Err(p.unexpected("end of input"));
    }
    Ok(f)
}

/// Parses against a fixed signature: every predicate and function symbol
/// must be declared. Bare identifiers are constants when declared as such
/// and variables otherwise.
pub fn parse_formula(text: &str, sig: &Signature) -> Result<Formula, ParseError> {
    run(text, 0, SigMode::Strict(sig))
}

/// Parses and extends `sig` with undeclared symbols, taking arities from
/// their first use. `c()` declares a constant.
pub fn parse_formula_open(text: &str, sig: &mut Signature) -> Result<Formula, ParseError> {
    run(text, 0, SigMode::Open(sig))
}

pub(crate) fn parse_formula_at(text: &str, base: usize, sig: &mut Signature) -> Result<Formula, ParseError> {
    run(text, base, SigMode::Open(sig))
}

pub(crate) fn parse_term_at(text: &str, base: usize, sig: &mut Signature) -> Result<Term, ParseError> {
    let toks = lex(text, base)?;
    let mut p = Parser { toks, at: 0, sig: SigMode::Open(sig), bound: Vec::new() };
    let t = p.term()?;
    if *p.peek() != Tok::Eof {
        return Err(p.unexpected("end of input"));
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn open(text: &str) -> Formula {
        parse_formula_open(text, &mut Signature::new()).unwrap()
    }

    #[test]
    fn simple_implication() {
        let x = || vec![Term::var("x")];
        assert_eq!(open("p(x) -> p(x)"), Formula::imp(Formula::atom("p", x()), Formula::atom("p", x())));
    }

    #[test]
    fn quantifier_shift_reads_as_intended() {
        let f = open("forall x.(p(x) | q) -> (forall x.p(x) | q)");
        let px = Formula::atom("p", vec![Term::var("x")]);
        let q = Formula::prop("q");
        let expected = Formula::imp(
            Formula::forall("x", Formula::or(px.clone(), q.clone())),
            Formula::or(Formula::forall("x", px), q),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn conjunction_binds_tighter_than_exclusion() {
        let f = open("p(x) -< q & r");
        let expected = Formula::excl(
            Formula::atom("p", vec![Term::var("x")]),
            Formula::and(Formula::prop("q"), Formula::prop("r")),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn associativity() {
        let (p, q, r) = (Formula::prop("p"), Formula::prop("q"), Formula::prop("r"));
        assert_eq!(open("p -> q -> r"), Formula::imp(p.clone(), Formula::imp(q.clone(), r.clone())));
        assert_eq!(open("p -< q -< r"), Formula::excl(Formula::excl(p.clone(), q.clone()), r.clone()));
        assert_eq!(open("p & q | r"), Formula::or(Formula::and(p, q), r));
    }

    #[test]
    fn constants_follow_signature() {
        let sig = Signature::new().with_predicate("p", 1).with_function("a", 0);
        assert_eq!(parse_formula("p(a)", &sig).unwrap(), Formula::atom("p", vec![Term::constant("a")]));
        assert_eq!(parse_formula("p(b)", &sig).unwrap(), Formula::atom("p", vec![Term::var("b")]));
        assert_eq!(
            parse_formula("forall a. p(a)", &sig).unwrap(),
            Formula::forall("a", Formula::atom("p", vec![Term::var("a")]))
        );
    }

    #[test]
    fn errors_carry_positions() {
        let sig = Signature::new().with_predicate("p", 1);
        let e = parse_formula("p(x, y)", &sig).unwrap_err();
        assert_eq!(e.pos, 0);
        assert!(matches!(e.kind, ParseErrorKind::Arity { .. }));
        let e = parse_formula("p(x) # q", &sig).unwrap_err();
        assert_eq!((e.pos, e.kind), (5, ParseErrorKind::Lexical('#')));
        let e = parse_formula("q", &sig).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnknownPredicate("q".into()));
        let e = parse_formula("p(x) &", &sig).unwrap_err();
        assert_eq!(e.pos, 6);
    }

    #[test]
    fn unicode_synonyms() {
        assert_eq!(open("∀x.(p(x) ∨ q) → ⊥"), open("forall x.(p(x) | q) -> bot"));
    }
}
