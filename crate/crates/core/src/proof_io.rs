//! Line-oriented proof serialization.
//!
//! ```text
//! constants: c
//! 0 implR ; principal=w: p -> p ; witnesses=label=u ; sequent=|- w: p -> p
//! 1 ax leaf ; principal=u: p ; witnesses=target=u ; sequent=R: w<u ; u: p |- u: p
//! ```
//!
//! Each node line starts with its depth; children follow their parent in
//! premise order. The `constants:` header lists the nullary function
//! symbols so that they are not read back as variables.

use crate::calculus::{Proof, RuleId, RuleInstance};
use crate::parse::{parse_term_at, ParseError};
use crate::sequent::{parse_sequent, Label, Lf, Sequent};
use crate::syntax::{Formula, Signature, Term};
use std::collections::BTreeSet;
use std::fmt::Write;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ProofParseError {
    pub line: usize,
    pub message: String,
}

fn collect_constants(t: &Term, out: &mut BTreeSet<String>) {
    if let Term::App(f, args) = t {
        if args.is_empty() {
            out.insert(f.clone());
        }
        args.iter().for_each(|a| collect_constants(a, out));
    }
}

fn formula_constants(f: &Formula, out: &mut BTreeSet<String>) {
    f.visit_atoms(&mut |_, ts| ts.iter().for_each(|t| collect_constants(t, out)));
}

/// Nullary function symbols occurring anywhere in the proof.
pub fn proof_constants(p: &Proof) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    p.visit(&mut |q| {
        for (_, lf) in q.conclusion.formulas() {
            formula_constants(&lf.formula, &mut out);
        }
        if let Some(lf) = &q.rule.principal {
            formula_constants(&lf.formula, &mut out);
        }
        if let Some(t) = &q.rule.term {
            collect_constants(t, &mut out);
        }
    });
    out
}

fn witnesses(r: &RuleInstance) -> String {
    let mut parts = Vec::new();
    if let Some(t) = &r.term {
        parts.push(format!("term={t}"));
    }
    if let Some(y) = &r.var {
        parts.push(format!("var={y}"));
    }
    if let Some(u) = &r.label {
        parts.push(format!("label={u}"));
    }
    if let Some(u) = &r.target {
        parts.push(format!("target={u}"));
    }
    parts.join(", ")
}

/// Renders a proof in the line format.
pub fn write_proof(p: &Proof) -> String {
    let consts: Vec<String> = proof_constants(p).into_iter().collect();
    let mut out = format!("constants: {}\n", consts.join(", "));
    fn go(p: &Proof, depth: usize, out: &mut String) {
        let leaf = if p.premises.is_empty() { " leaf" } else { "" };
        let principal = p.rule.principal.as_ref().map(|l| l.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{depth} {}{leaf} ; principal={principal} ; witnesses={} ; sequent={}",
            p.rule.rule,
            witnesses(&p.rule),
            p.conclusion
        );
        for q in &p.premises {
            go(q, depth + 1, out);
        }
    }
    go(p, 0, &mut out);
    out
}

struct Line {
    depth: usize,
    rule: RuleInstance,
    leaf: bool,
    sequent: Sequent,
}

fn parse_line(text: &str, line: usize, sig: &mut Signature) -> Result<Line, ProofParseError> {
    let err = |message: String| ProofParseError { line, message };
    let perr = |e: ParseError| err(e.to_string());
    let mut fields = text.splitn(4, " ; ");
    let head = fields.next().unwrap_or_default();
    let principal = fields.next().and_then(|f| f.strip_prefix("principal=")).ok_or_else(|| err("missing principal field".into()))?;
    let wits = fields.next().and_then(|f| f.strip_prefix("witnesses=")).ok_or_else(|| err("missing witnesses field".into()))?;
    let seq = fields.next().and_then(|f| f.strip_prefix("sequent=")).ok_or_else(|| err("missing sequent field".into()))?;
    let mut words = head.split_whitespace();
    let depth = words
        .next()
        .and_then(|d| d.parse().ok())
        .ok_or_else(|| err("line must start with a depth".into()))?;
    let rule: RuleId = words.next().ok_or_else(|| err("missing rule".into()))?.parse().map_err(err)?;
    let leaf = match words.next() {
        None => false,
        Some("leaf") => true,
        Some(w) => return Err(err(format!("unexpected {w}"))),
    };
    let sequent = parse_sequent(seq, sig).map_err(perr)?;
    let principal: Option<Lf> = if principal.is_empty() {
        None
    } else {
        let s = parse_sequent(&format!("{principal} |-"), sig).map_err(perr)?;
        match s.ante() {
            [lf] => Some(lf.clone()),
            _ => return Err(err(format!("bad principal {principal}"))),
        }
    };
    let mut inst = RuleInstance { rule, principal, term: None, var: None, label: None, target: None };
    if !wits.is_empty() {
        for part in split_witnesses(wits) {
            let (k, v) = part.split_once('=').ok_or_else(|| err(format!("bad witness {part}")))?;
            match k {
                "term" => inst.term = Some(parse_term_at(v, 0, sig).map_err(perr)?),
                "var" => inst.var = Some(v.to_string()),
                "label" => inst.label = Some(Label::new(v)),
                "target" => inst.target = Some(Label::new(v)),
                _ => return Err(err(format!("unknown witness {k}"))),
            }
        }
    }
    Ok(Line { depth, rule: inst, leaf, sequent })
}

/// Splits `term=f(x, y), label=u` at the commas that start a new key.
fn split_witnesses(s: &str) -> Vec<&str> {
    let keys = ["term=", "var=", "label=", "target="];
    let mut cuts = vec![0];
    for (i, _) in s.match_indices(", ") {
        if keys.iter().any(|k| s[i + 2..].starts_with(k)) {
            cuts.push(i);
        }
    }
    let mut out = Vec::new();
    for (j, &c) in cuts.iter().enumerate() {
        let start = if j == 0 { 0 } else { c + 2 };
        let end = cuts.get(j + 1).copied().unwrap_or(s.len());
        out.push(&s[start..end]);
    }
    out
}

/// Parses the line format back into a proof.
pub fn read_proof(text: &str) -> Result<Proof, ProofParseError> {
    let mut sig = Signature::new();
    let mut lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        if let Some(cs) = t.strip_prefix("constants:") {
            for c in cs.split(',').map(str::trim).filter(|c| !c.is_empty()) {
                sig.functions.insert(c.to_string(), 0);
            }
            continue;
        }
        lines.push((i + 1, t.to_string()));
    }
    let mut parsed = Vec::new();
    for (n, t) in &lines {
        parsed.push((*n, parse_line(t, *n, &mut sig)?));
    }
    if parsed.is_empty() {
        return Err(ProofParseError { line: 0, message: "no proof lines".into() });
    }
    let mut at = 0;
    let p = build(&mut parsed, &mut at, 0)?;
    if at != parsed.len() {
        return Err(ProofParseError { line: parsed[at].0, message: "more than one root".into() });
    }
    Ok(p)
}

fn build(lines: &mut Vec<(usize, Line)>, at: &mut usize, depth: usize) -> Result<Proof, ProofParseError> {
    let (n, line) = &lines[*at];
    if line.depth != depth {
        return Err(ProofParseError { line: *n, message: format!("expected depth {depth}") });
    }
    let (n, leaf, conclusion, rule) = (*n, line.leaf, line.sequent.clone(), line.rule.clone());
    *at += 1;
    let mut premises = Vec::new();
    while *at < lines.len() && lines[*at].1.depth > depth {
        premises.push(build(lines, at, depth + 1)?);
    }
    if leaf != premises.is_empty() {
        return Err(ProofParseError { line: n, message: "leaf flag does not match the premises".into() });
    }
    Ok(Proof { conclusion, rule, premises })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{check_proof, premises, Variant};

    #[test]
    fn round_trip_is_exact() {
        let mut sig = Signature::new().with_function("c", 0);
        let s0 = parse_sequent("|- w: exists x. p(x, f(c)) | q", &mut sig).unwrap();
        let i0 = RuleInstance::new(RuleId::OrR, s0.succ()[0].clone());
        let s1 = premises(&s0, &i0, Variant::Cd).unwrap().remove(0);
        let lf = s1.succ().iter().find(|l| matches!(l.formula, Formula::Exists(..))).unwrap().clone();
        let i1 = RuleInstance::new(RuleId::ExistsR, lf).term(Term::app("g", vec![Term::var("y"), Term::constant("c")]));
        let s2 = premises(&s1, &i1, Variant::Cd).unwrap().remove(0);
        let p = Proof::node(s0, i0, vec![Proof::node(s1, i1, vec![Proof::leaf(s2, RuleInstance::new(RuleId::TopR, Lf::new("w", Formula::Top)))])]);
        let text = write_proof(&p);
        let back = read_proof(&text).unwrap();
        assert_eq!(back, p);
        assert_eq!(write_proof(&back), text);
        assert!(text.starts_with("constants: c\n"));
    }

    #[test]
    fn cd_example_round_trips_and_checks() {
        let p = crate::calculus::tests::cd_example();
        let back = read_proof(&write_proof(&p)).unwrap();
        assert_eq!(back, p);
        assert_eq!(check_proof(&back, Variant::Cd), Ok(()));
    }

    #[test]
    fn malformed_input_reports_lines() {
        let e = read_proof("constants:\n0 bogus ; principal= ; witnesses= ; sequent=|- w: top").unwrap_err();
        assert_eq!(e.line, 2);
        let e = read_proof("0 topR ; principal=w: top ; witnesses= ; sequent=|- w: top").unwrap_err();
        assert!(e.message.contains("leaf"));
    }
}
