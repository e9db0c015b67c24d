//! Terms, formulas and signatures of the object language.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Function and predicate symbols with their arities. Constants are
/// functions of arity zero.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    pub functions: BTreeMap<String, usize>,
    pub predicates: BTreeMap<String, usize>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_function(mut self, name: &str, arity: usize) -> Self {
        self.functions.insert(name.to_string(), arity);
        self
    }

    pub fn with_predicate(mut self, name: &str, arity: usize) -> Self {
        self.predicates.insert(name.to_string(), arity);
        self
    }

    pub fn constants(&self) -> impl Iterator<Item = &str> {
        self.functions
            .iter()
            .filter(|(_, &a)| a == 0)
            .map(|(n, _)| n.as_str())
    }

    pub fn is_constant(&self, name: &str) -> bool {
        self.functions.get(name) == Some(&0)
    }

    /// Position of a function symbol in the symbol order used for term
    /// enumeration.
    pub fn symbol_index(&self, name: &str) -> Option<usize> {
        self.functions.keys().position(|k| k == name)
    }

    /// Adds a constant if the signature has none; returns the constant used.
    pub fn ensure_constant(&mut self) -> String {
        if let Some(c) = self.constants().next() {
            return c.to_string();
        }
        let mut name = "c".to_string();
        let mut i = 0;
        while self.functions.contains_key(&name) || self.predicates.contains_key(&name) {
            i += 1;
            name = format!("c{i}");
        }
        self.functions.insert(name.clone(), 0);
        name
    }

    /// Merges the symbols occurring in `f` into the signature.
    pub fn absorb(&mut self, f: &Formula) {
        f.visit_atoms(&mut |p, ts| {
            self.predicates.entry(p.to_string()).or_insert(ts.len());
            for t in ts {
                t.visit_apps(&mut |g, n| {
                    self.functions.entry(g.to_string()).or_insert(n);
                });
            }
        });
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    App(String, Vec<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn constant(name: &str) -> Term {
        Term::App(name.to_string(), Vec::new())
    }

    pub fn app(name: &str, args: Vec<Term>) -> Term {
        Term::App(name.to_string(), args)
    }

    /// VT(t): the variables occurring in the term.
    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(x) => {
                out.insert(x.clone());
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::App(_, args) => args.iter().map(|a| a.depth() + 1).max().unwrap_or(0),
        }
    }

    pub fn subst(&self, t: &Term, x: &str) -> Term {
        match self {
            Term::Var(y) if y == x => t.clone(),
            Term::Var(_) => self.clone(),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| a.subst(t, x)).collect()),
        }
    }

    fn visit_apps(&self, g: &mut impl FnMut(&str, usize)) {
        if let Term::App(f, args) = self {
            g(f, args.len());
            args.iter().for_each(|a| a.visit_apps(g));
        }
    }
}

/// VT(t⃗) for a list of terms.
pub fn vt(ts: &[Term]) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for t in ts {
        t.collect_vars(&mut out);
    }
    out
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(x) => write!(f, "{x}"),
            Term::App(g, args) if args.is_empty() => write!(f, "{g}"),
            Term::App(g, args) => {
                write!(f, "{g}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Atom(String, Vec<Term>),
    Bot,
    Top,
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Impl(Box<Formula>, Box<Formula>),
    Excl(Box<Formula>, Box<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Connective {
    And,
    Or,
    Impl,
    Excl,
}

impl Formula {
    pub fn atom(p: &str, args: Vec<Term>) -> Formula {
        Formula::Atom(p.to_string(), args)
    }

    pub fn prop(p: &str) -> Formula {
        Formula::Atom(p.to_string(), Vec::new())
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn imp(a: Formula, b: Formula) -> Formula {
        Formula::Impl(Box::new(a), Box::new(b))
    }

    pub fn excl(a: Formula, b: Formula) -> Formula {
        Formula::Excl(Box::new(a), Box::new(b))
    }

    pub fn exists(x: &str, a: Formula) -> Formula {
        Formula::Exists(x.to_string(), Box::new(a))
    }

    pub fn forall(x: &str, a: Formula) -> Formula {
        Formula::Forall(x.to_string(), Box::new(a))
    }

    pub fn binary(&self) -> Option<(Connective, &Formula, &Formula)> {
        match self {
            Formula::And(a, b) => Some((Connective::And, a, b)),
            Formula::Or(a, b) => Some((Connective::Or, a, b)),
            Formula::Impl(a, b) => Some((Connective::Impl, a, b)),
            Formula::Excl(a, b) => Some((Connective::Excl, a, b)),
            _ => None,
        }
    }

    pub fn is_atom(&self) -> bool {
        matches!(self, Formula::Atom(..))
    }

    pub fn complexity(&self) -> usize {
        match self {
            Formula::Atom(..) | Formula::Bot | Formula::Top => 0,
            Formula::Exists(_, a) | Formula::Forall(_, a) => a.complexity() + 1,
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Impl(a, b) | Formula::Excl(a, b) => {
                a.complexity() + b.complexity() + 1
            }
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Formula::Atom(_, ts) => {
                for x in vt(ts) {
                    if !bound.contains(&x) {
                        out.insert(x);
                    }
                }
            }
            Formula::Bot | Formula::Top => {}
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Impl(a, b) | Formula::Excl(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Exists(x, a) | Formula::Forall(x, a) => {
                bound.push(x.clone());
                a.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    pub fn has_free(&self, x: &str) -> bool {
        self.free_vars().contains(x)
    }

    /// Every variable name occurring in the formula, bound or free.
    pub fn all_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_all(&mut out);
        out
    }

    fn collect_all(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Atom(_, ts) => ts.iter().for_each(|t| t.collect_vars(out)),
            Formula::Bot | Formula::Top => {}
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Impl(a, b) | Formula::Excl(a, b) => {
                a.collect_all(out);
                b.collect_all(out);
            }
            Formula::Exists(x, a) | Formula::Forall(x, a) => {
                out.insert(x.clone());
                a.collect_all(out);
            }
        }
    }

    pub fn has_exclusion(&self) -> bool {
        match self {
            Formula::Excl(..) => true,
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Impl(a, b) => a.has_exclusion() || b.has_exclusion(),
            Formula::Exists(_, a) | Formula::Forall(_, a) => a.has_exclusion(),
            _ => false,
        }
    }

    pub fn visit_atoms(&self, g: &mut impl FnMut(&str, &[Term])) {
        match self {
            Formula::Atom(p, ts) => g(p, ts),
            Formula::Bot | Formula::Top => {}
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Impl(a, b) | Formula::Excl(a, b) => {
                a.visit_atoms(g);
                b.visit_atoms(g);
            }
            Formula::Exists(_, a) | Formula::Forall(_, a) => a.visit_atoms(g),
        }
    }

    /// Capture-avoiding substitution φ(t/x).
    pub fn subst(&self, t: &Term, x: &str) -> Formula {
        match self {
            Formula::Atom(p, ts) => Formula::Atom(p.clone(), ts.iter().map(|s| s.subst(t, x)).collect()),
            Formula::Bot | Formula::Top => self.clone(),
            Formula::And(a, b) => Formula::and(a.subst(t, x), b.subst(t, x)),
            Formula::Or(a, b) => Formula::or(a.subst(t, x), b.subst(t, x)),
            Formula::Impl(a, b) => Formula::imp(a.subst(t, x), b.subst(t, x)),
            Formula::Excl(a, b) => Formula::excl(a.subst(t, x), b.subst(t, x)),
            Formula::Exists(y, a) | Formula::Forall(y, a) => {
                let rebuild = |y: String, a: Formula| match self {
                    Formula::Exists(..) => Formula::Exists(y, Box::new(a)),
                    _ => Formula::Forall(y, Box::new(a)),
                };
                if y == x || !a.has_free(x) {
                    return self.clone();
                }
                let tv = t.vars();
                if tv.contains(y) {
                    let mut avoid = a.free_vars();
                    avoid.extend(tv);
                    avoid.insert(x.to_string());
                    let y2 = fresh_name(y, &avoid);
                    let renamed = a.subst(&Term::Var(y2.clone()), y);
                    rebuild(y2, renamed.subst(t, x))
                } else {
                    rebuild(y.clone(), a.subst(t, x))
                }
            }
        }
    }

    /// Canonical representative of the α-equivalence class: bound variables
    /// are renamed by binding depth to names the parser cannot produce.
    pub fn alpha_normal(&self) -> Formula {
        self.normalize(&mut Vec::new())
    }

    fn normalize(&self, env: &mut Vec<(String, String)>) -> Formula {
        fn term(t: &Term, env: &[(String, String)]) -> Term {
            match t {
                Term::Var(x) => match env.iter().rev().find(|(o, _)| o == x) {
                    Some((_, n)) => Term::Var(n.clone()),
                    None => t.clone(),
                },
                Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| term(a, env)).collect()),
            }
        }
        match self {
            Formula::Atom(p, ts) => Formula::Atom(p.clone(), ts.iter().map(|t| term(t, env)).collect()),
            Formula::Bot | Formula::Top => self.clone(),
            Formula::And(a, b) => Formula::and(a.normalize(env), b.normalize(env)),
            Formula::Or(a, b) => Formula::or(a.normalize(env), b.normalize(env)),
            Formula::Impl(a, b) => Formula::imp(a.normalize(env), b.normalize(env)),
            Formula::Excl(a, b) => Formula::excl(a.normalize(env), b.normalize(env)),
            Formula::Exists(x, a) | Formula::Forall(x, a) => {
                let n = format!("%{}", env.len());
                env.push((x.clone(), n.clone()));
                let body = a.normalize(env);
                env.pop();
                match self {
                    Formula::Exists(..) => Formula::Exists(n, Box::new(body)),
                    _ => Formula::Forall(n, Box::new(body)),
                }
            }
        }
    }

    pub fn alpha_eq(&self, other: &Formula) -> bool {
        self == other || self.alpha_normal() == other.alpha_normal()
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Impl(..) => 1,
            Formula::Excl(..) => 2,
            Formula::Or(..) => 3,
            Formula::And(..) => 4,
            _ => 5,
        }
    }
}

/// Picks `base'N` with the smallest N ≥ 1 not in `avoid`. An existing
/// `'N` suffix on `base` is stripped first.
pub fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    let stem = match base.rfind('\'') {
        Some(i) if base[i + 1..].chars().all(|c| c.is_ascii_digit()) => &base[..i],
        _ => base,
    };
    (1..)
        .map(|i| format!("{stem}'{i}"))
        .find(|n| !avoid.contains(n))
        .expect("unbounded supply")
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(p, ts) => {
                write!(f, "{p}")?;
                if !ts.is_empty() {
                    write!(f, "(")?;
                    for (i, t) in ts.iter().enumerate() {
                        if i > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "{t}")?;
                    }
                    write!(f, ")")?;
                }
                Ok(())
            }
            Formula::Bot => write!(f, "bot"),
            Formula::Top => write!(f, "top"),
            Formula::Exists(x, a) | Formula::Forall(x, a) => {
                let q = if matches!(self, Formula::Exists(..)) { "exists" } else { "forall" };
                if a.precedence() < 5 {
                    write!(f, "{q} {x}. ({a})")
                } else {
                    write!(f, "{q} {x}. {a}")
                }
            }
            _ => {
                let (c, a, b) = self.binary().expect("binary");
                let (op, right_assoc) = match c {
                    Connective::And => ("&", false),
                    Connective::Or => ("|", false),
                    Connective::Impl => ("->", true),
                    Connective::Excl => ("-<", false),
                };
                let p = self.precedence();
                let lp = a.precedence() < p || (a.precedence() == p && right_assoc);
                let rp = b.precedence() < p || (b.precedence() == p && !right_assoc);
                if lp {
                    write!(f, "({a})")?;
                } else {
                    write!(f, "{a}")?;
                }
                write!(f, " {op} ")?;
                if rp {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(args: &[&str]) -> Formula {
        Formula::atom("p", args.iter().map(|a| Term::var(a)).collect())
    }

    #[test]
    fn complexity_counts_connectives_and_quantifiers() {
        assert_eq!(p(&["t"]).complexity(), 0);
        assert_eq!(Formula::forall("x", p(&["x"])).complexity(), 1);
        let f = Formula::imp(
            Formula::or(Formula::prop("p"), Formula::prop("q")),
            Formula::excl(Formula::prop("r"), Formula::prop("s")),
        );
        assert_eq!(f.complexity(), 3);
    }

    #[test]
    fn free_vars_respect_binders() {
        let f = Formula::forall("x", p(&["x", "y"]));
        assert_eq!(f.free_vars(), BTreeSet::from(["y".to_string()]));
        let g = Formula::and(
            Formula::atom("p", vec![Term::app("f", vec![Term::var("y"), Term::var("z")])]),
            Formula::exists("y", Formula::atom("q", vec![Term::var("y")])),
        );
        assert_eq!(g.free_vars(), BTreeSet::from(["y".to_string(), "z".to_string()]));
    }

    #[test]
    fn vt_of_terms() {
        assert!(Term::constant("a").vars().is_empty());
        let t = Term::app("f", vec![Term::var("y"), Term::app("g", vec![Term::var("z")])]);
        assert_eq!(t.vars(), BTreeSet::from(["y".to_string(), "z".to_string()]));
    }

    #[test]
    fn substitution_renames_only_on_capture() {
        let f = Formula::forall("y", p(&["x", "y"]));
        let g = f.subst(&Term::var("y"), "x");
        match &g {
            Formula::Forall(z, body) => {
                assert_ne!(z, "y");
                assert_eq!(**body, Formula::atom("p", vec![Term::var("y"), Term::var(z)]));
            }
            _ => panic!("expected a universal"),
        }
        let h = Formula::forall("y", p(&["x", "y"])).subst(&Term::var("z"), "x");
        assert_eq!(h, Formula::forall("y", p(&["z", "y"])));
    }

    #[test]
    fn identity_substitution() {
        let f = Formula::exists("y", Formula::and(p(&["x"]), p(&["y"])));
        assert!(f.subst(&Term::var("x"), "x").alpha_eq(&f));
    }

    #[test]
    fn alpha_equivalence() {
        let a = Formula::forall("x", p(&["x", "z"]));
        let b = Formula::forall("y", p(&["y", "z"]));
        let c = Formula::forall("z", p(&["z", "z"]));
        assert!(a.alpha_eq(&b));
        assert!(!a.alpha_eq(&c));
    }

    #[test]
    fn fresh_names_strip_suffix() {
        let avoid = BTreeSet::from(["x'1".to_string()]);
        assert_eq!(fresh_name("x", &avoid), "x'2");
        assert_eq!(fresh_name("x'1", &BTreeSet::new()), "x'1");
    }
}
