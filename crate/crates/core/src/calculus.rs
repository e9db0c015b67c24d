//! Rule schemas, bottom-up rule application and the proof checker.

use crate::sequent::{Dom, Label, Lf, Rel, Sequent, Side, Violation};
use crate::syntax::{fresh_name, vt, Formula, Term};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    /// Increasing domains.
    Id,
    /// Constant domains: no (ds), instantiation with any term.
    Cd,
    /// Increasing domains without (ds).
    IdNoDs,
}

impl Variant {
    pub fn has_ds(self) -> bool {
        self == Variant::Id
    }

    pub fn checks_availability(self) -> bool {
        self != Variant::Cd
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Id => "id",
            Variant::Cd => "cd",
            Variant::IdNoDs => "id-no-ds",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "id" => Ok(Variant::Id),
            "cd" => Ok(Variant::Cd),
            "id-no-ds" => Ok(Variant::IdNoDs),
            _ => Err(format!("unknown variant {s} (expected id, cd or id-no-ds)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleId {
    Ax,
    BotL,
    TopR,
    Ds,
    AndL,
    AndR,
    OrL,
    OrR,
    ImplL,
    ImplR,
    ExclL,
    ExclR,
    ExistsL,
    ExistsR,
    ForallL,
    ForallR,
    Cut,
}

impl RuleId {
    pub const ALL: [RuleId; 17] = [
        RuleId::Ax,
        RuleId::BotL,
        RuleId::TopR,
        RuleId::Ds,
        RuleId::AndL,
        RuleId::AndR,
        RuleId::OrL,
        RuleId::OrR,
        RuleId::ImplL,
        RuleId::ImplR,
        RuleId::ExclL,
        RuleId::ExclR,
        RuleId::ExistsL,
        RuleId::ExistsR,
        RuleId::ForallL,
        RuleId::ForallR,
        RuleId::Cut,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RuleId::Ax => "ax",
            RuleId::BotL => "botL",
            RuleId::TopR => "topR",
            RuleId::Ds => "ds",
            RuleId::AndL => "andL",
            RuleId::AndR => "andR",
            RuleId::OrL => "orL",
            RuleId::OrR => "orR",
            RuleId::ImplL => "implL",
            RuleId::ImplR => "implR",
            RuleId::ExclL => "exclL",
            RuleId::ExclR => "exclR",
            RuleId::ExistsL => "existsL",
            RuleId::ExistsR => "existsR",
            RuleId::ForallL => "forallL",
            RuleId::ForallR => "forallR",
            RuleId::Cut => "cut",
        }
    }

    /// Side of the conclusion holding the principal formula.
    pub fn side(self) -> Side {
        match self {
            RuleId::TopR
            | RuleId::AndR
            | RuleId::OrR
            | RuleId::ImplR
            | RuleId::ExclR
            | RuleId::ExistsR
            | RuleId::ForallR => Side::Right,
            _ => Side::Left,
        }
    }

    pub fn is_initial(self) -> bool {
        matches!(self, RuleId::Ax | RuleId::BotL | RuleId::TopR)
    }

    /// Rules whose principal formula is copied into the premises.
    pub fn keeps_principal(self) -> bool {
        matches!(
            self,
            RuleId::Ds | RuleId::ImplL | RuleId::ExclR | RuleId::ExistsR | RuleId::ForallL
        )
    }

    pub fn arity(self) -> usize {
        match self {
            RuleId::Ax | RuleId::BotL | RuleId::TopR => 0,
            RuleId::AndR | RuleId::OrL | RuleId::ImplL | RuleId::ExclR | RuleId::Cut => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RuleId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        RuleId::ALL
            .iter()
            .copied()
            .find(|r| r.name() == s)
            .ok_or_else(|| format!("unknown rule {s}"))
    }
}

/// A rule together with its principal formula and witnesses.
///
/// For `ax` the principal is the antecedent atom and `target` the label of
/// the matching consequent atom. For `cut` the principal is the cut formula
/// at the left label and `target` the right label.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RuleInstance {
    pub rule: RuleId,
    pub principal: Option<Lf>,
    pub term: Option<Term>,
    pub var: Option<String>,
    pub label: Option<Label>,
    pub target: Option<Label>,
}

impl RuleInstance {
    pub fn new(rule: RuleId, principal: Lf) -> RuleInstance {
        RuleInstance { rule, principal: Some(principal), term: None, var: None, label: None, target: None }
    }

    pub fn term(mut self, t: Term) -> Self {
        self.term = Some(t);
        self
    }

    pub fn var(mut self, y: &str) -> Self {
        self.var = Some(y.to_string());
        self
    }

    pub fn label(mut self, u: &Label) -> Self {
        self.label = Some(u.clone());
        self
    }

    pub fn target(mut self, u: &Label) -> Self {
        self.target = Some(u.clone());
        self
    }

    pub fn principal(&self) -> &Lf {
        self.principal.as_ref().expect("rule instance without principal")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("{0} is not a rule of variant {1}")]
    NotInVariant(RuleId, Variant),
    #[error("rule {0} needs a principal formula")]
    MissingPrincipal(RuleId),
    #[error("principal {0} not found on the {1:?} side")]
    PrincipalNotFound(Lf, Side),
    #[error("rule {0} does not apply to {1}")]
    WrongShape(RuleId, Formula),
    #[error("rule {0} needs a {1} witness")]
    MissingWitness(RuleId, &'static str),
    #[error("{1} is not reachable from {0}")]
    NotReachable(Label, Label),
    #[error("label {0} is not fresh")]
    LabelNotFresh(Label),
    #[error("variable {0} is not fresh")]
    VarNotFresh(String),
    #[error("term {0} is not available at {1}")]
    NotAvailable(Term, Label),
    #[error("no matching atom {0} in the consequent")]
    NoMatchingAtom(Lf),
    #[error("unknown label {0}")]
    UnknownLabel(Label),
}

fn need<T: Clone>(x: &Option<T>, rule: RuleId, what: &'static str) -> Result<T, RuleError> {
    x.clone().ok_or(RuleError::MissingWitness(rule, what))
}

/// The premises of `inst` applied bottom-up to `s`.
pub fn premises(s: &Sequent, inst: &RuleInstance, variant: Variant) -> Result<Vec<Sequent>, RuleError> {
    let rule = inst.rule;
    if rule == RuleId::Ds && !variant.has_ds() {
        return Err(RuleError::NotInVariant(rule, variant));
    }
    let p = inst.principal.clone().ok_or(RuleError::MissingPrincipal(rule))?;
    let labels = s.labels();
    let reach = |a: &Label, b: &Label| -> Result<(), RuleError> {
        if !labels.contains(a) {
            return Err(RuleError::UnknownLabel(a.clone()));
        }
        if !labels.contains(b) {
            return Err(RuleError::UnknownLabel(b.clone()));
        }
        if s.reachable(a, b) {
            Ok(())
        } else {
            Err(RuleError::NotReachable(a.clone(), b.clone()))
        }
    };
    let fresh_label = |u: &Label| {
        if labels.contains(u) {
            Err(RuleError::LabelNotFresh(u.clone()))
        } else {
            Ok(())
        }
    };
    let fresh_var = |y: &str| {
        if s.free_vars().contains(y) {
            Err(RuleError::VarNotFresh(y.to_string()))
        } else {
            Ok(())
        }
    };
    let available = |t: &Term, u: &Label| {
        if !variant.checks_availability() || s.is_available(t, u).unwrap_or(false) {
            Ok(())
        } else {
            Err(RuleError::NotAvailable(t.clone(), u.clone()))
        }
    };
    if rule == RuleId::Cut {
        let u = need(&inst.target, rule, "target label")?;
        reach(&p.label, &u)?;
        return Ok(vec![
            s.clone().with(Side::Right, p.clone()),
            s.clone().with(Side::Left, Lf::at(&u, p.formula)),
        ]);
    }
    let side = rule.side();
    if !s.contains(side, &p) {
        return Err(RuleError::PrincipalNotFound(p, side));
    }
    let w = p.label.clone();
    let shape = || RuleError::WrongShape(rule, p.formula.clone());
    let mut rest = s.clone();
    if !rule.keeps_principal() {
        rest.remove(side, &p);
    }
    let one = |f: &dyn Fn(&mut Sequent)| {
        let mut t = rest.clone();
        f(&mut t);
        t
    };
    let out = match (rule, &p.formula) {
        (RuleId::Ax, Formula::Atom(..)) => {
            let u = need(&inst.target, rule, "target label")?;
            let right = Lf::at(&u, p.formula.clone());
            if !s.succ().contains(&right) {
                return Err(RuleError::NoMatchingAtom(right));
            }
            reach(&w, &u)?;
            vec![]
        }
        (RuleId::BotL, Formula::Bot) | (RuleId::TopR, Formula::Top) => vec![],
        (RuleId::Ds, Formula::Atom(_, ts)) => vec![one(&|t| {
            for x in vt(ts) {
                t.add_dom(Dom { label: w.clone(), var: x });
            }
        })],
        (RuleId::AndL, Formula::And(a, b)) | (RuleId::OrR, Formula::Or(a, b)) => vec![one(&|t| {
            t.add(side, Lf::at(&w, (**a).clone()));
            t.add(side, Lf::at(&w, (**b).clone()));
        })],
        (RuleId::AndR, Formula::And(a, b)) | (RuleId::OrL, Formula::Or(a, b)) => vec![
            one(&|t| t.add(side, Lf::at(&w, (**a).clone()))),
            one(&|t| t.add(side, Lf::at(&w, (**b).clone()))),
        ],
        (RuleId::ImplL, Formula::Impl(a, b)) => {
            let u = need(&inst.target, rule, "target label")?;
            reach(&w, &u)?;
            vec![
                one(&|t| t.add_succ(Lf::at(&u, (**a).clone()))),
                one(&|t| t.add_ante(Lf::at(&u, (**b).clone()))),
            ]
        }
        (RuleId::ExclR, Formula::Excl(a, b)) => {
            let v = need(&inst.target, rule, "target label")?;
            reach(&v, &w)?;
            vec![
                one(&|t| t.add_succ(Lf::at(&v, (**a).clone()))),
                one(&|t| t.add_ante(Lf::at(&v, (**b).clone()))),
            ]
        }
        (RuleId::ImplR, Formula::Impl(a, b)) | (RuleId::ExclL, Formula::Excl(a, b)) => {
            let u = need(&inst.label, rule, "fresh label")?;
            fresh_label(&u)?;
            let edge = if rule == RuleId::ImplR {
                Rel { from: w.clone(), to: u.clone() }
            } else {
                Rel { from: u.clone(), to: w.clone() }
            };
            vec![one(&|t| {
                t.add_rel(edge.clone());
                t.add_ante(Lf::at(&u, (**a).clone()));
                t.add_succ(Lf::at(&u, (**b).clone()));
            })]
        }
        (RuleId::ExistsL, Formula::Exists(x, a)) => {
            let y = need(&inst.var, rule, "fresh variable")?;
            fresh_var(&y)?;
            vec![one(&|t| {
                t.add_dom(Dom { label: w.clone(), var: y.clone() });
                t.add_ante(Lf::at(&w, a.subst(&Term::Var(y.clone()), x)));
            })]
        }
        (RuleId::ExistsR, Formula::Exists(x, a)) => {
            let tm = need(&inst.term, rule, "term")?;
            available(&tm, &w)?;
            vec![one(&|t| t.add_succ(Lf::at(&w, a.subst(&tm, x))))]
        }
        (RuleId::ForallL, Formula::Forall(x, a)) => {
            let u = need(&inst.target, rule, "target label")?;
            let tm = need(&inst.term, rule, "term")?;
            reach(&w, &u)?;
            available(&tm, &u)?;
            vec![one(&|t| t.add_ante(Lf::at(&u, a.subst(&tm, x))))]
        }
        (RuleId::ForallR, Formula::Forall(x, a)) => {
            let u = need(&inst.label, rule, "fresh label")?;
            let y = need(&inst.var, rule, "fresh variable")?;
            fresh_label(&u)?;
            fresh_var(&y)?;
            vec![one(&|t| {
                t.add_rel(Rel { from: w.clone(), to: u.clone() });
                t.add_dom(Dom { label: u.clone(), var: y.clone() });
                t.add_succ(Lf::at(&u, a.subst(&Term::Var(y.clone()), x)));
            })]
        }
        _ => return Err(shape()),
    };
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Proof {
    pub conclusion: Sequent,
    pub rule: RuleInstance,
    pub premises: Vec<Proof>,
}

impl Proof {
    pub fn leaf(conclusion: Sequent, rule: RuleInstance) -> Proof {
        Proof { conclusion, rule, premises: Vec::new() }
    }

    /// Builds a node whose premises are given as proofs.
    pub fn node(conclusion: Sequent, rule: RuleInstance, premises: Vec<Proof>) -> Proof {
        Proof { conclusion, rule, premises }
    }

    pub fn height(&self) -> usize {
        1 + self.premises.iter().map(Proof::height).max().unwrap_or(0)
    }

    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(Proof::size).sum::<usize>()
    }

    pub fn has_cut(&self) -> bool {
        self.rule.rule == RuleId::Cut || self.premises.iter().any(Proof::has_cut)
    }

    /// How often each rule occurs.
    pub fn rule_counts(&self) -> BTreeMap<RuleId, usize> {
        let mut out = BTreeMap::new();
        self.visit(&mut |p| *out.entry(p.rule.rule).or_insert(0) += 1);
        out
    }

    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Proof)) {
        f(self);
        self.premises.iter().for_each(|p| p.visit(f));
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("at node {path:?}: {kind}")]
pub struct CheckError {
    /// Premise indices leading from the root to the offending node.
    pub path: Vec<usize>,
    pub kind: CheckErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckErrorKind {
    #[error("invalid sequent: {0}")]
    Invalid(Violation),
    #[error("{0}")]
    Rule(RuleError),
    #[error("cut is not allowed here")]
    CutNotAllowed,
    #[error("expected {expected} premises, found {found}")]
    PremiseCount { expected: usize, found: usize },
    #[error("premise {index} should be `{expected}` but is `{found}`")]
    PremiseMismatch { index: usize, expected: Box<Sequent>, found: Box<Sequent> },
}

/// Checks a cut-free proof.
pub fn check_proof(p: &Proof, variant: Variant) -> Result<(), CheckError> {
    check_proof_with(p, variant, false)
}

/// Checks a proof, accepting cut nodes when `allow_cut` is set.
pub fn check_proof_with(p: &Proof, variant: Variant, allow_cut: bool) -> Result<(), CheckError> {
    let mut path = Vec::new();
    check_node(p, variant, allow_cut, &mut path)
}

fn check_node(p: &Proof, variant: Variant, allow_cut: bool, path: &mut Vec<usize>) -> Result<(), CheckError> {
    let err = |path: &Vec<usize>, kind| Err(CheckError { path: path.clone(), kind });
    if let Err(v) = p.conclusion.validate() {
        return err(path, CheckErrorKind::Invalid(v));
    }
    if p.rule.rule == RuleId::Cut && !allow_cut {
        return err(path, CheckErrorKind::CutNotAllowed);
    }
    let expected = match premises(&p.conclusion, &p.rule, variant) {
        Ok(ps) => ps,
        Err(e) => return err(path, CheckErrorKind::Rule(e)),
    };
    if expected.len() != p.premises.len() {
        return err(path, CheckErrorKind::PremiseCount { expected: expected.len(), found: p.premises.len() });
    }
    for (i, (e, q)) in expected.iter().zip(&p.premises).enumerate() {
        if !e.alpha_eq(&q.conclusion) {
            return err(
                path,
                CheckErrorKind::PremiseMismatch {
                    index: i,
                    expected: Box::new(e.clone()),
                    found: Box::new(q.conclusion.clone()),
                },
            );
        }
    }
    for (i, q) in p.premises.iter().enumerate() {
        path.push(i);
        check_node(q, variant, allow_cut, path)?;
        path.pop();
    }
    Ok(())
}

/// Every rule instance whose side conditions hold on `s`. Quantifier
/// instantiation terms are left empty; fresh names are chosen
/// deterministically.
pub fn applicable(s: &Sequent, variant: Variant) -> Vec<RuleInstance> {
    let reach = s.reach();
    let labels = s.labels();
    let all_vars = s.all_vars();
    let fresh_label = Sequent::fresh_label("u", &labels);
    let mut out: Vec<RuleInstance> = Vec::new();
    let mut push = |i: RuleInstance| {
        if !out.contains(&i) {
            out.push(i);
        }
    };
    for lf in s.ante() {
        let w = &lf.label;
        let base = RuleInstance::new(RuleId::Ax, lf.clone());
        match &lf.formula {
            Formula::Atom(_, ts) => {
                for r in s.succ() {
                    if r.formula == lf.formula && reach.reachable(w, &r.label) {
                        push(base.clone().target(&r.label));
                    }
                }
                if variant.has_ds() && !vt(ts).is_empty() {
                    push(RuleInstance::new(RuleId::Ds, lf.clone()));
                }
            }
            Formula::Bot => push(RuleInstance::new(RuleId::BotL, lf.clone())),
            Formula::And(..) => push(RuleInstance::new(RuleId::AndL, lf.clone())),
            Formula::Or(..) => push(RuleInstance::new(RuleId::OrL, lf.clone())),
            Formula::Impl(..) => {
                for u in reach.from(w) {
                    push(RuleInstance::new(RuleId::ImplL, lf.clone()).target(&u));
                }
            }
            Formula::Excl(..) => push(RuleInstance::new(RuleId::ExclL, lf.clone()).label(&fresh_label)),
            Formula::Exists(x, _) => {
                push(RuleInstance::new(RuleId::ExistsL, lf.clone()).var(&fresh_name(x, &all_vars)))
            }
            Formula::Forall(..) => {
                for u in reach.from(w) {
                    push(RuleInstance::new(RuleId::ForallL, lf.clone()).target(&u));
                }
            }
            Formula::Top => {}
        }
    }
    for lf in s.succ() {
        let w = &lf.label;
        match &lf.formula {
            Formula::Top => push(RuleInstance::new(RuleId::TopR, lf.clone())),
            Formula::And(..) => push(RuleInstance::new(RuleId::AndR, lf.clone())),
            Formula::Or(..) => push(RuleInstance::new(RuleId::OrR, lf.clone())),
            Formula::Impl(..) => push(RuleInstance::new(RuleId::ImplR, lf.clone()).label(&fresh_label)),
            Formula::Excl(..) => {
                for v in reach.to(w) {
                    push(RuleInstance::new(RuleId::ExclR, lf.clone()).target(&v));
                }
            }
            Formula::Exists(..) => push(RuleInstance::new(RuleId::ExistsR, lf.clone())),
            Formula::Forall(x, _) => push(
                RuleInstance::new(RuleId::ForallR, lf.clone())
                    .label(&fresh_label)
                    .var(&fresh_name(x, &all_vars)),
            ),
            _ => {}
        }
    }
    out
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::sequent::parse_sequent;
    use crate::syntax::Signature;

    fn seq(text: &str) -> Sequent {
        parse_sequent(text, &mut Signature::new()).unwrap()
    }

    fn lf(text: &str) -> Lf {
        seq(&format!("{text} |-")).ante()[0].clone()
    }

    fn step(s: &Sequent, inst: RuleInstance) -> Vec<Sequent> {
        premises(s, &inst, Variant::Cd).unwrap()
    }

    fn leaf_ax(s: &Sequent, left: &str, target: &str) -> Proof {
        Proof::leaf(s.clone(), RuleInstance::new(RuleId::Ax, lf(left)).target(&Label::new(target)))
    }

    /// The example proof in the constant-domain calculus, built bottom-up.
    pub(crate) fn cd_example() -> Proof {
        let s0 = seq("|- w: forall x. (p | r(x)) -> p | (q -> forall x. r(x))");
        let i0 = RuleInstance::new(RuleId::ImplR, s0.succ()[0].clone()).label(&"u".into());
        let s1 = step(&s0, i0.clone()).remove(0);
        let i1 = RuleInstance::new(RuleId::OrR, lf("u: p | (q -> forall x. r(x))"));
        let s2 = step(&s1, i1.clone()).remove(0);
        let i2 = RuleInstance::new(RuleId::ImplR, lf("u: q -> forall x. r(x)")).label(&"v".into());
        let s3 = step(&s2, i2.clone()).remove(0);
        let i3 = RuleInstance::new(RuleId::ForallR, lf("v: forall x. r(x)")).label(&"w'".into()).var("x");
        let s4 = step(&s3, i3.clone()).remove(0);
        let i4 = RuleInstance::new(RuleId::ForallL, lf("u: forall x. (p | r(x))"))
            .target(&"u".into())
            .term(Term::var("x"));
        let s5 = step(&s4, i4.clone()).remove(0);
        let i5 = RuleInstance::new(RuleId::OrL, lf("u: p | r(x)"));
        let mut s6 = step(&s5, i5.clone());
        let right = leaf_ax(&s6[1], "u: r(x)", "w'");
        let left = leaf_ax(&s6[0], "u: p", "u");
        s6.clear();
        let p5 = Proof::node(s5, i5, vec![left, right]);
        let p4 = Proof::node(s4, i4, vec![p5]);
        let p3 = Proof::node(s3, i3, vec![p4]);
        let p2 = Proof::node(s2, i2, vec![p3]);
        let p1 = Proof::node(s1, i1, vec![p2]);
        Proof::node(s0, i0, vec![p1])
    }

    #[test]
    fn cd_example_checks_under_cd_only() {
        let p = cd_example();
        assert_eq!(check_proof(&p, Variant::Cd), Ok(()));
        let counts = p.rule_counts();
        assert_eq!(counts[&RuleId::Ax], 2);
        assert_eq!(counts[&RuleId::ImplR], 2);
        let e = check_proof(&p, Variant::Id).unwrap_err();
        assert!(matches!(e.kind, CheckErrorKind::Rule(RuleError::NotAvailable(..))));
    }

    #[test]
    fn ds_proof_checks_under_id() {
        let s0 = seq("|- w: forall x. ((p(x) -< exists y. p(y)) -> bot)");
        let i0 = RuleInstance::new(RuleId::ForallR, s0.succ()[0].clone()).label(&"u".into()).var("x");
        let s1 = premises(&s0, &i0, Variant::Id).unwrap().remove(0);
        let i1 = RuleInstance::new(RuleId::ImplR, s1.succ()[0].clone()).label(&"v".into());
        let s2 = premises(&s1, &i1, Variant::Id).unwrap().remove(0);
        let i2 = RuleInstance::new(RuleId::ExclL, s2.ante()[0].clone()).label(&"u'".into());
        let s3 = premises(&s2, &i2, Variant::Id).unwrap().remove(0);
        assert_eq!(s3.to_string(), "R: u<v, u'<v, w<u ; T: u:x ; u': p(x) |- u': exists y. p(y), v: bot");
        let i3 = RuleInstance::new(RuleId::Ds, lf("u': p(x)"));
        let s4 = premises(&s3, &i3, Variant::Id).unwrap().remove(0);
        let i4 = RuleInstance::new(RuleId::ExistsR, lf("u': exists y. p(y)")).term(Term::var("x"));
        assert!(premises(&s3, &i4, Variant::Id).is_err());
        let s5 = premises(&s4, &i4, Variant::Id).unwrap().remove(0);
        let ax = Proof::leaf(s5, RuleInstance::new(RuleId::Ax, lf("u': p(x)")).target(&"u'".into()));
        let p = [(s4, i4), (s3, i3), (s2, i2), (s1, i1), (s0, i0)]
            .into_iter()
            .fold(ax, |acc, (s, i)| Proof::node(s, i, vec![acc]));
        assert_eq!(check_proof(&p, Variant::Id), Ok(()));
        let e = check_proof(&p, Variant::Cd).unwrap_err();
        assert_eq!(e.kind, CheckErrorKind::Rule(RuleError::NotInVariant(RuleId::Ds, Variant::Cd)));
    }

    #[test]
    fn one_sided_axiom_is_rejected() {
        let s = seq("|- w: p");
        let p = Proof::leaf(s.clone(), RuleInstance::new(RuleId::Ax, lf("w: p")).target(&"w".into()));
        assert!(check_proof(&p, Variant::Id).is_err());
    }

    #[test]
    fn freshness_is_enforced() {
        let s = seq("R: w<u |- w: p -> q");
        let i = RuleInstance::new(RuleId::ImplR, s.succ()[0].clone()).label(&"u".into());
        assert_eq!(premises(&s, &i, Variant::Id), Err(RuleError::LabelNotFresh("u".into())));
        let s = seq("T: w:y |- w: forall x. p(x)");
        let i = RuleInstance::new(RuleId::ForallR, s.succ()[0].clone()).label(&"u".into()).var("y");
        assert_eq!(premises(&s, &i, Variant::Id), Err(RuleError::VarNotFresh("y".into())));
    }

    #[test]
    fn applicable_enumerations() {
        let top = applicable(&seq("|- w: top"), Variant::Id);
        assert!(top.iter().any(|i| i.rule == RuleId::TopR));
        let root = applicable(&seq("|- w: forall x. (p | r(x)) -> p | (q -> forall x. r(x))"), Variant::Cd);
        assert_eq!(root.len(), 1);
        assert_eq!(root[0].rule, RuleId::ImplR);
        assert!(applicable(&seq("T: w:x |-"), Variant::Id).is_empty());
        let ds = applicable(&seq("w: p(x) |-"), Variant::Id);
        assert_eq!(ds.iter().map(|i| i.rule).collect::<Vec<_>>(), vec![RuleId::Ds]);
        assert!(applicable(&seq("w: p(x) |-"), Variant::Cd).is_empty());
    }

    #[test]
    fn applicable_instances_yield_valid_premises() {
        let s = seq("R: w<u ; T: w:x ; w: p(x) -> q, u: exists y. r(y), w: s -< t |- u: forall z. r(z), w: p(x) -< q");
        for inst in applicable(&s, Variant::Id) {
            let inst = match inst.rule {
                RuleId::ExistsR | RuleId::ForallL => inst.term(Term::var("x")),
                _ => inst,
            };
            for prem in premises(&s, &inst, Variant::Id).unwrap() {
                assert_eq!(prem.validate(), Ok(()), "{inst:?}");
                for a in s.labels() {
                    for b in s.labels() {
                        if s.reachable(&a, &b) {
                            assert!(prem.reachable(&a, &b));
                        }
                    }
                }
            }
        }
    }
}
