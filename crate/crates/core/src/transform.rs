//! Proof transformations: the admissible structural rules, inversion,
//! derived generalized axioms and cut elimination.
//!
//! Every transform walks the proof bottom-up, rewriting each conclusion and
//! re-applying the same rule instance. Nodes where the rewritten formula is
//! principal get dedicated treatment. Every constructed node is re-checked
//! against the rule schema, so a returned proof always has the right shape.

use crate::calculus::{premises, Proof, RuleId, RuleInstance, Variant};
use crate::sequent::{Dom, Label, Lf, Rel, Sequent, Side};
use crate::syntax::{fresh_name, vt, Formula, Term};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("{0} is not admissible under {1}")]
    Variant(&'static str, Variant),
    #[error("internal error: {0}")]
    Internal(String),
}

type Res<T> = Result<T, TransformError>;

fn pre<T>(msg: impl Into<String>) -> Res<T> {
    Err(TransformError::Precondition(msg.into()))
}

fn internal(msg: impl fmt::Display) -> TransformError {
    TransformError::Internal(msg.to_string())
}

/// Builds a node after checking that `subs` prove the premises of `inst`.
fn node(concl: Sequent, inst: RuleInstance, subs: Vec<Proof>, v: Variant) -> Res<Proof> {
    let expected = premises(&concl, &inst, v).map_err(|e| internal(format!("{} on `{concl}`: {e}", inst.rule)))?;
    if expected.len() != subs.len() {
        return Err(internal(format!("{} expects {} premises", inst.rule, expected.len())));
    }
    for (e, q) in expected.iter().zip(&subs) {
        if !e.alpha_eq(&q.conclusion) {
            return Err(internal(format!("{}: expected premise `{e}`, built `{}`", inst.rule, q.conclusion)));
        }
    }
    Ok(Proof::node(concl, inst, subs))
}

/// Every label mentioned anywhere in the proof.
pub fn proof_labels(p: &Proof) -> BTreeSet<Label> {
    let mut out = BTreeSet::new();
    p.visit(&mut |q| {
        out.extend(q.conclusion.labels());
        out.extend(q.rule.label.iter().cloned());
        out.extend(q.rule.target.iter().cloned());
    });
    out
}

/// Every variable name mentioned anywhere in the proof, bound ones included.
pub fn proof_vars(p: &Proof) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    p.visit(&mut |q| {
        out.extend(q.conclusion.all_vars());
        out.extend(q.rule.var.iter().cloned());
        if let Some(t) = &q.rule.term {
            out.extend(t.vars());
        }
        if let Some(lf) = &q.rule.principal {
            out.extend(lf.formula.all_vars());
        }
    });
    out
}

fn is_principal(r: &RuleInstance, side: Side, lf: &Lf) -> bool {
    r.rule != RuleId::Cut && r.rule.side() == side && r.principal.as_ref().is_some_and(|p| p.alpha_eq(lf))
}

/// A rewriting of conclusions that commutes with most rules.
trait Ctx {
    fn seq(&self, s: &Sequent, v: Variant) -> Res<Sequent>;

    fn inst(&self, r: &RuleInstance) -> RuleInstance {
        r.clone()
    }

    /// Labels the rewritten conclusions may mention that the original did not.
    fn avoid_labels(&self) -> BTreeSet<Label> {
        BTreeSet::new()
    }

    fn avoid_vars(&self) -> BTreeSet<String> {
        BTreeSet::new()
    }

    fn special(&self, _p: &Proof, _v: Variant) -> Option<Res<Proof>> {
        None
    }
}

fn apply(p: &Proof, ctx: &dyn Ctx, v: Variant) -> Res<Proof> {
    let concl = ctx.seq(&p.conclusion, v)?;
    if let Some(r) = ctx.special(p, v) {
        let q = r?;
        if !q.conclusion.alpha_eq(&concl) {
            return Err(internal(format!("rewrote `{}` to `{}`, expected `{concl}`", p.conclusion, q.conclusion)));
        }
        return Ok(q);
    }
    let p = freshen(p, ctx, &concl, v)?;
    let inst = ctx.inst(&p.rule);
    let expected = premises(&concl, &inst, v).map_err(|e| internal(format!("{} on `{concl}`: {e}", inst.rule)))?;
    if expected.len() != p.premises.len() {
        return Err(internal(format!("{} changed arity", inst.rule)));
    }
    let mut subs = Vec::with_capacity(expected.len());
    for (e, q) in expected.iter().zip(&p.premises) {
        subs.push(if e.alpha_eq(&q.conclusion) { q.clone() } else { apply(q, ctx, v)? });
    }
    node(concl, inst, subs, v)
}

/// Renames the eigenlabel or eigenvariable of the last rule when it would
/// clash with the rewritten conclusion.
fn freshen(p: &Proof, ctx: &dyn Ctx, concl: &Sequent, v: Variant) -> Res<Proof> {
    let mut out = p.clone();
    let mapped = ctx.inst(&p.rule);
    if matches!(p.rule.rule, RuleId::ImplR | RuleId::ExclL | RuleId::ForallR) {
        if let (Some(old), Some(new)) = (&p.rule.label, &mapped.label) {
            let avoid = ctx.avoid_labels();
            if avoid.contains(new) || concl.labels().contains(new) {
                let mut all = proof_labels(p);
                all.extend(avoid);
                all.extend(concl.labels());
                let fresh = Sequent::fresh_label("u", &all);
                let map = BTreeMap::from([(old.clone(), fresh.clone())]);
                out.premises[0] = apply(&out.premises[0], &Relabel(map), v)?;
                out.rule.label = Some(fresh);
            }
        }
    }
    if matches!(p.rule.rule, RuleId::ExistsL | RuleId::ForallR) {
        if let (Some(old), Some(new)) = (&p.rule.var, &mapped.var) {
            let avoid = ctx.avoid_vars();
            if avoid.contains(new) || concl.free_vars().contains(new) {
                let mut all = proof_vars(&out);
                all.extend(avoid);
                all.extend(concl.all_vars());
                let fresh = fresh_name(old, &all);
                let ren = Psub { t: Term::Var(fresh.clone()), x: old.clone() };
                out.premises[0] = apply(&out.premises[0], &ren, v)?;
                out.rule.var = Some(fresh);
            }
        }
    }
    Ok(out)
}

fn map_labels(r: &RuleInstance, m: impl Fn(&Label) -> Label) -> RuleInstance {
    let mut out = r.clone();
    if let Some(p) = &mut out.principal {
        p.label = m(&p.label);
    }
    out.label = r.label.as_ref().map(&m);
    out.target = r.target.as_ref().map(&m);
    out
}

/// Simultaneous renaming of labels.
struct Relabel(BTreeMap<Label, Label>);

impl Relabel {
    fn get(&self, l: &Label) -> Label {
        self.0.get(l).cloned().unwrap_or_else(|| l.clone())
    }
}

impl Ctx for Relabel {
    fn seq(&self, s: &Sequent, _: Variant) -> Res<Sequent> {
        Ok(s.relabel(&self.0))
    }

    fn inst(&self, r: &RuleInstance) -> RuleInstance {
        map_labels(r, |l| self.get(l))
    }
}

/// Simultaneous renaming of free variables, eigenvariables included.
struct VarMap(BTreeMap<String, String>);

impl VarMap {
    fn temps(&self) -> Vec<String> {
        (0..self.0.len()).map(|i| format!("?{i}")).collect()
    }

    fn formula(&self, f: &Formula) -> Formula {
        let tmp = self.temps();
        let mut g = f.clone();
        for (a, t) in self.0.keys().zip(&tmp) {
            g = g.subst(&Term::Var(t.clone()), a);
        }
        for (b, t) in self.0.values().zip(&tmp) {
            g = g.subst(&Term::Var(b.clone()), t);
        }
        g
    }

    fn term(&self, t: &Term) -> Term {
        let tmp = self.temps();
        let mut u = t.clone();
        for (a, x) in self.0.keys().zip(&tmp) {
            u = u.subst(&Term::Var(x.clone()), a);
        }
        for (b, x) in self.0.values().zip(&tmp) {
            u = u.subst(&Term::Var(b.clone()), x);
        }
        u
    }
}

impl Ctx for VarMap {
    fn seq(&self, s: &Sequent, _: Variant) -> Res<Sequent> {
        let tmp = self.temps();
        let mut out = s.clone();
        for (a, t) in self.0.keys().zip(&tmp) {
            out = out.subst(&Term::Var(t.clone()), a);
        }
        for (b, t) in self.0.values().zip(&tmp) {
            out = out.subst(&Term::Var(b.clone()), t);
        }
        Ok(out)
    }

    fn inst(&self, r: &RuleInstance) -> RuleInstance {
        let mut out = r.clone();
        if let Some(p) = &mut out.principal {
            p.formula = self.formula(&p.formula);
        }
        out.term = r.term.as_ref().map(|t| self.term(t));
        out.var = r.var.as_ref().map(|y| self.0.get(y).cloned().unwrap_or_else(|| y.clone()));
        out
    }
}

/// (t/x)
struct Psub {
    t: Term,
    x: String,
}

impl Ctx for Psub {
    fn seq(&self, s: &Sequent, _: Variant) -> Res<Sequent> {
        Ok(s.subst(&self.t, &self.x))
    }

    fn inst(&self, r: &RuleInstance) -> RuleInstance {
        let mut out = r.clone();
        if let Some(p) = &mut out.principal {
            p.formula = p.formula.subst(&self.t, &self.x);
        }
        out.term = r.term.as_ref().map(|u| u.subst(&self.t, &self.x));
        out
    }

    fn avoid_vars(&self) -> BTreeSet<String> {
        let mut out = self.t.vars();
        out.insert(self.x.clone());
        out
    }
}

/// (iw)
struct Weaken {
    left: Vec<Lf>,
    right: Vec<Lf>,
}

impl Ctx for Weaken {
    fn seq(&self, s: &Sequent, _: Variant) -> Res<Sequent> {
        let mut out = s.clone();
        self.left.iter().for_each(|l| out.add_ante(l.clone()));
        self.right.iter().for_each(|l| out.add_succ(l.clone()));
        Ok(out)
    }

    fn avoid_labels(&self) -> BTreeSet<Label> {
        self.left.iter().chain(&self.right).map(|l| l.label.clone()).collect()
    }

    fn avoid_vars(&self) -> BTreeSet<String> {
        self.left.iter().chain(&self.right).flat_map(|l| l.formula.free_vars()).collect()
    }
}

/// (wv)
struct AddDom(Dom);

impl Ctx for AddDom {
    fn seq(&self, s: &Sequent, _: Variant) -> Res<Sequent> {
        let mut out = s.clone();
        out.add_dom(self.0.clone());
        Ok(out)
    }

    fn avoid_vars(&self) -> BTreeSet<String> {
        BTreeSet::from([self.0.var.clone()])
    }
}

/// (id) when `keep` is set, (cd) otherwise.
struct DropDom {
    keep: Option<Dom>,
    drop: Dom,
}

impl Ctx for DropDom {
    fn seq(&self, s: &Sequent, _: Variant) -> Res<Sequent> {
        if let Some(k) = &self.keep {
            if !s.has_dom(k) || !s.reachable(&k.label, &self.drop.label) {
                return pre(format!("{}:{} does not cover {}:{}", k.label, k.var, self.drop.label, self.drop.var));
            }
        }
        let mut out = s.clone();
        if !out.remove_dom(&self.drop) {
            return pre(format!("missing domain atom {}:{}", self.drop.label, self.drop.var));
        }
        Ok(out)
    }
}

/// Replaces one relational atom by another: (br_f) and (br_b).
struct Rewire {
    old: Rel,
    new: Rel,
}

impl Ctx for Rewire {
    fn seq(&self, s: &Sequent, _: Variant) -> Res<Sequent> {
        let mut out = s.clone();
        if !out.remove_rel(&self.old) {
            return pre(format!("missing relational atom {}<{}", self.old.from, self.old.to));
        }
        out.add_rel(self.new.clone());
        Ok(out)
    }
}

/// (mrg): contracts an edge, keeping the name `survivor`.
struct Merge {
    edge: Rel,
    survivor: Label,
}

impl Merge {
    fn gone(&self) -> &Label {
        if self.survivor == self.edge.from {
            &self.edge.to
        } else {
            &self.edge.from
        }
    }

    fn get(&self, l: &Label) -> Label {
        if l == self.gone() {
            self.survivor.clone()
        } else {
            l.clone()
        }
    }
}

impl Ctx for Merge {
    fn seq(&self, s: &Sequent, _: Variant) -> Res<Sequent> {
        let mut out = s.clone();
        if !out.remove_rel(&self.edge) {
            return pre(format!("missing relational atom {}<{}", self.edge.from, self.edge.to));
        }
        Ok(out.relabel(&BTreeMap::from([(self.gone().clone(), self.survivor.clone())])))
    }

    fn inst(&self, r: &RuleInstance) -> RuleInstance {
        map_labels(r, |l| self.get(l))
    }
}

/// Deletes one copy of a labelled formula: (⊥R) and (⊤L).
struct DropFormula {
    side: Side,
    lf: Lf,
}

impl Ctx for DropFormula {
    fn seq(&self, s: &Sequent, _: Variant) -> Res<Sequent> {
        let mut out = s.clone();
        if !out.remove(self.side, &self.lf) {
            return pre(format!("missing {}", self.lf));
        }
        Ok(out)
    }
}

/// (lwr): a consequent formula w:Π becomes u:Π.
struct Lower {
    focus: Lf,
    to: Label,
}

impl Ctx for Lower {
    fn seq(&self, s: &Sequent, _: Variant) -> Res<Sequent> {
        let mut out = s.clone();
        if !out.remove(Side::Right, &self.focus) {
            return pre(format!("missing {} in the consequent", self.focus));
        }
        out.add_succ(Lf::at(&self.to, self.focus.formula.clone()));
        Ok(out)
    }

    fn inst(&self, r: &RuleInstance) -> RuleInstance {
        let mut out = r.clone();
        if is_principal(r, Side::Right, &self.focus) {
            out.principal = Some(Lf::at(&self.to, self.focus.formula.clone()));
        }
        if r.rule == RuleId::Ax
            && r.target.as_ref() == Some(&self.focus.label)
            && r.principal.as_ref().is_some_and(|p| p.formula.alpha_eq(&self.focus.formula))
        {
            out.target = Some(self.to.clone());
        }
        out
    }

    fn special(&self, p: &Proof, v: Variant) -> Option<Res<Proof>> {
        let r = &p.rule;
        if !is_principal(r, Side::Right, &self.focus) {
            return None;
        }
        let run = || -> Res<Proof> {
            let concl = self.seq(&p.conclusion, v)?;
            let mut inst = r.clone();
            inst.principal = Some(Lf::at(&self.to, self.focus.formula.clone()));
            let w = &self.focus.label;
            let low = |q: &Proof, f: &Formula| apply(q, &Lower { focus: Lf::at(w, f.clone()), to: self.to.clone() }, v);
            let q = match (r.rule, &r.principal().formula) {
                (RuleId::AndR, Formula::And(a, b)) => {
                    let subs = vec![low(&p.premises[0], a)?, low(&p.premises[1], b)?];
                    return node(concl, inst, subs, v);
                }
                (RuleId::OrR, Formula::Or(a, b)) => low(&low(&p.premises[0], a)?, b)?,
                (RuleId::ImplR | RuleId::ForallR, _) => {
                    let e = r.label.clone().ok_or_else(|| internal("missing eigenlabel"))?;
                    branch_forward(&p.premises[0], &Rel { from: w.clone(), to: e }, &self.to, v)?
                }
                (RuleId::ExistsR, Formula::Exists(x, a)) => {
                    let t = r.term.clone().ok_or_else(|| internal("missing term"))?;
                    let q = apply(&p.premises[0], self, v)?;
                    let inner = Lower { focus: Lf::at(w, a.subst(&t, x)), to: self.to.clone() };
                    apply(&q, &inner, v)?
                }
                _ => unreachable!(),
            };
            node(concl, inst, vec![q], v)
        };
        match r.rule {
            RuleId::AndR | RuleId::OrR | RuleId::ImplR | RuleId::ForallR | RuleId::ExistsR => Some(run()),
            _ => None,
        }
    }
}

/// (lft): an antecedent formula u:Σ becomes w:Σ.
struct Lift {
    focus: Lf,
    to: Label,
}

impl Ctx for Lift {
    fn seq(&self, s: &Sequent, _: Variant) -> Res<Sequent> {
        let mut out = s.clone();
        if !out.remove(Side::Left, &self.focus) {
            return pre(format!("missing {} in the antecedent", self.focus));
        }
        out.add_ante(Lf::at(&self.to, self.focus.formula.clone()));
        Ok(out)
    }

    fn inst(&self, r: &RuleInstance) -> RuleInstance {
        let mut out = r.clone();
        if is_principal(r, Side::Left, &self.focus) {
            out.principal = Some(Lf::at(&self.to, self.focus.formula.clone()));
        }
        out
    }

    fn special(&self, p: &Proof, v: Variant) -> Option<Res<Proof>> {
        let r = &p.rule;
        let consumed = [RuleId::Ds, RuleId::AndL, RuleId::OrL, RuleId::ExclL, RuleId::ExistsL];
        if !is_principal(r, Side::Left, &self.focus) || !consumed.contains(&r.rule) {
            return None;
        }
        let run = || -> Res<Proof> {
            let concl = self.seq(&p.conclusion, v)?;
            let inst = self.inst(r);
            let (u, w) = (&self.focus.label, &self.to);
            let up = |q: &Proof, f: &Formula| apply(q, &Lift { focus: Lf::at(u, f.clone()), to: w.clone() }, v);
            let q = match (r.rule, &r.principal().formula) {
                (RuleId::AndL, Formula::And(a, b)) => up(&up(&p.premises[0], a)?, b)?,
                (RuleId::OrL, Formula::Or(a, b)) => {
                    let subs = vec![up(&p.premises[0], a)?, up(&p.premises[1], b)?];
                    return node(concl, inst, subs, v);
                }
                (RuleId::Ds, Formula::Atom(_, ts)) => {
                    let mut q = apply(&p.premises[0], self, v)?;
                    for z in vt(ts) {
                        q = weaken_var(&q, &Dom { label: w.clone(), var: z.clone() }, v)?;
                        let old = Dom { label: u.clone(), var: z.clone() };
                        if !p.conclusion.has_dom(&old) {
                            q = drop_domain_atom(&q, &Dom { label: w.clone(), var: z }, &old, v)?;
                        }
                    }
                    q
                }
                (RuleId::ExclL, _) => {
                    let e = r.label.clone().ok_or_else(|| internal("missing eigenlabel"))?;
                    branch_backward(&p.premises[0], &Rel { from: e, to: u.clone() }, w, v)?
                }
                (RuleId::ExistsL, Formula::Exists(x, a)) => {
                    let y = r.var.clone().ok_or_else(|| internal("missing eigenvariable"))?;
                    let q = weaken_var(&p.premises[0], &Dom { label: w.clone(), var: y.clone() }, v)?;
                    let q = drop_domain_atom(
                        &q,
                        &Dom { label: w.clone(), var: y.clone() },
                        &Dom { label: u.clone(), var: y.clone() },
                        v,
                    )?;
                    let inner = Lift { focus: Lf::at(u, a.subst(&Term::Var(y), x)), to: w.clone() };
                    apply(&q, &inner, v)?
                }
                _ => return Err(internal(format!("{} with principal {}", r.rule, r.principal()))),
            };
            node(concl, inst, vec![q], v)
        };
        Some(run())
    }
}

/// (ctr_l) and (ctr_r).
struct Contract {
    side: Side,
    focus: Lf,
}

impl Ctx for Contract {
    fn seq(&self, s: &Sequent, _: Variant) -> Res<Sequent> {
        if s.count(self.side, &self.focus) < 2 {
            return pre(format!("{} does not occur twice", self.focus));
        }
        let mut out = s.clone();
        out.remove(self.side, &self.focus);
        Ok(out)
    }

    fn special(&self, p: &Proof, v: Variant) -> Option<Res<Proof>> {
        let r = &p.rule;
        if !is_principal(r, self.side, &self.focus) || r.rule.keeps_principal() || r.rule.is_initial() {
            return None;
        }
        Some(self.principal_case(p, v))
    }
}

impl Contract {
    fn principal_case(&self, p: &Proof, v: Variant) -> Res<Proof> {
        let concl = self.seq(&p.conclusion, v)?;
        let r = &p.rule;
        let w = &self.focus.label;
        let f = RuleInstance { principal: Some(self.focus.clone()), ..r.clone() };
        let ctr = |q: &Proof, side: Side, lf: Lf| apply(q, &Contract { side, focus: lf }, v);
        let subs = match (r.rule, &r.principal().formula) {
            (RuleId::AndL | RuleId::OrR, Formula::And(a, b) | Formula::Or(a, b)) => {
                let side = r.rule.side();
                let q = invert(&p.premises[0], &f, v)?.remove(0);
                let q = ctr(&q, side, Lf::at(w, (**a).clone()))?;
                vec![ctr(&q, side, Lf::at(w, (**b).clone()))?]
            }
            (RuleId::AndR | RuleId::OrL, Formula::And(a, b) | Formula::Or(a, b)) => {
                let side = r.rule.side();
                let q0 = invert(&p.premises[0], &f, v)?.remove(0);
                let q1 = invert(&p.premises[1], &f, v)?.remove(1);
                vec![ctr(&q0, side, Lf::at(w, (**a).clone()))?, ctr(&q1, side, Lf::at(w, (**b).clone()))?]
            }
            (RuleId::ExclL | RuleId::ImplR, Formula::Excl(a, b) | Formula::Impl(a, b)) => {
                let e = r.label.clone().ok_or_else(|| internal("missing eigenlabel"))?;
                let prem = &p.premises[0];
                let fresh = Sequent::fresh_label("u", &proof_labels(prem));
                let q = invert(prem, &f.clone().label(&fresh), v)?.remove(0);
                let q = if r.rule == RuleId::ImplR {
                    let q = branch_forward(&q, &Rel { from: w.clone(), to: fresh.clone() }, &e, v)?;
                    merge_into(&q, &Rel { from: e.clone(), to: fresh }, &e, v)?
                } else {
                    let q = branch_backward(&q, &Rel { from: fresh.clone(), to: w.clone() }, &e, v)?;
                    merge_into(&q, &Rel { from: fresh, to: e.clone() }, &e, v)?
                };
                let q = ctr(&q, Side::Left, Lf::at(&e, (**a).clone()))?;
                vec![ctr(&q, Side::Right, Lf::at(&e, (**b).clone()))?]
            }
            (RuleId::ExistsL, Formula::Exists(x, a)) => {
                let y = r.var.clone().ok_or_else(|| internal("missing eigenvariable"))?;
                let prem = &p.premises[0];
                let z = fresh_name(&y, &proof_vars(prem));
                let q = invert(prem, &f.clone().var(&z), v)?.remove(0);
                let q = subst_proof(&q, &Term::Var(y.clone()), &z, v)?;
                vec![ctr(&q, Side::Left, Lf::at(w, a.subst(&Term::Var(y), x)))?]
            }
            (RuleId::ForallR, Formula::Forall(x, a)) => {
                let e = r.label.clone().ok_or_else(|| internal("missing eigenlabel"))?;
                let y = r.var.clone().ok_or_else(|| internal("missing eigenvariable"))?;
                let prem = &p.premises[0];
                let fresh = Sequent::fresh_label("u", &proof_labels(prem));
                let z = fresh_name(&y, &proof_vars(prem));
                let q = invert(prem, &f.clone().label(&fresh).var(&z), v)?.remove(0);
                let q = branch_forward(&q, &Rel { from: w.clone(), to: fresh.clone() }, &e, v)?;
                let q = merge_into(&q, &Rel { from: e.clone(), to: fresh }, &e, v)?;
                let q = subst_proof(&q, &Term::Var(y.clone()), &z, v)?;
                vec![ctr(&q, Side::Right, Lf::at(&e, a.subst(&Term::Var(y), x)))?]
            }
            _ => return Err(internal(format!("no contraction case for {} on {}", r.rule, r.principal()))),
        };
        node(concl, r.clone(), subs, v)
    }
}

/// Premise `index` of an invertible rule instance.
struct Inv {
    inst: RuleInstance,
    index: usize,
}

impl Ctx for Inv {
    fn seq(&self, s: &Sequent, v: Variant) -> Res<Sequent> {
        let mut ps = premises(s, &self.inst, v).map_err(|e| internal(format!("inverting {}: {e}", self.inst.rule)))?;
        Ok(ps.swap_remove(self.index))
    }

    fn avoid_labels(&self) -> BTreeSet<Label> {
        self.inst.label.iter().cloned().collect()
    }

    fn avoid_vars(&self) -> BTreeSet<String> {
        self.inst.var.iter().cloned().collect()
    }

    fn special(&self, p: &Proof, v: Variant) -> Option<Res<Proof>> {
        let r = &p.rule;
        if r.rule != self.inst.rule || !is_principal(r, r.rule.side(), self.inst.principal()) {
            return None;
        }
        let run = || -> Res<Proof> {
            let mut q = p.premises[self.index].clone();
            if let (Some(have), Some(want)) = (&r.label, &self.inst.label) {
                if have != want {
                    let swap = BTreeMap::from([(have.clone(), want.clone()), (want.clone(), have.clone())]);
                    q = apply(&q, &Relabel(swap), v)?;
                }
            }
            if let (Some(have), Some(want)) = (&r.var, &self.inst.var) {
                if have != want {
                    let swap = BTreeMap::from([(have.clone(), want.clone()), (want.clone(), have.clone())]);
                    q = apply(&q, &VarMap(swap), v)?;
                }
            }
            Ok(q)
        };
        Some(run())
    }
}

fn check_labels(s: &Sequent, lfs: &[Lf]) -> Res<()> {
    let labels = s.labels();
    match lfs.iter().find(|l| !labels.contains(&l.label)) {
        Some(l) => pre(format!("label {} does not occur in the conclusion", l.label)),
        None => Ok(()),
    }
}

/// (iw): adds `left` to the antecedent and `right` to the consequent.
pub fn weaken(p: &Proof, left: &[Lf], right: &[Lf], v: Variant) -> Res<Proof> {
    if left.is_empty() && right.is_empty() {
        return Ok(p.clone());
    }
    check_labels(&p.conclusion, left)?;
    check_labels(&p.conclusion, right)?;
    apply(p, &Weaken { left: left.to_vec(), right: right.to_vec() }, v)
}

/// (wv): adds the domain atom `d`.
pub fn weaken_var(p: &Proof, d: &Dom, v: Variant) -> Res<Proof> {
    if p.conclusion.has_dom(d) {
        return Ok(p.clone());
    }
    if !p.conclusion.labels().contains(&d.label) {
        return pre(format!("label {} does not occur in the conclusion", d.label));
    }
    apply(p, &AddDom(d.clone()), v)
}

/// (id): removes `drop` = u:x given `keep` = w:x with w ↠ u.
pub fn drop_domain_atom(p: &Proof, keep: &Dom, drop: &Dom, v: Variant) -> Res<Proof> {
    if keep.var != drop.var || keep == drop {
        return pre("the two domain atoms must share their variable and differ in label");
    }
    apply(p, &DropDom { keep: Some(keep.clone()), drop: drop.clone() }, v)
}

/// (cd): removes a domain atom outright; constant domains only.
pub fn drop_domain_cd(p: &Proof, d: &Dom, v: Variant) -> Res<Proof> {
    if v != Variant::Cd {
        return Err(TransformError::Variant("cd", v));
    }
    apply(p, &DropDom { keep: None, drop: d.clone() }, v)
}

/// (t/x): substitutes `t` for `x` throughout the end sequent.
pub fn subst_proof(p: &Proof, t: &Term, x: &str, v: Variant) -> Res<Proof> {
    if *t == Term::Var(x.to_string()) {
        return Ok(p.clone());
    }
    apply(p, &Psub { t: t.clone(), x: x.to_string() }, v)
}

/// (br_f): replaces wRv by uRv, given w ↠ u, not u ↠ v and not v ↠ u.
/// Without the last condition the result would contain a cycle.
pub fn branch_forward(p: &Proof, edge: &Rel, u: &Label, v: Variant) -> Res<Proof> {
    let s = &p.conclusion;
    if !s.rel().contains(edge) {
        return pre(format!("missing relational atom {}<{}", edge.from, edge.to));
    }
    if !s.reachable(&edge.from, u) || s.reachable(u, &edge.to) || s.reachable(&edge.to, u) {
        return pre(format!("need {} ↠ {u} and neither {u} ↠ {} nor {} ↠ {u}", edge.from, edge.to, edge.to));
    }
    apply(p, &Rewire { old: edge.clone(), new: Rel { from: u.clone(), to: edge.to.clone() } }, v)
}

/// (br_b): replaces vRu by vRw, given w ↠ u and not w ↠ v.
pub fn branch_backward(p: &Proof, edge: &Rel, w: &Label, v: Variant) -> Res<Proof> {
    let s = &p.conclusion;
    if !s.rel().contains(edge) {
        return pre(format!("missing relational atom {}<{}", edge.from, edge.to));
    }
    if !s.reachable(w, &edge.to) || s.reachable(w, &edge.from) {
        return pre(format!("need {w} ↠ {} and not {w} ↠ {}", edge.to, edge.from));
    }
    apply(p, &Rewire { old: edge.clone(), new: Rel { from: edge.from.clone(), to: w.clone() } }, v)
}

/// (mrg): deletes wRu and renames u to w.
pub fn merge(p: &Proof, edge: &Rel, v: Variant) -> Res<Proof> {
    merge_into(p, edge, &edge.from, v)
}

/// (mrg) followed by a renaming, so that either endpoint can survive.
pub fn merge_into(p: &Proof, edge: &Rel, survivor: &Label, v: Variant) -> Res<Proof> {
    if survivor != &edge.from && survivor != &edge.to {
        return pre(format!("{survivor} is not an endpoint of {}<{}", edge.from, edge.to));
    }
    apply(p, &Merge { edge: edge.clone(), survivor: survivor.clone() }, v)
}

/// (ctr_l) / (ctr_r): removes one of two copies of `lf` on `side`.
pub fn contract(p: &Proof, side: Side, lf: &Lf, v: Variant) -> Res<Proof> {
    apply(p, &Contract { side, focus: lf.clone() }, v)
}

/// (lwr): replaces the consequent formula w:Π by u:Π, given w ↠ u.
pub fn lower(p: &Proof, lf: &Lf, u: &Label, v: Variant) -> Res<Proof> {
    if !p.conclusion.contains(Side::Right, lf) {
        return pre(format!("missing {lf} in the consequent"));
    }
    if !p.conclusion.reachable(&lf.label, u) {
        return pre(format!("{u} is not reachable from {}", lf.label));
    }
    if &lf.label == u {
        return Ok(p.clone());
    }
    apply(p, &Lower { focus: lf.clone(), to: u.clone() }, v)
}

/// (lft): replaces the antecedent formula u:Σ by w:Σ, given w ↠ u.
pub fn lift(p: &Proof, lf: &Lf, w: &Label, v: Variant) -> Res<Proof> {
    if !p.conclusion.contains(Side::Left, lf) {
        return pre(format!("missing {lf} in the antecedent"));
    }
    if !p.conclusion.reachable(w, &lf.label) {
        return pre(format!("{} is not reachable from {w}", lf.label));
    }
    if &lf.label == w {
        return Ok(p.clone());
    }
    apply(p, &Lift { focus: lf.clone(), to: w.clone() }, v)
}

/// (⊥R): removes w:⊥ from the consequent.
pub fn drop_bot_right(p: &Proof, lf: &Lf, v: Variant) -> Res<Proof> {
    if lf.formula != Formula::Bot {
        return pre(format!("{lf} is not ⊥"));
    }
    apply(p, &DropFormula { side: Side::Right, lf: lf.clone() }, v)
}

/// (⊤L): removes w:⊤ from the antecedent.
pub fn drop_top_left(p: &Proof, lf: &Lf, v: Variant) -> Res<Proof> {
    if lf.formula != Formula::Top {
        return pre(format!("{lf} is not ⊤"));
    }
    apply(p, &DropFormula { side: Side::Left, lf: lf.clone() }, v)
}

fn added(from: &Sequent, to: &Sequent) -> (Vec<Lf>, Vec<Lf>, Vec<Dom>) {
    let diff = |a: &[Lf], b: &[Lf]| {
        let mut rest = a.to_vec();
        let mut out = Vec::new();
        for x in b {
            match rest.iter().position(|y| y == x) {
                Some(i) => {
                    rest.remove(i);
                }
                None => out.push(x.clone()),
            }
        }
        out
    };
    let doms = to.dom().iter().filter(|d| !from.has_dom(d)).cloned().collect();
    (diff(from.ante(), to.ante()), diff(from.succ(), to.succ()), doms)
}

/// Proofs of the premises of `inst` from a proof of its conclusion.
pub fn invert(p: &Proof, inst: &RuleInstance, v: Variant) -> Res<Vec<Proof>> {
    let expected = premises(&p.conclusion, inst, v).map_err(|e| TransformError::Precondition(e.to_string()))?;
    let rule = inst.rule;
    if rule == RuleId::Cut {
        return pre("cut is not invertible");
    }
    let out: Vec<Proof> = if rule.keeps_principal() {
        let mut out = Vec::new();
        for e in &expected {
            let (left, right, doms) = added(&p.conclusion, e);
            let mut q = weaken(p, &left, &right, v)?;
            for d in &doms {
                q = weaken_var(&q, d, v)?;
            }
            out.push(q);
        }
        out
    } else {
        (0..expected.len())
            .map(|i| apply(p, &Inv { inst: inst.clone(), index: i }, v))
            .collect::<Res<_>>()?
    };
    for (e, q) in expected.iter().zip(&out) {
        if !e.alpha_eq(&q.conclusion) {
            return Err(internal(format!("inversion produced `{}`, expected `{e}`", q.conclusion)));
        }
    }
    Ok(out)
}

/// (gax): a proof of a sequent containing w:φ on the left and u:φ on the
/// right with w ↠ u, by recursion on φ.
pub fn derive_gax(s: &Sequent, left: &Lf, right: &Lf, v: Variant) -> Res<Proof> {
    if !s.contains(Side::Left, left) || !s.contains(Side::Right, right) {
        return pre(format!("need {left} in the antecedent and {right} in the consequent"));
    }
    if !left.formula.alpha_eq(&right.formula) {
        return pre(format!("{} and {} differ", left.formula, right.formula));
    }
    if !s.reachable(&left.label, &right.label) {
        return pre(format!("{} is not reachable from {}", right.label, left.label));
    }
    gax(s, left, right, v)
}

fn gax(s: &Sequent, l: &Lf, r: &Lf, v: Variant) -> Res<Proof> {
    let step = |s: &Sequent, inst: &RuleInstance| premises(s, inst, v).map_err(internal);
    let (w, u) = (&l.label, &r.label);
    match (&l.formula, &r.formula) {
        (Formula::Atom(..), _) => {
            node(s.clone(), RuleInstance::new(RuleId::Ax, l.clone()).target(u), vec![], v)
        }
        (Formula::Bot, _) => node(s.clone(), RuleInstance::new(RuleId::BotL, l.clone()), vec![], v),
        (Formula::Top, _) => node(s.clone(), RuleInstance::new(RuleId::TopR, r.clone()), vec![], v),
        (Formula::And(a, b), Formula::And(a2, b2)) => {
            let i1 = RuleInstance::new(RuleId::AndL, l.clone());
            let s1 = step(s, &i1)?.remove(0);
            let i2 = RuleInstance::new(RuleId::AndR, r.clone());
            let ps = step(&s1, &i2)?;
            let pa = gax(&ps[0], &Lf::at(w, (**a).clone()), &Lf::at(u, (**a2).clone()), v)?;
            let pb = gax(&ps[1], &Lf::at(w, (**b).clone()), &Lf::at(u, (**b2).clone()), v)?;
            let p1 = node(s1, i2, vec![pa, pb], v)?;
            node(s.clone(), i1, vec![p1], v)
        }
        (Formula::Or(a, b), Formula::Or(a2, b2)) => {
            let i1 = RuleInstance::new(RuleId::OrR, r.clone());
            let s1 = step(s, &i1)?.remove(0);
            let i2 = RuleInstance::new(RuleId::OrL, l.clone());
            let ps = step(&s1, &i2)?;
            let pa = gax(&ps[0], &Lf::at(w, (**a).clone()), &Lf::at(u, (**a2).clone()), v)?;
            let pb = gax(&ps[1], &Lf::at(w, (**b).clone()), &Lf::at(u, (**b2).clone()), v)?;
            let p1 = node(s1, i2, vec![pa, pb], v)?;
            node(s.clone(), i1, vec![p1], v)
        }
        (Formula::Impl(a, b), Formula::Impl(a2, b2)) => {
            let n = Sequent::fresh_label("u", &s.labels());
            let i1 = RuleInstance::new(RuleId::ImplR, r.clone()).label(&n);
            let s1 = step(s, &i1)?.remove(0);
            let i2 = RuleInstance::new(RuleId::ImplL, l.clone()).target(&n);
            let ps = step(&s1, &i2)?;
            let pa = gax(&ps[0], &Lf::at(&n, (**a2).clone()), &Lf::at(&n, (**a).clone()), v)?;
            let pb = gax(&ps[1], &Lf::at(&n, (**b).clone()), &Lf::at(&n, (**b2).clone()), v)?;
            let p1 = node(s1, i2, vec![pa, pb], v)?;
            node(s.clone(), i1, vec![p1], v)
        }
        (Formula::Excl(a, b), Formula::Excl(a2, b2)) => {
            let n = Sequent::fresh_label("u", &s.labels());
            let i1 = RuleInstance::new(RuleId::ExclL, l.clone()).label(&n);
            let s1 = step(s, &i1)?.remove(0);
            let i2 = RuleInstance::new(RuleId::ExclR, r.clone()).target(&n);
            let ps = step(&s1, &i2)?;
            let pa = gax(&ps[0], &Lf::at(&n, (**a).clone()), &Lf::at(&n, (**a2).clone()), v)?;
            let pb = gax(&ps[1], &Lf::at(&n, (**b2).clone()), &Lf::at(&n, (**b).clone()), v)?;
            let p1 = node(s1, i2, vec![pa, pb], v)?;
            node(s.clone(), i1, vec![p1], v)
        }
        (Formula::Exists(x, a), Formula::Exists(x2, a2)) => {
            let y = fresh_name("y", &s.all_vars());
            let yt = Term::Var(y.clone());
            let i1 = RuleInstance::new(RuleId::ExistsL, l.clone()).var(&y);
            let s1 = step(s, &i1)?.remove(0);
            let i2 = RuleInstance::new(RuleId::ExistsR, r.clone()).term(yt.clone());
            let s2 = step(&s1, &i2)?.remove(0);
            let p2 = gax(&s2, &Lf::at(w, a.subst(&yt, x)), &Lf::at(u, a2.subst(&yt, x2)), v)?;
            let p1 = node(s1, i2, vec![p2], v)?;
            node(s.clone(), i1, vec![p1], v)
        }
        (Formula::Forall(x, a), Formula::Forall(x2, a2)) => {
            let n = Sequent::fresh_label("u", &s.labels());
            let y = fresh_name("y", &s.all_vars());
            let yt = Term::Var(y.clone());
            let i1 = RuleInstance::new(RuleId::ForallR, r.clone()).label(&n).var(&y);
            let s1 = step(s, &i1)?.remove(0);
            let i2 = RuleInstance::new(RuleId::ForallL, l.clone()).target(&n).term(yt.clone());
            let s2 = step(&s1, &i2)?.remove(0);
            let p2 = gax(&s2, &Lf::at(&n, a.subst(&yt, x)), &Lf::at(&n, a2.subst(&yt, x2)), v)?;
            let p1 = node(s1, i2, vec![p2], v)?;
            node(s.clone(), i1, vec![p1], v)
        }
        _ => Err(internal(format!("{} and {} have different shapes", l.formula, r.formula))),
    }
}

/// A named admissible rule with its parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Transform {
    Iw { left: Vec<Lf>, right: Vec<Lf> },
    Wv(Dom),
    Id { keep: Dom, drop: Dom },
    Cd(Dom),
    Psub { term: Term, var: String },
    BrF { edge: Rel, to: Label },
    BrB { edge: Rel, to: Label },
    Mrg { edge: Rel },
    CtrL(Lf),
    CtrR(Lf),
    BotR(Lf),
    TopL(Lf),
    Lwr { formula: Lf, to: Label },
    Lft { formula: Lf, to: Label },
}

impl Transform {
    pub fn name(&self) -> &'static str {
        match self {
            Transform::Iw { .. } => "iw",
            Transform::Wv(_) => "wv",
            Transform::Id { .. } => "id",
            Transform::Cd(_) => "cd",
            Transform::Psub { .. } => "psub",
            Transform::BrF { .. } => "br_f",
            Transform::BrB { .. } => "br_b",
            Transform::Mrg { .. } => "mrg",
            Transform::CtrL(_) => "ctr_l",
            Transform::CtrR(_) => "ctr_r",
            Transform::BotR(_) => "botR",
            Transform::TopL(_) => "topL",
            Transform::Lwr { .. } => "lwr",
            Transform::Lft { .. } => "lft",
        }
    }

    pub fn apply(&self, p: &Proof, v: Variant) -> Res<Proof> {
        match self {
            Transform::Iw { left, right } => weaken(p, left, right, v),
            Transform::Wv(d) => weaken_var(p, d, v),
            Transform::Id { keep, drop } => drop_domain_atom(p, keep, drop, v),
            Transform::Cd(d) => drop_domain_cd(p, d, v),
            Transform::Psub { term, var } => subst_proof(p, term, var, v),
            Transform::BrF { edge, to } => branch_forward(p, edge, to, v),
            Transform::BrB { edge, to } => branch_backward(p, edge, to, v),
            Transform::Mrg { edge } => merge(p, edge, v),
            Transform::CtrL(lf) => contract(p, Side::Left, lf, v),
            Transform::CtrR(lf) => contract(p, Side::Right, lf, v),
            Transform::BotR(lf) => drop_bot_right(p, lf, v),
            Transform::TopL(lf) => drop_top_left(p, lf, v),
            Transform::Lwr { formula, to } => lower(p, formula, to, v),
            Transform::Lft { formula, to } => lift(p, formula, to, v),
        }
    }

    /// The conclusion the rule schema prescribes for the end sequent `s`.
    pub fn expected_conclusion(&self, s: &Sequent) -> Sequent {
        let mut out = s.clone();
        match self {
            Transform::Iw { left, right } => {
                left.iter().for_each(|l| out.add_ante(l.clone()));
                right.iter().for_each(|l| out.add_succ(l.clone()));
            }
            Transform::Wv(d) => out.add_dom(d.clone()),
            Transform::Id { drop, .. } | Transform::Cd(drop) => {
                out.remove_dom(drop);
            }
            Transform::Psub { term, var } => out = s.subst(term, var),
            Transform::BrF { edge, to } => {
                out.remove_rel(edge);
                out.add_rel(Rel { from: to.clone(), to: edge.to.clone() });
            }
            Transform::BrB { edge, to } => {
                out.remove_rel(edge);
                out.add_rel(Rel { from: edge.from.clone(), to: to.clone() });
            }
            Transform::Mrg { edge } => {
                out.remove_rel(edge);
                out = out.relabel(&BTreeMap::from([(edge.to.clone(), edge.from.clone())]));
            }
            Transform::CtrL(lf) | Transform::TopL(lf) => {
                out.remove(Side::Left, lf);
            }
            Transform::CtrR(lf) | Transform::BotR(lf) => {
                out.remove(Side::Right, lf);
            }
            Transform::Lwr { formula, to } => {
                out.remove(Side::Right, formula);
                out.add_succ(Lf::at(to, formula.formula.clone()));
            }
            Transform::Lft { formula, to } => {
                out.remove(Side::Left, formula);
                out.add_ante(Lf::at(to, formula.formula.clone()));
            }
        }
        out
    }
}

/// Bookkeeping from one run of cut elimination.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CutStats {
    /// Calls of the cut reduction, the top-level ones included.
    pub calls: usize,
    /// Recursive calls whose (complexity, height-sum) measure was checked
    /// against the caller's.
    pub measure_checks: usize,
    pub max_depth: usize,
}

impl fmt::Display for CutStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "calls={} measure_checks={} max_depth={}", self.calls, self.measure_checks, self.max_depth)
    }
}

/// The cut node joining `left` ⊢ …, w:φ and `right` u:φ, … ⊢ ….
pub fn cut_node(left: &Proof, right: &Proof, cf: &Lf, u: &Label, v: Variant) -> Res<Proof> {
    let mut s = left.conclusion.clone();
    if !s.remove(Side::Right, cf) {
        return pre(format!("{cf} is not in the consequent of the left proof"));
    }
    node(s, RuleInstance::new(RuleId::Cut, cf.clone()).target(u), vec![left.clone(), right.clone()], v)
}

/// Eliminates a single cut whose two premise proofs are cut-free.
pub fn eliminate_cut(left: &Proof, right: &Proof, cf: &Lf, u: &Label, v: Variant) -> Res<Proof> {
    eliminate_cut_with_stats(left, right, cf, u, v).map(|(p, _)| p)
}

pub fn eliminate_cut_with_stats(
    left: &Proof,
    right: &Proof,
    cf: &Lf,
    u: &Label,
    v: Variant,
) -> Res<(Proof, CutStats)> {
    if left.has_cut() || right.has_cut() {
        return pre("the premise proofs must be cut-free");
    }
    let mut c = Cutter { v, stats: CutStats::default() };
    let p = c.cut(left, right, cf, u, None, 0)?;
    Ok((p, c.stats))
}

/// Removes every cut, innermost first.
pub fn eliminate_all_cuts(p: &Proof, v: Variant) -> Res<Proof> {
    eliminate_all_cuts_with_stats(p, v).map(|(p, _)| p)
}

pub fn eliminate_all_cuts_with_stats(p: &Proof, v: Variant) -> Res<(Proof, CutStats)> {
    let mut c = Cutter { v, stats: CutStats::default() };
    let q = c.all(p)?;
    Ok((q, c.stats))
}

struct Cutter {
    v: Variant,
    stats: CutStats,
}

type Measure = (usize, usize);

impl Cutter {
    fn all(&mut self, p: &Proof) -> Res<Proof> {
        let subs = p.premises.iter().map(|q| self.all(q)).collect::<Res<Vec<_>>>()?;
        if p.rule.rule == RuleId::Cut {
            let u = p.rule.target.clone().ok_or_else(|| internal("cut without target"))?;
            return self.cut(&subs[0], &subs[1], p.rule.principal(), &u, None, 0);
        }
        Ok(Proof::node(p.conclusion.clone(), p.rule.clone(), subs))
    }

    fn cut(&mut self, l: &Proof, r: &Proof, cf: &Lf, u: &Label, parent: Option<Measure>, depth: usize) -> Res<Proof> {
        let v = self.v;
        self.stats.calls += 1;
        self.stats.max_depth = self.stats.max_depth.max(depth);
        let m = (cf.formula.complexity(), l.height() + r.height());
        if let Some(pm) = parent {
            self.stats.measure_checks += 1;
            if m >= pm {
                return Err(internal(format!("cut measure {m:?} does not decrease below {pm:?}")));
            }
        }
        let mut s = l.conclusion.clone();
        if !s.remove(Side::Right, cf) {
            return pre(format!("{cf} is not in the consequent of the left proof"));
        }
        let cut_left = Lf::at(u, cf.formula.clone());
        if !r.conclusion.alpha_eq(&s.clone().with(Side::Left, cut_left.clone())) {
            return pre(format!("contexts differ: `{}` vs `{}`", l.conclusion, r.conclusion));
        }
        if !s.reachable(&cf.label, u) {
            return pre(format!("{u} is not reachable from {}", cf.label));
        }
        let (r1, r2) = (&l.rule, &r.rule);
        let d = depth + 1;
        let leaf = |inst: &RuleInstance| node(s.clone(), inst.clone(), vec![], v);

        match r1.rule {
            RuleId::Ax => {
                let atom = Lf::at(r1.target.as_ref().ok_or_else(|| internal("ax without target"))?, r1.principal().formula.clone());
                if s.contains(Side::Right, &atom) {
                    return leaf(r1);
                }
                let v0 = &r1.principal().label;
                let q = lift(r, &cut_left, v0, v)?;
                return contract(&q, Side::Left, r1.principal(), v);
            }
            RuleId::BotL => return leaf(r1),
            RuleId::TopR => {
                if s.contains(Side::Right, r1.principal()) {
                    return leaf(r1);
                }
                return drop_top_left(r, &cut_left, v);
            }
            _ => {}
        }
        match r2.rule {
            RuleId::Ax => {
                if s.contains(Side::Left, r2.principal()) {
                    return leaf(r2);
                }
                let v1 = r2.target.clone().ok_or_else(|| internal("ax without target"))?;
                let q = lower(l, cf, &v1, v)?;
                return contract(&q, Side::Right, &Lf::at(&v1, cf.formula.clone()), v);
            }
            RuleId::TopR => return leaf(r2),
            RuleId::BotL => {
                if s.contains(Side::Left, r2.principal()) {
                    return leaf(r2);
                }
                return drop_bot_right(l, cf, v);
            }
            _ => {}
        }
        if r1.rule == RuleId::Cut || r2.rule == RuleId::Cut {
            return pre("the premise proofs must be cut-free");
        }

        if !is_principal(r1, Side::Right, cf) {
            let inv = invert(r, r1, v)?;
            let mut subs = Vec::new();
            for (a, b) in l.premises.iter().zip(&inv) {
                subs.push(self.cut(a, b, cf, u, Some(m), d)?);
            }
            return node(s, r1.clone(), subs, v);
        }
        if !is_principal(r2, Side::Left, &cut_left) {
            let inv = invert(l, r2, v)?;
            let mut subs = Vec::new();
            for (a, b) in inv.iter().zip(&r.premises) {
                subs.push(self.cut(a, b, cf, u, Some(m), d)?);
            }
            return node(s, r2.clone(), subs, v);
        }

        let w = &cf.label;
        let (f1, f2) = (&r1.principal().formula, &r2.principal().formula);
        match (r1.rule, r2.rule, f1, f2) {
            (RuleId::AndR, RuleId::AndL, Formula::And(a, b), _) => {
                let q = weaken(&l.premises[0], &[Lf::at(u, (**b).clone())], &[], v)?;
                let q = self.cut(&q, &r.premises[0], &Lf::at(w, (**a).clone()), u, Some(m), d)?;
                self.cut(&l.premises[1], &q, &Lf::at(w, (**b).clone()), u, Some(m), d)
            }
            (RuleId::OrR, RuleId::OrL, Formula::Or(a, b), _) => {
                let q = weaken(&r.premises[0], &[], &[Lf::at(w, (**b).clone())], v)?;
                let q = self.cut(&l.premises[0], &q, &Lf::at(w, (**a).clone()), u, Some(m), d)?;
                self.cut(&q, &r.premises[1], &Lf::at(w, (**b).clone()), u, Some(m), d)
            }
            (RuleId::ImplR, RuleId::ImplL, Formula::Impl(a, b), _) => {
                let e = r1.label.clone().ok_or_else(|| internal("missing eigenlabel"))?;
                let t = r2.target.clone().ok_or_else(|| internal("missing target"))?;
                let q1 = self.cut(&weaken(l, &[], &[Lf::at(&t, (**a).clone())], v)?, &r.premises[0], cf, u, Some(m), d)?;
                let q2 = self.cut(&weaken(l, &[Lf::at(&t, (**b).clone())], &[], v)?, &r.premises[1], cf, u, Some(m), d)?;
                let mm = if &t == w {
                    l.premises[0].clone()
                } else {
                    branch_forward(&l.premises[0], &Rel { from: w.clone(), to: e.clone() }, &t, v)?
                };
                let mm = merge_into(&mm, &Rel { from: t.clone(), to: e }, &t, v)?;
                let q3 = weaken(&q1, &[], &[Lf::at(&t, (**b).clone())], v)?;
                let q3 = self.cut(&q3, &mm, &Lf::at(&t, (**a).clone()), &t, Some(m), d)?;
                self.cut(&q3, &q2, &Lf::at(&t, (**b).clone()), &t, Some(m), d)
            }
            (RuleId::ExclR, RuleId::ExclL, Formula::Excl(a, b), _) => {
                let t = r1.target.clone().ok_or_else(|| internal("missing target"))?;
                let e = r2.label.clone().ok_or_else(|| internal("missing eigenlabel"))?;
                let q1 = self.cut(&l.premises[0], &weaken(r, &[], &[Lf::at(&t, (**a).clone())], v)?, cf, u, Some(m), d)?;
                let q2 = self.cut(&l.premises[1], &weaken(r, &[Lf::at(&t, (**b).clone())], &[], v)?, cf, u, Some(m), d)?;
                let mm = if &t == u {
                    r.premises[0].clone()
                } else {
                    branch_backward(&r.premises[0], &Rel { from: e.clone(), to: u.clone() }, &t, v)?
                };
                let mm = merge_into(&mm, &Rel { from: e, to: t.clone() }, &t, v)?;
                let q3 = weaken(&q1, &[], &[Lf::at(&t, (**b).clone())], v)?;
                let q3 = self.cut(&q3, &mm, &Lf::at(&t, (**a).clone()), &t, Some(m), d)?;
                self.cut(&q3, &q2, &Lf::at(&t, (**b).clone()), &t, Some(m), d)
            }
            (RuleId::ExistsR, RuleId::ExistsL, Formula::Exists(x, a), Formula::Exists(x2, a2)) => {
                let t = r1.term.clone().ok_or_else(|| internal("missing term"))?;
                let y = r2.var.clone().ok_or_else(|| internal("missing eigenvariable"))?;
                let inst = Lf::at(w, a.subst(&t, x));
                let q1 = self.cut(&l.premises[0], &weaken(r, &[], std::slice::from_ref(&inst), v)?, cf, u, Some(m), d)?;
                let mm = subst_proof(&r.premises[0], &t, &y, v)?;
                let mm = self.drop_term_atoms(mm, &s, &t, u)?;
                debug_assert!(mm.conclusion.contains(Side::Left, &Lf::at(u, a2.subst(&t, x2))));
                self.cut(&q1, &mm, &inst, u, Some(m), d)
            }
            (RuleId::ForallR, RuleId::ForallL, Formula::Forall(x, a), Formula::Forall(x2, a2)) => {
                let e = r1.label.clone().ok_or_else(|| internal("missing eigenlabel"))?;
                let y = r1.var.clone().ok_or_else(|| internal("missing eigenvariable"))?;
                let t2 = r2.target.clone().ok_or_else(|| internal("missing target"))?;
                let t = r2.term.clone().ok_or_else(|| internal("missing term"))?;
                let inst = Lf::at(&t2, a2.subst(&t, x2));
                let q2 = self.cut(&weaken(l, &[inst], &[], v)?, &r.premises[0], cf, u, Some(m), d)?;
                let mm = if &t2 == w {
                    l.premises[0].clone()
                } else {
                    branch_forward(&l.premises[0], &Rel { from: w.clone(), to: e.clone() }, &t2, v)?
                };
                let mm = merge_into(&mm, &Rel { from: t2.clone(), to: e }, &t2, v)?;
                let mm = subst_proof(&mm, &t, &y, v)?;
                let mm = self.drop_term_atoms(mm, &s, &t, &t2)?;
                self.cut(&mm, &q2, &Lf::at(&t2, a.subst(&t, x)), &t2, Some(m), d)
            }
            _ => Err(internal(format!("no reduction for {} against {} on {cf}", r1.rule, r2.rule))),
        }
    }

    /// Removes the domain atoms u:z for z ∈ VT(t) that `s` lacks, using
    /// (id) from an atom that makes t available at u, or (cd).
    fn drop_term_atoms(&self, mut p: Proof, s: &Sequent, t: &Term, u: &Label) -> Res<Proof> {
        for z in t.vars() {
            let d = Dom { label: u.clone(), var: z.clone() };
            if s.has_dom(&d) {
                continue;
            }
            if self.v == Variant::Cd {
                p = drop_domain_cd(&p, &d, self.v)?;
                continue;
            }
            let keep = s
                .dom()
                .iter()
                .find(|k| k.var == z && s.reachable(&k.label, u))
                .cloned()
                .ok_or_else(|| internal(format!("{t} is not available at {u}")))?;
            p = drop_domain_atom(&p, &keep, &d, self.v)?;
        }
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::check_proof;
    use crate::calculus::check_proof_with;
    use crate::sequent::parse_sequent;
    use crate::syntax::Signature;

    fn seq(text: &str) -> Sequent {
        parse_sequent(text, &mut Signature::new().with_function("c", 0)).unwrap()
    }

    fn lf(text: &str) -> Lf {
        seq(&format!("{text} |-")).ante()[0].clone()
    }

    fn gax_proof(text: &str, l: &str, r: &str, v: Variant) -> Proof {
        let p = derive_gax(&seq(text), &lf(l), &lf(r), v).unwrap();
        assert_eq!(check_proof(&p, v), Ok(()));
        p
    }

    fn checks(p: &Proof, v: Variant) {
        if let Err(e) = check_proof(p, v) {
            panic!("{e}\n{}", crate::proof_io::write_proof(p));
        }
    }

    #[test]
    fn gax_covers_every_connective() {
        for v in [Variant::Id, Variant::Cd] {
            for f in [
                "p",
                "bot",
                "top",
                "p & q",
                "p | q",
                "p -> q",
                "p -< q",
                "exists x. p(x)",
                "forall x. p(x)",
                "forall x. (p(x) -< exists y. (q(y) -> p(x)))",
            ] {
                gax_proof(&format!("R: w<u ; w: {f} |- u: {f}"), &format!("w: {f}"), &format!("u: {f}"), v);
            }
        }
    }

    #[test]
    fn weaken_cd_example_by_bot() {
        let p = crate::calculus::tests::cd_example();
        let q = weaken(&p, &[], &[Lf::new("v", Formula::Bot)], Variant::Cd);
        assert!(matches!(q, Err(TransformError::Precondition(_))));
        let q = weaken(&p, &[], &[Lf::new("w", Formula::Bot)], Variant::Cd).unwrap();
        checks(&q, Variant::Cd);
        assert_eq!(q.height(), p.height());
        assert!(q.conclusion.contains(Side::Right, &Lf::new("w", Formula::Bot)));
        let r = drop_bot_right(&q, &Lf::new("w", Formula::Bot), Variant::Cd).unwrap();
        assert_eq!(r.conclusion, p.conclusion);
        checks(&r, Variant::Cd);
    }

    #[test]
    fn weaken_renames_eigenvariables() {
        let p = gax_proof("w: exists x. p(x) |- w: exists x. p(x)", "w: exists x. p(x)", "w: exists x. p(x)", Variant::Id);
        assert_eq!(p.rule.var.as_deref(), Some("y'1"));
        let q = weaken(&p, &[lf("w: q(y'1)")], &[], Variant::Id).unwrap();
        checks(&q, Variant::Id);
        assert_ne!(q.rule.var.as_deref(), Some("y'1"));
        let q = weaken_var(&p, &Dom::new("w", "y'1"), Variant::Id).unwrap();
        checks(&q, Variant::Id);
        assert!(q.conclusion.has_dom(&Dom::new("w", "y'1")));
    }

    #[test]
    fn weaken_renames_eigenlabels() {
        let p = gax_proof("w: p -> q |- w: p -> q", "w: p -> q", "w: p -> q", Variant::Id);
        assert_eq!(p.rule.label, Some(Label::new("u1")));
        let s = p.conclusion.clone();
        assert!(weaken(&p, &[lf("u1: p")], &[], Variant::Id).is_err());
        assert_eq!(s.labels().len(), 1);
    }

    #[test]
    fn psub_replaces_free_variables() {
        let p = gax_proof("T: w:x ; w: p(x) & exists y. q(x, y) |- w: p(x) & exists y. q(x, y)", "w: p(x) & exists y. q(x, y)", "w: p(x) & exists y. q(x, y)", Variant::Id);
        let q = subst_proof(&p, &Term::app("f", vec![Term::var("y'1")]), "x", Variant::Id).unwrap();
        checks(&q, Variant::Id);
        assert_eq!(q.conclusion.to_string(), "T: w:y'1 ; w: p(f(y'1)) & exists y. q(f(y'1),y) |- w: p(f(y'1)) & exists y. q(f(y'1),y)");
        assert!(q.height() <= p.height());
    }

    #[test]
    fn branch_and_merge() {
        let v = Variant::Id;
        let p = gax_proof("R: w<u, w<v ; v: p -> q |- v: p -> q", "v: p -> q", "v: p -> q", v);
        let q = branch_forward(&p, &Rel::new("w", "v"), &"u".into(), v).unwrap();
        checks(&q, v);
        assert_eq!(q.conclusion.rel(), &[Rel::new("u", "v"), Rel::new("w", "u")]);
        assert!(branch_forward(&p, &Rel::new("w", "u"), &"v".into(), v).is_ok());
        assert!(branch_forward(&p, &Rel::new("w", "v"), &"v".into(), v).is_err());
        let m = merge(&q, &Rel::new("u", "v"), v).unwrap();
        checks(&m, v);
        assert_eq!(m.conclusion.to_string(), "R: w<u ; u: p -> q |- u: p -> q");
        let b = gax_proof("R: v<u, w<u ; v: p -< q |- v: p -< q", "v: p -< q", "v: p -< q", v);
        let c = branch_backward(&b, &Rel::new("v", "u"), &"w".into(), v).unwrap();
        checks(&c, v);
        assert_eq!(c.conclusion.rel(), &[Rel::new("v", "w"), Rel::new("w", "u")]);
    }

    #[test]
    fn lower_and_lift_move_formulas_along_edges() {
        let v = Variant::Id;
        for f in ["p", "p -> q", "forall x. p(x)", "p -< q", "exists x. p(x)", "p & (q | p)"] {
            let p = gax_proof(&format!("R: w<u ; T: w:z ; w: {f} |- w: {f}"), &format!("w: {f}"), &format!("w: {f}"), v);
            let q = lower(&p, &lf(&format!("w: {f}")), &"u".into(), v).unwrap();
            checks(&q, v);
            assert!(q.conclusion.contains(Side::Right, &lf(&format!("u: {f}"))));
            assert!(q.height() <= p.height());
            let p = gax_proof(&format!("R: w<u ; T: w:z ; u: {f} |- u: {f}"), &format!("u: {f}"), &format!("u: {f}"), v);
            let q = lift(&p, &lf(&format!("u: {f}")), &"w".into(), v).unwrap();
            checks(&q, v);
            assert!(q.conclusion.contains(Side::Left, &lf(&format!("w: {f}"))));
            assert!(q.height() <= p.height());
        }
    }

    #[test]
    fn lift_rewires_ds() {
        let v = Variant::Id;
        let s = seq("R: w<u ; u: p(y) |- u: exists x. p(x)");
        let i0 = RuleInstance::new(RuleId::Ds, lf("u: p(y)"));
        let s1 = premises(&s, &i0, v).unwrap().remove(0);
        let i1 = RuleInstance::new(RuleId::ExistsR, lf("u: exists x. p(x)")).term(Term::var("y"));
        let s2 = premises(&s1, &i1, v).unwrap().remove(0);
        let ax = node(s2, RuleInstance::new(RuleId::Ax, lf("u: p(y)")).target(&"u".into()), vec![], v).unwrap();
        let p = node(s.clone(), i0, vec![node(s1, i1, vec![ax], v).unwrap()], v).unwrap();
        checks(&p, v);
        let q = lift(&p, &lf("u: p(y)"), &"w".into(), v).unwrap();
        checks(&q, v);
        assert_eq!(q.conclusion.to_string(), "R: w<u ; w: p(y) |- u: exists x. p(x)");
    }

    #[test]
    fn domain_atoms() {
        let v = Variant::Id;
        let p = gax_proof("R: w<u ; T: u:x, w:x ; u: forall y. p(x, y) |- u: forall y. p(x, y)", "u: forall y. p(x, y)", "u: forall y. p(x, y)", v);
        let q = drop_domain_atom(&p, &Dom::new("w", "x"), &Dom::new("u", "x"), v).unwrap();
        checks(&q, v);
        assert!(!q.conclusion.has_dom(&Dom::new("u", "x")));
        assert!(drop_domain_atom(&p, &Dom::new("u", "x"), &Dom::new("w", "x"), v).is_err());
        assert_eq!(drop_domain_cd(&p, &Dom::new("u", "x"), v), Err(TransformError::Variant("cd", v)));
        let q = drop_domain_cd(&p, &Dom::new("u", "x"), Variant::Cd).unwrap();
        checks(&q, Variant::Cd);
    }

    #[test]
    fn contraction_on_principal_formulas() {
        for (v, f) in [
            (Variant::Id, "p & q"),
            (Variant::Id, "p | q"),
            (Variant::Id, "p -> q"),
            (Variant::Id, "p -< q"),
            (Variant::Id, "exists x. p(x)"),
            (Variant::Id, "forall x. p(x)"),
            (Variant::Cd, "forall x. (p(x) -> exists y. q(y))"),
        ] {
            let text = format!("R: w<u ; w: {f}, w: {f} |- u: {f}, u: {f}");
            let p = gax_proof(&text, &format!("w: {f}"), &format!("u: {f}"), v);
            let q = contract(&p, Side::Left, &lf(&format!("w: {f}")), v).unwrap();
            checks(&q, v);
            assert_eq!(q.conclusion.count(Side::Left, &lf(&format!("w: {f}"))), 1);
            let r = contract(&q, Side::Right, &lf(&format!("u: {f}")), v).unwrap();
            checks(&r, v);
            assert!(r.height() <= p.height());
            assert!(contract(&r, Side::Right, &lf(&format!("u: {f}")), v).is_err());
        }
    }

    #[test]
    fn inversion_recovers_premises() {
        let v = Variant::Id;
        let text = "R: w<u ; w: (p -> q) & (forall x. r(x)), w: exists x. r(x) |- u: (p -> q) & (forall x. r(x)), u: exists x. r(x)";
        let s = seq(text);
        let p = derive_gax(&s, &lf("w: (p -> q) & (forall x. r(x))"), &lf("u: (p -> q) & (forall x. r(x))"), v).unwrap();
        let p = weaken(&p, &[], &[], v).unwrap();
        let insts = [
            RuleInstance::new(RuleId::AndL, lf("w: (p -> q) & (forall x. r(x))")),
            RuleInstance::new(RuleId::AndR, lf("u: (p -> q) & (forall x. r(x))")),
            RuleInstance::new(RuleId::ExistsL, lf("w: exists x. r(x)")).var("k"),
            RuleInstance::new(RuleId::ExistsR, lf("u: exists x. r(x)")).term(Term::constant("c")),
        ];
        for inst in insts {
            let qs = invert(&p, &inst, v).unwrap();
            let expected = premises(&s, &inst, v).unwrap();
            assert_eq!(qs.len(), expected.len());
            for (q, e) in qs.iter().zip(&expected) {
                checks(q, v);
                assert!(q.conclusion.alpha_eq(e));
                assert!(q.height() <= p.height());
            }
        }
        let q = invert(&p, &RuleInstance::new(RuleId::AndR, lf("u: (p -> q) & (forall x. r(x))")), v).unwrap().remove(0);
        let inst = RuleInstance::new(RuleId::ImplR, lf("u: p -> q")).label(&"n".into());
        let qs = invert(&q, &inst, v).unwrap();
        checks(&qs[0], v);
        assert!(qs[0].conclusion.rel().contains(&Rel::new("u", "n")));
    }

    fn cut_and_eliminate(l: &Proof, r: &Proof, cf: &str, u: &str, v: Variant) -> (Proof, CutStats) {
        let c = cut_node(l, r, &lf(cf), &u.into(), v).unwrap();
        assert_eq!(check_proof_with(&c, v, true), Ok(()));
        let (p, stats) = eliminate_all_cuts_with_stats(&c, v).unwrap();
        checks(&p, v);
        assert!(!p.has_cut());
        assert_eq!(p.conclusion, c.conclusion);
        (p, stats)
    }

    #[test]
    fn cut_gax_lemmas_at_compound_formulas() {
        for v in [Variant::Id, Variant::Cd] {
            for f in ["p & q", "p | q", "p -> q", "p -< q", "exists x. p(x)", "forall x. p(x)", "forall x. (p(x) | q) -> (forall x. p(x)) | q"] {
                let l = gax_proof(&format!("R: w<u, u<v ; w: {f} |- v: {f}, u: {f}"), &format!("w: {f}"), &format!("u: {f}"), v);
                let r = gax_proof(&format!("R: w<u, u<v ; w: {f}, u: {f} |- v: {f}"), &format!("u: {f}"), &format!("v: {f}"), v);
                let (_, stats) = cut_and_eliminate(&l, &r, &format!("u: {f}"), "u", v);
                assert!(stats.calls >= 1);
            }
        }
    }

    #[test]
    fn cut_against_bot_left() {
        let v = Variant::Id;
        let s = seq("w: bot |- w: p & q");
        let l = node(s, RuleInstance::new(RuleId::BotL, lf("w: bot")), vec![], v).unwrap();
        let rs = seq("w: bot, w: p & q |-");
        let ri = RuleInstance::new(RuleId::AndL, lf("w: p & q"));
        let rp = premises(&rs, &ri, v).unwrap().remove(0);
        let r = node(rs, ri, vec![node(rp, RuleInstance::new(RuleId::BotL, lf("w: bot")), vec![], v).unwrap()], v).unwrap();
        let (p, _) = cut_and_eliminate(&l, &r, "w: p & q", "w", v);
        assert_eq!(p.rule.rule, RuleId::BotL);
        assert_eq!(p.height(), 1);
    }

    fn ax(s: &Sequent, l: &str, target: &str, v: Variant) -> Proof {
        node(s.clone(), RuleInstance::new(RuleId::Ax, lf(l)).target(&target.into()), vec![], v).unwrap()
    }

    #[test]
    fn cut_exclusion_principal_case() {
        let v = Variant::Id;
        let cf = lf("w: p -< q");
        let ls = seq("R: a<w ; a: p |- w: p, w: p -< q");
        let li = RuleInstance::new(RuleId::ExclR, cf.clone()).target(&"a".into());
        let lps = premises(&ls, &li, v).unwrap();
        let l = node(ls, li, vec![ax(&lps[0], "a: p", "a", v), ax(&lps[1], "a: p", "w", v)], v).unwrap();
        let rs = seq("R: a<w ; a: p, w: p -< q |- w: p");
        let ri = RuleInstance::new(RuleId::ExclL, cf.clone()).label(&"v".into());
        let rps = premises(&rs, &ri, v).unwrap();
        let r = node(rs, ri, vec![ax(&rps[0], "a: p", "w", v)], v).unwrap();
        let (p, stats) = cut_and_eliminate(&l, &r, "w: p -< q", "w", v);
        assert!(stats.measure_checks >= 2);
        assert_eq!(p.conclusion.to_string(), "R: a<w ; a: p |- w: p");
    }
}
