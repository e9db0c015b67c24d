//! Random generation of models, formulas, sequents, proofs and transform
//! parameters, for fuzzing and property tests.

use crate::calculus::{applicable, check_proof, premises, Proof, RuleId, RuleInstance, Variant};
use crate::semantics::{orders, up_sets, FiniteModel, FunctionTable, PredicateTable};
use crate::sequent::{Dom, Label, Lf, Rel, Sequent, Side};
use crate::syntax::{Formula, Signature, Term};
use crate::transform::{cut_node, derive_gax, weaken, weaken_var, Transform};
use rand::seq::SliceRandom;
use rand::Rng;
use std::collections::{BTreeMap, BTreeSet};

/// Predicates p/1 and q/0, one unary function f and constants a, b.
pub fn fuzz_signature() -> Signature {
    Signature::new()
        .with_predicate("p", 1)
        .with_predicate("q", 0)
        .with_function("f", 1)
        .with_function("a", 0)
        .with_function("b", 0)
}

/// Knobs for random sequents and proofs.
#[derive(Clone, Debug)]
pub struct GenConfig {
    pub max_labels: usize,
    pub formula_size: usize,
    pub exclusion: bool,
    /// Depth of random rule expansion before leaves must close.
    pub max_depth: usize,
    pub attempts: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig { max_labels: 4, formula_size: 3, exclusion: true, max_depth: 5, attempts: 2000 }
    }
}

/// A random model over `sig` satisfying every condition of `variant`.
/// Element 0 exists at every world and hosts the constants. Functions of
/// arity two or more force every element into every domain.
pub fn random_model<R: Rng>(rng: &mut R, sig: &Signature, variant: Variant, max_worlds: usize, max_universe: usize) -> FiniteModel {
    let n = rng.gen_range(1..=max_worlds.max(1));
    let all_orders = orders(n);
    let leq = all_orders.choose(rng).expect("at least the discrete order").clone();
    let m = rng.gen_range(1..=max_universe.max(1));
    let full = (1u32 << n) - 1;
    let ups: Vec<u32> = up_sets(&leq).into_iter().filter(|&s| s != 0).collect();
    let wide = sig.functions.values().any(|&a| a >= 2);
    let masks: Vec<u32> = (0..m)
        .map(|a| if a == 0 || variant == Variant::Cd || wide { full } else { *ups.choose(rng).unwrap() })
        .collect();
    let domains: Vec<BTreeSet<usize>> =
        (0..n).map(|w| (0..m).filter(|&a| masks[a] & (1 << w) != 0).collect()).collect();
    let core: Vec<usize> = (0..m).filter(|&a| masks[a] == full).collect();
    let tuples = |k: usize| -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new()];
        for _ in 0..k {
            out = out.into_iter().flat_map(|t| (0..m).map(move |a| [t.clone(), vec![a]].concat())).collect();
        }
        out
    };
    let mut functions = BTreeMap::new();
    for (f, &k) in &sig.functions {
        let mut table = BTreeMap::new();
        for args in tuples(k) {
            let mask = args.iter().fold(full, |acc, &a| acc & masks[a]);
            let same: Vec<usize> = (0..m).filter(|&b| masks[b] == mask).collect();
            let pool = if k == 0 { &core } else { &same };
            table.insert(args, *pool.choose(rng).expect("element 0 is core"));
        }
        functions.insert(f.clone(), FunctionTable { arity: k, table });
    }
    let mut predicates = BTreeMap::new();
    for (p, &k) in &sig.predicates {
        let mut holds = vec![BTreeSet::new(); n];
        for tu in tuples(k) {
            let mask = tu.iter().fold(full, |acc, &a| acc & masks[a]);
            let up = if rng.gen_bool(0.3) { 0 } else { *up_sets(&leq).choose(rng).unwrap() };
            for (w, h) in holds.iter_mut().enumerate() {
                if mask & up & (1 << w) != 0 {
                    h.insert(tu.clone());
                }
            }
        }
        predicates.insert(p.clone(), PredicateTable { arity: k, holds });
    }
    FiniteModel {
        worlds: (0..n).map(|i| format!("w{i}")).collect(),
        leq,
        universe: (0..m).map(|i| format!("e{i}")).collect(),
        domains,
        functions,
        predicates,
        notes: Vec::new(),
    }
}

fn constants(sig: &Signature) -> Vec<Term> {
    sig.constants().map(Term::constant).collect()
}

/// A random term over `vars` and the constants of `sig`, nesting unary
/// functions up to `depth`.
pub fn random_term<R: Rng>(rng: &mut R, sig: &Signature, vars: &[String], depth: usize) -> Term {
    let unary: Vec<&String> = sig.functions.iter().filter(|(_, &a)| a == 1).map(|(f, _)| f).collect();
    if depth > 0 && !unary.is_empty() && rng.gen_bool(0.25) {
        let f = unary.choose(rng).unwrap();
        return Term::app(f, vec![random_term(rng, sig, vars, depth - 1)]);
    }
    let consts = constants(sig);
    if vars.is_empty() || (!consts.is_empty() && rng.gen_bool(0.3)) {
        return consts.choose(rng).cloned().unwrap_or_else(|| Term::constant("a"));
    }
    Term::Var(vars.choose(rng).unwrap().clone())
}

fn random_atom<R: Rng>(rng: &mut R, sig: &Signature, vars: &[String]) -> Formula {
    let preds: Vec<(&String, &usize)> = sig.predicates.iter().collect();
    let Some((p, &k)) = preds.choose(rng) else {
        return Formula::prop("q");
    };
    Formula::atom(p, (0..k).map(|_| random_term(rng, sig, vars, 1)).collect())
}

/// A random formula with roughly `size` connectives whose free variables
/// come from `vars`.
pub fn random_formula<R: Rng>(rng: &mut R, sig: &Signature, vars: &[String], size: usize, exclusion: bool) -> Formula {
    if size == 0 {
        return match rng.gen_range(0..10) {
            0 => Formula::Bot,
            1 => Formula::Top,
            _ => random_atom(rng, sig, vars),
        };
    }
    let k = if exclusion { 7 } else { 6 };
    let split = rng.gen_range(0..size);
    let sub = |rng: &mut R, s: usize| random_formula(rng, sig, vars, s, exclusion);
    match rng.gen_range(0..k) {
        0 => Formula::and(sub(rng, split), sub(rng, size - 1 - split)),
        1 => Formula::or(sub(rng, split), sub(rng, size - 1 - split)),
        2 | 3 => Formula::imp(sub(rng, split), sub(rng, size - 1 - split)),
        c @ (4 | 5) => {
            let x = ["x", "y", "z"].choose(rng).unwrap().to_string();
            let mut inner_vars = vars.to_vec();
            inner_vars.push(x.clone());
            let body = random_formula(rng, sig, &inner_vars, size - 1, exclusion);
            if c == 4 {
                Formula::exists(&x, body)
            } else {
                Formula::forall(&x, body)
            }
        }
        _ => Formula::excl(sub(rng, split), sub(rng, size - 1 - split)),
    }
}

const LABELS: [&str; 5] = ["w", "u", "v", "t", "s"];

/// A random polytree with `n` labels named from w, u, v, t, s.
pub fn random_polytree<R: Rng>(rng: &mut R, n: usize) -> Vec<Rel> {
    (1..n.min(LABELS.len()))
        .map(|i| {
            let j = rng.gen_range(0..i);
            if rng.gen_bool(0.6) {
                Rel::new(LABELS[j], LABELS[i])
            } else {
                Rel::new(LABELS[i], LABELS[j])
            }
        })
        .collect()
}

/// A random valid sequent. It usually contains a formula on the left
/// together with a copy of it on the right at a reachable label, and
/// sometimes duplicated formulas, ⊥ on the right or ⊤ on the left.
pub fn random_sequent<R: Rng>(rng: &mut R, sig: &Signature, variant: Variant, cfg: &GenConfig) -> Sequent {
    let n = rng.gen_range(1..=cfg.max_labels.clamp(1, LABELS.len()));
    let rel = random_polytree(rng, n);
    let labels: Vec<Label> = LABELS[..n].iter().map(|l| Label::new(l)).collect();
    let mut s = Sequent::new(rel, vec![], vec![], vec![]);
    let vars: Vec<String> = ["x", "y"].iter().filter(|_| rng.gen_bool(0.5)).map(|v| v.to_string()).collect();
    for x in &vars {
        s.add_dom(Dom { label: labels.choose(rng).unwrap().clone(), var: x.clone() });
        if variant != Variant::Cd && rng.gen_bool(0.15) {
            s.add_dom(Dom { label: labels.choose(rng).unwrap().clone(), var: x.clone() });
        }
    }
    let formula = |rng: &mut R| {
        let size = rng.gen_range(0..=cfg.formula_size);
        random_formula(rng, sig, &vars, size, cfg.exclusion)
    };
    for _ in 0..rng.gen_range(0..=2) {
        let f = formula(rng);
        s.add_ante(Lf::at(labels.choose(rng).unwrap(), f));
    }
    for _ in 0..rng.gen_range(0..=2) {
        let f = formula(rng);
        s.add_succ(Lf::at(labels.choose(rng).unwrap(), f));
    }
    if rng.gen_bool(0.9) {
        let f = formula(rng);
        let w = labels.choose(rng).unwrap().clone();
        let ups: Vec<Label> = labels.iter().filter(|u| s.reachable(&w, u)).cloned().collect();
        let u = ups.choose(rng).unwrap().clone();
        s.add_ante(Lf::at(&w, f.clone()));
        s.add_succ(Lf::at(&u, f));
    }
    if rng.gen_bool(0.35) {
        let side = if rng.gen_bool(0.5) { Side::Left } else { Side::Right };
        if let Some(lf) = s.side(side).choose(rng).cloned() {
            s.add(side, lf);
        }
    }
    if rng.gen_bool(0.15) {
        s.add_succ(Lf::at(labels.choose(rng).unwrap(), Formula::Bot));
    }
    if rng.gen_bool(0.15) {
        s.add_ante(Lf::at(labels.choose(rng).unwrap(), Formula::Top));
    }
    if rng.gen_bool(0.03) {
        s.add_ante(Lf::at(labels.choose(rng).unwrap(), Formula::Bot));
    }
    if s.ante().is_empty() && s.succ().is_empty() {
        s.add_succ(Lf::at(&labels[0], Formula::Top));
    }
    debug_assert!(s.is_valid(), "{s}");
    s
}

/// Candidate witness terms at label `w`: constants, variables available
/// at `w` (any free variable under constant domains), and f applied to
/// one of those.
pub fn witness_terms(s: &Sequent, w: &Label, sig: &Signature, variant: Variant) -> Vec<Term> {
    let mut base = constants(sig);
    let vars: BTreeSet<String> = if variant.checks_availability() {
        s.available_vars(w).unwrap_or_default()
    } else {
        s.free_vars()
    };
    base.extend(vars.into_iter().map(Term::Var));
    if base.is_empty() {
        base.push(Term::constant("a"));
    }
    let mut out = base.clone();
    for (f, _) in sig.functions.iter().filter(|(_, &a)| a == 1) {
        out.extend(base.iter().map(|t| Term::app(f, vec![t.clone()])));
    }
    out
}

/// A random non-initial rule instance applicable to `s`, with quantifier
/// witnesses filled in.
pub fn random_rule_instance<R: Rng>(rng: &mut R, s: &Sequent, sig: &Signature, variant: Variant) -> Option<RuleInstance> {
    let insts: Vec<RuleInstance> = applicable(s, variant).into_iter().filter(|i| !i.rule.is_initial()).collect();
    let mut inst = insts.choose(rng)?.clone();
    match inst.rule {
        RuleId::ExistsR => {
            let w = inst.principal().label.clone();
            inst.term = witness_terms(s, &w, sig, variant).choose(rng).cloned();
        }
        RuleId::ForallL => {
            let u = inst.target.clone()?;
            inst.term = witness_terms(s, &u, sig, variant).choose(rng).cloned();
        }
        _ => {}
    }
    premises(s, &inst, variant).ok()?;
    Some(inst)
}

/// Closes `s` with an initial rule, or with a derived generalized axiom
/// when the same formula occurs on the left and at a reachable label on
/// the right.
pub fn close_leaf(s: &Sequent, variant: Variant) -> Option<Proof> {
    if let Some(inst) = applicable(s, variant).into_iter().find(|i| i.rule.is_initial()) {
        return Some(Proof::leaf(s.clone(), inst));
    }
    for l in s.ante() {
        for r in s.succ() {
            if l.formula.alpha_eq(&r.formula) && s.reachable(&l.label, &r.label) {
                if let Ok(p) = derive_gax(s, l, r, variant) {
                    return Some(p);
                }
            }
        }
    }
    None
}

fn expand<R: Rng>(rng: &mut R, s: &Sequent, sig: &Signature, variant: Variant, depth: usize) -> Option<Proof> {
    if depth == 0 || rng.gen_bool(0.2) {
        if let Some(p) = close_leaf(s, variant) {
            return Some(p);
        }
        if depth == 0 {
            return None;
        }
    }
    let Some(inst) = random_rule_instance(rng, s, sig, variant) else {
        return close_leaf(s, variant);
    };
    let ps = premises(s, &inst, variant).ok()?;
    let mut subs = Vec::with_capacity(ps.len());
    for q in &ps {
        match expand(rng, q, sig, variant, depth - 1) {
            Some(p) => subs.push(p),
            None => return close_leaf(s, variant),
        }
    }
    Some(Proof::node(s.clone(), inst, subs))
}

/// A random checking proof, built by expanding a random sequent with
/// random rule applications and closing every leaf.
pub fn random_proof<R: Rng>(rng: &mut R, sig: &Signature, variant: Variant, cfg: &GenConfig) -> Option<Proof> {
    for _ in 0..cfg.attempts {
        let s = random_sequent(rng, sig, variant, cfg);
        if let Some(p) = expand(rng, &s, sig, variant, cfg.max_depth) {
            debug_assert_eq!(check_proof(&p, variant), Ok(()), "{}", crate::proof_io::write_proof(&p));
            return Some(p);
        }
    }
    None
}

/// Names accepted by [`random_transform`].
pub const TRANSFORM_NAMES: [&str; 14] =
    ["wv", "id", "cd", "iw", "br_f", "br_b", "mrg", "psub", "ctr_l", "ctr_r", "lwr", "lft", "botR", "topL"];

/// Legal parameters for the transform `name` on `p`. The returned proof
/// is the input the transform applies to: usually `p` itself, or `p`
/// weakened so that the transform has something to act on (a second
/// domain atom for id, a copy of a formula for contraction, ⊥ or ⊤ for
/// the unit rules).
pub fn random_transform<R: Rng>(
    rng: &mut R,
    p: &Proof,
    sig: &Signature,
    variant: Variant,
    name: &str,
) -> Option<(Proof, Transform)> {
    let s = &p.conclusion;
    let labels: Vec<Label> = s.labels().into_iter().collect();
    let strict: Vec<(Label, Label)> = labels
        .iter()
        .flat_map(|a| labels.iter().filter(move |b| a != *b && s.reachable(a, b)).map(move |b| (a.clone(), b.clone())))
        .collect();
    let vars: Vec<String> = s.free_vars().into_iter().collect();
    let t = match name {
        "wv" => {
            let x = ["x", "y", "z"].choose(rng).unwrap().to_string();
            Transform::Wv(Dom { label: labels.choose(rng)?.clone(), var: x })
        }
        "id" => {
            let cands: Vec<(Dom, Label)> = s
                .dom()
                .iter()
                .flat_map(|d| strict.iter().filter(move |(a, _)| a == &d.label).map(move |(_, b)| (d.clone(), b.clone())))
                .collect();
            let (keep, u) = cands.choose(rng)?.clone();
            let drop = Dom { label: u, var: keep.var.clone() };
            let input = weaken_var(p, &drop, variant).ok()?;
            return Some((input, Transform::Id { keep, drop }));
        }
        "cd" => {
            if variant != Variant::Cd {
                return None;
            }
            Transform::Cd(s.dom().choose(rng)?.clone())
        }
        "iw" => {
            let mut left = Vec::new();
            let mut right = Vec::new();
            for _ in 0..rng.gen_range(1..=2) {
                let lf = Lf::at(labels.choose(rng)?, random_formula(rng, sig, &vars, 2, true));
                if rng.gen_bool(0.5) {
                    left.push(lf);
                } else {
                    right.push(lf);
                }
            }
            Transform::Iw { left, right }
        }
        "br_f" => {
            let cands: Vec<(Rel, Label)> = s
                .rel()
                .iter()
                .flat_map(|r| {
                    labels
                        .iter()
                        .filter(move |u| *u != &r.from && s.reachable(&r.from, u) && !s.reachable(u, &r.to) && !s.reachable(&r.to, u))
                        .map(move |u| (r.clone(), u.clone()))
                })
                .collect();
            let (edge, to) = cands.choose(rng)?.clone();
            Transform::BrF { edge, to }
        }
        "br_b" => {
            let cands: Vec<(Rel, Label)> = s
                .rel()
                .iter()
                .flat_map(|r| {
                    labels
                        .iter()
                        .filter(move |w| *w != &r.to && s.reachable(w, &r.to) && !s.reachable(w, &r.from))
                        .map(move |w| (r.clone(), w.clone()))
                })
                .collect();
            let (edge, to) = cands.choose(rng)?.clone();
            Transform::BrB { edge, to }
        }
        "mrg" => Transform::Mrg { edge: s.rel().choose(rng)?.clone() },
        "psub" => {
            let x = if vars.is_empty() || rng.gen_bool(0.2) {
                ["x", "y"].choose(rng).unwrap().to_string()
            } else {
                vars.choose(rng).unwrap().clone()
            };
            let mut pool = vars.clone();
            pool.push("z".into());
            Transform::Psub { term: random_term(rng, sig, &pool, 1), var: x }
        }
        "ctr_l" | "ctr_r" => {
            let side = if name == "ctr_l" { Side::Left } else { Side::Right };
            let dups: Vec<Lf> = s.side(side).iter().filter(|l| s.count(side, l) >= 2).cloned().collect();
            let (input, lf) = match dups.choose(rng) {
                Some(lf) => (p.clone(), lf.clone()),
                None => {
                    let lf = s.side(side).choose(rng)?.clone();
                    let (l, r) = if side == Side::Left { (vec![lf.clone()], vec![]) } else { (vec![], vec![lf.clone()]) };
                    (weaken(p, &l, &r, variant).ok()?, lf)
                }
            };
            let t = if side == Side::Left { Transform::CtrL(lf) } else { Transform::CtrR(lf) };
            return Some((input, t));
        }
        "botR" | "topL" => {
            let (side, unit) = if name == "botR" { (Side::Right, Formula::Bot) } else { (Side::Left, Formula::Top) };
            let present: Vec<Lf> = s.side(side).iter().filter(|l| l.formula == unit).cloned().collect();
            let (input, lf) = match present.choose(rng) {
                Some(lf) => (p.clone(), lf.clone()),
                None => {
                    let lf = Lf::at(labels.choose(rng)?, unit);
                    let (l, r) = if side == Side::Left { (vec![lf.clone()], vec![]) } else { (vec![], vec![lf.clone()]) };
                    (weaken(p, &l, &r, variant).ok()?, lf)
                }
            };
            let t = if side == Side::Right { Transform::BotR(lf) } else { Transform::TopL(lf) };
            return Some((input, t));
        }
        "lwr" => {
            let cands: Vec<(Lf, Label)> = s
                .succ()
                .iter()
                .flat_map(|lf| strict.iter().filter(move |(a, _)| a == &lf.label).map(move |(_, b)| (lf.clone(), b.clone())))
                .collect();
            let (formula, to) = cands.choose(rng)?.clone();
            Transform::Lwr { formula, to }
        }
        "lft" => {
            let cands: Vec<(Lf, Label)> = s
                .ante()
                .iter()
                .flat_map(|lf| strict.iter().filter(move |(_, b)| b == &lf.label).map(move |(a, _)| (lf.clone(), a.clone())))
                .collect();
            let (formula, to) = cands.choose(rng)?.clone();
            Transform::Lft { formula, to }
        }
        _ => return None,
    };
    Some((p.clone(), t))
}

/// A formula whose main connective is `kind` (one of and, or, imp, excl,
/// exists, forall, atom) with small random immediate subformulas.
pub fn formula_with_main<R: Rng>(rng: &mut R, sig: &Signature, vars: &[String], kind: &str) -> Formula {
    let sub = |rng: &mut R, vs: &[String]| {
        let size = rng.gen_range(0..=1);
        random_formula(rng, sig, vs, size, true)
    };
    match kind {
        "and" => Formula::and(sub(rng, vars), sub(rng, vars)),
        "or" => Formula::or(sub(rng, vars), sub(rng, vars)),
        "imp" => Formula::imp(sub(rng, vars), sub(rng, vars)),
        "excl" => Formula::excl(sub(rng, vars), sub(rng, vars)),
        "exists" | "forall" => {
            let mut vs = vars.to_vec();
            vs.push("z".into());
            let body = Formula::or(random_atom_with(rng, sig, "z"), sub(rng, &vs));
            if kind == "exists" {
                Formula::exists("z", body)
            } else {
                Formula::forall("z", body)
            }
        }
        _ => random_atom(rng, sig, vars),
    }
}

fn random_atom_with<R: Rng>(rng: &mut R, sig: &Signature, x: &str) -> Formula {
    let unary: Vec<&String> = sig.predicates.iter().filter(|(_, &k)| k == 1).map(|(p, _)| p).collect();
    match unary.choose(rng) {
        Some(p) => Formula::atom(p, vec![Term::var(x)]),
        None => random_atom(rng, sig, &[x.to_string()]),
    }
}

/// Main connectives used by [`cut_corpus`] for principal clashes.
pub const CUT_KINDS: [&str; 6] = ["and", "or", "imp", "excl", "exists", "forall"];

/// A cut on w:φ with φ of main connective `kind` where both premise proofs
/// end with the rule introducing φ. The context contains w:φ on the left
/// and u:φ on the right so that every premise closes by a generalized
/// axiom.
pub fn principal_clash<R: Rng>(rng: &mut R, sig: &Signature, variant: Variant, kind: &str) -> Option<Proof> {
    let vars = vec!["x".to_string()];
    let phi = formula_with_main(rng, sig, &vars, kind);
    let (w, u) = (Label::new("w"), Label::new("u"));
    let cf = Lf::at(&w, phi.clone());
    let rel = match kind {
        "excl" => vec![Rel::new("t", "w"), Rel::new("w", "u")],
        _ => vec![Rel::new("w", "u"), Rel::new("u", "t")],
    };
    let ctx = Sequent::new(rel, vec![Dom::new("w", "x")], vec![cf.clone()], vec![Lf::at(&u, phi.clone())]);
    let fresh = Sequent::fresh_label("e", &ctx.labels());
    let left_s = ctx.clone().with(Side::Right, cf.clone());
    let right_s = ctx.clone().with(Side::Left, Lf::at(&u, phi.clone()));
    let pick = |rng: &mut R, from: &Label| -> Label {
        let cands: Vec<Label> = ctx.labels().into_iter().filter(|l| ctx.reachable(from, l)).collect();
        cands.choose(rng).unwrap().clone()
    };
    let (li, ri) = match kind {
        "and" => (RuleInstance::new(RuleId::AndR, cf.clone()), RuleInstance::new(RuleId::AndL, Lf::at(&u, phi.clone()))),
        "or" => (RuleInstance::new(RuleId::OrR, cf.clone()), RuleInstance::new(RuleId::OrL, Lf::at(&u, phi.clone()))),
        "imp" => (
            RuleInstance::new(RuleId::ImplR, cf.clone()).label(&fresh),
            RuleInstance::new(RuleId::ImplL, Lf::at(&u, phi.clone())).target(&pick(rng, &u)),
        ),
        "excl" => {
            let cands: Vec<Label> = ctx.labels().into_iter().filter(|l| ctx.reachable(l, &w)).collect();
            (
                RuleInstance::new(RuleId::ExclR, cf.clone()).target(cands.choose(rng).unwrap()),
                RuleInstance::new(RuleId::ExclL, Lf::at(&u, phi.clone())).label(&fresh),
            )
        }
        "exists" => {
            let t = witness_terms(&left_s, &w, sig, variant).choose(rng).cloned()?;
            (
                RuleInstance::new(RuleId::ExistsR, cf.clone()).term(t),
                RuleInstance::new(RuleId::ExistsL, Lf::at(&u, phi.clone())).var("y"),
            )
        }
        "forall" => {
            let target = pick(rng, &u);
            let t = witness_terms(&right_s, &target, sig, variant).choose(rng).cloned()?;
            (
                RuleInstance::new(RuleId::ForallR, cf.clone()).label(&fresh).var("y"),
                RuleInstance::new(RuleId::ForallL, Lf::at(&u, phi.clone())).target(&target).term(t),
            )
        }
        _ => return None,
    };
    let build = |s: &Sequent, inst: RuleInstance| -> Option<Proof> {
        let subs = premises(s, &inst, variant).ok()?.iter().map(|q| close_leaf(q, variant)).collect::<Option<Vec<_>>>()?;
        Some(Proof::node(s.clone(), inst, subs))
    };
    let l = build(&left_s, li)?;
    let r = build(&right_s, ri)?;
    cut_node(&l, &r, &cf, &u, variant).ok()
}

/// A cut of two generalized axioms on a random formula along the chain
/// w < u < v, in a randomly weakened context.
pub fn gax_cut<R: Rng>(rng: &mut R, sig: &Signature, variant: Variant) -> Option<Proof> {
    let vars = vec!["x".to_string()];
    let size = rng.gen_range(1..=4);
    let phi = random_formula(rng, sig, &vars, size, true);
    let rel = vec![Rel::new("w", "u"), Rel::new("u", "v")];
    let (w, u, v) = (Label::new("w"), Label::new("u"), Label::new("v"));
    let mut ctx = Sequent::new(rel, vec![Dom::new("w", "x")], vec![Lf::at(&w, phi.clone())], vec![Lf::at(&v, phi.clone())]);
    for _ in 0..rng.gen_range(0..=2) {
        let lf = Lf::at([&w, &u, &v].choose(rng).unwrap(), random_formula(rng, sig, &vars, 1, true));
        if rng.gen_bool(0.5) {
            ctx.add_ante(lf);
        } else {
            ctx.add_succ(lf);
        }
    }
    let mid = Lf::at(&u, phi.clone());
    let l = derive_gax(&ctx.clone().with(Side::Right, mid.clone()), &Lf::at(&w, phi.clone()), &mid, variant).ok()?;
    let r = derive_gax(&ctx.clone().with(Side::Left, mid.clone()), &mid, &Lf::at(&v, phi.clone()), variant).ok()?;
    cut_node(&l, &r, &mid, &u, variant).ok()
}

/// At least `n` cut-bearing proofs: principal clashes for every
/// connective under both variants, then generalized-axiom cuts.
pub fn cut_corpus<R: Rng>(rng: &mut R, sig: &Signature, n: usize) -> Vec<(Proof, Variant)> {
    let mut out = Vec::new();
    let variants = [Variant::Id, Variant::Cd];
    'outer: for round in 0.. {
        for kind in CUT_KINDS {
            let v = variants[round % 2];
            if let Some(p) = principal_clash(rng, sig, v, kind) {
                out.push((p, v));
            }
        }
        let v = variants[round % 2];
        if let Some(p) = gax_cut(rng, sig, v) {
            out.push((p, v));
        }
        if out.len() >= n && round >= 3 {
            break 'outer;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::check_proof_with;
    use crate::semantics::check_model;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn models_satisfy_their_conditions() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let sig = fuzz_signature();
        for v in [Variant::Id, Variant::Cd] {
            for _ in 0..200 {
                let m = random_model(&mut rng, &sig, v, 3, 3);
                assert_eq!(check_model(&m, v), Ok(()), "{m:?}");
            }
        }
    }

    #[test]
    fn random_proofs_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let sig = fuzz_signature();
        let mut rules = BTreeSet::new();
        for i in 0..100 {
            let v = if i % 2 == 0 { Variant::Id } else { Variant::Cd };
            let p = random_proof(&mut rng, &sig, v, &GenConfig::default()).expect("generator gave up");
            assert_eq!(check_proof(&p, v), Ok(()));
            rules.extend(p.rule_counts().into_keys());
        }
        assert!(rules.len() >= 14, "{rules:?}");
    }

    #[test]
    fn cut_corpus_is_well_formed() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let corpus = cut_corpus(&mut rng, &fuzz_signature(), 50);
        assert!(corpus.len() >= 50);
        for (p, v) in &corpus {
            assert!(p.has_cut());
            assert_eq!(check_proof_with(p, *v, true), Ok(()));
        }
    }

    #[test]
    fn transform_parameters_are_legal() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let sig = fuzz_signature();
        for name in TRANSFORM_NAMES {
            let mut found = 0;
            for _ in 0..200 {
                let v = if name == "cd" { Variant::Cd } else { Variant::Id };
                let p = random_proof(&mut rng, &sig, v, &GenConfig::default()).unwrap();
                if let Some((input, t)) = random_transform(&mut rng, &p, &sig, v, name) {
                    assert_eq!(t.name(), name);
                    let out = t.apply(&input, v).unwrap_or_else(|e| panic!("{name}: {e}"));
                    assert_eq!(check_proof(&out, v), Ok(()), "{name}: {t:?} on {}", input.conclusion);
                    found += 1;
                }
            }
            assert!(found >= 10, "{name}: only {found}");
        }
    }
}
