//! Bounded round-robin proof search with countermodel extraction from
//! saturated open branches.

use crate::calculus::{check_proof, premises, Proof, RuleId, RuleInstance, Variant};
use crate::semantics::{check_model, Assignment, Countermodel, FiniteModel, FunctionTable, Interpretation, PredicateTable};
use crate::sequent::{Dom, Label, Lf, Rel, Sequent, Violation};
use crate::syntax::{fresh_name, vt, Formula, Signature, Term};
use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    pub variant: Variant,
    pub max_rounds: usize,
    pub max_term_depth: usize,
    /// Disables the exclusion rules and (ds).
    pub intuitionistic_only: bool,
    /// Upper bound on rule applications before giving up.
    pub node_limit: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { variant: Variant::Id, max_rounds: 6, max_term_depth: 2, intuitionistic_only: false, node_limit: 200_000 }
    }
}

impl SearchConfig {
    pub fn new(variant: Variant) -> Self {
        SearchConfig { variant, ..Default::default() }
    }
}

/// Counters describing an unfinished search.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub rounds: usize,
    pub rule_applications: usize,
    pub closed_branches: usize,
    pub open_branch_labels: usize,
    pub open_branch_formulas: usize,
    pub saturated: bool,
    pub reason: String,
}

impl fmt::Display for SearchStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "rounds={}", self.rounds)?;
        writeln!(f, "rule_applications={}", self.rule_applications)?;
        writeln!(f, "closed_branches={}", self.closed_branches)?;
        writeln!(f, "open_branch_labels={}", self.open_branch_labels)?;
        writeln!(f, "open_branch_formulas={}", self.open_branch_formulas)?;
        writeln!(f, "saturated={}", self.saturated)?;
        writeln!(f, "reason={}", self.reason)
    }
}

/// A record of an applied (rule, principal, witness) triple.
type Record = (RuleId, Lf, String);

/// One branch of the search: its top sequent, what has been applied on it
/// and the union of everything that occurred along it.
#[derive(Clone, Debug)]
pub struct Branch {
    pub current: Sequent,
    pub history: BTreeSet<Record>,
    pub rel: BTreeSet<Rel>,
    pub dom: BTreeSet<Dom>,
    pub ante: BTreeSet<Lf>,
    pub succ: BTreeSet<Lf>,
    changed: bool,
}

impl Branch {
    pub fn new(s: Sequent) -> Branch {
        let mut b = Branch {
            current: Sequent::default(),
            history: BTreeSet::new(),
            rel: BTreeSet::new(),
            dom: BTreeSet::new(),
            ante: BTreeSet::new(),
            succ: BTreeSet::new(),
            changed: false,
        };
        b.advance(s);
        b
    }

    fn advance(&mut self, s: Sequent) {
        self.rel.extend(s.rel().iter().cloned());
        self.dom.extend(s.dom().iter().cloned());
        self.ante.extend(s.ante().iter().cloned());
        self.succ.extend(s.succ().iter().cloned());
        self.current = s;
    }

    pub fn labels(&self) -> BTreeSet<Label> {
        let mut out: BTreeSet<Label> = self.rel.iter().flat_map(|r| [r.from.clone(), r.to.clone()]).collect();
        out.extend(self.dom.iter().map(|d| d.label.clone()));
        out.extend(self.ante.iter().chain(&self.succ).map(|l| l.label.clone()));
        out
    }
}

/// A candidate countermodel read off an open branch.
#[derive(Clone, Debug)]
pub struct Refutation {
    pub countermodel: Countermodel,
    /// Terms deeper than this were cut off when building the universe.
    pub depth: usize,
    pub branch: Branch,
}

#[derive(Clone, Debug)]
pub enum SearchOutcome {
    Proved(Proof),
    Refuted(Box<Refutation>),
    Exhausted(SearchStats),
}

impl SearchOutcome {
    pub fn is_proved(&self) -> bool {
        matches!(self, SearchOutcome::Proved(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("invalid goal: {0}")]
    InvalidGoal(Violation),
    #[error("search produced a proof the checker rejects: {0}")]
    Unsound(String),
}

/// The well-founded term order: depth first, then constants and
/// applications before variables, then symbol index, then arguments.
pub fn term_order(sig: &Signature, a: &Term, b: &Term) -> Ordering {
    a.depth().cmp(&b.depth()).then_with(|| match (a, b) {
        (Term::Var(x), Term::Var(y)) => x.cmp(y),
        (Term::App(..), Term::Var(_)) => Ordering::Less,
        (Term::Var(_), Term::App(..)) => Ordering::Greater,
        (Term::App(f, xs), Term::App(g, ys)) => {
            let fi = sig.symbol_index(f).unwrap_or(usize::MAX);
            let gi = sig.symbol_index(g).unwrap_or(usize::MAX);
            fi.cmp(&gi).then_with(|| f.cmp(g)).then_with(|| {
                for (x, y) in xs.iter().zip(ys) {
                    let o = term_order(sig, x, y);
                    if o != Ordering::Equal {
                        return o;
                    }
                }
                xs.len().cmp(&ys.len())
            })
        }
    })
}

/// All terms over `vars` and the function symbols of `sig` up to `depth`,
/// sorted by [`term_order`].
pub fn terms_up_to(sig: &Signature, vars: &BTreeSet<String>, depth: usize) -> Vec<Term> {
    let mut levels: Vec<Vec<Term>> = Vec::new();
    let mut base: Vec<Term> = sig.constants().map(Term::constant).collect();
    base.extend(vars.iter().map(|x| Term::var(x)));
    levels.push(base);
    for d in 1..=depth {
        let below: Vec<Term> = levels.iter().flatten().cloned().collect();
        let mut next = Vec::new();
        for (f, &n) in &sig.functions {
            if n == 0 {
                continue;
            }
            let mut tuples: Vec<Vec<Term>> = vec![Vec::new()];
            for _ in 0..n {
                tuples = tuples
                    .into_iter()
                    .flat_map(|t| {
                        below.iter().map(move |a| {
                            let mut t = t.clone();
                            t.push(a.clone());
                            t
                        })
                    })
                    .collect();
            }
            for args in tuples {
                if args.iter().any(|a| a.depth() + 1 == d) {
                    next.push(Term::app(f, args));
                }
            }
        }
        levels.push(next);
    }
    let mut out: Vec<Term> = levels.into_iter().flatten().collect();
    out.sort_by(|a, b| term_order(sig, a, b));
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Step {
    Ds,
    OrL,
    OrR,
    AndL,
    AndR,
    ImplL,
    ImplR,
    ExclL,
    ExclR,
    ExistsL,
    ExistsR,
    ForallL,
    ForallR,
}

const STEPS: [Step; 13] = [
    Step::Ds,
    Step::OrL,
    Step::OrR,
    Step::AndL,
    Step::AndR,
    Step::ImplL,
    Step::ImplR,
    Step::ExclL,
    Step::ExclR,
    Step::ExistsL,
    Step::ExistsR,
    Step::ForallL,
    Step::ForallR,
];

#[derive(Clone, Debug)]
struct Plan {
    rule: RuleId,
    principal: Lf,
    target: Option<Label>,
    term: Option<Term>,
}

struct Open {
    branch: Branch,
    saturated: bool,
    reason: String,
}

struct Engine<'a> {
    cfg: &'a SearchConfig,
    sig: Signature,
    applications: usize,
    closed: usize,
    rounds: usize,
}

fn witness(plan: &Plan) -> String {
    let t = plan.term.as_ref().map(|t| t.to_string()).unwrap_or_default();
    let u = plan.target.as_ref().map(|u| u.to_string()).unwrap_or_default();
    format!("{u}/{t}")
}

impl Engine<'_> {
    fn uses(&self, rule: RuleId) -> bool {
        match rule {
            RuleId::Ds => self.cfg.variant.has_ds() && !self.cfg.intuitionistic_only,
            RuleId::ExclL | RuleId::ExclR => !self.cfg.intuitionistic_only,
            _ => true,
        }
    }

    fn terms_at(&self, s: &Sequent, w: &Label) -> Vec<Term> {
        let vars = if self.cfg.variant.checks_availability() {
            s.available_vars(w).unwrap_or_default()
        } else {
            s.free_vars()
        };
        terms_up_to(&self.sig, &vars, self.cfg.max_term_depth)
    }

    fn plans(&self, step: Step, b: &Branch) -> Vec<Plan> {
        let s = &b.current;
        let reach = s.reach();
        let mk = |rule, lf: &Lf| Plan { rule, principal: lf.clone(), target: None, term: None };
        let fresh = |plan: Plan| {
            let rec = (plan.rule, Lf::at(&plan.principal.label, plan.principal.formula.alpha_normal()), witness(&plan));
            (!b.history.contains(&rec)).then_some(plan)
        };
        let mut out = Vec::new();
        match step {
            Step::Ds => {
                if !self.uses(RuleId::Ds) {
                    return out;
                }
                for lf in s.ante() {
                    if let Formula::Atom(_, ts) = &lf.formula {
                        let missing = vt(ts).into_iter().any(|x| !s.has_dom(&Dom { label: lf.label.clone(), var: x }));
                        if missing {
                            out.push(mk(RuleId::Ds, lf));
                        }
                    }
                }
            }
            Step::OrL | Step::AndL | Step::ExclL | Step::ExistsL => {
                let rule = match step {
                    Step::OrL => RuleId::OrL,
                    Step::AndL => RuleId::AndL,
                    Step::ExclL => RuleId::ExclL,
                    _ => RuleId::ExistsL,
                };
                if !self.uses(rule) {
                    return out;
                }
                for lf in s.ante() {
                    let hit = matches!(
                        (rule, &lf.formula),
                        (RuleId::OrL, Formula::Or(..))
                            | (RuleId::AndL, Formula::And(..))
                            | (RuleId::ExclL, Formula::Excl(..))
                            | (RuleId::ExistsL, Formula::Exists(..))
                    );
                    if hit {
                        out.push(mk(rule, lf));
                    }
                }
            }
            Step::OrR | Step::AndR | Step::ImplR | Step::ForallR => {
                let rule = match step {
                    Step::OrR => RuleId::OrR,
                    Step::AndR => RuleId::AndR,
                    Step::ImplR => RuleId::ImplR,
                    _ => RuleId::ForallR,
                };
                for lf in s.succ() {
                    let hit = matches!(
                        (rule, &lf.formula),
                        (RuleId::OrR, Formula::Or(..))
                            | (RuleId::AndR, Formula::And(..))
                            | (RuleId::ImplR, Formula::Impl(..))
                            | (RuleId::ForallR, Formula::Forall(..))
                    );
                    if hit {
                        out.push(mk(rule, lf));
                    }
                }
            }
            Step::ImplL => {
                for lf in s.ante().iter().filter(|l| matches!(l.formula, Formula::Impl(..))) {
                    for u in reach.from(&lf.label) {
                        out.extend(fresh(Plan { target: Some(u), ..mk(RuleId::ImplL, lf) }));
                    }
                }
            }
            Step::ExclR => {
                if !self.uses(RuleId::ExclR) {
                    return out;
                }
                for lf in s.succ().iter().filter(|l| matches!(l.formula, Formula::Excl(..))) {
                    for v in reach.to(&lf.label) {
                        out.extend(fresh(Plan { target: Some(v), ..mk(RuleId::ExclR, lf) }));
                    }
                }
            }
            Step::ExistsR => {
                for lf in s.succ().iter().filter(|l| matches!(l.formula, Formula::Exists(..))) {
                    let pick = self.terms_at(s, &lf.label).into_iter().find_map(|t| {
                        fresh(Plan { term: Some(t), ..mk(RuleId::ExistsR, lf) })
                    });
                    out.extend(pick);
                }
            }
            Step::ForallL => {
                for lf in s.ante().iter().filter(|l| matches!(l.formula, Formula::Forall(..))) {
                    for u in reach.from(&lf.label) {
                        let pick = self.terms_at(s, &u).into_iter().find_map(|t| {
                            fresh(Plan { target: Some(u.clone()), term: Some(t), ..mk(RuleId::ForallL, lf) })
                        });
                        out.extend(pick);
                    }
                }
            }
        }
        out
    }

    fn instance(&self, plan: &Plan, s: &Sequent) -> RuleInstance {
        let mut inst = RuleInstance::new(plan.rule, plan.principal.clone());
        inst.target = plan.target.clone();
        inst.term = plan.term.clone();
        match (plan.rule, &plan.principal.formula) {
            (RuleId::ImplR | RuleId::ExclL, _) => inst.label = Some(Sequent::fresh_label("u", &s.labels())),
            (RuleId::ExistsL, Formula::Exists(x, _)) => inst.var = Some(fresh_name(x, &s.all_vars())),
            (RuleId::ForallR, Formula::Forall(x, _)) => {
                inst.label = Some(Sequent::fresh_label("u", &s.labels()));
                inst.var = Some(fresh_name(x, &s.all_vars()));
            }
            _ => {}
        }
        inst
    }

    fn closing(&self, s: &Sequent) -> Option<RuleInstance> {
        let reach = s.reach();
        for lf in s.ante() {
            match &lf.formula {
                Formula::Bot => return Some(RuleInstance::new(RuleId::BotL, lf.clone())),
                Formula::Atom(..) => {
                    if let Some(r) = s.succ().iter().find(|r| r.formula == lf.formula && reach.reachable(&lf.label, &r.label)) {
                        return Some(RuleInstance::new(RuleId::Ax, lf.clone()).target(&r.label));
                    }
                }
                _ => {}
            }
        }
        s.succ()
            .iter()
            .find(|r| r.formula == Formula::Top)
            .map(|r| RuleInstance::new(RuleId::TopR, r.clone()))
    }

    fn round(&mut self, mut b: Branch, round: usize) -> Result<Proof, Open> {
        self.rounds = self.rounds.max(round);
        if let Some(inst) = self.closing(&b.current) {
            self.closed += 1;
            return Ok(Proof::leaf(b.current, inst));
        }
        if round > self.cfg.max_rounds {
            return Err(Open { branch: b, saturated: false, reason: "round limit".into() });
        }
        b.changed = false;
        let plans = self.plans(STEPS[0], &b);
        self.step(b, round, 0, plans, 0)
    }

    fn step(&mut self, mut b: Branch, round: usize, step: usize, plans: Vec<Plan>, k: usize) -> Result<Proof, Open> {
        if k == plans.len() {
            if step + 1 < STEPS.len() {
                let next = self.plans(STEPS[step + 1], &b);
                return self.step(b, round, step + 1, next, 0);
            }
            if !b.changed {
                return Err(Open { branch: b, saturated: true, reason: "saturated".into() });
            }
            return self.round(b, round + 1);
        }
        let plan = &plans[k];
        let s = b.current.clone();
        if !s.contains(plan.rule.side(), &plan.principal) {
            return self.step(b, round, step, plans, k + 1);
        }
        if self.applications >= self.cfg.node_limit {
            return Err(Open { branch: b, saturated: false, reason: "node limit".into() });
        }
        let inst = self.instance(plan, &s);
        let prems = match premises(&s, &inst, self.cfg.variant) {
            Ok(ps) => ps,
            Err(_) => return self.step(b, round, step, plans, k + 1),
        };
        self.applications += 1;
        let rec = (plan.rule, Lf::at(&plan.principal.label, plan.principal.formula.alpha_normal()), witness(plan));
        b.history.insert(rec);
        b.changed = true;
        let mut subs = Vec::new();
        for prem in prems {
            let mut child = b.clone();
            child.advance(prem);
            subs.push(self.step(child, round, step, plans.clone(), k + 1)?);
        }
        Ok(Proof::node(s, inst, subs))
    }
}

/// Rebuilds `p` over the smaller conclusion `s` by reapplying its rule
/// instances; `None` when some instance no longer applies.
fn replay(p: &Proof, s: &Sequent, variant: Variant) -> Option<Proof> {
    let prems = premises(s, &p.rule, variant).ok()?;
    let subs = prems
        .iter()
        .zip(&p.premises)
        .map(|(ps, q)| replay(q, ps, variant))
        .collect::<Option<Vec<_>>>()?;
    Some(Proof::node(s.clone(), p.rule.clone(), subs))
}

/// Removes inferences whose contribution is never used: a node is replaced
/// by one of its premise derivations whenever that derivation still goes
/// through on the node's own conclusion.
pub fn contract_redundant(p: &Proof, variant: Variant) -> Proof {
    let subs: Vec<Proof> = p.premises.iter().map(|q| contract_redundant(q, variant)).collect();
    for q in &subs {
        if let Some(r) = replay(q, &p.conclusion, variant) {
            return r;
        }
    }
    Proof::node(p.conclusion.clone(), p.rule.clone(), subs)
}

/// Runs the bounded search on `goal`. `sig` supplies constants; one is
/// added when it has none.
pub fn prove(goal: &Sequent, sig: &Signature, cfg: &SearchConfig) -> Result<SearchOutcome, SearchError> {
    goal.validate().map_err(SearchError::InvalidGoal)?;
    let mut sig = sig.clone();
    for (_, lf) in goal.formulas() {
        sig.absorb(&lf.formula);
    }
    sig.ensure_constant();
    let run = || {
        let mut engine = Engine { cfg, sig: sig.clone(), applications: 0, closed: 0, rounds: 0 };
        let res = engine.round(Branch::new(goal.clone()), 1);
        (res, engine.applications, engine.closed, engine.rounds)
    };
    let (res, applications, closed, rounds) = std::thread::scope(|sc| {
        std::thread::Builder::new()
            .stack_size(256 << 20)
            .spawn_scoped(sc, run)
            .expect("spawn search thread")
            .join()
            .expect("search thread panicked")
    });
    match res {
        Ok(p) => {
            let p = contract_redundant(&p, cfg.variant);
            check_proof(&p, cfg.variant).map_err(|e| SearchError::Unsound(e.to_string()))?;
            Ok(SearchOutcome::Proved(p))
        }
        Err(open) => {
            let mut stats = SearchStats {
                rounds,
                rule_applications: applications,
                closed_branches: closed,
                open_branch_labels: open.branch.labels().len(),
                open_branch_formulas: open.branch.ante.len() + open.branch.succ.len(),
                saturated: open.saturated,
                reason: open.reason.clone(),
            };
            if open.saturated {
                let r = extract_model(&open.branch, goal, &sig, cfg);
                match r {
                    Ok(r) => return Ok(SearchOutcome::Refuted(Box::new(r))),
                    Err(why) => stats.reason = format!("saturated, but the extracted model was rejected: {why}"),
                }
            }
            Ok(SearchOutcome::Exhausted(stats))
        }
    }
}

/// Reads a model off an open branch: worlds are labels, the order is the
/// reflexive-transitive closure of R, domains are the available terms up
/// to a depth bound, and atoms hold where some predecessor asserts them.
/// The result is checked and must falsify `goal` under the identity
/// interpretation.
pub fn extract_model(b: &Branch, goal: &Sequent, sig: &Signature, cfg: &SearchConfig) -> Result<Refutation, String> {
    let labels: Vec<Label> = b.labels().into_iter().collect();
    let n = labels.len();
    let idx: BTreeMap<&Label, usize> = labels.iter().enumerate().map(|(i, l)| (l, i)).collect();
    let mut leq = vec![vec![false; n]; n];
    for (i, row) in leq.iter_mut().enumerate() {
        row[i] = true;
    }
    for r in &b.rel {
        leq[idx[&r.from]][idx[&r.to]] = true;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if leq[i][k] && leq[k][j] {
                    leq[i][j] = true;
                }
            }
        }
    }
    let mut depth = cfg.max_term_depth;
    let mut branch_vars: BTreeSet<String> = b.dom.iter().map(|d| d.var.clone()).collect();
    let mut sig = sig.clone();
    for lf in b.ante.iter().chain(&b.succ) {
        sig.absorb(&lf.formula);
        branch_vars.extend(lf.formula.free_vars());
        lf.formula.visit_atoms(&mut |_, ts| {
            for t in ts {
                depth = depth.max(t.depth());
            }
        });
    }
    let avail: Vec<BTreeSet<String>> = (0..n)
        .map(|u| {
            if cfg.variant == Variant::Cd {
                branch_vars.clone()
            } else {
                b.dom.iter().filter(|d| leq[idx[&d.label]][u]).map(|d| d.var.clone()).collect()
            }
        })
        .collect();
    let all_vars: BTreeSet<String> = avail.iter().flatten().cloned().collect();
    let universe: Vec<Term> = terms_up_to(&sig, &all_vars, depth);
    let elem: BTreeMap<&Term, usize> = universe.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let domains: Vec<BTreeSet<usize>> = avail
        .iter()
        .map(|xs| universe.iter().enumerate().filter(|(_, t)| t.vars().is_subset(xs)).map(|(i, _)| i).collect())
        .collect();
    let profile = |i: usize| -> Vec<bool> { domains.iter().map(|d| d.contains(&i)).collect() };
    let mut functions = BTreeMap::new();
    for (f, &k) in &sig.functions {
        let mut table = BTreeMap::new();
        let mut tuples: Vec<Vec<usize>> = vec![Vec::new()];
        for _ in 0..k {
            tuples = tuples.into_iter().flat_map(|t| (0..universe.len()).map(move |a| [t.clone(), vec![a]].concat())).collect();
        }
        for args in tuples {
            let t = Term::app(f, args.iter().map(|&a| universe[a].clone()).collect());
            let v = match elem.get(&t) {
                Some(&v) => v,
                None => {
                    let want: Vec<bool> = (0..n).map(|w| args.iter().all(|a| domains[w].contains(a))).collect();
                    (0..universe.len()).find(|&c| profile(c) == want).unwrap_or(args[0])
                }
            };
            table.insert(args, v);
        }
        functions.insert(f.clone(), FunctionTable { arity: k, table });
    }
    let mut predicates: BTreeMap<String, PredicateTable> =
        sig.predicates.iter().map(|(p, &k)| (p.clone(), PredicateTable { arity: k, holds: vec![BTreeSet::new(); n] })).collect();
    for lf in &b.ante {
        if let Formula::Atom(p, ts) = &lf.formula {
            let Some(tu) = ts.iter().map(|t| elem.get(t).copied()).collect::<Option<Vec<usize>>>() else {
                return Err(format!("atom {lf} mentions a term outside the universe"));
            };
            let v = idx[&lf.label];
            let t = predicates.get_mut(p).expect("absorbed predicate");
            for u in 0..n {
                if leq[v][u] {
                    t.holds[u].insert(tu.clone());
                }
            }
        }
    }
    let model = FiniteModel {
        worlds: labels.iter().map(|l| l.to_string()).collect(),
        leq,
        universe: (0..universe.len()).map(|i| format!("e{i}")).collect(),
        domains,
        functions,
        predicates,
        notes: std::iter::once(format!("extracted from an open branch; term universe truncated at depth {depth}"))
            .chain(universe.iter().enumerate().map(|(i, t)| format!("e{i} = {t}")))
            .collect(),
    };
    if let Err(v) = check_model(&model, cfg.variant) {
        let v: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        return Err(v.join("; "));
    }
    let iota: Interpretation = labels.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect();
    let mut alpha = Assignment::new();
    for x in goal.free_vars().iter().chain(&all_vars) {
        if let Some(&a) = elem.get(&Term::var(x)) {
            alpha.set(x, a);
        }
    }
    match model.eval_sequent(&iota, &alpha, goal) {
        Ok(false) => Ok(Refutation { countermodel: Countermodel { model, iota, alpha }, depth, branch: b.clone() }),
        Ok(true) => Err("the truncated model satisfies the goal".into()),
        Err(e) => Err(e.to_string()),
    }
}
