//! Finite Kripke models with increasing or constant domains, evaluation of
//! formulas and sequents, and bounded countermodel search.

use crate::calculus::Variant;
use crate::sequent::{Label, Sequent};
use crate::syntax::{Formula, Term};
use rayon::prelude::*;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

/// Interpretation of an n-ary function symbol as a finite table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionTable {
    pub arity: usize,
    pub table: BTreeMap<Vec<usize>, usize>,
}

/// Extension of an n-ary predicate, one set of tuples per world.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredicateTable {
    pub arity: usize,
    pub holds: Vec<BTreeSet<Vec<usize>>>,
}

/// A finite model (W, ≤, U, D, I_F, I_P). Worlds and elements are indices
/// into `worlds` and `universe`, which only carry display names.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteModel {
    pub worlds: Vec<String>,
    pub leq: Vec<Vec<bool>>,
    pub universe: Vec<String>,
    pub domains: Vec<BTreeSet<usize>>,
    pub functions: BTreeMap<String, FunctionTable>,
    pub predicates: BTreeMap<String, PredicateTable>,
    /// Free-form remarks printed as comments, e.g. truncation depth.
    pub notes: Vec<String>,
}

/// A total assignment of elements to variables. Variables without an
/// explicit value map to element 0.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assignment {
    values: BTreeMap<String, usize>,
}

impl Assignment {
    pub fn new() -> Assignment {
        Assignment::default()
    }

    pub fn get(&self, x: &str) -> usize {
        self.values.get(x).copied().unwrap_or(0)
    }

    pub fn set(&mut self, x: &str, a: usize) {
        self.values.insert(x.to_string(), a);
    }

    pub fn with(mut self, x: &str, a: usize) -> Assignment {
        self.set(x, a);
        self
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &usize)> {
        self.values.iter()
    }
}

/// ι: labels to worlds.
pub type Interpretation = BTreeMap<Label, usize>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("function symbol {0} has no interpretation")]
    UnknownFunction(String),
    #[error("predicate {0} has no interpretation")]
    UnknownPredicate(String),
    #[error("no table entry for {0} at {1:?}")]
    MissingEntry(String, Vec<usize>),
    #[error("label {0} is not interpreted")]
    UnknownLabel(Label),
    #[error("world index {0} out of range")]
    BadWorld(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelViolation {
    NoWorlds,
    BadShape(String),
    NotReflexive(usize),
    NotTransitive(usize, usize, usize),
    EmptyDomain(usize),
    Uncovered(usize),
    IncreasingDomain { lower: usize, upper: usize, element: usize },
    ConstantDomain(usize, usize),
    ConstantOutside { constant: String, world: usize },
    Closure { function: String, args: Vec<usize>, world: usize },
    MissingEntry { function: String, args: Vec<usize> },
    OutsideDomain { predicate: String, world: usize, tuple: Vec<usize> },
    Monotonicity { predicate: String, lower: usize, upper: usize, tuple: Vec<usize> },
}

impl fmt::Display for ModelViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ModelViolation::*;
        match self {
            NoWorlds => write!(f, "no worlds"),
            BadShape(s) => write!(f, "malformed model: {s}"),
            NotReflexive(w) => write!(f, "order not reflexive at world {w}"),
            NotTransitive(a, b, c) => write!(f, "order not transitive: {a}<={b}<={c}"),
            EmptyDomain(w) => write!(f, "empty domain at world {w}"),
            Uncovered(a) => write!(f, "element {a} lies in no domain"),
            IncreasingDomain { lower, upper, element } => {
                write!(f, "ID: element {element} in D({lower}) but not in D({upper})")
            }
            ConstantDomain(a, b) => write!(f, "CD: D({a}) differs from D({b})"),
            ConstantOutside { constant, world } => write!(f, "C1: constant {constant} outside D({world})"),
            Closure { function, args, world } => write!(f, "C2: {function}{args:?} breaks closure of D({world})"),
            MissingEntry { function, args } => write!(f, "no table entry for {function}{args:?}"),
            OutsideDomain { predicate, world, tuple } => {
                write!(f, "{predicate}{tuple:?} holds at {world} outside its domain")
            }
            Monotonicity { predicate, lower, upper, tuple } => {
                write!(f, "M: {predicate}{tuple:?} holds at {lower} but not at {upper}")
            }
        }
    }
}

fn tuples(elems: &[usize], n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|t| {
                elems.iter().map(move |&a| {
                    let mut t = t.clone();
                    t.push(a);
                    t
                })
            })
            .collect();
    }
    out
}

impl FiniteModel {
    pub fn world_count(&self) -> usize {
        self.worlds.len()
    }

    pub fn leq(&self, w: usize, u: usize) -> bool {
        self.leq[w][u]
    }

    pub fn world_index(&self, name: &str) -> Option<usize> {
        self.worlds.iter().position(|w| w == name)
    }

    pub fn element_index(&self, name: &str) -> Option<usize> {
        self.universe.iter().position(|a| a == name)
    }

    pub fn eval_term(&self, alpha: &Assignment, t: &Term) -> Result<usize, EvalError> {
        match t {
            Term::Var(x) => Ok(alpha.get(x)),
            Term::App(f, args) => {
                let table = self.functions.get(f).ok_or_else(|| EvalError::UnknownFunction(f.clone()))?;
                let vals = args.iter().map(|a| self.eval_term(alpha, a)).collect::<Result<Vec<_>, _>>()?;
                table.table.get(&vals).copied().ok_or(EvalError::MissingEntry(f.clone(), vals))
            }
        }
    }

    /// M, w, α ⊩ φ.
    pub fn eval_formula(&self, w: usize, alpha: &Assignment, phi: &Formula) -> Result<bool, EvalError> {
        if w >= self.worlds.len() {
            return Err(EvalError::BadWorld(w));
        }
        let mut a = alpha.clone();
        self.eval(w, &mut a, phi)
    }

    fn eval(&self, w: usize, alpha: &mut Assignment, phi: &Formula) -> Result<bool, EvalError> {
        let n = self.worlds.len();
        Ok(match phi {
            Formula::Atom(p, ts) => {
                let table = self.predicates.get(p).ok_or_else(|| EvalError::UnknownPredicate(p.clone()))?;
                let vals = ts.iter().map(|t| self.eval_term(alpha, t)).collect::<Result<Vec<_>, _>>()?;
                table.holds[w].contains(&vals)
            }
            Formula::Bot => false,
            Formula::Top => true,
            Formula::And(a, b) => self.eval(w, alpha, a)? && self.eval(w, alpha, b)?,
            Formula::Or(a, b) => self.eval(w, alpha, a)? || self.eval(w, alpha, b)?,
            Formula::Impl(a, b) => {
                for u in (0..n).filter(|&u| self.leq[w][u]) {
                    if self.eval(u, alpha, a)? && !self.eval(u, alpha, b)? {
                        return Ok(false);
                    }
                }
                true
            }
            Formula::Excl(a, b) => {
                for u in (0..n).filter(|&u| self.leq[u][w]) {
                    if self.eval(u, alpha, a)? && !self.eval(u, alpha, b)? {
                        return Ok(true);
                    }
                }
                false
            }
            Formula::Exists(x, a) => {
                let old = alpha.values.get(x).copied();
                let mut found = false;
                for &d in &self.domains[w] {
                    alpha.set(x, d);
                    if self.eval(w, alpha, a)? {
                        found = true;
                        break;
                    }
                }
                restore(alpha, x, old);
                found
            }
            Formula::Forall(x, a) => {
                let old = alpha.values.get(x).copied();
                let mut all = true;
                'outer: for u in (0..n).filter(|&u| self.leq[w][u]) {
                    for &d in &self.domains[u] {
                        alpha.set(x, d);
                        if !self.eval(u, alpha, a)? {
                            all = false;
                            break 'outer;
                        }
                    }
                }
                restore(alpha, x, old);
                all
            }
        })
    }

    /// M, ι, α ⊨ S.
    pub fn eval_sequent(&self, iota: &Interpretation, alpha: &Assignment, s: &Sequent) -> Result<bool, EvalError> {
        let world = |l: &Label| -> Result<usize, EvalError> {
            let w = *iota.get(l).ok_or_else(|| EvalError::UnknownLabel(l.clone()))?;
            if w >= self.worlds.len() {
                return Err(EvalError::BadWorld(w));
            }
            Ok(w)
        };
        for r in s.rel() {
            if !self.leq[world(&r.from)?][world(&r.to)?] {
                return Ok(true);
            }
        }
        for d in s.dom() {
            if !self.domains[world(&d.label)?].contains(&alpha.get(&d.var)) {
                return Ok(true);
            }
        }
        for lf in s.ante() {
            if !self.eval_formula(world(&lf.label)?, alpha, &lf.formula)? {
                return Ok(true);
            }
        }
        for lf in s.succ() {
            if self.eval_formula(world(&lf.label)?, alpha, &lf.formula)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Every violated model condition; empty when the model is well formed
    /// for `variant`.
    pub fn violations(&self, variant: Variant) -> Vec<ModelViolation> {
        use ModelViolation::*;
        let n = self.worlds.len();
        let m = self.universe.len();
        let mut out = Vec::new();
        if n == 0 {
            return vec![NoWorlds];
        }
        if self.leq.len() != n || self.leq.iter().any(|row| row.len() != n) {
            return vec![BadShape("order matrix does not match the world count".into())];
        }
        if self.domains.len() != n {
            return vec![BadShape("one domain per world expected".into())];
        }
        if self.domains.iter().flatten().any(|&a| a >= m) {
            return vec![BadShape("domain mentions an unknown element".into())];
        }
        for (p, t) in &self.predicates {
            if t.holds.len() != n {
                return vec![BadShape(format!("predicate {p} needs one extension per world"))];
            }
            if t.holds.iter().flatten().any(|tu| tu.len() != t.arity || tu.iter().any(|&a| a >= m)) {
                return vec![BadShape(format!("predicate {p} has a malformed tuple"))];
            }
        }
        for (f, t) in &self.functions {
            if t.table.iter().any(|(k, &v)| k.len() != t.arity || v >= m || k.iter().any(|&a| a >= m)) {
                return vec![BadShape(format!("function {f} has a malformed entry"))];
            }
        }
        for w in 0..n {
            if !self.leq[w][w] {
                out.push(NotReflexive(w));
            }
            for u in 0..n {
                for v in 0..n {
                    if self.leq[w][u] && self.leq[u][v] && !self.leq[w][v] {
                        out.push(NotTransitive(w, u, v));
                    }
                }
            }
        }
        for w in 0..n {
            if self.domains[w].is_empty() {
                out.push(EmptyDomain(w));
            }
        }
        for a in 0..m {
            if !self.domains.iter().any(|d| d.contains(&a)) {
                out.push(Uncovered(a));
            }
        }
        for w in 0..n {
            for u in 0..n {
                if self.leq[w][u] {
                    if let Some(&a) = self.domains[w].difference(&self.domains[u]).next() {
                        out.push(IncreasingDomain { lower: w, upper: u, element: a });
                    }
                }
                if variant == Variant::Cd && w < u && self.domains[w] != self.domains[u] {
                    out.push(ConstantDomain(w, u));
                }
            }
        }
        let all: Vec<usize> = (0..m).collect();
        for (f, t) in &self.functions {
            for args in tuples(&all, t.arity) {
                let Some(&v) = t.table.get(&args) else {
                    out.push(MissingEntry { function: f.clone(), args });
                    continue;
                };
                for w in 0..n {
                    let inside = args.iter().all(|a| self.domains[w].contains(a));
                    if t.arity == 0 && !self.domains[w].contains(&v) {
                        out.push(ConstantOutside { constant: f.clone(), world: w });
                    } else if t.arity > 0 && inside != self.domains[w].contains(&v) {
                        out.push(Closure { function: f.clone(), args: args.clone(), world: w });
                    }
                }
            }
        }
        for (p, t) in &self.predicates {
            for w in 0..n {
                for tu in &t.holds[w] {
                    if tu.iter().any(|a| !self.domains[w].contains(a)) {
                        out.push(OutsideDomain { predicate: p.clone(), world: w, tuple: tu.clone() });
                    }
                    for u in (0..n).filter(|&u| self.leq[w][u]) {
                        if !t.holds[u].contains(tu) {
                            out.push(Monotonicity { predicate: p.clone(), lower: w, upper: u, tuple: tu.clone() });
                        }
                    }
                }
            }
        }
        out
    }
}

fn restore(alpha: &mut Assignment, x: &str, old: Option<usize>) {
    match old {
        Some(a) => alpha.set(x, a),
        None => {
            alpha.values.remove(x);
        }
    }
}

/// Checks all frame and model conditions of `variant`.
pub fn check_model(m: &FiniteModel, variant: Variant) -> Result<(), Vec<ModelViolation>> {
    let v = m.violations(variant);
    if v.is_empty() {
        Ok(())
    } else {
        Err(v)
    }
}

/// A model with an interpretation and an assignment falsifying a sequent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Countermodel {
    pub model: FiniteModel,
    pub iota: Interpretation,
    pub alpha: Assignment,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bounds {
    pub worlds: usize,
    pub universe: usize,
}

/// Function and predicate symbols occurring in a sequent.
pub(crate) fn symbols(s: &Sequent) -> (BTreeMap<String, usize>, BTreeMap<String, usize>) {
    let mut funs = BTreeMap::new();
    let mut preds = BTreeMap::new();
    for (_, lf) in s.formulas() {
        lf.formula.visit_atoms(&mut |p, ts| {
            preds.insert(p.to_string(), ts.len());
            for t in ts {
                collect_functions(t, &mut funs);
            }
        });
    }
    (funs, preds)
}

fn collect_functions(t: &Term, out: &mut BTreeMap<String, usize>) {
    if let Term::App(f, args) = t {
        out.insert(f.clone(), args.len());
        args.iter().for_each(|a| collect_functions(a, out));
    }
}

/// Partial orders on `n` worlds compatible with the index order.
pub fn orders(n: usize) -> Vec<Vec<Vec<bool>>> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let mut out = Vec::new();
    for mask in 0u64..(1 << pairs.len()) {
        let mut leq = vec![vec![false; n]; n];
        for (i, row) in leq.iter_mut().enumerate() {
            row[i] = true;
        }
        for (k, &(i, j)) in pairs.iter().enumerate() {
            if mask & (1 << k) != 0 {
                leq[i][j] = true;
            }
        }
        let transitive =
            (0..n).all(|a| (0..n).all(|b| (0..n).all(|c| !(leq[a][b] && leq[b][c]) || leq[a][c])));
        if transitive {
            out.push(leq);
        }
    }
    out
}

/// Up-closed subsets of the worlds, as bitmasks.
pub fn up_sets(leq: &[Vec<bool>]) -> Vec<u32> {
    let n = leq.len();
    (0u32..(1 << n))
        .filter(|&s| (0..n).all(|w| s & (1 << w) == 0 || (0..n).all(|u| !leq[w][u] || s & (1 << u) != 0)))
        .collect()
}

/// Domain layouts: for each element the up-set of worlds where it exists.
/// Layouts are non-decreasing sequences so that element permutations are
/// enumerated once.
fn layouts(leq: &[Vec<bool>], m: usize, variant: Variant, need_core: bool) -> Vec<Vec<u32>> {
    let n = leq.len();
    let full = (1u32 << n) - 1;
    let ups: Vec<u32> = if variant == Variant::Cd {
        vec![full]
    } else {
        up_sets(leq).into_iter().filter(|&s| s != 0).collect()
    };
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn go(ups: &[u32], start: usize, m: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for i in start..ups.len() {
            cur.push(ups[i]);
            go(ups, i, m, cur, out);
            cur.pop();
        }
    }
    go(&ups, 0, m, &mut cur, &mut out);
    out.retain(|l| {
        let covered = l.iter().fold(0, |acc, s| acc | s) == full;
        covered && (!need_core || l.contains(&full))
    });
    out
}

struct Frame {
    leq: Vec<Vec<bool>>,
    exists: Vec<u32>,
}

/// Searches all models up to the bounds, in a fixed canonical order, for
/// one falsifying `s`. `None` only means no countermodel within bounds.
pub fn find_countermodel(s: &Sequent, bounds: Bounds, variant: Variant) -> Option<Countermodel> {
    let (funs, preds) = symbols(s);
    let need_core = funs.values().any(|&a| a == 0);
    let mut frames = Vec::new();
    for n in 1..=bounds.worlds {
        for m in 1..=bounds.universe {
            for leq in orders(n) {
                for exists in layouts(&leq, m, variant, need_core) {
                    frames.push(Frame { leq: leq.clone(), exists });
                }
            }
        }
    }
    frames.par_iter().find_map_first(|fr| search_frame(s, fr, &funs, &preds))
}

fn search_frame(
    s: &Sequent,
    fr: &Frame,
    funs: &BTreeMap<String, usize>,
    preds: &BTreeMap<String, usize>,
) -> Option<Countermodel> {
    let n = fr.leq.len();
    let m = fr.exists.len();
    let elems: Vec<usize> = (0..m).collect();
    let domains: Vec<BTreeSet<usize>> =
        (0..n).map(|w| elems.iter().copied().filter(|&a| fr.exists[a] & (1 << w) != 0).collect()).collect();
    let profile = |args: &[usize]| args.iter().fold((1u32 << n) - 1, |acc, &a| acc & fr.exists[a]);
    let ups = up_sets(&fr.leq);
    // One slot per table entry, each with its candidate values.
    let mut fslots: Vec<(String, Vec<usize>, Vec<usize>)> = Vec::new();
    for (f, &k) in funs {
        for args in tuples(&elems, k) {
            let p = profile(&args);
            let cands: Vec<usize> = elems.iter().copied().filter(|&b| fr.exists[b] == p).collect();
            if cands.is_empty() {
                return None;
            }
            fslots.push((f.clone(), args, cands));
        }
    }
    let mut pslots: Vec<(String, Vec<usize>, Vec<u32>)> = Vec::new();
    for (p, &k) in preds {
        for args in tuples(&elems, k) {
            let allowed = profile(&args);
            let cands: Vec<u32> = ups.iter().copied().filter(|&u| u & !allowed == 0).collect();
            pslots.push((p.clone(), args, cands));
        }
    }
    let labels: Vec<Label> = s.labels().into_iter().collect();
    let vars: Vec<String> = s.free_vars().into_iter().collect();
    let mut fchoice = vec![0usize; fslots.len()];
    loop {
        let mut functions: BTreeMap<String, FunctionTable> =
            funs.iter().map(|(f, &k)| (f.clone(), FunctionTable { arity: k, table: BTreeMap::new() })).collect();
        for (slot, &c) in fslots.iter().zip(&fchoice) {
            functions.get_mut(&slot.0).unwrap().table.insert(slot.1.clone(), slot.2[c]);
        }
        let mut pchoice = vec![0usize; pslots.len()];
        loop {
            let mut predicates: BTreeMap<String, PredicateTable> = preds
                .iter()
                .map(|(p, &k)| (p.clone(), PredicateTable { arity: k, holds: vec![BTreeSet::new(); n] }))
                .collect();
            for (slot, &c) in pslots.iter().zip(&pchoice) {
                let up = slot.2[c];
                let t = predicates.get_mut(&slot.0).unwrap();
                for w in 0..n {
                    if up & (1 << w) != 0 {
                        t.holds[w].insert(slot.1.clone());
                    }
                }
            }
            let model = FiniteModel {
                worlds: (0..n).map(|i| format!("w{i}")).collect(),
                leq: fr.leq.clone(),
                universe: (0..m).map(|i| format!("e{i}")).collect(),
                domains: domains.clone(),
                functions: functions.clone(),
                predicates,
                notes: Vec::new(),
            };
            if let Some((iota, alpha)) = falsify(&model, s, &labels, &vars) {
                return Some(Countermodel { model, iota, alpha });
            }
            if !advance(&mut pchoice, |i| pslots[i].2.len()) {
                break;
            }
        }
        if !advance(&mut fchoice, |i| fslots[i].2.len()) {
            return None;
        }
    }
}

/// Odometer step; false once every combination has been visited.
fn advance(choice: &mut [usize], len: impl Fn(usize) -> usize) -> bool {
    for i in (0..choice.len()).rev() {
        choice[i] += 1;
        if choice[i] < len(i) {
            return true;
        }
        choice[i] = 0;
    }
    false
}

/// Searches every ι respecting R and every α over the free variables for
/// one that falsifies `s` on `model`.
pub fn falsify(model: &FiniteModel, s: &Sequent, labels: &[Label], vars: &[String]) -> Option<(Interpretation, Assignment)> {
    let n = model.world_count();
    let m = model.universe.len();
    let mut lc = vec![0usize; labels.len()];
    loop {
        let iota: Interpretation = labels.iter().cloned().zip(lc.iter().copied()).collect();
        let respects = s.rel().iter().all(|r| model.leq[iota[&r.from]][iota[&r.to]]);
        if respects {
            let mut vc = vec![0usize; vars.len()];
            loop {
                let mut alpha = Assignment::new();
                for (x, &a) in vars.iter().zip(&vc) {
                    alpha.set(x, a);
                }
                if model.eval_sequent(&iota, &alpha, s) == Ok(false) {
                    return Some((iota, alpha));
                }
                if !advance(&mut vc, |_| m) {
                    break;
                }
            }
        }
        if !advance(&mut lc, |_| n) {
            return None;
        }
    }
}

/// True when `s` holds on `model` under every ι and α.
pub fn holds_everywhere(model: &FiniteModel, s: &Sequent) -> bool {
    let labels: Vec<Label> = s.labels().into_iter().collect();
    let vars: Vec<String> = s.free_vars().into_iter().collect();
    falsify(model, s, &labels, &vars).is_none()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ModelParseError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for FiniteModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for note in &self.notes {
            writeln!(f, "# {note}")?;
        }
        writeln!(f, "worlds: {}", self.worlds.join(" "))?;
        let mut pairs = Vec::new();
        for (i, row) in self.leq.iter().enumerate() {
            for (j, &b) in row.iter().enumerate() {
                if b && i != j {
                    pairs.push(format!("{}<={}", self.worlds[i], self.worlds[j]));
                }
            }
        }
        writeln!(f, "order: {}", pairs.join(" "))?;
        writeln!(f, "universe: {}", self.universe.join(" "))?;
        for (w, d) in self.domains.iter().enumerate() {
            let names: Vec<&str> = d.iter().map(|&a| self.universe[a].as_str()).collect();
            writeln!(f, "domain {}: {}", self.worlds[w], names.join(" "))?;
        }
        let tuple = |t: &[usize]| {
            let names: Vec<&str> = t.iter().map(|&a| self.universe[a].as_str()).collect();
            format!("({})", names.join(","))
        };
        for (name, t) in &self.functions {
            let entries: Vec<String> = t.table.iter().map(|(k, &v)| format!("{}->{}", tuple(k), self.universe[v])).collect();
            writeln!(f, "function {name}/{}: {}", t.arity, entries.join(" "))?;
        }
        for (name, t) in &self.predicates {
            for (w, h) in t.holds.iter().enumerate() {
                let entries: Vec<String> = h.iter().map(|k| tuple(k)).collect();
                writeln!(f, "predicate {name}/{} {}: {}", t.arity, self.worlds[w], entries.join(" "))?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for Countermodel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.model)?;
        let iota: Vec<String> = self.iota.iter().map(|(l, &w)| format!("{l}={}", self.model.worlds[w])).collect();
        writeln!(f, "interpretation: {}", iota.join(" "))?;
        let alpha: Vec<String> = self.alpha.iter().map(|(x, &a)| format!("{x}={}", self.model.universe[a])).collect();
        writeln!(f, "assignment: {}", alpha.join(" "))
    }
}

/// Parses the model text format. Interpretation and assignment lines are
/// optional; missing ones yield empty maps.
pub fn parse_model(text: &str) -> Result<Countermodel, ModelParseError> {
    let mut m = FiniteModel {
        worlds: Vec::new(),
        leq: Vec::new(),
        universe: Vec::new(),
        domains: Vec::new(),
        functions: BTreeMap::new(),
        predicates: BTreeMap::new(),
        notes: Vec::new(),
    };
    let mut iota = Interpretation::new();
    let mut alpha = Assignment::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |message: String| ModelParseError { line, message };
        let trimmed = raw.trim();
        if let Some(note) = trimmed.strip_prefix('#') {
            m.notes.push(note.trim().to_string());
            continue;
        }
        if trimmed.is_empty() {
            continue;
        }
        let (head, body) = trimmed.split_once(':').ok_or_else(|| err("missing ':'".into()))?;
        let head = head.trim();
        let items: Vec<&str> = body.split_whitespace().collect();
        let world = |m: &FiniteModel, name: &str| m.world_index(name).ok_or_else(|| err(format!("unknown world {name}")));
        let elem = |m: &FiniteModel, name: &str| m.element_index(name).ok_or_else(|| err(format!("unknown element {name}")));
        let tuple = |m: &FiniteModel, s: &str| -> Result<Vec<usize>, ModelParseError> {
            let inner = s
                .strip_prefix('(')
                .and_then(|s| s.strip_suffix(')'))
                .ok_or_else(|| err(format!("expected a tuple, found {s}")))?;
            if inner.is_empty() {
                return Ok(Vec::new());
            }
            inner.split(',').map(|a| elem(m, a)).collect()
        };
        let symbol = |rest: &str| -> Result<(String, usize), ModelParseError> {
            let (name, arity) = rest.split_once('/').ok_or_else(|| err("expected name/arity".into()))?;
            let arity = arity.parse().map_err(|_| err(format!("bad arity {arity}")))?;
            Ok((name.to_string(), arity))
        };
        match head {
            "worlds" => {
                m.worlds = items.iter().map(|s| s.to_string()).collect();
                let n = m.worlds.len();
                m.leq = (0..n).map(|i| (0..n).map(|j| i == j).collect()).collect();
                m.domains = vec![BTreeSet::new(); n];
            }
            "order" => {
                for it in items {
                    let (a, b) = it.split_once("<=").ok_or_else(|| err(format!("bad order pair {it}")))?;
                    let (a, b) = (world(&m, a)?, world(&m, b)?);
                    m.leq[a][b] = true;
                }
            }
            "universe" => m.universe = items.iter().map(|s| s.to_string()).collect(),
            "interpretation" => {
                for it in items {
                    let (l, w) = it.split_once('=').ok_or_else(|| err(format!("bad binding {it}")))?;
                    iota.insert(Label::new(l), world(&m, w)?);
                }
            }
            "assignment" => {
                for it in items {
                    let (x, a) = it.split_once('=').ok_or_else(|| err(format!("bad binding {it}")))?;
                    alpha.set(x, elem(&m, a)?);
                }
            }
            _ => {
                if let Some(w) = head.strip_prefix("domain ") {
                    let w = world(&m, w.trim())?;
                    for a in items {
                        let a = elem(&m, a)?;
                        m.domains[w].insert(a);
                    }
                } else if let Some(rest) = head.strip_prefix("function ") {
                    let (name, arity) = symbol(rest.trim())?;
                    let mut table = BTreeMap::new();
                    for it in items {
                        let (k, v) = it.split_once("->").ok_or_else(|| err(format!("bad entry {it}")))?;
                        table.insert(tuple(&m, k)?, elem(&m, v)?);
                    }
                    m.functions.insert(name, FunctionTable { arity, table });
                } else if let Some(rest) = head.strip_prefix("predicate ") {
                    let (sym, w) = rest.trim().split_once(' ').ok_or_else(|| err("expected predicate name/arity world".into()))?;
                    let (name, arity) = symbol(sym)?;
                    let w = world(&m, w.trim())?;
                    let n = m.worlds.len();
                    let tus = items.iter().map(|it| tuple(&m, it)).collect::<Result<Vec<_>, _>>()?;
                    let t = m
                        .predicates
                        .entry(name)
                        .or_insert_with(|| PredicateTable { arity, holds: vec![BTreeSet::new(); n] });
                    t.holds[w].extend(tus);
                } else {
                    return Err(err(format!("unknown line kind {head}")));
                }
            }
        }
    }
    if m.worlds.is_empty() {
        return Err(ModelParseError { line: 0, message: "no worlds line".into() });
    }
    Ok(Countermodel { model: m, iota, alpha })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_formula_open;
    use crate::sequent::parse_sequent;
    use crate::syntax::Signature;

    fn f(text: &str) -> Formula {
        parse_formula_open(text, &mut Signature::new()).unwrap()
    }

    fn seq(text: &str) -> Sequent {
        parse_sequent(text, &mut Signature::new()).unwrap()
    }

    /// Two worlds w0 ≤ w1 with D(w0) = {e0}, D(w1) = {e0, e1}; p holds of
    /// e0 everywhere, q only at w1.
    fn two_worlds() -> FiniteModel {
        let text = "worlds: w0 w1\norder: w0<=w1\nuniverse: e0 e1\ndomain w0: e0\ndomain w1: e0 e1\n\
                    predicate p/1 w0: (e0)\npredicate p/1 w1: (e0)\npredicate q/0 w0:\npredicate q/0 w1: ()\n";
        parse_model(text).unwrap().model
    }

    #[test]
    fn one_world_model_is_well_formed() {
        let m = parse_model("worlds: w\nuniverse: a\ndomain w: a\n").unwrap().model;
        assert_eq!(check_model(&m, Variant::Id), Ok(()));
        assert_eq!(check_model(&m, Variant::Cd), Ok(()));
    }

    #[test]
    fn shrinking_domain_violates_id() {
        let m = parse_model("worlds: w u\norder: w<=u\nuniverse: a b\ndomain w: a b\ndomain u: a\n").unwrap().model;
        let v = check_model(&m, Variant::Id).unwrap_err();
        assert!(v.contains(&ModelViolation::IncreasingDomain { lower: 0, upper: 1, element: 1 }));
        let m = two_worlds();
        assert_eq!(check_model(&m, Variant::Id), Ok(()));
        assert!(check_model(&m, Variant::Cd).unwrap_err().contains(&ModelViolation::ConstantDomain(0, 1)));
    }

    #[test]
    fn closure_condition_is_checked() {
        let text = "worlds: w u\norder: w<=u\nuniverse: a b\ndomain w: a\ndomain u: a b\nfunction f/1: (a)->b (b)->b\n";
        let v = check_model(&parse_model(text).unwrap().model, Variant::Id).unwrap_err();
        assert!(matches!(v[0], ModelViolation::Closure { .. }));
    }

    #[test]
    fn term_evaluation() {
        let text = "worlds: w\nuniverse: a b\ndomain w: a b\nfunction c/0: ()->b\nfunction f/1: (a)->b (b)->a\n\
                    function g/1: (a)->a (b)->a\n";
        let m = parse_model(text).unwrap().model;
        let alpha = Assignment::new().with("x", 0);
        assert_eq!(m.eval_term(&alpha, &Term::var("x")), Ok(0));
        assert_eq!(m.eval_term(&alpha, &Term::constant("c")), Ok(1));
        let t = Term::app("f", vec![Term::app("g", vec![Term::var("x")])]);
        assert_eq!(m.eval_term(&alpha, &t), Ok(1));
    }

    #[test]
    fn clauses() {
        let m = two_worlds();
        let a = Assignment::new();
        for w in 0..2 {
            assert!(!m.eval_formula(w, &a, &Formula::Bot).unwrap());
            assert!(m.eval_formula(w, &a, &Formula::Top).unwrap());
        }
        assert!(!m.eval_formula(0, &a, &f("q")).unwrap());
        assert!(m.eval_formula(1, &a, &f("q")).unwrap());
        assert!(m.eval_formula(0, &a, &f("exists x. p(x)")).unwrap());
        assert!(!m.eval_formula(0, &a, &f("forall x. p(x)")).unwrap());
        assert!(!m.eval_formula(0, &a, &f("q | (q -> bot)")).unwrap());
        assert!(m.eval_formula(1, &a, &f("q -< bot")).unwrap());
        assert!(!m.eval_formula(0, &a, &f("q -< bot")).unwrap());
        assert!(m.eval_formula(1, &a, &f("top -< q")).unwrap());
    }

    #[test]
    fn exists_exclusion_example_holds() {
        let phi = f("forall x. ((p(x) -< exists y. p(y)) -> bot)");
        let m = two_worlds();
        for w in 0..2 {
            assert!(m.eval_formula(w, &Assignment::new(), &phi).unwrap());
        }
    }

    #[test]
    fn sequent_evaluation() {
        let m = two_worlds();
        let s = seq("R: w<u |- u: top");
        assert!(holds_everywhere(&m, &s));
        let discrete = parse_model("worlds: a b\nuniverse: e\ndomain a: e\ndomain b: e\npredicate q/0 a:\n")
            .unwrap()
            .model;
        let s = seq("R: w<u ; u: q |- w: q");
        let iota: Interpretation = [(Label::new("w"), 0), (Label::new("u"), 1)].into_iter().collect();
        assert_eq!(discrete.eval_sequent(&iota, &Assignment::new(), &s), Ok(true));
    }

    #[test]
    fn quantifier_shift_countermodel_only_with_increasing_domains() {
        let s = seq("|- w: forall x. (p(x) | q) -> forall x. p(x) | q");
        let b = Bounds { worlds: 2, universe: 2 };
        let cm = find_countermodel(&s, b, Variant::Id).expect("countermodel");
        assert_eq!(check_model(&cm.model, Variant::Id), Ok(()));
        assert_eq!(cm.model.eval_sequent(&cm.iota, &cm.alpha, &s), Ok(false));
        assert_eq!(find_countermodel(&s, b, Variant::Cd), None);
        let taut = seq("|- w: p -> p");
        assert_eq!(find_countermodel(&taut, Bounds { worlds: 3, universe: 2 }, Variant::Id), None);
    }

    #[test]
    fn model_text_round_trips() {
        let s = seq("|- w: forall x. (p(x) | q) -> forall x. p(x) | q");
        let cm = find_countermodel(&s, Bounds { worlds: 2, universe: 2 }, Variant::Id).unwrap();
        let text = cm.to_string();
        let back = parse_model(&text).unwrap();
        assert_eq!(back, cm);
    }

    #[test]
    fn order_enumeration_counts() {
        assert_eq!(orders(1).len(), 1);
        assert_eq!(orders(2).len(), 2);
        assert_eq!(orders(3).len(), 7);
    }
}
