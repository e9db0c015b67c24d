//! Polytree sequents: structure, reachability, availability and the text
//! format `R: w<u ; T: w:x ; w: φ |- u: ψ`.

use crate::parse::{is_identifier, parse_formula_at, ParseError, ParseErrorKind};
use crate::syntax::{Formula, Signature, Term};
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(pub String);

impl Label {
    pub fn new(name: &str) -> Label {
        Label(name.to_string())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Label {
    fn from(s: &str) -> Label {
        Label::new(s)
    }
}

/// Relational atom `from R to`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rel {
    pub from: Label,
    pub to: Label,
}

impl Rel {
    pub fn new(from: &str, to: &str) -> Rel {
        Rel { from: Label::new(from), to: Label::new(to) }
    }
}

/// Domain atom `label:var`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Dom {
    pub label: Label,
    pub var: String,
}

impl Dom {
    pub fn new(label: &str, var: &str) -> Dom {
        Dom { label: Label::new(label), var: var.to_string() }
    }
}

/// Labelled formula `label: formula`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lf {
    pub label: Label,
    pub formula: Formula,
}

impl Lf {
    pub fn new(label: &str, formula: Formula) -> Lf {
        Lf { label: Label::new(label), formula }
    }

    pub fn at(label: &Label, formula: Formula) -> Lf {
        Lf { label: label.clone(), formula }
    }

    pub fn alpha_eq(&self, other: &Lf) -> bool {
        self.label == other.label && self.formula.alpha_eq(&other.formula)
    }
}

impl fmt::Display for Lf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.label, self.formula)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Left,
    Right,
}

/// A sequent R, T, Γ ⊢ Δ. R, Γ and Δ are sorted multisets; T is a sorted
/// set, since repeated domain atoms carry no information.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Sequent {
    rel: Vec<Rel>,
    dom: Vec<Dom>,
    ante: Vec<Lf>,
    succ: Vec<Lf>,
}

fn insert_sorted<T: Ord>(v: &mut Vec<T>, x: T) {
    let i = v.partition_point(|y| *y <= x);
    v.insert(i, x);
}

impl Sequent {
    pub fn new(rel: Vec<Rel>, dom: Vec<Dom>, ante: Vec<Lf>, succ: Vec<Lf>) -> Sequent {
        let mut s = Sequent { rel, dom, ante, succ };
        s.rel.sort();
        s.dom.sort();
        s.dom.dedup();
        s.ante.sort();
        s.succ.sort();
        s
    }

    /// The goal `w:x⃗ ⊢ w:φ` with x⃗ the free variables of φ.
    pub fn goal(label: &str, phi: Formula) -> Sequent {
        let dom = phi.free_vars().iter().map(|x| Dom::new(label, x)).collect();
        Sequent::new(vec![], dom, vec![], vec![Lf::new(label, phi)])
    }

    pub fn rel(&self) -> &[Rel] {
        &self.rel
    }

    pub fn dom(&self) -> &[Dom] {
        &self.dom
    }

    pub fn ante(&self) -> &[Lf] {
        &self.ante
    }

    pub fn succ(&self) -> &[Lf] {
        &self.succ
    }

    pub fn side(&self, side: Side) -> &[Lf] {
        match side {
            Side::Left => &self.ante,
            Side::Right => &self.succ,
        }
    }

    pub fn add_rel(&mut self, r: Rel) {
        insert_sorted(&mut self.rel, r);
    }

    /// Adds a domain atom unless it is already present.
    pub fn add_dom(&mut self, d: Dom) {
        if let Err(i) = self.dom.binary_search(&d) {
            self.dom.insert(i, d);
        }
    }

    pub fn add(&mut self, side: Side, lf: Lf) {
        match side {
            Side::Left => insert_sorted(&mut self.ante, lf),
            Side::Right => insert_sorted(&mut self.succ, lf),
        }
    }

    pub fn add_ante(&mut self, lf: Lf) {
        self.add(Side::Left, lf);
    }

    pub fn add_succ(&mut self, lf: Lf) {
        self.add(Side::Right, lf);
    }

    pub fn with(mut self, side: Side, lf: Lf) -> Sequent {
        self.add(side, lf);
        self
    }

    /// Index of an α-equal copy of `lf` on `side`, exact matches first.
    pub fn position(&self, side: Side, lf: &Lf) -> Option<usize> {
        let v = self.side(side);
        v.iter().position(|x| x == lf).or_else(|| v.iter().position(|x| x.alpha_eq(lf)))
    }

    pub fn contains(&self, side: Side, lf: &Lf) -> bool {
        self.position(side, lf).is_some()
    }

    pub fn count(&self, side: Side, lf: &Lf) -> usize {
        self.side(side).iter().filter(|x| x.alpha_eq(lf)).count()
    }

    /// Removes one α-equal copy of `lf`; returns false when there is none.
    pub fn remove(&mut self, side: Side, lf: &Lf) -> bool {
        match self.position(side, lf) {
            Some(i) => {
                match side {
                    Side::Left => self.ante.remove(i),
                    Side::Right => self.succ.remove(i),
                };
                true
            }
            None => false,
        }
    }

    pub fn remove_rel(&mut self, r: &Rel) -> bool {
        match self.rel.iter().position(|x| x == r) {
            Some(i) => {
                self.rel.remove(i);
                true
            }
            None => false,
        }
    }

    pub fn remove_dom(&mut self, d: &Dom) -> bool {
        match self.dom.iter().position(|x| x == d) {
            Some(i) => {
                self.dom.remove(i);
                true
            }
            None => false,
        }
    }

    pub fn has_dom(&self, d: &Dom) -> bool {
        self.dom.contains(d)
    }

    pub fn labels(&self) -> BTreeSet<Label> {
        let mut out = BTreeSet::new();
        for r in &self.rel {
            out.insert(r.from.clone());
            out.insert(r.to.clone());
        }
        out.extend(self.dom.iter().map(|d| d.label.clone()));
        out.extend(self.ante.iter().chain(&self.succ).map(|l| l.label.clone()));
        out
    }

    /// Variables of T together with the free variables of every formula.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out: BTreeSet<String> = self.dom.iter().map(|d| d.var.clone()).collect();
        for lf in self.ante.iter().chain(&self.succ) {
            out.extend(lf.formula.free_vars());
        }
        out
    }

    /// Every variable name in the sequent, bound ones included.
    pub fn all_vars(&self) -> BTreeSet<String> {
        let mut out: BTreeSet<String> = self.dom.iter().map(|d| d.var.clone()).collect();
        for lf in self.ante.iter().chain(&self.succ) {
            out.extend(lf.formula.all_vars());
        }
        out
    }

    pub fn formulas(&self) -> impl Iterator<Item = (Side, &Lf)> {
        self.ante
            .iter()
            .map(|l| (Side::Left, l))
            .chain(self.succ.iter().map(|l| (Side::Right, l)))
    }

    pub fn reach(&self) -> Reach {
        Reach::new(&self.rel, self.labels())
    }

    pub fn reachable(&self, w: &Label, u: &Label) -> bool {
        w == u || strictly_reachable(&self.rel, w, u)
    }

    /// X_w: variables with a domain atom at some label that reaches w.
    pub fn available_vars(&self, w: &Label) -> Result<BTreeSet<String>, SequentError> {
        if !self.labels().contains(w) {
            return Err(SequentError::UnknownLabel(w.clone()));
        }
        let reach = self.reach();
        Ok(self
            .dom
            .iter()
            .filter(|d| reach.reachable(&d.label, w))
            .map(|d| d.var.clone())
            .collect())
    }

    pub fn is_available(&self, t: &Term, w: &Label) -> Result<bool, SequentError> {
        let xs = self.available_vars(w)?;
        Ok(t.vars().is_subset(&xs))
    }

    /// S(t/x): substitutes into every formula and rewrites T by replacing
    /// each w:x with w:y for y ∈ VT(t).
    pub fn subst(&self, t: &Term, x: &str) -> Sequent {
        let tv = t.vars();
        let mut dom = Vec::new();
        for d in &self.dom {
            if d.var == x {
                dom.extend(tv.iter().map(|y| Dom { label: d.label.clone(), var: y.clone() }));
            } else {
                dom.push(d.clone());
            }
        }
        let sub = |v: &[Lf]| v.iter().map(|l| Lf::at(&l.label, l.formula.subst(t, x))).collect();
        Sequent::new(self.rel.clone(), dom, sub(&self.ante), sub(&self.succ))
    }

    /// Applies a label map (labels not mentioned stay put).
    pub fn relabel(&self, map: &BTreeMap<Label, Label>) -> Sequent {
        let m = |l: &Label| map.get(l).cloned().unwrap_or_else(|| l.clone());
        Sequent::new(
            self.rel.iter().map(|r| Rel { from: m(&r.from), to: m(&r.to) }).collect(),
            self.dom.iter().map(|d| Dom { label: m(&d.label), var: d.var.clone() }).collect(),
            self.ante.iter().map(|l| Lf::at(&m(&l.label), l.formula.clone())).collect(),
            self.succ.iter().map(|l| Lf::at(&m(&l.label), l.formula.clone())).collect(),
        )
    }

    /// Canonical form for comparison up to α-equivalence.
    pub fn alpha_normal(&self) -> Sequent {
        let norm = |v: &[Lf]| v.iter().map(|l| Lf::at(&l.label, l.formula.alpha_normal())).collect();
        Sequent::new(self.rel.clone(), self.dom.clone(), norm(&self.ante), norm(&self.succ))
    }

    pub fn alpha_eq(&self, other: &Sequent) -> bool {
        self == other || self.alpha_normal() == other.alpha_normal()
    }

    pub fn validate(&self) -> Result<(), Violation> {
        let mut covered: BTreeSet<Label> = self.dom.iter().map(|d| d.label.clone()).collect();
        covered.extend(self.ante.iter().chain(&self.succ).map(|l| l.label.clone()));
        if self.rel.is_empty() {
            return match covered.len() {
                0 => Err(Violation::Empty),
                1 => Ok(()),
                _ => Err(Violation::SeveralRoots(covered.into_iter().collect())),
            };
        }
        let nodes: BTreeSet<Label> = self.rel.iter().flat_map(|r| [r.from.clone(), r.to.clone()]).collect();
        if let Some(l) = covered.iter().find(|l| !nodes.contains(*l)) {
            return Err(Violation::Uncovered(l.clone()));
        }
        if let Some(cycle) = directed_cycle(&self.rel) {
            return Err(Violation::DirectedCycle(cycle));
        }
        let index: BTreeMap<&Label, usize> = nodes.iter().enumerate().map(|(i, l)| (l, i)).collect();
        let mut parent: Vec<usize> = (0..nodes.len()).collect();
        fn find(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        for r in &self.rel {
            let (a, b) = (find(&mut parent, index[&r.from]), find(&mut parent, index[&r.to]));
            if a == b {
                return Err(Violation::UndirectedCycle(r.clone()));
            }
            parent[a] = b;
        }
        let root = find(&mut parent, 0);
        let stray: Vec<Label> = nodes
            .iter()
            .enumerate()
            .filter(|&(i, _)| find(&mut parent, i) != root)
            .map(|(_, l)| l.clone())
            .collect();
        if !stray.is_empty() {
            return Err(Violation::Disconnected(stray));
        }
        Ok(())
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_ok()
    }

    /// A label not in `avoid`, built from `prefix` and a counter.
    pub fn fresh_label(prefix: &str, avoid: &BTreeSet<Label>) -> Label {
        (1..)
            .map(|i| Label(format!("{prefix}{i}")))
            .find(|l| !avoid.contains(l))
            .expect("unbounded supply")
    }

    /// Graphviz rendering of the polytree with formulas per node.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph sequent {\n");
        for l in self.labels() {
            let mut lines = vec![l.to_string()];
            lines.extend(self.dom.iter().filter(|d| d.label == l).map(|d| format!("{}:{}", d.label, d.var)));
            lines.extend(self.ante.iter().filter(|x| x.label == l).map(|x| format!("{} |-", x.formula)));
            lines.extend(self.succ.iter().filter(|x| x.label == l).map(|x| format!("|- {}", x.formula)));
            let text = lines.join("\\n").replace('"', "\\\"");
            out.push_str(&format!("  \"{l}\" [shape=box, label=\"{text}\"];\n"));
        }
        for r in &self.rel {
            out.push_str(&format!("  \"{}\" -> \"{}\";\n", r.from, r.to));
        }
        out.push_str("}\n");
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SequentError {
    #[error("unknown label {0}")]
    UnknownLabel(Label),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("empty sequent has no label")]
    Empty,
    #[error("no relational atoms but several labels: {}", join(.0))]
    SeveralRoots(Vec<Label>),
    #[error("label {0} does not occur in R")]
    Uncovered(Label),
    #[error("directed cycle through {}", join(.0))]
    DirectedCycle(Vec<Label>),
    #[error("undirected cycle closed by {}R{}", .0.from, .0.to)]
    UndirectedCycle(Rel),
    #[error("R is disconnected; separated labels: {}", join(.0))]
    Disconnected(Vec<Label>),
}

fn join(ls: &[Label]) -> String {
    ls.iter().map(|l| l.0.as_str()).collect::<Vec<_>>().join(", ")
}

fn directed_cycle(rel: &[Rel]) -> Option<Vec<Label>> {
    let mut succ: BTreeMap<&Label, Vec<&Label>> = BTreeMap::new();
    for r in rel {
        succ.entry(&r.from).or_default().push(&r.to);
    }
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state: BTreeMap<&Label, u8> = BTreeMap::new();
    fn dfs<'a>(
        n: &'a Label,
        succ: &BTreeMap<&'a Label, Vec<&'a Label>>,
        state: &mut BTreeMap<&'a Label, u8>,
        stack: &mut Vec<&'a Label>,
    ) -> Option<Vec<Label>> {
        state.insert(n, 1);
        stack.push(n);
        for &m in succ.get(n).map(|v| v.as_slice()).unwrap_or(&[]) {
            match state.get(m).copied().unwrap_or(0) {
                1 => {
                    let i = stack.iter().position(|x| *x == m).unwrap();
                    return Some(stack[i..].iter().map(|l| (*l).clone()).collect());
                }
                0 => {
                    if let Some(c) = dfs(m, succ, state, stack) {
                        return Some(c);
                    }
                }
                _ => {}
            }
        }
        stack.pop();
        state.insert(n, 2);
        None
    }
    let starts: Vec<&Label> = succ.keys().copied().collect();
    for n in starts {
        if state.get(n).copied().unwrap_or(0) == 0 {
            if let Some(c) = dfs(n, &succ, &mut state, &mut Vec::new()) {
                return Some(c);
            }
        }
    }
    None
}

/// Whether a nonempty directed R-path leads from `w` to `u`.
pub fn strictly_reachable(rel: &[Rel], w: &Label, u: &Label) -> bool {
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::from([w]);
    while let Some(n) = queue.pop_front() {
        for r in rel.iter().filter(|r| &r.from == n) {
            if &r.to == u {
                return true;
            }
            if seen.insert(&r.to) {
                queue.push_back(&r.to);
            }
        }
    }
    false
}

/// w↠u: strict reachability or identity.
pub fn reachable(rel: &[Rel], w: &Label, u: &Label) -> bool {
    w == u || strictly_reachable(rel, w, u)
}

/// Precomputed reachability over a fixed set of labels.
#[derive(Clone, Debug)]
pub struct Reach {
    labels: Vec<Label>,
    index: BTreeMap<Label, usize>,
    strict: Vec<Vec<bool>>,
}

impl Reach {
    pub fn new(rel: &[Rel], labels: BTreeSet<Label>) -> Reach {
        let labels: Vec<Label> = labels.into_iter().collect();
        let index: BTreeMap<Label, usize> = labels.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect();
        let n = labels.len();
        let mut strict = vec![vec![false; n]; n];
        for r in rel {
            if let (Some(&a), Some(&b)) = (index.get(&r.from), index.get(&r.to)) {
                strict[a][b] = true;
            }
        }
        for k in 0..n {
            for i in 0..n {
                if strict[i][k] {
                    for j in 0..n {
                        if strict[k][j] {
                            strict[i][j] = true;
                        }
                    }
                }
            }
        }
        Reach { labels, index, strict }
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn strictly(&self, w: &Label, u: &Label) -> bool {
        match (self.index.get(w), self.index.get(u)) {
            (Some(&a), Some(&b)) => self.strict[a][b],
            _ => false,
        }
    }

    pub fn reachable(&self, w: &Label, u: &Label) -> bool {
        w == u || self.strictly(w, u)
    }

    /// Labels reachable from `w`, including `w`, in label order.
    pub fn from(&self, w: &Label) -> Vec<Label> {
        self.labels.iter().filter(|u| self.reachable(w, u)).cloned().collect()
    }

    /// Labels that reach `u`, including `u`, in label order.
    pub fn to(&self, u: &Label) -> Vec<Label> {
        self.labels.iter().filter(|w| self.reachable(w, u)).cloned().collect()
    }
}

/// A label bijection carrying `a` exactly onto `b`, if one exists.
pub fn iso(a: &Sequent, b: &Sequent) -> Option<BTreeMap<Label, Label>> {
    let (la, lb): (Vec<Label>, Vec<Label>) = (a.labels().into_iter().collect(), b.labels().into_iter().collect());
    if la.len() != lb.len()
        || a.rel.len() != b.rel.len()
        || a.dom.len() != b.dom.len()
        || a.ante.len() != b.ante.len()
        || a.succ.len() != b.succ.len()
    {
        return None;
    }
    let (na, nb) = (a.alpha_normal(), b.alpha_normal());
    let profile = |s: &Sequent, l: &Label| {
        let mut parts: Vec<String> = Vec::new();
        parts.push(format!(
            "{}>{}",
            s.rel.iter().filter(|r| &r.to == l).count(),
            s.rel.iter().filter(|r| &r.from == l).count()
        ));
        let mut xs: Vec<String> = s.dom.iter().filter(|d| &d.label == l).map(|d| d.var.clone()).collect();
        xs.sort();
        parts.push(xs.join(","));
        for v in [&s.ante, &s.succ] {
            let fs: Vec<String> = v.iter().filter(|x| &x.label == l).map(|x| x.formula.to_string()).collect();
            parts.push(fs.join(";"));
        }
        parts.join("|")
    };
    let pa: Vec<String> = la.iter().map(|l| profile(&na, l)).collect();
    let pb: Vec<String> = lb.iter().map(|l| profile(&nb, l)).collect();
    let mut used = vec![false; lb.len()];
    let mut map = BTreeMap::new();
    fn go(
        i: usize,
        la: &[Label],
        lb: &[Label],
        pa: &[String],
        pb: &[String],
        used: &mut [bool],
        map: &mut BTreeMap<Label, Label>,
        na: &Sequent,
        nb: &Sequent,
    ) -> bool {
        if i == la.len() {
            return na.relabel(map) == *nb;
        }
        for j in 0..lb.len() {
            if used[j] || pa[i] != pb[j] {
                continue;
            }
            map.insert(la[i].clone(), lb[j].clone());
            let consistent = na.rel.iter().all(|r| match (map.get(&r.from), map.get(&r.to)) {
                (Some(f), Some(t)) => nb.rel.iter().any(|s| &s.from == f && &s.to == t),
                _ => true,
            });
            if consistent {
                used[j] = true;
                if go(i + 1, la, lb, pa, pb, used, map, na, nb) {
                    return true;
                }
                used[j] = false;
            }
            map.remove(&la[i]);
        }
        false
    }
    if go(0, &la, &lb, &pa, &pb, &mut used, &mut map, &na, &nb) {
        Some(map)
    } else {
        None
    }
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if !self.rel.is_empty() {
            let rs: Vec<String> = self.rel.iter().map(|r| format!("{}<{}", r.from, r.to)).collect();
            parts.push(format!("R: {}", rs.join(", ")));
        }
        if !self.dom.is_empty() {
            let ds: Vec<String> = self.dom.iter().map(|d| format!("{}:{}", d.label, d.var)).collect();
            parts.push(format!("T: {}", ds.join(", ")));
        }
        if !self.ante.is_empty() {
            let gs: Vec<String> = self.ante.iter().map(|l| l.to_string()).collect();
            parts.push(gs.join(", "));
        }
        if parts.is_empty() {
            write!(f, "|-")?;
        } else {
            write!(f, "{} |-", parts.join(" ; "))?;
        }
        if !self.succ.is_empty() {
            let ds: Vec<String> = self.succ.iter().map(|l| l.to_string()).collect();
            write!(f, " {}", ds.join(", "))?;
        }
        Ok(())
    }
}

/// Splits at occurrences of `sep` outside parentheses, returning pieces
/// with their byte offsets.
pub(crate) fn split_top<'a>(s: &'a str, sep: &str, base: usize) -> Vec<(usize, &'a str)> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    let bytes = s.as_bytes();
    let mut i = 0;
    while i < s.len() {
        match bytes[i] {
            b'(' => depth += 1,
            b')' => depth -= 1,
            _ => {}
        }
        if depth == 0 && s[i..].starts_with(sep) {
            out.push((base + start, &s[start..i]));
            i += sep.len();
            start = i;
            continue;
        }
        i += 1;
    }
    out.push((base + start, &s[start..]));
    out
}

fn trim_at(base: usize, s: &str) -> (usize, &str) {
    let lead = s.len() - s.trim_start().len();
    (base + lead, s.trim())
}

fn bad(pos: usize, expected: &'static str, found: &str) -> ParseError {
    ParseError { pos, kind: ParseErrorKind::Unexpected { expected, found: found.to_string() } }
}

fn parse_label(pos: usize, s: &str) -> Result<Label, ParseError> {
    let (pos, s) = trim_at(pos, s);
    if is_identifier(s) {
        Ok(Label::new(s))
    } else {
        Err(bad(pos, "a label", s))
    }
}

fn parse_lfs(pos: usize, s: &str, sig: &mut Signature) -> Result<Vec<Lf>, ParseError> {
    let mut out = Vec::new();
    for (p, item) in split_top(s, ",", pos) {
        let (p, item) = trim_at(p, item);
        let colon = item.find(':').ok_or_else(|| bad(p, "label: formula", item))?;
        let label = parse_label(p, &item[..colon])?;
        let formula = parse_formula_at(&item[colon + 1..], p + colon + 1, sig)?;
        out.push(Lf { label, formula });
    }
    Ok(out)
}

fn parse_rels(pos: usize, s: &str) -> Option<Vec<Rel>> {
    split_top(s, ",", pos)
        .into_iter()
        .map(|(p, item)| {
            let (a, b) = item.split_once('<')?;
            Some(Rel { from: parse_label(p, a).ok()?, to: parse_label(p, b).ok()? })
        })
        .collect()
}

fn parse_doms(pos: usize, s: &str) -> Option<Vec<Dom>> {
    split_top(s, ",", pos)
        .into_iter()
        .map(|(p, item)| {
            let (a, b) = item.split_once(':')?;
            let var = b.trim();
            if !is_identifier(var) {
                return None;
            }
            Some(Dom { label: parse_label(p, a).ok()?, var: var.to_string() })
        })
        .collect()
}

/// Parses the sequent text format, extending `sig` with new symbols.
pub fn parse_sequent(text: &str, sig: &mut Signature) -> Result<Sequent, ParseError> {
    let halves = split_top(text, "|-", 0);
    if halves.len() != 2 {
        let pos = halves.get(2).map(|h| h.0).unwrap_or(text.len());
        return Err(bad(pos, "exactly one '|-'", text));
    }
    let (lpos, left) = halves[0];
    let (rpos, right) = halves[1];
    let mut s = Sequent::default();
    if !left.trim().is_empty() {
        for (p, seg) in split_top(left, ";", lpos) {
            let (p, seg) = trim_at(p, seg);
            if let Some(rest) = seg.strip_prefix("R:") {
                if let Some(rs) = parse_rels(p + 2, rest) {
                    rs.into_iter().for_each(|r| s.add_rel(r));
                    continue;
                }
            }
            if let Some(rest) = seg.strip_prefix("T:") {
                if let Some(ds) = parse_doms(p + 2, rest) {
                    ds.into_iter().for_each(|d| s.add_dom(d));
                    continue;
                }
            }
            for lf in parse_lfs(p, seg, sig)? {
                s.add_ante(lf);
            }
        }
    }
    if !right.trim().is_empty() {
        for lf in parse_lfs(rpos, right, sig)? {
            s.add_succ(lf);
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::Term;

    fn seq(text: &str) -> Sequent {
        parse_sequent(text, &mut Signature::new()).unwrap()
    }

    #[test]
    fn displayed_polytree_is_valid() {
        let s = seq("R: u'<w, u<w, w<v ; T: u':x, u:x, u:y, w:z, v:y ; u': p(x), u: q(x,y) |- w: r(z), v: s(y)");
        assert_eq!(s.validate(), Ok(()));
    }

    #[test]
    fn cycles_are_rejected() {
        assert!(matches!(seq("R: w<u, u<w |- w: p").validate(), Err(Violation::DirectedCycle(_))));
        assert!(matches!(seq("R: w<u, v<u, w<v |- w: p").validate(), Err(Violation::UndirectedCycle(_))));
        assert!(matches!(seq("R: w<u, v<x |- w: p").validate(), Err(Violation::Disconnected(_))));
        assert!(matches!(seq("R: w<u |- z: p").validate(), Err(Violation::Uncovered(_))));
        assert!(matches!(seq("w: p |- u: q").validate(), Err(Violation::SeveralRoots(_))));
        assert_eq!(Sequent::default().validate(), Err(Violation::Empty));
    }

    #[test]
    fn reachability_example() {
        let s = seq("R: u<w, w<v |- v: p");
        let (u, v, w) = (Label::new("u"), Label::new("v"), Label::new("w"));
        assert!(s.reachable(&u, &v));
        assert!(!s.reachable(&v, &w));
        assert!(reachable(&[], &w, &w));
        assert!(!strictly_reachable(&[], &w, &w));
    }

    #[test]
    fn availability_example() {
        let s = seq("R: u<w, w<v ; T: w:x, u:y, v:z |- w: p");
        let w = Label::new("w");
        let xs = s.available_vars(&w).unwrap();
        assert_eq!(xs, BTreeSet::from(["x".to_string(), "y".to_string()]));
        assert!(s.is_available(&Term::app("f", vec![Term::var("y")]), &w).unwrap());
        assert!(!s.is_available(&Term::var("z"), &w).unwrap());
        assert!(s.is_available(&Term::constant("a"), &Label::new("v")).unwrap());
        assert!(s.available_vars(&Label::new("nope")).is_err());
    }

    #[test]
    fn substitution_example() {
        let s = seq("R: w<u ; T: w:x, u:x, u:y ; w: p(x) |- u: forall y. q(x,y)");
        let t = Term::app("f", vec![Term::var("y"), Term::var("z")]);
        let r = s.subst(&t, "x");
        let doms: Vec<String> = r.dom().iter().map(|d| format!("{}:{}", d.label, d.var)).collect();
        assert_eq!(doms, vec!["u:y", "u:z", "w:y", "w:z"]);
        assert_eq!(r.ante()[0].formula, Formula::atom("p", vec![t.clone()]));
        match &r.succ()[0].formula {
            Formula::Forall(b, body) => {
                assert_ne!(b, "y");
                assert_eq!(**body, Formula::atom("q", vec![t, Term::var(b)]));
            }
            f => panic!("unexpected {f}"),
        }
    }

    #[test]
    fn constant_substitution_drops_domain_atoms() {
        let s = seq("T: w:x, w:y ; w: p(x) |- w: q");
        let r = s.subst(&Term::constant("a"), "x");
        assert_eq!(r.dom(), &[Dom::new("w", "y")]);
    }

    #[test]
    fn printing_round_trips() {
        for text in [
            "|- w: p -> p",
            "R: w<u ; T: w:x ; u: q, w: p(x) |- u: r(x,f(x)), w: forall y. (p(y) | q)",
            "w: p |-",
            "T: w:x |- w: exists y. p(y) -< q",
        ] {
            assert_eq!(seq(text).to_string(), text);
        }
    }

    #[test]
    fn label_named_like_a_segment_marker() {
        let s = seq("R: R<T ; T: T:x ; R: p, T: q |- R: r");
        assert_eq!(s.rel(), &[Rel::new("R", "T")]);
        assert_eq!(s.ante().len(), 2);
        assert_eq!(parse_sequent(&s.to_string(), &mut Signature::new()).unwrap(), s);
    }

    #[test]
    fn iso_finds_permutations() {
        let a = seq("R: w<u, w<v ; u: p |- v: q");
        let b = seq("R: a<c, a<b ; c: p |- b: q");
        let m = iso(&a, &b).unwrap();
        assert_eq!(m[&Label::new("u")], Label::new("c"));
        assert!(iso(&a, &a).is_some());
        let chain = seq("R: w<u, u<v |- w: p");
        let fork = seq("R: w<u, w<v |- w: p");
        assert!(iso(&chain, &fork).is_none());
    }
}
