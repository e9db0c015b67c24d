//! Intuitionistic sequents and their formula interpretation.

use crate::sequent::{Label, Lf, Sequent};
use crate::syntax::Formula;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct IntSequentReport {
    /// R is a tree with a unique root.
    pub is_tree_rooted: bool,
    pub exclusion_free: bool,
    /// Every free variable of a formula w:φ is available for w.
    pub vars_available: bool,
    /// No variable has domain atoms at two different labels.
    pub domain_atoms_unique: bool,
    /// Tree-rooted, exclusion-free, unique domain atoms, and every free
    /// variable of w:φ is either available for w or absent from T.
    pub quasi: bool,
}

impl IntSequentReport {
    pub fn is_intuitionistic(&self) -> bool {
        self.is_tree_rooted && self.exclusion_free && self.vars_available && self.domain_atoms_unique
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InterpError {
    #[error("sequent is not quasi-intuitionistic: {0:?}")]
    NotQuasi(IntSequentReport),
}

/// The root of R when R is a tree over all labels of `s`.
pub fn tree_root(s: &Sequent) -> Option<Label> {
    let labels = s.labels();
    let mut indeg: BTreeMap<&Label, usize> = labels.iter().map(|l| (l, 0)).collect();
    for r in s.rel() {
        *indeg.get_mut(&r.to)? += 1;
    }
    let roots: Vec<&Label> = indeg.iter().filter(|(_, &d)| d == 0).map(|(l, _)| *l).collect();
    if roots.len() != 1 || indeg.values().any(|&d| d > 1) {
        return None;
    }
    let root = roots[0].clone();
    let mut seen = BTreeSet::from([root.clone()]);
    let mut stack = vec![root.clone()];
    while let Some(w) = stack.pop() {
        for r in s.rel().iter().filter(|r| r.from == w) {
            if seen.insert(r.to.clone()) {
                stack.push(r.to.clone());
            }
        }
    }
    (seen.len() == labels.len()).then_some(root)
}

pub fn classify(s: &Sequent) -> IntSequentReport {
    let is_tree_rooted = tree_root(s).is_some();
    let exclusion_free = s.formulas().all(|(_, lf)| !lf.formula.has_exclusion());
    let mut owners: BTreeMap<&str, BTreeSet<&Label>> = BTreeMap::new();
    for d in s.dom() {
        owners.entry(d.var.as_str()).or_default().insert(&d.label);
    }
    let domain_atoms_unique = owners.values().all(|ls| ls.len() == 1);
    let available = |lf: &Lf, x: &str| s.dom().iter().any(|d| d.var == x && s.reachable(&d.label, &lf.label));
    let mut vars_available = true;
    let mut relaxed = true;
    for (_, lf) in s.formulas() {
        for x in lf.formula.free_vars() {
            if !available(lf, &x) {
                vars_available = false;
                if owners.contains_key(x.as_str()) {
                    relaxed = false;
                }
            }
        }
    }
    IntSequentReport {
        is_tree_rooted,
        exclusion_free,
        vars_available,
        domain_atoms_unique,
        quasi: is_tree_rooted && exclusion_free && domain_atoms_unique && relaxed,
    }
}

fn conj(fs: impl IntoIterator<Item = Formula>) -> Formula {
    fs.into_iter().reduce(Formula::and).unwrap_or(Formula::Top)
}

fn disj(fs: impl IntoIterator<Item = Formula>) -> Formula {
    fs.into_iter().reduce(Formula::or).unwrap_or(Formula::Bot)
}

/// F(S): the tree read as nested implications, with the variables of the
/// domain atoms at each node universally bound at that node.
pub fn formula_interpretation(s: &Sequent) -> Result<Formula, InterpError> {
    let report = classify(s);
    if !report.quasi {
        return Err(InterpError::NotQuasi(report));
    }
    let root = tree_root(s).ok_or(InterpError::NotQuasi(report))?;
    Ok(interpret_at(s, &root))
}

fn interpret_at(s: &Sequent, u: &Label) -> Formula {
    let at = |lfs: &[Lf]| lfs.iter().filter(|l| &l.label == u).map(|l| l.formula.clone()).collect::<Vec<_>>();
    let children: Vec<&Label> = s.rel().iter().filter(|r| &r.from == u).map(|r| &r.to).collect();
    let succ = if children.is_empty() {
        disj(at(s.succ()))
    } else {
        let mut parts = vec![disj(at(s.succ()))];
        parts.extend(children.into_iter().map(|w| interpret_at(s, w)));
        disj(parts)
    };
    let body = Formula::imp(conj(at(s.ante())), succ);
    s.dom()
        .iter()
        .filter(|d| &d.label == u)
        .rev()
        .fold(body, |f, d| Formula::forall(&d.var, f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_formula_open;
    use crate::sequent::parse_sequent;
    use crate::syntax::Signature;

    fn seq(text: &str) -> Sequent {
        parse_sequent(text, &mut Signature::new()).unwrap()
    }

    fn f(text: &str) -> Formula {
        parse_formula_open(text, &mut Signature::new()).unwrap()
    }

    #[test]
    fn flat_sequent() {
        let s = seq("T: w:x ; w: p(x) |- w: q(x)");
        assert!(classify(&s).is_intuitionistic());
        assert_eq!(formula_interpretation(&s).unwrap(), f("forall x. (p(x) -> q(x))"));
    }

    #[test]
    fn two_node_chain() {
        let s = seq("R: w<u ; w: p |- u: q");
        assert_eq!(formula_interpretation(&s).unwrap(), f("p -> (bot | (top -> q))"));
    }

    #[test]
    fn leaf_goal() {
        let s = seq("|- w: p -> q");
        let r = classify(&s);
        assert!(r.is_intuitionistic() && r.quasi);
        assert_eq!(formula_interpretation(&s).unwrap(), f("top -> (p -> q)"));
    }

    #[test]
    fn variables_bind_at_their_node() {
        let s = seq("R: w<u, w<v ; T: w:x, u:y ; w: p(x) |- u: q(x, y), v: r(x), w: r(x)");
        assert!(classify(&s).is_intuitionistic());
        let want = f("forall x. (p(x) -> ((r(x) | (forall y. (top -> q(x, y)))) | (top -> r(x))))");
        assert_eq!(formula_interpretation(&s).unwrap(), want);
    }

    #[test]
    fn clauses_are_independent() {
        let r = classify(&seq("|- w: p -< q"));
        assert!(!r.exclusion_free && r.is_tree_rooted && !r.quasi);
        let r = classify(&seq("R: w<u ; T: w:x, u:x ; w: p(x) |-"));
        assert!(!r.domain_atoms_unique && r.vars_available && !r.quasi);
        let r = classify(&seq("R: w<u, v<u |- w: p"));
        assert!(!r.is_tree_rooted && r.exclusion_free);
        let r = classify(&seq("w: p(x) |- w: p(x)"));
        assert!(!r.vars_available && r.quasi && !r.is_intuitionistic());
        let r = classify(&seq("R: w<u ; T: u:x ; w: p(x) |-"));
        assert!(!r.vars_available && !r.quasi);
        assert!(formula_interpretation(&seq("R: w<u ; T: u:x ; w: p(x) |-")).is_err());
    }

    #[test]
    fn interpretation_has_no_exclusion() {
        let s = seq("R: w<u, u<v ; T: u:x ; w: p, u: forall y. q(y) |- v: q(x), u: p -> r");
        let g = formula_interpretation(&s).unwrap();
        assert!(!g.has_exclusion());
        assert!(g.free_vars().is_empty());
    }
}
