//! Acceptance suite: one pass/fail line per criterion.

use biq::calculus::{check_proof, check_proof_with, RuleId, Variant};
use biq::gen::{
    cut_corpus, fuzz_signature, random_formula, random_model, random_proof, random_rule_instance, random_transform,
    GenConfig,
};
use biq::search::{prove, SearchConfig, SearchOutcome};
use biq::semantics::{check_model, find_countermodel, holds_everywhere, Assignment, Bounds};
use biq::transform::{eliminate_all_cuts_with_stats, invert};
use biq::{parse_formula_open, Sequent, Signature};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const CD_EXAMPLE: &str = "forall x. (p | r(x)) -> p | (q -> forall x. r(x))";
const DS: &str = "forall x. ((p(x) -< exists y. p(y)) -> bot)";
const SHIFT: &str = "forall x. (p(x) | q) -> forall x. p(x) | q";
const PEIRCE: &str = "((p -> q) -> p) -> p";

fn goal(text: &str) -> (Sequent, Signature) {
    let mut sig = Signature::new();
    let f = parse_formula_open(text, &mut sig).expect("corpus formula parses");
    (Sequent::goal("w", f), sig)
}

fn run(text: &str, cfg: &SearchConfig) -> SearchOutcome {
    let (g, sig) = goal(text);
    prove(&g, &sig, cfg).expect("valid goal")
}

fn within(start: Instant, limit: Duration, what: &str) -> Result<(), String> {
    let t = start.elapsed();
    if t > limit {
        return Err(format!("{what} took {t:?}, limit {limit:?}"));
    }
    Ok(())
}

fn cd_golden() -> Outcome {
    let start = Instant::now();
    let SearchOutcome::Proved(p) = run(CD_EXAMPLE, &SearchConfig::new(Variant::Cd)) else {
        return Err("not proved under cd".into());
    };
    check_proof(&p, Variant::Cd).map_err(|e| e.to_string())?;
    if !p.conclusion.alpha_eq(&goal(CD_EXAMPLE).0) {
        return Err(format!("proof concludes `{}`", p.conclusion));
    }
    let want: BTreeMap<RuleId, usize> = [
        (RuleId::Ax, 2),
        (RuleId::OrL, 1),
        (RuleId::ForallL, 1),
        (RuleId::ForallR, 1),
        (RuleId::ImplR, 2),
        (RuleId::OrR, 1),
    ]
    .into();
    if p.rule_counts() != want {
        return Err(format!("rule multiset {:?}", p.rule_counts()));
    }
    within(start, Duration::from_secs(1), "search")?;
    Ok(format!("proved with {} nodes in {:?}", p.size(), start.elapsed()))
}

fn ds_golden() -> Outcome {
    let start = Instant::now();
    let SearchOutcome::Proved(p) = run(DS, &SearchConfig::new(Variant::Id)) else {
        return Err("not proved under id".into());
    };
    check_proof(&p, Variant::Id).map_err(|e| e.to_string())?;
    let ds = p.rule_counts().get(&RuleId::Ds).copied().unwrap_or(0);
    if ds == 0 {
        return Err("proof has no ds node".into());
    }
    within(start, Duration::from_secs(1), "id search")?;
    let start = Instant::now();
    if run(DS, &SearchConfig::new(Variant::IdNoDs)).is_proved() {
        return Err("proved without ds".into());
    }
    within(start, Duration::from_secs(1), "id-no-ds search")?;
    Ok(format!("{ds} ds node(s); id-no-ds not proved"))
}

fn quantifier_shift() -> Outcome {
    let start = Instant::now();
    for rounds in 1..=10 {
        for depth in 0..=3 {
            let cfg = SearchConfig { max_rounds: rounds, max_term_depth: depth, ..SearchConfig::new(Variant::Id) };
            if run(SHIFT, &cfg).is_proved() {
                return Err(format!("proved under id at rounds={rounds} depth={depth}"));
            }
        }
    }
    let (g, _) = goal(SHIFT);
    let cm = find_countermodel(&g, Bounds { worlds: 2, universe: 2 }, Variant::Id).ok_or("no countermodel")?;
    check_model(&cm.model, Variant::Id).map_err(|v| format!("{v:?}"))?;
    if cm.model.eval_sequent(&cm.iota, &cm.alpha, &g) != Ok(false) {
        return Err("countermodel does not falsify the goal".into());
    }
    if cm.model.world_count() > 2 || cm.model.universe.len() > 2 {
        return Err("countermodel exceeds the bounds".into());
    }
    if !run(SHIFT, &SearchConfig::new(Variant::Cd)).is_proved() {
        return Err("not proved under cd".into());
    }
    within(start, Duration::from_secs(10), "criterion")?;
    Ok(format!("40 bounded id searches fail, countermodel found, cd proves; {:?}", start.elapsed()))
}

fn variant_of(i: u64) -> Variant {
    if i.is_multiple_of(2) {
        Variant::Id
    } else {
        Variant::Cd
    }
}

fn soundness_fuzz() -> Outcome {
    let start = Instant::now();
    let sig = fuzz_signature();
    let cfg = GenConfig::default();
    let failures: Vec<String> = (0..1000u64)
        .into_par_iter()
        .filter_map(|i| {
            let v = variant_of(i);
            let mut rng = ChaCha8Rng::seed_from_u64(0x50_0000 + i);
            let Some(p) = random_proof(&mut rng, &sig, v, &cfg) else {
                return Some(format!("proof {i}: generator gave up"));
            };
            if let Err(e) = check_proof(&p, v) {
                return Some(format!("proof {i}: {e}"));
            }
            for k in 0..50 {
                let m = random_model(&mut rng, &sig, v, 3, 3);
                if let Err(e) = check_model(&m, v) {
                    return Some(format!("proof {i}: model {k} ill-formed: {e:?}"));
                }
                if !holds_everywhere(&m, &p.conclusion) {
                    return Some(format!("proof {i}: `{}` falsified by model {k}", p.conclusion));
                }
            }
            None
        })
        .collect();
    if let Some(f) = failures.first() {
        return Err(format!("{} failure(s), first: {f}", failures.len()));
    }
    within(start, Duration::from_secs(300), "fuzz")?;
    Ok(format!("1000 proofs x 50 models, no falsification; {:?}", start.elapsed()))
}

const HP_TRANSFORMS: [&str; 13] =
    ["wv", "id", "iw", "br_f", "br_b", "mrg", "psub", "ctr_l", "ctr_r", "lwr", "lft", "botR", "topL"];

fn hp_admissibility() -> Outcome {
    let start = Instant::now();
    let sig = fuzz_signature();
    let cfg = GenConfig::default();
    let results: Vec<Result<usize, String>> = HP_TRANSFORMS
        .par_iter()
        .enumerate()
        .map(|(n, &name)| {
            let mut rng = ChaCha8Rng::seed_from_u64(0x60_0000 + n as u64);
            let mut done = 0;
            let mut tries = 0;
            while done < 200 {
                tries += 1;
                if tries > 20_000 {
                    return Err(format!("{name}: only {done} legal instances found"));
                }
                let v = variant_of(tries);
                let p = random_proof(&mut rng, &sig, v, &cfg).ok_or(format!("{name}: generator gave up"))?;
                let Some((input, t)) = random_transform(&mut rng, &p, &sig, v, name) else { continue };
                let out = t.apply(&input, v).map_err(|e| format!("{name}: {t:?} on `{}`: {e}", input.conclusion))?;
                check_proof(&out, v).map_err(|e| format!("{name}: output rejected: {e}"))?;
                if !out.conclusion.alpha_eq(&t.expected_conclusion(&input.conclusion)) {
                    return Err(format!("{name}: conclusion `{}` does not match the schema", out.conclusion));
                }
                if out.height() > input.height() {
                    return Err(format!("{name}: height grew from {} to {}", input.height(), out.height()));
                }
                done += 1;
            }
            Ok(done)
        })
        .collect();
    let total: usize = results.into_iter().collect::<Result<Vec<_>, _>>()?.into_iter().sum();
    within(start, Duration::from_secs(120), "suite")?;
    Ok(format!("{total} transform applications over 13 rules; {:?}", start.elapsed()))
}

fn invertibility() -> Outcome {
    let sig = fuzz_signature();
    let cfg = GenConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0x70_0000);
    let mut done = 0;
    let mut i = 0u64;
    while done < 200 {
        i += 1;
        let v = variant_of(i);
        let p = random_proof(&mut rng, &sig, v, &cfg).ok_or("generator gave up")?;
        let Some(inst) = random_rule_instance(&mut rng, &p.conclusion, &sig, v) else { continue };
        let qs = invert(&p, &inst, v).map_err(|e| format!("{} on `{}`: {e}", inst.rule, p.conclusion))?;
        for q in &qs {
            check_proof(q, v).map_err(|e| format!("{}: premise proof rejected: {e}", inst.rule))?;
            if q.height() > p.height() {
                return Err(format!("{}: height grew from {} to {}", inst.rule, p.height(), q.height()));
            }
        }
        done += 1;
    }
    Ok(format!("{done} inversions"))
}

fn cut_elimination() -> Outcome {
    let start = Instant::now();
    let sig = fuzz_signature();
    let mut rng = ChaCha8Rng::seed_from_u64(0x80_0000);
    let corpus = cut_corpus(&mut rng, &sig, 60);
    if corpus.len() < 50 {
        return Err(format!("corpus has only {} proofs", corpus.len()));
    }
    let results: Vec<Result<usize, String>> = corpus
        .par_iter()
        .enumerate()
        .map(|(i, (p, v))| {
            check_proof_with(p, *v, true).map_err(|e| format!("input {i} rejected: {e}"))?;
            let (q, stats) = eliminate_all_cuts_with_stats(p, *v).map_err(|e| format!("input {i}: {e}"))?;
            if q.has_cut() {
                return Err(format!("output {i} still has a cut"));
            }
            if q.conclusion != p.conclusion {
                return Err(format!("output {i} proves `{}`", q.conclusion));
            }
            check_proof(&q, *v).map_err(|e| format!("output {i} rejected: {e}"))?;
            Ok(stats.measure_checks)
        })
        .collect();
    let checks: usize = results.into_iter().collect::<Result<Vec<_>, _>>()?.into_iter().sum();
    within(start, Duration::from_secs(120), "corpus")?;
    Ok(format!("{} proofs reduced, {checks} measure decreases asserted; {:?}", corpus.len(), start.elapsed()))
}

fn persistence() -> Outcome {
    let sig = fuzz_signature();
    let mut rng = ChaCha8Rng::seed_from_u64(0x90_0000);
    let vars = vec!["x".to_string(), "y".to_string()];
    for i in 0..500u64 {
        let v = variant_of(i);
        let m = random_model(&mut rng, &sig, v, 3, 3);
        let pairs: Vec<(usize, usize)> = (0..m.world_count())
            .flat_map(|w| (0..m.world_count()).map(move |u| (w, u)))
            .filter(|&(w, u)| m.leq(w, u))
            .collect();
        let (w, u) = pairs[rng.gen_range(0..pairs.len())];
        let size = rng.gen_range(0..=4);
        let f = random_formula(&mut rng, &sig, &vars, size, true);
        let mut alpha = Assignment::new();
        for x in &vars {
            alpha.set(x, rng.gen_range(0..m.universe.len()));
        }
        let at_w = m.eval_formula(w, &alpha, &f).map_err(|e| e.to_string())?;
        let at_u = m.eval_formula(u, &alpha, &f).map_err(|e| e.to_string())?;
        if at_w && !at_u {
            return Err(format!("{f} holds at {w} but not at {u}"));
        }
    }
    Ok("500 triples".into())
}

/// (formula, valid in ID)
const CONSERVATIVITY: [(&str, bool); 30] = [
    (CD_EXAMPLE, false),
    (PEIRCE, false),
    (SHIFT, false),
    ("p -> p", true),
    ("p & q -> q & p", true),
    ("p | q -> q | p", true),
    ("p -> (q -> p)", true),
    ("(p -> q) -> ((q -> r) -> (p -> r))", true),
    ("((p | q) -> r) -> (p -> r)", true),
    ("((p | (p -> bot)) -> bot) -> bot", true),
    ("(p -> q) -> ((q -> bot) -> (p -> bot))", true),
    ("(forall x. p(x)) -> exists x. p(x)", true),
    ("(exists x. (p(x) & q)) -> (exists x. p(x)) & q", true),
    ("(forall x. (p(x) & r(x))) -> forall x. p(x)", true),
    ("(exists x. p(x)) -> ((forall x. (p(x) -> bot)) -> bot)", true),
    ("(forall x. (p(x) -> r(x))) -> ((forall x. p(x)) -> forall x. r(x))", true),
    ("(q -> forall x. p(x)) -> forall x. (q -> p(x))", true),
    ("(exists x. (q -> p(x))) -> (q -> exists x. p(x))", true),
    ("bot -> p", true),
    ("p & (p -> bot) -> q", true),
    ("(((p -> bot) -> bot) -> bot) -> (p -> bot)", true),
    ("p | (p -> bot)", false),
    ("((p -> bot) -> bot) -> p", false),
    ("(p -> q) | (q -> p)", false),
    ("((forall x. p(x)) -> bot) -> exists x. (p(x) -> bot)", false),
    ("((p -> bot) -> q) -> p | q", false),
    ("((p & q) -> bot) -> ((p -> bot) | (q -> bot))", false),
    ("p -> q", false),
    ("(forall x. (q | p(x))) -> q | forall x. p(x)", false),
    ("((p -> q) -> q) -> p | q", false),
];

fn conservativity() -> Outcome {
    let start = Instant::now();
    let mut lines = Vec::new();
    let results: Vec<Result<(), String>> = CONSERVATIVITY
        .par_iter()
        .map(|&(text, valid)| {
            let full = run(text, &SearchConfig::new(Variant::Id)).is_proved();
            let int_cfg = SearchConfig { intuitionistic_only: true, ..SearchConfig::new(Variant::Id) };
            let int = run(text, &int_cfg).is_proved();
            if full != int {
                return Err(format!("`{text}`: id={full}, intuitionistic-only={int}"));
            }
            if full != valid {
                return Err(format!("`{text}`: expected provable={valid}, got {full}"));
            }
            if !full {
                let (g, _) = goal(text);
                let found = (1..=3).any(|w| {
                    (1..=2).any(|u| {
                        find_countermodel(&g, Bounds { worlds: w, universe: u }, Variant::Id)
                            .is_some_and(|cm| cm.model.eval_sequent(&cm.iota, &cm.alpha, &g) == Ok(false))
                    })
                });
                if !found {
                    return Err(format!("`{text}`: no countermodel within 3 worlds and 2 elements"));
                }
            }
            Ok(())
        })
        .collect();
    for r in results {
        if let Err(e) = r {
            lines.push(e);
        }
    }
    if !lines.is_empty() {
        return Err(lines.join("; "));
    }
    let theorems = CONSERVATIVITY.iter().filter(|c| c.1).count();
    Ok(format!("{theorems} theorems agree, {} non-theorems refuted; {:?}", 30 - theorems, start.elapsed()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("cd golden", cd_golden),
        ("ds golden", ds_golden),
        ("quantifier shift", quantifier_shift),
        ("soundness fuzz", soundness_fuzz),
        ("hp-admissibility", hp_admissibility),
        ("invertibility", invertibility),
        ("cut elimination", cut_elimination),
        ("persistence", persistence),
        ("conservativity", conservativity),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|s| s.parse().ok());
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if only.is_some_and(|k| k != i + 1) {
            continue;
        }
        match f() {
            Ok(msg) => println!("criterion {} ({name}): pass: {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL: {msg}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
