use anyhow::{anyhow, Context, Result};
use biq::calculus::{check_proof_with, CheckErrorKind, RuleError};
use biq::semantics::{check_model, falsify, parse_model};
use biq::transform::eliminate_all_cuts_with_stats;
use biq::{
    classify, find_countermodel, formula_interpretation, parse_formula_open, parse_sequent, prove, read_proof,
    write_proof, Bounds, SearchConfig, SearchOutcome, Sequent, Signature, Variant,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "biq", version, about = "Proof search and checking for first-order bi-intuitionistic logic")]
struct Cli {
    #[command(flatten)]
    opts: Opts,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug)]
struct Opts {
    #[arg(long, global = true, default_value = "id")]
    variant: Variant,
    #[arg(long, global = true, default_value_t = 6)]
    max_rounds: usize,
    #[arg(long, global = true, default_value_t = 2)]
    max_term_depth: usize,
    /// Accepted for reproducibility; every command is deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Worker threads for countermodel enumeration.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Format {
    Text,
}

/// Exactly one of a file, `--formula`, or stdin.
#[derive(Args, Debug)]
struct Input {
    /// Input file; stdin when absent.
    file: Option<PathBuf>,
    /// Inline input instead of a file.
    #[arg(long, conflicts_with = "file")]
    formula: Option<String>,
}

impl Input {
    fn read(&self) -> Result<String> {
        if let Some(f) = &self.formula {
            return Ok(f.clone());
        }
        match &self.file {
            Some(p) => std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display())),
            None => {
                let mut s = String::new();
                std::io::stdin().read_to_string(&mut s).context("reading stdin")?;
                Ok(s)
            }
        }
    }
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Parse a formula or sequent and print it back.
    Parse {
        #[command(flatten)]
        input: Input,
        /// Print the polytree in DOT instead.
        #[arg(long)]
        dot: bool,
    },
    /// Check the well-formedness conditions of a sequent.
    Validate {
        #[command(flatten)]
        input: Input,
    },
    /// Search for a proof.
    Prove {
        #[command(flatten)]
        input: Input,
    },
    /// Check a serialized proof.
    Check {
        #[command(flatten)]
        input: Input,
        /// Accept cut nodes.
        #[arg(long)]
        allow_cut: bool,
    },
    /// Remove all cuts from a serialized proof.
    Cutelim {
        #[command(flatten)]
        input: Input,
        /// Print reduction statistics on stderr.
        #[arg(long)]
        stats: bool,
    },
    /// Search for a finite countermodel within the given bounds.
    Countermodel {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 2)]
        worlds: usize,
        #[arg(long, default_value_t = 2)]
        universe: usize,
    },
    /// Evaluate a sequent in a model, over all interpretations and assignments.
    Eval {
        #[command(flatten)]
        input: Input,
        /// Model file.
        #[arg(long)]
        model: PathBuf,
    },
    /// Print the formula interpretation of an intuitionistic sequent.
    Interp {
        #[command(flatten)]
        input: Input,
    },
}

/// Input-level failures map to exit code 2.
#[derive(Debug)]
struct InputError(anyhow::Error);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for InputError {}

fn bad_input(e: impl Into<anyhow::Error>) -> anyhow::Error {
    anyhow::Error::new(InputError(e.into()))
}

/// A formula is read as the goal `|- w: φ`; anything containing `|-` as a sequent.
fn read_goal(input: &Input) -> Result<(Sequent, Signature)> {
    let text = input.read().map_err(bad_input)?;
    let mut sig = Signature::new();
    let s = if text.contains("|-") {
        parse_sequent(text.trim(), &mut sig).map_err(|e| bad_input(anyhow!("parse error: {e}")))?
    } else {
        let f = parse_formula_open(text.trim(), &mut sig).map_err(|e| bad_input(anyhow!("parse error: {e}")))?;
        Sequent::goal("w", f)
    };
    Ok((s, sig))
}

fn read_proof_input(input: &Input) -> Result<biq::Proof> {
    let text = input.read().map_err(bad_input)?;
    read_proof(&text).map_err(|e| bad_input(anyhow!("proof parse error: {e}")))
}

fn check_message(e: &biq::calculus::CheckError) -> String {
    match &e.kind {
        CheckErrorKind::Rule(RuleError::NotInVariant(r, v)) => {
            format!("{r} illegal in variant {v} (at node {:?})", e.path)
        }
        _ => e.to_string(),
    }
}

fn run(cli: Cli) -> Result<bool> {
    let o = &cli.opts;
    let Format::Text = o.format;
    if let Some(n) = o.jobs {
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global().map_err(bad_input)?;
    }
    let cfg = SearchConfig {
        max_rounds: o.max_rounds,
        max_term_depth: o.max_term_depth,
        ..SearchConfig::new(o.variant)
    };
    match &cli.cmd {
        Cmd::Parse { input, dot } => {
            let (s, _) = read_goal(input)?;
            if *dot {
                print!("{}", s.to_dot());
            } else {
                println!("{s}");
            }
            Ok(true)
        }
        Cmd::Validate { input } => {
            let (s, _) = read_goal(input)?;
            match s.validate() {
                Ok(()) => {
                    println!("valid");
                    Ok(true)
                }
                Err(v) => {
                    println!("invalid: {v}");
                    Ok(false)
                }
            }
        }
        Cmd::Prove { input } => {
            let (s, sig) = read_goal(input)?;
            match prove(&s, &sig, &cfg).map_err(bad_input)? {
                SearchOutcome::Proved(p) => {
                    print!("{}", write_proof(&p));
                    Ok(true)
                }
                SearchOutcome::Refuted(r) => {
                    println!("# refuted; terms truncated at depth {}", r.depth);
                    print!("{}", r.countermodel);
                    Ok(false)
                }
                SearchOutcome::Exhausted(stats) => {
                    println!("exhausted");
                    print!("{stats}");
                    Ok(false)
                }
            }
        }
        Cmd::Check { input, allow_cut } => {
            let p = read_proof_input(input)?;
            match check_proof_with(&p, o.variant, *allow_cut) {
                Ok(()) => {
                    println!("ok: {} nodes, height {}", p.size(), p.height());
                    Ok(true)
                }
                Err(e) => {
                    println!("rejected: {}", check_message(&e));
                    Ok(false)
                }
            }
        }
        Cmd::Cutelim { input, stats } => {
            let p = read_proof_input(input)?;
            if let Err(e) = check_proof_with(&p, o.variant, true) {
                eprintln!("input rejected: {}", check_message(&e));
                return Ok(false);
            }
            let (q, st) = eliminate_all_cuts_with_stats(&p, o.variant)?;
            if *stats {
                eprintln!("{st}");
            }
            print!("{}", write_proof(&q));
            Ok(true)
        }
        Cmd::Countermodel { input, worlds, universe } => {
            let (s, _) = read_goal(input)?;
            let bounds = Bounds { worlds: *worlds, universe: *universe };
            match find_countermodel(&s, bounds, o.variant) {
                Some(cm) => {
                    print!("{cm}");
                    Ok(true)
                }
                None => {
                    println!("no countermodel with at most {worlds} worlds and {universe} elements");
                    Ok(false)
                }
            }
        }
        Cmd::Eval { input, model } => {
            let (s, _) = read_goal(input)?;
            let text = std::fs::read_to_string(model)
                .with_context(|| format!("reading {}", model.display()))
                .map_err(bad_input)?;
            let cm = parse_model(&text).map_err(|e| bad_input(anyhow!("model parse error: {e}")))?;
            if let Err(vs) = check_model(&cm.model, o.variant) {
                let msgs: Vec<String> = vs.iter().map(|v| v.to_string()).collect();
                return Err(bad_input(anyhow!("model is not a {} model: {}", o.variant, msgs.join("; "))));
            }
            let labels: Vec<_> = s.labels().into_iter().collect();
            let vars: Vec<_> = s.free_vars().into_iter().collect();
            match falsify(&cm.model, &s, &labels, &vars) {
                None => {
                    println!("holds");
                    Ok(true)
                }
                Some((iota, alpha)) => {
                    let falsified = biq::Countermodel { model: cm.model, iota, alpha };
                    println!("falsified");
                    print!("{falsified}");
                    Ok(false)
                }
            }
        }
        Cmd::Interp { input } => {
            let (s, _) = read_goal(input)?;
            match formula_interpretation(&s) {
                Ok(f) => {
                    println!("{f}");
                    Ok(true)
                }
                Err(_) => {
                    println!("not quasi-intuitionistic: {:?}", classify(&s));
                    Ok(false)
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<InputError>() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
