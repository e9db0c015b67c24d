//! A proof engine for first-order bi-intuitionistic logic based on polytree
//! sequent calculi with increasing (`id`) or constant (`cd`) domains.

pub mod calculus;
pub mod gen;
pub mod interp;
pub mod parse;
pub mod proof_io;
pub mod search;
pub mod semantics;
pub mod sequent;
pub mod syntax;
pub mod transform;

pub use calculus::{check_proof, premises, Proof, RuleId, RuleInstance, Variant};
pub use parse::{parse_formula, parse_formula_open, ParseError};
pub use sequent::{parse_sequent, Dom, Label, Lf, Rel, Sequent, Side};
pub use syntax::{Formula, Signature, Term};
pub use interp::{classify, formula_interpretation, IntSequentReport};
pub use proof_io::{read_proof, write_proof};
pub use search::{prove, SearchConfig, SearchOutcome};
pub use semantics::{find_countermodel, Bounds, Countermodel, FiniteModel};
pub use transform::{eliminate_all_cuts, invert, Transform, TransformError};
