//! Golden and seeded-fault cases.

mod golden;
mod io;
mod programs;
mod seed;

pub use golden::{
    motivating_example, Expectations, ExpectedOrdering, ExpectedValue, GoldenCase, Provenance,
    MOTIVATING_FIXED_SOURCE, MOTIVATING_SOURCE,
};
pub use io::{
    generate_corpus, golden_case, load_case, load_corpus, write_case, write_corpus, CorpusCase,
};
pub use programs::{BaseProgram, BASE_PROGRAMS};
pub use seed::{
    chain_ground_truth, generate_suite, mutants, seed_faults, Fault, FaultBundle, MutationKind,
    SCREEN_STEP_LIMIT,
};
