//! Shared inputs for the criterion benchmarks.

use stlstar::experiments::Experiment;
use stlstar::{GenSpec, Trace};

/// Generated trace of length `n` shaped for `exp`.
pub fn trace_for(exp: &Experiment, n: usize, violating: bool) -> Trace {
    let spec = GenSpec {
        violating,
        ..GenSpec::new(exp.kind, n)
    };
    Trace::generate(&spec).expect("generated trace is valid")
}
