//! Offline monitoring of STL* (signal temporal logic with value freezing)
//! over finite sampled traces: Boolean verdicts through interval lists, and
//! robustness estimates through binary search over threshold-shifted
//! formulas, together with pointwise baselines and brute-force oracles.

pub mod constraint;
mod error;
pub mod experiments;
pub mod formula;
pub mod interval;
pub mod monitor;
pub mod oracle;
pub mod robustness;
pub mod trace;

pub use constraint::{ConstraintIndex, IncrementalRuns, TruthRegion};
pub use error::{Error, Result};
pub use formula::{
    negation_normal_form, parse, threshold_transform, Atom, Cmp, Expr, Formula, FreezeVar,
    NodeKind, Range, SyntaxTree, Window,
};
pub use interval::{IntervalList, PointVector};
pub use monitor::{
    monitor, monitor_baseline, monitor_observed, MonitorOptions, MonitorStats, Snapshot, Verdict,
};
pub use oracle::{oracle_rho, oracle_sat, FreezeEnv};
pub use robustness::{
    conservative_range, robustness, robustness_baseline, robustness_with_range, RangeMode,
    RobustnessEstimate, RobustnessMode,
};
pub use trace::{GenKind, GenSpec, Trace};
