//! Fixture formulas and traces, and a timing harness for the benchmark
//! suite.

use std::time::Instant;

use crate::error::Result;
use crate::formula::{parse, Formula};
use crate::monitor::{monitor, monitor_baseline, MonitorOptions};
use crate::trace::{GenKind, GenSpec, Trace};

/// Tolerance for "stays at the frozen level".
pub const EPS: f64 = 0.1;
/// Minimum jump between levels.
pub const DELTA: f64 = 1.5;
/// Last start time checked by the pulse property.
pub const PULSE_HORIZON: f64 = 75.0;
/// Last start time checked by the staircase property.
pub const STAIRS_HORIZON: f64 = 65.0;

fn must(src: &str) -> Formula {
    parse(src).expect("fixture formula parses")
}

/// Stabilization around the mean of two frozen event values, with the two
/// events given as formula text.
pub fn phi1_with(e1: &str, e2: &str) -> Formula {
    must(&format!(
        "let e1 = {e1}; let e2 = {e2};
         F (e1 && freeze(s*1). F (e2 && freeze(s*2).
            G[2,inf] (s in [0.8*(s*1+s*2)/2, 1.2*(s*1+s*2)/2])))"
    ))
}

/// Stabilization formula with events matching [`GenKind::Stabilize`].
pub fn phi1() -> Formula {
    phi1_with("s >= 9", "s <= 3")
}

pub fn phi2() -> Formula {
    must(
        "F (s1 > 5 && freeze(s2*1). F (s1 > 10 && freeze(s2*2).
            F ((s2 > s2*1 + s2*2) U s1 < 5)))",
    )
}

/// Every level is left by a jump and later returned to.
pub fn phi3(h: f64) -> Formula {
    must(&format!(
        "G[0,{h}] freeze(s*1). (abs(s*1 - s) <= {EPS} U (abs(s*1 - s) >= {DELTA} &&
            freeze(s*2). (abs(s*2 - s) <= {EPS} U abs(s*1 - s) <= {EPS})))"
    ))
}

/// Every level is followed by two further levels and then returned to.
pub fn phi4(h: f64) -> Formula {
    must(&format!(
        "G[0,{h}] freeze(s*1). (abs(s*1 - s) <= {EPS} U (abs(s*1 - s) >= {DELTA} &&
            freeze(s*2). (abs(s*2 - s) <= {EPS} U (abs(s*2 - s) >= {DELTA} &&
            freeze(s*3). (abs(s*3 - s) <= {EPS} U abs(s*1 - s) <= {EPS})))))"
    ))
}

/// Derivative-based variant of [`phi3`]: after the jump the derivative `s2`
/// must stay near zero until the level returns.
pub fn psi(h: f64) -> Formula {
    must(&format!(
        "G[0,{h}] freeze(s*1). (abs(s*1 - s) <= {EPS} U (abs(s*1 - s) >= {DELTA} &&
            (abs(s2) <= {EPS} U abs(s*1 - s) <= {EPS})))"
    ))
}

/// Stabilization formula on a three-column trace whose second and third
/// columns flag the two events.
pub fn running_formula() -> Formula {
    must(
        "let e1 = s2 >= 1; let e2 = s3 >= 1;
         F (e1 && freeze(s*1). F (e2 && freeze(s*2). G[2,inf] (s <= 0.4 * (s*1 + s*2))))",
    )
}

pub fn running_trace() -> Trace {
    let s = vec![3.0, 5.0, 8.0, 10.0, 14.0, 12.0, 11.0, 6.0, 3.0, 1.0, 7.0];
    let flag = |at: usize| (0..s.len()).map(|i| f64::from(u8::from(i == at))).collect();
    Trace::uniform(1.0, vec![s.clone(), flag(3), flag(6)]).expect("valid fixture")
}

/// Values of `s1 >= 5` true on times `[2,10]` and `[20,35]`, and `s2 <= 0`
/// true on `[7,15]`.
fn interval_fixture(times: Vec<f64>) -> Trace {
    let s1 = times
        .iter()
        .map(|&t| {
            if (2.0..=10.0).contains(&t) || (20.0..=35.0).contains(&t) {
                5.0
            } else {
                0.0
            }
        })
        .collect();
    let s2 = times
        .iter()
        .map(|&t| if (7.0..=15.0).contains(&t) { 0.0 } else { 1.0 })
        .collect();
    Trace::new(times, vec![s1, s2]).expect("valid fixture")
}

/// 100 samples, one per second.
pub fn pi1() -> Trace {
    interval_fixture((0..100).map(f64::from).collect())
}

/// 18 irregular samples up to t=40.
pub fn pi2() -> Trace {
    interval_fixture(vec![
        0.0, 1.0, 2.0, 4.0, 5.0, 7.0, 8.0, 10.0, 11.0, 13.0, 15.0, 17.0, 20.0, 25.0, 27.0, 30.0,
        35.0, 40.0,
    ])
}

/// Stabilization formula on a trace with `s` in `[0, 20]`; its conservative
/// range is `[-20, 29]`.
pub fn robustness_fixture_phi1() -> (Formula, Trace) {
    let s = (0..=100)
        .map(|t| match t {
            20..=21 => 20.0,
            40..=41 => 0.0,
            _ => 10.0,
        })
        .collect();
    let tr = Trace::uniform(1.0, vec![s]).expect("valid fixture");
    (phi1_with("s >= 12", "s <= 29"), tr)
}

/// [`phi2`] on a trace with `s1` in `[0, 44]` and `s2` in `[0, 22]`; its
/// conservative range is `[-44, 39]`.
pub fn robustness_fixture_phi2() -> (Formula, Trace) {
    let s1 = (0..=100)
        .map(|t| {
            let t = f64::from(t);
            if t <= 40.0 {
                44.0 * t / 40.0
            } else if t <= 60.0 {
                44.0
            } else if t <= 80.0 {
                44.0 * (80.0 - t) / 20.0
            } else {
                0.0
            }
        })
        .collect();
    let s2 = (0..=100)
        .map(|t| {
            let p = f64::from(t % 20) / 10.0;
            22.0 * (1.0 - (p - 1.0).abs())
        })
        .collect();
    let tr = Trace::uniform(1.0, vec![s1, s2]).expect("valid fixture");
    (phi2(), tr)
}

/// A benchmark formula with the trace shape it is meant for.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub name: &'static str,
    pub formula: Formula,
    pub kind: GenKind,
}

pub fn suite() -> Vec<Experiment> {
    vec![
        Experiment {
            name: "phi1",
            formula: phi1(),
            kind: GenKind::Stabilize,
        },
        Experiment {
            name: "phi2",
            formula: phi2(),
            kind: GenKind::Crossing,
        },
        Experiment {
            name: "phi3",
            formula: phi3(PULSE_HORIZON),
            kind: GenKind::Pulse,
        },
        Experiment {
            name: "phi4",
            formula: phi4(STAIRS_HORIZON),
            kind: GenKind::Stairs,
        },
    ]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BenchMode {
    Interval,
    Baseline,
}

/// One timed Boolean monitoring run.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub formula: &'static str,
    pub n: usize,
    pub violating: bool,
    pub nonuniform: bool,
    pub mode: BenchMode,
    pub early_stop: bool,
    pub satisfied: bool,
    pub seconds: f64,
    /// Largest interval list over all nodes (interval mode only).
    pub max_intvl: usize,
    pub subupdates: u64,
    pub instantiations: u64,
}

/// Generates the trace for `exp` and times one monitoring run on it.
pub fn run_case(
    exp: &Experiment,
    spec: &GenSpec,
    mode: BenchMode,
    early_stop: bool,
) -> Result<BenchRow> {
    let trace = Trace::generate(&GenSpec {
        kind: exp.kind,
        ..spec.clone()
    })?;
    let start = Instant::now();
    let (satisfied, stats) = match mode {
        BenchMode::Interval => {
            let v = monitor(&exp.formula, &trace, MonitorOptions { early_stop })?;
            (v.satisfied, Some(v.stats))
        }
        BenchMode::Baseline => (monitor_baseline(&exp.formula, &trace)?, None),
    };
    let seconds = start.elapsed().as_secs_f64();
    let stats = stats.unwrap_or_default();
    Ok(BenchRow {
        formula: exp.name,
        n: spec.n,
        violating: spec.violating,
        nonuniform: spec.nonuniform,
        mode,
        early_stop,
        satisfied,
        seconds,
        max_intvl: stats.max_intvl_overall(),
        subupdates: stats.subupdates,
        instantiations: stats.scope_iterations,
    })
}
