//! Quantitative robustness: a conservative range, binary search over
//! threshold-shifted Boolean monitors, and a direct dynamic-programming
//! baseline.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::formula::{negation_normal_form, threshold_transform, Atom, Formula, FreezeVar, Range};
use crate::monitor::{check_dims, monitor, monitor_baseline, windows, MonitorOptions};
use crate::trace::Trace;

/// How frozen values are bounded in [`conservative_range`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RangeMode {
    /// Enumerate every admissible instantiation of the frozen values an atom
    /// uses.
    #[default]
    Exact,
    /// Bound each frozen value by its dimension's extrema independently.
    PerVariable,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RobustnessMode {
    /// Binary search with the interval monitor.
    #[default]
    Interval,
    /// Binary search with the pointwise baseline monitor.
    BaselineSearch,
    /// Direct computation by the dynamic-programming baseline.
    Baseline,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RobustnessEstimate {
    pub lo: f64,
    pub hi: f64,
    pub estimate: f64,
    pub epsilon: f64,
    /// Boolean monitor invocations.
    pub n_calls: u32,
    /// Range the search started from.
    pub initial: Range,
    pub mode: RobustnessMode,
}

/// Range containing the robustness of every atom of `f` at every index under
/// every admissible environment. Negations flip the range.
pub fn conservative_range(f: &Formula, trace: &Trace, mode: RangeMode) -> Result<Range> {
    check_dims(f, trace)?;
    let r = range_of(f, trace, mode, &mut Vec::new());
    if r.lo.is_finite() && r.hi.is_finite() {
        Ok(r)
    } else {
        Err(Error::UnboundedRange)
    }
}

fn range_of(f: &Formula, tr: &Trace, mode: RangeMode, chain: &mut Vec<FreezeVar>) -> Range {
    match f {
        Formula::Atom(a) => atom_range(a, tr, mode, chain),
        Formula::Not(g) => {
            let r = range_of(g, tr, mode, chain);
            Range {
                lo: -r.hi,
                hi: -r.lo,
            }
        }
        Formula::Freeze(v, g) => {
            chain.push(*v);
            let r = range_of(g, tr, mode, chain);
            chain.pop();
            r
        }
        _ => f
            .children()
            .into_iter()
            .map(|g| range_of(g, tr, mode, chain))
            .reduce(Range::hull)
            .unwrap(),
    }
}

fn dim_range(tr: &Trace, dim: usize) -> Range {
    tr.column(dim).iter().fold(
        Range {
            lo: f64::INFINITY,
            hi: f64::NEG_INFINITY,
        },
        |r, &x| r.hull(Range::point(x)),
    )
}

fn atom_range(a: &Atom, tr: &Trace, mode: RangeMode, chain: &[FreezeVar]) -> Range {
    let n = tr.len();
    let sig = |d: usize| dim_range(tr, d);
    let signed = |l: Range, r: Range| {
        if a.cmp.is_greater() {
            Range {
                lo: l.lo - r.hi,
                hi: l.hi - r.lo,
            }
        } else {
            Range {
                lo: r.lo - l.hi,
                hi: r.hi - l.lo,
            }
        }
    };
    let lhs_exact = (!a.lhs.has_frozen()).then(|| {
        (0..n)
            .map(|i| Range::point(a.lhs.eval(&|d| tr.value(i, d), &|_| 0.0)))
            .reduce(Range::hull)
            .unwrap()
    });
    let under = |z: &dyn Fn(FreezeVar) -> Range| {
        let l = lhs_exact.unwrap_or_else(|| a.lhs.eval_range(&sig, z));
        signed(l, a.rhs.eval_range(&sig, z))
    };
    let used = a.frozen_vars();
    let fixed = |v: FreezeVar| Range::point(tr.value(0, v.dim));
    match mode {
        RangeMode::PerVariable => under(&|v| {
            if chain.contains(&v) {
                dim_range(tr, v.dim)
            } else {
                fixed(v)
            }
        }),
        RangeMode::Exact => {
            let bound: Vec<FreezeVar> =
                chain.iter().copied().filter(|v| used.contains(v)).collect();
            let mut acc: Option<Range> = None;
            let mut vals = vec![0.0; bound.len()];
            enumerate(tr, &bound, 0, 0, &mut vals, &mut |vals| {
                let r = under(&|v| match bound.iter().rposition(|w| *w == v) {
                    Some(p) => Range::point(vals[p]),
                    None => fixed(v),
                });
                acc = Some(acc.map_or(r, |x| x.hull(r)));
            });
            acc.unwrap()
        }
    }
}

/// Calls `visit` with the values of `vars` at every non-decreasing tuple of
/// trace indices.
fn enumerate(
    tr: &Trace,
    vars: &[FreezeVar],
    depth: usize,
    from: usize,
    vals: &mut [f64],
    visit: &mut dyn FnMut(&[f64]),
) {
    if depth == vars.len() {
        visit(vals);
        return;
    }
    for i in from..tr.len() {
        vals[depth] = tr.value(i, vars[depth].dim);
        enumerate(tr, vars, depth + 1, i, vals, visit);
    }
}

/// Robustness of `f` at `(trace, 0, zeroenv)` to within `epsilon`.
pub fn robustness(
    f: &Formula,
    trace: &Trace,
    epsilon: f64,
    mode: RobustnessMode,
) -> Result<RobustnessEstimate> {
    robustness_with_range(f, trace, epsilon, mode, RangeMode::Exact)
}

/// As [`robustness`], choosing how the initial range is bounded.
pub fn robustness_with_range(
    f: &Formula,
    trace: &Trace,
    epsilon: f64,
    mode: RobustnessMode,
    range_mode: RangeMode,
) -> Result<RobustnessEstimate> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::Epsilon(epsilon));
    }
    let g = negation_normal_form(f);
    let initial = conservative_range(&g, trace, range_mode)?;
    if mode == RobustnessMode::Baseline {
        let rho = robustness_baseline(f, trace)?.clamp(initial.lo, initial.hi);
        return Ok(RobustnessEstimate {
            lo: rho,
            hi: rho,
            estimate: rho,
            epsilon,
            n_calls: 0,
            initial,
            mode,
        });
    }
    let (mut lo, mut hi) = (initial.lo, initial.hi);
    let mut n_calls = 0;
    while hi - lo > epsilon {
        let r = lo + (hi - lo) / 2.0;
        let h = threshold_transform(&g, r)?;
        let holds = match mode {
            RobustnessMode::Interval => monitor(&h, trace, MonitorOptions::default())?.satisfied,
            _ => monitor_baseline(&h, trace)?,
        };
        n_calls += 1;
        if holds {
            lo = r;
        } else {
            hi = r;
        }
    }
    Ok(RobustnessEstimate {
        lo,
        hi,
        estimate: lo + (hi - lo) / 2.0,
        epsilon,
        n_calls,
        initial,
        mode,
    })
}

/// Exact robustness of `f` at `(trace, 0, zeroenv)`. Empty windows give
/// `-inf` for eventually and until and `+inf` for always.
pub fn robustness_baseline(f: &Formula, trace: &Trace) -> Result<f64> {
    check_dims(f, trace)?;
    let env: Vec<(FreezeVar, f64)> = f
        .freeze_vars()
        .into_iter()
        .map(|v| (v, trace.value(0, v.dim)))
        .collect();
    Ok(rho(f, trace, &env, 0)[0])
}

/// Sliding maximum of `values` over half-open windows whose ends never
/// decrease. An empty window gives `-inf`.
pub fn sliding_max(values: &[f64], windows: &[(usize, usize)]) -> Vec<f64> {
    sliding(values, windows, |a, b| a >= b, f64::NEG_INFINITY)
}

/// Sliding minimum, as [`sliding_max`]. An empty window gives `+inf`.
pub fn sliding_min(values: &[f64], windows: &[(usize, usize)]) -> Vec<f64> {
    sliding(values, windows, |a, b| a <= b, f64::INFINITY)
}

fn sliding(
    values: &[f64],
    windows: &[(usize, usize)],
    dominates: impl Fn(f64, f64) -> bool,
    empty: f64,
) -> Vec<f64> {
    let mut dq: VecDeque<usize> = VecDeque::new();
    let mut next = 0;
    windows
        .iter()
        .map(|&(lo, hi)| {
            next = next.max(lo);
            while next < hi {
                while dq
                    .back()
                    .is_some_and(|&b| dominates(values[next], values[b]))
                {
                    dq.pop_back();
                }
                dq.push_back(next);
                next += 1;
            }
            while dq.front().is_some_and(|&f| f < lo) {
                dq.pop_front();
            }
            dq.front().map_or(empty, |&f| values[f])
        })
        .collect()
}

fn env_get(env: &[(FreezeVar, f64)], v: FreezeVar) -> f64 {
    env.iter()
        .rev()
        .find(|(w, _)| *w == v)
        .map(|&(_, x)| x)
        .unwrap()
}

fn shift(w: &[(usize, usize)], k: usize) -> Vec<(usize, usize)> {
    w.iter().map(|&(lo, hi)| (lo - k, hi - k)).collect()
}

/// Robustness values at indices `k..n`, stored at offset `i - k`.
fn rho(f: &Formula, tr: &Trace, env: &[(FreezeVar, f64)], k: usize) -> Vec<f64> {
    let n = tr.len();
    match f {
        Formula::Atom(a) => (k..n)
            .map(|i| a.robustness(&|d| tr.value(i, d), &|v| env_get(env, v)))
            .collect(),
        Formula::Not(g) => rho(g, tr, env, k).into_iter().map(|x| -x).collect(),
        Formula::And(a, b) => {
            let (x, y) = (rho(a, tr, env, k), rho(b, tr, env, k));
            x.iter().zip(&y).map(|(p, q)| p.min(*q)).collect()
        }
        Formula::Or(a, b) => {
            let (x, y) = (rho(a, tr, env, k), rho(b, tr, env, k));
            x.iter().zip(&y).map(|(p, q)| p.max(*q)).collect()
        }
        Formula::Eventually(w, g) => {
            sliding_max(&rho(g, tr, env, k), &shift(&windows(tr, w, k), k))
        }
        Formula::Always(w, g) => sliding_min(&rho(g, tr, env, k), &shift(&windows(tr, w, k), k)),
        Formula::Until(w, a, b) => {
            let x = rho(a, tr, env, k);
            let y = rho(b, tr, env, k);
            let win = shift(&windows(tr, w, k), k);
            let m = x.len();
            if w.is_unbounded() {
                let mut u = vec![f64::NEG_INFINITY; m + 1];
                for o in (0..m).rev() {
                    u[o] = y[o].max(x[o].min(u[o + 1]));
                }
                let prefix: Vec<(usize, usize)> = win
                    .iter()
                    .enumerate()
                    .map(|(o, &(lo, _))| (o, lo))
                    .collect();
                let pm = sliding_min(&x, &prefix);
                win.iter()
                    .zip(pm)
                    .map(|(&(lo, _), p)| {
                        if lo >= m {
                            f64::NEG_INFINITY
                        } else {
                            p.min(u[lo])
                        }
                    })
                    .collect()
            } else {
                win.iter()
                    .enumerate()
                    .map(|(o, &(lo, hi))| {
                        let mut run = f64::INFINITY;
                        let mut best = f64::NEG_INFINITY;
                        for j in o..hi {
                            if j >= lo {
                                best = best.max(y[j].min(run));
                            }
                            run = run.min(x[j]);
                        }
                        best
                    })
                    .collect()
            }
        }
        Formula::Freeze(v, g) => (k..n)
            .map(|i| {
                let mut e = env.to_vec();
                e.push((*v, tr.value(i, v.dim)));
                rho(g, tr, &e, i)[0]
            })
            .collect(),
    }
}
