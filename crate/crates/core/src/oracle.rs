//! Brute-force reference semantics, evaluated clause by clause with no
//! caching. Exponential in the nesting of temporal operators; meant for short
//! traces.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::formula::{Formula, FreezeVar};
use crate::trace::Trace;

/// Values of freeze variables.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FreezeEnv {
    values: BTreeMap<FreezeVar, f64>,
}

impl FreezeEnv {
    /// Binds every freeze variable of `f` to the first sample of its
    /// dimension.
    pub fn zero(f: &Formula, trace: &Trace) -> FreezeEnv {
        let values = f
            .freeze_vars()
            .into_iter()
            .map(|v| (v, trace.value(0, v.dim)))
            .collect();
        FreezeEnv { values }
    }

    pub fn get(&self, v: FreezeVar) -> f64 {
        self.values.get(&v).copied().unwrap_or(f64::NAN)
    }

    pub fn with(&self, v: FreezeVar, x: f64) -> FreezeEnv {
        let mut e = self.clone();
        e.values.insert(v, x);
        e
    }

    pub fn set(&mut self, v: FreezeVar, x: f64) {
        self.values.insert(v, x);
    }
}

fn check(f: &Formula, trace: &Trace, i: usize) -> Result<()> {
    if trace.is_empty() {
        return Err(Error::EmptyTrace);
    }
    if i >= trace.len() {
        return Err(Error::Index {
            index: i,
            len: trace.len(),
        });
    }
    let d = f.max_dim();
    if d > trace.dims() {
        return Err(Error::Dimension {
            needed: d,
            available: trace.dims(),
        });
    }
    Ok(())
}

/// Whether `(trace, i, env)` satisfies `f`.
pub fn oracle_sat(f: &Formula, trace: &Trace, i: usize, env: &FreezeEnv) -> Result<bool> {
    check(f, trace, i)?;
    Ok(sat(f, trace, i, env))
}

/// Robustness of `f` at `(trace, i, env)`. Empty windows give `-inf` for
/// eventually and until and `+inf` for always.
pub fn oracle_rho(f: &Formula, trace: &Trace, i: usize, env: &FreezeEnv) -> Result<f64> {
    check(f, trace, i)?;
    Ok(rho(f, trace, i, env))
}

fn sat(f: &Formula, tr: &Trace, i: usize, env: &FreezeEnv) -> bool {
    let n = tr.len();
    match f {
        Formula::Atom(a) => a.holds(&|d| tr.value(i, d), &|v| env.get(v)),
        Formula::Not(g) => !sat(g, tr, i, env),
        Formula::And(a, b) => sat(a, tr, i, env) && sat(b, tr, i, env),
        Formula::Or(a, b) => sat(a, tr, i, env) || sat(b, tr, i, env),
        Formula::Always(w, g) => {
            (i..n).all(|j| !w.contains(tr.time(i), tr.time(j)) || sat(g, tr, j, env))
        }
        Formula::Eventually(w, g) => {
            (i..n).any(|j| w.contains(tr.time(i), tr.time(j)) && sat(g, tr, j, env))
        }
        Formula::Until(w, a, b) => (i..n).any(|j| {
            w.contains(tr.time(i), tr.time(j))
                && sat(b, tr, j, env)
                && (i..j).all(|k| sat(a, tr, k, env))
        }),
        Formula::Freeze(v, g) => sat(g, tr, i, &env.with(*v, tr.value(i, v.dim))),
    }
}

fn rho(f: &Formula, tr: &Trace, i: usize, env: &FreezeEnv) -> f64 {
    let n = tr.len();
    match f {
        Formula::Atom(a) => a.robustness(&|d| tr.value(i, d), &|v| env.get(v)),
        Formula::Not(g) => -rho(g, tr, i, env),
        Formula::And(a, b) => rho(a, tr, i, env).min(rho(b, tr, i, env)),
        Formula::Or(a, b) => rho(a, tr, i, env).max(rho(b, tr, i, env)),
        Formula::Always(w, g) => (i..n)
            .filter(|&j| w.contains(tr.time(i), tr.time(j)))
            .map(|j| rho(g, tr, j, env))
            .fold(f64::INFINITY, f64::min),
        Formula::Eventually(w, g) => (i..n)
            .filter(|&j| w.contains(tr.time(i), tr.time(j)))
            .map(|j| rho(g, tr, j, env))
            .fold(f64::NEG_INFINITY, f64::max),
        Formula::Until(w, a, b) => (i..n)
            .filter(|&j| w.contains(tr.time(i), tr.time(j)))
            .map(|j| {
                let prefix = (i..j)
                    .map(|k| rho(a, tr, k, env))
                    .fold(f64::INFINITY, f64::min);
                rho(b, tr, j, env).min(prefix)
            })
            .fold(f64::NEG_INFINITY, f64::max),
        Formula::Freeze(v, g) => rho(g, tr, i, &env.with(*v, tr.value(i, v.dim))),
    }
}
