//! Boolean monitoring: the interval monitor driven by the freeze-scope tree,
//! and a per-environment pointwise baseline.

use crate::constraint::{ConstraintIndex, ConstraintState};
use crate::error::{Error, Result};
use crate::formula::{Formula, FreezeVar, NodeKind, SyntaxTree, Window};
use crate::interval::{self, IntervalList};
use crate::trace::Trace;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MonitorOptions {
    /// Stop the outermost `G`/`F` loop at the first decisive instantiation.
    pub early_stop: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MonitorStats {
    /// Positions toggled in constraint interval lists.
    pub subupdates: u64,
    /// Full rebuilds of constraint interval lists.
    pub rebuilds: u64,
    /// Instantiations processed across all freeze scopes.
    pub scope_iterations: u64,
    /// Instantiations of innermost freeze scopes.
    pub leaf_instantiations: u64,
    /// Instantiations of freeze scopes directly below the top scope.
    pub outer_iterations: u64,
    /// Largest number of runs seen in each node's interval list.
    pub max_intvl: Vec<usize>,
}

impl MonitorStats {
    pub fn max_intvl_overall(&self) -> usize {
        self.max_intvl.iter().copied().max().unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub satisfied: bool,
    pub stats: MonitorStats,
}

/// State visible to an observer after each instantiation.
pub struct Snapshot<'a> {
    /// Freeze scope just instantiated.
    pub scope: usize,
    /// Trace index bound to the scope's variable.
    pub index: usize,
    /// Current interval list of every node.
    pub intvl: &'a [IntervalList],
    /// Current flip position of every half-line or band constraint node.
    pub flips: &'a [Option<usize>],
    /// Instantiation verdicts of every freeze node, indexed by trace index.
    pub points: &'a [Vec<bool>],
}

/// Whether `(trace, 0, zeroenv)` satisfies `f`, by the interval monitor.
pub fn monitor(f: &Formula, trace: &Trace, opts: MonitorOptions) -> Result<Verdict> {
    monitor_observed(f, trace, opts, &mut |_| {})
}

/// As [`monitor`], calling `observe` after every instantiation.
pub fn monitor_observed(
    f: &Formula,
    trace: &Trace,
    opts: MonitorOptions,
    observe: &mut dyn FnMut(&Snapshot),
) -> Result<Verdict> {
    check_dims(f, trace)?;
    let tree = SyntaxTree::build(f);
    let mut run = Run::new(&tree, trace, observe);
    let satisfied = match early_stop_plan(&tree) {
        Some(plan) if opts.early_stop => run.early(plan),
        _ => run.full(),
    };
    let mut stats = run.stats;
    for c in run.constraints.iter().flatten() {
        stats.subupdates += c.1.runs.subupdates;
        stats.rebuilds += c.1.runs.rebuilds;
    }
    Ok(Verdict { satisfied, stats })
}

pub(crate) fn check_dims(f: &Formula, trace: &Trace) -> Result<()> {
    if trace.is_empty() {
        return Err(Error::EmptyTrace);
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

fn lookup(tree: &SyntaxTree, trace: &Trace, env: &[f64], scope: usize, v: FreezeVar) -> f64 {
    match tree.scopes[scope].binder_of(v) {
        Some(s) => env[s],
        None => trace.value(0, v.dim),
    }
}

struct Run<'a> {
    tree: &'a SyntaxTree,
    trace: &'a Trace,
    n: usize,
    intvl: Vec<IntervalList>,
    points: Vec<Vec<bool>>,
    constraints: Vec<Option<(ConstraintIndex, ConstraintState)>>,
    flips: Vec<Option<usize>>,
    env: Vec<f64>,
    stats: MonitorStats,
    observe: &'a mut dyn FnMut(&Snapshot),
}

impl<'a> Run<'a> {
    fn new(
        tree: &'a SyntaxTree,
        trace: &'a Trace,
        observe: &'a mut dyn FnMut(&Snapshot),
    ) -> Run<'a> {
        let n = trace.len();
        let m = tree.len();
        let mut intvl = vec![IntervalList::empty(); m];
        let mut points = vec![Vec::new(); m];
        let mut constraints = Vec::with_capacity(m);
        for (id, node) in tree.nodes.iter().enumerate() {
            let mut c = None;
            match &node.kind {
                NodeKind::Atom(a) if a.is_constraint() && node.scope != 0 => {
                    c = Some((ConstraintIndex::build(a, trace), ConstraintState::new(n)));
                }
                NodeKind::Atom(a) => {
                    let truth: Vec<bool> = (0..n)
                        .map(|i| a.holds(&|d| trace.value(i, d), &|v| trace.value(0, v.dim)))
                        .collect();
                    intvl[id] = interval::transform(&truth, 0);
                }
                NodeKind::Freeze(_) => points[id] = vec![false; n],
                _ => {}
            }
            constraints.push(c);
        }
        let mut stats = MonitorStats {
            max_intvl: vec![0; m],
            ..MonitorStats::default()
        };
        for (id, l) in intvl.iter().enumerate() {
            stats.max_intvl[id] = l.len();
        }
        Run {
            tree,
            trace,
            n,
            intvl,
            points,
            constraints,
            flips: vec![None; m],
            env: vec![0.0; tree.scopes.len()],
            stats,
            observe,
        }
    }

    fn full(&mut self) -> bool {
        for c in self.tree.scopes[0].children.clone() {
            self.rec(c, 0);
        }
        self.eval_scope(0, 0);
        self.intvl[0].contains(0)
    }

    fn rec(&mut self, s: usize, t: usize) {
        for i in t..self.n {
            self.instantiate(s, i, i == t);
        }
        let p = self.tree.scopes[s].parent.unwrap();
        self.intvl[p] = interval::transform(&self.points[p], t);
        self.note(p);
    }

    fn instantiate(&mut self, s: usize, i: usize, first: bool) {
        let tree = self.tree;
        let scope = &tree.scopes[s];
        self.env[s] = self.trace.value(i, scope.var.unwrap().dim);
        self.stats.scope_iterations += 1;
        if scope.children.is_empty() {
            self.stats.leaf_instantiations += 1;
        }
        if scope.enclosing == Some(0) {
            self.stats.outer_iterations += 1;
        }
        for &m in &scope.members {
            if let Some((idx, st)) = self.constraints[m].as_mut() {
                let (trace, env) = (self.trace, &self.env);
                let f = |v: FreezeVar| lookup(tree, trace, env, s, v);
                self.intvl[m] = if first {
                    idx.init(st, trace, &f, i)
                } else {
                    idx.update(st, trace, &f, i)
                };
                self.flips[m] = st.flip();
                self.note(m);
            }
        }
        for &c in &scope.children {
            self.rec(c, i);
        }
        self.eval_scope(s, i);
        let p = scope.parent.unwrap();
        self.points[p][i] = self.intvl[scope.root].contains(i);
        (self.observe)(&Snapshot {
            scope: s,
            index: i,
            intvl: &self.intvl,
            flips: &self.flips,
            points: &self.points,
        });
    }

    /// Evaluates the operator nodes of scope `s` from index `k` on, children
    /// before parents.
    fn eval_scope(&mut self, s: usize, k: usize) {
        let tree = self.tree;
        for &m in tree.scopes[s].members.iter().rev() {
            let node = &tree.nodes[m];
            let c = &node.children;
            let (tr, n) = (self.trace, self.n);
            let l = match &node.kind {
                NodeKind::Atom(_) | NodeKind::Freeze(_) => continue,
                NodeKind::Not => interval::complement(&self.intvl[c[0]], k, n),
                NodeKind::And => interval::and(&self.intvl[c[0]], &self.intvl[c[1]]).clip_from(k),
                NodeKind::Or => interval::or(&self.intvl[c[0]], &self.intvl[c[1]]).clip_from(k),
                NodeKind::Always(w) => interval::always(&self.intvl[c[0]], w, tr, k),
                NodeKind::Eventually(w) => interval::eventually(&self.intvl[c[0]], w, tr, k),
                NodeKind::Until(w) => {
                    interval::until(&self.intvl[c[0]], &self.intvl[c[1]], w, tr, k)
                }
            };
            self.intvl[m] = l;
            self.note(m);
        }
    }

    fn note(&mut self, m: usize) {
        let len = self.intvl[m].len();
        if len > self.stats.max_intvl[m] {
            self.stats.max_intvl[m] = len;
        }
    }

    fn early(&mut self, plan: EarlyStop) -> bool {
        let t0 = self.trace.time(0);
        let mut first = true;
        for i in 0..self.n {
            let t = self.trace.time(i);
            if t < t0 + plan.window.a {
                continue;
            }
            if t > t0 + plan.window.b {
                break;
            }
            self.instantiate(plan.scope, i, first);
            first = false;
            let b = self.pointwise(1, i);
            if b != plan.always {
                return b;
            }
        }
        plan.always
    }

    /// Truth at index `i` of a Boolean combination of top-scope atoms and
    /// instantiated freeze nodes.
    fn pointwise(&self, id: usize, i: usize) -> bool {
        let node = &self.tree.nodes[id];
        match &node.kind {
            NodeKind::Atom(_) => self.intvl[id].contains(i),
            NodeKind::Freeze(_) => self.points[id][i],
            NodeKind::Not => !self.pointwise(node.children[0], i),
            NodeKind::And => {
                self.pointwise(node.children[0], i) && self.pointwise(node.children[1], i)
            }
            NodeKind::Or => {
                self.pointwise(node.children[0], i) || self.pointwise(node.children[1], i)
            }
            _ => unreachable!("temporal operator below an early-stop root"),
        }
    }
}

struct EarlyStop {
    always: bool,
    window: Window,
    scope: usize,
}

/// Early stop applies when the root is `G` or `F` and its body combines
/// top-scope atoms and exactly one freeze with Boolean connectives.
fn early_stop_plan(tree: &SyntaxTree) -> Option<EarlyStop> {
    let (always, window) = match tree.nodes[0].kind {
        NodeKind::Always(w) => (true, w),
        NodeKind::Eventually(w) => (false, w),
        _ => return None,
    };
    let top = tree.top();
    if top.children.len() != 1 {
        return None;
    }
    let ok = top.members[1..].iter().all(|&m| {
        matches!(
            tree.nodes[m].kind,
            NodeKind::Atom(_) | NodeKind::Not | NodeKind::And | NodeKind::Or | NodeKind::Freeze(_)
        )
    });
    ok.then_some(EarlyStop {
        always,
        window,
        scope: top.children[0],
    })
}

/// Half-open index windows `[lo, hi)` of `t_i + w` for every `i >= k`.
pub(crate) fn windows(tr: &Trace, w: &Window, k: usize) -> Vec<(usize, usize)> {
    let n = tr.len();
    let mut out = Vec::with_capacity(n.saturating_sub(k));
    let (mut lo, mut hi) = (k, k);
    for i in k..n {
        let t = tr.time(i);
        lo = lo.max(i);
        while lo < n && tr.time(lo) < t + w.a {
            lo += 1;
        }
        hi = hi.max(lo);
        while hi < n && tr.time(hi) <= t + w.b {
            hi += 1;
        }
        out.push((lo, hi));
    }
    out
}

/// Whether `(trace, 0, zeroenv)` satisfies `f`, by pointwise dynamic
/// programming with one pass per environment.
pub fn monitor_baseline(f: &Formula, trace: &Trace) -> Result<bool> {
    check_dims(f, trace)?;
    let env: Vec<(FreezeVar, f64)> = f
        .freeze_vars()
        .into_iter()
        .map(|v| (v, trace.value(0, v.dim)))
        .collect();
    Ok(pointwise(f, trace, &env, 0)[0])
}

fn env_get(env: &[(FreezeVar, f64)], v: FreezeVar) -> f64 {
    env.iter()
        .rev()
        .find(|(w, _)| *w == v)
        .map(|&(_, x)| x)
        .unwrap()
}

/// Truth values at indices `k..n`, stored at offset `i - k`.
fn pointwise(f: &Formula, tr: &Trace, env: &[(FreezeVar, f64)], k: usize) -> Vec<bool> {
    let n = tr.len();
    match f {
        Formula::Atom(a) => (k..n)
            .map(|i| a.holds(&|d| tr.value(i, d), &|v| env_get(env, v)))
            .collect(),
        Formula::Not(g) => pointwise(g, tr, env, k).into_iter().map(|b| !b).collect(),
        Formula::And(a, b) => {
            let (x, y) = (pointwise(a, tr, env, k), pointwise(b, tr, env, k));
            x.iter().zip(&y).map(|(p, q)| *p && *q).collect()
        }
        Formula::Or(a, b) => {
            let (x, y) = (pointwise(a, tr, env, k), pointwise(b, tr, env, k));
            x.iter().zip(&y).map(|(p, q)| *p || *q).collect()
        }
        Formula::Eventually(w, g) => {
            let c = prefix_counts(&pointwise(g, tr, env, k), true);
            windows(tr, w, k)
                .into_iter()
                .map(|(lo, hi)| lo < hi && c[hi - k] > c[lo - k])
                .collect()
        }
        Formula::Always(w, g) => {
            let c = prefix_counts(&pointwise(g, tr, env, k), false);
            windows(tr, w, k)
                .into_iter()
                .map(|(lo, hi)| lo >= hi || c[hi - k] == c[lo - k])
                .collect()
        }
        Formula::Until(w, a, b) => {
            let x = pointwise(a, tr, env, k);
            let c = prefix_counts(&pointwise(b, tr, env, k), true);
            let mut next_false = vec![n; n - k + 1];
            for i in (k..n).rev() {
                next_false[i - k] = if x[i - k] { next_false[i - k + 1] } else { i };
            }
            windows(tr, w, k)
                .into_iter()
                .enumerate()
                .map(|(o, (lo, hi))| {
                    let hi = hi.min(next_false[o] + 1);
                    lo < hi && c[hi - k] > c[lo - k]
                })
                .collect()
        }
        Formula::Freeze(v, g) => (k..n)
            .map(|i| {
                let mut e = env.to_vec();
                e.push((*v, tr.value(i, v.dim)));
                pointwise(g, tr, &e, i)[0]
            })
            .collect(),
    }
}

fn prefix_counts(v: &[bool], value: bool) -> Vec<u32> {
    let mut c = Vec::with_capacity(v.len() + 1);
    c.push(0);
    let mut acc = 0;
    for &b in v {
        acc += u32::from(b == value);
        c.push(acc);
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::oracle::{oracle_sat, FreezeEnv};

    fn running() -> (Formula, Trace) {
        let s = vec![3.0, 5.0, 8.0, 10.0, 14.0, 12.0, 11.0, 6.0, 3.0, 1.0, 7.0];
        let e1 = (0..11).map(|i| if i == 3 { 1.0 } else { 0.0 }).collect();
        let e2 = (0..11).map(|i| if i == 6 { 1.0 } else { 0.0 }).collect();
        let tr = Trace::uniform(1.0, vec![s, e1, e2]).unwrap();
        let f = parse(
            "let e1 = s2 >= 1; let e2 = s3 >= 1;
             F (e1 && freeze(s*1). F (e2 && freeze(s*2). G[2,inf] (s <= 0.4 * (s*1 + s*2))))",
        )
        .unwrap();
        (f, tr)
    }

    #[test]
    fn running_example_agrees_with_oracle() {
        let (f, tr) = running();
        let want = oracle_sat(&f, &tr, 0, &FreezeEnv::zero(&f, &tr)).unwrap();
        for early_stop in [false, true] {
            let v = monitor(&f, &tr, MonitorOptions { early_stop }).unwrap();
            assert_eq!(v.satisfied, want);
        }
        assert_eq!(monitor_baseline(&f, &tr).unwrap(), want);
    }

    #[test]
    fn running_example_first_instantiations() {
        let (f, tr) = running();
        let mut seen = Vec::new();
        monitor_observed(&f, &tr, MonitorOptions::default(), &mut |s| {
            if s.scope == 2 && seen.len() < 2 {
                seen.push((
                    s.index,
                    s.flips[9],
                    s.intvl[9].clone(),
                    s.points[7][s.index],
                ));
            }
        })
        .unwrap();
        assert_eq!(seen[0].1, Some(1));
        assert_eq!(seen[0].2.runs(), &[(9, 9)]);
        assert!(!seen[0].3);
        assert_eq!(seen[1].1, Some(3));
        assert_eq!(seen[1].2.runs(), &[(8, 9)]);
    }

    #[test]
    fn instantiation_count_two_levels() {
        let f = parse("freeze(s*1). F freeze(s*2). s >= s*1 + s*2").unwrap();
        let tr = Trace::uniform(1.0, vec![(0..10).map(f64::from).collect()]).unwrap();
        let v = monitor(&f, &tr, MonitorOptions::default()).unwrap();
        assert_eq!(v.stats.leaf_instantiations, 55);
    }

    #[test]
    fn early_stop_on_violated_always() {
        let f = parse("G (freeze(s*1). F[1,2] s > s*1)").unwrap();
        let tr = Trace::uniform(1.0, vec![vec![5.0, 1.0, 0.0, 2.0, 3.0]]).unwrap();
        let v = monitor(&f, &tr, MonitorOptions { early_stop: true }).unwrap();
        assert!(!v.satisfied);
        assert_eq!(v.stats.outer_iterations, 1);
        assert!(
            !monitor(&f, &tr, MonitorOptions::default())
                .unwrap()
                .satisfied
        );
    }

    #[test]
    fn dimension_checked() {
        let f = parse("s3 > 0").unwrap();
        let tr = Trace::uniform(1.0, vec![vec![0.0]]).unwrap();
        assert!(matches!(
            monitor(&f, &tr, MonitorOptions::default()),
            Err(Error::Dimension {
                needed: 3,
                available: 1
            })
        ));
    }

    #[test]
    fn windows_are_monotone() {
        let tr = Trace::new(vec![0.0, 1.0, 5.0, 6.0], vec![vec![0.0; 4]]).unwrap();
        let w = windows(&tr, &Window::new(3.0, 4.0), 0);
        assert_eq!(w, vec![(2, 2), (2, 3), (4, 4), (4, 4)]);
    }
}
