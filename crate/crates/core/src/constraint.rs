//! Incremental evaluation of signal constraints under a moving freeze
//! environment: values of the signal part sorted once per trace, a truth
//! region located by binary search per instantiation, and interval lists
//! patched position by position.

use std::collections::HashMap;

use crate::formula::{Atom, Expr, FreezeVar};
use crate::interval::{self, IntervalList, PointVector};
use crate::trace::Trace;

/// How truth varies along the sorted order of the key values.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    /// `lhs` is monotone in the key: truth is a prefix or a suffix.
    HalfLine,
    /// `lhs` is the absolute value of something monotone in the key: truth
    /// (or falsity) is a contiguous block.
    Band,
    /// No usable structure; truth is evaluated at every position.
    Generic,
}

/// Sorted positions `[lo, hi)` where truth equals `inside`; truth is
/// `!inside` everywhere else.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TruthRegion {
    pub lo: usize,
    pub hi: usize,
    pub inside: bool,
}

impl TruthRegion {
    #[inline]
    pub fn truth(&self, pos: usize) -> bool {
        self.inside == (self.lo <= pos && pos < self.hi)
    }

    /// Sorted position where truth switches: the end of a true prefix, or
    /// the start of the block otherwise.
    pub fn flip(&self) -> usize {
        if self.inside && self.lo == 0 {
            self.hi
        } else {
            self.lo
        }
    }

    /// Sorted positions whose truth differs between `self` and `other`, as
    /// up to two half-open ranges.
    fn diff(&self, other: &TruthRegion) -> [(usize, usize); 2] {
        debug_assert_eq!(self.inside, other.inside);
        let mut e = [self.lo, self.hi, other.lo, other.hi];
        e.sort_unstable();
        [(e[0], e[1]), (e[2], e[3])]
    }
}

/// A signal constraint with its sorted key values.
#[derive(Clone, Debug)]
pub struct ConstraintIndex {
    atom: Atom,
    shape: Shape,
    /// Inner expression of a band (`lhs = abs(inner)`).
    inner: Option<Expr>,
    /// Whether a half-line is true on a prefix of the sorted order.
    prefix: bool,
    values: Vec<f64>,
    order: Vec<usize>,
    rank: Vec<usize>,
}

impl ConstraintIndex {
    /// Sorts the key values of `atom` over the trace (stable on ties).
    pub fn build(atom: &Atom, trace: &Trace) -> ConstraintIndex {
        let n = trace.len();
        let (shape, key, inner, increasing) = classify(atom);
        let prefix = increasing != atom.cmp.is_greater();
        let key = key.unwrap_or(Expr::Const(0.0));
        let keys: Vec<f64> = (0..n)
            .map(|i| key.eval(&|d| trace.value(i, d), &|_| 0.0))
            .collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&x, &y| keys[x].total_cmp(&keys[y]));
        let mut rank = vec![0; n];
        for (p, &l) in order.iter().enumerate() {
            rank[l] = p;
        }
        let values = order.iter().map(|&l| keys[l]).collect();
        ConstraintIndex {
            atom: atom.clone(),
            shape,
            inner,
            prefix,
            values,
            order,
            rank,
        }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn atom(&self) -> &Atom {
        &self.atom
    }

    /// Key values in ascending order.
    pub fn sorted_values(&self) -> &[f64] {
        &self.values
    }

    /// Trace position of each sorted entry.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Sorted position of each trace position.
    pub fn rank(&self) -> &[usize] {
        &self.rank
    }

    fn truth_at(&self, trace: &Trace, env: &dyn Fn(FreezeVar) -> f64, l: usize) -> bool {
        self.atom.holds(&|d| trace.value(l, d), env)
    }

    /// Truth region under `env`, or `None` for generic constraints.
    pub fn region(&self, trace: &Trace, env: &dyn Fn(FreezeVar) -> f64) -> Option<TruthRegion> {
        let n = self.order.len();
        let truth = |p: usize| self.truth_at(trace, env, self.order[p]);
        match self.shape {
            Shape::Generic => None,
            Shape::HalfLine if self.prefix => Some(TruthRegion {
                lo: 0,
                hi: partition(0, n, truth),
                inside: true,
            }),
            Shape::HalfLine => Some(TruthRegion {
                lo: partition(0, n, |p| !truth(p)),
                hi: n,
                inside: true,
            }),
            Shape::Band => {
                let inner = self.inner.as_ref().unwrap();
                let h = |p: usize| {
                    let l = self.order[p];
                    inner.eval(&|d| trace.value(l, d), env)
                };
                let increasing = h(0) <= h(n - 1);
                let m = if increasing {
                    partition(0, n, |p| h(p) < 0.0)
                } else {
                    partition(0, n, |p| h(p) > 0.0)
                };
                let greater = self.atom.cmp.is_greater();
                let small = |p: usize| truth(p) != greater;
                let lo = partition(0, m, |p| !small(p));
                let hi = partition(m, n, small);
                Some(TruthRegion {
                    lo,
                    hi,
                    inside: !greater,
                })
            }
        }
    }
}

/// First position in `[lo, hi)` where `pred` is false, for `pred` true on a
/// prefix.
fn partition(lo: usize, hi: usize, pred: impl Fn(usize) -> bool) -> usize {
    let (mut a, mut b) = (lo, hi);
    while a < b {
        let mid = a + (b - a) / 2;
        if pred(mid) {
            a = mid + 1;
        } else {
            b = mid;
        }
    }
    a
}

/// Shape, sort key, band inner expression, and whether `lhs` increases with
/// the key.
fn classify(atom: &Atom) -> (Shape, Option<Expr>, Option<Expr>, bool) {
    if let Some((k, up)) = atom.lhs.monotone_key() {
        return (Shape::HalfLine, Some(k.clone()), None, up);
    }
    if let Expr::Abs(inner) = &atom.lhs {
        if let Some((k, up)) = inner.monotone_key() {
            return (Shape::Band, Some(k.clone()), Some((**inner).clone()), up);
        }
    }
    (Shape::Generic, None, None, true)
}

/// Truth values of one subformula from a base index on, with its runs kept
/// as separate start and finish arrays that are patched one position at a
/// time. Removals are deferred and applied when the arrays are next sorted.
#[derive(Clone, Debug)]
pub struct IncrementalRuns {
    point: Vec<bool>,
    base: usize,
    start: Vec<usize>,
    finish: Vec<usize>,
    dead_start: HashMap<usize, u32>,
    dead_finish: HashMap<usize, u32>,
    pub subupdates: u64,
    pub rebuilds: u64,
}

impl IncrementalRuns {
    pub fn new(n: usize) -> IncrementalRuns {
        IncrementalRuns {
            point: vec![false; n],
            base: 0,
            start: Vec::new(),
            finish: Vec::new(),
            dead_start: HashMap::new(),
            dead_finish: HashMap::new(),
            subupdates: 0,
            rebuilds: 0,
        }
    }

    /// Builds runs from an explicit list, for instance to replay a worked
    /// example.
    pub fn from_list(n: usize, list: &IntervalList, base: usize) -> IncrementalRuns {
        let mut r = IncrementalRuns::new(n);
        r.base = base;
        for &(s, e) in list.runs() {
            for x in &mut r.point[s..=e] {
                *x = true;
            }
            r.start.push(s);
            r.finish.push(e);
        }
        r
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn points(&self) -> PointVector {
        PointVector::new(self.point.clone(), self.base)
    }

    pub fn value(&self, l: usize) -> bool {
        l >= self.base && self.point[l]
    }

    /// Raw arrays, including entries scheduled for removal.
    pub fn raw(&self) -> (&[usize], &[usize]) {
        (&self.start, &self.finish)
    }

    /// Recomputes every value from `base` on.
    pub fn rebuild(&mut self, base: usize, truth: impl Fn(usize) -> bool) {
        self.base = base;
        for l in base..self.point.len() {
            self.point[l] = truth(l);
        }
        self.rescan();
    }

    fn rescan(&mut self) {
        self.rebuilds += 1;
        let list = interval::transform(&self.point, self.base);
        self.start.clear();
        self.finish.clear();
        self.dead_start.clear();
        self.dead_finish.clear();
        for &(s, e) in list.runs() {
            self.start.push(s);
            self.finish.push(e);
        }
    }

    fn neighbour(&self, l: Option<usize>) -> bool {
        match l {
            Some(x) if x >= self.base && x < self.point.len() => self.point[x],
            _ => false,
        }
    }

    /// Toggles the value at `l` and records the effect on the runs.
    pub fn toggle(&mut self, l: usize) {
        debug_assert!(l >= self.base);
        self.subupdates += 1;
        let next = self.neighbour(Some(l + 1));
        let prev = self.neighbour(l.checked_sub(1));
        if self.point[l] {
            if next {
                self.start.push(l + 1);
            } else {
                *self.dead_finish.entry(l).or_default() += 1;
            }
            if prev {
                self.finish.push(l - 1);
            } else {
                *self.dead_start.entry(l).or_default() += 1;
            }
            self.point[l] = false;
        } else {
            if !next {
                self.finish.push(l);
            } else {
                *self.dead_start.entry(l + 1).or_default() += 1;
            }
            if !prev {
                self.start.push(l);
            } else {
                *self.dead_finish.entry(l - 1).or_default() += 1;
            }
            self.point[l] = true;
        }
    }

    /// Brings the arrays back to sorted form: by sorting when they are short,
    /// otherwise by rescanning the values from `base`.
    pub fn resolve(&mut self) {
        let n = self.point.len() as f64;
        let size = self.start.len().max(self.finish.len()) as f64;
        if size <= 1.0 || size * size.log2() < n {
            sort_and_purge(&mut self.start, &mut self.dead_start);
            sort_and_purge(&mut self.finish, &mut self.dead_finish);
            debug_assert_eq!(self.start.len(), self.finish.len());
        } else {
            self.rescan();
        }
    }

    /// Drops everything below `i` and makes `i` the new base. The arrays
    /// must be resolved.
    pub fn advance(&mut self, i: usize) {
        debug_assert!(self.dead_start.is_empty() && self.dead_finish.is_empty());
        let k = self.finish.partition_point(|&f| f < i);
        self.start.drain(..k);
        self.finish.drain(..k);
        if let Some(s) = self.start.first_mut() {
            if *s < i {
                *s = i;
            }
        }
        self.base = i;
    }

    /// Current runs. The arrays must be resolved.
    pub fn runs(&self) -> IntervalList {
        IntervalList::from_runs(
            self.start
                .iter()
                .copied()
                .zip(self.finish.iter().copied())
                .collect(),
        )
    }
}

fn sort_and_purge(v: &mut Vec<usize>, dead: &mut HashMap<usize, u32>) {
    v.sort_unstable();
    if dead.is_empty() {
        return;
    }
    v.retain(|x| match dead.get_mut(x) {
        Some(c) if *c > 0 => {
            *c -= 1;
            false
        }
        _ => true,
    });
    dead.clear();
}

/// Live state of one constraint across instantiations.
#[derive(Clone, Debug)]
pub struct ConstraintState {
    pub runs: IncrementalRuns,
    pub region: Option<TruthRegion>,
}

impl ConstraintState {
    pub fn new(n: usize) -> ConstraintState {
        ConstraintState {
            runs: IncrementalRuns::new(n),
            region: None,
        }
    }

    /// Current flip position, for half-line constraints.
    pub fn flip(&self) -> Option<usize> {
        self.region.map(|r| r.flip())
    }
}

impl ConstraintIndex {
    /// Evaluates the constraint from index `i` under a fresh environment.
    pub fn init(
        &self,
        st: &mut ConstraintState,
        trace: &Trace,
        env: &dyn Fn(FreezeVar) -> f64,
        i: usize,
    ) -> IntervalList {
        st.region = self.region(trace, env);
        match st.region {
            Some(r) => st.runs.rebuild(i, |l| r.truth(self.rank[l])),
            None => st.runs.rebuild(i, |l| self.truth_at(trace, env, l)),
        }
        st.runs.runs()
    }

    /// Moves the state from instantiation `i - 1` (or any earlier base) to
    /// `i` under the new environment, toggling only positions whose truth
    /// changed.
    pub fn update(
        &self,
        st: &mut ConstraintState,
        trace: &Trace,
        env: &dyn Fn(FreezeVar) -> f64,
        i: usize,
    ) -> IntervalList {
        st.runs.advance(i);
        let new = self.region(trace, env);
        match (st.region, new) {
            (Some(old), Some(new)) => {
                for (a, b) in old.diff(&new) {
                    for p in a..b {
                        let l = self.order[p];
                        if l >= i {
                            st.runs.toggle(l);
                        }
                    }
                }
            }
            _ => {
                for l in i..self.order.len() {
                    if self.truth_at(trace, env, l) != st.runs.point[l] {
                        st.runs.toggle(l);
                    }
                }
            }
        }
        st.region = new;
        st.runs.resolve();
        st.runs.runs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Cmp;

    fn trace1(v: &[f64]) -> Trace {
        Trace::uniform(1.0, vec![v.to_vec()]).unwrap()
    }

    #[test]
    fn sorted_with_backlinks() {
        let tr = Trace::uniform(
            1.0,
            vec![
                vec![2.0, 5.0, 7.0, 1.0, 9.0],
                vec![8.0, 2.0, -3.0, 4.0, 1.0],
            ],
        )
        .unwrap();
        let lhs = Expr::sub(
            Expr::add(Expr::signal(1), Expr::signal(2)),
            Expr::constant(3.0),
        );
        let atom = Atom::new(lhs, Cmp::Le, Expr::frozen(1, 1));
        let idx = ConstraintIndex::build(&atom, &tr);
        assert_eq!(idx.sorted_values(), &[1.0, 2.0, 4.0, 7.0, 7.0]);
        assert_eq!(idx.order(), &[2, 3, 1, 0, 4]);
        assert_eq!(idx.rank()[0], 3);
    }

    #[test]
    fn constant_signal_keeps_index_order() {
        let tr = trace1(&[4.0; 6]);
        let atom = Atom::new(Expr::signal(1), Cmp::Ge, Expr::frozen(1, 1));
        let idx = ConstraintIndex::build(&atom, &tr);
        assert_eq!(idx.order(), &[0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn subupdate_splits_run() {
        let list = IntervalList::from_runs(vec![(2, 10), (20, 35)]);
        let mut r = IncrementalRuns::from_list(100, &list, 0);
        r.toggle(8);
        assert_eq!(r.raw(), (&[2, 20, 9][..], &[10, 35, 7][..]));
        r.resolve();
        assert_eq!(r.runs().runs(), &[(2, 7), (9, 10), (20, 35)]);
    }

    #[test]
    fn subupdate_isolated_and_involution() {
        let list = IntervalList::from_runs(vec![(3, 3), (6, 8)]);
        let mut r = IncrementalRuns::from_list(10, &list, 0);
        r.toggle(3);
        r.resolve();
        assert_eq!(r.runs().runs(), &[(6, 8)]);
        r.toggle(7);
        r.toggle(7);
        r.resolve();
        assert_eq!(r.runs().runs(), &[(6, 8)]);
    }

    #[test]
    fn band_region() {
        let tr = trace1(&[0.0, 0.5, 1.0, 1.05, 1.2, 2.0, 0.95]);
        let atom = Atom::new(
            Expr::abs(Expr::sub(Expr::frozen(1, 1), Expr::signal(1))),
            Cmp::Le,
            Expr::constant(0.1),
        );
        let idx = ConstraintIndex::build(&atom, &tr);
        assert_eq!(idx.shape(), Shape::Band);
        let env = |_: FreezeVar| 1.0;
        let r = idx.region(&tr, &env).unwrap();
        let truths: Vec<bool> = (0..7).map(|l| r.truth(idx.rank()[l])).collect();
        assert_eq!(truths, vec![false, false, true, true, false, false, true]);
        let far = Atom::new(atom.lhs.clone(), Cmp::Ge, Expr::constant(0.5));
        let idx = ConstraintIndex::build(&far, &tr);
        let r = idx.region(&tr, &env).unwrap();
        let truths: Vec<bool> = (0..7).map(|l| r.truth(idx.rank()[l])).collect();
        assert_eq!(truths, vec![true, true, false, false, false, true, false]);
    }
}
