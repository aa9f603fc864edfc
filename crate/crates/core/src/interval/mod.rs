//! Interval lists: maximal runs of sample indices where a subformula holds,
//! and the algebra used to combine them.

pub mod recipe;

use std::fmt;

use crate::formula::Window;
use crate::trace::Trace;

/// Truth values of a subformula at every sample, valid from `valid_from`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointVector {
    pub values: Vec<bool>,
    pub valid_from: usize,
}

impl PointVector {
    pub fn new(values: Vec<bool>, valid_from: usize) -> PointVector {
        PointVector { values, valid_from }
    }

    pub fn get(&self, i: usize) -> Option<bool> {
        (i >= self.valid_from).then(|| self.values[i])
    }
}

impl fmt::Display for PointVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.values.len() {
            if i > 0 {
                write!(f, ",")?;
            }
            let c = match self.get(i) {
                None => '-',
                Some(true) => 'T',
                Some(false) => 'F',
            };
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

/// Sorted, disjoint, non-adjacent inclusive index runs `[start, end]`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IntervalList {
    runs: Vec<(usize, usize)>,
}

impl IntervalList {
    /// Builds a list from runs that are already sorted and maximal.
    pub fn from_runs(runs: Vec<(usize, usize)>) -> IntervalList {
        debug_assert!(runs.iter().all(|&(s, e)| s <= e));
        debug_assert!(runs.windows(2).all(|w| w[0].1 + 1 < w[1].0));
        IntervalList { runs }
    }

    /// Builds a list from arbitrary runs, sorting and merging them.
    pub fn normalized(mut runs: Vec<(usize, usize)>) -> IntervalList {
        runs.sort_unstable();
        let mut b = Builder::default();
        for (s, e) in runs {
            b.push(s, e);
        }
        b.finish()
    }

    pub fn empty() -> IntervalList {
        IntervalList { runs: Vec::new() }
    }

    /// The single run `[k, n-1]`, or empty when `k >= n`.
    pub fn full(k: usize, n: usize) -> IntervalList {
        if k < n {
            IntervalList {
                runs: vec![(k, n - 1)],
            }
        } else {
            IntervalList::empty()
        }
    }

    pub fn runs(&self) -> &[(usize, usize)] {
        &self.runs
    }

    pub fn len(&self) -> usize {
        self.runs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    pub fn first_start(&self) -> Option<usize> {
        self.runs.first().map(|r| r.0)
    }

    pub fn contains(&self, i: usize) -> bool {
        let k = self.runs.partition_point(|r| r.1 < i);
        k < self.runs.len() && self.runs[k].0 <= i
    }

    /// Number of indices covered.
    pub fn count(&self) -> usize {
        self.runs.iter().map(|r| r.1 - r.0 + 1).sum()
    }

    /// Keeps only indices `>= k`.
    pub fn clip_from(&self, k: usize) -> IntervalList {
        let runs = self
            .runs
            .iter()
            .filter(|r| r.1 >= k)
            .map(|&(s, e)| (s.max(k), e))
            .collect();
        IntervalList { runs }
    }

    /// Point vector of length `n`, valid from `k`.
    pub fn to_points(&self, n: usize, k: usize) -> PointVector {
        let mut v = vec![false; n];
        for &(s, e) in &self.runs {
            for x in &mut v[s..=e] {
                *x = true;
            }
        }
        PointVector::new(v, k)
    }

    /// Renders the runs as timestamp intervals.
    pub fn display_times(&self, trace: &Trace) -> String {
        if self.runs.is_empty() {
            return "∅".to_string();
        }
        self.runs
            .iter()
            .map(|&(s, e)| format!("[{},{}]", trace.time(s), trace.time(e)))
            .collect::<Vec<_>>()
            .join(",")
    }
}

#[derive(Default)]
pub(crate) struct Builder {
    runs: Vec<(usize, usize)>,
}

impl Builder {
    /// Appends a run whose start is not below the previous start.
    pub(crate) fn push(&mut self, s: usize, e: usize) {
        if let Some(last) = self.runs.last_mut() {
            if s <= last.1 + 1 {
                last.1 = last.1.max(e);
                return;
            }
        }
        self.runs.push((s, e));
    }

    pub(crate) fn finish(self) -> IntervalList {
        IntervalList { runs: self.runs }
    }
}

/// Maximal runs of `true` in `points[i..]`.
pub fn transform(points: &[bool], i: usize) -> IntervalList {
    let mut runs = Vec::new();
    let mut start = None;
    for (j, &v) in points.iter().enumerate().skip(i) {
        match (v, start) {
            (true, None) => start = Some(j),
            (false, Some(s)) => {
                runs.push((s, j - 1));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        runs.push((s, points.len() - 1));
    }
    IntervalList { runs }
}

/// Complement within `[k, n-1]`.
pub fn complement(l: &IntervalList, k: usize, n: usize) -> IntervalList {
    let mut runs = Vec::with_capacity(l.len() + 1);
    let mut next = k;
    for &(s, e) in &l.runs {
        if e < k {
            continue;
        }
        if s > next {
            runs.push((next, s - 1));
        }
        next = next.max(e + 1);
    }
    if next < n {
        runs.push((next, n - 1));
    }
    IntervalList { runs }
}

pub fn and(a: &IntervalList, b: &IntervalList) -> IntervalList {
    let (mut i, mut j) = (0, 0);
    let mut runs = Vec::new();
    while i < a.runs.len() && j < b.runs.len() {
        let (s1, e1) = a.runs[i];
        let (s2, e2) = b.runs[j];
        let s = s1.max(s2);
        let e = e1.min(e2);
        if s <= e {
            runs.push((s, e));
        }
        if e1 < e2 {
            i += 1;
        } else {
            j += 1;
        }
    }
    IntervalList { runs }
}

pub fn or(a: &IntervalList, b: &IntervalList) -> IntervalList {
    let (mut i, mut j) = (0, 0);
    let mut out = Builder::default();
    while i < a.runs.len() || j < b.runs.len() {
        let take_a = j >= b.runs.len() || (i < a.runs.len() && a.runs[i].0 <= b.runs[j].0);
        let (s, e) = if take_a {
            i += 1;
            a.runs[i - 1]
        } else {
            j += 1;
            b.runs[j - 1]
        };
        out.push(s, e);
    }
    out.finish()
}

/// First index `>= from` at which the monotone (true, then false) predicate
/// on timestamps is false.
fn boundary(tr: &Trace, hint: usize, from: usize, pred: impl Fn(f64) -> bool) -> usize {
    let t = tr.times();
    let n = t.len();
    let mut g = hint.clamp(from, n);
    if g < n && pred(t[g]) {
        let mut step = 1;
        let mut lo = g;
        let mut hi = g + 1;
        while hi < n && pred(t[hi]) {
            lo = hi;
            step *= 2;
            hi = (hi + step).min(n);
        }
        return lo + 1 + t[lo + 1..hi].partition_point(|&x| pred(x));
    }
    let mut step = 1;
    while g > from && !pred(t[g - 1]) {
        let lo = g.saturating_sub(step).max(from);
        if !pred(t[lo]) {
            g = lo;
            step *= 2;
        } else {
            return lo + 1 + t[lo + 1..g].partition_point(|&x| pred(x));
        }
    }
    g
}

/// Whether every gap between consecutive samples is comfortably shorter
/// than the window, so that any placement of the window over a run of
/// samples contains one of them.
fn dense(tr: &Trace, w: &Window, max_gap: f64) -> bool {
    if w.b.is_infinite() {
        return true;
    }
    let slack = 1e-9 * (w.b - w.a + tr.time(tr.len() - 1));
    max_gap + slack < w.b - w.a
}

pub(crate) fn max_gap(tr: &Trace) -> f64 {
    match tr.step() {
        Some(dt) => dt * (1.0 + 1e-9),
        None => tr
            .times()
            .windows(2)
            .map(|p| p[1] - p[0])
            .fold(0.0, f64::max),
    }
}

/// Adds every `i` in `[lo_i, hi_i]` for which some `j` in `[p, q]` has
/// `tau_j` in `tau_i + w`.
#[allow(clippy::too_many_arguments)]
fn preimage(
    tr: &Trace,
    w: &Window,
    fast: bool,
    p: usize,
    q: usize,
    lo_i: usize,
    hi_i: usize,
    out: &mut Builder,
) {
    let t = tr.times();
    let (tp, tq) = (t[p], t[q]);
    let hint = tr.first_after(tq - w.a, 0);
    let end = boundary(tr, hint, 0, |x| x + w.a <= tq);
    if end == 0 {
        return;
    }
    let hi = (end - 1).min(hi_i);
    let lo = if w.b.is_infinite() {
        lo_i
    } else {
        let hint = tr.first_at_or_after(tp - w.b, 0);
        boundary(tr, hint, 0, |x| x + w.b < tp).max(lo_i)
    };
    if lo > hi {
        return;
    }
    if fast {
        out.push(lo, hi);
        return;
    }
    let mut j = p;
    for i in lo..=hi {
        let start = t[i] + w.a;
        while j <= q && t[j] < start {
            j += 1;
        }
        if j <= q && t[j] <= t[i] + w.b {
            out.push(i, i);
        }
    }
}

/// Indices `i >= k` where `F_w` holds, given the runs of its operand.
pub fn eventually(l: &IntervalList, w: &Window, tr: &Trace, k: usize) -> IntervalList {
    let fast = dense(tr, w, max_gap(tr));
    let mut out = Builder::default();
    for &(p, q) in &l.runs {
        preimage(tr, w, fast, p, q, k, tr.len() - 1, &mut out);
    }
    out.finish()
}

/// Indices `i >= k` where `G_w` holds, through `G = !F!`.
pub fn always(l: &IntervalList, w: &Window, tr: &Trace, k: usize) -> IntervalList {
    let n = tr.len();
    complement(&eventually(&complement(l, k, n), w, tr, k), k, n)
}

/// Indices `i >= k` where `a U_w b` holds, given the runs of both operands.
///
/// The witness `j` must satisfy `b` and every index in `[i, j)` must
/// satisfy `a`, so `j` may lie one sample past the end of an `a`-run.
pub fn until(a: &IntervalList, b: &IntervalList, w: &Window, tr: &Trace, k: usize) -> IntervalList {
    let n = tr.len();
    let fast = dense(tr, w, max_gap(tr));
    let mut out = Builder::default();
    let mut j0 = 0;
    for &(p, q) in &a.runs {
        if q < k {
            continue;
        }
        let reach = (q + 1).min(n - 1);
        while j0 < b.runs.len() && b.runs[j0].1 < p {
            j0 += 1;
        }
        let mut j = j0;
        while j < b.runs.len() && b.runs[j].0 <= reach {
            let (s, e) = b.runs[j];
            preimage(tr, w, fast, s.max(p), e.min(reach), p.max(k), q, &mut out);
            j += 1;
        }
    }
    let body = out.finish();
    if w.a == 0.0 {
        or(&body, &b.clip_from(k))
    } else {
        body
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == 'T').collect()
    }

    fn uniform(n: usize) -> Trace {
        Trace::uniform(1.0, vec![vec![0.0; n]]).unwrap()
    }

    #[test]
    fn transform_runs() {
        let l = transform(&pts("TTTFFTFTTTT"), 0);
        assert_eq!(l.runs(), &[(0, 2), (5, 5), (7, 10)]);
        assert!(transform(&pts("FFFF"), 0).is_empty());
        assert_eq!(transform(&pts("TTTTTTTTTT"), 3).runs(), &[(3, 9)]);
    }

    #[test]
    fn boolean_ops() {
        let a = IntervalList::from_runs(vec![(2, 10), (20, 35)]);
        let b = IntervalList::from_runs(vec![(7, 15)]);
        assert_eq!(complement(&a, 0, 100).runs(), &[(0, 1), (11, 19), (36, 99)]);
        assert_eq!(and(&a, &b).runs(), &[(7, 10)]);
        assert_eq!(or(&a, &b).runs(), &[(2, 15), (20, 35)]);
        assert_eq!(and(&a, &IntervalList::full(0, 100)), a);
        assert_eq!(complement(&IntervalList::empty(), 0, 5).runs(), &[(0, 4)]);
    }

    #[test]
    fn eventually_uniform() {
        let a = IntervalList::from_runs(vec![(2, 10), (20, 35)]);
        let r = eventually(&a, &Window::new(1.0, 3.0), &uniform(100), 0);
        assert_eq!(r.runs(), &[(0, 9), (17, 34)]);
    }

    #[test]
    fn until_right_extension() {
        let a = IntervalList::from_runs(vec![(2, 10), (20, 35)]);
        let b = IntervalList::from_runs(vec![(7, 15)]);
        let r = until(&a, &b, &Window::new(2.0, 4.0), &uniform(100), 0);
        assert_eq!(r.runs(), &[(3, 9)]);
    }

    #[test]
    fn sparse_window_falls_back() {
        let tr = Trace::new(vec![0.0, 1.0, 5.0, 6.0], vec![vec![0.0; 4]]).unwrap();
        let a = IntervalList::from_runs(vec![(0, 3)]);
        let r = eventually(&a, &Window::new(3.0, 4.0), &tr, 0);
        assert_eq!(r.runs(), &[(1, 1)]);
    }

    #[test]
    fn point_vector_display() {
        let p = PointVector::new(pts("FTT"), 1);
        assert_eq!(p.to_string(), "[-,T,T]");
    }
}
