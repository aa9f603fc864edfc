//! The continuous-time interval recipe: back-shift real intervals, intersect,
//! then snap to samples with `trim`.
//!
//! On non-uniform traces these operators can differ from the pointwise
//! semantics (a back-shifted interval may contain samples whose window holds
//! no sample of the operand). The monitor uses the exact operators in the
//! parent module; these are kept for comparison and for rendering.

use super::IntervalList;
use crate::formula::Window;
use crate::trace::Trace;

/// Closed real interval `[lo, hi]`; empty when `lo > hi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeInterval {
    pub lo: f64,
    pub hi: f64,
}

impl TimeInterval {
    pub fn new(lo: f64, hi: f64) -> TimeInterval {
        TimeInterval { lo, hi }
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }

    pub fn intersect(&self, other: &TimeInterval) -> TimeInterval {
        TimeInterval::new(self.lo.max(other.lo), self.hi.min(other.hi))
    }
}

/// `[m, n] ⊖ [a, b] = [m - b, n - a]`.
pub fn back_shift(iv: TimeInterval, w: &Window) -> TimeInterval {
    TimeInterval::new(iv.lo - w.b, iv.hi - w.a)
}

/// Replaces each interval by the largest `[tau_i, tau_j]` inside it with
/// `k <= i <= j`, dropping those that contain no sample. The input must be
/// sorted and disjoint. Searches gallop forward from the previous position.
pub fn trim(list: &[TimeInterval], tr: &Trace, k: usize) -> IntervalList {
    let mut runs = Vec::new();
    let mut from = k;
    for iv in list {
        if iv.is_empty() {
            continue;
        }
        let i = tr.first_at_or_after(iv.lo, from);
        if i >= tr.len() {
            break;
        }
        let j = tr.first_after(iv.hi, i);
        if j > i {
            runs.push((i, j - 1));
            from = j;
        }
    }
    IntervalList::normalized(runs)
}

fn as_times(l: &IntervalList, tr: &Trace) -> Vec<TimeInterval> {
    l.runs()
        .iter()
        .map(|&(s, e)| TimeInterval::new(tr.time(s), tr.time(e)))
        .collect()
}

fn merge(mut v: Vec<TimeInterval>) -> Vec<TimeInterval> {
    v.retain(|iv| !iv.is_empty());
    v.sort_by(|x, y| x.lo.total_cmp(&y.lo));
    let mut out: Vec<TimeInterval> = Vec::with_capacity(v.len());
    for iv in v {
        match out.last_mut() {
            Some(last) if iv.lo <= last.hi => last.hi = last.hi.max(iv.hi),
            _ => out.push(iv),
        }
    }
    out
}

/// `trim(intvl ⊖ [a, b])`.
pub fn eventually(l: &IntervalList, w: &Window, tr: &Trace, k: usize) -> IntervalList {
    let shifted = as_times(l, tr)
        .into_iter()
        .map(|iv| back_shift(iv, w))
        .collect();
    trim(&merge(shifted), tr, k)
}

/// Union over interval pairs of `((I ∩ J) ⊖ [a, b]) ∩ I`, then `trim`.
pub fn until(a: &IntervalList, b: &IntervalList, w: &Window, tr: &Trace, k: usize) -> IntervalList {
    let bs = as_times(b, tr);
    let mut parts = Vec::new();
    for i in as_times(a, tr) {
        for j in &bs {
            let x = i.intersect(j);
            if !x.is_empty() {
                parts.push(back_shift(x, w).intersect(&i));
            }
        }
    }
    trim(&merge(parts), tr, k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn back_shift_definition() {
        let w = Window::new(1.0, 3.0);
        assert_eq!(
            back_shift(TimeInterval::new(2.0, 10.0), &w),
            TimeInterval::new(-1.0, 9.0)
        );
        let w = Window::new(2.0, 4.0);
        assert_eq!(
            back_shift(TimeInterval::new(7.0, 10.0), &w),
            TimeInterval::new(3.0, 8.0)
        );
        let w = Window::new(0.0, 0.0);
        assert_eq!(
            back_shift(TimeInterval::new(5.0, 5.0), &w),
            TimeInterval::new(5.0, 5.0)
        );
    }

    #[test]
    fn trim_snaps_to_samples() {
        let tr = Trace::uniform(1.0, vec![vec![0.0; 100]]).unwrap();
        let r = trim(&[TimeInterval::new(-1.0, 9.0)], &tr, 0);
        assert_eq!(r.runs(), &[(0, 9)]);
        assert!(trim(&[TimeInterval::new(12.1, 12.9)], &tr, 0).is_empty());
    }
}
