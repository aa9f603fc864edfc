//! Finite timed traces: loading, saving and synthetic generation.

use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

const UNIFORM_TOL: f64 = 1e-9;
const MIN_GAP: f64 = 1e-6;

/// A finite sequence of timestamped samples `(sigma_i, tau_i)` with strictly
/// increasing timestamps. Dimensions are addressed 1-based, as `s1..sD`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    times: Vec<f64>,
    columns: Vec<Vec<f64>>,
    step: Option<f64>,
}

impl Trace {
    /// Builds a trace from timestamps and one column per dimension.
    pub fn new(times: Vec<f64>, columns: Vec<Vec<f64>>) -> Result<Trace> {
        if times.is_empty() {
            return Err(Error::EmptyTrace);
        }
        if columns.is_empty() {
            return Err(Error::Trace("a trace needs at least one dimension".into()));
        }
        if let Some(c) = columns.iter().position(|c| c.len() != times.len()) {
            return Err(Error::Trace(format!(
                "dimension s{} has {} samples, expected {}",
                c + 1,
                columns[c].len(),
                times.len()
            )));
        }
        if let Some(i) = times.iter().position(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::Trace(format!("invalid timestamp at row {i}")));
        }
        if let Some(i) = times.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::Trace(format!(
                "timestamps not strictly increasing at row {}",
                i + 1
            )));
        }
        let step = detect_step(&times);
        Ok(Trace {
            times,
            columns,
            step,
        })
    }

    /// Uniformly sampled trace with `tau_i = i * step`.
    pub fn uniform(step: f64, columns: Vec<Vec<f64>>) -> Result<Trace> {
        let n = columns.first().map_or(0, Vec::len);
        Trace::new((0..n).map(|i| i as f64 * step).collect(), columns)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dims(&self) -> usize {
        self.columns.len()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    #[inline]
    pub fn time(&self, i: usize) -> f64 {
        self.times[i]
    }

    /// Sample of dimension `dim` (1-based) at index `i`.
    #[inline]
    pub fn value(&self, i: usize, dim: usize) -> f64 {
        self.columns[dim - 1][i]
    }

    pub fn column(&self, dim: usize) -> &[f64] {
        &self.columns[dim - 1]
    }

    pub fn is_uniform(&self) -> bool {
        self.step.is_some()
    }

    pub fn step(&self) -> Option<f64> {
        self.step
    }

    /// Smallest index `i >= from` with `tau_i >= t`, or `len()`.
    pub fn first_at_or_after(&self, t: f64, from: usize) -> usize {
        let n = self.len();
        if from >= n {
            return n;
        }
        if let Some(dt) = self.step {
            let guess = ((t - self.times[0]) / dt).ceil();
            let mut g = if guess <= 0.0 {
                0
            } else if guess >= n as f64 {
                n
            } else {
                guess as usize
            };
            while g < n && self.times[g] < t {
                g += 1;
            }
            while g > 0 && self.times[g - 1] >= t {
                g -= 1;
            }
            return g.max(from);
        }
        gallop(&self.times, from, |x| x < t)
    }

    /// Largest index `i` with `tau_i <= t`, if any.
    pub fn last_at_or_before(&self, t: f64) -> Option<usize> {
        self.first_after(t, 0).checked_sub(1)
    }

    /// Smallest index `i >= from` with `tau_i > t`, or `len()`.
    pub fn first_after(&self, t: f64, from: usize) -> usize {
        let n = self.len();
        if from >= n {
            return n;
        }
        if let Some(dt) = self.step {
            let guess = ((t - self.times[0]) / dt).floor() + 1.0;
            let mut g = if guess <= 0.0 {
                0
            } else if guess >= n as f64 {
                n
            } else {
                guess as usize
            };
            while g < n && self.times[g] <= t {
                g += 1;
            }
            while g > 0 && self.times[g - 1] > t {
                g -= 1;
            }
            return g.max(from);
        }
        gallop(&self.times, from, |x| x <= t)
    }

    /// Reads a CSV file with header `time,s1,...,sD`.
    pub fn load_csv(path: impl AsRef<Path>) -> Result<Trace> {
        let file = std::fs::File::open(path)?;
        Trace::read_csv(file)
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Trace> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let width = rdr.headers()?.len();
        if width < 2 {
            return Err(Error::Trace(
                "header must be time followed by at least one signal column".into(),
            ));
        }
        let mut times = Vec::new();
        let mut columns = vec![Vec::new(); width - 1];
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| match e.kind() {
                csv::ErrorKind::UnequalLengths { .. } => {
                    Error::Trace(format!("ragged row {}", row + 1))
                }
                _ => Error::Csv(e),
            })?;
            for (c, cell) in rec.iter().enumerate() {
                let v = f64::from_str(cell).map_err(|_| {
                    Error::Trace(format!("non-numeric cell '{cell}' at row {}", row + 1))
                })?;
                if c == 0 {
                    times.push(v);
                } else {
                    columns[c - 1].push(v);
                }
            }
        }
        Trace::new(times, columns)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["time".to_string()];
        header.extend((1..=self.dims()).map(|d| format!("s{d}")));
        w.write_record(&header)?;
        for i in 0..self.len() {
            let mut row = vec![self.times[i].to_string()];
            row.extend(self.columns.iter().map(|c| c[i].to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    /// Synthesizes a trace per `spec`. Identical specs give identical traces.
    pub fn generate(spec: &GenSpec) -> Result<Trace> {
        if spec.n < 2 {
            return Err(Error::TooFewSamples(spec.n));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let h = spec.horizon;
        let times = if spec.nonuniform {
            random_times(&mut rng, spec.n, h)
        } else {
            (0..spec.n)
                .map(|i| i as f64 * h / (spec.n - 1) as f64)
                .collect()
        };
        let mut columns: Vec<Vec<f64>> = match spec.kind {
            GenKind::Pulse => vec![times.iter().map(|&t| pulse(t, spec.violating)).collect()],
            GenKind::DriftingPulse => {
                let base: Vec<f64> = times
                    .iter()
                    .map(|&t| pulse(t, spec.violating) + wobble(t))
                    .collect();
                let deriv = forward_difference(&times, &base);
                vec![base, deriv]
            }
            GenKind::Stairs => vec![times.iter().map(|&t| stairs(t, spec.violating)).collect()],
            GenKind::Stabilize => {
                vec![times
                    .iter()
                    .map(|&t| stabilize(t, spec.violating))
                    .collect()]
            }
            GenKind::Crossing => vec![
                times.iter().map(|&t| crossing(t, spec.violating)).collect(),
                times
                    .iter()
                    .map(|&t| 2.0 + (std::f64::consts::TAU * t / 25.0).sin())
                    .collect(),
            ],
        };
        if spec.noise > 0.0 {
            for v in columns[0].iter_mut() {
                *v += rng.gen_range(-spec.noise..=spec.noise);
            }
        }
        Trace::new(times, columns)
    }
}

fn detect_step(times: &[f64]) -> Option<f64> {
    if times.len() < 2 {
        return None;
    }
    let dt = times[1] - times[0];
    let ok = times
        .windows(2)
        .all(|w| ((w[1] - w[0]) - dt).abs() <= UNIFORM_TOL * dt.abs().max(w[1].abs()));
    ok.then_some(dt)
}

/// First index `i >= from` where `below(xs[i])` is false, found by
/// exponential search from `from`.
fn gallop(xs: &[f64], from: usize, below: impl Fn(f64) -> bool) -> usize {
    let n = xs.len();
    if from >= n || !below(xs[from]) {
        return from.min(n);
    }
    let mut lo = from;
    let mut step = 1;
    let mut hi = from + 1;
    while hi < n && below(xs[hi]) {
        lo = hi;
        step *= 2;
        hi = (hi + step).min(n);
    }
    let hi = hi.min(n);
    lo + 1 + xs[lo + 1..hi].partition_point(|&x| below(x))
}

fn random_times(rng: &mut ChaCha8Rng, n: usize, h: f64) -> Vec<f64> {
    let mut t: Vec<f64> = (0..n - 2).map(|_| rng.gen_range(0.0..h)).collect();
    t.sort_by(f64::total_cmp);
    t.insert(0, 0.0);
    t.push(h);
    for i in 1..n - 1 {
        t[i] = t[i].max(t[i - 1] + MIN_GAP);
    }
    for i in (1..n - 1).rev() {
        t[i] = t[i].min(t[i + 1] - MIN_GAP);
    }
    t
}

fn forward_difference(times: &[f64], v: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .map(|i| {
            if i + 1 < n {
                (v[i + 1] - v[i]) / (times[i + 1] - times[i])
            } else {
                0.0
            }
        })
        .collect()
}

fn pulse(t: f64, violating: bool) -> f64 {
    let high = t.rem_euclid(20.0) < 10.0;
    match (high, violating && t >= 50.0) {
        (true, true) => 1.5,
        (true, false) => 1.0,
        (false, _) => -1.0,
    }
}

/// Slow triangle wave of amplitude 0.04 and period 8.
fn wobble(t: f64) -> f64 {
    let p = t.rem_euclid(8.0) / 8.0;
    0.04 * (1.0 - 4.0 * (p - 0.5).abs())
}

fn stairs(t: f64, violating: bool) -> f64 {
    let level = (t.rem_euclid(30.0) / 10.0).floor() as usize;
    match level {
        0 if violating && t >= 60.0 => 0.5,
        0 => 0.0,
        1 => 2.0,
        _ => 4.0,
    }
}

fn stabilize(t: f64, violating: bool) -> f64 {
    if (20.0..22.0).contains(&t) {
        10.0
    } else if (40.0..42.0).contains(&t) {
        2.0
    } else if t >= 42.0 && violating {
        9.0
    } else {
        6.0
    }
}

fn crossing(t: f64, violating: bool) -> f64 {
    if t <= 40.0 {
        12.0 * t / 40.0
    } else if t <= 60.0 || violating {
        12.0
    } else if t <= 80.0 {
        12.0 * (80.0 - t) / 20.0
    } else {
        0.0
    }
}

/// Signal shapes produced by [`Trace::generate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenKind {
    /// Rectangular wave between -1 and +1 with period 20.
    Pulse,
    /// Pulse with a slow wobble below 0.05, plus its forward-difference
    /// derivative as `s2`.
    DriftingPulse,
    /// Repeating staircase 0, 2, 4 with period 30.
    Stairs,
    /// Level 6 with a spike to 10 at t=20, a dip to 2 at t=40, then settling
    /// back to 6 (to 9 when violating).
    Stabilize,
    /// `s1` rises past 5 and 10 and later falls below 5 (stays high when
    /// violating); `s2` is a smooth oscillation around 2.
    Crossing,
}

impl FromStr for GenKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<GenKind> {
        Ok(match s {
            "pulse" => GenKind::Pulse,
            "drifting-pulse" => GenKind::DriftingPulse,
            "stairs" => GenKind::Stairs,
            "stabilize" => GenKind::Stabilize,
            "crossing" => GenKind::Crossing,
            other => return Err(Error::Trace(format!("unknown trace kind '{other}'"))),
        })
    }
}

/// Parameters of a generated trace. The horizon is fixed, so `n` sets the
/// sampling rate.
#[derive(Clone, Debug, PartialEq)]
pub struct GenSpec {
    pub kind: GenKind,
    pub n: usize,
    pub noise: f64,
    pub nonuniform: bool,
    pub seed: u64,
    pub violating: bool,
    pub horizon: f64,
}

impl GenSpec {
    pub fn new(kind: GenKind, n: usize) -> GenSpec {
        GenSpec {
            kind,
            n,
            noise: 0.0,
            nonuniform: false,
            seed: 0,
            violating: false,
            horizon: 100.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_detection() {
        let csv = "time,s1\n".to_string()
            + &(0..11)
                .map(|i| format!("{i},{}\n", i * 2))
                .collect::<String>();
        let t = Trace::read_csv(csv.as_bytes()).unwrap();
        assert_eq!(t.len(), 11);
        assert_eq!(t.step(), Some(1.0));
    }

    #[test]
    fn nonuniform_detection() {
        let ts = [
            0, 1, 2, 4, 5, 7, 8, 10, 11, 13, 15, 17, 20, 25, 27, 30, 35, 40,
        ];
        let csv = "time,s1\r\n".to_string()
            + &ts.iter().map(|t| format!("{t},0\r\n")).collect::<String>();
        let t = Trace::read_csv(csv.as_bytes()).unwrap();
        assert_eq!(t.len(), 18);
        assert!(!t.is_uniform());
    }

    #[test]
    fn single_row() {
        let t = Trace::read_csv("time,s1,s2\n0,1,2\n".as_bytes()).unwrap();
        assert_eq!((t.len(), t.dims()), (1, 2));
    }

    #[test]
    fn bad_inputs() {
        assert!(Trace::read_csv("time,s1\n0,1\n0,2\n".as_bytes()).is_err());
        assert!(Trace::read_csv("time,s1\n0,1\n1\n".as_bytes()).is_err());
        assert!(Trace::read_csv("time,s1\n0,x\n".as_bytes()).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let t = Trace::generate(&GenSpec {
            nonuniform: true,
            noise: 0.1,
            ..GenSpec::new(GenKind::Crossing, 50)
        })
        .unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(Trace::read_csv(buf.as_slice()).unwrap(), t);
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = GenSpec {
            noise: 0.05,
            nonuniform: true,
            seed: 7,
            ..GenSpec::new(GenKind::Pulse, 300)
        };
        assert_eq!(
            Trace::generate(&spec).unwrap(),
            Trace::generate(&spec).unwrap()
        );
        assert!(Trace::generate(&GenSpec::new(GenKind::Pulse, 1)).is_err());
    }

    #[test]
    fn time_searches() {
        let t = Trace::new(vec![0.0, 1.0, 2.0, 4.0, 5.0, 7.0], vec![vec![0.0; 6]]).unwrap();
        assert_eq!(t.first_at_or_after(3.0, 0), 3);
        assert_eq!(t.first_at_or_after(4.0, 0), 3);
        assert_eq!(t.first_at_or_after(4.0, 5), 5);
        assert_eq!(t.first_after(4.0, 0), 4);
        assert_eq!(t.last_at_or_before(3.9), Some(2));
        assert_eq!(t.last_at_or_before(-1.0), None);
        let u = Trace::uniform(0.5, vec![vec![0.0; 10]]).unwrap();
        for x in [-1.0, 0.0, 0.2, 0.5, 2.25, 4.5, 9.0] {
            let a = u.first_at_or_after(x, 0);
            assert_eq!(a, u.times().partition_point(|&v| v < x));
            assert_eq!(u.first_after(x, 0), u.times().partition_point(|&v| v <= x));
        }
    }
}
