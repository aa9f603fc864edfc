#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use stlstar::{Cmp, Expr, Formula, FreezeVar, Trace, Window};

pub use rand::SeedableRng;
pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Trace with `n` samples over `dims` dimensions. Values are drawn from a
/// small grid so that ties are common.
pub fn random_trace(rng: &mut TestRng, n: usize, dims: usize, uniform: bool) -> Trace {
    let times: Vec<f64> = if uniform {
        let step = *[0.5, 1.0, 2.0].choose(rng).unwrap();
        (0..n).map(|i| i as f64 * step).collect()
    } else {
        let mut t = 0.0;
        (0..n)
            .map(|_| {
                let now = t;
                t += *[0.25, 0.5, 1.0, 1.5, 2.5].choose(rng).unwrap();
                now
            })
            .collect()
    };
    let columns = (0..dims)
        .map(|_| {
            (0..n)
                .map(|_| f64::from(rng.gen_range(-6..=6)) / 2.0)
                .collect()
        })
        .collect();
    Trace::new(times, columns).unwrap()
}

fn cmp(rng: &mut TestRng) -> Cmp {
    *[Cmp::Lt, Cmp::Le, Cmp::Gt, Cmp::Ge].choose(rng).unwrap()
}

fn small(rng: &mut TestRng) -> f64 {
    f64::from(rng.gen_range(-4..=4)) / 2.0
}

fn window(rng: &mut TestRng) -> Window {
    match rng.gen_range(0..4) {
        0 => Window::UNBOUNDED,
        1 => Window::new(*[0.5, 1.0, 2.0].choose(rng).unwrap(), f64::INFINITY),
        _ => {
            let a = *[0.0, 0.5, 1.0, 2.0].choose(rng).unwrap();
            Window::new(a, a + *[0.0, 0.5, 1.0, 2.0, 4.0].choose(rng).unwrap())
        }
    }
}

fn atom(rng: &mut TestRng, dims: usize, bound: &[FreezeVar]) -> Formula {
    let s = Expr::signal(rng.gen_range(1..=dims));
    let c = Expr::constant(small(rng));
    if bound.is_empty() || rng.gen_bool(0.4) {
        return match rng.gen_range(0..3) {
            0 if dims > 1 => {
                Formula::atom(Expr::add(Expr::signal(1), Expr::signal(2)), cmp(rng), c)
            }
            _ => Formula::atom(s, cmp(rng), c),
        };
    }
    let z = *bound.choose(rng).unwrap();
    let zf = Expr::frozen(z.dim, z.tag);
    match rng.gen_range(0..6) {
        0 => Formula::atom(s, cmp(rng), Expr::add(zf, c)),
        1 => Formula::atom(
            Expr::abs(Expr::sub(zf, s)),
            cmp(rng),
            Expr::constant(small(rng).abs()),
        ),
        2 => Formula::atom(
            Expr::sub(s, Expr::mul(Expr::constant(0.5), zf)),
            cmp(rng),
            c,
        ),
        3 if bound.len() > 1 => {
            let w = Expr::frozen(bound[0].dim, bound[0].tag);
            Formula::atom(
                s,
                cmp(rng),
                Expr::mul(Expr::constant(0.5), Expr::add(zf, w)),
            )
        }
        4 => Formula::atom(Expr::mul(s.clone(), s), cmp(rng), zf),
        _ => Formula::atom(Expr::add(s, zf), cmp(rng), c),
    }
}

/// Random formula of depth at most `depth` with at most `freezes` freeze
/// operators over signals of `dims` dimensions. Temporal nesting is kept
/// shallow so that brute-force evaluation stays cheap.
pub fn random_formula(rng: &mut TestRng, depth: usize, freezes: usize, dims: usize) -> Formula {
    let mut budget = freezes;
    gen(rng, depth, &mut budget, dims, &mut Vec::new(), 3)
}

fn gen(
    rng: &mut TestRng,
    depth: usize,
    freezes: &mut usize,
    dims: usize,
    bound: &mut Vec<FreezeVar>,
    temporal: u32,
) -> Formula {
    if depth <= 1 || rng.gen_bool(0.05) {
        return atom(rng, dims, bound);
    }
    let d = depth - 1;
    loop {
        match rng.gen_range(0..11) {
            0 => return Formula::not(gen(rng, d, freezes, dims, bound, temporal)),
            1 | 2 => {
                let a = gen(rng, d, freezes, dims, bound, temporal);
                return Formula::and(a, gen(rng, d, freezes, dims, bound, temporal));
            }
            3 | 4 => {
                let a = gen(rng, d, freezes, dims, bound, temporal);
                return Formula::or(a, gen(rng, d, freezes, dims, bound, temporal));
            }
            5 if temporal >= 1 => {
                return Formula::always(
                    window(rng),
                    gen(rng, d, freezes, dims, bound, temporal - 1),
                )
            }
            6 if temporal >= 1 => {
                return Formula::eventually(
                    window(rng),
                    gen(rng, d, freezes, dims, bound, temporal - 1),
                )
            }
            7 | 8 if temporal >= 2 => {
                let w = window(rng);
                let a = gen(rng, d, freezes, dims, bound, temporal - 2);
                return Formula::until(w, a, gen(rng, d, freezes, dims, bound, temporal - 2));
            }
            9 | 10 if *freezes > 0 => {
                *freezes -= 1;
                let v = FreezeVar::new(
                    rng.gen_range(1..=dims),
                    bound.len() as u32 + 1 + *freezes as u32 * 10,
                );
                bound.push(v);
                let body = gen(rng, d, freezes, dims, bound, temporal);
                bound.pop();
                return Formula::Freeze(v, Box::new(body));
            }
            _ => {}
        }
    }
}

/// A random (formula, trace) case as used by the equivalence suites.
pub fn random_case(rng: &mut TestRng, max_len: usize) -> (Formula, Trace) {
    let dims = rng.gen_range(1..=2);
    let n = rng.gen_range(1..=max_len);
    let uniform = rng.gen_bool(0.5);
    let tr = random_trace(rng, n, dims, uniform);
    let depth = rng.gen_range(3..=5);
    let f = random_formula(rng, depth, 2, dims);
    (f, tr)
}
