//! Seeded Monte Carlo estimates of random containment and of disjoint
//! members across a random 2-colouring.
//!
//! Trial `i` draws from `ChaCha8Rng::seed_from_u64(seed)` on stream `i`, so
//! results do not depend on the number of worker threads. A pair enters the
//! random set `W` when `gen_range(0..b) < a` for the inclusion probability `a/b`.

use std::collections::BTreeSet;
use std::thread;

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::exactmath::ExactRatio;
use crate::families::{Family, Pair, PartialPermutation};
use crate::spread::restriction_counts;

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn support(families: &[&Family]) -> Vec<Pair> {
    families
        .iter()
        .flat_map(|f| f.iter().flat_map(|m| m.pairs().iter().copied()))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

fn masks(family: &Family, support: &[Pair]) -> Vec<Vec<u64>> {
    let words = support.len().div_ceil(64).max(1);
    family
        .iter()
        .map(|m| {
            let mut mask = vec![0u64; words];
            for p in m.pairs() {
                let i = support.binary_search(p).expect("pair in support");
                mask[i / 64] |= 1 << (i % 64);
            }
            mask
        })
        .collect()
}

fn within(mask: &[u64], set: &[u64]) -> bool {
    mask.iter().zip(set).all(|(m, s)| m & !s == 0)
}

/// Largest `r` for which `F` is r-spread: `min_X (|F| / |F(X)|)^{1/|X|}` over
/// non-empty `X` inside members. Infinite when every member is empty.
pub fn certified_spreadness(family: &Family) -> f64 {
    let total = family.len() as f64;
    let mut best = f64::INFINITY;
    for size in 1..=family.max_member_size() {
        for count in restriction_counts(family, size).into_values() {
            best = best.min((total / count as f64).powf(1.0 / size as f64));
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub trials: u64,
    pub successes: u64,
    pub estimate: ExactRatio,
    pub estimate_f64: f64,
    /// `sqrt(p̂(1-p̂)/trials)`.
    pub sigma: f64,
    /// Inclusion probability `βδ`.
    pub inclusion: ExactRatio,
    pub beta: ExactRatio,
    pub delta: ExactRatio,
    pub k: usize,
    /// `None` when every member is empty.
    pub r_star: Option<f64>,
    /// `1 - (5/log₂(rδ))^β k`; `None` when vacuous.
    pub bound: Option<f64>,
    pub vacuous: bool,
    /// `estimate - 3σ >= bound`, skipped when vacuous.
    pub holds_with_margin: Option<bool>,
    pub seed: u64,
}

fn containment_bound(r_star: Option<f64>, beta: &ExactRatio, delta: &ExactRatio, k: usize) -> Option<f64> {
    if k == 0 {
        return Some(1.0);
    }
    let r = r_star?;
    let rd = r * delta.to_f64();
    if rd <= 1.0 {
        return None;
    }
    let base = 5.0 / rd.log2();
    if base >= 1.0 {
        return None;
    }
    let bound = 1.0 - base.powf(beta.to_f64()) * k as f64;
    (bound > 0.0).then_some(bound)
}

fn probability_parts(p: &ExactRatio) -> Result<(u64, u64)> {
    let (a, b) = p.to_naturals().ok_or_else(|| invalid("probability must be non-negative"))?;
    match (a.to_u64(), b.to_u64()) {
        (Some(a), Some(b)) => Ok((a, b)),
        _ => Err(invalid(format!("probability {p} has a numerator or denominator beyond 64 bits"))),
    }
}

/// Probability that a `βδ`-random subset of the support contains a member of `F`.
pub fn containment_mc(
    family: &Family,
    beta: &ExactRatio,
    delta: &ExactRatio,
    trials: u64,
    seed: u64,
    threads: usize,
) -> Result<McEstimate> {
    if family.is_empty() {
        return Err(invalid("containment needs a non-empty family"));
    }
    if trials == 0 {
        return Err(invalid("trials must be positive"));
    }
    if !beta.is_positive() || !delta.is_positive() {
        return Err(invalid("beta and delta must be positive"));
    }
    let inclusion = beta * delta;
    if inclusion > ExactRatio::one() {
        return Err(invalid(format!("beta * delta = {inclusion} exceeds 1")));
    }
    let (a, b) = probability_parts(&inclusion)?;
    let ground = support(&[family]);
    let members = masks(family, &ground);
    let words = ground.len().div_ceil(64).max(1);
    let run = |range: std::ops::Range<u64>| -> u64 {
        let mut hits = 0;
        let mut w = vec![0u64; words];
        for trial in range {
            let mut rng = trial_rng(seed, trial);
            w.iter_mut().for_each(|x| *x = 0);
            for i in 0..ground.len() {
                if rng.gen_range(0..b) < a {
                    w[i / 64] |= 1 << (i % 64);
                }
            }
            if members.iter().any(|m| within(m, &w)) {
                hits += 1;
            }
        }
        hits
    };
    let threads = threads.max(1) as u64;
    let successes = if threads == 1 {
        run(0..trials)
    } else {
        let chunk = trials.div_ceil(threads);
        thread::scope(|s| {
            let handles: Vec<_> = (0..threads)
                .map(|i| {
                    let lo = (i * chunk).min(trials);
                    let hi = ((i + 1) * chunk).min(trials);
                    let run = &run;
                    s.spawn(move || run(lo..hi))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("worker panicked")).sum()
        })
    };
    let k = family.max_member_size();
    let r = certified_spreadness(family);
    let r_star = r.is_finite().then_some(r);
    let bound = containment_bound(r_star, beta, delta, k);
    let estimate_f64 = successes as f64 / trials as f64;
    let sigma = (estimate_f64 * (1.0 - estimate_f64) / trials as f64).sqrt();
    Ok(McEstimate {
        trials,
        successes,
        estimate: ExactRatio::new(successes, trials)?,
        estimate_f64,
        sigma,
        inclusion,
        beta: beta.clone(),
        delta: delta.clone(),
        k,
        r_star,
        bound,
        vacuous: bound.is_none(),
        holds_with_margin: bound.map(|b| estimate_f64 - 3.0 * sigma >= b),
        seed,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DisjointWitness {
    pub first: PartialPermutation,
    pub second: PartialPermutation,
    pub agreement: usize,
    pub trial: u64,
}

/// Colours the support pairs uniformly at random and looks for a member of
/// `G1` inside colour 0 and a member of `G2` inside colour 1 agreeing on fewer
/// than `forbidden_overlap` pairs.
pub fn disjoint_witness(
    g1: &Family,
    g2: &Family,
    forbidden_overlap: usize,
    trials: u64,
    seed: u64,
) -> Result<Option<DisjointWitness>> {
    if g1.n() != g2.n() {
        return Err(Error::GroundMismatch(g1.n(), g2.n()));
    }
    let ground = support(&[g1, g2]);
    let (m1, m2) = (masks(g1, &ground), masks(g2, &ground));
    let words = ground.len().div_ceil(64).max(1);
    for trial in 0..trials {
        let mut rng = trial_rng(seed, trial);
        let mut colour = vec![0u64; words];
        for i in 0..ground.len() {
            if rng.gen::<bool>() {
                colour[i / 64] |= 1 << (i % 64);
            }
        }
        let other: Vec<u64> = colour.iter().map(|w| !w).collect();
        let firsts = g1.iter().zip(&m1).filter(|(_, m)| within(m, &other));
        for (a, _) in firsts {
            for (b, _) in g2.iter().zip(&m2).filter(|(_, m)| within(m, &colour)) {
                let agreement = a.intersection_size(b);
                if agreement < forbidden_overlap {
                    return Ok(Some(DisjointWitness { first: a.clone(), second: b.clone(), agreement, trial }));
                }
            }
        }
    }
    Ok(None)
}

/// 200 singletons `{(i, j)}` over `[15]×[15]`, the first 200 pairs in order.
pub fn singleton_instance() -> Family {
    let members = (1..=15usize)
        .flat_map(|i| (1..=15usize).map(move |j| (i, j)))
        .take(200)
        .map(|p| PartialPermutation::new(15, [p]).expect("single pair"));
    Family::new(15, crate::families::Kind::Partial, members).expect("valid singletons")
}
