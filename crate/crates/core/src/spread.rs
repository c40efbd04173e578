//! Spreadness tests, inclusion-maximal spread cores, and the spread
//! approximation pipeline with its dense-piece refinement.
//!
//! A family `F` is r-spread when `|F(X)| <= r^{-|X|} |F|` for every `X`. All
//! comparisons cross-multiply with the numerator and denominator of `r`, so
//! verdicts are exact.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use num_traits::Pow;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::exactmath::{ceil_pow, exceeds_cap, BoundParams, ExactRatio};
use crate::families::{Family, Kind, PartialPermutation};
use crate::peeling::peel;

/// Ratio `p/q > 1` split into naturals for cross-multiplication.
#[derive(Clone, Debug)]
struct Threshold {
    p: BigUint,
    q: BigUint,
    total: BigUint,
}

impl Threshold {
    fn new(r: &ExactRatio, total: usize) -> Result<Self> {
        if *r <= ExactRatio::one() {
            return Err(invalid(format!("spread ratio {r} must exceed 1")));
        }
        let (p, q) = r.to_naturals().expect("positive ratio");
        Ok(Threshold { p, q, total: BigUint::from(total) })
    }

    /// `count · r^size` compared with `|F|`.
    fn scaled(&self, count: usize, size: usize) -> (BigUint, BigUint) {
        let e = size as u32;
        (BigUint::from(count) * Pow::pow(&self.p, e), &self.total * Pow::pow(&self.q, e))
    }

    fn violated(&self, count: usize, size: usize) -> bool {
        let (lhs, rhs) = self.scaled(count, size);
        lhs > rhs
    }

    fn reached(&self, count: usize, size: usize) -> bool {
        let (lhs, rhs) = self.scaled(count, size);
        lhs >= rhs
    }
}

/// `|F(X)|` for every `X` of the given size contained in some member.
pub fn restriction_counts(family: &Family, size: usize) -> BTreeMap<PartialPermutation, usize> {
    let mut counts = BTreeMap::new();
    for m in family.iter() {
        for x in m.subsets(size) {
            *counts.entry(x).or_insert(0) += 1;
        }
    }
    counts
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpreadReport {
    pub r: ExactRatio,
    /// True when no violation was found up to `checked_depth`.
    pub verdict: bool,
    pub witness: Option<PartialPermutation>,
    /// Largest `|X|` searched.
    pub checked_depth: usize,
}

impl SpreadReport {
    /// Clean up to the largest member size, which certifies r-spreadness.
    pub fn certifies(&self, family: &Family) -> bool {
        self.verdict && self.checked_depth >= family.max_member_size()
    }
}

/// First `X` (by size, then lexicographically) with `|F(X)| r^{|X|} > |F|`,
/// searching sizes `1..=depth_cap`. Only subsets of members are candidates,
/// since any other `X` has `|F(X)| = 0`.
pub fn spread_violation(family: &Family, r: &ExactRatio, depth_cap: usize) -> Result<SpreadReport> {
    if family.is_empty() {
        return Err(invalid("spread test needs a non-empty family"));
    }
    let threshold = Threshold::new(r, family.len())?;
    let depth = depth_cap.min(family.max_member_size());
    for size in 1..=depth {
        for (x, count) in restriction_counts(family, size) {
            if threshold.violated(count, size) {
                return Ok(SpreadReport { r: r.clone(), verdict: false, witness: Some(x), checked_depth: size });
            }
        }
    }
    Ok(SpreadReport { r: r.clone(), verdict: true, witness: None, checked_depth: depth })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpreadCore {
    pub set: PartialPermutation,
    /// `F(X)` for the chosen `X`.
    pub core: Family,
    /// Number of inclusion-maximal qualifying sets, the chosen one included.
    pub alternatives: usize,
}

/// An inclusion-maximal `X` with `|F(X)| >= alpha^{-|X|} |F|`, grown from `∅`
/// by the smallest qualifying extension (fewest added pairs, then
/// lexicographic) until no qualifying proper superset remains.
pub fn spread_core(family: &Family, alpha: &ExactRatio) -> Result<SpreadCore> {
    if family.is_empty() {
        return Err(invalid("spread core needs a non-empty family"));
    }
    let threshold = Threshold::new(alpha, family.len())?;
    let mut x = PartialPermutation::empty(family.n());
    loop {
        let traces = family.restrict(&x);
        let mut extension = None;
        'sizes: for size in 1..=traces.max_member_size() {
            for (z, count) in restriction_counts(&traces, size) {
                if threshold.reached(count, x.len() + size) {
                    extension = Some(z);
                    break 'sizes;
                }
            }
        }
        match extension {
            Some(z) => x = x.union(&z).expect("extension lies inside a member"),
            None => break,
        }
    }
    let alternatives = count_maximal_qualifying(family, &threshold);
    let core = family.restrict(&x);
    Ok(SpreadCore { set: x, core, alternatives })
}

fn count_maximal_qualifying(family: &Family, threshold: &Threshold) -> usize {
    let mut qualifying: Vec<PartialPermutation> = vec![PartialPermutation::empty(family.n())];
    for size in 1..=family.max_member_size() {
        qualifying.extend(
            restriction_counts(family, size)
                .into_iter()
                .filter(|(_, c)| threshold.reached(*c, size))
                .map(|(x, _)| x),
        );
    }
    qualifying
        .iter()
        .filter(|x| !qualifying.iter().any(|y| y.len() > x.len() && x.is_subset_of(y)))
        .count()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// The next core set exceeded the size cap.
    Oversized,
    EmptyResidual,
    ResidualBelowFloor,
    RoundCap,
    NoDensePiece,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ApproxStep {
    pub step: usize,
    pub residual_size: usize,
    pub set: Option<PartialPermutation>,
    pub core_size: usize,
    pub alternatives: usize,
    pub stop: Option<StopReason>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoreRecord {
    /// The cover set `B`.
    pub set: PartialPermutation,
    /// `F_B`, the members of the residual containing `B` when it was chosen.
    pub family: Family,
    /// `F_B(B)` passed a full-depth spread test when recorded.
    pub certified: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ApproximationResult {
    pub cover: Family,
    pub cores: Vec<CoreRecord>,
    pub remainder: Family,
    pub params: BoundParams,
    /// Spread ratio the cores were certified against.
    pub core_ratio: ExactRatio,
    pub trace: Vec<ApproxStep>,
}

impl ApproximationResult {
    /// `F ∖ F' ⊆ Σ_n[S]`, by membership scan.
    pub fn coverage_holds(&self, family: &Family) -> bool {
        family
            .iter()
            .filter(|m| !self.remainder.contains(m))
            .all(|m| self.cover.iter().any(|s| s.is_subset_of(m)))
    }

    /// Re-runs the spread test on every recorded `F_B(B)`.
    pub fn cores_certified(&self) -> Result<bool> {
        for core in &self.cores {
            let traces = core.family.restrict(&core.set);
            if !spread_violation(&traces, &self.core_ratio, traces.max_member_size())?.certifies(&traces) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn certify(traces: &Family, r: &ExactRatio) -> Result<bool> {
    Ok(spread_violation(traces, r, traces.max_member_size())?.certifies(traces))
}

/// Greedy cover: repeatedly take a spread core `S_i` of the residual, stop
/// once `|S_i| > (1+ε)t` or the residual is empty, otherwise remove `F^i[S_i]`.
pub fn spread_approximate(family: &Family, t: usize, epsilon: &ExactRatio, r: &ExactRatio) -> Result<ApproximationResult> {
    if family.kind() != Kind::Full {
        return Err(crate::error::Error::NotFull);
    }
    if family.is_empty() {
        return Err(invalid("approximation needs a non-empty family"));
    }
    let params = BoundParams::desk(family.n() as u64, t as u64, epsilon.clone(), r.clone())?;
    let mut residual = family.clone();
    let mut cover = Vec::new();
    let mut cores = Vec::new();
    let mut trace = Vec::new();
    loop {
        let step = trace.len() + 1;
        if residual.is_empty() {
            trace.push(stop_step(step, 0, StopReason::EmptyResidual));
            break;
        }
        let core = spread_core(&residual, r)?;
        if exceeds_cap(core.set.len() as u64, t as u64, epsilon) {
            trace.push(ApproxStep {
                step,
                residual_size: residual.len(),
                set: Some(core.set),
                core_size: core.core.len(),
                alternatives: core.alternatives,
                stop: Some(StopReason::Oversized),
            });
            break;
        }
        let chosen = residual.select(&core.set);
        let certified = certify(&core.core, r)?;
        trace.push(ApproxStep {
            step,
            residual_size: residual.len(),
            set: Some(core.set.clone()),
            core_size: chosen.len(),
            alternatives: core.alternatives,
            stop: None,
        });
        residual = residual.minus(&chosen);
        cover.push(core.set.clone());
        cores.push(CoreRecord { set: core.set, family: chosen, certified });
    }
    Ok(ApproximationResult {
        cover: Family::new(family.n(), Kind::Partial, cover)?,
        cores,
        remainder: residual,
        params,
        core_ratio: r.clone(),
        trace,
    })
}

fn stop_step(step: usize, residual_size: usize, reason: StopReason) -> ApproxStep {
    ApproxStep { step, residual_size, set: None, core_size: 0, alternatives: 0, stop: Some(reason) }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DensePiece {
    /// A `t'`-subset of a surviving peeled set.
    pub set: PartialPermutation,
    /// `|F[X]| / |F|`.
    pub density: ExactRatio,
    pub count: usize,
    /// Size of the peeled layer `T_x` the set was drawn from.
    pub layer_size: usize,
}

/// Approximate, peel the cover down to layer `x` with threshold `t'`, then
/// search every `t'`-subset of every surviving set for the largest `|F[X]|`.
///
/// Returns `None` when the approximation or the peeled layer is empty.
pub fn dense_piece(family: &Family, params: &BoundParams) -> Result<Option<DensePiece>> {
    params.validate()?;
    let approx = spread_approximate(family, params.t as usize, &params.epsilon, &params.r)?;
    if approx.cover.is_empty() {
        return Ok(None);
    }
    let t_prime = params.t_prime as usize;
    let q = (params.q as usize).max(approx.cover.max_member_size());
    let stop_k = (params.x as usize).min(q - t_prime);
    let trace = peel(&approx.cover, t_prime, q, stop_k)?;
    let layer = &trace.bottom().expect("peel yields at least one layer").family;
    let mut candidates = BTreeSet::new();
    for m in layer.iter() {
        candidates.extend(m.subsets(t_prime));
    }
    let mut best: Option<(PartialPermutation, usize)> = None;
    for x in candidates {
        let count = family.iter().filter(|m| x.is_subset_of(m)).count();
        if best.as_ref().map_or(true, |(_, c)| count > *c) {
            best = Some((x, count));
        }
    }
    Ok(best.map(|(set, count)| DensePiece {
        set,
        density: ExactRatio::new(count as i64, family.len() as i64).expect("non-empty family"),
        count,
        layer_size: layer.len(),
    }))
}

/// Size cap `t + ⌈n^{1-ε/6}⌉` used by the refined approximation.
pub fn refined_size_cap(params: &BoundParams) -> Result<u64> {
    let exponent = &ExactRatio::one() - &(&params.epsilon / &ExactRatio::from_integer(6));
    Ok(params.t + ceil_pow(params.n, &exponent)?)
}

/// Repeatedly extracts a dense piece `X`, extends it to an inclusion-maximal
/// `Y ⊇ X` whose restriction meets the `r2` threshold relative to `F(X)`, and
/// removes `F[Y]`, until the residual has at most `residual_floor` members,
/// `round_cap` rounds ran, or no dense piece remains.
pub fn refine_approximation(
    family: &Family,
    params: &BoundParams,
    r2: &ExactRatio,
    round_cap: usize,
    residual_floor: usize,
) -> Result<ApproximationResult> {
    if family.kind() != Kind::Full {
        return Err(crate::error::Error::NotFull);
    }
    params.validate()?;
    let cap = refined_size_cap(params)?;
    let mut residual = family.clone();
    let mut cover = Vec::new();
    let mut cores = Vec::new();
    let mut trace = Vec::new();
    loop {
        let step = trace.len() + 1;
        if residual.len() <= residual_floor {
            let reason = if residual.is_empty() { StopReason::EmptyResidual } else { StopReason::ResidualBelowFloor };
            trace.push(stop_step(step, residual.len(), reason));
            break;
        }
        if cores.len() >= round_cap {
            trace.push(stop_step(step, residual.len(), StopReason::RoundCap));
            break;
        }
        let Some(piece) = dense_piece(&residual, params)? else {
            trace.push(stop_step(step, residual.len(), StopReason::NoDensePiece));
            break;
        };
        let extension = spread_core(&residual.restrict(&piece.set), r2)?;
        let y = piece.set.union(&extension.set).expect("extension is disjoint from the piece");
        if y.len() as u64 > cap {
            trace.push(ApproxStep {
                step,
                residual_size: residual.len(),
                set: Some(y),
                core_size: extension.core.len(),
                alternatives: extension.alternatives,
                stop: Some(StopReason::Oversized),
            });
            break;
        }
        let chosen = residual.select(&y);
        let certified = certify(&extension.core, r2)?;
        trace.push(ApproxStep {
            step,
            residual_size: residual.len(),
            set: Some(y.clone()),
            core_size: chosen.len(),
            alternatives: extension.alternatives,
            stop: None,
        });
        residual = residual.minus(&chosen);
        cover.push(y.clone());
        cores.push(CoreRecord { set: y, family: chosen, certified });
    }
    Ok(ApproximationResult {
        cover: Family::new(family.n(), Kind::Partial, cover)?,
        cores,
        remainder: residual,
        params: params.clone(),
        core_ratio: r2.clone(),
        trace,
    })
}
