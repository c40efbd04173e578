//! Maximal t-intersecting families and the layer-peeling procedure.
//!
//! A trace starts from `T_{q-t} = maximalize(S)` and walks down: `W_k` is the
//! top layer (members of size `t+k`) of `T_k`, and `T_{k-1}` is the
//! maximalization of `T_k ∖ W_k`. [`audit_key_reduction`] checks the three
//! structural properties such traces must have.

use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::exactmath::{falling, n as nat, ExactRatio};
use crate::families::{Family, Kind, PartialPermutation};
use crate::spread::spread_violation;

/// Shrinks members of a t-intersecting family until no member can lose a
/// pair without breaking t-intersection, then drops supersets.
///
/// Members are visited in canonical order; removals are tried from the last
/// pair backwards and repeated to a fixpoint.
pub fn maximalize(s: &Family, t: usize) -> Result<Family> {
    if !s.is_t_intersecting(t).holds {
        return Err(Error::NotIntersecting { t });
    }
    let mut members: Vec<PartialPermutation> = s.members().to_vec();
    loop {
        members.sort_unstable();
        members.dedup();
        let mut changed = false;
        for i in 0..members.len() {
            'shrink: loop {
                let current = members[i].clone();
                for idx in (0..current.len()).rev() {
                    let candidate = current.without_index(idx);
                    if candidate.len() < t {
                        continue;
                    }
                    let keeps = members
                        .iter()
                        .enumerate()
                        .all(|(j, m)| j == i || candidate.intersection_size(m) >= t);
                    if keeps {
                        members[i] = candidate;
                        changed = true;
                        continue 'shrink;
                    }
                }
                break;
            }
        }
        if !changed {
            break;
        }
    }
    let kept: Vec<PartialPermutation> = members
        .iter()
        .filter(|m| !members.iter().any(|o| o.len() < m.len() && o.is_subset_of(m)))
        .cloned()
        .collect();
    Family::new(s.n(), Kind::Partial, kept)
}

/// Checks the four contract clauses of [`maximalize`] against its input.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MaximalityCheck {
    pub intersecting: bool,
    pub antichain: bool,
    pub maximal: bool,
    pub refines_input: bool,
}

impl MaximalityCheck {
    pub fn passed(&self) -> bool {
        self.intersecting && self.antichain && self.maximal && self.refines_input
    }
}

pub fn check_maximal(original: &Family, output: &Family, t: usize) -> MaximalityCheck {
    let members = output.members();
    let maximal = members.iter().all(|m| {
        (0..m.len()).all(|size| {
            m.subsets(size)
                .all(|x| members.iter().any(|other| x.intersection_size(other) < t))
        })
    });
    MaximalityCheck {
        intersecting: output.is_t_intersecting(t).holds,
        antichain: output.is_antichain(),
        maximal,
        refines_input: members
            .iter()
            .all(|m| original.iter().any(|s| m.is_subset_of(s))),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PeelLayer {
    pub k: usize,
    /// `T_k`
    pub family: Family,
    /// `W_k`, the members of `T_k` of size exactly `t + k`.
    pub top: Family,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PeelingTrace {
    pub t: usize,
    pub q: usize,
    pub stop_k: usize,
    /// Ordered from `k = q - t` down to `k = stop_k`.
    pub layers: Vec<PeelLayer>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub audit: Option<AuditReport>,
}

impl PeelingTrace {
    pub fn layer(&self, k: usize) -> Option<&PeelLayer> {
        self.layers.iter().find(|l| l.k == k)
    }

    pub fn bottom(&self) -> Option<&PeelLayer> {
        self.layers.last()
    }

    pub fn with_audit(mut self, audit: AuditReport) -> Self {
        self.audit = Some(audit);
        self
    }

    /// Compact JSON view: layer sizes, optionally the members, and the audit.
    pub fn summary(&self, with_members: bool) -> PeelSummary<'_> {
        PeelSummary {
            t: self.t,
            q: self.q,
            stop_k: self.stop_k,
            layers: self
                .layers
                .iter()
                .map(|l| LayerSummary {
                    k: l.k,
                    size: l.family.len(),
                    top_size: l.top.len(),
                    members: with_members.then_some(&l.family),
                })
                .collect(),
            audit: self.audit.as_ref(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct PeelSummary<'a> {
    pub t: usize,
    pub q: usize,
    pub stop_k: usize,
    pub layers: Vec<LayerSummary<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub audit: Option<&'a AuditReport>,
}

#[derive(Debug, Serialize)]
pub struct LayerSummary<'a> {
    pub k: usize,
    pub size: usize,
    pub top_size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub members: Option<&'a Family>,
}

/// Peels a t-intersecting family whose member sizes lie in `[t, q]`.
pub fn peel(s: &Family, t: usize, q: usize, stop_k: usize) -> Result<PeelingTrace> {
    if q < t {
        return Err(invalid(format!("q = {q} below t = {t}")));
    }
    if stop_k > q - t {
        return Err(invalid(format!("stop_k = {stop_k} exceeds q - t = {}", q - t)));
    }
    if let Some(m) = s.iter().find(|m| m.len() < t || m.len() > q) {
        return Err(invalid(format!("member {m} has size {} outside [{t}, {q}]", m.len())));
    }
    let mut current = maximalize(s, t)?;
    let mut layers = Vec::new();
    for k in (stop_k..=q - t).rev() {
        let top = current.layer(t + k);
        let next = (k > stop_k).then(|| current.minus(&top));
        layers.push(PeelLayer { k, family: current, top });
        match next {
            Some(rest) => current = maximalize(&rest, t)?,
            None => break,
        }
    }
    Ok(PeelingTrace { t, q, stop_k, layers, audit: None })
}

/// `|W_k| (n-t-k)! / (n-t)!`.
pub fn layer_weight(top: &Family, n: usize, t: usize, k: usize) -> Result<ExactRatio> {
    if t + k > n {
        return Err(invalid(format!("t + k = {} exceeds n = {n}", t + k)));
    }
    ExactRatio::from_naturals(&nat(top.len() as u64), &falling((n - t) as u64, k as u64))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SpreadClause {
    /// `α = k + 1/2` is not above 1 at `k = 0`, so the clause says nothing checkable.
    NotApplicable,
    Exhaustive { checked: usize, counterexample: Option<PartialPermutation> },
    Sampled { checked: usize, total: usize, counterexample: Option<PartialPermutation> },
}

impl SpreadClause {
    pub fn passed(&self) -> bool {
        match self {
            SpreadClause::NotApplicable => true,
            SpreadClause::Exhaustive { counterexample, .. } | SpreadClause::Sampled { counterexample, .. } => {
                counterexample.is_none()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LayerAudit {
    pub k: usize,
    /// Every member of `T_k` has size at most `t + k`.
    pub sizes: bool,
    /// `F[T_{k+1}] ⊆ F[T_k] ∪ F[W_{k+1}]`; `None` on the top layer.
    pub coverage: Option<bool>,
    /// No `X` with `|X| <= t+k-1` leaves `W_k(X)` (k + 1/2)-spread.
    pub spread: SpreadClause,
}

impl LayerAudit {
    pub fn passed(&self) -> bool {
        self.sizes && self.coverage.unwrap_or(true) && self.spread.passed()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub layers: Vec<LayerAudit>,
    pub passed: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct AuditOptions {
    /// Maximum number of sets `X` examined per layer before sampling.
    pub budget: usize,
    pub seed: u64,
}

impl Default for AuditOptions {
    fn default() -> Self {
        AuditOptions { budget: 50_000, seed: 0 }
    }
}

/// Instance check of the key-reduction properties on a trace. `family` is
/// the permutation family used for clause (ii), typically `Σ_n` for small `n`.
pub fn audit_key_reduction(trace: &PeelingTrace, family: &Family, options: AuditOptions) -> Result<AuditReport> {
    let t = trace.t;
    let mut layers = Vec::new();
    for (idx, layer) in trace.layers.iter().enumerate() {
        let k = layer.k;
        let sizes = layer.family.iter().all(|m| m.len() <= t + k);
        let coverage = if idx == 0 {
            None
        } else {
            let upper = &trace.layers[idx - 1];
            let lhs = family.select_union(&upper.family)?;
            let rhs = family.select_union(&layer.family)?.union(&family.select_union(&upper.top)?)?;
            Some(lhs.is_subfamily_of(&rhs))
        };
        let spread = spread_clause(&layer.top, t, k, options)?;
        layers.push(LayerAudit { k, sizes, coverage, spread });
    }
    let passed = layers.iter().all(LayerAudit::passed);
    Ok(AuditReport { layers, passed })
}

fn spread_clause(top: &Family, t: usize, k: usize, options: AuditOptions) -> Result<SpreadClause> {
    if k == 0 {
        return Ok(SpreadClause::NotApplicable);
    }
    let alpha = ExactRatio::new(2 * k as i64 + 1, 2)?;
    let max_size = t + k - 1;
    let mut candidates = BTreeSet::new();
    for m in top.iter() {
        for size in 0..=max_size.min(m.len()) {
            candidates.extend(m.subsets(size));
        }
    }
    let candidates: Vec<PartialPermutation> = candidates.into_iter().collect();
    let total = candidates.len();
    let chosen: Vec<&PartialPermutation> = if total <= options.budget {
        candidates.iter().collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
        let mut idx = sample(&mut rng, total, options.budget).into_vec();
        idx.sort_unstable();
        idx.into_iter().map(|i| &candidates[i]).collect()
    };
    let mut counterexample = None;
    for x in &chosen {
        let restricted = top.restrict(x);
        let report = spread_violation(&restricted, &alpha, restricted.max_member_size())?;
        if !report.verdict {
            counterexample = Some((*x).clone());
            break;
        }
    }
    Ok(if total <= options.budget {
        SpreadClause::Exhaustive { checked: chosen.len(), counterexample }
    } else {
        SpreadClause::Sampled { checked: chosen.len(), total, counterexample }
    })
}
