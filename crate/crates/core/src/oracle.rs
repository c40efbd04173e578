//! Exact small-case ground truth: maximum t-intersecting families of `Σ_n`
//! as maximum cliques of the agreement graph, classification of families as
//! subfamilies of some `σ A_k τ`, and the stability gap.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::exactmath::{argmax_ak, ExactRatio, Natural};
use crate::families::{build_ak, Family, FamilySpec, FullPermutation, Kind, PartialPermutation, Point};

/// Largest `n` for which the agreement graph is built.
pub const MAX_ORACLE_N: usize = 7;

#[derive(Clone, Debug, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(len: usize) -> Self {
        Bits(vec![0; len.div_ceil(64)])
    }

    fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn remove(&mut self, i: usize) {
        self.0[i / 64] &= !(1 << (i % 64));
    }

    fn contains(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn first(&self) -> Option<usize> {
        self.0
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, &w)| i * 64 + w.trailing_zeros() as usize)
    }

    fn and(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    fn and_not(&mut self, other: &Bits) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a &= !b;
        }
    }

    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(i * 64 + b)
            })
        })
    }
}

/// `Σ_n` in lexicographic order, `σ ~ τ` iff they agree on at least `t` points.
#[derive(Clone, Debug)]
pub struct AgreementGraph {
    n: usize,
    t: usize,
    vertices: Vec<FullPermutation>,
    adjacency: Vec<Bits>,
}

impl AgreementGraph {
    pub fn new(n: usize, t: usize) -> Result<Self> {
        if n == 0 || n > MAX_ORACLE_N {
            return Err(Error::TooLarge(format!("agreement graph needs 1 <= n <= {MAX_ORACLE_N}, got {n}")));
        }
        let vertices = FullPermutation::all(n)?;
        let images: Vec<Vec<usize>> = vertices.iter().map(|p| p.images().collect()).collect();
        let size = vertices.len();
        let mut adjacency = vec![Bits::new(size); size];
        for a in 0..size {
            for b in a + 1..size {
                let agree = images[a].iter().zip(&images[b]).filter(|(x, y)| x == y).count();
                if agree >= t {
                    adjacency[a].insert(b);
                    adjacency[b].insert(a);
                }
            }
        }
        Ok(AgreementGraph { n, t, vertices, adjacency })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex(&self, i: usize) -> &FullPermutation {
        &self.vertices[i]
    }

    pub fn index_of(&self, p: &FullPermutation) -> Option<usize> {
        self.vertices.binary_search(p).ok()
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].contains(b)
    }

    pub fn degree(&self, a: usize) -> usize {
        self.adjacency[a].count()
    }

    fn family(&self, clique: &[usize]) -> Family {
        Family::from_permutations(self.n, clique.iter().map(|&v| self.vertices[v].clone())).expect("vertices share n")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub k: usize,
    pub sigma: FullPermutation,
    pub tau: FullPermutation,
    /// The pairs `(τ⁻¹(i), σ(i))`, `i ∈ [t+2k]`, at least `t+k` of which every member contains.
    pub window: PartialPermutation,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub family: Family,
    pub classification: Option<Classification>,
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleResult {
    pub n: usize,
    pub t: usize,
    pub max_size: usize,
    /// `max_k |A_k|`, the incumbent the search starts from.
    #[serde(serialize_with = "crate::exactmath::serialize_natural")]
    pub conjectured: Natural,
    pub conjectured_k: u64,
    pub witness_count: usize,
    pub witnesses: Vec<Witness>,
    pub classified: Vec<bool>,
    pub nodes: u64,
    pub budget: u64,
    pub budget_exhausted: bool,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl OracleResult {
    pub fn all_classified(&self) -> bool {
        self.classified.iter().all(|&c| c)
    }

    /// Completed and equal to `max_k |A_k|`.
    pub fn matches_conjecture(&self) -> bool {
        !self.budget_exhausted && Natural::from(self.max_size) == self.conjectured
    }
}

#[derive(Clone, Copy, Debug)]
pub struct OracleOptions {
    /// Search-tree nodes.
    pub budget: u64,
    /// Collect every maximum clique rather than only beating the incumbent.
    pub enumerate: bool,
}

impl OracleOptions {
    pub fn exhaustive(budget: u64) -> Self {
        OracleOptions { budget, enumerate: true }
    }

    pub fn improve_only(budget: u64) -> Self {
        OracleOptions { budget, enumerate: false }
    }
}

struct CliqueSearch<'g> {
    graph: &'g AgreementGraph,
    best: usize,
    found: Vec<Vec<usize>>,
    enumerate: bool,
    nodes: u64,
    budget: u64,
    exhausted: bool,
}

impl CliqueSearch<'_> {
    /// Greedy colouring of `cand`; returns vertices sorted by colour with their colour numbers.
    fn colour(&self, cand: &Bits) -> (Vec<usize>, Vec<usize>) {
        let mut order = Vec::new();
        let mut colours = Vec::new();
        let mut uncoloured = cand.clone();
        let mut colour = 0;
        while !uncoloured.is_empty() {
            colour += 1;
            let mut q = uncoloured.clone();
            while let Some(v) = q.first() {
                q.remove(v);
                q.and_not(&self.graph.adjacency[v]);
                uncoloured.remove(v);
                order.push(v);
                colours.push(colour);
            }
        }
        (order, colours)
    }

    fn expand(&mut self, clique: &mut Vec<usize>, mut cand: Bits) {
        self.nodes += 1;
        if self.nodes > self.budget {
            self.exhausted = true;
            return;
        }
        let (order, colours) = self.colour(&cand);
        for idx in (0..order.len()).rev() {
            if self.exhausted {
                return;
            }
            let reach = clique.len() + colours[idx];
            if reach < self.best || (!self.enumerate && reach == self.best) {
                return;
            }
            let v = order[idx];
            clique.push(v);
            let next = cand.and(&self.graph.adjacency[v]);
            if next.is_empty() {
                self.record(clique);
            } else {
                self.expand(clique, next);
            }
            clique.pop();
            cand.remove(v);
        }
    }

    fn record(&mut self, clique: &[usize]) {
        if clique.len() > self.best {
            self.best = clique.len();
            self.found.clear();
        }
        if clique.len() == self.best && (self.enumerate || self.found.is_empty()) {
            let mut c = clique.to_vec();
            c.sort_unstable();
            self.found.push(c);
        }
    }
}

/// Smallest image of the family under the two-sided action, as sorted image lists.
/// The orbit minimum contains the identity, so only actions sending some member
/// to the identity are tried.
fn canonical_form(members: &[Vec<Point>]) -> Vec<Vec<Point>> {
    let n = members.first().map_or(0, Vec::len);
    let sigmas = FullPermutation::all(n).expect("oracle sizes are enumerable");
    let mut best: Option<Vec<Vec<Point>>> = None;
    for pi in members {
        let mut pi_inv = vec![0 as Point; n];
        for (i, &v) in pi.iter().enumerate() {
            pi_inv[usize::from(v) - 1] = (i + 1) as Point;
        }
        for sigma in &sigmas {
            let s: Vec<Point> = sigma.images().map(|v| v as Point).collect();
            // τ = π⁻¹ σ⁻¹, so σ ρ τ (i) = σ(ρ(π⁻¹(σ⁻¹(i))))
            let mut s_inv = vec![0 as Point; n];
            for (i, &v) in s.iter().enumerate() {
                s_inv[usize::from(v) - 1] = (i + 1) as Point;
            }
            let tau: Vec<Point> = s_inv.iter().map(|&i| pi_inv[usize::from(i) - 1]).collect();
            let mut image: Vec<Vec<Point>> = members
                .iter()
                .map(|rho| tau.iter().map(|&i| s[usize::from(rho[usize::from(i) - 1]) - 1]).collect())
                .collect();
            image.sort_unstable();
            if best.as_ref().map_or(true, |b| image < *b) {
                best = Some(image);
            }
        }
    }
    best.unwrap_or_default()
}

pub fn max_t_intersecting(n: usize, t: usize, budget: u64) -> Result<OracleResult> {
    max_t_intersecting_with(n, t, OracleOptions::exhaustive(budget))
}

/// Maximum cliques through the identity, seeded with `A_k` for the best `k`,
/// reported up to the two-sided action with a classification for each.
pub fn max_t_intersecting_with(n: usize, t: usize, options: OracleOptions) -> Result<OracleResult> {
    if t == 0 || t > n {
        return Err(invalid(format!("need 1 <= t <= n, got t={t}, n={n}")));
    }
    let start = Instant::now();
    let graph = AgreementGraph::new(n, t)?;
    let (conjectured_k, conjectured) = argmax_ak(n as u64, t as u64)?;
    let seed = build_ak(&FamilySpec::untwisted(n, t, conjectured_k as usize)?)?;
    let seed_clique: Vec<usize> = seed
        .iter()
        .map(|m| graph.index_of(&m.to_full().expect("full member")).expect("vertex exists"))
        .collect();
    let identity = graph.index_of(&FullPermutation::identity(n)).expect("identity is a vertex");
    let mut search = CliqueSearch {
        graph: &graph,
        best: seed_clique.len(),
        found: if options.enumerate { Vec::new() } else { vec![seed_clique] },
        enumerate: options.enumerate,
        nodes: 0,
        budget: options.budget,
        exhausted: false,
    };
    let mut clique = vec![identity];
    let cand = graph.adjacency[identity].clone();
    if cand.is_empty() {
        search.record(&clique);
    } else {
        search.expand(&mut clique, cand);
    }
    let mut canon = BTreeSet::new();
    for c in &search.found {
        let members: Vec<Vec<Point>> = c.iter().map(|&v| graph.vertices[v].images().map(|x| x as Point).collect()).collect();
        canon.insert(canonical_form(&members));
    }
    let mut witnesses = Vec::new();
    for members in canon {
        let perms = members
            .into_iter()
            .map(|imgs| FullPermutation::from_images(imgs.into_iter().map(usize::from)))
            .collect::<Result<Vec<_>>>()?;
        let family = Family::from_permutations(n, perms)?;
        let classification = classify_extremal(&family, t)?;
        witnesses.push(Witness { family, classification });
    }
    let classified = witnesses.iter().map(|w| w.classification.is_some()).collect();
    Ok(OracleResult {
        n,
        t,
        max_size: search.best,
        conjectured,
        conjectured_k,
        witness_count: witnesses.len(),
        witnesses,
        classified,
        nodes: search.nodes,
        budget: options.budget,
        budget_exhausted: search.exhausted,
        elapsed: start.elapsed(),
    })
}

/// A `(k, σ, τ)` with `F ⊆ σ A_k τ`, smallest `k` first, if any.
///
/// `σ A_k τ` is the set of permutations containing at least `t+k` pairs of the
/// window `P = {(τ⁻¹(i), σ(i)) : i ∈ [t+2k]}`, so the search is over partial
/// permutations `P` built from pairs the members actually use; unused window
/// slots are padded afterwards.
pub fn classify_extremal(family: &Family, t: usize) -> Result<Option<Classification>> {
    if family.kind() != Kind::Full {
        return Err(Error::NotFull);
    }
    let n = family.n();
    if t > n {
        return Ok(None);
    }
    let pairs: Vec<(Point, Point)> = family
        .iter()
        .flat_map(|m| m.pairs().iter().copied())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if pairs.len() > 128 {
        return Err(Error::TooLarge(format!("{} distinct pairs exceed the classifier's mask width", pairs.len())));
    }
    let masks: Vec<u128> = family
        .iter()
        .map(|m| {
            m.pairs()
                .iter()
                .map(|p| 1u128 << pairs.binary_search(p).expect("pair collected"))
                .fold(0, |a, b| a | b)
        })
        .collect();
    for k in 0..=(n - t) / 2 {
        let mut search = WindowSearch {
            pairs: &pairs,
            masks: &masks,
            need: t + k,
            slots: t + 2 * k,
            hits: vec![0; masks.len()],
            chosen: Vec::new(),
        };
        if search.run(0) {
            let chosen: Vec<(Point, Point)> = search.chosen.iter().map(|&i| pairs[i]).collect();
            return Ok(Some(reconstruct(n, t, k, &chosen)?));
        }
    }
    Ok(None)
}

struct WindowSearch<'a> {
    pairs: &'a [(Point, Point)],
    masks: &'a [u128],
    need: usize,
    slots: usize,
    hits: Vec<usize>,
    chosen: Vec<usize>,
}

impl WindowSearch<'_> {
    fn compatible(&self, i: usize) -> bool {
        let (a, b) = self.pairs[i];
        self.chosen.iter().all(|&c| self.pairs[c].0 != a && self.pairs[c].1 != b)
    }

    fn available(&self, mask: u128, excluded: u128) -> usize {
        let mut free = mask & !excluded;
        let mut count = 0;
        while free != 0 {
            let i = free.trailing_zeros() as usize;
            free &= free - 1;
            if self.compatible(i) {
                count += 1;
            }
        }
        count
    }

    /// `excluded` holds pairs already chosen or ruled out on this branch.
    fn run(&mut self, excluded: u128) -> bool {
        let open = self.slots - self.chosen.len();
        let mut target = None;
        for (m, &mask) in self.masks.iter().enumerate() {
            if self.hits[m] >= self.need {
                continue;
            }
            if self.hits[m] + open.min(self.available(mask, excluded)) < self.need {
                return false;
            }
            if target.is_none() {
                target = Some(m);
            }
        }
        let Some(m) = target else {
            return true;
        };
        let mut excluded = excluded;
        let mut free = self.masks[m] & !excluded;
        while free != 0 {
            let i = free.trailing_zeros() as usize;
            free &= free - 1;
            if !self.compatible(i) {
                continue;
            }
            self.chosen.push(i);
            let bit = 1u128 << i;
            for (h, &mask) in self.hits.iter_mut().zip(self.masks) {
                if mask & bit != 0 {
                    *h += 1;
                }
            }
            if self.run(excluded | bit) {
                return true;
            }
            for (h, &mask) in self.hits.iter_mut().zip(self.masks) {
                if mask & bit != 0 {
                    *h -= 1;
                }
            }
            self.chosen.pop();
            excluded |= bit;
        }
        false
    }
}

fn reconstruct(n: usize, t: usize, k: usize, chosen: &[(Point, Point)]) -> Result<Classification> {
    let m = t + 2 * k;
    let mut window: Vec<(usize, usize)> = chosen.iter().map(|&(a, b)| (usize::from(a), usize::from(b))).collect();
    let used_dom: BTreeSet<usize> = window.iter().map(|p| p.0).collect();
    let used_img: BTreeSet<usize> = window.iter().map(|p| p.1).collect();
    let mut free_dom = (1..=n).filter(|d| !used_dom.contains(d));
    let mut free_img = (1..=n).filter(|e| !used_img.contains(e));
    while window.len() < m {
        window.push((free_dom.next().expect("m <= n"), free_img.next().expect("m <= n")));
    }
    window.sort_unstable();
    let mut tau = vec![0; n];
    let mut sigma = vec![0; n];
    for (i, &(d, e)) in window.iter().enumerate() {
        tau[d - 1] = i + 1;
        sigma[i] = e;
    }
    let rest_dom = (1..=n).filter(|&d| tau[d - 1] == 0).collect::<Vec<_>>();
    for (offset, d) in rest_dom.into_iter().enumerate() {
        tau[d - 1] = m + offset + 1;
    }
    let used: BTreeSet<usize> = sigma[..m].iter().copied().collect();
    for (slot, e) in (m..n).zip((1..=n).filter(|e| !used.contains(e))) {
        sigma[slot] = e;
    }
    Ok(Classification {
        k,
        sigma: FullPermutation::from_images(sigma)?,
        tau: FullPermutation::from_images(tau)?,
        window: PartialPermutation::new(n, window)?,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilityReport {
    pub n: usize,
    pub t: usize,
    pub max_size: usize,
    pub best_unclassified_size: usize,
    pub best_unclassified: Option<Family>,
    /// `best_unclassified_size / max_size`.
    pub ratio: ExactRatio,
    pub maximal_cliques: u64,
    pub nodes: u64,
    pub budget_exhausted: bool,
    #[serde(skip)]
    pub elapsed: Duration,
}

struct MaximalCliques<'g> {
    graph: &'g AgreementGraph,
    t: usize,
    nodes: u64,
    budget: u64,
    exhausted: bool,
    cliques: u64,
    max_size: usize,
    best_unclassified: Option<Vec<usize>>,
    error: Option<Error>,
}

impl MaximalCliques<'_> {
    fn visit(&mut self, r: &mut Vec<usize>, mut p: Bits, mut x: Bits) {
        self.nodes += 1;
        if self.nodes > self.budget {
            self.exhausted = true;
            return;
        }
        if p.is_empty() {
            if x.is_empty() {
                self.report(r);
            }
            return;
        }
        let pivot = p
            .iter()
            .chain(x.iter())
            .max_by_key(|&u| p.and(&self.graph.adjacency[u]).count())
            .expect("p is non-empty");
        let mut branch = p.clone();
        branch.and_not(&self.graph.adjacency[pivot]);
        for v in branch.iter().collect::<Vec<_>>() {
            if self.exhausted || self.error.is_some() {
                return;
            }
            r.push(v);
            self.visit(r, p.and(&self.graph.adjacency[v]), x.and(&self.graph.adjacency[v]));
            r.pop();
            p.remove(v);
            x.insert(v);
        }
    }

    fn report(&mut self, clique: &[usize]) {
        self.cliques += 1;
        self.max_size = self.max_size.max(clique.len());
        let current = self.best_unclassified.as_ref().map_or(0, Vec::len);
        if clique.len() <= current {
            return;
        }
        match classify_extremal(&self.graph.family(clique), self.t) {
            Ok(None) => self.best_unclassified = Some(clique.to_vec()),
            Ok(Some(_)) => {}
            Err(e) => self.error = Some(e),
        }
    }
}

/// Largest t-intersecting family contained in no `σ A_k τ`, against the maximum.
///
/// Every t-intersecting family extends to a maximal clique and containment in
/// some `σ A_k τ` is inherited by subfamilies, so only maximal cliques through
/// the identity are examined.
pub fn stability_gap(n: usize, t: usize, budget: u64) -> Result<StabilityReport> {
    if t == 0 || t > n {
        return Err(invalid(format!("need 1 <= t <= n, got t={t}, n={n}")));
    }
    let start = Instant::now();
    let graph = AgreementGraph::new(n, t)?;
    let identity = graph.index_of(&FullPermutation::identity(n)).expect("identity is a vertex");
    let mut search = MaximalCliques {
        graph: &graph,
        t,
        nodes: 0,
        budget,
        exhausted: false,
        cliques: 0,
        max_size: 0,
        best_unclassified: None,
        error: None,
    };
    let mut r = vec![identity];
    search.visit(&mut r, graph.adjacency[identity].clone(), Bits::new(graph.len()));
    if let Some(e) = search.error {
        return Err(e);
    }
    let best = search.best_unclassified.as_ref().map_or(0, Vec::len);
    Ok(StabilityReport {
        n,
        t,
        max_size: search.max_size,
        best_unclassified_size: best,
        best_unclassified: search.best_unclassified.as_ref().map(|c| graph.family(c)),
        ratio: ExactRatio::new(best as i64, search.max_size.max(1) as i64)?,
        maximal_cliques: search.cliques,
        nodes: search.nodes,
        budget_exhausted: search.exhausted,
        elapsed: start.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::{a1_size_closed, ak_size_exact};
    use proptest::prelude::*;

    fn perm(images: &[usize]) -> FullPermutation {
        FullPermutation::from_images(images.iter().copied()).unwrap()
    }

    #[test]
    fn adjacency_matches_agreement() {
        for n in 1..=4 {
            let all = FullPermutation::all(n).unwrap();
            for t in 1..=n {
                let g = AgreementGraph::new(n, t).unwrap();
                for (a, p) in all.iter().enumerate() {
                    assert!(!g.adjacent(a, a));
                    for (b, q) in all.iter().enumerate().filter(|(b, _)| *b != a) {
                        let agree = p.images().zip(q.images()).filter(|(x, y)| x == y).count();
                        assert_eq!(g.adjacent(a, b), agree >= t);
                        assert_eq!(g.adjacent(a, b), g.adjacent(b, a));
                    }
                }
            }
        }
    }

    #[test]
    fn degrees_are_uniform() {
        let g = AgreementGraph::new(5, 1).unwrap();
        // 120 minus 44 derangements, minus the vertex itself
        assert!((0..g.len()).all(|v| g.degree(v) == 75));
    }

    #[test]
    fn max_clique_small_cases() {
        let r = max_t_intersecting(3, 1, 1_000_000).unwrap();
        assert_eq!(r.max_size, 2);
        assert!(r.all_classified() && !r.budget_exhausted);
        assert_eq!(r.witness_count, 1);

        let r = max_t_intersecting(4, 2, 1_000_000).unwrap();
        assert_eq!(r.max_size, 2);
        assert!(r.matches_conjecture());

        let r = max_t_intersecting(5, 2, 1_000_000).unwrap();
        assert_eq!(r.max_size, 6);
        assert_eq!(a1_size_closed(5, 2).unwrap(), Natural::from(5u32));
        assert!(r.matches_conjecture() && r.all_classified());
    }

    #[test]
    fn witnesses_are_cliques() {
        for (n, t) in [(4, 1), (5, 1), (5, 3)] {
            let r = max_t_intersecting(n, t, 1_000_000).unwrap();
            for w in &r.witnesses {
                assert_eq!(w.family.len(), r.max_size);
                assert!(w.family.is_t_intersecting(t).holds);
                assert!(w.family.contains(&FullPermutation::identity(n).to_partial()));
            }
        }
    }

    #[test]
    fn max_clique_budget_flag() {
        let r = max_t_intersecting(5, 1, 3).unwrap();
        assert!(r.budget_exhausted);
        assert!(r.max_size >= 24);
    }

    #[test]
    fn improve_only_mode_keeps_seed() {
        let r = max_t_intersecting_with(5, 2, OracleOptions::improve_only(1_000_000)).unwrap();
        assert_eq!(r.max_size, 6);
        assert_eq!(r.witness_count, 1);
        assert!(!r.budget_exhausted);
    }

    #[test]
    fn classify_roundtrip() {
        let base = build_ak(&FamilySpec::untwisted(5, 1, 0).unwrap()).unwrap();
        let sigma = perm(&[3, 5, 1, 2, 4]);
        let tau = perm(&[2, 4, 5, 3, 1]);
        let f = base.conjugate(&sigma, &tau).unwrap();
        let c = classify_extremal(&f, 1).unwrap().unwrap();
        assert_eq!(c.k, 0);
        let host = build_ak(&FamilySpec::new(5, 1, 0, c.sigma.clone(), c.tau.clone()).unwrap()).unwrap();
        assert!(f.is_subfamily_of(&host));
    }

    #[test]
    fn classify_a1() {
        let f = build_ak(&FamilySpec::untwisted(6, 1, 1).unwrap()).unwrap();
        let g = f.conjugate(&perm(&[2, 3, 1, 6, 5, 4]), &perm(&[6, 1, 2, 3, 4, 5])).unwrap();
        let c = classify_extremal(&g, 1).unwrap().unwrap();
        assert_eq!(c.k, 1);
        let host = build_ak(&FamilySpec::new(6, 1, 1, c.sigma, c.tau).unwrap()).unwrap();
        assert_eq!(host, g);
    }

    #[test]
    fn classify_pairs_of_permutations() {
        let a = perm(&[1, 2, 3, 4, 5]);
        let b = perm(&[1, 2, 4, 5, 3]);
        let f = Family::from_permutations(5, [a, b]).unwrap();
        let c = classify_extremal(&f, 2).unwrap().unwrap();
        assert_eq!(c.k, 0);
        let host = build_ak(&FamilySpec::new(5, 2, 0, c.sigma, c.tau).unwrap()).unwrap();
        assert!(f.is_subfamily_of(&host));
    }

    #[test]
    fn classify_rejects_non_coset() {
        // three permutations of Σ₃ pairwise agreeing on nothing: not in any coset of A_0 at t = 1
        let f = Family::from_permutations(3, [perm(&[1, 2, 3]), perm(&[2, 3, 1]), perm(&[3, 1, 2])]).unwrap();
        assert_eq!(classify_extremal(&f, 1).unwrap(), None);
    }

    #[test]
    fn stability_small() {
        let s = stability_gap(3, 1, 1_000_000).unwrap();
        assert_eq!(s.max_size, 2);
        assert!(s.best_unclassified_size <= 1);
        let s = stability_gap(4, 1, 10_000_000).unwrap();
        assert_eq!(s.max_size, 6);
        assert!(s.best_unclassified_size < s.max_size);
        if let Some(f) = &s.best_unclassified {
            assert!(f.is_t_intersecting(1).holds);
            assert_eq!(classify_extremal(f, 1).unwrap(), None);
        }
        let s = stability_gap(4, 4, 1000).unwrap();
        assert_eq!((s.max_size, s.best_unclassified_size), (1, 0));
    }

    #[test]
    fn conjecture_n4() {
        for t in 1..=4 {
            let r = max_t_intersecting(4, t, 1_000_000).unwrap();
            let best = (0..=(4 - t) / 2).map(|k| ak_size_exact(4, t as u64, k as u64).unwrap()).max().unwrap();
            assert_eq!(Natural::from(r.max_size), best, "t={t}");
            assert!(r.all_classified(), "t={t}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn result_invariant_under_action(s in 0..24usize, u in 0..24usize, t in 1usize..3) {
            // the maximum over cliques through σ·id·τ matches the one through id
            let all = FullPermutation::all(4).unwrap();
            let g = AgreementGraph::new(4, t).unwrap();
            let base = max_t_intersecting(4, t, 1_000_000).unwrap();
            for w in &base.witnesses {
                let moved = w.family.conjugate(&all[s], &all[u]).unwrap();
                prop_assert!(moved.is_t_intersecting(t).holds);
                let idx: Vec<usize> = moved.iter().map(|m| g.index_of(&m.to_full().unwrap()).unwrap()).collect();
                for (i, &a) in idx.iter().enumerate() {
                    for &b in &idx[i + 1..] {
                        prop_assert!(g.adjacent(a, b));
                    }
                }
                prop_assert!(classify_extremal(&moved, t).unwrap().is_some());
            }
        }
    }
}
