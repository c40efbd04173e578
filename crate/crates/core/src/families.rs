//! Permutations and partial permutations viewed as sets of pairs in `[n]²`,
//! and the family algebra built on them: restrictions, selections,
//! intersection predicates, and the two-sided action `π ↦ σ∘π∘τ`.
//!
//! Points are 1-indexed throughout, in memory and in the text format.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use serde::{Serialize, Serializer};

use crate::error::{invalid, Error, Result};

pub type Point = u16;
pub type Pair = (Point, Point);

/// Largest ground size for which `Σ_n` is materialized.
pub const MAX_ENUMERATED_N: usize = 10;

/// A partial injection on `[n]`, stored as pairs sorted by domain point.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PartialPermutation {
    n: u16,
    pairs: Vec<Pair>,
}

impl PartialPermutation {
    pub fn new(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let n16 = u16::try_from(n).map_err(|_| invalid(format!("ground size {n} too large")))?;
        let mut out = Vec::new();
        for (i, j) in pairs {
            if i == 0 || j == 0 || i > n || j > n {
                return Err(Error::NotPartialPermutation(format!("pair {i}>{j} outside [{n}]")));
            }
            out.push((i as Point, j as Point));
        }
        Self::from_pairs(n16, out)
    }

    fn from_pairs(n: u16, mut pairs: Vec<Pair>) -> Result<Self> {
        pairs.sort_unstable();
        pairs.dedup();
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::NotPartialPermutation("repeated domain point".into()));
        }
        let mut images: Vec<Point> = pairs.iter().map(|p| p.1).collect();
        images.sort_unstable();
        if images.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::NotPartialPermutation("repeated image point".into()));
        }
        Ok(PartialPermutation { n, pairs })
    }

    #[cfg(test)]
    pub(crate) fn from_sorted_unchecked(n: u16, pairs: Vec<Pair>) -> Self {
        PartialPermutation { n, pairs }
    }

    pub fn empty(n: usize) -> Self {
        PartialPermutation { n: n as u16, pairs: Vec::new() }
    }

    pub fn n(&self) -> usize {
        usize::from(self.n)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[Pair] {
        &self.pairs
    }

    pub fn image_of(&self, domain: usize) -> Option<usize> {
        self.pairs
            .binary_search_by_key(&(domain as Point), |p| p.0)
            .ok()
            .map(|i| usize::from(self.pairs[i].1))
    }

    pub fn contains_pair(&self, pair: Pair) -> bool {
        self.pairs.binary_search(&pair).is_ok()
    }

    pub fn is_subset_of(&self, other: &PartialPermutation) -> bool {
        if self.len() > other.len() {
            return false;
        }
        let mut it = other.pairs.iter();
        'outer: for p in &self.pairs {
            for q in it.by_ref() {
                match q.cmp(p) {
                    Ordering::Less => continue,
                    Ordering::Equal => continue 'outer,
                    Ordering::Greater => return false,
                }
            }
            return false;
        }
        true
    }

    /// `|self ∩ other|` as pair sets.
    pub fn intersection_size(&self, other: &PartialPermutation) -> usize {
        let (mut a, mut b) = (self.pairs.iter().peekable(), other.pairs.iter().peekable());
        let mut count = 0;
        while let (Some(x), Some(y)) = (a.peek(), b.peek()) {
            match x.cmp(y) {
                Ordering::Less => {
                    a.next();
                }
                Ordering::Greater => {
                    b.next();
                }
                Ordering::Equal => {
                    count += 1;
                    a.next();
                    b.next();
                }
            }
        }
        count
    }

    pub fn difference(&self, other: &PartialPermutation) -> PartialPermutation {
        let pairs = self.pairs.iter().copied().filter(|p| !other.contains_pair(*p)).collect();
        PartialPermutation { n: self.n, pairs }
    }

    /// Union as pair sets; `None` when the union is not injective.
    pub fn union(&self, other: &PartialPermutation) -> Option<PartialPermutation> {
        let pairs = self.pairs.iter().chain(&other.pairs).copied().collect();
        Self::from_pairs(self.n, pairs).ok()
    }

    pub fn with_pair(&self, pair: Pair) -> Option<PartialPermutation> {
        let mut pairs = self.pairs.clone();
        pairs.push(pair);
        Self::from_pairs(self.n, pairs).ok()
    }

    pub fn without_index(&self, index: usize) -> PartialPermutation {
        let mut pairs = self.pairs.clone();
        pairs.remove(index);
        PartialPermutation { n: self.n, pairs }
    }

    /// All `size`-element subsets, in lexicographic order.
    pub fn subsets(&self, size: usize) -> impl Iterator<Item = PartialPermutation> + '_ {
        let n = self.n;
        self.pairs
            .iter()
            .copied()
            .combinations(size)
            .map(move |pairs| PartialPermutation { n, pairs })
    }

    /// Image under `π ↦ σ∘π∘τ`: the pair `(i, j)` goes to `(τ⁻¹(i), σ(j))`.
    pub fn act(&self, sigma: &FullPermutation, tau: &FullPermutation) -> PartialPermutation {
        let tau_inv = tau.inverse();
        let pairs = self
            .pairs
            .iter()
            .map(|&(i, j)| (tau_inv.images[usize::from(i) - 1], sigma.images[usize::from(j) - 1]))
            .sorted()
            .collect();
        PartialPermutation { n: self.n, pairs }
    }

    pub fn to_full(&self) -> Option<FullPermutation> {
        if self.len() != self.n() {
            return None;
        }
        Some(FullPermutation { images: self.pairs.iter().map(|p| p.1).collect() })
    }
}

impl fmt::Display for PartialPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pairs.is_empty() {
            return f.write_str("-");
        }
        let body = self.pairs.iter().map(|(i, j)| format!("{i}>{j}")).join(",");
        f.write_str(&body)
    }
}

impl Serialize for PartialPermutation {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Parses `i>j` pairs separated by commas; `-` is the empty set.
pub fn parse_partial(n: usize, s: &str) -> Result<PartialPermutation> {
    let s = s.trim();
    if s == "-" || s.is_empty() {
        return Ok(PartialPermutation::empty(n));
    }
    let mut pairs = Vec::new();
    for part in s.split(',') {
        let (i, j) = part
            .split_once('>')
            .ok_or_else(|| invalid(format!("malformed pair {part:?}")))?;
        let parse = |v: &str| v.trim().parse::<usize>().map_err(|_| invalid(format!("malformed pair {part:?}")));
        pairs.push((parse(i)?, parse(j)?));
    }
    let before = pairs.len();
    let pp = PartialPermutation::new(n, pairs)?;
    if pp.len() != before {
        return Err(invalid(format!("duplicate pair in {s:?}")));
    }
    Ok(pp)
}

/// A bijection on `[n]`, stored as its 1-indexed image list.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FullPermutation {
    images: Vec<Point>,
}

impl FullPermutation {
    pub fn identity(n: usize) -> Self {
        FullPermutation { images: (1..=n as Point).collect() }
    }

    pub fn from_images(images: impl IntoIterator<Item = usize>) -> Result<Self> {
        let images: Vec<usize> = images.into_iter().collect();
        let n = images.len();
        let mut seen = vec![false; n + 1];
        for &v in &images {
            if v == 0 || v > n || seen[v] {
                return Err(Error::NotPartialPermutation(format!("{images:?} is not a permutation of 1..{n}")));
            }
            seen[v] = true;
        }
        Ok(FullPermutation { images: images.into_iter().map(|v| v as Point).collect() })
    }

    pub fn n(&self) -> usize {
        self.images.len()
    }

    pub fn apply(&self, i: usize) -> usize {
        usize::from(self.images[i - 1])
    }

    pub fn images(&self) -> impl Iterator<Item = usize> + '_ {
        self.images.iter().map(|&v| usize::from(v))
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &FullPermutation) -> FullPermutation {
        FullPermutation {
            images: other.images.iter().map(|&i| self.images[usize::from(i) - 1]).collect(),
        }
    }

    pub fn inverse(&self) -> FullPermutation {
        let mut inv = vec![0; self.images.len()];
        for (i, &v) in self.images.iter().enumerate() {
            inv[usize::from(v) - 1] = (i + 1) as Point;
        }
        FullPermutation { images: inv }
    }

    pub fn to_partial(&self) -> PartialPermutation {
        let pairs = self.images.iter().enumerate().map(|(i, &v)| ((i + 1) as Point, v)).collect();
        PartialPermutation { n: self.images.len() as u16, pairs }
    }

    pub fn fixed_points(&self) -> usize {
        self.images.iter().enumerate().filter(|&(i, &v)| usize::from(v) == i + 1).count()
    }

    /// All of `Σ_n` in lexicographic order.
    pub fn all(n: usize) -> Result<Vec<FullPermutation>> {
        if n > MAX_ENUMERATED_N {
            return Err(Error::TooLarge(format!("Σ_{n} has more than {MAX_ENUMERATED_N}! elements")));
        }
        Ok((1..=n as Point)
            .permutations(n)
            .map(|images| FullPermutation { images })
            .collect())
    }
}

impl fmt::Display for FullPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.images.iter().join(" "))
    }
}

impl Serialize for FullPermutation {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl FromStr for FullPermutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let images = s
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|p| !p.is_empty())
            .map(|p| p.parse::<usize>().map_err(|_| invalid(format!("bad image {p:?}"))))
            .collect::<Result<Vec<_>>>()?;
        FullPermutation::from_images(images)
    }
}

/// `|a ∩ b|` as pair sets.
pub fn agreement(a: &PartialPermutation, b: &PartialPermutation) -> Result<usize> {
    if a.n != b.n {
        return Err(Error::GroundMismatch(a.n(), b.n()));
    }
    Ok(a.intersection_size(b))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Full,
    Partial,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Full => "full",
            Kind::Partial => "partial",
        })
    }
}

/// Outcome of a t-intersection check. The witness may repeat a member: a
/// set with fewer than `t` pairs fails against itself.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IntersectionVerdict {
    pub holds: bool,
    pub witness: Option<(PartialPermutation, PartialPermutation)>,
}

/// Immutable, duplicate-free, canonically ordered family over a fixed `n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Family {
    n: usize,
    kind: Kind,
    members: Vec<PartialPermutation>,
}

impl Family {
    pub fn new(n: usize, kind: Kind, members: impl IntoIterator<Item = PartialPermutation>) -> Result<Self> {
        let mut members: Vec<PartialPermutation> = members.into_iter().collect();
        for m in &members {
            if m.n() != n {
                return Err(Error::GroundMismatch(n, m.n()));
            }
            if kind == Kind::Full && m.len() != n {
                return Err(invalid(format!("member {m} is not a full permutation of [{n}]")));
            }
        }
        members.sort_unstable();
        members.dedup();
        Ok(Family { n, kind, members })
    }

    pub(crate) fn from_canonical(n: usize, kind: Kind, members: Vec<PartialPermutation>) -> Self {
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        Family { n, kind, members }
    }

    pub fn empty(n: usize, kind: Kind) -> Self {
        Family { n, kind, members: Vec::new() }
    }

    pub fn from_permutations(n: usize, perms: impl IntoIterator<Item = FullPermutation>) -> Result<Self> {
        Self::new(n, Kind::Full, perms.into_iter().map(|p| p.to_partial()))
    }

    pub fn symmetric_group(n: usize) -> Result<Self> {
        // lexicographic generation is already canonical
        let members = FullPermutation::all(n)?.into_iter().map(|p| p.to_partial()).collect();
        Ok(Family::from_canonical(n, Kind::Full, members))
    }

    /// `Σ_n[X]`: every permutation extending `x`.
    pub fn star(n: usize, x: &PartialPermutation) -> Result<Self> {
        Ok(Self::symmetric_group(n)?.select(x))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[PartialPermutation] {
        &self.members
    }

    pub fn iter(&self) -> std::slice::Iter<'_, PartialPermutation> {
        self.members.iter()
    }

    pub fn contains(&self, member: &PartialPermutation) -> bool {
        self.members.binary_search(member).is_ok()
    }

    pub fn max_member_size(&self) -> usize {
        self.members.iter().map(|m| m.len()).max().unwrap_or(0)
    }

    pub fn min_member_size(&self) -> usize {
        self.members.iter().map(|m| m.len()).min().unwrap_or(0)
    }

    /// `F(X) = {F ∖ X : X ⊆ F}`.
    pub fn restrict(&self, x: &PartialPermutation) -> Family {
        let members: Vec<PartialPermutation> = self
            .members
            .iter()
            .filter(|m| x.is_subset_of(m))
            .map(|m| m.difference(x))
            .collect();
        Family::new(self.n, Kind::Partial, members).expect("traces share the ground size")
    }

    /// `F[X] = {F : X ⊆ F}`.
    pub fn select(&self, x: &PartialPermutation) -> Family {
        let members = self.members.iter().filter(|m| x.is_subset_of(m)).cloned().collect();
        Family::from_canonical(self.n, self.kind, members)
    }

    /// `F[S] = ⋃_{A ∈ S} F[A]`.
    pub fn select_union(&self, cover: &Family) -> Result<Family> {
        if cover.n != self.n {
            return Err(Error::GroundMismatch(self.n, cover.n));
        }
        let members = self
            .members
            .iter()
            .filter(|m| cover.members.iter().any(|a| a.is_subset_of(m)))
            .cloned()
            .collect();
        Ok(Family::from_canonical(self.n, self.kind, members))
    }

    /// `F(X, Y) = {F ∖ X : F ∩ Y = X}`; requires `X ⊆ Y`.
    pub fn strict_restrict(&self, x: &PartialPermutation, y: &PartialPermutation) -> Result<Family> {
        if !x.is_subset_of(y) {
            return Err(invalid(format!("{x} is not contained in {y}")));
        }
        let members: Vec<PartialPermutation> = self
            .members
            .iter()
            .filter(|m| m.intersection_size(y) == x.len() && x.is_subset_of(m))
            .map(|m| m.difference(x))
            .collect();
        Family::new(self.n, Kind::Partial, members)
    }

    pub fn is_t_intersecting(&self, t: usize) -> IntersectionVerdict {
        for (i, a) in self.members.iter().enumerate() {
            for b in &self.members[i..] {
                if a.intersection_size(b) < t {
                    return IntersectionVerdict { holds: false, witness: Some((a.clone(), b.clone())) };
                }
            }
        }
        IntersectionVerdict { holds: true, witness: None }
    }

    /// Image under `π ↦ σ∘π∘τ`; full families only.
    pub fn conjugate(&self, sigma: &FullPermutation, tau: &FullPermutation) -> Result<Family> {
        if self.kind != Kind::Full {
            return Err(Error::NotFull);
        }
        self.act(sigma, tau)
    }

    /// The same action applied pairwise, for partial families as well.
    pub fn act(&self, sigma: &FullPermutation, tau: &FullPermutation) -> Result<Family> {
        if sigma.n() != self.n || tau.n() != self.n {
            return Err(Error::GroundMismatch(self.n, sigma.n().max(tau.n())));
        }
        Family::new(self.n, self.kind, self.members.iter().map(|m| m.act(sigma, tau)))
    }

    /// True iff no member is a proper subset of another.
    pub fn is_antichain(&self) -> bool {
        let mut by_size: Vec<&PartialPermutation> = self.members.iter().collect();
        by_size.sort_by_key(|m| m.len());
        for (i, a) in by_size.iter().enumerate() {
            for b in &by_size[i + 1..] {
                if a.len() < b.len() && a.is_subset_of(b) {
                    return false;
                }
            }
        }
        true
    }

    pub fn minus(&self, other: &Family) -> Family {
        let members = self.members.iter().filter(|m| !other.contains(m)).cloned().collect();
        Family::from_canonical(self.n, self.kind, members)
    }

    pub fn union(&self, other: &Family) -> Result<Family> {
        if other.n != self.n {
            return Err(Error::GroundMismatch(self.n, other.n));
        }
        let kind = if self.kind == Kind::Full && other.kind == Kind::Full { Kind::Full } else { Kind::Partial };
        Family::new(self.n, kind, self.members.iter().chain(&other.members).cloned())
    }

    pub fn is_subfamily_of(&self, other: &Family) -> bool {
        self.members.iter().all(|m| other.contains(m))
    }

    /// Members of exactly the given size.
    pub fn layer(&self, size: usize) -> Family {
        let members = self.members.iter().filter(|m| m.len() == size).cloned().collect();
        Family::from_canonical(self.n, Kind::Partial, members)
    }

    /// Reinterprets the family as partial (no change to the members).
    pub fn into_partial(self) -> Family {
        Family { kind: Kind::Partial, ..self }
    }

    /// Text form: a header line then one member per line.
    pub fn to_text(&self) -> String {
        let mut out = format!("n={} kind={}\n", self.n, self.kind);
        for m in &self.members {
            match self.kind {
                Kind::Full => out.push_str(&m.to_full().expect("full member").to_string()),
                Kind::Partial => out.push_str(&m.to_string()),
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Family> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty input".into() })?;
        let mut n = None;
        let mut kind = None;
        for field in header.split_whitespace() {
            match field.split_once('=') {
                Some(("n", v)) => {
                    n = Some(v.parse::<usize>().map_err(|_| Error::Parse { line: 1, msg: format!("bad n {v:?}") })?)
                }
                Some(("kind", "full")) => kind = Some(Kind::Full),
                Some(("kind", "partial")) => kind = Some(Kind::Partial),
                _ => return Err(Error::Parse { line: 1, msg: format!("unexpected header field {field:?}") }),
            }
        }
        let n = n.ok_or(Error::Parse { line: 1, msg: "missing n=".into() })?;
        let kind = kind.ok_or(Error::Parse { line: 1, msg: "missing kind=".into() })?;
        let mut members = Vec::new();
        for (idx, line) in lines {
            let wrap = |e: Error| Error::Parse { line: idx + 1, msg: e.to_string() };
            if line.trim().is_empty() && kind == Kind::Full {
                continue;
            }
            let member = match kind {
                Kind::Full => {
                    let p: FullPermutation = line.parse().map_err(wrap)?;
                    if p.n() != n {
                        return Err(Error::Parse { line: idx + 1, msg: format!("expected {n} images") });
                    }
                    p.to_partial()
                }
                Kind::Partial => {
                    if line.trim().is_empty() {
                        continue;
                    }
                    parse_partial(n, line).map_err(wrap)?
                }
            };
            members.push(member);
        }
        Family::new(n, kind, members)
    }
}

impl Serialize for Family {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = serializer.serialize_struct("Family", 4)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("kind", &self.kind)?;
        st.serialize_field("size", &self.members.len())?;
        st.serialize_field("members", &self.members)?;
        st.end()
    }
}

/// One member `σ A_k τ` of the collection of candidate extremal families.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FamilySpec {
    pub n: usize,
    pub t: usize,
    pub k: usize,
    pub left: FullPermutation,
    pub right: FullPermutation,
}

impl FamilySpec {
    pub fn new(n: usize, t: usize, k: usize, left: FullPermutation, right: FullPermutation) -> Result<Self> {
        if t + 2 * k > n {
            return Err(invalid(format!("t + 2k = {} exceeds n = {n}", t + 2 * k)));
        }
        if left.n() != n || right.n() != n {
            return Err(Error::GroundMismatch(n, left.n().max(right.n())));
        }
        Ok(FamilySpec { n, t, k, left, right })
    }

    pub fn untwisted(n: usize, t: usize, k: usize) -> Result<Self> {
        Self::new(n, t, k, FullPermutation::identity(n), FullPermutation::identity(n))
    }
}

/// `σ A_k τ` with `A_k = {π : π(i) = i for at least t+k indices i ∈ [t+2k]}`.
pub fn build_ak(spec: &FamilySpec) -> Result<Family> {
    let window = spec.t + 2 * spec.k;
    if window > spec.n {
        return Err(invalid(format!("t + 2k = {window} exceeds n = {}", spec.n)));
    }
    let base = FullPermutation::all(spec.n)?
        .into_iter()
        .filter(|p| (1..=window).filter(|&i| p.apply(i) == i).count() >= spec.t + spec.k);
    Family::from_permutations(spec.n, base)?.conjugate(&spec.left, &spec.right)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::ak_size_exact;
    use proptest::prelude::*;

    fn pp(n: usize, pairs: &[(usize, usize)]) -> PartialPermutation {
        PartialPermutation::new(n, pairs.iter().copied()).unwrap()
    }

    fn perm(images: &[usize]) -> FullPermutation {
        FullPermutation::from_images(images.iter().copied()).unwrap()
    }

    #[test]
    fn partial_permutation_validation() {
        assert!(PartialPermutation::new(3, [(1, 1), (1, 2)]).is_err());
        assert!(PartialPermutation::new(3, [(1, 1), (2, 1)]).is_err());
        assert!(PartialPermutation::new(3, [(4, 1)]).is_err());
        assert!(PartialPermutation::new(3, [(0, 1)]).is_err());
        let a = pp(4, &[(3, 2), (1, 1)]);
        assert_eq!(a.pairs(), &[(1, 1), (3, 2)]);
        assert_eq!(a.to_string(), "1>1,3>2");
        assert_eq!(parse_partial(4, "1>1,3>2").unwrap(), a);
        assert_eq!(parse_partial(4, "-").unwrap(), PartialPermutation::empty(4));
        assert!(parse_partial(4, "1>1,1>1").is_err());
    }

    #[test]
    fn restrict_examples() {
        let s3 = Family::symmetric_group(3).unwrap();
        assert_eq!(s3.restrict(&PartialPermutation::empty(3)).members(), s3.members());
        let r = s3.restrict(&pp(3, &[(1, 1)]));
        assert_eq!(r.len(), 2);
        assert_eq!(r.members(), &[pp(3, &[(2, 2), (3, 3)]), pp(3, &[(2, 3), (3, 2)])]);
        // (1,1),(2,1) is not injective, so no permutation extends it
        let bad = PartialPermutation::from_sorted_unchecked(4, vec![(1, 1), (2, 1)]);
        assert!(Family::symmetric_group(4).unwrap().restrict(&bad).is_empty());
    }

    #[test]
    fn select_examples() {
        let s3 = Family::symmetric_group(3).unwrap();
        assert_eq!(s3.select(&PartialPermutation::empty(3)), s3);
        assert_eq!(s3.select(&pp(3, &[(1, 1)])).len(), 2);
        let cover = Family::new(3, Kind::Partial, [pp(3, &[(1, 1)]), pp(3, &[(1, 2)])]).unwrap();
        assert_eq!(s3.select_union(&cover).unwrap().len(), 4);
    }

    #[test]
    fn strict_restrict_examples() {
        let s3 = Family::symmetric_group(3).unwrap();
        let y = pp(3, &[(1, 1)]);
        let r = s3.strict_restrict(&PartialPermutation::empty(3), &y).unwrap();
        assert_eq!(r.len(), 4);
        assert!(r.iter().all(|m| m.len() == 3 && m.image_of(1) != Some(1)));
        let same = s3.strict_restrict(&y, &y).unwrap();
        assert_eq!(same, s3.restrict(&y));
        assert!(s3.strict_restrict(&y, &PartialPermutation::empty(3)).is_err());
        let x = pp(3, &[(1, 1)]);
        let y2 = pp(3, &[(1, 1), (2, 3)]);
        let sr = s3.strict_restrict(&x, &y2).unwrap();
        assert!(sr.is_subfamily_of(&s3.restrict(&x)));
        assert_eq!(sr.len(), 1);
    }

    #[test]
    fn agreement_examples() {
        let a = perm(&[1, 2, 3, 4]).to_partial();
        let b = perm(&[1, 2, 4, 3]).to_partial();
        assert_eq!(agreement(&a, &a).unwrap(), 4);
        assert_eq!(agreement(&a, &b).unwrap(), 2);
        assert_eq!(agreement(&perm(&[1, 2]).to_partial(), &perm(&[2, 1]).to_partial()).unwrap(), 0);
        assert!(agreement(&a, &perm(&[1, 2]).to_partial()).is_err());
    }

    #[test]
    fn intersecting_examples() {
        assert!(Family::empty(4, Kind::Full).is_t_intersecting(3).holds);
        let f = Family::from_permutations(4, [perm(&[1, 2, 3, 4]), perm(&[1, 2, 4, 3])]).unwrap();
        assert!(f.is_t_intersecting(2).holds);
        let v = f.is_t_intersecting(3);
        assert!(!v.holds);
        let (a, b) = v.witness.unwrap();
        assert!(a.intersection_size(&b) < 3);
        let tiny = Family::new(3, Kind::Partial, [pp(3, &[(1, 1)])]).unwrap();
        let v = tiny.is_t_intersecting(2);
        assert!(!v.holds);
        let (a, b) = v.witness.unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn conjugate_examples() {
        let f = build_ak(&FamilySpec::untwisted(5, 1, 1).unwrap()).unwrap();
        let id = FullPermutation::identity(5);
        assert_eq!(f.conjugate(&id, &id).unwrap(), f);
        let sigma = perm(&[3, 1, 5, 2, 4]);
        let tau = perm(&[2, 5, 4, 1, 3]);
        let g = f.conjugate(&sigma, &tau).unwrap();
        assert_eq!(g.len(), f.len());
        assert!(f.clone().into_partial().conjugate(&id, &id).is_err());
        // composing directly agrees with the pairwise action
        for m in f.iter() {
            let p = m.to_full().unwrap();
            assert!(g.contains(&sigma.compose(&p).compose(&tau).to_partial()));
        }
    }

    #[test]
    fn conjugation_preserves_agreement_exhaustively_on_s4() {
        let all = FullPermutation::all(4).unwrap();
        let pool: Vec<PartialPermutation> = all.iter().map(|p| p.to_partial()).collect();
        for sigma in &all {
            for tau in &all {
                for a in &pool {
                    for b in &pool {
                        assert_eq!(a.act(sigma, tau).intersection_size(&b.act(sigma, tau)), a.intersection_size(b));
                    }
                }
            }
        }
    }

    #[test]
    fn build_ak_examples() {
        let a0 = build_ak(&FamilySpec::untwisted(5, 1, 0).unwrap()).unwrap();
        assert_eq!(a0.len(), 24);
        assert!(a0.iter().all(|m| m.image_of(1) == Some(1)));
        assert_eq!(build_ak(&FamilySpec::untwisted(5, 1, 1).unwrap()).unwrap().len(), 14);
        let single = build_ak(&FamilySpec::untwisted(4, 2, 1).unwrap()).unwrap();
        assert_eq!(single.members(), &[FullPermutation::identity(4).to_partial()]);
        assert!(FamilySpec::untwisted(4, 1, 2).is_err());
    }

    #[test]
    fn build_ak_sizes_and_intersection() {
        for n in 1..=7usize {
            for t in 1..=n {
                for k in 0..=(n - t) / 2 {
                    let f = build_ak(&FamilySpec::untwisted(n, t, k).unwrap()).unwrap();
                    assert_eq!(
                        crate::exactmath::n(f.len() as u64),
                        ak_size_exact(n as u64, t as u64, k as u64).unwrap()
                    );
                    if n <= 6 {
                        assert!(f.is_t_intersecting(t).holds, "n={n} t={t} k={k}");
                    }
                }
            }
        }
    }

    #[test]
    fn antichain_examples() {
        let uniform = Family::symmetric_group(3).unwrap();
        assert!(uniform.is_antichain());
        let chain = Family::new(3, Kind::Partial, [pp(3, &[(1, 1)]), pp(3, &[(1, 1), (2, 2)])]).unwrap();
        assert!(!chain.is_antichain());
    }

    #[test]
    fn text_format_round_trip() {
        let f = build_ak(&FamilySpec::untwisted(4, 1, 1).unwrap()).unwrap();
        let text = f.to_text();
        assert!(text.starts_with("n=4 kind=full\n"));
        assert!(text.ends_with('\n'));
        assert_eq!(Family::from_text(&text).unwrap(), f);
        let p = Family::new(4, Kind::Partial, [pp(4, &[(1, 1), (3, 2)]), PartialPermutation::empty(4)]).unwrap();
        assert_eq!(p.to_text(), "n=4 kind=partial\n-\n1>1,3>2\n");
        assert_eq!(Family::from_text(&p.to_text()).unwrap(), p);
        assert!(Family::from_text("n=3 kind=full\n1 2\n").is_err());
        assert!(Family::from_text("n=3 kind=odd\n").is_err());
        assert!(Family::from_text("kind=full\n").is_err());
    }

    fn arb_family(n: usize) -> impl Strategy<Value = Family> {
        let total: usize = (1..=n).product();
        proptest::collection::btree_set(0..total, 0..total.min(30)).prop_map(move |idx| {
            let all = FullPermutation::all(n).unwrap();
            Family::from_permutations(n, idx.into_iter().map(|i| all[i].clone())).unwrap()
        })
    }

    fn arb_partial(n: usize) -> impl Strategy<Value = PartialPermutation> {
        (Just(n), proptest::sample::subsequence((1..=n).collect::<Vec<_>>(), 0..=n), 0..120usize).prop_map(
            |(n, dom, seed)| {
                let perm = FullPermutation::all(n).unwrap();
                let p = &perm[seed % perm.len()];
                PartialPermutation::new(n, dom.into_iter().map(|i| (i, p.apply(i)))).unwrap()
            },
        )
    }

    proptest! {
        #[test]
        fn restrict_and_select_have_equal_size(f in arb_family(5), x in arb_partial(5)) {
            prop_assert_eq!(f.restrict(&x).len(), f.select(&x).len());
        }

        #[test]
        fn restrict_composes(f in arb_family(5), x in arb_partial(5), y in arb_partial(5)) {
            let y = y.difference(&x);
            if let Some(xy) = x.union(&y) {
                if xy.len() == x.len() + y.len() {
                    prop_assert_eq!(f.restrict(&x).restrict(&y), f.restrict(&xy));
                }
            }
        }

        #[test]
        fn select_union_is_subfamily(f in arb_family(4), a in arb_partial(4), b in arb_partial(4)) {
            let cover = Family::new(4, Kind::Partial, [a.clone(), b]).unwrap();
            let doubled = Family::new(4, Kind::Partial, [a.clone(), a.clone()]).unwrap();
            let single = Family::new(4, Kind::Partial, [a]).unwrap();
            prop_assert!(f.select_union(&cover).unwrap().is_subfamily_of(&f));
            prop_assert_eq!(f.select_union(&doubled).unwrap().len(), f.select_union(&single).unwrap().len());
        }

        #[test]
        fn intersecting_verdict_invariant_under_action(f in arb_family(4), s in 0..24usize, u in 0..24usize, t in 0..5usize) {
            let all = FullPermutation::all(4).unwrap();
            let g = f.conjugate(&all[s], &all[u]).unwrap();
            prop_assert_eq!(g.is_t_intersecting(t).holds, f.is_t_intersecting(t).holds);
        }
    }
}
