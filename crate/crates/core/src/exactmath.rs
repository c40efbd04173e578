//! Exact counting kernel: factorials, binomials, partial derangements, the
//! sizes of the families `A_k`, and the explicit bound functions used by the
//! peeling analysis. Nothing in here touches floating point.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Error, Result};

/// Arbitrary-precision non-negative integer.
pub type Natural = BigUint;

/// Exact rational number kept in lowest terms with a positive denominator.
///
/// Parsed from and printed as `p/q`; decimal notation is rejected.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactRatio(BigRational);

impl ExactRatio {
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Result<Self> {
        let denom = denom.into();
        if denom.is_zero() {
            return Err(invalid("zero denominator"));
        }
        Ok(ExactRatio(BigRational::new(numer.into(), denom)))
    }

    pub fn from_integer(v: impl Into<BigInt>) -> Self {
        ExactRatio(BigRational::from_integer(v.into()))
    }

    pub fn from_naturals(numer: &Natural, denom: &Natural) -> Result<Self> {
        Self::new(
            BigInt::from_biguint(Sign::Plus, numer.clone()),
            BigInt::from_biguint(Sign::Plus, denom.clone()),
        )
    }

    pub fn zero() -> Self {
        ExactRatio(BigRational::zero())
    }

    pub fn one() -> Self {
        ExactRatio(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn as_rational(&self) -> &BigRational {
        &self.0
    }

    pub fn pow(&self, exp: u32) -> Self {
        ExactRatio(Pow::pow(&self.0, exp))
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    /// Numerator and denominator as naturals; `None` for negative values.
    pub fn to_naturals(&self) -> Option<(Natural, Natural)> {
        let n = self.0.numer().to_biguint()?;
        let d = self.0.denom().to_biguint()?;
        Some((n, d))
    }

    /// Lossy conversion for display and reporting only.
    pub fn to_f64(&self) -> f64 {
        let (n, d) = (self.0.numer(), self.0.denom());
        match (n.to_f64(), d.to_f64()) {
            (Some(a), Some(b)) if a.is_finite() && b.is_finite() => a / b,
            _ => {
                // shift both down so the quotient survives
                let shift = n.bits().max(d.bits()).saturating_sub(1000);
                let a = (n >> shift).to_f64().unwrap_or(f64::NAN);
                let b = (d >> shift).to_f64().unwrap_or(f64::NAN);
                a / b
            }
        }
    }

    /// Exact value of a finite `f64`.
    pub fn from_f64(v: f64) -> Option<Self> {
        BigRational::from_float(v).map(ExactRatio)
    }

    /// Floor of the value (for non-negative ratios).
    pub fn floor_natural(&self) -> Option<Natural> {
        self.0.floor().to_integer().to_biguint()
    }

    pub fn ceil_natural(&self) -> Option<Natural> {
        self.0.ceil().to_integer().to_biguint()
    }
}

impl fmt::Display for ExactRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl FromStr for ExactRatio {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parse = |part: &str| -> Result<BigInt> {
            let part = part.trim();
            if part.is_empty() || !part.trim_start_matches('-').chars().all(|c| c.is_ascii_digit()) {
                return Err(invalid(format!("not an exact rational: {s:?} (expected p/q)")));
            }
            part.parse::<BigInt>()
                .map_err(|_| invalid(format!("not an exact rational: {s:?}")))
        };
        match s.split_once('/') {
            Some((p, q)) => ExactRatio::new(parse(p)?, parse(q)?),
            None => Ok(ExactRatio::from_integer(parse(s)?)),
        }
    }
}

impl Serialize for ExactRatio {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ExactRatio {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! ratio_binop {
    ($tr:ident, $method:ident) => {
        impl $tr for ExactRatio {
            type Output = ExactRatio;
            fn $method(self, rhs: ExactRatio) -> ExactRatio {
                ExactRatio(self.0.$method(rhs.0))
            }
        }
        impl<'a> $tr<&'a ExactRatio> for &'a ExactRatio {
            type Output = ExactRatio;
            fn $method(self, rhs: &'a ExactRatio) -> ExactRatio {
                ExactRatio((&self.0).$method(&rhs.0))
            }
        }
    };
}

ratio_binop!(Add, add);
ratio_binop!(Sub, sub);
ratio_binop!(Mul, mul);
ratio_binop!(Div, div);

/// Serialize a natural as a decimal string (JSON numbers cannot carry it).
pub fn serialize_natural<S: Serializer>(v: &Natural, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

pub fn n(v: u64) -> Natural {
    Natural::from(v)
}

pub fn factorial(m: u64) -> Natural {
    (2..=m).fold(Natural::one(), |acc, i| acc * i)
}

/// `m (m-1) ... (m-k+1)`; zero when `k > m`.
pub fn falling(m: u64, k: u64) -> Natural {
    if k > m {
        return Natural::zero();
    }
    (m - k + 1..=m).fold(Natural::one(), |acc, i| acc * i)
}

pub fn binomial(m: u64, k: u64) -> Natural {
    if k > m {
        return Natural::zero();
    }
    let k = k.min(m - k);
    let mut acc = Natural::one();
    for i in 0..k {
        acc = acc * (m - i) / (i + 1);
    }
    acc
}

/// Number of `σ ∈ Σ_m` with `σ(i) ≠ i` for every `i ∈ [ell]`, by inclusion-exclusion.
pub fn ell_derangements(ell: u64, m: u64) -> Result<Natural> {
    if ell > m {
        return Err(invalid(format!("ell = {ell} exceeds m = {m}")));
    }
    let mut sum = BigInt::zero();
    for i in 0..=ell {
        let term = BigInt::from(binomial(ell, i) * factorial(m - i));
        if i.is_even() {
            sum += term;
        } else {
            sum -= term;
        }
    }
    Ok(sum.to_biguint().expect("inclusion-exclusion count is non-negative"))
}

fn check_window(n: u64, t: u64, k: u64) -> Result<()> {
    if t + 2 * k > n {
        return Err(invalid(format!("t + 2k = {} exceeds n = {n}", t + 2 * k)));
    }
    Ok(())
}

/// `C(t+2k, k) (n-t-k)!`, the counting upper bound on `|A_k|`.
pub fn ak_size_upper(n: u64, t: u64, k: u64) -> Result<Natural> {
    check_window(n, t, k)?;
    Ok(binomial(t + 2 * k, k) * factorial(n - t - k))
}

/// `|A_k|` exactly: sum over the number `s` of fixed points inside the window
/// `[t+2k]` of `C(t+2k, s)` times the partial derangements of the rest.
pub fn ak_size_exact(n: u64, t: u64, k: u64) -> Result<Natural> {
    check_window(n, t, k)?;
    let w = t + 2 * k;
    let mut total = Natural::zero();
    for s in t + k..=w {
        total += binomial(w, s) * ell_derangements(w - s, n - s)?;
    }
    Ok(total)
}

/// Closed form `(t+2)(n-t-1)! - (t+1)(n-t-2)!` for `|A_1|`.
pub fn a1_size_closed(n: u64, t: u64) -> Result<Natural> {
    if n < t + 2 {
        return Err(invalid(format!("need n >= t + 2, got n = {n}, t = {t}")));
    }
    Ok(factorial(n - t - 1) * (t + 2) - factorial(n - t - 2) * (t + 1))
}

/// Sign of `(n-t-1)(n-2t-2) + (t+1)`, which is the sign of `|A_0| - |A_1|`.
pub fn crossover_sign(n: u64, t: u64) -> Result<i8> {
    if n < t + 2 {
        return Err(invalid(format!("need n >= t + 2, got n = {n}, t = {t}")));
    }
    let (n, t) = (i128::from(n), i128::from(t));
    let v = (n - t - 1) * (n - 2 * t - 2) + (t + 1);
    Ok(v.signum() as i8)
}

/// Smallest `k` maximizing `|A_k|` over `0 <= k <= (n-t)/2`.
pub fn argmax_ak(n: u64, t: u64) -> Result<(u64, Natural)> {
    if n < t {
        return Err(invalid(format!("need n >= t, got n = {n}, t = {t}")));
    }
    let mut best = (0, ak_size_exact(n, t, 0)?);
    for k in 1..=(n - t) / 2 {
        let size = ak_size_exact(n, t, k)?;
        if size > best.1 {
            best = (k, size);
        }
    }
    Ok(best)
}

/// `f(j) = C(t, t-j) C(k, j)^2 k^(k-j)` with `0^0 = 1`.
pub fn f_bound(t: u64, k: u64, j: u64) -> Result<Natural> {
    if j > k || k > t {
        return Err(invalid(format!("need j <= k <= t, got t = {t}, k = {k}, j = {j}")));
    }
    let c = binomial(k, j);
    let power = Pow::pow(&n(k), u32::try_from(k - j).map_err(|_| invalid("k too large"))?);
    Ok(binomial(t, t - j) * &c * &c * power)
}

/// Smallest maximizer of `f_bound(t, k, ·)` over `[0, k]`.
///
/// `f(j+1)/f(j) = (t-j)(k-j)^2 / ((j+1)^3 k)` is decreasing in `j`, so the
/// maximizer is the first `j` where that ratio drops to at most 1.
pub fn f_argmax(t: u64, k: u64) -> Result<u64> {
    if k > t {
        return Err(invalid(format!("need k <= t, got t = {t}, k = {k}")));
    }
    for j in 0..k {
        let up = n(t - j) * n(k - j) * n(k - j);
        let down = Pow::pow(&n(j + 1), 3u32) * k;
        if up <= down {
            return Ok(j);
        }
    }
    Ok(k)
}

/// `(k+1) f(j_0) (n-t-k)! / (n-t)!`, the surrogate for the left side of the
/// per-layer peel bound.
pub fn peel_bound_lhs(n: u64, t: u64, k: u64) -> Result<ExactRatio> {
    if t + k > n {
        return Err(invalid(format!("t + k = {} exceeds n = {n}", t + k)));
    }
    let j0 = f_argmax(t, k)?;
    let numer = f_bound(t, k, j0)? * (k + 1);
    ExactRatio::from_naturals(&numer, &falling(n - t, k))
}

/// `Σ_{m=t-2j}^{t-k} C(t-k, m) C(3k, ⌈3(t-m)/2⌉) k^(j - ⌈(t-m)/2⌉)`, skipping
/// summands whose exponent is negative. Empty ranges give zero.
pub fn gj_bound(t: u64, k: u64, j: u64) -> Result<Natural> {
    if j >= k {
        return Err(invalid(format!("need j < k, got k = {k}, j = {j}")));
    }
    if 2 * j > t || k > t {
        return Err(invalid(format!("need 2j <= t and k <= t, got t = {t}, k = {k}, j = {j}")));
    }
    let mut total = Natural::zero();
    for m in t - 2 * j..=t - k {
        let gap = t - m;
        let half = gap.div_ceil(2);
        if half > j {
            continue;
        }
        let exp = u32::try_from(j - half).map_err(|_| invalid("exponent too large"))?;
        total += binomial(t - k, m) * binomial(3 * k, (3 * gap).div_ceil(2)) * Pow::pow(&n(k), exp);
    }
    Ok(total)
}

/// Rational bracket `lower <= e^x <= upper` from the first `terms` terms of
/// the exponential series plus a geometric majorant of the tail.
/// The upper bound is `None` while the tail majorant is not yet valid.
pub fn exp_bracket(x: u64, terms: u64) -> (ExactRatio, Option<ExactRatio>) {
    let m = terms.max(1) - 1;
    // Σ_{i<=m} x^i / i! over the common denominator m!
    let denom = factorial(m);
    let mut numer = Natural::zero();
    let mut x_pow = Natural::one();
    for i in 0..=m {
        numer += &x_pow * falling(m, m - i);
        x_pow *= x;
    }
    let lower = ExactRatio::from_naturals(&numer, &denom).expect("m! > 0");
    if m + 2 <= x {
        return (lower, None);
    }
    // x^(m+1)/(m+1)! * 1/(1 - x/(m+2)) = x^(m+1) (m+2) / ((m+1)! (m+2-x))
    let tail_num = x_pow * (m + 2);
    let tail_den = factorial(m + 1) * (m + 2 - x);
    let tail = ExactRatio::from_naturals(&tail_num, &tail_den).expect("positive denominator");
    let upper = &lower + &tail;
    (lower, Some(upper))
}

/// Certifies `(n+x)!/n! >= ((n+x)/e)^x` exactly.
///
/// A partial sum `L <= e^x` certifies the inequality through
/// `(n+x)^x <= L (n+x)!/n!`; a full bracket `U >= e^x` refutes it through
/// `(n+x)^x > U (n+x)!/n!`. Inconclusive rounds double the number of series terms.
pub fn factorial_growth_check(n_: u64, x: u64) -> bool {
    let ratio = BigInt::from(falling(n_ + x, x));
    let power = BigInt::from(Pow::pow(&n(n_ + x), u32::try_from(x).expect("x fits in u32")));
    let mut terms = 64;
    loop {
        let (lower, upper) = exp_bracket(x, terms);
        if &power * lower.denom() <= &ratio * lower.numer() {
            return true;
        }
        if let Some(upper) = upper {
            if &power * upper.denom() > &ratio * upper.numer() {
                return false;
            }
        }
        terms *= 2;
    }
}

/// Smallest natural `m` with `m >= base^exponent`, for `exponent >= 0`.
pub fn ceil_pow(base: u64, exponent: &ExactRatio) -> Result<u64> {
    let (p, q) = exponent
        .to_naturals()
        .ok_or_else(|| invalid("exponent must be non-negative"))?;
    let p = p.to_u32().ok_or_else(|| invalid("exponent numerator too large"))?;
    let q = q.to_u32().ok_or_else(|| invalid("exponent denominator too large"))?;
    // m^q >= base^p
    let target: Natural = Pow::pow(&n(base), p);
    let (mut lo, mut hi) = (0u64, 1u64);
    while Pow::pow(&n(hi), q) < target {
        hi *= 2;
    }
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if Pow::pow(&n(mid), q) >= target {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(lo)
}

/// Whether `size > (1 + epsilon) t`, exactly.
pub fn exceeds_cap(size: u64, t: u64, epsilon: &ExactRatio) -> bool {
    let cap = (ExactRatio::one() + epsilon.clone()) * ExactRatio::from_integer(t);
    ExactRatio::from_integer(size).cmp(&cap) == Ordering::Greater
}

/// Parameter bundle for the approximation and peeling stages.
///
/// At desk scale the thresholds `t_prime`, `q`, `x` and the spread ratio `r`
/// are explicit knobs; [`BoundParams::asymptotic`] fills them from the large-`n`
/// formulas for comparison.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundParams {
    pub n: u64,
    pub t: u64,
    pub k: u64,
    pub j: u64,
    pub epsilon: ExactRatio,
    pub t_prime: u64,
    pub q: u64,
    pub x: u64,
    pub r: ExactRatio,
}

impl BoundParams {
    /// Desk-scale defaults: `t' = t`, `q = ⌊(1+ε)t⌋`, `x = 0`.
    pub fn desk(n: u64, t: u64, epsilon: ExactRatio, r: ExactRatio) -> Result<Self> {
        let q = ((ExactRatio::one() + epsilon.clone()) * ExactRatio::from_integer(t))
            .floor_natural()
            .and_then(|v| v.to_u64())
            .ok_or_else(|| invalid("epsilon must be non-negative"))?;
        let params = BoundParams { n, t, k: 0, j: 0, epsilon, t_prime: t, q, x: 0, r };
        params.validate()?;
        Ok(params)
    }

    /// `t' = t - ⌈n^(1-ε/2)⌉` (saturating), `x = ⌈n^(1-ε/4)⌉`, `r = ⌈n^(ε/2)⌉`.
    pub fn asymptotic(n_: u64, t: u64, epsilon: ExactRatio) -> Result<Self> {
        let half = &epsilon / &ExactRatio::from_integer(2);
        let quarter = &epsilon / &ExactRatio::from_integer(4);
        let shift = ceil_pow(n_, &(&ExactRatio::one() - &half))?;
        let x = ceil_pow(n_, &(&ExactRatio::one() - &quarter))?;
        let r = ceil_pow(n_, &half)?.max(2);
        let mut params = Self::desk(n_, t, epsilon, ExactRatio::from_integer(r))?;
        params.t_prime = t.saturating_sub(shift);
        params.x = x;
        params.validate()?;
        Ok(params)
    }

    pub fn with_t_prime(mut self, t_prime: u64) -> Result<Self> {
        self.t_prime = t_prime;
        self.validate()?;
        Ok(self)
    }

    pub fn with_x(mut self, x: u64) -> Self {
        self.x = x;
        self
    }

    pub fn with_layer(mut self, k: u64, j: u64) -> Result<Self> {
        self.k = k;
        self.j = j;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.j > self.k {
            return Err(invalid(format!("j = {} exceeds k = {}", self.j, self.k)));
        }
        if self.t < 1 || self.n < self.t {
            return Err(invalid(format!("need 1 <= t <= n, got n = {}, t = {}", self.n, self.t)));
        }
        if self.t_prime > self.t {
            return Err(invalid(format!("t' = {} exceeds t = {}", self.t_prime, self.t)));
        }
        if self.q < self.t {
            return Err(invalid(format!("q = {} below t = {}", self.q, self.t)));
        }
        if self.r <= ExactRatio::one() {
            return Err(invalid(format!("spread ratio r = {} must exceed 1", self.r)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use itertools::Itertools;
    use proptest::prelude::*;

    fn r(p: i64, q: i64) -> ExactRatio {
        ExactRatio::new(p, q).unwrap()
    }

    // Brute-force scan over Σ_m: permutations of 0..m with no fixed point in [0, ell).
    fn scan_derangements(ell: usize, m: usize) -> u64 {
        (0..m)
            .permutations(m)
            .filter(|p| (0..ell).all(|i| p[i] != i))
            .count() as u64
    }

    fn scan_ak(n: usize, t: usize, k: usize) -> u64 {
        let w = t + 2 * k;
        (0..n)
            .permutations(n)
            .filter(|p| (0..w).filter(|&i| p[i] == i).count() >= t + k)
            .count() as u64
    }

    fn pascal(rows: usize) -> Vec<Vec<u64>> {
        let mut tri = vec![vec![1u64]];
        for i in 1..=rows {
            let prev = &tri[i - 1];
            let mut row = vec![1u64; i + 1];
            for j in 1..i {
                row[j] = prev[j - 1] + prev[j];
            }
            tri.push(row);
        }
        tri
    }

    #[test]
    fn factorial_values() {
        assert_eq!(factorial(0), n(1));
        assert_eq!(factorial(5), n(120));
        // descending accumulation as an independent order
        let desc = (1..=10u64).rev().fold(1u64, |a, i| a * i);
        assert_eq!(desc, 3_628_800);
        assert_eq!(factorial(10), n(desc));
    }

    #[test]
    fn binomial_matches_pascal() {
        let tri = pascal(30);
        for (m, row) in tri.iter().enumerate() {
            for (k, &v) in row.iter().enumerate() {
                assert_eq!(binomial(m as u64, k as u64), n(v), "C({m},{k})");
            }
            assert_eq!(binomial(m as u64, m as u64 + 1), n(0));
        }
        assert_eq!(binomial(4, 2), n(6));
        assert_eq!(binomial(10, 3), n(120));
        assert_eq!(binomial(17, 0), n(1));
    }

    #[test]
    fn ell_derangements_examples() {
        assert_eq!(ell_derangements(0, 3).unwrap(), n(6));
        assert_eq!(ell_derangements(1, 2).unwrap(), n(1));
        assert_eq!(ell_derangements(4, 4).unwrap(), n(9));
        assert!(ell_derangements(5, 4).is_err());
    }

    #[test]
    fn ell_derangements_match_enumeration() {
        for m in 0..=8usize {
            for ell in 0..=m {
                assert_eq!(
                    ell_derangements(ell as u64, m as u64).unwrap(),
                    n(scan_derangements(ell, m)),
                    "ell = {ell}, m = {m}"
                );
            }
        }
    }

    #[test]
    fn ell_derangements_monotone_in_ell() {
        for m in 0..=12u64 {
            assert_eq!(ell_derangements(0, m).unwrap(), factorial(m));
            for ell in 1..=m {
                assert!(ell_derangements(ell, m).unwrap() <= ell_derangements(ell - 1, m).unwrap());
            }
        }
    }

    #[test]
    fn full_derangements_round_m_factorial_over_e() {
        // 1/e bracketed by partial sums of Σ (-1)^i / i! with 40 terms
        let mut lo = ExactRatio::zero();
        let mut hi = ExactRatio::zero();
        let mut acc = ExactRatio::zero();
        for i in 0..=40u64 {
            let term = ExactRatio::from_naturals(&n(1), &factorial(i)).unwrap();
            acc = if i % 2 == 0 { &acc + &term } else { &acc - &term };
            if i == 39 {
                lo = acc.clone();
            }
            if i == 40 {
                hi = acc.clone();
            }
        }
        assert!(lo < hi);
        for m in 1..=20u64 {
            let d = ExactRatio::from_naturals(&ell_derangements(m, m).unwrap(), &n(1)).unwrap();
            let mf = ExactRatio::from_naturals(&factorial(m), &n(1)).unwrap();
            let half = r(1, 2);
            // |d - m!/e| < 1/2 for both ends of the bracket
            for inv_e in [&lo, &hi] {
                let diff = &d - &(&mf * inv_e);
                let abs = if diff < ExactRatio::zero() { &ExactRatio::zero() - &diff } else { diff };
                assert!(abs < half, "m = {m}");
            }
        }
    }

    #[test]
    fn ak_examples() {
        for nn in 0..10 {
            for t in 0..=nn {
                assert_eq!(ak_size_upper(nn, t, 0).unwrap(), factorial(nn - t));
                assert_eq!(ak_size_exact(nn, t, 0).unwrap(), factorial(nn - t));
            }
        }
        assert_eq!(ak_size_upper(5, 1, 1).unwrap(), n(18));
        assert_eq!(ak_size_upper(4, 2, 1).unwrap(), n(4));
        assert_eq!(ak_size_exact(5, 1, 1).unwrap(), n(14));
        assert_eq!(ak_size_exact(4, 2, 1).unwrap(), n(1));
        assert!(ak_size_exact(4, 1, 2).is_err());
        assert!(ak_size_upper(4, 3, 1).is_err());
    }

    #[test]
    fn ak_exact_matches_scan_small() {
        for nn in 1..=7usize {
            for t in 1..=nn {
                for k in 0..=(nn - t) / 2 {
                    assert_eq!(
                        ak_size_exact(nn as u64, t as u64, k as u64).unwrap(),
                        n(scan_ak(nn, t, k)),
                        "n = {nn}, t = {t}, k = {k}"
                    );
                }
            }
        }
    }

    #[test]
    fn ak_sandwich_and_closed_form() {
        for nn in 2..=30u64 {
            for t in 0..=nn {
                for k in 0..=(nn - t) / 2 {
                    assert!(ak_size_exact(nn, t, k).unwrap() <= ak_size_upper(nn, t, k).unwrap());
                }
                if t + 2 <= nn {
                    assert_eq!(ak_size_exact(nn, t, 1).unwrap(), a1_size_closed(nn, t).unwrap());
                }
            }
        }
    }

    #[test]
    fn a1_closed_examples() {
        assert_eq!(a1_size_closed(4, 2).unwrap(), n(1));
        assert_eq!(a1_size_closed(5, 2).unwrap(), n(5));
        assert_eq!(a1_size_closed(20, 10).unwrap(), n(3_911_040));
        assert!(a1_size_closed(3, 2).is_err());
    }

    #[test]
    fn crossover_examples() {
        assert_eq!(crossover_sign(20, 10).unwrap(), -1);
        assert_eq!(crossover_sign(23, 10).unwrap(), 1);
        for t in 0..20 {
            assert_eq!(crossover_sign(2 * t + 2, t).unwrap(), 1);
        }
        assert!(crossover_sign(5, 4).is_err());
    }

    #[test]
    fn crossover_matches_sizes() {
        for nn in 2..=30u64 {
            for t in 0..=nn - 2 {
                let a0 = BigInt::from(ak_size_exact(nn, t, 0).unwrap());
                let a1 = BigInt::from(ak_size_exact(nn, t, 1).unwrap());
                let sign = match a0.cmp(&a1) {
                    Ordering::Less => -1,
                    Ordering::Equal => 0,
                    Ordering::Greater => 1,
                };
                assert_eq!(crossover_sign(nn, t).unwrap(), sign, "n = {nn}, t = {t}");
            }
        }
    }

    #[test]
    fn argmax_examples() {
        assert_eq!(argmax_ak(5, 1).unwrap(), (0, n(24)));
        assert_eq!(argmax_ak(4, 2).unwrap(), (0, n(2)));
        let (k, size) = argmax_ak(20, 10).unwrap();
        let sweep: Vec<Natural> = (0..=5).map(|k| ak_size_exact(20, 10, k).unwrap()).collect();
        let max = sweep.iter().max().unwrap();
        assert_eq!(&size, max);
        assert_eq!(sweep.iter().position(|v| v == max).unwrap() as u64, k);
        assert!(k >= 1 && size >= n(3_911_040));
    }

    #[test]
    fn f_bound_examples() {
        assert_eq!(f_bound(7, 0, 0).unwrap(), n(1));
        assert_eq!(f_bound(100, 2, 2).unwrap(), n(4950));
        assert_eq!(f_bound(100, 2, 1).unwrap(), n(800));
        assert_eq!(f_bound(100, 2, 0).unwrap(), n(4));
        assert!(f_bound(5, 2, 3).is_err());
        assert!(f_bound(2, 3, 1).is_err());
    }

    #[test]
    fn f_argmax_examples() {
        assert_eq!(f_argmax(100, 2).unwrap(), 2);
        assert_eq!(f_argmax(1_000_000, 10).unwrap(), 10);
        // f(0) = 4, f(1) = 16, f(2) = 1
        assert_eq!(f_argmax(2, 2).unwrap(), 1);
    }

    #[test]
    fn f_argmax_matches_scan() {
        for t in 0..=30u64 {
            for k in 0..=t {
                let values: Vec<Natural> = (0..=k).map(|j| f_bound(t, k, j).unwrap()).collect();
                let max = values.iter().max().unwrap();
                let first = values.iter().position(|v| v == max).unwrap() as u64;
                assert_eq!(f_argmax(t, k).unwrap(), first, "t = {t}, k = {k}");
            }
        }
    }

    #[test]
    fn f_ratio_identity() {
        for t in 1..=40u64 {
            for k in 1..=t {
                for j in 0..k {
                    let lhs = ExactRatio::from_naturals(
                        &f_bound(t, k, j).unwrap(),
                        &f_bound(t, k, j + 1).unwrap(),
                    )
                    .unwrap();
                    let rhs = ExactRatio::from_naturals(
                        &(n(j + 1).pow(3u32) * k),
                        &(n(t - j) * n(k - j).pow(2u32)),
                    )
                    .unwrap();
                    assert_eq!(lhs, rhs, "t = {t}, k = {k}, j = {j}");
                }
            }
        }
    }

    #[test]
    fn peel_bound_examples() {
        for (nn, t) in [(10, 4), (7, 7), (30, 3)] {
            assert_eq!(peel_bound_lhs(nn, t, 0).unwrap(), ExactRatio::one());
        }
        // j0 = 1, f = 32, (k+1) f = 96, 4!/6! = 1/30
        assert_eq!(peel_bound_lhs(10, 4, 2).unwrap(), r(16, 5));
        assert!(peel_bound_lhs(5, 4, 2).is_err());
    }

    #[test]
    fn gj_bound_examples() {
        // brute force of the defining sum with a descending index
        fn direct(t: u64, k: u64, j: u64) -> Natural {
            let mut total = Natural::zero();
            let mut m = t - k;
            while m + 2 * j >= t && m + 1 > 0 {
                let g = t - m;
                if (g + 1) / 2 <= j {
                    total += binomial(t - k, m)
                        * binomial(3 * k, (3 * g + 1) / 2)
                        * n(k).pow((j - (g + 1) / 2) as u32);
                }
                if m == 0 {
                    break;
                }
                m -= 1;
            }
            total
        }
        assert_eq!(gj_bound(5, 2, 0).unwrap(), n(0));
        assert_eq!(gj_bound(6, 2, 1).unwrap(), n(20));
        assert_eq!(gj_bound(8, 3, 1).unwrap(), n(0));
        for t in 2..=14u64 {
            for k in 1..=t {
                for j in 0..k {
                    if 2 * j > t {
                        continue;
                    }
                    assert_eq!(gj_bound(t, k, j).unwrap(), direct(t, k, j), "t={t} k={k} j={j}");
                }
            }
        }
        assert!(gj_bound(6, 2, 2).is_err());
    }

    #[test]
    fn exp_bracket_contains_e() {
        // e lies in (2718281828/10^9, 2718281829/10^9)
        let (lo, hi) = exp_bracket(1, 20);
        let hi = hi.unwrap();
        assert!(lo < r(2_718_281_829, 1_000_000_000));
        assert!(hi > r(2_718_281_828, 1_000_000_000));
        assert!(lo <= hi);
    }

    #[test]
    fn factorial_growth_examples() {
        assert!(factorial_growth_check(1, 1));
        assert!(factorial_growth_check(10, 5));
    }

    #[test]
    fn ratio_parse_and_print() {
        assert_eq!("9/5".parse::<ExactRatio>().unwrap(), r(9, 5));
        assert_eq!("6/4".parse::<ExactRatio>().unwrap().to_string(), "3/2");
        assert_eq!("3".parse::<ExactRatio>().unwrap().to_string(), "3/1");
        assert_eq!("-2/4".parse::<ExactRatio>().unwrap(), r(-1, 2));
        assert!("0.5".parse::<ExactRatio>().is_err());
        assert!("1/0".parse::<ExactRatio>().is_err());
        assert!("1e3".parse::<ExactRatio>().is_err());
    }

    #[test]
    fn ceil_pow_values() {
        assert_eq!(ceil_pow(16, &r(1, 2)).unwrap(), 4);
        assert_eq!(ceil_pow(17, &r(1, 2)).unwrap(), 5);
        assert_eq!(ceil_pow(5, &r(1, 4)).unwrap(), 2);
        assert_eq!(ceil_pow(7, &r(0, 1)).unwrap(), 1);
        assert_eq!(ceil_pow(100, &r(1, 1)).unwrap(), 100);
    }

    #[test]
    fn bound_params_invariants() {
        let p = BoundParams::desk(6, 2, r(1, 2), r(3, 2)).unwrap();
        assert_eq!((p.t_prime, p.q, p.x), (2, 3, 0));
        assert!(p.clone().with_t_prime(3).is_err());
        assert!(p.clone().with_layer(1, 2).is_err());
        assert!(BoundParams::desk(6, 2, r(1, 2), r(1, 1)).is_err());
        assert!(BoundParams::desk(1, 2, r(1, 2), r(2, 1)).is_err());
        let a = BoundParams::asymptotic(10_000, 9_000, r(1, 100)).unwrap();
        assert!(a.t_prime < a.t && a.x > 0 && a.q >= a.t);
    }

    proptest! {
        #[test]
        fn ratio_display_round_trips(p in -10_000i64..10_000, q in 1i64..10_000) {
            let v = r(p, q);
            prop_assert_eq!(v.to_string().parse::<ExactRatio>().unwrap(), v);
        }

        #[test]
        fn exceeds_cap_agrees_with_cross_multiplication(size in 0u64..200, t in 1u64..60, p in 0i64..20, q in 1i64..20) {
            let eps = r(p, q);
            let expected = i128::from(size) * i128::from(q) > (i128::from(q) + i128::from(p)) * i128::from(t);
            prop_assert_eq!(exceeds_cap(size, t, &eps), expected);
        }
    }
}
