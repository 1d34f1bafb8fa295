//! Multi-indices in `n` variables and their exact combinatorics.

use std::fmt;

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};
use smallvec::{smallvec, SmallVec};

use crate::error::{Error, Result};
use crate::scalar::{binomial, factorial};

/// An `n`-tuple of non-negative integers. Serializes as a JSON array.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Entries);

// Inline for the desk-scale dimensions; larger n spills to the heap.
type Entries = SmallVec<[u32; 4]>;

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::ZeroDimension);
        }
        Ok(Self(Entries::from_vec(entries)))
    }

    pub fn zero(n: usize) -> Self {
        Self(smallvec![0; n])
    }

    /// The unit index with a one in slot `k`.
    pub fn unit(n: usize, k: usize) -> Self {
        let mut v: Entries = smallvec![0; n];
        v[k] = 1;
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    /// Total degree `|R|`.
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&r| r == 0)
    }

    /// `R! = r_1! ... r_n!`.
    pub fn factorial(&self) -> BigUint {
        self.0.iter().map(|&r| factorial(r)).product()
    }

    pub fn factorial_f64(&self) -> f64 {
        self.0.iter().map(|&r| factorial_f64(r)).product()
    }

    /// Componentwise order `self <= other`.
    pub fn leq(&self, other: &Self) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// `C(self, j) = prod C(self_k, j_k)`; zero unless `j <= self`.
    pub fn binomial(&self, j: &Self) -> BigUint {
        if !j.leq(self) {
            return BigUint::from(0u32);
        }
        self.0
            .iter()
            .zip(&j.0)
            .fold(BigUint::one(), |acc, (&a, &b)| acc * binomial(a, b))
    }

    pub fn binomial_f64(&self, j: &Self) -> f64 {
        if !j.leq(self) {
            return 0.0;
        }
        self.0
            .iter()
            .zip(&j.0)
            .map(|(&a, &b)| binomial_f64(a, b))
            .product()
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim(), other.dim());
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self - other`, present only when `other <= self`.
    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        other
            .leq(self)
            .then(|| Self(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()))
    }

    pub fn with_slot(&self, k: usize, value: u32) -> Self {
        let mut v = self.0.clone();
        v[k] = value;
        Self(v)
    }

    /// All `J` with `J <= self`, componentwise, in lexicographic order.
    pub fn lower_set(&self) -> Vec<MultiIndex> {
        let mut out: Vec<Entries> = vec![Entries::new()];
        for &bound in &self.0 {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (0..=bound).map(move |j| {
                        let mut p = prefix.clone();
                        p.push(j);
                        p
                    })
                })
                .collect();
        }
        out.into_iter().map(MultiIndex).collect()
    }

    /// `prod z_k^{r_k}` for a point given as a coordinate slice.
    pub fn monomial<T: crate::scalar::Scalar>(&self, point: &[T]) -> T {
        self.0
            .iter()
            .zip(point)
            .fold(T::one(), |acc, (&r, z)| acc * z.powu(r))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl fmt::Display for MultiIndex {
    /// Semicolon-joined entries, the CSV rendering.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        f.write_str(&parts.join(";"))
    }
}

impl std::str::FromStr for MultiIndex {
    type Err = Error;

    /// Parses `1;0;2` (also accepts commas).
    fn from_str(s: &str) -> Result<Self> {
        let entries = s
            .split([';', ','])
            .map(|t| {
                t.trim()
                    .parse::<u32>()
                    .map_err(|_| Error::Parse(format!("bad multi-index entry {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        MultiIndex::new(entries)
    }
}

/// Pairwise combinatorics of two indices of equal dimension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Combinatorics {
    pub degree: u32,
    pub factorial: BigUint,
    pub binomial: BigUint,
    pub leq: bool,
    pub sum: MultiIndex,
    pub difference: Option<MultiIndex>,
}

/// `degree` and `factorial` refer to `i`; `leq` is `j <= i`.
pub fn combinatorics(i: &MultiIndex, j: &MultiIndex) -> Result<Combinatorics> {
    if i.dim() != j.dim() {
        return Err(Error::DimensionMismatch {
            expected: i.dim(),
            found: j.dim(),
        });
    }
    Ok(Combinatorics {
        degree: i.degree(),
        factorial: i.factorial(),
        binomial: i.binomial(j),
        leq: j.leq(i),
        sum: i.add(j),
        difference: i.checked_sub(j),
    })
}

/// All indices with `|N| <= max_degree`, by total degree and then in
/// descending lexicographic order within a degree (`(1,0)` before `(0,1)`).
pub fn enumerate(n: usize, max_degree: u32) -> Vec<MultiIndex> {
    assert!(n >= 1, "dimension must be at least one");
    let mut out = Vec::new();
    for d in 0..=max_degree {
        let mut buf = Vec::with_capacity(n);
        of_degree(n, d, &mut buf, &mut out);
    }
    out
}

/// Indices of exact total degree `d`, same order as [`enumerate`].
pub fn enumerate_degree(n: usize, d: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    of_degree(n, d, &mut Vec::with_capacity(n), &mut out);
    out
}

fn of_degree(slots: usize, remaining: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
    if slots == 1 {
        prefix.push(remaining);
        out.push(MultiIndex(Entries::from_slice(&prefix)));
        prefix.pop();
        return;
    }
    for first in (0..=remaining).rev() {
        prefix.push(first);
        of_degree(slots - 1, remaining - first, prefix, out);
        prefix.pop();
    }
}

const SMALL: usize = 171;

fn factorial_table() -> &'static [f64; SMALL] {
    static TABLE: std::sync::OnceLock<[f64; SMALL]> = std::sync::OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [1.0; SMALL];
        for k in 1..SMALL {
            t[k] = t[k - 1] * k as f64;
        }
        t
    })
}

/// `n!` in floating point (infinite past 170).
pub fn factorial_f64(n: u32) -> f64 {
    factorial_table()
        .get(n as usize)
        .copied()
        .unwrap_or(f64::INFINITY)
}

/// `C(n, k)` in floating point, via a multiplicative product.
pub fn binomial_f64(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec()).unwrap()
    }

    #[test]
    fn pair_combinatorics() {
        let c = combinatorics(&mi(&[2, 1]), &mi(&[1, 1])).unwrap();
        assert_eq!(c.degree, 3);
        assert_eq!(c.factorial, BigUint::from(2u32));
        assert_eq!(c.binomial, BigUint::from(2u32));
        assert!(c.leq);
        assert_eq!(c.sum, mi(&[3, 2]));
        assert_eq!(c.difference, Some(mi(&[1, 0])));

        let c = combinatorics(&mi(&[0, 0]), &mi(&[0, 0])).unwrap();
        assert_eq!(
            (c.degree, c.factorial, c.binomial, c.leq),
            (0, BigUint::one(), BigUint::one(), true)
        );

        // J=(0,2) is not below I=(1,0).
        let c = combinatorics(&mi(&[1, 0]), &mi(&[0, 2])).unwrap();
        assert!(!c.leq);
        assert_eq!(c.difference, None);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let err = combinatorics(&mi(&[1]), &mi(&[1, 0])).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
        assert!(MultiIndex::new(vec![]).is_err());
    }

    #[test]
    fn enumeration_order() {
        assert_eq!(enumerate(1, 2), vec![mi(&[0]), mi(&[1]), mi(&[2])]);
        assert_eq!(enumerate(2, 1), vec![mi(&[0, 0]), mi(&[1, 0]), mi(&[0, 1])]);
        let e = enumerate(2, 2);
        assert_eq!(e.len(), 6);
        assert_eq!(e.last(), Some(&mi(&[0, 2])));
    }

    #[test]
    fn vandermonde_row_sums() {
        for i in enumerate(3, 8) {
            let total: BigUint = i.lower_set().iter().map(|j| i.binomial(j)).sum();
            assert_eq!(total, BigUint::from(2u32).pow(i.degree()));
        }
    }

    #[test]
    fn float_tables_agree_with_exact() {
        for n in 0..30 {
            let exact = factorial(n).to_string().parse::<f64>().unwrap();
            assert!((factorial_f64(n) - exact).abs() <= 1e-15 * exact);
            for k in 0..=n {
                let b = binomial(n, k).to_string().parse::<f64>().unwrap();
                assert!((binomial_f64(n, k) - b).abs() <= 1e-12 * b);
            }
        }
    }

    #[test]
    fn parse_and_display() {
        let r: MultiIndex = "1;0;2".parse().unwrap();
        assert_eq!(r, mi(&[1, 0, 2]));
        assert_eq!(r.to_string(), "1;0;2");
        assert_eq!(serde_json::to_string(&r).unwrap(), "[1,0,2]");
    }
}
