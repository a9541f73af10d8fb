//! Finitely supported exponent sequences `b = (b(1), b(2), ...)`, used to
//! name kappa monomials `prod kappa_i^{b(i)}` and the matching `s`-monomials.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::Error;
use crate::exact::{binomial, factorial};

/// Sparse multi-index: `(index, exponent)` pairs sorted by index, with no zero
/// exponents stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<(u32, u32)>);

impl MultiIndex {
    pub fn zero() -> Self {
        Self(Vec::new())
    }

    /// `m * e_i`
    pub fn single(index: u32, exponent: u32) -> Self {
        assert!(index >= 1, "multi-index positions start at 1");
        if exponent == 0 {
            Self::zero()
        } else {
            Self(vec![(index, exponent)])
        }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, u32)>) -> Self {
        let mut v: Vec<(u32, u32)> = Vec::new();
        for (i, e) in pairs {
            assert!(i >= 1, "multi-index positions start at 1");
            v.push((i, e));
        }
        v.sort_unstable();
        let mut out: Vec<(u32, u32)> = Vec::with_capacity(v.len());
        for (i, e) in v {
            match out.last_mut() {
                Some(last) if last.0 == i => last.1 += e,
                _ => out.push((i, e)),
            }
        }
        out.retain(|&(_, e)| e > 0);
        Self(out)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[(u32, u32)] {
        &self.0
    }

    pub fn get(&self, index: u32) -> u32 {
        self.0
            .iter()
            .find(|&&(i, _)| i == index)
            .map_or(0, |&(_, e)| e)
    }

    /// `|m| = sum i * m(i)`
    pub fn weight(&self) -> u32 {
        self.0.iter().map(|&(i, e)| i * e).sum()
    }

    /// `||m|| = sum m(i)`
    pub fn size(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn max_index(&self) -> u32 {
        self.0.last().map_or(0, |&(i, _)| i)
    }

    /// Supported only on index 1; returns the exponent of `kappa_1`.
    pub fn as_kappa1_power(&self) -> Option<u32> {
        match self.0.as_slice() {
            [] => Some(0),
            [(1, a)] => Some(*a),
            _ => None,
        }
    }

    /// `m! = prod m(i)!`
    pub fn factorial(&self) -> BigInt {
        self.0.iter().map(|&(_, e)| factorial(e as u64)).product()
    }

    /// `binom(m, t) = prod binom(m(i), t(i))`, zero unless `t <= m`.
    pub fn binomial(&self, t: &MultiIndex) -> BigInt {
        if !t.le(self) {
            return BigInt::zero();
        }
        t.0.iter()
            .map(|&(i, e)| binomial(self.get(i) as u64, e as i64))
            .product()
    }

    /// Multinomial `binom(m; a_1, ..., a_k)`, zero unless the parts sum to `m`.
    pub fn multinomial(&self, parts: &[&MultiIndex]) -> BigInt {
        let total = parts
            .iter()
            .fold(MultiIndex::zero(), |acc, p| acc.add(p));
        if &total != self {
            return BigInt::zero();
        }
        let denom: BigInt = parts.iter().map(|p| p.factorial()).product();
        self.factorial() / denom
    }

    /// Componentwise `<=`.
    pub fn le(&self, other: &MultiIndex) -> bool {
        self.0.iter().all(|&(i, e)| other.get(i) >= e)
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex::from_pairs(self.0.iter().chain(other.0.iter()).copied())
    }

    /// `self - other`, or `None` when `other` is not below `self`.
    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        if !other.le(self) {
            return None;
        }
        Some(MultiIndex(
            self.0
                .iter()
                .map(|&(i, e)| (i, e - other.get(i)))
                .filter(|&(_, e)| e > 0)
                .collect(),
        ))
    }

    /// Every `L <= self`, lexicographic on the exponent vector.
    pub fn submultiindices(&self) -> Vec<MultiIndex> {
        let mut out = vec![Vec::new()];
        for &(i, e) in &self.0 {
            let mut next = Vec::with_capacity(out.len() * (e as usize + 1));
            for prefix in &out {
                for k in 0..=e {
                    let mut p: Vec<(u32, u32)> = prefix.clone();
                    if k > 0 {
                        p.push((i, k));
                    }
                    next.push(p);
                }
            }
            out = next;
        }
        out.into_iter().map(MultiIndex).collect()
    }

    /// All ordered pairs `(L, L')` with `L + L' = self`.
    pub fn splits(&self) -> Vec<(MultiIndex, MultiIndex)> {
        self.submultiindices()
            .into_iter()
            .map(|l| {
                let rest = self.checked_sub(&l).expect("sub-multi-index");
                (l, rest)
            })
            .collect()
    }

    /// All ordered triples `(L, e, f)` with `L + e + f = self`.
    pub fn three_way_splits(&self) -> Vec<(MultiIndex, MultiIndex, MultiIndex)> {
        let mut out = Vec::new();
        for (l, rest) in self.splits() {
            for (e, f) in rest.splits() {
                out.push((l.clone(), e, f));
            }
        }
        out
    }

    /// All ordered `k`-tuples of nonzero multi-indices summing to `self`.
    pub fn ordered_decompositions(&self, k: usize) -> Vec<Vec<MultiIndex>> {
        assert!(k >= 1, "decomposition into zero parts");
        if k == 1 {
            return if self.is_zero() {
                Vec::new()
            } else {
                vec![vec![self.clone()]]
            };
        }
        if k as u32 > self.size() {
            return Vec::new();
        }
        let mut out = Vec::new();
        for (first, rest) in self.splits() {
            if first.is_zero() || rest.size() < (k - 1) as u32 {
                continue;
            }
            for mut tail in rest.ordered_decompositions(k - 1) {
                tail.insert(0, first.clone());
                out.push(tail);
            }
        }
        out
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("-");
        }
        let parts: Vec<String> = self.0.iter().map(|(i, e)| format!("{i}:{e}")).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for MultiIndex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "-" || s.is_empty() {
            return Ok(MultiIndex::zero());
        }
        let mut pairs = Vec::new();
        for part in s.split(',') {
            let bad = || Error::Parse(format!("bad multi-index entry {part:?}"));
            let (i, e) = part.split_once(':').ok_or_else(bad)?;
            let i: u32 = i.trim().parse().map_err(|_| bad())?;
            let e: u32 = e.trim().parse().map_err(|_| bad())?;
            if i == 0 {
                return Err(bad());
            }
            pairs.push((i, e));
        }
        Ok(MultiIndex::from_pairs(pairs))
    }
}

/// All multi-indices of weight exactly `w`, sorted lexicographically.
pub fn of_weight(w: u32) -> Vec<MultiIndex> {
    fn rec(w: u32, max_part: u32, acc: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        if w == 0 {
            out.push(MultiIndex::from_pairs(acc.iter().map(|&i| (i, 1))));
            return;
        }
        for p in (1..=max_part.min(w)).rev() {
            acc.push(p);
            rec(w - p, p, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    rec(w, w, &mut Vec::new(), &mut out);
    out.sort();
    out
}

/// All multi-indices with weight at most `w`, sorted by (weight, lexicographic).
pub fn up_to_weight(w: u32) -> Vec<MultiIndex> {
    (0..=w).flat_map(of_weight).collect()
}

/// Exact `b! / (L! L'!)` check helper for tests and invariants.
pub fn split_binomial_via_factorials(b: &MultiIndex, l: &MultiIndex) -> BigInt {
    let rest = b.checked_sub(l).expect("L <= b");
    b.factorial() / (l.factorial() * rest.factorial())
}

pub(crate) fn sign_of_size(m: &MultiIndex) -> i64 {
    if m.size() % 2 == 0 {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn one_if_zero(m: &MultiIndex) -> BigInt {
        if m.is_zero() {
            BigInt::one()
        } else {
            BigInt::zero()
        }
    }
    use proptest::prelude::*;

    fn mi(s: &str) -> MultiIndex {
        s.parse().unwrap()
    }

    #[test]
    fn norms_and_factorials() {
        assert_eq!(mi("-").weight(), 0);
        assert_eq!(mi("1:3").weight(), 3);
        assert_eq!(mi("1:1,2:2").weight(), 5);
        assert_eq!(mi("-").size(), 0);
        assert_eq!(mi("1:1,2:2").size(), 3);
        assert_eq!(mi("5:4").size(), 4);
        assert_eq!(mi("-").factorial(), BigInt::from(1));
        assert_eq!(mi("1:3").factorial(), BigInt::from(6));
        assert_eq!(mi("1:2,3:2").factorial(), BigInt::from(4));
    }

    #[test]
    fn binomials() {
        assert_eq!(mi("1:2").binomial(&mi("1:1")), BigInt::from(2));
        assert_eq!(mi("1:3,2:1").binomial(&mi("1:1,2:1")), BigInt::from(3));
        assert_eq!(mi("1:1").binomial(&mi("2:1")), BigInt::from(0));
    }

    #[test]
    fn split_enumeration() {
        assert_eq!(mi("-").splits(), vec![(mi("-"), mi("-"))]);
        assert_eq!(
            mi("1:1").splits(),
            vec![(mi("-"), mi("1:1")), (mi("1:1"), mi("-"))]
        );
        assert_eq!(mi("1:1,2:1").splits().len(), 4);
        assert_eq!(mi("1:2,3:1").splits().len(), 6);
    }

    #[test]
    fn decompositions() {
        assert_eq!(
            mi("1:2").ordered_decompositions(2),
            vec![vec![mi("1:1"), mi("1:1")]]
        );
        assert_eq!(mi("1:2").ordered_decompositions(1), vec![vec![mi("1:2")]]);
        let d = mi("1:1,2:1").ordered_decompositions(2);
        assert_eq!(d.len(), 2);
        assert!(d.contains(&vec![mi("1:1"), mi("2:1")]));
        assert!(d.contains(&vec![mi("2:1"), mi("1:1")]));
        assert!(mi("1:2").ordered_decompositions(3).is_empty());
    }

    #[test]
    fn triples() {
        assert_eq!(mi("-").three_way_splits().len(), 1);
        assert_eq!(mi("1:1").three_way_splits().len(), 3);
        assert_eq!(mi("2:2").three_way_splits().len(), 6);
    }

    #[test]
    fn text_form() {
        assert_eq!(mi("1:3,2:1").to_string(), "1:3,2:1");
        assert_eq!(mi("2:1,1:3").to_string(), "1:3,2:1");
        assert_eq!(MultiIndex::zero().to_string(), "-");
        assert_eq!(mi("1:0").to_string(), "-");
        assert!("0:1".parse::<MultiIndex>().is_err());
        assert!("1-2".parse::<MultiIndex>().is_err());
    }

    #[test]
    fn weight_enumeration() {
        // partition counts p(0..=6)
        let counts: Vec<usize> = (0..=6).map(|w| of_weight(w).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 3, 5, 7, 11]);
        assert!(of_weight(5).iter().all(|m| m.weight() == 5));
    }

    fn arb_mi() -> impl Strategy<Value = MultiIndex> {
        proptest::collection::vec((1u32..4, 0u32..4), 0..4).prop_map(MultiIndex::from_pairs)
    }

    proptest! {
        #[test]
        fn split_binomial_matches_factorials(b in arb_mi()) {
            for (l, _) in b.splits() {
                prop_assert_eq!(b.binomial(&l), split_binomial_via_factorials(&b, &l));
            }
        }

        #[test]
        fn alternating_binomial_sum_vanishes(b in arb_mi()) {
            let s: BigInt = b
                .splits()
                .iter()
                .map(|(l, _)| b.binomial(l) * sign_of_size(l))
                .sum();
            prop_assert_eq!(s, one_if_zero(&b));
        }

        #[test]
        fn split_count_is_product(b in arb_mi()) {
            let expected: usize = b.entries().iter().map(|&(_, e)| e as usize + 1).product();
            prop_assert_eq!(b.splits().len(), expected);
        }

        #[test]
        fn decompositions_vanish_beyond_size(b in arb_mi(), extra in 1usize..3) {
            prop_assert!(b.ordered_decompositions(b.size() as usize + extra).is_empty());
        }
    }
}
