//! The coefficient families entering the kappa recursions: the one-variable
//! `beta_b` with generating function `sqrt(2x)/sin(sqrt(2x))`, the
//! multi-index `alpha_L`, and the series inversions relating them.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exact::{bernoulli, dfact, factorial, pow2, sign, Rational};
use crate::multiindex::{self, MultiIndex};

/// `beta_b` from the Bernoulli closed form
/// `(-1)^{b-1} 2^b (2^{2b} - 2) B_{2b} / (2b)!`.
pub fn beta_closed(b: u32) -> Rational {
    if b == 0 {
        return Rational::one();
    }
    let b2 = bernoulli(2 * b).expect("even index");
    let scale = BigInt::from(sign(b as u64 - 1)) * pow2(b) * (pow2(2 * b) - 2);
    Rational::from_integer(scale) * b2 / Rational::from_integer(factorial(2 * b as u64))
}

/// `beta_0..=beta_max` by inverting `sin(sqrt(2x))/sqrt(2x)`.
pub fn beta_series(max: usize) -> Vec<Rational> {
    let sinc: Vec<Rational> = (0..=max as u64)
        .map(|k| {
            Rational::new(
                BigInt::from(sign(k)) * pow2(k as u32),
                factorial(2 * k + 1),
            )
        })
        .collect();
    invert_univariate(&sinc, max).expect("leading coefficient is 1")
}

/// Multiplicative inverse of a power series with constant term 1, to order
/// `max`. Missing coefficients are read as 0.
pub fn invert_univariate(coeffs: &[Rational], max: usize) -> Result<Vec<Rational>> {
    if coeffs.first().map_or(true, |c| !c.is_one()) {
        return Err(Error::Domain("series must have constant term 1".into()));
    }
    let at = |i: usize| coeffs.get(i).cloned().unwrap_or_else(Rational::zero);
    let mut inv = vec![Rational::one()];
    for k in 1..=max {
        let mut acc = Rational::zero();
        for i in 0..k {
            let c = at(k - i);
            if !c.is_zero() {
                acc += &inv[i] * c;
            }
        }
        inv.push(-acc);
    }
    Ok(inv)
}

/// Inverse of a multi-index family under the convolution
/// `sum_{L+L'=b} x_L y_{L'}`, for all indices of weight `<= max_weight`.
pub fn invert_multiindex<F>(family: F, max_weight: u32) -> Result<HashMap<MultiIndex, Rational>>
where
    F: Fn(&MultiIndex) -> Rational,
{
    if !family(&MultiIndex::zero()).is_one() {
        return Err(Error::Domain("family must take the value 1 at 0".into()));
    }
    let mut inv: HashMap<MultiIndex, Rational> = HashMap::new();
    for b in multiindex::up_to_weight(max_weight) {
        if b.is_zero() {
            inv.insert(b, Rational::one());
            continue;
        }
        let mut acc = Rational::zero();
        for (l, rest) in b.splits() {
            if rest.is_zero() {
                continue;
            }
            let f = family(&rest);
            if !f.is_zero() {
                acc += &inv[&l] * f;
            }
        }
        inv.insert(b, -acc);
    }
    Ok(inv)
}

/// `(-1)^{||L||} / (L! (2|L|+1)!!)`, the series whose inverse carries the
/// `alpha_L / L!`.
pub fn recursion_kernel(l: &MultiIndex) -> Rational {
    let den = l.factorial() * dfact(2 * l.weight() as i64 + 1);
    Rational::new(BigInt::from(multiindex::sign_of_size(l)), den)
}

/// `alpha_L` for all `|L| <= max_weight`.
#[derive(Clone, Debug)]
pub struct AlphaTable {
    max_weight: u32,
    order: Vec<MultiIndex>,
    values: HashMap<MultiIndex, Rational>,
}

impl AlphaTable {
    pub fn build(max_weight: u32) -> Self {
        let order = multiindex::up_to_weight(max_weight);
        let mut values: HashMap<MultiIndex, Rational> = HashMap::with_capacity(order.len());
        for b in &order {
            if b.is_zero() {
                values.insert(b.clone(), Rational::one());
                continue;
            }
            let mut acc = Rational::zero();
            for (l, rest) in b.splits() {
                if rest.is_zero() {
                    continue;
                }
                let den = l.factorial()
                    * rest.factorial()
                    * dfact(2 * rest.weight() as i64 + 1);
                let term = &values[&l] / Rational::from_integer(den);
                if rest.size() % 2 == 1 {
                    acc += term;
                } else {
                    acc -= term;
                }
            }
            values.insert(b.clone(), acc * Rational::from_integer(b.factorial()));
        }
        Self {
            max_weight,
            order,
            values,
        }
    }

    pub fn max_weight(&self) -> u32 {
        self.max_weight
    }

    pub fn get(&self, l: &MultiIndex) -> Option<&Rational> {
        self.values.get(l)
    }

    pub fn alpha(&self, l: &MultiIndex) -> &Rational {
        self.values
            .get(l)
            .unwrap_or_else(|| panic!("alpha table built to weight {} lacks {l}", self.max_weight))
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Entries ordered by (weight, lexicographic).
    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, &Rational)> {
        self.order.iter().map(move |l| (l, &self.values[l]))
    }

    /// Residual of the defining relation at `b`; zero for every `b != 0`.
    pub fn defining_residual(&self, b: &MultiIndex) -> Rational {
        b.splits()
            .iter()
            .map(|(l, rest)| {
                let den = l.factorial() * rest.factorial() * dfact(2 * rest.weight() as i64 + 1);
                Rational::new(BigInt::from(multiindex::sign_of_size(l)), den) * self.alpha(l)
            })
            .fold(Rational::zero(), |acc, t| acc + t)
    }

    /// One `p/q` line per index, tab separated.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (l, v) in self.iter() {
            out.push_str(&format!("{l}\t{v}\n"));
        }
        out
    }
}

static ALPHA: OnceLock<Mutex<Arc<AlphaTable>>> = OnceLock::new();

/// Process-wide alpha table covering at least `max_weight`.
pub fn shared_alpha_table(max_weight: u32) -> Arc<AlphaTable> {
    let cell = ALPHA.get_or_init(|| Mutex::new(Arc::new(AlphaTable::build(0))));
    let mut guard = cell.lock().unwrap();
    if guard.max_weight() < max_weight {
        *guard = Arc::new(AlphaTable::build(max_weight));
    }
    Arc::clone(&guard)
}

/// The three candidate series in the positivity question.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesId {
    /// `(-1)^{||L||} / (L! (2|L|+1)!!)`
    RecursionKernel,
    /// `(-1)^{||L||} / (L! (2|L|-1)!!)`
    OddKernel,
    /// `(-1)^{||L||} / (L! |L|!)`
    PlainKernel,
}

impl SeriesId {
    pub const ALL: [SeriesId; 3] = [
        SeriesId::RecursionKernel,
        SeriesId::OddKernel,
        SeriesId::PlainKernel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SeriesId::RecursionKernel => "recursion-kernel",
            SeriesId::OddKernel => "odd-kernel",
            SeriesId::PlainKernel => "plain-kernel",
        }
    }

    pub fn coefficient(self, l: &MultiIndex) -> Rational {
        let w = l.weight() as i64;
        let tail = match self {
            SeriesId::RecursionKernel => dfact(2 * w + 1),
            SeriesId::OddKernel => dfact(2 * w - 1),
            SeriesId::PlainKernel => factorial(w as u64),
        };
        Rational::new(
            BigInt::from(multiindex::sign_of_size(l)),
            l.factorial() * tail,
        )
    }
}

impl fmt::Display for SeriesId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SeriesId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SeriesId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown series {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Positive,
    Zero,
    Negative,
}

impl Sign {
    pub fn of(r: &Rational) -> Sign {
        if r.is_positive() {
            Sign::Positive
        } else if r.is_zero() {
            Sign::Zero
        } else {
            Sign::Negative
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Positive => '+',
            Sign::Zero => '0',
            Sign::Negative => '-',
        }
    }
}

#[derive(Clone, Debug)]
pub struct PositivityReport {
    pub series: SeriesId,
    pub entries: Vec<(MultiIndex, Rational, Sign)>,
}

impl PositivityReport {
    pub fn non_positive(&self) -> impl Iterator<Item = &(MultiIndex, Rational, Sign)> {
        self.entries.iter().filter(|e| e.2 != Sign::Positive)
    }

    pub fn all_positive(&self) -> bool {
        self.non_positive().next().is_none()
    }
}

/// Inverts one of the candidate series and records the sign of every
/// coefficient up to `max_weight`.
pub fn positivity_scan(series: SeriesId, max_weight: u32) -> PositivityReport {
    let inv = invert_multiindex(|l| series.coefficient(l), max_weight)
        .expect("candidate series start at 1");
    let entries = multiindex::up_to_weight(max_weight)
        .into_iter()
        .map(|l| {
            let v = inv[&l].clone();
            let s = Sign::of(&v);
            (l, v, s)
        })
        .collect();
    PositivityReport { series, entries }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, rat};
    use proptest::prelude::*;

    fn mi(s: &str) -> MultiIndex {
        s.parse().unwrap()
    }

    /// Naive inversion by solving `a * b = 1` coefficient by coefficient with
    /// an explicit truncated product, independent of `invert_univariate`.
    fn inverse_by_products(series: &[Rational]) -> Vec<Rational> {
        let n = series.len();
        let mut inv = vec![Rational::zero(); n];
        inv[0] = Rational::one();
        for k in 1..n {
            // coefficient k of series * inv with inv[k] = 0 so far
            let partial: Rational = (0..=k).map(|i| &series[i] * &inv[k - i]).sum();
            inv[k] = -partial;
        }
        inv
    }

    #[test]
    fn beta_values() {
        assert_eq!(beta_closed(0), int(1));
        assert_eq!(beta_closed(1), rat(1, 3));
        assert_eq!(beta_closed(2), rat(7, 90));
        assert_eq!(beta_series(0), vec![int(1)]);
        assert_eq!(beta_series(2), vec![int(1), rat(1, 3), rat(7, 90)]);
        assert_eq!(beta_series(3)[3], rat(31, 1890));
        let sinc: Vec<Rational> = (0..4u64)
            .map(|k| Rational::new(BigInt::from(sign(k)) * pow2(k as u32), factorial(2 * k + 1)))
            .collect();
        assert_eq!(inverse_by_products(&sinc), beta_series(3));
    }

    #[test]
    fn beta_routes_agree() {
        let series = beta_series(25);
        for b in 0..=25u32 {
            assert_eq!(beta_closed(b), series[b as usize], "beta_{b}");
        }
    }

    #[test]
    fn kernel_inverts_to_beta() {
        let kernel: Vec<Rational> = (0..=8u64)
            .map(|k| Rational::new(BigInt::from(sign(k)), factorial(k) * dfact(2 * k as i64 + 1)))
            .collect();
        assert_eq!(invert_univariate(&kernel, 8).unwrap(), beta_series(8));
    }

    #[test]
    fn univariate_inversion() {
        let geo = invert_univariate(&[int(1), int(-1)], 5).unwrap();
        assert!(geo.iter().all(|c| c == &int(1)));
        let id = invert_univariate(&[int(1)], 3).unwrap();
        assert_eq!(id, vec![int(1), int(0), int(0), int(0)]);
        assert!(invert_univariate(&[int(2)], 3).is_err());
        assert!(invert_univariate(&[], 3).is_err());
    }

    #[test]
    fn multiindex_inversion() {
        let delta = |l: &MultiIndex| if l.is_zero() { int(1) } else { int(0) };
        let inv = invert_multiindex(delta, 4).unwrap();
        assert!(inv.iter().all(|(l, v)| *v == delta(l)));
        assert!(invert_multiindex(|_| int(2), 2).is_err());

        // restriction to index 1 reproduces the one-variable inversion
        let uni: Vec<Rational> = (0..=6).map(|k| rat(1, k + 1)).collect();
        let inv = invert_multiindex(
            |l| match l.as_kappa1_power() {
                Some(k) => rat(1, k as i64 + 1),
                None => int(0),
            },
            6,
        )
        .unwrap();
        let expected = invert_univariate(&uni, 6).unwrap();
        for k in 0..=6u32 {
            assert_eq!(inv[&MultiIndex::single(1, k)], expected[k as usize]);
        }
    }

    #[test]
    fn alpha_values() {
        let t = AlphaTable::build(6);
        assert_eq!(t.alpha(&mi("-")), &int(1));
        assert_eq!(t.alpha(&mi("1:1")), &rat(1, 3));
        assert_eq!(t.alpha(&mi("1:2")), &rat(7, 45));
        assert_eq!(t.alpha(&mi("2:1")), &rat(1, 15));
        for (b, _) in t.iter() {
            if !b.is_zero() {
                assert!(t.defining_residual(b).is_zero(), "residual at {b}");
            }
        }
    }

    #[test]
    fn alpha_is_scaled_kernel_inverse() {
        let t = AlphaTable::build(6);
        let inv = invert_multiindex(recursion_kernel, 6).unwrap();
        for (l, a) in t.iter() {
            assert_eq!(a, &(&inv[l] * Rational::from_integer(l.factorial())), "alpha_{l}");
        }
    }

    #[test]
    fn alpha_on_kappa1_is_beta() {
        let t = AlphaTable::build(10);
        let beta = beta_series(10);
        for b in 1..=10u32 {
            let expected = &beta[b as usize] * Rational::from_integer(factorial(b as u64));
            assert_eq!(t.alpha(&MultiIndex::single(1, b)), &expected);
        }
    }

    #[test]
    fn positivity_examples() {
        let r = positivity_scan(SeriesId::RecursionKernel, 0);
        assert_eq!(r.entries, vec![(mi("-"), int(1), Sign::Positive)]);
        assert!(positivity_scan(SeriesId::RecursionKernel, 3).all_positive());
        let p = positivity_scan(SeriesId::PlainKernel, 2);
        let idx: Vec<String> = p.entries.iter().map(|e| e.0.to_string()).collect();
        assert_eq!(idx, vec!["-", "1:1", "1:2", "2:1"]);
        assert_eq!("odd-kernel".parse::<SeriesId>().unwrap(), SeriesId::OddKernel);
    }

    #[test]
    fn dump_format() {
        let t = AlphaTable::build(2);
        assert_eq!(t.dump(), "-\t1\n1:1\t1/3\n1:2\t7/45\n2:1\t1/15\n");
    }

    proptest! {
        #[test]
        fn convolution_with_kernel_vanishes(pairs in proptest::collection::vec((1u32..4, 0u32..3), 1..3)) {
            let b = MultiIndex::from_pairs(pairs);
            prop_assume!(!b.is_zero() && b.weight() <= 8);
            let t = shared_alpha_table(8);
            let s: Rational = b
                .splits()
                .iter()
                .map(|(l, rest)| {
                    t.alpha(l) / Rational::from_integer(l.factorial()) * recursion_kernel(rest)
                })
                .sum();
            prop_assert!(s.is_zero());
        }
    }
}
