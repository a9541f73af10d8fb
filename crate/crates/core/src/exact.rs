//! Exact rational arithmetic and the integer combinatorics used by every
//! recursion in the crate.

use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision exact rational, always kept in lowest terms with a
/// positive denominator.
pub type Rational = num_rational::BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: impl Into<BigInt>) -> Rational {
    Rational::from_integer(n.into())
}

/// Parses the canonical `p/q` (or `p`) rendering.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let parsed: Option<Rational> = match s.split_once('/') {
        Some((p, q)) => {
            let p: Option<BigInt> = p.parse().ok();
            let q: Option<BigInt> = q.parse().ok();
            match (p, q) {
                (Some(p), Some(q)) if !q.is_zero() => Some(Rational::new(p, q)),
                _ => None,
            }
        }
        None => s.parse::<BigInt>().ok().map(Rational::from_integer),
    };
    parsed.ok_or_else(|| Error::Parse(format!("not a rational: {s:?}")))
}

/// `k!!` with the conventions `(-1)!! = 0!! = 1`.
pub fn double_factorial(k: i64) -> Result<BigInt> {
    if k < -1 {
        return Err(Error::Domain(format!("double factorial of {k}")));
    }
    let mut acc = BigInt::one();
    let mut i = k;
    while i > 1 {
        acc *= i;
        i -= 2;
    }
    Ok(acc)
}

/// Same as [`double_factorial`] for callers that have already filtered out
/// subscripts below -1.
pub(crate) fn dfact(k: i64) -> BigInt {
    double_factorial(k).expect("negative double factorial argument")
}

pub fn factorial(n: u64) -> BigInt {
    (2..=n).fold(BigInt::one(), |acc, i| acc * i)
}

pub fn binomial(n: u64, k: i64) -> BigInt {
    if k < 0 || k as u64 > n {
        return BigInt::zero();
    }
    let k = (k as u64).min(n - k as u64);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

pub fn pow2(e: u32) -> BigInt {
    BigInt::one() << e
}

static BERNOULLI: OnceLock<RwLock<Vec<Rational>>> = OnceLock::new();

/// Bernoulli number `B_m` for even `m`, memoized up to the largest index
/// requested so far.
pub fn bernoulli(m: u32) -> Result<Rational> {
    if m % 2 == 1 {
        return Err(Error::Domain(format!("bernoulli index {m} is odd")));
    }
    let table = BERNOULLI.get_or_init(|| RwLock::new(vec![Rational::one()]));
    if let Some(b) = table.read().unwrap().get(m as usize) {
        return Ok(b.clone());
    }
    let mut t = table.write().unwrap();
    // sum_{j=0}^{n} C(n+1, j) B_j = 0
    while t.len() <= m as usize {
        let n = t.len() as u64;
        let mut acc = Rational::zero();
        for (j, b) in t.iter().enumerate() {
            if !b.is_zero() {
                acc += Rational::from_integer(binomial(n + 1, j as i64)) * b;
            }
        }
        let next = -acc / Rational::from_integer(BigInt::from(n + 1));
        t.push(next);
    }
    Ok(t[m as usize].clone())
}

/// Sign helper: `(-1)^k`.
pub fn sign(k: u64) -> i64 {
    if k % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Exact reduced check used by the cache loader.
pub(crate) fn is_canonical(r: &Rational) -> bool {
    r.denom().is_positive() && r.numer().gcd(r.denom()).is_one()
}
