//! Weil-Petersson volume polynomials `Vol_{g,n}(L)` assembled from
//! `<kappa_1^{d_0} tau_{d_1} ... tau_{d_n}>_g`.
//!
//! The coefficient of `prod L_i^{2 d_i}` is
//! `2^{2 d_0 - D} pi^{2 d_0} <kappa_1^{d_0} prod tau_{d_i}>_g / prod_{i=0}^n d_i!`
//! with `D = 3g - 3 + n` and `d_0 = D - sum d_i`. The `(1,1)` polynomial is
//! `L^2/48 + pi^2/12`, half of the orbifold-normalized `(L^2 + 4 pi^2)/24`
//! quoted elsewhere; the elliptic involution is not divided out here.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde_json::json;

use crate::correlator::{CorrelatorKey, Evaluator};
use crate::error::{Error, Result};
use crate::exact::{factorial, pow2, Rational};
use crate::multiindex::MultiIndex;

/// `V_{g,n}` stored with one coefficient per sorted (descending) exponent
/// vector; the polynomial is symmetric in `L_1, ..., L_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VolumePolynomial {
    pub genus: u32,
    pub n: u32,
    terms: BTreeMap<Vec<u32>, Rational>,
}

/// A rational combination of even powers of pi, keyed by the pi exponent.
pub type PiSum = BTreeMap<u32, Rational>;

impl VolumePolynomial {
    pub fn dimension(&self) -> u32 {
        3 * self.genus + self.n - 3
    }

    /// Coefficient and pi exponent of `prod L_i^{2 d_i}`.
    pub fn coefficient(&self, d: &[u32]) -> Option<(Rational, u32)> {
        if d.len() != self.n as usize {
            return None;
        }
        let mut key = d.to_vec();
        key.sort_unstable_by(|a, b| b.cmp(a));
        let total: u32 = d.iter().sum();
        let c = self.terms.get(&key)?;
        Some((c.clone(), 2 * (self.dimension() - total)))
    }

    /// Number of stored symmetric representatives.
    pub fn representatives(&self) -> usize {
        self.terms.len()
    }

    /// Every monomial with its coefficient and pi exponent, sorted by
    /// exponent vector.
    pub fn expanded_terms(&self) -> Vec<(Vec<u32>, Rational, u32)> {
        let mut out = Vec::new();
        for (rep, c) in &self.terms {
            for perm in distinct_permutations(rep) {
                let total: u32 = perm.iter().sum();
                out.push((perm, c.clone(), 2 * (self.dimension() - total)));
            }
        }
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }

    /// Lines like `1/2 * pi^2 * L1^2`.
    pub fn render_plain(&self) -> String {
        let mut out = String::new();
        for (d, c, pi) in self.expanded_terms() {
            let mut parts = vec![c.to_string()];
            if pi > 0 {
                parts.push(format!("pi^{pi}"));
            }
            for (i, &di) in d.iter().enumerate() {
                if di > 0 {
                    parts.push(format!("L{}^{}", i + 1, 2 * di));
                }
            }
            out.push_str(&parts.join(" * "));
            out.push('\n');
        }
        out
    }

    pub fn render_tsv(&self) -> String {
        let mut out = String::from("d\tcoefficient\tpi_power\n");
        for (d, c, pi) in self.expanded_terms() {
            let d: Vec<String> = d.iter().map(u32::to_string).collect();
            out.push_str(&format!("{}\t{}\t{}\n", d.join(","), c, pi));
        }
        out
    }

    pub fn render_json(&self) -> String {
        let terms: Vec<_> = self
            .expanded_terms()
            .into_iter()
            .map(|(d, c, pi)| json!({"d": d, "coefficient": c.to_string(), "pi_power": pi}))
            .collect();
        json!({"genus": self.genus, "n": self.n, "terms": terms}).to_string() + "\n"
    }
}

fn distinct_permutations(v: &[u32]) -> Vec<Vec<u32>> {
    let mut cur = v.to_vec();
    cur.sort_unstable();
    let mut out = vec![cur.clone()];
    // next lexicographic permutation until exhausted
    loop {
        let Some(i) = (1..cur.len()).rev().find(|&i| cur[i - 1] < cur[i]) else {
            break;
        };
        let j = (i..cur.len()).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
        out.push(cur.clone());
    }
    out
}

fn check_stable(genus: u32, n: u32) -> Result<()> {
    if 2 * genus as i64 - 2 + n as i64 <= 0 {
        return Err(Error::Domain(format!("(g, n) = ({genus}, {n}) is unstable")));
    }
    Ok(())
}

/// `2^e` for a possibly negative exponent.
fn two_pow(e: i64) -> Rational {
    if e >= 0 {
        Rational::from_integer(pow2(e as u32))
    } else {
        Rational::new(BigInt::one(), pow2((-e) as u32))
    }
}

/// Descending exponent vectors of length `n` with sum at most `max`.
fn descending_vectors(n: u32, max: u32) -> Vec<Vec<u32>> {
    fn rec(n: u32, budget: u32, cap: u32, acc: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if n == 0 {
            out.push(acc.clone());
            return;
        }
        for x in 0..=cap.min(budget) {
            acc.push(x);
            rec(n - 1, budget - x, x, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, max, max, &mut Vec::new(), &mut out);
    out
}

pub fn volume_polynomial(genus: u32, n: u32, ev: &Evaluator) -> Result<VolumePolynomial> {
    if n == 0 {
        return Err(Error::Domain("volume polynomials need n >= 1".into()));
    }
    check_stable(genus, n)?;
    let dim = 3 * genus + n - 3;
    let mut terms = BTreeMap::new();
    for d in descending_vectors(n, dim) {
        let d0 = dim - d.iter().sum::<u32>();
        let key = CorrelatorKey::new(genus, MultiIndex::single(1, d0), d.clone());
        let v = ev.evaluate(&key)?;
        let den: BigInt = d.iter().map(|&di| factorial(di as u64)).product::<BigInt>()
            * factorial(d0 as u64);
        let c = v * two_pow(2 * d0 as i64 - dim as i64) / Rational::from_integer(den);
        if !c.is_zero() {
            terms.insert(d, c);
        }
    }
    Ok(VolumePolynomial { genus, n, terms })
}

/// `<kappa_1^{3g-3+n} tau_0^n>_g`.
pub fn wp_top(genus: u32, n: u32, ev: &Evaluator) -> Result<Rational> {
    check_stable(genus, n)?;
    if n == 0 && genus < 2 {
        return Err(Error::Domain("no marked points requires genus >= 2".into()));
    }
    let dim = 3 * genus + n - 3;
    ev.evaluate(&CorrelatorKey::new(
        genus,
        MultiIndex::single(1, dim),
        vec![0; n as usize],
    ))
}

/// Exact substitution of boundary lengths; the result stays graded by the
/// power of pi.
pub fn evaluate_volume(p: &VolumePolynomial, lengths: &[Rational]) -> Result<PiSum> {
    if lengths.len() != p.n as usize {
        return Err(Error::Domain(format!(
            "V_{{{},{}}} takes {} lengths, got {}",
            p.genus,
            p.n,
            p.n,
            lengths.len()
        )));
    }
    let mut out = PiSum::new();
    for (d, c, pi) in p.expanded_terms() {
        let mut term = c;
        for (l, &di) in lengths.iter().zip(&d) {
            term *= num_traits::pow(l * l, di as usize);
        }
        let slot = out.entry(pi).or_insert_with(Rational::zero);
        *slot += term;
    }
    out.retain(|_, v| !v.is_zero());
    Ok(out)
}

/// True when every stored coefficient is strictly positive.
pub fn all_coefficients_positive(p: &VolumePolynomial) -> bool {
    p.terms.values().all(Signed::is_positive)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlator::Engine;
    use crate::exact::{int, rat};

    #[test]
    fn v04_and_v11() {
        let ev = Evaluator::new(Engine::Alpha);
        let v04 = volume_polynomial(0, 4, &ev).unwrap();
        assert_eq!(v04.coefficient(&[0, 0, 0, 0]), Some((int(2), 2)));
        for i in 0..4 {
            let mut d = vec![0; 4];
            d[i] = 1;
            assert_eq!(v04.coefficient(&d), Some((rat(1, 2), 0)));
        }
        assert_eq!(v04.expanded_terms().len(), 5);
        let v11 = volume_polynomial(1, 1, &ev).unwrap();
        assert_eq!(v11.coefficient(&[0]), Some((rat(1, 12), 2)));
        assert_eq!(v11.coefficient(&[1]), Some((rat(1, 48), 0)));
        assert_eq!(v11.expanded_terms().len(), 2);
    }

    #[test]
    fn rendering() {
        let ev = Evaluator::new(Engine::KmzDvv);
        let v04 = volume_polynomial(0, 4, &ev).unwrap();
        assert_eq!(
            v04.render_plain(),
            "2 * pi^2\n1/2 * L4^2\n1/2 * L3^2\n1/2 * L2^2\n1/2 * L1^2\n"
        );
        let tsv = v04.render_tsv();
        assert!(tsv.starts_with("d\tcoefficient\tpi_power\n0,0,0,0\t2\t2\n"));
        let v11 = volume_polynomial(1, 1, &ev).unwrap();
        assert_eq!(
            v11.render_json(),
            "{\"genus\":1,\"n\":1,\"terms\":[{\"coefficient\":\"1/12\",\"d\":[0],\"pi_power\":2},\
             {\"coefficient\":\"1/48\",\"d\":[1],\"pi_power\":0}]}\n"
        );
    }

    #[test]
    fn evaluation() {
        let ev = Evaluator::new(Engine::KmzDvv);
        let v11 = volume_polynomial(1, 1, &ev).unwrap();
        let at0 = evaluate_volume(&v11, &[int(0)]).unwrap();
        assert_eq!(at0, PiSum::from([(2, rat(1, 12))]));
        let v04 = volume_polynomial(0, 4, &ev).unwrap();
        let at0 = evaluate_volume(&v04, &[int(0), int(0), int(0), int(0)]).unwrap();
        assert_eq!(at0, PiSum::from([(2, int(2))]));
        let at = evaluate_volume(&v04, &[int(1), int(2), int(0), rat(1, 2)]).unwrap();
        assert_eq!(at, PiSum::from([(0, rat(21, 8)), (2, int(2))]));
        assert!(matches!(evaluate_volume(&v04, &[int(0)]), Err(Error::Domain(_))));
    }

    #[test]
    fn errors() {
        let ev = Evaluator::new(Engine::KmzDvv);
        assert!(volume_polynomial(0, 2, &ev).is_err());
        assert!(volume_polynomial(1, 0, &ev).is_err());
        assert!(wp_top(1, 0, &ev).is_err());
        assert!(wp_top(0, 3, &ev).is_ok());
    }

    #[test]
    fn wp_top_values() {
        let ev = Evaluator::new(Engine::Inverted);
        assert_eq!(wp_top(1, 1, &ev).unwrap(), rat(1, 24));
        assert_eq!(wp_top(0, 4, &ev).unwrap(), int(1));
        let reference = Evaluator::new(Engine::KmzDvv);
        for e in [Engine::MsKappa1, Engine::Alpha, Engine::Inverted] {
            assert_eq!(
                wp_top(2, 0, &Evaluator::new(e)).unwrap(),
                wp_top(2, 0, &reference).unwrap()
            );
        }
    }

    #[test]
    fn structure_and_roundtrip() {
        let ev = Evaluator::new(Engine::Alpha);
        for g in 0..=2u32 {
            for n in 1..=7u32 {
                if 2 * g + n <= 2 || 3 * g + n > 9 {
                    continue;
                }
                let p = volume_polynomial(g, n, &ev).unwrap();
                let dim = p.dimension();
                assert!(all_coefficients_positive(&p), "V_{g},{n}");
                for (d, c, pi) in p.expanded_terms() {
                    let s: u32 = d.iter().sum();
                    assert_eq!(pi, 2 * (dim - s));
                    // read the intersection number back out
                    let d0 = dim - s;
                    let den: BigInt = d.iter().map(|&x| factorial(x as u64)).product::<BigInt>()
                        * factorial(d0 as u64);
                    let back = c * Rational::from_integer(den) / two_pow(2 * d0 as i64 - dim as i64);
                    let key = CorrelatorKey::new(g, MultiIndex::single(1, d0), d.clone());
                    assert_eq!(back, ev.evaluate(&key).unwrap());
                }
                // constant term against the top kappa_1 number
                let (c0, pi) = p.coefficient(&vec![0; n as usize]).unwrap();
                assert_eq!(pi, 2 * dim);
                let top = wp_top(g, n, &ev).unwrap();
                assert_eq!(c0, top * two_pow(dim as i64) / Rational::from_integer(factorial(dim as u64)));
            }
        }
    }

    #[test]
    fn permutations() {
        assert_eq!(distinct_permutations(&[1, 0, 0]).len(), 3);
        assert_eq!(distinct_permutations(&[2, 1, 0]).len(), 6);
        assert_eq!(distinct_permutations(&[]).len(), 1);
    }
}
