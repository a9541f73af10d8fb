//! Itzykson-Zuber and the randomized identity checks over small keys.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::CheckReport;
use crate::correlator::{admissible_keys, CorrelatorKey, Evaluator};
use crate::error::Result;
use crate::exact::{binomial, dfact, factorial, pow2, rat, Rational};
use crate::multiindex::{sign_of_size, MultiIndex};

/// `<kappa(b) taus>_g`, with negative genus and unstable spaces read as 0.
fn corr(ev: &Evaluator, genus: i64, kappa: &MultiIndex, taus: Vec<u32>) -> Result<Rational> {
    if genus < 0 {
        return Ok(Rational::zero());
    }
    let key = CorrelatorKey::new(genus as u32, kappa.clone(), taus);
    if !key.is_stable() {
        return Ok(Rational::zero());
    }
    ev.evaluate(&key)
}

fn q(n: impl Into<BigInt>) -> Rational {
    Rational::from_integer(n.into())
}

/// `(2a+1)!! / (2b+1)!!`-style ratios of odd double factorials.
fn dratio(a: i64, b: i64) -> Rational {
    Rational::new(dfact(a), dfact(b))
}

/// `phi_0, ..., phi_{g_max}` from the quadratic recursion.
pub fn iz_phi_recursion(g_max: u32) -> Vec<Rational> {
    let mut phi = vec![-Rational::one(), rat(1, 24)];
    for g in 1..g_max as i64 {
        let mut next = rat(25 * g * g - 1, 24) * &phi[g as usize];
        for m in 1..=g as usize {
            next += &phi[g as usize + 1 - m] * &phi[m] * rat(1, 2);
        }
        phi.push(next);
    }
    phi.truncate(g_max as usize + 1);
    phi
}

/// `phi_g = (5g-5)(5g-3) / (2^g (3g-3)!) <tau_2^{3g-3}>_g` for `g >= 2`.
pub fn iz_phi_correlator(genus: u32, ev: &Evaluator) -> Result<Rational> {
    let g = genus as i64;
    let v = ev.evaluate(&CorrelatorKey::psi(genus, vec![2; 3 * genus as usize - 3]))?;
    Ok(v * Rational::new(
        BigInt::from((5 * g - 5) * (5 * g - 3)),
        pow2(genus) * factorial(3 * genus as u64 - 3),
    ))
}

pub fn iz_check(g_max: u32, ev: &Evaluator) -> Result<CheckReport> {
    let mut report = CheckReport::new("iz", format!("g_max={g_max}"));
    let phi = iz_phi_recursion(g_max);
    for g in 2..=g_max {
        report.checked += 1;
        let direct = iz_phi_correlator(g, ev)?;
        if direct != phi[g as usize] {
            report.fail(format!("g={g}: recursion {} vs correlator {direct}", phi[g as usize]));
        }
    }
    Ok(report)
}

/// `I` and its complement inside `rest`, over every labelled subset.
fn labelled_splits(rest: &[u32]) -> Vec<(Vec<u32>, Vec<u32>)> {
    (0u32..1 << rest.len())
        .map(|mask| {
            let (mut i, mut j) = (Vec::new(), Vec::new());
            for (idx, &d) in rest.iter().enumerate() {
                if mask >> idx & 1 == 1 {
                    i.push(d);
                } else {
                    j.push(d);
                }
            }
            (i, j)
        })
        .collect()
}

fn with(base: &[u32], extra: &[u32]) -> Vec<u32> {
    base.iter().chain(extra).copied().collect()
}

/// Both sides of the `kappa_1` recursion for `<kappa_1^a prod tau_{d_i}>_g`
/// with the point at `pivot` playing the role of `d_1`.
pub fn kappa1_recursion_sides(
    ev: &Evaluator,
    genus: u32,
    a: u32,
    taus: &[u32],
    pivot: usize,
) -> Result<(Rational, Rational)> {
    let g = genus as i64;
    let d1 = taus[pivot] as i64;
    let rest: Vec<u32> = taus.iter().enumerate().filter(|&(i, _)| i != pivot).map(|(_, &d)| d).collect();
    let k1 = |e: u32| MultiIndex::single(1, e);

    let mut lhs = Rational::zero();
    for b in 0..=a as i64 {
        let c = q(binomial(a as u64, b) * crate::exact::sign(b as u64)) * dratio(2 * (d1 + b) + 1, 2 * b + 1);
        lhs += c * corr(ev, g, &k1(a - b as u32), with(&rest, &[(d1 + b) as u32]))?;
    }

    let mut rhs = Rational::zero();
    for (j, &dj) in rest.iter().enumerate() {
        let merged = d1 + dj as i64 - 1;
        if merged < 0 {
            continue;
        }
        let others: Vec<u32> = rest.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, &d)| d).collect();
        let c = dratio(2 * d1 + 2 * dj as i64 - 1, 2 * dj as i64 - 1);
        rhs += c * corr(ev, g, &k1(a), with(&others, &[merged as u32]))?;
    }
    let half = rat(1, 2);
    for r in 0..=(d1 - 2).max(-1) {
        let s = d1 - 2 - r;
        let w = q(dfact(2 * r + 1) * dfact(2 * s + 1)) * &half;
        rhs += &w * corr(ev, g - 1, &k1(a), with(&rest, &[r as u32, s as u32]))?;
        for c in 0..=a {
            let wc = &w * q(binomial(a as u64, c as i64));
            for (i, jset) in labelled_splits(&rest) {
                for gp in 0..=g {
                    let left = corr(ev, gp, &k1(c), with(&i, &[r as u32]))?;
                    if left.is_zero() {
                        continue;
                    }
                    rhs += &wc * left * corr(ev, g - gp, &k1(a - c), with(&jset, &[s as u32]))?;
                }
            }
        }
    }
    Ok((lhs, rhs))
}

/// Both sides of the generalized dilaton identity.
pub fn dilaton_sides(ev: &Evaluator, key: &CorrelatorKey) -> Result<(Rational, Rational)> {
    let g = key.genus as i64;
    let mut lhs = Rational::zero();
    for (l, lrest) in key.kappa.splits() {
        let c = q(key.kappa.binomial(&l) * sign_of_size(&l));
        lhs += c * corr(ev, g, &lrest, with(&key.taus, &[l.weight() + 1]))?;
    }
    let rhs = q(2 * g - 2 + key.n() as i64) * corr(ev, g, &key.kappa, key.taus.clone())?;
    Ok((lhs, rhs))
}

/// Both sides of the `<tau_0 tau_1 ...>` identity for the insertions `taus`
/// and kappa exponents `b`.
pub fn tau0_tau1_sides(
    ev: &Evaluator,
    genus: u32,
    b: &MultiIndex,
    taus: &[u32],
) -> Result<(Rational, Rational)> {
    let g = genus as i64;
    let lhs = corr(ev, g, b, with(taus, &[0, 1]))?;
    let mut rhs = rat(1, 12) * corr(ev, g - 1, b, with(taus, &[0, 0, 0, 0]))?;
    for (l, lp) in b.splits() {
        let c = q(b.binomial(&l)) * rat(1, 2);
        for (i, j) in labelled_splits(taus) {
            for gp in 0..=g {
                let left = corr(ev, gp, &l, with(&i, &[0, 0]))?;
                if left.is_zero() {
                    continue;
                }
                rhs += &c * left * corr(ev, g - gp, &lp, with(&j, &[0, 0]))?;
            }
        }
    }
    Ok((lhs, rhs))
}

/// The first `min(trials / 2, len)` candidates in order, then seeded draws.
fn schedule<T: Clone>(cands: &[T], trials: usize, rng: &mut ChaCha8Rng) -> Vec<T> {
    let mut out: Vec<T> = cands.iter().take(trials / 2).cloned().collect();
    while out.len() < trials && !cands.is_empty() {
        out.push(cands.choose(rng).unwrap().clone());
    }
    out
}

const MAX_DIM: u32 = 6;
const MAX_KAPPA: u32 = 3;

/// One report per identity; each runs `trials` instances drawn from stable
/// keys with `3g-3+n <= 6` and `|b| <= 3`.
pub fn proposition_checks(trials: usize, seed: u64, ev: &Evaluator) -> Result<Vec<CheckReport>> {
    let keys = admissible_keys(MAX_DIM, MAX_KAPPA);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = format!("trials={trials},seed={seed}");
    let mut reports = Vec::new();

    let kappa1: Vec<&CorrelatorKey> = keys
        .iter()
        .filter(|k| k.kappa.as_kappa1_power().is_some() && k.n() >= 1)
        .filter(|k| !matches!((k.genus, k.n()), (0, 3) | (1, 1)))
        .collect();
    let mut report = CheckReport::new("kappa1-recursion", params.clone());
    for key in schedule(&kappa1, trials, &mut rng) {
        let pivot = rng.gen_range(0..key.n());
        let a = key.kappa.as_kappa1_power().unwrap();
        let (lhs, rhs) = kappa1_recursion_sides(ev, key.genus, a, &key.taus, pivot)?;
        report.checked += 1;
        if lhs != rhs {
            report.fail(format!("{key} pivot {pivot}: {lhs} vs {rhs}"));
        }
    }
    reports.push(report);

    let mut report = CheckReport::new("generalized-dilaton", params.clone());
    for key in schedule(&keys.iter().collect::<Vec<_>>(), trials, &mut rng) {
        let (lhs, rhs) = dilaton_sides(ev, key)?;
        report.checked += 1;
        if lhs != rhs {
            report.fail(format!("{key}: {lhs} vs {rhs}"));
        }
    }
    reports.push(report);

    let bases: Vec<(u32, MultiIndex, Vec<u32>)> = keys
        .iter()
        .filter_map(|k| {
            let i0 = k.taus.iter().position(|&d| d == 0)?;
            let mut rest = k.taus.clone();
            rest.remove(i0);
            let i1 = rest.iter().position(|&d| d == 1)?;
            rest.remove(i1);
            Some((k.genus, k.kappa.clone(), rest))
        })
        .collect();
    let mut report = CheckReport::new("tau0-tau1", params);
    for (g, b, mut taus) in schedule(&bases, trials, &mut rng) {
        taus.shuffle(&mut rng);
        let (lhs, rhs) = tau0_tau1_sides(ev, g, &b, &taus)?;
        report.checked += 1;
        if lhs != rhs {
            report.fail(format!("g={g} b={b} taus={taus:?}: {lhs} vs {rhs}"));
        }
    }
    reports.push(report);
    Ok(reports)
}
