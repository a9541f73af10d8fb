//! Mixed psi/kappa intersection numbers `<kappa(b) tau_{d_1} ... tau_{d_n}>_g`
//! computed by four recursion engines that must agree bit for bit.
//!
//! * [`Engine::KmzDvv`] rewrites kappa classes as pushforwards of psi classes
//!   at extra forgotten points and evaluates pure psi brackets with the DVV
//!   recursion.
//! * [`Engine::MsKappa1`] is the kappa_1-only recursion with `beta_b` weights.
//! * [`Engine::Alpha`] is the general recursion with `alpha_L` weights.
//! * [`Engine::Inverted`] solves the alternating-sum identity for its `L = 0`
//!   term, needing no constants at all.
//!
//! Every engine pivots on the largest tau exponent. Brackets that are unstable
//! or fail the degree condition are zero, as are tau subscripts below zero.

mod cache;
mod key;

use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, RwLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};

pub use cache::{Cache, CACHE_HEADER};
pub use key::{admissible_keys, parse_taus, render_taus, CorrelatorKey};

use crate::constants::{beta_series, shared_alpha_table, AlphaTable};
use crate::error::{Error, Result};
use crate::exact::{binomial, dfact, factorial, rat, Rational};
use crate::multiindex::{sign_of_size, MultiIndex};
use crate::par::{self, Execution};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Engine {
    KmzDvv,
    MsKappa1,
    Alpha,
    Inverted,
}

impl Engine {
    pub const ALL: [Engine; 4] = [
        Engine::KmzDvv,
        Engine::MsKappa1,
        Engine::Alpha,
        Engine::Inverted,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Engine::KmzDvv => "KMZ_DVV",
            Engine::MsKappa1 => "MS_KAPPA1",
            Engine::Alpha => "ALPHA",
            Engine::Inverted => "INVERTED",
        }
    }

    pub fn supports(self, key: &CorrelatorKey) -> bool {
        match self {
            Engine::MsKappa1 => key.kappa.as_kappa1_power().is_some(),
            _ => true,
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_uppercase().replace('-', "_");
        Engine::ALL
            .into_iter()
            .find(|e| e.name() == norm)
            .ok_or_else(|| Error::Parse(format!("unknown engine {s:?}")))
    }
}

/// A tau multiset with one element fixed as the recursion pivot.
struct Pivoted<'a> {
    d1: u32,
    rest: &'a [u32],
}

fn pivot(key: &CorrelatorKey) -> Pivoted<'_> {
    let (&d1, rest) = key.taus.split_last().expect("pivot needs a marked point");
    Pivoted { d1, rest }
}

/// Distinct exponents with multiplicities.
fn groups(taus: &[u32]) -> Vec<(u32, u32)> {
    let mut out: Vec<(u32, u32)> = Vec::new();
    for &d in taus {
        match out.last_mut() {
            Some(last) if last.0 == d => last.1 += 1,
            _ => out.push((d, 1)),
        }
    }
    out
}

/// `rest` with one copy of `old` replaced by `new`.
fn replace_one(rest: &[u32], old: u32, new: u32) -> Vec<u32> {
    let mut v = rest.to_vec();
    let pos = v.iter().position(|&d| d == old).expect("element present");
    v[pos] = new;
    v
}

fn with(rest: &[u32], extra: &[u32]) -> Vec<u32> {
    let mut v = Vec::with_capacity(rest.len() + extra.len());
    v.extend_from_slice(rest);
    v.extend_from_slice(extra);
    v
}

/// An ordered split `I ⨿ J` of the non-pivot points, weighted by the number
/// of labelled subsets it stands for.
struct PointSplit {
    left: Vec<u32>,
    right: Vec<u32>,
    weight: BigInt,
}

fn point_splits(rest: &[u32]) -> Vec<PointSplit> {
    let mut out = vec![PointSplit {
        left: Vec::new(),
        right: Vec::new(),
        weight: BigInt::one(),
    }];
    for (d, cnt) in groups(rest) {
        let mut next = Vec::with_capacity(out.len() * (cnt as usize + 1));
        for sp in &out {
            for k in 0..=cnt {
                let mut left = sp.left.clone();
                let mut right = sp.right.clone();
                left.extend(std::iter::repeat(d).take(k as usize));
                right.extend(std::iter::repeat(d).take((cnt - k) as usize));
                next.push(PointSplit {
                    left,
                    right,
                    weight: &sp.weight * binomial(cnt as u64, k as i64),
                });
            }
        }
        out = next;
    }
    out
}

/// Genus forced by the degree condition on one factor of a separating term.
fn factor_genus(kappa_weight: u32, taus: &[u32]) -> Option<u32> {
    let degree: i64 = kappa_weight as i64 + taus.iter().map(|&d| d as i64).sum::<i64>();
    let num = degree - taus.len() as i64 + 3;
    (num >= 0 && num % 3 == 0).then_some((num / 3) as u32)
}

fn q(i: BigInt) -> Rational {
    Rational::from_integer(i)
}

/// `(2a - 1)!! / (2b - 1)!!` for `a >= b >= 0`.
fn odd_ratio(a: u32, b: u32) -> BigInt {
    dfact(2 * a as i64 - 1) / dfact(2 * b as i64 - 1)
}

fn rs_weight(r: u32, s: u32) -> BigInt {
    dfact(2 * r as i64 + 1) * dfact(2 * s as i64 + 1)
}

/// Memoized evaluator for one engine.
pub struct Evaluator {
    engine: Engine,
    cache: Cache,
    alpha: RwLock<Arc<AlphaTable>>,
    beta: RwLock<Arc<Vec<Rational>>>,
}

impl Evaluator {
    pub fn new(engine: Engine) -> Self {
        Self::with_cache(engine, Cache::new())
    }

    pub fn with_cache(engine: Engine, cache: Cache) -> Self {
        Self {
            engine,
            cache,
            alpha: RwLock::new(shared_alpha_table(8)),
            beta: RwLock::new(Arc::new(beta_series(8))),
        }
    }

    pub fn engine(&self) -> Engine {
        self.engine
    }

    pub fn cache(&self) -> &Cache {
        &self.cache
    }

    fn ensure_tables(&self, kappa_weight: u32) {
        if self.alpha.read().unwrap().max_weight() < kappa_weight {
            *self.alpha.write().unwrap() = shared_alpha_table(kappa_weight);
        }
        if self.beta.read().unwrap().len() <= kappa_weight as usize {
            *self.beta.write().unwrap() = Arc::new(beta_series(kappa_weight as usize));
        }
    }

    /// Validated entry point: rejects unstable keys and unsupported
    /// engine/key pairs, returns 0 for degree mismatches, memoizes.
    pub fn evaluate(&self, key: &CorrelatorKey) -> Result<Rational> {
        key.check_stable()?;
        if !self.engine.supports(key) {
            return Err(Error::UnsupportedEngine {
                engine: self.engine.to_string(),
                key: key.to_string(),
            });
        }
        self.ensure_tables(key.kappa.weight());
        self.value(key)
    }

    pub fn evaluate_batch(&self, keys: &[CorrelatorKey], exec: Execution) -> Vec<Result<Rational>> {
        let w = keys.iter().map(|k| k.kappa.weight()).max().unwrap_or(0);
        self.ensure_tables(w);
        par::map(keys, exec, |k| self.evaluate(k))
    }

    fn value(&self, key: &CorrelatorKey) -> Result<Rational> {
        if !key.is_admissible() {
            return Ok(Rational::zero());
        }
        if let Some(v) = self.cache.get(key) {
            return Ok(v);
        }
        let v = self.compute(key)?;
        self.cache.insert(key.clone(), v.clone())?;
        Ok(v)
    }

    fn bracket(&self, genus: i64, kappa: &MultiIndex, taus: Vec<u32>) -> Result<Rational> {
        if genus < 0 {
            return Ok(Rational::zero());
        }
        self.value(&CorrelatorKey::new(genus as u32, kappa.clone(), taus))
    }

    fn seed(&self, key: &CorrelatorKey) -> Option<Rational> {
        let pure = key.is_pure_psi();
        match (key.genus, key.taus.as_slice()) {
            (0, [0, 0, 0]) if pure => Some(Rational::one()),
            (1, [1]) if pure => Some(rat(1, 24)),
            (1, [0])
                if matches!(self.engine, Engine::MsKappa1 | Engine::Alpha)
                    && key.kappa == MultiIndex::single(1, 1) =>
            {
                Some(rat(1, 24))
            }
            _ => None,
        }
    }

    fn compute(&self, key: &CorrelatorKey) -> Result<Rational> {
        if let Some(v) = self.seed(key) {
            return Ok(v);
        }
        if key.is_pure_psi() {
            if let Some(v) = self.string_dilaton_fast_path(key)? {
                return Ok(v);
            }
        }
        if key.n() == 0 {
            return match self.engine {
                Engine::KmzDvv => self.kmz_reduce(key),
                _ => self.pure_kappa(key.genus, &key.kappa),
            };
        }
        match self.engine {
            Engine::KmzDvv if key.is_pure_psi() => self.dvv(key),
            Engine::KmzDvv => self.kmz_reduce(key),
            Engine::MsKappa1 => self.ms_kappa1(key),
            Engine::Alpha => self.alpha_engine(key),
            Engine::Inverted => self.inverted_engine(key),
        }
    }

    /// One application of the string or dilaton equation to a pure psi key,
    /// or `None` when neither applies.
    pub fn string_dilaton_fast_path(&self, key: &CorrelatorKey) -> Result<Option<Rational>> {
        if !key.is_pure_psi() || !key.is_admissible() || self.seed(key).is_some() {
            return Ok(None);
        }
        let g = key.genus as i64;
        let taus = &key.taus;
        if taus.first() == Some(&0) {
            let rest = &taus[1..];
            let mut acc = Rational::zero();
            for (d, cnt) in groups(rest) {
                if d == 0 {
                    continue;
                }
                let v = self.bracket(g, &MultiIndex::zero(), replace_one(rest, d, d - 1))?;
                acc += v * Rational::from_integer(cnt.into());
            }
            return Ok(Some(acc));
        }
        if let Some(pos) = taus.iter().position(|&d| d == 1) {
            let mut rest = taus.clone();
            rest.remove(pos);
            let factor = 2 * g - 2 + rest.len() as i64;
            let v = self.bracket(g, &MultiIndex::zero(), rest)?;
            return Ok(Some(v * Rational::from_integer(factor.into())));
        }
        Ok(None)
    }

    /// Pure psi DVV recursion, pivoting on the largest exponent.
    pub fn dvv(&self, key: &CorrelatorKey) -> Result<Rational> {
        debug_assert!(key.is_pure_psi());
        if let Some(v) = self.seed(key) {
            return Ok(v);
        }
        let zero = MultiIndex::zero();
        let Pivoted { d1, rest } = pivot(key);
        let g = key.genus as i64;
        let mut whole = Rational::zero();
        let mut half = Rational::zero();
        for (dj, cnt) in groups(rest) {
            if d1 + dj == 0 {
                continue;
            }
            let v = self.bracket(g, &zero, replace_one(rest, dj, d1 + dj - 1))?;
            whole += v * q(odd_ratio(d1 + dj, dj) * cnt);
        }
        if d1 >= 2 {
            let splits = point_splits(rest);
            for r in 0..=d1 - 2 {
                let s = d1 - 2 - r;
                let c = q(rs_weight(r, s));
                half += self.bracket(g - 1, &zero, with(rest, &[r, s]))? * &c;
                for sp in &splits {
                    let v = self.separating(key.genus, (&zero, r, &sp.left), (&zero, s, &sp.right))?;
                    if !v.is_zero() {
                        half += v * &c * q(sp.weight.clone());
                    }
                }
            }
        }
        Ok((whole + half / rat(2, 1)) / q(dfact(2 * d1 as i64 + 1)))
    }

    /// Product of the two factors of a separating term; the first factor's
    /// genus is forced by its degree.
    fn separating(
        &self,
        genus: u32,
        left: (&MultiIndex, u32, &[u32]),
        right: (&MultiIndex, u32, &[u32]),
    ) -> Result<Rational> {
        let ltaus = with(left.2, &[left.1]);
        let Some(g1) = factor_genus(left.0.weight(), &ltaus) else {
            return Ok(Rational::zero());
        };
        if g1 > genus {
            return Ok(Rational::zero());
        }
        let a = self.bracket(g1 as i64, left.0, ltaus)?;
        if a.is_zero() {
            return Ok(a);
        }
        let b = self.bracket((genus - g1) as i64, right.0, with(right.2, &[right.1]))?;
        Ok(a * b)
    }

    /// Kappa classes as pushforwards of psi classes: a signed sum over ordered
    /// decompositions of `b` into nonzero parts, each part becoming an extra
    /// `tau_{|L_j|+1}` insertion.
    pub fn kmz_reduce(&self, key: &CorrelatorKey) -> Result<Rational> {
        let b = &key.kappa;
        if b.is_zero() {
            return if key.n() == 0 {
                Ok(Rational::zero())
            } else {
                self.value(key)
            };
        }
        let size = b.size() as usize;
        let mut total = Rational::zero();
        for k in 1..=size {
            let mut inner = Rational::zero();
            for parts in b.ordered_decompositions(k) {
                let refs: Vec<&MultiIndex> = parts.iter().collect();
                let extra: Vec<u32> = parts.iter().map(|p| p.weight() + 1).collect();
                let v = self.bracket(key.genus as i64, &MultiIndex::zero(), with(&key.taus, &extra))?;
                if !v.is_zero() {
                    inner += v * q(b.multinomial(&refs));
                }
            }
            let sign = if (size - k) % 2 == 0 { 1 } else { -1 };
            total += inner * Rational::new(sign.into(), factorial(k as u64));
        }
        Ok(total)
    }

    /// The kappa_1 recursion with `beta_b` weights.
    pub fn ms_kappa1(&self, key: &CorrelatorKey) -> Result<Rational> {
        let a = key.kappa.as_kappa1_power().ok_or_else(|| Error::UnsupportedEngine {
            engine: Engine::MsKappa1.to_string(),
            key: key.to_string(),
        })?;
        if let Some(v) = self.seed(key) {
            return Ok(v);
        }
        let beta = Arc::clone(&self.beta.read().unwrap());
        if beta.len() <= a as usize {
            return Err(Error::Consistency(format!("beta table too short for {key}")));
        }
        let k1 = |e: u32| MultiIndex::single(1, e);
        let Pivoted { d1, rest } = pivot(key);
        let g = key.genus as i64;
        let splits = point_splits(rest);
        let mut whole = Rational::zero();
        let mut half = Rational::zero();
        for b in 0..=a {
            let beta_b = &beta[b as usize];
            let rem = k1(a - b);
            let inv_rem_fact = Rational::new(BigInt::one(), factorial((a - b) as u64));
            for (dj, cnt) in groups(rest) {
                let top = b + d1 + dj;
                if top == 0 {
                    continue;
                }
                let v = self.bracket(g, &rem, replace_one(rest, dj, top - 1))?;
                if !v.is_zero() {
                    whole += v * q(odd_ratio(top, dj) * cnt) * &inv_rem_fact * beta_b;
                }
            }
            if b + d1 < 2 {
                continue;
            }
            for r in 0..=b + d1 - 2 {
                let s = b + d1 - 2 - r;
                let c = q(rs_weight(r, s)) * beta_b;
                let v = self.bracket(g - 1, &rem, with(rest, &[r, s]))?;
                half += v * &c * &inv_rem_fact;
                for cl in 0..=a - b {
                    let cr = a - b - cl;
                    let w = Rational::new(BigInt::one(), factorial(cl as u64) * factorial(cr as u64));
                    let (el, er) = (k1(cl), k1(cr));
                    for sp in &splits {
                        let v = self.separating(key.genus, (&el, r, &sp.left), (&er, s, &sp.right))?;
                        if !v.is_zero() {
                            half += v * &c * &w * q(sp.weight.clone());
                        }
                    }
                }
            }
        }
        let total = whole + half / rat(2, 1);
        Ok(total * q(factorial(a as u64)) / q(dfact(2 * d1 as i64 + 1)))
    }

    /// The general recursion with `alpha_L` weights.
    pub fn alpha_engine(&self, key: &CorrelatorKey) -> Result<Rational> {
        if let Some(v) = self.seed(key) {
            return Ok(v);
        }
        let alpha = Arc::clone(&self.alpha.read().unwrap());
        let b = &key.kappa;
        let Pivoted { d1, rest } = pivot(key);
        let g = key.genus as i64;
        let splits = point_splits(rest);
        let mut whole = Rational::zero();
        let mut half = Rational::zero();
        for (l, lrest) in b.splits() {
            let w = l.weight();
            let coef = alpha.alpha(&l) * q(b.binomial(&l));
            for (dj, cnt) in groups(rest) {
                let top = w + d1 + dj;
                if top == 0 {
                    continue;
                }
                let v = self.bracket(g, &lrest, replace_one(rest, dj, top - 1))?;
                if !v.is_zero() {
                    whole += v * q(odd_ratio(top, dj) * cnt) * &coef;
                }
            }
            if w + d1 >= 2 {
                for r in 0..=w + d1 - 2 {
                    let s = w + d1 - 2 - r;
                    let v = self.bracket(g - 1, &lrest, with(rest, &[r, s]))?;
                    if !v.is_zero() {
                        half += v * q(rs_weight(r, s)) * &coef;
                    }
                }
            }
        }
        for (l, e, f) in b.three_way_splits() {
            let w = l.weight();
            if w + d1 < 2 {
                continue;
            }
            let coef = alpha.alpha(&l) * q(b.multinomial(&[&l, &e, &f]));
            for r in 0..=w + d1 - 2 {
                let s = w + d1 - 2 - r;
                let c = q(rs_weight(r, s)) * &coef;
                for sp in &splits {
                    let v = self.separating(key.genus, (&e, r, &sp.left), (&f, s, &sp.right))?;
                    if !v.is_zero() {
                        half += v * &c * q(sp.weight.clone());
                    }
                }
            }
        }
        Ok((whole + half / rat(2, 1)) / q(dfact(2 * d1 as i64 + 1)))
    }

    /// The alternating-sum identity solved for its `L = 0` term.
    pub fn inverted_engine(&self, key: &CorrelatorKey) -> Result<Rational> {
        if let Some(v) = self.seed(key) {
            return Ok(v);
        }
        let b = &key.kappa;
        let Pivoted { d1, rest } = pivot(key);
        let g = key.genus as i64;
        let mut whole = Rational::zero();
        let mut half = Rational::zero();
        for (dj, cnt) in groups(rest) {
            if d1 + dj == 0 {
                continue;
            }
            let v = self.bracket(g, b, replace_one(rest, dj, d1 + dj - 1))?;
            if !v.is_zero() {
                whole += v * q(odd_ratio(d1 + dj, dj) * cnt);
            }
        }
        if d1 >= 2 {
            let splits = point_splits(rest);
            let halves = b.splits();
            for r in 0..=d1 - 2 {
                let s = d1 - 2 - r;
                let c = q(rs_weight(r, s));
                half += self.bracket(g - 1, b, with(rest, &[r, s]))? * &c;
                for (e, f) in &halves {
                    let ce = &c * q(b.binomial(e));
                    for sp in &splits {
                        let v = self.separating(key.genus, (e, r, &sp.left), (f, s, &sp.right))?;
                        if !v.is_zero() {
                            half += v * &ce * q(sp.weight.clone());
                        }
                    }
                }
            }
        }
        let mut lower = Rational::zero();
        for (l, lrest) in b.splits() {
            if l.is_zero() {
                continue;
            }
            let w = l.weight();
            let v = self.bracket(g, &lrest, with(rest, &[d1 + w]))?;
            if v.is_zero() {
                continue;
            }
            let c = q(b.binomial(&l) * odd_ratio(d1 + w + 1, w + 1) * sign_of_size(&l));
            lower += v * c;
        }
        Ok((whole + half / rat(2, 1) - lower) / q(dfact(2 * d1 as i64 + 1)))
    }

    /// `<kappa(b)>_g` for `g >= 2` through the generalized dilaton identity
    /// with no other marked points.
    pub fn pure_kappa(&self, genus: u32, b: &MultiIndex) -> Result<Rational> {
        if genus < 2 {
            return Err(Error::Domain(format!(
                "pure kappa bracket needs genus >= 2, got {genus}"
            )));
        }
        self.ensure_tables(b.weight());
        let mut acc = Rational::zero();
        for (l, lrest) in b.splits() {
            let v = self.bracket(genus as i64, &lrest, vec![l.weight() + 1])?;
            if !v.is_zero() {
                acc += v * q(b.binomial(&l) * sign_of_size(&l));
            }
        }
        Ok(acc / rat(2 * genus as i64 - 2, 1))
    }
}

/// One evaluator per engine, for cross-checking.
pub struct EngineSet {
    evaluators: Vec<Evaluator>,
}

impl EngineSet {
    pub fn new() -> Self {
        Self {
            evaluators: Engine::ALL.into_iter().map(Evaluator::new).collect(),
        }
    }

    pub fn get(&self, engine: Engine) -> &Evaluator {
        self.evaluators
            .iter()
            .find(|e| e.engine() == engine)
            .expect("every engine present")
    }

    pub fn iter(&self) -> impl Iterator<Item = &Evaluator> {
        self.evaluators.iter()
    }

    /// Seeds every engine's cache with the same entries.
    pub fn seed_from(&self, cache: &Cache) -> Result<()> {
        for e in &self.evaluators {
            e.cache().merge_from(cache)?;
        }
        Ok(())
    }

    /// Union of all engine caches; conflicting values are an error.
    pub fn merged_cache(&self) -> Result<Cache> {
        let out = Cache::new();
        for e in &self.evaluators {
            out.merge_from(e.cache())?;
        }
        Ok(out)
    }

    /// Values from every engine that supports `key`.
    pub fn evaluate_all(&self, key: &CorrelatorKey) -> Result<Vec<(Engine, Rational)>> {
        self.evaluators
            .iter()
            .filter(|e| e.engine().supports(key))
            .map(|e| Ok((e.engine(), e.evaluate(key)?)))
            .collect()
    }
}

impl Default for EngineSet {
    fn default() -> Self {
        Self::new()
    }
}

/// Outcome of comparing all engines on one key.
#[derive(Clone, Debug)]
pub struct Agreement {
    pub key: CorrelatorKey,
    pub values: Vec<(Engine, Rational)>,
}

impl Agreement {
    pub fn agrees(&self) -> bool {
        self.values.windows(2).all(|w| w[0].1 == w[1].1)
    }
}

/// Evaluates every key under every applicable engine.
pub fn cross_check(set: &EngineSet, keys: &[CorrelatorKey], exec: Execution) -> Result<Vec<Agreement>> {
    par::map(keys, exec, |k| {
        Ok(Agreement {
            key: k.clone(),
            values: set.evaluate_all(k)?,
        })
    })
    .into_iter()
    .collect()
}
