//! Truncated multivariate polynomials in `t_0..t_T, s_1..s_S`.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exact::{factorial, Rational};
use crate::multiindex::MultiIndex;
use crate::par::{self, Execution};

/// Variable ranges and the total degree cap. `s_i` exists for
/// `1 <= i <= max_s_weight`, and monomials must have `sum i m_i <= max_s_weight`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Bounds {
    pub max_t: u32,
    pub max_s_weight: u32,
    pub max_degree: u32,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds { max_t: 8, max_s_weight: 5, max_degree: 8 }
    }
}

impl fmt::Display for Bounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T={},S={},D={}", self.max_t, self.max_s_weight, self.max_degree)
    }
}

impl Bounds {
    fn nt(&self) -> usize {
        self.max_t as usize + 1
    }

    fn width(&self) -> usize {
        self.nt() + self.max_s_weight as usize
    }

    pub fn admits(&self, m: &Monomial) -> bool {
        m.degree() <= self.max_degree && m.s_weight(self) <= self.max_s_weight
    }

    /// Every monomial within bounds, ordered by degree and then
    /// lexicographically.
    pub fn monomials(&self) -> Vec<Monomial> {
        self.monomials_up_to(self.max_degree)
    }

    pub fn monomials_up_to(&self, degree: u32) -> Vec<Monomial> {
        let mut out = Vec::new();
        let mut cur = vec![0u8; self.width()];
        self.fill(0, degree, 0, &mut cur, &mut out);
        out.sort_by(|a, b| a.degree().cmp(&b.degree()).then_with(|| a.cmp(b)));
        out
    }

    fn fill(&self, slot: usize, budget: u32, sw: u32, cur: &mut Vec<u8>, out: &mut Vec<Monomial>) {
        if slot == cur.len() {
            out.push(Monomial(cur.clone()));
            return;
        }
        let step = if slot < self.nt() { 0 } else { (slot - self.nt()) as u32 + 1 };
        let mut e = 0u32;
        loop {
            cur[slot] = e as u8;
            self.fill(slot + 1, budget - e, sw + e * step, cur, out);
            e += 1;
            if e > budget || sw + e * step > self.max_s_weight {
                break;
            }
        }
        cur[slot] = 0;
    }
}

/// Exponent vector laid out as `t_0..t_T` followed by `s_1..s_S`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Monomial(Vec<u8>);

impl Monomial {
    pub fn one(b: &Bounds) -> Self {
        Monomial(vec![0; b.width()])
    }

    /// Builds `prod t_j^{e}` times `s^m`; `None` if a variable is missing
    /// from the layout.
    pub fn build(b: &Bounds, t: &[(u32, u32)], s: &MultiIndex) -> Option<Self> {
        let mut m = Self::one(b);
        for &(j, e) in t {
            m = m.times_t(b, j, e)?;
        }
        m.times_s(b, s)
    }

    pub fn t(&self, j: u32) -> u32 {
        self.0.get(j as usize).copied().unwrap_or(0) as u32
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn t_degree(&self, b: &Bounds) -> u32 {
        self.0[..b.nt()].iter().map(|&e| e as u32).sum()
    }

    pub fn s_weight(&self, b: &Bounds) -> u32 {
        self.0[b.nt()..].iter().enumerate().map(|(i, &e)| (i as u32 + 1) * e as u32).sum()
    }

    /// `sum_i i n_i + |m|`, the dimension the monomial's correlator lives in.
    pub fn weight(&self, b: &Bounds) -> u32 {
        self.t_entries(b).iter().map(|&(i, e)| i * e).sum::<u32>() + self.s_weight(b)
    }

    /// `sum_{i >= 1} (i - 1) n_i + |m|`; bounded by `3g - 3` for any factor
    /// of genus `g`, and monotone under division.
    pub fn w_plus(&self, b: &Bounds) -> u32 {
        self.t_entries(b).iter().filter(|&&(i, _)| i >= 1).map(|&(i, e)| (i - 1) * e).sum::<u32>()
            + self.s_weight(b)
    }

    /// Genus forced by the dimension constraint, if it is a non-negative
    /// integer and the monomial is not constant.
    pub fn genus(&self, b: &Bounds) -> Option<u32> {
        let n = self.t_degree(b) as i64;
        let num = self.weight(b) as i64 - n + 3;
        (self.degree() > 0 && num >= 0 && num % 3 == 0).then_some((num / 3) as u32)
    }

    pub fn t_entries(&self, b: &Bounds) -> Vec<(u32, u32)> {
        self.0[..b.nt()]
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(j, &e)| (j as u32, e as u32))
            .collect()
    }

    pub fn s_part(&self, b: &Bounds) -> MultiIndex {
        MultiIndex::from_pairs(
            self.0[b.nt()..].iter().enumerate().map(|(i, &e)| (i as u32 + 1, e as u32)),
        )
    }

    pub fn times_t(&self, b: &Bounds, j: u32, e: u32) -> Option<Self> {
        if j > b.max_t {
            return None;
        }
        let mut m = self.clone();
        m.0[j as usize] = (m.0[j as usize] as u32 + e).try_into().ok()?;
        Some(m)
    }

    pub fn div_t(&self, j: u32, e: u32) -> Option<Self> {
        let cur = self.t(j);
        if cur < e {
            return None;
        }
        let mut m = self.clone();
        m.0[j as usize] = (cur - e) as u8;
        Some(m)
    }

    pub fn times_s(&self, b: &Bounds, l: &MultiIndex) -> Option<Self> {
        let mut m = self.clone();
        for &(i, e) in l.entries() {
            if i > b.max_s_weight {
                return None;
            }
            let slot = b.nt() + i as usize - 1;
            m.0[slot] = (m.0[slot] as u32 + e).try_into().ok()?;
        }
        Some(m)
    }

    pub fn div_s(&self, b: &Bounds, l: &MultiIndex) -> Option<Self> {
        let mut m = self.clone();
        for &(i, e) in l.entries() {
            if i > b.max_s_weight {
                return None;
            }
            let slot = b.nt() + i as usize - 1;
            m.0[slot] = (m.0[slot] as u32).checked_sub(e)? as u8;
        }
        Some(m)
    }

    pub fn mul(&self, other: &Monomial) -> Option<Monomial> {
        let v: Option<Vec<u8>> =
            self.0.iter().zip(&other.0).map(|(&a, &b)| a.checked_add(b)).collect();
        v.map(Monomial)
    }

    /// `prod_j n_j! * prod_i m_i!`.
    pub fn factorial(&self) -> BigInt {
        self.0.iter().map(|&e| factorial(e as u64)).product()
    }

    pub fn render(&self, b: &Bounds) -> String {
        let mut parts = Vec::new();
        for (j, e) in self.t_entries(b) {
            parts.push(if e == 1 { format!("t{j}") } else { format!("t{j}^{e}") });
        }
        for &(i, e) in self.s_part(b).entries() {
            parts.push(if e == 1 { format!("s{i}") } else { format!("s{i}^{e}") });
        }
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }
}

/// Polynomial with exact coefficients; terms that fall outside the bounds
/// are dropped and counted in `discarded`.
#[derive(Clone, Debug)]
pub struct SparsePoly {
    bounds: Bounds,
    terms: HashMap<Monomial, Rational>,
    discarded: u64,
}

impl PartialEq for SparsePoly {
    fn eq(&self, other: &Self) -> bool {
        self.bounds == other.bounds && self.terms == other.terms
    }
}

impl SparsePoly {
    pub fn zero(bounds: Bounds) -> Self {
        SparsePoly { bounds, terms: HashMap::new(), discarded: 0 }
    }

    pub fn one(bounds: Bounds) -> Self {
        Self::monomial(bounds, Monomial::one(&bounds), Rational::one())
    }

    pub fn monomial(bounds: Bounds, m: Monomial, c: Rational) -> Self {
        let mut p = Self::zero(bounds);
        p.add_term(m, c);
        p
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    pub fn discarded(&self) -> u64 {
        self.discarded
    }

    pub fn note_discard(&mut self) {
        self.discarded += 1;
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        if !self.bounds.admits(&m) {
            self.discarded += 1;
            return;
        }
        match self.terms.entry(m) {
            std::collections::hash_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
            std::collections::hash_map::Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    /// Terms ordered by degree, then lexicographically.
    pub fn sorted_terms(&self) -> Vec<(&Monomial, &Rational)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|a, b| a.0.degree().cmp(&b.0.degree()).then_with(|| a.0.cmp(b.0)));
        v
    }

    pub fn retain(&mut self, keep: impl Fn(&Monomial) -> bool) {
        self.terms.retain(|m, _| keep(m));
    }

    pub fn add(&self, other: &SparsePoly) -> SparsePoly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out.discarded += other.discarded;
        out
    }

    pub fn scale(&self, c: &Rational) -> SparsePoly {
        let mut out = Self::zero(self.bounds);
        for (m, v) in &self.terms {
            out.add_term(m.clone(), v * c);
        }
        out
    }

    pub fn sub(&self, other: &SparsePoly) -> SparsePoly {
        self.add(&other.scale(&-Rational::one()))
    }

    /// Product restricted to bounds and to monomials accepted by `keep`.
    pub fn mul_filtered(
        &self,
        other: &SparsePoly,
        keep: &(dyn Fn(&Monomial) -> bool + Sync),
        exec: Execution,
    ) -> SparsePoly {
        let left: Vec<_> = self.terms.iter().collect();
        let chunks: Vec<&[(&Monomial, &Rational)]> = left.chunks(64).collect();
        let parts = par::map(&chunks, exec, |chunk| {
            let mut acc = SparsePoly::zero(self.bounds);
            for (a, ca) in chunk.iter() {
                for (b, cb) in &other.terms {
                    match a.mul(b) {
                        Some(m) if keep(&m) => acc.add_term(m, *ca * cb),
                        _ => acc.discarded += 1,
                    }
                }
            }
            acc
        });
        let mut out = SparsePoly::zero(self.bounds);
        for p in parts {
            out.discarded += p.discarded;
            for (m, c) in p.terms {
                out.add_term(m, c);
            }
        }
        out
    }

    pub fn mul(&self, other: &SparsePoly) -> SparsePoly {
        self.mul_filtered(other, &|_| true, Execution::Sequential)
    }

    /// `d/dt_j`.
    pub fn partial_t(&self, j: u32) -> SparsePoly {
        let mut out = Self::zero(self.bounds);
        for (m, c) in &self.terms {
            let e = m.t(j);
            if e > 0 {
                out.add_term(m.div_t(j, 1).unwrap(), c * Rational::from_integer(e.into()));
            }
        }
        out
    }

    /// `exp(self)` on the monomials accepted by `keep`, which must be closed
    /// under division for the result to be exact there. Uses
    /// `deg(v) Z[v] = sum_{r | v} deg(r) G[r] Z[v / r]`, one degree layer at a
    /// time.
    pub fn exp_filtered(
        &self,
        keep: &(dyn Fn(&Monomial) -> bool + Sync),
        exec: Execution,
    ) -> Result<SparsePoly> {
        let one = Monomial::one(&self.bounds);
        if !self.coefficient(&one).is_zero() {
            return Err(Error::Domain("exp needs a zero constant term".into()));
        }
        let mut layers: Vec<Vec<Monomial>> = vec![Vec::new(); self.bounds.max_degree as usize + 1];
        for m in self.bounds.monomials() {
            if m.degree() > 0 && keep(&m) {
                layers[m.degree() as usize].push(m);
            }
        }
        let mut z: HashMap<Monomial, Rational> = HashMap::from([(one, Rational::one())]);
        for (n, layer) in layers.iter().enumerate().skip(1) {
            let values = par::map(layer, exec, |v| {
                let mut acc = Rational::zero();
                for r in divisors(v) {
                    let Some(g) = self.terms.get(&r) else { continue };
                    let Some(zq) = z.get(&quotient(v, &r)) else { continue };
                    acc += g * zq * Rational::from_integer(r.degree().into());
                }
                acc / Rational::from_integer(n.into())
            });
            for (m, c) in layer.iter().zip(values) {
                if !c.is_zero() {
                    z.insert(m.clone(), c);
                }
            }
        }
        Ok(SparsePoly { bounds: self.bounds, terms: z, discarded: 0 })
    }

    pub fn exp(&self) -> Result<SparsePoly> {
        self.exp_filtered(&|_| true, Execution::Sequential)
    }
}

/// Non-trivial divisors of `v`, the empty monomial excluded.
fn divisors(v: &Monomial) -> Vec<Monomial> {
    let mut out = Vec::new();
    let mut cur = vec![0u8; v.0.len()];
    loop {
        let mut i = 0;
        while i < cur.len() {
            if cur[i] < v.0[i] {
                cur[i] += 1;
                break;
            }
            cur[i] = 0;
            i += 1;
        }
        if i == cur.len() {
            return out;
        }
        out.push(Monomial(cur.clone()));
    }
}

fn quotient(v: &Monomial, r: &Monomial) -> Monomial {
    Monomial(v.0.iter().zip(&r.0).map(|(a, b)| a - b).collect())
}

impl fmt::Display for SparsePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.sorted_terms();
        if terms.is_empty() {
            return write!(f, "0");
        }
        let rendered: Vec<String> =
            terms.iter().map(|(m, c)| format!("{c}*{}", m.render(&self.bounds))).collect();
        write!(f, "{}", rendered.join(" + "))
    }
}
