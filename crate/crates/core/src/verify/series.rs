//! Generating functions `G(s, t)` and `F(t)` and the shift that relates them.

use std::collections::HashMap;

use num_traits::One;

use super::poly::{Bounds, Monomial, SparsePoly};
use super::CheckReport;
use crate::correlator::{CorrelatorKey, Evaluator};
use crate::error::Result;
use crate::exact::Rational;
use crate::multiindex::{of_weight, sign_of_size, MultiIndex};
use crate::par::Execution;

/// The correlator a monomial of `G` records, when its genus is an integer
/// and the moduli space is stable.
pub fn monomial_key(m: &Monomial, b: &Bounds) -> Option<CorrelatorKey> {
    let g = m.genus(b)?;
    let taus: Vec<u32> = m
        .t_entries(b)
        .into_iter()
        .flat_map(|(j, e)| std::iter::repeat(j).take(e as usize))
        .collect();
    let key = CorrelatorKey::new(g, m.s_part(b), taus);
    key.is_stable().then_some(key)
}

/// `G` restricted to the monomials accepted by `keep`.
pub fn build_generating(
    bounds: Bounds,
    keep: &(dyn Fn(&Monomial) -> bool + Sync),
    ev: &Evaluator,
    exec: Execution,
) -> Result<SparsePoly> {
    let mut monos = Vec::new();
    let mut keys = Vec::new();
    for m in bounds.monomials() {
        if !keep(&m) {
            continue;
        }
        if let Some(k) = monomial_key(&m, &bounds) {
            keys.push(k);
            monos.push(m);
        }
    }
    let values = ev.evaluate_batch(&keys, exec);
    let mut g = SparsePoly::zero(bounds);
    for (m, v) in monos.into_iter().zip(values) {
        let c = v? / Rational::from_integer(m.factorial());
        g.add_term(m, c);
    }
    Ok(g)
}

/// All monomials of `G` within bounds whose genus is at most `g_max`.
pub fn build_g(g_max: u32, bounds: Bounds, ev: &Evaluator, exec: Execution) -> Result<SparsePoly> {
    build_generating(bounds, &|m| m.genus(&bounds).is_some_and(|g| g <= g_max), ev, exec)
}

/// The pure-psi part, which is `F(t)`.
pub fn build_f(g_max: u32, bounds: Bounds, ev: &Evaluator, exec: Execution) -> Result<SparsePoly> {
    build_generating(
        bounds,
        &|m| m.s_part(&bounds).is_zero() && m.genus(&bounds).is_some_and(|g| g <= g_max),
        ev,
        exec,
    )
}

/// `p_k = sum_{|L| = k-1} (-1)^{||L|| - 1} s^L / L!` for `k >= 2`.
pub fn shift_polynomial(k: u32, bounds: Bounds) -> SparsePoly {
    let mut p = SparsePoly::zero(bounds);
    if k < 2 {
        return p;
    }
    for l in of_weight(k - 1) {
        let c = Rational::new((-sign_of_size(&l)).into(), l.factorial());
        match Monomial::build(&bounds, &[], &l) {
            Some(m) => p.add_term(m, c),
            None => p.note_discard(),
        }
    }
    p
}

/// `F(t_0, t_1, t_2 + p_2, t_3 + p_3, ...)` truncated to bounds.
pub fn substitute_shift(f: &SparsePoly) -> SparsePoly {
    let b = *f.bounds();
    let mut powers: HashMap<(u32, u32), SparsePoly> = HashMap::new();
    let mut power = |k: u32, e: u32| -> SparsePoly {
        powers
            .entry((k, e))
            .or_insert_with(|| {
                let mut base = shift_polynomial(k, b);
                base.add_term(Monomial::build(&b, &[(k, 1)], &MultiIndex::zero()).unwrap(), Rational::one());
                (0..e).fold(SparsePoly::one(b), |acc, _| acc.mul(&base))
            })
            .clone()
    };
    let mut out = SparsePoly::zero(b);
    for (m, c) in f.sorted_terms() {
        let mut acc = SparsePoly::one(b);
        for (j, e) in m.t_entries(&b) {
            let factor = if j < 2 {
                SparsePoly::monomial(b, Monomial::build(&b, &[(j, e)], &MultiIndex::zero()).unwrap(), Rational::one())
            } else {
                power(j, e)
            };
            acc = acc.mul(&factor);
        }
        for (n, v) in acc.iter() {
            out.add_term(n.clone(), v * c);
        }
    }
    out
}

/// `G` and the shifted `F` agree on every monomial of genus at most `g_max`.
/// Monomials with a non-integer genus count as checked (both sides vanish);
/// higher genera are skipped.
pub fn shift_check(g_max: u32, bounds: Bounds, ev: &Evaluator, exec: Execution) -> Result<CheckReport> {
    // F needs t up to s-weight + 1 to feed every s-monomial
    let wide = Bounds { max_t: bounds.max_t.max(bounds.max_s_weight + 1), ..bounds };
    let g = build_g(g_max, wide, ev, exec)?;
    let shifted = substitute_shift(&build_f(g_max, wide, ev, exec)?);
    let mut report = CheckReport::new("shift", format!("g_max={g_max},{bounds}"));
    for mu in wide.monomials() {
        if mu.t_entries(&wide).iter().any(|&(j, _)| j > bounds.max_t) {
            continue;
        }
        if mu.genus(&wide).is_some_and(|gg| gg > g_max) {
            report.skipped_genus += 1;
            continue;
        }
        report.checked += 1;
        let (lhs, rhs) = (g.coefficient(&mu), shifted.coefficient(&mu));
        if lhs != rhs {
            report.fail(format!("{}: G has {lhs}, shifted F has {rhs}", mu.render(&wide)));
        }
    }
    Ok(report)
}
