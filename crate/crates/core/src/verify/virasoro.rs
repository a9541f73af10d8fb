//! The operators `V_k` (`k >= -1`) acting on truncated polynomials, the
//! commutator relations and the annihilation of `exp(G)`.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::poly::{Bounds, Monomial, SparsePoly};
use super::series::build_generating;
use super::CheckReport;
use crate::correlator::Evaluator;
use crate::error::{Error, Result};
use crate::exact::{dfact, rat, Rational};
use crate::multiindex::{of_weight, sign_of_size, MultiIndex};
use crate::par::{self, Execution};

/// Constant term of `V_0`. With `<tau_1>_1 = 1/24` the string of first-group
/// terms contributes `-3/2 * 1/24` to the constant coefficient of
/// `V_0 exp(G)`, so only `1/16` cancels it. This also matches
/// `[V_1, V_{-1}] 1 = 2 V_0 1`.
pub fn virasoro_constant() -> Rational {
    rat(1, 16)
}

#[derive(Clone, Debug)]
pub struct VirasoroOp {
    k: i32,
    constant: Rational,
}

fn q(n: BigInt) -> Rational {
    Rational::from_integer(n)
}

impl VirasoroOp {
    pub fn new(k: i32) -> Result<Self> {
        Self::with_constant(k, virasoro_constant())
    }

    /// Same operator with a different `delta_{k,0}` constant.
    pub fn with_constant(k: i32, constant: Rational) -> Result<Self> {
        if k < -1 {
            return Err(Error::Domain(format!("V_{k} is not defined; need k >= -1")));
        }
        Ok(VirasoroOp { k, constant })
    }

    pub fn k(&self) -> i32 {
        self.k
    }

    /// `-1/2 (2(|L|+k)+3)!! (-1)^{||L||} / (L! (2|L|+1)!!)`.
    fn first_coefficient(&self, l: &MultiIndex) -> Rational {
        let w = l.weight() as i64;
        Rational::new(
            -dfact(2 * (w + self.k as i64) + 3) * sign_of_size(l),
            BigInt::from(2) * l.factorial() * dfact(2 * w + 1),
        )
    }

    /// `1/2 (2(j+k)+1)!! / (2j-1)!!`.
    fn second_coefficient(&self, j: i64) -> Rational {
        Rational::new(dfact(2 * (j + self.k as i64) + 1), BigInt::from(2) * dfact(2 * j - 1))
    }

    /// Pairs `(d1, d2)` with `d1 + d2 = k - 1`, both orders.
    fn third_pairs(&self) -> Vec<(u32, u32, Rational)> {
        (0..self.k.max(0) as u32)
            .map(|d1| {
                let d2 = self.k as u32 - 1 - d1;
                let c = Rational::new(dfact(2 * d1 as i64 + 1) * dfact(2 * d2 as i64 + 1), 4.into());
                (d1, d2, c)
            })
            .collect()
    }

    pub fn apply(&self, p: &SparsePoly) -> SparsePoly {
        let b = *p.bounds();
        let k = self.k as i64;
        let mut out = SparsePoly::zero(b);
        let third = self.third_pairs();
        for (m, c) in p.iter() {
            for (i, e) in m.t_entries(&b) {
                let e = q(e.into());
                // s^L d/dt_i with |L| = i - k - 1
                let w = i as i64 - k - 1;
                if w >= 0 {
                    let base = m.div_t(i, 1).unwrap();
                    for l in of_weight(w as u32) {
                        match base.times_s(&b, &l) {
                            Some(n) => out.add_term(n, c * &e * self.first_coefficient(&l)),
                            None => out.note_discard(),
                        }
                    }
                }
                // t_j d/dt_i with i = j + k
                let j = i as i64 - k;
                if j >= 0 {
                    match m.div_t(i, 1).unwrap().times_t(&b, j as u32, 1) {
                        Some(n) => out.add_term(n, c * &e * self.second_coefficient(j)),
                        None => out.note_discard(),
                    }
                }
            }
            for (d1, d2, w) in &third {
                let (e1, e2) = (m.t(*d1), m.t(*d2));
                let (factor, n) = if d1 == d2 {
                    (e1 * e1.saturating_sub(1), m.div_t(*d1, 2))
                } else {
                    (e1 * e2, m.div_t(*d1, 1).and_then(|x| x.div_t(*d2, 1)))
                };
                if let (true, Some(n)) = (factor > 0, n) {
                    out.add_term(n, c * w * q(factor.into()));
                }
            }
            if self.k == -1 {
                match m.times_t(&b, 0, 2) {
                    Some(n) => out.add_term(n, c * rat(1, 4)),
                    None => out.note_discard(),
                }
            }
            if self.k == 0 {
                out.add_term(m.clone(), c * &self.constant);
            }
        }
        out
    }

    /// Monomials whose coefficients in `Z` can reach `mu` under this operator;
    /// `None` stands for a monomial that needs a variable outside the layout.
    pub fn predecessors(&self, mu: &Monomial, b: &Bounds) -> Vec<Option<Monomial>> {
        let k = self.k as i64;
        let mut out = Vec::new();
        for l in mu.s_part(b).submultiindices() {
            let idx = l.weight() as i64 + k + 1;
            out.push(mu.div_s(b, &l).unwrap().times_t(b, idx as u32, 1));
        }
        for (j, _) in mu.t_entries(b) {
            let target = j as i64 + k;
            if target >= 0 {
                out.push(mu.div_t(j, 1).unwrap().times_t(b, target as u32, 1));
            }
        }
        for (d1, d2, _) in self.third_pairs() {
            out.push(mu.times_t(b, d1, 1).and_then(|x| x.times_t(b, d2, 1)));
        }
        if k == -1 {
            if let Some(n) = mu.div_t(0, 2) {
                out.push(Some(n));
            }
        }
        if k == 0 {
            out.push(Some(mu.clone()));
        }
        out
    }
}

pub fn apply_virasoro(k: i32, p: &SparsePoly) -> Result<SparsePoly> {
    Ok(VirasoroOp::new(k)?.apply(p))
}

/// `[V_n, V_m] = (n - m) V_{n+m}` on every basis monomial of degree at most
/// `basis_degree` whose images stay inside the bounds. The difference of the
/// two sides is a differential operator of order at most three, so the
/// degree-three basis already pins it down.
pub fn commutator_check(
    n: i32,
    m: i32,
    bounds: Bounds,
    basis_degree: u32,
    exec: Execution,
) -> Result<CheckReport> {
    let (vn, vm, vnm) = (VirasoroOp::new(n)?, VirasoroOp::new(m)?, VirasoroOp::new(n + m)?);
    let basis = bounds.monomials_up_to(basis_degree.min(bounds.max_degree));
    let factor = q((n - m).into());
    let outcomes = par::map(&basis, exec, |e| {
        let e = SparsePoly::monomial(bounds, e.clone(), Rational::one());
        let (a, b) = (vm.apply(&e), vn.apply(&e));
        let (aa, bb, c) = (vn.apply(&a), vm.apply(&b), vnm.apply(&e));
        if [&a, &b, &aa, &bb, &c].iter().any(|p| p.discarded() > 0) {
            return None;
        }
        Some(aa.sub(&bb) == c.scale(&factor))
    });
    let mut report = CheckReport::new("commutator", format!("n={n},m={m},{bounds},basis={basis_degree}"));
    for (e, o) in basis.iter().zip(outcomes) {
        match o {
            None => report.skipped_bounds += 1,
            Some(true) => report.checked += 1,
            Some(false) => {
                report.checked += 1;
                report.fail(format!("fails on {}", e.render(&bounds)));
            }
        }
    }
    Ok(report)
}

/// Coefficients of `V_k exp(G)` vanish on every monomial whose predecessors
/// all satisfy `w_plus <= 3 g_max - 3`; that window is closed under division,
/// so `exp(G)` restricted to it is exact and uses only genus `<= g_max`.
pub fn annihilation_check(
    k: i32,
    g_max: u32,
    bounds: Bounds,
    ev: &Evaluator,
    exec: Execution,
) -> Result<CheckReport> {
    let op = VirasoroOp::new(k)?;
    annihilation_with(&op, g_max, bounds, ev, exec)
}

pub fn annihilation_with(
    op: &VirasoroOp,
    g_max: u32,
    bounds: Bounds,
    ev: &Evaluator,
    exec: Execution,
) -> Result<CheckReport> {
    let cap = 3 * g_max as i64 - 3;
    let window = move |m: &Monomial| bounds.admits(m) && (m.w_plus(&bounds) as i64) <= cap;
    let g = build_generating(bounds, &window, ev, exec)?;
    let z = g.exp_filtered(&window, exec)?;
    let image = op.apply(&z);
    let mut report = CheckReport::new(
        "annihilation",
        format!("k={},g_max={g_max},{bounds}", op.k()),
    );
    for mu in bounds.monomials() {
        let preds = op.predecessors(&mu, &bounds);
        if preds.iter().any(|p| p.as_ref().map_or(true, |p| !bounds.admits(p))) {
            report.skipped_bounds += 1;
        } else if preds.iter().flatten().any(|p| !window(p)) {
            report.skipped_genus += 1;
        } else {
            report.checked += 1;
            let c = image.coefficient(&mu);
            if !c.is_zero() {
                report.fail(format!("coefficient {c} at {}", mu.render(&bounds)));
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlator::Engine;
    use crate::exact::int;

    fn mono(b: &Bounds, t: &[(u32, u32)], s: &str) -> Monomial {
        let s: MultiIndex = s.parse().unwrap();
        Monomial::build(b, t, &s).unwrap()
    }

    fn poly(b: Bounds, t: &[(u32, u32)]) -> SparsePoly {
        SparsePoly::monomial(b, mono(&b, t, "-"), int(1))
    }

    #[test]
    fn images_of_small_monomials() {
        let b = Bounds::default();
        let one = SparsePoly::one(b);
        let v0 = apply_virasoro(0, &one).unwrap();
        assert_eq!(v0, SparsePoly::one(b).scale(&rat(1, 16)));
        let v0_alt = VirasoroOp::with_constant(0, rat(1, 48)).unwrap().apply(&one);
        assert_eq!(v0_alt.coefficient(&Monomial::one(&b)), rat(1, 48));
        let vm1 = apply_virasoro(-1, &one).unwrap();
        assert_eq!(vm1, poly(b, &[(0, 2)]).scale(&rat(1, 4)));
        assert!(apply_virasoro(1, &one).unwrap().is_zero());
        assert!(apply_virasoro(-2, &one).is_err());
    }

    #[test]
    fn hand_expansion_v1_t2() {
        // first group, L = 0: -1/2 * 5!! = -15/2; second group, j = 1: 1/2 * 5!!/1!! t1
        let b = Bounds::default();
        let image = apply_virasoro(1, &poly(b, &[(2, 1)])).unwrap();
        let mut expected = SparsePoly::one(b).scale(&rat(-15, 2));
        expected.add_term(mono(&b, &[(1, 1)], "-"), rat(15, 2));
        assert_eq!(image, expected);
    }

    #[test]
    fn hand_expansion_with_kappa_terms() {
        // V_0 t_3 : first group |L| = 2 gives s2 and s1^2 terms, second group 7!!/(2 5!!) t3
        let b = Bounds::default();
        let image = apply_virasoro(0, &poly(b, &[(3, 1)])).unwrap();
        let mut expected = SparsePoly::zero(b);
        // -1/2 * 7!! * (-1)^1 / (1 * 5!!) = 7/2
        expected.add_term(mono(&b, &[], "2:1"), rat(7, 2));
        // -1/2 * 7!! * (+1) / (2! * 5!!) = -7/4
        expected.add_term(mono(&b, &[], "1:2"), rat(-7, 4));
        expected.add_term(mono(&b, &[(3, 1)], "-"), rat(7, 2));
        expected.add_term(mono(&b, &[(3, 1)], "-"), rat(1, 16));
        assert_eq!(image, expected);
    }

    #[test]
    fn second_derivative_group() {
        // V_1 t0^2: 1/4 * 2 = 1/2, plus t0 d/dt1 parts vanish
        let b = Bounds::default();
        let image = apply_virasoro(1, &poly(b, &[(0, 2)])).unwrap();
        assert_eq!(image, SparsePoly::one(b).scale(&rat(1, 2)));
        // V_2 t0 t1: d1 + d2 = 1 both orders, 1/4 * 3 * 2 = 3/2
        let image = apply_virasoro(2, &poly(b, &[(0, 1), (1, 1)])).unwrap();
        assert_eq!(image, SparsePoly::one(b).scale(&rat(3, 2)));
    }

    #[test]
    fn out_of_bounds_terms_are_counted() {
        let b = Bounds { max_t: 3, max_s_weight: 1, max_degree: 2 };
        let image = apply_virasoro(1, &poly(b, &[(0, 1), (3, 1)])).unwrap();
        // t0 d/dt3 wants s^L with |L| = 1 (kept) ; t_j d/dt_{j+1} sends t3 to t2 (kept)
        // and t0 cannot move; only the t0^2 style terms are absent here
        assert_eq!(image.discarded(), 0);
        let image = apply_virasoro(-1, &poly(b, &[(0, 1), (1, 1)])).unwrap();
        assert!(image.discarded() > 0);
        let image = apply_virasoro(0, &poly(b, &[(3, 1)])).unwrap();
        // s2 and s1^2 both exceed s-weight 1
        assert_eq!(image.discarded(), 2);
    }

    #[test]
    fn commutators_small() {
        let b = Bounds { max_t: 5, max_s_weight: 3, max_degree: 6 };
        for (n, m) in [(0, 0), (1, -1), (2, 1), (-1, 0), (3, -1)] {
            let r = commutator_check(n, m, b, 3, Execution::Parallel).unwrap();
            assert!(r.passed(), "{r}");
            assert!(r.checked > 0, "{r}");
        }
    }

    #[test]
    fn wrong_constant_breaks_the_algebra() {
        let b = Bounds::default();
        let one = SparsePoly::one(b);
        // [V_1, V_{-1}] 1 = 2 V_0 1 forces the constant
        let lhs = apply_virasoro(1, &apply_virasoro(-1, &one).unwrap()).unwrap();
        assert_eq!(lhs, SparsePoly::one(b).scale(&rat(1, 8)));
        let v0_48 = VirasoroOp::with_constant(0, rat(1, 48)).unwrap().apply(&one);
        assert_ne!(lhs, v0_48.scale(&int(2)));
    }

    #[test]
    fn annihilation_small() {
        let b = Bounds { max_t: 5, max_s_weight: 3, max_degree: 5 };
        let ev = Evaluator::new(Engine::Alpha);
        for k in -1..=2 {
            let r = annihilation_check(k, 2, b, &ev, Execution::Parallel).unwrap();
            assert!(r.passed(), "{r} {:?}", r.failures);
            assert!(r.checked > 0);
            assert_eq!(r.checked + r.skipped(), b.monomials().len() as u64);
        }
        let op = VirasoroOp::with_constant(0, rat(1, 48)).unwrap();
        let r = annihilation_with(&op, 2, b, &ev, Execution::Parallel).unwrap();
        assert!(!r.passed());
        assert!(r.failures[0].contains("at 1"), "{:?}", r.failures);
    }

    #[test]
    fn predecessors_cover_image() {
        // every monomial that reaches mu must appear among its predecessors
        let b = Bounds { max_t: 4, max_s_weight: 2, max_degree: 3 };
        for k in -1..=3 {
            let op = VirasoroOp::new(k).unwrap();
            for src in b.monomials() {
                let image = op.apply(&SparsePoly::monomial(b, src.clone(), int(1)));
                for (mu, _) in image.iter() {
                    let preds = op.predecessors(mu, &b);
                    assert!(preds.contains(&Some(src.clone())), "k={k} {}", mu.render(&b));
                }
            }
        }
    }
}
