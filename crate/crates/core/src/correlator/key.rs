use std::fmt;

use crate::error::{Error, Result};
use crate::multiindex::{self, MultiIndex};

/// Canonical name of one bracket `<kappa(b) tau_{d_1} ... tau_{d_n}>_g`.
///
/// `taus` is kept sorted ascending, so the pivot used by the recursions (the
/// largest exponent) is the last entry.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CorrelatorKey {
    pub genus: u32,
    pub kappa: MultiIndex,
    pub taus: Vec<u32>,
}

impl CorrelatorKey {
    pub fn new(genus: u32, kappa: MultiIndex, mut taus: Vec<u32>) -> Self {
        taus.sort_unstable();
        Self { genus, kappa, taus }
    }

    pub fn psi(genus: u32, taus: Vec<u32>) -> Self {
        Self::new(genus, MultiIndex::zero(), taus)
    }

    pub fn n(&self) -> usize {
        self.taus.len()
    }

    /// `3g - 3 + n`
    pub fn dimension(&self) -> i64 {
        3 * self.genus as i64 - 3 + self.n() as i64
    }

    /// `|kappa| + sum d_i`
    pub fn degree(&self) -> i64 {
        self.kappa.weight() as i64 + self.taus.iter().map(|&d| d as i64).sum::<i64>()
    }

    /// `2g - 2 + n > 0`
    pub fn is_stable(&self) -> bool {
        2 * self.genus as i64 - 2 + self.n() as i64 > 0
    }

    /// Stable and of the right degree; every other key evaluates to 0.
    pub fn is_admissible(&self) -> bool {
        self.is_stable() && self.degree() == self.dimension()
    }

    pub fn is_pure_psi(&self) -> bool {
        self.kappa.is_zero()
    }

    /// Rejects keys that do not name a point of a stable moduli space.
    pub fn check_stable(&self) -> Result<()> {
        if self.n() == 0 && self.genus < 2 {
            return Err(Error::Domain(format!(
                "{self}: no marked points requires genus >= 2"
            )));
        }
        if !self.is_stable() {
            return Err(Error::Unstable(self.to_string()));
        }
        Ok(())
    }

    /// Text form used by the cache file: `g=..;k=..;t=..`.
    pub fn record(&self) -> String {
        format!("g={};k={};t={}", self.genus, self.kappa, render_taus(&self.taus))
    }

    pub fn parse_record(s: &str) -> Result<(Self, &str)> {
        let bad = || Error::Parse(format!("bad cache record {s:?}"));
        let mut fields = s.splitn(4, ';');
        let g = fields.next().and_then(|f| f.strip_prefix("g=")).ok_or_else(bad)?;
        let k = fields.next().and_then(|f| f.strip_prefix("k=")).ok_or_else(bad)?;
        let t = fields.next().and_then(|f| f.strip_prefix("t=")).ok_or_else(bad)?;
        let v = fields.next().and_then(|f| f.strip_prefix("v=")).ok_or_else(bad)?;
        let genus: u32 = g.parse().map_err(|_| bad())?;
        let kappa: MultiIndex = k.parse()?;
        let taus = parse_taus(t)?;
        Ok((Self::new(genus, kappa, taus), v))
    }
}

impl fmt::Display for CorrelatorKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<k({})", self.kappa)?;
        for d in &self.taus {
            write!(f, " t{d}")?;
        }
        write!(f, ">_{}", self.genus)
    }
}

pub fn render_taus(taus: &[u32]) -> String {
    taus.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
}

/// Comma list of nonnegative exponents; the empty string is the empty list.
pub fn parse_taus(s: &str) -> Result<Vec<u32>> {
    let s = s.trim();
    if s.is_empty() || s == "-" {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<u32>()
                .map_err(|_| Error::Parse(format!("bad tau exponent {p:?}")))
        })
        .collect()
}

/// Every admissible key with `3g - 3 + n <= max_dim` and `|kappa| <= max_kappa`.
/// Keys with no marked points are included when `g >= 2`.
pub fn admissible_keys(max_dim: u32, max_kappa: u32) -> Vec<CorrelatorKey> {
    let mut out = Vec::new();
    for g in 0..=(max_dim + 3) / 3 {
        for n in 0..=(max_dim + 3 - 3 * g.min(1)) {
            let dim = 3 * g as i64 - 3 + n as i64;
            if dim < 0 || dim > max_dim as i64 || 2 * g as i64 - 2 + n as i64 <= 0 {
                continue;
            }
            let dim = dim as u32;
            for w in 0..=max_kappa.min(dim) {
                for kappa in multiindex::of_weight(w) {
                    for taus in multisets(n as usize, dim - w) {
                        out.push(CorrelatorKey::new(g, kappa.clone(), taus));
                    }
                }
            }
        }
    }
    out.sort_by(|a, b| {
        (a.dimension(), a.kappa.weight(), a)
            .cmp(&(b.dimension(), b.kappa.weight(), b))
    });
    out
}

/// Ascending sequences of `len` nonnegative integers summing to `total`.
pub(crate) fn multisets(len: usize, total: u32) -> Vec<Vec<u32>> {
    fn rec(len: usize, total: u32, min: u32, acc: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if len == 0 {
            if total == 0 {
                out.push(acc.clone());
            }
            return;
        }
        let mut x = min;
        while x as u64 * len as u64 <= total as u64 {
            acc.push(x);
            rec(len - 1, total - x, x, acc, out);
            acc.pop();
            x += 1;
        }
    }
    let mut out = Vec::new();
    rec(len, total, 0, &mut Vec::new(), &mut out);
    out
}
