//! Exact machine checks of the operator identities and generating-function
//! relations satisfied by the intersection numbers.

use std::fmt;
use std::str::FromStr;

use crate::correlator::{Engine, Evaluator};
use crate::error::{Error, Result};
use crate::par::Execution;

pub mod identities;
pub mod poly;
pub mod series;
pub mod virasoro;

pub use identities::{iz_check, iz_phi_correlator, iz_phi_recursion, proposition_checks};
pub use poly::{Bounds, Monomial, SparsePoly};
pub use series::{build_f, build_g, shift_check, shift_polynomial, substitute_shift};
pub use virasoro::{
    annihilation_check, apply_virasoro, commutator_check, virasoro_constant, VirasoroOp,
};

/// Outcome of one check. A monomial or instance is either checked or
/// skipped, and skips are split by cause.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckReport {
    pub name: String,
    pub params: String,
    pub checked: u64,
    pub skipped_bounds: u64,
    pub skipped_genus: u64,
    pub failures: Vec<String>,
}

impl CheckReport {
    pub fn new(name: &str, params: String) -> Self {
        CheckReport {
            name: name.into(),
            params,
            checked: 0,
            skipped_bounds: 0,
            skipped_genus: 0,
            failures: Vec::new(),
        }
    }

    pub fn fail(&mut self, msg: String) {
        self.failures.push(msg);
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn skipped(&self) -> u64 {
        self.skipped_bounds + self.skipped_genus
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "CHECK {} {} {} checked={} skipped={}",
            self.name,
            self.params,
            if self.passed() { "PASS" } else { "FAIL" },
            self.checked,
            self.skipped()
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Virasoro,
    Shift,
    Iz,
    Propositions,
    All,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "virasoro" => Suite::Virasoro,
            "shift" => Suite::Shift,
            "iz" => Suite::Iz,
            "propositions" => Suite::Propositions,
            "all" => Suite::All,
            _ => return Err(Error::Parse(format!("unknown suite {s:?}"))),
        })
    }
}

/// Knobs for [`run_suite`]; the defaults are the documented desk-scale ones.
#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub bounds: Bounds,
    pub g_max: u32,
    pub basis_degree: u32,
    pub iz_g_max: u32,
    pub trials: usize,
    pub seed: u64,
    pub exec: Execution,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            bounds: Bounds::default(),
            g_max: 3,
            basis_degree: 3,
            iz_g_max: 6,
            trials: 200,
            seed: 1,
            exec: Execution::Parallel,
        }
    }
}

/// Runs the selected suite in a fixed order. Correlators come from `ev`; the
/// Itzykson-Zuber side always uses the pure-psi recursion.
pub fn run_suite(suite: Suite, cfg: &SuiteConfig, ev: &Evaluator) -> Result<Vec<CheckReport>> {
    let mut out = Vec::new();
    let all = suite == Suite::All;
    if all || suite == Suite::Virasoro {
        for n in -1..=3 {
            for m in (-1..=3).filter(|m| n + m >= -1) {
                out.push(commutator_check(n, m, cfg.bounds, cfg.basis_degree, cfg.exec)?);
            }
        }
        for k in -1..=2 {
            out.push(annihilation_check(k, cfg.g_max, cfg.bounds, ev, cfg.exec)?);
        }
    }
    if all || suite == Suite::Shift {
        out.push(shift_check(cfg.g_max, cfg.bounds, ev, cfg.exec)?);
    }
    if all || suite == Suite::Iz {
        let dvv = if ev.engine() == Engine::KmzDvv { None } else { Some(Evaluator::new(Engine::KmzDvv)) };
        out.push(iz_check(cfg.iz_g_max, dvv.as_ref().unwrap_or(ev))?);
    }
    if all || suite == Suite::Propositions {
        out.extend(proposition_checks(cfg.trials, cfg.seed, ev)?);
    }
    Ok(out)
}
