//! Exact intersection numbers of psi and kappa classes on moduli spaces of
//! curves, Weil-Petersson volume polynomials, and machine checks of the
//! Virasoro, shift and Itzykson-Zuber identities they satisfy.

pub mod cli;
pub mod constants;
pub mod correlator;
pub mod error;
pub mod exact;
pub mod multiindex;
pub mod par;
pub mod verify;
pub mod volumes;

pub use correlator::{CorrelatorKey, Engine, EngineSet, Evaluator};
pub use error::{Error, Result};
pub use exact::Rational;
pub use multiindex::MultiIndex;
pub use par::Execution;
