//! Seeded simulation of the martingale drivers and of rational kernels,
//! statistical checks of the kernel conditions, and claim valuation.

mod audits;
mod driver;
mod ensemble;
mod valuation;

pub use audits::{
    deflated_bond_martingale_check, kernel_condition_audit, DeflatedBondReport, KernelConditionReport, ProbeStat,
    SE_BAND, VANISHING_FRACTION, VANISHING_PROBE,
};
pub use driver::{MartingaleDriver, VolatilityPiece};
pub use ensemble::{kernel_paths, simulate_from, simulate_paths, KernelPaths, PathEnsemble};
pub use valuation::{value_claim, CashFlow, FlowValue, Payoff, SimulationSettings, ValuationMethod, ValuationReport};
