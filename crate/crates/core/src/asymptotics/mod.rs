//! Long rates as maturity goes to infinity: finite-horizon estimation,
//! asymptotic classification of curves, and audits of how the long rates of
//! different conventions and times must relate.

mod audits;
mod classify;
mod estimate;

pub use audits::{
    dir_curve_audit, dir_monotonicity_audit, pareto_kernel_certificate, stratification_audit, DirReport, DirTimeRow,
    ParetoCertificate, StratificationReport, TailMeanRow, ADMISSIBLE_DISCOUNT, BOND_PROBES,
    BOUNDED_RATIO, DIR_TOLERANCE, MIN_CERTIFICATE_HORIZON, THETA_BINS,
};
pub use classify::{
    classify_curve, deterministic_long_rate, AsymptoticClass, CurveClassification, FitDiagnostics, LongRate,
    FIT_RESIDUAL, MIN_CLASSIFY_HORIZON, MODEL_CLASSIFY_HORIZON,
};
pub use estimate::{
    default_long_rate_schedule, estimate_long_rate, LimitKind, LongRateEstimate, CONVERGENCE_TOLERANCE,
    DECAY_SLOPE, DIVERGENCE_CAP, ZERO_TOLERANCE,
};
