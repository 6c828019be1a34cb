//! Sweeps in `s`, limit extrapolation and three-valued verdicts.

mod geometry;
mod inequalities;
mod sweep;
mod verdict;

pub use geometry::geometry_suite;
pub use inequalities::{run_suite, verify_inequalities, InequalityReport, InequalitySuite};
pub use sweep::{
    bbm_sweep, bbm_sweep_with, extrapolate_limit, local_limit, ms_sweep, ms_sweep_with,
    Extrapolation, Regime, SweepOptions, SweepPoint, SweepResult, TargetValue, TildeForm,
    BBM_S_GRID, MS_S_GRID,
};
pub use verdict::{band, Verdict, VerdictRecord, SIGMA_GUARD};
