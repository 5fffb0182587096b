//! Monte Carlo experiments on truncated fields and flows.
//!
//! Every experiment takes a serializable config carrying its own base seed and
//! returns a serializable report. Conclusions are statements about the
//! truncated (finite `N`) systems only.

mod cameron_martin;
mod distinguish;
mod invariance;
mod ldp;
pub mod presets;

pub use cameron_martin::{cameron_martin_experiment, CmConfig, CmReport, EvolutionSummary, FunctionalCheck};
pub use distinguish::{distinguishability_demo, DistinguishConfig, DistinguishReport};
pub use invariance::{
    invariance_calibration, invariance_experiment, observable_panel, CalibrationReport, EnsembleSummary,
    InvarianceConfig, InvarianceReport, MeasureSpec, Observable, ObservableTest, Reduction, UniformityTest,
};
pub use ldp::{
    exact_ball_probability, ldp_mc, ldp_rate_infimum, LdpConfig, LdpPoint, LdpReport, LdpSet, RateInfimum,
};
