//! Densities, weights and dichotomy criteria for Gaussian and Gibbs measures.

pub mod cameron_martin;
pub mod dichotomy;
pub mod entropy;
pub mod gibbs;

pub use cameron_martin::{cameron_martin_log_density, cameron_martin_norm_sq};
pub use dichotomy::{
    covariance_eigenvalues, feldman_hajek_statistic, hellinger_mode, kakutani_power_law, kakutani_test,
    log_hellinger_mode, DichotomyVerdict, PowerLawPair, Verdict,
};
pub use entropy::{entropy_check, EntropyReport, HamiltonianPreset, TabulatedHamiltonian};
pub use gibbs::{gibbs_ensemble, gibbs_log_weight, GibbsSpec, GibbsWeight, WeightedEnsemble};
