//! Regime classification, Monte Carlo ensembles and empirical checks.

mod ensemble;
mod regime;
mod verify;

pub use ensemble::{
    checkpoint_times, quantile, run_ensemble, run_ensemble_with_threads, Checkpoint,
    EnsembleSamples, EnsembleStats, EstimatorConfig, SpeciesStats,
};
pub use regime::{
    classify_regime, classify_unchecked, ClassifyOptions, FiredRule, Labels, RegimeLabel,
    RegimeReport,
};
pub use verify::*;
