//! Trace-method causal direction inference between two high-dimensional variables.
//!
//! The crate is organized around the linear causal model `Y = AX + E` with a
//! Haar-rotated cause covariance:
//!
//! - [`sampling`] generates Haar orthogonal matrices, model realizations and datasets.
//! - [`estimators`] fits covariances and structural matrices and evaluates the
//!   population, rank-corrected empirical, ridge and Schatten-moment Delta scores.
//! - [`theory`] evaluates concentration bounds, the Marchenko–Pastur fixed point
//!   and asymptotic ridge bias intervals.
//! - [`experiments`] holds the decision rule, the end-to-end pipeline and the
//!   Monte-Carlo harnesses.
//! - [`cli`] backs the `tracecause` binary.
//!
//! ```
//! use tracecause::prelude::*;
//!
//! let spec = CausalModelSpec::standard(10, 10, 60, 0.0);
//! let data = generate(&Rng::new(1), &spec).unwrap();
//! let cfg = PipelineConfig::ridge(0.0);
//! let verdict = run_pipeline(&data, &cfg).unwrap();
//! assert_eq!(verdict.verdict, Verdict::XCausesY);
//! ```

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod linalg;
pub mod rng;
pub mod sampling;
pub mod theory;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::error::{Error, Result};
    pub use crate::estimators::{
        delta_empirical, delta_p_moment, delta_population, delta_ridge, empirical_covariances,
        fit_pseudo_inverse, fit_ridge, fit_ridge_from, mc_expected_p_trace, CovarianceEstimates,
        DeltaScore, Direction, FitMethod, McEstimate, StructuralFit, Variant,
    };
    pub use crate::experiments::{
        decide, run_pipeline, sweep_lambda, sweep_noise, verify_bias_bounds, verify_concentration,
        CausalVerdict, ConcentrationReport, EstimatorConfig, PipelineConfig, SweepAxis,
        SweepResult, Verdict,
    };
    pub use crate::linalg::normalized_trace;
    pub use crate::rng::Rng;
    pub use crate::sampling::{
        generate, haar_orthogonal, realize_model, sample_dataset, CausalModelSpec,
        ModelRealization, SampleSet, SpectrumKind, SpectrumSpec, StructuralLaw,
    };
    pub use crate::theory::{
        lemma31_interval, lemma32_interval, pn_fixed_point, select_lambda_prime, thm2_bound,
        thm3_bound, BiasInterval, ConcentrationBound,
    };
}
