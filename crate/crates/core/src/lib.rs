//! Trimmed Nadaraya-Watson kernel regression.
//!
//! The estimator sorts the sample by covariate, discards the `floor(n * alpha)`
//! smallest and largest covariates together with their responses, and forms
//! the kernel-weighted mean of the remaining responses. Alongside it live the
//! order-statistic asymptotics, Monte-Carlo and bootstrap efficiency runs and
//! a contamination probe for the finite-sample breakdown point.
//!
//! ```
//! use trimmed_nw::{trimmed_nw, BandwidthRule, KernelSpec, PairedSample};
//!
//! let s = PairedSample::new(vec![0.1, 0.2, 0.3, 0.4, 0.5], vec![1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
//! let est = trimmed_nw(&s, 0.3, 0.2, &KernelSpec::default(), &BandwidthRule::Fixed(0.15)).unwrap();
//! assert!((est.value - 3.0).abs() < 1e-12);
//! ```

pub mod asymptotics;
pub mod cli_io;
pub mod distributions;
pub mod error;
pub mod estimator;
pub mod kernels;
pub mod quadrature;
pub mod simulation;

pub use asymptotics::{AeCurve, OrderStatContext};
pub use distributions::{CovariateLaw, ErrorLaw, SeededRng};
pub use error::{Error, Result};
pub use estimator::{
    argmin_oracle, nw, order_pairs, trim_count, trimmed_nw, OrderedSample, PairedSample, TrimmedEstimate,
};
pub use kernels::{BandwidthRule, KernelKind, KernelSpec};
pub use simulation::{
    BootstrapConfig, BreakdownProbe, BreakdownReport, ContaminationPlan, EfficiencyReport, Placement,
    RegressionScenario, WindowPolicy,
};
