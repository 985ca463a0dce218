//! Privatizing discrete data by linear reduction toward the marginal.
//!
//! Given a joint law of a secret `S` and a record `X`, the reduced channel
//! `P_{Y|S} = (1 - α) P_{X|S} + α P_X` shrinks every dependence of the output
//! on the secret by `1 - α` while leaving the output marginal equal to `P_X`.
//! This crate measures the privacy of that channel (local differential
//! privacy and log-lift), builds mechanisms `P_{Y|S,X}` realizing it, scores
//! their utility, and samples sanitized records reproducibly.
//!
//! Information quantities default to bits ([`LogBase::Bits`]).
//!
//! ```
//! use linsan::{demo, linear_reduce, ldp, tv_optimal_mechanism, verify_realization, Alpha};
//!
//! let j = demo::joint();
//! let alpha = Alpha::new(0.5).unwrap();
//! assert!((ldp(&linear_reduce(&j, alpha)) - 2.25f64.log2()).abs() < 1e-12);
//! let m = tv_optimal_mechanism(&j, alpha);
//! assert!(verify_realization(&m, &j, alpha).unwrap().passes());
//! ```

pub mod demo;
pub mod dist;
pub mod error;
pub mod formats;
pub mod lp;
pub mod markov;
pub mod nonmarkov;
pub mod privacy;
pub mod reduction;
pub mod sanitize;
pub mod sweep;
pub mod utility;

#[cfg(test)]
mod testing;

pub use dist::{Alphabet, Dist, JointDistribution, ProbMatrix, INPUT_TOLERANCE};
pub use error::{Error, Result};
pub use markov::{markov_dtv, markov_expected_distortion, markov_mechanism, MarkovMechanism};
pub use nonmarkov::{
    distortion_optimal_mechanism, induced_channel, partition_supports, tv_optimal_mechanism,
    verify_realization, Mechanism, RealizationReport, SupportPartition, TransportBlock,
};
pub use privacy::{ldp, ldp_in, log_lift, log_lift_in, LogBase, LogLift, PrivacyReport};
pub use reduction::{induced_joint, linear_reduce, Alpha, SoftChannel};
pub use sanitize::{estimate_joint, AnyMechanism, Record, SanitizerState};
pub use sweep::{parse_grid, sweep, Family, TradeoffPoint};
pub use utility::{
    dtv, dtv_l1, entropy, expected_distortion, mutual_information, DistortionMatrix, DtvConvention,
    UtilityReport,
};
