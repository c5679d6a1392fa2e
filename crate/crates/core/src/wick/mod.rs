//! Moment-factoring oracle for the ghost-image mean and variance.
//!
//! The photocurrent fourth moment is normally ordered ([`normal_order`]),
//! each resulting field moment is expanded over Gaussian pairings
//! ([`enumerate_pairings`]), and every pairing becomes a product of
//! Gaussian-Schell kernels integrated over detection times and the bucket
//! plane. No step uses the closed-form SNR expressions.

pub mod expr;
mod oracle;
pub mod spatial;
pub mod temporal;

pub use expr::{
    enumerate_pairings, fourth_moment_factors, normal_order, Anchor, CurrentFactor, Detector,
    FieldLabel, MomentExpression, Node, Pair, PairType, Pairing, SpaceVar,
};
pub use oracle::{
    mean_c, notch_sensitivity, variance_c, LedgerEntry, NoiseClass, NotchReport, OracleOptions,
    OracleResult, QuadratureConfig, TermLedger,
};
