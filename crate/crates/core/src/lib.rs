//! Exact Bayesian model evidence and subset-lattice cross-validation.
//!
//! For a hypothesis with a closed-form marginal likelihood this crate
//! computes the log-likelihood, leave-one-out and leave-m-out log-scores,
//! and the per-cardinality tables showing that the log-likelihood equals
//! the sum, over subset sizes `k`, of the leave-one-out log-score averaged
//! over all subsets of size `k`. Around that sit posteriors, relative and
//! non-relative Bayes factors, and weights of evidence in decibels.
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the `*64` and
//! `*32` aliases below fix the scalar.
//!
//! ```
//! use subset_evidence::{lattice, Dataset64, Hypothesis64, LatticeOptions};
//!
//! let h = Hypothesis64::beta_bernoulli("uniform", 1.0, 1.0).unwrap();
//! let data = Dataset64::categorical(&[1, 0, 1]).unwrap();
//! let v = lattice::verify_identity(&h, &data, 1e-12, &LatticeOptions::default()).unwrap();
//! assert!(v.pass);
//! assert!((v.direct - (1.0f64 / 12.0).ln()).abs() < 1e-14);
//! ```

pub mod data;
pub mod error;
pub mod evidence;
pub mod lattice;
pub mod models;
pub mod num;

pub use data::{combinations, Dataset, Datum, DatumKind, DecibelValue, LogProb, SubsetMask};
pub use error::{Error, Result};
pub use evidence::{EvidenceReport, HypothesisEvidence, HypothesisSet};
pub use lattice::{
    CvScheme, CvScore, DecompositionForm, DecompositionRow, DecompositionTable, LatticeOptions,
    MarginalCache, Verification, DEFAULT_D_MAX, HARD_D_MAX,
};
pub use models::{CountingModel, Hypothesis, MarginalModel, Model, ModelKind};
pub use num::{stable_log_sum, stable_mean, KahanSum, Real};

pub type Dataset64 = Dataset<f64>;
pub type Datum64 = Datum<f64>;
pub type Hypothesis64 = Hypothesis<f64>;
pub type HypothesisSet64 = HypothesisSet<f64>;
pub type MarginalCache64 = MarginalCache<f64>;
pub type DecompositionTable64 = DecompositionTable<f64>;
pub type Verification64 = Verification<f64>;
pub type EvidenceReport64 = EvidenceReport<f64>;
pub type LogProb64 = LogProb<f64>;

pub type Dataset32 = Dataset<f32>;
pub type Hypothesis32 = Hypothesis<f32>;
pub type MarginalCache32 = MarginalCache<f32>;
pub type DecompositionTable32 = DecompositionTable<f32>;
