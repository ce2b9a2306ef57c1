//! Posteriors, Bayes factors and weights of evidence over a hypothesis set.
//!
//! The set is assumed mutually exclusive and exhaustive. That cannot be
//! checked; only its numerical consequence (priors summing to one) is.

use serde::Serialize;

use crate::data::{Dataset, DecibelValue, SubsetMask};
use crate::error::{Error, Result};
use crate::models::{log_marginal, Hypothesis, MarginalModel};
use crate::num::{stable_log_sum, KahanSum, Real};

/// Hypotheses with prior probabilities `P(H_h | I)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisSet<T> {
    hypotheses: Vec<Hypothesis<T>>,
    priors: Vec<T>,
}

impl<T: Real> HypothesisSet<T> {
    pub fn new(members: Vec<(Hypothesis<T>, T)>) -> Result<Self> {
        let (hypotheses, priors): (Vec<_>, Vec<_>) = members.into_iter().unzip();
        validate_priors(&priors)?;
        Ok(Self { hypotheses, priors })
    }

    pub fn len(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hypotheses.is_empty()
    }

    pub fn hypotheses(&self) -> &[Hypothesis<T>] {
        &self.hypotheses
    }

    pub fn priors(&self) -> &[T] {
        &self.priors
    }

    /// Full-data log-likelihood of every member, in set order.
    pub fn log_likelihoods(&self, data: &Dataset<T>) -> Result<Vec<T>> {
        let full = SubsetMask::full(data.len());
        self.hypotheses
            .iter()
            .map(|h| {
                h.check(data)?;
                Ok(log_marginal(h, full, data)?.value())
            })
            .collect()
    }
}

/// Priors must be finite, non-negative and sum to one.
pub fn validate_priors<T: Real>(priors: &[T]) -> Result<()> {
    if priors.is_empty() {
        return Err(Error::InvalidPriors("no hypotheses".into()));
    }
    for (i, &p) in priors.iter().enumerate() {
        if !(p.is_finite() && p >= T::zero() && p <= T::one()) {
            return Err(Error::InvalidPriors(format!("prior {i} is {p}")));
        }
    }
    let total = priors.iter().fold(T::zero(), |acc, &p| acc + p);
    if (total - T::one()).abs() > T::normalization_tolerance(priors.len()) {
        return Err(Error::InvalidPriors(format!(
            "priors sum to {total}, not 1"
        )));
    }
    Ok(())
}

/// Per-hypothesis row of an [`EvidenceReport`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisEvidence<T: Real> {
    pub hypothesis: String,
    #[serde(with = "crate::num::serde_real")]
    pub prior: T,
    #[serde(with = "crate::num::serde_real")]
    pub log_likelihood: T,
    #[serde(with = "crate::num::serde_real")]
    pub posterior: T,
    /// Non-relative log Bayes factor; `None` where undefined (prior 0 or 1,
    /// a single hypothesis, or every alternative impossible).
    #[serde(with = "crate::num::serde_real::option")]
    pub log_bayes_factor: Option<T>,
    pub weight_of_evidence_db: Option<DecibelValue<T>>,
}

/// Posteriors and Bayes factors for a hypothesis set given data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvidenceReport<T: Real> {
    pub hypotheses: Vec<HypothesisEvidence<T>>,
    /// `pairwise[a][b] = ln P(D|H_a) − ln P(D|H_b)`; `None` when both are zero.
    pub pairwise: Vec<Vec<Option<SerReal<T>>>>,
}

/// Scalar wrapper that serializes non-finite values as `null`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct SerReal<T: Real>(#[serde(with = "crate::num::serde_real")] pub T);

impl<T: Real> EvidenceReport<T> {
    /// Builds the report from precomputed log-likelihoods.
    pub fn from_log_likelihoods(
        names: &[&str],
        priors: &[T],
        log_likelihoods: &[T],
    ) -> Result<Self> {
        assert_eq!(names.len(), priors.len());
        assert_eq!(names.len(), log_likelihoods.len());
        validate_priors(priors)?;
        let posteriors = posteriors_from_log_likelihoods(priors, log_likelihoods)?;
        let hypotheses = (0..names.len())
            .map(|h| {
                let log_bf = nonrelative_from_log_likelihoods(priors, log_likelihoods, h).ok();
                HypothesisEvidence {
                    hypothesis: names[h].to_owned(),
                    prior: priors[h],
                    log_likelihood: log_likelihoods[h],
                    posterior: posteriors[h],
                    log_bayes_factor: log_bf,
                    weight_of_evidence_db: log_bf
                        .filter(|x| x.is_finite())
                        .map(weight_of_evidence_db),
                }
            })
            .collect();
        let pairwise = log_likelihoods
            .iter()
            .map(|&a| {
                log_likelihoods
                    .iter()
                    .map(|&b| relative_from_log_likelihoods(a, b).ok().map(SerReal))
                    .collect()
            })
            .collect();
        Ok(Self {
            hypotheses,
            pairwise,
        })
    }

    pub fn posteriors(&self) -> Vec<T> {
        self.hypotheses.iter().map(|h| h.posterior).collect()
    }
}

/// `P(H_h | D) ∝ P(D | H_h) P(H_h)`, normalized in log space.
pub fn posteriors_from_log_likelihoods<T: Real>(
    priors: &[T],
    log_likelihoods: &[T],
) -> Result<Vec<T>> {
    let joint: Vec<T> = priors
        .iter()
        .zip(log_likelihoods)
        .map(|(&p, &ll)| {
            if p == T::zero() {
                T::neg_infinity()
            } else {
                ll + p.ln()
            }
        })
        .collect();
    let max = joint
        .iter()
        .copied()
        .fold(T::neg_infinity(), |acc, x| if x > acc { x } else { acc });
    if max == T::neg_infinity() || max.is_nan() {
        return Err(Error::DegenerateEvidence);
    }
    // Normalize relative to the largest term; equal inputs give exactly equal shares.
    let weights: Vec<T> = joint.iter().map(|&j| (j - max).exp()).collect();
    let total = weights.iter().copied().collect::<KahanSum<T>>().sum();
    Ok(weights.iter().map(|&w| w / total).collect())
}

/// Posterior report for the set given the full dataset.
pub fn posterior<T: Real>(set: &HypothesisSet<T>, data: &Dataset<T>) -> Result<EvidenceReport<T>> {
    let lls = set.log_likelihoods(data)?;
    let names: Vec<&str> = set.hypotheses.iter().map(|h| h.name()).collect();
    EvidenceReport::from_log_likelihoods(&names, &set.priors, &lls)
}

fn relative_from_log_likelihoods<T: Real>(a: T, b: T) -> Result<T> {
    if a == T::neg_infinity() && b == T::neg_infinity() {
        return Err(Error::IndeterminateBayesFactor);
    }
    Ok(a - b)
}

/// `ln [P(D | a) / P(D | b)]`.
pub fn relative_bayes_factor<T: Real, A: MarginalModel<T>, B: MarginalModel<T>>(
    a: &A,
    b: &B,
    data: &Dataset<T>,
) -> Result<T> {
    let full = SubsetMask::full(data.len());
    let la = log_marginal(a, full, data)?.value();
    let lb = log_marginal(b, full, data)?.value();
    relative_from_log_likelihoods(la, lb)
}

/// `ln { P(D|H_h) [1 − P(H_h)] / Σ_{h'≠h} P(D|H_h') P(H_h') }`.
pub fn nonrelative_from_log_likelihoods<T: Real>(
    priors: &[T],
    log_likelihoods: &[T],
    h: usize,
) -> Result<T> {
    let len = priors.len();
    if len < 2 {
        return Err(Error::TooFewHypotheses(len));
    }
    if h >= len {
        return Err(Error::HypothesisOutOfRange { index: h, len });
    }
    let prior = priors[h];
    if !(prior > T::zero() && prior < T::one()) {
        return Err(Error::DegeneratePrior {
            index: h,
            prior: prior.to_f64().unwrap_or(f64::NAN),
        });
    }
    let alternatives: Vec<T> = (0..len)
        .filter(|&o| o != h)
        .map(|o| {
            if priors[o] == T::zero() {
                T::neg_infinity()
            } else {
                log_likelihoods[o] + priors[o].ln()
            }
        })
        .collect();
    let denominator = stable_log_sum(&alternatives);
    if denominator == T::neg_infinity() {
        return Err(Error::IndeterminateBayesFactor);
    }
    Ok(log_likelihoods[h] + (-prior).ln_1p() - denominator)
}

/// Non-relative log Bayes factor of hypothesis `h` within `set`.
pub fn nonrelative_bayes_factor<T: Real>(
    set: &HypothesisSet<T>,
    h: usize,
    data: &Dataset<T>,
) -> Result<T> {
    if set.len() < 2 {
        return Err(Error::TooFewHypotheses(set.len()));
    }
    if h >= set.len() {
        return Err(Error::HypothesisOutOfRange {
            index: h,
            len: set.len(),
        });
    }
    let lls = set.log_likelihoods(data)?;
    nonrelative_from_log_likelihoods(&set.priors, &lls, h)
}

/// Natural-log Bayes factor expressed in decibels.
pub fn weight_of_evidence_db<T: Real>(log_bayes_factor: T) -> DecibelValue<T> {
    DecibelValue::from_log_ratio(log_bayes_factor)
}
