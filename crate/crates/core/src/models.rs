//! Predictive engines with closed-form marginal likelihoods.
//!
//! A model only has to say how to fold a datum into its sufficient
//! statistics and how to turn those statistics into `ln P(data | H)`.
//! Conditional predictives are differences of two such marginals, which is
//! the single path the lattice engine relies on.

use std::sync::atomic::{AtomicU64, Ordering};

use serde::Serialize;

use crate::data::{Dataset, Datum, DatumKind, LogProb, SubsetMask};
use crate::error::{Error, Result};
use crate::num::{ln_beta, ln_gamma, Real};

/// A hypothesis with a closed-form marginal likelihood over any data subset.
pub trait MarginalModel<T: Real>: Sync {
    type Stats: Clone + Send + Sync;

    /// Human-readable kind, used in diagnostics.
    fn kind_name(&self) -> &'static str;

    /// Name used in diagnostics; defaults to the kind.
    fn name(&self) -> &str {
        self.kind_name()
    }

    fn empty_stats(&self) -> Self::Stats;

    /// Checks that `datum` can be scored. `observe` and `forget` assume it.
    fn check_datum(&self, datum: &Datum<T>) -> std::result::Result<(), DatumRejection>;

    fn observe(&self, stats: &mut Self::Stats, datum: &Datum<T>);

    fn forget(&self, stats: &mut Self::Stats, datum: &Datum<T>);

    /// `ln P(data summarized by stats | H)`; 0 for empty statistics.
    fn log_marginal_stats(&self, stats: &Self::Stats) -> T;

    /// Whether the marginal is a probability mass (true) or a density.
    fn is_discrete(&self) -> bool;
}

/// Why a model refused a datum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatumRejection {
    Kind,
    Label { label: u32, categories: usize },
}

/// Validates every datum of `data` against `model`.
pub fn check_dataset<T: Real, M: MarginalModel<T> + ?Sized>(
    model: &M,
    data: &Dataset<T>,
) -> Result<()> {
    for (index, datum) in data.data().iter().enumerate() {
        match model.check_datum(datum) {
            Ok(()) => {}
            Err(DatumRejection::Kind) => {
                return Err(Error::KindMismatch {
                    hypothesis: model.name().to_owned(),
                    model: model.kind_name(),
                    kind: datum.kind(),
                    index,
                })
            }
            Err(DatumRejection::Label { label, categories }) => {
                return Err(Error::LabelOutOfRange {
                    index,
                    label,
                    categories,
                })
            }
        }
    }
    Ok(())
}

fn check_label<T: Real>(
    datum: &Datum<T>,
    categories: usize,
) -> std::result::Result<(), DatumRejection> {
    let label = datum.label().ok_or(DatumRejection::Kind)?;
    if (label as usize) < categories {
        Ok(())
    } else {
        Err(DatumRejection::Label { label, categories })
    }
}

fn check_real<T: Real>(datum: &Datum<T>) -> std::result::Result<(), DatumRejection> {
    datum.real().map(|_| ()).ok_or(DatumRejection::Kind)
}

fn invalid(model: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        model,
        reason: reason.into(),
    }
}

fn positive_finite<T: Real>(model: &'static str, what: &str, x: T) -> Result<T> {
    if x.is_finite() && x > T::zero() {
        Ok(x)
    } else {
        Err(invalid(
            model,
            format!("{what} must be positive and finite, got {x}"),
        ))
    }
}

fn finite<T: Real>(model: &'static str, what: &str, x: T) -> Result<T> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(invalid(model, format!("{what} must be finite, got {x}")))
    }
}

/// Per-category counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountStats {
    pub n: u64,
    pub counts: Vec<u64>,
}

impl CountStats {
    fn new(categories: usize) -> Self {
        Self {
            n: 0,
            counts: vec![0; categories],
        }
    }

    fn observe(&mut self, label: u32) {
        self.n += 1;
        self.counts[label as usize] += 1;
    }

    fn forget(&mut self, label: u32) {
        self.n -= 1;
        self.counts[label as usize] -= 1;
    }
}

/// Count and success count of binary outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BernoulliStats {
    pub n: u64,
    pub successes: u64,
}

/// Count, sum and sum of squares of real data after subtracting a fixed
/// centre (the hypothesis mean or the prior mean).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GaussianStats<T> {
    pub n: u64,
    pub sum: T,
    pub sum_sq: T,
}

impl<T: Real> GaussianStats<T> {
    fn observe(&mut self, y: T) {
        self.n += 1;
        self.sum = self.sum + y;
        self.sum_sq = self.sum_sq + y * y;
    }

    fn forget(&mut self, y: T) {
        self.n -= 1;
        self.sum = self.sum - y;
        self.sum_sq = self.sum_sq - y * y;
    }
}

/// I.i.d. categorical data with a fixed probability table.
#[derive(Debug, Clone, PartialEq)]
pub struct SimpleCategorical<T> {
    probabilities: Vec<T>,
    log_probabilities: Vec<T>,
}

impl<T: Real> SimpleCategorical<T> {
    const NAME: &'static str = "simple_categorical";

    pub fn new(probabilities: Vec<T>) -> Result<Self> {
        if probabilities.is_empty() {
            return Err(invalid(Self::NAME, "probability table is empty"));
        }
        for &p in &probabilities {
            if !(p.is_finite() && p >= T::zero()) {
                return Err(invalid(
                    Self::NAME,
                    format!("probability {p} is not in [0, 1]"),
                ));
            }
        }
        let total = probabilities.iter().fold(T::zero(), |a, &p| a + p);
        if (total - T::one()).abs() > T::normalization_tolerance(probabilities.len()) {
            return Err(invalid(
                Self::NAME,
                format!("probabilities sum to {total}, not 1"),
            ));
        }
        let log_probabilities = probabilities.iter().map(|p| p.ln()).collect();
        Ok(Self {
            probabilities,
            log_probabilities,
        })
    }

    pub fn probabilities(&self) -> &[T] {
        &self.probabilities
    }

    pub fn categories(&self) -> usize {
        self.probabilities.len()
    }
}

impl<T: Real> MarginalModel<T> for SimpleCategorical<T> {
    type Stats = CountStats;

    fn kind_name(&self) -> &'static str {
        Self::NAME
    }

    fn empty_stats(&self) -> CountStats {
        CountStats::new(self.categories())
    }

    fn check_datum(&self, datum: &Datum<T>) -> std::result::Result<(), DatumRejection> {
        check_label(datum, self.categories())
    }

    fn observe(&self, stats: &mut CountStats, datum: &Datum<T>) {
        stats.observe(datum.label().expect("checked datum"));
    }

    fn forget(&self, stats: &mut CountStats, datum: &Datum<T>) {
        stats.forget(datum.label().expect("checked datum"));
    }

    fn log_marginal_stats(&self, stats: &CountStats) -> T {
        stats
            .counts
            .iter()
            .zip(&self.log_probabilities)
            .filter(|(&c, _)| c > 0)
            .fold(T::zero(), |acc, (&c, &lp)| acc + T::from_count(c) * lp)
    }

    fn is_discrete(&self) -> bool {
        true
    }
}

/// I.i.d. normal data with known mean and standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimpleGaussian<T> {
    mean: T,
    std_dev: T,
    log_norm: T,
    inv_two_var: T,
}

impl<T: Real> SimpleGaussian<T> {
    const NAME: &'static str = "simple_gaussian";

    pub fn new(mean: T, std_dev: T) -> Result<Self> {
        let mean = finite(Self::NAME, "mean", mean)?;
        let std_dev = positive_finite(Self::NAME, "std_dev", std_dev)?;
        let half_ln_two_pi = T::lit(0.5) * (T::lit(2.0) * T::PI()).ln();
        Ok(Self {
            mean,
            std_dev,
            log_norm: -(std_dev.ln() + half_ln_two_pi),
            inv_two_var: T::one() / (T::lit(2.0) * std_dev * std_dev),
        })
    }

    pub fn mean(&self) -> T {
        self.mean
    }

    pub fn std_dev(&self) -> T {
        self.std_dev
    }
}

impl<T: Real> MarginalModel<T> for SimpleGaussian<T> {
    type Stats = GaussianStats<T>;

    fn kind_name(&self) -> &'static str {
        Self::NAME
    }

    fn empty_stats(&self) -> GaussianStats<T> {
        GaussianStats::default()
    }

    fn check_datum(&self, datum: &Datum<T>) -> std::result::Result<(), DatumRejection> {
        check_real(datum)
    }

    fn observe(&self, stats: &mut GaussianStats<T>, datum: &Datum<T>) {
        stats.observe(datum.real().expect("checked datum") - self.mean);
    }

    fn forget(&self, stats: &mut GaussianStats<T>, datum: &Datum<T>) {
        stats.forget(datum.real().expect("checked datum") - self.mean);
    }

    fn log_marginal_stats(&self, stats: &GaussianStats<T>) -> T {
        T::from_count(stats.n) * self.log_norm - stats.sum_sq * self.inv_two_var
    }

    fn is_discrete(&self) -> bool {
        false
    }
}

/// Bernoulli data with a Beta(α, β) prior on the success probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaBernoulli<T> {
    alpha: T,
    beta: T,
    ln_beta_prior: T,
}

impl<T: Real> BetaBernoulli<T> {
    const NAME: &'static str = "beta_bernoulli";

    pub fn new(alpha: T, beta: T) -> Result<Self> {
        let alpha = positive_finite(Self::NAME, "alpha", alpha)?;
        let beta = positive_finite(Self::NAME, "beta", beta)?;
        Ok(Self {
            alpha,
            beta,
            ln_beta_prior: ln_beta(alpha, beta),
        })
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn beta(&self) -> T {
        self.beta
    }
}

impl<T: Real> MarginalModel<T> for BetaBernoulli<T> {
    type Stats = BernoulliStats;

    fn kind_name(&self) -> &'static str {
        Self::NAME
    }

    fn empty_stats(&self) -> BernoulliStats {
        BernoulliStats::default()
    }

    fn check_datum(&self, datum: &Datum<T>) -> std::result::Result<(), DatumRejection> {
        check_label(datum, 2)
    }

    fn observe(&self, stats: &mut BernoulliStats, datum: &Datum<T>) {
        stats.n += 1;
        stats.successes += u64::from(datum.label().expect("checked datum"));
    }

    fn forget(&self, stats: &mut BernoulliStats, datum: &Datum<T>) {
        stats.n -= 1;
        stats.successes -= u64::from(datum.label().expect("checked datum"));
    }

    fn log_marginal_stats(&self, stats: &BernoulliStats) -> T {
        if stats.n == 0 {
            return T::zero();
        }
        let s = T::from_count(stats.successes);
        let f = T::from_count(stats.n - stats.successes);
        ln_beta(self.alpha + s, self.beta + f) - self.ln_beta_prior
    }

    fn is_discrete(&self) -> bool {
        true
    }
}

/// Categorical data with a Dirichlet prior (Dirichlet-multinomial marginal
/// of an ordered sequence).
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletCategorical<T> {
    concentration: Vec<T>,
    total: T,
    ln_gamma_concentration: Vec<T>,
    ln_gamma_total: T,
}

impl<T: Real> DirichletCategorical<T> {
    const NAME: &'static str = "dirichlet_categorical";

    pub fn new(concentration: Vec<T>) -> Result<Self> {
        if concentration.is_empty() {
            return Err(invalid(Self::NAME, "concentration vector is empty"));
        }
        for &a in &concentration {
            positive_finite(Self::NAME, "concentration entry", a)?;
        }
        let total = concentration.iter().fold(T::zero(), |acc, &a| acc + a);
        Ok(Self {
            ln_gamma_concentration: concentration.iter().map(|&a| ln_gamma(a)).collect(),
            ln_gamma_total: ln_gamma(total),
            concentration,
            total,
        })
    }

    pub fn concentration(&self) -> &[T] {
        &self.concentration
    }

    pub fn categories(&self) -> usize {
        self.concentration.len()
    }
}

impl<T: Real> MarginalModel<T> for DirichletCategorical<T> {
    type Stats = CountStats;

    fn kind_name(&self) -> &'static str {
        Self::NAME
    }

    fn empty_stats(&self) -> CountStats {
        CountStats::new(self.categories())
    }

    fn check_datum(&self, datum: &Datum<T>) -> std::result::Result<(), DatumRejection> {
        check_label(datum, self.categories())
    }

    fn observe(&self, stats: &mut CountStats, datum: &Datum<T>) {
        stats.observe(datum.label().expect("checked datum"));
    }

    fn forget(&self, stats: &mut CountStats, datum: &Datum<T>) {
        stats.forget(datum.label().expect("checked datum"));
    }

    fn log_marginal_stats(&self, stats: &CountStats) -> T {
        if stats.n == 0 {
            return T::zero();
        }
        let mut acc = self.ln_gamma_total - ln_gamma(self.total + T::from_count(stats.n));
        for ((&c, &a), &lga) in stats
            .counts
            .iter()
            .zip(&self.concentration)
            .zip(&self.ln_gamma_concentration)
        {
            if c > 0 {
                acc = acc + ln_gamma(a + T::from_count(c)) - lga;
            }
        }
        acc
    }

    fn is_discrete(&self) -> bool {
        true
    }
}

/// Normal data with known variance σ² and a normal prior N(m, v) on the mean.
///
/// The marginal of `n` data is multivariate normal with covariance
/// `σ² I + v 1 1ᵀ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalKnownVariance<T> {
    variance: T,
    prior_mean: T,
    prior_variance: T,
}

impl<T: Real> NormalKnownVariance<T> {
    const NAME: &'static str = "normal_known_variance";

    pub fn new(variance: T, prior_mean: T, prior_variance: T) -> Result<Self> {
        Ok(Self {
            variance: positive_finite(Self::NAME, "variance", variance)?,
            prior_mean: finite(Self::NAME, "prior_mean", prior_mean)?,
            prior_variance: positive_finite(Self::NAME, "prior_variance", prior_variance)?,
        })
    }

    pub fn variance(&self) -> T {
        self.variance
    }

    pub fn prior_mean(&self) -> T {
        self.prior_mean
    }

    pub fn prior_variance(&self) -> T {
        self.prior_variance
    }
}

impl<T: Real> MarginalModel<T> for NormalKnownVariance<T> {
    type Stats = GaussianStats<T>;

    fn kind_name(&self) -> &'static str {
        Self::NAME
    }

    fn empty_stats(&self) -> GaussianStats<T> {
        GaussianStats::default()
    }

    fn check_datum(&self, datum: &Datum<T>) -> std::result::Result<(), DatumRejection> {
        check_real(datum)
    }

    fn observe(&self, stats: &mut GaussianStats<T>, datum: &Datum<T>) {
        stats.observe(datum.real().expect("checked datum") - self.prior_mean);
    }

    fn forget(&self, stats: &mut GaussianStats<T>, datum: &Datum<T>) {
        stats.forget(datum.real().expect("checked datum") - self.prior_mean);
    }

    fn log_marginal_stats(&self, stats: &GaussianStats<T>) -> T {
        if stats.n == 0 {
            return T::zero();
        }
        let n = T::from_count(stats.n);
        let s2 = self.variance;
        let v = self.prior_variance;
        let half = T::lit(0.5);
        let ln_two_pi_s2 = (T::lit(2.0) * T::PI() * s2).ln();
        let quad = (stats.sum_sq - v * stats.sum * stats.sum / (s2 + n * v)) / s2;
        -half * n * ln_two_pi_s2 - half * (n * v / s2).ln_1p() - half * quad
    }

    fn is_discrete(&self) -> bool {
        false
    }
}

/// Kind tag of a [`Model`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    SimpleCategorical,
    SimpleGaussian,
    BetaBernoulli,
    DirichletCategorical,
    NormalKnownVariance,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::SimpleCategorical,
        ModelKind::SimpleGaussian,
        ModelKind::BetaBernoulli,
        ModelKind::DirichletCategorical,
        ModelKind::NormalKnownVariance,
    ];

    /// Kinds whose predictives ignore the conditioning data.
    pub fn is_simple(self) -> bool {
        matches!(
            self,
            ModelKind::SimpleCategorical | ModelKind::SimpleGaussian
        )
    }

    pub fn data_kind(self) -> DatumKind {
        match self {
            ModelKind::SimpleGaussian | ModelKind::NormalKnownVariance => DatumKind::Real,
            _ => DatumKind::Categorical,
        }
    }
}

/// Any of the built-in models.
#[derive(Debug, Clone, PartialEq)]
pub enum Model<T> {
    SimpleCategorical(SimpleCategorical<T>),
    SimpleGaussian(SimpleGaussian<T>),
    BetaBernoulli(BetaBernoulli<T>),
    DirichletCategorical(DirichletCategorical<T>),
    NormalKnownVariance(NormalKnownVariance<T>),
}

/// Sufficient statistics of any built-in model.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyStats<T> {
    Counts(CountStats),
    Bernoulli(BernoulliStats),
    Gaussian(GaussianStats<T>),
}

impl<T: Real> Model<T> {
    pub fn kind(&self) -> ModelKind {
        match self {
            Model::SimpleCategorical(_) => ModelKind::SimpleCategorical,
            Model::SimpleGaussian(_) => ModelKind::SimpleGaussian,
            Model::BetaBernoulli(_) => ModelKind::BetaBernoulli,
            Model::DirichletCategorical(_) => ModelKind::DirichletCategorical,
            Model::NormalKnownVariance(_) => ModelKind::NormalKnownVariance,
        }
    }
}

macro_rules! dispatch {
    ($self:expr, $m:ident => $body:expr) => {
        match $self {
            Model::SimpleCategorical($m) => $body,
            Model::SimpleGaussian($m) => $body,
            Model::BetaBernoulli($m) => $body,
            Model::DirichletCategorical($m) => $body,
            Model::NormalKnownVariance($m) => $body,
        }
    };
}

impl<T: Real> MarginalModel<T> for Model<T> {
    type Stats = AnyStats<T>;

    fn kind_name(&self) -> &'static str {
        dispatch!(self, m => m.kind_name())
    }

    fn empty_stats(&self) -> AnyStats<T> {
        match self {
            Model::SimpleCategorical(m) => AnyStats::Counts(m.empty_stats()),
            Model::DirichletCategorical(m) => AnyStats::Counts(m.empty_stats()),
            Model::BetaBernoulli(m) => AnyStats::Bernoulli(m.empty_stats()),
            Model::SimpleGaussian(m) => AnyStats::Gaussian(m.empty_stats()),
            Model::NormalKnownVariance(m) => AnyStats::Gaussian(m.empty_stats()),
        }
    }

    fn check_datum(&self, datum: &Datum<T>) -> std::result::Result<(), DatumRejection> {
        dispatch!(self, m => m.check_datum(datum))
    }

    fn observe(&self, stats: &mut AnyStats<T>, datum: &Datum<T>) {
        match (self, stats) {
            (Model::SimpleCategorical(m), AnyStats::Counts(s)) => m.observe(s, datum),
            (Model::DirichletCategorical(m), AnyStats::Counts(s)) => m.observe(s, datum),
            (Model::BetaBernoulli(m), AnyStats::Bernoulli(s)) => m.observe(s, datum),
            (Model::SimpleGaussian(m), AnyStats::Gaussian(s)) => m.observe(s, datum),
            (Model::NormalKnownVariance(m), AnyStats::Gaussian(s)) => m.observe(s, datum),
            _ => panic!("statistics do not belong to this model"),
        }
    }

    fn forget(&self, stats: &mut AnyStats<T>, datum: &Datum<T>) {
        match (self, stats) {
            (Model::SimpleCategorical(m), AnyStats::Counts(s)) => m.forget(s, datum),
            (Model::DirichletCategorical(m), AnyStats::Counts(s)) => m.forget(s, datum),
            (Model::BetaBernoulli(m), AnyStats::Bernoulli(s)) => m.forget(s, datum),
            (Model::SimpleGaussian(m), AnyStats::Gaussian(s)) => m.forget(s, datum),
            (Model::NormalKnownVariance(m), AnyStats::Gaussian(s)) => m.forget(s, datum),
            _ => panic!("statistics do not belong to this model"),
        }
    }

    fn log_marginal_stats(&self, stats: &AnyStats<T>) -> T {
        match (self, stats) {
            (Model::SimpleCategorical(m), AnyStats::Counts(s)) => m.log_marginal_stats(s),
            (Model::DirichletCategorical(m), AnyStats::Counts(s)) => m.log_marginal_stats(s),
            (Model::BetaBernoulli(m), AnyStats::Bernoulli(s)) => m.log_marginal_stats(s),
            (Model::SimpleGaussian(m), AnyStats::Gaussian(s)) => m.log_marginal_stats(s),
            (Model::NormalKnownVariance(m), AnyStats::Gaussian(s)) => m.log_marginal_stats(s),
            _ => panic!("statistics do not belong to this model"),
        }
    }

    fn is_discrete(&self) -> bool {
        dispatch!(self, m => m.is_discrete())
    }
}

/// A named model.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis<T> {
    name: String,
    model: Model<T>,
}

impl<T: Real> Hypothesis<T> {
    pub fn new(name: impl Into<String>, model: Model<T>) -> Self {
        Self {
            name: name.into(),
            model,
        }
    }

    pub fn simple_categorical(name: impl Into<String>, probabilities: Vec<T>) -> Result<Self> {
        Ok(Self::new(
            name,
            Model::SimpleCategorical(SimpleCategorical::new(probabilities)?),
        ))
    }

    pub fn simple_gaussian(name: impl Into<String>, mean: T, std_dev: T) -> Result<Self> {
        Ok(Self::new(
            name,
            Model::SimpleGaussian(SimpleGaussian::new(mean, std_dev)?),
        ))
    }

    pub fn beta_bernoulli(name: impl Into<String>, alpha: T, beta: T) -> Result<Self> {
        Ok(Self::new(
            name,
            Model::BetaBernoulli(BetaBernoulli::new(alpha, beta)?),
        ))
    }

    pub fn dirichlet_categorical(name: impl Into<String>, concentration: Vec<T>) -> Result<Self> {
        Ok(Self::new(
            name,
            Model::DirichletCategorical(DirichletCategorical::new(concentration)?),
        ))
    }

    pub fn normal_known_variance(
        name: impl Into<String>,
        variance: T,
        prior_mean: T,
        prior_variance: T,
    ) -> Result<Self> {
        Ok(Self::new(
            name,
            Model::NormalKnownVariance(NormalKnownVariance::new(
                variance,
                prior_mean,
                prior_variance,
            )?),
        ))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn model(&self) -> &Model<T> {
        &self.model
    }

    pub fn kind(&self) -> ModelKind {
        self.model.kind()
    }

    /// Validates the whole dataset against this hypothesis.
    pub fn check(&self, data: &Dataset<T>) -> Result<()> {
        check_dataset(self, data)
    }
}

impl<T: Real> MarginalModel<T> for Hypothesis<T> {
    type Stats = AnyStats<T>;

    fn kind_name(&self) -> &'static str {
        self.model.kind_name()
    }
    fn name(&self) -> &str {
        &self.name
    }
    fn empty_stats(&self) -> AnyStats<T> {
        self.model.empty_stats()
    }
    fn check_datum(&self, datum: &Datum<T>) -> std::result::Result<(), DatumRejection> {
        self.model.check_datum(datum)
    }
    fn observe(&self, stats: &mut AnyStats<T>, datum: &Datum<T>) {
        self.model.observe(stats, datum)
    }
    fn forget(&self, stats: &mut AnyStats<T>, datum: &Datum<T>) {
        self.model.forget(stats, datum)
    }
    fn log_marginal_stats(&self, stats: &AnyStats<T>) -> T {
        self.model.log_marginal_stats(stats)
    }
    fn is_discrete(&self) -> bool {
        self.model.is_discrete()
    }
}

/// Wraps a model and counts closed-form marginal evaluations.
///
/// Instrumentation hook for checking the lattice's evaluation budget.
#[derive(Debug)]
pub struct CountingModel<M> {
    inner: M,
    evaluations: AtomicU64,
}

impl<M> CountingModel<M> {
    pub fn new(inner: M) -> Self {
        Self {
            inner,
            evaluations: AtomicU64::new(0),
        }
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.evaluations.store(0, Ordering::Relaxed);
    }

    pub fn inner(&self) -> &M {
        &self.inner
    }
}

impl<T: Real, M: MarginalModel<T>> MarginalModel<T> for CountingModel<M> {
    type Stats = M::Stats;

    fn kind_name(&self) -> &'static str {
        self.inner.kind_name()
    }
    fn name(&self) -> &str {
        self.inner.name()
    }
    fn empty_stats(&self) -> M::Stats {
        self.inner.empty_stats()
    }
    fn check_datum(&self, datum: &Datum<T>) -> std::result::Result<(), DatumRejection> {
        self.inner.check_datum(datum)
    }
    fn observe(&self, stats: &mut M::Stats, datum: &Datum<T>) {
        self.inner.observe(stats, datum)
    }
    fn forget(&self, stats: &mut M::Stats, datum: &Datum<T>) {
        self.inner.forget(stats, datum)
    }
    fn log_marginal_stats(&self, stats: &M::Stats) -> T {
        self.evaluations.fetch_add(1, Ordering::Relaxed);
        self.inner.log_marginal_stats(stats)
    }
    fn is_discrete(&self) -> bool {
        self.inner.is_discrete()
    }
}

fn check_subset<T: Real>(subset: SubsetMask, data: &Dataset<T>) -> Result<()> {
    SubsetMask::checked(subset.bits(), data.len()).map(|_| ())
}

/// `ln P(D_subset | H)`. The empty subset has log-probability 0.
pub fn log_marginal<T: Real, M: MarginalModel<T>>(
    model: &M,
    subset: SubsetMask,
    data: &Dataset<T>,
) -> Result<LogProb<T>> {
    check_subset(subset, data)?;
    let mut stats = model.empty_stats();
    for i in subset.indices() {
        let datum = &data[i];
        check_datum_at(model, datum, i)?;
        model.observe(&mut stats, datum);
    }
    if subset.is_empty() {
        return Ok(LogProb::certain());
    }
    LogProb::new(model.log_marginal_stats(&stats)).ok_or(Error::InvalidParameter {
        model: model.kind_name(),
        reason: "marginal evaluated to NaN".into(),
    })
}

fn check_datum_at<T: Real, M: MarginalModel<T> + ?Sized>(
    model: &M,
    datum: &Datum<T>,
    index: usize,
) -> Result<()> {
    model
        .check_datum(datum)
        .map_err(|rejection| match rejection {
            DatumRejection::Kind => Error::KindMismatch {
                hypothesis: model.name().to_owned(),
                model: model.kind_name(),
                kind: datum.kind(),
                index,
            },
            DatumRejection::Label { label, categories } => Error::LabelOutOfRange {
                index,
                label,
                categories,
            },
        })
}

/// `ln P(D_i | D_given, H)` as the difference of two subset marginals.
pub fn log_predictive<T: Real, M: MarginalModel<T>>(
    model: &M,
    index: usize,
    given: SubsetMask,
    data: &Dataset<T>,
) -> Result<LogProb<T>> {
    if index >= data.len() {
        return Err(Error::IndexOutOfRange {
            index,
            d: data.len(),
        });
    }
    if given.contains(index) {
        return Err(Error::DatumInConditioningSet { index });
    }
    let conditioning = log_marginal(model, given, data)?;
    if conditioning.is_zero_probability() {
        return Err(Error::ZeroProbabilityConditioning { bits: given.bits() });
    }
    let joint = log_marginal(model, given.with(index), data)?;
    Ok(LogProb::new(joint.value() - conditioning.value()).expect("finite conditioning"))
}
