//! Subset-lattice engine.
//!
//! Caches `ln P(D_A | H)` for every subset `A` of the data, then derives
//! leave-one-out and leave-m-out log-scores and the two per-cardinality
//! decompositions of the log-likelihood:
//!
//! ```text
//! ln P(D | H) = Σ_{k=1..d} C(d,k)⁻¹ Σ_{|A|=k} (1/k) Σ_{i∈A} ln P(D_i | D_{A∖i}, H)
//!             = (1/d) Σ_j Σ_{k=0..d-1} C(d-1,k)⁻¹ Σ_{S⊆D∖j, |S|=k} ln P(D_j | D_S, H)
//! ```
//!
//! All averages are accumulated with compensated summation in ascending mask
//! order, then ascending datum index, so results do not depend on the
//! number of worker threads.

use std::num::NonZeroUsize;

use rayon::prelude::*;
use serde::Serialize;

use crate::data::{combinations, Dataset, Datum, SubsetMask};
use crate::error::{Error, Result};
use crate::models::{check_dataset, MarginalModel};
use crate::num::{binomial, KahanSum, Real};

/// Default cap on the dataset size (2^20 cached entries).
pub const DEFAULT_D_MAX: usize = 20;
/// Largest cap accepted by [`LatticeOptions::with_d_max`].
pub const HARD_D_MAX: usize = 26;

/// Blocks smaller than this are filled on the current thread.
const PARALLEL_BLOCK: usize = 1 << 12;

/// Capacity and parallelism settings for lattice construction and scoring.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatticeOptions {
    d_max: usize,
    threads: NonZeroUsize,
}

impl Default for LatticeOptions {
    fn default() -> Self {
        Self {
            d_max: DEFAULT_D_MAX,
            threads: NonZeroUsize::MIN,
        }
    }
}

impl LatticeOptions {
    pub fn with_d_max(mut self, d_max: usize) -> Result<Self> {
        if d_max > HARD_D_MAX {
            return Err(Error::CapacityLimit {
                requested: d_max,
                limit: HARD_D_MAX,
            });
        }
        self.d_max = d_max;
        Ok(self)
    }

    pub fn with_threads(mut self, threads: NonZeroUsize) -> Self {
        self.threads = threads;
        self
    }

    pub fn d_max(&self) -> usize {
        self.d_max
    }

    pub fn threads(&self) -> NonZeroUsize {
        self.threads
    }

    fn run<R: Send>(&self, job: impl FnOnce() -> R + Send) -> Result<R> {
        if self.threads.get() == 1 {
            return Ok(job());
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.threads.get())
            .build()
            .map_err(|e| Error::ThreadPool(e.to_string()))?;
        Ok(pool.install(job))
    }
}

/// `ln P(D_A | H)` for all `2^d` subsets `A`, indexed by mask.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalCache<T> {
    d: usize,
    table: Vec<T>,
    evaluations: u64,
    discrete: bool,
    options: LatticeOptions,
}

impl<T: Real> MarginalCache<T> {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn get(&self, mask: SubsetMask) -> T {
        self.table[mask.index()]
    }

    pub fn table(&self) -> &[T] {
        &self.table
    }

    /// Log-likelihood of the whole dataset.
    pub fn direct(&self) -> T {
        self.table[self.table.len() - 1]
    }

    /// Closed-form marginal evaluations spent building the cache (`2^d − 1`).
    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    /// Whether entries are probabilities (true) or densities.
    pub fn is_discrete(&self) -> bool {
        self.discrete
    }

    pub fn options(&self) -> &LatticeOptions {
        &self.options
    }

    fn full(&self) -> SubsetMask {
        SubsetMask::full(self.d)
    }

    fn conditioning(&self, mask: SubsetMask) -> Result<T> {
        let value = self.get(mask);
        if value == T::neg_infinity() {
            Err(Error::ZeroProbabilityConditioning { bits: mask.bits() })
        } else {
            Ok(value)
        }
    }

    /// Mean over `i ∈ A` (ascending) of `ln P(D_i | D_{A∖i})`.
    fn subset_loo(&self, mask: SubsetMask) -> Result<T> {
        let joint = self.get(mask);
        let mut acc = KahanSum::new();
        for i in mask.indices() {
            acc.add(joint - self.conditioning(mask.without(i))?);
        }
        Ok(acc.mean())
    }
}

/// Builds the full marginal cache.
///
/// Every non-empty subset is reached from a parent subset by adding one
/// datum, so each entry costs one statistics update and one closed-form
/// evaluation. Masks are filled in blocks `[base + 2^k, base + 2^(k+1))`
/// whose members all extend `base ∪ {k}`; blocks are independent and may be
/// filled concurrently without changing any value.
pub fn build_cache<T: Real, M: MarginalModel<T>>(
    model: &M,
    data: &Dataset<T>,
    options: &LatticeOptions,
) -> Result<MarginalCache<T>> {
    let d = data.len();
    if d > options.d_max {
        return Err(Error::DatasetTooLarge {
            d,
            d_max: options.d_max,
        });
    }
    check_dataset(model, data)?;

    let mut table = vec![T::zero(); 1usize << d];
    let parallel = options.threads.get() > 1;
    let evaluations = options.run(|| {
        let empty = model.empty_stats();
        fill_block(model, data.data(), &mut table, &empty, parallel)
    })?;
    debug_assert_eq!(evaluations, (1u64 << d) - 1);

    Ok(MarginalCache {
        d,
        table,
        evaluations,
        discrete: model.is_discrete(),
        options: *options,
    })
}

/// `block[0]` already holds the entry for the statistics `stats`; fills the
/// remaining `2^b − 1` entries and returns the number of evaluations.
fn fill_block<T: Real, M: MarginalModel<T>>(
    model: &M,
    data: &[Datum<T>],
    block: &mut [T],
    stats: &M::Stats,
    parallel: bool,
) -> u64 {
    let len = block.len();
    let levels = len.trailing_zeros() as usize;
    let (_, mut rest) = block.split_at_mut(1);
    let mut jobs = Vec::with_capacity(levels);
    for k in 0..levels {
        let (head, tail) = rest.split_at_mut(1 << k);
        jobs.push((k, head));
        rest = tail;
    }
    let run = |(k, sub): (usize, &mut [T])| {
        let mut extended = stats.clone();
        model.observe(&mut extended, &data[k]);
        sub[0] = model.log_marginal_stats(&extended);
        1 + fill_block(model, data, sub, &extended, parallel)
    };
    if parallel && len >= PARALLEL_BLOCK {
        jobs.into_par_iter().map(run).sum()
    } else {
        jobs.into_iter().map(run).sum()
    }
}

/// How a cross-validation score partitions the data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum CvScheme {
    /// Every held-out subset of size `m`.
    LeaveMOutExhaustive { m: usize },
    /// User-supplied disjoint folds.
    KFoldPartition { folds: usize },
}

/// Average held-out log-predictive per datum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CvScore<T: Real> {
    #[serde(flatten)]
    pub scheme: CvScheme,
    #[serde(with = "crate::num::serde_real")]
    pub value: T,
}

impl<T: Real> CvScore<T> {
    /// Leave-out size for the exhaustive scheme.
    pub fn m(&self) -> Option<usize> {
        match self.scheme {
            CvScheme::LeaveMOutExhaustive { m } => Some(m),
            CvScheme::KFoldPartition { .. } => None,
        }
    }
}

/// Leave-one-out log-score `(1/d) Σ_i ln P(D_i | D_{-i})`.
pub fn loo_score<T: Real>(cache: &MarginalCache<T>) -> Result<CvScore<T>> {
    if cache.d < 2 {
        return Err(Error::TooFewData {
            needed: 2,
            d: cache.d,
        });
    }
    Ok(CvScore {
        scheme: CvScheme::LeaveMOutExhaustive { m: 1 },
        value: cache.subset_loo(cache.full())?,
    })
}

/// Mean over all `C(d, m)` held-out sets `T` of `ln P(D_T | D_{-T}) / m`.
pub fn leave_m_out_score<T: Real>(cache: &MarginalCache<T>, m: usize) -> Result<CvScore<T>> {
    let max = cache.d.saturating_sub(1);
    if m == 0 || m > max {
        return Err(Error::LeaveOutOfRange { m, max });
    }
    let full = cache.full();
    let joint = cache.get(full);
    let per_datum = T::from_count(m as u64);
    let mut acc = KahanSum::new();
    for held_out in combinations(cache.d, m) {
        let rest = cache.conditioning(full.difference(held_out))?;
        acc.add((joint - rest) / per_datum);
    }
    Ok(CvScore {
        scheme: CvScheme::LeaveMOutExhaustive { m },
        value: acc.mean(),
    })
}

/// Mean over folds (ascending fold id) of the per-datum held-out
/// log-predictive. `folds[i]` is the fold of datum `i`; ids must cover
/// `0..K` with `K >= 2` and no empty fold.
///
/// No identity with the log-likelihood is claimed for this scheme.
pub fn kfold_score<T: Real>(cache: &MarginalCache<T>, folds: &[usize]) -> Result<CvScore<T>> {
    if folds.len() != cache.d {
        return Err(Error::InvalidFolds(format!(
            "{} assignments for {} data",
            folds.len(),
            cache.d
        )));
    }
    let k = folds.iter().max().map_or(0, |&f| f + 1);
    if k < 2 {
        return Err(Error::InvalidFolds("need at least 2 folds".into()));
    }
    let mut masks = vec![SubsetMask::EMPTY; k];
    for (i, &f) in folds.iter().enumerate() {
        masks[f] = masks[f].with(i);
    }
    if let Some(empty) = masks.iter().position(|m| m.is_empty()) {
        return Err(Error::InvalidFolds(format!("fold {empty} is empty")));
    }
    let full = cache.full();
    let joint = cache.get(full);
    let mut acc = KahanSum::new();
    for fold in masks {
        let rest = cache.conditioning(full.difference(fold))?;
        acc.add((joint - rest) / T::from_count(fold.cardinality() as u64));
    }
    Ok(CvScore {
        scheme: CvScheme::KFoldPartition { folds: k },
        value: acc.mean(),
    })
}

/// Which rearrangement of the identity a table holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecompositionForm {
    /// Row `k` (1..=d): average LOO score over subsets of size `k`.
    PerCardinality,
    /// Row `k` (0..d-1): average predictive of each datum given `k` others.
    PerDatum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecompositionRow<T: Real> {
    pub k: usize,
    /// Subsets averaged in this row (per datum for the per-datum form).
    #[serde(rename = "count")]
    pub subsets_count: u64,
    #[serde(with = "crate::num::serde_real")]
    pub score: T,
    #[serde(with = "crate::num::serde_real")]
    pub cumulative: T,
}

/// Averaged log-scores whose sum reconstructs the log-likelihood.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionTable<T: Real> {
    pub form: DecompositionForm,
    pub rows: Vec<DecompositionRow<T>>,
    #[serde(with = "crate::num::serde_real")]
    pub reconstructed: T,
    #[serde(with = "crate::num::serde_real")]
    pub direct: T,
    #[serde(with = "crate::num::serde_real")]
    pub residual: T,
}

impl<T: Real> DecompositionTable<T> {
    fn assemble(form: DecompositionForm, scores: Vec<(usize, u64, T)>, direct: T) -> Self {
        let mut cumulative = T::zero();
        let rows: Vec<_> = scores
            .into_iter()
            .map(|(k, subsets_count, score)| {
                cumulative = cumulative + score;
                DecompositionRow {
                    k,
                    subsets_count,
                    score,
                    cumulative,
                }
            })
            .collect();
        let reconstructed = cumulative;
        // Both sides -inf (a zero-probability datum with d = 1) agree exactly.
        let residual = if reconstructed == direct {
            T::zero()
        } else {
            reconstructed - direct
        };
        Self {
            form,
            rows,
            reconstructed,
            direct,
            residual,
        }
    }

    pub fn scores(&self) -> impl Iterator<Item = T> + '_ {
        self.rows.iter().map(|r| r.score)
    }

    pub fn within(&self, tolerance: T) -> bool {
        self.residual.abs() <= tolerance
    }
}

/// Per-cardinality averaged LOO scores `S_1 ..= S_d`.
pub fn per_cardinality_scores<T: Real>(cache: &MarginalCache<T>) -> Result<DecompositionTable<T>> {
    let d = cache.d;
    let row = |k: usize| -> Result<(usize, u64, T)> {
        let mut acc = KahanSum::new();
        for mask in combinations(d, k) {
            acc.add(cache.subset_loo(mask)?);
        }
        Ok((k, binomial(d, k), acc.mean()))
    };
    let rows = cache.options.run(|| -> Result<Vec<_>> {
        if cache.options.threads.get() > 1 {
            (1..=d).into_par_iter().map(row).collect()
        } else {
            (1..=d).map(row).collect()
        }
    })??;
    Ok(DecompositionTable::assemble(
        DecompositionForm::PerCardinality,
        rows,
        cache.direct(),
    ))
}

/// Per-datum rearrangement: row `k` is `(1/d) Σ_j C(d-1,k)⁻¹ Σ_{|S|=k, j∉S} ln P(D_j | D_S)`.
pub fn per_datum_decomposition<T: Real>(cache: &MarginalCache<T>) -> Result<DecompositionTable<T>> {
    let d = cache.d;
    let row = |k: usize| -> Result<(usize, u64, T)> {
        let mut over_data = KahanSum::new();
        for j in 0..d {
            let low = (1u64 << j) - 1;
            let mut over_subsets = KahanSum::new();
            for others in combinations(d - 1, k) {
                // spread a (d-1)-bit combination around position j
                let bits = others.bits();
                let given = SubsetMask::from_bits((bits & low) | ((bits & !low) << 1));
                let conditioning = cache.conditioning(given)?;
                over_subsets.add(cache.get(given.with(j)) - conditioning);
            }
            over_data.add(over_subsets.mean());
        }
        Ok((k, binomial(d - 1, k), over_data.mean()))
    };
    let rows = cache.options.run(|| -> Result<Vec<_>> {
        if cache.options.threads.get() > 1 {
            (0..d).into_par_iter().map(row).collect()
        } else {
            (0..d).map(row).collect()
        }
    })??;
    Ok(DecompositionTable::assemble(
        DecompositionForm::PerDatum,
        rows,
        cache.direct(),
    ))
}

/// Outcome of checking both decompositions against the direct log-likelihood.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verification<T: Real> {
    pub pass: bool,
    #[serde(with = "crate::num::serde_real")]
    pub tolerance: T,
    #[serde(with = "crate::num::serde_real")]
    pub direct: T,
    pub evaluations: u64,
    pub per_cardinality: DecompositionTable<T>,
    pub per_datum: DecompositionTable<T>,
}

impl<T: Real> Verification<T> {
    pub fn per_cardinality_residual(&self) -> T {
        self.per_cardinality.residual
    }

    pub fn per_datum_residual(&self) -> T {
        self.per_datum.residual
    }
}

/// Builds the cache, runs both decompositions, and passes iff both absolute
/// residuals are within `tolerance`.
pub fn verify_identity<T: Real, M: MarginalModel<T>>(
    model: &M,
    data: &Dataset<T>,
    tolerance: T,
    options: &LatticeOptions,
) -> Result<Verification<T>> {
    if !(tolerance.is_finite() && tolerance > T::zero()) {
        return Err(Error::InvalidTolerance(
            tolerance.to_f64().unwrap_or(f64::NAN),
        ));
    }
    let cache = build_cache(model, data, options)?;
    verify_cache(&cache, tolerance)
}

/// [`verify_identity`] on an existing cache.
pub fn verify_cache<T: Real>(cache: &MarginalCache<T>, tolerance: T) -> Result<Verification<T>> {
    let per_cardinality = per_cardinality_scores(cache)?;
    let per_datum = per_datum_decomposition(cache)?;
    Ok(Verification {
        pass: per_cardinality.within(tolerance) && per_datum.within(tolerance),
        tolerance,
        direct: cache.direct(),
        evaluations: cache.evaluations(),
        per_cardinality,
        per_datum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Hypothesis;

    fn ln(x: f64) -> f64 {
        x.ln()
    }

    fn worked() -> (Hypothesis<f64>, Dataset<f64>) {
        (
            Hypothesis::beta_bernoulli("bb", 1.0, 1.0).unwrap(),
            Dataset::categorical(&[1, 0, 1]).unwrap(),
        )
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn worked_cache_entries() {
        let (h, data) = worked();
        let cache = build_cache(&h, &data, &LatticeOptions::default()).unwrap();
        // Direct Beta-function values: one success 1/2, one failure 1/2,
        // success+failure B(2,2)/B(1,1) = 1/6, two successes B(3,1) = 1/3.
        let want = [
            (0b000, 0.0),
            (0b001, ln(0.5)),
            (0b010, ln(0.5)),
            (0b100, ln(0.5)),
            (0b011, ln(1.0 / 6.0)),
            (0b110, ln(1.0 / 6.0)),
            (0b101, ln(1.0 / 3.0)),
            (0b111, ln(1.0 / 12.0)),
        ];
        for (bits, value) in want {
            let got = cache.get(SubsetMask::from_bits(bits));
            assert!(
                close(got, value, 1e-14),
                "mask {bits:03b}: {got} vs {value}"
            );
        }
        assert_eq!(cache.evaluations(), 7);
    }

    #[test]
    fn smallest_lattice() {
        let h = Hypothesis::beta_bernoulli("bb", 2.0, 3.0).unwrap();
        let data = Dataset::categorical(&[1]).unwrap();
        let cache = build_cache(&h, &data, &LatticeOptions::default()).unwrap();
        assert_eq!(cache.table().len(), 2);
        assert_eq!(cache.get(SubsetMask::EMPTY), 0.0);
        assert!(close(cache.direct(), ln(0.4), 1e-14));
    }

    #[test]
    fn simple_categorical_cache_factorizes() {
        let p = [0.1, 0.6, 0.3];
        let h = Hypothesis::simple_categorical("c", p.to_vec()).unwrap();
        let labels = [2, 0, 1, 1, 2];
        let data = Dataset::categorical(&labels).unwrap();
        let cache = build_cache(&h, &data, &LatticeOptions::default()).unwrap();
        for bits in 0..32u64 {
            let mask = SubsetMask::from_bits(bits);
            let want: f64 = mask.indices().map(|i| ln(p[labels[i] as usize])).sum();
            assert!(close(cache.get(mask), want, 1e-14));
        }
    }

    #[test]
    fn capacity_is_enforced() {
        let h = Hypothesis::beta_bernoulli("bb", 1.0, 1.0).unwrap();
        let data = Dataset::categorical(&[1; 5]).unwrap();
        let opts = LatticeOptions::default().with_d_max(4).unwrap();
        assert_eq!(
            build_cache(&h, &data, &opts),
            Err(Error::DatasetTooLarge { d: 5, d_max: 4 })
        );
        assert_eq!(
            LatticeOptions::default().with_d_max(27),
            Err(Error::CapacityLimit {
                requested: 27,
                limit: HARD_D_MAX
            })
        );
    }

    #[test]
    fn worked_loo_and_leave_m_out() {
        let (h, data) = worked();
        let cache = build_cache(&h, &data, &LatticeOptions::default()).unwrap();
        let loo = loo_score(&cache).unwrap();
        assert!(close(loo.value, -(4.0 / 3.0) * ln(2.0), 1e-14));
        assert_eq!(loo.m(), Some(1));
        assert_eq!(leave_m_out_score(&cache, 1).unwrap().value, loo.value);
        // Held-out pairs leave a singleton: each term ln(1/6)/2.
        let pairs: f64 = [0b110u64, 0b101, 0b011]
            .iter()
            .map(|&t| (cache.direct() - cache.get(SubsetMask::from_bits(0b111 & !t))) / 2.0)
            .sum::<f64>()
            / 3.0;
        let m2 = leave_m_out_score(&cache, 2).unwrap();
        assert!(close(m2.value, pairs, 1e-15));
        assert!(close(m2.value, ln(1.0 / 6.0) / 2.0, 1e-14));
        assert_eq!(
            leave_m_out_score(&cache, 3),
            Err(Error::LeaveOutOfRange { m: 3, max: 2 })
        );
        assert_eq!(
            leave_m_out_score(&cache, 0),
            Err(Error::LeaveOutOfRange { m: 0, max: 2 })
        );
    }

    #[test]
    fn loo_needs_two_data() {
        let h = Hypothesis::beta_bernoulli("bb", 1.0, 1.0).unwrap();
        let data = Dataset::categorical(&[1]).unwrap();
        let cache = build_cache(&h, &data, &LatticeOptions::default()).unwrap();
        assert_eq!(
            loo_score(&cache),
            Err(Error::TooFewData { needed: 2, d: 1 })
        );
    }

    #[test]
    fn loo_at_two_is_the_pair_average() {
        let h = Hypothesis::dirichlet_categorical("d", vec![0.7, 1.3, 2.0]).unwrap();
        let data = Dataset::categorical(&[2, 0]).unwrap();
        let cache = build_cache(&h, &data, &LatticeOptions::default()).unwrap();
        let x_given_y = cache.direct() - cache.get(SubsetMask::from_bits(0b10));
        let y_given_x = cache.direct() - cache.get(SubsetMask::from_bits(0b01));
        let loo = loo_score(&cache).unwrap().value;
        assert!(close(loo, 0.5 * (x_given_y + y_given_x), 1e-15));
        assert_eq!(leave_m_out_score(&cache, 1).unwrap().value, loo);
    }

    #[test]
    fn worked_tables() {
        let (h, data) = worked();
        let cache = build_cache(&h, &data, &LatticeOptions::default()).unwrap();
        let table = per_cardinality_scores(&cache).unwrap();
        let want = [ln(0.5), ln(2.0 / 27.0) / 3.0, -(4.0 / 3.0) * ln(2.0)];
        for (row, w) in table.rows.iter().zip(want) {
            assert!(close(row.score, w, 1e-14), "k={}", row.k);
        }
        assert_eq!(
            table
                .rows
                .iter()
                .map(|r| r.subsets_count)
                .collect::<Vec<_>>(),
            vec![3, 3, 1]
        );
        assert!(close(table.reconstructed, -ln(12.0), 1e-14));
        assert!(table.residual.abs() <= 1e-12);
        assert_eq!(table.rows[2].score, loo_score(&cache).unwrap().value);

        let alt = per_datum_decomposition(&cache).unwrap();
        assert_eq!(alt.rows[0].k, 0);
        assert!(close(alt.rows[0].score, ln(0.5), 1e-14));
        assert!(close(alt.reconstructed, table.reconstructed, 1e-12));
        assert_eq!(
            alt.rows.iter().map(|r| r.subsets_count).collect::<Vec<_>>(),
            vec![1, 2, 1]
        );
    }

    #[test]
    fn single_datum_identity() {
        let h = Hypothesis::simple_gaussian("g", 0.5, 2.0).unwrap();
        let data = Dataset::real(&[1.25]).unwrap();
        let v = verify_identity(&h, &data, 1e-12, &LatticeOptions::default()).unwrap();
        assert!(v.pass);
        assert_eq!(v.per_cardinality.residual, 0.0);
        assert_eq!(v.per_datum.residual, 0.0);
        assert_eq!(v.per_cardinality.rows.len(), 1);
        assert_eq!(v.per_cardinality.rows[0].score, v.direct);
    }

    #[test]
    fn zero_probability_conditioning_is_an_error() {
        let h = Hypothesis::simple_categorical("z", vec![1.0, 0.0]).unwrap();
        let data = Dataset::categorical(&[1, 0]).unwrap();
        let cache = build_cache(&h, &data, &LatticeOptions::default()).unwrap();
        assert_eq!(
            per_cardinality_scores(&cache),
            Err(Error::ZeroProbabilityConditioning { bits: 0b01 })
        );
        assert!(loo_score(&cache).is_err());

        // d = 1 with an impossible datum: both sides are -inf.
        let one = Dataset::categorical(&[1]).unwrap();
        let v = verify_identity(&h, &one, 1e-9, &LatticeOptions::default()).unwrap();
        assert!(v.pass);
        assert_eq!(v.direct, f64::NEG_INFINITY);
    }

    #[test]
    fn tolerance_validation() {
        let (h, data) = worked();
        for tol in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(matches!(
                verify_identity(&h, &data, tol, &LatticeOptions::default()),
                Err(Error::InvalidTolerance(_))
            ));
        }
    }

    #[test]
    fn kfold_partition() {
        let (h, data) = worked();
        let cache = build_cache(&h, &data, &LatticeOptions::default()).unwrap();
        let every_datum = kfold_score(&cache, &[0, 1, 2]).unwrap();
        assert_eq!(every_datum.scheme, CvScheme::KFoldPartition { folds: 3 });
        assert!(close(
            every_datum.value,
            loo_score(&cache).unwrap().value,
            1e-15
        ));

        let two = kfold_score(&cache, &[0, 0, 1]).unwrap();
        let fold0 = (cache.direct() - cache.get(SubsetMask::from_bits(0b100))) / 2.0;
        let fold1 = cache.direct() - cache.get(SubsetMask::from_bits(0b011));
        assert!(close(two.value, (fold0 + fold1) / 2.0, 1e-15));

        assert!(kfold_score(&cache, &[0, 0, 0]).is_err());
        assert!(kfold_score(&cache, &[0, 2, 2]).is_err());
        assert!(kfold_score(&cache, &[0, 1]).is_err());
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let h = Hypothesis::normal_known_variance("n", 0.8, 0.1, 1.7).unwrap();
        let values: Vec<f64> = (0..14)
            .map(|i| ((i * 37 % 11) as f64 - 5.0) / 3.0)
            .collect();
        let data = Dataset::real(&values).unwrap();
        let one = LatticeOptions::default();
        let four = one.with_threads(NonZeroUsize::new(4).unwrap());
        let a = verify_identity(&h, &data, 1e-9, &one).unwrap();
        let b = verify_identity(&h, &data, 1e-9, &four).unwrap();
        assert_eq!(a, b);
        let ca = build_cache(&h, &data, &one).unwrap();
        let cb = build_cache(&h, &data, &four).unwrap();
        assert_eq!(ca.table(), cb.table());
    }
}
