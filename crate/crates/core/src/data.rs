//! Datasets, subset masks and log-probability values.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::num::Real;

/// What a single datum holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DatumKind {
    Binary,
    Categorical,
    Real,
}

impl fmt::Display for DatumKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DatumKind::Binary => "binary",
            DatumKind::Categorical => "categorical",
            DatumKind::Real => "real",
        })
    }
}

/// One observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Datum<T> {
    Binary(bool),
    Categorical(u32),
    Real(T),
}

impl<T: Real> Datum<T> {
    pub fn kind(&self) -> DatumKind {
        match self {
            Datum::Binary(_) => DatumKind::Binary,
            Datum::Categorical(_) => DatumKind::Categorical,
            Datum::Real(_) => DatumKind::Real,
        }
    }

    /// Discrete label; binary outcomes map to 0 and 1.
    pub fn label(&self) -> Option<u32> {
        match *self {
            Datum::Binary(b) => Some(b as u32),
            Datum::Categorical(k) => Some(k),
            Datum::Real(_) => None,
        }
    }

    pub fn real(&self) -> Option<T> {
        match *self {
            Datum::Real(x) => Some(x),
            _ => None,
        }
    }
}

/// Ordered, non-empty list of exchangeable datums of one kind.
///
/// Indices are 0-based internally; bit `i` of a [`SubsetMask`] refers to
/// `data[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    data: Vec<Datum<T>>,
    kind: DatumKind,
}

impl<T: Real> Dataset<T> {
    pub fn new(data: Vec<Datum<T>>) -> Result<Self> {
        let first = data.first().ok_or(Error::EmptyDataset)?;
        let kind = first.kind();
        for (index, datum) in data.iter().enumerate() {
            if datum.kind() != kind {
                return Err(Error::MixedDatumKinds {
                    expected: kind,
                    found: datum.kind(),
                    index,
                });
            }
            if let Datum::Real(x) = datum {
                if !x.is_finite() {
                    return Err(Error::NonFiniteDatum { index });
                }
            }
        }
        Ok(Self { data, kind })
    }

    pub fn binary(values: &[bool]) -> Result<Self> {
        Self::new(values.iter().map(|&b| Datum::Binary(b)).collect())
    }

    pub fn categorical(labels: &[u32]) -> Result<Self> {
        Self::new(labels.iter().map(|&k| Datum::Categorical(k)).collect())
    }

    pub fn real(values: &[T]) -> Result<Self> {
        Self::new(values.iter().map(|&x| Datum::Real(x)).collect())
    }

    /// Number of data, `d`.
    pub fn len(&self) -> usize {
        self.data.len()
    }

    /// Always false; datasets are non-empty by construction.
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn kind(&self) -> DatumKind {
        self.kind
    }

    pub fn data(&self) -> &[Datum<T>] {
        &self.data
    }

    pub fn get(&self, index: usize) -> Option<&Datum<T>> {
        self.data.get(index)
    }

    pub fn full_mask(&self) -> SubsetMask {
        SubsetMask::full(self.len())
    }

    /// Dataset reordered so that new index `j` holds old index `order[j]`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        assert_eq!(order.len(), self.len(), "permutation length");
        Self {
            data: order.iter().map(|&i| self.data[i]).collect(),
            kind: self.kind,
        }
    }
}

impl<T> std::ops::Index<usize> for Dataset<T> {
    type Output = Datum<T>;
    fn index(&self, index: usize) -> &Datum<T> {
        &self.data[index]
    }
}

/// A subset of datum indices stored as a bit mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize)]
#[serde(transparent)]
pub struct SubsetMask(u64);

impl SubsetMask {
    pub const EMPTY: SubsetMask = SubsetMask(0);

    pub const fn from_bits(bits: u64) -> Self {
        SubsetMask(bits)
    }

    /// Mask checked against a dataset of size `d`.
    pub fn checked(bits: u64, d: usize) -> Result<Self> {
        let mask = SubsetMask(bits);
        if d < 64 && bits >> d != 0 {
            return Err(Error::SubsetOutOfRange { bits, d });
        }
        Ok(mask)
    }

    pub fn full(d: usize) -> Self {
        debug_assert!(d < 64);
        SubsetMask((1u64 << d) - 1)
    }

    pub fn singleton(index: usize) -> Self {
        SubsetMask(1u64 << index)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        SubsetMask(indices.into_iter().fold(0, |acc, i| acc | (1u64 << i)))
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    /// Number of included data.
    pub const fn cardinality(self) -> usize {
        self.0.count_ones() as usize
    }

    pub const fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub const fn contains(self, index: usize) -> bool {
        index < 64 && self.0 & (1u64 << index) != 0
    }

    #[must_use]
    pub const fn with(self, index: usize) -> Self {
        SubsetMask(self.0 | (1u64 << index))
    }

    #[must_use]
    pub const fn without(self, index: usize) -> Self {
        SubsetMask(self.0 & !(1u64 << index))
    }

    #[must_use]
    pub const fn difference(self, other: SubsetMask) -> Self {
        SubsetMask(self.0 & !other.0)
    }

    #[must_use]
    pub const fn union(self, other: SubsetMask) -> Self {
        SubsetMask(self.0 | other.0)
    }

    pub const fn is_subset_of(self, other: SubsetMask) -> bool {
        self.0 & !other.0 == 0
    }

    /// Highest index `i` with bit `i` set, plus one; 0 for the empty mask.
    pub const fn span(self) -> usize {
        64 - self.0.leading_zeros() as usize
    }

    /// Included indices in ascending order.
    pub fn indices(self) -> Indices {
        Indices(self.0)
    }

    pub(crate) fn index(self) -> usize {
        self.0 as usize
    }
}

/// Iterator over set bits, lowest first.
#[derive(Debug, Clone)]
pub struct Indices(u64);

impl Iterator for Indices {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Indices {}

/// All `k`-element subsets of `{0, .., n-1}` in ascending mask order.
pub fn combinations(n: usize, k: usize) -> Combinations {
    let next = if k > n {
        None
    } else {
        Some(if k == 0 { 0 } else { (1u64 << k) - 1 })
    };
    Combinations {
        next,
        limit: 1u64 << n,
    }
}

/// See [`combinations`].
#[derive(Debug, Clone)]
pub struct Combinations {
    next: Option<u64>,
    limit: u64,
}

impl Iterator for Combinations {
    type Item = SubsetMask;

    fn next(&mut self) -> Option<SubsetMask> {
        let x = self.next?;
        self.next = if x == 0 {
            None
        } else {
            // Gosper's hack: next larger integer with the same popcount.
            let c = x & x.wrapping_neg();
            let r = x + c;
            let n = (((r ^ x) >> 2) / c) | r;
            (n < self.limit).then_some(n)
        };
        Some(SubsetMask(x))
    }
}

/// Natural-log probability (or probability density for continuous data).
///
/// Probability zero is `-inf`. NaN is rejected at construction. Values are
/// `<= 0` for discrete data; log-densities may be positive.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct LogProb<T: Real>(#[serde(with = "crate::num::serde_real")] T);

impl<T: Real> LogProb<T> {
    pub fn new(value: T) -> Option<Self> {
        (!value.is_nan()).then_some(LogProb(value))
    }

    pub fn zero_probability() -> Self {
        LogProb(T::neg_infinity())
    }

    pub fn certain() -> Self {
        LogProb(T::zero())
    }

    pub fn value(self) -> T {
        self.0
    }

    pub fn is_zero_probability(self) -> bool {
        self.0 == T::neg_infinity()
    }

    pub fn probability(self) -> T {
        self.0.exp()
    }
}

/// A log probability ratio reported in decibels: `10 · log10(ratio)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct DecibelValue<T: Real>(#[serde(with = "crate::num::serde_real")] T);

impl<T: Real> DecibelValue<T> {
    /// From a natural-log ratio.
    pub fn from_log_ratio(log_ratio: T) -> Self {
        DecibelValue(log_ratio * Self::db_per_neper())
    }

    pub fn from_decibels(db: T) -> Self {
        DecibelValue(db)
    }

    pub fn decibels(self) -> T {
        self.0
    }

    /// Back to a natural-log ratio.
    pub fn log_ratio(self) -> T {
        self.0 / Self::db_per_neper()
    }

    fn db_per_neper() -> T {
        T::lit(10.0) / T::LN_10()
    }
}

impl<T: Real> fmt::Display for DecibelValue<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.4} dB", self.0)
    }
}
