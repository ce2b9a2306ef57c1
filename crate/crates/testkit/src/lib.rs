//! Independent oracles and random case generators for tests.
//!
//! Nothing here touches the lattice engine or the marginal-difference path:
//! predictives come from textbook posterior-predictive rules, marginals from
//! sequential predictive products or numerical quadrature, and the
//! decompositions are enumerated term by term over index lists.

use rand::distributions::Distribution;
use rand::Rng;
use rand_distr::Normal;
use subset_evidence::{Dataset, Datum, Hypothesis, Model, ModelKind};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

fn ln_normal_pdf(x: f64, mean: f64, var: f64) -> f64 {
    -0.5 * (LN_2PI + var.ln()) - (x - mean).powi(2) / (2.0 * var)
}

fn label(d: &Datum<f64>) -> usize {
    match *d {
        Datum::Binary(b) => b as usize,
        Datum::Categorical(k) => k as usize,
        Datum::Real(_) => panic!("expected a discrete datum"),
    }
}

fn real(d: &Datum<f64>) -> f64 {
    match *d {
        Datum::Real(x) => x,
        _ => panic!("expected a real datum"),
    }
}

/// `ln P(D_i | D_given, H)` from the posterior-predictive rule of each kind.
pub fn predictive(h: &Hypothesis<f64>, data: &Dataset<f64>, i: usize, given: &[usize]) -> f64 {
    let x = &data[i];
    match h.model() {
        Model::SimpleCategorical(m) => m.probabilities()[label(x)].ln(),
        Model::SimpleGaussian(m) => ln_normal_pdf(real(x), m.mean(), m.std_dev().powi(2)),
        Model::BetaBernoulli(m) => {
            let n = given.len() as f64;
            let s = given.iter().filter(|&&j| label(&data[j]) == 1).count() as f64;
            let total = m.alpha() + m.beta() + n;
            if label(x) == 1 {
                ((m.alpha() + s) / total).ln()
            } else {
                ((m.beta() + n - s) / total).ln()
            }
        }
        Model::DirichletCategorical(m) => {
            let k = label(x);
            let c = given.iter().filter(|&&j| label(&data[j]) == k).count() as f64;
            let a: f64 = m.concentration().iter().sum();
            ((m.concentration()[k] + c) / (a + given.len() as f64)).ln()
        }
        Model::NormalKnownVariance(m) => {
            let precision = 1.0 / m.prior_variance() + given.len() as f64 / m.variance();
            let weighted: f64 = m.prior_mean() / m.prior_variance()
                + given.iter().map(|&j| real(&data[j])).sum::<f64>() / m.variance();
            let post_mean = weighted / precision;
            ln_normal_pdf(real(x), post_mean, m.variance() + 1.0 / precision)
        }
    }
}

/// Log marginal of `indices` as a sum of sequential predictives.
pub fn chain_log_marginal(h: &Hypothesis<f64>, data: &Dataset<f64>, indices: &[usize]) -> f64 {
    (0..indices.len())
        .map(|t| predictive(h, data, indices[t], &indices[..t]))
        .sum()
}

/// All `k`-element index lists of `items`, lexicographic.
pub fn index_subsets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    fn rec(
        items: &[usize],
        k: usize,
        start: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for pos in start..items.len() {
            cur.push(items[pos]);
            rec(items, k, pos + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(items, k, 0, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Term-by-term `S_k`, k = 1..=d: the LOO score of each size-k subset,
/// averaged over subsets of that size.
pub fn brute_force_per_cardinality(h: &Hypothesis<f64>, data: &Dataset<f64>) -> Vec<f64> {
    let all: Vec<usize> = (0..data.len()).collect();
    (1..=data.len())
        .map(|k| {
            let subsets = index_subsets(&all, k);
            let total: f64 = subsets
                .iter()
                .map(|a| {
                    let loo: f64 = a
                        .iter()
                        .map(|&i| {
                            let rest: Vec<usize> = a.iter().copied().filter(|&j| j != i).collect();
                            predictive(h, data, i, &rest)
                        })
                        .sum();
                    loo / k as f64
                })
                .sum();
            total / subsets.len() as f64
        })
        .collect()
}

/// Term-by-term per-datum rows, k = 0..d-1.
pub fn brute_force_per_datum(h: &Hypothesis<f64>, data: &Dataset<f64>) -> Vec<f64> {
    let d = data.len();
    (0..d)
        .map(|k| {
            let per_datum: f64 = (0..d)
                .map(|j| {
                    let others: Vec<usize> = (0..d).filter(|&i| i != j).collect();
                    let subsets = index_subsets(&others, k);
                    let s: f64 = subsets.iter().map(|s| predictive(h, data, j, s)).sum();
                    s / subsets.len() as f64
                })
                .sum();
            per_datum / d as f64
        })
        .collect()
}

/// `∫₀¹ p^(a−1) (1−p)^(b−1) dp` by tanh-sinh quadrature, in log space.
pub fn ln_beta_integral(a: f64, b: f64) -> f64 {
    let h = 1.0 / 128.0;
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut terms = Vec::new();
    let n = (5.0 / h) as i64;
    for k in -n..=n {
        let t = k as f64 * h;
        let u = half_pi * t.sinh();
        // x = 1/(1+e^{-2u}), 1-x = 1/(1+e^{2u})
        let ln_x = -(-2.0 * u).exp().ln_1p();
        let ln_1mx = -(2.0 * u).exp().ln_1p();
        // dx/dt = (π/2) cosh t · 2x(1−x)
        let ln_weight = (std::f64::consts::PI * t.cosh()).ln() + ln_x + ln_1mx;
        let term = (a - 1.0) * ln_x + (b - 1.0) * ln_1mx + ln_weight;
        if term.is_finite() {
            terms.push(term);
        }
    }
    ln_h_sum(&terms) + h.ln()
}

fn ln_h_sum(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// Beta-Bernoulli marginal of `successes`/`failures` by quadrature.
pub fn quadrature_beta_bernoulli(alpha: f64, beta: f64, successes: u64, failures: u64) -> f64 {
    ln_beta_integral(alpha + successes as f64, beta + failures as f64)
        - ln_beta_integral(alpha, beta)
}

/// Normal-known-variance marginal by composite Simpson integration over the
/// unknown mean.
pub fn quadrature_normal_known_variance(
    variance: f64,
    prior_mean: f64,
    prior_variance: f64,
    xs: &[f64],
) -> f64 {
    let log_integrand = |theta: f64| {
        ln_normal_pdf(theta, prior_mean, prior_variance)
            + xs.iter()
                .map(|&x| ln_normal_pdf(x, theta, variance))
                .sum::<f64>()
    };
    // Grid location only; the value comes from the quadrature.
    let precision = 1.0 / prior_variance + xs.len() as f64 / variance;
    let centre = (prior_mean / prior_variance + xs.iter().sum::<f64>() / variance) / precision;
    let half_width = 20.0 / precision.sqrt();
    let intervals = 4000usize;
    let step = 2.0 * half_width / intervals as f64;
    let terms: Vec<f64> = (0..=intervals)
        .map(|i| {
            let w = if i == 0 || i == intervals {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            log_integrand(centre - half_width + i as f64 * step) + f64::ln(w)
        })
        .collect();
    ln_h_sum(&terms) + (step / 3.0).ln()
}

/// Random hypothesis of `kind` paired with `d` data.
pub fn random_case<R: Rng>(
    kind: ModelKind,
    d: usize,
    rng: &mut R,
) -> (Hypothesis<f64>, Dataset<f64>) {
    match kind {
        ModelKind::SimpleCategorical => {
            let k = rng.gen_range(2..=4);
            let probs = random_simplex(k, rng);
            let labels: Vec<u32> = (0..d).map(|_| sample_categorical(&probs, rng)).collect();
            (
                Hypothesis::simple_categorical("simple_categorical", probs).unwrap(),
                Dataset::categorical(&labels).unwrap(),
            )
        }
        ModelKind::SimpleGaussian => {
            let mean = rng.gen_range(-2.0..2.0);
            let sd = rng.gen_range(0.5..2.0);
            let truth = Normal::new(mean + rng.gen_range(-1.0..1.0), sd).unwrap();
            let xs: Vec<f64> = (0..d).map(|_| truth.sample(rng)).collect();
            (
                Hypothesis::simple_gaussian("simple_gaussian", mean, sd).unwrap(),
                Dataset::real(&xs).unwrap(),
            )
        }
        ModelKind::BetaBernoulli => {
            let alpha = rng.gen_range(0.2..5.0);
            let beta = rng.gen_range(0.2..5.0);
            let p: f64 = rng.gen();
            let labels: Vec<u32> = (0..d).map(|_| u32::from(rng.gen_bool(p))).collect();
            (
                Hypothesis::beta_bernoulli("beta_bernoulli", alpha, beta).unwrap(),
                Dataset::categorical(&labels).unwrap(),
            )
        }
        ModelKind::DirichletCategorical => {
            let k = rng.gen_range(2..=4);
            let conc: Vec<f64> = (0..k).map(|_| rng.gen_range(0.2..5.0)).collect();
            let probs = random_simplex(k, rng);
            let labels: Vec<u32> = (0..d).map(|_| sample_categorical(&probs, rng)).collect();
            (
                Hypothesis::dirichlet_categorical("dirichlet_categorical", conc).unwrap(),
                Dataset::categorical(&labels).unwrap(),
            )
        }
        ModelKind::NormalKnownVariance => {
            let variance: f64 = rng.gen_range(0.25..4.0);
            let prior_mean = rng.gen_range(-2.0..2.0);
            let prior_variance = rng.gen_range(0.1..5.0);
            let truth =
                Normal::new(prior_mean + rng.gen_range(-2.0..2.0), variance.sqrt()).unwrap();
            let xs: Vec<f64> = (0..d).map(|_| truth.sample(rng)).collect();
            (
                Hypothesis::normal_known_variance(
                    "normal_known_variance",
                    variance,
                    prior_mean,
                    prior_variance,
                )
                .unwrap(),
                Dataset::real(&xs).unwrap(),
            )
        }
    }
}

/// Probabilities bounded away from zero, summing to one.
pub fn random_simplex<R: Rng>(k: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut p: Vec<f64> = raw.iter().map(|r| r / total).collect();
    // absorb rounding so the table sums to one within an ulp or two
    let rest: f64 = p[1..].iter().sum();
    p[0] = 1.0 - rest;
    p
}

pub fn sample_categorical<R: Rng>(probs: &[f64], rng: &mut R) -> u32 {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (k, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return k as u32;
        }
    }
    (probs.len() - 1) as u32
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_integral_closed_forms() {
        // B(1,1) = 1, B(2,2) = 1/6, B(3,1) = 1/3, B(1/2,1/2) = π
        assert!(ln_beta_integral(1.0, 1.0).abs() < 1e-12);
        assert!((ln_beta_integral(2.0, 2.0) - (1.0f64 / 6.0).ln()).abs() < 1e-12);
        assert!((ln_beta_integral(3.0, 1.0) - (1.0f64 / 3.0).ln()).abs() < 1e-12);
        assert!((ln_beta_integral(0.5, 0.5) - std::f64::consts::PI.ln()).abs() < 1e-10);
    }

    #[test]
    fn normal_quadrature_single_datum() {
        let got = quadrature_normal_known_variance(2.0, 1.0, 3.0, &[0.25]);
        let want = ln_normal_pdf(0.25, 1.0, 5.0);
        assert!((got - want).abs() < 1e-12);
    }

    #[test]
    fn subsets_enumerated() {
        assert_eq!(
            index_subsets(&[0, 1, 2], 2),
            vec![vec![0, 1], vec![0, 2], vec![1, 2]]
        );
        assert_eq!(index_subsets(&[4, 7], 0), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn worked_brute_force() {
        let h = Hypothesis::beta_bernoulli("bb", 1.0, 1.0).unwrap();
        let data = Dataset::categorical(&[1, 0, 1]).unwrap();
        let s = brute_force_per_cardinality(&h, &data);
        assert!((s[0] - 0.5f64.ln()).abs() < 1e-15);
        assert!((s[1] - (2.0f64 / 27.0).ln() / 3.0).abs() < 1e-15);
        assert!((s[2] + 4.0 / 3.0 * 2f64.ln()).abs() < 1e-15);
        assert!((s.iter().sum::<f64>() + 12f64.ln()).abs() < 1e-14);
        let alt = brute_force_per_datum(&h, &data);
        for (a, b) in alt.iter().zip(&s) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
