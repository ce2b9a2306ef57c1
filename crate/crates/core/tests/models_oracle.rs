use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use subset_evidence::models::{log_marginal, log_predictive, MarginalModel, Model};
use subset_evidence::{Dataset, ModelKind, SubsetMask};
use subset_evidence_testkit as oracle;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[test]
fn conjugate_marginals_match_quadrature_and_summation() {
    let mut rng = rng(11);
    for case in 0..200 {
        let kind = [
            ModelKind::BetaBernoulli,
            ModelKind::DirichletCategorical,
            ModelKind::NormalKnownVariance,
        ][case % 3];
        let d = rng.gen_range(1..=6);
        let (h, data) = oracle::random_case(kind, d, &mut rng);
        let full: Vec<usize> = (0..d).collect();
        let got = log_marginal(&h, SubsetMask::full(d), &data)
            .unwrap()
            .value();

        // sequential posterior predictives (Pólya urn / conjugate updating)
        let chain = oracle::chain_log_marginal(&h, &data, &full);
        assert!(
            (got - chain).abs() <= 1e-8 * chain.abs().max(1.0),
            "case {case}"
        );

        let quad = match h.model() {
            Model::BetaBernoulli(m) if m.alpha() >= 0.5 && m.beta() >= 0.5 => {
                let s = data.data().iter().filter(|x| x.label() == Some(1)).count() as u64;
                Some(oracle::quadrature_beta_bernoulli(
                    m.alpha(),
                    m.beta(),
                    s,
                    d as u64 - s,
                ))
            }
            Model::NormalKnownVariance(m) => {
                let xs: Vec<f64> = data.data().iter().map(|x| x.real().unwrap()).collect();
                Some(oracle::quadrature_normal_known_variance(
                    m.variance(),
                    m.prior_mean(),
                    m.prior_variance(),
                    &xs,
                ))
            }
            _ => None,
        };
        if let Some(q) = quad {
            // relative accuracy of the probability is the absolute log error
            assert!(
                (got - q).abs() <= 1e-8,
                "case {case}: {got} vs quadrature {q}"
            );
        }
    }
}

#[test]
fn predictive_differences_match_closed_form_predictives() {
    let mut rng = rng(12);
    for kind in ModelKind::ALL {
        for _ in 0..40 {
            let d = rng.gen_range(2..=7);
            let (h, data) = oracle::random_case(kind, d, &mut rng);
            let i = rng.gen_range(0..d);
            let given = SubsetMask::from_bits(rng.gen_range(0..1u64 << d)).without(i);
            let got = log_predictive(&h, i, given, &data).unwrap().value();
            let want = oracle::predictive(&h, &data, i, &given.indices().collect::<Vec<_>>());
            assert!((got - want).abs() <= 1e-10, "{kind:?}: {got} vs {want}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // Summing log-predictives along any ordering of any subset gives its marginal.
    #[test]
    fn marginal_chain(seed in any::<u64>(), kind_ix in 0usize..5) {
        let mut rng = rng(seed);
        let kind = ModelKind::ALL[kind_ix];
        let d = rng.gen_range(1..=9);
        let (h, data) = oracle::random_case(kind, d, &mut rng);
        let mut subset: Vec<usize> = (0..d).filter(|_| rng.gen_bool(0.7)).collect();
        subset.shuffle(&mut rng);
        let mut given = SubsetMask::EMPTY;
        let mut total = 0.0;
        for &i in &subset {
            total += log_predictive(&h, i, given, &data).unwrap().value();
            given = given.with(i);
        }
        let direct = log_marginal(&h, given, &data).unwrap().value();
        prop_assert!((total - direct).abs() <= 1e-10, "{} vs {}", total, direct);
    }

    // Permuting the data permutes the subset marginals.
    #[test]
    fn exchangeability(seed in any::<u64>(), kind_ix in 0usize..5) {
        let mut rng = rng(seed);
        let kind = ModelKind::ALL[kind_ix];
        let d = rng.gen_range(1..=8);
        let (h, data) = oracle::random_case(kind, d, &mut rng);
        let mut order: Vec<usize> = (0..d).collect();
        order.shuffle(&mut rng);
        let permuted = data.permuted(&order);
        for bits in 0..1u64 << d {
            let mask = SubsetMask::from_bits(bits);
            // new index j holds old index order[j]
            let old = SubsetMask::from_indices(mask.indices().map(|j| order[j]));
            let a = log_marginal(&h, old, &data).unwrap().value();
            let b = log_marginal(&h, mask, &permuted).unwrap().value();
            if h.is_discrete() {
                // integer statistics: identical inputs to the closed form
                prop_assert_eq!(a, b);
            } else {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn stats_update_then_downdate(seed in any::<u64>(), kind_ix in 0usize..5) {
        let mut rng = rng(seed);
        let kind = ModelKind::ALL[kind_ix];
        let d = rng.gen_range(2..=10);
        let (h, data) = oracle::random_case(kind, d, &mut rng);
        let mut stats = h.empty_stats();
        for x in &data.data()[..d / 2] {
            h.observe(&mut stats, x);
        }
        let before = stats.clone();
        let before_lm = h.log_marginal_stats(&before);
        for x in &data.data()[d / 2..] {
            h.observe(&mut stats, x);
        }
        for x in data.data()[d / 2..].iter().rev() {
            h.forget(&mut stats, x);
        }
        let after_lm = h.log_marginal_stats(&stats);
        if h.is_discrete() {
            prop_assert_eq!(stats, before);
        } else {
            prop_assert!((after_lm - before_lm).abs() <= 1e-12 * before_lm.abs().max(1.0));
        }
    }
}

#[test]
fn simple_predictives_do_not_depend_on_conditioning() {
    let mut rng = rng(13);
    for kind in [ModelKind::SimpleCategorical, ModelKind::SimpleGaussian] {
        for _ in 0..50 {
            let d = rng.gen_range(2..=8);
            let (h, data) = oracle::random_case(kind, d, &mut rng);
            let i = rng.gen_range(0..d);
            let alone = log_predictive(&h, i, SubsetMask::EMPTY, &data)
                .unwrap()
                .value();
            for bits in 0..1u64 << d {
                let given = SubsetMask::from_bits(bits);
                if given.contains(i) {
                    continue;
                }
                let p = log_predictive(&h, i, given, &data).unwrap().value();
                assert!((p - alone).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn dataset_kinds_for_each_model() {
    let labels = Dataset::<f64>::categorical(&[0, 1, 1]).unwrap();
    let reals = Dataset::real(&[0.1, 0.2]).unwrap();
    let mut rng = rng(14);
    for kind in ModelKind::ALL {
        let (h, _) = oracle::random_case(kind, 2, &mut rng);
        let wrong = if kind.data_kind() == subset_evidence::DatumKind::Real {
            &labels
        } else {
            &reals
        };
        assert!(h.check(wrong).is_err(), "{kind:?}");
    }
}
