//! Acceptance checks, one PASS/FAIL line each. Exits non-zero if any fails.

use std::alloc::{GlobalAlloc, Layout, System};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use subset_evidence::evidence::{
    nonrelative_from_log_likelihoods, posteriors_from_log_likelihoods, relative_bayes_factor,
    weight_of_evidence_db,
};
use subset_evidence::lattice::{build_cache, loo_score, per_cardinality_scores, verify_identity};
use subset_evidence::models::log_marginal;
use subset_evidence::{
    CountingModel, Dataset64, Hypothesis64, LatticeOptions, ModelKind, SubsetMask,
};
use subset_evidence_testkit as oracle;

struct Counting;

static LIVE: AtomicUsize = AtomicUsize::new(0);
static PEAK: AtomicUsize = AtomicUsize::new(0);

unsafe impl GlobalAlloc for Counting {
    unsafe fn alloc(&self, layout: Layout) -> *mut u8 {
        let p = System.alloc(layout);
        if !p.is_null() {
            let live = LIVE.fetch_add(layout.size(), Ordering::Relaxed) + layout.size();
            PEAK.fetch_max(live, Ordering::Relaxed);
        }
        p
    }

    unsafe fn dealloc(&self, ptr: *mut u8, layout: Layout) {
        System.dealloc(ptr, layout);
        LIVE.fetch_sub(layout.size(), Ordering::Relaxed);
    }
}

#[global_allocator]
static ALLOC: Counting = Counting;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn opts() -> LatticeOptions {
    LatticeOptions::default()
}

fn worked_example() -> Check {
    let h = Hypothesis64::beta_bernoulli("uniform", 1.0, 1.0).unwrap();
    let data = Dataset64::categorical(&[1, 0, 1]).unwrap();
    let start = Instant::now();
    let v = verify_identity(&h, &data, 1e-12, &opts()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let cache = build_cache(&h, &data, &opts()).map_err(|e| e.to_string())?;
    let loo = loo_score(&cache).map_err(|e| e.to_string())?.value;
    let ln2 = 2f64.ln();
    let want = [0.5f64.ln(), (2.0f64 / 27.0).ln() / 3.0, -4.0 / 3.0 * ln2];
    let rows_ok = v
        .per_cardinality
        .rows
        .iter()
        .zip(want)
        .all(|(r, w)| (r.score - w).abs() <= 1e-12);
    let ok = v.pass
        && rows_ok
        && (v.direct - (1.0f64 / 12.0).ln()).abs() <= 1e-12
        && (loo + 4.0 / 3.0 * ln2).abs() <= 1e-12
        && v.per_cardinality_residual().abs() <= 1e-12
        && v.per_datum_residual().abs() <= 1e-12
        && elapsed < Duration::from_millis(1);
    ensure(
        ok,
        format!(
            "residuals {:.1e}/{:.1e}, {:?}",
            v.per_cardinality_residual(),
            v.per_datum_residual(),
            elapsed
        ),
    )
}

fn identity_suite() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut failures = 0;
    for kind in ModelKind::ALL {
        for _ in 0..200 {
            let d = rng.gen_range(2..=12);
            let (h, data) = oracle::random_case(kind, d, &mut rng);
            let v = verify_identity(&h, &data, 1e-9, &opts()).map_err(|e| e.to_string())?;
            worst = worst
                .max(v.per_cardinality_residual().abs())
                .max(v.per_datum_residual().abs());
            failures += usize::from(!v.pass);
        }
    }
    let elapsed = start.elapsed();
    ensure(
        failures == 0 && worst <= 1e-9 && elapsed < Duration::from_secs(30),
        format!("1000 cases, worst residual {worst:.1e}, {failures} failures, {elapsed:?}"),
    )
}

fn brute_force() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let start = Instant::now();
    let mut worst = 0.0f64;
    for kind in ModelKind::ALL {
        for _ in 0..50 {
            let d = rng.gen_range(1..=6);
            let (h, data) = oracle::random_case(kind, d, &mut rng);
            let cache = build_cache(&h, &data, &opts()).map_err(|e| e.to_string())?;
            let table = per_cardinality_scores(&cache).map_err(|e| e.to_string())?;
            let want = oracle::brute_force_per_cardinality(&h, &data);
            for (row, w) in table.rows.iter().zip(&want) {
                worst = worst.max((row.score - w).abs());
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(
        worst <= 1e-10 && elapsed < Duration::from_secs(10),
        format!("250 cases, worst difference {worst:.1e}, {elapsed:?}"),
    )
}

fn flatness() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for case in 0..50 {
        let kind = [ModelKind::SimpleCategorical, ModelKind::SimpleGaussian][case % 2];
        let d = rng.gen_range(2..=12);
        let (h, data) = oracle::random_case(kind, d, &mut rng);
        let cache = build_cache(&h, &data, &opts()).map_err(|e| e.to_string())?;
        let table = per_cardinality_scores(&cache).map_err(|e| e.to_string())?;
        let first = table.rows[0].score;
        for r in &table.rows {
            worst = worst.max((r.score - first).abs());
        }
    }
    ensure(
        worst <= 1e-12,
        format!("50 cases, widest spread {worst:.1e}"),
    )
}

fn odds_route() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let d = rng.gen_range(1..=10);
        let labels: Vec<u32> = (0..d).map(|_| rng.gen_range(0..2)).collect();
        let data = Dataset64::categorical(&labels).unwrap();
        let p = rng.gen_range(0.05..0.95);
        let set = [
            Hypothesis64::beta_bernoulli("a", rng.gen_range(0.2..5.0), rng.gen_range(0.2..5.0))
                .unwrap(),
            Hypothesis64::simple_categorical("b", vec![1.0 - p, p]).unwrap(),
            Hypothesis64::dirichlet_categorical(
                "c",
                vec![rng.gen_range(0.2..5.0), rng.gen_range(0.2..5.0)],
            )
            .unwrap(),
        ];
        let priors = oracle::random_simplex(3, &mut rng);
        let full = SubsetMask::full(d);
        let lls: Vec<f64> = set
            .iter()
            .map(|h| log_marginal(h, full, &data).unwrap().value())
            .collect();
        let post = posteriors_from_log_likelihoods(&priors, &lls).map_err(|e| e.to_string())?;
        for h in 0..3 {
            let direct =
                nonrelative_from_log_likelihoods(&priors, &lls, h).map_err(|e| e.to_string())?;
            let odds = (post[h] / (1.0 - post[h])).ln() - (priors[h] / (1.0 - priors[h])).ln();
            worst = worst.max((direct - odds).abs());
        }
    }
    ensure(
        worst <= 1e-10,
        format!("100 sets, worst difference {worst:.1e}"),
    )
}

fn goods_property() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let start = Instant::now();
    let a = Hypothesis64::simple_categorical("A", vec![0.2, 0.8]).unwrap();
    let b = Hypothesis64::simple_categorical("B", vec![0.5, 0.5]).unwrap();
    let n = 2000;
    let woe: Vec<f64> = (0..n)
        .map(|_| {
            let labels: Vec<u32> = (0..10).map(|_| u32::from(rng.gen_bool(0.8))).collect();
            let data = Dataset64::categorical(&labels).unwrap();
            weight_of_evidence_db(relative_bayes_factor(&a, &b, &data).unwrap()).decibels()
        })
        .collect();
    let mean = woe.iter().sum::<f64>() / n as f64;
    let var = woe.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let t = mean / (var / n as f64).sqrt();
    let elapsed = start.elapsed();
    ensure(
        mean > 0.0 && t > 3.0 && elapsed < Duration::from_secs(10),
        format!("mean {mean:.4} dB, t = {t:.1}, {elapsed:?}"),
    )
}

fn scale() -> Check {
    let d = 20;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let labels: Vec<u32> = (0..d).map(|_| rng.gen_range(0..2)).collect();
    let data = Dataset64::categorical(&labels).unwrap();
    let model = CountingModel::new(Hypothesis64::beta_bernoulli("bb", 1.5, 0.7).unwrap());
    let baseline = LIVE.load(Ordering::Relaxed);
    PEAK.store(baseline, Ordering::Relaxed);
    let start = Instant::now();
    let v = verify_identity(&model, &data, 1e-9, &opts()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let peak = PEAK.load(Ordering::Relaxed) - baseline;
    let evaluations = model.evaluations();
    ensure(
        v.pass
            && evaluations == (1 << d) - 1
            && elapsed < Duration::from_secs(10)
            && peak < 256 << 20,
        format!(
            "{evaluations} evaluations, peak {:.1} MiB, {elapsed:?}, residual {:.1e}",
            peak as f64 / (1 << 20) as f64,
            v.per_cardinality_residual()
        ),
    )
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let body: String = (0..16)
        .map(|_| format!("{}\n", rng.gen_range(-3.0..3.0f64)))
        .collect();
    let data = dir.path().join("data.csv");
    let config = dir.path().join("config.json");
    std::fs::write(&data, body).map_err(|e| e.to_string())?;
    std::fs::write(
        &config,
        r#"{"hypotheses":[
            {"name":"nkv","kind":"normal_known_variance","params":{"variance":0.9,"prior_mean":0.3,"prior_variance":2.5}},
            {"name":"gauss","kind":"simple_gaussian","params":{"mean":0,"std_dev":1.2}}]}"#,
    )
    .map_err(|e| e.to_string())?;
    let report = |threads: &str| {
        subset_evidence_cli::run([
            "subset-evidence",
            "verify",
            "--data",
            data.to_str().unwrap(),
            "--config",
            config.to_str().unwrap(),
            "--format",
            "json",
            "--threads",
            threads,
        ])
    };
    let one = report("1");
    let eight = report("8");
    ensure(
        one.code == 0 && one.stdout == eight.stdout && !one.stdout.is_empty(),
        format!(
            "{} bytes, exit {} / {}",
            one.stdout.len(),
            one.code,
            eight.code
        ),
    )
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 worked d=3 example", worked_example),
        ("2 identity over random cases", identity_suite),
        ("3 brute-force equivalence", brute_force),
        ("4 simple-hypothesis flatness", flatness),
        ("5 odds-route equivalence", odds_route),
        ("6 expected weight of evidence", goods_property),
        ("7 d=20 scale", scale),
        ("8 thread determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    println!("{} of {} acceptance criteria passed", 8 - failed, 8);
    if failed > 0 {
        std::process::exit(1);
    }
}
