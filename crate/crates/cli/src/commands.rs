use std::fmt::Write as _;
use std::num::NonZeroUsize;
use std::path::PathBuf;

use clap::ValueEnum;
use serde::Serialize;
use subset_evidence::lattice::{
    build_cache, leave_m_out_score, loo_score, per_cardinality_scores, verify_cache,
};
use subset_evidence::models::log_marginal;
use subset_evidence::{
    Dataset64, DatumKind, DecompositionTable64, EvidenceReport64, Hypothesis64, HypothesisEvidence,
    LatticeOptions, MarginalCache64, ModelKind, SubsetMask, Verification64, DEFAULT_D_MAX,
};

use crate::config::{Config, DEFAULT_TOLERANCE};
use crate::dataset::{self, DataFormat};
use crate::error::{exit, CliError};
use crate::format::{fixed4, g17};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Score,
    Verify,
    Compare,
    Subsets,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Score => "score",
            Command::Verify => "verify",
            Command::Compare => "compare",
            Command::Subsets => "subsets",
        }
    }

    pub fn default_format(self) -> OutputFormat {
        match self {
            Command::Subsets => OutputFormat::Csv,
            _ => OutputFormat::Text,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
    Csv,
}

/// Everything one invocation needs, after command-line parsing.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub data: PathBuf,
    pub data_format: Option<DataFormat>,
    pub header: bool,
    pub config: PathBuf,
    pub format: OutputFormat,
    /// Overrides the config file's tolerance.
    pub tolerance: Option<f64>,
    /// Overrides the config file's `d_max`.
    pub d_max: Option<usize>,
    pub threads: NonZeroUsize,
    pub leave_out: Vec<usize>,
}

/// Report text plus the exit code it implies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rendered {
    pub code: u8,
    pub output: String,
}

struct Prepared {
    config: Config,
    hypotheses: Vec<Hypothesis64>,
    data: Dataset64,
    tolerance: f64,
    options: LatticeOptions,
}

fn prepare(run: &RunConfig) -> Result<Prepared, CliError> {
    if !run.leave_out.is_empty() && run.command != Command::Score {
        return Err(CliError::Usage(
            "--leave-out only applies to `score`".into(),
        ));
    }
    let config = Config::load(&run.config)?;
    let tolerance = run
        .tolerance
        .or(config.tolerance)
        .unwrap_or(DEFAULT_TOLERANCE);
    if !(tolerance.is_finite() && tolerance > 0.0) {
        return Err(CliError::Usage(format!(
            "tolerance must be positive and finite, got {tolerance}"
        )));
    }
    let options = LatticeOptions::default()
        .with_d_max(run.d_max.or(config.d_max).unwrap_or(DEFAULT_D_MAX))?
        .with_threads(run.threads);
    let hypotheses = config.hypotheses()?;
    let data = dataset::load(&run.data, run.data_format, run.header, config.wants_reals())?;
    for h in &hypotheses {
        h.check(&data)?;
    }
    Ok(Prepared {
        config,
        hypotheses,
        data,
        tolerance,
        options,
    })
}

pub fn execute(run: &RunConfig) -> Result<Rendered, CliError> {
    let p = prepare(run)?;
    let dataset = DatasetInfo {
        d: p.data.len(),
        kind: p.data.kind(),
    };
    match run.command {
        Command::Score => score(run, &p, dataset),
        Command::Verify => verify(run, &p, dataset),
        Command::Compare => compare(run, &p, dataset),
        Command::Subsets => subsets(run, &p, dataset),
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
struct DatasetInfo {
    d: usize,
    kind: DatumKind,
}

#[derive(Serialize)]
struct Report<'a, R> {
    command: &'static str,
    dataset: DatasetInfo,
    results: &'a [R],
}

fn json<R: Serialize>(
    command: Command,
    dataset: DatasetInfo,
    results: &[R],
) -> Result<String, CliError> {
    let report = Report {
        command: command.name(),
        dataset,
        results,
    };
    let mut out = serde_json::to_string_pretty(&report)?;
    out.push('\n');
    Ok(out)
}

fn csv_table(header: &[&str], rows: Vec<Vec<String>>) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn caches(p: &Prepared) -> Result<Vec<MarginalCache64>, CliError> {
    Ok(p.hypotheses
        .iter()
        .map(|h| build_cache(h, &p.data, &p.options))
        .collect::<subset_evidence::Result<_>>()?)
}

fn header_line(out: &mut String, dataset: DatasetInfo) {
    let _ = writeln!(out, "dataset: d = {}, {} data", dataset.d, dataset.kind);
}

// ---- score ----

#[derive(Debug, Serialize)]
struct ScoreResult {
    hypothesis: String,
    kind: ModelKind,
    log_likelihood: f64,
    loo: f64,
    leave_m_out: Vec<LeaveOut>,
}

#[derive(Debug, Serialize)]
struct LeaveOut {
    m: usize,
    score: f64,
}

fn score(run: &RunConfig, p: &Prepared, dataset: DatasetInfo) -> Result<Rendered, CliError> {
    let mut results = Vec::new();
    for (h, cache) in p.hypotheses.iter().zip(caches(p)?) {
        let leave_m_out = run
            .leave_out
            .iter()
            .map(|&m| {
                Ok(LeaveOut {
                    m,
                    score: leave_m_out_score(&cache, m)?.value,
                })
            })
            .collect::<subset_evidence::Result<_>>()?;
        results.push(ScoreResult {
            hypothesis: h.name().to_owned(),
            kind: h.kind(),
            log_likelihood: cache.direct(),
            loo: loo_score(&cache)?.value,
            leave_m_out,
        });
    }
    let output = match run.format {
        OutputFormat::Json => json(run.command, dataset, &results)?,
        OutputFormat::Csv => {
            let mut header = vec![
                "hypothesis".to_owned(),
                "log_likelihood".into(),
                "loo".into(),
            ];
            header.extend(run.leave_out.iter().map(|m| format!("leave_{m}_out")));
            let rows = results
                .iter()
                .map(|r| {
                    let mut row = vec![r.hypothesis.clone(), g17(r.log_likelihood), g17(r.loo)];
                    row.extend(r.leave_m_out.iter().map(|l| g17(l.score)));
                    row
                })
                .collect();
            csv_table(&header.iter().map(String::as_str).collect::<Vec<_>>(), rows)?
        }
        OutputFormat::Text => {
            let mut out = String::new();
            header_line(&mut out, dataset);
            for r in &results {
                let _ = writeln!(out, "\n{} ({})", r.hypothesis, kind_label(r.kind));
                let _ = writeln!(
                    out,
                    "  {:<16}{:>12}",
                    "log-likelihood",
                    fixed4(r.log_likelihood)
                );
                let _ = writeln!(out, "  {:<16}{:>12}", "loo", fixed4(r.loo));
                for l in &r.leave_m_out {
                    let label = format!("leave-{}-out", l.m);
                    let _ = writeln!(out, "  {:<16}{:>12}", label, fixed4(l.score));
                }
            }
            out
        }
    };
    Ok(Rendered {
        code: exit::SUCCESS,
        output,
    })
}

// ---- verify ----

#[derive(Debug, Serialize)]
struct VerifyResult {
    hypothesis: String,
    kind: ModelKind,
    #[serde(flatten)]
    verification: Verification64,
}

fn verify(run: &RunConfig, p: &Prepared, dataset: DatasetInfo) -> Result<Rendered, CliError> {
    let mut results = Vec::new();
    for (h, cache) in p.hypotheses.iter().zip(caches(p)?) {
        results.push(VerifyResult {
            hypothesis: h.name().to_owned(),
            kind: h.kind(),
            verification: verify_cache(&cache, p.tolerance)?,
        });
    }
    let code = if results.iter().all(|r| r.verification.pass) {
        exit::SUCCESS
    } else {
        exit::IDENTITY_FAILURE
    };
    let output = match run.format {
        OutputFormat::Json => json(run.command, dataset, &results)?,
        OutputFormat::Csv => {
            let mut rows = Vec::new();
            for r in &results {
                let v = &r.verification;
                for (form, table) in [
                    ("per_cardinality", &v.per_cardinality),
                    ("per_datum", &v.per_datum),
                ] {
                    rows.extend(table_rows(&r.hypothesis, table).into_iter().map(|mut row| {
                        row.insert(1, form.to_owned());
                        row
                    }));
                }
            }
            csv_table(
                &["hypothesis", "form", "k", "count", "score", "cumulative"],
                rows,
            )?
        }
        OutputFormat::Text => {
            let mut out = String::new();
            header_line(&mut out, dataset);
            let _ = writeln!(out, "tolerance: {:e}", p.tolerance);
            for r in &results {
                let v = &r.verification;
                let verdict = if v.pass { "PASS" } else { "FAIL" };
                let _ = writeln!(
                    out,
                    "\n{} ({}): {verdict}",
                    r.hypothesis,
                    kind_label(r.kind)
                );
                text_table(&mut out, &v.per_cardinality);
                let _ = writeln!(out, "  log-likelihood      {:>12}", fixed4(v.direct));
                let _ = writeln!(
                    out,
                    "  residual            {:>12.3e}  (per-datum form {:.3e})",
                    v.per_cardinality_residual(),
                    v.per_datum_residual()
                );
                let _ = writeln!(out, "  marginal evaluations {}", v.evaluations);
            }
            out
        }
    };
    Ok(Rendered { code, output })
}

// ---- compare ----

#[derive(Debug, Serialize)]
struct CompareResult {
    kind: ModelKind,
    #[serde(flatten)]
    evidence: HypothesisEvidence<f64>,
    /// `ln P(D|this) − ln P(D|other)` for each configured hypothesis.
    log_bayes_factors: Vec<Option<f64>>,
}

fn compare(run: &RunConfig, p: &Prepared, dataset: DatasetInfo) -> Result<Rendered, CliError> {
    if p.hypotheses.len() < 2 {
        return Err(subset_evidence::Error::TooFewHypotheses(p.hypotheses.len()).into());
    }
    let priors = p.config.priors(&run.config)?;
    let full = SubsetMask::full(p.data.len());
    let lls = p
        .hypotheses
        .iter()
        .map(|h| log_marginal(h, full, &p.data).map(|lp| lp.value()))
        .collect::<subset_evidence::Result<Vec<_>>>()?;
    let names: Vec<&str> = p.hypotheses.iter().map(|h| h.name()).collect();
    let report = EvidenceReport64::from_log_likelihoods(&names, &priors, &lls)?;
    let results: Vec<CompareResult> = report
        .hypotheses
        .iter()
        .zip(&report.pairwise)
        .zip(&p.hypotheses)
        .map(|((e, row), h)| CompareResult {
            kind: h.kind(),
            evidence: e.clone(),
            log_bayes_factors: row.iter().map(|x| x.map(|x| x.0)).collect(),
        })
        .collect();
    let opt = |x: Option<f64>| x.map_or_else(String::new, g17);
    let output = match run.format {
        OutputFormat::Json => json(run.command, dataset, &results)?,
        OutputFormat::Csv => {
            let rows = results
                .iter()
                .map(|r| {
                    let e = &r.evidence;
                    vec![
                        e.hypothesis.clone(),
                        g17(e.prior),
                        g17(e.log_likelihood),
                        g17(e.posterior),
                        opt(e.log_bayes_factor),
                        opt(e.weight_of_evidence_db.map(|db| db.decibels())),
                    ]
                })
                .collect();
            csv_table(
                &[
                    "hypothesis",
                    "prior",
                    "log_likelihood",
                    "posterior",
                    "log_bayes_factor",
                    "weight_of_evidence_db",
                ],
                rows,
            )?
        }
        OutputFormat::Text => {
            let mut out = String::new();
            header_line(&mut out, dataset);
            let width = names.iter().map(|n| n.len()).max().unwrap_or(0).max(10);
            let _ = writeln!(
                out,
                "\n{:<width$}  {:>8}  {:>12}  {:>9}  {:>12}",
                "hypothesis", "prior", "log-lik", "posterior", "evidence dB"
            );
            for r in &results {
                let e = &r.evidence;
                let db = e
                    .weight_of_evidence_db
                    .map_or_else(|| "-".into(), |db| fixed4(db.decibels()));
                let _ = writeln!(
                    out,
                    "{:<width$}  {:>8}  {:>12}  {:>9}  {:>12}",
                    e.hypothesis,
                    fixed4(e.prior),
                    fixed4(e.log_likelihood),
                    fixed4(e.posterior),
                    db
                );
            }
            let _ = writeln!(out, "\npairwise ln Bayes factor (row vs column)");
            let _ = write!(out, "{:<width$}", "");
            for n in &names {
                let _ = write!(out, "  {n:>width$}");
            }
            out.push('\n');
            for (r, n) in results.iter().zip(&names) {
                let _ = write!(out, "{n:<width$}");
                for x in &r.log_bayes_factors {
                    let cell = x.map_or_else(|| "-".into(), fixed4);
                    let _ = write!(out, "  {cell:>width$}");
                }
                out.push('\n');
            }
            out
        }
    };
    Ok(Rendered {
        code: exit::SUCCESS,
        output,
    })
}

// ---- subsets ----

#[derive(Debug, Serialize)]
struct SubsetsResult {
    hypothesis: String,
    kind: ModelKind,
    rows: Vec<subset_evidence::DecompositionRow<f64>>,
    log_likelihood: f64,
}

fn subsets(run: &RunConfig, p: &Prepared, dataset: DatasetInfo) -> Result<Rendered, CliError> {
    let mut tables = Vec::new();
    for (h, cache) in p.hypotheses.iter().zip(caches(p)?) {
        tables.push((h, per_cardinality_scores(&cache)?));
    }
    let output = match run.format {
        OutputFormat::Csv => {
            let rows = tables
                .iter()
                .flat_map(|(h, t)| table_rows(h.name(), t))
                .collect();
            csv_table(&["hypothesis", "k", "count", "score", "cumulative"], rows)?
        }
        OutputFormat::Json => {
            let results: Vec<SubsetsResult> = tables
                .into_iter()
                .map(|(h, t)| SubsetsResult {
                    hypothesis: h.name().to_owned(),
                    kind: h.kind(),
                    log_likelihood: t.direct,
                    rows: t.rows,
                })
                .collect();
            json(run.command, dataset, &results)?
        }
        OutputFormat::Text => {
            let mut out = String::new();
            header_line(&mut out, dataset);
            for (h, t) in &tables {
                let _ = writeln!(out, "\n{} ({})", h.name(), kind_label(h.kind()));
                text_table(&mut out, t);
            }
            out
        }
    };
    Ok(Rendered {
        code: exit::SUCCESS,
        output,
    })
}

fn table_rows(hypothesis: &str, table: &DecompositionTable64) -> Vec<Vec<String>> {
    table
        .rows
        .iter()
        .map(|r| {
            vec![
                hypothesis.to_owned(),
                r.k.to_string(),
                r.subsets_count.to_string(),
                g17(r.score),
                g17(r.cumulative),
            ]
        })
        .collect()
}

fn text_table(out: &mut String, table: &DecompositionTable64) {
    let _ = writeln!(
        out,
        "  {:>4}  {:>10}  {:>12}  {:>12}",
        "k", "count", "score", "cumulative"
    );
    for r in &table.rows {
        let _ = writeln!(
            out,
            "  {:>4}  {:>10}  {:>12}  {:>12}",
            r.k,
            r.subsets_count,
            fixed4(r.score),
            fixed4(r.cumulative)
        );
    }
}

fn kind_label(kind: ModelKind) -> String {
    serde_json::to_value(kind)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default()
}
