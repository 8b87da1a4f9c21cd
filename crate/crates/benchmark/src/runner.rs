//! The benchmark runner: executes a corpus through the pipeline per seed
//! and per configuration (full plus requested ablations), scores the four
//! metrics, and aggregates mean and standard deviation across seeds.

use crate::corpus::{load_corpus, BenchmarkItem, CorpusError};
use crate::metrics::{mean_std, score_ea, score_qsc, tf1_counts};
use kgqa_exec::term_to_json;
use kgqa_orchestrator::{AblationFlags, BackendChoice, Clarifier, Pipeline, PipelineConfig, PipelineError};
use serde_json::Value;
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("pipeline: {0}")]
    Pipeline(String),
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ItemRecord {
    pub id: String,
    pub ea: u8,
    pub qsc: u8,
    pub tf1: Option<f64>,
    pub tokens: u64,
    /// The first executed query, kept for triple-F1 pooling.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predicted_query: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct SeedRun {
    pub seed: u64,
    pub ea_pct: f64,
    pub qsc_pct: f64,
    pub tf1_pct: f64,
    pub atu_mean: f64,
    pub items: Vec<ItemRecord>,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ConfigResult {
    pub label: String,
    pub ea_mean: f64,
    pub ea_std: f64,
    pub qsc_mean: f64,
    pub qsc_std: f64,
    pub tf1_mean: f64,
    pub tf1_std: f64,
    pub atu_mean: f64,
    pub atu_std: f64,
    pub seeds: Vec<SeedRun>,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct MetricsReport {
    pub corpus: String,
    pub seed_list: Vec<u64>,
    pub results: Vec<ConfigResult>,
    pub deterministic: bool,
    pub footer: String,
}

pub const REPORT_FOOTER: &str = "Scores reflect the bundled deterministic backend over the \
synthetic corpus. Token counts use the built-in tokenizer and are comparable only within this \
project, not against figures produced with external language models or other datasets.";

impl MetricsReport {
    pub fn result(&self, label: &str) -> Option<&ConfigResult> {
        self.results.iter().find(|r| r.label == label)
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("report serializes")
    }

    /// Human-readable table, one row per configuration.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<16} {:>14} {:>14} {:>14} {:>12}\n",
            "config", "EA (%)", "QSC (%)", "TF1 (%)", "ATU"
        ));
        for result in &self.results {
            out.push_str(&format!(
                "{:<16} {:>7.2} ±{:<5.2} {:>7.2} ±{:<5.2} {:>7.2} ±{:<5.2} {:>6.1} ±{:<4.1}\n",
                result.label,
                result.ea_mean,
                result.ea_std,
                result.qsc_mean,
                result.qsc_std,
                result.tf1_mean,
                result.tf1_std,
                result.atu_mean,
                result.atu_std,
            ));
        }
        out.push_str(&format!("seeds: {:?}\n{}\n", self.seed_list, self.footer));
        out
    }
}

/// Runs one item through a pipeline and scores it.
pub fn run_item(pipeline: &Pipeline, item: &BenchmarkItem) -> ItemRecord {
    let canned: Vec<String> = item.clarification_answer.iter().cloned().collect();
    let outcome = pipeline.answer_question(&item.question, Clarifier::Canned(&canned));
    match outcome {
        Ok((consensus, trace)) => {
            let predicted_rows: Vec<Value> = consensus
                .rows
                .iter()
                .map(|row| {
                    let mut obj = serde_json::Map::new();
                    for (var, term) in row {
                        obj.insert(var.name().to_string(), term_to_json(term));
                    }
                    Value::Object(obj)
                })
                .collect();
            let ea = item
                .gold_answer
                .as_ref()
                .map(|gold| score_ea(Some(&predicted_rows), &gold.rows))
                .unwrap_or(0);
            let executed = executed_queries(&trace);
            let qsc = if executed.is_empty() {
                0
            } else {
                u8::from(executed.iter().all(|q| score_qsc(q) == 1))
            };
            let tf1 = item.gold_query.as_deref().and_then(|gold| {
                executed
                    .first()
                    .map(|predicted| crate::metrics::score_tf1(predicted, gold))
            });
            ItemRecord {
                id: item.id.clone(),
                ea,
                qsc,
                tf1,
                tokens: trace.tokens.total(),
                predicted_query: executed.first().cloned(),
                error: None,
            }
        }
        Err(e) => {
            let (tokens, executed) = match &e {
                PipelineError::AllSubgoalsFailed { trace } => {
                    (trace.tokens.total(), executed_queries(trace))
                }
                _ => (0, Vec::new()),
            };
            let qsc = if executed.is_empty() {
                0
            } else {
                u8::from(executed.iter().all(|q| score_qsc(q) == 1))
            };
            ItemRecord {
                id: item.id.clone(),
                ea: 0,
                qsc,
                tf1: item.gold_query.as_ref().map(|_| 0.0),
                tokens,
                predicted_query: executed.first().cloned(),
                error: Some(e.to_string()),
            }
        }
    }
}

/// Query texts the pipeline actually executed, in subgoal order.
fn executed_queries(trace: &kgqa_orchestrator::PipelineTrace) -> Vec<String> {
    let mut out = Vec::new();
    for subgoal in &trace.subgoals {
        for attempt in &subgoal.attempts {
            for query in &attempt.queries {
                if query.executed_rows.is_some() {
                    out.push(query.query_text.clone());
                }
            }
        }
    }
    out
}

fn seed_run(
    seed: u64,
    items: &[BenchmarkItem],
    config: &PipelineConfig,
) -> Result<SeedRun, BenchError> {
    // A fresh pipeline per seed: utilities and caches start from their
    // initial state, so identical seeds produce identical runs.
    let pipeline = Pipeline::from_config(config.clone()).map_err(|e| BenchError::Pipeline(e.to_string()))?;
    let mut records = Vec::with_capacity(items.len());
    for item in items {
        records.push(run_item(&pipeline, item));
    }

    let scored_ea: Vec<f64> = items
        .iter()
        .zip(&records)
        .filter(|(item, _)| item.gold_answer.is_some())
        .map(|(_, r)| f64::from(r.ea))
        .collect();
    let ea_pct = if scored_ea.is_empty() {
        0.0
    } else {
        100.0 * scored_ea.iter().sum::<f64>() / scored_ea.len() as f64
    };
    let qsc_pct =
        100.0 * records.iter().map(|r| f64::from(r.qsc)).sum::<f64>() / records.len() as f64;

    // Micro-averaged triple F1 over items that carry a gold query: pattern
    // counts pool across the corpus.
    let mut tp_total = 0usize;
    let mut predicted_total = 0usize;
    let mut gold_total = 0usize;
    for (item, record) in items.iter().zip(&records) {
        let Some(gold) = item.gold_query.as_deref() else {
            continue;
        };
        match record
            .predicted_query
            .as_deref()
            .and_then(|predicted| tf1_counts(predicted, gold))
        {
            Some((tp, p_len, g_len)) => {
                tp_total += tp;
                predicted_total += p_len;
                gold_total += g_len;
            }
            // Nothing executed (or unparseable): only the gold side pools.
            None => gold_total += gold_pattern_count(gold),
        }
    }
    let tf1_pct = if predicted_total + gold_total == 0 {
        0.0
    } else {
        100.0 * (2.0 * tp_total as f64) / (predicted_total + gold_total) as f64
    };
    let atu_mean = records.iter().map(|r| r.tokens as f64).sum::<f64>() / records.len() as f64;

    Ok(SeedRun {
        seed,
        ea_pct,
        qsc_pct,
        tf1_pct,
        atu_mean,
        items: records,
    })
}

fn gold_pattern_count(gold: &str) -> usize {
    kgqa_sparql::parse_sparql(gold)
        .map(|q| kgqa_sparql::triple_patterns_of(&q).len())
        .unwrap_or(0)
}

/// Full benchmark run: every configuration over every seed.
pub fn run_bench(
    corpus_path: &Path,
    base_config: &PipelineConfig,
    seeds: &[u64],
    ablations: &[(String, AblationFlags)],
) -> Result<MetricsReport, BenchError> {
    let items = load_corpus(corpus_path)?;
    let mut configs: Vec<(String, AblationFlags)> =
        vec![("full".to_string(), AblationFlags::default())];
    configs.extend(ablations.iter().cloned());

    let mut results = Vec::new();
    for (label, flags) in &configs {
        let mut config = base_config.clone();
        config.ablation = *flags;
        let mut runs = Vec::new();
        for &seed in seeds {
            runs.push(seed_run(seed, &items, &config)?);
        }
        let (ea_mean, ea_std) = mean_std(&runs.iter().map(|r| r.ea_pct).collect::<Vec<_>>());
        let (qsc_mean, qsc_std) = mean_std(&runs.iter().map(|r| r.qsc_pct).collect::<Vec<_>>());
        let (tf1_mean, tf1_std) = mean_std(&runs.iter().map(|r| r.tf1_pct).collect::<Vec<_>>());
        let (atu_mean, atu_std) = mean_std(&runs.iter().map(|r| r.atu_mean).collect::<Vec<_>>());
        results.push(ConfigResult {
            label: label.clone(),
            ea_mean,
            ea_std,
            qsc_mean,
            qsc_std,
            tf1_mean,
            tf1_std,
            atu_mean,
            atu_std,
            seeds: runs,
        });
    }

    let deterministic = matches!(base_config.backend, BackendChoice::Rule);
    if deterministic {
        // The deterministic backend must produce identical runs per seed.
        for result in &results {
            debug_assert!(
                result.ea_std == 0.0 && result.qsc_std == 0.0 && result.tf1_std == 0.0,
                "deterministic backend produced nonzero stddev for {}",
                result.label
            );
        }
    }

    Ok(MetricsReport {
        corpus: corpus_path.display().to_string(),
        seed_list: seeds.to_vec(),
        results,
        deterministic,
        footer: REPORT_FOOTER.to_string(),
    })
}

/// Recomputes a seed run's header percentages from its per-item records;
/// used to assert report arithmetic.
pub fn recompute_header(run: &SeedRun, items: &[BenchmarkItem]) -> (f64, f64, f64) {
    let scored: Vec<f64> = items
        .iter()
        .zip(&run.items)
        .filter(|(item, _)| item.gold_answer.is_some())
        .map(|(_, r)| f64::from(r.ea))
        .collect();
    let ea = if scored.is_empty() {
        0.0
    } else {
        100.0 * scored.iter().sum::<f64>() / scored.len() as f64
    };
    let qsc =
        100.0 * run.items.iter().map(|r| f64::from(r.qsc)).sum::<f64>() / run.items.len() as f64;
    let atu = run.items.iter().map(|r| r.tokens as f64).sum::<f64>() / run.items.len() as f64;
    (ea, qsc, atu)
}
