//! Benchmark harness: the corpus format, the four evaluation metrics,
//! synthetic fixture generation and the seeded ablation runner.

pub mod corpus;
pub mod fixtures;
pub mod metrics;
pub mod rng;
pub mod runner;

pub use corpus::{load_corpus, save_corpus, BenchmarkItem, CorpusError, GoldAnswer, Tags};
pub use fixtures::{make_fixtures, FixtureError, FixtureSummary, DEFAULT_SEED};
pub use metrics::{mean_std, score_ea, score_qsc, score_tf1, tf1_counts};
pub use rng::SplitMix64;
pub use runner::{
    recompute_header, run_bench, run_item, BenchError, ConfigResult, ItemRecord, MetricsReport,
    SeedRun, REPORT_FOOTER,
};
