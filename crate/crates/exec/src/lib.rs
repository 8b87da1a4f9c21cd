//! Query execution: one executor interface over local in-memory stores and
//! remote SPARQL-Protocol endpoints, plus a brute-force reference evaluator
//! used as the engine's oracle.

pub mod answer;
pub mod brute;
pub mod eval;
pub mod remote;

pub use answer::{binding_key, rows_from_results_json, term_from_json, term_to_json, AnswerSet, Binding, Rows};
pub use brute::{brute_force_evaluate, GuardExceeded};
pub use eval::{evaluate_local, filter_accepts, order_cmp};
pub use remote::{evaluate_remote, RemoteEndpoint};

use kgqa_rdf::TripleStore;
use kgqa_sparql::SparqlQuery;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExecError {
    #[error("network error against {endpoint}: {message}")]
    Network { endpoint: String, message: String },
    #[error("protocol error against {endpoint} (status {status}): {message}")]
    Protocol {
        endpoint: String,
        status: u16,
        message: String,
    },
    #[error(transparent)]
    Guard(#[from] GuardExceeded),
}

/// Uniform execution interface for the pipeline; local stores never fail,
/// remote endpoints surface network/protocol errors.
pub trait QueryExecutor: Send + Sync {
    fn graph_id(&self) -> &str;
    fn execute(&self, query: &SparqlQuery) -> Result<AnswerSet, ExecError>;
}

#[derive(Clone)]
pub struct LocalExecutor {
    store: Arc<TripleStore>,
}

impl LocalExecutor {
    pub fn new(store: Arc<TripleStore>) -> Self {
        LocalExecutor { store }
    }

    pub fn store(&self) -> &TripleStore {
        &self.store
    }
}

impl QueryExecutor for LocalExecutor {
    fn graph_id(&self) -> &str {
        self.store.graph_id()
    }

    fn execute(&self, query: &SparqlQuery) -> Result<AnswerSet, ExecError> {
        Ok(evaluate_local(query, &self.store))
    }
}

#[derive(Clone)]
pub struct RemoteExecutor {
    endpoint: RemoteEndpoint,
    graph_id: String,
}

impl RemoteExecutor {
    pub fn new(graph_id: impl Into<String>, endpoint: RemoteEndpoint) -> Self {
        RemoteExecutor {
            endpoint,
            graph_id: graph_id.into(),
        }
    }
}

impl QueryExecutor for RemoteExecutor {
    fn graph_id(&self) -> &str {
        &self.graph_id
    }

    fn execute(&self, query: &SparqlQuery) -> Result<AnswerSet, ExecError> {
        evaluate_remote(query, &self.endpoint, &self.graph_id)
    }
}
