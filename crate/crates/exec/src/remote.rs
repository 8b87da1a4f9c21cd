//! SPARQL Protocol client: GET with a urlencoded `query` parameter, falling
//! back to form POST for long queries, expecting
//! `application/sparql-results+json` back. Concurrent requests are bounded
//! per endpoint so the client stays polite.

use crate::answer::{rows_from_results_json, AnswerSet};
use crate::ExecError;
use kgqa_sparql::{serialize_sparql, SparqlQuery};
use std::collections::HashMap;
use std::sync::{Condvar, Mutex, OnceLock};
use std::time::{Duration, Instant};

const GET_LENGTH_LIMIT: usize = 2000;
pub const DEFAULT_MAX_CONCURRENT: usize = 4;

/// Process-wide per-endpoint in-flight request counter.
struct EndpointGate {
    state: Mutex<HashMap<String, usize>>,
    signal: Condvar,
}

fn gate() -> &'static EndpointGate {
    static GATE: OnceLock<EndpointGate> = OnceLock::new();
    GATE.get_or_init(|| EndpointGate {
        state: Mutex::new(HashMap::new()),
        signal: Condvar::new(),
    })
}

struct GatePass<'a> {
    gate: &'a EndpointGate,
    endpoint: String,
}

impl EndpointGate {
    fn acquire(&self, endpoint: &str, max_concurrent: usize) -> GatePass<'_> {
        let mut state = self.state.lock().unwrap();
        loop {
            let inflight = state.entry(endpoint.to_string()).or_insert(0);
            if *inflight < max_concurrent {
                *inflight += 1;
                return GatePass {
                    gate: self,
                    endpoint: endpoint.to_string(),
                };
            }
            state = self.signal.wait(state).unwrap();
        }
    }
}

impl Drop for GatePass<'_> {
    fn drop(&mut self) {
        let mut state = self.gate.state.lock().unwrap();
        if let Some(inflight) = state.get_mut(&self.endpoint) {
            *inflight = inflight.saturating_sub(1);
        }
        self.gate.signal.notify_all();
    }
}

#[derive(Debug, Clone)]
pub struct RemoteEndpoint {
    pub url: String,
    pub timeout: Duration,
    pub max_concurrent: usize,
}

impl RemoteEndpoint {
    pub fn new(url: impl Into<String>, timeout: Duration) -> Self {
        RemoteEndpoint {
            url: url.into(),
            timeout,
            max_concurrent: DEFAULT_MAX_CONCURRENT,
        }
    }
}

pub fn evaluate_remote(
    query: &SparqlQuery,
    endpoint: &RemoteEndpoint,
    graph_id: &str,
) -> Result<AnswerSet, ExecError> {
    let started = Instant::now();
    let text = serialize_sparql(query);
    let _pass = gate().acquire(&endpoint.url, endpoint.max_concurrent.max(1));

    let agent = ureq::AgentBuilder::new()
        .timeout_connect(endpoint.timeout)
        .timeout(endpoint.timeout)
        .build();

    let response = if text.len() <= GET_LENGTH_LIMIT {
        let via_get = agent
            .get(&endpoint.url)
            .query("query", &text)
            .set("Accept", "application/sparql-results+json")
            .call()
            .map_err(Box::new);
        match via_get {
            // Some endpoints cap URL length; retry those as a form POST.
            Err(e) if matches!(*e, ureq::Error::Status(414, _)) => {
                post_form(&agent, endpoint, &text)
            }
            other => other,
        }
    } else {
        post_form(&agent, endpoint, &text)
    };

    let response = match response {
        Ok(r) => r,
        Err(boxed) => match *boxed {
            ureq::Error::Status(code, resp) => {
                return Err(ExecError::Protocol {
                    endpoint: endpoint.url.clone(),
                    status: code,
                    message: resp.status_text().to_string(),
                })
            }
            ureq::Error::Transport(t) => {
                return Err(ExecError::Network {
                    endpoint: endpoint.url.clone(),
                    message: t.to_string(),
                })
            }
        },
    };

    let body = response.into_string().map_err(|e| ExecError::Protocol {
        endpoint: endpoint.url.clone(),
        status: 200,
        message: format!("unreadable body: {e}"),
    })?;
    let value: serde_json::Value =
        serde_json::from_str(&body).map_err(|e| ExecError::Protocol {
            endpoint: endpoint.url.clone(),
            status: 200,
            message: format!("undecodable results JSON: {e}"),
        })?;
    let (rows, warnings) = rows_from_results_json(&value).map_err(|m| ExecError::Protocol {
        endpoint: endpoint.url.clone(),
        status: 200,
        message: m,
    })?;

    Ok(AnswerSet {
        query: query.clone(),
        graph_id: graph_id.to_string(),
        rows,
        exec_time: started.elapsed(),
        truncated: false,
        warnings,
    })
}

fn post_form(
    agent: &ureq::Agent,
    endpoint: &RemoteEndpoint,
    text: &str,
) -> Result<ureq::Response, Box<ureq::Error>> {
    agent
        .post(&endpoint.url)
        .set("Accept", "application/sparql-results+json")
        .send_form(&[("query", text)])
        .map_err(Box::new)
}
