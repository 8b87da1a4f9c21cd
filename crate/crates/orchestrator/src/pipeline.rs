//! The end-to-end pipeline: decompose the question, then per subgoal
//! allocate -> synthesize -> verify -> execute (falling back to the next
//! ranked graph on failure, at most two retries), and finally aggregate the
//! per-subgoal answers into one consensus response.
//!
//! Independent subgoals run in parallel under a bounded worker width;
//! dependent subgoals wait for their dependency's answer set. Utility
//! updates are applied after the question completes, in subgoal order, so
//! results are identical for any parallelism width.

use crate::config::{BackendChoice, PipelineConfig};
use crate::trace::{
    AttemptTrace, ClarificationTurn, PipelineTrace, QueryAttempt, SubgoalTrace, TokenAccounting,
};
use kgqa_aggregator::{align_entities, fuse, summarize_rule, AggregateError, ConsensusAnswer, SubAnswer};
use kgqa_allocator::{
    allocate, load_manifest, registry_from_manifest, strong_align, term_overlap_ranking,
    AllocationDecision, CandidateScore, GraphAccess, Registry, RegistryError,
    UtilityOutcome,
};
use kgqa_exec::{AnswerSet, Binding, ExecError, LocalExecutor, QueryExecutor, RemoteEndpoint, RemoteExecutor, Rows};
use kgqa_llm::{RecordingBackend, RemoteBackend, Role, RuleBackend, TextBackend, TokenBudget};
use kgqa_nlu::{
    decompose_rule, decompose_with_backend, ClarificationRequest, ClarificationSession, Intent,
    Lexicon, NluError, Outcome, Subgoal,
};
use kgqa_rdf::{Term, TripleStore};
use kgqa_sparql::serialize_sparql;
use kgqa_synthesizer::{synthesize, DependencyValues, SynthesizedQuery, TemplateLibrary};
use kgqa_verifier::{verify, Verdict};
use serde_json::json;
use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, RwLock};
use std::time::Instant;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("clarification needed: {0:?}")]
    ClarificationNeeded(Box<ClarificationRequest>),
    #[error("every subgoal failed or was skipped")]
    AllSubgoalsFailed { trace: Box<PipelineTrace> },
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error(transparent)]
    Nlu(#[from] NluError),
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
}

/// How clarification requests are answered during a run.
pub enum Clarifier<'a> {
    /// Surface the request as an error (non-interactive default).
    FailFast,
    /// Scripted answers, consumed one per round (benchmark corpora).
    Canned(&'a [String]),
    /// Caller-owned prompt loop (the CLI's interactive mode).
    Interactive(&'a mut dyn FnMut(&ClarificationRequest) -> Option<String>),
}

pub struct Pipeline {
    pub config: PipelineConfig,
    registry: RwLock<Registry>,
    stores: BTreeMap<String, Arc<TripleStore>>,
    lexicon: Lexicon,
    templates: TemplateLibrary,
    base_backend: Arc<dyn TextBackend>,
}

type QueryCache = Mutex<HashMap<(String, String), AnswerSet>>;

struct CachingExecutor<'a> {
    inner: Box<dyn QueryExecutor + 'a>,
    cache: &'a QueryCache,
}

impl QueryExecutor for CachingExecutor<'_> {
    fn graph_id(&self) -> &str {
        self.inner.graph_id()
    }

    fn execute(&self, query: &kgqa_sparql::SparqlQuery) -> Result<AnswerSet, ExecError> {
        let key = (self.graph_id().to_string(), serialize_sparql(query));
        if let Some(hit) = self.cache.lock().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let answers = self.inner.execute(query)?;
        self.cache.lock().unwrap().insert(key, answers.clone());
        Ok(answers)
    }
}

/// Outcome of one subgoal's pipeline leg.
struct SubgoalRun {
    trace: SubgoalTrace,
    answers: Vec<SubAnswer>,
    /// Distinct first-projection values, for dependent subgoals.
    dependent_values: Vec<Term>,
    /// Projection variable and answering graph, consumed by dependents.
    projection_var: Option<kgqa_sparql::Variable>,
    answer_graph: Option<String>,
    utility_events: Vec<(String, UtilityOutcome)>,
    answered: bool,
}

/// Everything a dependent subgoal needs from its dependency.
#[derive(Clone, Default)]
struct DepContext {
    dep_id: usize,
    values: Vec<Term>,
    projection_var: Option<kgqa_sparql::Variable>,
    origin_graph: Option<String>,
}

impl Pipeline {
    pub fn from_config(config: PipelineConfig) -> Result<Self, PipelineError> {
        config.validate()?;
        let manifest = load_manifest(&config.registry_path)?;
        let base_dir = config
            .registry_path
            .parent()
            .map(std::path::Path::to_path_buf)
            .unwrap_or_default();
        let registry = registry_from_manifest(&manifest, &base_dir)?;
        let mut stores = BTreeMap::new();
        for entry in registry.entries() {
            if let GraphAccess::Local(store) = &entry.access {
                stores.insert(entry.graph_id.clone(), Arc::clone(store));
            }
        }
        let lexicon = match &config.lexicon_path {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    RegistryError::Manifest(format!("{}: {e}", path.display()))
                })?;
                Lexicon::from_json(&text)
                    .map_err(|e| RegistryError::Manifest(format!("{}: {e}", path.display())))?
            }
            None => kgqa_nlu::default_lexicon(),
        };
        let templates = match &config.template_path {
            Some(path) => TemplateLibrary::from_path(path)
                .map_err(|e| RegistryError::Manifest(e.to_string()))?,
            None => TemplateLibrary::default_library(),
        };
        let base_backend: Arc<dyn TextBackend> = match &config.backend {
            BackendChoice::Rule => {
                let mut backend = RuleBackend::new()
                    .register(Role::Decompose, decompose_rule(lexicon.clone()))
                    .register(Role::Summarize, summarize_rule());
                if let Some(ceiling) = config.token_ceiling {
                    backend = backend.with_budget(TokenBudget::with_ceiling(ceiling));
                }
                Arc::new(backend)
            }
            BackendChoice::Remote { .. } => {
                let remote_config = config.remote_backend_config().expect("remote config");
                Arc::new(RemoteBackend::new(remote_config))
            }
        };
        Ok(Pipeline {
            config,
            registry: RwLock::new(registry),
            stores,
            lexicon,
            templates,
            base_backend,
        })
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    pub fn stores(&self) -> &BTreeMap<String, Arc<TripleStore>> {
        &self.stores
    }

    pub fn with_registry<T>(&self, f: impl FnOnce(&Registry) -> T) -> T {
        f(&self.registry.read().unwrap())
    }

    /// Algorithm: decompose; per subgoal allocate, synthesize, verify,
    /// execute or fall back; aggregate. Returns the consensus answer and
    /// the full trace.
    pub fn answer_question(
        &self,
        question: &str,
        mut clarifier: Clarifier<'_>,
    ) -> Result<(ConsensusAnswer, PipelineTrace), PipelineError> {
        let recorder = RecordingBackend::new(Arc::clone(&self.base_backend));
        let mut trace = PipelineTrace {
            question: question.to_string(),
            ..Default::default()
        };

        // Stage: decompose (or pass the whole question through, ablated).
        let decompose_started = Instant::now();
        let plan = if self.config.ablation.decomposer {
            let mut subgoal = Subgoal::new(1, Intent::EntityLookup);
            subgoal.entity_mentions = vec![question.trim().to_string()];
            vec![subgoal]
        } else {
            self.decompose_with_clarification(question, &mut clarifier, &recorder, &mut trace)?
        };
        trace.plan = plan.clone();
        trace
            .stage_micros
            .insert("decompose".into(), decompose_started.elapsed().as_micros());

        // Stage: per-subgoal legs, scheduled in dependency waves.
        let subgoals_started = Instant::now();
        let cache: QueryCache = Mutex::new(HashMap::new());
        let registry = self.registry.read().unwrap();
        let mut runs: Vec<Option<SubgoalRun>> = (0..plan.len()).map(|_| None).collect();
        let mut depth = vec![0usize; plan.len()];
        for (idx, subgoal) in plan.iter().enumerate() {
            if let Some(dep) = subgoal.depends_on {
                depth[idx] = depth[dep - 1] + 1;
            }
        }
        let max_depth = depth.iter().copied().max().unwrap_or(0);
        for wave in 0..=max_depth {
            let wave_indices: Vec<usize> = (0..plan.len()).filter(|i| depth[*i] == wave).collect();
            let width = self.config.parallelism.max(1);
            for chunk in wave_indices.chunks(width) {
                let results: Vec<(usize, SubgoalRun)> = std::thread::scope(|scope| {
                    let handles: Vec<_> = chunk
                        .iter()
                        .map(|&idx| {
                            let subgoal = &plan[idx];
                            let dep = subgoal.depends_on.map(|dep_id| {
                                runs[dep_id - 1]
                                    .as_ref()
                                    .map(|run| DepContext {
                                        dep_id,
                                        values: run.dependent_values.clone(),
                                        projection_var: run.projection_var.clone(),
                                        origin_graph: run.answer_graph.clone(),
                                    })
                                    .unwrap_or_default()
                            });
                            let registry = &registry;
                            let cache = &cache;
                            scope.spawn(move || {
                                (idx, self.run_subgoal(subgoal, dep, registry, cache))
                            })
                        })
                        .collect();
                    handles.into_iter().map(|h| h.join().unwrap()).collect()
                });
                for (idx, run) in results {
                    runs[idx] = Some(run);
                }
            }
        }
        drop(registry);

        let mut utility_events: Vec<(usize, String, UtilityOutcome)> = Vec::new();
        let mut answers: Vec<SubAnswer> = Vec::new();
        let terminal = |id: usize| plan.iter().all(|g| g.depends_on != Some(id));
        let mut runs_final = Vec::with_capacity(plan.len());
        for (idx, run) in runs.into_iter().enumerate() {
            let run = run.expect("every subgoal ran");
            let subgoal_id = idx + 1;
            for (graph, outcome) in &run.utility_events {
                utility_events.push((subgoal_id, graph.clone(), *outcome));
            }
            if run.answered && terminal(subgoal_id) {
                answers.extend(run.answers.clone());
            }
            runs_final.push(run);
        }
        trace.subgoals = runs_final.into_iter().map(|r| r.trace).collect();
        trace
            .stage_micros
            .insert("subgoals".into(), subgoals_started.elapsed().as_micros());

        // Utility updates apply after the question, in subgoal order, so
        // parallel scheduling cannot change any allocation decision.
        {
            let mut registry = self.registry.write().unwrap();
            utility_events.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
            for (_, graph, outcome) in utility_events {
                let _ = registry.update_utility(&graph, outcome);
            }
        }

        // Stage: aggregate.
        let aggregate_started = Instant::now();
        let table = if self.config.ablation.alignment {
            kgqa_aggregator::AlignmentTable::default()
        } else {
            align_entities(&answers, &self.stores)
        };
        let consensus = match fuse(&answers, &table, &recorder) {
            Ok(consensus) => consensus,
            Err(AggregateError::AllSubgoalsFailed) => {
                trace.tokens = TokenAccounting {
                    calls: recorder.calls(),
                };
                return Err(PipelineError::AllSubgoalsFailed {
                    trace: Box::new(trace),
                });
            }
        };
        trace
            .stage_micros
            .insert("aggregate".into(), aggregate_started.elapsed().as_micros());
        trace.consensus = Some(consensus.to_json());
        trace.tokens = TokenAccounting {
            calls: recorder.calls(),
        };
        Ok((consensus, trace))
    }

    fn decompose_with_clarification(
        &self,
        question: &str,
        clarifier: &mut Clarifier<'_>,
        recorder: &RecordingBackend,
        trace: &mut PipelineTrace,
    ) -> Result<Vec<Subgoal>, PipelineError> {
        let outcome = decompose_with_backend(question, &self.lexicon, recorder)?;
        let request = match outcome {
            Outcome::Plan(plan) => return Ok(plan),
            Outcome::Clarify(request) => request,
        };
        let mut canned_index = 0usize;
        let mut next_answer = |request: &ClarificationRequest,
                               clarifier: &mut Clarifier<'_>|
         -> Option<String> {
            match clarifier {
                Clarifier::FailFast => None,
                Clarifier::Canned(answers) => {
                    let answer = answers.get(canned_index).cloned();
                    canned_index += 1;
                    answer
                }
                Clarifier::Interactive(handler) => handler(request),
            }
        };
        let mut session =
            ClarificationSession::new(question, request.clone(), self.lexicon.clone());
        let mut current = request;
        loop {
            let Some(answer) = next_answer(&current, clarifier) else {
                trace.clarification.push(ClarificationTurn {
                    request: current.clone(),
                    answer: None,
                });
                return Err(PipelineError::ClarificationNeeded(Box::new(current)));
            };
            trace.clarification.push(ClarificationTurn {
                request: current.clone(),
                answer: Some(answer.clone()),
            });
            match session.answer(&answer)? {
                kgqa_nlu::SessionOutcome::Plan { plan, .. } => return Ok(plan),
                kgqa_nlu::SessionOutcome::NeedMore(next) => current = next,
            }
        }
    }

    /// One subgoal's allocate -> synthesize -> verify -> execute leg with
    /// fallback: the chosen graph plus at most two alternates.
    fn run_subgoal(
        &self,
        subgoal: &Subgoal,
        dep: Option<DepContext>,
        registry: &Registry,
        cache: &QueryCache,
    ) -> SubgoalRun {
        let mut trace = SubgoalTrace {
            subgoal_id: subgoal.id,
            attempts: Vec::new(),
            outcome: "skipped".into(),
            skip_reason: None,
        };
        let mut utility_events = Vec::new();

        let deps_values = dep.as_ref().map(|d| DependencyValues {
            values: d.values.clone(),
        });

        // A dependency that produced nothing means this subgoal cannot run.
        if subgoal.depends_on.is_some()
            && deps_values
                .as_ref()
                .map(|d| d.values.is_empty())
                .unwrap_or(true)
        {
            trace.skip_reason = Some("dependency produced no values".into());
            return SubgoalRun {
                trace,
                answers: Vec::new(),
                dependent_values: Vec::new(),
                projection_var: None,
                answer_graph: None,
                utility_events,
                answered: false,
            };
        }

        let decision = match self.allocation_for(subgoal, registry) {
            Ok(decision) => decision,
            Err(e) => {
                trace.skip_reason = Some(e.to_string());
                return SubgoalRun {
                    trace,
                    answers: Vec::new(),
                    dependent_values: Vec::new(),
                    projection_var: None,
                    answer_graph: None,
                    utility_events,
                    answered: false,
                };
            }
        };

        // Fallback policy: the chosen graph plus at most two alternates.
        let candidates: Vec<&CandidateScore> = decision.ranking.iter().take(3).collect();
        let mut last_failure = String::from("no candidate graphs");
        for candidate in candidates {
            let Some(entry) = registry.entry(&candidate.graph_id) else {
                continue;
            };
            let executor = CachingExecutor {
                inner: match &entry.access {
                    GraphAccess::Local(store) => Box::new(LocalExecutor::new(Arc::clone(store))),
                    GraphAccess::Remote { url } => Box::new(RemoteExecutor::new(
                        candidate.graph_id.clone(),
                        RemoteEndpoint::new(url.clone(), std::time::Duration::from_secs(10)),
                    )),
                },
                cache,
            };
            let mut attempt = AttemptTrace {
                graph_id: candidate.graph_id.clone(),
                allocation: json!({
                    "subgoal_id": decision.subgoal_id,
                    "chosen_graph": decision.chosen_graph,
                    "ranking": decision.ranking,
                }),
                queries: Vec::new(),
                outcome: String::new(),
            };

            let synthesized = synthesize(
                subgoal,
                &candidate.grounding,
                &entry.slice,
                &self.lexicon,
                &self.templates,
                deps_values.as_ref(),
                self.config.fanout_cap,
            );
            let synthesized: Vec<SynthesizedQuery> = match synthesized {
                Ok(queries) => queries,
                Err(e) => {
                    attempt.outcome = format!("synthesis failed: {e}");
                    last_failure = attempt.outcome.clone();
                    trace.attempts.push(attempt);
                    continue;
                }
            };

            let mut executed: Vec<(Option<Term>, AnswerSet)> = Vec::new();
            let mut any_verified_fail = false;
            for item in &synthesized {
                let mut query_attempt = QueryAttempt {
                    query_text: serialize_sparql(&item.query),
                    repairs: serde_json::to_value(&item.repairs).unwrap_or(json!({})),
                    verification: None,
                    executed_rows: None,
                    error: None,
                };
                let verdict_pass = if self.config.ablation.verifier {
                    true
                } else {
                    let report = verify(
                        &item.query,
                        &entry.slice,
                        &executor,
                        self.config.perturbations,
                    );
                    query_attempt.verification = Some(report.to_json());
                    let passed = report.verdict == Verdict::Pass;
                    if !passed {
                        any_verified_fail = true;
                    }
                    passed
                };
                if verdict_pass {
                    match executor.execute(&item.query) {
                        Ok(answers) => {
                            query_attempt.executed_rows = Some(answers.rows.len());
                            executed.push((item.seed.clone(), answers));
                        }
                        Err(e) => {
                            query_attempt.error = Some(e.to_string());
                            any_verified_fail = true;
                        }
                    }
                }
                attempt.queries.push(query_attempt);
            }

            let produced_rows = executed.iter().any(|(_, a)| !a.rows.is_empty());
            if !executed.is_empty() {
                // Utility signal for this graph.
                let outcome = if produced_rows {
                    UtilityOutcome::VerifiedPass
                } else {
                    UtilityOutcome::EmptyResult
                };
                utility_events.push((candidate.graph_id.clone(), outcome));
                attempt.outcome = "answered".into();
                let projection_var = executed
                    .first()
                    .and_then(|(_, a)| a.query.projected_variables().first().cloned());
                let answers =
                    self.to_sub_answers(subgoal, &candidate.graph_id, executed, dep.as_ref());
                let dependent_values = dependent_values_of(&answers);
                trace.attempts.push(attempt);
                trace.outcome = format!("answered on {}", candidate.graph_id);
                return SubgoalRun {
                    trace,
                    answers,
                    dependent_values,
                    projection_var,
                    answer_graph: Some(candidate.graph_id.clone()),
                    utility_events,
                    answered: true,
                };
            }

            if any_verified_fail {
                utility_events.push((candidate.graph_id.clone(), UtilityOutcome::VerifiedFail));
            }
            attempt.outcome = "no query passed verification".into();
            last_failure = attempt.outcome.clone();
            trace.attempts.push(attempt);
        }

        trace.skip_reason = Some(last_failure);
        SubgoalRun {
            trace,
            answers: Vec::new(),
            dependent_values: Vec::new(),
            projection_var: None,
            answer_graph: None,
            utility_events,
            answered: false,
        }
    }

    fn allocation_for(
        &self,
        subgoal: &Subgoal,
        registry: &Registry,
    ) -> Result<AllocationDecision, RegistryError> {
        if !self.config.ablation.allocator {
            return allocate(subgoal, registry, self.config.weights, self.config.weak_k);
        }
        // Ablated: raw term-overlap ranking over the whole pool; grounding
        // maps still come from schema alignment so synthesis can proceed.
        if registry.is_empty() {
            return Err(RegistryError::NoViableGraph);
        }
        let overlap = term_overlap_ranking(subgoal, registry);
        let all: Vec<(String, f64)> = overlap
            .iter()
            .map(|(g, count)| (g.clone(), *count as f64))
            .collect();
        let aligned = strong_align(subgoal, &all, registry);
        let ranking: Vec<CandidateScore> = overlap
            .iter()
            .map(|(graph_id, count)| {
                let grounding = aligned
                    .iter()
                    .find(|(g, _, _)| g == graph_id)
                    .map(|(_, _, map)| map.clone())
                    .unwrap_or_default();
                CandidateScore {
                    graph_id: graph_id.clone(),
                    weak: *count as f64,
                    strong: 0.0,
                    utility: 0.0,
                    combined: *count as f64,
                    grounding,
                }
            })
            .collect();
        Ok(AllocationDecision {
            subgoal_id: subgoal.id,
            chosen_graph: ranking[0].graph_id.clone(),
            ranking,
        })
    }

    fn to_sub_answers(
        &self,
        subgoal: &Subgoal,
        graph_id: &str,
        executed: Vec<(Option<Term>, AnswerSet)>,
        dep: Option<&DepContext>,
    ) -> Vec<SubAnswer> {
        let mut out = Vec::new();
        for (seed, answers) in executed {
            let rows: Vec<Binding> = match &answers.rows {
                Rows::Solutions(rows) => rows.clone(),
                Rows::Boolean(b) => {
                    let mut row = Binding::new();
                    row.insert(
                        kgqa_sparql::Variable::new("answer"),
                        Term::typed_literal(
                            b.to_string(),
                            "http://www.w3.org/2001/XMLSchema#boolean",
                        ),
                    );
                    vec![row]
                }
            };
            let (seed_binding, provenance) = match (&seed, dep) {
                (Some(term), Some(dep)) => {
                    // The seed joins under the dependency's projection name.
                    let seed_var = dep
                        .projection_var
                        .clone()
                        .unwrap_or_else(|| kgqa_sparql::Variable::new("seed"));
                    let mut binding = Binding::new();
                    binding.insert(seed_var, term.clone());
                    let mut provenance = Vec::new();
                    if let Some(origin) = &dep.origin_graph {
                        provenance.push((origin.clone(), dep.dep_id));
                    }
                    provenance.push((graph_id.to_string(), subgoal.id));
                    (Some(binding), provenance)
                }
                _ => (None, vec![(graph_id.to_string(), subgoal.id)]),
            };
            out.push(SubAnswer {
                subgoal_id: subgoal.id,
                graph_id: graph_id.to_string(),
                rows,
                seed: seed_binding,
                provenance,
            });
        }
        out
    }
}

fn dependent_values_of(answers: &[SubAnswer]) -> Vec<Term> {
    let mut values = Vec::new();
    for answer in answers {
        for row in &answer.rows {
            if let Some((_, term)) = row.iter().next() {
                if !values.contains(term) {
                    values.push(term.clone());
                }
            }
        }
    }
    values
}
