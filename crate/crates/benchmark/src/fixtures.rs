//! Synthetic fixture generation: three heterogeneous graphs (an industry
//! registry of actors, a waste catalog of resources and cases, and a flow
//! ledger of quantified shipments), two registry manifests (clean and
//! fault-injected metadata), and the benchmark corpora whose gold answers
//! are computed from the generated data itself. Generation is a pure
//! function of the seed; the default seed produces byte-identical files on
//! every run.

use crate::corpus::{save_corpus, BenchmarkItem, GoldAnswer, Tags};
use crate::rng::SplitMix64;
use kgqa_allocator::{save_manifest, ManifestEntry, ManifestKind};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::path::Path;

pub const DEFAULT_SEED: u64 = 20_240_817;

const IR_SCHEMA: &str = "http://example.org/ir/schema#";
const WC_SCHEMA: &str = "http://example.org/wc/schema#";
const FL_SCHEMA: &str = "http://example.org/fl/schema#";
const XSD_INT: &str = "http://www.w3.org/2001/XMLSchema#integer";

const REGIONS: &[&str] = &[
    "bavaria", "saxony", "hesse", "berlin", "hamburg", "bremen", "tyrol", "geneva",
];
const COUNTRIES: &[&str] = &[
    "germany", "france", "poland", "italy", "spain", "austria", "netherlands", "belgium",
];
const MATERIALS: &[&str] = &[
    "rice (paddy)", "wheat grain", "maize", "barley", "aluminium scrap", "copper wire",
    "steel shavings", "glass cullet", "pvc pellets", "waste oil", "paper bales", "wood chips",
    "textile offcuts", "rubber granulate", "electronic boards", "plastic film",
    "compost feedstock", "slag", "fly ash", "spent solvents",
];
const QUALIFIERS: &[&str] = &["", "grade a", "grade b", "mixed", "clean", "sorted", "baled"];
const NAME_PREFIX: &[&str] = &[
    "Rhein", "Alpen", "Nord", "West", "Hansa", "Urban", "Terra", "Eco", "Delta", "Prime",
];
const NAME_MID: &[&str] = &[
    "Werk", "Metall", "Agro", "Recycling", "Umwelt", "Stoff", "Kreis", "Material",
];
const NAME_MID_FL: &[&str] = &["Logistik", "Transport", "Spedition", "Cargo"];
const NAME_SUFFIX: &[&str] = &["GmbH", "AG", "KG", "SARL", "BV"];

const N_ACTORS: usize = 150;
const N_RESOURCES: usize = 140;
const N_CASES: usize = 150;
const N_FLOWS: usize = 400;
const N_FL_ACTORS: usize = 60;
const N_SAMEAS: usize = 40;
const N_DECOY_FLOWS: usize = 6;

struct Actor {
    label: String,
    producer: bool,
    region: String,
    registry_code: String,
    nace: String,
    employees: u64,
    produces: Option<usize>,
}

struct Resource {
    label: String,
    cpa_code: String,
    waste_code: Option<String>,
    hs_codes: Vec<String>,
}

struct Case {
    waste_code: String,
    resource: usize,
}

struct Flow {
    resource: usize,
    quantity: u64,
    from: String,
    to: String,
    waste_code: Option<String>,
    shipper: usize,
    ledger_code: String,
    decoy_registry_code: Option<String>,
}

struct FlActor {
    label: String,
    same_as: Option<usize>,
}

struct World {
    actors: Vec<Actor>,
    resources: Vec<Resource>,
    cases: Vec<Case>,
    flows: Vec<Flow>,
    fl_actors: Vec<FlActor>,
    fl_only_waste_pool: Vec<String>,
}

fn ir_actor_iri(i: usize) -> String {
    format!("http://example.org/ir/actor/a{i:03}")
}

fn wc_resource_iri(code: &str) -> String {
    format!("http://example.org/wc/resource/cpa-{code}")
}

fn wc_case_iri(i: usize) -> String {
    format!("http://example.org/wc/case/c{i:03}")
}

fn fl_flow_iri(i: usize) -> String {
    format!("http://example.org/fl/flow/f{i:04}")
}

fn fl_actor_iri(i: usize) -> String {
    format!("http://example.org/fl/actor/x{i:03}")
}

fn build_world(rng: &mut SplitMix64) -> World {
    // CPA codes: six digits with leading zeros, unique; the first is the
    // pinned product-code/trade-code mapping pair.
    let mut cpa_codes = vec!["011150".to_string()];
    while cpa_codes.len() < N_RESOURCES {
        let code = format!("{:02}{:02}{:02}", rng.below(10), rng.below(100), rng.below(60));
        if !cpa_codes.contains(&code) {
            cpa_codes.push(code);
        }
    }
    // HS codes: the pinned pair first, then unique six-digit codes.
    let mut hs_codes = vec!["100610".to_string()];
    while hs_codes.len() < N_RESOURCES + 4 {
        let code = format!("1{:05}", rng.below(100_000));
        if !hs_codes.contains(&code) {
            hs_codes.push(code);
        }
    }

    let wc_waste_pool: Vec<String> = (0..12)
        .map(|i| format!("02{:02}{:02}", i, 1 + rng.below(9)))
        .collect();
    let fl_only_waste_pool: Vec<String> = (0..8)
        .map(|i| format!("19{:02}{:02}", i, 1 + rng.below(9)))
        .collect();

    let mut resources = Vec::with_capacity(N_RESOURCES);
    for (i, cpa) in cpa_codes.iter().enumerate() {
        let material = MATERIALS[i % MATERIALS.len()];
        let qualifier = QUALIFIERS[(i / MATERIALS.len()) % QUALIFIERS.len()];
        let label = if qualifier.is_empty() {
            material.to_string()
        } else {
            format!("{material} {qualifier}")
        };
        let mut hs = vec![hs_codes[i].clone()];
        // A few resources carry two trade-code annotations.
        if i > 0 && i % 47 == 0 {
            hs.push(hs_codes[N_RESOURCES + (i % 4)].clone());
        }
        resources.push(Resource {
            label,
            cpa_code: cpa.clone(),
            waste_code: if i % 3 == 0 {
                Some(wc_waste_pool[i % wc_waste_pool.len()].clone())
            } else {
                None
            },
            hs_codes: hs,
        });
    }

    let mut actors = Vec::with_capacity(N_ACTORS);
    for i in 0..N_ACTORS {
        let label = format!(
            "{} {} {}",
            NAME_PREFIX[i % NAME_PREFIX.len()],
            NAME_MID[(i / NAME_PREFIX.len()) % NAME_MID.len()],
            NAME_SUFFIX[(i / (NAME_PREFIX.len() * NAME_MID.len())) % NAME_SUFFIX.len()],
        );
        actors.push(Actor {
            label,
            producer: i % 3 != 0,
            region: REGIONS[rng.below(REGIONS.len())].to_string(),
            registry_code: format!("RC-{}", 1000 + i),
            nace: format!("NACE-{:02}.{}", rng.below(99), rng.below(10)),
            employees: 5 + rng.below(900) as u64,
            produces: if i % 2 == 0 {
                Some(rng.below(N_RESOURCES))
            } else {
                None
            },
        });
    }

    let mut cases = Vec::with_capacity(N_CASES);
    for _ in 0..N_CASES {
        cases.push(Case {
            waste_code: wc_waste_pool[rng.below(wc_waste_pool.len())].clone(),
            resource: rng.below(N_RESOURCES),
        });
    }

    let mut fl_actors = Vec::with_capacity(N_FL_ACTORS);
    for i in 0..N_FL_ACTORS {
        if i < N_SAMEAS {
            fl_actors.push(FlActor {
                label: actors[i].label.clone(),
                same_as: Some(i),
            });
        } else {
            fl_actors.push(FlActor {
                label: format!(
                    "{} {} {}",
                    NAME_PREFIX[i % NAME_PREFIX.len()],
                    NAME_MID_FL[i % NAME_MID_FL.len()],
                    NAME_SUFFIX[i % NAME_SUFFIX.len()],
                ),
                same_as: None,
            });
        }
    }

    // Distinct quantities so superlative questions have unique answers.
    let mut quantities: Vec<u64> = (1..=(N_FLOWS as u64 * 9)).collect();
    rng.shuffle(&mut quantities);
    let mut flows = Vec::with_capacity(N_FLOWS);
    for (i, &quantity) in quantities.iter().enumerate().take(N_FLOWS) {
        let waste_code = if i % 2 == 0 {
            let shared = i % 4 == 0;
            Some(if shared {
                wc_waste_pool[rng.below(wc_waste_pool.len())].clone()
            } else {
                fl_only_waste_pool[rng.below(fl_only_waste_pool.len())].clone()
            })
        } else {
            None
        };
        flows.push(Flow {
            resource: rng.below(N_RESOURCES),
            quantity,
            from: COUNTRIES[rng.below(COUNTRIES.len())].to_string(),
            to: COUNTRIES[rng.below(COUNTRIES.len())].to_string(),
            waste_code,
            shipper: rng.below(N_FL_ACTORS),
            ledger_code: format!("LC-{i}"),
            decoy_registry_code: None,
        });
    }
    // Decoy ledger entries referencing registry codes, for the
    // fault-injected corpus.
    for d in 0..N_DECOY_FLOWS {
        let flow = d * 31 % N_FLOWS;
        flows[flow].decoy_registry_code = Some(actors[d * 7 % N_ACTORS].registry_code.clone());
    }

    World {
        actors,
        resources,
        cases,
        flows,
        fl_actors,
        fl_only_waste_pool,
    }
}

fn industry_registry_ttl(world: &World) -> String {
    let mut out = String::new();
    out.push_str("@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .\n");
    out.push_str(&format!("@prefix irs: <{IR_SCHEMA}> .\n\n"));
    out.push_str("irs:Actor rdfs:label \"actor\" .\n");
    out.push_str("irs:Producer rdfs:subClassOf irs:Actor ; rdfs:label \"producer\" .\n");
    out.push_str("irs:Recycler rdfs:subClassOf irs:Actor ; rdfs:label \"recycler\" .\n");
    out.push_str("irs:hasRegistryCode rdfs:label \"registry code\" ; rdfs:domain irs:Actor .\n");
    out.push_str("irs:hasNaceCode rdfs:label \"NACE code\" .\n");
    out.push_str("irs:operatesIn rdfs:label \"region\" .\n");
    out.push_str("irs:employeeCount rdfs:label \"employee count\" .\n");
    out.push_str("irs:produces rdfs:label \"produces\" .\n\n");
    for (i, actor) in world.actors.iter().enumerate() {
        let iri = ir_actor_iri(i);
        let class = if actor.producer { "irs:Producer" } else { "irs:Recycler" };
        out.push_str(&format!("<{iri}> a irs:Actor, {class} ;\n"));
        out.push_str(&format!("  rdfs:label \"{}\" ;\n", actor.label));
        out.push_str(&format!("  irs:operatesIn \"{}\" ;\n", actor.region));
        out.push_str(&format!("  irs:hasRegistryCode \"{}\" ;\n", actor.registry_code));
        out.push_str(&format!("  irs:hasNaceCode \"{}\" ;\n", actor.nace));
        out.push_str(&format!("  irs:employeeCount {}", actor.employees));
        if let Some(resource) = actor.produces {
            out.push_str(&format!(
                " ;\n  irs:produces <{}>",
                wc_resource_iri(&world.resources[resource].cpa_code)
            ));
        }
        out.push_str(" .\n");
    }
    out
}

fn waste_catalog_ttl(world: &World) -> String {
    let mut out = String::new();
    out.push_str("@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .\n");
    out.push_str(&format!("@prefix wcs: <{WC_SCHEMA}> .\n\n"));
    out.push_str("wcs:Resource rdfs:label \"resource\" .\n");
    out.push_str("wcs:Case rdfs:label \"case\" .\n");
    out.push_str("wcs:hasCpaCode rdfs:label \"CPA code\" ; rdfs:domain wcs:Resource .\n");
    out.push_str("wcs:hasWasteCode rdfs:label \"waste code\" .\n");
    out.push_str("wcs:concernsResource rdfs:label \"concerns resource\" .\n\n");
    for resource in &world.resources {
        let iri = wc_resource_iri(&resource.cpa_code);
        out.push_str(&format!("<{iri}> a wcs:Resource ;\n"));
        out.push_str(&format!("  rdfs:label \"{}\" ;\n", resource.label));
        out.push_str(&format!("  wcs:hasCpaCode \"{}\"", resource.cpa_code));
        if let Some(waste) = &resource.waste_code {
            out.push_str(&format!(" ;\n  wcs:hasWasteCode \"{waste}\""));
        }
        out.push_str(" .\n");
    }
    out.push('\n');
    for (i, case) in world.cases.iter().enumerate() {
        let iri = wc_case_iri(i);
        out.push_str(&format!("<{iri}> a wcs:Case ;\n"));
        out.push_str(&format!("  rdfs:label \"case {i}\" ;\n"));
        out.push_str(&format!("  wcs:hasWasteCode \"{}\" ;\n", case.waste_code));
        out.push_str(&format!(
            "  wcs:concernsResource <{}> .\n",
            wc_resource_iri(&world.resources[case.resource].cpa_code)
        ));
    }
    out
}

fn flow_ledger_nt(world: &World) -> String {
    let rdfs_label = "http://www.w3.org/2000/01/rdf-schema#label";
    let rdfs_range = "http://www.w3.org/2000/01/rdf-schema#range";
    let rdf_type = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
    let owl_sameas = "http://www.w3.org/2002/07/owl#sameAs";
    let mut out = String::new();
    let mut line = |s: &str, p: &str, o: &str| {
        out.push_str(&format!("<{s}> <{p}> {o} .\n"));
    };
    let lit = |v: &str| format!("\"{v}\"");
    let int = |v: u64| format!("\"{v}\"^^<{XSD_INT}>");
    let iri = |v: &str| format!("<{v}>");

    for (local, label) in [
        ("Flow", "flow"),
        ("involvesResource", "involves resource"),
        ("quantityTonnes", "quantity"),
        ("fromCountry", "origin country"),
        ("toCountry", "destination country"),
        ("hasWasteCode", "waste code"),
        ("shippedBy", "shipped by"),
        ("hasHsCode", "HS code"),
        ("hasLedgerCode", "ledger code"),
        ("hasRegistryCode", "registry code"),
    ] {
        line(&format!("{FL_SCHEMA}{local}"), rdfs_label, &lit(label));
    }
    line(&format!("{FL_SCHEMA}shippedBy"), rdfs_label, &lit("shipper"));
    line(
        &format!("{FL_SCHEMA}involvesResource"),
        rdfs_range,
        &iri(&format!("{WC_SCHEMA}Resource")),
    );

    // Trade-code annotations on the shared resource IRIs.
    for resource in &world.resources {
        let resource_iri = wc_resource_iri(&resource.cpa_code);
        line(&resource_iri, rdf_type, &iri(&format!("{WC_SCHEMA}Resource")));
        for hs in &resource.hs_codes {
            line(&resource_iri, &format!("{FL_SCHEMA}hasHsCode"), &lit(hs));
        }
    }

    for (i, actor) in world.fl_actors.iter().enumerate() {
        let actor_iri = fl_actor_iri(i);
        line(&actor_iri, rdfs_label, &lit(&actor.label));
        if let Some(ir_idx) = actor.same_as {
            line(&actor_iri, owl_sameas, &iri(&ir_actor_iri(ir_idx)));
        }
    }

    for (i, flow) in world.flows.iter().enumerate() {
        let flow_iri = fl_flow_iri(i);
        line(&flow_iri, rdf_type, &iri(&format!("{FL_SCHEMA}Flow")));
        line(
            &flow_iri,
            &format!("{FL_SCHEMA}involvesResource"),
            &iri(&wc_resource_iri(&world.resources[flow.resource].cpa_code)),
        );
        line(&flow_iri, &format!("{FL_SCHEMA}quantityTonnes"), &int(flow.quantity));
        line(&flow_iri, &format!("{FL_SCHEMA}fromCountry"), &lit(&flow.from));
        line(&flow_iri, &format!("{FL_SCHEMA}toCountry"), &lit(&flow.to));
        line(&flow_iri, &format!("{FL_SCHEMA}hasLedgerCode"), &lit(&flow.ledger_code));
        line(&flow_iri, &format!("{FL_SCHEMA}shippedBy"), &iri(&fl_actor_iri(flow.shipper)));
        if let Some(waste) = &flow.waste_code {
            line(&flow_iri, &format!("{FL_SCHEMA}hasWasteCode"), &lit(waste));
        }
        if let Some(code) = &flow.decoy_registry_code {
            line(&flow_iri, &format!("{FL_SCHEMA}hasRegistryCode"), &lit(code));
        }
    }
    out
}

fn uri_row(pairs: &[(&str, Value)]) -> Value {
    let mut obj = serde_json::Map::new();
    for (k, v) in pairs {
        obj.insert((*k).to_string(), v.clone());
    }
    Value::Object(obj)
}

fn uri(value: &str) -> Value {
    json!({"type": "uri", "value": value})
}

fn plain(value: &str) -> Value {
    json!({"type": "literal", "value": value})
}

fn int_lit(value: u64) -> Value {
    json!({"type": "literal", "value": value.to_string(), "datatype": XSD_INT})
}

fn single_kg(graph: &str, unique: bool) -> Tags {
    Tags {
        kind: "single-kg".into(),
        graphs: vec![graph.to_string()],
        unique_provenance: unique,
    }
}

fn cross_kg(graphs: &[&str], unique: bool) -> Tags {
    Tags {
        kind: "cross-kg".into(),
        graphs: graphs.iter().map(|g| g.to_string()).collect(),
        unique_provenance: unique,
    }
}

fn main_corpus(world: &World, rng: &mut SplitMix64) -> Vec<BenchmarkItem> {
    let mut items = Vec::new();
    let mut id = 0usize;
    let mut next_id = |family: &str| {
        id += 1;
        format!("main-{id:03}-{family}")
    };

    // Resource lookup by CPA code (unique provenance: waste-catalog).
    let mut picks: Vec<usize> = (0..N_RESOURCES).collect();
    rng.shuffle(&mut picks);
    for &r in picks.iter().take(24) {
        let resource = &world.resources[r];
        items.push(BenchmarkItem {
            id: next_id("cpa-lookup"),
            question: format!("Which resources have the CPA code {}?", resource.cpa_code),
            clarification_answer: None,
            gold_query: Some(format!(
                "SELECT ?x WHERE {{ ?x a <{WC_SCHEMA}Resource> . ?x <{WC_SCHEMA}hasCpaCode> \"{}\" }}",
                resource.cpa_code
            )),
            gold_answer: Some(GoldAnswer {
                rows: vec![uri_row(&[("x", uri(&wc_resource_iri(&resource.cpa_code)))])],
                graphs: vec!["waste-catalog".into()],
            }),
            tags: single_kg("waste-catalog", true),
        });
    }

    // Cases by waste code.
    let mut case_codes: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, case) in world.cases.iter().enumerate() {
        case_codes.entry(case.waste_code.as_str()).or_default().push(i);
    }
    for (code, case_ids) in case_codes.iter().take(12) {
        items.push(BenchmarkItem {
            id: next_id("case-waste"),
            question: format!("Which cases have the waste code {code}?"),
            clarification_answer: None,
            gold_query: Some(format!(
                "SELECT ?x WHERE {{ ?x a <{WC_SCHEMA}Case> . ?x <{WC_SCHEMA}hasWasteCode> \"{code}\" }}"
            )),
            gold_answer: Some(GoldAnswer {
                rows: case_ids
                    .iter()
                    .map(|&i| uri_row(&[("x", uri(&wc_case_iri(i)))]))
                    .collect(),
                graphs: vec!["waste-catalog".into()],
            }),
            tags: single_kg("waste-catalog", true),
        });
    }

    // Flows by waste code.
    let mut flow_codes: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, flow) in world.flows.iter().enumerate() {
        if let Some(code) = &flow.waste_code {
            flow_codes.entry(code.as_str()).or_default().push(i);
        }
    }
    for (code, flow_ids) in flow_codes.iter().take(10) {
        items.push(BenchmarkItem {
            id: next_id("flow-waste"),
            question: format!("Which flows have the waste code {code}?"),
            clarification_answer: None,
            gold_query: Some(format!(
                "SELECT ?x WHERE {{ ?x a <{FL_SCHEMA}Flow> . ?x <{FL_SCHEMA}hasWasteCode> \"{code}\" }}"
            )),
            gold_answer: Some(GoldAnswer {
                rows: flow_ids
                    .iter()
                    .map(|&i| uri_row(&[("x", uri(&fl_flow_iri(i)))]))
                    .collect(),
                graphs: vec!["flow-ledger".into()],
            }),
            tags: single_kg("flow-ledger", true),
        });
    }

    // Object lookup: quantity of the flow with a given ledger code.
    let mut flow_picks: Vec<usize> = (0..N_FLOWS).collect();
    rng.shuffle(&mut flow_picks);
    for &f in flow_picks.iter().take(10) {
        let flow = &world.flows[f];
        items.push(BenchmarkItem {
            id: next_id("quantity-of"),
            question: format!(
                "What is the quantity of the flow with the ledger code {}?",
                flow.ledger_code
            ),
            clarification_answer: None,
            gold_query: Some(format!(
                "SELECT ?y WHERE {{ ?x <{FL_SCHEMA}hasLedgerCode> \"{}\" . ?x <{FL_SCHEMA}quantityTonnes> ?y }}",
                flow.ledger_code
            )),
            gold_answer: Some(GoldAnswer {
                rows: vec![uri_row(&[("y", int_lit(flow.quantity))])],
                graphs: vec!["flow-ledger".into()],
            }),
            tags: single_kg("flow-ledger", true),
        });
    }

    // Aggregations.
    let producer_count = world.actors.iter().filter(|a| a.producer).count();
    let aggregates: Vec<(String, String, usize, String)> = vec![
        (
            "How many actors are in the industry registry?".into(),
            format!("{IR_SCHEMA}Actor"),
            N_ACTORS,
            "industry-registry".into(),
        ),
        (
            "How many producers are in the industry registry?".into(),
            format!("{IR_SCHEMA}Producer"),
            producer_count,
            "industry-registry".into(),
        ),
        (
            "How many recyclers are in the industry registry?".into(),
            format!("{IR_SCHEMA}Recycler"),
            N_ACTORS - producer_count,
            "industry-registry".into(),
        ),
        (
            "How many resources are in the waste catalog?".into(),
            format!("{WC_SCHEMA}Resource"),
            N_RESOURCES,
            "waste-catalog".into(),
        ),
        (
            "How many cases are in the waste catalog?".into(),
            format!("{WC_SCHEMA}Case"),
            N_CASES,
            "waste-catalog".into(),
        ),
        (
            "How many flows are in the flow ledger?".into(),
            format!("{FL_SCHEMA}Flow"),
            N_FLOWS,
            "flow-ledger".into(),
        ),
    ];
    for (question, class, count, graph) in aggregates {
        items.push(BenchmarkItem {
            id: next_id("aggregate"),
            question,
            clarification_answer: None,
            gold_query: Some(format!(
                "SELECT (COUNT(?x) AS ?n) WHERE {{ ?x a <{class}> }}"
            )),
            gold_answer: Some(GoldAnswer {
                rows: vec![uri_row(&[("n", int_lit(count as u64))])],
                graphs: vec![graph.clone()],
            }),
            tags: single_kg(&graph, true),
        });
    }

    // Condition filters over quantities.
    let mut sorted_quantities: Vec<u64> = world.flows.iter().map(|f| f.quantity).collect();
    sorted_quantities.sort_unstable();
    let ops: [(&str, &str); 4] = [
        ("greater than", ">"),
        ("less than", "<"),
        ("at least", ">="),
        ("at most", "<="),
    ];
    for k in 0..16 {
        let (phrase, symbol) = ops[k % ops.len()];
        // Thresholds strictly inside the value range keep every gold
        // non-empty.
        let threshold =
            sorted_quantities[N_FLOWS / 8 + (k * N_FLOWS * 3 / 4) / 16] + (k as u64 % 2);
        let matches: Vec<usize> = world
            .flows
            .iter()
            .enumerate()
            .filter(|(_, f)| match symbol {
                ">" => f.quantity > threshold,
                "<" => f.quantity < threshold,
                ">=" => f.quantity >= threshold,
                _ => f.quantity <= threshold,
            })
            .map(|(i, _)| i)
            .collect();
        items.push(BenchmarkItem {
            id: next_id("condition"),
            question: format!("Which flows have a quantity {phrase} {threshold}?"),
            clarification_answer: None,
            gold_query: Some(format!(
                "SELECT ?x WHERE {{ ?x a <{FL_SCHEMA}Flow> . ?x <{FL_SCHEMA}quantityTonnes> ?v . FILTER(?v {symbol} {threshold}) }}"
            )),
            gold_answer: Some(GoldAnswer {
                rows: matches
                    .iter()
                    .map(|&i| uri_row(&[("x", uri(&fl_flow_iri(i)))]))
                    .collect(),
                graphs: vec!["flow-ledger".into()],
            }),
            tags: single_kg("flow-ledger", true),
        });
    }

    // Superlatives.
    let (max_idx, _) = world
        .flows
        .iter()
        .enumerate()
        .max_by_key(|(_, f)| f.quantity)
        .unwrap();
    let (min_idx, _) = world
        .flows
        .iter()
        .enumerate()
        .min_by_key(|(_, f)| f.quantity)
        .unwrap();
    for (direction, idx, order) in [("highest", max_idx, "DESC"), ("lowest", min_idx, "ASC")] {
        items.push(BenchmarkItem {
            id: next_id("superlative"),
            question: format!("Which flow has the {direction} quantity?"),
            clarification_answer: None,
            gold_query: Some(format!(
                "SELECT ?x WHERE {{ ?x a <{FL_SCHEMA}Flow> . ?x <{FL_SCHEMA}quantityTonnes> ?v }} ORDER BY {order}(?v) LIMIT 1"
            )),
            gold_answer: Some(GoldAnswer {
                rows: vec![uri_row(&[("x", uri(&fl_flow_iri(idx)))])],
                graphs: vec!["flow-ledger".into()],
            }),
            tags: single_kg("flow-ledger", true),
        });
    }

    // Cross-graph co-occurrence: CPA code in the catalog, trade codes in
    // the ledger annotations.
    let mut cooccur_picks: Vec<usize> = (0..N_RESOURCES).collect();
    rng.shuffle(&mut cooccur_picks);
    for &r in cooccur_picks.iter().take(12) {
        let resource = &world.resources[r];
        items.push(BenchmarkItem {
            id: next_id("cooccur"),
            question: format!(
                "Which HS codes co-occur with the CPA code {}?",
                resource.cpa_code
            ),
            clarification_answer: None,
            gold_query: None,
            gold_answer: Some(GoldAnswer {
                rows: resource
                    .hs_codes
                    .iter()
                    .map(|hs| {
                        uri_row(&[
                            ("x", uri(&wc_resource_iri(&resource.cpa_code))),
                            ("y", plain(hs)),
                        ])
                    })
                    .collect(),
                graphs: vec!["waste-catalog".into(), "flow-ledger".into()],
            }),
            tags: cross_kg(&["waste-catalog", "flow-ledger"], true),
        });
    }

    // The clarification walkthrough: ambiguous product-code question,
    // clarified to the pinned CPA code, answered across both graphs.
    items.push(BenchmarkItem {
        id: next_id("clarified-mapping"),
        question: "For product code found in the resources, which trade codes co-occur with it?"
            .into(),
        clarification_answer: Some("CPA code 011150".into()),
        gold_query: None,
        gold_answer: Some(GoldAnswer {
            rows: vec![uri_row(&[
                ("x", uri(&wc_resource_iri("011150"))),
                ("y", plain("100610")),
            ])],
            graphs: vec!["waste-catalog".into(), "flow-ledger".into()],
        }),
        tags: cross_kg(&["waste-catalog", "flow-ledger"], false),
    });

    // Independent conjunctions.
    let conjunction_pairs = [
        (
            "How many actors are in the industry registry and how many flows are in the flow ledger?",
            N_ACTORS as u64,
            N_FLOWS as u64,
            ["industry-registry", "flow-ledger"],
        ),
        (
            "How many resources are in the waste catalog and how many flows are in the flow ledger?",
            N_RESOURCES as u64,
            N_FLOWS as u64,
            ["waste-catalog", "flow-ledger"],
        ),
        (
            "How many cases are in the waste catalog and how many actors are in the industry registry?",
            N_CASES as u64,
            N_ACTORS as u64,
            ["waste-catalog", "industry-registry"],
        ),
        (
            "How many producers are in the industry registry and how many cases are in the waste catalog?",
            producer_count as u64,
            N_CASES as u64,
            ["industry-registry", "waste-catalog"],
        ),
    ];
    for (question, count1, count2, graphs) in conjunction_pairs {
        // Fusion collapses duplicate rows, so equal counts fuse into one.
        let mut rows = vec![uri_row(&[("n", int_lit(count1))])];
        let second = uri_row(&[("n", int_lit(count2))]);
        if !rows.contains(&second) {
            rows.push(second);
        }
        items.push(BenchmarkItem {
            id: next_id("conjunction"),
            question: question.into(),
            clarification_answer: None,
            gold_query: None,
            gold_answer: Some(GoldAnswer {
                rows,
                graphs: graphs.iter().map(|g| g.to_string()).collect(),
            }),
            tags: cross_kg(&graphs, false),
        });
    }

    // Shipper alignment: the same company under two IRIs linked by sameAs.
    let mut shipper_items = 0usize;
    for (flow_idx, flow) in world.flows.iter().enumerate() {
        if shipper_items == 3 {
            break;
        }
        let shipper = &world.fl_actors[flow.shipper];
        let Some(ir_idx) = shipper.same_as else {
            continue;
        };
        // Ledger codes are unique per flow, so the shipper lookup is
        // single-row by construction.
        let fl_iri = fl_actor_iri(flow.shipper);
        let ir_iri = ir_actor_iri(ir_idx);
        let representative = if fl_iri < ir_iri { &fl_iri } else { &ir_iri };
        items.push(BenchmarkItem {
            id: next_id("alignment"),
            question: format!(
                "What is the shipper of the flow with the ledger code {} and which actors have the registry code {}?",
                flow.ledger_code, world.actors[ir_idx].registry_code
            ),
            clarification_answer: None,
            gold_query: None,
            gold_answer: Some(GoldAnswer {
                rows: vec![
                    uri_row(&[("x", uri(representative))]),
                    uri_row(&[("y", uri(representative))]),
                ],
                graphs: vec!["flow-ledger".into(), "industry-registry".into()],
            }),
            tags: cross_kg(&["flow-ledger", "industry-registry"], false),
        });
        shipper_items += 1;
        let _ = flow_idx;
    }

    // Grouped aggregation.
    for (question, predicate, selector) in [
        (
            "How many flows per destination country?",
            format!("{FL_SCHEMA}toCountry"),
            true,
        ),
        (
            "How many flows per origin country?",
            format!("{FL_SCHEMA}fromCountry"),
            false,
        ),
    ] {
        let mut per: BTreeMap<&str, u64> = BTreeMap::new();
        for flow in &world.flows {
            let key = if selector { flow.to.as_str() } else { flow.from.as_str() };
            *per.entry(key).or_insert(0) += 1;
        }
        items.push(BenchmarkItem {
            id: next_id("grouped"),
            question: question.into(),
            clarification_answer: None,
            gold_query: Some(format!(
                "SELECT ?g (COUNT(?x) AS ?n) WHERE {{ ?x a <{FL_SCHEMA}Flow> . ?x <{predicate}> ?g }} GROUP BY ?g"
            )),
            gold_answer: Some(GoldAnswer {
                rows: per
                    .iter()
                    .map(|(country, count)| {
                        uri_row(&[("g", plain(country)), ("n", int_lit(*count))])
                    })
                    .collect(),
                graphs: vec!["flow-ledger".into()],
            }),
            tags: single_kg("flow-ledger", true),
        });
    }

    items
}

fn faulted_corpus(world: &World) -> Vec<BenchmarkItem> {
    let mut items = Vec::new();
    let mut id = 0usize;
    let mut next_id = |family: &str| {
        id += 1;
        format!("fault-{id:03}-{family}")
    };

    // Empty-on-first-choice items: the value exists only in the ledger, but
    // the doctored catalog metadata wins the weak tier. The verifier's
    // preliminary check plus fallback rescues the full pipeline.
    let mut fl_code_flows: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, flow) in world.flows.iter().enumerate() {
        if let Some(code) = &flow.waste_code {
            if world.fl_only_waste_pool.iter().any(|c| c == code) {
                fl_code_flows.entry(code.as_str()).or_default().push(i);
            }
        }
    }
    for (code, flow_ids) in fl_code_flows.iter().take(6) {
        items.push(BenchmarkItem {
            id: next_id("empty-decoy"),
            question: format!("Which entries have the waste code {code}?"),
            clarification_answer: None,
            gold_query: None,
            gold_answer: Some(GoldAnswer {
                rows: flow_ids
                    .iter()
                    .map(|&i| uri_row(&[("x", uri(&fl_flow_iri(i)))]))
                    .collect(),
                graphs: vec!["flow-ledger".into()],
            }),
            tags: single_kg("flow-ledger", false),
        });
    }

    // Wrong-but-nonempty items: ledger entries carry decoy registry codes
    // under an identically labeled predicate, so schema-blind ranking
    // returns plausible rows from the wrong graph that verify cleanly.
    let mut seen = Vec::new();
    for flow in &world.flows {
        if let Some(code) = &flow.decoy_registry_code {
            if seen.contains(code) {
                continue;
            }
            seen.push(code.clone());
            let actor_idx = world
                .actors
                .iter()
                .position(|a| &a.registry_code == code)
                .expect("decoy codes copy real registry codes");
            items.push(BenchmarkItem {
                id: next_id("overlap-decoy"),
                question: format!("Which actors have the registry code {code}?"),
                clarification_answer: None,
                gold_query: Some(format!(
                    "SELECT ?x WHERE {{ ?x a <{IR_SCHEMA}Actor> . ?x <{IR_SCHEMA}hasRegistryCode> \"{code}\" }}"
                )),
                gold_answer: Some(GoldAnswer {
                    rows: vec![uri_row(&[("x", uri(&ir_actor_iri(actor_idx)))])],
                    graphs: vec!["industry-registry".into()],
                }),
                tags: single_kg("industry-registry", false),
            });
        }
    }

    items
}

fn manifests(faulted: bool) -> Vec<ManifestEntry> {
    let ir_metadata = "industry registry of industrial actors producers and recyclers \
                       with registry codes NACE codes regions and employee counts";
    let wc_metadata_clean = "waste catalog of resources and exchange cases annotated with \
                             CPA product classification codes and waste classification codes";
    let wc_metadata_faulted = "waste catalog of resources and exchange cases annotated with \
                               CPA product classification codes and waste classification codes; \
                               entries listed with waste code identifiers covering all entries";
    let fl_metadata_clean = "flow ledger of shipment flows with quantities in tonnes origin and \
                             destination countries waste codes ledger codes and HS trade codes";
    let fl_metadata_faulted = "flow ledger of shipment flows with quantities in tonnes origin and \
                               destination countries waste codes ledger codes and HS trade codes; \
                               directory of actors with registry code RC references";
    vec![
        ManifestEntry {
            graph_id: "flow-ledger".into(),
            kind: ManifestKind::File,
            path: "graphs/flow-ledger.nt".into(),
            metadata: if faulted { fl_metadata_faulted } else { fl_metadata_clean }.into(),
            sources: vec!["sources/flow-ledger-ontology.txt".into()],
            schema: None,
        },
        ManifestEntry {
            graph_id: "industry-registry".into(),
            kind: ManifestKind::File,
            path: "graphs/industry-registry.ttl".into(),
            metadata: ir_metadata.into(),
            sources: vec!["sources/industry-registry-ontology.txt".into()],
            schema: None,
        },
        ManifestEntry {
            graph_id: "waste-catalog".into(),
            kind: ManifestKind::File,
            path: "graphs/waste-catalog.ttl".into(),
            metadata: if faulted { wc_metadata_faulted } else { wc_metadata_clean }.into(),
            sources: vec!["sources/waste-catalog-ontology.txt".into()],
            schema: None,
        },
    ]
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct FixtureSummary {
    pub triple_counts: BTreeMap<String, usize>,
    pub corpus_items: usize,
    pub faulted_items: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum FixtureError {
    #[error("fixture io: {0}")]
    Io(#[from] std::io::Error),
    #[error("fixture corpus: {0}")]
    Corpus(#[from] crate::corpus::CorpusError),
    #[error("fixture manifest: {0}")]
    Registry(#[from] kgqa_allocator::RegistryError),
}

/// Generates the full fixture set under `dir`. Deterministic in `seed`.
pub fn make_fixtures(dir: &Path, seed: u64) -> Result<FixtureSummary, FixtureError> {
    let mut rng = SplitMix64::new(seed);
    let world = build_world(&mut rng);

    std::fs::create_dir_all(dir.join("graphs"))?;
    std::fs::create_dir_all(dir.join("sources"))?;

    let ir = industry_registry_ttl(&world);
    let wc = waste_catalog_ttl(&world);
    let fl = flow_ledger_nt(&world);
    std::fs::write(dir.join("graphs/industry-registry.ttl"), &ir)?;
    std::fs::write(dir.join("graphs/waste-catalog.ttl"), &wc)?;
    std::fs::write(dir.join("graphs/flow-ledger.nt"), &fl)?;

    std::fs::write(
        dir.join("sources/industry-registry-ontology.txt"),
        "The industry registry ontology describes industrial actors, producers and recyclers, \
         each carrying a registry code, a NACE code, an operating region and an employee count.\n",
    )?;
    std::fs::write(
        dir.join("sources/waste-catalog-ontology.txt"),
        "The waste catalog ontology covers resources and exchange cases. Resources carry CPA \
         product classification codes; cases and some resources carry waste classification codes.\n",
    )?;
    std::fs::write(
        dir.join("sources/flow-ledger-ontology.txt"),
        "The flow ledger ontology records shipment flows with quantities in tonnes, origin and \
         destination countries, ledger codes and shippers. Resources are annotated with HS trade \
         codes for cross-border classification.\n",
    )?;

    save_manifest(&dir.join("registry.json"), &manifests(false))?;
    save_manifest(&dir.join("registry-faulted.json"), &manifests(true))?;

    let corpus = main_corpus(&world, &mut rng);
    let faulted = faulted_corpus(&world);
    save_corpus(&dir.join("corpus.jsonl"), &corpus)?;
    save_corpus(&dir.join("corpus-faulted.jsonl"), &faulted)?;

    std::fs::write(dir.join("lexicon.json"), kgqa_nlu::DEFAULT_LEXICON_JSON)?;
    std::fs::write(
        dir.join("templates.json"),
        kgqa_synthesizer::DEFAULT_TEMPLATES_JSON,
    )?;

    let count_triples = |text: &str, turtle: bool| -> usize {
        if turtle {
            // Statement count equals parsed triples; cheap and exact.
            kgqa_rdf::parse_turtle(text).map(|t| t.len()).unwrap_or(0)
        } else {
            text.lines().filter(|l| !l.trim().is_empty()).count()
        }
    };
    let mut triple_counts = BTreeMap::new();
    triple_counts.insert("industry-registry".to_string(), count_triples(&ir, true));
    triple_counts.insert("waste-catalog".to_string(), count_triples(&wc, true));
    triple_counts.insert("flow-ledger".to_string(), count_triples(&fl, false));

    Ok(FixtureSummary {
        triple_counts,
        corpus_items: corpus.len(),
        faulted_items: faulted.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn temp_dir(tag: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join(format!("kgqa-fixtures-{tag}-{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&dir);
        std::fs::create_dir_all(&dir).unwrap();
        dir
    }

    #[test]
    fn generation_is_byte_identical_across_runs() {
        let dir_a = temp_dir("a");
        let dir_b = temp_dir("b");
        make_fixtures(&dir_a, DEFAULT_SEED).unwrap();
        make_fixtures(&dir_b, DEFAULT_SEED).unwrap();
        for file in [
            "graphs/industry-registry.ttl",
            "graphs/waste-catalog.ttl",
            "graphs/flow-ledger.nt",
            "registry.json",
            "registry-faulted.json",
            "corpus.jsonl",
            "corpus-faulted.jsonl",
        ] {
            let a = std::fs::read(dir_a.join(file)).unwrap();
            let b = std::fs::read(dir_b.join(file)).unwrap();
            assert_eq!(a, b, "{file} differs between runs");
        }
        let _ = std::fs::remove_dir_all(&dir_a);
        let _ = std::fs::remove_dir_all(&dir_b);
    }

    #[test]
    fn graph_sizes_within_documented_bounds() {
        let dir = temp_dir("sizes");
        let summary = make_fixtures(&dir, DEFAULT_SEED).unwrap();
        let total: usize = summary.triple_counts.values().sum();
        for (graph, count) in &summary.triple_counts {
            assert!(
                (1_000..=5_000).contains(count),
                "{graph} has {count} triples, outside 1k-5k"
            );
        }
        assert!(total <= 15_000, "total {total} exceeds 15k");
        assert!(summary.corpus_items >= 100);
        assert!(summary.faulted_items >= 10);
        let _ = std::fs::remove_dir_all(&dir);
    }

    #[test]
    fn graphs_parse_and_corpus_loads() {
        let dir = temp_dir("parse");
        make_fixtures(&dir, DEFAULT_SEED).unwrap();
        let ir = std::fs::read_to_string(dir.join("graphs/industry-registry.ttl")).unwrap();
        assert!(kgqa_rdf::parse_turtle(&ir).unwrap().len() > 900);
        let fl = std::fs::read_to_string(dir.join("graphs/flow-ledger.nt")).unwrap();
        assert!(kgqa_rdf::parse_ntriples(&fl).unwrap().len() > 2_000);
        let corpus = crate::corpus::load_corpus(&dir.join("corpus.jsonl")).unwrap();
        assert!(corpus.iter().any(|i| i.clarification_answer.is_some()));
        // The pinned mapping item is present.
        assert!(corpus.iter().any(|i| i
            .gold_answer
            .as_ref()
            .is_some_and(|g| g.rows.iter().any(|r| r.to_string().contains("100610")))));
        let _ = std::fs::remove_dir_all(&dir);
    }
}
