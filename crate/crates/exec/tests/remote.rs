//! SPARQL Protocol client behavior against a canned local HTTP server.

use kgqa_exec::{evaluate_remote, ExecError, RemoteEndpoint, Rows};
use kgqa_sparql::parse_sparql;
use std::io::{Read, Write};
use std::net::TcpListener;
use std::time::Duration;

/// Serves one canned HTTP response on an ephemeral port.
fn one_shot_server(status: u16, content_type: &str, body: &str) -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let body = body.to_string();
    let content_type = content_type.to_string();
    std::thread::spawn(move || {
        if let Ok((mut stream, _)) = listener.accept() {
            let mut buf = [0u8; 4096];
            let _ = stream.read(&mut buf);
            let reason = if status == 200 { "OK" } else { "Error" };
            let response = format!(
                "HTTP/1.1 {status} {reason}\r\nContent-Type: {content_type}\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            );
            let _ = stream.write_all(response.as_bytes());
        }
    });
    format!("http://{addr}/sparql")
}

#[test]
fn decodes_canned_two_row_result() {
    let body = r#"{
        "head": {"vars": ["x"]},
        "results": {"bindings": [
            {"x": {"type": "uri", "value": "http://ex/a"}},
            {"x": {"type": "literal", "value": "5", "datatype": "http://www.w3.org/2001/XMLSchema#integer"}}
        ]}
    }"#;
    let url = one_shot_server(200, "application/sparql-results+json", body);
    let query = parse_sparql("SELECT ?x WHERE { ?x <http://ex/p> ?y }").unwrap();
    let endpoint = RemoteEndpoint::new(url, Duration::from_secs(2));
    let answers = evaluate_remote(&query, &endpoint, "remote-g").unwrap();
    match answers.rows {
        Rows::Solutions(rows) => assert_eq!(rows.len(), 2),
        other => panic!("expected solutions, got {other:?}"),
    }
    assert_eq!(answers.graph_id, "remote-g");
}

#[test]
fn unreachable_endpoint_is_a_network_error() {
    // Port 9 (discard) on localhost is almost certainly closed; connection
    // is refused immediately, well inside the timeout.
    let query = parse_sparql("ASK { ?x ?p ?y }").unwrap();
    let endpoint = RemoteEndpoint::new("http://127.0.0.1:9/sparql", Duration::from_millis(500));
    match evaluate_remote(&query, &endpoint, "g") {
        Err(ExecError::Network { endpoint, .. }) => {
            assert!(endpoint.contains("127.0.0.1:9"));
        }
        other => panic!("expected network error, got {other:?}"),
    }
}

#[test]
fn http_500_is_a_protocol_error_with_status() {
    let url = one_shot_server(500, "text/plain", "boom");
    let query = parse_sparql("ASK { ?x ?p ?y }").unwrap();
    let endpoint = RemoteEndpoint::new(url, Duration::from_secs(2));
    match evaluate_remote(&query, &endpoint, "g") {
        Err(ExecError::Protocol { status, .. }) => assert_eq!(status, 500),
        other => panic!("expected protocol error, got {other:?}"),
    }
}

#[test]
fn undecodable_body_is_a_protocol_error() {
    let url = one_shot_server(200, "application/sparql-results+json", "not json at all");
    let query = parse_sparql("ASK { ?x ?p ?y }").unwrap();
    let endpoint = RemoteEndpoint::new(url, Duration::from_secs(2));
    assert!(matches!(
        evaluate_remote(&query, &endpoint, "g"),
        Err(ExecError::Protocol { .. })
    ));
}

#[test]
fn boolean_results_decode() {
    let url = one_shot_server(200, "application/sparql-results+json", r#"{"head":{},"boolean":true}"#);
    let query = parse_sparql("ASK { ?x ?p ?y }").unwrap();
    let endpoint = RemoteEndpoint::new(url, Duration::from_secs(2));
    let answers = evaluate_remote(&query, &endpoint, "g").unwrap();
    assert_eq!(answers.rows, Rows::Boolean(true));
}
