//! HTTP transport against a minimal local endpoint.

use mck_evolve::agent::{Agent, HttpAgent};
use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;

/// Serve canned JSON bodies for a fixed number of POSTs, recording the
/// request bodies.
fn serve(listener: TcpListener, bodies: Vec<String>) -> std::thread::JoinHandle<Vec<String>> {
    std::thread::spawn(move || {
        let mut seen = Vec::new();
        for body in bodies {
            let (stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream);
            let mut content_length = 0usize;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                let line = line.trim_end();
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    content_length = v.trim().parse().unwrap();
                }
                if line.is_empty() {
                    break;
                }
            }
            let mut request = vec![0u8; content_length];
            reader.read_exact(&mut request).unwrap();
            seen.push(String::from_utf8_lossy(&request).into_owned());
            let mut stream = reader.into_inner();
            let response = format!(
                "HTTP/1.1 200 OK\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
                body.len()
            );
            stream.write_all(response.as_bytes()).unwrap();
        }
        seen
    })
}

#[test]
fn http_agent_round_trips_propose_and_diagnose() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let propose_body = serde_json::json!({
        "patch": "--- a/x.txt\n+++ b/x.txt\n@@ -1 +1 @@\n-a\n+b\n",
        "hypothesis": {
            "schema": "hypothesis_v1",
            "primary_slot": "push_prop",
            "fallback": "revert"
        }
    })
    .to_string();
    // The evaluator answer arrives inside a markdown fence, as live models
    // tend to do; the transport must unwrap it.
    let diagnose_body = format!(
        "```json\n{}\n```",
        serde_json::json!({
            "schema": "diagnosis_v1",
            "decision": "RETRY",
            "reasons": [
                { "name": "a", "value": 1.0 },
                { "name": "b", "value": 2.0 },
                { "name": "c", "value": 3.0 }
            ],
            "evidence": "served over http",
            "moveset": { "moves": [] }
        })
    );
    let server = serve(listener, vec![propose_body, diagnose_body]);

    let mut agent = HttpAgent::new(
        format!("http://{addr}/agent"),
        "test-model".to_string(),
        std::time::Duration::from_secs(5),
    );
    let p = agent.propose("improve the push loop").unwrap();
    assert_eq!(p.hypothesis.primary_slot, "push_prop");
    assert!(p.patch.contains("+b"));
    let d = agent.diagnose("evaluate the diff").unwrap();
    assert_eq!(d.decision, mck_evolve::Decision::Retry);
    assert_eq!(d.evidence, "served over http");

    let requests = server.join().unwrap();
    assert_eq!(requests.len(), 2);
    let first: serde_json::Value = serde_json::from_str(&requests[0]).unwrap();
    assert_eq!(first["role"], "programmer");
    assert_eq!(first["model"], "test-model");
    assert_eq!(first["prompt"], "improve the push loop");
    let second: serde_json::Value = serde_json::from_str(&requests[1]).unwrap();
    assert_eq!(second["role"], "evaluator");
}

#[test]
fn transport_failure_is_reported_not_fatal() {
    // Nothing listens here.
    let mut agent = HttpAgent::new(
        "http://127.0.0.1:1/agent".to_string(),
        "m".to_string(),
        std::time::Duration::from_millis(200),
    );
    let err = agent.propose("x").unwrap_err();
    assert!(matches!(err, mck_evolve::AgentError::Transport(_)));
}
