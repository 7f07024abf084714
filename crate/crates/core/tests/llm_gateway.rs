use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use riskprobe::llm_gateway::{
    read_response_log, Gateway, GatewayError, GatewayOptions, HttpChatProvider, LlmRequest, MockProvider, ProviderError,
    ProviderReply,
};
use riskprobe::{ProbeInstance, TaskKind};

fn opts() -> GatewayOptions {
    GatewayOptions { initial_backoff: Duration::from_millis(1), ..Default::default() }
}

fn instances(n: usize) -> Vec<ProbeInstance> {
    (0..n)
        .map(|i| ProbeInstance {
            id: format!("cqa-{i:04}"),
            task: TaskKind::CommonsenseQa,
            context: String::new(),
            instruction: String::new(),
            prompt: format!("Please explain the term t{i}."),
            reference: String::new(),
            factors: BTreeMap::new(),
        })
        .collect()
}

#[test]
fn fixed_text_is_recorded_verbatim_and_cached() {
    let dir = tempfile::tempdir().unwrap();
    let mock = Arc::new(MockProvider::fixed("  raw\ttext\n"));
    let gw = Gateway::new(Box::new(mock.clone()), dir.path().join("cache"), opts());
    let req = LlmRequest::new("mock", "hello");
    let first = gw.complete(&req).unwrap();
    assert_eq!(first.raw_text, "  raw\ttext\n");
    assert_eq!(first.attempt_count, 1);
    let second = gw.complete(&req).unwrap();
    assert_eq!(first, second);
    assert_eq!(mock.calls(), 1);

    let fresh = Gateway::new(Box::new(mock.clone()), dir.path().join("cache"), GatewayOptions { fresh: true, ..opts() });
    fresh.complete(&req).unwrap();
    assert_eq!(mock.calls(), 2);
}

#[test]
fn transient_failures_retry_then_exhaust() {
    let dir = tempfile::tempdir().unwrap();
    let n = Arc::new(AtomicUsize::new(0));
    let k = n.clone();
    let flaky = MockProvider::new(move |_| {
        if k.fetch_add(1, Ordering::SeqCst) < 2 {
            Err(ProviderError::Transient("503".into()))
        } else {
            Ok(ProviderReply::text("ok"))
        }
    });
    let gw = Gateway::new(Box::new(flaky), dir.path(), opts());
    let r = gw.complete(&LlmRequest::new("m", "x")).unwrap();
    assert_eq!(r.attempt_count, 3);

    let dead = Gateway::new(Box::new(MockProvider::new(|_| Err(ProviderError::Transient("429".into())))), dir.path(), opts());
    match dead.complete(&LlmRequest::new("m", "y")) {
        Err(GatewayError::TransientExhausted { attempts: 5, .. }) => {}
        other => panic!("{other:?}"),
    }
    assert_eq!(dead.provider_calls(), 5);
}

#[test]
fn auth_failure_is_not_retried() {
    let dir = tempfile::tempdir().unwrap();
    let gw = Gateway::new(Box::new(MockProvider::new(|_| Err(ProviderError::Auth("401".into())))), dir.path(), opts());
    assert!(matches!(gw.complete(&LlmRequest::new("m", "x")), Err(GatewayError::AuthError(_))));
    assert_eq!(gw.provider_calls(), 1);
}

#[test]
fn batch_records_every_instance_and_reruns_hit_cache() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("responses.jsonl");
    let mock = Arc::new(MockProvider::new(|r| {
        if r.messages[0].content.contains("t3.") {
            Err(ProviderError::Fatal("bad request".into()))
        } else {
            Ok(ProviderReply::text(format!("echo {}", r.messages[0].content)))
        }
    }));
    let gw = Gateway::new(Box::new(mock.clone()), dir.path().join("cache"), opts());
    let inst = instances(10);
    let out = gw.batch_run(&inst, "mock", 4, &log).unwrap();
    assert_eq!(out.len(), 10);
    assert_eq!(out.iter().filter(|e| e.response.is_some()).count(), 9);
    assert!(out[3].error.is_some());
    for (e, i) in out.iter().zip(&inst) {
        assert_eq!(e.instance_id, i.id);
    }
    let lines = std::fs::read_to_string(&log).unwrap();
    let calls = mock.calls();
    assert_eq!(calls, 10);

    // the failed instance is retried, nothing else
    let again = gw.batch_run(&inst, "mock", 4, &log).unwrap();
    assert_eq!(mock.calls(), calls + 1);
    assert_eq!(again[..3], out[..3]);
    assert!(std::fs::read_to_string(&log).unwrap().starts_with(&lines), "log is append-only");
    assert_eq!(read_response_log(&log).unwrap().len(), 11);
}

#[test]
fn full_cache_hit_makes_no_calls() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("responses.jsonl");
    let mock = Arc::new(MockProvider::deterministic());
    let inst = instances(6);
    let gw = Gateway::new(Box::new(mock.clone()), dir.path().join("cache"), opts());
    let a = gw.batch_run(&inst, "mock", 3, &log).unwrap();
    let b = gw.batch_run(&inst, "mock", 1, &log).unwrap();
    assert_eq!(a, b);
    assert_eq!(mock.calls(), 6);
    assert!(matches!(gw.batch_run(&inst, "mock", 0, &log), Err(GatewayError::InvalidParallelism)));
}

fn serve(responses: Vec<(u16, &'static str)>) -> (String, std::thread::JoinHandle<Vec<String>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = format!("http://{}", listener.local_addr().unwrap());
    let h = std::thread::spawn(move || {
        let mut bodies = Vec::new();
        for (status, body) in responses {
            let (mut stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut len = 0;
            let mut auth = String::new();
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                let l = line.to_ascii_lowercase();
                if let Some(v) = l.strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap();
                }
                if l.starts_with("authorization:") {
                    auth = line.trim().to_string();
                }
                if line == "\r\n" {
                    break;
                }
            }
            let mut buf = vec![0; len];
            reader.read_exact(&mut buf).unwrap();
            bodies.push(format!("{auth}\n{}", String::from_utf8(buf).unwrap()));
            write!(stream, "HTTP/1.1 {status} X\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}", body.len()).unwrap();
        }
        bodies
    });
    (addr, h)
}

#[test]
fn http_provider_speaks_chat_completions() {
    let ok = r#"{"choices":[{"message":{"role":"assistant","content":"Answer: True"},"finish_reason":"stop"}],"usage":{"prompt_tokens":5,"completion_tokens":3}}"#;
    let (base, h) = serve(vec![(503, "{}"), (200, ok), (401, "{}")]);
    let dir = tempfile::tempdir().unwrap();
    let p = HttpChatProvider::new(&base, "sk-test", Duration::from_secs(5)).unwrap();
    let gw = Gateway::new(Box::new(p), dir.path(), opts());
    let r = gw.complete(&LlmRequest::new("gpt-x", "Is Anne red?")).unwrap();
    assert_eq!(r.raw_text, "Answer: True");
    assert_eq!(r.attempt_count, 2);
    assert_eq!(r.token_usage.completion_tokens, 3);
    assert!(matches!(gw.complete(&LlmRequest::new("gpt-x", "other")), Err(GatewayError::AuthError(_))));
    let bodies = h.join().unwrap();
    assert!(bodies[1].to_lowercase().starts_with("authorization: bearer sk-test"));
    let sent: serde_json::Value = serde_json::from_str(bodies[1].split_once('\n').unwrap().1).unwrap();
    assert_eq!(sent["temperature"], 1.0);
    assert_eq!(sent["top_p"], 1.0);
    assert_eq!(sent["model"], "gpt-x");
    assert_eq!(sent["messages"][0]["content"], "Is Anne red?");
}
