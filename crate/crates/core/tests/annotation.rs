use proptest::prelude::*;
use riskprobe::annotation::*;
use riskprobe::llm_gateway::{LlmRequest, Message};
use riskprobe::nlsat::{InvalidReason, ProcessVerdict};
use sha2::{Digest, Sha256};

fn verdict(annotator: &str, facet: Facet, error: bool) -> AnnotationVerdict {
    AnnotationVerdict {
        instance_id: "cqa-0001".into(),
        model_id: "m".into(),
        annotator_id: annotator.into(),
        judgment: if error { Judgment::Error } else { Judgment::NoError },
        facet,
        notes: None,
    }
}

#[test]
fn two_annotator_truth_table() {
    for (a, b, expected) in [(false, false, 0), (false, true, 1), (true, false, 1), (true, true, 1)] {
        let vs = [verdict("x", Facet::Factual, a), verdict("y", Facet::Factual, b)];
        let refs: Vec<&AnnotationVerdict> = vs.iter().collect();
        assert_eq!(aggregate_label(&refs).unwrap().label, expected, "({a}, {b})");
    }
}

#[test]
fn relational_truth_table() {
    let valid = ProcessVerdict::Valid;
    let invalid = ProcessVerdict::Invalid { step: 0, reason: InvalidReason::UnknownRule };
    for (answer, process, expected) in [(true, &valid, 0), (true, &invalid, 1), (false, &valid, 1), (false, &invalid, 1)] {
        let l = relational_label("rel-1", "m", answer, Some(process)).unwrap();
        assert_eq!(l.label, expected);
        assert_eq!(l.rule, AggregationRule::AnswerAndProcess);
    }
    assert!(matches!(relational_label("rel-1", "m", true, None), Err(AnnotationError::MissingProcessVerdict(_))));
}

#[test]
fn one_annotator_is_incomplete() {
    let vs = [verdict("x", Facet::Factual, false)];
    let refs: Vec<&AnnotationVerdict> = vs.iter().collect();
    assert!(matches!(aggregate_label(&refs), Err(AnnotationError::IncompleteAnnotation { found: 1, .. })));
}

#[test]
fn request_digest_is_sha256_of_sorted_json() {
    let req = LlmRequest::new("mock-gpt", "Explain the term.");
    let canonical = r#"{"max_tokens":1024,"messages":[{"content":"Explain the term.","role":"user"}],"model_id":"mock-gpt","temperature":1.0,"top_p":1.0}"#;
    assert_eq!(req.digest(), hex::encode(Sha256::digest(canonical.as_bytes())));
}

proptest! {
    #[test]
    fn aggregation_ignores_verdict_order(judgments in prop::collection::vec(any::<bool>(), 4), two_facets in any::<bool>(), rotate in 0usize..4) {
        let mut vs = vec![verdict("x", Facet::Factual, judgments[0]), verdict("y", Facet::Factual, judgments[1])];
        if two_facets {
            vs.push(verdict("x", Facet::Reasoning, judgments[2]));
            vs.push(verdict("y", Facet::Reasoning, judgments[3]));
        }
        let expected = u8::from(vs.iter().any(|v| v.judgment == Judgment::Error));
        let mut refs: Vec<&AnnotationVerdict> = vs.iter().collect();
        let first = aggregate_label(&refs).unwrap();
        let n = refs.len();
        refs.rotate_left(rotate % n);
        refs.reverse();
        prop_assert_eq!(&aggregate_label(&refs).unwrap(), &first);
        prop_assert_eq!(first.label, expected);
    }

    #[test]
    fn digest_depends_only_on_content(model in "[a-z-]{1,12}", prompt in ".{0,80}", t in 0.0f64..2.0) {
        let mut a = LlmRequest::new(model.clone(), prompt.clone());
        a.temperature = t;
        let b: LlmRequest = serde_json::from_str(&serde_json::to_string(&a).unwrap()).unwrap();
        prop_assert_eq!(a.digest(), b.digest());
        let mut c = a.clone();
        c.messages.insert(0, Message::system("sys"));
        prop_assert_ne!(a.digest(), c.digest());
        let mut d = a.clone();
        d.top_p = 0.5;
        prop_assert_ne!(a.digest(), d.digest());
    }
}
