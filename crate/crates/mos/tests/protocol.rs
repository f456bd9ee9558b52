//! Client/server protocol tests against the bundled mock.

use muskit_dsp::AudioBuffer;
use muskit_mos::{
    batch_mos, decode_pcm16, encode_pcm16, request_mos, MockBehavior, MockMosServer, MosError,
};

fn tone(n: usize) -> AudioBuffer {
    let samples = (0..n).map(|i| (i as f64 * 0.05).sin() * 0.5).collect();
    AudioBuffer::new(samples, 24000)
}

#[test]
fn score_round_trips() {
    let server = MockMosServer::start(vec![MockBehavior::Ok {
        mos: 3.42,
        model_id: "mock".into(),
    }])
    .unwrap();
    let score = request_mos(server.endpoint(), &tone(2000), 2000).unwrap();
    assert_eq!(score.mos, 3.42);
    assert_eq!(score.model_id, "mock");
    assert_eq!(server.requests_served(), 1);
}

#[test]
fn out_of_range_mos_is_a_protocol_error() {
    let server = MockMosServer::start(vec![MockBehavior::Ok {
        mos: 7.0,
        model_id: "mock".into(),
    }])
    .unwrap();
    assert!(matches!(
        request_mos(server.endpoint(), &tone(500), 2000),
        Err(MosError::Protocol(_))
    ));
}

#[test]
fn malformed_and_incomplete_bodies_are_protocol_errors() {
    let server = MockMosServer::start(vec![MockBehavior::MalformedJson]).unwrap();
    assert!(matches!(
        request_mos(server.endpoint(), &tone(500), 2000),
        Err(MosError::Protocol(_))
    ));
    let server = MockMosServer::start(vec![MockBehavior::MissingFields]).unwrap();
    assert!(matches!(
        request_mos(server.endpoint(), &tone(500), 2000),
        Err(MosError::Protocol(_))
    ));
}

#[test]
fn non_200_is_a_transport_error() {
    let server = MockMosServer::start(vec![MockBehavior::Status(500)]).unwrap();
    match request_mos(server.endpoint(), &tone(500), 2000) {
        Err(MosError::Transport(msg)) => assert!(msg.contains("500"), "{msg}"),
        other => panic!("expected Transport, got {other:?}"),
    }
}

#[test]
fn slow_server_times_out() {
    let server = MockMosServer::start(vec![MockBehavior::DelayMs(1500, 3.0)]).unwrap();
    assert!(matches!(
        request_mos(server.endpoint(), &tone(500), 150),
        Err(MosError::Timeout)
    ));
}

#[test]
fn unreachable_endpoint_is_a_transport_error() {
    // nothing listens on this port
    let err = request_mos("http://127.0.0.1:9", &tone(100), 500).unwrap_err();
    assert!(
        matches!(err, MosError::Transport(_) | MosError::Timeout),
        "{err:?}"
    );
}

#[test]
fn batch_preserves_cardinality_under_partial_failure() {
    // serialized requests so the failing behavior lands on one utterance
    let server = MockMosServer::start(vec![
        MockBehavior::Ok {
            mos: 4.0,
            model_id: "mock".into(),
        },
        MockBehavior::DelayMs(1200, 3.0), // will exceed the client timeout
        MockBehavior::Ok {
            mos: 2.5,
            model_id: "mock".into(),
        },
    ])
    .unwrap();
    let utts = vec![
        ("utt_a".to_string(), tone(300)),
        ("utt_b".to_string(), tone(300)),
        ("utt_c".to_string(), tone(300)),
    ];
    let results = batch_mos(server.endpoint(), &utts, 1, 200);
    assert_eq!(results.len(), 3);
    assert_eq!(results["utt_a"].as_ref().unwrap().mos, 4.0);
    assert!(matches!(results["utt_b"], Err(MosError::Timeout)));
    assert_eq!(results["utt_c"].as_ref().unwrap().mos, 2.5);
}

#[test]
fn empty_batch_is_an_empty_map() {
    let results = batch_mos("http://127.0.0.1:9", &[], 4, 100);
    assert!(results.is_empty());
}

#[test]
fn concurrent_batch_returns_all_scores() {
    let server = MockMosServer::start(vec![MockBehavior::Ok {
        mos: 3.0,
        model_id: "mock".into(),
    }])
    .unwrap();
    let utts: Vec<(String, AudioBuffer)> = (0..8)
        .map(|i| (format!("utt_{i:02}"), tone(200)))
        .collect();
    let results = batch_mos(server.endpoint(), &utts, 4, 2000);
    assert_eq!(results.len(), 8);
    assert!(results.values().all(|r| r.is_ok()));
}

#[test]
fn wire_pcm_decodes_back_to_input() {
    // grid-valued samples survive the single documented quantization
    let samples: Vec<f64> = (-8..8).map(|i| i as f64 * 2048.0 / 32768.0).collect();
    assert_eq!(decode_pcm16(&encode_pcm16(&samples)), samples);
}
