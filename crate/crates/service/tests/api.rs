use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use retrace_core::annotator::{annotate_heuristic, AnnotationRequest, ProviderConfig, TransportError};
use retrace_core::fixtures::TOY9_TEXT;
use retrace_core::model::encode_structured;
use retrace_core::separator::{separate, RawTrace};
use retrace_service::{Service, TraceStore};
use serde_json::{json, Value};
use tower::ServiceExt;

const GOLDEN: &str = include_str!("../../core/tests/fixtures/toy9_response.txt");

struct Harness {
    app: Router,
    _dir: tempfile::TempDir,
}

fn harness_with(configure: impl FnOnce(Service) -> Service) -> Harness {
    let dir = tempfile::tempdir().unwrap();
    let svc = configure(Service::new(TraceStore::open(dir.path()).unwrap()));
    Harness { app: retrace_service::http::router(Arc::new(svc)), _dir: dir }
}

fn harness() -> Harness {
    harness_with(|s| s)
}

struct Reply {
    status: StatusCode,
    content_type: String,
    body: Vec<u8>,
}

impl Reply {
    fn json(&self) -> Value {
        serde_json::from_slice(&self.body).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&self.body)))
    }

    fn text(&self) -> String {
        String::from_utf8(self.body.clone()).unwrap()
    }
}

impl Harness {
    async fn call(&self, method: &str, uri: &str, body: impl Into<Body>) -> Reply {
        let req = Request::builder().method(method).uri(uri).body(body.into()).unwrap();
        let resp = self.app.clone().oneshot(req).await.unwrap();
        let status = resp.status();
        let content_type =
            resp.headers().get("content-type").map(|v| v.to_str().unwrap().to_owned()).unwrap_or_default();
        let body = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
        Reply { status, content_type, body }
    }

    async fn submit_toy9(&self) -> String {
        let r = self.call("POST", "/api/traces?backend=heuristic", TOY9_TEXT).await;
        assert_eq!(r.status, StatusCode::CREATED, "{}", r.text());
        r.json()["trace_id"].as_str().unwrap().to_owned()
    }
}

#[tokio::test]
async fn submit_then_get_round_trips() {
    let h = harness();
    let id = h.submit_toy9().await;
    let r = h.call("GET", &format!("/api/traces/{id}"), Body::empty()).await;
    assert_eq!(r.status, StatusCode::OK);
    assert_eq!(r.content_type, "application/json");
    let expected = annotate_heuristic(&separate(&RawTrace::from_text(TOY9_TEXT)).unwrap());
    assert_eq!(r.text(), encode_structured(&expected));
}

#[tokio::test]
async fn resubmission_is_idempotent() {
    let h = harness();
    let id = h.submit_toy9().await;
    let again = h.call("POST", "/api/traces", TOY9_TEXT).await;
    assert_eq!(again.status, StatusCode::OK);
    assert_eq!(again.json()["trace_id"], id);
    assert_eq!(again.json()["created"], false);
    let index = h.call("GET", "/api/traces", Body::empty()).await.json();
    assert_eq!(index.as_object().unwrap().len(), 1);
    assert_eq!(index[&id]["annotator"], "heuristic_annotated");
}

#[tokio::test]
async fn empty_body_is_a_separator_error() {
    let h = harness();
    for body in ["", "\n  \n"] {
        let r = h.call("POST", "/api/traces", body).await;
        assert_eq!(r.status, StatusCode::BAD_REQUEST);
        let e = &r.json()["error"];
        assert_eq!((e["stage"].as_str(), e["code"].as_str()), (Some("separator"), Some("EmptyTrace")));
    }
}

#[tokio::test]
async fn unknown_id_is_not_found() {
    let h = harness();
    let id = "0".repeat(64);
    for (method, uri) in [
        ("GET", format!("/api/traces/{id}")),
        ("GET", format!("/api/traces/{id}/stats")),
        ("POST", format!("/api/traces/{id}/layout")),
        ("GET", format!("/api/traces/{id}/export.svg")),
        ("GET", "/api/traces/not-a-hash".to_owned()),
    ] {
        let r = h.call(method, &uri, Body::empty()).await;
        assert_eq!(r.status, StatusCode::NOT_FOUND, "{uri}");
        assert_eq!(r.json()["error"]["code"], "NotFound");
    }
}

#[tokio::test]
async fn timeline_layout_at_900() {
    let h = harness();
    let id = h.submit_toy9().await;
    let body = json!({"view": "timeline", "state": {}, "viewport": {"width": 900, "height": 600}});
    let r = h.call("POST", &format!("/api/traces/{id}/layout"), body.to_string()).await;
    assert_eq!(r.status, StatusCode::OK, "{}", r.text());
    let tree = r.json();
    let widths: Vec<f64> = tree["nodes"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|n| n["kind"] == "AxisSegment")
        .map(|n| n["rect"][2].as_f64().unwrap())
        .collect();
    assert_eq!(widths, [200.0, 300.0, 200.0, 200.0]);
    assert_eq!(tree["view"], "timeline");
    assert_eq!(tree["legend"].as_array().unwrap().len(), 4);
}

#[tokio::test]
async fn bad_state_and_bad_requests() {
    let h = harness();
    let id = h.submit_toy9().await;
    let uri = format!("/api/traces/{id}/layout");
    // subphase of a phase that is not expanded
    let body = json!({"view": "spacefill", "state": {"expanded_subphase": "subphase_1"}});
    let r = h.call("POST", &uri, body.to_string()).await;
    assert_eq!(r.status, StatusCode::BAD_REQUEST);
    assert_eq!(r.json()["error"]["code"], "BadState");
    let body = json!({"state": {"expanded_phase": 2, "expanded_subphase": "subphase_1"}});
    assert_eq!(h.call("POST", &uri, body.to_string()).await.json()["error"]["code"], "BadState");

    for body in [json!({"viewport": {"width": 100, "height": 100}}), json!({"view": "treemap"}), json!({"bogus": 1})] {
        let r = h.call("POST", &uri, body.to_string()).await;
        assert_eq!(r.status, StatusCode::BAD_REQUEST, "{body}");
        assert_eq!(r.json()["error"]["code"], "BadRequest");
    }
    let r = h.call("POST", "/api/traces?backend=oracle", TOY9_TEXT).await;
    assert_eq!(r.status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn stats_and_export() {
    let h = harness();
    let id = h.submit_toy9().await;
    let stats = h.call("GET", &format!("/api/traces/{id}/stats"), Body::empty()).await.json();
    assert_eq!(stats["step_counts"], json!([2, 3, 2, 2]));
    assert_eq!(stats["confidence_step"], 7);

    let r =
        h.call("GET", &format!("/api/traces/{id}/export.svg?view=timeline&width=900&height=600"), Body::empty()).await;
    assert_eq!(r.status, StatusCode::OK);
    assert_eq!(r.content_type, "image/svg+xml");
    let svg = r.text();
    assert!(svg.starts_with("<?xml"));
    assert!(svg.contains(r#"<rect x="200" y="552" width="300" height="48""#));
    let expanded = h
        .call(
            "GET",
            &format!("/api/traces/{id}/export.svg?expanded_phase=1&expanded_subphase=subphase_4"),
            Body::empty(),
        )
        .await;
    assert_eq!(expanded.status, StatusCode::OK);
    assert!(expanded.text().contains("id=\"step_3\""));
    let bad = h.call("GET", &format!("/api/traces/{id}/export.svg?view=pie"), Body::empty()).await;
    assert_eq!(bad.status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn identical_layout_requests_match() {
    let h = harness();
    let id = h.submit_toy9().await;
    let uri = format!("/api/traces/{id}/layout");
    let body = json!({"view": "spacefill", "state": {"expanded_phase": 1}}).to_string();
    let (a, b) = tokio::join!(h.call("POST", &uri, body.clone()), h.call("POST", &uri, body.clone()));
    assert_eq!(a.status, StatusCode::OK);
    assert_eq!(a.body, b.body);
}

#[tokio::test]
async fn provider_response_bodies() {
    let h = harness();
    let doc = json!({
        "model": "deepseek-r1",
        "question": "What is 6 times 7?",
        "choices": [{"message": {"reasoning_content": TOY9_TEXT, "content": "72"}}]
    });
    let r = h.call("POST", "/api/traces", doc.to_string()).await;
    assert_eq!(r.status, StatusCode::CREATED, "{}", r.text());
    let id = r.json()["trace_id"].as_str().unwrap().to_owned();
    let stored = h.call("GET", &format!("/api/traces/{id}"), Body::empty()).await.json();
    assert_eq!(stored["final_answer"], "72");
    assert_eq!(stored["source_model"], "deepseek-r1");
    assert_eq!(stored["steps"].as_array().unwrap().len(), 9);

    let r = h.call("POST", "/api/traces?field_path=choices%5B1%5D.message.reasoning_content", doc.to_string()).await;
    assert_eq!(r.status, StatusCode::BAD_REQUEST);
    assert_eq!(r.json()["error"]["code"], "MissingField");
}

#[tokio::test]
async fn llm_backend_with_mocked_transport() {
    let golden = harness_with(|s| {
        s.with_llm(ProviderConfig::default(), Arc::new(|_: &AnnotationRequest<'_>| Ok(GOLDEN.to_owned())))
    });
    let r = golden.call("POST", "/api/traces?backend=llm", TOY9_TEXT).await;
    assert_eq!(r.status, StatusCode::CREATED, "{}", r.text());
    let id = r.json()["trace_id"].as_str().unwrap().to_owned();
    let doc = golden.call("GET", &format!("/api/traces/{id}"), Body::empty()).await.json();
    assert_eq!(doc["provenance"], "llm_annotated");

    let down = harness_with(|s| {
        s.with_llm(
            ProviderConfig::default(),
            Arc::new(|_: &AnnotationRequest<'_>| Err(TransportError("connection refused".into()))),
        )
    });
    let r = down.call("POST", "/api/traces?backend=llm", TOY9_TEXT).await;
    assert_eq!(r.status, StatusCode::BAD_GATEWAY);
    assert_eq!(r.json()["error"]["code"], "ProviderError");
    assert_eq!(r.json()["error"]["stage"], "annotator");

    let garbage = harness_with(|s| {
        s.with_llm(ProviderConfig::default(), Arc::new(|_: &AnnotationRequest<'_>| Ok("no idea".to_owned())))
    });
    let r = garbage.call("POST", "/api/traces?backend=llm", TOY9_TEXT).await;
    assert_eq!(r.status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(r.json()["error"]["code"], "AnnotationFailed");

    let unconfigured = harness();
    let r = unconfigured.call("POST", "/api/traces?backend=llm", TOY9_TEXT).await;
    assert_eq!(r.status, StatusCode::BAD_GATEWAY);
}

#[tokio::test]
async fn root_serves_ui() {
    let h = harness();
    let r = h.call("GET", "/", Body::empty()).await;
    assert_eq!(r.status, StatusCode::OK);
    assert!(r.content_type.starts_with("text/html"));

    let ui = tempfile::tempdir().unwrap();
    std::fs::write(ui.path().join("index.html"), "<html>bundle</html>").unwrap();
    let path = ui.path().to_owned();
    let h = harness_with(move |s| s.with_ui_dir(Some(path)));
    let r = h.call("GET", "/", Body::empty()).await;
    assert_eq!(r.status, StatusCode::OK);
    assert_eq!(r.text(), "<html>bundle</html>");
    assert_eq!(h.call("GET", "/api/traces", Body::empty()).await.status, StatusCode::OK);
}
