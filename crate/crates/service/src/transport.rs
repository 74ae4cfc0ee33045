//! OpenAI-compatible chat-completions transport.

use retrace_core::annotator::{AnnotationRequest, Transport, TransportError, API_KEY_ENV};
use serde_json::{json, Value};

const USER_MESSAGE: &str = "Analyze the reasoning steps above and answer with the JSON object only.";

/// Blocking HTTP client; build it outside any async runtime and call it from
/// blocking threads.
#[derive(Debug, Clone)]
pub struct HttpTransport {
    client: reqwest::blocking::Client,
}

impl HttpTransport {
    pub fn new() -> Result<Self, TransportError> {
        let client = reqwest::blocking::Client::builder()
            .build()
            .map_err(|e| TransportError(format!("cannot build HTTP client: {e}")))?;
        Ok(HttpTransport { client })
    }
}

/// Request body for one structuring call.
pub fn request_body(request: &AnnotationRequest<'_>) -> Value {
    json!({
        "model": request.config.model,
        "temperature": request.config.temperature,
        "messages": [
            { "role": "system", "content": request.system_prompt },
            { "role": "user", "content": USER_MESSAGE },
        ],
    })
}

/// The assistant message text of a chat-completions response.
pub fn response_text(body: &str) -> Result<String, TransportError> {
    let v: Value = serde_json::from_str(body).map_err(|e| TransportError(format!("response is not JSON: {e}")))?;
    v.pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .map(str::to_owned)
        .ok_or_else(|| TransportError("response has no choices[0].message.content".into()))
}

impl Transport for HttpTransport {
    fn complete(&self, request: &AnnotationRequest<'_>) -> Result<String, TransportError> {
        let cfg = request.config;
        let key = cfg.credential.as_ref().ok_or_else(|| TransportError(format!("{API_KEY_ENV} is not set")))?;
        let response = self
            .client
            .post(&cfg.endpoint)
            .timeout(cfg.timeout)
            .bearer_auth(key.expose())
            .json(&request_body(request))
            .send()
            .map_err(|e| TransportError(format!("request failed: {e}")))?;
        let status = response.status();
        let body = response.text().map_err(|e| TransportError(format!("reading response failed: {e}")))?;
        if !status.is_success() {
            let snippet: String = body.chars().take(300).collect();
            return Err(TransportError(format!("provider returned {status}: {snippet}")));
        }
        response_text(&body)
    }
}
