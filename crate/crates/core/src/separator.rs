//! Pulls the reasoning monologue out of a provider response and splits it
//! into indexed steps, one per non-blank line.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::model::SteppedTrace;

pub const DEFAULT_REASONING_PATH: &str = "choices[0].message.reasoning_content";
pub const DEFAULT_ANSWER_PATH: &str = "choices[0].message.content";
pub const DEFAULT_QUESTION_PATH: &str = "question";
pub const DEFAULT_MODEL_PATH: &str = "model";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeparatorError {
    #[error("trace contains no non-blank lines")]
    EmptyTrace,
    #[error("malformed document: {0}")]
    MalformedDocument(String),
    #[error("missing field {0:?}")]
    MissingField(String),
    #[error("bad field path {0:?}")]
    BadPath(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawTrace {
    pub text: String,
    pub question: String,
    pub final_answer: String,
    pub source_model: String,
}

impl RawTrace {
    pub fn from_text(text: impl Into<String>) -> Self {
        RawTrace {
            text: text.into(),
            question: String::new(),
            final_answer: String::new(),
            source_model: String::new(),
        }
    }
}

pub fn separate(raw: &RawTrace) -> Result<SteppedTrace, SeparatorError> {
    let steps: Vec<String> = raw
        .text
        .replace("\r\n", "\n")
        .split('\n')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_owned)
        .collect();
    if steps.is_empty() {
        return Err(SeparatorError::EmptyTrace);
    }
    Ok(SteppedTrace::new(steps, &*raw.question, &*raw.final_answer, &*raw.source_model)
        .expect("trimmed non-empty steps"))
}

/// Where to look for each field inside a provider response.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractPaths {
    /// Empty means the whole document is the reasoning text.
    pub reasoning: String,
    pub final_answer: String,
    pub question: String,
    pub source_model: String,
}

impl Default for ExtractPaths {
    fn default() -> Self {
        ExtractPaths {
            reasoning: DEFAULT_REASONING_PATH.into(),
            final_answer: DEFAULT_ANSWER_PATH.into(),
            question: DEFAULT_QUESTION_PATH.into(),
            source_model: DEFAULT_MODEL_PATH.into(),
        }
    }
}

impl ExtractPaths {
    pub fn with_reasoning(field_path: impl Into<String>) -> Self {
        ExtractPaths { reasoning: field_path.into(), ..Default::default() }
    }
}

pub fn extract_reasoning(document: &str, field_path: &str) -> Result<RawTrace, SeparatorError> {
    extract_with(document, &ExtractPaths::with_reasoning(field_path))
}

/// Companion fields that are absent come back empty; only the reasoning
/// field is required.
pub fn extract_with(document: &str, paths: &ExtractPaths) -> Result<RawTrace, SeparatorError> {
    if paths.reasoning.is_empty() {
        return Ok(RawTrace::from_text(document));
    }
    let value: Value = serde_json::from_str(document).map_err(|e| SeparatorError::MalformedDocument(e.to_string()))?;
    let text =
        lookup_str(&value, &paths.reasoning)?.ok_or_else(|| SeparatorError::MissingField(paths.reasoning.clone()))?;
    let companion = |path: &str| -> Result<String, SeparatorError> {
        if path.is_empty() {
            return Ok(String::new());
        }
        Ok(lookup_str(&value, path)?.unwrap_or_default())
    };
    Ok(RawTrace {
        text,
        question: companion(&paths.question)?,
        final_answer: companion(&paths.final_answer)?,
        source_model: companion(&paths.source_model)?,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Segment {
    Key(String),
    Index(usize),
}

fn parse_path(path: &str) -> Result<Vec<Segment>, SeparatorError> {
    let bad = || SeparatorError::BadPath(path.to_owned());
    let mut out = Vec::new();
    for part in path.split('.') {
        let (key, mut rest) = match part.find('[') {
            Some(i) => (&part[..i], &part[i..]),
            None => (part, ""),
        };
        if !key.is_empty() {
            out.push(Segment::Key(key.to_owned()));
        } else if rest.is_empty() {
            return Err(bad());
        }
        while !rest.is_empty() {
            let close = rest.find(']').ok_or_else(bad)?;
            if !rest.starts_with('[') {
                return Err(bad());
            }
            let index = rest[1..close].trim().parse::<usize>().map_err(|_| bad())?;
            out.push(Segment::Index(index));
            rest = &rest[close + 1..];
        }
    }
    Ok(out)
}

/// `Ok(None)` when the path does not resolve to a string.
fn lookup_str(value: &Value, path: &str) -> Result<Option<String>, SeparatorError> {
    let mut cur = value;
    for seg in parse_path(path)? {
        let next = match seg {
            Segment::Key(k) => cur.get(k.as_str()),
            Segment::Index(i) => cur.get(i),
        };
        match next {
            Some(v) => cur = v,
            None => return Ok(None),
        }
    }
    Ok(cur.as_str().map(str::to_owned))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn steps(text: &str) -> Result<Vec<String>, SeparatorError> {
        separate(&RawTrace::from_text(text)).map(|s| s.steps().to_vec())
    }

    #[test]
    fn splits_on_newlines() {
        assert_eq!(steps("a\nb\nc").unwrap(), ["a", "b", "c"]);
        assert_eq!(steps("a\n\n  b  \n").unwrap(), ["a", "b"]);
        assert_eq!(steps("a\r\nb\r\n").unwrap(), ["a", "b"]);
        assert_eq!(steps("\n \n"), Err(SeparatorError::EmptyTrace));
        assert_eq!(steps("one paragraph, no breaks").unwrap().len(), 1);
    }

    #[test]
    fn metadata_copied() {
        let raw =
            RawTrace { text: "x\ny".into(), question: "q".into(), final_answer: "a".into(), source_model: "m".into() };
        let s = separate(&raw).unwrap();
        assert_eq!((s.question(), s.final_answer(), s.source_model()), ("q", "a", "m"));
    }

    const RESPONSE: &str = r#"{"choices":[{"message":{"reasoning_content":"a\nb","content":"42"}}]}"#;

    #[test]
    fn extracts_default_shape() {
        let raw = extract_reasoning(RESPONSE, DEFAULT_REASONING_PATH).unwrap();
        assert_eq!(raw.text, "a\nb");
        assert_eq!(raw.final_answer, "42");
        assert_eq!(raw.question, "");
    }

    #[test]
    fn missing_index_is_missing_field() {
        let path = "choices[1].message.reasoning_content";
        assert_eq!(extract_reasoning(RESPONSE, path), Err(SeparatorError::MissingField(path.into())));
    }

    #[test]
    fn passthrough_and_malformed() {
        let raw = extract_reasoning("plain\ntext", "").unwrap();
        assert_eq!(raw.text, "plain\ntext");
        assert!(matches!(
            extract_reasoning("plain text", DEFAULT_REASONING_PATH),
            Err(SeparatorError::MalformedDocument(_))
        ));
    }

    #[test]
    fn path_grammar() {
        assert_eq!(
            parse_path("a[0][2].b").unwrap(),
            vec![Segment::Key("a".into()), Segment::Index(0), Segment::Index(2), Segment::Key("b".into())]
        );
        assert_eq!(parse_path("[3]").unwrap(), vec![Segment::Index(3)]);
        assert!(parse_path("a..b").is_err());
        assert!(parse_path("a[x]").is_err());
        assert!(parse_path("a[1").is_err());
    }
}
