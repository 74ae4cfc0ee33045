use serde_json::Value;

use super::AnnotateError;
use crate::model::{read_skeleton, AnnotationSkeleton};

/// Reads the first JSON object in a model response, tolerating surrounding
/// prose, code fences and `//` line comments.
///
/// Every parseable object is tried in order, first in the raw text and then
/// with comments stripped; the first that fits the schema wins. Otherwise
/// the schema error of the first object found is reported.
pub fn parse_annotation(response: &str) -> Result<AnnotationSkeleton, AnnotateError> {
    let stripped = strip_line_comments(response);
    let mut first_err = None;
    for value in objects(response).chain(objects(&stripped)) {
        match read_skeleton(&value) {
            Ok(sk) => return Ok(sk),
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    Err(first_err.map_or(AnnotateError::NoJsonFound, AnnotateError::from))
}

fn objects(text: &str) -> impl Iterator<Item = Value> + '_ {
    text.match_indices('{').filter_map(|(start, _)| {
        let mut stream = serde_json::Deserializer::from_str(&text[start..]).into_iter::<Value>();
        match stream.next() {
            Some(Ok(v @ Value::Object(_))) => Some(v),
            _ => None,
        }
    })
}

fn strip_line_comments(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for line in text.lines() {
        let mut in_string = false;
        let mut escaped = false;
        let mut cut = line.len();
        let bytes = line.as_bytes();
        for (i, &b) in bytes.iter().enumerate() {
            if in_string {
                match b {
                    _ if escaped => escaped = false,
                    b'\\' => escaped = true,
                    b'"' => in_string = false,
                    _ => {}
                }
            } else if b == b'"' {
                in_string = true;
            } else if b == b'/' && bytes.get(i + 1) == Some(&b'/') {
                cut = i;
                break;
            }
        }
        out.push_str(&line[..cut]);
        out.push('\n');
    }
    out
}
