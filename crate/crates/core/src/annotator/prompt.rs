use crate::model::SteppedTrace;

/// System prompt for the structuring model, with one substitution slot.
pub const PROMPT_TEMPLATE: &str = include_str!("prompt_template.txt");

pub const PROMPT_SLOT: &str = "{{ input_data.reasoning_content | tojson }}";

/// Fills the template's slot with the steps serialized as a JSON array.
pub fn build_prompt(stepped: &SteppedTrace) -> String {
    PROMPT_TEMPLATE.replacen(PROMPT_SLOT, &tojson(stepped.steps()), 1)
}

/// JSON array of strings in the form a Jinja `tojson` filter emits:
/// `", "` separators, ASCII-only output, and `<`, `>`, `&`, `'` escaped.
pub fn tojson(items: &[String]) -> String {
    let mut out = String::from("[");
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push('"');
        for c in item.chars() {
            match c {
                '"' => out.push_str("\\\""),
                '\\' => out.push_str("\\\\"),
                '\n' => out.push_str("\\n"),
                '\r' => out.push_str("\\r"),
                '\t' => out.push_str("\\t"),
                '\u{08}' => out.push_str("\\b"),
                '\u{0c}' => out.push_str("\\f"),
                '<' | '>' | '&' | '\'' => out.push_str(&format!("\\u{:04x}", c as u32)),
                c if c.is_ascii() && !c.is_ascii_control() => out.push(c),
                c => {
                    let mut buf = [0u16; 2];
                    for unit in c.encode_utf16(&mut buf) {
                        out.push_str(&format!("\\u{unit:04x}"));
                    }
                }
            }
        }
        out.push('"');
    }
    out.push(']');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slot_present_once() {
        assert_eq!(PROMPT_TEMPLATE.matches(PROMPT_SLOT).count(), 1);
    }

    #[test]
    fn two_step_prompt() {
        let s = SteppedTrace::from_steps(["First, add.", "So, the final answer is 3."]).unwrap();
        let p = build_prompt(&s);
        assert!(p.contains(r#"["First, add.", "So, the final answer is 3."]"#));
        assert!(p.contains("Every reasoning step must be assigned to exactly one subphase."));
        assert!(!p.contains(PROMPT_SLOT));
        assert_eq!(p, build_prompt(&s));
    }

    #[test]
    fn tojson_escapes_like_jinja() {
        let items = vec!["I'm <sure> & \"ok\"".to_owned(), "caf\u{e9} \u{1f600}".to_owned()];
        assert_eq!(tojson(&items), r#"["I\u0027m \u003csure\u003e \u0026 \"ok\"", "caf\u00e9 \ud83d\ude00"]"#);
        let back: Vec<String> = serde_json::from_str(&tojson(&items)).unwrap();
        assert_eq!(back, items);
    }
}
