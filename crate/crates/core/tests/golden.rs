//! Byte-for-byte comparisons against frozen outputs in `tests/golden/`.
//! Regenerate deliberately with `RETRACE_UPDATE_GOLDEN=1 cargo test`.

use std::path::PathBuf;

use retrace_core::annotator::{annotate_llm, build_prompt, AnnotationRequest, ProviderConfig};
use retrace_core::fixtures::{toy9_stepped, toy9_structured};
use retrace_core::layout::{export_svg, layout_spacefill, layout_timeline, ExpansionState, Viewport};
use retrace_core::model::{encode_structured, validate, Provenance};

const RESPONSE: &str = include_str!("fixtures/toy9_response.txt");

fn check(name: &str, actual: &str) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("RETRACE_UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert!(expected == actual, "{name} differs from its golden file");
}

#[test]
fn toy9_prompt() {
    check("toy9_prompt.txt", &build_prompt(&toy9_stepped()));
}

#[test]
fn recorded_response_reconciles() {
    let transport = |_: &AnnotationRequest<'_>| Ok(RESPONSE.to_owned());
    let out = annotate_llm(&toy9_stepped(), &ProviderConfig::default(), &transport).unwrap();
    assert_eq!(out.trace.provenance, Provenance::LlmAnnotated);
    assert!(validate(&out.trace, &toy9_stepped()).unwrap().ok);
    check("toy9_structured.json", &encode_structured(&out.trace));
}

#[test]
fn toy9_svgs() {
    let t = toy9_structured();
    let vp = Viewport::default();
    let collapsed = ExpansionState::default();
    check("toy9_spacefill.svg", &export_svg(&layout_spacefill(&t, &collapsed, vp)));
    check("toy9_timeline.svg", &export_svg(&layout_timeline(&t, &collapsed, vp)));
    let open = ExpansionState::subphase(1, "subphase_4");
    check("toy9_spacefill_expanded.svg", &export_svg(&layout_spacefill(&t, &open, vp)));
    check("toy9_timeline_expanded.svg", &export_svg(&layout_timeline(&t, &open, vp)));
}

#[test]
fn svg_is_stable_across_runs() {
    let t = toy9_structured();
    let render = || export_svg(&layout_timeline(&t, &ExpansionState::phase(2), Viewport::default()));
    assert_eq!(render(), render());
}
