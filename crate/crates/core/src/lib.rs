//! Structuring and visualization geometry for reasoning traces.
//!
//! The pipeline runs in three stages:
//!
//! * [`separator`] extracts the reasoning monologue from a provider response
//!   and splits it into indexed steps;
//! * [`annotator`] groups the steps into four phases and their subphases,
//!   either through an external LLM or an offline cue-phrase classifier;
//! * [`layout`] turns a validated [`StructuredTrace`] plus the client's
//!   expansion state into render geometry for the space-filling and timeline
//!   views, with SVG export.
//!
//! [`stats`] computes the phase distribution shown next to either view.
//!
//! ```
//! use retrace_core::{annotator, layout, model, separator};
//!
//! let raw = separator::RawTrace::from_text(retrace_core::fixtures::TOY9_TEXT);
//! let stepped = separator::separate(&raw).unwrap();
//! let structured = annotator::annotate_heuristic(&stepped);
//! assert!(model::validate(&structured, &stepped).unwrap().ok);
//!
//! let tree = layout::layout_timeline(&structured, &layout::ExpansionState::default(),
//!     layout::Viewport::new(900.0, 600.0).unwrap());
//! let widths: Vec<f64> = tree.axis_segments().map(|n| n.rect.w).collect();
//! assert_eq!(widths, [200.0, 300.0, 200.0, 200.0]);
//! ```

pub mod annotator;
pub mod exec;
pub mod fixtures;
pub mod layout;
pub mod model;
pub mod separator;
pub mod stats;
pub mod synth;

pub use model::{SteppedTrace, StructuredTrace};
