//! Pattern, rule-table, manifest and rendering formats.

mod manifest;
mod render;
mod rle;
mod table;

pub use manifest::{
    parse_config_spec, parse_rule_spec, parse_schedule_spec, parse_window, ContractManifest, ExperimentManifest,
    Outputs,
};
pub use render::{color, glyph, render_history_text, render_spacetime_image, render_spacetime_text, write_png};
pub use rle::{decode_pattern, encode_body, encode_pattern, Pattern};
pub use table::{export_rule_table, import_rule_table};
