//! Parses an execution trace and prints the GUI terms derived from it.

use ladybug::trace::{parse_trace, GuiTermSet};

const TRACE: &str = r#"{
  "app_package": "org.notes",
  "steps": [
    {"screen": "NoteListActivity", "action": "tap", "resource_id": "org.notes:id/fab_add_note", "timestamp_ms": 100},
    {"screen": "EditNoteActivity", "action": "type_text", "resource_id": "org.notes:id/note_title", "widget_text": "Milk", "timestamp_ms": 900},
    {"screen": "EditNoteActivity", "action": "tap", "resource_id": "org.notes:id/save_button", "timestamp_ms": 600}
  ]
}"#;

pub fn run() -> GuiTermSet {
    let trace = parse_trace(TRACE).expect("trace parses");
    for warning in trace.warnings() {
        println!("warning: {warning}");
    }
    let terms = GuiTermSet::from_trace(&trace);
    println!("screen component terms: {:?}", terms.screen_component_terms);
    for screen in &terms.gui_screen_terms {
        println!("screen {} -> {:?}", screen.class_name, screen.tokens);
    }
    terms
}

#[allow(dead_code)]
fn main() {
    run();
}
