//! Execution traces recorded while reproducing a bug, and the GUI terms
//! extracted from them.
//!
//! Document layout (`execution.json`, UTF-8, unknown keys ignored):
//!
//! ```json
//! {
//!   "app_package": "org.notes",
//!   "device_info": "Pixel 6 / API 33",
//!   "steps": [
//!     {"screen": "EditNoteActivity", "action": "tap",
//!      "resource_id": "org.notes:id/save_button", "widget_class": "android.widget.Button",
//!      "widget_text": "Save", "timestamp_ms": 1520}
//!   ]
//! }
//! ```

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::preprocess::split_identifier;

#[derive(Debug, thiserror::Error)]
pub enum TraceError {
    #[error("malformed trace at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid trace field `{path}`: {message}")]
    Schema { path: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Tap,
    LongTap,
    Swipe,
    TypeText,
    Back,
    Other,
}

impl Action {
    fn parse(s: &str) -> Self {
        match s {
            "tap" => Action::Tap,
            "long_tap" => Action::LongTap,
            "swipe" => Action::Swipe,
            "type_text" => Action::TypeText,
            "back" => Action::Back,
            _ => Action::Other,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteractionStep {
    /// Activity or Fragment simple class name.
    pub screen: String,
    pub action: Action,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resource_id: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub widget_class: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub widget_text: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp_ms: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ExecutionTrace {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub app_package: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub device_info: Option<String>,
    pub steps: Vec<InteractionStep>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceWarning {
    /// A step's timestamp is earlier than the previous timestamped step.
    TimestampOrder {
        step: usize,
        previous_ms: u64,
        timestamp_ms: u64,
    },
}

impl fmt::Display for TraceWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceWarning::TimestampOrder {
                step,
                previous_ms,
                timestamp_ms,
            } => write!(
                f,
                "step {step} has timestamp {timestamp_ms} ms, earlier than the preceding {previous_ms} ms; keeping recorded order"
            ),
        }
    }
}

impl ExecutionTrace {
    /// Non-fatal irregularities. Steps are always kept in recorded order.
    pub fn warnings(&self) -> Vec<TraceWarning> {
        let mut out = Vec::new();
        let mut previous: Option<u64> = None;
        for (step, s) in self.steps.iter().enumerate() {
            if let Some(ts) = s.timestamp_ms {
                if let Some(prev) = previous {
                    if ts < prev {
                        out.push(TraceWarning::TimestampOrder {
                            step,
                            previous_ms: prev,
                            timestamp_ms: ts,
                        });
                    }
                }
                previous = Some(previous.map_or(ts, |p| p.max(ts)));
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }
}

/// Parses an execution trace document.
pub fn parse_trace(document_text: &str) -> Result<ExecutionTrace, TraceError> {
    let value: Value = serde_json::from_str(document_text).map_err(|e| TraceError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let top = value.as_object().ok_or_else(|| schema("$", "expected an object"))?;
    let steps = match top.get("steps") {
        None => return Err(schema("steps", "missing required field")),
        Some(Value::Array(items)) => items
            .iter()
            .enumerate()
            .map(|(i, item)| parse_step(i, item))
            .collect::<Result<Vec<_>, _>>()?,
        Some(_) => return Err(schema("steps", "expected an array")),
    };
    Ok(ExecutionTrace {
        app_package: opt_string(top, "app_package", "app_package")?,
        device_info: opt_string(top, "device_info", "device_info")?,
        steps,
    })
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> TraceError {
    TraceError::Schema {
        path: path.into(),
        message: message.into(),
    }
}

fn opt_string(obj: &Map<String, Value>, key: &str, path: &str) -> Result<Option<String>, TraceError> {
    match obj.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => Ok(Some(s.clone())),
        Some(_) => Err(schema(path, "expected a string")),
    }
}

fn parse_step(index: usize, item: &Value) -> Result<InteractionStep, TraceError> {
    let at = |field: &str| format!("steps[{index}].{field}");
    let obj = item
        .as_object()
        .ok_or_else(|| schema(format!("steps[{index}]"), "expected an object"))?;
    let screen = opt_string(obj, "screen", &at("screen"))?
        .ok_or_else(|| schema(at("screen"), "missing required field"))?;
    if screen.trim().is_empty() {
        return Err(schema(at("screen"), "must not be empty"));
    }
    let action = opt_string(obj, "action", &at("action"))?
        .map(|a| Action::parse(&a))
        .unwrap_or(Action::Other);
    let timestamp_ms = match obj.get("timestamp_ms") {
        None | Some(Value::Null) => None,
        Some(v) => Some(
            v.as_u64()
                .ok_or_else(|| schema(at("timestamp_ms"), "expected a non-negative integer"))?,
        ),
    };
    Ok(InteractionStep {
        screen,
        action,
        resource_id: opt_string(obj, "resource_id", &at("resource_id"))?,
        widget_class: opt_string(obj, "widget_class", &at("widget_class"))?,
        widget_text: opt_string(obj, "widget_text", &at("widget_text"))?,
        timestamp_ms,
    })
}

/// An Activity/Fragment visited during reproduction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuiScreenTerm {
    /// Simple class name, original casing.
    pub class_name: String,
    /// Lowercase identifier parts of `class_name`.
    pub tokens: Vec<String>,
}

/// GUI terms of one trace, each list in first-occurrence order without
/// duplicates.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GuiTermSet {
    /// Split resource-id names, e.g. `save_button` → `[save, button]`.
    pub screen_component_terms: Vec<Vec<String>>,
    pub gui_screen_terms: Vec<GuiScreenTerm>,
}

impl GuiTermSet {
    pub fn from_trace(trace: &ExecutionTrace) -> Self {
        Self {
            screen_component_terms: extract_screen_component_terms(trace),
            gui_screen_terms: extract_gui_screen_terms(trace),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.screen_component_terms.is_empty() && self.gui_screen_terms.is_empty()
    }
}

/// Resource-id names (the part after the last `/`), split into lowercase parts.
pub fn extract_screen_component_terms(trace: &ExecutionTrace) -> Vec<Vec<String>> {
    let mut seen = HashSet::new();
    trace
        .steps
        .iter()
        .filter_map(|s| s.resource_id.as_deref())
        .map(|rid| split_identifier(rid.rsplit('/').next().unwrap_or(rid)))
        .filter(|parts| !parts.is_empty())
        .filter(|parts| seen.insert(parts.clone()))
        .collect()
}

/// Distinct screens with their split forms. A package-qualified screen
/// (`org.app.LoginActivity`) contributes its simple name.
pub fn extract_gui_screen_terms(trace: &ExecutionTrace) -> Vec<GuiScreenTerm> {
    let mut seen = HashSet::new();
    trace
        .steps
        .iter()
        .map(|s| simple_class_name(&s.screen))
        .filter(|name| !name.is_empty() && seen.insert(name.to_string()))
        .map(|name| GuiScreenTerm {
            class_name: name.to_string(),
            tokens: split_identifier(name),
        })
        .collect()
}

fn simple_class_name(screen: &str) -> &str {
    screen.trim().rsplit('.').next().unwrap_or(screen)
}
