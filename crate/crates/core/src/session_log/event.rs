use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::{Error, Result};

pub const EVENT_KINDS: [&str; 8] =
    ["query", "serp_render", "serp_click", "page_load", "page_leave", "mouseover", "scroll", "keypress"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SerpResult {
    pub rank: u32,
    pub url: String,
    #[serde(default)]
    pub title: String,
}

/// Kind-specific event body, tagged by `kind` with its fields under `payload`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum EventPayload {
    Query {
        text: String,
    },
    SerpRender {
        query_index: usize,
        result_count: u32,
        #[serde(default)]
        results: Vec<SerpResult>,
    },
    SerpClick {
        rank: u32,
        url: String,
    },
    PageLoad {
        url: String,
        #[serde(default)]
        title: String,
        #[serde(default)]
        size_bytes: u64,
        #[serde(default)]
        referrer_url: String,
    },
    PageLeave {
        url: String,
    },
    Mouseover {
        rank: u32,
    },
    Scroll {
        delta_px: i64,
        position_px: u64,
    },
    Keypress {},
}

impl EventPayload {
    pub fn kind(&self) -> &'static str {
        match self {
            EventPayload::Query { .. } => "query",
            EventPayload::SerpRender { .. } => "serp_render",
            EventPayload::SerpClick { .. } => "serp_click",
            EventPayload::PageLoad { .. } => "page_load",
            EventPayload::PageLeave { .. } => "page_leave",
            EventPayload::Mouseover { .. } => "mouseover",
            EventPayload::Scroll { .. } => "scroll",
            EventPayload::Keypress {} => "keypress",
        }
    }

    /// Interaction events anchor activity windows on the page being viewed.
    pub fn is_interaction(&self) -> bool {
        matches!(
            self,
            EventPayload::Mouseover { .. }
                | EventPayload::Scroll { .. }
                | EventPayload::Keypress {}
                | EventPayload::SerpClick { .. }
        )
    }

    pub fn is_mouse(&self) -> bool {
        matches!(self, EventPayload::Mouseover { .. } | EventPayload::Scroll { .. })
    }

    fn check_ranks(&self) -> std::result::Result<(), String> {
        match self {
            EventPayload::SerpClick { rank, .. } | EventPayload::Mouseover { rank } if *rank < 1 => {
                Err(format!("{} rank must be >= 1", self.kind()))
            }
            EventPayload::SerpRender { results, .. } if results.iter().any(|r| r.rank < 1) => {
                Err("serp_render result rank must be >= 1".to_string())
            }
            _ => Ok(()),
        }
    }
}

/// One timestamped user interaction (milliseconds since epoch).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub session_id: String,
    pub user_id: Option<String>,
    pub topic_id: Option<String>,
    pub timestamp: u64,
    pub payload: EventPayload,
}

impl Event {
    pub fn new(session_id: impl Into<String>, timestamp: u64, payload: EventPayload) -> Self {
        Event { session_id: session_id.into(), user_id: None, topic_id: None, timestamp, payload }
    }

    pub fn with_owner(mut self, user_id: impl Into<String>, topic_id: impl Into<String>) -> Self {
        self.user_id = Some(user_id.into());
        self.topic_id = Some(topic_id.into());
        self
    }

    pub fn kind(&self) -> &'static str {
        self.payload.kind()
    }

    fn from_value(line: usize, value: Value) -> Result<Event> {
        let schema = |message: String| Error::Schema { line, message };
        let Value::Object(mut obj) = value else {
            return Err(schema("record is not a JSON object".into()));
        };
        let kind = match obj.get("kind") {
            Some(Value::String(k)) => k.clone(),
            Some(_) => return Err(schema("`kind` must be a string".into())),
            None => return Err(schema("missing field `kind`".into())),
        };
        if !EVENT_KINDS.contains(&kind.as_str()) {
            return Err(schema(format!("unknown event kind `{kind}`")));
        }
        let session_id = match obj.remove("session_id") {
            Some(Value::String(s)) => s,
            Some(_) => return Err(schema("`session_id` must be a string".into())),
            None => return Err(schema("missing field `session_id`".into())),
        };
        let timestamp = match obj.remove("timestamp") {
            Some(v) => {
                v.as_u64().ok_or_else(|| schema(format!("`timestamp` must be a non-negative integer, got {v}")))?
            }
            None => return Err(schema("missing field `timestamp`".into())),
        };
        let opt_string = |v: Option<Value>, field: &str| -> Result<Option<String>> {
            match v {
                None | Some(Value::Null) => Ok(None),
                Some(Value::String(s)) if s.is_empty() => Ok(None),
                Some(Value::String(s)) => Ok(Some(s)),
                Some(_) => Err(Error::Schema { line, message: format!("`{field}` must be a string") }),
            }
        };
        let user_id = opt_string(obj.remove("user_id"), "user_id")?;
        let topic_id = opt_string(obj.remove("topic_id"), "topic_id")?;

        let mut tagged = Map::new();
        tagged.insert("kind".into(), Value::String(kind));
        tagged.insert("payload".into(), obj.remove("payload").unwrap_or_else(|| Value::Object(Map::new())));
        let payload: EventPayload = serde_json::from_value(Value::Object(tagged)).map_err(|e| schema(e.to_string()))?;
        payload.check_ranks().map_err(schema)?;
        Ok(Event { session_id, user_id, topic_id, timestamp, payload })
    }

    pub fn to_value(&self) -> Value {
        let mut obj = Map::new();
        obj.insert("session_id".into(), Value::String(self.session_id.clone()));
        if let Some(u) = &self.user_id {
            obj.insert("user_id".into(), Value::String(u.clone()));
        }
        if let Some(t) = &self.topic_id {
            obj.insert("topic_id".into(), Value::String(t.clone()));
        }
        obj.insert("timestamp".into(), Value::from(self.timestamp));
        // Adjacent tagging yields {"kind": .., "payload": ..}.
        if let Ok(Value::Object(tagged)) = serde_json::to_value(&self.payload) {
            obj.extend(tagged);
        }
        Value::Object(obj)
    }

    pub fn to_line(&self) -> String {
        self.to_value().to_string()
    }
}

/// Parse a JSONL event log. Blank lines are skipped; unknown fields ignored.
pub fn parse_event_stream(raw: &str) -> Result<Vec<Event>> {
    let mut events = Vec::new();
    for (i, line) in raw.lines().enumerate() {
        let line_no = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let value: Value =
            serde_json::from_str(trimmed).map_err(|e| Error::Parse { line: line_no, message: e.to_string() })?;
        events.push(Event::from_value(line_no, value)?);
    }
    Ok(events)
}

pub fn write_event_stream(events: &[Event]) -> String {
    let mut out = String::new();
    for e in events {
        out.push_str(&e.to_line());
        out.push('\n');
    }
    out
}
