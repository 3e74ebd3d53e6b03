//! Raw interaction logs → validated search sessions.
//!
//! The canonical input is one JSON object per line:
//!
//! ```json
//! {"session_id":"s1","user_id":"u1","topic_id":"altitude","timestamp":0,"kind":"query","payload":{"text":"altitude sickness"}}
//! ```
//!
//! `user_id` and `topic_id` are optional on each line; the first non-empty
//! value seen for a session is used.

mod assemble;
mod event;
mod filter;

pub use assemble::{assemble_sessions, PageVisit, Query, SerpClick, SerpView, Session, SessionConfig};
pub use event::{parse_event_stream, write_event_stream, Event, EventPayload, SerpResult, EVENT_KINDS};
pub use filter::{filter_sessions, RejectReason};

/// Default URL prefix identifying search-engine result pages.
pub const DEFAULT_SERP_PREFIX: &str = "https://searchwell.example/search";
