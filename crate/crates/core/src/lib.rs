//! Event reactions and topics of collective attention.
//!
//! The pipeline reads news-portal events, monthly clickstream edge lists
//! and hourly page-view dumps, builds one article network per event, finds
//! communities that are both hyperlinked and co-attended in time (event
//! reactions) and clusters those across events into topics.

pub mod ingest;
pub mod graph;
pub mod network;
pub mod stats;
pub mod correlation;
pub mod community;
pub mod reactions;
pub mod topics;
pub mod labels;
pub mod synth;
pub mod pipeline;
