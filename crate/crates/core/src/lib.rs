//! Replica placement for video-sharing networks split into geographic zones.
//!
//! Each file is moved to the zone where serving all demand is cheapest (or,
//! optionally, to the zone with the most demand). Replicas are then added
//! wherever a zone with enough hits sees an access cost above a cap, either
//! in the requesting zone itself ([`duplication::Strategy::Caching`]) or in
//! the busiest zone within the cap ([`duplication::Strategy::Fetching`]).
//! [`accounting`] prices the resulting gain against per-replica hosting.
//!
//! ```
//! use vidrep::{canonical, duplication::{duplicate, Strategy}, model::Thresholds, placement::relocate_all};
//!
//! let net = canonical::network();
//! let homes = relocate_all(&net, canonical::RELOCATION).placement;
//! let run = duplicate(&net, &homes, Strategy::Caching, Thresholds::new(5, 0));
//! assert_eq!(run.duplicates(), 13);
//! ```

pub mod accounting;
pub mod canonical;
pub mod cli;
pub mod config;
pub mod duplication;
pub mod model;
pub mod oracle;
pub mod placement;
pub mod report;
pub mod topology;
pub mod verify;
