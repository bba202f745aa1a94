//! System-level simulator for LTE-Advanced cells carrying mixed
//! human-to-human (H2H) and machine-to-machine (M2M) traffic.
//!
//! The crate models a hexagonal multi-cell downlink with five link types
//! (eNB-to-UE, eNB-to-MTCD, eNB-to-MTCG, MTCG-to-MTCD, MTCD-to-MTCD),
//! a backhaul/access slot partition, utility-maximizing resource-block
//! scheduling, and a distributed graph-coloring subchannel assignment
//! for MTCD peer-to-peer pairs. Monte-Carlo drops are orchestrated by
//! [`engine`] and configured through [`config::SimConfig`].

pub mod channel;
pub mod config;
pub mod engine;
pub mod error;
pub mod graphalloc;
pub mod grid;
pub mod metrics;
pub mod scheduler;
pub mod topology;
pub mod utility;

pub use config::SimConfig;
pub use error::{Result, SimError};
