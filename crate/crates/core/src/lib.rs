#![allow(clippy::neg_cmp_op_on_partial_ord)]
//! Benchmarking simulator for compute-in-memory (CIM) accelerators that
//! train neural networks on chip.
//!
//! The crate is organized the way a run flows:
//!
//! * [`device`] models analog synaptic devices and their non-ideal updates.
//! * [`quant`] and [`net`] train a small fixed-point CNN through those devices.
//! * [`mapping`] places the network onto a chip / tile / PE / array hierarchy.
//! * [`archsim`] prices every training step with a unit-cost table.
//! * [`report`] turns per-epoch traces and costs into CSV reports.
//! * [`config`] and [`harness`] load run configurations and drive everything.

pub mod archsim;
pub mod config;
pub mod device;
pub mod error;
pub mod harness;
pub mod mapping;
pub mod net;
pub mod quant;
pub mod report;
pub mod seed;

pub use error::{Error, Result};
