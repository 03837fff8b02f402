//! Cycle-accurate soft-error vulnerability analysis of LUT netlists.
//!
//! The pipeline is: parse a netlist ([`netlist`]), schedule it
//! ([`elaborate`]), generate stimuli ([`stimuli`]), simulate the golden
//! design next to one faulty variant per LUT ([`campaign`]) and reduce the
//! mismatch counters to per-LUT vulnerability scores ([`metrics`]).

pub mod campaign;
pub mod elaborate;
pub mod faults;
pub mod metrics;
pub mod netlist;
pub mod reference;
pub mod scalar;
pub mod sim;
pub mod stimuli;
pub mod synth;

pub use campaign::{run_campaign, CampaignConfig, CampaignError, ErrorMatrix, Threads};
pub use elaborate::{elaborate, ElabError, EvalGraph, LutId};
pub use faults::{apply_fault, enumerate_faults, FaultSpec, FaultUniverse};
pub use metrics::{TotalMode, VulnReport, Weights};
pub use netlist::{InitMask, Netlist, NetlistError};
pub use scalar::{Fraction, Scalar};
pub use sim::{FaultOverlay, SimState, Trace};
pub use stimuli::StimulusSet;

/// Exact rational scalar.
pub type Exact = num_rational::BigRational;

/// Report with scores in binary floating point.
pub type Report = VulnReport<f64>;
/// Report with exact rational scores.
pub type ExactReport = VulnReport<Exact>;

/// One stimulus run per simulation.
pub type BitState = SimState<bool>;
/// 64 stimulus runs per simulation, one per bit lane.
pub type LaneState = SimState<u64>;
