//! Exact Gaussian draws and heat-bath sampling of the pinned Gibbs measure.

mod chain;
mod exact;
mod profile;
mod trace;

pub use chain::{
    gibbs_sweep, initial_state, run_chain, ChainDiagnostics, ChainRun, ChainSample, ChainState, HeatBath,
    InitialState, SamplerConfig, SweepOrder,
};
pub use exact::{bridge_correction, bridge_map, sample_integrated_rw, sample_pinned_gaussian};
pub use profile::{contact_number, empirical_profile, MacroProfile};
pub use trace::{run_replicas, write_trace, ReplicaSummary, TraceWriter};
