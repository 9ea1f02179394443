//! Simulated photon-counting tomography of states and single-qubit processes.

mod estimate;
mod process;
mod records;

pub use estimate::{
    linear_inversion, log_likelihood, state_tomo_linear, state_tomo_mle, state_tomo_mle_fit, MleFit,
    MLE_MAX_ITERATIONS, MLE_TOL,
};
pub use process::{
    avg_fidelity_from_chi, chi_from_probe_outputs, composite_teleport_fidelity, monte_carlo_fidelity_error,
    probe_states, process_tomo, summarize, ChiMatrix, FidelityEstimate, ProcessMode,
};
pub use records::{
    as_weights, expected_counts, full_settings, minimal_settings, read_records, simulate_counts,
    simulate_counts_operator, stream_rng, write_records, MeasurementRecord, Setting,
};
