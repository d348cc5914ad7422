//! Time evolution: spectral transport on a periodic slab, the semi-implicit
//! gain/loss stepper for F, the integrating-factor stepper for h = w f, the
//! run driver and the stretched-exponential decay fit.

mod fit;
mod initial;
mod record;
mod simulate;
mod step;

pub use fit::{decay_fit, decay_fit_window, DecayFit, PowerFit, DEFAULT_FIT_WINDOW, MIN_FIT_ROWS};
pub use initial::{InitialData, InitialField};
pub use record::{Row, TimeSeriesRecord, CSV_COLUMNS};
pub use simulate::{
    diagnostics, simulate, simulate_with, SimulationConfig, Stepper, DEFAULT_INSTABILITY_FACTOR,
};
pub use step::{
    evolve_h_form, picard_contraction_ratios, picard_iterates, picard_step, transport_step,
    HFormTerms, SimulationState, StepOptions, MAX_INNER_ITERATIONS,
};
