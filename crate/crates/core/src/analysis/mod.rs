//! Discrepancy measurement and closed-form prediction.

mod discrepancy;
mod predict;
mod reference;
mod sum;

pub use discrepancy::{
    flow_from_input, flow_from_output, measure_flow_discrepancy, measure_oscillator_discrepancy,
    measure_reservoir_discrepancy, DiscrepancyPoint, DiscrepancySeries, FlowProbe, OscillatorProbe,
    ReservoirProbe,
};
pub use predict::{
    oscillator_single_change_limit, predict_exact_sum, predict_leading, predict_leading_with_jumps,
    predict_regrouped, FlowDerivatives, FlowTrace, PiecewiseLinearFlow,
};
pub use reference::{reference_oscillator, OscillatorParams};
pub use sum::{cumulative, CompensatedSum};
