//! Kinetic exchange model of wealth with a uniform saving propensity.
//!
//! Agents meet in random pairs and split their combined non-saved wealth at
//! a uniformly random fraction; a propensity `lambda` of each agent's wealth
//! sits out of every trade. Total wealth is conserved exactly (up to float
//! rounding) and the stationary distribution is numerically indistinguishable
//! from a Gamma law whose shape grows with `lambda`.
//!
//! The `law` submodule carries the closed-form side (shape map, Gamma
//! density, Gini functionals); `sim` the Monte Carlo side (exchange kernel,
//! seeded runs, sample Gini, the analytic-vs-simulated curve). Both re-export
//! here; the module is abbreviated `kem` throughout.

mod law;
mod sim;

pub use law::{gini_analytic, gini_numeric, n_of_lambda, GammaLaw};
pub use sim::{
    gini_curve, ks_distance, sample_gini, simulate, simulate_stream, wealth_histogram, GiniCurve,
    GiniCurvePoint, HistogramBin, SimConfig, SimRun, Snapshot, WealthState, RNG_ALGORITHM,
};
