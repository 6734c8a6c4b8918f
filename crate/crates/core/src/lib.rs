//! Exact analysis of quasi-symmetric storage allocations.
//!
//! A file is MDS-coded at rate `1/m` and spread over `β = m·α` of `N` nodes,
//! each holding `F/α` blocks. For fixed-size (`r` random nodes) and
//! probabilistic (each node fails with probability `p`) access, this crate
//! computes the recovery probability `P_s(α)` and the average service rate
//! `μ_s(α)` under exponential node waits, in exact rational arithmetic. The
//! [`oracle`] module recomputes both by enumerating access sets and
//! [`simulate`] estimates them by Monte Carlo.

pub mod analytic;
pub mod combinatorics;
pub mod error;
pub mod model;
pub mod oracle;
pub mod rational;
pub mod simulate;

pub use analytic::{
    access_pmf, conditional_service_rate, conditional_service_time, minimal_spreading_rate,
    optimal_alpha, per_k_bound, rate_table, rate_upper_bound, service_rate, success_prob, KTerm,
    RateResult,
};
pub use combinatorics::{binom_pmf, binomial, hypergeom_pmf, vandermonde_check};
pub use error::{Error, Result};
pub use model::{valid_alphas, AccessModel, Allocation, GeneralAllocation, SystemConfig};
pub use oracle::{enumerate_service_rate, enumerate_success_prob, MAX_ENUMERATION_NODES};
pub use rational::Rational;
pub use simulate::{simulate, simulate_with, SimulationEstimate, SimulationOptions, StratumStats};
