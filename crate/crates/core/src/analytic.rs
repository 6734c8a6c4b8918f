//! Closed-form service rate and recovery probability for quasi-symmetric
//! allocations.
//!
//! A request reaching `k` nonempty nodes completes at the `α`-th of `k`
//! i.i.d. exponential(μ) waits, whose mean is `(1/μ)·Σ_{i=1}^{α} 1/(k−α+i)`.
//! The average service rate weights the reciprocal of that mean by the
//! probability of reaching exactly `k` nonempty nodes:
//!
//! ```text
//! μ_s(α) = Σ_{k=α}^{mα} P(k, α) · μ_s(α | k)
//! ```

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::combinatorics::{binom_pmf, hypergeom_pmf};
use crate::error::{Error, Result};
use crate::model::{valid_alphas, AccessModel, Allocation, SystemConfig};
use crate::rational::{from_int, Rational};

/// One `k` term of the decomposition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KTerm {
    /// `P(k, α)`
    pub probability: Rational,
    /// `μ_s(α | k)`
    pub conditional_rate: Rational,
}

/// `μ_s(α)` together with the per-`k` terms that sum to it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RateResult {
    pub value: Rational,
    pub alpha: u32,
    pub per_k_terms: BTreeMap<u32, KTerm>,
}

impl RateResult {
    /// Recomputes `Σ_k P(k,α)·μ_s(α|k)` from the stored terms.
    pub fn recombine(&self) -> Rational {
        self.per_k_terms
            .values()
            .map(|t| &t.probability * &t.conditional_rate)
            .sum()
    }
}

/// `P(k, α)`: probability a request reaches exactly `k` nonempty nodes.
pub fn access_pmf(
    cfg: &SystemConfig,
    access: &AccessModel,
    alloc: &Allocation,
    k: i64,
) -> Result<Rational> {
    let beta = alloc.beta() as u64;
    match access {
        AccessModel::FixedSize { r } => hypergeom_pmf(k, cfg.n_nodes() as u64, beta, *r as u64),
        AccessModel::Probabilistic { p } => binom_pmf(k, beta, &(Rational::one() - p)),
    }
}

/// Mean of the `α`-th smallest of `k` i.i.d. exponential(`mu`) waits.
pub fn conditional_service_time(alpha: u32, k: u32, mu: &Rational) -> Result<Rational> {
    if alpha == 0 {
        return Err(Error::ZeroAlpha);
    }
    if k < alpha {
        return Err(Error::TooFewDataNodes { k, alpha });
    }
    let harmonic: Rational = (k - alpha + 1..=k)
        .map(|j| Rational::new(1.into(), j.into()))
        .sum();
    Ok(harmonic / mu)
}

/// `μ_s(α | k)`, the reciprocal of [`conditional_service_time`].
pub fn conditional_service_rate(alpha: u32, k: u32, mu: &Rational) -> Result<Rational> {
    conditional_service_time(alpha, k, mu).map(|t| t.recip())
}

/// Highest `k` with nonzero access probability.
fn max_k(access: &AccessModel, alloc: &Allocation) -> u32 {
    match access {
        AccessModel::FixedSize { r } => alloc.beta().min(*r),
        AccessModel::Probabilistic { .. } => alloc.beta(),
    }
}

/// Average service rate `μ_s(α)`.
pub fn service_rate(
    cfg: &SystemConfig,
    access: &AccessModel,
    alloc: &Allocation,
) -> Result<RateResult> {
    let alpha = alloc.alpha();
    let mu = cfg.node_rate();
    let mut per_k_terms = BTreeMap::new();
    let mut value = Rational::zero();
    for k in alpha..=max_k(access, alloc) {
        let probability = access_pmf(cfg, access, alloc, k as i64)?;
        let conditional_rate = conditional_service_rate(alpha, k, mu)?;
        value += &probability * &conditional_rate;
        per_k_terms.insert(
            k,
            KTerm {
                probability,
                conditional_rate,
            },
        );
    }
    Ok(RateResult {
        value,
        alpha,
        per_k_terms,
    })
}

/// Probability `P_s(α)` that the reached nodes hold at least `F` blocks.
pub fn success_prob(
    cfg: &SystemConfig,
    access: &AccessModel,
    alloc: &Allocation,
) -> Result<Rational> {
    (alloc.alpha()..=max_k(access, alloc))
        .map(|k| access_pmf(cfg, access, alloc, k as i64))
        .sum()
}

/// `μ_s(1)` in closed form: `μ·m·r/N` for fixed-size access, `m·μ·(1−p)`
/// for probabilistic access.
pub fn minimal_spreading_rate(cfg: &SystemConfig, access: &AccessModel) -> Rational {
    let m_mu = from_int(cfg.redundancy() as i64) * cfg.node_rate();
    match access {
        AccessModel::FixedSize { r } => m_mu * Rational::new((*r).into(), cfg.n_nodes().into()),
        AccessModel::Probabilistic { p } => m_mu * (Rational::one() - p),
    }
}

/// Strict upper bound on `μ_s(α)` for `α ≥ 2`. It does not depend on `α`
/// and coincides with [`minimal_spreading_rate`].
pub fn rate_upper_bound(cfg: &SystemConfig, access: &AccessModel, alpha: u32) -> Result<Rational> {
    if alpha < 2 {
        return Err(Error::BoundNeedsAlphaTwo(alpha));
    }
    Allocation::new(cfg, access, alpha)?;
    Ok(minimal_spreading_rate(cfg, access))
}

/// `μ·k/α`, which bounds `μ_s(α | k)` strictly for `α ≥ 2` and equals it at
/// `α = 1`.
pub fn per_k_bound(alpha: u32, k: u32, mu: &Rational) -> Result<Rational> {
    if alpha == 0 {
        return Err(Error::ZeroAlpha);
    }
    if k < alpha {
        return Err(Error::TooFewDataNodes { k, alpha });
    }
    Ok(mu * Rational::new(k.into(), alpha.into()))
}

/// `μ_s(α)` for every valid `α`, ascending. Evaluated in parallel; the
/// output is identical to a sequential sweep.
pub fn rate_table(cfg: &SystemConfig, access: &AccessModel) -> Result<Vec<RateResult>> {
    access.validate(cfg)?;
    valid_alphas(cfg, access)
        .into_par_iter()
        .map(|alpha| {
            let alloc = Allocation::new(cfg, access, alpha)?;
            service_rate(cfg, access, &alloc)
        })
        .collect()
}

/// Exhaustive argmax of `μ_s(α)`; ties go to the smallest `α`.
pub fn optimal_alpha(cfg: &SystemConfig, access: &AccessModel) -> Result<(u32, Rational)> {
    let table = rate_table(cfg, access)?;
    let mut best: Option<&RateResult> = None;
    for row in &table {
        if best.is_none_or(|b| row.value > b.value) {
            best = Some(row);
        }
    }
    let best = best.expect("alpha = 1 is always valid");
    Ok((best.alpha, best.value.clone()))
}
