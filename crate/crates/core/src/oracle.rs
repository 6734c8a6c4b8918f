//! Brute-force recovery probability and service rate by enumerating every
//! access set.
//!
//! Nothing here goes through the `k`-aggregated formulas: each subset `A` is
//! visited, its stored blocks are summed, and the recovery indicator
//! `Σ_{i∈A} x_i ≥ F` is evaluated literally. Subsets with equal `P(A)` are
//! tallied together before weighting, which is the same sum regrouped.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::analytic::conditional_service_rate;
use crate::combinatorics::binomial;
use crate::error::{Error, Result};
use crate::model::{check_placement, AccessModel, Allocation, GeneralAllocation, SystemConfig};
use crate::rational::{from_biguint, from_int, Rational};

/// Largest `N` the enumerator accepts (`2^20` subsets).
pub const MAX_ENUMERATION_NODES: u32 = 20;

/// Block counts rescaled to a common denominator, so subset sums are
/// integer additions.
struct ScaledBlocks {
    blocks: Vec<BigUint>,
    threshold: BigUint,
}

impl ScaledBlocks {
    fn new(blocks: &[Rational], file_blocks: u64) -> Self {
        let lcm = blocks
            .iter()
            .fold(num_bigint::BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let scale = |x: &Rational| -> BigUint {
            (x * Rational::from_integer(lcm.clone()))
                .to_integer()
                .to_biguint()
                .expect("block counts are nonnegative")
        };
        Self {
            blocks: blocks.iter().map(scale).collect(),
            threshold: scale(&from_int(file_blocks as i64)),
        }
    }

    fn recovers(&self, mask: u32) -> bool {
        let mut sum = BigUint::zero();
        for (i, x) in self.blocks.iter().enumerate() {
            if mask & (1 << i) != 0 {
                sum += x;
            }
        }
        sum >= self.threshold
    }
}

fn guard(cfg: &SystemConfig) -> Result<()> {
    if cfg.n_nodes() > MAX_ENUMERATION_NODES {
        return Err(Error::EnumerationTooLarge {
            n: cfg.n_nodes(),
            max: MAX_ENUMERATION_NODES,
        });
    }
    Ok(())
}

/// Visits every access set in ascending bitmask order with its size.
fn for_each_access_set(cfg: &SystemConfig, access: &AccessModel, mut visit: impl FnMut(u32, u32)) {
    let n = cfg.n_nodes();
    let r = match access {
        AccessModel::FixedSize { r } => Some(*r),
        AccessModel::Probabilistic { .. } => None,
    };
    for mask in 0u32..(1u32 << n) {
        let size = mask.count_ones();
        if r.is_none_or(|r| r == size) {
            visit(mask, size);
        }
    }
}

/// `P(A)` for an access set of the given size.
fn set_weights(cfg: &SystemConfig, access: &AccessModel) -> Vec<Rational> {
    let n = cfg.n_nodes();
    match access {
        AccessModel::FixedSize { r } => {
            let each = from_biguint(binomial(n as u64, *r as i64)).recip();
            (0..=n)
                .map(|s| {
                    if s == *r {
                        each.clone()
                    } else {
                        Rational::zero()
                    }
                })
                .collect()
        }
        AccessModel::Probabilistic { p } => {
            let q = Rational::one() - p;
            (0..=n)
                .map(|s| {
                    num_traits::pow(q.clone(), s as usize)
                        * num_traits::pow(p.clone(), (n - s) as usize)
                })
                .collect()
        }
    }
}

/// `P_s` for an arbitrary allocation by direct summation over access sets.
pub fn enumerate_success_prob(
    cfg: &SystemConfig,
    access: &AccessModel,
    alloc: &GeneralAllocation,
) -> Result<Rational> {
    enumerate_success_prob_blocks(cfg, access, alloc.blocks())
}

/// [`enumerate_success_prob`] for a raw per-node layout that need not spend
/// exactly the budget `T`. Each entry must lie in `[0, F]`.
pub fn enumerate_success_prob_blocks(
    cfg: &SystemConfig,
    access: &AccessModel,
    blocks: &[Rational],
) -> Result<Rational> {
    guard(cfg)?;
    access.validate(cfg)?;
    if blocks.len() != cfg.n_nodes() as usize {
        return Err(Error::AllocationLength {
            got: blocks.len(),
            n: cfg.n_nodes(),
        });
    }
    let file = from_int(cfg.file_blocks() as i64);
    if let Some((index, x)) = blocks
        .iter()
        .enumerate()
        .find(|(_, x)| x.is_negative() || **x > file)
    {
        return Err(Error::NodeBlocksOutOfRange {
            index,
            blocks: x.to_string(),
            file_blocks: cfg.file_blocks(),
        });
    }
    let scaled = ScaledBlocks::new(blocks, cfg.file_blocks());
    let mut hits = vec![0u64; cfg.n_nodes() as usize + 1];
    for_each_access_set(cfg, access, |mask, size| {
        if scaled.recovers(mask) {
            hits[size as usize] += 1;
        }
    });
    let weights = set_weights(cfg, access);
    Ok(hits
        .iter()
        .zip(&weights)
        .filter(|(&count, _)| count > 0)
        .map(|(&count, w)| from_int(count as i64) * w)
        .sum())
}

/// `μ_s(α)` by direct summation over access sets, nonempty nodes at `0..β`.
pub fn enumerate_service_rate(
    cfg: &SystemConfig,
    access: &AccessModel,
    alloc: &Allocation,
) -> Result<Rational> {
    let nonempty: Vec<u32> = (0..alloc.beta()).collect();
    enumerate_service_rate_placed(cfg, access, alloc, &nonempty)
}

/// [`enumerate_service_rate`] with the `β` nonempty nodes at explicit
/// indices.
pub fn enumerate_service_rate_placed(
    cfg: &SystemConfig,
    access: &AccessModel,
    alloc: &Allocation,
    nonempty: &[u32],
) -> Result<Rational> {
    guard(cfg)?;
    access.validate(cfg)?;
    Allocation::new(cfg, access, alloc.alpha())?;
    check_placement(cfg, alloc, nonempty)?;
    let layout = GeneralAllocation::quasi_symmetric_at(cfg, alloc, nonempty)?;
    let scaled = ScaledBlocks::new(layout.blocks(), cfg.file_blocks());
    let data_mask: u32 = nonempty.iter().fold(0, |m, &i| m | (1 << i));

    // hits[size][k]: recovering access sets with |A| = size and k data nodes.
    let n = cfg.n_nodes() as usize;
    let beta = alloc.beta() as usize;
    let mut hits = vec![vec![0u64; beta + 1]; n + 1];
    for_each_access_set(cfg, access, |mask, size| {
        if scaled.recovers(mask) {
            let k = (mask & data_mask).count_ones() as usize;
            hits[size as usize][k] += 1;
        }
    });

    let weights = set_weights(cfg, access);
    let mu = cfg.node_rate();
    let mut total = Rational::zero();
    for (size, by_k) in hits.iter().enumerate() {
        for (k, &count) in by_k.iter().enumerate() {
            if count == 0 {
                continue;
            }
            let rate = conditional_service_rate(alloc.alpha(), k as u32, mu)?;
            total += from_int(count as i64) * &weights[size] * rate;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{service_rate, success_prob};
    use crate::rational::ratio;

    fn one() -> Rational {
        from_int(1)
    }

    #[test]
    fn success_examples() {
        let cfg = SystemConfig::new(4, 1, one()).unwrap();
        let access = AccessModel::fixed(2);
        let alloc = Allocation::new(&cfg, &access, 1).unwrap();
        let layout = GeneralAllocation::quasi_symmetric(&cfg, &alloc);
        assert_eq!(
            enumerate_success_prob(&cfg, &access, &layout).unwrap(),
            ratio(1, 2)
        );

        let cfg = SystemConfig::with_file_blocks(6, 3, 2, one()).unwrap();
        let mut x = vec![from_int(0); 6];
        x[0] = from_int(3);
        x[1] = from_int(3);
        let layout = GeneralAllocation::new(&cfg, x).unwrap();
        assert_eq!(
            enumerate_success_prob(&cfg, &AccessModel::fixed(3), &layout).unwrap(),
            ratio(4, 5)
        );

        let cfg = SystemConfig::new(5, 1, one()).unwrap();
        let mut x = vec![from_int(0); 5];
        x[0] = from_int(1);
        let layout = GeneralAllocation::new(&cfg, x).unwrap();
        let dead = AccessModel::probabilistic(ratio(1, 1)).unwrap();
        assert_eq!(
            enumerate_success_prob(&cfg, &dead, &layout).unwrap(),
            ratio(0, 1)
        );
    }

    #[test]
    fn service_examples() {
        let cfg = SystemConfig::new(4, 1, one()).unwrap();
        let access = AccessModel::fixed(2);
        let alloc = Allocation::new(&cfg, &access, 1).unwrap();
        assert_eq!(
            enumerate_service_rate(&cfg, &access, &alloc).unwrap(),
            ratio(1, 2)
        );

        let cfg = SystemConfig::new(6, 2, one()).unwrap();
        let access = AccessModel::fixed(3);
        let alloc = Allocation::new(&cfg, &access, 1).unwrap();
        assert_eq!(
            enumerate_service_rate(&cfg, &access, &alloc).unwrap(),
            ratio(1, 1)
        );

        let access = AccessModel::probabilistic(ratio(1, 2)).unwrap();
        let alloc = Allocation::new(&cfg, &access, 2).unwrap();
        assert_eq!(
            enumerate_service_rate(&cfg, &access, &alloc).unwrap(),
            ratio(23, 35)
        );
    }

    #[test]
    fn size_guard() {
        let cfg = SystemConfig::new(25, 2, one()).unwrap();
        let access = AccessModel::fixed(5);
        let alloc = Allocation::new(&cfg, &access, 1).unwrap();
        assert_eq!(
            enumerate_service_rate(&cfg, &access, &alloc),
            Err(Error::EnumerationTooLarge { n: 25, max: 20 })
        );
        let layout = GeneralAllocation::quasi_symmetric(&cfg, &alloc);
        assert!(enumerate_success_prob(&cfg, &access, &layout).is_err());
    }

    #[test]
    fn agrees_with_analytic_on_small_grid() {
        let ps = [
            ratio(0, 1),
            ratio(1, 4),
            ratio(1, 2),
            ratio(3, 4),
            ratio(1, 1),
        ];
        for n in 1..=8u32 {
            for m in 1..=n.min(4) {
                let cfg = SystemConfig::with_file_blocks(n, 12, m, ratio(3, 2)).unwrap();
                let mut models: Vec<AccessModel> = (1..=n).map(AccessModel::fixed).collect();
                models.extend(
                    ps.iter()
                        .map(|p| AccessModel::probabilistic(p.clone()).unwrap()),
                );
                for access in &models {
                    for alpha in crate::model::valid_alphas(&cfg, access) {
                        let alloc = Allocation::new(&cfg, access, alpha).unwrap();
                        let layout = GeneralAllocation::quasi_symmetric(&cfg, &alloc);
                        assert_eq!(
                            enumerate_success_prob(&cfg, access, &layout).unwrap(),
                            success_prob(&cfg, access, &alloc).unwrap()
                        );
                        assert_eq!(
                            enumerate_service_rate(&cfg, access, &alloc).unwrap(),
                            service_rate(&cfg, access, &alloc).unwrap().value
                        );
                    }
                }
            }
        }
    }
}
