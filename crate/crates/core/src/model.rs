//! System, access and allocation types.
//!
//! A file of `F` blocks is MDS-encoded into `T = m·F` blocks and spread over
//! `N` nodes. A quasi-symmetric allocation puts `F/α` blocks on each of
//! `β = m·α` nodes and nothing elsewhere, so a request can be served exactly
//! when it reaches at least `α` nonempty nodes.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{from_int, parse_rational, Rational};

/// Cluster parameters shared by every computation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SystemConfig {
    n_nodes: u32,
    file_blocks: u64,
    redundancy: u32,
    node_rate: Rational,
}

impl SystemConfig {
    /// A cluster of `n_nodes` nodes, budget `T = redundancy·F`, with every
    /// node serving at `node_rate`. `F` defaults to one block; only the
    /// general-allocation oracle looks at it.
    pub fn new(n_nodes: u32, redundancy: u32, node_rate: Rational) -> Result<Self> {
        Self::with_file_blocks(n_nodes, 1, redundancy, node_rate)
    }

    pub fn with_file_blocks(
        n_nodes: u32,
        file_blocks: u64,
        redundancy: u32,
        node_rate: Rational,
    ) -> Result<Self> {
        if n_nodes == 0 {
            return Err(Error::NoNodes);
        }
        if file_blocks == 0 {
            return Err(Error::NoFileBlocks);
        }
        if redundancy == 0 {
            return Err(Error::NoRedundancy);
        }
        if redundancy > n_nodes {
            return Err(Error::RedundancyExceedsNodes {
                m: redundancy,
                n: n_nodes,
            });
        }
        if !node_rate.is_positive() {
            return Err(Error::NonPositiveRate(node_rate.to_string()));
        }
        Ok(Self {
            n_nodes,
            file_blocks,
            redundancy,
            node_rate,
        })
    }

    /// `N`
    pub fn n_nodes(&self) -> u32 {
        self.n_nodes
    }

    /// `F`
    pub fn file_blocks(&self) -> u64 {
        self.file_blocks
    }

    /// `m`, the inverse code rate.
    pub fn redundancy(&self) -> u32 {
        self.redundancy
    }

    /// `μ`
    pub fn node_rate(&self) -> &Rational {
        &self.node_rate
    }

    /// Total stored blocks `T = m·F`.
    pub fn budget(&self) -> u64 {
        self.redundancy as u64 * self.file_blocks
    }
}

/// Which nodes a request reaches.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum AccessModel {
    /// A uniformly random `r`-subset of all `N` nodes.
    FixedSize { r: u32 },
    /// Every node is tried and each independently fails with probability `p`.
    Probabilistic { p: Rational },
}

impl AccessModel {
    pub fn fixed(r: u32) -> Self {
        AccessModel::FixedSize { r }
    }

    pub fn probabilistic(p: Rational) -> Result<Self> {
        if p.is_negative() || p > Rational::one() {
            return Err(Error::ProbabilityOutOfRange(p.to_string()));
        }
        Ok(AccessModel::Probabilistic { p })
    }

    /// Parses `p` from decimal or fraction text without float rounding.
    pub fn probabilistic_from_str(p: &str) -> Result<Self> {
        Self::probabilistic(parse_rational(p)?)
    }

    /// Checks the model against a cluster.
    pub fn validate(&self, cfg: &SystemConfig) -> Result<()> {
        match self {
            AccessModel::FixedSize { r } => {
                if *r == 0 || *r > cfg.n_nodes {
                    return Err(Error::AccessSizeOutOfRange {
                        r: *r,
                        n: cfg.n_nodes,
                    });
                }
            }
            AccessModel::Probabilistic { p } => {
                if p.is_negative() || *p > Rational::one() {
                    return Err(Error::ProbabilityOutOfRange(p.to_string()));
                }
            }
        }
        Ok(())
    }

    /// Probability a single node is reached, `1 − p`. Fixed-size access has
    /// no such per-node parameter.
    pub fn success_probability(&self) -> Option<Rational> {
        match self {
            AccessModel::FixedSize { .. } => None,
            AccessModel::Probabilistic { p } => Some(Rational::one() - p),
        }
    }
}

/// A quasi-symmetric `(α, β)` allocation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Allocation {
    alpha: u32,
    beta: u32,
    per_node_blocks: Rational,
}

impl Allocation {
    pub fn new(cfg: &SystemConfig, access: &AccessModel, alpha: u32) -> Result<Self> {
        access.validate(cfg)?;
        if alpha == 0 {
            return Err(Error::ZeroAlpha);
        }
        if let AccessModel::FixedSize { r } = access {
            if alpha > *r {
                return Err(Error::AlphaExceedsAccessSize { alpha, r: *r });
            }
        }
        let beta = cfg.redundancy as u64 * alpha as u64;
        if beta > cfg.n_nodes as u64 {
            return Err(Error::BetaExceedsNodes {
                alpha,
                beta,
                n: cfg.n_nodes,
            });
        }
        Ok(Self {
            alpha,
            beta: beta as u32,
            per_node_blocks: Rational::new(cfg.file_blocks.into(), alpha.into()),
        })
    }

    /// Number of nonempty nodes a request must reach.
    pub fn alpha(&self) -> u32 {
        self.alpha
    }

    /// Number of nonempty nodes, `m·α`.
    pub fn beta(&self) -> u32 {
        self.beta
    }

    /// Blocks on each nonempty node, `F/α`.
    pub fn per_node_blocks(&self) -> &Rational {
        &self.per_node_blocks
    }
}

/// Arbitrary per-node block counts `x_1..x_N`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GeneralAllocation {
    blocks: Vec<Rational>,
}

impl GeneralAllocation {
    pub fn new(cfg: &SystemConfig, blocks: Vec<Rational>) -> Result<Self> {
        if blocks.len() != cfg.n_nodes as usize {
            return Err(Error::AllocationLength {
                got: blocks.len(),
                n: cfg.n_nodes,
            });
        }
        let file = from_int(cfg.file_blocks as i64);
        for (index, x) in blocks.iter().enumerate() {
            if x.is_negative() || *x > file {
                return Err(Error::NodeBlocksOutOfRange {
                    index,
                    blocks: x.to_string(),
                    file_blocks: cfg.file_blocks,
                });
            }
        }
        let total: Rational = blocks.iter().sum();
        let budget = from_int(cfg.budget() as i64);
        if total != budget {
            return Err(Error::BudgetMismatch {
                total: total.to_string(),
                budget: budget.to_string(),
            });
        }
        Ok(Self { blocks })
    }

    /// The quasi-symmetric layout with nonempty nodes at `0..β`.
    pub fn quasi_symmetric(cfg: &SystemConfig, alloc: &Allocation) -> Self {
        let nonempty: Vec<u32> = (0..alloc.beta).collect();
        Self::quasi_symmetric_at(cfg, alloc, &nonempty)
            .expect("canonical placement is always valid")
    }

    /// The quasi-symmetric layout with nonempty nodes at the given indices.
    pub fn quasi_symmetric_at(
        cfg: &SystemConfig,
        alloc: &Allocation,
        nonempty: &[u32],
    ) -> Result<Self> {
        let mut blocks = vec![Rational::zero(); cfg.n_nodes as usize];
        check_placement(cfg, alloc, nonempty)?;
        for &i in nonempty {
            blocks[i as usize] = alloc.per_node_blocks.clone();
        }
        Ok(Self { blocks })
    }

    pub fn blocks(&self) -> &[Rational] {
        &self.blocks
    }
}

/// A placement must name `β` distinct node indices below `N`.
pub(crate) fn check_placement(
    cfg: &SystemConfig,
    alloc: &Allocation,
    nonempty: &[u32],
) -> Result<()> {
    if nonempty.len() != alloc.beta as usize {
        return Err(Error::InvalidPlacement(format!(
            "expected {} nonempty nodes, got {}",
            alloc.beta,
            nonempty.len()
        )));
    }
    let mut seen = vec![false; cfg.n_nodes as usize];
    for &i in nonempty {
        let slot = seen.get_mut(i as usize).ok_or_else(|| {
            Error::InvalidPlacement(format!("node {i} outside 0..{}", cfg.n_nodes))
        })?;
        if *slot {
            return Err(Error::InvalidPlacement(format!("node {i} listed twice")));
        }
        *slot = true;
    }
    Ok(())
}

/// Every admissible `α` for this cluster and access model, ascending.
///
/// `α = 1` (minimal spreading) always comes first. Fixed-size access caps
/// `α` at `r`; both models cap `β = m·α` at `N`.
pub fn valid_alphas(cfg: &SystemConfig, access: &AccessModel) -> Vec<u32> {
    let by_nodes = cfg.n_nodes / cfg.redundancy;
    let max = match access {
        AccessModel::FixedSize { r } => by_nodes.min(*r),
        AccessModel::Probabilistic { .. } => by_nodes,
    };
    (1..=max).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn cfg(n: u32, m: u32) -> SystemConfig {
        SystemConfig::new(n, m, from_int(1)).unwrap()
    }

    #[test]
    fn config_invariants() {
        assert_eq!(SystemConfig::new(0, 1, from_int(1)), Err(Error::NoNodes));
        assert_eq!(
            SystemConfig::new(3, 0, from_int(1)),
            Err(Error::NoRedundancy)
        );
        assert!(matches!(
            SystemConfig::new(3, 4, from_int(1)),
            Err(Error::RedundancyExceedsNodes { m: 4, n: 3 })
        ));
        assert!(matches!(
            SystemConfig::new(3, 1, from_int(0)),
            Err(Error::NonPositiveRate(_))
        ));
        assert!(SystemConfig::with_file_blocks(3, 0, 1, from_int(1)).is_err());
        assert_eq!(cfg(30, 2).budget(), 2);
    }

    #[test]
    fn access_validation() {
        let c = cfg(30, 2);
        assert!(AccessModel::fixed(0).validate(&c).is_err());
        assert!(AccessModel::fixed(31).validate(&c).is_err());
        assert!(AccessModel::fixed(30).validate(&c).is_ok());
        assert!(AccessModel::probabilistic(ratio(11, 10)).is_err());
        assert!(AccessModel::probabilistic(ratio(-1, 10)).is_err());
        assert_eq!(
            AccessModel::probabilistic_from_str("0.35").unwrap(),
            AccessModel::Probabilistic { p: ratio(7, 20) }
        );
        assert_eq!(
            AccessModel::probabilistic_from_str("0.25")
                .unwrap()
                .success_probability(),
            Some(ratio(3, 4))
        );
    }

    #[test]
    fn valid_alpha_examples() {
        assert_eq!(
            valid_alphas(&cfg(30, 2), &AccessModel::fixed(5)),
            vec![1, 2, 3, 4, 5]
        );
        let prob = AccessModel::probabilistic(ratio(1, 2)).unwrap();
        assert_eq!(
            valid_alphas(&cfg(30, 2), &prob),
            (1..=15).collect::<Vec<_>>()
        );
        assert_eq!(valid_alphas(&cfg(4, 4), &AccessModel::fixed(3)), vec![1]);
        assert_eq!(
            valid_alphas(&cfg(30, 6), &AccessModel::fixed(5)),
            vec![1, 2, 3, 4, 5]
        );
    }

    #[test]
    fn valid_alphas_match_constructor() {
        for n in 1..=16 {
            for m in 1..=n {
                let c = cfg(n, m);
                let mut models: Vec<AccessModel> = (1..=n).map(AccessModel::fixed).collect();
                models.push(AccessModel::probabilistic(ratio(1, 3)).unwrap());
                for access in models {
                    let alphas = valid_alphas(&c, &access);
                    assert_eq!(alphas.first(), Some(&1));
                    assert!(alphas.windows(2).all(|w| w[0] < w[1]));
                    for alpha in 1..=n + 1 {
                        let ok = Allocation::new(&c, &access, alpha).is_ok();
                        assert_eq!(
                            ok,
                            alphas.contains(&alpha),
                            "N={n} m={m} {access:?} a={alpha}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn allocation_shape() {
        let c = SystemConfig::with_file_blocks(30, 6, 2, from_int(1)).unwrap();
        let a = Allocation::new(&c, &AccessModel::fixed(5), 4).unwrap();
        assert_eq!(a.beta(), 8);
        assert_eq!(a.per_node_blocks(), &ratio(3, 2));
        assert!(matches!(
            Allocation::new(&c, &AccessModel::fixed(5), 6),
            Err(Error::AlphaExceedsAccessSize { alpha: 6, r: 5 })
        ));
        assert_eq!(
            Allocation::new(&c, &AccessModel::fixed(5), 0),
            Err(Error::ZeroAlpha)
        );
    }

    #[test]
    fn general_allocation_invariants() {
        let c = SystemConfig::with_file_blocks(4, 2, 2, from_int(1)).unwrap();
        let ok = vec![from_int(2), from_int(1), from_int(1), from_int(0)];
        assert!(GeneralAllocation::new(&c, ok).is_ok());
        let too_big = vec![from_int(3), from_int(1), from_int(0), from_int(0)];
        assert!(matches!(
            GeneralAllocation::new(&c, too_big),
            Err(Error::NodeBlocksOutOfRange { index: 0, .. })
        ));
        let short = [from_int(2), from_int(2), from_int(0), from_int(0)];
        assert!(GeneralAllocation::new(&c, short[..3].to_vec()).is_err());
        let under = vec![from_int(1), from_int(1), from_int(1), from_int(0)];
        assert!(matches!(
            GeneralAllocation::new(&c, under),
            Err(Error::BudgetMismatch { .. })
        ));
    }

    #[test]
    fn quasi_symmetric_layout_meets_budget() {
        let c = SystemConfig::with_file_blocks(12, 5, 3, from_int(1)).unwrap();
        let access = AccessModel::fixed(6);
        for alpha in valid_alphas(&c, &access) {
            let a = Allocation::new(&c, &access, alpha).unwrap();
            let g = GeneralAllocation::quasi_symmetric(&c, &a);
            // Re-validating through the checked constructor proves the budget.
            assert!(GeneralAllocation::new(&c, g.blocks().to_vec()).is_ok());
        }
        let a = Allocation::new(&c, &access, 1).unwrap();
        assert!(GeneralAllocation::quasi_symmetric_at(&c, &a, &[0, 0, 1]).is_err());
        assert!(GeneralAllocation::quasi_symmetric_at(&c, &a, &[0, 12, 1]).is_err());
        assert!(GeneralAllocation::quasi_symmetric_at(&c, &a, &[0, 1]).is_err());
        assert!(GeneralAllocation::quasi_symmetric_at(&c, &a, &[11, 3, 7]).is_ok());
    }
}
