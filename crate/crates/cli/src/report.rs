//! Tabular output: sweep CSVs, simulation strata and figure presets.
//!
//! Exact columns are reduced `num/den` strings. Every float column is the
//! matching exact value rendered to 12 significant digits, half to even.

use std::fmt::Write as _;

use qsalloc_core::rational::{from_f64, ratio, to_decimal_string, to_fraction_string};
use qsalloc_core::simulate::{chi_squared_gof, ChiSquaredTest};
use qsalloc_core::{
    access_pmf, conditional_service_time, minimal_spreading_rate, rate_table, rate_upper_bound,
    success_prob, AccessModel, Allocation, Rational, SimulationEstimate, SystemConfig,
};

use crate::error::CliResult;
use crate::spec::{AccessSpec, BaseParams, ExperimentSpec, SweepVariable};

pub const SIG_DIGITS: u32 = 12;

pub const SWEEP_HEADER: &str =
    "sweep_var,alpha,beta,m,N,r_or_p,mu,P_s_exact,P_s_float,mu_s_exact,mu_s_float,bound_float";

pub const STRATA_HEADER: &str = "k,count,empirical_pk,analytic_pk,mean_time,sd_time,analytic_time";

pub fn decimal(value: &Rational) -> String {
    to_decimal_string(value, SIG_DIGITS)
}

/// `1/3 ≈ 0.333333333333`
pub fn exact_and_decimal(value: &Rational) -> String {
    format!("{} ≈ {}", to_fraction_string(value), decimal(value))
}

fn float_cell(value: f64) -> String {
    from_f64(value).map(|v| decimal(&v)).unwrap_or_default()
}

/// `r` for fixed-size access, `p` as a decimal for probabilistic access.
pub fn access_label(access: &AccessModel) -> String {
    match access {
        AccessModel::FixedSize { r } => r.to_string(),
        AccessModel::Probabilistic { p } => decimal(p),
    }
}

pub fn describe_access(access: &AccessModel) -> String {
    match access {
        AccessModel::FixedSize { r } => format!("fixed-size r = {r}"),
        AccessModel::Probabilistic { p } => format!("probabilistic p = {}", decimal(p)),
    }
}

/// One `(sweep value, α)` row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepRow {
    pub sweep_var: &'static str,
    pub alpha: u32,
    pub beta: u32,
    pub m: u32,
    pub n: u32,
    pub r_or_p: String,
    pub mu: Rational,
    pub success_prob: Rational,
    pub service_rate: Rational,
    /// `rate_upper_bound` for `α ≥ 2`; the attained closed form at `α = 1`.
    pub bound: Rational,
}

impl SweepRow {
    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.sweep_var,
            self.alpha,
            self.beta,
            self.m,
            self.n,
            self.r_or_p,
            decimal(&self.mu),
            to_fraction_string(&self.success_prob),
            decimal(&self.success_prob),
            to_fraction_string(&self.service_rate),
            decimal(&self.service_rate),
            decimal(&self.bound),
        )
    }
}

/// Evaluates every row of a sweep, in sweep order then ascending `α`.
pub fn sweep_rows(spec: &ExperimentSpec) -> CliResult<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for point in spec.points()? {
        let (cfg, access) = (&point.config, &point.access);
        for rate in rate_table(cfg, access)? {
            if point
                .alphas
                .as_ref()
                .is_some_and(|a| !a.contains(&rate.alpha))
            {
                continue;
            }
            let alloc = Allocation::new(cfg, access, rate.alpha)?;
            let bound = if rate.alpha >= 2 {
                rate_upper_bound(cfg, access, rate.alpha)?
            } else {
                minimal_spreading_rate(cfg, access)
            };
            rows.push(SweepRow {
                sweep_var: spec.sweep_variable.name(),
                alpha: rate.alpha,
                beta: alloc.beta(),
                m: cfg.redundancy(),
                n: cfg.n_nodes(),
                r_or_p: access_label(access),
                mu: cfg.node_rate().clone(),
                success_prob: success_prob(cfg, access, &alloc)?,
                service_rate: rate.value,
                bound,
            });
        }
    }
    // Explicit alpha lists keep the user's order.
    if let (SweepVariable::Alpha, Ok(order)) = (
        spec.sweep_variable,
        spec.sweep_values
            .iter()
            .map(|v| v.trim().parse::<u32>())
            .collect::<Result<Vec<_>, _>>(),
    ) {
        rows.sort_by_key(|r| order.iter().position(|&a| a == r.alpha));
    }
    Ok(rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::with_capacity(rows.len() * 96);
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.to_csv_line());
        out.push('\n');
    }
    out
}

/// Per-`k` strata table for a simulation run.
pub fn strata_csv(
    cfg: &SystemConfig,
    access: &AccessModel,
    alloc: &Allocation,
    est: &SimulationEstimate,
) -> CliResult<String> {
    let mut out = String::new();
    out.push_str(STRATA_HEADER);
    out.push('\n');
    for (&k, &count) in &est.k_histogram {
        let empirical = ratio(count as i64, est.trials as i64);
        let analytic = access_pmf(cfg, access, alloc, k as i64)?;
        let (mean, sd, analytic_time) = if k >= alloc.alpha() {
            let stats = est.per_k_mean_time.get(&k);
            (
                stats.map(|s| float_cell(s.mean)).unwrap_or_default(),
                stats.and_then(|s| s.sd).map(float_cell).unwrap_or_default(),
                decimal(&conditional_service_time(
                    alloc.alpha(),
                    k,
                    cfg.node_rate(),
                )?),
            )
        } else {
            Default::default()
        };
        let _ = writeln!(
            out,
            "{k},{count},{},{},{mean},{sd},{analytic_time}",
            decimal(&empirical),
            decimal(&analytic)
        );
    }
    Ok(out)
}

/// Goodness of fit of the simulated `k` histogram against the exact PMF.
pub fn histogram_fit(
    cfg: &SystemConfig,
    access: &AccessModel,
    alloc: &Allocation,
    est: &SimulationEstimate,
) -> CliResult<ChiSquaredTest> {
    let mut observed = Vec::new();
    let mut probs = Vec::new();
    for (&k, &count) in &est.k_histogram {
        observed.push(count);
        probs.push(access_pmf(cfg, access, alloc, k as i64)?);
    }
    Ok(chi_squared_gof(&observed, &probs))
}

pub const SUMMARY_HEADER: &str =
    "trials,alpha,combined_rate,analytic_mu_s_exact,analytic_mu_s,relative_error,chi2_p_value";

pub fn summary_line(est: &SimulationEstimate, fit: &ChiSquaredTest) -> String {
    let exact = est.analytic_reference.clone().unwrap_or_default();
    format!(
        "{},{},{},{},{},{},{}",
        est.trials,
        est.alpha,
        float_cell(est.combined_rate),
        to_fraction_string(&exact),
        decimal(&exact),
        est.relative_error().map(float_cell).unwrap_or_default(),
        float_cell(fit.p_value),
    )
}

/// Figures with baked-in parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// Service rate, fixed-size access, N = 30, r = 5, budget sweep.
    Fig2,
    /// Recovery probability, same parameters as [`Figure::Fig2`].
    Fig3,
    /// Service rate, probabilistic access, N = 30, T = 2F, p sweep.
    Fig4,
    /// Recovery probability, same parameters as [`Figure::Fig4`].
    Fig5,
}

impl Figure {
    pub const ALL: [Figure; 4] = [Figure::Fig2, Figure::Fig3, Figure::Fig4, Figure::Fig5];

    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
        }
    }

    /// How the figure's x axis maps onto the sweep.
    pub fn note(self) -> &'static str {
        match self {
            Figure::Fig2 | Figure::Fig3 => {
                "x axis read as budget T = m*F for m = 1..6 (N = 30, r = 5, mu = 1); one curve per alpha"
            }
            Figure::Fig4 | Figure::Fig5 => {
                "x axis is access-failure probability p = 0.0..0.9 (N = 30, m = 2, mu = 1); one curve per alpha"
            }
        }
    }

    pub fn spec(self) -> ExperimentSpec {
        match self {
            Figure::Fig2 | Figure::Fig3 => ExperimentSpec {
                base: BaseParams {
                    n: Some(30),
                    m: None,
                    mu: Some("1".into()),
                    access: Some(AccessSpec::Fixed(5)),
                },
                sweep_variable: SweepVariable::BudgetM,
                sweep_values: (1..=6).map(|m| m.to_string()).collect(),
                simulation: None,
            },
            Figure::Fig4 | Figure::Fig5 => ExperimentSpec {
                base: BaseParams {
                    n: Some(30),
                    m: Some(2),
                    mu: Some("1".into()),
                    access: None,
                },
                sweep_variable: SweepVariable::P,
                sweep_values: (0..=9).map(|i| format!("0.{i}")).collect(),
                simulation: None,
            },
        }
    }
}

impl std::str::FromStr for Figure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Figure::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown figure `{s}` (fig2, fig3, fig4, fig5)"))
    }
}
