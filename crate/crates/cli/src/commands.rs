//! Subcommand bodies. Each writes its report to the given sinks and returns
//! the process exit code.

use std::io::Write;

use qsalloc_core::oracle::enumerate_success_prob;
use qsalloc_core::rational::{ratio, to_fraction_string};
use qsalloc_core::{
    enumerate_service_rate, minimal_spreading_rate, rate_table, rate_upper_bound, service_rate,
    simulate_with, success_prob, valid_alphas, AccessModel, Allocation, GeneralAllocation,
    SimulationOptions, SystemConfig,
};

use crate::error::{exit, CliError, CliResult};
use crate::report::{
    describe_access, exact_and_decimal, histogram_fit, strata_csv, summary_line, sweep_csv,
    sweep_rows, Figure, SUMMARY_HEADER,
};
use crate::spec::{BaseParams, ExperimentSpec};

fn header(cfg: &SystemConfig, access: &AccessModel) -> String {
    format!(
        "N = {}, m = {}, mu = {}, {}",
        cfg.n_nodes(),
        cfg.redundancy(),
        crate::report::decimal(cfg.node_rate()),
        describe_access(access)
    )
}

/// Single `(config, α)` point.
pub fn eval(base: &BaseParams, alpha: u32, out: &mut dyn Write) -> CliResult<i32> {
    let (cfg, access) = base.resolve()?;
    let alloc = Allocation::new(&cfg, &access, alpha)?;
    let rate = service_rate(&cfg, &access, &alloc)?;
    let ps = success_prob(&cfg, &access, &alloc)?;
    writeln!(out, "{}", header(&cfg, &access))?;
    writeln!(out, "alpha = {alpha}, beta = {}", alloc.beta())?;
    writeln!(out, "mu_s = {}", exact_and_decimal(&rate.value))?;
    writeln!(out, "P_s = {}", exact_and_decimal(&ps))?;
    if alpha == 1 {
        writeln!(
            out,
            "closed_form = {}",
            exact_and_decimal(&minimal_spreading_rate(&cfg, &access))
        )?;
    } else {
        writeln!(
            out,
            "bound = {}",
            exact_and_decimal(&rate_upper_bound(&cfg, &access, alpha)?)
        )?;
    }
    Ok(exit::OK)
}

pub fn sweep(spec: &ExperimentSpec, out: &mut dyn Write) -> CliResult<i32> {
    let rows = sweep_rows(spec)?;
    out.write_all(sweep_csv(&rows).as_bytes())?;
    Ok(exit::OK)
}

pub fn reproduce(figure: Figure, out: &mut dyn Write, note: &mut dyn Write) -> CliResult<i32> {
    writeln!(note, "# {}: {}", figure.name(), figure.note())?;
    sweep(&figure.spec(), out)
}

pub struct SimulateArgs {
    pub alpha: u32,
    pub options: SimulationOptions,
    /// Strata that must reach the minimum count, else exit 3.
    pub required_strata: Vec<u32>,
}

/// Strata CSV to `csv`, one-row summary CSV and warnings to `summary`.
pub fn simulate(
    base: &BaseParams,
    args: &SimulateArgs,
    csv: &mut dyn Write,
    summary: &mut dyn Write,
) -> CliResult<i32> {
    if args.options.trials == 0 {
        return Err(CliError::Invalid("trials must be at least 1".into()));
    }
    let (cfg, access) = base.resolve()?;
    let alloc = Allocation::new(&cfg, &access, args.alpha)?;
    let est = simulate_with(&cfg, &access, &alloc, &args.options)?;
    csv.write_all(strata_csv(&cfg, &access, &alloc, &est)?.as_bytes())?;

    let fit = histogram_fit(&cfg, &access, &alloc, &est)?;
    writeln!(summary, "{SUMMARY_HEADER}")?;
    writeln!(summary, "{}", summary_line(&est, &fit))?;
    for k in &est.flagged_strata {
        writeln!(
            summary,
            "warning: stratum k = {k} has {} samples (< {}); its mean time is unreliable",
            est.k_histogram[k], est.min_stratum_count
        )?;
    }

    let short: Vec<u32> = args
        .required_strata
        .iter()
        .copied()
        .filter(|k| est.k_histogram.get(k).copied().unwrap_or(0) < est.min_stratum_count)
        .collect();
    if !short.is_empty() {
        writeln!(
            summary,
            "error: requested strata {short:?} fell below {} samples",
            est.min_stratum_count
        )?;
        return Ok(exit::INSUFFICIENT_DATA);
    }
    Ok(exit::OK)
}

/// Analytic vs enumerated `P_s` and `μ_s`, for one `α` or all valid ones.
pub fn oracle(base: &BaseParams, alpha: Option<u32>, out: &mut dyn Write) -> CliResult<i32> {
    let (cfg, access) = base.resolve()?;
    let alphas = match alpha {
        Some(a) => vec![a],
        None => valid_alphas(&cfg, &access),
    };
    writeln!(out, "{}", header(&cfg, &access))?;
    let mut all_match = true;
    for alpha in alphas {
        let alloc = Allocation::new(&cfg, &access, alpha)?;
        let layout = GeneralAllocation::quasi_symmetric(&cfg, &alloc);
        let checks = [
            (
                "P_s",
                success_prob(&cfg, &access, &alloc)?,
                enumerate_success_prob(&cfg, &access, &layout)?,
            ),
            (
                "mu_s",
                service_rate(&cfg, &access, &alloc)?.value,
                enumerate_service_rate(&cfg, &access, &alloc)?,
            ),
        ];
        for (name, analytic, enumerated) in checks {
            let verdict = if analytic == enumerated {
                "MATCH"
            } else {
                "MISMATCH"
            };
            all_match &= analytic == enumerated;
            writeln!(
                out,
                "alpha = {alpha}: {name} analytic = {}, enumerated = {} {verdict}",
                exact_and_decimal(&analytic),
                exact_and_decimal(&enumerated)
            )?;
        }
    }
    if all_match {
        writeln!(out, "MATCH")?;
        Ok(exit::OK)
    } else {
        writeln!(out, "MISMATCH")?;
        Ok(exit::ORACLE_MISMATCH)
    }
}

/// Full `α → μ_s` table and its argmax. A non-minimal argmax is reported
/// on `warn` but is not an error.
pub fn optimal(base: &BaseParams, out: &mut dyn Write, warn: &mut dyn Write) -> CliResult<i32> {
    let (cfg, access) = base.resolve()?;
    writeln!(out, "{}", header(&cfg, &access))?;
    writeln!(out, "alpha,beta,mu_s_exact,mu_s_float")?;
    let table = rate_table(&cfg, &access)?;
    for row in &table {
        writeln!(
            out,
            "{},{},{},{}",
            row.alpha,
            row.alpha * cfg.redundancy(),
            to_fraction_string(&row.value),
            crate::report::decimal(&row.value)
        )?;
    }
    let (best, rate) = qsalloc_core::optimal_alpha(&cfg, &access)?;
    writeln!(
        out,
        "argmax alpha = {best} (mu_s = {})",
        exact_and_decimal(&rate)
    )?;
    if best != 1 {
        writeln!(
            warn,
            "warning: argmax alpha = {best} is not minimal spreading for {}",
            header(&cfg, &access)
        )?;
    }
    Ok(exit::OK)
}

/// Runs [`optimal`]'s argmax over every configuration with `N <= max_n`:
/// all `m <= N`, fixed-size `r = 1..N`, and `p ∈ {0, 0.1, ..., 1}`.
pub fn optimal_grid(
    mu: &BaseParams,
    max_n: u32,
    out: &mut dyn Write,
    warn: &mut dyn Write,
) -> CliResult<i32> {
    let node_rate = mu.node_rate()?;
    let mut configs = 0u64;
    let mut warnings = 0u64;
    for n in 1..=max_n {
        for m in 1..=n {
            let cfg = SystemConfig::new(n, m, node_rate.clone())?;
            let mut models: Vec<AccessModel> = (1..=n).map(AccessModel::fixed).collect();
            for tenth in 0..=10 {
                models.push(AccessModel::probabilistic(ratio(tenth, 10))?);
            }
            for access in &models {
                configs += 1;
                let (best, rate) = qsalloc_core::optimal_alpha(&cfg, access)?;
                if best != 1 {
                    warnings += 1;
                    writeln!(
                        warn,
                        "warning: argmax alpha = {best} (mu_s = {}) for {}",
                        exact_and_decimal(&rate),
                        header(&cfg, access)
                    )?;
                }
            }
        }
    }
    writeln!(out, "configurations = {configs}, warnings = {warnings}")?;
    Ok(exit::OK)
}
