//! Experiment parameters from flags and `key = value` config files.

use std::path::Path;

use qsalloc_core::rational::{parse_rational, Rational};
use qsalloc_core::{AccessModel, SystemConfig};

use crate::error::{CliError, CliResult};

/// Access model as written by the user, before validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AccessSpec {
    Fixed(u32),
    /// Decimal or fraction text for `p`.
    Prob(String),
}

/// Cluster and access parameters; every field optional until resolved.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BaseParams {
    pub n: Option<u32>,
    pub m: Option<u32>,
    pub mu: Option<String>,
    pub access: Option<AccessSpec>,
}

impl BaseParams {
    /// Parses a config file: `key = value` lines, `#` starts a comment.
    /// Keys are `n, m, mu, access, r, p` with `access` in `{fixed, prob}`.
    pub fn from_config_text(text: &str) -> CliResult<Self> {
        let mut params = BaseParams::default();
        let mut access_kind: Option<String> = None;
        let mut r: Option<u32> = None;
        let mut p: Option<String> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |what: &str| CliError::Invalid(format!("config line {}: {what}", lineno + 1));
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad("expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            let int = |v: &str| {
                v.parse::<u32>()
                    .map_err(|_| bad(&format!("{key} must be a nonnegative integer")))
            };
            match key {
                "n" => params.n = Some(int(value)?),
                "m" => params.m = Some(int(value)?),
                "mu" => params.mu = Some(value.to_string()),
                "r" => r = Some(int(value)?),
                "p" => p = Some(value.to_string()),
                "access" => match value {
                    "fixed" | "prob" => access_kind = Some(value.to_string()),
                    _ => return Err(bad("access must be `fixed` or `prob`")),
                },
                _ => return Err(bad(&format!("unknown key `{key}`"))),
            }
        }
        params.access = match (access_kind.as_deref(), r, p) {
            (Some("fixed"), Some(r), _) => Some(AccessSpec::Fixed(r)),
            (Some("fixed"), None, _) => {
                return Err(CliError::Invalid("config: access = fixed needs r".into()))
            }
            (Some("prob"), _, Some(p)) => Some(AccessSpec::Prob(p)),
            (Some("prob"), _, None) => {
                return Err(CliError::Invalid("config: access = prob needs p".into()))
            }
            (None, Some(_), Some(_)) => {
                return Err(CliError::Invalid(
                    "config: both r and p given without `access`".into(),
                ))
            }
            (None, Some(r), None) => Some(AccessSpec::Fixed(r)),
            (None, None, Some(p)) => Some(AccessSpec::Prob(p)),
            _ => None,
        };
        Ok(params)
    }

    pub fn from_config_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Invalid(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::from_config_text(&text)
    }

    /// Fields set in `flags` win over fields set here.
    pub fn overridden_by(self, flags: BaseParams) -> BaseParams {
        BaseParams {
            n: flags.n.or(self.n),
            m: flags.m.or(self.m),
            mu: flags.mu.or(self.mu),
            access: flags.access.or(self.access),
        }
    }

    pub fn node_rate(&self) -> CliResult<Rational> {
        match &self.mu {
            Some(text) => Ok(parse_rational(text)?),
            None => Ok(Rational::from_integer(1.into())),
        }
    }

    pub fn system_config(&self) -> CliResult<SystemConfig> {
        let n = self
            .n
            .ok_or_else(|| CliError::Invalid("missing --n".into()))?;
        let m = self
            .m
            .ok_or_else(|| CliError::Invalid("missing --m".into()))?;
        Ok(SystemConfig::new(n, m, self.node_rate()?)?)
    }

    pub fn access_model(&self, cfg: &SystemConfig) -> CliResult<AccessModel> {
        let access = match &self.access {
            Some(AccessSpec::Fixed(r)) => AccessModel::fixed(*r),
            Some(AccessSpec::Prob(p)) => AccessModel::probabilistic_from_str(p)?,
            None => {
                return Err(CliError::Invalid(
                    "missing access model: pass --fixed-r or --prob-p".into(),
                ))
            }
        };
        access.validate(cfg)?;
        Ok(access)
    }

    pub fn resolve(&self) -> CliResult<(SystemConfig, AccessModel)> {
        let cfg = self.system_config()?;
        let access = self.access_model(&cfg)?;
        Ok((cfg, access))
    }
}

/// Parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    Alpha,
    BudgetM,
    P,
    R,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::Alpha => "alpha",
            SweepVariable::BudgetM => "m",
            SweepVariable::P => "p",
            SweepVariable::R => "r",
        }
    }
}

impl std::str::FromStr for SweepVariable {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "alpha" => Ok(SweepVariable::Alpha),
            "m" | "budget_m" => Ok(SweepVariable::BudgetM),
            "p" => Ok(SweepVariable::P),
            "r" => Ok(SweepVariable::R),
            _ => Err(format!("unknown sweep variable `{s}` (alpha, m, p, r)")),
        }
    }
}

/// Seed and trial count for Monte Carlo output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimulationParams {
    pub trials: u64,
    pub seed: u64,
}

/// A fully specified experiment: base parameters, the swept variable and its
/// values, and optional simulation settings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentSpec {
    pub base: BaseParams,
    pub sweep_variable: SweepVariable,
    pub sweep_values: Vec<String>,
    pub simulation: Option<SimulationParams>,
}

/// One evaluation point of a sweep.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub config: SystemConfig,
    pub access: AccessModel,
    /// Restricts the rows to these `α`; `None` means every valid `α`.
    pub alphas: Option<Vec<u32>>,
}

impl ExperimentSpec {
    /// Expands the sweep into validated evaluation points, in sweep order.
    pub fn points(&self) -> CliResult<Vec<SweepPoint>> {
        if self.sweep_values.is_empty() {
            return Err(CliError::Invalid("sweep needs at least one value".into()));
        }
        let int = |v: &String| {
            v.trim()
                .parse::<u32>()
                .map_err(|_| CliError::Invalid(format!("sweep value `{v}` is not an integer")))
        };
        match self.sweep_variable {
            SweepVariable::Alpha => {
                let (config, access) = self.base.resolve()?;
                let alphas = self
                    .sweep_values
                    .iter()
                    .map(int)
                    .collect::<CliResult<Vec<_>>>()?;
                for &alpha in &alphas {
                    qsalloc_core::Allocation::new(&config, &access, alpha)?;
                }
                Ok(vec![SweepPoint {
                    config,
                    access,
                    alphas: Some(alphas),
                }])
            }
            SweepVariable::BudgetM => self
                .sweep_values
                .iter()
                .map(|v| {
                    let params = BaseParams {
                        m: Some(int(v)?),
                        ..self.base.clone()
                    };
                    let (config, access) = params.resolve()?;
                    Ok(SweepPoint {
                        config,
                        access,
                        alphas: None,
                    })
                })
                .collect(),
            SweepVariable::P | SweepVariable::R => {
                let config = self.base.system_config()?;
                let conflicting = matches!(
                    (self.sweep_variable, &self.base.access),
                    (SweepVariable::P, Some(AccessSpec::Fixed(_)))
                        | (SweepVariable::R, Some(AccessSpec::Prob(_)))
                );
                if conflicting {
                    return Err(CliError::Invalid(format!(
                        "sweeping {} conflicts with the given access model",
                        self.sweep_variable.name()
                    )));
                }
                self.sweep_values
                    .iter()
                    .map(|v| {
                        let spec = match self.sweep_variable {
                            SweepVariable::P => AccessSpec::Prob(v.trim().to_string()),
                            _ => AccessSpec::Fixed(int(v)?),
                        };
                        let params = BaseParams {
                            access: Some(spec),
                            ..self.base.clone()
                        };
                        Ok(SweepPoint {
                            config: config.clone(),
                            access: params.access_model(&config)?,
                            alphas: None,
                        })
                    })
                    .collect()
            }
        }
    }
}

/// Splits `1,2,5` into trimmed items.
pub fn split_list(text: &str) -> Vec<String> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_parsing() {
        let text = "# fig 2 base\nn = 30\nm=2 # budget\nmu = 1\naccess = fixed\nr = 5\n";
        let p = BaseParams::from_config_text(text).unwrap();
        assert_eq!(p.n, Some(30));
        assert_eq!(p.m, Some(2));
        assert_eq!(p.access, Some(AccessSpec::Fixed(5)));

        let p = BaseParams::from_config_text("n=6\nm=2\naccess=prob\np=0.5\nr=3").unwrap();
        assert_eq!(p.access, Some(AccessSpec::Prob("0.5".into())));

        assert!(BaseParams::from_config_text("n 30").is_err());
        assert!(BaseParams::from_config_text("q = 1").is_err());
        assert!(BaseParams::from_config_text("access = both").is_err());
        assert!(BaseParams::from_config_text("access = fixed").is_err());
        assert!(BaseParams::from_config_text("r = 3\np = 0.1").is_err());
        assert!(BaseParams::from_config_text("n = -3").is_err());
    }

    #[test]
    fn flags_override_file() {
        let file = BaseParams::from_config_text("n=30\nm=2\naccess=fixed\nr=5").unwrap();
        let flags = BaseParams {
            m: Some(3),
            access: Some(AccessSpec::Prob("0.1".into())),
            ..Default::default()
        };
        let merged = file.overridden_by(flags);
        assert_eq!(merged.n, Some(30));
        assert_eq!(merged.m, Some(3));
        assert_eq!(merged.access, Some(AccessSpec::Prob("0.1".into())));
    }

    #[test]
    fn sweep_points() {
        let spec = ExperimentSpec {
            base: BaseParams {
                n: Some(30),
                access: Some(AccessSpec::Fixed(5)),
                ..Default::default()
            },
            sweep_variable: SweepVariable::BudgetM,
            sweep_values: split_list("1, 2,3"),
            simulation: None,
        };
        let points = spec.points().unwrap();
        assert_eq!(points.len(), 3);
        assert_eq!(points[1].config.redundancy(), 2);

        let bad_p = ExperimentSpec {
            base: BaseParams {
                n: Some(30),
                m: Some(2),
                ..Default::default()
            },
            sweep_variable: SweepVariable::P,
            sweep_values: split_list("0.1,1.5"),
            simulation: None,
        };
        assert!(bad_p.points().is_err());

        let conflicting = ExperimentSpec {
            base: BaseParams {
                n: Some(30),
                m: Some(2),
                access: Some(AccessSpec::Fixed(5)),
                ..Default::default()
            },
            sweep_variable: SweepVariable::P,
            sweep_values: split_list("0.1"),
            simulation: None,
        };
        assert!(conflicting.points().is_err());

        let alpha_too_big = ExperimentSpec {
            base: BaseParams {
                n: Some(30),
                m: Some(2),
                access: Some(AccessSpec::Fixed(5)),
                ..Default::default()
            },
            sweep_variable: SweepVariable::Alpha,
            sweep_values: split_list("1,6"),
            simulation: None,
        };
        assert!(alpha_too_big.points().is_err());
    }
}
