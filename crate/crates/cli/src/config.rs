use std::fmt;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use nctrace::determinants::DetMethod;
use nctrace::estimators::{Normalization, Schedule, TailMode};
use nctrace::{make_group, CutoffMode, GroupDescriptor, MatrixSymbol};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Dual,
    Trace,
    Residue,
    Det,
    Compare,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::Dual => "dual",
            Command::Trace => "trace",
            Command::Residue => "residue",
            Command::Det => "det",
            Command::Compare => "compare",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorSelection {
    E1,
    E2,
    E3,
    #[default]
    All,
}

/// Everything that determines the numbers in a report. Optional fields fall
/// back to group-dependent defaults in [`RunConfig::resolve`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub group: String,
    pub symbol: Option<String>,
    pub estimators: EstimatorSelection,
    pub cutoff: Option<f64>,
    pub mode: Option<String>,
    /// Checkpoint schedule, `N0,k` or `auto[:k]`.
    pub cutoffs: Option<String>,
    #[serde(with = "text")]
    pub norm: Normalization,
    #[serde(with = "text")]
    pub tail: TailMode,
    /// Number of `p_k = 1 + 2^-k` levels for the `p -> 1` extrapolations.
    pub p_levels: usize,
    pub haar_res: usize,
    pub sphere_res: usize,
    /// Upper triangle of a quadratic form on the 2-torus.
    pub form: Option<Vec<f64>>,
    pub lambda: [f64; 2],
    #[serde(with = "text")]
    pub method: DetMethod,
    /// Relative gap accepted by `residue`.
    pub tolerance: f64,
    pub json: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(command: Command, group: &str) -> Self {
        Self {
            command,
            group: group.into(),
            symbol: None,
            estimators: EstimatorSelection::All,
            cutoff: None,
            mode: None,
            cutoffs: None,
            norm: Normalization::Index,
            tail: TailMode::PowerTail,
            p_levels: 10,
            haar_res: 16,
            sphere_res: 512,
            form: None,
            lambda: [0.1, 0.0],
            method: DetMethod::Product,
            tolerance: 0.02,
            json: None,
            csv: None,
        }
    }

    pub fn with_symbol(mut self, symbol: &str) -> Self {
        self.symbol = Some(symbol.into());
        self
    }

    pub fn with_cutoff(mut self, cutoff: f64) -> Self {
        self.cutoff = Some(cutoff);
        self
    }

    pub fn resolve(&self) -> Result<Resolved> {
        let group = make_group(&self.group)?;
        let mode = match self.mode.as_deref() {
            Some(m) => m.parse()?,
            None if group.has_sub_system() => CutoffMode::Subelliptic,
            None => CutoffMode::Elliptic,
        };
        let symbol_spec = match (&self.symbol, &self.form) {
            (Some(s), _) => s.clone(),
            (None, Some(form)) => {
                let entries: Vec<String> = form.iter().map(|v| format!("{v:?}")).collect();
                format!("aniso:{}:-{}", entries.join(","), group.dim)
            }
            (None, None) => default_symbol(&group),
        };
        let symbol = MatrixSymbol::parse(&symbol_spec, &group)?;
        let cutoff = self.cutoff.unwrap_or_else(|| default_cutoff(&group, self.command));
        if !(cutoff.is_finite() && cutoff >= 1.0) {
            bail!(nctrace::Error::Config(format!("cutoff must be finite and >= 1, got {cutoff}")));
        }
        let schedule = self.cutoffs.as_deref().map(str::parse::<Schedule>).transpose()?;
        if self.p_levels < 3 || self.p_levels > 40 {
            bail!(nctrace::Error::Config(format!("p-schedule must be in 3..=40, got {}", self.p_levels)));
        }
        if self.haar_res == 0 || self.sphere_res == 0 {
            bail!(nctrace::Error::Config("quadrature resolutions must be positive".into()));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            bail!(nctrace::Error::Config(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if let Some(form) = &self.form {
            if form.len() != 3 || group.dim != 2 {
                bail!(nctrace::Error::Config("--form takes a11,a12,a22 on torus:2".into()));
            }
        }
        if self.lambda.iter().any(|v| !v.is_finite()) {
            bail!(nctrace::Error::Config("lambda must be finite".into()));
        }
        Ok(Resolved {
            group,
            symbol,
            cutoff,
            mode,
            schedule,
            lambda: Complex64::new(self.lambda[0], self.lambda[1]),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).context("invalid run config")
    }
}

/// A validated config with parsed group and symbol.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub group: GroupDescriptor,
    pub symbol: MatrixSymbol,
    pub cutoff: f64,
    pub mode: CutoffMode,
    pub schedule: Option<Schedule>,
    pub lambda: Complex64,
}

/// Order `-n` on tori and SU(2), `-Q` on the subelliptic SU(2).
pub fn default_symbol(group: &GroupDescriptor) -> String {
    if group.has_sub_system() {
        format!("sub:-{}", group.hausdorff_dim)
    } else {
        format!("bessel:-{}", group.dim)
    }
}

pub fn default_cutoff(group: &GroupDescriptor, command: Command) -> f64 {
    if command == Command::Dual {
        return 4.0;
    }
    match (group.to_string().as_str(), group.dim) {
        ("su2", _) => 1000.0,
        ("su2:sub", _) => 1000f64.sqrt(),
        (_, 1) => 1e5,
        (_, 2) => 600.0,
        (_, 3) => 60.0,
        _ => 20.0,
    }
}

/// Serde through `Display` / `FromStr`.
mod text {
    use std::fmt::Display;
    use std::str::FromStr;

    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<T: Display, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, T, D>(d: D) -> Result<T, D::Error>
    where
        T: FromStr,
        T::Err: Display,
        D: Deserializer<'de>,
    {
        String::deserialize(d)?.parse().map_err(de::Error::custom)
    }
}
