use std::fs;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::Deserialize;

use qtazrp::asym::ScalingParams;
use qtazrp::contour::{QuadSettings, MIN_NODES};
use qtazrp::conventions::Conventions;
use qtazrp::exact::LatticeParams;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConventionChoice {
    Verified,
    Printed,
}

impl ConventionChoice {
    pub fn conventions(self) -> Conventions {
        match self {
            ConventionChoice::Verified => Conventions::verified(),
            ConventionChoice::Printed => Conventions::as_printed(),
        }
    }
}

/// Flags shared by every subcommand. Each one may also come from `--config`;
/// a flag given on the command line wins.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    /// Asymmetry parameter in (0, 1).
    #[arg(long)]
    pub q: Option<f64>,
    /// Species-0 particles at x1.
    #[arg(long)]
    pub n1: Option<u32>,
    /// Species-1 particles at x2.
    #[arg(long)]
    pub n2: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    pub x1: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    pub x2: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    pub y1: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    pub y2: Option<i64>,
    /// Time.
    #[arg(long)]
    pub t: Option<f64>,
    /// Comma-separated scales for `compare`.
    #[arg(long = "L", value_delimiter = ',')]
    #[serde(rename = "L")]
    pub l: Option<Vec<f64>>,
    #[arg(long, allow_hyphen_values = true)]
    pub c11: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub c12: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub c21: Option<f64>,
    /// Correction order for `compare`; largest n for `cn`.
    #[arg(long)]
    pub order: Option<u32>,
    /// Monte Carlo trajectories.
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Node cap for contour refinement; node count for `contours-check`.
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write the table here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON file with any of the settings above.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Reading of the six-term formula.
    #[arg(long, value_enum)]
    pub conventions: Option<ConventionChoice>,
    /// Add node counts, refinement changes and the q5 route to `exact`.
    #[arg(long)]
    #[serde(skip)]
    pub diagnostics: bool,
}

macro_rules! overlay {
    ($base:ident, $top:ident; $($f:ident),*) => {
        $( if $top.$f.is_some() { $base.$f = $top.$f; } )*
    };
}

fn required<T: Copy>(v: Option<T>, flag: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("missing required value --{flag}")))
}

impl Settings {
    /// Reads `--config` if given and lays the command-line flags over it.
    pub fn resolve(self) -> Result<Self, CliError> {
        let Some(path) = &self.config else {
            return Ok(self);
        };
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut base: Settings = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))?;
        let top = self;
        overlay!(base, top; q, n1, n2, x1, x2, y1, y2, t, l, c11, c12, c21, order, samples, seed, nodes, format,
            out, conventions);
        base.diagnostics = top.diagnostics;
        base.config = top.config;
        Ok(base)
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or_default()
    }

    pub fn lattice(&self) -> Result<LatticeParams, CliError> {
        Ok(LatticeParams {
            q: required(self.q, "q")?,
            n1: self.n1.unwrap_or(1),
            n2: self.n2.unwrap_or(1),
            x1: self.x1.unwrap_or(0),
            x2: required(self.x2, "x2")?,
            y1: required(self.y1, "y1")?,
            y2: required(self.y2, "y2")?,
            t: required(self.t, "t")?,
        })
    }

    /// Scaling parameters at each requested `L`; the expansions' own reading by default.
    pub fn scaling(&self) -> Result<Vec<ScalingParams>, CliError> {
        let ls = self.l.clone().ok_or_else(|| CliError::Usage("missing required value --L".into()))?;
        if ls.is_empty() {
            return Err(CliError::Usage("--L needs at least one value".into()));
        }
        let base = ScalingParams {
            q: required(self.q, "q")?,
            n1: self.n1.unwrap_or(1),
            n2: self.n2.unwrap_or(1),
            l: ls[0],
            c11: required(self.c11, "c11")?,
            c12: required(self.c12, "c12")?,
            c21: required(self.c21, "c21")?,
            order: self.order.unwrap_or(1),
            conventions: self.conventions.unwrap_or(ConventionChoice::Printed).conventions(),
        };
        Ok(ls.into_iter().map(|l| ScalingParams { l, ..base }).collect())
    }

    pub fn conventions(&self) -> Conventions {
        self.conventions.unwrap_or(ConventionChoice::Verified).conventions()
    }

    pub fn quad(&self) -> Result<QuadSettings, CliError> {
        let mut quad = QuadSettings::default();
        if let Some(n) = self.nodes {
            if n < 2 * MIN_NODES {
                return Err(CliError::Usage(format!("--nodes must be at least {}, got {n}", 2 * MIN_NODES)));
            }
            quad.max_nodes = n;
        }
        Ok(quad)
    }
}
