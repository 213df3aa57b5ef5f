//! JSON configuration: schema, validation, conversion to a library
//! [`BilliardConfig`].

use crate::CliError;
use poncelet::billiard::BilliardConfig;
use poncelet::confocal::ConfocalFamily;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

/// Tolerance knobs recognized in the config `tolerances` map and in
/// repeated `--tolerance NAME=VALUE` flags.  Each knob covers a group of
/// kindred checks.
pub const TOLERANCE_KEYS: [&str; 10] = [
    "angle",
    "closure",
    "motion_constant",
    "norm_product",
    "product_equality",
    "product_value",
    "quarter_product",
    "ratio",
    "spread",
    "sum",
];

/// Maps a check name to the tolerance knob that governs it.
pub fn tolerance_key_for(name: &str) -> &'static str {
    if name.contains("conserved along the motion") {
        "spread"
    } else if name.starts_with("polygon closes") {
        "closure"
    } else if name.starts_with("chord products equal") {
        "product_equality"
    } else if name.starts_with("chord product value") || name.starts_with("half-range") {
        "product_value"
    } else if name.starts_with("quarter chord") || name.starts_with("crossed chord") {
        "quarter_product"
    } else if name.starts_with("opposite tangent-norm") {
        "norm_product"
    } else if name.starts_with("alternating") {
        "sum"
    } else if name.starts_with("central vertex-angle") {
        "angle"
    } else if name.contains("side ratios") {
        "ratio"
    } else {
        "motion_constant"
    }
}

/// Raw configuration file contents.  Unknown fields are rejected so typos
/// fail loudly instead of being ignored.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    /// Caustic semi-major axis.
    pub a_c: f64,
    /// Caustic semi-minor axis (strictly smaller than `a_c`).
    pub b_c: f64,
    /// Period: the polygon closes after `n` reflections.  Mutually
    /// exclusive with `delta_u`.
    #[serde(default, alias = "N", skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Turning number of a periodic polygon (default 1).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<usize>,
    /// Explicit parameter spacing for an aperiodic chain.  Mutually
    /// exclusive with `n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_u: Option<f64>,
    /// Starting parameter: a number, or `{"start": .., "count": ..}` to
    /// prescribe the sweep window for `verify`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u0: Option<U0Spec>,
    /// Number of vertices to trace.  Required with `delta_u`; with `n` it
    /// may exceed `n` to trace an open chain over several circuits.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    /// Sweep sample count for `verify` (default 50).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Seed for pseudo-random sweep offsets; omitted means an even grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Highest grid level for `grid` (clamped to the meaningful cap).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j_max: Option<usize>,
    /// Artifact whitelist; omitted writes every artifact of the subcommand.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outputs: Option<Vec<String>>,
    /// Tolerance overrides by knob name (see [`TOLERANCE_KEYS`]).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tolerances: BTreeMap<String, f64>,
    /// Negative-control hook for `verify`: displace one vertex and expect
    /// the checks to notice.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturb: Option<Perturb>,
}

/// Sweep window form of `u0`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct U0Window {
    pub start: f64,
    pub count: usize,
}

/// Starting parameter: a plain value, or a window for sweeps.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
pub enum U0Spec {
    Value(f64),
    Window(U0Window),
}

/// Vertex displacement applied before verification.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Perturb {
    pub index: usize,
    pub dx: f64,
    pub dy: f64,
}

/// Artifacts the tool can write.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputKind {
    Billiard,
    Report,
    Grid,
    Svg,
    Sweep,
}

impl OutputKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "billiard" => Some(OutputKind::Billiard),
            "report" => Some(OutputKind::Report),
            "grid" => Some(OutputKind::Grid),
            "svg" => Some(OutputKind::Svg),
            "sweep" => Some(OutputKind::Sweep),
            _ => None,
        }
    }

    pub fn filename(self) -> &'static str {
        match self {
            OutputKind::Billiard => "billiard.json",
            OutputKind::Report => "report.json",
            OutputKind::Grid => "grid.json",
            OutputKind::Svg => "grid.svg",
            OutputKind::Sweep => "sweep.csv",
        }
    }
}

/// Configuration after validation: the library config plus the CLI-level
/// extras.
#[derive(Debug, Clone)]
pub struct ValidatedConfig {
    /// The raw file contents, echoed into reports.
    pub raw: Config,
    pub billiard: BilliardConfig,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub j_max: Option<usize>,
    /// `(start, count)` when `u0` was given as a window.
    pub sweep_window: Option<(f64, usize)>,
    pub tolerances: BTreeMap<String, f64>,
    pub perturb: Option<Perturb>,
    pub outputs: Option<Vec<OutputKind>>,
}

/// Reads and validates a configuration file.
pub fn load(path: &Path) -> Result<ValidatedConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let raw: Config = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))?;
    validate(raw)
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Validates a parsed configuration and builds the library config.
pub fn validate(raw: Config) -> Result<ValidatedConfig, CliError> {
    if !raw.a_c.is_finite() || !raw.b_c.is_finite() || raw.b_c <= 0.0 {
        return Err(bad(format!(
            "caustic semiaxes must be finite and positive (a_c = {}, b_c = {})",
            raw.a_c, raw.b_c
        )));
    }
    if raw.a_c <= raw.b_c {
        return Err(bad(format!(
            "need a_c > b_c for a proper caustic (got a_c = {}, b_c = {}); \
             circular families have no tangent polygons of this kind",
            raw.a_c, raw.b_c
        )));
    }
    let fam = ConfocalFamily::new(raw.a_c, raw.b_c).map_err(crate::map_config_error)?;

    let (u0_value, sweep_window) = match raw.u0 {
        None => (0.0, None),
        Some(U0Spec::Value(v)) => {
            if !v.is_finite() {
                return Err(bad(format!("u0 must be finite (got {v})")));
            }
            (v, None)
        }
        Some(U0Spec::Window(w)) => {
            if !w.start.is_finite() {
                return Err(bad(format!("u0.start must be finite (got {})", w.start)));
            }
            if w.count == 0 {
                return Err(bad("u0.count must be at least 1"));
            }
            (w.start, Some((w.start, w.count)))
        }
    };

    let billiard = match (raw.n, raw.delta_u) {
        (Some(_), Some(_)) => {
            return Err(bad("give either n (periodic) or delta_u (aperiodic), not both"));
        }
        (None, None) => {
            return Err(bad("one of n (periodic) or delta_u (aperiodic) is required"));
        }
        (Some(n), None) => {
            let tau = raw.tau.unwrap_or(1);
            let cfg = BilliardConfig::periodic(fam, n, tau, u0_value)
                .map_err(crate::map_config_error)?;
            match raw.count {
                Some(c) if c != n => cfg.with_count(c).map_err(crate::map_config_error)?,
                _ => cfg,
            }
        }
        (None, Some(du)) => {
            if raw.tau.is_some() {
                return Err(bad("tau is only meaningful together with n"));
            }
            let count = raw
                .count
                .ok_or_else(|| bad("aperiodic chains (delta_u) require count"))?;
            BilliardConfig::aperiodic(fam, du, u0_value, count).map_err(crate::map_config_error)?
        }
    };

    if raw.samples == Some(0) {
        return Err(bad("samples must be at least 1"));
    }
    if sweep_window.is_some() && raw.samples.is_some() {
        return Err(bad("u0 given as a window already fixes the sample count; drop samples"));
    }

    for (key, value) in &raw.tolerances {
        if !TOLERANCE_KEYS.contains(&key.as_str()) {
            return Err(bad(format!(
                "unknown tolerance '{key}'; known: {}",
                TOLERANCE_KEYS.join(", ")
            )));
        }
        if !value.is_finite() || *value <= 0.0 {
            return Err(bad(format!("tolerance '{key}' must be a positive number (got {value})")));
        }
    }

    let outputs = match &raw.outputs {
        None => None,
        Some(names) => {
            if names.is_empty() {
                return Err(bad("outputs must not be empty; omit it to write everything"));
            }
            let mut kinds = Vec::with_capacity(names.len());
            for name in names {
                let kind = OutputKind::parse(name).ok_or_else(|| {
                    bad(format!(
                        "unknown output '{name}'; known: billiard, report, grid, svg, sweep"
                    ))
                })?;
                if kinds.contains(&kind) {
                    return Err(bad(format!("duplicate output '{name}'")));
                }
                kinds.push(kind);
            }
            Some(kinds)
        }
    };

    if let Some(p) = &raw.perturb {
        if !p.dx.is_finite() || !p.dy.is_finite() {
            return Err(bad("perturb displacements must be finite"));
        }
        if p.index >= billiard.count() {
            return Err(bad(format!(
                "perturb.index {} out of range for {} vertices",
                p.index,
                billiard.count()
            )));
        }
    }

    Ok(ValidatedConfig {
        samples: raw.samples,
        seed: raw.seed,
        j_max: raw.j_max,
        sweep_window,
        tolerances: raw.tolerances.clone(),
        perturb: raw.perturb,
        outputs,
        billiard,
        raw,
    })
}

/// Parses a repeated `--tolerance NAME=VALUE` flag.
pub fn parse_tolerance_flag(arg: &str) -> Result<(String, f64), CliError> {
    let (name, value) = arg
        .split_once('=')
        .ok_or_else(|| bad(format!("--tolerance expects NAME=VALUE (got '{arg}')")))?;
    if !TOLERANCE_KEYS.contains(&name) {
        return Err(bad(format!(
            "unknown tolerance '{name}'; known: {}",
            TOLERANCE_KEYS.join(", ")
        )));
    }
    let parsed: f64 = value
        .parse()
        .map_err(|_| bad(format!("tolerance value '{value}' is not a number")))?;
    if !parsed.is_finite() || parsed <= 0.0 {
        return Err(bad(format!("tolerance '{name}' must be positive (got {parsed})")));
    }
    Ok((name.to_string(), parsed))
}
