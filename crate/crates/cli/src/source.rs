use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};
use slconvex_core::config::DEFAULT_SEED;
use slconvex_core::energy::{lookup, spec_from_definition, CatalogEntry};
use slconvex_core::{AnalysisConfig, Domain, EnergySpec, Error};

pub const SEED_ENV: &str = "SLCONVEX_SEED";

/// Where the energy comes from; exactly one source is required.
#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct EnergySource {
    /// Inline definition such as "phi: gamma^2" (phi, psi, h or g).
    #[arg(long, value_name = "DEFINITION")]
    pub energy_expr: Option<String>,
    /// File holding one definition line; '#' starts a comment.
    #[arg(long, value_name = "PATH")]
    pub energy_file: Option<PathBuf>,
    /// Builtin catalog entry (see `slconvex catalog`).
    #[arg(long, value_name = "NAME")]
    pub catalog: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyDescriptor {
    pub name: String,
    pub representation: String,
    pub domain: Domain,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub expression: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub source: Option<String>,
}

impl EnergyDescriptor {
    pub fn of(spec: &EnergySpec, source: Option<String>) -> Self {
        EnergyDescriptor {
            name: spec.name.clone(),
            representation: spec.representation().keyword().to_string(),
            domain: spec.domain(),
            expression: spec.expression().map(str::to_string),
            source,
        }
    }
}

/// Parser diagnostics with the offending line and a caret under the column.
fn definition_error(src: &str, origin: &str, err: Error) -> anyhow::Error {
    let (line, column) = match &err {
        Error::Parse(p) => (p.line, Some(p.column)),
        Error::Definition { line, .. } => (*line, None),
        _ => return anyhow!("{origin}: {err}"),
    };
    let mut msg = format!("{origin}: {err}");
    if let (Some(text), Some(col)) = (src.split('\n').nth(line.saturating_sub(1)), column) {
        msg.push_str(&format!("\n  {text}\n  {}^", " ".repeat(col.saturating_sub(1))));
    }
    anyhow!(msg)
}

fn parse_spec(name: &str, src: &str, origin: &str, domain: Domain) -> Result<EnergySpec> {
    spec_from_definition(name, src, domain).map_err(|e| definition_error(src, origin, e))
}

impl EnergySource {
    /// Resolves the energy; `domain` defaults to the catalog entry's domain,
    /// else SL(2).
    pub fn load(&self, domain: Option<Domain>) -> Result<(EnergySpec, Option<String>)> {
        if let Some(src) = &self.energy_expr {
            let spec = parse_spec("expression", src, "--energy-expr", domain.unwrap_or(Domain::Sl2))?;
            return Ok((spec, None));
        }
        if let Some(path) = &self.energy_file {
            let src = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
            let name = path
                .file_stem()
                .map_or("energy".into(), |s| s.to_string_lossy().into_owned());
            let spec = parse_spec(&name, &src, &path.display().to_string(), domain.unwrap_or(Domain::Sl2))?;
            return Ok((spec, Some(path.display().to_string())));
        }
        if let Some(name) = &self.catalog {
            let entry = catalog_entry(name)?;
            let domain = domain.unwrap_or(entry.spec.domain());
            return Ok((entry.spec.on_domain(domain), Some(format!("catalog:{name}"))));
        }
        bail!("no energy source given")
    }
}

pub fn catalog_entry(name: &str) -> Result<CatalogEntry> {
    Ok(lookup(name)?)
}

/// Config from `--config` (a bare config or a report document carrying a
/// `config` echo), with the seed from `--seed`, else the file, else
/// `SLCONVEX_SEED`, else the default.
pub fn load_config(path: Option<&Path>, seed: Option<u64>) -> Result<AnalysisConfig> {
    let mut cfg = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?;
            let mut value: serde_json::Value =
                serde_json::from_str(&text).with_context(|| format!("invalid config {}", p.display()))?;
            if let Some(inner) = value.get_mut("config") {
                value = inner.take();
            }
            serde_json::from_value(value).with_context(|| format!("invalid config {}", p.display()))?
        }
        None => AnalysisConfig {
            seed: env_seed()?.unwrap_or(DEFAULT_SEED),
            ..AnalysisConfig::default()
        },
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn env_seed() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .with_context(|| format!("{SEED_ENV} must be an unsigned integer, got '{v}'")),
        Err(_) => Ok(None),
    }
}
