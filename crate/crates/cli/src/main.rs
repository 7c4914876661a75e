//! `slconvex`: convexity analysis of isotropic planar energies from the
//! command line.

mod document;
mod profile;
mod source;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Result;
use clap::{Parser, Subcommand};
use serde::Serialize;
use slconvex_core::energy::{catalog, CatalogEntry, ExpectedVerdicts};
use slconvex_core::{analyze, counterexample_suite, Domain};

use document::{emit, ReportDocument, Timing};
use profile::Curve;
use source::{catalog_entry, load_config, EnergyDescriptor, EnergySource};

/// Exit codes: 0 when every applicable criterion holds (or every claim
/// verifies), 1 when one fails, 2 on usage, parse or evaluation errors.
#[derive(Debug, Parser)]
#[command(
    name = "slconvex",
    version,
    about = "Convexity analysis of isotropic planar energies on SL(2) and GL+(2)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every applicable criterion and write a JSON report.
    Analyze {
        #[command(flatten)]
        source: EnergySource,
        /// Domain to analyse on; defaults to the energy's own domain.
        #[arg(long)]
        domain: Option<Domain>,
        /// Seed for the sampling oracles (default: $SLCONVEX_SEED).
        #[arg(long)]
        seed: Option<u64>,
        /// JSON config, or a previous report whose config echo is reused.
        #[arg(long, value_name = "PATH")]
        config: Option<PathBuf>,
        /// Write the report here instead of stdout.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Verify the three claims about h(t) = |sqrt(t) - 1/sqrt(t)|.
    Counterexample {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_name = "PATH")]
        config: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Dump a profile or criterion slack as CSV, one row per grid point.
    Profile {
        #[command(flatten)]
        source: EnergySource,
        #[arg(long, value_enum)]
        curve: Curve,
        #[arg(long, value_name = "PATH")]
        config: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// List the builtin energies with their expected verdicts.
    Catalog {
        #[arg(long)]
        json: bool,
        /// Show a single entry.
        #[arg(long, value_name = "NAME")]
        name: Option<String>,
    },
}

#[derive(Serialize)]
struct CatalogListing {
    name: String,
    family: String,
    description: String,
    domain: Domain,
    representation: String,
    representations: Vec<String>,
    smooth: bool,
    expected: ExpectedVerdicts,
}

impl CatalogListing {
    fn of(e: &CatalogEntry) -> Self {
        CatalogListing {
            name: e.spec.name.clone(),
            family: e.family.to_string(),
            description: e.description.to_string(),
            domain: e.spec.domain(),
            representation: e.spec.representation().keyword().to_string(),
            representations: e
                .representations()
                .map(|s| s.representation().keyword().to_string())
                .collect(),
            smooth: e.smooth,
            expected: e.expected,
        }
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn run_catalog(json: bool, name: Option<String>) -> Result<u8> {
    let entries = match name {
        Some(n) => vec![catalog_entry(&n)?],
        None => catalog(),
    };
    let listing: Vec<CatalogListing> = entries.iter().map(CatalogListing::of).collect();
    let text = if json {
        format!("{}\n", serde_json::to_string_pretty(&listing)?)
    } else {
        let mut s = format!(
            "{:<20} {:<8} {:<16} {:>12} {:>12} {:>14}\n",
            "name", "domain", "forms", "sl2-rank-one", "sl2-polycvx", "gl+-rank-one"
        );
        for l in &listing {
            s.push_str(&format!(
                "{:<20} {:<8} {:<16} {:>12} {:>12} {:>14}\n",
                l.name,
                l.domain.as_str(),
                l.representations.join(","),
                yes_no(l.expected.sl2_rank_one_convex),
                yes_no(l.expected.sl2_polyconvex),
                yes_no(l.expected.glplus_rank_one_convex)
            ));
        }
        s
    };
    emit(&text, None)?;
    Ok(0)
}

fn run(cli: Cli) -> Result<u8> {
    let start = Instant::now();
    match cli.command {
        Command::Analyze {
            source,
            domain,
            seed,
            config,
            out,
        } => {
            let cfg = load_config(config.as_deref(), seed)?;
            let (spec, origin) = source.load(domain)?;
            let report = analyze(&spec, spec.domain(), &cfg)?;
            for d in &report.diagnostics {
                eprintln!("{}: {}", d.kind, d.message);
            }
            let code = u8::from(report.any_fails());
            let mut doc = ReportDocument::new("analyze", EnergyDescriptor::of(&spec, origin), cfg);
            doc.report = Some(report);
            doc.exit_code = code.into();
            doc.timing = Timing {
                elapsed_seconds: start.elapsed().as_secs_f64(),
            };
            emit(&doc.to_json()?, out.as_deref())?;
            Ok(code)
        }
        Command::Counterexample { seed, config, out } => {
            let cfg = load_config(config.as_deref(), seed)?;
            let ce = counterexample_suite(&cfg)?;
            for c in ce.claims.iter().filter(|c| !c.verified) {
                eprintln!("claim {} not verified: {}", c.id, c.statement);
            }
            let code = u8::from(!ce.all_verified);
            let spec = catalog_entry(&ce.energy)?.spec;
            let mut doc = ReportDocument::new(
                "counterexample",
                EnergyDescriptor::of(&spec, Some(format!("catalog:{}", ce.energy))),
                cfg,
            );
            doc.counterexample = Some(ce);
            doc.exit_code = code.into();
            doc.timing = Timing {
                elapsed_seconds: start.elapsed().as_secs_f64(),
            };
            emit(&doc.to_json()?, out.as_deref())?;
            Ok(code)
        }
        Command::Profile {
            source,
            curve,
            config,
            out,
        } => {
            let cfg = load_config(config.as_deref(), None)?;
            let (spec, _) = source.load(None)?;
            emit(&profile::render(&spec, curve, &cfg)?, out.as_deref())?;
            Ok(0)
        }
        Command::Catalog { json, name } => run_catalog(json, name),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
