//! `fabcarbon` — carbon-footprint reports for photonic and CMOS chips.
//!
//! Exit codes: 0 on success, 1 when the model rejects the computation,
//! 2 for usage or file errors.

mod commands;
mod output;
mod params;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{
    ci_from, cmd_compare, cmd_embodied, cmd_epa, cmd_footprint, cmd_sweep, cmd_yield, presets_from,
    CliError, EmbodiedArgs, ErrorKind, SweepArgs, YieldArgs,
};
use fabcarbon::engine::ChipKind;
use output::ReportFormat;

#[derive(Parser)]
#[command(
    name = "fabcarbon",
    version,
    about = "Carbon-footprint model for photonic and CMOS chips",
    propagate_version = true
)]
struct Cli {
    /// Output format for the data stream
    #[arg(long, global = true, value_enum, default_value = "table")]
    format: ReportFormat,

    /// Fab preset table (defaults to the bundled presets)
    #[arg(long, global = true, value_name = "PATH")]
    presets: Option<PathBuf>,

    /// Carbon-intensity table (defaults to the bundled table)
    #[arg(long, global = true, value_name = "PATH")]
    ci: Option<PathBuf>,

    /// Suppress warnings on the error stream
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Aggregate a process flow into per-wafer totals and EPA/GPA
    Epa {
        /// Process-flow file
        flow: PathBuf,
        /// Step-catalog CSV
        catalog: PathBuf,
    },

    /// Poisson yield for a die, or a yield curve over swept areas
    Yield {
        /// Defect density per cm^2 (repeatable for multi-curve sweeps)
        #[arg(long = "d0", value_name = "D0")]
        d0: Vec<f64>,
        /// Die area in cm^2
        #[arg(long)]
        area: Option<f64>,
        /// Fraction of the die where a defect is fatal, in (0, 1]
        #[arg(long = "critical-fraction", default_value_t = 1.0)]
        critical_fraction: f64,
        /// Sweep die area as FROM:TO:STEPS instead of a single --area
        #[arg(long = "sweep-area", value_name = "FROM:TO:STEPS")]
        sweep_area: Option<String>,
    },

    /// Embodied carbon of one chip from a preset or inline coefficients
    Embodied {
        /// Die area in cm^2
        #[arg(long)]
        area: f64,
        /// Fab preset name (see the presets table)
        #[arg(long)]
        preset: Option<String>,
        /// Fab energy per area, kWh/cm^2 (overrides the preset)
        #[arg(long)]
        epa: Option<f64>,
        /// Process-gas emission per area, gCO2e/cm^2 (overrides the preset)
        #[arg(long)]
        gpa: Option<f64>,
        /// Material footprint per area, gCO2e/cm^2 (overrides the preset)
        #[arg(long)]
        mpa: Option<f64>,
        /// Fab power carbon intensity, g/kWh (overrides the preset)
        #[arg(long = "ci-fab")]
        ci_fab: Option<f64>,
        /// Defect density per cm^2 (overrides the preset)
        #[arg(long = "d0")]
        d0: Option<f64>,
        /// Critical-area fraction in (0, 1] (overrides the preset)
        #[arg(long = "critical-fraction")]
        critical_fraction: Option<f64>,
        /// Chip kind, sets the default critical-area fraction
        #[arg(long, value_parser = parse_kind, default_value = "electronic")]
        kind: ChipKind,
        /// Report dies per wafer for this wafer diameter (mm)
        #[arg(long = "wafer-diameter-mm")]
        wafer_diameter_mm: Option<f64>,
        /// Edge exclusion for the per-wafer report (mm)
        #[arg(long = "edge-exclusion-mm", default_value_t = 3.0)]
        edge_exclusion_mm: f64,
    },

    /// Full footprint report for a scenario file
    Footprint {
        /// Scenario file
        scenario: PathBuf,
    },

    /// Compare two scenarios; ratios are B over A
    Compare {
        /// Scenario A (the reference)
        scenario_a: PathBuf,
        /// Scenario B
        scenario_b: PathBuf,
    },

    /// Re-evaluate a scenario while sweeping one numeric parameter
    Sweep {
        /// Scenario file
        scenario: PathBuf,
        /// Parameter path, e.g. lifetime_years or chip.<name>.area_cm2
        #[arg(long)]
        param: String,
        /// First swept value
        #[arg(long)]
        from: f64,
        /// Last swept value
        #[arg(long)]
        to: f64,
        /// Number of steps, inclusive of both ends
        #[arg(long)]
        steps: usize,
    },
}

fn parse_kind(s: &str) -> Result<ChipKind, String> {
    match s {
        "photonic" => Ok(ChipKind::Photonic),
        "electronic" => Ok(ChipKind::Electronic),
        other => Err(format!("expected 'photonic' or 'electronic', got '{other}'")),
    }
}

fn run(cli: Cli) -> Result<String, CliError> {
    let format = cli.format;
    let quiet = cli.quiet;
    match cli.command {
        Command::Epa { flow, catalog } => cmd_epa(&flow, &catalog, format),
        Command::Yield {
            d0,
            area,
            critical_fraction,
            sweep_area,
        } => cmd_yield(
            &YieldArgs {
                d0,
                area,
                critical_fraction,
                sweep_area,
            },
            format,
        ),
        Command::Embodied {
            area,
            preset,
            epa,
            gpa,
            mpa,
            ci_fab,
            d0,
            critical_fraction,
            kind,
            wafer_diameter_mm,
            edge_exclusion_mm,
        } => {
            let presets = presets_from(cli.presets.as_deref(), quiet)?;
            cmd_embodied(
                &EmbodiedArgs {
                    area,
                    preset,
                    epa,
                    gpa,
                    mpa,
                    ci_fab,
                    d0,
                    critical_fraction,
                    kind,
                    wafer_diameter_mm,
                    edge_exclusion_mm,
                },
                &presets,
                format,
                quiet,
            )
        }
        Command::Footprint { scenario } => {
            let presets = presets_from(cli.presets.as_deref(), quiet)?;
            let ci = ci_from(cli.ci.as_deref(), quiet)?;
            cmd_footprint(&scenario, &presets, &ci, format, quiet)
        }
        Command::Compare {
            scenario_a,
            scenario_b,
        } => {
            let presets = presets_from(cli.presets.as_deref(), quiet)?;
            let ci = ci_from(cli.ci.as_deref(), quiet)?;
            cmd_compare(&scenario_a, &scenario_b, &presets, &ci, format, quiet)
        }
        Command::Sweep {
            scenario,
            param,
            from,
            to,
            steps,
        } => {
            let presets = presets_from(cli.presets.as_deref(), quiet)?;
            let ci = ci_from(cli.ci.as_deref(), quiet)?;
            cmd_sweep(
                &scenario,
                &SweepArgs {
                    param,
                    from,
                    to,
                    steps,
                },
                &presets,
                &ci,
                format,
                quiet,
            )
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(data) => {
            print!("{data}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {}", err.message);
            match err.kind {
                ErrorKind::Computation => ExitCode::from(1),
                ErrorKind::Usage => ExitCode::from(2),
            }
        }
    }
}
