//! Subcommand implementations. Data goes to stdout, diagnostics to stderr;
//! the caller maps [`CliError`] kinds onto process exit codes.

use std::path::Path;

use rayon::prelude::*;

use fabcarbon::datasets::{
    bundled, load_ci_table, load_presets, load_scenario, CarbonIntensityTable, LoadWarning,
    PresetTable,
};
use fabcarbon::engine::{
    chip_embodied_breakdown, compare, scenario_footprint, ChipKind, ChipSpec, FootprintReport,
    Scenario,
};
use fabcarbon::flow::{aggregate_flow, parse_flow, parse_step_catalog};
use fabcarbon::quantities::{Area, CarbonIntensity, PerAreaCoefficient};
use fabcarbon::yield_model::{dies_per_wafer, poisson_yield, YieldParams};

use crate::output::{count, sig6, Grid, MetricList, ReportFormat};
use crate::params::{param_paths, with_param};

/// How a failure should terminate the process.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad flags or unusable input files: exit code 2.
    Usage,
    /// The model itself refused (infeasible yield and friends): exit code 1.
    Computation,
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Usage,
            message: message.into(),
        }
    }

    pub fn computation(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Computation,
            message: message.into(),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn read_file(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            CliError::usage(format!("file not found: {}", path.display()))
        } else {
            CliError::usage(format!("cannot read {}: {e}", path.display()))
        }
    })
}

fn emit_warnings(quiet: bool, warnings: &[LoadWarning], path: &Path) {
    if quiet {
        return;
    }
    for w in warnings {
        eprintln!("warning: {}: {w}", path.display());
    }
}

/// Load the preset table from `path`, or the bundled one.
pub fn presets_from(path: Option<&Path>, quiet: bool) -> CliResult<PresetTable> {
    match path {
        None => Ok(bundled::presets()),
        Some(p) => {
            let text = read_file(p)?;
            let (table, warnings) =
                load_presets(&text).map_err(|e| CliError::usage(format!("{}: {e}", p.display())))?;
            emit_warnings(quiet, &warnings, p);
            Ok(table)
        }
    }
}

/// Load the carbon-intensity table from `path`, or the bundled one.
pub fn ci_from(path: Option<&Path>, quiet: bool) -> CliResult<CarbonIntensityTable> {
    match path {
        None => Ok(bundled::ci_table()),
        Some(p) => {
            let text = read_file(p)?;
            let (table, warnings) =
                load_ci_table(&text).map_err(|e| CliError::usage(format!("{}: {e}", p.display())))?;
            emit_warnings(quiet, &warnings, p);
            Ok(table)
        }
    }
}

fn scenario_from(
    path: &Path,
    presets: &PresetTable,
    ci: &CarbonIntensityTable,
    quiet: bool,
) -> CliResult<Scenario> {
    let text = read_file(path)?;
    let (scenario, warnings) = load_scenario(&text, presets, ci)
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    emit_warnings(quiet, &warnings, path);
    Ok(scenario)
}

pub fn cmd_epa(flow_path: &Path, catalog_path: &Path, format: ReportFormat) -> CliResult<String> {
    let flow_text = read_file(flow_path)?;
    let catalog_text = read_file(catalog_path)?;
    let flow = parse_flow(&flow_text)
        .map_err(|e| CliError::usage(format!("{}: {e}", flow_path.display())))?;
    let catalog = parse_step_catalog(&catalog_text)
        .map_err(|e| CliError::usage(format!("{}: {e}", catalog_path.display())))?;
    let agg = aggregate_flow(&flow, &catalog)
        .map_err(|e| CliError::computation(format!("{}: {e}", flow_path.display())))?;

    let mut list = MetricList::new();
    list.push("flow", flow.name.clone(), "");
    list.push("step_passes", count(flow.total_step_passes()), "");
    list.number("energy_per_wafer", agg.total_energy_per_wafer.kwh(), "kWh");
    list.number("ghg_per_wafer", agg.total_ghg_per_wafer.grams(), "g");
    list.number("usable_wafer_area", agg.usable_wafer_area.cm2(), "cm^2");
    list.number("epa", agg.epa.value(), "kWh/cm^2");
    list.number("gpa", agg.gpa.value(), "g/cm^2");
    Ok(list.render(format))
}

pub struct YieldArgs {
    pub d0: Vec<f64>,
    pub area: Option<f64>,
    pub critical_fraction: f64,
    pub sweep_area: Option<String>,
}

pub fn cmd_yield(args: &YieldArgs, format: ReportFormat) -> CliResult<String> {
    let d0_values = if args.d0.is_empty() {
        vec![0.1]
    } else {
        args.d0.clone()
    };
    let fraction = args.critical_fraction;
    if !(fraction.is_finite() && fraction > 0.0 && fraction <= 1.0) {
        return Err(CliError::usage(format!(
            "--critical-fraction must be in (0, 1], got {fraction}"
        )));
    }
    let params_for = |d0: f64| -> CliResult<YieldParams> {
        YieldParams::new(d0, fraction).map_err(|e| CliError::usage(e.to_string()))
    };

    match (&args.sweep_area, args.area) {
        (Some(spec), None) => {
            let (from, to, steps) = parse_range(spec)?;
            let mut headers = vec!["area_cm2".to_string()];
            for d0 in &d0_values {
                headers.push(format!("yield_d0_{d0}"));
            }
            let mut rows = Vec::new();
            for i in 0..steps {
                let area_value = linspace(from, to, steps, i);
                let area = Area::square_centimeters(area_value)
                    .map_err(|e| CliError::usage(e.to_string()))?;
                let mut row = vec![sig6(area_value)];
                for &d0 in &d0_values {
                    row.push(sig6(poisson_yield(&params_for(d0)?, area)));
                }
                rows.push(row);
            }
            Ok(Grid { headers, rows }.render(format))
        }
        (None, Some(area_value)) => {
            let area = Area::square_centimeters(area_value)
                .map_err(|e| CliError::usage(e.to_string()))?;
            let mut list = MetricList::new();
            if d0_values.len() == 1 {
                list.number("yield", poisson_yield(&params_for(d0_values[0])?, area), "");
            } else {
                for &d0 in &d0_values {
                    list.number(
                        format!("yield_d0_{d0}"),
                        poisson_yield(&params_for(d0)?, area),
                        "",
                    );
                }
            }
            Ok(list.render(format))
        }
        (Some(_), Some(_)) => Err(CliError::usage(
            "--area and --sweep-area are mutually exclusive",
        )),
        (None, None) => Err(CliError::usage("one of --area or --sweep-area is required")),
    }
}

pub struct EmbodiedArgs {
    pub area: f64,
    pub preset: Option<String>,
    pub epa: Option<f64>,
    pub gpa: Option<f64>,
    pub mpa: Option<f64>,
    pub ci_fab: Option<f64>,
    pub d0: Option<f64>,
    pub critical_fraction: Option<f64>,
    pub kind: ChipKind,
    pub wafer_diameter_mm: Option<f64>,
    pub edge_exclusion_mm: f64,
}

pub fn cmd_embodied(
    args: &EmbodiedArgs,
    presets: &PresetTable,
    format: ReportFormat,
    quiet: bool,
) -> CliResult<String> {
    let base = match &args.preset {
        Some(name) => Some(
            presets
                .get(name)
                .ok_or_else(|| CliError::usage(format!("no preset named '{name}'")))?
                .profile
                .clone(),
        ),
        None => None,
    };
    let pick = |flag: Option<f64>, from_base: Option<f64>, name: &str| -> CliResult<f64> {
        flag.or(from_base)
            .ok_or_else(|| CliError::usage(format!("--{name} is required without --preset")))
    };
    let epa = pick(args.epa, base.as_ref().map(|b| b.epa.value()), "epa")?;
    let gpa = pick(args.gpa, base.as_ref().map(|b| b.gpa.value()), "gpa")?;
    let mpa = pick(args.mpa, base.as_ref().map(|b| b.mpa.value()), "mpa")?;
    let ci_fab = pick(args.ci_fab, base.as_ref().map(|b| b.ci_fab.g_per_kwh()), "ci-fab")?;
    let d0 = args
        .d0
        .or(base
            .as_ref()
            .map(|b| b.yield_params.defect_density_per_cm2()))
        .unwrap_or(0.1);
    let default_fraction = match args.kind {
        ChipKind::Photonic => 0.2,
        ChipKind::Electronic => 1.0,
    };
    let fraction = args
        .critical_fraction
        .or(base
            .as_ref()
            .map(|b| b.yield_params.critical_area_fraction()))
        .unwrap_or(default_fraction);

    let usage = |e: &dyn std::fmt::Display| CliError::usage(e.to_string());
    let profile = fabcarbon::engine::FabProfile::new(
        args.preset.clone().unwrap_or_else(|| "inline".to_string()),
        PerAreaCoefficient::epa(epa).map_err(|e| usage(&e))?,
        PerAreaCoefficient::gpa(gpa).map_err(|e| usage(&e))?,
        PerAreaCoefficient::mpa(mpa).map_err(|e| usage(&e))?,
        CarbonIntensity::grams_per_kilowatt_hour(ci_fab).map_err(|e| usage(&e))?,
        YieldParams::new(d0, fraction).map_err(|e| usage(&e))?,
    )
    .map_err(|e| usage(&e))?;
    let chip = ChipSpec {
        name: "chip".to_string(),
        area: Area::square_centimeters(args.area).map_err(|e| usage(&e))?,
        kind: args.kind,
        profile,
    };
    let breakdown = chip_embodied_breakdown(&chip).map_err(|e| CliError::computation(e.to_string()))?;

    let mut list = MetricList::new();
    list.number("area", args.area, "cm^2");
    list.number("yield", breakdown.yield_fraction, "");
    list.number("effective_area", breakdown.effective_area.cm2(), "cm^2");
    list.number("fab_energy_gco2e", breakdown.fab_energy.grams(), "g");
    list.number("process_gas_gco2e", breakdown.process_gas.grams(), "g");
    list.number("materials_gco2e", breakdown.materials.grams(), "g");
    list.number("embodied_gco2e", breakdown.total.grams(), "g");

    if let Some(diameter) = args.wafer_diameter_mm {
        let per_wafer = dies_per_wafer(chip.area, diameter, args.edge_exclusion_mm);
        if per_wafer.die_exceeds_wafer && !quiet {
            eprintln!("warning: die exceeds the usable wafer area; dies_per_wafer is 0");
        }
        list.push("dies_per_wafer", count(per_wafer.dies), "");
        let good = per_wafer.dies as f64 * breakdown.yield_fraction;
        list.number("good_dies_per_wafer", good, "");
    }
    Ok(list.render(format))
}

fn footprint_rows(report: &FootprintReport) -> MetricList {
    let mut list = MetricList::new();
    list.push("scenario", report.scenario_name.clone(), "");
    list.number("runtime", report.runtime.hours_f64(), "h");
    list.number("energy", report.energy.kwh(), "kWh");
    list.number("operational_gco2e", report.operational.grams(), "g");
    for (name, carbon) in &report.per_chip_embodied {
        let kind = report.per_chip_detail[name].kind;
        list.number(
            format!("chip.{name}.embodied_gco2e"),
            carbon.grams(),
            match kind {
                ChipKind::Photonic => "g (photonic)",
                ChipKind::Electronic => "g (electronic)",
            },
        );
    }
    for (name, carbon) in &report.per_package_packaging {
        list.number(format!("package.{name}.packaging_gco2e"), carbon.grams(), "g");
    }
    list.number("embodied_total_gco2e", report.embodied_total.grams(), "g");
    list.number(
        "embodied_amortized_gco2e",
        report.embodied_amortized.grams(),
        "g",
    );
    list.number("total_gco2e", report.total.grams(), "g");
    list.number("photonic_embodied_share", report.photonic_embodied_share(), "");
    list.number(
        "electronic_embodied_share",
        1.0 - report.photonic_embodied_share(),
        "",
    );
    list.number("photonic_area_share", report.photonic_area_share(), "");
    list
}

pub fn cmd_footprint(
    scenario_path: &Path,
    presets: &PresetTable,
    ci: &CarbonIntensityTable,
    format: ReportFormat,
    quiet: bool,
) -> CliResult<String> {
    let scenario = scenario_from(scenario_path, presets, ci, quiet)?;
    let report =
        scenario_footprint(&scenario).map_err(|e| CliError::computation(e.to_string()))?;
    if !quiet {
        for w in &report.warnings {
            eprintln!("warning: {w}");
        }
    }
    Ok(footprint_rows(&report).render(format))
}

pub fn cmd_compare(
    path_a: &Path,
    path_b: &Path,
    presets: &PresetTable,
    ci: &CarbonIntensityTable,
    format: ReportFormat,
    quiet: bool,
) -> CliResult<String> {
    let a = scenario_from(path_a, presets, ci, quiet)?;
    let b = scenario_from(path_b, presets, ci, quiet)?;
    let report = compare(&a, &b).map_err(|e| CliError::computation(e.to_string()))?;
    if !quiet {
        for w in &report.warnings {
            eprintln!("warning: {w}");
        }
    }

    let headers = vec![
        "metric".to_string(),
        report.name_a.clone(),
        report.name_b.clone(),
        "ratio_b_over_a".to_string(),
        "delta_b_minus_a".to_string(),
        "lower".to_string(),
    ];
    let rows = report
        .metrics
        .iter()
        .map(|m| {
            vec![
                m.metric.key().to_string(),
                sig6(m.a_grams),
                sig6(m.b_grams),
                sig6(m.ratio_b_over_a),
                sig6(m.delta_b_minus_a),
                m.lower.as_str().to_string(),
            ]
        })
        .collect();
    Ok(Grid { headers, rows }.render(format))
}

pub struct SweepArgs {
    pub param: String,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

pub fn cmd_sweep(
    scenario_path: &Path,
    args: &SweepArgs,
    presets: &PresetTable,
    ci: &CarbonIntensityTable,
    format: ReportFormat,
    quiet: bool,
) -> CliResult<String> {
    if args.steps == 0 {
        return Err(CliError::usage("--steps must be at least 1"));
    }
    let scenario = scenario_from(scenario_path, presets, ci, quiet)?;
    let valid = param_paths(&scenario);
    if !valid.contains(&args.param) {
        return Err(CliError::usage(format!(
            "unknown parameter path '{}'; valid paths for this scenario:\n  {}",
            args.param,
            valid.join("\n  ")
        )));
    }

    // evaluate steps in parallel, emit rows in sweep order
    let results: Vec<CliResult<Vec<String>>> = (0..args.steps)
        .into_par_iter()
        .map(|i| {
            let value = linspace(args.from, args.to, args.steps, i);
            let varied = with_param(&scenario, &args.param, value).map_err(CliError::usage)?;
            let report =
                scenario_footprint(&varied).map_err(|e| CliError::computation(e.to_string()))?;
            Ok(vec![
                sig6(value),
                sig6(report.runtime.hours_f64()),
                sig6(report.energy.kwh()),
                sig6(report.operational.grams()),
                sig6(report.embodied_total.grams()),
                sig6(report.embodied_amortized.grams()),
                sig6(report.total.grams()),
            ])
        })
        .collect();

    let mut rows = Vec::with_capacity(args.steps);
    for r in results {
        rows.push(r?);
    }
    let headers = vec![
        args.param.clone(),
        "runtime_h".to_string(),
        "energy_kwh".to_string(),
        "operational_gco2e".to_string(),
        "embodied_total_gco2e".to_string(),
        "embodied_amortized_gco2e".to_string(),
        "total_gco2e".to_string(),
    ];
    Ok(Grid { headers, rows }.render(format))
}

fn parse_range(spec: &str) -> CliResult<(f64, f64, usize)> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::usage(format!(
            "--sweep-area expects FROM:TO:STEPS, got '{spec}'"
        )));
    }
    let from: f64 = parts[0]
        .parse()
        .map_err(|_| CliError::usage(format!("bad sweep start '{}'", parts[0])))?;
    let to: f64 = parts[1]
        .parse()
        .map_err(|_| CliError::usage(format!("bad sweep end '{}'", parts[1])))?;
    let steps: usize = parts[2]
        .parse()
        .map_err(|_| CliError::usage(format!("bad step count '{}'", parts[2])))?;
    if steps == 0 {
        return Err(CliError::usage("sweep needs at least 1 step"));
    }
    Ok((from, to, steps))
}

fn linspace(from: f64, to: f64, steps: usize, i: usize) -> f64 {
    if steps <= 1 {
        from
    } else {
        from + (to - from) * (i as f64) / ((steps - 1) as f64)
    }
}
