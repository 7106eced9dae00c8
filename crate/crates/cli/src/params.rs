//! Addressing numeric scenario fields by path for parameter sweeps.

use fabcarbon::engine::{EnergyDemand, Scenario};
use fabcarbon::quantities::{Area, CarbonIntensity, CarbonMass, Energy, Power, TimeSpan};

/// Every sweepable path for this scenario, in stable order.
pub fn param_paths(scenario: &Scenario) -> Vec<String> {
    let mut paths = vec![
        "lifetime_years".to_string(),
        "ci_use_g_per_kwh".to_string(),
        "workload.inference_count".to_string(),
        "workload.throughput_inf_per_s".to_string(),
    ];
    match scenario.workload.demand {
        EnergyDemand::AveragePower(_) => paths.push("workload.power_draw_kw".to_string()),
        EnergyDemand::PerInference(_) => {
            paths.push("workload.energy_per_inference_kwh".to_string())
        }
    }
    let mut chip_names: Vec<&str> = scenario.chips().map(|c| c.name.as_str()).collect();
    chip_names.sort_unstable();
    for name in chip_names {
        paths.push(format!("chip.{name}.area_cm2"));
        paths.push(format!("chip.{name}.defect_density_per_cm2"));
        paths.push(format!("chip.{name}.critical_area_fraction"));
    }
    let mut package_names: Vec<&str> = scenario.system.iter().map(|p| p.name.as_str()).collect();
    package_names.sort_unstable();
    for name in package_names {
        paths.push(format!("package.{name}.packaging_gco2e"));
    }
    paths
}

/// Copy of the scenario with one numeric field set to `value`.
pub fn with_param(scenario: &Scenario, path: &str, value: f64) -> Result<Scenario, String> {
    let mut s = scenario.clone();
    let err = |m: String| -> Result<Scenario, String> { Err(format!("{path}: {m}")) };

    match path {
        "lifetime_years" => {
            if !(value.is_finite() && value > 0.0) {
                return err(format!("lifetime must be positive, got {value}"));
            }
            s.lifetime = TimeSpan::hours(value * 8760.0).map_err(|e| e.to_string())?;
        }
        "ci_use_g_per_kwh" => {
            s.ci_use = CarbonIntensity::grams_per_kilowatt_hour(value).map_err(|e| e.to_string())?;
        }
        "workload.inference_count" => {
            if !(value.is_finite() && value >= 0.0 && value <= 2f64.powi(53)) {
                return err(format!("expected a non-negative count, got {value}"));
            }
            s.workload.inference_count = value.round() as u64;
        }
        "workload.throughput_inf_per_s" => {
            if !(value.is_finite() && value > 0.0) {
                return err(format!("throughput must be positive, got {value}"));
            }
            s.workload.throughput_per_second = value;
        }
        "workload.power_draw_kw" => match s.workload.demand {
            EnergyDemand::AveragePower(_) => {
                s.workload.demand =
                    EnergyDemand::AveragePower(Power::kilowatts(value).map_err(|e| e.to_string())?);
            }
            EnergyDemand::PerInference(_) => {
                return err("this scenario specifies energy per inference, not power".to_string());
            }
        },
        "workload.energy_per_inference_kwh" => match s.workload.demand {
            EnergyDemand::PerInference(_) => {
                s.workload.demand = EnergyDemand::PerInference(
                    Energy::kilowatt_hours(value).map_err(|e| e.to_string())?,
                );
            }
            EnergyDemand::AveragePower(_) => {
                return err("this scenario specifies average power, not energy per inference".to_string());
            }
        },
        _ => {
            let parts: Vec<&str> = path.split('.').collect();
            match parts.as_slice() {
                ["chip", name, field] => {
                    let chip = s
                        .system
                        .iter_mut()
                        .flat_map(|p| p.chips.iter_mut())
                        .find(|c| c.name == *name)
                        .ok_or_else(|| format!("{path}: no chip named '{name}'"))?;
                    match *field {
                        "area_cm2" => {
                            chip.area =
                                Area::square_centimeters(value).map_err(|e| e.to_string())?;
                        }
                        "defect_density_per_cm2" => {
                            chip.profile.yield_params = chip
                                .profile
                                .yield_params
                                .with_defect_density(value)
                                .map_err(|e| e.to_string())?;
                        }
                        "critical_area_fraction" => {
                            chip.profile.yield_params = chip
                                .profile
                                .yield_params
                                .with_critical_fraction(value)
                                .map_err(|e| e.to_string())?;
                        }
                        other => return Err(format!("{path}: unknown chip field '{other}'")),
                    }
                }
                ["package", name, "packaging_gco2e"] => {
                    let package = s
                        .system
                        .iter_mut()
                        .find(|p| p.name == *name)
                        .ok_or_else(|| format!("{path}: no package named '{name}'"))?;
                    package.packaging_carbon =
                        CarbonMass::grams_co2e(value).map_err(|e| e.to_string())?;
                }
                _ => return Err(format!("unknown parameter path '{path}'")),
            }
        }
    }
    Ok(s)
}
