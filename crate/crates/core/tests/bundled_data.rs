//! Self-consistency and golden checks for the bundled datasets: everything
//! ships loadable, warning-free, and with the documented orderings.

use fabcarbon::datasets::{bundled, load_ci_table, load_presets, load_scenario};
use fabcarbon::engine::{scenario_footprint, ChipKind};
use fabcarbon::flow::{aggregate_flow, parse_flow, parse_step_catalog};

#[test]
fn bundled_files_load_without_warnings() {
    let (_, w) = load_presets(bundled::PRESETS).unwrap();
    assert!(w.is_empty(), "preset warnings: {w:?}");
    let (_, w) = load_ci_table(bundled::CI_TABLE).unwrap();
    assert!(w.is_empty(), "ci warnings: {w:?}");

    let presets = bundled::presets();
    let ci = bundled::ci_table();
    for text in [bundled::ADEPT_SCENARIO, bundled::SYSTOLIC_SCENARIO] {
        let (_, w) = load_scenario(text, &presets, &ci).unwrap();
        assert!(w.is_empty(), "scenario warnings: {w:?}");
    }

    parse_step_catalog(bundled::STEP_CATALOG).unwrap();
    parse_flow(bundled::PHOTONIC_ACTIVE_FLOW).unwrap();
}

#[test]
fn photonic_flow_has_documented_layers() {
    let flow = bundled::photonic_flow();
    let names: Vec<&str> = flow.layers.iter().map(|l| l.name.as_str()).collect();
    assert_eq!(
        names,
        [
            "SOI prep",
            "Si waveguide",
            "SiN waveguide",
            "Ge photodiode",
            "p/n implant+anneal",
            "contacts",
            "M1",
            "V1",
            "M2",
            "V2",
            "bond pads",
            "deep trench",
        ]
    );
}

#[test]
fn flow_aggregate_matches_frozen_values() {
    let agg = aggregate_flow(&bundled::photonic_flow(), &bundled::step_catalog()).unwrap();
    assert_eq!(agg.total_energy_per_wafer.kwh(), 149.7);
    assert_eq!(agg.total_ghg_per_wafer.grams(), 15070.0);
    assert!((agg.usable_wafer_area.cm2() - 678.8667565142183).abs() < 1e-9);
    assert!((agg.epa.value() - 0.22051455394378947).abs() < 1e-15);
}

#[test]
fn epa_ordering_across_presets() {
    let presets = bundled::presets();
    let epa = |n: &str| presets.get(n).unwrap().profile.epa.value();
    assert!(epa("cmos_7nm") > epa("cmos_14nm"));
    assert!(epa("cmos_14nm") > epa("cmos_28nm"));
    assert!(epa("cmos_28nm") > epa("photonic_active"));
    // 22 nm slots between its neighbors
    assert!(epa("cmos_14nm") > epa("cmos_22nm"));
    assert!(epa("cmos_22nm") > epa("cmos_28nm"));
}

#[test]
fn photonic_gpa_equals_28nm_and_is_flagged_as_override() {
    let presets = bundled::presets();
    let photonic = presets.get("photonic_active").unwrap();
    let cmos28 = presets.get("cmos_28nm").unwrap();
    assert_eq!(photonic.profile.gpa.value(), cmos28.profile.gpa.value());
    assert!(photonic.gpa_overrides_flow);
    assert!(!cmos28.gpa_overrides_flow);
    // the override is a real one: the flow-derived GPA is lower
    let agg = aggregate_flow(&bundled::photonic_flow(), &bundled::step_catalog()).unwrap();
    assert!(agg.gpa.value() < photonic.profile.gpa.value());
}

#[test]
fn mpa_is_node_independent() {
    let presets = bundled::presets();
    let mpa: Vec<f64> = presets.iter().map(|p| p.profile.mpa.value()).collect();
    assert!(mpa.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn ci_table_orderings() {
    let ci = bundled::ci_table();
    let taiwan = ci.get("taiwan_grid").expect("taiwan_grid present");
    let renewable = ci.get("renewable").expect("renewable present");
    assert!(renewable.intensity.g_per_kwh() < taiwan.intensity.g_per_kwh());
    assert!(!taiwan.provenance.is_empty());
    assert!(!renewable.provenance.is_empty());
}

#[test]
fn every_preset_value_carries_a_source_note() {
    let presets = bundled::presets();
    for preset in presets.iter() {
        assert!(!preset.provenance.is_empty(), "{} has no provenance", preset.name);
        for key in ["epa_src", "gpa_src", "mpa_src", "ci_fab_src"] {
            assert!(
                preset.field_sources.contains_key(key),
                "{} missing {key}",
                preset.name
            );
        }
    }
}

#[test]
fn adept_scenario_structure() {
    let presets = bundled::presets();
    let ci = bundled::ci_table();
    let (scenario, _) = load_scenario(bundled::ADEPT_SCENARIO, &presets, &ci).unwrap();
    assert_eq!(scenario.name, "adept");
    assert_eq!(scenario.lifetime.hours_f64(), 43800.0);
    assert_eq!(scenario.system.len(), 1, "one heterogeneous package");

    let photonic: Vec<_> = scenario
        .chips()
        .filter(|c| c.kind == ChipKind::Photonic)
        .collect();
    assert_eq!(photonic.len(), 1);
    assert_eq!(photonic[0].name, "photonic-tensor-core");
    let electronic = scenario
        .chips()
        .filter(|c| c.kind == ChipKind::Electronic)
        .count();
    assert_eq!(electronic, 2);

    // photonic share of die area is approximately 16%
    let share = photonic[0].area.cm2() / scenario.total_chip_area_cm2();
    assert!((share - 0.16).abs() < 0.005, "photonic area share {share}");
}

#[test]
fn systolic_scenario_structure() {
    let presets = bundled::presets();
    let ci = bundled::ci_table();
    let (scenario, _) = load_scenario(bundled::SYSTOLIC_SCENARIO, &presets, &ci).unwrap();
    assert_eq!(scenario.name, "systolic-array");
    let chips: Vec<_> = scenario.chips().collect();
    assert_eq!(chips.len(), 1);
    assert_eq!(chips[0].kind, ChipKind::Electronic);
    assert_eq!(chips[0].profile.name, "cmos_22nm");
    // the ten 1 GHz cores live on this one die; the file says so
    assert!(bundled::SYSTOLIC_SCENARIO.contains("ten 128x128 systolic-array cores at 1 GHz"));
}

#[test]
fn scenarios_share_workload_size_and_runtime() {
    let presets = bundled::presets();
    let ci = bundled::ci_table();
    let (adept, _) = load_scenario(bundled::ADEPT_SCENARIO, &presets, &ci).unwrap();
    let (sa, _) = load_scenario(bundled::SYSTOLIC_SCENARIO, &presets, &ci).unwrap();
    assert_eq!(adept.workload.inference_count, sa.workload.inference_count);
    assert_eq!(
        adept.workload.throughput_per_second,
        sa.workload.throughput_per_second
    );
    // SA area sits about 25 mm^2 below the photonic system's total
    let delta = adept.total_chip_area_cm2() - sa.total_chip_area_cm2();
    assert!((delta - 0.25).abs() < 1e-12, "area delta {delta} cm^2");

    let ra = scenario_footprint(&adept).unwrap();
    let rs = scenario_footprint(&sa).unwrap();
    assert_eq!(ra.runtime, rs.runtime);
}
