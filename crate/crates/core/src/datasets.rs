//! Loaders for the structured-document dataset files: fab presets, carbon
//! intensity tables, and scenarios — plus the bundled data.
//!
//! All three use one line-oriented format: `[section]` or `[kind name]`
//! headers followed by `key = value` pairs, `#` comments anywhere. Numeric
//! keys carry their unit in the name (`epa_kwh_per_cm2`, `lifetime_years`);
//! there are no bare numbers. Unknown keys are errors, so typos fail loudly.
//! Every bundled numeric value carries a provenance string; a section
//! without provenance loads fine but is reported as a warning.
//!
//! ```
//! use fabcarbon::datasets::{bundled, load_scenario};
//!
//! let presets = bundled::presets();
//! let ci = bundled::ci_table();
//! let (scenario, warnings) = load_scenario(bundled::ADEPT_SCENARIO, &presets, &ci).unwrap();
//! assert_eq!(scenario.name, "adept");
//! assert!(warnings.is_empty());
//! ```

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::engine::{
    ChipKind, ChipSpec, EnergyDemand, EngineError, FabProfile, PackageSpec, Scenario, Workload,
};
use crate::flow::Position;
use crate::quantities::{
    Area, CarbonIntensity, CarbonMass, Energy, PerAreaCoefficient, Power, QuantityError, TimeSpan,
};
use crate::yield_model::{YieldError, YieldParams};

/// Hours in the default five-year lifetime used when a scenario omits
/// `lifetime_years`.
pub const DEFAULT_LIFETIME_HOURS: f64 = 43_800.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DatasetError {
    #[error("{pos}: {message}")]
    Syntax { pos: Position, message: String },
    #[error("{pos}: unknown section kind '{kind}'")]
    UnknownSection { pos: Position, kind: String },
    #[error("{pos}: unknown key '{key}' in [{section}]")]
    UnknownKey {
        pos: Position,
        section: String,
        key: String,
    },
    #[error("{pos}: duplicate key '{key}'")]
    DuplicateKey { pos: Position, key: String },
    #[error("{pos}: duplicate section '{name}'")]
    DuplicateSection { pos: Position, name: String },
    #[error("missing required key '{key}' in [{section}]")]
    MissingKey { section: String, key: String },
    #[error("missing required section [{kind}]")]
    MissingSection { kind: &'static str },
    #[error("{pos}: {key}: {message}")]
    BadValue {
        pos: Position,
        key: String,
        message: String,
    },
    #[error("{pos}: {kind} '{name}' is not defined")]
    DanglingReference {
        pos: Position,
        kind: &'static str,
        name: String,
    },
    #[error("workload must set exactly one of power_draw_kw and energy_per_inference_kwh; {found}")]
    WorkloadEnergySpec { found: &'static str },
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// A non-fatal observation made while loading.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadWarning {
    pub pos: Position,
    pub message: String,
}

impl std::fmt::Display for LoadWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.pos, self.message)
    }
}

// ---------------------------------------------------------------------------
// generic section/key-value document
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Number(f64),
    Text(String),
    Bool(bool),
}

#[derive(Debug, Clone)]
struct Entry {
    value: Value,
    pos: Position,
}

#[derive(Debug, Clone)]
struct Section {
    kind: String,
    name: Option<String>,
    pos: Position,
    entries: BTreeMap<String, Entry>,
}

fn parse_document(text: &str) -> Result<Vec<Section>, DatasetError> {
    let mut sections: Vec<Section> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            // a '#' inside a quoted value is part of the value
            Some(h) if raw[..h].matches('"').count() % 2 == 0 => &raw[..h],
            _ => raw,
        };
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let col = raw.find(trimmed.chars().next().unwrap()).unwrap_or(0) + 1;
        let pos = Position {
            line: line_no,
            column: col,
        };

        if let Some(inner) = trimmed.strip_prefix('[') {
            let Some(inner) = inner.strip_suffix(']') else {
                return Err(DatasetError::Syntax {
                    pos,
                    message: "section header must end with ']'".to_string(),
                });
            };
            let mut parts = inner.trim().splitn(2, char::is_whitespace);
            let kind = parts.next().unwrap_or("").to_string();
            if kind.is_empty() {
                return Err(DatasetError::Syntax {
                    pos,
                    message: "empty section header".to_string(),
                });
            }
            let name = parts.next().map(|s| s.trim().to_string()).filter(|s| !s.is_empty());
            sections.push(Section {
                kind,
                name,
                pos,
                entries: BTreeMap::new(),
            });
            continue;
        }

        let Some(eq) = trimmed.find('=') else {
            return Err(DatasetError::Syntax {
                pos,
                message: format!("expected 'key = value', found '{trimmed}'"),
            });
        };
        let key = trimmed[..eq].trim().to_string();
        let value_str = trimmed[eq + 1..].trim();
        if key.is_empty() {
            return Err(DatasetError::Syntax {
                pos,
                message: "empty key before '='".to_string(),
            });
        }
        if value_str.is_empty() {
            return Err(DatasetError::Syntax {
                pos,
                message: format!("key '{key}' has no value"),
            });
        }
        let value = if let Some(q) = value_str.strip_prefix('"') {
            let Some(q) = q.strip_suffix('"') else {
                return Err(DatasetError::Syntax {
                    pos,
                    message: format!("unterminated string for key '{key}'"),
                });
            };
            Value::Text(q.to_string())
        } else if value_str == "true" {
            Value::Bool(true)
        } else if value_str == "false" {
            Value::Bool(false)
        } else if let Ok(n) = value_str.parse::<f64>() {
            Value::Number(n)
        } else {
            Value::Text(value_str.to_string())
        };

        let Some(section) = sections.last_mut() else {
            return Err(DatasetError::Syntax {
                pos,
                message: format!("key '{key}' appears before any [section]"),
            });
        };
        if section.entries.contains_key(&key) {
            return Err(DatasetError::DuplicateKey { pos, key });
        }
        section.entries.insert(key, Entry { value, pos });
    }
    Ok(sections)
}

impl Section {
    fn label(&self) -> String {
        match &self.name {
            Some(n) => format!("{} {}", self.kind, n),
            None => self.kind.clone(),
        }
    }

    fn check_keys(&self, allowed: &[&str]) -> Result<(), DatasetError> {
        for (key, entry) in &self.entries {
            if !allowed.contains(&key.as_str()) {
                return Err(DatasetError::UnknownKey {
                    pos: entry.pos,
                    section: self.label(),
                    key: key.clone(),
                });
            }
        }
        Ok(())
    }

    fn number(&self, key: &str) -> Result<(f64, Position), DatasetError> {
        let entry = self.entries.get(key).ok_or_else(|| DatasetError::MissingKey {
            section: self.label(),
            key: key.to_string(),
        })?;
        match entry.value {
            Value::Number(n) => Ok((n, entry.pos)),
            _ => Err(DatasetError::BadValue {
                pos: entry.pos,
                key: key.to_string(),
                message: "expected a number".to_string(),
            }),
        }
    }

    fn opt_number(&self, key: &str) -> Result<Option<(f64, Position)>, DatasetError> {
        if self.entries.contains_key(key) {
            self.number(key).map(Some)
        } else {
            Ok(None)
        }
    }

    fn text(&self, key: &str) -> Result<(String, Position), DatasetError> {
        let entry = self.entries.get(key).ok_or_else(|| DatasetError::MissingKey {
            section: self.label(),
            key: key.to_string(),
        })?;
        match &entry.value {
            Value::Text(s) => Ok((s.clone(), entry.pos)),
            _ => Err(DatasetError::BadValue {
                pos: entry.pos,
                key: key.to_string(),
                message: "expected text".to_string(),
            }),
        }
    }

    fn opt_text(&self, key: &str) -> Result<Option<(String, Position)>, DatasetError> {
        if self.entries.contains_key(key) {
            self.text(key).map(Some)
        } else {
            Ok(None)
        }
    }

    fn opt_bool(&self, key: &str) -> Result<Option<bool>, DatasetError> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(Entry {
                value: Value::Bool(b),
                ..
            }) => Ok(Some(*b)),
            Some(entry) => Err(DatasetError::BadValue {
                pos: entry.pos,
                key: key.to_string(),
                message: "expected true or false".to_string(),
            }),
        }
    }

    fn provenance_warning(&self, warnings: &mut Vec<LoadWarning>) {
        if !self.entries.contains_key("provenance") {
            warnings.push(LoadWarning {
                pos: self.pos,
                message: format!("section [{}] has no provenance", self.label()),
            });
        }
    }
}

fn quantity_err(pos: Position, key: &str, err: QuantityError) -> DatasetError {
    DatasetError::BadValue {
        pos,
        key: key.to_string(),
        message: err.to_string(),
    }
}

fn yield_err(pos: Position, key: &str, err: YieldError) -> DatasetError {
    DatasetError::BadValue {
        pos,
        key: key.to_string(),
        message: err.to_string(),
    }
}

// ---------------------------------------------------------------------------
// fab presets
// ---------------------------------------------------------------------------

/// One named fab profile with its provenance notes.
#[derive(Debug, Clone, PartialEq)]
pub struct NodePreset {
    pub name: String,
    pub profile: FabProfile,
    pub provenance: String,
    /// Set when the preset's GPA deliberately replaces a flow-derived GPA.
    pub gpa_overrides_flow: bool,
    /// Per-field source notes, keyed by the field's `_src` name.
    pub field_sources: BTreeMap<String, String>,
}

/// All presets from one document, keyed by node name.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PresetTable {
    presets: BTreeMap<String, NodePreset>,
}

impl PresetTable {
    pub fn get(&self, name: &str) -> Option<&NodePreset> {
        self.presets.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &NodePreset> {
        self.presets.values()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.presets.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.presets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.presets.is_empty()
    }
}

const PRESET_KEYS: &[&str] = &[
    "epa_kwh_per_cm2",
    "epa_src",
    "gpa_gco2e_per_cm2",
    "gpa_src",
    "gpa_overrides_flow",
    "mpa_gco2e_per_cm2",
    "mpa_src",
    "ci_fab_g_per_kwh",
    "ci_fab_src",
    "defect_density_per_cm2",
    "defect_density_src",
    "critical_area_fraction",
    "critical_area_fraction_src",
    "provenance",
];

/// Load a preset table. Returns the table plus non-fatal warnings.
pub fn load_presets(text: &str) -> Result<(PresetTable, Vec<LoadWarning>), DatasetError> {
    let sections = parse_document(text)?;
    let mut warnings = Vec::new();
    let mut presets = BTreeMap::new();

    for section in &sections {
        if section.kind != "preset" {
            return Err(DatasetError::UnknownSection {
                pos: section.pos,
                kind: section.kind.clone(),
            });
        }
        let Some(name) = section.name.clone() else {
            return Err(DatasetError::Syntax {
                pos: section.pos,
                message: "preset section needs a name: [preset <name>]".to_string(),
            });
        };
        section.check_keys(PRESET_KEYS)?;

        let (epa, epa_pos) = section.number("epa_kwh_per_cm2")?;
        let (gpa, gpa_pos) = section.number("gpa_gco2e_per_cm2")?;
        let (mpa, mpa_pos) = section.number("mpa_gco2e_per_cm2")?;
        let (ci_fab, ci_pos) = section.number("ci_fab_g_per_kwh")?;
        let (d0, d0_pos) = section.number("defect_density_per_cm2")?;
        let (frac, frac_pos) = section.number("critical_area_fraction")?;

        let profile = FabProfile::new(
            name.clone(),
            PerAreaCoefficient::epa(epa).map_err(|e| quantity_err(epa_pos, "epa_kwh_per_cm2", e))?,
            PerAreaCoefficient::gpa(gpa).map_err(|e| quantity_err(gpa_pos, "gpa_gco2e_per_cm2", e))?,
            PerAreaCoefficient::mpa(mpa).map_err(|e| quantity_err(mpa_pos, "mpa_gco2e_per_cm2", e))?,
            CarbonIntensity::grams_per_kilowatt_hour(ci_fab)
                .map_err(|e| quantity_err(ci_pos, "ci_fab_g_per_kwh", e))?,
            YieldParams::new(d0, frac).map_err(|e| {
                yield_err(
                    if matches!(e, YieldError::BadDefectDensity(_)) {
                        d0_pos
                    } else {
                        frac_pos
                    },
                    "yield parameters",
                    e,
                )
            })?,
        )?;

        let mut field_sources = BTreeMap::new();
        for key in ["epa_src", "gpa_src", "mpa_src", "ci_fab_src", "defect_density_src", "critical_area_fraction_src"] {
            if let Some((src, _)) = section.opt_text(key)? {
                field_sources.insert(key.to_string(), src);
            }
        }
        let provenance = section
            .opt_text("provenance")?
            .map(|(s, _)| s)
            .unwrap_or_default();
        section.provenance_warning(&mut warnings);

        if presets.contains_key(&name) {
            return Err(DatasetError::DuplicateSection {
                pos: section.pos,
                name,
            });
        }
        presets.insert(
            name.clone(),
            NodePreset {
                name,
                profile,
                provenance,
                gpa_overrides_flow: section.opt_bool("gpa_overrides_flow")?.unwrap_or(false),
                field_sources,
            },
        );
    }

    if presets.is_empty() {
        return Err(DatasetError::MissingSection { kind: "preset" });
    }
    Ok((PresetTable { presets }, warnings))
}

// ---------------------------------------------------------------------------
// carbon intensity table
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct CiEntry {
    pub name: String,
    pub intensity: CarbonIntensity,
    pub provenance: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CarbonIntensityTable {
    entries: BTreeMap<String, CiEntry>,
}

impl CarbonIntensityTable {
    pub fn get(&self, name: &str) -> Option<&CiEntry> {
        self.entries.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &CiEntry> {
        self.entries.values()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Load a carbon-intensity table. Returns the table plus warnings.
pub fn load_ci_table(
    text: &str,
) -> Result<(CarbonIntensityTable, Vec<LoadWarning>), DatasetError> {
    let sections = parse_document(text)?;
    let mut warnings = Vec::new();
    let mut entries = BTreeMap::new();

    for section in &sections {
        if section.kind != "source" {
            return Err(DatasetError::UnknownSection {
                pos: section.pos,
                kind: section.kind.clone(),
            });
        }
        let Some(name) = section.name.clone() else {
            return Err(DatasetError::Syntax {
                pos: section.pos,
                message: "source section needs a name: [source <name>]".to_string(),
            });
        };
        section.check_keys(&["ci_g_per_kwh", "provenance"])?;
        let (ci, ci_pos) = section.number("ci_g_per_kwh")?;
        let intensity = CarbonIntensity::grams_per_kilowatt_hour(ci)
            .map_err(|e| quantity_err(ci_pos, "ci_g_per_kwh", e))?;
        let provenance = section
            .opt_text("provenance")?
            .map(|(s, _)| s)
            .unwrap_or_default();
        section.provenance_warning(&mut warnings);

        if entries.contains_key(&name) {
            return Err(DatasetError::DuplicateSection {
                pos: section.pos,
                name,
            });
        }
        entries.insert(
            name.clone(),
            CiEntry {
                name,
                intensity,
                provenance,
            },
        );
    }

    if entries.is_empty() {
        return Err(DatasetError::MissingSection { kind: "source" });
    }
    Ok((CarbonIntensityTable { entries }, warnings))
}

// ---------------------------------------------------------------------------
// scenario files
// ---------------------------------------------------------------------------

const SCENARIO_KEYS: &[&str] = &[
    "name",
    "lifetime_years",
    "ci_use",
    "ci_use_g_per_kwh",
    "provenance",
];
const WORKLOAD_KEYS: &[&str] = &[
    "name",
    "inference_count",
    "throughput_inf_per_s",
    "power_draw_kw",
    "energy_per_inference_kwh",
    "provenance",
];
const PACKAGE_KEYS: &[&str] = &["packaging_gco2e", "provenance"];
const CHIP_KEYS: &[&str] = &[
    "package",
    "preset",
    "kind",
    "area_cm2",
    "defect_density_per_cm2",
    "critical_area_fraction",
    "epa_kwh_per_cm2",
    "gpa_gco2e_per_cm2",
    "mpa_gco2e_per_cm2",
    "ci_fab_g_per_kwh",
    "provenance",
];

/// Load and fully resolve a scenario against preset and carbon-intensity
/// tables. Returns the scenario plus non-fatal warnings.
pub fn load_scenario(
    text: &str,
    presets: &PresetTable,
    ci_table: &CarbonIntensityTable,
) -> Result<(Scenario, Vec<LoadWarning>), DatasetError> {
    let sections = parse_document(text)?;
    let mut warnings = Vec::new();

    let mut scenario_section: Option<&Section> = None;
    let mut workload_section: Option<&Section> = None;
    let mut package_sections: Vec<&Section> = Vec::new();
    let mut chip_sections: Vec<&Section> = Vec::new();

    for section in &sections {
        match section.kind.as_str() {
            "scenario" => {
                if scenario_section.is_some() {
                    return Err(DatasetError::DuplicateSection {
                        pos: section.pos,
                        name: "scenario".to_string(),
                    });
                }
                scenario_section = Some(section);
            }
            "workload" => {
                if workload_section.is_some() {
                    return Err(DatasetError::DuplicateSection {
                        pos: section.pos,
                        name: "workload".to_string(),
                    });
                }
                workload_section = Some(section);
            }
            "package" => package_sections.push(section),
            "chip" => chip_sections.push(section),
            other => {
                return Err(DatasetError::UnknownSection {
                    pos: section.pos,
                    kind: other.to_string(),
                });
            }
        }
    }

    let scenario_section = scenario_section.ok_or(DatasetError::MissingSection { kind: "scenario" })?;
    let workload_section = workload_section.ok_or(DatasetError::MissingSection { kind: "workload" })?;
    scenario_section.check_keys(SCENARIO_KEYS)?;
    workload_section.check_keys(WORKLOAD_KEYS)?;
    scenario_section.provenance_warning(&mut warnings);
    workload_section.provenance_warning(&mut warnings);

    // workload
    let (workload_name, _) = workload_section.text("name")?;
    let (count, count_pos) = workload_section.number("inference_count")?;
    if count < 0.0 || count.fract() != 0.0 || count > 2f64.powi(53) {
        return Err(DatasetError::BadValue {
            pos: count_pos,
            key: "inference_count".to_string(),
            message: format!("expected a non-negative integer, got {count}"),
        });
    }
    let (throughput, throughput_pos) = workload_section.number("throughput_inf_per_s")?;
    let power = workload_section.opt_number("power_draw_kw")?;
    let per_inference = workload_section.opt_number("energy_per_inference_kwh")?;
    let demand = match (power, per_inference) {
        (Some((kw, pos)), None) => EnergyDemand::AveragePower(
            Power::kilowatts(kw).map_err(|e| quantity_err(pos, "power_draw_kw", e))?,
        ),
        (None, Some((kwh, pos))) => EnergyDemand::PerInference(
            Energy::kilowatt_hours(kwh)
                .map_err(|e| quantity_err(pos, "energy_per_inference_kwh", e))?,
        ),
        (Some(_), Some(_)) => {
            return Err(DatasetError::WorkloadEnergySpec {
                found: "both are present",
            });
        }
        (None, None) => {
            return Err(DatasetError::WorkloadEnergySpec {
                found: "neither is present",
            });
        }
    };
    let workload = Workload::new(workload_name, count as u64, throughput, demand).map_err(|e| {
        DatasetError::BadValue {
            pos: throughput_pos,
            key: "throughput_inf_per_s".to_string(),
            message: e.to_string(),
        }
    })?;

    // scenario header
    let (scenario_name, _) = scenario_section.text("name")?;
    let lifetime_hours = match scenario_section.opt_number("lifetime_years")? {
        Some((years, pos)) => {
            if years <= 0.0 || !years.is_finite() {
                return Err(DatasetError::BadValue {
                    pos,
                    key: "lifetime_years".to_string(),
                    message: format!("lifetime must be positive, got {years}"),
                });
            }
            years * 8760.0
        }
        None => DEFAULT_LIFETIME_HOURS,
    };
    let ci_use = match (
        scenario_section.opt_text("ci_use")?,
        scenario_section.opt_number("ci_use_g_per_kwh")?,
    ) {
        (Some((ci_name, ci_pos)), None) => {
            ci_table
                .get(&ci_name)
                .ok_or(DatasetError::DanglingReference {
                    pos: ci_pos,
                    kind: "carbon-intensity source",
                    name: ci_name.clone(),
                })?
                .intensity
        }
        (None, Some((value, pos))) => CarbonIntensity::grams_per_kilowatt_hour(value)
            .map_err(|e| quantity_err(pos, "ci_use_g_per_kwh", e))?,
        (Some(_), Some((_, pos))) => {
            return Err(DatasetError::BadValue {
                pos,
                key: "ci_use_g_per_kwh".to_string(),
                message: "set either ci_use or ci_use_g_per_kwh, not both".to_string(),
            });
        }
        (None, None) => {
            return Err(DatasetError::MissingKey {
                section: "scenario".to_string(),
                key: "ci_use".to_string(),
            });
        }
    };

    // packages
    let mut package_carbon: BTreeMap<String, (CarbonMass, Position)> = BTreeMap::new();
    let mut package_order: Vec<String> = Vec::new();
    for section in &package_sections {
        let Some(name) = section.name.clone() else {
            return Err(DatasetError::Syntax {
                pos: section.pos,
                message: "package section needs a name: [package <name>]".to_string(),
            });
        };
        section.check_keys(PACKAGE_KEYS)?;
        section.provenance_warning(&mut warnings);
        let (grams, pos) = section.number("packaging_gco2e")?;
        let carbon = CarbonMass::grams_co2e(grams)
            .map_err(|e| quantity_err(pos, "packaging_gco2e", e))?;
        if package_carbon.contains_key(&name) {
            return Err(DatasetError::DuplicateSection {
                pos: section.pos,
                name,
            });
        }
        package_order.push(name.clone());
        package_carbon.insert(name, (carbon, section.pos));
    }

    // chips, grouped into their packages in file order
    let mut chips_by_package: BTreeMap<String, Vec<ChipSpec>> = BTreeMap::new();
    let mut seen_chips: BTreeSet<String> = BTreeSet::new();
    for section in &chip_sections {
        let Some(name) = section.name.clone() else {
            return Err(DatasetError::Syntax {
                pos: section.pos,
                message: "chip section needs a name: [chip <name>]".to_string(),
            });
        };
        section.check_keys(CHIP_KEYS)?;
        section.provenance_warning(&mut warnings);
        if !seen_chips.insert(name.clone()) {
            return Err(DatasetError::DuplicateSection {
                pos: section.pos,
                name,
            });
        }

        let (package_name, package_pos) = section.text("package")?;
        if !package_carbon.contains_key(&package_name) {
            return Err(DatasetError::DanglingReference {
                pos: package_pos,
                kind: "package",
                name: package_name,
            });
        }

        let (kind_str, kind_pos) = section.text("kind")?;
        let kind = match kind_str.as_str() {
            "photonic" => ChipKind::Photonic,
            "electronic" => ChipKind::Electronic,
            other => {
                return Err(DatasetError::BadValue {
                    pos: kind_pos,
                    key: "kind".to_string(),
                    message: format!("expected 'photonic' or 'electronic', got '{other}'"),
                });
            }
        };

        let (area_v, area_pos) = section.number("area_cm2")?;
        let area =
            Area::square_centimeters(area_v).map_err(|e| quantity_err(area_pos, "area_cm2", e))?;

        let base = match section.opt_text("preset")? {
            Some((preset_name, preset_pos)) => Some(
                presets
                    .get(&preset_name)
                    .ok_or(DatasetError::DanglingReference {
                        pos: preset_pos,
                        kind: "preset",
                        name: preset_name,
                    })?
                    .profile
                    .clone(),
            ),
            None => None,
        };

        let coefficient = |key: &'static str,
                           make: fn(f64) -> Result<PerAreaCoefficient, QuantityError>,
                           from_base: Option<PerAreaCoefficient>|
         -> Result<PerAreaCoefficient, DatasetError> {
            match (section.opt_number(key)?, from_base) {
                (Some((v, pos)), _) => make(v).map_err(|e| quantity_err(pos, key, e)),
                (None, Some(b)) => Ok(b),
                (None, None) => Err(DatasetError::MissingKey {
                    section: section.label(),
                    key: key.to_string(),
                }),
            }
        };
        let epa = coefficient(
            "epa_kwh_per_cm2",
            PerAreaCoefficient::epa,
            base.as_ref().map(|b| b.epa),
        )?;
        let gpa = coefficient(
            "gpa_gco2e_per_cm2",
            PerAreaCoefficient::gpa,
            base.as_ref().map(|b| b.gpa),
        )?;
        let mpa = coefficient(
            "mpa_gco2e_per_cm2",
            PerAreaCoefficient::mpa,
            base.as_ref().map(|b| b.mpa),
        )?;
        let ci_fab = match (section.opt_number("ci_fab_g_per_kwh")?, base.as_ref()) {
            (Some((v, pos)), _) => CarbonIntensity::grams_per_kilowatt_hour(v)
                .map_err(|e| quantity_err(pos, "ci_fab_g_per_kwh", e))?,
            (None, Some(b)) => b.ci_fab,
            (None, None) => {
                return Err(DatasetError::MissingKey {
                    section: section.label(),
                    key: "ci_fab_g_per_kwh".to_string(),
                });
            }
        };
        // yield parameters: chip override > preset > kind default
        let default_fraction = match kind {
            ChipKind::Photonic => 0.2,
            ChipKind::Electronic => 1.0,
        };
        let d0 = section
            .opt_number("defect_density_per_cm2")?
            .map(|(v, p)| (v, Some(p)))
            .unwrap_or_else(|| {
                (
                    base.as_ref()
                        .map(|b| b.yield_params.defect_density_per_cm2())
                        .unwrap_or(0.1),
                    None,
                )
            });
        let fraction = section
            .opt_number("critical_area_fraction")?
            .map(|(v, p)| (v, Some(p)))
            .unwrap_or_else(|| {
                (
                    base.as_ref()
                        .map(|b| b.yield_params.critical_area_fraction())
                        .unwrap_or(default_fraction),
                    None,
                )
            });
        let yield_params = YieldParams::new(d0.0, fraction.0).map_err(|e| {
            let pos = match &e {
                YieldError::BadDefectDensity(_) => d0.1.unwrap_or(section.pos),
                _ => fraction.1.unwrap_or(section.pos),
            };
            yield_err(pos, "yield parameters", e)
        })?;

        let profile = FabProfile::new(
            base.map(|b| b.name).unwrap_or_else(|| format!("inline:{name}")),
            epa,
            gpa,
            mpa,
            ci_fab,
            yield_params,
        )?;

        chips_by_package
            .entry(package_name)
            .or_default()
            .push(ChipSpec {
                name,
                area,
                kind,
                profile,
            });
    }

    let mut system = Vec::new();
    for package_name in package_order {
        let (carbon, pos) = package_carbon[&package_name];
        let chips = chips_by_package.remove(&package_name).unwrap_or_default();
        if chips.is_empty() {
            return Err(DatasetError::BadValue {
                pos,
                key: "package".to_string(),
                message: format!("package '{package_name}' has no chips"),
            });
        }
        system.push(PackageSpec::new(package_name, chips, carbon)?);
    }

    let scenario = Scenario::new(
        scenario_name,
        system,
        workload,
        ci_use,
        TimeSpan::hours(lifetime_hours).expect("validated above"),
    )?;
    Ok((scenario, warnings))
}

/// Render a resolved scenario back to the document format.
///
/// Profiles are written as inline coefficients (preset references were
/// resolved at load time) and the operating carbon intensity as a numeric
/// `ci_use_g_per_kwh`, so the result reloads without any preset or
/// carbon-intensity table. Reloading reaches a fixed point after one pass:
/// serializing the reloaded scenario reproduces the same text.
pub fn scenario_to_conf_string(scenario: &Scenario) -> String {
    use std::fmt::Write as _;

    let mut out = String::new();
    let _ = writeln!(out, "[scenario]");
    let _ = writeln!(out, "name = {}", scenario.name);
    let _ = writeln!(out, "lifetime_years = {}", scenario.lifetime.hours_f64() / 8760.0);
    let _ = writeln!(out, "ci_use_g_per_kwh = {}", scenario.ci_use.g_per_kwh());
    out.push('\n');

    let _ = writeln!(out, "[workload]");
    let _ = writeln!(out, "name = {}", scenario.workload.name);
    let _ = writeln!(out, "inference_count = {}", scenario.workload.inference_count);
    let _ = writeln!(
        out,
        "throughput_inf_per_s = {}",
        scenario.workload.throughput_per_second
    );
    match scenario.workload.demand {
        EnergyDemand::AveragePower(p) => {
            let _ = writeln!(out, "power_draw_kw = {}", p.kw());
        }
        EnergyDemand::PerInference(e) => {
            let _ = writeln!(out, "energy_per_inference_kwh = {}", e.kwh());
        }
    }

    for package in &scenario.system {
        out.push('\n');
        let _ = writeln!(out, "[package {}]", package.name);
        let _ = writeln!(out, "packaging_gco2e = {}", package.packaging_carbon.grams());
        for chip in &package.chips {
            out.push('\n');
            let _ = writeln!(out, "[chip {}]", chip.name);
            let _ = writeln!(out, "package = {}", package.name);
            let _ = writeln!(out, "kind = {}", chip.kind.as_str());
            let _ = writeln!(out, "area_cm2 = {}", chip.area.cm2());
            let _ = writeln!(out, "epa_kwh_per_cm2 = {}", chip.profile.epa.value());
            let _ = writeln!(out, "gpa_gco2e_per_cm2 = {}", chip.profile.gpa.value());
            let _ = writeln!(out, "mpa_gco2e_per_cm2 = {}", chip.profile.mpa.value());
            let _ = writeln!(out, "ci_fab_g_per_kwh = {}", chip.profile.ci_fab.g_per_kwh());
            let _ = writeln!(
                out,
                "defect_density_per_cm2 = {}",
                chip.profile.yield_params.defect_density_per_cm2()
            );
            let _ = writeln!(
                out,
                "critical_area_fraction = {}",
                chip.profile.yield_params.critical_area_fraction()
            );
        }
    }
    out
}

// ---------------------------------------------------------------------------
// bundled data
// ---------------------------------------------------------------------------

/// The data files shipped with the library, embedded at compile time.
pub mod bundled {
    use super::{load_ci_table, load_presets, CarbonIntensityTable, PresetTable};
    use crate::flow::{parse_flow, parse_step_catalog, ProcessFlow, StepCatalog};

    pub const STEP_CATALOG: &str = include_str!("../data/steps.csv");
    pub const PHOTONIC_ACTIVE_FLOW: &str = include_str!("../data/photonic_active.flow");
    pub const PRESETS: &str = include_str!("../data/presets.conf");
    pub const CI_TABLE: &str = include_str!("../data/ci.conf");
    pub const ADEPT_SCENARIO: &str = include_str!("../data/adept.scenario");
    pub const SYSTOLIC_SCENARIO: &str = include_str!("../data/systolic.scenario");

    pub fn step_catalog() -> StepCatalog {
        parse_step_catalog(STEP_CATALOG).expect("bundled catalog is valid")
    }

    pub fn photonic_flow() -> ProcessFlow {
        parse_flow(PHOTONIC_ACTIVE_FLOW).expect("bundled flow is valid")
    }

    pub fn presets() -> PresetTable {
        load_presets(PRESETS).expect("bundled presets are valid").0
    }

    pub fn ci_table() -> CarbonIntensityTable {
        load_ci_table(CI_TABLE).expect("bundled CI table is valid").0
    }
}
