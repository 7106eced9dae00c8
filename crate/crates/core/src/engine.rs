//! The footprint model: operational carbon, embodied carbon with yield,
//! lifetime amortization, system composition, and scenario comparison.
//!
//! The total carbon attributed to a workload is
//!
//! ```text
//! total = operational + (runtime / lifetime) * embodied_total
//! ```
//!
//! where operational carbon is the energy drawn during the run times the
//! carbon intensity of the operating power source, and each chip's embodied
//! carbon is its effective area (area / yield) times the sum of its per-area
//! fab coefficients, `EPA * CI_fab + GPA + MPA`, plus one packaging charge
//! per package.
//!
//! ```
//! use fabcarbon::engine::operational_cf;
//! use fabcarbon::quantities::{CarbonIntensity, Energy};
//!
//! let e = Energy::kilowatt_hours(2.0).unwrap();
//! let ci = CarbonIntensity::grams_per_kilowatt_hour(500.0).unwrap();
//! assert_eq!(operational_cf(e, ci).grams(), 1000.0);
//! ```
//!
//! All operations are pure; evaluating many scenarios in parallel is safe.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::quantities::{
    Area, CarbonIntensity, CarbonMass, CoefficientKind, Energy, PerAreaCoefficient, Power,
    TimeSpan,
};
use crate::yield_model::{poisson_yield, YieldError, YieldParams};

/// Per-area coefficients, fab power source, and yield parameters for one
/// chip technology.
#[derive(Debug, Clone, PartialEq)]
pub struct FabProfile {
    pub name: String,
    pub epa: PerAreaCoefficient,
    pub gpa: PerAreaCoefficient,
    pub mpa: PerAreaCoefficient,
    pub ci_fab: CarbonIntensity,
    pub yield_params: YieldParams,
}

impl FabProfile {
    pub fn new(
        name: impl Into<String>,
        epa: PerAreaCoefficient,
        gpa: PerAreaCoefficient,
        mpa: PerAreaCoefficient,
        ci_fab: CarbonIntensity,
        yield_params: YieldParams,
    ) -> Result<Self, EngineError> {
        for (coeff, want) in [
            (epa, CoefficientKind::Epa),
            (gpa, CoefficientKind::Gpa),
            (mpa, CoefficientKind::Mpa),
        ] {
            if coeff.kind() != want {
                return Err(EngineError::WrongCoefficientKind {
                    expected: want,
                    found: coeff.kind(),
                });
            }
        }
        Ok(Self {
            name: name.into(),
            epa,
            gpa,
            mpa,
            ci_fab,
            yield_params,
        })
    }

    /// Total carbon per processed cm²: `EPA * CI_fab + GPA + MPA`.
    pub fn carbon_per_cm2(&self) -> f64 {
        self.epa.value() * self.ci_fab.g_per_kwh() + self.gpa.value() + self.mpa.value()
    }
}

/// Whether a chip is photonic (sparse critical area) or electronic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChipKind {
    Photonic,
    Electronic,
}

impl ChipKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ChipKind::Photonic => "photonic",
            ChipKind::Electronic => "electronic",
        }
    }
}

/// One die: its area, technology profile, and kind.
#[derive(Debug, Clone, PartialEq)]
pub struct ChipSpec {
    pub name: String,
    pub area: Area,
    pub kind: ChipKind,
    pub profile: FabProfile,
}

/// One package: a non-empty group of chips sharing a single packaging charge.
#[derive(Debug, Clone, PartialEq)]
pub struct PackageSpec {
    pub name: String,
    pub chips: Vec<ChipSpec>,
    pub packaging_carbon: CarbonMass,
}

impl PackageSpec {
    pub fn new(
        name: impl Into<String>,
        chips: Vec<ChipSpec>,
        packaging_carbon: CarbonMass,
    ) -> Result<Self, EngineError> {
        let name = name.into();
        if chips.is_empty() {
            return Err(EngineError::EmptyPackage { package: name });
        }
        Ok(Self {
            name,
            chips,
            packaging_carbon,
        })
    }
}

/// How a workload draws energy: an average system power over the run, or a
/// fixed energy cost per inference. Exactly one is specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnergyDemand {
    AveragePower(Power),
    PerInference(Energy),
}

/// An inference workload: how many inferences, how fast they run, and what
/// the run draws.
#[derive(Debug, Clone, PartialEq)]
pub struct Workload {
    pub name: String,
    pub inference_count: u64,
    pub throughput_per_second: f64,
    pub demand: EnergyDemand,
}

impl Workload {
    pub fn new(
        name: impl Into<String>,
        inference_count: u64,
        throughput_per_second: f64,
        demand: EnergyDemand,
    ) -> Result<Self, EngineError> {
        if !throughput_per_second.is_finite() || throughput_per_second <= 0.0 {
            return Err(EngineError::BadThroughput(throughput_per_second));
        }
        Ok(Self {
            name: name.into(),
            inference_count,
            throughput_per_second,
            demand,
        })
    }
}

/// A system under a workload: packages, operating carbon intensity, lifetime.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub system: Vec<PackageSpec>,
    pub workload: Workload,
    pub ci_use: CarbonIntensity,
    pub lifetime: TimeSpan,
}

impl Scenario {
    pub fn new(
        name: impl Into<String>,
        system: Vec<PackageSpec>,
        workload: Workload,
        ci_use: CarbonIntensity,
        lifetime: TimeSpan,
    ) -> Result<Self, EngineError> {
        if system.is_empty() {
            return Err(EngineError::EmptySystem);
        }
        if lifetime.hours_f64() <= 0.0 {
            return Err(EngineError::ZeroLifetime);
        }
        Ok(Self {
            name: name.into(),
            system,
            workload,
            ci_use,
            lifetime,
        })
    }

    pub fn chips(&self) -> impl Iterator<Item = &ChipSpec> {
        self.system.iter().flat_map(|p| p.chips.iter())
    }

    /// Total die area across all packages.
    pub fn total_chip_area_cm2(&self) -> f64 {
        self.chips().map(|c| c.area.cm2()).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("package '{package}' has no chips")]
    EmptyPackage { package: String },
    #[error("scenario has no packages")]
    EmptySystem,
    #[error("lifetime must be positive")]
    ZeroLifetime,
    #[error("throughput must be positive, got {0}")]
    BadThroughput(f64),
    #[error("expected a {expected} coefficient, found {found}")]
    WrongCoefficientKind {
        expected: CoefficientKind,
        found: CoefficientKind,
    },
    #[error("chip '{chip}': {source}")]
    InfeasibleYield { chip: String, source: YieldError },
    #[error("duplicate chip name '{0}' in system")]
    DuplicateChipName(String),
    #[error("duplicate package name '{0}' in system")]
    DuplicatePackageName(String),
}

/// Conditions worth surfacing that are not errors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EngineWarning {
    /// The workload runs longer than the system lifetime; amortization
    /// attributes more than one full embodied footprint.
    RuntimeExceedsLifetime,
    /// Compared workloads have different inference counts.
    WorkloadMismatch {
        count_a: u64,
        count_b: u64,
    },
}

impl std::fmt::Display for EngineWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EngineWarning::RuntimeExceedsLifetime => {
                write!(f, "runtime exceeds lifetime; amortized share is above 1")
            }
            EngineWarning::WorkloadMismatch { count_a, count_b } => write!(
                f,
                "workloads differ in inference count ({count_a} vs {count_b}); ratios compare unequal jobs"
            ),
        }
    }
}

/// Operational carbon: energy used during the run times the use-phase
/// carbon intensity.
pub fn operational_cf(energy: Energy, ci_use: CarbonIntensity) -> CarbonMass {
    energy * ci_use
}

/// Embodied carbon of one chip, packaging excluded:
/// `(area / yield) * (EPA * CI_fab + GPA + MPA)`.
pub fn chip_embodied(chip: &ChipSpec) -> Result<CarbonMass, EngineError> {
    Ok(chip_embodied_breakdown(chip)?.total)
}

/// Per-component split of one chip's embodied carbon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbodiedBreakdown {
    pub yield_fraction: f64,
    pub effective_area: Area,
    /// Fab-tool energy share: `eff_area * EPA * CI_fab`.
    pub fab_energy: CarbonMass,
    /// Direct process-gas share: `eff_area * GPA`.
    pub process_gas: CarbonMass,
    /// Raw-material share: `eff_area * MPA`.
    pub materials: CarbonMass,
    pub total: CarbonMass,
}

pub fn chip_embodied_breakdown(chip: &ChipSpec) -> Result<EmbodiedBreakdown, EngineError> {
    let y = poisson_yield(&chip.profile.yield_params, chip.area);
    if y <= 0.0 {
        return Err(EngineError::InfeasibleYield {
            chip: chip.name.clone(),
            source: YieldError::InfeasibleYield {
                die_cm2: chip.area.cm2(),
                d0: chip.profile.yield_params.defect_density_per_cm2(),
                exponent: -(chip.profile.yield_params.defect_density_per_cm2()
                    * chip.profile.yield_params.critical_area_fraction()
                    * chip.area.cm2()),
            },
        });
    }
    let eff = chip.area.cm2() / y;
    let grams = |v: f64| CarbonMass::grams_co2e(v).expect("non-negative by construction");
    Ok(EmbodiedBreakdown {
        yield_fraction: y,
        effective_area: Area::square_centimeters(eff).expect("positive"),
        fab_energy: grams(eff * chip.profile.epa.value() * chip.profile.ci_fab.g_per_kwh()),
        process_gas: grams(eff * chip.profile.gpa.value()),
        materials: grams(eff * chip.profile.mpa.value()),
        total: grams(eff * chip.profile.carbon_per_cm2()),
    })
}

/// Embodied totals for a whole system with per-chip and per-package maps.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemEmbodied {
    pub total: CarbonMass,
    pub per_chip: BTreeMap<String, CarbonMass>,
    pub per_chip_detail: BTreeMap<String, ChipDetail>,
    pub per_package_packaging: BTreeMap<String, CarbonMass>,
}

/// Everything reported about one chip inside a system.
#[derive(Debug, Clone, PartialEq)]
pub struct ChipDetail {
    pub kind: ChipKind,
    pub area: Area,
    pub breakdown: EmbodiedBreakdown,
}

/// Sum chip embodied carbon and one packaging charge per package.
pub fn system_embodied(system: &[PackageSpec]) -> Result<SystemEmbodied, EngineError> {
    let mut per_chip = BTreeMap::new();
    let mut per_chip_detail = BTreeMap::new();
    let mut per_package = BTreeMap::new();
    let mut total = CarbonMass::ZERO;

    for package in system {
        if per_package.contains_key(&package.name) {
            return Err(EngineError::DuplicatePackageName(package.name.clone()));
        }
        per_package.insert(package.name.clone(), package.packaging_carbon);
        total += package.packaging_carbon;
        for chip in &package.chips {
            if per_chip.contains_key(&chip.name) {
                return Err(EngineError::DuplicateChipName(chip.name.clone()));
            }
            let breakdown = chip_embodied_breakdown(chip)?;
            total += breakdown.total;
            per_chip.insert(chip.name.clone(), breakdown.total);
            per_chip_detail.insert(
                chip.name.clone(),
                ChipDetail {
                    kind: chip.kind,
                    area: chip.area,
                    breakdown,
                },
            );
        }
    }
    Ok(SystemEmbodied {
        total,
        per_chip,
        per_chip_detail,
        per_package_packaging: per_package,
    })
}

/// Wall-clock time of the workload: `inference_count / throughput`, in hours.
pub fn workload_runtime(workload: &Workload) -> TimeSpan {
    let seconds = workload.inference_count as f64 / workload.throughput_per_second;
    TimeSpan::hours(seconds / 3600.0).expect("non-negative")
}

/// Energy drawn by the workload: average power times runtime, or the
/// per-inference energy times the inference count.
pub fn workload_energy(workload: &Workload) -> Energy {
    match workload.demand {
        EnergyDemand::AveragePower(power) => power * workload_runtime(workload),
        EnergyDemand::PerInference(energy) => energy * workload.inference_count,
    }
}

/// Amortized total: `ocf + (runtime / lifetime) * ecf`.
///
/// Runtime is deliberately not clamped to the lifetime; a share above 1 is
/// flagged, not rejected.
pub fn amortized_cf(
    operational: CarbonMass,
    embodied: CarbonMass,
    runtime: TimeSpan,
    lifetime: TimeSpan,
) -> Result<(CarbonMass, Option<EngineWarning>), EngineError> {
    if lifetime.hours_f64() <= 0.0 {
        return Err(EngineError::ZeroLifetime);
    }
    let share = runtime.hours_f64() / lifetime.hours_f64();
    let warning = (share > 1.0).then_some(EngineWarning::RuntimeExceedsLifetime);
    Ok((operational + embodied * share, warning))
}

/// Full footprint of one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct FootprintReport {
    pub scenario_name: String,
    pub runtime: TimeSpan,
    pub energy: Energy,
    pub operational: CarbonMass,
    pub embodied_total: CarbonMass,
    pub embodied_amortized: CarbonMass,
    pub total: CarbonMass,
    pub per_chip_embodied: BTreeMap<String, CarbonMass>,
    pub per_chip_detail: BTreeMap<String, ChipDetail>,
    pub per_package_packaging: BTreeMap<String, CarbonMass>,
    pub warnings: Vec<EngineWarning>,
}

impl FootprintReport {
    /// Share of embodied_total contributed by photonic chips.
    pub fn photonic_embodied_share(&self) -> f64 {
        if self.embodied_total.grams() == 0.0 {
            return 0.0;
        }
        let photonic: f64 = self
            .per_chip_detail
            .values()
            .filter(|d| d.kind == ChipKind::Photonic)
            .map(|d| d.breakdown.total.grams())
            .sum();
        photonic / self.embodied_total.grams()
    }

    /// Share of total die area occupied by photonic chips.
    pub fn photonic_area_share(&self) -> f64 {
        let total: f64 = self.per_chip_detail.values().map(|d| d.area.cm2()).sum();
        if total == 0.0 {
            return 0.0;
        }
        let photonic: f64 = self
            .per_chip_detail
            .values()
            .filter(|d| d.kind == ChipKind::Photonic)
            .map(|d| d.area.cm2())
            .sum();
        photonic / total
    }
}

/// Evaluate a scenario end to end.
pub fn scenario_footprint(scenario: &Scenario) -> Result<FootprintReport, EngineError> {
    let runtime = workload_runtime(&scenario.workload);
    let energy = workload_energy(&scenario.workload);
    let operational = operational_cf(energy, scenario.ci_use);
    let embodied = system_embodied(&scenario.system)?;
    let share = runtime.hours_f64() / scenario.lifetime.hours_f64();
    let embodied_amortized = embodied.total * share;
    let (total, warning) = amortized_cf(operational, embodied.total, runtime, scenario.lifetime)?;
    Ok(FootprintReport {
        scenario_name: scenario.name.clone(),
        runtime,
        energy,
        operational,
        embodied_total: embodied.total,
        embodied_amortized,
        total,
        per_chip_embodied: embodied.per_chip,
        per_chip_detail: embodied.per_chip_detail,
        per_package_packaging: embodied.per_package_packaging,
        warnings: warning.into_iter().collect(),
    })
}

/// The four figures a comparison reports on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Metric {
    Operational,
    EmbodiedTotal,
    EmbodiedAmortized,
    Total,
}

impl Metric {
    pub const ALL: [Metric; 4] = [
        Metric::Operational,
        Metric::EmbodiedTotal,
        Metric::EmbodiedAmortized,
        Metric::Total,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Metric::Operational => "operational_gco2e",
            Metric::EmbodiedTotal => "embodied_total_gco2e",
            Metric::EmbodiedAmortized => "embodied_amortized_gco2e",
            Metric::Total => "total_gco2e",
        }
    }
}

/// Which side of a comparison emits less carbon on a metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LowerSide {
    A,
    B,
    Equal,
}

impl LowerSide {
    pub fn as_str(self) -> &'static str {
        match self {
            LowerSide::A => "a",
            LowerSide::B => "b",
            LowerSide::Equal => "equal",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricComparison {
    pub metric: Metric,
    pub a_grams: f64,
    pub b_grams: f64,
    /// `b / a`; exactly 1.0 when the values are equal (including both zero).
    pub ratio_b_over_a: f64,
    pub delta_b_minus_a: f64,
    pub lower: LowerSide,
}

/// Side-by-side comparison of two scenarios, metric by metric.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub name_a: String,
    pub name_b: String,
    pub metrics: Vec<MetricComparison>,
    pub report_a: FootprintReport,
    pub report_b: FootprintReport,
    pub warnings: Vec<EngineWarning>,
}

/// Compare scenario `b` against scenario `a`; ratios are `b / a`.
pub fn compare(a: &Scenario, b: &Scenario) -> Result<ComparisonReport, EngineError> {
    let report_a = scenario_footprint(a)?;
    let report_b = scenario_footprint(b)?;

    let mut warnings = Vec::new();
    if a.workload.inference_count != b.workload.inference_count {
        warnings.push(EngineWarning::WorkloadMismatch {
            count_a: a.workload.inference_count,
            count_b: b.workload.inference_count,
        });
    }

    let value = |r: &FootprintReport, m: Metric| match m {
        Metric::Operational => r.operational.grams(),
        Metric::EmbodiedTotal => r.embodied_total.grams(),
        Metric::EmbodiedAmortized => r.embodied_amortized.grams(),
        Metric::Total => r.total.grams(),
    };

    let metrics = Metric::ALL
        .iter()
        .map(|&metric| {
            let va = value(&report_a, metric);
            let vb = value(&report_b, metric);
            let ratio = if va == vb { 1.0 } else { vb / va };
            let lower = if va == vb {
                LowerSide::Equal
            } else if va < vb {
                LowerSide::A
            } else {
                LowerSide::B
            };
            MetricComparison {
                metric,
                a_grams: va,
                b_grams: vb,
                ratio_b_over_a: ratio,
                delta_b_minus_a: vb - va,
                lower,
            }
        })
        .collect();

    Ok(ComparisonReport {
        name_a: a.name.clone(),
        name_b: b.name.clone(),
        metrics,
        report_a,
        report_b,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(epa: f64, gpa: f64, mpa: f64, ci_fab: f64, d0: f64, f: f64) -> FabProfile {
        FabProfile::new(
            "test",
            PerAreaCoefficient::epa(epa).unwrap(),
            PerAreaCoefficient::gpa(gpa).unwrap(),
            PerAreaCoefficient::mpa(mpa).unwrap(),
            CarbonIntensity::grams_per_kilowatt_hour(ci_fab).unwrap(),
            YieldParams::new(d0, f).unwrap(),
        )
        .unwrap()
    }

    fn chip(name: &str, area: f64, kind: ChipKind, p: FabProfile) -> ChipSpec {
        ChipSpec {
            name: name.to_string(),
            area: Area::square_centimeters(area).unwrap(),
            kind,
            profile: p,
        }
    }

    #[test]
    fn operational_cases() {
        let g = |e: f64, ci: f64| {
            operational_cf(
                Energy::kilowatt_hours(e).unwrap(),
                CarbonIntensity::grams_per_kilowatt_hour(ci).unwrap(),
            )
            .grams()
        };
        assert_eq!(g(2.0, 500.0), 1000.0);
        assert_eq!(g(0.0, 123.0), 0.0);
        assert_eq!(g(13.89, 50.0), 694.5);
    }

    #[test]
    fn chip_embodied_round_numbers() {
        // yield 1 (d0=0), EPA*CI = 100 g/cm^2, GPA = 50, MPA = 50, area 1 cm^2
        let c = chip("c", 1.0, ChipKind::Electronic, profile(1.0, 50.0, 50.0, 100.0, 0.0, 1.0));
        assert_eq!(chip_embodied(&c).unwrap().grams(), 200.0);
    }

    #[test]
    fn chip_embodied_zero_everything() {
        let c = chip("c", 2.5, ChipKind::Electronic, profile(0.0, 0.0, 0.0, 0.0, 0.0, 1.0));
        assert_eq!(chip_embodied(&c).unwrap().grams(), 0.0);
    }

    #[test]
    fn photonic_critical_fraction_beats_electronic() {
        let ph = chip("ph", 2.0, ChipKind::Photonic, profile(1.0, 50.0, 50.0, 100.0, 0.1, 0.2));
        let el = chip("el", 2.0, ChipKind::Electronic, profile(1.0, 50.0, 50.0, 100.0, 0.1, 1.0));
        assert!(chip_embodied(&ph).unwrap().grams() < chip_embodied(&el).unwrap().grams());
    }

    #[test]
    fn infeasible_yield_is_an_explicit_error() {
        let c = chip("huge", 1e7, ChipKind::Electronic, profile(1.0, 0.0, 0.0, 100.0, 1.0, 1.0));
        assert!(matches!(
            chip_embodied(&c).unwrap_err(),
            EngineError::InfeasibleYield { .. }
        ));
    }

    #[test]
    fn system_embodied_sums_chips_and_packaging() {
        let c = chip("c", 1.0, ChipKind::Electronic, profile(1.0, 50.0, 50.0, 100.0, 0.0, 1.0));
        let pkg = PackageSpec::new("p", vec![c], CarbonMass::grams_co2e(150.0).unwrap()).unwrap();
        let s = system_embodied(&[pkg]).unwrap();
        assert_eq!(s.total.grams(), 350.0);
        assert_eq!(s.per_chip["c"].grams(), 200.0);
        assert_eq!(s.per_package_packaging["p"].grams(), 150.0);
    }

    #[test]
    fn separate_packages_cost_one_extra_packaging() {
        let p = profile(1.0, 50.0, 50.0, 100.0, 0.0, 1.0);
        let pack = |n: &str, chips: Vec<ChipSpec>| {
            PackageSpec::new(n, chips, CarbonMass::grams_co2e(111.0).unwrap()).unwrap()
        };
        let merged = system_embodied(&[pack(
            "both",
            vec![
                chip("a", 1.0, ChipKind::Electronic, p.clone()),
                chip("b", 1.0, ChipKind::Electronic, p.clone()),
            ],
        )])
        .unwrap();
        let split = system_embodied(&[
            pack("pa", vec![chip("a", 1.0, ChipKind::Electronic, p.clone())]),
            pack("pb", vec![chip("b", 1.0, ChipKind::Electronic, p)]),
        ])
        .unwrap();
        assert_eq!(split.total.grams() - merged.total.grams(), 111.0);
    }

    #[test]
    fn empty_package_rejected() {
        let err =
            PackageSpec::new("p", vec![], CarbonMass::ZERO).unwrap_err();
        assert!(matches!(err, EngineError::EmptyPackage { .. }));
    }

    #[test]
    fn runtime_and_energy_cases() {
        let w = |count, tput, kw| {
            Workload::new(
                "w",
                count,
                tput,
                EnergyDemand::AveragePower(Power::kilowatts(kw).unwrap()),
            )
            .unwrap()
        };
        // 1e6 inferences at 1000/s -> 1000 s
        let runtime = workload_runtime(&w(1_000_000, 1000.0, 0.0));
        assert!((runtime.hours_f64() - 0.2777777777777778).abs() < 1e-15);
        // zero inferences -> zero hours
        assert_eq!(workload_runtime(&w(0, 10.0, 0.0)).hours_f64(), 0.0);
        // 3600 inferences at 1/s -> exactly one hour
        assert_eq!(workload_runtime(&w(3600, 1.0, 0.0)).hours_f64(), 1.0);
        // 2 kW for half an hour -> 1 kWh
        assert_eq!(workload_energy(&w(1800, 1.0, 2.0)).kwh(), 1.0);
        // zero power -> zero energy
        assert_eq!(workload_energy(&w(123, 1.0, 0.0)).kwh(), 0.0);
        // 0.15 kW, 1e6 inferences at 36000/s (27.78 s)
        let e = workload_energy(&w(1_000_000, 36000.0, 0.15));
        assert!((e.kwh() - 0.0011574074074074073).abs() < 1e-18);
        // same power at 10000/s (100 s)
        let e = workload_energy(&w(1_000_000, 10000.0, 0.15));
        assert!((e.kwh() - 0.004166666666666667).abs() < 1e-18);
    }

    #[test]
    fn per_inference_energy_ignores_power() {
        let w = Workload::new(
            "w",
            1000,
            100.0,
            EnergyDemand::PerInference(Energy::kilowatt_hours(0.002).unwrap()),
        )
        .unwrap();
        assert_eq!(workload_energy(&w).kwh(), 2.0);
    }

    #[test]
    fn amortization_cases() {
        let g = |v: f64| CarbonMass::grams_co2e(v).unwrap();
        let h = |v: f64| TimeSpan::hours(v).unwrap();
        // runtime == lifetime: full attribution
        let (total, warn) = amortized_cf(g(10.0), g(100.0), h(5.0), h(5.0)).unwrap();
        assert_eq!(total.grams(), 110.0);
        assert!(warn.is_none());
        // runtime == 0: operational only
        let (total, _) = amortized_cf(g(10.0), g(100.0), h(0.0), h(5.0)).unwrap();
        assert_eq!(total.grams(), 10.0);
        // runtime == lifetime / 2
        let (total, _) = amortized_cf(g(10.0), g(100.0), h(2.5), h(5.0)).unwrap();
        assert_eq!(total.grams(), 60.0);
        // runtime beyond lifetime is allowed but flagged
        let (total, warn) = amortized_cf(g(0.0), g(100.0), h(10.0), h(5.0)).unwrap();
        assert_eq!(total.grams(), 200.0);
        assert_eq!(warn, Some(EngineWarning::RuntimeExceedsLifetime));
    }

    fn round_scenario(name: &str, power_kw: f64, ci_use: f64) -> Scenario {
        let c = chip(
            "only",
            2.0,
            ChipKind::Electronic,
            profile(1.0, 150.0, 250.0, 400.0, 0.1, 0.5),
        );
        let pkg = PackageSpec::new("pkg", vec![c], CarbonMass::grams_co2e(100.0).unwrap()).unwrap();
        Scenario::new(
            name,
            vec![pkg],
            Workload::new(
                "w",
                3_600_000,
                1000.0,
                EnergyDemand::AveragePower(Power::kilowatts(power_kw).unwrap()),
            )
            .unwrap(),
            CarbonIntensity::grams_per_kilowatt_hour(ci_use).unwrap(),
            TimeSpan::hours(1000.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn scenario_footprint_matches_hand_oracle() {
        // yield = e^-0.1; chip = 2/yield * (400 + 150 + 250); package 100;
        // runtime 1 h; energy 2 kWh; ocf 100 g; amortized = emb/1000
        let report = scenario_footprint(&round_scenario("s", 2.0, 50.0)).unwrap();
        assert!((report.runtime.hours_f64() - 1.0).abs() < 1e-15);
        assert!((report.energy.kwh() - 2.0).abs() < 1e-15);
        assert!((report.operational.grams() - 100.0).abs() / 100.0 < 1e-12);
        let expected_emb = 1868.2734689210363;
        assert!((report.embodied_total.grams() - expected_emb).abs() / expected_emb < 1e-12);
        let expected_total = 101.86827346892103;
        assert!((report.total.grams() - expected_total).abs() / expected_total < 1e-12);
        assert!(report.warnings.is_empty());
    }

    #[test]
    fn all_zero_coefficients_give_all_zero_report() {
        let c = chip("z", 1.0, ChipKind::Electronic, profile(0.0, 0.0, 0.0, 0.0, 0.0, 1.0));
        let pkg = PackageSpec::new("p", vec![c], CarbonMass::ZERO).unwrap();
        let s = Scenario::new(
            "zero",
            vec![pkg],
            Workload::new("w", 100, 10.0, EnergyDemand::AveragePower(Power::kilowatts(0.0).unwrap()))
                .unwrap(),
            CarbonIntensity::grams_per_kilowatt_hour(0.0).unwrap(),
            TimeSpan::hours(100.0).unwrap(),
        )
        .unwrap();
        let r = scenario_footprint(&s).unwrap();
        assert_eq!(r.operational.grams(), 0.0);
        assert_eq!(r.embodied_total.grams(), 0.0);
        assert_eq!(r.total.grams(), 0.0);
    }

    #[test]
    fn compare_with_self_is_identity() {
        let s = round_scenario("same", 2.0, 50.0);
        let cmp = compare(&s, &s).unwrap();
        for m in &cmp.metrics {
            assert_eq!(m.ratio_b_over_a, 1.0);
            assert_eq!(m.delta_b_minus_a, 0.0);
            assert_eq!(m.lower, LowerSide::Equal);
        }
        assert!(cmp.warnings.is_empty());
    }

    #[test]
    fn compare_identifies_lower_side() {
        let a = round_scenario("small", 1.0, 50.0);
        let b = round_scenario("big", 3.0, 50.0);
        let cmp = compare(&a, &b).unwrap();
        let op = cmp
            .metrics
            .iter()
            .find(|m| m.metric == Metric::Operational)
            .unwrap();
        assert_eq!(op.lower, LowerSide::A);
        assert!((op.ratio_b_over_a - 3.0).abs() < 1e-12);
    }

    #[test]
    fn compare_warns_on_workload_mismatch() {
        let a = round_scenario("a", 1.0, 50.0);
        let mut b = round_scenario("b", 1.0, 50.0);
        b.workload.inference_count = 7;
        let cmp = compare(&a, &b).unwrap();
        assert!(matches!(
            cmp.warnings.as_slice(),
            [EngineWarning::WorkloadMismatch { .. }]
        ));
    }

    #[test]
    fn duplicate_chip_names_rejected() {
        let p = profile(1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
        let pkg = PackageSpec::new(
            "p",
            vec![
                chip("dup", 1.0, ChipKind::Electronic, p.clone()),
                chip("dup", 1.0, ChipKind::Electronic, p),
            ],
            CarbonMass::ZERO,
        )
        .unwrap();
        assert!(matches!(
            system_embodied(&[pkg]).unwrap_err(),
            EngineError::DuplicateChipName(_)
        ));
    }
}
