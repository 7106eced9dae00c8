//! Unit-carrying scalar types used throughout the model.
//!
//! Every physical input is wrapped in a newtype with a fixed canonical unit:
//! energy in kilowatt-hours, area in square centimeters, carbon mass in grams
//! of CO₂-equivalent, carbon intensity in grams per kilowatt-hour, time in
//! hours, and power in kilowatts. Constructors validate sign and finiteness,
//! and cross-dimension arithmetic simply does not compile:
//!
//! ```
//! use fabcarbon::quantities::{CarbonIntensity, Energy};
//!
//! let energy = Energy::kilowatt_hours(2.0).unwrap();
//! let grid = CarbonIntensity::grams_per_kilowatt_hour(500.0).unwrap();
//! let emitted = energy * grid;
//! assert_eq!(emitted.grams(), 1000.0);
//! ```
//!
//! Values are immutable after construction and `Copy`, so they can be shared
//! freely across threads.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul};

use thiserror::Error;

/// Physical dimension of a [`Unit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dimension {
    Energy,
    Area,
    CarbonMass,
    CarbonIntensity,
    Time,
    Power,
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Dimension::Energy => "energy",
            Dimension::Area => "area",
            Dimension::CarbonMass => "carbon mass",
            Dimension::CarbonIntensity => "carbon intensity",
            Dimension::Time => "time",
            Dimension::Power => "power",
        };
        f.write_str(name)
    }
}

/// Units accepted by [`convert`] and the `from_value`/`value_in` accessors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Unit {
    KilowattHour,
    WattHour,
    Joule,
    Megajoule,
    SquareCentimeter,
    SquareMillimeter,
    SquareMeter,
    Gram,
    Kilogram,
    Tonne,
    GramPerKilowattHour,
    KilogramPerKilowattHour,
    Hour,
    Second,
    Minute,
    Day,
    Year,
    Kilowatt,
    Watt,
    Megawatt,
}

impl Unit {
    pub fn dimension(self) -> Dimension {
        use Unit::*;
        match self {
            KilowattHour | WattHour | Joule | Megajoule => Dimension::Energy,
            SquareCentimeter | SquareMillimeter | SquareMeter => Dimension::Area,
            Gram | Kilogram | Tonne => Dimension::CarbonMass,
            GramPerKilowattHour | KilogramPerKilowattHour => Dimension::CarbonIntensity,
            Hour | Second | Minute | Day | Year => Dimension::Time,
            Kilowatt | Watt | Megawatt => Dimension::Power,
        }
    }

    /// Exact rational scale to the canonical unit of the dimension,
    /// as (numerator, denominator). Both are integers representable in f64,
    /// so conversion needs a single rounding division.
    fn canonical_ratio(self) -> (f64, f64) {
        use Unit::*;
        match self {
            KilowattHour => (1.0, 1.0),
            WattHour => (1.0, 1000.0),
            Joule => (1.0, 3_600_000.0),
            Megajoule => (1.0, 3.6),
            SquareCentimeter => (1.0, 1.0),
            SquareMillimeter => (1.0, 100.0),
            SquareMeter => (10_000.0, 1.0),
            Gram => (1.0, 1.0),
            Kilogram => (1000.0, 1.0),
            Tonne => (1_000_000.0, 1.0),
            GramPerKilowattHour => (1.0, 1.0),
            KilogramPerKilowattHour => (1000.0, 1.0),
            Hour => (1.0, 1.0),
            Second => (1.0, 3600.0),
            Minute => (1.0, 60.0),
            Day => (24.0, 1.0),
            Year => (8760.0, 1.0),
            Kilowatt => (1.0, 1.0),
            Watt => (1.0, 1000.0),
            Megawatt => (1000.0, 1.0),
        }
    }

    pub fn symbol(self) -> &'static str {
        use Unit::*;
        match self {
            KilowattHour => "kWh",
            WattHour => "Wh",
            Joule => "J",
            Megajoule => "MJ",
            SquareCentimeter => "cm^2",
            SquareMillimeter => "mm^2",
            SquareMeter => "m^2",
            Gram => "g",
            Kilogram => "kg",
            Tonne => "t",
            GramPerKilowattHour => "g/kWh",
            KilogramPerKilowattHour => "kg/kWh",
            Hour => "h",
            Second => "s",
            Minute => "min",
            Day => "d",
            Year => "yr",
            Kilowatt => "kW",
            Watt => "W",
            Megawatt => "MW",
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Validation and conversion failures for quantity values.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantityError {
    #[error("{quantity} must be finite, got {value}")]
    NotFinite { quantity: &'static str, value: f64 },
    #[error("{quantity} must be non-negative, got {value}")]
    Negative { quantity: &'static str, value: f64 },
    #[error("{quantity} must be positive, got {value}")]
    NotPositive { quantity: &'static str, value: f64 },
    #[error("cannot convert {from} ({from_dimension}) to {to} ({to_dimension}): dimensions differ")]
    DimensionMismatch {
        from: Unit,
        from_dimension: Dimension,
        to: Unit,
        to_dimension: Dimension,
    },
    #[error("unit {unit} is {unit_dimension}, expected {expected}")]
    WrongDimension {
        unit: Unit,
        unit_dimension: Dimension,
        expected: Dimension,
    },
    #[error("cannot combine per-area coefficients of kind {left} and {right}")]
    KindMismatch {
        left: CoefficientKind,
        right: CoefficientKind,
    },
}

/// Convert a raw value between two units of the same dimension.
///
/// The scale is applied as an exact integer-ratio product with a single
/// rounding division, so round trips agree to well within 1e-12 relative.
pub fn convert(value: f64, from: Unit, to: Unit) -> Result<f64, QuantityError> {
    if from.dimension() != to.dimension() {
        return Err(QuantityError::DimensionMismatch {
            from,
            from_dimension: from.dimension(),
            to,
            to_dimension: to.dimension(),
        });
    }
    let (fn_, fd) = from.canonical_ratio();
    let (tn, td) = to.canonical_ratio();
    Ok(value * (fn_ * td) / (fd * tn))
}

fn check_finite(quantity: &'static str, value: f64) -> Result<f64, QuantityError> {
    if !value.is_finite() {
        return Err(QuantityError::NotFinite { quantity, value });
    }
    Ok(value)
}

fn check_non_negative(quantity: &'static str, value: f64) -> Result<f64, QuantityError> {
    check_finite(quantity, value)?;
    if value < 0.0 {
        return Err(QuantityError::Negative { quantity, value });
    }
    Ok(value)
}

fn check_positive(quantity: &'static str, value: f64) -> Result<f64, QuantityError> {
    check_finite(quantity, value)?;
    if value <= 0.0 {
        return Err(QuantityError::NotPositive { quantity, value });
    }
    Ok(value)
}

macro_rules! quantity_type {
    (
        $(#[$meta:meta])*
        $name:ident, $label:literal, $canonical:ident, $ctor:ident, $getter:ident,
        $check:ident, $expected_dim:ident
    ) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
        pub struct $name(f64);

        impl $name {
            pub fn $ctor(value: f64) -> Result<Self, QuantityError> {
                Ok(Self($check($label, value)?))
            }

            /// Construct from a value expressed in any unit of the right dimension.
            pub fn from_value(value: f64, unit: Unit) -> Result<Self, QuantityError> {
                if unit.dimension() != Dimension::$expected_dim {
                    return Err(QuantityError::WrongDimension {
                        unit,
                        unit_dimension: unit.dimension(),
                        expected: Dimension::$expected_dim,
                    });
                }
                Self::$ctor(convert(value, unit, Unit::$canonical)?)
            }

            /// The value in the canonical unit.
            pub fn $getter(self) -> f64 {
                self.0
            }

            /// The value expressed in `unit`.
            pub fn value_in(self, unit: Unit) -> Result<f64, QuantityError> {
                convert(self.0, Unit::$canonical, unit)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{} {}", self.0, Unit::$canonical.symbol())
            }
        }
    };
}

quantity_type!(
    /// Energy, canonically in kilowatt-hours. Non-negative.
    Energy, "energy", KilowattHour, kilowatt_hours, kilowatt_hours_value,
    check_non_negative, Energy
);

impl Energy {
    pub const ZERO: Energy = Energy(0.0);

    /// Canonical value accessor, named for readability at call sites.
    pub fn kwh(self) -> f64 {
        self.0
    }
}

quantity_type!(
    /// Chip or wafer area, canonically in square centimeters. Strictly positive.
    Area, "area", SquareCentimeter, square_centimeters, square_centimeters_value,
    check_positive, Area
);

impl Area {
    pub fn cm2(self) -> f64 {
        self.0
    }
}

quantity_type!(
    /// Mass of emitted CO₂-equivalent, canonically in grams. Non-negative.
    CarbonMass, "carbon mass", Gram, grams_co2e, grams_value,
    check_non_negative, CarbonMass
);

impl CarbonMass {
    pub const ZERO: CarbonMass = CarbonMass(0.0);

    pub fn grams(self) -> f64 {
        self.0
    }
}

quantity_type!(
    /// Carbon intensity of a power source, canonically in gCO₂e per kWh. Non-negative.
    CarbonIntensity, "carbon intensity", GramPerKilowattHour, grams_per_kilowatt_hour,
    grams_per_kilowatt_hour_value, check_non_negative, CarbonIntensity
);

impl CarbonIntensity {
    pub fn g_per_kwh(self) -> f64 {
        self.0
    }
}

quantity_type!(
    /// A duration, canonically in hours. Non-negative.
    TimeSpan, "time span", Hour, hours, hours_value,
    check_non_negative, Time
);

impl TimeSpan {
    pub const ZERO: TimeSpan = TimeSpan(0.0);

    pub fn hours_f64(self) -> f64 {
        self.0
    }
}

quantity_type!(
    /// Electrical power draw, canonically in kilowatts. Non-negative.
    Power, "power", Kilowatt, kilowatts, kilowatts_value,
    check_non_negative, Power
);

impl Power {
    pub fn kw(self) -> f64 {
        self.0
    }
}

impl Add for Energy {
    type Output = Energy;
    fn add(self, rhs: Energy) -> Energy {
        Energy(self.0 + rhs.0)
    }
}

impl AddAssign for Energy {
    fn add_assign(&mut self, rhs: Energy) {
        self.0 += rhs.0;
    }
}

impl Sum for Energy {
    fn sum<I: Iterator<Item = Energy>>(iter: I) -> Energy {
        iter.fold(Energy::ZERO, Add::add)
    }
}

impl Add for CarbonMass {
    type Output = CarbonMass;
    fn add(self, rhs: CarbonMass) -> CarbonMass {
        CarbonMass(self.0 + rhs.0)
    }
}

impl AddAssign for CarbonMass {
    fn add_assign(&mut self, rhs: CarbonMass) {
        self.0 += rhs.0;
    }
}

impl Sum for CarbonMass {
    fn sum<I: Iterator<Item = CarbonMass>>(iter: I) -> CarbonMass {
        iter.fold(CarbonMass::ZERO, Add::add)
    }
}

impl Mul<CarbonIntensity> for Energy {
    type Output = CarbonMass;
    fn mul(self, rhs: CarbonIntensity) -> CarbonMass {
        CarbonMass(self.0 * rhs.0)
    }
}

impl Mul<Energy> for CarbonIntensity {
    type Output = CarbonMass;
    fn mul(self, rhs: Energy) -> CarbonMass {
        rhs * self
    }
}

impl Mul<TimeSpan> for Power {
    type Output = Energy;
    fn mul(self, rhs: TimeSpan) -> Energy {
        Energy(self.0 * rhs.0)
    }
}

impl Mul<Power> for TimeSpan {
    type Output = Energy;
    fn mul(self, rhs: Power) -> Energy {
        rhs * self
    }
}

impl Mul<f64> for CarbonMass {
    /// Scale by a non-negative finite factor (amortization fractions, counts).
    type Output = CarbonMass;
    fn mul(self, rhs: f64) -> CarbonMass {
        debug_assert!(rhs.is_finite() && rhs >= 0.0);
        CarbonMass(self.0 * rhs)
    }
}

impl Mul<u64> for Energy {
    type Output = Energy;
    fn mul(self, rhs: u64) -> Energy {
        Energy(self.0 * rhs as f64)
    }
}

/// What a per-area fab coefficient measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CoefficientKind {
    /// Manufacturing-tool energy per unit area, kWh/cm².
    Epa,
    /// Direct process-gas emission per unit area, gCO₂e/cm².
    Gpa,
    /// Raw-material procurement footprint per unit area, gCO₂e/cm².
    Mpa,
}

impl CoefficientKind {
    pub fn unit_symbol(self) -> &'static str {
        match self {
            CoefficientKind::Epa => "kWh/cm^2",
            CoefficientKind::Gpa | CoefficientKind::Mpa => "g/cm^2",
        }
    }
}

impl fmt::Display for CoefficientKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            CoefficientKind::Epa => "EPA",
            CoefficientKind::Gpa => "GPA",
            CoefficientKind::Mpa => "MPA",
        };
        f.write_str(name)
    }
}

/// A per-area fab coefficient tagged with its kind. Kinds are fixed at
/// construction and arithmetic is only permitted between equal kinds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerAreaCoefficient {
    kind: CoefficientKind,
    value: f64,
}

impl PerAreaCoefficient {
    pub fn new(kind: CoefficientKind, value: f64) -> Result<Self, QuantityError> {
        let label = match kind {
            CoefficientKind::Epa => "EPA coefficient",
            CoefficientKind::Gpa => "GPA coefficient",
            CoefficientKind::Mpa => "MPA coefficient",
        };
        Ok(Self {
            kind,
            value: check_non_negative(label, value)?,
        })
    }

    pub fn epa(kwh_per_cm2: f64) -> Result<Self, QuantityError> {
        Self::new(CoefficientKind::Epa, kwh_per_cm2)
    }

    pub fn gpa(g_per_cm2: f64) -> Result<Self, QuantityError> {
        Self::new(CoefficientKind::Gpa, g_per_cm2)
    }

    pub fn mpa(g_per_cm2: f64) -> Result<Self, QuantityError> {
        Self::new(CoefficientKind::Mpa, g_per_cm2)
    }

    pub fn kind(self) -> CoefficientKind {
        self.kind
    }

    /// Value in the canonical unit of the kind (kWh/cm² for EPA, g/cm² otherwise).
    pub fn value(self) -> f64 {
        self.value
    }

    /// Sum with another coefficient of the same kind.
    pub fn try_add(self, rhs: PerAreaCoefficient) -> Result<PerAreaCoefficient, QuantityError> {
        if self.kind != rhs.kind {
            return Err(QuantityError::KindMismatch {
                left: self.kind,
                right: rhs.kind,
            });
        }
        Ok(PerAreaCoefficient {
            kind: self.kind,
            value: self.value + rhs.value,
        })
    }
}

impl fmt::Display for PerAreaCoefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.value, self.kind.unit_symbol())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kwh_to_joules_is_exact() {
        assert_eq!(convert(1.0, Unit::KilowattHour, Unit::Joule).unwrap(), 3.6e6);
    }

    #[test]
    fn cm2_to_mm2_is_exact() {
        assert_eq!(
            convert(1.0, Unit::SquareCentimeter, Unit::SquareMillimeter).unwrap(),
            100.0
        );
    }

    #[test]
    fn kg_to_grams_is_exact() {
        // 2.75 kg CO2e -> 2750 g CO2e
        assert_eq!(convert(2.75, Unit::Kilogram, Unit::Gram).unwrap(), 2750.0);
    }

    #[test]
    fn five_years_is_43800_hours() {
        assert_eq!(convert(5.0, Unit::Year, Unit::Hour).unwrap(), 43800.0);
    }

    #[test]
    fn round_trips_are_tight() {
        let units = [
            (Unit::KilowattHour, Unit::Joule),
            (Unit::KilowattHour, Unit::Megajoule),
            (Unit::SquareCentimeter, Unit::SquareMeter),
            (Unit::Gram, Unit::Tonne),
            (Unit::Hour, Unit::Second),
            (Unit::Kilowatt, Unit::Watt),
            (Unit::GramPerKilowattHour, Unit::KilogramPerKilowattHour),
        ];
        for (a, b) in units {
            for v in [1.0, 0.37, 1234.5678, 9.9e-7, 3.7e9] {
                let there = convert(v, a, b).unwrap();
                let back = convert(there, b, a).unwrap();
                assert!(
                    (back - v).abs() <= 1e-12 * v.abs(),
                    "{a} -> {b} round trip drifted: {v} -> {back}"
                );
            }
        }
    }

    #[test]
    fn incompatible_dimensions_name_both_units() {
        let err = convert(1.0, Unit::KilowattHour, Unit::SquareCentimeter).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("kWh"), "message should name source unit: {msg}");
        assert!(msg.contains("cm^2"), "message should name target unit: {msg}");
    }

    #[test]
    fn negative_values_rejected() {
        assert!(Energy::kilowatt_hours(-1.0).is_err());
        assert!(CarbonMass::grams_co2e(-0.001).is_err());
        assert!(CarbonIntensity::grams_per_kilowatt_hour(-5.0).is_err());
        assert!(TimeSpan::hours(-2.0).is_err());
        assert!(Power::kilowatts(-0.1).is_err());
    }

    #[test]
    fn area_must_be_strictly_positive() {
        assert!(Area::square_centimeters(0.0).is_err());
        assert!(Area::square_centimeters(-1.0).is_err());
        assert!(Area::square_centimeters(1.0).is_ok());
    }

    #[test]
    fn non_finite_rejected() {
        assert!(Energy::kilowatt_hours(f64::NAN).is_err());
        assert!(Energy::kilowatt_hours(f64::INFINITY).is_err());
        assert!(Area::square_centimeters(f64::NAN).is_err());
    }

    #[test]
    fn energy_times_intensity_is_carbon() {
        let e = Energy::kilowatt_hours(2.0).unwrap();
        let ci = CarbonIntensity::grams_per_kilowatt_hour(500.0).unwrap();
        assert_eq!((e * ci).grams(), 1000.0);
        assert_eq!((ci * e).grams(), 1000.0);
    }

    #[test]
    fn power_times_time_is_energy() {
        let p = Power::kilowatts(2.0).unwrap();
        let t = TimeSpan::hours(0.5).unwrap();
        assert_eq!((p * t).kwh(), 1.0);
    }

    #[test]
    fn coefficient_kinds_do_not_mix() {
        let gpa = PerAreaCoefficient::gpa(50.0).unwrap();
        let mpa = PerAreaCoefficient::mpa(50.0).unwrap();
        let err = gpa.try_add(mpa).unwrap_err();
        assert!(matches!(err, QuantityError::KindMismatch { .. }));
        let sum = gpa.try_add(PerAreaCoefficient::gpa(25.0).unwrap()).unwrap();
        assert_eq!(sum.value(), 75.0);
        assert_eq!(sum.kind(), CoefficientKind::Gpa);
    }

    #[test]
    fn from_value_checks_dimension() {
        let err = Energy::from_value(1.0, Unit::Gram).unwrap_err();
        assert!(matches!(err, QuantityError::WrongDimension { .. }));
        let e = Energy::from_value(3.6e6, Unit::Joule).unwrap();
        assert!((e.kwh() - 1.0).abs() < 1e-12);
    }
}
