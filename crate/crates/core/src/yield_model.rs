//! Poisson yield with a critical-area fraction, effective area, and a
//! dies-per-wafer estimate.
//!
//! Yield is `exp(-d0 * f * A)` where `d0` is the defect density, `A` the die
//! area, and `f` the fraction of the die where a defect is fatal. Sparse
//! layouts (wide waveguide spacing, isolated couplers) have `f` well below 1,
//! so the same defect density costs them far less yield than a densely packed
//! logic die of equal size.
//!
//! ```
//! use fabcarbon::quantities::Area;
//! use fabcarbon::yield_model::{poisson_yield, YieldParams};
//!
//! let dense = YieldParams::new(0.1, 1.0).unwrap();
//! let sparse = YieldParams::new(0.1, 0.2).unwrap();
//! let die = Area::square_centimeters(2.0).unwrap();
//! assert!(poisson_yield(&sparse, die) > poisson_yield(&dense, die));
//! ```

use thiserror::Error;

use crate::quantities::Area;

/// Defect density and critical-area fraction for one technology.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YieldParams {
    defect_density_per_cm2: f64,
    critical_area_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum YieldError {
    #[error("defect density must be a finite non-negative value, got {0}")]
    BadDefectDensity(f64),
    #[error("critical-area fraction must be in (0, 1], got {0}")]
    BadCriticalFraction(f64),
    #[error("yield must be in (0, 1], got {0}")]
    BadYield(f64),
    #[error("die of {die_cm2} cm^2 at defect density {d0} yields 0 functional dice (exponent {exponent} underflows)")]
    InfeasibleYield {
        die_cm2: f64,
        d0: f64,
        exponent: f64,
    },
}

impl YieldParams {
    pub fn new(
        defect_density_per_cm2: f64,
        critical_area_fraction: f64,
    ) -> Result<Self, YieldError> {
        if !defect_density_per_cm2.is_finite() || defect_density_per_cm2 < 0.0 {
            return Err(YieldError::BadDefectDensity(defect_density_per_cm2));
        }
        if !critical_area_fraction.is_finite()
            || critical_area_fraction <= 0.0
            || critical_area_fraction > 1.0
        {
            return Err(YieldError::BadCriticalFraction(critical_area_fraction));
        }
        Ok(Self {
            defect_density_per_cm2,
            critical_area_fraction,
        })
    }

    pub fn defect_density_per_cm2(&self) -> f64 {
        self.defect_density_per_cm2
    }

    pub fn critical_area_fraction(&self) -> f64 {
        self.critical_area_fraction
    }

    /// Same defect density with a different critical-area fraction.
    pub fn with_critical_fraction(self, fraction: f64) -> Result<Self, YieldError> {
        Self::new(self.defect_density_per_cm2, fraction)
    }

    /// Same critical-area fraction with a different defect density.
    pub fn with_defect_density(self, d0: f64) -> Result<Self, YieldError> {
        Self::new(d0, self.critical_area_fraction)
    }
}

/// Fraction of functional dice: `exp(-d0 * f * A)`.
///
/// Equals exactly 1 when the defect density is zero. Strictly decreasing in
/// defect density, critical fraction, and area when the others are positive.
pub fn poisson_yield(params: &YieldParams, die_area: Area) -> f64 {
    let exponent =
        params.defect_density_per_cm2 * params.critical_area_fraction * die_area.cm2();
    (-exponent).exp()
}

/// The silicon that must be processed per functional die: `area / yield`.
pub fn effective_area(die_area: Area, yield_fraction: f64) -> Result<Area, YieldError> {
    if !yield_fraction.is_finite() || yield_fraction <= 0.0 || yield_fraction > 1.0 {
        return Err(YieldError::BadYield(yield_fraction));
    }
    Area::square_centimeters(die_area.cm2() / yield_fraction)
        .map_err(|_| YieldError::BadYield(yield_fraction))
}

/// Dies-per-wafer estimate and a flag for dies too large for the wafer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiesPerWafer {
    pub dies: u64,
    /// Set when the die exceeds the usable wafer area, forcing a count of 0.
    pub die_exceeds_wafer: bool,
}

/// Circle-packing approximation: `floor(pi*r^2/A - pi*(2r)/sqrt(2A))` with
/// `r` the usable wafer radius in cm, clamped at zero.
pub fn dies_per_wafer(
    die_area: Area,
    wafer_diameter_mm: f64,
    edge_exclusion_mm: f64,
) -> DiesPerWafer {
    let r_cm = (wafer_diameter_mm / 2.0 - edge_exclusion_mm) / 10.0;
    let usable = std::f64::consts::PI * r_cm * r_cm;
    let a = die_area.cm2();
    if a > usable {
        return DiesPerWafer {
            dies: 0,
            die_exceeds_wafer: true,
        };
    }
    let packed = usable / a - std::f64::consts::PI * (2.0 * r_cm) / (2.0 * a).sqrt();
    DiesPerWafer {
        dies: packed.max(0.0).floor() as u64,
        die_exceeds_wafer: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn area(cm2: f64) -> Area {
        Area::square_centimeters(cm2).unwrap()
    }

    #[test]
    fn zero_defect_density_yields_one() {
        let p = YieldParams::new(0.0, 1.0).unwrap();
        assert_eq!(poisson_yield(&p, area(123.0)), 1.0);
    }

    #[test]
    fn analytic_value_small_exponent() {
        // d0=0.1, A=2, f=0.2 -> e^(-0.04)
        let p = YieldParams::new(0.1, 0.2).unwrap();
        let y = poisson_yield(&p, area(2.0));
        assert!((y - 0.9607894391523232).abs() < 1e-15);
    }

    #[test]
    fn yield_impact_factor_at_unit_defect_area() {
        // at d0*A = 1 a 20%-critical chip yields e^(-0.2) = 0.818731, the
        // per-unit impact factor relative to a fully critical chip's e^(-1)
        let dense = YieldParams::new(0.1, 1.0).unwrap();
        let sparse = YieldParams::new(0.1, 0.2).unwrap();
        let a = area(10.0); // d0 * A = 1
        let y_sparse = poisson_yield(&sparse, a);
        assert!((y_sparse - 0.8187307530779818).abs() < 1e-12);
        assert!((y_sparse - poisson_yield(&dense, a).powf(0.2)).abs() < 1e-12);
    }

    #[test]
    fn fraction_composability() {
        // yield(f) = yield(1)^f
        let a = area(3.7);
        for f in [0.05, 0.2, 0.5, 0.93, 1.0] {
            let full = poisson_yield(&YieldParams::new(0.25, 1.0).unwrap(), a);
            let part = poisson_yield(&YieldParams::new(0.25, f).unwrap(), a);
            assert!((part - full.powf(f)).abs() <= 1e-12 * part);
        }
    }

    #[test]
    fn effective_area_identity_and_double() {
        assert_eq!(effective_area(area(1.0), 1.0).unwrap().cm2(), 1.0);
        assert_eq!(effective_area(area(1.0), 0.5).unwrap().cm2(), 2.0);
    }

    #[test]
    fn effective_area_derived_case() {
        // A = 1.25 cm^2 at yield 0.904837418 (e^-0.1 rounded to 9 digits)
        let eff = effective_area(area(1.25), 0.904837418).unwrap();
        assert!((eff.cm2() - 1.381463647649461).abs() < 1e-12);
        assert!((eff.cm2() - 1.3815).abs() < 1e-3);
    }

    #[test]
    fn effective_area_rejects_zero_yield() {
        assert!(effective_area(area(1.0), 0.0).is_err());
        assert!(effective_area(area(1.0), -0.1).is_err());
        assert!(effective_area(area(1.0), 1.1).is_err());
    }

    #[test]
    fn dies_per_wafer_reference_case() {
        // A=1 cm^2, 300 mm wafer, 3 mm edge exclusion:
        // floor(pi*14.7^2 - pi*29.4/sqrt(2)) = 613
        let d = dies_per_wafer(area(1.0), 300.0, 3.0);
        assert_eq!(d.dies, 613);
        assert!(!d.die_exceeds_wafer);
    }

    #[test]
    fn die_as_large_as_wafer_gives_zero() {
        let usable = std::f64::consts::PI * 14.7 * 14.7;
        // exactly the usable area: the packing term clamps to zero, no flag
        let exact = dies_per_wafer(area(usable), 300.0, 3.0);
        assert_eq!(exact.dies, 0);
        assert!(!exact.die_exceeds_wafer);
        // anything larger is flagged
        let over = dies_per_wafer(area(usable * 1.0001), 300.0, 3.0);
        assert_eq!(over.dies, 0);
        assert!(over.die_exceeds_wafer);
    }

    #[test]
    fn halving_area_more_than_doubles_dies() {
        let full = dies_per_wafer(area(1.0), 300.0, 3.0).dies;
        let half = dies_per_wafer(area(0.5), 300.0, 3.0).dies;
        assert_eq!(half, 1265);
        assert!(half > 2 * full);
    }

    #[test]
    fn dies_per_wafer_non_increasing_in_area() {
        let mut prev = u64::MAX;
        for a in [0.1, 0.5, 1.0, 2.0, 5.0, 20.0, 100.0] {
            let d = dies_per_wafer(area(a), 300.0, 3.0).dies;
            assert!(d <= prev, "dies increased when area grew to {a}");
            prev = d;
        }
    }

    #[test]
    fn bad_params_rejected() {
        assert!(YieldParams::new(-0.1, 0.5).is_err());
        assert!(YieldParams::new(0.1, 0.0).is_err());
        assert!(YieldParams::new(0.1, 1.5).is_err());
        assert!(YieldParams::new(f64::NAN, 0.5).is_err());
    }
}
