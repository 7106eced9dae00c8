//! Carbon-footprint modeling for photonic and CMOS chips.
//!
//! The model splits a chip's footprint into an operational part (energy drawn
//! while running a workload, times the carbon intensity of the operating
//! power source) and an embodied part (fab energy, process gases, raw
//! materials, and packaging, scaled by the yielded area), then attributes a
//! `runtime / lifetime` share of the embodied part to a specific workload.
//!
//! The crate is organized around five modules:
//!
//! - [`quantities`]: unit-carrying scalar types (kWh, cm², gCO₂e, g/kWh, hours).
//! - [`flow`]: manufacturing-step catalogs, process-flow files, and their
//!   aggregation into per-area coefficients.
//! - [`yield_model`]: Poisson yield with a critical-area fraction.
//! - [`engine`]: the footprint equations, system composition, and scenario
//!   comparison.
//! - [`datasets`]: loaders for preset/carbon-intensity/scenario documents and
//!   the bundled data, including a photonic process flow and a case study
//!   comparing an electro-photonic accelerator against systolic arrays.
//!
//! ```
//! use fabcarbon::datasets::{bundled, load_scenario};
//! use fabcarbon::engine::scenario_footprint;
//!
//! let presets = bundled::presets();
//! let ci = bundled::ci_table();
//! let (scenario, _) = load_scenario(bundled::ADEPT_SCENARIO, &presets, &ci).unwrap();
//! let report = scenario_footprint(&scenario).unwrap();
//! assert!(report.embodied_amortized > report.operational);
//! ```

pub mod datasets;
pub mod engine;
pub mod flow;
pub mod quantities;
pub mod yield_model;

pub use engine::{compare, scenario_footprint, FootprintReport, Scenario};
pub use flow::{aggregate_flow, parse_flow, parse_step_catalog};
pub use yield_model::{dies_per_wafer, effective_area, poisson_yield, YieldParams};

// The guide chapters double as doctests so their snippets stay compilable.
#[cfg(doctest)]
mod book {
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            mod $name {}
        };
    }

    chapter!(introduction, "../../../book/src/introduction.md");
    chapter!(quantities, "../../../book/src/quantities.md");
    chapter!(carbon_model, "../../../book/src/carbon-model.md");
    chapter!(process_flows, "../../../book/src/process-flows.md");
    chapter!(yield_chapter, "../../../book/src/yield.md");
    chapter!(scenarios, "../../../book/src/scenarios.md");
    chapter!(case_study, "../../../book/src/case-study.md");
    chapter!(cli, "../../../book/src/cli.md");
}
