//! Fields of CAT(0) spaces over a discrete groupoid: scenarios, sections, invariant measures,
//! minimal invariant subfields, quasi-invariant Busemann fields and the dichotomy.

mod dichotomy;
mod measure;
mod minimal;
mod quasi;
mod scenario;
mod section;

pub use dichotomy::{busemann_branch, dichotomy, Branch, ClassReport, DichotomyOutcome, TraceEntry};
pub use measure::{measure_invariance, orbit_average_measure, supplied_measures, Measure, OrbitAverage};
pub use minimal::{minimal_invariant_subfield, ClassMinimal, Minimal};
pub use quasi::{classify_inf, quasi_invariant_busemann_field, InfKind, InfReport, QuasiInvariantField};
pub use scenario::{holonomy, FieldEdge, FieldScenario, Generator, Tolerances};
pub use section::{
    check_invariant_section, edge_residuals, point_set, transport_boundary, transport_flat, transport_section, Flat,
    LoopDisplacement, Section, Transport,
};
