//! Asymptotic geometry: convex function handles, limit sets of nested convex families,
//! flat points and the Euclidean-factor decomposition.

mod flat;
mod function;
mod limit;

pub use flat::{
    affinity_defect, antipode, ball_sample, euclidean_decomposition, flat_split, is_flat_closed_form, DefectRow,
    FlatSplit, DEFAULT_DEFECT_TOL, DEFAULT_R_MAX,
};
pub use function::{BusemannSum, ConvexFunction};
pub use limit::{
    direction_at_infinity, limit_circumcenter, limit_set, limit_set_diameter_check, FamilyIndex, NestedConvexFamily,
    OrbitSample,
};
