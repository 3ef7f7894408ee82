//! Nyström discretization of integrodifference equations
//! u_{t+1}(x) = g_t(x, u_t(x)) + ∫_Ω k_t(x, y, u_t(y)) dy.

pub mod kernel;
pub mod operators;
pub mod quadrature;
pub mod system;

pub use kernel::{
    assemblies, assembly_by_name, max_row_sum, split_row_integral, write_matrix_csv, DispersalKernel, NystromAssembly,
    PlainNystrom, RowCorrectedNystrom,
};
pub use operators::{
    nemytskii_apply, urysohn_apply, BoundKernel, Field, Growth, KernelFamily, KernelForm, KernelSpec, PointMap,
    UrysohnMap, UrysohnOperator,
};
pub use quadrature::{build_quadrature, rule_by_name, rules, Habitat, Quadrature, QuadratureRule};
pub use system::{
    absorbing_bound, discrete_row_sum_max, fixed_point_iterate, hypothesis_bounds, ide_model, refine_and_compare,
    ricker_smallness_check, AbsorbingVariant, FixedPointReport, HypothesisBounds, IdeSystem, RefinementTable,
    SmallnessCheck,
};
