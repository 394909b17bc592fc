//! Solver for singularly perturbed reaction-diffusion problems with a unit
//! spatial shift on (0, 2): layer-adapted meshes, weighted Galerkin FEM in
//! space and discontinuous Galerkin time stepping.

pub mod analysis;
pub mod assembly;
pub mod cli;
pub mod error;
pub mod linsolve;
pub mod fespace;
pub mod mesh;
pub mod quadrature;
pub mod stationary;
pub mod timedg;
pub mod weights;

pub use analysis::{
    build_reference, convergence_study, duran_h_for_m, frozen_problem, l2_time_error_vs_reference,
    manufacture, q_norm_error, q_norm_error_vs_reference, sup_l2_error,
    sup_l2_error_vs_reference, triple_norm_error,
    weighted_l2_error, weighted_l2_norm, weighted_triple_norm, ConvergenceReport, LayerKind,
    LayerTemplate, ManufacturedSolution, StudyConfig, StudyKind, StudyRow,
};
pub use assembly::{
    assemble_bilinear, assemble_load, assemble_triple_gram, assemble_weighted_mass,
    SparseMatrix, StationaryCoefficients,
};
pub use error::{Error, Result};
pub use fespace::{build_fespace, interpolate, DiscreteField, FeSpace};
pub use mesh::{build_duran_mesh, build_stype_mesh, Mesh1D, MeshConfig, MeshFamily};
pub use quadrature::{gauss_rule, radau_rule, QuadRule, TimeQuadRule};
pub use stationary::{coercivity_margin, solve_stationary, StationarySolution};
pub use timedg::{
    dg_solve, slab_system_matrix, ProblemSpec, SpaceTimeSolution, TimeMesh, TimeSide,
};
pub use weights::{make_weight, validate_weight, ValidationReport, WeightKind, WeightSpec};
