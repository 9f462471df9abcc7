//! Exact permanents of multidimensional (0,1) and nonnegative matrices, and
//! upper bounds on them.

pub mod bounds;
pub mod error;
pub mod example;
pub mod exec;
pub mod generators;
pub mod harness;
pub mod io;
pub mod permanent;
pub mod tensor;

pub use bounds::{
    bound_bregman_minc, bound_conjecture, bound_covering, bound_minc_ceil, bound_plane_reduction, bound_total_sum,
    bound_trivial_product, covering_numbers, evaluate_all, minc_factor, reduce_to_b, BoundName, BoundOptions,
    CoveringNumbers, LogBound,
};
pub use error::{Error, Result};
pub use example::paper_example;
pub use exec::Exec;
pub use generators::{gen, omega_ratio_report, GenKind, GenSpec, OmegaSample};
pub use harness::{run_fuzz, FuzzConfig, FuzzReport, GenChoice};
pub use io::{parse_matrix, write_matrix};
pub use permanent::{
    permanent, permanent_auto, permanent_decompose, permanent_laplace, permanent_naive, permanent_ryser_2d, ExactValue,
    Method, PermConfig,
};
pub use tensor::{MultiIndex, MultiMatrix, PlaneSpec};
