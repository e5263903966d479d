//! Partial-transpose moment criteria for the tensor functions `f_{t1,t2,…}`.

pub mod linalg;
mod matrix;
mod moments;
mod oracle;
mod spec;

pub use matrix::{
    build_pt_matrix, build_pt_matrix_posterior, build_pt_matrix_with_tail, det_f12_closed_form,
    verdict, Entries, MomentMatrix, PTVerdict, PtMatrixBuilder, Scalar,
};
pub use moments::{g_coefficient, g_table, pt_moment_ideal, pt_moment_lossy, pt_moment_noisy, pt_moment_posterior};
pub use oracle::{
    schrodinger_oracle_moment, schrodinger_oracle_moment_bounded, PurifiedState, DEFAULT_ORACLE_BOUND,
};
pub use spec::TensorFunctionSpec;
