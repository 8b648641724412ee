//! Debiasing underreported counts on a graph.
//!
//! Observed counts `y_i ~ Binomial(n_i, p_i)` are split into true counts
//! `n` and discovery probabilities `p` by solving, in the log domain,
//!
//! ```text
//!   minimize  ‖ỹ - u - v‖² + λ₁ vᵀLv + λ₂ uᵀHu    s.t. u ≥ ỹ, v ≤ 0
//! ```
//!
//! where `L` is the graph Laplacian (probabilities vary smoothly between
//! neighbours) and `H` projects off the span of node features (counts
//! follow a log-linear model).
//!
//! ```
//! use graud::{projection_matrix, solve, Graph, ProblemInstance, SolverConfig};
//! use nalgebra::DMatrix;
//!
//! let g = Graph::path(4).unwrap();
//! let x = DMatrix::from_column_slice(4, 1, &[1.0, 2.0, 3.0, 5.0]);
//! let basis = projection_matrix(&x).unwrap();
//! let inst = ProblemInstance::from_counts(
//!     &[12.0, 20.0, 31.0, 48.0], None, g.laplacian(), basis.projector().clone(), 0.01, 0.9,
//! ).unwrap();
//! let sol = solve(&inst, &SolverConfig::default(), None).unwrap();
//! assert!(sol.p_hat.iter().all(|&p| p <= 1.0));
//! ```

pub mod analysis;
pub mod design;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod solver;
pub mod synth;

pub use analysis::{
    chernoff_check, chernoff_tail_bounds, concentration_check, cross_validate, fold_assignment, recovery_bound,
    recovery_bound_for, relative_l1_error, ChernoffCheck, ConcentrationReport, CvOptions, CvResult, CvScore,
    RecoveryBound, TailBound,
};
pub use design::{check_assumptions, delta1, projection_matrix, AssumptionReport, DesignBasis};
pub use error::{Error, ErrorKind, Result};
pub use experiment::{run_experiment, ExperimentKind, ExperimentOutput, ExperimentSettings};
pub use graph::Graph;
pub use linalg::SymmetricMatrix;
pub use solver::{solve, ProblemInstance, Solution, SolverConfig};
pub use synth::{make_scenario, GeneratorConfig, ProbSettings, Scenario, Topology};
