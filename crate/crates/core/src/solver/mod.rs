//! Pencils and Volterra symbols, kernels by contour inversion, solutions by
//! convolution, and residual and uniqueness checks.

mod document;
mod kernel;
mod probe;
mod problem;
mod solve;

pub use document::{parse_matrix, parse_problem, CesaroDoc, DataDoc, KernelDoc, ProblemDoc, ProblemSpec, TermDoc};
pub use kernel::{
    covering_kernel_window, green_function, problem_kernel, resolvent_kernel, restrict_kernel, Kernel, KernelLedger,
    KernelOptions, DEFAULT_RCOND_THRESHOLD,
};
pub use probe::{
    homogeneous_mode_check, mode_value, pencil_root, polycircle_samples, polynomial_roots, uniqueness_probe, ModeCheck,
    ProbeReport, ProbeSample, DEFAULT_PROBE_THRESHOLD,
};
pub use problem::{
    monomial, pencil_eval, symbol_eval, AxesTerm, KernelTerm, OperatorPencil, Problem, Reach, SymbolValue,
    SymbolVariant, VolterraSymbol, WeylTerm, SYMBOL_TAIL_TOL,
};
pub use solve::{
    required_solution_window, residual, solve, ErrorLedger, ResidualReport, SolveOptions, Solution, Verification,
};
