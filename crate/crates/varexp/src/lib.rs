//! Numerical laboratory for variable-exponent Lebesgue and Sobolev norms:
//! Luxemburg norm evaluation, subcritical extremal problems on the unit
//! gradient ball, localized best constants, bubble constructions and the
//! compactness/concentration diagnostics built on top of them.

// negated comparisons reject NaN parameters, `a >= b` would let them through
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// numeric kernels index several arrays jointly; iterator zips obscure that
#![allow(clippy::needless_range_loop)]

pub mod concentration;
pub mod error;
pub mod exponent;
pub mod grid;
pub mod modular;
pub mod solver;

pub use error::{Error, Result};
pub use exponent::{
    critical_set, log_hoelder_modulus, sobolev_conjugate, CriticalSetReport, ExponentField,
    SobolevConjugate,
};
pub use grid::{
    restrict_to_ball, CellFunction, CellMask, CellVectorField, DiscreteMeasure, Grid,
    GridFunction,
};
pub use modular::{
    cell_hoelder_check, cell_luxemburg_norm, cell_modular, cell_norm_modular_bounds,
    elementary_inequality_constant, energy_measure, grad_luxemburg_norm, hoelder_check,
    luxemburg_norm, modular, norm_modular_bounds, sobolev_inequality_check, InequalityCheck,
    LuxemburgNorm,
};
pub use solver::{
    objective, project_to_unit_ball, quotient_constant, quotient_from_record, solve,
    solve_with_warm_start, ExtremalProblem, ExtremalRecord, SolverOptions,
};
pub use concentration::{
    argmax_cell, check_sobloc_identity, check_sufficient_condition, classify_dichotomy,
    eval_f_eps, eval_f_star, extrapolate_limit, localized_constant, make_bubble,
    make_multi_bubble, run_sweep, AtomicDecomposition, BubbleProfile, Classification,
    DichotomyReport, LocalizedConstant, ProblemFamily, SoblocIdentity, SoblocSample,
    SufficientCondition, SufficientConditionOptions, SweepEntry, SweepOptions, SweepReport,
};
