//! Exact and numerical machinery for optimal discrimination of a qubit
//! unitary between two Haar-random candidates with three black-box calls.
//!
//! The crate builds the group-averaged Choi operators of the three call
//! orderings, verifies closed-form dual certificates at value 7/8, solves the
//! primal semidefinite program with a first-order splitting method, and
//! simulates the comparison protocol that attains the optimum.

pub mod error;
pub mod haar;
pub mod irrep;
pub mod linalg;
pub mod matio;
pub mod primal;
pub mod sim;
pub mod tensor;

pub use error::{Error, Result};
pub use haar::{build_m, monte_carlo_m, sample_haar_su2, MVariant, RngStream, UnitarySample};
pub use irrep::{
    assemble_m1_from_table, assemble_omega, assemble_omega_prime, closed_form_certificate,
    transfer_certificate_swap, verify_dual, CandidatePair, DualCertificate, DualReport, Exact,
};
pub use primal::{
    assemble_primal, check_primal_feasibility, comparison_tester_choi, maximally_mixed_point,
    objective_esp, solve_sdp, SdpPair, SdpProblem, SolveParams, SolveReport,
};
pub use sim::{
    comparison_success_prob, estimate_esp, haar_mean_overlap, GuessConvention, ProtocolInstance,
    SimMode, SimReport,
};
pub use tensor::{C64, CMatrix, LabeledOperator, RegisterLabel, SystemLayout};
