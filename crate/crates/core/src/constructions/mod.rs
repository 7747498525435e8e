//! Explicit factorizations in `M_n`, each sealed as a certificate that an
//! independent verifier can re-evaluate.

mod certificate;
mod comm_n2;
mod comm_p;
mod dhs;
mod exp_comm;
mod lie_rewrite;
mod sumof5;
mod unipotent;
pub mod verifier;

pub use certificate::{Atom, ClaimedIdentity, Factor, FactorCertificate};
pub use comm_n2::{commutator_to_squarezeros, CommN2, COMM_N2_TOL, UNIT_REPRESENTATION};
pub use comm_p::{q_projection, selfcomm_to_projections, CommP, COMM_P_TOL};
pub use dhs::{dhs_kernel_check, DhsReport, DHS_TOL};
pub use exp_comm::{exp_commutator_factor, ExpComm};
pub use lie_rewrite::{form_i_terms, lie_rewrite, pi, Bindings, Rewrite, RewriteKind, Term};
pub use sumof5::{sumof5, SumOf5, SUMOF5_TOL};
pub use unipotent::{diagonal_pair, n2c_witness, unipotent_factor, unipotent_pair, N2cWitness, UNIPOTENT_TOL};
pub use verifier::{verify_certificate, VerifyReport};
