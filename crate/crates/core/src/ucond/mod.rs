//! Unconditional integration over countable point-mass spaces.

mod engine;
mod field;
pub mod instances;
mod seqvec;
mod space;
mod target;

pub use engine::{
    integrate_over, multiply_linf, pseudo_bound, scalar_variation_bound, split_closure, truncate_to_local,
    u_integrate, u_integrate_with, uniform_tail_set, CertificateStatus, CertificateSummary, CertificationPolicy,
    ProbeRecord, TraceEntry, UIntegralCertificate, UniformTail,
};
pub use field::{BlockIntegral, OracleKind, TailOracle, VectorField};
pub use seqvec::{Profile, SeqVec};
pub use space::{LocalIntegrationSpace, LocalSet, Mass, PointSet};
pub use target::{NormKind, Target};
