//! Local-realistic polytopes of joint-probability vectors: deterministic
//! vectors, null vectors, Farkas inequalities, facet enumeration, membership
//! certificates and quantum probability models.

pub mod detvectors;
pub mod error;
pub mod exact;
pub mod farkas;
pub mod formats;
pub mod nullspace;
pub mod polytope;
pub mod quantum;
pub mod scenario;
pub mod simplex;

pub use detvectors::{DetVector, GramMatrix, InteriorVector, SizeGuard};
pub use error::{Error, Result};
pub use exact::Rational;
pub use farkas::{Bipartition, ChPartitionSpec, ChainDecomposition, FarkasVector, Provenance};
pub use nullspace::{Canonicalizer, NullVector};
pub use polytope::{
    FaceCandidate, FaceContext, FaceVerdict, FacetEnumeration, FacetOptions, IngestOptions, MembershipResult,
    ProbVector, RawValue, Shard,
};
pub use quantum::{MeasurementModel, QuantumState};
pub use scenario::{parse_scenario, Assignment, CoincidenceIndex, Observer, Scenario, ScenarioCounts, SettingOutcome};
