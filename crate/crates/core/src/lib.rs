//! Finite-scale machinery for Lipschitz-free (Arens-Eells) spaces.
//!
//! The crate computes the transportation-type norm on molecules over a finite
//! metric space from both sides of Kantorovich-type duality, searches for
//! isometries and dilatations between finite spaces, tests Weaver concavity
//! through extreme points of the polyhedral unit ball, grows finite Urysohn
//! approximations by Katetov extension, and chains the metric transforms into
//! the reduction pipeline that turns an arbitrary code into a concave pointed
//! space whose free-space structure remembers the original isometry type.

pub mod error;
pub mod isometry;
pub mod katetov;
pub mod lipschitz;
pub mod lp;
pub mod molecule;
pub mod norm;
pub mod oracle;
pub mod pipeline;
pub mod scalar;
pub mod space;
pub mod suite;
pub mod transport;
pub mod weaver;

pub use error::Error;
pub use isometry::{DilatationWitness, IsometryWitness};
pub use katetov::{KatetovFunction, UrysohnApprox};
pub use lipschitz::LipschitzFunction;
pub use molecule::Molecule;
pub use norm::NormCertificate;
pub use space::{FiniteMetricSpace, MetricCode, PointedSpace};

/// Default numeric tolerance used by every certificate-producing routine.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Distances below this threshold are treated as exact zeros when
/// quotienting a code by its zero-distance classes.
pub const MERGE_THRESHOLD: f64 = 1e-12;
