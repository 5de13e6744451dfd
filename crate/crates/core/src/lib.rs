//! Normal forms of commuting families of singular vector fields.
//!
//! The crate works with truncated jets: every series and field carries a
//! cap `N` and all identities are checked exactly modulo degree `N + 1`.
//!
//! * [`series`]: sparse truncated power series, majorant norms.
//! * [`field`]: vector fields, Lie brackets, jet diffeomorphisms.
//! * [`torus`]: the diagonal action, weights, small-divisor diagnostics.
//! * [`cartan`]: first-integral decomposition and the Cartan-type certificate.
//! * [`normalizer`]: stepwise and Newton normalization, estimate diagnostics.
//! * [`hamiltonian`]: the integrable Hamiltonian front end.
//! * [`families`]: random test families with known normal forms.
//! * [`cli`]: command implementations behind the `cartan-nf` binary.

pub mod cartan;
pub mod cli;
pub mod error;
pub mod families;
pub mod field;
pub mod hamiltonian;
pub mod io;
pub mod linalg;
pub mod normalizer;
pub mod scalar;
pub mod series;
pub mod torus;

pub use error::{Error, Result};
pub use field::{JetDiffeo, VectorField};
pub use scalar::{Arith, Scalar};
pub use series::{FormalSeries, MultiIndex, PolyradiusSpec};
pub use torus::LieMorphism;

