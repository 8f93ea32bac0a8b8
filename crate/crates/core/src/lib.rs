//! Classification of points exterior to a complex projective hypersurface
//! by the monodromy group of the linear projection from that point, plus a
//! focal-locus engine for families of lines.
//!
//! The pipeline: validate a center off the hypersurface, cut the problem to
//! a plane curve through a seeded random section when the dimension exceeds
//! one, locate the branch points of the induced pencil through an exact
//! discriminant, transport the fiber around keyhole loops, and classify the
//! resulting permutation group (uniform / Galois / decomposable). The focal
//! module computes focal spectra of n-parameter line families and checks
//! the tangency and fundamental-point multiplicity statements on them.

pub mod classify;
pub mod config;
pub mod error;
pub mod focal;
pub mod groups;
pub mod monodromy;
pub mod num;
pub mod pencil;
pub mod poly;

pub use config::Config;
pub use error::{Error, Result};
