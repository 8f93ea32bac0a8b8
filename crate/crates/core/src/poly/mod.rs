//! Polynomial arithmetic: sparse multivariate forms, dense univariate
//! restrictions, root finding with multiplicity clustering, resultants.

mod multi;
pub mod parse;
mod resultant;
mod roots;
mod uni;

pub use multi::MultiPoly;
pub use parse::{parse_hypersurface, parse_point, parse_poly, VarScheme};
pub use resultant::{
    discriminant_in_t, discriminant_in_t_float, discriminant_resultant, resultant, FiberFamily,
};
pub use roots::{
    all_roots, derivative_multiplicity, profile, roots_with_multiplicity, RootCluster, RootOpts,
};
pub use uni::UniPoly;
