//! Shared fixtures for the benchmark targets.

use monodromy_core::num::GaussRational;
use monodromy_core::pencil::{Form, HPoint};
use monodromy_core::poly::parse_hypersurface;

pub fn fermat_quartic() -> Form {
    Form::Exact(parse_hypersurface("x0^4 + x1^4 + x2^4").unwrap())
}

pub fn generic_quartic() -> Form {
    Form::Exact(
        parse_hypersurface(
            "x0^4 + x1^4 + x2^4 + x0^2*x1*x2 + 2*x0*x1^3 - x1*x2^3 + 3*x0*x1*x2^2",
        )
        .unwrap(),
    )
}

pub fn point(coords: &[i64]) -> HPoint {
    HPoint::Exact(coords.iter().map(|&c| GaussRational::from_ints(c, 0)).collect())
}
