//! Sylvester resultants and the discriminant of a fiber family.
//!
//! Sign convention, pinned by tests: the Sylvester matrix is built with the
//! rows of the FIRST argument on top (deg(h) rows of g, then deg(g) rows of
//! h, coefficients highest degree first), so resultant(t - a, t - b) = a - b.

use crate::error::{Error, Result};
use crate::num::{Coeff, GaussInt, GaussRational};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use super::uni::UniPoly;

/// Determinant by Gaussian elimination over the coefficient field.
/// Exact for exact coefficients; partial pivoting otherwise.
fn determinant<C: Coeff>(mut m: Vec<Vec<C>>) -> C {
    let n = m.len();
    let mut det = C::one();
    for col in 0..n {
        let pivot = (col..n)
            .filter(|&r| !m[r][col].is_zero())
            .max_by(|&a, &b| m[a][col].abs_est().partial_cmp(&m[b][col].abs_est()).unwrap());
        let Some(p) = pivot else { return C::zero() };
        if p != col {
            m.swap(p, col);
            det = det.neg_ref();
        }
        let diag = m[col][col].clone();
        det = det.mul_ref(&diag);
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let factor = m[r][col].div_ref(&diag);
            for c in col..n {
                let sub = m[col][c].mul_ref(&factor);
                m[r][c] = m[r][c].sub_ref(&sub);
            }
        }
    }
    det
}

fn sylvester_matrix<C: Coeff>(g: &UniPoly<C>, h: &UniPoly<C>) -> Vec<Vec<C>> {
    let (dg, dh) = (g.degree(), h.degree());
    let n = dg + dh;
    let mut m = vec![vec![C::zero(); n]; n];
    // deg(h) rows of g's coefficients, highest first
    for row in 0..dh {
        for k in 0..=dg {
            m[row][row + k] = g.coeff(dg - k);
        }
    }
    // deg(g) rows of h's coefficients
    for row in 0..dg {
        for k in 0..=dh {
            m[dh + row][row + k] = h.coeff(dh - k);
        }
    }
    m
}

/// Resultant of two univariate polynomials of degree >= 1.
pub fn resultant<C: Coeff>(g: &UniPoly<C>, h: &UniPoly<C>) -> Result<C> {
    if g.degree() < 1 || h.degree() < 1 || g.is_zero() || h.is_zero() {
        return Err(Error::DegenerateResultantInput);
    }
    Ok(determinant(sylvester_matrix(g, h)))
}

/// Discriminant-style resultant Res_lambda(g, dg/dlambda) for a single
/// polynomial; zero iff g has a multiple root.
pub fn discriminant_resultant<C: Coeff>(g: &UniPoly<C>) -> Result<C> {
    let d = g.derivative();
    if d.is_zero() || d.degree() < 1 {
        // deg(g) <= 1: no multiple roots possible
        return Ok(C::one());
    }
    if g.degree() < 1 {
        return Err(Error::DegenerateResultantInput);
    }
    Ok(determinant(sylvester_matrix(g, &d)))
}

/// A polynomial in two variables (t, lambda), represented as lambda
/// coefficients that are themselves polynomials in t.
#[derive(Clone, Debug)]
pub struct FiberFamily<C: Coeff> {
    /// lambda^k coefficient as a polynomial in t, k = 0..=deg_lambda
    pub coeffs_in_t: Vec<UniPoly<C>>,
}

impl<C: Coeff> FiberFamily<C> {
    pub fn deg_lambda(&self) -> usize {
        self.coeffs_in_t.len().saturating_sub(1)
    }

    pub fn at_t(&self, t: &C) -> UniPoly<C> {
        UniPoly::from_coeffs(self.coeffs_in_t.iter().map(|c| c.eval(t)).collect())
    }

    /// Max t-degree across lambda coefficients.
    fn deg_t(&self) -> usize {
        self.coeffs_in_t.iter().map(|c| c.degree()).max().unwrap_or(0)
    }
}

/// Res_lambda(g_t, dg_t/dlambda) as an exact polynomial in t, computed by
/// evaluation at integer nodes and Newton-form interpolation.
///
/// Requires the lambda-leading coefficient to be a nonzero constant in t
/// (true for fiber families of a projection whose center avoids X), so the
/// Sylvester determinant is a polynomial function of t of bounded degree.
/// Node evaluations clear denominators once and run fraction-free Bareiss
/// elimination over the Gaussian integers.
pub fn discriminant_in_t(fam: &FiberFamily<GaussRational>) -> Result<UniPoly<GaussRational>> {
    let d = fam.deg_lambda();
    if d < 1 {
        return Err(Error::DegenerateResultantInput);
    }
    let lead = fam.coeffs_in_t[d].clone();
    assert!(lead.degree() == 0 && !lead.is_zero(), "leading fiber coefficient must be a nonzero constant");
    if d == 1 {
        return Ok(UniPoly::constant(GaussRational::from_ints(1, 0)));
    }
    // Clear denominators: scaling the fiber by den scales the determinant
    // by den^(2d-1), undone after interpolation.
    let (int_fam, den) = clear_denominators(fam);
    let det_at = |node: i64| -> GaussInt {
        let t = GaussInt { re: BigInt::from(node), im: BigInt::zero() };
        let g: Vec<GaussInt> = int_fam.iter().map(|c| eval_int_poly(c, &t)).collect();
        bareiss_discriminant(&g)
    };

    // The leading lambda-coefficient is constant, so as t grows the d roots
    // scale linearly and the discriminant grows like t^(d(d-1)): that is
    // the degree. Interpolate there and verify at two extra nodes, falling
    // back to the coarse bound if the check ever failed.
    let tight = d * (d - 1) + 1;
    let nodes: Vec<i64> = (0..tight as i64).collect();
    let values: Vec<GaussInt> = nodes.par_iter().map(|&j| det_at(j)).collect();
    let nodes_q: Vec<GaussRational> = nodes.iter().map(|&j| GaussRational::from_i64(j)).collect();
    let values_q: Vec<GaussRational> = values.iter().map(|v| v.to_rational()).collect();
    let mut interp = newton_interpolate(&nodes_q, &values_q);
    let verified = (tight as i64..tight as i64 + 2).all(|j| {
        interp.eval(&GaussRational::from_i64(j)) == det_at(j).to_rational()
    });
    if !verified {
        let coarse = (2 * d - 1) * fam.deg_t() + 1;
        let nodes: Vec<i64> = (0..coarse as i64).collect();
        let values: Vec<GaussRational> =
            nodes.par_iter().map(|&j| det_at(j).to_rational()).collect();
        let nodes_q: Vec<GaussRational> = nodes.iter().map(|&j| GaussRational::from_i64(j)).collect();
        interp = newton_interpolate(&nodes_q, &values);
    }
    // Undo the denominator scaling.
    let mut scale = GaussRational::new(BigRational::from_integer(den), BigRational::zero());
    scale = GaussRational::from_ints(1, 0).div_ref(&pow_rational(&scale, 2 * d - 1));
    Ok(interp.scale(&scale))
}

fn pow_rational(base: &GaussRational, e: usize) -> GaussRational {
    let mut acc = GaussRational::from_ints(1, 0);
    for _ in 0..e {
        acc = acc.mul_ref(base);
    }
    acc
}

/// Scale all coefficients by the least common multiple of their
/// denominators; returns integer lambda-coefficients (as dense t-vectors)
/// and the scaling factor.
fn clear_denominators(fam: &FiberFamily<GaussRational>) -> (Vec<Vec<GaussInt>>, BigInt) {
    let mut den = BigInt::one();
    for c in &fam.coeffs_in_t {
        for k in c.coeffs() {
            den = crate::num::lcm_int(&den, k.re.denom());
            den = crate::num::lcm_int(&den, k.im.denom());
        }
    }
    let scaled = fam
        .coeffs_in_t
        .iter()
        .map(|c| {
            c.coeffs()
                .iter()
                .map(|k| GaussInt {
                    re: (&k.re * BigRational::from_integer(den.clone())).to_integer(),
                    im: (&k.im * BigRational::from_integer(den.clone())).to_integer(),
                })
                .collect()
        })
        .collect();
    (scaled, den)
}

/// Evaluate an integer t-polynomial (dense, lowest first) at an integer t.
fn eval_int_poly(coeffs: &[GaussInt], t: &GaussInt) -> GaussInt {
    let mut acc = GaussInt::zero();
    for c in coeffs.iter().rev() {
        acc = acc.mul(t).add(c);
    }
    acc
}

/// Sylvester determinant of (g, g') over the Gaussian integers by
/// fraction-free Bareiss elimination.
fn bareiss_discriminant(g: &[GaussInt]) -> GaussInt {
    let d = g.len() - 1;
    let dg: Vec<GaussInt> = g
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| {
            let k = GaussInt { re: BigInt::from(k as i64), im: BigInt::zero() };
            c.mul(&k)
        })
        .collect();
    let n = 2 * d - 1;
    let mut m = vec![vec![GaussInt::zero(); n]; n];
    for row in 0..d - 1 {
        for k in 0..=d {
            m[row][row + k] = g[d - k].clone();
        }
    }
    for row in 0..d {
        for k in 0..d {
            m[d - 1 + row][row + k] = dg[d - 1 - k].clone();
        }
    }
    bareiss_determinant(m)
}

fn bareiss_determinant(mut m: Vec<Vec<GaussInt>>) -> GaussInt {
    let n = m.len();
    let mut sign_flip = false;
    let mut prev = GaussInt::one();
    for k in 0..n {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    sign_flip = !sign_flip;
                }
                None => return GaussInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = m[i][j].mul(&m[k][k]).sub(&m[i][k].mul(&m[k][j]));
                m[i][j] = num.exact_div(&prev);
            }
            m[i][k] = GaussInt::zero();
        }
        prev = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    if sign_flip {
        det.neg()
    } else {
        det
    }
}

/// Newton-form interpolation through (nodes[i], values[i]), exact.
fn newton_interpolate<C: Coeff>(nodes: &[C], values: &[C]) -> UniPoly<C> {
    let n = nodes.len();
    // Divided differences in place.
    let mut dd: Vec<C> = values.to_vec();
    for level in 1..n {
        for i in (level..n).rev() {
            let num = dd[i].sub_ref(&dd[i - 1]);
            let den = nodes[i].sub_ref(&nodes[i - level]);
            dd[i] = num.div_ref(&den);
        }
    }
    // Horner expansion of the Newton form.
    let mut p = UniPoly::zero();
    for i in (0..n).rev() {
        let lin = UniPoly::from_coeffs(vec![nodes[i].neg_ref(), C::one()]);
        p = p.mul(&lin).add(&UniPoly::constant(dd[i].clone()));
    }
    p
}

/// Floating analogue of [`discriminant_in_t`]: evaluation at roots of unity
/// and inverse DFT. Fallback path for inexact inputs.
pub fn discriminant_in_t_float(fam: &FiberFamily<Complex64>) -> Result<UniPoly<Complex64>> {
    let d = fam.deg_lambda();
    if d < 1 {
        return Err(Error::DegenerateResultantInput);
    }
    if d == 1 {
        return Ok(UniPoly::constant(Complex64::new(1.0, 0.0)));
    }
    let row_deg = fam.deg_t();
    let n = (2 * d - 1) * row_deg + 1;
    let values: Vec<Complex64> = (0..n)
        .map(|j| {
            let theta = 2.0 * std::f64::consts::PI * (j as f64) / (n as f64);
            let t = Complex64::from_polar(1.0, theta);
            discriminant_resultant(&fam.at_t(&t))
        })
        .collect::<Result<_>>()?;
    // c_k = (1/n) sum_j values[j] * exp(-2 pi i j k / n)
    let coeffs: Vec<Complex64> = (0..n)
        .map(|k| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, v) in values.iter().enumerate() {
                let theta = -2.0 * std::f64::consts::PI * (j as f64) * (k as f64) / (n as f64);
                acc += v * Complex64::from_polar(1.0, theta);
            }
            acc / (n as f64)
        })
        .collect();
    // Suppress DFT noise relative to the largest coefficient.
    let maxc = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let cleaned = coeffs
        .into_iter()
        .map(|c| if c.norm() < 1e-11 * maxc { Complex64::new(0.0, 0.0) } else { c })
        .collect();
    Ok(UniPoly::from_coeffs(cleaned))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::GaussRational as Q;

    fn q(n: i64) -> Q {
        Q::from_ints(n, 0)
    }

    #[test]
    fn shared_root_gives_zero() {
        let g = UniPoly::from_coeffs(vec![q(-1), q(0), q(1)]); // t^2 - 1
        let h = UniPoly::from_coeffs(vec![q(-1), q(1)]); // t - 1
        assert!(resultant(&g, &h).unwrap().is_zero());
    }

    #[test]
    fn hand_computed_three_by_three() {
        // Res(t^2 - 1, t) via the pinned convention is -1.
        let g = UniPoly::from_coeffs(vec![q(-1), q(0), q(1)]);
        let h = UniPoly::from_coeffs(vec![q(0), q(1)]);
        assert_eq!(resultant(&g, &h).unwrap(), q(-1));
    }

    #[test]
    fn linear_sign_convention() {
        // Res(t - a, t - b) = a - b with a = 3, b = 5.
        let g = UniPoly::from_coeffs(vec![q(-3), q(1)]);
        let h = UniPoly::from_coeffs(vec![q(-5), q(1)]);
        assert_eq!(resultant(&g, &h).unwrap(), q(-2));
    }

    #[test]
    fn degenerate_inputs_rejected() {
        let g = UniPoly::from_coeffs(vec![q(-1), q(0), q(1)]);
        let konst = UniPoly::constant(q(2));
        assert!(matches!(resultant(&g, &konst), Err(Error::DegenerateResultantInput)));
        assert!(matches!(resultant(&g, &UniPoly::zero()), Err(Error::DegenerateResultantInput)));
    }

    #[test]
    fn fermat_discriminant_in_t() {
        // g_t(lambda) = lambda^4 + (1 + t^4):
        // Res(g, g') = 256 (1 + t^4)^3, checked coefficientwise.
        let fam = FiberFamily {
            coeffs_in_t: vec![
                UniPoly::from_coeffs(vec![q(1), q(0), q(0), q(0), q(1)]), // 1 + t^4
                UniPoly::zero(),
                UniPoly::zero(),
                UniPoly::zero(),
                UniPoly::constant(q(1)),
            ],
        };
        let disc = discriminant_in_t(&fam).unwrap();
        let one_plus_t4 = UniPoly::from_coeffs(vec![q(1), q(0), q(0), q(0), q(1)]);
        let expected = one_plus_t4.pow(3).scale(&q(256));
        assert_eq!(disc, expected);
    }

    #[test]
    fn conic_discriminant_in_t() {
        // g_t(lambda) = 1 + t^2 - lambda^2: disc vanishes exactly at t = +-i.
        let fam = FiberFamily {
            coeffs_in_t: vec![
                UniPoly::from_coeffs(vec![q(1), q(0), q(1)]),
                UniPoly::zero(),
                UniPoly::constant(q(-1)),
            ],
        };
        let disc = discriminant_in_t(&fam).unwrap();
        assert!(disc.eval(&Q::from_ints(0, 1)).is_zero());
        assert!(disc.eval(&Q::from_ints(0, -1)).is_zero());
        assert!(!disc.eval(&q(0)).is_zero());
        assert_eq!(disc.degree(), 2);
    }

    #[test]
    fn float_discriminant_matches_exact() {
        let fam_exact = FiberFamily {
            coeffs_in_t: vec![
                UniPoly::from_coeffs(vec![q(1), q(2), q(0), q(1)]),
                UniPoly::from_coeffs(vec![q(0), q(3)]),
                UniPoly::from_coeffs(vec![q(2), q(0), q(-1)]),
                UniPoly::constant(q(5)),
            ],
        };
        let exact = discriminant_in_t(&fam_exact).unwrap();
        let fam_float = FiberFamily {
            coeffs_in_t: fam_exact.coeffs_in_t.iter().map(|c| c.to_c64()).collect(),
        };
        let float = discriminant_in_t_float(&fam_float).unwrap();
        assert_eq!(float.degree(), exact.degree());
        for k in 0..=exact.degree() {
            let diff = (exact.coeff(k).to_c64() - float.coeff(k)).norm();
            assert!(diff < 1e-6 * (1.0 + exact.coeff(k).abs_est()), "coeff {k} differs by {diff}");
        }
    }
}
