//! Sparse multivariate polynomials.

use crate::error::{Error, Result};
use crate::num::Coeff;
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::fmt;

use super::uni::UniPoly;

/// A sparse multivariate polynomial: exponent vector -> nonzero coefficient.
///
/// The map is ordered so that iteration, display, and hashing into reports
/// are deterministic. No stored coefficient is zero and every exponent
/// vector has length `num_vars`.
#[derive(Clone, PartialEq)]
pub struct MultiPoly<C: Coeff> {
    num_vars: usize,
    terms: BTreeMap<Vec<u32>, C>,
}

impl<C: Coeff> MultiPoly<C> {
    pub fn zero(num_vars: usize) -> Self {
        MultiPoly { num_vars, terms: BTreeMap::new() }
    }

    pub fn constant(num_vars: usize, c: C) -> Self {
        let mut p = Self::zero(num_vars);
        p.add_term(vec![0; num_vars], c);
        p
    }

    pub fn var(num_vars: usize, idx: usize) -> Self {
        assert!(idx < num_vars);
        let mut exps = vec![0; num_vars];
        exps[idx] = 1;
        let mut p = Self::zero(num_vars);
        p.add_term(exps, C::one());
        p
    }

    pub fn from_terms(num_vars: usize, terms: impl IntoIterator<Item = (Vec<u32>, C)>) -> Self {
        let mut p = Self::zero(num_vars);
        for (e, c) in terms {
            assert_eq!(e.len(), num_vars, "exponent vector length mismatch");
            p.add_term(e, c);
        }
        p
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &C)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Max total degree over stored terms; 0 for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum::<u32>()).max().unwrap_or(0)
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(|e| e.iter().sum::<u32>());
        match degs.next() {
            None => true,
            Some(d) => degs.all(|x| x == d),
        }
    }

    /// Coefficient max-norm estimate.
    pub fn max_coeff_est(&self) -> f64 {
        self.terms.values().map(|c| c.abs_est()).fold(0.0, f64::max)
    }

    pub fn add_term(&mut self, exps: Vec<u32>, c: C) {
        if c.is_zero() {
            return;
        }
        debug_assert_eq!(exps.len(), self.num_vars);
        match self.terms.entry(exps) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get().add_ref(&c);
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.num_vars, rhs.num_vars);
        let mut out = self.clone();
        for (e, c) in rhs.terms() {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!(self.num_vars, rhs.num_vars);
        let mut out = self.clone();
        for (e, c) in rhs.terms() {
            out.add_term(e.clone(), c.neg_ref());
        }
        out
    }

    pub fn neg(&self) -> Self {
        MultiPoly {
            num_vars: self.num_vars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c.neg_ref())).collect(),
        }
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return Self::zero(self.num_vars);
        }
        MultiPoly {
            num_vars: self.num_vars,
            terms: self.terms.iter().map(|(e, k)| (e.clone(), k.mul_ref(c))).collect(),
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.num_vars, rhs.num_vars);
        let mut out = Self::zero(self.num_vars);
        for (ea, ca) in self.terms() {
            for (eb, cb) in rhs.terms() {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                out.add_term(e, ca.mul_ref(cb));
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut result = Self::constant(self.num_vars, C::one());
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Value of the polynomial at a point.
    pub fn eval(&self, point: &[C]) -> Result<C> {
        if point.len() != self.num_vars {
            return Err(Error::DimensionMismatch { expected: self.num_vars, got: point.len() });
        }
        let mut acc = C::zero();
        for (exps, c) in self.terms() {
            let mut term = c.clone();
            for (x, &e) in point.iter().zip(exps.iter()) {
                for _ in 0..e {
                    term = term.mul_ref(x);
                }
            }
            acc = acc.add_ref(&term);
        }
        Ok(acc)
    }

    /// Formal partial derivative with respect to variable `var`.
    pub fn partial(&self, var: usize) -> Result<Self> {
        if var >= self.num_vars {
            return Err(Error::VarOutOfRange { var, num_vars: self.num_vars });
        }
        let mut out = Self::zero(self.num_vars);
        for (exps, c) in self.terms() {
            let e = exps[var];
            if e == 0 {
                continue;
            }
            let mut ne = exps.clone();
            ne[var] = e - 1;
            out.add_term(ne, c.mul_ref(&C::from_i64(e as i64)));
        }
        Ok(out)
    }

    pub fn gradient(&self) -> Vec<Self> {
        (0..self.num_vars).map(|i| self.partial(i).expect("var in range")).collect()
    }

    /// Restriction to the parametrized line base + lambda * direction.
    pub fn restrict_line(&self, base: &[C], direction: &[C]) -> Result<UniPoly<C>> {
        if base.len() != self.num_vars || direction.len() != self.num_vars {
            return Err(Error::DimensionMismatch {
                expected: self.num_vars,
                got: base.len().max(direction.len()),
            });
        }
        if direction.iter().all(|c| c.is_zero()) {
            return Err(Error::ZeroDirection);
        }
        let mut acc = UniPoly::zero();
        for (exps, c) in self.terms() {
            let mut term = UniPoly::constant(c.clone());
            for ((b, d), &e) in base.iter().zip(direction).zip(exps.iter()) {
                if e == 0 {
                    continue;
                }
                let lin = UniPoly::from_coeffs(vec![b.clone(), d.clone()]);
                term = term.mul(&lin.pow(e));
            }
            acc = acc.add(&term);
        }
        Ok(acc)
    }

    /// Substitute each variable by the given polynomial image.
    ///
    /// All images must share a variable count; the result lives in that
    /// variable set.
    pub fn compose(&self, images: &[Self]) -> Result<Self> {
        if images.len() != self.num_vars {
            return Err(Error::DimensionMismatch { expected: self.num_vars, got: images.len() });
        }
        let out_vars = images.first().map(|p| p.num_vars).unwrap_or(0);
        assert!(images.iter().all(|p| p.num_vars == out_vars));
        let mut acc = Self::zero(out_vars);
        // Cache successive powers of each image.
        let mut powers: Vec<Vec<Self>> =
            images.iter().map(|p| vec![Self::constant(out_vars, C::one()), p.clone()]).collect();
        for (exps, c) in self.terms() {
            let mut term = Self::constant(out_vars, c.clone());
            for (i, &e) in exps.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let cache = &mut powers[i];
                while cache.len() <= e as usize {
                    let next = cache.last().unwrap().mul(&images[i]);
                    cache.push(next);
                }
                term = term.mul(&cache[e as usize]);
            }
            acc = acc.add(&term);
        }
        Ok(acc)
    }

    /// Restriction to the plane spanned by three frame vectors:
    /// q(s0,s1,s2) = p(s0 v0 + s1 v1 + s2 v2).
    pub fn restrict_plane(&self, frame: &[Vec<C>; 3]) -> Result<Self> {
        for v in frame.iter() {
            if v.len() != self.num_vars {
                return Err(Error::DimensionMismatch { expected: self.num_vars, got: v.len() });
            }
        }
        if !frame_independent(frame) {
            return Err(Error::DependentFrame);
        }
        // x_i = s0 v0[i] + s1 v1[i] + s2 v2[i]
        let images: Vec<MultiPoly<C>> = (0..self.num_vars)
            .map(|i| {
                let mut lin = MultiPoly::zero(3);
                for (s, v) in frame.iter().enumerate() {
                    let mut e = vec![0u32; 3];
                    e[s] = 1;
                    lin.add_term(e, v[i].clone());
                }
                lin
            })
            .collect();
        self.compose(&images)
    }

    /// Lowest-degree nonzero homogeneous part and its degree.
    pub fn lowest_homogeneous_part(&self) -> Option<(u32, Self)> {
        let m = self.terms.keys().map(|e| e.iter().sum::<u32>()).min()?;
        let mut part = Self::zero(self.num_vars);
        for (e, c) in self.terms() {
            if e.iter().sum::<u32>() == m {
                part.add_term(e.clone(), c.clone());
            }
        }
        Some((m, part))
    }

    pub fn to_c64(&self) -> MultiPoly<Complex64> {
        MultiPoly {
            num_vars: self.num_vars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c.to_c64())).collect(),
        }
    }
}

/// Rank test for three frame vectors, exact when the coefficients are exact.
fn frame_independent<C: Coeff>(frame: &[Vec<C>; 3]) -> bool {
    // Gaussian elimination on a 3 x num_vars matrix.
    let mut rows: Vec<Vec<C>> = frame.to_vec();
    let cols = rows[0].len();
    let mut rank = 0;
    for col in 0..cols {
        if rank == 3 {
            break;
        }
        let pivot = (rank..3).max_by(|&a, &b| {
            rows[a][col].abs_est().partial_cmp(&rows[b][col].abs_est()).unwrap()
        });
        let Some(p) = pivot else { break };
        if rows[p][col].is_zero() || (!C::is_exact() && rows[p][col].abs_est() < 1e-12) {
            continue;
        }
        rows.swap(rank, p);
        for r in rank + 1..3 {
            if rows[r][col].is_zero() {
                continue;
            }
            let factor = rows[r][col].div_ref(&rows[rank][col]);
            for c in col..cols {
                let sub = rows[rank][c].mul_ref(&factor);
                rows[r][c] = rows[r][c].sub_ref(&sub);
            }
        }
        rank += 1;
    }
    rank == 3
}

impl<C: Coeff> fmt::Display for MultiPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (exps, c) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{}", c)?;
            for (i, &e) in exps.iter().enumerate() {
                if e == 1 {
                    write!(f, "*x{i}")?;
                } else if e > 1 {
                    write!(f, "*x{i}^{e}")?;
                }
            }
        }
        Ok(())
    }
}

impl<C: Coeff> fmt::Debug for MultiPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::GaussRational;

    type QP = MultiPoly<GaussRational>;

    fn q(n: i64) -> GaussRational {
        GaussRational::from_ints(n, 0)
    }

    /// x0^2 + x1^2 - x2^2
    fn circle() -> QP {
        QP::from_terms(3, vec![
            (vec![2, 0, 0], q(1)),
            (vec![0, 2, 0], q(1)),
            (vec![0, 0, 2], q(-1)),
        ])
    }

    /// x0^4 + x1^4 + x2^4
    fn fermat4() -> QP {
        QP::from_terms(3, vec![
            (vec![4, 0, 0], q(1)),
            (vec![0, 4, 0], q(1)),
            (vec![0, 0, 4], q(1)),
        ])
    }

    #[test]
    fn eval_examples() {
        let p = circle();
        assert_eq!(p.eval(&[q(0), q(0), q(1)]).unwrap(), q(-1));
        assert_eq!(fermat4().eval(&[q(1), q(0), q(0)]).unwrap(), q(1));
        let xy = QP::from_terms(2, vec![(vec![1, 1], q(1))]);
        let err = xy.eval(&[q(3), GaussRational::from_ints(2, 1), q(0)]);
        assert!(matches!(err, Err(Error::DimensionMismatch { expected: 2, got: 3 })));
    }

    #[test]
    fn partial_examples() {
        let x0sq = QP::from_terms(2, vec![(vec![2, 0], q(1))]);
        let d0 = x0sq.partial(0).unwrap();
        assert_eq!(d0, QP::from_terms(2, vec![(vec![1, 0], q(2))]));
        assert!(x0sq.partial(1).unwrap().is_zero());
        let d = fermat4().partial(0).unwrap();
        assert_eq!(d, QP::from_terms(3, vec![(vec![3, 0, 0], q(4))]));
        assert!(matches!(x0sq.partial(5), Err(Error::VarOutOfRange { .. })));
    }

    #[test]
    fn restrict_line_examples() {
        // x^2 + y^2 - 1 along the two axes
        let p = QP::from_terms(2, vec![
            (vec![2, 0], q(1)),
            (vec![0, 2], q(1)),
            (vec![0, 0], q(-1)),
        ]);
        let g = p.restrict_line(&[q(0), q(0)], &[q(1), q(0)]).unwrap();
        assert_eq!(g.coeffs(), &[q(-1), q(0), q(1)]);
        let g = p.restrict_line(&[q(0), q(0)], &[q(0), q(1)]).unwrap();
        assert_eq!(g.coeffs(), &[q(-1), q(0), q(1)]);
        assert!(matches!(
            p.restrict_line(&[q(0), q(0)], &[q(0), q(0)]),
            Err(Error::ZeroDirection)
        ));
        // 1 + y^4 + z^4 along (1,0) from the origin: 1 + lambda^4
        let p = QP::from_terms(2, vec![
            (vec![0, 0], q(1)),
            (vec![4, 0], q(1)),
            (vec![0, 4], q(1)),
        ]);
        let g = p.restrict_line(&[q(0), q(0)], &[q(1), q(0)]).unwrap();
        assert_eq!(g.coeffs(), &[q(1), q(0), q(0), q(0), q(1)]);
    }

    #[test]
    fn restrict_plane_examples() {
        // x0^2+x1^2+x2^2+x3^2 on the first three coordinate vectors
        let p = QP::from_terms(4, vec![
            (vec![2, 0, 0, 0], q(1)),
            (vec![0, 2, 0, 0], q(1)),
            (vec![0, 0, 2, 0], q(1)),
            (vec![0, 0, 0, 2], q(1)),
        ]);
        let e = |i: usize| {
            let mut v = vec![q(0); 4];
            v[i] = q(1);
            v
        };
        let r = p.restrict_plane(&[e(0), e(1), e(2)]).unwrap();
        assert_eq!(r, QP::from_terms(3, vec![
            (vec![2, 0, 0], q(1)),
            (vec![0, 2, 0], q(1)),
            (vec![0, 0, 2], q(1)),
        ]));

        // Fermat quartic in 4 vars with v2 = e2 + e3: s0^4 + s1^4 + 2 s2^4
        let p = QP::from_terms(4, vec![
            (vec![4, 0, 0, 0], q(1)),
            (vec![0, 4, 0, 0], q(1)),
            (vec![0, 0, 4, 0], q(1)),
            (vec![0, 0, 0, 4], q(1)),
        ]);
        let mut v2 = e(2);
        v2[3] = q(1);
        let r = p.restrict_plane(&[e(0), e(1), v2]).unwrap();
        assert_eq!(r, QP::from_terms(3, vec![
            (vec![4, 0, 0], q(1)),
            (vec![0, 4, 0], q(1)),
            (vec![0, 0, 4], q(2)),
        ]));

        // dependent frame rejected
        let err = p.restrict_plane(&[e(0), e(0), e(1)]);
        assert!(matches!(err, Err(Error::DependentFrame)));
    }

    #[test]
    fn homogeneous_restriction_stays_homogeneous() {
        let p = fermat4();
        let frame = [
            vec![q(1), q(2), q(-1)],
            vec![q(0), q(1), q(3)],
            vec![q(2), q(0), q(1)],
        ];
        let r = p.restrict_plane(&frame).unwrap();
        assert!(r.is_homogeneous());
        assert_eq!(r.degree(), 4);
    }

    #[test]
    fn lowest_part_picks_tangent_cone_candidate() {
        // x1^2 - x0^3 - x0^2: lowest part x1^2 - x0^2 of degree 2
        let p = QP::from_terms(2, vec![
            (vec![0, 2], q(1)),
            (vec![3, 0], q(-1)),
            (vec![2, 0], q(-1)),
        ]);
        let (m, part) = p.lowest_homogeneous_part().unwrap();
        assert_eq!(m, 2);
        assert_eq!(part, QP::from_terms(2, vec![(vec![0, 2], q(1)), (vec![2, 0], q(-1))]));
    }
}
