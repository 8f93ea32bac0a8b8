//! Dense univariate polynomials, lowest degree first.

use crate::num::Coeff;
use num_complex::Complex64;
use std::fmt;

/// Coefficients stored lowest-degree first; trailing zeros are trimmed so
/// the leading coefficient of a nonzero polynomial is never zero.
#[derive(Clone, PartialEq)]
pub struct UniPoly<C: Coeff> {
    coeffs: Vec<C>,
}

impl<C: Coeff> UniPoly<C> {
    pub fn zero() -> Self {
        UniPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: C) -> Self {
        Self::from_coeffs(vec![c])
    }

    pub fn from_coeffs(coeffs: Vec<C>) -> Self {
        let mut p = UniPoly { coeffs };
        p.trim();
        p
    }

    fn trim(&mut self) {
        while matches!(self.coeffs.last(), Some(c) if c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> C {
        self.coeffs.get(k).cloned().unwrap_or_else(C::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree of the trimmed polynomial. The zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> Option<&C> {
        self.coeffs.last()
    }

    pub fn max_coeff_est(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs_est()).fold(0.0, f64::max)
    }

    pub fn eval(&self, x: &C) -> C {
        let mut acc = C::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul_ref(x).add_ref(c);
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c.mul_ref(&C::from_i64(k as i64)))
            .collect();
        Self::from_coeffs(coeffs)
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n).map(|k| self.coeff(k).add_ref(&rhs.coeff(k))).collect();
        Self::from_coeffs(coeffs)
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n).map(|k| self.coeff(k).sub_ref(&rhs.coeff(k))).collect();
        Self::from_coeffs(coeffs)
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![C::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] = coeffs[i + j].add_ref(&a.mul_ref(b));
            }
        }
        Self::from_coeffs(coeffs)
    }

    pub fn scale(&self, c: &C) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|k| k.mul_ref(c)).collect())
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut result = Self::constant(C::one());
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

    /// Euclidean division; returns (quotient, remainder). Panics on a zero
    /// divisor. Field coefficients make this exact in exact mode.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        assert!(!divisor.is_zero(), "division by zero polynomial");
        if self.degree() < divisor.degree() || self.is_zero() {
            return (Self::zero(), self.clone());
        }
        let mut rem = self.coeffs.clone();
        let dlead = divisor.leading().unwrap().clone();
        let ddeg = divisor.degree();
        let mut quot = vec![C::zero(); self.degree() - ddeg + 1];
        for k in (0..quot.len()).rev() {
            let r = rem[k + ddeg].clone();
            if r.is_zero() {
                continue;
            }
            let q = r.div_ref(&dlead);
            for (j, dc) in divisor.coeffs.iter().enumerate() {
                let sub = q.mul_ref(dc);
                rem[k + j] = rem[k + j].sub_ref(&sub);
            }
            quot[k] = q;
        }
        (Self::from_coeffs(quot), Self::from_coeffs(rem))
    }

    pub fn to_c64(&self) -> UniPoly<Complex64> {
        UniPoly::from_coeffs(self.coeffs.iter().map(|c| c.to_c64()).collect())
    }
}

impl UniPoly<crate::num::GaussRational> {
    /// Monic gcd via the primitive pseudo-remainder sequence over the
    /// Gaussian integers. Content is stripped at every step, which is what
    /// keeps the coefficient growth of the Euclidean chain linear.
    pub fn gcd(&self, rhs: &Self) -> Self {
        use crate::num::GaussRational;
        let mut a = int_primitive(self);
        let mut b = int_primitive(rhs);
        if a.len() < b.len() {
            std::mem::swap(&mut a, &mut b);
        }
        while !b.is_empty() {
            let r = pseudo_rem(&a, &b);
            a = b;
            b = strip_content(r);
        }
        let rational = UniPoly::from_coeffs(a.iter().map(|c| c.to_rational()).collect());
        match rational.leading().cloned() {
            Some(lead) => rational.scale(&GaussRational::from_ints(1, 0).div_ref(&lead)),
            None => rational,
        }
    }

    /// Divide out gcd(p, p'): same roots, all simple.
    pub fn square_free_part(&self) -> Self {
        if self.degree() < 2 {
            return self.clone();
        }
        let g = self.gcd(&self.derivative());
        if g.degree() == 0 {
            return self.clone();
        }
        let (q, _) = self.div_rem(&g);
        q
    }

    /// Yun's square-free decomposition: returns pairwise-coprime monic
    /// square-free factors with their multiplicities, so that the input is
    /// a unit times the product of factor^multiplicity.
    pub fn square_free_decomposition(&self) -> Vec<(Self, usize)> {
        use crate::num::{Coeff, GaussRational};
        let mut out = Vec::new();
        if self.degree() < 1 {
            return out;
        }
        let deriv = self.derivative();
        let g = self.gcd(&deriv);
        if g.degree() == 0 {
            let lead = self.leading().unwrap().clone();
            out.push((self.scale(&GaussRational::from_ints(1, 0).div_ref(&lead)), 1));
            return out;
        }
        let (mut c, _) = self.div_rem(&g);
        let (dg, _) = deriv.div_rem(&g);
        let mut d = dg.sub(&c.derivative());
        let mut i = 1;
        while c.degree() >= 1 {
            let a = c.gcd(&d);
            if a.degree() >= 1 {
                out.push((a.clone(), i));
            }
            let (c_next, _) = c.div_rem(&a);
            let (dq, _) = d.div_rem(&a);
            d = dq.sub(&c_next.derivative());
            c = c_next;
            i += 1;
        }
        out
    }
}

/// Gaussian-integer primitive form of a rational polynomial (lowest first);
/// empty means zero.
fn int_primitive(p: &UniPoly<crate::num::GaussRational>) -> Vec<crate::num::GaussInt> {
    use crate::num::{lcm_int, GaussInt};
    use num_bigint::BigInt;
    use num_traits::One;
    let mut den = BigInt::one();
    for c in p.coeffs() {
        den = lcm_int(&den, c.re.denom());
        den = lcm_int(&den, c.im.denom());
    }
    let ints: Vec<GaussInt> = p
        .coeffs()
        .iter()
        .map(|c| GaussInt {
            re: (&c.re * num_rational::BigRational::from_integer(den.clone())).to_integer(),
            im: (&c.im * num_rational::BigRational::from_integer(den.clone())).to_integer(),
        })
        .collect();
    strip_content(ints)
}

fn strip_content(mut v: Vec<crate::num::GaussInt>) -> Vec<crate::num::GaussInt> {
    use crate::num::{gauss_gcd, GaussInt};
    while matches!(v.last(), Some(c) if c.is_zero()) {
        v.pop();
    }
    let mut content = GaussInt::zero();
    for c in &v {
        content = gauss_gcd(&content, c);
        if content == GaussInt::one() {
            return v;
        }
    }
    if content.is_zero() {
        return v;
    }
    v.into_iter().map(|c| c.exact_div(&content)).collect()
}

/// Pseudo-remainder of a by b over the Gaussian integers: a scalar multiple
/// of (a mod b) computed without fractions. Scale factors do not matter to
/// the gcd because content is stripped afterwards.
fn pseudo_rem(
    a: &[crate::num::GaussInt],
    b: &[crate::num::GaussInt],
) -> Vec<crate::num::GaussInt> {
    use crate::num::GaussInt;
    debug_assert!(!b.is_empty());
    let db = b.len() - 1;
    let lb = b.last().unwrap().clone();
    let mut r: Vec<GaussInt> = a.to_vec();
    loop {
        while matches!(r.last(), Some(c) if c.is_zero()) {
            r.pop();
        }
        if r.len() <= db {
            return r;
        }
        let lr = r.last().unwrap().clone();
        let k = (r.len() - 1) - db;
        // r <- lb * r - lr * b * x^k; the top coefficient cancels.
        for c in r.iter_mut() {
            *c = c.mul(&lb);
        }
        for (j, bc) in b.iter().enumerate() {
            let s = lr.mul(bc);
            r[k + j] = r[k + j].sub(&s);
        }
        debug_assert!(r.last().unwrap().is_zero());
        r.pop();
    }
}

impl UniPoly<Complex64> {
    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut p = Self::constant(Complex64::new(1.0, 0.0));
        for r in roots {
            p = p.mul(&Self::from_coeffs(vec![-r, Complex64::new(1.0, 0.0)]));
        }
        p
    }

    /// Rescale so the max coefficient magnitude is 1. No-op on zero input.
    pub fn normalized(&self) -> Self {
        let m = self.max_coeff_est();
        if m == 0.0 {
            return self.clone();
        }
        self.scale(&Complex64::new(1.0 / m, 0.0))
    }
}

impl<C: Coeff> fmt::Display for UniPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}*t")?,
                _ => write!(f, "{c}*t^{k}")?,
            }
        }
        Ok(())
    }
}

impl<C: Coeff> fmt::Debug for UniPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::GaussRational;

    fn q(n: i64) -> GaussRational {
        GaussRational::from_ints(n, 0)
    }

    #[test]
    fn trim_and_degree() {
        let p = UniPoly::from_coeffs(vec![q(1), q(2), q(0), q(0)]);
        assert_eq!(p.degree(), 1);
        assert_eq!(p.coeffs().len(), 2);
        assert!(UniPoly::from_coeffs(vec![q(0)]).is_zero());
    }

    #[test]
    fn div_rem_exact() {
        // (t^2 - 1) = (t - 1)(t + 1)
        let p = UniPoly::from_coeffs(vec![q(-1), q(0), q(1)]);
        let d = UniPoly::from_coeffs(vec![q(-1), q(1)]);
        let (quot, rem) = p.div_rem(&d);
        assert!(rem.is_zero());
        assert_eq!(quot.coeffs(), &[q(1), q(1)]);
    }

    #[test]
    fn gcd_and_square_free() {
        // p = (t-1)^2 (t+2)
        let a = UniPoly::from_coeffs(vec![q(-1), q(1)]);
        let b = UniPoly::from_coeffs(vec![q(2), q(1)]);
        let p = a.mul(&a).mul(&b);
        let g = p.gcd(&p.derivative());
        assert_eq!(g.degree(), 1);
        let sf = p.square_free_part();
        assert_eq!(sf.degree(), 2);
        // sf vanishes at both roots
        assert!(sf.eval(&q(1)).is_zero());
        assert!(sf.eval(&q(-2)).is_zero());
    }

    #[test]
    fn eval_horner() {
        let p = UniPoly::from_coeffs(vec![q(3), q(-2), q(1)]); // 3 - 2t + t^2
        assert_eq!(p.eval(&q(2)), q(3));
    }

    #[test]
    fn yun_reconstructs_random_factorizations() {
        use crate::num::Coeff;
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..40 {
            // random distinct Gaussian-rational roots with multiplicities
            let k = rng.gen_range(1..=4);
            let mut factors: Vec<(UniPoly<GaussRational>, usize)> = Vec::new();
            let mut used: Vec<GaussRational> = Vec::new();
            for _ in 0..k {
                let root = GaussRational::new(
                    num_rational::BigRational::new(rng.gen_range(-9i64..=9).into(), rng.gen_range(1i64..=4).into()),
                    num_rational::BigRational::new(rng.gen_range(-9i64..=9).into(), rng.gen_range(1i64..=4).into()),
                );
                if used.contains(&root) {
                    continue;
                }
                used.push(root.clone());
                let lin = UniPoly::from_coeffs(vec![root.neg_ref(), q(1)]);
                factors.push((lin, rng.gen_range(1..=3)));
            }
            let mut p = UniPoly::constant(GaussRational::from_ints(rng.gen_range(1..=5), rng.gen_range(-2..=2)));
            for (lin, m) in &factors {
                p = p.mul(&lin.pow(*m as u32));
            }
            let dec = p.square_free_decomposition();
            // reconstruct and compare up to the leading unit
            let mut rebuilt = UniPoly::constant(q(1));
            for (f, m) in &dec {
                rebuilt = rebuilt.mul(&f.pow(*m as u32));
            }
            let lead = p.leading().unwrap().clone();
            assert_eq!(rebuilt.scale(&lead), p, "Yun must reconstruct the input up to its leading unit");
            // multiplicities match the construction
            let mut expected: Vec<usize> = factors.iter().map(|(_, m)| *m).collect();
            expected.sort_unstable();
            let mut got: Vec<usize> = dec.iter().flat_map(|(f, m)| vec![*m; f.degree()]).collect();
            got.sort_unstable();
            assert_eq!(got, expected);
        }
    }

    #[test]
    fn yun_decomposition() {
        // p = 5 (t-1) (t+2)^2 (t-3)^3
        let l1 = UniPoly::from_coeffs(vec![q(-1), q(1)]);
        let l2 = UniPoly::from_coeffs(vec![q(2), q(1)]);
        let l3 = UniPoly::from_coeffs(vec![q(-3), q(1)]);
        let p = l1.mul(&l2.pow(2)).mul(&l3.pow(3)).scale(&q(5));
        let dec = p.square_free_decomposition();
        assert_eq!(dec.len(), 3);
        assert_eq!(dec[0], (l1.clone(), 1));
        assert_eq!(dec[1], (l2.clone(), 2));
        assert_eq!(dec[2], (l3.clone(), 3));
        // square-free input comes back as one factor
        let dec = l1.mul(&l3).square_free_decomposition();
        assert_eq!(dec.len(), 1);
        assert_eq!(dec[0].1, 1);
        assert_eq!(dec[0].0.degree(), 2);
    }
}
