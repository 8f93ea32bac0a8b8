//! Focal schemes of n-parameter families of lines in P^(n+1).
//!
//! A family is given by n hyperplane covectors a_i(u) with polynomial
//! dependence on the parameters, or by a point/direction pair p(u), q(u)
//! converted internally to such covectors. On the line x(lambda) = p +
//! lambda q, the focal polynomial is the determinant of the n x n matrix
//! with entries (d a_i / d u_k)(u) . x(lambda); its roots with
//! multiplicities are the focal spectrum, of total degree n once the foci
//! at the chart's infinity (the degree drop) are counted.

use crate::config::Config;
use crate::error::{Error, Result};
use crate::num::{Coeff, GaussRational};
use crate::poly::{
    parse_poly, roots_with_multiplicity, MultiPoly, RootCluster, RootOpts, UniPoly, VarScheme,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyMode {
    Hyperplanes,
    PointDirection,
}

/// An n-parameter family of lines in P^(n+1).
#[derive(Clone, Debug)]
pub struct LineFamilyChart {
    pub n: usize,
    pub mode: FamilyMode,
    /// n covectors of length n+2, entries polynomial in the n parameters.
    hyperplanes: Vec<Vec<MultiPoly<GaussRational>>>,
    /// Exact partials d a_i / d u_k, precomputed.
    partials: Vec<Vec<Vec<MultiPoly<GaussRational>>>>,
    /// Present in point-direction mode: the defining maps.
    point_direction: Option<(Vec<MultiPoly<GaussRational>>, Vec<MultiPoly<GaussRational>>)>,
}

impl LineFamilyChart {
    /// Build from n hyperplane covector maps.
    pub fn from_hyperplanes(n: usize, hyperplanes: Vec<Vec<MultiPoly<GaussRational>>>) -> Result<Self> {
        if hyperplanes.len() != n {
            return Err(Error::Config(format!("expected {n} hyperplanes, got {}", hyperplanes.len())));
        }
        for a in &hyperplanes {
            if a.len() != n + 2 {
                return Err(Error::Config(format!(
                    "hyperplane covectors must have {} components, got {}",
                    n + 2,
                    a.len()
                )));
            }
            for comp in a {
                if comp.num_vars() != n {
                    return Err(Error::Config("covector entries must be polynomials in the n parameters".into()));
                }
            }
        }
        let partials = compute_partials(&hyperplanes, n);
        Ok(LineFamilyChart { n, mode: FamilyMode::Hyperplanes, hyperplanes, partials, point_direction: None })
    }

    /// Build from a base-point map p(u) and direction map q(u); the n
    /// hyperplanes through the line are generated from the 2x2 minors of
    /// [p; q] (generalized cross products on coordinate triples).
    pub fn from_point_direction(
        n: usize,
        p: Vec<MultiPoly<GaussRational>>,
        q: Vec<MultiPoly<GaussRational>>,
    ) -> Result<Self> {
        let dim = n + 2;
        if p.len() != dim || q.len() != dim {
            return Err(Error::Config(format!("p and q must have {dim} components")));
        }
        for comp in p.iter().chain(q.iter()) {
            if comp.num_vars() != n {
                return Err(Error::Config("p, q entries must be polynomials in the n parameters".into()));
            }
        }
        // minor(a, b) = p_a q_b - p_b q_a
        let minor = |a: usize, b: usize| -> MultiPoly<GaussRational> {
            p[a].mul(&q[b]).sub(&p[b].mul(&q[a]))
        };
        // Choose the anchor pair (i0, i1) whose minor is largest at a fixed
        // reference sample, for generic independence of the covectors.
        let reference: Vec<GaussRational> =
            (0..n).map(|j| GaussRational::from_ratio(1, 2 + j as i64)).collect();
        let mut best: Option<((usize, usize), f64)> = None;
        for i0 in 0..dim {
            for i1 in i0 + 1..dim {
                let mag = minor(i0, i1).eval(&reference)?.abs_est();
                if best.map_or(true, |(_, m)| mag > m) {
                    best = Some(((i0, i1), mag));
                }
            }
        }
        let ((i0, i1), best_mag) = best.expect("dim >= 2");
        if best_mag == 0.0 {
            return Err(Error::DegenerateChart);
        }
        let mut hyperplanes = Vec::with_capacity(n);
        for k in (0..dim).filter(|&k| k != i0 && k != i1) {
            // covector supported on {i0, i1, k}:
            // c_{i0} = minor(i1, k), c_{i1} = -minor(i0, k), c_k = minor(i0, i1)
            let mut cov = vec![MultiPoly::zero(n); dim];
            cov[i0] = minor(i1, k);
            cov[i1] = minor(i0, k).neg();
            cov[k] = minor(i0, i1);
            hyperplanes.push(cov);
        }
        let partials = compute_partials(&hyperplanes, n);
        Ok(LineFamilyChart {
            n,
            mode: FamilyMode::PointDirection,
            hyperplanes,
            partials,
            point_direction: Some((p, q)),
        })
    }

    /// The line of the family at a parameter sample, as a (point, direction)
    /// pair of ambient vectors.
    pub fn line_at(&self, u: &[Complex64]) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
        if u.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: u.len() });
        }
        if let Some((p, q)) = &self.point_direction {
            let pv: Vec<Complex64> = p.iter().map(|c| c.to_c64().eval(u)).collect::<Result<_>>()?;
            let qv: Vec<Complex64> = q.iter().map(|c| c.to_c64().eval(u)).collect::<Result<_>>()?;
            let qn = qv.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if qn < 1e-12 {
                return Err(Error::DegenerateChart);
            }
            return Ok((pv, qv));
        }
        // Hyperplane mode: two-dimensional kernel of the n x (n+2) matrix.
        let rows: Vec<Vec<Complex64>> = self
            .hyperplanes
            .iter()
            .map(|cov| cov.iter().map(|c| c.to_c64().eval(u)).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        let kernel = complex_kernel(&rows, self.n + 2);
        if kernel.len() != 2 {
            return Err(Error::DegenerateChart);
        }
        let mut it = kernel.into_iter();
        Ok((it.next().unwrap(), it.next().unwrap()))
    }

    /// Evaluated covectors at the sample; errors when they are dependent.
    fn covectors_at(&self, u: &[Complex64]) -> Result<Vec<Vec<Complex64>>> {
        let rows: Vec<Vec<Complex64>> = self
            .hyperplanes
            .iter()
            .map(|cov| cov.iter().map(|c| c.to_c64().eval(u)).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        if rank(&rows) < self.n {
            return Err(Error::DegenerateChart);
        }
        Ok(rows)
    }
}

fn compute_partials(
    hyperplanes: &[Vec<MultiPoly<GaussRational>>],
    n: usize,
) -> Vec<Vec<Vec<MultiPoly<GaussRational>>>> {
    hyperplanes
        .iter()
        .map(|cov| {
            (0..n)
                .map(|k| cov.iter().map(|c| c.partial(k).expect("param index in range")).collect())
                .collect()
        })
        .collect()
}

fn rank(rows: &[Vec<Complex64>]) -> usize {
    let mut m: Vec<Vec<Complex64>> = rows.to_vec();
    let nrows = m.len();
    if nrows == 0 {
        return 0;
    }
    let ncols = m[0].len();
    let scale = m
        .iter()
        .flat_map(|r| r.iter())
        .map(|c| c.norm())
        .fold(0.0, f64::max)
        .max(1e-300);
    let mut r = 0;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        let p = (r..nrows).max_by(|&a, &b| m[a][c].norm().partial_cmp(&m[b][c].norm()).unwrap()).unwrap();
        if m[p][c].norm() <= 1e-10 * scale {
            continue;
        }
        m.swap(r, p);
        for i in r + 1..nrows {
            let f = m[i][c] / m[r][c];
            for j in c..ncols {
                let s = m[r][j] * f;
                m[i][j] -= s;
            }
        }
        r += 1;
    }
    r
}

/// Kernel basis of a full-rank n x (n+2) matrix (expects nullity 2).
fn complex_kernel(rows: &[Vec<Complex64>], cols: usize) -> Vec<Vec<Complex64>> {
    let nrows = rows.len();
    let mut m: Vec<Vec<Complex64>> = rows.to_vec();
    let scale = m
        .iter()
        .flat_map(|r| r.iter())
        .map(|c| c.norm())
        .fold(0.0, f64::max)
        .max(1e-300);
    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == nrows {
            break;
        }
        let p = (r..nrows).max_by(|&a, &b| m[a][c].norm().partial_cmp(&m[b][c].norm()).unwrap()).unwrap();
        if m[p][c].norm() <= 1e-10 * scale {
            continue;
        }
        m.swap(r, p);
        let inv = m[r][c].inv();
        for j in 0..cols {
            m[r][j] *= inv;
        }
        for i in 0..nrows {
            if i != r && m[i][c].norm() > 0.0 {
                let f = m[i][c];
                for j in 0..cols {
                    let s = m[r][j] * f;
                    m[i][j] -= s;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let mut basis = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Complex64::new(0.0, 0.0); cols];
        v[free] = Complex64::new(1.0, 0.0);
        for (row, &pc) in pivots.iter().enumerate() {
            v[pc] = -m[row][free];
        }
        // normalize
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        for c in v.iter_mut() {
            *c /= norm;
        }
        basis.push(v);
    }
    basis
}

/// The focal polynomial on one line with its clustered roots.
#[derive(Clone, Debug, Serialize)]
pub struct FocalSpectrum {
    /// Focal polynomial coefficients, lowest degree first, scaled so the
    /// largest magnitude is 1.
    pub focal_coeffs: Vec<[f64; 2]>,
    pub clusters: Vec<RootCluster>,
    /// n - deg(focal_poly): foci at the chart's infinity.
    pub degree_drop: usize,
    #[serde(skip)]
    pub focal_poly: UniPoly<Complex64>,
}

/// Assemble and solve the focal determinant at a parameter sample.
pub fn focal_poly(fam: &LineFamilyChart, u: &[Complex64], cfg: &Config) -> Result<FocalSpectrum> {
    let (p, q) = fam.line_at(u)?;
    focal_poly_on_line(fam, u, &p, &q, cfg)
}

/// Focal determinant with the line parametrization x(lambda) = p + lambda q
/// supplied explicitly (the roots depend on the parametrization; callers
/// comparing charts of the same family must share one).
pub fn focal_poly_on_line(
    fam: &LineFamilyChart,
    u: &[Complex64],
    p: &[Complex64],
    q: &[Complex64],
    cfg: &Config,
) -> Result<FocalSpectrum> {
    let covs = fam.covectors_at(u)?;
    let (p, q) = (p.to_vec(), q.to_vec());
    // The determinant construction needs a_i . x(lambda) = 0 on the line.
    let line_scale = covs
        .iter()
        .flat_map(|c| c.iter())
        .map(|c| c.norm())
        .fold(0.0, f64::max)
        .max(1e-300);
    for cov in &covs {
        let rp: Complex64 = cov.iter().zip(&p).map(|(a, x)| a * x).sum();
        let rq: Complex64 = cov.iter().zip(&q).map(|(a, x)| a * x).sum();
        if rp.norm() > 1e-7 * line_scale || rq.norm() > 1e-7 * line_scale {
            return Err(Error::DegenerateChart);
        }
    }
    // Matrix entries: (d_{u_k} a_i) . p + lambda (d_{u_k} a_i) . q.
    let mut entries: Vec<Vec<UniPoly<Complex64>>> = Vec::with_capacity(fam.n);
    let mut entry_scale = 0.0f64;
    for i in 0..fam.n {
        let mut row = Vec::with_capacity(fam.n);
        for k in 0..fam.n {
            let da: Vec<Complex64> = fam.partials[i][k]
                .iter()
                .map(|c| c.to_c64().eval(u))
                .collect::<Result<_>>()?;
            let c0: Complex64 = da.iter().zip(&p).map(|(a, x)| a * x).sum();
            let c1: Complex64 = da.iter().zip(&q).map(|(a, x)| a * x).sum();
            entry_scale = entry_scale.max(c0.norm()).max(c1.norm());
            row.push(UniPoly::from_coeffs(vec![c0, c1]));
        }
        entries.push(row);
    }
    let det = poly_determinant(&entries);
    let det_scale = det.max_coeff_est();
    if det_scale <= 1e-10 * entry_scale.powi(fam.n as i32) || det.is_zero() {
        return Err(Error::IdenticallyZeroDeterminant);
    }
    let focal = det.normalized();
    let deg = focal.degree();
    let clusters = if deg >= 1 {
        roots_with_multiplicity(&focal, &RootOpts::from_config(cfg))?
    } else {
        Vec::new()
    };
    Ok(FocalSpectrum {
        focal_coeffs: focal.coeffs().iter().map(|c| [c.re, c.im]).collect(),
        clusters,
        degree_drop: fam.n - deg,
        focal_poly: focal,
    })
}

/// Determinant of a small matrix of univariate polynomials by Laplace
/// expansion along the first column.
fn poly_determinant(m: &[Vec<UniPoly<Complex64>>]) -> UniPoly<Complex64> {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = UniPoly::zero();
    for i in 0..n {
        if m[i][0].is_zero() {
            continue;
        }
        let minor: Vec<Vec<UniPoly<Complex64>>> = m
            .iter()
            .enumerate()
            .filter(|(r, _)| *r != i)
            .map(|(_, row)| row[1..].to_vec())
            .collect();
        let sub = poly_determinant(&minor);
        let term = m[i][0].mul(&sub);
        acc = if i % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
    }
    acc
}

/// lambda-coordinate of a projective point on the line x(lambda) = p + lambda q.
///
/// Solved from the best-conditioned coordinate pair; errors when the point
/// is not on the line (collinearity residual).
pub fn lambda_of_point(
    p: &[Complex64],
    q: &[Complex64],
    point: &[Complex64],
) -> Result<Complex64> {
    let dim = p.len();
    let mut best: Option<(f64, Complex64)> = None;
    for a in 0..dim {
        for b in a + 1..dim {
            // (p_a + l q_a) z_b = (p_b + l q_b) z_a
            let denom = q[a] * point[b] - q[b] * point[a];
            let numer = p[b] * point[a] - p[a] * point[b];
            let mag = denom.norm();
            if best.as_ref().map_or(true, |(m, _)| mag > *m) && mag > 0.0 {
                best = Some((mag, numer / denom));
            }
        }
    }
    let (_, lambda) = best.ok_or_else(|| Error::PointNotOnLines(f64::INFINITY))?;
    // collinearity residual of x(lambda) vs point
    let x: Vec<Complex64> = p.iter().zip(q).map(|(pp, qq)| pp + lambda * qq).collect();
    let xs = x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let zs = point.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let mut worst = 0.0f64;
    for a in 0..dim {
        for b in a + 1..dim {
            let minor = x[a] * point[b] - x[b] * point[a];
            worst = worst.max(minor.norm() / (xs * zs).max(1e-300));
        }
    }
    if worst > 1e-6 {
        return Err(Error::PointNotOnLines(worst));
    }
    Ok(lambda)
}

/// Report of a tangency focus check at one sample.
#[derive(Clone, Debug, Serialize)]
pub struct TangencyReport {
    pub lambda: [f64; 2],
    pub focal_residual: f64,
    pub is_focal_root: bool,
    pub contact_order_ge2: bool,
    pub multiplicity_ge2: Option<bool>,
}

/// Check that a tangency point of the family is a focus on its line, and a
/// double focus when the contact order is at least 2.
///
/// `tangency` maps the parameters to the tangency point on X (polynomial
/// components, n parameters, n+2 coordinates).
pub fn tangency_focus_check(
    fam: &LineFamilyChart,
    hypersurface: &MultiPoly<GaussRational>,
    tangency: &[MultiPoly<GaussRational>],
    u: &[Complex64],
    cfg: &Config,
) -> Result<TangencyReport> {
    let (p, q) = fam.line_at(u)?;
    let point: Vec<Complex64> = tangency
        .iter()
        .map(|c| c.to_c64().eval(u))
        .collect::<Result<_>>()?;
    let f = hypersurface.to_c64();
    // Tangency preconditions along the line: h(l) = f(p + l q) has a root
    // of multiplicity >= 2 at lambda(P).
    let lambda = lambda_of_point(&p, &q, &point).map_err(|e| match e {
        Error::PointNotOnLines(r) => Error::NotTangent(format!("tangency point off the line (residual {r:.2e})")),
        other => other,
    })?;
    let h = f.restrict_line(&p, &q)?;
    let hs = h.max_coeff_est().max(1e-300);
    let lam_scale = (1.0 + lambda.norm()).powi(h.degree() as i32);
    let h0 = h.eval(&lambda).norm();
    let h1 = h.derivative().eval(&lambda).norm();
    if h0 > 1e-7 * hs * lam_scale {
        return Err(Error::NotTangent(format!("f does not vanish at the tangency point ({h0:.2e})")));
    }
    if h1 > 1e-7 * hs * lam_scale {
        return Err(Error::NotTangent(format!("line is not tangent at the point ({h1:.2e})")));
    }
    let h2 = h.derivative().derivative().eval(&lambda).norm();
    let contact_order_ge2 = h2 <= 1e-7 * hs * lam_scale;

    let spectrum = focal_poly(fam, u, cfg)?;
    let focal = &spectrum.focal_poly;
    let fs = focal.max_coeff_est().max(1e-300);
    let fscale = fs * (1.0 + lambda.norm()).powi(focal.degree() as i32);
    let focal_residual = focal.eval(&lambda).norm() / fscale;
    let is_focal_root = focal_residual <= 1e-6;
    let multiplicity_ge2 = if contact_order_ge2 {
        let d1 = focal.derivative().eval(&lambda).norm() / fscale.max(1e-300);
        Some(is_focal_root && d1 <= 1e-5)
    } else {
        None
    };
    Ok(TangencyReport {
        lambda: [lambda.re, lambda.im],
        focal_residual,
        is_focal_root,
        contact_order_ge2,
        multiplicity_ge2,
    })
}

/// Report of a fundamental-point multiplicity check.
#[derive(Clone, Debug, Serialize)]
pub struct FundamentalReport {
    pub lambda: [f64; 2],
    pub multiplicity: usize,
    pub passes: bool,
}

/// Verify that a fundamental point Z (all sampled lines pass through it) is
/// a focal root of multiplicity at least k on each sampled line.
pub fn fundamental_multiplicity_check(
    fam: &LineFamilyChart,
    z: &[Complex64],
    k: usize,
    u: &[Complex64],
    cfg: &Config,
) -> Result<FundamentalReport> {
    if k == 0 {
        return Ok(FundamentalReport { lambda: [0.0, 0.0], multiplicity: 0, passes: true });
    }
    let (p, q) = fam.line_at(u)?;
    let lambda = lambda_of_point(&p, &q, z)?;
    let spectrum = focal_poly(fam, u, cfg)?;
    let focal = &spectrum.focal_poly;
    // Multiplicity at lambda by derivative magnitudes of the normalized
    // focal polynomial.
    let mult = crate::poly::derivative_multiplicity(focal, lambda, cfg.confirm_coef);
    Ok(FundamentalReport { lambda: [lambda.re, lambda.im], multiplicity: mult, passes: mult >= k })
}

/// Heuristic order of a point-direction family: the number of parameter
/// solutions u with z on the line l_u, found by seeded multi-start Newton
/// on random combinations of the incidence minors. A lower bound.
#[derive(Clone, Debug, Serialize)]
pub struct OrderReport {
    pub count: usize,
    pub starts: usize,
    pub converged: usize,
    pub verified: usize,
}

pub fn order_of_family(fam: &LineFamilyChart, z: &[Complex64], seed: u64) -> Result<OrderReport> {
    let Some((p, q)) = &fam.point_direction else {
        return Err(Error::Config("order_of_family requires point-direction mode".into()));
    };
    let n = fam.n;
    let dim = n + 2;
    // Symbolic incidence minors: rank [p(u); q(u); z] <= 2.
    let pz: Vec<MultiPoly<Complex64>> = p.iter().map(|c| c.to_c64()).collect();
    let qz: Vec<MultiPoly<Complex64>> = q.iter().map(|c| c.to_c64()).collect();
    let zc: Vec<MultiPoly<Complex64>> = z.iter().map(|&c| MultiPoly::constant(n, c)).collect();
    let mut minors: Vec<MultiPoly<Complex64>> = Vec::new();
    for a in 0..dim {
        for b in a + 1..dim {
            for c in b + 1..dim {
                // det of rows (p,q,z) on columns (a,b,c)
                let det = pz[a]
                    .mul(&qz[b].mul(&zc[c]).sub(&qz[c].mul(&zc[b])))
                    .sub(&pz[b].mul(&qz[a].mul(&zc[c]).sub(&qz[c].mul(&zc[a]))))
                    .add(&pz[c].mul(&qz[a].mul(&zc[b]).sub(&qz[b].mul(&zc[a]))));
                if !det.is_zero() {
                    minors.push(det);
                }
            }
        }
    }
    if minors.is_empty() {
        return Err(Error::DegenerateChart);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // n random complex combinations of the minors form a square system.
    let system: Vec<MultiPoly<Complex64>> = (0..n)
        .map(|_| {
            let mut acc = MultiPoly::zero(n);
            for mpoly in &minors {
                let w = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                acc = acc.add(&mpoly.scale(&w));
            }
            acc
        })
        .collect();
    let jacobian: Vec<Vec<MultiPoly<Complex64>>> = system
        .iter()
        .map(|e| (0..n).map(|k| e.partial(k).expect("param index")).collect())
        .collect();

    let minor_scale = minors.iter().map(|mp| mp.max_coeff_est()).fold(0.0, f64::max).max(1e-300);
    let starts = 64;
    let mut converged = 0;
    let mut solutions: Vec<Vec<Complex64>> = Vec::new();
    let mut verified = 0;
    for s in 0..starts {
        let radius = if s % 4 == 3 { 5.0 } else { 1.5 };
        let mut u: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.gen_range(-radius..radius), rng.gen_range(-radius..radius)))
            .collect();
        let mut ok = false;
        for _ in 0..60 {
            let vals: Vec<Complex64> = system.iter().map(|e| e.eval(&u).unwrap()).collect();
            let jac: Vec<Vec<Complex64>> =
                jacobian.iter().map(|row| row.iter().map(|e| e.eval(&u).unwrap()).collect()).collect();
            let Some(step) = solve_square(&jac, &vals) else { break };
            for (ui, si) in u.iter_mut().zip(&step) {
                *ui -= si;
            }
            if !u.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
                break;
            }
            let step_norm = step.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            let u_norm = u.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if step_norm < 1e-11 * (1.0 + u_norm) {
                ok = true;
                break;
            }
        }
        if !ok {
            continue;
        }
        converged += 1;
        // Verify every minor vanishes (the random combination could have
        // introduced spurious zeros).
        let u_mag = 1.0 + u.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let deg = minors.iter().map(|mp| mp.degree()).max().unwrap_or(1);
        let all_small = minors
            .iter()
            .all(|mp| mp.eval(&u).unwrap().norm() <= 1e-7 * minor_scale * u_mag.powi(deg as i32));
        if !all_small {
            continue;
        }
        verified += 1;
        let duplicate = solutions.iter().any(|sol| {
            sol.iter().zip(&u).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt() < 1e-6 * u_mag
        });
        if !duplicate {
            solutions.push(u);
        }
    }
    Ok(OrderReport { count: solutions.len(), starts, converged, verified })
}

/// Newton step solve J s = v for small complex systems.
fn solve_square(jac: &[Vec<Complex64>], vals: &[Complex64]) -> Option<Vec<Complex64>> {
    let n = vals.len();
    let mut m: Vec<Vec<Complex64>> = (0..n)
        .map(|i| {
            let mut row = jac[i].clone();
            row.push(vals[i]);
            row
        })
        .collect();
    for c in 0..n {
        let p = (c..n).max_by(|&a, &b| m[a][c].norm().partial_cmp(&m[b][c].norm()).unwrap())?;
        if m[p][c].norm() < 1e-300 {
            return None;
        }
        m.swap(c, p);
        for i in c + 1..n {
            let f = m[i][c] / m[c][c];
            for j in c..=n {
                let s = m[c][j] * f;
                m[i][j] -= s;
            }
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for i in (0..n).rev() {
        let mut acc = m[i][n];
        for j in i + 1..n {
            acc -= m[i][j] * x[j];
        }
        x[i] = acc / m[i][i];
    }
    Some(x)
}

/// Parse a family chart from its text form.
///
/// ```text
/// # lines starting with # are comments
/// mode: point-direction        (or: hyperplanes)
/// n: 2
/// p: [0, 0, u1^2, 1]
/// q: [u1, 1, u2, 0]
/// ```
/// Hyperplane mode instead lists `a1: [...]` .. `an: [...]`. Components are
/// polynomials in u1..u4 over the rationals.
pub fn parse_family(text: &str) -> Result<LineFamilyChart> {
    let mut mode: Option<FamilyMode> = None;
    let mut n: Option<usize> = None;
    let mut vectors: Vec<(String, Vec<MultiPoly<GaussRational>>)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once(':') else {
            return Err(Error::Parse {
                line: lineno + 1,
                col: 1,
                msg: "expected `key: value`".into(),
            });
        };
        let key = key.trim();
        let value = value.trim();
        match key {
            "mode" => {
                mode = Some(match value {
                    "point-direction" => FamilyMode::PointDirection,
                    "hyperplanes" => FamilyMode::Hyperplanes,
                    other => {
                        return Err(Error::Parse {
                            line: lineno + 1,
                            col: 1,
                            msg: format!("unknown mode `{other}`"),
                        })
                    }
                });
            }
            "n" => {
                n = Some(value.parse().map_err(|_| Error::Parse {
                    line: lineno + 1,
                    col: 1,
                    msg: "n must be a small integer".into(),
                })?);
            }
            name => {
                let params = n.ok_or_else(|| Error::Parse {
                    line: lineno + 1,
                    col: 1,
                    msg: "declare `n:` before the vectors".into(),
                })?;
                let inner = value
                    .strip_prefix('[')
                    .and_then(|v| v.strip_suffix(']'))
                    .ok_or_else(|| Error::Parse {
                        line: lineno + 1,
                        col: 1,
                        msg: "vector must be bracketed: [..., ...]".into(),
                    })?;
                let comps: Vec<MultiPoly<GaussRational>> = split_top_level(inner)
                    .iter()
                    .map(|part| parse_poly(part, VarScheme::FAMILY, params))
                    .collect::<Result<_>>()?;
                vectors.push((name.to_string(), comps));
            }
        }
    }
    let mode = mode.ok_or_else(|| Error::Parse { line: 1, col: 1, msg: "missing `mode:`".into() })?;
    let n = n.ok_or_else(|| Error::Parse { line: 1, col: 1, msg: "missing `n:`".into() })?;
    if !(1..=4).contains(&n) {
        return Err(Error::Config("n must be between 1 and 4".into()));
    }
    match mode {
        FamilyMode::PointDirection => {
            let p = vectors
                .iter()
                .find(|(k, _)| k == "p")
                .ok_or_else(|| Error::Parse { line: 1, col: 1, msg: "missing `p:`".into() })?
                .1
                .clone();
            let q = vectors
                .iter()
                .find(|(k, _)| k == "q")
                .ok_or_else(|| Error::Parse { line: 1, col: 1, msg: "missing `q:`".into() })?
                .1
                .clone();
            LineFamilyChart::from_point_direction(n, p, q)
        }
        FamilyMode::Hyperplanes => {
            let mut hyperplanes = Vec::new();
            for i in 1..=n {
                let name = format!("a{i}");
                let v = vectors
                    .iter()
                    .find(|(k, _)| *k == name)
                    .ok_or_else(|| Error::Parse { line: 1, col: 1, msg: format!("missing `{name}:`") })?
                    .1
                    .clone();
                hyperplanes.push(v);
            }
            LineFamilyChart::from_hyperplanes(n, hyperplanes)
        }
    }
}

/// Split on commas that are not nested inside parentheses.
fn split_top_level(s: &str) -> Vec<String> {
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' => {
                depth += 1;
                cur.push(ch);
            }
            ')' => {
                depth = depth.saturating_sub(1);
                cur.push(ch);
            }
            ',' if depth == 0 => {
                parts.push(cur.trim().to_string());
                cur = String::new();
            }
            _ => cur.push(ch),
        }
    }
    parts.push(cur.trim().to_string());
    parts
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> Config {
        Config::default()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Star of lines through Q = (0:0:0:1) in P^3.
    fn star_family() -> LineFamilyChart {
        parse_family(
            "mode: point-direction\nn: 2\np: [0, 0, 0, 1]\nq: [1, u1, u2, 0]\n",
        )
        .unwrap()
    }

    /// Join of the skew lines L1 = {x2=x3=0}, L2 = {x0=x1=0} in P^3, with
    /// lambda = 0 on L1 and lambda = 1 on L2.
    fn skew_join_family() -> LineFamilyChart {
        parse_family(
            "mode: point-direction\nn: 2\np: [1, u1, 0, 0]\nq: [-1, -u1, 1, u2]\n",
        )
        .unwrap()
    }

    #[test]
    fn star_spectrum_is_lambda_squared() {
        let fam = star_family();
        let u = [c(0.3, 0.1), c(-0.7, 0.45)];
        let spec = focal_poly(&fam, &u, &cfg()).unwrap();
        assert_eq!(spec.degree_drop, 0);
        assert_eq!(spec.clusters.len(), 1);
        assert_eq!(spec.clusters[0].multiplicity, 2);
        assert!(spec.clusters[0].center.norm() < 1e-7, "double focus at the star point");
    }

    #[test]
    fn skew_join_spectrum_is_zero_and_one() {
        let fam = skew_join_family();
        let u = [c(0.4, -0.2), c(1.1, 0.3)];
        let spec = focal_poly(&fam, &u, &cfg()).unwrap();
        assert_eq!(spec.degree_drop, 0);
        assert_eq!(spec.clusters.len(), 2);
        let mut roots: Vec<Complex64> = spec.clusters.iter().map(|cl| cl.center).collect();
        roots.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        assert!((roots[0] - c(0.0, 0.0)).norm() < 1e-8);
        assert!((roots[1] - c(1.0, 0.0)).norm() < 1e-8);
        assert!(spec.clusters.iter().all(|cl| cl.multiplicity == 1));
    }

    #[test]
    fn focal_degree_conservation_generic() {
        let fam = skew_join_family();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let u = [
                c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)),
                c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)),
            ];
            let spec = focal_poly(&fam, &u, &cfg()).unwrap();
            let total: usize = spec.clusters.iter().map(|cl| cl.multiplicity).sum();
            assert_eq!(total + spec.degree_drop, 2);
        }
    }

    #[test]
    fn chart_at_infinity_has_degree_drop() {
        // Lines through Q with Q placed at the chart's infinity:
        // x(lambda) = A(u) + lambda Q.
        let fam = parse_family(
            "mode: point-direction\nn: 2\np: [1, u1, u2, 0]\nq: [0, 0, 0, 1]\n",
        )
        .unwrap();
        let u = [c(0.2, 0.5), c(-0.4, 0.1)];
        let spec = focal_poly(&fam, &u, &cfg()).unwrap();
        assert_eq!(spec.degree_drop, 2, "both foci sit at the star point at infinity");
        assert!(spec.clusters.is_empty());
    }

    #[test]
    fn fundamental_point_of_star_has_multiplicity_two() {
        let fam = star_family();
        let z = [c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        let rep = fundamental_multiplicity_check(&fam, &z, 2, &[c(0.25, 0.1), c(0.5, -0.3)], &cfg()).unwrap();
        assert!(rep.passes);
        assert_eq!(rep.multiplicity, 2);
    }

    #[test]
    fn fundamental_point_on_skew_line_subfamily() {
        // Z on L1 at u1 = 0.5: lines of the subfamily u1 fixed pass through Z.
        let fam = skew_join_family();
        let z = [c(1.0, 0.0), c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        for u2 in [c(0.3, 0.2), c(-1.0, 0.5), c(2.0, -0.7)] {
            let rep = fundamental_multiplicity_check(&fam, &z, 1, &[c(0.5, 0.0), u2], &cfg()).unwrap();
            assert!(rep.passes);
        }
        // vacuous k = 0
        let rep = fundamental_multiplicity_check(&fam, &z, 0, &[c(0.5, 0.0), c(0.3, 0.2)], &cfg()).unwrap();
        assert!(rep.passes);
        // a point not on the lines errors
        let off = [c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)];
        let err = fundamental_multiplicity_check(&fam, &off, 1, &[c(0.5, 0.0), c(0.3, 0.2)], &cfg());
        assert!(matches!(err, Err(Error::PointNotOnLines(_))));
    }

    #[test]
    fn order_of_star_is_one() {
        let fam = star_family();
        let z = [c(1.3, 0.2), c(0.4, -0.5), c(-0.8, 0.1), c(0.6, 0.9)];
        let rep = order_of_family(&fam, &z, 11).unwrap();
        assert_eq!(rep.count, 1);
    }

    #[test]
    fn order_of_skew_join_is_one() {
        let fam = skew_join_family();
        let z = [c(0.9, 0.1), c(-0.3, 0.6), c(1.2, -0.4), c(0.5, 0.3)];
        let rep = order_of_family(&fam, &z, 13).unwrap();
        assert_eq!(rep.count, 1);
    }

    #[test]
    fn order_of_conic_line_join_is_two() {
        // Conic {(1 : t : 0 : t^2)} in the plane x2 = 0, joined to the line
        // {(0 : 1 : s : 0)} = {x0 = x3 = 0}; through a general point pass
        // deg(conic) * deg(line) = 2 lines.
        let fam = parse_family(
            "mode: point-direction\nn: 2\np: [1, u1, 0, u1^2]\nq: [-1, 1 - u1, u2, -(u1^2)]\n",
        )
        .unwrap();
        let z = [c(0.8, 0.3), c(-0.45, 0.9), c(1.1, -0.6), c(0.25, 0.75)];
        let rep = order_of_family(&fam, &z, 17).unwrap();
        assert_eq!(rep.count, 2);
    }

    #[test]
    fn chart_invariance_under_unimodular_recombination() {
        // Replace (a1, a2) by (a1 + c(u) a2, a2): determinant scales by a
        // unit, so the focal roots are unchanged.
        let base = skew_join_family();
        let u = [c(0.37, -0.21), c(0.83, 0.44)];
        let spec_base = focal_poly(&base, &u, &cfg()).unwrap();

        let mixer = parse_poly("1 + u1*u2 - u2^2", VarScheme::FAMILY, 2).unwrap();
        let a1 = base.hyperplanes[0].clone();
        let a2 = base.hyperplanes[1].clone();
        let mixed: Vec<MultiPoly<GaussRational>> =
            a1.iter().zip(&a2).map(|(x, y)| x.add(&y.mul(&mixer))).collect();
        let fam2 = LineFamilyChart::from_hyperplanes(2, vec![mixed, a2]).unwrap();
        // Same line, same parametrization: roots must agree exactly.
        let (p, q) = base.line_at(&u).unwrap();
        let spec_mixed = focal_poly_on_line(&fam2, &u, &p, &q, &cfg()).unwrap();

        assert_eq!(spec_base.clusters.len(), spec_mixed.clusters.len());
        for (a, b) in spec_base.clusters.iter().zip(&spec_mixed.clusters) {
            assert!((a.center - b.center).norm() < 1e-8);
            assert_eq!(a.multiplicity, b.multiplicity);
        }
    }

    #[test]
    fn reparametrization_invariance() {
        // u -> (2 u1 + 1/3 u2 + 1/2, u2 - u1) is invertible affine.
        let base = skew_join_family();
        let (p, q) = base.point_direction.clone().unwrap();
        let sub: Vec<MultiPoly<GaussRational>> = vec![
            parse_poly("2*u1 + 1/3*u2 + 1/2", VarScheme::FAMILY, 2).unwrap(),
            parse_poly("u2 - u1", VarScheme::FAMILY, 2).unwrap(),
        ];
        let p2: Vec<MultiPoly<GaussRational>> = p.iter().map(|c| c.compose(&sub).unwrap()).collect();
        let q2: Vec<MultiPoly<GaussRational>> = q.iter().map(|c| c.compose(&sub).unwrap()).collect();
        let fam2 = LineFamilyChart::from_point_direction(2, p2, q2).unwrap();

        // w chosen so that sub(w) = u
        let w = [c(0.1, 0.05), c(0.52, -0.33)];
        let u = [
            c(2.0, 0.0) * w[0] + c(1.0 / 3.0, 0.0) * w[1] + c(0.5, 0.0),
            w[1] - w[0],
        ];
        let spec_u = focal_poly(&base, &u, &cfg()).unwrap();
        let spec_w = focal_poly(&fam2, &w, &cfg()).unwrap();
        assert_eq!(spec_u.clusters.len(), spec_w.clusters.len());
        for (a, b) in spec_u.clusters.iter().zip(&spec_w.clusters) {
            assert!((a.center - b.center).norm() < 1e-8, "{} vs {}", a.center, b.center);
            assert_eq!(a.multiplicity, b.multiplicity);
        }
    }

    #[test]
    fn non_filling_family_has_identically_zero_determinant() {
        // The lines depend on u1 only; the u2 column of the focal matrix
        // vanishes, which must be reported rather than averaged away.
        let fam = parse_family(
            "mode: point-direction\nn: 2\np: [1, u1, 0, 0]\nq: [-1, -u1, 1, 1]\n",
        )
        .unwrap();
        let err = focal_poly(&fam, &[c(0.4, 0.1), c(0.7, -0.2)], &cfg());
        assert!(matches!(err, Err(Error::IdenticallyZeroDeterminant)));
    }

    #[test]
    fn non_tangent_family_rejected() {
        // The quadric x0^2 + x1^2 + x2^2 - x3^2 with a family that is not
        // tangent: generic star lines through an exterior point.
        let quadric = crate::poly::parse_hypersurface("x0^2 + x1^2 + x2^2 - x3^2").unwrap();
        let fam = star_family();
        // claim the (false) tangency point is p(u) itself
        let tangency: Vec<MultiPoly<GaussRational>> = vec![
            MultiPoly::constant(2, GaussRational::from_ints(0, 0)),
            MultiPoly::constant(2, GaussRational::from_ints(0, 0)),
            MultiPoly::constant(2, GaussRational::from_ints(0, 0)),
            MultiPoly::constant(2, GaussRational::from_ints(1, 0)),
        ];
        let err = tangency_focus_check(&fam, &quadric, &tangency, &[c(0.3, 0.0), c(0.2, 0.0)], &cfg());
        assert!(matches!(err, Err(Error::NotTangent(_))));
    }
}
