//! Simultaneous root finding (Aberth-Ehrlich) and multiplicity clustering.
//!
//! Multiple roots only reach f64 accuracy ~eps^(1/m), so raw approximants of
//! an m-fold root form a ring far wider than the base cluster tolerance.
//! Grouping therefore runs hierarchically: single-linkage groups at a
//! coarse scale are kept only when a refined center (Newton on the
//! (m-1)-th derivative) leaves machine-level residuals in all lower
//! derivatives, and are re-split at a finer scale otherwise.

use crate::config::Config;
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::Serialize;

use super::uni::UniPoly;

/// A group of nearby roots treated as one point with multiplicity.
#[derive(Clone, Debug, Serialize)]
pub struct RootCluster {
    pub center: Complex64,
    pub multiplicity: usize,
    pub radius: f64,
}

/// Options distilled from [`Config`] for root finding.
#[derive(Clone, Debug)]
pub struct RootOpts {
    pub iter_cap: usize,
    pub tol: f64,
    pub cluster_tol: f64,
    pub merge_scale: f64,
    pub confirm_coef: f64,
}

impl Default for RootOpts {
    fn default() -> Self {
        RootOpts::from_config(&Config::default())
    }
}

impl RootOpts {
    pub fn from_config(cfg: &Config) -> Self {
        RootOpts {
            iter_cap: cfg.root_iter_cap,
            tol: cfg.root_tol,
            cluster_tol: cfg.cluster_tol,
            merge_scale: cfg.merge_scale,
            confirm_coef: cfg.confirm_coef,
        }
    }
}

/// All complex roots of `p` by Aberth-Ehrlich simultaneous iteration.
///
/// Returned in no particular order; multiple roots appear as clusters of
/// nearby approximants.
pub fn all_roots(p: &UniPoly<Complex64>, opts: &RootOpts) -> Result<Vec<Complex64>> {
    if p.degree() < 1 || p.is_zero() {
        return Err(Error::DegreeTooLow(p.degree()));
    }
    let p = p.normalized();
    let n = p.degree();
    let deriv = p.derivative();

    // Initial guesses on a circle at the Cauchy-style root bound, with an
    // irrational angular offset so symmetric polynomials don't stall.
    let lead = p.leading().unwrap().norm();
    let radius = 1.0
        + p.coeffs()[..n]
            .iter()
            .map(|c| (c.norm() / lead).powf(1.0 / (n as f64)))
            .fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * (k as f64) / (n as f64) + 0.437;
            radius * Complex64::new(theta.cos(), theta.sin())
        })
        .collect();

    for _ in 0..opts.iter_cap {
        let mut max_update = 0.0f64;
        for i in 0..n {
            let pz = p.eval(&z[i]);
            let dpz = deriv.eval(&z[i]);
            let newton = if dpz.norm() > 0.0 { pz / dpz } else { pz };
            let mut sum = Complex64::new(0.0, 0.0);
            for j in 0..n {
                if j != i {
                    let diff = z[i] - z[j];
                    if diff.norm() > 1e-300 {
                        sum += diff.inv();
                    }
                }
            }
            let denom = Complex64::new(1.0, 0.0) - newton * sum;
            let step = if denom.norm() > 1e-300 { newton / denom } else { newton };
            z[i] -= step;
            max_update = max_update.max(step.norm() / (1.0 + z[i].norm()));
        }
        if !z.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::RootsDidNotConverge { iterations: opts.iter_cap, max_residual: f64::NAN });
        }
        if max_update < opts.tol {
            return Ok(z);
        }
    }
    // Multiple roots converge linearly and stall at the attainable ring;
    // accept if every approximant is an exact root of a nearby polynomial
    // (small backward error).
    let mut worst_backward = 0.0f64;
    for zi in &z {
        let value_scale: f64 = p
            .coeffs()
            .iter()
            .enumerate()
            .map(|(k, c)| c.norm() * zi.norm().powi(k as i32))
            .sum();
        let be = p.eval(zi).norm() / value_scale.max(f64::MIN_POSITIVE);
        worst_backward = worst_backward.max(be);
    }
    if worst_backward < 1e-9 {
        return Ok(z);
    }
    Err(Error::RootsDidNotConverge { iterations: opts.iter_cap, max_residual: worst_backward })
}

/// Multiplicity suggested by derivative magnitudes at `c`: the smallest k
/// with |p^(k)(c)| > confirm_coef * ||p|| * k!.
pub fn derivative_multiplicity(p: &UniPoly<Complex64>, c: Complex64, confirm_coef: f64) -> usize {
    let norm = p.max_coeff_est();
    let mut d = p.clone();
    let mut factorial = 1.0f64;
    for k in 0..=p.degree() {
        if k > 0 {
            d = d.derivative();
            factorial *= k as f64;
        }
        if d.eval(&c).norm() > confirm_coef * norm * factorial {
            return k;
        }
    }
    p.degree()
}

/// Single-linkage grouping of points at the given absolute scale.
fn single_linkage(points: &[(usize, Complex64)], scale: f64) -> Vec<Vec<(usize, Complex64)>> {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let r = find(parent, parent[i]);
            parent[i] = r;
        }
        parent[i]
    }
    for i in 0..n {
        for j in i + 1..n {
            if (points[i].1 - points[j].1).norm() <= scale {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<(usize, Complex64)>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(points[i]);
    }
    groups.into_values().collect()
}

fn centroid(points: &[(usize, Complex64)]) -> Complex64 {
    let sum: Complex64 = points.iter().map(|(_, z)| z).sum();
    sum / (points.len() as f64)
}

/// Worst-case evaluation magnitude of `p` on the disk |z - c| <= r.
fn value_scale(p: &UniPoly<Complex64>, center: Complex64, r: f64) -> f64 {
    let m = center.norm() + r;
    p.coeffs().iter().enumerate().map(|(j, c)| c.norm() * m.powi(j as i32)).sum()
}

/// Confirm a candidate m-fold root: Newton-refine the center on the
/// (m-1)-th derivative (which has a simple zero at a genuine m-fold root),
/// then require g, g', ..., g^(m-1) to vanish there within evaluation
/// noise. The k = 0 test is what rejects a pair of genuinely separate roots,
/// whose midpoint is a critical point of g but not a root.
fn confirm_multiple(
    derivs: &[UniPoly<Complex64>],
    group: &[(usize, Complex64)],
    base_scale: f64,
) -> Option<Complex64> {
    let m = group.len();
    if m >= derivs.len() {
        return None;
    }
    let c0 = centroid(group);
    let radius = group.iter().map(|(_, z)| (z - c0).norm()).fold(0.0, f64::max);
    let mut c = c0;
    for _ in 0..8 {
        let val = derivs[m - 1].eval(&c);
        let der = derivs[m].eval(&c);
        if der.norm() < 1e-300 {
            return None;
        }
        let step = val / der;
        c -= step;
        if !c.re.is_finite() || !c.im.is_finite() {
            return None;
        }
        if step.norm() < 1e-15 * (1.0 + c.norm()) {
            break;
        }
    }
    if (c - c0).norm() > 4.0 * radius + base_scale {
        return None;
    }
    // A genuine m-fold root (after the caller refined whatever parameter
    // the polynomial depends on) leaves machine-level residuals in every
    // lower derivative, measured against the derivative's magnitude on the
    // unit-scale disk. Separate roots at distance delta leave O(delta^m).
    for deriv in derivs.iter().take(m) {
        if deriv.eval(&c).norm() > 1e-10 * value_scale(deriv, c, 1.0 + c.norm()) {
            return None;
        }
    }
    Some(c)
}

/// Recursive confirm-or-split grouping. Invariant: emitted multiplicities
/// are group cardinalities, so they always sum to the degree.
fn group_confirmed(
    derivs: &[UniPoly<Complex64>],
    points: &[(usize, Complex64)],
    scale: f64,
    floor: f64,
    out: &mut Vec<(Vec<(usize, Complex64)>, Complex64)>,
) {
    for group in single_linkage(points, scale) {
        if group.len() == 1 || scale <= floor {
            let c = centroid(&group);
            out.push((group, c));
            continue;
        }
        match confirm_multiple(derivs, &group, floor) {
            Some(center) => out.push((group, center)),
            None => group_confirmed(derivs, &group, scale / 16.0, floor, out),
        }
    }
}

/// Roots of `p` grouped into clusters with multiplicities.
///
/// Cluster multiplicities always sum to deg(p). Cluster tolerance is
/// relative: the effective base scale is cluster_tol * (1 + max |root|).
pub fn roots_with_multiplicity(p: &UniPoly<Complex64>, opts: &RootOpts) -> Result<Vec<RootCluster>> {
    let roots = all_roots(p, opts)?;
    let pn = p.normalized();
    let scale = 1.0 + roots.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let base = opts.cluster_tol * scale;
    let coarse = (opts.merge_scale * scale).max(base);
    // Derivative ladder of the normalized polynomial, for confirmation.
    let mut derivs = vec![pn.clone()];
    for _ in 0..pn.degree() {
        derivs.push(derivs.last().unwrap().derivative());
    }
    let indexed: Vec<(usize, Complex64)> = roots.iter().copied().enumerate().collect();
    let mut groups = Vec::new();
    group_confirmed(&derivs, &indexed, coarse, base, &mut groups);
    let mut clusters: Vec<RootCluster> = groups
        .into_iter()
        .map(|(g, center)| {
            let radius = g.iter().map(|(_, z)| (z - center).norm()).fold(0.0, f64::max);
            RootCluster { center, multiplicity: g.len(), radius }
        })
        .collect();
    clusters.sort_by(|a, b| {
        (a.center.re, a.center.im)
            .partial_cmp(&(b.center.re, b.center.im))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    debug_assert_eq!(clusters.iter().map(|c| c.multiplicity).sum::<usize>(), p.degree());
    Ok(clusters)
}

/// Sorted multiplicity profile of a clustering, largest first.
pub fn profile(clusters: &[RootCluster]) -> Vec<usize> {
    let mut m: Vec<usize> = clusters.iter().map(|c| c.multiplicity).collect();
    m.sort_unstable_by(|a, b| b.cmp(a));
    m
}
