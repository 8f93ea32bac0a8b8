//! End-to-end point classification: uniform / non-uniform / Galois /
//! decomposable verdicts from section monodromy, cone detection, and
//! candidate generation from tangent cones.
//!
//! Section groups only bound the true monodromy from below, so a full
//! symmetric section certifies uniformity, while a non-uniform verdict
//! requires every section to agree on the same conjugacy-invariant group
//! signature. Fibers of different sections carry incompatible labelings;
//! generators are never merged across sections.

use crate::config::Config;
use crate::error::{Error, Result};
use crate::groups::{GroupFlags, Perm, PermGroup};
use crate::monodromy::monodromy_generators;
use crate::num::{Coeff, GaussRational};
use crate::pencil::{build_pencil, make_center, tangent_cone, Form, HPoint, ProjCenter};
use crate::poly::MultiPoly;
use rayon::prelude::*;
use serde::Serialize;

/// Outcome of one section's monodromy run.
#[derive(Clone, Debug, Serialize)]
pub struct SectionOutcome {
    pub seed: u64,
    pub order: u128,
    pub flags: GroupFlags,
    /// Sorted sizes of the minimal block systems found.
    pub block_sizes: Vec<usize>,
    /// Generator permutations in one-line notation (finite loops then, if
    /// branched there, the loop at infinity).
    pub generators: Vec<Vec<usize>>,
    pub cycle_types: Vec<Vec<usize>>,
    /// Per-loop records: branch index, permutation, cycle type, steps,
    /// max residual.
    pub loops: Vec<crate::monodromy::LoopResult>,
    pub infinity_loop: Option<crate::monodromy::LoopResult>,
    pub product_identity: bool,
    /// True when every loop at a branch line off the singular locus passed
    /// cycle-type certification (always true for successful runs).
    pub certified: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Uniform,
    NonUniform,
    Inconclusive,
}

/// Classification of one projection center.
#[derive(Clone, Debug, Serialize)]
pub struct MonodromyReport {
    pub center: Vec<[f64; 2]>,
    pub degree: usize,
    /// Dimension of the hypersurface (ambient projective dimension minus 1).
    pub dim: usize,
    pub verdict: Verdict,
    pub galois: bool,
    pub decomposable: bool,
    pub contains_transposition: Option<bool>,
    /// Flags are section-level evidence when dim >= 2 (subgroup bound only).
    pub section_evidence_only: bool,
    pub sections: Vec<SectionOutcome>,
    pub failures: Vec<String>,
}

/// Conjugacy-invariant signature used for cross-section agreement.
fn signature(s: &SectionOutcome) -> (u128, bool, bool, bool, bool, Option<bool>, Vec<usize>) {
    (
        s.order,
        s.flags.is_full_symmetric,
        s.flags.is_alternating,
        s.flags.is_regular,
        s.flags.is_primitive,
        s.flags.contains_transposition,
        s.block_sizes.clone(),
    )
}

fn run_section(f: &Form, center: &ProjCenter, seed: u64, cfg: &Config) -> Result<SectionOutcome> {
    let chart = build_pencil(f, center, seed, cfg)?;
    let gens = monodromy_generators(&chart, seed ^ 0x9e37_79b9, cfg)?;
    let perms: Vec<Perm> = gens.permutations();
    let group = PermGroup::new(chart.d, perms);
    let flags = group.classify()?;
    let blocks = group.minimal_blocks()?;
    let mut block_sizes: Vec<usize> = blocks.iter().map(|b| b.block_size()).collect();
    block_sizes.sort_unstable();
    let mut generators: Vec<Vec<usize>> = gens.loops.iter().map(|l| l.permutation.clone()).collect();
    let mut cycle_types: Vec<Vec<usize>> = gens.loops.iter().map(|l| l.cycle_type.clone()).collect();
    if let Some(inf) = &gens.infinity {
        generators.push(inf.permutation.clone());
        cycle_types.push(inf.cycle_type.clone());
    }
    Ok(SectionOutcome {
        seed,
        order: flags.order,
        flags,
        block_sizes,
        generators,
        cycle_types,
        product_identity: gens.product_identity,
        certified: true,
        infinity_loop: gens.infinity.clone(),
        loops: gens.loops,
    })
}

/// Classify one exterior point by the monodromy of its projection.
pub fn classify_point(f: &Form, point: &HPoint, cfg: &Config) -> Result<MonodromyReport> {
    let center = make_center(f, point, cfg)?;
    let degree = f.degree() as usize;
    if degree < 2 {
        return Err(Error::Config("degree must be at least 2".into()));
    }
    if degree > cfg.max_degree {
        return Err(Error::Config(format!(
            "degree {degree} exceeds the configured cap {}",
            cfg.max_degree
        )));
    }
    if f.num_vars() < 3 {
        return Err(Error::Config("the hypersurface must live in at least P^2 (3 variables)".into()));
    }
    let dim = f.num_vars() - 2;
    let k = if dim <= 1 { 1 } else { cfg.sections };

    let outcomes: Vec<std::result::Result<SectionOutcome, String>> = (0..k)
        .into_par_iter()
        .map(|s| {
            let base_seed = cfg.seed.wrapping_add((s as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
            let mut last_err: Option<Error> = None;
            for attempt in 0..cfg.section_retry_cap.max(1) {
                let seed = base_seed.wrapping_add(1000 * attempt as u64);
                match run_section(f, &center, seed, cfg) {
                    Ok(out) => return Ok(out),
                    Err(e) => last_err = Some(e),
                }
            }
            Err(format!("section {s}: {}", last_err.expect("at least one attempt")))
        })
        .collect();
    let mut sections = Vec::new();
    let mut failures = Vec::new();
    for o in outcomes {
        match o {
            Ok(s) => sections.push(s),
            Err(e) => failures.push(e),
        }
    }
    if sections.is_empty() {
        return Err(Error::PathTrackingFailure {
            segment: 0,
            reason: format!("all sections failed: {}", failures.join("; ")),
            residual: f64::NAN,
        });
    }

    let uniform = sections.iter().any(|s| s.flags.is_full_symmetric);
    let all_succeeded = sections.len() == k;
    let agree = all_succeeded
        && sections.windows(2).all(|w| signature(&w[0]) == signature(&w[1]));

    let verdict = if uniform {
        Verdict::Uniform
    } else if agree {
        Verdict::NonUniform
    } else {
        Verdict::Inconclusive
    };

    let (galois, decomposable, contains_transposition) = if verdict == Verdict::NonUniform {
        let s0 = &sections[0];
        (s0.flags.is_regular, !s0.block_sizes.is_empty(), s0.flags.contains_transposition)
    } else if verdict == Verdict::Uniform {
        (false, false, Some(true))
    } else {
        (false, false, None)
    };

    Ok(MonodromyReport {
        center: point.to_c64().iter().map(|c| [c.re, c.im]).collect(),
        degree,
        dim,
        verdict,
        galois,
        decomposable,
        contains_transposition,
        section_evidence_only: dim >= 2 && verdict == Verdict::NonUniform,
        sections,
        failures,
    })
}

/// Result of the exact cone test.
#[derive(Clone, Debug)]
pub struct ConeCheck {
    pub is_cone: bool,
    pub vertex: Option<Vec<GaussRational>>,
}

/// Decide whether the hypersurface is a cone by solving the linear system
/// "directional derivative along v vanishes identically" over Q(i).
///
/// The derivative sum_i v_i df/dx_i is linear in v; its coefficient matrix
/// (rows: monomials, columns: variables) has a nontrivial kernel exactly
/// when a vertex exists, and any kernel vector is one.
pub fn cone_check(f: &MultiPoly<GaussRational>) -> ConeCheck {
    let m = f.num_vars();
    let partials: Vec<MultiPoly<GaussRational>> = f.gradient();
    // Collect the union of monomial supports.
    let mut rows: Vec<Vec<u32>> = Vec::new();
    for p in &partials {
        for (e, _) in p.terms() {
            if !rows.contains(e) {
                rows.push(e.clone());
            }
        }
    }
    rows.sort();
    let zero = GaussRational::from_ints(0, 0);
    let mut matrix: Vec<Vec<GaussRational>> = rows
        .iter()
        .map(|e| {
            (0..m)
                .map(|i| {
                    partials[i]
                        .terms()
                        .find(|(ei, _)| *ei == e)
                        .map(|(_, c)| c.clone())
                        .unwrap_or_else(|| zero.clone())
                })
                .collect()
        })
        .collect();
    let kernel = nullspace(&mut matrix, m);
    match kernel.into_iter().next() {
        Some(v) => {
            debug_assert!({
                let mut dir = MultiPoly::zero(m);
                for (i, c) in v.iter().enumerate() {
                    dir = dir.add(&partials[i].scale(c));
                }
                dir.is_zero()
            });
            ConeCheck { is_cone: true, vertex: Some(v) }
        }
        None => ConeCheck { is_cone: false, vertex: None },
    }
}

/// Exact nullspace basis of a (rows x cols) matrix over Q(i).
fn nullspace(matrix: &mut [Vec<GaussRational>], cols: usize) -> Vec<Vec<GaussRational>> {
    let rows = matrix.len();
    let mut pivot_col_of_row = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let pivot = (r..rows).find(|&i| !Coeff::is_zero(&matrix[i][c]));
        let Some(p) = pivot else { continue };
        matrix.swap(r, p);
        let inv = GaussRational::from_ints(1, 0).div_ref(&matrix[r][c]);
        for x in matrix[r].clone().iter().enumerate() {
            matrix[r][x.0] = x.1.mul_ref(&inv);
        }
        for i in 0..rows {
            if i != r && !Coeff::is_zero(&matrix[i][c]) {
                let factor = matrix[i][c].clone();
                for j in 0..cols {
                    let s = matrix[r][j].mul_ref(&factor);
                    matrix[i][j] = matrix[i][j].sub_ref(&s);
                }
            }
        }
        pivot_col_of_row.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    let pivot_cols: Vec<usize> = pivot_col_of_row.clone();
    let mut basis = Vec::new();
    for free in (0..cols).filter(|c| !pivot_cols.contains(c)) {
        let mut v = vec![GaussRational::from_ints(0, 0); cols];
        v[free] = GaussRational::from_ints(1, 0);
        for (row, &pc) in pivot_col_of_row.iter().enumerate() {
            v[pc] = matrix[row][free].neg_ref();
        }
        basis.push(v);
    }
    basis
}

/// Candidate centers worth scanning: coordinate points, user-supplied
/// points, and points on linear components of tangent cones at singular
/// points found on the coordinate simplex — all off the hypersurface,
/// deduplicated projectively.
pub fn candidate_points(
    f: &MultiPoly<GaussRational>,
    user_points: &[Vec<GaussRational>],
    limit: usize,
) -> Vec<Vec<GaussRational>> {
    let m = f.num_vars();
    let mut out: Vec<Vec<GaussRational>> = Vec::new();
    let mut seen: Vec<Vec<GaussRational>> = Vec::new();

    let push = |p: Vec<GaussRational>, out: &mut Vec<Vec<GaussRational>>, seen: &mut Vec<Vec<GaussRational>>| {
        if out.len() >= limit {
            return;
        }
        let Some(norm) = normalize_projective(&p) else { return };
        if seen.contains(&norm) {
            return;
        }
        if let Ok(v) = f.eval(&norm) {
            if !Coeff::is_zero(&v) {
                seen.push(norm.clone());
                out.push(norm);
            }
        }
    };

    for p in user_points {
        push(p.clone(), &mut out, &mut seen);
    }
    for i in 0..m {
        let mut e = vec![GaussRational::from_ints(0, 0); m];
        e[i] = GaussRational::from_ints(1, 0);
        push(e, &mut out, &mut seen);
    }

    // Singular sample points on the coordinate simplex feed the
    // tangent-cone construction.
    let grad = f.gradient();
    let mut singular_samples: Vec<Vec<GaussRational>> = Vec::new();
    for i in 0..m {
        let mut e = vec![GaussRational::from_ints(0, 0); m];
        e[i] = GaussRational::from_ints(1, 0);
        let on_x = f.eval(&e).map(|v| Coeff::is_zero(&v)).unwrap_or(false);
        if on_x && grad.iter().all(|g| Coeff::is_zero(&g.eval(&e).unwrap())) {
            singular_samples.push(e);
        }
    }
    for p in user_points {
        let on_x = f.eval(p).map(|v| Coeff::is_zero(&v)).unwrap_or(false);
        if on_x && grad.iter().all(|g| Coeff::is_zero(&g.eval(p).unwrap())) {
            singular_samples.push(p.clone());
        }
    }

    let samples: Vec<GaussRational> = [1i64, -1, 2, -2, 3, -3]
        .iter()
        .map(|&n| GaussRational::from_ints(n, 0))
        .chain([(1i64, 2i64), (-1, 2), (3, 2)].iter().map(|&(n, d)| GaussRational::from_ratio(n, d)))
        .collect();
    for p in &singular_samples {
        let Ok(cone) = tangent_cone(f, p) else { continue };
        if cone.multiplicity < 2 {
            continue;
        }
        for dir in linear_cone_directions(&cone.cone_form, cone.chart_var, m) {
            for s in &samples {
                let candidate: Vec<GaussRational> = (0..m)
                    .map(|i| cone.at_point[i].add_ref(&s.mul_ref(&dir[i])))
                    .collect();
                push(candidate, &mut out, &mut seen);
            }
        }
    }
    out
}

fn normalize_projective(p: &[GaussRational]) -> Option<Vec<GaussRational>> {
    let lead = p.iter().find(|c| !Coeff::is_zero(*c))?;
    Some(p.iter().map(|c| c.div_ref(lead)).collect())
}

/// Directions of the linear components of a tangent cone, embedded back
/// into the ambient coordinates. Covers single-monomial forms (a power of
/// one coordinate hyperplane) and binary quadratics that split over Q(i).
fn linear_cone_directions(
    cone_form: &MultiPoly<GaussRational>,
    chart_var: usize,
    ambient: usize,
) -> Vec<Vec<GaussRational>> {
    let local_vars = ambient - 1;
    let embed = |local: Vec<GaussRational>| -> Vec<GaussRational> {
        let mut v = vec![GaussRational::from_ints(0, 0); ambient];
        let mut li = 0;
        for (i, slot) in v.iter_mut().enumerate() {
            if i != chart_var {
                *slot = local[li].clone();
                li += 1;
            }
        }
        v
    };

    // A binary quadratic a y_i^2 + b y_i y_j + c y_j^2 splits by the
    // quadratic formula when its discriminant is a square in Q(i).
    if local_vars == 2 && cone_form.degree() == 2 {
        let coeff_of = |ei: u32, ej: u32| {
            cone_form
                .terms()
                .find(|(e, _)| e[0] == ei && e[1] == ej)
                .map(|(_, c)| c.clone())
                .unwrap_or_else(|| GaussRational::from_ints(0, 0))
        };
        let a = coeff_of(2, 0);
        let b = coeff_of(1, 1);
        let c = coeff_of(0, 2);
        let two = GaussRational::from_ints(2, 0);
        let four = GaussRational::from_ints(4, 0);
        if Coeff::is_zero(&a) && Coeff::is_zero(&c) {
            // b y0 y1: the two coordinate lines
            return vec![
                embed(vec![GaussRational::from_ints(1, 0), GaussRational::from_ints(0, 0)]),
                embed(vec![GaussRational::from_ints(0, 0), GaussRational::from_ints(1, 0)]),
            ];
        }
        let disc = b.mul_ref(&b).sub_ref(&four.mul_ref(&a.mul_ref(&c)));
        if let Some(root) = disc.sqrt_exact() {
            // Lines through the origin: a y0^2 + b y0 y1 + c y1^2 =
            // a (y0 - r1 y1)(y0 - r2 y1) with r = (-b +- sqrt)/2a.
            if !Coeff::is_zero(&a) {
                let r1 = b.neg_ref().add_ref(&root).div_ref(&two.mul_ref(&a));
                let r2 = b.neg_ref().sub_ref(&root).div_ref(&two.mul_ref(&a));
                // direction (y0, y1) = (r, 1)
                let mut dirs = vec![embed(vec![r1.clone(), GaussRational::from_ints(1, 0)])];
                if r1 != r2 {
                    dirs.push(embed(vec![r2, GaussRational::from_ints(1, 0)]));
                }
                return dirs;
            }
            // a = 0, c != 0: factors y1 (b y0 + c y1)
            let mut dirs = vec![embed(vec![GaussRational::from_ints(1, 0), GaussRational::from_ints(0, 0)])];
            if !Coeff::is_zero(&b) {
                dirs.push(embed(vec![c.neg_ref(), b.clone()]));
            }
            return dirs;
        }
        return Vec::new();
    }

    // A single monomial prod y_i^{e_i} is a union of coordinate
    // hyperplanes; in any local dimension each factor y_i = 0 contains the
    // coordinate directions y_j, j != i. Only emit lines for 2 local vars.
    if cone_form.num_terms() == 1 && local_vars == 2 {
        let (e, _) = cone_form.terms().next().expect("single term");
        let mut dirs = Vec::new();
        for (i, &ei) in e.iter().enumerate() {
            if ei > 0 {
                // factor y_i = 0: direction along the other variable
                let mut local = vec![GaussRational::from_ints(0, 0); 2];
                local[1 - i] = GaussRational::from_ints(1, 0);
                dirs.push(embed(local));
            }
        }
        return dirs;
    }
    Vec::new()
}

/// Summary counters for a scan.
#[derive(Clone, Debug, Default, Serialize)]
pub struct ScanSummary {
    pub n_uniform: usize,
    pub n_non_uniform: usize,
    pub n_galois: usize,
    pub n_decomposable: usize,
    pub n_inconclusive: usize,
    pub n_failed: usize,
}

#[derive(Debug, Serialize)]
pub struct ScanEntry {
    pub index: usize,
    pub report: Option<MonodromyReport>,
    pub error: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct ScanReport {
    pub entries: Vec<ScanEntry>,
    pub summary: ScanSummary,
}

/// Classify every candidate; per-candidate failures are recorded and the
/// scan continues.
pub fn scan(f: &Form, candidates: &[HPoint], cfg: &Config) -> ScanReport {
    let mut entries: Vec<ScanEntry> = candidates
        .par_iter()
        .enumerate()
        .map(|(index, p)| match classify_point(f, p, cfg) {
            Ok(report) => ScanEntry { index, report: Some(report), error: None },
            Err(e) => ScanEntry { index, report: None, error: Some(e.to_string()) },
        })
        .collect();
    entries.sort_by_key(|e| e.index);
    let mut summary = ScanSummary::default();
    for e in &entries {
        match &e.report {
            Some(r) => {
                match r.verdict {
                    Verdict::Uniform => summary.n_uniform += 1,
                    Verdict::NonUniform => summary.n_non_uniform += 1,
                    Verdict::Inconclusive => summary.n_inconclusive += 1,
                }
                if r.galois {
                    summary.n_galois += 1;
                }
                if r.decomposable {
                    summary.n_decomposable += 1;
                }
            }
            None => summary.n_failed += 1,
        }
    }
    ScanReport { entries, summary }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_hypersurface;

    fn cfg() -> Config {
        Config::default()
    }

    fn pt(coords: &[i64]) -> HPoint {
        HPoint::Exact(coords.iter().map(|&r| GaussRational::from_ints(r, 0)).collect())
    }

    #[test]
    fn fermat_quartic_center_is_galois_and_decomposable() {
        let f = Form::Exact(parse_hypersurface("x0^4 + x1^4 + x2^4").unwrap());
        let report = classify_point(&f, &pt(&[1, 0, 0]), &cfg()).unwrap();
        assert_eq!(report.verdict, Verdict::NonUniform);
        assert_eq!(report.sections[0].order, 4);
        assert!(report.galois);
        assert!(report.decomposable);
        assert_eq!(report.sections[0].block_sizes, vec![2]);
        assert_eq!(report.contains_transposition, Some(false));
    }

    #[test]
    fn fermat_quintic_center_is_galois_not_decomposable() {
        let f = Form::Exact(parse_hypersurface("x0^5 + x1^5 + x2^5").unwrap());
        let report = classify_point(&f, &pt(&[1, 0, 0]), &cfg()).unwrap();
        assert_eq!(report.verdict, Verdict::NonUniform);
        assert_eq!(report.sections[0].order, 5);
        assert!(report.galois);
        assert!(!report.decomposable);
    }

    #[test]
    fn conic_is_uniform() {
        let f = Form::Exact(parse_hypersurface("x0^2 + x1^2 - x2^2").unwrap());
        let report = classify_point(&f, &pt(&[0, 0, 1]), &cfg()).unwrap();
        assert_eq!(report.verdict, Verdict::Uniform);
        assert_eq!(report.sections[0].order, 2);
    }

    #[test]
    fn cone_checks() {
        // cone over a plane quartic, vertex (0:0:0:1)
        let f = {
            let base = parse_hypersurface("x0^4 + x1^4 + x2^4 + x0*x1^2*x2").unwrap();
            let imgs: Vec<MultiPoly<GaussRational>> = (0..3).map(|i| MultiPoly::var(4, i)).collect();
            base.compose(&imgs).unwrap()
        };
        let check = cone_check(&f);
        assert!(check.is_cone);
        let v = check.vertex.unwrap();
        assert!(Coeff::is_zero(&v[0]) && Coeff::is_zero(&v[1]) && Coeff::is_zero(&v[2]));
        assert!(!Coeff::is_zero(&v[3]));

        // Fermat quartic threefold is not a cone
        let f = parse_hypersurface("x0^4 + x1^4 + x2^4 + x3^4").unwrap();
        assert!(!cone_check(&f).is_cone);

        // (x0+x1)^4 + x2^4 in 4 variables: vertex plane {x0+x1=0, x2=0}
        let f = parse_hypersurface("(x0 + x1)^4 + x2^4").unwrap();
        let f4 = {
            let imgs: Vec<MultiPoly<GaussRational>> = (0..3).map(|i| MultiPoly::var(4, i)).collect();
            f.compose(&imgs).unwrap()
        };
        let check = cone_check(&f4);
        assert!(check.is_cone);
        let v = check.vertex.unwrap();
        assert!(Coeff::is_zero(&v[0].add_ref(&v[1])));
        assert!(Coeff::is_zero(&v[2]));
    }

    #[test]
    fn candidates_for_fermat_include_coordinate_points() {
        let f = parse_hypersurface("x0^4 + x1^4 + x2^4").unwrap();
        let cands = candidate_points(&f, &[], 16);
        assert!(cands.len() >= 3);
        for c in &cands {
            assert!(!Coeff::is_zero(&f.eval(c).unwrap()));
        }
    }

    #[test]
    fn candidates_for_nodal_cubic_lie_on_cone_lines() {
        // node at (0:0:1), tangent cone x1^2 - x0^2 = (x1-x0)(x1+x0)
        let f = parse_hypersurface("x1^2*x2 - x0^2*(x0 + x2)").unwrap();
        let cands = candidate_points(&f, &[], 32);
        // the node is a coordinate point, so cone-line candidates appear
        let on_cone_lines = cands.iter().filter(|p| {
            // cone lines through (0:0:1): x1 = x0 or x1 = -x0
            p[0] == p[1] || p[0] == p[1].neg_ref()
        });
        assert!(on_cone_lines.count() >= 4, "expected candidates on the node's cone lines");
        for c in &cands {
            assert!(!Coeff::is_zero(&f.eval(c).unwrap()));
        }
    }

    #[test]
    fn empty_scan_is_empty() {
        let f = Form::Exact(parse_hypersurface("x0^2 + x1^2 - x2^2").unwrap());
        let report = scan(&f, &[], &cfg());
        assert!(report.entries.is_empty());
        assert_eq!(report.summary.n_uniform, 0);
    }
}
