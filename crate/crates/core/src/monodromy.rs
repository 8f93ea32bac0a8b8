//! Monodromy of the pencil: keyhole loops around branch points, fiber
//! transport by zero-order prediction with Newton correction, permutation
//! extraction, and cycle-type certification against intersection profiles.
//!
//! Loop layout: a base point is chosen on a circle enclosing all branch
//! points, at a seeded angle where every straight spoke clears every other
//! branch point's keyhole disk. Loops are ordered counterclockwise by
//! departure angle, so their composition is homotopic to one large circle;
//! when the projection is unbranched over t = infinity that composition
//! must be the identity.

use crate::config::Config;
use crate::error::{Error, Result};
use crate::groups::Perm;
use crate::pencil::{branch_points, BranchPoint, BranchSet, IntersectionProfile, PencilChart, TChart};
use crate::poly::{all_roots, RootOpts, UniPoly};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

/// One keyhole loop: out along the spoke, once around the circle, back.
#[derive(Clone, Debug)]
pub struct KeyholeLoop {
    pub branch_index: usize,
    pub center: Complex64,
    pub radius: f64,
    /// Closed polyline starting and ending at the base point.
    pub path: Vec<Complex64>,
}

/// The full loop system over the main t-chart.
#[derive(Clone, Debug)]
pub struct LoopSystem {
    pub base_t: Complex64,
    /// Ordered counterclockwise by departure angle from the base point.
    pub loops: Vec<KeyholeLoop>,
    /// Circle enclosing every branch point, for the product relation.
    pub big_circle: Vec<Complex64>,
}

const CIRCLE_SEGMENTS: usize = 24;

/// Build non-crossing keyhole loops around the given branch points.
pub fn build_loops(branch: &[BranchPoint], seed: u64, cfg: &Config) -> Result<LoopSystem> {
    assert!(!branch.is_empty(), "need at least one branch point");
    let min_isolation = branch.iter().map(|b| b.isolation).fold(f64::INFINITY, f64::min);
    if min_isolation < 1e-10 {
        return Err(Error::OverlappingBranchPoints { isolation: min_isolation });
    }
    let centroid = branch.iter().map(|b| b.t).sum::<Complex64>() / (branch.len() as f64);
    let spread = branch
        .iter()
        .map(|b| (b.t - centroid).norm())
        .fold(0.0, f64::max)
        .max(0.5 * min_isolation);

    // Straight spokes cannot always clear full-size keyholes (four branch
    // points in a square already saturate the midline), so shrink the
    // keyhole fraction progressively until an unobstructed base angle shows
    // up.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen: Option<(Complex64, Vec<f64>)> = None;
    'search: for shrink in [1.0, 0.75, 0.5, 0.35, 0.22, 0.15] {
        let radii: Vec<f64> =
            branch.iter().map(|b| cfg.keyhole_frac * shrink * b.isolation).collect();
        for big_factor in [1.35, 1.7, 2.2, 3.0] {
            let big_r = spread * big_factor + 0.5 * min_isolation;
            let mut best: Option<(f64, Complex64)> = None;
            for _ in 0..128 {
                let theta = rng.gen_range(0.0..std::f64::consts::TAU);
                let base = centroid + Complex64::from_polar(big_r, theta);
                if !spokes_clear(base, branch, &radii) {
                    continue;
                }
                let min_dist =
                    branch.iter().map(|b| (b.t - base).norm()).fold(f64::INFINITY, f64::min);
                if best.map_or(true, |(d, _)| min_dist > d) {
                    best = Some((min_dist, base));
                }
            }
            if let Some((_, base)) = best {
                chosen = Some((base, radii));
                break 'search;
            }
        }
    }
    let Some((base, radii)) = chosen else {
        return Err(Error::LoopConstruction(
            "no base point with unobstructed spokes found".into(),
        ));
    };

    let mut order: Vec<usize> = (0..branch.len()).collect();
    order.sort_by(|&a, &b| {
        let ang = |i: usize| (branch[i].t - base).arg();
        ang(a).partial_cmp(&ang(b)).unwrap()
    });

    let loops: Vec<KeyholeLoop> = order
        .into_iter()
        .map(|i| KeyholeLoop {
            branch_index: i,
            center: branch[i].t,
            radius: radii[i],
            path: keyhole_path(base, branch[i].t, radii[i]),
        })
        .collect();

    // Big circle around everything, through the base point, counterclockwise.
    let circle_r = (base - centroid).norm();
    let start_angle = (base - centroid).arg();
    let big_circle: Vec<Complex64> = (0..=4 * CIRCLE_SEGMENTS)
        .map(|k| {
            let a = start_angle + std::f64::consts::TAU * (k as f64) / ((4 * CIRCLE_SEGMENTS) as f64);
            centroid + Complex64::from_polar(circle_r, a)
        })
        .collect();

    Ok(LoopSystem { base_t: base, loops, big_circle })
}

/// Every spoke from `base` must clear every other keyhole disk.
fn spokes_clear(base: Complex64, branch: &[BranchPoint], radii: &[f64]) -> bool {
    for (j, bj) in branch.iter().enumerate() {
        for (k, bk) in branch.iter().enumerate() {
            if j == k {
                continue;
            }
            if segment_distance(base, bj.t, bk.t) < 1.25 * radii[k] {
                return false;
            }
        }
        // The base itself must sit outside every disk with margin.
        if (base - bj.t).norm() < 1.5 * radii[j] {
            return false;
        }
    }
    true
}

fn segment_distance(a: Complex64, b: Complex64, p: Complex64) -> f64 {
    let ab = b - a;
    let len_sq = ab.norm_sqr();
    if len_sq == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a) * ab.conj()).re / len_sq;
    let t = t.clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

fn keyhole_path(base: Complex64, center: Complex64, radius: f64) -> Vec<Complex64> {
    let dir = (base - center) / (base - center).norm();
    let entry = center + dir * radius;
    let mut path = vec![base, entry];
    let start_angle = (entry - center).arg();
    for k in 1..=CIRCLE_SEGMENTS {
        let a = start_angle + std::f64::consts::TAU * (k as f64) / (CIRCLE_SEGMENTS as f64);
        path.push(center + Complex64::from_polar(radius, a));
    }
    path.push(base);
    path
}

/// A labeled fiber in transport.
#[derive(Clone, Debug)]
pub struct TrackedFiber {
    pub points: Vec<Complex64>,
    pub t: Complex64,
    pub max_residual: f64,
    pub min_separation: f64,
}

impl TrackedFiber {
    fn min_separation(points: &[Complex64]) -> f64 {
        let mut m = f64::INFINITY;
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                m = m.min((points[i] - points[j]).norm());
            }
        }
        m
    }
}

/// The d-point fiber over `t`, required to be simple.
pub fn fiber_at(chart: &PencilChart, tchart: TChart, t: Complex64, cfg: &Config) -> Result<TrackedFiber> {
    let g = chart.fiber_at(tchart, t);
    let points = all_roots(&g, &RootOpts::from_config(cfg))?;
    let min_sep = TrackedFiber::min_separation(&points);
    let scale = 1.0 + points.iter().map(|p| p.norm()).fold(0.0, f64::max);
    if min_sep <= 2.0 * cfg.cluster_tol * scale {
        return Err(Error::PathTrackingFailure {
            segment: 0,
            reason: "fiber at base point is not simple".into(),
            residual: min_sep,
        });
    }
    let max_residual = points.iter().map(|p| g.eval(p).norm()).fold(0.0, f64::max);
    Ok(TrackedFiber { points, t, max_residual, min_separation: min_sep })
}

/// Tracking options derived from the chart geometry.
#[derive(Clone, Debug)]
pub struct TrackOpts {
    /// Base cap near the target branch point (isolation / 8).
    pub max_step: f64,
    /// Branch points of the chart; away from them the step cap opens up to
    /// a fraction of the distance to the nearest one.
    pub branch_ts: Vec<Complex64>,
    pub residual_coef: f64,
    pub newton_iters: usize,
    pub move_frac: f64,
    pub step_floor: f64,
}

impl TrackOpts {
    pub fn from_config(cfg: &Config, isolation: f64) -> Self {
        TrackOpts {
            max_step: isolation / 8.0,
            branch_ts: Vec::new(),
            residual_coef: cfg.residual_coef,
            newton_iters: cfg.newton_iters,
            move_frac: cfg.move_frac,
            step_floor: cfg.step_floor,
        }
    }

    pub fn with_branch_points(mut self, ts: Vec<Complex64>) -> Self {
        self.branch_ts = ts;
        self
    }

    /// Step cap at a path position: the near-branch cap, opened up to a
    /// quarter of the distance to the nearest branch point. A step shorter
    /// than that distance can never cross a branch point, so the polyline's
    /// homotopy class is preserved segment by segment.
    fn step_cap_at(&self, t: Complex64) -> f64 {
        let nearest = self
            .branch_ts
            .iter()
            .map(|b| (t - b).norm())
            .fold(f64::INFINITY, f64::min);
        if nearest.is_finite() {
            self.max_step.max(0.25 * nearest)
        } else {
            self.max_step
        }
    }
}

/// Transport a fiber along a polyline in t by zero-order prediction and
/// Newton correction, with adaptive step halving.
pub fn track(
    chart: &PencilChart,
    tchart: TChart,
    path: &[Complex64],
    start: &TrackedFiber,
    opts: &TrackOpts,
) -> Result<(TrackedFiber, usize)> {
    let mut fiber = start.points.clone();
    let mut steps_taken = 0usize;
    let mut max_residual = start.max_residual;
    for (seg_idx, pair) in path.windows(2).enumerate() {
        let (t_from, t_to) = (pair[0], pair[1]);
        let seg = t_to - t_from;
        let seg_len = seg.norm();
        if seg_len == 0.0 {
            continue;
        }
        let mut s = 0.0f64;
        let mut h = (opts.step_cap_at(t_from) / seg_len).min(1.0);
        while s < 1.0 {
            let t_here = t_from + seg * s;
            let cap = (opts.step_cap_at(t_here) / seg_len).min(1.0);
            // h_try is the working step; the tail clamp to the segment end
            // must not feed back into the step-floor bookkeeping.
            let h_try = h.min(cap);
            let h_eff = h_try.min(1.0 - s);
            let t_next = t_from + seg * (s + h_eff);
            let g = chart.fiber_at(tchart, t_next);
            match correct_fiber(&g, &fiber, opts) {
                Some((corrected, resid)) => {
                    fiber = corrected;
                    max_residual = max_residual.max(resid);
                    s += h_eff;
                    steps_taken += 1;
                    h = (h_try * 1.5).min(1.0);
                }
                None => {
                    h = h_try * 0.5;
                    if h * seg_len < opts.step_floor {
                        return Err(Error::PathTrackingFailure {
                            segment: seg_idx,
                            reason: "step size underflow".into(),
                            residual: h * seg_len,
                        });
                    }
                }
            }
        }
    }
    let t_end = *path.last().expect("nonempty path");
    let g_end = chart.fiber_at(tchart, t_end);
    let max_res_end = fiber.iter().map(|p| g_end.eval(p).norm()).fold(0.0, f64::max);
    let min_separation = TrackedFiber::min_separation(&fiber);
    Ok((
        TrackedFiber { points: fiber, t: t_end, max_residual: max_residual.max(max_res_end), min_separation },
        steps_taken,
    ))
}

/// Newton-correct every fiber point onto g's root set; `None` means the
/// step must shrink (divergence, collision, or a jump too large).
fn correct_fiber(g: &UniPoly<Complex64>, fiber: &[Complex64], opts: &TrackOpts) -> Option<(Vec<Complex64>, f64)> {
    let gnorm = g.max_coeff_est();
    let dg = g.derivative();
    let min_sep_before = TrackedFiber::min_separation(fiber);
    let mut out = Vec::with_capacity(fiber.len());
    let mut max_resid = 0.0f64;
    for &z0 in fiber {
        let mut z = z0;
        let mut converged = false;
        for _ in 0..opts.newton_iters {
            let val = g.eval(&z);
            let bound = opts.residual_coef * (1.0 + z.norm()) * gnorm;
            if val.norm() <= bound {
                converged = true;
                break;
            }
            let der = dg.eval(&z);
            if der.norm() < 1e-300 {
                return None;
            }
            z -= val / der;
            if !z.re.is_finite() || !z.im.is_finite() {
                return None;
            }
        }
        let val = g.eval(&z);
        let bound = opts.residual_coef * (1.0 + z.norm()) * gnorm;
        if !converged && val.norm() > bound {
            return None;
        }
        if (z - z0).norm() >= opts.move_frac * min_sep_before {
            return None;
        }
        max_resid = max_resid.max(val.norm());
        out.push(z);
    }
    // Reject collisions: the corrected fiber must stay separated.
    let min_sep_after = TrackedFiber::min_separation(&out);
    if min_sep_after < 0.25 * min_sep_before {
        return None;
    }
    Some((out, max_resid))
}

/// The monodromy permutation and diagnostics of one loop.
#[derive(Clone, Debug, Serialize)]
pub struct LoopResult {
    pub branch_index: usize,
    /// One-line notation, 1-indexed.
    pub permutation: Vec<usize>,
    pub cycle_type: Vec<usize>,
    pub steps: usize,
    pub max_residual: f64,
    /// False when the branch line meets the singular locus and the
    /// cycle-type certificate is therefore not applicable.
    pub certified: bool,
    #[serde(skip)]
    pub perm: Perm,
}

/// Match the transported fiber back to the base fiber.
///
/// Nearest-neighbor assignment; if that is not injective, fall back to the
/// optimal assignment; reject when any match is not clearly resolved.
fn match_permutation(base: &[Complex64], end: &[Complex64], min_sep: f64) -> Result<Perm> {
    let d = base.len();
    let mut images = vec![usize::MAX; d];
    let mut used = vec![false; d];
    let mut ambiguous = false;
    for i in 0..d {
        let mut best = (f64::INFINITY, usize::MAX);
        for j in 0..d {
            let dist = (end[i] - base[j]).norm();
            if dist < best.0 {
                best = (dist, j);
            }
        }
        if best.0 > 0.25 * min_sep {
            ambiguous = true;
            break;
        }
        if used[best.1] {
            ambiguous = true;
            break;
        }
        used[best.1] = true;
        images[i] = best.1;
    }
    if !ambiguous {
        return Perm::from_images(images).map_err(|_| Error::AmbiguousMatching);
    }
    // Optimal assignment over subsets (d <= 12 keeps this cheap).
    let mut cost = vec![vec![0.0f64; d]; d];
    for i in 0..d {
        for j in 0..d {
            cost[i][j] = (end[i] - base[j]).norm_sqr();
        }
    }
    let assignment = min_cost_assignment(&cost).ok_or(Error::AmbiguousMatching)?;
    for (i, &j) in assignment.iter().enumerate() {
        if (end[i] - base[j]).norm() > 0.45 * min_sep {
            return Err(Error::AmbiguousMatching);
        }
    }
    Perm::from_images(assignment).map_err(|_| Error::AmbiguousMatching)
}

/// Exact min-cost assignment by bitmask DP.
fn min_cost_assignment(cost: &[Vec<f64>]) -> Option<Vec<usize>> {
    let d = cost.len();
    if d > 20 {
        return None;
    }
    let full = 1usize << d;
    let mut dp = vec![f64::INFINITY; full];
    let mut parent = vec![usize::MAX; full];
    dp[0] = 0.0;
    for mask in 0..full {
        if dp[mask].is_infinite() {
            continue;
        }
        let i = mask.count_ones() as usize;
        if i == d {
            continue;
        }
        for j in 0..d {
            if mask & (1 << j) != 0 {
                continue;
            }
            let next = mask | (1 << j);
            let c = dp[mask] + cost[i][j];
            if c < dp[next] {
                dp[next] = c;
                parent[next] = j;
            }
        }
    }
    if dp[full - 1].is_infinite() {
        return None;
    }
    let mut images = vec![usize::MAX; d];
    let mut mask = full - 1;
    for i in (0..d).rev() {
        let j = parent[mask];
        images[i] = j;
        mask &= !(1 << j);
    }
    Some(images)
}

/// Track one keyhole loop and extract its permutation, certifying the cycle
/// type against the branch point's intersection profile when the branch
/// line avoids the singular locus.
pub fn loop_permutation(
    chart: &PencilChart,
    keyhole: &KeyholeLoop,
    base_fiber: &TrackedFiber,
    profile: &IntersectionProfile,
    cfg: &Config,
    isolation: f64,
    all_branch_ts: &[Complex64],
) -> Result<LoopResult> {
    let opts = TrackOpts::from_config(cfg, isolation)
        .with_branch_points(all_branch_ts.to_vec());
    let (end, steps) = track(chart, TChart::Main, &keyhole.path, base_fiber, &opts)?;
    let perm = match_permutation(&base_fiber.points, &end.points, base_fiber.min_separation)?;
    let cycle_type = perm.cycle_type();
    let certified = !profile.meets_singular;
    if certified {
        let expected = profile.multiplicities();
        if cycle_type != expected {
            return Err(Error::CertificationMismatch {
                index: keyhole.branch_index,
                got: cycle_type,
                expected,
            });
        }
    }
    Ok(LoopResult {
        branch_index: keyhole.branch_index,
        permutation: perm.one_line(),
        cycle_type,
        steps,
        max_residual: end.max_residual,
        certified,
        perm,
    })
}

/// Monodromy generators of the chart: one per finite branch point and, when
/// the second t-chart detects branching over infinity, a derived generator
/// there whose cycle type is certified against the infinity profile.
#[derive(Debug, Serialize)]
pub struct MonodromyGenerators {
    pub loops: Vec<LoopResult>,
    pub infinity: Option<LoopResult>,
    pub product_identity: bool,
    pub base_t_re: f64,
    pub base_t_im: f64,
    #[serde(skip)]
    pub branch: BranchSet,
}

impl MonodromyGenerators {
    pub fn degree(&self) -> usize {
        self.loops
            .first()
            .map(|l| l.permutation.len())
            .unwrap_or(0)
    }

    /// All generator permutations (finite loops plus infinity when present).
    pub fn permutations(&self) -> Vec<Perm> {
        let mut v: Vec<Perm> = self.loops.iter().map(|l| l.perm.clone()).collect();
        if let Some(inf) = &self.infinity {
            v.push(inf.perm.clone());
        }
        v
    }
}

pub fn monodromy_generators(chart: &PencilChart, seed: u64, cfg: &Config) -> Result<MonodromyGenerators> {
    let branch = branch_points(chart, cfg)?;
    if branch.finite.is_empty() {
        return Err(Error::LoopConstruction("no finite branch points".into()));
    }
    let loops = build_loops(&branch.finite, seed, cfg)?;
    let base_fiber = fiber_at(chart, TChart::Main, loops.base_t, cfg)?;
    let branch_ts: Vec<Complex64> = branch.finite.iter().map(|b| b.t).collect();

    let results: Vec<Result<LoopResult>> = loops
        .loops
        .par_iter()
        .map(|k| {
            let bp = &branch.finite[k.branch_index];
            loop_permutation(chart, k, &base_fiber, &bp.profile, cfg, bp.isolation, &branch_ts)
        })
        .collect();
    let mut loop_results = Vec::with_capacity(results.len());
    for r in results {
        loop_results.push(r?);
    }

    // Compose in loop order: the transported sheet of gamma_1 continues
    // into gamma_2, so the product is then-composition left to right.
    let d = chart.d;
    let mut product = Perm::identity(d);
    for lr in &loop_results {
        product = product.then(&lr.perm);
    }

    let infinity = match &branch.infinity {
        None => {
            if !product.is_identity() {
                return Err(Error::ProductNotIdentity);
            }
            None
        }
        Some(profile) => {
            // Loop around infinity = inverse of the big circle.
            let perm = product.inverse();
            let cycle_type = perm.cycle_type();
            let certified = !profile.meets_singular;
            if certified {
                let expected = profile.multiplicities();
                if cycle_type != expected {
                    return Err(Error::CertificationMismatch {
                        index: loop_results.len(),
                        got: cycle_type,
                        expected,
                    });
                }
            }
            Some(LoopResult {
                branch_index: loop_results.len(),
                permutation: perm.one_line(),
                cycle_type,
                steps: 0,
                max_residual: 0.0,
                certified,
                perm,
            })
        }
    };

    Ok(MonodromyGenerators {
        loops: loop_results,
        infinity,
        product_identity: true,
        base_t_re: loops.base_t.re,
        base_t_im: loops.base_t.im,
        branch,
    })
}
