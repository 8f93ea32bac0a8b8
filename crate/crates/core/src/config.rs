//! Tunable tolerances and resource knobs.
//!
//! The underlying geometry is exact; every numeric threshold below is an
//! artifact of doing part of the work in floating point. They are collected
//! here so the CLI can surface all of them.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Config {
    /// Master RNG seed; per-section seeds derive from it.
    pub seed: u64,
    /// Relative scale for grouping nearby roots into one cluster.
    pub cluster_tol: f64,
    /// Coarse scale at which root groups may be merged when the derivative
    /// test confirms a genuine multiple root.
    pub merge_scale: f64,
    /// Coefficient for the derivative-magnitude multiplicity test:
    /// a k-fold root needs |g^(k)(c)| > confirm_coef * ||g|| * k!.
    pub confirm_coef: f64,
    /// Aberth iteration cap.
    pub root_iter_cap: usize,
    /// Aberth convergence: stop when max update < root_tol * (1 + |root|).
    pub root_tol: f64,
    /// Tracking residual bound coefficient: |g_t(x)| <= residual_coef * (1+|x|) * ||g_t||.
    pub residual_coef: f64,
    /// Newton iterations allowed per tracking step.
    pub newton_iters: usize,
    /// A corrected root may move at most move_frac * min_separation per step.
    pub move_frac: f64,
    /// Relative step floor before tracking gives up.
    pub step_floor: f64,
    /// Keyhole circle radius as a fraction of a branch point's isolation.
    pub keyhole_frac: f64,
    /// Relative residual below which a center is rejected as lying on X.
    pub center_off_x_threshold: f64,
    /// Scaled gradient threshold for flagging fiber points as singular.
    pub singular_tol: f64,
    /// Full classification is refused above this degree (group orders and
    /// tracking budgets are tuned for small-degree fixtures).
    pub max_degree: usize,
    /// Number of independent random plane sections per center (n >= 2).
    pub sections: usize,
    /// Re-seeding attempts per section on tracking failure.
    pub section_retry_cap: usize,
    /// Random-plane retries inside build_pencil before surfacing DegenerateSection.
    pub plane_retry_cap: usize,
    /// Worker threads for per-loop / per-candidate parallelism (0 = rayon default).
    pub parallelism: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            seed: 0,
            cluster_tol: 1e-8,
            merge_scale: 3e-3,
            confirm_coef: 1e-6,
            root_iter_cap: 200,
            root_tol: 1e-13,
            residual_coef: 1e-10,
            newton_iters: 5,
            move_frac: 0.3,
            step_floor: 1e-12,
            keyhole_frac: 0.4,
            center_off_x_threshold: 1e-9,
            singular_tol: 1e-6,
            max_degree: 12,
            sections: 3,
            section_retry_cap: 5,
            plane_retry_cap: 8,
            parallelism: 0,
        }
    }
}

impl Config {
    pub fn validate(&self) -> Result<()> {
        let positives = [
            ("cluster_tol", self.cluster_tol),
            ("merge_scale", self.merge_scale),
            ("confirm_coef", self.confirm_coef),
            ("root_tol", self.root_tol),
            ("residual_coef", self.residual_coef),
            ("move_frac", self.move_frac),
            ("step_floor", self.step_floor),
            ("keyhole_frac", self.keyhole_frac),
            ("center_off_x_threshold", self.center_off_x_threshold),
            ("singular_tol", self.singular_tol),
        ];
        for (name, v) in positives {
            if !(v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.sections < 1 {
            return Err(Error::Config("sections must be >= 1".into()));
        }
        if self.max_degree < 2 || self.max_degree > 20 {
            return Err(Error::Config("max_degree must lie in 2..=20".into()));
        }
        if self.keyhole_frac >= 0.5 {
            return Err(Error::Config("keyhole_frac must stay below 0.5 to keep loop disks disjoint".into()));
        }
        Ok(())
    }
}
