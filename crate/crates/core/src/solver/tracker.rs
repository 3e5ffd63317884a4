//! Total-degree homotopy continuation for a [`SquareSystem`].
//!
//! Paths are tracked in homogeneous coordinates on a random affine patch
//! `a·Z = 1`, so that paths heading to infinity stay bounded.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::system::SquareSystem;
use crate::linalg::{vec_norm, C64};

const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct TrackerConfig {
    pub seed: u64,
    pub initial_step: f64,
    pub min_step: f64,
    pub max_step: f64,
    /// Relative tolerance of the final Newton polish at `t = 1`.
    pub newton_tol: f64,
    pub newton_max_iters: usize,
    /// Relative tolerance and iteration cap of the corrector along the path.
    pub corrector_tol: f64,
    pub corrector_max_iters: usize,
    /// Affine norm beyond which an endpoint is declared to be at infinity.
    pub divergence: f64,
    pub endgame_t: f64,
    /// Projective distance below which two endpoints are the same point.
    pub dedupe: f64,
    /// Distinct endpoints closer than this are reported as degenerate input.
    pub ambiguity: f64,
    pub max_steps: usize,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            initial_step: 0.05,
            min_step: 1e-12,
            max_step: 0.1,
            newton_tol: 1e-12,
            newton_max_iters: 50,
            corrector_tol: 1e-9,
            corrector_max_iters: 3,
            divergence: 1e8,
            endgame_t: 1.0 - 1e-6,
            dedupe: 1e-6,
            ambiguity: 1e-4,
            max_steps: 200_000,
            threads: None,
        }
    }
}

impl TrackerConfig {
    pub fn validate(&self) -> crate::Result<()> {
        let positive = [
            self.initial_step,
            self.min_step,
            self.max_step,
            self.newton_tol,
            self.corrector_tol,
            self.divergence,
            self.dedupe,
            self.ambiguity,
        ];
        if positive.iter().any(|x| !(x.is_finite() && *x > 0.0))
            || !(self.endgame_t > 0.0 && self.endgame_t < 1.0)
            || self.newton_max_iters == 0
            || self.corrector_max_iters == 0
            || self.max_steps == 0
            || self.min_step > self.max_step
        {
            return Err(crate::Error::InvalidInput(format!("invalid tracker config {self:?}")));
        }
        Ok(())
    }

    /// Smaller steps and a tighter corrector, used when retracking.
    pub(crate) fn cautious(&self, round: u32) -> Self {
        let shrink = 4f64.powi(round as i32);
        Self {
            initial_step: self.initial_step / shrink,
            max_step: self.max_step / shrink,
            min_step: self.min_step.min(self.max_step / shrink),
            corrector_tol: self.corrector_tol / shrink,
            max_steps: self.max_steps * 4,
            ..self.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PathOutcome {
    /// Converged, nonsingular endpoint in the affine chart.
    Finite(Vec<C64>),
    AtInfinity,
    /// Reached the endgame but Newton failed or the Jacobian is singular.
    Singular,
    /// The step size collapsed before the endgame.
    Failed,
}

/// Start system `G_i = Z_i^D − r_i Z_0^D`, the patch and `γ`.
#[derive(Clone, Debug)]
pub(crate) struct Homotopy<'a> {
    system: &'a SquareSystem,
    gamma: C64,
    r: Vec<C64>,
    patch: Vec<C64>,
    degree: i32,
}

impl<'a> Homotopy<'a> {
    pub(crate) fn new(system: &'a SquareSystem, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        let mut gauss = || C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
        let n = system.unknowns();
        let gamma = gauss();
        let gamma = gamma / gamma.norm();
        let r = (0..n)
            .map(|_| {
                let z = gauss();
                z / z.norm()
            })
            .collect();
        let patch = (0..=n).map(|_| gauss()).collect();
        Self {
            system,
            gamma,
            r,
            patch,
            degree: system.degree() as i32,
        }
    }

    pub(crate) fn paths(&self) -> u128 {
        (self.degree as u128).pow(self.system.unknowns() as u32)
    }

    fn start_point(&self, index: u128) -> Vec<C64> {
        let d = self.degree;
        let mut k = index;
        let mut z = vec![C64::new(1.0, 0.0)];
        for r in &self.r {
            let j = (k % d as u128) as f64;
            k /= d as u128;
            let root = r.powf(1.0 / d as f64);
            z.push(root * C64::from_polar(1.0, 2.0 * std::f64::consts::PI * j / d as f64));
        }
        let s: C64 = self.patch.iter().zip(&z).map(|(a, x)| a * x).sum();
        z.iter().map(|x| x / s).collect()
    }

    /// `(H, ∂H/∂Z, ∂H/∂t)` with the patch equation appended.
    fn eval(&self, z: &[C64], t: f64) -> (DVector<C64>, DMatrix<C64>, DVector<C64>) {
        let n = self.system.unknowns();
        let (fv, fj) = self.system.eval_homogeneous(z);
        let d = self.degree;
        let s = C64::new(1.0 - t, 0.0) * self.gamma;
        let mut h = DVector::from_element(n + 1, ZERO);
        let mut ht = DVector::from_element(n + 1, ZERO);
        let mut j = DMatrix::from_element(n + 1, n + 1, ZERO);
        let z0d1 = z[0].powi(d - 1);
        for i in 0..n {
            let zi = z[i + 1];
            let zid1 = zi.powi(d - 1);
            let g = zid1 * zi - self.r[i] * z0d1 * z[0];
            h[i] = s * g + fv[i] * t;
            ht[i] = fv[i] - self.gamma * g;
            for k in 0..=n {
                j[(i, k)] = fj[(i, k)] * t;
            }
            j[(i, i + 1)] += s * zid1 * d as f64;
            j[(i, 0)] -= s * self.r[i] * z0d1 * d as f64;
        }
        h[n] = self.patch.iter().zip(z).map(|(a, x)| a * x).sum::<C64>() - 1.0;
        for k in 0..=n {
            j[(n, k)] = self.patch[k];
        }
        (h, j, ht)
    }

    fn velocity(&self, z: &[C64], t: f64) -> Option<Vec<C64>> {
        let (_, j, ht) = self.eval(z, t);
        let dz = j.lu().solve(&(-ht))?;
        finite(dz.as_slice()).then(|| dz.as_slice().to_vec())
    }

    fn predict(&self, z: &[C64], t: f64, h: f64) -> Option<Vec<C64>> {
        let axpy = |a: &[C64], b: &[C64], c: f64| -> Vec<C64> {
            a.iter().zip(b).map(|(x, y)| x + y * c).collect()
        };
        let k1 = self.velocity(z, t)?;
        let k2 = self.velocity(&axpy(z, &k1, h / 2.0), t + h / 2.0)?;
        let k3 = self.velocity(&axpy(z, &k2, h / 2.0), t + h / 2.0)?;
        let k4 = self.velocity(&axpy(z, &k3, h), t + h)?;
        Some(
            (0..z.len())
                .map(|i| z[i] + (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0))
                .collect(),
        )
    }

    fn correct(&self, mut z: Vec<C64>, t: f64, cfg: &TrackerConfig) -> Option<Vec<C64>> {
        let mut last = f64::INFINITY;
        for it in 0..cfg.corrector_max_iters {
            let (h, j, _) = self.eval(&z, t);
            let dz = j.lu().solve(&(-h))?;
            let step = vec_norm(dz.as_slice());
            let scale = vec_norm(&z);
            if !step.is_finite() || (it == 0 && step > 0.05 * scale) || step > 0.5 * last {
                return None;
            }
            for (a, b) in z.iter_mut().zip(dz.iter()) {
                *a += b;
            }
            if step <= cfg.corrector_tol * scale {
                return Some(z);
            }
            last = step;
        }
        None
    }

    /// Tracks path `index` from `t = 0` to the endgame and classifies it.
    pub(crate) fn track(&self, index: u128, cfg: &TrackerConfig) -> PathOutcome {
        let mut z = self.start_point(index);
        let mut t = 0.0;
        let mut h = cfg.initial_step;
        let mut streak = 0;
        let mut steps = 0;
        while t < cfg.endgame_t {
            steps += 1;
            if steps > cfg.max_steps {
                return PathOutcome::Failed;
            }
            let step = h.min(cfg.endgame_t - t);
            let next = self
                .predict(&z, t, step)
                .and_then(|zp| self.correct(zp, t + step, cfg));
            match next {
                Some(zn) => {
                    z = zn;
                    t = if step == cfg.endgame_t - t { cfg.endgame_t } else { t + step };
                    streak += 1;
                    if streak >= 3 {
                        h = (2.0 * h).min(cfg.max_step);
                        streak = 0;
                    }
                }
                None => {
                    h /= 2.0;
                    streak = 0;
                    if h < cfg.min_step {
                        return self.classify_stalled(&z, cfg);
                    }
                }
            }
        }
        self.endgame(&z, cfg)
    }

    fn classify_stalled(&self, z: &[C64], cfg: &TrackerConfig) -> PathOutcome {
        if z[0].norm() * cfg.divergence <= vec_norm(&z[1..]) {
            PathOutcome::AtInfinity
        } else {
            PathOutcome::Failed
        }
    }

    /// Newton at `t = 1` in homogeneous coordinates; `None` if it does not
    /// converge or wanders away from the endgame point.
    fn newton_projective(&self, start: &[C64], cfg: &TrackerConfig) -> Option<Vec<C64>> {
        let mut z = start.to_vec();
        let reach = 0.25 * vec_norm(start);
        let mut last = f64::INFINITY;
        for _ in 0..cfg.newton_max_iters {
            let (h, j, _) = self.eval(&z, 1.0);
            let dz = j.lu().solve(&(-h))?;
            let step = vec_norm(dz.as_slice());
            if !step.is_finite() {
                return None;
            }
            for (a, b) in z.iter_mut().zip(dz.iter()) {
                *a += b;
            }
            let moved: Vec<C64> = z.iter().zip(start).map(|(a, b)| a - b).collect();
            if vec_norm(&moved) > reach {
                return None;
            }
            let scale = vec_norm(&z);
            if step <= cfg.newton_tol * scale || (step >= 0.5 * last && step <= 1e-9 * scale) {
                return Some(z);
            }
            last = step;
        }
        None
    }

    fn endgame(&self, zz: &[C64], cfg: &TrackerConfig) -> PathOutcome {
        let at_infinity = |z: &[C64]| z[0].norm() * cfg.divergence <= vec_norm(&z[1..]);
        if at_infinity(zz) {
            return PathOutcome::AtInfinity;
        }
        let zz = match self.newton_projective(zz, cfg) {
            Some(z) => z,
            None => return PathOutcome::Singular,
        };
        if at_infinity(&zz) {
            return PathOutcome::AtInfinity;
        }
        let z: Vec<C64> = zz[1..].iter().map(|x| x / zz[0]).collect();
        let z = match newton_affine(self.system, z, cfg) {
            Some(z) => z,
            None => return PathOutcome::Singular,
        };
        if vec_norm(&z) > cfg.divergence {
            return PathOutcome::AtInfinity;
        }
        let jac = match self.system.jacobian_affine(&z) {
            Ok(j) => j,
            Err(_) => return PathOutcome::Failed,
        };
        let sv = crate::linalg::singular_values(&jac);
        let (max, min) = (sv[0], sv[sv.len() - 1]);
        if max > 0.0 && min / max > 1e-10 {
            PathOutcome::Finite(z)
        } else {
            PathOutcome::Singular
        }
    }
}

fn finite(z: &[C64]) -> bool {
    z.iter().all(|x| x.re.is_finite() && x.im.is_finite())
}

/// Newton's method on the affine equations; `None` if it does not converge.
pub(crate) fn newton_affine(system: &SquareSystem, mut z: Vec<C64>, cfg: &TrackerConfig) -> Option<Vec<C64>> {
    let mut last = f64::INFINITY;
    let mut stalls = 0;
    for _ in 0..cfg.newton_max_iters {
        let fv = system.eval_affine(&z).ok()?;
        let j = system.jacobian_affine(&z).ok()?;
        let dz = j.lu().solve(&-DVector::from_vec(fv))?;
        let step = vec_norm(dz.as_slice());
        if !step.is_finite() {
            return None;
        }
        for (a, b) in z.iter_mut().zip(dz.iter()) {
            *a += b;
        }
        let scale = 1.0 + vec_norm(&z);
        if step <= cfg.newton_tol * scale {
            return Some(z);
        }
        // rounding floor: steps stopped shrinking at a tiny size
        if step >= 0.5 * last && step <= 1e-9 * scale {
            stalls += 1;
            if stalls >= 2 {
                return Some(z);
            }
        }
        last = step;
    }
    None
}

/// Tracks the given paths, in parallel, returning outcomes in input order.
pub(crate) fn track_paths(
    homotopy: &Homotopy<'_>,
    indices: &[u128],
    cfg: &TrackerConfig,
) -> Vec<PathOutcome> {
    let run = || {
        indices
            .par_iter()
            .map(|&i| homotopy.track(i, cfg))
            .collect::<Vec<_>>()
    };
    match cfg.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(run),
            Err(_) => run(),
        },
        None => run(),
    }
}
