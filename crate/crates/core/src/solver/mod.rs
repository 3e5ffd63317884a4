//! Critical rank-one tensors by homotopy continuation, and critical
//! rank-at-most-k tensors by alternating least squares.

pub mod als;
pub mod system;
pub mod tracker;

use std::cmp::Ordering;

pub use als::{als_critical_rank_k, w_tensor, AlsConfig, AlsResult, AlsTerm};
pub use system::{build_system, SquareSystem};
pub use tracker::{PathOutcome, TrackerConfig};

use crate::critical_space::membership_residual;
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::pairing::wedge;
use crate::tensor::{contract, rank_one, tangent_span, Tensor, VectorTuple, DEFAULT_ISO_TOL};
use tracker::{track_paths, Homotopy};

/// Retracking rounds for duplicated or failed paths.
const RETRACK_ROUNDS: u32 = 2;

#[derive(Clone, Debug)]
pub struct CriticalPoint {
    /// Unit vectors, phase fixed by the first non-negligible coordinate.
    pub tuple: VectorTuple,
    /// `inner(f, x) / inner(x, x)`; `None` when some factor is isotropic.
    pub scale: Option<C64>,
    /// `scale · rank_one(tuple)`, or the unscaled rank-one tensor when
    /// `scale` is `None`.
    pub tensor: Tensor,
    pub newton_residual: f64,
    pub isotropic: Vec<bool>,
    pub membership_residual: f64,
    /// `max_τ |inner(f − c x, τ)| / (‖f − c x‖ ‖τ‖)` over tangent columns.
    pub perpendicularity: Option<f64>,
}

impl CriticalPoint {
    pub fn is_isotropic(&self) -> bool {
        self.isotropic.iter().any(|&b| b)
    }

    /// Builds the point from any representative tuple.
    pub fn from_tuple(f: &Tensor, t: &VectorTuple) -> Result<Self> {
        let format = f.format();
        let tuple = t.normalized();
        let x = rank_one(format, &tuple)?;
        let isotropic = tuple.isotropy_flags(DEFAULT_ISO_TOL);
        let fnorm = f.norm();
        let mut newton_residual: f64 = 0.0;
        for l in 0..format.factors() {
            let u = contract(f, &tuple, l)?;
            newton_residual = newton_residual.max(wedge(l, &u, tuple.vector(l)).norm() / fnorm);
        }
        let membership = membership_residual(f, &x)?;
        let (scale, tensor, perpendicularity) = if isotropic.iter().any(|&b| b) {
            (None, x, None)
        } else {
            let c = f.inner(&x)? / x.inner(&x)?;
            let cx = x.scale(c);
            let r = f.sub(&cx)?;
            let rn = r.norm();
            let mut worst: f64 = 0.0;
            if rn > 1e-14 * fnorm {
                for col in tangent_span(format, &tuple)?.columns() {
                    let tau = Tensor::new(format.clone(), col)?;
                    worst = worst.max(r.inner(&tau)?.norm() / (rn * tau.norm()));
                }
            }
            (Some(c), cx, Some(worst))
        };
        Ok(Self {
            tuple,
            scale,
            tensor,
            newton_residual,
            isotropic,
            membership_residual: membership,
            perpendicularity,
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PathStats {
    pub paths: u128,
    pub finite: usize,
    pub at_infinity: usize,
    pub singular: usize,
    pub failed: usize,
    /// Finite endpoints merged into an earlier endpoint.
    pub duplicates: usize,
    pub retracked: usize,
}

#[derive(Clone, Debug)]
pub struct SolveOutput {
    /// Distinct critical points in canonical order.
    pub points: Vec<CriticalPoint>,
    pub stats: PathStats,
    /// Set when more than 5% of the paths failed.
    pub warning: Option<String>,
}

impl SolveOutput {
    pub fn non_isotropic(&self) -> impl Iterator<Item = &CriticalPoint> {
        self.points.iter().filter(|p| !p.is_isotropic())
    }
}

fn canonical_order(a: &CriticalPoint, b: &CriticalPoint) -> Ordering {
    let mag = |p: &CriticalPoint| p.scale.map_or(-1.0, |c| c.norm());
    mag(b).total_cmp(&mag(a)).then_with(|| {
        let ca = a.tuple.vectors().concat();
        let cb = b.tuple.vectors().concat();
        ca.iter()
            .zip(&cb)
            .map(|(x, y)| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    })
}

/// Clusters finite endpoints; returns the representative of each path's
/// cluster (by first member) and whether any cluster has several members.
fn cluster(tuples: &[(usize, VectorTuple)], dedupe: f64) -> Vec<usize> {
    let mut rep: Vec<usize> = (0..tuples.len()).collect();
    for i in 0..tuples.len() {
        for j in 0..i {
            if rep[j] == j && tuples[i].1.projective_distance(&tuples[j].1) < dedupe {
                rep[i] = j;
                break;
            }
        }
    }
    rep
}

/// All critical rank-one tensors of `f`, found by tracking the `D^N` paths
/// of a total-degree homotopy.
pub fn solve_critical_rank_one(f: &Tensor, cfg: &TrackerConfig) -> Result<SolveOutput> {
    cfg.validate()?;
    let system = build_system(f, cfg.seed)?;
    let homotopy = Homotopy::new(&system, cfg.seed);
    let paths = homotopy.paths();
    if paths > 10_000_000 {
        return Err(Error::InvalidInput(format!("{paths} paths is beyond the tracker's scope")));
    }
    let all: Vec<u128> = (0..paths).collect();
    let mut outcomes = track_paths(&homotopy, &all, cfg);
    let mut retracked = 0;

    for round in 1..=RETRACK_ROUNDS {
        let finite: Vec<(usize, VectorTuple)> = outcomes
            .iter()
            .enumerate()
            .filter_map(|(i, o)| match o {
                PathOutcome::Finite(z) => Some((i, system.tuple_affine(z).ok()?)),
                _ => None,
            })
            .collect();
        let rep = cluster(&finite, cfg.dedupe);
        let mut redo: Vec<usize> = Vec::new();
        for (k, &r) in rep.iter().enumerate() {
            if r != k {
                redo.push(finite[k].0);
                redo.push(finite[r].0);
            }
        }
        redo.extend(
            outcomes
                .iter()
                .enumerate()
                .filter(|(_, o)| matches!(o, PathOutcome::Failed))
                .map(|(i, _)| i),
        );
        redo.sort_unstable();
        redo.dedup();
        if redo.is_empty() {
            break;
        }
        retracked += redo.len();
        let cautious = cfg.cautious(round);
        let idx: Vec<u128> = redo.iter().map(|&i| i as u128).collect();
        for (i, o) in redo.iter().zip(track_paths(&homotopy, &idx, &cautious)) {
            outcomes[*i] = o;
        }
    }

    let mut stats = PathStats {
        paths,
        retracked,
        ..PathStats::default()
    };
    let mut finite = Vec::new();
    for (i, o) in outcomes.iter().enumerate() {
        match o {
            PathOutcome::Finite(z) => {
                stats.finite += 1;
                finite.push((i, system.tuple_affine(z)?));
            }
            PathOutcome::AtInfinity => stats.at_infinity += 1,
            PathOutcome::Singular => stats.singular += 1,
            PathOutcome::Failed => stats.failed += 1,
        }
    }
    let rep = cluster(&finite, cfg.dedupe);
    let distinct: Vec<&VectorTuple> = rep
        .iter()
        .enumerate()
        .filter(|(k, r)| k == *r)
        .map(|(k, _)| &finite[k].1)
        .collect();
    stats.duplicates = finite.len() - distinct.len();
    for (i, a) in distinct.iter().enumerate() {
        for b in &distinct[..i] {
            let d = a.projective_distance(b);
            if d < cfg.ambiguity {
                return Err(Error::DegenerateInput(format!(
                    "two critical points at projective distance {d:.3e}; f looks non-generic"
                )));
            }
        }
    }
    let mut points = distinct
        .into_iter()
        .map(|t| CriticalPoint::from_tuple(f, t))
        .collect::<Result<Vec<_>>>()?;
    points.sort_by(canonical_order);
    let warning = (stats.failed as f64 > 0.05 * paths as f64).then(|| {
        format!("{} of {} paths failed", stats.failed, paths)
    });
    Ok(SolveOutput {
        points,
        stats,
        warning,
    })
}
