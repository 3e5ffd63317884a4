//! Real critical rank-at-most-k tensors by alternating least squares.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::critical_space::projection_norm;
use crate::error::{Error, Result};
use crate::format::TensorFormat;
use crate::linalg::{CMatrix, C64};
use crate::tensor::{contract, tangent_span, Tensor, VectorTuple};

/// Criticality checks without improvement after which a run gives up.
const STALL_CHECKS: usize = 20;
/// Largest extrapolation factor tried after a sweep.
const MAX_JUMP: f64 = 1024.0;

#[derive(Clone, Debug, PartialEq)]
pub struct AlsConfig {
    pub seed: u64,
    pub restarts: usize,
    pub max_sweeps: usize,
    /// Relative objective decrease below which criticality is checked.
    pub decrease_tol: f64,
    /// A run stops once the criticality residual is at most this.
    pub criticality_tol: f64,
    /// Gradient steps per symmetric block and sweep.
    pub inner_steps: usize,
    /// Line search along `x + s (x − x_prev)`, `s = 1, 2, 4, …`, after every
    /// sweep, keeping the best point that improves the objective.
    pub extrapolate: bool,
    pub record_trajectory: bool,
}

impl Default for AlsConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            restarts: 20,
            max_sweeps: 10_000,
            decrease_tol: 1e-12,
            criticality_tol: 1e-10,
            inner_steps: 5,
            extrapolate: true,
            record_trajectory: false,
        }
    }
}

/// `coeff · v_1^{d_1} ⊗ … ⊗ v_p^{d_p}` with unit vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct AlsTerm {
    pub coeff: f64,
    pub vectors: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlsSample {
    pub objective: f64,
    pub max_term_norm: f64,
}

#[derive(Clone, Debug)]
pub struct AlsResult {
    pub g: Tensor,
    pub terms: Vec<AlsTerm>,
    /// `‖f − g‖²`.
    pub objective: f64,
    pub criticality_residual: f64,
    pub sweeps: usize,
    pub converged: bool,
    pub restart: usize,
    /// Largest `‖c_i x_i‖ = |c_i|` among the terms.
    pub max_term_norm: f64,
    /// Objective and largest term norm after every sweep of the best run.
    pub trajectory: Vec<AlsSample>,
}

struct Workspace<'a> {
    format: &'a TensorFormat,
    f: Vec<f64>,
    sqrt_w: Vec<f64>,
}

impl Workspace<'_> {
    fn factor_values(&self, l: usize, v: &[f64]) -> Vec<f64> {
        let fb = self.format.factor_basis(l);
        fb.exps
            .iter()
            .zip(&fb.multinomials)
            .map(|(e, m)| {
                m * e
                    .iter()
                    .zip(v)
                    .map(|(&a, x)| x.powi(a as i32))
                    .product::<f64>()
            })
            .collect()
    }

    fn kron(per_factor: &[Vec<f64>]) -> Vec<f64> {
        let mut out = vec![1.0];
        for vals in per_factor {
            out = out
                .iter()
                .flat_map(|a| vals.iter().map(move |b| a * b))
                .collect();
        }
        out
    }

    fn rank_one(&self, vectors: &[Vec<f64>]) -> Vec<f64> {
        let per: Vec<Vec<f64>> = vectors
            .iter()
            .enumerate()
            .map(|(l, v)| self.factor_values(l, v))
            .collect();
        Self::kron(&per)
    }

    fn model(&self, terms: &[AlsTerm]) -> Vec<f64> {
        let mut g = vec![0.0; self.f.len()];
        for t in terms {
            for (a, b) in g.iter_mut().zip(self.rank_one(&t.vectors)) {
                *a += t.coeff * b;
            }
        }
        g
    }

    fn objective(&self, terms: &[AlsTerm]) -> f64 {
        self.model(terms)
            .iter()
            .zip(&self.f)
            .zip(&self.sqrt_w)
            .map(|((g, f), s)| ((f - g) * s).powi(2))
            .sum()
    }

    /// Least squares in the Hermitian norm; columns are unweighted.
    fn solve(&self, columns: &[Vec<f64>]) -> Vec<f64> {
        let a = DMatrix::from_fn(self.f.len(), columns.len(), |r, c| columns[c][r] * self.sqrt_w[r]);
        let b = DVector::from_iterator(self.f.len(), self.f.iter().zip(&self.sqrt_w).map(|(f, s)| f * s));
        crate::linalg::real_least_squares(&a, b.as_slice())
    }

    /// Exact update of every `v_{i,ℓ}` for a factor of degree one.
    fn linear_block(&self, terms: &mut [AlsTerm], l: usize) {
        let n = self.format.dim(l);
        let mut columns = Vec::with_capacity(terms.len() * n);
        for t in terms.iter() {
            let mut per: Vec<Vec<f64>> = t
                .vectors
                .iter()
                .enumerate()
                .map(|(m, v)| self.factor_values(m, v))
                .collect();
            for j in 0..n {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                per[l] = e;
                columns.push(Self::kron(&per));
            }
        }
        let x = self.solve(&columns);
        for (i, t) in terms.iter_mut().enumerate() {
            let block = &x[i * n..(i + 1) * n];
            let norm = block.iter().map(|a| a * a).sum::<f64>().sqrt();
            if norm > 0.0 {
                t.vectors[l] = block.iter().map(|a| a / norm).collect();
                t.coeff = norm;
            } else {
                t.coeff = 0.0;
            }
        }
    }

    /// Gradient steps with backtracking on the block of factor `l`.
    fn gradient_block(&self, terms: &mut [AlsTerm], l: usize, step: &mut f64, inner: usize) {
        let d = self.format.degree(l) as f64;
        for _ in 0..inner {
            let g = self.model(terms);
            let r: Vec<C64> = self.f.iter().zip(&g).map(|(f, g)| C64::new(f - g, 0.0)).collect();
            let r = Tensor::new(self.format.clone(), r).expect("finite residual");
            let grads: Vec<Vec<f64>> = terms
                .iter()
                .map(|t| {
                    let tuple = VectorTuple::from_real(&t.vectors).expect("unit vectors");
                    contract(&r, &tuple, l)
                        .expect("matching tuple")
                        .iter()
                        .map(|u| -2.0 * t.coeff * d * u.re)
                        .collect()
                })
                .collect();
            let gnorm2: f64 = grads.iter().flatten().map(|x| x * x).sum();
            if gnorm2 == 0.0 {
                return;
            }
            let phi0 = self.objective(terms);
            let mut alpha = *step * 2.0;
            let mut accepted = false;
            for _ in 0..60 {
                let trial: Vec<AlsTerm> = terms
                    .iter()
                    .zip(&grads)
                    .map(|(t, gr)| {
                        let mut t = t.clone();
                        t.vectors[l] = t.vectors[l].iter().zip(gr).map(|(v, g)| v - alpha * g).collect();
                        t
                    })
                    .collect();
                if self.objective(&trial) <= phi0 - 1e-4 * alpha * gnorm2 {
                    terms.clone_from_slice(&trial);
                    accepted = true;
                    break;
                }
                alpha /= 2.0;
            }
            if !accepted {
                return;
            }
            *step = alpha;
            for t in terms.iter_mut() {
                let norm = t.vectors[l].iter().map(|a| a * a).sum::<f64>().sqrt();
                if norm > 0.0 {
                    t.vectors[l].iter_mut().for_each(|a| *a /= norm);
                    t.coeff *= norm.powi(d as i32);
                }
            }
        }
    }

    fn sweep(&self, terms: &mut [AlsTerm], steps: &mut [f64], inner: usize) {
        for l in 0..self.format.factors() {
            if self.format.degree(l) == 1 {
                self.linear_block(terms, l);
            } else {
                self.gradient_block(terms, l, &mut steps[l], inner);
            }
        }
        self.update_coefficients(terms);
    }

    /// Steps `s` times further along the last move: geometrically in the
    /// coefficient, linearly in the vectors.
    fn extrapolate(&self, from: &[AlsTerm], to: &[AlsTerm], s: f64) -> Vec<AlsTerm> {
        from.iter()
            .zip(to)
            .map(|(a, b)| {
                let mut coeff = if a.coeff * b.coeff > 0.0 {
                    b.coeff * (b.coeff / a.coeff).powf(s)
                } else {
                    b.coeff
                };
                let vectors = a
                    .vectors
                    .iter()
                    .zip(&b.vectors)
                    .enumerate()
                    .map(|(l, (va, vb))| {
                        let v: Vec<f64> = va.iter().zip(vb).map(|(x, y)| y + s * (y - x)).collect();
                        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                        if n == 0.0 {
                            return vb.clone();
                        }
                        coeff *= n.powi(self.format.degree(l) as i32);
                        v.iter().map(|x| x / n).collect()
                    })
                    .collect();
                AlsTerm { coeff, vectors }
            })
            .collect()
    }

    fn update_coefficients(&self, terms: &mut [AlsTerm]) {
        let columns: Vec<Vec<f64>> = terms.iter().map(|t| self.rank_one(&t.vectors)).collect();
        for (t, c) in terms.iter_mut().zip(self.solve(&columns)) {
            t.coeff = c;
        }
    }

    fn to_tensor(&self, values: &[f64]) -> Tensor {
        Tensor::from_real(self.format.clone(), values).expect("finite values")
    }

    fn criticality(&self, terms: &[AlsTerm], fnorm: f64) -> Result<f64> {
        let g = self.model(terms);
        let r: Vec<f64> = self.f.iter().zip(&g).map(|(a, b)| a - b).collect();
        let r = self.to_tensor(&r);
        let mut cols: Option<CMatrix> = None;
        for t in terms {
            let span = tangent_span(self.format, &VectorTuple::from_real(&t.vectors)?)?;
            cols = Some(match cols {
                None => span,
                Some(c) => c.hstack(&span)?,
            });
        }
        match cols {
            Some(c) => Ok(projection_norm(self.format, &c, &r)? / fnorm),
            None => Ok(0.0),
        }
    }
}

fn max_term_norm(terms: &[AlsTerm]) -> f64 {
    terms.iter().map(|t| t.coeff.abs()).fold(0.0, f64::max)
}

fn random_terms(format: &TensorFormat, k: usize, rng: &mut ChaCha8Rng) -> Vec<AlsTerm> {
    (0..k)
        .map(|_| AlsTerm {
            coeff: 1.0,
            vectors: (0..format.factors())
                .map(|l| {
                    let v: Vec<f64> = (0..format.dim(l)).map(|_| StandardNormal.sample(rng)).collect();
                    let n = v.iter().map(|a| a * a).sum::<f64>().sqrt().max(1e-300);
                    v.iter().map(|a| a / n).collect()
                })
                .collect(),
        })
        .collect()
}

/// A real critical point of `g ↦ ‖f − g‖²` on sums of `k` rank-one tensors,
/// the best of `cfg.restarts` runs.
pub fn als_critical_rank_k(f: &Tensor, k: usize, cfg: &AlsConfig) -> Result<AlsResult> {
    if !f.is_real() {
        return Err(Error::InvalidInput("alternating least squares needs a real tensor".into()));
    }
    let format = f.format();
    let fnorm = f.norm();
    if k == 0 || fnorm == 0.0 {
        return Ok(AlsResult {
            g: Tensor::zeros(format),
            terms: Vec::new(),
            objective: fnorm * fnorm,
            criticality_residual: 0.0,
            sweeps: 0,
            converged: true,
            restart: 0,
            max_term_norm: 0.0,
            trajectory: Vec::new(),
        });
    }
    if cfg.restarts == 0 || cfg.max_sweeps == 0 {
        return Err(Error::InvalidInput("restarts and max_sweeps must be positive".into()));
    }
    let ws = Workspace {
        format,
        f: f.coeffs().iter().map(|z| z.re).collect(),
        sqrt_w: format.weights().iter().map(|w| w.sqrt()).collect(),
    };
    let f2 = fnorm * fnorm;
    let mut best: Option<AlsResult> = None;
    for restart in 0..cfg.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(restart as u64));
        let mut terms = random_terms(format, k, &mut rng);
        ws.update_coefficients(&mut terms);
        let mut steps = vec![1.0 / f2.max(1e-300); format.factors()];
        let mut prev = ws.objective(&terms);
        let mut trajectory = Vec::new();
        let mut sweeps = 0;
        let mut converged = false;
        let mut crit = f64::NAN;
        let mut best_crit = f64::INFINITY;
        let mut stalled = 0;
        while sweeps < cfg.max_sweeps {
            sweeps += 1;
            let before = terms.clone();
            ws.sweep(&mut terms, &mut steps, cfg.inner_steps);
            let mut obj = ws.objective(&terms);
            if cfg.extrapolate && sweeps > 1 {
                let mut jump = 1.0;
                let mut found: Option<Vec<AlsTerm>> = None;
                while jump <= MAX_JUMP {
                    let trial = ws.extrapolate(&before, &terms, jump);
                    let trial_obj = ws.objective(&trial);
                    if trial_obj >= obj {
                        break;
                    }
                    found = Some(trial);
                    obj = trial_obj;
                    jump *= 2.0;
                }
                if let Some(t) = found {
                    terms = t;
                }
            }
            if cfg.record_trajectory {
                trajectory.push(AlsSample {
                    objective: obj,
                    max_term_norm: max_term_norm(&terms),
                });
            }
            if obj <= 1e-28 * f2 {
                crit = ws.criticality(&terms, fnorm)?;
                converged = true;
                prev = obj;
                break;
            }
            let decrease = (prev - obj) / prev;
            prev = obj;
            if decrease < cfg.decrease_tol {
                crit = ws.criticality(&terms, fnorm)?;
                if crit <= cfg.criticality_tol {
                    converged = true;
                    break;
                }
                if crit < best_crit {
                    best_crit = crit;
                    stalled = 0;
                } else {
                    stalled += 1;
                    if stalled >= STALL_CHECKS {
                        break;
                    }
                }
            }
        }
        if crit.is_nan() {
            crit = ws.criticality(&terms, fnorm)?;
        }
        let better = best.as_ref().is_none_or(|b| prev < b.objective);
        if better {
            best = Some(AlsResult {
                g: ws.to_tensor(&ws.model(&terms)),
                max_term_norm: max_term_norm(&terms),
                terms,
                objective: prev,
                criticality_residual: crit,
                sweeps,
                converged,
                restart,
                trajectory,
            });
        }
    }
    Ok(best.expect("at least one restart"))
}

/// `e₁⊗e₁⊗e₂ + e₁⊗e₂⊗e₁ + e₂⊗e₁⊗e₁`, of rank three and border rank two.
pub fn w_tensor() -> Tensor {
    let format = TensorFormat::ordinary(&[2, 2, 2]).expect("valid format");
    // positions in the order (a, b, c) ↦ 4a + 2b + c
    let mut c = vec![0.0; 8];
    c[1] = 1.0;
    c[2] = 1.0;
    c[4] = 1.0;
    Tensor::from_real(format, &c).expect("finite")
}
