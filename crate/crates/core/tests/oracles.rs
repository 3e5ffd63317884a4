//! Independent oracles: exact-rational permutation sums for the Gram weights
//! and the pairing, and an elimination solver for three-qubit critical
//! points.

use critspace::format::MonomialIndex;
use critspace::linalg::C64;
use critspace::pairing::pair_monomials;
use critspace::solver::{solve_critical_rank_one, TrackerConfig};
use critspace::tensor::random_tensor;
use critspace::{Tensor, TensorFormat};
use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

fn factorial(n: usize) -> BigRational {
    BigRational::from_integer((1..=n).map(BigInt::from).product())
}

/// The word `e_{s_1} ⋯ e_{s_d}` of a monomial's exponent vector.
fn word(exps: &[u32]) -> Vec<usize> {
    exps.iter()
        .enumerate()
        .flat_map(|(i, &e)| std::iter::repeat_n(i, e as usize))
        .collect()
}

fn delta(a: usize, b: usize) -> BigRational {
    if a == b {
        BigRational::one()
    } else {
        BigRational::zero()
    }
}

/// `(v_1⋯v_d | v'_1⋯v'_d) = (1/d!) Σ_π Π (v_i | v'_{π(i)})` on basis words.
fn form(s: &[usize], t: &[usize]) -> BigRational {
    let d = s.len();
    let mut acc = BigRational::zero();
    for p in permutations(d) {
        let mut prod = BigRational::one();
        for i in 0..d {
            prod *= delta(s[i], t[p[i]]);
        }
        acc += prod;
    }
    acc / factorial(d)
}

/// `[v_1⋯v_d | w_1⋯w_d]` as a dense antisymmetric `n × n` matrix, from
/// `(1/(d·d!)) Σ_{i',j'} Σ_π Π_{i≠i'} (v_i|w_{π(i)}) v_{i'} ∧ w_{j'}`.
fn bracket(s: &[usize], t: &[usize], n: usize) -> Vec<Vec<BigRational>> {
    let d = s.len();
    let mut m = vec![vec![BigRational::zero(); n]; n];
    let perms = permutations(d - 1);
    for ip in 0..d {
        for jp in 0..d {
            let rest_s: Vec<usize> = (0..d).filter(|&i| i != ip).map(|i| s[i]).collect();
            let rest_t: Vec<usize> = (0..d).filter(|&j| j != jp).map(|j| t[j]).collect();
            let mut sum = BigRational::zero();
            for p in &perms {
                let mut prod = BigRational::one();
                for i in 0..d - 1 {
                    prod *= delta(rest_s[i], rest_t[p[i]]);
                }
                sum += prod;
            }
            // e_a ∧ e_b as the matrix E_ab − E_ba
            let (a, b) = (s[ip], t[jp]);
            m[a][b] += sum.clone();
            m[b][a] -= sum;
        }
    }
    let scale = BigRational::from_integer(BigInt::from(d)) * factorial(d);
    for row in &mut m {
        for x in row.iter_mut() {
            *x = x.clone() / scale.clone();
        }
    }
    m
}

fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap()
}

#[test]
fn gram_weights_match_permutation_sum() {
    for d in 1..=4 {
        for n in 1..=3 {
            let format = TensorFormat::symmetric(d, n).unwrap();
            let basis = format.monomial_basis();
            for (i, m) in basis.iter().enumerate() {
                let w = form(&word(&m.exps[0]), &word(&m.exps[0]));
                assert!((format.weights()[i] - to_f64(&w)).abs() <= 1e-15 * to_f64(&w), "{m:?}");
                for m2 in &basis[..i] {
                    assert!(form(&word(&m.exps[0]), &word(&m2.exps[0])).is_zero());
                }
            }
        }
    }
}

/// Compares `pair_monomials` with the exact oracle on every pair of
/// monomials: the support must agree exactly, the values to rounding.
fn check_pairing(format: &TensorFormat) {
    let basis = format.monomial_basis();
    for l in 0..format.factors() {
        let n = format.dim(l);
        for m1 in &basis {
            for m2 in &basis {
                let mut rest = BigRational::one();
                for i in (0..format.factors()).filter(|&i| i != l) {
                    rest *= form(&word(&m1.exps[i]), &word(&m2.exps[i]));
                }
                let want = bracket(&word(&m1.exps[l]), &word(&m2.exps[l]), n);
                let got = pair_monomials(format, m1, m2, l).unwrap();
                for a in 0..n {
                    for b in a + 1..n {
                        let exact = rest.clone() * want[a][b].clone();
                        let g = got.get(a, b);
                        assert_eq!(g.im, 0.0);
                        if exact.is_zero() {
                            assert_eq!(g.re, 0.0, "{m1:?} {m2:?} ℓ={l} ({a},{b})");
                        } else {
                            let e = to_f64(&exact);
                            assert!((g.re - e).abs() <= 1e-15 * e.abs(), "{m1:?} {m2:?}: {} vs {e}", g.re);
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn pairing_matches_permutation_sum_symmetric() {
    for d in 1..=4 {
        for n in 2..=3 {
            check_pairing(&TensorFormat::symmetric(d, n).unwrap());
        }
    }
}

#[test]
fn pairing_matches_permutation_sum_mixed() {
    for (degrees, dims) in [
        (vec![2, 1], vec![2, 3]),
        (vec![1, 1, 1], vec![2, 2, 2]),
        (vec![3, 2], vec![2, 2]),
        (vec![1, 2], vec![3, 3]),
    ] {
        check_pairing(&TensorFormat::new(degrees, dims).unwrap());
    }
}

#[test]
fn pairing_support_is_gcd_condition() {
    // nonzero only when the monomials agree off ℓ and share a degree d−1 factor
    let format = TensorFormat::new(vec![3, 1], vec![3, 2]).unwrap();
    let basis = format.monomial_basis();
    for m1 in &basis {
        for m2 in &basis {
            let common: u32 = m1.exps[0].iter().zip(&m2.exps[0]).map(|(a, b)| a.min(b)).sum();
            let allowed = m1.exps[1] == m2.exps[1] && common == 2;
            let nonzero = pair_monomials(&format, m1, m2, 0).unwrap().norm() != 0.0;
            assert!(!nonzero || allowed, "{m1:?} {m2:?}");
        }
    }
    let m = MonomialIndex::new(vec![vec![3, 0, 0], vec![1, 0]]);
    assert_eq!(pair_monomials(&format, &m, &m, 0).unwrap().norm(), 0.0);
}

/// `f(u, v, w)` straight from the coefficient array, positions `4a + 2b + c`.
fn trilinear(f: &[f64], u: [C64; 2], v: [C64; 2], w: [C64; 2]) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                acc += u[a] * v[b] * w[c] * f[4 * a + 2 * b + c];
            }
        }
    }
    acc
}

fn e(i: usize) -> [C64; 2] {
    let mut x = [C64::new(0.0, 0.0); 2];
    x[i] = C64::new(1.0, 0.0);
    x
}

/// The two parallelism conditions at `v = (1, s)`, `w = (1, t)` after
/// substituting `u = f(·, v, w)`, and that `u`.
fn conditions(f: &[f64], s: C64, t: C64) -> (C64, C64, [C64; 2]) {
    let one = C64::new(1.0, 0.0);
    let (v, w) = ([one, s], [one, t]);
    let u = [trilinear(f, e(0), v, w), trilinear(f, e(1), v, w)];
    let fv = [trilinear(f, u, e(0), w), trilinear(f, u, e(1), w)];
    let fw = [trilinear(f, u, v, e(0)), trilinear(f, u, v, e(1))];
    (fv[0] * v[1] - fv[1] * v[0], fw[0] * w[1] - fw[1] * w[0], u)
}

/// Coefficients of a polynomial of degree `deg` from values on a circle.
fn interpolate(deg: usize, radius: f64, eval: impl Fn(C64) -> C64) -> Vec<C64> {
    let k = deg + 1;
    let pts: Vec<C64> = (0..k)
        .map(|j| C64::from_polar(radius, 2.0 * std::f64::consts::PI * j as f64 / k as f64))
        .collect();
    let vals: Vec<C64> = pts.iter().map(|&x| eval(x)).collect();
    (0..k)
        .map(|i| {
            let mut c = C64::new(0.0, 0.0);
            for (j, val) in vals.iter().enumerate() {
                c += val * C64::from_polar(1.0, -2.0 * std::f64::consts::PI * (i * j) as f64 / k as f64);
            }
            c / (k as f64 * radius.powi(i as i32))
        })
        .collect()
}

/// Sylvester resultant of two quadratics in `t`.
fn resultant2(p: &[C64], q: &[C64]) -> C64 {
    let m = nalgebra::Matrix4::new(
        p[2], p[1], p[0], C64::new(0.0, 0.0),
        C64::new(0.0, 0.0), p[2], p[1], p[0],
        q[2], q[1], q[0], C64::new(0.0, 0.0),
        C64::new(0.0, 0.0), q[2], q[1], q[0],
    );
    m.determinant()
}

fn quadratic_in_t(g: impl Fn(C64) -> C64) -> Vec<C64> {
    interpolate(2, 1.0, g)
}

fn roots(coeffs: &[C64]) -> Vec<C64> {
    let deg = coeffs.len() - 1;
    let lead = coeffs[deg];
    let mut comp = DMatrix::<f64>::zeros(deg, deg);
    for i in 1..deg {
        comp[(i, i - 1)] = 1.0;
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -(coeffs[i] / lead).re;
    }
    comp.complex_eigenvalues().iter().copied().collect()
}

fn quad_roots(c: &[C64]) -> [C64; 2] {
    let disc = (c[1] * c[1] - c[0] * c[2] * 4.0).sqrt();
    [(-c[1] + disc) / (c[2] * 2.0), (-c[1] - disc) / (c[2] * 2.0)]
}

/// Affine `(s, t)` of every critical point of a real three-qubit tensor by
/// elimination: the resultant in `t` has degree 8 in `s`, and two of its
/// roots are the base points where `f(·, v, w)` vanishes.
fn elimination_points(f: &[f64]) -> (Vec<(C64, C64)>, usize) {
    let res = interpolate(8, 1.0, |s| {
        let p = quadratic_in_t(|t| conditions(f, s, t).0);
        let q = quadratic_in_t(|t| conditions(f, s, t).1);
        resultant2(&p, &q)
    });
    let mut points = Vec::new();
    let mut base = 0;
    for s in roots(&res) {
        let p = quadratic_in_t(|t| conditions(f, s, t).0);
        let t = quad_roots(&p)
            .into_iter()
            .min_by(|a, b| conditions(f, s, *a).1.norm().total_cmp(&conditions(f, s, *b).1.norm()))
            .unwrap();
        let (_, _, u) = conditions(f, s, t);
        let scale = 1.0 + s.norm() + t.norm();
        if (u[0].norm() + u[1].norm()) < 1e-6 * scale * scale {
            base += 1;
        } else {
            points.push((s, t));
        }
    }
    (points, base)
}

#[test]
fn three_qubits_match_elimination() {
    let format = TensorFormat::ordinary(&[2, 2, 2]).unwrap();
    for seed in 0..5 {
        let f: Tensor = random_tensor(&format, seed, true);
        let coeffs: Vec<f64> = f.coeffs().iter().map(|z| z.re).collect();
        let (expected, base) = elimination_points(&coeffs);
        assert_eq!(base, 2, "seed {seed}");
        assert_eq!(expected.len(), 6, "seed {seed}");
        let out = solve_critical_rank_one(&f, &TrackerConfig::default()).unwrap();
        assert_eq!(out.points.len(), 6);
        for (s, t) in &expected {
            let hit = out.points.iter().any(|p| {
                let v = p.tuple.vector(1);
                let w = p.tuple.vector(2);
                (v[1] / v[0] - s).norm() < 1e-6 * (1.0 + s.norm())
                    && (w[1] / w[0] - t).norm() < 1e-6 * (1.0 + t.norm())
            });
            assert!(hit, "seed {seed}: no solver point at s = {s}, t = {t}");
        }
    }
}
