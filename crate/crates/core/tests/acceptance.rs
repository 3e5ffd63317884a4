//! The ten acceptance criteria, run in order with one line each.
//!
//! Run with `cargo test -p critspace --test acceptance`. The process exits
//! nonzero when any criterion fails.

use std::time::{Duration, Instant};

use critspace::counting::{
    bott_h, count_critical_rank_one, expected_codim, symmetric_count_closed_form, vanishing_check,
};
use critspace::critical_space::{
    constraint_matrix, critical_space, membership_residual, span_rank, span_residual,
};
use critspace::harness::{cmd_demo_wtensor, cmd_remark224, DemoConfig, RunConfig, Tolerances};
use critspace::linalg::{hermitian_svd_baseline, rank_and_kernel, C64};
use critspace::pairing::{binary_d, pair_ell, pair_monomials, pair_rank_one};
use critspace::solver::{als_critical_rank_k, solve_critical_rank_one, AlsConfig, TrackerConfig};
use critspace::tensor::{random_tensor, random_tuple, rank_one};
use critspace::{CMatrix, Tensor, TensorFormat, VectorTuple};
use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

/// Outcome of one criterion: pass flag and a one-line summary.
type Outcome = (bool, String);

/// Name, check and runtime budget in seconds.
type Criterion = (&'static str, fn() -> Outcome, u64);

fn fmt(d: &[usize], n: &[usize]) -> TensorFormat {
    TensorFormat::new(d.to_vec(), n.to_vec()).unwrap()
}

fn pairing_formats() -> Vec<TensorFormat> {
    vec![
        fmt(&[1, 1, 1], &[2, 2, 2]),
        fmt(&[1, 1], &[2, 3]),
        fmt(&[1, 1], &[3, 3]),
        fmt(&[3], &[2]),
        fmt(&[2], &[3]),
        fmt(&[3, 1], &[2, 3]),
        fmt(&[1, 1, 1], &[2, 2, 4]),
    ]
}

fn c1_pairing_laws() -> Outcome {
    let formats = pairing_formats();
    let mut skew: f64 = 0.0;
    let mut rank_one_gap: f64 = 0.0;
    for seed in 0..200u64 {
        let format = &formats[seed as usize % formats.len()];
        let f = random_tensor(format, seed, false);
        let g = random_tensor(format, seed + 1000, false);
        let t = random_tuple(format, seed + 2000, false);
        let x = rank_one(format, &t).unwrap();
        for l in 0..format.factors() {
            let s = pair_ell(&f, &g, l).unwrap().add(&pair_ell(&g, &f, l).unwrap());
            skew = skew.max(s.norm() / (f.norm() * g.norm()));
            let d = pair_rank_one(&f, &t, l).unwrap().add(&pair_ell(&f, &x, l).unwrap().scale(C64::new(-1.0, 0.0)));
            rank_one_gap = rank_one_gap.max(d.norm() / (f.norm() * x.norm()));
        }
    }
    let mut support_violations = 0;
    for format in &formats {
        let basis = format.monomial_basis();
        for l in 0..format.factors() {
            for m1 in &basis {
                for m2 in &basis {
                    let same_rest = (0..format.factors()).all(|i| i == l || m1.exps[i] == m2.exps[i]);
                    let common: u32 = m1.exps[l].iter().zip(&m2.exps[l]).map(|(a, b)| a.min(b)).sum();
                    let allowed = same_rest && common as usize + 1 == format.degree(l);
                    let nonzero = pair_monomials(format, m1, m2, l).unwrap().norm() != 0.0;
                    // the condition is exact: allowed pairs with distinct letters are nonzero
                    let distinct = m1.exps[l] != m2.exps[l];
                    if nonzero != (allowed && distinct) {
                        support_violations += 1;
                    }
                }
            }
        }
    }
    let pass = skew <= 1e-12 && rank_one_gap <= 1e-12 && support_violations == 0;
    (
        pass,
        format!("skew {skew:.1e} (≤1e-12), rank-one {rank_one_gap:.1e} (≤1e-12), support violations {support_violations}"),
    )
}

fn c2_membership() -> Outcome {
    let mut worst: f64 = 0.0;
    for format in pairing_formats() {
        for seed in 0..10 {
            let f = random_tensor(&format, seed, false);
            worst = worst.max(membership_residual(&f, &f).unwrap());
        }
    }
    (worst <= 1e-12, format!("max residual {worst:.1e} (≤1e-12)"))
}

fn c3_codimension() -> Outcome {
    let cases = [
        (fmt(&[1, 1, 1], &[2, 2, 2]), 3),
        (fmt(&[1, 1], &[3, 3]), 6),
        (fmt(&[3], &[2]), 1),
        (fmt(&[1, 1, 1], &[3, 3, 3]), 9),
    ];
    let mut pass = true;
    let mut min_gap = f64::INFINITY;
    let mut min_kept = f64::INFINITY;
    let mut seen = Vec::new();
    for (format, want) in &cases {
        assert_eq!(expected_codim(format).value, *want);
        for seed in 0..10 {
            let cs = critical_space(&random_tensor(format, seed, true), 1e-8).unwrap();
            pass &= cs.codim == *want && cs.gap >= 1e4;
            min_gap = min_gap.min(cs.gap);
            min_kept = min_kept.min(cs.min_kept_relative);
            if seed == 0 {
                seen.push(format!("{format}→{}", cs.codim));
            }
        }
    }
    // full row rank leaves nothing below the cut, so the gap is infinite
    (
        pass,
        format!(
            "{} over 10 seeds, min gap {min_gap:.1e} (≥1e4), smallest kept σ/σ₁ {min_kept:.1e}",
            seen.join(" ")
        ),
    )
}

fn c4_three_qubits() -> Outcome {
    let format = fmt(&[1, 1, 1], &[2, 2, 2]);
    let count = count_critical_rank_one(&format).to_usize().unwrap();
    let mut pass = count == 6;
    let (mut perp, mut member, mut span_res): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut ranks = Vec::new();
    for seed in 0..5 {
        let f = random_tensor(&format, seed, true);
        let cfg = TrackerConfig {
            seed,
            ..TrackerConfig::default()
        };
        let out = solve_critical_rank_one(&f, &cfg).unwrap();
        pass &= out.stats.paths == 27;
        let points: Vec<_> = out.non_isotropic().collect();
        pass &= points.len() == count && out.points.len() == count;
        for p in &points {
            perp = perp.max(p.perpendicularity.unwrap());
            member = member.max(p.membership_residual);
        }
        let tensors: Vec<Tensor> = points.iter().map(|p| p.tensor.clone()).collect();
        let rank = span_rank(&format, &tensors, 1e-8).unwrap().rank;
        let dim = critical_space(&f, 1e-8).unwrap().dim();
        pass &= rank == 5 && dim == 5;
        ranks.push(rank);
        span_res = span_res.max(span_residual(&tensors, &f).unwrap().0);
    }
    pass &= perp <= 1e-8 && member <= 1e-8 && span_res <= 1e-8;
    (
        pass,
        format!(
            "6 points × 5 seeds, perp {perp:.1e}, membership {member:.1e}, span ranks {ranks:?}, f-in-span {span_res:.1e}"
        ),
    )
}

/// `{B : ABᵀ and AᵀB symmetric}` as a kernel basis.
fn commutator_kernel(a: &CMatrix) -> CMatrix {
    let (m, n) = (a.rows(), a.cols());
    let cols: Vec<Vec<C64>> = (0..m * n)
        .map(|k| {
            let mut e = vec![C64::new(0.0, 0.0); m * n];
            e[k] = C64::new(1.0, 0.0);
            let b = CMatrix::from_row_major(m, n, e).unwrap();
            let abt = a.mul(&b.transpose()).unwrap();
            let atb = a.transpose().mul(&b).unwrap();
            let r1 = abt.to_row_major();
            let r1t = abt.transpose().to_row_major();
            let r2 = atb.to_row_major();
            let r2t = atb.transpose().to_row_major();
            r1.iter().zip(&r1t).map(|(x, y)| x - y).chain(r2.iter().zip(&r2t).map(|(x, y)| x - y)).collect()
        })
        .collect();
    rank_and_kernel(&CMatrix::from_columns(m * m + n * n, &cols).unwrap(), 1e-8)
        .unwrap()
        .kernel_basis
}

fn c5_matrices() -> Outcome {
    let mut pass = true;
    let (mut worst_match, mut worst_trunc): (f64, f64) = (0.0, 0.0);
    for dims in [[3usize, 3], [3, 4]] {
        let format = fmt(&[1, 1], &dims);
        let f = random_tensor(&format, 1, true);
        let a = f.to_matrix().unwrap();
        let svd = hermitian_svd_baseline(&a).unwrap();
        let out = solve_critical_rank_one(&f, &TrackerConfig::default()).unwrap();
        pass &= out.points.len() == 3;
        // canonical alignment: points are sorted by |c| descending like σ
        for (i, p) in out.points.iter().enumerate() {
            let u: Vec<f64> = svd.u.column(i).iter().copied().collect();
            let v: Vec<f64> = svd.v.column(i).iter().copied().collect();
            let pair = VectorTuple::from_real(&[u, v]).unwrap();
            let c = p.scale.unwrap().norm();
            worst_match = worst_match
                .max(p.tuple.projective_distance(&pair))
                .max((c - svd.sigma[i]).abs() / svd.sigma[0]);
        }
        let ours = rank_and_kernel(&constraint_matrix(&f), 1e-8).unwrap().kernel_basis;
        let theirs = commutator_kernel(&a);
        let joint = rank_and_kernel(&ours.hstack(&theirs).unwrap(), 1e-8).unwrap().rank;
        pass &= ours.cols() == theirs.cols() && joint == ours.cols();
        // every truncation B_{i_1..i_k}
        let k = svd.sigma.len();
        for mask in 1u32..(1 << k) {
            let idx: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).collect();
            let b = svd.truncation(&idx);
            let bt = Tensor::from_real(format.clone(), &b.transpose().iter().copied().collect::<Vec<_>>()).unwrap();
            worst_trunc = worst_trunc.max(membership_residual(&f, &bt).unwrap());
        }
    }
    pass &= worst_match <= 1e-6 && worst_trunc <= 1e-10;
    (
        pass,
        format!("SVD match {worst_match:.1e} (≤1e-6), kernels equal, truncation membership {worst_trunc:.1e} (≤1e-10)"),
    )
}

fn c6_symmetric() -> Outcome {
    let mut pass = true;
    let cubic2 = fmt(&[3], &[2]);
    let f = random_tensor(&cubic2, 0, true);
    let out = solve_critical_rank_one(&f, &TrackerConfig::default()).unwrap();
    pass &= out.points.len() == 3 && count_critical_rank_one(&cubic2) == BigInt::from(3);
    let cs = critical_space(&f, 1e-8).unwrap();
    let df = binary_d(&f).unwrap();
    let mut perp: f64 = 0.0;
    for h in cs.basis_tensors() {
        perp = perp.max(h.inner(&df).unwrap().norm() / df.norm());
    }
    // equal subspaces: H_f has dimension dim T − 1 and annihilates D(f)
    pass &= cs.dim() == 3 && perp <= 1e-8;

    let cubic3 = fmt(&[3], &[3]);
    let g = random_tensor(&cubic3, 0, true);
    let out3 = solve_critical_rank_one(&g, &TrackerConfig::default()).unwrap();
    let closed = symmetric_count_closed_form(3, 2);
    pass &= closed == BigInt::from(7) && count_critical_rank_one(&cubic3) == closed;
    pass &= out3.points.len() == 7;
    let tensors: Vec<Tensor> = out3.non_isotropic().map(|p| p.tensor.clone()).collect();
    let rank = span_rank(&cubic3, &tensors, 1e-8).unwrap().rank;
    let dim = critical_space(&g, 1e-8).unwrap().dim();
    pass &= rank == 7 && dim == 7;
    (
        pass,
        format!(
            "S3C2: {} points, D(f)⊥ residual {perp:.1e}; S3C3: {} points, span rank {rank}, dim H_f {dim}",
            out.points.len(),
            out3.points.len()
        ),
    )
}

fn c7_higher_rank() -> Outcome {
    let mut pass = true;
    let mut critical = 0;
    let mut member: f64 = 0.0;
    let mut ey: f64 = 0.0;
    for format in [fmt(&[1, 1, 1], &[2, 2, 2]), fmt(&[1, 1], &[3, 3])] {
        for seed in 0..5 {
            let f = random_tensor(&format, seed, true);
            let f2 = f.norm() * f.norm();
            for k in 1..=2 {
                let cfg = AlsConfig {
                    seed,
                    restarts: 5,
                    ..AlsConfig::default()
                };
                let r = als_critical_rank_k(&f, k, &cfg).unwrap();
                if r.criticality_residual <= 1e-8 {
                    critical += 1;
                    member = member.max(membership_residual(&f, &r.g).unwrap());
                }
                if format.is_matrix() {
                    let svd = hermitian_svd_baseline(&f.to_matrix().unwrap()).unwrap();
                    let tail: f64 = svd.sigma[k..].iter().map(|s| s * s).sum();
                    ey = ey.max((r.objective - tail).abs() / f2);
                    pass &= r.criticality_residual <= 1e-8;
                }
            }
        }
    }
    pass &= member <= 1e-6 && ey <= 1e-8 && critical >= 10;
    (
        pass,
        format!("{critical}/20 runs critical, membership {member:.1e} (≤1e-6), Eckart–Young {ey:.1e} (≤1e-8)"),
    )
}

fn c8_two_two_four() -> Outcome {
    let mut pass = true;
    let mut worst: f64 = 0.0;
    let mut dims = Vec::new();
    for seed in 0..10 {
        let r = cmd_remark224(seed, &RunConfig::new());
        pass &= r.passed;
        let v = |k: &str| r.assertion(k).map(|a| a.value.clone());
        let res = v("f_in_span").and_then(|x| x.as_f64()).unwrap_or(f64::INFINITY);
        worst = worst.max(res);
        dims.push((v("dim_critical_space"), v("count"), v("span_rank")));
    }
    dims.dedup();
    pass &= dims.len() == 1;
    let (d, c, s) = &dims[0];
    (
        pass,
        format!(
            "dim H_f {}, count {}, span rank {} on all 10 seeds, f-in-span {worst:.1e} (≤1e-8)",
            d.clone().unwrap_or_default(),
            c.clone().unwrap_or_default(),
            s.clone().unwrap_or_default()
        ),
    )
}

/// Formats with `N ≤ max_n`, factor dimensions at least 2 and degrees up to
/// three, up to reordering.
fn small_formats(max_n: usize) -> Vec<TensorFormat> {
    fn go(rest: usize, min: (usize, usize), cur: &mut Vec<(usize, usize)>, out: &mut Vec<TensorFormat>) {
        if !cur.is_empty() {
            let (d, n): (Vec<usize>, Vec<usize>) = cur.iter().map(|&(n, d)| (d, n + 1)).unzip();
            out.push(TensorFormat::new(d, n).unwrap());
        }
        for n in min.0..=rest {
            for d in 1..=3 {
                if (n, d) < min {
                    continue;
                }
                cur.push((n, d));
                go(rest - n, (n, d), cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(max_n, (1, 1), &mut Vec::new(), &mut out);
    out
}

fn c9_cohomology() -> Outcome {
    let printed = [
        (bott_h(2, 0, 1, 2), 3),
        (bott_h(1, 1, 1, 0), 1),
        (bott_h(2, 2, 0, -3), 1),
        (bott_h(2, 1, 0, 5), 0),
    ];
    let mut pass = printed.iter().all(|(h, want)| *h == BigInt::from(*want));
    let mut serre = 0;
    for n in 0..=6u32 {
        for q in 0..=n {
            for r in 0..=n {
                for k in -12..=12i64 {
                    serre += 1;
                    pass &= bott_h(n, q, r, k) == bott_h(n, n - q, n - r, -k);
                }
            }
        }
    }
    let formats: Vec<TensorFormat> = small_formats(6).into_iter().filter(|f| f.all_triangle_ok()).collect();
    let mut checks = 0;
    for format in &formats {
        let big_n = format.segre_dim();
        for k in 2..=big_n {
            for q in 0..k {
                checks += 1;
                pass &= vanishing_check(format, k, q).unwrap().is_zero();
            }
        }
    }
    for m in 2..=11 {
        pass &= expected_codim(&fmt(&[1], &[m])).consistent();
        pass &= expected_codim(&fmt(&[2], &[m])).consistent();
    }
    (
        pass,
        format!(
            "4 printed cases, {serre} Serre pairs, {checks} vanishing checks on {} formats, codim cross-check n ≤ 10",
            formats.len()
        ),
    )
}

fn c10_wtensor() -> Outcome {
    let r = cmd_demo_wtensor(&DemoConfig::default(), &Tolerances::default());
    let obj = r.assertion("objective_small").unwrap();
    let div = r.assertion("terms_diverge").unwrap();
    (
        obj.passed && div.passed,
        format!(
            "objective {} ({}), max term norm {} ({}) after 10^4 sweeps",
            obj.value, obj.requirement, div.value, div.requirement
        ),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("pairing laws", c1_pairing_laws, 5),
        ("f in H_f", c2_membership, 1),
        ("codimension", c3_codimension, 5),
        ("three-qubit enumeration", c4_three_qubits, 30),
        ("matrix oracle", c5_matrices, 30),
        ("symmetric case", c6_symmetric, 60),
        ("higher rank", c7_higher_rank, 60),
        ("2x2x4 experiment", c8_two_two_four, 60),
        ("cohomology suite", c9_cohomology, 10),
        ("border rank demo", c10_wtensor, 10),
    ];
    let mut failed = Vec::new();
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = run();
        let took = start.elapsed();
        let in_time = took <= Duration::from_secs(*budget);
        let status = if ok && in_time { "PASS" } else { "FAIL" };
        println!(
            "criterion {:>2} {status} {name}: {detail}; {:.2} s (< {budget} s)",
            i + 1,
            took.as_secs_f64()
        );
        if !(ok && in_time) {
            failed.push(i + 1);
        }
    }
    if failed.is_empty() {
        println!("all 10 criteria pass");
    } else {
        println!("failing criteria: {failed:?}");
        std::process::exit(1);
    }
}
