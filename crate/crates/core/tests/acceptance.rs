//! Acceptance criteria, one line per criterion.
//!
//! Runs without the libtest harness so the table is always printed:
//! `cargo test -p povm-core --test acceptance`.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use povm_core::bases::{
    gell_mann_basis, gell_mann_label_position, make_partition, verify_basis, Partition,
};
use povm_core::conditions::{
    check_optimal_m2, check_optimal_m_ge_d, feasibility_screen, k_operator, radii, Regime,
};
use povm_core::construct::{
    fixture_povm, mum3_optimal_partition, optimal_n2_pauli, sufficient_construct_with, FeasibleSet,
    Fixture, TriangleBlock,
};
use povm_core::geometry::{ratio_curve, region_scan, write_curve_csv, MRule, Plane};
use povm_core::herm::{eigenvalues, min_eigenvalue, CMatrix, HermitianOperator, DEFAULT_PSD_TOL};
use povm_core::model::{born_probabilities, validate_povm, NmPovm};
use povm_core::random::{random_density_matrix, random_orthogonal};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, u64);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn tr_prod(a: &CMatrix, b: &CMatrix) -> f64 {
    (a * b).trace().re
}

/// The eight d = 3 matrices, written out entry by entry.
fn gell_mann_reference() -> Vec<CMatrix> {
    let s = 1.0 / 2f64.sqrt();
    let t = 1.0 / 6f64.sqrt();
    let z = c(0.0, 0.0);
    let m = |e: [Complex64; 9]| CMatrix::from_row_slice(3, 3, &e);
    vec![
        m([z, c(s, 0.0), z, c(s, 0.0), z, z, z, z, z]),
        m([z, c(0.0, -s), z, c(0.0, s), z, z, z, z, z]),
        m([c(s, 0.0), z, z, z, c(-s, 0.0), z, z, z, z]),
        m([z, z, c(s, 0.0), z, z, z, c(s, 0.0), z, z]),
        m([z, z, c(0.0, -s), z, z, z, c(0.0, s), z, z]),
        m([z, z, z, z, z, c(s, 0.0), z, c(s, 0.0), z]),
        m([z, z, z, z, z, c(0.0, -s), z, c(0.0, s), z]),
        m([c(t, 0.0), z, z, z, c(t, 0.0), z, z, z, c(-2.0 * t, 0.0)]),
    ]
}

fn criterion_1() -> Outcome {
    let b = gell_mann_basis(3).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for (k, g) in gell_mann_reference().iter().enumerate() {
        let pos = gell_mann_label_position(k + 1).ok_or("missing label")?;
        let got = b.element(pos).map_err(|e| e.to_string())?.matrix();
        worst = worst.max((got - g).iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    let id = b.element(1).map_err(|e| e.to_string())?.matrix();
    worst = worst.max(
        (id - CMatrix::identity(3, 3) * c(1.0 / 3f64.sqrt(), 0.0))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max),
    );
    ensure(worst <= 1e-15, || format!("entrywise deviation {worst:e}"))?;
    let r = verify_basis(&b, 1e-12).map_err(|e| e.to_string())?;
    ensure(r.passed, || format!("verify_basis failed: {r:?}"))?;
    Ok(format!(
        "max entry deviation {worst:e}, orthonormality residual {:e}",
        r.orthonormality_residual
    ))
}

/// Checks the trace relations with plain matrix products.
fn relation_oracle(p: &NmPovm) -> f64 {
    let q = *p.params();
    let (d, m, x) = (q.d as f64, q.m as f64, q.x);
    let el = p.elements();
    let mut worst: f64 = 0.0;
    for i in 0..el.len() {
        worst = worst.max((el[i].matrix().trace().re - d / m).abs());
        for j in 0..el.len() {
            let want = if i == j {
                x
            } else if i / q.m == j / q.m {
                (d - m * x) / (m * (m - 1.0))
            } else {
                d / (m * m)
            };
            worst = worst.max((tr_prod(el[i].matrix(), el[j].matrix()) - want).abs());
        }
    }
    for alpha in 1..=q.n {
        let sum: CMatrix = p.block(alpha).iter().map(|e| e.matrix().clone()).sum();
        worst = worst.max(
            (sum - CMatrix::identity(q.d, q.d))
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max),
        );
    }
    worst
}

fn criterion_2() -> Outcome {
    let mut cases: Vec<(String, NmPovm)> = vec![
        ("sic_qubit".into(), fixture_povm(Fixture::SicQubit)),
        ("mub_d3".into(), fixture_povm(Fixture::MubD3)),
    ];
    for k in 1..=3 {
        let d = 1usize << k;
        for n in [1, d * d - 1] {
            cases.push((
                format!("pauli_n2(k={k},N={n})"),
                optimal_n2_pauli(k, n).map_err(|e| e.to_string())?,
            ));
        }
    }
    ensure(
        cases[0].1.params().x == 0.25 && cases[1].1.params().x == 1.0,
        || "fixture x values".into(),
    )?;
    let mut worst: f64 = 0.0;
    for (name, p) in &cases {
        let r = validate_povm(p, 1e-10).map_err(|e| e.to_string())?;
        let res = r.max_relation_residual().max(r.psd_residual);
        ensure(r.passed && res <= 1e-10, || {
            format!("{name}: residual {res:e}")
        })?;
        let oracle = relation_oracle(p);
        ensure(oracle <= 1e-10, || {
            format!("{name}: oracle residual {oracle:e}")
        })?;
        worst = worst.max(res).max(oracle);
    }
    Ok(format!("{} POVMs, worst residual {worst:e}", cases.len()))
}

fn criterion_3() -> Outcome {
    let (p, report) = mum3_optimal_partition().map_err(|e| e.to_string())?;
    ensure((report.x - 5.0 / 9.0).abs() <= 1e-9, || {
        format!("x = {}", report.x)
    })?;
    let v = validate_povm(&p, 1e-10).map_err(|e| e.to_string())?;
    ensure(v.passed, || format!("validation failed: {v:?}"))?;
    ensure(
        report.blocks[1].scan.feasible_set == FeasibleSet::Isolated,
        || format!("B2 is {:?}", report.blocks[1].scan.feasible_set),
    )?;

    let basis = gell_mann_basis(3).map_err(|e| e.to_string())?;
    let blocks3 = Partition::mum3();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let angles: Vec<f64> = (0..10_000).map(|_| rng.random_range(0.0..TAU)).collect();
    let mut fractions = Vec::new();
    for b in [2, 3] {
        let tri = TriangleBlock::new(&basis, &blocks3.blocks()[b]).map_err(|e| e.to_string())?;
        let ok = angles
            .iter()
            .filter(|&&t| tri.min_eigenvalue(report.gamma, t) >= -DEFAULT_PSD_TOL)
            .count();
        let frac = ok as f64 / angles.len() as f64;
        ensure(frac >= 0.99, || {
            format!("B{} feasible fraction {frac}", b + 1)
        })?;
        fractions.push(frac);
    }
    // The B2 feasible set has no interior: a tiny offset from the chosen angle fails.
    let tri = TriangleBlock::new(&basis, &blocks3.blocks()[1]).map_err(|e| e.to_string())?;
    let t0 = report.blocks[1].scan.angle;
    let off = tri
        .min_eigenvalue(report.gamma, t0 + 1e-3)
        .max(tri.min_eigenvalue(report.gamma, t0 - 1e-3));
    ensure(off < -DEFAULT_PSD_TOL, || {
        format!("B2 neighbourhood feasible ({off:e})")
    })?;
    Ok(format!(
        "x = {:.15}, B2 isolated at {:.9}, B3/B4 feasible fractions {:?}",
        report.x, t0, fractions
    ))
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = f64::INFINITY;
    for (d, m) in [(3usize, 3usize), (4, 4), (8, 4), (5, 2)] {
        let n = (d * d - 1) / (m - 1);
        let x = d as f64 / (m * m) as f64 + d as f64 / ((m * m) as f64 * (d as f64 - 1.0));
        let basis = gell_mann_basis(d).map_err(|e| e.to_string())?;
        let partition = make_partition(d, n, m, None).map_err(|e| e.to_string())?;
        for trial in 0..200 {
            let rotated = basis
                .rotated(&random_orthogonal(d * d - 1, &mut rng))
                .map_err(|e| e.to_string())?;
            let p = sufficient_construct_with(x, &rotated, &partition)
                .map_err(|e| format!("(d,M)=({d},{m}) trial {trial}: {e}"))?;
            for e in p.elements() {
                let lo = min_eigenvalue(e);
                ensure(lo >= -1e-10, || {
                    format!("(d,M)=({d},{m}) trial {trial}: min eigenvalue {lo:e}")
                })?;
                worst = worst.min(lo);
            }
        }
    }
    Ok(format!(
        "800 rotated constructions at the bound, worst min eigenvalue {worst:e}"
    ))
}

fn criterion_5() -> Outcome {
    let r = radii(3, 3).map_err(|e| e.to_string())?;
    ensure(
        (r.r_in_sq - 1.0 / 6.0).abs() < 1e-15 && (r.r_out_sq - 2.0 / 3.0).abs() < 1e-15,
        || format!("radii(3,3) = ({}, {})", r.r_in_sq, r.r_out_sq),
    )?;
    for m in 2..=64 {
        let r = radii(2, m).map_err(|e| e.to_string())?;
        let want = 2.0 / (m * m) as f64;
        ensure(
            r.r_in_sq == r.r_out_sq && (r.r_in_sq - want).abs() < 1e-16,
            || format!("radii(2,{m})"),
        )?;
    }
    let mut worst: f64 = 0.0;
    for (rule, oracle) in [
        (
            MRule::MGeD,
            (|d: f64| 1.0 / ((d - 1.0) * (d - 1.0))) as fn(f64) -> f64,
        ),
        (MRule::MEq2, |d: f64| 1.0 / (d - 1.0)),
    ] {
        let curve = ratio_curve(32, rule).map_err(|e| e.to_string())?;
        ensure(curve.len() == 31, || "curve length".into())?;
        for pt in &curve {
            let d = pt.d as f64;
            worst = worst.max((pt.r - oracle(d)).abs());
            let m = if rule == MRule::MGeD { d } else { 2.0 };
            let r_in_sq = d / (m * m * (d - 1.0));
            let r_out_sq = (d * (m - 1.0) / (m * m)).min(d * (d - 1.0) / (m * m));
            worst = worst.max((pt.r * r_out_sq - r_in_sq).abs());
        }
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let file =
            std::fs::File::create(dir.path().join("curve.csv")).map_err(|e| e.to_string())?;
        write_curve_csv(&curve, file).map_err(|e| e.to_string())?;
    }
    ensure(worst < 1e-14, || format!("curve deviation {worst:e}"))?;
    Ok(format!("radii exact, curve deviation {worst:e}"))
}

fn max_gram_deviation(ops: &[HermitianOperator]) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..ops.len() {
        for j in 0..ops.len() {
            let g = tr_prod(ops[i].matrix(), ops[j].matrix());
            worst = worst.max((g - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    worst
}

fn criterion_6() -> Outcome {
    // Independent spectra: for the qubit SIC ±1/√2; for the d = 3 MUBs the
    // operators act as c(1+√3), c(−2−√3), c on an eigenbasis, c = √2/((√3+1)√6).
    let c3 = 2f64.sqrt() / ((3f64.sqrt() + 1.0) * 6f64.sqrt());
    let mut oracle_3 = vec![c3 * (1.0 + 3f64.sqrt()), c3 * (-2.0 - 3f64.sqrt()), c3];
    oracle_3.sort_by(|a, b| b.total_cmp(a));
    let cases = [
        (
            Fixture::SicQubit,
            vec![1.0 / 2f64.sqrt(), -1.0 / 2f64.sqrt()],
        ),
        (Fixture::MubD3, oracle_3),
    ];
    let mut details = Vec::new();
    for (f, oracle) in cases {
        let p = fixture_povm(f);
        let r = check_optimal_m_ge_d(&p).map_err(|e| e.to_string())?;
        ensure(r.passed, || format!("{}: {:?}", f.name(), r.checks))?;
        let ops = r.extracted_operators.ok_or("no operators")?;
        let d = p.params().d;
        ensure(ops.len() == d * d - 1, || {
            format!("{}: {} operators", f.name(), ops.len())
        })?;
        let gram = max_gram_deviation(&ops);
        ensure(gram <= 1e-9, || {
            format!("{}: Gram deviation {gram:e}", f.name())
        })?;
        let mut spectral: f64 = 0.0;
        for g in &ops {
            let ev = eigenvalues(g);
            spectral = spectral.max(
                ev.iter()
                    .zip(&oracle)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max),
            );
        }
        ensure(spectral <= 1e-9, || {
            format!("{}: spectrum deviation {spectral:e}", f.name())
        })?;
        details.push(format!(
            "{} gram {gram:.1e} spectrum {spectral:.1e}",
            f.name()
        ));
    }
    Ok(details.join(", "))
}

fn criterion_7() -> Outcome {
    let mut count = 0;
    for k in 1..=3 {
        let d = 1usize << k;
        let target = 1.0 / (d as f64).sqrt();
        for n in [1, 3, d * d - 1] {
            let p = optimal_n2_pauli(k, n).map_err(|e| e.to_string())?;
            let r = check_optimal_m2(&p).map_err(|e| e.to_string())?;
            ensure(r.passed, || format!("k={k} N={n}: {:?}", r.checks))?;
            let ks: Vec<HermitianOperator> = p.elements().iter().map(k_operator).collect();
            for kk in &ks {
                let ev = eigenvalues(kk);
                let dev = ev
                    .iter()
                    .enumerate()
                    .map(|(i, v)| (v - if i < d / 2 { target } else { -target }).abs())
                    .fold(0.0, f64::max);
                ensure(dev <= 1e-9, || {
                    format!("k={k} N={n}: K spectrum deviation {dev:e}")
                })?;
            }
            let firsts: Vec<HermitianOperator> = ks.iter().step_by(2).cloned().collect();
            let orth = max_gram_deviation(&firsts);
            ensure(orth <= 1e-10, || {
                format!("k={k} N={n}: orthogonality {orth:e}")
            })?;
            for pair in ks.chunks(2) {
                ensure(pair[1].matrix() == &(-pair[0].matrix()), || {
                    format!("k={k} N={n}: K pair not antisymmetric")
                })?;
            }
            count += 1;
        }
    }
    for d in (3..=41).step_by(2) {
        for n in [1, (d * d - 1) / 2, d * d - 1] {
            let s = feasibility_screen(d, n, 2).map_err(|e| e.to_string())?;
            ensure(s.excluded && s.reasons.iter().any(|r| r == "d odd"), || {
                format!("odd d={d} N={n} not rejected")
            })?;
        }
    }
    Ok(format!(
        "{count} Pauli POVMs pass, odd d in 3..=41 rejected"
    ))
}

fn criterion_8() -> Outcome {
    let s = feasibility_screen(8, 21, 4).map_err(|e| e.to_string())?;
    ensure(
        s.informationally_complete
            && s.rank == Some(2)
            && s.x == 2.0
            && !s.excluded
            && s.verdict == "not excluded",
        || format!("(8,21,4): {s:?}"),
    )?;
    ensure(s.regime == Regime::MBetween, || "regime".into())?;
    let mut rejected = 0;
    for d in 3..=40 {
        for m in 2..d {
            if d % m == 0 {
                continue;
            }
            for n in [1, (d * d - 1) / (m - 1)] {
                let s = feasibility_screen(d, n, m).map_err(|e| e.to_string())?;
                ensure(s.excluded, || format!("({d},{n},{m}) not rejected"))?;
                rejected += 1;
            }
        }
    }
    Ok(format!(
        "(8,21,4) not excluded with rank 2, {rejected} non-integral cases rejected"
    ))
}

fn criterion_9() -> Outcome {
    let b = gell_mann_basis(3).map_err(|e| e.to_string())?;
    let (g1, g8) = (
        gell_mann_label_position(1).unwrap(),
        gell_mann_label_position(8).unwrap(),
    );
    let plane = Plane::new(&b, g1, g8, 3).map_err(|e| e.to_string())?;
    let minus = plane.boundary_radius(-FRAC_PI_2);
    let plus = plane.boundary_radius(FRAC_PI_2);
    // λ(I/3 + v g8) = 1/3 + v/√6 (twice), 1/3 − 2v/√6.
    let want_minus = 6f64.sqrt() / 3.0;
    let want_plus = 6f64.sqrt() / 6.0;
    ensure((minus - want_minus).abs() <= 1e-8, || {
        format!("-g8 radius {minus}")
    })?;
    ensure((plus - want_plus).abs() <= 1e-8, || {
        format!("+g8 radius {plus}")
    })?;
    ensure(
        (want_minus - (2.0f64 / 3.0).sqrt()).abs() < 1e-15
            && (want_plus - 1.0 / 6f64.sqrt()).abs() < 1e-15,
        || "oracle".into(),
    )?;
    let r = 1.1 * (2.0f64 / 3.0).sqrt();
    let s = region_scan(&b, g1, g8, 3, 512, r).map_err(|e| e.to_string())?;
    let r_in = 1.0 / 6f64.sqrt();
    let mut inside = 0;
    for p in 0..s.min_eig.len() {
        let (u, v) = s.point(p);
        if u * u + v * v <= r_in * r_in {
            inside += 1;
            ensure(s.psd_mask[p], || format!("({u},{v}) inside r_in not PSD"))?;
        }
    }
    ensure(inside > 0, || "no points inside r_in".into())?;
    Ok(format!(
        "radii {minus:.12} / {plus:.12}, {inside} in-disk points PSD, PSD fraction {:.4}",
        s.psd_fraction()
    ))
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst_sum: f64 = 0.0;
    let mut worst_neg: f64 = 0.0;
    for f in Fixture::ALL {
        let p = fixture_povm(f);
        let (d, m) = (p.params().d, p.params().m);
        for _ in 0..1000 {
            let rho = random_density_matrix(d, &mut rng);
            let probs = born_probabilities(&p, &rho).map_err(|e| e.to_string())?;
            for block in probs.chunks(m) {
                worst_sum = worst_sum.max((block.iter().sum::<f64>() - 1.0).abs());
            }
            worst_neg = worst_neg.min(probs.iter().copied().fold(f64::INFINITY, f64::min));
        }
    }
    ensure(worst_sum <= 1e-10, || {
        format!("probability sum deviation {worst_sum:e}")
    })?;
    ensure(worst_neg >= -1e-12, || {
        format!("negative probability {worst_neg:e}")
    })?;
    Ok(format!(
        "sum deviation {worst_sum:e}, min probability {worst_neg:e}"
    ))
}

fn main() -> std::process::ExitCode {
    let criteria: [Criterion; 10] = [
        ("Gell-Mann fidelity", criterion_1, 1),
        ("Defining-relation suite", criterion_2, 5),
        ("Maximal MUM", criterion_3, 60),
        ("Sufficient-condition guarantee", criterion_4, 120),
        ("Radii and ratio", criterion_5, 1),
        ("M>=d necessary condition", criterion_6, 5),
        ("M=2 iff-criterion", criterion_7, 10),
        ("2<M<d screening", criterion_8, 1),
        ("Region scan oracle", criterion_9, 30),
        ("Born-rule property", criterion_10, 10),
    ];
    let mut failures = Vec::new();
    for (i, (name, f, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let elapsed = start.elapsed();
        let in_time = elapsed < Duration::from_secs(*limit);
        let (ok, detail) = match outcome {
            Ok(d) if in_time => (true, d),
            Ok(d) => (false, format!("{d}; too slow")),
            Err(e) => (false, e),
        };
        println!(
            "[{}] {:>2}. {name} ({:.3} s, limit {limit} s): {detail}",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            elapsed.as_secs_f64()
        );
        if !ok {
            failures.push(i + 1);
        }
    }
    if failures.is_empty() {
        println!("acceptance: all {} criteria passed", criteria.len());
        std::process::ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failures:?}");
        std::process::ExitCode::FAILURE
    }
}
