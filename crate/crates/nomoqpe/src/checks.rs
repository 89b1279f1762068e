//! Self-verification suite: oracle-vs-formula identities, block-exponential
//! decomposition, operator algebra and encoding equivalence on the bundled
//! toys. The CLI `verify` subcommand and the integration tests both run
//! these checks.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::blocks::{
    alternate_block_count_equal_max, alternate_block_type_total, ancilla_widths,
    block_count_formula, enumerate_blocks, gate_count_ng, inverse_transform, register_transform,
    verify_block_exponential,
};
use crate::error::Result;
use crate::fock::LadderOp;
use crate::mapping::{layout_qubits, map_hamiltonian, map_ladder, restrict_to_encoded, Encoding};
use crate::matrix::exact_spectrum;
use crate::particles::{build_indexing, ParticleClassSpec, ParticleKind};
use crate::propagator::trotter_error;
use crate::systemfile::SystemFile;
use crate::toys::{parse_toy, TOY_NAMES};

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn pass(name: impl Into<String>, detail: impl Into<String>) -> Self {
        CheckResult {
            name: name.into(),
            passed: true,
            detail: detail.into(),
        }
    }

    fn of(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        CheckResult {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Runs the whole suite. `threads` caps the workers used for the
/// block-exponential grid (the only part worth parallelizing).
pub fn run_all_checks(threads: usize) -> Vec<CheckResult> {
    let mut out = Vec::new();
    out.extend(block_counting_checks());
    out.extend(discrepancy_checks());
    out.push(gate_count_integrality_check());
    out.push(transform_bijection_check());
    out.extend(block_exponential_checks(threads.max(1)));
    out.extend(algebra_checks());
    out.extend(toy_encoding_checks());
    out.push(trotter_slope_check());
    out
}

/// Oracle supremacy: the counting formulas must reproduce the brute-force
/// block enumeration for all truncations up to 6.
pub fn block_counting_checks() -> Vec<CheckResult> {
    let mut formula_ok = true;
    let mut m1_ok = true;
    let mut m2_ok = true;
    let mut detail = String::new();
    for n1 in 0..=6u32 {
        for n2 in 0..=6u32 {
            let s = enumerate_blocks(n1, n2).expect("guarded sizes");
            for d in 1..=(n1.min(n2) + 1) {
                let f = block_count_formula(n1, n2, d).expect("in-range d");
                let o = s.histogram.get(&(d as usize)).copied().unwrap_or(0);
                if f != o {
                    formula_ok = false;
                    detail = format!("({n1},{n2},{d}): formula {f} vs oracle {o}");
                }
            }
            if s.moment_sum(1) != ((n1 as u128 + 1) * (n2 as u128 + 1)).pow(2) {
                m1_ok = false;
            }
            if BigInt::from(s.moment_sum(2)) != gate_count_ng(n1 as u64, n2 as u64).unwrap() {
                m2_ok = false;
            }
        }
    }
    vec![
        CheckResult::of(
            "block-count formula vs enumeration (n1,n2 <= 6)",
            formula_ok,
            if formula_ok { "all histograms match".into() } else { detail },
        ),
        CheckResult::of(
            "sum d p_d = (n1+1)^2 (n2+1)^2",
            m1_ok,
            "register dimension identity",
        ),
        CheckResult::of(
            "sum d^2 p_d = closed-form gate count",
            m2_ok,
            "second-moment identity",
        ),
    ]
}

/// The two places where the quoted closed forms are known to disagree with
/// the enumeration. Both values are reported; the divergence is expected and
/// these checks PASS when it is reproduced exactly.
pub fn discrepancy_checks() -> Vec<CheckResult> {
    let s22 = enumerate_blocks(2, 2).unwrap();
    let oracle_d1 = s22.histogram.get(&1).copied().unwrap_or(0);
    let alt_d1 = alternate_block_count_equal_max(2, 1);
    let s11 = enumerate_blocks(1, 1).unwrap();
    let oracle_total: u64 = s11.histogram.values().sum();
    let alt_total = alternate_block_type_total(1, 1);
    vec![
        CheckResult::of(
            "equal-truncation special case divergence (n=2, d=1)",
            oracle_d1 == 50 && alt_d1 == 26,
            format!("oracle {oracle_d1}, quoted special case {alt_d1} (divergence expected)"),
        ),
        CheckResult::of(
            "block-type total divergence (n1=n2=1)",
            oracle_total == 15 && alt_total == 3,
            format!("oracle {oracle_total}, quoted closed form {alt_total} (divergence expected)"),
        ),
    ]
}

pub fn gate_count_integrality_check() -> CheckResult {
    for n in 0..=50u64 {
        for m in 0..=50u64 {
            if gate_count_ng(n, m).is_err() {
                return CheckResult::of(
                    "gate-count closed form integrality (n,m <= 50)",
                    false,
                    format!("non-integer value at ({n},{m})"),
                );
            }
        }
    }
    CheckResult::pass(
        "gate-count closed form integrality (n,m <= 50)",
        "all 2601 evaluations are integers",
    )
}

pub fn transform_bijection_check() -> CheckResult {
    for n1 in 0..=5u32 {
        for n2 in 0..=5u32 {
            let w = ancilla_widths(n1, n2);
            if w.asg_ancilla != w.q1.abs_diff(w.q2) + 2 || w.recovery != 2 * w.q1.abs_diff(w.q2) + 6
            {
                return CheckResult::of(
                    "register transform bijection and ancilla widths",
                    false,
                    format!("width mismatch at ({n1},{n2})"),
                );
            }
            for fp in 0..=n1 {
                for fq in 0..=n2 {
                    for fr in 0..=n1 {
                        for fs in 0..=n2 {
                            let s = [fp, fq, fr, fs];
                            let t = register_transform(s, n1, n2).unwrap();
                            if inverse_transform(t, n1, n2).ok() != Some(s) {
                                return CheckResult::of(
                                    "register transform bijection and ancilla widths",
                                    false,
                                    format!("round trip failed at {s:?} in box ({n1},{n2})"),
                                );
                            }
                        }
                    }
                }
            }
        }
    }
    CheckResult::pass(
        "register transform bijection and ancilla widths",
        "bijective on all boxes up to (5,5)",
    )
}

/// Dense vs block-wise exponential over 20 seeded (phi, tau) draws per box.
pub fn block_exponential_checks(threads: usize) -> Vec<CheckResult> {
    let boxes = [(1u32, 1u32), (1, 2), (2, 2)];
    let mut jobs: Vec<(u32, u32, f64, f64)> = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for &(n1, n2) in &boxes {
        for _ in 0..20 {
            jobs.push((n1, n2, rng.gen_range(-1.0..1.0), rng.gen_range(0.1..2.0)));
        }
    }
    let chunk = jobs.len().div_ceil(threads);
    let worst: Vec<Result<(f64, (u32, u32))>> = std::thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .chunks(chunk)
            .map(|slice| {
                scope.spawn(move || {
                    let mut worst = (0.0f64, (0u32, 0u32));
                    for &(n1, n2, phi, tau) in slice {
                        let r = verify_block_exponential(n1, n2, phi, tau)?;
                        if r > worst.0 {
                            worst = (r, (n1, n2));
                        }
                    }
                    Ok(worst)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("no panic")).collect()
    });

    let mut max_residual = 0.0f64;
    let mut max_box = (0u32, 0u32);
    for w in worst {
        match w {
            Ok((r, b)) => {
                if r > max_residual {
                    max_residual = r;
                    max_box = b;
                }
            }
            Err(e) => {
                return vec![CheckResult::of(
                    "block-diagonal exponential decomposition",
                    false,
                    e.to_string(),
                )]
            }
        }
    }
    vec![CheckResult::of(
        "block-diagonal exponential decomposition",
        max_residual <= 1e-9,
        format!("worst residual {max_residual:.3e} at box {max_box:?} over 60 seeded draws"),
    )]
}

fn commutator(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    a * b - b * a
}

fn anticommutator(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    a * b + b * a
}

fn cmax(m: &DMatrix<Complex64>) -> f64 {
    m.iter().fold(0.0f64, |acc, v| acc.max(v.norm()))
}

/// Operator algebra as matrix identities: fermion anticommutation, boson
/// commutation below the truncation, cross-class commutation, and
/// annihilation of the top occupation by the creation operator.
pub fn algebra_checks() -> Vec<CheckResult> {
    let mut out = Vec::new();

    // fermions: {a_p, a+_q} = delta_pq, {a_p, a_q} = 0, up to 4 orbitals
    let mut worst = 0.0f64;
    let idx = build_indexing(&[ParticleClassSpec::new(ParticleKind::Fermion, 2, 4, "e")]).unwrap();
    let layout = layout_qubits(&idx, &[Encoding::JordanWigner]).unwrap();
    let dim = 16;
    let eye = DMatrix::<Complex64>::identity(dim, dim);
    for p in 1..=4usize {
        for q in 1..=4usize {
            let ap = map_ladder(LadderOp::Annihilate, p, &layout)
                .unwrap()
                .materialize()
                .unwrap();
            let cq = map_ladder(LadderOp::Create, q, &layout)
                .unwrap()
                .materialize()
                .unwrap();
            let aq = map_ladder(LadderOp::Annihilate, q, &layout)
                .unwrap()
                .materialize()
                .unwrap();
            let expected = if p == q { eye.clone() } else { DMatrix::zeros(dim, dim) };
            worst = worst.max(cmax(&(anticommutator(&ap, &cq) - expected)));
            worst = worst.max(cmax(&anticommutator(&ap, &aq)));
        }
    }
    out.push(CheckResult::of(
        "fermion anticommutation identities",
        worst <= 1e-12,
        format!("max deviation {worst:.3e}"),
    ));

    // bosons: [a_p, a+_q] = delta_pq on states below the truncation, both
    // encodings, n up to 3
    let mut worst = 0.0f64;
    for n in 1..=3usize {
        for enc in [Encoding::DirectBoson, Encoding::CompactBoson] {
            let idx =
                build_indexing(&[ParticleClassSpec::new(ParticleKind::Boson, n, 2, "b")]).unwrap();
            let layout = layout_qubits(&idx, &[enc]).unwrap();
            for p in 1..=2usize {
                for q in 1..=2usize {
                    let a = map_ladder(LadderOp::Annihilate, p, &layout)
                        .unwrap()
                        .materialize()
                        .unwrap();
                    let c = map_ladder(LadderOp::Create, q, &layout)
                        .unwrap()
                        .materialize()
                        .unwrap();
                    let comm = commutator(&a, &c);
                    if p != q {
                        worst = worst.max(cmax(&comm));
                        continue;
                    }
                    // column action on every encoded configuration with
                    // occ(p) < n must return the same state
                    for f1 in 0..=n {
                        for f2 in 0..=n {
                            let occ = [f1 as u8, f2 as u8];
                            if occ[p - 1] as usize >= n {
                                continue; // identity only guaranteed below truncation
                            }
                            let e = layout
                                .encode(&crate::fock::Configuration::new(occ.to_vec()))
                                .unwrap();
                            for row in 0..comm.nrows() {
                                let expected = if row == e { 1.0 } else { 0.0 };
                                worst = worst
                                    .max((comm[(row, e)] - Complex64::new(expected, 0.0)).norm());
                            }
                        }
                    }
                }
            }
        }
    }
    out.push(CheckResult::of(
        "boson commutation below the truncation",
        worst <= 1e-12,
        format!("max deviation {worst:.3e}"),
    ));

    // cross-class commutation: any two operators from different classes
    // commute
    let mut worst = 0.0f64;
    let idx = build_indexing(&[
        ParticleClassSpec::new(ParticleKind::Fermion, 1, 2, "e"),
        ParticleClassSpec::new(ParticleKind::Boson, 2, 1, "b"),
    ])
    .unwrap();
    for enc in [Encoding::DirectBoson, Encoding::CompactBoson] {
        let layout = layout_qubits(&idx, &[Encoding::JordanWigner, enc]).unwrap();
        for fermion_orbital in 1..=2usize {
            for fop in [LadderOp::Create, LadderOp::Annihilate] {
                for bop in [LadderOp::Create, LadderOp::Annihilate] {
                    let f = map_ladder(fop, fermion_orbital, &layout)
                        .unwrap()
                        .materialize()
                        .unwrap();
                    let b = map_ladder(bop, 3, &layout).unwrap().materialize().unwrap();
                    worst = worst.max(cmax(&commutator(&f, &b)));
                }
            }
        }
    }
    out.push(CheckResult::of(
        "cross-class commutation",
        worst <= 1e-12,
        format!("max deviation {worst:.3e}"),
    ));

    // creation annihilates the top occupation
    let mut worst = 0.0f64;
    for n in 1..=3usize {
        for enc in [Encoding::DirectBoson, Encoding::CompactBoson] {
            let idx =
                build_indexing(&[ParticleClassSpec::new(ParticleKind::Boson, n, 1, "b")]).unwrap();
            let layout = layout_qubits(&idx, &[enc]).unwrap();
            let c = map_ladder(LadderOp::Create, 1, &layout)
                .unwrap()
                .materialize()
                .unwrap();
            let top = layout
                .encode(&crate::fock::Configuration::new(vec![n as u8]))
                .unwrap();
            for row in 0..c.nrows() {
                worst = worst.max(c[(row, top)].norm());
            }
        }
    }
    out.push(CheckResult::of(
        "creation annihilates the top occupation",
        worst <= 1e-12,
        format!("max deviation {worst:.3e}"),
    ));

    out
}

fn encoding_choices(file: &SystemFile) -> Vec<Vec<Encoding>> {
    let mut combos: Vec<Vec<Encoding>> = vec![Vec::new()];
    for class in file.indexing.classes() {
        let options: &[Encoding] = match class.kind {
            ParticleKind::Fermion => &[Encoding::JordanWigner],
            ParticleKind::Boson => &[Encoding::DirectBoson, Encoding::CompactBoson],
            ParticleKind::Distinguishable => &[Encoding::DistinguishableOneQubit],
        };
        combos = combos
            .into_iter()
            .flat_map(|prefix| {
                options.iter().map(move |&e| {
                    let mut v = prefix.clone();
                    v.push(e);
                    v
                })
            })
            .collect();
    }
    combos
}

/// Every bundled toy, every admissible encoding combination up to 10 qubits:
/// the mapped matrix restricted to the encoded basis must reproduce the
/// configuration-basis spectrum.
pub fn toy_encoding_checks() -> Vec<CheckResult> {
    let mut out = Vec::new();
    for name in TOY_NAMES {
        let file = parse_toy(name).expect("bundled").expect("parses");
        let result = toy_encoding_residual(&file);
        match result {
            Ok((combos, worst)) => out.push(CheckResult::of(
                format!("encoding equivalence: {name}"),
                worst <= 1e-9,
                format!("{combos} encoding combination(s), worst eigenvalue deviation {worst:.3e}"),
            )),
            Err(e) => out.push(CheckResult::of(
                format!("encoding equivalence: {name}"),
                false,
                e.to_string(),
            )),
        }
    }
    out
}

fn toy_encoding_residual(file: &SystemFile) -> Result<(usize, f64)> {
    let basis = file.build_basis(&[])?;
    let reference = exact_spectrum(&file.dense_matrix(&basis)?)?;
    let hamiltonian =
        crate::hamiltonian::assemble_hamiltonian(&file.integrals, &file.indexing)?;
    let mut combos = 0usize;
    let mut worst = 0.0f64;
    for choice in encoding_choices(file) {
        let layout = layout_qubits(&file.indexing, &choice)?;
        if layout.total_qubits() > 10 {
            continue;
        }
        combos += 1;
        let mapped = map_hamiltonian(&hamiltonian, &layout)?;
        let full = mapped.materialize_real()?;
        let restricted = restrict_to_encoded(&full, &layout, &basis)?;
        let spectrum = exact_spectrum(&restricted)?;
        for (a, b) in reference.eigenvalues.iter().zip(&spectrum.eigenvalues) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok((combos, worst))
}

/// Log-log slope of the first-order product-formula error over step counts
/// 4..64 for seeded non-commuting 8x8 three-term sets.
pub fn trotter_slope_check() -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(5150);
    let mut slopes = Vec::new();
    for _ in 0..3 {
        let terms: Vec<DMatrix<f64>> = (0..3)
            .map(|_| {
                let raw = DMatrix::<f64>::from_fn(8, 8, |_, _| rng.gen_range(-1.0..1.0));
                (&raw + raw.transpose()) * 0.5
            })
            .collect();
        let ns = [4usize, 8, 16, 32, 64];
        let points: Vec<(f64, f64)> = ns
            .iter()
            .map(|&n| {
                let e = trotter_error(&terms, 0.4, n).unwrap();
                ((n as f64).ln(), e.ln())
            })
            .collect();
        slopes.push(least_squares_slope(&points));
    }
    let ok = slopes.iter().all(|s| (-1.2..=-0.8).contains(s));
    CheckResult::of(
        "first-order product-formula error slope",
        ok,
        format!("slopes {slopes:.3?} (expected within [-1.2, -0.8])"),
    )
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_suite_passes() {
        let results = run_all_checks(2);
        for r in &results {
            assert!(r.passed, "{}: {}", r.name, r.detail);
        }
        assert!(results.len() >= 10);
    }
}
