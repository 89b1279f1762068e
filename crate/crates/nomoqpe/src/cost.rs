//! Whole-system Trotter-step cost reports.
//!
//! The per-category totals are "unit-constant counts": each asymptotic
//! summand is evaluated with leading constant 1 and natural logarithms, so
//! the numbers are comparable across mappings but are not absolute gate
//! counts. Categories free of logarithms are exact big integers.

use num_bigint::BigInt;

use crate::blocks::{enumerate_blocks, gate_count_ng, MAX_BOX_STATES};
use crate::error::Result;
use crate::mapping::{layout_qubits, Encoding};
use crate::particles::{ParticleKind, SpinOrbitalIndexing};

/// Boson-encoding choice the report is evaluated for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BosonMapping {
    /// One-hot occupation registers; pairwise cost n_k^2 n_l^2 N_k N_l^2.
    Direct,
    /// Binary occupation registers; pairwise cost N_g(n_k, n_l) N_k N_l^2.
    Compact,
}

impl BosonMapping {
    pub fn as_str(&self) -> &'static str {
        match self {
            BosonMapping::Direct => "direct",
            BosonMapping::Compact => "compact",
        }
    }
}

/// Breakdown of one boson-like class pair's contribution.
#[derive(Debug, Clone)]
pub struct BosonPairCost {
    pub label_k: String,
    pub label_l: String,
    pub n_k: usize,
    pub n_l: usize,
    pub orbitals_k: usize,
    pub orbitals_l: usize,
    /// Contribution under the chosen mapping.
    pub contribution: BigInt,
    /// Closed-form per-term gate count N_g(n_k, n_l).
    pub ng: BigInt,
    /// Exact sum of d^2 over the enumerated blocks, when the occupation box
    /// is small enough to enumerate. Always equals `ng` when present.
    pub exact_block_sum: Option<u128>,
    /// Classical precompute estimate M_3 = sum d^3 p_d for this pair.
    pub classical_precompute: Option<u128>,
}

#[derive(Debug, Clone)]
pub struct CostReport {
    pub mapping: BosonMapping,
    /// sum over fermion class pairs of (N_k N_l)^2 ln(N_k N_l).
    pub fermion_fermion: f64,
    /// Exact integer total over boson-like class pairs.
    pub boson_boson: BigInt,
    /// sum over (fermion, boson-like) pairs; direct: n_l^2 ln(N_k) N_l N_k^2,
    /// compact: N_g(1, n_l) ln(N_k) N_l N_k^2.
    pub fermion_boson: f64,
    pub qubit_total: usize,
    pub pairs: Vec<BosonPairCost>,
    /// sum n^5 N_k N_l^2 when every boson-like class shares one truncation n;
    /// coincides with the direct-mapping total at n = 1.
    pub uniform_occupation_entry: Option<BigInt>,
}

struct ClassView {
    label: String,
    n: usize,
    orbitals: usize,
}

/// Evaluates the per-category unit-constant cost sums for the chosen boson
/// mapping. Distinguishable classes enter the boson-like category with
/// n_k = 1 (their cost forms coincide there).
pub fn trotter_step_cost(
    indexing: &SpinOrbitalIndexing,
    mapping: BosonMapping,
) -> Result<CostReport> {
    let mut fermions: Vec<ClassView> = Vec::new();
    let mut bosonlike: Vec<ClassView> = Vec::new();
    let mut encodings = Vec::new();
    for class in indexing.classes() {
        let view = ClassView {
            label: class.label.clone(),
            n: class.max_occupation(),
            orbitals: class.n_spinorbitals,
        };
        match class.kind {
            ParticleKind::Fermion => {
                fermions.push(view);
                encodings.push(Encoding::JordanWigner);
            }
            ParticleKind::Boson => {
                bosonlike.push(view);
                encodings.push(match mapping {
                    BosonMapping::Direct => Encoding::DirectBoson,
                    BosonMapping::Compact => Encoding::CompactBoson,
                });
            }
            ParticleKind::Distinguishable => {
                bosonlike.push(view);
                encodings.push(Encoding::DistinguishableOneQubit);
            }
        }
    }

    let mut fermion_fermion = 0.0;
    for (i, k) in fermions.iter().enumerate() {
        for l in &fermions[i..] {
            let prod = (k.orbitals * l.orbitals) as f64;
            fermion_fermion += prod * prod * prod.ln();
        }
    }

    let mut boson_boson = BigInt::from(0);
    let mut pairs = Vec::new();
    for (i, a) in bosonlike.iter().enumerate() {
        for b in &bosonlike[i..] {
            // order each pair so the smaller orbital count comes first
            let (k, l) = if a.orbitals <= b.orbitals { (a, b) } else { (b, a) };
            let ng = gate_count_ng(k.n as u64, l.n as u64)?;
            let weight = BigInt::from(k.orbitals) * BigInt::from(l.orbitals).pow(2);
            let contribution = match mapping {
                BosonMapping::Direct => {
                    BigInt::from(k.n).pow(2) * BigInt::from(l.n).pow(2) * &weight
                }
                BosonMapping::Compact => &ng * &weight,
            };
            boson_boson += &contribution;
            let box_states = ((k.n + 1) * (l.n + 1)).pow(2);
            let (exact_block_sum, classical_precompute) = if box_states <= MAX_BOX_STATES {
                let s = enumerate_blocks(k.n as u32, l.n as u32)?;
                (Some(s.moment_sum(2)), Some(s.moment_sum(3)))
            } else {
                (None, None)
            };
            pairs.push(BosonPairCost {
                label_k: k.label.clone(),
                label_l: l.label.clone(),
                n_k: k.n,
                n_l: l.n,
                orbitals_k: k.orbitals,
                orbitals_l: l.orbitals,
                contribution,
                ng,
                exact_block_sum,
                classical_precompute,
            });
        }
    }

    let mut fermion_boson = 0.0;
    for k in &fermions {
        for l in &bosonlike {
            let per_term = match mapping {
                BosonMapping::Direct => (l.n * l.n) as f64,
                BosonMapping::Compact => {
                    let ng = gate_count_ng(1, l.n as u64)?;
                    ng.to_string().parse::<f64>().expect("small integer")
                }
            };
            fermion_boson +=
                per_term * (k.orbitals as f64).ln() * l.orbitals as f64 * (k.orbitals as f64).powi(2);
        }
    }

    let uniform_occupation_entry = bosonlike
        .first()
        .map(|f| f.n)
        .filter(|&n| bosonlike.iter().all(|c| c.n == n))
        .map(|n| {
            let mut total = BigInt::from(0);
            for (i, a) in bosonlike.iter().enumerate() {
                for b in &bosonlike[i..] {
                    let (k, l) = if a.orbitals <= b.orbitals { (a, b) } else { (b, a) };
                    total += BigInt::from(n).pow(5)
                        * BigInt::from(k.orbitals)
                        * BigInt::from(l.orbitals).pow(2);
                }
            }
            total
        });

    let qubit_total = layout_qubits(indexing, &encodings)?.total_qubits();

    Ok(CostReport {
        mapping,
        fermion_fermion,
        boson_boson,
        fermion_boson,
        qubit_total,
        pairs,
        uniform_occupation_entry,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::particles::{build_indexing, ParticleClassSpec};

    #[test]
    fn pure_fermion_single_class() {
        let idx =
            build_indexing(&[ParticleClassSpec::new(ParticleKind::Fermion, 2, 4, "e")]).unwrap();
        let report = trotter_step_cost(&idx, BosonMapping::Direct).unwrap();
        let n = 4.0f64;
        assert!((report.fermion_fermion - n.powi(4) * (n * n).ln()).abs() < 1e-12);
        assert_eq!(report.boson_boson, BigInt::from(0));
        assert_eq!(report.fermion_boson, 0.0);
        assert_eq!(report.qubit_total, 4);
    }

    #[test]
    fn single_boson_class_compact_uses_ng() {
        let idx =
            build_indexing(&[ParticleClassSpec::new(ParticleKind::Boson, 1, 2, "b")]).unwrap();
        let report = trotter_step_cost(&idx, BosonMapping::Compact).unwrap();
        // one pair (k = l): N_g(1,1) * N * N^2 = 18 * 2 * 4
        assert_eq!(report.boson_boson, BigInt::from(144));
        assert_eq!(report.pairs.len(), 1);
        assert_eq!(report.pairs[0].ng, BigInt::from(18));
        assert_eq!(report.pairs[0].exact_block_sum, Some(18));
        assert_eq!(report.qubit_total, 2);
    }

    #[test]
    fn unit_occupation_mappings_agree() {
        // With every boson-like truncation at n = 1, the direct pairwise form
        // n_k^2 n_l^2 N_k N_l^2 and the uniform n^5 N_k N_l^2 form coincide.
        let idx = build_indexing(&[
            ParticleClassSpec::new(ParticleKind::Boson, 1, 2, "b1"),
            ParticleClassSpec::new(ParticleKind::Distinguishable, 1, 3, "d"),
        ])
        .unwrap();
        let report = trotter_step_cost(&idx, BosonMapping::Direct).unwrap();
        assert_eq!(
            report.uniform_occupation_entry.as_ref(),
            Some(&report.boson_boson)
        );
    }

    #[test]
    fn mixed_system_fermion_boson_term() {
        let idx = build_indexing(&[
            ParticleClassSpec::new(ParticleKind::Fermion, 1, 2, "e"),
            ParticleClassSpec::new(ParticleKind::Boson, 2, 3, "b"),
        ])
        .unwrap();
        let direct = trotter_step_cost(&idx, BosonMapping::Direct).unwrap();
        let expected = 4.0 * 2.0f64.ln() * 3.0 * 4.0; // n_l^2 ln(N_k) N_l N_k^2
        assert!((direct.fermion_boson - expected).abs() < 1e-12);

        let compact = trotter_step_cost(&idx, BosonMapping::Compact).unwrap();
        // N_g(1, 2) = 44 replaces n_l^2 = 4
        assert!((compact.fermion_boson - expected / 4.0 * 44.0).abs() < 1e-9);
    }

    #[test]
    fn classical_precompute_reported() {
        let idx =
            build_indexing(&[ParticleClassSpec::new(ParticleKind::Boson, 1, 1, "b")]).unwrap();
        let report = trotter_step_cost(&idx, BosonMapping::Compact).unwrap();
        // M_3 at (1,1): 14 * 1 + 1 * 8 = 22
        assert_eq!(report.pairs[0].classical_precompute, Some(22));
    }

    #[test]
    fn qubit_totals_per_mapping() {
        let idx = build_indexing(&[
            ParticleClassSpec::new(ParticleKind::Fermion, 1, 2, "e"),
            ParticleClassSpec::new(ParticleKind::Boson, 3, 2, "b"),
        ])
        .unwrap();
        let direct = trotter_step_cost(&idx, BosonMapping::Direct).unwrap();
        assert_eq!(direct.qubit_total, 2 + 2 * 4);
        let compact = trotter_step_cost(&idx, BosonMapping::Compact).unwrap();
        assert_eq!(compact.qubit_total, 2 + 2 * 2);
    }
}
