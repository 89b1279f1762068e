//! Occupation-number configurations and the action of ladder operators.

use crate::error::{Error, Result};
use crate::particles::{ParticleKind, SpinOrbitalIndexing};

/// Occupation numbers f(p) for every global spin orbital, index 0 holding f(1).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    pub occupations: Vec<u8>,
}

impl Configuration {
    pub fn new(occupations: Vec<u8>) -> Self {
        Configuration { occupations }
    }

    /// Occupation of the 1-based global index `p`.
    pub fn occ(&self, p: usize) -> u8 {
        self.occupations[p - 1]
    }

    pub fn len(&self) -> usize {
        self.occupations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occupations.is_empty()
    }

    /// Checks the per-orbital occupation bounds of `indexing`.
    pub fn satisfies_bounds(&self, indexing: &SpinOrbitalIndexing) -> bool {
        self.occupations.len() == indexing.total()
            && (1..=indexing.total()).all(|p| {
                (self.occ(p) as usize) <= indexing.max_occupation(p).expect("p in range")
            })
    }
}

impl std::fmt::Display for Configuration {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for &o in &self.occupations {
            write!(f, "{o}")?;
        }
        Ok(())
    }
}

/// Result of applying a ladder string: a scaled configuration, or zero.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightedConfiguration {
    Zero,
    Scaled { coefficient: f64, configuration: Configuration },
}

impl WeightedConfiguration {
    pub fn coefficient(&self) -> f64 {
        match self {
            WeightedConfiguration::Zero => 0.0,
            WeightedConfiguration::Scaled { coefficient, .. } => *coefficient,
        }
    }
}

/// A single creation or annihilation operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LadderOp {
    Create,
    Annihilate,
}

/// Applies a ladder operator for global index `p` to `c`.
///
/// Fermions pick up the class-local sign (-1)^(occupied lower orbitals of the
/// same class); bosons pick up sqrt(f+1) / sqrt(f) factors and are annihilated
/// when creating past the truncation n_k or annihilating the vacuum.
pub fn apply_ladder(
    op: LadderOp,
    p: usize,
    c: &Configuration,
    indexing: &SpinOrbitalIndexing,
) -> Result<WeightedConfiguration> {
    let k = indexing.class_of(p)?;
    let class = &indexing.classes()[k];
    debug_assert!(c.satisfies_bounds(indexing), "configuration out of bounds");
    let f = c.occ(p) as usize;
    let n_max = class.max_occupation();

    let (new_f, mut coeff) = match (op, class.kind) {
        (LadderOp::Create, ParticleKind::Boson) => {
            if f >= n_max {
                return Ok(WeightedConfiguration::Zero);
            }
            (f + 1, ((f + 1) as f64).sqrt())
        }
        (LadderOp::Annihilate, ParticleKind::Boson) => {
            if f == 0 {
                return Ok(WeightedConfiguration::Zero);
            }
            (f - 1, (f as f64).sqrt())
        }
        (LadderOp::Create, _) => {
            if f == 1 {
                return Ok(WeightedConfiguration::Zero);
            }
            (1, 1.0)
        }
        (LadderOp::Annihilate, _) => {
            if f == 0 {
                return Ok(WeightedConfiguration::Zero);
            }
            (0, 1.0)
        }
    };

    if class.kind == ParticleKind::Fermion {
        let start = indexing.starts()[k];
        let crossings: u32 = (start..p).map(|q| c.occ(q) as u32).sum();
        if crossings % 2 == 1 {
            coeff = -coeff;
        }
    }

    let mut occupations = c.occupations.clone();
    occupations[p - 1] = new_f as u8;
    Ok(WeightedConfiguration::Scaled {
        coefficient: coeff,
        configuration: Configuration::new(occupations),
    })
}

/// Per-class basis constraint: the particle number, and whether the class is
/// restricted to the Sz = 0 sector (orbitals read as interleaved alpha/beta
/// pairs, odd local index = alpha).
#[derive(Debug, Clone, Copy)]
pub struct ClassConstraint {
    pub n_particles: usize,
    pub sz_zero: bool,
}

/// An ordered configuration basis together with a reverse index.
#[derive(Debug, Clone)]
pub struct ConfigurationBasis {
    configurations: Vec<Configuration>,
    index: std::collections::HashMap<Configuration, usize>,
}

impl ConfigurationBasis {
    pub fn len(&self) -> usize {
        self.configurations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configurations.is_empty()
    }

    pub fn configurations(&self) -> &[Configuration] {
        &self.configurations
    }

    pub fn get(&self, i: usize) -> &Configuration {
        &self.configurations[i]
    }

    pub fn position(&self, c: &Configuration) -> Option<usize> {
        self.index.get(c).copied()
    }
}

/// Enumerates all configurations with the given per-class particle numbers,
/// in descending lexicographic order of the occupation vector.
///
/// Constraints default to the class particle counts of `indexing` when
/// `constraints` is `None`.
pub fn enumerate_configurations(
    indexing: &SpinOrbitalIndexing,
    constraints: Option<&[ClassConstraint]>,
) -> Result<ConfigurationBasis> {
    let default: Vec<ClassConstraint> = indexing
        .classes()
        .iter()
        .map(|c| ClassConstraint {
            n_particles: c.n_particles,
            sz_zero: false,
        })
        .collect();
    let constraints = constraints.unwrap_or(&default);
    if constraints.len() != indexing.classes().len() {
        return Err(Error::InvalidArgument(format!(
            "expected {} class constraints, got {}",
            indexing.classes().len(),
            constraints.len()
        )));
    }

    let mut per_class: Vec<Vec<Vec<u8>>> = Vec::with_capacity(constraints.len());
    for (class, constraint) in indexing.classes().iter().zip(constraints) {
        let n = constraint.n_particles;
        let cap = class.max_occupation().min(n);
        match class.kind {
            ParticleKind::Fermion | ParticleKind::Distinguishable if n > class.n_spinorbitals => {
                return Err(Error::InfeasibleConstraint(format!(
                    "class `{}`: {} particles in {} orbitals",
                    class.label, n, class.n_spinorbitals
                )));
            }
            _ => {}
        }
        if constraint.sz_zero {
            if class.n_spinorbitals % 2 != 0 {
                return Err(Error::InfeasibleConstraint(format!(
                    "class `{}`: sz-zero pairing needs an even orbital count, got {}",
                    class.label, class.n_spinorbitals
                )));
            }
            if n % 2 != 0 {
                return Err(Error::InfeasibleConstraint(format!(
                    "class `{}`: sz-zero sector is empty for odd particle number {}",
                    class.label, n
                )));
            }
        }
        let mut states = Vec::new();
        let mut current = vec![0u8; class.n_spinorbitals];
        fill(&mut states, &mut current, 0, n, cap);
        if constraint.sz_zero {
            states.retain(|occ| {
                let alpha: usize = occ.iter().step_by(2).map(|&o| o as usize).sum();
                let beta: usize = occ.iter().skip(1).step_by(2).map(|&o| o as usize).sum();
                alpha == beta
            });
        }
        if states.is_empty() {
            return Err(Error::InfeasibleConstraint(format!(
                "class `{}`: no configuration satisfies the constraint",
                class.label
            )));
        }
        per_class.push(states);
    }

    // Cartesian product of the per-class blocks, leftmost block varying
    // slowest; per-class states are already in descending lexicographic
    // order, so the product is too.
    let mut configurations = Vec::new();
    let mut stack: Vec<u8> = Vec::with_capacity(indexing.total());
    cartesian(&per_class, 0, &mut stack, &mut configurations);

    let index = configurations
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, c)| (c, i))
        .collect();
    Ok(ConfigurationBasis {
        configurations,
        index,
    })
}

/// Descending-lexicographic enumeration: put as many particles as possible in
/// the current orbital first.
fn fill(out: &mut Vec<Vec<u8>>, current: &mut Vec<u8>, pos: usize, remaining: usize, cap: usize) {
    if pos == current.len() {
        if remaining == 0 {
            out.push(current.clone());
        }
        return;
    }
    let here = remaining.min(cap);
    for occ in (0..=here).rev() {
        current[pos] = occ as u8;
        fill(out, current, pos + 1, remaining - occ, cap);
    }
    current[pos] = 0;
}

fn cartesian(
    blocks: &[Vec<Vec<u8>>],
    depth: usize,
    stack: &mut Vec<u8>,
    out: &mut Vec<Configuration>,
) {
    if depth == blocks.len() {
        out.push(Configuration::new(stack.clone()));
        return;
    }
    for block in &blocks[depth] {
        let len = stack.len();
        stack.extend_from_slice(block);
        cartesian(blocks, depth + 1, stack, out);
        stack.truncate(len);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::particles::{build_indexing, ParticleClassSpec};

    fn single(kind: ParticleKind, n: usize, orbs: usize) -> SpinOrbitalIndexing {
        build_indexing(&[ParticleClassSpec::new(kind, n, orbs, "c")]).unwrap()
    }

    #[test]
    fn annihilate_empty_is_zero() {
        let idx = single(ParticleKind::Boson, 3, 2);
        let c = Configuration::new(vec![0, 2]);
        assert_eq!(
            apply_ladder(LadderOp::Annihilate, 1, &c, &idx).unwrap(),
            WeightedConfiguration::Zero
        );
    }

    #[test]
    fn boson_create_sqrt_factor() {
        let idx = single(ParticleKind::Boson, 3, 2);
        let c = Configuration::new(vec![1, 0]);
        let w = apply_ladder(LadderOp::Create, 1, &c, &idx).unwrap();
        match w {
            WeightedConfiguration::Scaled {
                coefficient,
                configuration,
            } => {
                assert!((coefficient - 2f64.sqrt()).abs() < 1e-15);
                assert_eq!(configuration.occupations, vec![2, 0]);
            }
            _ => panic!("expected scaled result"),
        }
    }

    #[test]
    fn boson_create_at_truncation_is_zero() {
        let idx = single(ParticleKind::Boson, 3, 2);
        let c = Configuration::new(vec![3, 0]);
        assert_eq!(
            apply_ladder(LadderOp::Create, 1, &c, &idx).unwrap(),
            WeightedConfiguration::Zero
        );
    }

    #[test]
    fn fermion_sign_string() {
        // Orbital 1 occupied; creating on orbital 2 crosses one sigma_z.
        let idx = single(ParticleKind::Fermion, 1, 2);
        let c = Configuration::new(vec![1, 0]);
        let w = apply_ladder(LadderOp::Create, 2, &c, &idx).unwrap();
        match w {
            WeightedConfiguration::Scaled {
                coefficient,
                configuration,
            } => {
                assert_eq!(coefficient, -1.0);
                assert_eq!(configuration.occupations, vec![1, 1]);
            }
            _ => panic!("expected scaled result"),
        }
    }

    #[test]
    fn fermion_double_occupy_is_zero() {
        let idx = single(ParticleKind::Fermion, 1, 2);
        let c = Configuration::new(vec![1, 0]);
        assert_eq!(
            apply_ladder(LadderOp::Create, 1, &c, &idx).unwrap(),
            WeightedConfiguration::Zero
        );
    }

    #[test]
    fn sign_string_is_class_local() {
        // Fermion class [1,2] fully occupied must not affect the sign of a
        // second fermion class starting at 3.
        let idx = build_indexing(&[
            ParticleClassSpec::new(ParticleKind::Fermion, 2, 2, "a"),
            ParticleClassSpec::new(ParticleKind::Fermion, 1, 2, "b"),
        ])
        .unwrap();
        let c = Configuration::new(vec![1, 1, 0, 0]);
        let w = apply_ladder(LadderOp::Create, 3, &c, &idx).unwrap();
        assert_eq!(w.coefficient(), 1.0);
    }

    #[test]
    fn basis_one_fermion_two_orbitals() {
        let idx = single(ParticleKind::Fermion, 1, 2);
        let basis = enumerate_configurations(&idx, None).unwrap();
        let occs: Vec<_> = basis
            .configurations()
            .iter()
            .map(|c| c.occupations.clone())
            .collect();
        assert_eq!(occs, vec![vec![1, 0], vec![0, 1]]);
    }

    #[test]
    fn basis_bosons_stars_and_bars() {
        let idx = single(ParticleKind::Boson, 2, 2);
        let basis = enumerate_configurations(&idx, None).unwrap();
        let occs: Vec<_> = basis
            .configurations()
            .iter()
            .map(|c| c.occupations.clone())
            .collect();
        assert_eq!(occs, vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
    }

    #[test]
    fn basis_sz_zero_count() {
        let idx = single(ParticleKind::Fermion, 2, 4);
        let basis = enumerate_configurations(
            &idx,
            Some(&[ClassConstraint {
                n_particles: 2,
                sz_zero: true,
            }]),
        )
        .unwrap();
        // one alpha out of 2 alpha orbitals x one beta out of 2
        assert_eq!(basis.len(), 4);
    }

    #[test]
    fn sz_zero_odd_particle_number_is_infeasible() {
        let idx = single(ParticleKind::Fermion, 1, 4);
        assert!(enumerate_configurations(
            &idx,
            Some(&[ClassConstraint {
                n_particles: 1,
                sz_zero: true,
            }]),
        )
        .is_err());
    }

    #[test]
    fn basis_is_deduplicated_and_indexed() {
        let idx = single(ParticleKind::Fermion, 2, 4);
        let basis = enumerate_configurations(&idx, None).unwrap();
        assert_eq!(basis.len(), 6);
        let mut sorted: Vec<_> = basis.configurations().to_vec();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), basis.len());
        for (i, c) in basis.configurations().iter().enumerate() {
            assert_eq!(basis.position(c), Some(i));
        }
    }
}
