//! Bundled synthetic test systems. All integrals are invented; the toys
//! exist to exercise every code path (statistics mix, encodings, windows),
//! not to model any real molecule.

use crate::systemfile::{parse_system, SystemFile};

pub const TOY_TWO_LEVEL: &str = include_str!("../assets/toy_two_level.nomo");
pub const TOY_H2_LIKE: &str = include_str!("../assets/toy_h2_like.nomo");
pub const TOY_BOSON_PAIR: &str = include_str!("../assets/toy_boson_pair.nomo");
pub const TOY_POLARON: &str = include_str!("../assets/toy_polaron.nomo");

pub const TOY_NAMES: [&str; 4] = [
    "toy_two_level",
    "toy_h2_like",
    "toy_boson_pair",
    "toy_polaron",
];

pub fn toy_source(name: &str) -> Option<&'static str> {
    match name {
        "toy_two_level" => Some(TOY_TWO_LEVEL),
        "toy_h2_like" => Some(TOY_H2_LIKE),
        "toy_boson_pair" => Some(TOY_BOSON_PAIR),
        "toy_polaron" => Some(TOY_POLARON),
        _ => None,
    }
}

pub fn parse_toy(name: &str) -> Option<crate::error::Result<SystemFile>> {
    toy_source(name).map(parse_system)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::particles::ParticleKind;

    #[test]
    fn all_toys_parse() {
        for name in TOY_NAMES {
            let f = parse_toy(name).expect("known name").expect("parses");
            assert!(f.metadata.e_min.is_some() && f.metadata.e_max.is_some(), "{name}");
        }
    }

    #[test]
    fn boson_pair_shape() {
        let f = parse_toy("toy_boson_pair").unwrap().unwrap();
        assert_eq!(f.indexing.classes().len(), 1);
        let class = &f.indexing.classes()[0];
        assert_eq!(class.kind, ParticleKind::Boson);
        assert_eq!(class.n_particles, 2);
        assert_eq!(class.n_spinorbitals, 2);
        assert_eq!(f.n_records, 3);
    }

    #[test]
    fn h2_like_shape() {
        let f = parse_toy("toy_h2_like").unwrap().unwrap();
        let kinds: Vec<ParticleKind> = f.indexing.classes().iter().map(|c| c.kind).collect();
        assert_eq!(
            kinds,
            vec![
                ParticleKind::Fermion,
                ParticleKind::Distinguishable,
                ParticleKind::Distinguishable
            ]
        );
        assert_eq!(f.indexing.total(), 8);
    }

    #[test]
    fn unknown_name_is_none() {
        assert!(toy_source("toy_missing").is_none());
    }
}
