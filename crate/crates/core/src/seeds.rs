//! Named seed quivers used to generate the mutation datasets, plus the
//! high-multiplicity quivers used to probe generalization.
//!
//! Vertex `v` in 1-based notation is index `v - 1` here.

use crate::matrix::ExchangeMatrix;

fn quiver(arrows: &[(usize, usize, i64)]) -> ExchangeMatrix {
    ExchangeMatrix::from_arrows(4, arrows).expect("seed arrows are valid")
}

/// Path `1 -> 2 -> 3 -> 4`.
pub fn a4_type1() -> ExchangeMatrix {
    quiver(&[(0, 1, 1), (1, 2, 1), (2, 3, 1)])
}

/// Path `1 -> 2 -> 3 -> 4` with double arrows.
pub fn a4_type2() -> ExchangeMatrix {
    quiver(&[(0, 1, 2), (1, 2, 2), (2, 3, 2)])
}

/// `1 -> 2 <= 3 -> 4` (double arrow from 3 to 2).
pub fn a4_type3() -> ExchangeMatrix {
    quiver(&[(0, 1, 1), (2, 1, 2), (2, 3, 1)])
}

/// Star with centre 1 and arrows out to 2, 3, 4.
pub fn d4_type1() -> ExchangeMatrix {
    quiver(&[(0, 1, 1), (0, 2, 1), (0, 3, 1)])
}

/// As [`d4_type1`] with a double arrow `1 => 4`.
pub fn d4_type2() -> ExchangeMatrix {
    quiver(&[(0, 1, 1), (0, 2, 1), (0, 3, 2)])
}

/// Markov cycle on 1, 2, 3 with a double arrow `2 => 4`.
pub fn nma1() -> ExchangeMatrix {
    quiver(&[(0, 1, 2), (1, 2, 2), (2, 0, 2), (1, 3, 2)])
}

/// The 2-2-2-2 box quiver.
pub fn nma2() -> ExchangeMatrix {
    box_quiver(2, 2)
}

/// Oriented 4-cycle `1 -> 2 -> 3 -> 4 -> 1` with weights `a, b, a, b`.
pub fn box_quiver(a: i64, b: i64) -> ExchangeMatrix {
    quiver(&[(0, 1, a), (1, 2, b), (2, 3, a), (3, 0, b)])
}

pub fn box1() -> ExchangeMatrix {
    box_quiver(3, 2)
}

pub fn box2() -> ExchangeMatrix {
    box_quiver(3, 3)
}

/// Torus with one boundary component and one marked point.
pub fn dreaded_torus() -> ExchangeMatrix {
    ExchangeMatrix::from_upper(4, &[1, 1, -1, -1, 2, -1]).expect("valid")
}

/// Cycle `1 -> 3 -> 2 -> 1` of weight `cycle` with single spokes to
/// vertex 4 oriented per `spokes`: `+1` for `v -> 4`, `-1` for `4 -> v`,
/// listed for vertices 1, 3, 2.
fn spoked_cycle(cycle: i64, spokes: [i64; 3]) -> ExchangeMatrix {
    let mut arrows = vec![(0, 2, cycle), (2, 1, cycle), (1, 0, cycle)];
    for (&v, &s) in [0usize, 2, 1].iter().zip(spokes.iter()) {
        if s > 0 {
            arrows.push((v, 3, s));
        } else if s < 0 {
            arrows.push((3, v, -s));
        }
    }
    quiver(&arrows)
}

pub const M1_SPOKES: [i64; 3] = [1, 1, 1];
pub const M2_SPOKES: [i64; 3] = [-1, 1, 1];
pub const M3_SPOKES: [i64; 3] = [-1, -1, 1];

pub fn m1() -> ExchangeMatrix {
    spoked_cycle(2, M1_SPOKES)
}

pub fn m2() -> ExchangeMatrix {
    spoked_cycle(2, M2_SPOKES)
}

pub fn m3() -> ExchangeMatrix {
    spoked_cycle(2, M3_SPOKES)
}

pub fn nm1() -> ExchangeMatrix {
    spoked_cycle(3, M1_SPOKES)
}

pub fn nm2() -> ExchangeMatrix {
    spoked_cycle(3, M2_SPOKES)
}

pub fn nm3() -> ExchangeMatrix {
    spoked_cycle(3, M3_SPOKES)
}

/// Spoked cycle with arbitrary spoke multiplicities; each spoke keeps the
/// orientation of `pattern` and takes weight `weights[i]` (0 drops it).
pub fn spoked_cycle_weighted(cycle: i64, pattern: [i64; 3], weights: [i64; 3]) -> ExchangeMatrix {
    let spokes = [
        pattern[0] * weights[0],
        pattern[1] * weights[1],
        pattern[2] * weights[2],
    ];
    spoked_cycle(cycle, spokes)
}

/// A4-type quiver with multiplicities 3, 4, 3 (acyclic).
pub fn high_mult_a4() -> ExchangeMatrix {
    quiver(&[(0, 1, 3), (2, 1, 4), (2, 3, 3)])
}

/// Mutated A4-type quiver with multiplicities up to 381.
pub fn high_mult_a4_mutated() -> ExchangeMatrix {
    quiver(&[
        (0, 2, 96),
        (1, 2, 32),
        (1, 0, 381),
        (3, 0, 252),
        (2, 3, 3),
        (3, 1, 96),
    ])
}

/// Mutated A4-type quiver with very large multiplicities, rounded to
/// two significant figures.
pub fn high_mult_a4_huge() -> ExchangeMatrix {
    quiver(&[
        (0, 2, 9_400_000_000_000_000),
        (2, 1, 830_000),
        (1, 0, 11_000_000_000),
        (0, 3, 8_100_000_000_000_000),
        (2, 3, 2_100_000_000_000_000),
        (1, 3, 2_500_000_000),
    ])
}

/// 3-cycle with multiplicities 3, 6, 3 and a pendant arrow.
pub fn high_mult_nma() -> ExchangeMatrix {
    quiver(&[(1, 0, 3), (0, 2, 6), (2, 1, 3), (2, 3, 1)])
}

/// 3-cycle with multiplicities 3, 3, 3 and a pendant arrow.
pub fn high_mult_nma_mutated() -> ExchangeMatrix {
    quiver(&[(0, 1, 3), (1, 2, 3), (2, 0, 3), (2, 3, 1)])
}

/// The 61-223-61-223 box quiver.
pub fn high_mult_nma_huge() -> ExchangeMatrix {
    box_quiver(61, 223)
}

/// A named seed.
#[derive(Clone, Debug)]
pub struct NamedSeed {
    pub name: &'static str,
    pub matrix: ExchangeMatrix,
}

fn named(name: &'static str, matrix: ExchangeMatrix) -> NamedSeed {
    NamedSeed { name, matrix }
}

/// Catalog of every named seed quiver.
pub struct SeedCatalog;

impl SeedCatalog {
    pub fn a4() -> Vec<NamedSeed> {
        vec![
            named("A4-1", a4_type1()),
            named("A4-2", a4_type2()),
            named("A4-3", a4_type3()),
        ]
    }

    pub fn d4() -> Vec<NamedSeed> {
        vec![named("D4-1", d4_type1()), named("D4-2", d4_type2())]
    }

    pub fn nma() -> Vec<NamedSeed> {
        vec![named("NMA1", nma1()), named("NMA2", nma2())]
    }

    pub fn boxes() -> Vec<NamedSeed> {
        vec![named("Box1", box1()), named("Box2", box2())]
    }

    pub fn markov_spoked() -> Vec<NamedSeed> {
        vec![named("M1", m1()), named("M2", m2()), named("M3", m3())]
    }

    pub fn weight3_spoked() -> Vec<NamedSeed> {
        vec![
            named("NM1", nm1()),
            named("NM2", nm2()),
            named("NM3", nm3()),
        ]
    }

    /// The six high-multiplicity quivers, with their expected verdicts
    /// (`true` for non-mutation-acyclic).
    pub fn high_multiplicity() -> Vec<(NamedSeed, bool)> {
        vec![
            (named("HM-A4", high_mult_a4()), false),
            (named("HM-A4-mutated", high_mult_a4_mutated()), false),
            (named("HM-A4-huge", high_mult_a4_huge()), false),
            (named("HM-NMA", high_mult_nma()), true),
            (named("HM-NMA-mutated", high_mult_nma_mutated()), true),
            (named("HM-NMA-huge", high_mult_nma_huge()), true),
        ]
    }

    pub fn all() -> Vec<NamedSeed> {
        let mut v = Self::a4();
        v.extend(Self::d4());
        v.extend(Self::nma());
        v.extend(Self::boxes());
        v.extend(Self::markov_spoked());
        v.extend(Self::weight3_spoked());
        v.push(named("DreadedTorus", dreaded_torus()));
        v.extend(Self::high_multiplicity().into_iter().map(|(s, _)| s));
        v
    }

    pub fn by_name(name: &str) -> Option<ExchangeMatrix> {
        Self::all()
            .into_iter()
            .find(|s| s.name == name)
            .map(|s| s.matrix)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::{are_isomorphic, canonical_form};
    use crate::rank3::{find_nma_rank3_subquiver, Rank3Triple};

    #[test]
    fn upper_triangles_match_arrow_lists() {
        assert_eq!(a4_type1().upper(), vec![1, 0, 0, 1, 0, 1]);
        assert_eq!(a4_type3().upper(), vec![1, 0, 0, -2, 0, 1]);
        assert_eq!(d4_type2().upper(), vec![1, 1, 2, 0, 0, 0]);
        assert_eq!(nma1().upper(), vec![2, -2, 0, 2, 2, 0]);
        assert_eq!(nma2().upper(), vec![2, 0, -2, 2, 0, 2]);
        assert_eq!(m1().upper(), vec![-2, 2, 1, -2, 1, 1]);
        assert_eq!(m3().upper(), vec![-2, 2, -1, -2, 1, -1]);
        assert_eq!(high_mult_nma_huge().upper(), vec![61, 0, -223, 223, 0, 61]);
    }

    #[test]
    fn seeds_are_distinct_classes() {
        let all = SeedCatalog::all();
        for (i, a) in all.iter().enumerate() {
            for b in &all[i + 1..] {
                assert!(
                    !are_isomorphic(&a.matrix, &b.matrix).unwrap(),
                    "{} ~ {}",
                    a.name,
                    b.name
                );
            }
        }
    }

    #[test]
    fn weight3_seeds_carry_a_333_cycle() {
        for s in SeedCatalog::weight3_spoked() {
            let w = find_nma_rank3_subquiver(&s.matrix).unwrap();
            assert_eq!(w.triple, Rank3Triple::new(3, 3, 3), "{}", s.name);
        }
    }

    #[test]
    fn lookup_by_name() {
        assert_eq!(SeedCatalog::by_name("Box2"), Some(box2()));
        assert!(SeedCatalog::by_name("nope").is_none());
        assert!(canonical_form(&SeedCatalog::by_name("DreadedTorus").unwrap()).is_ok());
    }
}
