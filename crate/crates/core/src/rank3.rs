//! Rank-3 mutation-acyclicity via the Markov constant, and the subquiver
//! test that lifts it to higher rank.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::matrix::ExchangeMatrix;

/// Mutation-acyclicity verdict.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "MA")]
    MutationAcyclic,
    #[serde(rename = "NMA")]
    NonMutationAcyclic,
    Undetermined,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::MutationAcyclic => "MA",
            Verdict::NonMutationAcyclic => "NMA",
            Verdict::Undetermined => "Undetermined",
        })
    }
}

/// Arrow multiplicities `(x, y, z)` around a directed 3-cycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rank3Triple {
    pub x: u64,
    pub y: u64,
    pub z: u64,
}

impl Rank3Triple {
    pub fn new(x: u64, y: u64, z: u64) -> Self {
        Rank3Triple { x, y, z }
    }

    fn sorted_desc(&self) -> [u64; 3] {
        let mut v = [self.x, self.y, self.z];
        v.sort_unstable_by(|a, b| b.cmp(a));
        v
    }
}

/// `x^2 + y^2 + z^2 - xyz`.
///
/// Exact whenever the value fits in `i128`; otherwise saturates at
/// `i128::MIN` or `i128::MAX`, which keeps the sign and every comparison
/// against small thresholds correct.
pub fn markov_constant(t: &Rank3Triple) -> i128 {
    let (x, y, z) = (t.x as u128, t.y as u128, t.z as u128);
    let squares = (x * x)
        .checked_add(y * y)
        .and_then(|s| s.checked_add(z * z));
    let product = x.checked_mul(y).and_then(|xy| xy.checked_mul(z));
    let Some(squares) = squares else {
        // Only reachable with entries near u64::MAX; the sign is all that matters.
        let (fx, fy, fz) = (t.x as f64, t.y as f64, t.z as f64);
        return if fx * fx + fy * fy + fz * fz > fx * fy * fz {
            i128::MAX
        } else {
            i128::MIN
        };
    };
    match product {
        None => i128::MIN,
        Some(p) if p >= squares => {
            let d = p - squares;
            if d > i128::MAX as u128 {
                i128::MIN
            } else {
                -(d as i128)
            }
        }
        Some(p) => {
            let d = squares - p;
            if d > i128::MAX as u128 {
                i128::MAX
            } else {
                d as i128
            }
        }
    }
}

/// Decides a cyclic rank-3 quiver from its arrow multiplicities.
///
/// MA when `C > 4`, `min < 2`, or the triple is on the exceptional list;
/// NMA when `C < 0` or `C <= 4` with all multiplicities at least 2.
pub fn classify_rank3_cycle(t: &Rank3Triple) -> Verdict {
    const EXCEPTIONAL: [[u64; 3]; 6] = [
        [0, 0, 0],
        [1, 0, 0],
        [1, 1, 0],
        [1, 1, 1],
        [2, 0, 0],
        [2, 1, 1],
    ];
    let c = markov_constant(t);
    let sorted = t.sorted_desc();
    let min = sorted[2];
    if c > 4 || min < 2 || EXCEPTIONAL.contains(&sorted) {
        return Verdict::MutationAcyclic;
    }
    if c < 0 || (c <= 4 && min >= 2) {
        return Verdict::NonMutationAcyclic;
    }
    Verdict::Undetermined
}

/// Multiplicities of the directed 3-cycle on `(a, b, c)`, if the full
/// subquiver on those vertices is one.
pub fn cycle_triple(q: &ExchangeMatrix, a: usize, b: usize, c: usize) -> Option<Rank3Triple> {
    let (ab, bc, ca) = (q.get(a, b), q.get(b, c), q.get(c, a));
    if ab > 0 && bc > 0 && ca > 0 {
        Some(Rank3Triple::new(ab as u64, bc as u64, ca as u64))
    } else if ab < 0 && bc < 0 && ca < 0 {
        Some(Rank3Triple::new(
            ab.unsigned_abs(),
            bc.unsigned_abs(),
            ca.unsigned_abs(),
        ))
    } else {
        None
    }
}

/// A 3-vertex full subquiver that is cyclic and non-mutation-acyclic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rank3Witness {
    pub vertices: [usize; 3],
    pub triple: Rank3Triple,
}

/// First (in lexicographic vertex order) NMA cyclic 3-vertex subquiver.
pub fn find_nma_rank3_subquiver(q: &ExchangeMatrix) -> Option<Rank3Witness> {
    let n = q.rank();
    for a in 0..n {
        for b in (a + 1)..n {
            for c in (b + 1)..n {
                if let Some(t) = cycle_triple(q, a, b, c) {
                    if classify_rank3_cycle(&t) == Verdict::NonMutationAcyclic {
                        return Some(Rank3Witness {
                            vertices: [a, b, c],
                            triple: t,
                        });
                    }
                }
            }
        }
    }
    None
}

pub fn has_nma_rank3_subquiver(q: &ExchangeMatrix) -> bool {
    find_nma_rank3_subquiver(q).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn markov_constant_values() {
        assert_eq!(markov_constant(&Rank3Triple::new(1, 1, 1)), 2);
        assert_eq!(markov_constant(&Rank3Triple::new(0, 0, 0)), 0);
        assert_eq!(markov_constant(&Rank3Triple::new(2, 2, 2)), 4);
        assert_eq!(markov_constant(&Rank3Triple::new(3, 3, 3)), 0);
        assert_eq!(markov_constant(&Rank3Triple::new(3, 6, 3)), 0);
    }

    #[test]
    fn markov_constant_saturates_with_sign() {
        let big = u64::MAX;
        assert_eq!(markov_constant(&Rank3Triple::new(big, big, big)), i128::MIN);
        assert_eq!(markov_constant(&Rank3Triple::new(big, big, 0)), i128::MAX);
        // 61 and 223 style weights still compute exactly
        assert_eq!(
            markov_constant(&Rank3Triple::new(61, 223, 61)),
            61 * 61 * 2 + 223 * 223 - 61 * 223 * 61
        );
    }

    #[test]
    fn classification_examples() {
        assert_eq!(
            classify_rank3_cycle(&Rank3Triple::new(2, 2, 2)),
            Verdict::NonMutationAcyclic
        );
        assert_eq!(
            classify_rank3_cycle(&Rank3Triple::new(3, 3, 3)),
            Verdict::NonMutationAcyclic
        );
        assert_eq!(
            classify_rank3_cycle(&Rank3Triple::new(1, 1, 1)),
            Verdict::MutationAcyclic
        );
        assert_eq!(
            classify_rank3_cycle(&Rank3Triple::new(2, 3, 3)),
            Verdict::NonMutationAcyclic
        );
        assert_eq!(
            classify_rank3_cycle(&Rank3Triple::new(2, 2, 3)),
            Verdict::MutationAcyclic
        );
        assert_eq!(
            classify_rank3_cycle(&Rank3Triple::new(2, 2, 5)),
            Verdict::MutationAcyclic
        );
        assert_eq!(
            classify_rank3_cycle(&Rank3Triple::new(2, 1, 1)),
            Verdict::MutationAcyclic
        );
    }

    #[test]
    fn cycle_detection_both_orientations() {
        let q = ExchangeMatrix::from_arrows(3, &[(0, 1, 2), (1, 2, 3), (2, 0, 4)]).unwrap();
        assert_eq!(cycle_triple(&q, 0, 1, 2), Some(Rank3Triple::new(2, 3, 4)));
        let r = ExchangeMatrix::from_arrows(3, &[(1, 0, 2), (2, 1, 3), (0, 2, 4)]).unwrap();
        assert_eq!(cycle_triple(&r, 0, 1, 2), Some(Rank3Triple::new(2, 3, 4)));
        let path = ExchangeMatrix::from_arrows(3, &[(0, 1, 2), (1, 2, 2)]).unwrap();
        assert_eq!(cycle_triple(&path, 0, 1, 2), None);
    }

    #[test]
    fn subquiver_search() {
        let acyclic = ExchangeMatrix::from_arrows(4, &[(0, 1, 2), (1, 2, 2), (2, 3, 2)]).unwrap();
        assert!(!has_nma_rank3_subquiver(&acyclic));
        let with_markov =
            ExchangeMatrix::from_arrows(4, &[(0, 1, 2), (1, 2, 2), (2, 0, 2), (1, 3, 1)]).unwrap();
        let w = find_nma_rank3_subquiver(&with_markov).unwrap();
        assert_eq!(w.vertices, [0, 1, 2]);
        assert_eq!(w.triple, Rank3Triple::new(2, 2, 2));
        let restricted = with_markov.full_subquiver(&w.vertices).unwrap();
        assert_eq!(restricted.upper(), vec![2, -2, 2]);
    }
}
