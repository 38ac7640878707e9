//! Canonical forms under vertex relabeling.
//!
//! The canonical key of a rank-`n` quiver is the lexicographically smallest
//! row-major flattening of `P^T B P` over all `n!` permutation matrices `P`.

use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{QuiverError, Result};
use crate::matrix::ExchangeMatrix;

/// Largest rank accepted by [`canonical_form`].
pub const MAX_CANONICAL_RANK: usize = 8;

/// Row-major flattening of the canonical representative.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<i64>>", into = "Vec<Vec<i64>>")]
pub struct CanonicalKey {
    flat: Vec<i64>,
}

impl CanonicalKey {
    pub fn as_flat(&self) -> &[i64] {
        &self.flat
    }

    pub fn rank(&self) -> usize {
        (self.flat.len() as f64).sqrt().round() as usize
    }

    /// The canonical representative as a matrix.
    pub fn to_matrix(&self) -> ExchangeMatrix {
        ExchangeMatrix::from_flat(self.rank(), self.flat.clone())
            .expect("canonical keys are built from valid matrices")
    }
}

impl TryFrom<Vec<Vec<i64>>> for CanonicalKey {
    type Error = QuiverError;

    fn try_from(rows: Vec<Vec<i64>>) -> Result<Self> {
        let m = ExchangeMatrix::from_rows(&rows)?;
        let key = canonical_form(&m)?;
        if key.flat != m.as_flat() {
            return Err(QuiverError::Config(format!(
                "matrix {m} is not in canonical form"
            )));
        }
        Ok(key)
    }
}

impl From<CanonicalKey> for Vec<Vec<i64>> {
    fn from(k: CanonicalKey) -> Self {
        let n = k.rank();
        k.flat.chunks(n).map(<[i64]>::to_vec).collect()
    }
}

impl fmt::Debug for CanonicalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CanonicalKey({self})")
    }
}

impl fmt::Display for CanonicalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.to_matrix(), f)
    }
}

/// All permutations of `0..n` in lexicographic order, cached per rank.
pub fn permutations(n: usize) -> &'static [Vec<u8>] {
    static CACHE: [OnceLock<Vec<Vec<u8>>>; MAX_CANONICAL_RANK + 1] =
        [const { OnceLock::new() }; MAX_CANONICAL_RANK + 1];
    assert!(
        n <= MAX_CANONICAL_RANK,
        "rank {n} above canonicalization bound"
    );
    CACHE[n].get_or_init(|| {
        let mut out = Vec::new();
        let mut cur: Vec<u8> = (0..n as u8).collect();
        loop {
            out.push(cur.clone());
            // next lexicographic permutation
            let Some(i) = (1..cur.len()).rev().find(|&i| cur[i - 1] < cur[i]) else {
                break;
            };
            let j = (i..cur.len()).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
            cur.swap(i - 1, j);
            cur[i..].reverse();
        }
        out
    })
}

/// Canonical key of `q`. Fails for rank above [`MAX_CANONICAL_RANK`].
pub fn canonical_form(q: &ExchangeMatrix) -> Result<CanonicalKey> {
    let (flat, _) = canonical_with_perm(q)?;
    Ok(CanonicalKey { flat })
}

/// Canonical flattening plus a permutation achieving it:
/// `key[i][j] = q[perm[i]][perm[j]]`.
pub fn canonical_with_perm(q: &ExchangeMatrix) -> Result<(Vec<i64>, Vec<usize>)> {
    let n = q.rank();
    if n > MAX_CANONICAL_RANK {
        return Err(QuiverError::RankTooLarge {
            n,
            max: MAX_CANONICAL_RANK,
        });
    }
    let src = q.as_flat();
    let perms = permutations(n);
    let mut best = src.to_vec();
    let mut best_perm = 0usize;
    for (pi, p) in perms.iter().enumerate().skip(1) {
        // Compare candidate against best entry by entry, stopping at the
        // first difference; only materialize on improvement.
        let mut ordering = std::cmp::Ordering::Equal;
        'outer: for i in 0..n {
            let row = p[i] as usize * n;
            for j in 0..n {
                let v = src[row + p[j] as usize];
                let w = best[i * n + j];
                if v != w {
                    ordering = v.cmp(&w);
                    break 'outer;
                }
            }
        }
        if ordering == std::cmp::Ordering::Less {
            for i in 0..n {
                let row = p[i] as usize * n;
                for j in 0..n {
                    best[i * n + j] = src[row + p[j] as usize];
                }
            }
            best_perm = pi;
        }
    }
    let perm = perms[best_perm].iter().map(|&v| v as usize).collect();
    Ok((best, perm))
}

/// True when `a` and `b` differ by a vertex relabeling.
pub fn are_isomorphic(a: &ExchangeMatrix, b: &ExchangeMatrix) -> Result<bool> {
    if a.rank() != b.rank() {
        return Err(QuiverError::RankMismatch(a.rank(), b.rank()));
    }
    Ok(canonical_form(a)? == canonical_form(b)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_counts() {
        assert_eq!(permutations(0).len(), 1);
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(permutations(4).len(), 24);
        assert_eq!(permutations(4)[0], vec![0, 1, 2, 3]);
        assert_eq!(permutations(4)[23], vec![3, 2, 1, 0]);
    }

    #[test]
    fn zero_matrix_is_fixed() {
        let z = ExchangeMatrix::zeros(4);
        assert_eq!(canonical_form(&z).unwrap().as_flat(), &[0; 16]);
    }

    #[test]
    fn perm_reproduces_key() {
        let q = ExchangeMatrix::from_upper(4, &[2, -1, 0, 1, 1, 1]).unwrap();
        let (flat, perm) = canonical_with_perm(&q).unwrap();
        assert_eq!(q.permuted(&perm).unwrap().as_flat(), &flat[..]);
    }

    #[test]
    fn rank_bound() {
        assert!(matches!(
            canonical_form(&ExchangeMatrix::zeros(9)),
            Err(QuiverError::RankTooLarge { n: 9, max: 8 })
        ));
        assert!(canonical_form(&ExchangeMatrix::zeros(8)).is_ok());
    }

    #[test]
    fn isomorphism_rejects_rank_mismatch() {
        let a = ExchangeMatrix::zeros(3);
        let b = ExchangeMatrix::zeros(4);
        assert!(are_isomorphic(&a, &b).is_err());
    }

    #[test]
    fn key_json_requires_canonical_matrix() {
        let q = ExchangeMatrix::from_arrows(3, &[(0, 1, 1)]).unwrap();
        let key = canonical_form(&q).unwrap();
        let json = serde_json::to_string(&key).unwrap();
        assert_eq!(serde_json::from_str::<CanonicalKey>(&json).unwrap(), key);
        let not_canonical = serde_json::to_string(&q.rows()).unwrap();
        if q.as_flat() != key.as_flat() {
            assert!(serde_json::from_str::<CanonicalKey>(&not_canonical).is_err());
        }
    }
}
