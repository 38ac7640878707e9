//! Skew-symmetric exchange matrices and the single-step operations on them.
//!
//! Convention: `b[i][j] > 0` means `b[i][j]` arrows `i -> j`. Vertices are
//! zero-indexed everywhere in this crate.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{QuiverError, Result};

/// Integer exchange matrix of a quiver without loops or oriented 2-cycles.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "QuiverJson", into = "QuiverJson")]
pub struct ExchangeMatrix {
    n: usize,
    b: Vec<i64>,
}

/// On-disk quiver shape: `{"n": 4, "b": [[0,2,-1,0], ...]}`.
#[derive(Serialize, Deserialize)]
struct QuiverJson {
    n: usize,
    b: Vec<Vec<i64>>,
}

impl TryFrom<QuiverJson> for ExchangeMatrix {
    type Error = QuiverError;

    fn try_from(raw: QuiverJson) -> Result<Self> {
        let m = ExchangeMatrix::from_rows(&raw.b)?;
        if m.n != raw.n {
            return Err(QuiverError::RankMismatch(raw.n, m.n));
        }
        Ok(m)
    }
}

impl From<ExchangeMatrix> for QuiverJson {
    fn from(m: ExchangeMatrix) -> Self {
        QuiverJson {
            n: m.n,
            b: m.rows(),
        }
    }
}

/// Vector encodings of a rank-4 exchange matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Encoding {
    /// Row-major flattening of all 16 entries.
    Flat16,
    /// Upper triangle `(b01, b02, b03, b12, b13, b23)`.
    Upper6,
}

impl Encoding {
    pub fn dim(self) -> usize {
        match self {
            Encoding::Flat16 => 16,
            Encoding::Upper6 => 6,
        }
    }

    /// CSV column names for this encoding.
    pub fn column_names(self) -> Vec<String> {
        match self {
            Encoding::Flat16 => (0..4)
                .flat_map(|i| (0..4).map(move |j| format!("m{i}{j}")))
                .collect(),
            Encoding::Upper6 => (0..6).map(|i| format!("e{i}")).collect(),
        }
    }
}

impl std::str::FromStr for Encoding {
    type Err = QuiverError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "flat16" => Ok(Encoding::Flat16),
            "upper6" => Ok(Encoding::Upper6),
            other => Err(QuiverError::Config(format!("unknown encoding {other:?}"))),
        }
    }
}

impl fmt::Display for Encoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Encoding::Flat16 => "flat16",
            Encoding::Upper6 => "upper6",
        })
    }
}

impl ExchangeMatrix {
    /// The rank-`n` quiver with no arrows.
    pub fn zeros(n: usize) -> Self {
        assert!(n > 0, "rank must be positive");
        ExchangeMatrix {
            n,
            b: vec![0; n * n],
        }
    }

    /// Builds a matrix from rows, validating shape and skew-symmetry.
    pub fn from_rows<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.as_ref().len() != n) {
            return Err(QuiverError::Shape {
                rows: n,
                cols: rows.iter().map(|r| r.as_ref().len()).collect(),
            });
        }
        let b: Vec<i64> = rows
            .iter()
            .flat_map(|r| r.as_ref().iter().copied())
            .collect();
        Self::from_flat(n, b)
    }

    /// Builds a matrix from a row-major buffer of length `n * n`.
    pub fn from_flat(n: usize, b: Vec<i64>) -> Result<Self> {
        if n == 0 {
            return Err(QuiverError::Shape {
                rows: 0,
                cols: vec![],
            });
        }
        if b.len() != n * n {
            return Err(QuiverError::Length {
                expected: n * n,
                actual: b.len(),
            });
        }
        for i in 0..n {
            for j in i..n {
                let (bij, bji) = (b[i * n + j], b[j * n + i]);
                if bij.checked_neg() != Some(bji) {
                    return Err(QuiverError::NotSkewSymmetric { i, j, bij, bji });
                }
            }
        }
        Ok(ExchangeMatrix { n, b })
    }

    /// Builds a matrix from its strict upper triangle in row-major order.
    pub fn from_upper(n: usize, upper: &[i64]) -> Result<Self> {
        let expected = n * n.saturating_sub(1) / 2;
        if n == 0 || upper.len() != expected {
            return Err(QuiverError::Length {
                expected,
                actual: upper.len(),
            });
        }
        let mut b = vec![0i64; n * n];
        let mut it = upper.iter();
        for i in 0..n {
            for j in (i + 1)..n {
                let v = *it.next().expect("length checked");
                let neg = v.checked_neg().ok_or(QuiverError::Overflow { vertex: i })?;
                b[i * n + j] = v;
                b[j * n + i] = neg;
            }
        }
        Ok(ExchangeMatrix { n, b })
    }

    /// Builds a matrix from `(source, target, multiplicity)` arrows.
    pub fn from_arrows(n: usize, arrows: &[(usize, usize, i64)]) -> Result<Self> {
        let mut b = vec![0i64; n * n];
        for &(s, t, w) in arrows {
            for v in [s, t] {
                if v >= n {
                    return Err(QuiverError::VertexOutOfRange { vertex: v, n });
                }
            }
            if s == t {
                return Err(QuiverError::NotSkewSymmetric {
                    i: s,
                    j: t,
                    bij: w,
                    bji: w,
                });
            }
            b[s * n + t] += w;
            b[t * n + s] -= w;
        }
        Ok(ExchangeMatrix { n, b })
    }

    pub fn rank(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.b[i * self.n + j]
    }

    /// Row-major entries.
    pub fn as_flat(&self) -> &[i64] {
        &self.b
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.b.chunks(self.n).map(<[i64]>::to_vec).collect()
    }

    /// Strict upper triangle in row-major order.
    pub fn upper(&self) -> Vec<i64> {
        let n = self.n;
        (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| self.b[i * n + j])
            .collect()
    }

    /// Largest arrow multiplicity between any pair of vertices.
    pub fn max_weight(&self) -> i64 {
        self.b.iter().map(|v| v.abs()).max().unwrap_or(0)
    }

    /// Mutation at vertex `k`.
    ///
    /// Entries in row or column `k` change sign; every other entry gains
    /// `sign(b_ik) * max(0, b_ik * b_kj)`. Fails on out-of-range `k` and on
    /// `i64` overflow of the new entries.
    pub fn mutate(&self, k: usize) -> Result<Self> {
        let n = self.n;
        if k >= n {
            return Err(QuiverError::VertexOutOfRange { vertex: k, n });
        }
        let overflow = || QuiverError::Overflow { vertex: k };
        let mut out = self.b.clone();
        for i in 0..n {
            let bik = self.b[i * n + k];
            for j in 0..n {
                let idx = i * n + j;
                if i == k || j == k {
                    out[idx] = self.b[idx].checked_neg().ok_or_else(overflow)?;
                } else if bik != 0 {
                    let bkj = self.b[k * n + j];
                    if (bik > 0 && bkj > 0) || (bik < 0 && bkj < 0) {
                        let prod = bik.checked_mul(bkj).ok_or_else(overflow)?;
                        let delta = if bik > 0 { prod } else { -prod };
                        out[idx] = self.b[idx].checked_add(delta).ok_or_else(overflow)?;
                    }
                }
            }
        }
        Ok(ExchangeMatrix { n, b: out })
    }

    /// Applies a sequence of mutations left to right.
    pub fn mutate_path(&self, path: &[usize]) -> Result<Self> {
        let mut q = self.clone();
        for &k in path {
            q = q.mutate(k)?;
        }
        Ok(q)
    }

    /// True when the digraph with an arc `i -> j` for every `b[i][j] > 0`
    /// has no directed cycle.
    pub fn is_acyclic(&self) -> bool {
        // Kahn elimination on in-degrees.
        let n = self.n;
        let mut indeg: Vec<usize> = (0..n)
            .map(|j| (0..n).filter(|&i| self.b[i * n + j] > 0).count())
            .collect();
        let mut stack: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut removed = 0;
        while let Some(v) = stack.pop() {
            removed += 1;
            for j in 0..n {
                if self.b[v * n + j] > 0 {
                    indeg[j] -= 1;
                    if indeg[j] == 0 {
                        stack.push(j);
                    }
                }
            }
        }
        removed == n
    }

    /// True when the underlying undirected graph is connected.
    pub fn is_weakly_connected(&self) -> bool {
        let n = self.n;
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for u in 0..n {
                if !seen[u] && self.b[v * n + u] != 0 {
                    seen[u] = true;
                    count += 1;
                    stack.push(u);
                }
            }
        }
        count == n
    }

    /// Restriction to the vertices in `subset`, keeping their given order.
    pub fn full_subquiver(&self, subset: &[usize]) -> Result<Self> {
        if subset.is_empty() {
            return Err(QuiverError::BadSubset);
        }
        for (pos, &v) in subset.iter().enumerate() {
            if v >= self.n {
                return Err(QuiverError::VertexOutOfRange {
                    vertex: v,
                    n: self.n,
                });
            }
            if subset[..pos].contains(&v) {
                return Err(QuiverError::BadSubset);
            }
        }
        Ok(self.relabel_unchecked(subset))
    }

    /// Simultaneous row/column permutation: `out[i][j] = b[perm[i]][perm[j]]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(QuiverError::RankMismatch(perm.len(), self.n));
        }
        self.full_subquiver(perm)
    }

    fn relabel_unchecked(&self, idx: &[usize]) -> Self {
        let m = idx.len();
        let mut b = Vec::with_capacity(m * m);
        for &i in idx {
            for &j in idx {
                b.push(self.b[i * self.n + j]);
            }
        }
        ExchangeMatrix { n: m, b }
    }

    /// Vector encoding of a rank-4 matrix.
    pub fn encode(&self, mode: Encoding) -> Result<Vec<i64>> {
        if self.n != 4 {
            return Err(QuiverError::WrongRank {
                expected: 4,
                actual: self.n,
            });
        }
        Ok(match mode {
            Encoding::Flat16 => self.b.clone(),
            Encoding::Upper6 => self.upper(),
        })
    }

    /// Inverse of [`ExchangeMatrix::encode`].
    pub fn decode(values: &[i64], mode: Encoding) -> Result<Self> {
        match mode {
            Encoding::Flat16 => Self::from_flat(4, values.to_vec()),
            Encoding::Upper6 => Self::from_upper(4, values),
        }
    }
}

impl fmt::Debug for ExchangeMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExchangeMatrix{:?}", self.rows())
    }
}

impl fmt::Display for ExchangeMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .rows()
            .iter()
            .map(|r| {
                let cells: Vec<String> = r.iter().map(i64::to_string).collect();
                format!("[{}]", cells.join(","))
            })
            .collect();
        write!(f, "[{}]", rows.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a4_type1() -> ExchangeMatrix {
        ExchangeMatrix::from_arrows(4, &[(0, 1, 1), (1, 2, 1), (2, 3, 1)]).unwrap()
    }

    #[test]
    fn worked_example_mutation_at_second_vertex() {
        let q = ExchangeMatrix::from_upper(4, &[2, -1, 0, 1, 1, 1]).unwrap();
        let m = q.mutate(1).unwrap();
        assert_eq!(m.upper(), vec![-2, 1, 2, -1, -1, 1]);
    }

    #[test]
    fn mutation_rejects_bad_vertex() {
        assert!(matches!(
            a4_type1().mutate(4),
            Err(QuiverError::VertexOutOfRange { vertex: 4, n: 4 })
        ));
    }

    #[test]
    fn mutation_reports_overflow() {
        let big = i64::MAX / 2;
        let q = ExchangeMatrix::from_arrows(3, &[(0, 1, big), (1, 2, 4)]).unwrap();
        assert!(matches!(
            q.mutate(1),
            Err(QuiverError::Overflow { vertex: 1 })
        ));
    }

    #[test]
    fn acyclicity() {
        assert!(a4_type1().is_acyclic());
        let markov = ExchangeMatrix::from_arrows(3, &[(0, 1, 2), (1, 2, 2), (2, 0, 2)]).unwrap();
        assert!(!markov.is_acyclic());
        assert!(ExchangeMatrix::zeros(4).is_acyclic());
    }

    #[test]
    fn connectivity() {
        assert!(a4_type1().is_weakly_connected());
        assert!(!ExchangeMatrix::zeros(4).is_weakly_connected());
        assert!(ExchangeMatrix::zeros(1).is_weakly_connected());
    }

    #[test]
    fn subquivers() {
        let q = a4_type1();
        assert_eq!(q.full_subquiver(&[0, 1, 2, 3]).unwrap(), q);
        let s = q.full_subquiver(&[1, 2]).unwrap();
        assert_eq!(s.rows(), vec![vec![0, 1], vec![-1, 0]]);
        assert!(matches!(q.full_subquiver(&[]), Err(QuiverError::BadSubset)));
        assert!(matches!(
            q.full_subquiver(&[1, 1]),
            Err(QuiverError::BadSubset)
        ));
        assert!(q.full_subquiver(&[5]).is_err());
    }

    #[test]
    fn encodings() {
        let q = a4_type1();
        assert_eq!(
            q.encode(Encoding::Flat16).unwrap(),
            vec![0, 1, 0, 0, -1, 0, 1, 0, 0, -1, 0, 1, 0, 0, -1, 0]
        );
        assert_eq!(q.encode(Encoding::Upper6).unwrap(), vec![1, 0, 0, 1, 0, 1]);
        assert!(ExchangeMatrix::zeros(3).encode(Encoding::Upper6).is_err());
        assert_eq!(Encoding::Upper6.column_names()[5], "e5");
        assert_eq!(Encoding::Flat16.column_names()[15], "m33");
    }

    #[test]
    fn json_validates_skew_symmetry() {
        let ok: ExchangeMatrix = serde_json::from_str(
            r#"{"n": 4, "b": [[0,2,-1,0],[-2,0,1,1],[1,-1,0,1],[0,-1,-1,0]]}"#,
        )
        .unwrap();
        assert_eq!(ok.upper(), vec![2, -1, 0, 1, 1, 1]);
        let bad = serde_json::from_str::<ExchangeMatrix>(r#"{"n": 2, "b": [[0,1],[1,0]]}"#);
        assert!(bad.is_err());
        let wrong_n = serde_json::from_str::<ExchangeMatrix>(r#"{"n": 3, "b": [[0,1],[-1,0]]}"#);
        assert!(wrong_n.is_err());
        let back = serde_json::to_string(&ok).unwrap();
        assert_eq!(serde_json::from_str::<ExchangeMatrix>(&back).unwrap(), ok);
    }
}
