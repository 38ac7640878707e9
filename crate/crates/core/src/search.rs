//! Breadth-first exploration of exchange graphs.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::canonical::{canonical_form, CanonicalKey};
use crate::error::{QuiverError, Result};
use crate::matrix::ExchangeMatrix;
use crate::rank3::{find_nma_rank3_subquiver, Rank3Witness};
use crate::seeds;

/// Default memory cap for a single exploration: 8 GiB.
pub const DEFAULT_MEMORY_CAP: u64 = 8 << 30;

/// Environment variable overriding the default memory cap (bytes).
pub const MEMORY_CAP_ENV: &str = "MUTACYC_MEMORY_CAP";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchLimits {
    pub memory_cap_bytes: u64,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            memory_cap_bytes: DEFAULT_MEMORY_CAP,
        }
    }
}

impl SearchLimits {
    /// Default limits, honouring [`MEMORY_CAP_ENV`] when set.
    pub fn from_env() -> Self {
        let cap = std::env::var(MEMORY_CAP_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(DEFAULT_MEMORY_CAP);
        SearchLimits {
            memory_cap_bytes: cap,
        }
    }
}

/// One quiver reached during exploration.
#[derive(Clone, Debug)]
pub struct ExploredNode {
    pub matrix: ExchangeMatrix,
    pub key: CanonicalKey,
    pub parent: Option<usize>,
    /// Vertex mutated at to reach this node from its parent.
    pub vertex: usize,
    pub depth: usize,
}

/// Incremental, level-by-level BFS over mutations.
///
/// With `dedup` the frontier is keyed on canonical forms, so each
/// isomorphism class is expanded once and depths are minimal mutation
/// distances between classes. Without it, labeled matrices are the states.
/// Stored matrices are the ones actually reached, so the vertex sequence
/// returned by [`Explorer::path_to`] replays exactly from the seed.
pub struct Explorer {
    dedup: bool,
    limits: SearchLimits,
    nodes: Vec<ExploredNode>,
    index: HashMap<Vec<i64>, usize>,
    level: Range<usize>,
    depth: usize,
    overflowed: usize,
    closed: bool,
}

impl Explorer {
    pub fn new(seed: &ExchangeMatrix, dedup: bool, limits: SearchLimits) -> Result<Self> {
        let key = canonical_form(seed)?;
        let state = if dedup {
            key.as_flat().to_vec()
        } else {
            seed.as_flat().to_vec()
        };
        let mut index = HashMap::new();
        index.insert(state, 0);
        Ok(Explorer {
            dedup,
            limits,
            nodes: vec![ExploredNode {
                matrix: seed.clone(),
                key,
                parent: None,
                vertex: 0,
                depth: 0,
            }],
            index,
            level: 0..1,
            depth: 0,
            overflowed: 0,
            closed: false,
        })
    }

    fn node_bytes(&self) -> u64 {
        let n = self.nodes[0].matrix.rank() as u64;
        // matrix + key + index entry, with container overheads
        3 * (n * n * 8 + 24) + 64
    }

    /// Expands the current deepest level and returns the index range of the
    /// new nodes. An empty range with no overflowed mutations means the
    /// exchange graph is closed.
    pub fn expand_level(&mut self) -> Result<Range<usize>> {
        let start = self.nodes.len();
        let n = self.nodes[0].matrix.rank();
        let per_node = self.node_bytes();
        for idx in self.level.clone() {
            for k in 0..n {
                // mutating straight back returns to the parent
                if self.nodes[idx].parent.is_some() && self.nodes[idx].vertex == k {
                    continue;
                }
                let next = match self.nodes[idx].matrix.mutate(k) {
                    Ok(m) => m,
                    Err(QuiverError::Overflow { .. }) => {
                        self.overflowed += 1;
                        continue;
                    }
                    Err(e) => return Err(e),
                };
                let key = canonical_form(&next)?;
                let state = if self.dedup {
                    key.as_flat().to_vec()
                } else {
                    next.as_flat().to_vec()
                };
                if self.index.contains_key(&state) {
                    continue;
                }
                if (self.nodes.len() as u64 + 1) * per_node > self.limits.memory_cap_bytes {
                    return Err(QuiverError::MemoryCap {
                        cap_bytes: self.limits.memory_cap_bytes,
                        nodes: self.nodes.len(),
                        key: self.nodes[0].key.to_string(),
                    });
                }
                self.index.insert(state, self.nodes.len());
                self.nodes.push(ExploredNode {
                    matrix: next,
                    key,
                    parent: Some(idx),
                    vertex: k,
                    depth: self.depth + 1,
                });
            }
        }
        self.depth += 1;
        self.level = start..self.nodes.len();
        if self.level.is_empty() && self.overflowed == 0 {
            self.closed = true;
        }
        Ok(self.level.clone())
    }

    /// True when every mutation of the current deepest level lands on an
    /// already visited state. Does not add nodes.
    pub fn probe_closed(&self) -> Result<bool> {
        if self.closed {
            return Ok(true);
        }
        if self.overflowed > 0 {
            return Ok(false);
        }
        let n = self.nodes[0].matrix.rank();
        for idx in self.level.clone() {
            for k in 0..n {
                let next = match self.nodes[idx].matrix.mutate(k) {
                    Ok(m) => m,
                    Err(QuiverError::Overflow { .. }) => return Ok(false),
                    Err(e) => return Err(e),
                };
                let state = if self.dedup {
                    canonical_form(&next)?.as_flat().to_vec()
                } else {
                    next.as_flat().to_vec()
                };
                if !self.index.contains_key(&state) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    pub fn nodes(&self) -> &[ExploredNode] {
        &self.nodes
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Mutations skipped because an entry would overflow `i64`.
    pub fn overflowed(&self) -> usize {
        self.overflowed
    }

    /// Mutation sequence from the seed to node `idx`.
    pub fn path_to(&self, idx: usize) -> Vec<usize> {
        let mut path = Vec::new();
        let mut cur = idx;
        while let Some(parent) = self.nodes[cur].parent {
            path.push(self.nodes[cur].vertex);
            cur = parent;
        }
        path.reverse();
        path
    }

    pub fn into_result(self, truncated: bool) -> ExplorationResult {
        let mut frontier_depths = BTreeMap::new();
        for node in &self.nodes {
            frontier_depths
                .entry(node.key.clone())
                .or_insert(node.depth);
        }
        ExplorationResult {
            visited: frontier_depths.keys().cloned().collect(),
            frontier_depths,
            truncated,
            overflowed: self.overflowed,
            nodes: self.nodes,
        }
    }
}

/// Outcome of [`explore_class`].
#[derive(Clone, Debug)]
pub struct ExplorationResult {
    pub visited: BTreeSet<CanonicalKey>,
    /// First-seen depth of every visited class.
    pub frontier_depths: BTreeMap<CanonicalKey, usize>,
    /// True unless the exchange graph was shown to close within the depth.
    pub truncated: bool,
    pub overflowed: usize,
    pub nodes: Vec<ExploredNode>,
}

/// Breadth-first expansion from `seed` to `max_depth` mutations.
pub fn explore_class(
    seed: &ExchangeMatrix,
    max_depth: usize,
    dedup: bool,
    limits: SearchLimits,
) -> Result<ExplorationResult> {
    let mut ex = Explorer::new(seed, dedup, limits)?;
    while ex.depth() < max_depth {
        ex.expand_level()?;
        if ex.is_closed() {
            return Ok(ex.into_result(false));
        }
    }
    let closed = ex.probe_closed()?;
    Ok(ex.into_result(!closed))
}

/// Alternating weights `(a, b)` when `q` is an oriented 4-cycle
/// `a, b, a, b` with no diagonals and `a, b >= 2`.
pub fn box_weights(q: &ExchangeMatrix) -> Option<(i64, i64)> {
    if q.rank() != 4 {
        return None;
    }
    // Cyclic orders starting at vertex 0, up to direction.
    for p in [[0, 1, 2, 3], [0, 1, 3, 2], [0, 2, 1, 3]] {
        for dir in [p, [p[0], p[3], p[2], p[1]]] {
            let w: Vec<i64> = (0..4).map(|i| q.get(dir[i], dir[(i + 1) % 4])).collect();
            let diagonals_clear = q.get(dir[0], dir[2]) == 0 && q.get(dir[1], dir[3]) == 0;
            if diagonals_clear && w[0] == w[2] && w[1] == w[3] && w[0] >= 2 && w[1] >= 2 {
                return Some((w[0], w[1]));
            }
        }
    }
    None
}

pub fn is_box_quiver(q: &ExchangeMatrix) -> bool {
    box_weights(q).is_some()
}

/// True when `q` is isomorphic to the dreaded torus.
pub fn is_dreaded_torus(q: &ExchangeMatrix) -> bool {
    q.rank() == 4 && canonical_form(q).ok() == canonical_form(&seeds::dreaded_torus()).ok()
}

/// Why a quiver is already known to be non-mutation-acyclic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NmaEvidence {
    Rank3(Rank3Witness),
    Box { a: i64, b: i64 },
    DreadedTorus,
    Known(CanonicalKey),
}

/// Direct non-mutation-acyclicity evidence for `q`, without mutating.
pub fn known_nma_evidence<S>(q: &ExchangeMatrix, known: &S) -> Option<NmaEvidence>
where
    S: KeySet + ?Sized,
{
    if let Some(w) = find_nma_rank3_subquiver(q) {
        return Some(NmaEvidence::Rank3(w));
    }
    if let Some((a, b)) = box_weights(q) {
        return Some(NmaEvidence::Box { a, b });
    }
    if is_dreaded_torus(q) {
        return Some(NmaEvidence::DreadedTorus);
    }
    let key = canonical_form(q).ok()?;
    if known.contains_key(&key) {
        return Some(NmaEvidence::Known(key));
    }
    None
}

/// True when `q` has an NMA rank-3 subquiver, is a box quiver, is the
/// dreaded torus, or has its canonical key in `known`.
pub fn detect_known_nma<S>(q: &ExchangeMatrix, known: &S) -> bool
where
    S: KeySet + ?Sized,
{
    known_nma_evidence(q, known).is_some()
}

/// Membership test over canonical keys.
pub trait KeySet {
    fn contains_key(&self, key: &CanonicalKey) -> bool;
}

impl KeySet for BTreeSet<CanonicalKey> {
    fn contains_key(&self, key: &CanonicalKey) -> bool {
        self.contains(key)
    }
}

impl KeySet for std::collections::HashSet<CanonicalKey> {
    fn contains_key(&self, key: &CanonicalKey) -> bool {
        self.contains(key)
    }
}

impl<V> KeySet for HashMap<CanonicalKey, V> {
    fn contains_key(&self, key: &CanonicalKey) -> bool {
        HashMap::contains_key(self, key)
    }
}

impl<V> KeySet for BTreeMap<CanonicalKey, V> {
    fn contains_key(&self, key: &CanonicalKey) -> bool {
        BTreeMap::contains_key(self, key)
    }
}
