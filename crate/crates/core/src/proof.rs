//! Exhaustive decision of mutation-acyclicity for connected rank-4 quivers
//! with arrow multiplicities at most 2, with an auditable witness for
//! every class.
//!
//! The pipeline runs in four stages over the 667 isomorphism classes:
//!
//! 1. classes with an acyclic representative are MA;
//! 2. classes containing a Markov subquiver, the 2-2-2-2 box quiver and
//!    the dreaded torus are NMA;
//! 3. the stage-2 classes are explored to a fixed depth and every still
//!    unknown class met on the way is NMA;
//! 4. every remaining class is explored breadth-first until it reaches an
//!    acyclic quiver (MA), reaches a quiver already known to be NMA (NMA),
//!    or its exchange graph closes without an acyclic member (NMA).

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};

use log::{debug, info};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::canonical::{are_isomorphic, canonical_form, CanonicalKey};
use crate::error::{QuiverError, Result};
use crate::matrix::ExchangeMatrix;
use crate::rank3::{
    classify_rank3_cycle, cycle_triple, find_nma_rank3_subquiver, Rank3Triple, Verdict,
};
use crate::search::{
    box_weights, is_dreaded_torus, known_nma_evidence, Explorer, NmaEvidence, SearchLimits,
};

/// Largest arrow multiplicity in the exhaustive enumeration.
pub const WEIGHT_BOUND: i64 = 2;

/// Every rank-4 matrix with upper-triangle entries in `-2..=2`, in
/// odometer order with the last upper entry varying fastest.
pub fn all_weight2_rank4() -> Vec<ExchangeMatrix> {
    let values: Vec<i64> = (-WEIGHT_BOUND..=WEIGHT_BOUND).collect();
    let base = values.len();
    let total = base.pow(6);
    (0..total)
        .map(|mut code| {
            let mut upper = [0i64; 6];
            for slot in upper.iter_mut().rev() {
                *slot = values[code % base];
                code /= base;
            }
            ExchangeMatrix::from_upper(4, &upper).expect("valid upper triangle")
        })
        .collect()
}

/// Result of [`enumerate_weight2_rank4`].
#[derive(Clone, Debug)]
pub struct Enumeration {
    pub raw_count: usize,
    pub connected: Vec<ExchangeMatrix>,
    /// Sorted, distinct canonical keys of the connected matrices.
    pub classes: Vec<CanonicalKey>,
}

pub fn enumerate_weight2_rank4() -> Enumeration {
    let raw = all_weight2_rank4();
    let raw_count = raw.len();
    let connected: Vec<ExchangeMatrix> = raw
        .into_iter()
        .filter(|q| q.is_weakly_connected())
        .collect();
    let mut classes: Vec<CanonicalKey> = connected
        .par_iter()
        .map(|q| canonical_form(q).expect("rank 4"))
        .collect();
    classes.sort();
    classes.dedup();
    Enumeration {
        raw_count,
        connected,
        classes,
    }
}

/// Pipeline stage that settled a class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Acyclic,
    MarkovSubquiver,
    Special,
    Propagated,
    Search,
    Unresolved,
}

/// Independently checkable evidence for a verdict. Mutation paths start at
/// the class's canonical representative ([`CanonicalKey::to_matrix`]).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// Replaying `path` reaches an acyclic quiver.
    Acyclic { path: Vec<usize> },
    /// Replaying `path` reaches a quiver whose full subquiver on
    /// `vertices` is a cyclic NMA rank-3 quiver with multiplicities `triple`.
    Rank3Subquiver {
        path: Vec<usize>,
        vertices: [usize; 3],
        triple: Rank3Triple,
    },
    /// Replaying `path` reaches an `a, b, a, b` box quiver with `a, b >= 2`.
    BoxQuiver { path: Vec<usize>, a: i64, b: i64 },
    /// The whole exchange graph has `classes` isomorphism classes and none
    /// is acyclic.
    ExchangeGraph { classes: usize },
    /// Replaying `path` from this class and `source_path` from the NMA
    /// class `source` lands on isomorphic quivers.
    SharedWithNma {
        path: Vec<usize>,
        source: CanonicalKey,
        source_path: Vec<usize>,
    },
    /// Replaying `path` from the queried quiver lands in the MA class
    /// `target` (used by lookups outside the ledger).
    SharedWithMa {
        path: Vec<usize>,
        target: CanonicalKey,
    },
}

impl Witness {
    /// Short human-readable kind.
    pub fn describe(&self) -> String {
        match self {
            Witness::Acyclic { path } if path.is_empty() => "acyclic".into(),
            Witness::Acyclic { path } => format!("acyclic after mutations {path:?}"),
            Witness::Rank3Subquiver { path, vertices, triple } => format!(
                "rank-3 subquiver witness: vertices {vertices:?} form cycle ({}, {}, {}) after mutations {path:?}",
                triple.x, triple.y, triple.z
            ),
            Witness::BoxQuiver { path, a, b } => {
                format!("box-quiver witness: {a}-{b}-{a}-{b} after mutations {path:?}")
            }
            Witness::ExchangeGraph { classes } => {
                format!("exchange-graph witness: closed with {classes} class(es), none acyclic")
            }
            Witness::SharedWithNma { path, source, source_path } => format!(
                "mutation-equivalent to NMA class {source} (mutations {path:?} vs {source_path:?})"
            ),
            Witness::SharedWithMa { path, target } => {
                format!("mutation-equivalent to MA class {target} (mutations {path:?})")
            }
        }
    }

    /// Kind tag, e.g. `"exchange-graph"`.
    pub fn kind(&self) -> &'static str {
        match self {
            Witness::Acyclic { .. } => "acyclic",
            Witness::Rank3Subquiver { .. } => "rank-3 subquiver",
            Witness::BoxQuiver { .. } => "box-quiver",
            Witness::ExchangeGraph { .. } => "exchange-graph",
            Witness::SharedWithNma { .. } => "shared-class",
            Witness::SharedWithMa { .. } => "shared-class",
        }
    }
}

/// Ledger line for one isomorphism class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassRecord {
    pub key: CanonicalKey,
    pub verdict: Verdict,
    pub stage: Stage,
    /// Exploration depth at which stage 4 settled the class.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub depth: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<Witness>,
}

/// Stage counts and per-class verdicts of the decision pipeline.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofLedger {
    pub total_raw: usize,
    pub total_connected: usize,
    pub total_classes: usize,
    pub acyclic_count: usize,
    pub markov_subquiver_count: usize,
    /// Box quiver plus dreaded torus.
    pub special_count: usize,
    pub propagated_nma_count: usize,
    pub resolved_by_search_count: usize,
    /// Stage-4 classes settled by exchange-graph closure.
    pub closure_count: usize,
    pub final_ma: usize,
    pub final_nma: usize,
    #[serde(skip)]
    pub classes: BTreeMap<CanonicalKey, ClassRecord>,
}

impl ProofLedger {
    pub fn verdict(&self, key: &CanonicalKey) -> Option<Verdict> {
        self.classes.get(key).map(|r| r.verdict)
    }

    pub fn undetermined(&self) -> Vec<&CanonicalKey> {
        self.classes
            .values()
            .filter(|r| r.verdict == Verdict::Undetermined)
            .map(|r| &r.key)
            .collect()
    }

    /// Fails when any class is still undetermined.
    pub fn ensure_complete(&self) -> Result<()> {
        let open = self.undetermined().len();
        if open > 0 {
            let depth = self
                .classes
                .values()
                .filter_map(|r| r.depth)
                .max()
                .unwrap_or(0);
            return Err(QuiverError::Undetermined { count: open, depth });
        }
        Ok(())
    }

    /// Recomputes the summary counts from the per-class records.
    pub fn from_records(
        total_raw: usize,
        total_connected: usize,
        records: impl IntoIterator<Item = ClassRecord>,
    ) -> Self {
        let classes: BTreeMap<CanonicalKey, ClassRecord> =
            records.into_iter().map(|r| (r.key.clone(), r)).collect();
        let count_stage = |s: Stage| classes.values().filter(|r| r.stage == s).count();
        let count_verdict = |v: Verdict| classes.values().filter(|r| r.verdict == v).count();
        ProofLedger {
            total_raw,
            total_connected,
            total_classes: classes.len(),
            acyclic_count: count_stage(Stage::Acyclic),
            markov_subquiver_count: count_stage(Stage::MarkovSubquiver),
            special_count: count_stage(Stage::Special),
            propagated_nma_count: count_stage(Stage::Propagated),
            resolved_by_search_count: classes
                .values()
                .filter(|r| r.stage == Stage::Search && r.verdict != Verdict::Undetermined)
                .count(),
            closure_count: classes
                .values()
                .filter(|r| {
                    r.stage == Stage::Search
                        && matches!(r.witness, Some(Witness::ExchangeGraph { .. }))
                })
                .count(),
            final_ma: count_verdict(Verdict::MutationAcyclic),
            final_nma: count_verdict(Verdict::NonMutationAcyclic),
            classes,
        }
    }

    /// One-line summary, e.g. `534 MA / 133 NMA over 667 classes`.
    pub fn summary_line(&self) -> String {
        format!(
            "{} MA / {} NMA over {} classes",
            self.final_ma, self.final_nma, self.total_classes
        )
    }

    /// Multi-line stage table.
    pub fn report(&self) -> String {
        let rows = [
            ("raw matrices", self.total_raw),
            ("weakly connected", self.total_connected),
            ("isomorphism classes", self.total_classes),
            ("stage 1: acyclic (MA)", self.acyclic_count),
            (
                "stage 2: Markov subquiver (NMA)",
                self.markov_subquiver_count,
            ),
            ("stage 2: box / dreaded torus (NMA)", self.special_count),
            (
                "stage 3: propagated from NMA seeds",
                self.propagated_nma_count,
            ),
            ("stage 4: resolved by search", self.resolved_by_search_count),
            ("stage 4: by exchange-graph closure", self.closure_count),
            ("undetermined", self.undetermined().len()),
            ("final MA", self.final_ma),
            ("final NMA", self.final_nma),
        ];
        let mut out = String::new();
        for (label, value) in rows {
            out.push_str(&format!("{label:<38}{value:>8}\n"));
        }
        out.push_str(&self.summary_line());
        out.push('\n');
        out
    }

    /// Writes one JSON record per class, ordered by key.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for record in self.classes.values() {
            serde_json::to_writer(&mut w, record)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Reads a ledger written by [`ProofLedger::write_jsonl`]. The summary
    /// counts are recomputed from the records; the enumeration totals are
    /// not stored per class and are recomputed as well.
    pub fn read_jsonl<R: BufRead>(r: R) -> Result<Self> {
        let mut records = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: ClassRecord = serde_json::from_str(&line).map_err(|e| QuiverError::Parse {
                line: i + 1,
                reason: e.to_string(),
            })?;
            records.push(rec);
        }
        let raw = (2 * WEIGHT_BOUND as usize + 1).pow(6);
        let connected = all_weight2_rank4()
            .iter()
            .filter(|q| q.is_weakly_connected())
            .count();
        Ok(Self::from_records(raw, connected, records))
    }
}

/// Depth and resource settings for [`prove_rank4_weight2`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofConfig {
    pub max_nma_seed_depth: usize,
    pub max_resolve_depth: usize,
    pub limits: SearchLimits,
}

impl Default for ProofConfig {
    fn default() -> Self {
        ProofConfig {
            max_nma_seed_depth: 8,
            max_resolve_depth: 12,
            limits: SearchLimits::default(),
        }
    }
}

/// Where a known-NMA class was reached from.
#[derive(Clone, Debug)]
struct NmaOrigin {
    source: CanonicalKey,
    source_path: Vec<usize>,
}

fn initial_nma_witness(q: &ExchangeMatrix) -> Option<(Stage, Witness)> {
    if let Some(w) = find_nma_rank3_subquiver(q) {
        if w.triple == Rank3Triple::new(2, 2, 2) {
            return Some((
                Stage::MarkovSubquiver,
                Witness::Rank3Subquiver {
                    path: vec![],
                    vertices: w.vertices,
                    triple: w.triple,
                },
            ));
        }
    }
    if let Some((a, b)) = box_weights(q) {
        return Some((Stage::Special, Witness::BoxQuiver { path: vec![], a, b }));
    }
    if is_dreaded_torus(q) {
        return Some((Stage::Special, Witness::ExchangeGraph { classes: 1 }));
    }
    None
}

/// Outcome of exploring one class until it is settled.
struct Resolution {
    verdict: Verdict,
    depth: usize,
    witness: Option<Witness>,
}

/// Breadth-first search from `seed`, checking each newly reached quiver
/// for acyclicity or known non-mutation-acyclicity, level by level up to
/// `max_depth`.
fn resolve_by_search<F>(
    seed: &ExchangeMatrix,
    max_depth: usize,
    limits: SearchLimits,
    mut lookup: F,
) -> Result<Resolution>
where
    F: FnMut(&ExchangeMatrix, &CanonicalKey, Vec<usize>) -> Option<(Verdict, Witness)>,
{
    let mut ex = Explorer::new(seed, true, limits)?;
    let mut range = 0..1;
    loop {
        for idx in range.clone() {
            let node = &ex.nodes()[idx];
            let path = ex.path_to(idx);
            if node.matrix.is_acyclic() {
                return Ok(Resolution {
                    verdict: Verdict::MutationAcyclic,
                    depth: ex.depth(),
                    witness: Some(Witness::Acyclic { path }),
                });
            }
            if let Some((verdict, witness)) = lookup(&node.matrix, &node.key, path) {
                return Ok(Resolution {
                    verdict,
                    depth: ex.depth(),
                    witness: Some(witness),
                });
            }
        }
        if ex.depth() >= max_depth {
            return Ok(Resolution {
                verdict: Verdict::Undetermined,
                depth: ex.depth(),
                witness: None,
            });
        }
        range = ex.expand_level()?;
        if ex.is_closed() {
            let classes = ex.nodes().len();
            return Ok(Resolution {
                verdict: Verdict::NonMutationAcyclic,
                depth: ex.depth(),
                witness: Some(Witness::ExchangeGraph { classes }),
            });
        }
    }
}

fn evidence_witness(
    evidence: NmaEvidence,
    path: Vec<usize>,
    known: &HashMap<CanonicalKey, NmaOrigin>,
) -> Witness {
    match evidence {
        NmaEvidence::Rank3(w) => Witness::Rank3Subquiver {
            path,
            vertices: w.vertices,
            triple: w.triple,
        },
        NmaEvidence::Box { a, b } => Witness::BoxQuiver { path, a, b },
        NmaEvidence::DreadedTorus => Witness::SharedWithNma {
            path,
            source: canonical_form(&crate::seeds::dreaded_torus()).expect("rank 4"),
            source_path: vec![],
        },
        NmaEvidence::Known(key) => {
            let p = &known[&key];
            Witness::SharedWithNma {
                path,
                source: p.source.clone(),
                source_path: p.source_path.clone(),
            }
        }
    }
}

/// Runs the four-stage decision pipeline over all connected rank-4
/// quivers with multiplicities at most 2.
///
/// Classes left unresolved at `max_resolve_depth` are reported with
/// verdict `Undetermined`; use [`ProofLedger::ensure_complete`] to turn
/// that into an error.
pub fn prove_rank4_weight2(config: &ProofConfig) -> Result<ProofLedger> {
    if config.max_nma_seed_depth == 0 || config.max_resolve_depth == 0 {
        return Err(QuiverError::Config(
            "proof depths must be at least 1".into(),
        ));
    }
    let en = enumerate_weight2_rank4();
    info!(
        "enumerated {} raw, {} connected, {} classes",
        en.raw_count,
        en.connected.len(),
        en.classes.len()
    );
    let mut records: BTreeMap<CanonicalKey, ClassRecord> = BTreeMap::new();
    let mut unknown: Vec<CanonicalKey> = Vec::new();

    // Stages 1 and 2.
    for key in &en.classes {
        let q = key.to_matrix();
        if q.is_acyclic() {
            records.insert(
                key.clone(),
                ClassRecord {
                    key: key.clone(),
                    verdict: Verdict::MutationAcyclic,
                    stage: Stage::Acyclic,
                    depth: None,
                    witness: Some(Witness::Acyclic { path: vec![] }),
                },
            );
        } else if let Some((stage, witness)) = initial_nma_witness(&q) {
            records.insert(
                key.clone(),
                ClassRecord {
                    key: key.clone(),
                    verdict: Verdict::NonMutationAcyclic,
                    stage,
                    depth: None,
                    witness: Some(witness),
                },
            );
        } else {
            unknown.push(key.clone());
        }
    }
    let seeds: Vec<CanonicalKey> = records
        .values()
        .filter(|r| r.verdict == Verdict::NonMutationAcyclic)
        .map(|r| r.key.clone())
        .collect();
    info!(
        "stage 2: {} NMA seeds, {} unknown",
        seeds.len(),
        unknown.len()
    );

    // Stage 3: everything within `max_nma_seed_depth` of an NMA seed.
    let explored: Vec<Vec<(CanonicalKey, Vec<usize>)>> = seeds
        .par_iter()
        .map(|seed_key| -> Result<Vec<(CanonicalKey, Vec<usize>)>> {
            let mut ex = Explorer::new(&seed_key.to_matrix(), true, config.limits)?;
            while ex.depth() < config.max_nma_seed_depth && !ex.is_closed() {
                ex.expand_level()?;
            }
            Ok((0..ex.nodes().len())
                .map(|i| (ex.nodes()[i].key.clone(), ex.path_to(i)))
                .collect())
        })
        .collect::<Result<_>>()?;
    let mut known: HashMap<CanonicalKey, NmaOrigin> = HashMap::new();
    for (seed_key, reached) in seeds.iter().zip(explored) {
        for (key, path) in reached {
            known.entry(key).or_insert_with(|| NmaOrigin {
                source: seed_key.clone(),
                source_path: path,
            });
        }
    }
    info!("stage 3: {} classes known NMA", known.len());
    let mut remaining = Vec::new();
    for key in unknown {
        if let Some(p) = known.get(&key) {
            records.insert(
                key.clone(),
                ClassRecord {
                    key: key.clone(),
                    verdict: Verdict::NonMutationAcyclic,
                    stage: Stage::Propagated,
                    depth: Some(p.source_path.len()),
                    witness: Some(Witness::SharedWithNma {
                        path: vec![],
                        source: p.source.clone(),
                        source_path: p.source_path.clone(),
                    }),
                },
            );
        } else {
            remaining.push(key);
        }
    }

    // Stage 4.
    let resolved: Vec<ClassRecord> = remaining
        .par_iter()
        .map(|key| -> Result<ClassRecord> {
            let res = resolve_by_search(
                &key.to_matrix(),
                config.max_resolve_depth,
                config.limits,
                |q, _key, path| {
                    known_nma_evidence(q, &known).map(|ev| {
                        (
                            Verdict::NonMutationAcyclic,
                            evidence_witness(ev, path, &known),
                        )
                    })
                },
            )?;
            debug!("class {key}: {} at depth {}", res.verdict, res.depth);
            Ok(ClassRecord {
                key: key.clone(),
                verdict: res.verdict,
                stage: if res.verdict == Verdict::Undetermined {
                    Stage::Unresolved
                } else {
                    Stage::Search
                },
                depth: Some(res.depth),
                witness: res.witness,
            })
        })
        .collect::<Result<_>>()?;
    for r in resolved {
        records.insert(r.key.clone(), r);
    }

    Ok(ProofLedger::from_records(
        en.raw_count,
        en.connected.len(),
        records.into_values(),
    ))
}

/// Re-checks one class's witness without trusting the pipeline.
pub fn verify_record(
    record: &ClassRecord,
    ledger: &ProofLedger,
    limits: SearchLimits,
) -> Result<()> {
    let fail = |reason: String| QuiverError::BadWitness {
        key: record.key.to_string(),
        reason,
    };
    let rep = record.key.to_matrix();
    let Some(witness) = &record.witness else {
        return if record.verdict == Verdict::Undetermined {
            Ok(())
        } else {
            Err(fail("missing witness".into()))
        };
    };
    let expects = |v: Verdict| {
        if record.verdict == v {
            Ok(())
        } else {
            Err(fail(format!(
                "witness kind {} contradicts verdict {}",
                witness.kind(),
                record.verdict
            )))
        }
    };
    match witness {
        Witness::Acyclic { path } => {
            expects(Verdict::MutationAcyclic)?;
            if !rep.mutate_path(path)?.is_acyclic() {
                return Err(fail("replayed quiver is not acyclic".into()));
            }
        }
        Witness::Rank3Subquiver {
            path,
            vertices,
            triple,
        } => {
            expects(Verdict::NonMutationAcyclic)?;
            let q = rep.mutate_path(path)?;
            let sub = q.full_subquiver(vertices)?;
            let t = cycle_triple(&sub, 0, 1, 2)
                .ok_or_else(|| fail("subquiver is not a cycle".into()))?;
            if t != *triple || classify_rank3_cycle(&t) != Verdict::NonMutationAcyclic {
                return Err(fail(format!("subquiver triple {t:?} is not NMA")));
            }
        }
        Witness::BoxQuiver { path, a, b } => {
            expects(Verdict::NonMutationAcyclic)?;
            let q = rep.mutate_path(path)?;
            if box_weights(&q) != Some((*a, *b)) {
                return Err(fail("replayed quiver is not the stated box quiver".into()));
            }
        }
        Witness::ExchangeGraph { classes } => {
            expects(Verdict::NonMutationAcyclic)?;
            // Labeled (non-deduplicated) exploration as an independent route.
            let mut ex = Explorer::new(&rep, false, limits)?;
            while !ex.is_closed() {
                ex.expand_level()?;
                if ex.overflowed() > 0 {
                    return Err(fail("closure check overflowed".into()));
                }
            }
            if ex.nodes().iter().any(|n| n.matrix.is_acyclic()) {
                return Err(fail("exchange graph contains an acyclic quiver".into()));
            }
            let distinct: std::collections::BTreeSet<_> =
                ex.nodes().iter().map(|n| n.key.clone()).collect();
            if distinct.len() != *classes {
                return Err(fail(format!(
                    "closure has {} classes, witness says {classes}",
                    distinct.len()
                )));
            }
        }
        Witness::SharedWithNma {
            path,
            source,
            source_path,
        } => {
            expects(Verdict::NonMutationAcyclic)?;
            let src = ledger
                .classes
                .get(source)
                .ok_or_else(|| fail(format!("source {source} not in ledger")))?;
            if src.verdict != Verdict::NonMutationAcyclic
                || !matches!(src.stage, Stage::MarkovSubquiver | Stage::Special)
            {
                return Err(fail(format!("source {source} is not an initial NMA class")));
            }
            let here = rep.mutate_path(path)?;
            let there = source.to_matrix().mutate_path(source_path)?;
            if !are_isomorphic(&here, &there)? {
                return Err(fail("replayed quivers are not isomorphic".into()));
            }
        }
        Witness::SharedWithMa { .. } => {
            return Err(fail("ledger classes never use MA lookups".into()));
        }
    }
    Ok(())
}

/// Re-checks every witness in the ledger and the summary invariants.
pub fn audit_ledger(ledger: &ProofLedger, limits: SearchLimits) -> Result<()> {
    let results: Vec<Result<()>> = ledger
        .classes
        .par_iter()
        .map(|(_, r)| verify_record(r, ledger, limits))
        .collect();
    for r in results {
        r?;
    }
    if ledger.final_ma + ledger.final_nma + ledger.undetermined().len() != ledger.total_classes {
        return Err(QuiverError::Config("ledger counts do not add up".into()));
    }
    Ok(())
}

/// How [`decide`] reached its verdict.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    pub verdict: Verdict,
    /// Witness path(s) start at the canonical representative when the
    /// verdict comes from the ledger, and at the queried quiver otherwise.
    pub witness: Option<Witness>,
    pub from_ledger: bool,
}

/// Default depth of the bounded search used by [`decide`] outside the ledger.
pub const DEFAULT_DECIDE_DEPTH: usize = 8;

/// Looks `q` up in the ledger, falling back to a bounded search that stops
/// at an acyclic quiver, direct NMA evidence, or any ledger class.
pub fn decide(q: &ExchangeMatrix, ledger: &ProofLedger) -> Decision {
    decide_with_depth(q, ledger, DEFAULT_DECIDE_DEPTH, SearchLimits::default())
}

pub fn decide_with_depth(
    q: &ExchangeMatrix,
    ledger: &ProofLedger,
    max_depth: usize,
    limits: SearchLimits,
) -> Decision {
    if q.rank() == 4 && q.max_weight() <= WEIGHT_BOUND {
        if let Ok(key) = canonical_form(q) {
            if let Some(rec) = ledger.classes.get(&key) {
                return Decision {
                    verdict: rec.verdict,
                    witness: rec.witness.clone(),
                    from_ledger: true,
                };
            }
        }
    }
    let empty: HashMap<CanonicalKey, NmaOrigin> = HashMap::new();
    let result = if q.rank() > crate::canonical::MAX_CANONICAL_RANK {
        None
    } else {
        resolve_by_search(q, max_depth, limits, |m, key, path| {
            if let Some(rec) = ledger.classes.get(key) {
                match rec.verdict {
                    Verdict::MutationAcyclic => {
                        return Some((
                            Verdict::MutationAcyclic,
                            Witness::SharedWithMa {
                                path,
                                target: key.clone(),
                            },
                        ))
                    }
                    Verdict::NonMutationAcyclic => {
                        return Some((
                            Verdict::NonMutationAcyclic,
                            Witness::SharedWithNma {
                                path,
                                source: key.clone(),
                                source_path: vec![],
                            },
                        ))
                    }
                    Verdict::Undetermined => {}
                }
            }
            known_nma_evidence(m, &empty).map(|ev| {
                (
                    Verdict::NonMutationAcyclic,
                    evidence_witness(ev, path, &empty),
                )
            })
        })
        .ok()
    };
    match result {
        Some(res) => Decision {
            verdict: res.verdict,
            witness: res.witness,
            from_ledger: false,
        },
        None => Decision {
            verdict: Verdict::Undetermined,
            witness: None,
            from_ledger: false,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_counts() {
        let en = enumerate_weight2_rank4();
        assert_eq!(en.raw_count, 15625);
        assert_eq!(en.connected.len(), 15104);
        assert_eq!(en.classes.len(), 667);
    }

    #[test]
    fn odometer_order() {
        let all = all_weight2_rank4();
        assert_eq!(all[0].upper(), vec![-2; 6]);
        assert_eq!(all[1].upper(), vec![-2, -2, -2, -2, -2, -1]);
        assert_eq!(all[15624].upper(), vec![2; 6]);
    }

    #[test]
    fn zero_depth_rejected() {
        let cfg = ProofConfig {
            max_nma_seed_depth: 0,
            ..ProofConfig::default()
        };
        assert!(prove_rank4_weight2(&cfg).is_err());
    }

    #[test]
    fn witness_descriptions() {
        assert!(Witness::ExchangeGraph { classes: 1 }
            .describe()
            .starts_with("exchange-graph witness"));
        assert_eq!(Witness::Acyclic { path: vec![] }.describe(), "acyclic");
    }
}
