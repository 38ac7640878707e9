//! Labeled matrix datasets built from mutation sequences or from the
//! rank-4 decision ledger, with splitting, balancing and CSV storage.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use log::warn;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::canonical::canonical_form;
use crate::error::{QuiverError, Result};
use crate::matrix::{Encoding, ExchangeMatrix};
use crate::proof::{enumerate_weight2_rank4, ProofLedger};
use crate::rank3::Verdict;
use crate::seeds::{self, NamedSeed, SeedCatalog};

/// Rows of encoded rank-4 exchange matrices with small integer labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledDataset {
    encoding: Encoding,
    data: Vec<i128>,
    labels: Vec<u8>,
}

impl LabeledDataset {
    pub fn new(encoding: Encoding) -> Self {
        LabeledDataset {
            encoding,
            data: Vec::new(),
            labels: Vec::new(),
        }
    }

    pub fn encoding(&self) -> Encoding {
        self.encoding
    }

    pub fn dim(&self) -> usize {
        self.encoding.dim()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    /// Row-major feature block, `len() * dim()` entries.
    pub fn data(&self) -> &[i128] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[i128] {
        let d = self.dim();
        &self.data[i * d..(i + 1) * d]
    }

    pub fn push(&mut self, q: &ExchangeMatrix, label: u8) -> Result<()> {
        self.data
            .extend(q.encode(self.encoding)?.into_iter().map(i128::from));
        self.labels.push(label);
        Ok(())
    }

    pub fn push_row(&mut self, row: &[i128], label: u8) -> Result<()> {
        if row.len() != self.dim() {
            return Err(QuiverError::Length {
                expected: self.dim(),
                actual: row.len(),
            });
        }
        self.data.extend_from_slice(row);
        self.labels.push(label);
        Ok(())
    }

    pub fn extend(&mut self, other: &LabeledDataset) -> Result<()> {
        if other.encoding != self.encoding {
            return Err(QuiverError::Config(
                "cannot merge datasets with different encodings".into(),
            ));
        }
        self.data.extend_from_slice(&other.data);
        self.labels.extend_from_slice(&other.labels);
        Ok(())
    }

    /// Matrix of row `i`; fails when an entry does not fit in `i64`.
    pub fn matrix(&self, i: usize) -> Result<ExchangeMatrix> {
        let row = narrow(self.row(i))?;
        ExchangeMatrix::decode(&row, self.encoding)
    }

    /// The same rows in another encoding.
    pub fn reencode(&self, encoding: Encoding) -> Result<LabeledDataset> {
        if encoding == self.encoding {
            return Ok(self.clone());
        }
        let mut out = LabeledDataset::new(encoding);
        for i in 0..self.len() {
            let flat = to_flat(self.row(i), self.encoding);
            out.data.extend(encode_flat(&flat, encoding));
            out.labels.push(self.labels[i]);
        }
        Ok(out)
    }

    /// Row counts per label, indexed by label value.
    pub fn class_counts(&self) -> Vec<usize> {
        let k = self.labels.iter().max().map_or(0, |&m| m as usize + 1);
        let mut counts = vec![0; k];
        for &l in &self.labels {
            counts[l as usize] += 1;
        }
        counts
    }

    /// `largest class size / class size` for every present label.
    pub fn auto_class_weights(&self) -> BTreeMap<u8, f64> {
        let counts = self.class_counts();
        let largest = counts.iter().copied().max().unwrap_or(0) as f64;
        counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(l, &c)| (l as u8, largest / c as f64))
            .collect()
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> LabeledDataset {
        let mut out = LabeledDataset::new(self.encoding);
        out.data.reserve(indices.len() * self.dim());
        for &i in indices {
            out.data.extend_from_slice(self.row(i));
            out.labels.push(self.labels[i]);
        }
        out
    }

    pub fn shuffled(&self, seed: u64) -> LabeledDataset {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        self.subset(&idx)
    }

    /// Features as `f64`, row-major.
    pub fn features_f64(&self) -> Vec<f64> {
        self.data.iter().map(|&v| v as f64).collect()
    }

    /// Writes a header (`e0..e5` or `m00..m33`, then `label`) and one row
    /// per sample.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header = self.encoding.column_names();
        header.push("label".into());
        wr.write_record(&header)?;
        let mut record = Vec::with_capacity(self.dim() + 1);
        for i in 0..self.len() {
            record.clear();
            record.extend(self.row(i).iter().map(i128::to_string));
            record.push(self.labels[i].to_string());
            wr.write_record(&record)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
        let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
        let encoding = [Encoding::Flat16, Encoding::Upper6]
            .into_iter()
            .find(|e| {
                let mut cols = e.column_names();
                cols.push("label".into());
                cols == header
            })
            .ok_or_else(|| QuiverError::Parse {
                line: 1,
                reason: format!("unrecognized header {header:?}"),
            })?;
        let mut ds = LabeledDataset::new(encoding);
        let dim = encoding.dim();
        let mut row = Vec::with_capacity(dim);
        for (i, record) in rd.records().enumerate() {
            let line = i + 2;
            let record = record.map_err(|e| QuiverError::Parse {
                line,
                reason: e.to_string(),
            })?;
            if record.len() != dim + 1 {
                return Err(QuiverError::Parse {
                    line,
                    reason: format!("expected {} fields, got {}", dim + 1, record.len()),
                });
            }
            row.clear();
            for field in record.iter().take(dim) {
                row.push(
                    field
                        .trim()
                        .parse::<i128>()
                        .map_err(|e| QuiverError::Parse {
                            line,
                            reason: format!("bad entry {field:?}: {e}"),
                        })?,
                );
            }
            let label: u8 = record[dim].trim().parse().map_err(|e| QuiverError::Parse {
                line,
                reason: format!("bad label {:?}: {e}", &record[dim]),
            })?;
            if encoding == Encoding::Flat16 {
                check_skew(&row).map_err(|reason| QuiverError::Parse { line, reason })?;
            }
            ds.data.extend_from_slice(&row);
            ds.labels.push(label);
        }
        Ok(ds)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(BufWriter::new(File::create(path)?))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(BufReader::new(File::open(path)?))
    }

    /// SHA-256 of the CSV serialization, hex encoded.
    pub fn content_hash(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(hex::encode(Sha256::digest(&buf)))
    }
}

/// Every non-backtracking vertex sequence of length at most `depth` on
/// `rank` vertices, in lexicographic order (so each prefix precedes its
/// extensions).
pub fn enumerate_sequences(rank: usize, depth: usize) -> Vec<Vec<usize>> {
    fn walk(rank: usize, depth: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        out.push(cur.clone());
        if cur.len() == depth {
            return;
        }
        for k in 0..rank {
            if cur.last() == Some(&k) {
                continue;
            }
            cur.push(k);
            walk(rank, depth, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    walk(rank, depth, &mut Vec::new(), &mut out);
    out
}

/// Rows produced per rank-4 seed at `depth`: `2 * 3^depth - 1`.
pub fn rows_per_seed(depth: usize) -> usize {
    2 * 3usize.pow(depth as u32) - 1
}

/// Quivers reached by every sequence of [`enumerate_sequences`], in the
/// same order, duplicates included.
pub fn sequence_quivers(seed: &ExchangeMatrix, depth: usize) -> Result<Vec<ExchangeMatrix>> {
    fn walk(
        q: &ExchangeMatrix,
        last: Option<usize>,
        left: usize,
        out: &mut Vec<ExchangeMatrix>,
    ) -> Result<()> {
        out.push(q.clone());
        if left == 0 {
            return Ok(());
        }
        for k in 0..q.rank() {
            if last == Some(k) {
                continue;
            }
            walk(&q.mutate(k)?, Some(k), left - 1, out)?;
        }
        Ok(())
    }
    let mut out = Vec::new();
    walk(seed, None, depth, &mut out)?;
    Ok(out)
}

/// Mutation-sequence dataset: every quiver reached from every seed, in
/// seed order, all labeled `label`.
pub fn sequence_dataset(
    seeds: &[ExchangeMatrix],
    depth: usize,
    label: u8,
    encoding: Encoding,
) -> Result<LabeledDataset> {
    for s in seeds {
        if s.rank() != 4 {
            return Err(QuiverError::WrongRank {
                expected: 4,
                actual: s.rank(),
            });
        }
    }
    let blocks: Vec<Vec<i128>> = seeds
        .par_iter()
        .map(|s| -> Result<Vec<i128>> {
            let mut block = Vec::with_capacity(rows_per_seed(depth) * encoding.dim());
            let mut start = [0i128; 16];
            for (dst, &v) in start.iter_mut().zip(s.as_flat()) {
                *dst = v as i128;
            }
            walk_wide(&start, None, depth, &mut |flat| {
                block.extend(encode_flat(flat, encoding))
            })?;
            Ok(block)
        })
        .collect::<Result<_>>()?;
    let mut ds = LabeledDataset::new(encoding);
    for block in blocks {
        let rows = block.len() / encoding.dim();
        ds.data.extend(block);
        ds.labels.extend(std::iter::repeat(label).take(rows));
    }
    Ok(ds)
}

type Wide = [i128; 16];

/// Rank-4 mutation in `i128`, which keeps rows from deep sequences exact.
fn mutate_wide(b: &Wide, k: usize) -> Result<Wide> {
    let mut out = *b;
    for i in 0..4 {
        for j in 0..4 {
            out[i * 4 + j] = if i == k || j == k {
                -b[i * 4 + j]
            } else {
                let (bik, bkj) = (b[i * 4 + k], b[k * 4 + j]);
                let prod = bik
                    .checked_mul(bkj)
                    .ok_or(QuiverError::Overflow { vertex: k })?;
                b[i * 4 + j]
                    .checked_add(bik.signum() * prod.max(0))
                    .ok_or(QuiverError::Overflow { vertex: k })?
            };
        }
    }
    Ok(out)
}

fn walk_wide(
    b: &Wide,
    last: Option<usize>,
    left: usize,
    emit: &mut impl FnMut(&Wide),
) -> Result<()> {
    emit(b);
    if left == 0 {
        return Ok(());
    }
    for k in 0..4 {
        if last != Some(k) {
            walk_wide(&mutate_wide(b, k)?, Some(k), left - 1, emit)?;
        }
    }
    Ok(())
}

const UPPER: [usize; 6] = [1, 2, 3, 6, 7, 11];

fn encode_flat(flat: &Wide, encoding: Encoding) -> Vec<i128> {
    match encoding {
        Encoding::Flat16 => flat.to_vec(),
        Encoding::Upper6 => UPPER.iter().map(|&i| flat[i]).collect(),
    }
}

fn to_flat(row: &[i128], encoding: Encoding) -> Wide {
    match encoding {
        Encoding::Flat16 => row.try_into().expect("16 entries"),
        Encoding::Upper6 => {
            let mut flat = [0i128; 16];
            for (&v, &i) in row.iter().zip(&UPPER) {
                flat[i] = v;
                flat[(i % 4) * 4 + i / 4] = -v;
            }
            flat
        }
    }
}

fn check_skew(row: &[i128]) -> std::result::Result<(), String> {
    for i in 0..4 {
        for j in 0..4 {
            if row[i * 4 + j] != -row[j * 4 + i] {
                return Err(format!("not skew-symmetric at ({i}, {j})"));
            }
        }
    }
    Ok(())
}

fn narrow(row: &[i128]) -> Result<Vec<i64>> {
    row.iter()
        .map(|&v| {
            i64::try_from(v)
                .map_err(|_| QuiverError::Config(format!("entry {v} does not fit in i64")))
        })
        .collect()
}

/// NmaOrigin of one block of rows.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedEntry {
    pub name: String,
    pub label: u8,
    pub depth: usize,
    pub rows: usize,
}

/// Description written next to a dataset file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub dataset: String,
    pub encoding: Encoding,
    pub class_names: Vec<String>,
    pub class_counts: Vec<usize>,
    pub rows: usize,
    pub seeds: Vec<SeedEntry>,
    pub sha256: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl DatasetManifest {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(f, self)?;
        Ok(())
    }
}

/// A dataset plus its manifest.
#[derive(Clone, Debug)]
pub struct BuiltDataset {
    pub dataset: LabeledDataset,
    pub manifest: DatasetManifest,
}

impl BuiltDataset {
    fn finish(
        name: &str,
        dataset: LabeledDataset,
        class_names: &[&str],
        seeds: Vec<SeedEntry>,
        warnings: Vec<String>,
    ) -> Result<Self> {
        let mut class_counts = dataset.class_counts();
        class_counts.resize(class_names.len().max(class_counts.len()), 0);
        let manifest = DatasetManifest {
            dataset: name.into(),
            encoding: dataset.encoding(),
            class_names: class_names.iter().map(|s| s.to_string()).collect(),
            class_counts,
            rows: dataset.len(),
            seeds,
            sha256: dataset.content_hash()?,
            warnings,
        };
        Ok(BuiltDataset { dataset, manifest })
    }
}

fn labeled_blocks(
    groups: &[(Vec<NamedSeed>, u8, usize)],
    encoding: Encoding,
) -> Result<(LabeledDataset, Vec<SeedEntry>)> {
    let mut ds = LabeledDataset::new(encoding);
    let mut entries = Vec::new();
    for (seeds, label, depth) in groups {
        let mats: Vec<ExchangeMatrix> = seeds.iter().map(|s| s.matrix.clone()).collect();
        ds.extend(&sequence_dataset(&mats, *depth, *label, encoding)?)?;
        entries.extend(seeds.iter().map(|s| SeedEntry {
            name: s.name.to_string(),
            label: *label,
            depth: *depth,
            rows: rows_per_seed(*depth),
        }));
    }
    Ok((ds, entries))
}

pub const DATASET1_CLASSES: [&str; 4] = ["A4-like", "D4-like", "NMA1", "NMA2"];
pub const BINARY_CLASSES: [&str; 2] = ["MA", "NMA"];

/// Four mutation classes to depth 8, labels 0..=3.
pub fn build_dataset1(encoding: Encoding) -> Result<BuiltDataset> {
    let nma = SeedCatalog::nma();
    let groups = [
        (SeedCatalog::a4(), 0, 8),
        (SeedCatalog::d4(), 1, 8),
        (vec![nma[0].clone()], 2, 8),
        (vec![nma[1].clone()], 3, 8),
    ];
    let (ds, seeds) = labeled_blocks(&groups, encoding)?;
    BuiltDataset::finish("dataset1", ds, &DATASET1_CLASSES, seeds, vec![])
}

/// A4 and D4 seeds (label 0) against NMA1 and NMA2 (label 1), depth 6.
pub fn build_dataset2(encoding: Encoding) -> Result<BuiltDataset> {
    let mut ma = SeedCatalog::a4();
    ma.extend(SeedCatalog::d4());
    let groups = [(ma, 0, 6), (SeedCatalog::nma(), 1, 6)];
    let (ds, seeds) = labeled_blocks(&groups, encoding)?;
    BuiltDataset::finish("dataset2", ds, &BINARY_CLASSES, seeds, vec![])
}

/// A seed given by its upper triangle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedSpec {
    pub name: String,
    pub upper: [i64; 6],
}

impl SeedSpec {
    fn from_matrix(name: String, q: &ExchangeMatrix) -> Self {
        let u = q.upper();
        SeedSpec {
            name,
            upper: [u[0], u[1], u[2], u[3], u[4], u[5]],
        }
    }

    pub fn matrix(&self) -> Result<ExchangeMatrix> {
        ExchangeMatrix::from_upper(4, &self.upper)
    }
}

/// Seed lists and depths for the large binary dataset.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dataset3Seeds {
    pub ma: Vec<SeedSpec>,
    pub nma: Vec<SeedSpec>,
    #[serde(default = "default_ma_depth")]
    pub ma_depth: usize,
    #[serde(default = "default_nma_depth")]
    pub nma_depth: usize,
}

fn default_ma_depth() -> usize {
    7
}

fn default_nma_depth() -> usize {
    5
}

/// Deduplicated seed-list sizes that reproduce the reference row counts.
pub const DATASET3_TARGET_SEEDS: (usize, usize) = (54, 381);

/// Reference row counts for the large binary dataset.
pub const DATASET3_TARGET_ROWS: (usize, usize) = (236_142, 184_785);

fn dedup_seeds(
    candidates: impl IntoIterator<Item = (String, ExchangeMatrix)>,
    connected_only: bool,
) -> Vec<SeedSpec> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (name, q) in candidates {
        if connected_only && !q.is_weakly_connected() {
            continue;
        }
        if seen.insert(canonical_form(&q).expect("rank 4")) {
            out.push(SeedSpec::from_matrix(name, &q));
        }
    }
    out
}

impl Dataset3Seeds {
    /// The shipped construction: A4 path, A4 type-3 and D4 star shapes with
    /// every edge weight in 1..=4 (MA); the two box quivers and the spoked
    /// 2- and 3-cycles with spoke weights in 0..=4, connected (NMA). Both
    /// lists are deduplicated up to isomorphism.
    pub fn default_construction() -> Self {
        let shapes: [(&str, [(usize, usize); 3]); 3] = [
            ("A4path", [(0, 1), (1, 2), (2, 3)]),
            ("A4mixed", [(0, 1), (2, 1), (2, 3)]),
            ("D4star", [(0, 1), (0, 2), (0, 3)]),
        ];
        let mut ma = Vec::new();
        for (name, edges) in shapes {
            for w in weight_triples(1..=4) {
                let arrows: Vec<_> = edges.iter().zip(w).map(|(&(s, t), w)| (s, t, w)).collect();
                let q = ExchangeMatrix::from_arrows(4, &arrows).expect("valid");
                ma.push((format!("{name}-{}{}{}", w[0], w[1], w[2]), q));
            }
        }
        let mut nma = vec![
            ("Box1".to_string(), seeds::box1()),
            ("Box2".to_string(), seeds::box2()),
        ];
        let patterns = [
            ("M1", seeds::M1_SPOKES),
            ("M2", seeds::M2_SPOKES),
            ("M3", seeds::M3_SPOKES),
        ];
        for (cycle, prefix) in [(2, ""), (3, "N")] {
            for (pname, pattern) in patterns {
                for w in weight_triples(0..=4) {
                    let q = seeds::spoked_cycle_weighted(cycle, pattern, w);
                    nma.push((format!("{prefix}{pname}-{}{}{}", w[0], w[1], w[2]), q));
                }
            }
        }
        Dataset3Seeds {
            ma: dedup_seeds(ma, false),
            nma: dedup_seeds(nma, true),
            ma_depth: default_ma_depth(),
            nma_depth: default_nma_depth(),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        serde_json::to_writer_pretty(BufWriter::new(File::create(path)?), self)?;
        Ok(())
    }
}

fn weight_triples(range: std::ops::RangeInclusive<i64>) -> Vec<[i64; 3]> {
    let r: Vec<i64> = range.collect();
    let mut out = Vec::new();
    for &a in &r {
        for &b in &r {
            for &c in &r {
                out.push([a, b, c]);
            }
        }
    }
    out
}

/// MA seeds to `ma_depth` (label 0) against NMA seeds to `nma_depth`
/// (label 1). Seed lists whose sizes differ from
/// [`DATASET3_TARGET_SEEDS`] build anyway, with a warning in the manifest.
pub fn build_dataset3(seeds: &Dataset3Seeds, encoding: Encoding) -> Result<BuiltDataset> {
    let to_named = |list: &[SeedSpec]| -> Result<Vec<(String, ExchangeMatrix)>> {
        list.iter()
            .map(|s| Ok((s.name.clone(), s.matrix()?)))
            .collect()
    };
    let ma = to_named(&seeds.ma)?;
    let nma = to_named(&seeds.nma)?;
    let mut ds = LabeledDataset::new(encoding);
    let mut entries = Vec::new();
    for (list, label, depth) in [(&ma, 0u8, seeds.ma_depth), (&nma, 1u8, seeds.nma_depth)] {
        let mats: Vec<ExchangeMatrix> = list.iter().map(|(_, q)| q.clone()).collect();
        ds.extend(&sequence_dataset(&mats, depth, label, encoding)?)?;
        entries.extend(list.iter().map(|(name, _)| SeedEntry {
            name: name.clone(),
            label,
            depth,
            rows: rows_per_seed(depth),
        }));
    }
    let mut warnings = Vec::new();
    if (ma.len(), nma.len()) != DATASET3_TARGET_SEEDS {
        let counts = ds.class_counts();
        let msg = format!(
            "seed lists have sizes ({}, {}), not {:?}; row counts {:?} differ from {:?}",
            ma.len(),
            nma.len(),
            DATASET3_TARGET_SEEDS,
            counts,
            DATASET3_TARGET_ROWS
        );
        warn!("{msg}");
        warnings.push(msg);
    }
    BuiltDataset::finish("dataset3", ds, &BINARY_CLASSES, entries, warnings)
}

/// How [`build_dataset4`] treats classes the ledger left undetermined.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UndeterminedPolicy {
    /// Refuse to build.
    #[default]
    Reject,
    /// Label them NMA ("not shown MA within the search depth").
    AsNma,
}

/// All connected weight-2 rank-4 matrices labeled by their class verdict:
/// 0 for MA, 1 for NMA.
pub fn build_dataset4(
    ledger: &ProofLedger,
    policy: UndeterminedPolicy,
    encoding: Encoding,
) -> Result<BuiltDataset> {
    let open = ledger.undetermined().len();
    let mut warnings = Vec::new();
    if open > 0 {
        match policy {
            UndeterminedPolicy::Reject => ledger.ensure_complete()?,
            UndeterminedPolicy::AsNma => {
                let msg = format!("{open} undetermined class(es) labeled NMA");
                warn!("{msg}");
                warnings.push(msg);
            }
        }
    }
    let en = enumerate_weight2_rank4();
    let mut ds = LabeledDataset::new(encoding);
    for q in &en.connected {
        let key = canonical_form(q)?;
        let verdict = ledger
            .verdict(&key)
            .ok_or_else(|| QuiverError::Config(format!("class {key} missing from ledger")))?;
        let label = match verdict {
            Verdict::MutationAcyclic => 0,
            _ => 1,
        };
        ds.push(q, label)?;
    }
    BuiltDataset::finish("dataset4", ds, &BINARY_CLASSES, vec![], warnings)
}

/// Downsamples every class uniformly without replacement to the size of
/// the smallest class. Kept rows stay in their original order.
pub fn balance_classes(ds: &LabeledDataset, seed: u64) -> Result<LabeledDataset> {
    let counts = ds.class_counts();
    let present: Vec<usize> = (0..counts.len()).filter(|&l| counts[l] > 0).collect();
    if present.len() < 2 {
        return Err(QuiverError::Config(
            "balancing needs at least two classes".into(),
        ));
    }
    let target = present.iter().map(|&l| counts[l]).min().unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep = Vec::with_capacity(target * present.len());
    for &l in &present {
        let idx: Vec<usize> = (0..ds.len())
            .filter(|&i| ds.labels[i] as usize == l)
            .collect();
        keep.extend(idx.choose_multiple(&mut rng, target).copied());
    }
    keep.sort_unstable();
    Ok(ds.subset(&keep))
}

/// Train / validation / test proportions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub test_fraction: f64,
    /// Fraction of the non-test rows held out for validation.
    pub validation_fraction: f64,
    pub seed: u64,
    /// Apply the fractions per class (totals are still exact).
    pub stratified: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            test_fraction: 0.10,
            validation_fraction: 0.30,
            seed: 0,
            stratified: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Split {
    pub train: LabeledDataset,
    pub validation: LabeledDataset,
    pub test: LabeledDataset,
}

/// Splits `total` across groups of sizes `sizes` proportionally, by largest
/// remainder, so the parts sum to `total`.
fn apportion(sizes: &[usize], total: usize) -> Vec<usize> {
    let n: usize = sizes.iter().sum();
    if n == 0 {
        return vec![0; sizes.len()];
    }
    let exact: Vec<f64> = sizes
        .iter()
        .map(|&s| s as f64 * total as f64 / n as f64)
        .collect();
    let mut parts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by(|&a, &b| {
        (exact[b] - exact[b].floor())
            .total_cmp(&(exact[a] - exact[a].floor()))
            .then(a.cmp(&b))
    });
    let mut left = total - parts.iter().sum::<usize>();
    for &g in order.iter().cycle() {
        if left == 0 {
            break;
        }
        if parts[g] < sizes[g] {
            parts[g] += 1;
            left -= 1;
        }
    }
    parts
}

/// Deterministic partition into `(train, validation, test)` with
/// `test = round(f_test * N)` and `validation = round(f_val * (N - test))`.
/// A zero validation fraction gives an empty validation set.
pub fn split(ds: &LabeledDataset, spec: &SplitSpec) -> Result<Split> {
    if !(spec.test_fraction > 0.0 && spec.test_fraction < 1.0) {
        return Err(QuiverError::Config(format!(
            "test fraction {} must lie in (0, 1)",
            spec.test_fraction
        )));
    }
    if !(0.0..1.0).contains(&spec.validation_fraction) {
        return Err(QuiverError::Config(format!(
            "validation fraction {} must lie in [0, 1)",
            spec.validation_fraction
        )));
    }
    let n = ds.len();
    let n_test = (spec.test_fraction * n as f64).round() as usize;
    let n_val = (spec.validation_fraction * (n - n_test) as f64).round() as usize;
    let val_ok = n_val > 0 || spec.validation_fraction == 0.0;
    if n_test == 0 || !val_ok || n_test + n_val >= n {
        return Err(QuiverError::Config(format!(
            "{n} rows are too few for the requested split"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng);
    let (mut train, mut val, mut test) = (Vec::new(), Vec::new(), Vec::new());
    if spec.stratified {
        let counts = ds.class_counts();
        let test_parts = apportion(&counts, n_test);
        let rest: Vec<usize> = counts.iter().zip(&test_parts).map(|(c, t)| c - t).collect();
        let val_parts = apportion(&rest, n_val);
        let mut taken_test = vec![0; counts.len()];
        let mut taken_val = vec![0; counts.len()];
        for i in idx {
            let l = ds.labels[i] as usize;
            if taken_test[l] < test_parts[l] {
                taken_test[l] += 1;
                test.push(i);
            } else if taken_val[l] < val_parts[l] {
                taken_val[l] += 1;
                val.push(i);
            } else {
                train.push(i);
            }
        }
    } else {
        test.extend_from_slice(&idx[..n_test]);
        val.extend_from_slice(&idx[n_test..n_test + n_val]);
        train.extend_from_slice(&idx[n_test + n_val..]);
    }
    Ok(Split {
        train: ds.subset(&train),
        validation: ds.subset(&val),
        test: ds.subset(&test),
    })
}
