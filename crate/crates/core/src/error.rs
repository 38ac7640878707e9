use thiserror::Error;

pub type Result<T> = std::result::Result<T, QuiverError>;

#[derive(Debug, Error)]
pub enum QuiverError {
    #[error(
        "matrix must be square with at least one vertex, got {rows} row(s) of lengths {cols:?}"
    )]
    Shape { rows: usize, cols: Vec<usize> },
    #[error("matrix is not skew-symmetric at ({i}, {j}): {bij} vs {bji}")]
    NotSkewSymmetric {
        i: usize,
        j: usize,
        bij: i64,
        bji: i64,
    },
    #[error("vertex {vertex} out of range for rank {n}")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("vertex subset must be non-empty and duplicate-free")]
    BadSubset,
    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(usize, usize),
    #[error("operation requires rank {expected}, got {actual}")]
    WrongRank { expected: usize, actual: usize },
    #[error("canonical form limited to rank <= {max}, got {n}")]
    RankTooLarge { n: usize, max: usize },
    #[error("entry overflow while mutating at vertex {vertex}")]
    Overflow { vertex: usize },
    #[error("expected {expected} entries, got {actual}")]
    Length { expected: usize, actual: usize },
    #[error("memory cap of {cap_bytes} bytes exceeded after {nodes} nodes (class {key})")]
    MemoryCap {
        cap_bytes: u64,
        nodes: usize,
        key: String,
    },
    #[error("{count} class(es) left undetermined at depth {depth}")]
    Undetermined { count: usize, depth: usize },
    #[error("witness check failed for class {key}: {reason}")]
    BadWitness { key: String, reason: String },
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
