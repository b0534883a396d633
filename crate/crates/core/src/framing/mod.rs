//! Omission detection and structural repair: chunk enumeration, chained
//! checksums, length-prefixed records and tag-stream repair.

mod chunk;
mod tags;

use thiserror::Error;

pub use chunk::{
    chain_crc, crc32, detect_omission, gf32_mul, join_chunks, read_records, split_chunks,
    write_records, ChainTag, Chunk, GF_ONE,
};
pub use tags::{repair_tags, Edit, Repair, RepairOptions, TagStream, Token};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FramingError {
    #[error("chunk size must be positive")]
    ZeroChunkSize,
    #[error("cannot chain an empty chunk list")]
    EmptyChain,
    #[error("chunk index {0} received twice")]
    DuplicateIndex(u32),
    #[error("chunk index {index} outside declared count {declared}")]
    IndexOutOfRange { index: u32, declared: u32 },
    #[error("truncated record at byte {offset}")]
    TruncatedRecord { offset: usize },
    #[error("line {line}: cannot parse tag token {text:?}")]
    BadTagLine { line: usize, text: String },
    #[error("tag {0:?} not in the declared alphabet")]
    UnknownTag(String),
    #[error("no well-formed stream within {max_edits} edits (best found costs {best_cost})")]
    Unrepairable { best_cost: usize, max_edits: usize },
}
