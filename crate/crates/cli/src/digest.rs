use std::hash::Hasher;

use fnv::FnvHasher;
use streett_core::VertexSet;

/// 64-bit FNV-1a hash of a MEC partition, independent of the order of
/// `mecs`. Each MEC is written as its ascending ids separated by spaces,
/// MECs are sorted and joined by `;`.
pub fn partition_digest(mecs: &[VertexSet]) -> u64 {
    let mut sorted: Vec<&VertexSet> = mecs.iter().collect();
    sorted.sort();
    let text = sorted
        .iter()
        .map(|m| m.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" "))
        .collect::<Vec<_>>()
        .join(";");
    let mut h = FnvHasher::default();
    h.write(text.as_bytes());
    h.finish()
}

pub fn hex(digest: u64) -> String {
    format!("{digest:016x}")
}
