//! Out-ego aggregation as an external sort: local scores spill to
//! sorted runs on disk, then a merge folds each pair's scores in a
//! canonical order, so the result is independent of stream order and
//! partitioning (bit for bit, even for floating-point sums).

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::io::{BufReader, BufWriter, Read, Seek, SeekFrom, Write};

use graph_core::NodeId;

use crate::LocalScore;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AggregatorKind {
    Sum,
    Max,
}

impl AggregatorKind {
    fn fold(self, acc: f64, x: f64) -> f64 {
        match self {
            AggregatorKind::Sum => acc + x,
            AggregatorKind::Max => acc.max(x),
        }
    }
}

/// Default spill threshold: roughly 16 MB of records per run.
const DEFAULT_RUN_CAPACITY: usize = 1 << 20;

/// Exact fold of local scores into a global (u, v) -> score map,
/// returned sorted by pair. See `aggregate_with_run_capacity`.
pub fn aggregate(
    locals: impl IntoIterator<Item = LocalScore>,
    kind: AggregatorKind,
) -> std::io::Result<Vec<((NodeId, NodeId), f64)>> {
    aggregate_with_run_capacity(locals, kind, DEFAULT_RUN_CAPACITY)
}

/// Aggregation with an explicit in-memory run size. Records are sorted
/// by (pair, score) within each run; the merge therefore yields every
/// pair's scores contiguously and in a canonical order, making the fold
/// independent of input order even under floating-point addition.
pub fn aggregate_with_run_capacity(
    locals: impl IntoIterator<Item = LocalScore>,
    kind: AggregatorKind,
    run_capacity: usize,
) -> std::io::Result<Vec<((NodeId, NodeId), f64)>> {
    assert!(run_capacity >= 1);
    let mut buffer: Vec<(NodeId, NodeId, f64)> = Vec::new();
    let mut runs: Vec<BufReader<std::fs::File>> = Vec::new();
    for ls in locals {
        buffer.push((ls.u, ls.v, ls.score));
        if buffer.len() >= run_capacity {
            runs.push(spill_run(&mut buffer)?);
        }
    }
    sort_records(&mut buffer);
    if runs.is_empty() {
        return Ok(fold_sorted(buffer.into_iter(), kind));
    }
    if !buffer.is_empty() {
        runs.push(spill_run(&mut buffer)?);
    }
    Ok(fold_sorted(MergeRuns::new(runs)?, kind))
}

fn sort_records(records: &mut [(NodeId, NodeId, f64)]) {
    records.sort_unstable_by(|a, b| {
        a.0.cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.total_cmp(&b.2))
    });
}

/// Writes the sorted buffer as 16-byte little-endian records to an
/// unlinked temp file and rewinds it for reading.
fn spill_run(buffer: &mut Vec<(NodeId, NodeId, f64)>) -> std::io::Result<BufReader<std::fs::File>> {
    sort_records(buffer);
    let mut w = BufWriter::new(tempfile::tempfile()?);
    for &(u, v, s) in buffer.iter() {
        w.write_all(&u.to_le_bytes())?;
        w.write_all(&v.to_le_bytes())?;
        w.write_all(&s.to_le_bytes())?;
    }
    buffer.clear();
    let mut f = w.into_inner().map_err(|e| e.into_error())?;
    f.seek(SeekFrom::Start(0))?;
    Ok(BufReader::new(f))
}

fn read_record(r: &mut BufReader<std::fs::File>) -> std::io::Result<Option<(NodeId, NodeId, f64)>> {
    let mut buf = [0u8; 16];
    match r.read_exact(&mut buf) {
        Ok(()) => Ok(Some((
            NodeId::from_le_bytes(buf[0..4].try_into().unwrap()),
            NodeId::from_le_bytes(buf[4..8].try_into().unwrap()),
            f64::from_le_bytes(buf[8..16].try_into().unwrap()),
        ))),
        Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => Ok(None),
        Err(e) => Err(e),
    }
}

struct HeapEntry {
    record: (NodeId, NodeId, f64),
    run: usize,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    // reversed: BinaryHeap is a max-heap, the merge needs the minimum
    fn cmp(&self, other: &Self) -> Ordering {
        let a = &self.record;
        let b = &other.record;
        b.0.cmp(&a.0)
            .then(b.1.cmp(&a.1))
            .then(b.2.total_cmp(&a.2))
            .then(other.run.cmp(&self.run))
    }
}

/// K-way merge of sorted runs into one globally sorted record stream.
struct MergeRuns {
    runs: Vec<BufReader<std::fs::File>>,
    heap: BinaryHeap<HeapEntry>,
}

impl MergeRuns {
    fn new(mut runs: Vec<BufReader<std::fs::File>>) -> std::io::Result<MergeRuns> {
        let mut heap = BinaryHeap::new();
        for (i, r) in runs.iter_mut().enumerate() {
            if let Some(record) = read_record(r)? {
                heap.push(HeapEntry { record, run: i });
            }
        }
        Ok(MergeRuns { runs, heap })
    }
}

impl Iterator for MergeRuns {
    type Item = (NodeId, NodeId, f64);

    fn next(&mut self) -> Option<Self::Item> {
        let top = self.heap.pop()?;
        // runs are unlinked temp files; a read error here is unrecoverable
        if let Some(record) = read_record(&mut self.runs[top.run]).expect("spill run read") {
            self.heap.push(HeapEntry {
                record,
                run: top.run,
            });
        }
        Some(top.record)
    }
}

/// Folds a (pair, score)-sorted record stream into one value per pair.
fn fold_sorted(
    records: impl Iterator<Item = (NodeId, NodeId, f64)>,
    kind: AggregatorKind,
) -> Vec<((NodeId, NodeId), f64)> {
    let mut out: Vec<((NodeId, NodeId), f64)> = Vec::new();
    for (u, v, s) in records {
        match out.last_mut() {
            Some((pair, acc)) if *pair == (u, v) => *acc = kind.fold(*acc, s),
            _ => out.push(((u, v), s)),
        }
    }
    out
}
