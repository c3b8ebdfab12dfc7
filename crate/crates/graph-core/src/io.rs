use std::collections::HashSet;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::egonet::EgoNet;
use crate::error::GraphError;
use crate::graph::{Graph, TypedEdge};

/// Loads a whitespace-separated edge list (`src dst etype attr` per line,
/// `#` comments). Rejects self-loops and duplicate (src, dst, etype) lines.
pub fn load_graph(path: &Path) -> Result<Graph, GraphError> {
    let file = std::fs::File::open(path)?;
    parse_graph(BufReader::new(file))
}

pub fn parse_graph<R: Read>(reader: R) -> Result<Graph, GraphError> {
    let reader = BufReader::new(reader);
    let mut edges = Vec::new();
    let mut seen: HashSet<(u32, u32, u16)> = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(GraphError::Parse {
                line: lineno,
                msg: format!("expected 4 fields, got {}", fields.len()),
            });
        }
        let parse_err = |what: &str| GraphError::Parse {
            line: lineno,
            msg: format!("invalid {what}: {:?}", fields),
        };
        let src: u32 = fields[0].parse().map_err(|_| parse_err("src"))?;
        let dst: u32 = fields[1].parse().map_err(|_| parse_err("dst"))?;
        let etype: u16 = fields[2].parse().map_err(|_| parse_err("etype"))?;
        let attr: f64 = fields[3].parse().map_err(|_| parse_err("attr"))?;
        if src == dst {
            return Err(GraphError::SelfLoop {
                line: lineno,
                node: src,
            });
        }
        if !seen.insert((src, dst, etype)) {
            return Err(GraphError::DuplicateEdge {
                line: lineno,
                src,
                dst,
                etype,
            });
        }
        edges.push(TypedEdge {
            src,
            dst,
            etype,
            attr,
        });
    }
    Ok(Graph::new(edges))
}

/// Writes the edge list back out; `load_graph` of the result reproduces
/// the graph exactly (floats rendered shortest-round-trip).
pub fn write_graph<W: Write>(g: &Graph, writer: W) -> std::io::Result<()> {
    let mut w = BufWriter::new(writer);
    for e in &g.edges {
        writeln!(w, "{} {} {} {}", e.src, e.dst, e.etype, e.attr)?;
    }
    w.flush()
}

/// Serializes one ego-net as a line-oriented block:
/// `E <ego> <n>`, then `N`, `A` and optional `G` lines.
pub fn write_egonet<W: Write>(e: &EgoNet, w: &mut W) -> std::io::Result<()> {
    writeln!(w, "E {} {}", e.ego_global_id, e.n)?;
    for local in 0..e.n {
        write!(w, "N {} {}", local, e.local_to_global[local])?;
        for f in e.features(local as u32) {
            write!(w, " {}", f)?;
        }
        writeln!(w)?;
    }
    for edge in &e.edges {
        writeln!(w, "A {} {} {} {}", edge.src, edge.dst, edge.etype, edge.attr)?;
    }
    for &(u, v) in &e.ground_truth {
        writeln!(w, "G {} {}", u, v)?;
    }
    Ok(())
}

pub fn write_egonets<'a, W: Write, I: IntoIterator<Item = &'a EgoNet>>(
    egonets: I,
    writer: W,
) -> std::io::Result<()> {
    let mut w = BufWriter::new(writer);
    for e in egonets {
        write_egonet(e, &mut w)?;
    }
    w.flush()
}

/// Reads a concatenation of ego-net blocks.
pub fn read_egonets<R: Read>(reader: R) -> Result<Vec<EgoNet>, GraphError> {
    let reader = BufReader::new(reader);
    let mut out = Vec::new();
    let mut cur: Option<Block> = None;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        let err = |msg: String| GraphError::Parse { line: lineno, msg };
        match fields[0] {
            "E" => {
                if let Some(block) = cur.take() {
                    out.push(block.finish()?);
                }
                if fields.len() != 3 {
                    return Err(err("E line needs ego id and node count".into()));
                }
                let ego = fields[1]
                    .parse()
                    .map_err(|_| err("bad ego id".to_string()))?;
                let n: usize = fields[2]
                    .parse()
                    .map_err(|_| err("bad node count".to_string()))?;
                cur = Some(Block::new(ego, n));
            }
            "N" => {
                let block = cur.as_mut().ok_or_else(|| err("N before E".into()))?;
                if fields.len() < 3 {
                    return Err(err("N line too short".into()));
                }
                let local: usize = fields[1].parse().map_err(|_| err("bad local id".into()))?;
                let global = fields[2].parse().map_err(|_| err("bad global id".into()))?;
                if local != block.local_to_global.len() {
                    return Err(err(format!(
                        "N lines out of order: got {}, expected {}",
                        local,
                        block.local_to_global.len()
                    )));
                }
                block.local_to_global.push(global);
                for f in &fields[3..] {
                    block
                        .features
                        .push(f.parse().map_err(|_| err("bad feature value".into()))?);
                }
            }
            "A" => {
                let block = cur.as_mut().ok_or_else(|| err("A before E".into()))?;
                if fields.len() != 5 {
                    return Err(err("A line needs src dst etype attr".into()));
                }
                block.edges.push(TypedEdge {
                    src: fields[1].parse().map_err(|_| err("bad src".into()))?,
                    dst: fields[2].parse().map_err(|_| err("bad dst".into()))?,
                    etype: fields[3].parse().map_err(|_| err("bad etype".into()))?,
                    attr: fields[4].parse().map_err(|_| err("bad attr".into()))?,
                });
            }
            "G" => {
                let block = cur.as_mut().ok_or_else(|| err("G before E".into()))?;
                if fields.len() != 3 {
                    return Err(err("G line needs two node ids".into()));
                }
                block.ground_truth.push((
                    fields[1].parse().map_err(|_| err("bad u".into()))?,
                    fields[2].parse().map_err(|_| err("bad v".into()))?,
                ));
            }
            other => return Err(err(format!("unknown record {other:?}"))),
        }
    }
    if let Some(block) = cur.take() {
        out.push(block.finish()?);
    }
    Ok(out)
}

struct Block {
    ego: u32,
    n: usize,
    local_to_global: Vec<u32>,
    features: Vec<f64>,
    edges: Vec<TypedEdge>,
    ground_truth: Vec<(u32, u32)>,
}

impl Block {
    fn new(ego: u32, n: usize) -> Block {
        Block {
            ego,
            n,
            local_to_global: Vec::with_capacity(n),
            features: Vec::new(),
            edges: Vec::new(),
            ground_truth: Vec::new(),
        }
    }

    fn finish(self) -> Result<EgoNet, GraphError> {
        if self.local_to_global.len() != self.n {
            return Err(GraphError::InvalidEgoNet(format!(
                "ego {}: {} node lines for declared n={}",
                self.ego,
                self.local_to_global.len(),
                self.n
            )));
        }
        if self.features.len() % self.n != 0 {
            return Err(GraphError::InvalidEgoNet(format!(
                "ego {}: ragged feature rows",
                self.ego
            )));
        }
        let width = self.features.len() / self.n;
        if width % 2 != 0 {
            return Err(GraphError::InvalidEgoNet(format!(
                "ego {}: odd feature width {}",
                self.ego, width
            )));
        }
        EgoNet::new(
            self.ego,
            width / 2,
            self.local_to_global,
            self.edges,
            self.features,
            self.ground_truth,
        )
    }
}
