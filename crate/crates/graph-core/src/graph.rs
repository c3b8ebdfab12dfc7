/// Global node id in the full graph, or local ordinal inside an ego-net
/// (where the ego is always 0).
pub type NodeId = u32;

/// A directed edge with a type id and one numeric attribute. For the
/// friendship type the attribute is the age in days (`-1` means no
/// friendship); for the other types it is an activity intensity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TypedEdge {
    pub src: NodeId,
    pub dst: NodeId,
    pub etype: u16,
    pub attr: f64,
}

/// The full social graph: a typed edge list plus a lazily built
/// adjacency index. Immutable once the index is built; safe to share
/// read-only across workers.
#[derive(Debug, Clone)]
pub struct Graph {
    pub num_nodes: usize,
    pub num_types: usize,
    pub edges: Vec<TypedEdge>,
    adjacency: Option<Adjacency>,
}

#[derive(Debug, Clone)]
struct Adjacency {
    /// Outgoing edges per node, sorted by (dst, etype).
    out: Vec<Vec<(NodeId, u16, f64)>>,
    /// Undirected unique neighbor ids per node (any type, any direction),
    /// sorted.
    neighbors: Vec<Vec<NodeId>>,
}

impl Graph {
    pub fn new(edges: Vec<TypedEdge>) -> Graph {
        let num_nodes = edges
            .iter()
            .map(|e| e.src.max(e.dst) as usize + 1)
            .max()
            .unwrap_or(0);
        let num_types = edges
            .iter()
            .map(|e| e.etype as usize + 1)
            .max()
            .unwrap_or(1);
        Graph {
            num_nodes,
            num_types,
            edges,
            adjacency: None,
        }
    }

    /// Builds the adjacency index. Idempotent.
    pub fn build_adjacency(&mut self) {
        if self.adjacency.is_some() {
            return;
        }
        let mut out = vec![Vec::new(); self.num_nodes];
        let mut neighbors = vec![Vec::new(); self.num_nodes];
        for e in &self.edges {
            out[e.src as usize].push((e.dst, e.etype, e.attr));
            neighbors[e.src as usize].push(e.dst);
            neighbors[e.dst as usize].push(e.src);
        }
        for list in &mut out {
            list.sort_by_key(|&(dst, etype, _)| (dst, etype));
        }
        for list in &mut neighbors {
            list.sort_unstable();
            list.dedup();
        }
        self.adjacency = Some(Adjacency { out, neighbors });
    }

    fn adj(&self) -> &Adjacency {
        self.adjacency
            .as_ref()
            .expect("adjacency not built; call build_adjacency first")
    }

    /// Outgoing `(dst, etype, attr)` triples of `u`, sorted by (dst, etype).
    pub fn out_edges(&self, u: NodeId) -> &[(NodeId, u16, f64)] {
        &self.adj().out[u as usize]
    }

    /// Undirected unique neighbors of `u` over all types and directions.
    pub fn neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.adj().neighbors[u as usize]
    }

    /// True if any edge of any type connects `u` and `v` in either direction.
    pub fn has_connection(&self, u: NodeId, v: NodeId) -> bool {
        self.adj().neighbors[u as usize].binary_search(&v).is_ok()
    }

    /// Undirected degree: number of distinct neighbors.
    pub fn degree(&self, u: NodeId) -> usize {
        self.adj().neighbors[u as usize].len()
    }

    pub fn has_adjacency(&self) -> bool {
        self.adjacency.is_some()
    }
}
