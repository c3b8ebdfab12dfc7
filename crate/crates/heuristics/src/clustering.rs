use graph_core::{EgoNet, NodeId};

/// Per-node cluster ids over the non-ego nodes; `labels[0]` is unused.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterAssignment {
    pub labels: Vec<NodeId>,
}

/// Synchronous label propagation on the undirected intra-ego-net
/// topology. Each node starts with its own id; every round it adopts the
/// most frequent neighbor label, ties broken by smallest label. Fully
/// deterministic; `seed` is accepted for interface stability but the
/// update rule has no random choices.
pub fn label_propagation_clusters(e: &EgoNet, max_iters: usize, _seed: u64) -> ClusterAssignment {
    let n = e.n;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for edge in &e.edges {
        adj[edge.src as usize].push(edge.dst as usize);
        adj[edge.dst as usize].push(edge.src as usize);
    }
    for list in adj.iter_mut() {
        list.sort_unstable();
        list.dedup();
    }

    let mut labels: Vec<NodeId> = (0..n as NodeId).collect();
    let mut next = labels.clone();
    for _ in 0..max_iters.max(1) {
        let mut changed = false;
        for u in 1..n {
            if adj[u].is_empty() {
                next[u] = labels[u];
                continue;
            }
            let mut counts: std::collections::BTreeMap<NodeId, usize> =
                std::collections::BTreeMap::new();
            for &v in &adj[u] {
                *counts.entry(labels[v]).or_insert(0) += 1;
            }
            // most frequent, smallest label wins ties (BTreeMap order)
            let (&best, _) = counts
                .iter()
                .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
                .unwrap();
            if best != labels[u] {
                changed = true;
            }
            next[u] = best;
        }
        std::mem::swap(&mut labels, &mut next);
        if !changed {
            break;
        }
    }
    ClusterAssignment { labels }
}
