//! Adjacency lists over an edge subset of a dense instance.

use crate::instance::{EdgeId, EdgeSet, GraphKind, Instance, Vertex};

/// `adj[v]` holds `(neighbor, edge id)` pairs sorted by neighbor.
pub type Adjacency = Vec<Vec<(Vertex, EdgeId)>>;

/// Undirected adjacency for complete instances; left-to-right adjacency for
/// bipartite instances; out-adjacency for digraphs.
pub fn adjacency(inst: &Instance, edges: &EdgeSet) -> Adjacency {
    let mut adj: Adjacency = vec![Vec::new(); inst.n()];
    for e in edges.iter() {
        let (u, v) = inst.endpoints(e);
        adj[u].push((v, e));
        if inst.kind() == GraphKind::Complete {
            adj[v].push((u, e));
        }
    }
    adj.iter_mut().for_each(|a| a.sort_unstable());
    adj
}

/// In-adjacency of a digraph edge subset: `adj[v]` lists `(tail, arc id)`.
pub fn in_adjacency(inst: &Instance, edges: &EdgeSet) -> Adjacency {
    let mut adj: Adjacency = vec![Vec::new(); inst.n()];
    for e in edges.iter() {
        let (u, v) = inst.endpoints(e);
        adj[v].push((u, e));
    }
    adj.iter_mut().for_each(|a| a.sort_unstable());
    adj
}

/// Plain neighbor lists with edge ids dropped.
pub fn neighbors(adj: &Adjacency) -> Vec<Vec<Vertex>> {
    adj.iter().map(|a| a.iter().map(|&(v, _)| v).collect()).collect()
}
