//! Undirected simple graphs over agents `0..n`.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type NodeId = u32;

/// Immutable undirected simple graph in compressed adjacency form.
///
/// Neighbor lists are sorted. Every undirected edge `{i, j}` has an id in
/// `0..edge_count()`, shared by both directed slots `i -> j` and `j -> i`,
/// which is used to attach per-edge attributes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Network {
    offsets: Vec<usize>,
    targets: Vec<NodeId>,
    edge_ids: Vec<u32>,
    n_edges: usize,
}

impl Network {
    /// Builds from per-node neighbor lists, which must already be symmetric
    /// and free of loops and duplicates.
    pub fn from_adjacency(mut adj: Vec<Vec<NodeId>>) -> Result<Self> {
        let n = adj.len();
        for (i, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidParameter(format!("duplicate edge at node {i}")));
            }
            if list.binary_search(&(i as NodeId)).is_ok() {
                return Err(Error::InvalidParameter(format!("self-loop at node {i}")));
            }
            if list.last().is_some_and(|&j| j as usize >= n) {
                return Err(Error::InvalidParameter(format!(
                    "node {i} has a neighbor outside 0..{n}"
                )));
            }
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for list in &adj {
            offsets.push(offsets.last().unwrap() + list.len());
        }
        let targets: Vec<NodeId> = adj.concat();
        if !targets.len().is_multiple_of(2) {
            return Err(Error::InvalidParameter("adjacency is not symmetric".into()));
        }
        let mut edge_ids = vec![u32::MAX; targets.len()];
        let mut next = 0u32;
        for i in 0..n {
            for slot in offsets[i]..offsets[i + 1] {
                let j = targets[slot] as usize;
                if j < i {
                    continue;
                }
                let back = targets[offsets[j]..offsets[j + 1]]
                    .binary_search(&(i as NodeId))
                    .map_err(|_| {
                        Error::InvalidParameter(format!("edge {i}-{j} missing its reverse"))
                    })?;
                edge_ids[slot] = next;
                edge_ids[offsets[j] + back] = next;
                next += 1;
            }
        }
        if edge_ids.contains(&u32::MAX) {
            return Err(Error::InvalidParameter("adjacency is not symmetric".into()));
        }
        Ok(Network {
            offsets,
            targets,
            edge_ids,
            n_edges: next as usize,
        })
    }

    /// Builds from an undirected edge list; duplicate edges and loops are
    /// rejected.
    pub fn from_edges(n: usize, edges: &[(NodeId, NodeId)]) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a as usize >= n || b as usize >= n {
                return Err(Error::InvalidParameter(format!(
                    "edge {a}-{b} outside 0..{n}"
                )));
            }
            adj[a as usize].push(b);
            adj[b as usize].push(a);
        }
        Self::from_adjacency(adj)
    }

    pub fn empty(n: usize) -> Self {
        Network {
            offsets: vec![0; n + 1],
            targets: Vec::new(),
            edge_ids: Vec::new(),
            n_edges: 0,
        }
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.n_edges
    }

    #[inline]
    pub fn neighbors(&self, i: NodeId) -> &[NodeId] {
        let i = i as usize;
        &self.targets[self.offsets[i]..self.offsets[i + 1]]
    }

    /// Edge ids aligned with [`Network::neighbors`].
    #[inline]
    pub fn incident_edges(&self, i: NodeId) -> &[u32] {
        let i = i as usize;
        &self.edge_ids[self.offsets[i]..self.offsets[i + 1]]
    }

    #[inline]
    pub fn degree(&self, i: NodeId) -> usize {
        let i = i as usize;
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn degrees(&self) -> Vec<u32> {
        (0..self.node_count() as NodeId)
            .map(|i| self.degree(i) as u32)
            .collect()
    }

    pub fn has_edge(&self, i: NodeId, j: NodeId) -> bool {
        self.neighbors(i).binary_search(&j).is_ok()
    }

    /// Edges `(i, j)` with `i < j`, ordered lexicographically.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        (0..self.node_count() as NodeId).flat_map(move |i| {
            self.neighbors(i)
                .iter()
                .copied()
                .filter(move |&j| j > i)
                .map(move |j| (i, j))
        })
    }

    /// Full scan of the structural invariants: symmetric, loop-free, no
    /// duplicate neighbors, sorted lists.
    pub fn check_invariants(&self) -> Result<()> {
        let n = self.node_count();
        for i in 0..n as NodeId {
            let nb = self.neighbors(i);
            if nb.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidParameter(format!(
                    "node {i}: neighbors unsorted or duplicated"
                )));
            }
            for &j in nb {
                if j == i {
                    return Err(Error::InvalidParameter(format!("self-loop at {i}")));
                }
                if j as usize >= n || !self.has_edge(j, i) {
                    return Err(Error::InvalidParameter(format!("edge {i}-{j} not mirrored")));
                }
            }
        }
        Ok(())
    }

    /// Edge-list text: a `# nodes=<n>` header then one `i j` line per edge
    /// with `i < j`.
    pub fn to_edge_list(&self) -> String {
        let mut s = String::with_capacity(16 + self.n_edges * 10);
        let _ = writeln!(s, "# nodes={}", self.node_count());
        for (i, j) in self.edges() {
            let _ = writeln!(s, "{i} {j}");
        }
        s
    }

    pub fn read_edge_list(reader: impl Read) -> Result<Self> {
        let mut n: Option<usize> = None;
        let mut edges = Vec::new();
        for (lineno, line) in BufReader::new(reader).lines().enumerate() {
            let line = line.map_err(|e| Error::Format(e.to_string()))?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(v) = rest.trim().strip_prefix("nodes=") {
                    n = Some(v.trim().parse().map_err(|_| {
                        Error::Format(format!("line {}: bad node count", lineno + 1))
                    })?);
                }
                continue;
            }
            let mut it = line.split_whitespace();
            let bad = || Error::Format(format!("line {}: expected `i j`", lineno + 1));
            let a: NodeId = it.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
            let b: NodeId = it.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
            if it.next().is_some() {
                return Err(bad());
            }
            if a >= b {
                return Err(Error::Format(format!(
                    "line {}: edge endpoints must satisfy i < j",
                    lineno + 1
                )));
            }
            edges.push((a, b));
        }
        let n = n.ok_or_else(|| Error::Format("missing `# nodes=<n>` header".into()))?;
        Network::from_edges(n, &edges)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Network {
        Network::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    #[test]
    fn basic_queries() {
        let g = triangle();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.neighbors(1), &[0, 2]);
        assert!(g.has_edge(2, 0));
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1), (0, 2), (1, 2)]);
        g.check_invariants().unwrap();
    }

    #[test]
    fn edge_ids_are_shared_by_both_directions() {
        let g = Network::from_edges(4, &[(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        for i in 0..4 {
            for (k, &j) in g.neighbors(i).iter().enumerate() {
                let id = g.incident_edges(i)[k];
                let back = g.neighbors(j).iter().position(|&x| x == i).unwrap();
                assert_eq!(g.incident_edges(j)[back], id);
            }
        }
        let mut ids: Vec<u32> = (0..4).flat_map(|i| g.incident_edges(i).to_vec()).collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids, vec![0, 1, 2, 3]);
    }

    #[test]
    fn rejects_bad_graphs() {
        assert!(Network::from_edges(3, &[(0, 0)]).is_err());
        assert!(Network::from_edges(3, &[(0, 1), (1, 0)]).is_err());
        assert!(Network::from_edges(2, &[(0, 5)]).is_err());
        assert!(Network::from_adjacency(vec![vec![1], vec![]]).is_err());
    }

    #[test]
    fn edge_list_text() {
        let g = triangle();
        let text = g.to_edge_list();
        assert_eq!(text, "# nodes=3\n0 1\n0 2\n1 2\n");
        assert_eq!(Network::read_edge_list(text.as_bytes()).unwrap(), g);
        assert!(Network::read_edge_list("0 1\n".as_bytes()).is_err());
        assert!(Network::read_edge_list("# nodes=3\n1 0\n".as_bytes()).is_err());
    }

    #[test]
    fn isolated_nodes_survive_round_trip() {
        let g = Network::from_edges(5, &[(1, 3)]).unwrap();
        let back = Network::read_edge_list(g.to_edge_list().as_bytes()).unwrap();
        assert_eq!(back.node_count(), 5);
        assert_eq!(back, g);
    }
}
