//! Topology statistics for contact networks.

use std::collections::VecDeque;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{Network, NodeId};
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkMetrics {
    pub avg_degree: f64,
    pub median_degree: f64,
    pub stdev_degree: f64,
    pub avg_clustering: f64,
    /// `None` when the correlation is undefined (fewer than two nodes of
    /// degree >= 2, or zero variance).
    pub degree_clustering_corr: Option<f64>,
    pub avg_path_length: f64,
    pub diameter: u32,
}

pub const METRICS_CSV_HEADER: &str =
    "avg_degree,median_degree,stdev_degree,clustering,deg_clust_corr,avg_path_length,diameter";

impl NetworkMetrics {
    pub fn csv_row(&self) -> String {
        let corr = self
            .degree_clustering_corr
            .map_or_else(|| "NA".to_string(), |c| format!("{c:.6}"));
        let mut s = String::new();
        let _ = write!(
            s,
            "{:.6},{:.6},{:.6},{:.6},{},{:.6},{}",
            self.avg_degree,
            self.median_degree,
            self.stdev_degree,
            self.avg_clustering,
            corr,
            self.avg_path_length,
            self.diameter
        );
        s
    }
}

fn sorted_intersection_len(a: &[NodeId], b: &[NodeId]) -> usize {
    let (mut i, mut j, mut c) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                c += 1;
                i += 1;
                j += 1;
            }
        }
    }
    c
}

/// Links among the neighbors of `node`.
pub fn neighbor_links(net: &Network, node: NodeId) -> usize {
    let nb = net.neighbors(node);
    nb.iter()
        .map(|&u| sorted_intersection_len(nb, net.neighbors(u)))
        .sum::<usize>()
        / 2
}

/// Fraction of neighbor pairs that are linked; 0 below degree 2.
pub fn local_clustering(net: &Network, node: NodeId) -> f64 {
    let k = net.degree(node);
    if k < 2 {
        return 0.0;
    }
    neighbor_links(net, node) as f64 / (k * (k - 1) / 2) as f64
}

/// Mean local clustering over all nodes, degree < 2 counting as 0.
pub fn avg_clustering(net: &Network) -> f64 {
    let n = net.node_count();
    if n == 0 {
        return 0.0;
    }
    let sum: f64 = (0..n as NodeId)
        .into_par_iter()
        .map(|i| local_clustering(net, i))
        .collect::<Vec<_>>()
        .iter()
        .sum();
    sum / n as f64
}

/// Pearson correlation of degree and local clustering over nodes of degree
/// at least 2.
pub fn degree_clustering_correlation(net: &Network) -> Result<f64> {
    let (ks, cs): (Vec<f64>, Vec<f64>) = (0..net.node_count() as NodeId)
        .filter(|&i| net.degree(i) >= 2)
        .map(|i| (net.degree(i) as f64, local_clustering(net, i)))
        .unzip();
    if ks.len() < 2 {
        return Err(Error::UndefinedCorrelation("fewer than two nodes of degree >= 2"));
    }
    stats::pearson(&ks, &cs).ok_or(Error::UndefinedCorrelation(
        "zero variance in degree or clustering",
    ))
}

/// Nodes of the largest connected component, ascending; ties go to the
/// component holding the smallest id.
pub fn largest_component(net: &Network) -> Vec<NodeId> {
    let n = net.node_count();
    let mut comp = vec![u32::MAX; n];
    let mut best: Vec<NodeId> = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..n {
        if comp[start] != u32::MAX {
            continue;
        }
        let mut members = vec![start as NodeId];
        comp[start] = start as u32;
        queue.push_back(start as NodeId);
        while let Some(v) = queue.pop_front() {
            for &u in net.neighbors(v) {
                if comp[u as usize] == u32::MAX {
                    comp[u as usize] = start as u32;
                    members.push(u);
                    queue.push_back(u);
                }
            }
        }
        if members.len() > best.len() {
            best = members;
        }
    }
    best.sort_unstable();
    best
}

/// Breadth-first search from up to 64 sources at once, one bit per source.
/// Returns the summed distances and the largest distance reached.
fn bfs_batch<'a>(
    net: &Network,
    sources: &[NodeId],
    seen: &mut [u64],
    mut frontier: &'a mut [u64],
    mut next: &'a mut [u64],
) -> (u64, u32) {
    seen.fill(0);
    frontier.fill(0);
    for (k, &s) in sources.iter().enumerate() {
        seen[s as usize] |= 1 << k;
        frontier[s as usize] |= 1 << k;
    }
    let (mut sum, mut far) = (0u64, 0u32);
    for depth in 1.. {
        let mut reached = 0u64;
        for v in 0..net.node_count() {
            let mut bits = 0u64;
            for &u in net.neighbors(v as NodeId) {
                bits |= frontier[u as usize];
            }
            bits &= !seen[v];
            next[v] = bits;
            reached += u64::from(bits.count_ones());
        }
        if reached == 0 {
            break;
        }
        sum += reached * u64::from(depth);
        far = depth;
        for (s, &x) in seen.iter_mut().zip(next.iter()) {
            *s |= x;
        }
        std::mem::swap(&mut frontier, &mut next);
    }
    (sum, far)
}

/// Average shortest-path length and diameter over ordered pairs of the
/// largest connected component. A component of fewer than two nodes yields
/// `(0.0, 0)`.
pub fn path_metrics(net: &Network) -> (f64, u32) {
    let comp = largest_component(net);
    let c = comp.len();
    if c < 2 {
        return (0.0, 0);
    }
    let n = net.node_count();
    let (sum, diameter) = comp
        .par_chunks(64)
        .map_init(
            || (vec![0u64; n], vec![0u64; n], vec![0u64; n]),
            |(seen, frontier, next), batch| bfs_batch(net, batch, seen, frontier, next),
        )
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1.max(b.1)));
    (sum as f64 / (c * (c - 1)) as f64, diameter)
}

pub fn compute_metrics(net: &Network) -> NetworkMetrics {
    let degs: Vec<f64> = net.degrees().into_iter().map(f64::from).collect();
    let (apl, diameter) = path_metrics(net);
    NetworkMetrics {
        avg_degree: stats::mean(&degs),
        median_degree: stats::median(&degs),
        stdev_degree: stats::population_stdev(&degs),
        avg_clustering: avg_clustering(net),
        degree_clustering_corr: degree_clustering_correlation(net).ok(),
        avg_path_length: apl,
        diameter,
    }
}
