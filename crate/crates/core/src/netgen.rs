//! Network generators: degree-calibrated configuration model with triadic
//! closure, and the binomial Erdős–Rényi benchmark.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::contact_data::DegreeSequence;
use crate::error::{Error, Result};
use crate::network::{Network, NodeId};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenReport {
    pub target_degrees: Vec<u32>,
    pub realized_degrees: Vec<u32>,
    /// Sum over nodes of `target - realized`.
    pub deficit_total: u64,
    /// Edges added by triadic closure rather than by source/destination
    /// matching.
    pub closure_edges: u64,
}

const NOT_ACTIVE: usize = usize::MAX;
const REJECTION_TRIES: usize = 48;

struct Builder<'a, R> {
    target: &'a [u32],
    degree: Vec<u32>,
    adj: Vec<Vec<NodeId>>,
    active: Vec<NodeId>,
    pos: Vec<usize>,
    heap: BinaryHeap<(u32, Reverse<NodeId>)>,
    pending: VecDeque<NodeId>,
    p: f64,
    closure_edges: u64,
    rng: &'a mut R,
}

impl<R: Rng> Builder<'_, R> {
    fn remaining(&self, i: NodeId) -> u32 {
        self.target[i as usize] - self.degree[i as usize]
    }

    fn is_active(&self, i: NodeId) -> bool {
        self.pos[i as usize] != NOT_ACTIVE
    }

    fn adjacent(&self, a: NodeId, b: NodeId) -> bool {
        // Lists are short (bounded by the largest target); scan the smaller.
        let (x, y) = if self.adj[a as usize].len() <= self.adj[b as usize].len() {
            (a, b)
        } else {
            (b, a)
        };
        self.adj[x as usize].contains(&y)
    }

    fn exclude(&mut self, i: NodeId) {
        let at = self.pos[i as usize];
        if at == NOT_ACTIVE {
            return;
        }
        let last = *self.active.last().unwrap();
        self.active.swap_remove(at);
        if last != i {
            self.pos[last as usize] = at;
        }
        self.pos[i as usize] = NOT_ACTIVE;
    }

    /// Adds `a`-`b`. A node saturated by a matching edge is queued for its
    /// closure pass; one saturated by a closure edge is simply excluded.
    fn connect(&mut self, a: NodeId, b: NodeId, closure: bool) {
        self.adj[a as usize].push(b);
        self.adj[b as usize].push(a);
        for v in [a, b] {
            self.degree[v as usize] += 1;
            let rem = self.remaining(v);
            if rem > 0 {
                self.heap.push((rem, Reverse(v)));
            } else if closure {
                self.exclude(v);
            } else {
                self.pending.push_back(v);
            }
        }
    }

    /// Processes every node that reached its target through matching: closes
    /// triads among its neighbors with probability `p`, then drops it.
    fn drain_saturated(&mut self) {
        while let Some(v) = self.pending.pop_front() {
            if !self.is_active(v) {
                continue;
            }
            if self.p > 0.0 {
                let nb = self.adj[v as usize].clone();
                for (ia, &a) in nb.iter().enumerate() {
                    for &b in &nb[ia + 1..] {
                        if self.remaining(a) == 0 {
                            break;
                        }
                        if !self.is_active(a)
                            || !self.is_active(b)
                            || self.remaining(b) == 0
                            || self.adjacent(a, b)
                        {
                            continue;
                        }
                        if self.p >= 1.0 || self.rng.random::<f64>() < self.p {
                            self.connect(a, b, true);
                            self.closure_edges += 1;
                        }
                    }
                }
            }
            self.exclude(v);
        }
    }

    /// Uniform draw from active nodes that are neither `s` nor adjacent to it.
    fn pick_destination(&mut self, s: NodeId) -> Option<NodeId> {
        for _ in 0..REJECTION_TRIES {
            let d = self.active[self.rng.random_range(0..self.active.len())];
            if d != s && !self.adjacent(s, d) {
                return Some(d);
            }
        }
        let avail: Vec<NodeId> = self
            .active
            .iter()
            .copied()
            .filter(|&d| d != s && !self.adjacent(s, d))
            .collect();
        if avail.is_empty() {
            None
        } else {
            Some(avail[self.rng.random_range(0..avail.len())])
        }
    }

    fn next_source(&mut self) -> Option<NodeId> {
        while let Some((rem, Reverse(v))) = self.heap.pop() {
            if self.is_active(v) && self.remaining(v) == rem {
                return Some(v);
            }
        }
        None
    }
}

/// Degree-calibrated network.
///
/// Sources are taken in descending order of remaining target degree (ties by
/// ascending id) and wired to uniformly random available destinations. When a
/// node reaches its target through such an edge, each pair of its neighbors
/// that is unlinked and still below target is linked with probability `p`;
/// the node is then excluded. Closure edges count toward targets but do not
/// trigger further closure. A source that runs out of destinations keeps its
/// deficit.
pub fn generate_dc(targets: &DegreeSequence, p: f64, seed: u64) -> Result<(Network, GenReport)> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("closure probability {p} outside [0, 1]")));
    }
    let target = targets.as_slice();
    let n = target.len();
    if n < 2 {
        return Err(Error::InvalidParameter("need at least two agents".into()));
    }
    let mut rng = rng::from_seed(seed);
    let mut b = Builder {
        target,
        degree: vec![0; n],
        adj: target.iter().map(|&t| Vec::with_capacity(t as usize)).collect(),
        active: (0..n as NodeId).collect(),
        pos: (0..n).collect(),
        heap: (0..n as NodeId).map(|i| (target[i as usize], Reverse(i))).collect(),
        pending: VecDeque::new(),
        p,
        closure_edges: 0,
        rng: &mut rng,
    };

    while let Some(s) = b.next_source() {
        while b.is_active(s) && b.remaining(s) > 0 {
            match b.pick_destination(s) {
                Some(d) => {
                    b.connect(s, d, false);
                    b.drain_saturated();
                }
                None => {
                    b.exclude(s);
                }
            }
        }
        b.drain_saturated();
    }

    let realized = b.degree.clone();
    let closure_edges = b.closure_edges;
    let deficit_total = target
        .iter()
        .zip(&realized)
        .map(|(&t, &r)| u64::from(t - r))
        .sum();
    let net = Network::from_adjacency(b.adj)?;
    Ok((
        net,
        GenReport {
            target_degrees: target.to_vec(),
            realized_degrees: realized,
            deficit_total,
            closure_edges,
        },
    ))
}

/// Binomial random graph `G(n, q)` with `q = avg_degree / (n - 1)`.
pub fn generate_er(n: usize, avg_degree: f64, seed: u64) -> Result<Network> {
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one node".into()));
    }
    let max = (n - 1) as f64;
    if !(0.0..=max).contains(&avg_degree) {
        return Err(Error::InvalidParameter(format!(
            "average degree {avg_degree} outside [0, {max}]"
        )));
    }
    if avg_degree == 0.0 {
        return Ok(Network::empty(n));
    }
    let q = avg_degree / max;
    let mut edges = Vec::new();
    if q >= 1.0 {
        for v in 1..n as NodeId {
            for w in 0..v {
                edges.push((w, v));
            }
        }
        return Network::from_edges(n, &edges);
    }
    // Geometric skipping over the pairs (w, v), w < v.
    let mut rng = rng::from_seed(seed);
    let log_q = (1.0 - q).ln();
    let (mut v, mut w): (usize, i64) = (1, -1);
    while v < n {
        let r: f64 = rng.random();
        w += 1 + ((1.0 - r).ln() / log_q).floor() as i64;
        while w >= v as i64 && v < n {
            w -= v as i64;
            v += 1;
        }
        if v < n {
            edges.push((w as NodeId, v as NodeId));
        }
    }
    Network::from_edges(n, &edges)
}
