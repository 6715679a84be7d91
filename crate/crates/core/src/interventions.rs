//! Daily intervention policies. Each day a policy may move up to `budget`
//! agents from S, E or I into R.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::epidemic::{Compartment, EpidemicState};
use crate::error::Error;
use crate::network::{Network, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    None,
    /// Uniformly random agents among S, E and I.
    NoTarget,
    /// A random neighbor of each of `budget` random agents.
    ContactTarget,
    /// Agents in descending degree order.
    HubTarget,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 4] = [
        PolicyKind::None,
        PolicyKind::NoTarget,
        PolicyKind::ContactTarget,
        PolicyKind::HubTarget,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::None => "none",
            PolicyKind::NoTarget => "no_target",
            PolicyKind::ContactTarget => "contact_target",
            PolicyKind::HubTarget => "hub_target",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "unknown intervention kind {s:?} (expected none, no_target, contact_target or hub_target)"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InterventionPolicy {
    pub kind: PolicyKind,
    /// Agents per day; ignored for [`PolicyKind::None`].
    pub budget: usize,
}

impl InterventionPolicy {
    pub fn none() -> Self {
        InterventionPolicy {
            kind: PolicyKind::None,
            budget: 0,
        }
    }

    pub fn new(kind: PolicyKind, budget: usize) -> Self {
        InterventionPolicy { kind, budget }
    }
}

/// Agents sorted by descending degree, ties by ascending id.
pub fn hub_order(net: &Network) -> Vec<NodeId> {
    let mut order: Vec<NodeId> = (0..net.node_count() as NodeId).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(net.degree(i)), i));
    order
}

/// Per-run policy state.
#[derive(Debug, Clone)]
pub struct Intervention {
    policy: InterventionPolicy,
    hub_order: Vec<NodeId>,
    cursor: usize,
}

const EGO_TRIES: usize = 64;

impl Intervention {
    pub fn new(policy: &InterventionPolicy, net: &Network) -> Self {
        let hub_order = if policy.kind == PolicyKind::HubTarget {
            hub_order(net)
        } else {
            Vec::new()
        };
        Intervention {
            policy: *policy,
            hub_order,
            cursor: 0,
        }
    }

    pub fn policy(&self) -> &InterventionPolicy {
        &self.policy
    }

    /// Spends one day's budget. Returns the number of agents selected.
    pub fn apply<R: Rng + ?Sized>(
        &mut self,
        state: &mut EpidemicState,
        net: &Network,
        rng: &mut R,
    ) -> usize {
        let b = self.policy.budget;
        match self.policy.kind {
            PolicyKind::None => 0,
            _ if b == 0 => 0,
            PolicyKind::NoTarget => apply_no_target(state, b, rng),
            PolicyKind::ContactTarget => apply_contact_target(state, net, b, rng),
            PolicyKind::HubTarget => {
                let (applied, next) = apply_hub_target(state, &self.hub_order, self.cursor, b);
                self.cursor = next;
                applied
            }
        }
    }
}

fn is_live(c: Compartment) -> bool {
    c != Compartment::Recovered
}

/// Moves up to `b` uniformly chosen agents among S, E and I into R.
pub fn apply_no_target<R: Rng + ?Sized>(state: &mut EpidemicState, b: usize, rng: &mut R) -> usize {
    let eligible: Vec<NodeId> = (0..state.n() as NodeId)
        .filter(|&i| is_live(state.compartment[i as usize]))
        .collect();
    let k = b.min(eligible.len());
    let mut picks: Vec<usize> = index::sample(rng, eligible.len(), k).into_vec();
    picks.sort_unstable();
    for p in picks {
        state.intervene(eligible[p]);
    }
    k
}

fn has_nominable_neighbor(state: &EpidemicState, net: &Network, ego: NodeId) -> bool {
    net.neighbors(ego)
        .iter()
        .any(|&j| !state.ever_targeted[j as usize])
}

/// A uniformly random neighbor of `ego` that has never been intervened on.
pub fn nominate<R: Rng + ?Sized>(
    state: &EpidemicState,
    net: &Network,
    ego: NodeId,
    rng: &mut R,
) -> Option<NodeId> {
    let options: Vec<NodeId> = net
        .neighbors(ego)
        .iter()
        .copied()
        .filter(|&j| !state.ever_targeted[j as usize])
        .collect();
    if options.is_empty() {
        None
    } else {
        Some(options[rng.random_range(0..options.len())])
    }
}

/// Samples egos from all agents; each nominates one uniformly random
/// neighbor that has never been intervened on. Egos without such a neighbor
/// are redrawn. A nominee already in R is flagged but otherwise unchanged.
pub fn apply_contact_target<R: Rng + ?Sized>(
    state: &mut EpidemicState,
    net: &Network,
    b: usize,
    rng: &mut R,
) -> usize {
    let n = state.n();
    let nominable = (0..n as NodeId)
        .filter(|&i| !state.ever_targeted[i as usize] && net.degree(i) > 0)
        .count();
    let k = b.min(nominable);
    let mut applied = 0;
    for _ in 0..k {
        let mut ego = None;
        for _ in 0..EGO_TRIES {
            let cand = rng.random_range(0..n) as NodeId;
            if has_nominable_neighbor(state, net, cand) {
                ego = Some(cand);
                break;
            }
        }
        let ego = match ego {
            Some(e) => e,
            None => {
                // Uniform over qualifying egos, the same law as redrawing
                // until one qualifies.
                let qualified: Vec<NodeId> = (0..n as NodeId)
                    .filter(|&i| has_nominable_neighbor(state, net, i))
                    .collect();
                if qualified.is_empty() {
                    break;
                }
                qualified[rng.random_range(0..qualified.len())]
            }
        };
        let Some(nominee) = nominate(state, net, ego, rng) else {
            break;
        };
        state.intervene(nominee);
        applied += 1;
    }
    applied
}

/// Takes the next `b` agents of the degree ranking starting at `cursor`.
/// Returns the number selected and the advanced cursor.
pub fn apply_hub_target(
    state: &mut EpidemicState,
    order: &[NodeId],
    cursor: usize,
    b: usize,
) -> (usize, usize) {
    let end = (cursor + b).min(order.len());
    for &agent in &order[cursor..end] {
        state.intervene(agent);
    }
    (end - cursor, end)
}
