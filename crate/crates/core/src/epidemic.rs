//! Agent-based SEIR dynamics on a fixed contact network, advanced one day at
//! a time.
//!
//! A day runs in three phases: the intervention policy spends its budget,
//! infectious agents challenge their susceptible neighbors (successes are
//! collected and applied at the end of the day), then exposed and infectious
//! agents age by one day and progress. An agent that becomes exposed on day
//! `t` is infectious from day `t + latency + 1` for `infectious_window`
//! days and stays in I until it passes a recovery draw on or after its
//! sampled recovery time.

use std::fmt::Write as _;

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interventions::{Intervention, InterventionPolicy};
use crate::network::{Network, NodeId};
use crate::rng::{self, SimRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum Compartment {
    Susceptible,
    Exposed,
    Infectious,
    Recovered,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiseaseParams {
    pub latency_days: u32,
    pub infectious_window_days: u32,
    pub recovery_time_mean_days: f64,
    pub recovery_time_range_days: (u32, u32),
    pub recovery_prob_mean: f64,
    pub recovery_prob_sd: f64,
    pub recovery_prob_range: (f64, f64),
    /// Mean dyadic (per-edge, per-day) transmission probability.
    pub transmission_mean: f64,
    pub transmission_sd: f64,
    pub n_seeds: usize,
}

impl Default for DiseaseParams {
    fn default() -> Self {
        DiseaseParams {
            latency_days: 4,
            infectious_window_days: 4,
            recovery_time_mean_days: 14.0,
            recovery_time_range_days: (7, 42),
            recovery_prob_mean: 0.993,
            recovery_prob_sd: 0.0015,
            recovery_prob_range: (0.990, 0.996),
            transmission_mean: 0.05,
            transmission_sd: 0.02,
            n_seeds: 5,
        }
    }
}

impl DiseaseParams {
    pub fn with_transmission(r_mean: f64, r_sd: f64) -> Self {
        DiseaseParams {
            transmission_mean: r_mean,
            transmission_sd: r_sd,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.latency_days < 1 || self.infectious_window_days < 1 {
            return bad("latency and infectious window must be at least one day".into());
        }
        let (tlo, thi) = self.recovery_time_range_days;
        if tlo < 1 || tlo > thi {
            return bad(format!("recovery time range [{tlo}, {thi}] invalid"));
        }
        if !(f64::from(tlo)..=f64::from(thi)).contains(&self.recovery_time_mean_days) {
            return bad("recovery time mean outside its range".into());
        }
        let (plo, phi) = self.recovery_prob_range;
        if !(0.0..=1.0).contains(&plo) || !(0.0..=1.0).contains(&phi) || plo > phi {
            return bad(format!("recovery probability range [{plo}, {phi}] invalid"));
        }
        if !(plo..=phi).contains(&self.recovery_prob_mean) || self.recovery_prob_sd < 0.0 {
            return bad("recovery probability mean outside its range or negative sd".into());
        }
        if !(0.0..=1.0).contains(&self.transmission_mean) || self.transmission_sd.is_nan() || self.transmission_sd < 0.0 {
            return bad(format!(
                "transmission mean {} must lie in [0, 1] with a non-negative sd",
                self.transmission_mean
            ));
        }
        Ok(())
    }
}

/// Normal draw truncated to `[lo, hi]` by rejection; a zero sd returns the
/// mean clamped into the interval.
fn truncated_normal<R: Rng + ?Sized>(rng: &mut R, mean: f64, sd: f64, lo: f64, hi: f64) -> f64 {
    if sd == 0.0 {
        return mean.clamp(lo, hi);
    }
    let normal = Normal::new(mean, sd).expect("finite sd");
    loop {
        let x = normal.sample(rng);
        if (lo..=hi).contains(&x) {
            return x;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpidemicState {
    pub compartment: Vec<Compartment>,
    pub days_in_compartment: Vec<u32>,
    pub recovery_time: Vec<u32>,
    pub recovery_prob: Vec<f64>,
    /// Indexed by undirected edge id.
    pub edge_transmission_prob: Vec<f64>,
    pub ever_infected: Vec<bool>,
    pub ever_targeted: Vec<bool>,
    pub day: u32,
    counts: [usize; 4],
    cumulative_infected: usize,
}

impl EpidemicState {
    pub fn n(&self) -> usize {
        self.compartment.len()
    }

    pub fn count(&self, c: Compartment) -> usize {
        self.counts[c as usize]
    }

    pub fn counts(&self) -> [usize; 4] {
        self.counts
    }

    pub fn cumulative_infected(&self) -> usize {
        self.cumulative_infected
    }

    pub fn is_active(&self) -> bool {
        self.count(Compartment::Exposed) + self.count(Compartment::Infectious) > 0
    }

    pub(crate) fn set(&mut self, agent: NodeId, to: Compartment) {
        let a = agent as usize;
        self.counts[self.compartment[a] as usize] -= 1;
        self.counts[to as usize] += 1;
        self.compartment[a] = to;
        self.days_in_compartment[a] = 0;
    }

    /// Moves an agent into E through infection or seeding.
    fn expose<R: Rng + ?Sized>(&mut self, agent: NodeId, params: &DiseaseParams, rng: &mut R) {
        self.set(agent, Compartment::Exposed);
        let a = agent as usize;
        self.ever_infected[a] = true;
        self.cumulative_infected += 1;
        self.recovery_time[a] = sample_recovery_time(rng, params);
        let (lo, hi) = params.recovery_prob_range;
        self.recovery_prob[a] =
            truncated_normal(rng, params.recovery_prob_mean, params.recovery_prob_sd, lo, hi);
    }

    /// Intervention: S, E or I goes straight to R; the agent is flagged either
    /// way. Returns whether the compartment changed.
    pub fn intervene(&mut self, agent: NodeId) -> bool {
        self.ever_targeted[agent as usize] = true;
        if self.compartment[agent as usize] == Compartment::Recovered {
            return false;
        }
        self.set(agent, Compartment::Recovered);
        true
    }
}

fn sample_recovery_time<R: Rng + ?Sized>(rng: &mut R, params: &DiseaseParams) -> u32 {
    let (lo, hi) = params.recovery_time_range_days;
    let poisson = Poisson::new(params.recovery_time_mean_days).expect("positive mean");
    loop {
        let x = poisson.sample(rng) as u32;
        if (lo..=hi).contains(&x) {
            return x;
        }
    }
}

pub fn init_epidemic<R: Rng + ?Sized>(
    net: &Network,
    params: &DiseaseParams,
    rng: &mut R,
) -> Result<EpidemicState> {
    params.validate()?;
    let n = net.node_count();
    if params.n_seeds > n {
        return Err(Error::InvalidParameter(format!(
            "{} seeds requested for {n} agents",
            params.n_seeds
        )));
    }
    let edge_transmission_prob = (0..net.edge_count())
        .map(|_| truncated_normal(rng, params.transmission_mean, params.transmission_sd, 0.0, 1.0))
        .collect();
    let mut state = EpidemicState {
        compartment: vec![Compartment::Susceptible; n],
        days_in_compartment: vec![0; n],
        recovery_time: vec![0; n],
        recovery_prob: vec![0.0; n],
        edge_transmission_prob,
        ever_infected: vec![false; n],
        ever_targeted: vec![false; n],
        day: 0,
        counts: [n, 0, 0, 0],
        cumulative_infected: 0,
    };
    let mut seeds = index::sample(rng, n, params.n_seeds).into_vec();
    seeds.sort_unstable();
    for s in seeds {
        state.expose(s as NodeId, params, rng);
    }
    Ok(state)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DailyRecord {
    pub day: u32,
    pub susceptible: usize,
    pub exposed: usize,
    pub infectious: usize,
    pub recovered: usize,
    pub new_infections: usize,
    pub cumulative_infected: usize,
    pub interventions: usize,
}

impl DailyRecord {
    fn snapshot(state: &EpidemicState, new_infections: usize, interventions: usize) -> Self {
        let [s, e, i, r] = state.counts;
        DailyRecord {
            day: state.day,
            susceptible: s,
            exposed: e,
            infectious: i,
            recovered: r,
            new_infections,
            cumulative_infected: state.cumulative_infected,
            interventions,
        }
    }
}

/// One successful challenge, for auditing and secondary-case counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transmission {
    pub day: u32,
    pub source: NodeId,
    pub target: NodeId,
    /// Days the source had spent in I when it transmitted.
    pub source_days_infectious: u32,
}

/// Advances the state by one day: interventions, then transmission from I
/// agents whose counter is below the infectious window (new exposures are
/// applied together once all challenges are drawn), then E to I and I to R
/// transitions on the current counters, then every E and I counter ages by
/// one. An agent therefore transmits on counters `1..window` only: counter 0
/// is its entry day, after that day's transmission phase.
pub fn step_day<R: Rng + ?Sized>(
    state: &mut EpidemicState,
    net: &Network,
    params: &DiseaseParams,
    policy: &mut Intervention,
    rng: &mut R,
) -> DailyRecord {
    step_day_logged(state, net, params, policy, rng, None)
}

/// [`step_day`] that also appends every successful transmission to `log`.
pub fn step_day_logged<R: Rng + ?Sized>(
    state: &mut EpidemicState,
    net: &Network,
    params: &DiseaseParams,
    policy: &mut Intervention,
    rng: &mut R,
    mut log: Option<&mut Vec<Transmission>>,
) -> DailyRecord {
    state.day += 1;
    let n = state.n();

    let interventions = policy.apply(state, net, rng);

    // Transmission: collect, then apply together.
    let mut hit = vec![false; n];
    let mut newly: Vec<NodeId> = Vec::new();
    for i in 0..n {
        if state.compartment[i] != Compartment::Infectious
            || state.days_in_compartment[i] >= params.infectious_window_days
        {
            continue;
        }
        let src = i as NodeId;
        for (&j, &e) in net.neighbors(src).iter().zip(net.incident_edges(src)) {
            if state.compartment[j as usize] != Compartment::Susceptible {
                continue;
            }
            if rng.random::<f64>() < state.edge_transmission_prob[e as usize] && !hit[j as usize] {
                hit[j as usize] = true;
                newly.push(j);
                if let Some(log) = log.as_deref_mut() {
                    log.push(Transmission {
                        day: state.day,
                        source: src,
                        target: j,
                        source_days_infectious: state.days_in_compartment[i],
                    });
                }
            }
        }
    }

    newly.sort_unstable();
    for &j in &newly {
        state.expose(j, params, rng);
    }

    // Progression on the counters as they stand, then every E and I agent
    // ages by one day.
    for i in 0..n {
        match state.compartment[i] {
            Compartment::Exposed if state.days_in_compartment[i] >= params.latency_days => {
                state.set(i as NodeId, Compartment::Infectious);
            }
            Compartment::Infectious
                if state.days_in_compartment[i] >= state.recovery_time[i]
                    && rng.random::<f64>() < state.recovery_prob[i] =>
            {
                state.set(i as NodeId, Compartment::Recovered);
            }
            _ => {}
        }
        if matches!(state.compartment[i], Compartment::Exposed | Compartment::Infectious) {
            state.days_in_compartment[i] += 1;
        }
    }
    DailyRecord::snapshot(state, newly.len(), interventions)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// Day 0 (initial state) first.
    pub records: Vec<DailyRecord>,
}

pub const TRAJECTORY_CSV_HEADER: &str =
    "day,S,E,I,R,new_infections,cumulative_infected,interventions";

impl Trajectory {
    /// Maximum concurrent I count and the earliest day it occurs.
    pub fn peak(&self) -> (usize, u32) {
        let mut best = (0, 0);
        for r in &self.records {
            if r.infectious > best.0 {
                best = (r.infectious, r.day);
            }
        }
        best
    }

    /// Agents ever infected, seeds included.
    pub fn epidemic_size(&self) -> usize {
        self.records.last().map_or(0, |r| r.cumulative_infected)
    }

    pub fn infectious_series(&self) -> Vec<usize> {
        self.records.iter().map(|r| r.infectious).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(40 * (self.records.len() + 1));
        s.push_str(TRAJECTORY_CSV_HEADER);
        s.push('\n');
        for r in &self.records {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                r.day,
                r.susceptible,
                r.exposed,
                r.infectious,
                r.recovered,
                r.new_infections,
                r.cumulative_infected,
                r.interventions
            );
        }
        s
    }
}

pub const DEFAULT_MAX_DAYS: u32 = 365;

/// Runs from seeding until no agent is in E or I, or `max_days` elapse.
pub fn run_to_completion(
    net: &Network,
    params: &DiseaseParams,
    policy: &InterventionPolicy,
    seed: u64,
    max_days: u32,
) -> Result<Trajectory> {
    let mut rng = rng::from_seed(seed);
    run_with_rng(net, params, policy, &mut rng, max_days, None)
}

pub(crate) fn run_with_rng(
    net: &Network,
    params: &DiseaseParams,
    policy: &InterventionPolicy,
    rng: &mut SimRng,
    max_days: u32,
    mut log: Option<&mut Vec<Transmission>>,
) -> Result<Trajectory> {
    let mut state = init_epidemic(net, params, rng)?;
    let mut intervention = Intervention::new(policy, net);
    let mut records = vec![DailyRecord::snapshot(&state, params.n_seeds, 0)];
    while state.is_active() && state.day < max_days {
        records.push(step_day_logged(
            &mut state,
            net,
            params,
            &mut intervention,
            rng,
            log.as_deref_mut(),
        ));
    }
    Ok(Trajectory { records })
}

/// Like [`run_to_completion`] but also returns every transmission event.
pub fn run_with_log(
    net: &Network,
    params: &DiseaseParams,
    policy: &InterventionPolicy,
    seed: u64,
    max_days: u32,
) -> Result<(Trajectory, Vec<Transmission>)> {
    let mut rng = rng::from_seed(seed);
    let mut log = Vec::new();
    let t = run_with_rng(net, params, policy, &mut rng, max_days, Some(&mut log))?;
    Ok((t, log))
}

/// Basic reproductive number for a heterogeneous-degree network:
/// `T * (<k^2> - <k>) / <k>`, with per-contact transmissibility
/// `T = infectious_window_days * transmission_mean`.
pub fn compute_r0(net: &Network, params: &DiseaseParams) -> f64 {
    let n = net.node_count();
    if n == 0 {
        return 0.0;
    }
    let (mut k1, mut k2) = (0.0, 0.0);
    for i in 0..n as NodeId {
        let k = net.degree(i) as f64;
        k1 += k;
        k2 += k * k;
    }
    if k1 == 0.0 {
        return 0.0;
    }
    let transmissibility = f64::from(params.infectious_window_days) * params.transmission_mean;
    transmissibility * (k2 - k1) / k1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interventions::InterventionPolicy;

    fn none() -> InterventionPolicy {
        InterventionPolicy::none()
    }

    #[test]
    fn seeding_default() {
        let net = crate::netgen::generate_er(2029, 9.72, 1).unwrap();
        let mut rng = rng::from_seed(5);
        let st = init_epidemic(&net, &DiseaseParams::default(), &mut rng).unwrap();
        assert_eq!(st.count(Compartment::Exposed), 5);
        assert_eq!(st.count(Compartment::Susceptible), 2024);
        assert_eq!(st.ever_infected.iter().filter(|&&x| x).count(), 5);
    }

    #[test]
    fn seeding_saturates() {
        let net = Network::from_edges(4, &[(0, 1)]).unwrap();
        let params = DiseaseParams {
            n_seeds: 4,
            ..Default::default()
        };
        let st = init_epidemic(&net, &params, &mut rng::from_seed(1)).unwrap();
        assert_eq!(st.count(Compartment::Exposed), 4);
        let params = DiseaseParams {
            n_seeds: 5,
            ..Default::default()
        };
        assert!(init_epidemic(&net, &params, &mut rng::from_seed(1)).is_err());
    }

    #[test]
    fn zero_sd_gives_constant_edges() {
        let net = crate::netgen::generate_er(200, 6.0, 2).unwrap();
        let params = DiseaseParams::with_transmission(0.05, 0.0);
        let st = init_epidemic(&net, &params, &mut rng::from_seed(3)).unwrap();
        assert!(st.edge_transmission_prob.iter().all(|&p| p == 0.05));
    }

    #[test]
    fn truncated_edges_stay_in_unit_interval() {
        let net = crate::netgen::generate_er(300, 8.0, 2).unwrap();
        let params = DiseaseParams::with_transmission(0.03, 0.02);
        let st = init_epidemic(&net, &params, &mut rng::from_seed(3)).unwrap();
        assert!(st.edge_transmission_prob.iter().all(|&p| (0.0..=1.0).contains(&p)));
        let m: f64 = st.edge_transmission_prob.iter().sum::<f64>()
            / st.edge_transmission_prob.len() as f64;
        // Truncation at zero lifts the mean slightly above 0.03.
        assert!(m > 0.03 && m < 0.036, "{m}");
    }

    #[test]
    fn no_transmission_keeps_size_at_seeds() {
        let net = crate::netgen::generate_er(500, 9.0, 4).unwrap();
        let params = DiseaseParams::with_transmission(0.0, 0.0);
        let t = run_to_completion(&net, &params, &none(), 8, DEFAULT_MAX_DAYS).unwrap();
        assert_eq!(t.epidemic_size(), 5);
        let last = t.records.last().unwrap();
        assert_eq!(last.exposed + last.infectious, 0);
        assert!(t.records.iter().all(|r| r.cumulative_infected == 5));
    }

    #[test]
    fn certain_transmission_on_single_edge() {
        let net = Network::from_edges(2, &[(0, 1)]).unwrap();
        let params = DiseaseParams::with_transmission(1.0, 0.0);
        let mut st = init_epidemic(
            &net,
            &DiseaseParams {
                n_seeds: 0,
                ..params.clone()
            },
            &mut rng::from_seed(0),
        )
        .unwrap();
        st.set(0, Compartment::Infectious);
        st.recovery_time[0] = 14;
        let mut pol = Intervention::new(&none(), &net);
        let rec = step_day(&mut st, &net, &params, &mut pol, &mut rng::from_seed(0));
        assert_eq!(st.compartment[1], Compartment::Exposed);
        assert_eq!(rec.new_infections, 1);
        assert!(st.ever_infected[1]);
    }

    #[test]
    fn expired_window_blocks_transmission_but_stays_in_i() {
        let net = Network::from_edges(2, &[(0, 1)]).unwrap();
        let params = DiseaseParams {
            n_seeds: 0,
            ..DiseaseParams::with_transmission(1.0, 0.0)
        };
        let mut st = init_epidemic(&net, &params, &mut rng::from_seed(0)).unwrap();
        st.set(0, Compartment::Infectious);
        st.days_in_compartment[0] = params.infectious_window_days;
        st.recovery_time[0] = 14;
        let mut pol = Intervention::new(&none(), &net);
        step_day(&mut st, &net, &params, &mut pol, &mut rng::from_seed(0));
        assert_eq!(st.compartment[1], Compartment::Susceptible);
        assert_eq!(st.compartment[0], Compartment::Infectious);
    }

    #[test]
    fn timeline_of_a_single_case() {
        // Path 0-1-2 with certain transmission. The seed ages through days
        // 1-4 in E, enters I on day 5 and can transmit on days 6-8.
        let net = Network::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let params = DiseaseParams {
            n_seeds: 1,
            ..DiseaseParams::with_transmission(1.0, 0.0)
        };
        let (mut rng, mut st) = (0..)
            .map(|seed| {
                let mut rng = rng::from_seed(seed);
                let st = init_epidemic(&net, &params, &mut rng).unwrap();
                (rng, st)
            })
            .find(|(_, st)| st.compartment[0] == Compartment::Exposed)
            .unwrap();
        let mut policy = Intervention::new(&none(), &net);
        let mut log = Vec::new();
        let mut history = Vec::new();
        for _ in 0..20 {
            step_day_logged(&mut st, &net, &params, &mut policy, &mut rng, Some(&mut log));
            history.push(st.compartment.clone());
        }
        let day_in_i = |agent: usize| {
            history.iter().position(|c| c[agent] == Compartment::Infectious).unwrap() as u32 + 1
        };
        assert_eq!(day_in_i(0), 5);
        assert_eq!(log[0].day, 6);
        assert_eq!((log[0].source, log[0].target), (0, 1));
        assert_eq!(log[0].source_days_infectious, 1);
        // Agent 1 is exposed on day 6 and spends days 6-9 in E.
        assert_eq!(day_in_i(1), 10);
        assert_eq!(log[1].day, 11);
        assert!(log.iter().all(|t| (1..params.infectious_window_days).contains(&t.source_days_infectious)));
    }

    #[test]
    fn deterministic_runs() {
        let net = crate::netgen::generate_er(400, 9.0, 5).unwrap();
        let params = DiseaseParams::with_transmission(0.07, 0.02);
        let a = run_to_completion(&net, &params, &none(), 42, DEFAULT_MAX_DAYS).unwrap();
        let b = run_to_completion(&net, &params, &none(), 42, DEFAULT_MAX_DAYS).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_csv(), b.to_csv());
    }

    #[test]
    fn r0_zero_transmission() {
        let net = crate::netgen::generate_er(100, 5.0, 1).unwrap();
        assert_eq!(compute_r0(&net, &DiseaseParams::with_transmission(0.0, 0.0)), 0.0);
    }

    #[test]
    fn r0_regular_graph() {
        // Ring: every node has degree 2, so the excess degree is 1.
        let edges: Vec<_> = (0..10u32).map(|i| (i, (i + 1) % 10)).collect();
        let net = Network::from_edges(10, &edges).unwrap();
        let r0 = compute_r0(&net, &DiseaseParams::with_transmission(0.05, 0.02));
        assert!((r0 - 0.2).abs() < 1e-12);
    }

    #[test]
    fn params_validation() {
        assert!(DiseaseParams::default().validate().is_ok());
        assert!(DiseaseParams::with_transmission(1.5, 0.0).validate().is_err());
        let p = DiseaseParams {
            recovery_time_range_days: (20, 10),
            ..Default::default()
        };
        assert!(p.validate().is_err());
    }
}
