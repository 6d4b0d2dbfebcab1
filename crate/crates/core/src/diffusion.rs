//! Agent-based knowledge diffusion on an organization's interaction graph.
//!
//! Every agent starts out knowing one knowledge unit. On each synchronous
//! step, every live edge carries at most one unit in each direction: with
//! probability `p` the sender passes a uniformly chosen unit it knows and the
//! receiver lacks. Isolation removes an agent's edges but keeps what it
//! knows. The diffusion measure is the known fraction of the
//! agent × knowledge matrix.

use std::collections::VecDeque;
use std::io;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiffusionError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("every agent is already isolated")]
    NoAgentsLeft,
}

/// Undirected simple graph on agents `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    /// Sorted `(u, v)` pairs with `u < v`.
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

impl Graph {
    /// Self-loops are dropped and duplicate edges merged.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut es: Vec<(usize, usize)> = edges
            .into_iter()
            .filter(|(u, v)| u != v)
            .map(|(u, v)| (u.min(v), u.max(v)))
            .collect();
        es.sort_unstable();
        es.dedup();
        assert!(es.iter().all(|&(_, v)| v < n), "edge endpoint out of range");
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &es {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Graph { n, edges: es, adj }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    /// Connectivity of the graph with the `removed` vertex deleted.
    pub fn is_connected_without(&self, removed: Option<usize>) -> bool {
        let Some(start) = (0..self.n).find(|&v| Some(v) != removed) else {
            return true;
        };
        let mut seen = vec![false; self.n];
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &w in &self.adj[v] {
                if !seen[w] && Some(w) != removed {
                    seen[w] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        count == self.n - usize::from(removed.is_some())
    }

    pub fn is_connected(&self) -> bool {
        self.is_connected_without(None)
    }

    /// Cut vertices, in increasing order (Tarjan's low-link).
    pub fn articulation_points(&self) -> Vec<usize> {
        let mut disc = vec![usize::MAX; self.n];
        let mut low = vec![0; self.n];
        let mut is_cut = vec![false; self.n];
        let mut timer = 0;
        for root in 0..self.n {
            if disc[root] == usize::MAX {
                self.low_link(root, None, &mut timer, &mut disc, &mut low, &mut is_cut);
            }
        }
        (0..self.n).filter(|&v| is_cut[v]).collect()
    }

    fn low_link(
        &self,
        v: usize,
        parent: Option<usize>,
        timer: &mut usize,
        disc: &mut [usize],
        low: &mut [usize],
        is_cut: &mut [bool],
    ) {
        disc[v] = *timer;
        low[v] = *timer;
        *timer += 1;
        let mut children = 0;
        for &w in &self.adj[v] {
            if disc[w] == usize::MAX {
                children += 1;
                self.low_link(w, Some(v), timer, disc, low, is_cut);
                low[v] = low[v].min(low[w]);
                if parent.is_some() && low[w] >= disc[v] {
                    is_cut[v] = true;
                }
            } else if Some(w) != parent {
                low[v] = low[v].min(disc[w]);
            }
        }
        if parent.is_none() && children > 1 {
            is_cut[v] = true;
        }
    }

    /// Connected, and still connected after removing any single vertex.
    pub fn is_biconnected(&self) -> bool {
        self.is_connected() && self.articulation_points().is_empty()
    }

    /// Longest shortest path; `None` if disconnected.
    pub fn diameter(&self) -> Option<usize> {
        let mut best = 0;
        for s in 0..self.n {
            let mut dist = vec![usize::MAX; self.n];
            dist[s] = 0;
            let mut queue = VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                for &w in &self.adj[v] {
                    if dist[w] == usize::MAX {
                        dist[w] = dist[v] + 1;
                        queue.push_back(w);
                    }
                }
            }
            best = best.max(dist.into_iter().max().unwrap_or(0));
        }
        (best != usize::MAX).then_some(best)
    }
}

/// Balanced rooted tree in level order: the parent of `i` is
/// `(i - 1) / branching`.
pub fn gen_hierarchy(n: usize, branching: usize) -> Result<Graph, DiffusionError> {
    if n == 0 || branching < 2 {
        return Err(DiffusionError::InvalidParams(format!(
            "hierarchy needs n >= 1 and branching >= 2 (got n={n}, branching={branching})"
        )));
    }
    Ok(Graph::new(n, (1..n).map(|i| ((i - 1) / branching, i))))
}

/// Ring of cliques. Agents are split into consecutive cells of
/// `cell_size`; each cell is a clique, and neighbouring cells on the ring
/// are joined by two vertex-disjoint bridges: cell `j`'s second and third
/// agents connect to cell `j+1`'s first and second.
pub fn gen_fractal(n: usize, cell_size: usize) -> Result<Graph, DiffusionError> {
    if cell_size < 3 || n == 0 || !n.is_multiple_of(cell_size) {
        return Err(DiffusionError::InvalidParams(format!(
            "fractal needs cell_size >= 3 dividing n (got n={n}, cell_size={cell_size})"
        )));
    }
    let cells = n / cell_size;
    let mut edges = Vec::new();
    for c in 0..cells {
        let base = c * cell_size;
        for i in 0..cell_size {
            for j in i + 1..cell_size {
                edges.push((base + i, base + j));
            }
        }
    }
    let ring_pairs = match cells {
        1 => 0,
        2 => 1,
        k => k,
    };
    for c in 0..ring_pairs {
        let here = c * cell_size;
        let next = ((c + 1) % cells) * cell_size;
        edges.push((here + 1, next));
        edges.push((here + 2, next + 1));
    }
    Ok(Graph::new(n, edges))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    Fractal,
    Hierarchy,
}

impl Topology {
    pub fn name(self) -> &'static str {
        match self {
            Topology::Fractal => "fractal",
            Topology::Hierarchy => "hierarchy",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IsolationStrategy {
    /// Uniform among agents that are not yet isolated.
    Random,
    /// Highest live degree, lowest id on ties.
    MaxDegree,
}

/// Agents × knowledge × tasks. Only the agent-agent layer drives dynamics.
#[derive(Debug, Clone, PartialEq)]
pub struct MetaNetwork {
    graph: Graph,
    knowledge: usize,
    knows: Vec<Vec<bool>>,
    known_total: usize,
    tasks: Vec<usize>,
    isolated: Vec<bool>,
}

impl MetaNetwork {
    /// Agent `i` knows unit `i mod knowledge` and is assigned task `i`.
    pub fn new(graph: Graph, knowledge: usize) -> Self {
        let n = graph.node_count();
        assert!(knowledge > 0, "need at least one knowledge unit");
        let mut knows = vec![vec![false; knowledge]; n];
        for (i, row) in knows.iter_mut().enumerate() {
            row[i % knowledge] = true;
        }
        MetaNetwork {
            graph,
            knowledge,
            knows,
            known_total: n,
            tasks: (0..n).collect(),
            isolated: vec![false; n],
        }
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn agent_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn knowledge_count(&self) -> usize {
        self.knowledge
    }

    pub fn task_of(&self, agent: usize) -> usize {
        self.tasks[agent]
    }

    pub fn knows(&self, agent: usize, unit: usize) -> bool {
        self.knows[agent][unit]
    }

    pub fn known_units(&self, agent: usize) -> impl Iterator<Item = usize> + '_ {
        self.knows[agent]
            .iter()
            .enumerate()
            .filter_map(|(u, &k)| k.then_some(u))
    }

    /// Marks `unit` as known by `agent`.
    pub fn teach(&mut self, agent: usize, unit: usize) {
        if !std::mem::replace(&mut self.knows[agent][unit], true) {
            self.known_total += 1;
        }
    }

    pub fn is_isolated(&self, agent: usize) -> bool {
        self.isolated[agent]
    }

    pub fn isolated(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.agent_count()).filter(|&a| self.isolated[a])
    }

    /// Edges whose endpoints are both still connected, in canonical order.
    pub fn live_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.graph
            .edges()
            .iter()
            .copied()
            .filter(|&(u, v)| !self.isolated[u] && !self.isolated[v])
    }

    pub fn live_degree(&self, agent: usize) -> usize {
        if self.isolated[agent] {
            return 0;
        }
        self.graph
            .neighbors(agent)
            .iter()
            .filter(|&&w| !self.isolated[w])
            .count()
    }

    /// `Σ |knows(a)| / (agents × knowledge)`
    pub fn diffusion_measure(&self) -> f64 {
        self.known_total as f64 / (self.agent_count() * self.knowledge) as f64
    }

    /// One synchronous round. Each live edge is visited in canonical order,
    /// `u → v` before `v → u`; every direction draws one uniform `f64` for
    /// the transmit decision and, when transmitting with something to send,
    /// one index into the sender's sorted list of missing units.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R, p: f64) {
        let mut transfers = Vec::new();
        for (u, v) in self.live_edges() {
            for (from, to) in [(u, v), (v, u)] {
                if rng.gen::<f64>() >= p {
                    continue;
                }
                let missing: Vec<usize> = (0..self.knowledge)
                    .filter(|&k| self.knows[from][k] && !self.knows[to][k])
                    .collect();
                if !missing.is_empty() {
                    transfers.push((to, missing[rng.gen_range(0..missing.len())]));
                }
            }
        }
        for (to, unit) in transfers {
            self.teach(to, unit);
        }
    }

    /// Cuts one agent off from the network. Its knowledge is kept.
    pub fn isolate<R: Rng + ?Sized>(
        &mut self,
        strategy: IsolationStrategy,
        rng: &mut R,
    ) -> Result<usize, DiffusionError> {
        let live: Vec<usize> = (0..self.agent_count()).filter(|&a| !self.isolated[a]).collect();
        if live.is_empty() {
            return Err(DiffusionError::NoAgentsLeft);
        }
        let chosen = match strategy {
            IsolationStrategy::Random => live[rng.gen_range(0..live.len())],
            IsolationStrategy::MaxDegree => {
                let mut best = live[0];
                for &a in &live[1..] {
                    if self.live_degree(a) > self.live_degree(best) {
                        best = a;
                    }
                }
                best
            }
        };
        self.isolated[chosen] = true;
        Ok(chosen)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsolationEvent {
    /// Step before whose transmissions the isolation happens (1-based).
    pub time: usize,
    #[serde(default = "default_strategy")]
    pub strategy: IsolationStrategy,
}

fn default_strategy() -> IsolationStrategy {
    IsolationStrategy::MaxDegree
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSpec {
    pub topology: Topology,
    pub agents: usize,
    pub knowledge: usize,
    /// Hierarchy only.
    pub branching: usize,
    /// Fractal only.
    pub cell_size: usize,
    pub horizon: usize,
    pub transmit_probability: f64,
    pub isolations: Vec<IsolationEvent>,
    pub seed: u64,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        ScenarioSpec {
            topology: Topology::Fractal,
            agents: 15,
            knowledge: 15,
            branching: 2,
            cell_size: 3,
            horizon: 150,
            transmit_probability: 0.5,
            isolations: Vec::new(),
            seed: 0,
        }
    }
}

/// Isolation times of the single-isolation scenario.
pub const ONE_ISOLATION: [usize; 1] = [10];
/// First isolation at 10, then gaps of 10, 20, 30 and 50.
pub const FIVE_ISOLATIONS: [usize; 5] = [10, 20, 40, 70, 120];

impl ScenarioSpec {
    /// No isolation.
    pub fn baseline(topology: Topology) -> Self {
        ScenarioSpec {
            topology,
            ..Self::default()
        }
    }

    pub fn with_isolations(mut self, times: &[usize], strategy: IsolationStrategy) -> Self {
        self.isolations = times
            .iter()
            .map(|&time| IsolationEvent { time, strategy })
            .collect();
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), DiffusionError> {
        let p = self.transmit_probability;
        if !(p > 0.0 && p <= 1.0) {
            return Err(DiffusionError::InvalidParams(format!(
                "transmit_probability must be in (0, 1], got {p}"
            )));
        }
        if self.knowledge == 0 {
            return Err(DiffusionError::InvalidParams("knowledge must be >= 1".into()));
        }
        if let Some(e) = self.isolations.iter().find(|e| e.time == 0 || e.time > self.horizon) {
            return Err(DiffusionError::InvalidParams(format!(
                "isolation at time {} outside 1..={}",
                e.time, self.horizon
            )));
        }
        self.graph().map(|_| ())
    }

    pub fn graph(&self) -> Result<Graph, DiffusionError> {
        match self.topology {
            Topology::Fractal => gen_fractal(self.agents, self.cell_size),
            Topology::Hierarchy => gen_hierarchy(self.agents, self.branching),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IsolationRecord {
    pub time: usize,
    pub agent: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiffusionTrace {
    /// `values[t]` is the measure after step `t`; `values[0]` is the start.
    pub values: Vec<f64>,
    pub isolations: Vec<IsolationRecord>,
}

impl DiffusionTrace {
    pub fn last(&self) -> f64 {
        *self.values.last().expect("trace has the initial value")
    }
}

/// Runs one scenario; the result depends only on `spec`.
pub fn run_scenario(spec: &ScenarioSpec) -> Result<DiffusionTrace, DiffusionError> {
    spec.validate()?;
    let mut net = MetaNetwork::new(spec.graph()?, spec.knowledge);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut events = spec.isolations.clone();
    events.sort_by_key(|e| e.time);
    let mut events = events.into_iter().peekable();

    let mut values = Vec::with_capacity(spec.horizon + 1);
    let mut isolations = Vec::new();
    values.push(net.diffusion_measure());
    for t in 1..=spec.horizon {
        while let Some(e) = events.next_if(|e| e.time == t) {
            let agent = net.isolate(e.strategy, &mut rng)?;
            log::debug!("t={t}: isolated agent {agent}");
            isolations.push(IsolationRecord { time: t, agent });
        }
        net.step(&mut rng, spec.transmit_probability);
        values.push(net.diffusion_measure());
    }
    Ok(DiffusionTrace { values, isolations })
}

/// Per-step mean, min and max over replicates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateTrace {
    pub replicates: usize,
    pub mean: Vec<f64>,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl AggregateTrace {
    /// Combines traces in the given order, so equal inputs give
    /// bit-identical sums.
    pub fn from_traces(traces: &[DiffusionTrace]) -> Self {
        let len = traces.first().map_or(0, |t| t.values.len());
        let mut sum = vec![0.0; len];
        let mut min = vec![f64::INFINITY; len];
        let mut max = vec![f64::NEG_INFINITY; len];
        for t in traces {
            for (i, &v) in t.values.iter().enumerate() {
                sum[i] += v;
                min[i] = min[i].min(v);
                max[i] = max[i].max(v);
            }
        }
        let n = traces.len() as f64;
        AggregateTrace {
            replicates: traces.len(),
            mean: sum.into_iter().map(|s| s / n).collect(),
            min,
            max,
        }
    }

    pub fn final_mean(&self) -> f64 {
        *self.mean.last().expect("non-empty aggregate")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarlo {
    pub aggregate: AggregateTrace,
    /// Replicate `r` was run with seed `spec.seed + r`.
    pub traces: Vec<DiffusionTrace>,
}

/// Runs `replicates` independent copies of `spec` in parallel.
pub fn monte_carlo(spec: &ScenarioSpec, replicates: usize) -> Result<MonteCarlo, DiffusionError> {
    if replicates == 0 {
        return Err(DiffusionError::InvalidParams("replicates must be >= 1".into()));
    }
    spec.validate()?;
    let traces = (0..replicates as u64)
        .into_par_iter()
        .map(|r| run_scenario(&spec.clone().with_seed(spec.seed.wrapping_add(r))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(MonteCarlo {
        aggregate: AggregateTrace::from_traces(&traces),
        traces,
    })
}

/// `step,diffusion`
pub fn write_trace_csv<W: io::Write>(w: W, trace: &DiffusionTrace) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["step", "diffusion"])?;
    for (t, v) in trace.values.iter().enumerate() {
        out.write_record([t.to_string(), v.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

/// `step,mean,min,max`
pub fn write_aggregate_csv<W: io::Write>(w: W, agg: &AggregateTrace) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["step", "mean", "min", "max"])?;
    for t in 0..agg.mean.len() {
        out.write_record([
            t.to_string(),
            agg.mean[t].to_string(),
            agg.min[t].to_string(),
            agg.max[t].to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// `replicate,step,diffusion`
pub fn write_replicates_csv<W: io::Write>(w: W, traces: &[DiffusionTrace]) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["replicate", "step", "diffusion"])?;
    for (r, trace) in traces.iter().enumerate() {
        for (t, v) in trace.values.iter().enumerate() {
            out.write_record([r.to_string(), t.to_string(), v.to_string()])?;
        }
    }
    out.flush()?;
    Ok(())
}
