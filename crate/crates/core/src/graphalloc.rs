//! Distributed graph-based subchannel assignment for MTCD-to-MTCD
//! pairs, plus the full-reuse baseline.
//!
//! Each vertex is one active pair; an edge marks two pairs whose mutual
//! interference is within `gain_threshold_db` of the serving signal.
//! Vertices synchronously re-pick the color minimizing conflicts with
//! their neighbors' published colors, with random tie-breaking, and
//! probabilistically activate extra subchannels.

use rand::Rng;

use crate::error::{Result, SimError};

#[derive(Clone, Debug)]
pub struct InterferenceGraph {
    pub num_vertices: usize,
    pub adj: Vec<Vec<usize>>,
    pub gain_threshold_db: f64,
}

impl InterferenceGraph {
    pub fn from_edges(num_vertices: usize, edges: &[(usize, usize)], threshold_db: f64) -> Self {
        let mut adj = vec![Vec::new(); num_vertices];
        for &(u, v) in edges {
            if u == v {
                continue;
            }
            if !adj[u].contains(&v) {
                adj[u].push(v);
                adj[v].push(u);
            }
        }
        for n in &mut adj {
            n.sort_unstable();
        }
        InterferenceGraph {
            num_vertices,
            adj,
            gain_threshold_db: threshold_db,
        }
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (u, ns) in self.adj.iter().enumerate() {
            for &v in ns {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Adjacency-list text export, one `vertex: neighbors...` per line.
    pub fn export(&self) -> String {
        let mut out = String::new();
        for (u, ns) in self.adj.iter().enumerate() {
            let list: Vec<String> = ns.iter().map(|v| v.to_string()).collect();
            out.push_str(&format!("{}: {}\n", u, list.join(" ")));
        }
        out
    }
}

/// Builds the interference graph from channel gains (dB). An edge (u,v)
/// exists when either victim's serving gain exceeds the strongest
/// cross-pair interfering gain by less than the threshold.
pub fn build_interference_graph(
    serving_gain_db: &[f64],
    interference_gain_db: impl Fn(usize, usize) -> f64,
    threshold_db: f64,
) -> InterferenceGraph {
    let n = serving_gain_db.len();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let into_v = serving_gain_db[v] - interference_gain_db(u, v) < threshold_db;
            let into_u = serving_gain_db[u] - interference_gain_db(v, u) < threshold_db;
            if into_v || into_u {
                edges.push((u, v));
            }
        }
    }
    InterferenceGraph::from_edges(n, &edges, threshold_db)
}

/// Per-vertex sets of held colors (subchannels).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColoringState {
    pub colors: Vec<Vec<usize>>,
    pub num_colors: usize,
}

impl ColoringState {
    pub fn held(&self, v: usize) -> &[usize] {
        &self.colors[v]
    }
}

/// Full-reuse baseline: every pair transmits on every subchannel.
pub fn full_reuse_assign(num_pairs: usize, num_colors: usize) -> ColoringState {
    ColoringState {
        colors: vec![(0..num_colors).collect(); num_pairs],
        num_colors,
    }
}

/// Total edge-color incidences: sum over edges of shared colors.
pub fn edge_color_conflicts(graph: &InterferenceGraph, state: &ColoringState) -> usize {
    graph
        .edges()
        .iter()
        .map(|&(u, v)| {
            state.colors[u]
                .iter()
                .filter(|c| state.colors[v].contains(c))
                .count()
        })
        .sum()
}

/// Number of edges whose endpoints share at least one color.
pub fn conflicting_edges(graph: &InterferenceGraph, state: &ColoringState) -> usize {
    graph
        .edges()
        .iter()
        .filter(|&&(u, v)| state.colors[u].iter().any(|c| state.colors[v].contains(c)))
        .count()
}

fn neighbor_color_counts(
    v: usize,
    snapshot: &[Vec<usize>],
    graph: &InterferenceGraph,
    num_colors: usize,
) -> Vec<usize> {
    let mut counts = vec![0usize; num_colors];
    for &n in &graph.adj[v] {
        for &c in &snapshot[n] {
            counts[c] += 1;
        }
    }
    counts
}

fn pick_min_conflict<R: Rng>(
    counts: &[usize],
    exclude: &[usize],
    rng: &mut R,
) -> Option<usize> {
    let candidates: Vec<usize> = (0..counts.len()).filter(|c| !exclude.contains(c)).collect();
    let min = candidates.iter().map(|&c| counts[c]).min()?;
    let minimizers: Vec<usize> = candidates.into_iter().filter(|&c| counts[c] == min).collect();
    Some(minimizers[rng.gen_range(0..minimizers.len())])
}

/// Re-selects each held color slot of `v` to minimize conflicts with the
/// neighbors' published colors; ties broken uniformly at random.
pub fn local_color_step<R: Rng>(
    v: usize,
    snapshot: &[Vec<usize>],
    graph: &InterferenceGraph,
    num_colors: usize,
    rng: &mut R,
) -> Vec<usize> {
    let counts = neighbor_color_counts(v, snapshot, graph, num_colors);
    let held = snapshot[v].len().min(num_colors);
    let mut chosen: Vec<usize> = Vec::with_capacity(held);
    for _ in 0..held {
        if let Some(c) = pick_min_conflict(&counts, &chosen, rng) {
            chosen.push(c);
        }
    }
    chosen.sort_unstable();
    chosen
}

/// p = p0 * (1 - deg/(deg_max+1)) * (1 - held/C): decreasing in degree
/// and in the share of subchannels already occupied.
pub fn activation_probability(
    degree: usize,
    deg_max: usize,
    held: usize,
    num_colors: usize,
    p0: f64,
) -> f64 {
    if num_colors == 0 {
        return 0.0;
    }
    p0 * (1.0 - degree as f64 / (deg_max as f64 + 1.0))
        * (1.0 - held as f64 / num_colors as f64)
}

/// One vertex's probabilistic decision to occupy one more subchannel;
/// the new color is acquired via the conflict-minimizing rule.
pub fn maybe_activate_extra_channel<R: Rng>(
    v: usize,
    state: &mut ColoringState,
    graph: &InterferenceGraph,
    deg_max: usize,
    p0: f64,
    rng: &mut R,
) -> bool {
    if state.colors[v].len() >= state.num_colors {
        return false;
    }
    let p = activation_probability(
        graph.degree(v),
        deg_max,
        state.colors[v].len(),
        state.num_colors,
        p0,
    );
    if rng.gen::<f64>() >= p {
        return false;
    }
    let counts = neighbor_color_counts(v, &state.colors, graph, state.num_colors);
    if let Some(c) = pick_min_conflict(&counts, &state.colors[v], rng) {
        state.colors[v].push(c);
        state.colors[v].sort_unstable();
        true
    } else {
        false
    }
}

#[derive(Clone, Debug)]
pub struct ColoringOutcome {
    pub final_state: ColoringState,
    /// State of the round with the fewest edge-color conflicts.
    pub best_state: ColoringState,
    pub best_conflicts: usize,
    /// Edge-color conflicts after each round's recolor phase.
    pub conflict_trace: Vec<usize>,
}

/// Synchronous rounds of conflict-minimizing recoloring followed by an
/// activation phase. Each round every vertex decides against a frozen
/// snapshot of the previous round's published colors; per-vertex update
/// gating (`update_prob`) breaks the oscillations synchronous updates
/// are prone to. When a round reaches a fixed point, each vertex
/// re-randomizes its colors with probability `noise_prob` and the search
/// continues, escaping strict local minima; with `noise_prob` = 0 the
/// protocol halts at the fixed point instead. The best state over all
/// rounds is tracked separately.
pub fn run_distributed_coloring<R: Rng>(
    graph: &InterferenceGraph,
    num_colors: usize,
    iterations: usize,
    p0: f64,
    update_prob: f64,
    noise_prob: f64,
    rng: &mut R,
) -> Result<ColoringOutcome> {
    if iterations < 1 {
        return Err(SimError::Domain("iteration budget must be >= 1".into()));
    }
    if num_colors == 0 {
        return Err(SimError::Config("at least one subchannel is required".into()));
    }
    let n = graph.num_vertices;
    let deg_max = graph.max_degree();
    let mut state = ColoringState {
        colors: (0..n).map(|_| vec![rng.gen_range(0..num_colors)]).collect(),
        num_colors,
    };
    let mut best_state = state.clone();
    let mut best_conflicts = edge_color_conflicts(graph, &state);
    let mut trace = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let snapshot = state.colors.clone();
        let mut any_would_change = false;
        for v in 0..n {
            let gated = rng.gen::<f64>() < update_prob;
            let candidate = local_color_step(v, &snapshot, graph, num_colors, rng);
            if candidate != snapshot[v] {
                any_would_change = true;
                if gated {
                    state.colors[v] = candidate;
                }
            }
        }
        let conflicts = edge_color_conflicts(graph, &state);
        trace.push(conflicts);
        if conflicts < best_conflicts {
            best_conflicts = conflicts;
            best_state = state.clone();
        }
        let mut any_activated = false;
        if p0 > 0.0 {
            for v in 0..n {
                if maybe_activate_extra_channel(v, &mut state, graph, deg_max, p0, rng) {
                    any_activated = true;
                }
            }
        }
        if !any_would_change && !any_activated {
            if noise_prob <= 0.0 {
                break;
            }
            // stagnation restart: each vertex independently re-randomizes
            // its held colors; the best state so far is already recorded
            for v in 0..n {
                if rng.gen::<f64>() >= noise_prob {
                    continue;
                }
                let held = state.colors[v].len().min(num_colors);
                let mut chosen = Vec::with_capacity(held);
                while chosen.len() < held {
                    let c = rng.gen_range(0..num_colors);
                    if !chosen.contains(&c) {
                        chosen.push(c);
                    }
                }
                chosen.sort_unstable();
                state.colors[v] = chosen;
            }
        }
    }
    Ok(ColoringOutcome {
        final_state: state,
        best_state,
        best_conflicts,
        conflict_trace: trace,
    })
}
