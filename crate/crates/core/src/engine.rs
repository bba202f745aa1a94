//! Monte-Carlo drop orchestration: placement, duty cycling, channel
//! sampling, backhaul reservation, two-slot scheduling, pair subchannel
//! allocation, SINR/rate evaluation, and utility metrics.
//!
//! Scheduling is two-pass: RBs are allocated on interference-free rate
//! estimates, then SINR and rates are evaluated under the committed
//! allocation. Drops are independent; drop seeds derive from the master
//! seed by counter mixing, so parallel and serial execution agree.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{rate_per_rb, sample_shadowing, sinr_per_rb, ChannelState, NodeTable};
use crate::config::{AllocationMode, SimConfig};
use crate::error::{Result, SimError};
use crate::graphalloc::{
    build_interference_graph, full_reuse_assign, run_distributed_coloring, ColoringState,
};
use crate::grid::{AllocationMatrix, LinkKind, ResourceGrid, TxRecord, TxSource};
use crate::metrics::{MetricsReport, PopulationStats};
use crate::scheduler::{
    estimate_backhaul_rbs, fill_access_slot, fill_backhaul_slot, MtcgReservation, PlanUser,
    SectorPlan,
};
use crate::topology::{
    apply_duty_cycle, build_layout_with, place_mtcds, place_mtcgs, place_ues, roster_records,
    sector_nodes, NetworkLayout, Node, NodeId, NodeKind, SECTORS_PER_SITE,
};

/// Per-drop utility samples, restricted to the statistics region.
#[derive(Clone, Debug, Default)]
pub struct DropSample {
    pub h2h: Vec<f64>,
    pub m2m_direct: Vec<f64>,
    pub pairs: Vec<f64>,
    /// Mean per-cell aggregate utility sum_H U + lambda * sum_M U.
    pub objective: f64,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Counter-based drop seed derivation from the master seed.
pub fn derive_drop_seed(master_seed: u64, drop_index: u64) -> u64 {
    splitmix64(master_seed ^ splitmix64(drop_index.wrapping_add(1)))
}

fn stream_rng(drop_seed: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(drop_seed ^ splitmix64(stream.wrapping_add(0x51))))
}

struct PairEval {
    tx: NodeId,
    sector: usize,
    sum_rate: f64,
    channels: usize,
}

/// Placement and duty cycling of one drop's node population.
fn place_drop(cfg: &SimConfig, layout: &NetworkLayout, drop_seed: u64) -> Result<Vec<Node>> {
    let mut rng_place = stream_rng(drop_seed, 0);
    let mut rng_duty = stream_rng(drop_seed, 1);
    let mut next_id = 0u32;
    let mut nodes = sector_nodes(layout, &mut next_id);
    let ant = &cfg.channel.antenna;
    nodes.extend(place_ues(
        layout,
        cfg.population.ues_per_sector,
        ant,
        &mut rng_place,
        &mut next_id,
    ));
    if cfg.run.m2m_enabled {
        nodes.extend(place_mtcds(
            layout,
            cfg.population.mtcds_per_sector,
            cfg.population.indoor_pairs_per_block,
            ant,
            &mut rng_place,
            &mut next_id,
        )?);
        nodes.extend(place_mtcgs(
            layout,
            cfg.population.mtcgs_per_sector,
            &mut rng_place,
            &mut next_id,
        ));
    }
    apply_duty_cycle(&mut nodes, cfg.population.duty_cycle, &mut rng_duty)?;
    Ok(nodes)
}

/// Flat roster export of one drop's placement, for inspection and
/// plotting (`id,kind,x,y,sector,peer`).
pub fn drop_roster(cfg: &SimConfig, drop_index: u64) -> Result<String> {
    cfg.validate()?;
    let layout = build_layout_with(
        cfg.layout.num_sites,
        cfg.layout.isd_m,
        cfg.layout.wraparound,
        &cfg.layout.block,
    )?;
    let nodes = place_drop(cfg, &layout, derive_drop_seed(cfg.run.seed, drop_index))?;
    Ok(roster_records(&nodes))
}

pub fn run_drop(cfg: &SimConfig, drop_index: u64) -> Result<DropSample> {
    cfg.validate()?;
    let layout = build_layout_with(
        cfg.layout.num_sites,
        cfg.layout.isd_m,
        cfg.layout.wraparound,
        &cfg.layout.block,
    )?;
    let drop_seed = derive_drop_seed(cfg.run.seed, drop_index);
    let mut rng_shadow = stream_rng(drop_seed, 2);
    let mut rng_color = stream_rng(drop_seed, 3);
    let nodes = place_drop(cfg, &layout, drop_seed)?;

    let receivers: Vec<Node> = nodes
        .iter()
        .filter(|n| n.kind != NodeKind::EnbSector)
        .cloned()
        .collect();
    let shadowing = sample_shadowing(
        &layout,
        &receivers,
        cfg.channel.shadowing_sigma_db,
        cfg.channel.inter_site_corr,
        &mut rng_shadow,
    )?;
    let state = ChannelState {
        layout: &layout,
        params: &cfg.channel,
        budget: &cfg.budget,
        shadowing,
    };
    let table = NodeTable::new(&nodes);
    let grid = ResourceGrid {
        num_rbs: cfg.budget.num_rbs,
        num_slots: 2,
    };
    let noise = cfg.budget.noise_dbm_per_rb();

    // Per-sector scheduling plans with flat interference-free estimates.
    let mut plans: Vec<SectorPlan> = Vec::with_capacity(layout.num_sectors());
    for sector in 0..layout.num_sectors() {
        let mut users = Vec::new();
        let mut user_links = Vec::new();
        for n in &nodes {
            if !n.active || n.serving_sector != Some(sector) {
                continue;
            }
            let (m2m, utility, link) = match n.kind {
                NodeKind::Ue => (false, cfg.utility.ue.clone(), LinkKind::EnbUe),
                NodeKind::Mtcd if !n.indoor => (true, cfg.utility.mtcd.clone(), LinkKind::EnbMtcd),
                _ => continue,
            };
            let snr = state.macro_rx_power_dbm(sector, n) - noise;
            users.push(PlanUser {
                id: n.id.0,
                m2m,
                utility,
                rate_estimate: rate_per_rb(snr, &cfg.budget),
            });
            user_links.push(TxRecord {
                link,
                tx: TxSource::Sector(sector),
                rx: n.id,
                tx_share: cfg.budget.num_rbs,
            });
        }
        plans.push(SectorPlan {
            sector,
            users,
            user_links,
            mtcg: None,
            cell_reserved: 0,
        });
    }

    // Semi-static backhaul reservation, packed per cell.
    if cfg.run.m2m_enabled {
        for site in 0..layout.num_sites() {
            let mut offset = 0usize;
            for k in 0..SECTORS_PER_SITE {
                let sector = site * SECTORS_PER_SITE + k;
                let mtcg = nodes
                    .iter()
                    .find(|n| n.kind == NodeKind::Mtcg && n.serving_sector == Some(sector));
                let Some(mtcg) = mtcg else { continue };
                let group: Vec<&Node> = nodes
                    .iter()
                    .filter(|n| {
                        n.kind == NodeKind::Mtcd
                            && n.indoor
                            && n.active
                            && n.serving_sector == Some(sector)
                    })
                    .collect();
                if group.is_empty() {
                    continue;
                }
                let demand = group.len() as f64 * cfg.scheduler.mtcd_demand_bps;
                let snr = state.macro_rx_power_dbm(sector, mtcg) - noise;
                let avg_rate = rate_per_rb(snr, &cfg.budget);
                if avg_rate <= 0.0 {
                    continue; // backhaul in outage; nothing to reserve
                }
                let count =
                    estimate_backhaul_rbs(demand, avg_rate, cfg.budget.num_rbs - offset)?;
                if count == 0 {
                    continue;
                }
                plans[sector].mtcg = Some(MtcgReservation {
                    mtcg: mtcg.id,
                    access_rx: group.iter().map(|n| n.id).min().unwrap_or(mtcg.id),
                    rb_start: offset,
                    rb_count: count,
                });
                offset += count;
            }
            for k in 0..SECTORS_PER_SITE {
                plans[site * SECTORS_PER_SITE + k].cell_reserved = offset;
            }
        }
    }

    let mut alloc = AllocationMatrix::new();
    fill_backhaul_slot(0, &grid, &plans, cfg.scheduler.lambda, &mut alloc)?;
    fill_access_slot(1, &grid, &plans, cfg.scheduler.lambda, &mut alloc)?;

    let max_reserved = plans.iter().map(|p| p.cell_reserved).max().unwrap_or(0);

    // MTCD-to-MTCD pairs on the access slot's non-reserved subchannels.
    let mut pair_evals: Vec<PairEval> = Vec::new();
    if cfg.run.m2m_enabled {
        let pair_links: Vec<(&Node, &Node)> = nodes
            .iter()
            .filter(|n| {
                n.kind == NodeKind::Mtcd
                    && n.indoor
                    && n.active
                    && n.pair_peer.map_or(false, |p| n.id < p)
            })
            .map(|tx| {
                let rx = table.get(tx.pair_peer.unwrap()).expect("peer exists");
                (tx, rx)
            })
            .collect();
        if !pair_links.is_empty() {
            let num_colors = cfg
                .graph
                .num_colors
                .unwrap_or_else(|| cfg.budget.num_rbs.saturating_sub(max_reserved))
                .clamp(1, cfg.budget.num_rbs);
            let base_rb = cfg.budget.num_rbs - num_colors;
            let bp = cfg.channel.d2d_breakpoint_m;
            let serving: Vec<f64> = pair_links
                .iter()
                .map(|(tx, rx)| {
                    -crate::channel::pathloss_d2d(
                        layout.distance(tx.position, rx.position).max(0.01),
                        bp,
                    )
                    .expect("clamped distance")
                })
                .collect();
            let graph = build_interference_graph(
                &serving,
                |i, j| {
                    let (tx, _) = pair_links[i];
                    let (_, rx) = pair_links[j];
                    -crate::channel::pathloss_d2d(
                        layout.distance(tx.position, rx.position).max(0.01),
                        bp,
                    )
                    .expect("clamped distance")
                },
                cfg.graph.threshold_db,
            );
            let coloring: ColoringState = match cfg.run.allocation_mode {
                AllocationMode::FullReuse => full_reuse_assign(pair_links.len(), num_colors),
                AllocationMode::GraphBased => {
                    run_distributed_coloring(
                        &graph,
                        num_colors,
                        cfg.graph.rounds,
                        cfg.graph.p0,
                        cfg.graph.update_prob,
                        cfg.graph.noise_prob,
                        &mut rng_color,
                    )?
                    .final_state
                }
            };
            for (idx, (tx, rx)) in pair_links.iter().enumerate() {
                let held = &coloring.colors[idx];
                for &c in held {
                    alloc.add(
                        1,
                        base_rb + c,
                        TxRecord {
                            link: LinkKind::MtcdMtcd,
                            tx: TxSource::Node(tx.id),
                            rx: rx.id,
                            tx_share: held.len(),
                        },
                    );
                }
                pair_evals.push(PairEval {
                    tx: tx.id,
                    sector: tx.serving_sector.unwrap_or(0),
                    sum_rate: 0.0,
                    channels: held.len(),
                });
            }
        }
    }

    alloc.validate(&grid, SECTORS_PER_SITE)?;

    // Second pass: SINR and rates under the committed allocation.
    let mut user_rate: std::collections::HashMap<NodeId, f64> = std::collections::HashMap::new();
    let pair_index: std::collections::HashMap<NodeId, usize> = pair_evals
        .iter()
        .enumerate()
        .map(|(i, p)| (p.tx, i))
        .collect();
    for (slot, rb, rec) in alloc.iter() {
        match rec.link {
            LinkKind::EnbUe | LinkKind::EnbMtcd => {
                let sinr = sinr_per_rb(rec, slot, rb, &alloc, &state, &table)?;
                *user_rate.entry(rec.rx).or_insert(0.0) += rate_per_rb(sinr, &cfg.budget);
            }
            LinkKind::MtcdMtcd => {
                let sinr = sinr_per_rb(rec, slot, rb, &alloc, &state, &table)?;
                if let TxSource::Node(tx) = rec.tx {
                    if let Some(&i) = pair_index.get(&tx) {
                        pair_evals[i].sum_rate += rate_per_rb(sinr, &cfg.budget);
                    }
                }
            }
            LinkKind::EnbMtcg | LinkKind::MtcgMtcd => {}
        }
    }

    // Statistics region: the central site unless wraparound removes the
    // layout edge effect.
    let stats_sites: Vec<usize> = if cfg.layout.wraparound {
        (0..layout.num_sites()).collect()
    } else {
        vec![0]
    };
    let in_stats = |sector: usize| stats_sites.contains(&(sector / SECTORS_PER_SITE));
    let slots = grid.num_slots as f64;

    let mut sample = DropSample::default();
    let mut cell_obj = vec![0.0; layout.num_sites()];
    for n in &nodes {
        if !n.active {
            continue;
        }
        let Some(sector) = n.serving_sector else { continue };
        let rate = user_rate.get(&n.id).copied().unwrap_or(0.0) / slots;
        match n.kind {
            NodeKind::Ue => {
                let u = cfg.utility.ue.eval(rate)?;
                cell_obj[sector / SECTORS_PER_SITE] += u;
                if in_stats(sector) {
                    sample.h2h.push(u);
                }
            }
            NodeKind::Mtcd if !n.indoor => {
                let u = cfg.utility.mtcd.eval(rate)?;
                cell_obj[sector / SECTORS_PER_SITE] += cfg.scheduler.lambda * u;
                if in_stats(sector) {
                    sample.m2m_direct.push(u);
                }
            }
            _ => {}
        }
    }
    for p in &pair_evals {
        let per_channel = if p.channels > 0 {
            p.sum_rate / p.channels as f64
        } else {
            0.0
        };
        let u = cfg.utility.pair.eval(per_channel)?;
        cell_obj[p.sector / SECTORS_PER_SITE] += cfg.scheduler.lambda * u;
        if in_stats(p.sector) {
            sample.pairs.push(u);
        }
    }
    sample.objective = stats_sites.iter().map(|&s| cell_obj[s]).sum::<f64>()
        / stats_sites.len() as f64;
    Ok(sample)
}

/// Runs `num_drops` drops with counter-derived seeds and aggregates the
/// samples. `workers > 1` parallelizes drops; output is identical to
/// serial execution.
pub fn run_campaign(cfg: &SimConfig, workers: usize) -> Result<MetricsReport> {
    cfg.validate()?;
    let drops: Vec<u64> = (0..cfg.run.num_drops as u64).collect();
    let samples: Vec<DropSample> = if workers > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| SimError::Config(format!("worker pool: {e}")))?;
        pool.install(|| {
            drops
                .par_iter()
                .map(|&k| run_drop(cfg, k))
                .collect::<Result<Vec<_>>>()
        })?
    } else {
        drops
            .iter()
            .map(|&k| run_drop(cfg, k))
            .collect::<Result<Vec<_>>>()?
    };

    let mut h2h = Vec::new();
    let mut m2m = Vec::new();
    let mut pairs = Vec::new();
    let mut objectives = Vec::with_capacity(samples.len());
    for s in &samples {
        h2h.extend_from_slice(&s.h2h);
        m2m.extend_from_slice(&s.m2m_direct);
        pairs.extend_from_slice(&s.pairs);
        objectives.push(s.objective);
    }
    let aggregate = objectives.iter().sum::<f64>() / objectives.len() as f64;
    let stats = |v: Vec<f64>| -> Result<Option<PopulationStats>> {
        if v.is_empty() {
            Ok(None)
        } else {
            PopulationStats::from_samples(v).map(Some)
        }
    };
    Ok(MetricsReport {
        h2h: stats(h2h)?,
        m2m_direct: stats(m2m)?,
        pairs: stats(pairs)?,
        aggregate_cell_utility: aggregate,
        per_drop_objective: objectives,
    })
}
