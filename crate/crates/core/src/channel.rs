//! Pathloss, shadowing, antenna gain, noise, and per-RB SINR for the
//! five downlink link types.
//!
//! Macro links use the 128.1 + 37.6 log10(R) urban formula with
//! correlated lognormal shadowing (identical across sectors of a site,
//! correlation `inter_site_corr` between sites). Short-range links
//! (MTCG-to-MTCD, MTCD-to-MTCD) use the two-branch LOS/NLOS formula.
//! Fast fading is out of scope; SINR is pathloss + shadowing + antenna.

use std::collections::HashMap;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::grid::{AllocationMatrix, LinkKind, TxRecord, TxSource};
use crate::topology::{NetworkLayout, Node, NodeId};

pub fn db_to_lin(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn lin_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

/// 3GPP-style parabolic sector pattern.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AntennaPattern {
    pub theta_3db_deg: f64,
    pub max_attenuation_db: f64,
    pub peak_gain_dbi: f64,
}

impl Default for AntennaPattern {
    fn default() -> Self {
        AntennaPattern {
            theta_3db_deg: 70.0,
            max_attenuation_db: 25.0,
            peak_gain_dbi: 14.0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelParams {
    pub shadowing_sigma_db: f64,
    pub inter_site_corr: f64,
    /// Outdoor-to-indoor loss on eNB links towards indoor receivers.
    pub penetration_db: f64,
    /// Distance floor for the macro formula.
    pub macro_dist_floor_m: f64,
    /// LOS/NLOS branch point of the short-range formula, in metres.
    pub d2d_breakpoint_m: f64,
    pub enb_tx_power_dbm: f64,
    pub antenna: AntennaPattern,
}

impl Default for ChannelParams {
    fn default() -> Self {
        ChannelParams {
            shadowing_sigma_db: 8.0,
            inter_site_corr: 0.5,
            penetration_db: 20.0,
            macro_dist_floor_m: 10.0,
            d2d_breakpoint_m: 0.3,
            enb_tx_power_dbm: 46.0,
            antenna: AntennaPattern::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkBudget {
    pub noise_figure_db: f64,
    pub noise_density_dbm_per_hz: f64,
    pub rb_bandwidth_hz: f64,
    pub num_rbs: usize,
    /// Attenuation factor of the Shannon mapping.
    pub rate_alpha: f64,
    /// Spectral-efficiency cap in bits/s/Hz.
    pub rate_cap_bps_per_hz: f64,
    /// Outage floor; rate is zero below this SINR.
    pub sinr_floor_db: f64,
}

impl Default for LinkBudget {
    fn default() -> Self {
        LinkBudget {
            noise_figure_db: 9.0,
            noise_density_dbm_per_hz: -174.0,
            rb_bandwidth_hz: 180e3,
            num_rbs: 50,
            rate_alpha: 0.75,
            rate_cap_bps_per_hz: 6.0,
            sinr_floor_db: -10.0,
        }
    }
}

impl LinkBudget {
    pub fn noise_dbm_per_rb(&self) -> f64 {
        self.noise_density_dbm_per_hz + 10.0 * self.rb_bandwidth_hz.log10() + self.noise_figure_db
    }
}

/// Urban macro pathloss, `r_km` in kilometres.
pub fn pathloss_macro(r_km: f64) -> Result<f64> {
    if r_km <= 0.0 {
        return Err(SimError::Domain(format!(
            "macro pathloss needs a positive distance, got {r_km} km"
        )));
    }
    Ok(128.1 + 37.6 * r_km.log10())
}

/// Short-range MTCD-to-MTCD pathloss, `r_m` in metres. The LOS/NLOS
/// branch is chosen purely by the distance breakpoint.
pub fn pathloss_d2d(r_m: f64, breakpoint_m: f64) -> Result<f64> {
    if r_m <= 0.0 {
        return Err(SimError::Domain(format!(
            "d2d pathloss needs a positive distance, got {r_m} m"
        )));
    }
    if r_m < breakpoint_m {
        Ok(38.5 + 20.0 * r_m.log10())
    } else {
        Ok(48.9 + 40.0 * r_m.log10())
    }
}

/// Sector antenna gain towards `angle_to_rx_deg`, peak included.
pub fn antenna_gain_db(boresight_deg: f64, angle_to_rx_deg: f64, pattern: &AntennaPattern) -> f64 {
    let mut delta = (angle_to_rx_deg - boresight_deg) % 360.0;
    if delta > 180.0 {
        delta -= 360.0;
    } else if delta <= -180.0 {
        delta += 360.0;
    }
    let atten = (12.0 * (delta / pattern.theta_3db_deg).powi(2)).min(pattern.max_attenuation_db);
    pattern.peak_gain_dbi - atten
}

/// Per-receiver lognormal shadowing, one value per site, identical
/// across the sectors of a site.
#[derive(Clone, Debug, Default)]
pub struct ShadowingMap {
    per_node: HashMap<NodeId, Vec<f64>>,
}

impl ShadowingMap {
    pub fn get(&self, site: usize, node: NodeId) -> f64 {
        self.per_node
            .get(&node)
            .and_then(|v| v.get(site))
            .copied()
            .unwrap_or(0.0)
    }
}

/// Samples correlated shadowing: per receiver, one common component and
/// one per-site component combined as sqrt(rho)*common +
/// sqrt(1-rho)*independent, each zero-mean Gaussian with variance
/// sigma^2.
pub fn sample_shadowing<R: Rng>(
    layout: &NetworkLayout,
    receivers: &[Node],
    sigma_db: f64,
    inter_site_corr: f64,
    rng: &mut R,
) -> Result<ShadowingMap> {
    if !(0.0..=1.0).contains(&inter_site_corr) {
        return Err(SimError::Domain(format!(
            "inter-site correlation must be in [0, 1], got {inter_site_corr}"
        )));
    }
    let rho_c = inter_site_corr.sqrt();
    let rho_i = (1.0 - inter_site_corr).sqrt();
    let mut map = HashMap::with_capacity(receivers.len());
    for rx in receivers {
        let common: f64 = StandardNormal.sample(rng);
        let values = (0..layout.num_sites())
            .map(|_| {
                let indep: f64 = StandardNormal.sample(rng);
                sigma_db * (rho_c * common + rho_i * indep)
            })
            .collect();
        map.insert(rx.id, values);
    }
    Ok(ShadowingMap { per_node: map })
}

/// Immutable channel snapshot for one drop.
pub struct ChannelState<'a> {
    pub layout: &'a NetworkLayout,
    pub params: &'a ChannelParams,
    pub budget: &'a LinkBudget,
    pub shadowing: ShadowingMap,
}

impl<'a> ChannelState<'a> {
    /// eNB transmit power per RB (total power split evenly over the grid).
    pub fn enb_rb_power_dbm(&self) -> f64 {
        self.params.enb_tx_power_dbm - 10.0 * (self.budget.num_rbs as f64).log10()
    }

    /// Received power at `rx` from sector `sector` on one RB,
    /// including antenna pattern, shadowing, and penetration loss for
    /// indoor receivers.
    pub fn macro_rx_power_dbm(&self, sector: usize, rx: &Node) -> f64 {
        let site = self.layout.sector_site(sector);
        let site_pos = self.layout.sites[site];
        let d_m = self
            .layout
            .distance(site_pos, rx.position)
            .max(self.params.macro_dist_floor_m);
        let pl = pathloss_macro(d_m / 1000.0).expect("clamped distance is positive");
        let gain = antenna_gain_db(
            self.layout.sector_boresight_deg(sector),
            self.layout.bearing_deg(site_pos, rx.position),
            &self.params.antenna,
        );
        let pen = if rx.indoor { self.params.penetration_db } else { 0.0 };
        self.enb_rb_power_dbm() + gain - pl - pen + self.shadowing.get(site, rx.id)
            + rx.antenna_gain_dbi
    }

    /// Received power at `rx` from node `tx` on one RB; `tx_share` is
    /// the number of RBs the transmitter splits its power across.
    pub fn d2d_rx_power_dbm(&self, tx: &Node, rx: &Node, tx_share: usize) -> f64 {
        let d = self.layout.distance(tx.position, rx.position).max(0.01);
        let pl = pathloss_d2d(d, self.params.d2d_breakpoint_m).expect("clamped distance");
        tx.max_tx_power_dbm - 10.0 * (tx_share.max(1) as f64).log10() - pl + rx.antenna_gain_dbi
    }

    /// Received power at the victim of `victim_rec` from the
    /// transmitter of `rec`.
    fn rx_power_from(&self, rec: &TxRecord, victim: &Node, nodes: &NodeTable) -> f64 {
        match rec.tx {
            TxSource::Sector(s) => self.macro_rx_power_dbm(s, victim),
            TxSource::Node(id) => {
                let tx = nodes.get(id).expect("transmitter present in node table");
                self.d2d_rx_power_dbm(tx, victim, rec.tx_share)
            }
        }
    }
}

/// Lookup of nodes by id.
pub struct NodeTable<'a> {
    map: HashMap<NodeId, &'a Node>,
}

impl<'a> NodeTable<'a> {
    pub fn new(nodes: &'a [Node]) -> Self {
        NodeTable {
            map: nodes.iter().map(|n| (n.id, n)).collect(),
        }
    }

    pub fn get(&self, id: NodeId) -> Option<&'a Node> {
        self.map.get(&id).copied()
    }
}

/// Whether a co-RB transmission injects interference into a victim of
/// the given link kind. MTCD-to-MTCD transmitters are harmless to other
/// link types but receive interference from eNB and MTCD transmitters;
/// MTCG-to-MTCD interference into others is neglected.
fn interferes(interferer: LinkKind, victim: LinkKind) -> bool {
    match interferer {
        LinkKind::EnbUe | LinkKind::EnbMtcd | LinkKind::EnbMtcg => true,
        LinkKind::MtcdMtcd => victim == LinkKind::MtcdMtcd,
        LinkKind::MtcgMtcd => false,
    }
}

/// SINR of `serving` on (slot, rb) given the committed allocation.
pub fn sinr_per_rb(
    serving: &TxRecord,
    slot: usize,
    rb: usize,
    alloc: &AllocationMatrix,
    state: &ChannelState,
    nodes: &NodeTable,
) -> Result<f64> {
    let co = alloc.co_channel(slot, rb);
    if !co.iter().any(|r| r == serving) {
        return Err(SimError::Contract(format!(
            "RB {rb} in slot {slot} is not assigned to the queried link"
        )));
    }
    let victim = nodes
        .get(serving.rx)
        .ok_or_else(|| SimError::Contract(format!("unknown receiver {:?}", serving.rx)))?;
    let s_dbm = state.rx_power_from(serving, victim, nodes);
    let mut interf_mw = 0.0;
    for rec in co {
        if rec == serving {
            continue;
        }
        if interferes(rec.link, serving.link) {
            interf_mw += db_to_lin(state.rx_power_from(rec, victim, nodes));
        }
    }
    let noise_mw = db_to_lin(state.budget.noise_dbm_per_rb());
    Ok(s_dbm - lin_to_db(noise_mw + interf_mw))
}

/// Attenuated, capped Shannon mapping from SINR to bits/s on one RB.
pub fn rate_per_rb(sinr_db: f64, budget: &LinkBudget) -> f64 {
    if sinr_db < budget.sinr_floor_db {
        return 0.0;
    }
    let eff = (budget.rate_alpha * (1.0 + db_to_lin(sinr_db)).log2()).min(budget.rate_cap_bps_per_hz);
    budget.rb_bandwidth_hz * eff
}
