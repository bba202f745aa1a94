//! Resource grid, slot roles, and the allocation matrix shared by the
//! channel, scheduler, and engine modules.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::topology::NodeId;

/// The five downlink link types.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkKind {
    EnbUe,
    EnbMtcd,
    EnbMtcg,
    MtcgMtcd,
    MtcdMtcd,
}

impl LinkKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LinkKind::EnbUe => "enb_ue",
            LinkKind::EnbMtcd => "enb_mtcd",
            LinkKind::EnbMtcg => "enb_mtcg",
            LinkKind::MtcgMtcd => "mtcg_mtcd",
            LinkKind::MtcdMtcd => "mtcd_mtcd",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlotRole {
    Backhaul,
    Access,
}

/// RBs x slots; slot roles alternate BACKHAUL, ACCESS, BACKHAUL, ...
#[derive(Clone, Copy, Debug)]
pub struct ResourceGrid {
    pub num_rbs: usize,
    pub num_slots: usize,
}

impl ResourceGrid {
    pub fn role(&self, slot: usize) -> SlotRole {
        if slot % 2 == 0 {
            SlotRole::Backhaul
        } else {
            SlotRole::Access
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TxSource {
    /// eNB-originated transmission from a sector.
    Sector(usize),
    /// Transmission from a placed node (MTCG or MTCD).
    Node(NodeId),
}

/// One scheduled transmission on one (slot, RB).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TxRecord {
    pub link: LinkKind,
    pub tx: TxSource,
    pub rx: NodeId,
    /// Number of RBs the transmitter splits its power across.
    pub tx_share: usize,
}

/// The decision variable: which transmissions hold each (slot, RB).
/// Several transmissions may share an RB (spatial reuse); per-sector
/// eNB orthogonality is enforced by [`AllocationMatrix::validate`].
#[derive(Clone, Debug, Default)]
pub struct AllocationMatrix {
    entries: BTreeMap<(usize, usize), Vec<TxRecord>>,
}

impl AllocationMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, slot: usize, rb: usize, rec: TxRecord) {
        self.entries.entry((slot, rb)).or_default().push(rec);
    }

    pub fn co_channel(&self, slot: usize, rb: usize) -> &[TxRecord] {
        self.entries
            .get(&(slot, rb))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &TxRecord)> {
        self.entries
            .iter()
            .flat_map(|(&(slot, rb), recs)| recs.iter().map(move |r| (slot, rb, r)))
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Checks the structural invariants:
    /// - at most one eNB-originated transmission per (slot, RB, sector);
    /// - in backhaul slots, an RB granted to an eNB-to-MTCG link is held
    ///   by exactly one MTCG and by no other eNB link of the same cell.
    pub fn validate(&self, grid: &ResourceGrid, sectors_per_site: usize) -> Result<()> {
        for (&(slot, rb), recs) in &self.entries {
            let mut sectors_seen = Vec::new();
            for rec in recs {
                if let TxSource::Sector(s) = rec.tx {
                    if sectors_seen.contains(&s) {
                        return Err(SimError::Contract(format!(
                            "slot {slot} RB {rb}: two eNB transmissions in sector {s}"
                        )));
                    }
                    sectors_seen.push(s);
                }
            }
            if grid.role(slot) == SlotRole::Backhaul {
                let mtcg_cells: Vec<usize> = recs
                    .iter()
                    .filter_map(|r| match (r.link, r.tx) {
                        (LinkKind::EnbMtcg, TxSource::Sector(s)) => Some(s / sectors_per_site),
                        _ => None,
                    })
                    .collect();
                for rec in recs {
                    if rec.link == LinkKind::EnbMtcg {
                        continue;
                    }
                    if let TxSource::Sector(s) = rec.tx {
                        if mtcg_cells.contains(&(s / sectors_per_site)) {
                            return Err(SimError::Contract(format!(
                                "slot {slot} RB {rb}: backhaul RB shared with {:?}",
                                rec.link
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Flat record dump: `slot,rb,link,tx,rx` per line.
    pub fn dump(&self) -> String {
        let mut out = String::from("slot,rb,link,tx,rx\n");
        for (slot, rb, rec) in self.iter() {
            let tx = match rec.tx {
                TxSource::Sector(s) => format!("sector:{s}"),
                TxSource::Node(id) => format!("node:{}", id.0),
            };
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                slot,
                rb,
                rec.link.as_str(),
                tx,
                rec.rx.0
            ));
        }
        out
    }
}
