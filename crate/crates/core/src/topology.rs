//! Cell layout, apartment block, and node placement.
//!
//! Builds the hexagonal site grid, enumerates the dual-stripe apartment
//! block of each cell, and drops UEs, MTCDs, MTCD pairs and MTCGs into
//! the plane. Placement is a pure function of (layout, parameters, seed).

use rand::seq::index::sample as index_sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{antenna_gain_db, pathloss_macro, AntennaPattern};
use crate::error::{Result, SimError};

pub const SECTORS_PER_SITE: usize = 3;
/// Sector boresights in degrees, 120 degrees apart.
pub const SECTOR_BORESIGHTS_DEG: [f64; 3] = [0.0, 120.0, 240.0];

pub const ENB_TX_POWER_DBM: f64 = 46.0;
pub const ENB_ANTENNA_GAIN_DBI: f64 = 14.0;
pub const MTCD_TX_POWER_DBM: f64 = 14.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist(self, other: Point) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }
}

/// Dual-stripe apartment block geometry and its placement in the cell.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlockSpec {
    pub stripes: usize,
    pub floors_per_stripe: usize,
    pub rows: usize,
    pub columns: usize,
    pub apartment_size_m: f64,
    pub stripe_gap_m: f64,
    /// Distance of the block centroid from its site.
    pub offset_m: f64,
    /// Bearing of the block centroid seen from its site.
    pub offset_angle_deg: f64,
}

impl Default for BlockSpec {
    fn default() -> Self {
        BlockSpec {
            stripes: 2,
            floors_per_stripe: 1,
            rows: 4,
            columns: 10,
            apartment_size_m: 10.0,
            stripe_gap_m: 10.0,
            offset_m: 200.0,
            offset_angle_deg: 60.0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ApartmentBlock {
    /// Lower-left corner of the first stripe.
    pub origin: Point,
    pub stripes: usize,
    pub floors_per_stripe: usize,
    pub rows: usize,
    pub columns: usize,
    pub apartment_size_m: f64,
    pub stripe_gap_m: f64,
}

impl ApartmentBlock {
    pub fn from_spec(spec: &BlockSpec, centroid: Point) -> Self {
        let w = spec.columns as f64 * spec.apartment_size_m;
        let h = spec.stripes as f64 * spec.rows as f64 * spec.apartment_size_m
            + (spec.stripes.saturating_sub(1)) as f64 * spec.stripe_gap_m;
        ApartmentBlock {
            origin: Point::new(centroid.x - w / 2.0, centroid.y - h / 2.0),
            stripes: spec.stripes,
            floors_per_stripe: spec.floors_per_stripe,
            rows: spec.rows,
            columns: spec.columns,
            apartment_size_m: spec.apartment_size_m,
            stripe_gap_m: spec.stripe_gap_m,
        }
    }

    pub fn num_apartments(&self) -> usize {
        self.stripes * self.floors_per_stripe * self.rows * self.columns
    }

    /// Axis-aligned bounds (min, max) of apartment `idx`.
    pub fn apartment_rect(&self, idx: usize) -> (Point, Point) {
        let per_stripe = self.floors_per_stripe * self.rows * self.columns;
        let stripe = idx / per_stripe;
        let within = idx % per_stripe;
        let row = within / self.columns;
        let col = within % self.columns;
        let s = self.apartment_size_m;
        let y0 = self.origin.y
            + stripe as f64 * (self.rows as f64 * s + self.stripe_gap_m)
            + row as f64 * s;
        let x0 = self.origin.x + col as f64 * s;
        (Point::new(x0, y0), Point::new(x0 + s, y0 + s))
    }

    pub fn centroid(&self) -> Point {
        let w = self.columns as f64 * self.apartment_size_m;
        let h = self.stripes as f64 * self.rows as f64 * self.apartment_size_m
            + (self.stripes.saturating_sub(1)) as f64 * self.stripe_gap_m;
        Point::new(self.origin.x + w / 2.0, self.origin.y + h / 2.0)
    }

    pub fn contains(&self, p: Point) -> bool {
        (0..self.num_apartments()).any(|i| {
            let (lo, hi) = self.apartment_rect(i);
            p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NetworkLayout {
    pub sites: Vec<Point>,
    pub isd: f64,
    pub wraparound: bool,
    /// One block per cell, indexed by site.
    pub apartment_blocks: Vec<ApartmentBlock>,
    /// Toroidal mirror displacements (includes the zero offset).
    wrap_offsets: Vec<Point>,
}

impl NetworkLayout {
    pub fn num_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn num_sectors(&self) -> usize {
        self.sites.len() * SECTORS_PER_SITE
    }

    pub fn sector_site(&self, sector: usize) -> usize {
        sector / SECTORS_PER_SITE
    }

    pub fn sector_boresight_deg(&self, sector: usize) -> f64 {
        SECTOR_BORESIGHTS_DEG[sector % SECTORS_PER_SITE]
    }

    /// Minimal displacement from `a` to `b` accounting for wraparound.
    pub fn displacement(&self, a: Point, b: Point) -> (f64, f64) {
        let mut best = (b.x - a.x, b.y - a.y);
        if self.wraparound {
            let mut best_n = best.0 * best.0 + best.1 * best.1;
            for off in &self.wrap_offsets {
                let dx = b.x + off.x - a.x;
                let dy = b.y + off.y - a.y;
                let n = dx * dx + dy * dy;
                if n < best_n {
                    best_n = n;
                    best = (dx, dy);
                }
            }
        }
        best
    }

    pub fn distance(&self, a: Point, b: Point) -> f64 {
        let (dx, dy) = self.displacement(a, b);
        (dx * dx + dy * dy).sqrt()
    }

    /// Bearing in degrees from `a` to the nearest image of `b`.
    pub fn bearing_deg(&self, a: Point, b: Point) -> f64 {
        let (dx, dy) = self.displacement(a, b);
        dy.atan2(dx).to_degrees()
    }

    /// Sector with the strongest mean received power at `pos`
    /// (pathloss + antenna pattern, no shadowing). Ties break low.
    pub fn strongest_sector(&self, pos: Point, ant: &AntennaPattern) -> usize {
        let mut best = 0usize;
        let mut best_db = f64::NEG_INFINITY;
        for sector in 0..self.num_sectors() {
            let site = self.sector_site(sector);
            let d_m = self.distance(self.sites[site], pos).max(1.0);
            let pl = pathloss_macro_clamped(d_m);
            let g = antenna_gain_db(
                self.sector_boresight_deg(sector),
                self.bearing_deg(self.sites[site], pos),
                ant,
            );
            let p = g - pl;
            if p > best_db + 1e-12 {
                best_db = p;
                best = sector;
            }
        }
        best
    }
}

fn pathloss_macro_clamped(d_m: f64) -> f64 {
    // 10 m floor; inputs here are always positive.
    pathloss_macro((d_m.max(10.0)) / 1000.0).expect("positive distance")
}

/// Axial hex coordinates of the supported grids.
fn hex_coords(num_sites: usize) -> Result<Vec<(i32, i32)>> {
    let ring1 = [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)];
    let ring2 = [
        (2, 0),
        (1, 1),
        (0, 2),
        (-1, 2),
        (-2, 2),
        (-2, 1),
        (-2, 0),
        (-1, -1),
        (0, -2),
        (1, -2),
        (2, -2),
        (2, -1),
    ];
    let mut coords = vec![(0, 0)];
    match num_sites {
        1 => {}
        7 => coords.extend(ring1),
        19 => {
            coords.extend(ring1);
            coords.extend(ring2);
        }
        n => {
            return Err(SimError::Config(format!(
                "unsupported number of sites: {n} (expected 1, 7, or 19)"
            )))
        }
    }
    Ok(coords)
}

fn axial_to_xy(q: i32, r: i32, isd: f64) -> Point {
    Point::new(
        isd * (q as f64 + r as f64 / 2.0),
        isd * r as f64 * 3f64.sqrt() / 2.0,
    )
}

/// Toroidal translation vectors for the hex cluster sizes 1/7/19.
fn wrap_vectors(num_sites: usize, isd: f64) -> Vec<Point> {
    let (i, j) = match num_sites {
        1 => (1, 0),
        7 => (2, 1),
        _ => (3, 2),
    };
    let t = axial_to_xy(i, j, isd);
    let mut offs = Vec::with_capacity(7);
    offs.push(Point::new(0.0, 0.0));
    for k in 0..6 {
        let a = (k as f64) * std::f64::consts::FRAC_PI_3;
        offs.push(Point::new(
            t.x * a.cos() - t.y * a.sin(),
            t.x * a.sin() + t.y * a.cos(),
        ));
    }
    offs
}

pub fn build_layout(num_sites: usize, isd: f64, wraparound: bool) -> Result<NetworkLayout> {
    build_layout_with(num_sites, isd, wraparound, &BlockSpec::default())
}

pub fn build_layout_with(
    num_sites: usize,
    isd: f64,
    wraparound: bool,
    block: &BlockSpec,
) -> Result<NetworkLayout> {
    if isd <= 0.0 {
        return Err(SimError::Config(format!("isd must be positive, got {isd}")));
    }
    let sites: Vec<Point> = hex_coords(num_sites)?
        .into_iter()
        .map(|(q, r)| axial_to_xy(q, r, isd))
        .collect();
    let angle = block.offset_angle_deg.to_radians();
    let blocks = sites
        .iter()
        .map(|s| {
            let centroid = Point::new(
                s.x + block.offset_m * angle.cos(),
                s.y + block.offset_m * angle.sin(),
            );
            ApartmentBlock::from_spec(block, centroid)
        })
        .collect();
    Ok(NetworkLayout {
        sites,
        isd,
        wraparound,
        apartment_blocks: blocks,
        wrap_offsets: wrap_vectors(num_sites, isd),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    EnbSector,
    Ue,
    Mtcd,
    Mtcg,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub kind: NodeKind,
    pub position: Point,
    pub max_tx_power_dbm: f64,
    pub antenna_gain_dbi: f64,
    pub active: bool,
    pub serving_sector: Option<usize>,
    pub pair_peer: Option<NodeId>,
    pub indoor: bool,
}

/// One pseudo-node per sector, mainly for roster export.
pub fn sector_nodes(layout: &NetworkLayout, next_id: &mut u32) -> Vec<Node> {
    (0..layout.num_sectors())
        .map(|sector| {
            let id = NodeId(*next_id);
            *next_id += 1;
            Node {
                id,
                kind: NodeKind::EnbSector,
                position: layout.sites[layout.sector_site(sector)],
                max_tx_power_dbm: ENB_TX_POWER_DBM,
                antenna_gain_dbi: ENB_ANTENNA_GAIN_DBI,
                active: true,
                serving_sector: Some(sector),
                pair_peer: None,
                indoor: false,
            }
        })
        .collect()
}

/// Uniform sample in the 120-degree wedge of the coverage disc
/// (radius isd/sqrt(3)) around a sector.
fn sample_in_sector<R: Rng>(layout: &NetworkLayout, sector: usize, rng: &mut R) -> Point {
    let site = layout.sites[layout.sector_site(sector)];
    let radius = layout.isd / 3f64.sqrt();
    let boresight = layout.sector_boresight_deg(sector);
    let r = radius * rng.gen::<f64>().sqrt();
    let theta = (boresight + rng.gen_range(-60.0..60.0)).to_radians();
    Point::new(site.x + r * theta.cos(), site.y + r * theta.sin())
}

pub fn place_ues<R: Rng>(
    layout: &NetworkLayout,
    per_sector: usize,
    ant: &AntennaPattern,
    rng: &mut R,
    next_id: &mut u32,
) -> Vec<Node> {
    let mut nodes = Vec::with_capacity(layout.num_sectors() * per_sector);
    for sector in 0..layout.num_sectors() {
        for _ in 0..per_sector {
            let position = sample_in_sector(layout, sector, rng);
            let id = NodeId(*next_id);
            *next_id += 1;
            nodes.push(Node {
                id,
                kind: NodeKind::Ue,
                position,
                max_tx_power_dbm: 0.0,
                antenna_gain_dbi: 0.0,
                active: true,
                serving_sector: Some(layout.strongest_sector(position, ant)),
                pair_peer: None,
                indoor: false,
            });
        }
    }
    nodes
}

pub fn place_mtcds<R: Rng>(
    layout: &NetworkLayout,
    outdoor_per_sector: usize,
    indoor_pairs_per_block: usize,
    ant: &AntennaPattern,
    rng: &mut R,
    next_id: &mut u32,
) -> Result<Vec<Node>> {
    let mut nodes = Vec::new();
    for sector in 0..layout.num_sectors() {
        for _ in 0..outdoor_per_sector {
            let position = sample_in_sector(layout, sector, rng);
            let id = NodeId(*next_id);
            *next_id += 1;
            nodes.push(Node {
                id,
                kind: NodeKind::Mtcd,
                position,
                max_tx_power_dbm: MTCD_TX_POWER_DBM,
                antenna_gain_dbi: 0.0,
                active: true,
                serving_sector: Some(layout.strongest_sector(position, ant)),
                pair_peer: None,
                indoor: false,
            });
        }
    }
    for block in &layout.apartment_blocks {
        let capacity = block.num_apartments();
        if indoor_pairs_per_block > capacity {
            return Err(SimError::Config(format!(
                "{indoor_pairs_per_block} indoor pairs exceed apartment capacity {capacity}"
            )));
        }
        // One pair per apartment, apartments drawn without replacement.
        let apartments = index_sample(rng, capacity, indoor_pairs_per_block);
        for apt in apartments.iter() {
            let (lo, hi) = block.apartment_rect(apt);
            let id_a = NodeId(*next_id);
            let id_b = NodeId(*next_id + 1);
            *next_id += 2;
            for (id, peer) in [(id_a, id_b), (id_b, id_a)] {
                let position = Point::new(rng.gen_range(lo.x..hi.x), rng.gen_range(lo.y..hi.y));
                nodes.push(Node {
                    id,
                    kind: NodeKind::Mtcd,
                    position,
                    max_tx_power_dbm: MTCD_TX_POWER_DBM,
                    antenna_gain_dbi: 0.0,
                    active: true,
                    serving_sector: Some(layout.strongest_sector(position, ant)),
                    pair_peer: Some(peer),
                    indoor: true,
                });
            }
        }
    }
    Ok(nodes)
}

pub fn place_mtcgs<R: Rng>(
    layout: &NetworkLayout,
    per_sector: usize,
    _rng: &mut R,
    next_id: &mut u32,
) -> Vec<Node> {
    let mut nodes = Vec::new();
    for sector in 0..layout.num_sectors() {
        let centroid = layout.apartment_blocks[layout.sector_site(sector)].centroid();
        for _ in 0..per_sector {
            let id = NodeId(*next_id);
            *next_id += 1;
            nodes.push(Node {
                id,
                kind: NodeKind::Mtcg,
                position: centroid,
                max_tx_power_dbm: MTCD_TX_POWER_DBM,
                antenna_gain_dbi: 0.0,
                active: true,
                serving_sector: Some(sector),
                pair_peer: None,
                indoor: false,
            });
        }
    }
    nodes
}

/// Independently activates each MTCD (or MTCD pair, jointly) with
/// probability `duty`. UEs and MTCGs stay active.
pub fn apply_duty_cycle<R: Rng>(nodes: &mut [Node], duty: f64, rng: &mut R) -> Result<()> {
    if !(0.0..=1.0).contains(&duty) {
        return Err(SimError::Domain(format!(
            "duty cycle must be in [0, 1], got {duty}"
        )));
    }
    let mut decisions: std::collections::HashMap<NodeId, bool> = std::collections::HashMap::new();
    for node in nodes.iter_mut() {
        if node.kind != NodeKind::Mtcd {
            continue;
        }
        let group_leader = node.pair_peer.map_or(true, |peer| node.id < peer);
        let active = if group_leader {
            let a = rng.gen::<f64>() < duty;
            decisions.insert(node.id, a);
            a
        } else {
            let peer = node.pair_peer.unwrap();
            *decisions.get(&peer).expect("pair leader precedes follower")
        };
        node.active = active;
    }
    Ok(())
}

/// Flat record export: one node per line `id,kind,x,y,sector,peer`.
pub fn roster_records(nodes: &[Node]) -> String {
    let mut out = String::from("id,kind,x,y,sector,peer\n");
    for n in nodes {
        let kind = match n.kind {
            NodeKind::EnbSector => "enb_sector",
            NodeKind::Ue => "ue",
            NodeKind::Mtcd => "mtcd",
            NodeKind::Mtcg => "mtcg",
        };
        let sector = n
            .serving_sector
            .map(|s| s.to_string())
            .unwrap_or_default();
        let peer = n.pair_peer.map(|p| p.0.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{:.3},{:.3},{},{}\n",
            n.id.0, kind, n.position.x, n.position.y, sector, peer
        ));
    }
    out
}
