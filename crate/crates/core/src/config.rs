//! Run configuration with defaults matching the evaluated urban
//! scenario: 19 tri-sector cells at 500 m ISD, 5 UEs per sector, 50
//! direct MTCDs per sector and 50 indoor MTCD pairs per block, all
//! MTCDs duty cycled at 10%.

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelParams, LinkBudget};
use crate::error::{Result, SimError};
use crate::topology::BlockSpec;
use crate::utility::UtilitySpec;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LayoutConfig {
    pub num_sites: usize,
    pub isd_m: f64,
    pub wraparound: bool,
    pub block: BlockSpec,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        LayoutConfig {
            num_sites: 19,
            isd_m: 500.0,
            wraparound: false,
            block: BlockSpec::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PopulationConfig {
    pub ues_per_sector: usize,
    pub mtcds_per_sector: usize,
    pub indoor_pairs_per_block: usize,
    pub mtcgs_per_sector: usize,
    /// Per-drop activation probability of each MTCD (pairs jointly).
    pub duty_cycle: f64,
}

impl Default for PopulationConfig {
    fn default() -> Self {
        PopulationConfig {
            ues_per_sector: 5,
            mtcds_per_sector: 50,
            indoor_pairs_per_block: 50,
            mtcgs_per_sector: 1,
            duty_cycle: 0.1,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UtilityConfig {
    /// Class 1 (elastic) for UEs.
    pub ue: UtilitySpec,
    /// Class 4 (rate-adaptive) for direct MTCDs.
    pub mtcd: UtilitySpec,
    /// Utility of MTCD pairs over their per-subchannel rate.
    pub pair: UtilitySpec,
}

impl Default for UtilityConfig {
    fn default() -> Self {
        UtilityConfig {
            ue: UtilitySpec::Elastic {
                r0: 1e5,
                r_max: 1e7,
            },
            mtcd: UtilitySpec::RateAdaptive {
                steepness: 5e-7,
                midpoint: 1.5e6,
            },
            pair: UtilitySpec::RateAdaptive {
                steepness: 2e-5,
                midpoint: 3e5,
            },
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchedulerConfig {
    /// Unified weighting factor of M2M communication in [0, 1].
    pub lambda: f64,
    /// Assumed average service rate per MTCD for backhaul estimation.
    pub mtcd_demand_bps: f64,
}

impl Default for SchedulerConfig {
    fn default() -> Self {
        SchedulerConfig {
            lambda: 0.8,
            mtcd_demand_bps: 1e5,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphConfig {
    /// Edge rule: an edge exists when serving minus interfering gain is
    /// below this threshold.
    pub threshold_db: f64,
    /// Base activation probability for extra subchannels.
    pub p0: f64,
    /// Synchronous round budget.
    pub rounds: usize,
    /// Per-round per-vertex update probability (desynchronization).
    pub update_prob: f64,
    /// Per-vertex probability of re-randomizing colors when a round
    /// reaches a fixed point (escape hatch from strict local minima);
    /// 0 halts at the first fixed point.
    pub noise_prob: f64,
    /// Subchannel count; defaults to the access-slot RBs not reserved
    /// for backhaul.
    pub num_colors: Option<usize>,
}

impl Default for GraphConfig {
    fn default() -> Self {
        GraphConfig {
            threshold_db: 30.0,
            p0: 0.5,
            rounds: 50,
            update_prob: 0.5,
            noise_prob: 0.1,
            num_colors: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AllocationMode {
    GraphBased,
    FullReuse,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub num_drops: usize,
    pub seed: u64,
    pub allocation_mode: AllocationMode,
    /// Disables all M2M populations (H2H-only baseline).
    pub m2m_enabled: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            num_drops: 100,
            seed: 1,
            allocation_mode: AllocationMode::GraphBased,
            m2m_enabled: true,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub layout: LayoutConfig,
    pub population: PopulationConfig,
    pub channel: ChannelParams,
    pub budget: LinkBudget,
    pub utility: UtilityConfig,
    pub scheduler: SchedulerConfig,
    pub graph: GraphConfig,
    pub run: RunConfig,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let c = |ok: bool, msg: &str| {
            if ok {
                Ok(())
            } else {
                Err(SimError::Config(msg.to_string()))
            }
        };
        c(
            matches!(self.layout.num_sites, 1 | 7 | 19),
            "layout.num_sites must be 1, 7, or 19",
        )?;
        c(self.layout.isd_m > 0.0, "layout.isd_m must be positive")?;
        c(
            (0.0..=1.0).contains(&self.population.duty_cycle),
            "population.duty_cycle must be in [0, 1]",
        )?;
        c(
            (0.0..=1.0).contains(&self.scheduler.lambda),
            "scheduler.lambda must be in [0, 1]",
        )?;
        c(
            (0.0..=1.0).contains(&self.channel.inter_site_corr),
            "channel.inter_site_corr must be in [0, 1]",
        )?;
        c(
            self.channel.shadowing_sigma_db >= 0.0,
            "channel.shadowing_sigma_db must be nonnegative",
        )?;
        c(self.budget.num_rbs > 0, "budget.num_rbs must be positive")?;
        c(
            self.budget.rb_bandwidth_hz > 0.0,
            "budget.rb_bandwidth_hz must be positive",
        )?;
        c(
            (0.0..=1.0).contains(&self.graph.p0),
            "graph.p0 must be in [0, 1]",
        )?;
        c(
            (0.0..=1.0).contains(&self.graph.update_prob),
            "graph.update_prob must be in [0, 1]",
        )?;
        c(
            (0.0..=1.0).contains(&self.graph.noise_prob),
            "graph.noise_prob must be in [0, 1]",
        )?;
        c(self.graph.rounds >= 1, "graph.rounds must be >= 1")?;
        c(self.run.num_drops >= 1, "run.num_drops must be >= 1")?;
        c(
            self.population.indoor_pairs_per_block
                <= self.layout.block.stripes
                    * self.layout.block.floors_per_stripe
                    * self.layout.block.rows
                    * self.layout.block.columns,
            "population.indoor_pairs_per_block exceeds apartment capacity",
        )?;
        Ok(())
    }
}
