//! Backhaul/access slot partition, backhaul RB estimation, and the
//! utility-maximizing RB allocation over eNB-to-UE and eNB-to-MTCD
//! links.
//!
//! The aggregate-utility objective sum_H U_i + lambda * sum_M U_j is
//! solved greedily per RB (exact for concave separable instances with
//! flat per-RB rates); [`brute_force_schedule`] is the exhaustive
//! oracle for small instances.

use crate::error::{Result, SimError};
use crate::grid::{AllocationMatrix, LinkKind, ResourceGrid, SlotRole, TxRecord, TxSource};
use crate::topology::NodeId;
use crate::utility::UtilitySpec;

/// One schedulable user (UE or direct MTCD) seen by a sector scheduler.
#[derive(Clone, Debug)]
pub struct SchedUser {
    pub id: u32,
    pub m2m: bool,
    pub utility: UtilitySpec,
    /// Achievable rate on each RB of the problem's RB set.
    pub per_rb_rate: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct SchedulingProblem {
    pub users: Vec<SchedUser>,
    pub lambda: f64,
    /// RB indices available to this problem, scheduled in order.
    pub rbs: Vec<usize>,
}

impl SchedulingProblem {
    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(SimError::Domain(format!(
                "lambda must be in [0, 1], got {}",
                self.lambda
            )));
        }
        for u in &self.users {
            if u.per_rb_rate.len() != self.rbs.len() {
                return Err(SimError::Contract(format!(
                    "user {} has {} per-RB rates for {} RBs",
                    u.id,
                    u.per_rb_rate.len(),
                    self.rbs.len()
                )));
            }
            if u.per_rb_rate.iter().any(|r| *r < 0.0) {
                return Err(SimError::Domain(format!("user {} has a negative rate", u.id)));
            }
        }
        Ok(())
    }

    fn weight(&self, user: &SchedUser) -> f64 {
        if user.m2m {
            self.lambda
        } else {
            1.0
        }
    }

    /// Indices of users sorted by node id (greedy tie-break order).
    fn id_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.users.len()).collect();
        order.sort_by_key(|&u| self.users[u].id);
        order
    }
}

#[derive(Clone, Debug)]
pub struct ScheduleResult {
    /// Per position in `problem.rbs`: the holding user index, if any.
    pub assignment: Vec<Option<usize>>,
    /// Accumulated rate per user.
    pub rates: Vec<f64>,
    /// Achieved sum_H U + lambda * sum_M U.
    pub objective: f64,
}

/// Re-evaluates the objective from an assignment; the independent
/// recomputation path used by invariant checks.
pub fn objective_of(problem: &SchedulingProblem, assignment: &[Option<usize>]) -> Result<f64> {
    let mut rates = vec![0.0; problem.users.len()];
    for (pos, holder) in assignment.iter().enumerate() {
        if let Some(u) = holder {
            rates[*u] += problem.users[*u].per_rb_rate[pos];
        }
    }
    let mut obj = 0.0;
    for (u, user) in problem.users.iter().enumerate() {
        obj += problem.weight(user) * user.utility.eval(rates[u])?;
    }
    Ok(obj)
}

/// Greedy MAX-Utility allocation: each RB, in order, goes to the user
/// with the largest lambda-weighted marginal utility given its already
/// accumulated rate; an RB stays idle when every marginal is <= 0.
pub fn max_utility_schedule(problem: &SchedulingProblem) -> Result<ScheduleResult> {
    problem.validate()?;
    let order = problem.id_order();
    let mut rates = vec![0.0; problem.users.len()];
    let mut assignment = vec![None; problem.rbs.len()];
    for pos in 0..problem.rbs.len() {
        let mut best: Option<(usize, f64)> = None;
        for &u in &order {
            let user = &problem.users[u];
            let m = problem.weight(user) * user.utility.marginal(rates[u], user.per_rb_rate[pos])?;
            if m > 0.0 && best.map_or(true, |(_, bm)| m > bm) {
                best = Some((u, m));
            }
        }
        if let Some((u, _)) = best {
            rates[u] += problem.users[u].per_rb_rate[pos];
            assignment[pos] = Some(u);
        }
    }
    let objective = objective_of(problem, &assignment)?;
    Ok(ScheduleResult {
        assignment,
        rates,
        objective,
    })
}

/// Exhaustive enumeration of every RB-to-user (or none) assignment;
/// the global optimum oracle. Guarded to (n+1)^m <= 1e6.
pub fn brute_force_schedule(problem: &SchedulingProblem) -> Result<ScheduleResult> {
    problem.validate()?;
    let n = problem.users.len();
    let m = problem.rbs.len();
    let states = ((n + 1) as f64).powi(m as i32);
    if states > 1e6 {
        return Err(SimError::Capacity(format!(
            "{n} users x {m} RBs gives {states:.0} assignments"
        )));
    }
    let mut digits = vec![0usize; m]; // 0 = unassigned, k = user k-1
    let mut best: Option<ScheduleResult> = None;
    loop {
        let assignment: Vec<Option<usize>> = digits
            .iter()
            .map(|&d| if d == 0 { None } else { Some(d - 1) })
            .collect();
        let objective = objective_of(problem, &assignment)?;
        if best.as_ref().map_or(true, |b| objective > b.objective) {
            let mut rates = vec![0.0; n];
            for (pos, holder) in assignment.iter().enumerate() {
                if let Some(u) = holder {
                    rates[*u] += problem.users[*u].per_rb_rate[pos];
                }
            }
            best = Some(ScheduleResult {
                assignment,
                rates,
                objective,
            });
        }
        // increment the base-(n+1) counter
        let mut pos = 0;
        loop {
            if pos == m {
                return Ok(best.expect("at least the empty assignment was scored"));
            }
            digits[pos] += 1;
            if digits[pos] <= n {
                break;
            }
            digits[pos] = 0;
            pos += 1;
        }
    }
}

/// Number of backhaul RBs for an eNB-to-MTCG link: total demand divided
/// by the average rate per RB, rounded up and capped at the grid size.
pub fn estimate_backhaul_rbs(
    total_mtcd_rate: f64,
    avg_rate_per_rb: f64,
    num_rbs: usize,
) -> Result<usize> {
    if avg_rate_per_rb <= 0.0 {
        return Err(SimError::Domain(format!(
            "average rate per RB must be positive, got {avg_rate_per_rb}"
        )));
    }
    if total_mtcd_rate < 0.0 {
        return Err(SimError::Domain(format!(
            "total rate must be nonnegative, got {total_mtcd_rate}"
        )));
    }
    Ok(((total_mtcd_rate / avg_rate_per_rb).ceil() as usize).min(num_rbs))
}

/// Semi-static backhaul reservation of one sector's MTCG.
#[derive(Clone, Debug)]
pub struct MtcgReservation {
    pub mtcg: NodeId,
    /// Representative receiver of the MTCG-to-MTCD access transmission.
    pub access_rx: NodeId,
    pub rb_start: usize,
    pub rb_count: usize,
}

/// One schedulable user with its flat (interference-free) rate estimate.
#[derive(Clone, Debug)]
pub struct PlanUser {
    pub id: u32,
    pub m2m: bool,
    pub utility: UtilitySpec,
    pub rate_estimate: f64,
}

/// Everything one sector scheduler needs for one slot.
#[derive(Clone, Debug)]
pub struct SectorPlan {
    pub sector: usize,
    pub users: Vec<PlanUser>,
    /// Per user: the transmission record template for its grants.
    pub user_links: Vec<TxRecord>,
    pub mtcg: Option<MtcgReservation>,
    /// Total RBs reserved for backhaul in this sector's cell.
    pub cell_reserved: usize,
}

fn greedy_for_sector(
    plan: &SectorPlan,
    lambda: f64,
    rbs: Vec<usize>,
    slot: usize,
    alloc: &mut AllocationMatrix,
) -> Result<ScheduleResult> {
    let problem = SchedulingProblem {
        users: plan
            .users
            .iter()
            .map(|u| SchedUser {
                id: u.id,
                m2m: u.m2m,
                utility: u.utility.clone(),
                per_rb_rate: vec![u.rate_estimate; rbs.len()],
            })
            .collect(),
        lambda,
        rbs: rbs.clone(),
    };
    let result = max_utility_schedule(&problem)?;
    for (pos, holder) in result.assignment.iter().enumerate() {
        if let Some(u) = holder {
            alloc.add(slot, rbs[pos], plan.user_links[*u]);
        }
    }
    Ok(result)
}

/// Backhaul slot: eNB-to-MTCG links hold their reserved RBs
/// orthogonally; the remaining RBs go to the sector's MAX-Utility
/// schedule.
pub fn fill_backhaul_slot(
    slot: usize,
    grid: &ResourceGrid,
    plans: &[SectorPlan],
    lambda: f64,
    alloc: &mut AllocationMatrix,
) -> Result<Vec<ScheduleResult>> {
    if grid.role(slot) != SlotRole::Backhaul {
        return Err(SimError::Contract(format!(
            "slot {slot} is not a backhaul slot"
        )));
    }
    let mut results = Vec::with_capacity(plans.len());
    for plan in plans {
        if let Some(res) = &plan.mtcg {
            for rb in res.rb_start..res.rb_start + res.rb_count {
                alloc.add(
                    slot,
                    rb,
                    TxRecord {
                        link: LinkKind::EnbMtcg,
                        tx: TxSource::Sector(plan.sector),
                        rx: res.mtcg,
                        tx_share: grid.num_rbs,
                    },
                );
            }
        }
        let rbs: Vec<usize> = (plan.cell_reserved..grid.num_rbs).collect();
        results.push(greedy_for_sector(plan, lambda, rbs, slot, alloc)?);
    }
    Ok(results)
}

/// Access slot: all links except eNB-to-MTCG share the full grid. The
/// MTCG retransmits on its reserved demand (full reuse across MTCGs);
/// MTCD-to-MTCD placement is delegated to the graph allocator.
pub fn fill_access_slot(
    slot: usize,
    grid: &ResourceGrid,
    plans: &[SectorPlan],
    lambda: f64,
    alloc: &mut AllocationMatrix,
) -> Result<Vec<ScheduleResult>> {
    if grid.role(slot) != SlotRole::Access {
        return Err(SimError::Contract(format!(
            "slot {slot} is not an access slot"
        )));
    }
    let mut results = Vec::with_capacity(plans.len());
    for plan in plans {
        if let Some(res) = &plan.mtcg {
            for rb in res.rb_start..res.rb_start + res.rb_count {
                alloc.add(
                    slot,
                    rb,
                    TxRecord {
                        link: LinkKind::MtcgMtcd,
                        tx: TxSource::Node(res.mtcg),
                        rx: res.access_rx,
                        tx_share: res.rb_count,
                    },
                );
            }
        }
        let rbs: Vec<usize> = (0..grid.num_rbs).collect();
        results.push(greedy_for_sector(plan, lambda, rbs, slot, alloc)?);
    }
    Ok(results)
}
