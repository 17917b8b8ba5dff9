use serde::{Deserialize, Serialize};

use super::{ChannelPlan, MultiplexMode};
use crate::error::{Error, Result};
use crate::link::{CarrierRole, DetectorSpec, FiberSpec, NoiseBudget, OpticalCarrier};
use crate::qkd::{skr_pipeline, DecoyParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationScore {
    pub plan: ChannelPlan,
    pub budget: NoiseBudget,
    pub skr_bps: f64,
    pub qber: f64,
}

/// Noise budget and key rate for `plan` at the fiber's own length.
pub fn score_plan(
    plan: &ChannelPlan,
    fiber: &FiberSpec,
    detector: &DetectorSpec,
    decoy: &DecoyParams,
) -> Result<AllocationScore> {
    let r = skr_pipeline(fiber.length_km, plan, fiber, detector, decoy)?;
    Ok(AllocationScore {
        plan: plan.clone(),
        budget: r.noise,
        skr_bps: r.skr_bps(),
        qber: r.qber(),
    })
}

fn nearly_equal(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs())
}

/// True when `cand` beats `best`: higher key rate, then lower noise. Exact ties keep `best`,
/// which the enumeration order makes the lowest quantum core and lexicographically first placement.
fn better(cand: &AllocationScore, best: &AllocationScore) -> bool {
    if !nearly_equal(cand.skr_bps, best.skr_bps) {
        return cand.skr_bps > best.skr_bps;
    }
    if !nearly_equal(cand.budget.p_total_w, best.budget.p_total_w) {
        return cand.budget.p_total_w < best.budget.p_total_w;
    }
    false
}

/// Calls `visit` with every injective assignment of `k` slots into `cores`, in lexicographic order.
fn for_each_assignment(cores: &[usize], k: usize, visit: &mut dyn FnMut(&[usize]) -> Result<()>) -> Result<()> {
    fn rec(
        cores: &[usize],
        k: usize,
        used: &mut Vec<bool>,
        cur: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize]) -> Result<()>,
    ) -> Result<()> {
        if cur.len() == k {
            return visit(cur);
        }
        for (i, &c) in cores.iter().enumerate() {
            if !used[i] {
                used[i] = true;
                cur.push(c);
                rec(cores, k, used, cur, visit)?;
                cur.pop();
                used[i] = false;
            }
        }
        Ok(())
    }
    rec(
        cores,
        k,
        &mut vec![false; cores.len()],
        &mut Vec::with_capacity(k),
        visit,
    )
}

/// Exhaustive search over quantum-core and classical-core placements.
///
/// Classical carriers are 1550 nm data signals with the given launch powers. The search
/// maximises the key rate at the fiber's length; among equal rates it prefers lower noise,
/// then the lowest quantum core, then the lexicographically first classical placement.
pub fn optimize_allocation(
    fiber: &FiberSpec,
    detector: &DetectorSpec,
    decoy: &DecoyParams,
    powers_dbm: &[f64],
) -> Result<AllocationScore> {
    fiber.validate()?;
    let n = fiber.core_count;
    if powers_dbm.len() + 1 > n {
        return Err(Error::Plan(format!(
            "{} classical carriers do not fit next to a quantum channel in {n} cores",
            powers_dbm.len()
        )));
    }
    let mut best: Option<AllocationScore> = None;
    for q in 0..n {
        let free: Vec<usize> = (0..n).filter(|&c| c != q).collect();
        for_each_assignment(&free, powers_dbm.len(), &mut |cores| {
            let mut carriers = vec![OpticalCarrier::new(CarrierRole::Quantum, q, 1550.0, -60.0)];
            carriers.extend(
                cores
                    .iter()
                    .zip(powers_dbm)
                    .map(|(&c, &p)| OpticalCarrier::new(CarrierRole::ClassicalSignal, c, 1550.0, p)),
            );
            let plan = ChannelPlan::new(carriers, MultiplexMode::Sdm);
            let score = score_plan(&plan, fiber, detector, decoy)?;
            if best.as_ref().is_none_or(|b| better(&score, b)) {
                best = Some(score);
            }
            Ok(())
        })?;
    }
    best.ok_or_else(|| Error::Plan("no feasible allocation".into()))
}
