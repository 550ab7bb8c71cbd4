//! Four-cost dispatcher: runs four strategies against independent sessions
//! and interleaves them on a doubling cost schedule, so the total charged
//! cost stays within a constant factor of the cheapest successful branch.
//!
//! Branches: (a) the 0/1 engine alone, valid when the Hamiltonian lies in the
//! 0/1 graph; (b) the engine over all finite classes; (c) zero-cost edges
//! plus predecessor completion over cost-1 pairs, aborted at an
//! n^1.5 * log2(n) budget; (d) the 0/1 engine followed by predecessor
//! completion over cost-F pairs.

use super::predecessor::complete_hamiltonian;
use super::universal::{
    ground_truth_width, universal_sort, AllowedClasses, UniversalConfig,
};
use super::GeneralizedError;
use crate::cost::{cost_from_u64, cost_zero, format_cost, Cost};
use crate::dag::RevealedDag;
use crate::instance::{CostModel, ElementId, FourCost, Instance};
use crate::oracle::OracleSession;
use num_traits::Zero;
use serde::Serialize;

#[derive(Debug, Clone)]
pub struct FourCostConfig {
    pub universal: UniversalConfig,
    /// Budget for the pure predecessor branch: factor * n^1.5 * log2(n).
    pub abort_factor: f64,
}

impl Default for FourCostConfig {
    fn default() -> Self {
        FourCostConfig {
            universal: UniversalConfig::default(),
            abort_factor: 2.0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BranchReport {
    pub name: &'static str,
    pub cost: String,
    pub probes: u64,
    pub ok: bool,
}

#[derive(Debug, Clone)]
pub struct FourCostOutcome {
    pub hamiltonian: Vec<ElementId>,
    /// Cost charged by the interleaved schedule up to the winner finishing.
    pub total_cost: Cost,
    pub winner: &'static str,
    pub branches: Vec<BranchReport>,
    /// total_cost / (k1 + F * kF); `None` when the Hamiltonian is free.
    pub ratio: Option<Cost>,
    pub k1: u64,
    pub k_f: u64,
    pub w0: usize,
    pub w01: usize,
}

struct BranchRun {
    name: &'static str,
    /// Cumulative cost after each charged probe.
    trajectory: Vec<Cost>,
    ok: bool,
    path: Option<Vec<ElementId>>,
}

fn prefix_sums(classes: Vec<Cost>) -> Vec<Cost> {
    let mut acc = cost_zero();
    classes
        .into_iter()
        .map(|c| {
            acc += c;
            acc.clone()
        })
        .collect()
}

/// True iff the reduction of the engine's revealed DAG is a Hamiltonian path.
fn as_path(reduction: &[(ElementId, ElementId)], n: usize) -> Option<Vec<ElementId>> {
    if n == 0 {
        return Some(Vec::new());
    }
    if reduction.len() + 1 != n {
        return None;
    }
    let mut next = vec![None; n];
    let mut has_in = vec![false; n];
    for &(u, v) in reduction {
        if next[u as usize].is_some() || has_in[v as usize] {
            return None;
        }
        next[u as usize] = Some(v);
        has_in[v as usize] = true;
    }
    let start = (0..n).find(|&v| !has_in[v])?;
    let mut path = vec![start as ElementId];
    while let Some(v) = next[*path.last().unwrap() as usize] {
        path.push(v);
    }
    (path.len() == n).then_some(path)
}

fn engine_branch(
    name: &'static str,
    instance: &Instance,
    classes: AllowedClasses,
    require_path: bool,
    complete_with_f: bool,
    config: &FourCostConfig,
    seed: u64,
) -> BranchRun {
    let mut session = OracleSession::new(instance);
    session.enable_charge_log();
    let out = universal_sort(&mut session, classes, &config.universal, seed);
    let n = instance.len();
    let path = as_path(&out.reduction, n);
    let (ok, path) = match (path, require_path, complete_with_f) {
        (Some(p), _, _) => (true, Some(p)),
        (None, true, false) => (false, None),
        (None, _, true) => {
            let mut dag = out.dag;
            let allowed = |u: ElementId, v: ElementId| {
                matches!(instance.cost_model(), CostModel::FourLevel { classes, .. }
                    if classes.get(u, v) == FourCost::F)
            };
            match complete_hamiltonian(&mut dag, &mut session, &allowed, None) {
                Ok(done) => (true, Some(done.path)),
                Err(_) => (false, None),
            }
        }
        (None, false, false) => (false, None),
    };
    BranchRun {
        name,
        trajectory: prefix_sums(session.take_charge_log()),
        ok,
        path,
    }
}

fn zero_then_ones_branch(instance: &Instance, config: &FourCostConfig) -> BranchRun {
    let n = instance.len();
    let mut session = OracleSession::new(instance);
    session.enable_charge_log();
    let mut dag = RevealedDag::new(n);
    for u in 0..n as ElementId {
        for v in u + 1..n as ElementId {
            if class_of(instance, u, v) == FourCost::Zero {
                let less = session.less(u, v).expect("zero-cost pair");
                let (a, b) = if less { (u, v) } else { (v, u) };
                dag.add_edge(a, b).expect("true directions");
            }
        }
    }
    let abort = config.abort_factor * (n as f64).powf(1.5) * (n.max(2) as f64).log2();
    let abort_cost = cost_from_u64(abort.ceil() as u64);
    let allowed =
        |u: ElementId, v: ElementId| class_of(instance, u, v) == FourCost::One;
    let result = complete_hamiltonian(&mut dag, &mut session, &allowed, Some(&abort_cost));
    let (ok, path) = match result {
        Ok(done) => (true, Some(done.path)),
        Err(_) => (false, None),
    };
    BranchRun {
        name: "zero_then_predecessor",
        trajectory: prefix_sums(session.take_charge_log()),
        ok,
        path,
    }
}

fn class_of(instance: &Instance, u: ElementId, v: ElementId) -> FourCost {
    match instance.cost_model() {
        CostModel::FourLevel { classes, .. } => classes.get(u, v),
        _ => panic!("dispatcher expects a four-level instance"),
    }
}

/// Hamiltonian edge-class counts of the hidden order (post-hoc reporting).
pub fn hamiltonian_class_counts(instance: &Instance) -> (u64, u64) {
    let mut k1 = 0;
    let mut k_f = 0;
    for w in instance.hidden_order().windows(2) {
        match class_of(instance, w[0], w[1]) {
            FourCost::One => k1 += 1,
            FourCost::F => k_f += 1,
            FourCost::Zero => {}
            FourCost::Inf => panic!("promise violated on rank-adjacent pair"),
        }
    }
    (k1, k_f)
}

/// Sorts a four-level Hamiltonian-promise instance by running the four
/// branches under the doubling schedule. Returns the first correct
/// Hamiltonian and the exact interleaved cost.
pub fn sort_four_costs(
    instance: &Instance,
    seed: u64,
    config: &FourCostConfig,
) -> Result<FourCostOutcome, GeneralizedError> {
    assert!(
        matches!(instance.cost_model(), CostModel::FourLevel { .. }),
        "sort_four_costs expects a four-level instance"
    );
    let branches = [engine_branch(
            "engine_01",
            instance,
            AllowedClasses::ZERO_ONE,
            true,
            false,
            config,
            seed.wrapping_add(1),
        ),
        engine_branch(
            "engine_01F",
            instance,
            AllowedClasses::ALL_FINITE,
            true,
            false,
            config,
            seed.wrapping_add(2),
        ),
        zero_then_ones_branch(instance, config),
        engine_branch(
            "engine_01_then_F",
            instance,
            AllowedClasses::ZERO_ONE,
            false,
            true,
            config,
            seed.wrapping_add(4),
        )];

    // doubling schedule: each branch advances until its ledger passes the
    // budget; the first branch to finish all its probes and succeed wins
    let mut ptr = vec![0usize; branches.len()];
    let mut done = vec![false; branches.len()];
    let mut budget = cost_from_u64(1);
    let mut winner: Option<usize> = None;
    'schedule: loop {
        let mut all_exhausted = true;
        for (b, branch) in branches.iter().enumerate() {
            if !done[b] {
                while ptr[b] < branch.trajectory.len() && branch.trajectory[ptr[b]] <= budget {
                    ptr[b] += 1;
                }
                if ptr[b] == branch.trajectory.len() {
                    done[b] = true;
                    if branch.ok {
                        winner = Some(b);
                        break 'schedule;
                    }
                }
            }
            all_exhausted &= done[b];
        }
        if all_exhausted {
            break;
        }
        budget *= cost_from_u64(2);
    }

    let Some(win) = winner else {
        return Err(GeneralizedError::NoHamiltonian);
    };
    let total_cost: Cost = branches
        .iter()
        .enumerate()
        .map(|(b, branch)| {
            if ptr[b] == 0 {
                cost_zero()
            } else {
                branch.trajectory[ptr[b] - 1].clone()
            }
        })
        .sum();

    let (k1, k_f) = hamiltonian_class_counts(instance);
    let f = match instance.cost_model() {
        CostModel::FourLevel { f, .. } => f.clone(),
        _ => unreachable!(),
    };
    let ham_cost = cost_from_u64(k1) + f * cost_from_u64(k_f);
    let ratio = if ham_cost.is_zero() {
        None
    } else {
        Some(total_cost.clone() / ham_cost)
    };
    let w0 = ground_truth_width(
        instance,
        AllowedClasses {
            zero: true,
            one: false,
            f: false,
        },
    );
    let w01 = ground_truth_width(instance, AllowedClasses::ZERO_ONE);

    let reports = branches
        .iter()
        .map(|b| BranchReport {
            name: b.name,
            cost: format_cost(b.trajectory.last().unwrap_or(&cost_zero())),
            probes: b.trajectory.len() as u64,
            ok: b.ok,
        })
        .collect();
    let hamiltonian = branches[win].path.clone().expect("winner carries a path");
    Ok(FourCostOutcome {
        hamiltonian,
        total_cost,
        winner: branches[win].name,
        branches: reports,
        ratio,
        k1,
        k_f,
        w0,
        w01,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{four_level, FourLevelParams};

    #[test]
    fn tiny_all_ones_instance_reduces_to_baseline() {
        let params = FourLevelParams {
            k_f: 0,
            k_1: 3,
            p_zero: 0.0,
            p_one: 1.0,
            p_f: 0.0,
            f: None,
        };
        let inst = four_level(4, &params, 5).unwrap();
        let out = sort_four_costs(&inst, 1, &FourCostConfig::default()).unwrap();
        assert_eq!(out.hamiltonian, inst.hidden_order());
        assert_eq!(out.k_f, 0);
        let ratio = out.ratio.unwrap();
        assert!(ratio <= cost_from_u64(4), "ratio {}", format_cost(&ratio));
    }

    #[test]
    fn finds_hamiltonian_with_expensive_edges_planted() {
        for seed in 0..6 {
            let params = FourLevelParams {
                k_f: 2,
                k_1: 4,
                p_zero: 0.35,
                p_one: 0.2,
                p_f: 0.02,
                f: None,
            };
            let inst = four_level(24, &params, seed).unwrap();
            let out = sort_four_costs(&inst, seed, &FourCostConfig::default()).unwrap();
            assert_eq!(out.hamiltonian, inst.hidden_order(), "seed {seed}");
            assert_eq!(out.k_f, 2);
            assert!(out.w01 <= out.k_f as usize + 1);
        }
    }

    #[test]
    fn schedule_cost_not_much_worse_than_best_branch() {
        let params = FourLevelParams {
            k_f: 1,
            k_1: 5,
            p_zero: 0.3,
            p_one: 0.25,
            p_f: 0.02,
            f: None,
        };
        let inst = four_level(20, &params, 11).unwrap();
        let out = sort_four_costs(&inst, 3, &FourCostConfig::default()).unwrap();
        let best_ok = out
            .branches
            .iter()
            .filter(|b| b.ok)
            .map(|b| crate::cost::parse_cost(&b.cost).unwrap())
            .min()
            .unwrap();
        assert!(
            out.total_cost <= cost_from_u64(8) * best_ok.clone().max(cost_from_u64(1)),
            "total {} vs best {}",
            format_cost(&out.total_cost),
            format_cost(&best_ok)
        );
    }
}
