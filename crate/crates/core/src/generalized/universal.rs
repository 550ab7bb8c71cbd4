//! Universal sorting over a restricted cost-class set: computes the exact
//! transitive reduction of the DAG spanned by all allowed pairs.
//!
//! After probing every cost-0 pair, the engine alternates three ways of
//! making progress until no allowed pair is left undetermined:
//! balanced edges (sampled direction probability inside a constant band),
//! free edges (estimated in-degree of the head below the activity
//! threshold), and, when no free edge exists, resolving everything against
//! the known-order live set of smallest average rank via per-chain binary
//! searches. Estimation errors cost probes, never correctness: the output
//! reduction is computed from fully determined directions.

use super::predecessor::resolve_against_chain;
use super::ranks::ExtensionSampler;
use crate::cost::Cost;
use crate::dag::RevealedDag;
use crate::instance::{CostModel, ElementId, FourCost, Instance};
use crate::oracle::OracleSession;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct UniversalConfig {
    /// Extension samples drawn per progress iteration.
    pub samples: usize,
    /// Steps between retained samples, times n.
    pub thin_factor: u64,
    /// Initial burn-in, times n^3.
    pub burn_in_factor: u64,
    /// Chain steps after each revealed edge, times n.
    pub reheat_factor: u64,
    /// Activity threshold multiplier: a head is active with at most
    /// `indegree_factor * sqrt(n) * log2(n)` estimated unprobed in-edges.
    pub indegree_factor: f64,
    /// Direction-probability band for balanced edges.
    pub balanced_band: (f64, f64),
    /// Candidate pairs examined per balanced-edge scan.
    pub balanced_candidates: usize,
    /// Probe everything once the zero-cost skeleton is wider than
    /// sqrt(n) / divisor; `None` disables the fallback.
    pub width_fallback_divisor: Option<f64>,
}

impl Default for UniversalConfig {
    fn default() -> Self {
        UniversalConfig {
            samples: 48,
            thin_factor: 4,
            burn_in_factor: 10,
            reheat_factor: 16,
            indegree_factor: 4.0,
            balanced_band: (1.0 / 3.0, 2.0 / 3.0),
            balanced_candidates: 24,
            width_fallback_divisor: Some(4.0),
        }
    }
}

/// Which cost classes of a four-level instance the engine may probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AllowedClasses {
    pub zero: bool,
    pub one: bool,
    pub f: bool,
}

impl AllowedClasses {
    pub const ZERO_ONE: AllowedClasses = AllowedClasses {
        zero: true,
        one: true,
        f: false,
    };
    pub const ALL_FINITE: AllowedClasses = AllowedClasses {
        zero: true,
        one: true,
        f: true,
    };

    pub fn admits(&self, class: FourCost) -> bool {
        match class {
            FourCost::Zero => self.zero,
            FourCost::One => self.one,
            FourCost::F => self.f,
            FourCost::Inf => false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EngineOutcome {
    /// Transitive reduction of the DAG spanned by the allowed pairs.
    pub reduction: Vec<(ElementId, ElementId)>,
    /// Revealed DAG holding a direction for every allowed pair.
    pub dag: RevealedDag,
    pub cost: Cost,
    pub probes: u64,
    pub balanced_probes: u64,
    pub free_probes: u64,
    pub chain_probes: u64,
    /// Width fallback fired: everything was probed outright.
    pub fallback: bool,
}

fn class_of(instance: &Instance, u: ElementId, v: ElementId) -> FourCost {
    match instance.cost_model() {
        CostModel::FourLevel { classes, .. } => classes.get(u, v),
        _ => panic!("universal engine expects a four-level instance"),
    }
}

struct Engine<'a, 's> {
    session: &'s mut OracleSession<'a>,
    dag: RevealedDag,
    allowed_pairs: Vec<(ElementId, ElementId)>,
    rng: ChaCha8Rng,
    config: UniversalConfig,
}

impl<'a, 's> Engine<'a, 's> {
    fn probe(&mut self, u: ElementId, v: ElementId) -> u64 {
        if self.dag.known_less(u, v).is_some() {
            return 0;
        }
        let less = self.session.less(u, v).expect("allowed pair");
        let (a, b) = if less { (u, v) } else { (v, u) };
        self.dag.add_edge(a, b).expect("true directions are acyclic");
        1
    }

    fn unknown_pairs(&self) -> Vec<(ElementId, ElementId)> {
        self.allowed_pairs
            .iter()
            .copied()
            .filter(|&(u, v)| self.dag.known_less(u, v).is_none())
            .collect()
    }
}

/// Runs the engine on a four-level instance restricted to `classes`.
/// Every allowed pair ends with a known direction; the returned reduction is
/// exact for the DAG of all allowed pairs.
pub fn universal_sort(
    session: &mut OracleSession,
    classes: AllowedClasses,
    config: &UniversalConfig,
    seed: u64,
) -> EngineOutcome {
    use rand::SeedableRng;
    let instance = session.instance();
    let n = instance.len();
    let mut allowed_pairs = Vec::new();
    let mut zero_pairs = Vec::new();
    for u in 0..n as ElementId {
        for v in u + 1..n as ElementId {
            let class = class_of(instance, u, v);
            if classes.admits(class) {
                allowed_pairs.push((u, v));
                if class == FourCost::Zero {
                    zero_pairs.push((u, v));
                }
            }
        }
    }
    let mut eng = Engine {
        session,
        dag: RevealedDag::new(n),
        allowed_pairs,
        rng: ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15),
        config: config.clone(),
    };

    let mut probes = 0u64;
    let mut balanced_probes = 0u64;
    let mut free_probes = 0u64;
    let mut chain_probes = 0u64;
    let mut fallback = false;

    // reveal the whole zero-cost skeleton outright
    for (u, v) in zero_pairs {
        let less = eng.session.less(u, v).expect("zero-cost pair");
        probes += 1;
        if eng.dag.known_less(u, v).is_none() {
            let (a, b) = if less { (u, v) } else { (v, u) };
            eng.dag.add_edge(a, b).expect("true directions are acyclic");
        }
    }

    // wide zero-cost skeleton: probing everything is already within budget
    if let Some(div) = eng.config.width_fallback_divisor {
        if (eng.dag.width() as f64) >= (n as f64).sqrt() / div {
            fallback = true;
            for (u, v) in eng.unknown_pairs() {
                probes += eng.probe(u, v);
            }
        }
    }

    let mut sampler = ExtensionSampler::new(&eng.dag);
    if !fallback && !eng.unknown_pairs().is_empty() {
        sampler.steps(
            &eng.dag,
            eng.config.burn_in_factor * (n as u64).pow(3),
            &mut eng.rng,
        );
    }

    let threshold =
        eng.config.indegree_factor * (n as f64).sqrt() * (n.max(2) as f64).log2();

    loop {
        let unknown = eng.unknown_pairs();
        if unknown.is_empty() {
            break;
        }
        sampler.repair(&eng.dag);
        sampler.steps(
            &eng.dag,
            eng.config.reheat_factor * n as u64,
            &mut eng.rng,
        );
        // sample extension positions
        let mut samples: Vec<Vec<usize>> = Vec::with_capacity(eng.config.samples);
        for _ in 0..eng.config.samples {
            sampler.steps(&eng.dag, eng.config.thin_factor * n as u64, &mut eng.rng);
            samples.push(sampler.positions().to_vec());
        }
        let mean_pos = |v: ElementId| -> f64 {
            samples.iter().map(|s| s[v as usize] as f64).sum::<f64>() / samples.len() as f64
        };

        // 1. balanced edge: examine the unknown pairs with closest mean ranks
        let mut by_gap: Vec<(f64, (ElementId, ElementId))> = unknown
            .iter()
            .map(|&(u, v)| ((mean_pos(u) - mean_pos(v)).abs(), (u, v)))
            .collect();
        by_gap.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut balanced = None;
        for &(_, (u, v)) in by_gap.iter().take(eng.config.balanced_candidates) {
            let below = samples
                .iter()
                .filter(|s| s[u as usize] < s[v as usize])
                .count() as f64
                / samples.len() as f64;
            if below >= eng.config.balanced_band.0 && below <= eng.config.balanced_band.1 {
                balanced = Some((u, v));
                break;
            }
        }
        if let Some((u, v)) = balanced {
            let p = eng.probe(u, v);
            probes += p;
            balanced_probes += p;
            continue;
        }

        // 2. free edges: orient unknown pairs by mean rank, count estimated
        // unprobed in-edges per head, probe every edge into an active head
        let mut indeg_est = vec![0u64; n];
        for &(u, v) in &unknown {
            let head = if mean_pos(u) < mean_pos(v) { v } else { u };
            indeg_est[head as usize] += 1;
        }
        let mut any_free = 0u64;
        for &(u, v) in &unknown {
            let head = if mean_pos(u) < mean_pos(v) { v } else { u };
            if (indeg_est[head as usize] as f64) <= threshold {
                let p = eng.probe(u, v);
                any_free += p;
            }
        }
        if any_free > 0 {
            probes += any_free;
            free_probes += any_free;
            continue;
        }

        // 3. live set of smallest average rank with a strict rank bound, its
        // order fully revealed, everything else resolved against its chains
        let mut live: Vec<ElementId> = (0..n as ElementId)
            .filter(|&v| {
                unknown
                    .iter()
                    .any(|&(a, b)| a == v || b == v)
            })
            .collect();
        live.sort_by(|&a, &b| {
            mean_pos(a)
                .partial_cmp(&mean_pos(b))
                .unwrap()
                .then(a.cmp(&b))
        });
        let target = ((n as f64).sqrt().ceil() as usize).clamp(1, live.len());
        let bound = mean_pos(live[target - 1]);
        let mut set: Vec<ElementId> = live
            .iter()
            .copied()
            .filter(|&v| mean_pos(v) < bound)
            .collect();
        if set.len() < 2 {
            set = live.iter().copied().take(target.max(2)).collect();
        }
        let mut step_probes = 0u64;
        let in_set = |v: ElementId, set: &[ElementId]| set.contains(&v);
        // reveal the set internally
        for i in 0..set.len() {
            for j in i + 1..set.len() {
                if eng
                    .allowed_pairs
                    .binary_search(&ordered(set[i], set[j]))
                    .is_ok()
                {
                    step_probes += eng.probe(set[i], set[j]);
                }
            }
        }
        // chain cover of the set under the revealed order
        let chains = chains_within(&eng.dag, &set);
        let allowed = |u: ElementId, v: ElementId| -> bool {
            eng.allowed_pairs.binary_search(&ordered(u, v)).is_ok()
        };
        for &x in &live {
            if in_set(x, &set) {
                continue;
            }
            for chain in &chains {
                let before = eng.session.probe_count();
                resolve_against_chain(&eng.dag, chain, x, eng.session, &allowed);
                let charged = eng.session.probe_count() - before;
                step_probes += charged;
                // fold newly probed directions into the DAG
                for &s in chain {
                    if eng.dag.known_less(s, x).is_none() {
                        if let Some(less) = eng.session.known_less(s, x) {
                            let (a, b) = if less { (s, x) } else { (x, s) };
                            eng.dag.add_edge(a, b).expect("true directions");
                        }
                    }
                }
            }
        }
        // exhaust any remaining unknown pair incident to the set
        for (u, v) in eng.unknown_pairs() {
            if in_set(u, &set) || in_set(v, &set) {
                step_probes += eng.probe(u, v);
            }
        }
        if step_probes == 0 {
            // estimates left nothing actionable: force progress
            let (u, v) = eng.unknown_pairs()[0];
            step_probes += eng.probe(u, v);
        }
        probes += step_probes;
        chain_probes += step_probes;
    }

    let reduction = eng.dag.transitive_reduction();
    EngineOutcome {
        reduction,
        dag: eng.dag,
        cost: eng.session.total_cost(),
        probes,
        balanced_probes,
        free_probes,
        chain_probes,
        fallback,
    }
}

fn ordered(u: ElementId, v: ElementId) -> (ElementId, ElementId) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

/// Minimum chain cover of the revealed order restricted to `set`.
fn chains_within(dag: &RevealedDag, set: &[ElementId]) -> Vec<Vec<ElementId>> {
    let mut sub = RevealedDag::new(set.len());
    for (i, &u) in set.iter().enumerate() {
        for (j, &v) in set.iter().enumerate() {
            if i != j && dag.reaches(u, v) {
                sub.add_edge(i as ElementId, j as ElementId)
                    .expect("projection of a DAG is acyclic");
            }
        }
    }
    sub.chain_cover()
        .into_iter()
        .map(|chain| chain.into_iter().map(|i| set[i as usize]).collect())
        .collect()
}

/// Probes only cost-0 and cost-1 edges and returns the exact transitive
/// reduction of the DAG they span.
pub fn universal_sort_01(
    session: &mut OracleSession,
    config: &UniversalConfig,
    seed: u64,
) -> EngineOutcome {
    universal_sort(session, AllowedClasses::ZERO_ONE, config, seed)
}

/// Brute-force reduction of the true DAG spanned by the allowed classes;
/// the independent route used by tests and the dispatcher's bookkeeping.
pub fn ground_truth_reduction(
    instance: &Instance,
    classes: AllowedClasses,
) -> Vec<(ElementId, ElementId)> {
    let n = instance.len();
    let mut dag = RevealedDag::new(n);
    for u in 0..n as ElementId {
        for v in u + 1..n as ElementId {
            if classes.admits(class_of(instance, u, v)) {
                let (a, b) = if instance.less(u, v) { (u, v) } else { (v, u) };
                dag.add_edge(a, b).unwrap();
            }
        }
    }
    dag.transitive_reduction()
}

/// Width of the true DAG spanned by the allowed classes (post-hoc reporting).
pub fn ground_truth_width(instance: &Instance, classes: AllowedClasses) -> usize {
    let n = instance.len();
    let mut dag = RevealedDag::new(n);
    for u in 0..n as ElementId {
        for v in u + 1..n as ElementId {
            if classes.admits(class_of(instance, u, v)) {
                let (a, b) = if instance.less(u, v) { (u, v) } else { (v, u) };
                dag.add_edge(a, b).unwrap();
            }
        }
    }
    dag.width()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::cost_zero;
    use crate::gen::{four_level, FourLevelParams};

    #[test]
    fn all_zero_cost_instance_probes_only_zero_edges() {
        let params = FourLevelParams {
            k_f: 0,
            k_1: 0,
            p_zero: 1.0,
            p_one: 0.0,
            p_f: 0.0,
            f: None,
        };
        let inst = four_level(12, &params, 3).unwrap();
        let mut session = OracleSession::new(&inst);
        let out = universal_sort_01(&mut session, &UniversalConfig::default(), 0);
        assert_eq!(out.cost, cost_zero());
        assert_eq!(out.probes as usize, 12 * 11 / 2);
        // all pairs revealed: reduction is the Hamiltonian path
        let expect: Vec<_> = inst
            .hidden_order()
            .windows(2)
            .map(|w| (w[0], w[1]))
            .collect();
        let mut expect = expect;
        expect.sort_unstable();
        assert_eq!(out.reduction, expect);
    }

    #[test]
    fn engine_reduction_matches_ground_truth_on_seeded_instances() {
        for seed in 0..12 {
            let params = FourLevelParams {
                k_f: 1,
                k_1: 4,
                p_zero: 0.3,
                p_one: 0.3,
                p_f: 0.05,
                f: None,
            };
            let inst = four_level(20, &params, seed).unwrap();
            let mut session = OracleSession::new(&inst);
            let out = universal_sort_01(&mut session, &UniversalConfig::default(), seed);
            assert_eq!(
                out.reduction,
                ground_truth_reduction(&inst, AllowedClasses::ZERO_ONE),
                "seed {seed}"
            );
        }
    }

    #[test]
    fn wide_zero_skeleton_triggers_probe_everything_fallback() {
        // no zero-cost edges at all: width n >= sqrt(n)/4
        let params = FourLevelParams {
            k_f: 0,
            k_1: 15,
            p_zero: 0.0,
            p_one: 0.6,
            p_f: 0.0,
            f: None,
        };
        let inst = four_level(16, &params, 4).unwrap();
        let mut session = OracleSession::new(&inst);
        let out = universal_sort_01(&mut session, &UniversalConfig::default(), 0);
        assert!(out.fallback);
        assert_eq!(
            out.reduction,
            ground_truth_reduction(&inst, AllowedClasses::ZERO_ONE)
        );
        // every allowed pair ends determined, without exceeding one probe each
        let allowed: Vec<(u32, u32)> = (0..16u32)
            .flat_map(|u| (u + 1..16).map(move |v| (u, v)))
            .filter(|&(u, v)| inst.cost(u, v).is_some())
            .collect();
        assert!(out.probes as usize <= allowed.len());
        for (u, v) in allowed {
            assert!(out.dag.known_less(u, v).is_some());
        }
    }

    #[test]
    fn main_loop_is_exact_with_fallback_disabled() {
        let config = UniversalConfig {
            width_fallback_divisor: None,
            ..Default::default()
        };
        for seed in 0..8 {
            let params = FourLevelParams {
                k_f: 0,
                k_1: 6,
                p_zero: 0.35,
                p_one: 0.25,
                p_f: 0.0,
                f: None,
            };
            let inst = four_level(24, &params, 100 + seed).unwrap();
            let mut session = OracleSession::new(&inst);
            let out = universal_sort_01(&mut session, &config, seed);
            assert!(!out.fallback);
            assert_eq!(
                out.reduction,
                ground_truth_reduction(&inst, AllowedClasses::ZERO_ONE),
                "seed {seed}"
            );
        }
    }
}
