//! Inversion-driven sorting of bipartite instances.
//!
//! The algorithm grows a backbone of alternating representatives. Between
//! every pair of adjacent buckets it repeatedly draws a uniform random
//! bichromatic pair; a pair ordered against the backbone (an inversion) lets
//! the backbone grow by two representatives, after which the adjacent buckets
//! are pivoted against the new representatives. A per-subproblem counter
//! caps the random phase: once it reaches the current product of bucket
//! sizes, one exhaustive pass over all pairs either proves the subproblem
//! inversion-free or identifies it completely.

use crate::backbone::{pair_count_of, BackboneState, PairKey, RefinementTree, Rep};
use crate::instance::{CostModel, ElementId, Instance};
use crate::oracle::OracleSession;
use crate::stats::RunStats;
use crate::stripes::StripeDecomposition;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::{HashMap, HashSet};

/// Random pair drawing: with replacement matches the counter analysis;
/// without replacement trades memory for fewer repeated probes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SamplingMode {
    #[default]
    WithReplacement,
    WithoutReplacement,
}

#[derive(Debug, Clone, Default)]
pub struct InversionSortConfig {
    pub sampling: SamplingMode,
    /// Serve repeated probes from the memo instead of charging again.
    pub memoized_charging: bool,
}

pub(crate) fn norm_pair(a: ElementId, b: ElementId) -> u64 {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    ((lo as u64) << 32) | hi as u64
}

/// Complete direction knowledge from an exhaustive pass, keyed by the
/// id-normalized pair.
#[derive(Debug, Clone, Default)]
pub struct KnownDirections {
    map: HashMap<u64, bool>,
}

impl KnownDirections {
    pub fn record(&mut self, a: ElementId, b: ElementId, a_less: bool) {
        let v = if a < b { a_less } else { !a_less };
        self.map.insert(norm_pair(a, b), v);
    }

    pub fn less(&self, a: ElementId, b: ElementId) -> bool {
        let v = *self
            .map
            .get(&norm_pair(a, b))
            .expect("pair covered by exhaustive pass");
        if a < b {
            v
        } else {
            !v
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) enum Found {
    /// A probe found `y < x` with x from the lower, y from the upper bucket.
    Single { x: ElementId, y: ElementId },
    /// An exhaustive pass revealed every pair between the two buckets.
    Identified(KnownDirections),
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum ProbeKind {
    Search,
    Pivot,
}

/// Backbone, oracle session, and instrumentation shared by the bipartite and
/// bichromatic drivers.
pub(crate) struct SortCore<'a> {
    pub session: OracleSession<'a>,
    pub rng: ChaCha8Rng,
    pub backbone: BackboneState,
    pub tree: RefinementTree,
    pub pivot_probes: u64,
    pub search_probes: u64,
    pub rounds: u64,
    pub first_inversion: Option<(ElementId, ElementId)>,
}

impl<'a> SortCore<'a> {
    pub fn new(session: OracleSession<'a>, seed: u64) -> Self {
        let instance = session.instance();
        let backbone = BackboneState::init(instance);
        let tree = RefinementTree::with_root(
            (Rep::Low, Rep::High),
            pair_count_of(instance, Rep::Low, Rep::High),
        );
        SortCore {
            session,
            rng: ChaCha8Rng::seed_from_u64(seed),
            backbone,
            tree,
            pivot_probes: 0,
            search_probes: 0,
            rounds: 0,
            first_inversion: None,
        }
    }

    pub fn probe_less(&mut self, a: ElementId, b: ElementId, kind: ProbeKind) -> bool {
        let before = self.session.probe_count();
        let r = self
            .session
            .less(a, b)
            .expect("bichromatic pair must be allowed");
        let charged = self.session.probe_count() - before;
        match kind {
            ProbeKind::Search => self.search_probes += charged,
            ProbeKind::Pivot => self.pivot_probes += charged,
        }
        r
    }

    /// Grows the backbone with `key.0 < y < x < key.1` and pivots the two
    /// adjacent buckets. With `dirs` present, directions come from an
    /// exhaustive pass and no probes are spent.
    pub fn extend_single(
        &mut self,
        key: PairKey,
        x: ElementId,
        y: ElementId,
        dirs: Option<&KnownDirections>,
    ) {
        let i = self
            .backbone
            .index_of(key.0)
            .expect("left pivot on backbone");
        assert_eq!(self.backbone.reps[i + 1], key.1, "pivots must be adjacent");
        let supported = match dirs {
            Some(d) => !d.less(x, y),
            None => self.session.known_less(y, x) == Some(true),
        };
        assert!(supported, "inconsistent inversion: no probe shows y < x");

        let mut lower = std::mem::take(&mut self.backbone.buckets[i]);
        let mut upper = std::mem::take(&mut self.backbone.buckets[i + 1]);
        lower.retain(|&z| z != x);
        upper.retain(|&w| w != y);

        let mut lo_stay = Vec::new();
        let mut lo_to_x = Vec::new();
        for z in lower {
            let less = match dirs {
                Some(d) => d.less(z, y),
                None => self.probe_less(z, y, ProbeKind::Pivot),
            };
            if less {
                lo_stay.push(z);
            } else {
                lo_to_x.push(z);
            }
        }
        let mut up_to_y = Vec::new();
        let mut up_stay = Vec::new();
        for w in upper {
            let less = match dirs {
                Some(d) => d.less(w, x),
                None => self.probe_less(w, x, ProbeKind::Pivot),
            };
            if less {
                up_to_y.push(w);
            } else {
                up_stay.push(w);
            }
        }

        self.backbone
            .reps
            .splice(i + 1..i + 1, [Rep::Element(y), Rep::Element(x)]);
        self.backbone.buckets[i] = lo_stay;
        self.backbone.buckets.splice(i + 1..i + 1, [up_to_y, lo_to_x]);
        self.backbone.buckets[i + 3] = up_stay;

        let instance = self.session.instance();
        let (ry, rx) = (Rep::Element(y), Rep::Element(x));
        self.tree.split(
            key,
            [
                ((key.0, ry), pair_count_of(instance, key.0, ry)),
                ((ry, rx), pair_count_of(instance, ry, rx)),
                ((rx, key.1), pair_count_of(instance, rx, key.1)),
            ],
        );
    }

    /// An exhaustive pass that found inversions identified the subproblem
    /// completely: repeatedly insert the leftmost remaining inversion,
    /// placing everything from the recorded directions, until no inversion
    /// remains. Returns the pairs proven inversion-free along the way.
    pub fn extend_identified(&mut self, key: PairKey, dirs: &KnownDirections) -> Vec<PairKey> {
        let mut finished = Vec::new();
        self.extend_identified_into(key, dirs, &mut finished);
        finished
    }

    fn extend_identified_into(
        &mut self,
        key: PairKey,
        dirs: &KnownDirections,
        finished: &mut Vec<PairKey>,
    ) {
        let i = self
            .backbone
            .index_of(key.0)
            .expect("left pivot on backbone");
        assert_eq!(self.backbone.reps[i + 1], key.1);
        let lower = self.backbone.buckets[i].clone();
        let upper = self.backbone.buckets[i + 1].clone();

        let mut best: Option<(usize, usize, ElementId, ElementId)> = None;
        for &a in &lower {
            for &b in &upper {
                if dirs.less(a, b) {
                    continue; // not an inversion
                }
                let pred_y = lower.iter().filter(|&&z| z != a && dirs.less(z, b)).count();
                let pred_x = upper.iter().filter(|&&w| w != b && dirs.less(w, a)).count();
                let cand = (pred_y, pred_x, b, a);
                if best.map(|old| cand < old).unwrap_or(true) {
                    best = Some(cand);
                }
            }
        }
        match best {
            None => finished.push(key),
            Some((_, _, y, x)) => {
                self.extend_single(key, x, y, Some(dirs));
                let (ry, rx) = (Rep::Element(y), Rep::Element(x));
                self.extend_identified_into((key.0, ry), dirs, finished);
                self.extend_identified_into((ry, rx), dirs, finished);
                self.extend_identified_into((rx, key.1), dirs, finished);
            }
        }
    }

    /// Validates backbone invariants and the bucket transitivity property
    /// against the hidden order; test instrumentation.
    pub fn debug_validate(&self) {
        let instance = self.session.instance();
        self.backbone.check_invariants(instance);
        let rank = |rep: Rep| -> i64 {
            match rep {
                Rep::Low => -1,
                Rep::High => instance.len() as i64,
                Rep::Element(id) => instance.rank(id) as i64,
            }
        };
        for w in self.backbone.reps.windows(2) {
            assert!(rank(w[0]) < rank(w[1]), "backbone must be ordered");
        }
        let bucket_rank: Vec<(i64, i64)> = self
            .backbone
            .buckets
            .iter()
            .map(|b| {
                let ranks: Vec<i64> = b.iter().map(|&e| instance.rank(e) as i64).collect();
                (
                    ranks.iter().copied().min().unwrap_or(i64::MAX),
                    ranks.iter().copied().max().unwrap_or(i64::MIN),
                )
            })
            .collect();
        for i in 0..bucket_rank.len() {
            for j in i + 2..bucket_rank.len() {
                assert!(
                    bucket_rank[i].1 < bucket_rank[j].0
                        || self.backbone.buckets[i].is_empty()
                        || self.backbone.buckets[j].is_empty(),
                    "buckets {i} and {j} out of order"
                );
            }
        }
    }

    /// Final buckets re-merged with their representatives, as stripes.
    pub fn output_stripes(&self) -> StripeDecomposition {
        let instance = self.session.instance();
        let groups = self.backbone.output_groups();
        let first_color = groups
            .first()
            .map(|g| instance.color(g[0]))
            .unwrap_or(crate::instance::Color::Red);
        StripeDecomposition::new(groups, first_color)
    }
}

/// Search state of one adjacent-bucket subproblem. Keyed by the pivot pair,
/// so it survives bucket shrinking caused by neighboring pivots; the counter
/// is never reset.
#[derive(Debug, Clone, Default)]
struct SubState {
    counter: u64,
    drawn: Option<HashSet<u64>>,
    found: Option<Found>,
    finished: bool,
}

/// A resumable bipartite inversion sort over one oracle session.
pub struct InversionSortRun<'a> {
    core: SortCore<'a>,
    states: HashMap<PairKey, SubState>,
    config: InversionSortConfig,
    seed: u64,
}

impl<'a> InversionSortRun<'a> {
    pub fn new(instance: &'a Instance, seed: u64, config: InversionSortConfig) -> Self {
        let session = if config.memoized_charging {
            OracleSession::with_memoized_charging(instance)
        } else {
            OracleSession::new(instance)
        };
        InversionSortRun {
            core: SortCore::new(session, seed),
            states: HashMap::new(),
            config,
            seed,
        }
    }

    pub fn session(&self) -> &OracleSession<'a> {
        &self.core.session
    }

    pub fn backbone(&self) -> &BackboneState {
        &self.core.backbone
    }

    pub fn tree(&self) -> &RefinementTree {
        &self.core.tree
    }

    pub fn first_inversion(&self) -> Option<(ElementId, ElementId)> {
        self.core.first_inversion
    }

    pub fn rounds(&self) -> u64 {
        self.core.rounds
    }

    pub fn debug_validate(&self) {
        self.core.debug_validate();
    }

    pub fn finished(&self) -> bool {
        self.core
            .backbone
            .adjacent_pairs()
            .iter()
            .enumerate()
            .all(|(i, key)| {
                self.states.get(key).map(|s| s.finished).unwrap_or_else(|| {
                    self.core.backbone.buckets[i].is_empty()
                        || self.core.backbone.buckets[i + 1].is_empty()
                })
            })
    }

    /// One round-robin pass: every unfinished subproblem without a saved
    /// inversion draws one random pair (or runs its exhaustive pass).
    pub fn search_round(&mut self) {
        self.core.rounds += 1;
        let pair_keys = self.core.backbone.adjacent_pairs();
        for (i, key) in pair_keys.into_iter().enumerate() {
            let lower_len = self.core.backbone.buckets[i].len();
            let upper_len = self.core.backbone.buckets[i + 1].len();
            let pairs = (lower_len * upper_len) as u64;
            let st = self.states.entry(key).or_default();
            if st.finished || st.found.is_some() {
                continue;
            }
            if pairs == 0 {
                st.finished = true;
                continue;
            }
            if st.counter >= pairs {
                self.exhaustive_pass(i, key);
            } else {
                self.random_draw(i, key, lower_len, upper_len);
            }
        }
    }

    fn random_draw(&mut self, i: usize, key: PairKey, lower_len: usize, upper_len: usize) {
        let st = self.states.get_mut(&key).unwrap();
        st.counter += 1;
        let pick = match self.config.sampling {
            SamplingMode::WithReplacement => Some((
                self.core.backbone.buckets[i][self.core.rng.gen_range(0..lower_len)],
                self.core.backbone.buckets[i + 1][self.core.rng.gen_range(0..upper_len)],
            )),
            SamplingMode::WithoutReplacement => {
                let drawn = st.drawn.get_or_insert_with(HashSet::new);
                let mut pick = None;
                for _ in 0..4 * (lower_len * upper_len) {
                    let a = self.core.backbone.buckets[i][self.core.rng.gen_range(0..lower_len)];
                    let b =
                        self.core.backbone.buckets[i + 1][self.core.rng.gen_range(0..upper_len)];
                    if drawn.insert(norm_pair(a, b)) {
                        pick = Some((a, b));
                        break;
                    }
                }
                if pick.is_none() {
                    // everything drawn already: force the exhaustive pass
                    st.counter = (lower_len * upper_len) as u64;
                }
                pick
            }
        };
        let Some((a, b)) = pick else { return };
        let less = self.core.probe_less(a, b, ProbeKind::Search);
        if !less {
            if self.core.first_inversion.is_none() {
                self.core.first_inversion = Some((a, b));
            }
            self.states.get_mut(&key).unwrap().found = Some(Found::Single { x: a, y: b });
        }
    }

    /// Doubly nested loop over the remaining unprobed pairs of the two
    /// buckets; already-revealed pairs are read from the memo. Leaves either
    /// a finished subproblem or complete direction knowledge for extension.
    fn exhaustive_pass(&mut self, i: usize, key: PairKey) {
        let lower = self.core.backbone.buckets[i].clone();
        let upper = self.core.backbone.buckets[i + 1].clone();
        let mut dirs = KnownDirections::default();
        let mut any_inversion = false;
        for &a in &lower {
            for &b in &upper {
                let less = match self.core.session.known_less(a, b) {
                    Some(known) => known,
                    None => self.core.probe_less(a, b, ProbeKind::Search),
                };
                dirs.record(a, b, less);
                if !less {
                    any_inversion = true;
                }
            }
        }
        let st = self.states.get_mut(&key).unwrap();
        if any_inversion {
            st.found = Some(Found::Identified(dirs));
        } else {
            st.finished = true;
        }
    }

    /// Inserts all inversions found this round, left to right.
    pub fn extend_round(&mut self) {
        let fired: Vec<PairKey> = self
            .core
            .backbone
            .adjacent_pairs()
            .into_iter()
            .filter(|key| {
                self.states
                    .get(key)
                    .map(|s| s.found.is_some())
                    .unwrap_or(false)
            })
            .collect();
        for key in fired {
            let found = self.states.get_mut(&key).unwrap().found.take().unwrap();
            self.states.remove(&key);
            match found {
                Found::Single { x, y } => self.core.extend_single(key, x, y, None),
                Found::Identified(dirs) => {
                    for done in self.core.extend_identified(key, &dirs) {
                        self.states.insert(
                            done,
                            SubState {
                                finished: true,
                                ..Default::default()
                            },
                        );
                    }
                }
            }
        }
    }

    pub fn into_output(self) -> (StripeDecomposition, RunStats) {
        let decomp = self.core.output_stripes();
        let stats = RunStats {
            seed: self.seed,
            n: self.core.session.instance().len(),
            size_vector: decomp.size_vector(),
            total_cost: self.core.session.total_cost(),
            pivot_cost: self.core.pivot_probes,
            search_cost: self.core.search_probes,
            tree_depth: self.core.tree.max_depth(),
            rounds: self.core.rounds,
        };
        (decomp, stats)
    }
}

/// Runs inversion sort to completion on a bipartite instance and returns the
/// recovered stripes with run statistics.
pub fn run_bipartite(
    instance: &Instance,
    seed: u64,
    config: InversionSortConfig,
) -> (StripeDecomposition, RunStats) {
    assert!(
        matches!(instance.cost_model(), CostModel::BipartiteUnit),
        "run_bipartite expects a unit-cost bipartite instance"
    );
    let mut run = InversionSortRun::new(instance, seed, config);
    while !run.finished() {
        run.search_round();
        run.extend_round();
    }
    run.into_output()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use crate::stripes::stripes_of;

    #[test]
    fn two_element_instance_single_probe() {
        let inst = gen::interleaved(1, 7).unwrap();
        let (decomp, stats) = run_bipartite(&inst, 0, InversionSortConfig::default());
        assert_eq!(decomp.size_vector(), vec![1, 1]);
        assert_eq!(stats.total_cost, crate::cost::cost_from_u64(1));
    }

    #[test]
    fn empty_and_monochrome_buckets_finish_without_probes() {
        let inst = gen::two_block(3, 0, 5).unwrap();
        let (decomp, stats) = run_bipartite(&inst, 1, InversionSortConfig::default());
        assert_eq!(decomp.size_vector(), vec![3]);
        assert_eq!(stats.total_cost, crate::cost::cost_from_u64(0));
    }

    #[test]
    fn two_block_exhausts_within_twice_the_pairs() {
        // no inversion exists: counter rule allows 9 random draws, then the
        // exhaustive pass probes the 9 pairs once more
        let inst = gen::two_block(3, 3, 11).unwrap();
        let (decomp, stats) = run_bipartite(&inst, 3, InversionSortConfig::default());
        assert_eq!(decomp.size_vector(), vec![3, 3]);
        assert!(stats.search_cost <= 2 * 9, "got {}", stats.search_cost);
        assert_eq!(stats.pivot_cost, 0);
    }

    #[test]
    fn singleton_buckets_with_inversion_recover_stripes() {
        let inst = gen::from_color_pattern("RBBR", 0).unwrap();
        let (decomp, _) = run_bipartite(&inst, 5, InversionSortConfig::default());
        assert!(decomp.same_stripes(&stripes_of(&inst)));
    }

    #[test]
    fn recovers_stripes_on_seeded_random_instances() {
        for seed in 0..60 {
            let inst = gen::random_bipartite(24, seed).unwrap();
            let (decomp, _) = run_bipartite(&inst, seed ^ 0xdead, InversionSortConfig::default());
            assert!(
                decomp.same_stripes(&stripes_of(&inst)),
                "seed {seed}: got {:?} want {:?}",
                decomp.size_vector(),
                stripes_of(&inst).size_vector()
            );
        }
    }

    #[test]
    fn memoized_and_without_replacement_modes_also_recover_stripes() {
        for seed in 0..20 {
            let inst = gen::random_bipartite(18, seed).unwrap();
            let cfg = InversionSortConfig {
                sampling: SamplingMode::WithoutReplacement,
                memoized_charging: true,
            };
            let (decomp, _) = run_bipartite(&inst, seed, cfg);
            assert!(decomp.same_stripes(&stripes_of(&inst)));
        }
    }

    #[test]
    fn backbone_invariants_hold_every_round() {
        let inst = gen::random_bipartite(20, 99).unwrap();
        let mut run = InversionSortRun::new(&inst, 4, InversionSortConfig::default());
        let mut guard = 0;
        while !run.finished() {
            run.search_round();
            run.extend_round();
            run.debug_validate();
            guard += 1;
            assert!(guard < 10_000);
        }
    }

    #[test]
    fn pivoting_is_charged_once_an_inversion_is_inserted() {
        let inst = gen::from_color_pattern("RRRRBRBBBB", 2).unwrap();
        let (decomp, stats) = run_bipartite(&inst, 8, InversionSortConfig::default());
        assert!(decomp.same_stripes(&stripes_of(&inst)));
        assert!(stats.pivot_cost > 0);
    }
}
