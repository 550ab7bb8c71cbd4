//! Bichromatic sorting: inversion sort with budgeted monochromatic
//! comparisons, followed by per-stripe merge sort.
//!
//! While searching for inversions, every bichromatic comparison accrues
//! fractional credit (1/alpha red, 1/beta blue) toward monochromatic
//! comparisons that maintain a sampled maximum of the lower bucket and a
//! sampled minimum of the upper bucket. Each random bichromatic draw is a
//! triple: the random pair itself, one random element against the sampled
//! max, one against the sampled min. When the accumulated randomized cost of
//! a subproblem exceeds the cheapest of the four no-inversion proofs, that
//! proof is executed deterministically.

use crate::cost::{cost_from_u64, cost_one, Cost};
use crate::instance::{Color, CostModel, ElementId, Instance};
use crate::inversion::{Found, KnownDirections, ProbeKind, SortCore};
use crate::oracle::OracleSession;
use crate::stats::RunStats;
use crate::stripes::StripeDecomposition;
use num_traits::One;
use rand::Rng;
use std::collections::{HashMap, HashSet};

/// The four ways to prove two adjacent buckets hold no inversion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProofKind {
    /// All A*B bichromatic comparisons.
    AllPairs,
    /// Find the red (lower) maximum, compare it to every blue.
    RedMax,
    /// Find the blue (upper) minimum, compare it to every red.
    BlueMin,
    /// Find both extremes and compare them once.
    BothExtremes,
}

/// Cheapest proof for bucket sizes A (lower/red) and B (upper/blue) with
/// monochromatic costs alpha and beta. Ties break in the listed order.
pub fn cheapest_proof(a: u64, b: u64, alpha: &Cost, beta: &Cost) -> (Cost, ProofKind) {
    assert!(a >= 1 && b >= 1, "proofs need nonempty buckets");
    let (ar, br) = (cost_from_u64(a), cost_from_u64(b));
    let am1 = cost_from_u64(a - 1);
    let bm1 = cost_from_u64(b - 1);
    let candidates = [
        (&ar * &br, ProofKind::AllPairs),
        (alpha * &am1 + &br, ProofKind::RedMax),
        (beta * &bm1 + &ar, ProofKind::BlueMin),
        (alpha * &am1 + beta * &bm1 + cost_one(), ProofKind::BothExtremes),
    ];
    let mut best = candidates[0].clone();
    for c in &candidates[1..] {
        if c.0 < best.0 {
            best = c.clone();
        }
    }
    best
}

/// Sampled extreme of one bucket: `chain` records successive extremes, the
/// current one being the latest chain entry still present in the bucket.
#[derive(Debug, Clone, Default)]
struct ExtremeSample {
    sampled: HashSet<ElementId>,
    chain: Vec<ElementId>,
}

impl ExtremeSample {
    fn current(&self, bucket: &[ElementId]) -> Option<ElementId> {
        self.chain.iter().rev().copied().find(|e| bucket.contains(e))
    }

    fn pick_unsampled(&self, bucket: &[ElementId], rng: &mut impl Rng) -> Option<ElementId> {
        let fresh: Vec<ElementId> = bucket
            .iter()
            .copied()
            .filter(|e| !self.sampled.contains(e))
            .collect();
        if fresh.is_empty() {
            None
        } else {
            Some(fresh[rng.gen_range(0..fresh.len())])
        }
    }
}

#[derive(Debug, Clone, Default)]
struct BiState {
    /// Randomized inversion-finding cost accumulated so far.
    accumulated: Cost,
    lower_credit: Cost,
    upper_credit: Cost,
    lower_sample: ExtremeSample,
    upper_sample: ExtremeSample,
    found: Option<Found>,
    finished: bool,
}

pub struct BichromaticOutcome {
    pub order: Vec<ElementId>,
    pub stripes: StripeDecomposition,
    /// Total cost charged during stripe recovery, before stripe sorting.
    pub phase1_cost: Cost,
    pub stats: RunStats,
    /// Final per-class probe counts.
    pub ledger: crate::cost::CostLedger,
}

struct BichromaticRun<'a> {
    core: SortCore<'a>,
    states: HashMap<crate::backbone::PairKey, BiState>,
    alpha: Cost,
    beta: Cost,
}

impl<'a> BichromaticRun<'a> {
    fn mono_cost(&self, color: Color) -> Cost {
        match color {
            Color::Red => self.alpha.clone(),
            Color::Blue => self.beta.clone(),
        }
    }

    fn finished(&self) -> bool {
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

    fn search_round(&mut self) {
        self.core.rounds += 1;
        let pair_keys = self.core.backbone.adjacent_pairs();
        for (i, key) in pair_keys.into_iter().enumerate() {
            let a = self.core.backbone.buckets[i].len() as u64;
            let b = self.core.backbone.buckets[i + 1].len() as u64;
            {
                let st = self.states.entry(key).or_default();
                if st.finished || st.found.is_some() {
                    continue;
                }
                if a * b == 0 {
                    st.finished = true;
                    continue;
                }
            }
            if self.resolve_from_memo(i, key) {
                continue;
            }
            let instance = self.core.session.instance();
            let lower_color = self.core.backbone.reps[i].color(instance);
            let gl = self.mono_cost(lower_color);
            let gu = self.mono_cost(lower_color.flip());
            let (proof_cost, proof_kind) = cheapest_proof(a, b, &gl, &gu);
            let exceeded = self.states.get(&key).unwrap().accumulated > proof_cost;
            if exceeded {
                self.execute_proof(i, key, proof_kind, &gl, &gu);
            } else {
                self.triple_step(i, key, &gl, &gu);
            }
        }
    }

    /// When every pair between the two buckets is already revealed, the
    /// subproblem is settled for free from the memo.
    fn resolve_from_memo(&mut self, i: usize, key: crate::backbone::PairKey) -> bool {
        let lower = &self.core.backbone.buckets[i];
        let upper = &self.core.backbone.buckets[i + 1];
        let mut dirs = KnownDirections::default();
        let mut any_inversion = false;
        for &a in lower {
            for &b in upper {
                match self.core.session.known_less(a, b) {
                    Some(less) => {
                        dirs.record(a, b, less);
                        any_inversion |= !less;
                    }
                    None => return false,
                }
            }
        }
        let st = self.states.get_mut(&key).unwrap();
        if any_inversion {
            st.found = Some(Found::Identified(dirs));
        } else {
            st.finished = true;
        }
        true
    }

    /// One random bichromatic pair plus one random-vs-max and one
    /// random-vs-min companion probe, then any monochromatic comparisons the
    /// accrued credit pays for.
    fn triple_step(&mut self, i: usize, key: crate::backbone::PairKey, gl: &Cost, gu: &Cost) {
        let mut bichromatic = 0u64;
        let mut found: Option<(ElementId, ElementId)> = None;

        let lower_len = self.core.backbone.buckets[i].len();
        let upper_len = self.core.backbone.buckets[i + 1].len();
        let a = self.core.backbone.buckets[i][self.core.rng.gen_range(0..lower_len)];
        let b = self.core.backbone.buckets[i + 1][self.core.rng.gen_range(0..upper_len)];
        bichromatic += 1;
        if !self.core.probe_less(a, b, ProbeKind::Search) {
            found = Some((a, b));
        }

        if found.is_none() {
            let mx = self.states[&key]
                .lower_sample
                .current(&self.core.backbone.buckets[i]);
            if let Some(mx) = mx {
                let b2 = self.core.backbone.buckets[i + 1][self.core.rng.gen_range(0..upper_len)];
                bichromatic += 1;
                if !self.core.probe_less(mx, b2, ProbeKind::Search) {
                    found = Some((mx, b2));
                }
            }
        }
        if found.is_none() {
            let mn = self.states[&key]
                .upper_sample
                .current(&self.core.backbone.buckets[i + 1]);
            if let Some(mn) = mn {
                let a2 = self.core.backbone.buckets[i][self.core.rng.gen_range(0..lower_len)];
                bichromatic += 1;
                if !self.core.probe_less(a2, mn, ProbeKind::Search) {
                    found = Some((a2, mn));
                }
            }
        }

        {
            let st = self.states.get_mut(&key).unwrap();
            let bich = cost_from_u64(bichromatic);
            st.accumulated += &bich;
            st.lower_credit += &bich / gl;
            st.upper_credit += &bich / gu;
        }

        if found.is_none() {
            found = self.fire_mono_comparisons(i, key, gl, gu);
        }

        if let Some((x, y)) = found {
            if self.core.first_inversion.is_none() {
                self.core.first_inversion = Some((x, y));
            }
            self.states.get_mut(&key).unwrap().found = Some(Found::Single { x, y });
        }
    }

    /// Spends accrued credit maintaining the bucket samples: a random
    /// unsampled element is compared to the current extreme; a new extreme is
    /// additionally compared against the opposing extreme, which can reveal
    /// an inversion directly.
    fn fire_mono_comparisons(
        &mut self,
        i: usize,
        key: crate::backbone::PairKey,
        gl: &Cost,
        gu: &Cost,
    ) -> Option<(ElementId, ElementId)> {
        // lower side maintains a max
        while self.states[&key].lower_credit >= Cost::one() {
            self.states.get_mut(&key).unwrap().lower_credit -= Cost::one();
            let bucket = self.core.backbone.buckets[i].clone();
            let st = self.states.get_mut(&key).unwrap();
            let Some(z) = st.lower_sample.pick_unsampled(&bucket, &mut self.core.rng) else {
                break;
            };
            st.lower_sample.sampled.insert(z);
            let Some(mx) = st.lower_sample.current(&bucket) else {
                st.lower_sample.chain.push(z); // seed: no comparison yet
                continue;
            };
            let z_is_new_max = !self.core.probe_less(z, mx, ProbeKind::Search);
            self.states.get_mut(&key).unwrap().accumulated += gl;
            if z_is_new_max {
                self.states.get_mut(&key).unwrap().lower_sample.chain.push(z);
                let mn = self.states[&key]
                    .upper_sample
                    .current(&self.core.backbone.buckets[i + 1]);
                if let Some(mn) = mn {
                    self.states.get_mut(&key).unwrap().accumulated += cost_one();
                    if !self.core.probe_less(z, mn, ProbeKind::Search) {
                        return Some((z, mn));
                    }
                }
            }
        }
        // upper side maintains a min
        while self.states[&key].upper_credit >= Cost::one() {
            self.states.get_mut(&key).unwrap().upper_credit -= Cost::one();
            let bucket = self.core.backbone.buckets[i + 1].clone();
            let st = self.states.get_mut(&key).unwrap();
            let Some(z) = st.upper_sample.pick_unsampled(&bucket, &mut self.core.rng) else {
                break;
            };
            st.upper_sample.sampled.insert(z);
            let Some(mn) = st.upper_sample.current(&bucket) else {
                st.upper_sample.chain.push(z);
                continue;
            };
            let z_is_new_min = self.core.probe_less(z, mn, ProbeKind::Search);
            self.states.get_mut(&key).unwrap().accumulated += gu;
            if z_is_new_min {
                self.states.get_mut(&key).unwrap().upper_sample.chain.push(z);
                let mx = self.states[&key]
                    .lower_sample
                    .current(&self.core.backbone.buckets[i]);
                if let Some(mx) = mx {
                    self.states.get_mut(&key).unwrap().accumulated += cost_one();
                    if !self.core.probe_less(mx, z, ProbeKind::Search) {
                        return Some((mx, z));
                    }
                }
            }
        }
        None
    }

    /// Deterministically performs the comparisons of the chosen proof. A
    /// completed proof finishes the subproblem; a failed one yields an
    /// inversion whose non-extreme endpoint is uniform among the eligible
    /// elements.
    fn execute_proof(
        &mut self,
        i: usize,
        key: crate::backbone::PairKey,
        kind: ProofKind,
        _gl: &Cost,
        _gu: &Cost,
    ) {
        let lower = self.core.backbone.buckets[i].clone();
        let upper = self.core.backbone.buckets[i + 1].clone();
        let outcome = match kind {
            ProofKind::AllPairs => {
                let mut dirs = KnownDirections::default();
                let mut any = false;
                for &a in &lower {
                    for &b in &upper {
                        let less = match self.core.session.known_less(a, b) {
                            Some(known) => known,
                            None => self.core.probe_less(a, b, ProbeKind::Search),
                        };
                        dirs.record(a, b, less);
                        any |= !less;
                    }
                }
                if any {
                    Some(Found::Identified(dirs))
                } else {
                    None
                }
            }
            ProofKind::RedMax => {
                let mx = self.scan_extreme(&lower, true);
                let eligible: Vec<ElementId> = upper
                    .iter()
                    .copied()
                    .filter(|&b| !self.core.probe_less(mx, b, ProbeKind::Search))
                    .collect();
                if eligible.is_empty() {
                    None
                } else {
                    let y = eligible[self.core.rng.gen_range(0..eligible.len())];
                    Some(Found::Single { x: mx, y })
                }
            }
            ProofKind::BlueMin => {
                let mn = self.scan_extreme(&upper, false);
                let eligible: Vec<ElementId> = lower
                    .iter()
                    .copied()
                    .filter(|&a| !self.core.probe_less(a, mn, ProbeKind::Search))
                    .collect();
                if eligible.is_empty() {
                    None
                } else {
                    let x = eligible[self.core.rng.gen_range(0..eligible.len())];
                    Some(Found::Single { x, y: mn })
                }
            }
            ProofKind::BothExtremes => {
                let mx = self.scan_extreme(&lower, true);
                let mn = self.scan_extreme(&upper, false);
                if self.core.probe_less(mx, mn, ProbeKind::Search) {
                    None
                } else {
                    Some(Found::Single { x: mx, y: mn })
                }
            }
        };
        let st = self.states.get_mut(&key).unwrap();
        match outcome {
            None => st.finished = true,
            Some(found) => {
                if self.core.first_inversion.is_none() {
                    if let Found::Single { x, y } = found {
                        self.core.first_inversion = Some((x, y));
                    }
                }
                st.found = Some(found);
            }
        }
    }

    /// Linear monochromatic scan for the maximum (or minimum) of a bucket.
    fn scan_extreme(&mut self, bucket: &[ElementId], want_max: bool) -> ElementId {
        let mut best = bucket[0];
        for &z in &bucket[1..] {
            let best_less = self.core.probe_less(best, z, ProbeKind::Search);
            if best_less == want_max {
                best = z;
            }
        }
        best
    }

    fn extend_round(&mut self) {
        let fired: Vec<crate::backbone::PairKey> = self
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
                            BiState {
                                finished: true,
                                ..Default::default()
                            },
                        );
                    }
                }
            }
        }
    }
}

/// Merge sort within the oracle session; all comparisons are probes.
fn merge_sort_probed(v: &[ElementId], session: &mut OracleSession) -> Vec<ElementId> {
    if v.len() <= 1 {
        return v.to_vec();
    }
    let mid = v.len() / 2;
    let left = merge_sort_probed(&v[..mid], session);
    let right = merge_sort_probed(&v[mid..], session);
    let mut out = Vec::with_capacity(v.len());
    let (mut i, mut j) = (0, 0);
    while i < left.len() && j < right.len() {
        if session.less(left[i], right[j]).expect("comparable pair") {
            out.push(left[i]);
            i += 1;
        } else {
            out.push(right[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&left[i..]);
    out.extend_from_slice(&right[j..]);
    out
}

/// Sorts each stripe with monochromatic merge sort and concatenates; the
/// stripe order itself is already known.
pub fn sort_stripes_merge(
    stripes: &StripeDecomposition,
    session: &mut OracleSession,
) -> Vec<ElementId> {
    let mut out = Vec::new();
    for stripe in stripes.stripes() {
        out.extend(merge_sort_probed(stripe, session));
    }
    out
}

/// Full bichromatic sort for alpha, beta > 1: stripe recovery by budgeted
/// inversion search, then per-stripe merge sort.
pub fn run_bichromatic(instance: &Instance, seed: u64) -> BichromaticOutcome {
    let (alpha, beta) = match instance.cost_model() {
        CostModel::Bichromatic { alpha, beta } => (alpha.clone(), beta.clone()),
        _ => panic!("run_bichromatic expects a bichromatic cost model"),
    };
    assert!(
        alpha > Cost::one() && beta > Cost::one(),
        "run_bichromatic expects alpha, beta > 1; use the merge variants otherwise"
    );
    let session = OracleSession::new(instance);
    let mut run = BichromaticRun {
        core: SortCore::new(session, seed),
        states: HashMap::new(),
        alpha,
        beta,
    };
    while !run.finished() {
        run.search_round();
        run.extend_round();
    }
    let stripes = run.core.output_stripes();
    let phase1_cost = run.core.session.total_cost();
    let order = sort_stripes_merge(&stripes, &mut run.core.session);
    let stats = RunStats {
        seed,
        n: instance.len(),
        size_vector: stripes.size_vector(),
        total_cost: run.core.session.total_cost(),
        pivot_cost: run.core.pivot_probes,
        search_cost: run.core.search_probes,
        tree_depth: run.core.tree.max_depth(),
        rounds: run.core.rounds,
    };
    let ledger = run.core.session.ledger().clone();
    BichromaticOutcome {
        order,
        stripes,
        phase1_cost,
        stats,
        ledger,
    }
}

/// Bichromatic comparisons dearer than both monochromatic costs
/// (alpha, beta < 1): sort each color separately, then merge with galloping
/// searches; the two single-boundary cases are detected with at most two
/// bichromatic probes.
pub fn bichromatic_most_expensive(instance: &Instance, _seed: u64) -> (Vec<ElementId>, RunStats) {
    let (alpha, beta) = match instance.cost_model() {
        CostModel::Bichromatic { alpha, beta } => (alpha.clone(), beta.clone()),
        _ => panic!("expected a bichromatic cost model"),
    };
    assert!(
        alpha < Cost::one() && beta < Cost::one(),
        "variant requires bichromatic comparisons to be the most expensive"
    );
    let mut session = OracleSession::new(instance);
    let mut reds = Vec::new();
    let mut blues = Vec::new();
    for id in instance.ids() {
        match instance.color(id) {
            Color::Red => reds.push(id),
            Color::Blue => blues.push(id),
        }
    }
    let reds = merge_sort_probed(&reds, &mut session);
    let blues = merge_sort_probed(&blues, &mut session);

    let order = if reds.is_empty() {
        blues.clone()
    } else if blues.is_empty() {
        reds.clone()
    } else if session
        .less(*reds.last().unwrap(), blues[0])
        .expect("bichromatic pair")
    {
        let mut o = reds.clone();
        o.extend(&blues);
        o
    } else if session
        .less(*blues.last().unwrap(), reds[0])
        .expect("bichromatic pair")
    {
        let mut o = blues.clone();
        o.extend(&reds);
        o
    } else {
        galloping_merge(&reds, &blues, &mut session)
    };

    let cross = session.ledger().count(&cost_one());
    let stats = RunStats {
        seed: _seed,
        n: instance.len(),
        size_vector: vec![1; order.len()],
        total_cost: session.total_cost(),
        pivot_cost: session.ledger().probes() - cross,
        search_cost: cross,
        tree_depth: 0,
        rounds: 0,
    };
    (order, stats)
}

/// Probe that reuses an already revealed direction instead of recharging;
/// the merge below ends each gallop with the comparison that doubles as the
/// next boundary check.
fn less_reusing(session: &mut OracleSession, a: ElementId, b: ElementId) -> bool {
    match session.known_less(a, b) {
        Some(known) => known,
        None => session.less(a, b).expect("bichromatic pair"),
    }
}

/// Merges two sorted chains with exponential runs: each boundary costs
/// O(log run-length) bichromatic probes, and on fully alternating inputs the
/// failing gallop probe serves as the next head comparison, so the whole
/// merge stays within N-1 probes.
pub(crate) fn galloping_merge(
    xs: &[ElementId],
    ys: &[ElementId],
    session: &mut OracleSession,
) -> Vec<ElementId> {
    let mut out = Vec::with_capacity(xs.len() + ys.len());
    let (mut i, mut j) = (0, 0);
    while i < xs.len() && j < ys.len() {
        if less_reusing(session, xs[i], ys[j]) {
            let t = gallop_below(xs, i, ys[j], session);
            out.extend_from_slice(&xs[i..i + t]);
            i += t;
        } else {
            let t = gallop_below(ys, j, xs[i], session);
            out.extend_from_slice(&ys[j..j + t]);
            j += t;
        }
    }
    out.extend_from_slice(&xs[i..]);
    out.extend_from_slice(&ys[j..]);
    out
}

/// With `arr[start] < bound` known, returns the length of the maximal run
/// `arr[start..start+t]` below `bound`, via exponential then binary search.
fn gallop_below(
    arr: &[ElementId],
    start: usize,
    bound: ElementId,
    session: &mut OracleSession,
) -> usize {
    let limit = arr.len() - start;
    let mut lo = 1usize; // run length proven so far
    let mut hi = 1usize;
    while hi < limit && less_reusing(session, arr[start + hi], bound) {
        lo = hi + 1;
        hi *= 2;
    }
    let mut hi = hi.min(limit);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if less_reusing(session, arr[start + mid], bound) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Monochromatic costs straddling the bichromatic cost (alpha < 1 < beta):
/// sort the cheap color, binary-search each dear element into it, then sort
/// the dear runs.
pub fn bichromatic_middle_expensive(instance: &Instance, _seed: u64) -> (Vec<ElementId>, RunStats) {
    let (alpha, beta) = match instance.cost_model() {
        CostModel::Bichromatic { alpha, beta } => (alpha.clone(), beta.clone()),
        _ => panic!("expected a bichromatic cost model"),
    };
    assert!(
        alpha < Cost::one() && beta > Cost::one(),
        "variant requires red-red cheapest and blue-blue dearest"
    );
    let mut session = OracleSession::new(instance);
    let mut reds = Vec::new();
    let mut blues = Vec::new();
    for id in instance.ids() {
        match instance.color(id) {
            Color::Red => reds.push(id),
            Color::Blue => blues.push(id),
        }
    }
    let reds = merge_sort_probed(&reds, &mut session);

    // binary-search every blue into the sorted reds
    let mut gaps: Vec<Vec<ElementId>> = vec![Vec::new(); reds.len() + 1];
    for &b in &blues {
        let mut lo = 0usize; // number of reds below b
        let mut hi = reds.len();
        while lo < hi {
            let mid = (lo + hi) / 2;
            if session.less(reds[mid], b).expect("bichromatic pair") {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        gaps[lo].push(b);
    }

    let mut order = Vec::with_capacity(instance.len());
    for (g, gap) in gaps.iter().enumerate() {
        order.extend(merge_sort_probed(gap, &mut session));
        if g < reds.len() {
            order.push(reds[g]);
        }
    }

    let cross = session.ledger().count(&cost_one());
    let stats = RunStats {
        seed: _seed,
        n: instance.len(),
        size_vector: vec![1; order.len()],
        total_cost: session.total_cost(),
        pivot_cost: session.ledger().probes() - cross,
        search_cost: cross,
        tree_depth: 0,
        rounds: 0,
    };
    (order, stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::parse_cost;
    use crate::gen;
    use crate::instance::Instance;

    fn bichromatic_from_pattern(pattern: &str, alpha: &str, beta: &str, seed: u64) -> Instance {
        let base = gen::from_color_pattern(pattern, seed).unwrap();
        Instance::new(
            base.hidden_order().to_vec(),
            base.colors().to_vec(),
            CostModel::Bichromatic {
                alpha: parse_cost(alpha).unwrap(),
                beta: parse_cost(beta).unwrap(),
            },
            true,
        )
        .unwrap_or_else(|_| {
            Instance::new(
                base.hidden_order().to_vec(),
                base.colors().to_vec(),
                CostModel::Bichromatic {
                    alpha: parse_cost(alpha).unwrap(),
                    beta: parse_cost(beta).unwrap(),
                },
                false,
            )
            .unwrap()
        })
    }

    #[test]
    fn cheapest_proof_matches_hand_computation() {
        let (c, k) = cheapest_proof(3, 4, &parse_cost("2").unwrap(), &parse_cost("5").unwrap());
        assert_eq!(c, parse_cost("8").unwrap());
        assert_eq!(k, ProofKind::RedMax);
        let (c, k) = cheapest_proof(1, 1, &parse_cost("2").unwrap(), &parse_cost("2").unwrap());
        assert_eq!(c, parse_cost("1").unwrap());
        assert_eq!(k, ProofKind::AllPairs);
    }

    #[test]
    fn both_extremes_never_cheapest_for_alpha_beta_above_one() {
        for (a, b) in [(1u64, 1u64), (2, 3), (5, 5), (10, 2)] {
            for (al, be) in [("3/2", "2"), ("2", "100"), ("5", "5")] {
                let (_, kind) =
                    cheapest_proof(a, b, &parse_cost(al).unwrap(), &parse_cost(be).unwrap());
                assert_ne!(kind, ProofKind::BothExtremes);
            }
        }
    }

    #[test]
    fn two_element_bichromatic_single_probe() {
        let inst = bichromatic_from_pattern("RB", "2", "2", 1);
        let out = run_bichromatic(&inst, 0);
        assert_eq!(out.order, inst.hidden_order());
        assert_eq!(out.stats.total_cost, cost_from_u64(1));
    }

    #[test]
    fn interleaved_needs_no_stripe_sorting() {
        let inst = bichromatic_from_pattern("RBRBRB", "3", "3", 2);
        let out = run_bichromatic(&inst, 5);
        assert_eq!(out.order, inst.hidden_order());
        assert_eq!(out.phase1_cost, out.stats.total_cost);
    }

    #[test]
    fn recovers_full_order_on_random_instances() {
        for seed in 0..25 {
            let base = gen::random_bipartite(16, seed).unwrap();
            let inst = Instance::new(
                base.hidden_order().to_vec(),
                base.colors().to_vec(),
                CostModel::Bichromatic {
                    alpha: parse_cost("3/2").unwrap(),
                    beta: parse_cost("2").unwrap(),
                },
                false,
            )
            .unwrap();
            let out = run_bichromatic(&inst, seed * 7 + 1);
            assert_eq!(out.order, inst.hidden_order(), "seed {seed}");
        }
    }

    #[test]
    fn merge_sort_stays_within_comparison_bound() {
        let inst = bichromatic_from_pattern("RRRRBB", "2", "2", 3);
        let mut session = OracleSession::new(&inst);
        let stripe: Vec<ElementId> = inst
            .ids()
            .filter(|&e| inst.color(e) == Color::Red)
            .collect();
        let sorted = merge_sort_probed(&stripe, &mut session);
        let mut expect = stripe.clone();
        expect.sort_by_key(|&e| inst.rank(e));
        assert_eq!(sorted, expect);
        assert!(session.ledger().probes() <= 5); // n ceil(log n) - n + 1 for n=4
    }

    #[test]
    fn most_expensive_two_block_uses_one_cross_probe() {
        let base = gen::two_block(4, 4, 9).unwrap();
        let inst = Instance::new(
            base.hidden_order().to_vec(),
            base.colors().to_vec(),
            CostModel::Bichromatic {
                alpha: parse_cost("1/4").unwrap(),
                beta: parse_cost("1/4").unwrap(),
            },
            false,
        )
        .unwrap();
        let (order, stats) = bichromatic_most_expensive(&inst, 0);
        assert_eq!(order, inst.hidden_order());
        assert_eq!(stats.search_cost, 1); // single boundary detected directly
    }

    #[test]
    fn most_expensive_interleaved_stays_below_linear_cross_probes() {
        let inst0 = gen::interleaved(4, 2).unwrap();
        let inst = Instance::new(
            inst0.hidden_order().to_vec(),
            inst0.colors().to_vec(),
            CostModel::Bichromatic {
                alpha: parse_cost("1/2").unwrap(),
                beta: parse_cost("1/2").unwrap(),
            },
            true,
        )
        .unwrap();
        let (order, stats) = bichromatic_most_expensive(&inst, 1);
        assert_eq!(order, inst.hidden_order());
        // the two boundary checks plus an (N-1)-probe merge
        assert!(stats.search_cost <= 8 + 1, "cross probes {}", stats.search_cost);
    }

    #[test]
    fn galloping_merge_alone_needs_at_most_n_minus_one_probes_interleaved() {
        let inst0 = gen::interleaved(4, 5).unwrap();
        let inst = Instance::new(
            inst0.hidden_order().to_vec(),
            inst0.colors().to_vec(),
            CostModel::Bichromatic {
                alpha: parse_cost("1/2").unwrap(),
                beta: parse_cost("1/2").unwrap(),
            },
            true,
        )
        .unwrap();
        let mut session = OracleSession::new(&inst);
        let mut by_rank: Vec<(Vec<ElementId>, Vec<ElementId>)> = vec![(vec![], vec![])];
        let (reds, blues) = &mut by_rank[0];
        for &id in inst.hidden_order() {
            match inst.color(id) {
                Color::Red => reds.push(id),
                Color::Blue => blues.push(id),
            }
        }
        let merged = galloping_merge(reds, blues, &mut session);
        assert_eq!(merged, inst.hidden_order());
        assert!(
            session.ledger().probes() <= 7,
            "merge probes {}",
            session.ledger().probes()
        );
    }

    #[test]
    fn middle_expensive_sorts_and_respects_structure() {
        for seed in 0..10 {
            let base = gen::random_bipartite(14, seed).unwrap();
            let inst = Instance::new(
                base.hidden_order().to_vec(),
                base.colors().to_vec(),
                CostModel::Bichromatic {
                    alpha: parse_cost("1/2").unwrap(),
                    beta: parse_cost("3").unwrap(),
                },
                false,
            )
            .unwrap();
            let (order, _) = bichromatic_middle_expensive(&inst, seed);
            assert_eq!(order, inst.hidden_order(), "seed {seed}");
        }
    }

    #[test]
    fn middle_expensive_single_red_places_each_blue_with_one_cross_probe() {
        let base = gen::from_color_pattern("BRB", 4).unwrap();
        let inst = Instance::new(
            base.hidden_order().to_vec(),
            base.colors().to_vec(),
            CostModel::Bichromatic {
                alpha: parse_cost("1/2").unwrap(),
                beta: parse_cost("3").unwrap(),
            },
            false,
        )
        .unwrap();
        let (order, stats) = bichromatic_middle_expensive(&inst, 0);
        assert_eq!(order, inst.hidden_order());
        // 2 blues, each one binary probe into the singleton red; no blue-blue sorts
        assert_eq!(stats.total_cost, cost_from_u64(2));
    }
}
