//! Average rank of every vertex over the linear extensions of a DAG.
//!
//! Small DAGs are enumerated exactly with a subset-DP; larger ones are
//! estimated by sampling extensions with the lazy adjacent-transposition
//! Markov chain.

use crate::cost::Cost;
use crate::dag::RevealedDag;
use crate::instance::ElementId;
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;

#[derive(Debug, Clone)]
pub struct RankConfig {
    /// Exact enumeration up to this many vertices.
    pub exact_cutoff: usize,
    /// Chain burn-in steps: `burn_in_factor * n^3`.
    pub burn_in_factor: u64,
    /// Steps between retained samples.
    pub thin: u64,
    pub samples: usize,
}

impl Default for RankConfig {
    fn default() -> Self {
        RankConfig {
            exact_cutoff: 12,
            burn_in_factor: 10,
            thin: 64,
            samples: 2000,
        }
    }
}

#[derive(Debug, Clone)]
pub enum RankEstimate {
    /// Exact mean 1-based position of every vertex.
    Exact(Vec<Cost>),
    /// Sampled means with the sample count used.
    Sampled { means: Vec<f64>, samples: usize },
}

impl RankEstimate {
    pub fn mean_f64(&self, v: ElementId) -> f64 {
        match self {
            RankEstimate::Exact(r) => crate::cost::cost_to_f64(&r[v as usize]),
            RankEstimate::Sampled { means, .. } => means[v as usize],
        }
    }
}

/// Exact per-vertex average rank by prefix/suffix subset counting.
pub fn exact_average_ranks(dag: &RevealedDag) -> Vec<Cost> {
    let n = dag.len();
    assert!(n <= 20, "exact enumeration is exponential in n");
    let mut pred_mask = vec![0u32; n];
    for (u, v) in dag.edges() {
        pred_mask[v as usize] |= 1 << u;
    }
    let full: u32 = if n == 32 { u32::MAX } else { (1 << n) - 1 };

    // prefixes[mask] = number of valid orderings of `mask` as an order prefix
    let mut prefixes = vec![BigInt::from(0u32); 1 << n];
    prefixes[0] = BigInt::from(1u32);
    for mask in 1..=full {
        let mut total = BigInt::from(0u32);
        for v in 0..n {
            let bit = 1u32 << v;
            if mask & bit != 0 && pred_mask[v] & (mask ^ bit) == pred_mask[v] {
                total += &prefixes[(mask ^ bit) as usize];
            }
        }
        prefixes[mask as usize] = total;
    }
    // suffixes[mask] = number of valid completions given prefix `mask`
    let mut suffixes = vec![BigInt::from(0u32); 1 << n];
    suffixes[full as usize] = BigInt::from(1u32);
    for mask in (0..full).rev() {
        let mut total = BigInt::from(0u32);
        for v in 0..n {
            let bit = 1u32 << v;
            if mask & bit == 0 && pred_mask[v] & mask == pred_mask[v] {
                total += &suffixes[(mask | bit) as usize];
            }
        }
        suffixes[mask as usize] = total;
    }

    let total = prefixes[full as usize].clone();
    assert!(total > BigInt::from(0u32), "a DAG always has an extension");
    let mut ranks = Vec::with_capacity(n);
    for v in 0..n {
        let bit = 1u32 << v;
        let mut weighted = BigInt::from(0u32);
        for mask in 1..=full {
            if mask & bit != 0 && pred_mask[v] & (mask ^ bit) == pred_mask[v] {
                let ways = &prefixes[(mask ^ bit) as usize] * &suffixes[mask as usize];
                weighted += ways * BigInt::from(mask.count_ones());
            }
        }
        ranks.push(BigRational::new(weighted, total.clone()));
    }
    ranks
}

/// Lazy adjacent-transposition chain over the linear extensions of a DAG.
/// Swapping adjacent entries is legal unless an edge orders them; for
/// adjacent entries any ordering path must be the direct edge, so the
/// reachability check suffices.
pub struct ExtensionSampler {
    order: Vec<ElementId>,
    position: Vec<usize>,
}

impl ExtensionSampler {
    pub fn new(dag: &RevealedDag) -> Self {
        let order = dag.topological_order();
        let mut position = vec![0usize; dag.len()];
        for (i, &v) in order.iter().enumerate() {
            position[v as usize] = i;
        }
        ExtensionSampler { order, position }
    }

    pub fn order(&self) -> &[ElementId] {
        &self.order
    }

    pub fn positions(&self) -> &[usize] {
        &self.position
    }

    pub fn step(&mut self, dag: &RevealedDag, rng: &mut impl Rng) {
        if self.order.len() < 2 || rng.gen_bool(0.5) {
            return; // lazy step
        }
        let i = rng.gen_range(0..self.order.len() - 1);
        let (u, v) = (self.order[i], self.order[i + 1]);
        if !dag.reaches(u, v) {
            self.order.swap(i, i + 1);
            self.position[u as usize] = i + 1;
            self.position[v as usize] = i;
        }
    }

    pub fn steps(&mut self, dag: &RevealedDag, count: u64, rng: &mut impl Rng) {
        for _ in 0..count {
            self.step(dag, rng);
        }
    }

    /// Restores validity after the DAG gained edges, disturbing the current
    /// order as little as possible: a stable topological re-sort keyed by
    /// current positions.
    pub fn repair(&mut self, dag: &RevealedDag) {
        let violated = self
            .order
            .windows(2)
            .any(|w| dag.reaches(w[1], w[0]));
        if !violated {
            return;
        }
        let n = self.order.len();
        let mut in_deg = vec![0usize; n];
        for v in 0..n as ElementId {
            for &w in dag.out_neighbors(v) {
                in_deg[w as usize] += 1;
            }
        }
        // min-heap on current position keeps the re-sort stable
        let mut ready = std::collections::BinaryHeap::new();
        for v in 0..n as ElementId {
            if in_deg[v as usize] == 0 {
                ready.push(std::cmp::Reverse((self.position[v as usize], v)));
            }
        }
        let mut new_order = Vec::with_capacity(n);
        while let Some(std::cmp::Reverse((_, v))) = ready.pop() {
            new_order.push(v);
            for &w in dag.out_neighbors(v) {
                in_deg[w as usize] -= 1;
                if in_deg[w as usize] == 0 {
                    ready.push(std::cmp::Reverse((self.position[w as usize], w)));
                }
            }
        }
        assert_eq!(new_order.len(), n, "repair requires an acyclic DAG");
        self.order = new_order;
        for (i, &v) in self.order.iter().enumerate() {
            self.position[v as usize] = i;
        }
    }
}

/// Average ranks: exact for small DAGs, chain-sampled above the cutoff.
pub fn average_ranks(dag: &RevealedDag, config: &RankConfig, rng: &mut impl Rng) -> RankEstimate {
    let n = dag.len();
    if n <= config.exact_cutoff {
        return RankEstimate::Exact(exact_average_ranks(dag));
    }
    let mut sampler = ExtensionSampler::new(dag);
    sampler.steps(dag, config.burn_in_factor * (n as u64).pow(3), rng);
    let mut sums = vec![0u64; n];
    for _ in 0..config.samples {
        sampler.steps(dag, config.thin, rng);
        for (i, &v) in sampler.order().iter().enumerate() {
            sums[v as usize] += i as u64 + 1;
        }
    }
    let means = sums
        .iter()
        .map(|&s| s as f64 / config.samples as f64)
        .collect();
    RankEstimate::Sampled {
        means,
        samples: config.samples,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::{cost_from_u64, parse_cost};

    /// Total rank mass of any extension distribution is n(n+1)/2.
    fn rank_mass(n: usize) -> Cost {
        cost_from_u64((n * (n + 1) / 2) as u64)
    }

    #[test]
    fn empty_dag_ranks_are_centered() {
        let dag = RevealedDag::new(5);
        let ranks = exact_average_ranks(&dag);
        for r in &ranks {
            assert_eq!(r, &parse_cost("3").unwrap());
        }
    }

    #[test]
    fn chain_ranks_are_exact_positions() {
        let dag = RevealedDag::from_edges(4, (0..3).map(|i| (i, i + 1))).unwrap();
        let ranks = exact_average_ranks(&dag);
        for (i, r) in ranks.iter().enumerate() {
            assert_eq!(r, &cost_from_u64(i as u64 + 1));
        }
    }

    #[test]
    fn single_edge_three_vertices() {
        // extensions of a<b over {a,b,c}: abc, acb, cab
        let dag = RevealedDag::from_edges(3, [(0, 1)]).unwrap();
        let ranks = exact_average_ranks(&dag);
        assert_eq!(ranks[0], parse_cost("4/3").unwrap());
        assert_eq!(ranks[1], parse_cost("8/3").unwrap());
        assert_eq!(ranks[2], parse_cost("2").unwrap());
        let mass: Cost = ranks.iter().sum();
        assert_eq!(mass, rank_mass(3));
    }

    #[test]
    fn revealed_edges_respect_rank_plus_one() {
        let dag = RevealedDag::from_edges(6, [(0, 2), (1, 2), (2, 3), (4, 3)]).unwrap();
        let ranks = exact_average_ranks(&dag);
        for (u, v) in dag.edges() {
            assert!(
                ranks[u as usize].clone() + cost_from_u64(1) <= ranks[v as usize].clone(),
                "edge ({u},{v})"
            );
        }
    }

    #[test]
    fn sampler_converges_to_exact_ranks() {
        use rand::SeedableRng;
        let dag = RevealedDag::from_edges(
            10,
            [(0, 1), (1, 2), (3, 4), (0, 4), (5, 6), (7, 8), (2, 9), (4, 9)],
        )
        .unwrap();
        let exact = exact_average_ranks(&dag);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        let config = RankConfig {
            exact_cutoff: 0, // force sampling
            burn_in_factor: 10,
            thin: 40,
            samples: 100_000,
        };
        let est = average_ranks(&dag, &config, &mut rng);
        let RankEstimate::Sampled { means, samples } = est else {
            panic!("sampling forced")
        };
        assert_eq!(samples, 100_000);
        for v in 0..10 {
            let e = crate::cost::cost_to_f64(&exact[v]);
            assert!(
                (means[v] - e).abs() <= 0.1,
                "vertex {v}: sampled {} exact {e}",
                means[v]
            );
        }
    }
}
