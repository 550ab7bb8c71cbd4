//! Seeded instance generators.
//!
//! Every generator is deterministic in (parameters, seed). Element ids are
//! shuffled so that the id of an element carries no rank information.

use crate::cost::{cost_from_u64, Cost};
use crate::instance::{
    n_to_three_quarters, Color, CostModel, ElementId, FourCost, Instance, InstanceError, PairTable,
};
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GenError {
    #[error("bad generator parameters: {0}")]
    BadParams(String),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

fn shuffled_ids(n: usize, rng: &mut ChaCha8Rng) -> Vec<ElementId> {
    let mut ids: Vec<ElementId> = (0..n as ElementId).collect();
    ids.shuffle(rng);
    ids
}

/// Builds a bipartite-unit instance whose hidden color sequence (by rank) is
/// `pattern`; ids are assigned to ranks uniformly at random.
pub fn from_color_pattern(pattern: &str, seed: u64) -> Result<Instance, GenError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = pattern.len();
    let order = shuffled_ids(n, &mut rng);
    let mut colors = vec![Color::Red; n];
    for (rank, ch) in pattern.chars().enumerate() {
        let c = match ch {
            'R' => Color::Red,
            'B' => Color::Blue,
            other => return Err(GenError::BadParams(format!("bad color char {other:?}"))),
        };
        colors[order[rank] as usize] = c;
    }
    Ok(Instance::new(order, colors, CostModel::BipartiteUnit, false)?)
}

/// Bipartite instance from an explicit size vector with alternating colors.
pub fn from_size_vector(
    sizes: &[usize],
    first_color: Color,
    seed: u64,
) -> Result<Instance, GenError> {
    if sizes.contains(&0) {
        return Err(GenError::BadParams("zero-sized stripe".into()));
    }
    let mut pattern = String::new();
    let mut c = first_color;
    for &s in sizes {
        for _ in 0..s {
            pattern.push(c.as_char());
        }
        c = c.flip();
    }
    from_color_pattern(&pattern, seed)
}

/// Perfectly interleaved instance: n reds and n blues alternating, smallest
/// element red. Carries the Hamiltonian promise.
pub fn interleaved(n: usize, seed: u64) -> Result<Instance, GenError> {
    if n == 0 {
        return Err(GenError::BadParams("interleaved needs n >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = 2 * n;
    let order = shuffled_ids(total, &mut rng);
    let mut colors = vec![Color::Red; total];
    for (rank, &id) in order.iter().enumerate() {
        colors[id as usize] = if rank % 2 == 0 { Color::Red } else { Color::Blue };
    }
    Ok(Instance::new(order, colors, CostModel::BipartiteUnit, true)?)
}

/// All reds below all blues.
pub fn two_block(reds: usize, blues: usize, seed: u64) -> Result<Instance, GenError> {
    let mut pattern = "R".repeat(reds);
    pattern.push_str(&"B".repeat(blues));
    from_color_pattern(&pattern, seed)
}

/// Balloon instance separating the quicksort-style backbone sort from
/// inversion sort: size vector (n - s, 1, ..., 1, n - s) with 2s singleton
/// stripes in the middle, s = floor(sqrt(n)). Total n reds and n blues.
pub fn balloon(n: usize, seed: u64) -> Result<Instance, GenError> {
    let s = (n as f64).sqrt().floor() as usize;
    if s == 0 || n <= s {
        return Err(GenError::BadParams(format!("balloon needs n > sqrt(n), got {n}")));
    }
    let mut pattern = "R".repeat(n - s);
    for i in 0..2 * s {
        pattern.push(if i % 2 == 0 { 'B' } else { 'R' });
    }
    pattern.push_str(&"B".repeat(n - s));
    from_color_pattern(&pattern, seed)
}

/// Bipartite instance with a random size vector: stripe sizes are drawn by
/// repeatedly splitting the remaining elements.
pub fn random_bipartite(total: usize, seed: u64) -> Result<Instance, GenError> {
    if total == 0 {
        return Err(GenError::BadParams("empty instance".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x5eed));
    let mut remaining = total;
    let mut sizes = Vec::new();
    while remaining > 0 {
        let s = rng.gen_range(1..=remaining);
        sizes.push(s);
        remaining -= s;
    }
    let first = if rng.gen_bool(0.5) { Color::Red } else { Color::Blue };
    from_size_vector(&sizes, first, seed)
}

/// The maximum-finding lower bound instance: two reds, n-2 blues. Red 1 is
/// connected to every blue by a cost-0 edge, red 2 by cost-1 edges, and the
/// red-red edge costs n. Blues are mutually incomparable. The hidden order is
/// one of n equally likely cases selected by the seed: either red 2 is the
/// global maximum, or one special blue separates red 2 from red 1.
pub fn gk_maximum(n: usize, seed: u64) -> Result<Instance, GenError> {
    if n < 3 {
        return Err(GenError::BadParams("gk instance needs n >= 3".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // ids: 0 = red "1", 1 = red "2", 2.. = blues
    let mut colors = vec![Color::Blue; n];
    colors[0] = Color::Red;
    colors[1] = Color::Red;
    let mut costs: Vec<Vec<Option<Cost>>> = vec![vec![None; n]; n];
    for b in 2..n {
        costs[0][b] = Some(cost_from_u64(0));
        costs[b][0] = Some(cost_from_u64(0));
        costs[1][b] = Some(cost_from_u64(1));
        costs[b][1] = Some(cost_from_u64(1));
    }
    costs[0][1] = Some(cost_from_u64(n as u64));
    costs[1][0] = Some(cost_from_u64(n as u64));

    // one case per blue plus the red-2-on-top case
    let case = rng.gen_range(0..n - 1);
    let mut order: Vec<ElementId> = Vec::with_capacity(n);
    if case == 0 {
        // all blues, then red 1, then red 2
        order.extend(2..n as ElementId);
        order.push(0);
        order.push(1);
    } else {
        // other blues, then red 2, then the special blue, then red 1
        let special = 1 + case as ElementId; // one of 2..n-1
        order.extend((2..n as ElementId).filter(|&b| b != special));
        order.push(1);
        order.push(special);
        order.push(0);
    }
    Ok(Instance::new(
        order,
        colors,
        CostModel::Explicit { costs },
        false,
    )?)
}

/// Parameters for the planted four-level generator.
#[derive(Debug, Clone)]
pub struct FourLevelParams {
    /// Cost-F edges planted on the Hamiltonian path.
    pub k_f: usize,
    /// Cost-1 edges planted on the Hamiltonian path (the rest cost 0).
    pub k_1: usize,
    /// Class probabilities for off-path pairs (zero, one, f); the remainder
    /// is forbidden.
    pub p_zero: f64,
    pub p_one: f64,
    pub p_f: f64,
    /// F value; defaults to ceil(n^(3/4)) when `None`.
    pub f: Option<Cost>,
}

impl Default for FourLevelParams {
    fn default() -> Self {
        FourLevelParams {
            k_f: 0,
            k_1: 8,
            p_zero: 0.25,
            p_one: 0.25,
            p_f: 0.05,
            f: None,
        }
    }
}

/// Plants a Hamiltonian with `k_f` cost-F and `k_1` cost-1 edges (all other
/// path edges cost 0), then salts non-path pairs with the configured class
/// probabilities. Rank-adjacent pairs always stay finite.
pub fn four_level(n: usize, params: &FourLevelParams, seed: u64) -> Result<Instance, GenError> {
    if n < 2 {
        return Err(GenError::BadParams("four_level needs n >= 2".into()));
    }
    if params.k_f + params.k_1 > n - 1 {
        return Err(GenError::BadParams(format!(
            "k_f + k_1 = {} exceeds the {} Hamiltonian edges",
            params.k_f + params.k_1,
            n - 1
        )));
    }
    if !(0.0..=1.0).contains(&(params.p_zero + params.p_one + params.p_f)) {
        return Err(GenError::BadParams("class probabilities exceed 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let order = shuffled_ids(n, &mut rng);
    let f = params
        .f
        .clone()
        .unwrap_or_else(|| n_to_three_quarters(n));
    if f < n_to_three_quarters(n) {
        return Err(GenError::BadParams("F below n^(3/4)".into()));
    }

    let mut classes = PairTable::filled(n, FourCost::Inf);
    // off-path salting first; path assignment below overrides
    for u in 0..n as ElementId {
        for v in u + 1..n as ElementId {
            let roll: f64 = rng.gen();
            let class = if roll < params.p_zero {
                FourCost::Zero
            } else if roll < params.p_zero + params.p_one {
                FourCost::One
            } else if roll < params.p_zero + params.p_one + params.p_f {
                FourCost::F
            } else {
                FourCost::Inf
            };
            classes.set(u, v, class);
        }
    }
    // plant the Hamiltonian: choose positions for F- and 1-edges
    let mut path_positions: Vec<usize> = (0..n - 1).collect();
    path_positions.shuffle(&mut rng);
    let mut path_class = vec![FourCost::Zero; n - 1];
    for &p in path_positions.iter().take(params.k_f) {
        path_class[p] = FourCost::F;
    }
    for &p in path_positions
        .iter()
        .skip(params.k_f)
        .take(params.k_1)
    {
        path_class[p] = FourCost::One;
    }
    for (pos, &class) in path_class.iter().enumerate() {
        classes.set(order[pos], order[pos + 1], class);
    }

    let colors = vec![Color::Red; n];
    Ok(Instance::new(
        order,
        colors,
        CostModel::FourLevel { f, classes },
        true,
    )?)
}
