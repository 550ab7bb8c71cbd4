//! Predecessor search in a width-w DAG and Hamiltonian completion.
//!
//! Binary searching a vertex into each chain of a minimum chain cover finds
//! its essential predecessors with at most w * ceil(log2(n+1)) probes; the
//! completion loop repeatedly runs that search on the first antichain layer
//! of size at least two until the revealed reduction is a path.

use super::GeneralizedError;
use crate::cost::Cost;
use crate::dag::RevealedDag;
use crate::instance::ElementId;
use crate::oracle::OracleSession;

pub type AllowedFn<'f> = dyn Fn(ElementId, ElementId) -> bool + 'f;

pub(crate) fn ceil_log2(x: u64) -> u64 {
    debug_assert!(x >= 1);
    x.next_power_of_two().trailing_zeros() as u64
}

#[derive(Debug, Clone)]
pub struct PredecessorOutcome {
    pub predecessors: Vec<ElementId>,
    pub probes: u64,
}

/// Probes for `c < v`, using free derivations from the revealed DAG first and
/// treating forbidden unknown pairs as not-below.
fn below(
    dag: &RevealedDag,
    c: ElementId,
    v: ElementId,
    session: &mut OracleSession,
    allowed: &AllowedFn,
    probes: &mut u64,
) -> bool {
    if dag.reaches(c, v) {
        return true;
    }
    if dag.reaches(v, c) {
        return false;
    }
    if let Some(less) = session.known_less(c, v) {
        return less;
    }
    if !allowed(c, v) {
        return false;
    }
    *probes += 1;
    session.less(c, v).expect("allowed pair")
}

/// Mirror of `below` for successor searches.
fn above(
    dag: &RevealedDag,
    c: ElementId,
    v: ElementId,
    session: &mut OracleSession,
    allowed: &AllowedFn,
    probes: &mut u64,
) -> bool {
    if dag.reaches(v, c) {
        return true;
    }
    if dag.reaches(c, v) {
        return false;
    }
    if let Some(less) = session.known_less(v, c) {
        return less;
    }
    if !allowed(c, v) {
        return false;
    }
    *probes += 1;
    session.less(v, c).expect("allowed pair")
}

/// Chain elements whose relation to `v` can be determined at all: derivable
/// from the DAG or memo, or directly probeable. Restricting the binary
/// search to these keeps the predicate monotone (it is then ground truth on
/// an increasing subsequence); forbidden unknown pairs would break it.
fn evaluable(
    dag: &RevealedDag,
    chain: &[ElementId],
    v: ElementId,
    session: &OracleSession,
    allowed: &AllowedFn,
) -> Vec<ElementId> {
    chain
        .iter()
        .copied()
        .filter(|&c| {
            dag.reaches(c, v)
                || dag.reaches(v, c)
                || session.known_less(c, v).is_some()
                || allowed(c, v)
        })
        .collect()
}

/// Binary search over the evaluable subsequence of a chain: the greatest
/// element below `v`, if any.
fn chain_max_below(
    dag: &RevealedDag,
    chain: &[ElementId],
    v: ElementId,
    session: &mut OracleSession,
    allowed: &AllowedFn,
    probes: &mut u64,
) -> Option<ElementId> {
    let evals = evaluable(dag, chain, v, session, allowed);
    let mut lo = 0usize;
    let mut hi = evals.len();
    while lo < hi {
        let mid = (lo + hi) / 2;
        if below(dag, evals[mid], v, session, allowed, probes) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    (lo > 0).then(|| evals[lo - 1])
}

/// Mirror search: the least evaluable chain element above `v`, if any.
fn chain_min_above(
    dag: &RevealedDag,
    chain: &[ElementId],
    v: ElementId,
    session: &mut OracleSession,
    allowed: &AllowedFn,
    probes: &mut u64,
) -> Option<ElementId> {
    let evals = evaluable(dag, chain, v, session, allowed);
    let mut lo = 0usize;
    let mut hi = evals.len();
    while lo < hi {
        let mid = (lo + hi) / 2;
        if above(dag, evals[mid], v, session, allowed, probes) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    (lo < evals.len()).then(|| evals[lo])
}

/// Finds the essential predecessors of `v` in the DAG extended by probes of
/// `v`-incident allowed pairs: one binary search per chain of a minimum
/// chain cover, then a maximality filter over the candidates.
///
/// The probe count is asserted against the w * ceil(log2(n+1)) budget.
pub fn predecessor_search(
    dag: &RevealedDag,
    v: ElementId,
    session: &mut OracleSession,
    allowed: &AllowedFn,
) -> PredecessorOutcome {
    let chains: Vec<Vec<ElementId>> = dag
        .chain_cover()
        .into_iter()
        .map(|c| c.into_iter().filter(|&x| x != v).collect())
        .collect();
    predecessor_search_in_chains(dag, &chains, v, session, allowed)
}

pub(crate) fn predecessor_search_in_chains(
    dag: &RevealedDag,
    chains: &[Vec<ElementId>],
    v: ElementId,
    session: &mut OracleSession,
    allowed: &AllowedFn,
) -> PredecessorOutcome {
    let mut probes = 0u64;
    let mut candidates = Vec::new();
    for chain in chains {
        if let Some(c) = chain_max_below(dag, chain, v, session, allowed, &mut probes) {
            candidates.push(c);
        }
    }
    let w = chains.len() as u64;
    let budget = w * ceil_log2(dag.len() as u64 + 1);
    assert!(
        probes <= budget,
        "predecessor search used {probes} probes, budget {budget} (w={w}, n={})",
        dag.len()
    );
    // keep only candidates not reaching another candidate
    let predecessors: Vec<ElementId> = candidates
        .iter()
        .copied()
        .filter(|&u| {
            !candidates
                .iter()
                .any(|&other| other != u && dag.reaches(u, other))
        })
        .collect();
    PredecessorOutcome {
        predecessors,
        probes,
    }
}

/// Double binary search used by the 0/1 engine: resolves `v` against one
/// chain from both sides.
pub(crate) fn resolve_against_chain(
    dag: &RevealedDag,
    chain: &[ElementId],
    v: ElementId,
    session: &mut OracleSession,
    allowed: &AllowedFn,
) -> u64 {
    let mut probes = 0u64;
    chain_max_below(dag, chain, v, session, allowed, &mut probes);
    chain_min_above(dag, chain, v, session, allowed, &mut probes);
    probes
}

#[derive(Debug, Clone)]
pub struct CompletionOutcome {
    pub path: Vec<ElementId>,
    pub probes: u64,
    pub searches: u64,
}

/// If the reduction is a Hamiltonian path, returns it.
fn reduction_path(dag: &RevealedDag) -> Option<Vec<ElementId>> {
    let n = dag.len();
    if n == 0 {
        return Some(Vec::new());
    }
    let red = dag.transitive_reduction();
    if red.len() + 1 != n {
        return None;
    }
    let mut next = vec![None; n];
    let mut has_in = vec![false; n];
    for (u, v) in red {
        if next[u as usize].is_some() {
            return None;
        }
        next[u as usize] = Some(v);
        if has_in[v as usize] {
            return None;
        }
        has_in[v as usize] = true;
    }
    let start = (0..n).find(|&v| !has_in[v])?;
    let mut path = vec![start as ElementId];
    while let Some(v) = next[*path.last().unwrap() as usize] {
        path.push(v);
    }
    if path.len() == n {
        Some(path)
    } else {
        None
    }
}

/// Completes a partially revealed DAG into the Hamiltonian path of the hidden
/// order, probing only `allowed` pairs. Aborts once the session cost exceeds
/// `abort_cost`, and reports a stall (no new edge learned by a full sweep of
/// searches) as `NoHamiltonian`.
pub fn complete_hamiltonian(
    dag: &mut RevealedDag,
    session: &mut OracleSession,
    allowed: &AllowedFn,
    abort_cost: Option<&Cost>,
) -> Result<CompletionOutcome, GeneralizedError> {
    let mut probes = 0u64;
    let mut searches = 0u64;
    let cap = 2 * dag.len() * dag.len() + 4;
    for _ in 0..cap {
        if let Some(path) = reduction_path(dag) {
            return Ok(CompletionOutcome {
                path,
                probes,
                searches,
            });
        }
        if let Some(limit) = abort_cost {
            if &session.total_cost() > limit {
                return Err(GeneralizedError::BudgetExhausted);
            }
        }
        let layer = dag
            .source_layers()
            .into_iter()
            .find(|l| l.len() >= 2)
            .expect("non-path reduction has a wide layer");
        let mut progressed = sweep(dag, session, allowed, &layer, &mut probes, &mut searches);
        if !progressed {
            // the wide layer was already fully explained; some vertex deeper
            // down still hides its incoming edge, so search everyone
            let everyone: Vec<ElementId> = (0..dag.len() as ElementId).collect();
            progressed = sweep(dag, session, allowed, &everyone, &mut probes, &mut searches);
        }
        if !progressed {
            return Err(GeneralizedError::NoHamiltonian);
        }
    }
    Err(GeneralizedError::NoHamiltonian)
}

/// One pass of predecessor searches; true iff any new edge was learned.
fn sweep(
    dag: &mut RevealedDag,
    session: &mut OracleSession,
    allowed: &AllowedFn,
    vertices: &[ElementId],
    probes: &mut u64,
    searches: &mut u64,
) -> bool {
    let mut progressed = false;
    for &v in vertices {
        let chains: Vec<Vec<ElementId>> = dag
            .chain_cover()
            .into_iter()
            .map(|c| c.into_iter().filter(|&x| x != v).collect())
            .collect();
        let out = predecessor_search_in_chains(dag, &chains, v, session, allowed);
        *probes += out.probes;
        *searches += 1;
        for u in out.predecessors {
            if !dag.reaches(u, v) {
                progressed = true;
            }
            if !dag.has_edge(u, v) {
                dag.add_edge(u, v).expect("probed directions cannot cycle");
            }
        }
    }
    progressed
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{four_level, FourLevelParams};
    use crate::instance::{Color, CostModel, Instance};

    fn plain_instance(order: Vec<ElementId>) -> Instance {
        let n = order.len();
        let costs = vec![vec![Some(crate::cost::cost_one()); n]; n];
        Instance::new(
            order,
            vec![Color::Red; n],
            CostModel::Explicit { costs },
            true,
        )
        .unwrap()
    }

    #[test]
    fn chain_search_uses_logarithmic_probes() {
        // chain of 7 known, v = 7 greater than all: one binary search
        let inst = plain_instance((0..8).collect());
        let mut session = OracleSession::new(&inst);
        let dag = RevealedDag::from_edges(8, (0..6).map(|i| (i, i + 1))).unwrap();
        let out = predecessor_search(&dag, 7, &mut session, &|_, _| true);
        assert_eq!(out.predecessors, vec![6]);
        assert!(out.probes <= 3, "probes {}", out.probes);
    }

    #[test]
    fn v_below_everything_has_no_predecessors() {
        let inst = plain_instance((0..8).collect());
        let mut session = OracleSession::new(&inst);
        // vertex 0 is the minimum; chains cover 1..8
        let dag = RevealedDag::from_edges(8, (1..7).map(|i| (i, i + 1))).unwrap();
        let out = predecessor_search(&dag, 0, &mut session, &|_, _| true);
        assert!(out.predecessors.is_empty());
    }

    #[test]
    fn disjoint_chain_tops_all_become_predecessors() {
        // hidden order 0<1<2<3<4, two chains 0->1 and 2->3, v=4 above all
        let inst = plain_instance(vec![0, 1, 2, 3, 4]);
        let mut session = OracleSession::new(&inst);
        let dag = RevealedDag::from_edges(5, [(0, 1), (2, 3)]).unwrap();
        let out = predecessor_search(&dag, 4, &mut session, &|_, _| true);
        let mut preds = out.predecessors.clone();
        preds.sort_unstable();
        assert_eq!(preds, vec![1, 3]);
    }

    #[test]
    fn completion_with_no_missing_edges_is_free() {
        let inst = plain_instance((0..6).collect());
        let mut session = OracleSession::new(&inst);
        let mut dag = RevealedDag::from_edges(6, (0..5).map(|i| (i, i + 1))).unwrap();
        let out = complete_hamiltonian(&mut dag, &mut session, &|_, _| true, None).unwrap();
        assert_eq!(out.path, (0..6).collect::<Vec<_>>());
        assert_eq!(out.probes, 0);
    }

    #[test]
    fn completion_fills_missing_cross_edge() {
        // two chains, hidden order interleaves them
        let inst = plain_instance(vec![0, 3, 1, 4, 2, 5]);
        let mut session = OracleSession::new(&inst);
        let mut dag = RevealedDag::from_edges(6, [(0, 3), (3, 1), (1, 4), (2, 5)]).unwrap();
        let out = complete_hamiltonian(&mut dag, &mut session, &|_, _| true, None).unwrap();
        assert_eq!(out.path, vec![0, 3, 1, 4, 2, 5]);
        assert!(out.probes > 0);
    }

    #[test]
    fn stall_is_reported_when_edges_are_forbidden() {
        let inst = plain_instance(vec![0, 1, 2, 3]);
        let mut session = OracleSession::new(&inst);
        let mut dag = RevealedDag::new(4);
        let err = complete_hamiltonian(&mut dag, &mut session, &|_, _| false, None).unwrap_err();
        assert!(matches!(err, GeneralizedError::NoHamiltonian));
    }

    #[test]
    fn completion_budget_on_planted_instances() {
        // probes stay within c * w * k * log2(n) across a small grid
        for (n, k) in [(32usize, 2usize), (48, 4), (64, 8)] {
            let params = FourLevelParams {
                k_f: 0,
                k_1: k,
                p_zero: 0.4,
                p_one: 0.2,
                p_f: 0.0,
                f: None,
            };
            let inst = four_level(n, &params, (n + k) as u64).unwrap();
            let mut session = OracleSession::new(&inst);
            let mut dag = RevealedDag::new(n);
            // reveal all cost-0 pairs
            for u in 0..n as ElementId {
                for v in u + 1..n as ElementId {
                    if inst.cost(u, v) == Some(crate::cost::cost_zero()) {
                        let less = session.less(u, v).unwrap();
                        let (a, b) = if less { (u, v) } else { (v, u) };
                        dag.add_edge(a, b).unwrap();
                    }
                }
            }
            let w = dag.width() as u64;
            let allowed = |u: ElementId, v: ElementId| inst.cost(u, v).is_some();
            let out = complete_hamiltonian(&mut dag, &mut session, &allowed, None).unwrap();
            assert_eq!(out.path, inst.hidden_order());
            let logn = (n as f64).log2();
            let bound = 6.0 * w as f64 * (k as f64).max(1.0) * logn;
            assert!(
                (out.probes as f64) <= bound.max(32.0),
                "n={n} k={k} w={w}: probes {} bound {bound}",
                out.probes
            );
        }
    }
}
