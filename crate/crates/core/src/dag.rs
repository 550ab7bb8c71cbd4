//! Revealed-order DAGs: reachability, transitive reduction, width.
//!
//! Directions come from probes of a total order, so these graphs are acyclic
//! by construction; a cycle means the caller fed contradictory edges and is
//! reported as an error.

use crate::instance::ElementId;
use fixedbitset::FixedBitSet;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DagError {
    #[error("edge set contains a directed cycle (through vertex {0})")]
    CycleDetected(ElementId),
    #[error("vertex {0} out of range 0..{1}")]
    VertexOutOfRange(ElementId, usize),
}

/// Directed edges known from probes plus cached reachability.
///
/// `reach[u]` holds every vertex reachable from `u` by one or more edges;
/// the cache is maintained incrementally on insertion.
#[derive(Debug, Clone)]
pub struct RevealedDag {
    n: usize,
    out: Vec<Vec<ElementId>>,
    edge_count: usize,
    reach: Vec<FixedBitSet>,
}

impl RevealedDag {
    pub fn new(n: usize) -> Self {
        RevealedDag {
            n,
            out: vec![Vec::new(); n],
            edge_count: 0,
            reach: vec![FixedBitSet::with_capacity(n); n],
        }
    }

    pub fn from_edges(
        n: usize,
        edges: impl IntoIterator<Item = (ElementId, ElementId)>,
    ) -> Result<Self, DagError> {
        let mut d = RevealedDag::new(n);
        for (u, v) in edges {
            d.add_edge(u, v)?;
        }
        Ok(d)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn edges(&self) -> Vec<(ElementId, ElementId)> {
        let mut es = Vec::with_capacity(self.edge_count);
        for (u, outs) in self.out.iter().enumerate() {
            for &v in outs {
                es.push((u as ElementId, v));
            }
        }
        es.sort_unstable();
        es
    }

    pub fn has_edge(&self, u: ElementId, v: ElementId) -> bool {
        self.out[u as usize].contains(&v)
    }

    pub fn out_neighbors(&self, u: ElementId) -> &[ElementId] {
        &self.out[u as usize]
    }

    /// True iff a directed path (length >= 1) runs from `u` to `v`.
    pub fn reaches(&self, u: ElementId, v: ElementId) -> bool {
        self.reach[u as usize].contains(v as usize)
    }

    /// Known relation of the pair: `Some(true)` if u before v, `Some(false)`
    /// if v before u, `None` if incomparable so far.
    pub fn known_less(&self, u: ElementId, v: ElementId) -> Option<bool> {
        if self.reaches(u, v) {
            Some(true)
        } else if self.reaches(v, u) {
            Some(false)
        } else {
            None
        }
    }

    /// Inserts `u -> v`, updating the reachability cache.
    pub fn add_edge(&mut self, u: ElementId, v: ElementId) -> Result<(), DagError> {
        let (ui, vi) = (u as usize, v as usize);
        if ui >= self.n || vi >= self.n {
            return Err(DagError::VertexOutOfRange(u.max(v), self.n));
        }
        if u == v || self.reaches(v, u) {
            return Err(DagError::CycleDetected(u));
        }
        if self.has_edge(u, v) {
            return Ok(());
        }
        self.out[ui].push(v);
        self.edge_count += 1;
        if !self.reaches(u, v) {
            // new_reach = {v} union reach[v]; fold into every vertex that reaches u
            let mut delta = self.reach[vi].clone();
            delta.insert(vi);
            self.reach[ui].union_with(&delta);
            for w in 0..self.n {
                if self.reach[w].contains(ui) {
                    self.reach[w].union_with(&delta);
                }
            }
        }
        Ok(())
    }

    /// The essential edges: `(u, v)` kept iff no directed path of length >= 2
    /// runs from `u` to `v`.
    pub fn transitive_reduction(&self) -> Vec<(ElementId, ElementId)> {
        let mut keep = Vec::new();
        for (u, outs) in self.out.iter().enumerate() {
            for &v in outs {
                let vi = v as usize;
                let mut implied = false;
                for x in self.reach[u].ones() {
                    if x != vi && self.reach[x].contains(vi) {
                        implied = true;
                        break;
                    }
                }
                if !implied {
                    keep.push((u as ElementId, v));
                }
            }
        }
        keep.sort_unstable();
        keep
    }

    /// Closure as an edge set (every comparable ordered pair).
    pub fn closure_edges(&self) -> Vec<(ElementId, ElementId)> {
        let mut es = Vec::new();
        for u in 0..self.n {
            for v in self.reach[u].ones() {
                es.push((u as ElementId, v as ElementId));
            }
        }
        es.sort_unstable();
        es
    }

    /// Vertices with no incoming edge.
    pub fn sources(&self) -> Vec<ElementId> {
        let mut has_in = vec![false; self.n];
        for outs in &self.out {
            for &v in outs {
                has_in[v as usize] = true;
            }
        }
        (0..self.n as ElementId)
            .filter(|&v| !has_in[v as usize])
            .collect()
    }

    /// Antichain layers obtained by repeatedly removing the sources.
    pub fn source_layers(&self) -> Vec<Vec<ElementId>> {
        let mut in_deg = vec![0usize; self.n];
        for outs in &self.out {
            for &v in outs {
                in_deg[v as usize] += 1;
            }
        }
        let mut layers = Vec::new();
        let mut current: Vec<ElementId> = (0..self.n as ElementId)
            .filter(|&v| in_deg[v as usize] == 0)
            .collect();
        let mut seen = 0usize;
        while !current.is_empty() {
            seen += current.len();
            let mut next = Vec::new();
            for &u in &current {
                for &v in &self.out[u as usize] {
                    in_deg[v as usize] -= 1;
                    if in_deg[v as usize] == 0 {
                        next.push(v);
                    }
                }
            }
            next.sort_unstable();
            layers.push(std::mem::replace(&mut current, next));
        }
        debug_assert_eq!(seen, self.n);
        layers
    }

    /// A topological order (stable: smallest id first among ready vertices).
    pub fn topological_order(&self) -> Vec<ElementId> {
        self.source_layers().into_iter().flatten().collect()
    }

    /// Width = size of the largest antichain = minimum number of chains
    /// covering the closure, via maximum bipartite matching on the closure.
    pub fn width(&self) -> usize {
        self.n - self.closure_matching().iter().filter(|m| m.is_some()).count()
    }

    /// A minimum chain cover of the closure: every returned chain is totally
    /// ordered under reachability, chains partition the vertices, and the
    /// number of chains equals the width.
    pub fn chain_cover(&self) -> Vec<Vec<ElementId>> {
        let match_next = self.closure_matching();
        let mut is_next = vec![false; self.n];
        for m in match_next.iter().flatten() {
            is_next[*m as usize] = true;
        }
        let mut chains = Vec::new();
        for start in 0..self.n {
            if is_next[start] {
                continue;
            }
            let mut chain = vec![start as ElementId];
            let mut cur = start;
            while let Some(next) = match_next[cur] {
                chain.push(next);
                cur = next as usize;
            }
            chains.push(chain);
        }
        chains
    }

    /// Kuhn matching over the split graph of the closure: left copy of `u`
    /// matched to right copy of `v` means `v` directly follows `u` in a chain.
    fn closure_matching(&self) -> Vec<Option<ElementId>> {
        let n = self.n;
        let mut match_left: Vec<Option<ElementId>> = vec![None; n]; // u -> v
        let mut match_right: Vec<Option<ElementId>> = vec![None; n]; // v -> u
        let mut visited = vec![u32::MAX; n];
        fn try_augment(
            dag: &RevealedDag,
            u: usize,
            stamp: u32,
            visited: &mut [u32],
            match_left: &mut [Option<ElementId>],
            match_right: &mut [Option<ElementId>],
        ) -> bool {
            for v in dag.reach[u].ones() {
                if visited[v] == stamp {
                    continue;
                }
                visited[v] = stamp;
                let free = match match_right[v] {
                    None => true,
                    Some(prev) => try_augment(
                        dag,
                        prev as usize,
                        stamp,
                        visited,
                        match_left,
                        match_right,
                    ),
                };
                if free {
                    match_left[u] = Some(v as ElementId);
                    match_right[v] = Some(u as ElementId);
                    return true;
                }
            }
            false
        }
        for u in 0..n {
            try_augment(
                self,
                u,
                u as u32,
                &mut visited,
                &mut match_left,
                &mut match_right,
            );
        }
        match_left
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduction_drops_implied_edge() {
        let d = RevealedDag::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(d.transitive_reduction(), vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn reduction_of_empty_is_empty() {
        let d = RevealedDag::new(4);
        assert!(d.transitive_reduction().is_empty());
    }

    #[test]
    fn cycle_is_rejected() {
        let mut d = RevealedDag::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(d.add_edge(2, 0), Err(DagError::CycleDetected(2)));
    }

    #[test]
    fn width_of_chain_is_one_and_antichain_is_n() {
        let chain = RevealedDag::from_edges(5, (0..4).map(|i| (i, i + 1))).unwrap();
        assert_eq!(chain.width(), 1);
        let empty = RevealedDag::new(5);
        assert_eq!(empty.width(), 5);
    }

    #[test]
    fn width_of_two_disjoint_chains() {
        // chains 0->1->2 and 3->4
        let d = RevealedDag::from_edges(5, [(0, 1), (1, 2), (3, 4)]).unwrap();
        assert_eq!(d.width(), 2);
        let chains = d.chain_cover();
        assert_eq!(chains.len(), 2);
        let mut total: Vec<ElementId> = chains.concat();
        total.sort_unstable();
        assert_eq!(total, vec![0, 1, 2, 3, 4]);
        for chain in &chains {
            for w in chain.windows(2) {
                assert!(d.reaches(w[0], w[1]));
            }
        }
    }

    #[test]
    fn source_layers_strip_antichains() {
        let d = RevealedDag::from_edges(4, [(0, 2), (1, 2), (2, 3)]).unwrap();
        let layers = d.source_layers();
        assert_eq!(layers, vec![vec![0, 1], vec![2], vec![3]]);
    }
}
