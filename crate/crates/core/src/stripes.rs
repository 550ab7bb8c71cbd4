//! Stripes of two-colored instances and the ground-truth output checker.
//!
//! A stripe is a maximal same-color run of the hidden order; stripes
//! alternate colors and the transitive reduction of a complete-bipartite
//! instance is exactly the complete bipartite graph between neighboring
//! stripes.

use crate::dag::RevealedDag;
use crate::instance::{Color, ElementId, Instance};

/// Ordered stripes with their size vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StripeDecomposition {
    stripes: Vec<Vec<ElementId>>,
    first_color: Color,
}

impl StripeDecomposition {
    pub fn new(stripes: Vec<Vec<ElementId>>, first_color: Color) -> Self {
        debug_assert!(stripes.iter().all(|s| !s.is_empty()));
        StripeDecomposition {
            stripes,
            first_color,
        }
    }

    pub fn stripes(&self) -> &[Vec<ElementId>] {
        &self.stripes
    }

    pub fn first_color(&self) -> Color {
        self.first_color
    }

    pub fn len(&self) -> usize {
        self.stripes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stripes.is_empty()
    }

    pub fn color_of_stripe(&self, i: usize) -> Color {
        if i.is_multiple_of(2) {
            self.first_color
        } else {
            self.first_color.flip()
        }
    }

    pub fn size_vector(&self) -> Vec<usize> {
        self.stripes.iter().map(|s| s.len()).collect()
    }

    /// Stripe index of every element.
    pub fn stripe_of(&self) -> Vec<usize> {
        let n: usize = self.stripes.iter().map(|s| s.len()).sum();
        let mut idx = vec![usize::MAX; n];
        for (i, s) in self.stripes.iter().enumerate() {
            for &e in s {
                idx[e as usize] = i;
            }
        }
        idx
    }

    /// The transitive reduction implied by the stripes: all edges between
    /// consecutive stripes, nothing else.
    pub fn reduction_edges(&self) -> Vec<(ElementId, ElementId)> {
        let mut edges = Vec::new();
        for w in self.stripes.windows(2) {
            for &a in &w[0] {
                for &b in &w[1] {
                    edges.push((a, b));
                }
            }
        }
        edges.sort_unstable();
        edges
    }

    /// Compares stripe contents as sets, in order.
    pub fn same_stripes(&self, other: &StripeDecomposition) -> bool {
        if self.stripes.len() != other.stripes.len() {
            return false;
        }
        self.stripes.iter().zip(&other.stripes).all(|(a, b)| {
            let mut a = a.clone();
            let mut b = b.clone();
            a.sort_unstable();
            b.sort_unstable();
            a == b
        })
    }
}

/// Size vector of a decomposition. By construction no two adjacent stripes
/// share a color.
pub fn canonical_size_vector(decomp: &StripeDecomposition) -> Vec<usize> {
    decomp.size_vector()
}

/// Ground-truth stripes: maximal monochromatic runs of the hidden order.
/// Equivalent to iteratively peeling the sources of the comparability DAG.
pub fn stripes_of(instance: &Instance) -> StripeDecomposition {
    let order = instance.hidden_order();
    let mut stripes: Vec<Vec<ElementId>> = Vec::new();
    let mut first_color = Color::Red;
    for &id in order {
        let c = instance.color(id);
        match stripes.last_mut() {
            Some(last) if instance.color(last[0]) == c => last.push(id),
            _ => {
                if stripes.is_empty() {
                    first_color = c;
                }
                stripes.push(vec![id]);
            }
        }
    }
    StripeDecomposition::new(stripes, first_color)
}

/// The full comparability DAG of the instance: every allowed pair, directed
/// by the hidden order.
pub fn ground_truth_dag(instance: &Instance) -> RevealedDag {
    let n = instance.len();
    let mut dag = RevealedDag::new(n);
    for u in 0..n as ElementId {
        for v in u + 1..n as ElementId {
            if instance.cost(u, v).is_some() {
                let (lo, hi) = if instance.less(u, v) { (u, v) } else { (v, u) };
                dag.add_edge(lo, hi).expect("total order cannot cycle");
            }
        }
    }
    dag
}

/// True iff `claimed` equals the transitive reduction of the ground-truth
/// comparability DAG.
///
/// Closed forms cover the common models: bipartite instances reduce to the
/// stripe-adjacent edges, while bichromatic (complete comparability) and
/// Hamiltonian-promise instances reduce to the rank-adjacent path. Anything
/// else falls back to the brute-force closure route, which doubles as the
/// independent oracle in tests.
pub fn verify_output(claimed: &[(ElementId, ElementId)], instance: &Instance) -> bool {
    use crate::instance::CostModel;
    let rank_adjacent = || -> Vec<(ElementId, ElementId)> {
        instance
            .hidden_order()
            .windows(2)
            .map(|w| (w[0], w[1]))
            .collect()
    };
    let mut truth: Vec<(ElementId, ElementId)> = match instance.cost_model() {
        CostModel::BipartiteUnit => stripes_of(instance).reduction_edges(),
        CostModel::Bichromatic { .. } => rank_adjacent(),
        _ if instance.hamiltonian_promise() => rank_adjacent(),
        _ => ground_truth_dag(instance).transitive_reduction(),
    };
    truth.sort_unstable();
    let mut claimed: Vec<(ElementId, ElementId)> = claimed.to_vec();
    claimed.sort_unstable();
    claimed.dedup();
    claimed == truth
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::CostModel;

    fn inst_from_color_runs(pattern: &str) -> Instance {
        // pattern like "RRBRB": element i has rank i, color = pattern[i]
        let colors: Vec<Color> = pattern
            .chars()
            .map(|c| if c == 'R' { Color::Red } else { Color::Blue })
            .collect();
        let n = colors.len();
        Instance::new(
            (0..n as ElementId).collect(),
            colors,
            CostModel::BipartiteUnit,
            false,
        )
        .unwrap()
    }

    #[test]
    fn interleaved_sizes_are_all_ones() {
        let d = stripes_of(&inst_from_color_runs("RBRB"));
        assert_eq!(canonical_size_vector(&d), vec![1, 1, 1, 1]);
    }

    #[test]
    fn two_block_sizes() {
        let d = stripes_of(&inst_from_color_runs("RRRBB"));
        assert_eq!(canonical_size_vector(&d), vec![3, 2]);
        assert_eq!(d.first_color(), Color::Red);
    }

    #[test]
    fn stripes_match_iterated_source_removal() {
        let inst = inst_from_color_runs("RRBRBB");
        let d = stripes_of(&inst);
        assert_eq!(canonical_size_vector(&d), vec![2, 1, 1, 2]);
        // independent route: peel sources of the ground-truth DAG
        let layers = ground_truth_dag(&inst).source_layers();
        // source peeling merges nothing here because runs alternate colors
        let by_layers: Vec<Vec<ElementId>> = layers
            .into_iter()
            .map(|mut l| {
                l.sort_unstable();
                l
            })
            .collect();
        let mut expect: Vec<Vec<ElementId>> = d.stripes().to_vec();
        for s in &mut expect {
            s.sort_unstable();
        }
        assert_eq!(by_layers, expect);
    }

    #[test]
    fn reduction_size_is_sum_of_adjacent_products() {
        let inst = inst_from_color_runs("RRBBBR");
        let d = stripes_of(&inst);
        assert_eq!(d.size_vector(), vec![2, 3, 1]);
        let red = ground_truth_dag(&inst).transitive_reduction();
        assert_eq!(red.len(), 2 * 3 + 3 * 1);
        assert_eq!(red, d.reduction_edges());
    }

    #[test]
    fn verify_accepts_truth_and_rejects_missing_edge() {
        let inst = inst_from_color_runs("RRRBB");
        let d = stripes_of(&inst);
        let mut edges = d.reduction_edges();
        assert!(verify_output(&edges, &inst));
        edges.pop();
        assert!(!verify_output(&edges, &inst));
    }

    #[test]
    fn bichromatic_truth_is_the_full_path_not_the_stripe_reduction() {
        // monochromatic pairs are allowed, so the comparability graph is
        // complete and only the rank-adjacent edges are essential
        let base = inst_from_color_runs("RRBB");
        let inst = Instance::new(
            base.hidden_order().to_vec(),
            base.colors().to_vec(),
            CostModel::Bichromatic {
                alpha: crate::cost::parse_cost("2").unwrap(),
                beta: crate::cost::parse_cost("2").unwrap(),
            },
            false,
        )
        .unwrap();
        let path: Vec<_> = inst.hidden_order().windows(2).map(|w| (w[0], w[1])).collect();
        assert!(verify_output(&path, &inst));
        let cross = stripes_of(&inst).reduction_edges();
        assert!(!verify_output(&cross, &inst));
        // independent route agrees
        assert_eq!(
            ground_truth_dag(&inst).transitive_reduction(),
            {
                let mut p = path.clone();
                p.sort_unstable();
                p
            }
        );
    }

    #[test]
    fn hamiltonian_truth_is_rank_adjacent_path() {
        let inst = Instance::new(
            vec![0, 2, 1, 3],
            vec![Color::Red, Color::Red, Color::Blue, Color::Blue],
            CostModel::BipartiteUnit,
            true,
        )
        .unwrap();
        let claimed = vec![(0, 2), (2, 1), (1, 3)];
        assert!(verify_output(&claimed, &inst));
    }
}
