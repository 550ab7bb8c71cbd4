//! The backbone: an alternating, probed-ordered list of representatives with
//! a bucket of same-color elements attached to each.
//!
//! Two artificial extremes bound the backbone: a red element below every blue
//! and a blue element above every red. Artificial representatives are never
//! probed; their order against opposite-color elements is structural.

use crate::instance::{Color, ElementId, Instance};
use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rep {
    /// Artificial red element smaller than all blue elements.
    Low,
    /// Artificial blue element larger than all red elements.
    High,
    Element(ElementId),
}

impl Rep {
    pub fn color(&self, instance: &Instance) -> Color {
        match self {
            Rep::Low => Color::Red,
            Rep::High => Color::Blue,
            Rep::Element(id) => instance.color(*id),
        }
    }

    pub fn element(&self) -> Option<ElementId> {
        match self {
            Rep::Element(id) => Some(*id),
            _ => None,
        }
    }
}

pub type PairKey = (Rep, Rep);

/// Backbone representatives and their buckets, kept in parallel vectors.
#[derive(Debug, Clone)]
pub struct BackboneState {
    pub reps: Vec<Rep>,
    pub buckets: Vec<Vec<ElementId>>,
}

impl BackboneState {
    /// The trivial backbone: both artificial extremes, all reds in the low
    /// bucket, all blues in the high bucket.
    pub fn init(instance: &Instance) -> Self {
        let mut reds = Vec::new();
        let mut blues = Vec::new();
        for id in instance.ids() {
            match instance.color(id) {
                Color::Red => reds.push(id),
                Color::Blue => blues.push(id),
            }
        }
        BackboneState {
            reps: vec![Rep::Low, Rep::High],
            buckets: vec![reds, blues],
        }
    }

    pub fn index_of(&self, rep: Rep) -> Option<usize> {
        self.reps.iter().position(|&r| r == rep)
    }

    pub fn adjacent_pairs(&self) -> Vec<PairKey> {
        self.reps.windows(2).map(|w| (w[0], w[1])).collect()
    }

    /// Checks alternation and membership invariants; used by tests.
    pub fn check_invariants(&self, instance: &Instance) {
        assert_eq!(self.reps.len(), self.buckets.len());
        assert_eq!(self.reps[0], Rep::Low);
        assert_eq!(*self.reps.last().unwrap(), Rep::High);
        for w in self.reps.windows(2) {
            assert_ne!(
                w[0].color(instance),
                w[1].color(instance),
                "adjacent representatives must alternate"
            );
        }
        for (rep, bucket) in self.reps.iter().zip(&self.buckets) {
            for &e in bucket {
                assert_eq!(instance.color(e), rep.color(instance));
                assert_ne!(Rep::Element(e), *rep);
            }
        }
    }

    /// Every bucket grouped with its representative, artificial extremes
    /// dropped; this is the output shape of the inversion sorts.
    pub fn output_groups(&self) -> Vec<Vec<ElementId>> {
        let mut groups = Vec::new();
        for (rep, bucket) in self.reps.iter().zip(&self.buckets) {
            let mut g = bucket.clone();
            if let Rep::Element(id) = rep {
                g.push(*id);
            }
            if !g.is_empty() {
                g.sort_unstable();
                groups.push(g);
            }
        }
        groups
    }
}

/// One node of the refinement tree, recorded for instrumentation.
#[derive(Debug, Clone)]
pub struct TreeNode {
    pub depth: u32,
    /// |R_v| * |B_v| of the enclosing list-subinstance at creation.
    pub pair_count: u64,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

/// Trace of how backbone intervals were refined; drives the depth and
/// pair-count-contraction checks.
#[derive(Debug, Clone, Default)]
pub struct RefinementTree {
    pub nodes: Vec<TreeNode>,
    index: HashMap<PairKey, usize>,
}

impl RefinementTree {
    pub fn with_root(key: PairKey, pair_count: u64) -> Self {
        let mut t = RefinementTree::default();
        t.nodes.push(TreeNode {
            depth: 0,
            pair_count,
            parent: None,
            children: Vec::new(),
        });
        t.index.insert(key, 0);
        t
    }

    /// Replaces `parent_key` by three children created from an inversion.
    pub fn split(&mut self, parent_key: PairKey, children: [(PairKey, u64); 3]) {
        let pidx = match self.index.get(&parent_key) {
            Some(&i) => i,
            None => return, // untracked interval (possible only in tests)
        };
        let depth = self.nodes[pidx].depth + 1;
        for (key, pv) in children {
            let idx = self.nodes.len();
            self.nodes.push(TreeNode {
                depth,
                pair_count: pv,
                parent: Some(pidx),
                children: Vec::new(),
            });
            self.nodes[pidx].children.push(idx);
            self.index.insert(key, idx);
        }
        self.index.remove(&parent_key);
    }

    pub fn max_depth(&self) -> u32 {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    /// For every internal node with nonzero pair count, whether
    /// `max(children pair counts) <= (7/8) * parent pair count`.
    pub fn contraction_flags(&self) -> Vec<bool> {
        self.nodes
            .iter()
            .filter(|n| !n.children.is_empty() && n.pair_count > 0)
            .map(|n| {
                let worst = n
                    .children
                    .iter()
                    .map(|&c| self.nodes[c].pair_count)
                    .max()
                    .unwrap_or(0);
                8 * worst <= 7 * n.pair_count
            })
            .collect()
    }
}

/// Pair count |R_v| * |B_v| of the list-subinstance spanned by two
/// representatives, measured on the hidden order (instrumentation only; the
/// algorithms never read this).
pub fn pair_count_of(instance: &Instance, lo: Rep, hi: Rep) -> u64 {
    let lo_rank = match lo {
        Rep::Low => 0i64,
        Rep::High => instance.len() as i64,
        Rep::Element(id) => instance.rank(id) as i64,
    };
    let hi_rank = match hi {
        Rep::Low => -1i64,
        Rep::High => instance.len() as i64 - 1,
        Rep::Element(id) => instance.rank(id) as i64,
    };
    let mut reds = 0u64;
    let mut blues = 0u64;
    for r in lo_rank..=hi_rank {
        if r < 0 || r >= instance.len() as i64 {
            continue;
        }
        let id = instance.hidden_order()[r as usize];
        match instance.color(id) {
            Color::Red => reds += 1,
            Color::Blue => blues += 1,
        }
    }
    reds * blues
}
