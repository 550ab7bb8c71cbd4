//! Per-run statistics shared by the sorting algorithms.

use crate::cost::{format_cost, Cost};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

/// One seeded run: costs are exact; probe counts split into pivoting and
/// inversion searching.
#[derive(Debug, Clone)]
pub struct RunStats {
    pub seed: u64,
    pub n: usize,
    pub size_vector: Vec<usize>,
    pub total_cost: Cost,
    pub pivot_cost: u64,
    pub search_cost: u64,
    pub tree_depth: u32,
    pub rounds: u64,
}

impl Serialize for RunStats {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        let mut s = ser.serialize_struct("RunStats", 8)?;
        s.serialize_field("seed", &self.seed)?;
        s.serialize_field("n", &self.n)?;
        s.serialize_field("size_vector", &self.size_vector)?;
        s.serialize_field("total_cost", &format_cost(&self.total_cost))?;
        s.serialize_field("pivot_cost", &self.pivot_cost)?;
        s.serialize_field("search_cost", &self.search_cost)?;
        s.serialize_field("tree_depth", &self.tree_depth)?;
        s.serialize_field("rounds", &self.rounds)?;
        s.end()
    }
}
