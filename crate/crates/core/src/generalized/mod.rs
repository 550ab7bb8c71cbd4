//! Sorting with costs in {0, 1, F, infinity} under a Hamiltonian promise:
//! width-bounded predecessor search, Hamiltonian completion, the 0/1-edge
//! universal sorter, and the budget-interleaved dispatcher.

mod dispatch;
mod predecessor;
mod ranks;
mod universal;

pub use dispatch::{sort_four_costs, BranchReport, FourCostConfig, FourCostOutcome};
pub use predecessor::{complete_hamiltonian, predecessor_search, CompletionOutcome};
pub use ranks::{average_ranks, ExtensionSampler, RankConfig, RankEstimate};
pub use universal::{
    ground_truth_reduction, ground_truth_width, universal_sort, universal_sort_01, AllowedClasses,
    EngineOutcome, UniversalConfig,
};

use crate::oracle::OracleError;

#[derive(Debug, thiserror::Error)]
pub enum GeneralizedError {
    #[error("no Hamiltonian path can be completed (promise violated or edges forbidden)")]
    NoHamiltonian,
    #[error("branch aborted: query cost exceeded its budget")]
    BudgetExhausted,
    #[error("probe rejected: {0}")]
    ForbiddenProbe(#[from] OracleError),
}
