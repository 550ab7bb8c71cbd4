//! Sorting with priced comparisons.
//!
//! A hidden total order is guarded by an oracle that charges each comparison
//! its model cost; algorithms are judged by the exact total they spend. The
//! crate provides the instance and oracle machinery, DAG utilities
//! (transitive reduction, width, chain covers), inversion-driven sorting for
//! bipartite and bichromatic cost models, a quicksort-style baseline, the
//! four-cost dispatcher, lower-bound estimators with a brute-force optimal
//! baseline, and a seeded experiment runner with CSV reporting.

pub mod backbone;
pub mod backbone_sort;
pub mod bench;
pub mod bichromatic;
pub mod bounds;
pub mod cost;
pub mod dag;
pub mod gen;
pub mod generalized;
pub mod instance;
pub mod inversion;
pub mod oracle;
pub mod stats;
pub mod stripes;

pub use cost::{Cost, CostLedger};
pub use instance::{Color, CostModel, ElementId, Instance};
pub use oracle::{Direction, OracleError, OracleSession};
pub use stats::RunStats;
pub use stripes::{stripes_of, verify_output, StripeDecomposition};
