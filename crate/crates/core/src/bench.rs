//! Seeded experiment runner and CSV reporting.
//!
//! A run table is fully determined by its spec: rows are produced in
//! canonical (size, seed) order, every claimed output is checked against the
//! ground truth before a row is marked ok, and failed runs keep their cost
//! and status instead of being dropped.

use crate::backbone_sort::{run_backbone_sort, BackboneSortConfig};
use crate::bichromatic::run_bichromatic;
use crate::bounds::{bounds_from_stripes, decomposition_lb_of, InversionBound};
use crate::cost::{cost_from_u64, cost_to_f64, format_cost, parse_cost, Cost};
use crate::gen;
use crate::generalized::{sort_four_costs, FourCostConfig};
use crate::instance::{CostModel, ElementId, Instance};
use crate::inversion::{run_bipartite, InversionSortConfig};
use crate::stats::RunStats;
use crate::stripes::{stripes_of, verify_output};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const CSV_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BenchError {
    #[error("bad experiment spec: {0}")]
    BadSpec(String),
    #[error("csv schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("generator error: {0}")]
    Gen(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub kind: String,
    #[serde(default)]
    pub params: BTreeMap<String, String>,
    pub algorithm: String,
    pub sizes: Vec<usize>,
    pub seeds: u64,
    #[serde(default = "default_true")]
    pub repeat_charging: bool,
    #[serde(default)]
    pub allow_failures: bool,
}

fn default_true() -> bool {
    true
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.seeds == 0 {
            return Err(BenchError::BadSpec("seeds must be >= 1".into()));
        }
        if self.sizes.is_empty() || self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(BenchError::BadSpec(
                "sizes must be non-empty and strictly ascending".into(),
            ));
        }
        Ok(())
    }

    fn params_string(&self) -> String {
        self.params
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(";")
    }
}

/// Builds the instance for one (kind, size, seed) point.
pub fn build_instance(
    kind: &str,
    size: usize,
    params: &BTreeMap<String, String>,
    seed: u64,
) -> Result<Instance, BenchError> {
    let get_f64 = |key: &str, default: f64| -> Result<f64, BenchError> {
        match params.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|e| BenchError::BadSpec(format!("param {key}: {e}"))),
        }
    };
    let get_usize = |key: &str, default: usize| -> Result<usize, BenchError> {
        match params.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|e| BenchError::BadSpec(format!("param {key}: {e}"))),
        }
    };
    let inst = match kind {
        "interleaved" => gen::interleaved(size, seed),
        "two_block" => gen::two_block(size, get_usize("blues", size)?, seed),
        "balloon" => gen::balloon(size, seed),
        "random_bipartite" => gen::random_bipartite(size, seed),
        "gk" => gen::gk_maximum(size, seed),
        "four_level" => {
            let params = gen::FourLevelParams {
                k_f: get_usize("k_f", 0)?,
                k_1: get_usize("k_1", 8)?,
                p_zero: get_f64("p_zero", 0.25)?,
                p_one: get_f64("p_one", 0.25)?,
                p_f: get_f64("p_f", 0.02)?,
                f: None,
            };
            gen::four_level(size, &params, seed)
        }
        other => return Err(BenchError::BadSpec(format!("unknown generator {other:?}"))),
    };
    let inst = inst.map_err(|e| BenchError::Gen(e.to_string()))?;
    // bichromatic algorithms run on the same hidden orders with mono costs
    match params.get("cost_model").map(|s| s.as_str()) {
        None => Ok(inst),
        Some("bichromatic") => {
            let alpha = parse_cost(params.get("alpha").map(|s| s.as_str()).unwrap_or("2"))
                .map_err(BenchError::BadSpec)?;
            let beta = parse_cost(params.get("beta").map(|s| s.as_str()).unwrap_or("2"))
                .map_err(BenchError::BadSpec)?;
            Instance::new(
                inst.hidden_order().to_vec(),
                inst.colors().to_vec(),
                CostModel::Bichromatic { alpha, beta },
                true,
            )
            .map_err(|e| BenchError::Gen(e.to_string()))
        }
        Some(other) => Err(BenchError::BadSpec(format!(
            "unknown cost_model override {other:?}"
        ))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub version: u32,
    pub kind: String,
    pub params: String,
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    pub algorithm: String,
    pub status: String,
    pub total_cost: Option<Cost>,
    pub pivot_cost: u64,
    pub search_cost: u64,
    pub tree_depth: u32,
    pub c_v: Option<u64>,
    pub c_i: Option<Cost>,
    pub decomp_lb: Option<Cost>,
    pub hamiltonian_cost: Option<Cost>,
}

const HEADER: &str = "version,kind,params,n,m,seed,algorithm,status,total_cost,total_cost_float,pivot_cost,search_cost,tree_depth,c_v,c_i,c_i_float,decomp_lb,decomp_lb_float,hamiltonian_cost,hamiltonian_cost_float,ratio_cv,ratio_cv_float,ratio_decomp,ratio_decomp_float,ratio_ham,ratio_ham_float";

fn opt_cost_cells(c: &Option<Cost>) -> (String, String) {
    match c {
        None => (String::new(), String::new()),
        Some(c) => (format_cost(c), format!("{:.6}", cost_to_f64(c))),
    }
}

impl Row {
    /// Ratio of total cost to a positive lower bound, when both exist.
    fn ratio_to(&self, denom: Option<Cost>) -> Option<Cost> {
        use num_traits::Zero;
        let cost = self.total_cost.as_ref()?;
        let denom = denom?;
        (!denom.is_zero()).then(|| cost / denom)
    }

    fn to_csv_line(&self) -> String {
        let (tc, tcf) = opt_cost_cells(&self.total_cost);
        let (ci, cif) = opt_cost_cells(&self.c_i);
        let (dl, dlf) = opt_cost_cells(&self.decomp_lb);
        let (hc, hcf) = opt_cost_cells(&self.hamiltonian_cost);
        let (rcv, rcvf) =
            opt_cost_cells(&self.ratio_to(self.c_v.map(cost_from_u64)));
        let (rdl, rdlf) = opt_cost_cells(&self.ratio_to(self.decomp_lb.clone()));
        let (rh, rhf) = opt_cost_cells(&self.ratio_to(self.hamiltonian_cost.clone()));
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.version,
            self.kind,
            self.params,
            self.n,
            self.m,
            self.seed,
            self.algorithm,
            self.status,
            tc,
            tcf,
            self.pivot_cost,
            self.search_cost,
            self.tree_depth,
            self.c_v.map(|v| v.to_string()).unwrap_or_default(),
            ci,
            cif,
            dl,
            dlf,
            hc,
            hcf,
            rcv,
            rcvf,
            rdl,
            rdlf,
            rh,
            rhf,
        )
    }

    fn from_csv_line(line: &str) -> Result<Row, BenchError> {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 26 {
            return Err(BenchError::SchemaMismatch(format!(
                "expected 26 cells, found {}",
                cells.len()
            )));
        }
        let parse_opt = |s: &str| -> Result<Option<Cost>, BenchError> {
            if s.is_empty() {
                Ok(None)
            } else {
                parse_cost(s).map(Some).map_err(BenchError::SchemaMismatch)
            }
        };
        let num = |s: &str| -> Result<u64, BenchError> {
            s.parse()
                .map_err(|e| BenchError::SchemaMismatch(format!("bad number {s:?}: {e}")))
        };
        Ok(Row {
            version: num(cells[0])? as u32,
            kind: cells[1].to_string(),
            params: cells[2].to_string(),
            n: num(cells[3])? as usize,
            m: num(cells[4])? as usize,
            seed: num(cells[5])?,
            algorithm: cells[6].to_string(),
            status: cells[7].to_string(),
            total_cost: parse_opt(cells[8])?,
            pivot_cost: num(cells[10])?,
            search_cost: num(cells[11])?,
            tree_depth: num(cells[12])? as u32,
            c_v: if cells[13].is_empty() {
                None
            } else {
                Some(num(cells[13])?)
            },
            c_i: parse_opt(cells[14])?,
            decomp_lb: parse_opt(cells[16])?,
            hamiltonian_cost: parse_opt(cells[18])?,
        })
    }
}

pub fn rows_to_csv(rows: &[Row]) -> String {
    let mut out = String::from(HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.to_csv_line());
        out.push('\n');
    }
    out
}

pub fn rows_from_csv(text: &str) -> Result<Vec<Row>, BenchError> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == HEADER => {}
        other => {
            return Err(BenchError::SchemaMismatch(format!(
                "unexpected header {other:?}"
            )))
        }
    }
    let rows: Result<Vec<Row>, BenchError> = lines.map(Row::from_csv_line).collect();
    let rows = rows?;
    if rows.iter().any(|r| r.version != CSV_VERSION) {
        return Err(BenchError::SchemaMismatch("row version mismatch".into()));
    }
    Ok(rows)
}

/// Path edges of a claimed total order.
fn path_edges(order: &[ElementId]) -> Vec<(ElementId, ElementId)> {
    order.windows(2).map(|w| (w[0], w[1])).collect()
}

/// Runs one algorithm on one instance; returns (status, stats-if-any,
/// verified claimed output).
fn run_algorithm(algorithm: &str, instance: &Instance, seed: u64, repeat_charging: bool)
    -> (String, Option<RunStats>)
{
    match algorithm {
        "inversion_sort" => {
            let config = InversionSortConfig {
                memoized_charging: !repeat_charging,
                ..Default::default()
            };
            let (decomp, stats) = run_bipartite(instance, seed, config);
            let ok = verify_output(&decomp.reduction_edges(), instance);
            (
                if ok { "ok" } else { "wrong_output" }.to_string(),
                Some(stats),
            )
        }
        "backbone_sort" => match run_backbone_sort(instance, seed, &BackboneSortConfig::default())
        {
            Ok((order, stats)) => {
                let ok = verify_output(&path_edges(&order), instance);
                (
                    if ok { "ok" } else { "wrong_output" }.to_string(),
                    Some(stats),
                )
            }
            Err(violated) => ("promise_violated".to_string(), Some(violated.stats)),
        },
        "bichromatic" => {
            let out = run_bichromatic(instance, seed);
            let ok = verify_output(&path_edges(&out.order), instance)
                && out.order == instance.hidden_order();
            (
                if ok { "ok" } else { "wrong_output" }.to_string(),
                Some(out.stats),
            )
        }
        "four_costs" => match sort_four_costs(instance, seed, &FourCostConfig::default()) {
            Ok(out) => {
                let ok = verify_output(&path_edges(&out.hamiltonian), instance);
                let stats = RunStats {
                    seed,
                    n: instance.len(),
                    size_vector: vec![instance.len()],
                    total_cost: out.total_cost,
                    pivot_cost: 0,
                    search_cost: 0,
                    tree_depth: 0,
                    rounds: 0,
                };
                (
                    if ok { "ok" } else { "wrong_output" }.to_string(),
                    Some(stats),
                )
            }
            Err(e) => (format!("error:{e}"), None),
        },
        other => (format!("error:unknown algorithm {other}"), None),
    }
}

/// Stripe counts beyond which the decomposition DP is skipped in run tables;
/// the quadratic exact-rational program dominates everything else at that
/// point and the column is left empty.
const DECOMP_STRIPE_CAP: usize = 600;

/// Executes the spec point by point in canonical (size, seed) order.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<Row>, BenchError> {
    Ok(run_experiment_with_stats(spec)?.0)
}

/// As `run_experiment`, also returning the per-run stats records (one per
/// row; `None` for runs that produced no stats).
pub fn run_experiment_with_stats(
    spec: &ExperimentSpec,
) -> Result<(Vec<Row>, Vec<Option<RunStats>>), BenchError> {
    spec.validate()?;
    let mut rows = Vec::new();
    let mut all_stats = Vec::new();
    // bounds depend only on the stripe structure; seeds share them
    let mut bound_cache: BTreeMap<(Vec<usize>, bool), (u64, Option<Cost>, Option<Cost>)> =
        BTreeMap::new();
    for &size in &spec.sizes {
        for seed in 0..spec.seeds {
            let instance = build_instance(&spec.kind, size, &spec.params, seed)?;
            let (status, stats) =
                run_algorithm(&spec.algorithm, &instance, seed, spec.repeat_charging);
            let two_colored = instance.is_two_colored_complete();
            let (c_v, c_i, decomp) = if two_colored {
                let d = stripes_of(&instance);
                let key = (d.size_vector(), d.first_color() == crate::instance::Color::Red);
                let (cv, ci, dv) = bound_cache
                    .entry(key)
                    .or_insert_with(|| {
                        let (cv, ci) = bounds_from_stripes(&d);
                        let ci = match ci {
                            InversionBound::Finite(c) => Some(c),
                            InversionBound::Infinite => None,
                        };
                        let dv = (d.len() <= DECOMP_STRIPE_CAP)
                            .then(|| decomposition_lb_of(&d).0);
                        (cv, ci, dv)
                    })
                    .clone();
                (Some(cv), ci, dv)
            } else {
                (None, None, None)
            };
            rows.push(Row {
                version: CSV_VERSION,
                kind: spec.kind.clone(),
                params: spec.params_string(),
                n: instance.len(),
                m: instance.blues(),
                seed,
                algorithm: spec.algorithm.clone(),
                status,
                total_cost: stats.as_ref().map(|s| s.total_cost.clone()),
                pivot_cost: stats.as_ref().map(|s| s.pivot_cost).unwrap_or(0),
                search_cost: stats.as_ref().map(|s| s.search_cost).unwrap_or(0),
                tree_depth: stats.as_ref().map(|s| s.tree_depth).unwrap_or(0),
                c_v,
                c_i,
                decomp_lb: decomp,
                hamiltonian_cost: instance.hamiltonian_cost(),
            });
            all_stats.push(stats);
        }
    }
    Ok((rows, all_stats))
}

// ---------------------------------------------------------------------------
// Reporting
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct SummaryRow {
    pub kind: String,
    pub algorithm: String,
    pub n: usize,
    pub runs: usize,
    pub ok_runs: usize,
    pub mean_cost: f64,
    pub median_cost: f64,
    pub max_cost: f64,
    pub mean_ratio_cv: Option<f64>,
    pub mean_ratio_decomp: Option<f64>,
    pub mean_ratio_ham: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SlopeRow {
    pub kind: String,
    pub algorithm: String,
    /// Log-log slope of mean cost against n.
    pub slope: f64,
}

#[derive(Debug, Clone)]
pub struct ReportOutcome {
    pub summaries: Vec<SummaryRow>,
    pub slopes: Vec<SlopeRow>,
}

/// Least-squares slope of y against x.
pub fn fit_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

pub fn report(tables: &[Vec<Row>]) -> Result<ReportOutcome, BenchError> {
    let mut groups: BTreeMap<(String, String, usize), Vec<&Row>> = BTreeMap::new();
    for table in tables {
        for row in table {
            if row.version != CSV_VERSION {
                return Err(BenchError::SchemaMismatch("row version mismatch".into()));
            }
            groups
                .entry((row.kind.clone(), row.algorithm.clone(), row.n))
                .or_default()
                .push(row);
        }
    }
    let mut summaries = Vec::new();
    for ((kind, algorithm, n), rows) in &groups {
        let mut costs: Vec<f64> = rows
            .iter()
            .filter_map(|r| r.total_cost.as_ref().map(cost_to_f64))
            .collect();
        costs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if costs.is_empty() {
            continue;
        }
        let mean = costs.iter().sum::<f64>() / costs.len() as f64;
        let median = costs[costs.len() / 2];
        let max = *costs.last().unwrap();
        let ratio_mean = |num: &dyn Fn(&Row) -> Option<f64>| -> Option<f64> {
            let vals: Vec<f64> = rows.iter().filter_map(|r| num(r)).collect();
            if vals.is_empty() {
                None
            } else {
                Some(vals.iter().sum::<f64>() / vals.len() as f64)
            }
        };
        let cost_of = |r: &Row| r.total_cost.as_ref().map(cost_to_f64);
        summaries.push(SummaryRow {
            kind: kind.clone(),
            algorithm: algorithm.clone(),
            n: *n,
            runs: rows.len(),
            ok_runs: rows.iter().filter(|r| r.status == "ok").count(),
            mean_cost: mean,
            median_cost: median,
            max_cost: max,
            mean_ratio_cv: ratio_mean(&|r| {
                Some(cost_of(r)? / r.c_v.filter(|&v| v > 0)? as f64)
            }),
            mean_ratio_decomp: ratio_mean(&|r| {
                let d = r.decomp_lb.as_ref().map(cost_to_f64)?;
                (d > 0.0).then(|| cost_of(r))?.map(|c| c / d)
            }),
            mean_ratio_ham: ratio_mean(&|r| {
                let h = r.hamiltonian_cost.as_ref().map(cost_to_f64)?;
                (h > 0.0).then(|| cost_of(r))?.map(|c| c / h)
            }),
        });
    }
    // slopes per (kind, algorithm) over sizes
    let mut slope_groups: BTreeMap<(String, String), Vec<(f64, f64)>> = BTreeMap::new();
    for s in &summaries {
        if s.mean_cost > 0.0 {
            slope_groups
                .entry((s.kind.clone(), s.algorithm.clone()))
                .or_default()
                .push(((s.n as f64).log2(), s.mean_cost.log2()));
        }
    }
    let slopes = slope_groups
        .into_iter()
        .filter(|(_, pts)| pts.len() >= 2)
        .map(|((kind, algorithm), pts)| SlopeRow {
            kind,
            algorithm,
            slope: fit_slope(&pts),
        })
        .collect();
    Ok(ReportOutcome { summaries, slopes })
}

pub fn summary_to_csv(outcome: &ReportOutcome) -> String {
    let mut out = String::from(
        "kind,algorithm,n,runs,ok_runs,mean_cost,median_cost,max_cost,mean_ratio_cv,mean_ratio_decomp,mean_ratio_ham\n",
    );
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
    for s in &outcome.summaries {
        out.push_str(&format!(
            "{},{},{},{},{},{:.6},{:.6},{:.6},{},{},{}\n",
            s.kind,
            s.algorithm,
            s.n,
            s.runs,
            s.ok_runs,
            s.mean_cost,
            s.median_cost,
            s.max_cost,
            opt(s.mean_ratio_cv),
            opt(s.mean_ratio_decomp),
            opt(s.mean_ratio_ham),
        ));
    }
    out.push_str("\nkind,algorithm,loglog_slope\n");
    for s in &outcome.slopes {
        out.push_str(&format!("{},{},{:.4}\n", s.kind, s.algorithm, s.slope));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_spec() -> ExperimentSpec {
        ExperimentSpec {
            kind: "interleaved".into(),
            params: BTreeMap::new(),
            algorithm: "inversion_sort".into(),
            sizes: vec![2, 4, 8],
            seeds: 5,
            repeat_charging: true,
            allow_failures: false,
        }
    }

    #[test]
    fn row_count_matches_spec_and_all_ok() {
        let rows = run_experiment(&tiny_spec()).unwrap();
        assert_eq!(rows.len(), 15);
        assert!(rows.iter().all(|r| r.status == "ok"));
    }

    #[test]
    fn identical_specs_give_byte_identical_csv() {
        let a = rows_to_csv(&run_experiment(&tiny_spec()).unwrap());
        let b = rows_to_csv(&run_experiment(&tiny_spec()).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn backbone_on_balloon_keeps_failed_rows() {
        let spec = ExperimentSpec {
            kind: "balloon".into(),
            params: BTreeMap::new(),
            algorithm: "backbone_sort".into(),
            sizes: vec![16],
            seeds: 3,
            repeat_charging: true,
            allow_failures: true,
        };
        let rows = run_experiment(&spec).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| r.status == "promise_violated"));
        assert!(rows.iter().all(|r| r.total_cost.is_some()));
    }

    #[test]
    fn csv_round_trip_preserves_rows() {
        let rows = run_experiment(&tiny_spec()).unwrap();
        let text = rows_to_csv(&rows);
        let back = rows_from_csv(&text).unwrap();
        assert_eq!(rows, back);
    }

    #[test]
    fn report_on_single_row_echoes_the_row() {
        let spec = ExperimentSpec {
            sizes: vec![4],
            seeds: 1,
            ..tiny_spec()
        };
        let rows = run_experiment(&spec).unwrap();
        let out = report(&[rows.clone()]).unwrap();
        assert_eq!(out.summaries.len(), 1);
        let s = &out.summaries[0];
        assert_eq!(s.runs, 1);
        assert_eq!(
            s.mean_cost,
            cost_to_f64(rows[0].total_cost.as_ref().unwrap())
        );
        assert_eq!(s.mean_cost, s.median_cost);
    }

    #[test]
    fn report_rejects_schema_mismatch() {
        let text = "version,bogus\n1,2\n";
        assert!(matches!(
            rows_from_csv(text),
            Err(BenchError::SchemaMismatch(_))
        ));
    }

    #[test]
    fn spec_validation_rejects_unsorted_sizes() {
        let mut spec = tiny_spec();
        spec.sizes = vec![8, 4];
        assert!(spec.validate().is_err());
        spec.sizes = vec![4];
        spec.seeds = 0;
        assert!(spec.validate().is_err());
    }
}
