//! Instances: a hidden total order, a coloring, and a cost model.
//!
//! An instance is the ground truth an oracle guards. Algorithms never touch
//! it directly; they go through [`crate::oracle::OracleSession`].

use crate::cost::{cost_from_u64, cost_one, cost_zero, format_cost, parse_cost, Cost};
use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::json;
use std::fmt;

pub type ElementId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Color {
    Red,
    Blue,
}

impl Color {
    pub fn flip(self) -> Color {
        match self {
            Color::Red => Color::Blue,
            Color::Blue => Color::Red,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Color::Red => 'R',
            Color::Blue => 'B',
        }
    }
}

/// Cost class of a pair in a four-level instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FourCost {
    Zero,
    One,
    F,
    Inf,
}

impl FourCost {
    pub fn as_char(self) -> char {
        match self {
            FourCost::Zero => '0',
            FourCost::One => '1',
            FourCost::F => 'F',
            FourCost::Inf => 'x',
        }
    }

    pub fn from_char(c: char) -> Option<FourCost> {
        match c {
            '0' => Some(FourCost::Zero),
            '1' => Some(FourCost::One),
            'F' => Some(FourCost::F),
            'x' => Some(FourCost::Inf),
            _ => None,
        }
    }
}

/// Symmetric per-pair table, stored as the full n*n grid for simplicity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairTable<T: Copy> {
    n: usize,
    cells: Vec<T>,
}

impl<T: Copy> PairTable<T> {
    pub fn filled(n: usize, v: T) -> Self {
        PairTable {
            n,
            cells: vec![v; n * n],
        }
    }

    pub fn get(&self, u: ElementId, v: ElementId) -> T {
        self.cells[u as usize * self.n + v as usize]
    }

    pub fn set(&mut self, u: ElementId, v: ElementId, val: T) {
        self.cells[u as usize * self.n + v as usize] = val;
        self.cells[v as usize * self.n + u as usize] = val;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CostModel {
    /// Monochromatic pairs forbidden, every bichromatic pair costs 1.
    BipartiteUnit,
    /// Bichromatic pairs cost 1, red-red costs `alpha`, blue-blue costs `beta`.
    /// The main algorithms assume `alpha, beta > 1`; the merge variants cover
    /// `alpha, beta < 1` and `alpha < 1 < beta`.
    Bichromatic { alpha: Cost, beta: Cost },
    /// Every pair belongs to one of the classes {0, 1, F, inf}, F >= n^(3/4).
    FourLevel { f: Cost, classes: PairTable<FourCost> },
    /// Arbitrary per-pair costs; `None` means forbidden.
    Explicit { costs: Vec<Vec<Option<Cost>>> },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InstanceError {
    #[error("hidden order is not a bijection on 0..{0}")]
    OrderNotBijective(usize),
    #[error("color string length {0} does not match n={1}")]
    ColorLengthMismatch(usize, usize),
    #[error("four-level F={f} violates F >= n^(3/4) = {bound}")]
    FTooSmall { f: String, bound: String },
    #[error("hamiltonian promise violated: rank-adjacent pair ({0}, {1}) has infinite cost")]
    PromiseUnsatisfiable(ElementId, ElementId),
    #[error("bad instance file: {0}")]
    BadFile(String),
}

/// A universal-sorting instance: hidden order, coloring, and cost model.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    n: usize,
    /// Position = rank, smallest first.
    hidden_order: Vec<ElementId>,
    /// rank_of[id] = rank.
    rank_of: Vec<u32>,
    colors: Vec<Color>,
    cost_model: CostModel,
    hamiltonian_promise: bool,
}

impl Instance {
    pub fn new(
        hidden_order: Vec<ElementId>,
        colors: Vec<Color>,
        cost_model: CostModel,
        hamiltonian_promise: bool,
    ) -> Result<Instance, InstanceError> {
        let n = hidden_order.len();
        let mut rank_of = vec![u32::MAX; n];
        for (rank, &id) in hidden_order.iter().enumerate() {
            if (id as usize) >= n || rank_of[id as usize] != u32::MAX {
                return Err(InstanceError::OrderNotBijective(n));
            }
            rank_of[id as usize] = rank as u32;
        }
        if colors.len() != n {
            return Err(InstanceError::ColorLengthMismatch(colors.len(), n));
        }
        if let CostModel::FourLevel { f, .. } = &cost_model {
            let bound = n_to_three_quarters(n);
            if f < &bound {
                return Err(InstanceError::FTooSmall {
                    f: format_cost(f),
                    bound: format_cost(&bound),
                });
            }
        }
        let inst = Instance {
            n,
            hidden_order,
            rank_of,
            colors,
            cost_model,
            hamiltonian_promise,
        };
        if inst.hamiltonian_promise {
            for r in 0..n.saturating_sub(1) {
                let u = inst.hidden_order[r];
                let v = inst.hidden_order[r + 1];
                if inst.cost(u, v).is_none() {
                    return Err(InstanceError::PromiseUnsatisfiable(u, v));
                }
            }
        }
        Ok(inst)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn ids(&self) -> impl Iterator<Item = ElementId> {
        0..self.n as ElementId
    }

    pub fn color(&self, id: ElementId) -> Color {
        self.colors[id as usize]
    }

    pub fn colors(&self) -> &[Color] {
        &self.colors
    }

    pub fn rank(&self, id: ElementId) -> u32 {
        self.rank_of[id as usize]
    }

    /// Ground-truth order: true iff `u` precedes `v` in the hidden order.
    pub fn less(&self, u: ElementId, v: ElementId) -> bool {
        self.rank(u) < self.rank(v)
    }

    pub fn hidden_order(&self) -> &[ElementId] {
        &self.hidden_order
    }

    pub fn cost_model(&self) -> &CostModel {
        &self.cost_model
    }

    pub fn hamiltonian_promise(&self) -> bool {
        self.hamiltonian_promise
    }

    pub fn reds(&self) -> usize {
        self.colors.iter().filter(|c| **c == Color::Red).count()
    }

    pub fn blues(&self) -> usize {
        self.n - self.reds()
    }

    /// Cost of comparing the unordered pair {u, v}; `None` means forbidden.
    pub fn cost(&self, u: ElementId, v: ElementId) -> Option<Cost> {
        debug_assert_ne!(u, v);
        match &self.cost_model {
            CostModel::BipartiteUnit => {
                if self.color(u) == self.color(v) {
                    None
                } else {
                    Some(cost_one())
                }
            }
            CostModel::Bichromatic { alpha, beta } => match (self.color(u), self.color(v)) {
                (Color::Red, Color::Red) => Some(alpha.clone()),
                (Color::Blue, Color::Blue) => Some(beta.clone()),
                _ => Some(cost_one()),
            },
            CostModel::FourLevel { f, classes } => match classes.get(u, v) {
                FourCost::Zero => Some(cost_zero()),
                FourCost::One => Some(cost_one()),
                FourCost::F => Some(f.clone()),
                FourCost::Inf => None,
            },
            CostModel::Explicit { costs } => costs[u as usize][v as usize].clone(),
        }
    }

    /// Cost of the Hamiltonian path, when the promise holds.
    pub fn hamiltonian_cost(&self) -> Option<Cost> {
        let mut total = cost_zero();
        for r in 0..self.n.saturating_sub(1) {
            total += self.cost(self.hidden_order[r], self.hidden_order[r + 1])?;
        }
        Some(total)
    }

    /// True for the 2-colored models where every bichromatic pair is allowed.
    pub fn is_two_colored_complete(&self) -> bool {
        matches!(
            self.cost_model,
            CostModel::BipartiteUnit | CostModel::Bichromatic { .. }
        )
    }

    pub fn colors_string(&self) -> String {
        self.colors.iter().map(|c| c.as_char()).collect()
    }
}

/// Smallest rational `>= n^(3/4)`: computed as `ceil(n^(3/4))` on integers.
pub fn n_to_three_quarters(n: usize) -> Cost {
    // ceil(n^(3/4)) = smallest k with k^4 >= n^3
    let n = n as u128;
    let n3 = n * n * n;
    let mut k = 0u128;
    while k * k * k * k < n3 {
        k += 1;
    }
    cost_from_u64(k as u64)
}

// ---------------------------------------------------------------------------
// JSON file format:
// {"n": int, "colors": "RRBRB...", "order": [ids by rank],
//  "cost_model": {"kind": "...", ...}, "hamiltonian": bool}
// Cost values are exact rational strings ("3/2").
// ---------------------------------------------------------------------------

impl Serialize for Instance {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        let cost_model = match &self.cost_model {
            CostModel::BipartiteUnit => json!({"kind": "bipartite_unit"}),
            CostModel::Bichromatic { alpha, beta } => json!({
                "kind": "bichromatic",
                "alpha": format_cost(alpha),
                "beta": format_cost(beta),
            }),
            CostModel::FourLevel { f, classes } => {
                let rows: Vec<String> = (0..self.n)
                    .map(|u| {
                        (0..self.n)
                            .map(|v| {
                                if u == v {
                                    '-'
                                } else {
                                    classes.get(u as ElementId, v as ElementId).as_char()
                                }
                            })
                            .collect()
                    })
                    .collect();
                json!({"kind": "four_level", "f": format_cost(f), "classes": rows})
            }
            CostModel::Explicit { costs } => {
                let rows: Vec<Vec<serde_json::Value>> = costs
                    .iter()
                    .map(|row| {
                        row.iter()
                            .map(|c| match c {
                                Some(c) => json!(format_cost(c)),
                                None => json!("inf"),
                            })
                            .collect()
                    })
                    .collect();
                json!({"kind": "explicit", "costs": rows})
            }
        };
        let v = json!({
            "n": self.n,
            "colors": self.colors_string(),
            "order": self.hidden_order,
            "cost_model": cost_model,
            "hamiltonian": self.hamiltonian_promise,
        });
        v.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Instance {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Instance, D::Error> {
        let v = serde_json::Value::deserialize(de)?;
        instance_from_value(&v).map_err(D::Error::custom)
    }
}

fn instance_from_value(v: &serde_json::Value) -> Result<Instance, String> {
    let n = v["n"].as_u64().ok_or("missing n")? as usize;
    let colors_s = v["colors"].as_str().ok_or("missing colors")?;
    let colors: Vec<Color> = colors_s
        .chars()
        .map(|c| match c {
            'R' => Ok(Color::Red),
            'B' => Ok(Color::Blue),
            other => Err(format!("bad color char {other:?}")),
        })
        .collect::<Result<_, _>>()?;
    let order: Vec<ElementId> = v["order"]
        .as_array()
        .ok_or("missing order")?
        .iter()
        .map(|x| x.as_u64().map(|u| u as ElementId).ok_or("bad order entry"))
        .collect::<Result<_, _>>()?;
    let ham = v["hamiltonian"].as_bool().unwrap_or(false);
    let cm = &v["cost_model"];
    let kind = cm["kind"].as_str().ok_or("missing cost_model.kind")?;
    let cost_model = match kind {
        "bipartite_unit" => CostModel::BipartiteUnit,
        "bichromatic" => CostModel::Bichromatic {
            alpha: parse_cost(cm["alpha"].as_str().ok_or("missing alpha")?)?,
            beta: parse_cost(cm["beta"].as_str().ok_or("missing beta")?)?,
        },
        "four_level" => {
            let f = parse_cost(cm["f"].as_str().ok_or("missing f")?)?;
            let rows = cm["classes"].as_array().ok_or("missing classes")?;
            let mut classes = PairTable::filled(n, FourCost::Inf);
            for (u, row) in rows.iter().enumerate() {
                let row = row.as_str().ok_or("bad class row")?;
                for (w, ch) in row.chars().enumerate() {
                    if u == w {
                        continue;
                    }
                    let fc = FourCost::from_char(ch).ok_or(format!("bad class char {ch:?}"))?;
                    classes.set(u as ElementId, w as ElementId, fc);
                }
            }
            CostModel::FourLevel { f, classes }
        }
        "explicit" => {
            let rows = cm["costs"].as_array().ok_or("missing costs")?;
            let mut costs = vec![vec![None; n]; n];
            for (u, row) in rows.iter().enumerate() {
                let row = row.as_array().ok_or("bad cost row")?;
                for (w, cell) in row.iter().enumerate() {
                    let s = cell.as_str().ok_or("bad cost cell")?;
                    if s != "inf" && u != w {
                        costs[u][w] = Some(parse_cost(s)?);
                    }
                }
            }
            CostModel::Explicit { costs }
        }
        other => return Err(format!("unknown cost model kind {other:?}")),
    };
    Instance::new(order, colors, cost_model, ham).map_err(|e| e.to_string())
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Instance(n={}, colors={}, order_by_rank={:?})",
            self.n,
            self.colors_string(),
            self.hidden_order
        )
    }
}

/// Float view of a cost bound of the form `n^(3/4)`, for quick checks.
pub fn n34_f64(n: usize) -> f64 {
    (n as f64).powf(0.75)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_bipartite() -> Instance {
        // hidden order: 0(R) < 2(B) < 1(R) < 3(B)
        Instance::new(
            vec![0, 2, 1, 3],
            vec![Color::Red, Color::Red, Color::Blue, Color::Blue],
            CostModel::BipartiteUnit,
            false,
        )
        .unwrap()
    }

    #[test]
    fn bipartite_costs() {
        let inst = tiny_bipartite();
        assert_eq!(inst.cost(0, 1), None); // red-red forbidden
        assert_eq!(inst.cost(0, 2), Some(cost_one()));
        assert!(inst.less(0, 2));
        assert!(!inst.less(3, 2));
    }

    #[test]
    fn rejects_non_bijective_order() {
        let err = Instance::new(
            vec![0, 0, 1],
            vec![Color::Red; 3],
            CostModel::BipartiteUnit,
            false,
        );
        assert!(matches!(err, Err(InstanceError::OrderNotBijective(3))));
    }

    #[test]
    fn four_level_f_bound_checked() {
        let n = 16;
        let classes = PairTable::filled(n, FourCost::One);
        let err = Instance::new(
            (0..n as ElementId).collect(),
            vec![Color::Red; n],
            CostModel::FourLevel {
                f: cost_from_u64(7), // 16^(3/4) = 8
                classes,
            },
            false,
        );
        assert!(matches!(err, Err(InstanceError::FTooSmall { .. })));
    }

    #[test]
    fn n_three_quarters_exact_on_powers() {
        assert_eq!(n_to_three_quarters(16), cost_from_u64(8));
        assert_eq!(n_to_three_quarters(256), cost_from_u64(64));
        assert_eq!(n_to_three_quarters(10), cost_from_u64(6)); // 10^0.75 = 5.62..
    }

    #[test]
    fn json_round_trip() {
        let inst = tiny_bipartite();
        let s = serde_json::to_string(&inst).unwrap();
        let back: Instance = serde_json::from_str(&s).unwrap();
        assert_eq!(inst, back);
    }

    #[test]
    fn promise_checked_at_construction() {
        // two reds adjacent in rank under BipartiteUnit cannot promise a Hamiltonian
        let err = Instance::new(
            vec![0, 1, 2, 3],
            vec![Color::Red, Color::Red, Color::Blue, Color::Blue],
            CostModel::BipartiteUnit,
            true,
        );
        assert!(matches!(err, Err(InstanceError::PromiseUnsatisfiable(0, 1))));
    }
}
