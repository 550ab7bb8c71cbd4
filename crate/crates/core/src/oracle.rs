//! The cost-charging comparison oracle.
//!
//! An [`OracleSession`] is the only channel from an algorithm to the hidden
//! order. Every allowed probe reveals the true direction of a pair and
//! charges its model cost to the ledger; forbidden probes are rejected
//! without charging.

use crate::cost::{Cost, CostLedger};
use crate::instance::{ElementId, Instance};
use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// First argument precedes the second in the hidden order.
    Forward,
    /// Second argument precedes the first.
    Backward,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("pair ({0}, {1}) has infinite cost")]
    InfiniteCost(ElementId, ElementId),
    #[error("cannot probe an element against itself ({0})")]
    SameElement(ElementId),
}

fn pair_key(u: ElementId, v: ElementId) -> u64 {
    let (a, b) = if u < v { (u, v) } else { (v, u) };
    ((a as u64) << 32) | b as u64
}

/// Probe ledger plus memo of revealed directions over one instance.
pub struct OracleSession<'a> {
    instance: &'a Instance,
    ledger: CostLedger,
    /// Revealed directions, keyed by unordered pair; value = lower id precedes.
    probed: HashMap<u64, bool>,
    /// When false, a repeated probe of the same pair is served from the memo
    /// without charging. Default true: every probe call is charged.
    repeat_charging: bool,
    /// Optional record of every charged class, for cost-schedule replay.
    charge_log: Option<Vec<Cost>>,
}

impl<'a> OracleSession<'a> {
    pub fn new(instance: &'a Instance) -> Self {
        OracleSession {
            instance,
            ledger: CostLedger::new(),
            probed: HashMap::new(),
            repeat_charging: true,
            charge_log: None,
        }
    }

    /// Starts recording the class of every charged probe.
    pub fn enable_charge_log(&mut self) {
        self.charge_log = Some(Vec::new());
    }

    pub fn take_charge_log(&mut self) -> Vec<Cost> {
        self.charge_log.take().unwrap_or_default()
    }

    pub fn with_memoized_charging(instance: &'a Instance) -> Self {
        let mut s = Self::new(instance);
        s.repeat_charging = false;
        s
    }

    pub fn set_repeat_charging(&mut self, on: bool) {
        self.repeat_charging = on;
    }

    pub fn instance(&self) -> &'a Instance {
        self.instance
    }

    pub fn ledger(&self) -> &CostLedger {
        &self.ledger
    }

    pub fn total_cost(&self) -> Cost {
        self.ledger.total()
    }

    pub fn probe_count(&self) -> u64 {
        self.ledger.probes()
    }

    /// Compares `u` and `v` through the oracle.
    ///
    /// Returns the direction consistent with the hidden order and charges
    /// `cost(u, v)` unless the pair was already probed and repeat charging is
    /// off. Forbidden pairs are rejected and never charged.
    pub fn probe(&mut self, u: ElementId, v: ElementId) -> Result<Direction, OracleError> {
        if u == v {
            return Err(OracleError::SameElement(u));
        }
        let key = pair_key(u, v);
        let known = self.probed.get(&key).copied();
        let cost = self
            .instance
            .cost(u, v)
            .ok_or(OracleError::InfiniteCost(u, v))?;
        if known.is_none() || self.repeat_charging {
            self.ledger.charge(&cost);
            if let Some(log) = &mut self.charge_log {
                log.push(cost.clone());
            }
        }
        let lower_first = match known {
            Some(d) => d,
            None => {
                let d = self.instance.less(u.min(v), u.max(v));
                self.probed.insert(key, d);
                d
            }
        };
        let forward = if u < v { lower_first } else { !lower_first };
        Ok(if forward {
            Direction::Forward
        } else {
            Direction::Backward
        })
    }

    /// Probe that answers "does u precede v".
    pub fn less(&mut self, u: ElementId, v: ElementId) -> Result<bool, OracleError> {
        Ok(self.probe(u, v)? == Direction::Forward)
    }

    pub fn is_probed(&self, u: ElementId, v: ElementId) -> bool {
        self.probed.contains_key(&pair_key(u, v))
    }

    /// Direction already revealed for {u, v}, if any: true iff u precedes v.
    pub fn known_less(&self, u: ElementId, v: ElementId) -> Option<bool> {
        self.probed
            .get(&pair_key(u, v))
            .map(|&lower_first| if u < v { lower_first } else { !lower_first })
    }

    /// All revealed directed edges (u precedes v), in index order.
    pub fn revealed_edges(&self) -> Vec<(ElementId, ElementId)> {
        let mut edges: Vec<(ElementId, ElementId)> = self
            .probed
            .iter()
            .map(|(&key, &lower_first)| {
                let a = (key >> 32) as ElementId;
                let b = (key & 0xffff_ffff) as ElementId;
                if lower_first {
                    (a, b)
                } else {
                    (b, a)
                }
            })
            .collect();
        edges.sort_unstable();
        edges
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::cost_from_u64;
    use crate::instance::{Color, CostModel};

    fn two_elements() -> Instance {
        Instance::new(
            vec![0, 1],
            vec![Color::Red, Color::Blue],
            CostModel::BipartiteUnit,
            true,
        )
        .unwrap()
    }

    #[test]
    fn probe_reveals_hidden_direction_and_charges() {
        let inst = two_elements();
        let mut s = OracleSession::new(&inst);
        assert_eq!(s.probe(0, 1).unwrap(), Direction::Forward);
        assert_eq!(s.probe(1, 0).unwrap(), Direction::Backward);
        assert_eq!(s.total_cost(), cost_from_u64(2));
    }

    #[test]
    fn forbidden_pair_rejected_not_charged() {
        let inst = Instance::new(
            vec![0, 2, 1, 3],
            vec![Color::Red, Color::Red, Color::Blue, Color::Blue],
            CostModel::BipartiteUnit,
            false,
        )
        .unwrap();
        let mut s = OracleSession::new(&inst);
        assert_eq!(s.probe(0, 1), Err(OracleError::InfiniteCost(0, 1)));
        assert_eq!(s.probe(2, 2), Err(OracleError::SameElement(2)));
        assert_eq!(s.probe_count(), 0);
    }

    #[test]
    fn memo_mode_serves_repeats_without_charging() {
        let inst = two_elements();
        let mut s = OracleSession::with_memoized_charging(&inst);
        let d1 = s.probe(0, 1).unwrap();
        let d2 = s.probe(0, 1).unwrap();
        assert_eq!(d1, d2);
        assert_eq!(s.total_cost(), cost_from_u64(1));
        // default mode charges again
        let mut s2 = OracleSession::new(&inst);
        s2.probe(0, 1).unwrap();
        s2.probe(0, 1).unwrap();
        assert_eq!(s2.total_cost(), cost_from_u64(2));
    }
}
