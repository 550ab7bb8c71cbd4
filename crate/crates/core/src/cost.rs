//! Exact rational costs and the per-session cost ledger.
//!
//! All charged costs are exact rationals so that ledger totals and ratio
//! reports are bit-exact and reproducible across platforms.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;

/// Exact comparison cost. `None`-like infinity is represented at the model
/// level (a forbidden pair has no cost), so this is always finite.
pub type Cost = BigRational;

pub fn cost_from_u64(v: u64) -> Cost {
    BigRational::from_integer(BigInt::from(v))
}

pub fn cost_zero() -> Cost {
    BigRational::zero()
}

pub fn cost_one() -> Cost {
    BigRational::one()
}

/// Parses `"3/2"`, `"7"`, or `"-1/4"` into an exact rational.
pub fn parse_cost(s: &str) -> Result<Cost, String> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = num
        .parse()
        .map_err(|e| format!("bad numerator {num:?}: {e}"))?;
    let d: BigInt = den
        .parse()
        .map_err(|e| format!("bad denominator {den:?}: {e}"))?;
    if d.is_zero() {
        return Err(format!("zero denominator in {s:?}"));
    }
    Ok(BigRational::new(n, d))
}

/// Renders a rational as `"3/2"` or `"7"` (denominator 1 elided).
pub fn format_cost(c: &Cost) -> String {
    if c.denom().is_one() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

pub fn cost_to_f64(c: &Cost) -> f64 {
    c.to_f64().unwrap_or(f64::NAN)
}

/// Probe counts grouped by cost class, with the exact total derived as
/// `sum(class * count)` so the hot probe path only bumps a counter.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CostLedger {
    by_class: Vec<(Cost, u64)>,
}

impl CostLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records one charged probe of the given class.
    pub fn charge(&mut self, class: &Cost) {
        debug_assert!(!class.is_negative());
        for (c, n) in &mut self.by_class {
            if c == class {
                *n += 1;
                return;
            }
        }
        self.by_class.push((class.clone(), 1));
    }

    /// Number of charged probes of one class.
    pub fn count(&self, class: &Cost) -> u64 {
        self.by_class
            .iter()
            .find(|(c, _)| c == class)
            .map(|(_, n)| *n)
            .unwrap_or(0)
    }

    /// Total number of charged probes across all classes.
    pub fn probes(&self) -> u64 {
        self.by_class.iter().map(|(_, n)| n).sum()
    }

    /// Exact total cost.
    pub fn total(&self) -> Cost {
        let mut t = cost_zero();
        for (c, n) in &self.by_class {
            t += c * cost_from_u64(*n);
        }
        t
    }

    /// Classes in ascending cost order, for stable reporting.
    pub fn classes(&self) -> Vec<(Cost, u64)> {
        let mut v = self.by_class.clone();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }

    pub fn merge(&mut self, other: &CostLedger) {
        for (c, n) in &other.by_class {
            match self.by_class.iter_mut().find(|(mc, _)| mc == c) {
                Some((_, mn)) => *mn += n,
                None => self.by_class.push((c.clone(), *n)),
            }
        }
    }
}

impl fmt::Display for CostLedger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "total={} [", format_cost(&self.total()))?;
        for (i, (c, n)) in self.classes().iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}x{}", format_cost(c), n)?;
        }
        write!(f, "]")
    }
}
