//! Discrete quasi-probability tables over joint Stokes-component values.
//!
//! Stripping the Gaussian envelopes from a decomposition of the outcome
//! density leaves a finite table of signed weights indexed by the Gaussian
//! centers: the first-component value in {−1, 0, +1} and the
//! second-component sign in {−1, +1} per photon. The table sums to one, can
//! carry negative entries, and its single-photon marginals are ordinary
//! non-negative probabilities.

use crate::error::{Error, Result};

/// Canonical iteration order of the first-component center.
pub const S1_VALUES: [i8; 3] = [-1, 0, 1];
/// Canonical iteration order of the second-component sign.
pub const S2_VALUES: [i8; 2] = [-1, 1];

/// One signed table entry. Photon-b fields are `None` for single-photon
/// tables and always present for pair tables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableEntry {
    pub s1a: i8,
    pub s2a: i8,
    pub s1b: Option<i8>,
    pub s2b: Option<i8>,
    pub probability: f64,
}

/// A finite signed table in canonical row-major order: photon-a first
/// component outermost, then photon-a second component, then (for pairs)
/// photon-b first component, then photon-b second component.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiProbabilityTable {
    entries: Vec<TableEntry>,
    pair: bool,
}

impl QuasiProbabilityTable {
    /// Builds a 6-entry single-photon table from a weight function over
    /// (first-component value, second-component sign).
    pub fn single(weight: impl Fn(i8, i8) -> f64) -> Result<Self> {
        let mut entries = Vec::with_capacity(6);
        for &s1 in &S1_VALUES {
            for &s2 in &S2_VALUES {
                let probability = weight(s1, s2);
                if !probability.is_finite() {
                    return Err(Error::NonFinite { context: "table weight" });
                }
                entries.push(TableEntry { s1a: s1, s2a: s2, s1b: None, s2b: None, probability });
            }
        }
        Ok(Self { entries, pair: false })
    }

    /// Builds a 36-entry pair table from a weight function over
    /// (s1a, s2a, s1b, s2b).
    pub fn pair(weight: impl Fn(i8, i8, i8, i8) -> f64) -> Result<Self> {
        let mut entries = Vec::with_capacity(36);
        for &s1a in &S1_VALUES {
            for &s2a in &S2_VALUES {
                for &s1b in &S1_VALUES {
                    for &s2b in &S2_VALUES {
                        let probability = weight(s1a, s2a, s1b, s2b);
                        if !probability.is_finite() {
                            return Err(Error::NonFinite { context: "table weight" });
                        }
                        entries.push(TableEntry {
                            s1a,
                            s2a,
                            s1b: Some(s1b),
                            s2b: Some(s2b),
                            probability,
                        });
                    }
                }
            }
        }
        Ok(Self { entries, pair: true })
    }

    pub fn is_pair(&self) -> bool {
        self.pair
    }

    /// Entries in canonical order.
    pub fn entries(&self) -> &[TableEntry] {
        &self.entries
    }

    pub fn sum(&self) -> f64 {
        self.entries.iter().map(|e| e.probability).sum()
    }

    /// Most negative entry (0 if all entries are non-negative).
    pub fn most_negative(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.probability)
            .fold(0.0f64, f64::min)
    }

    /// Looks up a single-photon entry.
    pub fn get_single(&self, s1: i8, s2: i8) -> Option<f64> {
        if self.pair {
            return None;
        }
        self.entries
            .iter()
            .find(|e| e.s1a == s1 && e.s2a == s2)
            .map(|e| e.probability)
    }

    /// Looks up a pair entry.
    pub fn get_pair(&self, s1a: i8, s2a: i8, s1b: i8, s2b: i8) -> Option<f64> {
        if !self.pair {
            return None;
        }
        self.entries
            .iter()
            .find(|e| e.s1a == s1a && e.s2a == s2a && e.s1b == Some(s1b) && e.s2b == Some(s2b))
            .map(|e| e.probability)
    }

    /// Photon-a marginal of a pair table (sums over photon-b indices),
    /// returned as a 6-entry single-photon table.
    pub fn marginal_photon_a(&self) -> Result<Self> {
        if !self.pair {
            return Ok(self.clone());
        }
        Self::single(|s1, s2| {
            self.entries
                .iter()
                .filter(|e| e.s1a == s1 && e.s2a == s2)
                .map(|e| e.probability)
                .sum()
        })
    }

    /// Photon-b marginal of a pair table.
    pub fn marginal_photon_b(&self) -> Result<Self> {
        if !self.pair {
            return Ok(self.clone());
        }
        Self::single(|s1, s2| {
            self.entries
                .iter()
                .filter(|e| e.s1b == Some(s1) && e.s2b == Some(s2))
                .map(|e| e.probability)
                .sum()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_table_order_is_row_major() {
        let t = QuasiProbabilityTable::single(|s1, s2| (s1 as f64) * 10.0 + s2 as f64).unwrap();
        let order: Vec<(i8, i8)> = t.entries().iter().map(|e| (e.s1a, e.s2a)).collect();
        assert_eq!(order, vec![(-1, -1), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 1)]);
    }

    #[test]
    fn pair_table_order_and_lookup() {
        let t = QuasiProbabilityTable::pair(|a, b, c, d| {
            (a as f64) * 1000.0 + (b as f64) * 100.0 + (c as f64) * 10.0 + d as f64
        })
        .unwrap();
        assert_eq!(t.entries().len(), 36);
        assert_eq!(t.entries()[0].s1a, -1);
        assert_eq!(t.entries()[0].s2a, -1);
        assert_eq!(t.entries()[0].s1b, Some(-1));
        assert_eq!(t.entries()[0].s2b, Some(-1));
        // Last entry is all +1.
        let last = t.entries()[35];
        assert_eq!((last.s1a, last.s2a, last.s1b, last.s2b), (1, 1, Some(1), Some(1)));
        assert_eq!(t.get_pair(1, -1, 0, 1).unwrap(), 1000.0 - 100.0 + 0.0 + 1.0);
        assert!(t.get_single(1, -1).is_none());
    }

    #[test]
    fn marginals_sum_pairs_correctly() {
        let t = QuasiProbabilityTable::pair(|_, _, _, _| 1.0 / 36.0).unwrap();
        let ma = t.marginal_photon_a().unwrap();
        for e in ma.entries() {
            assert!((e.probability - 1.0 / 6.0).abs() < 1e-15);
        }
        assert!((t.sum() - 1.0).abs() < 1e-15);
        assert!((ma.sum() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn negative_entries_are_tracked() {
        let t = QuasiProbabilityTable::single(|s1, s2| if s1 == 0 { -0.1 * s2 as f64 } else { 0.3 })
            .unwrap();
        assert!((t.most_negative() + 0.1).abs() < 1e-15);
    }

    #[test]
    fn non_finite_weight_is_rejected() {
        assert!(QuasiProbabilityTable::single(|_, _| f64::NAN).is_err());
    }
}
