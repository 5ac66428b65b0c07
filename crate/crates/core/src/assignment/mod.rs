//! Robot-to-target assignment over a transversal matroid.
//!
//! The atoms of the assignment problem are [`AssignableUnit`]s: a solo
//! sufficient robot, or an unordered pair of distinct limited robots. A
//! subset of targets is independent when a matching assigns every target in
//! it a unit with no robot reused; those subsets form the independent sets of
//! a matroid over the targets ([`matroid`]). Assignments are scored through a
//! [`QualityTable`] and computed either greedily or by brute force
//! ([`solve`]), with [`verify_bound`] checking the 1/3 (arbitrary tables) and
//! 1/2 (nondecreasing submodular tables) approximation guarantees.

mod matroid;
mod solve;

pub use matroid::{is_independent, rank, span};
pub use solve::{greedy_assign, optimal_assign, verify_bound, GreedyResult, OptimalResult};

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AssignmentError {
    #[error("instance too large for exhaustive search: {n_targets} targets, {n_units} units")]
    InstanceTooLarge { n_targets: usize, n_units: usize },
    #[error("quality table line {line}: {message}")]
    TableParse { line: usize, message: String },
    #[error("quality table i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// Bound flavor checked by [`verify_bound`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundMode {
    /// Arbitrary tracking-quality tables: greedy >= optimal / 3.
    Arbitrary,
    /// Nondecreasing submodular tables: greedy >= optimal / 2.
    Submodular,
}

/// One assignable unit: a solo sufficient robot or an unordered pair of
/// limited robots. Robot indices are global world indices (sufficient robots
/// first, then limited robots). Pair indices are stored in ascending order,
/// so the derived ordering is the canonical enumeration order: solos
/// ascending, then pairs lexicographic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AssignableUnit {
    Solo(usize),
    Pair(usize, usize),
}

impl AssignableUnit {
    /// Canonical pair constructor; indices must be distinct.
    pub fn pair(a: usize, b: usize) -> Self {
        assert_ne!(a, b, "pair robots must be distinct");
        AssignableUnit::Pair(a.min(b), a.max(b))
    }

    /// Global robot indices consumed by this unit.
    pub fn robots(&self) -> impl Iterator<Item = usize> + '_ {
        let (first, second) = match *self {
            AssignableUnit::Solo(i) => (i, None),
            AssignableUnit::Pair(a, b) => (a, Some(b)),
        };
        std::iter::once(first).chain(second)
    }

    /// True when the two units share a robot.
    pub fn conflicts_with(&self, other: &AssignableUnit) -> bool {
        self.robots().any(|r| other.robots().any(|s| s == r))
    }
}

impl fmt::Display for AssignableUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AssignableUnit::Solo(i) => write!(f, "s{i}"),
            AssignableUnit::Pair(a, b) => write!(f, "p{a}-{b}"),
        }
    }
}

impl FromStr for AssignableUnit {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(idx) = s.strip_prefix('s') {
            let i = idx.parse().map_err(|_| format!("bad solo unit id `{s}`"))?;
            return Ok(AssignableUnit::Solo(i));
        }
        if let Some(rest) = s.strip_prefix('p') {
            let (a, b) = rest
                .split_once('-')
                .ok_or_else(|| format!("bad pair unit id `{s}`"))?;
            let a: usize = a.parse().map_err(|_| format!("bad pair unit id `{s}`"))?;
            let b: usize = b.parse().map_err(|_| format!("bad pair unit id `{s}`"))?;
            if a == b {
                return Err(format!("pair unit `{s}` repeats a robot"));
            }
            return Ok(AssignableUnit::pair(a, b));
        }
        Err(format!("bad unit id `{s}`"))
    }
}

/// All assignable units of a team: `n_sufficient` solos (global indices
/// `0..n_sufficient`) followed by every pair of limited robots (global
/// indices `n_sufficient..n_sufficient + n_limited`), pairs in lexicographic
/// order.
pub fn enumerate_units(n_sufficient: usize, n_limited: usize) -> Vec<AssignableUnit> {
    let mut units: Vec<AssignableUnit> = (0..n_sufficient).map(AssignableUnit::Solo).collect();
    for a in n_sufficient..n_sufficient + n_limited {
        for b in a + 1..n_sufficient + n_limited {
            units.push(AssignableUnit::Pair(a, b));
        }
    }
    units
}

/// Bipartite availability graph between units and targets. The default
/// construction is complete: any unit may track any target.
#[derive(Debug, Clone)]
pub struct AssignmentGraph {
    units: Vec<AssignableUnit>,
    n_targets: usize,
    /// `edges[u][t]` is true when unit `u` may track target `t`.
    edges: Vec<Vec<bool>>,
}

impl AssignmentGraph {
    pub fn complete(units: Vec<AssignableUnit>, n_targets: usize) -> Self {
        let edges = vec![vec![true; n_targets]; units.len()];
        Self {
            units,
            n_targets,
            edges,
        }
    }

    pub fn with_edges(units: Vec<AssignableUnit>, n_targets: usize, edges: Vec<Vec<bool>>) -> Self {
        assert_eq!(edges.len(), units.len());
        assert!(edges.iter().all(|row| row.len() == n_targets));
        Self {
            units,
            n_targets,
            edges,
        }
    }

    pub fn units(&self) -> &[AssignableUnit] {
        &self.units
    }

    pub fn n_targets(&self) -> usize {
        self.n_targets
    }

    pub fn has_edge(&self, unit: usize, target: usize) -> bool {
        self.edges[unit][target]
    }
}

/// A partial matching of targets to units. Each target appears at most once
/// and no robot appears in two assigned units; both invariants are enforced
/// on insertion.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assignment {
    by_target: BTreeMap<usize, AssignableUnit>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    /// Assigns `unit` to `target`; panics if the target is taken or the unit
    /// conflicts with an already-assigned one.
    pub fn assign(&mut self, target: usize, unit: AssignableUnit) {
        assert!(
            !self.by_target.contains_key(&target),
            "target {target} already assigned"
        );
        assert!(
            !self.by_target.values().any(|u| u.conflicts_with(&unit)),
            "unit {unit} reuses an assigned robot"
        );
        self.by_target.insert(target, unit);
    }

    pub fn unit_for(&self, target: usize) -> Option<AssignableUnit> {
        self.by_target.get(&target).copied()
    }

    pub fn len(&self) -> usize {
        self.by_target.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_target.is_empty()
    }

    /// Assigned (target, unit) pairs in ascending target order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, AssignableUnit)> + '_ {
        self.by_target.iter().map(|(&t, &u)| (t, u))
    }

    pub fn assigned_robots(&self) -> impl Iterator<Item = usize> + '_ {
        self.by_target.values().flat_map(|u| u.robots())
    }
}

/// Tracking quality per (unit, target). Entries are finite or
/// `NEG_INFINITY` (unassignable); missing entries read as `NEG_INFINITY`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct QualityTable {
    values: BTreeMap<(AssignableUnit, usize), f64>,
}

impl QualityTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, unit: AssignableUnit, target: usize, quality: f64) {
        debug_assert!(!quality.is_nan(), "quality must not be NaN");
        debug_assert!(
            quality.is_finite() || quality == f64::NEG_INFINITY,
            "quality must be finite or NEG_INFINITY"
        );
        self.values.insert((unit, target), quality);
    }

    pub fn get(&self, unit: AssignableUnit, target: usize) -> f64 {
        self.values
            .get(&(unit, target))
            .copied()
            .unwrap_or(f64::NEG_INFINITY)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (AssignableUnit, usize, f64)> + '_ {
        self.values.iter().map(|(&(u, t), &q)| (u, t, q))
    }

    /// Smallest finite entry, if any.
    pub fn min_finite(&self) -> Option<f64> {
        self.values
            .values()
            .copied()
            .filter(|q| q.is_finite())
            .fold(None, |acc, q| Some(acc.map_or(q, |m: f64| m.min(q))))
    }

    /// Table with the minimum finite entry subtracted, making every finite
    /// entry nonnegative. Sentinels stay `NEG_INFINITY`. The shift is uniform,
    /// so per-round argmax decisions are unchanged.
    pub fn shifted_nonnegative(&self) -> QualityTable {
        let min = self.min_finite().unwrap_or(0.0);
        let values = self
            .values
            .iter()
            .map(|(&key, &q)| (key, if q.is_finite() { q - min } else { q }))
            .collect();
        QualityTable { values }
    }

    /// Writes the table as `unit_id,target_id,q` CSV. Values use Rust's
    /// shortest round-trip float formatting; sentinels appear as `-inf`.
    pub fn to_csv(&self, mut writer: impl Write) -> Result<(), AssignmentError> {
        writeln!(writer, "unit_id,target_id,q")?;
        for ((unit, target), q) in &self.values {
            writeln!(writer, "{unit},{target},{q}")?;
        }
        Ok(())
    }

    /// Parses the CSV format written by [`QualityTable::to_csv`].
    pub fn from_csv(reader: impl BufRead) -> Result<Self, AssignmentError> {
        let mut table = QualityTable::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let n = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || (n == 1 && trimmed == "unit_id,target_id,q") {
                continue;
            }
            let mut fields = trimmed.split(',');
            let mut next = |what: &str| {
                fields.next().ok_or_else(|| AssignmentError::TableParse {
                    line: n,
                    message: format!("missing {what}"),
                })
            };
            let unit: AssignableUnit =
                next("unit_id")?
                    .trim()
                    .parse()
                    .map_err(|e| AssignmentError::TableParse {
                        line: n,
                        message: e,
                    })?;
            let target: usize =
                next("target_id")?
                    .trim()
                    .parse()
                    .map_err(|_| AssignmentError::TableParse {
                        line: n,
                        message: "bad target_id".into(),
                    })?;
            let q: f64 = next("q")?
                .trim()
                .parse()
                .map_err(|_| AssignmentError::TableParse {
                    line: n,
                    message: "bad quality value".into(),
                })?;
            if fields.next().is_some() {
                return Err(AssignmentError::TableParse {
                    line: n,
                    message: "too many fields".into(),
                });
            }
            table.insert(unit, target, q);
        }
        Ok(table)
    }
}
