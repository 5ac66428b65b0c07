//! Greedy and brute-force optimal assignment, plus the approximation-bound
//! check.

use super::{AssignableUnit, Assignment, AssignmentError, BoundMode, QualityTable};

/// Outcome of the greedy pass. `evaluations` counts quality-table lookups so
/// the advertised `O((N1 + N2^2) * M^2)` work bound can be asserted directly.
#[derive(Debug, Clone)]
pub struct GreedyResult {
    pub assignment: Assignment,
    pub total: f64,
    pub evaluations: usize,
    pub rounds: usize,
}

/// Greedy assignment: each round scores every remaining (unit, target) pair,
/// commits the best one, and removes that target and the unit's robots
/// (which invalidates every pair sharing a robot). Stops when targets or
/// compatible units run out or every remaining score is `NEG_INFINITY`.
/// Ties break toward the lowest unit in enumeration order, then the lowest
/// target index.
pub fn greedy_assign(
    units: &[AssignableUnit],
    n_targets: usize,
    quality: &QualityTable,
) -> GreedyResult {
    let n_robots = units
        .iter()
        .flat_map(|u| u.robots())
        .max()
        .map_or(0, |m| m + 1);
    let mut robot_used = vec![false; n_robots];
    let mut target_done = vec![false; n_targets];
    let mut result = GreedyResult {
        assignment: Assignment::new(),
        total: 0.0,
        evaluations: 0,
        rounds: 0,
    };

    loop {
        let mut best: Option<(f64, AssignableUnit, usize)> = None;
        for &unit in units {
            if unit.robots().any(|r| robot_used[r]) {
                continue;
            }
            for (target, &done) in target_done.iter().enumerate() {
                if done {
                    continue;
                }
                result.evaluations += 1;
                let q = quality.get(unit, target);
                if q == f64::NEG_INFINITY {
                    continue;
                }
                // Strict improvement keeps the first (lowest unit, lowest
                // target) maximizer on ties.
                if best.is_none_or(|(bq, _, _)| q > bq) {
                    best = Some((q, unit, target));
                }
            }
        }
        let Some((q, unit, target)) = best else {
            break;
        };
        result.total += q;
        result.assignment.assign(target, unit);
        for robot in unit.robots() {
            robot_used[robot] = true;
        }
        target_done[target] = true;
        result.rounds += 1;

        debug_assert!(
            {
                let mut robots: Vec<usize> = result.assignment.assigned_robots().collect();
                robots.sort_unstable();
                robots.windows(2).all(|w| w[0] != w[1])
            },
            "greedy assigned a robot twice"
        );
        if target_done.iter().all(|&d| d) {
            break;
        }
    }
    result
}

/// Brute-force optimum within guard limits.
#[derive(Debug, Clone)]
pub struct OptimalResult {
    pub assignment: Assignment,
    pub total: f64,
}

const MAX_OPTIMAL_TARGETS: usize = 6;
const MAX_OPTIMAL_UNITS: usize = 12;

/// Exhaustive search over all robot-disjoint partial assignments, treating
/// `NEG_INFINITY` entries as unassignable. Guarded to at most 6 targets and
/// 12 units. Ties keep the first maximizer in enumeration order.
pub fn optimal_assign(
    units: &[AssignableUnit],
    n_targets: usize,
    quality: &QualityTable,
) -> Result<OptimalResult, AssignmentError> {
    if n_targets > MAX_OPTIMAL_TARGETS || units.len() > MAX_OPTIMAL_UNITS {
        return Err(AssignmentError::InstanceTooLarge {
            n_targets,
            n_units: units.len(),
        });
    }
    let mut best = OptimalResult {
        assignment: Assignment::new(),
        total: 0.0,
    };
    let mut used = vec![false; units.len()];
    let mut chosen: Vec<(usize, AssignableUnit)> = Vec::new();
    search(
        units,
        n_targets,
        quality,
        0,
        0.0,
        &mut used,
        &mut chosen,
        &mut best,
    );
    Ok(best)
}

#[allow(clippy::too_many_arguments)]
fn search(
    units: &[AssignableUnit],
    n_targets: usize,
    quality: &QualityTable,
    target: usize,
    total: f64,
    used: &mut Vec<bool>,
    chosen: &mut Vec<(usize, AssignableUnit)>,
    best: &mut OptimalResult,
) {
    if target == n_targets {
        if total > best.total {
            let mut assignment = Assignment::new();
            for &(t, u) in chosen.iter() {
                assignment.assign(t, u);
            }
            *best = OptimalResult { assignment, total };
        }
        return;
    }
    // Leave this target unassigned...
    search(
        units,
        n_targets,
        quality,
        target + 1,
        total,
        used,
        chosen,
        best,
    );
    // ...or assign any compatible unit with a finite score.
    for (idx, &unit) in units.iter().enumerate() {
        if used[idx] {
            continue;
        }
        if chosen.iter().any(|&(_, u)| u.conflicts_with(&unit)) {
            continue;
        }
        let q = quality.get(unit, target);
        if q == f64::NEG_INFINITY {
            continue;
        }
        used[idx] = true;
        chosen.push((target, unit));
        search(
            units,
            n_targets,
            quality,
            target + 1,
            total + q,
            used,
            chosen,
            best,
        );
        chosen.pop();
        used[idx] = false;
    }
}

/// Checks the greedy total against the optimal total: `greedy >= optimal / 3`
/// for arbitrary tables, `greedy >= optimal / 2` for nondecreasing submodular
/// tables, with a relative tolerance of `1e-9 * |optimal|`.
pub fn verify_bound(greedy_total: f64, optimal_total: f64, mode: BoundMode) -> bool {
    debug_assert!(greedy_total.is_finite() && optimal_total.is_finite());
    let factor = match mode {
        BoundMode::Arbitrary => 1.0 / 3.0,
        BoundMode::Submodular => 0.5,
    };
    let tolerance = 1e-9 * optimal_total.abs();
    greedy_total >= factor * optimal_total - tolerance
}

#[cfg(test)]
mod tests {
    use super::super::enumerate_units;
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn table(entries: &[(AssignableUnit, usize, f64)]) -> QualityTable {
        let mut t = QualityTable::new();
        for &(u, j, q) in entries {
            t.insert(u, j, q);
        }
        t
    }

    #[test]
    fn single_pick() {
        let units = vec![AssignableUnit::Solo(0)];
        let t = table(&[(AssignableUnit::Solo(0), 0, 5.0)]);
        let g = greedy_assign(&units, 1, &t);
        assert_relative_eq!(g.total, 5.0);
        assert_eq!(g.assignment.unit_for(0), Some(AssignableUnit::Solo(0)));
        assert_eq!(g.rounds, 1);
    }

    #[test]
    fn greedy_matches_optimum_on_disjoint_units() {
        let u1 = AssignableUnit::Solo(0);
        let u2 = AssignableUnit::Solo(1);
        let units = vec![u1, u2];
        let t = table(&[(u1, 0, 3.0), (u1, 1, 2.0), (u2, 0, 2.9), (u2, 1, 2.9)]);
        let g = greedy_assign(&units, 2, &t);
        assert_relative_eq!(g.total, 5.9);
        assert_eq!(g.assignment.unit_for(0), Some(u1));
        assert_eq!(g.assignment.unit_for(1), Some(u2));
        let o = optimal_assign(&units, 2, &t).unwrap();
        assert_relative_eq!(o.total, 5.9);
        assert!(verify_bound(g.total, o.total, BoundMode::Arbitrary));
        assert!(verify_bound(g.total, o.total, BoundMode::Submodular));
    }

    #[test]
    fn solo_and_pair_probe() {
        // One solo plus one pair over two targets; greedy's first pick is
        // the global maximum and the rest follows.
        let eps = 0.01;
        let solo = AssignableUnit::Solo(0);
        let pair = AssignableUnit::pair(1, 2);
        let units = vec![solo, pair];
        let t = table(&[
            (solo, 0, 1.0),
            (pair, 0, 1.0 - eps),
            (solo, 1, 0.0),
            (pair, 1, 1.0 - eps),
        ]);
        let g = greedy_assign(&units, 2, &t);
        assert_relative_eq!(g.total, 2.0 - eps);
        let o = optimal_assign(&units, 2, &t).unwrap();
        assert_relative_eq!(o.total, 2.0 - eps);
        assert!(verify_bound(g.total, o.total, BoundMode::Submodular));
    }

    #[test]
    fn pair_conflicts_make_the_arbitrary_bound_tight() {
        // Greedy's single pick of p1-3 burns robots 1 and 3, killing p1-2 and
        // p3-4; the optimum instead collects three values just below it.
        let eps = 1e-3;
        let solo = AssignableUnit::Solo(0);
        let p12 = AssignableUnit::pair(1, 2);
        let p34 = AssignableUnit::pair(3, 4);
        let p13 = AssignableUnit::pair(1, 3);
        let units = vec![solo, p12, p34, p13];
        let t = table(&[
            (p13, 0, 1.0),
            (solo, 0, 1.0 - eps),
            (p12, 1, 1.0 - eps),
            (p34, 2, 1.0 - eps),
            (solo, 1, 0.0),
            (solo, 2, 0.0),
        ]);
        let g = greedy_assign(&units, 3, &t);
        assert_relative_eq!(g.total, 1.0);
        let o = optimal_assign(&units, 3, &t).unwrap();
        assert_relative_eq!(o.total, 3.0 * (1.0 - eps));
        assert!(verify_bound(g.total, o.total, BoundMode::Arbitrary));
        assert!(!verify_bound(g.total, o.total, BoundMode::Submodular));
    }

    #[test]
    fn greedy_skips_sentinels_and_stops() {
        let solo = AssignableUnit::Solo(0);
        let units = vec![solo];
        let t = table(&[(solo, 0, f64::NEG_INFINITY), (solo, 1, f64::NEG_INFINITY)]);
        let g = greedy_assign(&units, 2, &t);
        assert!(g.assignment.is_empty());
        assert_relative_eq!(g.total, 0.0);
    }

    #[test]
    fn greedy_assigns_negative_but_finite_scores() {
        let solo = AssignableUnit::Solo(0);
        let g = greedy_assign(&[solo], 1, &table(&[(solo, 0, -4.0)]));
        assert_relative_eq!(g.total, -4.0);
        assert_eq!(g.assignment.len(), 1);
    }

    #[test]
    fn optimal_may_leave_negative_targets_unassigned() {
        let solo = AssignableUnit::Solo(0);
        let o = optimal_assign(&[solo], 1, &table(&[(solo, 0, -4.0)])).unwrap();
        assert!(o.assignment.is_empty());
        assert_relative_eq!(o.total, 0.0);
    }

    #[test]
    fn optimal_single_target_is_the_max_entry() {
        let units = enumerate_units(2, 3);
        let mut t = QualityTable::new();
        for (i, &u) in units.iter().enumerate() {
            t.insert(u, 0, i as f64);
        }
        let o = optimal_assign(&units, 1, &t).unwrap();
        assert_relative_eq!(o.total, (units.len() - 1) as f64);
    }

    #[test]
    fn optimal_guards_instance_size() {
        let units = enumerate_units(2, 5); // 2 + 10 = 12 units: allowed
        assert!(optimal_assign(&units, 6, &QualityTable::new()).is_ok());
        let too_many_units = enumerate_units(3, 5); // 13 units
        assert!(matches!(
            optimal_assign(&too_many_units, 2, &QualityTable::new()),
            Err(AssignmentError::InstanceTooLarge { .. })
        ));
        assert!(matches!(
            optimal_assign(&units, 7, &QualityTable::new()),
            Err(AssignmentError::InstanceTooLarge { .. })
        ));
    }

    #[test]
    fn table_one_sized_instance_is_fast() {
        let units = enumerate_units(2, 3);
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let mut t = QualityTable::new();
        for &u in &units {
            for j in 0..2 {
                t.insert(u, j, rng.random_range(0.0..10.0));
            }
        }
        let start = std::time::Instant::now();
        let o = optimal_assign(&units, 2, &t).unwrap();
        assert!(start.elapsed().as_secs_f64() < 1.0);
        assert!(o.total > 0.0);
    }

    #[test]
    fn verify_bound_examples() {
        assert!(verify_bound(5.9, 5.9, BoundMode::Arbitrary));
        assert!(verify_bound(5.9, 5.9, BoundMode::Submodular));
        assert!(verify_bound(0.4, 1.0, BoundMode::Arbitrary));
        assert!(!verify_bound(0.4, 1.0, BoundMode::Submodular));
        assert!(verify_bound(0.0, 0.0, BoundMode::Arbitrary));
        assert!(verify_bound(0.0, 0.0, BoundMode::Submodular));
    }

    #[test]
    fn evaluation_count_respects_complexity_bound() {
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        for (n1, n2, m) in [(2, 3, 3), (0, 4, 2), (3, 0, 3), (4, 6, 5)] {
            let units = enumerate_units(n1, n2);
            let mut t = QualityTable::new();
            for &u in &units {
                for j in 0..m {
                    t.insert(u, j, rng.random_range(0.0..1.0));
                }
            }
            let g = greedy_assign(&units, m, &t);
            assert!(
                g.evaluations <= units.len() * m * m,
                "({n1},{n2},{m}): {} evals > {}",
                g.evaluations,
                units.len() * m * m
            );
        }
    }

    proptest! {
        #[test]
        fn optimal_dominates_greedy_and_stays_disjoint(
            seed in 0u64..500,
            n1 in 0usize..3,
            n2 in 0usize..5,
            m in 1usize..4,
        ) {
            let units = enumerate_units(n1, n2);
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let mut t = QualityTable::new();
            for &u in &units {
                for j in 0..m {
                    t.insert(u, j, rng.random_range(0.0..10.0));
                }
            }
            let g = greedy_assign(&units, m, &t);
            let o = optimal_assign(&units, m, &t).unwrap();
            prop_assert!(o.total >= g.total - 1e-12);

            for result in [&g.assignment, &o.assignment] {
                let mut robots: Vec<usize> = result.assigned_robots().collect();
                robots.sort_unstable();
                prop_assert!(robots.windows(2).all(|w| w[0] != w[1]));
            }
        }
    }
}
