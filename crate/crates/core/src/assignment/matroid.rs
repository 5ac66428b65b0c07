//! Independence, rank, and span oracles of the robot-target assignment
//! matroid.
//!
//! A target subset S is independent when a matching in the availability graph
//! covers S with no robot reused. Because two pair units may share a limited
//! robot, independence is decided by exact backtracking over unit choices
//! rather than plain augmenting paths; instances are small (units and targets
//! both stay in the low tens) so exhaustive search is cheap and correct for
//! arbitrary subgraphs.

use super::AssignmentGraph;

/// True when some robot-disjoint matching covers every target in `targets`.
pub fn is_independent(graph: &AssignmentGraph, targets: &[usize]) -> bool {
    debug_assert!(targets.iter().all(|&t| t < graph.n_targets()));
    let mut used_units = vec![false; graph.units().len()];
    cover_all(graph, targets, 0, &mut used_units)
}

fn cover_all(
    graph: &AssignmentGraph,
    targets: &[usize],
    depth: usize,
    used_units: &mut [bool],
) -> bool {
    let Some(&target) = targets.get(depth) else {
        return true;
    };
    for u in 0..graph.units().len() {
        if used_units[u] || !graph.has_edge(u, target) || conflicts(graph, u, used_units) {
            continue;
        }
        used_units[u] = true;
        if cover_all(graph, targets, depth + 1, used_units) {
            used_units[u] = false;
            return true;
        }
        used_units[u] = false;
    }
    false
}

fn conflicts(graph: &AssignmentGraph, unit: usize, used_units: &[bool]) -> bool {
    let candidate = &graph.units()[unit];
    used_units
        .iter()
        .enumerate()
        .any(|(other, &used)| used && graph.units()[other].conflicts_with(candidate))
}

/// Size of the largest independent subset of `targets`: the most targets a
/// robot-disjoint matching can cover.
pub fn rank(graph: &AssignmentGraph, targets: &[usize]) -> usize {
    debug_assert!(targets.iter().all(|&t| t < graph.n_targets()));
    let mut used_units = vec![false; graph.units().len()];
    best_coverage(graph, targets, 0, &mut used_units)
}

fn best_coverage(
    graph: &AssignmentGraph,
    targets: &[usize],
    depth: usize,
    used_units: &mut [bool],
) -> usize {
    let Some(&target) = targets.get(depth) else {
        return 0;
    };
    // Leave this target uncovered...
    let mut best = best_coverage(graph, targets, depth + 1, used_units);
    // ...or cover it with any compatible unit.
    for u in 0..graph.units().len() {
        if used_units[u] || !graph.has_edge(u, target) || conflicts(graph, u, used_units) {
            continue;
        }
        used_units[u] = true;
        best = best.max(1 + best_coverage(graph, targets, depth + 1, used_units));
        used_units[u] = false;
        if best == targets.len() - depth {
            break;
        }
    }
    best
}

/// Span of `targets`: every target whose addition leaves the rank unchanged.
pub fn span(graph: &AssignmentGraph, targets: &[usize]) -> Vec<usize> {
    let base_rank = rank(graph, targets);
    let mut extended = targets.to_vec();
    (0..graph.n_targets())
        .filter(|&j| {
            if targets.contains(&j) {
                return true;
            }
            extended.push(j);
            let grown = rank(graph, &extended);
            extended.pop();
            grown == base_rank
        })
        .collect()
}
