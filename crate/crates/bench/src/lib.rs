//! Shared fixtures for the benchmark targets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use hetrack::assignment::{enumerate_units, AssignableUnit, QualityTable};

/// Random nonnegative quality table over the full unit set of a team.
pub fn random_table(
    n_sufficient: usize,
    n_limited: usize,
    n_targets: usize,
    seed: u64,
) -> (Vec<AssignableUnit>, QualityTable) {
    let units = enumerate_units(n_sufficient, n_limited);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut table = QualityTable::new();
    for &unit in &units {
        for target in 0..n_targets {
            table.insert(unit, target, rng.random_range(0.0..10.0));
        }
    }
    (units, table)
}
