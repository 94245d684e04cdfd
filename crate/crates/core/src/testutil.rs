use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::structure::BinaryStructure;
use crate::verify::generators::random_structure;

/// Seeded random structures with at most `nmax` elements over `{E}` or `{E,F}`.
pub(crate) fn structure_strategy(nmax: usize) -> impl Strategy<Value = BinaryStructure> {
    any::<u64>().prop_map(move |seed| random_structure(&mut ChaCha8Rng::seed_from_u64(seed), nmax))
}
