//! Deterministic rational sample points for generic-position checks.

use crate::scalar::Scalar;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A rational point of the base manifold, one coordinate per variable.
pub type ProbePoint = Vec<Scalar>;

/// Default number of probe points used by rank and involutivity checks.
pub const DEFAULT_PROBES: usize = 12;

/// Seeded stream of probe points with small-height coordinates
/// (numerators in −9..=9, denominators in 1..=3). The same `(seed, dim,
/// count)` always yields the same points. The first probe is the origin:
/// polynomial coefficients degenerate there more often than at a random
/// rational point, so rank-drop detection should always sample it.
pub fn probe_points(dim: usize, count: usize, seed: u64) -> Vec<ProbePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|k| {
            (0..dim)
                .map(|_| {
                    let p = Scalar::from_ratio(rng.gen_range(-9..=9), rng.gen_range(1..=3));
                    if k == 0 {
                        Scalar::zero()
                    } else {
                        p
                    }
                })
                .collect()
        })
        .collect()
}
