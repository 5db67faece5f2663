//! Seeded construction of the companion-form benchmark system.
//!
//! The generated plant has a single companion block: ones on the
//! superdiagonal and a final row of all -1, so the characteristic polynomial
//! is `z^n + z^(n-1) + ... + 1` and the minimal polynomial has full degree n
//! for every n. Actuators and sensors are distinct standard basis columns and
//! rows drawn from a seeded generator, which keeps every experiment
//! reproducible from a single 64-bit seed.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linsys::LtiSystem;
use crate::numerics::{Matrix, Vector};

/// Seed for the bundled n=50, m=5, p=10 companion benchmark system. Under
/// this seed the plant is observable with observability index 15 and
/// excitability index 50, and the fourth actuator column coincides with a
/// monitored sensor row, so a unit pulse on it deviates the output one step
/// after injection.
pub const FIXTURE_SEED: u64 = 23;

/// Builds the companion system: `n` states, `m` distinct basis-column
/// actuators, `p` distinct basis-row sensors, no feedthrough. Actuator
/// columns are drawn before sensor rows, so the same seed always yields the
/// same plant.
pub fn companion_system(n: usize, m: usize, p: usize, seed: u64) -> Result<LtiSystem> {
    if n == 0 {
        return Err(Error::BadDimensions {
            context: "companion_system: n must be positive".into(),
        });
    }
    if m == 0 || m > n {
        return Err(Error::BadDimensions {
            context: format!("companion_system: m = {m} not in 1..={n}"),
        });
    }
    if p == 0 || p > n {
        return Err(Error::BadDimensions {
            context: format!("companion_system: p = {p} not in 1..={n}"),
        });
    }
    let mut a = Matrix::zeros(n, n);
    for i in 0..n - 1 {
        a[(i, i + 1)] = 1.0;
    }
    for j in 0..n {
        a[(n - 1, j)] = -1.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = Matrix::zeros(n, m);
    for (col, row) in sample(&mut rng, n, m).iter().enumerate() {
        b[(row, col)] = 1.0;
    }
    let mut c = Matrix::zeros(p, n);
    for (row, col) in sample(&mut rng, n, p).iter().enumerate() {
        c[(row, col)] = 1.0;
    }
    LtiSystem::new(a, b, c, Matrix::zeros(p, m))
}

/// Deterministic unit-norm state vector.
pub fn random_unit_state(n: usize, seed: u64) -> Result<Vector> {
    if n == 0 {
        return Err(Error::BadDimensions {
            context: "random_unit_state: n must be positive".into(),
        });
    }
    // Salted so that passing the same seed to the system generator and the
    // state generator does not correlate the draws.
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5157_9d4a_92ab_3c1e);
    loop {
        let x = Vector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
        let norm = x.norm();
        if norm > 1e-6 {
            return Ok(x / norm);
        }
    }
}
