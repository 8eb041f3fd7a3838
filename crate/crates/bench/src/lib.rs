//! Shared inputs for the criterion benchmarks.

use spineseg_core::{generate_phantom, Phantom, PhantomSpec};

/// The 256x256, five-body phantom with noise 12 and shading 0.3.
pub fn standard_phantom(seed: u64) -> Phantom {
    generate_phantom(&PhantomSpec {
        seed,
        ..PhantomSpec::default()
    })
    .expect("default phantom spec is valid")
}
