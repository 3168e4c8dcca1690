//! Benchmark fixtures for the transform and augmentation kernels.

use specaug_core::{synthetic::texture, Image};

/// Square benchmark image of side `n`.
pub fn fixture(n: usize) -> Image {
    texture(n, n, 0xbe_u64)
}
