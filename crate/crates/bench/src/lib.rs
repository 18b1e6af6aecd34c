//! Fixtures shared by the kernel benchmarks.

use tentspace::halfspace::{HalfSpaceFunction, TimeGrid};
use tentspace::sample;
use tentspace::zoo::{self, SpaceKind, ZooParams};
use tentspace::Space;

/// `side × side` unit lattice with its default grid for aperture 1, and a
/// seeded function on it.
pub fn lattice_fixture(side: usize) -> (Space, TimeGrid, HalfSpaceFunction) {
    let space = zoo::generate_space(SpaceKind::UniformGrid2d, &ZooParams::new(side, 1.0)).expect("valid lattice");
    let grid = TimeGrid::default_for(&space, 1.0, 1.0).expect("grid");
    let mut rng = sample::rng(1);
    let f = sample::uniform_function(&mut rng, grid.slabs(), space.len(), -1.0, 1.0);
    (space, grid, f)
}

/// Seeded random cloud of `n` points.
pub fn cloud(n: usize) -> Space {
    zoo::generate_space(
        SpaceKind::RandomCloud,
        &ZooParams {
            n,
            ..ZooParams::default()
        },
    )
    .expect("valid cloud")
}
