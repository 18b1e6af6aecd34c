//! Built-in example spaces.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, require_positive, Error, Result};
use crate::sample;
use crate::space::Space;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceKind {
    /// `n` points `0, s, 2s, …` on a line, unit weights.
    UniformGrid1d,
    /// `n × n` square lattice, unit weights.
    UniformGrid2d,
    /// `n × n` lattice with node `(0, 0)` at a corner and weights
    /// `exp(-|x|²)`.
    GaussianPlane,
    /// Two `n × n` unit-weight lattices side by side with a band of missing
    /// columns between them, so that the nearest cross pair is `gap` apart.
    StripRemovedPlane,
    /// `n` seeded uniform points in a square of side `s √n`, weights in
    /// `[0.5, 1.5)`.
    RandomCloud,
}

impl SpaceKind {
    pub const ALL: [SpaceKind; 5] = [
        SpaceKind::UniformGrid1d,
        SpaceKind::UniformGrid2d,
        SpaceKind::GaussianPlane,
        SpaceKind::StripRemovedPlane,
        SpaceKind::RandomCloud,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SpaceKind::UniformGrid1d => "uniform_grid_1d",
            SpaceKind::UniformGrid2d => "uniform_grid_2d",
            SpaceKind::GaussianPlane => "gaussian_plane",
            SpaceKind::StripRemovedPlane => "strip_removed_plane",
            SpaceKind::RandomCloud => "random_cloud",
        }
    }
}

impl fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SpaceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SpaceKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| invalid("kind", format!("unknown space kind `{s}`")))
    }
}

/// Generator parameters. `n` is the point count for 1-D grids and clouds
/// and the side length for the planar lattices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZooParams {
    pub n: usize,
    pub spacing: f64,
    pub gap: f64,
    pub seed: u64,
}

impl Default for ZooParams {
    fn default() -> Self {
        Self {
            n: 16,
            spacing: 1.0,
            gap: 10.0,
            seed: 1,
        }
    }
}

impl ZooParams {
    pub fn new(n: usize, spacing: f64) -> Self {
        Self {
            n,
            spacing,
            ..Self::default()
        }
    }
}

pub fn generate_space(kind: SpaceKind, params: &ZooParams) -> Result<Space> {
    if params.n == 0 {
        return Err(invalid("n", "must be at least 1"));
    }
    require_positive("spacing", params.spacing)?;
    let n = params.n;
    let s = params.spacing;
    let (coords, weights): (Vec<Vec<f64>>, Vec<f64>) = match kind {
        SpaceKind::UniformGrid1d => ((0..n).map(|i| vec![i as f64 * s]).collect(), vec![1.0; n]),
        SpaceKind::UniformGrid2d => {
            let c = lattice(n, s, 0.0);
            let w = vec![1.0; c.len()];
            (c, w)
        }
        SpaceKind::GaussianPlane => {
            let c = lattice(n, s, 0.0);
            let w = c.iter().map(|p| (-(p[0] * p[0] + p[1] * p[1])).exp()).collect();
            (c, w)
        }
        SpaceKind::StripRemovedPlane => {
            require_positive("gap", params.gap)?;
            let mut c = lattice(n, s, 0.0);
            c.extend(lattice(n, s, (n - 1) as f64 * s + params.gap));
            let w = vec![1.0; c.len()];
            (c, w)
        }
        SpaceKind::RandomCloud => {
            let side = s * (n as f64).sqrt();
            let mut rng = sample::rng(params.seed);
            let c: Vec<Vec<f64>> = (0..n)
                .map(|_| vec![rng.gen_range(0.0..side), rng.gen_range(0.0..side)])
                .collect();
            let w = (0..n).map(|_| rng.gen_range(0.5..1.5)).collect();
            (c, w)
        }
    };
    let ids = (0..coords.len()).map(|k| format!("p{k}")).collect();
    let label = match kind {
        SpaceKind::StripRemovedPlane => format!("{kind}(n={n},spacing={s},gap={})", params.gap),
        SpaceKind::RandomCloud => format!("{kind}(n={n},spacing={s},seed={})", params.seed),
        _ => format!("{kind}(n={n},spacing={s})"),
    };
    Ok(Space::from_coordinates(ids, coords, weights)?.with_label(label))
}

/// `side × side` nodes `(x0 + i s, j s)`, row-major in `i`.
fn lattice(side: usize, s: f64, x0: f64) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(side * side);
    for i in 0..side {
        for j in 0..side {
            out.push(vec![x0 + i as f64 * s, j as f64 * s]);
        }
    }
    out
}

/// For the strip-removed plane: the radius halfway between the gap and the
/// next cross distance `√(gap² + s²)`, where unit-aperture balls first reach
/// across the strip.
pub fn strip_straddling_radius(params: &ZooParams) -> f64 {
    let g = params.gap;
    let next = (g * g + params.spacing * params.spacing).sqrt();
    0.5 * (g + next)
}
