//! Lusin and Carleson functionals, the uncentred maximal operator, tent-space
//! norms and stopping heights.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, require_positive, Error, Result};
use crate::halfspace::{for_each_ball_tent, HalfSpaceFunction, TimeGrid};
use crate::space::Space;

/// Where the volume normalising the Lusin kernel is centred.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelCenter {
    /// `V(x, ·)` at the cone vertex.
    Vertex,
    /// `V(y, ·)` at the integration point.
    #[default]
    IntegrationPoint,
}

/// Radius of the normalising volume: `t` or `α t`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelScale {
    Unit,
    #[default]
    Aperture,
}

/// Choice of normalisation in the Lusin operator. The default `V(y, α t)`
/// is the one for which the averaging identity is exact.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AVariant {
    pub kernel_center: KernelCenter,
    pub kernel_scale: KernelScale,
}

impl AVariant {
    pub const ALL: [AVariant; 4] = [
        AVariant::new(KernelCenter::IntegrationPoint, KernelScale::Aperture),
        AVariant::new(KernelCenter::IntegrationPoint, KernelScale::Unit),
        AVariant::new(KernelCenter::Vertex, KernelScale::Aperture),
        AVariant::new(KernelCenter::Vertex, KernelScale::Unit),
    ];

    pub const fn new(kernel_center: KernelCenter, kernel_scale: KernelScale) -> Self {
        Self {
            kernel_center,
            kernel_scale,
        }
    }
}

impl fmt::Display for AVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self.kernel_center {
            KernelCenter::Vertex => "x",
            KernelCenter::IntegrationPoint => "y",
        };
        let s = match self.kernel_scale {
            KernelScale::Unit => "1",
            KernelScale::Aperture => "alpha",
        };
        write!(f, "{c}-{s}")
    }
}

impl FromStr for AVariant {
    type Err = Error;

    /// Accepts `y-alpha`, `y-1`, `x-alpha`, `x-1`.
    fn from_str(s: &str) -> Result<Self> {
        let (c, sc) = s
            .split_once(['-', ','])
            .ok_or_else(|| invalid("variant", format!("expected <x|y>-<1|alpha>, got `{s}`")))?;
        let center = match c.trim() {
            "x" | "vertex" => KernelCenter::Vertex,
            "y" | "integration_point" => KernelCenter::IntegrationPoint,
            other => return Err(invalid("variant", format!("unknown kernel centre `{other}`"))),
        };
        let scale = match sc.trim() {
            "1" | "unit" => KernelScale::Unit,
            "alpha" | "a" | "aperture" => KernelScale::Aperture,
            other => return Err(invalid("variant", format!("unknown kernel scale `{other}`"))),
        };
        Ok(AVariant::new(center, scale))
    }
}

/// `V(z_i, s τ_j)` for every slab and point, laid out `(slab, point)`.
pub(crate) fn volume_table(space: &Space, grid: &TimeGrid, scale: f64) -> Vec<f64> {
    let n = space.len();
    let mut out = Vec::with_capacity(grid.slabs() * n);
    for &tau in grid.representatives() {
        let r = scale * tau;
        out.extend((0..n).map(|i| space.volume_unchecked(i, r)));
    }
    out
}

fn check_exponent(name: &'static str, q: f64) -> Result<()> {
    require_positive(name, q)
}

/// Per-slab cone sums `Σ_{i ∈ B(x, α τ_j)} |f(j,i)|^q w_i / V(·)` for one
/// vertex, without the `ln σ` factor.
#[allow(clippy::too_many_arguments)]
fn cone_slab_sums(
    space: &Space,
    grid: &TimeGrid,
    f: &HalfSpaceFunction,
    q: f64,
    alpha: f64,
    variant: AVariant,
    vol: &[f64],
    x: usize,
    top: usize,
) -> Vec<f64> {
    let n = space.len();
    (0..top)
        .map(|j| {
            let row = f.row(j);
            let vrow = &vol[j * n..(j + 1) * n];
            let mut s = 0.0;
            for &i in space.ball_points(x, alpha * grid.tau(j)) {
                let v = match variant.kernel_center {
                    KernelCenter::IntegrationPoint => vrow[i],
                    KernelCenter::Vertex => vrow[x],
                };
                s += row[i].abs().powf(q) * space.weight(i) / v;
            }
            s
        })
        .collect()
}

fn kernel_scale(variant: AVariant, alpha: f64) -> f64 {
    match variant.kernel_scale {
        KernelScale::Unit => 1.0,
        KernelScale::Aperture => alpha,
    }
}

/// `A_q^α(f)(x)^q` for every `x`, optionally truncated to slabs with
/// `τ_j < h`.
pub fn lusin_power(
    space: &Space,
    grid: &TimeGrid,
    f: &HalfSpaceFunction,
    q: f64,
    alpha: f64,
    variant: AVariant,
    h: Option<f64>,
) -> Result<Vec<f64>> {
    check_exponent("q", q)?;
    require_positive("alpha", alpha)?;
    f.check_fits(space, grid)?;
    if let Some(h) = h {
        if h.is_nan() || h <= 0.0 {
            return Err(invalid("h", format!("must be > 0, got {h}")));
        }
    }
    let top = h.map_or(grid.slabs(), |h| grid.slabs_below(h));
    let vol = volume_table(space, grid, kernel_scale(variant, alpha));
    let lw = grid.log_weight();
    Ok((0..space.len())
        .into_par_iter()
        .map(|x| {
            let sums = cone_slab_sums(space, grid, f, q, alpha, variant, &vol, x, top);
            lw * sums.iter().sum::<f64>()
        })
        .collect())
}

/// Lusin area functional `A_q^α(f)`, optionally truncated at height `h`.
pub fn lusin_a(
    space: &Space,
    grid: &TimeGrid,
    f: &HalfSpaceFunction,
    q: f64,
    alpha: f64,
    variant: AVariant,
    h: Option<f64>,
) -> Result<Vec<f64>> {
    let p = lusin_power(space, grid, f, q, alpha, variant, h)?;
    Ok(p.into_iter().map(|v| v.powf(1.0 / q)).collect())
}

/// `C_q^α(f)(x)^q`: the largest tent average of `|f|^q` over balls
/// containing `x`.
pub fn carleson_power(space: &Space, grid: &TimeGrid, f: &HalfSpaceFunction, q: f64, alpha: f64) -> Result<Vec<f64>> {
    check_exponent("q", q)?;
    require_positive("alpha", alpha)?;
    f.check_fits(space, grid)?;
    let n = space.len();
    let slabs = grid.slabs();
    let levels: Vec<f64> = grid.representatives().iter().map(|&t| alpha * t).collect();
    // prefix[i * (J+1) + m] = Σ_{j < m} |f(j,i)|^q
    let mut prefix = vec![0.0; n * (slabs + 1)];
    for i in 0..n {
        let base = i * (slabs + 1);
        for j in 0..slabs {
            prefix[base + j + 1] = prefix[base + j] + f.get(j, i).abs().powf(q);
        }
    }
    let lw = grid.log_weight();
    // Tent averages per distinct ball, then suffix maxima over groups: the
    // balls around z containing x are exactly the groups ≥ group_of(z, x).
    let mut averages: Vec<Vec<f64>> = (0..n).map(|z| vec![0.0; space.ball_count(z)]).collect();
    for_each_ball_tent(space, |z, g, dist_out| {
        let mut s = 0.0;
        for &y in space.ball_prefix(z, g) {
            // Slabs with α τ_j < dist(y, B^c), the tent predicate.
            let m = levels.partition_point(|&l| l < dist_out[y]);
            s += space.weight(y) * prefix[y * (slabs + 1) + m];
        }
        averages[z][g] = lw * s / space.ball_mass(z, g);
    });
    let mut out = vec![0.0f64; n];
    for (z, avg) in averages.iter_mut().enumerate() {
        for g in (0..avg.len().saturating_sub(1)).rev() {
            avg[g] = avg[g].max(avg[g + 1]);
        }
        for (x, o) in out.iter_mut().enumerate() {
            *o = o.max(avg[space.group_of(z, x)]);
        }
    }
    Ok(out)
}

/// Carleson functional `C_q^α(f)`.
pub fn carleson_c(space: &Space, grid: &TimeGrid, f: &HalfSpaceFunction, q: f64, alpha: f64) -> Result<Vec<f64>> {
    let p = carleson_power(space, grid, f, q, alpha)?;
    Ok(p.into_iter().map(|v| v.powf(1.0 / q)).collect())
}

fn check_point_values(space: &Space, phi: &[f64]) -> Result<()> {
    if phi.len() != space.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} values for a space of {} points",
            phi.len(),
            space.len()
        )));
    }
    if let Some(v) = phi.iter().find(|v| !v.is_finite()) {
        return Err(invalid("phi", format!("non-finite value {v}")));
    }
    Ok(())
}

/// Uncentred Hardy–Littlewood maximal function of `|φ|`.
pub fn maximal(space: &Space, phi: &[f64]) -> Result<Vec<f64>> {
    check_point_values(space, phi)?;
    let n = space.len();
    let mut out = vec![0.0f64; n];
    for z in 0..n {
        let mut avg = Vec::with_capacity(space.ball_count(z));
        let mut s = 0.0;
        for (g, (_, group)) in space.distance_groups(z).enumerate() {
            for &p in group {
                s += phi[p].abs() * space.weight(p);
            }
            avg.push(s / space.ball_mass(z, g));
        }
        for g in (0..avg.len().saturating_sub(1)).rev() {
            avg[g] = avg[g].max(avg[g + 1]);
        }
        for (x, o) in out.iter_mut().enumerate() {
            *o = o.max(avg[space.group_of(z, x)]);
        }
    }
    Ok(out)
}

/// Ball average `M_s φ(y) = V(y, s)^{-1} Σ_{B(y,s)} φ w`.
pub fn averaging_ms(space: &Space, phi: &[f64], s: f64) -> Result<Vec<f64>> {
    check_point_values(space, phi)?;
    require_positive("s", s)?;
    Ok((0..space.len())
        .map(|y| {
            let pts = space.ball_points(y, s);
            let total: f64 = pts.iter().map(|&x| phi[x] * space.weight(x)).sum();
            total / space.volume_unchecked(y, s)
        })
        .collect())
}

/// `‖f‖_{T^{p,q,α}}`; `p = ∞` gives `max_x C_q^α(f)(x)`.
#[allow(clippy::too_many_arguments)]
pub fn tent_norm(
    space: &Space,
    grid: &TimeGrid,
    f: &HalfSpaceFunction,
    p: f64,
    q: f64,
    alpha: f64,
    variant: AVariant,
) -> Result<f64> {
    if p.is_nan() || p <= 0.0 {
        return Err(invalid("p", format!("must be > 0 or inf, got {p}")));
    }
    if p == f64::INFINITY {
        let c = carleson_c(space, grid, f, q, alpha)?;
        return Ok(c.into_iter().fold(0.0, f64::max));
    }
    let a = lusin_power(space, grid, f, q, alpha, variant, None)?;
    Ok(lp_of_powers(space, &a, p / q).powf(1.0 / p))
}

/// `Σ_x v_x^e w_x` for nonnegative `v`.
pub(crate) fn lp_of_powers(space: &Space, v: &[f64], e: f64) -> f64 {
    v.iter()
        .zip(space.weights())
        .map(|(&a, &w)| a.powf(e) * w)
        .sum()
}

/// `⟨f, g⟩ = ∬ f g dμ dt/t`.
pub fn pairing(space: &Space, grid: &TimeGrid, f: &HalfSpaceFunction, g: &HalfSpaceFunction) -> Result<f64> {
    f.check_fits(space, grid)?;
    f.check_same_shape(g)?;
    let prod = f.zip_with(g, |a, b| a * b)?;
    crate::halfspace::integrate(space, grid, &prod, None)
}

/// Stopping height `h(x) = sup{h > 0 : A_q^α(g|h)(x) ≤ M C_q^α(g)(x)}`.
///
/// `A(g|h)` only changes when `h` crosses a representative, so the supremum
/// is `τ_k` for the first slab `k` whose inclusion breaks the bound, and
/// `+∞` if no slab does. With this value, `h(x) ≥ r` holds exactly when
/// `A(g|r)(x) ≤ M C(g)(x)`.
pub fn stopping_height(
    space: &Space,
    grid: &TimeGrid,
    g: &HalfSpaceFunction,
    q: f64,
    big_m: f64,
    alpha: f64,
) -> Result<Vec<f64>> {
    if !(q >= 1.0 && q.is_finite()) {
        return Err(invalid("q", format!("must be >= 1, got {q}")));
    }
    require_positive("M", big_m)?;
    let c = carleson_c(space, grid, g, q, alpha)?;
    let variant = AVariant::default();
    let vol = volume_table(space, grid, alpha);
    let lw = grid.log_weight();
    Ok((0..space.len())
        .into_par_iter()
        .map(|x| {
            let bound = big_m * c[x];
            let sums = cone_slab_sums(space, grid, g, q, alpha, variant, &vol, x, grid.slabs());
            let mut acc = 0.0;
            for (k, s) in sums.iter().enumerate() {
                acc += s;
                if (lw * acc).powf(1.0 / q) > bound {
                    return grid.tau(k);
                }
            }
            f64::INFINITY
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::halfspace::{tent_mask, integrate, RegionMask};
    use crate::space::PointSet;

    fn s3() -> Space {
        Space::from_coordinates(
            vec!["a".into(), "b".into(), "c".into()],
            vec![vec![0.0], vec![1.0], vec![3.0]],
            vec![1.0; 3],
        )
        .unwrap()
    }

    fn one_point() -> Space {
        Space::from_distances(vec!["p".into()], vec![vec![0.0]], vec![1.0]).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        crate::tolerance::relative_defect(a, b) <= 1e-13
    }

    #[test]
    fn variant_parsing_round_trips() {
        for v in AVariant::ALL {
            assert_eq!(v.to_string().parse::<AVariant>().unwrap(), v);
        }
        assert!("z-1".parse::<AVariant>().is_err());
        assert_eq!(AVariant::default().to_string(), "y-alpha");
    }

    #[test]
    fn one_point_constant_function() {
        let sp = one_point();
        let grid = TimeGrid::new(0.1, 2.0, 5).unwrap();
        let f = HalfSpaceFunction::constant(5, 1, 1.0);
        let expect = 5.0 * 2f64.ln();
        for v in AVariant::ALL {
            let a = lusin_a(&sp, &grid, &f, 3.0, 0.7, v, None).unwrap();
            assert!(close(a[0], expect.powf(1.0 / 3.0)));
        }
        let c = carleson_c(&sp, &grid, &f, 3.0, 0.7).unwrap();
        assert!(close(c[0], expect.powf(1.0 / 3.0)));
    }

    #[test]
    fn s3_single_cell() {
        let sp = s3();
        let grid = TimeGrid::from_first_representative(0.5, 4.0, 3).unwrap();
        let mut f = HalfSpaceFunction::zeros(3, 3);
        f.set(1, 1, 1.0);
        let a = lusin_a(&sp, &grid, &f, 2.0, 1.0, AVariant::default(), None).unwrap();
        let expect = (4f64.ln() / 2.0).sqrt();
        assert!(close(a[0], expect) && close(a[1], expect));
        assert_eq!(a[2], 0.0);
    }

    #[test]
    fn carleson_matches_ball_scan() {
        let sp = s3();
        let grid = TimeGrid::from_first_representative(0.5, 4.0, 3).unwrap();
        let mut f = HalfSpaceFunction::zeros(3, 3);
        for i in 0..3 {
            f.set(0, i, 1.0);
        }
        let c = carleson_c(&sp, &grid, &f, 1.0, 1.0).unwrap();
        let mut oracle = [0.0f64; 3];
        for ball in sp.enumerate_distinct_balls() {
            let members = ball.members(&sp);
            let tent = tent_mask(&sp, &grid, &members, 1.0).unwrap();
            let val = integrate(&sp, &grid, &f, Some(&tent)).unwrap() / members.mass(&sp);
            for x in members.iter() {
                oracle[x] = oracle[x].max(val);
            }
        }
        for x in 0..3 {
            assert!(close(c[x], oracle[x]), "{x}: {} vs {}", c[x], oracle[x]);
        }
        assert!(carleson_c(&sp, &grid, &HalfSpaceFunction::zeros(3, 3), 1.0, 1.0)
            .unwrap()
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn maximal_examples() {
        let sp = s3();
        let m = maximal(&sp, &[1.0, 0.0, 0.0]).unwrap();
        assert!(close(m[2], 1.0 / 3.0));
        assert_eq!(m[0], 1.0);
        assert!(maximal(&sp, &[1.0; 3]).unwrap().iter().all(|&v| close(v, 1.0)));
        assert!(maximal(&sp, &[1.0, f64::NAN, 0.0]).is_err());
    }

    #[test]
    fn averaging_below_min_distance_is_identity() {
        let sp = s3();
        let phi = [0.3, -1.0, 2.0];
        assert_eq!(averaging_ms(&sp, &phi, 0.9).unwrap(), phi.to_vec());
        let m = averaging_ms(&sp, &phi, 1.5).unwrap();
        assert!(close(m[0], (0.3 - 1.0) / 2.0));
        assert!(averaging_ms(&sp, &phi, 0.0).is_err());
    }

    #[test]
    fn one_point_tent_norm() {
        let sp = one_point();
        let grid = TimeGrid::new(1.0, std::f64::consts::E, 4).unwrap();
        let f = HalfSpaceFunction::constant(4, 1, 1.0);
        let n = tent_norm(&sp, &grid, &f, 2.0, 2.0, 1.0, AVariant::default()).unwrap();
        assert!(close(n, 2.0));
        assert!(tent_norm(&sp, &grid, &f, 0.0, 2.0, 1.0, AVariant::default()).is_err());
        let inf = tent_norm(&sp, &grid, &f, f64::INFINITY, 2.0, 1.0, AVariant::default()).unwrap();
        assert!(close(inf, 2.0));
    }

    #[test]
    fn pairing_constant() {
        let sp = s3();
        let grid = TimeGrid::new(0.1, 2.0, 1).unwrap();
        let f = HalfSpaceFunction::constant(1, 3, 1.0);
        assert!(close(pairing(&sp, &grid, &f, &f).unwrap(), 3.0 * 2f64.ln()));
    }

    #[test]
    fn stopping_height_trivial_cases() {
        let sp = s3();
        let grid = TimeGrid::from_first_representative(0.5, 4.0, 3).unwrap();
        let zero = HalfSpaceFunction::zeros(3, 3);
        let h = stopping_height(&sp, &grid, &zero, 2.0, 1.0, 1.0).unwrap();
        assert!(h.iter().all(|v| v.is_infinite()));
        let f = HalfSpaceFunction::from_fn(3, 3, |j, i| (j + 2 * i) as f64 * 0.3 + 0.1);
        let h = stopping_height(&sp, &grid, &f, 2.0, 1e6, 1.0).unwrap();
        assert!(h.iter().all(|v| v.is_infinite()));
        // A tiny M stops at the first slab touching the cone.
        let h = stopping_height(&sp, &grid, &f, 2.0, 1e-9, 1.0).unwrap();
        assert!(h.iter().all(|&v| v == grid.tau(0)));
    }

    #[test]
    fn stopping_height_is_exact_supremum() {
        let sp = s3();
        let grid = TimeGrid::from_first_representative(0.5, 4.0, 3).unwrap();
        let f = HalfSpaceFunction::from_fn(3, 3, |j, i| ((j * 7 + i * 3) % 5) as f64 - 1.5);
        let c = carleson_c(&sp, &grid, &f, 2.0, 1.0).unwrap();
        let h = stopping_height(&sp, &grid, &f, 2.0, 0.9, 1.0).unwrap();
        let mut probes: Vec<f64> = grid.representatives().to_vec();
        probes.extend(grid.representatives().iter().map(|t| t * 1.01));
        probes.push(0.01);
        for &r in &probes {
            let a = lusin_a(&sp, &grid, &f, 2.0, 1.0, AVariant::default(), Some(r)).unwrap();
            for x in 0..3 {
                assert_eq!(h[x] >= r, a[x] <= 0.9 * c[x], "x={x} r={r}");
            }
        }
    }

    #[test]
    fn support_rule_on_single_cell() {
        let sp = s3();
        let grid = TimeGrid::from_first_representative(0.5, 4.0, 3).unwrap();
        let mask = RegionMask::from_cells(3, 3, [(0, 2)]);
        let f = HalfSpaceFunction::indicator(&mask);
        let a = lusin_a(&sp, &grid, &f, 1.0, 1.0, AVariant::default(), None).unwrap();
        let sh = crate::halfspace::shadow(&sp, &grid, &mask, 1.0).unwrap();
        assert_eq!(sh, PointSet::from_indices(3, [2]));
        assert_eq!(a[0], 0.0);
        assert_eq!(a[1], 0.0);
        assert!(a[2] > 0.0);
    }
}
