//! The discretised upper half-space `X × (0, ∞)` with measure `dμ(y) dt/t`.
//!
//! Time is cut into geometric slabs `[t_min σ^j, t_min σ^{j+1})`. Every
//! membership predicate (cones, tents, truncations) is evaluated at the slab
//! representative `τ_j = t_min σ^{j + 1/2}`, and each slab carries `dt/t`
//! mass `ln σ`.

use serde::Serialize;

use crate::error::{invalid, require_positive, Error, Result};
use crate::functionals;
use crate::space::{PointSet, Space};

/// Geometric grid of time slabs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimeGrid {
    t_min: f64,
    sigma: f64,
    slabs: usize,
    #[serde(skip)]
    tau: Vec<f64>,
}

impl TimeGrid {
    pub fn new(t_min: f64, sigma: f64, slabs: usize) -> Result<Self> {
        require_positive("t_min", t_min)?;
        if !(sigma.is_finite() && sigma > 1.0) {
            return Err(invalid("sigma", format!("must be > 1, got {sigma}")));
        }
        if slabs == 0 {
            return Err(invalid("slabs", "need at least one slab"));
        }
        let tau = (0..slabs)
            .map(|j| t_min * sigma.powf(j as f64 + 0.5))
            .collect();
        Ok(Self {
            t_min,
            sigma,
            slabs,
            tau,
        })
    }

    /// Grid whose smallest representative is `tau0` and whose representatives
    /// grow by `sigma`.
    pub fn from_first_representative(tau0: f64, sigma: f64, slabs: usize) -> Result<Self> {
        require_positive("tau0", tau0)?;
        if !(sigma.is_finite() && sigma > 1.0) {
            return Err(invalid("sigma", format!("must be > 1, got {sigma}")));
        }
        Self::new(tau0 / sigma.sqrt(), sigma, slabs)
    }

    /// Default grid for a run using apertures in `[alpha_min, alpha_max]`:
    /// `t_min = d_min / (2 α_max)`, `σ = √2`, and enough slabs that
    /// `t_max ≥ 2 · diam / α_min`.
    ///
    /// With this choice `α τ_0 < d_min` for every aperture in the range, so
    /// tents over balls have the ball as shadow.
    pub fn default_for(space: &Space, alpha_min: f64, alpha_max: f64) -> Result<Self> {
        require_positive("alpha_min", alpha_min)?;
        require_positive("alpha_max", alpha_max)?;
        let d_min = space.min_positive_distance().unwrap_or(1.0);
        let diam = space.diameter().max(d_min);
        let sigma = std::f64::consts::SQRT_2;
        let t_min = d_min / (2.0 * alpha_max);
        let target = 2.0 * diam / alpha_min;
        let slabs = ((target / t_min).ln() / sigma.ln()).ceil().max(1.0) as usize;
        Self::new(t_min, sigma, slabs)
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn slabs(&self) -> usize {
        self.slabs
    }

    /// Upper boundary of the top slab.
    pub fn t_max(&self) -> f64 {
        self.boundary(self.slabs)
    }

    /// `t_min σ^k`, the lower boundary of slab `k`.
    pub fn boundary(&self, k: usize) -> f64 {
        self.t_min * self.sigma.powi(k as i32)
    }

    /// Slab representative `τ_j`.
    #[inline]
    pub fn tau(&self, j: usize) -> f64 {
        self.tau[j]
    }

    pub fn representatives(&self) -> &[f64] {
        &self.tau
    }

    /// `∫ dt/t` over one slab.
    pub fn log_weight(&self) -> f64 {
        self.sigma.ln()
    }

    /// Number of slabs whose representative lies strictly below `h`.
    pub fn slabs_below(&self, h: f64) -> usize {
        self.tau.partition_point(|&t| t < h)
    }

    pub fn descriptor(&self) -> String {
        format!("t_min={},sigma={},slabs={}", self.t_min, self.sigma, self.slabs)
    }
}

/// Cone membership: `d(x, y) < α τ`.
#[inline]
pub(crate) fn in_cone(d: f64, alpha: f64, tau: f64) -> bool {
    d < alpha * tau
}

/// Tent membership given `dist(y, O^c)`: `dist > α τ` (infinite when `O^c`
/// is empty).
#[inline]
pub(crate) fn in_tent(dist_to_complement: f64, alpha: f64, tau: f64) -> bool {
    dist_to_complement > alpha * tau
}

/// Real samples `f(y_i, τ_j)`, indexed `(slab, point)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HalfSpaceFunction {
    slabs: usize,
    points: usize,
    values: Vec<f64>,
}

impl HalfSpaceFunction {
    pub fn zeros(slabs: usize, points: usize) -> Self {
        Self {
            slabs,
            points,
            values: vec![0.0; slabs * points],
        }
    }

    pub fn constant(slabs: usize, points: usize, c: f64) -> Self {
        Self {
            slabs,
            points,
            values: vec![c; slabs * points],
        }
    }

    pub fn for_grid(space: &Space, grid: &TimeGrid) -> Self {
        Self::zeros(grid.slabs(), space.len())
    }

    /// Row-major values, one row per slab.
    pub fn from_values(slabs: usize, points: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != slabs * points {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {slabs}x{points} grid",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Malformed(format!("non-finite sample {v}")));
        }
        Ok(Self {
            slabs,
            points,
            values,
        })
    }

    pub fn from_fn(slabs: usize, points: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(slabs * points);
        for j in 0..slabs {
            for i in 0..points {
                values.push(f(j, i));
            }
        }
        Self {
            slabs,
            points,
            values,
        }
    }

    pub fn indicator(mask: &RegionMask) -> Self {
        Self::from_fn(mask.slabs, mask.points, |j, i| {
            if mask.get(j, i) {
                1.0
            } else {
                0.0
            }
        })
    }

    pub fn slabs(&self) -> usize {
        self.slabs
    }

    pub fn points(&self) -> usize {
        self.points
    }

    #[inline]
    pub fn get(&self, j: usize, i: usize) -> f64 {
        self.values[j * self.points + i]
    }

    pub fn set(&mut self, j: usize, i: usize, v: f64) {
        self.values[j * self.points + i] = v;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.values[j * self.points..(j + 1) * self.points]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            slabs: self.slabs,
            points: self.points,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self {
            slabs: self.slabs,
            points: self.points,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// `1_C · f`.
    pub fn restrict(&self, mask: &RegionMask) -> Result<Self> {
        mask.check_shape(self.slabs, self.points)?;
        Ok(Self::from_fn(self.slabs, self.points, |j, i| {
            if mask.get(j, i) {
                self.get(j, i)
            } else {
                0.0
            }
        }))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Cells where `f` is nonzero.
    pub fn support(&self) -> RegionMask {
        RegionMask {
            slabs: self.slabs,
            points: self.points,
            bits: self.values.iter().map(|&v| v != 0.0).collect(),
        }
    }

    pub(crate) fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.slabs != other.slabs || self.points != other.points {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.slabs, self.points, other.slabs, other.points
            )));
        }
        Ok(())
    }

    pub(crate) fn check_fits(&self, space: &Space, grid: &TimeGrid) -> Result<()> {
        if self.slabs != grid.slabs() || self.points != space.len() {
            return Err(Error::DimensionMismatch(format!(
                "function is {}x{}, grid x space is {}x{}",
                self.slabs,
                self.points,
                grid.slabs(),
                space.len()
            )));
        }
        Ok(())
    }
}

/// A subset of the discretised half-space, indexed `(slab, point)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RegionMask {
    slabs: usize,
    points: usize,
    bits: Vec<bool>,
}

impl RegionMask {
    pub fn empty(slabs: usize, points: usize) -> Self {
        Self {
            slabs,
            points,
            bits: vec![false; slabs * points],
        }
    }

    pub fn full(slabs: usize, points: usize) -> Self {
        Self {
            slabs,
            points,
            bits: vec![true; slabs * points],
        }
    }

    pub fn from_bits(slabs: usize, points: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != slabs * points {
            return Err(Error::DimensionMismatch(format!(
                "{} cells for a {slabs}x{points} grid",
                bits.len()
            )));
        }
        Ok(Self {
            slabs,
            points,
            bits,
        })
    }

    /// Bit `j * points + i` of `mask` selects cell `(j, i)`.
    pub fn from_mask(slabs: usize, points: usize, mask: u64) -> Self {
        Self {
            slabs,
            points,
            bits: (0..slabs * points).map(|k| mask >> k & 1 == 1).collect(),
        }
    }

    pub fn from_cells(slabs: usize, points: usize, cells: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut m = Self::empty(slabs, points);
        for (j, i) in cells {
            m.set(j, i, true);
        }
        m
    }

    pub fn slabs(&self) -> usize {
        self.slabs
    }

    pub fn points(&self) -> usize {
        self.points
    }

    #[inline]
    pub fn get(&self, j: usize, i: usize) -> bool {
        self.bits[j * self.points + i]
    }

    pub fn set(&mut self, j: usize, i: usize, v: bool) {
        self.bits[j * self.points + i] = v;
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.points;
        self.bits
            .iter()
            .enumerate()
            .filter_map(move |(k, &b)| b.then_some((k / n, k % n)))
    }

    pub fn complement(&self) -> Self {
        Self {
            slabs: self.slabs,
            points: self.points,
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    pub fn union(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a && b)
    }

    fn combine(&self, other: &Self, op: impl Fn(bool, bool) -> bool) -> Self {
        assert_eq!((self.slabs, self.points), (other.slabs, other.points));
        Self {
            slabs: self.slabs,
            points: self.points,
            bits: self.bits.iter().zip(&other.bits).map(|(&a, &b)| op(a, b)).collect(),
        }
    }

    pub fn intersects(&self, other: &Self) -> bool {
        self.bits.iter().zip(&other.bits).any(|(&a, &b)| a && b)
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    /// Points `y` with some cell `(j, y)` in the mask.
    pub fn projection(&self) -> PointSet {
        let mut set = PointSet::empty(self.points);
        for (_, i) in self.cells() {
            set.insert(i);
        }
        set
    }

    pub(crate) fn check_shape(&self, slabs: usize, points: usize) -> Result<()> {
        if self.slabs != slabs || self.points != points {
            return Err(Error::DimensionMismatch(format!(
                "mask is {}x{}, expected {slabs}x{points}",
                self.slabs, self.points
            )));
        }
        Ok(())
    }
}

/// `dist(y, S)`, `+∞` for the empty set.
pub fn distance_to_set(space: &Space, y: usize, set: &PointSet) -> f64 {
    set.iter()
        .map(|s| space.distance(y, s))
        .fold(f64::INFINITY, f64::min)
}

/// Cone `Γ^α(x)`, or the truncated cone `Γ^α_h(x)` when `h` is given.
pub fn cone_mask(space: &Space, grid: &TimeGrid, x: usize, alpha: f64, h: Option<f64>) -> Result<RegionMask> {
    space.check_index(x)?;
    require_positive("alpha", alpha)?;
    if let Some(h) = h {
        if h.is_nan() || h <= 0.0 {
            return Err(invalid("h", format!("must be > 0, got {h}")));
        }
    }
    let top = h.map_or(grid.slabs(), |h| grid.slabs_below(h));
    let row = space.distance_row(x);
    let mut mask = RegionMask::empty(grid.slabs(), space.len());
    for j in 0..top {
        let tau = grid.tau(j);
        for (i, &d) in row.iter().enumerate() {
            if in_cone(d, alpha, tau) {
                mask.set(j, i, true);
            }
        }
    }
    Ok(mask)
}

/// Tent `T^α(O) = {(y, τ) : dist(y, O^c) > α τ}`.
pub fn tent_mask(space: &Space, grid: &TimeGrid, base: &PointSet, alpha: f64) -> Result<RegionMask> {
    require_positive("alpha", alpha)?;
    check_set(space, base)?;
    let outside = base.complement();
    let mut mask = RegionMask::empty(grid.slabs(), space.len());
    for i in base.iter() {
        let d = distance_to_set(space, i, &outside);
        for j in 0..grid.slabs() {
            if in_tent(d, alpha, grid.tau(j)) {
                mask.set(j, i, true);
            }
        }
    }
    Ok(mask)
}

/// Whether `(y, t)` lies in `T^α(O)` for an arbitrary height `t`.
pub fn tent_contains(space: &Space, base: &PointSet, alpha: f64, y: usize, t: f64) -> bool {
    in_tent(distance_to_set(space, y, &base.complement()), alpha, t)
}

/// `S^α(C) = {x : Γ^α(x) ∩ C ≠ ∅}`.
pub fn shadow(space: &Space, grid: &TimeGrid, region: &RegionMask, alpha: f64) -> Result<PointSet> {
    require_positive("alpha", alpha)?;
    region.check_shape(grid.slabs(), space.len())?;
    let mut out = PointSet::empty(space.len());
    for x in 0..space.len() {
        let row = space.distance_row(x);
        if region.cells().any(|(j, i)| in_cone(row[i], alpha, grid.tau(j))) {
            out.insert(x);
        }
    }
    Ok(out)
}

/// `T^α(S^α(C))`, the smallest tent containing `C`.
pub fn minimal_tent(space: &Space, grid: &TimeGrid, region: &RegionMask, alpha: f64) -> Result<RegionMask> {
    let s = shadow(space, grid, region, alpha)?;
    tent_mask(space, grid, &s, alpha)
}

/// Points of global `γ`-density with respect to `F = O^c`, and the
/// complementary set `O*_γ`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensitySets {
    pub f_star: PointSet,
    pub o_star: PointSet,
}

/// Computes `F*_γ` directly: `x ∈ F*_γ` iff every ball containing `x` has
/// `μ(B ∩ F) / μ(B) ≥ γ`.
pub fn gamma_density_set(space: &Space, open: &PointSet, gamma: f64) -> Result<DensitySets> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(invalid("gamma", format!("must lie in (0, 1), got {gamma}")));
    }
    check_set(space, open)?;
    let n = space.len();
    let mut f_star = PointSet::full(n);
    for z in 0..n {
        let mut f_mass = 0.0;
        for (g, (_, group)) in space.distance_groups(z).enumerate() {
            for &p in group {
                if !open.contains(p) {
                    f_mass += space.weight(p);
                }
            }
            if f_mass / space.ball_mass(z, g) < gamma {
                for &p in space.ball_prefix(z, g) {
                    f_star.remove(p);
                }
            }
        }
    }
    let o_star = f_star.complement();
    Ok(DensitySets { f_star, o_star })
}

/// `{x : M(1_O)(x) > 1 - γ}`.
pub fn density_via_maximal(space: &Space, open: &PointSet, gamma: f64) -> Result<PointSet> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(invalid("gamma", format!("must lie in (0, 1), got {gamma}")));
    }
    check_set(space, open)?;
    let indicator: Vec<f64> = (0..space.len())
        .map(|i| if open.contains(i) { 1.0 } else { 0.0 })
        .collect();
    let m = functionals::maximal(space, &indicator)?;
    Ok(PointSet::from_bits(m.iter().map(|&v| v > 1.0 - gamma).collect()))
}

/// `∬ Φ dμ dt/t` over the mask (or the whole grid).
pub fn integrate(space: &Space, grid: &TimeGrid, phi: &HalfSpaceFunction, over: Option<&RegionMask>) -> Result<f64> {
    phi.check_fits(space, grid)?;
    if let Some(m) = over {
        m.check_shape(grid.slabs(), space.len())?;
    }
    let mut total = 0.0;
    for j in 0..grid.slabs() {
        for i in 0..space.len() {
            if over.is_none_or(|m| m.get(j, i)) {
                total += phi.get(j, i) * space.weight(i);
            }
        }
    }
    Ok(total * grid.log_weight())
}

/// Smallest ball masses whose tents meet (`beta0`) or cover (`beta1`) a
/// region. The whole space is a ball with a full tent, so both minima are
/// always attained.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Betas {
    pub beta0: f64,
    pub beta1: f64,
    pub beta0_ball: crate::space::Ball,
    pub beta1_ball: crate::space::Ball,
}

pub fn beta_constants(space: &Space, grid: &TimeGrid, region: &RegionMask, alpha: f64) -> Result<Betas> {
    require_positive("alpha", alpha)?;
    region.check_shape(grid.slabs(), space.len())?;
    if region.is_empty() {
        return Err(invalid("K", "region must be nonempty"));
    }
    let mut best0: Option<(f64, usize, usize)> = None;
    let mut best1: Option<(f64, usize, usize)> = None;
    for_each_ball_tent(space, |z, g, dist_out| {
        let mass = space.ball_mass(z, g);
        let mut meets = false;
        let mut covers = true;
        for (j, i) in region.cells() {
            if in_tent(dist_out[i], alpha, grid.tau(j)) {
                meets = true;
            } else {
                covers = false;
            }
        }
        if meets && best0.is_none_or(|(m, _, _)| mass < m) {
            best0 = Some((mass, z, g));
        }
        if covers && best1.is_none_or(|(m, _, _)| mass < m) {
            best1 = Some((mass, z, g));
        }
    });
    let (b0, z0, g0) = best0.expect("whole-space ball meets every nonempty region");
    let (b1, z1, g1) = best1.expect("whole-space ball covers every region");
    let ball = |z, g| crate::space::Ball {
        center: z,
        radius: space.ball_radius(z, g),
    };
    Ok(Betas {
        beta0: b0,
        beta1: b1,
        beta0_ball: ball(z0, g0),
        beta1_ball: ball(z1, g1),
    })
}

/// Visits every distinct ball `(center, group)` with `dist(y, B^c)` for all
/// points `y` (infinite for the whole space, zero for `y ∉ B`).
pub(crate) fn for_each_ball_tent(space: &Space, mut visit: impl FnMut(usize, usize, &[f64])) {
    let n = space.len();
    let mut dist_out = vec![f64::INFINITY; n];
    for z in 0..n {
        dist_out.iter_mut().for_each(|d| *d = f64::INFINITY);
        let groups: Vec<&[usize]> = space.distance_groups(z).map(|(_, g)| g).collect();
        for g in (0..groups.len()).rev() {
            if g + 1 < groups.len() {
                for &p in groups[g + 1] {
                    let row = space.distance_row(p);
                    for (y, d) in dist_out.iter_mut().enumerate() {
                        *d = d.min(row[y]);
                    }
                }
            }
            visit(z, g, &dist_out);
        }
    }
}

/// Pairs `(α τ_j, d(x, y))` that coincide up to a relative `1e-12`. At such
/// a tie the strict cone and tent predicates are not complementary.
pub fn grid_ties(space: &Space, grid: &TimeGrid, alpha: f64) -> Vec<(usize, f64)> {
    let dists = space.distinct_distances();
    let mut ties = Vec::new();
    for j in 0..grid.slabs() {
        let level = alpha * grid.tau(j);
        let k = dists.partition_point(|&d| d < level * (1.0 - crate::tolerance::TIE_REL));
        if let Some(&d) = dists.get(k) {
            if crate::tolerance::relative_defect(d, level) <= crate::tolerance::TIE_REL {
                ties.push((j, d));
            }
        }
    }
    ties
}

fn check_set(space: &Space, set: &PointSet) -> Result<()> {
    if set.universe_len() != space.len() {
        return Err(Error::DimensionMismatch(format!(
            "point set over {} points, space has {}",
            set.universe_len(),
            space.len()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s3() -> Space {
        Space::from_coordinates(
            vec!["a".into(), "b".into(), "c".into()],
            vec![vec![0.0], vec![1.0], vec![3.0]],
            vec![1.0; 3],
        )
        .unwrap()
    }

    /// τ = 0.5, 2, 8.
    fn s3_grid() -> TimeGrid {
        TimeGrid::from_first_representative(0.5, 4.0, 3).unwrap()
    }

    #[test]
    fn grid_layout() {
        let g = TimeGrid::new(1.0, 2.0, 3).unwrap();
        assert!((g.tau(0) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(g.boundary(3), 8.0);
        assert_eq!(g.log_weight(), 2f64.ln());
        let g = s3_grid();
        for (t, e) in g.representatives().iter().zip([0.5, 2.0, 8.0]) {
            assert!((t - e).abs() < 1e-12);
        }
        assert!(TimeGrid::new(0.0, 2.0, 1).is_err());
        assert!(TimeGrid::new(1.0, 1.0, 1).is_err());
        assert!(TimeGrid::new(1.0, 2.0, 0).is_err());
    }

    #[test]
    fn cone_rows_on_s3() {
        let s = s3();
        let g = s3_grid();
        let c = cone_mask(&s, &g, 0, 1.0, None).unwrap();
        let rows: Vec<Vec<usize>> = (0..3)
            .map(|j| (0..3).filter(|&i| c.get(j, i)).collect())
            .collect();
        assert_eq!(rows, vec![vec![0], vec![0, 1], vec![0, 1, 2]]);
        // truncation below the first representative empties the cone
        let e = cone_mask(&s, &g, 1, 1.0, Some(g.t_min() / 2.0)).unwrap();
        assert!(e.is_empty());
        assert!(cone_mask(&s, &g, 0, 0.0, None).is_err());
    }

    #[test]
    fn tent_examples() {
        let s = s3();
        let g = s3_grid();
        assert_eq!(tent_mask(&s, &g, &PointSet::full(3), 1.0).unwrap(), RegionMask::full(3, 3));
        assert!(tent_mask(&s, &g, &PointSet::empty(3), 1.0).unwrap().is_empty());
        // O = {a, b}: dist(a, {c}) = 3, dist(b, {c}) = 2
        let o = PointSet::from_indices(3, [0, 1]);
        for (t, a_in, b_in) in [(0.5, true, true), (2.0, true, false), (2.5, true, false)] {
            assert_eq!(tent_contains(&s, &o, 1.0, 0, t), a_in, "a at {t}");
            assert_eq!(tent_contains(&s, &o, 1.0, 1, t), b_in, "b at {t}");
            assert!(!tent_contains(&s, &o, 1.0, 2, t));
        }
    }

    #[test]
    fn shadow_examples() {
        let s = s3();
        let g = s3_grid();
        assert!(shadow(&s, &g, &RegionMask::empty(3, 3), 1.0).unwrap().is_empty());
        assert_eq!(shadow(&s, &g, &RegionMask::full(3, 3), 1.0).unwrap(), PointSet::full(3));
        let cell = RegionMask::from_cells(3, 3, [(1, 1)]);
        let sh: Vec<usize> = shadow(&s, &g, &cell, 1.0).unwrap().iter().collect();
        assert_eq!(sh, vec![0, 1]);
    }

    #[test]
    fn minimal_tent_trivial_cases() {
        let s = s3();
        let g = s3_grid();
        assert!(minimal_tent(&s, &g, &RegionMask::empty(3, 3), 1.0).unwrap().is_empty());
        assert_eq!(minimal_tent(&s, &g, &RegionMask::full(3, 3), 1.0).unwrap(), RegionMask::full(3, 3));
    }

    #[test]
    fn minimal_tent_recovers_ball_tent() {
        let s = s3();
        // τ_0 well below every distance so S(T(B)) = B
        let g = TimeGrid::from_first_representative(0.1, 2.0, 6).unwrap();
        for ball in s.enumerate_distinct_balls() {
            let b = ball.members(&s);
            let t = tent_mask(&s, &g, &b, 1.0).unwrap();
            assert_eq!(shadow(&s, &g, &t, 1.0).unwrap(), b);
            assert_eq!(minimal_tent(&s, &g, &t, 1.0).unwrap(), t);
        }
    }

    #[test]
    fn density_examples() {
        let s = s3();
        let d = gamma_density_set(&s, &PointSet::empty(3), 0.5).unwrap();
        assert!(d.o_star.is_empty());
        assert_eq!(d.f_star, PointSet::full(3));
        let d = gamma_density_set(&s, &PointSet::full(3), 0.5).unwrap();
        assert_eq!(d.o_star, PointSet::full(3));
        let d = gamma_density_set(&s, &PointSet::from_indices(3, [2]), 0.5).unwrap();
        assert_eq!(d.o_star.iter().collect::<Vec<_>>(), vec![2]);
        assert!(gamma_density_set(&s, &PointSet::empty(3), 1.0).is_err());
        assert!(gamma_density_set(&s, &PointSet::empty(3), 0.0).is_err());
    }

    #[test]
    fn integrate_constants() {
        let s = s3();
        let g = TimeGrid::new(1.0, 2.0, 1).unwrap();
        let one = HalfSpaceFunction::constant(1, 3, 1.0);
        let v = integrate(&s, &g, &one, None).unwrap();
        assert!((v - 3.0 * 2f64.ln()).abs() < 1e-15);
        let p = Space::from_distances(vec!["p".into()], vec![vec![0.0]], vec![1.0]).unwrap();
        let g = TimeGrid::new(0.3, 1.5, 7).unwrap();
        let v = integrate(&p, &g, &HalfSpaceFunction::constant(7, 1, 1.0), None).unwrap();
        assert!((v - 7.0 * 1.5f64.ln()).abs() < 1e-14);
        let wrong = HalfSpaceFunction::zeros(2, 1);
        assert!(matches!(integrate(&p, &g, &wrong, None), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn betas_on_one_point() {
        let p = Space::from_distances(vec!["p".into()], vec![vec![0.0]], vec![1.0]).unwrap();
        let g = TimeGrid::new(0.01, 2.0, 4).unwrap();
        let k = RegionMask::from_cells(4, 1, [(0, 0)]);
        let b = beta_constants(&p, &g, &k, 1.0).unwrap();
        assert_eq!((b.beta0, b.beta1), (1.0, 1.0));
        assert!(beta_constants(&p, &g, &RegionMask::empty(4, 1), 1.0).is_err());
    }

    #[test]
    fn betas_bottom_slab_s3_matches_scan() {
        let s = s3();
        let g = s3_grid();
        let k = RegionMask::from_cells(3, 3, [(0, 0), (0, 1), (0, 2)]);
        let b = beta_constants(&s, &g, &k, 1.0).unwrap();
        // brute force over the nine balls
        let mut best = f64::INFINITY;
        for ball in s.enumerate_distinct_balls() {
            let members = ball.members(&s);
            let t = tent_mask(&s, &g, &members, 1.0).unwrap();
            if k.is_subset(&t) {
                best = best.min(members.mass(&s));
            }
        }
        assert_eq!(b.beta1, best);
        assert!(b.beta0 <= b.beta1);
    }

    #[test]
    fn ties_detected() {
        let s = s3();
        // α τ_1 = 2 = d(b, c)
        assert!(!grid_ties(&s, &s3_grid(), 1.0).is_empty());
        let g = TimeGrid::default_for(&s, 1.0, 1.0).unwrap();
        assert!(grid_ties(&s, &g, 1.0).is_empty());
    }
}
