//! The vector-valued picture: the cone embedding `T_α`, its adjoint `Π_α`,
//! the projection `P_α = T_α Π_α`, and empirical change-of-aperture
//! constants.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, require_positive, Error, Result};
use crate::functionals::{lusin_power, tent_norm, AVariant, KernelScale};
use crate::halfspace::{in_cone, tent_mask, HalfSpaceFunction, TimeGrid};
use crate::sample;
use crate::space::Space;

/// Denominator used by `Π_α` and by the inner `L^q` measure: `V(y, α t)` or
/// `V(y, t)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    #[default]
    ApertureVolume,
    UnitVolume,
}

impl Scale {
    fn radius_factor(self, alpha: f64) -> f64 {
        match self {
            Scale::ApertureVolume => alpha,
            Scale::UnitVolume => 1.0,
        }
    }

    /// The Lusin variant whose area functional this inner measure realises.
    pub fn variant(self) -> AVariant {
        AVariant {
            kernel_scale: match self {
                Scale::ApertureVolume => KernelScale::Aperture,
                Scale::UnitVolume => KernelScale::Unit,
            },
            ..AVariant::default()
        }
    }
}

/// A function of the vertex `x` with values in functions on the half-space,
/// stored densely as `(vertex, slab, point)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConeFamily {
    points: usize,
    slabs: usize,
    values: Vec<f64>,
}

impl ConeFamily {
    pub fn zeros(slabs: usize, points: usize) -> Self {
        Self {
            points,
            slabs,
            values: vec![0.0; points * slabs * points],
        }
    }

    pub fn from_fn(slabs: usize, points: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(points * slabs * points);
        for x in 0..points {
            for j in 0..slabs {
                for i in 0..points {
                    values.push(f(x, j, i));
                }
            }
        }
        Self { points, slabs, values }
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn slabs(&self) -> usize {
        self.slabs
    }

    #[inline]
    pub fn get(&self, x: usize, j: usize, i: usize) -> f64 {
        self.values[(x * self.slabs + j) * self.points + i]
    }

    #[inline]
    fn slice(&self, x: usize) -> &[f64] {
        let len = self.slabs * self.points;
        &self.values[x * len..(x + 1) * len]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest entrywise difference.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.points != other.points || self.slabs != other.slabs {
            return Err(Error::DimensionMismatch(format!(
                "cone families {}x{} and {}x{}",
                self.slabs, self.points, other.slabs, other.points
            )));
        }
        Ok(())
    }

    fn check_fits(&self, space: &Space, grid: &TimeGrid) -> Result<()> {
        if self.points != space.len() || self.slabs != grid.slabs() {
            return Err(Error::DimensionMismatch(format!(
                "cone family {}x{} on a {}-slab grid over {} points",
                self.slabs,
                self.points,
                grid.slabs(),
                space.len()
            )));
        }
        Ok(())
    }
}

/// `T_α f(x)(y, t) = f(y, t) 1_{Γ^α(x)}(y, t)`.
pub fn embed_t(space: &Space, grid: &TimeGrid, f: &HalfSpaceFunction, alpha: f64) -> Result<ConeFamily> {
    require_positive("alpha", alpha)?;
    f.check_fits(space, grid)?;
    let n = space.len();
    let slabs = grid.slabs();
    let values: Vec<f64> = (0..n)
        .into_par_iter()
        .flat_map_iter(|x| {
            let row = space.distance_row(x);
            (0..slabs).flat_map(move |j| {
                let tau = grid.tau(j);
                (0..n).map(move |i| if in_cone(row[i], alpha, tau) { f.get(j, i) } else { 0.0 })
            })
        })
        .collect();
    Ok(ConeFamily {
        points: n,
        slabs,
        values,
    })
}

/// `(Π_α F)(y, t) = V(y, s t)^{-1} Σ_{x ∈ B(y, α t)} F(x)(y, t) w_x` with
/// `s = α` or `s = 1` according to `scale`.
pub fn project_pi(space: &Space, grid: &TimeGrid, family: &ConeFamily, alpha: f64, scale: Scale) -> Result<HalfSpaceFunction> {
    require_positive("alpha", alpha)?;
    family.check_fits(space, grid)?;
    let n = space.len();
    let s = scale.radius_factor(alpha);
    Ok(HalfSpaceFunction::from_fn(grid.slabs(), n, |j, i| {
        let tau = grid.tau(j);
        let mut acc = 0.0;
        for x in 0..n {
            if in_cone(space.distance(x, i), alpha, tau) {
                acc += family.get(x, j, i) * space.weight(x);
            }
        }
        acc / space.volume_unchecked(i, s * tau)
    }))
}

/// `P_α = T_α Π_α`.
pub fn projection_p(space: &Space, grid: &TimeGrid, family: &ConeFamily, alpha: f64, scale: Scale) -> Result<ConeFamily> {
    let pi = project_pi(space, grid, family, alpha, scale)?;
    embed_t(space, grid, &pi, alpha)
}

fn inner_volumes(space: &Space, grid: &TimeGrid, alpha: f64, scale: Scale) -> Vec<f64> {
    crate::functionals::volume_table(space, grid, scale.radius_factor(alpha))
}

/// `‖F‖_{L^p(X; L^q)}` where the inner measure is
/// `w_i / V(y_i, s τ_j) · ln σ`.
pub fn mixed_norm(space: &Space, grid: &TimeGrid, family: &ConeFamily, p: f64, q: f64, alpha: f64, scale: Scale) -> Result<f64> {
    require_positive("p", p)?;
    require_positive("q", q)?;
    require_positive("alpha", alpha)?;
    family.check_fits(space, grid)?;
    let vol = inner_volumes(space, grid, alpha, scale);
    let n = space.len();
    let lw = grid.log_weight();
    let inner: Vec<f64> = (0..n)
        .map(|x| {
            let s: f64 = family
                .slice(x)
                .iter()
                .enumerate()
                .map(|(k, v)| v.abs().powf(q) * space.weight(k % n) / vol[k])
                .sum();
            lw * s
        })
        .collect();
    Ok(crate::functionals::lp_of_powers(space, &inner, p / q).powf(1.0 / p))
}

/// `⟨⟨F, G⟩⟩ = Σ_x w_x Σ_{j,i} F G w_i / V(y_i, s τ_j) · ln σ`.
pub fn family_pairing(space: &Space, grid: &TimeGrid, f: &ConeFamily, g: &ConeFamily, alpha: f64, scale: Scale) -> Result<f64> {
    require_positive("alpha", alpha)?;
    f.check_fits(space, grid)?;
    f.check_same_shape(g)?;
    let vol = inner_volumes(space, grid, alpha, scale);
    let n = space.len();
    let mut total = 0.0;
    for x in 0..n {
        let s: f64 = f
            .slice(x)
            .iter()
            .zip(g.slice(x))
            .enumerate()
            .map(|(k, (a, b))| a * b * space.weight(k % n) / vol[k])
            .sum();
        total += space.weight(x) * s;
    }
    Ok(total * grid.log_weight())
}

/// Largest entrywise gap between `P_β T_α f` and
/// `T_β f · V(y, min(α, β) t) / V(y, t)`, with `Π` at unit scale.
pub fn aperture_identity_defect(space: &Space, grid: &TimeGrid, f: &HalfSpaceFunction, alpha: f64, beta: f64) -> Result<f64> {
    require_positive("alpha", alpha)?;
    require_positive("beta", beta)?;
    let lhs = projection_p(space, grid, &embed_t(space, grid, f, alpha)?, beta, Scale::UnitVolume)?;
    let tb = embed_t(space, grid, f, beta)?;
    let lo = alpha.min(beta);
    let n = space.len();
    let rhs = ConeFamily::from_fn(grid.slabs(), n, |x, j, i| {
        let tau = grid.tau(j);
        tb.get(x, j, i) * space.volume_unchecked(i, lo * tau) / space.volume_unchecked(i, tau)
    });
    lhs.max_abs_diff(&rhs)
}

/// Summary of a family of norm ratios.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioStats {
    pub max_ratio: f64,
    pub median_ratio: f64,
    pub min_ratio: f64,
    /// Which test function realised the maximum.
    pub argmax: String,
    pub samples: usize,
}

impl RatioStats {
    fn from_samples(mut samples: Vec<(f64, String)>) -> Self {
        if samples.is_empty() {
            return Self {
                max_ratio: f64::NAN,
                median_ratio: f64::NAN,
                min_ratio: f64::NAN,
                argmax: String::new(),
                samples: 0,
            };
        }
        let (max_ratio, argmax) = samples
            .iter()
            .fold((f64::NEG_INFINITY, String::new()), |(m, a), (r, l)| {
                if *r > m {
                    (*r, l.clone())
                } else {
                    (m, a)
                }
            });
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        let k = samples.len();
        let median_ratio = if k % 2 == 1 {
            samples[k / 2].0
        } else {
            0.5 * (samples[k / 2 - 1].0 + samples[k / 2].0)
        };
        Self {
            max_ratio,
            median_ratio,
            min_ratio: samples[0].0,
            argmax,
            samples: k,
        }
    }
}

/// Test family for empirical norm comparisons: every single-cell
/// indicator, the indicator of the tent over every distinct ball, and
/// `trials` seeded random functions with entries in `[-1, 1)`.
pub fn test_family(space: &Space, grid: &TimeGrid, alpha: f64, trials: usize, seed: u64) -> Result<Vec<(String, HalfSpaceFunction)>> {
    let n = space.len();
    let slabs = grid.slabs();
    let mut out = Vec::new();
    for j in 0..slabs {
        for i in 0..n {
            let mut f = HalfSpaceFunction::zeros(slabs, n);
            f.set(j, i, 1.0);
            out.push((format!("cell(j={j},{})", space.ids()[i]), f));
        }
    }
    for ball in space.enumerate_distinct_balls() {
        let tent = tent_mask(space, grid, &ball.members(space), alpha)?;
        if !tent.is_empty() {
            out.push((
                format!("tent(B({},{}))", space.ids()[ball.center], ball.radius),
                HalfSpaceFunction::indicator(&tent),
            ));
        }
    }
    let mut rng = sample::rng(seed);
    for t in 0..trials {
        out.push((format!("random#{t}"), sample::uniform_function(&mut rng, slabs, n, -1.0, 1.0)));
    }
    Ok(out)
}

fn check_finite_exponents(p: f64, q: f64) -> Result<()> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(invalid("p", format!("must lie in (0, inf), got {p}")));
    }
    if !(q > 0.0 && q.is_finite()) {
        return Err(invalid("q", format!("must lie in (0, inf), got {q}")));
    }
    Ok(())
}

/// Empirical change-of-aperture constants.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ApertureStats {
    /// `‖f‖_{T^{p,q,β}} / ‖f‖_{T^{p,q,α}}` over the test family.
    pub ratio: RatioStats,
    /// `sup_{y,j} (V(y, max(α,β) τ_j) / V(y, min(α,β) τ_j))^m` with `m` the
    /// least integer such that `m p, m q > 1`.
    pub volume_factor: f64,
    pub exponent_m: u32,
}

#[allow(clippy::too_many_arguments)]
pub fn aperture_ratio(
    space: &Space,
    grid: &TimeGrid,
    p: f64,
    q: f64,
    alpha: f64,
    beta: f64,
    trials: usize,
    seed: u64,
) -> Result<ApertureStats> {
    check_finite_exponents(p, q)?;
    require_positive("alpha", alpha)?;
    require_positive("beta", beta)?;
    let v = AVariant::default();
    let mut samples = Vec::new();
    for (label, f) in test_family(space, grid, alpha.min(beta), trials, seed)? {
        let na = tent_norm(space, grid, &f, p, q, alpha, v)?;
        let nb = tent_norm(space, grid, &f, p, q, beta, v)?;
        if na > 0.0 && nb > 0.0 {
            samples.push((nb / na, label));
        }
    }
    let m = (1.0 / p.min(q)).floor() as u32 + 1;
    let (lo, hi) = (alpha.min(beta), alpha.max(beta));
    let mut factor = 1.0f64;
    for &tau in grid.representatives() {
        for y in 0..space.len() {
            let r = space.volume_unchecked(y, hi * tau) / space.volume_unchecked(y, lo * tau);
            factor = factor.max(r);
        }
    }
    Ok(ApertureStats {
        ratio: RatioStats::from_samples(samples),
        volume_factor: factor.powi(m as i32),
        exponent_m: m,
    })
}

/// Norm ratio between two Lusin normalisations.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VariantPairStats {
    pub numerator: String,
    pub denominator: String,
    pub ratio: RatioStats,
}

/// `‖f‖_{v1} / ‖f‖_{v2}` over the test family, for every ordered pair of
/// distinct variants.
pub fn variant_ratio(
    space: &Space,
    grid: &TimeGrid,
    p: f64,
    q: f64,
    alpha: f64,
    trials: usize,
    seed: u64,
) -> Result<Vec<VariantPairStats>> {
    check_finite_exponents(p, q)?;
    require_positive("alpha", alpha)?;
    let family = test_family(space, grid, alpha, trials, seed)?;
    let mut norms: Vec<Vec<f64>> = Vec::with_capacity(family.len());
    for (_, f) in &family {
        let mut row = Vec::with_capacity(4);
        for v in AVariant::ALL {
            let a = lusin_power(space, grid, f, q, alpha, v, None)?;
            row.push(crate::functionals::lp_of_powers(space, &a, p / q).powf(1.0 / p));
        }
        norms.push(row);
    }
    let mut out = Vec::new();
    for (a, va) in AVariant::ALL.iter().enumerate() {
        for (b, vb) in AVariant::ALL.iter().enumerate() {
            if a == b {
                continue;
            }
            let samples = family
                .iter()
                .zip(&norms)
                .filter(|(_, r)| r[a] > 0.0 && r[b] > 0.0)
                .map(|((label, _), r)| (r[a] / r[b], label.clone()))
                .collect();
            out.push(VariantPairStats {
                numerator: va.to_string(),
                denominator: vb.to_string(),
                ratio: RatioStats::from_samples(samples),
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tolerance::relative_defect;

    fn s3() -> Space {
        Space::from_coordinates(
            vec!["a".into(), "b".into(), "c".into()],
            vec![vec![0.0], vec![1.0], vec![3.0]],
            vec![1.0, 2.0, 0.5],
        )
        .unwrap()
    }

    fn grid() -> TimeGrid {
        TimeGrid::new(0.3, 1.7, 6).unwrap()
    }

    fn random_f(seed: u64) -> HalfSpaceFunction {
        sample::uniform_function(&mut sample::rng(seed), 6, 3, -1.0, 1.0)
    }

    #[test]
    fn one_point_embedding_is_identity() {
        let sp = Space::from_distances(vec!["p".into()], vec![vec![0.0]], vec![2.5]).unwrap();
        let g = TimeGrid::new(0.1, 2.0, 4).unwrap();
        let f = sample::uniform_function(&mut sample::rng(3), 4, 1, -1.0, 1.0);
        let t = embed_t(&sp, &g, &f, 0.4).unwrap();
        for j in 0..4 {
            assert_eq!(t.get(0, j, 0), f.get(j, 0));
        }
        assert_eq!(aperture_identity_defect(&sp, &g, &f, 1.0, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn pi_t_is_identity_at_aperture_scale() {
        let (sp, g) = (s3(), grid());
        let f = random_f(1);
        for alpha in [0.5, 1.0, 2.0] {
            let back = project_pi(&sp, &g, &embed_t(&sp, &g, &f, alpha).unwrap(), alpha, Scale::ApertureVolume).unwrap();
            for (a, b) in back.values().iter().zip(f.values()) {
                assert!((a - b).abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn unit_scale_pi_t_rescales_by_volume_ratio() {
        let (sp, g) = (s3(), grid());
        let f = random_f(2);
        let alpha = 2.0;
        let back = project_pi(&sp, &g, &embed_t(&sp, &g, &f, alpha).unwrap(), alpha, Scale::UnitVolume).unwrap();
        for j in 0..6 {
            for i in 0..3 {
                let tau = g.tau(j);
                let ratio = sp.volume(i, alpha * tau).unwrap() / sp.volume(i, tau).unwrap();
                assert!((back.get(j, i) - f.get(j, i) * ratio).abs() <= 1e-13);
            }
        }
    }

    #[test]
    fn isometry_matches_tent_norm() {
        let (sp, g) = (s3(), grid());
        let f = random_f(4);
        for (p, q) in [(2.0, 2.0), (0.7, 1.5), (3.0, 0.5)] {
            let t = embed_t(&sp, &g, &f, 1.3).unwrap();
            let mixed = mixed_norm(&sp, &g, &t, p, q, 1.3, Scale::ApertureVolume).unwrap();
            let tn = tent_norm(&sp, &g, &f, p, q, 1.3, AVariant::default()).unwrap();
            assert!(relative_defect(mixed, tn) <= 1e-13);
        }
    }

    #[test]
    fn adjointness_under_both_scales() {
        let (sp, g) = (s3(), grid());
        let f = random_f(5);
        let mut rng = sample::rng(6);
        let big_g = ConeFamily::from_fn(6, 3, |_, _, _| rand::Rng::gen_range(&mut rng, -1.0..1.0));
        for scale in [Scale::ApertureVolume, Scale::UnitVolume] {
            let lhs = family_pairing(&sp, &g, &embed_t(&sp, &g, &f, 1.5).unwrap(), &big_g, 1.5, scale).unwrap();
            let pi = project_pi(&sp, &g, &big_g, 1.5, scale).unwrap();
            let rhs = crate::functionals::pairing(&sp, &g, &f, &pi).unwrap();
            assert!((lhs - rhs).abs() <= 1e-13 * lhs.abs().max(1.0));
        }
    }

    #[test]
    fn aperture_ratio_trivial_when_equal() {
        let (sp, g) = (s3(), grid());
        let st = aperture_ratio(&sp, &g, 2.0, 2.0, 1.0, 1.0, 3, 1).unwrap();
        assert!(st.ratio.max_ratio == 1.0 && st.ratio.min_ratio == 1.0);
        assert_eq!(st.exponent_m, 1);
        let vs = variant_ratio(&sp, &g, 2.0, 2.0, 1.0, 2, 1).unwrap();
        assert_eq!(vs.len(), 12);
        assert!(vs.iter().all(|s| s.ratio.max_ratio.is_finite()));
    }
}
