//! Empirical audits of doubling, nice intersections and maximal-operator
//! bounds.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, require_positive, Result};
use crate::functionals::maximal;
use crate::sample;
use crate::space::Space;

fn check_radii(radii: &[f64]) -> Result<()> {
    if radii.is_empty() {
        return Err(invalid("radii", "need at least one radius"));
    }
    for &r in radii {
        require_positive("radius", r)?;
    }
    Ok(())
}

/// Powers of two from about the smallest positive distance up to half the
/// diameter.
pub fn dyadic_radii(space: &Space) -> Vec<f64> {
    let Some(d_min) = space.min_positive_distance() else {
        return vec![1.0];
    };
    let top = 0.5 * space.diameter();
    let mut r = 2f64.powi(d_min.log2().floor() as i32);
    let mut out = vec![r];
    while 2.0 * r <= top {
        r *= 2.0;
        out.push(r);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DoublingReport {
    pub constant: f64,
    pub argmax_point: String,
    pub argmax_radius: f64,
    /// `(r, max_x V(x, 2r) / V(x, r))` for each tested radius.
    pub per_radius: Vec<(f64, f64)>,
    /// Set when the per-radius maxima strictly increase over at least three
    /// radii: no bound is in sight at the scales tried.
    pub unbounded_at_tested_scales: bool,
}

pub fn doubling_constant(space: &Space, radii: &[f64]) -> Result<DoublingReport> {
    check_radii(radii)?;
    let mut per_radius = Vec::with_capacity(radii.len());
    let mut best = (f64::NEG_INFINITY, 0, radii[0]);
    for &r in radii {
        let mut m = f64::NEG_INFINITY;
        for x in 0..space.len() {
            let ratio = space.volume_unchecked(x, 2.0 * r) / space.volume_unchecked(x, r);
            if ratio > m {
                m = ratio;
            }
            if ratio > best.0 {
                best = (ratio, x, r);
            }
        }
        per_radius.push((r, m));
    }
    let increasing = per_radius.len() >= 3 && per_radius.windows(2).all(|w| w[1].1 > w[0].1);
    Ok(DoublingReport {
        constant: best.0,
        argmax_point: space.ids()[best.1].clone(),
        argmax_radius: best.2,
        per_radius,
        unbounded_at_tested_scales: increasing,
    })
}

/// Radii at which `r ↦ μ(B(x,αr) ∩ B(y,βr)) / V(x,αr)` takes every value it
/// attains: one point inside each interval between consecutive breakpoints
/// `d/α`, `d/β`, plus one below and one above them all.
pub fn ni_breakpoint_radii(space: &Space, alpha: f64, beta: f64) -> Result<Vec<f64>> {
    require_positive("alpha", alpha)?;
    require_positive("beta", beta)?;
    let mut bp: Vec<f64> = space
        .distinct_distances()
        .into_iter()
        .filter(|&d| d > 0.0)
        .flat_map(|d| [d / alpha, d / beta])
        .collect();
    bp.sort_by(f64::total_cmp);
    bp.dedup();
    let Some((&first, &last)) = bp.first().zip(bp.last()) else {
        return Ok(vec![1.0]);
    };
    let mut out = vec![0.5 * first];
    out.extend(bp.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    out.push(2.0 * last);
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NiReport {
    pub alpha: f64,
    pub beta: f64,
    pub constant: f64,
    pub argmin_x: String,
    pub argmin_y: String,
    pub argmin_radius: f64,
    /// `(r, infimum at r)`.
    pub per_radius: Vec<(f64, f64)>,
}

/// Infimum over the radii and all pairs with `d(x, y) < α r` of
/// `μ(B(x, α r) ∩ B(y, β r)) / V(x, α r)`.
pub fn ni_constant(space: &Space, alpha: f64, beta: f64, radii: &[f64]) -> Result<NiReport> {
    require_positive("alpha", alpha)?;
    require_positive("beta", beta)?;
    check_radii(radii)?;
    let n = space.len();
    let mut per_radius = Vec::with_capacity(radii.len());
    let mut best = (f64::INFINITY, 0, 0, radii[0]);
    for &r in radii {
        let (ra, rb) = (alpha * r, beta * r);
        // Per-vertex minimum, reduced in point order below.
        let rows: Vec<(f64, usize)> = (0..n)
            .into_par_iter()
            .map(|x| {
                let ball = space.ball_points(x, ra);
                let vx = space.volume_unchecked(x, ra);
                let mut m = (f64::INFINITY, x);
                let mut ys: Vec<usize> = ball.to_vec();
                ys.sort_unstable();
                for y in ys {
                    let row = space.distance_row(y);
                    let inter: f64 = ball
                        .iter()
                        .filter(|&&z| row[z] < rb)
                        .map(|&z| space.weight(z))
                        .sum();
                    let ratio = inter / vx;
                    if ratio < m.0 {
                        m = (ratio, y);
                    }
                }
                m
            })
            .collect();
        let mut at_r = f64::INFINITY;
        for (x, &(v, y)) in rows.iter().enumerate() {
            at_r = at_r.min(v);
            if v < best.0 {
                best = (v, x, y, r);
            }
        }
        per_radius.push((r, at_r));
    }
    Ok(NiReport {
        alpha,
        beta,
        constant: best.0,
        argmin_x: space.ids()[best.1].clone(),
        argmin_y: space.ids()[best.2].clone(),
        argmin_radius: best.3,
        per_radius,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HlReport {
    pub exponent: f64,
    pub ratio: f64,
    pub argmax: String,
    pub trials: usize,
    pub seed: u64,
}

fn lr_norm(space: &Space, v: &[f64], r: f64) -> f64 {
    v.iter()
        .zip(space.weights())
        .map(|(a, w)| a.abs().powf(r) * w)
        .sum::<f64>()
        .powf(1.0 / r)
}

/// Lower bound for `‖M‖_{L^r → L^r}` from single-point indicators, distinct
/// ball indicators and `trials` seeded nonnegative functions.
pub fn hl_ratio(space: &Space, r_exponent: f64, trials: usize, seed: u64) -> Result<HlReport> {
    if !(r_exponent > 1.0 && r_exponent.is_finite()) {
        return Err(invalid("r", format!("must be > 1, got {r_exponent}")));
    }
    if trials == 0 {
        return Err(invalid("trials", "need at least one trial"));
    }
    let n = space.len();
    let mut family: Vec<(String, Vec<f64>)> = Vec::new();
    for i in 0..n {
        let mut f = vec![0.0; n];
        f[i] = 1.0;
        family.push((format!("point({})", space.ids()[i]), f));
    }
    for ball in space.enumerate_distinct_balls() {
        let members = ball.members(space);
        if members.count() > 1 {
            let f = (0..n).map(|i| if members.contains(i) { 1.0 } else { 0.0 }).collect();
            family.push((format!("ball({},{})", space.ids()[ball.center], ball.radius), f));
        }
    }
    let mut rng = sample::rng(seed);
    for t in 0..trials {
        family.push((format!("random#{t}"), sample::uniform_values(&mut rng, n, 0.0, 1.0)));
    }
    let ratios: Vec<f64> = family
        .par_iter()
        .map(|(_, f)| {
            let m = maximal(space, f).expect("finite inputs");
            lr_norm(space, &m, r_exponent) / lr_norm(space, f, r_exponent)
        })
        .collect();
    let (k, &ratio) = ratios
        .iter()
        .enumerate()
        .fold((0, &f64::NEG_INFINITY), |acc, (k, r)| if *r > *acc.1 { (k, r) } else { acc });
    Ok(HlReport {
        exponent: r_exponent,
        ratio,
        argmax: family[k].0.clone(),
        trials,
        seed,
    })
}

/// `sup_{z, r > 0} V(z, (2α + 1) r) / V(z, r)`, computed exactly.
///
/// `V(z, ·)` is constant on each `(d_k, d_{k+1}]` between consecutive
/// distinct distances, and the numerator is nondecreasing, so each interval
/// contributes its right end. Past the largest distance the ratio is 1.
pub fn stopping_density_constant(space: &Space, alpha: f64) -> Result<f64> {
    require_positive("alpha", alpha)?;
    let k = 2.0 * alpha + 1.0;
    let mut best = 1.0f64;
    for z in 0..space.len() {
        let groups: Vec<f64> = space.distance_groups(z).map(|(d, _)| d).collect();
        for g in 0..groups.len().saturating_sub(1) {
            let r = groups[g + 1];
            best = best.max(space.volume_unchecked(z, k * r) / space.ball_mass(z, g));
        }
    }
    Ok(best)
}

/// Geometry audit of one space, as emitted by the command line.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeometryAudit {
    pub kind: String,
    pub params: serde_json::Value,
    pub doubling: DoublingReport,
    pub ni: Vec<NiReport>,
    pub hl: Vec<HlReport>,
    pub seed: u64,
}

/// Spaces up to this size get exact NI infima over all radii; larger ones
/// use dyadic radii.
pub const NI_EXACT_MAX_POINTS: usize = 128;

pub struct AuditPlan {
    pub doubling_radii: Option<Vec<f64>>,
    pub apertures: Vec<(f64, f64)>,
    pub ni_radii: Option<Vec<f64>>,
    pub hl_exponents: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
}

impl Default for AuditPlan {
    fn default() -> Self {
        Self {
            doubling_radii: None,
            apertures: vec![(1.0, 1.0)],
            ni_radii: None,
            hl_exponents: vec![1.5, 2.0, 4.0],
            trials: 16,
            seed: 1,
        }
    }
}

pub fn audit_space(space: &Space, kind: &str, params: serde_json::Value, plan: &AuditPlan) -> Result<GeometryAudit> {
    let dyadic = dyadic_radii(space);
    let doubling = doubling_constant(space, plan.doubling_radii.as_deref().unwrap_or(&dyadic))?;
    let mut ni = Vec::new();
    for &(a, b) in &plan.apertures {
        let radii = match &plan.ni_radii {
            Some(r) => r.clone(),
            None if space.len() <= NI_EXACT_MAX_POINTS => ni_breakpoint_radii(space, a, b)?,
            None => dyadic.clone(),
        };
        ni.push(ni_constant(space, a, b, &radii)?);
    }
    let hl = plan
        .hl_exponents
        .iter()
        .map(|&r| hl_ratio(space, r, plan.trials, plan.seed))
        .collect::<Result<_>>()?;
    Ok(GeometryAudit {
        kind: kind.to_string(),
        params,
        doubling,
        ni,
        hl,
        seed: plan.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::{generate_space, SpaceKind, ZooParams};

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

    #[test]
    fn doubling_examples() {
        let d = doubling_constant(&one_point(), &[0.1, 1.0, 10.0]).unwrap();
        assert_eq!(d.constant, 1.0);
        assert!(!d.unbounded_at_tested_scales);
        let d = doubling_constant(&s3(), &[0.6]).unwrap();
        assert_eq!(d.constant, 2.0);
        assert!(doubling_constant(&s3(), &[]).is_err());
        let g = generate_space(SpaceKind::UniformGrid1d, &ZooParams::new(64, 1.0)).unwrap();
        let d = doubling_constant(&g, &dyadic_radii(&g)).unwrap();
        assert!(d.constant <= 3.0, "{}", d.constant);
    }

    #[test]
    fn ni_examples() {
        let r = ni_constant(&one_point(), 1.0, 1.0, &[1.0]).unwrap();
        assert_eq!(r.constant, 1.0);
        let sp = s3();
        let radii = ni_breakpoint_radii(&sp, 1.0, 0.5).unwrap();
        let r = ni_constant(&sp, 1.0, 0.5, &radii).unwrap();
        assert!((0.0..=1.0).contains(&r.constant));
        assert!(ni_constant(&sp, 0.0, 1.0, &[1.0]).is_err());
    }

    #[test]
    fn ni_breakpoints_give_exact_infimum() {
        let sp = s3();
        let radii = ni_breakpoint_radii(&sp, 1.0, 0.7).unwrap();
        let exact = ni_constant(&sp, 1.0, 0.7, &radii).unwrap().constant;
        let fine: Vec<f64> = (1..2000).map(|k| k as f64 * 0.005).collect();
        let sampled = ni_constant(&sp, 1.0, 0.7, &fine).unwrap().constant;
        assert_eq!(exact, sampled);
    }

    #[test]
    fn hl_examples() {
        assert_eq!(hl_ratio(&one_point(), 2.0, 3, 1).unwrap().ratio, 1.0);
        let r = hl_ratio(&s3(), 2.0, 5, 1).unwrap();
        assert!(r.ratio >= 1.0);
        assert!(hl_ratio(&s3(), 1.0, 5, 1).is_err());
    }

    #[test]
    fn stopping_density_constant_matches_fine_scan() {
        let sp = s3();
        let c = stopping_density_constant(&sp, 1.0).unwrap();
        let mut scan = 1.0f64;
        for k in 1..4000 {
            let r = k as f64 * 0.001;
            for z in 0..3 {
                scan = scan.max(sp.volume(z, 3.0 * r).unwrap() / sp.volume(z, r).unwrap());
            }
        }
        assert_eq!(c, scan);
    }
}
