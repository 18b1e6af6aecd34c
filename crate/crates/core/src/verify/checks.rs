use rand::Rng;

use super::{CheckConfig, Outcome};
use crate::audit;
use crate::error::{invalid, Result};
use crate::functionals::{self, AVariant};
use crate::halfspace::{
    beta_constants, cone_mask, density_via_maximal, gamma_density_set, grid_ties, integrate, minimal_tent as min_tent,
    shadow, tent_mask, HalfSpaceFunction, RegionMask, TimeGrid,
};
use crate::operators::{self, ConeFamily, Scale};
use crate::sample::{self, SeededRng};
use crate::space::{Ball, PointSet, Space};
use crate::tolerance::{inequality_excess, relative_defect, IDENTITY_REL, INEQUALITY_SLACK, LOG_CONVEXITY_REL, TIE_REL};

/// Pairs of subsets are enumerated exhaustively up to this many points.
const PAIR_EXHAUSTIVE_POINTS: usize = 5;

fn ties_reason(space: &Space, grid: &TimeGrid, alpha: f64) -> Option<String> {
    let ties = grid_ties(space, grid, alpha);
    ties.first().map(|(j, d)| {
        format!(
            "grid ties: alpha*tau_{j} coincides with distance {d} ({} slab(s)); strict predicates are not complementary",
            ties.len()
        )
    })
}

fn subsets(n: usize, cfg: &CheckConfig, rng: &mut SeededRng) -> Vec<PointSet> {
    if n <= cfg.exhaustive_points && n < 64 {
        (0..1u64 << n).map(|m| PointSet::from_mask(n, m)).collect()
    } else {
        (0..cfg.subset_samples)
            .map(|_| PointSet::from_bits((0..n).map(|_| rng.gen_bool(0.5)).collect()))
            .collect()
    }
}

fn random_mask(rng: &mut SeededRng, slabs: usize, n: usize, density: f64) -> RegionMask {
    let mut m = RegionMask::from_bits(slabs, n, (0..slabs * n).map(|_| rng.gen_bool(density)).collect())
        .expect("shape by construction");
    if m.is_empty() {
        m.set(rng.gen_range(0..slabs), rng.gen_range(0..n), true);
    }
    m
}

/// Single cells, then `trials` random nonempty masks.
fn test_masks(space: &Space, grid: &TimeGrid, cfg: &CheckConfig, rng: &mut SeededRng) -> Vec<RegionMask> {
    let (slabs, n) = (grid.slabs(), space.len());
    let mut out: Vec<RegionMask> = (0..slabs)
        .flat_map(|j| (0..n).map(move |i| RegionMask::from_cells(slabs, n, [(j, i)])))
        .collect();
    for _ in 0..cfg.trials {
        let density = rng.gen_range(0.05..0.5);
        out.push(random_mask(rng, slabs, n, density));
    }
    out
}

fn random_f(rng: &mut SeededRng, space: &Space, grid: &TimeGrid) -> HalfSpaceFunction {
    sample::uniform_function(rng, grid.slabs(), space.len(), -1.0, 1.0)
}

fn conjugate(p: f64) -> f64 {
    p / (p - 1.0)
}

pub(super) fn avgtrick(space: &Space, grid: &TimeGrid, cfg: &CheckConfig) -> Result<Outcome> {
    let mut rng = sample::rng(cfg.seed);
    let mut worst = 0.0f64;
    for _ in 0..cfg.trials {
        let phi = sample::sparse_nonnegative(&mut rng, grid.slabs(), space.len());
        let a = functionals::lusin_power(space, grid, &phi, 1.0, cfg.alpha, AVariant::default(), None)?;
        let lhs: f64 = a.iter().zip(space.weights()).map(|(v, w)| v * w).sum();
        let rhs = integrate(space, grid, &phi, None)?;
        worst = worst.max(relative_defect(lhs, rhs));
    }
    Ok(Outcome::new(worst, IDENTITY_REL))
}

pub(super) fn lp_coincidence(space: &Space, grid: &TimeGrid, cfg: &CheckConfig) -> Result<Outcome> {
    let mut rng = sample::rng(cfg.seed);
    let p = cfg.p;
    let mut worst = 0.0f64;
    for _ in 0..cfg.trials {
        let f = random_f(&mut rng, space, grid);
        let norm = functionals::tent_norm(space, grid, &f, p, p, cfg.alpha, AVariant::default())?;
        let direct = integrate(space, grid, &f.map(|v| v.abs().powf(p)), None)?.powf(1.0 / p);
        worst = worst.max(relative_defect(norm, direct));
    }
    Ok(Outcome::new(worst, IDENTITY_REL).with("p", p))
}

pub(super) fn support_rule(space: &Space, grid: &TimeGrid, cfg: &CheckConfig) -> Result<Outcome> {
    let mut rng = sample::rng(cfg.seed);
    let mut violations = 0usize;
    let masks = test_masks(space, grid, cfg, &mut rng);
    for c in &masks {
        let f = random_f(&mut rng, space, grid).restrict(c)?;
        let a = functionals::lusin_a(space, grid, &f, cfg.q, cfg.alpha, AVariant::default(), None)?;
        let s = shadow(space, grid, c, cfg.alpha)?;
        violations += (0..space.len()).filter(|&x| !s.contains(x) && a[x] != 0.0).count();
    }
    Ok(Outcome::new(violations as f64, 0.0).with("masks", masks.len() as f64))
}

pub(super) fn pi_t_identity(space: &Space, grid: &TimeGrid, cfg: &CheckConfig) -> Result<Outcome> {
    let mut rng = sample::rng(cfg.seed);
    let (n, slabs, a) = (space.len(), grid.slabs(), cfg.alpha);
    let (mut ident, mut idem, mut adj) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..cfg.trials {
        let f = random_f(&mut rng, space, grid);
        let tf = operators::embed_t(space, grid, &f, a)?;
        let back = operators::project_pi(space, grid, &tf, a, Scale::ApertureVolume)?;
        let diff = back.zip_with(&f, |x, y| x - y)?.max_abs();
        ident = ident.max(diff / f.max_abs().max(f64::MIN_POSITIVE));

        let big_g = ConeFamily::from_fn(slabs, n, |_, _, _| rng.gen_range(-1.0..1.0));
        let pg = operators::projection_p(space, grid, &big_g, a, Scale::ApertureVolume)?;
        let ppg = operators::projection_p(space, grid, &pg, a, Scale::ApertureVolume)?;
        idem = idem.max(ppg.max_abs_diff(&pg)? / pg.max_abs().max(f64::MIN_POSITIVE));

        let abs_tf = operators::embed_t(space, grid, &f.map(f64::abs), a)?;
        let abs_g = ConeFamily::from_fn(slabs, n, |x, j, i| big_g.get(x, j, i).abs());
        for scale in [Scale::ApertureVolume, Scale::UnitVolume] {
            let lhs = operators::family_pairing(space, grid, &tf, &big_g, a, scale)?;
            let rhs = functionals::pairing(space, grid, &f, &operators::project_pi(space, grid, &big_g, a, scale)?)?;
            let size = operators::family_pairing(space, grid, &abs_tf, &abs_g, a, scale)?;
            adj = adj.max((lhs - rhs).abs() / size.max(f64::MIN_POSITIVE));
        }
    }
    Ok(Outcome::new(ident.max(idem).max(adj), IDENTITY_REL)
        .with("pi_t_defect", ident)
        .with("idempotence_defect", idem)
        .with("adjointness_defect", adj))
}

pub(super) fn pt_identity(space: &Space, grid: &TimeGrid, cfg: &CheckConfig) -> Result<Outcome> {
    let mut rng = sample::rng(cfg.seed);
    let mut worst = 0.0f64;
    for _ in 0..cfg.trials {
        let f = random_f(&mut rng, space, grid);
        let scale = f.max_abs().max(f64::MIN_POSITIVE);
        for (a, b) in [(cfg.alpha, cfg.beta), (cfg.beta, cfg.alpha)] {
            worst = worst.max(operators::aperture_identity_defect(space, grid, &f, a, b)? / scale);
        }
    }
    Ok(Outcome::new(worst, IDENTITY_REL).with("beta", cfg.beta))
}

pub(super) fn density_identity(space: &Space, _grid: &TimeGrid, cfg: &CheckConfig) -> Result<Outcome> {
    let mut rng = sample::rng(cfg.seed);
    let sets = subsets(space.len(), cfg, &mut rng);
    let gamma = cfg.gamma;
    let (mut mismatches, mut tied) = (0usize, 0usize);
    for o in &sets {
        let direct = gamma_density_set(space, o, gamma)?.o_star;
        let via_m = density_via_maximal(space, o, gamma)?;
        for x in 0..space.len() {
            if direct.contains(x) != via_m.contains(x) {
                // A ball average sitting on the threshold can round either way.
                if near_threshold(space, o, gamma, x) {
                    tied += 1;
                } else {
                    mismatches += 1;
                }
            }
        }
    }
    Ok(Outcome::new(mismatches as f64, 0.0)
        .with("sets", sets.len() as f64)
        .with("threshold_ties", tied as f64))
}

fn near_threshold(space: &Space, open: &PointSet, gamma: f64, x: usize) -> bool {
    space.enumerate_distinct_balls().iter().any(|b| {
        let m = b.members(space);
        if !m.contains(x) {
            return false;
        }
        let f: f64 = m.iter().filter(|&p| !open.contains(p)).map(|p| space.weight(p)).sum();
        relative_defect(f / m.mass(space), gamma) <= TIE_REL
    })
}

pub(super) fn tent_cone_duality(space: &Space, grid: &TimeGrid, cfg: &CheckConfig) -> Result<Outcome> {
    if let Some(why) = ties_reason(space, grid, cfg.alpha) {
        return Ok(Outcome::skipped(why));
    }
    let mut rng = sample::rng(cfg.seed);
    let cones: Vec<RegionMask> = (0..space.len())
        .map(|x| cone_mask(space, grid, x, cfg.alpha, None))
        .collect::<Result<_>>()?;
    let sets = subsets(space.len(), cfg, &mut rng);
    let mut violations = 0usize;
    for o in &sets {
        let tent = tent_mask(space, grid, o, cfg.alpha)?;
        let mut union = RegionMask::empty(grid.slabs(), space.len());
        for x in o.complement().iter() {
            union = union.union(&cones[x]);
        }
        if tent != union.complement() {
            violations += 1;
        }
    }
    Ok(Outcome::new(violations as f64, 0.0).with("sets", sets.len() as f64))
}

pub(super) fn cptest_bounds(space: &Space, grid: &TimeGrid, cfg: &CheckConfig) -> Result<Outcome> {
    let (p, q, a) = (cfg.p, cfg.q, cfg.alpha);
    let mut rng = sample::rng(cfg.seed);
    let vol = functionals::volume_table(space, grid, a);
    let n = space.len();
    let lw = grid.log_weight();
    let (mut worst, mut upper_ratio, mut lower_ratio) = (f64::NEG_INFINITY, 0.0f64, 0.0f64);
    for k in test_masks(space, grid, cfg, &mut rng) {
        let (mut c0, mut c1) = (f64::INFINITY, 0.0f64);
        for (j, i) in k.cells() {
            c0 = c0.min(vol[j * n + i]);
            c1 = c1.max(vol[j * n + i]);
        }
        let s_mass = shadow(space, grid, &k, a)?.mass(space);
        let proj = k.projection();
        let inv_w: f64 = proj.iter().map(|y| space.weight(y).powf(-q / p)).sum();
        let f = random_f(&mut rng, space, grid).restrict(&k)?;
        let lq: f64 = (lw * k.cells().map(|(j, i)| f.get(j, i).abs().powf(q) * space.weight(i)).sum::<f64>()).powf(1.0 / q);
        let tn = functionals::tent_norm(space, grid, &f, p, q, a, AVariant::default())?;
        let upper = c0.powf(-1.0 / q) * s_mass.powf(1.0 / p) * lq;
        let lower = (c1 * inv_w).powf(1.0 / q) * tn;
        worst = worst.max(inequality_excess(tn, upper)).max(inequality_excess(lq, lower));
        if lq > 0.0 {
            upper_ratio = upper_ratio.max(tn / lq);
            lower_ratio = lower_ratio.max(lq / tn);
        }
    }
    Ok(Outcome::new(worst, INEQUALITY_SLACK)
        .with("max_tent_over_lq", upper_ratio)
        .with("max_lq_over_tent", lower_ratio))
}

pub(super) fn integration_lemma(space: &Space, grid: &TimeGrid, cfg: &CheckConfig) -> Result<Outcome> {
    let mut rng = sample::rng(cfg.seed);
    let a = cfg.alpha;
    let n = space.len();
    let lw = grid.log_weight();
    let sets = subsets(n, cfg, &mut rng);
    let (mut eq_defect, mut excess) = (0.0f64, f64::NEG_INFINITY);
    for _ in 0..cfg.trials.max(1) {
        let phi = sample::sparse_nonnegative(&mut rng, grid.slabs(), n);
        // Per-vertex cone integrals with plain dt (weight τ_j ln σ).
        let per_x: Vec<f64> = (0..n)
            .map(|x| {
                let mut s = 0.0;
                for j in 0..grid.slabs() {
                    let tau = grid.tau(j);
                    let row: f64 = (0..n)
                        .filter(|&i| space.distance(x, i) < a * tau)
                        .map(|i| phi.get(j, i) * space.weight(i))
                        .sum();
                    s += row * tau * lw;
                }
                s
            })
            .collect();
        let cones: Vec<RegionMask> = (0..n).map(|x| cone_mask(space, grid, x, a, None)).collect::<Result<_>>()?;
        for f in &sets {
            let lhs: f64 = f.iter().map(|x| space.weight(x) * per_x[x]).sum();
            let mut union = RegionMask::empty(grid.slabs(), n);
            for x in f.iter() {
                union = union.union(&cones[x]);
            }
            let rhs: f64 = union
                .cells()
                .map(|(j, i)| {
                    let tau = grid.tau(j);
                    phi.get(j, i) * space.volume_unchecked(i, a * tau) * space.weight(i) * tau * lw
                })
                .sum();
            if f.count() == n {
                eq_defect = eq_defect.max(relative_defect(lhs, rhs));
            } else if rhs > 0.0 || lhs > 0.0 {
                excess = excess.max(inequality_excess(lhs, rhs));
            }
        }
    }
    Ok(Outcome::new(eq_defect.max(excess), IDENTITY_REL)
        .with("equality_defect", eq_defect)
        .with("inequality_excess", excess)
        .with("sets", sets.len() as f64))
}

pub(super) fn duality_holder(space: &Space, grid: &TimeGrid, cfg: &CheckConfig) -> Result<Outcome> {
    let (p, q, a) = (cfg.p, cfg.q, cfg.alpha);
    if !(p > 1.0 && p.is_finite() && q > 1.0 && q.is_finite()) {
        return Err(invalid("p, q", format!("duality needs p, q in (1, inf), got ({p}, {q})")));
    }
    let (pc, qc) = (conjugate(p), conjugate(q));
    let v = AVariant::default();
    let mut rng = sample::rng(cfg.seed);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..cfg.trials {
        let f = random_f(&mut rng, space, grid);
        let g = random_f(&mut rng, space, grid);
        let pair = functionals::pairing(space, grid, &f, &g)?.abs();
        let af = functionals::lusin_a(space, grid, &f, q, a, v, None)?;
        let ag = functionals::lusin_a(space, grid, &g, qc, a, v, None)?;
        let middle: f64 = (0..space.len()).map(|x| af[x] * ag[x] * space.weight(x)).sum();
        let nf = functionals::tent_norm(space, grid, &f, p, q, a, v)?;
        let ng = functionals::tent_norm(space, grid, &g, pc, qc, a, v)?;
        worst = worst
            .max(inequality_excess(pair, middle))
            .max(inequality_excess(middle, nf * ng));
    }
    Ok(Outcome::new(worst, INEQUALITY_SLACK).with("p", p).with("q", q))
}

pub(super) fn aperture_equiv(space: &Space, grid: &TimeGrid, cfg: &CheckConfig) -> Result<Outcome> {
    // With p = q both norms are the L^p norm on the half-space, so mixed
    // exponents are added to make the comparison informative.
    let mut exponents = vec![(cfg.p, cfg.q), (1.0, 2.0), (4.0, 2.0), (2.0, 1.0)];
    exponents.dedup();
    let mut out = Outcome::new(0.0, 0.0).with("beta", cfg.beta);
    let mut overall = 1.0f64;
    for (p, q) in exponents {
        let st = operators::aperture_ratio(space, grid, p, q, cfg.alpha, cfg.beta, cfg.trials, cfg.seed)?;
        if !(st.ratio.max_ratio.is_finite() && st.ratio.min_ratio > 0.0) {
            out.defect = f64::INFINITY;
        }
        overall = overall.max(st.ratio.max_ratio).max(1.0 / st.ratio.min_ratio);
        out = out
            .with(&format!("max_ratio(p={p},q={q})"), st.ratio.max_ratio)
            .with(&format!("min_ratio(p={p},q={q})"), st.ratio.min_ratio)
            .with(&format!("volume_factor(p={p},q={q})"), st.volume_factor);
    }
    Ok(out.with("equivalence_constant", overall))
}

pub(super) fn c_le_maximal(space: &Space, grid: &TimeGrid, cfg: &CheckConfig) -> Result<Outcome> {
    let mut rng = sample::rng(cfg.seed);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..cfg.trials {
        let f = random_f(&mut rng, space, grid);
        let c = functionals::carleson_power(space, grid, &f, cfg.q, cfg.alpha)?;
        let a = functionals::lusin_power(space, grid, &f, cfg.q, cfg.alpha, AVariant::default(), None)?;
        let m = functionals::maximal(space, &a)?;
        for x in 0..space.len() {
            worst = worst.max(inequality_excess(c[x], m[x]));
        }
    }
    Ok(Outcome::new(worst, INEQUALITY_SLACK).with("q", cfg.q))
}

/// `(C_{X,α}, M, 1 - M^{-q} C_{X,α})` for the stopping-time checks.
fn stopping_constants(space: &Space, cfg: &CheckConfig) -> Result<(f64, f64, f64)> {
    if cfg.q.is_nan() || cfg.q < 1.0 {
        return Err(invalid("q", format!("stopping heights need q >= 1, got {}", cfg.q)));
    }
    let c = audit::stopping_density_constant(space, cfg.alpha)?;
    let m = cfg.big_m.unwrap_or(2.0 * c.powf(1.0 / cfg.q));
    Ok((c, m, 1.0 - m.powf(-cfg.q) * c))
}

pub(super) fn stopfun_density(space: &Space, grid: &TimeGrid, cfg: &CheckConfig) -> Result<Outcome> {
    let (c, m, frac) = stopping_constants(space, cfg)?;
    let mut rng = sample::rng(cfg.seed);
    // For each distinct ball the hardest radius is the right end of the
    // interval realising it.
    let mut balls: Vec<(PointSet, f64)> = Vec::new();
    for z in 0..space.len() {
        let dists: Vec<f64> = space.distance_groups(z).map(|(d, _)| d).collect();
        for g in 0..dists.len() {
            let r = dists.get(g + 1).copied().unwrap_or_else(|| space.ball_radius(z, g));
            balls.push((Ball { center: z, radius: r }.members(space), r));
        }
    }
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..cfg.trials {
        let g = random_f(&mut rng, space, grid);
        let h = functionals::stopping_height(space, grid, &g, cfg.q, m, cfg.alpha)?;
        for (members, r) in &balls {
            let mass = members.mass(space);
            let good: f64 = members.iter().filter(|&x| h[x] >= *r).map(|x| space.weight(x)).sum();
            worst = worst.max(inequality_excess(frac * mass, good));
        }
    }
    Ok(Outcome::new(worst, INEQUALITY_SLACK)
        .with("C_X_alpha", c)
        .with("M", m)
        .with("density_fraction", frac))
}

pub(super) fn stopfun_corollary(space: &Space, grid: &TimeGrid, cfg: &CheckConfig) -> Result<Outcome> {
    if let Some(why) = ties_reason(space, grid, cfg.alpha) {
        return Ok(Outcome::skipped(why));
    }
    let (c, m, frac) = stopping_constants(space, cfg)?;
    let k_prime = 1.0 / frac;
    let (a, n, lw) = (cfg.alpha, space.len(), grid.log_weight());
    let mut rng = sample::rng(cfg.seed);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..cfg.trials {
        let g = random_f(&mut rng, space, grid);
        let h = functionals::stopping_height(space, grid, &g, cfg.q, m, a)?;
        let phi = sample::sparse_nonnegative(&mut rng, grid.slabs(), n);
        let mut lhs = 0.0;
        for j in 0..grid.slabs() {
            let tau = grid.tau(j);
            for i in 0..n {
                lhs += phi.get(j, i) * space.volume_unchecked(i, a * tau) * space.weight(i) * tau * lw;
            }
        }
        let mut rhs = 0.0;
        for (x, &hx) in h.iter().enumerate() {
            let cone = cone_mask(space, grid, x, a, Some(hx / a))?;
            let s: f64 = cone
                .cells()
                .map(|(j, i)| phi.get(j, i) * space.weight(i) * grid.tau(j) * lw)
                .sum();
            rhs += space.weight(x) * s;
        }
        worst = worst.max(inequality_excess(lhs, k_prime * rhs));
    }
    Ok(Outcome::new(worst, INEQUALITY_SLACK)
        .with("C_X_alpha", c)
        .with("M", m)
        .with("K_prime", k_prime))
}

pub(super) fn logconvexity(space: &Space, grid: &TimeGrid, cfg: &CheckConfig) -> Result<Outcome> {
    let [(p0, q0), (p1, q1)] = cfg.logconvex_endpoints;
    let v = AVariant::default();
    let mut rng = sample::rng(cfg.seed);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..cfg.trials {
        let f = random_f(&mut rng, space, grid);
        let n0 = functionals::tent_norm(space, grid, &f, p0, q0, cfg.alpha, v)?;
        let n1 = functionals::tent_norm(space, grid, &f, p1, q1, cfg.alpha, v)?;
        for &theta in &cfg.thetas {
            let p = 1.0 / ((1.0 - theta) / p0 + theta / p1);
            let q = 1.0 / ((1.0 - theta) / q0 + theta / q1);
            let mid = functionals::tent_norm(space, grid, &f, p, q, cfg.alpha, v)?;
            worst = worst.max(inequality_excess(mid, n0.powf(1.0 - theta) * n1.powf(theta)));
        }
    }
    Ok(Outcome::new(worst, LOG_CONVEXITY_REL))
}

pub(super) fn infty_est(space: &Space, grid: &TimeGrid, cfg: &CheckConfig) -> Result<Outcome> {
    let (q, a) = (cfg.q, cfg.alpha);
    let lw = grid.log_weight();
    let mut rng = sample::rng(cfg.seed);
    let mut worst = f64::NEG_INFINITY;
    for k in test_masks(space, grid, cfg, &mut rng) {
        let betas = beta_constants(space, grid, &k, a)?;
        let f = random_f(&mut rng, space, grid);
        let lq = (lw * k.cells().map(|(j, i)| f.get(j, i).abs().powf(q) * space.weight(i)).sum::<f64>()).powf(1.0 / q);
        let inf_f = functionals::tent_norm(space, grid, &f, f64::INFINITY, q, a, AVariant::default())?;
        let inf_kf = functionals::tent_norm(space, grid, &f.restrict(&k)?, f64::INFINITY, q, a, AVariant::default())?;
        worst = worst
            .max(inequality_excess(lq, betas.beta1.powf(1.0 / q) * inf_f))
            .max(inequality_excess(inf_kf, betas.beta0.powf(-1.0 / q) * lq));
    }
    Ok(Outcome::new(worst, INEQUALITY_SLACK))
}

pub(super) fn tent_inclusion(space: &Space, grid: &TimeGrid, cfg: &CheckConfig) -> Result<Outcome> {
    let n = space.len();
    let a = cfg.alpha;
    let mut rng = sample::rng(cfg.seed);
    let pairs: Vec<(PointSet, PointSet)> = if n <= PAIR_EXHAUSTIVE_POINTS {
        let all: Vec<PointSet> = (0..1u64 << n).map(|m| PointSet::from_mask(n, m)).collect();
        all.iter()
            .flat_map(|x| all.iter().map(move |y| (x.clone(), y.clone())))
            .collect()
    } else {
        // B is a perturbation of A, so that the premise is met often.
        (0..cfg.subset_samples)
            .map(|_| {
                let a: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
                let b: Vec<bool> = a.iter().map(|&x| if rng.gen_bool(0.15) { !x } else { x }).collect();
                (PointSet::from_bits(a), PointSet::from_bits(b))
            })
            .collect()
    };
    let tau0 = grid.tau(0);
    let (mut eligible, mut violations) = (0usize, 0usize);
    for (sa, sb) in &pairs {
        let outside = sa.complement();
        let premise = sa
            .iter()
            .all(|y| crate::halfspace::distance_to_set(space, y, &outside) > a * tau0);
        if !premise {
            continue;
        }
        let (ta, tb) = (tent_mask(space, grid, sa, a)?, tent_mask(space, grid, sb, a)?);
        if ta.is_subset(&tb) {
            eligible += 1;
            if !sa.is_subset(sb) {
                violations += 1;
            }
        }
    }
    Ok(Outcome::new(violations as f64, 0.0)
        .with("pairs", pairs.len() as f64)
        .with("eligible_pairs", eligible as f64))
}

pub(super) fn shadow_bounded(space: &Space, grid: &TimeGrid, cfg: &CheckConfig) -> Result<Outcome> {
    let mut rng = sample::rng(cfg.seed);
    let a = cfg.alpha;
    let (slabs, n) = (grid.slabs(), space.len());
    let mut violations = 0usize;
    let balls = space.enumerate_distinct_balls();
    for ball in &balls {
        let members = ball.members(space);
        let mut c = RegionMask::empty(slabs, n);
        for j in 0..slabs {
            for i in members.iter() {
                if rng.gen_bool(0.3) {
                    c.set(j, i, true);
                }
            }
        }
        let bound = Ball {
            center: ball.center,
            radius: ball.radius + a * grid.t_max(),
        }
        .members(space);
        if !shadow(space, grid, &c, a)?.is_subset(&bound) {
            violations += 1;
        }
    }
    Ok(Outcome::new(violations as f64, 0.0).with("balls", balls.len() as f64))
}

pub(super) fn minimal_tent(space: &Space, grid: &TimeGrid, cfg: &CheckConfig) -> Result<Outcome> {
    let a = cfg.alpha;
    let (slabs, n) = (grid.slabs(), space.len());
    let mut rng = sample::rng(cfg.seed);
    let sets = subsets(n, cfg, &mut rng);
    let tents: Vec<RegionMask> = sets.iter().map(|s| tent_mask(space, grid, s, a)).collect::<Result<_>>()?;
    let cells = slabs * n;
    let mut masks: Vec<RegionMask> = Vec::new();
    for c1 in 0..cells {
        masks.push(RegionMask::from_cells(slabs, n, [(c1 / n, c1 % n)]));
        if cells <= 64 {
            for c2 in c1 + 1..cells {
                masks.push(RegionMask::from_cells(slabs, n, [(c1 / n, c1 % n), (c2 / n, c2 % n)]));
            }
        }
    }
    for _ in 0..cfg.trials {
        let density = rng.gen_range(0.05..0.5);
        masks.push(random_mask(&mut rng, slabs, n, density));
    }
    // Containment of C needs strict predicates to be complementary.
    let generic = grid_ties(space, grid, a).is_empty();
    let (mut not_contained, mut not_minimal) = (0usize, 0usize);
    for c in &masks {
        let t = min_tent(space, grid, c, a)?;
        if generic && !c.is_subset(&t) {
            not_contained += 1;
        }
        for ts in &tents {
            if c.is_subset(ts) && !t.is_subset(ts) {
                not_minimal += 1;
            }
        }
    }
    Ok(Outcome::new((not_contained + not_minimal) as f64, 0.0)
        .with("masks", masks.len() as f64)
        .with("sets", sets.len() as f64)
        .with("containment_checked", if generic { 1.0 } else { 0.0 }))
}

pub(super) fn betas_positive(space: &Space, grid: &TimeGrid, cfg: &CheckConfig) -> Result<Outcome> {
    let mut rng = sample::rng(cfg.seed);
    let mut violations = 0usize;
    let (mut min0, mut min1) = (f64::INFINITY, f64::INFINITY);
    for k in test_masks(space, grid, cfg, &mut rng) {
        let b = beta_constants(space, grid, &k, cfg.alpha)?;
        let s_mass = shadow(space, grid, &k, cfg.alpha)?.mass(space);
        if !(b.beta0 > 0.0 && b.beta1 > 0.0 && b.beta0 <= b.beta1 && b.beta1 >= s_mass) {
            violations += 1;
        }
        min0 = min0.min(b.beta0);
        min1 = min1.min(b.beta1);
    }
    Ok(Outcome::new(violations as f64, 0.0)
        .with("min_beta0", min0)
        .with("min_beta1", min1))
}

pub(super) fn trunccone_tent(space: &Space, grid: &TimeGrid, cfg: &CheckConfig) -> Result<Outcome> {
    let a = cfg.alpha;
    let mut violations = 0usize;
    let balls = space.enumerate_distinct_balls();
    for ball in &balls {
        let big = tent_mask(space, grid, &ball.dilate(2.0 * a + 1.0).members(space), a)?;
        for x in ball.members(space).iter() {
            if !cone_mask(space, grid, x, a, Some(ball.radius))?.is_subset(&big) {
                violations += 1;
            }
        }
    }
    Ok(Outcome::new(violations as f64, 0.0).with("balls", balls.len() as f64))
}

pub(super) fn shadow_of_tent(space: &Space, grid: &TimeGrid, cfg: &CheckConfig) -> Result<Outcome> {
    let a = cfg.alpha;
    let tau0 = grid.tau(0);
    let (mut violations, mut ineligible) = (0usize, 0usize);
    let balls = space.enumerate_distinct_balls();
    for ball in &balls {
        let members = ball.members(space);
        let s = shadow(space, grid, &tent_mask(space, grid, &members, a)?, a)?;
        if !s.is_subset(&members) {
            violations += 1;
        }
        let outside = members.complement();
        let condition = members
            .iter()
            .all(|y| crate::halfspace::distance_to_set(space, y, &outside) > a * tau0);
        if condition {
            if s != members {
                violations += 1;
            }
        } else {
            ineligible += 1;
        }
    }
    Ok(Outcome::new(violations as f64, 0.0)
        .with("balls", balls.len() as f64)
        .with("balls_failing_tmin_condition", ineligible as f64))
}

pub(super) fn doubling_audit(space: &Space, _grid: &TimeGrid, _cfg: &CheckConfig) -> Result<Outcome> {
    let d = audit::doubling_constant(space, &audit::dyadic_radii(space))?;
    let mut out = Outcome::new(if d.constant >= 1.0 { 0.0 } else { 1.0 }, 0.0)
        .with("doubling_constant", d.constant)
        .with("unbounded_at_tested_scales", if d.unbounded_at_tested_scales { 1.0 } else { 0.0 });
    for (r, v) in &d.per_radius {
        out = out.with(&format!("r={r}"), *v);
    }
    Ok(out)
}

pub(super) fn ni_audit(space: &Space, _grid: &TimeGrid, cfg: &CheckConfig) -> Result<Outcome> {
    let radii = if space.len() <= audit::NI_EXACT_MAX_POINTS {
        audit::ni_breakpoint_radii(space, cfg.alpha, cfg.beta)?
    } else {
        audit::dyadic_radii(space)
    };
    let r = audit::ni_constant(space, cfg.alpha, cfg.beta, &radii)?;
    let ok = (0.0..=1.0).contains(&r.constant);
    Ok(Outcome::new(if ok { 0.0 } else { 1.0 }, 0.0)
        .with("ni_constant", r.constant)
        .with("argmin_radius", r.argmin_radius))
}

pub(super) fn hl_audit(space: &Space, _grid: &TimeGrid, cfg: &CheckConfig) -> Result<Outcome> {
    let exponent = if cfg.p > 1.0 && cfg.p.is_finite() { cfg.p } else { 2.0 };
    let r = audit::hl_ratio(space, exponent, cfg.trials.max(1), cfg.seed)?;
    Ok(Outcome::new(if r.ratio >= 0.0 { 0.0 } else { 1.0 }, 0.0)
        .with("hl_ratio", r.ratio)
        .with("exponent", exponent))
}
