//! Finite metric measure spaces: points, distances, weights, balls and volumes.
//!
//! Balls are open: `B(x, r) = {y : d(x, y) < r}`. For every centre the
//! distinct balls are indexed by the distinct distances from that centre; the
//! `k`-th ball contains every point in the first `k + 1` distance groups.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, require_positive, Error, Result};
use crate::tolerance;

/// An open ball `B(center, radius)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: usize,
    pub radius: f64,
}

impl Ball {
    pub fn contains(&self, space: &Space, y: usize) -> bool {
        space.distance(self.center, y) < self.radius
    }

    pub fn members(&self, space: &Space) -> PointSet {
        let mut set = PointSet::empty(space.len());
        for y in 0..space.len() {
            if self.contains(space, y) {
                set.insert(y);
            }
        }
        set
    }

    /// The concentric ball with radius scaled by `factor`.
    pub fn dilate(&self, factor: f64) -> Ball {
        Ball {
            center: self.center,
            radius: self.radius * factor,
        }
    }
}

/// A subset of the points of a space.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PointSet {
    bits: Vec<bool>,
}

impl PointSet {
    pub fn empty(n: usize) -> Self {
        Self {
            bits: vec![false; n],
        }
    }

    pub fn full(n: usize) -> Self {
        Self {
            bits: vec![true; n],
        }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn from_indices(n: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut set = Self::empty(n);
        for i in indices {
            set.insert(i);
        }
        set
    }

    /// Bit `i` of `mask` selects point `i`. Used for exhaustive subset loops.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        Self {
            bits: (0..n).map(|i| mask >> i & 1 == 1).collect(),
        }
    }

    pub fn universe_len(&self) -> usize {
        self.bits.len()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn insert(&mut self, i: usize) {
        self.bits[i] = true;
    }

    pub fn remove(&mut self, i: usize) {
        self.bits[i] = false;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
    }

    pub fn complement(&self) -> PointSet {
        Self {
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    pub fn is_subset(&self, other: &PointSet) -> bool {
        self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    pub fn as_bits(&self) -> &[bool] {
        &self.bits
    }

    /// Total weight of the set, summed in point order.
    pub fn mass(&self, space: &Space) -> f64 {
        self.iter().map(|i| space.weight(i)).sum()
    }
}

/// Per-centre distance order used for volumes and ball enumeration.
#[derive(Clone, Debug)]
struct Neighborhood {
    /// Points sorted by (distance, index).
    order: Vec<usize>,
    sorted_dist: Vec<f64>,
    /// `cum_weight[k]` is the weight of `order[..k]`.
    cum_weight: Vec<f64>,
    /// Exclusive end in `order` of each distinct-distance group.
    group_end: Vec<usize>,
    /// Group index of every point, indexed by point.
    group_of: Vec<usize>,
}

impl Neighborhood {
    fn build(dist_row: &[f64], weight: &[f64]) -> Self {
        let n = dist_row.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            dist_row[a].total_cmp(&dist_row[b]).then(a.cmp(&b))
        });
        let sorted_dist: Vec<f64> = order.iter().map(|&i| dist_row[i]).collect();
        let mut cum_weight = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        cum_weight.push(acc);
        for &i in &order {
            acc += weight[i];
            cum_weight.push(acc);
        }
        let mut group_end = Vec::new();
        let mut group_of = vec![0; n];
        for (pos, &i) in order.iter().enumerate() {
            if pos > 0 && sorted_dist[pos] != sorted_dist[pos - 1] {
                group_end.push(pos);
            }
            group_of[i] = group_end.len();
        }
        group_end.push(n);
        Self {
            order,
            sorted_dist,
            cum_weight,
            group_end,
            group_of,
        }
    }

    fn count_within(&self, r: f64) -> usize {
        self.sorted_dist.partition_point(|&d| d < r)
    }
}

/// A finite metric measure space `(X, d, μ)` with strictly positive point
/// masses. Immutable once built.
#[derive(Clone, Debug)]
pub struct Space {
    label: String,
    ids: Vec<String>,
    dist: Vec<f64>,
    weight: Vec<f64>,
    coords: Option<Vec<Vec<f64>>>,
    neighbors: Vec<Neighborhood>,
}

impl Space {
    /// Builds a space from an explicit distance matrix. The matrix must be
    /// symmetric, vanish exactly on the diagonal, be positive off it, and
    /// satisfy the triangle inequality up to [`tolerance::TRIANGLE`].
    pub fn from_distances(ids: Vec<String>, dist: Vec<Vec<f64>>, weight: Vec<f64>) -> Result<Self> {
        let n = ids.len();
        if dist.len() != n || dist.iter().any(|row| row.len() != n) {
            return Err(Error::DimensionMismatch(format!(
                "distance matrix must be {n}x{n} to match {n} ids"
            )));
        }
        let flat: Vec<f64> = dist.into_iter().flatten().collect();
        validate_metric(&ids, &flat)?;
        Self::assemble(ids, flat, weight, None)
    }

    /// Builds a space from Euclidean coordinates. The metric is Euclidean by
    /// construction, so only coincident points are rejected.
    pub fn from_coordinates(ids: Vec<String>, coords: Vec<Vec<f64>>, weight: Vec<f64>) -> Result<Self> {
        let n = ids.len();
        if coords.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} coordinate rows for {n} ids",
                coords.len()
            )));
        }
        let dim = coords.first().map_or(0, Vec::len);
        if coords.iter().any(|c| c.len() != dim) {
            return Err(Error::DimensionMismatch("ragged coordinate rows".into()));
        }
        if coords.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::Malformed("non-finite coordinate".into()));
        }
        let mut flat = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = coords[i]
                    .iter()
                    .zip(&coords[j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                if d == 0.0 {
                    return Err(Error::NotAMetric(format!(
                        "points `{}` and `{}` coincide",
                        ids[i], ids[j]
                    )));
                }
                flat[i * n + j] = d;
                flat[j * n + i] = d;
            }
        }
        Self::assemble(ids, flat, weight, Some(coords))
    }

    fn assemble(ids: Vec<String>, dist: Vec<f64>, weight: Vec<f64>, coords: Option<Vec<Vec<f64>>>) -> Result<Self> {
        let n = ids.len();
        if n == 0 {
            return Err(invalid("points", "a space needs at least one point"));
        }
        if weight.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} weights for {n} points",
                weight.len()
            )));
        }
        let mut seen = HashSet::new();
        for id in &ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::Malformed(format!("duplicate point id `{id}`")));
            }
        }
        for (id, &w) in ids.iter().zip(&weight) {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidWeight {
                    id: id.clone(),
                    value: w,
                });
            }
        }
        let neighbors = (0..n)
            .map(|c| Neighborhood::build(&dist[c * n..(c + 1) * n], &weight))
            .collect();
        Ok(Self {
            label: format!("custom(n={n})"),
            ids,
            dist,
            weight,
            coords,
            neighbors,
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn weights(&self) -> &[f64] {
        &self.weight
    }

    pub fn coordinates(&self) -> Option<&[Vec<f64>]> {
        self.coords.as_deref()
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.ids
            .iter()
            .position(|p| p == id)
            .ok_or_else(|| Error::UnknownPoint(id.to_string()))
    }

    pub fn check_index(&self, index: usize) -> Result<()> {
        if index < self.len() {
            Ok(())
        } else {
            Err(Error::PointOutOfRange {
                index,
                len: self.len(),
            })
        }
    }

    #[inline]
    pub fn distance(&self, x: usize, y: usize) -> f64 {
        self.dist[x * self.len() + y]
    }

    pub fn distance_row(&self, x: usize) -> &[f64] {
        let n = self.len();
        &self.dist[x * n..(x + 1) * n]
    }

    #[inline]
    pub fn weight(&self, x: usize) -> f64 {
        self.weight[x]
    }

    pub fn total_mass(&self) -> f64 {
        self.weight.iter().sum()
    }

    pub fn diameter(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    /// Smallest distance between two distinct points, `None` for one point.
    pub fn min_positive_distance(&self) -> Option<f64> {
        self.dist
            .iter()
            .copied()
            .filter(|&d| d > 0.0)
            .min_by(f64::total_cmp)
    }

    /// All distinct positive pairwise distances, ascending.
    pub fn distinct_distances(&self) -> Vec<f64> {
        let mut d: Vec<f64> = self.dist.iter().copied().filter(|&d| d > 0.0).collect();
        d.sort_by(f64::total_cmp);
        d.dedup();
        d
    }

    /// `V(x, r) = μ(B(x, r))`.
    pub fn volume(&self, x: usize, r: f64) -> Result<f64> {
        self.check_index(x)?;
        require_positive("r", r)?;
        Ok(self.volume_unchecked(x, r))
    }

    #[inline]
    pub(crate) fn volume_unchecked(&self, x: usize, r: f64) -> f64 {
        let nb = &self.neighbors[x];
        nb.cum_weight[nb.count_within(r)]
    }

    /// Points of `B(x, r)` in distance order.
    pub(crate) fn ball_points(&self, x: usize, r: f64) -> &[usize] {
        let nb = &self.neighbors[x];
        &nb.order[..nb.count_within(r)]
    }

    /// Number of distinct balls centred at `center`.
    pub(crate) fn ball_count(&self, center: usize) -> usize {
        self.neighbors[center].group_end.len()
    }

    /// Members of the `group`-th distinct ball around `center`, in distance
    /// order.
    pub(crate) fn ball_prefix(&self, center: usize, group: usize) -> &[usize] {
        let nb = &self.neighbors[center];
        &nb.order[..nb.group_end[group]]
    }

    pub(crate) fn ball_mass(&self, center: usize, group: usize) -> f64 {
        let nb = &self.neighbors[center];
        nb.cum_weight[nb.group_end[group]]
    }

    /// Index of the smallest distinct ball around `center` containing `y`.
    pub(crate) fn group_of(&self, center: usize, y: usize) -> usize {
        self.neighbors[center].group_of[y]
    }

    /// Points around `center` in distance order, grouped by distinct
    /// distance: yields `(group distance, members of the group)`.
    pub(crate) fn distance_groups(&self, center: usize) -> impl Iterator<Item = (f64, &[usize])> {
        let nb = &self.neighbors[center];
        let mut start = 0;
        nb.group_end.iter().map(move |&end| {
            let g = (nb.sorted_dist[start], &nb.order[start..end]);
            start = end;
            g
        })
    }

    /// Radius realising the `group`-th distinct ball around `center`: the
    /// midpoint to the next distinct distance, or one past the largest.
    pub fn ball_radius(&self, center: usize, group: usize) -> f64 {
        let nb = &self.neighbors[center];
        let here = nb.sorted_dist[nb.group_end[group] - 1];
        match nb.group_end.get(group + 1) {
            Some(&next_end) => 0.5 * (here + nb.sorted_dist[next_end - 1]),
            None => here + 1.0,
        }
    }

    /// One ball per distinct member set for every centre.
    pub fn enumerate_distinct_balls(&self) -> Vec<Ball> {
        (0..self.len())
            .flat_map(|c| {
                (0..self.ball_count(c)).map(move |g| Ball {
                    center: c,
                    radius: self.ball_radius(c, g),
                })
            })
            .collect()
    }
}

fn validate_metric(ids: &[String], dist: &[f64]) -> Result<()> {
    let n = ids.len();
    for i in 0..n {
        if dist[i * n + i] != 0.0 {
            return Err(Error::NotAMetric(format!("d({0},{0}) != 0", ids[i])));
        }
        for j in 0..n {
            let d = dist[i * n + j];
            if !d.is_finite() || d < 0.0 {
                return Err(Error::NotAMetric(format!(
                    "d({},{}) = {d} is not a finite nonnegative length",
                    ids[i], ids[j]
                )));
            }
            if i != j && d == 0.0 {
                return Err(Error::NotAMetric(format!(
                    "distinct points `{}` and `{}` at distance 0",
                    ids[i], ids[j]
                )));
            }
            if d != dist[j * n + i] {
                return Err(Error::NotAMetric(format!(
                    "d({0},{1}) != d({1},{0})",
                    ids[i], ids[j]
                )));
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            let dij = dist[i * n + j];
            for k in 0..n {
                if dij > dist[i * n + k] + dist[k * n + j] + tolerance::TRIANGLE {
                    return Err(Error::NotAMetric(format!(
                        "triangle inequality fails for ({}, {}, {})",
                        ids[i], ids[k], ids[j]
                    )));
                }
            }
        }
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

    #[test]
    fn s3_volumes() {
        let s = s3();
        assert_eq!(s.volume(0, 0.5).unwrap(), 1.0);
        assert_eq!(s.volume(0, 1.5).unwrap(), 2.0);
        assert_eq!(s.volume(1, 2.5).unwrap(), 3.0);
        // open balls: d(a,b) = 1 is not < 1
        assert_eq!(s.volume(0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn volume_rejects_bad_input() {
        let s = s3();
        assert!(matches!(s.volume(3, 1.0), Err(Error::PointOutOfRange { .. })));
        assert!(s.volume(0, 0.0).is_err());
        assert!(s.volume(0, -1.0).is_err());
        assert!(matches!(s.index_of("z"), Err(Error::UnknownPoint(_))));
    }

    #[test]
    fn s3_ball_enumeration() {
        let s = s3();
        let balls = s.enumerate_distinct_balls();
        assert_eq!(balls.len(), 9);
        let radii: Vec<f64> = balls.iter().filter(|b| b.center == 0).map(|b| b.radius).collect();
        assert_eq!(radii, vec![0.5, 2.0, 4.0]);
        let sets: Vec<Vec<usize>> = balls
            .iter()
            .filter(|b| b.center == 0)
            .map(|b| b.members(&s).iter().collect())
            .collect();
        assert_eq!(sets, vec![vec![0], vec![0, 1], vec![0, 1, 2]]);
    }

    #[test]
    fn one_point_space_has_one_ball() {
        let s = Space::from_distances(vec!["p".into()], vec![vec![0.0]], vec![2.5]).unwrap();
        let balls = s.enumerate_distinct_balls();
        assert_eq!(balls.len(), 1);
        assert_eq!(balls[0].members(&s), PointSet::full(1));
    }

    #[test]
    fn rejects_non_metrics() {
        let ids: Vec<String> = vec!["a".into(), "b".into(), "c".into()];
        let bad = vec![vec![0.0, 1.0, 5.0], vec![1.0, 0.0, 1.0], vec![5.0, 1.0, 0.0]];
        assert!(matches!(
            Space::from_distances(ids.clone(), bad, vec![1.0; 3]),
            Err(Error::NotAMetric(_))
        ));
        let asym = vec![vec![0.0, 1.0, 1.0], vec![1.5, 0.0, 1.0], vec![1.0, 1.0, 0.0]];
        assert!(Space::from_distances(ids.clone(), asym, vec![1.0; 3]).is_err());
        let ok = vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![2.0, 1.0, 0.0]];
        assert!(matches!(
            Space::from_distances(ids.clone(), ok.clone(), vec![1.0, 0.0, 1.0]),
            Err(Error::InvalidWeight { .. })
        ));
        assert!(Space::from_distances(ids, ok, vec![1.0; 3]).is_ok());
    }

    #[test]
    fn triangle_tolerance_is_honoured() {
        let ids: Vec<String> = vec!["a".into(), "b".into(), "c".into()];
        let eps = 0.5 * tolerance::TRIANGLE;
        let d = vec![
            vec![0.0, 1.0, 2.0 + eps],
            vec![1.0, 0.0, 1.0],
            vec![2.0 + eps, 1.0, 0.0],
        ];
        assert!(Space::from_distances(ids, d, vec![1.0; 3]).is_ok());
    }
}
