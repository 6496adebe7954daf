//! Agreement metrics between an estimated cover and a reference cover:
//! Hungarian-matched precision/recall, overlap-aware normalized mutual
//! information and the misclassification error of labelings.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A family of element groups over `0..universe`. Groups may overlap.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupCover {
    universe: usize,
    groups: Vec<Vec<usize>>,
}

impl GroupCover {
    /// Sorts and deduplicates every group. Rejects empty groups and
    /// out-of-range indices.
    pub fn new(universe: usize, groups: Vec<Vec<usize>>) -> Result<Self> {
        let mut clean = Vec::with_capacity(groups.len());
        for (k, mut g) in groups.into_iter().enumerate() {
            g.sort_unstable();
            g.dedup();
            if g.is_empty() {
                return Err(Error::Data(format!("group {k} is empty")));
            }
            if let Some(&i) = g.last().filter(|&&i| i >= universe) {
                return Err(Error::Data(format!(
                    "group {k} has element {i} outside a universe of {universe}"
                )));
            }
            clean.push(g);
        }
        Ok(Self {
            universe,
            groups: clean,
        })
    }

    /// Groups from per-element labels; `None` elements belong to no group.
    /// Labels without elements produce no group.
    pub fn from_labels(labels: &[Option<usize>]) -> Self {
        let k = labels.iter().flatten().max().map_or(0, |&l| l + 1);
        let mut groups = vec![Vec::new(); k];
        for (i, l) in labels.iter().enumerate() {
            if let Some(l) = l {
                groups[*l].push(i);
            }
        }
        groups.retain(|g| !g.is_empty());
        Self {
            universe: labels.len(),
            groups,
        }
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }
}

fn intersection_size(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Minimum-cost one-to-one assignment for a rectangular cost matrix.
///
/// Returns, for every row, the assigned column or `None` when the row is
/// matched to a padding column. Runs in `O(n^3)` with `n = max(rows, cols)`.
pub fn hungarian_match(cost: &DMatrix<f64>) -> Vec<Option<usize>> {
    let (rows, cols) = cost.shape();
    assert!(cost.iter().all(|c| c.is_finite()), "costs must be finite");
    let n = rows.max(cols);
    if n == 0 {
        return Vec::new();
    }
    let c = |i: usize, j: usize| if i < rows && j < cols { cost[(i, j)] } else { 0.0 };
    // Shortest augmenting paths with row/column potentials, 1-based with a
    // virtual column 0.
    let mut pot_u = vec![0.0; n + 1];
    let mut pot_v = vec![0.0; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0;
        let mut min_v = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = c(i0 - 1, j - 1) - pot_u[i0] - pot_v[j];
                if cur < min_v[j] {
                    min_v[j] = cur;
                    way[j] = j0;
                }
                if min_v[j] < delta {
                    delta = min_v[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    pot_u[owner[j]] += delta;
                    pot_v[j] -= delta;
                } else {
                    min_v[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![None; rows];
    for j in 1..=n {
        let i = owner[j];
        if i >= 1 && i <= rows && j <= cols {
            assignment[i - 1] = Some(j - 1);
        }
    }
    assignment
}

/// How per-group scores are averaged in [`precision_recall_with`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Averaging {
    /// Weighted by group size: total matched overlap over total group size.
    #[default]
    SizeWeighted,
    /// Plain mean over groups.
    Unweighted,
}

/// Pairs predicted with true groups, maximizing the total overlap.
/// Returns `(pred, truth, overlap)` triples for matched pairs.
pub fn match_groups(pred: &GroupCover, truth: &GroupCover) -> Vec<(usize, usize, usize)> {
    if pred.is_empty() || truth.is_empty() {
        return Vec::new();
    }
    let overlap = DMatrix::from_fn(pred.len(), truth.len(), |p, t| {
        intersection_size(&pred.groups[p], &truth.groups[t])
    });
    let cost = overlap.map(|x| -(x as f64));
    hungarian_match(&cost)
        .into_iter()
        .enumerate()
        .filter_map(|(p, t)| t.map(|t| (p, t, overlap[(p, t)])))
        .collect()
}

/// Size-weighted precision and recall under the optimal group matching.
pub fn precision_recall(pred: &GroupCover, truth: &GroupCover) -> (f64, f64) {
    precision_recall_with(pred, truth, Averaging::SizeWeighted)
}

pub fn precision_recall_with(pred: &GroupCover, truth: &GroupCover, averaging: Averaging) -> (f64, f64) {
    assert_eq!(pred.universe, truth.universe, "covers over different universes");
    match (pred.is_empty(), truth.is_empty()) {
        (true, true) => return (1.0, 1.0),
        (true, false) => return (0.0, 0.0),
        (false, true) => return (0.0, 1.0),
        _ => {}
    }
    let pairs = match_groups(pred, truth);
    match averaging {
        Averaging::SizeWeighted => {
            let hit: usize = pairs.iter().map(|p| p.2).sum();
            let pred_total: usize = pred.groups.iter().map(Vec::len).sum();
            let truth_total: usize = truth.groups.iter().map(Vec::len).sum();
            (hit as f64 / pred_total as f64, hit as f64 / truth_total as f64)
        }
        Averaging::Unweighted => {
            let p: f64 = pairs.iter().map(|&(p, _, h)| h as f64 / pred.groups[p].len() as f64).sum();
            let r: f64 = pairs.iter().map(|&(_, t, h)| h as f64 / truth.groups[t].len() as f64).sum();
            (p / pred.len() as f64, r / truth.len() as f64)
        }
    }
}

fn plogp(count: usize, n: f64) -> f64 {
    if count == 0 {
        0.0
    } else {
        let p = count as f64 / n;
        -p * p.log2()
    }
}

fn binary_entropy(size: usize, universe: usize) -> f64 {
    let n = universe as f64;
    plogp(size, n) + plogp(universe - size, n)
}

/// `sum_k H(X_k | Y)`, each term the smallest admissible conditional entropy
/// against any group of `y`.
fn cover_conditional_entropy(x: &GroupCover, y: &GroupCover) -> f64 {
    let n = x.universe as f64;
    x.groups
        .iter()
        .map(|xk| {
            let hx = binary_entropy(xk.len(), x.universe);
            let mut best = hx;
            for yl in &y.groups {
                let d = intersection_size(xk, yl);
                let b = xk.len() - d;
                let c = yl.len() - d;
                let a = x.universe - b - c - d;
                let (ha, hb, hc, hd) = (plogp(a, n), plogp(b, n), plogp(c, n), plogp(d, n));
                // Only pairs that agree more than they disagree are informative.
                if ha + hd <= hb + hc {
                    continue;
                }
                let hy = plogp(c + d, n) + plogp(a + b, n);
                best = best.min(ha + hb + hc + hd - hy);
            }
            best
        })
        .sum()
}

/// Overlap-aware normalized mutual information of two covers, normalized by
/// the larger of the two cover entropies.
pub fn gnmi(pred: &GroupCover, truth: &GroupCover) -> f64 {
    assert_eq!(pred.universe, truth.universe, "covers over different universes");
    match (pred.is_empty(), truth.is_empty()) {
        (true, true) => return 1.0,
        (true, false) | (false, true) => return 0.0,
        _ => {}
    }
    let hx: f64 = pred.groups.iter().map(|g| binary_entropy(g.len(), pred.universe)).sum();
    let hy: f64 = truth.groups.iter().map(|g| binary_entropy(g.len(), truth.universe)).sum();
    let norm = hx.max(hy);
    if norm <= 0.0 {
        return if pred == truth { 1.0 } else { 0.0 };
    }
    let hxy = cover_conditional_entropy(pred, truth);
    let hyx = cover_conditional_entropy(truth, pred);
    let mutual = 0.5 * ((hx - hxy) + (hy - hyx));
    (mutual / norm).clamp(0.0, 1.0)
}

/// Fraction of elements whose label disagrees after the best renaming of the
/// predicted labels. `None` is the outlier label and is only matched to
/// itself.
pub fn misclassification_error(pred: &[Option<usize>], truth: &[Option<usize>]) -> f64 {
    assert_eq!(pred.len(), truth.len(), "labelings of different lengths");
    let m = pred.len();
    if m == 0 {
        return 0.0;
    }
    let kp = pred.iter().flatten().max().map_or(0, |&l| l + 1);
    let kt = truth.iter().flatten().max().map_or(0, |&l| l + 1);
    let mut counts = DMatrix::<f64>::zeros(kp, kt);
    let mut agree = 0usize;
    for (p, t) in pred.iter().zip(truth) {
        match (p, t) {
            (Some(p), Some(t)) => counts[(*p, *t)] += 1.0,
            (None, None) => agree += 1,
            _ => {}
        }
    }
    if kp > 0 && kt > 0 {
        let assignment = hungarian_match(&(-&counts));
        for (p, t) in assignment.iter().enumerate() {
            if let Some(t) = t {
                agree += counts[(p, *t)] as usize;
            }
        }
    }
    (m - agree) as f64 / m as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cover(m: usize, groups: &[&[usize]]) -> GroupCover {
        GroupCover::new(m, groups.iter().map(|g| g.to_vec()).collect()).unwrap()
    }

    #[test]
    fn identity_assignment() {
        let cost = DMatrix::from_fn(4, 4, |i, j| if i == j { 0.0 } else { 1.0 });
        assert_eq!(hungarian_match(&cost), vec![Some(0), Some(1), Some(2), Some(3)]);
        assert_eq!(hungarian_match(&DMatrix::from_element(1, 1, 5.0)), vec![Some(0)]);
    }

    #[test]
    fn rectangular_assignment() {
        let cost = DMatrix::from_row_slice(3, 2, &[5.0, 1.0, 1.0, 5.0, 0.0, 0.0]);
        let a = hungarian_match(&cost);
        assert_eq!(a.iter().flatten().count(), 2);
        // Padding is free, so leaving one row unmatched beats the cross pairing.
        let total: f64 = a.iter().enumerate().filter_map(|(i, j)| j.map(|j| cost[(i, j)])).sum();
        assert_eq!(total, 1.0);
        let wide_cost = cost.transpose();
        let wide = hungarian_match(&wide_cost);
        let total: f64 = wide.iter().enumerate().map(|(i, j)| wide_cost[(i, j.unwrap())]).sum();
        assert_eq!(total, 1.0);
    }

    #[test]
    fn cover_validation() {
        assert!(GroupCover::new(3, vec![vec![]]).is_err());
        assert!(GroupCover::new(3, vec![vec![3]]).is_err());
        assert_eq!(cover(5, &[&[2, 1, 1]]).groups(), &[vec![1, 2]]);
    }

    #[test]
    fn perfect_and_empty() {
        let t = cover(10, &[&[0, 1, 2], &[3, 4, 5, 6]]);
        assert_eq!(precision_recall(&t, &t), (1.0, 1.0));
        assert!((gnmi(&t, &t) - 1.0).abs() < 1e-12);
        let empty = GroupCover::new(10, vec![]).unwrap();
        assert_eq!(precision_recall(&empty, &t), (0.0, 0.0));
        assert_eq!(gnmi(&empty, &t), 0.0);
    }

    #[test]
    fn split_halves_recall() {
        let truth = cover(8, &[&[0, 1, 2, 3], &[4, 5, 6, 7]]);
        let pred = cover(8, &[&[0, 1], &[2, 3], &[4, 5], &[6, 7]]);
        let (p, r) = precision_recall(&pred, &truth);
        assert!((r - 0.5).abs() < 1e-12);
        assert!((p - 0.5).abs() < 1e-12);
        let (pu, ru) = precision_recall_with(&pred, &truth, Averaging::Unweighted);
        assert!((pu - 0.5).abs() < 1e-12 && (ru - 0.5).abs() < 1e-12);
    }

    #[test]
    fn dropped_group_lowers_gnmi() {
        let truth = cover(30, &[&[0, 1, 2, 3, 4, 5, 6, 7, 8, 9], &[10, 11, 12, 13, 14], &[20, 21, 22]]);
        let drop_small = cover(30, &[&[0, 1, 2, 3, 4, 5, 6, 7, 8, 9], &[10, 11, 12, 13, 14]]);
        let drop_mid = cover(30, &[&[0, 1, 2, 3, 4, 5, 6, 7, 8, 9], &[20, 21, 22]]);
        let g_small = gnmi(&drop_small, &truth);
        let g_mid = gnmi(&drop_mid, &truth);
        assert!(g_small > 0.0 && g_small < 1.0);
        assert!(g_mid > 0.0 && g_mid < g_small);
    }

    #[test]
    fn misclassification_examples() {
        let t: Vec<Option<usize>> = vec![Some(0), Some(0), Some(1), Some(1), None];
        assert_eq!(misclassification_error(&t, &t), 0.0);
        let renamed: Vec<Option<usize>> = vec![Some(3), Some(3), Some(0), Some(0), None];
        assert_eq!(misclassification_error(&renamed, &t), 0.0);
        let truth: Vec<Option<usize>> = (0..10).map(|i| Some(i / 5)).collect();
        let mut flipped = truth.clone();
        flipped[0] = Some(1);
        assert!((misclassification_error(&flipped, &truth) - 0.1).abs() < 1e-12);
        // Outliers are never renamed into a model label.
        let all_out = vec![None; 4];
        let one_model = vec![Some(0); 4];
        assert_eq!(misclassification_error(&all_out, &one_model), 1.0);
    }
}
