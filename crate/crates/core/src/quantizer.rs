//! Scalar quantizer design for discrete distributions.
//!
//! A quantizer partitions an ascending alphabet `l_0 < l_1 < ... < l_{M-1}`
//! into `K` contiguous cells and represents every cell by its probability
//! centroid. [`design_min_distortion_quantizer`] finds the partition with the
//! smallest expected squared error by dynamic programming over cell upper
//! boundaries; [`brute_force_quantizer`] enumerates every contiguous partition
//! and exists to check it.

use std::ops::Range;

use crate::{Error, Result};

/// Tolerance on the total probability of a distribution.
pub const MASS_TOLERANCE: f64 = 1e-9;

/// Largest alphabet accepted by [`brute_force_quantizer`].
pub const BRUTE_FORCE_MAX_ALPHABET: usize = 16;

/// A probability mass function on a strictly ascending set of real values.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    values: Vec<f64>,
    probs: Vec<f64>,
}

impl DiscreteDistribution {
    /// Wraps already merged data, checking every invariant.
    pub fn from_sorted(values: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.len() != probs.len() {
            return Err(Error::param("values and probs must be non-empty and equal length"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("non-finite representative value"));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::param("representative values must be strictly ascending"));
        }
        if probs.iter().any(|&p| p <= 0.0 || !p.is_finite()) {
            return Err(Error::param("probabilities must be positive"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::param(format!("probabilities sum to {total}")));
        }
        Ok(DiscreteDistribution { values, probs })
    }

    /// A single atom at `value`.
    pub fn point(value: f64) -> Self {
        DiscreteDistribution {
            values: vec![value],
            probs: vec![1.0],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn total_mass(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().zip(&self.probs).map(|(l, p)| l * p).sum()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.values
            .iter()
            .zip(&self.probs)
            .map(|(l, p)| (l - mean) * (l - mean) * p)
            .sum()
    }

    /// True when the alphabet is exactly mirrored about zero and mirrored
    /// symbols carry the same mass within `tol`.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        let m = self.len();
        (0..m).all(|i| {
            let j = m - 1 - i;
            self.values[i] == -self.values[j] && (self.probs[i] - self.probs[j]).abs() <= tol
        })
    }

    /// Largest deviation from symmetry about zero, over values and masses.
    /// Infinite when the alphabets differ in size.
    pub fn asymmetry(&self) -> f64 {
        let m = self.len();
        (0..m)
            .map(|i| {
                let j = m - 1 - i;
                (self.values[i] + self.values[j])
                    .abs()
                    .max((self.probs[i] - self.probs[j]).abs())
            })
            .fold(0.0, f64::max)
    }

    /// Probability centroid of the symbols in `cells`.
    pub fn centroid(&self, cells: Range<usize>) -> f64 {
        debug_assert!(cells.start < cells.end && cells.end <= self.len());
        if cells.len() == 1 {
            return self.values[cells.start];
        }
        let (lo, hi) = (self.values[cells.start], self.values[cells.end - 1]);
        let (mut mass, mut first) = (0.0, 0.0);
        for i in cells {
            mass += self.probs[i];
            first += self.probs[i] * self.values[i];
        }
        // Rounding may not carry the centroid outside its cell.
        (first / mass).clamp(lo, hi)
    }

    /// Squared error of representing `cells` by their centroid.
    pub fn partial_distortion(&self, cells: Range<usize>) -> f64 {
        let t = self.centroid(cells.clone());
        cells
            .map(|i| {
                let d = self.values[i] - t;
                d * d * self.probs[i]
            })
            .sum()
    }

    pub fn mass(&self, cells: Range<usize>) -> f64 {
        self.probs[cells].iter().sum()
    }
}

/// Sorts, merges exactly equal values, drops zero-mass symbols and
/// normalizes.
pub fn merge_duplicates(values: &[f64], probs: &[f64]) -> Result<DiscreteDistribution> {
    if values.is_empty() || values.len() != probs.len() {
        return Err(Error::param("values and probs must be non-empty and equal length"));
    }
    if probs.iter().any(|&p| p < 0.0 || !p.is_finite()) {
        return Err(Error::param("probabilities must be finite and non-negative"));
    }
    let mut pairs: Vec<(f64, f64)> = values
        .iter()
        .zip(probs)
        .filter(|(_, &p)| p > 0.0)
        .map(|(&v, &p)| (v, p))
        .collect();
    if pairs.is_empty() {
        return Err(Error::param("total probability is zero"));
    }
    if pairs.iter().any(|(v, _)| !v.is_finite()) {
        return Err(Error::param("non-finite representative value"));
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out_v: Vec<f64> = Vec::with_capacity(pairs.len());
    let mut out_p: Vec<f64> = Vec::with_capacity(pairs.len());
    for (v, p) in pairs {
        // -0.0 and 0.0 compare equal and merge into one symbol.
        match out_v.last() {
            Some(&last) if last == v => *out_p.last_mut().unwrap() += p,
            _ => {
                out_v.push(if v == 0.0 { 0.0 } else { v });
                out_p.push(p);
            }
        }
    }
    let total: f64 = out_p.iter().sum();
    out_p.iter_mut().for_each(|p| *p /= total);
    Ok(DiscreteDistribution {
        values: out_v,
        probs: out_p,
    })
}

/// A contiguous partition of an alphabet with one reconstruction per cell.
///
/// Cell `k` covers the symbols `boundaries[k]..boundaries[k + 1]`
/// (0-based, half open), so `boundaries` starts at 0 and ends at `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct Quantizer {
    boundaries: Vec<usize>,
    recon: Vec<f64>,
    distortion: f64,
}

impl Quantizer {
    /// Builds the quantizer for a given partition, with centroid
    /// reconstructions and its exact distortion on `dist`.
    pub fn from_boundaries(dist: &DiscreteDistribution, boundaries: Vec<usize>) -> Result<Self> {
        if boundaries.len() < 2
            || boundaries[0] != 0
            || *boundaries.last().unwrap() != dist.len()
            || boundaries.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::param("boundaries must increase strictly from 0 to M"));
        }
        let cells = boundaries.windows(2).map(|w| w[0]..w[1]);
        let recon = cells.clone().map(|c| dist.centroid(c)).collect();
        let distortion = cells.map(|c| dist.partial_distortion(c)).sum();
        Ok(Quantizer {
            boundaries,
            recon,
            distortion,
        })
    }

    /// Every symbol in its own cell.
    pub fn identity(dist: &DiscreteDistribution) -> Self {
        Quantizer {
            boundaries: (0..=dist.len()).collect(),
            recon: dist.values().to_vec(),
            distortion: 0.0,
        }
    }

    /// Reassembles a quantizer from stored parts, checking the structural
    /// invariants that do not need the source distribution.
    pub fn from_parts(boundaries: Vec<usize>, recon: Vec<f64>, distortion: f64) -> Result<Self> {
        if boundaries.len() < 2
            || boundaries[0] != 0
            || boundaries.windows(2).any(|w| w[0] >= w[1])
            || recon.len() + 1 != boundaries.len()
        {
            return Err(Error::param("malformed quantizer boundaries"));
        }
        if recon.windows(2).any(|w| w[0] >= w[1]) || recon.iter().any(|r| !r.is_finite()) {
            return Err(Error::param("reconstruction values must be strictly ascending"));
        }
        Ok(Quantizer {
            boundaries,
            recon,
            distortion,
        })
    }

    /// Number of cells.
    pub fn levels(&self) -> usize {
        self.recon.len()
    }

    /// Size of the source alphabet.
    pub fn source_len(&self) -> usize {
        *self.boundaries.last().unwrap()
    }

    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    pub fn recon(&self) -> &[f64] {
        &self.recon
    }

    pub fn distortion(&self) -> f64 {
        self.distortion
    }

    pub fn cells(&self) -> impl Iterator<Item = Range<usize>> + '_ {
        self.boundaries.windows(2).map(|w| w[0]..w[1])
    }

    /// Cell holding source symbol `index`.
    pub fn cell_of_index(&self, index: usize) -> usize {
        debug_assert!(index < self.source_len());
        self.boundaries.partition_point(|&b| b <= index) - 1
    }

    /// Cell of an arbitrary value: the last cell whose first source value is
    /// not above `value`, or the first cell for values below the alphabet.
    /// Agrees with [`Quantizer::cell_of_index`] on every source value.
    pub fn cell_of_value(&self, dist: &DiscreteDistribution, value: f64) -> usize {
        let firsts = &self.boundaries[..self.levels()];
        let n = firsts.partition_point(|&b| dist.values()[b] <= value);
        n.saturating_sub(1)
    }

    /// Map from every source symbol to its cell.
    pub fn index_map(&self) -> Vec<usize> {
        self.cells()
            .enumerate()
            .flat_map(|(k, c)| std::iter::repeat_n(k, c.len()))
            .collect()
    }
}

/// Per-cell squared-error costs `cost[start][len - 1]` for every cell of at
/// most `max_len` symbols, accumulated with a weighted running-mean update.
///
/// With `anchored` set, cells starting at symbol 0 are costed against a
/// reconstruction fixed at zero instead of their centroid.
struct CellCosts {
    max_len: usize,
    table: Vec<f64>,
}

impl CellCosts {
    fn build(values: &[f64], probs: &[f64], max_len: usize, anchored: bool) -> Self {
        let m = values.len();
        let mut table = vec![f64::INFINITY; m * max_len];
        for start in 0..m {
            let (mut mass, mut mean, mut m2) = (0.0, 0.0, 0.0);
            for len in 1..=max_len.min(m - start) {
                let i = start + len - 1;
                let (l, p) = (values[i], probs[i]);
                let cost = if anchored && start == 0 {
                    m2 += p * l * l;
                    m2
                } else {
                    mass += p;
                    let delta = l - mean;
                    mean += p * delta / mass;
                    m2 += p * delta * (l - mean);
                    m2.max(0.0)
                };
                table[start * max_len + len - 1] = cost;
            }
        }
        CellCosts { max_len, table }
    }

    #[inline]
    fn cost(&self, start: usize, end: usize) -> f64 {
        self.table[start * self.max_len + (end - start) - 1]
    }
}

/// Optimal upper boundaries for splitting `m` symbols into `k` contiguous
/// cells. `state[z][a]` is the least cost of covering the first `a` symbols
/// with `z` cells; only `a` in `z..=z + m - k` is ever reachable.
///
/// Squared-error cell costs satisfy the quadrangle inequality, so the
/// smallest optimal predecessor is non-decreasing in `a`; each row is filled
/// by divide and conquer over that monotone range.
#[allow(clippy::needless_range_loop)]
fn optimal_boundaries(m: usize, k: usize, costs: &CellCosts) -> Vec<usize> {
    debug_assert!(1 <= k && k <= m);
    let width = m - k + 1;
    // Row z holds a = z..z + width; index (a - z).
    let mut prev = vec![f64::INFINITY; width];
    let mut argmin = vec![0usize; k * width];
    // z = 1: a single cell covering symbols 0..a.
    for (off, slot) in prev.iter_mut().enumerate() {
        *slot = costs.cost(0, 1 + off);
    }
    let mut cur = vec![f64::INFINITY; width];
    let mut stack = Vec::new();
    for z in 2..=k {
        let row = &mut argmin[(z - 1) * width..z * width];
        // (offsets lo..hi, predecessor offsets plo..=phi)
        stack.push((0, width, 0, width - 1));
        while let Some((lo, hi, plo, phi)) = stack.pop() {
            if lo >= hi {
                continue;
            }
            let off = (lo + hi) / 2;
            let a = z + off;
            let mut best = f64::INFINITY;
            let mut best_off = plo;
            // a' = z - 1 + prev_off ranges over (z - 1)..a.
            for prev_off in plo..=phi.min(off) {
                let v = prev[prev_off] + costs.cost(z - 1 + prev_off, a);
                if v < best {
                    best = v;
                    best_off = prev_off;
                }
            }
            cur[off] = best;
            row[off] = z - 1 + best_off;
            stack.push((lo, off, plo, best_off));
            stack.push((off + 1, hi, best_off, phi));
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    let mut bounds = vec![0usize; k + 1];
    bounds[k] = m;
    for z in (1..k).rev() {
        let a_next = bounds[z + 1];
        bounds[z] = argmin[z * width + (a_next - (z + 1))];
    }
    bounds
}

fn check_levels(dist: &DiscreteDistribution, levels: usize) -> Result<()> {
    if levels == 0 || levels > dist.len() {
        return Err(Error::param(format!(
            "quantizer levels {levels} outside 1..={}",
            dist.len()
        )));
    }
    Ok(())
}

/// Minimum expected squared-error quantizer of `dist` with `levels` cells.
///
/// Ties between equal-cost predecessors resolve to the smallest boundary, so
/// the result is deterministic.
pub fn design_min_distortion_quantizer(
    dist: &DiscreteDistribution,
    levels: usize,
) -> Result<Quantizer> {
    check_levels(dist, levels)?;
    let m = dist.len();
    if levels == m {
        return Ok(Quantizer::identity(dist));
    }
    let costs = CellCosts::build(dist.values(), dist.probs(), m - levels + 1, false);
    let bounds = optimal_boundaries(m, levels, &costs);
    Quantizer::from_boundaries(dist, bounds)
}

/// Minimum-distortion quantizer constrained to be mirror symmetric about
/// zero, for distributions where [`DiscreteDistribution::is_symmetric`]
/// holds.
///
/// A symmetric partition of an even alphabet has an even number of cells; an
/// odd alphabet (which contains 0) needs an odd number, with a central cell
/// reconstructed at exactly 0. The result therefore uses `levels` cells when
/// the parity allows it and `levels - 1` otherwise. The positive half is
/// designed by the same dynamic program and mirrored, so reconstructions of
/// mirrored cells are exact negations.
pub fn design_symmetric_quantizer(
    dist: &DiscreteDistribution,
    levels: usize,
) -> Result<Quantizer> {
    check_levels(dist, levels)?;
    if !dist.is_symmetric(MASS_TOLERANCE) {
        return Err(Error::param("distribution is not symmetric about zero"));
    }
    let m = dist.len();
    if levels == m {
        return Ok(Quantizer::identity(dist));
    }
    if levels == 1 {
        let mut q = design_min_distortion_quantizer(dist, 1)?;
        q.recon[0] = 0.0;
        return Ok(q);
    }
    let half = m / 2;
    let odd = m % 2 == 1;
    let per_side = if odd { (levels - 1) / 2 } else { levels / 2 };
    // Symbols designed on: the positive half, led by the zero symbol when
    // present. With a zero, the first cell is the positive half of the
    // central cell.
    let start = half;
    let values = &dist.values()[start..];
    let probs = &dist.probs()[start..];
    let side_len = values.len();
    let side_cells = if odd { per_side + 1 } else { per_side };
    let side_bounds = if side_cells >= side_len {
        (0..=side_len).collect()
    } else {
        let costs = CellCosts::build(values, probs, side_len - side_cells + 1, odd);
        optimal_boundaries(side_len, side_cells, &costs)
    };
    // Mirror: the positive side starts at `start`; the negative side cells
    // are reflections through the alphabet center.
    let mut bounds: Vec<usize> = Vec::with_capacity(2 * side_bounds.len());
    let positive: Vec<usize> = side_bounds.iter().map(|b| b + start).collect();
    let inner = if odd { 1 } else { 0 };
    for &b in positive[inner..].iter().rev() {
        bounds.push(m - b);
    }
    if !odd {
        bounds.push(half);
    }
    bounds.extend_from_slice(&positive[inner..]);
    bounds.dedup();
    let mut q = Quantizer::from_boundaries(dist, bounds)?;
    let k = q.levels();
    for i in 0..k / 2 {
        q.recon[i] = -q.recon[k - 1 - i];
    }
    if k % 2 == 1 {
        q.recon[k / 2] = 0.0;
    }
    Ok(q)
}

/// Pushes the quantized distribution through `q`: the reconstruction values
/// with the summed mass of each cell.
pub fn apply_quantizer(dist: &DiscreteDistribution, q: &Quantizer) -> Result<DiscreteDistribution> {
    if q.source_len() != dist.len() {
        return Err(Error::param(format!(
            "quantizer designed for {} symbols, distribution has {}",
            q.source_len(),
            dist.len()
        )));
    }
    let probs = q.cells().map(|c| dist.mass(c)).collect();
    DiscreteDistribution::from_sorted(q.recon().to_vec(), probs)
}

/// Exhaustive search over every contiguous partition. Ties keep the first
/// partition in lexicographic boundary order.
pub fn brute_force_quantizer(dist: &DiscreteDistribution, levels: usize) -> Result<Quantizer> {
    check_levels(dist, levels)?;
    let m = dist.len();
    if m > BRUTE_FORCE_MAX_ALPHABET {
        return Err(Error::param(format!(
            "brute force limited to {BRUTE_FORCE_MAX_ALPHABET} symbols, got {m}"
        )));
    }

    fn search(
        dist: &DiscreteDistribution,
        cells_left: usize,
        bounds: &mut Vec<usize>,
        acc: f64,
        best: &mut Option<(f64, Vec<usize>)>,
    ) {
        let m = dist.len();
        let start = *bounds.last().unwrap();
        if cells_left == 1 {
            let total = acc + dist.partial_distortion(start..m);
            if best.as_ref().is_none_or(|(d, _)| total < *d) {
                bounds.push(m);
                *best = Some((total, bounds.clone()));
                bounds.pop();
            }
            return;
        }
        for end in start + 1..=m - (cells_left - 1) {
            bounds.push(end);
            let c = dist.partial_distortion(start..end);
            search(dist, cells_left - 1, bounds, acc + c, best);
            bounds.pop();
        }
    }

    let mut best = None;
    search(dist, levels, &mut vec![0], 0.0, &mut best);
    let (_, bounds) = best.expect("at least one partition exists");
    Quantizer::from_boundaries(dist, bounds)
}

/// Symmetric equal-width quantizer in value space. Even level counts put a
/// cell edge at zero; odd counts center a cell on zero. The two outer cells
/// extend to infinity.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformQuantizer {
    step: f64,
    recon: Vec<f64>,
}

impl UniformQuantizer {
    pub fn levels(&self) -> usize {
        self.recon.len()
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Reconstruction value of every cell, empty cells included.
    pub fn recon(&self) -> &[f64] {
        &self.recon
    }

    #[inline]
    pub fn cell_of(&self, value: f64) -> usize {
        cell_of_uniform(value, self.step, self.levels())
    }
}

#[inline]
fn cell_of_uniform(value: f64, step: f64, levels: usize) -> usize {
    let shifted = if levels.is_multiple_of(2) {
        (value / step).floor() + (levels / 2) as f64
    } else {
        (value / step + 0.5).floor() + ((levels - 1) / 2) as f64
    };
    if shifted <= 0.0 || shifted.is_nan() {
        0
    } else {
        (shifted as usize).min(levels - 1)
    }
}

/// Center of uniform cell `k`, clipped to the inner edge plus half a step for
/// the outer cells.
fn uniform_cell_center(k: usize, step: f64, levels: usize) -> f64 {
    let offset = if levels.is_multiple_of(2) {
        k as f64 - levels as f64 / 2.0 + 0.5
    } else {
        k as f64 - (levels - 1) as f64 / 2.0
    };
    offset * step
}

/// The uniform baseline: its value-space form and the equivalent contiguous
/// partition of the design alphabet (empty cells dropped).
#[derive(Debug, Clone, PartialEq)]
pub struct UniformDesign {
    pub uniform: UniformQuantizer,
    pub quantizer: Quantizer,
}

/// Number of candidate step sizes scanned by [`design_uniform_quantizer`].
pub const UNIFORM_SCAN_POINTS: usize = 4096;

/// Symmetric uniform quantizer whose step minimizes the squared error on
/// `dist`, found by a dense scan. Cells reconstruct at their centroid on
/// `dist`; cells holding no symbol reconstruct at their center.
pub fn design_uniform_quantizer(dist: &DiscreteDistribution, levels: usize) -> Result<UniformDesign> {
    if levels < 2 {
        return Err(Error::param("uniform quantizer needs at least 2 levels"));
    }
    let amax = dist
        .values()
        .iter()
        .fold(0.0f64, |a, v| a.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let inner_edges = if levels.is_multiple_of(2) {
        (levels / 2 - 1).max(1) as f64
    } else {
        (levels / 2) as f64 - 0.5
    }
    .max(0.5);
    let max_step = 2.0 * amax / inner_edges;

    let distortion_for = |step: f64| -> f64 {
        let mut mass = vec![0.0; levels];
        let mut first = vec![0.0; levels];
        let mut second = vec![0.0; levels];
        for (&l, &p) in dist.values().iter().zip(dist.probs()) {
            let k = cell_of_uniform(l, step, levels);
            mass[k] += p;
            first[k] += p * l;
            second[k] += p * l * l;
        }
        (0..levels)
            .filter(|&k| mass[k] > 0.0)
            .map(|k| (second[k] - first[k] * first[k] / mass[k]).max(0.0))
            .sum()
    };

    let mut best_step = max_step;
    let mut best = f64::INFINITY;
    for i in 1..=UNIFORM_SCAN_POINTS {
        let step = max_step * i as f64 / UNIFORM_SCAN_POINTS as f64;
        let d = distortion_for(step);
        if d < best {
            best = d;
            best_step = step;
        }
    }

    let cells: Vec<usize> = dist
        .values()
        .iter()
        .map(|&l| cell_of_uniform(l, best_step, levels))
        .collect();
    let mut bounds = vec![0usize];
    for i in 1..cells.len() {
        if cells[i] != cells[i - 1] {
            bounds.push(i);
        }
    }
    bounds.push(dist.len());
    let quantizer = Quantizer::from_boundaries(dist, bounds)?;

    let mut recon: Vec<f64> = (0..levels)
        .map(|k| uniform_cell_center(k, best_step, levels))
        .collect();
    for (range, &t) in quantizer.cells().zip(quantizer.recon()) {
        recon[cells[range.start]] = t;
    }
    Ok(UniformDesign {
        uniform: UniformQuantizer {
            step: best_step,
            recon,
        },
        quantizer,
    })
}
