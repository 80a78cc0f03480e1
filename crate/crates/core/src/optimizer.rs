//! Maximization of an efficiency objective: exhaustive grid scan followed by
//! a bounded Nelder–Mead simplex refinement.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Endpoint {
    Inclusive,
    Exclusive,
}

/// One parameter axis: an interval sampled at `points` evenly spaced values,
/// or a single pinned value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis<T> {
    pub lo: T,
    pub hi: T,
    pub points: usize,
    pub lo_end: Endpoint,
    pub hi_end: Endpoint,
}

impl<T: Real> Axis<T> {
    pub fn closed(lo: T, hi: T, points: usize) -> Self {
        Self::with_ends(lo, hi, points, Endpoint::Inclusive, Endpoint::Inclusive)
    }

    /// `(lo, hi]`
    pub fn open_low(lo: T, hi: T, points: usize) -> Self {
        Self::with_ends(lo, hi, points, Endpoint::Exclusive, Endpoint::Inclusive)
    }

    /// `[lo, hi)`
    pub fn open_high(lo: T, hi: T, points: usize) -> Self {
        Self::with_ends(lo, hi, points, Endpoint::Inclusive, Endpoint::Exclusive)
    }

    pub fn with_ends(lo: T, hi: T, points: usize, lo_end: Endpoint, hi_end: Endpoint) -> Self {
        Self {
            lo,
            hi,
            points,
            lo_end,
            hi_end,
        }
    }

    pub fn fixed(value: T) -> Self {
        Self::closed(value, value, 1)
    }

    pub fn is_fixed(&self) -> bool {
        self.points == 1 && self.lo == self.hi
    }

    fn validate(&self) -> Result<()> {
        if !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(Error::InvalidConfig("axis bounds must be finite".into()));
        }
        if self.is_fixed() {
            return Ok(());
        }
        if self.points < 2 || !(self.hi > self.lo) {
            return Err(Error::InvalidConfig(format!(
                "axis [{}, {}] needs hi > lo and at least 2 points (got {})",
                self.lo, self.hi, self.points
            )));
        }
        Ok(())
    }

    /// Grid values in ascending order, honoring open ends.
    pub fn values(&self) -> Vec<T> {
        if self.is_fixed() {
            return vec![self.lo];
        }
        let n = self.points;
        let (offset, intervals) = match (self.lo_end, self.hi_end) {
            (Endpoint::Inclusive, Endpoint::Inclusive) => (0, n - 1),
            (Endpoint::Exclusive, Endpoint::Inclusive) => (1, n),
            (Endpoint::Inclusive, Endpoint::Exclusive) => (0, n),
            (Endpoint::Exclusive, Endpoint::Exclusive) => (1, n + 1),
        };
        let step = (self.hi - self.lo) / T::from_usize(intervals).unwrap();
        (0..n)
            .map(|i| self.lo + step * T::from_usize(i + offset).unwrap())
            .collect()
    }

    fn clamp(&self, x: T) -> T {
        x.max(self.lo).min(self.hi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridBest<T> {
    pub point: Vec<T>,
    pub value: T,
    pub evaluated: usize,
    /// Points where the objective errored or returned a non-finite value.
    pub failures: usize,
}

/// Evaluates `objective` on the tensor grid of `axes` and returns the best
/// point. Ties go to the lexicographically smallest point (first axis
/// first). Failing points are skipped.
pub fn grid_scan<T, F>(objective: F, axes: &[Axis<T>]) -> Result<GridBest<T>>
where
    T: Real,
    F: Fn(&[T]) -> Result<T> + Sync,
{
    if axes.is_empty() {
        return Err(Error::InvalidConfig("grid needs at least one axis".into()));
    }
    for axis in axes {
        axis.validate()?;
    }
    let values: Vec<Vec<T>> = axes.iter().map(Axis::values).collect();
    let total: usize = values.iter().map(Vec::len).product();
    let point_at = |mut flat: usize| {
        let mut point = vec![T::zero(); values.len()];
        for (slot, vals) in point.iter_mut().zip(&values).rev() {
            *slot = vals[flat % vals.len()];
            flat /= vals.len();
        }
        point
    };

    let scores: Vec<Option<T>> = (0..total)
        .into_par_iter()
        .map(|i| objective(&point_at(i)).ok().filter(|v| v.is_finite()))
        .collect();

    let mut best: Option<(usize, T)> = None;
    let mut failures = 0;
    for (i, score) in scores.iter().enumerate() {
        match *score {
            None => failures += 1,
            Some(v) => {
                if best.is_none_or(|(_, b)| v > b) {
                    best = Some((i, v));
                }
            }
        }
    }
    let (index, value) = best.ok_or(Error::AllGridPointsFailed { failures })?;
    Ok(GridBest {
        point: point_at(index),
        value,
        evaluated: total,
        failures,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefineSettings<T> {
    /// Converged once the simplex diameter drops below this.
    pub tol: T,
    pub max_iterations: usize,
    /// Initial simplex edge as a fraction of each axis span.
    pub initial_step: T,
}

impl<T: Real> Default for RefineSettings<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-10),
            max_iterations: 20_000,
            initial_step: T::lit(0.02),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Optimum<T> {
    /// Full parameter point, pinned axes included.
    pub point: Vec<T>,
    pub s: T,
    pub evaluations: usize,
    pub iterations: usize,
    pub converged: bool,
    pub diameter: T,
}

/// Nelder–Mead maximization of `objective` from `start`, restricted to the
/// axes' bounds; pinned axes stay fixed. Never returns a point worse than
/// `start`. Exhausting the iteration budget returns the best vertex with
/// `converged = false`.
pub fn refine<T, F>(objective: F, start: &[T], axes: &[Axis<T>], settings: &RefineSettings<T>) -> Result<Optimum<T>>
where
    T: Real,
    F: Fn(&[T]) -> Result<T>,
{
    if start.len() != axes.len() {
        return Err(Error::DimensionMismatch {
            expected: axes.len(),
            found: start.len(),
        });
    }
    for (x, axis) in start.iter().zip(axes) {
        axis.validate()?;
        if *x < axis.lo || *x > axis.hi {
            return Err(Error::InvalidConfig(format!(
                "start {x} outside [{}, {}]",
                axis.lo, axis.hi
            )));
        }
    }
    let free: Vec<usize> = (0..axes.len()).filter(|&i| !axes[i].is_fixed()).collect();
    let mut evaluations = 0usize;
    let embed = |coords: &[T]| {
        let mut point = start.to_vec();
        for (&slot, &c) in free.iter().zip(coords) {
            point[slot] = axes[slot].clamp(c);
        }
        point
    };
    // Minimize the negated objective; failures rank last.
    let mut cost = |coords: &[T]| {
        evaluations += 1;
        match objective(&embed(coords)) {
            Ok(v) if v.is_finite() => -v,
            _ => T::infinity(),
        }
    };

    let n = free.len();
    let origin: Vec<T> = free.iter().map(|&i| start[i]).collect();
    let mut simplex: Vec<(Vec<T>, T)> = Vec::with_capacity(n + 1);
    let start_cost = cost(&origin);
    simplex.push((origin.clone(), start_cost));
    for (k, &axis_index) in free.iter().enumerate() {
        let axis = &axes[axis_index];
        let step = (axis.hi - axis.lo) * settings.initial_step;
        let mut vertex = origin.clone();
        vertex[k] = if origin[k] + step <= axis.hi {
            origin[k] + step
        } else {
            origin[k] - step
        };
        let c = cost(&vertex);
        simplex.push((vertex, c));
    }

    let clamp_free = |v: Vec<T>| -> Vec<T> { v.iter().zip(&free).map(|(&x, &i)| axes[i].clamp(x)).collect() };
    let half = T::lit(0.5);
    let two = T::lit(2.0);
    let mut iterations = 0;
    let mut diameter = simplex_diameter(&simplex);
    while n > 0 && diameter >= settings.tol && iterations < settings.max_iterations {
        iterations += 1;
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        let worst = simplex[n].clone();
        let centroid: Vec<T> = (0..n)
            .map(|j| simplex[..n].iter().fold(T::zero(), |acc, v| acc + v.0[j]) / T::from_usize(n).unwrap())
            .collect();
        let toward =
            |t: T| -> Vec<T> { clamp_free(centroid.iter().zip(&worst.0).map(|(&c, &w)| c + t * (c - w)).collect()) };

        let reflected = toward(T::one());
        let reflected_cost = cost(&reflected);
        if reflected_cost < simplex[0].1 {
            let expanded = toward(two);
            let expanded_cost = cost(&expanded);
            simplex[n] = if expanded_cost < reflected_cost {
                (expanded, expanded_cost)
            } else {
                (reflected, reflected_cost)
            };
        } else if reflected_cost < simplex[n - 1].1 {
            simplex[n] = (reflected, reflected_cost);
        } else {
            let outside = reflected_cost < worst.1;
            let contracted = toward(if outside { half } else { -half });
            let contracted_cost = cost(&contracted);
            if contracted_cost < reflected_cost.min(worst.1) {
                simplex[n] = (contracted, contracted_cost);
            } else {
                let best = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    let shrunk: Vec<T> = best.iter().zip(&vertex.0).map(|(&b, &v)| b + half * (v - b)).collect();
                    let c = cost(&shrunk);
                    *vertex = (shrunk, c);
                }
            }
        }
        diameter = simplex_diameter(&simplex);
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
    let (coords, best_cost) = &simplex[0];
    if !best_cost.is_finite() {
        return Err(Error::InvalidConfig("objective failed at the start point".into()));
    }
    Ok(Optimum {
        point: embed(coords),
        s: -*best_cost,
        evaluations,
        iterations,
        converged: diameter < settings.tol,
        diameter,
    })
}

fn simplex_diameter<T: Real>(simplex: &[(Vec<T>, T)]) -> T {
    let mut diameter = T::zero();
    for (i, a) in simplex.iter().enumerate() {
        for b in &simplex[i + 1..] {
            let d =
                a.0.iter()
                    .zip(&b.0)
                    .fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y));
            diameter = diameter.max(d.sqrt());
        }
    }
    diameter
}
