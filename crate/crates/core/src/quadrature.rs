//! Globally adaptive Gauss–Kronrod (7/15) quadrature for scalar, array, and
//! matrix-valued integrands, plus a wrapper for integrands on `[0, ∞)` that
//! are finite sums of decaying exponentials.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::OperatorMatrix;
use crate::scalar::Real;

/// Values that can be integrated: a real vector space with a norm.
pub trait QuadValue<T: Real>: Clone {
    fn zero_like(&self) -> Self;
    /// `self += weight · other`
    fn add_scaled(&mut self, weight: T, other: &Self);
    fn magnitude(&self) -> T;

    fn distance(&self, other: &Self) -> T {
        let mut diff = self.clone();
        diff.add_scaled(-T::one(), other);
        diff.magnitude()
    }
}

macro_rules! scalar_quad_value {
    ($($t:ty),*) => {$(
        impl QuadValue<$t> for $t {
            fn zero_like(&self) -> Self { 0.0 }
            fn add_scaled(&mut self, weight: $t, other: &Self) { *self += weight * other; }
            fn magnitude(&self) -> $t { self.abs() }
        }
    )*};
}
scalar_quad_value!(f32, f64);

impl<T: Real, const N: usize> QuadValue<T> for [T; N] {
    fn zero_like(&self) -> Self {
        [T::zero(); N]
    }
    fn add_scaled(&mut self, weight: T, other: &Self) {
        for (a, b) in self.iter_mut().zip(other) {
            *a += weight * *b;
        }
    }
    fn magnitude(&self) -> T {
        self.iter().fold(T::zero(), |acc, x| acc + *x * *x).sqrt()
    }
}

impl<T: Real> QuadValue<T> for OperatorMatrix<T> {
    fn zero_like(&self) -> Self {
        OperatorMatrix::zeros(self.dim())
    }
    fn add_scaled(&mut self, weight: T, other: &Self) {
        *self += &other.scale_real(weight);
    }
    fn magnitude(&self) -> T {
        self.frobenius()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSettings<T> {
    /// Relative error target on the integral's magnitude.
    pub rel_tol: T,
    /// Absolute error floor.
    pub abs_tol: T,
    /// Subdivision budget.
    pub max_intervals: usize,
    /// Truncation point in units of the integrand's slowest decay time.
    pub horizon: T,
}

impl<T: Real> Default for QuadratureSettings<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::lit(1e-7),
            abs_tol: T::lit(1e-14),
            max_intervals: 4000,
            horizon: T::lit(40.0),
        }
    }
}

impl<T: Real> QuadratureSettings<T> {
    pub fn with_rel_tol(self, rel_tol: T) -> Self {
        Self { rel_tol, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > T::zero()) || !(self.abs_tol >= T::zero()) || !self.rel_tol.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "quadrature tolerance must be positive (rel {}, abs {})",
                self.rel_tol, self.abs_tol
            )));
        }
        if self.max_intervals == 0 || !(self.horizon > T::zero()) {
            return Err(Error::InvalidConfig(
                "quadrature budget and horizon must be positive".into(),
            ));
        }
        Ok(())
    }

    fn target(&self, magnitude: T) -> T {
        self.abs_tol.max(self.rel_tol * magnitude)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadEstimate<V, T> {
    pub value: V,
    pub error: T,
    pub evaluations: usize,
    pub intervals: usize,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];

struct Panel<V, T> {
    lo: T,
    hi: T,
    value: V,
    error: T,
}

impl<V, T: PartialOrd> PartialEq for Panel<V, T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<V, T: PartialOrd> Eq for Panel<V, T> {}
impl<V, T: PartialOrd> PartialOrd for Panel<V, T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<V, T: PartialOrd> Ord for Panel<V, T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.partial_cmp(&other.error).unwrap_or(Ordering::Equal)
    }
}

/// One 15-point Kronrod panel; the error is the distance to the embedded
/// 7-point Gauss result.
fn kronrod15<T: Real, V: QuadValue<T>>(f: &impl Fn(T) -> V, lo: T, hi: T) -> Panel<V, T> {
    let two = T::lit(2.0);
    let center = (lo + hi) / two;
    let half = (hi - lo) / two;
    let f_center = f(center);
    let mut kronrod = f_center.zero_like();
    let mut gauss = f_center.zero_like();
    kronrod.add_scaled(T::lit(WGK[7]), &f_center);
    gauss.add_scaled(T::lit(WG[3]), &f_center);
    for (j, (&x, &wk)) in XGK.iter().zip(&WGK).take(7).enumerate() {
        let dx = half * T::lit(x);
        let left = f(center - dx);
        let right = f(center + dx);
        kronrod.add_scaled(T::lit(wk), &left);
        kronrod.add_scaled(T::lit(wk), &right);
        if j % 2 == 1 {
            let wg = T::lit(WG[j / 2]);
            gauss.add_scaled(wg, &left);
            gauss.add_scaled(wg, &right);
        }
    }
    let mut value = kronrod.zero_like();
    value.add_scaled(half, &kronrod);
    let mut g = gauss.zero_like();
    g.add_scaled(half, &gauss);
    let error = value.distance(&g);
    Panel { lo, hi, value, error }
}

/// Integrates `f` over `[breakpoints[0], breakpoints[last]]`, starting from
/// the given partition and bisecting the worst panel until the summed error
/// estimate meets the target.
pub fn integrate<T, V, F>(f: F, breakpoints: &[T], settings: &QuadratureSettings<T>) -> Result<QuadEstimate<V, T>>
where
    T: Real,
    V: QuadValue<T>,
    F: Fn(T) -> V,
{
    settings.validate()?;
    assert!(breakpoints.len() >= 2, "need at least one interval");
    let mut heap: BinaryHeap<Panel<V, T>> = breakpoints.windows(2).map(|w| kronrod15(&f, w[0], w[1])).collect();
    let mut evaluations = 15 * heap.len();

    loop {
        let (total, error) = sum_panels(&heap);
        let target = settings.target(total.magnitude());
        if error <= target {
            return Ok(QuadEstimate {
                value: total,
                error,
                evaluations,
                intervals: heap.len(),
            });
        }
        let worst = heap.pop().expect("non-empty panel set");
        let mid = (worst.lo + worst.hi) / T::lit(2.0);
        let resolvable = mid > worst.lo && mid < worst.hi;
        if heap.len() + 2 > settings.max_intervals || !resolvable {
            heap.push(worst);
            let (total, error) = sum_panels(&heap);
            return Err(Error::QuadratureNonConvergence {
                estimate: total.magnitude().as_f64(),
                error: error.as_f64(),
                tolerance: settings.target(total.magnitude()).as_f64(),
            });
        }
        heap.push(kronrod15(&f, worst.lo, mid));
        heap.push(kronrod15(&f, mid, worst.hi));
        evaluations += 30;
    }
}

fn sum_panels<T: Real, V: QuadValue<T>>(heap: &BinaryHeap<Panel<V, T>>) -> (V, T) {
    let mut iter = heap.iter();
    let first = iter.next().expect("non-empty panel set");
    let mut total = first.value.clone();
    let mut error = first.error;
    for panel in iter {
        total.add_scaled(T::one(), &panel.value);
        error += panel.error;
    }
    (total, error)
}

/// Decay envelope of an integrand on `[0, ∞)`: it is a finite sum of terms
/// `p(t) e^{-r t}` whose rates all lie in `[slowest, fastest]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayRates<T> {
    pub slowest: T,
    pub fastest: T,
}

/// Integrates over `[0, ∞)` by truncating at `horizon / slowest` and
/// partitioning geometrically from the fastest time scale outwards. The
/// truncated tail is estimated from the integrand at the cut and must fall
/// below the error target.
pub fn integrate_decaying<T, V, F>(
    f: F,
    rates: DecayRates<T>,
    settings: &QuadratureSettings<T>,
) -> Result<QuadEstimate<V, T>>
where
    T: Real,
    V: QuadValue<T>,
    F: Fn(T) -> V,
{
    if !(rates.slowest > T::zero()) || rates.fastest < rates.slowest || !rates.fastest.is_finite() {
        return Err(Error::InvalidParameter {
            name: "decay rate",
            value: rates.slowest.as_f64(),
            reason: "decay rates must be positive and ordered",
        });
    }
    let cutoff = settings.horizon / rates.slowest;
    let two = T::lit(2.0);
    let mut breakpoints = vec![T::zero()];
    let mut edge = T::lit(0.5) / rates.fastest;
    while edge < cutoff {
        breakpoints.push(edge);
        edge *= two;
    }
    breakpoints.push(cutoff);

    let mut estimate = integrate(&f, &breakpoints, settings)?;
    let tail = f(cutoff).magnitude() / rates.slowest;
    let target = settings.target(estimate.value.magnitude());
    if tail > target {
        return Err(Error::TailTooLarge {
            truncation: cutoff.as_f64(),
            tail: tail.as_f64(),
            tolerance: target.as_f64(),
        });
    }
    estimate.error += tail;
    estimate.evaluations += 1;
    Ok(estimate)
}
