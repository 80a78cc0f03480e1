//! No-jump evolution `ψ(t) = exp(-K t) ψ(0)`.
//!
//! The generic path uses a Padé(13) scaling-and-squaring matrix exponential,
//! which stays accurate where `K` is defective (2γ = κ). The closed-form
//! kernels cover the unentangled two- and one-excitation sectors.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::{OperatorMatrix, StateVector};
use crate::scalar::Real;

const PADE13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

/// 1-norm bound below which Padé(13) is accurate to double precision.
const THETA13: f64 = 5.371_920_351_148_152;

/// Matrix exponential by scaling and squaring with a degree-13 Padé approximant.
pub fn expm<T: Real>(m: &OperatorMatrix<T>) -> OperatorMatrix<T> {
    let n = m.dim();
    if n == 0 {
        return m.clone();
    }
    let norm = m.norm_one();
    if norm.is_zero() {
        return OperatorMatrix::identity(n);
    }
    let theta = T::lit(THETA13);
    let squarings = if norm > theta {
        (norm / theta).log2().ceil().to_i32().unwrap_or(0).max(0)
    } else {
        0
    };
    let scaled = m.scale_real(T::lit(2.0).powi(-squarings));

    let b = |k: usize| T::lit(PADE13[k]);
    let id = OperatorMatrix::identity(n);
    let a2 = scaled.matmul(&scaled);
    let a4 = a2.matmul(&a2);
    let a6 = a2.matmul(&a4);

    let lincomb = |terms: &[(T, &OperatorMatrix<T>)]| {
        let mut acc = OperatorMatrix::zeros(n);
        for (c, op) in terms {
            acc += &op.scale_real(*c);
        }
        acc
    };

    let u_inner = lincomb(&[(b(13), &a6), (b(11), &a4), (b(9), &a2)]);
    let u_sum = &a6.matmul(&u_inner) + &lincomb(&[(b(7), &a6), (b(5), &a4), (b(3), &a2), (b(1), &id)]);
    let u = scaled.matmul(&u_sum);
    let v_inner = lincomb(&[(b(12), &a6), (b(10), &a4), (b(8), &a2)]);
    let v = &a6.matmul(&v_inner) + &lincomb(&[(b(6), &a6), (b(4), &a4), (b(2), &a2), (b(0), &id)]);

    // Carry E = exp(X) - I through the squarings, E ← 2E + E², so modes with
    // tiny rates keep full relative precision instead of rounding to 1.
    let mut excess = (&v - &u)
        .solve(&u.scale_real(T::lit(2.0)))
        .expect("Padé denominator is nonsingular for scaled arguments");
    for _ in 0..squarings {
        let mut doubled = excess.scale_real(T::lit(2.0));
        doubled += &excess.matmul(&excess);
        excess = doubled;
    }
    &id + &excess
}

/// `exp(-K t)`, the no-jump propagator over time `t`.
pub fn evolution_operator<T: Real>(k: &OperatorMatrix<T>, t: T) -> Result<OperatorMatrix<T>> {
    check_time(t)?;
    Ok(expm(&k.scale_real(-t)))
}

/// Returns `exp(-K t) · state`.
pub fn propagate<T: Real>(k: &OperatorMatrix<T>, state: &StateVector<T>, t: T) -> Result<StateVector<T>> {
    check_time(t)?;
    if state.dim() != k.dim() {
        return Err(Error::DimensionMismatch {
            expected: k.dim(),
            found: state.dim(),
        });
    }
    if t.is_zero() {
        return Ok(state.clone());
    }
    Ok(evolution_operator(k, t)?.apply(state))
}

pub(crate) fn check_time<T: Real>(t: T) -> Result<()> {
    if t < T::zero() || !t.is_finite() {
        return Err(Error::NegativeTime(t.as_f64()));
    }
    Ok(())
}

/// Amplitudes of the unentangled no-jump evolution (κ = 1):
///
/// * `|2g⟩ → α|2g⟩ + β|1e⟩`
/// * `|1g⟩ → a|1g⟩ + b|0e⟩`
/// * `|0e⟩ → c|0e⟩`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeKernel<T> {
    pub alpha: T,
    pub beta: T,
    pub a: T,
    pub b: T,
    pub c: T,
}

/// `(1 - e^{-x}) / x` for `x ≥ 0`, continuous at 0.
fn relative_decay<T: Real>(x: T) -> T {
    if x < T::lit(1e-8) {
        T::one() - x / T::lit(2.0)
    } else {
        -(-x).exp_m1() / x
    }
}

/// `(e^{-κt} - e^{-2γt}) / (2γ - κ)`, evaluated without cancellation for any
/// γ, including the exceptional point 2γ = κ where it tends to `t e^{-κt}`.
fn exponential_difference<T: Real>(gamma: T, t: T) -> T {
    let atom_rate = T::lit(2.0) * gamma;
    let gap = (atom_rate - T::one()).abs();
    let slow = atom_rate.min(T::one());
    (-slow * t).exp() * t * relative_decay(gap * t)
}

pub fn closed_form_amplitudes<T: Real>(gamma: T, t: T) -> Result<AmplitudeKernel<T>> {
    if !(gamma > T::zero()) || !gamma.is_finite() {
        return Err(Error::InvalidParameter {
            name: "gamma",
            value: gamma.as_f64(),
            reason: "rate must be positive",
        });
    }
    check_time(t)?;
    let two = T::lit(2.0);
    let a = (-t).exp();
    let diff = exponential_difference(gamma, t);
    Ok(AmplitudeKernel {
        alpha: (-two * t).exp(),
        beta: -two * (two * gamma).sqrt() * diff * a,
        a,
        b: -two * gamma.sqrt() * diff,
        c: (-two * gamma * t).exp(),
    })
}

/// Complex helper used where kernels enter complex arithmetic.
#[inline]
pub(crate) fn cplx<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_basis, build_generator, SystemKind, SystemParams};

    #[test]
    fn expm_of_diagonal_and_nilpotent() {
        let mut d = OperatorMatrix::<f64>::zeros(3);
        d[(0, 0)] = cplx(-1.0);
        d[(1, 1)] = Complex::new(0.0, 2.0);
        d[(2, 2)] = cplx(30.0);
        let e = expm(&d);
        assert!((e[(0, 0)] - cplx((-1f64).exp())).norm() < 1e-15);
        assert!((e[(1, 1)] - Complex::new(0.0, 2.0).exp()).norm() < 1e-14);
        assert!((e[(2, 2)].re / 30f64.exp() - 1.0).abs() < 1e-13);

        // Jordan block: exp([[λ,1],[0,λ]]) = e^λ [[1,1],[0,1]].
        let mut j = OperatorMatrix::<f64>::zeros(2);
        j[(0, 0)] = cplx(-0.5);
        j[(1, 1)] = cplx(-0.5);
        j[(0, 1)] = cplx(1.0);
        let e = expm(&j);
        let el = (-0.5f64).exp();
        assert!((e[(0, 1)].re - el).abs() < 1e-15);
        assert!((e[(0, 0)].re - el).abs() < 1e-15);
        assert!(e[(1, 0)].norm() < 1e-15);
    }

    #[test]
    fn isolated_excited_atom_decays() {
        let params = SystemParams::unentangled(0.8);
        let basis = build_basis(SystemKind::Unentangled);
        let k = build_generator(&params).unwrap();
        let e = basis.ket::<f64>(basis.labels()[1]);
        let out = propagate(&k, &e, 1.3).unwrap();
        let expected = e.scale_real((-2.0 * 0.8 * 1.3f64).exp());
        assert!(out.max_diff(&expected) < 1e-14);
    }

    #[test]
    fn pair_amplitude_decays_at_twice_kappa() {
        let params = SystemParams::unentangled(1.7);
        let basis = build_basis(SystemKind::Unentangled);
        let k = build_generator(&params).unwrap();
        let out = propagate(&k, &basis.initial_state(), 0.9).unwrap();
        assert!((out[4].re - (-1.8f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn zero_time_is_identity() {
        let params = SystemParams::entangled(0.4, 0.2, 1e-3);
        let k = build_generator(&params).unwrap();
        let s = StateVector::new((0..12).map(|i| Complex::new(i as f64, 1.0)).collect());
        assert!(propagate(&k, &s, 0.0).unwrap().max_diff(&s) < 1e-14);
        assert!((&evolution_operator(&k, 0.0).unwrap() - &OperatorMatrix::identity(12)).max_abs() < 1e-14);
    }

    #[test]
    fn propagate_rejects_bad_input() {
        let k = build_generator(&SystemParams::unentangled(1.0)).unwrap();
        let s = StateVector::<f64>::basis(6, 4);
        assert_eq!(propagate(&k, &s, -1.0), Err(Error::NegativeTime(-1.0)));
        assert!(matches!(
            propagate(&k, &StateVector::basis(12, 0), 1.0),
            Err(Error::DimensionMismatch { expected: 6, found: 12 })
        ));
    }

    #[test]
    fn closed_form_at_origin() {
        for gamma in [0.1, 0.5, 2.0] {
            let k = closed_form_amplitudes(gamma, 0.0).unwrap();
            assert_eq!((k.alpha, k.beta, k.a, k.b, k.c), (1.0, 0.0, 1.0, 0.0, 1.0));
        }
    }

    #[test]
    fn closed_form_exceptional_point() {
        let k = closed_form_amplitudes(0.5, 1.0).unwrap();
        let expected = -2.0 * (-2f64).exp();
        assert!((k.beta - expected).abs() < 1e-15);
        assert!((k.beta + 0.270_670_566).abs() < 1e-8);
        assert!((k.b + 2.0 * 0.5f64.sqrt() * (-1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn closed_form_rejects_bad_gamma() {
        assert!(closed_form_amplitudes(0.0, 1.0).is_err());
        assert!(closed_form_amplitudes(-1.0, 1.0).is_err());
        assert!(closed_form_amplitudes(1.0, -1.0).is_err());
    }

    #[test]
    fn relative_decay_is_continuous() {
        for x in [0.999e-8f64, 1.001e-8, 1e-3, 0.5] {
            let series = 1.0 - x / 2.0 + x * x / 6.0 - x * x * x / 24.0;
            assert!((relative_decay(x) - series).abs() < 1e-15 + x.powi(4) / 120.0);
        }
    }
}
