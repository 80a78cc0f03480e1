//! Two-time detection densities Γ^{xy}(t, τ): first photon at port `x` at
//! time `t`, second at port `y` at time `t + τ`.
//!
//! The numeric path is jump → propagate → jump on the pure conditional state:
//! `Γ^{xy}(t, τ) = ‖J_y e^{-Kτ} J_x e^{-Kt} ψ₀‖²`. The analytic path is the
//! closed form for the unentangled source built from [`AmplitudeKernel`].
//!
//! [`AmplitudeKernel`]: crate::propagator::AmplitudeKernel

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::interferometer::{output_jump_operators, OutputJumps, Port};
use crate::linalg::{OperatorMatrix, StateVector};
use crate::model::{
    build_basis, build_generator, build_jump_operators_with, excitation_number, BasisDescriptor, CollapseConvention,
    MziParams, SystemParams,
};
use crate::propagator::{check_time, closed_form_amplitudes, cplx, evolution_operator};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationPoint<T> {
    pub t: T,
    pub tau: T,
    pub value: T,
}

/// Generator and port operators for one (system, interferometer) setting.
#[derive(Debug, Clone)]
pub struct Detector<T> {
    params: SystemParams<T>,
    mzi: MziParams<T>,
    basis: BasisDescriptor,
    generator: OperatorMatrix<T>,
    outputs: OutputJumps<T>,
}

impl<T: Real> Detector<T> {
    pub fn new(params: &SystemParams<T>, mzi: &MziParams<T>) -> Result<Self> {
        Self::with_convention(params, mzi, CollapseConvention::Consistent)
    }

    pub fn with_convention(
        params: &SystemParams<T>,
        mzi: &MziParams<T>,
        convention: CollapseConvention,
    ) -> Result<Self> {
        let generator = build_generator(params)?;
        let jumps = build_jump_operators_with(params, convention)?;
        let outputs = output_jump_operators(mzi, &jumps.a_out, &jumps.b_out)?;
        Ok(Self {
            params: *params,
            mzi: *mzi,
            basis: build_basis(params.kind),
            generator,
            outputs,
        })
    }

    pub fn params(&self) -> &SystemParams<T> {
        &self.params
    }

    pub fn mzi(&self) -> &MziParams<T> {
        &self.mzi
    }

    pub fn basis(&self) -> &BasisDescriptor {
        &self.basis
    }

    pub fn generator(&self) -> &OperatorMatrix<T> {
        &self.generator
    }

    pub fn port(&self, port: Port) -> &OperatorMatrix<T> {
        self.outputs.port(port)
    }

    pub fn initial_state(&self) -> StateVector<T> {
        self.basis.initial_state()
    }

    /// Requires a normalized state supported on the two-excitation sector.
    pub fn check_initial(&self, initial: &StateVector<T>) -> Result<()> {
        let range = excitation_number(&self.basis, initial)?;
        if range.min != 2 || range.max != 2 {
            return Err(Error::InvalidParameter {
                name: "initial excitation number",
                value: f64::from(if range.min != 2 { range.min } else { range.max }),
                reason: "initial state must carry exactly two excitations",
            });
        }
        let norm = initial.norm();
        if (norm - T::one()).abs() > T::norm_tolerance() {
            return Err(Error::Unnormalized(norm.as_f64()));
        }
        Ok(())
    }

    /// `Γ^{xy}(t, τ)` for an explicit initial state.
    pub fn correlation(&self, x: Port, y: Port, initial: &StateVector<T>, t: T, tau: T) -> Result<T> {
        self.check_initial(initial)?;
        check_time(t)?;
        check_time(tau)?;
        let before = evolution_operator(&self.generator, t)?.apply(initial);
        let after_first = self.port(x).apply(&before);
        let between = evolution_operator(&self.generator, tau)?.apply(&after_first);
        Ok(self.port(y).apply(&between).norm_sqr())
    }

    /// Evaluates `Γ^{xy}` on a tensor grid, row-major in `t`. Points are
    /// computed concurrently; the output order is deterministic.
    pub fn correlation_grid(
        &self,
        x: Port,
        y: Port,
        initial: &StateVector<T>,
        ts: &[T],
        taus: &[T],
    ) -> Result<Vec<CorrelationPoint<T>>> {
        self.check_initial(initial)?;
        ts.par_iter()
            .flat_map_iter(|&t| taus.iter().map(move |&tau| (t, tau)))
            .map(|(t, tau)| {
                self.correlation(x, y, initial, t, tau)
                    .map(|value| CorrelationPoint { t, tau, value })
            })
            .collect()
    }
}

pub fn gamma_numeric<T: Real>(
    params: &SystemParams<T>,
    mzi: &MziParams<T>,
    x: Port,
    y: Port,
    initial: &StateVector<T>,
    t: T,
    tau: T,
) -> Result<T> {
    Detector::new(params, mzi)?.correlation(x, y, initial, t, tau)
}

/// Order of the two detections covered by the closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// First photon at `c`, second at `d`.
    CD,
    /// First photon at `d`, second at `c`.
    DC,
}

/// Closed-form `Γ^{cd}` / `Γ^{dc}` for the unentangled source (κ = 1).
pub fn gamma_analytic<T: Real>(gamma: T, mzi: &MziParams<T>, direction: Direction, t: T, tau: T) -> Result<T> {
    check_time(t)?;
    check_time(tau)?;
    let first = closed_form_amplitudes(gamma, t)?;
    let second = closed_form_amplitudes(gamma, tau)?;
    let (s, c) = mzi.omega.sin_cos();
    let ph = Complex::from_polar(T::one(), -mzi.phi);
    let sg = gamma.sqrt();
    let sqrt2 = T::lit(2.0).sqrt();
    let (alpha, beta) = (cplx(first.alpha), cplx(first.beta));
    let (a, b, cc) = (cplx(second.a), cplx(second.b), cplx(second.c));

    // Port coefficients of the atom term (a_out weight e^{-iφ}·, b_out weight ·).
    let c_atom = ph * s + c;
    let d_atom = ph * c - s;

    let amplitude = match direction {
        Direction::CD => {
            cc * ph * d_atom * s * sg * beta
                + (b * d_atom * sg + a * ph * c) * (ph * s * sqrt2 * alpha + c_atom * sg * beta)
        }
        Direction::DC => {
            cc * ph * c * c_atom * sg * beta
                + (b * c_atom * sg + a * ph * s) * (ph * c * sqrt2 * alpha + d_atom * sg * beta)
        }
    };
    Ok(T::lit(4.0) * amplitude.norm_sqr())
}
