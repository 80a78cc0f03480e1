//! Single-mode picture of two-photon interference at the interferometer.
//!
//! The atom's output is idealized as `d|11⟩ + e|20⟩ + f|02⟩` in the
//! `(a_out, b_out)` Fock basis. The interferometer maps creation operators as
//! `a† → e^{iφ}(sin ω c† + cos ω d†)`, `b† → cos ω c† − sin ω d†`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::model::MziParams;
use crate::scalar::Real;

/// Amplitudes on `|11⟩`, `|20⟩`, `|02⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPhotonState<T> {
    pub d: Complex<T>,
    pub e: Complex<T>,
    pub f: Complex<T>,
}

impl<T: Real> TwoPhotonState<T> {
    pub fn new(d: Complex<T>, e: Complex<T>, f: Complex<T>) -> Self {
        Self { d, e, f }
    }

    pub fn norm_sqr(&self) -> T {
        self.d.norm_sqr() + self.e.norm_sqr() + self.f.norm_sqr()
    }

    fn check_normalized(&self) -> Result<()> {
        check_norm(self.norm_sqr())
    }

    /// Amplitude on `(|20⟩ + |02⟩)/√2`.
    pub fn plus(&self) -> Complex<T> {
        (self.e + self.f) * T::FRAC_1_SQRT_2()
    }

    /// Amplitude on `(|20⟩ − |02⟩)/√2`.
    pub fn minus(&self) -> Complex<T> {
        (self.e - self.f) * T::FRAC_1_SQRT_2()
    }
}

fn check_norm<T: Real>(norm_sqr: T) -> Result<()> {
    if (norm_sqr - T::one()).abs() > T::norm_tolerance() {
        return Err(Error::Unnormalized(norm_sqr.sqrt().as_f64()));
    }
    Ok(())
}

/// Output state in the `(c_out, d_out)` Fock basis.
pub fn transform_two_photon<T: Real>(state: &TwoPhotonState<T>, mzi: &MziParams<T>) -> Result<TwoPhotonState<T>> {
    state.check_normalized()?;
    let (s, c) = mzi.omega.sin_cos();
    let two = T::lit(2.0);
    let half_sin = (two * mzi.omega).sin() * T::FRAC_1_SQRT_2();
    let cos2 = (two * mzi.omega).cos();
    let ph = Complex::from_polar(T::one(), mzi.phi);
    let ph2 = ph * ph;

    // Images of |11⟩, |20⟩, |02⟩ as (|11⟩, |20⟩, |02⟩) coefficient triples.
    let from11 = [ph * cos2, ph * half_sin, -ph * half_sin];
    let from20 = [ph2 * half_sin, ph2 * s * s, ph2 * c * c];
    let from02 = [-Complex::from(half_sin), Complex::from(c * c), Complex::from(s * s)];

    let out = |k: usize| state.d * from11[k] + state.e * from20[k] + state.f * from02[k];
    Ok(TwoPhotonState::new(out(0), out(1), out(2)))
}

/// Probability of one photon in each output port.
pub fn split_probability<T: Real>(state: &TwoPhotonState<T>, mzi: &MziParams<T>) -> Result<T> {
    Ok(transform_two_photon(state, mzi)?.d.norm_sqr())
}

/// `|11⟩` output amplitude for the input `d|11⟩ + g(|20⟩ − |02⟩)/√2`:
/// `e^{iφ}(d cos 2ω + g sin 2ω cos φ)`.
pub fn amplitude_11<T: Real>(d: Complex<T>, g: Complex<T>, mzi: &MziParams<T>) -> Result<Complex<T>> {
    check_norm(d.norm_sqr() + g.norm_sqr())?;
    let two = T::lit(2.0);
    let w2 = two * mzi.omega;
    let ph = Complex::from_polar(T::one(), mzi.phi);
    Ok(ph * (d * w2.cos() + g * (w2.sin() * mzi.phi.cos())))
}

/// Best split probability over ω at φ = 0 for `d|11⟩ + g(|20⟩ − |02⟩)/√2`:
/// `1/2 + √(x² + y²)/2` with `x = |d|² − |g|²`, `y = 2|d||g| cos Δ`.
pub fn s_max<T: Real>(d: Complex<T>, g: Complex<T>) -> Result<T> {
    check_norm(d.norm_sqr() + g.norm_sqr())?;
    let half = T::lit(0.5);
    let (x, y) = interference_terms(d, g);
    Ok(half + half * x.hypot(y))
}

/// `(|d|² − |g|², 2|d||g| cos Δ)` where Δ is the relative phase of d and g.
fn interference_terms<T: Real>(d: Complex<T>, g: Complex<T>) -> (T, T) {
    let x = d.norm_sqr() - g.norm_sqr();
    let y = T::lit(2.0) * (d * g.conj()).re;
    (x, y)
}

/// Best split probability over ω at φ = 0 for an arbitrary normalized
/// state. The `|+⟩` component never reaches `|11⟩` at φ = 0, so only the
/// `|11⟩`/`|−⟩` pair interferes.
pub fn max_split_probability<T: Real>(state: &TwoPhotonState<T>) -> Result<T> {
    state.check_normalized()?;
    let g = state.minus();
    let half = T::lit(0.5);
    let (x, y) = interference_terms(state.d, g);
    Ok(half * (state.d.norm_sqr() + g.norm_sqr()) + half * x.hypot(y))
}
