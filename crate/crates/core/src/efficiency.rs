//! Port probabilities and the splitting efficiency `S = P_cd + P_dc`.

use serde::{Deserialize, Serialize};

use crate::correlations::Detector;
use crate::error::{Error, Result};
use crate::interferometer::Port;
use crate::model::{MziParams, SystemKind, SystemParams};
use crate::propagator::evolution_operator;
use crate::quadrature::{integrate_decaying, DecayRates, QuadratureSettings};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Analytic,
    Numeric,
}

impl std::fmt::Display for Provenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Provenance::Analytic => "analytic",
            Provenance::Numeric => "numeric",
        })
    }
}

/// Joint detection probabilities, first port then second port.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PortProbabilities<T> {
    pub cc: T,
    pub cd: T,
    pub dc: T,
    pub dd: T,
}

impl<T: Real> PortProbabilities<T> {
    pub fn get(&self, x: Port, y: Port) -> T {
        match (x, y) {
            (Port::C, Port::C) => self.cc,
            (Port::C, Port::D) => self.cd,
            (Port::D, Port::C) => self.dc,
            (Port::D, Port::D) => self.dd,
        }
    }

    pub fn total(&self) -> T {
        self.cc + self.cd + self.dc + self.dd
    }

    pub fn splitting(&self) -> T {
        self.cd + self.dc
    }

    /// Conditions on both photons reaching the monitored ports.
    pub fn normalized(&self) -> Self {
        let total = self.total();
        self.map(|p| p / total)
    }

    fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            cc: f(self.cc),
            cd: f(self.cd),
            dc: f(self.dc),
            dd: f(self.dd),
        }
    }

    fn combine(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        Self {
            cc: f(self.cc, other.cc),
            cd: f(self.cd, other.cd),
            dc: f(self.dc, other.dc),
            dd: f(self.dd, other.dd),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyResult<T> {
    pub s: T,
    /// Present for numeric results; the closed forms only give `S`.
    pub ports: Option<PortProbabilities<T>>,
    pub provenance: Provenance,
    pub params: SystemParams<T>,
    pub mzi: MziParams<T>,
}

/// Decay rates of the detection integrands: squared norms, so twice the
/// amplitude rates κ, 2γ and 2δ of `exp(-K t)`.
fn decay_rates<T: Real>(params: &SystemParams<T>) -> Result<DecayRates<T>> {
    let two = T::lit(2.0);
    let atom = two * params.gamma;
    let mut slowest = atom.min(T::one());
    let mut fastest = two + atom;
    if params.kind == SystemKind::Entangled {
        if !(params.delta > T::zero()) {
            return Err(Error::InvalidParameter {
                name: "delta",
                value: params.delta.as_f64(),
                reason: "the numeric entangled path needs a decaying source (delta > 0)",
            });
        }
        slowest = slowest.min(two * params.delta);
        fastest += two * params.delta;
    }
    Ok(DecayRates {
        slowest: two * slowest,
        fastest: two * fastest,
    })
}

/// Raw (not post-selected) `P_xy = ∬ Γ^{xy}(t, τ) dt dτ` for all four port
/// pairs.
///
/// The τ-integral is carried out at operator level,
/// `Q_y = ∫ e^{-K†τ} J_y† J_y e^{-Kτ} dτ`, so that
/// `P_xy = ∫ ‖Q_y^{1/2} J_x e^{-Kt} ψ₀‖² dt` reuses it for every `t`.
pub fn port_probabilities<T: Real>(
    params: &SystemParams<T>,
    mzi: &MziParams<T>,
    quad: &QuadratureSettings<T>,
) -> Result<PortProbabilities<T>> {
    quad.validate()?;
    let detector = Detector::new(params, mzi)?;
    let rates = decay_rates(params)?;
    let k = detector.generator();

    let second_detection = |port: Port| {
        let jump = detector.port(port);
        integrate_decaying(
            |tau: T| {
                let conditioned = jump.matmul(&evolution_operator(k, tau).expect("tau >= 0"));
                conditioned.adjoint().matmul(&conditioned)
            },
            rates,
            quad,
        )
        .map(|est| est.value)
    };
    let q_c = second_detection(Port::C)?;
    let q_d = second_detection(Port::D)?;

    let initial = detector.initial_state();
    let j_c = detector.port(Port::C);
    let j_d = detector.port(Port::D);
    let outer = integrate_decaying(
        |t: T| {
            let psi = evolution_operator(k, t).expect("t >= 0").apply(&initial);
            let after_c = j_c.apply(&psi);
            let after_d = j_d.apply(&psi);
            [
                q_c.sandwich(&after_c, &after_c).re,
                q_d.sandwich(&after_c, &after_c).re,
                q_c.sandwich(&after_d, &after_d).re,
                q_d.sandwich(&after_d, &after_d).re,
            ]
        },
        rates,
        quad,
    )?;
    let [cc, cd, dc, dd] = outer.value;
    Ok(PortProbabilities { cc, cd, dc, dd })
}

/// Raw `P_xy` for a single port pair.
pub fn port_probability<T: Real>(
    params: &SystemParams<T>,
    mzi: &MziParams<T>,
    x: Port,
    y: Port,
    quad: &QuadratureSettings<T>,
) -> Result<T> {
    Ok(port_probabilities(params, mzi, quad)?.get(x, y))
}

/// Numeric splitting efficiency.
///
/// For the entangled source the probabilities are post-selected on both
/// photons reaching the `c`/`d` detectors, evaluated at `χ` and `χ/2`, and
/// Richardson-extrapolated to `χ → 0`.
pub fn splitting_efficiency_numeric<T: Real>(
    params: &SystemParams<T>,
    mzi: &MziParams<T>,
    quad: &QuadratureSettings<T>,
) -> Result<EfficiencyResult<T>> {
    params.validate()?;
    let ports = match params.kind {
        SystemKind::Unentangled => port_probabilities(params, mzi, quad)?,
        SystemKind::Entangled => {
            if !(params.chi > T::zero()) {
                return Err(Error::InvalidParameter {
                    name: "chi",
                    value: params.chi.as_f64(),
                    reason: "the numeric entangled path needs a positive mirror bandwidth",
                });
            }
            let coarse = port_probabilities(params, mzi, quad)?.normalized();
            let half = params.with_chi(params.chi / T::lit(2.0));
            let fine = port_probabilities(&half, mzi, quad)?.normalized();
            fine.combine(&coarse, |f, c| f + (f - c))
        }
    };
    Ok(EfficiencyResult {
        s: ports.splitting(),
        ports: Some(ports),
        provenance: Provenance::Numeric,
        params: *params,
        mzi: *mzi,
    })
}

/// Closed-form `S(γ/κ, ω, φ)` for the unentangled two-photon Fock input.
pub fn splitting_efficiency_analytic_unentangled<T: Real>(gamma_over_kappa: T, mzi: &MziParams<T>) -> T {
    let g = gamma_over_kappa;
    let l = |x: f64| T::lit(x);
    let (w, p) = (mzi.omega, mzi.phi);
    let sin2w = (l(2.0) * w).sin();
    let trig = sin2w * sin2w * (l(2.0) * p).cos() + l(2.0) * (l(4.0) * w).sin() * p.cos();
    let numerator = l(8.0) * g.powi(3)
        + l(16.0) * g * g * trig
        + l(44.0) * g * g
        + (l(2.0) * g * (l(2.0) * g * (l(5.0) - l(2.0) * g) + l(5.0)) - l(3.0)) * (l(4.0) * w).cos()
        + l(38.0) * g
        + l(3.0);
    let denominator = l(4.0) * (l(2.0) * g + l(1.0)).powi(2) * (l(2.0) * g + l(3.0));
    numerator / denominator
}

/// Closed-form `S(γ/κ, δ/κ, ω)` at `φ = 0` for the time-energy entangled
/// pair. `δ = 0` is the maximal-entanglement limit.
pub fn splitting_efficiency_analytic_entangled<T: Real>(gamma: T, delta: T, omega: T) -> T {
    let (g, d) = (gamma, delta);
    let l = |x: f64| T::lit(x);
    let four_w = l(4.0) * omega;
    let sin_term = l(32.0) * g * g * (l(2.0) * g + l(2.0) * d + l(3.0)) * four_w.sin();
    let cos_coeff = -l(4.0)
        * g
        * (l(4.0) * g * (g * g + g - l(2.0)) + l(2.0) * g * (l(2.0) * g - l(3.0)) * d - l(5.0) * d - l(7.0))
        - l(6.0) * d
        - l(3.0);
    let constant = l(4.0)
        * g
        * (l(2.0) * g * (l(2.0) * g + l(13.0)) * d + l(4.0) * g * (g * (g + l(5.0)) + l(8.0)) + l(19.0) * d + l(17.0))
        + l(6.0) * d
        + l(3.0);
    let denominator =
        l(4.0) * (l(2.0) * g + l(1.0)).powi(2) * (l(2.0) * g + l(3.0)) * (l(2.0) * g + l(2.0) * d + l(1.0));
    (sin_term + cos_coeff * four_w.cos() + constant) / denominator
}

/// Wraps the unentangled closed form as an [`EfficiencyResult`].
pub fn analytic_result_unentangled<T: Real>(gamma: T, mzi: &MziParams<T>) -> EfficiencyResult<T> {
    EfficiencyResult {
        s: splitting_efficiency_analytic_unentangled(gamma, mzi),
        ports: None,
        provenance: Provenance::Analytic,
        params: SystemParams::unentangled(gamma),
        mzi: *mzi,
    }
}

/// Wraps the entangled closed form as an [`EfficiencyResult`] (`φ = 0`, χ unused).
pub fn analytic_result_entangled<T: Real>(gamma: T, delta: T, omega: T) -> EfficiencyResult<T> {
    EfficiencyResult {
        s: splitting_efficiency_analytic_entangled(gamma, delta, omega),
        ports: None,
        provenance: Provenance::Analytic,
        params: SystemParams::entangled(gamma, delta, T::zero()),
        mzi: MziParams::new(omega, T::zero()),
    }
}
