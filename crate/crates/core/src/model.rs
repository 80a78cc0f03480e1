//! System parameters, the composite basis, and the effective generator and
//! jump operators of the source → feeder cavity → 1D atom chain.
//!
//! Rates are measured in units of the feeder-cavity rate κ, which is fixed
//! to 1. The no-jump evolution is `ψ(t) = exp(-K t) ψ(0)`, i.e. the
//! non-Hermitian Hamiltonian is `H = -iK`.

use std::fmt;

use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{OperatorMatrix, StateVector};
use crate::scalar::Real;

/// Which photon-pair source feeds the feeder cavity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemKind {
    /// Two-photon Fock state initially stored in the feeder cavity.
    Unentangled,
    /// Cascaded three-level emitter populating the feeder cavity with a
    /// time-energy entangled pair.
    Entangled,
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SystemKind::Unentangled => f.write_str("unentangled"),
            SystemKind::Entangled => f.write_str("entangled"),
        }
    }
}

/// Physical rates in units of κ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams<T> {
    /// Enhanced half-decay rate of the 1D atom, γ/κ.
    pub gamma: T,
    /// Half-decay rate of the three-level source, δ/κ. Entangled kind only.
    pub delta: T,
    /// Left-mirror bandwidth of the feeder cavity, χ/κ. Entangled kind only.
    pub chi: T,
    pub kind: SystemKind,
}

impl<T: Real> SystemParams<T> {
    pub fn unentangled(gamma: T) -> Self {
        Self {
            gamma,
            delta: T::zero(),
            chi: T::zero(),
            kind: SystemKind::Unentangled,
        }
    }

    pub fn entangled(gamma: T, delta: T, chi: T) -> Self {
        Self {
            gamma,
            delta,
            chi,
            kind: SystemKind::Entangled,
        }
    }

    pub fn with_chi(self, chi: T) -> Self {
        Self { chi, ..self }
    }

    /// Rejects non-finite or negative rates and a non-positive γ.
    pub fn validate(&self) -> Result<()> {
        check_rate("gamma", self.gamma, false)?;
        if self.kind == SystemKind::Entangled {
            check_rate("delta", self.delta, true)?;
            check_rate("chi", self.chi, true)?;
        }
        Ok(())
    }
}

fn check_rate<T: Real>(name: &'static str, value: T, allow_zero: bool) -> Result<()> {
    let bad = |reason| {
        Err(Error::InvalidParameter {
            name,
            value: value.as_f64(),
            reason,
        })
    };
    if !value.is_finite() {
        return bad("rate must be finite");
    }
    if value < T::zero() {
        return bad("rate must be non-negative");
    }
    if !allow_zero && value.is_zero() {
        return bad("rate must be positive");
    }
    Ok(())
}

/// Interferometer phases in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MziParams<T> {
    /// Amplitude splitting phase ω.
    pub omega: T,
    /// Relative input phase φ.
    pub phi: T,
}

impl<T: Real> MziParams<T> {
    pub fn new(omega: T, phi: T) -> Self {
        Self { omega, phi }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level {
    Ground,
    Excited,
}

impl Level {
    fn is_excited(self) -> bool {
        self == Level::Excited
    }

    fn symbol(self) -> char {
        match self {
            Level::Ground => 'g',
            Level::Excited => 'e',
        }
    }
}

/// Highest feeder-cavity Fock number kept. Two excitations at most ever
/// enter the system, so the truncation is exact.
pub const MAX_PHOTONS: u8 = 2;

/// One basis ket |q, n, s⟩: source level (entangled kind only), feeder
/// photons, two-level atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisLabel {
    pub source: Option<Level>,
    pub photons: u8,
    pub atom: Level,
}

impl BasisLabel {
    pub fn new(source: Option<Level>, photons: u8, atom: Level) -> Self {
        Self { source, photons, atom }
    }

    /// Excitation number; a source excitation counts as two photons.
    pub fn excitation(&self) -> u32 {
        let source = match self.source {
            Some(Level::Excited) => 2,
            _ => 0,
        };
        source + u32::from(self.photons) + u32::from(self.atom.is_excited())
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("|")?;
        if let Some(q) = self.source {
            write!(f, "{}", q.symbol())?;
        }
        write!(f, "{}{}⟩", self.photons, self.atom.symbol())
    }
}

/// Ordered basis. Unentangled: `[|0g⟩,|0e⟩,|1g⟩,|1e⟩,|2g⟩,|2e⟩]`.
/// Entangled: the same six kets with source `g`, followed by the six with
/// source `e`, so index = 6·q + 2·n + s.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisDescriptor {
    kind: SystemKind,
    labels: Vec<BasisLabel>,
}

impl BasisDescriptor {
    pub fn kind(&self) -> SystemKind {
        self.kind
    }

    pub fn dimension(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[BasisLabel] {
        &self.labels
    }

    pub fn index_of(&self, label: &BasisLabel) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Unit state on `label`. Panics if the label is not in this basis.
    pub fn ket<T: Real>(&self, label: BasisLabel) -> StateVector<T> {
        let index = self
            .index_of(&label)
            .unwrap_or_else(|| panic!("{label} is not part of the {} basis", self.kind));
        StateVector::basis(self.dimension(), index)
    }

    /// The two-excitation state each system starts from: |2g⟩ or |e0g⟩.
    pub fn initial_state<T: Real>(&self) -> StateVector<T> {
        self.ket(match self.kind {
            SystemKind::Unentangled => BasisLabel::new(None, 2, Level::Ground),
            SystemKind::Entangled => BasisLabel::new(Some(Level::Excited), 0, Level::Ground),
        })
    }

    /// Matrix of a single-mode operator given by its action on each label.
    fn operator<T: Real>(&self, action: impl Fn(&BasisLabel) -> Option<(BasisLabel, T)>) -> OperatorMatrix<T> {
        let mut m = OperatorMatrix::zeros(self.dimension());
        for (col, label) in self.labels.iter().enumerate() {
            if let Some((image, coeff)) = action(label) {
                if let Some(row) = self.index_of(&image) {
                    m[(row, col)] += Complex::new(coeff, T::zero());
                }
            }
        }
        m
    }

    /// Feeder-cavity annihilation operator `a`.
    pub fn cavity_lowering<T: Real>(&self) -> OperatorMatrix<T> {
        self.operator(|l| {
            (l.photons > 0).then(|| {
                let coeff = T::from_u8(l.photons).unwrap().sqrt();
                (
                    BasisLabel {
                        photons: l.photons - 1,
                        ..*l
                    },
                    coeff,
                )
            })
        })
    }

    /// Two-level atom lowering operator `σ`.
    pub fn atom_lowering<T: Real>(&self) -> OperatorMatrix<T> {
        self.operator(|l| {
            l.atom.is_excited().then(|| {
                (
                    BasisLabel {
                        atom: Level::Ground,
                        ..*l
                    },
                    T::one(),
                )
            })
        })
    }

    /// Three-level source lowering operator `σₛ` (|e⟩ → |g⟩); zero on the
    /// unentangled basis.
    pub fn source_lowering<T: Real>(&self) -> OperatorMatrix<T> {
        self.operator(|l| match l.source {
            Some(Level::Excited) => Some((
                BasisLabel {
                    source: Some(Level::Ground),
                    ..*l
                },
                T::one(),
            )),
            _ => None,
        })
    }

    /// Diagonal excitation-number operator.
    pub fn number_operator<T: Real>(&self) -> OperatorMatrix<T> {
        self.operator(|l| Some((*l, T::from_u32(l.excitation()).unwrap())))
    }
}

pub fn build_basis(kind: SystemKind) -> BasisDescriptor {
    let sources: &[Option<Level>] = match kind {
        SystemKind::Unentangled => &[None],
        SystemKind::Entangled => &[Some(Level::Ground), Some(Level::Excited)],
    };
    let labels = sources
        .iter()
        .flat_map(|&source| {
            (0..=MAX_PHOTONS).flat_map(move |photons| {
                [Level::Ground, Level::Excited]
                    .into_iter()
                    .map(move |atom| BasisLabel::new(source, photons, atom))
            })
        })
        .collect();
    BasisDescriptor { kind, labels }
}

/// Builds `K` with `H = -iK`:
///
/// `K = κ a†a + 2γ σ†σ + 2√(κγ) σ†a`, plus `2δ σₛ†σₛ + 2√(2χδ) (a†)² σₛ`
/// for the entangled source.
pub fn build_generator<T: Real>(params: &SystemParams<T>) -> Result<OperatorMatrix<T>> {
    params.validate()?;
    let basis = build_basis(params.kind);
    let two = T::lit(2.0);
    let a = basis.cavity_lowering::<T>();
    let sigma = basis.atom_lowering::<T>();
    let ad = a.adjoint();
    let sd = sigma.adjoint();

    let mut k = ad.matmul(&a);
    k += &sd.matmul(&sigma).scale_real(two * params.gamma);
    k += &sd.matmul(&a).scale_real(two * params.gamma.sqrt());

    if params.kind == SystemKind::Entangled {
        let ss = basis.source_lowering::<T>();
        k += &ss.adjoint().matmul(&ss).scale_real(two * params.delta);
        let pair = ad.matmul(&ad).matmul(&ss);
        k += &pair.scale_real(two * (two * params.chi * params.delta).sqrt());
    }
    Ok(k)
}

/// How the atom term of the collapse operators is weighted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CollapseConvention {
    /// `a_out = √(2γ)σ + √(2κ)a`, `b_out = √(2γ)σ`; consistent with the
    /// generator.
    #[default]
    Consistent,
    /// `a_out = √(2κ)σ + √(2κ)a`, `b_out = √(2κ)σ`. Only valid at γ = κ;
    /// kept so the verification suite can demonstrate the mismatch.
    AtomAtCavityRate,
}

/// Detection channels of the atom–cavity system.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpOperators<T> {
    pub a_out: OperatorMatrix<T>,
    pub b_out: OperatorMatrix<T>,
    source: Option<OperatorMatrix<T>>,
}

impl<T: Real> JumpOperators<T> {
    /// Composite source-decay channel `s_out = 2√δ σₛ + √(2χ) a²`.
    pub fn s_out(&self) -> Result<&OperatorMatrix<T>> {
        self.source.as_ref().ok_or(Error::NoSourceChannel)
    }

    /// `Σ J†J` over every channel present.
    pub fn total_flux(&self) -> OperatorMatrix<T> {
        let mut sum = self.a_out.adjoint().matmul(&self.a_out);
        sum += &self.b_out.adjoint().matmul(&self.b_out);
        if let Some(s) = &self.source {
            sum += &s.adjoint().matmul(s);
        }
        sum
    }
}

pub fn build_jump_operators<T: Real>(params: &SystemParams<T>) -> Result<JumpOperators<T>> {
    build_jump_operators_with(params, CollapseConvention::Consistent)
}

pub fn build_jump_operators_with<T: Real>(
    params: &SystemParams<T>,
    convention: CollapseConvention,
) -> Result<JumpOperators<T>> {
    params.validate()?;
    let basis = build_basis(params.kind);
    let two = T::lit(2.0);
    let a = basis.cavity_lowering::<T>();
    let sigma = basis.atom_lowering::<T>();
    let atom_rate = match convention {
        CollapseConvention::Consistent => params.gamma,
        CollapseConvention::AtomAtCavityRate => T::one(),
    };
    let atom_term = sigma.scale_real((two * atom_rate).sqrt());
    let a_out = &atom_term + &a.scale_real(two.sqrt());
    let b_out = atom_term;
    let source = (params.kind == SystemKind::Entangled).then(|| {
        let ss = basis.source_lowering::<T>();
        &ss.scale_real(two * params.delta.sqrt()) + &a.matmul(&a).scale_real((two * params.chi).sqrt())
    });
    Ok(JumpOperators { a_out, b_out, source })
}

/// Range of excitation numbers present in a state's support.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExcitationRange {
    pub min: u32,
    pub max: u32,
}

pub fn excitation_number<T: Real>(basis: &BasisDescriptor, state: &StateVector<T>) -> Result<ExcitationRange> {
    if state.dim() != basis.dimension() {
        return Err(Error::DimensionMismatch {
            expected: basis.dimension(),
            found: state.dim(),
        });
    }
    let mut support = basis
        .labels()
        .iter()
        .zip(state.amplitudes())
        .filter(|(_, z)| !z.is_zero())
        .map(|(l, _)| l.excitation());
    let first = support.next().ok_or(Error::ZeroState)?;
    let (min, max) = support.fold((first, first), |(lo, hi), n| (lo.min(n), hi.max(n)));
    Ok(ExcitationRange { min, max })
}
