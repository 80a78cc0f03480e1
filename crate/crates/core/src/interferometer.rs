//! Two-mode Mach-Zehnder transformation of the atom's output ports.

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::OperatorMatrix;
use crate::model::MziParams;
use crate::scalar::Real;

/// Output port of the interferometer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Port {
    C,
    D,
}

impl Port {
    pub const ALL: [Port; 2] = [Port::C, Port::D];
}

/// `u` maps `(a_out, b_out)` to `(c_out, d_out)`:
///
/// ```text
/// ⎡c⎤   ⎡e^{iφ} sin ω   cos ω⎤ ⎡a⎤
/// ⎣d⎦ = ⎣e^{iφ} cos ω  -sin ω⎦ ⎣b⎦
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MziMatrix<T> {
    pub u: [[Complex<T>; 2]; 2],
}

impl<T: Real> MziMatrix<T> {
    /// `u†u`.
    pub fn gram(&self) -> [[Complex<T>; 2]; 2] {
        let mut g = [[Complex::zero(); 2]; 2];
        for (i, row) in g.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                *entry = (0..2).fold(Complex::zero(), |acc, k| acc + self.u[k][i].conj() * self.u[k][j]);
            }
        }
        g
    }

    /// Largest entry of `|u†u - I|`.
    pub fn unitarity_defect(&self) -> T {
        let g = self.gram();
        let mut worst = T::zero();
        for (i, row) in g.iter().enumerate() {
            for (j, entry) in row.iter().enumerate() {
                let target = if i == j { T::one() } else { T::zero() };
                worst = worst.max((entry - Complex::new(target, T::zero())).norm());
            }
        }
        worst
    }
}

pub fn mzi_matrix<T: Real>(mzi: &MziParams<T>) -> MziMatrix<T> {
    let phase = Complex::from_polar(T::one(), mzi.phi);
    let (s, c) = mzi.omega.sin_cos();
    let re = |x: T| Complex::new(x, T::zero());
    MziMatrix {
        u: [[phase * s, re(c)], [phase * c, re(-s)]],
    }
}

/// Detection operators behind the interferometer.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputJumps<T> {
    pub c_out: OperatorMatrix<T>,
    pub d_out: OperatorMatrix<T>,
}

impl<T: Real> OutputJumps<T> {
    pub fn port(&self, port: Port) -> &OperatorMatrix<T> {
        match port {
            Port::C => &self.c_out,
            Port::D => &self.d_out,
        }
    }
}

pub fn output_jump_operators<T: Real>(
    mzi: &MziParams<T>,
    a_out: &OperatorMatrix<T>,
    b_out: &OperatorMatrix<T>,
) -> Result<OutputJumps<T>> {
    if a_out.dim() != b_out.dim() {
        return Err(Error::DimensionMismatch {
            expected: a_out.dim(),
            found: b_out.dim(),
        });
    }
    let u = mzi_matrix(mzi).u;
    let combine = |row: &[Complex<T>; 2]| &a_out.scale(row[0]) + &b_out.scale(row[1]);
    Ok(OutputJumps {
        c_out: combine(&u[0]),
        d_out: combine(&u[1]),
    })
}
