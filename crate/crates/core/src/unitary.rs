//! Small dense unitaries acting on one or two qubits.

use std::ops::Mul;

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Tolerance applied when a caller hands us a matrix that should be unitary.
pub const UNITARITY_TOL: f64 = 1e-6;

pub(crate) const fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// A 2x2 unitary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Unitary2(Matrix2<C64>);

/// A 4x4 unitary. Basis order is |q_a q_b> with q_a the more significant bit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Unitary4(Matrix4<C64>);

fn deviation2(m: &Matrix2<C64>) -> f64 {
    (m * m.adjoint() - Matrix2::identity())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

fn deviation4(m: &Matrix4<C64>) -> f64 {
    (m * m.adjoint() - Matrix4::identity())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

impl Unitary2 {
    pub fn new(m: Matrix2<C64>) -> Result<Self> {
        let deviation = deviation2(&m);
        if deviation > UNITARITY_TOL || !deviation.is_finite() {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self(m))
    }

    /// Wraps a matrix that is unitary by construction.
    pub(crate) fn from_matrix_unchecked(m: Matrix2<C64>) -> Self {
        Self(m)
    }

    pub fn from_rows(rows: [[C64; 2]; 2]) -> Result<Self> {
        Self::new(Matrix2::new(rows[0][0], rows[0][1], rows[1][0], rows[1][1]))
    }

    pub fn identity() -> Self {
        Self(Matrix2::identity())
    }

    pub fn matrix(&self) -> &Matrix2<C64> {
        &self.0
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    pub fn dagger(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn unitarity_deviation(&self) -> f64 {
        deviation2(&self.0)
    }

    pub fn determinant(&self) -> C64 {
        self.0.determinant()
    }

    /// `self ⊗ other`, with `self` on the more significant qubit.
    pub fn kron(&self, other: &Unitary2) -> Unitary4 {
        Unitary4(self.0.kronecker(&other.0).fixed_view::<4, 4>(0, 0).into_owned())
    }

    /// Single-qubit rotation `Rz(phi) Ry(theta) Rz(lambda)`.
    pub fn zyz(phi: f64, theta: f64, lambda: f64) -> Self {
        let (s, co) = (theta / 2.0).sin_cos();
        let e = |a: f64| C64::from_polar(1.0, a);
        Self(Matrix2::new(
            e(-(phi + lambda) / 2.0) * co,
            -e(-(phi - lambda) / 2.0) * s,
            e((phi - lambda) / 2.0) * s,
            e((phi + lambda) / 2.0) * co,
        ))
    }
}

impl Unitary4 {
    pub fn new(m: Matrix4<C64>) -> Result<Self> {
        let deviation = deviation4(&m);
        if deviation > UNITARITY_TOL || !deviation.is_finite() {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self(m))
    }

    pub(crate) fn from_matrix_unchecked(m: Matrix4<C64>) -> Self {
        Self(m)
    }

    pub fn from_rows(rows: [[C64; 4]; 4]) -> Result<Self> {
        Self::new(Matrix4::from_fn(|r, c| rows[r][c]))
    }

    pub fn identity() -> Self {
        Self(Matrix4::identity())
    }

    pub fn matrix(&self) -> &Matrix4<C64> {
        &self.0
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    pub fn dagger(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn unitarity_deviation(&self) -> f64 {
        deviation4(&self.0)
    }

    pub fn determinant(&self) -> C64 {
        self.0.determinant()
    }

    /// Same operator with the roles of the two qubits exchanged.
    pub fn swapped_qubits(&self) -> Self {
        const P: [usize; 4] = [0, 2, 1, 3];
        Self(Matrix4::from_fn(|r, c| self.0[(P[r], P[c])]))
    }

    /// Phase-insensitive overlap `|tr(self† other)| / 4`.
    pub fn trace_overlap(&self, other: &Unitary4) -> f64 {
        let mut tr = C64::new(0.0, 0.0);
        for r in 0..4 {
            for k in 0..4 {
                tr += self.0[(k, r)].conj() * other.0[(k, r)];
            }
        }
        tr.norm() / 4.0
    }

    /// Phase-insensitive distance `1 - |tr(self† other)| / 4`.
    pub fn phase_infidelity(&self, other: &Unitary4) -> f64 {
        (1.0 - self.trace_overlap(other)).max(0.0)
    }
}

impl Mul for Unitary2 {
    type Output = Unitary2;
    fn mul(self, rhs: Unitary2) -> Unitary2 {
        Unitary2(self.0 * rhs.0)
    }
}

impl Mul for Unitary4 {
    type Output = Unitary4;
    fn mul(self, rhs: Unitary4) -> Unitary4 {
        Unitary4(self.0 * rhs.0)
    }
}

impl<'a> Mul<&'a Unitary4> for &'a Unitary4 {
    type Output = Unitary4;
    fn mul(self, rhs: &Unitary4) -> Unitary4 {
        Unitary4(self.0 * rhs.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_unitary() {
        let m = Matrix2::new(c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0));
        assert!(matches!(Unitary2::new(m), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn kron_orders_first_factor_as_high_bit() {
        let x = Unitary2::from_rows([[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]]).unwrap();
        let xi = x.kron(&Unitary2::identity());
        // X on the high qubit maps |00> to |10>.
        assert_eq!(xi.get(2, 0), c(1.0, 0.0));
    }

    #[test]
    fn zyz_is_unitary() {
        let u = Unitary2::zyz(0.3, 1.1, -2.0);
        assert!(u.unitarity_deviation() < 1e-14);
    }
}
