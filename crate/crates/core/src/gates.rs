//! Named single- and two-qubit gates.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};
use crate::unitary::{c, Unitary2, Unitary4};
use nalgebra::{Matrix2, Matrix4};

/// Result of looking up a gate by name.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StandardGate {
    One(Unitary2),
    Two(Unitary4),
}

impl StandardGate {
    pub fn one(self) -> Option<Unitary2> {
        match self {
            StandardGate::One(u) => Some(u),
            StandardGate::Two(_) => None,
        }
    }

    pub fn two(self) -> Option<Unitary4> {
        match self {
            StandardGate::Two(u) => Some(u),
            StandardGate::One(_) => None,
        }
    }
}

pub mod named {
    use super::*;

    pub fn i() -> Unitary2 {
        Unitary2::identity()
    }

    pub fn x() -> Unitary2 {
        m2([[0.0, 0.0], [1.0, 0.0], [1.0, 0.0], [0.0, 0.0]])
    }

    pub fn y() -> Unitary2 {
        m2([[0.0, 0.0], [0.0, -1.0], [0.0, 1.0], [0.0, 0.0]])
    }

    pub fn z() -> Unitary2 {
        m2([[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [-1.0, 0.0]])
    }

    /// `X·Z`, the simultaneous bit and phase flip.
    pub fn xz() -> Unitary2 {
        x() * z()
    }

    pub fn h() -> Unitary2 {
        let h = FRAC_1_SQRT_2;
        m2([[h, 0.0], [h, 0.0], [h, 0.0], [-h, 0.0]])
    }

    pub fn s() -> Unitary2 {
        m2([[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 1.0]])
    }

    pub fn sdg() -> Unitary2 {
        m2([[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, -1.0]])
    }

    pub fn rx(theta: f64) -> Unitary2 {
        let (s, co) = (theta / 2.0).sin_cos();
        m2([[co, 0.0], [0.0, -s], [0.0, -s], [co, 0.0]])
    }

    /// `diag(e^{-i theta/2}, e^{i theta/2})`.
    pub fn rz(theta: f64) -> Unitary2 {
        let (s, co) = (theta / 2.0).sin_cos();
        m2([[co, -s], [0.0, 0.0], [0.0, 0.0], [co, s]])
    }

    /// Control on the first (lower-index) qubit.
    pub fn cnot() -> Unitary4 {
        perm4([0, 1, 3, 2])
    }

    pub fn swap() -> Unitary4 {
        perm4([0, 2, 1, 3])
    }

    pub fn cz() -> Unitary4 {
        let mut m = Matrix4::identity();
        m[(3, 3)] = c(-1.0, 0.0);
        Unitary4::from_matrix_unchecked(m)
    }

    fn m2(e: [[f64; 2]; 4]) -> Unitary2 {
        Unitary2::from_matrix_unchecked(Matrix2::new(
            c(e[0][0], e[0][1]),
            c(e[1][0], e[1][1]),
            c(e[2][0], e[2][1]),
            c(e[3][0], e[3][1]),
        ))
    }

    /// Permutation matrix sending basis state `col` to `p[col]`.
    fn perm4(p: [usize; 4]) -> Unitary4 {
        let mut m = Matrix4::zeros();
        for (col, &row) in p.iter().enumerate() {
            m[(row, col)] = c(1.0, 0.0);
        }
        Unitary4::from_matrix_unchecked(m)
    }
}

/// Parses an angle such as `0.25`, `pi`, `-pi/2`, `3pi/4` or `0.5*pi`.
pub fn parse_angle(text: &str) -> Result<f64> {
    let bad = || Error::InvalidParameter(format!("cannot parse angle `{text}`"));
    let t = text.trim().to_ascii_lowercase().replace(' ', "");
    if let Ok(v) = t.parse::<f64>() {
        return Ok(v);
    }
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n, d.parse::<f64>().map_err(|_| bad())?),
        None => (t.as_str(), 1.0),
    };
    let coeff = num.strip_suffix("pi").ok_or_else(bad)?;
    let coeff = coeff.strip_suffix('*').unwrap_or(coeff);
    let k = match coeff {
        "" | "+" => 1.0,
        "-" => -1.0,
        s => s.parse::<f64>().map_err(|_| bad())?,
    };
    Ok(k * PI / den)
}

/// Looks up a gate by name. Parametrized rotations are written `Rx(theta)`
/// and `Rz(theta)`, with angles in [`parse_angle`] syntax.
pub fn standard_gate(name: &str) -> Result<StandardGate> {
    let key = name.trim();
    let upper = key.to_ascii_uppercase();
    if let Some(arg) = upper.strip_suffix(')').and_then(|s| s.split_once('(')) {
        let theta = parse_angle(&key[arg.0.len() + 1..key.len() - 1])?;
        return match arg.0 {
            "RX" => Ok(StandardGate::One(named::rx(theta))),
            "RZ" => Ok(StandardGate::One(named::rz(theta))),
            _ => Err(Error::UnknownGate(name.to_string())),
        };
    }
    Ok(match upper.as_str() {
        "I" | "ID" => StandardGate::One(named::i()),
        "X" => StandardGate::One(named::x()),
        "Y" => StandardGate::One(named::y()),
        "Z" => StandardGate::One(named::z()),
        "XZ" => StandardGate::One(named::xz()),
        "H" => StandardGate::One(named::h()),
        "S" => StandardGate::One(named::s()),
        "SDG" => StandardGate::One(named::sdg()),
        "CNOT" | "CX" => StandardGate::Two(named::cnot()),
        "CZ" => StandardGate::Two(named::cz()),
        "SWAP" => StandardGate::Two(named::swap()),
        _ => return Err(Error::UnknownGate(name.to_string())),
    })
}
