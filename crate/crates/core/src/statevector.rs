//! Dense pure-state simulator.
//!
//! Qubit 0 is the most significant bit of the basis index, so the state
//! `|q0 q1 ... q(n-1)>` lives at index `q0 * 2^(n-1) + ... + q(n-1)`.
//! States are only ever compared through [`fidelity`], never amplitude by
//! amplitude, so global phase is irrelevant throughout.

use rand::Rng;

use crate::error::{Error, Result};
use crate::unitary::{c, Unitary2, Unitary4, C64};

pub const MAX_QUBITS: usize = 12;

/// Allowed drift of the norm away from one.
pub const NORM_TOL: f64 = 1e-9;

/// Purity below which a qubit counts as entangled with the rest.
pub const PURITY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<C64>,
}

impl StateVector {
    /// Computational basis state `|basis_index>`.
    pub fn basis(num_qubits: usize, basis_index: usize) -> Result<Self> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(Error::UnsupportedQubitCount(num_qubits));
        }
        let dim = 1usize << num_qubits;
        if basis_index >= dim {
            return Err(Error::BasisIndexOutOfRange {
                index: basis_index,
                num_qubits,
            });
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); dim];
        amplitudes[basis_index] = c(1.0, 0.0);
        Ok(Self { num_qubits, amplitudes })
    }

    /// The probe state `(5|0> + 12|1>) / 13`.
    ///
    /// Both bit and phase flips reduce its fidelity to about one half, and
    /// the combined flip to exactly zero.
    pub fn test_state() -> Self {
        Self {
            num_qubits: 1,
            amplitudes: vec![c(5.0 / 13.0, 0.0), c(12.0 / 13.0, 0.0)],
        }
    }

    /// Builds a state from explicit amplitudes, which must already be normalized.
    pub fn from_amplitudes(amplitudes: Vec<C64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::BadLength(len));
        }
        let num_qubits = len.trailing_zeros() as usize;
        if num_qubits > MAX_QUBITS {
            return Err(Error::UnsupportedQubitCount(num_qubits));
        }
        let state = Self { num_qubits, amplitudes };
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(state)
    }

    /// Like [`from_amplitudes`](Self::from_amplitudes) but rescales to unit norm.
    pub fn normalized(mut amplitudes: Vec<C64>) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized(norm));
        }
        for a in &mut amplitudes {
            *a /= norm;
        }
        Self::from_amplitudes(amplitudes)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `self ⊗ other`; the qubits of `self` come first.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        let n = self.num_qubits + other.num_qubits;
        if n > MAX_QUBITS {
            return Err(Error::UnsupportedQubitCount(n));
        }
        let mut amplitudes = Vec::with_capacity(1 << n);
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        Ok(StateVector {
            num_qubits: n,
            amplitudes,
        })
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.num_qubits {
            return Err(Error::QubitOutOfRange {
                qubit: q,
                num_qubits: self.num_qubits,
            });
        }
        Ok(())
    }

    fn stride(&self, q: usize) -> usize {
        1 << (self.num_qubits - 1 - q)
    }

    /// Applies `gate` to qubit `q`.
    pub fn apply_1q(&mut self, gate: &Unitary2, q: usize) -> Result<()> {
        self.check_qubit(q)?;
        let deviation = gate.unitarity_deviation();
        if deviation > crate::unitary::UNITARITY_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        self.apply_1q_unchecked(gate, q);
        Ok(())
    }

    pub(crate) fn apply_1q_unchecked(&mut self, gate: &Unitary2, q: usize) {
        let stride = self.stride(q);
        let (g00, g01, g10, g11) = (gate.get(0, 0), gate.get(0, 1), gate.get(1, 0), gate.get(1, 1));
        let amps = &mut self.amplitudes;
        for block in (0..amps.len()).step_by(stride << 1) {
            for i in block..block + stride {
                let a0 = amps[i];
                let a1 = amps[i + stride];
                amps[i] = g00 * a0 + g01 * a1;
                amps[i + stride] = g10 * a0 + g11 * a1;
            }
        }
    }

    /// Bit flip on qubit `q`.
    pub fn apply_x(&mut self, q: usize) -> Result<()> {
        self.check_qubit(q)?;
        let stride = self.stride(q);
        for block in (0..self.amplitudes.len()).step_by(stride << 1) {
            for i in block..block + stride {
                self.amplitudes.swap(i, i + stride);
            }
        }
        Ok(())
    }

    /// Phase flip on qubit `q`.
    pub fn apply_z(&mut self, q: usize) -> Result<()> {
        self.check_qubit(q)?;
        let stride = self.stride(q);
        for block in (0..self.amplitudes.len()).step_by(stride << 1) {
            for a in &mut self.amplitudes[block + stride..block + 2 * stride] {
                *a = -*a;
            }
        }
        Ok(())
    }

    /// Applies `gate` to the neighbouring pair `(q_low, q_low + 1)`, with
    /// `q_low` as the gate's first (more significant) qubit.
    ///
    /// `strict_lnn` is accepted for symmetry with [`apply_2q_pair`]; this
    /// entry point can only address adjacent pairs.
    ///
    /// [`apply_2q_pair`]: Self::apply_2q_pair
    pub fn apply_2q(&mut self, gate: &Unitary4, q_low: usize, strict_lnn: bool) -> Result<()> {
        if q_low + 1 >= self.num_qubits {
            return Err(Error::QubitOutOfRange {
                qubit: q_low + 1,
                num_qubits: self.num_qubits,
            });
        }
        self.apply_2q_pair(gate, q_low, q_low + 1, strict_lnn)
    }

    /// Applies `gate` with its first qubit on `a` and its second on `b`.
    /// With `strict_lnn` set, `a` and `b` must be neighbours.
    pub fn apply_2q_pair(&mut self, gate: &Unitary4, a: usize, b: usize, strict_lnn: bool) -> Result<()> {
        self.check_qubit(a)?;
        self.check_qubit(b)?;
        if a == b {
            return Err(Error::QubitReused(a));
        }
        if strict_lnn && a.abs_diff(b) != 1 {
            return Err(Error::NotAdjacent(a, b));
        }
        let deviation = gate.unitarity_deviation();
        if deviation > crate::unitary::UNITARITY_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        self.apply_2q_unchecked(gate, a, b);
        Ok(())
    }

    pub(crate) fn apply_2q_unchecked(&mut self, gate: &Unitary4, a: usize, b: usize) {
        let sa = self.stride(a);
        let sb = self.stride(b);
        let m = gate.matrix();
        let dim = self.amplitudes.len();
        for base in 0..dim {
            if base & sa != 0 || base & sb != 0 {
                continue;
            }
            let idx = [base, base | sb, base | sa, base | sa | sb];
            let v = idx.map(|i| self.amplitudes[i]);
            for (r, &i) in idx.iter().enumerate() {
                self.amplitudes[i] = m[(r, 0)] * v[0] + m[(r, 1)] * v[1] + m[(r, 2)] * v[2] + m[(r, 3)] * v[3];
            }
        }
    }

    /// Born probability of reading 1 on qubit `q`.
    pub fn probability_one(&self, q: usize) -> Result<f64> {
        self.check_qubit(q)?;
        let stride = self.stride(q);
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| i & stride != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Projects qubit `q` onto `bit` and renormalizes. Fails if that
    /// outcome has zero probability.
    pub fn project(&mut self, q: usize, bit: u8) -> Result<()> {
        self.check_qubit(q)?;
        let stride = self.stride(q);
        let mut kept = 0.0;
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            if ((i & stride != 0) as u8) == bit {
                kept += a.norm_sqr();
            } else {
                *a = C64::new(0.0, 0.0);
            }
        }
        if kept <= 0.0 {
            return Err(Error::NotNormalized(0.0));
        }
        let scale = kept.sqrt().recip();
        for a in &mut self.amplitudes {
            *a *= scale;
        }
        Ok(())
    }

    /// Samples a computational-basis measurement of qubit `q` and collapses
    /// the state onto the observed outcome.
    pub fn measure_qubit<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> Result<u8> {
        let p1 = self.probability_one(q)?;
        let bit = if p1 <= 0.0 {
            0
        } else if p1 >= 1.0 {
            1
        } else {
            u8::from(rng.random::<f64>() < p1)
        };
        self.project(q, bit)?;
        Ok(bit)
    }

    /// 2x2 reduced density matrix of qubit `q` as `[[r00, r01], [r10, r11]]`.
    pub fn reduced_density(&self, q: usize) -> Result<[[C64; 2]; 2]> {
        self.check_qubit(q)?;
        let stride = self.stride(q);
        let mut rho = [[C64::new(0.0, 0.0); 2]; 2];
        for i in 0..self.amplitudes.len() {
            if i & stride != 0 {
                continue;
            }
            let a0 = self.amplitudes[i];
            let a1 = self.amplitudes[i | stride];
            rho[0][0] += a0 * a0.conj();
            rho[0][1] += a0 * a1.conj();
            rho[1][0] += a1 * a0.conj();
            rho[1][1] += a1 * a1.conj();
        }
        Ok(rho)
    }

    /// `tr(rho_q^2)` for the reduced state of qubit `q`.
    pub fn purity(&self, q: usize) -> Result<f64> {
        let r = self.reduced_density(q)?;
        Ok((r[0][0] * r[0][0] + r[0][1] * r[1][0] + r[1][0] * r[0][1] + r[1][1] * r[1][1]).re)
    }

    /// The pure single-qubit state held by qubit `q`, up to global phase.
    pub fn extract_qubit(&self, q: usize) -> Result<StateVector> {
        let purity = self.purity(q)?;
        if purity < 1.0 - PURITY_TOL {
            return Err(Error::Entangled { qubit: q, purity });
        }
        let stride = self.stride(q);
        // For a product state every nonzero column (a0, a1) is proportional to
        // the qubit's state; take the heaviest one for accuracy.
        let (a0, a1) = (0..self.amplitudes.len())
            .filter(|i| i & stride == 0)
            .map(|i| (self.amplitudes[i], self.amplitudes[i | stride]))
            .max_by(|x, y| (x.0.norm_sqr() + x.1.norm_sqr()).total_cmp(&(y.0.norm_sqr() + y.1.norm_sqr())))
            .expect("register has at least one qubit");
        StateVector::normalized(vec![a0, a1])
    }
}

/// `|<a|b>|^2`.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    if a.num_qubits != b.num_qubits {
        return Err(Error::DimensionMismatch(a.num_qubits, b.num_qubits));
    }
    let overlap: C64 = a.amplitudes.iter().zip(&b.amplitudes).map(|(x, y)| x.conj() * y).sum();
    Ok(overlap.norm_sqr().min(1.0))
}
