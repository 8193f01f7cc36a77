//! Exact evaluation of the discrete-noise cycle.
//!
//! Under the discrete model every trajectory differs from the noiseless one
//! by a Pauli operator, and Clifford gates map Paulis to Paulis. Tracking a
//! probability distribution over the 4^5 sign-free Pauli classes therefore
//! reproduces the Monte Carlo cycle without sampling. Signs can be dropped
//! because ancilla outcomes depend only on whether an ancilla letter has an
//! X component, and the data penalty `1 - |<ψ|P|ψ>|^2` ignores phase.

use crate::error::{Error, Result};
use crate::error_models::compose_discrete_steps;
use crate::qec_circuit::{CycleLayout, Gate, Moment, Placement, QecCode, NUM_QUBITS};
use crate::statevector::StateVector;

pub const NUM_CLASSES: usize = 1 << (2 * NUM_QUBITS);

/// A five-qubit Pauli class. Qubit `q` occupies bits `2q` (X part) and
/// `2q + 1` (Z part); `Y` is `X` and `Z` together.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliClass(u16);

impl PauliClass {
    pub const IDENTITY: PauliClass = PauliClass(0);

    pub fn from_index(index: usize) -> Result<Self> {
        if index >= NUM_CLASSES {
            return Err(Error::InvalidParameter(format!(
                "Pauli class index {index} out of range"
            )));
        }
        Ok(PauliClass(index as u16))
    }

    pub fn from_letters(letters: [u8; NUM_QUBITS]) -> Self {
        PauliClass(
            letters
                .iter()
                .enumerate()
                .map(|(q, &l)| u16::from(l & 3) << (2 * q))
                .sum(),
        )
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn letter(self, q: usize) -> u8 {
        ((self.0 >> (2 * q)) & 3) as u8
    }

    pub fn with_letter(self, q: usize, l: u8) -> Self {
        PauliClass((self.0 & !(3 << (2 * q))) | (u16::from(l & 3) << (2 * q)))
    }

    /// Number of non-identity letters.
    pub fn weight(self) -> usize {
        (0..NUM_QUBITS).filter(|&q| self.letter(q) != 0).count()
    }
}

impl std::fmt::Display for PauliClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for q in 0..NUM_QUBITS {
            f.write_str(["I", "X", "Z", "Y"][self.letter(q) as usize])?;
        }
        Ok(())
    }
}

impl std::str::FromStr for PauliClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let chars: Vec<char> = s.trim().chars().collect();
        if chars.len() != NUM_QUBITS {
            return Err(Error::InvalidParameter(format!(
                "expected {NUM_QUBITS} Pauli letters, got `{s}`"
            )));
        }
        let mut letters = [0u8; NUM_QUBITS];
        for (l, ch) in letters.iter_mut().zip(chars) {
            *l = match ch.to_ascii_uppercase() {
                'I' => 0,
                'X' => 1,
                'Z' => 2,
                'Y' => 3,
                _ => return Err(Error::InvalidParameter(format!("bad Pauli letter `{ch}`"))),
            };
        }
        Ok(PauliClass::from_letters(letters))
    }
}

fn conjugate_letters(letters: &mut [u8; NUM_QUBITS], p: &Placement) -> Result<()> {
    let check = |q: usize| {
        if q >= NUM_QUBITS {
            Err(Error::QubitOutOfRange {
                qubit: q,
                num_qubits: NUM_QUBITS,
            })
        } else {
            Ok(())
        }
    };
    match *p {
        Placement::One { gate, q } => {
            check(q)?;
            let l = letters[q];
            letters[q] = match gate {
                Gate::I | Gate::X | Gate::Y | Gate::Z => l,
                Gate::H => ((l & 1) << 1) | (l >> 1),
                // X -> Y, Y -> X, Z -> Z.
                Gate::S | Gate::Sdg => l ^ ((l & 1) << 1),
                g => return Err(Error::NonClifford(g.to_string())),
            };
        }
        Placement::Two { gate, a, b } => {
            check(a)?;
            check(b)?;
            match gate {
                Gate::Cnot => {
                    // X spreads control -> target, Z spreads target -> control.
                    let (la, lb) = (letters[a], letters[b]);
                    letters[b] = lb ^ (la & 1);
                    letters[a] = la ^ (lb & 2);
                }
                Gate::Swap => letters.swap(a, b),
                g => return Err(Error::NonClifford(g.to_string())),
            }
        }
    }
    Ok(())
}

/// The class of `M P M†` for the gates of moment `m`.
pub fn conjugate_class(c: PauliClass, m: &Moment) -> Result<PauliClass> {
    let mut letters = [0u8; NUM_QUBITS];
    for (q, l) in letters.iter_mut().enumerate() {
        *l = c.letter(q);
    }
    for p in m.placements() {
        conjugate_letters(&mut letters, p)?;
    }
    Ok(PauliClass::from_letters(letters))
}

/// `perm[i]` is the class that class `i` becomes under the moment.
fn moment_permutation(m: &Moment) -> Result<Vec<u16>> {
    (0..NUM_CLASSES)
        .map(|i| Ok(conjugate_class(PauliClass(i as u16), m)?.0))
        .collect()
}

/// A probability distribution over the 1024 Pauli classes.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliDist {
    probs: Vec<f64>,
}

impl PauliDist {
    pub fn point_mass(c: PauliClass) -> Self {
        let mut probs = vec![0.0; NUM_CLASSES];
        probs[c.index()] = 1.0;
        Self { probs }
    }

    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        if probs.len() != NUM_CLASSES {
            return Err(Error::BadLength(probs.len()));
        }
        if probs.iter().any(|&x| x.is_nan() || x < 0.0) {
            return Err(Error::InvalidParameter("negative or NaN probability".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized(total));
        }
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, c: PauliClass) -> f64 {
        self.probs[c.index()]
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    fn permute(&mut self, perm: &[u16]) {
        let mut out = vec![0.0; NUM_CLASSES];
        for (i, &x) in self.probs.iter().enumerate() {
            out[perm[i] as usize] += x;
        }
        self.probs = out;
    }

    /// Convolves every qubit with one step of the discrete channel.
    pub fn apply_noise(&mut self, p: f64) {
        noise_step(&mut self.probs, p);
    }

    /// Marginal distribution of qubit `q`'s letter.
    pub fn marginal(&self, q: usize) -> [f64; 4] {
        let mut m = [0.0; 4];
        for (i, &x) in self.probs.iter().enumerate() {
            m[(i >> (2 * q)) & 3] += x;
        }
        m
    }
}

/// One step of the per-qubit discrete channel on every qubit. The kernel is
/// symmetric, so the same routine applies the adjoint to a functional.
fn noise_step(v: &mut [f64], p: f64) {
    if p == 0.0 {
        return;
    }
    let keep = 1.0 - 4.0 * p / 3.0;
    let spread = p / 3.0;
    for q in 0..NUM_QUBITS {
        let s = 1usize << (2 * q);
        for base in 0..NUM_CLASSES {
            if base & (3 * s) != 0 {
                continue;
            }
            let vals = [v[base], v[base + s], v[base + 2 * s], v[base + 3 * s]];
            let total: f64 = vals.iter().sum();
            for (l, x) in vals.iter().enumerate() {
                v[base + l * s] = keep * x + spread * total;
            }
        }
    }
}

/// Propagates `dist` through encode, `t_wait` idle moments and decode,
/// with one noise step after every moment.
pub fn evolve(dist: &PauliDist, code: &QecCode, t_wait: usize, p: f64) -> Result<PauliDist> {
    check_p(p)?;
    let mut d = dist.clone();
    for m in code.encoder.moments() {
        d.permute(&moment_permutation(m)?);
        d.apply_noise(p);
    }
    for _ in 0..t_wait {
        d.apply_noise(p);
    }
    for m in code.decoder.moments() {
        d.permute(&moment_permutation(m)?);
        d.apply_noise(p);
    }
    Ok(d)
}

fn check_p(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("error probability {p} outside [0, 1]")));
    }
    Ok(())
}

/// `1 - |<ψ|P|ψ>|^2` for `P` in letter order `I, X, Z, Y`.
pub fn penalty_weights(psi: &StateVector) -> Result<[f64; 4]> {
    if psi.num_qubits() != 1 {
        return Err(Error::DimensionMismatch(psi.num_qubits(), 1));
    }
    let a = psi.amplitudes();
    let ex = 2.0 * (a[0].conj() * a[1]).re;
    let ez = a[0].norm_sqr() - a[1].norm_sqr();
    let ey = 2.0 * (a[0].conj() * a[1]).im;
    Ok([0.0, 1.0 - ex * ex, 1.0 - ez * ez, 1.0 - ey * ey])
}

/// Syndrome that an error class produces after decoding.
fn class_syndrome(i: usize, layout: &CycleLayout) -> u8 {
    let mut bits = [0u8; 4];
    for (b, &a) in bits.iter_mut().zip(&layout.ancilla_indices) {
        *b = ((i >> (2 * a)) & 1) as u8;
    }
    CycleLayout::pack(bits)
}

/// Expected penalty for each class present after decoding: read the
/// syndrome, then the measure-moment noise, the correction and the
/// correct-moment noise act on the data letter.
fn readout_functional(code: &QecCode, p: f64, weights: &[f64; 4]) -> Vec<f64> {
    let two_steps = compose_discrete_steps(p, 2).by_letter();
    let d = code.layout.data_index;
    (0..NUM_CLASSES)
        .map(|i| {
            let data = ((i >> (2 * d)) & 3) as u8;
            let corr = code.table.correction(class_syndrome(i, &code.layout)).letter();
            let l0 = (data ^ corr) as usize;
            (0..4).map(|l| two_steps[l] * weights[l0 ^ l]).sum()
        })
        .collect()
}

/// Exact ε_final of a cycle of `code` on a state with penalty `weights`.
pub fn exact_epsilon_final_for(code: &QecCode, p: f64, t_wait: usize, weights: &[f64; 4]) -> Result<f64> {
    let d = evolve(&PauliDist::point_mass(PauliClass::IDENTITY), code, t_wait, p)?;
    let f = readout_functional(code, p, weights);
    Ok(d.probs.iter().zip(&f).map(|(a, b)| a * b).sum::<f64>().clamp(0.0, 1.0))
}

/// Exact ε_final of the standard cycle on the probe state.
pub fn exact_epsilon_final(p: f64, t_wait: usize) -> Result<f64> {
    exact_epsilon_final_for(
        QecCode::standard(),
        p,
        t_wait,
        &penalty_weights(&StateVector::test_state())?,
    )
}

/// Probability of each syndrome, indexed as in [`CycleLayout::pack`].
pub fn exact_syndrome_distribution_for(code: &QecCode, p: f64, t_wait: usize) -> Result<[f64; 16]> {
    let d = evolve(&PauliDist::point_mass(PauliClass::IDENTITY), code, t_wait, p)?;
    let mut out = [0.0; 16];
    for (i, &x) in d.probs.iter().enumerate() {
        out[class_syndrome(i, &code.layout) as usize] += x;
    }
    Ok(out)
}

pub fn exact_syndrome_distribution(p: f64, t_wait: usize) -> Result<[f64; 16]> {
    exact_syndrome_distribution_for(QecCode::standard(), p, t_wait)
}

fn walsh_hadamard(v: &mut [f64]) {
    let mut h = 1;
    while h < v.len() {
        for i in (0..v.len()).step_by(2 * h) {
            for j in i..i + h {
                let (a, b) = (v[j], v[j + h]);
                v[j] = a + b;
                v[j + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// ε_final as a function of the wait time at fixed `p`.
///
/// Idle noise is diagonal in the Walsh-Hadamard basis of the class group,
/// with eigenvalue `μ^k` on characters touching `k` qubits, where
/// `μ = 1 - 4p/3`. The whole curve is therefore
/// `ε(t) = ε(0) + Σ_k A_k (μ^{k t} - 1)`, evaluated in O(1) per `t`.
#[derive(Clone, Debug)]
pub struct OracleCurve {
    p: f64,
    eps0: f64,
    coeffs: [f64; NUM_QUBITS + 1],
}

impl OracleCurve {
    pub fn new(code: &QecCode, p: f64, weights: &[f64; 4]) -> Result<Self> {
        check_p(p)?;
        let mut d = PauliDist::point_mass(PauliClass::IDENTITY);
        for m in code.encoder.moments() {
            d.permute(&moment_permutation(m)?);
            d.apply_noise(p);
        }
        let mut f = readout_functional(code, p, weights);
        for m in code.decoder.moments().iter().rev() {
            noise_step(&mut f, p);
            let perm = moment_permutation(m)?;
            f = (0..NUM_CLASSES).map(|i| f[perm[i] as usize]).collect();
        }
        let eps0: f64 = d.probs.iter().zip(&f).map(|(a, b)| a * b).sum();
        let mut dh = d.probs.clone();
        walsh_hadamard(&mut dh);
        walsh_hadamard(&mut f);
        let mut coeffs = [0.0; NUM_QUBITS + 1];
        for chi in 0..NUM_CLASSES {
            coeffs[PauliClass(chi as u16).weight()] += dh[chi] * f[chi] / NUM_CLASSES as f64;
        }
        Ok(Self { p, eps0, coeffs })
    }

    /// Curve for the standard cycle and probe state.
    pub fn standard(p: f64) -> Result<Self> {
        Self::new(QecCode::standard(), p, &penalty_weights(&StateVector::test_state())?)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn epsilon_final(&self, t_wait: u64) -> f64 {
        if t_wait == 0 || self.p == 0.0 {
            return self.eps0.clamp(0.0, 1.0);
        }
        let mu = 1.0 - 4.0 * self.p / 3.0;
        let t = t_wait as f64;
        let mut e = self.eps0;
        for (k, a) in self.coeffs.iter().enumerate().skip(1) {
            let decay = if mu > 0.0 {
                (k as f64 * t * mu.ln()).exp_m1()
            } else {
                mu.powf(k as f64 * t) - 1.0
            };
            e += a * decay;
        }
        e.clamp(0.0, 1.0)
    }
}
