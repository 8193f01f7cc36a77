//! Per-qubit, per-time-step noise processes.
//!
//! The discrete model flips a qubit with `X`, `Z` or `XZ`, each with
//! probability `p/3`. The continuous model applies a random unitary whose
//! three angles are independent zero-mean Gaussians.

use nalgebra::{DMatrix, Matrix4, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::gates::named;
use crate::statevector::StateVector;
use crate::unitary::{c, Unitary2, C64};

/// A discrete single-qubit error. `XZ` equals `Y` up to phase.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PauliError {
    X,
    Z,
    XZ,
}

impl PauliError {
    pub const ALL: [PauliError; 3] = [PauliError::X, PauliError::Z, PauliError::XZ];

    /// Two-bit letter code: bit 0 marks an X component, bit 1 a Z component.
    pub fn letter(self) -> u8 {
        match self {
            PauliError::X => 1,
            PauliError::Z => 2,
            PauliError::XZ => 3,
        }
    }

    pub fn unitary(self) -> Unitary2 {
        match self {
            PauliError::X => named::x(),
            PauliError::Z => named::z(),
            PauliError::XZ => named::xz(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PauliError::X => "X",
            PauliError::Z => "Z",
            PauliError::XZ => "XZ",
        }
    }
}

impl std::str::FromStr for PauliError {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "X" => Ok(PauliError::X),
            "Z" => Ok(PauliError::Z),
            "XZ" | "Y" => Ok(PauliError::XZ),
            _ => Err(Error::UnknownGate(s.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiscreteModel {
    p: f64,
}

impl DiscreteModel {
    pub fn new(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("error probability {p} outside [0, 1]")));
        }
        Ok(Self { p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContinuousModel {
    sigma: f64,
}

impl ContinuousModel {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sigma {sigma} must be finite and non-negative"
            )));
        }
        Ok(Self { sigma })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ErrorModel {
    Discrete(DiscreteModel),
    Continuous(ContinuousModel),
}

impl ErrorModel {
    pub fn discrete(p: f64) -> Result<Self> {
        DiscreteModel::new(p).map(ErrorModel::Discrete)
    }

    pub fn continuous(sigma: f64) -> Result<Self> {
        ContinuousModel::new(sigma).map(ErrorModel::Continuous)
    }

    /// `"discrete"` or `"continuous"`.
    pub fn kind(&self) -> &'static str {
        match self {
            ErrorModel::Discrete(_) => "discrete",
            ErrorModel::Continuous(_) => "continuous",
        }
    }

    /// `p` for the discrete model, `sigma` for the continuous one.
    pub fn param(&self) -> f64 {
        match self {
            ErrorModel::Discrete(m) => m.p,
            ErrorModel::Continuous(m) => m.sigma,
        }
    }

    pub fn is_noiseless(&self) -> bool {
        self.param() == 0.0
    }

    /// Applies one step of noise independently to every qubit of `state`.
    pub fn apply_step<R: Rng + ?Sized>(&self, state: &mut StateVector, rng: &mut R) {
        for q in 0..state.num_qubits() {
            match self {
                ErrorModel::Discrete(m) => {
                    if let Some(e) = sample_discrete(m, rng) {
                        apply_pauli(state, e, q);
                    }
                }
                ErrorModel::Continuous(m) => {
                    let u = sample_continuous(m, rng);
                    state.apply_1q_unchecked(&u, q);
                }
            }
        }
    }
}

pub(crate) fn apply_pauli(state: &mut StateVector, e: PauliError, q: usize) {
    // Indices are validated by the callers.
    match e {
        PauliError::X => state.apply_x(q).expect("qubit in range"),
        PauliError::Z => state.apply_z(q).expect("qubit in range"),
        PauliError::XZ => {
            state.apply_z(q).expect("qubit in range");
            state.apply_x(q).expect("qubit in range");
        }
    }
}

/// One draw of the discrete channel: nothing with probability `1 - p`,
/// otherwise `X`, `Z` or `XZ` uniformly.
pub fn sample_discrete<R: Rng + ?Sized>(model: &DiscreteModel, rng: &mut R) -> Option<PauliError> {
    let u: f64 = rng.random();
    if u >= model.p {
        return None;
    }
    let k = ((3.0 * u / model.p) as usize).min(2);
    Some(PauliError::ALL[k])
}

/// The random-unitary error
///
/// ```text
/// (  cos(θ/2) e^{ i(α+β)/2}   sin(θ/2) e^{ i(α-β)/2} )
/// ( -sin(θ/2) e^{i(-α+β)/2}   cos(θ/2) e^{i(-α-β)/2} )
/// ```
pub fn continuous_unitary(alpha: f64, beta: f64, theta: f64) -> Unitary2 {
    let (s, co) = (theta / 2.0).sin_cos();
    let e = |x: f64| C64::from_polar(1.0, x / 2.0);
    Unitary2::from_matrix_unchecked(nalgebra::Matrix2::new(
        e(alpha + beta) * co,
        e(alpha - beta) * s,
        -e(-alpha + beta) * s,
        e(-alpha - beta) * co,
    ))
}

/// Draws `(α, β, θ)` independently from `Normal(0, σ²)`.
pub fn sample_angles<R: Rng + ?Sized>(model: &ContinuousModel, rng: &mut R) -> [f64; 3] {
    let mut draw = || model.sigma * rng.sample::<f64, _>(StandardNormal);
    [draw(), draw(), draw()]
}

pub fn sample_continuous<R: Rng + ?Sized>(model: &ContinuousModel, rng: &mut R) -> Unitary2 {
    let [a, b, t] = sample_angles(model, rng);
    continuous_unitary(a, b, t)
}

/// Distribution over the sign-free single-qubit Pauli classes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PauliChannelDist {
    pub p_i: f64,
    pub p_x: f64,
    pub p_y: f64,
    pub p_z: f64,
}

impl PauliChannelDist {
    pub fn identity() -> Self {
        Self {
            p_i: 1.0,
            p_x: 0.0,
            p_y: 0.0,
            p_z: 0.0,
        }
    }

    /// The one-step discrete channel `(1-p, p/3, p/3, p/3)`.
    pub fn discrete(p: f64) -> Self {
        Self {
            p_i: 1.0 - p,
            p_x: p / 3.0,
            p_y: p / 3.0,
            p_z: p / 3.0,
        }
    }

    /// Probabilities indexed by letter code (`I=0, X=1, Z=2, Y=3`).
    pub fn by_letter(&self) -> [f64; 4] {
        [self.p_i, self.p_x, self.p_z, self.p_y]
    }

    pub fn from_letters(v: [f64; 4]) -> Self {
        Self {
            p_i: v[0],
            p_x: v[1],
            p_z: v[2],
            p_y: v[3],
        }
    }

    pub fn total(&self) -> f64 {
        self.p_i + self.p_x + self.p_y + self.p_z
    }

    /// Distribution of the product of independent errors drawn from `self`
    /// and `other`. Products of Pauli letters are XORs of their codes.
    pub fn convolve(&self, other: &Self) -> Self {
        let (a, b) = (self.by_letter(), other.by_letter());
        let mut out = [0.0; 4];
        for (i, pa) in a.iter().enumerate() {
            for (j, pb) in b.iter().enumerate() {
                out[i ^ j] += pa * pb;
            }
        }
        Self::from_letters(out)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.by_letter()
            .iter()
            .zip(other.by_letter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// The `n`-step composition of the discrete channel, in closed form:
/// `p_I(n) = 1/4 + 3/4 (1 - 4p/3)^n` with the remainder split evenly.
pub fn compose_discrete_steps(p: f64, n: u64) -> PauliChannelDist {
    let p_i = 0.25 + 0.75 * (1.0 - 4.0 * p / 3.0).powf(n as f64);
    let rest = (1.0 - p_i) / 3.0;
    PauliChannelDist {
        p_i,
        p_x: rest,
        p_y: rest,
        p_z: rest,
    }
}

/// Nodes and weights of `n`-point Gauss-Hermite quadrature for the weight
/// `exp(-x^2)`, by the Golub-Welsch eigenvalue method.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = (k as f64 / 2.0).sqrt();
        jacobi[(k - 1, k)] = b;
        jacobi[(k, k - 1)] = b;
    }
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            (
                eig.eigenvalues[i],
                std::f64::consts::PI.sqrt() * eig.eigenvectors[(0, i)].powi(2),
            )
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// `E[f(α, β, θ)]` over independent `Normal(0, σ²)` angles by tensor-product
/// Gauss-Hermite quadrature with `order` points per axis.
pub fn gaussian_expectation<F: Fn(f64, f64, f64) -> f64>(sigma: f64, order: usize, f: F) -> f64 {
    let (x, w) = gauss_hermite(order);
    let scale = std::f64::consts::SQRT_2 * sigma;
    let norm = std::f64::consts::PI.powf(-1.5);
    let mut total = 0.0;
    for (xa, wa) in x.iter().zip(&w) {
        for (xb, wb) in x.iter().zip(&w) {
            for (xt, wt) in x.iter().zip(&w) {
                total += wa * wb * wt * f(scale * xa, scale * xb, scale * xt);
            }
        }
    }
    total * norm
}

/// Mean one-step infidelity `E[1 - |<ψ|U|ψ>|^2]` of the continuous model on
/// a single-qubit state, by quadrature.
pub fn mean_step_infidelity(sigma: f64, psi: &StateVector) -> Result<f64> {
    if psi.num_qubits() != 1 {
        return Err(Error::DimensionMismatch(psi.num_qubits(), 1));
    }
    let a = psi.amplitudes();
    let (a0, a1) = (a[0], a[1]);
    Ok(gaussian_expectation(sigma, 40, |al, be, th| {
        let u = continuous_unitary(al, be, th);
        let v0 = u.get(0, 0) * a0 + u.get(0, 1) * a1;
        let v1 = u.get(1, 0) * a0 + u.get(1, 1) * a1;
        1.0 - (a0.conj() * v0 + a1.conj() * v1).norm_sqr()
    }))
}

/// Superoperator of the averaged continuous channel, acting on a density
/// matrix flattened row-major as `(r00, r01, r10, r11)`.
pub fn continuous_channel_superop(sigma: f64) -> Matrix4<C64> {
    let mut total = Matrix4::<C64>::zeros();
    for (r, col) in (0..4).flat_map(|r| (0..4).map(move |col| (r, col))) {
        let (i, j) = (r / 2, r % 2);
        let (k, l) = (col / 2, col % 2);
        let re = gaussian_expectation(sigma, 24, |a, b, t| {
            let u = continuous_unitary(a, b, t);
            (u.get(i, k) * u.get(j, l).conj()).re
        });
        let im = gaussian_expectation(sigma, 24, |a, b, t| {
            let u = continuous_unitary(a, b, t);
            (u.get(i, k) * u.get(j, l).conj()).im
        });
        total[(r, col)] = c(re, im);
    }
    total
}

/// Exact infidelity of `psi` after `steps` applications of the averaged
/// continuous channel.
pub fn continuous_channel_infidelity(sigma: f64, steps: u64, psi: &StateVector) -> Result<f64> {
    if psi.num_qubits() != 1 {
        return Err(Error::DimensionMismatch(psi.num_qubits(), 1));
    }
    let a = psi.amplitudes();
    let rho = nalgebra::Vector4::new(
        a[0] * a[0].conj(),
        a[0] * a[1].conj(),
        a[1] * a[0].conj(),
        a[1] * a[1].conj(),
    );
    let s = continuous_channel_superop(sigma);
    let mut power = Matrix4::<C64>::identity();
    let mut base = s;
    let mut e = steps;
    while e > 0 {
        if e & 1 == 1 {
            power *= base;
        }
        base = base * base;
        e >>= 1;
    }
    let out = power * rho;
    // <ψ|ρ|ψ> = Σ conj(a_i) ρ_ij a_j
    let mut f = C64::new(0.0, 0.0);
    for i in 0..2 {
        for j in 0..2 {
            f += a[i].conj() * out[2 * i + j] * a[j];
        }
    }
    Ok((1.0 - f.re).clamp(0.0, 1.0))
}
