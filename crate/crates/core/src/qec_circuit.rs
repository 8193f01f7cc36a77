//! Moment-scheduled circuits on a linear array, the five-qubit code's
//! encoder and decoder, syndrome-table derivation and the full
//! encode, wait, decode, measure, correct cycle.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::error_models::{apply_pauli, ErrorModel, PauliError};
use crate::gates::{named, parse_angle};
use crate::statevector::{fidelity, StateVector};
use crate::unitary::{Unitary2, Unitary4};

/// Moments spent outside the wait stage: 6 encode, 6 decode, 1 measure,
/// 1 correct.
pub const CYCLE_OVERHEAD: usize = 14;

pub const NUM_QUBITS: usize = 5;

/// Ancilla outcomes within this distance of 0 or 1 count as deterministic.
const DETERMINISM_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gate {
    I,
    X,
    Y,
    Z,
    H,
    S,
    Sdg,
    Rx(f64),
    Rz(f64),
    /// Control on the first qubit of the placement.
    Cnot,
    Swap,
}

impl Gate {
    pub fn arity(&self) -> usize {
        match self {
            Gate::Cnot | Gate::Swap => 2,
            _ => 1,
        }
    }

    pub fn inverse(&self) -> Gate {
        match *self {
            Gate::S => Gate::Sdg,
            Gate::Sdg => Gate::S,
            Gate::Rx(t) => Gate::Rx(-t),
            Gate::Rz(t) => Gate::Rz(-t),
            g => g,
        }
    }

    pub fn is_clifford(&self) -> bool {
        !matches!(self, Gate::Rx(_) | Gate::Rz(_))
    }

    pub fn unitary1(&self) -> Option<Unitary2> {
        Some(match *self {
            Gate::I => named::i(),
            Gate::X => named::x(),
            Gate::Y => named::y(),
            Gate::Z => named::z(),
            Gate::H => named::h(),
            Gate::S => named::s(),
            Gate::Sdg => named::sdg(),
            Gate::Rx(t) => named::rx(t),
            Gate::Rz(t) => named::rz(t),
            Gate::Cnot | Gate::Swap => return None,
        })
    }

    pub fn unitary2(&self) -> Option<Unitary4> {
        match self {
            Gate::Cnot => Some(named::cnot()),
            Gate::Swap => Some(named::swap()),
            _ => None,
        }
    }

    pub fn parse(name: &str) -> Result<Gate> {
        let upper = name.to_ascii_uppercase();
        if let Some((head, arg)) = upper.strip_suffix(')').and_then(|s| s.split_once('(')) {
            let theta = parse_angle(&name[head.len() + 1..name.len() - 1])?;
            return match head {
                "RX" => Ok(Gate::Rx(theta)),
                "RZ" => Ok(Gate::Rz(theta)),
                _ => Err(Error::UnknownGate(format!("{name} ({arg})"))),
            };
        }
        Ok(match upper.as_str() {
            "I" => Gate::I,
            "X" => Gate::X,
            "Y" => Gate::Y,
            "Z" => Gate::Z,
            "H" => Gate::H,
            "S" => Gate::S,
            "SDG" => Gate::Sdg,
            "CNOT" | "CX" => Gate::Cnot,
            "SWAP" => Gate::Swap,
            _ => return Err(Error::UnknownGate(name.to_string())),
        })
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::I => write!(f, "I"),
            Gate::X => write!(f, "X"),
            Gate::Y => write!(f, "Y"),
            Gate::Z => write!(f, "Z"),
            Gate::H => write!(f, "H"),
            Gate::S => write!(f, "S"),
            Gate::Sdg => write!(f, "SDG"),
            Gate::Rx(t) => write!(f, "RX({t:?})"),
            Gate::Rz(t) => write!(f, "RZ({t:?})"),
            Gate::Cnot => write!(f, "CNOT"),
            Gate::Swap => write!(f, "SWAP"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Placement {
    One {
        gate: Gate,
        q: usize,
    },
    /// `a` is the gate's first qubit (the control of a CNOT).
    Two {
        gate: Gate,
        a: usize,
        b: usize,
    },
}

impl Placement {
    pub fn one(gate: Gate, q: usize) -> Self {
        Placement::One { gate, q }
    }

    pub fn two(gate: Gate, a: usize, b: usize) -> Self {
        Placement::Two { gate, a, b }
    }

    pub fn gate(&self) -> Gate {
        match *self {
            Placement::One { gate, .. } | Placement::Two { gate, .. } => gate,
        }
    }

    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Placement::One { q, .. } => vec![q],
            Placement::Two { a, b, .. } => vec![a, b],
        }
    }

    fn inverse(&self) -> Placement {
        match *self {
            Placement::One { gate, q } => Placement::One {
                gate: gate.inverse(),
                q,
            },
            Placement::Two { gate, a, b } => Placement::Two {
                gate: gate.inverse(),
                a,
                b,
            },
        }
    }
}

impl fmt::Display for Placement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Placement::One { gate, q } => write!(f, "{gate} {q}"),
            Placement::Two { gate, a, b } => write!(f, "{gate} {a},{b}"),
        }
    }
}

/// Gates executed in one time step. Placements touch disjoint qubits and
/// two-qubit placements act on neighbours.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Moment {
    placements: Vec<Placement>,
}

impl Moment {
    pub fn new(placements: Vec<Placement>) -> Result<Self> {
        let mut used = BTreeSet::new();
        for p in &placements {
            if p.gate().arity() != p.qubits().len() {
                return Err(Error::InvalidParameter(format!(
                    "gate {} placed on {} qubit(s)",
                    p.gate(),
                    p.qubits().len()
                )));
            }
            if let Placement::Two { a, b, .. } = *p {
                if a == b {
                    return Err(Error::QubitReused(a));
                }
                if a.abs_diff(b) != 1 {
                    return Err(Error::NotAdjacent(a, b));
                }
            }
            for q in p.qubits() {
                if !used.insert(q) {
                    return Err(Error::QubitReused(q));
                }
            }
        }
        Ok(Self { placements })
    }

    pub fn idle() -> Self {
        Self::default()
    }

    pub fn placements(&self) -> &[Placement] {
        &self.placements
    }

    pub fn is_idle(&self) -> bool {
        self.placements.is_empty()
    }

    pub fn inverse(&self) -> Moment {
        Moment {
            placements: self.placements.iter().map(Placement::inverse).collect(),
        }
    }

    fn max_qubit(&self) -> Option<usize> {
        self.placements.iter().flat_map(|p| p.qubits()).max()
    }

    /// Applies every placement to `state`.
    pub fn apply(&self, state: &mut StateVector) -> Result<()> {
        for p in &self.placements {
            match *p {
                Placement::One { gate, q } => {
                    let u = gate.unitary1().expect("arity checked at construction");
                    state.apply_1q(&u, q)?;
                }
                Placement::Two { gate, a, b } => {
                    let u = gate.unitary2().expect("arity checked at construction");
                    state.apply_2q_pair(&u, a, b, true)?;
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Moment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.placements.is_empty() {
            return write!(f, ".");
        }
        let parts: Vec<String> = self.placements.iter().map(ToString::to_string).collect();
        write!(f, "{}", parts.join("  "))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    num_qubits: usize,
    moments: Vec<Moment>,
}

impl Circuit {
    pub fn new(num_qubits: usize, moments: Vec<Moment>) -> Result<Self> {
        for m in &moments {
            if let Some(q) = m.max_qubit() {
                if q >= num_qubits {
                    return Err(Error::QubitOutOfRange { qubit: q, num_qubits });
                }
            }
        }
        Ok(Self { num_qubits, moments })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn moments(&self) -> &[Moment] {
        &self.moments
    }

    pub fn depth(&self) -> usize {
        self.moments.len()
    }

    /// Moments in reverse order, each gate replaced by its inverse.
    pub fn inverse(&self) -> Circuit {
        Circuit {
            num_qubits: self.num_qubits,
            moments: self.moments.iter().rev().map(Moment::inverse).collect(),
        }
    }

    pub fn is_clifford(&self) -> bool {
        self.moments
            .iter()
            .flat_map(|m| m.placements())
            .all(|p| p.gate().is_clifford())
    }

    pub fn apply(&self, state: &mut StateVector) -> Result<()> {
        if state.num_qubits() != self.num_qubits {
            return Err(Error::DimensionMismatch(state.num_qubits(), self.num_qubits));
        }
        for m in &self.moments {
            m.apply(state)?;
        }
        Ok(())
    }

    /// Text form: a `qubits N` line, then one moment per line. Placements are
    /// `GATE q` or `GATE a,b`; an idle moment is `.`; `#` starts a comment.
    pub fn to_text(&self) -> String {
        let mut out = format!("qubits {}\n", self.num_qubits);
        for m in &self.moments {
            out.push_str(&m.to_string());
            out.push('\n');
        }
        out
    }

    /// Parses [`to_text`](Self::to_text) output. Without a `qubits` line the
    /// register is sized to the largest index used.
    pub fn from_text(text: &str) -> Result<Circuit> {
        let mut num_qubits = None;
        let mut moments = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let err = |message: String| Error::Parse { line: line_no, message };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens[0].eq_ignore_ascii_case("qubits") {
                if num_qubits.is_some() || !moments.is_empty() {
                    return Err(err("`qubits` must appear once, before any moment".into()));
                }
                let n = tokens
                    .get(1)
                    .and_then(|t| t.parse::<usize>().ok())
                    .filter(|_| tokens.len() == 2)
                    .ok_or_else(|| err("expected `qubits N`".into()))?;
                num_qubits = Some(n);
                continue;
            }
            if tokens == ["."] {
                moments.push(Moment::idle());
                continue;
            }
            if !tokens.len().is_multiple_of(2) {
                return Err(err(format!("dangling token `{}`", tokens[tokens.len() - 1])));
            }
            let mut placements = Vec::new();
            for pair in tokens.chunks(2) {
                let gate = Gate::parse(pair[0]).map_err(|e| err(e.to_string()))?;
                let qs: Vec<usize> = pair[1]
                    .split(',')
                    .map(|s| {
                        s.parse::<usize>()
                            .map_err(|_| err(format!("bad qubit list `{}`", pair[1])))
                    })
                    .collect::<Result<_>>()?;
                let p = match qs.as_slice() {
                    [q] => Placement::one(gate, *q),
                    [a, b] => Placement::two(gate, *a, *b),
                    _ => return Err(err(format!("bad qubit list `{}`", pair[1]))),
                };
                placements.push(p);
            }
            moments.push(Moment::new(placements).map_err(|e| err(e.to_string()))?);
        }
        let n = match num_qubits {
            Some(n) => n,
            None => moments.iter().filter_map(Moment::max_qubit).max().map_or(1, |q| q + 1),
        };
        Circuit::new(n, moments)
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// The depth-6 encoder for a five-qubit linear array. The data qubit enters
/// at index 0 and ancillas 1 to 4 start in `|0>`.
///
/// Only `H`, neighbouring `CNOT`s and one `SWAP` are used. Among all such
/// depth-6 encoders it has close to the fewest fault locations at which a
/// single error in the encode or decode stage defeats the correction.
pub fn build_encoder() -> Circuit {
    use Gate::*;
    let m = |ps: Vec<Placement>| Moment::new(ps).expect("encoder moments are valid");
    let one = Placement::one;
    let two = Placement::two;
    let moments = vec![
        m(vec![two(Cnot, 0, 1), one(H, 2), one(H, 4)]),
        m(vec![one(H, 0), two(Cnot, 2, 1), two(Cnot, 4, 3)]),
        m(vec![two(Swap, 0, 1), two(Cnot, 2, 3)]),
        m(vec![two(Cnot, 1, 2), one(H, 3)]),
        m(vec![one(H, 1), two(Cnot, 2, 3)]),
        m(vec![two(Cnot, 1, 2)]),
    ];
    Circuit::new(NUM_QUBITS, moments).expect("encoder indices are in range")
}

/// The encoder run backwards.
pub fn build_decoder() -> Circuit {
    build_encoder().inverse()
}

/// Where the data qubit sits and which qubits carry the syndrome.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CycleLayout {
    pub data_index: usize,
    /// Syndrome bit `i` is read from `ancilla_indices[i]`.
    pub ancilla_indices: [usize; 4],
}

impl Default for CycleLayout {
    fn default() -> Self {
        Self {
            data_index: 0,
            ancilla_indices: [1, 2, 3, 4],
        }
    }
}

impl CycleLayout {
    /// Packs ancilla bits into a syndrome with bit 0 as the most significant,
    /// so the binary rendering reads in ancilla order.
    pub fn pack(bits: [u8; 4]) -> u8 {
        bits.iter().fold(0, |acc, &b| (acc << 1) | (b & 1))
    }

    pub fn unpack(syndrome: u8) -> [u8; 4] {
        [
            (syndrome >> 3) & 1,
            (syndrome >> 2) & 1,
            (syndrome >> 1) & 1,
            syndrome & 1,
        ]
    }
}

/// Recovery operation on the data qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Correction {
    I,
    X,
    Z,
    XZ,
}

impl Correction {
    pub const ALL: [Correction; 4] = [Correction::I, Correction::X, Correction::Z, Correction::XZ];

    pub fn as_error(self) -> Option<PauliError> {
        match self {
            Correction::I => None,
            Correction::X => Some(PauliError::X),
            Correction::Z => Some(PauliError::Z),
            Correction::XZ => Some(PauliError::XZ),
        }
    }

    /// Two-bit letter code, matching [`PauliError::letter`].
    pub fn letter(self) -> u8 {
        self.as_error().map_or(0, PauliError::letter)
    }

    pub fn name(self) -> &'static str {
        match self {
            Correction::I => "I",
            Correction::X => "X",
            Correction::Z => "Z",
            Correction::XZ => "XZ",
        }
    }

    fn apply(self, state: &mut StateVector, q: usize) {
        if let Some(e) = self.as_error() {
            apply_pauli(state, e, q);
        }
    }
}

/// A single-qubit fault `error` on `qubit`, or no fault.
pub type Fault = Option<(PauliError, usize)>;

/// Map from the 16 syndromes to data-qubit corrections.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyndromeTable {
    entries: [Correction; 16],
    sources: [Fault; 16],
}

impl SyndromeTable {
    pub fn correction(&self, syndrome: u8) -> Correction {
        self.entries[syndrome as usize & 15]
    }

    /// The single fault (injected between encode and decode) that produces
    /// `syndrome`.
    pub fn source(&self, syndrome: u8) -> Fault {
        self.sources[syndrome as usize & 15]
    }

    pub fn entries(&self) -> &[Correction; 16] {
        &self.entries
    }

    /// Rows as `(syndrome, correction, causing fault)`.
    pub fn rows(&self) -> impl Iterator<Item = (u8, Correction, Fault)> + '_ {
        (0..16u8).map(move |s| (s, self.entries[s as usize], self.sources[s as usize]))
    }

    /// Renders the table one row per syndrome as `data⊗bits  correction⊗ancilla-reset`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (s, corr, src) in self.rows() {
            let bits: String = CycleLayout::unpack(s).iter().map(|b| char::from(b'0' + b)).collect();
            let reset: String = CycleLayout::unpack(s)
                .iter()
                .map(|&b| if b == 1 { 'X' } else { 'I' })
                .collect();
            let cause = match src {
                None => "none".to_string(),
                Some((e, q)) => format!("{} on qubit {q}", e.name()),
            };
            out.push_str(&format!("{bits}  {:<2}⊗{reset}  # {cause}\n", corr.name()));
        }
        out
    }
}

pub fn inject_error(state: &StateVector, pauli: PauliError, q: usize) -> Result<StateVector> {
    if q >= state.num_qubits() {
        return Err(Error::QubitOutOfRange {
            qubit: q,
            num_qubits: state.num_qubits(),
        });
    }
    let mut out = state.clone();
    apply_pauli(&mut out, pauli, q);
    Ok(out)
}

fn all_faults() -> Vec<Fault> {
    let mut v = vec![None];
    for q in 0..NUM_QUBITS {
        for e in PauliError::ALL {
            v.push(Some((e, q)));
        }
    }
    v
}

fn start_state(layout: &CycleLayout, psi: &StateVector) -> Result<StateVector> {
    if psi.num_qubits() != 1 {
        return Err(Error::DimensionMismatch(psi.num_qubits(), 1));
    }
    if layout.data_index != 0 {
        return Err(Error::InvalidParameter("the data qubit must enter at index 0".into()));
    }
    psi.tensor(&StateVector::basis(NUM_QUBITS - 1, 0)?)
}

/// Encodes `psi`, applies `fault`, decodes, and returns the deterministic
/// syndrome together with the post-measurement state.
fn syndrome_after_fault(
    encoder: &Circuit,
    decoder: &Circuit,
    layout: &CycleLayout,
    psi: &StateVector,
    fault: Fault,
) -> Result<(u8, StateVector)> {
    let mut s = start_state(layout, psi)?;
    encoder.apply(&mut s)?;
    if let Some((e, q)) = fault {
        s = inject_error(&s, e, q)?;
    }
    decoder.apply(&mut s)?;
    let mut bits = [0u8; 4];
    for (i, &a) in layout.ancilla_indices.iter().enumerate() {
        let p1 = s.probability_one(a)?;
        let bit = if p1 < DETERMINISM_TOL {
            0
        } else if p1 > 1.0 - DETERMINISM_TOL {
            1
        } else {
            return Err(Error::InvalidEncoder(format!(
                "ancilla {a} outcome is random (P(1) = {p1:.3e}) after {fault:?}"
            )));
        };
        s.project(a, bit)?;
        bits[i] = bit;
    }
    Ok((CycleLayout::pack(bits), s))
}

fn restores(state: &StateVector, corr: Correction, layout: &CycleLayout, psi: &StateVector) -> Result<bool> {
    let mut t = state.clone();
    corr.apply(&mut t, layout.data_index);
    let data = t.extract_qubit(layout.data_index)?;
    Ok(fidelity(&data, psi)? > 1.0 - 1e-9)
}

/// Derives the syndrome table of `encoder` by injecting every single-qubit
/// fault between encoding and decoding of `psi`.
///
/// `psi` must be sensitive to all three error types (the default probe
/// state is) for the correction to be unique.
pub fn derive_syndrome_table_for(
    encoder: &Circuit,
    decoder: &Circuit,
    layout: &CycleLayout,
    psi: &StateVector,
) -> Result<SyndromeTable> {
    let mut entries = [None; 16];
    let mut sources = [None; 16];
    for fault in all_faults() {
        let (syn, s) = syndrome_after_fault(encoder, decoder, layout, psi, fault)?;
        if entries[syn as usize].is_some() {
            return Err(Error::InvalidEncoder(format!(
                "faults {:?} and {:?} share syndrome {syn:04b}",
                sources[syn as usize], fault
            )));
        }
        let mut fixes = Vec::new();
        for corr in Correction::ALL {
            if restores(&s, corr, layout, psi)? {
                fixes.push(corr);
            }
        }
        match fixes.as_slice() {
            [only] => entries[syn as usize] = Some(*only),
            [] => {
                return Err(Error::InvalidEncoder(format!(
                    "no correction restores the data after {fault:?}"
                )))
            }
            _ => {
                return Err(Error::InvalidEncoder(format!(
                    "probe state cannot tell corrections {fixes:?} apart"
                )))
            }
        }
        sources[syn as usize] = fault;
    }
    if entries[0] != Some(Correction::I) {
        return Err(Error::InvalidEncoder("the fault-free syndrome is not 0000".into()));
    }
    Ok(SyndromeTable {
        entries: entries.map(|e| e.expect("16 distinct syndromes from 16 faults")),
        sources,
    })
}

/// Checks that `table` also recovers `psi` from every single fault. Probe
/// states blind to some error type (such as `|1>`) can still confirm the
/// table, since any correction that works is accepted.
pub fn confirm_syndrome_table(
    table: &SyndromeTable,
    encoder: &Circuit,
    decoder: &Circuit,
    layout: &CycleLayout,
    psi: &StateVector,
) -> Result<()> {
    for fault in all_faults() {
        let (syn, s) = syndrome_after_fault(encoder, decoder, layout, psi, fault)?;
        if table.source(syn) != fault {
            return Err(Error::InvalidEncoder(format!(
                "fault {fault:?} gave syndrome {syn:04b}"
            )));
        }
        if !restores(&s, table.correction(syn), layout, psi)? {
            return Err(Error::InvalidEncoder(format!(
                "correction for {syn:04b} fails on this state"
            )));
        }
    }
    Ok(())
}

/// Syndrome table of the standard encoder, derived with the probe state.
pub fn derive_syndrome_table() -> Result<SyndromeTable> {
    derive_syndrome_table_for(
        &build_encoder(),
        &build_decoder(),
        &CycleLayout::default(),
        &StateVector::test_state(),
    )
}

/// Encoder, decoder, layout and syndrome table, ready to run cycles.
#[derive(Clone, Debug, PartialEq)]
pub struct QecCode {
    pub encoder: Circuit,
    pub decoder: Circuit,
    pub layout: CycleLayout,
    pub table: SyndromeTable,
}

impl QecCode {
    pub fn new(encoder: Circuit) -> Result<Self> {
        if encoder.num_qubits() != NUM_QUBITS {
            return Err(Error::InvalidEncoder(format!(
                "expected {NUM_QUBITS} qubits, got {}",
                encoder.num_qubits()
            )));
        }
        let decoder = encoder.inverse();
        let layout = CycleLayout::default();
        let table = derive_syndrome_table_for(&encoder, &decoder, &layout, &StateVector::test_state())?;
        Ok(Self {
            encoder,
            decoder,
            layout,
            table,
        })
    }

    /// The standard code, built once per process.
    pub fn standard() -> &'static QecCode {
        static CODE: OnceLock<QecCode> = OnceLock::new();
        CODE.get_or_init(|| QecCode::new(build_encoder()).expect("standard encoder is valid"))
    }

    /// Number of moments in a cycle with `t_wait` idle moments.
    pub fn cycle_length(&self, t_wait: usize) -> usize {
        self.encoder.depth() + t_wait + self.decoder.depth() + 2
    }

    /// Runs one cycle. `noise` is invoked after every moment, and `rng`
    /// drives the ancilla measurements.
    pub fn run_cycle_with<N: NoiseProcess + ?Sized, R: Rng + ?Sized>(
        &self,
        input: &StateVector,
        t_wait: usize,
        noise: &mut N,
        rng: &mut R,
    ) -> Result<CycleResult> {
        let mut s = start_state(&self.layout, input)?;
        let mut moment = 0usize;
        let tick = |s: &mut StateVector, moment: &mut usize, noise: &mut N| {
            noise.after_moment(*moment, s);
            *moment += 1;
        };
        for m in self.encoder.moments() {
            m.apply(&mut s)?;
            tick(&mut s, &mut moment, noise);
        }
        for _ in 0..t_wait {
            tick(&mut s, &mut moment, noise);
        }
        for m in self.decoder.moments() {
            m.apply(&mut s)?;
            tick(&mut s, &mut moment, noise);
        }
        let mut bits = [0u8; 4];
        for (i, &a) in self.layout.ancilla_indices.iter().enumerate() {
            bits[i] = s.measure_qubit(a, rng)?;
        }
        tick(&mut s, &mut moment, noise);
        let syndrome = CycleLayout::pack(bits);
        self.table.correction(syndrome).apply(&mut s, self.layout.data_index);
        tick(&mut s, &mut moment, noise);
        debug_assert_eq!(moment, self.cycle_length(t_wait));

        let final_state = s.extract_qubit(self.layout.data_index)?;
        let epsilon_final = (1.0 - fidelity(&final_state, input)?).clamp(0.0, 1.0);
        Ok(CycleResult {
            epsilon_final,
            syndrome,
            final_state,
        })
    }

    /// Runs one cycle under `model`, drawing noise and measurement outcomes
    /// from `rng`.
    pub fn run_cycle<R: Rng + ?Sized>(
        &self,
        input: &StateVector,
        model: &ErrorModel,
        t_wait: usize,
        rng: &mut R,
    ) -> Result<CycleResult> {
        let mut noise = ModelNoise {
            model: *model,
            rng: ChaCha8Rng::seed_from_u64(rng.random()),
        };
        self.run_cycle_with(input, t_wait, &mut noise, rng)
    }
}

/// Outcome of one cycle.
#[derive(Clone, Debug, PartialEq)]
pub struct CycleResult {
    pub epsilon_final: f64,
    pub syndrome: u8,
    pub final_state: StateVector,
}

/// Something that perturbs the register at the end of each moment.
pub trait NoiseProcess {
    /// Called after moment `moment` (counted from 0 across the whole cycle).
    fn after_moment(&mut self, moment: usize, state: &mut StateVector);
}

/// Random noise from an [`ErrorModel`].
pub struct ModelNoise<R> {
    pub model: ErrorModel,
    pub rng: R,
}

impl<R: Rng> NoiseProcess for ModelNoise<R> {
    fn after_moment(&mut self, _moment: usize, state: &mut StateVector) {
        self.model.apply_step(state, &mut self.rng);
    }
}

/// One deterministic fault: `error` on `qubit` at the end of `moment`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Injection {
    pub moment: usize,
    pub qubit: usize,
    pub error: PauliError,
}

/// A fixed list of faults and nothing else.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Injections(pub Vec<Injection>);

impl NoiseProcess for Injections {
    fn after_moment(&mut self, moment: usize, state: &mut StateVector) {
        for inj in self.0.iter().filter(|i| i.moment == moment) {
            apply_pauli(state, inj.error, inj.qubit);
        }
    }
}

/// Runs one cycle of the standard code.
pub fn run_cycle<R: Rng + ?Sized>(
    input: &StateVector,
    model: &ErrorModel,
    t_wait: usize,
    rng: &mut R,
) -> Result<CycleResult> {
    QecCode::standard().run_cycle(input, model, t_wait, rng)
}
