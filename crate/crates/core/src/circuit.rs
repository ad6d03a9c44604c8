//! Gate-level circuits: QFT, the map circuit, statevector simulation, gate
//! counting, the parity gate and the probe-qubit trace estimator.
//!
//! Qubit 0 is the least-significant bit of the basis index. The first gate in
//! the list acts first.

use std::f64::consts::{PI, TAU};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{cis, ComplexMatrix, Representation, StateVector, C64, ZERO};
use crate::map_operator::{build_unitary, matrix_power};
use crate::params::{MapSpec, Variant};
use crate::spectral::{eigensystem, EigenSystem};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gate {
    H(usize),
    /// `|1⟩ → e^{iθ}|1⟩`.
    Phase1(usize, f64),
    /// `e^{iφσ_z/2}`.
    Rz(usize, f64),
    /// `|11⟩ → e^{iθ}|11⟩`.
    CPhase(usize, usize, f64),
    /// Control, target.
    Cnot(usize, usize),
}

impl Gate {
    pub fn arity(&self) -> usize {
        match self {
            Gate::H(_) | Gate::Phase1(..) | Gate::Rz(..) => 1,
            Gate::CPhase(..) | Gate::Cnot(..) => 2,
        }
    }

    pub fn qubits(&self) -> (usize, Option<usize>) {
        match *self {
            Gate::H(j) | Gate::Phase1(j, _) | Gate::Rz(j, _) => (j, None),
            Gate::CPhase(i, j, _) | Gate::Cnot(i, j) => (i, Some(j)),
        }
    }

    pub fn inverse(&self) -> Gate {
        match *self {
            Gate::H(j) => Gate::H(j),
            Gate::Phase1(j, t) => Gate::Phase1(j, -t),
            Gate::Rz(j, t) => Gate::Rz(j, -t),
            Gate::CPhase(i, j, t) => Gate::CPhase(i, j, -t),
            Gate::Cnot(i, j) => Gate::Cnot(i, j),
        }
    }

    fn relabel(&self, f: impl Fn(usize) -> usize) -> Gate {
        match *self {
            Gate::H(j) => Gate::H(f(j)),
            Gate::Phase1(j, t) => Gate::Phase1(f(j), t),
            Gate::Rz(j, t) => Gate::Rz(f(j), t),
            Gate::CPhase(i, j, t) => Gate::CPhase(f(i), f(j), t),
            Gate::Cnot(i, j) => Gate::Cnot(f(i), f(j)),
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Gate::H(j) => write!(f, "H {j}"),
            Gate::Phase1(j, t) => write!(f, "P1 {j} {t}"),
            Gate::Rz(j, t) => write!(f, "RZ {j} {t}"),
            Gate::CPhase(i, j, t) => write!(f, "CP {i} {j} {t}"),
            Gate::Cnot(i, j) => write!(f, "CNOT {i} {j}"),
        }
    }
}

/// How the kinetic `j1 = j2` terms are emitted and tallied.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum CountingMode {
    /// One conditional-phase element per ordered pair `(j1, j2)`; the
    /// diagonal elements are tallied as two-qubit gates.
    PaperFaithful,
    /// Diagonal terms as one-qubit phases, each unordered pair once.
    #[default]
    Optimized,
}

impl CountingMode {
    pub fn name(self) -> &'static str {
        match self {
            CountingMode::PaperFaithful => "paper",
            CountingMode::Optimized => "optimized",
        }
    }
}

impl fmt::Display for CountingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CountingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "paper" | "paper_faithful" | "paper-faithful" => Ok(CountingMode::PaperFaithful),
            "optimized" => Ok(CountingMode::Optimized),
            other => Err(Error::InvalidParameter(format!("unknown counting mode '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    pub n_qubits: u32,
    pub gates: Vec<Gate>,
    pub counting: CountingMode,
    /// One-qubit gates tallied as two-qubit in paper-faithful counting.
    pub diagonal_pairs: usize,
    /// Output amplitudes are in bit-reversed order; the simulator undoes it.
    pub output_reversed: bool,
}

impl Circuit {
    pub fn new(n_qubits: u32) -> Self {
        Circuit {
            n_qubits,
            gates: Vec::new(),
            counting: CountingMode::Optimized,
            diagonal_pairs: 0,
            output_reversed: false,
        }
    }

    pub fn push(&mut self, g: Gate) {
        self.gates.push(g);
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Append another circuit's gates (acting after this one's).
    pub fn extend(&mut self, other: &Circuit) {
        self.gates.extend_from_slice(&other.gates);
        self.diagonal_pairs += other.diagonal_pairs;
    }

    /// Gates reversed with inverted angles. Valid for natural-order circuits.
    pub fn inverse(&self) -> Circuit {
        Circuit {
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_qubits as usize;
        for g in &self.gates {
            let (a, b) = g.qubits();
            for q in std::iter::once(a).chain(b) {
                if q >= n {
                    return Err(Error::QubitOutOfRange {
                        qubit: q,
                        n_qubits: self.n_qubits,
                    });
                }
            }
            if b == Some(a) {
                return Err(Error::InvalidParameter(format!(
                    "two-qubit gate '{g}' acts on one qubit"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GateCounts {
    pub one_qubit: usize,
    pub two_qubit: usize,
    pub total: usize,
    pub counting_mode: CountingMode,
}

pub fn count_gates(c: &Circuit) -> GateCounts {
    let two = c.gates.iter().filter(|g| g.arity() == 2).count();
    let one = c.gates.len() - two;
    let shift = match c.counting {
        CountingMode::PaperFaithful => c.diagonal_pairs,
        CountingMode::Optimized => 0,
    };
    GateCounts {
        one_qubit: one - shift,
        two_qubit: two + shift,
        total: c.gates.len(),
        counting_mode: c.counting,
    }
}

/// DFT with kernel `e^{+2iπpq/N}/√N`, emitted without swaps; the output is
/// bit-reversed and the circuit is flagged accordingly.
pub fn build_qft(n_qubits: u32) -> Circuit {
    let mut c = Circuit::new(n_qubits);
    c.gates = qft_gates(n_qubits as usize);
    c.output_reversed = true;
    c
}

fn qft_gates(n: usize) -> Vec<Gate> {
    let mut gates = Vec::with_capacity(n * (n + 1) / 2);
    for j in (0..n).rev() {
        gates.push(Gate::H(j));
        for k in (0..j).rev() {
            gates.push(Gate::CPhase(k, j, PI / (1u64 << (j - k)) as f64));
        }
    }
    gates
}

/// `2π · frac(x)` for exactly representable `x = m / 2^k`.
fn turn(frac: f64) -> f64 {
    TAU * frac
}

/// Kinetic phase gates `e^{-2iπp²/N}` on a register holding `p` bit-reversed.
fn kinetic_gates(n: usize, mode: CountingMode) -> (Vec<Gate>, usize) {
    let dim = 1u64 << n;
    let angle = |e: usize| -> f64 {
        let r = if e >= n { 0 } else { 1u64 << e };
        -turn(r as f64 / dim as f64)
    };
    let pos = |j: usize| n - 1 - j;
    let mut gates = Vec::new();
    let mut diagonal = 0;
    match mode {
        CountingMode::PaperFaithful => {
            for j1 in 0..n {
                for j2 in 0..n {
                    if j1 == j2 {
                        gates.push(Gate::Phase1(pos(j1), angle(2 * j1)));
                        diagonal += 1;
                    } else {
                        gates.push(Gate::CPhase(pos(j1), pos(j2), angle(j1 + j2)));
                    }
                }
            }
        }
        CountingMode::Optimized => {
            for j in 0..n {
                gates.push(Gate::Phase1(pos(j), angle(2 * j)));
            }
            for j1 in 0..n {
                for j2 in j1 + 1..n {
                    gates.push(Gate::CPhase(pos(j1), pos(j2), angle(j1 + j2 + 1)));
                }
            }
        }
    }
    (gates, diagonal)
}

/// The map as `QFT† · kinetic · QFT · kick`: first the `n_q` kick phases
/// `2πα2^j`, then the QFT, the kinetic phases and the inverse QFT.
pub fn build_map_circuit(spec: &MapSpec, mode: CountingMode) -> Result<Circuit> {
    if spec.variant != Variant::Deterministic {
        return Err(Error::InvalidParameter(format!(
            "map circuit needs the deterministic variant, got {}",
            spec.variant
        )));
    }
    let n = spec.n_qubits as usize;
    let (kinetic, diagonal) = kinetic_gates(n, mode);
    let mut c = sandwich(spec, &kinetic);
    c.counting = mode;
    c.diagonal_pairs = diagonal;
    Ok(c)
}

/// `kick`, QFT, `middle` (on the bit-reversed momentum register), QFT†.
pub(crate) fn sandwich(spec: &MapSpec, middle: &[Gate]) -> Circuit {
    let n = spec.n_qubits as usize;
    let mut c = Circuit::new(spec.n_qubits);
    for j in 0..n {
        c.push(Gate::Phase1(j, turn(spec.alpha.frac_times(1u64 << j))));
    }
    let qft = qft_gates(n);
    c.gates.extend_from_slice(&qft);
    c.gates.extend_from_slice(middle);
    c.gates.extend(qft.iter().rev().map(Gate::inverse));
    c
}

/// Parity `diag((-1)^q)`, a phase `π` on qubit 0.
pub fn build_s_gate(n_qubits: u32) -> Circuit {
    let mut c = Circuit::new(n_qubits);
    c.push(Gate::Phase1(0, PI));
    c
}

fn apply_gate(amps: &mut [C64], g: &Gate) {
    let n = amps.len();
    match *g {
        Gate::H(j) => {
            let m = 1usize << j;
            let r = std::f64::consts::FRAC_1_SQRT_2;
            for base in (0..n).filter(|x| x & m == 0) {
                let (a, b) = (amps[base], amps[base | m]);
                amps[base] = (a + b) * r;
                amps[base | m] = (a - b) * r;
            }
        }
        Gate::Phase1(j, t) => {
            let m = 1usize << j;
            let e = cis(t);
            for (x, a) in amps.iter_mut().enumerate() {
                if x & m != 0 {
                    *a *= e;
                }
            }
        }
        Gate::Rz(j, t) => {
            let m = 1usize << j;
            let (e0, e1) = (cis(t / 2.0), cis(-t / 2.0));
            for (x, a) in amps.iter_mut().enumerate() {
                *a *= if x & m == 0 { e0 } else { e1 };
            }
        }
        Gate::CPhase(i, j, t) => {
            let m = (1usize << i) | (1usize << j);
            let e = cis(t);
            for (x, a) in amps.iter_mut().enumerate() {
                if x & m == m {
                    *a *= e;
                }
            }
        }
        Gate::Cnot(i, j) => {
            let (mc, mt) = (1usize << i, 1usize << j);
            for x in 0..n {
                if x & mc != 0 && x & mt == 0 {
                    amps.swap(x, x | mt);
                }
            }
        }
    }
}

pub(crate) fn bit_reverse(x: usize, n_qubits: u32) -> usize {
    if n_qubits == 0 {
        return 0;
    }
    x.reverse_bits() >> (usize::BITS - n_qubits)
}

/// Run the circuit on `ψ`.
pub fn simulate(c: &Circuit, psi: &StateVector) -> Result<StateVector> {
    c.validate()?;
    let dim = 1usize << c.n_qubits;
    if psi.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: psi.len(),
        });
    }
    let mut amps = psi.amplitudes().to_vec();
    for g in &c.gates {
        apply_gate(&mut amps, g);
    }
    if c.output_reversed {
        let src = amps.clone();
        for (x, a) in amps.iter_mut().enumerate() {
            *a = src[bit_reverse(x, c.n_qubits)];
        }
    }
    Ok(StateVector::new(amps, psi.repr()))
}

/// Dense matrix of a circuit, columns from basis-state simulation.
pub fn circuit_unitary(c: &Circuit) -> Result<ComplexMatrix> {
    let dim = 1usize << c.n_qubits;
    let mut m = ComplexMatrix::zeros(dim, Representation::Position);
    for k in 0..dim {
        let col = simulate(c, &StateVector::basis(dim, k, Representation::Position))?;
        for (i, a) in col.amplitudes().iter().enumerate() {
            m.set(i, k, *a);
        }
    }
    Ok(m)
}

/// Readout basis of the probe qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Probe {
    X,
    Y,
}

/// Hadamard test on `|+⟩|k⟩` with controlled-`Uⁿ`; returns `P(0) - P(1)` for
/// the probe after the readout gates (`H` for X, `S†` then `H` for Y).
fn probe_expectation(column: &[C64], k: usize, probe: Probe) -> f64 {
    let dim = column.len();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    // joint register: index = system + dim * probe
    let mut joint = vec![ZERO; 2 * dim];
    joint[k] = C64::new(r, 0.0);
    for (x, a) in column.iter().enumerate() {
        joint[dim + x] = a * r;
    }
    if probe == Probe::Y {
        for a in &mut joint[dim..] {
            *a *= C64::new(0.0, -1.0);
        }
    }
    let mut p0 = 0.0;
    let mut p1 = 0.0;
    for x in 0..dim {
        let (a, b) = (joint[x], joint[dim + x]);
        p0 += ((a + b) * r).norm_sqr();
        p1 += ((a - b) * r).norm_sqr();
    }
    p0 - p1
}

/// Probe-qubit estimate of `Tr Uⁿ / N` on the maximally mixed register.
/// Exact mode averages over all basis states; with `shots`, each shot draws a
/// basis state and one ±1 outcome per quadrature.
pub fn scattering_trace<R: Rng + ?Sized>(eig: &EigenSystem, n: u64, shots: Option<u64>, rng: &mut R) -> Result<C64> {
    let un = matrix_power(eig, n)?;
    let dim = un.dim();
    match shots {
        None => {
            let mut acc = ZERO;
            for k in 0..dim {
                let col = un.column_slice(k);
                acc += C64::new(probe_expectation(col, k, Probe::X), probe_expectation(col, k, Probe::Y));
            }
            Ok(acc / dim as f64)
        }
        Some(0) => Err(Error::InvalidParameter("shots must be positive".into())),
        Some(s) => {
            let mut sx = 0i64;
            let mut sy = 0i64;
            for _ in 0..s {
                let k = rng.random_range(0..dim);
                let col = un.column_slice(k);
                for (probe, sum) in [(Probe::X, &mut sx), (Probe::Y, &mut sy)] {
                    let p0 = (1.0 + probe_expectation(col, k, probe)) / 2.0;
                    *sum += if rng.random::<f64>() < p0 { 1 } else { -1 };
                }
            }
            Ok(C64::new(sx as f64, sy as f64) / s as f64)
        }
    }
}

/// [`scattering_trace`] for the deterministic map of `spec`.
pub fn scattering_trace_for_spec<R: Rng + ?Sized>(
    spec: &MapSpec,
    n: u64,
    shots: Option<u64>,
    rng: &mut R,
) -> Result<C64> {
    let eig = eigensystem(&build_unitary(spec)?)?;
    scattering_trace(&eig, n, shots, rng)
}

/// One gate per line; `#` header lines carry the non-default circuit fields.
pub fn emit_gatelist(c: &Circuit) -> String {
    let mut out = String::new();
    if c.n_qubits as usize != inferred_qubits(&c.gates) {
        let _ = writeln!(out, "# qubits {}", c.n_qubits);
    }
    if c.counting != CountingMode::Optimized {
        let _ = writeln!(out, "# counting {}", c.counting);
    }
    if c.diagonal_pairs != 0 {
        let _ = writeln!(out, "# diagonal-pairs {}", c.diagonal_pairs);
    }
    if c.output_reversed {
        let _ = writeln!(out, "# output reversed");
    }
    for g in &c.gates {
        let _ = writeln!(out, "{g}");
    }
    out
}

fn inferred_qubits(gates: &[Gate]) -> usize {
    gates
        .iter()
        .map(|g| {
            let (a, b) = g.qubits();
            a.max(b.unwrap_or(0)) + 1
        })
        .max()
        .unwrap_or(0)
}

pub fn parse_gatelist(text: &str) -> Result<Circuit> {
    let mut qubits: Option<u32> = None;
    let mut c = Circuit::new(0);
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let err = |message: String| Error::Parse { line: line_no, message };
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let words: Vec<&str> = rest.split_whitespace().collect();
            match words.as_slice() {
                ["qubits", v] => qubits = Some(v.parse().map_err(|_| err(format!("bad qubit count '{v}'")))?),
                ["counting", v] => c.counting = v.parse().map_err(|e: Error| err(e.to_string()))?,
                ["diagonal-pairs", v] => c.diagonal_pairs = v.parse().map_err(|_| err(format!("bad count '{v}'")))?,
                ["output", "reversed"] => c.output_reversed = true,
                _ => {}
            }
            continue;
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        let idx = |w: &str| -> Result<usize> { w.parse().map_err(|_| err(format!("bad qubit index '{w}'"))) };
        let ang = |w: &str| -> Result<f64> {
            w.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| err(format!("bad angle '{w}'")))
        };
        let g = match words.as_slice() {
            ["H", j] => Gate::H(idx(j)?),
            ["P1", j, t] => Gate::Phase1(idx(j)?, ang(t)?),
            ["RZ", j, t] => Gate::Rz(idx(j)?, ang(t)?),
            ["CP", a, b, t] => Gate::CPhase(idx(a)?, idx(b)?, ang(t)?),
            ["CNOT", a, b] => Gate::Cnot(idx(a)?, idx(b)?),
            _ => return Err(err(format!("unrecognized gate '{line}'"))),
        };
        if let (a, Some(b)) = g.qubits() {
            if a == b {
                return Err(err(format!("two-qubit gate on a single qubit '{line}'")));
            }
        }
        c.gates.push(g);
    }
    let needed = inferred_qubits(&c.gates);
    c.n_qubits = match qubits {
        Some(q) if (q as usize) < needed => {
            return Err(Error::Parse {
                line: 0,
                message: format!("gate index exceeds declared {q} qubits"),
            })
        }
        Some(q) => q,
        None => needed as u32,
    };
    Ok(c)
}

/// Relabel a circuit's qubits through `f`.
pub(crate) fn relabel(gates: &[Gate], f: impl Fn(usize) -> usize + Copy) -> Vec<Gate> {
    gates.iter().map(|g| g.relabel(f)).collect()
}
