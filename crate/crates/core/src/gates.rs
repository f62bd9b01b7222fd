//! Qubit registers as sets of oscillators.
//!
//! An `n`-qubit register has `2^n` basis states `|b_0 b_1 … b_{n-1}⟩`; qubit 0
//! is the leftmost label and the most significant bit of the state index, so
//! two qubits are ordered `|00⟩, |01⟩, |10⟩, |11⟩`. Each basis state is one
//! oscillator. Gates act either as matrices or as schedules of coupling
//! windows between pairs of oscillators plus single-state phase shifts.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::IntegratorConfig;
use crate::model::HamiltonianSpec;
use crate::oscillator::{evolve_exact_real, qp_from_amplitudes};
use crate::quantum_ref::AmplitudeState;

pub type CMatrix = DMatrix<Complex64>;

/// Tolerance on `Σ|c|² = 1` and on `U†U = 1` for caller-supplied data.
pub const NORM_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegisterState {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl RegisterState {
    /// Fails unless `amplitudes` has `2^n_qubits` entries and unit norm.
    pub fn new(n_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if n_qubits == 0 || n_qubits > 20 {
            return Err(Error::Validation(format!("unsupported qubit count {n_qubits}")));
        }
        if amplitudes.len() != 1 << n_qubits {
            return Err(Error::Validation(format!(
                "{n_qubits} qubits need {} amplitudes, got {}",
                1 << n_qubits,
                amplitudes.len()
            )));
        }
        let s = RegisterState { n_qubits, amplitudes };
        let norm = s.norm_sqr();
        if !((norm - 1.0).abs() <= NORM_TOL) {
            return Err(Error::Validation(format!(
                "register state has norm² {norm}, expected 1"
            )));
        }
        Ok(s)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        if index >= 1 << n_qubits {
            return Err(Error::Validation(format!(
                "basis index {index} out of range for {n_qubits} qubits"
            )));
        }
        let mut c = vec![ZERO; 1 << n_qubits];
        c[index] = ONE;
        RegisterState::new(n_qubits, c)
    }

    /// Basis state from its label, e.g. `"10"` for `|10⟩`.
    pub fn from_label(label: &str) -> Result<Self> {
        let bits = label
            .trim()
            .trim_start_matches('|')
            .trim_end_matches('⟩')
            .trim_end_matches('>');
        if bits.is_empty() || !bits.chars().all(|c| c == '0' || c == '1') {
            return Err(Error::Validation(format!("invalid basis label {label:?}")));
        }
        let index = usize::from_str_radix(bits, 2).expect("binary digits");
        RegisterState::basis(bits.len(), index)
    }

    /// Tensor product `a ⊗ b`.
    pub fn product(a: &RegisterState, b: &RegisterState) -> Result<Self> {
        let amps = a
            .amplitudes
            .iter()
            .flat_map(|x| b.amplitudes.iter().map(move |y| x * y))
            .collect();
        RegisterState::new(a.n_qubits + b.n_qubits, amps)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn to_amplitude_state(&self) -> AmplitudeState {
        AmplitudeState(self.amplitudes.clone())
    }

    /// Basis label of state `index`, e.g. `|01⟩`.
    pub fn label(&self, index: usize) -> String {
        basis_label(self.n_qubits, index)
    }

    pub fn max_abs_diff(&self, other: &RegisterState) -> f64 {
        max_diff(&self.amplitudes, &other.amplitudes)
    }

    /// Max amplitude deviation after removing one global phase, see [`phase_distance`].
    pub fn distance_up_to_phase(&self, other: &RegisterState) -> f64 {
        phase_distance(&self.amplitudes, &other.amplitudes)
    }

    fn from_raw(n_qubits: usize, amplitudes: Vec<Complex64>) -> Self {
        RegisterState { n_qubits, amplitudes }
    }
}

impl fmt::Display for RegisterState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.amplitudes.iter().enumerate() {
            if c.norm() < 1e-12 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({:.6}{:+.6}i){}", c.re, c.im, self.label(k))?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

pub fn basis_label(n_qubits: usize, index: usize) -> String {
    format!("|{:0width$b}⟩", index, width = n_qubits)
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Unit phase `e^{iφ}` with `b ≈ e^{iφ} a`, taken from the largest-magnitude
/// amplitude of `a`.
pub fn global_phase(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    let k = a
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.norm().total_cmp(&y.1.norm()))
        .map(|(k, _)| k)
        .unwrap_or(0);
    if a.is_empty() || a[k].norm() == 0.0 || b[k].norm() == 0.0 {
        return ONE;
    }
    let r = b[k] / a[k];
    r / r.norm()
}

/// `max_n |e^{iφ} a_n - b_n|` with the phase from [`global_phase`].
pub fn phase_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let ph = global_phase(a, b);
    a.iter().zip(b).map(|(x, y)| (ph * x - y).norm()).fold(0.0, f64::max)
}

/// Same as [`phase_distance`] for matrices, using one phase for all entries.
pub fn matrix_phase_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    phase_distance(a.as_slice(), b.as_slice())
}

/// `cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩`.
pub fn bloch_state(theta: f64, phi: f64) -> RegisterState {
    let (s, c) = (0.5 * theta).sin_cos();
    RegisterState::from_raw(1, vec![re(c), Complex64::from_polar(s, phi)])
}

/// Degenerate pair coupled with strength `V` for time `t`:
/// `[[cos Vt, -i sin Vt], [-i sin Vt, cos Vt]]`.
pub fn coupling_unitary(v: f64, t: f64) -> CMatrix {
    let (s, c) = (v * t).sin_cos();
    CMatrix::from_row_slice(2, 2, &[re(c), -I * s, -I * s, re(c)])
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

pub fn hadamard() -> CMatrix {
    let h = re(FRAC_1_SQRT_2);
    CMatrix::from_row_slice(2, 2, &[h, h, h, -h])
}

/// `exp(-iθσx/2)`.
pub fn rx(theta: f64) -> CMatrix {
    let (s, c) = (0.5 * theta).sin_cos();
    CMatrix::from_row_slice(2, 2, &[re(c), -I * s, -I * s, re(c)])
}

/// `exp(-iθσy/2)`.
pub fn ry(theta: f64) -> CMatrix {
    let (s, c) = (0.5 * theta).sin_cos();
    CMatrix::from_row_slice(2, 2, &[re(c), re(-s), re(s), re(c)])
}

/// `exp(-iθσz/2)`.
pub fn rz(theta: f64) -> CMatrix {
    CMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::from_polar(1.0, -0.5 * theta),
            ZERO,
            ZERO,
            Complex64::from_polar(1.0, 0.5 * theta),
        ],
    )
}

pub fn swap() -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    m[(0, 0)] = ONE;
    m[(1, 2)] = ONE;
    m[(2, 1)] = ONE;
    m[(3, 3)] = ONE;
    m
}

/// Square root of iSWAP in the coupling convention: identity on `|00⟩`, `|11⟩`
/// and [`coupling_unitary`] at `Vt = π/4` on `(|01⟩, |10⟩)`.
pub fn sqisw() -> CMatrix {
    let mut m = identity(4);
    let block = coupling_unitary(1.0, PI / 4.0);
    for (r, &i) in [1, 2].iter().enumerate() {
        for (c, &j) in [1, 2].iter().enumerate() {
            m[(i, j)] = block[(r, c)];
        }
    }
    m
}

/// Control is the first qubit.
pub fn cnot() -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    m[(0, 0)] = ONE;
    m[(1, 1)] = ONE;
    m[(2, 3)] = ONE;
    m[(3, 2)] = ONE;
    m
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// `max |U†U - 1|`.
pub fn unitarity_error(u: &CMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    let d = u.adjoint() * u - identity(u.nrows());
    d.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn is_unitary(u: &CMatrix, tol: f64) -> bool {
    unitarity_error(u) <= tol
}

#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    Identity,
    X(usize),
    Y(usize),
    Z(usize),
    H(usize),
    Rx {
        qubit: usize,
        theta: f64,
    },
    Ry {
        qubit: usize,
        theta: f64,
    },
    Rz {
        qubit: usize,
        theta: f64,
    },
    Swap(usize, usize),
    Sqisw(usize, usize),
    Cnot {
        control: usize,
        target: usize,
    },
    /// Arbitrary unitary on the listed qubits (first target most significant).
    Unitary {
        matrix: CMatrix,
        targets: Vec<usize>,
    },
}

impl Gate {
    /// Matrix on the gate's own targets, ordered as [`Gate::targets`].
    pub fn matrix(&self) -> CMatrix {
        match self {
            Gate::Identity => identity(1),
            Gate::X(_) => pauli_x(),
            Gate::Y(_) => pauli_y(),
            Gate::Z(_) => pauli_z(),
            Gate::H(_) => hadamard(),
            Gate::Rx { theta, .. } => rx(*theta),
            Gate::Ry { theta, .. } => ry(*theta),
            Gate::Rz { theta, .. } => rz(*theta),
            Gate::Swap(..) => swap(),
            Gate::Sqisw(..) => sqisw(),
            Gate::Cnot { .. } => cnot(),
            Gate::Unitary { matrix, .. } => matrix.clone(),
        }
    }

    pub fn targets(&self) -> Vec<usize> {
        match self {
            Gate::Identity => vec![],
            Gate::X(q) | Gate::Y(q) | Gate::Z(q) | Gate::H(q) => vec![*q],
            Gate::Rx { qubit, .. } | Gate::Ry { qubit, .. } | Gate::Rz { qubit, .. } => vec![*qubit],
            Gate::Swap(a, b) | Gate::Sqisw(a, b) => vec![*a, *b],
            Gate::Cnot { control, target } => vec![*control, *target],
            Gate::Unitary { targets, .. } => targets.clone(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Gate::Identity => "id",
            Gate::X(_) => "x",
            Gate::Y(_) => "y",
            Gate::Z(_) => "z",
            Gate::H(_) => "h",
            Gate::Rx { .. } => "rx",
            Gate::Ry { .. } => "ry",
            Gate::Rz { .. } => "rz",
            Gate::Swap(..) => "swap",
            Gate::Sqisw(..) => "sqisw",
            Gate::Cnot { .. } => "cnot",
            Gate::Unitary { .. } => "unitary",
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = self.targets();
        let args: Vec<String> = t.iter().map(|q| q.to_string()).collect();
        match self {
            Gate::Rx { theta, .. } | Gate::Ry { theta, .. } | Gate::Rz { theta, .. } => {
                write!(f, "{}({}, {})", self.name(), args[0], theta)
            }
            Gate::Identity => write!(f, "id"),
            _ => write!(f, "{}({})", self.name(), args.join(", ")),
        }
    }
}

/// Real expression of the forms `1.5`, `pi`, `-pi/2`, `3*pi/4`, `pi*0.25`.
pub fn parse_angle(s: &str) -> Result<f64> {
    let s = s.trim();
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => (-1.0, rest.trim()),
        None => (1.0, s.strip_prefix('+').unwrap_or(s).trim()),
    };
    if body.is_empty() {
        return Err(Error::Validation(format!("empty angle {s:?}")));
    }
    let mut value = 1.0;
    let mut op = '*';
    let mut rest = body;
    loop {
        let end = rest.find(['*', '/']).unwrap_or(rest.len());
        let tok = rest[..end].trim();
        let x = match tok.to_ascii_lowercase().as_str() {
            "pi" | "π" => PI,
            t => t
                .parse::<f64>()
                .map_err(|_| Error::Validation(format!("invalid angle {s:?}")))?,
        };
        value = if op == '*' { value * x } else { value / x };
        if end == rest.len() {
            break;
        }
        op = rest[end..].chars().next().expect("operator");
        rest = &rest[end + 1..];
    }
    if !value.is_finite() {
        return Err(Error::Validation(format!("angle {s:?} is not finite")));
    }
    Ok(sign * value)
}

impl FromStr for Gate {
    type Err = Error;

    /// `name(arg, …)` with qubit indices and, for rotations, a trailing angle:
    /// `ry(0, pi/2)`, `sqisw(0, 1)`, `cnot(0, 1)`, `h(1)`, `id`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, args) = match s.find('(') {
            Some(open) => {
                let close = s
                    .rfind(')')
                    .filter(|&c| c > open && s[c + 1..].trim().is_empty())
                    .ok_or_else(|| Error::Validation(format!("unbalanced parentheses in gate {s:?}")))?;
                let inner = &s[open + 1..close];
                let args: Vec<&str> = if inner.trim().is_empty() {
                    vec![]
                } else {
                    inner.split(',').map(str::trim).collect()
                };
                (s[..open].trim().to_ascii_lowercase(), args)
            }
            None => (s.to_ascii_lowercase(), vec![]),
        };
        let qubit = |k: usize| -> Result<usize> {
            args.get(k)
                .ok_or_else(|| Error::Validation(format!("gate {s:?} is missing argument {}", k + 1)))?
                .parse::<usize>()
                .map_err(|_| Error::Validation(format!("gate {s:?}: qubit index must be a non-negative integer")))
        };
        let arity = |n: usize| -> Result<()> {
            if args.len() == n {
                Ok(())
            } else {
                Err(Error::Validation(format!(
                    "gate {s:?} takes {n} argument(s), got {}",
                    args.len()
                )))
            }
        };
        let gate = match name.as_str() {
            "id" | "i" | "identity" => {
                arity(0)?;
                Gate::Identity
            }
            "x" => {
                arity(1)?;
                Gate::X(qubit(0)?)
            }
            "y" => {
                arity(1)?;
                Gate::Y(qubit(0)?)
            }
            "z" => {
                arity(1)?;
                Gate::Z(qubit(0)?)
            }
            "h" => {
                arity(1)?;
                Gate::H(qubit(0)?)
            }
            "rx" | "ry" | "rz" => {
                arity(2)?;
                let (q, theta) = (qubit(0)?, parse_angle(args[1])?);
                match name.as_str() {
                    "rx" => Gate::Rx { qubit: q, theta },
                    "ry" => Gate::Ry { qubit: q, theta },
                    _ => Gate::Rz { qubit: q, theta },
                }
            }
            "swap" | "sqisw" | "cnot" | "cx" => {
                arity(2)?;
                let (a, b) = (qubit(0)?, qubit(1)?);
                match name.as_str() {
                    "swap" => Gate::Swap(a, b),
                    "sqisw" => Gate::Sqisw(a, b),
                    _ => Gate::Cnot { control: a, target: b },
                }
            }
            other => return Err(Error::Validation(format!("unknown gate {other:?}"))),
        };
        Ok(gate)
    }
}

/// Parses a `;`-separated gate list.
pub fn parse_circuit(s: &str) -> Result<Vec<Gate>> {
    s.split(';')
        .map(str::trim)
        .filter(|g| !g.is_empty())
        .map(Gate::from_str)
        .collect()
}

fn bit_of(n_qubits: usize, qubit: usize) -> usize {
    1 << (n_qubits - 1 - qubit)
}

fn check_targets(n_qubits: usize, targets: &[usize]) -> Result<()> {
    for (k, &q) in targets.iter().enumerate() {
        if q >= n_qubits {
            return Err(Error::Validation(format!(
                "qubit {q} out of range for a {n_qubits}-qubit register"
            )));
        }
        if targets[..k].contains(&q) {
            return Err(Error::Validation(format!("qubit {q} targeted twice")));
        }
    }
    Ok(())
}

/// Applies `g` (size `2^k`) to qubits `targets` of `s`; the first target is
/// the most significant index of `g`.
pub fn apply_gate(g: &CMatrix, targets: &[usize], s: &RegisterState) -> Result<RegisterState> {
    let n = s.n_qubits;
    check_targets(n, targets)?;
    let k = targets.len();
    if g.nrows() != 1 << k || g.ncols() != 1 << k {
        return Err(Error::Validation(format!(
            "gate matrix is {}x{} but {k} target(s) need {}x{}",
            g.nrows(),
            g.ncols(),
            1 << k,
            1 << k
        )));
    }
    let err = unitarity_error(g);
    if !(err <= NORM_TOL) {
        return Err(Error::Validation(format!("gate is not unitary (|U†U - 1| = {err:e})")));
    }
    if k == 0 {
        return Ok(s.clone());
    }
    let masks: Vec<usize> = targets.iter().map(|&q| bit_of(n, q)).collect();
    let target_mask: usize = masks.iter().sum();
    // Offsets of the 2^k sub-states relative to a base index with all target bits clear.
    let offsets: Vec<usize> = (0..1usize << k)
        .map(|local| {
            masks
                .iter()
                .enumerate()
                .filter(|(j, _)| local & (1 << (k - 1 - j)) != 0)
                .map(|(_, m)| m)
                .sum()
        })
        .collect();
    let mut out = s.amplitudes.clone();
    let mut buf = vec![ZERO; 1 << k];
    for base in (0..s.dim()).filter(|i| i & target_mask == 0) {
        for (r, slot) in buf.iter_mut().enumerate() {
            *slot = offsets
                .iter()
                .enumerate()
                .map(|(c, off)| g[(r, c)] * s.amplitudes[base + off])
                .sum();
        }
        for (r, off) in offsets.iter().enumerate() {
            out[base + off] = buf[r];
        }
    }
    Ok(RegisterState::from_raw(n, out))
}

pub fn apply(gate: &Gate, s: &RegisterState) -> Result<RegisterState> {
    if let Gate::Identity = gate {
        return Ok(s.clone());
    }
    apply_gate(&gate.matrix(), &gate.targets(), s)
}

/// Applies `gates` in order and returns the final state together with the
/// input and every intermediate state.
pub fn apply_circuit(gates: &[Gate], s: &RegisterState) -> Result<(RegisterState, Vec<RegisterState>)> {
    let mut states = vec![s.clone()];
    let mut cur = s.clone();
    for g in gates {
        cur = apply(g, &cur)?;
        states.push(cur.clone());
    }
    Ok((cur, states))
}

/// Full `2^n` matrix of a gate sequence.
pub fn circuit_matrix(gates: &[Gate], n_qubits: usize) -> Result<CMatrix> {
    let dim = 1 << n_qubits;
    let mut m = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        let (out, _) = apply_circuit(gates, &RegisterState::basis(n_qubits, col)?)?;
        m.set_column(col, &nalgebra::DVector::from_column_slice(out.amplitudes()));
    }
    Ok(m)
}

/// The six steps of the CNOT decomposition (control 0, target 1), in the
/// order they act on the state. The fifth step rotates both qubits at once.
pub fn cnot_decomposition_steps() -> Vec<Vec<Gate>> {
    vec![
        vec![Gate::Ry {
            qubit: 0,
            theta: FRAC_PI_2,
        }],
        vec![Gate::Sqisw(0, 1)],
        vec![Gate::Rx { qubit: 0, theta: PI }],
        vec![Gate::Sqisw(0, 1)],
        vec![
            Gate::Rx {
                qubit: 0,
                theta: FRAC_PI_2,
            },
            Gate::Rx {
                qubit: 1,
                theta: -FRAC_PI_2,
            },
        ],
        vec![Gate::Ry {
            qubit: 0,
            theta: -FRAC_PI_2,
        }],
    ]
}

pub fn cnot_decomposition_gates() -> Vec<Gate> {
    cnot_decomposition_steps().into_iter().flatten().collect()
}

/// Runs the decomposition on a two-qubit state. Returns the final state and
/// the seven states `Ψ1 … Ψ7` (input first, final last).
pub fn cnot_via_decomposition(s: &RegisterState) -> Result<(RegisterState, Vec<RegisterState>)> {
    if s.n_qubits != 2 {
        return Err(Error::Validation(format!(
            "CNOT decomposition needs 2 qubits, got {}",
            s.n_qubits
        )));
    }
    let mut states = vec![s.clone()];
    let mut cur = s.clone();
    for step in cnot_decomposition_steps() {
        for g in &step {
            cur = apply(g, &cur)?;
        }
        states.push(cur.clone());
    }
    Ok((cur, states))
}

/// Coupling of two oscillators `pair.0`, `pair.1` with strength `V` for `duration`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub pair: (usize, usize),
    pub strength: f64,
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ScheduleOp {
    /// Windows on disjoint pairs, switched on together.
    Couple(Vec<Window>),
    /// Multiplies the amplitude of `state` by `e^{i angle}`.
    Phase { state: usize, angle: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateSchedule {
    pub n_states: usize,
    pub ops: Vec<ScheduleOp>,
}

impl GateSchedule {
    pub fn empty(n_states: usize) -> Self {
        GateSchedule { n_states, ops: vec![] }
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn windows(&self) -> impl Iterator<Item = &Window> {
        self.ops.iter().flat_map(|op| match op {
            ScheduleOp::Couple(w) => w.as_slice(),
            ScheduleOp::Phase { .. } => &[],
        })
    }

    /// Total coupling time, counting simultaneous windows once.
    pub fn duration(&self) -> f64 {
        self.ops
            .iter()
            .map(|op| match op {
                ScheduleOp::Couple(w) => w.iter().map(|w| w.duration).fold(0.0, f64::max),
                ScheduleOp::Phase { .. } => 0.0,
            })
            .sum()
    }

    pub fn extend(&mut self, other: GateSchedule) {
        self.ops.extend(other.ops);
    }

    pub fn validate(&self) -> Result<()> {
        for op in &self.ops {
            match op {
                ScheduleOp::Couple(ws) => {
                    let mut used = vec![false; self.n_states];
                    for w in ws {
                        let (i, j) = w.pair;
                        if i == j || i >= self.n_states || j >= self.n_states {
                            return Err(Error::Validation(format!(
                                "window pair ({i}, {j}) invalid for {} states",
                                self.n_states
                            )));
                        }
                        if used[i] || used[j] {
                            return Err(Error::Validation(format!(
                                "simultaneous windows share a state in pair ({i}, {j})"
                            )));
                        }
                        used[i] = true;
                        used[j] = true;
                        if !(w.duration >= 0.0 && w.duration.is_finite()) || !w.strength.is_finite() {
                            return Err(Error::Validation(format!(
                                "window ({i}, {j}) has invalid duration {} or strength {}",
                                w.duration, w.strength
                            )));
                        }
                    }
                }
                ScheduleOp::Phase { state, angle } => {
                    if *state >= self.n_states || !angle.is_finite() {
                        return Err(Error::Validation(format!(
                            "phase shift on state {state} ({angle}) invalid for {} states",
                            self.n_states
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Closed-form matrix of the schedule in the carrier frame.
    pub fn unitary(&self) -> Result<CMatrix> {
        self.validate()?;
        let mut m = identity(self.n_states);
        for op in &self.ops {
            let mut step = identity(self.n_states);
            match op {
                ScheduleOp::Couple(ws) => {
                    for w in ws {
                        let u = coupling_unitary(w.strength, w.duration);
                        let (i, j) = w.pair;
                        step[(i, i)] = u[(0, 0)];
                        step[(i, j)] = u[(0, 1)];
                        step[(j, i)] = u[(1, 0)];
                        step[(j, j)] = u[(1, 1)];
                    }
                }
                ScheduleOp::Phase { state, angle } => {
                    step[(*state, *state)] = Complex64::from_polar(1.0, *angle);
                }
            }
            m = step * m;
        }
        Ok(m)
    }
}

/// Pairs `(i, j)` of states that differ only in `qubit`, with `qubit = 0` in `i`.
fn qubit_pairs(n_qubits: usize, qubit: usize) -> Vec<(usize, usize)> {
    let b = bit_of(n_qubits, qubit);
    (0..1 << n_qubits).filter(|i| i & b == 0).map(|i| (i, i | b)).collect()
}

fn states_with(n_qubits: usize, qubit: usize, value: bool) -> Vec<usize> {
    let b = bit_of(n_qubits, qubit);
    (0..1 << n_qubits).filter(|i| (i & b != 0) == value).collect()
}

fn couple(pairs: &[(usize, usize)], v: f64, duration: f64) -> ScheduleOp {
    ScheduleOp::Couple(
        pairs
            .iter()
            .map(|&pair| Window {
                pair,
                strength: v,
                duration,
            })
            .collect(),
    )
}

fn phases(states: &[usize], angle: f64) -> Vec<ScheduleOp> {
    states.iter().map(|&state| ScheduleOp::Phase { state, angle }).collect()
}

fn rx_ops(n: usize, qubit: usize, theta: f64, v: f64) -> Vec<ScheduleOp> {
    let theta = theta.rem_euclid(4.0 * PI);
    if theta == 0.0 {
        return vec![];
    }
    vec![couple(&qubit_pairs(n, qubit), v, theta / (2.0 * v))]
}

fn ry_ops(n: usize, qubit: usize, theta: f64, v: f64) -> Vec<ScheduleOp> {
    let ones = states_with(n, qubit, true);
    let mut ops = phases(&ones, -FRAC_PI_2);
    ops.extend(rx_ops(n, qubit, theta, v));
    ops.extend(phases(&ones, FRAC_PI_2));
    ops
}

/// Coupling-window realisation of `gate` on an `n_qubits` register with
/// coupling strength `v > 0`.
///
/// Rotations about x are one set of simultaneous windows of duration
/// `θ/(2V)` on all pairs differing in the rotated qubit; y and z rotations add
/// phase shifts. SWAP, SQiSW and CNOT couple the pairs they exchange.
pub fn schedule_for_gate(gate: &Gate, n_qubits: usize, v: f64) -> Result<GateSchedule> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::Validation(format!(
            "coupling strength must be positive, got {v}"
        )));
    }
    if n_qubits == 0 || n_qubits > 20 {
        return Err(Error::Validation(format!("unsupported qubit count {n_qubits}")));
    }
    check_targets(n_qubits, &gate.targets())?;
    let n = n_qubits;
    let quarter = PI / (2.0 * v);
    let ops = match gate {
        Gate::Identity => vec![],
        Gate::Rx { qubit, theta } => rx_ops(n, *qubit, *theta, v),
        Gate::Ry { qubit, theta } => ry_ops(n, *qubit, *theta, v),
        Gate::Rz { qubit, theta } => {
            let mut ops = phases(&states_with(n, *qubit, false), -0.5 * theta);
            ops.extend(phases(&states_with(n, *qubit, true), 0.5 * theta));
            ops
        }
        Gate::Z(q) => phases(&states_with(n, *q, true), PI),
        Gate::X(q) => {
            let mut ops = vec![couple(&qubit_pairs(n, *q), v, quarter)];
            ops.extend(phases(&(0..1 << n).collect::<Vec<_>>(), FRAC_PI_2));
            ops
        }
        Gate::Y(q) => {
            // Y = i·Ry(π)
            let mut ops = ry_ops(n, *q, PI, v);
            ops.extend(phases(&(0..1 << n).collect::<Vec<_>>(), FRAC_PI_2));
            ops
        }
        Gate::H(q) => {
            let mut ops = phases(&states_with(n, *q, true), PI);
            ops.extend(ry_ops(n, *q, FRAC_PI_2, v));
            ops
        }
        Gate::Swap(a, b) | Gate::Sqisw(a, b) => {
            let (ba, bb) = (bit_of(n, *a), bit_of(n, *b));
            let pairs: Vec<(usize, usize)> = (0..1 << n)
                .filter(|i| i & ba == 0 && i & bb != 0)
                .map(|i| (i, (i | ba) & !bb))
                .collect();
            if let Gate::Sqisw(..) = gate {
                vec![couple(&pairs, v, PI / (4.0 * v))]
            } else {
                let mut ops = vec![couple(&pairs, v, quarter)];
                let touched: Vec<usize> = pairs.iter().flat_map(|&(i, j)| [i, j]).collect();
                ops.extend(phases(&touched, FRAC_PI_2));
                ops
            }
        }
        Gate::Cnot { control, target } => {
            let (bc, bt) = (bit_of(n, *control), bit_of(n, *target));
            let pairs: Vec<(usize, usize)> = (0..1 << n)
                .filter(|i| i & bc != 0 && i & bt == 0)
                .map(|i| (i, i | bt))
                .collect();
            let mut ops = vec![couple(&pairs, v, quarter)];
            let touched: Vec<usize> = pairs.iter().flat_map(|&(i, j)| [i, j]).collect();
            ops.extend(phases(&touched, FRAC_PI_2));
            ops
        }
        Gate::Unitary { .. } => {
            return Err(Error::NotImplemented(
                "no coupling schedule for an arbitrary unitary".into(),
            ))
        }
    };
    Ok(GateSchedule { n_states: 1 << n, ops })
}

pub fn schedule_for_circuit(gates: &[Gate], n_qubits: usize, v: f64) -> Result<GateSchedule> {
    let mut sched = GateSchedule::empty(1 << n_qubits);
    for g in gates {
        sched.extend(schedule_for_gate(g, n_qubits, v)?);
    }
    Ok(sched)
}

/// Oscillator realisation of the whole CNOT decomposition.
pub fn cnot_decomposition_schedule(v: f64) -> Result<GateSchedule> {
    schedule_for_circuit(&cnot_decomposition_gates(), 2, v)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleConfig {
    /// Common frequency `ε` of all oscillators.
    pub carrier: f64,
    pub integrator: IntegratorConfig,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        ScheduleConfig {
            carrier: 10.0,
            integrator: IntegratorConfig::default().with_samples(2),
        }
    }
}

/// Runs the schedule on physical oscillators.
///
/// Each window integrates the exact equations of its pair, two identical
/// oscillators of frequency `ε` coupled by `V`. Oscillators outside any window
/// rotate freely at `ε`. The common carrier phase `e^{-iεT}` is removed at the
/// end, so the result is directly comparable with matrix application.
pub fn execute_schedule(sched: &GateSchedule, s: &RegisterState, cfg: &ScheduleConfig) -> Result<RegisterState> {
    sched.validate()?;
    if sched.n_states != s.dim() {
        return Err(Error::Validation(format!(
            "schedule acts on {} states but the register has {}",
            sched.n_states,
            s.dim()
        )));
    }
    if !cfg.carrier.is_finite() {
        return Err(Error::Validation("carrier frequency must be finite".into()));
    }
    let eps = cfg.carrier;
    let mut c = s.amplitudes.clone();
    let mut elapsed = 0.0;
    for op in &sched.ops {
        match op {
            ScheduleOp::Phase { state, angle } => c[*state] *= Complex64::from_polar(1.0, *angle),
            ScheduleOp::Couple(ws) => {
                let span = ws.iter().map(|w| w.duration).fold(0.0, f64::max);
                let mut busy = vec![false; c.len()];
                for w in ws {
                    let (i, j) = w.pair;
                    busy[i] = true;
                    busy[j] = true;
                    let (a, b) = if w.duration > 0.0 {
                        let spec = HamiltonianSpec::TwoLevel {
                            e1: eps,
                            e2: eps,
                            v: w.strength,
                        };
                        let s0 = qp_from_amplitudes(&AmplitudeState(vec![c[i], c[j]]));
                        let traj = evolve_exact_real(&spec, &s0, 0.0, w.duration, &cfg.integrator)?;
                        let z = traj.last().expect("non-empty trajectory").1.to_amplitudes();
                        (z[0], z[1])
                    } else {
                        (c[i], c[j])
                    };
                    let idle = Complex64::from_polar(1.0, -eps * (span - w.duration));
                    c[i] = a * idle;
                    c[j] = b * idle;
                }
                let free = Complex64::from_polar(1.0, -eps * span);
                for (k, z) in c.iter_mut().enumerate() {
                    if !busy[k] {
                        *z *= free;
                    }
                }
                elapsed += span;
            }
        }
    }
    let frame = Complex64::from_polar(1.0, eps * elapsed);
    Ok(RegisterState::from_raw(
        s.n_qubits,
        c.into_iter().map(|z| z * frame).collect(),
    ))
}

/// `ρ = c c†`.
pub fn density_matrix(s: &RegisterState) -> CMatrix {
    let c = nalgebra::DVector::from_column_slice(&s.amplitudes);
    &c * c.adjoint()
}

/// Reduced density matrix of the first qubit of a two-qubit state.
pub fn reduced_density_a(s: &RegisterState) -> CMatrix {
    let c = &s.amplitudes;
    CMatrix::from_fn(2, 2, |i, k| (0..2).map(|j| c[2 * i + j] * c[2 * k + j].conj()).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Entanglement {
    /// Von Neumann entropy of either qubit, in bits.
    pub entropy: f64,
    pub concurrence: f64,
}

/// Entropy and concurrence of a pure two-qubit state.
pub fn entanglement_measures(s: &RegisterState) -> Result<Entanglement> {
    if s.n_qubits != 2 {
        return Err(Error::Validation(format!(
            "entanglement measures need 2 qubits, got {}",
            s.n_qubits
        )));
    }
    let norm = s.norm_sqr();
    if !((norm - 1.0).abs() <= NORM_TOL) {
        return Err(Error::Validation(format!("state has norm² {norm}, expected 1")));
    }
    let [a, b, c, d] = [s.amplitudes[0], s.amplitudes[1], s.amplitudes[2], s.amplitudes[3]];
    let concurrence = (2.0 * (a * d - b * c).norm()).min(1.0);
    // Eigenvalues of ρ_a are (1 ± √(1 - C²))/2.
    let root = (1.0 - concurrence * concurrence).max(0.0).sqrt();
    let entropy = [0.5 * (1.0 + root), 0.5 * (1.0 - root)]
        .into_iter()
        .filter(|&l| l > 0.0)
        .map(|l| -l * l.log2())
        .sum::<f64>()
        .clamp(0.0, 1.0);
    Ok(Entanglement { entropy, concurrence })
}
