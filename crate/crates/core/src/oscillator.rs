//! Classical side of the amplitude/oscillator correspondence.
//!
//! Amplitudes map to phase space through `c_n = (q_n + i p_n)/√2`. For a real
//! static Hamiltonian the amplitude equations become Hamilton's equations
//! `q̇ = H p`, `ṗ = -H q`. Complex and time-dependent Hamiltonians give Newton
//! equations with velocity couplings; these are integrated in first-order form
//! with state `(q, q̇)` and the momenta are recovered only at sample times.
//!
//! Approximate ("RCA") forms drop the momentum couplings and keep only
//! position couplings between the oscillators. The doubled scheme treats the
//! momenta as positions of `N` extra oscillators.
//!
//! Drive terms: with `z = (q + ip)/√2` the amplitude drive `-i f(t)` enters the
//! Newton equations as `-√2·H_R f(t)`. The RCA drive uses the per-oscillator
//! shorthand `-√2·μ_n(ω_n + V)·cos(ω t)`, which agrees with the matrix form
//! only when `μ1 = μ2` (see [`driven_forcing_mismatch`]).

use std::cell::RefCell;
use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{integrate, IntegrateError, IntegratorConfig, OdeSystem, Trajectory};
use crate::model::{HamiltonianSpec, TwoLevelParams};
use crate::quantum_ref::AmplitudeState;

/// Condition number above which `H_R` is treated as singular.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Relative size of `ω1ω2 - V²` below which two-level denominators abort.
pub const DENOMINATOR_GUARD: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpaceState {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
}

impl PhaseSpaceState {
    pub fn new(q: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        if q.len() != p.len() {
            return Err(Error::Validation(format!(
                "q has {} components but p has {}",
                q.len(),
                p.len()
            )));
        }
        if q.iter().chain(&p).any(|x| !x.is_finite()) {
            return Err(Error::Validation("phase-space state has non-finite entries".into()));
        }
        Ok(PhaseSpaceState { q, p })
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    pub fn to_amplitudes(&self) -> AmplitudeState {
        amplitudes_from_qp(self)
    }

    /// Per-oscillator `q_n² + p_n²`.
    pub fn intensities(&self) -> Vec<f64> {
        self.q.iter().zip(&self.p).map(|(q, p)| q * q + p * p).collect()
    }

    /// `|z_n|² = (q_n² + p_n²)/2`, the classical counterpart of the populations.
    pub fn populations(&self) -> Vec<f64> {
        self.intensities().into_iter().map(|x| 0.5 * x).collect()
    }
}

/// `q = √2·Re c`, `p = √2·Im c`.
pub fn qp_from_amplitudes(c: &AmplitudeState) -> PhaseSpaceState {
    PhaseSpaceState {
        q: c.0.iter().map(|z| SQRT_2 * z.re).collect(),
        p: c.0.iter().map(|z| SQRT_2 * z.im).collect(),
    }
}

/// `z = (q + i p)/√2`.
pub fn amplitudes_from_qp(s: &PhaseSpaceState) -> AmplitudeState {
    AmplitudeState(
        s.q.iter()
            .zip(&s.p)
            .map(|(&q, &p)| Complex64::new(q / SQRT_2, p / SQRT_2))
            .collect(),
    )
}

/// `½ Σ H_nm (q_n q_m + p_n p_m)` for a real symmetric `H`.
pub fn classical_hamiltonian(h: &DMatrix<f64>, s: &PhaseSpaceState) -> f64 {
    let q = DVector::from_column_slice(&s.q);
    let p = DVector::from_column_slice(&s.p);
    0.5 * (q.dot(&(h * &q)) + p.dot(&(h * &p)))
}

/// Momenta from positions and velocities: `p = H_R⁻¹ (q̇ - H_I q)`.
///
/// Solves the linear system by LU; refuses matrices with condition number
/// above [`CONDITION_LIMIT`].
pub fn recover_momenta(h_r: &DMatrix<f64>, h_i: &DMatrix<f64>, q: &[f64], qdot: &[f64]) -> Result<Vec<f64>> {
    let n = h_r.nrows();
    if h_r.ncols() != n || h_i.shape() != (n, n) || q.len() != n || qdot.len() != n {
        return Err(Error::Validation("recover_momenta: dimension mismatch".into()));
    }
    check_condition(h_r, None)?;
    let rhs = DVector::from_column_slice(qdot) - h_i * DVector::from_column_slice(q);
    h_r.clone()
        .lu()
        .solve(&rhs)
        .map(|p| p.as_slice().to_vec())
        .ok_or_else(|| Error::Singular {
            t: None,
            detail: "H_R is not invertible".into(),
        })
}

/// 2-norm condition number of a square matrix.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

fn check_condition(h_r: &DMatrix<f64>, t: Option<f64>) -> Result<()> {
    let cond = condition_number(h_r);
    if !(cond <= CONDITION_LIMIT) {
        return Err(Error::Singular {
            t,
            detail: format!("condition number of H_R is {cond:e} (limit {CONDITION_LIMIT:e})"),
        });
    }
    Ok(())
}

/// Explicit two-level momenta, equivalent to [`recover_momenta`] for
/// `H_R = [[ω1, V], [V, ω2]]`, `H_I = diag(λ1, λ2)`.
pub fn two_level_momenta(p: &TwoLevelParams, q: [f64; 2], qdot: [f64; 2]) -> [f64; 2] {
    let d = p.e1 * p.e2 - p.v * p.v;
    [
        (p.e2 * qdot[0] - p.v * qdot[1] - p.lambda1 * p.e2 * q[0] + p.v * p.lambda2 * q[1]) / d,
        (p.e1 * qdot[1] - p.v * qdot[0] - p.lambda2 * p.e1 * q[1] + p.v * p.lambda1 * q[0]) / d,
    ]
}

fn denominator_guard(p: &TwoLevelParams, t: f64) -> Result<()> {
    denominator_guard_signed(p, t, 0.0)
}

/// Also fails when `ω1ω2 - V²` has left the sign `sign` it started with.
fn denominator_guard_signed(p: &TwoLevelParams, t: f64, sign: f64) -> Result<()> {
    let prod = p.e1 * p.e2;
    let v2 = p.v * p.v;
    let d = prod - v2;
    if d.abs() < DENOMINATOR_GUARD * prod.abs().max(v2) || d == 0.0 || d * sign < 0.0 {
        return Err(Error::Singular {
            t: Some(t),
            detail: format!("ω1ω2 - V² = {d:e}"),
        });
    }
    Ok(())
}

/// Shared plumbing: the Newton systems report guard failures through a cell
/// so the typed error survives the integrator.
struct Guarded<F, G> {
    rhs: F,
    guard: G,
    failure: RefCell<Option<Error>>,
}

impl<F, G> Guarded<F, G>
where
    F: Fn(f64, &[f64], &mut [f64]),
    G: Fn(f64, &[f64]) -> Result<()>,
{
    fn new(rhs: F, guard: G) -> Self {
        Guarded {
            rhs,
            guard,
            failure: RefCell::new(None),
        }
    }

    fn run(&self, y0: &[f64], t0: f64, t1: f64, cfg: &IntegratorConfig, context: &str) -> Result<Trajectory> {
        integrate(self, y0, t0, t1, cfg).map_err(|e| match e {
            IntegrateError::Rejected { .. } => self
                .failure
                .borrow_mut()
                .take()
                .unwrap_or_else(|| Error::integration(context, e)),
            other => Error::integration(context, other),
        })
    }
}

impl<F, G> OdeSystem for Guarded<F, G>
where
    F: Fn(f64, &[f64], &mut [f64]),
    G: Fn(f64, &[f64]) -> Result<()>,
{
    fn rhs(&self, t: f64, y: &[f64], dydt: &mut [f64]) {
        (self.rhs)(t, y, dydt)
    }

    fn check(&self, t: f64, y: &[f64]) -> std::result::Result<(), String> {
        (self.guard)(t, y).map_err(|e| {
            let msg = e.to_string();
            *self.failure.borrow_mut() = Some(e);
            msg
        })
    }
}

/// Evaluates `guard` on a grid ten times finer than the output grid before
/// integrating, so parameter-only failures are reported at the first bad
/// time rather than as a step-size collapse.
fn prescan(t0: f64, t1: f64, cfg: &IntegratorConfig, guard: impl Fn(f64) -> Result<()>) -> Result<()> {
    if !(t1 > t0) {
        return Ok(());
    }
    let n = cfg.sample_count.max(2).saturating_mul(10);
    crate::integrate::sample_grid(t0, t1, n).into_iter().try_for_each(guard)
}

fn no_guard(_t: f64, _y: &[f64]) -> Result<()> {
    Ok(())
}

fn check_dim(spec: &HamiltonianSpec, s0: &PhaseSpaceState) -> Result<()> {
    if s0.q.len() != spec.dim() || s0.p.len() != spec.dim() {
        return Err(Error::Validation(format!(
            "phase-space state has dimension {} but the Hamiltonian is {}x{}",
            s0.dim(),
            spec.dim(),
            spec.dim()
        )));
    }
    Ok(())
}

fn split_pair(y: &[f64], n: usize) -> (DVector<f64>, DVector<f64>) {
    (
        DVector::from_column_slice(&y[..n]),
        DVector::from_column_slice(&y[n..2 * n]),
    )
}

/// Exact p-and-q-coupled Hamilton equations for a real static Hamiltonian.
pub fn evolve_exact_real(
    spec: &HamiltonianSpec,
    s0: &PhaseSpaceState,
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory<PhaseSpaceState>> {
    spec.validate()?;
    check_dim(spec, s0)?;
    let (h, h_i) = spec.eval_h(t0);
    if spec.is_time_dependent() || spec.is_driven() || h_i.amax() != 0.0 {
        return Err(Error::Spec(format!(
            "exact real evolution needs a real time-independent Hamiltonian, got {}",
            spec.kind()
        )));
    }
    let n = spec.dim();
    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
        let (q, p) = split_pair(y, n);
        let qdot = &h * p;
        let pdot = -(&h * q);
        dy[..n].copy_from_slice(qdot.as_slice());
        dy[n..].copy_from_slice(pdot.as_slice());
    };
    let y0: Vec<f64> = s0.q.iter().chain(&s0.p).copied().collect();
    let traj = integrate(&rhs, &y0, t0, t1, cfg)
        .map_err(|e| Error::integration(format!("exact real evolution of {}", spec.kind()), e))?;
    Ok(traj
        .map(|y| PhaseSpaceState {
            q: y[..n].to_vec(),
            p: y[n..].to_vec(),
        })
        .with_scheme(spec.kind().name(), "exact"))
}

/// Converts `(q, q̇)` samples of a Newton integration into phase-space samples.
fn momenta_along(
    traj: Trajectory,
    n: usize,
    mut momenta: impl FnMut(f64, &[f64], &[f64]) -> Result<Vec<f64>>,
) -> Result<Trajectory<PhaseSpaceState>> {
    traj.try_map(|t, y| {
        let p = momenta(t, &y[..n], &y[n..])?;
        Ok(PhaseSpaceState { q: y[..n].to_vec(), p })
    })
}

/// Exact Newton equations for a time-dependent (sweep) two-level Hamiltonian:
/// `q̈ = -H² q + Ḣ H⁻¹ q̇`.
///
/// The velocity terms carry the ratio `1/(ω1ω2 - V²)`, which is guarded at every
/// accepted step.
pub fn evolve_exact_td(
    spec: &HamiltonianSpec,
    s0: &PhaseSpaceState,
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory<PhaseSpaceState>> {
    spec.validate()?;
    check_dim(spec, s0)?;
    if !spec.is_time_dependent() {
        return Err(Error::Spec(format!(
            "time-dependent exact evolution needs a sweep Hamiltonian, got {}",
            spec.kind()
        )));
    }
    let params = |t: f64| spec.two_level(t).expect("sweep kinds are two-level");
    let p0 = params(t0);
    denominator_guard(&p0, t0)?;

    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        let TwoLevelParams {
            e1, e2, v, de1, de2, ..
        } = params(t);
        let (q1, q2, u1, u2) = (y[0], y[1], y[2], y[3]);
        let d = e1 * e2 - v * v;
        dy[0] = u1;
        dy[1] = u2;
        dy[2] = -(e1 * e1 + v * v) * q1 - v * (e1 + e2) * q2 + de1 * (e2 * u1 - v * u2) / d;
        dy[3] = -(e2 * e2 + v * v) * q2 - v * (e1 + e2) * q1 + de2 * (e1 * u2 - v * u1) / d;
    };
    let sign = (p0.e1 * p0.e2 - p0.v * p0.v).signum();
    prescan(t0, t1, cfg, |t| denominator_guard_signed(&params(t), t, sign))?;
    let guard = |t: f64, _y: &[f64]| denominator_guard_signed(&params(t), t, sign);

    let qdot0 = [p0.e1 * s0.p[0] + p0.v * s0.p[1], p0.v * s0.p[0] + p0.e2 * s0.p[1]];
    let y0 = [s0.q[0], s0.q[1], qdot0[0], qdot0[1]];
    let traj = Guarded::new(rhs, guard).run(&y0, t0, t1, cfg, &format!("exact evolution of {}", spec.kind()))?;

    momenta_along(traj, 2, |t, q, qdot| {
        let (h_r, h_i) = spec.eval_h(t);
        recover_momenta(&h_r, &h_i, q, qdot).map_err(|e| at(e, t))
    })
    .map(|tr| tr.with_scheme(spec.kind().name(), "exact"))
}

fn at(e: Error, t: f64) -> Error {
    match e {
        Error::Singular { t: None, detail } => Error::Singular { t: Some(t), detail },
        other => other,
    }
}

/// Per-row coefficients of `q̈_n + a q̇_n + b q_n + c q_m + d q̇_m = forcing`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

/// Coefficients of the exact two-level Newton equations for
/// `H = [[ω1 + iλ1, V], [V, ω2 + iλ2]]`, rows for `q1` and `q2`.
pub fn two_level_coefficients(p: &TwoLevelParams) -> [NewtonCoefficients; 2] {
    let TwoLevelParams {
        e1: w1,
        e2: w2,
        v,
        lambda1: l1,
        lambda2: l2,
        ..
    } = *p;
    let den = w1 * w2 - v * v;
    let row = |wn: f64, ln: f64, lm: f64| {
        let mix = (w1 * w2 * ln - v * v * lm) / den;
        NewtonCoefficients {
            a: -(ln + mix),
            b: wn * wn + v * v + ln * mix,
            c: v * (w1 + w2) - (v * wn * ln * lm - v * wn * lm * lm) / den,
            d: wn * v * (ln - lm) / den,
        }
    };
    [row(w1, l1, l2), row(w2, l2, l1)]
}

fn drive_force(spec: &HamiltonianSpec, h_r: &DMatrix<f64>, t: f64) -> Option<DVector<f64>> {
    spec.is_driven().then(|| -SQRT_2 * (h_r * spec.eval_drive(t)))
}

/// Exact Newton equations for a static complex Hamiltonian (general matrix form):
/// `q̈ = -H_R² q + H_I q̇ + M q̇ - M H_I q - √2 H_R f(t)` with `M = H_R H_I H_R⁻¹`.
pub fn evolve_exact_nonhermitian(
    spec: &HamiltonianSpec,
    s0: &PhaseSpaceState,
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory<PhaseSpaceState>> {
    spec.validate()?;
    check_dim(spec, s0)?;
    if spec.is_time_dependent() {
        return Err(Error::Spec(format!(
            "non-Hermitian evolution needs a time-independent Hamiltonian, got {}",
            spec.kind()
        )));
    }
    let n = spec.dim();
    let (h_r, h_i) = spec.eval_h(t0);
    check_condition(&h_r, Some(t0))?;
    if let Some(p) = spec.two_level(t0) {
        denominator_guard(&p, t0)?;
    }
    let lu = h_r.clone().lu();
    // M = H_R H_I H_R⁻¹, formed as (H_R⁻ᵀ (H_R H_I)ᵀ)ᵀ.
    let m = lu_solve_transposed(&h_r, &(&h_r * &h_i))?;
    let h_r2 = &h_r * &h_r;
    let damping = &h_i + &m;
    let stiffness = &h_r2 + &m * &h_i;

    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        let (q, u) = split_pair(y, n);
        let mut acc = -(&stiffness * &q) + &damping * &u;
        if let Some(f) = drive_force(spec, &h_r, t) {
            acc += f;
        }
        dy[..n].copy_from_slice(u.as_slice());
        dy[n..].copy_from_slice(acc.as_slice());
    };

    let q0 = DVector::from_column_slice(&s0.q);
    let qdot0 = &h_r * DVector::from_column_slice(&s0.p) + &h_i * &q0;
    let y0: Vec<f64> = s0.q.iter().chain(qdot0.iter()).copied().collect();
    let traj = Guarded::new(rhs, no_guard).run(&y0, t0, t1, cfg, &format!("exact evolution of {}", spec.kind()))?;

    traj.try_map(|_t, y| {
        let rhs = DVector::from_column_slice(&y[n..]) - &h_i * DVector::from_column_slice(&y[..n]);
        let p = lu.solve(&rhs).ok_or_else(|| Error::Singular {
            t: Some(t0),
            detail: "H_R is not invertible".into(),
        })?;
        Ok(PhaseSpaceState {
            q: y[..n].to_vec(),
            p: p.as_slice().to_vec(),
        })
    })
    .map(|tr| tr.with_scheme(spec.kind().name(), "exact"))
}

/// `X` with `X H = B`, i.e. `B H⁻¹`.
fn lu_solve_transposed(h: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    h.transpose()
        .lu()
        .solve(&b.transpose())
        .map(|x| x.transpose())
        .ok_or_else(|| Error::Singular {
            t: None,
            detail: "H_R is not invertible".into(),
        })
}

/// Same system as [`evolve_exact_nonhermitian`] for two-level kinds, written
/// with the explicit `(a, b, c, d)` row coefficients and the explicit
/// two-level momentum formula.
pub fn evolve_exact_nonhermitian_coefficients(
    spec: &HamiltonianSpec,
    s0: &PhaseSpaceState,
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory<PhaseSpaceState>> {
    spec.validate()?;
    check_dim(spec, s0)?;
    let params = match spec.two_level(t0) {
        Some(p) if !spec.is_time_dependent() => p,
        _ => {
            return Err(Error::Spec(format!(
                "coefficient form needs a static two-level Hamiltonian, got {}",
                spec.kind()
            )))
        }
    };
    denominator_guard(&params, t0)?;
    let [r1, r2] = two_level_coefficients(&params);
    let (h_r, _) = spec.eval_h(t0);

    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        let (q1, q2, u1, u2) = (y[0], y[1], y[2], y[3]);
        let (f1, f2) = match drive_force(spec, &h_r, t) {
            Some(f) => (f[0], f[1]),
            None => (0.0, 0.0),
        };
        dy[0] = u1;
        dy[1] = u2;
        dy[2] = f1 - r1.a * u1 - r1.b * q1 - r1.c * q2 - r1.d * u2;
        dy[3] = f2 - r2.a * u2 - r2.b * q2 - r2.c * q1 - r2.d * u1;
    };
    let qdot0 = [
        params.e1 * s0.p[0] + params.v * s0.p[1] + params.lambda1 * s0.q[0],
        params.v * s0.p[0] + params.e2 * s0.p[1] + params.lambda2 * s0.q[1],
    ];
    let y0 = [s0.q[0], s0.q[1], qdot0[0], qdot0[1]];
    let traj = Guarded::new(rhs, no_guard).run(&y0, t0, t1, cfg, &format!("exact evolution of {}", spec.kind()))?;
    Ok(traj
        .map(|y| PhaseSpaceState {
            q: vec![y[0], y[1]],
            p: two_level_momenta(&params, [y[0], y[1]], [y[2], y[3]]).to_vec(),
        })
        .with_scheme(spec.kind().name(), "exact"))
}

fn frequency_guard(p: &TwoLevelParams, t: f64) -> Result<()> {
    for (index, omega) in [(0, p.e1), (1, p.e2)] {
        if !(omega > 0.0) {
            return Err(Error::NegativeFrequency { t, index, omega });
        }
    }
    Ok(())
}

/// Weak-coupling approximation with position couplings only.
///
/// - static pair: `q̈_n + ω_n² q_n + 2Vω_n q_m = 0`, `p_n = q̇_n/ω_n`
/// - sweeps: `q̈_n + ω_n² q_n - (ω̇_n/ω_n) q̇_n + 2Vω_n q_m = 0`, `p_n = q̇_n/ω_n`
///   (diagonal velocity terms are integrated as they stand)
/// - dissipative pair: `q̈_n - 2λ_n q̇_n + (ω_n² + λ_n²) q_n + V(ω1 + ω2) q_m = -√2 μ_n (ω_n + V) cos(ω t)`,
///   `p_n = (q̇_n - λ_n q_n)/ω_n`
///
/// Initial velocities invert the same momentum relation, so the starting
/// amplitudes are reproduced exactly.
pub fn evolve_rca(
    spec: &HamiltonianSpec,
    s0: &PhaseSpaceState,
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory<PhaseSpaceState>> {
    spec.validate()?;
    check_dim(spec, s0)?;
    if !spec.is_two_level() {
        return Err(Error::Spec(format!(
            "the weak-coupling approximation is defined for two-level kinds, got {}",
            spec.kind()
        )));
    }
    let params = |t: f64| spec.two_level(t).expect("two-level kind");
    let p0 = params(t0);
    frequency_guard(&p0, t0)?;

    enum Form {
        Static,
        Sweep,
        Damped { drive: Option<(f64, f64, f64)> },
    }
    let form = match spec {
        HamiltonianSpec::TwoLevel { .. } => Form::Static,
        HamiltonianSpec::LzLinear { .. } | HamiltonianSpec::LzArctan { .. } => Form::Sweep,
        _ => Form::Damped {
            drive: spec.drive_params(),
        },
    };

    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        let p = params(t);
        let (q, u) = ([y[0], y[1]], [y[2], y[3]]);
        let w = [p.e1, p.e2];
        let dw = [p.de1, p.de2];
        let lam = [p.lambda1, p.lambda2];
        dy[0] = u[0];
        dy[1] = u[1];
        for n in 0..2 {
            let m = 1 - n;
            dy[2 + n] = match form {
                Form::Static => -w[n] * w[n] * q[n] - 2.0 * p.v * w[n] * q[m],
                Form::Sweep => -w[n] * w[n] * q[n] + dw[n] / w[n] * u[n] - 2.0 * p.v * w[n] * q[m],
                Form::Damped { drive } => {
                    let mut acc =
                        2.0 * lam[n] * u[n] - (w[n] * w[n] + lam[n] * lam[n]) * q[n] - p.v * (w[0] + w[1]) * q[m];
                    if let Some((mu1, mu2, wd)) = drive {
                        let mu = [mu1, mu2][n];
                        acc -= SQRT_2 * mu * (w[n] + p.v) * (wd * t).cos();
                    }
                    acc
                }
            };
        }
    };
    prescan(t0, t1, cfg, |t| frequency_guard(&params(t), t))?;
    let guard = |t: f64, _y: &[f64]| frequency_guard(&params(t), t);

    let y0 = [
        s0.q[0],
        s0.q[1],
        p0.e1 * s0.p[0] + p0.lambda1 * s0.q[0],
        p0.e2 * s0.p[1] + p0.lambda2 * s0.q[1],
    ];
    let traj = Guarded::new(rhs, guard).run(&y0, t0, t1, cfg, &format!("RCA evolution of {}", spec.kind()))?;
    traj.try_map(|t, y| {
        let p = params(t);
        frequency_guard(&p, t)?;
        Ok(PhaseSpaceState {
            q: vec![y[0], y[1]],
            p: vec![(y[2] - p.lambda1 * y[0]) / p.e1, (y[3] - p.lambda2 * y[1]) / p.e2],
        })
    })
    .map(|tr| tr.with_scheme(spec.kind().name(), "rca"))
}

/// Amplitude of `(H_R μ)_n - μ_n(ω_n + V)` per oscillator: how far the RCA
/// drive shorthand is from the exact `H_R f` forcing. Zero when `μ1 = μ2`.
pub fn driven_forcing_mismatch(spec: &HamiltonianSpec) -> Option<[f64; 2]> {
    let (mu1, mu2, _) = spec.drive_params()?;
    let p = spec.two_level(0.0)?;
    let exact = [p.e1 * mu1 + p.v * mu2, p.v * mu1 + p.e2 * mu2];
    let short = [mu1 * (p.e1 + p.v), mu2 * (p.e2 + p.v)];
    Some([(exact[0] - short[0]).abs(), (exact[1] - short[1]).abs()])
}

/// State of the doubled scheme: `q` and `p` are both oscillator positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoubledState {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub q_dot: Vec<f64>,
    pub p_dot: Vec<f64>,
}

impl DoubledState {
    pub fn to_amplitudes(&self) -> AmplitudeState {
        amplitudes_from_qp(&self.phase_space())
    }

    pub fn phase_space(&self) -> PhaseSpaceState {
        PhaseSpaceState {
            q: self.q.clone(),
            p: self.p.clone(),
        }
    }
}

/// `2N` oscillators without velocity couplings:
/// `q̈ = -(H_R² - H_I²) q + (H_R H_I + H_I H_R) p`,
/// `p̈ = -(H_R² - H_I²) p - (H_R H_I + H_I H_R) q`, plus drive terms.
pub fn evolve_doubled(
    spec: &HamiltonianSpec,
    c0: &AmplitudeState,
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory<DoubledState>> {
    spec.validate()?;
    if spec.is_time_dependent() {
        return Err(Error::Spec(format!(
            "the doubled scheme needs a time-independent Hamiltonian, got {}",
            spec.kind()
        )));
    }
    let n = spec.dim();
    if c0.dim() != n {
        return Err(Error::Validation(format!(
            "initial state has {} amplitudes but the Hamiltonian is {n}x{n}",
            c0.dim()
        )));
    }
    let (h_r, h_i) = spec.eval_h(t0);
    let diag = &h_r * &h_r - &h_i * &h_i;
    let cross = &h_r * &h_i + &h_i * &h_r;
    let drive = spec.drive_params();

    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        let (q, p) = split_pair(&y[..2 * n], n);
        let mut qdd = -(&diag * &q) + &cross * &p;
        let mut pdd = -(&diag * &p) - &cross * &q;
        if let Some((mu1, mu2, wd)) = drive {
            let f = spec.eval_drive(t);
            let (s, _) = (wd * t).sin_cos();
            let fdot = DVector::from_vec(vec![-wd * s * mu1, -wd * s * mu2]);
            qdd -= SQRT_2 * (&h_r * &f);
            pdd -= SQRT_2 * (&h_i * &f + fdot);
        }
        dy[..2 * n].copy_from_slice(&y[2 * n..]);
        dy[2 * n..3 * n].copy_from_slice(qdd.as_slice());
        dy[3 * n..].copy_from_slice(pdd.as_slice());
    };

    let s0 = qp_from_amplitudes(c0);
    let q0 = DVector::from_column_slice(&s0.q);
    let p0 = DVector::from_column_slice(&s0.p);
    let qdot0 = &h_r * &p0 + &h_i * &q0;
    let mut pdot0 = -(&h_r * &q0) + &h_i * &p0;
    if spec.is_driven() {
        pdot0 -= SQRT_2 * spec.eval_drive(t0);
    }
    let y0: Vec<f64> =
        s0.q.iter()
            .chain(&s0.p)
            .chain(qdot0.iter())
            .chain(pdot0.iter())
            .copied()
            .collect();
    let traj = integrate(&rhs, &y0, t0, t1, cfg)
        .map_err(|e| Error::integration(format!("doubled evolution of {}", spec.kind()), e))?;
    Ok(traj
        .map(|y| DoubledState {
            q: y[..n].to_vec(),
            p: y[n..2 * n].to_vec(),
            q_dot: y[2 * n..3 * n].to_vec(),
            p_dot: y[3 * n..].to_vec(),
        })
        .with_scheme(spec.kind().name(), "doubled"))
}

/// Squared normal-mode frequencies `(Ω+², Ω-²)` of the exact static two-level
/// Newton equations, i.e. the eigenvalues of `H²`.
pub fn exact_eigenfrequencies(e1: f64, e2: f64, v: f64) -> (f64, f64) {
    let sum = e1 * e1 + e2 * e2 + 2.0 * v * v;
    let root = ((e1 * e1 - e2 * e2).powi(2) + 4.0 * v * v * (e1 + e2).powi(2)).sqrt();
    let plus = 0.5 * (sum + root);
    let det = (e1 * e2 - v * v).powi(2);
    let minus = if plus > 0.0 { det / plus } else { 0.5 * (sum - root) };
    (plus, minus)
}

/// Squared normal-mode frequencies of the position-coupled approximation,
/// eigenvalues of `[[E1², 2V E1], [2V E2, E2²]]`.
pub fn rca_eigenfrequencies(e1: f64, e2: f64, v: f64) -> (f64, f64) {
    let sum = e1 * e1 + e2 * e2;
    let root = ((e1 * e1 - e2 * e2).powi(2) + 16.0 * v * v * e1 * e2).sqrt();
    (0.5 * (sum + root), 0.5 * (sum - root))
}

/// Two masses `m1`, `m2` on springs of natural frequency `omega1`, `omega2`,
/// joined by a spring of constant `kappa`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalOscillatorParams {
    pub m1: f64,
    pub m2: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub kappa: f64,
}

impl PhysicalOscillatorParams {
    pub fn new(m1: f64, m2: f64, omega1: f64, omega2: f64, kappa: f64) -> Result<Self> {
        for (name, x) in [("m1", m1), ("m2", m2), ("omega1", omega1), ("omega2", omega2)] {
            if !(x > 0.0 && x.is_finite()) {
                return Err(Error::Validation(format!("{name} must be positive, got {x}")));
            }
        }
        if !kappa.is_finite() {
            return Err(Error::Validation("kappa must be finite".into()));
        }
        Ok(PhysicalOscillatorParams {
            m1,
            m2,
            omega1,
            omega2,
            kappa,
        })
    }
}

/// Dimensionless coupled-oscillator parameters.
///
/// With per-oscillator length scales the equations read
/// `ẍ_n + ω_n² x_n = K ω_n x_m`; with the symmetric mass-weighted scaling they
/// read `Ẍ_n + ω_n² X_n = K ω X_m` using `mean_omega = (ω1ω2)^{1/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionlessCoupling {
    pub omega1: f64,
    pub omega2: f64,
    /// `K = κ / (m1 m2 ω1 ω2)^{1/2}`, an inverse time.
    pub k: f64,
    pub mean_omega: f64,
    /// `(m1 m2)^{1/2}`.
    pub reduced_mass: f64,
}

pub fn physical_to_dimensionless(params: &PhysicalOscillatorParams) -> DimensionlessCoupling {
    let PhysicalOscillatorParams {
        m1,
        m2,
        omega1,
        omega2,
        kappa,
    } = *params;
    DimensionlessCoupling {
        omega1,
        omega2,
        k: kappa / (m1 * m2 * omega1 * omega2).sqrt(),
        mean_omega: (omega1 * omega2).sqrt(),
        reduced_mass: (m1 * m2).sqrt(),
    }
}

/// `1/√2`, exposed for callers building amplitudes by hand.
pub const AMPLITUDE_SCALE: f64 = FRAC_1_SQRT_2;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum_ref::{eigenvalues_two_level, evolve_tdse};
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn fig2() -> HamiltonianSpec {
        HamiltonianSpec::DissipativeTwoLevel {
            e1: 40.0,
            e2: 40.0,
            v: 1.0,
            lambda1: 0.0,
            lambda2: -0.2,
        }
    }

    #[test]
    fn amplitude_conversion_examples() {
        let s = qp_from_amplitudes(&AmplitudeState::basis(2, 0));
        assert_eq!(s.q, vec![SQRT_2, 0.0]);
        assert_eq!(s.p, vec![0.0, 0.0]);
        let s = qp_from_amplitudes(&AmplitudeState::new(vec![c(0.0, 0.0), c(0.0, -1.0)]));
        assert_eq!(s.q, vec![0.0, 0.0]);
        assert_eq!(s.p, vec![0.0, -SQRT_2]);
        for c0 in [
            AmplitudeState::basis(2, 0),
            AmplitudeState::new(vec![c(0.0, 0.0), c(0.0, -1.0)]),
        ] {
            assert_eq!(amplitudes_from_qp(&qp_from_amplitudes(&c0)), c0);
        }
        let back = amplitudes_from_qp(&PhaseSpaceState {
            q: vec![SQRT_2, 0.0],
            p: vec![0.0, 0.0],
        });
        assert_eq!(back, AmplitudeState::basis(2, 0));
    }

    #[test]
    fn phase_space_state_validation() {
        assert!(PhaseSpaceState::new(vec![1.0], vec![1.0, 2.0]).is_err());
        assert!(PhaseSpaceState::new(vec![f64::NAN], vec![1.0]).is_err());
        assert!(PhaseSpaceState::new(vec![1.0], vec![1.0]).is_ok());
    }

    #[test]
    fn normal_mode_oscillates_at_shifted_frequency() {
        // ε = 0: symmetric displacement is a normal mode of frequency ω + V.
        let (w, v) = (5.0, 0.5);
        let spec = HamiltonianSpec::TwoLevel { e1: w, e2: w, v };
        let a = 0.8;
        let s0 = PhaseSpaceState {
            q: vec![a * FRAC_1_SQRT_2, a * FRAC_1_SQRT_2],
            p: vec![0.0, 0.0],
        };
        let traj = evolve_exact_real(&spec, &s0, 0.0, 10.0, &IntegratorConfig::default()).unwrap();
        for (t, s) in traj.iter() {
            let expect = a * FRAC_1_SQRT_2 * ((w + v) * t).cos();
            assert_abs_diff_eq!(s.q[0], expect, epsilon = 1e-8);
            assert_abs_diff_eq!(s.q[1], expect, epsilon = 1e-8);
        }
    }

    #[test]
    fn decoupled_oscillators_are_independent() {
        let spec = HamiltonianSpec::TwoLevel {
            e1: 2.0,
            e2: 3.0,
            v: 0.0,
        };
        let s0 = PhaseSpaceState {
            q: vec![1.0, 0.5],
            p: vec![0.0, 0.0],
        };
        let traj = evolve_exact_real(&spec, &s0, 0.0, 5.0, &IntegratorConfig::default()).unwrap();
        for (t, s) in traj.iter() {
            assert_abs_diff_eq!(s.q[0], (2.0 * t).cos(), epsilon = 1e-8);
            assert_abs_diff_eq!(s.q[1], 0.5 * (3.0 * t).cos(), epsilon = 1e-8);
            assert_abs_diff_eq!(s.p[1], -0.5 * (3.0 * t).sin(), epsilon = 1e-8);
        }
    }

    #[test]
    fn exact_real_rejects_complex_and_sweeps() {
        let s0 = qp_from_amplitudes(&AmplitudeState::basis(2, 0));
        let cfg = IntegratorConfig::default();
        assert!(matches!(
            evolve_exact_real(&fig2(), &s0, 0.0, 1.0, &cfg),
            Err(Error::Spec(_))
        ));
        let lz = HamiltonianSpec::LzLinear {
            e0: 40.0,
            a: 1.0,
            v: 0.2,
        };
        assert!(matches!(
            evolve_exact_real(&lz, &s0, 0.0, 1.0, &cfg),
            Err(Error::Spec(_))
        ));
    }

    #[test]
    fn identity_momenta() {
        let p = recover_momenta(
            &DMatrix::identity(3, 3),
            &DMatrix::zeros(3, 3),
            &[1.0, 2.0, 3.0],
            &[0.3, -0.2, 0.1],
        )
        .unwrap();
        assert_eq!(p, vec![0.3, -0.2, 0.1]);
    }

    #[test]
    fn singular_momenta_rejected() {
        let h = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let err = recover_momenta(&h, &DMatrix::zeros(2, 2), &[0.0, 0.0], &[1.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::Singular { .. }));
    }

    #[test]
    fn explicit_two_level_momenta_match_linear_solve() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let p = TwoLevelParams {
                e1: rng.gen_range(1.0..50.0),
                e2: rng.gen_range(1.0..50.0),
                v: rng.gen_range(-0.9..0.9),
                lambda1: rng.gen_range(-1.0..0.0),
                lambda2: rng.gen_range(-1.0..0.0),
                de1: 0.0,
                de2: 0.0,
            };
            let q = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
            let qd = [rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0)];
            let spec = HamiltonianSpec::DissipativeTwoLevel {
                e1: p.e1,
                e2: p.e2,
                v: p.v,
                lambda1: p.lambda1,
                lambda2: p.lambda2,
            };
            let (h_r, h_i) = spec.eval_h(0.0);
            let generic = recover_momenta(&h_r, &h_i, &q, &qd).unwrap();
            let explicit = two_level_momenta(&p, q, qd);
            for k in 0..2 {
                assert!((generic[k] - explicit[k]).abs() <= 1e-12 * generic[k].abs().max(1.0));
            }
        }
    }

    #[test]
    fn coefficients_reduce_to_static_exact_form() {
        let p = TwoLevelParams {
            e1: 30.0,
            e2: 45.0,
            v: 0.7,
            lambda1: 0.0,
            lambda2: 0.0,
            de1: 0.0,
            de2: 0.0,
        };
        let [r1, r2] = two_level_coefficients(&p);
        assert_eq!(r1.a, 0.0);
        assert_eq!(r1.b, 30.0 * 30.0 + 0.49);
        assert_eq!(r1.c, 0.7 * 75.0);
        assert_eq!(r1.d, 0.0);
        assert_eq!(r2.b, 45.0 * 45.0 + 0.49);
        assert_eq!(r2.c, 0.7 * 75.0);
    }

    #[test]
    fn cross_velocity_coefficient_vanishes_for_equal_decay() {
        let p = TwoLevelParams {
            e1: 30.0,
            e2: 45.0,
            v: 0.7,
            lambda1: -0.3,
            lambda2: -0.3,
            de1: 0.0,
            de2: 0.0,
        };
        let [r1, r2] = two_level_coefficients(&p);
        assert_eq!(r1.d, 0.0);
        assert_eq!(r2.d, 0.0);
    }

    #[test]
    fn coefficient_form_matches_matrix_form() {
        let spec = HamiltonianSpec::DissipativeTwoLevel {
            e1: 35.0,
            e2: 42.0,
            v: 1.5,
            lambda1: -0.05,
            lambda2: -0.3,
        };
        let c0 = AmplitudeState::new(vec![c(0.6, 0.1), c(-0.2, 0.7)]).normalized();
        let s0 = qp_from_amplitudes(&c0);
        let cfg = IntegratorConfig::default().with_samples(201);
        let a = evolve_exact_nonhermitian(&spec, &s0, 0.0, 10.0, &cfg).unwrap();
        let b = evolve_exact_nonhermitian_coefficients(&spec, &s0, 0.0, 10.0, &cfg).unwrap();
        for ((_, x), (_, y)) in a.iter().zip(b.iter()) {
            assert!(x.to_amplitudes().max_abs_diff(&y.to_amplitudes()) < 1e-8);
        }
    }

    #[test]
    fn dissipative_exact_matches_quantum() {
        let spec = fig2();
        let c0 = AmplitudeState::basis(2, 0);
        let cfg = IntegratorConfig::default().with_samples(501);
        let cl = evolve_exact_nonhermitian(&spec, &qp_from_amplitudes(&c0), 0.0, 25.0, &cfg).unwrap();
        let qm = evolve_tdse(&spec, &c0, 0.0, 25.0, &cfg).unwrap();
        for ((_, s), (_, c)) in cl.iter().zip(qm.iter()) {
            assert!(s.to_amplitudes().max_abs_diff(c) < 1e-6);
        }
    }

    #[test]
    fn sweep_rejects_crossing_denominator() {
        // ω1ω2 - V² = (E0 + t)(E0 - t) - V² reaches zero at t = ±√(E0² - V²).
        let spec = HamiltonianSpec::LzLinear {
            e0: 2.0,
            a: 1.0,
            v: 0.5,
        };
        let s0 = qp_from_amplitudes(&AmplitudeState::basis(2, 0));
        let err = evolve_exact_td(&spec, &s0, -1.0, 5.0, &IntegratorConfig::default()).unwrap_err();
        match err {
            Error::Singular { t: Some(t), .. } => assert!(t < 15f64.sqrt() / 2.0 + 0.1 && t > 1.0, "t = {t}"),
            Error::Integration { .. } => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn sweep_denominator_positive_in_figure_window() {
        // min over the grid of (E0² - A²t²) - V² for E0 = 40, |t| <= 25, V <= 1.
        let worst = crate::integrate::sample_grid(-25.0, 25.0, 5001)
            .into_iter()
            .map(|t| (40.0f64 * 40.0 - t * t) - 1.0)
            .fold(f64::INFINITY, f64::min);
        assert_eq!(worst, 1600.0 - 625.0 - 1.0);
        let spec = HamiltonianSpec::LzLinear {
            e0: 40.0,
            a: 1.0,
            v: 1.0,
        };
        for t in crate::integrate::sample_grid(-25.0, 25.0, 5001) {
            let p = spec.two_level(t).unwrap();
            assert!(p.e1 * p.e2 - p.v * p.v > 0.0);
        }
    }

    #[test]
    fn uncoupled_sweep_keeps_amplitude() {
        // V = 0: each oscillator has a chirped frequency and its own velocity term.
        let spec = HamiltonianSpec::LzLinear {
            e0: 40.0,
            a: 1.0,
            v: 0.0,
        };
        let c0 = AmplitudeState::new(vec![c(0.8, 0.0), c(0.0, 0.6)]);
        let cfg = IntegratorConfig::default().with_samples(101);
        let traj = evolve_exact_td(&spec, &qp_from_amplitudes(&c0), -10.0, 10.0, &cfg).unwrap();
        for (t, s) in traj.iter() {
            let z = s.to_amplitudes();
            // phase of level 1: -∫(E0 + t) dt from -10
            let phase = -(40.0 * (t + 10.0) + 0.5 * (t * t - 100.0));
            let expect = Complex64::from_polar(0.8, phase);
            assert!((z[0] - expect).norm() < 1e-7, "t = {t}");
            assert_abs_diff_eq!(z[1].norm(), 0.6, epsilon = 1e-8);
        }
    }

    #[test]
    fn rca_negative_frequency_detected() {
        let spec = HamiltonianSpec::LzLinear {
            e0: 5.0,
            a: 1.0,
            v: 0.1,
        };
        let s0 = qp_from_amplitudes(&AmplitudeState::basis(2, 0));
        let err = evolve_rca(&spec, &s0, 0.0, 10.0, &IntegratorConfig::default()).unwrap_err();
        match err {
            Error::NegativeFrequency { t, index, .. } => {
                assert_eq!(index, 1);
                assert!((5.0 - 1e-9..5.1).contains(&t), "t = {t}");
            }
            Error::Integration { .. } => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rca_rejects_matrix_kinds() {
        let spec = HamiltonianSpec::static_real(DMatrix::identity(3, 3)).unwrap();
        let s0 = qp_from_amplitudes(&AmplitudeState::basis(3, 0));
        assert!(matches!(
            evolve_rca(&spec, &s0, 0.0, 1.0, &IntegratorConfig::default()),
            Err(Error::Spec(_))
        ));
    }

    #[test]
    fn rca_static_frequencies() {
        // E1 = E2 = E: RCA normal modes E² ± 2VE, close to (E ± V)².
        let (e, v) = (40.0, 0.4);
        let (p, m) = rca_eigenfrequencies(e, e, v);
        assert_abs_diff_eq!(p, e * e + 2.0 * v * e, epsilon = 1e-11);
        assert_abs_diff_eq!(m, e * e - 2.0 * v * e, epsilon = 1e-11);
        assert!((p.sqrt() - (e + v)).abs() < 0.01);
        assert!((m.sqrt() - (e - v)).abs() < 0.01);
    }

    #[test]
    fn exact_frequencies_are_squared_eigenvalues() {
        let (p, m) = exact_eigenfrequencies(40.0, 40.0, 1.0);
        assert_eq!((p, m), (41.0 * 41.0, 39.0 * 39.0));
        assert_eq!(exact_eigenfrequencies(3.0, 5.0, 0.0), (25.0, 9.0));
        let (ep, em) = eigenvalues_two_level(12.0, 17.0, 2.5);
        let (p, m) = exact_eigenfrequencies(12.0, 17.0, 2.5);
        assert!((p.sqrt() - ep).abs() < 1e-12 * ep);
        assert!((m.sqrt() - em).abs() < 1e-12 * em);
    }

    #[test]
    fn rca_uncoupled_frequencies() {
        assert_eq!(rca_eigenfrequencies(3.0, 5.0, 0.0), (25.0, 9.0));
        assert_eq!(rca_eigenfrequencies(5.0, 3.0, 0.0), (25.0, 9.0));
    }

    #[test]
    fn rca_small_coupling_limit() {
        let e = 40.0;
        let v = 0.01 * e;
        let (p, m) = rca_eigenfrequencies(e, e, v);
        assert!((p.sqrt() - (e + v)).abs() / e < 1e-4);
        assert!((m.sqrt() - (e - v)).abs() / e < 1e-4);
    }

    #[test]
    fn physical_conversion() {
        let eq = physical_to_dimensionless(&PhysicalOscillatorParams::new(2.0, 2.0, 3.0, 3.0, 1.2).unwrap());
        assert_abs_diff_eq!(eq.k, 1.2 / (2.0 * 3.0), epsilon = 1e-15);
        assert_eq!(eq.mean_omega, 3.0);
        let free = physical_to_dimensionless(&PhysicalOscillatorParams::new(1.0, 3.0, 2.0, 5.0, 0.0).unwrap());
        assert_eq!(free.k, 0.0);
        let d = physical_to_dimensionless(&PhysicalOscillatorParams::new(1.0, 4.0, 2.0, 8.0, 8.0).unwrap());
        assert_eq!(d.k, 1.0);
        assert_eq!((d.omega1, d.omega2), (2.0, 8.0));
        assert_eq!(d.mean_omega, 4.0);
        assert!(PhysicalOscillatorParams::new(0.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(PhysicalOscillatorParams::new(1.0, 1.0, -1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn doubled_duplicates_spectrum_without_decay() {
        let spec = HamiltonianSpec::DissipativeTwoLevel {
            e1: 10.0,
            e2: 12.0,
            v: 0.5,
            lambda1: 0.0,
            lambda2: 0.0,
        };
        let (h_r, h_i) = spec.eval_h(0.0);
        let diag = &h_r * &h_r - &h_i * &h_i;
        let cross = &h_r * &h_i + &h_i * &h_r;
        assert_eq!(cross, DMatrix::zeros(2, 2));
        assert_eq!(diag, &h_r * &h_r);
    }

    #[test]
    fn forcing_mismatch_vanishes_for_equal_strengths() {
        let mut spec = HamiltonianSpec::DrivenDissipative {
            e1: 40.0,
            e2: 40.0,
            v: 1.0,
            lambda1: 0.0,
            lambda2: -0.2,
            mu1: 0.2,
            mu2: 0.2,
            omega_drive: 40.0,
        };
        let [r1, r2] = driven_forcing_mismatch(&spec).unwrap();
        assert!(r1 < 1e-13 && r2 < 1e-13);
        if let HamiltonianSpec::DrivenDissipative { mu2, .. } = &mut spec {
            *mu2 = 0.0;
        }
        let [r1, r2] = driven_forcing_mismatch(&spec).unwrap();
        assert_abs_diff_eq!(r1, 0.2, epsilon = 1e-14);
        assert_abs_diff_eq!(r2, 0.2, epsilon = 1e-14);
        assert_eq!(driven_forcing_mismatch(&fig2()), None);
    }
}
