//! Schrödinger reference dynamics and closed-form anchors.
//!
//! The amplitude equations `ċ = -i (H_R + i H_I) c - i f(t)` are always
//! integrated numerically, including the cases that have a closed form, so
//! time-dependent and dissipative runs share one code path with the checks.

use std::f64::consts::PI;
use std::ops::Index;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{integrate, IntegratorConfig, Trajectory};
use crate::model::HamiltonianSpec;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Complex amplitudes `c_n`; identical to the classical `z_n = (q_n + i p_n)/√2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeState(pub Vec<Complex64>);

impl AmplitudeState {
    pub fn new(c: Vec<Complex64>) -> Self {
        AmplitudeState(c)
    }

    pub fn from_real(re: &[f64]) -> Self {
        AmplitudeState(re.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Unit amplitude on basis state `index`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut c = vec![Complex64::new(0.0, 0.0); dim];
        c[index] = Complex64::new(1.0, 0.0);
        AmplitudeState(c)
    }

    pub fn zeros(dim: usize) -> Self {
        AmplitudeState(vec![Complex64::new(0.0, 0.0); dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    /// `Σ |c_n|²`.
    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn populations(&self) -> Vec<f64> {
        populations(self)
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm_sqr().sqrt();
        AmplitudeState(self.0.iter().map(|c| c / n).collect())
    }

    /// Max-norm distance to another state of the same dimension.
    pub fn max_abs_diff(&self, other: &AmplitudeState) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub(crate) fn to_interleaved(&self) -> Vec<f64> {
        self.0.iter().flat_map(|c| [c.re, c.im]).collect()
    }

    pub(crate) fn from_interleaved(y: &[f64]) -> Self {
        AmplitudeState(y.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect())
    }
}

impl Index<usize> for AmplitudeState {
    type Output = Complex64;

    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

/// Occupation probabilities `|c_n|²`.
pub fn populations(c: &AmplitudeState) -> Vec<f64> {
    c.0.iter().map(|z| z.norm_sqr()).collect()
}

fn complex_h(spec: &HamiltonianSpec, t: f64) -> DMatrix<Complex64> {
    let (h_r, h_i) = spec.eval_h(t);
    h_r.zip_map(&h_i, Complex64::new)
}

/// Integrates the amplitude equations from `t0` to `t1`.
pub fn evolve_tdse(
    spec: &HamiltonianSpec,
    c0: &AmplitudeState,
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory<AmplitudeState>> {
    spec.validate()?;
    let n = spec.dim();
    if c0.dim() != n {
        return Err(Error::Validation(format!(
            "initial state has {} amplitudes but the Hamiltonian is {n}x{n}",
            c0.dim()
        )));
    }
    // Static Hamiltonians are converted once.
    let fixed = (!spec.is_time_dependent()).then(|| complex_h(spec, t0));
    let driven = spec.is_driven();

    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        let c = DVector::from_iterator(n, y.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])));
        let mut hc = match &fixed {
            Some(h) => h * &c,
            None => complex_h(spec, t) * &c,
        };
        if driven {
            hc += spec.eval_drive(t).map(|f| Complex64::new(f, 0.0));
        }
        for (k, z) in hc.iter().enumerate() {
            let dc = -I * z;
            dy[2 * k] = dc.re;
            dy[2 * k + 1] = dc.im;
        }
    };

    let traj = integrate(&rhs, &c0.to_interleaved(), t0, t1, cfg)
        .map_err(|e| Error::integration(format!("Schrödinger evolution of {}", spec.kind()), e))?;
    Ok(traj
        .map(|y| AmplitudeState::from_interleaved(&y))
        .with_scheme(spec.kind().name(), "quantum"))
}

/// Closed-form two-level solution from `c(0) = (1, 0)`:
/// `c1 = e^{-iεt} cos(Vt)`, `c2 = -i e^{-iεt} sin(Vt)`.
pub fn two_level_analytic(eps: f64, v: f64, t: f64) -> (Complex64, Complex64) {
    let phase = Complex64::from_polar(1.0, -eps * t);
    let (s, c) = (v * t).sin_cos();
    (phase * c, -I * phase * s)
}

/// Eigenvalues `(E+, E-)` of `[[E1, V], [V, E2]]`, with `E+ >= E-`.
pub fn eigenvalues_two_level(e1: f64, e2: f64, v: f64) -> (f64, f64) {
    let sum = e1 + e2;
    let root = ((e1 - e2).powi(2) + 4.0 * v * v).sqrt();
    let det = e1 * e2 - v * v;
    // The root that does not cancel is formed directly; the other comes from the determinant.
    if sum >= 0.0 {
        let plus = 0.5 * (sum + root);
        let minus = if plus != 0.0 { det / plus } else { 0.5 * (sum - root) };
        (plus, minus)
    } else {
        let minus = 0.5 * (sum - root);
        let plus = if minus != 0.0 { det / minus } else { 0.5 * (sum + root) };
        (plus, minus)
    }
}

/// Asymptotic probability of staying in the initially occupied diabatic state
/// after a linear sweep, `exp(-πV²/A)`.
pub fn zener_probability(v: f64, a: f64) -> Result<f64> {
    if !(a > 0.0) || !v.is_finite() {
        return Err(Error::Domain(format!(
            "Zener formula needs A > 0 and finite V, got A = {a}, V = {v}"
        )));
    }
    Ok((-PI * v * v / a).exp())
}
