//! Adaptive explicit Runge-Kutta integration for real first-order systems.
//!
//! The kernel is the Dormand-Prince 5(4) pair with local extrapolation and
//! FSAL. Output is produced on a uniform grid of `sample_count` points by
//! shortening the step that would cross the next grid point, so every sample
//! carries full step accuracy. Complex systems are handled by the callers,
//! which interleave real and imaginary parts.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub initial_step: f64,
    /// Number of points on the uniform output grid, endpoints included.
    pub sample_count: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rtol: 1e-10,
            atol: 1e-12,
            max_step: f64::INFINITY,
            initial_step: 1e-3,
            sample_count: 1001,
        }
    }
}

impl IntegratorConfig {
    pub fn with_tolerances(mut self, rtol: f64, atol: f64) -> Self {
        self.rtol = rtol;
        self.atol = atol;
        self
    }

    pub fn with_samples(mut self, sample_count: usize) -> Self {
        self.sample_count = sample_count;
        self
    }

    pub fn validate(&self) -> Result<(), IntegrateError> {
        let bad = |msg: &str| Err(IntegrateError::InvalidConfig(msg.to_string()));
        if !(self.rtol > 0.0 && self.rtol.is_finite()) {
            return bad("rtol must be positive");
        }
        if !(self.atol > 0.0 && self.atol.is_finite()) {
            return bad("atol must be positive");
        }
        if !(self.max_step > 0.0) {
            return bad("max_step must be positive");
        }
        if !(self.initial_step > 0.0 && self.initial_step.is_finite()) {
            return bad("initial_step must be positive");
        }
        if self.sample_count < 2 {
            return bad("sample_count must be at least 2");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegrateError {
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),
    /// Step size collapsed below `1e-14·|t1 - t0|`; the problem is stiff or singular here.
    #[error("step size underflow at t = {t} (h = {step:e}); system too stiff for an explicit method")]
    StepUnderflow { t: f64, step: f64 },
    #[error("state became non-finite at t = {t}")]
    Divergence { t: f64 },
    /// The system's per-step check refused an accepted state.
    #[error("rejected at t = {t}: {reason}")]
    Rejected { t: f64, reason: String },
}

/// A first-order system `ẏ = f(t, y)`.
pub trait OdeSystem {
    fn rhs(&self, t: f64, y: &[f64], dydt: &mut [f64]);

    /// Called with every accepted state; an error aborts the integration.
    fn check(&self, _t: f64, _y: &[f64]) -> Result<(), String> {
        Ok(())
    }
}

impl<F> OdeSystem for F
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    fn rhs(&self, t: f64, y: &[f64], dydt: &mut [f64]) {
        self(t, y, dydt)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub scenario: String,
    pub scheme: String,
    pub stats: StepStats,
}

/// Time-stamped samples of a state.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S = Vec<f64>> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
    pub meta: TrajectoryMeta,
}

impl<S> Trajectory<S> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(f64, &S)> {
        self.times.last().copied().zip(self.states.last())
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &S)> {
        self.times.iter().copied().zip(self.states.iter())
    }

    pub fn map<T>(self, f: impl FnMut(S) -> T) -> Trajectory<T> {
        Trajectory {
            times: self.times,
            states: self.states.into_iter().map(f).collect(),
            meta: self.meta,
        }
    }

    /// Like [`Trajectory::map`] but the conversion may fail; it also receives the sample time.
    pub fn try_map<T, E>(self, mut f: impl FnMut(f64, S) -> Result<T, E>) -> Result<Trajectory<T>, E> {
        let states = self
            .times
            .iter()
            .zip(self.states)
            .map(|(&t, s)| f(t, s))
            .collect::<Result<Vec<_>, E>>()?;
        Ok(Trajectory {
            times: self.times,
            states,
            meta: self.meta,
        })
    }

    pub fn with_scheme(mut self, scenario: &str, scheme: &str) -> Self {
        self.meta.scenario = scenario.to_string();
        self.meta.scheme = scheme.to_string();
        self
    }
}

/// Uniform grid of `n` points from `t0` to `t1`, both endpoints exact.
pub fn sample_grid(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    let span = t1 - t0;
    let last = n.saturating_sub(1).max(1) as f64;
    (0..n)
        .map(|k| if k + 1 == n { t1 } else { t0 + span * (k as f64 / last) })
        .collect()
}

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Difference between the 5th- and 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const UNDERFLOW_FRACTION: f64 = 1e-14;

struct Stages {
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
    y_new: Vec<f64>,
    err: Vec<f64>,
}

impl Stages {
    fn new(n: usize) -> Self {
        Stages {
            k: std::array::from_fn(|_| vec![0.0; n]),
            tmp: vec![0.0; n],
            y_new: vec![0.0; n],
            err: vec![0.0; n],
        }
    }

    /// One trial step from `(t, y)` with `k[0] = f(t, y)` already set.
    /// Leaves the candidate in `y_new`, its derivative in `k[6]`, and returns the scaled error norm.
    fn attempt<S: OdeSystem + ?Sized>(&mut self, sys: &S, t: f64, y: &[f64], h: f64, cfg: &IntegratorConfig) -> f64 {
        let n = y.len();
        let [k1, k2, k3, k4, k5, k6, k7] = &mut self.k;
        let tmp = &mut self.tmp;

        for i in 0..n {
            tmp[i] = y[i] + h * A21 * k1[i];
        }
        sys.rhs(t + C2 * h, tmp, k2);
        for i in 0..n {
            tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        sys.rhs(t + C3 * h, tmp, k3);
        for i in 0..n {
            tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        sys.rhs(t + C4 * h, tmp, k4);
        for i in 0..n {
            tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        sys.rhs(t + C5 * h, tmp, k5);
        for i in 0..n {
            tmp[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        sys.rhs(t + h, tmp, k6);
        for i in 0..n {
            self.y_new[i] = y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        sys.rhs(t + h, &self.y_new, k7);

        let mut acc = 0.0;
        for i in 0..n {
            self.err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = cfg.atol + cfg.rtol * y[i].abs().max(self.y_new[i].abs());
            let r = self.err[i] / sc;
            acc += r * r;
        }
        if n == 0 {
            0.0
        } else {
            (acc / n as f64).sqrt()
        }
    }
}

/// Integrates `sys` from `t0` to `t1 > t0` and samples the solution on the
/// uniform grid of `cfg.sample_count` points.
pub fn integrate<S: OdeSystem + ?Sized>(
    sys: &S,
    y0: &[f64],
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory, IntegrateError> {
    cfg.validate()?;
    if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
        return Err(IntegrateError::InvalidConfig(format!(
            "need finite t0 < t1, got t0 = {t0}, t1 = {t1}"
        )));
    }
    if y0.iter().any(|x| !x.is_finite()) {
        return Err(IntegrateError::Divergence { t: t0 });
    }
    sys.check(t0, y0)
        .map_err(|reason| IntegrateError::Rejected { t: t0, reason })?;

    let n = y0.len();
    let span = t1 - t0;
    let grid = sample_grid(t0, t1, cfg.sample_count);
    let h_min = UNDERFLOW_FRACTION * span;
    let snap = 1e-12 * span;

    let mut stats = StepStats::default();
    let mut times = Vec::with_capacity(grid.len());
    let mut states = Vec::with_capacity(grid.len());
    times.push(t0);
    states.push(y0.to_vec());

    let mut st = Stages::new(n);
    let mut t = t0;
    let mut y = y0.to_vec();
    sys.rhs(t, &y, &mut st.k[0]);
    stats.rhs_evals += 1;

    let mut h = cfg.initial_step.min(cfg.max_step).min(span);
    let mut last_rejected = false;

    for &target in &grid[1..] {
        while t < target {
            let remaining = target - t;
            let clipped = h >= remaining - snap;
            let h_try = if clipped { remaining } else { h };

            let err = st.attempt(sys, t, &y, h_try, cfg);
            stats.rhs_evals += 6;

            if !err.is_finite() || err > 1.0 {
                stats.rejected += 1;
                let fac = if err.is_finite() {
                    (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, 1.0)
                } else {
                    FAC_MIN
                };
                h = h_try * fac;
                last_rejected = true;
                if h < h_min {
                    return Err(IntegrateError::StepUnderflow { t, step: h });
                }
                continue;
            }

            if st.y_new.iter().any(|x| !x.is_finite()) {
                return Err(IntegrateError::Divergence { t: t + h_try });
            }
            stats.accepted += 1;
            let t_new = if clipped { target } else { t + h_try };
            sys.check(t_new, &st.y_new)
                .map_err(|reason| IntegrateError::Rejected { t: t_new, reason })?;

            let fac_max = if last_rejected { 1.0 } else { FAC_MAX };
            let fac = if err == 0.0 {
                fac_max
            } else {
                (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, fac_max)
            };
            let h_next = (h_try * fac).min(cfg.max_step);
            h = if clipped {
                h.max(h_next).min(cfg.max_step)
            } else {
                h_next
            };
            last_rejected = false;

            if !clipped && (h < h_min || t_new <= t) {
                return Err(IntegrateError::StepUnderflow { t, step: h });
            }
            t = t_new;
            std::mem::swap(&mut y, &mut st.y_new);
            // FSAL: derivative at the new point becomes the first stage.
            let [k1, .., k7] = &mut st.k;
            std::mem::swap(k1, k7);
        }
        times.push(target);
        states.push(y.clone());
    }

    Ok(Trajectory {
        times,
        states,
        meta: TrajectoryMeta {
            stats,
            ..TrajectoryMeta::default()
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn rotation(_t: f64, y: &[f64], dy: &mut [f64]) {
        dy[0] = y[1];
        dy[1] = -y[0];
    }

    #[test]
    fn zero_field_is_constant() {
        let zero = |_t: f64, _y: &[f64], dy: &mut [f64]| dy.fill(0.0);
        let traj = integrate(
            &zero,
            &[1.0, 2.0],
            0.0,
            10.0,
            &IntegratorConfig::default().with_samples(11),
        )
        .unwrap();
        assert_eq!(traj.len(), 11);
        for (_, s) in traj.iter() {
            assert_eq!(s, &vec![1.0, 2.0]);
        }
    }

    #[test]
    fn unit_circle_returns_after_one_period() {
        let traj = integrate(&rotation, &[1.0, 0.0], 0.0, 2.0 * PI, &IntegratorConfig::default()).unwrap();
        let (t, y) = traj.last().unwrap();
        assert_eq!(t, 2.0 * PI);
        assert!((y[0] - 1.0).abs() < 1e-8 && y[1].abs() < 1e-8, "{y:?}");
    }

    #[test]
    fn grid_is_uniform_and_exact_at_ends() {
        let g = sample_grid(-25.0, 25.0, 1001);
        assert_eq!(g[0], -25.0);
        assert_eq!(g[1000], 25.0);
        assert_eq!(g[500], 0.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn rejects_reversed_interval() {
        let err = integrate(&rotation, &[1.0, 0.0], 1.0, 0.0, &IntegratorConfig::default()).unwrap_err();
        assert!(matches!(err, IntegrateError::InvalidConfig(_)));
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = IntegratorConfig {
            sample_count: 1,
            ..IntegratorConfig::default()
        };
        assert!(integrate(&rotation, &[1.0, 0.0], 0.0, 1.0, &cfg).is_err());
        let cfg = IntegratorConfig {
            rtol: 0.0,
            ..IntegratorConfig::default()
        };
        assert!(integrate(&rotation, &[1.0, 0.0], 0.0, 1.0, &cfg).is_err());
    }

    #[test]
    fn blow_up_reports_failure_time() {
        // y' = y^2 from y = 1 blows up at t = 1.
        let f = |_t: f64, y: &[f64], dy: &mut [f64]| dy[0] = y[0] * y[0];
        let err = integrate(&f, &[1.0], 0.0, 2.0, &IntegratorConfig::default()).unwrap_err();
        match err {
            IntegrateError::StepUnderflow { t, .. } | IntegrateError::Divergence { t } => {
                assert!((t - 1.0).abs() < 1e-3, "failed at {t}")
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    struct Guarded;
    impl OdeSystem for Guarded {
        fn rhs(&self, _t: f64, _y: &[f64], dy: &mut [f64]) {
            dy[0] = 1.0;
        }
        fn check(&self, t: f64, _y: &[f64]) -> Result<(), String> {
            if t > 0.5 {
                Err("past the guard".into())
            } else {
                Ok(())
            }
        }
    }

    #[test]
    fn check_hook_aborts() {
        let err = integrate(&Guarded, &[0.0], 0.0, 1.0, &IntegratorConfig::default()).unwrap_err();
        assert!(matches!(err, IntegrateError::Rejected { t, .. } if t > 0.5));
    }

    #[test]
    fn deterministic_step_sequence() {
        let cfg = IntegratorConfig::default().with_samples(37);
        let a = integrate(&rotation, &[0.3, -0.7], 0.0, 13.0, &cfg).unwrap();
        let b = integrate(&rotation, &[0.3, -0.7], 0.0, 13.0, &cfg).unwrap();
        assert_eq!(a, b);
    }
}
