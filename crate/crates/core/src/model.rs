//! Hamiltonian scenarios as evaluatable data.
//!
//! Every scenario is `H(t) = H_R(t) + i H_I(t)` plus an optional real drive
//! vector `f(t)`. Units have ħ = 1. Landau-Zener sweeps are expressed in the
//! natural sweep units (time in √(ħ/A), energy in √(ħA)) purely through the
//! parameter values.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance for the symmetry check on explicit real matrices.
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HamiltonianKind {
    StaticReal,
    TwoLevel,
    LzLinear,
    LzArctan,
    DissipativeTwoLevel,
    DrivenDissipative,
    GeneralComplexStatic,
}

impl HamiltonianKind {
    pub const ALL: [HamiltonianKind; 7] = [
        HamiltonianKind::StaticReal,
        HamiltonianKind::TwoLevel,
        HamiltonianKind::LzLinear,
        HamiltonianKind::LzArctan,
        HamiltonianKind::DissipativeTwoLevel,
        HamiltonianKind::DrivenDissipative,
        HamiltonianKind::GeneralComplexStatic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            HamiltonianKind::StaticReal => "static_real",
            HamiltonianKind::TwoLevel => "two_level",
            HamiltonianKind::LzLinear => "lz_linear",
            HamiltonianKind::LzArctan => "lz_arctan",
            HamiltonianKind::DissipativeTwoLevel => "dissipative_two_level",
            HamiltonianKind::DrivenDissipative => "driven_dissipative",
            HamiltonianKind::GeneralComplexStatic => "general_complex_static",
        }
    }
}

impl fmt::Display for HamiltonianKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for HamiltonianKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        HamiltonianKind::ALL
            .into_iter()
            .find(|k| k.name() == norm)
            .ok_or_else(|| Error::Spec(format!("unknown Hamiltonian kind `{s}`")))
    }
}

/// Declarative description of one Hamiltonian scenario.
///
/// Decay rates `lambda1`, `lambda2` are stored signed; dissipation means
/// `lambda <= 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum HamiltonianSpec {
    StaticReal {
        h: DMatrix<f64>,
    },
    TwoLevel {
        e1: f64,
        e2: f64,
        v: f64,
    },
    /// `E_{1/2}(t) = e0 ± a·t`.
    LzLinear {
        e0: f64,
        a: f64,
        v: f64,
    },
    /// `E_{1/2}(t) = 2·e0·(1 ± atan(t/e0))`.
    LzArctan {
        e0: f64,
        v: f64,
    },
    DissipativeTwoLevel {
        e1: f64,
        e2: f64,
        v: f64,
        lambda1: f64,
        lambda2: f64,
    },
    /// Dissipative pair driven by `f(t) = cos(omega_drive·t)·(mu1, mu2)`.
    DrivenDissipative {
        e1: f64,
        e2: f64,
        v: f64,
        lambda1: f64,
        lambda2: f64,
        mu1: f64,
        mu2: f64,
        omega_drive: f64,
    },
    GeneralComplexStatic {
        h_r: DMatrix<f64>,
        h_i: DMatrix<f64>,
    },
}

/// Scalar view of a two-level Hamiltonian at a fixed time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelParams {
    pub e1: f64,
    pub e2: f64,
    pub v: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    /// Time derivatives of the diagonal energies.
    pub de1: f64,
    pub de2: f64,
}

impl HamiltonianSpec {
    /// Builds a validated static real Hamiltonian.
    pub fn static_real(h: DMatrix<f64>) -> Result<Self> {
        let spec = HamiltonianSpec::StaticReal { h };
        spec.validate()?;
        Ok(spec)
    }

    pub fn general_complex(h_r: DMatrix<f64>, h_i: DMatrix<f64>) -> Result<Self> {
        let spec = HamiltonianSpec::GeneralComplexStatic { h_r, h_i };
        spec.validate()?;
        Ok(spec)
    }

    pub fn kind(&self) -> HamiltonianKind {
        match self {
            HamiltonianSpec::StaticReal { .. } => HamiltonianKind::StaticReal,
            HamiltonianSpec::TwoLevel { .. } => HamiltonianKind::TwoLevel,
            HamiltonianSpec::LzLinear { .. } => HamiltonianKind::LzLinear,
            HamiltonianSpec::LzArctan { .. } => HamiltonianKind::LzArctan,
            HamiltonianSpec::DissipativeTwoLevel { .. } => HamiltonianKind::DissipativeTwoLevel,
            HamiltonianSpec::DrivenDissipative { .. } => HamiltonianKind::DrivenDissipative,
            HamiltonianSpec::GeneralComplexStatic { .. } => HamiltonianKind::GeneralComplexStatic,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            HamiltonianSpec::StaticReal { h } => h.nrows(),
            HamiltonianSpec::GeneralComplexStatic { h_r, .. } => h_r.nrows(),
            _ => 2,
        }
    }

    pub fn is_time_dependent(&self) -> bool {
        matches!(
            self,
            HamiltonianSpec::LzLinear { .. } | HamiltonianSpec::LzArctan { .. }
        )
    }

    /// True when `H_I` vanishes identically for this kind.
    pub fn is_real_kind(&self) -> bool {
        matches!(
            self,
            HamiltonianSpec::StaticReal { .. }
                | HamiltonianSpec::TwoLevel { .. }
                | HamiltonianSpec::LzLinear { .. }
                | HamiltonianSpec::LzArctan { .. }
        )
    }

    pub fn is_driven(&self) -> bool {
        matches!(self, HamiltonianSpec::DrivenDissipative { .. })
    }

    pub fn is_two_level(&self) -> bool {
        !matches!(
            self,
            HamiltonianSpec::StaticReal { .. } | HamiltonianSpec::GeneralComplexStatic { .. }
        )
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |name: &str, x: f64| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(Error::Spec(format!("{}: `{name}` must be finite", self.kind())))
            }
        };
        match self {
            HamiltonianSpec::StaticReal { h } => {
                check_square(h, "matrix_r")?;
                check_symmetric(h)?;
            }
            HamiltonianSpec::GeneralComplexStatic { h_r, h_i } => {
                check_square(h_r, "matrix_r")?;
                check_square(h_i, "matrix_i")?;
                if h_r.shape() != h_i.shape() {
                    return Err(Error::Spec(format!(
                        "matrix_r is {}x{} but matrix_i is {}x{}",
                        h_r.nrows(),
                        h_r.ncols(),
                        h_i.nrows(),
                        h_i.ncols()
                    )));
                }
                check_symmetric(h_r)?;
                check_symmetric(h_i)?;
            }
            HamiltonianSpec::TwoLevel { e1, e2, v } => {
                finite("e1", *e1)?;
                finite("e2", *e2)?;
                finite("v", *v)?;
            }
            HamiltonianSpec::LzLinear { e0, a, v } => {
                finite("e0", *e0)?;
                finite("a", *a)?;
                finite("v", *v)?;
            }
            HamiltonianSpec::LzArctan { e0, v } => {
                finite("e0", *e0)?;
                finite("v", *v)?;
                if *e0 == 0.0 {
                    return Err(Error::Spec("lz_arctan: `e0` must be non-zero".into()));
                }
            }
            HamiltonianSpec::DissipativeTwoLevel {
                e1,
                e2,
                v,
                lambda1,
                lambda2,
            } => {
                for (n, x) in [("e1", e1), ("e2", e2), ("v", v)] {
                    finite(n, *x)?;
                }
                finite("lambda1", *lambda1)?;
                finite("lambda2", *lambda2)?;
            }
            HamiltonianSpec::DrivenDissipative {
                e1,
                e2,
                v,
                lambda1,
                lambda2,
                mu1,
                mu2,
                omega_drive,
            } => {
                for (n, x) in [
                    ("e1", e1),
                    ("e2", e2),
                    ("v", v),
                    ("lambda1", lambda1),
                    ("lambda2", lambda2),
                    ("mu1", mu1),
                    ("mu2", mu2),
                    ("omega_drive", omega_drive),
                ] {
                    finite(n, *x)?;
                }
            }
        }
        Ok(())
    }

    /// Real and imaginary parts `(H_R, H_I)` of the Hamiltonian at time `t`.
    pub fn eval_h(&self, t: f64) -> (DMatrix<f64>, DMatrix<f64>) {
        match self {
            HamiltonianSpec::StaticReal { h } => (h.clone(), DMatrix::zeros(h.nrows(), h.ncols())),
            HamiltonianSpec::GeneralComplexStatic { h_r, h_i } => (h_r.clone(), h_i.clone()),
            _ => {
                let p = self.two_level(t).expect("two-level kind");
                let h_r = DMatrix::from_row_slice(2, 2, &[p.e1, p.v, p.v, p.e2]);
                let h_i = DMatrix::from_row_slice(2, 2, &[p.lambda1, 0.0, 0.0, p.lambda2]);
                (h_r, h_i)
            }
        }
    }

    /// Analytic `dH/dt`; zero for time-independent kinds.
    pub fn eval_hdot(&self, t: f64) -> DMatrix<f64> {
        let n = self.dim();
        match self.two_level(t) {
            Some(p) if self.is_time_dependent() => DMatrix::from_row_slice(2, 2, &[p.de1, 0.0, 0.0, p.de2]),
            _ => DMatrix::zeros(n, n),
        }
    }

    /// Drive vector `f(t)`; zero unless the scenario is driven.
    pub fn eval_drive(&self, t: f64) -> DVector<f64> {
        match self {
            HamiltonianSpec::DrivenDissipative {
                mu1, mu2, omega_drive, ..
            } => {
                let c = (omega_drive * t).cos();
                DVector::from_vec(vec![c * mu1, c * mu2])
            }
            _ => DVector::zeros(self.dim()),
        }
    }

    /// Scalar parameters of the two-level kinds at time `t`.
    pub fn two_level(&self, t: f64) -> Option<TwoLevelParams> {
        let stat = |e1: f64, e2: f64, v: f64, lambda1: f64, lambda2: f64| TwoLevelParams {
            e1,
            e2,
            v,
            lambda1,
            lambda2,
            de1: 0.0,
            de2: 0.0,
        };
        match *self {
            HamiltonianSpec::TwoLevel { e1, e2, v } => Some(stat(e1, e2, v, 0.0, 0.0)),
            HamiltonianSpec::LzLinear { e0, a, v } => Some(TwoLevelParams {
                e1: e0 + a * t,
                e2: e0 - a * t,
                v,
                lambda1: 0.0,
                lambda2: 0.0,
                de1: a,
                de2: -a,
            }),
            HamiltonianSpec::LzArctan { e0, v } => {
                let x = t / e0;
                let slope = 2.0 / (1.0 + x * x);
                Some(TwoLevelParams {
                    e1: 2.0 * e0 * (1.0 + x.atan()),
                    e2: 2.0 * e0 * (1.0 - x.atan()),
                    v,
                    lambda1: 0.0,
                    lambda2: 0.0,
                    de1: slope,
                    de2: -slope,
                })
            }
            HamiltonianSpec::DissipativeTwoLevel {
                e1,
                e2,
                v,
                lambda1,
                lambda2,
            }
            | HamiltonianSpec::DrivenDissipative {
                e1,
                e2,
                v,
                lambda1,
                lambda2,
                ..
            } => Some(stat(e1, e2, v, lambda1, lambda2)),
            HamiltonianSpec::StaticReal { .. } | HamiltonianSpec::GeneralComplexStatic { .. } => None,
        }
    }

    /// `(mu1, mu2, omega_drive)` for driven scenarios.
    pub fn drive_params(&self) -> Option<(f64, f64, f64)> {
        match *self {
            HamiltonianSpec::DrivenDissipative {
                mu1, mu2, omega_drive, ..
            } => Some((mu1, mu2, omega_drive)),
            _ => None,
        }
    }
}

fn check_square(m: &DMatrix<f64>, name: &str) -> Result<()> {
    if m.nrows() == 0 || m.nrows() != m.ncols() {
        return Err(Error::Spec(format!(
            "`{name}` must be a non-empty square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::Spec(format!("`{name}` has non-finite entries")));
    }
    Ok(())
}

fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    let scale = m.amax();
    let asym = (m - m.transpose()).amax();
    if asym > SYMMETRY_TOL * scale {
        return Err(Error::Spec(format!(
            "matrix is not symmetric (max |H - H^T| = {asym:e})"
        )));
    }
    Ok(())
}
