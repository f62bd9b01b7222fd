//! Runs a scenario through each selected scheme on one shared time grid and
//! compares the results.

use std::collections::BTreeMap;
use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::{self, execute_schedule, schedule_for_gate, Entanglement, RegisterState, ScheduleConfig};
use crate::integrate::{StepStats, Trajectory};
use crate::model::HamiltonianSpec;
use crate::oscillator::{
    evolve_doubled, evolve_exact_nonhermitian, evolve_exact_real, evolve_exact_td, evolve_rca, qp_from_amplitudes,
    PhaseSpaceState,
};
use crate::quantum_ref::{evolve_tdse, zener_probability};
use crate::scenario::{ScenarioConfig, Scheme};

/// One scheme's samples on the shared grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeSeries {
    pub scheme: Scheme,
    /// `populations[k][n]` at `times[k]`.
    pub populations: Vec<Vec<f64>>,
    pub q: Vec<Vec<f64>>,
    pub p: Vec<Vec<f64>>,
    pub stats: Option<StepStats>,
}

impl SchemeSeries {
    fn from_phase_space(scheme: Scheme, traj: Trajectory<PhaseSpaceState>) -> Self {
        let n = traj.len();
        let stats = traj.meta.stats;
        let mut out = SchemeSeries {
            scheme,
            populations: Vec::with_capacity(n),
            q: Vec::with_capacity(n),
            p: Vec::with_capacity(n),
            stats: Some(stats),
        };
        for s in traj.states {
            out.populations.push(s.populations());
            out.q.push(s.q);
            out.p.push(s.p);
        }
        out
    }

    /// `q_n² + p_n²` per sample.
    pub fn intensities(&self) -> Vec<Vec<f64>> {
        self.q
            .iter()
            .zip(&self.p)
            .map(|(q, p)| q.iter().zip(p).map(|(a, b)| a * a + b * b).collect())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectories {
    pub scenario: String,
    /// Sample times; gate scenarios use the step index.
    pub times: Vec<f64>,
    pub dim: usize,
    pub series: Vec<SchemeSeries>,
    /// Basis labels for register scenarios.
    pub labels: Option<Vec<String>>,
}

impl Trajectories {
    pub fn get(&self, scheme: Scheme) -> Option<&SchemeSeries> {
        self.series.iter().find(|s| s.scheme == scheme)
    }

    pub fn is_gate(&self) -> bool {
        self.labels.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairDiff {
    pub a: Scheme,
    pub b: Scheme,
    /// `max_{k,n} |P_n^a(t_k) - P_n^b(t_k)|`.
    pub max_diff: f64,
    pub time_of_max: f64,
    /// Same maximum for `q_n² + p_n²`.
    pub max_intensity_diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZenerCheck {
    /// Sweep rate `A` in `exp(-πV²/A)`; the arctan sweep uses its slope at the crossing.
    pub sweep_rate: f64,
    pub predicted: f64,
    /// Final population of the initially occupied level, per scheme.
    pub final_initial_level: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateReport {
    pub gates: Vec<String>,
    /// Amplitudes as `[re, im]` pairs, per scheme.
    pub final_states: BTreeMap<String, Vec<[f64; 2]>>,
    /// Max amplitude deviation between matrix and oscillator paths, modulo global phase.
    pub distance_up_to_phase: Option<f64>,
    /// Entanglement after each step of the first scheme, for two-qubit registers.
    pub entanglement: Vec<Entanglement>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub scenario: String,
    pub kind: String,
    pub schemes: Vec<Scheme>,
    pub samples: usize,
    pub pairs: Vec<PairDiff>,
    pub final_populations: BTreeMap<String, Vec<f64>>,
    pub zener: Option<ZenerCheck>,
    pub gate: Option<GateReport>,
}

impl ComparisonReport {
    /// Symmetric lookup of the population difference between two schemes.
    pub fn max_diff(&self, a: Scheme, b: Scheme) -> Option<f64> {
        self.pair(a, b).map(|p| p.max_diff)
    }

    pub fn pair(&self, a: Scheme, b: Scheme) -> Option<&PairDiff> {
        self.pairs
            .iter()
            .find(|p| (p.a == a && p.b == b) || (p.a == b && p.b == a))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub trajectories: Trajectories,
    pub report: ComparisonReport,
}

fn check_applicable(spec: &HamiltonianSpec, scheme: Scheme) -> Result<()> {
    let ok = match scheme {
        Scheme::Quantum | Scheme::Exact => true,
        Scheme::Rca => spec.is_two_level(),
        Scheme::Doubled => !spec.is_time_dependent(),
        Scheme::Gate => false,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Spec(format!(
            "scheme {scheme} does not apply to {}",
            spec.kind()
        )))
    }
}

/// Exact classical scheme appropriate for the Hamiltonian kind.
pub fn evolve_exact(
    spec: &HamiltonianSpec,
    s0: &PhaseSpaceState,
    t0: f64,
    t1: f64,
    cfg: &crate::integrate::IntegratorConfig,
) -> Result<Trajectory<PhaseSpaceState>> {
    if spec.is_time_dependent() {
        evolve_exact_td(spec, s0, t0, t1, cfg)
    } else if spec.is_real_kind() && !spec.is_driven() {
        evolve_exact_real(spec, s0, t0, t1, cfg)
    } else {
        evolve_exact_nonhermitian(spec, s0, t0, t1, cfg)
    }
}

fn with_context(e: Error, name: &str, scheme: Scheme) -> Error {
    match e {
        Error::Spec(m) => Error::Spec(format!("scenario {name}, scheme {scheme}: {m}")),
        Error::Validation(m) => Error::Validation(format!("scenario {name}, scheme {scheme}: {m}")),
        Error::Integration { context, source } => Error::Integration {
            context: format!("scenario {name}, scheme {scheme}: {context}"),
            source,
        },
        other => other,
    }
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunResult> {
    if cfg.schemes.is_empty() {
        return Err(Error::Validation(format!("scenario {}: no schemes selected", cfg.name)));
    }
    match (&cfg.circuit, cfg.spec()?) {
        (Some(_), _) => run_circuit(cfg),
        (None, Some(spec)) => run_hamiltonian(cfg, &spec),
        (None, None) => Err(Error::Validation(format!(
            "scenario {} has neither a Hamiltonian nor a circuit",
            cfg.name
        ))),
    }
}

fn run_hamiltonian(cfg: &ScenarioConfig, spec: &HamiltonianSpec) -> Result<RunResult> {
    if !(cfg.t1 > cfg.t0) {
        return Err(Error::Validation(format!(
            "scenario {}: need t1 > t0, got {} and {}",
            cfg.name, cfg.t0, cfg.t1
        )));
    }
    for &s in &cfg.schemes {
        check_applicable(spec, s).map_err(|e| with_context(e, &cfg.name, s))?;
    }
    let c0 = cfg
        .initial
        .amplitudes(spec.dim())
        .map_err(|e| with_context(e, &cfg.name, cfg.schemes[0]))?;
    let s0 = qp_from_amplitudes(&c0);
    let (t0, t1, icfg) = (cfg.t0, cfg.t1, &cfg.integrator);

    let mut series = Vec::new();
    let mut times = Vec::new();
    for &scheme in &cfg.schemes {
        let run = || -> Result<(Vec<f64>, SchemeSeries)> {
            Ok(match scheme {
                Scheme::Quantum => {
                    let tr = evolve_tdse(spec, &c0, t0, t1, icfg)?;
                    let times = tr.times.clone();
                    let tr = tr.map(|c| qp_from_amplitudes(&c));
                    let mut s = SchemeSeries::from_phase_space(scheme, tr);
                    // Populations straight from the amplitudes.
                    s.populations =
                        s.q.iter()
                            .zip(&s.p)
                            .map(|(q, p)| q.iter().zip(p).map(|(a, b)| 0.5 * (a * a + b * b)).collect())
                            .collect();
                    (times, s)
                }
                Scheme::Exact => {
                    let tr = evolve_exact(spec, &s0, t0, t1, icfg)?;
                    (tr.times.clone(), SchemeSeries::from_phase_space(scheme, tr))
                }
                Scheme::Rca => {
                    let tr = evolve_rca(spec, &s0, t0, t1, icfg)?;
                    (tr.times.clone(), SchemeSeries::from_phase_space(scheme, tr))
                }
                Scheme::Doubled => {
                    let tr = evolve_doubled(spec, &c0, t0, t1, icfg)?;
                    let times = tr.times.clone();
                    (
                        times,
                        SchemeSeries::from_phase_space(scheme, tr.map(|d| d.phase_space())),
                    )
                }
                Scheme::Gate => unreachable!("checked above"),
            })
        };
        let (t, s) = run().map_err(|e| with_context(e, &cfg.name, scheme))?;
        times = t;
        series.push(s);
    }

    let trajectories = Trajectories {
        scenario: cfg.name.clone(),
        times,
        dim: spec.dim(),
        series,
        labels: None,
    };
    let mut report = compare(&trajectories, spec.kind().name());
    report.zener = zener_check(spec, &c0, &trajectories);
    Ok(RunResult { trajectories, report })
}

fn zener_check(
    spec: &HamiltonianSpec,
    c0: &crate::quantum_ref::AmplitudeState,
    tr: &Trajectories,
) -> Option<ZenerCheck> {
    let (v, rate) = match *spec {
        HamiltonianSpec::LzLinear { a, v, .. } => (v, a.abs()),
        // E1 - E2 = 4 E0 atan(t/E0) has slope 4 at the crossing, i.e. twice a unit linear sweep.
        HamiltonianSpec::LzArctan { v, .. } => (v, 2.0),
        _ => return None,
    };
    let predicted = zener_probability(v, rate).ok()?;
    let level = c0.populations().iter().position(|&p| p > 0.5)?;
    let final_initial_level = tr
        .series
        .iter()
        .map(|s| {
            (
                s.scheme.name().to_string(),
                s.populations.last().map(|p| p[level]).unwrap_or(f64::NAN),
            )
        })
        .collect();
    Some(ZenerCheck {
        sweep_rate: rate,
        predicted,
        final_initial_level,
    })
}

fn amplitudes_to_qp(c: &[num_complex::Complex64]) -> (Vec<f64>, Vec<f64>) {
    (
        c.iter().map(|z| SQRT_2 * z.re).collect(),
        c.iter().map(|z| SQRT_2 * z.im).collect(),
    )
}

fn run_circuit(cfg: &ScenarioConfig) -> Result<RunResult> {
    let circuit = cfg.circuit.as_ref().expect("circuit scenario");
    for &s in &cfg.schemes {
        if !matches!(s, Scheme::Quantum | Scheme::Gate) {
            return Err(Error::Spec(format!(
                "scenario {}: scheme {s} does not apply to gate circuits (use quantum, gate)",
                cfg.name
            )));
        }
    }
    let s0 = cfg.initial.register(circuit.n_qubits)?;
    let sched_cfg = ScheduleConfig {
        carrier: circuit.carrier,
        integrator: crate::integrate::IntegratorConfig {
            sample_count: 2,
            ..cfg.integrator.clone()
        },
    };

    let mut series = Vec::new();
    let mut finals: Vec<(Scheme, RegisterState)> = Vec::new();
    let mut steps_first: Vec<RegisterState> = Vec::new();
    for &scheme in &cfg.schemes {
        let mut states = vec![s0.clone()];
        let mut cur = s0.clone();
        for g in &circuit.gates {
            cur = match scheme {
                Scheme::Quantum => gates::apply(g, &cur),
                _ => schedule_for_gate(g, circuit.n_qubits, circuit.coupling)
                    .and_then(|sch| execute_schedule(&sch, &cur, &sched_cfg)),
            }
            .map_err(|e| with_context(e, &cfg.name, scheme))?;
            states.push(cur.clone());
        }
        let mut s = SchemeSeries {
            scheme,
            populations: vec![],
            q: vec![],
            p: vec![],
            stats: None,
        };
        for st in &states {
            s.populations.push(st.populations());
            let (q, p) = amplitudes_to_qp(st.amplitudes());
            s.q.push(q);
            s.p.push(p);
        }
        if steps_first.is_empty() {
            steps_first = states;
        }
        finals.push((scheme, cur));
        series.push(s);
    }

    let dim = 1 << circuit.n_qubits;
    let trajectories = Trajectories {
        scenario: cfg.name.clone(),
        times: (0..=circuit.gates.len()).map(|k| k as f64).collect(),
        dim,
        series,
        labels: Some((0..dim).map(|k| gates::basis_label(circuit.n_qubits, k)).collect()),
    };
    let mut report = compare(&trajectories, "circuit");
    let distance_up_to_phase = match finals.as_slice() {
        [(_, a), (_, b), ..] => Some(a.distance_up_to_phase(b)),
        _ => None,
    };
    let entanglement = if circuit.n_qubits == 2 {
        steps_first
            .iter()
            .map(gates::entanglement_measures)
            .collect::<Result<Vec<_>>>()?
    } else {
        vec![]
    };
    report.gate = Some(GateReport {
        gates: circuit.gates.iter().map(|g| g.to_string()).collect(),
        final_states: finals
            .iter()
            .map(|(k, s)| {
                (
                    k.name().to_string(),
                    s.amplitudes().iter().map(|z| [z.re, z.im]).collect(),
                )
            })
            .collect(),
        distance_up_to_phase,
        entanglement,
    });
    Ok(RunResult { trajectories, report })
}

/// Pairwise comparison of every two schemes on the common grid.
pub fn compare(tr: &Trajectories, kind: &str) -> ComparisonReport {
    let mut pairs = Vec::new();
    for (i, a) in tr.series.iter().enumerate() {
        for b in &tr.series[i + 1..] {
            let (mut max_diff, mut time_of_max) = (0.0, tr.times.first().copied().unwrap_or(0.0));
            for (k, (pa, pb)) in a.populations.iter().zip(&b.populations).enumerate() {
                for (x, y) in pa.iter().zip(pb) {
                    let d = (x - y).abs();
                    if d > max_diff {
                        max_diff = d;
                        time_of_max = tr.times[k];
                    }
                }
            }
            let max_intensity_diff = a
                .intensities()
                .iter()
                .zip(&b.intensities())
                .flat_map(|(x, y)| x.iter().zip(y).map(|(u, v)| (u - v).abs()).collect::<Vec<_>>())
                .fold(0.0, f64::max);
            pairs.push(PairDiff {
                a: a.scheme,
                b: b.scheme,
                max_diff,
                time_of_max,
                max_intensity_diff,
            });
        }
    }
    ComparisonReport {
        scenario: tr.scenario.clone(),
        kind: kind.to_string(),
        schemes: tr.series.iter().map(|s| s.scheme).collect(),
        samples: tr.times.len(),
        pairs,
        final_populations: tr
            .series
            .iter()
            .map(|s| {
                (
                    s.scheme.name().to_string(),
                    s.populations.last().cloned().unwrap_or_default(),
                )
            })
            .collect(),
        zener: None,
        gate: None,
    }
}
