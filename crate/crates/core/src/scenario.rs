//! Scenario files.
//!
//! Line-oriented `key = value` text with `[section]` headers and `#` comments:
//!
//! ```text
//! [scenario]
//! name = fig1_v02
//! schemes = quantum, exact, rca
//! t0 = -25
//! t1 = 25
//! initial = basis 0
//!
//! [hamiltonian]
//! kind = lz_linear
//! e0 = 40
//! a = 1
//! v = 0.2
//!
//! [integrator]
//! rtol = 1e-10
//! samples = 1001
//! ```
//!
//! Other sections: `[output]` (`csv`, `svg`, `report` file names), `[circuit]`
//! (`qubits`, `gates`, `coupling`, `carrier`) for gate scenarios and `[sweep]`
//! (comma-separated values for Hamiltonian keys, expanded as a Cartesian grid).
//! Matrix values use `;` between rows and `,` within a row. Initial states are
//! `basis k`, `zero`, `ket 10` or a comma-separated list of complex numbers
//! such as `0.6, 0.8i` or `0.5-0.5i, 0.7071`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::{parse_angle, parse_circuit, Gate, RegisterState};
use crate::integrate::IntegratorConfig;
use crate::model::{HamiltonianKind, HamiltonianSpec};
use crate::quantum_ref::AmplitudeState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Quantum,
    Exact,
    Rca,
    Doubled,
    Gate,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::Quantum,
        Scheme::Exact,
        Scheme::Rca,
        Scheme::Doubled,
        Scheme::Gate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Quantum => "quantum",
            Scheme::Exact => "exact",
            Scheme::Rca => "rca",
            Scheme::Doubled => "doubled",
            Scheme::Gate => "gate",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        Scheme::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            Error::Validation(format!(
                "unknown scheme {s:?} (expected quantum, exact, rca, doubled or gate)"
            ))
        })
    }
}

/// Comma-separated scheme list; duplicates are dropped, order kept.
pub fn parse_schemes(s: &str) -> Result<Vec<Scheme>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let k: Scheme = part.parse()?;
        if !out.contains(&k) {
            out.push(k);
        }
    }
    if out.is_empty() {
        return Err(Error::Validation("at least one scheme must be selected".into()));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    Basis(usize),
    Zero,
    /// Basis label for registers, e.g. `"10"`.
    Ket(String),
    Amplitudes(Vec<Complex64>),
}

impl InitialState {
    pub fn amplitudes(&self, dim: usize) -> Result<AmplitudeState> {
        let c = match self {
            InitialState::Basis(k) if *k < dim => AmplitudeState::basis(dim, *k),
            InitialState::Basis(k) => {
                return Err(Error::Validation(format!(
                    "initial basis state {k} out of range for dimension {dim}"
                )))
            }
            InitialState::Zero => AmplitudeState::zeros(dim),
            InitialState::Ket(label) => {
                let r = RegisterState::from_label(label)?;
                AmplitudeState(r.amplitudes().to_vec())
            }
            InitialState::Amplitudes(a) => AmplitudeState(a.clone()),
        };
        if c.dim() != dim {
            return Err(Error::Validation(format!(
                "initial state has {} amplitudes, expected {dim}",
                c.dim()
            )));
        }
        Ok(c)
    }

    pub fn register(&self, n_qubits: usize) -> Result<RegisterState> {
        match self {
            InitialState::Ket(label) => {
                let r = RegisterState::from_label(label)?;
                if r.n_qubits() != n_qubits {
                    return Err(Error::Validation(format!(
                        "initial ket {label:?} has {} qubits, circuit has {n_qubits}",
                        r.n_qubits()
                    )));
                }
                Ok(r)
            }
            InitialState::Zero => Err(Error::Validation("a register cannot start in the zero vector".into())),
            other => RegisterState::new(n_qubits, other.amplitudes(1 << n_qubits)?.0),
        }
    }
}

impl FromStr for InitialState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut words = s.split_whitespace();
        match words.next().map(str::to_ascii_lowercase).as_deref() {
            Some("zero") if words.next().is_none() => Ok(InitialState::Zero),
            Some("basis") => {
                let k = words
                    .next()
                    .and_then(|w| w.parse::<usize>().ok())
                    .filter(|_| words.next().is_none())
                    .ok_or_else(|| Error::Validation(format!("expected `basis <index>`, got {s:?}")))?;
                Ok(InitialState::Basis(k))
            }
            Some("ket") => {
                let label = words
                    .next()
                    .filter(|_| words.next().is_none())
                    .ok_or_else(|| Error::Validation(format!("expected `ket <bits>`, got {s:?}")))?;
                RegisterState::from_label(label)?;
                Ok(InitialState::Ket(
                    label.trim_matches(|c| c == '|' || c == '>' || c == '⟩').to_string(),
                ))
            }
            Some(_) => Ok(InitialState::Amplitudes(
                s.split(',').map(parse_complex).collect::<Result<_>>()?,
            )),
            None => Err(Error::Validation("empty initial state".into())),
        }
    }
}

/// `1.5`, `-2i`, `i`, `0.6+0.8i`, `1e-3-2.5e-1i`.
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Validation(format!("invalid complex number {s:?}"));
    if t.is_empty() {
        return Err(bad());
    }
    let imag = |x: &str| -> Result<f64> {
        match x {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => x.parse::<f64>().map_err(|_| bad()),
        }
    };
    let value = if let Some(body) = t.strip_suffix(['i', 'j']) {
        // Split at the last sign that is not an exponent sign or the leading sign.
        let bytes = body.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
        match split {
            Some(k) => Complex64::new(body[..k].parse::<f64>().map_err(|_| bad())?, imag(&body[k..])?),
            None => Complex64::new(0.0, imag(body)?),
        }
    } else {
        Complex64::new(t.parse::<f64>().map_err(|_| bad())?, 0.0)
    };
    if !(value.re.is_finite() && value.im.is_finite()) {
        return Err(bad());
    }
    Ok(value)
}

/// Rows separated by `;`, entries by `,` or whitespace.
pub fn parse_matrix(s: &str) -> Result<DMatrix<f64>> {
    let rows: Vec<Vec<f64>> = s
        .split(';')
        .map(str::trim)
        .filter(|r| !r.is_empty())
        .map(|r| {
            r.split(|c: char| c == ',' || c.is_whitespace())
                .filter(|x| !x.is_empty())
                .map(|x| {
                    x.parse::<f64>()
                        .map_err(|_| Error::Validation(format!("invalid matrix entry {x:?}")))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != rows[0].len()) {
        return Err(Error::Validation(
            "matrix rows must be non-empty and of equal length".into(),
        ));
    }
    Ok(DMatrix::from_fn(n, rows[0].len(), |i, j| rows[i][j]))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitConfig {
    pub n_qubits: usize,
    #[serde(skip)]
    pub gates: Vec<Gate>,
    pub gate_list: String,
    /// Coupling strength `V` of every window.
    pub coupling: f64,
    /// Common oscillator frequency.
    pub carrier: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OutputPaths {
    pub csv: Option<String>,
    pub svg: Option<String>,
    pub report: Option<String>,
}

impl OutputPaths {
    pub fn defaults_for(name: &str) -> Self {
        OutputPaths {
            csv: Some(format!("{name}.csv")),
            svg: Some(format!("{name}.svg")),
            report: Some(format!("{name}.json")),
        }
    }
}

/// Raw Hamiltonian section; kept so sweeps can override single keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianSection {
    pub kind: HamiltonianKind,
    pub params: BTreeMap<String, String>,
}

impl HamiltonianSection {
    pub fn build(&self) -> Result<HamiltonianSpec> {
        let num = |key: &str| -> Result<f64> {
            let raw = self
                .params
                .get(key)
                .ok_or_else(|| Error::Spec(format!("{} needs `{key}`", self.kind)))?;
            parse_angle(raw).map_err(|_| Error::Spec(format!("`{key}` must be a number, got {raw:?}")))
        };
        let opt = |key: &str, default: f64| -> Result<f64> {
            if self.params.contains_key(key) {
                num(key)
            } else {
                Ok(default)
            }
        };
        let allowed = allowed_keys(self.kind);
        if let Some(k) = self.params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::Spec(format!("unknown key `{k}` for {}", self.kind)));
        }
        let spec = self.build_unchecked(num, opt)?;
        spec.validate()?;
        Ok(spec)
    }

    fn build_unchecked(
        &self,
        num: impl Fn(&str) -> Result<f64>,
        opt: impl Fn(&str, f64) -> Result<f64>,
    ) -> Result<HamiltonianSpec> {
        Ok(match self.kind {
            HamiltonianKind::StaticReal => HamiltonianSpec::StaticReal {
                h: parse_matrix(
                    self.params
                        .get("h")
                        .ok_or_else(|| Error::Spec("static_real needs `h`".into()))?,
                )?,
            },
            HamiltonianKind::GeneralComplexStatic => {
                let h_r = parse_matrix(
                    self.params
                        .get("h_r")
                        .ok_or_else(|| Error::Spec("general_complex_static needs `h_r`".into()))?,
                )?;
                let h_i = match self.params.get("h_i") {
                    Some(s) => parse_matrix(s)?,
                    None => DMatrix::zeros(h_r.nrows(), h_r.ncols()),
                };
                HamiltonianSpec::GeneralComplexStatic { h_r, h_i }
            }
            HamiltonianKind::TwoLevel => HamiltonianSpec::TwoLevel {
                e1: num("e1")?,
                e2: num("e2")?,
                v: num("v")?,
            },
            HamiltonianKind::LzLinear => HamiltonianSpec::LzLinear {
                e0: num("e0")?,
                a: num("a")?,
                v: num("v")?,
            },
            HamiltonianKind::LzArctan => HamiltonianSpec::LzArctan {
                e0: num("e0")?,
                v: num("v")?,
            },
            HamiltonianKind::DissipativeTwoLevel => HamiltonianSpec::DissipativeTwoLevel {
                e1: num("e1")?,
                e2: num("e2")?,
                v: num("v")?,
                lambda1: opt("lambda1", 0.0)?,
                lambda2: opt("lambda2", 0.0)?,
            },
            HamiltonianKind::DrivenDissipative => HamiltonianSpec::DrivenDissipative {
                e1: num("e1")?,
                e2: num("e2")?,
                v: num("v")?,
                lambda1: opt("lambda1", 0.0)?,
                lambda2: opt("lambda2", 0.0)?,
                mu1: opt("mu1", 0.0)?,
                mu2: opt("mu2", 0.0)?,
                omega_drive: num("omega_drive")?,
            },
        })
    }
}

fn allowed_keys(kind: HamiltonianKind) -> &'static [&'static str] {
    match kind {
        HamiltonianKind::StaticReal => &["h"],
        HamiltonianKind::TwoLevel => &["e1", "e2", "v"],
        HamiltonianKind::LzLinear => &["e0", "a", "v"],
        HamiltonianKind::LzArctan => &["e0", "v"],
        HamiltonianKind::DissipativeTwoLevel => &["e1", "e2", "v", "lambda1", "lambda2"],
        HamiltonianKind::DrivenDissipative => &["e1", "e2", "v", "lambda1", "lambda2", "mu1", "mu2", "omega_drive"],
        HamiltonianKind::GeneralComplexStatic => &["h_r", "h_i"],
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub hamiltonian: Option<HamiltonianSection>,
    pub circuit: Option<CircuitConfig>,
    pub initial: InitialState,
    pub t0: f64,
    pub t1: f64,
    pub integrator: IntegratorConfig,
    pub schemes: Vec<Scheme>,
    pub output: OutputPaths,
    /// Hamiltonian keys and the values to sweep over.
    pub sweep: Vec<(String, Vec<String>)>,
}

impl ScenarioConfig {
    /// Programmatic construction for a Hamiltonian scenario.
    pub fn new(
        name: &str,
        spec: &HamiltonianSpec,
        initial: InitialState,
        t0: f64,
        t1: f64,
        schemes: Vec<Scheme>,
    ) -> Self {
        ScenarioConfig {
            name: name.to_string(),
            hamiltonian: Some(section_from_spec(spec)),
            circuit: None,
            initial,
            t0,
            t1,
            integrator: IntegratorConfig::default(),
            schemes,
            output: OutputPaths::defaults_for(name),
            sweep: vec![],
        }
    }

    pub fn spec(&self) -> Result<Option<HamiltonianSpec>> {
        self.hamiltonian.as_ref().map(HamiltonianSection::build).transpose()
    }

    pub fn is_gate_scenario(&self) -> bool {
        self.circuit.is_some()
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut sections: BTreeMap<String, Vec<(usize, String, String)>> = BTreeMap::new();
        let mut current: Option<String> = None;
        for (k, raw) in text.lines().enumerate() {
            let line_no = k + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| parse_err(line_no, "unterminated section header"))?
                    .trim()
                    .to_ascii_lowercase();
                if !matches!(
                    name.as_str(),
                    "scenario" | "hamiltonian" | "integrator" | "output" | "circuit" | "sweep"
                ) {
                    return Err(parse_err(line_no, format!("unknown section [{name}]")));
                }
                if sections.contains_key(&name) {
                    return Err(parse_err(line_no, format!("duplicate section [{name}]")));
                }
                sections.insert(name.clone(), vec![]);
                current = Some(name);
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| parse_err(line_no, format!("expected `key = value`, got {line:?}")))?;
            let key = key.trim().to_ascii_lowercase();
            if key.is_empty() {
                return Err(parse_err(line_no, "empty key"));
            }
            let sec = current
                .as_ref()
                .ok_or_else(|| parse_err(line_no, "key outside of any section"))?;
            let entries = sections.get_mut(sec).expect("section registered");
            if entries.iter().any(|(_, k, _)| *k == key) {
                return Err(parse_err(line_no, format!("duplicate key `{key}` in [{sec}]")));
            }
            entries.push((line_no, key, value.trim().to_string()));
        }
        let header_line = |name: &str| -> usize {
            text.lines()
                .position(|l| l.trim().to_ascii_lowercase().starts_with(&format!("[{name}")))
                .map(|p| p + 1)
                .unwrap_or(1)
        };
        let at = |line: usize| move |e: Error| parse_err(line, strip_prefix(&e));

        let empty = vec![];
        let scen = sections
            .get("scenario")
            .ok_or_else(|| parse_err(1, "missing [scenario] section"))?;
        let get = |entries: &Vec<(usize, String, String)>, key: &str| -> Option<(usize, String)> {
            entries
                .iter()
                .find(|(_, k, _)| k == key)
                .map(|(l, _, v)| (*l, v.clone()))
        };
        let known = |entries: &Vec<(usize, String, String)>, keys: &[&str], sec: &str| -> Result<()> {
            match entries.iter().find(|(_, k, _)| !keys.contains(&k.as_str())) {
                Some((l, k, _)) => Err(parse_err(*l, format!("unknown key `{k}` in [{sec}]"))),
                None => Ok(()),
            }
        };
        known(scen, &["name", "schemes", "t0", "t1", "initial"], "scenario")?;
        let num = |entries: &Vec<(usize, String, String)>, key: &str| -> Result<Option<f64>> {
            get(entries, key)
                .map(|(l, v)| parse_angle(&v).map_err(|_| parse_err(l, format!("`{key}` must be a number, got {v:?}"))))
                .transpose()
        };

        let name = get(scen, "name").map(|(_, v)| v).unwrap_or_else(|| "scenario".into());
        if name.is_empty() || name.contains(['/', '\\']) {
            return Err(parse_err(
                header_line("scenario"),
                format!("invalid scenario name {name:?}"),
            ));
        }

        let hamiltonian = match sections.get("hamiltonian") {
            Some(entries) => {
                let (kl, kind) = get(entries, "kind")
                    .ok_or_else(|| parse_err(header_line("hamiltonian"), "[hamiltonian] needs `kind`"))?;
                let kind: HamiltonianKind = kind.parse().map_err(at(kl))?;
                for (l, k, v) in entries.iter().filter(|(_, k, _)| k != "kind") {
                    if !allowed_keys(kind).contains(&k.as_str()) {
                        return Err(parse_err(*l, format!("unknown key `{k}` for {kind}")));
                    }
                    let checked = if k.starts_with('h') {
                        parse_matrix(v).map(|_| ())
                    } else {
                        parse_angle(v).map(|_| ())
                    };
                    checked.map_err(|_| parse_err(*l, format!("invalid value {v:?} for `{k}`")))?;
                }
                let params = entries
                    .iter()
                    .filter(|(_, k, _)| k != "kind")
                    .map(|(_, k, v)| (k.clone(), v.clone()))
                    .collect();
                let section = HamiltonianSection { kind, params };
                section.build().map_err(at(header_line("hamiltonian")))?;
                Some(section)
            }
            None => None,
        };

        let circuit = match sections.get("circuit") {
            Some(entries) => {
                known(entries, &["qubits", "gates", "coupling", "carrier"], "circuit")?;
                let hl = header_line("circuit");
                let n_qubits = match get(entries, "qubits") {
                    Some((l, v)) => v
                        .parse::<usize>()
                        .ok()
                        .filter(|&n| (1..=10).contains(&n))
                        .ok_or_else(|| parse_err(l, format!("`qubits` must be an integer in 1..=10, got {v:?}")))?,
                    None => 2,
                };
                let (gl, gate_list) = get(entries, "gates").ok_or_else(|| parse_err(hl, "[circuit] needs `gates`"))?;
                let gates = parse_circuit(&gate_list).map_err(at(gl))?;
                for g in &gates {
                    if let Some(q) = g.targets().into_iter().find(|&q| q >= n_qubits) {
                        return Err(parse_err(
                            gl,
                            format!("gate {g} targets qubit {q} of a {n_qubits}-qubit register"),
                        ));
                    }
                }
                let coupling = num(entries, "coupling")?.unwrap_or(1.0);
                if !(coupling > 0.0) {
                    return Err(parse_err(hl, "`coupling` must be positive"));
                }
                let carrier = num(entries, "carrier")?.unwrap_or(10.0);
                Some(CircuitConfig {
                    n_qubits,
                    gates,
                    gate_list,
                    coupling,
                    carrier,
                })
            }
            None => None,
        };

        match (&hamiltonian, &circuit) {
            (None, None) => return Err(parse_err(1, "need a [hamiltonian] or a [circuit] section")),
            (Some(_), Some(_)) => {
                return Err(parse_err(
                    header_line("circuit"),
                    "a scenario has either a [hamiltonian] or a [circuit] section, not both",
                ))
            }
            _ => {}
        }

        let default_schemes = if circuit.is_some() {
            "quantum, gate"
        } else {
            "quantum, exact"
        };
        let (sl, schemes) = get(scen, "schemes").unwrap_or((header_line("scenario"), default_schemes.into()));
        let schemes = parse_schemes(&schemes).map_err(at(sl))?;

        let (t0, t1) = if circuit.is_some() {
            (0.0, 1.0)
        } else {
            let t0 = num(scen, "t0")?.ok_or_else(|| parse_err(header_line("scenario"), "missing `t0`"))?;
            let t1 = num(scen, "t1")?.ok_or_else(|| parse_err(header_line("scenario"), "missing `t1`"))?;
            if !(t1 > t0) {
                let l = get(scen, "t1").map(|(l, _)| l).unwrap_or(1);
                return Err(parse_err(l, format!("need t1 > t0, got t0 = {t0}, t1 = {t1}")));
            }
            (t0, t1)
        };

        let initial = match get(scen, "initial") {
            Some((l, v)) => v.parse::<InitialState>().map_err(at(l))?,
            None if circuit.is_some() => InitialState::Basis(0),
            None => return Err(parse_err(header_line("scenario"), "missing `initial`")),
        };

        let mut integrator = IntegratorConfig::default();
        let integ = sections.get("integrator").unwrap_or(&empty);
        known(
            integ,
            &["rtol", "atol", "samples", "max_step", "initial_step"],
            "integrator",
        )?;
        if let Some(x) = num(integ, "rtol")? {
            integrator.rtol = x;
        }
        if let Some(x) = num(integ, "atol")? {
            integrator.atol = x;
        }
        if let Some(x) = num(integ, "max_step")? {
            integrator.max_step = x;
        }
        if let Some(x) = num(integ, "initial_step")? {
            integrator.initial_step = x;
        }
        if let Some((l, v)) = get(integ, "samples") {
            integrator.sample_count = v
                .parse()
                .map_err(|_| parse_err(l, format!("`samples` must be a positive integer, got {v:?}")))?;
        }
        integrator
            .validate()
            .map_err(|e| parse_err(header_line("integrator"), e.to_string()))?;

        let out = sections.get("output").unwrap_or(&empty);
        known(out, &["csv", "svg", "report"], "output")?;
        let mut output = OutputPaths::defaults_for(&name);
        for (l, key, value) in out {
            if value.contains(['/', '\\']) {
                return Err(parse_err(*l, "output names are file names inside the output directory"));
            }
            let slot = match key.as_str() {
                "csv" => &mut output.csv,
                "svg" => &mut output.svg,
                _ => &mut output.report,
            };
            *slot = (!value.is_empty() && value != "none").then(|| value.clone());
        }

        let mut sweep = vec![];
        if let Some(entries) = sections.get("sweep") {
            let section = hamiltonian
                .as_ref()
                .ok_or_else(|| parse_err(header_line("sweep"), "[sweep] needs a [hamiltonian] section"))?;
            for (l, key, value) in entries {
                let values: Vec<String> = value
                    .split(',')
                    .map(|v| v.trim().to_string())
                    .filter(|v| !v.is_empty())
                    .collect();
                if values.is_empty() {
                    return Err(parse_err(*l, format!("sweep over `{key}` has no values")));
                }
                for v in &values {
                    let mut probe = section.clone();
                    probe.params.insert(key.clone(), v.clone());
                    probe.build().map_err(at(*l))?;
                }
                sweep.push((key.clone(), values));
            }
        }

        Ok(ScenarioConfig {
            name,
            hamiltonian,
            circuit,
            initial,
            t0,
            t1,
            integrator,
            schemes,
            output,
            sweep,
        })
    }

    /// Cartesian expansion of the `[sweep]` section. Each point gets a name
    /// with the swept values appended and its own output file names.
    pub fn sweep_points(&self) -> Result<Vec<ScenarioConfig>> {
        let section = match (&self.hamiltonian, self.sweep.is_empty()) {
            (Some(s), false) => s,
            _ => return Ok(vec![self.clone()]),
        };
        let mut points: Vec<(String, HamiltonianSection)> = vec![(self.name.clone(), section.clone())];
        for (key, values) in &self.sweep {
            points = points
                .into_iter()
                .flat_map(|(name, sec)| {
                    values.iter().map(move |v| {
                        let mut sec = sec.clone();
                        sec.params.insert(key.clone(), v.clone());
                        (format!("{name}_{key}{}", sanitize(v)), sec)
                    })
                })
                .collect();
        }
        points
            .into_iter()
            .map(|(name, sec)| {
                sec.build()?;
                Ok(ScenarioConfig {
                    output: OutputPaths {
                        csv: self.output.csv.as_ref().map(|_| format!("{name}.csv")),
                        svg: self.output.svg.as_ref().map(|_| format!("{name}.svg")),
                        report: self.output.report.as_ref().map(|_| format!("{name}.json")),
                    },
                    name,
                    hamiltonian: Some(sec),
                    sweep: vec![],
                    ..self.clone()
                })
            })
            .collect()
    }
}

fn sanitize(v: &str) -> String {
    v.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '.' || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn strip_prefix(e: &Error) -> String {
    match e {
        Error::Spec(m) | Error::Validation(m) | Error::Domain(m) => m.clone(),
        other => other.to_string(),
    }
}

fn fmt_matrix(m: &DMatrix<f64>) -> String {
    m.row_iter()
        .map(|r| r.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", "))
        .collect::<Vec<_>>()
        .join("; ")
}

/// Inverse of [`HamiltonianSection::build`].
pub fn section_from_spec(spec: &HamiltonianSpec) -> HamiltonianSection {
    let mut params = BTreeMap::new();
    let mut put = |k: &str, v: f64| {
        params.insert(k.to_string(), format!("{v:?}"));
    };
    match spec {
        HamiltonianSpec::StaticReal { .. } | HamiltonianSpec::GeneralComplexStatic { .. } => {}
        HamiltonianSpec::TwoLevel { e1, e2, v } => {
            put("e1", *e1);
            put("e2", *e2);
            put("v", *v);
        }
        HamiltonianSpec::LzLinear { e0, a, v } => {
            put("e0", *e0);
            put("a", *a);
            put("v", *v);
        }
        HamiltonianSpec::LzArctan { e0, v } => {
            put("e0", *e0);
            put("v", *v);
        }
        HamiltonianSpec::DissipativeTwoLevel {
            e1,
            e2,
            v,
            lambda1,
            lambda2,
        } => {
            put("e1", *e1);
            put("e2", *e2);
            put("v", *v);
            put("lambda1", *lambda1);
            put("lambda2", *lambda2);
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
            put("e1", *e1);
            put("e2", *e2);
            put("v", *v);
            put("lambda1", *lambda1);
            put("lambda2", *lambda2);
            put("mu1", *mu1);
            put("mu2", *mu2);
            put("omega_drive", *omega_drive);
        }
    }
    match spec {
        HamiltonianSpec::StaticReal { h } => {
            params.insert("h".into(), fmt_matrix(h));
        }
        HamiltonianSpec::GeneralComplexStatic { h_r, h_i } => {
            params.insert("h_r".into(), fmt_matrix(h_r));
            params.insert("h_i".into(), fmt_matrix(h_i));
        }
        _ => {}
    }
    HamiltonianSection {
        kind: spec.kind(),
        params,
    }
}
