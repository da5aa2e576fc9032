//! Run configuration read from a JSON file.
//!
//! ```json
//! {
//!   "lattice": { "explicit": { "omegas": [0, 0], "couplings": [1] } },
//!   "state": { "kind": "fock", "occupation": [1, 0] },
//!   "z_grid": { "start": 0, "stop": 6.283185307179586, "steps": 201 },
//!   "n_max": 12,
//!   "pairs": [[0, 1]],
//!   "fidelity_targets": ["initial", "mirror"],
//!   "engine": "both"
//! }
//! ```
//!
//! Named families replace the `explicit` object with
//! `{"family": "uniform", "n": 8, "omega": 0, "g": 1}` and so on.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{self, LatticeSpec};
use crate::states::{self, FockBasis, FockState, MomentSet, DEFAULT_MAX_TOTAL};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub lattice: LatticeConfig,
    pub state: StateConfig,
    pub z_grid: ZGrid,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default)]
    pub pairs: Vec<[usize; 2]>,
    #[serde(default)]
    pub fidelity_targets: Vec<FidelityTarget>,
    #[serde(default)]
    pub engine: Engine,
}

fn default_n_max() -> usize {
    DEFAULT_MAX_TOTAL
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, try_from = "serde_json::Value")]
pub enum LatticeConfig {
    Explicit { explicit: ExplicitLattice },
    Family(LatticeFamily),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitLattice {
    pub omegas: Vec<f64>,
    pub couplings: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum LatticeFamily {
    Uniform { n: usize, omega: f64, g: f64 },
    GlauberFock { n: usize, omega: f64, g: f64 },
    Binary { n: usize, omega: f64, g: f64 },
    PerfectTransfer { n: usize, z_t: f64 },
    JacobiSemiInfinite { n: usize, omega: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateConfig {
    Fock { occupation: Vec<u32> },
    Coherent { alphas: Vec<ComplexValue> },
    PathEntangled { modes: [usize; 2] },
    Tmsv { modes: [usize; 2], r: f64 },
}

/// A real number or a `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexValue {
    Real(f64),
    Pair([f64; 2]),
}

impl From<ComplexValue> for Complex64 {
    fn from(v: ComplexValue) -> Self {
        match v {
            ComplexValue::Real(x) => Complex64::new(x, 0.0),
            ComplexValue::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZGrid {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl ZGrid {
    /// `steps` evenly spaced points including both ends.
    pub fn points(&self) -> Vec<f64> {
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                if i + 1 == self.steps {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * (i as f64 / last)
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FidelityTarget {
    Initial,
    Mirror,
}

impl fmt::Display for FidelityTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Initial => "initial",
            Self::Mirror => "mirror",
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Moments,
    Fock,
    #[default]
    Both,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Moments => "moments",
            Self::Fock => "fock",
            Self::Both => "both",
        })
    }
}

/// Parses JSON with the failing field path and position in the message.
fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." || path.is_empty() {
            Error::Config(inner.to_string())
        } else {
            Error::Config(format!("{path}: {inner}"))
        }
    })
}

// untagged matching would hide which field is wrong
impl TryFrom<serde_json::Value> for LatticeConfig {
    type Error = String;

    fn try_from(v: serde_json::Value) -> std::result::Result<Self, String> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Outer {
            explicit: ExplicitLattice,
        }
        if v.get("explicit").is_some() {
            let o: Outer = serde_json::from_value(v).map_err(|e| format!("explicit: {e}"))?;
            Ok(Self::Explicit {
                explicit: o.explicit,
            })
        } else if v.get("family").is_some() {
            serde_json::from_value(v)
                .map(Self::Family)
                .map_err(|e| e.to_string())
        } else {
            Err("expected an `explicit` object or a `family` tag".into())
        }
    }
}

impl LatticeConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        parse(text)
    }

    pub fn build(&self) -> Result<LatticeSpec> {
        match self {
            Self::Explicit { explicit } => {
                LatticeSpec::new(explicit.omegas.clone(), explicit.couplings.clone())
            }
            Self::Family(f) => match *f {
                LatticeFamily::Uniform { n, omega, g } => lattice::make_uniform(n, omega, g),
                LatticeFamily::GlauberFock { n, omega, g } => {
                    lattice::make_glauber_fock(n, omega, g)
                }
                LatticeFamily::Binary { n, omega, g } => lattice::make_binary(n, omega, g),
                LatticeFamily::PerfectTransfer { n, z_t } => lattice::make_perfect_transfer(n, z_t),
                LatticeFamily::JacobiSemiInfinite { n, omega } => {
                    lattice::make_jacobi_semi_infinite(n, omega)
                }
            },
        }
    }
}

/// Only the lattice section, as `spectrum` needs; other keys are ignored.
#[derive(Debug, Deserialize)]
struct LatticeOnly {
    lattice: LatticeConfig,
}

pub fn lattice_from_json(text: &str) -> Result<LatticeConfig> {
    parse::<LatticeOnly>(text).map(|c| c.lattice)
}

impl StateConfig {
    /// Modes that must exist for the state to make sense.
    fn check_modes(&self, n: usize) -> Result<()> {
        let len_mismatch = |got: usize| {
            Err(Error::Config(format!(
                "state: expected one entry per waveguide ({n}), got {got}"
            )))
        };
        match self {
            Self::Fock { occupation } if occupation.len() != n => len_mismatch(occupation.len()),
            Self::Coherent { alphas } if alphas.len() != n => len_mismatch(alphas.len()),
            Self::PathEntangled { modes } | Self::Tmsv { modes, .. } => {
                if modes.iter().any(|&m| m >= n) {
                    return Err(Error::Config(format!(
                        "state.modes: {modes:?} out of range for {n} waveguides"
                    )));
                }
                if modes[0] == modes[1] {
                    return Err(Error::Config(format!(
                        "state.modes: {modes:?} must be distinct"
                    )));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Fewest total photons the truncated basis must hold.
    fn min_photons(&self) -> usize {
        match self {
            Self::Fock { occupation } => occupation.iter().map(|&k| k as usize).sum(),
            Self::PathEntangled { .. } => 1,
            Self::Coherent { .. } | Self::Tmsv { .. } => 0,
        }
    }

    pub fn build(&self, basis: &Arc<FockBasis>) -> Result<FockState> {
        match self {
            Self::Fock { occupation } => states::build_fock(basis, occupation),
            Self::Coherent { alphas } => {
                let a: Vec<Complex64> = alphas.iter().map(|&v| v.into()).collect();
                states::build_coherent(basis, &a)
            }
            Self::PathEntangled { modes } => {
                states::build_path_entangled(basis, modes[0], modes[1])
            }
            Self::Tmsv { modes, r } => states::build_tmsv(basis, modes[0], modes[1], *r),
        }
    }

    /// Moments of the untruncated state.
    pub fn analytic_moments(&self, n: usize) -> Result<MomentSet> {
        match self {
            Self::Fock { occupation } => Ok(states::analytic_moments_fock(occupation)),
            Self::Coherent { alphas } => {
                let a: Vec<Complex64> = alphas.iter().map(|&v| v.into()).collect();
                Ok(states::analytic_moments_coherent(&a))
            }
            Self::PathEntangled { modes } => {
                states::analytic_moments_path_entangled(modes[0], modes[1], n)
            }
            Self::Tmsv { modes, r } => states::analytic_moments_tmsv(*r, modes[0], modes[1], n),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = parse(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<()> {
        let z = &self.z_grid;
        if z.steps < 2 {
            return Err(Error::Config(format!(
                "z_grid.steps: need at least 2, got {}",
                z.steps
            )));
        }
        if !(z.start.is_finite() && z.stop.is_finite()) {
            return Err(Error::Config(
                "z_grid: start and stop must be finite".into(),
            ));
        }
        if z.start >= z.stop {
            return Err(Error::Config(format!(
                "z_grid: start ({}) must be below stop ({})",
                z.start, z.stop
            )));
        }

        let spec = self
            .lattice
            .build()
            .map_err(|e| Error::Config(format!("lattice: {e}")))?;
        let n = spec.len();
        self.state.check_modes(n)?;
        if self.state.min_photons() > self.n_max {
            return Err(Error::Config(format!(
                "n_max: {} cannot hold the {} photons of the initial state",
                self.n_max,
                self.state.min_photons()
            )));
        }
        if let Some(p) = self.pairs.iter().find(|p| p.iter().any(|&i| i >= n)) {
            return Err(Error::Config(format!(
                "pairs: {p:?} out of range for {n} waveguides"
            )));
        }
        if self.engine == Engine::Moments && !self.fidelity_targets.is_empty() {
            return Err(Error::UnsupportedCombination(
                "fidelities need the Fock engine; use engine \"fock\" or \"both\"".into(),
            ));
        }
        Ok(())
    }

    pub fn pair_list(&self) -> Vec<(usize, usize)> {
        self.pairs.iter().map(|&[p, q]| (p, q)).collect()
    }

    /// `1 + N + |fidelity_targets| + |pairs|`.
    pub fn column_count(&self) -> Result<usize> {
        Ok(1 + self.lattice.build()?.len() + self.fidelity_targets.len() + self.pairs.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG1: &str = r#"{
        "lattice": { "explicit": { "omegas": [0, 0], "couplings": [1] } },
        "state": { "kind": "fock", "occupation": [1, 0] },
        "z_grid": { "start": 0, "stop": 1, "steps": 3 },
        "pairs": [[0, 1]],
        "fidelity_targets": ["initial"]
    }"#;

    fn err_of(text: &str) -> String {
        RunConfig::from_json(text).unwrap_err().to_string()
    }

    #[test]
    fn parses_with_defaults() {
        let c = RunConfig::from_json(FIG1).unwrap();
        assert_eq!(c.n_max, 12);
        assert_eq!(c.engine, Engine::Both);
        assert_eq!(c.column_count().unwrap(), 5);
        assert_eq!(c.z_grid.points(), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn families() {
        let l = LatticeConfig::from_json(r#"{"family":"perfect_transfer","n":4,"z_t":1}"#).unwrap();
        assert_eq!(l.build().unwrap().len(), 4);
        let l =
            LatticeConfig::from_json(r#"{"family":"glauber_fock","n":5,"omega":0,"g":1}"#).unwrap();
        assert_eq!(l.build().unwrap().couplings()[3], 2.0);
        assert!(LatticeConfig::from_json(r#"{"family":"ring","n":5}"#).is_err());
    }

    #[test]
    fn complex_alphas() {
        let s: StateConfig =
            serde_json::from_str(r#"{"kind":"coherent","alphas":[1,[0,0.5]]}"#).unwrap();
        let m = s.analytic_moments(2).unwrap();
        assert!((m.second()[(1, 1)].re - 0.25).abs() < 1e-15);
    }

    #[test]
    fn diagnostics_name_the_field() {
        let e = err_of(&FIG1.replace("\"steps\": 3", "\"steps\": \"three\""));
        assert!(e.contains("z_grid.steps"), "{e}");
        assert!(e.contains("line"), "{e}");
        let e = err_of(&FIG1.replace("\"steps\": 3", "\"steps\": 1"));
        assert!(e.contains("z_grid.steps"), "{e}");
        let e = err_of(&FIG1.replace("\"start\": 0", "\"start\": 2"));
        assert!(e.contains("start"), "{e}");
        let e = err_of(&FIG1.replace("[[0, 1]]", "[[0, 2]]"));
        assert!(e.contains("pairs"), "{e}");
        let e = err_of(&FIG1.replace("[1, 0]", "[1, 0, 0]"));
        assert!(e.contains("state"), "{e}");
        let e = err_of(&FIG1.replace("\"pairs\"", "\"pears\""));
        assert!(e.contains("pears"), "{e}");
    }

    #[test]
    fn fidelity_without_fock_engine_is_rejected() {
        let text = FIG1.replace("\"pairs\"", "\"engine\": \"moments\", \"pairs\"");
        let e = RunConfig::from_json(&text).unwrap_err();
        assert!(matches!(e, Error::UnsupportedCombination(_)));
        assert!(e.is_config_error());
    }

    #[test]
    fn n_max_must_hold_fock_state() {
        let text = FIG1
            .replace("[1, 0]", "[3, 2]")
            .replace("\"pairs\"", "\"n_max\": 4, \"pairs\"");
        assert!(err_of(&text).contains("n_max"));
    }

    #[test]
    fn round_trip() {
        let c = RunConfig::from_json(FIG1).unwrap();
        assert_eq!(RunConfig::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn grid_ends_exactly_at_stop() {
        let g = ZGrid {
            start: 0.0,
            stop: std::f64::consts::TAU,
            steps: 201,
        };
        let p = g.points();
        assert_eq!(p.len(), 201);
        assert_eq!(p[200], std::f64::consts::TAU);
        assert_eq!(p[100], std::f64::consts::PI);
    }
}
