//! Sampling observables along a z grid and writing them as CSV.

use std::fmt::Write as _;

use crate::config::{Engine, FidelityTarget, RunConfig};
use crate::error::{Error, Result};
use crate::fockspace::{self, FockPropagator};
use crate::lattice::LatticeSpec;
use crate::moments;
use crate::spectral::{eigendecompose, Spectrum};
use crate::states::{moments_of, FockBasis, FockState, MomentSet};

/// One row of output.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub z: f64,
    pub mean_photons: Vec<f64>,
    pub fidelities: Vec<f64>,
    /// In the order of [`PropagationTrace::pairs`].
    pub g2: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationTrace {
    pub num_modes: usize,
    pub targets: Vec<FidelityTarget>,
    pub pairs: Vec<(usize, usize)>,
    pub engine: Engine,
    /// Probability discarded when the initial state was truncated; zero for
    /// the moments engine.
    pub tail_mass: f64,
    /// Largest disagreement between the engines, for `engine = both`.
    pub engine_gap: Option<f64>,
    pub rows: Vec<TraceRow>,
}

/// Twelve significant digits, `-0` printed as `0`.
pub fn format_number(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.11e}")
}

impl PropagationTrace {
    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["z".to_string()];
        h.extend((0..self.num_modes).map(|j| format!("n_{j}")));
        h.extend(self.targets.iter().map(|t| format!("F_{t}")));
        h.extend(self.pairs.iter().map(|(p, q)| format!("g2_{p}_{q}")));
        h
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header().join(",");
        out.push('\n');
        for row in &self.rows {
            let cells = std::iter::once(row.z)
                .chain(row.mean_photons.iter().copied())
                .chain(row.fidelities.iter().copied())
                .chain(row.g2.iter().copied())
                .map(format_number)
                .collect::<Vec<_>>();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Observables from the moments engine on every grid point.
pub fn moments_rows(
    spectrum: &Spectrum,
    m: &MomentSet,
    z_grid: &[f64],
    pairs: &[(usize, usize)],
) -> Result<Vec<TraceRow>> {
    let samples = moments::trace_observables(spectrum, m, z_grid, pairs)?;
    Ok(samples
        .into_iter()
        .map(|s| TraceRow {
            z: s.z,
            g2: pairs
                .iter()
                .map(|&(p, q)| s.g2(p, q).expect("requested pair"))
                .collect(),
            mean_photons: s.mean_photons,
            fidelities: Vec::new(),
        })
        .collect())
}

/// Observables and fidelities from the Fock engine on every grid point.
pub fn fock_rows(
    spec: &LatticeSpec,
    initial: &FockState,
    z_grid: &[f64],
    pairs: &[(usize, usize)],
    targets: &[FidelityTarget],
) -> Result<Vec<TraceRow>> {
    let propagator = FockPropagator::new(spec, initial.basis())?;
    let mirror = fockspace::mirror_state(initial);
    z_grid
        .iter()
        .map(|&z| {
            let psi = propagator.evolve(initial, z)?;
            let fidelities = targets
                .iter()
                .map(|t| match t {
                    FidelityTarget::Initial => fockspace::fidelity(initial, &psi),
                    FidelityTarget::Mirror => fockspace::fidelity(&mirror, &psi),
                })
                .collect::<Result<_>>()?;
            let g2 = pairs
                .iter()
                .map(|&(p, q)| fockspace::expectation_g2(&psi, p, q))
                .collect::<Result<_>>()?;
            Ok(TraceRow {
                z,
                mean_photons: fockspace::expectation_all_n(&psi),
                fidelities,
                g2,
            })
        })
        .collect()
}

/// Largest absolute difference in photon numbers and correlations.
pub fn max_gap(a: &[TraceRow], b: &[TraceRow]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| {
            let n = x.mean_photons.iter().zip(&y.mean_photons);
            let g = x.g2.iter().zip(&y.g2);
            n.chain(g).map(|(u, v)| (u - v).abs())
        })
        .fold(0.0, f64::max)
}

/// Agreement demanded of the two engines on the same truncated state.
pub fn engine_tolerance(tail_mass: f64) -> f64 {
    (10.0 * tail_mass).max(1e-8)
}

pub fn propagate(config: &RunConfig) -> Result<PropagationTrace> {
    config.validate()?;
    let spec = config.lattice.build()?;
    let n = spec.len();
    let z_grid = config.z_grid.points();
    let pairs = config.pair_list();

    let truncated = || -> Result<FockState> {
        let basis = FockBasis::new(n, config.n_max)?;
        config.state.build(&basis)
    };

    let (rows, tail_mass, engine_gap) = match config.engine {
        Engine::Moments => {
            // the untruncated moments are exact, so no tail here
            let m = config.state.analytic_moments(n)?;
            (
                moments_rows(&eigendecompose(&spec)?, &m, &z_grid, &pairs)?,
                0.0,
                None,
            )
        }
        Engine::Fock => {
            let state = truncated()?;
            let rows = fock_rows(&spec, &state, &z_grid, &pairs, &config.fidelity_targets)?;
            (rows, state.tail_mass(), None)
        }
        Engine::Both => {
            let state = truncated()?;
            let fock = fock_rows(&spec, &state, &z_grid, &pairs, &config.fidelity_targets)?;
            let mut rows = moments_rows(
                &eigendecompose(&spec)?,
                &moments_of(&state),
                &z_grid,
                &pairs,
            )?;
            let gap = max_gap(&rows, &fock);
            let tol = engine_tolerance(state.tail_mass());
            if gap.is_nan() || gap > tol {
                return Err(Error::NumericalInconsistency(format!(
                    "engines disagree by {gap:.3e} (tolerance {tol:.3e})"
                )));
            }
            for (row, f) in rows.iter_mut().zip(fock) {
                row.fidelities = f.fidelities;
            }
            (rows, state.tail_mass(), Some(gap))
        }
    };

    Ok(PropagationTrace {
        num_modes: n,
        targets: config.fidelity_targets.clone(),
        pairs,
        engine: config.engine,
        tail_mass,
        engine_gap,
        rows,
    })
}

/// `k,lambda,v_0,…` with one row per eigenvalue, ascending.
pub fn spectrum_csv(spectrum: &Spectrum) -> String {
    let n = spectrum.len();
    let mut out = String::from("k,lambda");
    for j in 0..n {
        write!(out, ",v_{j}").unwrap();
    }
    out.push('\n');
    for (k, &lambda) in spectrum.eigenvalues().iter().enumerate() {
        write!(out, "{k},{}", format_number(lambda)).unwrap();
        for v in spectrum.eigenvector(k) {
            write!(out, ",{}", format_number(v)).unwrap();
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::make_uniform;
    use crate::presets;

    #[test]
    fn number_format() {
        assert_eq!(format_number(1.0), "1.00000000000e0");
        assert_eq!(format_number(-0.0), "0.00000000000e0");
        assert_eq!(format_number(-1.5e-17), "-1.50000000000e-17");
        assert_eq!(format_number(0.1234567890125), "1.23456789012e-1");
    }

    #[test]
    fn uniform_pair_spectrum() {
        let s = eigendecompose(&make_uniform(2, 0.0, 1.0).unwrap()).unwrap();
        let csv = spectrum_csv(&s);
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "k,lambda,v_0,v_1");
        assert_eq!(
            lines[1],
            "0,-1.00000000000e0,7.07106781187e-1,-7.07106781187e-1"
        );
        assert_eq!(
            lines[2],
            "1,1.00000000000e0,7.07106781187e-1,7.07106781187e-1"
        );
    }

    #[test]
    fn single_photon_rows() {
        let mut c = presets::load("fig1_row1").unwrap();
        c.z_grid.steps = 11;
        let t = propagate(&c).unwrap();
        let csv = t.to_csv();
        let header = csv.lines().next().unwrap();
        assert_eq!(header, "z,n_0,n_1,F_initial,F_mirror,g2_0_0,g2_0_1,g2_1_1");
        for line in csv.lines() {
            assert_eq!(line.split(',').count(), c.column_count().unwrap());
        }
        for row in &t.rows {
            assert!((row.mean_photons[0] - row.z.cos().powi(2)).abs() < 1e-10);
            assert!((row.fidelities[0] - row.z.cos().abs()).abs() < 1e-10);
        }
        assert!(t.engine_gap.unwrap() < 1e-12);
    }

    #[test]
    fn two_steps_start_from_initial_condition() {
        let mut c = presets::load("fig2_row2").unwrap();
        c.z_grid.steps = 2;
        let t = propagate(&c).unwrap();
        assert_eq!(t.rows.len(), 2);
        let first = &t.rows[0];
        assert_eq!(first.z, 0.0);
        assert!((first.mean_photons[0] - 1.0).abs() < 1e-8);
        assert!((first.fidelities[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn squeezed_vacuum_does_not_transfer() {
        let mut c = presets::load("fig2_row4").unwrap();
        c.z_grid = crate::config::ZGrid {
            start: 0.0,
            stop: 1.0,
            steps: 2,
        };
        let t = propagate(&c).unwrap();
        assert!(t.rows[1].fidelities[1] < 0.99);
    }

    #[test]
    fn engines_give_the_same_columns() {
        let mut c = presets::load("fig1_row3").unwrap();
        c.z_grid.steps = 5;
        c.fidelity_targets.clear();
        let by = |engine| {
            let mut c = c.clone();
            c.engine = engine;
            propagate(&c).unwrap()
        };
        let m = by(Engine::Moments);
        let f = by(Engine::Fock);
        assert!(max_gap(&m.rows, &f.rows) < 1e-12);
        assert_eq!(m.header(), f.header());
    }
}
