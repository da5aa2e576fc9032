//! Lattice parameter sets for nearest-neighbour waveguide arrays.
//!
//! A lattice of `N` waveguides is described by the propagation-constant
//! detunings `omegas[j]` and the couplings `couplings[j]` between guides `j`
//! and `j + 1`. All quantities are in units where `g z` is dimensionless.
//!
//! Waveguides are indexed from 0. Labels such as `n_1`, `n_2` found in the
//! optics literature for the two-guide coupler correspond to indices 0 and 1.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Propagation constants and nearest-neighbour couplings of a lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    omegas: Vec<f64>,
    couplings: Vec<f64>,
}

impl LatticeSpec {
    /// Validates and wraps explicit parameters.
    pub fn new(omegas: Vec<f64>, couplings: Vec<f64>) -> Result<Self> {
        if omegas.len() < 2 {
            return Err(Error::InvalidSize(format!(
                "a lattice needs at least 2 waveguides, got {}",
                omegas.len()
            )));
        }
        if couplings.len() + 1 != omegas.len() {
            return Err(Error::InvalidSize(format!(
                "{} waveguides need {} couplings, got {}",
                omegas.len(),
                omegas.len() - 1,
                couplings.len()
            )));
        }
        if let Some(bad) = omegas.iter().chain(&couplings).find(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lattice parameters must be finite, got {bad}"
            )));
        }
        Ok(Self { omegas, couplings })
    }

    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    /// Always false; a valid lattice has at least two sites.
    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    /// Largest absolute entry of the one-photon coupling matrix.
    pub fn max_abs_entry(&self) -> f64 {
        self.omegas
            .iter()
            .chain(&self.couplings)
            .fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    /// Same lattice with one coupling sign flipped. Used for fault injection
    /// by the self-check suite.
    pub fn with_flipped_coupling(&self, j: usize) -> Self {
        let mut out = self.clone();
        if let Some(c) = out.couplings.get_mut(j) {
            *c = -*c;
        }
        out
    }
}

fn check_size(n: usize) -> Result<()> {
    if n < 2 {
        Err(Error::InvalidSize(format!(
            "a lattice needs at least 2 waveguides, got {n}"
        )))
    } else {
        Ok(())
    }
}

/// Identical detunings and identical couplings. The spectrum is given by the
/// zeros of the Chebyshev polynomial `U_N(λ/2g)`, shifted by `omega`.
pub fn make_uniform(n: usize, omega: f64, g: f64) -> Result<LatticeSpec> {
    check_size(n)?;
    LatticeSpec::new(vec![omega; n], vec![g; n - 1])
}

/// Glauber-Fock lattice, `g_j = g sqrt(j + 1)`. Its spectrum is given by
/// Hermite zeros.
pub fn make_glauber_fock(n: usize, omega: f64, g: f64) -> Result<LatticeSpec> {
    check_size(n)?;
    let couplings = (0..n - 1).map(|j| g * ((j + 1) as f64).sqrt()).collect();
    LatticeSpec::new(vec![omega; n], couplings)
}

/// Binary lattice with alternating detunings `omega (-1)^j`.
pub fn make_binary(n: usize, omega: f64, g: f64) -> Result<LatticeSpec> {
    check_size(n)?;
    let omegas = (0..n)
        .map(|j| if j % 2 == 0 { omega } else { -omega })
        .collect();
    LatticeSpec::new(omegas, vec![g; n - 1])
}

/// Engineered couplings `(π / 2 z_t) sqrt(j (N - j))`, `j = 1..N-1`, that
/// mirror-invert any excitation at distance `z_t`.
pub fn make_perfect_transfer(n: usize, z_t: f64) -> Result<LatticeSpec> {
    check_size(n)?;
    if !(z_t > 0.0 && z_t.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "transfer distance must be positive, got {z_t}"
        )));
    }
    let scale = PI / (2.0 * z_t);
    let couplings = (1..n)
        .map(|j| scale * ((j * (n - j)) as f64).sqrt())
        .collect();
    LatticeSpec::new(vec![0.0; n], couplings)
}

/// Truncation to `n` sites of the semi-infinite lattice with
/// `ω_j = (1 + ω²)(j + 1)` and `g_j = ω sqrt((j + 1)(j + 2))`.
///
/// The closed-form spectrum `(1 - ω²)(1 + j)` belongs to the semi-infinite
/// lattice; a finite truncation only approaches it for the low-lying levels
/// as `n` grows, and only for `|ω| < 1`.
pub fn make_jacobi_semi_infinite(n: usize, omega: f64) -> Result<LatticeSpec> {
    check_size(n)?;
    let diag = 1.0 + omega * omega;
    let omegas = (0..n).map(|j| diag * (j + 1) as f64).collect();
    let couplings = (0..n - 1)
        .map(|j| omega * (((j + 1) * (j + 2)) as f64).sqrt())
        .collect();
    LatticeSpec::new(omegas, couplings)
}

/// Closed-form diagonalisation of the two-waveguide coupler
/// `H = Δ n_0 + g (a_0† a_1 + a_0 a_1†)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplerParams {
    pub delta: f64,
    pub g: f64,
    pub omega: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma1: f64,
    pub gamma2: f64,
}

impl CouplerParams {
    /// The coupler as a generic two-site lattice.
    pub fn lattice(&self) -> LatticeSpec {
        LatticeSpec {
            omegas: vec![self.delta, 0.0],
            couplings: vec![self.g],
        }
    }
}

pub fn coupler_params(delta: f64, g: f64) -> Result<CouplerParams> {
    if !(g > 0.0 && g.is_finite()) || !delta.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "coupler needs finite delta and g > 0, got delta={delta}, g={g}"
        )));
    }
    let omega = (delta * delta + 4.0 * g * g).sqrt();
    // Ω ± Δ without cancellation: (Ω - Δ)(Ω + Δ) = 4g²
    let (omega_minus, omega_plus) = if delta > 0.0 {
        let plus = omega + delta;
        (4.0 * g * g / plus, plus)
    } else {
        let minus = omega - delta;
        (minus, 4.0 * g * g / minus)
    };
    let alpha = 2.0 * g / (2.0 * omega * omega_minus).sqrt();
    let beta = (omega_minus / (2.0 * omega)).sqrt();
    Ok(CouplerParams {
        delta,
        g,
        omega,
        alpha,
        beta,
        gamma1: omega_plus / 2.0,
        gamma2: -omega_minus / 2.0,
    })
}

/// Single photon launched into guide 0 of an identical-guide coupler.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinglePhotonOracle {
    pub n0: f64,
    pub n1: f64,
    pub fidelity: f64,
}

/// Closed-form mean photon numbers and return fidelity of `|1,0⟩` in the
/// coupler. The photon-number expressions hold for `Δ = 0` only.
pub fn coupler_single_photon_oracle(params: &CouplerParams, z: f64) -> Result<SinglePhotonOracle> {
    if params.delta != 0.0 {
        return Err(Error::UnsupportedCombination(format!(
            "single-photon closed forms need identical guides (delta = 0), got {}",
            params.delta
        )));
    }
    let (s, c) = (params.g * z).sin_cos();
    let amp = Complex64::from_polar(params.beta * params.beta, -params.gamma1 * z)
        + Complex64::from_polar(params.alpha * params.alpha, -params.gamma2 * z);
    Ok(SinglePhotonOracle {
        n0: c * c,
        n1: s * s,
        fidelity: amp.norm(),
    })
}
