//! Heisenberg-picture engine. Output modes are `a_p(z) = Σ_k U[p,k] a_k(0)`,
//! so photon numbers and their correlations follow from contracting the
//! initial moments with rows of the transfer matrix.
//!
//! `g2(p, q)` is the un-normalised, not normally ordered `⟨n_p n_q⟩`. It
//! differs from the normally ordered detection rate `⟨a_p† a_q† a_p a_q⟩` by
//! `δ_{pq} ⟨n_p⟩`.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{Spectrum, TransferMatrix};
use crate::states::MomentSet;

/// Imaginary parts above this are treated as a bug rather than round-off.
pub const IMAGINARY_TOLERANCE: f64 = 1e-8;

/// Observables at one propagation distance.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSample {
    pub z: f64,
    pub mean_photons: Vec<f64>,
    pub g2: BTreeMap<(usize, usize), f64>,
}

fn check_dims(u: &TransferMatrix, m: &MomentSet) -> Result<()> {
    if u.len() != m.num_modes() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            got: m.num_modes(),
        });
    }
    Ok(())
}

fn real_part(value: Complex64, what: &str) -> Result<f64> {
    if value.im.abs() > IMAGINARY_TOLERANCE * value.re.abs().max(1.0) {
        return Err(Error::NumericalInconsistency(format!(
            "{what} has imaginary part {:.3e}",
            value.im
        )));
    }
    Ok(value.re)
}

/// `⟨n_p(z)⟩ = Σ_{k,l} conj(U[p,k]) U[p,l] C[k,l]` for every `p`.
pub fn mean_photons(u: &TransferMatrix, m: &MomentSet) -> Result<Vec<f64>> {
    check_dims(u, m)?;
    let n = u.len();
    let c = m.second();
    (0..n)
        .map(|p| {
            let row: Vec<Complex64> = (0..n).map(|k| u.get(p, k)).collect();
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..n {
                let mut inner = Complex64::new(0.0, 0.0);
                for l in 0..n {
                    inner += row[l] * c[(k, l)];
                }
                acc += row[k].conj() * inner;
            }
            real_part(acc, "mean photon number")
        })
        .collect()
}

/// `⟨n_p(z) n_q(z)⟩`, the normally ordered fourth-moment contraction plus the
/// `δ_{pq} ⟨n_p(z)⟩` commutator term.
pub fn g2(u: &TransferMatrix, m: &MomentSet, p: usize, q: usize) -> Result<f64> {
    check_dims(u, m)?;
    let n = u.len();
    for idx in [p, q] {
        if idx >= n {
            return Err(Error::IndexOutOfRange { index: idx, len: n });
        }
    }
    // canonical order makes g2(p, q) and g2(q, p) bit-identical
    let (p, q) = key(p, q);
    let row_p: Vec<Complex64> = (0..n).map(|k| u.get(p, k)).collect();
    let row_q: Vec<Complex64> = (0..n).map(|k| u.get(q, k)).collect();
    let f = m.fourth_tensor();

    // Σ_{jklm} conj(U[p,j] U[q,k]) U[p,l] U[q,m] F[j,k,l,m]
    let mut acc = Complex64::new(0.0, 0.0);
    let mut idx = 0;
    for j in 0..n {
        for k in 0..n {
            let left = (row_p[j] * row_q[k]).conj();
            let mut inner = Complex64::new(0.0, 0.0);
            for l in 0..n {
                let mut s = Complex64::new(0.0, 0.0);
                for m in 0..n {
                    s += row_q[m] * f[idx];
                    idx += 1;
                }
                inner += row_p[l] * s;
            }
            acc += left * inner;
        }
    }
    let mut value = real_part(acc, "two-point correlation")?;
    if p == q {
        value += mean_photons_at(&row_p, m)?;
    }
    Ok(value)
}

fn mean_photons_at(row: &[Complex64], m: &MomentSet) -> Result<f64> {
    let n = row.len();
    let c = m.second();
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..n {
        for l in 0..n {
            acc += row[k].conj() * row[l] * c[(k, l)];
        }
    }
    real_part(acc, "mean photon number")
}

/// Symmetric pair key, smaller index first.
fn key(p: usize, q: usize) -> (usize, usize) {
    (p.min(q), p.max(q))
}

pub fn observables_at(
    u: &TransferMatrix,
    m: &MomentSet,
    pairs: &[(usize, usize)],
) -> Result<ObservableSample> {
    let mean = mean_photons(u, m)?;
    let mut g2_values = BTreeMap::new();
    for &(p, q) in pairs {
        let k = key(p, q);
        if let std::collections::btree_map::Entry::Vacant(slot) = g2_values.entry(k) {
            slot.insert(g2(u, m, k.0, k.1)?);
        }
    }
    Ok(ObservableSample {
        z: u.z(),
        mean_photons: mean,
        g2: g2_values,
    })
}

impl ObservableSample {
    /// `g²_{p,q}`, in either index order, if it was requested.
    pub fn g2(&self, p: usize, q: usize) -> Option<f64> {
        self.g2.get(&key(p, q)).copied()
    }

    pub fn total_photons(&self) -> f64 {
        self.mean_photons.iter().sum()
    }
}

/// Evaluates the observables on every point of `z_grid`, in grid order.
pub fn trace_observables(
    spectrum: &Spectrum,
    m: &MomentSet,
    z_grid: &[f64],
    pairs: &[(usize, usize)],
) -> Result<Vec<ObservableSample>> {
    if let Some(z) = z_grid.iter().find(|z| !z.is_finite()) {
        return Err(Error::InvalidParameter(format!("z grid contains {z}")));
    }
    z_grid
        .iter()
        .map(|&z| observables_at(&spectrum.transfer_matrix(z), m, pairs))
        .collect()
}
