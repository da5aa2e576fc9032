//! Schrödinger-picture engine over a truncated occupation basis.
//!
//! The lattice Hamiltonian conserves the total photon number, so it is
//! block diagonal in the sectors of [`FockBasis`]. Each block is
//! diagonalised once and reused for every propagation distance:
//! `ψ_n(z) = W_n e^{-iΛ_n z} W_nᵀ ψ_n(0)`.

use std::ops::Range;
use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::LatticeSpec;
use crate::states::{sector_dimension, FockBasis, FockState};

/// Largest sector we diagonalise densely.
pub const DEFAULT_SECTOR_CAP: usize = 20_000;

/// The Hamiltonian restricted to the sector with `total_photons` photons.
#[derive(Debug, Clone)]
pub struct SectorHamiltonian {
    pub total_photons: usize,
    /// Basis indices spanned by the sector.
    pub range: Range<usize>,
    pub matrix: DMatrix<f64>,
}

pub fn build_sector_hamiltonian(
    spec: &LatticeSpec,
    basis: &FockBasis,
    photons: usize,
) -> Result<SectorHamiltonian> {
    build_sector_hamiltonian_capped(spec, basis, photons, DEFAULT_SECTOR_CAP)
}

pub fn build_sector_hamiltonian_capped(
    spec: &LatticeSpec,
    basis: &FockBasis,
    photons: usize,
    cap: usize,
) -> Result<SectorHamiltonian> {
    let modes = spec.len();
    if basis.num_modes() != modes {
        return Err(Error::DimensionMismatch {
            expected: modes,
            got: basis.num_modes(),
        });
    }
    if photons > basis.max_total() {
        return Err(Error::InvalidParameter(format!(
            "sector {photons} is above the basis truncation {}",
            basis.max_total()
        )));
    }
    let dim = sector_dimension(photons, modes);
    if dim > cap as u128 {
        return Err(Error::Capacity {
            photons,
            dim: usize::try_from(dim).unwrap_or(usize::MAX),
            cap,
        });
    }

    let range = basis.sector(photons);
    let offset = range.start;
    let d = range.len();
    let mut h = DMatrix::zeros(d, d);
    let mut occ = vec![0u32; modes];
    for (row, i) in range.clone().enumerate() {
        let source = basis.occupation(i);
        h[(row, row)] = source
            .iter()
            .zip(spec.omegas())
            .map(|(&n, &w)| w * n as f64)
            .sum();
        // g_j a_j† a_{j+1}; the Hermitian partner fills the transpose
        for (j, &g) in spec.couplings().iter().enumerate() {
            if source[j + 1] == 0 || g == 0.0 {
                continue;
            }
            occ.copy_from_slice(source);
            let amp = g * ((occ[j + 1] as f64) * (occ[j] as f64 + 1.0)).sqrt();
            occ[j] += 1;
            occ[j + 1] -= 1;
            let col = basis.lookup(&occ).expect("number-conserving") - offset;
            h[(col, row)] += amp;
            h[(row, col)] += amp;
        }
    }
    Ok(SectorHamiltonian {
        total_photons: photons,
        range,
        matrix: h,
    })
}

#[derive(Debug)]
struct SectorEigen {
    range: Range<usize>,
    energies: Vec<f64>,
    vectors: DMatrix<f64>,
}

impl SectorEigen {
    fn new(h: SectorHamiltonian) -> Result<Self> {
        let d = h.matrix.nrows();
        let eig = SymmetricEigen::try_new(h.matrix, f64::EPSILON, 100 * d.max(1)).ok_or(
            Error::Convergence {
                iterations: 100 * d.max(1),
            },
        )?;
        Ok(Self {
            range: h.range,
            energies: eig.eigenvalues.iter().copied().collect(),
            vectors: eig.eigenvectors,
        })
    }

    fn evolve(&self, psi: &[Complex64], z: f64, out: &mut [Complex64]) {
        let w = &self.vectors;
        let re = DVector::from_iterator(psi.len(), psi.iter().map(|c| c.re));
        let im = DVector::from_iterator(psi.len(), psi.iter().map(|c| c.im));
        let mut a = w.tr_mul(&re);
        let mut b = w.tr_mul(&im);
        for ((x, y), &e) in a.iter_mut().zip(b.iter_mut()).zip(&self.energies) {
            let c = Complex64::new(*x, *y) * Complex64::from_polar(1.0, -e * z);
            (*x, *y) = (c.re, c.im);
        }
        let re = w * a;
        let im = w * b;
        for (o, (x, y)) in out.iter_mut().zip(re.iter().zip(im.iter())) {
            *o = Complex64::new(*x, *y);
        }
    }
}

/// Per-sector eigendecompositions of one lattice Hamiltonian, computed on
/// first use and shared by every later evolution.
#[derive(Debug)]
pub struct FockPropagator {
    spec: LatticeSpec,
    basis: Arc<FockBasis>,
    cap: usize,
    sectors: Vec<OnceLock<SectorEigen>>,
}

impl FockPropagator {
    pub fn new(spec: &LatticeSpec, basis: &Arc<FockBasis>) -> Result<Self> {
        Self::with_cap(spec, basis, DEFAULT_SECTOR_CAP)
    }

    pub fn with_cap(spec: &LatticeSpec, basis: &Arc<FockBasis>, cap: usize) -> Result<Self> {
        if basis.num_modes() != spec.len() {
            return Err(Error::DimensionMismatch {
                expected: spec.len(),
                got: basis.num_modes(),
            });
        }
        Ok(Self {
            spec: spec.clone(),
            basis: basis.clone(),
            cap,
            sectors: (0..=basis.max_total()).map(|_| OnceLock::new()).collect(),
        })
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    fn sector(&self, photons: usize) -> Result<&SectorEigen> {
        if let Some(s) = self.sectors[photons].get() {
            return Ok(s);
        }
        let h = build_sector_hamiltonian_capped(&self.spec, &self.basis, photons, self.cap)?;
        let eig = SectorEigen::new(h)?;
        Ok(self.sectors[photons].get_or_init(|| eig))
    }

    /// Eigenvalues of the sector Hamiltonian, ascending.
    pub fn sector_energies(&self, photons: usize) -> Result<Vec<f64>> {
        let mut e = self.sector(photons)?.energies.clone();
        e.sort_by(f64::total_cmp);
        Ok(e)
    }

    pub fn evolve(&self, state: &FockState, z: f64) -> Result<FockState> {
        if !state.basis().same_space(&self.basis) {
            return Err(Error::BasisMismatch);
        }
        let psi = state.amplitudes();
        let mut out = vec![Complex64::new(0.0, 0.0); psi.len()];
        for photons in 0..=self.basis.max_total() {
            let range = self.basis.sector(photons);
            if psi[range.clone()].iter().all(|c| c.norm_sqr() == 0.0) {
                continue;
            }
            let sector = self.sector(photons)?;
            debug_assert_eq!(sector.range, range);
            sector.evolve(&psi[range.clone()], z, &mut out[range]);
        }
        FockState::from_amplitudes(state.basis().clone(), out, state.tail_mass())
    }
}

/// One-shot evolution; prefer [`FockPropagator`] when sampling many `z`.
pub fn evolve(spec: &LatticeSpec, state: &FockState, z: f64) -> Result<FockState> {
    FockPropagator::new(spec, state.basis())?.evolve(state, z)
}

/// `|⟨target|evolved⟩|`.
pub fn fidelity(target: &FockState, evolved: &FockState) -> Result<f64> {
    if !target.basis().same_space(evolved.basis()) {
        return Err(Error::BasisMismatch);
    }
    let overlap: Complex64 = target
        .amplitudes()
        .iter()
        .zip(evolved.amplitudes())
        .map(|(a, b)| a.conj() * b)
        .sum();
    Ok(overlap.norm())
}

/// Reverses every occupation vector, `j → N-1-j`, keeping amplitudes.
pub fn mirror_state(state: &FockState) -> FockState {
    let basis = state.basis();
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); basis.len()];
    let mut occ = vec![0u32; basis.num_modes()];
    for (i, &c) in state.amplitudes().iter().enumerate() {
        occ.copy_from_slice(basis.occupation(i));
        occ.reverse();
        let t = basis.lookup(&occ).expect("reversal preserves the basis");
        amplitudes[t] = c;
    }
    FockState::from_amplitudes(basis.clone(), amplitudes, state.tail_mass()).expect("same basis")
}

fn check_mode(state: &FockState, j: usize) -> Result<()> {
    let len = state.num_modes();
    if j < len {
        Ok(())
    } else {
        Err(Error::IndexOutOfRange { index: j, len })
    }
}

/// `⟨n_j⟩`.
pub fn expectation_n(state: &FockState, j: usize) -> Result<f64> {
    check_mode(state, j)?;
    let basis = state.basis();
    Ok(state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(i, c)| c.norm_sqr() * basis.occupation(i)[j] as f64)
        .sum())
}

/// `⟨n_p n_q⟩`, not normally ordered.
pub fn expectation_g2(state: &FockState, p: usize, q: usize) -> Result<f64> {
    check_mode(state, p)?;
    check_mode(state, q)?;
    let basis = state.basis();
    Ok(state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let occ = basis.occupation(i);
            c.norm_sqr() * occ[p] as f64 * occ[q] as f64
        })
        .sum())
}

/// All `⟨n_j⟩` in one pass.
pub fn expectation_all_n(state: &FockState) -> Vec<f64> {
    let basis = state.basis();
    let mut out = vec![0.0; basis.num_modes()];
    for (i, c) in state.amplitudes().iter().enumerate() {
        let w = c.norm_sqr();
        for (o, &n) in out.iter_mut().zip(basis.occupation(i)) {
            *o += w * n as f64;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::*;
    use crate::spectral::jacobi_matrix;
    use crate::states::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI, SQRT_2};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn one_photon_sector_is_the_jacobi_matrix() {
        let spec = make_glauber_fock(5, 0.3, 0.8).unwrap();
        let basis = FockBasis::new(5, 2).unwrap();
        let h = build_sector_hamiltonian(&spec, &basis, 1).unwrap();
        assert_eq!(h.matrix, jacobi_matrix(&spec));

        let coupler = make_uniform(2, 0.0, 1.0).unwrap();
        let basis = FockBasis::new(2, 2).unwrap();
        let h = build_sector_hamiltonian(&coupler, &basis, 1).unwrap();
        assert_eq!(
            h.matrix,
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])
        );
    }

    #[test]
    fn two_photon_coupler_sector() {
        let coupler = make_uniform(2, 0.0, 1.0).unwrap();
        let basis = FockBasis::new(2, 2).unwrap();
        let h = build_sector_hamiltonian(&coupler, &basis, 2).unwrap();
        #[rustfmt::skip]
        let expected = DMatrix::from_row_slice(3, 3, &[
            0.0, SQRT_2, 0.0,
            SQRT_2, 0.0, SQRT_2,
            0.0, SQRT_2, 0.0,
        ]);
        assert!((h.matrix - expected).amax() < 1e-15);
    }

    #[test]
    fn vacuum_sector_is_zero() {
        let spec = make_binary(3, 0.4, 1.0).unwrap();
        let basis = FockBasis::new(3, 2).unwrap();
        let h = build_sector_hamiltonian(&spec, &basis, 0).unwrap();
        assert_eq!(h.matrix, DMatrix::zeros(1, 1));
    }

    #[test]
    fn sector_matrices_are_symmetric_with_number_diagonal() {
        let spec = LatticeSpec::new(vec![0.2, -0.1, 0.5, 0.0], vec![0.7, 1.1, 0.3]).unwrap();
        let basis = FockBasis::new(4, 5).unwrap();
        for n in 0..=5 {
            let h = build_sector_hamiltonian(&spec, &basis, n).unwrap();
            assert!((&h.matrix - h.matrix.transpose()).amax() < 1e-14);
            for (row, i) in h.range.clone().enumerate() {
                let diag: f64 = basis
                    .occupation(i)
                    .iter()
                    .zip(spec.omegas())
                    .map(|(&k, w)| k as f64 * w)
                    .sum();
                assert_eq!(h.matrix[(row, row)], diag);
            }
        }
    }

    #[test]
    fn sector_capacity() {
        let spec = make_uniform(4, 0.0, 1.0).unwrap();
        let basis = FockBasis::new(4, 12).unwrap();
        assert!(matches!(
            build_sector_hamiltonian_capped(&spec, &basis, 12, 400),
            Err(Error::Capacity { dim: 455, .. })
        ));
        assert!(build_sector_hamiltonian(&spec, &basis, 13).is_err());
        let wrong = FockBasis::new(3, 2).unwrap();
        assert!(build_sector_hamiltonian(&spec, &wrong, 1).is_err());
    }

    #[test]
    fn sector_spectrum_is_sum_of_mode_energies() {
        // two photons: all λ_a + λ_b with a ≤ b
        let spec = make_glauber_fock(3, 0.2, 1.0).unwrap();
        let one = crate::spectral::eigendecompose(&spec).unwrap();
        let basis = FockBasis::new(3, 2).unwrap();
        let prop = FockPropagator::new(&spec, &basis).unwrap();
        let mut expected = Vec::new();
        for a in 0..3 {
            for b in a..3 {
                expected.push(one.eigenvalues()[a] + one.eigenvalues()[b]);
            }
        }
        expected.sort_by(f64::total_cmp);
        let got = prop.sector_energies(2).unwrap();
        for (x, y) in got.iter().zip(&expected) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn vacuum_is_stationary() {
        let spec = make_perfect_transfer(4, 1.0).unwrap();
        let basis = FockBasis::new(4, 3).unwrap();
        let vac = build_fock(&basis, &[0, 0, 0, 0]).unwrap();
        let out = evolve(&spec, &vac, 2.7).unwrap();
        assert_eq!(out.amplitudes(), vac.amplitudes());
    }

    #[test]
    fn single_photon_full_transfer() {
        let spec = make_uniform(2, 0.0, 1.0).unwrap();
        let basis = FockBasis::new(2, 2).unwrap();
        let s = build_fock(&basis, &[1, 0]).unwrap();
        let out = evolve(&spec, &s, FRAC_PI_2).unwrap();
        assert!((out.amplitude(&[1, 0]).unwrap() - c(0.0, 0.0)).norm() < 1e-14);
        assert!((out.amplitude(&[0, 1]).unwrap() - c(0.0, -1.0)).norm() < 1e-14);
    }

    #[test]
    fn perfect_transfer_moves_photon_to_the_far_end() {
        let spec = make_perfect_transfer(4, 1.0).unwrap();
        let basis = FockBasis::new(4, 2).unwrap();
        let s = build_fock(&basis, &[1, 0, 0, 0]).unwrap();
        let out = evolve(&spec, &s, 1.0).unwrap();
        assert_abs_diff_eq!(
            out.amplitude(&[0, 0, 0, 1]).unwrap().norm(),
            1.0,
            epsilon = 1e-8
        );
        assert_abs_diff_eq!(
            fidelity(&mirror_state(&s), &out).unwrap(),
            1.0,
            epsilon = 1e-8
        );
    }

    #[test]
    fn fidelity_cases() {
        let spec = make_uniform(2, 0.0, 1.0).unwrap();
        let basis = FockBasis::new(2, 12).unwrap();
        let path = build_path_entangled(&basis, 0, 1).unwrap();
        assert_abs_diff_eq!(fidelity(&path, &path).unwrap(), 1.0, epsilon = 1e-15);
        let prop = FockPropagator::new(&spec, &basis).unwrap();
        for z in [0.3, 1.0, 2.2, 5.0] {
            let out = prop.evolve(&path, z).unwrap();
            assert_abs_diff_eq!(fidelity(&path, &out).unwrap(), 1.0, epsilon = 1e-12);
        }

        let coh = build_coherent(&basis, &[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let tol = (10.0 * coh.tail_mass()).max(1e-12);
        for z in [0.0, 0.5, 1.5, PI, 4.0] {
            let out = prop.evolve(&coh, z).unwrap();
            let expected = (-(1.0 - z.cos())).exp();
            assert_abs_diff_eq!(fidelity(&coh, &out).unwrap(), expected, epsilon = tol);
        }
        let at_pi = fidelity(&coh, &prop.evolve(&coh, PI).unwrap()).unwrap();
        assert_abs_diff_eq!(at_pi, 0.1353352832, epsilon = 1e-9);

        let other = FockBasis::new(2, 3).unwrap();
        let small = build_fock(&other, &[1, 0]).unwrap();
        assert!(matches!(fidelity(&small, &coh), Err(Error::BasisMismatch)));
        assert!(matches!(
            prop.evolve(&small, 1.0),
            Err(Error::BasisMismatch)
        ));
    }

    #[test]
    fn mirror_examples() {
        let basis = FockBasis::new(4, 12).unwrap();
        let s = build_fock(&basis, &[1, 0, 0, 0]).unwrap();
        assert_eq!(mirror_state(&s).amplitude(&[0, 0, 0, 1]), Some(c(1.0, 0.0)));

        let path = build_path_entangled(&basis, 0, 1).unwrap();
        let m = mirror_state(&path);
        assert_eq!(m.amplitude(&[0, 0, 0, 1]), Some(c(FRAC_1_SQRT_2, 0.0)));
        assert_eq!(m.amplitude(&[0, 0, 1, 0]), Some(c(FRAC_1_SQRT_2, 0.0)));

        let r = FRAC_1_SQRT_2.asinh();
        let t = build_tmsv(&basis, 0, 1, r).unwrap();
        let expected = build_tmsv(&basis, 3, 2, r).unwrap();
        assert_eq!(mirror_state(&t).amplitudes(), expected.amplitudes());
        assert_eq!(mirror_state(&mirror_state(&t)).amplitudes(), t.amplitudes());
    }

    #[test]
    fn expectations() {
        let basis = FockBasis::new(2, 12).unwrap();
        let s = build_fock(&basis, &[1, 0]).unwrap();
        assert_eq!(expectation_n(&s, 0).unwrap(), 1.0);
        assert_eq!(expectation_n(&s, 1).unwrap(), 0.0);
        assert_eq!(expectation_g2(&s, 0, 1).unwrap(), 0.0);
        assert!(expectation_n(&s, 2).is_err());

        let r = FRAC_1_SQRT_2.asinh();
        let t = build_tmsv(&basis, 0, 1, r).unwrap();
        let tol = 10.0 * t.tail_mass();
        assert_abs_diff_eq!(expectation_n(&t, 0).unwrap(), 0.5, epsilon = tol);
        assert_abs_diff_eq!(expectation_n(&t, 1).unwrap(), 0.5, epsilon = tol);
        assert_eq!(expectation_all_n(&t)[0], expectation_n(&t, 0).unwrap());
    }

    #[test]
    fn sectors_never_mix() {
        let spec = make_perfect_transfer(4, 1.0).unwrap();
        let basis = FockBasis::new(4, 12).unwrap();
        let t = build_tmsv(&basis, 0, 1, FRAC_1_SQRT_2.asinh()).unwrap();
        let out = evolve(&spec, &t, 0.77).unwrap();
        for n in 0..=12 {
            assert_abs_diff_eq!(out.sector_weight(n), t.sector_weight(n), epsilon = 1e-13);
            if n % 2 == 1 {
                assert_eq!(out.sector_weight(n), 0.0);
            }
        }
    }

    fn random_state(basis: &Arc<FockBasis>, seed: &[f64]) -> FockState {
        let amps: Vec<Complex64> = (0..basis.len())
            .map(|i| {
                c(
                    seed[i % seed.len()] * (i as f64 + 1.0).sin(),
                    seed[(i + 1) % seed.len()],
                )
            })
            .collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let amps = amps.into_iter().map(|a| a / norm).collect();
        FockState::from_amplitudes(basis.clone(), amps, 0.0).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn norm_and_group_property(
            seed in proptest::collection::vec(-1.0..1.0f64, 5),
            w in proptest::collection::vec(-1.0..1.0f64, 3),
            g in proptest::collection::vec(0.1..1.5f64, 2),
            z1 in 0.0..5.0f64,
            z2 in 0.0..5.0f64,
        ) {
            let spec = LatticeSpec::new(w, g).unwrap();
            let basis = FockBasis::new(3, 4).unwrap();
            let prop = FockPropagator::new(&spec, &basis).unwrap();
            let s = random_state(&basis, &seed);
            let a = prop.evolve(&prop.evolve(&s, z1).unwrap(), z2).unwrap();
            let b = prop.evolve(&s, z1 + z2).unwrap();
            prop_assert!((a.norm() - 1.0).abs() < 1e-12);
            for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
                prop_assert!((x - y).norm() < 1e-10);
            }
            for n in 0..=4 {
                prop_assert!((b.sector_weight(n) - s.sector_weight(n)).abs() < 1e-12);
            }
        }
    }
}
