//! Initial states in the two representations used by the engines:
//! amplitude vectors over a truncated occupation basis, and moment sets.

use std::collections::HashMap;
use std::ops::Range;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tail mass above which a truncated state is reported.
pub const DEFAULT_TAIL_BOUND: f64 = 1e-8;

/// Default photon-number truncation.
pub const DEFAULT_MAX_TOTAL: usize = 12;

/// Largest basis we are willing to enumerate.
pub const MAX_BASIS_SIZE: usize = 5_000_000;

/// Occupation vectors `(n_0, …, n_{N-1})` with `Σ n_j ≤ max_total`, grouped by
/// total photon number. Within a sector the order is lexicographic with the
/// first mode most significant and highest occupation first, e.g.
/// `(2,0), (1,1), (0,2)`.
#[derive(Debug)]
pub struct FockBasis {
    num_modes: usize,
    max_total: usize,
    states: Vec<Vec<u32>>,
    sector_starts: Vec<usize>,
    index: HashMap<Vec<u32>, usize>,
}

/// `C(n + k - 1, k - 1)`: number of ways to put `n` photons in `k` modes.
pub fn sector_dimension(photons: usize, modes: usize) -> u128 {
    binomial((photons + modes - 1) as u128, (modes - 1) as u128)
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

impl FockBasis {
    pub fn new(num_modes: usize, max_total: usize) -> Result<Arc<Self>> {
        if num_modes == 0 {
            return Err(Error::InvalidSize(
                "a Fock basis needs at least one mode".into(),
            ));
        }
        let size = binomial((max_total + num_modes) as u128, num_modes as u128);
        if size > MAX_BASIS_SIZE as u128 {
            return Err(Error::Capacity {
                photons: max_total,
                dim: usize::try_from(size).unwrap_or(usize::MAX),
                cap: MAX_BASIS_SIZE,
            });
        }

        let mut states = Vec::with_capacity(size as usize);
        let mut sector_starts = Vec::with_capacity(max_total + 2);
        let mut scratch = vec![0u32; num_modes];
        for total in 0..=max_total {
            sector_starts.push(states.len());
            fill_sector(&mut scratch, 0, total as u32, &mut states);
        }
        sector_starts.push(states.len());

        let index = states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        Ok(Arc::new(Self {
            num_modes,
            max_total,
            states,
            sector_starts,
            index,
        }))
    }

    pub fn num_modes(&self) -> usize {
        self.num_modes
    }

    pub fn max_total(&self) -> usize {
        self.max_total
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[Vec<u32>] {
        &self.states
    }

    pub fn occupation(&self, i: usize) -> &[u32] {
        &self.states[i]
    }

    pub fn lookup(&self, occupation: &[u32]) -> Option<usize> {
        self.index.get(occupation).copied()
    }

    /// Basis indices of the sector with `photons` photons in total.
    pub fn sector(&self, photons: usize) -> Range<usize> {
        self.sector_starts[photons]..self.sector_starts[photons + 1]
    }

    /// Two bases describe the same space.
    pub fn same_space(&self, other: &FockBasis) -> bool {
        self.num_modes == other.num_modes && self.max_total == other.max_total
    }
}

fn fill_sector(scratch: &mut [u32], mode: usize, remaining: u32, out: &mut Vec<Vec<u32>>) {
    if mode + 1 == scratch.len() {
        scratch[mode] = remaining;
        out.push(scratch.to_vec());
        return;
    }
    for k in (0..=remaining).rev() {
        scratch[mode] = k;
        fill_sector(scratch, mode + 1, remaining - k, out);
    }
    scratch[mode] = 0;
}

/// Pure state over a truncated Fock basis. Amplitudes are unit-normalised;
/// `tail_mass` is the probability that truncation discarded beforehand.
#[derive(Debug, Clone)]
pub struct FockState {
    basis: Arc<FockBasis>,
    amplitudes: Vec<Complex64>,
    tail_mass: f64,
}

impl FockState {
    /// Wraps amplitudes without renormalising them.
    pub fn from_amplitudes(
        basis: Arc<FockBasis>,
        amplitudes: Vec<Complex64>,
        tail_mass: f64,
    ) -> Result<Self> {
        if amplitudes.len() != basis.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.len(),
                got: amplitudes.len(),
            });
        }
        Ok(Self {
            basis,
            amplitudes,
            tail_mass,
        })
    }

    /// Normalises the kept amplitudes and records the discarded probability.
    fn truncated(basis: Arc<FockBasis>, mut amplitudes: Vec<Complex64>, tail_mass: f64) -> Self {
        let norm = amplitudes.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        amplitudes.iter_mut().for_each(|c| *c /= norm);
        if tail_mass > DEFAULT_TAIL_BOUND {
            log::warn!(
                "truncation at {} photons discards probability {tail_mass:.3e}",
                basis.max_total()
            );
        }
        Self {
            basis,
            amplitudes,
            tail_mass,
        }
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn num_modes(&self) -> usize {
        self.basis.num_modes()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, occupation: &[u32]) -> Option<Complex64> {
        self.basis.lookup(occupation).map(|i| self.amplitudes[i])
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// True when truncation discarded more probability than `bound`.
    pub fn exceeds_tail_bound(&self, bound: f64) -> bool {
        self.tail_mass > bound
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Probability held by the sector with `photons` photons.
    pub fn sector_weight(&self, photons: usize) -> f64 {
        self.amplitudes[self.basis.sector(photons)]
            .iter()
            .map(|c| c.norm_sqr())
            .sum()
    }
}

fn check_mode(mode: usize, len: usize) -> Result<()> {
    if mode < len {
        Ok(())
    } else {
        Err(Error::IndexOutOfRange { index: mode, len })
    }
}

fn check_pair(a: usize, b: usize, len: usize) -> Result<()> {
    check_mode(a, len)?;
    check_mode(b, len)?;
    if a == b {
        return Err(Error::InvalidParameter(format!(
            "two-mode state needs distinct modes, got {a} twice"
        )));
    }
    Ok(())
}

/// Definite occupation `|n_0, …, n_{N-1}⟩`.
pub fn build_fock(basis: &Arc<FockBasis>, occupation: &[u32]) -> Result<FockState> {
    if occupation.len() != basis.num_modes() {
        return Err(Error::DimensionMismatch {
            expected: basis.num_modes(),
            got: occupation.len(),
        });
    }
    let i = basis
        .lookup(occupation)
        .ok_or_else(|| Error::OutOfBasis(occupation.to_vec()))?;
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); basis.len()];
    amplitudes[i] = Complex64::new(1.0, 0.0);
    Ok(FockState {
        basis: basis.clone(),
        amplitudes,
        tail_mass: 0.0,
    })
}

/// Product of coherent states `|α_0⟩ ⊗ … ⊗ |α_{N-1}⟩`, truncated in total
/// photon number and renormalised.
pub fn build_coherent(basis: &Arc<FockBasis>, alphas: &[Complex64]) -> Result<FockState> {
    if alphas.len() != basis.num_modes() {
        return Err(Error::DimensionMismatch {
            expected: basis.num_modes(),
            got: alphas.len(),
        });
    }
    if alphas.iter().any(|a| !a.is_finite()) {
        return Err(Error::InvalidParameter(
            "coherent amplitudes must be finite".into(),
        ));
    }
    let mean: f64 = alphas.iter().map(|a| a.norm_sqr()).sum();
    let prefactor = (-mean / 2.0).exp();
    let amplitudes = basis
        .states()
        .iter()
        .map(|occ| {
            occ.iter()
                .zip(alphas)
                .fold(Complex64::new(prefactor, 0.0), |acc, (&k, &a)| {
                    acc * a.powu(k) / factorial(k).sqrt()
                })
        })
        .collect();
    // total photon number of a coherent product state is Poisson(mean)
    let tail = poisson_tail(mean, basis.max_total());
    Ok(FockState::truncated(basis.clone(), amplitudes, tail))
}

/// `(|1⟩_a + |1⟩_b) / √2` with every other mode empty.
pub fn build_path_entangled(
    basis: &Arc<FockBasis>,
    mode_a: usize,
    mode_b: usize,
) -> Result<FockState> {
    let n = basis.num_modes();
    check_pair(mode_a, mode_b, n)?;
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); basis.len()];
    for mode in [mode_a, mode_b] {
        let mut occ = vec![0u32; n];
        occ[mode] = 1;
        let i = basis.lookup(&occ).ok_or(Error::OutOfBasis(occ))?;
        amplitudes[i] = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    }
    Ok(FockState {
        basis: basis.clone(),
        amplitudes,
        tail_mass: 0.0,
    })
}

/// Two-mode squeezed vacuum `Σ_j tanh^j r / cosh r |j⟩_a |j⟩_b`, keeping
/// `j ≤ max_total / 2`.
pub fn build_tmsv(
    basis: &Arc<FockBasis>,
    mode_a: usize,
    mode_b: usize,
    r: f64,
) -> Result<FockState> {
    let n = basis.num_modes();
    check_pair(mode_a, mode_b, n)?;
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "squeezing must be finite and non-negative, got {r}"
        )));
    }
    let t = r.tanh();
    let keep = basis.max_total() / 2;
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); basis.len()];
    let mut occ = vec![0u32; n];
    for j in 0..=keep {
        occ[mode_a] = j as u32;
        occ[mode_b] = j as u32;
        let i = basis
            .lookup(&occ)
            .ok_or_else(|| Error::OutOfBasis(occ.clone()))?;
        amplitudes[i] = Complex64::new(t.powi(j as i32) / r.cosh(), 0.0);
    }
    // probability of pairs j > keep sums to tanh^{2(keep+1)} r
    let tail = (t * t).powi(keep as i32 + 1);
    Ok(FockState::truncated(basis.clone(), amplitudes, tail))
}

fn factorial(k: u32) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

/// `P(K > cutoff)` for `K ~ Poisson(mean)`, summed directly.
fn poisson_tail(mean: f64, cutoff: usize) -> f64 {
    if mean == 0.0 {
        return 0.0;
    }
    // term k = e^{-μ} μ^k / k!
    let mut term = (-mean).exp();
    for k in 1..=cutoff {
        term *= mean / k as f64;
    }
    let mut tail = 0.0;
    let mut k = cutoff + 1;
    loop {
        term *= mean / k as f64;
        tail += term;
        if term < tail * 1e-17 || term == 0.0 {
            break;
        }
        k += 1;
    }
    tail
}

/// Second moments `C[j,k] = ⟨a_j† a_k⟩` and normally ordered fourth moments
/// `F[j,k,l,m] = ⟨a_j† a_k† a_l a_m⟩`, stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSet {
    num_modes: usize,
    second: DMatrix<Complex64>,
    fourth: Vec<Complex64>,
}

impl MomentSet {
    pub fn zeros(num_modes: usize) -> Self {
        Self {
            num_modes,
            second: DMatrix::zeros(num_modes, num_modes),
            fourth: vec![Complex64::new(0.0, 0.0); num_modes.pow(4)],
        }
    }

    /// Assembles a moment set from a second-moment matrix and a dense
    /// fourth-moment tensor in `[j][k][l][m]` row-major order.
    pub fn from_parts(second: DMatrix<Complex64>, fourth: Vec<Complex64>) -> Result<Self> {
        let n = second.nrows();
        if second.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: second.ncols(),
            });
        }
        if fourth.len() != n.pow(4) {
            return Err(Error::DimensionMismatch {
                expected: n.pow(4),
                got: fourth.len(),
            });
        }
        Ok(Self {
            num_modes: n,
            second,
            fourth,
        })
    }

    pub fn num_modes(&self) -> usize {
        self.num_modes
    }

    pub fn second(&self) -> &DMatrix<Complex64> {
        &self.second
    }

    fn idx(&self, j: usize, k: usize, l: usize, m: usize) -> usize {
        let n = self.num_modes;
        ((j * n + k) * n + l) * n + m
    }

    pub fn fourth(&self, j: usize, k: usize, l: usize, m: usize) -> Complex64 {
        self.fourth[self.idx(j, k, l, m)]
    }

    pub fn fourth_tensor(&self) -> &[Complex64] {
        &self.fourth
    }

    /// `Σ_j ⟨n_j⟩`.
    pub fn total_photons(&self) -> f64 {
        self.second.diagonal().iter().map(|c| c.re).sum()
    }

    /// Largest violation of `F[j,k,l,m] = F[k,j,l,m] = F[j,k,m,l] = conj F[l,m,j,k]`.
    pub fn symmetry_error(&self) -> f64 {
        let n = self.num_modes;
        let mut worst = 0.0_f64;
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    for m in 0..n {
                        let f = self.fourth(j, k, l, m);
                        worst = worst
                            .max((f - self.fourth(k, j, l, m)).norm())
                            .max((f - self.fourth(j, k, m, l)).norm())
                            .max((f - self.fourth(l, m, j, k).conj()).norm());
                    }
                }
            }
        }
        worst
    }

    /// Largest violation of Hermiticity of the second-moment matrix.
    pub fn hermiticity_error(&self) -> f64 {
        (&self.second - self.second.adjoint())
            .iter()
            .fold(0.0, |m, c| m.max(c.norm()))
    }

    /// Largest entrywise distance to another moment set.
    pub fn max_difference(&self, other: &MomentSet) -> (f64, f64) {
        let second = (&self.second - &other.second)
            .iter()
            .fold(0.0_f64, |m, c| m.max(c.norm()));
        let fourth = self
            .fourth
            .iter()
            .zip(&other.fourth)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).norm()));
        (second, fourth)
    }
}

/// Moments of a truncated state by explicit ladder-operator action on its
/// amplitudes.
pub fn moments_of(state: &FockState) -> MomentSet {
    let basis = state.basis();
    let n = basis.num_modes();
    let mut out = MomentSet::zeros(n);
    let mut occ = vec![0u32; n];

    for (i, &c) in state.amplitudes().iter().enumerate() {
        if c == Complex64::new(0.0, 0.0) {
            continue;
        }
        let source = basis.occupation(i);

        // a_j† a_k
        for k in 0..n {
            if source[k] == 0 {
                continue;
            }
            occ.copy_from_slice(source);
            let f_k = (occ[k] as f64).sqrt();
            occ[k] -= 1;
            for j in 0..n {
                let f_j = ((occ[j] + 1) as f64).sqrt();
                occ[j] += 1;
                let t = basis.lookup(&occ).expect("number-conserving");
                out.second[(j, k)] += state.amplitudes()[t].conj() * c * (f_j * f_k);
                occ[j] -= 1;
            }
        }

        // a_j† a_k† a_l a_m
        for m in 0..n {
            if source[m] == 0 {
                continue;
            }
            occ.copy_from_slice(source);
            let f_m = (occ[m] as f64).sqrt();
            occ[m] -= 1;
            for l in 0..n {
                if occ[l] == 0 {
                    continue;
                }
                let f_l = (occ[l] as f64).sqrt();
                occ[l] -= 1;
                for k in 0..n {
                    let f_k = ((occ[k] + 1) as f64).sqrt();
                    occ[k] += 1;
                    for j in 0..n {
                        let f_j = ((occ[j] + 1) as f64).sqrt();
                        occ[j] += 1;
                        let t = basis.lookup(&occ).expect("number-conserving");
                        let idx = out.idx(j, k, l, m);
                        out.fourth[idx] +=
                            state.amplitudes()[t].conj() * c * (f_j * f_k * f_l * f_m);
                        occ[j] -= 1;
                    }
                    occ[k] -= 1;
                }
                occ[l] += 1;
            }
        }
    }
    out
}

/// Moments of a Gaussian state with zero mean from its normal correlations
/// `C[j,k] = ⟨a_j† a_k⟩` and anomalous correlations `A[j,k] = ⟨a_j a_k⟩`,
/// using Wick's theorem:
/// `F[j,k,l,m] = C[j,l] C[k,m] + C[j,m] C[k,l] + conj(A[j,k]) A[l,m]`.
fn gaussian_moments(second: DMatrix<Complex64>, anomalous: &DMatrix<Complex64>) -> MomentSet {
    let n = second.nrows();
    let mut out = MomentSet::zeros(n);
    for j in 0..n {
        for k in 0..n {
            for l in 0..n {
                for m in 0..n {
                    let idx = out.idx(j, k, l, m);
                    out.fourth[idx] = second[(j, l)] * second[(k, m)]
                        + second[(j, m)] * second[(k, l)]
                        + anomalous[(j, k)].conj() * anomalous[(l, m)];
                }
            }
        }
    }
    out.second = second;
    out
}

/// Exact, untruncated moments of the two-mode squeezed vacuum on modes
/// `mode_a`, `mode_b` of an `num_modes`-mode lattice.
pub fn analytic_moments_tmsv(
    r: f64,
    mode_a: usize,
    mode_b: usize,
    num_modes: usize,
) -> Result<MomentSet> {
    check_pair(mode_a, mode_b, num_modes)?;
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "squeezing must be finite and non-negative, got {r}"
        )));
    }
    let (s, c) = (r.sinh(), r.cosh());
    let mut second = DMatrix::zeros(num_modes, num_modes);
    second[(mode_a, mode_a)] = Complex64::new(s * s, 0.0);
    second[(mode_b, mode_b)] = Complex64::new(s * s, 0.0);
    let mut anomalous = DMatrix::zeros(num_modes, num_modes);
    anomalous[(mode_a, mode_b)] = Complex64::new(s * c, 0.0);
    anomalous[(mode_b, mode_a)] = Complex64::new(s * c, 0.0);
    Ok(gaussian_moments(second, &anomalous))
}

/// Exact moments of a coherent product state: `C[j,k] = conj(α_j) α_k` and
/// `F[j,k,l,m] = conj(α_j α_k) α_l α_m`.
pub fn analytic_moments_coherent(alphas: &[Complex64]) -> MomentSet {
    let n = alphas.len();
    let mut out = MomentSet::zeros(n);
    for j in 0..n {
        for k in 0..n {
            out.second[(j, k)] = alphas[j].conj() * alphas[k];
            for l in 0..n {
                for m in 0..n {
                    let idx = out.idx(j, k, l, m);
                    out.fourth[idx] = (alphas[j] * alphas[k]).conj() * alphas[l] * alphas[m];
                }
            }
        }
    }
    out
}

/// Exact moments of a definite occupation state.
pub fn analytic_moments_fock(occupation: &[u32]) -> MomentSet {
    let n = occupation.len();
    let mut out = MomentSet::zeros(n);
    for j in 0..n {
        let nj = occupation[j] as f64;
        out.second[(j, j)] = Complex64::new(nj, 0.0);
        for k in 0..n {
            let value = if j == k {
                nj * (nj - 1.0)
            } else {
                nj * occupation[k] as f64
            };
            let (a, b) = (out.idx(j, k, j, k), out.idx(j, k, k, j));
            out.fourth[a] = Complex64::new(value, 0.0);
            out.fourth[b] = Complex64::new(value, 0.0);
        }
    }
    out
}

/// Exact moments of `(|1⟩_a + |1⟩_b)/√2`; the fourth moments vanish.
pub fn analytic_moments_path_entangled(
    mode_a: usize,
    mode_b: usize,
    num_modes: usize,
) -> Result<MomentSet> {
    check_pair(mode_a, mode_b, num_modes)?;
    let mut out = MomentSet::zeros(num_modes);
    for j in [mode_a, mode_b] {
        for k in [mode_a, mode_b] {
            out.second[(j, k)] = Complex64::new(0.5, 0.0);
        }
    }
    Ok(out)
}
