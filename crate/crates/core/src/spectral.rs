//! One-photon spectral machinery: the Jacobi matrix of a lattice, its
//! eigen-factorisation `M = Vᵀ Λ V`, and the mode transfer matrix
//! `U(z) = Vᵀ e^{-iΛz} V = e^{-iMz}`.
//!
//! Eigenpairs come from an implicit-shift QL sweep on the tridiagonal
//! matrix with rotations accumulated into an identity start, so the
//! eigenvectors are orthogonal even when eigenvalues are degenerate.

use std::cmp::Ordering;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::LatticeSpec;

/// Eigenvalues closer than this, relative to the largest matrix entry, are
/// treated as degenerate when ordering eigenvectors.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

/// Iteration budget per site.
pub const ITERATIONS_PER_SITE: usize = 100;

/// Dense copy of the real symmetric tridiagonal one-photon matrix.
pub fn jacobi_matrix(spec: &LatticeSpec) -> DMatrix<f64> {
    let n = spec.len();
    let mut m = DMatrix::zeros(n, n);
    for (j, &w) in spec.omegas().iter().enumerate() {
        m[(j, j)] = w;
    }
    for (j, &g) in spec.couplings().iter().enumerate() {
        m[(j, j + 1)] = g;
        m[(j + 1, j)] = g;
    }
    m
}

/// Characteristic polynomial `p_N(x)` from the leading-minor recursion
/// `p_j = (ω_{j-1} - x) p_{j-1} - g_{j-2}² p_{j-2}`, `p_0 = 1`.
pub fn char_poly(spec: &LatticeSpec, x: f64) -> f64 {
    char_poly_with_derivative(spec, x).0
}

/// `p_N(x)` together with `p_N'(x)`, differentiating the recursion termwise.
pub fn char_poly_with_derivative(spec: &LatticeSpec, x: f64) -> (f64, f64) {
    let w = spec.omegas();
    let g = spec.couplings();
    let (mut p_prev, mut dp_prev) = (1.0, 0.0);
    let (mut p, mut dp) = (w[0] - x, -1.0);
    for j in 2..=w.len() {
        let a = w[j - 1] - x;
        let b = g[j - 2] * g[j - 2];
        let p_next = a * p - b * p_prev;
        let dp_next = -p + a * dp - b * dp_prev;
        (p_prev, dp_prev, p, dp) = (p, dp, p_next, dp_next);
    }
    (p, dp)
}

/// Eigenvalues in ascending order and the orthogonal matrix whose row `k` is
/// the eigenvector of `eigenvalues[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Row `k` holds the eigenvector for `eigenvalues()[k]`.
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn eigenvector(&self, k: usize) -> Vec<f64> {
        self.eigenvectors.row(k).iter().copied().collect()
    }

    /// `max |V Vᵀ - I|`.
    pub fn orthogonality_error(&self) -> f64 {
        let v = &self.eigenvectors;
        let n = v.nrows();
        (v * v.transpose() - DMatrix::<f64>::identity(n, n)).amax()
    }

    /// `max_k |M v_k - λ_k v_k|`.
    pub fn residual(&self, spec: &LatticeSpec) -> f64 {
        let m = jacobi_matrix(spec);
        let mut worst = 0.0_f64;
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            let v = self.eigenvectors.row(k).transpose();
            worst = worst.max((&m * &v - v * lambda).amax());
        }
        worst
    }

    pub fn transfer_matrix(&self, z: f64) -> TransferMatrix {
        transfer_matrix(self, z)
    }
}

/// Mode transfer matrix `U(z)`; output mode operators are
/// `a_p(z) = Σ_k U[p,k] a_k(0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix {
    z: f64,
    entries: DMatrix<Complex64>,
}

impl TransferMatrix {
    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn len(&self) -> usize {
        self.entries.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.nrows() == 0
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn get(&self, p: usize, k: usize) -> Complex64 {
        self.entries[(p, k)]
    }

    /// `max |U U† - I|`.
    pub fn unitarity_error(&self) -> f64 {
        let n = self.len();
        let prod = &self.entries * self.entries.adjoint();
        let id = DMatrix::<Complex64>::identity(n, n);
        (prod - id).iter().fold(0.0, |m, c| m.max(c.norm()))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EigenOptions {
    pub tolerance: f64,
    pub iterations_per_site: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_TOLERANCE,
            iterations_per_site: ITERATIONS_PER_SITE,
        }
    }
}

pub fn eigendecompose(spec: &LatticeSpec) -> Result<Spectrum> {
    eigendecompose_with(spec, EigenOptions::default())
}

pub fn eigendecompose_with(spec: &LatticeSpec, options: EigenOptions) -> Result<Spectrum> {
    let n = spec.len();
    let mut d = spec.omegas().to_vec();
    let scale = spec.max_abs_entry();
    let z = tridiagonal_ql(&mut d, spec.couplings(), options.iterations_per_site * n)?;

    let mut pairs: Vec<(f64, Vec<f64>)> = (0..n)
        .map(|k| {
            let mut v: Vec<f64> = z.column(k).iter().copied().collect();
            fix_sign(&mut v);
            (d[k], v)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    // Equal eigenvalues are ordered by their eigenvectors, lexicographically.
    let tie = options.tolerance * scale.max(1.0);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && pairs[end].0 - pairs[end - 1].0 <= tie {
            end += 1;
        }
        if end - start > 1 {
            pairs[start..end].sort_by(|a, b| lexicographic(&a.1, &b.1));
        }
        start = end;
    }

    let eigenvalues = pairs.iter().map(|p| p.0).collect();
    let eigenvectors = DMatrix::from_fn(n, n, |k, j| pairs[k].1[j]);
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}

/// Makes the first entry of (near-)maximal magnitude positive.
fn fix_sign(v: &mut [f64]) {
    let max = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if let Some(&lead) = v.iter().find(|x| x.abs() >= max * (1.0 - 1e-8)) {
        if lead < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Implicit-shift QL on a symmetric tridiagonal matrix (diagonal `d`,
/// off-diagonal `off`). On return `d` holds the eigenvalues, unsorted, and
/// column `k` of the returned matrix is the matching unit eigenvector.
fn tridiagonal_ql(d: &mut [f64], off: &[f64], max_iterations: usize) -> Result<DMatrix<f64>> {
    let n = d.len();
    let mut z = DMatrix::<f64>::identity(n, n);
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(off);

    let negligible = |x: f64, scale: f64| x.abs() <= f64::EPSILON * scale;

    let mut f = 0.0;
    let mut tst1 = 0.0_f64;
    let mut iterations = 0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && !negligible(e[m], tst1) {
            m += 1;
        }

        if m > l {
            loop {
                iterations += 1;
                if iterations > max_iterations {
                    return Err(Error::Convergence { iterations });
                }

                // Wilkinson-style shift from the leading 2x2 block
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let (mut c, mut c2, mut c3) = (1.0, 1.0, 1.0);
                let el1 = e[l + 1];
                let (mut s, mut s2) = (0.0, 0.0);
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    let h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        let h = z[(k, i + 1)];
                        z[(k, i + 1)] = s * z[(k, i)] + c * h;
                        z[(k, i)] = c * z[(k, i)] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;

                if negligible(e[l], tst1) {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(z)
}

pub fn transfer_matrix(spectrum: &Spectrum, z: f64) -> TransferMatrix {
    let n = spectrum.len();
    let v = &spectrum.eigenvectors;
    let phases: Vec<Complex64> = spectrum
        .eigenvalues
        .iter()
        .map(|&l| Complex64::from_polar(1.0, -l * z))
        .collect();
    let entries = DMatrix::from_fn(n, n, |j, k| {
        (0..n)
            .map(|m| phases[m] * (v[(m, j)] * v[(m, k)]))
            .sum::<Complex64>()
    });
    TransferMatrix { z, entries }
}
