use num_complex::Complex64;
use proptest::prelude::*;

use photon_lattice::fockspace;
use photon_lattice::lattice::LatticeSpec;
use photon_lattice::moments;
use photon_lattice::spectral::eigendecompose;
use photon_lattice::states::{self, moments_of, FockBasis};

fn lattice() -> impl Strategy<Value = LatticeSpec> {
    (2usize..=4).prop_flat_map(|n| {
        (
            prop::collection::vec(-2.0..2.0f64, n),
            prop::collection::vec(0.1..2.0f64, n - 1),
        )
            .prop_map(|(w, g)| LatticeSpec::new(w, g).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn engines_agree_on_fock_inputs(spec in lattice(), seed in 0u32..1000, z in 0.0..4.0f64) {
        let n = spec.len();
        let occ: Vec<u32> = (0..n).map(|j| (seed >> (2 * j)) & 1).collect();
        let basis = FockBasis::new(n, 4).unwrap();
        let psi = states::build_fock(&basis, &occ).unwrap();
        let out = fockspace::evolve(&spec, &psi, z).unwrap();
        let u = eigendecompose(&spec).unwrap().transfer_matrix(z);
        let m = states::analytic_moments_fock(&occ);
        let n_m = moments::mean_photons(&u, &m).unwrap();
        let n_f = fockspace::expectation_all_n(&out);
        for j in 0..n {
            prop_assert!((n_m[j] - n_f[j]).abs() < 1e-12, "n_{j} {} vs {}", n_m[j], n_f[j]);
            for k in j..n {
                let a = moments::g2(&u, &m, j, k).unwrap();
                let b = fockspace::expectation_g2(&out, j, k).unwrap();
                prop_assert!((a - b).abs() < 1e-11, "g2({j},{k}) {a} vs {b}");
            }
        }
    }

    #[test]
    fn engines_agree_on_truncated_coherent_inputs(spec in lattice(), re in -0.8..0.8f64, im in -0.8..0.8f64, z in 0.0..4.0f64) {
        let n = spec.len();
        let mut alphas = vec![Complex64::new(0.0, 0.0); n];
        alphas[0] = Complex64::new(re, im);
        alphas[n - 1] += Complex64::new(im, 0.3);
        let basis = FockBasis::new(n, 6).unwrap();
        let psi = states::build_coherent(&basis, &alphas).unwrap();
        let out = fockspace::evolve(&spec, &psi, z).unwrap();
        let u = eigendecompose(&spec).unwrap().transfer_matrix(z);
        let m = moments_of(&psi);
        let n_m = moments::mean_photons(&u, &m).unwrap();
        let n_f = fockspace::expectation_all_n(&out);
        for j in 0..n {
            prop_assert!((n_m[j] - n_f[j]).abs() < 1e-12, "n_{j} {} vs {}", n_m[j], n_f[j]);
            let a = moments::g2(&u, &m, j, (j + 1) % n).unwrap();
            let b = fockspace::expectation_g2(&out, j, (j + 1) % n).unwrap();
            prop_assert!((a - b).abs() < 1e-11);
        }
    }
}
