//! One line per acceptance criterion. Tolerances are pinned here and must
//! match what the suite applies, so a loosened bound fails the run.

use std::process::ExitCode;

use photon_lattice::verify::{self, Check};

const TITLES: [&str; 10] = [
    "coupler single photon: cos^2 z, sin^2 z, |cos z|",
    "Chebyshev spectrum of the uniform lattice",
    "Hermite spectrum of the Glauber-Fock lattice",
    "perfect transfer of a photon and the path-entangled state",
    "vacuum component blocks coherent and squeezed transfer",
    "engine cross-equivalence on the eight figure configs",
    "conservation and unitarity on 200 random lattices",
    "squeezed-vacuum zero-distance correlation",
    "stationary vacuum and path-entangled states",
    "byte-identical CSV for identical configs",
];

/// Probability beyond 12 photons of the squeezed vacuum with sinh^2 r = 1/2.
fn tmsv_tail() -> f64 {
    (1.0f64 / 3.0).powi(7)
}

/// Probability beyond 12 photons of a coherent state with |a|^2 = 1.
fn coherent_tail() -> f64 {
    let mut p = (-1.0f64).exp();
    let mut below = p;
    for k in 1..=12 {
        p /= k as f64;
        below += p;
    }
    1.0 - below
}

fn pinned(id: &str) -> Option<f64> {
    let tail_bound = |tail: f64, floor: f64| (10.0 * tail).max(floor);
    Some(match id {
        "1.a" | "1.b" | "1.c" | "2.a" => 1e-10,
        "3.a" | "3.b" | "3.c" => 1e-8,
        "4.a" | "4.b" | "4.c" | "4.d" => 1e-8,
        "5.a" => tail_bound(coherent_tail(), 1e-6),
        "5.b" | "5.c" => 1.0 - 1e-3,
        "5.d" | "6.4" | "6.8" => tail_bound(tmsv_tail(), 1e-8),
        "5.e" | "6.1" | "6.2" | "6.3" | "6.5" | "6.6" | "6.7" => 1e-8,
        "7.a" | "7.c" => 1e-12,
        "7.b" | "7.d" | "7.e" => 1e-10,
        "8.a" => 1e-12,
        "8.b" | "8.c" => 1e-8,
        "9.a" => 1e-12,
        "9.b" => 1e-10,
        "10.a" => 0.0,
        _ => return None,
    })
}

fn tolerance_is_pinned(c: &Check) -> bool {
    match pinned(&c.id) {
        // 1e-12 relative slack for the tail-mass sums
        Some(t) => (c.tolerance - t).abs() <= 1e-12 * t.abs(),
        None => false,
    }
}

fn main() -> ExitCode {
    let start = std::time::Instant::now();
    let mut failed = 0;
    for (k, title) in (1..=verify::CRITERIA).zip(TITLES) {
        let checks = verify::criterion(k, None);
        let bad: Vec<String> = checks
            .iter()
            .filter(|c| !c.passed() || !tolerance_is_pinned(c))
            .map(|c| {
                if c.passed() {
                    format!(
                        "{} tolerance {:.3e} is not the pinned value",
                        c.id, c.tolerance
                    )
                } else {
                    c.to_string()
                }
            })
            .collect();
        let measured = checks
            .iter()
            .map(|c| format!("{} {:.2e}/{:.2e}", c.id, c.measured, c.tolerance))
            .collect::<Vec<_>>()
            .join(", ");
        let status = if bad.is_empty() && !checks.is_empty() {
            "PASS"
        } else {
            "FAIL"
        };
        println!("{status} criterion {k:>2}: {title} [{measured}]");
        for b in &bad {
            println!("      {b}");
        }
        if status == "FAIL" {
            failed += 1;
        }
    }
    println!(
        "acceptance: {}/{} criteria passed in {:.1} s",
        verify::CRITERIA - failed,
        verify::CRITERIA,
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
