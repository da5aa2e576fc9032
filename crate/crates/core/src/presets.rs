//! The example configurations for the two figure sets, compiled in.
//!
//! `fig1_*` drive the resonant coupler (`ω = (0, 0)`, `g = 1`) over
//! `z ∈ [0, 2π]`; `fig2_*` drive the four-site perfect-transfer lattice with
//! `z_t = 1` over `z ∈ [0, 2]`. Rows 1 to 4 inject a single photon, a coherent
//! state with `α = 1`, the path-entangled state and the two-mode squeezed
//! vacuum with `sinh² r = 1/2`.

use crate::config::RunConfig;
use crate::error::{Error, Result};

pub const PRESETS: [(&str, &str); 8] = [
    ("fig1_row1", include_str!("../configs/fig1_row1.json")),
    ("fig1_row2", include_str!("../configs/fig1_row2.json")),
    ("fig1_row3", include_str!("../configs/fig1_row3.json")),
    ("fig1_row4", include_str!("../configs/fig1_row4.json")),
    ("fig2_row1", include_str!("../configs/fig2_row1.json")),
    ("fig2_row2", include_str!("../configs/fig2_row2.json")),
    ("fig2_row3", include_str!("../configs/fig2_row3.json")),
    ("fig2_row4", include_str!("../configs/fig2_row4.json")),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|&(name, _)| name)
}

pub fn text(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|&&(n, _)| n == name).map(|&(_, t)| t)
}

pub fn load(name: &str) -> Result<RunConfig> {
    let text = text(name).ok_or_else(|| Error::Config(format!("no preset named {name:?}")))?;
    RunConfig::from_json(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::StateConfig;

    #[test]
    fn every_preset_validates() {
        for name in names() {
            let c = load(name).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(c.z_grid.steps, 201, "{name}");
            assert_eq!(c.fidelity_targets.len(), 2, "{name}");
        }
        assert!(load("fig3_row1").is_err());
    }

    #[test]
    fn squeezing_gives_half_a_photon_per_mode() {
        let c = load("fig2_row4").unwrap();
        let StateConfig::Tmsv { r, .. } = c.state else {
            panic!()
        };
        assert!((r.sinh().powi(2) - 0.5).abs() < 1e-15);
    }
}
