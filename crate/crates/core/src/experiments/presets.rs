// Copyright 2026 The chaintransport Authors
// SPDX-License-Identifier: Apache-2.0

//! Named, fully specified studies that regenerate the standard figures.
//!
//! All presets use N = 10, Ω = 1 and pin γ_out = 2Ω as the superradiant
//! coupling unless the study varies it.

use serde::Serialize;

use super::sweep::{Axis, Ensemble, Observable, Parameter, Scale, SweepSpec};
use crate::analytics::critical_field;
use crate::error::{Error, Result};
use crate::model::{ChainParams, InitialState};
use crate::nonhermitian::REFERENCE_ST_RATE;

pub const PRESET_NAMES: [&str; 14] = [
    "fig2",
    "fig3a",
    "fig3b",
    "fig4",
    "fig5",
    "fig6",
    "fig7",
    "fig8",
    "fig_disorder",
    "fig_leegwater",
    "fig_current",
    "fig_conductance",
    "app1",
    "app2",
];

const N: usize = 10;
const DISORDER_SEED: u64 = 20_200_101;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PresetKind {
    Sweep { spec: SweepSpec },
    /// Several panels, each written to its own file with the given suffix.
    Panels { panels: Vec<(String, SweepSpec)> },
    /// Grid-search optimum and plateau against chain length.
    OptimalField {
        base: ChainParams,
        initial_state: InitialState,
        sizes: Vec<usize>,
        grid_points: usize,
    },
    Scaling {
        base: ChainParams,
        states: Vec<InitialState>,
        sizes: Vec<usize>,
        grid_points: usize,
    },
    /// Population dynamics on a fields × dephasing panel grid.
    Trajectories {
        base: ChainParams,
        initial_state: InitialState,
        fields: Vec<f64>,
        dephasing: Vec<f64>,
        times: Vec<f64>,
    },
    Conductance {
        base: ChainParams,
        initial_state: InitialState,
        dephasing: Vec<f64>,
        e0_grid: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Preset {
    pub name: String,
    pub description: String,
    pub kind: PresetKind,
}

fn base() -> ChainParams {
    ChainParams::new(N).with_sink_rate(REFERENCE_ST_RATE)
}

fn field_axis() -> Axis {
    Axis::symmetric_log(Parameter::E0, 10.0, 12, 3).expect("static axis")
}

fn gamma_out_axis() -> Axis {
    Axis::log(Parameter::GammaOut, 0.1, 100.0, 31).expect("static axis")
}

fn dephasing_axis() -> Axis {
    Axis::log(Parameter::GammaPhi, 1e-3, 10.0, 25).expect("static axis")
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn sweep(base: ChainParams, state: InitialState, a1: Axis, a2: Option<Axis>, obs: Observable) -> SweepSpec {
    SweepSpec {
        base,
        initial_state: state,
        axis1: a1,
        axis2: a2,
        observable: obs,
        ensemble: None,
    }
}

pub fn preset(name: &str) -> Result<Preset> {
    let gauss = InitialState::reference_gaussian();
    let (description, kind) = match name {
        "fig2" => (
            "tau over field and sink coupling, weak dephasing",
            PresetKind::Sweep {
                spec: sweep(
                    base().with_dephasing(1e-3),
                    gauss,
                    field_axis(),
                    Some(gamma_out_axis()),
                    Observable::Tau,
                ),
            },
        ),
        "fig3a" | "fig3b" => {
            let g = if name == "fig3a" { 0.1 } else { 10.0 } * REFERENCE_ST_RATE;
            (
                "normalized width gap over field at fixed sink coupling",
                PresetKind::Sweep {
                    spec: sweep(
                        base().with_sink_rate(g),
                        gauss,
                        Axis::symmetric_log(Parameter::E0, 10.0, 24, 5).expect("static axis"),
                        None,
                        Observable::DeltaGamma,
                    ),
                },
            )
        }
        "fig4" => (
            "tau over field and dephasing at the superradiant coupling",
            PresetKind::Sweep {
                spec: sweep(base(), gauss, field_axis(), Some(dephasing_axis()), Observable::Tau),
            },
        ),
        "fig5" => (
            "participation ratios of the superradiant and subradiant states",
            PresetKind::Panels {
                panels: [("super", Observable::PrSuper), ("sub", Observable::PrSub)]
                    .into_iter()
                    .map(|(s, o)| (s.to_string(), sweep(base(), gauss, field_axis(), Some(gamma_out_axis()), o)))
                    .collect(),
            },
        ),
        "fig6" => (
            "optimal field and 10% plateau against chain length",
            PresetKind::OptimalField {
                base: base().with_dephasing(1e-6),
                initial_state: gauss,
                sizes: (6..=14).collect(),
                grid_points: 81,
            },
        ),
        "fig7" => (
            "minimal tau against chain length for localized, Gaussian and flat states",
            PresetKind::Scaling {
                base: base().with_dephasing(1e-6),
                states: vec![InitialState::localized(3), gauss, InitialState::Flat],
                sizes: (2..=16).collect(),
                grid_points: 41,
            },
        ),
        "fig8" => (
            "site populations over time, fields x dephasing",
            PresetKind::Trajectories {
                base: base(),
                initial_state: gauss,
                fields: vec![-1.0, -0.2, -0.001, 0.001, 0.2, 1.0],
                dephasing: vec![1e-4, 0.1, 1.0],
                times: linspace(0.0, 40.0, 401),
            },
        ),
        "fig_disorder" => (
            "ensemble-averaged tau over disorder width and dephasing",
            PresetKind::Sweep {
                spec: SweepSpec {
                    ensemble: Some(Ensemble {
                        n_realizations: 1000,
                        seed: DISORDER_SEED,
                    }),
                    ..sweep(
                        base(),
                        gauss,
                        Axis::new(Parameter::W, vec![0.0, 0.5, 1.0, 2.0, 3.2, 5.0], Scale::Linear).expect("static axis"),
                        Some(Axis::log(Parameter::GammaPhi, 1e-3, 10.0, 13).expect("static axis")),
                        Observable::Tau,
                    )
                },
            },
        ),
        "fig_leegwater" => (
            "tau over field for several dephasing rates, localized start",
            PresetKind::Sweep {
                spec: sweep(
                    base(),
                    InitialState::localized(3),
                    Axis::symmetric_log(Parameter::E0, 10.0, 24, 5).expect("static axis"),
                    Some(
                        Axis::new(Parameter::GammaPhi, vec![1e-3, 1e-2, 0.1, 0.4, 1.0, 2.0, 5.0], Scale::Log)
                            .expect("static axis"),
                    ),
                    Observable::Tau,
                ),
            },
        ),
        "fig_current" => (
            "charge current over field below and above the critical dephasing",
            PresetKind::Sweep {
                spec: sweep(
                    base(),
                    InitialState::centered_gaussian(N),
                    Axis::linear(Parameter::E0, -2.0, 2.0, 81).expect("static axis"),
                    Some(Axis::new(Parameter::GammaPhi, vec![1e-3, 1.0], Scale::Log).expect("static axis")),
                    Observable::Current,
                ),
            },
        ),
        "fig_conductance" => {
            let ec = critical_field(N, 1.0);
            (
                "linear-response conductance against dephasing",
                PresetKind::Conductance {
                    base: base(),
                    initial_state: InitialState::centered_gaussian(N),
                    dephasing: crate::nonhermitian::log_grid(1e-3, 20.0, 27),
                    e0_grid: linspace(-0.5 * ec, 0.5 * ec, 11),
                },
            )
        }
        "app1" => (
            "tau over sink coupling for localized starts, no field or dephasing",
            PresetKind::Panels {
                panels: [1usize, 2, 5, 9]
                    .into_iter()
                    .map(|n| {
                        (
                            format!("n{n}"),
                            sweep(
                                base(),
                                InitialState::localized(n),
                                Axis::log(Parameter::GammaOut, 0.01, 100.0, 41).expect("static axis"),
                                None,
                                Observable::Tau,
                            ),
                        )
                    })
                    .collect(),
            },
        ),
        "app2" => (
            "tau over field and dephasing, localized start",
            PresetKind::Sweep {
                spec: sweep(base(), InitialState::localized(3), field_axis(), Some(dephasing_axis()), Observable::Tau),
            },
        ),
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown preset {other:?}; expected one of {}",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    Ok(Preset {
        name: name.to_string(),
        description: description.to_string(),
        kind,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_is_valid() {
        for name in PRESET_NAMES {
            let p = preset(name).unwrap();
            match &p.kind {
                PresetKind::Sweep { spec } => spec.validate().unwrap(),
                PresetKind::Panels { panels } => panels.iter().for_each(|(_, s)| s.validate().unwrap()),
                _ => {}
            }
        }
        assert!(preset("fig99").is_err());
    }

    #[test]
    fn fig2_dimensions() {
        let PresetKind::Sweep { spec } = preset("fig2").unwrap().kind else {
            panic!("fig2 is a sweep")
        };
        assert_eq!(spec.n_cells(), 27 * 31);
        assert_eq!(spec.axis1.scale, Scale::SymmetricLog);
    }
}
