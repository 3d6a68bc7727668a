//! Bundled pipelines regenerating the data behind each figure panel.

use std::f64::consts::PI;

use cascade_qed::dynamics::{self, LifetimeAxis, TimeGrid};
use cascade_qed::ensemble::{disorder_sweep, EnsembleAxis};
use cascade_qed::io::{csv_row, fmt_f64};
use cascade_qed::response::{self, linspace, Observable, ResponseAxis};
use cascade_qed::spectral::{self, eigendecompose, StateClass};
use cascade_qed::{full_heff, mirror_heff, Component, DisorderSpec, Preset, SystemParams};
use rayon::prelude::*;

use crate::commands::{self, Ctx};
use crate::{CliError, Result};

pub const FIGURES: &[&str] = &[
    "fig1-inset",
    "fig2",
    "fig3a",
    "fig3b",
    "fig3c",
    "fig3d",
    "fig3e",
    "fig3f",
    "fig4a",
    "fig4b",
    "fig4c",
    "fig5a",
    "fig5b",
    "fig5c",
    "figS2",
    "figS3",
    "figS4",
];

/// Grid size, reduced under `--quick`.
fn n(quick: bool, full: usize, small: usize) -> usize {
    if quick {
        small
    } else {
        full
    }
}

pub fn reproduce(ctx: &mut Ctx, figure: &str, quick: bool) -> Result<()> {
    let fig2 = Preset::Fig2.params();
    let weak = Preset::Fig3Weak.params();
    let gw = fig2.gamma_wg;
    match figure {
        "fig1-inset" => {
            let p = fig2.with_n_atoms(9);
            let d = linspace(0.0, 1.0, n(quick, 401, 41));
            ctx.out.put(
                "bands.csv",
                spectral::band_sweep_vs_spacing(&p, &d)?.to_csv(),
            );
        }
        "fig2" => fig2_panels(ctx, quick)?,
        "fig3a" => dynamics_panel(ctx, &weak)?,
        "fig3b" => dynamics_panel(ctx, &fig2)?,
        "fig3c" => {
            let v = linspace(0.0, 2.0 * PI, n(quick, 201, 21));
            let s = dynamics::lifetime_enhancement_sweep(
                &fig2,
                &LifetimeAxis::Varphi(v),
                TimeGrid::default_for(&fig2),
            )?;
            ctx.failures("varphi sweep", s.points.iter().map(|x| &x.error));
            ctx.out.put("lifetime_vs_varphi.csv", s.to_csv());
        }
        "fig3d" => spectra_panel(ctx, &weak, &[])?,
        "fig3e" => spectra_panel(ctx, &fig2, &[0.85 * PI])?,
        "fig3f" => heatmap(
            ctx,
            &fig2,
            ResponseAxis::PhiDim(linspace(0.0, PI, n(quick, 101, 11))),
            Observable::Reflection,
            quick,
        )?,
        "fig4a" => {
            let j0 = linspace(0.0, 16.0 * gw, n(quick, 33, 5));
            let atoms: Vec<usize> = if quick {
                vec![1, 11, 21, 31]
            } else {
                (1..=61).step_by(2).collect()
            };
            let s = dynamics::lifetime_enhancement_sweep(
                &fig2,
                &LifetimeAxis::J0N { j0, n: atoms },
                TimeGrid::default_for(&fig2),
            )?;
            ctx.failures("J0-N sweep", s.points.iter().map(|x| &x.error));
            ctx.note(format!("critical J0 = {:.6}", fig2.critical_j0()));
            ctx.out.put("lifetime_vs_J0_N.csv", s.to_csv());
        }
        "fig4b" => {
            ctx.note(format!("critical J0 = {:.6}", fig2.critical_j0()));
            heatmap(
                ctx,
                &fig2,
                ResponseAxis::J0(linspace(0.0, 16.0 * gw, n(quick, 81, 9))),
                Observable::Emission,
                quick,
            )?
        }
        "fig4c" => {
            let j0 = linspace(0.0, 16.0 * gw, n(quick, 81, 9));
            for phi in [0.3, 0.2] {
                let base = SystemParams {
                    phi_dim: phi * PI,
                    ..fig2.clone()
                };
                let (csv, errors) = commands::dissipation_sweep_csv("J0", &j0, |x| SystemParams {
                    j0: x,
                    ..base.clone()
                });
                ctx.failures("dissipation sweep", &errors);
                ctx.out.put(format!("channels_vs_J0_phi_{phi}pi.csv"), csv);
            }
        }
        "fig5a" | "fig5b" | "fig5c" => {
            let spec = DisorderSpec {
                seed: ctx.cfg.disorder.seed,
                n_realizations: if quick {
                    ctx.cfg.disorder.n_realizations.min(8)
                } else {
                    ctx.cfg.disorder.n_realizations
                },
                ..Default::default()
            };
            let spec = match figure {
                "fig5a" => DisorderSpec {
                    position_frac: 0.02,
                    ..spec
                },
                "fig5b" => DisorderSpec {
                    coupling_frac: 0.2,
                    ..spec
                },
                _ => DisorderSpec {
                    frequency_halfwidth: fig2.g / 2f64.sqrt(),
                    ..spec
                },
            };
            let grid = TimeGrid::default_for(&fig2);
            let main = EnsembleAxis::J0(linspace(0.0, 16.0 * gw, n(quick, 17, 3)));
            let r = disorder_sweep(&fig2, &spec, &main, grid)?;
            commands::report_ensemble(ctx, &r);
            ctx.out.put("disorder_vs_J0.csv", r.to_csv());
            let inset = EnsembleAxis::Spacing(linspace(0.7, 0.8, n(quick, 11, 3)));
            let r = disorder_sweep(&fig2, &spec, &inset, grid)?;
            commands::report_ensemble(ctx, &r);
            ctx.out.put("disorder_vs_d.csv", r.to_csv());
        }
        "figS2" => figs2_panels(ctx, quick)?,
        "figS3" => {
            heatmap(
                ctx,
                &fig2,
                ResponseAxis::PhiDim(linspace(0.0, PI, n(quick, 101, 11))),
                Observable::Emission,
                quick,
            )?;
            let edge = SystemParams {
                phi_dim: 0.85 * PI,
                ..fig2.clone()
            };
            ctx.out.put(
                "eigen_phi_0.85pi.csv",
                eigendecompose(&full_heff(&edge)?)?.to_csv(),
            );
            let j0 = ResponseAxis::J0(linspace(2.0 * gw, 6.0 * gw, n(quick, 81, 9)));
            let w = linspace(-40.0, 40.0, n(quick, 801, 81));
            let map = response::response_sweep(&fig2, &j0, Observable::Emission, &w)?;
            ctx.failures("anticrossing closeup", &map.errors);
            ctx.out.put("closeup_S_vs_J0.csv", map.to_csv());
            let dark = SystemParams {
                phi_dim: 0.33 * PI,
                ..fig2.clone()
            };
            let h = full_heff(&dark)?;
            let d = response::default_delta_grid(&h);
            ctx.out.put(
                "dark_scatter.csv",
                response::reflection_transmission(&h, &d)?.to_csv(),
            );
            ctx.out.put(
                "dark_emission.csv",
                response::emission_spectrum(&h, &d)?.to_csv(),
            );
        }
        "figS4" => {
            let h = full_heff(&fig2)?;
            let d = cascade_qed::dissipation::dissipation_spectrum(&h)?;
            let sol = eigendecompose(&h)?;
            let rates = cascade_qed::dissipation::polariton_channel_rates(&h, &sol, &d).ok();
            ctx.out.put(
                "channels.csv",
                cascade_qed::dissipation::channels_csv(&d, rates.as_ref()),
            );
            ctx.out
                .put("channel_vectors.csv", commands::channel_vectors_csv(&h, &d));
        }
        other => {
            return Err(CliError::Config(format!(
                "unknown figure `{other}`; choose one of {}",
                FIGURES.join(", ")
            )))
        }
    }
    Ok(())
}

fn polariton_decays(p: &SystemParams) -> (f64, f64) {
    let decay = |class| -> Option<f64> {
        let sol = eigendecompose(&full_heff(p).ok()?).ok()?;
        sol.find(class).map(|k| sol.decay_rate(k))
    };
    (
        decay(StateClass::PolaritonPlus).unwrap_or(f64::NAN),
        decay(StateClass::PolaritonMinus).unwrap_or(f64::NAN),
    )
}

fn fig2_panels(ctx: &mut Ctx, quick: bool) -> Result<()> {
    let p = Preset::Fig2.params();
    let gw = p.gamma_wg;
    let sol = eigendecompose(&full_heff(&p)?)?;
    commands::print_states(&sol);
    ctx.out.put("eigen_topological.csv", sol.to_csv());
    let trivial = SystemParams {
        j0: 0.0,
        ..p.clone()
    };
    ctx.out.put(
        "eigen_trivial.csv",
        eigendecompose(&full_heff(&trivial)?)?.to_csv(),
    );
    ctx.out.put(
        "eigen_bare.csv",
        eigendecompose(&full_heff(&p.without_mirror())?)?.to_csv(),
    );

    let atoms: Vec<usize> = (1..=if quick { 21 } else { 61 }).step_by(2).collect();
    let j0s = [0.0, 4.0 * gw, 6.0 * gw, 8.0 * gw];
    let jobs: Vec<(usize, f64)> = atoms
        .iter()
        .flat_map(|&n| j0s.iter().map(move |&j| (n, j)))
        .collect();
    let rows: Vec<String> = jobs
        .par_iter()
        .map(|&(n, j0)| {
            let (a, b) = polariton_decays(&SystemParams {
                j0,
                ..p.with_n_atoms(n)
            });
            csv_row([n.to_string(), fmt_f64(j0), fmt_f64(a), fmt_f64(b)])
        })
        .collect();
    ctx.out.put(
        "decay_vs_N.csv",
        String::from("N,J0,decay_plus,decay_minus\n") + &rows.concat(),
    );

    let kappas = [10.0, 20.0, 40.0];
    let jobs: Vec<(usize, f64)> = atoms
        .iter()
        .flat_map(|&n| kappas.iter().map(move |&k| (n, k)))
        .collect();
    let rows: Vec<String> = jobs
        .par_iter()
        .map(|&(n, kappa)| {
            let q = SystemParams {
                kappa,
                ..p.with_n_atoms(n)
            };
            let (a, _) = polariton_decays(&q);
            let (a0, _) = polariton_decays(&SystemParams { j0: 0.0, ..q });
            csv_row([
                n.to_string(),
                fmt_f64(kappa),
                fmt_f64(a),
                fmt_f64(a0),
                fmt_f64(a / a0),
            ])
        })
        .collect();
    ctx.out.put(
        "decay_ratio_vs_N.csv",
        String::from("N,kappa,decay,decay_trivial,ratio\n") + &rows.concat(),
    );
    Ok(())
}

fn dynamics_panel(ctx: &mut Ctx, p: &SystemParams) -> Result<()> {
    let grid = TimeGrid::default_for(p);
    let times = grid.times();
    let run = |q: &SystemParams| -> cascade_qed::Result<dynamics::TimeSeries> {
        let h = full_heff(q)?;
        dynamics::propagate(&h, &dynamics::excite(&h, Component::Qe)?, &times)
    };
    let with = run(p)?;
    let bare = run(&p.without_mirror())?;
    let free = run(&SystemParams {
        g: 0.0,
        ..p.without_mirror()
    })?;
    ctx.out.put(
        "populations.csv",
        commands::populations_csv(&[("mirror", &with), ("bare", &bare), ("free", &free)]),
    );
    let mut out = String::from("case,tau,crossed,peaks_before\n");
    for (name, s) in [("mirror", &with), ("bare", &bare), ("free", &free)] {
        let lt = dynamics::lifetime(
            &s.times,
            &s.population_of(Component::Qe).unwrap_or_default(),
        )?;
        out.push_str(&csv_row([
            name.to_string(),
            fmt_f64(lt.tau),
            lt.crossed.to_string(),
            lt.peaks_before.to_string(),
        ]));
    }
    ctx.out.put("lifetimes.csv", out);
    Ok(())
}

fn spectra_panel(ctx: &mut Ctx, p: &SystemParams, extra_phi: &[f64]) -> Result<()> {
    let h = full_heff(p)?;
    let d = response::default_delta_grid(&h);
    let bare = full_heff(&p.without_mirror())?;
    ctx.out.put(
        "scatter_mirror.csv",
        response::reflection_transmission(&h, &d)?.to_csv(),
    );
    ctx.out.put(
        "scatter_bare.csv",
        response::reflection_transmission(&bare, &d)?.to_csv(),
    );
    ctx.out.put(
        "emission_mirror.csv",
        response::emission_spectrum(&h, &d)?.to_csv(),
    );
    ctx.out.put(
        "emission_bare.csv",
        response::emission_spectrum(&bare, &d)?.to_csv(),
    );
    for &phi in extra_phi {
        let q = SystemParams {
            phi_dim: phi,
            ..p.clone()
        };
        let s = response::emission_spectrum(&full_heff(&q)?, &d)?;
        ctx.out
            .put(format!("emission_phi_{:.2}pi.csv", phi / PI), s.to_csv());
    }
    Ok(())
}

fn heatmap(
    ctx: &mut Ctx,
    p: &SystemParams,
    axis: ResponseAxis,
    obs: Observable,
    quick: bool,
) -> Result<()> {
    let d = linspace(-60.0, 60.0, n(quick, 601, 61));
    let map = response::response_sweep(p, &axis, obs, &d)?;
    ctx.failures("heatmap", &map.errors);
    ctx.out.put(
        format!("heatmap_{}_vs_{}.csv", obs.symbol(), axis.name()),
        map.to_csv(),
    );
    Ok(())
}

fn figs2_panels(ctx: &mut Ctx, quick: bool) -> Result<()> {
    let base = SystemParams {
        gamma0: 0.0,
        ..Preset::Fig2.params()
    };
    let gw = base.gamma_wg;
    let j0 = linspace(0.0, 5.0 * gw, n(quick, 101, 11));
    for d in [0.25, 0.75] {
        let p = SystemParams {
            varphi: 2.0 * PI * d,
            ..base.clone()
        };
        let scan = spectral::edge_decay_scan(&p, &j0)?;
        ctx.failures("edge scan", scan.iter().map(|x| &x.error));
        ctx.out
            .put(format!("edge_decay_d_{d}.csv"), commands::edge_csv(&scan));
    }

    // only the edge scan drops the intrinsic loss
    let lossy = Preset::Fig2.params();
    let j0 = linspace(0.0, 16.0 * gw, n(quick, 81, 9));
    let jobs: Vec<(usize, f64)> = [11usize, 21, 31, 41]
        .iter()
        .flat_map(|&n| j0.iter().map(move |&j| (n, j)))
        .collect();
    let rows: Vec<std::result::Result<String, String>> = jobs
        .par_iter()
        .map(|&(n, j)| {
            let r = |j0: f64| -> cascade_qed::Result<f64> {
                let h = mirror_heff(&SystemParams {
                    j0,
                    ..lossy.with_n_atoms(n)
                })?;
                Ok(response::reflection_transmission(&h, &[0.0])?
                    .reflection
                    .values[0])
            };
            let (rt, ra) = (
                r(j).map_err(|e| e.to_string())?,
                r(0.0).map_err(|e| e.to_string())?,
            );
            Ok(csv_row([
                n.to_string(),
                fmt_f64(j),
                fmt_f64(rt),
                fmt_f64(ra),
                fmt_f64(rt / ra),
            ]))
        })
        .collect();
    let mut out = String::from("N,J0,R,R_trivial,ratio\n");
    let mut errors = Vec::new();
    for r in rows {
        match r {
            Ok(s) => out.push_str(&s),
            Err(e) => errors.push(Some(e)),
        }
    }
    ctx.failures("reflection enhancement", &errors);
    ctx.out.put("reflection_enhancement.csv", out);

    for phi in [0.3, 0.7] {
        let p = SystemParams {
            phi_dim: phi * PI,
            ..base.clone()
        };
        ctx.out.put(
            format!("mirror_states_phi_{phi}pi.csv"),
            eigendecompose(&mirror_heff(&p)?)?.to_csv(),
        );
    }
    Ok(())
}
