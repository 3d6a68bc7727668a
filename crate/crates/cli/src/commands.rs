use std::f64::consts::PI;

use cascade_qed::config::ResolvedConfig;
use cascade_qed::dissipation::{channels_csv, dissipation_spectrum, polariton_channel_rates};
use cascade_qed::dynamics::{self, LifetimeAxis, TimeGrid};
use cascade_qed::ensemble::{disorder_sweep, EnsembleAxis, EnsembleResult};
use cascade_qed::hamiltonian::matrix_csv;
use cascade_qed::io::{csv_row, fmt_f64};
use cascade_qed::response::{self, Observable, ResponseAxis};
use cascade_qed::spectral::{self, eigendecompose, EdgePoint, EigenSolution, StateClass};
use cascade_qed::{full_heff, mirror_heff, Component, EffectiveHamiltonian, SystemParams};
use rayon::prelude::*;

use crate::args::Command;
use crate::output::Writer;
use crate::{CliError, Result};

/// State shared by one invocation.
pub struct Ctx<'a> {
    pub cfg: &'a ResolvedConfig,
    pub out: &'a Writer,
    pub notes: Vec<String>,
    pub seeds: Vec<u64>,
    pub partial: bool,
}

impl Ctx<'_> {
    pub fn note(&mut self, msg: impl Into<String>) {
        let msg = msg.into();
        println!("{msg}");
        self.notes.push(msg);
    }

    /// Marks the run as partial when any per-point error was recorded.
    pub fn failures<'e>(
        &mut self,
        what: &str,
        errors: impl IntoIterator<Item = &'e Option<String>>,
    ) {
        let errs: Vec<&String> = errors.into_iter().flatten().collect();
        if let Some(first) = errs.first() {
            self.partial = true;
            self.notes.push(format!(
                "{what}: {} point(s) failed, first: {first}",
                errs.len()
            ));
            eprintln!("warning: {what}: {} point(s) failed", errs.len());
        }
    }
}

pub fn run(cmd: &Command, ctx: &mut Ctx) -> Result<()> {
    match cmd {
        Command::Eigen { mirror } => eigen(ctx, *mirror),
        Command::Bands => bands(ctx),
        Command::Dynamics => dynamics_cmd(ctx),
        Command::Lifetime => lifetime(ctx),
        Command::Scatter { mirror } => scatter(ctx, *mirror),
        Command::Emission => emission(ctx),
        Command::Dissipation => dissipation(ctx),
        Command::Disorder => disorder(ctx),
        Command::Sweep => sweep(ctx),
        Command::Reproduce { figure, quick } => crate::figures::reproduce(ctx, figure, *quick),
    }
}

fn grid_values(cfg: &ResolvedConfig, axis: &str) -> Option<Vec<f64>> {
    cfg.run.grid(axis).map(|g| g.values())
}

pub fn time_grid(cfg: &ResolvedConfig) -> Result<TimeGrid> {
    let d = TimeGrid::default_for(&cfg.system);
    Ok(TimeGrid::new(
        cfg.run.t_end.unwrap_or(d.t_end),
        cfg.run.points.unwrap_or(d.points),
    )?)
}

fn delta_grid(cfg: &ResolvedConfig, h: &EffectiveHamiltonian) -> Vec<f64> {
    cfg.run
        .delta
        .as_ref()
        .map(|g| g.values())
        .unwrap_or_else(|| response::default_delta_grid(h))
}

fn hamiltonian(p: &SystemParams, mirror: bool) -> Result<EffectiveHamiltonian> {
    Ok(if mirror {
        mirror_heff(p)?
    } else {
        full_heff(p)?
    })
}

pub fn print_states(sol: &EigenSolution) {
    for class in [
        StateClass::PolaritonPlus,
        StateClass::PolaritonMinus,
        StateClass::Edge,
    ] {
        for k in sol.indices_of(class) {
            let e = sol.eigenvalues[k];
            println!(
                "{class:>12}  E = {:+.6} {:+.6}i  decay = {:.6}",
                e.re,
                e.im,
                sol.decay_rate(k)
            );
        }
    }
    if sol.ambiguous {
        println!("note: polariton assignment is ambiguous");
    }
}

fn eigen(ctx: &mut Ctx, mirror: bool) -> Result<()> {
    let h = hamiltonian(&ctx.cfg.system, mirror)?;
    let sol = eigendecompose(&h)?;
    print_states(&sol);
    if sol.near_defective {
        ctx.note(format!(
            "eigenbasis is near-defective, condition {:.3e}",
            sol.condition
        ));
    }
    ctx.out.put("eigen.csv", sol.to_csv());
    ctx.out.put("heff.csv", matrix_csv(&h));
    Ok(())
}

pub fn edge_csv(points: &[EdgePoint]) -> String {
    let mut out = String::from("J0,decay,re_energy,localized,error\n");
    let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_else(|| "nan".into());
    for p in points {
        out.push_str(&csv_row([
            fmt_f64(p.j0),
            opt(p.decay),
            opt(p.re_energy),
            p.localized.to_string(),
            p.error.clone().unwrap_or_default(),
        ]));
    }
    out
}

fn bands(ctx: &mut Ctx) -> Result<()> {
    let p = &ctx.cfg.system;
    let d = grid_values(ctx.cfg, "d").unwrap_or_else(|| response::linspace(0.0, 1.0, 201));
    ctx.out.put(
        "bands.csv",
        spectral::band_sweep_vs_spacing(p, &d)?.to_csv(),
    );
    if let Some(j0) = grid_values(ctx.cfg, "J0") {
        let scan = spectral::edge_decay_scan(p, &j0)?;
        ctx.failures("edge scan", scan.iter().map(|x| &x.error));
        ctx.out.put("edge_decay.csv", edge_csv(&scan));
    }
    Ok(())
}

/// Emitter, cavity and total populations.
pub fn populations_csv(series: &[(&str, &dynamics::TimeSeries)]) -> String {
    let mut header = vec!["t".to_string()];
    for (name, _) in series {
        for col in ["qe", "ccw", "cw", "total"] {
            header.push(format!("{col}_{name}"));
        }
    }
    let mut out = csv_row(&header);
    let cols: Vec<Vec<f64>> = series
        .iter()
        .flat_map(|(_, s)| {
            let pick = |c| {
                s.population_of(c)
                    .unwrap_or_else(|| vec![0.0; s.times.len()])
            };
            [
                pick(Component::Qe),
                pick(Component::Ccw),
                pick(Component::Cw),
                s.total_population(),
            ]
        })
        .collect();
    for (k, t) in series[0].1.times.iter().enumerate() {
        let mut row = vec![fmt_f64(*t)];
        row.extend(cols.iter().map(|c| fmt_f64(c[k])));
        out.push_str(&csv_row(row));
    }
    out
}

fn dynamics_cmd(ctx: &mut Ctx) -> Result<()> {
    let p = &ctx.cfg.system;
    let grid = time_grid(ctx.cfg)?;
    let h = full_heff(p)?;
    let ts = dynamics::propagate(&h, &dynamics::excite(&h, Component::Qe)?, &grid.times())?;
    let lt = dynamics::lifetime(
        &ts.times,
        &ts.population_of(Component::Qe).unwrap_or_default(),
    )?;
    println!(
        "method {:?}; emitter lifetime {:.6}{} with {} Rabi maxima before crossing",
        ts.method,
        lt.tau,
        if lt.crossed { "" } else { " (lower bound)" },
        lt.peaks_before
    );
    ctx.out.put("dynamics.csv", ts.to_csv());
    ctx.out
        .put("populations.csv", populations_csv(&[("mirror", &ts)]));
    Ok(())
}

fn lifetime_axis(cfg: &ResolvedConfig) -> Result<Option<LifetimeAxis>> {
    let counts = |v: Vec<f64>| -> Result<Vec<usize>> {
        v.into_iter()
            .map(|x| {
                if x >= 0.0 && x.fract() == 0.0 {
                    Ok(x as usize)
                } else {
                    Err(CliError::Config(format!(
                        "atom counts must be non-negative integers, got {x}"
                    )))
                }
            })
            .collect()
    };
    let n = grid_values(cfg, "N")
        .or_else(|| grid_values(cfg, "n_atoms"))
        .map(counts)
        .transpose()?;
    let j0 = grid_values(cfg, "J0");
    let varphi = grid_values(cfg, "varphi")
        .or_else(|| grid_values(cfg, "d").map(|d| d.iter().map(|x| 2.0 * PI * x).collect()));
    Ok(match (varphi, j0, n) {
        (Some(v), None, None) => Some(LifetimeAxis::Varphi(v)),
        (None, Some(j0), None) => Some(LifetimeAxis::J0(j0)),
        (None, None, Some(n)) => Some(LifetimeAxis::N(n)),
        (None, Some(j0), Some(n)) => Some(LifetimeAxis::J0N { j0, n }),
        (None, None, None) => None,
        _ => {
            return Err(CliError::Config(
                "lifetime sweeps take varphi (or d), J0, N or J0 with N".into(),
            ))
        }
    })
}

fn lifetime(ctx: &mut Ctx) -> Result<()> {
    let p = &ctx.cfg.system;
    let grid = time_grid(ctx.cfg)?;
    match lifetime_axis(ctx.cfg)? {
        Some(axis) => {
            let sweep = dynamics::lifetime_enhancement_sweep(p, &axis, grid)?;
            ctx.failures("lifetime sweep", sweep.points.iter().map(|x| &x.error));
            println!("tau_0 = {:.6}", sweep.tau0);
            ctx.out.put("lifetime_sweep.csv", sweep.to_csv());
        }
        None => {
            let tau0 = dynamics::reference_lifetime(p, grid)?;
            let lt = dynamics::qe_lifetime(&full_heff(p)?, grid)?;
            println!(
                "tau = {:.6}, tau_0 = {:.6}, ratio = {:.4}{}",
                lt.tau,
                tau0.tau,
                lt.tau / tau0.tau,
                if lt.crossed { "" } else { " (lower bound)" }
            );
            let mut out = String::from(
                "tau,tau0,ratio,crossed,reference_crossed,peaks_before,raw_maxima_before\n",
            );
            out.push_str(&csv_row([
                fmt_f64(lt.tau),
                fmt_f64(tau0.tau),
                fmt_f64(lt.tau / tau0.tau),
                lt.crossed.to_string(),
                tau0.crossed.to_string(),
                lt.peaks_before.to_string(),
                lt.raw_maxima_before.to_string(),
            ]));
            ctx.out.put("lifetime.csv", out);
        }
    }
    Ok(())
}

fn scatter(ctx: &mut Ctx, mirror: bool) -> Result<()> {
    let h = hamiltonian(&ctx.cfg.system, mirror)?;
    let d = delta_grid(ctx.cfg, &h);
    let s = response::reflection_transmission(&h, &d)?;
    println!("max |R + T - 1| = {:.3e}", s.flux_defect());
    ctx.out.put("scatter.csv", s.to_csv());
    Ok(())
}

fn emission(ctx: &mut Ctx) -> Result<()> {
    let h = full_heff(&ctx.cfg.system)?;
    let w = delta_grid(ctx.cfg, &h);
    let s = response::emission_spectrum(&h, &w)?;
    for k in response::local_maxima(&s.values) {
        let width = response::fwhm(&s.delta, &s.values, k);
        println!(
            "peak at {:+.6}, S = {:.6e}, FWHM {}",
            s.delta[k],
            s.values[k],
            width.map_or("unresolved".into(), |f| format!("{f:.6}"))
        );
    }
    ctx.out.put("emission.csv", s.to_csv());
    Ok(())
}

/// Polariton channel rates along an axis, long format.
pub fn dissipation_sweep_csv(
    name: &str,
    xs: &[f64],
    apply: impl Fn(f64) -> SystemParams + Sync,
) -> (String, Vec<Option<String>>) {
    let rows: Vec<std::result::Result<String, String>> = xs
        .par_iter()
        .map(|&x| {
            let run = || -> cascade_qed::Result<String> {
                let h = full_heff(&apply(x))?;
                let sol = eigendecompose(&h)?;
                let d = dissipation_spectrum(&h)?;
                let r = polariton_channel_rates(&h, &sol, &d)?;
                let mut out = String::new();
                for (m, chi) in d.chi.iter().enumerate() {
                    out.push_str(&csv_row([
                        fmt_f64(x),
                        (m + 1).to_string(),
                        fmt_f64(*chi),
                        d.labels[m].to_string(),
                        fmt_f64(r.plus.per_channel[m]),
                        fmt_f64(r.minus.per_channel[m]),
                        r.ambiguous.to_string(),
                    ]));
                }
                Ok(out)
            };
            run().map_err(|e| e.to_string())
        })
        .collect();
    let mut out = format!("{name},m,chi,label,rate_plus,rate_minus,ambiguous\n");
    let mut errors = Vec::new();
    for r in rows {
        match r {
            Ok(s) => {
                out.push_str(&s);
                errors.push(None);
            }
            Err(e) => errors.push(Some(e)),
        }
    }
    (out, errors)
}

fn dissipation(ctx: &mut Ctx) -> Result<()> {
    let p = ctx.cfg.system.clone();
    let axis = [("J0", "J0"), ("phi_dim", "phi")]
        .into_iter()
        .find_map(|(key, label)| grid_values(ctx.cfg, key).map(|v| (key, label, v)));
    match axis {
        Some((key, label, xs)) => {
            let (csv, errors) = dissipation_sweep_csv(label, &xs, |x| match key {
                "J0" => SystemParams { j0: x, ..p.clone() },
                _ => SystemParams {
                    phi_dim: x,
                    ..p.clone()
                },
            });
            ctx.failures("dissipation sweep", &errors);
            ctx.out.put("dissipation_sweep.csv", csv);
        }
        None => {
            let h = full_heff(&p)?;
            let d = dissipation_spectrum(&h)?;
            let sol = eigendecompose(&h)?;
            let rates = match polariton_channel_rates(&h, &sol, &d) {
                Ok(r) => Some(r),
                Err(e) => {
                    ctx.note(format!("no polariton channel rates: {e}"));
                    None
                }
            };
            println!("rank {} at relative threshold 1e-10", d.rank(1e-10));
            ctx.out
                .put("channels.csv", channels_csv(&d, rates.as_ref()));
            ctx.out
                .put("channel_vectors.csv", channel_vectors_csv(&h, &d));
        }
    }
    Ok(())
}

pub fn channel_vectors_csv(
    h: &EffectiveHamiltonian,
    d: &cascade_qed::dissipation::DissipationAnalysis,
) -> String {
    let mut out = String::from("m,component,re,im,abs2\n");
    for m in 0..d.chi.len() {
        for (comp, z) in h.basis.iter().zip(d.channel(m)) {
            out.push_str(&csv_row([
                (m + 1).to_string(),
                comp.to_string(),
                fmt_f64(z.re),
                fmt_f64(z.im),
                fmt_f64(z.norm_sqr()),
            ]));
        }
    }
    out
}

pub fn report_ensemble(ctx: &mut Ctx, r: &EnsembleResult) {
    let failed: usize = r.points.iter().map(|p| p.failed).sum();
    if failed > 0 {
        ctx.partial = true;
        ctx.notes.push(format!("{failed} realization(s) failed"));
        eprintln!("warning: {failed} realization(s) failed");
    }
    let censored: usize = r.points.iter().map(|p| p.censored).sum();
    if censored > 0 {
        ctx.note(format!(
            "{censored} realization(s) did not cross e^-1 and are censored"
        ));
    }
    if !ctx.seeds.contains(&r.seed) {
        ctx.seeds.push(r.seed);
    }
}

fn disorder(ctx: &mut Ctx) -> Result<()> {
    let p = &ctx.cfg.system;
    let axis = match (grid_values(ctx.cfg, "J0"), grid_values(ctx.cfg, "d")) {
        (Some(_), Some(_)) => {
            return Err(CliError::Config(
                "disorder sweeps take one axis: J0 or d".into(),
            ))
        }
        (Some(v), None) => EnsembleAxis::J0(v),
        (None, Some(v)) => EnsembleAxis::Spacing(v),
        (None, None) => EnsembleAxis::J0(vec![p.j0]),
    };
    let r = disorder_sweep(p, &ctx.cfg.disorder, &axis, time_grid(ctx.cfg)?)?;
    report_ensemble(ctx, &r);
    println!(
        "tau_0 = {:.6}, {} realizations per point",
        r.tau0, r.n_realizations
    );
    ctx.out.put("disorder.csv", r.to_csv());
    Ok(())
}

fn sweep(ctx: &mut Ctx) -> Result<()> {
    let p = &ctx.cfg.system;
    let axis = match (grid_values(ctx.cfg, "phi_dim"), grid_values(ctx.cfg, "J0")) {
        (Some(v), None) => ResponseAxis::PhiDim(v),
        (None, Some(v)) => ResponseAxis::J0(v),
        _ => {
            return Err(CliError::Config(
                "sweep needs exactly one of --grid phi_dim=.. or --grid J0=..".into(),
            ))
        }
    };
    let obs = Observable::from_name(ctx.cfg.run.observable.as_deref().unwrap_or("R"))?;
    let d = delta_grid(ctx.cfg, &full_heff(p)?);
    let map = response::response_sweep(p, &axis, obs, &d)?;
    ctx.failures("sweep", &map.errors);
    ctx.out
        .put(format!("heatmap_{}.csv", obs.symbol()), map.to_csv());
    Ok(())
}
