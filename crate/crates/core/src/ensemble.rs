//! Disorder ensembles of the lifetime enhancement.

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{self, TimeGrid};
use crate::error::{Error, Result};
use crate::hamiltonian;
use crate::params::{sample_realization, DisorderSpec, SystemParams};

#[derive(Debug, Clone, PartialEq)]
pub enum EnsembleAxis {
    J0(Vec<f64>),
    /// Atom spacing in units of the wavelength; `varphi = 2 pi d`.
    Spacing(Vec<f64>),
}

impl EnsembleAxis {
    pub fn name(&self) -> &'static str {
        match self {
            EnsembleAxis::J0(_) => "J0",
            EnsembleAxis::Spacing(_) => "d",
        }
    }

    pub fn values(&self) -> &[f64] {
        match self {
            EnsembleAxis::J0(v) | EnsembleAxis::Spacing(v) => v,
        }
    }

    fn apply(&self, base: &SystemParams, x: f64) -> SystemParams {
        match self {
            EnsembleAxis::J0(_) => SystemParams {
                j0: x,
                ..base.clone()
            },
            EnsembleAxis::Spacing(_) => SystemParams {
                varphi: 2.0 * std::f64::consts::PI * x,
                ..base.clone()
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stats {
    pub count: usize,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl Stats {
    /// Two-pass statistics anchored on the first sample, so identical
    /// samples give exactly zero spread. `None` for an empty slice.
    pub fn of(xs: &[f64]) -> Option<Self> {
        let &x0 = xs.first()?;
        let n = xs.len() as f64;
        let mean = x0 + xs.iter().map(|x| x - x0).sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        Some(Self {
            count: xs.len(),
            mean,
            std: var.sqrt(),
            min: xs.iter().copied().fold(f64::INFINITY, f64::min),
            max: xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Sample {
    Value(f64),
    /// Envelope never crossed; the value is a lower bound.
    Censored(f64),
    Failed(String),
}

#[derive(Debug, Clone)]
pub struct EnsemblePoint {
    pub x: f64,
    pub samples: Vec<Sample>,
    /// Crossed lifetimes only.
    pub stats: Option<Stats>,
    /// Censored lower bounds included at face value.
    pub stats_with_censored: Option<Stats>,
    pub censored: usize,
    pub failed: usize,
}

#[derive(Debug, Clone)]
pub struct EnsembleResult {
    pub axis: String,
    pub tau0: f64,
    pub seed: u64,
    pub n_realizations: usize,
    pub points: Vec<EnsemblePoint>,
}

impl EnsembleResult {
    /// `x,mean,std,min,max,count,mean_all,std_all,censored,failed`.
    pub fn to_csv(&self) -> String {
        use crate::io::fmt_f64;
        let nan = || "nan".to_string();
        let mut out = format!(
            "{},mean,std,min,max,count,mean_with_censored,std_with_censored,censored,failed\n",
            self.axis
        );
        for p in &self.points {
            let (m, s, lo, hi, n) = match p.stats {
                Some(st) => (
                    fmt_f64(st.mean),
                    fmt_f64(st.std),
                    fmt_f64(st.min),
                    fmt_f64(st.max),
                    st.count,
                ),
                None => (nan(), nan(), nan(), nan(), 0),
            };
            let (ma, sa) = match p.stats_with_censored {
                Some(st) => (fmt_f64(st.mean), fmt_f64(st.std)),
                None => (nan(), nan()),
            };
            out.push_str(&format!(
                "{},{m},{s},{lo},{hi},{n},{ma},{sa},{},{}\n",
                fmt_f64(p.x),
                p.censored,
                p.failed
            ));
        }
        out
    }
}

/// `tau_TO / tau_0` statistics over `spec.n_realizations` disordered mirrors
/// at every axis value. Work items run in parallel; results are reduced in
/// index order so the output does not depend on scheduling.
pub fn disorder_sweep(
    base: &SystemParams,
    spec: &DisorderSpec,
    axis: &EnsembleAxis,
    grid: TimeGrid,
) -> Result<EnsembleResult> {
    base.validate()?;
    spec.validate()?;
    if spec.active_kinds() > 1 && !spec.combined {
        return Err(Error::Config(
            "more than one disorder type enabled; set `combined = true` to allow it".into(),
        ));
    }
    let tau0 = dynamics::reference_lifetime(base, grid)?;
    if !tau0.crossed {
        return Err(Error::Unsupported(
            "reference lifetime did not cross e^-1".into(),
        ));
    }
    let tau0 = tau0.tau;
    let xs = axis.values();
    let nr = spec.n_realizations;

    let samples: Vec<Sample> = (0..xs.len() * nr)
        .into_par_iter()
        .map(|job| {
            let (point, index) = (job / nr, job % nr);
            let p = axis.apply(base, xs[point]);
            let run = || -> Result<dynamics::Lifetime> {
                let real = sample_realization(&p, spec, index)?;
                let h = hamiltonian::build_full_heff(&p, &real)?;
                dynamics::qe_lifetime(&h, grid)
            };
            match run() {
                Ok(lt) if lt.crossed => Sample::Value(lt.tau / tau0),
                Ok(lt) => Sample::Censored(lt.tau / tau0),
                Err(e) => Sample::Failed(e.to_string()),
            }
        })
        .collect();

    let points = xs
        .iter()
        .zip(samples.chunks(nr))
        .map(|(&x, chunk)| {
            let crossed: Vec<f64> = chunk
                .iter()
                .filter_map(|s| match s {
                    Sample::Value(v) => Some(*v),
                    _ => None,
                })
                .collect();
            let all: Vec<f64> = chunk
                .iter()
                .filter_map(|s| match s {
                    Sample::Value(v) | Sample::Censored(v) => Some(*v),
                    Sample::Failed(_) => None,
                })
                .collect();
            EnsemblePoint {
                x,
                stats: Stats::of(&crossed),
                stats_with_censored: Stats::of(&all),
                censored: chunk
                    .iter()
                    .filter(|s| matches!(s, Sample::Censored(_)))
                    .count(),
                failed: chunk
                    .iter()
                    .filter(|s| matches!(s, Sample::Failed(_)))
                    .count(),
                samples: chunk.to_vec(),
            }
        })
        .collect();

    Ok(EnsembleResult {
        axis: axis.name().into(),
        tau0,
        seed: spec.seed,
        n_realizations: nr,
        points,
    })
}
