//! Single-excitation time evolution and lifetime extraction.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hamiltonian::{self, Component, EffectiveHamiltonian};
use crate::linalg::{self, CMat, C64, I};
use crate::ode::{self, Tolerance};
use crate::params::{MirrorRealization, SystemParams};
use crate::spectral::NEAR_DEFECTIVE_COND;

const THRESHOLD: f64 = 0.367_879_441_171_442_33; // e^-1
const MAX_EXTENSIONS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Eigenbasis,
    Integrator,
}

/// Uniform time grid `[0, t_end]` with `points` samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t_end: f64,
    pub points: usize,
}

impl TimeGrid {
    pub fn new(t_end: f64, points: usize) -> Result<Self> {
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(Error::param("t_end", "must be positive and finite"));
        }
        if points < 2 {
            return Err(Error::param("points", "need at least two samples"));
        }
        Ok(Self { t_end, points })
    }

    /// 4001 points over `[0, 1.5 / unit]`.
    pub fn default_for(params: &SystemParams) -> Self {
        Self {
            t_end: 1.5 / params.unit_rate(),
            points: 4001,
        }
    }

    pub fn times(&self) -> Vec<f64> {
        let step = self.t_end / (self.points - 1) as f64;
        (0..self.points).map(|k| k as f64 * step).collect()
    }

    /// Four times longer at the same resolution.
    pub fn extended(&self) -> Self {
        Self {
            t_end: self.t_end * 4.0,
            points: (self.points - 1) * 4 + 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub basis: Vec<Component>,
    /// `amplitudes[t][k]`.
    pub amplitudes: Vec<Vec<C64>>,
    pub method: Method,
}

impl TimeSeries {
    pub fn population(&self, k: usize) -> Vec<f64> {
        self.amplitudes.iter().map(|s| s[k].norm_sqr()).collect()
    }

    pub fn population_of(&self, comp: Component) -> Option<Vec<f64>> {
        self.basis
            .iter()
            .position(|&b| b == comp)
            .map(|k| self.population(k))
    }

    pub fn total_population(&self) -> Vec<f64> {
        self.amplitudes
            .iter()
            .map(|s| s.iter().map(|z| z.norm_sqr()).sum())
            .collect()
    }

    /// `t` then `re,im,abs2` per component.
    pub fn to_csv(&self) -> String {
        use crate::io::fmt_f64;
        let mut out = String::from("t");
        for b in &self.basis {
            out.push_str(&format!(",{b}_re,{b}_im,{b}_abs2"));
        }
        out.push('\n');
        for (t, s) in self.times.iter().zip(&self.amplitudes) {
            out.push_str(&fmt_f64(*t));
            for z in s {
                out.push_str(&format!(
                    ",{},{},{}",
                    fmt_f64(z.re),
                    fmt_f64(z.im),
                    fmt_f64(z.norm_sqr())
                ));
            }
            out.push('\n');
        }
        out
    }
}

fn check_inputs(h: &EffectiveHamiltonian, initial: &[C64], times: &[f64]) -> Result<()> {
    if initial.len() != h.dim() {
        return Err(Error::Dimension(format!(
            "initial state has {} entries, Hamiltonian is {}x{}",
            initial.len(),
            h.dim(),
            h.dim()
        )));
    }
    if linalg::norm(initial) > 1.0 + 1e-12 {
        return Err(Error::param("initial", "norm exceeds 1"));
    }
    if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::param("times", "must be finite and non-decreasing"));
    }
    Ok(())
}

/// Unit excitation on one basis component.
pub fn excite(h: &EffectiveHamiltonian, comp: Component) -> Result<Vec<C64>> {
    let k = h
        .index_of(comp)
        .ok_or_else(|| Error::param("component", format!("{comp} is not in the basis")))?;
    let mut s = vec![C64::new(0.0, 0.0); h.dim()];
    s[k] = C64::new(1.0, 0.0);
    Ok(s)
}

struct Modes {
    values: Vec<C64>,
    vectors: CMat,
    coeffs: Vec<C64>,
}

fn modes(h: &CMat, initial: &[C64]) -> Result<Option<Modes>> {
    let (values, vectors) = linalg::eig(h)?;
    let cond = linalg::condition_number(&vectors);
    if cond.is_nan() || cond > NEAR_DEFECTIVE_COND {
        return Ok(None);
    }
    let coeffs = linalg::Lu::new(&vectors).solve(initial, || "eigenvector basis".into())?;
    Ok(Some(Modes {
        values,
        vectors,
        coeffs,
    }))
}

/// `s(t) = exp(-i H t) s(0)` on the grid. Uses the eigenbasis unless the
/// eigenvectors are near-defective, then the adaptive integrator.
pub fn propagate(h: &EffectiveHamiltonian, initial: &[C64], times: &[f64]) -> Result<TimeSeries> {
    check_inputs(h, initial, times)?;
    match modes(&h.matrix, initial)? {
        Some(m) => Ok(series(
            h,
            times,
            eigen_amplitudes(&m, times),
            Method::Eigenbasis,
        )),
        None => propagate_integrator(h, initial, times),
    }
}

/// Eigenbasis propagation only; fails when the basis is near-defective.
pub fn propagate_eigen(
    h: &EffectiveHamiltonian,
    initial: &[C64],
    times: &[f64],
) -> Result<TimeSeries> {
    check_inputs(h, initial, times)?;
    let m = modes(&h.matrix, initial)?.ok_or(Error::Singular {
        context: "near-defective eigenvector basis".into(),
    })?;
    Ok(series(
        h,
        times,
        eigen_amplitudes(&m, times),
        Method::Eigenbasis,
    ))
}

pub fn propagate_integrator(
    h: &EffectiveHamiltonian,
    initial: &[C64],
    times: &[f64],
) -> Result<TimeSeries> {
    check_inputs(h, initial, times)?;
    let amps = ode::integrate(&h.matrix, initial, times, Tolerance::default())?;
    Ok(series(h, times, amps, Method::Integrator))
}

fn series(
    h: &EffectiveHamiltonian,
    times: &[f64],
    amplitudes: Vec<Vec<C64>>,
    method: Method,
) -> TimeSeries {
    TimeSeries {
        times: times.to_vec(),
        basis: h.basis.clone(),
        amplitudes,
        method,
    }
}

fn eigen_amplitudes(m: &Modes, times: &[f64]) -> Vec<Vec<C64>> {
    let n = m.values.len();
    times
        .iter()
        .map(|&t| {
            let w: Vec<C64> = (0..n)
                .map(|k| m.coeffs[k] * (-I * m.values[k] * t).exp())
                .collect();
            linalg::matvec(&m.vectors, &w)
        })
        .collect()
}

/// `exp(-i H t) s` for a single, possibly negative, time.
pub fn evolve(h: &EffectiveHamiltonian, state: &[C64], t: f64) -> Result<Vec<C64>> {
    let m = modes(&h.matrix, state)?.ok_or(Error::Singular {
        context: "near-defective eigenvector basis".into(),
    })?;
    Ok(eigen_amplitudes(&m, &[t]).pop().unwrap())
}

/// Population of one component only, skipping the other rows.
pub fn component_population(
    h: &EffectiveHamiltonian,
    initial: &[C64],
    comp: Component,
    times: &[f64],
) -> Result<Vec<f64>> {
    check_inputs(h, initial, times)?;
    let row = h
        .index_of(comp)
        .ok_or_else(|| Error::param("component", format!("{comp} is not in the basis")))?;
    match modes(&h.matrix, initial)? {
        Some(m) => {
            let w: Vec<C64> = (0..m.values.len())
                .map(|k| m.vectors[(row, k)] * m.coeffs[k])
                .collect();
            Ok(times
                .iter()
                .map(|&t| {
                    w.iter()
                        .zip(&m.values)
                        .map(|(a, e)| a * (-I * e * t).exp())
                        .sum::<C64>()
                        .norm_sqr()
                })
                .collect())
        }
        None => Ok(propagate_integrator(h, initial, times)?.population(row)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lifetime {
    /// Envelope `e^-1` crossing, or the grid end when `crossed` is false.
    pub tau: f64,
    pub crossed: bool,
    /// Envelope maxima (Rabi peaks) strictly before `tau`.
    pub peaks_before: usize,
    /// All local maxima of the raw curve before `tau`.
    pub raw_maxima_before: usize,
}

impl Lifetime {
    pub fn lower_bound(&self) -> bool {
        !self.crossed
    }
}

fn log_cross(t: &[f64], p: &[f64], a: usize, b: usize) -> f64 {
    let (la, lb) = (p[a].ln(), p[b].ln());
    let lt = THRESHOLD.ln();
    if la == lb {
        return t[b];
    }
    t[a] + (t[b] - t[a]) * (la - lt) / (la - lb)
}

/// First `e^-1` crossing of the envelope of `population`, which must start at 1.
///
/// Envelope nodes are `t = 0` and the local maxima that are not exceeded by
/// any later maximum; the envelope interpolates linearly in `log p` between
/// nodes. After the last node the curve itself is used.
pub fn lifetime(times: &[f64], population: &[f64]) -> Result<Lifetime> {
    if times.len() != population.len() || times.len() < 2 {
        return Err(Error::Dimension(
            "times and population must match, length >= 2".into(),
        ));
    }
    if (population[0] - 1.0).abs() > 1e-9 {
        return Err(Error::param("population", "must start at 1"));
    }
    let p = population;
    let n = p.len();
    let raw: Vec<usize> = (1..n - 1)
        .filter(|&i| p[i] >= p[i - 1] && p[i] > p[i + 1])
        .collect();

    let mut nodes = Vec::new();
    let mut best = f64::NEG_INFINITY;
    for &i in raw.iter().rev() {
        if p[i] > best {
            nodes.push(i);
            best = p[i];
        }
    }
    nodes.push(0);
    nodes.reverse();

    let mut tau = None;
    for w in nodes.windows(2) {
        if p[w[1]] < THRESHOLD {
            tau = Some(log_cross(times, p, w[0], w[1]));
            break;
        }
    }
    if tau.is_none() {
        let last = *nodes.last().unwrap();
        if let Some(k) = (last + 1..n).find(|&k| p[k] < THRESHOLD) {
            tau = Some(log_cross(times, p, k - 1, k));
        }
    }
    let (tau, crossed) = match tau {
        Some(t) => (t, true),
        None => (times[n - 1], false),
    };
    let before = |idx: &usize| times[*idx] < tau;
    Ok(Lifetime {
        tau,
        crossed,
        peaks_before: nodes[1..].iter().filter(|i| before(i)).count(),
        raw_maxima_before: raw.iter().filter(|i| before(i)).count(),
    })
}

/// QE lifetime of `h` starting from the excited emitter. The grid is
/// extended up to three times when the envelope has not crossed.
pub fn qe_lifetime(h: &EffectiveHamiltonian, grid: TimeGrid) -> Result<Lifetime> {
    let s0 = excite(h, Component::Qe)?;
    let mut grid = grid;
    let mut out = None;
    for _ in 0..=MAX_EXTENSIONS {
        let times = grid.times();
        let p = component_population(h, &s0, Component::Qe, &times)?;
        let lt = lifetime(&times, &p)?;
        let done = lt.crossed;
        out = Some(lt);
        if done {
            break;
        }
        grid = grid.extended();
    }
    Ok(out.unwrap())
}

/// Bare cavity-QED lifetime `tau_0` for the rate set of `params`.
pub fn reference_lifetime(params: &SystemParams, grid: TimeGrid) -> Result<Lifetime> {
    qe_lifetime(&hamiltonian::full_heff(&params.without_mirror())?, grid)
}

#[derive(Debug, Clone, PartialEq)]
pub enum LifetimeAxis {
    Varphi(Vec<f64>),
    J0(Vec<f64>),
    N(Vec<usize>),
    /// Cartesian grid, `J0` fastest.
    J0N {
        j0: Vec<f64>,
        n: Vec<usize>,
    },
}

impl LifetimeAxis {
    fn points(&self, base: &SystemParams) -> Vec<SystemParams> {
        match self {
            LifetimeAxis::Varphi(v) => v
                .iter()
                .map(|&x| SystemParams {
                    varphi: x,
                    ..base.clone()
                })
                .collect(),
            LifetimeAxis::J0(v) => v
                .iter()
                .map(|&x| SystemParams {
                    j0: x,
                    ..base.clone()
                })
                .collect(),
            LifetimeAxis::N(v) => v.iter().map(|&n| base.with_n_atoms(n)).collect(),
            LifetimeAxis::J0N { j0, n } => n
                .iter()
                .flat_map(|&nn| {
                    j0.iter().map(move |&x| SystemParams {
                        j0: x,
                        ..base.with_n_atoms(nn)
                    })
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnhancementPoint {
    pub varphi: f64,
    pub j0: f64,
    pub n_atoms: usize,
    pub tau: Option<f64>,
    pub ratio: Option<f64>,
    pub lower_bound: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct EnhancementSweep {
    pub tau0: f64,
    pub points: Vec<EnhancementPoint>,
}

impl EnhancementSweep {
    pub fn ratios(&self) -> Vec<f64> {
        self.points
            .iter()
            .map(|p| p.ratio.unwrap_or(f64::NAN))
            .collect()
    }

    pub fn to_csv(&self) -> String {
        use crate::io::fmt_f64;
        let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_else(|| "nan".into());
        let mut out = String::from("varphi,J0,N,tau,ratio,lower_bound,error\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                fmt_f64(p.varphi),
                fmt_f64(p.j0),
                p.n_atoms,
                opt(p.tau),
                opt(p.ratio),
                p.lower_bound,
                p.error.as_deref().unwrap_or("")
            ));
        }
        out
    }
}

/// `tau_TO / tau_0` along one axis. Per-point failures are recorded, not raised.
pub fn lifetime_enhancement_sweep(
    base: &SystemParams,
    axis: &LifetimeAxis,
    grid: TimeGrid,
) -> Result<EnhancementSweep> {
    base.validate()?;
    let tau0 = reference_lifetime(base, grid)?;
    if !tau0.crossed {
        return Err(Error::Unsupported(
            "reference lifetime did not cross e^-1".into(),
        ));
    }
    let tau0 = tau0.tau;
    let points = axis
        .points(base)
        .into_par_iter()
        .map(|p| {
            let res = hamiltonian::build_full_heff(&p, &MirrorRealization::clean(&p))
                .and_then(|h| qe_lifetime(&h, grid));
            let mut pt = EnhancementPoint {
                varphi: p.varphi,
                j0: p.j0,
                n_atoms: p.n_atoms,
                tau: None,
                ratio: None,
                lower_bound: false,
                error: None,
            };
            match res {
                Ok(lt) => {
                    pt.tau = Some(lt.tau);
                    pt.ratio = Some(lt.tau / tau0);
                    pt.lower_bound = lt.lower_bound();
                }
                Err(e) => pt.error = Some(e.to_string()),
            }
            pt
        })
        .collect();
    Ok(EnhancementSweep { tau0, points })
}
