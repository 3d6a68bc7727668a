//! Driven steady state, waveguide reflection/transmission and the QE
//! emission spectrum.
//!
//! The probe enters from the left in the right-going guided mode. The
//! cascaded coupling feeds it into the CCW cavity mode and the atoms;
//! reflected light leaves through the left-going mode fed by CW and the atoms.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hamiltonian::{self, EffectiveHamiltonian, HamiltonianKind};
use crate::linalg::{self, c, CMat, C64, I};
use crate::params::SystemParams;

/// Input and output coupling vectors for the waveguide ports.
#[derive(Debug, Clone)]
pub struct Ports {
    pub p_in: Vec<C64>,
    pub r_out: Vec<C64>,
    pub t_out: Vec<C64>,
    /// Free propagation factor of the probe past the whole mirror.
    pub passthrough: C64,
}

impl Ports {
    pub fn new(h: &EffectiveHamiltonian) -> Self {
        let dim = h.dim();
        let off = h.atom_offset();
        let phases = &h.realization.phases;
        let phi_n = phases.last().copied().unwrap_or(0.0);
        let sg = h.params.gamma_wg.sqrt();
        let z = C64::new(0.0, 0.0);
        let mut p_in = vec![z; dim];
        let mut r_out = vec![z; dim];
        let mut t_out = vec![z; dim];
        if h.kind == HamiltonianKind::Full {
            let sk = h.params.kappa.sqrt();
            p_in[1] = c(sk, 0.0);
            t_out[1] = sk * C64::from_polar(1.0, phi_n);
            r_out[2] = sk * C64::from_polar(1.0, phi_n);
        }
        for (j, &ph) in phases.iter().enumerate() {
            p_in[off + j] = sg * C64::from_polar(1.0, ph);
            t_out[off + j] = sg * C64::from_polar(1.0, phi_n - ph);
            r_out[off + j] = sg * C64::from_polar(1.0, phi_n + ph);
        }
        Self {
            p_in,
            r_out,
            t_out,
            passthrough: C64::from_polar(1.0, phi_n),
        }
    }

    /// Multiplies every output channel by a common phase factor.
    pub fn rephased(&self, theta: f64) -> Self {
        let f = C64::from_polar(1.0, theta);
        Self {
            p_in: self.p_in.clone(),
            r_out: self.r_out.iter().map(|x| x * f).collect(),
            t_out: self.t_out.iter().map(|x| x * f).collect(),
            passthrough: self.passthrough * f,
        }
    }

    fn amplitudes(&self, s: &[C64]) -> (C64, C64) {
        let dot = |a: &[C64]| a.iter().zip(s).map(|(x, y)| x * y).sum::<C64>();
        (dot(&self.r_out), self.passthrough + dot(&self.t_out))
    }
}

/// `s(delta) = -i (delta I - H)^-1 P_in` for unit input amplitude.
pub fn steady_state(h: &EffectiveHamiltonian, delta: f64) -> Result<Vec<C64>> {
    steady_state_with(h, &Ports::new(h), delta)
}

fn steady_state_with(h: &EffectiveHamiltonian, ports: &Ports, delta: f64) -> Result<Vec<C64>> {
    let x = solve_reachable(h, delta, &ports.p_in, || format!("delta = {delta}"))?;
    Ok(x.into_iter().map(|v| -I * v).collect())
}

/// Components coupled to the support of `rhs` through nonzero entries of `H`.
fn reachable(h: &CMat, rhs: &[C64]) -> Vec<usize> {
    let n = rhs.len();
    let zero = C64::new(0.0, 0.0);
    let mut seen: Vec<bool> = rhs.iter().map(|z| *z != zero).collect();
    let mut stack: Vec<usize> = (0..n).filter(|&i| seen[i]).collect();
    while let Some(j) = stack.pop() {
        for i in 0..n {
            if !seen[i] && h[(i, j)] != zero {
                seen[i] = true;
                stack.push(i);
            }
        }
    }
    (0..n).filter(|&i| seen[i]).collect()
}

/// `(z - H)^-1 rhs`, solved on the invariant subspace generated by `rhs`.
/// Modes that the right-hand side never reaches do not need to be lossy.
fn solve_reachable(
    h: &EffectiveHamiltonian,
    z: f64,
    rhs: &[C64],
    context: impl FnOnce() -> String,
) -> Result<Vec<C64>> {
    let idx = reachable(&h.matrix, rhs);
    let mut out = vec![C64::new(0.0, 0.0); h.dim()];
    if idx.is_empty() {
        return Ok(out);
    }
    let m = CMat::from_fn(idx.len(), idx.len(), |a, b| {
        let d = if a == b {
            c(z, 0.0)
        } else {
            C64::new(0.0, 0.0)
        };
        d - h.matrix[(idx[a], idx[b])]
    });
    let sub: Vec<C64> = idx.iter().map(|&i| rhs[i]).collect();
    let x = linalg::Lu::new(&m).solve(&sub, context)?;
    for (k, &i) in idx.iter().enumerate() {
        out[i] = x[k];
    }
    Ok(out)
}

/// Complex reflection and transmission amplitudes at one detuning.
pub fn scattering_amplitudes(
    h: &EffectiveHamiltonian,
    ports: &Ports,
    delta: f64,
) -> Result<(C64, C64)> {
    Ok(ports.amplitudes(&steady_state_with(h, ports, delta)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSeries {
    /// `R`, `T` or `S`.
    pub observable: String,
    pub label: String,
    pub delta: Vec<f64>,
    pub values: Vec<f64>,
}

impl SpectrumSeries {
    pub fn to_csv(&self) -> String {
        crate::io::numeric_csv(
            &["delta", &self.observable],
            self.delta
                .iter()
                .zip(&self.values)
                .map(|(d, v)| vec![*d, *v]),
        )
    }

    pub fn argmax(&self) -> Option<usize> {
        (0..self.values.len()).max_by(|&a, &b| self.values[a].total_cmp(&self.values[b]))
    }
}

#[derive(Debug, Clone)]
pub struct Scattering {
    pub reflection: SpectrumSeries,
    pub transmission: SpectrumSeries,
}

impl Scattering {
    pub fn to_csv(&self) -> String {
        let r = &self.reflection;
        crate::io::numeric_csv(
            &["delta", "R", "T"],
            (0..r.delta.len()).map(|k| vec![r.delta[k], r.values[k], self.transmission.values[k]]),
        )
    }

    /// `max |R + T - 1|` over the grid.
    pub fn flux_defect(&self) -> f64 {
        self.reflection
            .values
            .iter()
            .zip(&self.transmission.values)
            .map(|(r, t)| (r + t - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Reflection and transmission spectra by direct solves per detuning.
pub fn reflection_transmission(h: &EffectiveHamiltonian, deltas: &[f64]) -> Result<Scattering> {
    reflection_transmission_with(h, &Ports::new(h), deltas)
}

pub fn reflection_transmission_with(
    h: &EffectiveHamiltonian,
    ports: &Ports,
    deltas: &[f64],
) -> Result<Scattering> {
    let amps = deltas
        .par_iter()
        .map(|&d| scattering_amplitudes(h, ports, d))
        .collect::<Result<Vec<_>>>()?;
    Ok(package(deltas, &amps))
}

fn package(deltas: &[f64], amps: &[(C64, C64)]) -> Scattering {
    let series = |name: &str, f: &dyn Fn(&(C64, C64)) -> f64| SpectrumSeries {
        observable: name.into(),
        label: "probe from left".into(),
        delta: deltas.to_vec(),
        values: amps.iter().map(f).collect(),
    };
    Scattering {
        reflection: series("R", &|a| a.0.norm_sqr()),
        transmission: series("T", &|a| a.1.norm_sqr()),
    }
}

/// Resolvent `(z - H)^-1` applied through the eigenbasis.
pub struct EigenResolvent {
    values: Vec<C64>,
    vectors: CMat,
    inverse: CMat,
    pub condition: f64,
}

impl EigenResolvent {
    pub fn new(h: &EffectiveHamiltonian) -> Result<Self> {
        let (values, vectors) = linalg::eig(&h.matrix)?;
        let condition = linalg::condition_number(&vectors);
        let inverse = linalg::inverse(&vectors)?;
        Ok(Self {
            values,
            vectors,
            inverse,
            condition,
        })
    }

    pub fn apply(&self, z: f64, rhs: &[C64]) -> Vec<C64> {
        let w = linalg::matvec(&self.inverse, rhs);
        let w: Vec<C64> = w
            .iter()
            .zip(&self.values)
            .map(|(x, e)| x / (c(z, 0.0) - e))
            .collect();
        linalg::matvec(&self.vectors, &w)
    }

    /// `[(z - H)^-1]_{kk}`.
    pub fn diagonal(&self, z: f64, k: usize) -> C64 {
        self.values
            .iter()
            .enumerate()
            .map(|(m, e)| self.vectors[(k, m)] * self.inverse[(m, k)] / (c(z, 0.0) - e))
            .sum()
    }
}

/// Same spectra as [`reflection_transmission`] through the eigenbasis.
pub fn reflection_transmission_eigen(
    h: &EffectiveHamiltonian,
    deltas: &[f64],
) -> Result<Scattering> {
    let ports = Ports::new(h);
    let res = EigenResolvent::new(h)?;
    let amps: Vec<(C64, C64)> = deltas
        .iter()
        .map(|&d| {
            let s: Vec<C64> = res
                .apply(d, &ports.p_in)
                .into_iter()
                .map(|x| -I * x)
                .collect();
            ports.amplitudes(&s)
        })
        .collect();
    Ok(package(deltas, &amps))
}

fn qe_index(h: &EffectiveHamiltonian) -> Result<usize> {
    h.index_of(hamiltonian::Component::Qe)
        .ok_or_else(|| Error::Unsupported("emission spectrum needs the QE in the basis".into()))
}

/// `S(omega) = Re{ i [(omega - H)^-1]_{QE,QE} }` at one frequency.
pub fn emission_at(h: &EffectiveHamiltonian, omega: f64) -> Result<f64> {
    let k = qe_index(h)?;
    let mut e = vec![C64::new(0.0, 0.0); h.dim()];
    e[k] = c(1.0, 0.0);
    let x = solve_reachable(h, omega, &e, || format!("omega = {omega}"))?;
    Ok((I * x[k]).re)
}

pub fn emission_spectrum(h: &EffectiveHamiltonian, omegas: &[f64]) -> Result<SpectrumSeries> {
    qe_index(h)?;
    let values = omegas
        .par_iter()
        .map(|&w| emission_at(h, w))
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectrumSeries {
        observable: "S".into(),
        label: "QE initially excited".into(),
        delta: omegas.to_vec(),
        values,
    })
}

pub fn emission_spectrum_eigen(h: &EffectiveHamiltonian, omegas: &[f64]) -> Result<SpectrumSeries> {
    let k = qe_index(h)?;
    let res = EigenResolvent::new(h)?;
    Ok(SpectrumSeries {
        observable: "S".into(),
        label: "QE initially excited".into(),
        delta: omegas.to_vec(),
        values: omegas
            .iter()
            .map(|&w| (I * res.diagonal(w, k)).re)
            .collect(),
    })
}

/// `int S(omega) d omega` over the real line by the midpoint rule in
/// `theta` with `omega = W tan(theta)`. The point count is raised until
/// every pole with QE weight is sampled at least ten times per linewidth.
pub fn emission_integral(h: &EffectiveHamiltonian, min_points: usize) -> Result<f64> {
    let k = qe_index(h)?;
    let res = EigenResolvent::new(h)?;
    let scale = res
        .values
        .iter()
        .map(|e| e.norm())
        .fold(h.params.unit_rate(), f64::max);
    let mut n = min_points.max(2001);
    for (m, e) in res.values.iter().enumerate() {
        let weight = (res.vectors[(k, m)] * res.inverse[(m, k)]).norm();
        let width = -2.0 * e.im;
        if weight < 1e-9 || width <= 0.0 {
            continue;
        }
        let theta = (e.re / scale).atan();
        let jac = scale / theta.cos().powi(2);
        let needed = (PI * jac / (0.1 * width)).ceil() as usize;
        n = n.max(needed.min(4_000_000));
    }
    let dtheta = PI / n as f64;
    let sum: f64 = (0..n)
        .into_par_iter()
        .map(|j| {
            let theta = -PI / 2.0 + (j as f64 + 0.5) * dtheta;
            let omega = scale * theta.tan();
            emission_at(h, omega).map(|s| s * scale / theta.cos().powi(2))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum();
    Ok(sum * dtheta)
}

/// Full width at half maximum of the peak at `peak`, by linear
/// interpolation. `None` if the half level is not reached inside the grid.
pub fn fwhm(x: &[f64], y: &[f64], peak: usize) -> Option<f64> {
    let half = y[peak] / 2.0;
    let left = (0..peak)
        .rev()
        .find(|&i| y[i] < half)
        .map(|i| x[i] + (x[i + 1] - x[i]) * (half - y[i]) / (y[i + 1] - y[i]))?;
    let right = (peak + 1..y.len())
        .find(|&i| y[i] < half)
        .map(|i| x[i - 1] + (x[i] - x[i - 1]) * (y[i - 1] - half) / (y[i - 1] - y[i]))?;
    Some(right - left)
}

/// Indices of strict local maxima.
pub fn local_maxima(y: &[f64]) -> Vec<usize> {
    (1..y.len().saturating_sub(1))
        .filter(|&i| y[i] > y[i - 1] && y[i] >= y[i + 1])
        .collect()
}

/// 2001 points over `+-2.5 sqrt(2) g` with a cavity, `+-4 Gamma` without.
pub fn default_delta_grid(h: &EffectiveHamiltonian) -> Vec<f64> {
    let half = match h.kind {
        HamiltonianKind::Full if h.params.g > 0.0 => 2.5 * 2f64.sqrt() * h.params.g,
        _ => 4.0 * h.params.gamma_wg.max(h.params.unit_rate()),
    };
    linspace(-half, half, 2001)
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n)
            .map(|k| a + (b - a) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    Reflection,
    Transmission,
    Emission,
}

impl Observable {
    pub fn from_name(s: &str) -> Result<Self> {
        match s {
            "R" | "r" | "reflection" => Ok(Observable::Reflection),
            "T" | "t" | "transmission" => Ok(Observable::Transmission),
            "S" | "s" | "emission" => Ok(Observable::Emission),
            other => Err(Error::Config(format!("unknown observable `{other}`"))),
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Observable::Reflection => "R",
            Observable::Transmission => "T",
            Observable::Emission => "S",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ResponseAxis {
    PhiDim(Vec<f64>),
    J0(Vec<f64>),
}

impl ResponseAxis {
    pub fn name(&self) -> &'static str {
        match self {
            ResponseAxis::PhiDim(_) => "phi",
            ResponseAxis::J0(_) => "J0",
        }
    }

    pub fn values(&self) -> &[f64] {
        match self {
            ResponseAxis::PhiDim(v) | ResponseAxis::J0(v) => v,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Heatmap {
    pub axis: String,
    pub observable: Observable,
    pub axis_values: Vec<f64>,
    pub delta: Vec<f64>,
    /// `values[axis][delta]`, NaN where the point failed.
    pub values: Vec<Vec<f64>>,
    pub errors: Vec<Option<String>>,
}

impl Heatmap {
    /// Long format `axis,delta,value`.
    pub fn to_csv(&self) -> String {
        use crate::io::fmt_f64;
        let mut out = format!("{},delta,{}\n", self.axis, self.observable.symbol());
        for (a, row) in self.axis_values.iter().zip(&self.values) {
            for (d, v) in self.delta.iter().zip(row) {
                out.push_str(&format!(
                    "{},{},{}\n",
                    fmt_f64(*a),
                    fmt_f64(*d),
                    fmt_f64(*v)
                ));
            }
        }
        out
    }
}

/// Observable versus detuning for each value on the axis (full network,
/// clean mirror).
pub fn response_sweep(
    base: &SystemParams,
    axis: &ResponseAxis,
    observable: Observable,
    deltas: &[f64],
) -> Result<Heatmap> {
    base.validate()?;
    let rows: Vec<std::result::Result<Vec<f64>, String>> = axis
        .values()
        .par_iter()
        .map(|&x| {
            let p = match axis {
                ResponseAxis::PhiDim(_) => SystemParams {
                    phi_dim: x,
                    ..base.clone()
                },
                ResponseAxis::J0(_) => SystemParams {
                    j0: x,
                    ..base.clone()
                },
            };
            let run = || -> Result<Vec<f64>> {
                let h = hamiltonian::full_heff(&p)?;
                Ok(match observable {
                    Observable::Reflection => {
                        reflection_transmission(&h, deltas)?.reflection.values
                    }
                    Observable::Transmission => {
                        reflection_transmission(&h, deltas)?.transmission.values
                    }
                    Observable::Emission => emission_spectrum(&h, deltas)?.values,
                })
            };
            run().map_err(|e| e.to_string())
        })
        .collect();
    let mut values = Vec::with_capacity(rows.len());
    let mut errors = Vec::with_capacity(rows.len());
    for r in rows {
        match r {
            Ok(v) => {
                values.push(v);
                errors.push(None);
            }
            Err(e) => {
                values.push(vec![f64::NAN; deltas.len()]);
                errors.push(Some(e));
            }
        }
    }
    Ok(Heatmap {
        axis: axis.name().into(),
        observable,
        axis_values: axis.values().to_vec(),
        delta: deltas.to_vec(),
        values,
        errors,
    })
}
