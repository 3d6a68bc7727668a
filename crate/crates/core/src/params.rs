//! Physical parameters, disorder specifications and mirror geometry.
//!
//! All rates share one unit. The presets use the free-space decay of the
//! emitter as the unit (`gamma0 = 1`); configurations with `gamma0 = 0` use
//! the waveguide rate `gamma_wg = 1` instead. Frequencies are detunings from
//! the cavity resonance, which is pinned to zero.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rates, geometry and counts defining one network instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Emitter coupling to each of the two counter-propagating cavity modes.
    pub g: f64,
    /// Decay of each cavity mode into the waveguide.
    pub kappa: f64,
    /// Free-space decay of the emitter and of every mirror atom.
    pub gamma0: f64,
    /// Waveguide-induced decay per direction per mirror atom.
    #[serde(rename = "Gamma")]
    pub gamma_wg: f64,
    /// Dimerization interaction strength.
    #[serde(rename = "J0")]
    pub j0: f64,
    /// Dimerization angle controlling the staggered hoppings.
    pub phi_dim: f64,
    pub n_atoms: usize,
    /// Propagation phase between neighbouring mirror atoms, `k0 * d`.
    pub varphi: f64,
    /// Propagation phase from the cavity junction to the first atom.
    pub phi1: f64,
    /// Per-atom detuning from the cavity; empty means all zero.
    #[serde(default)]
    pub detunings: Vec<f64>,
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        let rates = [
            ("g", self.g),
            ("kappa", self.kappa),
            ("gamma0", self.gamma0),
            ("Gamma", self.gamma_wg),
            ("J0", self.j0),
        ];
        for (name, v) in rates {
            if !v.is_finite() {
                return Err(Error::param(name, "must be finite"));
            }
            if v < 0.0 {
                return Err(Error::param(name, format!("must be non-negative, got {v}")));
            }
        }
        for (name, v) in [
            ("phi_dim", self.phi_dim),
            ("varphi", self.varphi),
            ("phi1", self.phi1),
        ] {
            if !v.is_finite() {
                return Err(Error::param(name, "must be finite"));
            }
        }
        if !self.detunings.is_empty() && self.detunings.len() != self.n_atoms {
            return Err(Error::param(
                "detunings",
                format!(
                    "expected {} entries, got {}",
                    self.n_atoms,
                    self.detunings.len()
                ),
            ));
        }
        if self.detunings.iter().any(|d| !d.is_finite()) {
            return Err(Error::param("detunings", "must be finite"));
        }
        Ok(())
    }

    /// The rate all outputs are expressed in: `gamma0` when non-zero, else `Gamma`.
    pub fn unit_rate(&self) -> f64 {
        if self.gamma0 > 0.0 {
            self.gamma0
        } else if self.gamma_wg > 0.0 {
            self.gamma_wg
        } else {
            1.0
        }
    }

    /// Per-atom detunings with the empty-list default expanded.
    pub fn atom_detunings(&self) -> Vec<f64> {
        if self.detunings.is_empty() {
            vec![0.0; self.n_atoms]
        } else {
            self.detunings.clone()
        }
    }

    /// Multiplies every rate by `c`; angles and counts are untouched.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            g: self.g * c,
            kappa: self.kappa * c,
            gamma0: self.gamma0 * c,
            gamma_wg: self.gamma_wg * c,
            j0: self.j0 * c,
            detunings: self.detunings.iter().map(|d| d * c).collect(),
            ..self.clone()
        }
    }

    /// Same rates with the mirror removed (bare cavity QED).
    pub fn without_mirror(&self) -> Self {
        Self {
            n_atoms: 0,
            detunings: Vec::new(),
            ..self.clone()
        }
    }

    pub fn with_n_atoms(&self, n: usize) -> Self {
        Self {
            n_atoms: n,
            detunings: if self.detunings.is_empty() {
                Vec::new()
            } else {
                vec![0.0; n]
            },
            ..self.clone()
        }
    }

    /// Critical interaction strength at which the SSH gap `4 J0 cos(phi)`
    /// equals the bare Rabi splitting `2 sqrt(2) g`.
    pub fn critical_j0(&self) -> f64 {
        self.g / (2f64.sqrt() * self.phi_dim.cos().abs())
    }
}

/// Bundled parameter sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Preset {
    /// Strong coupling with the topological mirror at `d = 3 lambda0 / 4`.
    Fig2,
    /// Weak-coupling bare cavity (`g = 5 gamma0`, `J0 = 5 Gamma`).
    Fig3Weak,
    /// Identical to [`Preset::Fig2`].
    Fig3Strong,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Fig2, Preset::Fig3Weak, Preset::Fig3Strong];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig2 => "fig2",
            Preset::Fig3Weak => "fig3-weak",
            Preset::Fig3Strong => "fig3-strong",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| Error::Config(format!("unknown preset `{name}`")))
    }

    pub fn params(self) -> SystemParams {
        let gamma_wg = 5.0;
        let fig2 = SystemParams {
            g: 20.0,
            kappa: 20.0,
            gamma0: 1.0,
            gamma_wg,
            j0: 8.0 * gamma_wg,
            phi_dim: 0.3 * PI,
            n_atoms: 31,
            varphi: 1.5 * PI,
            phi1: 0.0,
            detunings: Vec::new(),
        };
        match self {
            Preset::Fig2 | Preset::Fig3Strong => fig2,
            Preset::Fig3Weak => SystemParams {
                g: 5.0,
                j0: 5.0 * gamma_wg,
                ..fig2
            },
        }
    }
}

/// Staggered nearest-neighbour hoppings `[J_1, ..., J_{N-1}]`.
///
/// Odd bonds (1-based) carry `J0 (1 - cos phi)`, even bonds `J0 (1 + cos phi)`.
pub fn staggered_couplings(j0: f64, phi_dim: f64, n_atoms: usize) -> Vec<f64> {
    let c = phi_dim.cos();
    let weak = j0 * (1.0 - c);
    let strong = j0 * (1.0 + c);
    (1..n_atoms)
        .map(|j| if j % 2 == 1 { weak } else { strong })
        .collect()
}

/// Per-atom phases, bonds and detunings after disorder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MirrorRealization {
    pub phases: Vec<f64>,
    pub bonds: Vec<f64>,
    pub detunings: Vec<f64>,
}

impl MirrorRealization {
    /// Equally spaced, undisordered mirror.
    pub fn clean(params: &SystemParams) -> Self {
        let n = params.n_atoms;
        Self {
            phases: (0..n)
                .map(|j| params.phi1 + j as f64 * params.varphi)
                .collect(),
            bonds: staggered_couplings(params.j0, params.phi_dim, n),
            detunings: params.atom_detunings(),
        }
    }

    pub fn n_atoms(&self) -> usize {
        self.phases.len()
    }

    pub fn check_consistent(&self, params: &SystemParams) -> Result<()> {
        let n = params.n_atoms;
        if self.phases.len() != n
            || self.detunings.len() != n
            || self.bonds.len() != n.saturating_sub(1)
        {
            return Err(Error::Dimension(format!(
                "realization has {} phases, {} bonds, {} detunings for N = {n}",
                self.phases.len(),
                self.bonds.len(),
                self.detunings.len()
            )));
        }
        Ok(())
    }
}

/// Uniform i.i.d. disorder on positions, bonds and atomic frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisorderSpec {
    /// Position displacement bound as a fraction of the spacing `d`.
    #[serde(default)]
    pub position_frac: f64,
    /// Bond perturbation bound as a fraction of `J0`.
    #[serde(default)]
    pub coupling_frac: f64,
    /// Atomic frequency perturbation half-width (rate units).
    #[serde(default)]
    pub frequency_halfwidth: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_realizations")]
    pub n_realizations: usize,
    /// Permit more than one disorder type in a single run.
    #[serde(default)]
    pub combined: bool,
}

fn default_realizations() -> usize {
    100
}

impl Default for DisorderSpec {
    fn default() -> Self {
        Self {
            position_frac: 0.0,
            coupling_frac: 0.0,
            frequency_halfwidth: 0.0,
            seed: 0,
            n_realizations: default_realizations(),
            combined: false,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum DisorderKind {
    Position = 0,
    Coupling = 1,
    Frequency = 2,
}

impl DisorderSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("position_frac", self.position_frac),
            ("coupling_frac", self.coupling_frac),
            ("frequency_halfwidth", self.frequency_halfwidth),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::param(
                    name,
                    format!("must be finite and >= 0, got {v}"),
                ));
            }
        }
        if self.position_frac >= 0.5 {
            return Err(Error::param(
                "position_frac",
                "must be < 0.5 so atoms cannot reorder",
            ));
        }
        if self.n_realizations == 0 {
            return Err(Error::param("n_realizations", "must be positive"));
        }
        Ok(())
    }

    /// Number of disorder types switched on.
    pub fn active_kinds(&self) -> usize {
        [
            self.position_frac,
            self.coupling_frac,
            self.frequency_halfwidth,
        ]
        .iter()
        .filter(|v| **v > 0.0)
        .count()
    }

    fn stream(&self, index: usize, kind: DisorderKind) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(3 * index as u64 + kind as u64);
        rng
    }
}

/// Draws realization `index` of the disordered mirror.
///
/// Position disorder displaces each atom independently, so it shifts the
/// phase `phi_j` by `varphi * dd_j / d` without touching the bond list.
pub fn sample_realization(
    params: &SystemParams,
    spec: &DisorderSpec,
    index: usize,
) -> Result<MirrorRealization> {
    spec.validate()?;
    if index >= spec.n_realizations {
        return Err(Error::param(
            "index",
            format!(
                "{index} out of range for {} realizations",
                spec.n_realizations
            ),
        ));
    }
    let mut real = MirrorRealization::clean(params);
    let unit = |rng: &mut ChaCha8Rng| rng.random_range(-1.0..=1.0);

    if spec.position_frac > 0.0 {
        let mut rng = spec.stream(index, DisorderKind::Position);
        for phase in &mut real.phases {
            *phase += params.varphi * spec.position_frac * unit(&mut rng);
        }
    }
    if spec.coupling_frac > 0.0 {
        let mut rng = spec.stream(index, DisorderKind::Coupling);
        let bound = spec.coupling_frac * params.j0;
        for bond in &mut real.bonds {
            *bond += bound * unit(&mut rng);
        }
    }
    if spec.frequency_halfwidth > 0.0 {
        let mut rng = spec.stream(index, DisorderKind::Frequency);
        for det in &mut real.detunings {
            *det += spec.frequency_halfwidth * unit(&mut rng);
        }
    }
    Ok(real)
}
