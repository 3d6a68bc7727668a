//! Dissipation channels: spectrum of `gamma = i (H - H^dag)` and the
//! projection of the polaritons onto its eigenmodes.

use std::fmt;

use crate::error::{Error, Result};
use crate::hamiltonian::{EffectiveHamiltonian, HamiltonianKind};
use crate::linalg::{self, CMat, C64};
use crate::spectral::{EigenSolution, StateClass};

const SUBLATTICE_SHARE: f64 = 0.6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelLabel {
    CavityLike,
    /// Mirror weight mostly on atoms 2, 4, ...
    EvenPolarized,
    /// Mirror weight mostly on atoms 1, 3, ...
    OddPolarized,
    Background,
}

impl fmt::Display for ChannelLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChannelLabel::CavityLike => "cavity-like",
            ChannelLabel::EvenPolarized => "even",
            ChannelLabel::OddPolarized => "odd",
            ChannelLabel::Background => "background",
        })
    }
}

#[derive(Debug, Clone)]
pub struct DissipationAnalysis {
    pub gamma: CMat,
    /// Descending.
    pub chi: Vec<f64>,
    /// Orthonormal channel vectors as columns, in `chi` order.
    pub channels: CMat,
    pub labels: Vec<ChannelLabel>,
}

impl DissipationAnalysis {
    pub fn channel(&self, m: usize) -> Vec<C64> {
        linalg::column(&self.channels, m)
    }

    /// Number of `chi` above `rel * chi_max`.
    pub fn rank(&self, rel: f64) -> usize {
        let max = self.chi.first().copied().unwrap_or(0.0);
        self.chi.iter().filter(|&&x| x > rel * max).count()
    }
}

fn label(v: &[C64], kind: HamiltonianKind) -> ChannelLabel {
    let (cav, atoms) = match kind {
        HamiltonianKind::Full => (v[1].norm_sqr() + v[2].norm_sqr(), &v[3..]),
        HamiltonianKind::Mirror => (0.0, v),
    };
    if cav > 0.5 {
        return ChannelLabel::CavityLike;
    }
    let odd: f64 = atoms.iter().step_by(2).map(|z| z.norm_sqr()).sum();
    let even: f64 = atoms.iter().skip(1).step_by(2).map(|z| z.norm_sqr()).sum();
    let total = odd + even;
    if total <= 0.0 {
        ChannelLabel::Background
    } else if odd > SUBLATTICE_SHARE * total {
        ChannelLabel::OddPolarized
    } else if even > SUBLATTICE_SHARE * total {
        ChannelLabel::EvenPolarized
    } else {
        ChannelLabel::Background
    }
}

/// Hermitian eigendecomposition of the dissipation matrix.
pub fn dissipation_spectrum(h: &EffectiveHamiltonian) -> Result<DissipationAnalysis> {
    let gamma = h.dissipation_matrix();
    let (vals, vecs) = linalg::hermitian_eig(&gamma)?;
    let n = vals.len();
    // ascending from the solver
    let order: Vec<usize> = (0..n).rev().collect();
    let chi: Vec<f64> = order.iter().map(|&k| vals[k]).collect();
    let channels = CMat::from_fn(n, n, |i, j| vecs[(i, order[j])]);
    let labels = (0..n)
        .map(|m| label(&linalg::column(&channels, m), h.kind))
        .collect();
    Ok(DissipationAnalysis {
        gamma,
        chi,
        channels,
        labels,
    })
}

/// Right- and left-going collective emission vectors `u_R`, `u_L`.
pub fn chiral_channels(h: &EffectiveHamiltonian) -> (Vec<C64>, Vec<C64>) {
    let dim = h.dim();
    let off = h.atom_offset();
    let z = C64::new(0.0, 0.0);
    let mut ur = vec![z; dim];
    let mut ul = vec![z; dim];
    if h.kind == HamiltonianKind::Full {
        let sk = h.params.kappa.sqrt();
        ur[1] = C64::new(sk, 0.0);
        ul[2] = C64::new(sk, 0.0);
    }
    let sg = h.params.gamma_wg.sqrt();
    for (j, &ph) in h.realization.phases.iter().enumerate() {
        ur[off + j] = sg * C64::from_polar(1.0, ph);
        ul[off + j] = sg * C64::from_polar(1.0, -ph);
    }
    (ur, ul)
}

/// `gamma0 D + u_R u_R^dag + u_L u_L^dag`, with `D` the projector on the
/// emitter and atoms.
pub fn channel_form(h: &EffectiveHamiltonian) -> CMat {
    let (ur, ul) = chiral_channels(h);
    let g0 = h.params.gamma0;
    let qe_and_atoms = |i: usize| match h.kind {
        HamiltonianKind::Full => i == 0 || i >= 3,
        HamiltonianKind::Mirror => true,
    };
    CMat::from_fn(h.dim(), h.dim(), |i, j| {
        let d = if i == j && qe_and_atoms(i) { g0 } else { 0.0 };
        C64::new(d, 0.0) + ur[i] * ur[j].conj() + ul[i] * ul[j].conj()
    })
}

#[derive(Debug, Clone)]
pub struct ChannelRates {
    /// Eigenvalue of the Hermitian part.
    pub energy: f64,
    pub state: Vec<C64>,
    /// `|<psi|v>|^2` against the matched non-Hermitian eigenvector.
    pub overlap: f64,
    /// `chi_m |<psi|v_m>|^2`, in channel order.
    pub per_channel: Vec<f64>,
    /// `<psi|gamma|psi>`.
    pub total: f64,
}

#[derive(Debug, Clone)]
pub struct PolaritonRates {
    pub plus: ChannelRates,
    pub minus: ChannelRates,
    pub ambiguous: bool,
}

/// Channel-resolved decay of the polaritons. `psi_+-` are eigenstates of
/// the Hermitian part `(H + H^dag) / 2` with the largest overlap with the
/// classified Polariton+- eigenvectors of `H`.
pub fn polariton_channel_rates(
    h: &EffectiveHamiltonian,
    sol: &EigenSolution,
    diss: &DissipationAnalysis,
) -> Result<PolaritonRates> {
    let (evals, evecs) = linalg::hermitian_eig(&h.hermitian_part())?;
    let mut ambiguous = sol.ambiguous;
    let mut rates = |class: StateClass| -> Result<ChannelRates> {
        let k = sol
            .find(class)
            .ok_or_else(|| Error::Unsupported(format!("no {class} state in this spectrum")))?;
        let target = sol.vector(k);
        let overlaps: Vec<f64> = (0..evals.len())
            .map(|m| linalg::inner(&linalg::column(&evecs, m), &target).norm_sqr())
            .collect();
        let mut idx: Vec<usize> = (0..evals.len()).collect();
        idx.sort_by(|&a, &b| overlaps[b].total_cmp(&overlaps[a]));
        let best = idx[0];
        if let Some(&second) = idx.get(1) {
            if overlaps[best] - overlaps[second] < 0.1 * overlaps[best] {
                ambiguous = true;
            }
        }
        let psi = linalg::column(&evecs, best);
        let per_channel: Vec<f64> = diss
            .chi
            .iter()
            .enumerate()
            .map(|(m, chi)| chi * linalg::inner(&psi, &diss.channel(m)).norm_sqr())
            .collect();
        let total = linalg::inner(&psi, &linalg::matvec(&diss.gamma, &psi)).re;
        Ok(ChannelRates {
            energy: evals[best],
            state: psi,
            overlap: overlaps[best],
            per_channel,
            total,
        })
    };
    let plus = rates(StateClass::PolaritonPlus)?;
    let minus = rates(StateClass::PolaritonMinus)?;
    Ok(PolaritonRates {
        plus,
        minus,
        ambiguous,
    })
}

/// `m,chi,label,rate_plus,rate_minus` table.
pub fn channels_csv(diss: &DissipationAnalysis, rates: Option<&PolaritonRates>) -> String {
    use crate::io::fmt_f64;
    let mut out = String::from("m,chi,label,rate_plus,rate_minus\n");
    for (m, chi) in diss.chi.iter().enumerate() {
        let (p, q) = match rates {
            Some(r) => (
                fmt_f64(r.plus.per_channel[m]),
                fmt_f64(r.minus.per_channel[m]),
            ),
            None => ("nan".into(), "nan".into()),
        };
        out.push_str(&format!(
            "{},{},{},{p},{q}\n",
            m + 1,
            fmt_f64(*chi),
            diss.labels[m]
        ));
    }
    out
}
