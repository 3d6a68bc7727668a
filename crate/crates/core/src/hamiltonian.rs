//! Effective non-Hermitian Hamiltonians in the single-excitation sector.
//!
//! Basis order for the full network is `[QE, CCW, CW, atom_1 .. atom_N]`.
//! The cavity-mirror coupling is cascaded: the CCW mode drives the atoms
//! through the right-going guided mode, and the atoms drive the CW mode
//! through the left-going one. The reverse matrix elements are zero.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, C64, I};
use crate::params::{MirrorRealization, SystemParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Component {
    Qe,
    Ccw,
    Cw,
    /// Mirror atom, 1-based.
    Atom(usize),
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Component::Qe => write!(f, "QE"),
            Component::Ccw => write!(f, "CCW"),
            Component::Cw => write!(f, "CW"),
            Component::Atom(j) => write!(f, "atom{j}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HamiltonianKind {
    /// Emitter, both cavity modes and the mirror.
    Full,
    /// Bare atom mirror, no cavity QED block.
    Mirror,
}

#[derive(Debug, Clone)]
pub struct EffectiveHamiltonian {
    pub matrix: CMat,
    pub basis: Vec<Component>,
    pub kind: HamiltonianKind,
    pub params: SystemParams,
    pub realization: MirrorRealization,
}

impl EffectiveHamiltonian {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn n_atoms(&self) -> usize {
        self.realization.n_atoms()
    }

    pub fn index_of(&self, comp: Component) -> Option<usize> {
        self.basis.iter().position(|&b| b == comp)
    }

    /// Offset of atom 1 in the basis.
    pub fn atom_offset(&self) -> usize {
        match self.kind {
            HamiltonianKind::Full => 3,
            HamiltonianKind::Mirror => 0,
        }
    }

    /// `gamma = i (H - H^dag)`, Hermitian and positive semidefinite for a
    /// passive system.
    pub fn dissipation_matrix(&self) -> CMat {
        let h = &self.matrix;
        let hd = linalg::adjoint(h);
        CMat::from_fn(self.dim(), self.dim(), |i, j| I * (h[(i, j)] - hd[(i, j)]))
    }

    /// Coherent part `(H + H^dag) / 2`.
    pub fn hermitian_part(&self) -> CMat {
        let h = &self.matrix;
        let hd = linalg::adjoint(h);
        CMat::from_fn(self.dim(), self.dim(), |i, j| {
            (h[(i, j)] + hd[(i, j)]) * 0.5
        })
    }

    pub fn norm(&self) -> f64 {
        linalg::frobenius(&self.matrix)
    }

    /// Same Hamiltonian shifted by `shift` on the diagonal: `shift I - H`.
    pub fn resolvent_matrix(&self, shift: f64) -> CMat {
        let n = self.dim();
        CMat::from_fn(n, n, |i, j| {
            let d = if i == j {
                c(shift, 0.0)
            } else {
                C64::new(0.0, 0.0)
            };
            d - self.matrix[(i, j)]
        })
    }
}

fn atom_block(m: &mut CMat, offset: usize, params: &SystemParams, real: &MirrorRealization) {
    let n = real.n_atoms();
    let gw = params.gamma_wg;
    let diag_loss = gw + params.gamma0 / 2.0;
    for j in 0..n {
        m[(offset + j, offset + j)] = c(real.detunings[j], -diag_loss);
        for l in 0..n {
            if l != j {
                let dphi = (real.phases[j] - real.phases[l]).abs();
                m[(offset + j, offset + l)] = -I * gw * C64::from_polar(1.0, dphi);
            }
        }
    }
    for (j, &bond) in real.bonds.iter().enumerate() {
        m[(offset + j, offset + j + 1)] += bond;
        m[(offset + j + 1, offset + j)] += bond;
    }
}

/// Full network Hamiltonian of dimension `N + 3`.
pub fn build_full_heff(
    params: &SystemParams,
    realization: &MirrorRealization,
) -> Result<EffectiveHamiltonian> {
    params.validate()?;
    realization.check_consistent(params)?;
    let n = params.n_atoms;
    let dim = n + 3;
    let mut m = linalg::zeros(dim);

    m[(0, 0)] = c(0.0, -params.gamma0 / 2.0);
    m[(1, 1)] = c(0.0, -params.kappa / 2.0);
    m[(2, 2)] = c(0.0, -params.kappa / 2.0);
    for k in [1, 2] {
        m[(0, k)] = c(params.g, 0.0);
        m[(k, 0)] = c(params.g, 0.0);
    }

    atom_block(&mut m, 3, params, realization);

    let cascade = (params.kappa * params.gamma_wg).sqrt();
    for (j, &phase) in realization.phases.iter().enumerate() {
        let amp = -I * cascade * C64::from_polar(1.0, phase);
        // CCW -> atom j, atom j -> CW
        m[(3 + j, 1)] = amp;
        m[(2, 3 + j)] = amp;
    }

    let mut basis = vec![Component::Qe, Component::Ccw, Component::Cw];
    basis.extend((1..=n).map(Component::Atom));
    Ok(EffectiveHamiltonian {
        matrix: m,
        basis,
        kind: HamiltonianKind::Full,
        params: params.clone(),
        realization: realization.clone(),
    })
}

/// Bare mirror Hamiltonian (`N x N`), the atom block of the full one.
pub fn build_mirror_heff(
    params: &SystemParams,
    realization: &MirrorRealization,
) -> Result<EffectiveHamiltonian> {
    params.validate()?;
    realization.check_consistent(params)?;
    let n = params.n_atoms;
    if n == 0 {
        return Err(Error::param(
            "n_atoms",
            "mirror Hamiltonian needs at least one atom",
        ));
    }
    let mut m = linalg::zeros(n);
    atom_block(&mut m, 0, params, realization);
    Ok(EffectiveHamiltonian {
        matrix: m,
        basis: (1..=n).map(Component::Atom).collect(),
        kind: HamiltonianKind::Mirror,
        params: params.clone(),
        realization: realization.clone(),
    })
}

/// Clean-geometry convenience wrapper around [`build_full_heff`].
pub fn full_heff(params: &SystemParams) -> Result<EffectiveHamiltonian> {
    build_full_heff(params, &MirrorRealization::clean(params))
}

/// Clean-geometry convenience wrapper around [`build_mirror_heff`].
pub fn mirror_heff(params: &SystemParams) -> Result<EffectiveHamiltonian> {
    build_mirror_heff(params, &MirrorRealization::clean(params))
}

/// Matrix dump as `row,col,re,im` lines (with header), row-major.
pub fn matrix_csv(h: &EffectiveHamiltonian) -> String {
    let mut out = String::from("row,col,re,im\n");
    for i in 0..h.dim() {
        for j in 0..h.dim() {
            let z = h.matrix[(i, j)];
            out.push_str(&format!(
                "{i},{j},{},{}\n",
                crate::io::fmt_f64(z.re),
                crate::io::fmt_f64(z.im)
            ));
        }
    }
    out
}
