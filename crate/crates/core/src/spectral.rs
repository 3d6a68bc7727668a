//! Eigenanalysis: complex spectra, state weights and classification.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hamiltonian::{self, EffectiveHamiltonian, HamiltonianKind};
use crate::linalg::{self, CMat, C64};
use crate::params::SystemParams;

/// Condition number of the eigenvector matrix above which the
/// decomposition is flagged as near-defective.
pub const NEAR_DEFECTIVE_COND: f64 = 1e8;

const MIRROR_WEIGHT_MIN: f64 = 0.5;
const BOUNDARY_CELLS: usize = 3;
const BOUNDARY_RATIO_MIN: f64 = 0.5;
const AMBIGUITY_MARGIN: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StateClass {
    PolaritonPlus,
    PolaritonMinus,
    Edge,
    Bulk,
    CavityLike,
}

impl StateClass {
    pub fn as_str(self) -> &'static str {
        match self {
            StateClass::PolaritonPlus => "polariton+",
            StateClass::PolaritonMinus => "polariton-",
            StateClass::Edge => "edge",
            StateClass::Bulk => "bulk",
            StateClass::CavityLike => "cavity-like",
        }
    }
}

impl fmt::Display for StateClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Probability of one eigenstate on each part of the network.
#[derive(Debug, Clone, PartialEq)]
pub struct StateWeights {
    pub qe: f64,
    pub ccw: f64,
    pub cw: f64,
    /// Cell `k` holds atoms `2k-1, 2k`; odd `N` ends with a single-site cell.
    pub cells: Vec<f64>,
}

impl StateWeights {
    fn from_vector(v: &[C64], kind: HamiltonianKind) -> Self {
        let p: Vec<f64> = v.iter().map(|z| z.norm_sqr()).collect();
        let total: f64 = p.iter().sum();
        let p: Vec<f64> = p.iter().map(|x| x / total).collect();
        let (head, atoms) = match kind {
            HamiltonianKind::Full => ([p[0], p[1], p[2]], &p[3..]),
            HamiltonianKind::Mirror => ([0.0; 3], &p[..]),
        };
        Self {
            qe: head[0],
            ccw: head[1],
            cw: head[2],
            cells: atoms.chunks(2).map(|c| c.iter().sum()).collect(),
        }
    }

    /// QE plus both cavity modes.
    pub fn cavity_qed(&self) -> f64 {
        self.qe + self.ccw + self.cw
    }

    pub fn mirror(&self) -> f64 {
        self.cells.iter().fold(0.0, |a, b| a + b)
    }

    pub fn total(&self) -> f64 {
        self.cavity_qed() + self.mirror()
    }

    /// Larger of the left and right boundary shares of the mirror weight.
    pub fn boundary_ratio(&self) -> f64 {
        let m = self.mirror();
        if m <= 0.0 {
            return 0.0;
        }
        self.left_ratio().max(self.right_ratio())
    }

    pub fn left_ratio(&self) -> f64 {
        let k = BOUNDARY_CELLS.min(self.cells.len());
        self.cells[..k].iter().sum::<f64>() / self.mirror()
    }

    pub fn right_ratio(&self) -> f64 {
        let k = BOUNDARY_CELLS.min(self.cells.len());
        self.cells[self.cells.len() - k..].iter().sum::<f64>() / self.mirror()
    }
}

#[derive(Debug, Clone)]
pub struct Classification {
    pub classes: Vec<StateClass>,
    /// The two best polariton candidates on one side were within 10%.
    pub ambiguous: bool,
}

#[derive(Debug, Clone)]
pub struct EigenSolution {
    pub kind: HamiltonianKind,
    /// Sorted by ascending decay rate `-2 Im E`.
    pub eigenvalues: Vec<C64>,
    /// Unit-norm right eigenvectors as columns, in eigenvalue order.
    pub right_vectors: CMat,
    pub weights: Vec<StateWeights>,
    pub classes: Vec<StateClass>,
    pub ambiguous: bool,
    pub condition: f64,
    pub near_defective: bool,
}

impl EigenSolution {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn decay_rate(&self, n: usize) -> f64 {
        -2.0 * self.eigenvalues[n].im
    }

    pub fn vector(&self, n: usize) -> Vec<C64> {
        linalg::column(&self.right_vectors, n)
    }

    pub fn find(&self, class: StateClass) -> Option<usize> {
        self.classes.iter().position(|&c| c == class)
    }

    pub fn indices_of(&self, class: StateClass) -> Vec<usize> {
        (0..self.len())
            .filter(|&n| self.classes[n] == class)
            .collect()
    }

    /// `index,re,im,decay,class,qe,ccw,cw,mirror,cell_1..` table.
    pub fn to_csv(&self) -> String {
        use crate::io::fmt_f64;
        let ncells = self.weights.first().map_or(0, |w| w.cells.len());
        let mut out = String::from("index,re,im,decay,class,qe,ccw,cw,mirror");
        for k in 1..=ncells {
            out.push_str(&format!(",cell_{k}"));
        }
        out.push('\n');
        for n in 0..self.len() {
            let e = self.eigenvalues[n];
            let w = &self.weights[n];
            let mut row = vec![
                (n + 1).to_string(),
                fmt_f64(e.re),
                fmt_f64(e.im),
                fmt_f64(-2.0 * e.im),
                self.classes[n].to_string(),
                fmt_f64(w.qe),
                fmt_f64(w.ccw),
                fmt_f64(w.cw),
                fmt_f64(w.mirror()),
            ];
            row.extend(w.cells.iter().map(|&x| fmt_f64(x)));
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Diagonalizes `h`, sorts by decay rate and classifies the states.
pub fn eigendecompose(h: &EffectiveHamiltonian) -> Result<EigenSolution> {
    if !linalg::is_finite(&h.matrix) {
        return Err(Error::param("hamiltonian", "non-finite matrix entries"));
    }
    let (vals, vecs) = linalg::eig(&h.matrix)?;
    let n = vals.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        (-vals[a].im)
            .total_cmp(&(-vals[b].im))
            .then(vals[a].re.total_cmp(&vals[b].re))
    });
    let eigenvalues: Vec<C64> = order.iter().map(|&k| vals[k]).collect();
    let right_vectors = CMat::from_fn(n, n, |i, j| vecs[(i, order[j])]);
    let right_vectors = normalize_columns(right_vectors);
    let weights: Vec<StateWeights> = (0..n)
        .map(|j| StateWeights::from_vector(&linalg::column(&right_vectors, j), h.kind))
        .collect();
    let condition = linalg::condition_number(&right_vectors);
    let mut sol = EigenSolution {
        kind: h.kind,
        eigenvalues,
        right_vectors,
        weights,
        classes: Vec::new(),
        ambiguous: false,
        condition,
        near_defective: condition.is_nan() || condition > NEAR_DEFECTIVE_COND,
    };
    let cls = classify(&sol, &h.params);
    sol.classes = cls.classes;
    sol.ambiguous = cls.ambiguous;
    Ok(sol)
}

fn normalize_columns(mut m: CMat) -> CMat {
    for j in 0..m.ncols() {
        let nrm = linalg::norm(&linalg::column(&m, j));
        if nrm > 0.0 {
            for i in 0..m.nrows() {
                m[(i, j)] /= nrm;
            }
        }
    }
    m
}

/// Assigns polariton, edge, bulk and cavity-like labels.
pub fn classify(sol: &EigenSolution, params: &SystemParams) -> Classification {
    let n = sol.len();
    let mut classes = vec![StateClass::CavityLike; n];
    let mut ambiguous = false;

    if sol.kind == HamiltonianKind::Full {
        let cut = params.g / 2f64.sqrt();
        for (sign, class) in [
            (1.0, StateClass::PolaritonPlus),
            (-1.0, StateClass::PolaritonMinus),
        ] {
            let mut cand: Vec<(usize, f64)> = (0..n)
                .filter(|&k| sign * sol.eigenvalues[k].re > cut)
                .map(|k| (k, sol.weights[k].cavity_qed()))
                .collect();
            cand.sort_by(|a, b| b.1.total_cmp(&a.1));
            if let Some(&(best, w)) = cand.first() {
                if w <= 0.0 {
                    continue;
                }
                classes[best] = class;
                if let Some(&(_, w2)) = cand.get(1) {
                    if (w - w2) < AMBIGUITY_MARGIN * w {
                        ambiguous = true;
                    }
                }
            }
        }
    }

    let free = |k: usize, classes: &[StateClass]| {
        !matches!(
            classes[k],
            StateClass::PolaritonPlus | StateClass::PolaritonMinus
        ) && sol.weights[k].mirror() > MIRROR_WEIGHT_MIN
    };
    let edge = (0..n)
        .filter(|&k| free(k, &classes) && sol.weights[k].boundary_ratio() > BOUNDARY_RATIO_MIN)
        .min_by(|&a, &b| {
            sol.eigenvalues[a]
                .re
                .abs()
                .total_cmp(&sol.eigenvalues[b].re.abs())
        });
    for k in 0..n {
        if free(k, &classes) {
            classes[k] = StateClass::Bulk;
        }
    }
    if let Some(k) = edge {
        classes[k] = StateClass::Edge;
    }
    Classification { classes, ambiguous }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgePoint {
    pub j0: f64,
    /// `-2 Im E` of the edge state, `None` if no candidate existed.
    pub decay: Option<f64>,
    pub re_energy: Option<f64>,
    /// False when the fallback (smallest `|Re E|` mirror state) was used.
    pub localized: bool,
    pub error: Option<String>,
}

/// Edge-state decay rate versus `J0` on the bare mirror.
pub fn edge_decay_scan(params: &SystemParams, j0_grid: &[f64]) -> Result<Vec<EdgePoint>> {
    if params.gamma0 != 0.0 {
        return Err(Error::param("gamma0", "edge scan requires gamma0 = 0"));
    }
    if params.n_atoms.is_multiple_of(2) {
        return Err(Error::param(
            "n_atoms",
            "edge scan requires an odd number of atoms",
        ));
    }
    params.validate()?;
    Ok(j0_grid
        .par_iter()
        .map(|&j0| {
            let p = SystemParams {
                j0,
                ..params.clone()
            };
            match edge_point(&p) {
                Ok(pt) => pt,
                Err(e) => EdgePoint {
                    j0,
                    decay: None,
                    re_energy: None,
                    localized: false,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect())
}

fn edge_point(p: &SystemParams) -> Result<EdgePoint> {
    let sol = eigendecompose(&hamiltonian::mirror_heff(p)?)?;
    let (k, localized) = match sol.find(StateClass::Edge) {
        Some(k) => (k, true),
        None => {
            let k = (0..sol.len())
                .min_by(|&a, &b| {
                    sol.eigenvalues[a]
                        .re
                        .abs()
                        .total_cmp(&sol.eigenvalues[b].re.abs())
                })
                .ok_or(Error::NoEdgeState)?;
            (k, false)
        }
    };
    Ok(EdgePoint {
        j0: p.j0,
        decay: Some(sol.decay_rate(k)),
        re_energy: Some(sol.eigenvalues[k].re),
        localized,
        error: None,
    })
}

#[derive(Debug, Clone)]
pub struct BandSweep {
    /// Atom spacing in units of the resonant wavelength.
    pub spacing: Vec<f64>,
    /// Per spacing, all mirror eigenvalues ordered by real part.
    pub energies: Vec<Vec<C64>>,
}

impl BandSweep {
    pub fn real_bands(&self, k: usize) -> Vec<f64> {
        self.energies[k].iter().map(|e| e.re).collect()
    }

    /// `d,band,re,im` rows.
    pub fn to_csv(&self) -> String {
        use crate::io::fmt_f64;
        let mut out = String::from("d,band,re,im\n");
        for (d, es) in self.spacing.iter().zip(&self.energies) {
            for (b, e) in es.iter().enumerate() {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    fmt_f64(*d),
                    b + 1,
                    fmt_f64(e.re),
                    fmt_f64(e.im)
                ));
            }
        }
        out
    }
}

/// Mirror spectrum as the spacing `d` (units of the wavelength) varies,
/// with `varphi = 2 pi d`.
pub fn band_sweep_vs_spacing(params: &SystemParams, spacing: &[f64]) -> Result<BandSweep> {
    params.validate()?;
    let energies = spacing
        .par_iter()
        .map(|&d| {
            let p = SystemParams {
                varphi: 2.0 * std::f64::consts::PI * d,
                ..params.clone()
            };
            let h = hamiltonian::mirror_heff(&p)?;
            let (mut vals, _) = linalg::eig(&h.matrix)?;
            vals.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
            Ok(vals)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BandSweep {
        spacing: spacing.to_vec(),
        energies,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{full_heff, mirror_heff};
    use crate::linalg::{c, matvec};
    use crate::params::Preset;
    use std::f64::consts::PI;

    fn residual_ok(h: &EffectiveHamiltonian, sol: &EigenSolution) {
        let scale = h.norm();
        for n in 0..sol.len() {
            let v = sol.vector(n);
            let hv = matvec(&h.matrix, &v);
            let r: f64 = hv
                .iter()
                .zip(&v)
                .map(|(a, b)| (a - sol.eigenvalues[n] * b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(r <= 1e-9 * scale, "residual {r}");
            assert!((sol.weights[n].total() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn three_mode_analytic_spectrum() {
        let p = Preset::Fig2.params().without_mirror();
        let h = full_heff(&p).unwrap();
        let sol = eigendecompose(&h).unwrap();
        residual_ok(&h, &sol);
        // the symmetric cavity mode couples with sqrt(2) g; the antisymmetric one is dark
        let (k, g0, g) = (p.kappa, p.gamma0, p.g);
        let mean = c(0.0, -(k + g0) / 4.0);
        let split = (2.0 * g * g - ((k - g0) / 4.0).powi(2)).sqrt();
        let expect = [mean + split, mean - split, c(0.0, -k / 2.0)];
        for e in expect {
            assert!(
                sol.eigenvalues.iter().any(|x| (x - e).norm() < 1e-10),
                "{e}"
            );
        }
        let dark = sol
            .eigenvalues
            .iter()
            .position(|x| (x - expect[2]).norm() < 1e-10)
            .unwrap();
        assert_eq!(sol.classes[dark], StateClass::CavityLike);
        assert!(sol.find(StateClass::PolaritonPlus).is_some());
        assert!(sol.find(StateClass::PolaritonMinus).is_some());
    }

    #[test]
    fn sorted_by_decay() {
        let sol = eigendecompose(&full_heff(&Preset::Fig2.params()).unwrap()).unwrap();
        for w in sol.eigenvalues.windows(2) {
            assert!(-w[0].im <= -w[1].im + 1e-15);
        }
        assert!(!sol.near_defective);
    }

    #[test]
    fn fig2_polaritons() {
        let p = Preset::Fig2.params();
        let h = full_heff(&p).unwrap();
        let sol = eigendecompose(&h).unwrap();
        residual_ok(&h, &sol);
        for class in [StateClass::PolaritonPlus, StateClass::PolaritonMinus] {
            let k = sol.find(class).unwrap();
            assert!(sol.weights[k].cavity_qed() > 0.5);
            assert!(sol.decay_rate(k) < 1.0);
        }
    }

    #[test]
    fn trace_identity() {
        let h = full_heff(&Preset::Fig3Weak.params()).unwrap();
        let sol = eigendecompose(&h).unwrap();
        let gamma = h.dissipation_matrix();
        let tr: f64 = (0..h.dim()).map(|i| gamma[(i, i)].re).sum();
        let sum: f64 = sol.eigenvalues.iter().map(|e| -2.0 * e.im).sum();
        assert!((tr - sum).abs() <= 1e-9 * tr);
    }

    #[test]
    fn bare_mirror_single_left_edge() {
        let p = SystemParams {
            j0: 8.0,
            gamma0: 0.0,
            ..Preset::Fig2.params().scaled(0.2)
        };
        let sol = eigendecompose(&mirror_heff(&p).unwrap()).unwrap();
        let edges = sol.indices_of(StateClass::Edge);
        assert_eq!(edges.len(), 1);
        let w = &sol.weights[edges[0]];
        assert!(w.left_ratio() > 0.5);
    }

    #[test]
    fn ssh_gap_law() {
        let n = 62;
        let p = SystemParams {
            gamma_wg: 0.0,
            gamma0: 0.0,
            j0: 2.0,
            ..Preset::Fig2.params().with_n_atoms(n)
        };
        let h = mirror_heff(&p).unwrap();
        let (vals, _) = linalg::hermitian_eig(&h.hermitian_part()).unwrap();
        let expect = 4.0 * p.j0 * p.phi_dim.cos();
        let min_bulk = vals
            .iter()
            .map(|e| e.abs())
            .filter(|e| *e > 1e-3 * p.j0)
            .fold(f64::INFINITY, f64::min);
        assert!((2.0 * min_bulk - expect).abs() < 0.02 * expect);
    }

    #[test]
    fn centrosymmetric_bands_without_dimerization() {
        let p = SystemParams {
            j0: 0.0,
            ..Preset::Fig2.params().scaled(0.2).with_n_atoms(9)
        };
        let d: Vec<f64> = (0..=20).map(|k| k as f64 / 20.0).collect();
        let sweep = band_sweep_vs_spacing(&p, &d).unwrap();
        for k in 0..d.len() {
            // centrosymmetric about (d = 1/2, E = 0)
            let a = sweep.real_bands(k);
            let mut b: Vec<f64> = sweep
                .real_bands(d.len() - 1 - k)
                .iter()
                .map(|e| -e)
                .collect();
            b.sort_by(f64::total_cmp);
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-9, "d={} {x} {y}", d[k]);
            }
        }
    }

    #[test]
    fn protected_zero_mode_in_bands() {
        let p = SystemParams {
            j0: 8.0,
            ..Preset::Fig2.params().scaled(0.2).with_n_atoms(9)
        };
        let sweep = band_sweep_vs_spacing(&p, &[0.75]).unwrap();
        let zero = sweep
            .real_bands(0)
            .iter()
            .filter(|e| e.abs() < 1e-6)
            .count();
        assert_eq!(zero, 1);
    }

    #[test]
    fn single_atom_flat_band() {
        let mut p = Preset::Fig2.params().with_n_atoms(1);
        p.detunings = vec![0.4];
        let sweep = band_sweep_vs_spacing(&p, &[0.0, 0.3, 0.5, 0.9]).unwrap();
        for k in 0..4 {
            assert!((sweep.real_bands(k)[0] - 0.4).abs() < 1e-14);
        }
    }

    #[test]
    fn edge_scan_transition() {
        let p = SystemParams {
            gamma0: 0.0,
            ..Preset::Fig2.params().scaled(0.2)
        };
        let pts = edge_decay_scan(&p, &[0.2, 2.0]).unwrap();
        assert!(pts[0].decay.unwrap() > 1e-2);
        assert!(pts[1].decay.unwrap() < 1e-6);
        assert!(pts[1].localized);

        let p = SystemParams {
            varphi: 0.5 * PI,
            ..p
        };
        let pts = edge_decay_scan(&p, &[2.0]).unwrap();
        assert!(pts[0].decay.unwrap() > 0.0);

        assert!(edge_decay_scan(&Preset::Fig2.params(), &[1.0]).is_err());
    }
}
