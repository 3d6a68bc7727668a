//! Thin layer over `faer` for the dense complex operations the model needs.

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = Mat<C64>;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn zeros(n: usize) -> CMat {
    CMat::zeros(n, n)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Conjugate transpose as an owned matrix.
pub fn adjoint(m: &CMat) -> CMat {
    m.adjoint().to_owned()
}

pub fn matvec(m: &CMat, v: &[C64]) -> Vec<C64> {
    assert_eq!(m.ncols(), v.len());
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * v[j]).sum())
        .collect()
}

/// `<a|b>` with the first argument conjugated.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn column(m: &CMat, j: usize) -> Vec<C64> {
    (0..m.nrows()).map(|i| m[(i, j)]).collect()
}

/// Largest absolute entry.
pub fn max_abs(m: &CMat) -> f64 {
    let mut best = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            best = best.max(m[(i, j)].norm());
        }
    }
    best
}

pub fn frobenius(m: &CMat) -> f64 {
    m.norm_l2()
}

pub fn is_finite(m: &CMat) -> bool {
    (0..m.ncols()).all(|j| (0..m.nrows()).all(|i| m[(i, j)].is_finite()))
}

/// Right eigenpairs of a general complex matrix, unsorted.
pub fn eig(m: &CMat) -> Result<(Vec<C64>, CMat)> {
    let evd = m.eigen().map_err(|_| Error::EigenNonConvergence)?;
    let values: Vec<C64> = evd.S().column_vector().iter().copied().collect();
    let vectors = evd.U().to_owned();
    if values.iter().any(|v| !v.is_finite()) || !is_finite(&vectors) {
        return Err(Error::EigenNonConvergence);
    }
    Ok((values, vectors))
}

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eig(m: &CMat) -> Result<(Vec<f64>, CMat)> {
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::EigenNonConvergence)?;
    let values = evd.S().column_vector().iter().map(|x| x.re).collect();
    Ok((values, evd.U().to_owned()))
}

/// 2-norm condition number from the singular values.
pub fn condition_number(m: &CMat) -> f64 {
    match m.singular_values() {
        Ok(s) if !s.is_empty() => {
            let max = s[0];
            let min = *s.last().unwrap();
            if min == 0.0 {
                f64::INFINITY
            } else {
                max / min
            }
        }
        Ok(_) => 1.0,
        Err(_) => f64::INFINITY,
    }
}

/// Factorized square system for repeated solves.
pub struct Lu {
    lu: faer::linalg::solvers::PartialPivLu<C64>,
    n: usize,
}

impl Lu {
    pub fn new(m: &CMat) -> Self {
        Self {
            lu: m.partial_piv_lu(),
            n: m.nrows(),
        }
    }

    pub fn solve(&self, rhs: &[C64], context: impl FnOnce() -> String) -> Result<Vec<C64>> {
        assert_eq!(rhs.len(), self.n);
        let b = Mat::<C64>::from_fn(self.n, 1, |i, _| rhs[i]);
        let x = self.lu.solve(&b);
        let out: Vec<C64> = (0..self.n).map(|i| x[(i, 0)]).collect();
        if out.iter().all(|v| v.is_finite()) {
            Ok(out)
        } else {
            Err(Error::Singular { context: context() })
        }
    }
}

/// Solves `m x = rhs`.
pub fn solve(m: &CMat, rhs: &[C64]) -> Result<Vec<C64>> {
    Lu::new(m).solve(rhs, || "linear solve".into())
}

/// Inverse via LU; fails on non-finite output.
pub fn inverse(m: &CMat) -> Result<CMat> {
    let n = m.nrows();
    let lu = m.partial_piv_lu();
    let x = lu.solve(identity(n));
    if is_finite(&x) {
        Ok(x)
    } else {
        Err(Error::Singular {
            context: "matrix inverse".into(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eig_of_diagonal() {
        let mut m = zeros(3);
        m[(0, 0)] = c(1.0, -0.5);
        m[(1, 1)] = c(-2.0, 0.0);
        m[(2, 2)] = c(0.0, -3.0);
        let (vals, vecs) = eig(&m).unwrap();
        for (k, v) in vals.iter().enumerate() {
            let col = column(&vecs, k);
            let hv = matvec(&m, &col);
            for i in 0..3 {
                assert!((hv[i] - v * col[i]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn solve_roundtrip_and_singular() {
        let m = CMat::from_fn(3, 3, |i, j| {
            c((i + 2 * j) as f64, if i == j { 1.0 } else { 0.0 })
        });
        let b = vec![c(1.0, 0.0), c(0.0, 1.0), c(2.0, -1.0)];
        let x = solve(&m, &b).unwrap();
        let r = matvec(&m, &x);
        for i in 0..3 {
            assert!((r[i] - b[i]).norm() < 1e-12);
        }
        assert!(solve(&zeros(2), &[c(1.0, 0.0), c(0.0, 0.0)]).is_err());
    }

    #[test]
    fn condition_of_scaled_identity() {
        let m = identity(4) * faer::Scale(c(3.0, 0.0));
        assert!((condition_number(&m) - 1.0).abs() < 1e-12);
    }
}
