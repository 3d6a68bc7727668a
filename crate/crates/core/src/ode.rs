//! Adaptive Dormand-Prince 5(4) integrator for `ds/dt = -i H s`.
//!
//! Used as an independent check on eigenbasis propagation and as the
//! fallback when the eigenvector matrix is badly conditioned.

use crate::error::{Error, Result};
use crate::linalg::{CMat, C64, I};

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rtol: 1e-11,
            atol: 1e-13,
        }
    }
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth minus fourth order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

struct Rhs<'a> {
    h: &'a CMat,
}

impl Rhs<'_> {
    fn eval(&self, s: &[C64], out: &mut [C64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let acc: C64 = s.iter().enumerate().map(|(j, x)| self.h[(i, j)] * x).sum();
            *o = -I * acc;
        }
    }
}

fn axpy(out: &mut [C64], base: &[C64], terms: &[(f64, &[C64])], dt: f64) {
    for i in 0..out.len() {
        let mut acc = base[i];
        for (w, k) in terms {
            acc += k[i] * (w * dt);
        }
        out[i] = acc;
    }
}

/// Integrates from `times[0]` through each requested time, which must be
/// non-decreasing. Returns the state at every requested time.
pub fn integrate(
    h: &CMat,
    initial: &[C64],
    times: &[f64],
    tol: Tolerance,
) -> Result<Vec<Vec<C64>>> {
    let n = initial.len();
    let rhs = Rhs { h };
    let scale = crate::linalg::frobenius(h).max(1e-300);
    let mut s = initial.to_vec();
    let mut out = Vec::with_capacity(times.len());
    let Some(&t0) = times.first() else {
        return Ok(out);
    };
    let mut t = t0;
    let mut dt = 0.1 / scale;

    let mut k = vec![vec![C64::new(0.0, 0.0); n]; 7];
    let mut tmp = vec![C64::new(0.0, 0.0); n];
    let mut next = vec![C64::new(0.0, 0.0); n];
    rhs.eval(&s, &mut k[0]);

    for &target in times {
        while t < target {
            let step = dt.min(target - t);
            let (k1, rest) = k.split_at_mut(1);
            let k1 = &k1[0];
            axpy(&mut tmp, &s, &[(A21, k1)], step);
            rhs.eval(&tmp, &mut rest[0]);
            axpy(&mut tmp, &s, &[(A31, k1), (A32, &rest[0])], step);
            rhs.eval(&tmp, &mut rest[1]);
            axpy(
                &mut tmp,
                &s,
                &[(A41, k1), (A42, &rest[0]), (A43, &rest[1])],
                step,
            );
            rhs.eval(&tmp, &mut rest[2]);
            axpy(
                &mut tmp,
                &s,
                &[(A51, k1), (A52, &rest[0]), (A53, &rest[1]), (A54, &rest[2])],
                step,
            );
            rhs.eval(&tmp, &mut rest[3]);
            axpy(
                &mut tmp,
                &s,
                &[
                    (A61, k1),
                    (A62, &rest[0]),
                    (A63, &rest[1]),
                    (A64, &rest[2]),
                    (A65, &rest[3]),
                ],
                step,
            );
            rhs.eval(&tmp, &mut rest[4]);
            axpy(
                &mut next,
                &s,
                &[
                    (B1, k1),
                    (B3, &rest[1]),
                    (B4, &rest[2]),
                    (B5, &rest[3]),
                    (B6, &rest[4]),
                ],
                step,
            );
            rhs.eval(&next, &mut rest[5]);

            let mut err = 0.0f64;
            for i in 0..n {
                let e = (k1[i] * E1
                    + rest[1][i] * E3
                    + rest[2][i] * E4
                    + rest[3][i] * E5
                    + rest[4][i] * E6
                    + rest[5][i] * E7)
                    * step;
                let sc = tol.atol + tol.rtol * s[i].norm().max(next[i].norm());
                err = err.max(e.norm() / sc);
            }
            if !err.is_finite() {
                return Err(Error::Divergence { t });
            }
            if err <= 1.0 {
                t += step;
                std::mem::swap(&mut s, &mut next);
                let last = k.pop().unwrap();
                k[0] = last;
                k.push(vec![C64::new(0.0, 0.0); n]);
                if s.iter().any(|z| !z.is_finite()) {
                    return Err(Error::Divergence { t });
                }
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            // a clipped step says nothing about the natural step size
            if err > 1.0 || step == dt {
                dt = step * factor;
            }
            if dt < 1e-14 * (1.0 + t.abs()) {
                return Err(Error::Divergence { t });
            }
        }
        out.push(s.clone());
    }
    Ok(out)
}
