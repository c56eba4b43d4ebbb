//! Lindblad right-hand side for the driven Kerr oscillator in a truncated
//! Fock basis, plus the adaptive Runge-Kutta stepper used for both the
//! density-matrix evolution and the conditioned-matrix propagation.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};
use crate::units::hbar;

use super::PulseShape;

/// dρ/dt = (i/ħ)[ρ,H] + (γ/ħ)(aρa† − ½{a†aρ + ρa†a}) with
/// H = Δ'a†a + (U/2)a†a†aa + ħF(t)(a+a†). All matrix structure is applied
/// element-wise (a is a single off-diagonal), so the RHS is O(dim²).
pub(crate) struct KerrLiouvillian<R: Real> {
    pub dim: usize,
    pub gamma_p: R,
    pub pulse: PulseShape<R>,
    /// √k lookup, k = 0..dim.
    sqrt_k: Vec<R>,
    /// Diagonal of the drive-free Hamiltonian, meV.
    h_diag: Vec<R>,
}

impl<R: Real> KerrLiouvillian<R> {
    pub fn new(dprime: R, u_dd: R, gamma_p: R, pulse: PulseShape<R>, fock_cutoff: usize) -> Self {
        let dim = fock_cutoff + 1;
        let sqrt_k = (0..=dim).map(|k| R::from_usize(k).unwrap().sqrt()).collect();
        let h_diag = (0..dim)
            .map(|k| {
                let kf = R::from_usize(k).unwrap();
                dprime * kf + u_dd / lit::<R>(2.0) * kf * (kf - R::one())
            })
            .collect();
        Self {
            dim,
            gamma_p,
            pulse,
            sqrt_k,
            h_diag,
        }
    }

    /// Apply the Liouvillian at time t to a (not necessarily trace-one)
    /// matrix y, writing into dy.
    pub fn rhs(&self, t: R, y: &[Complex<R>], dy: &mut [Complex<R>]) {
        let d = self.dim;
        let f = self.pulse.amplitude(t);
        let hf = hbar::<R>() * f;
        let i_over_h = Complex::new(R::zero(), R::one() / hbar::<R>());
        let g = self.gamma_p / hbar::<R>();
        let half = lit::<R>(0.5);
        for j in 0..d {
            for k in 0..d {
                let idx = j * d + k;
                let rho = y[idx];
                // (ρH)_{jk}: diagonal + drive ladder in the column index
                let mut rho_h = rho * self.h_diag[k];
                if k > 0 {
                    rho_h += y[j * d + (k - 1)] * (hf * self.sqrt_k[k]);
                }
                if k + 1 < d {
                    rho_h += y[j * d + (k + 1)] * (hf * self.sqrt_k[k + 1]);
                }
                // (Hρ)_{jk}: ladder in the row index
                let mut h_rho = rho * self.h_diag[j];
                if j > 0 {
                    h_rho += y[(j - 1) * d + k] * (hf * self.sqrt_k[j]);
                }
                if j + 1 < d {
                    h_rho += y[(j + 1) * d + k] * (hf * self.sqrt_k[j + 1]);
                }
                let mut out = (rho_h - h_rho) * i_over_h;
                // dissipator: γ/ħ (aρa† − ½(n̂ρ + ρn̂))
                if j + 1 < d && k + 1 < d {
                    out += y[(j + 1) * d + (k + 1)]
                        * (g * self.sqrt_k[j + 1] * self.sqrt_k[k + 1]);
                }
                let nsum = R::from_usize(j + k).unwrap();
                out -= rho * (g * half * nsum);
                dy[idx] = out;
            }
        }
    }
}

// Dormand-Prince 5(4) coefficients.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
// 5th-order solution weights equal the last A row; 4th-order weights:
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

pub(crate) const RTOL: f64 = 1e-9;
pub(crate) const ATOL: f64 = 1e-12;

/// Integrate dy/dt = rhs(t, y) in place from t0 to t1 with embedded 5(4)
/// error control. The state is a flattened complex matrix; the error norm
/// is an RMS over scaled component magnitudes, which bounds the trace-norm
/// error at the same tolerance for the matrix sizes used here.
pub(crate) fn integrate<R, F>(rhs: &F, y: &mut [Complex<R>], t0: R, t1: R) -> Result<()>
where
    R: Real,
    F: Fn(R, &[Complex<R>], &mut [Complex<R>]),
{
    if t1 <= t0 {
        return Ok(());
    }
    let n = y.len();
    let zero = Complex::new(R::zero(), R::zero());
    let mut k: Vec<Vec<Complex<R>>> = (0..7).map(|_| vec![zero; n]).collect();
    let mut ytmp = vec![zero; n];
    let rtol = lit::<R>(RTOL);
    let atol = lit::<R>(ATOL);
    let span = t1 - t0;
    let mut t = t0;
    let mut h = span * lit::<R>(1e-3);
    let h_min = span * lit::<R>(1e-14);
    let mut first = true;
    // FSAL: k[0] holds rhs at the current point
    rhs(t, y, &mut k[0]);
    let max_steps = 2_000_000usize;
    for _ in 0..max_steps {
        if t1 - t <= span * lit::<R>(1e-12) {
            return Ok(());
        }
        if t + h > t1 {
            h = t1 - t;
        }
        if h < h_min && !first {
            return Err(Error::Numerical(format!(
                "step-size underflow at t = {t} (h = {h})"
            )));
        }
        for s in 0..6 {
            for i in 0..n {
                let mut acc = zero;
                for (j, kj) in k.iter().enumerate().take(s + 1) {
                    let a = A[s][j];
                    if a != 0.0 {
                        acc += kj[i] * lit::<R>(a);
                    }
                }
                ytmp[i] = y[i] + acc * h;
            }
            let ts = t + h * lit::<R>(C[s]);
            let (head, tail) = k.split_at_mut(s + 1);
            let _ = head;
            rhs(ts, &ytmp, &mut tail[0]);
        }
        // ytmp now holds the 5th-order solution (last stage uses the A[5] row)
        // error = y5 - y4
        let mut err_sq = R::zero();
        for i in 0..n {
            let mut y4 = y[i];
            for (j, kj) in k.iter().enumerate() {
                if B4[j] != 0.0 {
                    y4 += kj[i] * (h * lit::<R>(B4[j]));
                }
            }
            let e = (ytmp[i] - y4).norm_sqr().sqrt();
            let scale = atol + rtol * ytmp[i].norm_sqr().sqrt().max(y[i].norm_sqr().sqrt());
            let r = e / scale;
            err_sq += r * r;
        }
        let err = (err_sq / R::from_usize(n).unwrap()).sqrt();
        if err <= R::one() {
            t += h;
            y.copy_from_slice(&ytmp);
            // FSAL: last stage is the derivative at the new point
            let last = k[6].clone();
            k[0].copy_from_slice(&last);
            first = false;
        }
        let factor = if err > R::zero() {
            (lit::<R>(0.9) * err.powf(lit::<R>(-0.2))).min(lit::<R>(5.0)).max(lit::<R>(0.2))
        } else {
            lit::<R>(5.0)
        };
        // on rejection k[0] (derivative at the unchanged t, y) stays valid
        h = h * factor;
    }
    Err(Error::Numerical(
        "integrator exceeded the maximum step count".into(),
    ))
}
