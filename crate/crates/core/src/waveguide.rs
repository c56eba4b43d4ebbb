//! Guided TE modes of the layered slab and the gate-defined strip.
//!
//! The slab solver propagates (E, E') through the inner layers with the
//! usual 2x2 cos/cosh transfer blocks and finds effective indices where
//! the field decays on both sides. The strip is reduced to a symmetric
//! lateral slab via the effective-index method.

use crate::device::{DeviceConfig, Layer};
use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// One slab layer. Thickness is ignored for the first and last (semi-
/// infinite) layers of a stack.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlabLayer<R: Real> {
    pub refractive_index: R,
    pub thickness_um: R,
}

/// A TE slab problem: first and last layers are semi-infinite.
#[derive(Debug, Clone, PartialEq)]
pub struct SlabStack<R: Real> {
    pub layers: Vec<SlabLayer<R>>,
    /// Vacuum wavelength, µm.
    pub wavelength_um: R,
}

/// A solved guided mode with its sampled field profile.
#[derive(Debug, Clone)]
pub struct GuidedMode<R: Real> {
    /// Propagation constant, µm⁻¹.
    pub beta: R,
    pub n_eff: R,
    /// Profile coordinate, µm (origin at the first internal interface).
    pub profile_z: Vec<R>,
    /// L2-normalized field samples.
    pub profile_e: Vec<R>,
    /// Intensity (E²) full width at half maximum, µm.
    pub fwhm_width: R,
}

impl<R: Real> SlabStack<R> {
    pub fn new(layers: Vec<SlabLayer<R>>, wavelength_um: R) -> Result<Self> {
        if layers.len() < 3 {
            return Err(Error::Domain(
                "slab stack needs at least 3 layers (clad/core/clad)".into(),
            ));
        }
        let s = Self {
            layers,
            wavelength_um,
        };
        let (lo, hi) = s.n_eff_window();
        if hi <= lo {
            return Err(Error::ModeCutOff(format!(
                "no guidance window: max core index {hi} <= outer index {lo}"
            )));
        }
        Ok(s)
    }

    /// Build the slab under/outside the strip from a device description.
    /// Bottom layer is the semi-infinite substrate clad; air terminates the
    /// top.
    pub fn from_device_layers(layers: &[Layer], wavelength_um: f64) -> Result<SlabStack<R>> {
        let mut v: Vec<SlabLayer<R>> = layers
            .iter()
            .map(|l| SlabLayer {
                refractive_index: lit(l.refractive_index),
                thickness_um: lit(l.thickness_um),
            })
            .collect();
        v.push(SlabLayer {
            refractive_index: R::one(),
            thickness_um: R::zero(),
        });
        SlabStack::new(v, lit(wavelength_um))
    }

    /// Symmetric 3-region lateral problem (outside / strip / outside).
    pub fn lateral(n_in: R, n_out: R, width_um: R, wavelength_um: R) -> Result<Self> {
        Self::new(
            vec![
                SlabLayer {
                    refractive_index: n_out,
                    thickness_um: R::zero(),
                },
                SlabLayer {
                    refractive_index: n_in,
                    thickness_um: width_um,
                },
                SlabLayer {
                    refractive_index: n_out,
                    thickness_um: R::zero(),
                },
            ],
            wavelength_um,
        )
    }

    fn k0(&self) -> R {
        lit::<R>(2.0) * R::PI() / self.wavelength_um
    }

    /// Search window (n_clad_max, n_core_max) for guided effective indices.
    fn n_eff_window(&self) -> (R, R) {
        let n0 = self.layers[0].refractive_index;
        let nn = self.layers[self.layers.len() - 1].refractive_index;
        let lo = n0.max(nn);
        let hi = self.layers[1..self.layers.len() - 1]
            .iter()
            .map(|l| l.refractive_index)
            .fold(R::zero(), R::max);
        (lo, hi)
    }

    /// TE dispersion residual: propagate E = exp(+g₀z) from the bottom
    /// semi-infinite layer and demand a decaying tail on top, E' = −γ_N E.
    fn residual(&self, n_eff: R) -> R {
        let k0 = self.k0();
        let beta2 = (k0 * n_eff) * (k0 * n_eff);
        let n0 = self.layers[0].refractive_index;
        let g0 = (beta2 - (k0 * n0) * (k0 * n0)).max(R::zero()).sqrt();
        let mut e = R::one();
        let mut de = g0;
        for l in &self.layers[1..self.layers.len() - 1] {
            let (ne, nde) = advance(e, de, l.refractive_index, l.thickness_um, k0, beta2);
            e = ne;
            de = nde;
        }
        let nn = self.layers[self.layers.len() - 1].refractive_index;
        let gn = (beta2 - (k0 * nn) * (k0 * nn)).max(R::zero()).sqrt();
        de + gn * e
    }
}

/// Advance (E, E') across a homogeneous segment of index n and length t.
fn advance<R: Real>(e: R, de: R, n: R, t: R, k0: R, beta2: R) -> (R, R) {
    let kap2 = (k0 * n) * (k0 * n) - beta2;
    if kap2 > R::zero() {
        let k = kap2.sqrt();
        let (s, c) = (k * t).sin_cos();
        (e * c + de * s / k, -e * k * s + de * c)
    } else if kap2 < R::zero() {
        let g = (-kap2).sqrt();
        let ch = (g * t).cosh();
        let sh = (g * t).sinh();
        (e * ch + de * sh / g, e * g * sh + de * ch)
    } else {
        (e + de * t, de)
    }
}

const BRACKET_POINTS: usize = 2000;

/// All guided effective indices, descending (fundamental first).
fn find_n_eff_roots<R: Real>(stack: &SlabStack<R>) -> Vec<R> {
    let (lo, hi) = stack.n_eff_window();
    let eps = lit::<R>(1e-6);
    let a0 = lo + eps;
    let b0 = hi - eps;
    if b0 <= a0 {
        return Vec::new();
    }
    let np = R::from_usize(BRACKET_POINTS).unwrap();
    let step = (b0 - a0) / np;
    let mut roots = Vec::new();
    let mut x_prev = a0;
    let mut f_prev = stack.residual(x_prev);
    for i in 1..=BRACKET_POINTS {
        let x = a0 + step * R::from_usize(i).unwrap();
        let f = stack.residual(x);
        if f_prev * f < R::zero() {
            let (mut a, mut b) = (x_prev, x);
            let mut fa = f_prev;
            // bisect well below the 1e-9 requirement so the reconstructed
            // profile stays clean deep into the evanescent tails
            let tol = (b * R::epsilon() * lit::<R>(4.0)).max(lit::<R>(1e-13));
            for _ in 0..100 {
                if b - a <= tol {
                    break;
                }
                let m = (a + b) / lit::<R>(2.0);
                let fm = stack.residual(m);
                if fa * fm <= R::zero() {
                    b = m;
                } else {
                    a = m;
                    fa = fm;
                }
            }
            roots.push((a + b) / lit::<R>(2.0));
        }
        x_prev = x;
        f_prev = f;
    }
    roots.sort_by(|a, b| b.partial_cmp(a).unwrap());
    roots
}

/// Intensity (field²) FWHM of a sampled profile, linear interpolation at
/// the half crossings.
fn intensity_fwhm<R: Real>(z: &[R], e: &[R]) -> R {
    let i_of = |x: R| x * x;
    let (imax, &emax) = e
        .iter()
        .enumerate()
        .max_by(|a, b| i_of(*a.1).partial_cmp(&i_of(*b.1)).unwrap())
        .unwrap();
    let half = i_of(emax) / lit::<R>(2.0);
    let cross = |range: &mut dyn Iterator<Item = usize>| -> R {
        let mut prev = imax;
        for i in range {
            if i_of(e[i]) < half {
                let (i0, i1) = (prev, i);
                let (y0, y1) = (i_of(e[i0]), i_of(e[i1]));
                let frac = (y0 - half) / (y0 - y1);
                return z[i0] + (z[i1] - z[i0]) * frac;
            }
            prev = i;
        }
        if z[prev] > z[imax] {
            z[z.len() - 1]
        } else {
            z[0]
        }
    };
    let right = cross(&mut (imax + 1..e.len()));
    let left = cross(&mut (0..imax).rev());
    right - left
}

const PROFILE_POINTS: usize = 6000;

/// Sample the mode field on a uniform grid spanning the finite layers plus
/// several decay lengths into each semi-infinite clad, then L2-normalize.
fn build_profile<R: Real>(stack: &SlabStack<R>, n_eff: R) -> (Vec<R>, Vec<R>) {
    let k0 = stack.k0();
    let beta2 = (k0 * n_eff) * (k0 * n_eff);
    let decay = |n: R| (beta2 - (k0 * n) * (k0 * n)).max(lit::<R>(1e-30)).sqrt();
    let g0 = decay(stack.layers[0].refractive_index);
    let gn = decay(stack.layers[stack.layers.len() - 1].refractive_index);
    let six = lit::<R>(6.0);
    let tail0 = (six / g0).min(lit::<R>(100.0));
    let tailn = (six / gn).min(lit::<R>(100.0));
    let inner: R = stack.layers[1..stack.layers.len() - 1]
        .iter()
        .map(|l| l.thickness_um)
        .sum();
    let z_lo = -tail0;
    let z_hi = inner + tailn;
    let n = PROFILE_POINTS;
    let dz = (z_hi - z_lo) / R::from_usize(n - 1).unwrap();
    // Interface positions (z = 0 is the bottom of the first finite layer).
    let mut bounds = vec![R::zero()];
    for l in &stack.layers[1..stack.layers.len() - 1] {
        let last = *bounds.last().unwrap();
        bounds.push(last + l.thickness_um);
    }
    let index_at = |z: R| -> R {
        if z < R::zero() {
            stack.layers[0].refractive_index
        } else {
            for (i, l) in stack.layers[1..stack.layers.len() - 1].iter().enumerate() {
                if z < bounds[i + 1] {
                    return l.refractive_index;
                }
            }
            stack.layers[stack.layers.len() - 1].refractive_index
        }
    };
    let mut zs = Vec::with_capacity(n);
    let mut es = Vec::with_capacity(n);
    // March from the bottom tail: E = exp(g0 (z - 0)) seeds (E, E') at z_lo.
    let mut e = (g0 * z_lo).exp();
    let mut de = g0 * e;
    zs.push(z_lo);
    es.push(e);
    for i in 1..n {
        let z_prev = z_lo + dz * R::from_usize(i - 1).unwrap();
        let z = z_lo + dz * R::from_usize(i).unwrap();
        // step may straddle an interface: split at each boundary inside
        let mut seg_start = z_prev;
        let mut crossing: Vec<R> = bounds
            .iter()
            .cloned()
            .filter(|&b| b > z_prev && b < z)
            .collect();
        crossing.push(z);
        for b in crossing {
            let mid = (seg_start + b) / lit::<R>(2.0);
            let (ne, nde) = advance(e, de, index_at(mid), b - seg_start, k0, beta2);
            e = ne;
            de = nde;
            seg_start = b;
        }
        zs.push(z);
        es.push(e);
    }
    // L2-normalize.
    let norm = (es.iter().map(|x| *x * *x).sum::<R>() * dz).sqrt();
    for x in es.iter_mut() {
        *x = *x / norm;
    }
    (zs, es)
}

/// Solve for the `mode_order`-th guided TE mode (0 = fundamental) of a
/// layered slab.
pub fn solve_slab_te<R: Real>(stack: &SlabStack<R>, mode_order: usize) -> Result<GuidedMode<R>> {
    let roots = find_n_eff_roots(stack);
    if roots.len() <= mode_order {
        return Err(Error::ModeCutOff(format!(
            "mode cut off: found {} guided mode(s), requested order {}",
            roots.len(),
            mode_order
        )));
    }
    let n_eff = roots[mode_order];
    let (zs, es) = build_profile(stack, n_eff);
    let fwhm = intensity_fwhm(&zs, &es);
    Ok(GuidedMode {
        beta: stack.k0() * n_eff,
        n_eff,
        profile_z: zs,
        profile_e: es,
        fwhm_width: fwhm,
    })
}

/// Effective-index method: reduce the strip to a symmetric lateral slab
/// with indices (n_eff outside, n_eff under strip, n_eff outside) and
/// solve its fundamental mode. The returned FWHM is the lateral mode
/// width w.
pub fn effective_index_strip<R: Real>(
    stack_under_strip: &SlabStack<R>,
    stack_outside: &SlabStack<R>,
    strip_width_um: R,
) -> Result<GuidedMode<R>> {
    let m_in = solve_slab_te(stack_under_strip, 0)?;
    let m_out = solve_slab_te(stack_outside, 0)?;
    if m_in.n_eff <= m_out.n_eff {
        return Err(Error::ModeCutOff(format!(
            "no lateral confinement: n_eff under strip {} <= outside {}",
            m_in.n_eff, m_out.n_eff
        )));
    }
    lateral_mode(
        m_in.n_eff,
        m_out.n_eff,
        strip_width_um,
        stack_under_strip.wavelength_um,
    )
}

/// Fundamental lateral mode of a symmetric 3-region problem given the two
/// effective indices directly (e.g. air outside for a deep-etched strip).
pub fn lateral_mode<R: Real>(
    n_in: R,
    n_out: R,
    width_um: R,
    wavelength_um: R,
) -> Result<GuidedMode<R>> {
    let stack = SlabStack::lateral(n_in, n_out, width_um, wavelength_um)?;
    solve_slab_te(&stack, 0)
}

/// Maximum relative residual of the sampled (β, profile) pair in the
/// discretized mode equation E'' + (k₀²n² − β²)E = 0, using a 5-point
/// stencil and skipping samples within two grid steps of an interface
/// (where E'' is discontinuous).
pub fn mode_equation_residual<R: Real>(stack: &SlabStack<R>, mode: &GuidedMode<R>) -> R {
    let k0 = stack.k0();
    let beta2 = mode.beta * mode.beta;
    let zs = &mode.profile_z;
    let es = &mode.profile_e;
    let dz = zs[1] - zs[0];
    let mut bounds = vec![R::zero()];
    for l in &stack.layers[1..stack.layers.len() - 1] {
        let last = *bounds.last().unwrap();
        bounds.push(last + l.thickness_um);
    }
    let index_at = |z: R| -> R {
        if z < R::zero() {
            stack.layers[0].refractive_index
        } else {
            let mut acc = R::zero();
            for l in &stack.layers[1..stack.layers.len() - 1] {
                acc += l.thickness_um;
                if z < acc {
                    return l.refractive_index;
                }
            }
            stack.layers[stack.layers.len() - 1].refractive_index
        }
    };
    let scale = es
        .iter()
        .map(|e| k0 * k0 * e.abs())
        .fold(R::zero(), R::max)
        * lit::<R>(16.0); // generous n² bound
    let two_dz = dz * lit::<R>(2.0);
    let mut worst = R::zero();
    for i in 2..zs.len() - 2 {
        let z = zs[i];
        if bounds.iter().any(|&b| (z - b).abs() <= two_dz) {
            continue;
        }
        let d2 = (-es[i - 2] + lit::<R>(16.0) * es[i - 1] - lit::<R>(30.0) * es[i]
            + lit::<R>(16.0) * es[i + 1]
            - es[i + 2])
            / (lit::<R>(12.0) * dz * dz);
        let n = index_at(z);
        let res = d2 + ((k0 * n) * (k0 * n) - beta2) * es[i];
        worst = worst.max(res.abs() / scale);
    }
    worst
}

/// Slab problems for the default device, under and outside the strip.
pub fn device_slabs(cfg: &DeviceConfig) -> Result<(SlabStack<f64>, SlabStack<f64>)> {
    let under = SlabStack::from_device_layers(&cfg.layers_under_strip(), cfg.wavelength_um)?;
    let outside = SlabStack::from_device_layers(&cfg.layers_outside_strip(), cfg.wavelength_um)?;
    Ok((under, outside))
}
