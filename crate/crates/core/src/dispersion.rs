//! 3x3 coupled-oscillator polariton dispersion: TE waveguide photon
//! coupled to heavy-hole and light-hole excitons. Branch energies,
//! Hopfield fractions, group velocities, and the streak-delay inversion.

use crate::error::{Error, Result};
use crate::fit::proportional_fit;
use crate::scalar::{lit, Real};
use crate::units::{energy_mev_from_wavelength_nm, hbar, light_speed};

/// Exciton energies and photon-exciton couplings at one bias point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingParams<R: Real> {
    /// Heavy-hole / light-hole exciton energies, meV.
    pub e_hh: R,
    pub e_lh: R,
    /// Rabi splittings, meV (resonant splitting equals these values; the
    /// matrix element is Omega/2).
    pub omega_hh: R,
    pub omega_lh: R,
    pub n_eff: R,
    /// Applied bias this parameter set describes, V.
    pub voltage_tag: R,
}

impl<R: Real> CouplingParams<R> {
    pub fn validate(&self) -> Result<()> {
        if self.omega_hh <= R::zero() || self.omega_lh <= R::zero() {
            return Err(Error::Domain("Rabi splittings must be positive".into()));
        }
        if self.e_lh <= self.e_hh {
            return Err(Error::Domain(
                "light-hole exciton must lie above the heavy-hole".into(),
            ));
        }
        Ok(())
    }

    /// Zero-bias parameter set (exciton lines at 812 / 809.3 nm).
    pub fn zero_bias() -> Self {
        Self {
            e_hh: energy_mev_from_wavelength_nm(lit::<R>(812.0)),
            e_lh: energy_mev_from_wavelength_nm(lit::<R>(809.3)),
            omega_hh: lit(6.4),
            omega_lh: lit(4.5),
            n_eff: lit(3.6),
            voltage_tag: R::zero(),
        }
    }

    /// 2.5 V bias parameter set (Stark-shifted lines at 817.8 / 811.7 nm).
    pub fn biased_2p5() -> Self {
        Self {
            e_hh: energy_mev_from_wavelength_nm(lit::<R>(817.8)),
            e_lh: energy_mev_from_wavelength_nm(lit::<R>(811.7)),
            omega_hh: lit(5.4),
            omega_lh: lit(3.7),
            n_eff: lit(3.6),
            voltage_tag: lit(2.5),
        }
    }

    /// Linearized photon energy at propagation constant β (µm⁻¹).
    pub fn photon_energy(&self, beta: R) -> R {
        hbar::<R>() * light_speed::<R>() * beta / self.n_eff
    }

    /// β at which the photon line crosses a given energy.
    pub fn beta_at_energy(&self, e: R) -> R {
        e * self.n_eff / (hbar::<R>() * light_speed::<R>())
    }
}

/// One sample of one polariton branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchSample<R: Real> {
    pub beta: R,
    pub energy: R,
    /// Hopfield weights: photonic, heavy-hole, light-hole fractions.
    pub chi_te2: R,
    pub chi_hh2: R,
    pub chi_lh2: R,
    /// Group velocity ħ⁻¹ dE/dβ, µm/ps.
    pub v_g: R,
    /// Set when the local eigenvalue splitting is below 1e-9 meV.
    pub degenerate: bool,
}

impl<R: Real> BranchSample<R> {
    /// Total exciton fraction |χ_X|².
    pub fn exciton_fraction(&self) -> R {
        self.chi_hh2 + self.chi_lh2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchId {
    Lower,
    Middle,
    Upper,
}

#[derive(Debug, Clone)]
pub struct PolaritonBranch<R: Real> {
    pub branch_id: BranchId,
    pub samples: Vec<BranchSample<R>>,
}

/// Jacobi eigen-decomposition of a real symmetric 3x3 matrix. Returns
/// eigenvalues ascending with matching orthonormal eigenvector columns.
fn eigen3<R: Real>(m: [[R; 3]; 3]) -> ([R; 3], [[R; 3]; 3]) {
    let mut a = m;
    // v starts as identity and accumulates the rotations
    let mut v = [
        [R::one(), R::zero(), R::zero()],
        [R::zero(), R::one(), R::zero()],
        [R::zero(), R::zero(), R::one()],
    ];
    for _sweep in 0..50 {
        let off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
        let diag = a[0][0] * a[0][0] + a[1][1] * a[1][1] + a[2][2] * a[2][2];
        if off <= (diag + off) * R::epsilon() * R::epsilon() {
            break;
        }
        for p in 0..2 {
            for q in (p + 1)..3 {
                if a[p][q].abs() <= R::epsilon() * (a[p][p].abs() + a[q][q].abs()) {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (lit::<R>(2.0) * a[p][q]);
                let t = {
                    let s = if theta >= R::zero() { R::one() } else { -R::one() };
                    s / (theta.abs() + (theta * theta + R::one()).sqrt())
                };
                let c = R::one() / (t * t + R::one()).sqrt();
                let s = t * c;
                let app = a[p][p];
                let aqq = a[q][q];
                let apq = a[p][q];
                a[p][p] = c * c * app - lit::<R>(2.0) * s * c * apq + s * s * aqq;
                a[q][q] = s * s * app + lit::<R>(2.0) * s * c * apq + c * c * aqq;
                a[p][q] = R::zero();
                a[q][p] = R::zero();
                for r in 0..3 {
                    if r != p && r != q {
                        let arp = a[r][p];
                        let arq = a[r][q];
                        a[r][p] = c * arp - s * arq;
                        a[p][r] = a[r][p];
                        a[r][q] = s * arp + c * arq;
                        a[q][r] = a[r][q];
                    }
                }
                for r in 0..3 {
                    let vrp = v[r][p];
                    let vrq = v[r][q];
                    v[r][p] = c * vrp - s * vrq;
                    v[r][q] = s * vrp + c * vrq;
                }
            }
        }
    }
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| a[i][i].partial_cmp(&a[j][j]).unwrap());
    let vals = [a[order[0]][order[0]], a[order[1]][order[1]], a[order[2]][order[2]]];
    let mut vecs = [[R::zero(); 3]; 3];
    for (k, &o) in order.iter().enumerate() {
        for r in 0..3 {
            vecs[r][k] = v[r][o];
        }
    }
    (vals, vecs)
}

fn eigen_at<R: Real>(params: &CouplingParams<R>, beta: R) -> ([R; 3], [[R; 3]; 3]) {
    let h = [
        [params.photon_energy(beta), params.omega_hh / lit::<R>(2.0), params.omega_lh / lit::<R>(2.0)],
        [params.omega_hh / lit::<R>(2.0), params.e_hh, R::zero()],
        [params.omega_lh / lit::<R>(2.0), R::zero(), params.e_lh],
    ];
    eigen3(h)
}

/// Diagonalize the coupled-oscillator model over a β grid. Returns the
/// three branches ordered (lower, middle, upper).
pub fn dispersion<R: Real>(
    params: &CouplingParams<R>,
    beta_grid: &[R],
) -> Result<[PolaritonBranch<R>; 3]> {
    params.validate()?;
    if beta_grid.is_empty() {
        return Err(Error::Domain("empty beta grid".into()));
    }
    for w in beta_grid.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::Domain("beta grid must be sorted ascending".into()));
        }
    }
    if beta_grid[0] <= R::zero() {
        return Err(Error::Domain("beta grid must be positive".into()));
    }
    let ids = [BranchId::Lower, BranchId::Middle, BranchId::Upper];
    let mut branches: Vec<PolaritonBranch<R>> = ids
        .iter()
        .map(|&branch_id| PolaritonBranch {
            branch_id,
            samples: Vec::with_capacity(beta_grid.len()),
        })
        .collect();
    // centered differences need a small local step; reuse grid spacing or
    // a 1e-5 relative step for single points
    for (i, &beta) in beta_grid.iter().enumerate() {
        let (vals, vecs) = eigen_at(params, beta);
        let db = if beta_grid.len() > 1 {
            let lo = if i > 0 { beta_grid[i] - beta_grid[i - 1] } else { beta_grid[1] - beta_grid[0] };
            lo.min(beta * lit::<R>(1e-4))
        } else {
            beta * lit::<R>(1e-5)
        };
        let (vals_m, _) = eigen_at(params, beta - db);
        let (vals_p, _) = eigen_at(params, beta + db);
        let min_split = (vals[1] - vals[0]).min(vals[2] - vals[1]);
        let degenerate = min_split < lit::<R>(1e-9);
        for k in 0..3 {
            let v_g = (vals_p[k] - vals_m[k]) / (lit::<R>(2.0) * db) / hbar::<R>();
            branches[k].samples.push(BranchSample {
                beta,
                energy: vals[k],
                chi_te2: vecs[0][k] * vecs[0][k],
                chi_hh2: vecs[1][k] * vecs[1][k],
                chi_lh2: vecs[2][k] * vecs[2][k],
                v_g,
                degenerate,
            });
        }
    }
    let mut it = branches.into_iter();
    Ok([it.next().unwrap(), it.next().unwrap(), it.next().unwrap()])
}

/// (|χ_X|², v_g) pairs sorted by exciton fraction, plus the linear fit
/// v_g = v_p(1−|χ_X|²) and its R².
pub fn group_velocity_vs_fraction<R: Real>(
    branch: &PolaritonBranch<R>,
) -> Result<(Vec<(R, R)>, R, R)> {
    if branch.samples.len() < 3 {
        return Err(Error::Domain(
            "need at least 3 samples for the velocity-fraction fit".into(),
        ));
    }
    let mut pairs: Vec<(R, R)> = branch
        .samples
        .iter()
        .map(|s| (s.exciton_fraction(), s.v_g))
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let xs: Vec<R> = pairs.iter().map(|p| R::one() - p.0).collect();
    let ys: Vec<R> = pairs.iter().map(|p| p.1).collect();
    let (v_p, r2) = proportional_fit(&xs, &ys)?;
    Ok((pairs, v_p, r2))
}

/// Invert streak-camera delays into group velocities:
/// 1/v′ = Δt/x + 1/v_ref for a channel of length x.
pub fn velocity_from_delays<R: Real>(
    delays: &[(R, R)],
    channel_length: R,
    v_ref: R,
) -> Result<Vec<(R, R)>> {
    if channel_length <= R::zero() || v_ref <= R::zero() {
        return Err(Error::Domain(
            "channel length and reference velocity must be positive".into(),
        ));
    }
    delays
        .iter()
        .map(|&(tag, dt)| {
            let inv = dt / channel_length + R::one() / v_ref;
            if inv <= R::zero() {
                return Err(Error::Domain(format!(
                    "delay {dt} ps yields non-positive 1/v for channel {channel_length} µm"
                )));
            }
            Ok((tag, R::one() / inv))
        })
        .collect()
}

/// Forward direction of the same relation: Δt = x(1/v′ − 1/v_ref).
pub fn delay_from_velocity<R: Real>(v_prime: R, channel_length: R, v_ref: R) -> Result<R> {
    if v_prime <= R::zero() || v_ref <= R::zero() || channel_length <= R::zero() {
        return Err(Error::Domain("velocities and length must be positive".into()));
    }
    Ok(channel_length * (R::one() / v_prime - R::one() / v_ref))
}
