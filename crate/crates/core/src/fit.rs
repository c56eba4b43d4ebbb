//! Small least-squares helpers shared by the dispersion and blockade modules.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Fit y = κ·x + b·x² (no constant term) by least squares.
/// Returns (κ, b, rms residual).
pub fn quadratic_through_origin<R: Real>(xs: &[R], ys: &[R]) -> Result<(R, R, R)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::Statistics(
            "quadratic fit needs >= 2 (x, y) pairs".into(),
        ));
    }
    // Normal equations for the design matrix [x, x^2].
    let (mut s2, mut s3, mut s4, mut sxy, mut sx2y) =
        (R::zero(), R::zero(), R::zero(), R::zero(), R::zero());
    for (&x, &y) in xs.iter().zip(ys) {
        let x2 = x * x;
        s2 += x2;
        s3 += x2 * x;
        s4 += x2 * x2;
        sxy += x * y;
        sx2y += x2 * y;
    }
    let det = s2 * s4 - s3 * s3;
    if det.abs() <= R::epsilon() * s2 * s4 {
        return Err(Error::Statistics(
            "quadratic fit is ill-conditioned (degenerate x grid)".into(),
        ));
    }
    let kappa = (s4 * sxy - s3 * sx2y) / det;
    let b = (s2 * sx2y - s3 * sxy) / det;
    let mut rss = R::zero();
    for (&x, &y) in xs.iter().zip(ys) {
        let r = y - kappa * x - b * x * x;
        rss += r * r;
    }
    let n = R::from_usize(xs.len()).unwrap();
    Ok((kappa, b, (rss / n).sqrt()))
}

/// Fit y = a·x through the origin; returns (a, R²) with R² computed against
/// the mean of y.
pub fn proportional_fit<R: Real>(xs: &[R], ys: &[R]) -> Result<(R, R)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::Statistics(
            "proportional fit needs >= 2 (x, y) pairs".into(),
        ));
    }
    let sxx: R = xs.iter().map(|&x| x * x).sum();
    if sxx <= R::zero() {
        return Err(Error::Statistics("proportional fit: all x are zero".into()));
    }
    let sxy: R = xs.iter().zip(ys).map(|(&x, &y)| x * y).sum();
    let a = sxy / sxx;
    let n = R::from_usize(ys.len()).unwrap();
    let ymean: R = ys.iter().copied().sum::<R>() / n;
    let mut ss_res = R::zero();
    let mut ss_tot = R::zero();
    for (&x, &y) in xs.iter().zip(ys) {
        let r = y - a * x;
        ss_res += r * r;
        let d = y - ymean;
        ss_tot += d * d;
    }
    let r2 = if ss_tot > R::zero() {
        R::one() - ss_res / ss_tot
    } else {
        R::one()
    };
    Ok((a, r2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_recovers_exact_coefficients() {
        let xs: Vec<f64> = vec![0.02, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5];
        let ys: Vec<f64> = xs.iter().map(|&x| 0.61 * x - 0.56 * x * x).collect();
        let (k, b, rms) = quadratic_through_origin(&xs, &ys).unwrap();
        assert!((k - 0.61).abs() < 1e-12);
        assert!((b + 0.56).abs() < 1e-12);
        assert!(rms < 1e-14);
    }

    #[test]
    fn quadratic_rejects_degenerate_grid() {
        let xs = vec![0.1f64, 0.1, 0.1];
        let ys = vec![1.0, 1.0, 1.0];
        assert!(quadratic_through_origin(&xs, &ys).is_err());
    }

    #[test]
    fn proportional_exact() {
        let xs = vec![0.1f64, 0.4, 0.9];
        let ys: Vec<f64> = xs.iter().map(|&x| 83.0 * x).collect();
        let (a, r2) = proportional_fit(&xs, &ys).unwrap();
        assert!((a - 83.0).abs() < 1e-12);
        assert!(r2 > 1.0 - 1e-12);
    }
}
