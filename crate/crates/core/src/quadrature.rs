//! Adaptive Simpson quadrature and the Gaussian half-CDF with its inverse.
//! All constants here are the documented defaults: absolute quadrature
//! tolerance 1e-10, bisection stop 1e-10.

/// Default absolute tolerance for the adaptive quadrature.
pub const QUAD_TOL: f64 = 1e-10;
/// Default interval width at which inverse bisections stop.
pub const BISECT_TOL: f64 = 1e-10;

/// Adaptive Simpson integration of `f` over `[a, b]` to absolute
/// tolerance `tol`.
pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    recurse(f, a, b, fa, fm, fb, whole, tol, 60)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Standard normal density.
pub fn gaussian_density(x: f64) -> f64 {
    (-(x * x) / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// `I(r) = γ¹([0, r])`: the mass the standard Gaussian puts on `[0, r]`.
/// Ranges over `[0, 1/2)` for `r ≥ 0`.
pub fn gaussian_half_cdf(r: f64) -> f64 {
    adaptive_simpson(&gaussian_density, 0.0, r, QUAD_TOL)
}

/// Inverse of [`gaussian_half_cdf`] by bracketed bisection; requires
/// `0 ≤ y < 1/2`.
pub fn gaussian_half_cdf_inverse(y: f64) -> f64 {
    assert!((0.0..0.5).contains(&y), "half-CDF value {y} outside [0, 1/2)");
    if y == 0.0 {
        return 0.0;
    }
    let mut hi = 1.0;
    while gaussian_half_cdf(hi) < y {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    while hi - lo > BISECT_TOL {
        let mid = 0.5 * (lo + hi);
        if gaussian_half_cdf(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Standard normal quantile, via the half-CDF inverse.
pub fn gaussian_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile probability {p} outside (0, 1)");
    let y = (p - 0.5).abs();
    let r = gaussian_half_cdf_inverse(y);
    if p < 0.5 {
        -r
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials() {
        let v = adaptive_simpson(&|x| x * x, 0.0, 3.0, 1e-12);
        assert!((v - 9.0).abs() < 1e-10);
    }

    #[test]
    fn half_cdf_limits() {
        assert_eq!(gaussian_half_cdf(0.0), 0.0);
        assert!((gaussian_half_cdf(8.0) - 0.5).abs() < 1e-10);
    }

    #[test]
    fn inverse_matches_known_quartile() {
        // Φ⁻¹(0.75) = 0.674489750196082 (normal quartile).
        let r = gaussian_half_cdf_inverse(0.25);
        assert!((r - 0.674489750196082).abs() < 1e-8);
        assert!((gaussian_quantile(0.25) + r).abs() < 1e-12);
    }
}
