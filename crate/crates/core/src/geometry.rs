//! Interval geometry `a1 < a2 < a3 < a4`, the quartic `P`, and the singular
//! integrals `K-`, `K+`, `w3` with the rates derived from them.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, Estimate};

pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
}

impl Geometry {
    pub fn new(a1: f64, a2: f64, a3: f64, a4: f64) -> Result<Self> {
        let pts = [a1, a2, a3, a4];
        if pts.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGeometry(format!("non-finite breakpoint in {pts:?}")));
        }
        if !(a1 < a2 && a2 < a3 && a3 < a4) {
            return Err(Error::InvalidGeometry(format!(
                "breakpoints must be strictly increasing, got {pts:?}"
            )));
        }
        Ok(Self { a1, a2, a3, a4 })
    }

    pub fn from_array(a: [f64; 4]) -> Result<Self> {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.a1, self.a2, self.a3, self.a4]
    }

    /// Image under `x -> s x + t`.
    pub fn affine(&self, s: f64, t: f64) -> Result<Self> {
        if !(s > 0.0) {
            return Err(Error::InvalidArgument(format!("scale must be positive, got {s}")));
        }
        Self::new(s * self.a1 + t, s * self.a2 + t, s * self.a3 + t, s * self.a4 + t)
    }

    /// Length of the overlap `(a2, a3)`, the upper limit for `mu`.
    pub fn overlap(&self) -> f64 {
        self.a3 - self.a2
    }
}

/// Width trimmed off at `a3`; the ROI is `(a2, a3 - mu)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoiParam {
    mu: f64,
}

impl RoiParam {
    pub fn new(geom: &Geometry, mu: f64) -> Result<Self> {
        let r = Self { mu };
        r.check(geom)?;
        Ok(r)
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn check(&self, geom: &Geometry) -> Result<()> {
        let max = geom.overlap();
        if self.mu > 0.0 && self.mu < max {
            Ok(())
        } else {
            Err(Error::InvalidRoi { mu: self.mu, max })
        }
    }

    /// Upper end of the ROI.
    pub fn roi_end(&self, geom: &Geometry) -> f64 {
        geom.a3 - self.mu
    }
}

pub fn poly_p(geom: &Geometry, x: f64) -> f64 {
    (x - geom.a1) * (x - geom.a2) * (x - geom.a3) * (x - geom.a4)
}

pub fn poly_p_prime(geom: &Geometry, x: f64) -> f64 {
    let [a1, a2, a3, a4] = geom.as_array();
    let (d1, d2, d3, d4) = (x - a1, x - a2, x - a3, x - a4);
    d2 * d3 * d4 + d1 * d3 * d4 + d1 * d2 * d4 + d1 * d2 * d3
}

/// `int_{a1}^{a2} dx / sqrt(-P)`. With `x = m + r sin(theta)` the factor
/// `(x - a1)(a2 - x)` becomes `r^2 cos^2(theta)` and cancels the Jacobian.
pub fn k_minus_estimate(geom: &Geometry, tol: f64) -> Result<Estimate> {
    let [_, a2, a3, a4] = geom.as_array();
    let m = 0.5 * (geom.a1 + a2);
    let r = 0.5 * (a2 - geom.a1);
    integrate(
        |th: f64| {
            let x = m + r * th.sin();
            1.0 / ((a3 - x) * (a4 - x)).sqrt()
        },
        -FRAC_PI_2,
        FRAC_PI_2,
        tol,
    )
}

/// `int_{a2}^{a3} dx / sqrt(P)`, same substitution on `(a2, a3)`.
pub fn k_plus_estimate(geom: &Geometry, tol: f64) -> Result<Estimate> {
    let [a1, a2, a3, a4] = geom.as_array();
    let m = 0.5 * (a2 + a3);
    let r = 0.5 * (a3 - a2);
    integrate(
        |th: f64| {
            let x = m + r * th.sin();
            1.0 / ((x - a1) * (a4 - x)).sqrt()
        },
        -FRAC_PI_2,
        FRAC_PI_2,
        tol,
    )
}

pub fn k_minus(geom: &Geometry, tol: f64) -> Result<f64> {
    k_minus_estimate(geom, tol).map(|e| e.value)
}

pub fn k_plus(geom: &Geometry, tol: f64) -> Result<f64> {
    k_plus_estimate(geom, tol).map(|e| e.value)
}

pub fn alpha(geom: &Geometry) -> Result<f64> {
    Ok(PI * k_plus(geom, DEFAULT_TOL)? / k_minus(geom, DEFAULT_TOL)?)
}

/// `int_x^{a3} dt / sqrt(P(t))` for `a2 < x <= a3`.
///
/// Uses `t = a3 - 2 r sin^2(phi/2)` with `r = (a3 - a2)/2`, which maps
/// `phi = 0` to `a3` and `phi = pi` to `a2` and turns `dt / sqrt((t-a2)(a3-t))`
/// into `dphi`. Both endpoint singularities disappear, so the rule stays
/// accurate as `x` approaches either end.
pub fn w3_estimate(geom: &Geometry, x: f64, tol: f64) -> Result<Estimate> {
    let [a1, a2, a3, a4] = geom.as_array();
    if !(x > a2 && x <= a3) {
        return Err(Error::Domain { x, lo: a2, hi: a3 });
    }
    let r = 0.5 * (a3 - a2);
    let s = ((a3 - x) / (2.0 * r)).sqrt().min(1.0);
    let phi_x = 2.0 * s.asin();
    integrate(
        |phi: f64| {
            let h = (0.5 * phi).sin();
            let t = a3 - 2.0 * r * h * h;
            1.0 / ((t - a1) * (a4 - t)).sqrt()
        },
        0.0,
        phi_x,
        tol,
    )
}

pub fn w3(geom: &Geometry, x: f64) -> Result<f64> {
    w3_estimate(geom, x, DEFAULT_TOL).map(|e| e.value)
}

/// `(pi / K-) * int_{a3-mu}^{a3} dt / sqrt(P)`.
pub fn beta_mu_exact(geom: &Geometry, mu: RoiParam) -> Result<f64> {
    mu.check(geom)?;
    let km = k_minus(geom, DEFAULT_TOL)?;
    Ok(PI / km * w3(geom, geom.a3 - mu.mu())?)
}

/// Leading small-`mu` term `(2 pi / K-) sqrt(mu) / sqrt(-P'(a3))`. Accepts
/// `mu = 0`, where it vanishes.
pub fn beta_mu_approx(geom: &Geometry, mu: f64) -> Result<f64> {
    if !(mu >= 0.0 && mu < geom.overlap()) {
        return Err(Error::InvalidRoi { mu, max: geom.overlap() });
    }
    let dp = poly_p_prime(geom, geom.a3);
    let km = k_minus(geom, DEFAULT_TOL)?;
    Ok(2.0 * PI / km * mu.sqrt() / (-dp).sqrt())
}

/// Hoelder power `beta_mu / alpha`.
pub fn holder_exponent(geom: &Geometry, mu: RoiParam) -> Result<f64> {
    let c = GeometryConstants::compute(geom)?;
    Ok(c.beta_mu(mu)? / c.alpha)
}

/// `K-`, `K+` and `alpha` computed once for repeated use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryConstants {
    pub geom: Geometry,
    pub k_minus: f64,
    pub k_plus: f64,
    pub alpha: f64,
}

impl GeometryConstants {
    pub fn compute(geom: &Geometry) -> Result<Self> {
        let k_minus = k_minus(geom, DEFAULT_TOL)?;
        let k_plus = k_plus(geom, DEFAULT_TOL)?;
        Ok(Self { geom: *geom, k_minus, k_plus, alpha: PI * k_plus / k_minus })
    }

    /// Rate `2 pi K- / K+` of `1 - sigma` at the accumulation point 1.
    pub fn near_one_rate(&self) -> f64 {
        2.0 * PI * self.k_minus / self.k_plus
    }

    /// Same as [`beta_mu_exact`], reusing `K-`, and asserting `0 < beta < alpha`.
    pub fn beta_mu(&self, mu: RoiParam) -> Result<f64> {
        mu.check(&self.geom)?;
        let b = PI / self.k_minus * w3(&self.geom, self.geom.a3 - mu.mu())?;
        if !(b > 0.0 && b < self.alpha) {
            return Err(Error::InvalidArgument(format!(
                "beta_mu = {b} outside (0, alpha = {})",
                self.alpha
            )));
        }
        Ok(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit() -> Geometry {
        Geometry::new(-1.0, 0.0, 0.5, 1.0).unwrap()
    }

    fn reference() -> Geometry {
        Geometry::new(0.0, 450.0, 1350.0, 1725.0).unwrap()
    }

    #[test]
    fn rejects_bad_ordering() {
        assert!(Geometry::new(0.0, 2.0, 1.0, 3.0).is_err());
        assert!(Geometry::new(0.0, 0.0, 1.0, 3.0).is_err());
        assert!(Geometry::new(0.0, 1.0, f64::NAN, 3.0).is_err());
    }

    #[test]
    fn poly_p_values() {
        assert_eq!(poly_p(&reference(), 450.0), 0.0);
        assert_eq!(poly_p(&unit(), 0.25), 0.05859375);
        assert!(poly_p(&unit(), -0.5) < 0.0);
    }

    #[test]
    fn poly_p_prime_matches_difference_quotient() {
        let g = unit();
        let h = 1e-6;
        let fd = (poly_p(&g, 0.3 + h) - poly_p(&g, 0.3 - h)) / (2.0 * h);
        assert_relative_eq!(poly_p_prime(&g, 0.3), fd, max_relative = 1e-8);
    }

    #[test]
    fn k_goldens() {
        assert_relative_eq!(k_minus(&unit(), 1e-13).unwrap(), 2.8314744168519124, max_relative = 1e-13);
        assert_relative_eq!(k_plus(&unit(), 1e-13).unwrap(), 3.3132763404731883, max_relative = 1e-13);
        assert_relative_eq!(k_minus(&reference(), 1e-15).unwrap(), 2.4567374054576378e-3, max_relative = 1e-12);
        assert_relative_eq!(k_plus(&reference(), 1e-15).unwrap(), 3.9443359716326748e-3, max_relative = 1e-12);
    }

    #[test]
    fn alpha_goldens() {
        assert_relative_eq!(alpha(&unit()).unwrap(), 3.6761641032647329, max_relative = 1e-10);
        assert_relative_eq!(alpha(&reference()).unwrap(), 5.0438833569446543, max_relative = 1e-10);
        let c = GeometryConstants::compute(&reference()).unwrap();
        assert_relative_eq!(c.near_one_rate(), 3.9134943069214422, max_relative = 1e-10);
    }

    #[test]
    fn k_translation_and_scaling() {
        let g = unit();
        let km = k_minus(&g, 1e-13).unwrap();
        let kt = k_minus(&g.affine(1.0, 3.7).unwrap(), 1e-13).unwrap();
        assert!((km - kt).abs() < 1e-12);
        let ks = k_minus(&g.affine(2.5, 0.0).unwrap(), 1e-13).unwrap();
        assert!((ks - km / 2.5).abs() < 1e-10);
    }

    #[test]
    fn halving_tol_stays_within_error_estimate() {
        for g in [unit(), reference()] {
            for f in [k_minus_estimate, k_plus_estimate] {
                let coarse = f(&g, 1e-6).unwrap();
                let fine = f(&g, 5e-7).unwrap();
                assert!((coarse.value - fine.value).abs() <= coarse.error.max(1e-15));
            }
        }
    }

    #[test]
    fn beta_goldens() {
        let g = unit();
        let b = beta_mu_exact(&g, RoiParam::new(&g, 0.05).unwrap()).unwrap();
        assert_relative_eq!(b, 8.1567678174010083e-1, max_relative = 1e-11);
        assert_relative_eq!(w3(&g, 0.45).unwrap(), 7.3515830808877475e-1, max_relative = 1e-11);
        let b1 = beta_mu_exact(&g, RoiParam::new(&g, 0.1).unwrap()).unwrap();
        assert_relative_eq!(b1, 1.1638207444398573, max_relative = 1e-11);
        assert!(b1 > b);
    }

    #[test]
    fn beta_reference_goldens() {
        let g = reference();
        for (mu, want) in [
            (5.0, 2.6773944015246837e-1),
            (20.0, 5.3447787325042315e-1),
            (100.0, 1.1868926401276636),
        ] {
            let b = beta_mu_exact(&g, RoiParam::new(&g, mu).unwrap()).unwrap();
            assert_relative_eq!(b, want, max_relative = 1e-10);
        }
    }

    #[test]
    fn w3_endpoints() {
        let g = unit();
        assert_eq!(w3(&g, g.a3).unwrap(), 0.0);
        let kp = k_plus(&g, 1e-13).unwrap();
        assert!((w3(&g, g.a2 + 1e-9).unwrap() - kp).abs() < 1e-3);
        assert!((w3(&g, g.a2 + 1e-12).unwrap() - kp).abs() < 1e-5);
        assert!(w3(&g, g.a2).is_err());
        assert!(w3(&g, g.a3 + 0.1).is_err());
    }

    #[test]
    fn beta_tends_to_alpha() {
        let g = unit();
        let a = alpha(&g).unwrap();
        let b = beta_mu_exact(&g, RoiParam::new(&g, g.overlap() - 1e-9).unwrap()).unwrap();
        assert!(b < a && a - b < 1e-3);
        let h = holder_exponent(&g, RoiParam::new(&g, g.overlap() - 1e-12).unwrap()).unwrap();
        assert!(h < 1.0 && 1.0 - h < 1e-5);
    }

    #[test]
    fn approx_scaling_and_zero() {
        let g = unit();
        assert_eq!(beta_mu_approx(&g, 0.0).unwrap(), 0.0);
        let b = beta_mu_approx(&g, 0.01).unwrap();
        let b4 = beta_mu_approx(&g, 0.04).unwrap();
        assert_relative_eq!(b4, 2.0 * b, max_relative = 1e-15);
    }

    #[test]
    fn approx_error_is_linear_in_mu() {
        let g = unit();
        let rel = |mu: f64| {
            let e = beta_mu_exact(&g, RoiParam::new(&g, mu).unwrap()).unwrap();
            (beta_mu_approx(&g, mu).unwrap() - e).abs() / e
        };
        for mu in [1e-4, 1e-3] {
            assert!(rel(mu) <= 2.0 * mu);
        }
        let ratio = rel(2e-4) / rel(1e-4);
        assert!((ratio - 2.0).abs() < 0.05, "ratio {ratio}");
    }

    #[test]
    fn holder_goldens() {
        let g = unit();
        let h = |mu: f64| holder_exponent(&g, RoiParam::new(&g, mu).unwrap()).unwrap();
        assert_relative_eq!(h(0.05), 2.2188258163331541e-1, max_relative = 1e-10);
        assert!(h(0.125) > h(0.05) && h(0.05) > h(0.005));
    }

    #[test]
    fn roi_param_is_strict() {
        let g = unit();
        assert!(RoiParam::new(&g, 0.0).is_err());
        assert!(RoiParam::new(&g, 0.5).is_err());
        assert!(RoiParam::new(&g, 0.4999).is_ok());
    }
}
