//! Noise model, truncated SVD and Tikhonov reconstructions, and test phantoms.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::bounds::{cutoff_real, AsymptoticConstants};
use crate::error::{Error, Result};
use crate::geometry::{Geometry, RoiParam};
use crate::operator::{weighted_dot, weighted_norm, SampledGrid};
use crate::spectral::{roi_restricted_norm, SingularSystem};

#[derive(Debug, Clone, PartialEq)]
pub struct NoisyData {
    pub g: Vec<f64>,
    /// The added perturbation, of step-weighted norm `delta`.
    pub noise: Vec<f64>,
    pub delta: f64,
    pub seed: u64,
}

/// Adds seeded Gaussian noise rescaled to step-weighted norm exactly `delta`.
pub fn add_noise(g_ex: &[f64], step: f64, delta: f64, seed: u64) -> Result<NoisyData> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::InvalidArgument(format!("delta must be >= 0, got {delta}")));
    }
    if delta == 0.0 {
        return Ok(NoisyData { g: g_ex.to_vec(), noise: vec![0.0; g_ex.len()], delta, seed });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<f64> = (0..g_ex.len()).map(|_| StandardNormal.sample(&mut rng)).collect();
    let s = delta / weighted_norm(&raw, step);
    let noise: Vec<f64> = raw.iter().map(|v| v * s).collect();
    let g = g_ex.iter().zip(&noise).map(|(a, b)| a + b).collect();
    Ok(NoisyData { g, noise, delta, seed })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffChoice {
    /// Rounded, clamped at 0.
    pub n: u32,
    pub n_real: f64,
    /// `N(delta) > N_mu`, the condition under which the L2 bounds apply.
    pub valid: bool,
}

pub fn optimal_cutoff_l2(delta: f64, e: f64, k: &AsymptoticConstants) -> Result<CutoffChoice> {
    if !(delta > 0.0) || !(e > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need delta > 0 and E > 0, got {delta}, {e}"
        )));
    }
    let n_real = cutoff_real(delta, e, k);
    Ok(CutoffChoice {
        n: n_real.round().max(0.0) as u32,
        n_real,
        valid: n_real > k.n_mu as f64,
    })
}

/// `delta / (E V_mu)`, the singular value level matching the quasi-optimal cutoff.
pub fn sigma_cutoff_from_ratio(delta: f64, e: f64, v_mu: f64) -> Result<f64> {
    if !(delta > 0.0 && e > 0.0 && v_mu > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need positive inputs, got delta {delta}, E {e}, V_mu {v_mu}"
        )));
    }
    Ok(delta / (e * v_mu))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Tsvd,
    Tikhonov,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Tsvd => "tsvd",
            Method::Tikhonov => "tikhonov",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionResult {
    pub f: Vec<f64>,
    pub method: Method,
    pub cutoff: Option<u32>,
    pub eta: Option<f64>,
    pub roi_error: Option<f64>,
}

impl ReconstructionResult {
    /// Fills `roi_error` with `||chi_mu (f - truth)||`.
    pub fn with_roi_error(mut self, truth: &[f64], sys: &SingularSystem, mu: RoiParam) -> Result<Self> {
        let diff = difference(&self.f, truth)?;
        self.roi_error = Some(roi_restricted_norm(&sys.object_grid, &sys.geometry, &diff, mu)?);
        Ok(self)
    }
}

fn difference(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), got: b.len() });
    }
    Ok(a.iter().zip(b).map(|(x, y)| x - y).collect())
}

/// `<g, v_k>` in the step-weighted pairing, one per triple.
pub fn data_coefficients(sys: &SingularSystem, g: &[f64]) -> Result<Vec<f64>> {
    if g.len() != sys.data_grid.count {
        return Err(Error::DimensionMismatch { expected: sys.data_grid.count, got: g.len() });
    }
    Ok(sys.triples.iter().map(|t| weighted_dot(g, &t.v, sys.step)).collect())
}

/// `<f, u_k>` in the step-weighted pairing, one per triple.
pub fn object_coefficients(sys: &SingularSystem, f: &[f64]) -> Result<Vec<f64>> {
    if f.len() != sys.object_grid.count {
        return Err(Error::DimensionMismatch { expected: sys.object_grid.count, got: f.len() });
    }
    Ok(sys.triples.iter().map(|t| weighted_dot(f, &t.u, sys.step)).collect())
}

/// `sum c_k u_k`.
pub fn synthesize(sys: &SingularSystem, coeffs: &[f64]) -> Vec<f64> {
    let mut f = vec![0.0; sys.object_grid.count];
    for (t, &c) in sys.triples.iter().zip(coeffs) {
        if c != 0.0 {
            for (o, u) in f.iter_mut().zip(&t.u) {
                *o += c * u;
            }
        }
    }
    f
}

/// Orthogonal projection of `f` onto the span of the retained `u_k`.
pub fn spectral_projection(sys: &SingularSystem, f: &[f64]) -> Result<Vec<f64>> {
    Ok(synthesize(sys, &object_coefficients(sys, f)?))
}

/// `sum <g, v_k> / sigma_k u_k` over triples with tail index `<= n_cut` and
/// `sigma >= sigma_floor`. Every triple above the tail is included, which is
/// the finite version of starting the expansion at `n = -inf`.
pub fn tsvd_reconstruct(
    sys: &SingularSystem,
    g: &[f64],
    n_cut: u32,
    sigma_floor: f64,
) -> Result<ReconstructionResult> {
    if !(sigma_floor >= 0.0) {
        return Err(Error::InvalidArgument(format!("sigma_floor must be >= 0, got {sigma_floor}")));
    }
    let mut coeffs = data_coefficients(sys, g)?;
    for (k, c) in coeffs.iter_mut().enumerate() {
        let t = &sys.triples[k];
        if sys.asymptotic_index(k) <= n_cut as i64 && t.sigma >= sigma_floor {
            *c /= t.sigma;
        } else {
            *c = 0.0;
        }
    }
    Ok(ReconstructionResult {
        f: synthesize(sys, &coeffs),
        method: Method::Tsvd,
        cutoff: Some(n_cut),
        eta: None,
        roi_error: None,
    })
}

/// `sum sigma_k / (sigma_k^2 + eta) <g, v_k> u_k` over all retained triples.
pub fn tikhonov_reconstruct(sys: &SingularSystem, g: &[f64], eta: f64) -> Result<ReconstructionResult> {
    if !(eta > 0.0) {
        return Err(Error::InvalidArgument(format!("eta must be positive, got {eta}")));
    }
    let mut coeffs = data_coefficients(sys, g)?;
    for (c, t) in coeffs.iter_mut().zip(&sys.triples) {
        *c *= t.sigma / (t.sigma * t.sigma + eta);
    }
    Ok(ReconstructionResult {
        f: synthesize(sys, &coeffs),
        method: Method::Tikhonov,
        cutoff: None,
        eta: Some(eta),
        roi_error: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Phantom {
    /// `height * exp(1 - 1/(1 - s^2))`, `s = (y - center)/half_width`.
    Bump { center: f64, half_width: f64, height: f64 },
    /// `height` on `(lo, hi)`.
    Indicator { lo: f64, hi: f64, height: f64 },
    /// Piecewise linear, zero at `a2` and `a4`, `height` at `peak_at`.
    Hat { peak_at: f64, height: f64 },
}

pub fn make_phantom(kind: &Phantom, geom: &Geometry, grid: &SampledGrid) -> Result<Vec<f64>> {
    let (a2, a4) = (geom.a2, geom.a4);
    let outside = |what: &str| Err(Error::InvalidArgument(format!("{what} outside ({a2}, {a4})")));
    let f: Box<dyn Fn(f64) -> f64> = match *kind {
        Phantom::Bump { center, half_width, height } => {
            if !(half_width > 0.0) || center - half_width < a2 || center + half_width > a4 {
                return outside("bump support");
            }
            Box::new(move |y: f64| {
                let s = (y - center) / half_width;
                if s.abs() < 1.0 {
                    height * (1.0 - 1.0 / (1.0 - s * s)).exp()
                } else {
                    0.0
                }
            })
        }
        Phantom::Indicator { lo, hi, height } => {
            if !(a2 < lo && lo < hi && hi < a4) {
                return outside("indicator interval");
            }
            Box::new(move |y: f64| if y > lo && y < hi { height } else { 0.0 })
        }
        Phantom::Hat { peak_at, height } => {
            if !(a2 < peak_at && peak_at < a4) {
                return outside("hat peak");
            }
            Box::new(move |y: f64| {
                if y <= a2 || y >= a4 {
                    0.0
                } else if y <= peak_at {
                    height * (y - a2) / (peak_at - a2)
                } else {
                    height * (a4 - y) / (a4 - peak_at)
                }
            })
        }
    };
    Ok(grid.points().into_iter().map(f).collect())
}

/// Sum of absolute increments.
pub fn total_variation(f: &[f64]) -> f64 {
    f.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}
