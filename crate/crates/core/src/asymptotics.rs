//! Closed-form asymptotic laws for the singular values, the ROI norms and
//! the WKB profile of the singular functions on the overlap.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{poly_p, w3, Geometry, GeometryConstants, RoiParam};
use crate::operator::SampledGrid;
use crate::spectral::SingularSystem;

/// Asymptotic laws of one geometry with `K-`, `K+` evaluated once.
#[derive(Debug, Clone, Copy)]
pub struct AsymptoticModel {
    pub consts: GeometryConstants,
}

impl AsymptoticModel {
    pub fn new(geom: &Geometry) -> Result<Self> {
        Ok(Self { consts: GeometryConstants::compute(geom)? })
    }

    pub fn geometry(&self) -> &Geometry {
        &self.consts.geom
    }

    /// `2 exp(-n pi K+ / K-)`.
    pub fn sigma_pos(&self, n: i64) -> f64 {
        2.0 * (-(n as f64) * self.consts.alpha).exp()
    }

    /// `1 - 2 exp(-2 |n| pi K- / K+)`.
    pub fn sigma_neg(&self, n_abs: i64) -> f64 {
        1.0 - 2.0 * (-(n_abs as f64) * self.consts.near_one_rate()).exp()
    }

    /// False when the model already fails to be a singular value at `|n| = 1`.
    pub fn neg_regime_valid(&self) -> bool {
        self.sigma_neg(1) > 0.0
    }

    /// `(n pi)^{-1/2} exp(-beta_mu n)`.
    pub fn roi_norm(&self, mu: RoiParam, n: i64) -> Result<f64> {
        let beta = self.consts.beta_mu(mu)?;
        Ok(roi_norm_from_beta(beta, n))
    }

    pub fn profile(&self, n: i64) -> Result<WkbProfile> {
        if n < 1 {
            return Err(Error::InvalidArgument(format!("WKB index must be >= 1, got {n}")));
        }
        Ok(WkbProfile {
            geom: self.consts.geom,
            n,
            epsilon: self.consts.k_minus / (n as f64 * PI),
            k_minus: self.consts.k_minus,
        })
    }
}

pub fn roi_norm_from_beta(beta: f64, n: i64) -> f64 {
    let n = n as f64;
    (-beta * n).exp() / (n * PI).sqrt()
}

pub fn sigma_model_pos(geom: &Geometry, n: i64) -> Result<f64> {
    Ok(AsymptoticModel::new(geom)?.sigma_pos(n))
}

pub fn sigma_model_neg(geom: &Geometry, n_abs: i64) -> Result<f64> {
    Ok(AsymptoticModel::new(geom)?.sigma_neg(n_abs))
}

pub fn roi_norm_model(geom: &Geometry, mu: RoiParam, n: i64) -> Result<f64> {
    AsymptoticModel::new(geom)?.roi_norm(mu, n)
}

pub fn u_wkb(geom: &Geometry, n: i64, x: f64) -> Result<f64> {
    AsymptoticModel::new(geom)?.profile(n)?.eval(x)
}

/// WKB shape of `u_n` on the overlap, with `eps = K- / (n pi)`.
#[derive(Debug, Clone, Copy)]
pub struct WkbProfile {
    pub geom: Geometry,
    pub n: i64,
    pub epsilon: f64,
    k_minus: f64,
}

impl WkbProfile {
    /// The evaluation domain `(a2 + eps, a3 - eps)`.
    pub fn domain(&self) -> (f64, f64) {
        (self.geom.a2 + self.epsilon, self.geom.a3 - self.epsilon)
    }

    /// Like [`Self::eval`] without the inset check; any `x` in `(a2, a3)`.
    pub fn eval_unchecked(&self, x: f64) -> Result<f64> {
        let g = &self.geom;
        if !(x > g.a2 && x < g.a3) {
            return Err(Error::Domain { x, lo: g.a2, hi: g.a3 });
        }
        let sign = if self.n % 2 == 1 { 1.0 } else { -1.0 };
        let amp = (2.0 / self.k_minus).sqrt() * poly_p(g, x).powf(-0.25);
        Ok(sign * amp * (-w3(g, x)? / self.epsilon).exp())
    }

    /// `sqrt(2/K-) (-1)^{n+1} P(x)^{-1/4} exp(-w3(x) / eps)`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.domain();
        if !(x > lo && x < hi) {
            return Err(Error::Domain { x, lo, hi });
        }
        self.eval_unchecked(x)
    }
}

/// Comparison window for profile checks on a grid with spacing `step`: the
/// overlap inset by `max(eps, step)` at both ends. The sample nearest to `a3`
/// sits half a step from the logarithmic singularity of the discrete kernel,
/// so an inset narrower than one step is not meaningful.
pub fn comparison_window(profile: &WkbProfile, step: f64) -> (f64, f64) {
    let h = profile.epsilon.max(step);
    (profile.geom.a2 + h, profile.geom.a3 - h)
}

/// Pearson correlation of `|u_wkb|` and `|u_k|` over the comparison window.
pub fn wkb_correlation(sys: &SingularSystem, model: &AsymptoticModel, n: i64) -> Result<f64> {
    let k = sys
        .position_of(n)
        .ok_or_else(|| Error::InvalidArgument(format!("no triple with asymptotic index {n}")))?;
    let profile = model.profile(n)?;
    let (lo, hi) = comparison_window(&profile, sys.step);
    let range = sys.object_grid.indices_within(lo, hi);
    if range.len() < 2 {
        return Err(Error::EmptyRoi { lo, hi });
    }
    let mut a = Vec::with_capacity(range.len());
    let mut b = Vec::with_capacity(range.len());
    for j in range {
        a.push(profile.eval_unchecked(sys.object_grid.point(j))?.abs());
        b.push(sys.triples[k].u[j].abs());
    }
    Ok(correlation(&a, &b))
}

pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma).powi(2);
        sbb += (y - mb).powi(2);
    }
    sab / (saa * sbb).sqrt()
}

/// Step-weighted norm of the WKB profile over grid samples in
/// `(a2 + eps, a3 - mu)`, the numerical counterpart of the ROI-norm law.
pub fn wkb_roi_norm(profile: &WkbProfile, grid: &SampledGrid, mu: RoiParam) -> Result<f64> {
    mu.check(&profile.geom)?;
    let (lo, _) = profile.domain();
    let range = grid.indices_within(lo, mu.roi_end(&profile.geom));
    let mut s = 0.0;
    for j in range {
        s += profile.eval_unchecked(grid.point(j))?.powi(2);
    }
    Ok((s * grid.step).sqrt())
}
