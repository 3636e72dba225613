//! Stability estimates in the ROI (L2 and TV priors), the logarithmic
//! full-interval estimate, and the constants they depend on.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::geometry::{GeometryConstants, RoiParam};
use crate::spectral::{roi_norm, tail_index_map, SingularSystem};

/// Amplitude in `sigma_n >= A exp(-alpha n)`. The discrete spectrum of the
/// default geometry levels off near 1.87, so 1.9 would never calibrate.
pub const DEFAULT_A: f64 = 1.5;
pub const DEFAULT_C_TV: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticConstants {
    pub a: f64,
    pub alpha: f64,
    pub n0: u32,
    pub n_mu: u32,
    pub b_mu: f64,
    pub beta_mu: f64,
    pub v_mu: f64,
    pub w_mu: f64,
    pub c_tv: f64,
}

impl AsymptoticConstants {
    /// Builds the bundle with `B_mu = 1 / sqrt(N_mu pi)` and the closed forms
    /// for `V_mu`, `W_mu`.
    pub fn new(a: f64, alpha: f64, beta_mu: f64, n0: u32, n_mu: u32, c_tv: f64) -> Result<Self> {
        let b_mu = 1.0 / (n_mu as f64 * PI).sqrt();
        Self::with_b_mu(a, alpha, beta_mu, n0, n_mu, c_tv, b_mu)
    }

    pub fn with_b_mu(
        a: f64,
        alpha: f64,
        beta_mu: f64,
        n0: u32,
        n_mu: u32,
        c_tv: f64,
        b_mu: f64,
    ) -> Result<Self> {
        if !(a > 0.0 && a < 2.0) {
            return Err(Error::InvalidArgument(format!("A must lie in (0, 2), got {a}")));
        }
        if n_mu <= n0 {
            return Err(Error::InvalidArgument(format!("need N_mu > N_0, got {n_mu} <= {n0}")));
        }
        if !(b_mu > 0.0) {
            return Err(Error::InvalidArgument(format!("B_mu must be positive, got {b_mu}")));
        }
        let v_mu = v_mu(alpha, beta_mu)?;
        let w_mu = w_mu(alpha, beta_mu, c_tv, n_mu)?;
        Ok(Self { a, alpha, n0, n_mu, b_mu, beta_mu, v_mu, w_mu, c_tv })
    }

    pub fn holder_exponent(&self) -> f64 {
        self.beta_mu / self.alpha
    }
}

fn check_rates(alpha: f64, beta: f64) -> Result<()> {
    if !(beta > 0.0 && alpha > beta && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "need alpha > beta_mu > 0, got alpha = {alpha}, beta_mu = {beta}"
        )));
    }
    Ok(())
}

/// `(b/(a-b)) sqrt((1 - e^{-2(a-b)}) / (e^{2b} - 1))`.
pub fn v_mu(alpha: f64, beta: f64) -> Result<f64> {
    check_rates(alpha, beta)?;
    let d = alpha - beta;
    Ok(beta / d * (-(-2.0 * d).exp_m1() / (2.0 * beta).exp_m1()).sqrt())
}

/// `(b/(a-b)) (1 - e^{-2(a-b)})^{1/2} c / (N_mu (e^b - 1))`.
pub fn w_mu(alpha: f64, beta: f64, c_tv: f64, n_mu: u32) -> Result<f64> {
    check_rates(alpha, beta)?;
    if !(c_tv > 0.0) {
        return Err(Error::InvalidArgument(format!("c must be positive, got {c_tv}")));
    }
    if n_mu < 1 {
        return Err(Error::InvalidArgument("N_mu must be >= 1".into()));
    }
    let d = alpha - beta;
    Ok(beta / d * (-(-2.0 * d).exp_m1()).sqrt() * c_tv / (n_mu as f64 * beta.exp_m1()))
}

/// Calibrates `N_0` and `N_mu` against the computed tail.
///
/// `N_0` is the smallest tail index from which `sigma_n >= A e^{-alpha n}`
/// holds for every computed tail index. `N_mu` is the smallest candidate
/// above `N_0` such that `||chi_mu u_n|| <= B e^{-beta n}` for every tail
/// index `n >= N_mu`, with `B = 1/sqrt(N_mu pi)` tied to the candidate.
pub fn calibrate_constants(
    sys: &SingularSystem,
    mu: RoiParam,
    c_tv: f64,
    a: f64,
) -> Result<AsymptoticConstants> {
    let gc = GeometryConstants::compute(&sys.geometry)?;
    let beta = gc.beta_mu(mu)?;
    let tail = tail_index_map(sys, sys.tail_len)?;

    let holds_p2 = |n: i64, k: usize| sys.triples[k].sigma >= a * (-gc.alpha * n as f64).exp();
    let mut n0 = None;
    for start in 0..tail.len() {
        if tail[start..].iter().all(|e| holds_p2(e.n, e.index)) {
            n0 = Some(tail[start].n as u32);
            break;
        }
    }
    let n0 = n0.ok_or_else(|| {
        Error::Calibration(format!("sigma_n >= {a} exp(-alpha n) fails at the last tail index; choose a smaller A"))
    })?;

    let mut norms = Vec::with_capacity(tail.len());
    for e in &tail {
        norms.push((e.n, roi_norm(sys, e.index, mu)?));
    }
    for cand in n0 + 1..=tail.len() as u32 {
        let b = 1.0 / (cand as f64 * PI).sqrt();
        let ok = norms
            .iter()
            .filter(|(n, _)| *n >= cand as i64)
            .all(|&(n, r)| r <= b * (-beta * n as f64).exp());
        if ok {
            return AsymptoticConstants::new(a, gc.alpha, beta, n0, cand, c_tv);
        }
    }
    Err(Error::Calibration(format!(
        "no self-consistent N_mu in ({n0}, {}]; use a larger matrix or a larger mu",
        tail.len()
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum L2Flavor {
    /// Distance between any two admissible solutions.
    Pair,
    /// Distance of one admissible solution to the truth.
    Single,
    Tsvd,
    Tikhonov,
}

impl L2Flavor {
    fn factor(self) -> f64 {
        match self {
            L2Flavor::Pair => 1.0,
            L2Flavor::Single | L2Flavor::Tsvd => 0.5,
            L2Flavor::Tikhonov => 0.5 * (1.0 + SQRT_2),
        }
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

/// Real-valued quasi-optimal cutoff `(1/alpha) ln(E A V_mu / delta)`.
pub fn cutoff_real(delta: f64, e: f64, k: &AsymptoticConstants) -> f64 {
    (e * k.a * k.v_mu / delta).ln() / k.alpha
}

/// Whether the L2 bounds apply, i.e. `N(delta) > N_mu`.
pub fn l2_validity(delta: f64, e: f64, k: &AsymptoticConstants) -> bool {
    cutoff_real(delta, e, k) > k.n_mu as f64
}

/// The L2 bound formula without the validity check.
pub fn roi_bound_l2_value(delta: f64, e: f64, k: &AsymptoticConstants, flavor: L2Flavor) -> f64 {
    let (a, b) = (k.alpha, k.beta_mu);
    let first = 2.0 * delta * (a * k.n_mu as f64).exp() / k.a;
    let second = 2.0 * e * k.b_mu * (delta / (k.a * k.v_mu * e)).powf(b / a) * a
        / ((a - b) * (2.0 * b).exp_m1().sqrt());
    flavor.factor() * (first + second)
}

pub fn roi_bound_l2(delta: f64, e: f64, k: &AsymptoticConstants, flavor: L2Flavor) -> Result<f64> {
    check_positive("delta", delta)?;
    check_positive("E", e)?;
    if !l2_validity(delta, e, k) {
        return Err(Error::BoundNotApplicable {
            delta,
            reason: format!("N(delta) = {} <= N_mu = {}", cutoff_real(delta, e, k), k.n_mu),
        });
    }
    Ok(roi_bound_l2_value(delta, e, k, flavor))
}

/// `delta / kappa < A W_mu e^{-alpha N_mu}`.
pub fn tv_validity(delta: f64, kappa: f64, k: &AsymptoticConstants) -> bool {
    delta / kappa < tv_threshold(k)
}

pub fn tv_threshold(k: &AsymptoticConstants) -> f64 {
    k.a * k.w_mu * (-k.alpha * k.n_mu as f64).exp()
}

pub fn roi_bound_tv_value(delta: f64, kappa: f64, k: &AsymptoticConstants) -> f64 {
    let (a, b) = (k.alpha, k.beta_mu);
    let first = 2.0 * delta * (a * k.n_mu as f64).exp() / k.a;
    let second = 2.0 * k.c_tv / k.n_mu as f64
        * k.b_mu
        * kappa.powf((a - b) / a)
        * (delta / (k.a * k.w_mu)).powf(b / a)
        * a
        / ((a - b) * b.exp_m1());
    first + second
}

pub fn roi_bound_tv(delta: f64, kappa: f64, k: &AsymptoticConstants) -> Result<f64> {
    check_positive("delta", delta)?;
    check_positive("kappa", kappa)?;
    if !tv_validity(delta, kappa, k) {
        return Err(Error::BoundNotApplicable {
            delta,
            reason: format!("delta/kappa >= {:e}", tv_threshold(k)),
        });
    }
    Ok(roi_bound_tv_value(delta, kappa, k))
}

/// `(A c / (2 alpha)) e^{-(alpha + 3/2) N_0}`.
pub fn full_threshold(k: &AsymptoticConstants) -> f64 {
    k.a * k.c_tv / (2.0 * k.alpha) * (-(k.alpha + 1.5) * k.n0 as f64).exp()
}

pub fn full_validity(delta: f64, kappa: f64, k: &AsymptoticConstants) -> bool {
    delta / kappa < full_threshold(k)
}

/// `kappa C [ln(kappa/delta) + D]^{-1/2}` with `C = c (1/alpha + 2) (alpha + 3/2)^{1/2}`
/// and `D = ln(A c / (2 alpha))`. NaN when the bracket is not positive.
pub fn full_interval_bound_value(delta: f64, kappa: f64, k: &AsymptoticConstants) -> f64 {
    let c = k.c_tv * (1.0 / k.alpha + 2.0) * (k.alpha + 1.5).sqrt();
    let d = (k.a * k.c_tv / (2.0 * k.alpha)).ln();
    let bracket = (kappa / delta).ln() + d;
    if bracket > 0.0 {
        kappa * c / bracket.sqrt()
    } else {
        f64::NAN
    }
}

pub fn full_interval_bound(delta: f64, kappa: f64, k: &AsymptoticConstants) -> Result<f64> {
    check_positive("delta", delta)?;
    check_positive("kappa", kappa)?;
    if !full_validity(delta, kappa, k) {
        return Err(Error::BoundNotApplicable {
            delta,
            reason: format!("delta/kappa >= {:e}", full_threshold(k)),
        });
    }
    Ok(full_interval_bound_value(delta, kappa, k))
}
