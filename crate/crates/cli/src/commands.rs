use rayon::prelude::*;
use serde_json::{json, Value};

use ht_core::asymptotics::{roi_norm_model, sigma_model_pos};
use ht_core::bounds::{
    calibrate_constants, full_interval_bound_value, full_validity, l2_validity,
    roi_bound_l2_value, roi_bound_tv_value, tv_validity, AsymptoticConstants, L2Flavor,
};
use ht_core::geometry::{beta_mu_approx, beta_mu_exact, holder_exponent, GeometryConstants};
use ht_core::operator::{apply_forward, weighted_norm};
use ht_core::regularization::{
    add_noise, make_phantom, optimal_cutoff_l2, tikhonov_reconstruct, tsvd_reconstruct, NoisyData,
    ReconstructionResult,
};
use ht_core::spectral::{
    check_monotone, near_one_tail_fit, reconstruction_error, roi_norm, roi_norm_tail_fit,
    sigma_tail_fit, tail_index_map, write_spectrum_csv, TailFit,
};
use ht_core::{build_operator, compute_svd, DiscreteOperator, Geometry, RoiParam, SingularSystem};

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};
use crate::output::{prepare_dir, sci, write_json, Table};

pub const FIGURE1_FRACTIONS: [f64; 3] = [0.25, 0.1, 0.01];
const FIGURE1_POINTS: usize = 49;

fn operator_and_svd(cfg: &ExperimentConfig) -> CliResult<(DiscreteOperator, SingularSystem)> {
    let op = build_operator(&cfg.geometry(), cfg.step, cfg.shift)?;
    log::info!("operator {} x {}", op.rows(), op.cols());
    let start = std::time::Instant::now();
    let sys = compute_svd(&op, cfg.rank_tol)?;
    log::info!("svd: {} triples in {:.1?}", sys.len(), start.elapsed());
    if sys.is_empty() {
        return Err(CliError::Numerical(ht_core::Error::Decomposition(format!(
            "empty spectrum: rank_tol {} removes every singular value",
            cfg.rank_tol
        ))));
    }
    let tail = cfg.tail_len.min(sys.len());
    let sys = sys.with_tail_len(tail)?;
    Ok((op, sys))
}

fn fit_json(fit: &ht_core::Result<TailFit>) -> Value {
    match fit {
        Ok(f) => json!({
            "amplitude": f.amplitude,
            "rate": f.rate,
            "log_rms_residual": f.residual,
            "index_anchor": f.index_anchor,
        }),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

pub fn constants(cfg: &ExperimentConfig) -> CliResult<String> {
    let g = cfg.geometry();
    let gc = GeometryConstants::compute(&g)?;
    let mut table = Table::new(&[
        "mu",
        "k_minus",
        "k_plus",
        "alpha",
        "beta_mu_exact",
        "beta_mu_approx",
        "holder_exponent",
        "near_one_rate",
    ]);
    let mut report = format!(
        "K- = {:.12e}\nK+ = {:.12e}\nalpha = {:.12e}\n",
        gc.k_minus, gc.k_plus, gc.alpha
    );
    for mu in cfg.mus() {
        let exact = beta_mu_exact(&g, mu)?;
        let approx = beta_mu_approx(&g, mu.mu())?;
        let h = holder_exponent(&g, mu)?;
        table.row([
            sci(mu.mu()),
            sci(gc.k_minus),
            sci(gc.k_plus),
            sci(gc.alpha),
            sci(exact),
            sci(approx),
            sci(h),
            sci(gc.near_one_rate()),
        ]);
        report.push_str(&format!(
            "mu = {}: beta = {exact:.12e} (approx {approx:.12e}), holder exponent {h:.6}\n",
            mu.mu()
        ));
    }
    let dir = prepare_dir(&cfg.output_dir)?;
    table.write(&dir.join("constants.csv"))?;
    Ok(report)
}

pub fn svd_report(cfg: &ExperimentConfig) -> CliResult<String> {
    let (op, sys) = operator_and_svd(cfg)?;
    let g = cfg.geometry();
    let gc = GeometryConstants::compute(&g)?;
    let mus = cfg.mus();

    let mut csv = Vec::new();
    write_spectrum_csv(&sys, &mus, &mut csv)?;

    let tail = tail_index_map(&sys, sys.tail_len)?;
    let monotone: Vec<Value> = tail
        .iter()
        .map(|e| json!({ "n": e.n, "monotone": check_monotone(&sys, e.index) }))
        .collect();
    let mut roi_fits = serde_json::Map::new();
    for mu in &mus {
        let mut v = fit_json(&roi_norm_tail_fit(&sys, *mu));
        v["beta_mu"] = json!(gc.beta_mu(*mu)?);
        roi_fits.insert(format!("{}", mu.mu()), v);
    }
    let below_097 = sys.count_below(0.97);
    let below_001 = sys.count_below(0.01);
    let sigma_fit = sigma_tail_fit(&sys);
    let summary = json!({
        "rows": op.rows(),
        "cols": op.cols(),
        "retained": sys.len(),
        "sigma_max": sys.triples[0].sigma,
        "count_below_0.97": below_097,
        "count_below_0.01": below_001,
        "alpha": gc.alpha,
        "near_one_rate_model": gc.near_one_rate(),
        "sigma_tail_fit": fit_json(&sigma_fit),
        "near_one_fit": fit_json(&near_one_tail_fit(&sys, cfg.head_len)),
        "roi_norm_fits": roi_fits,
        "tail_monotone": monotone,
        "max_residual": sys.max_residual(&op),
        "gram_deviation": sys.gram_deviation(),
        "reconstruction_error": reconstruction_error(&op, &sys),
    });

    let dir = prepare_dir(&cfg.output_dir)?;
    let path = dir.join("spectrum.csv");
    std::fs::write(&path, &csv).map_err(CliError::io(&path))?;
    write_json(&dir.join("svd_summary.json"), &summary)?;

    let mut report = format!(
        "{} x {} operator, {} singular values retained\n{} below 0.97, {} below 0.01\n",
        op.rows(),
        op.cols(),
        sys.len(),
        below_097,
        below_001
    );
    match sigma_fit {
        Ok(f) => report.push_str(&format!(
            "tail fit: sigma_n ~ {:.4} exp(-{:.4} n), alpha = {:.4}\n",
            f.amplitude, f.rate, gc.alpha
        )),
        Err(e) => report.push_str(&format!("tail fit unavailable: {e}\n")),
    }
    Ok(report)
}

pub fn figure1(cfg: &ExperimentConfig) -> CliResult<String> {
    // Fixed a1 = -1, a2 = 0, a4 = 1; only the output directory comes from the config.
    let a3s: Vec<f64> = (1..=FIGURE1_POINTS).map(|i| i as f64 / (FIGURE1_POINTS + 1) as f64).collect();
    let rows: Vec<Vec<(f64, Result<f64, String>)>> = a3s
        .par_iter()
        .map(|&a3| {
            FIGURE1_FRACTIONS
                .iter()
                .map(|&frac| {
                    let r = Geometry::new(-1.0, 0.0, a3, 1.0)
                        .and_then(|g| holder_exponent(&g, RoiParam::new(&g, frac * a3)?))
                        .map_err(|e| e.to_string());
                    (frac, r)
                })
                .collect()
        })
        .collect();

    let mut table = Table::new(&["a3", "mu_fraction", "holder_exponent", "status"]);
    let mut warnings = 0;
    for (a3, row) in a3s.iter().zip(rows) {
        for (frac, r) in row {
            match r {
                Ok(h) => table.row([sci(*a3), sci(frac), sci(h), "ok".to_string()]),
                Err(e) => {
                    warnings += 1;
                    log::warn!("a3 = {a3}, mu fraction {frac}: {e}");
                    table.row([sci(*a3), sci(frac), "NaN".into(), format!("\"{}\"", e.replace('"', "'"))]);
                }
            }
        }
    }
    let dir = prepare_dir(&cfg.output_dir)?;
    table.write(&dir.join("figure1.csv"))?;
    Ok(format!(
        "{} points, {warnings} warning rows\n",
        a3s.len() * FIGURE1_FRACTIONS.len()
    ))
}

pub fn figure2(cfg: &ExperimentConfig) -> CliResult<String> {
    let (_op, sys) = operator_and_svd(cfg)?;
    let g = cfg.geometry();
    let gc = GeometryConstants::compute(&g)?;
    let mus = cfg.mus();
    let tail = tail_index_map(&sys, sys.tail_len)?;

    let mut sigma_table = Table::new(&["n", "log_sigma", "log_model"]);
    let mut header = String::from("n");
    for mu in &mus {
        header.push_str(&format!(",log_roi_norm_mu{0},log_model_mu{0}", mu.mu()));
    }
    let mut roi_table = Table::with_header(header);
    for e in &tail {
        sigma_table.row([
            e.n.to_string(),
            sci(sys.triples[e.index].sigma.ln()),
            sci(sigma_model_pos(&g, e.n)?.ln()),
        ]);
        let mut cells = vec![e.n.to_string()];
        for mu in &mus {
            cells.push(sci(roi_norm(&sys, e.index, *mu)?.ln()));
            cells.push(sci(roi_norm_model(&g, *mu, e.n)?.ln()));
        }
        roi_table.row(cells);
    }

    let sigma_fit = sigma_tail_fit(&sys)?;
    let mut report = format!(
        "sigma tail rate {:.5} vs alpha {:.5} (rel {:.2e})\n",
        sigma_fit.rate,
        gc.alpha,
        (sigma_fit.rate - gc.alpha).abs() / gc.alpha
    );
    let mut roi_fits = serde_json::Map::new();
    for mu in &mus {
        let fit = roi_norm_tail_fit(&sys, *mu)?;
        let beta = gc.beta_mu(*mu)?;
        report.push_str(&format!(
            "mu = {}: ROI-norm rate {:.5} vs beta {beta:.5} (rel {:.2e})\n",
            mu.mu(),
            fit.rate,
            (fit.rate - beta).abs() / beta
        ));
        roi_fits.insert(format!("{}", mu.mu()), json!({ "rate": fit.rate, "beta_mu": beta }));
    }

    let dir = prepare_dir(&cfg.output_dir)?;
    sigma_table.write(&dir.join("figure2_sigma.csv"))?;
    roi_table.write(&dir.join("figure2_roi.csv"))?;
    write_json(
        &dir.join("figure2_fits.json"),
        &json!({ "sigma_rate": sigma_fit.rate, "alpha": gc.alpha, "roi_norm": roi_fits }),
    )?;
    Ok(report)
}

/// Per-mu constants: supplied in the config, or calibrated from the spectrum.
fn constants_for(
    cfg: &ExperimentConfig,
    sys: Option<&SingularSystem>,
    mu: RoiParam,
) -> CliResult<AsymptoticConstants> {
    match (cfg.n0, cfg.n_mu, sys) {
        (Some(n0), Some(n_mu), _) => {
            let gc = GeometryConstants::compute(&cfg.geometry())?;
            Ok(AsymptoticConstants::new(cfg.a, gc.alpha, gc.beta_mu(mu)?, n0, n_mu, cfg.c_tv)?)
        }
        (_, _, Some(sys)) => Ok(calibrate_constants(sys, mu, cfg.c_tv, cfg.a)?),
        _ => unreachable!("constants need either N_0/N_mu or a spectrum"),
    }
}

pub fn bounds(cfg: &ExperimentConfig) -> CliResult<String> {
    let svd = if cfg.n0.is_some() { None } else { Some(operator_and_svd(cfg)?) };
    let sys = svd.as_ref().map(|s| &s.1);
    let mus = cfg.mus();
    let ks: Vec<AsymptoticConstants> =
        mus.iter().map(|&mu| constants_for(cfg, sys, mu)).collect::<CliResult<_>>()?;

    let mut report = String::new();
    let mut tables = Vec::new();
    for (mu, k) in mus.iter().zip(&ks) {
        let mut table = Table::new(&[
            "delta",
            "bound_pair",
            "bound_tsvd",
            "bound_tikhonov",
            "bound_tv",
            "bound_full",
            "valid_l2",
            "valid_tv",
            "valid_full",
        ]);
        let mut invalid = 0;
        for &d in &cfg.delta_list {
            let (vl2, vtv, vfull) =
                (l2_validity(d, cfg.e, k), tv_validity(d, cfg.kappa, k), full_validity(d, cfg.kappa, k));
            invalid += usize::from(!(vl2 && vtv && vfull));
            table.row([
                sci(d),
                sci(roi_bound_l2_value(d, cfg.e, k, L2Flavor::Pair)),
                sci(roi_bound_l2_value(d, cfg.e, k, L2Flavor::Tsvd)),
                sci(roi_bound_l2_value(d, cfg.e, k, L2Flavor::Tikhonov)),
                sci(roi_bound_tv_value(d, cfg.kappa, k)),
                sci(full_interval_bound_value(d, cfg.kappa, k)),
                vl2.to_string(),
                vtv.to_string(),
                vfull.to_string(),
            ]);
        }
        report.push_str(&format!(
            "mu = {}: N_0 = {}, N_mu = {}, beta/alpha = {:.5}, {invalid} of {} rows with a failed validity condition\n",
            mu.mu(),
            k.n0,
            k.n_mu,
            k.holder_exponent(),
            cfg.delta_list.len()
        ));
        tables.push((format!("bounds_mu{}.csv", mu.mu()), table));
    }
    let dir = prepare_dir(&cfg.output_dir)?;
    for (name, t) in &tables {
        t.write(&dir.join(name))?;
    }
    Ok(report)
}

struct RunOutput {
    stem: String,
    result: ReconstructionResult,
    mu: Option<f64>,
    delta: f64,
    seed: u64,
}

fn recon_csv(sys: &SingularSystem, truth: &[f64], r: &ReconstructionResult) -> Table {
    let mut t = Table::new(&["y", "f_true", "f_recon"]);
    for (k, (a, b)) in truth.iter().zip(&r.f).enumerate() {
        t.row([sci(sys.object_grid.point(k)), sci(*a), sci(*b)]);
    }
    t
}

pub fn reconstruct(cfg: &ExperimentConfig) -> CliResult<String> {
    let (op, sys) = operator_and_svd(cfg)?;
    let g = cfg.geometry();
    let truth = make_phantom(&cfg.phantom(), &g, &op.object_grid)?;
    let truth_norm = weighted_norm(&truth, sys.step);
    if truth_norm > cfg.e {
        log::warn!("phantom norm {truth_norm:.4e} exceeds the prior bound E = {}", cfg.e);
    }
    let g_ex = apply_forward(&op, &truth)?;
    let mus = cfg.mus();
    let ks: Vec<AsymptoticConstants> =
        mus.iter().map(|&mu| constants_for(cfg, Some(&sys), mu)).collect::<CliResult<_>>()?;

    let noisy: Vec<NoisyData> = cfg
        .delta_list
        .iter()
        .enumerate()
        .map(|(i, &d)| add_noise(&g_ex, sys.step, d, cfg.seed + i as u64))
        .collect::<Result<_, _>>()?;

    // Tikhonov does not depend on mu; TSVD does through N(delta).
    let tikhonov: Vec<Option<ReconstructionResult>> = noisy
        .par_iter()
        .map(|nd| {
            if nd.delta > 0.0 {
                tikhonov_reconstruct(&sys, &nd.g, nd.delta * nd.delta / (cfg.e * cfg.e)).map(Some)
            } else {
                Ok(None)
            }
        })
        .collect::<Result<_, _>>()?;
    let max_n = sys.asymptotic_index(sys.len() - 1).max(0) as u32;
    let tsvd: Vec<Vec<(ReconstructionResult, bool)>> = ks
        .par_iter()
        .map(|k| {
            noisy
                .iter()
                .map(|nd| {
                    let (n, valid) = if nd.delta > 0.0 {
                        let c = optimal_cutoff_l2(nd.delta, cfg.e, k)?;
                        (c.n, c.valid)
                    } else {
                        (max_n, false)
                    };
                    Ok((tsvd_reconstruct(&sys, &nd.g, n, 0.0)?, valid))
                })
                .collect::<ht_core::Result<_>>()
        })
        .collect::<Result<_, _>>()?;

    let mut summary = Table::new(&[
        "mu",
        "delta",
        "method",
        "parameter",
        "roi_error",
        "bound",
        "bound_pair",
        "valid_l2",
        "within_bound",
    ]);
    let mut runs: Vec<RunOutput> = Vec::new();
    let mut violations = 0;
    let mut row_count = 0;
    for (i, nd) in noisy.iter().enumerate() {
        if let Some(r) = &tikhonov[i] {
            runs.push(RunOutput {
                stem: format!("recon_delta{i}_tikhonov"),
                result: r.clone(),
                mu: None,
                delta: nd.delta,
                seed: nd.seed,
            });
        } else {
            log::warn!("delta = 0: Tikhonov needs eta > 0, row skipped");
        }
    }
    for (mi, (mu, k)) in mus.iter().zip(&ks).enumerate() {
        for (i, nd) in noisy.iter().enumerate() {
            let d = nd.delta;
            let pair = roi_bound_l2_value(d, cfg.e, k, L2Flavor::Pair);
            let (r, _) = &tsvd[mi][i];
            let r = r.clone().with_roi_error(&truth, &sys, *mu)?;
            let mut rows = vec![(r, L2Flavor::Tsvd)];
            if let Some(t) = &tikhonov[i] {
                rows.push((t.clone().with_roi_error(&truth, &sys, *mu)?, L2Flavor::Tikhonov));
            }
            for (r, flavor) in rows {
                let err = r.roi_error.expect("filled above");
                let bound = roi_bound_l2_value(d, cfg.e, k, flavor);
                let within = err <= bound;
                violations += usize::from(!within);
                row_count += 1;
                let param = match (r.cutoff, r.eta) {
                    (Some(n), _) => n.to_string(),
                    (_, Some(eta)) => sci(eta),
                    _ => String::new(),
                };
                summary.row([
                    sci(mu.mu()),
                    sci(d),
                    r.method.to_string(),
                    param,
                    sci(err),
                    sci(bound),
                    sci(pair),
                    l2_validity(d, cfg.e, k).to_string(),
                    within.to_string(),
                ]);
                if flavor == L2Flavor::Tsvd {
                    runs.push(RunOutput {
                        stem: format!("recon_mu{}_delta{i}_tsvd", mu.mu()),
                        result: r,
                        mu: Some(mu.mu()),
                        delta: d,
                        seed: nd.seed,
                    });
                }
            }
        }
    }

    let dir = prepare_dir(&cfg.output_dir)?;
    for run in &runs {
        recon_csv(&sys, &truth, &run.result).write(&dir.join(format!("{}.csv", run.stem)))?;
        let r = &run.result;
        let meta = json!({
            "method": r.method.to_string(),
            "delta": run.delta,
            "E": cfg.e,
            "cutoff": r.cutoff,
            "eta": r.eta,
            "seed": run.seed,
            "roi_error": r.roi_error,
            "mu": run.mu,
        });
        write_json(&dir.join(format!("{}.json", run.stem)), &meta)?;
    }
    summary.write(&dir.join("reconstruct_summary.csv"))?;
    Ok(format!(
        "{} reconstructions, {} summary rows, {violations} rows above their bound\n",
        runs.len(),
        row_count
    ))
}

pub struct Check {
    pub name: String,
    pub value: f64,
    pub pass: bool,
}

pub fn validate(cfg: &ExperimentConfig) -> CliResult<(String, bool)> {
    let mut checks = Vec::new();
    let mut push = |name: String, value: f64, pass: bool| checks.push(Check { name, value, pass });

    let g = cfg.geometry();
    let gc = GeometryConstants::compute(&g)?;
    push("alpha > 0".into(), gc.alpha, gc.alpha > 0.0);
    for mu in cfg.mus() {
        let beta = beta_mu_exact(&g, mu)?;
        push(format!("0 < beta/alpha < 1 at mu = {}", mu.mu()), beta / gc.alpha, beta > 0.0 && beta < gc.alpha);
    }

    let (op, sys) = operator_and_svd(cfg)?;
    let res = sys.max_residual(&op);
    push("max residual <= 1e-10".into(), res, res <= 1e-10);
    let gram = sys.gram_deviation();
    push("gram deviation <= 1e-10".into(), gram, gram <= 1e-10);
    let rec = reconstruction_error(&op, &sys);
    push("relative reconstruction error <= 1e-10".into(), rec, rec <= 1e-10);
    let sigmas = sys.sigmas();
    let ordered = sigmas.windows(2).all(|w| w[0] >= w[1]);
    push("singular values non-increasing".into(), f64::from(u8::from(ordered)), ordered);
    push("sigma_max <= 1.05".into(), sigmas[0], sigmas[0] <= 1.05);
    let positive = sigmas.iter().all(|s| *s > 0.0);
    push("singular values positive".into(), sigmas[sigmas.len() - 1], positive);

    let mut table = Table::new(&["check", "value", "pass"]);
    let mut report = String::new();
    let mut all = true;
    for c in &checks {
        all &= c.pass;
        table.row([format!("\"{}\"", c.name), sci(c.value), c.pass.to_string()]);
        report.push_str(&format!("{} {}: {:.3e}\n", if c.pass { "PASS" } else { "FAIL" }, c.name, c.value));
    }
    let dir = prepare_dir(&cfg.output_dir)?;
    table.write(&dir.join("validate.csv"))?;
    Ok((report, all))
}
