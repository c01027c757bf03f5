//! Experiment drivers: build core inputs from the resolved config, run, and
//! collect CSV tables plus a JSON summary.

use anyhow::{anyhow, Result};
use serde_json::json;

use randwave::averaging::{averaging_experiment, chaos_lp_growth, strichartz_probe};
use randwave::basis::Basis;
use randwave::deviation::{
    default_lambda_grid, khinchin_alpha_fit, lp_moment_check, CoefficientVector, EstimateMode,
    ENUMERATION_CAP,
};
use randwave::existence::{local_existence_experiment, LambdaRule};
use randwave::inflation::{hs_lower_bound_default, norm_inflation_experiment, InflationConfig};
use randwave::norms::{bessel_power, sobolev_norm, sogge_sweep};
use randwave::picard::{picard_solve, PicardConfig};
use randwave::random::{divergent_profile, no_regularization_experiment, convergent_profile};
use randwave::reference::{reference_solve, CubicPlans};
use randwave::ode::dense_profile;
use randwave::propagator::AdmissiblePair;
use randwave::{RandomFamily, SpectralField, StatePair};

use crate::config::ExperimentConfig;
use crate::output::{csv_file, fmt_f64, plot_file, OutputFile};

pub struct RunResult {
    pub summary: serde_json::Value,
    pub files: Vec<OutputFile>,
}

/// Certifies the moment conditions the experiments rely on; built-ins and
/// centered tables all pass, so this only decorates the family.
fn certify(mut family: RandomFamily) -> RandomFamily {
    let grid: Vec<f64> = (-40..=40).map(|i| f64::from(i) / 10.0).collect();
    family.moment_check(4, None);
    family.moment_check(6, None);
    family.exp_moment_check(&grid, 0.5);
    family
}

/// Data pair for flow experiments: the divergent profile at regularity `s`,
/// normalized so `||f1||_{H^s} = amplitude`, with `f2` one Bessel power up
/// (so `||f2||_{H^(s-1)} = ||f1||_{H^s}`).
fn profile_pair(
    basis: &std::sync::Arc<Basis>,
    s: f64,
    amplitude: f64,
) -> StatePair<f64> {
    let mut f1: SpectralField<f64> = divergent_profile(basis.clone(), s, 0.5);
    let norm = sobolev_norm(&f1, s);
    for c in f1.coeffs.iter_mut() {
        *c *= amplitude / norm;
    }
    let f2 = bessel_power(&f1, 1.0);
    StatePair { u: f1, ut: f2 }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<RunResult> {
    match config.experiment.as_str() {
        "sogge_ratio" => run_sogge(config),
        "deviation" => run_deviation(config),
        "khinchin" => run_khinchin(config),
        "averaging" => run_averaging(config),
        "chaos" => run_chaos(config),
        "strichartz_probe" => run_strichartz(config),
        "local_existence" => run_existence(config),
        "no_regularization" => run_no_regularization(config),
        "norm_inflation" => run_inflation(config),
        "hs_lower_bound" => run_hs_lower_bound(config),
        "picard_single" => run_picard_single(config),
        "reference_convergence" => run_reference_convergence(config),
        other => Err(anyhow!("unknown experiment `{other}`")),
    }
}

fn run_sogge(config: &ExperimentConfig) -> Result<RunResult> {
    let geometry = config.build_geometry()?;
    let n = config.params.n.unwrap();
    let p = config.params.p.unwrap_or(4.0);
    let exponent = config.params.exponent.unwrap_or(0.125);
    let basis = Basis::new(geometry, n)?;
    let ratios = sogge_sweep(&basis, p, exponent)?;
    let rows = basis
        .modes
        .iter()
        .zip(&ratios)
        .map(|(m, &r)| {
            vec![
                m.rank.to_string(),
                fmt_f64(m.eigenvalue_sq),
                fmt_f64(r * (1.0 + m.eigenvalue_sq).powf(exponent)),
                fmt_f64(r),
            ]
        })
        .collect();
    let head = ratios.iter().take(20).cloned().fold(0.0f64, f64::max);
    let all = ratios.iter().cloned().fold(0.0f64, f64::max);
    let files = vec![
        csv_file("sogge.csv", &["rank", "lambda_sq", "lp_norm", "ratio"], rows),
        plot_file(
            "plot_sogge.csv",
            "lambda_sq",
            "eigenfunction_ratio_prop_2_4",
            &basis
                .modes
                .iter()
                .zip(&ratios)
                .map(|(m, &r)| (m.eigenvalue_sq, r))
                .collect::<Vec<_>>(),
        ),
    ];
    Ok(RunResult {
        summary: json!({
            "p": p,
            "exponent": exponent,
            "modes": basis.len(),
            "max_ratio": all,
            "max_ratio_first_20": head,
        }),
        files,
    })
}

fn run_deviation(config: &ExperimentConfig) -> Result<RunResult> {
    let family = certify(config.build_family()?);
    let c = CoefficientVector::new(config.params.c.clone().unwrap());
    let trials = config.require_trials()?;
    let grid = config
        .params
        .lambda_grid
        .clone()
        .unwrap_or_else(|| default_lambda_grid(&c));
    let fit = khinchin_alpha_fit(&c, &family, &grid, trials, config.seed)?;
    let norm_sq = c.norm_sq;
    let rows = fit
        .tails
        .iter()
        .map(|t| {
            let bound = 2.0 * (-fit.alpha * t.lambda * t.lambda / norm_sq).exp();
            vec![
                fmt_f64(t.lambda),
                fmt_f64(t.p_hat),
                fmt_f64(t.ci_low),
                fmt_f64(t.ci_high),
                fmt_f64(bound),
            ]
        })
        .collect();
    let points: Vec<(f64, f64)> = fit.tails.iter().map(|t| (t.lambda, t.p_hat)).collect();
    let files = vec![
        csv_file(
            "tails.csv",
            &["lambda", "p_hat", "ci_low", "ci_high", "bound_value"],
            rows,
        ),
        plot_file("plot_deviation.csv", "lambda", "tail_p_hat_lemma_3_1", &points),
    ];
    Ok(RunResult {
        summary: json!({
            "alpha": fit.alpha,
            "binding_lambda": fit.binding_lambda,
            "is_lower_bound": fit.is_lower_bound,
            "norm_sq": norm_sq,
            "trials": trials,
        }),
        files,
    })
}

fn run_khinchin(config: &ExperimentConfig) -> Result<RunResult> {
    let family = certify(config.build_family()?);
    let c = CoefficientVector::new(config.params.c.clone().unwrap());
    let trials = config.require_trials()?;
    let p_grid = config
        .params
        .p_grid
        .clone()
        .unwrap_or_else(|| vec![2.0, 4.0, 6.0, 8.0, 12.0, 16.0]);
    let support = matches!(
        family.kind,
        randwave::FamilyKind::Bernoulli | randwave::FamilyKind::CustomTable { .. }
    );
    let exact_ok = support && (c.c.len() as u32) <= 20 && 2u64.pow(c.c.len() as u32) <= ENUMERATION_CAP;
    let mut rows = Vec::new();
    let mut max_ratio = 0.0f64;
    for &p in &p_grid {
        let mode = if exact_ok {
            EstimateMode::Exact
        } else {
            EstimateMode::MonteCarlo {
                trials,
                seed: config.seed,
            }
        };
        let rep = lp_moment_check(&c, &family, p, mode)?;
        max_ratio = max_ratio.max(rep.ratio_to_sqrt_p);
        rows.push(vec![
            fmt_f64(rep.p),
            fmt_f64(rep.lp_norm),
            fmt_f64(rep.ratio_to_sqrt_p),
            rep.exact.to_string(),
        ]);
    }
    let points: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r[0].parse().unwrap(), r[2].parse().unwrap()))
        .collect();
    Ok(RunResult {
        summary: json!({ "max_ratio_to_sqrt_p": max_ratio, "exact": exact_ok }),
        files: vec![
            csv_file("moments.csv", &["p", "lp_norm", "ratio_to_sqrt_p", "exact"], rows),
            plot_file(
                "plot_khinchin.csv",
                "p",
                "lp_ratio_to_sqrt_p_lemma_3_1",
                &points,
            ),
        ],
    })
}

fn run_averaging(config: &ExperimentConfig) -> Result<RunResult> {
    let geometry = config.build_geometry()?;
    let family = certify(config.build_family()?);
    let s = config.params.s.unwrap();
    let t_final = config.params.t_final.unwrap();
    let trials = config.require_trials()?;
    let n = config.params.n.unwrap();
    let boundary = config.params.boundary.unwrap_or(false);
    let amplitude = config.params.amplitude.unwrap_or(1.0);
    let basis = Basis::new(geometry, n)?;
    let f = profile_pair(&basis, s, amplitude);
    let report = averaging_experiment(
        &f,
        &family,
        s,
        t_final,
        trials,
        config.seed,
        boundary,
        config.params.lambda_grid.as_deref(),
    )?;
    let trial_rows = report
        .per_trial
        .iter()
        .enumerate()
        .map(|(i, &v)| vec![i.to_string(), fmt_f64(v)])
        .collect();
    let tail_rows = report
        .tail_rows
        .iter()
        .map(|r| {
            vec![
                fmt_f64(r.lambda),
                fmt_f64(r.p_hat),
                fmt_f64(r.ci_low),
                fmt_f64(r.ci_high),
                fmt_f64(r.chebyshev_bound),
                fmt_f64(r.exp_fit),
            ]
        })
        .collect();
    let points: Vec<(f64, f64)> = report
        .tail_rows
        .iter()
        .map(|r| (r.lambda, r.p_hat))
        .collect();
    Ok(RunResult {
        summary: json!({
            "weight_exponent": report.weight_exponent,
            "norm_power": report.norm_power,
            "moment_mean": report.moment_mean,
            "exp_slope": report.exp_slope,
            "exp_r2": report.exp_r2,
            "poly_r2": report.poly_r2,
        }),
        files: vec![
            csv_file("trials.csv", &["trial_id", "norm_value"], trial_rows),
            csv_file(
                "tails.csv",
                &["lambda", "p_hat", "ci_low", "ci_high", "chebyshev_bound", "exp_fit"],
                tail_rows,
            ),
            plot_file("plot_averaging.csv", "lambda", "tail_p_hat_prop_4_1", &points),
        ],
    })
}

fn run_chaos(config: &ExperimentConfig) -> Result<RunResult> {
    let geometry = config.build_geometry()?;
    let family = certify(config.build_family()?);
    let s = config.params.s.unwrap();
    let trials = config.require_trials()?;
    let n = config.params.n.unwrap();
    let amplitude = config.params.amplitude.unwrap_or(1.0);
    let p_grid = config
        .params
        .p_grid
        .clone()
        .unwrap_or_else(|| vec![4.0, 6.0, 8.0, 12.0, 16.0]);
    let basis = Basis::new(geometry, n)?;
    let f = profile_pair(&basis, s, amplitude);
    let rows = chaos_lp_growth(&f, &family, s, &p_grid, trials, config.seed)?;
    let table = rows
        .iter()
        .map(|r| vec![fmt_f64(r.p), fmt_f64(r.lp_omega), fmt_f64(r.ratio)])
        .collect();
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.p, r.ratio)).collect();
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    Ok(RunResult {
        summary: json!({
            "min_ratio": ratios.iter().cloned().fold(f64::INFINITY, f64::min),
            "max_ratio": ratios.iter().cloned().fold(0.0f64, f64::max),
        }),
        files: vec![
            csv_file("growth.csv", &["p", "lp_omega", "ratio_to_sqrt_p"], table),
            plot_file("plot_chaos.csv", "p", "chaos_ratio_prop_4_3", &points),
        ],
    })
}

fn run_strichartz(config: &ExperimentConfig) -> Result<RunResult> {
    let geometry = config.build_geometry()?;
    let s = config.params.s.unwrap();
    let p = config.params.p.unwrap();
    let q = config.params.q.unwrap();
    let boundary = config.params.boundary.unwrap_or(false);
    let trials = config.require_trials()?;
    let n_grid = config.params.n_grid.clone().unwrap();
    let t_final = config.params.t_final.unwrap_or(1.0);
    let pair = AdmissiblePair::new(p, q, s, boundary)?;
    let rows = strichartz_probe(&geometry, s, &pair, &n_grid, trials, t_final, config.seed)?;
    let table = rows
        .iter()
        .map(|r| {
            vec![
                r.n_requested.to_string(),
                r.n_modes.to_string(),
                fmt_f64(r.lambda_max),
                fmt_f64(r.max_ratio_random),
                fmt_f64(r.max_ratio_single),
            ]
        })
        .collect();
    let points: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r.n_modes as f64, r.max_ratio_random))
        .collect();
    Ok(RunResult {
        summary: json!({
            "p": p, "q": q, "boundary": boundary,
            "max_ratio": rows.iter().map(|r| r.max_ratio_random).fold(0.0f64, f64::max),
        }),
        files: vec![
            csv_file(
                "probe.csv",
                &["n_requested", "n_modes", "lambda_max", "max_ratio_random", "max_ratio_single"],
                table,
            ),
            plot_file("plot_strichartz.csv", "n_modes", "flow_ratio_prop_2_2", &points),
        ],
    })
}

fn run_existence(config: &ExperimentConfig) -> Result<RunResult> {
    let geometry = config.build_geometry()?;
    let family = certify(config.build_family()?);
    let s = config.params.s.unwrap();
    let t_grid = config.params.t_grid.clone().unwrap();
    let trials = config.require_trials()?;
    let n = config.params.n.unwrap();
    let amplitude = config.params.amplitude.unwrap_or(1.0);
    let rule = match config.params.rule.as_deref() {
        None | Some("picard_success") => LambdaRule::PicardSuccess,
        Some("threshold") => LambdaRule::Threshold {
            eps: config.params.eps.unwrap_or(1.0),
            delta: config.params.delta.unwrap_or(0.25),
        },
        Some(other) => return Err(anyhow!("unknown rule `{other}`")),
    };
    let basis = Basis::new(geometry, n)?;
    let f = profile_pair(&basis, s, amplitude);
    let report = local_existence_experiment(&f, &family, s, &t_grid, trials, rule, config.seed)?;
    let rows = report
        .rows
        .iter()
        .map(|r| {
            vec![
                fmt_f64(r.t_horizon),
                r.trials.to_string(),
                r.successes.to_string(),
                fmt_f64(r.fraction),
                fmt_f64(report.slope_estimate),
            ]
        })
        .collect();
    let points: Vec<(f64, f64)> = report
        .rows
        .iter()
        .map(|r| (r.t_horizon, r.fraction))
        .collect();
    Ok(RunResult {
        summary: json!({
            "slope_estimate": report.slope_estimate,
            "fractions": report.rows.iter().map(|r| r.fraction).collect::<Vec<_>>(),
        }),
        files: vec![
            csv_file(
                "existence.csv",
                &["t_horizon", "trials", "successes", "fraction", "slope_estimate"],
                rows,
            ),
            plot_file(
                "plot_existence.csv",
                "t_horizon",
                "success_fraction_thm_1",
                &points,
            ),
        ],
    })
}

fn run_no_regularization(config: &ExperimentConfig) -> Result<RunResult> {
    let geometry = config.build_geometry()?;
    let family = certify(config.build_family()?);
    let s = config.params.s.unwrap();
    let epsilon = config.params.epsilon.unwrap();
    let n = config.params.n.unwrap();
    let truncations = config.params.truncations.clone().unwrap();
    let trials = config.require_trials()?;
    let control = config.params.control.unwrap_or(false);
    let basis = Basis::new(geometry, n)?;
    let f: SpectralField<f64> = if control {
        convergent_profile(basis, s, epsilon)
    } else {
        divergent_profile(basis, s, epsilon)
    };
    let table =
        no_regularization_experiment(&f, s, epsilon, &family, &truncations, trials, config.seed)?;
    let rows = table
        .rows
        .iter()
        .map(|r| {
            vec![
                r.trial_id.to_string(),
                r.truncation.to_string(),
                fmt_f64(r.partial_sum),
            ]
        })
        .collect();
    let points: Vec<(f64, f64)> = table
        .truncations
        .iter()
        .zip(&table.min_over_trials)
        .map(|(&m, &v)| (m as f64, v))
        .collect();
    let growth = table.min_over_trials.last().unwrap()
        / table.min_over_trials.first().unwrap().max(1e-300);
    Ok(RunResult {
        summary: json!({
            "control": control,
            "min_over_trials": table.min_over_trials,
            "growth_factor": growth,
        }),
        files: vec![
            csv_file("growth.csv", &["trial_id", "truncation", "partial_sum"], rows),
            plot_file(
                "plot_no_regularization.csv",
                "truncation",
                "min_partial_sum_lemma_b_1",
                &points,
            ),
        ],
    })
}

fn run_inflation(config: &ExperimentConfig) -> Result<RunResult> {
    let geometry = config.build_geometry()?;
    let s = config.params.s.unwrap();
    let n_schedule = config.params.n_schedule.clone().unwrap();
    let mut icfg = InflationConfig::with_default_deltas(s, n_schedule);
    if let Some(d1) = config.params.delta1 {
        icfg.delta1 = d1;
    }
    if let Some(d2) = config.params.delta2 {
        icfg.delta2 = d2;
    }
    if let Some(m) = config.params.max_modes {
        icfg.max_modes = m;
    }
    let report = norm_inflation_experiment(&geometry, &icfg)?;
    let rows = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                r.resolved.to_string(),
                fmt_f64(r.hs_initial),
                fmt_f64(r.hs_final),
                fmt_f64(r.hs_vn),
                fmt_f64(r.en_discrepancy),
                fmt_f64(r.energy_drift),
                r.required_rank.to_string(),
            ]
        })
        .collect();
    let points: Vec<(f64, f64)> = report
        .rows
        .iter()
        .filter(|r| r.resolved)
        .map(|r| (f64::from(r.n), r.hs_final))
        .collect();
    Ok(RunResult {
        summary: json!({
            "vn_log_slope": report.vn_log_slope,
            "predicted_slope": report.predicted_slope,
            "delta1": icfg.delta1,
            "delta2": icfg.delta2,
        }),
        files: vec![
            csv_file(
                "inflation.csv",
                &["n", "resolved", "hs_initial", "hs_final", "hs_vn", "en_discrepancy", "energy_drift", "required_rank"],
                rows,
            ),
            plot_file(
                "plot_inflation.csv",
                "n",
                "hs_norm_at_tn_prop_a_1",
                &points,
            ),
        ],
    })
}

fn run_hs_lower_bound(config: &ExperimentConfig) -> Result<RunResult> {
    let geometry = config.build_geometry()?;
    let s = config.params.s.unwrap();
    let lambda_grid = config.params.lambda_grid.clone().unwrap();
    let rows = hs_lower_bound_default(&geometry, s, &lambda_grid)?;
    let table = rows
        .iter()
        .map(|r| vec![fmt_f64(r.lambda), fmt_f64(r.hs_norm), fmt_f64(r.ratio)])
        .collect();
    let upper = &rows[rows.len() / 2..];
    let min_upper = upper.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.lambda, r.ratio)).collect();
    Ok(RunResult {
        summary: json!({ "min_ratio_upper_half": min_upper }),
        files: vec![
            csv_file("sweep.csv", &["lambda", "hs_norm", "ratio"], table),
            plot_file(
                "plot_hs_lower_bound.csv",
                "lambda",
                "hs_ratio_lemma_a_4",
                &points,
            ),
        ],
    })
}

fn run_picard_single(config: &ExperimentConfig) -> Result<RunResult> {
    let geometry = config.build_geometry()?;
    let s = config.params.s.unwrap();
    let t_final = config.params.t_final.unwrap();
    let n = config.params.n.unwrap();
    let amplitude = config.params.amplitude.unwrap_or(0.1);
    let basis = Basis::new(geometry, n)?;
    let mut f = profile_pair(&basis, s, amplitude);
    if config.family.is_some() {
        let family = certify(config.build_family()?);
        let real = randwave::random::sample_realization(&family, config.seed, 0, basis.len());
        let (u, ut) = randwave::random::randomize(&f.u, &f.ut, &real)?;
        f = StatePair { u, ut };
    }
    let mut pcfg = PicardConfig::for_regularity(s, t_final, basis.max_eigenvalue());
    if let Some(steps) = config.params.steps {
        pcfg.steps = steps;
    }
    if let Some(tol) = config.params.tol {
        pcfg.tol = tol;
    }
    if let Some(mi) = config.params.max_iter {
        pcfg.max_iter = mi;
    }
    let sol = picard_solve(&f, &pcfg)?;
    let rows = sol
        .report
        .contraction_ratios
        .iter()
        .enumerate()
        .map(|(i, &r)| vec![(i + 2).to_string(), fmt_f64(r)])
        .collect();
    let points: Vec<(f64, f64)> = sol
        .report
        .contraction_ratios
        .iter()
        .enumerate()
        .map(|(i, &r)| ((i + 2) as f64, r))
        .collect();
    let report_json = serde_json::to_value(&sol.report)?;
    Ok(RunResult {
        summary: report_json,
        files: vec![
            csv_file("contraction.csv", &["iteration", "ratio"], rows),
            plot_file(
                "plot_picard.csv",
                "iteration",
                "contraction_ratio_prop_5_1",
                &points,
            ),
        ],
    })
}

fn run_reference_convergence(config: &ExperimentConfig) -> Result<RunResult> {
    let geometry = config.build_geometry()?;
    let t_final = config.params.t_final.unwrap();
    let amplitude = config.params.amplitude.unwrap_or(1.0);
    let steps_grid = config
        .params
        .steps_grid
        .clone()
        .unwrap_or_else(|| vec![128, 256, 512, 1024]);
    let basis = Basis::new(geometry, 1)?;
    let plans = CubicPlans::new(basis.clone(), 2)?;
    let mut f = StatePair::<f64>::zero(basis.clone());
    f.u.coeffs[0] = amplitude * basis.geometry.volume().sqrt();
    let profile = dense_profile(8192);
    let exact = amplitude * profile.eval(amplitude * t_final);
    let vol_sqrt = basis.geometry.volume().sqrt();
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    let mut drifts = Vec::new();
    for &steps in &steps_grid {
        let run = reference_solve(&f, t_final, steps, 0, &plans)?;
        let err = (run.final_state().u.coeffs[0] / vol_sqrt - exact).abs();
        errors.push(err);
        drifts.push(run.energy_max_drift);
    }
    let mut points = Vec::new();
    for (i, (&steps, &err)) in steps_grid.iter().zip(&errors).enumerate() {
        let ratio = if i > 0 { errors[i - 1] / err } else { f64::NAN };
        rows.push(vec![
            steps.to_string(),
            fmt_f64(t_final / steps as f64),
            fmt_f64(err),
            fmt_f64(ratio),
            fmt_f64(drifts[i]),
        ]);
        points.push((t_final / steps as f64, err));
    }
    let ratios: Vec<f64> = errors
        .windows(2)
        .map(|w| w[0] / w[1])
        .collect();
    Ok(RunResult {
        summary: json!({
            "richardson_ratios": ratios,
            "max_energy_drift": drifts.iter().cloned().fold(0.0f64, f64::max),
        }),
        files: vec![
            csv_file(
                "richardson.csv",
                &["steps", "dt", "error", "ratio", "energy_drift"],
                rows,
            ),
            plot_file("plot_reference.csv", "dt", "final_error_order_check", &points),
        ],
    })
}
