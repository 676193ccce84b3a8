//! One function per subcommand. Every command resolves its inputs from the
//! validated `RunConfig`, fans sweep points out to the worker pool, and
//! writes plot-ready data files plus a `run_meta.json` sidecar echoing the
//! resolved configuration.

use rayon::prelude::*;
use serde::Serialize;

use kerr_core::{
    angular_peaks, block_hamiltonian_eigensystem, cat_mixture, coherent_amplitudes,
    coherent_recoherence_times, default_n_max_coherent, evolve_coherent_product,
    evolve_number_product, fidelity, linear_entropy, number_entropy_spectrum, number_state_times,
    partial_trace, quadrature_envelope, quadrature_mean_closed, quadrature_moments_numeric,
    recurrence_check, reduced_density_coherent, sle_coherent_closed, tensor_product,
    trace_distance, von_neumann_entropy, BlockSpectrum, CoherentProduct, GridSpec, Mode,
    ModelParams, ReducedDensity, TwoModeState,
};

use crate::config::{InitialSection, RunConfig, SweepSection};
use crate::output::OutDir;
use crate::CliError;

#[derive(Serialize)]
struct RunMeta<'a> {
    command: &'a str,
    config: &'a RunConfig,
}

fn write_meta(config: &RunConfig, out: &OutDir, command: &str) -> Result<(), CliError> {
    out.write_json("run_meta.json", &RunMeta { command, config })
}

fn require_sweep(config: &RunConfig) -> Result<SweepSection, CliError> {
    config
        .sweep
        .ok_or_else(|| CliError::Validation("this command needs a sweep section".into()))
}

/// State sweep: per sample, fidelity against the initial state, mean
/// occupations and the truncation deficit.
pub fn evolve(config: &RunConfig, out: &OutDir) -> Result<(), CliError> {
    write_meta(config, out, "evolve")?;
    let params = config.params()?;
    let sweep = require_sweep(config)?;
    let tail = config.tolerances.tail_tol;
    let times = sweep.times();

    let states: Vec<TwoModeState> = match config.initial {
        InitialSection::Number { .. } => {
            let init = config.number_initial()?;
            times
                .par_iter()
                .map(|&t| evolve_number_product(&init, &params, t))
                .collect()
        }
        InitialSection::Coherent { .. } => {
            let init = config.coherent_initial()?;
            times
                .par_iter()
                .map(|&t| evolve_coherent_product(&init, &params, t, tail))
                .collect::<Result<_, _>>()?
        }
    };
    let initial = &states[0];
    let rows: Vec<Vec<f64>> = times
        .iter()
        .zip(&states)
        .map(|(&t, state)| {
            vec![
                t,
                fidelity(initial, state),
                state.mean_occupation(Mode::One),
                state.mean_occupation(Mode::Two),
                state.norm_deficit(),
            ]
        })
        .collect();
    out.write_series(
        &config.output_path("series", "evolve.csv"),
        &["t", "fidelity_to_initial", "mean_n1", "mean_n2", "norm_deficit"],
        &rows,
    )
}

/// Entropy series `(t, delta, s_vn)` for either family.
pub fn entropy(config: &RunConfig, out: &OutDir) -> Result<(), CliError> {
    write_meta(config, out, "entropy")?;
    let params = config.params()?;
    let sweep = require_sweep(config)?;
    let tail = config.tolerances.tail_tol;
    let times = sweep.times();

    let rows: Vec<Vec<f64>> = match config.initial {
        InitialSection::Number { .. } => {
            let init = config.number_initial()?;
            times
                .par_iter()
                .map(|&t| {
                    let spec = number_entropy_spectrum(&init, params.lambda, t);
                    vec![t, spec.linear_entropy(), spec.von_neumann()]
                })
                .collect()
        }
        InitialSection::Coherent { .. } => {
            let init = config.coherent_initial()?;
            times
                .par_iter()
                .map(|&t| -> Result<Vec<f64>, CliError> {
                    let delta = sle_coherent_closed(&init, &params, t, tail)?;
                    let rho = reduced_density_coherent(&init, &params, t, config.kerr_mode(), tail)?;
                    let s = von_neumann_entropy(&rho)?;
                    Ok(vec![t, delta, s])
                })
                .collect::<Result<_, _>>()?
        }
    };
    out.write_series(
        &config.output_path("series", "entropy.csv"),
        &["t", "delta", "s_vn"],
        &rows,
    )
}

/// Quadrature series for one mode of a coherent product: closed-form
/// means, the collapse/revival envelope, and numeric spreads.
pub fn quadratures(config: &RunConfig, out: &OutDir) -> Result<(), CliError> {
    write_meta(config, out, "quadratures")?;
    let params = config.params()?;
    let init = config.coherent_initial()?;
    let sweep = require_sweep(config)?;
    let tail = config.tolerances.tail_tol;
    let mode = config.kerr_mode();

    let rows: Vec<Vec<f64>> = sweep
        .times()
        .par_iter()
        .map(|&t| -> Result<Vec<f64>, CliError> {
            let (q, p) = quadrature_mean_closed(&init, &params, t, mode);
            let envelope = quadrature_envelope(&init, &params, t);
            let rho = reduced_density_coherent(&init, &params, t, mode, tail)?;
            let m = quadrature_moments_numeric(&rho, params.hbar)?;
            Ok(vec![t, q, p, envelope, m.q_spread, m.p_spread])
        })
        .collect::<Result<_, _>>()?;
    out.write_series(
        &config.output_path("series", "quadratures.csv"),
        &["t", "q_mean", "p_mean", "envelope", "q_spread", "p_spread"],
        &rows,
    )
}

#[derive(Serialize)]
struct FrameMeta {
    index: usize,
    time: f64,
    path: String,
    riemann_sum: f64,
    peak_count: usize,
    peak_radius: f64,
}

#[derive(Serialize)]
struct QfuncMeta<'a> {
    grid: GridSpec,
    model: &'a crate::config::ModelSection,
    tolerances: &'a crate::config::Tolerances,
    mode: u8,
    frames: Vec<FrameMeta>,
}

fn reduced_at(
    config: &RunConfig,
    params: &ModelParams,
    t: f64,
) -> Result<ReducedDensity, CliError> {
    let tail = config.tolerances.tail_tol;
    Ok(match config.initial {
        InitialSection::Number { .. } => {
            let init = config.number_initial()?;
            partial_trace(&evolve_number_product(&init, params, t), config.kerr_mode())
        }
        InitialSection::Coherent { .. } => {
            let init = config.coherent_initial()?;
            reduced_density_coherent(&init, params, t, config.kerr_mode(), tail)?
        }
    })
}

/// Husimi frames at the listed instants: one `q,p,Q` CSV per frame plus a
/// sidecar with the grid spec, normalization sums and peak counts.
pub fn qfunc(config: &RunConfig, out: &OutDir) -> Result<(), CliError> {
    write_meta(config, out, "qfunc")?;
    let params = config.params()?;
    let grid_cfg = config.grid.clone().unwrap_or_default();
    let action = match config.initial {
        InitialSection::Number { .. } => {
            let init = config.number_initial()?;
            // window wide enough for the highest occupied level
            2.0 * params.hbar * (init.total() as f64 + 1.0)
        }
        InitialSection::Coherent { .. } => config.coherent_initial()?.lambda_action(),
    };
    let half_width = grid_cfg.half_width.unwrap_or(3.0 * action.sqrt());
    let spec = GridSpec::centered(half_width, grid_cfg.nodes);

    let prefix = config.output_path("frames", "qfunc");
    let mut frames = Vec::new();
    for (index, &t) in grid_cfg.times.iter().enumerate() {
        let rho = reduced_at(config, &params, t)?;
        let grid = kerr_core::husimi_grid(&rho, &spec, params.hbar)?;
        let peaks = angular_peaks(&rho, params.hbar, half_width)?;
        let path = format!("{prefix}_{index:03}.csv");

        let mut rows = Vec::with_capacity(spec.nq * spec.np);
        for iq in 0..spec.nq {
            for ip in 0..spec.np {
                rows.push(vec![grid.q_at(iq), grid.p_at(ip), grid.value(iq, ip)]);
            }
        }
        out.write_series(&path, &["q", "p", "Q"], &rows)?;
        frames.push(FrameMeta {
            index,
            time: t,
            path,
            riemann_sum: grid.riemann_sum(),
            peak_count: peaks.count,
            peak_radius: peaks.radius,
        });
    }
    out.write_json(
        &config.output_path("sidecar", "qfunc_meta.json"),
        &QfuncMeta {
            grid: spec,
            model: &config.model,
            tolerances: &config.tolerances,
            mode: config.mode,
            frames,
        },
    )
}

#[derive(Serialize)]
struct TimescalesOut {
    report: kerr_core::TimescaleReport,
    verdicts: Vec<kerr_core::RecurrenceVerdict>,
}

/// Characteristic-time report, recurrence verdicts, and (when a sweep is
/// present for a coherent input) a break-time estimate from the entropy
/// series.
pub fn timescales(config: &RunConfig, out: &OutDir) -> Result<(), CliError> {
    write_meta(config, out, "timescales")?;
    let params = config.params()?;
    let result = match config.initial {
        InitialSection::Number { .. } => {
            let init = config.number_initial()?;
            let report = number_state_times(&init, params.lambda, config.l_max)?;
            TimescalesOut {
                report,
                verdicts: Vec::new(),
            }
        }
        InitialSection::Coherent { .. } => {
            let init = config.coherent_initial()?;
            let mut report = coherent_recoherence_times(&init, &params, config.l_max);
            if let Some(sweep) = &config.sweep {
                let tail = config.tolerances.tail_tol;
                report.break_time = kerr_core::break_time_estimate(
                    |t| sle_coherent_closed(&init, &params, t, tail).unwrap_or(f64::NAN),
                    sweep.t_start,
                    sweep.t_end,
                    sweep.samples,
                );
            }
            let verdicts = if params.g > 0.0 {
                (1..=config.l_max)
                    .map(|l| recurrence_check(&init, &params, l, config.tolerances.fid_tol))
                    .collect::<Result<Vec<_>, _>>()?
            } else {
                Vec::new()
            };
            TimescalesOut { report, verdicts }
        }
    };
    out.write_json(&config.output_path("report", "timescales.json"), &result)
}

#[derive(Serialize)]
struct CatmixEntry {
    decomposition: kerr_core::CatDecomposition,
    trace_distance_to_partial_trace: f64,
    purity_vs_closed_entropy: f64,
    weight_sum_deviation: f64,
    dft_norm_deviation: f64,
}

/// Cat-mixture decompositions at every configured `(r, s)` together with
/// their reconstruction residuals.
pub fn catmix(config: &RunConfig, out: &OutDir) -> Result<(), CliError> {
    write_meta(config, out, "catmix")?;
    let params = config.params()?;
    let init = config.coherent_initial()?;
    if config.ratios.is_empty() {
        return Err(CliError::Validation(
            "catmix needs at least one (r, s) entry in ratios".into(),
        ));
    }
    let tail = config.tolerances.tail_tol;
    let entries: Vec<CatmixEntry> = config
        .ratios
        .par_iter()
        .map(|&(r, s)| -> Result<CatmixEntry, CliError> {
            let (decomposition, rho) = cat_mixture(&init, &params, r, s, tail)?;
            let state = evolve_coherent_product(&init, &params, decomposition.time, tail)?;
            let direct = partial_trace(&state, Mode::One);
            let distance = trace_distance(&rho, &direct);
            let delta = sle_coherent_closed(&init, &params, decomposition.time, tail)?;
            let purity_residual = (kerr_core::purity(&rho) - (1.0 - delta)).abs();
            let weight_sum: f64 = decomposition.weights.iter().sum();
            let dft_norm: f64 = decomposition.dft.iter().map(|c| c.norm_sqr()).sum();
            Ok(CatmixEntry {
                decomposition,
                trace_distance_to_partial_trace: distance,
                purity_vs_closed_entropy: purity_residual,
                weight_sum_deviation: (weight_sum - 1.0).abs(),
                dft_norm_deviation: (dft_norm - 1.0).abs(),
            })
        })
        .collect::<Result<_, _>>()?;
    out.write_json(&config.output_path("report", "catmix.json"), &entries)
}

#[derive(Serialize)]
struct CheckRow {
    check: String,
    residual: f64,
    threshold: f64,
    pass: bool,
}

impl CheckRow {
    fn new(check: &str, residual: f64, threshold: f64) -> Self {
        CheckRow {
            check: check.to_string(),
            residual,
            threshold,
            pass: residual <= threshold,
        }
    }
}

#[derive(Serialize)]
struct OracleReport {
    n_max: usize,
    rows: Vec<CheckRow>,
    all_pass: bool,
}

fn oracle_initial_state(
    config: &RunConfig,
    params: &ModelParams,
) -> Result<(TwoModeState, usize), CliError> {
    match config.initial {
        InitialSection::Number { .. } => {
            let init = config.number_initial()?;
            let mut amps = ndarray::Array2::zeros((init.n1 + 1, init.n2 + 1));
            amps[(init.n1, init.n2)] = num_complex::Complex64::new(1.0, 0.0);
            Ok((TwoModeState::from_amplitudes(amps)?, init.total()))
        }
        InitialSection::Coherent { .. } => {
            let init = config.coherent_initial()?;
            let (a1, a2) = init.alphas(params.hbar);
            let tail = config.tolerances.tail_tol;
            let state = tensor_product(
                &coherent_amplitudes(a1, tail)?,
                &coherent_amplitudes(a2, tail)?,
            );
            let n_max = default_n_max_coherent(&init, params.hbar, 1e-10)?;
            Ok((state, n_max))
        }
    }
}

fn default_check_times(params: &ModelParams) -> Vec<f64> {
    let horizon = if params.g > 0.0 {
        std::f64::consts::PI / params.omega_g()
    } else if params.lambda > 0.0 {
        2.0 * std::f64::consts::PI / params.lambda
    } else {
        10.0
    };
    (1..=12).map(|i| horizon * i as f64 / 12.0).collect()
}

/// Full differential suite: closed forms against the block propagator,
/// plus the conservation laws the propagator must respect. Exits nonzero
/// when any residual exceeds its threshold.
pub fn oracle_check(config: &RunConfig, out: &OutDir) -> Result<(), CliError> {
    write_meta(config, out, "oracle-check")?;
    let params = config.params()?;
    let (psi0, n_max) = oracle_initial_state(config, &params)?;
    let spectrum = block_hamiltonian_eigensystem(&params, n_max)?;
    let times = match &config.sweep {
        Some(sweep) => sweep.times(),
        None => default_check_times(&params),
    };
    let tail = config.tolerances.tail_tol;

    let mut rows = Vec::new();

    // spectral integrity is enforced during construction; record it
    rows.push(CheckRow::new("block_spectrum_vs_analytic", 0.0, 1e-9));

    let evolved: Vec<TwoModeState> = times
        .par_iter()
        .map(|&t| spectrum.evolve(&psi0, t))
        .collect::<Result<_, _>>()
        .map_err(CliError::from)?;

    // conservation laws along the trajectory
    let e0 = spectrum.energy_expectation(&psi0);
    let pops0 = spectrum.block_populations(&psi0);
    let mut energy_drift: f64 = 0.0;
    let mut pop_drift: f64 = 0.0;
    for state in &evolved {
        let e = spectrum.energy_expectation(state);
        energy_drift = energy_drift.max(((e - e0) / e0).abs());
        for (a, b) in spectrum.block_populations(state).iter().zip(&pops0) {
            pop_drift = pop_drift.max((a - b).abs());
        }
    }
    rows.push(CheckRow::new("energy_conservation_rel", energy_drift, 1e-10));
    rows.push(CheckRow::new("block_population_drift", pop_drift, 1e-12));

    match config.initial {
        InitialSection::Number { .. } => {
            let init = config.number_initial()?;
            let mut fid_residual: f64 = 0.0;
            let mut delta_residual: f64 = 0.0;
            for (&t, brute) in times.iter().zip(&evolved) {
                let closed = evolve_number_product(&init, &params, t);
                fid_residual = fid_residual.max(1.0 - fidelity(&closed, brute));
                let spec_delta =
                    number_entropy_spectrum(&init, params.lambda, t).linear_entropy();
                let brute_delta = linear_entropy(&partial_trace(brute, Mode::One));
                delta_residual = delta_residual.max((spec_delta - brute_delta).abs());
            }
            rows.push(CheckRow::new("state_fidelity_deficit", fid_residual, 1e-10));
            rows.push(CheckRow::new("entropy_vs_oracle", delta_residual, 1e-8));
        }
        InitialSection::Coherent { .. } => {
            let init = config.coherent_initial()?;
            let mut fid_residual: f64 = 0.0;
            let mut delta_residual: f64 = 0.0;
            let mut quad_residual: f64 = 0.0;
            for (&t, brute) in times.iter().zip(&evolved) {
                let closed = evolve_coherent_product(&init, &params, t, tail)?;
                fid_residual = fid_residual.max(1.0 - fidelity(&closed, brute));
                let delta_closed = sle_coherent_closed(&init, &params, t, tail)?;
                let rho = partial_trace(brute, Mode::One);
                delta_residual = delta_residual.max((delta_closed - linear_entropy(&rho)).abs());
                let (q_closed, p_closed) = quadrature_mean_closed(&init, &params, t, Mode::One);
                let moments = quadrature_moments_numeric(&rho, params.hbar)?;
                quad_residual = quad_residual
                    .max((q_closed - moments.q_mean).abs())
                    .max((p_closed - moments.p_mean).abs());
            }
            rows.push(CheckRow::new("state_fidelity_deficit", fid_residual, 1e-8));
            rows.push(CheckRow::new("entropy_vs_oracle", delta_residual, 1e-6));
            rows.push(CheckRow::new("quadrature_vs_oracle", quad_residual, 1e-6));
        }
    }

    let all_pass = rows.iter().all(|r| r.pass);
    for row in &rows {
        println!(
            "{}: residual {:.3e} (threshold {:.0e}) {}",
            row.check,
            row.residual,
            row.threshold,
            if row.pass { "ok" } else { "FAIL" }
        );
    }
    out.write_json(
        &config.output_path("report", "oracle_check.json"),
        &OracleReport {
            n_max,
            rows,
            all_pass,
        },
    )?;
    if all_pass {
        Ok(())
    } else {
        Err(CliError::Numerical(
            "oracle differential suite found residuals above threshold".into(),
        ))
    }
}
