//! One function per subcommand, each returning a rendered report.

use markovkit_core::channels::{
    best_rotated_petz, default_t_grid, recover_abc, Direction, PetzMode,
};
use markovkit_core::cost::{cost_bounds, markovianizing_cost};
use markovkit_core::kidecomp::{ki_decompose, ki_of_pure};
use markovkit_core::markov::{
    decomposition_recovery_error, is_markov, markov_decompose, recovery_from_decomposition,
};
use markovkit_core::protocols::{
    build_twirl_ensemble, lemma1_trial, markovianize, measurement_protocol, probe_trial,
    structural_trial, Lemma1Report, MeasurementOptions, StructuralConfig, StructuralMode,
    StructuralReport,
};
use markovkit_core::qcore::random::{random_pure, random_state, seeded_rng};
use markovkit_core::qcore::{fidelity, qcmi, qcmi_pure, trace_distance, von_neumann_entropy};
use markovkit_core::{PureState, SystemLayout, Tolerances, Tripartition};
use serde::Serialize;

use crate::cli::{
    Command, DirectionArg, GroupedArgs, Lemma1Args, MarkovianizeArgs, MeasureArgs, ModeArg,
    Outcome, ProbeArgs, ProbeFormat, RandomStateArgs, RecoverArgs, RunConfig, StateArgs,
    StructuralArgs, VerifyCommand,
};
use crate::error::{CliError, CliResult};
use crate::parallel::map_trials;
use crate::report::{
    envelope, render, ChannelJson, CostBoundsJson, CostReportJson, EnsembleJson, KIJson,
    MarkovDecompositionJson, MarkovReportJson,
};
use crate::state_file::{
    layout_to_json, matrix_to_json, read_state, LoadedState, MatrixJson, StateFile, SystemSpec,
};

pub fn dispatch(config: &RunConfig) -> CliResult<Outcome> {
    let tol = &config.tol;
    match &config.command {
        Command::Info(a) => info(a, tol),
        Command::Qcmi(a) => qcmi_cmd(a, tol),
        Command::Ki(a) => ki(a, tol),
        Command::MarkovCheck(a) => markov_check(a, tol),
        Command::MarkovDecompose(a) => markov_decompose_cmd(a, tol),
        Command::Recover(a) => recover(a, tol),
        Command::Cost(a) => cost(a, tol),
        Command::Markovianize(a) => markovianize_cmd(a, tol),
        Command::MeasureSim(a) => measure_sim(a, config.seed, tol),
        Command::Verify(VerifyCommand::Lemma1(a)) => verify_lemma1(a, config),
        Command::Verify(VerifyCommand::AppendixA(a)) => {
            verify_structural(a, StructuralMode::AppendixA, config)
        }
        Command::Verify(VerifyCommand::Lemma6(a)) => {
            verify_structural(a, StructuralMode::Lemma6, config)
        }
        Command::ProbeConjecture(a) => probe(a, config),
        Command::RandomState(a) => random_state_cmd(a, config.seed),
    }
}

fn ok<T: Serialize>(command: &str, body: &T) -> CliResult<Outcome> {
    Ok(Outcome {
        text: render(&envelope(command, body)?),
        exit_code: 0,
    })
}

fn labels(text: &str) -> Vec<String> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(ToString::to_string)
        .collect()
}

/// `--split`, else `--cond`, else `A|B|C` for three subsystems and `A||C` for two.
pub fn resolve_grouping(
    layout: &SystemLayout,
    split: Option<&str>,
    cond: Option<&str>,
) -> CliResult<Tripartition> {
    let g = if let Some(s) = split {
        Tripartition::parse(s)?
    } else if let Some(c) = cond {
        let b = labels(c);
        let positions = layout.indices_of(&b)?;
        let first = positions
            .iter()
            .copied()
            .min()
            .ok_or_else(|| CliError::Usage("--cond is empty".into()))?;
        let (mut a, mut rest) = (Vec::new(), Vec::new());
        for (i, (name, _)) in layout.subsystems().iter().enumerate() {
            if positions.contains(&i) {
                continue;
            }
            if i < first {
                a.push(name.clone());
            } else {
                rest.push(name.clone());
            }
        }
        Tripartition { a, b, c: rest }
    } else {
        let names: Vec<&str> = layout.labels().collect();
        match names.len() {
            3 => Tripartition::default_for(layout)?,
            2 => Tripartition::new(&names[..1], &[], &names[1..]),
            n => {
                return Err(CliError::Usage(format!(
                    "the state has {n} subsystems; pass --split or --cond"
                )))
            }
        }
    };
    g.resolve(layout)?;
    Ok(g)
}

fn load_grouped(a: &GroupedArgs, tol: &Tolerances) -> CliResult<(LoadedState, Tripartition)> {
    let state = read_state(&a.state, tol)?;
    let g = resolve_grouping(state.layout(), a.split.as_deref(), a.cond.as_deref())?;
    Ok((state, g))
}

fn require_pure(state: &LoadedState, tol: &Tolerances, command: &str) -> CliResult<PureState> {
    state
        .pure(tol)
        .ok_or_else(|| CliError::Usage(format!("{command} needs a pure state")))
}

fn dims3(dims: &[usize]) -> CliResult<(usize, usize, usize)> {
    match dims {
        &[a, b, c] => Ok((a, b, c)),
        _ => Err(CliError::Usage(format!(
            "--dims needs three values, got {}",
            dims.len()
        ))),
    }
}

fn positive_trials(trials: usize) -> CliResult<usize> {
    if trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    Ok(trials)
}

#[derive(Serialize)]
struct MarginalJson {
    name: String,
    dim: usize,
    entropy_bits: f64,
    populations: Vec<f64>,
}

#[derive(Serialize)]
struct InfoBody {
    systems: Vec<SystemSpec>,
    total_dim: usize,
    input: &'static str,
    trace: f64,
    purity: f64,
    rank: usize,
    entropy_bits: f64,
    marginals: Vec<MarginalJson>,
}

fn info(a: &StateArgs, tol: &Tolerances) -> CliResult<Outcome> {
    let state = read_state(&a.state, tol)?;
    let rho = state.density();
    let mut marginals = Vec::new();
    for (name, dim) in rho.layout().subsystems() {
        let m = rho.partial_trace(&[name.as_str()])?;
        marginals.push(MarginalJson {
            name: name.clone(),
            dim: *dim,
            entropy_bits: von_neumann_entropy(&m, tol)?,
            populations: (0..*dim).map(|i| m.matrix()[(i, i)].re).collect(),
        });
    }
    let norm = rho.matrix().frobenius_norm();
    ok(
        "info",
        &InfoBody {
            systems: layout_to_json(rho.layout()),
            total_dim: rho.dim(),
            input: if state.is_pure_input() {
                "vector"
            } else {
                "matrix"
            },
            trace: rho.trace(),
            purity: norm * norm,
            rank: rho.rank(tol),
            entropy_bits: von_neumann_entropy(&rho, tol)?,
            marginals,
        },
    )
}

#[derive(Serialize)]
struct QcmiBody {
    grouping: String,
    qcmi_bits: f64,
}

fn qcmi_cmd(a: &GroupedArgs, tol: &Tolerances) -> CliResult<Outcome> {
    let (state, g) = load_grouped(a, tol)?;
    let value = match &state {
        LoadedState::Pure(p) => qcmi_pure(p, &g, tol)?,
        LoadedState::Mixed(r) => qcmi(r, &g, tol)?,
    };
    ok(
        "qcmi",
        &QcmiBody {
            grouping: g.to_string(),
            qcmi_bits: value,
        },
    )
}

#[derive(Serialize)]
struct Grouped<T> {
    grouping: String,
    #[serde(flatten)]
    body: T,
}

fn grouped<T: Serialize>(command: &str, g: &Tripartition, body: T) -> CliResult<Outcome> {
    ok(
        command,
        &Grouped {
            grouping: g.to_string(),
            body,
        },
    )
}

fn ki(a: &GroupedArgs, tol: &Tolerances) -> CliResult<Outcome> {
    let (state, g) = load_grouped(a, tol)?;
    let ki = match &state {
        LoadedState::Pure(p) => ki_of_pure(p, &g, tol)?,
        LoadedState::Mixed(r) => {
            let keep: Vec<&String> = g.a.iter().chain(&g.c).collect();
            ki_decompose(&r.reduce_ordered(&keep)?, &g.a, tol)?
        }
    };
    grouped("ki", &g, KIJson::new(&ki, tol.support_cutoff_rel))
}

fn markov_check(a: &GroupedArgs, tol: &Tolerances) -> CliResult<Outcome> {
    let (state, g) = load_grouped(a, tol)?;
    let report = is_markov(&state.density(), &g, tol)?;
    grouped("markov-check", &g, MarkovReportJson::from(&report))
}

#[derive(Serialize)]
struct DecomposeBody {
    recovery_error_from_bc: f64,
    recovery_error_from_ab: f64,
    #[serde(flatten)]
    decomposition: MarkovDecompositionJson,
}

fn markov_decompose_cmd(a: &GroupedArgs, tol: &Tolerances) -> CliResult<Outcome> {
    let (state, g) = load_grouped(a, tol)?;
    let rho = state.density();
    let md = markov_decompose(&rho, &g, tol)?;
    let mut errors = [0.0; 2];
    for (slot, dir) in [Direction::FromBC, Direction::FromAB]
        .into_iter()
        .enumerate()
    {
        let ch = recovery_from_decomposition(&md, dir, tol)?;
        errors[slot] = decomposition_recovery_error(&rho, &g, &ch, dir)?;
    }
    grouped(
        "markov-decompose",
        &g,
        DecomposeBody {
            recovery_error_from_bc: errors[0],
            recovery_error_from_ab: errors[1],
            decomposition: (&md).into(),
        },
    )
}

#[derive(Serialize)]
struct RecoverBody {
    direction: &'static str,
    mode: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    t: Option<f64>,
    qcmi_bits: f64,
    error: f64,
    fidelity: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    channel: Option<ChannelJson>,
}

fn mode_fields(mode: PetzMode) -> (&'static str, Option<f64>) {
    match mode {
        PetzMode::Plain => ("plain", None),
        PetzMode::Rotated(t) => ("rotated", Some(t)),
        PetzMode::Averaged => ("averaged", None),
    }
}

fn recover(a: &RecoverArgs, tol: &Tolerances) -> CliResult<Outcome> {
    let (state, g) = load_grouped(&a.grouped, tol)?;
    let rho = state.density();
    let (dir, dir_name) = match a.from {
        DirectionArg::Bc => (Direction::FromBC, "bc"),
        DirectionArg::Ab => (Direction::FromAB, "ab"),
    };
    let (mode, channel, error, fid) = match a.mode {
        ModeArg::Best => {
            let grid = a.t_grid.clone().unwrap_or_else(default_t_grid);
            let s = best_rotated_petz(&rho, &g, dir, &grid, tol)?;
            (s.mode, s.channel, s.error, s.fidelity)
        }
        m => {
            let mode = match m {
                ModeArg::Plain => PetzMode::Plain,
                ModeArg::Rotated => PetzMode::Rotated(a.t),
                _ => PetzMode::Averaged,
            };
            let abc = rho.grouped(&g)?;
            let (ch, out) = recover_abc(&abc, dir, mode, tol)?;
            (mode, ch, trace_distance(&abc, &out)?, fidelity(&abc, &out)?)
        }
    };
    let (mode_name, t) = mode_fields(mode);
    grouped(
        "recover",
        &g,
        RecoverBody {
            direction: dir_name,
            mode: mode_name,
            t,
            qcmi_bits: qcmi(&rho, &g, tol)?,
            error,
            fidelity: fid,
            channel: a.emit_channel.then(|| ChannelJson::from(&channel)),
        },
    )
}

fn cost(a: &GroupedArgs, tol: &Tolerances) -> CliResult<Outcome> {
    let (state, g) = load_grouped(a, tol)?;
    match state.pure(tol) {
        Some(psi) => grouped(
            "cost",
            &g,
            CostReportJson::from(&markovianizing_cost(&psi, &g, tol)?),
        ),
        None => grouped(
            "cost",
            &g,
            CostBoundsJson::from(&cost_bounds(&state.density(), &g, tol)?),
        ),
    }
}

#[derive(Serialize)]
struct MarkovianizeBody {
    n: usize,
    output_grouping: String,
    ensemble_size: usize,
    cost_bits_per_copy: f64,
    m_dec_bits: f64,
    qcmi_in: f64,
    qcmi_out: f64,
    recovery_error_from_bc: f64,
    recovery_error_from_ab: f64,
    marginal_defect: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    ensemble: Option<EnsembleJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    output_state: Option<StateFile>,
}

fn markovianize_cmd(a: &MarkovianizeArgs, tol: &Tolerances) -> CliResult<Outcome> {
    let (state, g) = load_grouped(&a.grouped, tol)?;
    let psi = require_pure(&state, tol, "markovianize")?;
    let run = markovianize(&psi, &g, a.n, tol)?;
    grouped(
        "markovianize",
        &g,
        MarkovianizeBody {
            n: run.n,
            output_grouping: run.grouping.to_string(),
            ensemble_size: run.ensemble.len(),
            cost_bits_per_copy: run.cost_bits_per_copy,
            m_dec_bits: run.m_dec_bits,
            qcmi_in: run.qcmi_in,
            qcmi_out: run.qcmi_out,
            recovery_error_from_bc: run.recovery_errors.from_bc,
            recovery_error_from_ab: run.recovery_errors.from_ab,
            marginal_defect: run.marginal_defect,
            ensemble: a.emit_ensemble.then(|| EnsembleJson::from(&run.ensemble)),
            output_state: a.emit_state.then(|| StateFile::from_density(&run.output)),
        },
    )
}

#[derive(Serialize)]
struct OutcomeJson {
    k: usize,
    probability: f64,
    corrected_fidelity: f64,
    epsilon: f64,
    epsilon_prime: f64,
    mutual_info: f64,
    xi: f64,
}

#[derive(Serialize)]
struct MeasureBody {
    n: usize,
    outcomes: usize,
    rate: f64,
    completeness_defect: f64,
    max_probability_deviation: f64,
    min_corrected_fidelity: f64,
    max_epsilon: f64,
    mutual_info_av: f64,
    /// `n · rate`, the bound on `mutual_info_av`.
    mutual_info_bound: f64,
    xi_estimate_dependent: bool,
    per_outcome: Vec<OutcomeJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    measurement: Option<Vec<MatrixJson>>,
}

fn measure_sim(a: &MeasureArgs, seed: u64, tol: &Tolerances) -> CliResult<Outcome> {
    let (state, g) = load_grouped(&a.grouped, tol)?;
    let psi = require_pure(&state, tol, "measure-sim")?;
    let ki = ki_of_pure(&psi, &g, tol)?;
    let ensemble = build_twirl_ensemble(&ki, a.n, tol)?;
    let options = MeasurementOptions {
        zeta_budget: a.zeta_budget,
        seed,
        ..MeasurementOptions::default()
    };
    let run = measurement_protocol(&psi, &g, &ensemble, a.n, &options, tol)?;
    grouped(
        "measure-sim",
        &g,
        MeasureBody {
            n: run.n,
            outcomes: run.outcomes,
            rate: run.rate,
            completeness_defect: run.completeness_defect,
            max_probability_deviation: run.max_probability_deviation(),
            min_corrected_fidelity: run.min_fidelity(),
            max_epsilon: run.max_epsilon(),
            mutual_info_av: run.mutual_info_av,
            mutual_info_bound: run.n as f64 * run.rate,
            xi_estimate_dependent: run.xi_estimate_dependent,
            per_outcome: run
                .diagnostics
                .iter()
                .enumerate()
                .map(|(k, d)| OutcomeJson {
                    k,
                    probability: d.probability,
                    corrected_fidelity: d.corrected_fidelity,
                    epsilon: d.epsilon,
                    epsilon_prime: d.epsilon_prime,
                    mutual_info: d.mutual_info,
                    xi: d.xi,
                })
                .collect(),
            measurement: a
                .emit_measurement
                .then(|| run.measurement.iter().map(matrix_to_json).collect()),
        },
    )
}

fn verdict(passed: bool) -> i32 {
    if passed {
        0
    } else {
        2
    }
}

#[derive(Serialize)]
struct PropertySummary {
    passed: usize,
    worst_margin: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    worst_trace_margin: Option<f64>,
}

#[derive(Serialize)]
struct Lemma1Row {
    trial: usize,
    qcmi: f64,
    root_fidelity_bc: f64,
    root_fidelity_ab: f64,
    fidelity_margin: f64,
    trace_error: f64,
    trace_margin: f64,
    transfer_epsilon: f64,
    transfer_bound: f64,
    transfer_margin: f64,
    noise_epsilon: f64,
    noise_error_bc: f64,
    noise_error_ab: f64,
    noise_margin: f64,
}

#[derive(Serialize)]
struct Lemma1Body {
    dims: [usize; 3],
    trials: usize,
    seed: u64,
    max_eps: f64,
    passed: bool,
    property1: PropertySummary,
    property2: PropertySummary,
    property3: PropertySummary,
    rows: Vec<Lemma1Row>,
}

fn verify_lemma1(a: &Lemma1Args, config: &RunConfig) -> CliResult<Outcome> {
    let dims = dims3(&a.dims)?;
    let trials = positive_trials(a.trials)?;
    let (seed, tol) = (config.seed, config.tol);
    let rows = map_trials(config.jobs, trials, |t| {
        lemma1_trial(seed, t, dims, a.max_eps, &tol)
    })?;
    let r = Lemma1Report::from_trials(rows);
    let body = Lemma1Body {
        dims: [dims.0, dims.1, dims.2],
        trials,
        seed,
        max_eps: a.max_eps,
        passed: r.passed(),
        property1: PropertySummary {
            passed: r.property1_pass,
            worst_margin: r.property1_worst_margin,
            worst_trace_margin: Some(r.property1_worst_trace_margin),
        },
        property2: PropertySummary {
            passed: r.property2_pass,
            worst_margin: r.property2_worst_margin,
            worst_trace_margin: None,
        },
        property3: PropertySummary {
            passed: r.property3_pass,
            worst_margin: r.property3_worst_margin,
            worst_trace_margin: None,
        },
        rows: r
            .trials
            .iter()
            .map(|t| Lemma1Row {
                trial: t.trial,
                qcmi: t.property1.qcmi,
                root_fidelity_bc: t.property1.root_fidelity_bc,
                root_fidelity_ab: t.property1.root_fidelity_ab,
                fidelity_margin: t.property1.fidelity_margin,
                trace_error: t.property1.trace_error,
                trace_margin: t.property1.trace_margin,
                transfer_epsilon: t.property2.epsilon,
                transfer_bound: t.property2.bound,
                transfer_margin: t.property2.margin,
                noise_epsilon: t.property3.epsilon,
                noise_error_bc: t.property3.error_bc,
                noise_error_ab: t.property3.error_ab,
                noise_margin: t.property3.margin,
            })
            .collect(),
    };
    Ok(Outcome {
        text: render(&envelope("verify lemma1", &body)?),
        exit_code: verdict(body.passed),
    })
}

#[derive(Serialize)]
struct StructuralRowJson {
    trial: usize,
    epsilon: f64,
    lhs: f64,
    bound: f64,
    asserted: bool,
    holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    fixed_point_defect: Option<f64>,
}

#[derive(Serialize)]
struct StructuralBody {
    dims: [usize; 3],
    trials: usize,
    seed: u64,
    eps: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    asserted: usize,
    failures: usize,
    passed: bool,
    rows: Vec<StructuralRowJson>,
}

fn verify_structural(
    a: &StructuralArgs,
    mode: StructuralMode,
    config: &RunConfig,
) -> CliResult<Outcome> {
    let dims = dims3(&a.dims)?;
    let trials = positive_trials(a.trials)?;
    let (name, default_eps) = match mode {
        StructuralMode::AppendixA => ("verify appendix-a", 0.1),
        StructuralMode::Lemma6 => ("verify lemma6", 0.0),
    };
    let sc = StructuralConfig {
        mode,
        dims,
        epsilon: a.eps.unwrap_or(default_eps),
        n: a.n,
        zeta_budget: a.zeta_budget,
    };
    let (seed, tol) = (config.seed, config.tol);
    let rows = map_trials(config.jobs, trials, |t| {
        structural_trial(&sc, seed, t, &tol)
    })?;
    let r = StructuralReport::from_rows(mode, rows);
    let body = StructuralBody {
        dims: [dims.0, dims.1, dims.2],
        trials,
        seed,
        eps: sc.epsilon,
        n: (mode == StructuralMode::Lemma6).then_some(sc.n),
        asserted: r.asserted,
        failures: r.failures,
        passed: r.passed(),
        rows: r
            .rows
            .iter()
            .map(|row| StructuralRowJson {
                trial: row.trial,
                epsilon: row.epsilon,
                lhs: row.lhs,
                bound: row.bound,
                asserted: row.asserted,
                holds: row.holds,
                fixed_point_defect: row.fixed_point_defect,
            })
            .collect(),
    };
    Ok(Outcome {
        text: render(&envelope(name, &body)?),
        exit_code: verdict(body.passed),
    })
}

#[derive(Serialize)]
struct ProbeRow {
    trial: usize,
    noise: f64,
    eps_ab: f64,
    eps_bc: f64,
}

#[derive(Serialize)]
struct CsvRow {
    trial: usize,
    eps_ab: f64,
    eps_bc: f64,
}

#[derive(Serialize)]
struct ProbeBody {
    dims: [usize; 3],
    trials: usize,
    seed: u64,
    max_noise: f64,
    t_grid: Vec<f64>,
    points: Vec<ProbeRow>,
}

fn probe(a: &ProbeArgs, config: &RunConfig) -> CliResult<Outcome> {
    let dims = dims3(&a.dims)?;
    let trials = positive_trials(a.trials)?;
    let grid = a.t_grid.clone().unwrap_or_else(default_t_grid);
    let (seed, tol) = (config.seed, config.tol);
    let points = map_trials(config.jobs, trials, |t| {
        probe_trial(seed, t, dims, a.max_noise, &grid, &tol)
    })?;
    if let Some(p) = points
        .iter()
        .find(|p| !(p.eps_ab.is_finite() && p.eps_bc.is_finite()))
    {
        return Err(CliError::NonFinite(format!("points[{}]", p.trial)));
    }
    let text = match a.format {
        ProbeFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for p in &points {
                w.serialize(CsvRow {
                    trial: p.trial,
                    eps_ab: p.eps_ab,
                    eps_bc: p.eps_bc,
                })
                .map_err(|e| CliError::Usage(e.to_string()))?;
            }
            let bytes = w.into_inner().map_err(|e| CliError::Usage(e.to_string()))?;
            String::from_utf8(bytes).expect("CSV of numbers is UTF-8")
        }
        ProbeFormat::Json => render(&envelope(
            "probe-conjecture",
            &ProbeBody {
                dims: [dims.0, dims.1, dims.2],
                trials,
                seed,
                max_noise: a.max_noise,
                t_grid: grid,
                points: points
                    .iter()
                    .map(|p| ProbeRow {
                        trial: p.trial,
                        noise: p.noise,
                        eps_ab: p.eps_ab,
                        eps_bc: p.eps_bc,
                    })
                    .collect(),
            },
        )?),
    };
    Ok(Outcome { text, exit_code: 0 })
}

fn default_names(k: usize) -> Vec<String> {
    if k <= 26 {
        (0..k)
            .map(|i| char::from(b'A' + i as u8).to_string())
            .collect()
    } else {
        (1..=k).map(|i| format!("S{i}")).collect()
    }
}

fn random_state_cmd(a: &RandomStateArgs, seed: u64) -> CliResult<Outcome> {
    let names = a
        .names
        .clone()
        .unwrap_or_else(|| default_names(a.dims.len()));
    if names.len() != a.dims.len() {
        return Err(CliError::Usage(format!(
            "{} names for {} dimensions",
            names.len(),
            a.dims.len()
        )));
    }
    let layout = SystemLayout::new(names.into_iter().zip(a.dims.iter().copied()))?;
    let mut rng = seeded_rng(seed);
    let file = if a.pure {
        StateFile::from_pure(&random_pure(layout, &mut rng)?)
    } else {
        let rank = a.rank.unwrap_or(layout.total_dim());
        StateFile::from_density(&random_state(layout, rank, &mut rng)?)
    };
    ok("random-state", &file)
}
