use std::fmt::Write as _;

use entrolab_core::linalg::DensityOperator;
use entrolab_core::matrix_json::read_density;
use entrolab_core::statesgen::{random_observable, SampledPair};
use entrolab_core::superops::{modular_average_channel, pinching_channel};
use entrolab_core::verify::{prepare_pair, Checker, InequalityReport, Status, TheoremBreakdown};
use entrolab_core::wlp::check_l1_contraction;
use entrolab_core::Error;
use rayon::prelude::*;
use serde::Serialize;

use crate::output::{fmt_f64, report_row, Header, REPORT_COLUMNS};
use crate::{CliError, OutputFormat, Outcome, RunConfig, EXIT_FAIL, EXIT_PASS};

/// Runs `f` over `0..n` on `jobs` threads (0 = all cores), returning results
/// in index order.
fn ordered_parallel<T: Send>(
    jobs: usize,
    n: u64,
    f: impl Fn(u64) -> T + Sync + Send,
) -> Result<Vec<T>, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| (0..n).into_par_iter().map(f).collect()))
}

/// Weights of `I/d` mixed into the inputs of one pair.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Smoothing {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
}

/// Everything checked on one `(rho_AB, sigma_AB)` pair.
#[derive(Debug, Clone, Serialize)]
pub struct PairChecks {
    /// `lambda_max / lambda_min` of `sigma_AB`; the fixed tolerances assume
    /// moderate conditioning, and identities lose about `eps * cond`.
    pub sigma_condition_number: f64,
    pub breakdown: TheoremBreakdown,
    pub classical: Vec<InequalityReport>,
    pub pinsker: InequalityReport,
    pub contraction: Vec<InequalityReport>,
}

impl PairChecks {
    fn all(&self) -> Vec<(String, &InequalityReport)> {
        let mut out = self.breakdown.reports();
        for r in self.classical.iter().chain([&self.pinsker]).chain(&self.contraction) {
            out.extend(r.flatten());
        }
        out
    }

    fn failed(&self) -> bool {
        !self.breakdown.chain_sound || self.all().iter().any(|(_, r)| r.status == Status::Fail)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialRecord {
    pub trial_id: u64,
    pub trial_seed: u64,
    pub regenerations: u32,
    pub smoothing: Smoothing,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", flatten)]
    pub checks: Option<PairChecks>,
}

/// Runs every check on one pair, smoothing rank-deficient inputs when asked.
/// A rejected rank hypothesis comes back as `Err` with the record's status.
fn check_pair(
    config: &RunConfig,
    checker: &Checker,
    rho: &DensityOperator,
    sigma: &DensityOperator,
    observable_seed: u64,
) -> Result<(PairChecks, Smoothing), (Status, Error)> {
    let inapplicable = |e: Error| match e {
        Error::Singular { .. } | Error::InfiniteEntropy => (Status::Inapplicable, e),
        other => (Status::Fail, other),
    };
    let prepared = prepare_pair(rho, sigma, config.dims, config.smooth).map_err(inapplicable)?;
    let smoothing = Smoothing {
        ensemble: None,
        rho: prepared.rho_smoothing,
        sigma: prepared.sigma_smoothing,
    };
    let fail = |e: Error| (Status::Fail, e);
    let (rho, sigma) = (&prepared.rho, &prepared.sigma);
    let breakdown = checker.breakdown(rho, sigma, config.dims).map_err(inapplicable)?;
    let eig = sigma.eig().map_err(fail)?;
    let sigma_condition_number = eig.max_eigenvalue() / eig.min_eigenvalue();
    let classical = checker.classical_suite(rho, sigma, config.dims).map_err(fail)?;
    let pinsker = checker.pinsker(rho, sigma).map_err(fail)?;

    let x = random_observable(rho.dim(), observable_seed, 1.0).map_err(fail)?;
    let pinching = pinching_channel(rho).map_err(fail)?;
    let modular = modular_average_channel(rho, &config.quadrature).map_err(fail)?;
    let contraction = [("pinching", &pinching), ("modular_average", &modular)]
        .into_iter()
        .map(|(channel, t)| {
            let mut r = check_l1_contraction(t, rho, &x).map_err(fail)?;
            r.name = format!("{}_{channel}", r.name);
            Ok(r)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((
        PairChecks {
            sigma_condition_number,
            breakdown,
            classical,
            pinsker,
            contraction,
        },
        smoothing,
    ))
}

fn run_trial(config: &RunConfig, checker: &Checker, trial: u64) -> TrialRecord {
    let trial_seed = config.ensemble.trial_seed(trial);
    let mut record = TrialRecord {
        trial_id: trial,
        trial_seed,
        regenerations: 0,
        smoothing: Smoothing::default(),
        status: Status::Fail,
        error: None,
        checks: None,
    };
    let pair: SampledPair = match config.ensemble.sample(trial) {
        Ok(p) => p,
        Err(e) => {
            record.error = Some(e.to_string());
            return record;
        }
    };
    record.regenerations = pair.regenerations;
    match check_pair(config, checker, &pair.rho, &pair.sigma, trial_seed) {
        Ok((checks, smoothing)) => {
            record.status = if checks.failed() { Status::Fail } else { Status::Pass };
            record.smoothing = Smoothing {
                ensemble: pair.smoothing,
                ..smoothing
            };
            record.checks = Some(checks);
        }
        Err((status, e)) => {
            record.status = status;
            record.smoothing.ensemble = pair.smoothing;
            record.error = Some(e.to_string());
        }
    }
    record
}

#[derive(Debug, Clone, Default, Serialize)]
struct Summary {
    trials: u64,
    passed: u64,
    failed: u64,
    inapplicable: u64,
    checks: u64,
    failed_checks: u64,
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    #[serde(flatten)]
    header: Header<'a>,
    summary: Summary,
    trials: &'a [TrialRecord],
}

/// Seeded trials of the full check set: breakdown, classical suite, Pinsker
/// and L¹(rho) contraction under the pinching and modular-average channels
/// of `rho`.
pub fn cmd_verify(config: &RunConfig) -> Result<Outcome, CliError> {
    config.validate()?;
    let checker = Checker::new(config.tolerances()?);
    let records = ordered_parallel(config.jobs, config.trials, |t| run_trial(config, &checker, t))?;

    let mut summary = Summary {
        trials: config.trials,
        ..Summary::default()
    };
    for r in &records {
        match r.status {
            Status::Pass => summary.passed += 1,
            Status::Fail => summary.failed += 1,
            Status::Inapplicable => summary.inapplicable += 1,
        }
        if let Some(c) = &r.checks {
            let all = c.all();
            summary.checks += all.len() as u64;
            summary.failed_checks += all.iter().filter(|(_, r)| r.status == Status::Fail).count() as u64;
        }
    }
    let exit_code = if summary.failed == 0 { EXIT_PASS } else { EXIT_FAIL };

    let header = Header::new(config);
    let report = match config.format {
        OutputFormat::Json => {
            let doc = VerifyReport {
                header,
                summary,
                trials: &records,
            };
            serde_json::to_string_pretty(&doc)? + "\n"
        }
        OutputFormat::Csv => {
            let mut s = header.csv_preamble()?;
            s.push_str(REPORT_COLUMNS);
            s.push('\n');
            for r in &records {
                trial_rows(&mut s, r);
            }
            s
        }
    };
    Ok(Outcome { exit_code, report })
}

fn trial_rows(s: &mut String, r: &TrialRecord) {
    match &r.checks {
        Some(c) => {
            for (name, report) in c.all() {
                report_row(s, r.trial_id, &name, report);
            }
        }
        None => {
            let status = crate::output::status_str(r.status);
            writeln!(s, "{},input,,,,{status}", r.trial_id).unwrap();
        }
    }
}

/// Aggregates over the trials of one epsilon.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub trials: u64,
    pub h_norm_mean: f64,
    pub h_norm_max: f64,
    pub l_norm_mean: f64,
    pub l_norm_max: f64,
    pub alpha_mean: f64,
    pub alpha_max: f64,
    /// `(d_A + d_B) / d_AB`, over trials with `d_AB > 0`.
    pub ratio_mean: f64,
    pub ratio_max: f64,
    /// Every trial satisfied the bound, i.e. ratio <= alpha.
    pub ratio_le_alpha: bool,
    /// `alpha_max < 2`: the whole row sits in the improvement regime.
    pub alpha_lt_2: bool,
    /// Trials skipped because an input violated the rank hypotheses.
    pub inapplicable: u64,
}

impl SweepRow {
    pub const COLUMNS: &'static str = "epsilon,trials,h_norm_mean,h_norm_max,l_norm_mean,l_norm_max,\
alpha_mean,alpha_max,ratio_mean,ratio_max,ratio_le_alpha,alpha_lt_2,inapplicable";

    fn csv(&self) -> String {
        [
            fmt_f64(self.epsilon),
            self.trials.to_string(),
            fmt_f64(self.h_norm_mean),
            fmt_f64(self.h_norm_max),
            fmt_f64(self.l_norm_mean),
            fmt_f64(self.l_norm_max),
            fmt_f64(self.alpha_mean),
            fmt_f64(self.alpha_max),
            fmt_f64(self.ratio_mean),
            fmt_f64(self.ratio_max),
            self.ratio_le_alpha.to_string(),
            self.alpha_lt_2.to_string(),
            self.inapplicable.to_string(),
        ]
        .join(",")
    }
}

#[derive(Serialize)]
struct SweepReport<'a> {
    #[serde(flatten)]
    header: Header<'a>,
    rows: &'a [SweepRow],
}

fn mean_max(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    (mean, values.iter().copied().fold(f64::NEG_INFINITY, f64::max))
}

/// Per epsilon: `||H||`, `||L||`, `alpha` and the achieved ratio over
/// `sigma_AB = (1 - eps) sigma_A (x) sigma_B + eps tau`.
pub fn cmd_sweep(config: &RunConfig) -> Result<Outcome, CliError> {
    config.validate()?;
    let checker = Checker::new(config.tolerances()?);
    let sweep = config.sweep.clone().unwrap_or_default();
    let mut rows = Vec::with_capacity(sweep.epsilons.len());
    let mut failed = false;
    for &epsilon in &sweep.epsilons {
        let spec = entrolab_core::statesgen::EnsembleSpec {
            epsilon,
            ..config.ensemble
        };
        let results = ordered_parallel(config.jobs, config.trials, |t| {
            let pair = spec.sample_with_tau(t, sweep.tau)?;
            let prepared = prepare_pair(&pair.rho, &pair.sigma, config.dims, config.smooth)?;
            checker.breakdown(&prepared.rho, &prepared.sigma, config.dims)
        })?;
        let mut row_data = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        let mut bound_holds = true;
        let mut inapplicable = 0;
        for r in results {
            let b = match r {
                Ok(b) => b,
                Err(Error::Singular { .. }) => {
                    inapplicable += 1;
                    continue;
                }
                Err(e) => return Err(e.into()),
            };
            row_data.0.push(b.h_norm);
            row_data.1.push(b.l_norm);
            row_data.2.push(b.alpha);
            if b.d_full > 0.0 {
                row_data.3.push((b.d_a + b.d_b) / b.d_full);
            }
            bound_holds &= b.theorem().pass;
        }
        let (h_norm_mean, h_norm_max) = mean_max(&row_data.0);
        let (l_norm_mean, l_norm_max) = mean_max(&row_data.1);
        let (alpha_mean, alpha_max) = mean_max(&row_data.2);
        let (ratio_mean, ratio_max) = mean_max(&row_data.3);
        failed |= !bound_holds;
        rows.push(SweepRow {
            epsilon,
            trials: config.trials,
            h_norm_mean,
            h_norm_max,
            l_norm_mean,
            l_norm_max,
            alpha_mean,
            alpha_max,
            ratio_mean,
            ratio_max,
            ratio_le_alpha: bound_holds,
            alpha_lt_2: alpha_max < 2.0,
            inapplicable,
        });
    }

    let header = Header::new(config);
    let report = match config.format {
        OutputFormat::Json => {
            // JSON has no NaN; empty rows serialize their statistics as null
            serde_json::to_string_pretty(&SweepReport { header, rows: &rows })? + "\n"
        }
        OutputFormat::Csv => {
            let mut s = header.csv_preamble()?;
            s.push_str(SweepRow::COLUMNS);
            s.push('\n');
            for row in &rows {
                s.push_str(&row.csv());
                s.push('\n');
            }
            s
        }
    };
    Ok(Outcome {
        exit_code: if failed { EXIT_FAIL } else { EXIT_PASS },
        report,
    })
}

#[derive(Serialize)]
struct InspectReport<'a> {
    #[serde(flatten)]
    header: Header<'a>,
    status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<String>,
    smoothing: Smoothing,
    #[serde(skip_serializing_if = "Option::is_none", flatten)]
    checks: Option<PairChecks>,
}

/// Full breakdown of one pair read from matrix files.
///
/// Unreadable or invalid files are configuration errors (exit 2). A pair
/// that violates the rank hypotheses without `smooth` is reported as
/// inapplicable with exit code 0.
pub fn cmd_inspect(config: &RunConfig) -> Result<Outcome, CliError> {
    config.validate()?;
    let inputs = config.inputs.as_ref().expect("validated");
    let load = |path: &std::path::Path| {
        read_density(path).map_err(|source| CliError::Input {
            path: path.to_path_buf(),
            source,
        })
    };
    let rho = load(&inputs.rho)?;
    let sigma = load(&inputs.sigma)?;
    for (state, path) in [(&rho, &inputs.rho), (&sigma, &inputs.sigma)] {
        config.dims.check(state.dim()).map_err(|source| CliError::Input {
            path: path.clone(),
            source,
        })?;
    }
    let checker = Checker::new(config.tolerances()?);
    let (status, reason, smoothing, checks) =
        match check_pair(config, &checker, &rho, &sigma, config.ensemble.seed) {
            Ok((checks, smoothing)) => {
                let status = if checks.failed() { Status::Fail } else { Status::Pass };
                (status, None, smoothing, Some(checks))
            }
            Err((Status::Inapplicable, e)) => (Status::Inapplicable, Some(e.to_string()), Smoothing::default(), None),
            Err((_, e)) => return Err(e.into()),
        };
    let exit_code = if status == Status::Fail { EXIT_FAIL } else { EXIT_PASS };

    let header = Header::new(config);
    let report = match config.format {
        OutputFormat::Json => {
            let doc = InspectReport {
                header,
                status,
                reason,
                smoothing,
                checks,
            };
            serde_json::to_string_pretty(&doc)? + "\n"
        }
        OutputFormat::Csv => {
            let mut s = header.csv_preamble()?;
            s.push_str(REPORT_COLUMNS);
            s.push('\n');
            let record = TrialRecord {
                trial_id: 0,
                trial_seed: config.ensemble.seed,
                regenerations: 0,
                smoothing,
                status,
                error: reason,
                checks,
            };
            trial_rows(&mut s, &record);
            s
        }
    };
    Ok(Outcome { exit_code, report })
}
