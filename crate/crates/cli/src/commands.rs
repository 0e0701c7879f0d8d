use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use qcmeasure::correlations::correlation_report;
use qcmeasure::measurement::{exact_scheme, q_from_measurements, q_via_traces, sampled_scheme};
use qcmeasure::states::{dqc1_output, jones_unitary, random_state, random_unitary, read_state, Dqc1Config};

use crate::suites::{self, Fault};
use crate::{CliError, Scheme};

#[derive(Debug, Serialize)]
struct ComputeReport {
    q: f64,
    d_g: f64,
    d_g_upper: f64,
    negativity_sq: f64,
    trace_s: f64,
    trace_s2: f64,
    k: [f64; 3],
    scheme: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    shots: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    stderr_q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    clamped: Option<bool>,
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    io_error(path, e)
}

fn num(x: f64) -> String {
    format!("{x:.15e}")
}

pub(crate) fn compute(
    input: &Path,
    path: &Path,
    scheme: Scheme,
    shots: Option<u64>,
    seed: u64,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let rho = read_state(input).map_err(|e| match e {
        qcmeasure::error::Error::Io(io) => io_error(input, io),
        other => CliError::Input(format!("{}: {other}", input.display())),
    })?;
    let closed = correlation_report(&rho);
    let mut report = ComputeReport {
        q: closed.q,
        d_g: closed.d_g,
        d_g_upper: closed.d_g_upper,
        negativity_sq: closed.negativity_sq,
        trace_s: closed.trace_s,
        trace_s2: closed.trace_s2,
        k: closed.k,
        scheme: scheme.name(),
        shots: None,
        stderr_q: None,
        clamped: None,
    };
    match scheme {
        Scheme::Closed => {}
        Scheme::Traces => {
            let (q, trace_s, trace_s2) = q_via_traces(&rho)?;
            report.q = q;
            report.trace_s = trace_s;
            report.trace_s2 = trace_s2;
        }
        Scheme::Projectors | Scheme::Sampled => {
            let px = match shots {
                Some(n) => sampled_scheme(&rho, n, seed)?,
                None => exact_scheme(&rho)?,
            };
            let est = q_from_measurements(&px);
            report.q = est.q_hat;
            report.trace_s = est.trace_s_hat;
            report.trace_s2 = est.trace_s2_hat;
            if scheme == Scheme::Sampled {
                report.shots = est.shots;
                report.stderr_q = Some(est.stderr_q);
                report.clamped = Some(est.clamped);
            }
        }
    }
    let mut text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Input(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| io_error(path, e))?;
    writeln!(out, "q = {:.12} ({}), written to {}", report.q, report.scheme, path.display())
        .map_err(|e| CliError::Io(e.to_string()))
}

pub(crate) fn scatter(
    count: usize,
    rank: usize,
    dim_b: usize,
    seed: u64,
    path: &Path,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let rows = (0..count)
        .into_par_iter()
        .map(|i| {
            let rho = random_state(dim_b, rank, seed.wrapping_add(i as u64))?;
            let r = correlation_report(&rho);
            Ok([i.to_string(), rank.to_string(), num(r.q), num(r.d_g), num(r.negativity_sq)])
        })
        .collect::<Result<Vec<_>, qcmeasure::error::Error>>()?;
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(["index", "rank", "q", "d_g", "negativity_sq"]).map_err(|e| csv_error(path, e))?;
    for row in &rows {
        w.write_record(row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| io_error(path, e))?;
    writeln!(out, "{count} states written to {}", path.display()).map_err(|e| CliError::Io(e.to_string()))
}

pub(crate) fn dqc1(
    mu_steps: usize,
    register_qubits: usize,
    seed: u64,
    path: &Path,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let unitary = if register_qubits == 3 {
        jones_unitary()
    } else {
        if register_qubits > 6 {
            return Err(CliError::Config(format!("--register-qubits {register_qubits} outside 1..=6")));
        }
        random_unitary(1 << register_qubits, seed)
    };
    let rows = (0..mu_steps)
        .into_par_iter()
        .map(|i| {
            let mu = i as f64 / (mu_steps - 1) as f64;
            let rho = dqc1_output(&Dqc1Config { register_qubits, mu, unitary: unitary.clone() })?;
            let r = correlation_report(&rho);
            Ok([num(mu), num(r.q), num(r.d_g), num(r.negativity_sq)])
        })
        .collect::<Result<Vec<_>, qcmeasure::error::Error>>()?;
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(["mu", "q", "d_g", "negativity_sq"]).map_err(|e| csv_error(path, e))?;
    for row in &rows {
        w.write_record(row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| io_error(path, e))?;
    writeln!(out, "{mu_steps} polarizations written to {}", path.display()).map_err(|e| CliError::Io(e.to_string()))
}

pub(crate) fn verify(trials: usize, seed: u64, fault: Option<Fault>, out: &mut dyn Write) -> Result<(), CliError> {
    let outcomes = suites::run_all(trials, seed, fault)?;
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    let io = |e: std::io::Error| CliError::Io(e.to_string());
    if let Some(fault) = fault {
        writeln!(out, "fault injected: {fault:?}").map_err(io)?;
    }
    for outcome in &outcomes {
        writeln!(out, "{outcome}").map_err(io)?;
    }
    if failed > 0 {
        return Err(CliError::VerifyFailed(failed));
    }
    writeln!(out, "all {} suites passed", outcomes.len()).map_err(io)
}
