//! Invariant suites run by `qcmeasure verify`.
//!
//! Trial `i` of every suite uses seed `seed + i`, so results do not depend on
//! the thread schedule.

use clap::ValueEnum;
use rayon::prelude::*;
use serde::Deserialize;

use qcmeasure::correlations::{correlation_report, q_measure, s_matrix};
use qcmeasure::error::Result;
use qcmeasure::measurement::{
    exact_scheme, observable_set, q_from_measurements, q_via_global_projector, trace_s2_centered, trace_s2_from_traces,
    trace_s_from_traces,
};
use qcmeasure::states::{random_classical_quantum, random_pure, random_state, DensityMatrix};

/// Chain and route tolerance.
pub const TOLERANCE: f64 = 1e-9;
/// Pure-state saturation tolerance.
pub const SATURATION_TOLERANCE: f64 = 1e-8;
/// Smallest `Q` accepted for a full-rank state.
pub const FULL_RANK_FLOOR: f64 = 1e-12;

/// Dimensions of B cycled through by the route and saturation suites.
pub const QUDIT_DIMS: [usize; 4] = [2, 3, 4, 8];

/// A deliberate transcription error, used to check that the suites catch it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// Flip the sign of the `Tr[ρ (ρ_A ⊗ ρ_B)]` term in the two-qubit `Tr S²`
    /// polynomial.
    PolynomialSign,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub trials: usize,
    /// What `value` measures, e.g. "worst violation".
    pub statistic: &'static str,
    pub value: f64,
    pub bound: f64,
    pub passed: bool,
}

impl std::fmt::Display for SuiteOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{:<28} {}  trials={:<6} {} = {:.3e} (bound {:.0e})",
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.trials,
            self.statistic,
            self.value,
            self.bound
        )
    }
}

fn par_max(trials: usize, f: impl Fn(usize) -> Result<f64> + Sync + Send) -> Result<f64> {
    (0..trials).into_par_iter().map(f).try_reduce(|| f64::NEG_INFINITY, |a, b| Ok(a.max(b)))
}

fn trial_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_add(i as u64)
}

/// `N² ≤ Q ≤ D_G ≤ 4 Tr S/3` and `Q ≥ 0` on two-qubit states of rank 1 to 4.
pub fn chain(trials: usize, seed: u64) -> Result<SuiteOutcome> {
    let worst = par_max(trials, |i| {
        let rho = random_state(2, 1 + i % 4, trial_seed(seed, i))?;
        Ok(chain_violation(&rho))
    })?;
    Ok(SuiteOutcome {
        name: "chain inequality",
        trials,
        statistic: "worst violation",
        value: worst.max(0.0),
        bound: TOLERANCE,
        passed: worst <= TOLERANCE,
    })
}

/// Largest amount by which `ρ` breaks `0 ≤ N² ≤ Q ≤ D_G ≤ 4 Tr S/3`.
pub fn chain_violation(rho: &DensityMatrix) -> f64 {
    let r = correlation_report(rho);
    let mut worst = -r.q;
    worst = worst.max(r.q - r.d_g).max(r.d_g - r.d_g_upper);
    if rho.dim_b() == 2 {
        worst = worst.max(r.negativity_sq - r.q);
    }
    worst
}

/// `Q` vanishes on classical-quantum states.
pub fn faithfulness_zero(trials: usize, seed: u64) -> Result<SuiteOutcome> {
    let worst = par_max(trials, |i| {
        let d = QUDIT_DIMS[i % 3];
        Ok(q_measure(&random_classical_quantum(d, trial_seed(seed, i))?).abs())
    })?;
    Ok(SuiteOutcome {
        name: "faithfulness (classical)",
        trials,
        statistic: "max |Q|",
        value: worst,
        bound: TOLERANCE,
        passed: worst < TOLERANCE,
    })
}

/// `Q` is strictly positive on random full-rank states.
pub fn faithfulness_positive(trials: usize, seed: u64) -> Result<SuiteOutcome> {
    let smallest = -par_max(trials, |i| {
        let d = QUDIT_DIMS[i % 3];
        Ok(-q_measure(&random_state(d, 2 * d, trial_seed(seed, i))?))
    })?;
    Ok(SuiteOutcome {
        name: "faithfulness (full rank)",
        trials,
        statistic: "min Q",
        value: smallest,
        bound: FULL_RANK_FLOOR,
        passed: smallest > FULL_RANK_FLOOR,
    })
}

/// `Q` from each route.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RouteValues {
    pub closed: f64,
    pub traces: f64,
    pub global_projector: f64,
    pub projectors: f64,
}

impl RouteValues {
    pub fn max_deviation(&self) -> f64 {
        [self.traces, self.global_projector, self.projectors]
            .iter()
            .map(|q| (q - self.closed).abs())
            .fold(0.0, f64::max)
    }
}

pub fn route_values(rho: &DensityMatrix, fault: Option<Fault>) -> Result<RouteValues> {
    let obs = observable_set(rho)?;
    let trace_s = trace_s_from_traces(&obs);
    let trace_s2 = if rho.dim_b() == 2 {
        let mut v = trace_s2_from_traces(&obs)?;
        if fault == Some(Fault::PolynomialSign) {
            // the term is -24 rho_ab inside an overall factor 1/4
            v += 12.0 * obs.values().rho_ab;
        }
        v
    } else {
        trace_s2_centered(rho)
    };
    Ok(RouteValues {
        closed: s_matrix(rho).q(),
        traces: qcmeasure::correlations::q_from_traces(trace_s, trace_s2).0.max(0.0),
        global_projector: q_via_global_projector(rho)?.max(0.0),
        projectors: q_from_measurements(&exact_scheme(rho)?).q_hat.max(0.0),
    })
}

/// All routes agree with the closed form, cycling B through [`QUDIT_DIMS`].
pub fn route_equivalence(trials: usize, seed: u64, fault: Option<Fault>) -> Result<SuiteOutcome> {
    let worst = par_max(trials, |i| {
        let d = QUDIT_DIMS[i % QUDIT_DIMS.len()];
        let rank = 1 + (i / QUDIT_DIMS.len()) % (2 * d);
        let rho = random_state(d, rank, trial_seed(seed, i))?;
        Ok(route_values(&rho, fault)?.max_deviation())
    })?;
    Ok(SuiteOutcome {
        name: "route equivalence",
        trials,
        statistic: "max |dQ|",
        value: worst,
        bound: TOLERANCE,
        passed: worst < TOLERANCE,
    })
}

/// Largest gap among the saturated inequalities of a pure state.
pub fn saturation_gap(rho: &DensityMatrix) -> f64 {
    let r = correlation_report(rho);
    let mut gap = (r.d_g - r.q).abs();
    if rho.dim_b() == 2 {
        gap = gap.max((r.q - r.negativity_sq).abs());
    }
    gap
}

/// `D_G = Q` on pure states, and `Q = N²` as well for two qubits.
pub fn pure_saturation(trials: usize, seed: u64) -> Result<SuiteOutcome> {
    let worst = par_max(trials, |i| {
        let d = QUDIT_DIMS[i % QUDIT_DIMS.len()];
        Ok(saturation_gap(&random_pure(d, trial_seed(seed, i))?))
    })?;
    Ok(SuiteOutcome {
        name: "pure-state saturation",
        trials,
        statistic: "max gap",
        value: worst,
        bound: SATURATION_TOLERANCE,
        passed: worst < SATURATION_TOLERANCE,
    })
}

pub fn run_all(trials: usize, seed: u64, fault: Option<Fault>) -> Result<Vec<SuiteOutcome>> {
    Ok(vec![
        chain(trials, seed)?,
        faithfulness_zero(trials, seed)?,
        faithfulness_positive(trials, seed)?,
        route_equivalence(trials, seed, fault)?,
        pure_saturation(trials, seed)?,
    ])
}
