//! Simulated experimental routes to `Q`.
//!
//! `Q` only needs `Tr S` and `Tr S²`, and both are polynomials in the state
//! that can be read off multi-copy observables:
//!
//! * **Trace functionals.** Nine overlaps such as `Tr[ρ³]` or
//!   `Tr[ρ (ρ_A ⊗ ρ_B)]`, each the expectation of a shift operator on at most
//!   four copies ([`ObservableSet`], [`NINE_OBSERVABLES`]). For two qubits
//!   [`trace_s2_from_traces`] combines them into `Tr S²`.
//! * **Local projections.** Seven expectations `c_1 … c_7` of tensor products
//!   of antisymmetric projectors on two or four copies ([`SCHEME`]). The same
//!   linear combinations give `Tr S` and `Tr S²` for every qubit-qudit
//!   dimension, so the number of measurements does not grow with `d`.
//!
//! Each projector `P⁻ = (I - V)/2` is expanded into slot permutations and
//! evaluated with [`permutation_expectation`], so `ρ^{⊗4}` is never built.
//! [`sampled_scheme`] replaces the exact `c_i` by binomial shot counts.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;

use crate::correlations::q_from_traces;
use crate::error::{Error, Result};
use crate::states::DensityMatrix;
use crate::tensor::{
    antisym_projector, identity, kron, max_abs_diff, permutation_expectation, slot_permutation_matrix,
    trace_of_product, ComplexMatrix, Dims,
};

/// Allowed disagreement between the two evaluations in [`observable_set`].
pub const ROUTE_CONSISTENCY: f64 = 1e-8;

/// Largest `(2d)^k` for which dense multi-copy operators are built.
pub const DENSE_LIMIT: usize = 4096;

/// Bootstrap replicates used by [`q_from_measurements`] in sampled mode.
pub const BOOTSTRAP_REPLICATES: usize = 200;

/// A shift-type observable on `copies` copies of `ρ`: A slots are permuted by
/// `perm_a`, B slots by `perm_b` (convention of [`permutation_expectation`]).
///
/// A copy whose A slot is a fixed point acts as `I ⊗ ρ_B`, one whose B slot is
/// a fixed point as `ρ_A ⊗ I`.
#[derive(Debug, Clone, Copy)]
pub struct ShiftObservable {
    pub name: &'static str,
    pub copies: usize,
    pub perm_a: &'static [usize],
    pub perm_b: &'static [usize],
}

/// The nine trace functionals in the order of [`TraceFunctionals::as_array`].
pub const NINE_OBSERVABLES: [ShiftObservable; 9] = [
    ShiftObservable { name: "Tr[rho^2]", copies: 2, perm_a: &[1, 0], perm_b: &[1, 0] },
    ShiftObservable { name: "Tr[rho^3]", copies: 3, perm_a: &[2, 0, 1], perm_b: &[2, 0, 1] },
    ShiftObservable { name: "Tr[rho^4]", copies: 4, perm_a: &[3, 0, 1, 2], perm_b: &[3, 0, 1, 2] },
    ShiftObservable { name: "Tr[rho_A^2]", copies: 2, perm_a: &[1, 0], perm_b: &[0, 1] },
    ShiftObservable { name: "Tr[rho_B^2]", copies: 2, perm_a: &[0, 1], perm_b: &[1, 0] },
    ShiftObservable {
        name: "Tr[rho (I x rho_B) rho (I x rho_B)]",
        copies: 4,
        perm_a: &[2, 1, 0, 3],
        perm_b: &[1, 2, 3, 0],
    },
    ShiftObservable { name: "Tr[rho (rho_A x rho_B)]", copies: 3, perm_a: &[1, 0, 2], perm_b: &[2, 1, 0] },
    ShiftObservable {
        name: "Tr[rho (rho_A x I) rho (rho_A x I)]",
        copies: 4,
        perm_a: &[1, 2, 3, 0],
        perm_b: &[2, 1, 0, 3],
    },
    ShiftObservable { name: "Tr[rho^2 (rho_A x rho_B)]", copies: 4, perm_a: &[1, 2, 0, 3], perm_b: &[1, 3, 2, 0] },
];

impl ShiftObservable {
    pub fn expectation(&self, rho: &DensityMatrix) -> Result<Complex64> {
        let factors = vec![rho.matrix().clone(); self.copies];
        permutation_expectation(&factors, self.perm_a, self.perm_b, rho.dims())
    }

    /// Dense unitary on the interleaved slots `A_1 B_1 A_2 B_2 …`.
    pub fn operator(&self, dims: Dims) -> Result<ComplexMatrix> {
        interleaved_permutation(self.perm_a, self.perm_b, dims)
    }
}

fn interleaved_permutation(perm_a: &[usize], perm_b: &[usize], dims: Dims) -> Result<ComplexMatrix> {
    let k = perm_a.len();
    let slot_dims: Vec<usize> = (0..2 * k).map(|s| if s % 2 == 0 { dims.a } else { dims.b }).collect();
    let mut perm = vec![0; 2 * k];
    for i in 0..k {
        perm[2 * i] = 2 * perm_a[i];
        perm[2 * i + 1] = 2 * perm_b[i] + 1;
    }
    slot_permutation_matrix(&slot_dims, &perm)
}

/// Values of the nine trace functionals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceFunctionals {
    pub purity: f64,
    pub trace_rho3: f64,
    pub trace_rho4: f64,
    pub purity_a: f64,
    pub purity_b: f64,
    /// `Tr[ρ (I ⊗ ρ_B) ρ (I ⊗ ρ_B)]`
    pub rho_ib_rho_ib: f64,
    /// `Tr[ρ (ρ_A ⊗ ρ_B)]`
    pub rho_ab: f64,
    /// `Tr[ρ (ρ_A ⊗ I) ρ (ρ_A ⊗ I)]`
    pub rho_ai_rho_ai: f64,
    /// `Tr[ρ² (ρ_A ⊗ ρ_B)]`
    pub rho2_ab: f64,
}

impl TraceFunctionals {
    pub fn as_array(&self) -> [f64; 9] {
        [
            self.purity,
            self.trace_rho3,
            self.trace_rho4,
            self.purity_a,
            self.purity_b,
            self.rho_ib_rho_ib,
            self.rho_ab,
            self.rho_ai_rho_ai,
            self.rho2_ab,
        ]
    }

    fn from_array(v: [f64; 9]) -> Self {
        Self {
            purity: v[0],
            trace_rho3: v[1],
            trace_rho4: v[2],
            purity_a: v[3],
            purity_b: v[4],
            rho_ib_rho_ib: v[5],
            rho_ab: v[6],
            rho_ai_rho_ai: v[7],
            rho2_ab: v[8],
        }
    }
}

/// The nine functionals computed by direct matrix products and again as
/// shift-operator expectations on copies of `ρ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservableSet {
    pub dim_b: usize,
    pub direct: TraceFunctionals,
    pub shift: TraceFunctionals,
    /// Largest `|direct - shift|`, including imaginary residues.
    pub max_discrepancy: f64,
}

impl ObservableSet {
    pub fn values(&self) -> &TraceFunctionals {
        &self.direct
    }
}

fn direct_functionals(rho: &DensityMatrix) -> TraceFunctionals {
    let d = rho.dim_b();
    let m = rho.matrix();
    let ra = rho.marginal_a();
    let rb = rho.marginal_b();
    let m2 = m * m;
    let ib = kron(&identity(2), &rb);
    let ai = kron(&ra, &identity(d));
    let ab = kron(&ra, &rb);
    let re = |z: Complex64| z.re;
    TraceFunctionals {
        purity: re(m2.trace()),
        trace_rho3: re(trace_of_product(&m2, m)),
        trace_rho4: re(trace_of_product(&m2, &m2)),
        purity_a: re(trace_of_product(&ra, &ra)),
        purity_b: re(trace_of_product(&rb, &rb)),
        rho_ib_rho_ib: re(trace_of_product(&(m * &ib), &(m * &ib))),
        rho_ab: re(trace_of_product(m, &ab)),
        rho_ai_rho_ai: re(trace_of_product(&(m * &ai), &(m * &ai))),
        rho2_ab: re(trace_of_product(&m2, &ab)),
    }
}

pub fn observable_set(rho: &DensityMatrix) -> Result<ObservableSet> {
    let direct = direct_functionals(rho);
    let mut shift = [0.0; 9];
    let mut max_discrepancy: f64 = 0.0;
    for ((slot, obs), want) in shift.iter_mut().zip(&NINE_OBSERVABLES).zip(direct.as_array()) {
        let v = obs.expectation(rho)?;
        *slot = v.re;
        max_discrepancy = max_discrepancy.max((v.re - want).abs()).max(v.im.abs());
    }
    if max_discrepancy > ROUTE_CONSISTENCY {
        return Err(Error::Inconsistent { quantity: "trace functionals", delta: max_discrepancy });
    }
    Ok(ObservableSet { dim_b: rho.dim_b(), direct, shift: TraceFunctionals::from_array(shift), max_discrepancy })
}

/// `Tr S = Tr[ρ²] - Tr[ρ_B²]/2`, valid for every `d`.
pub fn trace_s_from_traces(obs: &ObservableSet) -> f64 {
    obs.direct.purity - obs.direct.purity_b / 2.0
}

/// Two-qubit `Tr S²` as a polynomial in the nine trace functionals.
///
/// The coefficients are specific to `d = 2`; for larger B use
/// [`trace_s2_centered`].
pub fn trace_s2_from_traces(obs: &ObservableSet) -> Result<f64> {
    if obs.dim_b != 2 {
        return Err(Error::InvalidParameter(format!(
            "the nine-functional polynomial for Tr S^2 holds for two qubits only (dim_b = {})",
            obs.dim_b
        )));
    }
    let f = &obs.direct;
    let (p, a, b) = (f.purity, f.purity_a, f.purity_b);
    Ok(0.25
        * (-2.0 - 8.0 * f.trace_rho4 + 8.0 * f.trace_rho3 + 6.0 * p * p - 2.0 * p * (5.0 + b) - 2.0 * a * a + 10.0 * a
            - b * b
            + 12.0 * b
            - 6.0 * a * b
            + 4.0 * f.rho_ib_rho_ib
            - 24.0 * f.rho_ab
            + 8.0 * f.rho_ai_rho_ai
            + 8.0 * f.rho2_ab))
}

/// `Tr S²` for any `d` as a four-copy overlap of the centered operator
/// `M = ρ - (I/2) ⊗ ρ_B`.
///
/// Writing `M = Σ_{aa'} |a⟩⟨a'| ⊗ M_{aa'}`,
/// `Tr S² = Σ Tr[M_{a0 a3} M_{a1 a2}] Tr[M_{a2 a1} M_{a3 a0}]`, which is the
/// expectation of `V_{A1A4} V_{A2A3} ⊗ V_{B1B2} V_{B3B4}` on `M^{⊗4}`.
pub fn trace_s2_centered(rho: &DensityMatrix) -> f64 {
    let d = rho.dim_b();
    let half = Complex64::from(0.5);
    let centered = rho.matrix() - kron(&identity(2), &rho.marginal_b()) * half;
    let block = |a: usize, b: usize| centered.view((a * d, b * d), (d, d)).into_owned();
    let blocks = [[block(0, 0), block(0, 1)], [block(1, 0), block(1, 1)]];
    // gram[p][q][r][s] = Tr[M_pq M_rs]
    let mut gram = [[[[Complex64::from(0.0); 2]; 2]; 2]; 2];
    for p in 0..2 {
        for q in 0..2 {
            for r in 0..2 {
                for s in 0..2 {
                    gram[p][q][r][s] = trace_of_product(&blocks[p][q], &blocks[r][s]);
                }
            }
        }
    }
    let mut acc = Complex64::from(0.0);
    for bits in 0..16usize {
        let [a0, a1, a2, a3] = [bits & 1, (bits >> 1) & 1, (bits >> 2) & 1, (bits >> 3) & 1];
        acc += gram[a0][a3][a1][a2] * gram[a2][a1][a3][a0];
    }
    acc.re
}

/// `Q` from trace functionals: the two-qubit polynomial when `d = 2`, the
/// centered four-copy overlap otherwise. Returns `(Q, Tr S, Tr S²)`.
pub fn q_via_traces(rho: &DensityMatrix) -> Result<(f64, f64, f64)> {
    let obs = observable_set(rho)?;
    let trace_s = trace_s_from_traces(&obs);
    let trace_s2 = if rho.dim_b() == 2 { trace_s2_from_traces(&obs)? } else { trace_s2_centered(rho) };
    Ok((q_from_traces(trace_s, trace_s2).0, trace_s, trace_s2))
}

/// Tensor product of antisymmetric projectors on pairs of A slots and pairs of
/// B slots of `copies` copies; unpaired slots carry the identity.
#[derive(Debug, Clone, Copy)]
pub struct ProjectorSpec {
    pub name: &'static str,
    pub copies: usize,
    pub a_pairs: &'static [(usize, usize)],
    pub b_pairs: &'static [(usize, usize)],
}

/// `c_1 … c_7`. Copies are numbered from zero, so `(0, 3)` pairs the first and
/// fourth copy.
pub const SCHEME: [ProjectorSpec; 7] = [
    ProjectorSpec { name: "c1", copies: 2, a_pairs: &[(0, 1)], b_pairs: &[(0, 1)] },
    ProjectorSpec { name: "c2", copies: 2, a_pairs: &[(0, 1)], b_pairs: &[] },
    ProjectorSpec { name: "c3", copies: 2, a_pairs: &[], b_pairs: &[(0, 1)] },
    ProjectorSpec { name: "c4", copies: 4, a_pairs: &[(0, 3), (1, 2)], b_pairs: &[(0, 1), (2, 3)] },
    ProjectorSpec { name: "c5", copies: 4, a_pairs: &[(0, 3)], b_pairs: &[(0, 1), (2, 3)] },
    ProjectorSpec { name: "c6", copies: 4, a_pairs: &[(0, 3), (1, 2)], b_pairs: &[(0, 1)] },
    ProjectorSpec { name: "c7", copies: 4, a_pairs: &[(1, 2)], b_pairs: &[(0, 1)] },
];

impl ProjectorSpec {
    /// Expands every `(I - V)/2` and sums signed permutation expectations.
    pub fn expectation(&self, rho: &DensityMatrix) -> Result<f64> {
        let factors = vec![rho.matrix().clone(); self.copies];
        let pairs = self.a_pairs.len() + self.b_pairs.len();
        let mut total = 0.0;
        for mask in 0u32..(1 << pairs) {
            let mut perm_a: Vec<usize> = (0..self.copies).collect();
            let mut perm_b = perm_a.clone();
            let all = self.a_pairs.iter().map(|p| (p, true)).chain(self.b_pairs.iter().map(|p| (p, false)));
            for (bit, (&(i, j), on_a)) in all.enumerate() {
                if mask & (1 << bit) != 0 {
                    let perm = if on_a { &mut perm_a } else { &mut perm_b };
                    perm.swap(i, j);
                }
            }
            let sign = if mask.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            total += sign * permutation_expectation(&factors, &perm_a, &perm_b, rho.dims())?.re;
        }
        Ok(total / (1u64 << pairs) as f64)
    }

    /// Dense projector on the interleaved slots `A_1 B_1 A_2 B_2 …`.
    pub fn dense_operator(&self, dims: Dims) -> Result<ComplexMatrix> {
        let n = dims.total().pow(self.copies as u32);
        if n > DENSE_LIMIT {
            return Err(Error::InvalidParameter(format!("dense operator of side {n} exceeds {DENSE_LIMIT}")));
        }
        let id: Vec<usize> = (0..self.copies).collect();
        let half = Complex64::from(0.5);
        let mut op = identity(n);
        for &(i, j) in self.a_pairs {
            let mut pa = id.clone();
            pa.swap(i, j);
            let w = interleaved_permutation(&pa, &id, dims)?;
            op *= (identity(n) - w) * half;
        }
        for &(i, j) in self.b_pairs {
            let mut pb = id.clone();
            pb.swap(i, j);
            let w = interleaved_permutation(&id, &pb, dims)?;
            op *= (identity(n) - w) * half;
        }
        Ok(op)
    }

    /// `Tr[P ρ^{⊗k}]` with everything built densely. Test oracle for small `d`.
    pub fn dense_expectation(&self, rho: &DensityMatrix) -> Result<f64> {
        let op = self.dense_operator(rho.dims())?;
        let mut joint = rho.matrix().clone();
        for _ in 1..self.copies {
            joint = kron(&joint, rho.matrix());
        }
        Ok(trace_of_product(&op, &joint).re)
    }
}

/// `c_1 … c_3` for `copies = 2`, `c_4 … c_7` for `copies = 4`.
pub fn projector_scheme(rho: &DensityMatrix, copies: usize) -> Result<Vec<f64>> {
    let range = match copies {
        2 => 0..3,
        4 => 3..7,
        other => return Err(Error::UnsupportedCopies(other)),
    };
    SCHEME[range].iter().map(|spec| spec.expectation(rho)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectorExpectations {
    /// `c_1 … c_7`.
    pub c: [f64; 7],
    pub mode: Mode,
    /// Shots per projector (sampled mode).
    pub shots: Option<u64>,
    /// Number of `+1` outcomes per projector (sampled mode).
    pub successes: Option<[u64; 7]>,
    pub standard_error: Option<[f64; 7]>,
    pub seed: Option<u64>,
}

impl ProjectorExpectations {
    /// Number of projector expectation values consumed downstream.
    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// All seven projector expectations, exactly.
pub fn exact_scheme(rho: &DensityMatrix) -> Result<ProjectorExpectations> {
    let two = projector_scheme(rho, 2)?;
    let four = projector_scheme(rho, 4)?;
    let mut c = [0.0; 7];
    c[..3].copy_from_slice(&two);
    c[3..].copy_from_slice(&four);
    Ok(ProjectorExpectations { c, mode: Mode::Exact, shots: None, successes: None, standard_error: None, seed: None })
}

/// Each `c_i` estimated from `shots` independent binary projector outcomes.
pub fn sampled_scheme(rho: &DensityMatrix, shots: u64, seed: u64) -> Result<ProjectorExpectations> {
    if shots == 0 {
        return Err(Error::InvalidParameter("shots must be at least 1".into()));
    }
    let exact = exact_scheme(rho)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let successes = draw_counts(&exact.c, shots, &mut rng);
    Ok(from_counts(successes, shots, seed))
}

fn draw_counts(probs: &[f64; 7], shots: u64, rng: &mut ChaCha8Rng) -> [u64; 7] {
    probs.map(|p| {
        let p = p.clamp(0.0, 1.0);
        Binomial::new(shots, p).expect("probability in [0, 1]").sample(rng)
    })
}

fn from_counts(successes: [u64; 7], shots: u64, seed: u64) -> ProjectorExpectations {
    let n = shots as f64;
    let c = successes.map(|k| k as f64 / n);
    let standard_error = c.map(|p| (p * (1.0 - p) / n).sqrt());
    ProjectorExpectations {
        c,
        mode: Mode::Sampled,
        shots: Some(shots),
        successes: Some(successes),
        standard_error: Some(standard_error),
        seed: Some(seed),
    }
}

/// `Tr S = 4 c_1 - 2 c_2 - c_3 + 1/2`.
pub fn trace_s_from_projectors(c: &[f64; 7]) -> f64 {
    4.0 * c[0] - 2.0 * c[1] - c[2] + 0.5
}

/// `Tr S² = 16 c_4 + 8 (c_7 - c_5 - 2 c_6) + c_3² + 4 c_2² - c_3 - 2 c_2 + 1/4`.
pub fn trace_s2_from_projectors(c: &[f64; 7]) -> f64 {
    let [_, c2, c3, c4, c5, c6, c7] = *c;
    16.0 * c4 + 8.0 * (c7 - c5 - 2.0 * c6) + c3 * c3 + 4.0 * c2 * c2 - c3 - 2.0 * c2 + 0.25
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QEstimate {
    pub q_hat: f64,
    pub trace_s_hat: f64,
    pub trace_s2_hat: f64,
    /// Bootstrap standard error; zero in exact mode.
    pub stderr_q: f64,
    pub shots: Option<u64>,
    pub seed: Option<u64>,
    /// The point estimate hit a negative radicand.
    pub clamped: bool,
    pub projectors_used: usize,
}

/// `Q` from the seven projector expectations, with a bootstrap standard error
/// over resampled shot counts in sampled mode.
pub fn q_from_measurements(px: &ProjectorExpectations) -> QEstimate {
    let trace_s_hat = trace_s_from_projectors(&px.c);
    let trace_s2_hat = trace_s2_from_projectors(&px.c);
    let (q_hat, clamped) = q_from_traces(trace_s_hat, trace_s2_hat);
    let stderr_q = match (px.mode, px.shots) {
        (Mode::Sampled, Some(shots)) => bootstrap_stderr(&px.c, shots, px.seed.unwrap_or(0)),
        _ => 0.0,
    };
    QEstimate {
        q_hat,
        trace_s_hat,
        trace_s2_hat,
        stderr_q,
        shots: px.shots,
        seed: px.seed,
        clamped,
        projectors_used: px.len(),
    }
}

fn bootstrap_stderr(c_hat: &[f64; 7], shots: u64, seed: u64) -> f64 {
    // resampling the 0/1 outcomes of one projector with replacement is a
    // binomial draw at the observed frequency
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let n = shots as f64;
    let qs: Vec<f64> = (0..BOOTSTRAP_REPLICATES)
        .map(|_| {
            let c = draw_counts(c_hat, shots, &mut rng).map(|k| k as f64 / n);
            q_from_traces(trace_s_from_projectors(&c), trace_s2_from_projectors(&c)).0
        })
        .collect();
    let mean = qs.iter().sum::<f64>() / qs.len() as f64;
    let var = qs.iter().map(|q| (q - mean).powi(2)).sum::<f64>() / (qs.len() - 1) as f64;
    var.sqrt()
}

/// `Tr S = 1/2 - 2 Tr[P⁻ ρ^{⊗2}] + Tr[P⁻ ρ_B^{⊗2}]` with the first projector
/// acting on the full `2d`-dimensional copies.
pub fn trace_s_from_global_projector(rho: &DensityMatrix) -> Result<f64> {
    let n = 2 * rho.dim_b();
    let global = if n * n <= DENSE_LIMIT {
        let m = rho.matrix();
        trace_of_product(&antisym_projector(n), &kron(m, m)).re
    } else {
        let factors = [rho.matrix().clone(), rho.matrix().clone()];
        let swap = permutation_expectation(&factors, &[1, 0], &[1, 0], rho.dims())?.re;
        (1.0 - swap) / 2.0
    };
    let rb = rho.marginal_b();
    let local = trace_of_product(&antisym_projector(rho.dim_b()), &kron(&rb, &rb)).re;
    Ok(0.5 - 2.0 * global + local)
}

/// Q from the global two-copy projector for `Tr S` and `c_2 … c_7` for `Tr S²`.
pub fn q_via_global_projector(rho: &DensityMatrix) -> Result<f64> {
    let trace_s = trace_s_from_global_projector(rho)?;
    let px = exact_scheme(rho)?;
    Ok(q_from_traces(trace_s, trace_s2_from_projectors(&px.c)).0)
}

fn check_unitary(op: &ComplexMatrix) -> Result<()> {
    let n = op.nrows();
    if op.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: op.ncols() });
    }
    let defect = max_abs_diff(&(op.adjoint() * op), &identity(n));
    if defect > 1e-10 {
        return Err(Error::NotUnitary(defect));
    }
    Ok(())
}

fn joint_factors(op: &ComplexMatrix, factors: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    if factors.is_empty() || factors.len() > 4 {
        return Err(Error::UnsupportedCopies(factors.len()));
    }
    check_unitary(op)?;
    let mut joint = factors[0].clone();
    for f in &factors[1..] {
        joint = kron(&joint, f);
    }
    if joint.nrows() != op.nrows() {
        return Err(Error::DimensionMismatch { expected: op.nrows(), got: joint.nrows() });
    }
    Ok(joint)
}

/// Visibility `v = Tr[O ρ_1 ⊗ … ⊗ ρ_k]` of the interferometer with a
/// controlled-`O` gate.
pub fn circuit_visibility(op: &ComplexMatrix, factors: &[ComplexMatrix]) -> Result<Complex64> {
    let joint = joint_factors(op, factors)?;
    Ok(trace_of_product(op, &joint))
}

/// Joint state of ancilla and system after preparing the ancilla in `|+⟩`
/// and applying controlled-`O`: `(1/2) [[F, F O^†], [O F, O F O^†]]` with the
/// ancilla as the leading factor.
pub fn interferometer_state(op: &ComplexMatrix, factors: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    let joint = joint_factors(op, factors)?;
    let n = joint.nrows();
    let half = Complex64::from(0.5);
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    out.view_mut((0, 0), (n, n)).copy_from(&(&joint * half));
    out.view_mut((0, n), (n, n)).copy_from(&(&joint * op.adjoint() * half));
    out.view_mut((n, 0), (n, n)).copy_from(&(op * &joint * half));
    out.view_mut((n, n), (n, n)).copy_from(&(op * &joint * op.adjoint() * half));
    Ok(out)
}

/// Ancilla `(⟨σ_1⟩, ⟨σ_2⟩)` of [`interferometer_state`], equal to
/// `(Re v, Im v)`.
pub fn interferometer_readout(op: &ComplexMatrix, factors: &[ComplexMatrix]) -> Result<(f64, f64)> {
    let state = interferometer_state(op, factors)?;
    let n = state.nrows() / 2;
    let lower = state.view((n, 0), (n, n)).trace();
    let upper = state.view((0, n), (n, n)).trace();
    let sigma1 = (lower + upper).re;
    let sigma2 = (crate::tensor::I * (upper - lower)).re;
    Ok((sigma1, sigma2))
}
