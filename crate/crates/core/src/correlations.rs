//! Closed-form correlation measures of qubit-qudit states.
//!
//! Everything here is a function of the real symmetric 3×3 matrix
//!
//! ```text
//! S = (x xᵀ + t tᵀ) / (2d)
//! ```
//!
//! built from the Bloch decomposition of the state (`d = 2` gives the familiar
//! factor 1/4). Its eigenvalues solve a cubic with three real roots,
//!
//! ```text
//! k_i = Tr S/3 + sqrt(6 Tr S² - 2 (Tr S)²)/3 · cos((θ + α_i)/3),   α_i ∈ {0, 2π, 4π}
//! θ   = arccos[(2 (Tr S)³ - 9 Tr S Tr S² + 9 Tr S³) · sqrt(2 / (3 Tr S² - (Tr S)²)³)]
//! ```
//!
//! and `k_1` (α = 0) is always the largest. The geometric discord is
//! `D_G = 2 (Tr S - k_1)`, and setting `θ = 0` gives the observable lower bound
//!
//! ```text
//! Q = (2/3) (2 Tr S - sqrt(6 Tr S² - 2 (Tr S)²))
//! ```
//!
//! which depends on `Tr S` and `Tr S²` only.
//!
//! The trace invariants and the arccos argument are evaluated in double-double
//! arithmetic. With plain `f64` the argument sits within rounding of ±1 when two
//! eigenvalues coincide (every pure state), and `arccos` turns a 1e-16 error
//! into a 1e-8 error in the two smaller roots.

use nalgebra::Matrix3;
use serde::Serialize;
use twofloat::TwoFloat;

use crate::states::{bloch_decompose, DensityMatrix};
use crate::tensor::{hermitian_eigenvalues, partial_transpose, Subsystem};

/// The three offsets `α_i` of the trigonometric cubic roots.
pub const ALPHAS: [f64; 3] = [0.0, 2.0 * std::f64::consts::PI, 4.0 * std::f64::consts::PI];

/// Radicand `6 Tr S² - 2 (Tr S)²` at or below which `S` is treated as isotropic.
pub const DEGENERATE_RADICAND: f64 = 1e-14;

const CLAMP_LOG_THRESHOLD: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SMatrix {
    pub s: Matrix3<f64>,
    pub trace_s: f64,
    pub trace_s2: f64,
    pub trace_s3: f64,
    /// `6 Tr S² - 2 (Tr S)²`, clamped at zero.
    pub radicand: f64,
    pub theta: f64,
    /// Roots in descending order. For `θ ∈ [0, π]` these come from
    /// `α = 0, 4π, 2π` respectively.
    pub k: [f64; 3],
}

impl SMatrix {
    /// Evaluates the trace invariants, `θ` and the cubic roots of a symmetric `s`.
    pub fn from_matrix(s: Matrix3<f64>) -> Self {
        let tf = |x: f64| TwoFloat::from(x);
        let mut t = tf(0.0);
        for i in 0..3 {
            t += tf(s[(i, i)]);
        }
        let mut t2 = tf(0.0);
        for i in 0..3 {
            for j in 0..3 {
                t2 += TwoFloat::new_mul(s[(i, j)], s[(j, i)]);
            }
        }
        let mut t3 = tf(0.0);
        for i in 0..3 {
            for j in 0..3 {
                for l in 0..3 {
                    t3 += TwoFloat::new_mul(s[(i, j)], s[(j, l)]) * tf(s[(l, i)]);
                }
            }
        }

        let den = tf(3.0) * t2 - t * t;
        let radicand_dd = tf(2.0) * den;
        let raw_radicand = radicand_dd.hi();
        if raw_radicand < -CLAMP_LOG_THRESHOLD {
            log::warn!("negative radicand {raw_radicand:.3e} clamped to zero");
        }
        let radicand = raw_radicand.max(0.0);
        let trace_s = t.hi();

        let theta = if radicand <= DEGENERATE_RADICAND {
            0.0
        } else {
            let num = tf(2.0) * t * t * t - tf(9.0) * t * t2 + tf(9.0) * t3;
            let arg = num * (tf(2.0) / (den * den * den)).sqrt();
            stable_arccos(arg)
        };

        let amplitude = radicand.sqrt() / 3.0;
        let mut k = ALPHAS.map(|alpha| trace_s / 3.0 + amplitude * ((theta + alpha) / 3.0).cos());
        // double roots at θ = 0 or θ = π can come out swapped by rounding
        k.sort_by(|a, b| b.total_cmp(a));
        SMatrix { s, trace_s, trace_s2: t2.hi(), trace_s3: t3.hi(), radicand, theta, k }
    }

    /// Tight lower bound `Q` on the geometric discord.
    pub fn q(&self) -> f64 {
        (2.0 / 3.0 * (2.0 * self.trace_s - self.radicand.sqrt())).max(0.0)
    }

    pub fn geometric_discord(&self) -> f64 {
        (2.0 * (self.trace_s - self.k[0])).max(0.0)
    }

    /// `4 Tr S / 3`.
    pub fn discord_upper_bound(&self) -> f64 {
        4.0 * self.trace_s / 3.0
    }
}

/// `arccos` of a double-double argument, clamped to `[-1, 1]`, that keeps full
/// absolute accuracy near the endpoints by using `1 ∓ arg` directly.
fn stable_arccos(arg: TwoFloat) -> f64 {
    let a = arg.hi();
    if a.abs() > 1.0 + CLAMP_LOG_THRESHOLD {
        log::warn!("arccos argument {a:.12} clamped to [-1, 1]");
    }
    if a >= 1.0 {
        return 0.0;
    }
    if a <= -1.0 {
        return std::f64::consts::PI;
    }
    if a > 0.5 {
        let gap = (TwoFloat::from(1.0) - arg).hi().max(0.0);
        2.0 * (gap / 2.0).sqrt().asin()
    } else if a < -0.5 {
        let gap = (TwoFloat::from(1.0) + arg).hi().max(0.0);
        std::f64::consts::PI - 2.0 * (gap / 2.0).sqrt().asin()
    } else {
        a.acos()
    }
}

pub fn s_matrix(rho: &DensityMatrix) -> SMatrix {
    let bloch = bloch_decompose(rho);
    let x = bloch.x();
    let t = bloch.t();
    let d = rho.dim_b() as f64;
    let s = (x * x.transpose() + &t * t.transpose()) / (2.0 * d);
    let s = Matrix3::from_fn(|i, j| 0.5 * (s[(i, j)] + s[(j, i)]));
    SMatrix::from_matrix(s)
}

pub fn k_eigenvalues(s: &SMatrix) -> [f64; 3] {
    s.k
}

pub fn geometric_discord(rho: &DensityMatrix) -> f64 {
    s_matrix(rho).geometric_discord()
}

pub fn q_measure(rho: &DensityMatrix) -> f64 {
    s_matrix(rho).q()
}

/// `Q` from the two trace invariants, with a negative radicand clamped to zero.
///
/// Returns the value and whether the clamp was applied.
pub fn q_from_traces(trace_s: f64, trace_s2: f64) -> (f64, bool) {
    let radicand = 6.0 * trace_s2 - 2.0 * trace_s * trace_s;
    let clamped = radicand < -DEGENERATE_RADICAND;
    if radicand < -CLAMP_LOG_THRESHOLD {
        log::debug!("radicand {radicand:.3e} clamped to zero");
    }
    let root = if radicand <= DEGENERATE_RADICAND { 0.0 } else { radicand.sqrt() };
    (2.0 / 3.0 * (2.0 * trace_s - root), clamped)
}

/// `N²` with `N = ‖ρ^{T_A}‖₁ - 1`.
pub fn negativity_squared(rho: &DensityMatrix) -> f64 {
    let pt = partial_transpose(rho.matrix(), rho.dims(), Subsystem::A).expect("validated shape");
    let trace_norm: f64 = hermitian_eigenvalues(&pt).iter().map(|x| x.abs()).sum();
    let n = (trace_norm - 1.0).max(0.0);
    n * n
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationReport {
    pub q: f64,
    pub d_g: f64,
    pub d_g_upper: f64,
    pub negativity_sq: f64,
    pub k: [f64; 3],
    pub trace_s: f64,
    pub trace_s2: f64,
}

pub fn correlation_report(rho: &DensityMatrix) -> CorrelationReport {
    let s = s_matrix(rho);
    CorrelationReport {
        q: s.q(),
        d_g: s.geometric_discord(),
        d_g_upper: s.discord_upper_bound(),
        negativity_sq: negativity_squared(rho),
        k: s.k,
        trace_s: s.trace_s,
        trace_s2: s.trace_s2,
    }
}

/// Search resolution of [`discord_oracle`].
#[derive(Debug, Clone, Copy)]
pub struct OracleGrid {
    pub theta_steps: usize,
    pub phi_steps: usize,
    /// Rounds of local zoom around the best grid point.
    pub refinements: usize,
    /// Spacing reduction per round.
    pub zoom: f64,
}

impl Default for OracleGrid {
    fn default() -> Self {
        Self { theta_steps: 64, phi_steps: 128, refinements: 8, zoom: 4.0 }
    }
}

/// Geometric discord by direct minimization of `2‖ρ - χ‖²` over the
/// classical-quantum states.
///
/// For a fixed measurement basis `{|n⟩, |−n⟩}` on A the closest `χ` is the
/// dephased state `Π_n(ρ) = (ρ + N ρ N)/2` with `N = (n·σ) ⊗ I`, so the
/// objective is `2‖ρ - Π_n(ρ)‖² = Tr[ρ²] - Tr[ρ N ρ N]`. It is minimized over
/// the Bloch angles of `n` by a coarse grid followed by local zooms. Nothing
/// here uses the Bloch decomposition or the cubic formula.
pub fn discord_oracle(rho: &DensityMatrix, grid: OracleGrid) -> f64 {
    let objective = DephasingObjective::new(rho);
    let pi = std::f64::consts::PI;
    let mut d_theta = pi / grid.theta_steps as f64;
    let mut d_phi = 2.0 * pi / grid.phi_steps as f64;
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..=grid.theta_steps {
        let theta = i as f64 * d_theta;
        for j in 0..grid.phi_steps {
            let phi = j as f64 * d_phi;
            let v = objective.eval(theta, phi);
            if v < best.0 {
                best = (v, theta, phi);
            }
        }
    }
    // each round scans ±2 of the previous spacings at the finer spacing
    let reach = (2.0 * grid.zoom).round() as i32;
    for _ in 0..grid.refinements {
        let (_, t0, p0) = best;
        d_theta /= grid.zoom;
        d_phi /= grid.zoom;
        for i in -reach..=reach {
            let theta = (t0 + i as f64 * d_theta).clamp(0.0, pi);
            for j in -reach..=reach {
                let phi = p0 + j as f64 * d_phi;
                let v = objective.eval(theta, phi);
                if v < best.0 {
                    best = (v, theta, phi);
                }
            }
        }
    }
    best.0.max(0.0)
}

/// `Tr[ρ²] - Tr[ρ N ρ N]` from the Gram table of the A-blocks of `ρ`.
pub(crate) struct DephasingObjective {
    purity: f64,
    // gram[a][b][c][e] = Tr[ρ_ab ρ_ce]
    gram: [[[[num_complex::Complex64; 2]; 2]; 2]; 2],
}

impl DephasingObjective {
    pub(crate) fn new(rho: &DensityMatrix) -> Self {
        let d = rho.dim_b();
        let m = rho.matrix();
        let blocks: Vec<Vec<crate::tensor::ComplexMatrix>> =
            (0..2).map(|a| (0..2).map(|b| m.view((a * d, b * d), (d, d)).into_owned()).collect()).collect();
        let mut gram = [[[[crate::tensor::ZERO; 2]; 2]; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    for e in 0..2 {
                        gram[a][b][c][e] = crate::tensor::trace_of_product(&blocks[a][b], &blocks[c][e]);
                    }
                }
            }
        }
        Self { purity: rho.purity(), gram }
    }

    pub(crate) fn eval(&self, theta: f64, phi: f64) -> f64 {
        use num_complex::Complex64;
        let (nx, ny, nz) = (theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos());
        let n =
            [[Complex64::new(nz, 0.0), Complex64::new(nx, -ny)], [Complex64::new(nx, ny), Complex64::new(-nz, 0.0)]];
        let mut acc = crate::tensor::ZERO;
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    for e in 0..2 {
                        acc += self.gram[a][b][c][e] * n[b][c] * n[e][a];
                    }
                }
            }
        }
        self.purity - acc.re
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{
        bell_phi_plus, dephase_a, maximally_mixed, random_classical_quantum, random_pure, random_state, werner_state,
    };
    use crate::tensor::trace_of_product;
    use approx::assert_abs_diff_eq;

    /// Reference eigenvalues from a direct symmetric eigensolve, descending.
    fn eigensolve(s: &Matrix3<f64>) -> [f64; 3] {
        let mut e: Vec<f64> = s.symmetric_eigen().eigenvalues.iter().copied().collect();
        e.sort_by(|a, b| b.partial_cmp(a).unwrap());
        [e[0], e[1], e[2]]
    }

    #[test]
    fn maximally_mixed_has_zero_s() {
        for d in [2, 3, 5] {
            let s = s_matrix(&maximally_mixed(d).unwrap());
            assert!(s.s.norm() < 1e-15);
            assert_eq!(s.trace_s, 0.0);
            assert_eq!(s.k, [0.0; 3]);
        }
    }

    #[test]
    fn bell_state_fixtures() {
        let rho = bell_phi_plus();
        let s = s_matrix(&rho);
        let quarter = Matrix3::identity() / 4.0;
        assert!((s.s - quarter).norm() < 1e-15);
        assert_abs_diff_eq!(s.trace_s, 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(s.trace_s2, 3.0 / 16.0, epsilon = 1e-15);
        assert!(s.radicand < 1e-15);
        for k in s.k {
            assert_abs_diff_eq!(k, 0.25, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(geometric_discord(&rho), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(q_measure(&rho), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(negativity_squared(&rho), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn trace_s_matches_purity_identity() {
        for seed in 0..50 {
            let rho = random_state(2, 1 + seed as usize % 4, seed).unwrap();
            let rb = rho.marginal_b();
            let want = rho.purity() - trace_of_product(&rb, &rb).re / 2.0;
            assert_abs_diff_eq!(s_matrix(&rho).trace_s, want, epsilon = 1e-10);
        }
    }

    #[test]
    fn s_matrix_is_gram_of_pauli_marginals() {
        // S_ij = Tr[K_i K_j] / 2 with K_i = Tr_A[(σ_i ⊗ I) ρ], a basis-free route.
        for d in [2, 3, 4] {
            let rho = random_state(d, 2 * d, 40 + d as u64).unwrap();
            let ks = crate::states::pauli_weighted_marginals(&rho);
            let s = s_matrix(&rho);
            for i in 0..3 {
                for j in 0..3 {
                    let want = trace_of_product(&ks[i + 1], &ks[j + 1]).re / 2.0;
                    assert_abs_diff_eq!(s.s[(i, j)], want, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn cubic_roots_match_eigensolve() {
        for seed in 0..500 {
            let d = 2 + seed as usize % 3;
            let rank = 1 + seed as usize % (2 * d);
            let s = s_matrix(&random_state(d, rank, seed).unwrap());
            let want = eigensolve(&s.s);
            for (k, w) in s.k.iter().zip(want) {
                assert!((k - w).abs() < 1e-9, "seed {seed}: {:?} vs {want:?}", s.k);
            }
            assert!(s.k[0] >= s.k[1] && s.k[1] >= s.k[2]);
            assert_abs_diff_eq!(s.k.iter().sum::<f64>(), s.trace_s, epsilon = 1e-10);
        }
    }

    #[test]
    fn cubic_roots_degenerate_cases() {
        for c in [0.0, 1e-6, 0.01, 0.25, 1.0] {
            let s = SMatrix::from_matrix(Matrix3::identity() * c);
            assert_eq!(s.theta, 0.0);
            for k in s.k {
                assert_abs_diff_eq!(k, c, epsilon = 1e-15);
            }
            assert_abs_diff_eq!(s.q(), s.geometric_discord(), epsilon = 1e-15);
            assert_abs_diff_eq!(s.q(), 4.0 * s.trace_s / 3.0, epsilon = 1e-15);
        }
        // double roots at both ends of the arccos range
        for s in [Matrix3::from_diagonal(&[0.4, 0.1, 0.1].into()), Matrix3::from_diagonal(&[0.3, 0.3, 0.05].into())] {
            let got = SMatrix::from_matrix(s);
            for (k, w) in got.k.iter().zip(eigensolve(&s)) {
                assert!((k - w).abs() < 1e-14, "{:?}", got.k);
            }
        }
    }

    #[test]
    fn werner_half_is_quarter() {
        let rho = werner_state(0.5).unwrap();
        assert_abs_diff_eq!(q_measure(&rho), 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(geometric_discord(&rho), 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(discord_oracle(&rho, OracleGrid::default()), 0.25, epsilon = 1e-6);
    }

    #[test]
    fn classical_quantum_states_have_zero_discord() {
        for seed in 0..30 {
            let chi = random_classical_quantum(2 + seed as usize % 3, seed).unwrap();
            assert!(geometric_discord(&chi) < 1e-9);
            assert!(q_measure(&chi) < 1e-9);
        }
        for seed in 0..5 {
            let chi = random_classical_quantum(2, 900 + seed).unwrap();
            assert!(discord_oracle(&chi, OracleGrid::default()) < 1e-8);
        }
    }

    #[test]
    fn product_states_are_uncorrelated() {
        let a = random_state(2, 4, 1).unwrap().marginal_a();
        let b = random_state(3, 6, 2).unwrap().marginal_b();
        let rho = crate::states::product_state(&a, &b).unwrap();
        assert!(q_measure(&rho) < 1e-12);
        assert!(negativity_squared(&rho) < 1e-20);
    }

    #[test]
    fn oracle_objective_is_dephasing_distance() {
        let rho = random_state(3, 6, 8).unwrap();
        let obj = DephasingObjective::new(&rho);
        for (theta, phi) in [(0.0, 0.0), (0.7, 2.1), (2.9, 5.0)] {
            let chi = dephase_a(&rho, theta, phi);
            let diff = rho.matrix() - chi.matrix();
            let direct = 2.0 * trace_of_product(&diff, &diff.adjoint()).re;
            assert_abs_diff_eq!(obj.eval(theta, phi), direct, epsilon = 1e-13);
        }
    }

    #[test]
    fn oracle_agrees_with_closed_form() {
        for seed in 0..20 {
            let rho = random_state(2, 1 + seed as usize % 4, 300 + seed).unwrap();
            let closed = geometric_discord(&rho);
            let brute = discord_oracle(&rho, OracleGrid::default());
            assert!((closed - brute).abs() < 1e-6, "seed {seed}: {closed} vs {brute}");
        }
        let rho = random_state(4, 8, 5).unwrap();
        assert!((geometric_discord(&rho) - discord_oracle(&rho, OracleGrid::default())).abs() < 1e-6);
        assert_abs_diff_eq!(discord_oracle(&bell_phi_plus(), OracleGrid::default()), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn pure_states_saturate() {
        for seed in 0..50 {
            let rho = random_pure(2, seed).unwrap();
            let r = correlation_report(&rho);
            assert!((r.d_g - r.q).abs() < 1e-8);
            assert!((r.q - r.negativity_sq).abs() < 1e-8);
        }
    }

    #[test]
    fn report_ordering() {
        for seed in 0..100 {
            let rho = random_state(2, 1 + seed as usize % 4, 7000 + seed).unwrap();
            let r = correlation_report(&rho);
            assert!(r.negativity_sq <= r.q + 1e-10);
            assert!(r.q <= r.d_g + 1e-10);
            assert!(r.d_g <= r.d_g_upper + 1e-10);
        }
    }

    #[test]
    fn q_from_traces_clamps() {
        let (q, clamped) = q_from_traces(0.3, 0.0);
        assert!(clamped);
        assert_abs_diff_eq!(q, 0.4, epsilon = 1e-15);
        let (q, clamped) = q_from_traces(0.75, 3.0 / 16.0);
        assert!(!clamped);
        assert_abs_diff_eq!(q, 1.0, epsilon = 1e-15);
    }
}
