//! Bipartite qubit-qudit states: validation, constructors, random sampling,
//! Bloch decomposition and the JSON state file format.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Deserialize;

use crate::error::{Error, Result, Violation};
use crate::tensor::{
    gell_mann_basis, hermitian_eigenvalues, hermiticity_defect, identity, kron, partial_trace, pauli, trace_of_product,
    ComplexMatrix, Dims, Subsystem, ONE, ZERO,
};

/// Entrywise, trace and eigenvalue tolerance used by [`validate`].
pub const STATE_TOLERANCE: f64 = 1e-8;

/// A validated density matrix of a qubit (A) and a `dim_b`-level system (B).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim_b: usize,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn dim_a(&self) -> usize {
        2
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn dims(&self) -> Dims {
        Dims::qubit_qudit(self.dim_b)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn marginal_a(&self) -> ComplexMatrix {
        partial_trace(&self.matrix, self.dims(), Subsystem::A).expect("validated shape")
    }

    pub fn marginal_b(&self) -> ComplexMatrix {
        partial_trace(&self.matrix, self.dims(), Subsystem::B).expect("validated shape")
    }

    pub fn purity(&self) -> f64 {
        trace_of_product(&self.matrix, &self.matrix).re
    }

    /// `u ρ u^†` for a unitary on the full space. The result is revalidated.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Result<DensityMatrix> {
        validate(u * &self.matrix * u.adjoint(), self.dim_b)
    }

    /// Skips validation; the matrix is made exactly Hermitian.
    pub(crate) fn from_trusted(matrix: ComplexMatrix, dim_b: usize) -> Self {
        let matrix = (&matrix + matrix.adjoint()) * Complex64::from(0.5);
        Self { dim_b, matrix }
    }
}

/// Checks shape, finiteness, Hermiticity, unit trace and positivity, listing
/// every violated invariant on failure.
pub fn validate(matrix: ComplexMatrix, dim_b: usize) -> Result<DensityMatrix> {
    if dim_b < 2 {
        return Err(Error::InvalidDimension(dim_b));
    }
    let n = 2 * dim_b;
    if matrix.nrows() != n || matrix.ncols() != n {
        return Err(Error::InvalidState(vec![Violation::Shape {
            rows: matrix.nrows(),
            cols: matrix.ncols(),
            expected: n,
        }]));
    }
    if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidState(vec![Violation::NonFinite]));
    }
    let mut violations = Vec::new();
    let defect = hermiticity_defect(&matrix);
    if defect > STATE_TOLERANCE {
        violations.push(Violation::NotHermitian { max_deviation: defect });
    }
    let trace = matrix.trace().re;
    if (trace - 1.0).abs() > STATE_TOLERANCE {
        violations.push(Violation::Trace { trace });
    }
    let hermitian_part = (&matrix + matrix.adjoint()) * Complex64::from(0.5);
    let min_eigenvalue = *hermitian_eigenvalues(&hermitian_part).last().expect("nonempty");
    if min_eigenvalue < -STATE_TOLERANCE {
        violations.push(Violation::Negative { min_eigenvalue });
    }
    if violations.is_empty() {
        Ok(DensityMatrix::from_trusted(matrix, dim_b))
    } else {
        Err(Error::InvalidState(violations))
    }
}

fn complex_gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn ginibre(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    // column-major fill keeps the draw order independent of nalgebra internals
    let mut g = ComplexMatrix::zeros(rows, cols);
    for c in 0..cols {
        for r in 0..rows {
            g[(r, c)] = complex_gaussian(rng);
        }
    }
    g
}

/// `G G^† / Tr[G G^†]` with `G` a `(2d) × rank` complex Gaussian matrix.
///
/// `rank = 2d` samples the Hilbert–Schmidt measure; smaller ranks give the
/// induced measures on states of at most that rank.
pub fn random_state(d: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    let n = 2 * d;
    if rank == 0 || rank > n {
        return Err(Error::InvalidParameter(format!("rank {rank} outside 1..={n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = ginibre(n, rank, &mut rng);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    Ok(DensityMatrix::from_trusted(m / Complex64::from(tr), d))
}

/// Haar-random pure state on `2 ⊗ d`.
pub fn random_pure(d: usize, seed: u64) -> Result<DensityMatrix> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = DVector::from_fn(2 * d, |_, _| complex_gaussian(&mut rng));
    let v = &v / Complex64::from(v.norm());
    Ok(pure_state(&v, d))
}

pub(crate) fn pure_state(v: &DVector<Complex64>, d: usize) -> DensityMatrix {
    DensityMatrix::from_trusted(v * v.adjoint(), d)
}

/// Haar-random `n × n` unitary (QR of a Ginibre matrix with phase fixing).
pub fn random_unitary(n: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = ginibre(n, n, &mut rng);
    let qr = g.qr();
    let (q, r) = qr.unpack();
    let phases = DVector::from_fn(n, |i, _| {
        let x = r[(i, i)];
        if x.norm() > 0.0 {
            x / x.norm()
        } else {
            ONE
        }
    });
    q * DMatrix::from_diagonal(&phases)
}

pub fn maximally_mixed(d: usize) -> Result<DensityMatrix> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    let n = 2 * d;
    Ok(DensityMatrix::from_trusted(identity(n) / Complex64::from(n as f64), d))
}

/// `|Φ⁺⟩ = (|00⟩ + |11⟩)/√2`.
pub fn bell_phi_plus() -> DensityMatrix {
    let s = Complex64::from(std::f64::consts::FRAC_1_SQRT_2);
    let v = DVector::from_vec(vec![s, ZERO, ZERO, s]);
    pure_state(&v, 2)
}

/// `|ψ⁻⟩ = (|01⟩ - |10⟩)/√2`.
pub fn singlet() -> DensityMatrix {
    let s = Complex64::from(std::f64::consts::FRAC_1_SQRT_2);
    let v = DVector::from_vec(vec![ZERO, s, -s, ZERO]);
    pure_state(&v, 2)
}

/// `p |ψ⁻⟩⟨ψ⁻| + (1 - p) I/4`.
pub fn werner_state(p: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("Werner mixing {p} outside [0, 1]")));
    }
    let m = singlet().matrix * Complex64::from(p) + identity(4) * Complex64::from((1.0 - p) / 4.0);
    Ok(DensityMatrix::from_trusted(m, 2))
}

/// `ρ_A ⊗ ρ_B` from two single-party density matrices.
pub fn product_state(rho_a: &ComplexMatrix, rho_b: &ComplexMatrix) -> Result<DensityMatrix> {
    if rho_a.nrows() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: rho_a.nrows() });
    }
    validate(kron(rho_a, rho_b), rho_b.nrows())
}

/// Orthonormal qubit basis `{|n⟩, |−n⟩}` at Bloch angles `(θ, φ)`.
pub fn qubit_basis(theta: f64, phi: f64) -> [DVector<Complex64>; 2] {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let e = Complex64::from_polar(1.0, phi);
    [DVector::from_vec(vec![Complex64::from(c), e * s]), DVector::from_vec(vec![Complex64::from(-s), e * c])]
}

/// `χ = Σ_i p_i |i⟩⟨i| ⊗ ρ_{iB}` with `{|i⟩}` the qubit basis at `(θ, φ)`.
pub fn classical_quantum_state(
    probs: [f64; 2],
    basis_angles: (f64, f64),
    bob_states: [&ComplexMatrix; 2],
) -> Result<DensityMatrix> {
    if probs.iter().any(|p| !(0.0..=1.0).contains(p)) || (probs[0] + probs[1] - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!("invalid probabilities {probs:?}")));
    }
    let d = bob_states[0].nrows();
    if bob_states[1].nrows() != d {
        return Err(Error::DimensionMismatch { expected: d, got: bob_states[1].nrows() });
    }
    for b in bob_states {
        validate_single(b)?;
    }
    let basis = qubit_basis(basis_angles.0, basis_angles.1);
    let mut m = ComplexMatrix::zeros(2 * d, 2 * d);
    for i in 0..2 {
        let proj = &basis[i] * basis[i].adjoint();
        m += kron(&proj, bob_states[i]) * Complex64::from(probs[i]);
    }
    validate(m, d)
}

fn validate_single(m: &ComplexMatrix) -> Result<()> {
    let d = m.nrows();
    let ok = m.ncols() == d
        && hermiticity_defect(m) <= STATE_TOLERANCE
        && (m.trace().re - 1.0).abs() <= STATE_TOLERANCE
        && hermitian_eigenvalues(m).last().is_some_and(|x| *x >= -STATE_TOLERANCE);
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter("Bob state is not a density matrix".into()))
    }
}

/// Random member of the classical-quantum set: random weights, basis and
/// Bob states of random rank.
pub fn random_classical_quantum(d: usize, seed: u64) -> Result<DensityMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p: f64 = rng.random();
    let theta = rng.random::<f64>() * std::f64::consts::PI;
    let phi = rng.random::<f64>() * std::f64::consts::TAU;
    let mut bob = Vec::with_capacity(2);
    for _ in 0..2 {
        let rank = rng.random_range(1..=d);
        let g = ginibre(d, rank, &mut rng);
        let m = &g * g.adjoint();
        let tr = m.trace().re;
        bob.push(m / Complex64::from(tr));
    }
    classical_quantum_state([p, 1.0 - p], (theta, phi), [&bob[0], &bob[1]])
}

/// Applies the complete projective measurement on A in the basis at `(θ, φ)`.
pub fn dephase_a(rho: &DensityMatrix, theta: f64, phi: f64) -> DensityMatrix {
    let d = rho.dim_b();
    let basis = qubit_basis(theta, phi);
    let mut out = ComplexMatrix::zeros(2 * d, 2 * d);
    for v in &basis {
        let p = kron(&(v * v.adjoint()), &identity(d));
        out += &p * rho.matrix() * &p;
    }
    DensityMatrix::from_trusted(out, d)
}

/// Parameters of the one-clean-qubit circuit: ancilla polarization `mu`,
/// a register of `register_qubits` maximally mixed qubits and the unitary.
#[derive(Debug, Clone)]
pub struct Dqc1Config {
    pub register_qubits: usize,
    pub mu: f64,
    pub unitary: ComplexMatrix,
}

/// Diagonal three-qubit unitary `(a, a, b, 1, a, b, 1, 1)` with
/// `a = -(e^{-3iπ/5})^4` and `b = (e^{-3iπ/5})^8`, used for Jones
/// polynomial estimation.
pub fn jones_unitary() -> ComplexMatrix {
    let w = Complex64::from_polar(1.0, -3.0 * std::f64::consts::PI / 5.0);
    let a = -w.powu(4);
    let b = w.powu(8);
    let diag = [a, a, b, ONE, a, b, ONE, ONE];
    DMatrix::from_diagonal(&DVector::from_row_slice(&diag))
}

impl Dqc1Config {
    /// Four-qubit instance: three register qubits and [`jones_unitary`].
    pub fn jones(mu: f64) -> Self {
        Self { register_qubits: 3, mu, unitary: jones_unitary() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.mu) {
            return Err(Error::InvalidParameter(format!("polarization {} outside [0, 1]", self.mu)));
        }
        if self.register_qubits == 0 || self.register_qubits > 6 {
            return Err(Error::InvalidParameter(format!("register size {} outside 1..=6", self.register_qubits)));
        }
        let n = 1usize << self.register_qubits;
        if self.unitary.nrows() != n || self.unitary.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: self.unitary.nrows() });
        }
        let defect = crate::tensor::max_abs_diff(&(self.unitary.adjoint() * &self.unitary), &identity(n));
        if defect > 1e-10 {
            return Err(Error::NotUnitary(defect));
        }
        Ok(())
    }
}

/// Output state `(1/2^{n+1}) [[I, μU^†], [μU, I]]` of the one-clean-qubit circuit,
/// with the ancilla as subsystem A.
pub fn dqc1_output(cfg: &Dqc1Config) -> Result<DensityMatrix> {
    cfg.validate()?;
    let n = 1usize << cfg.register_qubits;
    let mu = Complex64::from(cfg.mu);
    let mut m = ComplexMatrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(&identity(n));
    m.view_mut((n, n), (n, n)).copy_from(&identity(n));
    m.view_mut((0, n), (n, n)).copy_from(&(cfg.unitary.adjoint() * mu));
    m.view_mut((n, 0), (n, n)).copy_from(&(&cfg.unitary * mu));
    Ok(DensityMatrix::from_trusted(m / Complex64::from((2 * n) as f64), n))
}

/// Coefficients of `ρ` in the product basis `σ_i ⊗ τ_j`.
///
/// `table[(i, j)] = Tr[ρ (σ_i ⊗ τ_j)]` with `σ_0 = I_2`, `τ_0 = I_d` and the
/// remaining `τ_j` from [`gell_mann_basis`]; `x`, `y` and `t` are views into
/// the first column, first row and the remaining block.
#[derive(Debug, Clone)]
pub struct BlochDecomposition {
    dim_b: usize,
    table: DMatrix<f64>,
}

impl BlochDecomposition {
    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn table(&self) -> &DMatrix<f64> {
        &self.table
    }

    /// Local Bloch vector of A, `x_i = Tr[ρ(σ_i ⊗ I)]`.
    pub fn x(&self) -> nalgebra::Vector3<f64> {
        nalgebra::Vector3::new(self.table[(1, 0)], self.table[(2, 0)], self.table[(3, 0)])
    }

    /// Local Bloch vector of B, length `d² - 1`.
    pub fn y(&self) -> DVector<f64> {
        self.table.row(0).columns(1, self.table.ncols() - 1).transpose()
    }

    /// Correlation matrix, `3 × (d² - 1)`.
    pub fn t(&self) -> DMatrix<f64> {
        self.table.view((1, 1), (3, self.table.ncols() - 1)).into_owned()
    }

    /// `ρ = (1/2d) Σ_ij R_ij σ_i ⊗ τ_j`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let d = self.dim_b;
        let basis = gell_mann_basis(d).expect("d >= 2");
        let taus: Vec<ComplexMatrix> = std::iter::once(identity(d)).chain(basis.elements().iter().cloned()).collect();
        let mut m = ComplexMatrix::zeros(2 * d, 2 * d);
        for i in 0..4 {
            let s = pauli(i);
            for (j, tau) in taus.iter().enumerate() {
                let r = self.table[(i, j)];
                if r != 0.0 {
                    m += kron(&s, tau) * Complex64::from(r);
                }
            }
        }
        m / Complex64::from((2 * d) as f64)
    }
}

/// `K_i = Tr_A[(σ_i ⊗ I) ρ]` for `i = 0..4`.
pub(crate) fn pauli_weighted_marginals(rho: &DensityMatrix) -> [ComplexMatrix; 4] {
    let d = rho.dim_b();
    let m = rho.matrix();
    let block = |a: usize, ap: usize| m.view((a * d, ap * d), (d, d)).into_owned();
    let (b00, b01, b10, b11) = (block(0, 0), block(0, 1), block(1, 0), block(1, 1));
    let i = crate::tensor::I;
    [&b00 + &b11, &b01 + &b10, &b01 * i - &b10 * i, &b00 - &b11]
}

pub fn bloch_decompose(rho: &DensityMatrix) -> BlochDecomposition {
    let d = rho.dim_b();
    let basis = gell_mann_basis(d).expect("d >= 2");
    let ks = pauli_weighted_marginals(rho);
    let mut table = DMatrix::zeros(4, d * d);
    for (i, k) in ks.iter().enumerate() {
        table[(i, 0)] = k.trace().re;
        for (j, tau) in basis.elements().iter().enumerate() {
            table[(i, j + 1)] = trace_of_product(k, tau).re;
        }
    }
    BlochDecomposition { dim_b: d, table }
}

#[derive(Debug, Deserialize)]
struct StateFile {
    dim_a: usize,
    dim_b: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

/// Parses the JSON state format `{"dim_a": 2, "dim_b": d, "re": [[…]], "im": [[…]]}`
/// (row-major, A-major index order) and validates the result.
pub fn state_from_json(text: &str) -> Result<DensityMatrix> {
    let file: StateFile = serde_json::from_str(text)?;
    if file.dim_a != 2 {
        return Err(Error::Format(format!("dim_a must be 2, got {}", file.dim_a)));
    }
    let n = 2 * file.dim_b;
    let rows_ok = |rows: &Vec<Vec<f64>>| rows.len() == n && rows.iter().all(|r| r.len() == n);
    if !rows_ok(&file.re) || !rows_ok(&file.im) {
        return Err(Error::Format(format!("re and im must both be {n}x{n}")));
    }
    let m = ComplexMatrix::from_fn(n, n, |r, c| Complex64::new(file.re[r][c], file.im[r][c]));
    validate(m, file.dim_b)
}

/// Serializes a state with 17 significant digits per entry.
pub fn state_to_json(rho: &DensityMatrix) -> String {
    let m = rho.matrix();
    let n = m.nrows();
    let part = |f: &dyn Fn(Complex64) -> f64| {
        let rows: Vec<String> = (0..n)
            .map(|r| {
                let cells: Vec<String> = (0..n).map(|c| format!("{:.16e}", f(m[(r, c)]))).collect();
                format!("    [{}]", cells.join(", "))
            })
            .collect();
        rows.join(",\n")
    };
    let mut out = String::new();
    let _ = writeln!(out, "{{");
    let _ = writeln!(out, "  \"dim_a\": 2,");
    let _ = writeln!(out, "  \"dim_b\": {},", rho.dim_b());
    let _ = writeln!(out, "  \"re\": [\n{}\n  ],", part(&|z| z.re));
    let _ = writeln!(out, "  \"im\": [\n{}\n  ]", part(&|z| z.im));
    let _ = writeln!(out, "}}");
    out
}

pub fn read_state(path: impl AsRef<Path>) -> Result<DensityMatrix> {
    let text = std::fs::read_to_string(path)?;
    state_from_json(&text)
}

pub fn write_state(path: impl AsRef<Path>, rho: &DensityMatrix) -> Result<()> {
    std::fs::write(path, state_to_json(rho))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::max_abs_diff;
    use approx::assert_abs_diff_eq;

    fn violations(r: Result<DensityMatrix>) -> Vec<Violation> {
        match r {
            Err(Error::InvalidState(v)) => v,
            other => panic!("expected InvalidState, got {other:?}"),
        }
    }

    #[test]
    fn validate_accepts_maximally_mixed() {
        let m = identity(4) / Complex64::from(4.0);
        assert!(validate(m, 2).is_ok());
    }

    #[test]
    fn validate_reports_trace_violation() {
        let m = kron(&pauli(1), &identity(2));
        let v = violations(validate(m, 2));
        assert!(v.iter().any(|x| matches!(x, Violation::Trace { trace } if trace.abs() < 1e-15)));
    }

    #[test]
    fn validate_reports_negativity_with_magnitude() {
        let diag = DVector::from_vec(vec![
            Complex64::from(0.5),
            Complex64::from(0.3),
            Complex64::from(0.3),
            Complex64::from(-0.1),
        ]);
        let v = violations(validate(DMatrix::from_diagonal(&diag), 2));
        assert_eq!(v.len(), 1);
        match v[0] {
            Violation::Negative { min_eigenvalue } => assert_abs_diff_eq!(min_eigenvalue, -0.1, epsilon = 1e-12),
            ref other => panic!("{other:?}"),
        }
    }

    #[test]
    fn validate_lists_every_violation() {
        let mut m = identity(4) * Complex64::from(0.5);
        m[(0, 1)] = Complex64::from(0.3);
        let v = violations(validate(m, 2));
        assert!(v.iter().any(|x| matches!(x, Violation::NotHermitian { .. })));
        assert!(v.iter().any(|x| matches!(x, Violation::Trace { .. })));
        let v = violations(validate(identity(3), 2));
        assert!(matches!(v[0], Violation::Shape { rows: 3, .. }));
    }

    #[test]
    fn random_state_rank_and_determinism() {
        let pure = random_state(2, 1, 5).unwrap();
        assert_abs_diff_eq!(pure.purity(), 1.0, epsilon = 1e-10);
        let full = random_state(3, 6, 5).unwrap();
        assert!(*hermitian_eigenvalues(full.matrix()).last().unwrap() > -1e-12);
        assert_eq!(random_state(2, 4, 77).unwrap(), random_state(2, 4, 77).unwrap());
        assert_ne!(random_state(2, 4, 77).unwrap(), random_state(2, 4, 78).unwrap());
        assert!(random_state(2, 0, 1).is_err());
        assert!(random_state(2, 5, 1).is_err());
    }

    #[test]
    fn random_pure_marginals() {
        let rho = random_pure(3, 12).unwrap();
        assert_abs_diff_eq!(rho.purity(), 1.0, epsilon = 1e-10);
        let ev = hermitian_eigenvalues(&rho.marginal_a());
        assert_abs_diff_eq!(ev.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        assert!(ev.iter().all(|x| *x > -1e-12));
    }

    #[test]
    fn random_unitary_is_unitary() {
        let u = random_unitary(5, 3);
        assert!(max_abs_diff(&(u.adjoint() * &u), &identity(5)) < 1e-12);
    }

    #[test]
    fn werner_endpoints() {
        assert!(max_abs_diff(werner_state(0.0).unwrap().matrix(), maximally_mixed(2).unwrap().matrix()) < 1e-15);
        assert_abs_diff_eq!(werner_state(1.0).unwrap().purity(), 1.0, epsilon = 1e-14);
        assert!(werner_state(1.5).is_err());
        assert!(werner_state(-0.1).is_err());
    }

    #[test]
    fn classical_quantum_special_cases() {
        let bob = random_state(3, 2, 8).unwrap().marginal_b();
        let chi = classical_quantum_state([1.0, 0.0], (0.7, 1.1), [&bob, &bob]).unwrap();
        let a = chi.marginal_a();
        assert!(max_abs_diff(chi.matrix(), &kron(&a, &bob)) < 1e-12);

        let chi = classical_quantum_state([0.5, 0.5], (0.0, 0.0), [&bob, &bob]).unwrap();
        let want = kron(&(identity(2) * Complex64::from(0.5)), &bob);
        assert!(max_abs_diff(chi.matrix(), &want) < 1e-12);

        assert!(classical_quantum_state([0.7, 0.7], (0.0, 0.0), [&bob, &bob]).is_err());
    }

    #[test]
    fn classical_quantum_states_are_dephasing_fixed_points() {
        for seed in 0..20 {
            let d = 2 + (seed as usize % 3);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let theta = rng.random::<f64>() * 3.0;
            let phi = rng.random::<f64>() * 6.0;
            let b0 = random_state(d, 3, seed + 100).unwrap().marginal_b();
            let b1 = random_state(d, 2, seed + 200).unwrap().marginal_b();
            let chi = classical_quantum_state([0.3, 0.7], (theta, phi), [&b0, &b1]).unwrap();
            let fixed = dephase_a(&chi, theta, phi);
            assert!(max_abs_diff(fixed.matrix(), chi.matrix()) < 1e-12);
        }
    }

    #[test]
    fn dqc1_output_properties() {
        let rho = dqc1_output(&Dqc1Config::jones(0.0)).unwrap();
        assert!(max_abs_diff(rho.matrix(), maximally_mixed(8).unwrap().matrix()) < 1e-15);
        for mu in [0.25, 0.8, 1.0] {
            let rho = dqc1_output(&Dqc1Config::jones(mu)).unwrap();
            let ev = hermitian_eigenvalues(rho.matrix());
            assert_abs_diff_eq!(ev[0], (1.0 + mu) / 16.0, epsilon = 1e-12);
            assert_abs_diff_eq!(ev[15], (1.0 - mu) / 16.0, epsilon = 1e-12);
            assert!(validate(rho.matrix().clone(), 8).is_ok());
        }
        assert!(dqc1_output(&Dqc1Config::jones(1.2)).is_err());
        let mut bad = Dqc1Config::jones(0.5);
        bad.unitary[(0, 0)] *= 2.0;
        assert!(matches!(dqc1_output(&bad), Err(Error::NotUnitary(_))));
    }

    #[test]
    fn bloch_of_bell_state() {
        let b = bloch_decompose(&bell_phi_plus());
        assert!(b.x().norm() < 1e-15);
        let t = b.t();
        for (i, want) in [1.0, -1.0, 1.0].iter().enumerate() {
            for j in 0..3 {
                let w = if i == j { *want } else { 0.0 };
                assert_abs_diff_eq!(t[(i, j)], w, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn bloch_reconstruction_round_trip() {
        for d in [2, 3, 4, 8] {
            for seed in 0..5 {
                let rho = random_state(d, 1 + (seed as usize) % (2 * d), seed).unwrap();
                let back = bloch_decompose(&rho).reconstruct();
                assert!(max_abs_diff(&back, rho.matrix()) < 1e-10, "d={d}");
            }
        }
    }

    #[test]
    fn bloch_entries_match_definition() {
        let rho = random_state(3, 6, 4).unwrap();
        let b = bloch_decompose(&rho);
        let basis = gell_mann_basis(3).unwrap();
        for i in 1..4 {
            let xi = trace_of_product(rho.matrix(), &kron(&pauli(i), &identity(3))).re;
            assert_abs_diff_eq!(b.x()[i - 1], xi, epsilon = 1e-14);
            for (j, tau) in basis.elements().iter().enumerate() {
                let tij = trace_of_product(rho.matrix(), &kron(&pauli(i), tau)).re;
                assert_abs_diff_eq!(b.t()[(i - 1, j)], tij, epsilon = 1e-14);
            }
        }
        assert_eq!(b.y().len(), 8);
    }

    #[test]
    fn state_file_round_trip_and_errors() {
        let rho = random_state(3, 4, 21).unwrap();
        let text = state_to_json(&rho);
        let back = state_from_json(&text).unwrap();
        let diff = max_abs_diff(back.matrix(), rho.matrix());
        assert!(diff == 0.0, "{diff:e}");
        assert!(matches!(
            state_from_json("{\"dim_a\": 3, \"dim_b\": 2, \"re\": [], \"im\": []}"),
            Err(Error::Format(_))
        ));
        assert!(matches!(
            state_from_json("{\"dim_a\": 2, \"dim_b\": 2, \"re\": [[1]], \"im\": [[0]]}"),
            Err(Error::Format(_))
        ));
        assert!(matches!(state_from_json("not json"), Err(Error::Json(_))));
    }
}
