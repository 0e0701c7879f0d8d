//! Dense complex linear algebra for bipartite operators.
//!
//! Every bipartite matrix in this crate uses the same index convention:
//! subsystem A is the leftmost, slowest-varying tensor factor, so the global
//! basis index of `|i_a⟩ ⊗ |i_b⟩` is `i_a * dim_b + i_b`. [`kron`] produces
//! exactly this layout.
//!
//! # Operator basis normalization
//!
//! The generalized Gell-Mann matrices `λ_i` are usually normalized as
//! `Tr[λ_i λ_j] = 2 δ_ij`, which gives the completeness relation
//!
//! ```text
//! Σ_i λ_i ⊗ λ_i = 2 V - (2/d) I
//! ```
//!
//! with `V` the swap on `d ⊗ d`. The swap is also written as
//! `V = (I + Σ_i τ_i ⊗ τ_i) / d`, which only holds when
//! `Σ_i τ_i ⊗ τ_i = d V - I`, that is for `τ_i = sqrt(d/2) λ_i` and
//! `Tr[τ_i τ_j] = d δ_ij`. At `d = 2` this is exactly the Pauli matrices.
//! [`gell_mann_basis`] returns the rescaled `τ_i`.
//!
//! # Multi-copy expectations
//!
//! [`permutation_expectation`] evaluates `Tr[(W_A ⊗ W_B) f_1 ⊗ … ⊗ f_k]`
//! where `W_A` and `W_B` permute the A and B slots of `k` copies. It never
//! builds the `(d_a d_b)^k` dimensional space: the A indices are summed
//! explicitly and, for each assignment, the B indices reduce to traces of
//! products of `d_b × d_b` blocks along the cycles of the B permutation.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

/// Local dimensions of a bipartite system, A first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    pub a: usize,
    pub b: usize,
}

impl Dims {
    pub const fn new(a: usize, b: usize) -> Self {
        Self { a, b }
    }

    /// Qubit A with a `d`-level B.
    pub const fn qubit_qudit(d: usize) -> Self {
        Self { a: 2, b: d }
    }

    pub const fn total(&self) -> usize {
        self.a * self.b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Hermitian, traceless operator basis with `Tr[τ_i τ_j] = d δ_ij`.
#[derive(Debug, Clone)]
pub struct OperatorBasis {
    dim: usize,
    elements: Vec<ComplexMatrix>,
}

impl OperatorBasis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// `(1/d)(I + Σ τ_i ⊗ τ_i)`, which reconstructs the swap operator.
    pub fn swap_from_completeness(&self) -> ComplexMatrix {
        let d = self.dim;
        let mut acc = ComplexMatrix::identity(d * d, d * d);
        for t in &self.elements {
            acc += kron(t, t);
        }
        acc / Complex64::from(d as f64)
    }
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn pauli(i: usize) -> ComplexMatrix {
    match i {
        0 => identity(2),
        1 => ComplexMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        2 => ComplexMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
        3 => ComplexMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
        _ => panic!("pauli index {i} out of range"),
    }
}

fn check_square(m: &ComplexMatrix, dims: Dims) -> Result<()> {
    let n = dims.total();
    if m.nrows() != n {
        return Err(Error::DimensionMismatch { expected: n, got: m.nrows() });
    }
    if m.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: m.ncols() });
    }
    Ok(())
}

pub fn partial_trace(m: &ComplexMatrix, dims: Dims, keep: Subsystem) -> Result<ComplexMatrix> {
    check_square(m, dims)?;
    let (da, db) = (dims.a, dims.b);
    let out = match keep {
        Subsystem::A => ComplexMatrix::from_fn(da, da, |i, j| (0..db).map(|k| m[(i * db + k, j * db + k)]).sum()),
        Subsystem::B => ComplexMatrix::from_fn(db, db, |i, j| (0..da).map(|k| m[(k * db + i, k * db + j)]).sum()),
    };
    Ok(out)
}

pub fn partial_transpose(m: &ComplexMatrix, dims: Dims, on: Subsystem) -> Result<ComplexMatrix> {
    check_square(m, dims)?;
    let db = dims.b;
    let n = dims.total();
    Ok(ComplexMatrix::from_fn(n, n, |r, c| {
        let (ra, rb) = (r / db, r % db);
        let (ca, cb) = (c / db, c % db);
        match on {
            Subsystem::A => m[(ca * db + rb, ra * db + cb)],
            Subsystem::B => m[(ra * db + cb, ca * db + rb)],
        }
    }))
}

/// Generalized Gell-Mann matrices for dimension `d`, rescaled to
/// `Tr[τ_i τ_j] = d δ_ij`.
///
/// Ordering: for every pair `j < k` the symmetric then the antisymmetric
/// element, followed by the `d - 1` diagonal elements. At `d = 2` this yields
/// `σ_1, σ_2, σ_3`.
pub fn gell_mann_basis(d: usize) -> Result<OperatorBasis> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    let scale = (d as f64 / 2.0).sqrt();
    let mut elements = Vec::with_capacity(d * d - 1);
    for j in 0..d {
        for k in j + 1..d {
            let mut sym = ComplexMatrix::zeros(d, d);
            sym[(j, k)] = ONE * scale;
            sym[(k, j)] = ONE * scale;
            elements.push(sym);
            let mut anti = ComplexMatrix::zeros(d, d);
            anti[(j, k)] = -I * scale;
            anti[(k, j)] = I * scale;
            elements.push(anti);
        }
    }
    for l in 1..d {
        let norm = (2.0 / (l * (l + 1)) as f64).sqrt() * scale;
        let mut diag = ComplexMatrix::zeros(d, d);
        for j in 0..l {
            diag[(j, j)] = ONE * norm;
        }
        diag[(l, l)] = ONE * (-(l as f64) * norm);
        elements.push(diag);
    }
    Ok(OperatorBasis { dim: d, elements })
}

fn check_permutation(perm: &[usize]) -> Result<()> {
    let mut seen = vec![false; perm.len()];
    for &p in perm {
        if p >= perm.len() || seen[p] {
            return Err(Error::BadPermutation { perm: perm.to_vec(), len: perm.len() });
        }
        seen[p] = true;
    }
    Ok(())
}

/// Dense matrix of the slot permutation `W|y_0 … y_{k-1}⟩ = |y_{π(0)} … y_{π(k-1)}⟩`
/// on `k` slots of the given dimensions.
///
/// With this convention `Tr[W f_0 ⊗ … ⊗ f_{k-1}] = Σ_y Π_i f_i[y_i, y_{π(i)}]`.
pub fn slot_permutation_matrix(slot_dims: &[usize], perm: &[usize]) -> Result<ComplexMatrix> {
    if perm.len() != slot_dims.len() {
        return Err(Error::DimensionMismatch { expected: slot_dims.len(), got: perm.len() });
    }
    check_permutation(perm)?;
    for (i, &p) in perm.iter().enumerate() {
        if slot_dims[i] != slot_dims[p] {
            return Err(Error::DimensionMismatch { expected: slot_dims[i], got: slot_dims[p] });
        }
    }
    let n: usize = slot_dims.iter().product();
    let k = slot_dims.len();
    let mut out = ComplexMatrix::zeros(n, n);
    let mut digits = vec![0usize; k];
    for col in 0..n {
        let mut rest = col;
        for s in (0..k).rev() {
            digits[s] = rest % slot_dims[s];
            rest /= slot_dims[s];
        }
        let mut row = 0;
        for s in 0..k {
            row = row * slot_dims[s] + digits[perm[s]];
        }
        out[(row, col)] = ONE;
    }
    Ok(out)
}

/// Slot permutation of the cyclic shift `V^k|ψ_1 … ψ_k⟩ = |ψ_k ψ_1 … ψ_{k-1}⟩`.
pub fn cyclic_shift(k: usize) -> Vec<usize> {
    (0..k).map(|i| (i + k - 1) % k).collect()
}

/// The cyclic shift operator on `k` copies of a `dim`-level system.
pub fn shift_operator(k: usize, dim: usize) -> Result<ComplexMatrix> {
    if !(2..=4).contains(&k) {
        return Err(Error::UnsupportedCopies(k));
    }
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    slot_permutation_matrix(&vec![dim; k], &cyclic_shift(k))
}

pub fn swap_operator(dim: usize) -> ComplexMatrix {
    slot_permutation_matrix(&[dim, dim], &[1, 0]).expect("valid swap")
}

/// Projector onto the antisymmetric subspace of two `d`-level copies, `(I - V)/2`.
pub fn antisym_projector(d: usize) -> ComplexMatrix {
    (identity(d * d) - swap_operator(d)) * Complex64::from(0.5)
}

/// `Tr[(W_A ⊗ W_B) f_0 ⊗ … ⊗ f_{k-1}]` by cycle contraction.
///
/// `perm_a` and `perm_b` follow the convention of [`slot_permutation_matrix`]:
/// the result is `Σ Π_i f_i[(a_i b_i), (a_{π_A(i)} b_{π_B(i)})]`. A cycle
/// `i → π(i) → π²(i) → …` contributes `Tr[f_i f_{π(i)} f_{π²(i)} …]`, so the
/// cyclic shift of [`cyclic_shift`] contracts the factors in reverse order.
pub fn permutation_expectation(
    factors: &[ComplexMatrix],
    perm_a: &[usize],
    perm_b: &[usize],
    dims: Dims,
) -> Result<Complex64> {
    let k = factors.len();
    if k == 0 || k > 4 {
        return Err(Error::UnsupportedCopies(k));
    }
    if perm_a.len() != k {
        return Err(Error::DimensionMismatch { expected: k, got: perm_a.len() });
    }
    if perm_b.len() != k {
        return Err(Error::DimensionMismatch { expected: k, got: perm_b.len() });
    }
    check_permutation(perm_a)?;
    check_permutation(perm_b)?;
    for f in factors {
        check_square(f, dims)?;
    }
    let (da, db) = (dims.a, dims.b);

    // blocks[i][a][a'] is the d_b × d_b block of factor i at A indices (a, a').
    let blocks: Vec<Vec<Vec<ComplexMatrix>>> = factors
        .iter()
        .map(|f| {
            (0..da).map(|a| (0..da).map(|ap| f.view((a * db, ap * db), (db, db)).into_owned()).collect()).collect()
        })
        .collect();
    let cycles = permutation_cycles(perm_b);

    let mut total = ZERO;
    let mut assignment = vec![0usize; k];
    let combos = da.pow(k as u32);
    for combo in 0..combos {
        let mut rest = combo;
        for slot in assignment.iter_mut() {
            *slot = rest % da;
            rest /= da;
        }
        let block = |i: usize| &blocks[i][assignment[i]][assignment[perm_a[i]]];
        let mut term = ONE;
        for cycle in &cycles {
            term *= cycle_trace(cycle, &block);
            if term == ZERO {
                break;
            }
        }
        total += term;
    }
    Ok(total)
}

fn permutation_cycles(perm: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; perm.len()];
    let mut cycles = Vec::new();
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            cycle.push(i);
            i = perm[i];
        }
        cycles.push(cycle);
    }
    cycles
}

fn cycle_trace<'a, F>(cycle: &[usize], block: &F) -> Complex64
where
    F: Fn(usize) -> &'a ComplexMatrix,
{
    match cycle {
        [i] => block(*i).trace(),
        [i, j] => trace_of_product(block(*i), block(*j)),
        [first, middle @ .., last] => {
            let mut acc = block(*first).clone();
            for &m in middle {
                acc = &acc * block(m);
            }
            trace_of_product(&acc, block(*last))
        }
        [] => ONE,
    }
}

/// `Tr[a b]` without forming the product.
pub fn trace_of_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// Eigenvalues of a Hermitian matrix in descending order.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    let eig = nalgebra::SymmetricEigen::new(m.clone());
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    // stable sort keeps ties in order of appearance
    values.sort_by(|x, y| y.partial_cmp(x).unwrap_or(std::cmp::Ordering::Equal));
    values
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Largest entrywise modulus of `m - m^†`.
pub fn hermiticity_defect(m: &ComplexMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

/// Dense `Tr[W f_0 ⊗ … ⊗ f_{k-1}]` with `W` acting on the interleaved slots
/// `A_0 B_0 A_1 B_1 …`. Only meant for small test dimensions.
pub fn dense_permutation_expectation(
    factors: &[ComplexMatrix],
    perm_a: &[usize],
    perm_b: &[usize],
    dims: Dims,
) -> Result<Complex64> {
    let k = factors.len();
    if perm_a.len() != k || perm_b.len() != k {
        return Err(Error::DimensionMismatch { expected: k, got: perm_a.len().min(perm_b.len()) });
    }
    let slot_dims: Vec<usize> = (0..2 * k).map(|s| if s % 2 == 0 { dims.a } else { dims.b }).collect();
    let mut perm = vec![0; 2 * k];
    for i in 0..k {
        perm[2 * i] = 2 * perm_a[i];
        perm[2 * i + 1] = 2 * perm_b[i] + 1;
    }
    let w = slot_permutation_matrix(&slot_dims, &perm)?;
    let mut joint = factors[0].clone();
    for f in &factors[1..] {
        joint = kron(&joint, f);
    }
    Ok(trace_of_product(&w, &joint))
}
