//! Dense complex linear algebra on truncated Fock spaces.
//!
//! The composite Hilbert space is atom1 ⊗ atom2 ⊗ mode1 ⊗ mode2 with each
//! bosonic mode truncated to its lowest `nmax` number states, stored
//! row-major: `index = ((a1*2 + a2)*nmax + n1)*nmax + n2`. Atomic index 0 is
//! |g⟩ in the bare basis and |+⟩ in the dressed basis.

use ndarray::{linalg::kron, Array1, Array2, ArrayView1, ArrayView2};
use ndarray_linalg::{Eigh, Inverse, UPLO};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Entrywise tolerance for hermiticity checks.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Allowed norm drift under unitary evolution.
pub const NORM_TOL: f64 = 1e-9;
/// Minimum acceptable truncated norm of a coherent state.
pub const COHERENT_NORM_TOL: f64 = 1e-10;

// ---------------------------------------------------------------------------
// Fock truncation
// ---------------------------------------------------------------------------

/// Number of Fock levels kept per mode (basis |0⟩..|nmax-1⟩).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockCutoff {
    nmax: usize,
}

impl FockCutoff {
    /// At least two levels are required for a meaningful mode.
    pub fn new(nmax: usize) -> Result<Self> {
        if nmax < 2 {
            return Err(Error::CutoffTooSmall {
                nmax,
                alpha_abs: 0.0,
                norm: 0.0,
            });
        }
        Ok(Self { nmax })
    }

    /// Cutoff large enough for every coherent amplitude up to `alpha_abs`:
    /// `nmax = ceil(|α|² + 10·sqrt(|α|² + 1))`, which keeps the truncated
    /// norm loss below 1e-10.
    pub fn for_max_amplitude(alpha_abs: f64) -> Self {
        let n2 = alpha_abs * alpha_abs;
        let nmax = (n2 + 10.0 * (n2 + 1.0).sqrt()).ceil() as usize;
        Self { nmax: nmax.max(2) }
    }

    pub fn nmax(&self) -> usize {
        self.nmax
    }

    /// Dimension of the full atom1 ⊗ atom2 ⊗ mode1 ⊗ mode2 space.
    pub fn composite_dim(&self) -> usize {
        4 * self.nmax * self.nmax
    }
}

// ---------------------------------------------------------------------------
// Coherent states and analytic overlaps
// ---------------------------------------------------------------------------

/// Truncated coherent state with components `e^{-|α|²/2} αⁿ/√(n!)`.
///
/// The vector is deliberately *not* renormalized after truncation; the
/// truncation loss is monitored instead. Fails with `CutoffTooSmall` when
/// the truncated norm drops below `1 - 1e-10`.
pub fn coherent_state(alpha: C64, cutoff: FockCutoff) -> Result<Array1<C64>> {
    let nmax = cutoff.nmax();
    let mut v = Array1::zeros(nmax);
    let mut c = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    for n in 0..nmax {
        v[n] = c;
        c *= alpha / C64::new(((n + 1) as f64).sqrt(), 0.0);
    }
    let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if norm < 1.0 - COHERENT_NORM_TOL {
        return Err(Error::CutoffTooSmall {
            nmax,
            alpha_abs: alpha.norm(),
            norm,
        });
    }
    Ok(v)
}

/// Norm loss `1 - ||v||` of a truncated coherent vector; a per-run
/// diagnostic for cutoff adequacy.
pub fn truncation_loss(v: &Array1<C64>) -> f64 {
    1.0 - v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Exact coherent-state overlap ⟨α|β⟩ = exp(−|α|²/2 − |β|²/2 + α*·β).
pub fn overlap_analytic(alpha: C64, beta: C64) -> C64 {
    let exponent =
        -C64::new(alpha.norm_sqr() / 2.0 + beta.norm_sqr() / 2.0, 0.0) + alpha.conj() * beta;
    exponent.exp()
}

// ---------------------------------------------------------------------------
// Tensor products
// ---------------------------------------------------------------------------

/// Kronecker product of two state vectors.
pub fn kron_vec(a: ArrayView1<C64>, b: ArrayView1<C64>) -> Array1<C64> {
    let mut out = Array1::zeros(a.len() * b.len());
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            out[i * b.len() + j] = ai * bj;
        }
    }
    out
}

/// Kronecker product of a sequence of state vectors, left to right.
pub fn tensor_states(factors: &[ArrayView1<C64>]) -> Array1<C64> {
    let mut out = Array1::from_elem(1, C64::new(1.0, 0.0));
    for f in factors {
        out = kron_vec(out.view(), *f);
    }
    out
}

/// Kronecker product of a sequence of operators, left to right.
pub fn tensor_operators(factors: &[ArrayView2<C64>]) -> Array2<C64> {
    let mut out = Array2::from_elem((1, 1), C64::new(1.0, 0.0));
    for f in factors {
        out = kron(&out.view(), f);
    }
    out
}

// ---------------------------------------------------------------------------
// Elementary operators
// ---------------------------------------------------------------------------

/// Identity on an `n`-dimensional space.
pub fn identity(n: usize) -> Array2<C64> {
    Array2::eye(n)
}

/// Mode annihilation operator, a|n⟩ = √n |n−1⟩, truncated to `nmax` levels.
pub fn annihilation_op(nmax: usize) -> Array2<C64> {
    let mut a = Array2::zeros((nmax, nmax));
    for n in 1..nmax {
        a[[n - 1, n]] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

/// Quadrature operator a + a† on a truncated mode.
pub fn quadrature_op(nmax: usize) -> Array2<C64> {
    let a = annihilation_op(nmax);
    let adag = a.t().mapv(|x| x.conj());
    a + adag
}

/// Qubit lowering operator |g⟩⟨e| in the bare basis (index 0 = |g⟩).
pub fn qubit_lower() -> Array2<C64> {
    let mut s = Array2::zeros((2, 2));
    s[[0, 1]] = C64::new(1.0, 0.0);
    s
}

/// Pauli x on a qubit: σ + σ†.
pub fn sigma_x() -> Array2<C64> {
    let mut s = Array2::zeros((2, 2));
    s[[0, 1]] = C64::new(1.0, 0.0);
    s[[1, 0]] = C64::new(1.0, 0.0);
    s
}

/// Bare qubit basis vector (0 = |g⟩, 1 = |e⟩).
pub fn qubit_basis(index: usize) -> Array1<C64> {
    let mut v = Array1::zeros(2);
    v[index] = C64::new(1.0, 0.0);
    v
}

/// Vacuum vector on a truncated mode.
pub fn vacuum(cutoff: FockCutoff) -> Array1<C64> {
    let mut v = Array1::zeros(cutoff.nmax());
    v[0] = C64::new(1.0, 0.0);
    v
}

// ---------------------------------------------------------------------------
// States
// ---------------------------------------------------------------------------

/// Atomic tensor-factor basis of a composite state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtomBasis {
    /// {|g⟩, |e⟩} per atom.
    Bare,
    /// {|+⟩, |−⟩} per atom, |±⟩ = (|g⟩ ± |e⟩)/√2.
    Dressed,
}

impl AtomBasis {
    pub fn label(&self) -> &'static str {
        match self {
            AtomBasis::Bare => "bare",
            AtomBasis::Dressed => "dressed",
        }
    }
}

/// State vector on the four-factor composite space.
#[derive(Debug, Clone)]
pub struct CompositeState {
    amplitudes: Array1<C64>,
    cutoff: FockCutoff,
    basis: AtomBasis,
}

impl CompositeState {
    pub fn from_amplitudes(
        amplitudes: Array1<C64>,
        cutoff: FockCutoff,
        basis: AtomBasis,
    ) -> Result<Self> {
        if amplitudes.len() != cutoff.composite_dim() {
            return Err(Error::DimensionMismatch {
                expected: cutoff.composite_dim(),
                got: amplitudes.len(),
            });
        }
        Ok(Self {
            amplitudes,
            cutoff,
            basis,
        })
    }

    /// Build atom1 ⊗ atom2 ⊗ mode1 ⊗ mode2 from per-factor vectors.
    pub fn from_factors(
        atom1: ArrayView1<C64>,
        atom2: ArrayView1<C64>,
        mode1: ArrayView1<C64>,
        mode2: ArrayView1<C64>,
        basis: AtomBasis,
    ) -> Result<Self> {
        if atom1.len() != 2 || atom2.len() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: atom1.len().max(atom2.len()),
            });
        }
        if mode1.len() != mode2.len() {
            return Err(Error::DimensionMismatch {
                expected: mode1.len(),
                got: mode2.len(),
            });
        }
        let cutoff = FockCutoff::new(mode1.len())?;
        let atoms = kron_vec(atom1, atom2);
        let modes = kron_vec(mode1, mode2);
        let amplitudes = kron_vec(atoms.view(), modes.view());
        Ok(Self {
            amplitudes,
            cutoff,
            basis,
        })
    }

    /// Build an atomic 4-vector ⊗ two-mode field state.
    pub fn from_atoms_and_field(
        atoms: &[C64; 4],
        field: &TwoModeState,
        basis: AtomBasis,
    ) -> Result<Self> {
        let nmax = field.nmax();
        let dim = 4 * nmax * nmax;
        let mut amplitudes = Array1::zeros(dim);
        for a in 0..4 {
            if atoms[a] == C64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..nmax * nmax {
                amplitudes[a * nmax * nmax + k] = atoms[a] * field.amplitudes()[k];
            }
        }
        Ok(Self {
            amplitudes,
            cutoff: FockCutoff::new(nmax)?,
            basis,
        })
    }

    /// Flat index of the basis state |a1 a2; n1 n2⟩.
    pub fn index(&self, a1: usize, a2: usize, n1: usize, n2: usize) -> usize {
        let nmax = self.cutoff.nmax();
        ((a1 * 2 + a2) * nmax + n1) * nmax + n2
    }

    pub fn amplitudes(&self) -> &Array1<C64> {
        &self.amplitudes
    }

    pub fn cutoff(&self) -> FockCutoff {
        self.cutoff
    }

    pub fn nmax(&self) -> usize {
        self.cutoff.nmax()
    }

    pub fn basis(&self) -> AtomBasis {
        self.basis
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|x| x.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn overlap(&self, other: &CompositeState) -> Result<C64> {
        if self.amplitudes.len() != other.amplitudes.len() {
            return Err(Error::DimensionMismatch {
                expected: self.amplitudes.len(),
                got: other.amplitudes.len(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Project the atoms onto basis state (a1, a2); returns the unnormalized
    /// two-mode field component.
    pub fn project_atoms(&self, a1: usize, a2: usize) -> TwoModeState {
        let nmax = self.cutoff.nmax();
        let block = a1 * 2 + a2;
        let amplitudes = self
            .amplitudes
            .slice(ndarray::s![block * nmax * nmax..(block + 1) * nmax * nmax])
            .to_owned();
        TwoModeState { amplitudes, nmax }
    }

    /// Project the field onto a two-mode vector; returns the unnormalized
    /// atomic amplitudes ⟨field|ψ⟩ per atomic basis index.
    pub fn project_field(&self, field: &TwoModeState) -> [C64; 4] {
        let nmax = self.cutoff.nmax();
        let mut out = [C64::new(0.0, 0.0); 4];
        for (a, slot) in out.iter_mut().enumerate() {
            let block = self
                .amplitudes
                .slice(ndarray::s![a * nmax * nmax..(a + 1) * nmax * nmax]);
            *slot = field
                .amplitudes()
                .iter()
                .zip(block.iter())
                .map(|(f, p)| f.conj() * p)
                .sum();
        }
        out
    }

    pub(crate) fn with_amplitudes(&self, amplitudes: Array1<C64>) -> Self {
        Self {
            amplitudes,
            cutoff: self.cutoff,
            basis: self.basis,
        }
    }

    pub(crate) fn with_basis(&self, basis: AtomBasis) -> Self {
        Self {
            amplitudes: self.amplitudes.clone(),
            cutoff: self.cutoff,
            basis,
        }
    }
}

/// Two-mode field vector on mode1 ⊗ mode2 (length nmax²).
#[derive(Debug, Clone)]
pub struct TwoModeState {
    amplitudes: Array1<C64>,
    nmax: usize,
}

impl TwoModeState {
    pub fn from_amplitudes(amplitudes: Array1<C64>, cutoff: FockCutoff) -> Result<Self> {
        let nmax = cutoff.nmax();
        if amplitudes.len() != nmax * nmax {
            return Err(Error::DimensionMismatch {
                expected: nmax * nmax,
                got: amplitudes.len(),
            });
        }
        Ok(Self { amplitudes, nmax })
    }

    pub fn from_modes(mode1: ArrayView1<C64>, mode2: ArrayView1<C64>) -> Result<Self> {
        if mode1.len() != mode2.len() {
            return Err(Error::DimensionMismatch {
                expected: mode1.len(),
                got: mode2.len(),
            });
        }
        Ok(Self {
            amplitudes: kron_vec(mode1, mode2),
            nmax: mode1.len(),
        })
    }

    pub fn zero(cutoff: FockCutoff) -> Self {
        Self {
            amplitudes: Array1::zeros(cutoff.nmax() * cutoff.nmax()),
            nmax: cutoff.nmax(),
        }
    }

    pub fn amplitudes(&self) -> &Array1<C64> {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut Array1<C64> {
        &mut self.amplitudes
    }

    pub fn nmax(&self) -> usize {
        self.nmax
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|x| x.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn overlap(&self, other: &TwoModeState) -> Result<C64> {
        if self.amplitudes.len() != other.amplitudes.len() {
            return Err(Error::DimensionMismatch {
                expected: self.amplitudes.len(),
                got: other.amplitudes.len(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::ZeroState);
        }
        Ok(Self {
            amplitudes: &self.amplitudes / C64::new(n, 0.0),
            nmax: self.nmax,
        })
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self {
            amplitudes: &self.amplitudes * factor,
            nmax: self.nmax,
        }
    }

    pub fn add(&self, other: &TwoModeState) -> Result<Self> {
        if self.nmax != other.nmax {
            return Err(Error::DimensionMismatch {
                expected: self.nmax,
                got: other.nmax,
            });
        }
        Ok(Self {
            amplitudes: &self.amplitudes + &other.amplitudes,
            nmax: self.nmax,
        })
    }

    /// Contract mode 2 with a reference vector, leaving the mode-1 factor:
    /// `out[n1] = Σ_n2 conj(ref[n2]) ψ[n1, n2]`.
    pub fn contract_mode2(&self, reference: ArrayView1<C64>) -> Array1<C64> {
        let mut out = Array1::zeros(self.nmax);
        for n1 in 0..self.nmax {
            let mut acc = C64::new(0.0, 0.0);
            for n2 in 0..self.nmax.min(reference.len()) {
                acc += reference[n2].conj() * self.amplitudes[n1 * self.nmax + n2];
            }
            out[n1] = acc;
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Operators
// ---------------------------------------------------------------------------

/// Maximum entrywise deviation of a matrix from its adjoint.
pub fn hermitian_deviation(m: &Array2<C64>) -> f64 {
    let n = m.nrows();
    let mut max = 0.0f64;
    for i in 0..n {
        for j in i..n {
            let d = (m[[i, j]] - m[[j, i]].conj()).norm();
            if d > max {
                max = d;
            }
        }
    }
    max
}

/// Dense operator on a composite or single-factor space.
#[derive(Debug, Clone)]
pub struct Operator {
    matrix: Array2<C64>,
    hermitian: bool,
}

impl Operator {
    /// Wrap a matrix that must be hermitian within 1e-12.
    pub fn hermitian(matrix: Array2<C64>) -> Result<Self> {
        let dev = hermitian_deviation(&matrix);
        if dev > HERMITIAN_TOL {
            return Err(Error::NonHermitian { deviation: dev });
        }
        Ok(Self {
            matrix,
            hermitian: true,
        })
    }

    /// Wrap a general (e.g. unitary) matrix.
    pub fn general(matrix: Array2<C64>) -> Self {
        Self {
            matrix,
            hermitian: false,
        }
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// Apply to a composite state (plain matrix-vector product, no checks
    /// beyond dimension).
    pub fn apply(&self, state: &CompositeState) -> Result<CompositeState> {
        if self.dim() != state.amplitudes().len() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: state.amplitudes().len(),
            });
        }
        Ok(state.with_amplitudes(self.matrix.dot(state.amplitudes())))
    }
}

// ---------------------------------------------------------------------------
// Matrix exponential (scaling and squaring, Padé 13)
// ---------------------------------------------------------------------------

// Padé(13,13) numerator coefficients b_0..b_13 (Higham 2005).
const PADE13_B: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

// Scaling threshold theta_13 for the Padé(13) approximant.
const PADE13_THETA: f64 = 5.371920351148152;

fn one_norm(m: &Array2<C64>) -> f64 {
    let mut max = 0.0f64;
    for j in 0..m.ncols() {
        let s: f64 = m.column(j).iter().map(|x| x.norm()).sum();
        if s > max {
            max = s;
        }
    }
    max
}

/// Hermitian eigendecomposition with eigenvectors returned as columns:
/// M = V·diag(w)·V†.
///
/// The LAPACK backend sees our row-major buffer as the transposed
/// (= conjugated, for hermitian M) matrix, so the raw output columns come
/// back conjugated; this wrapper restores the standard convention.
pub fn eigh_hermitian(m: &Array2<C64>) -> Result<(Array1<f64>, Array2<C64>)> {
    let (vals, vecs) = m
        .eigh(UPLO::Lower)
        .map_err(|e| Error::LinAlg(format!("eigendecomposition failed: {e}")))?;
    Ok((vals, vecs.mapv(|x| x.conj())))
}

/// Dense matrix exponential exp(M) by scaling-and-squaring with a Padé(13)
/// approximant; error controlled via the 1-norm scaling rule.
pub fn matrix_exp(m: &Array2<C64>) -> Result<Array2<C64>> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: m.ncols(),
        });
    }
    if n == 0 {
        return Ok(Array2::zeros((0, 0)));
    }

    let norm = one_norm(m);
    let squarings = if norm > PADE13_THETA {
        (norm / PADE13_THETA).log2().ceil() as u32
    } else {
        0
    };
    let scale = C64::new((0.5f64).powi(squarings as i32), 0.0);
    let a = m * scale;

    let b = &PADE13_B;
    let eye = identity(n);
    let a2 = a.dot(&a);
    let a4 = a2.dot(&a2);
    let a6 = a2.dot(&a4);

    let w1 = &a6 * cr(b[13]) + &a4 * cr(b[11]) + &a2 * cr(b[9]);
    let w2 = w1.dot(&a6) + &a6 * cr(b[7]) + &a4 * cr(b[5]) + &a2 * cr(b[3]) + &eye * cr(b[1]);
    let u = a.dot(&w2);
    let z1 = &a6 * cr(b[12]) + &a4 * cr(b[10]) + &a2 * cr(b[8]);
    let v = z1.dot(&a6) + &a6 * cr(b[6]) + &a4 * cr(b[4]) + &a2 * cr(b[2]) + &eye * cr(b[0]);

    let denom = &v - &u;
    let numer = &v + &u;
    let denom_inv = denom
        .inv()
        .map_err(|e| Error::LinAlg(format!("matrix exponential solve failed: {e}")))?;
    let mut f = denom_inv.dot(&numer);

    for _ in 0..squarings {
        f = f.dot(&f);
    }
    Ok(f)
}

#[inline]
fn cr(x: f64) -> C64 {
    C64::new(x, 0.0)
}

// ---------------------------------------------------------------------------
// Time evolution
// ---------------------------------------------------------------------------

/// Evolve a normalized state under a time-independent hermitian Hamiltonian:
/// exp(−i·H·t)·ψ (ħ = 1). Fails with `NonHermitian` if the operator is not
/// flagged and measured hermitian, and with `NormDrift` if the result norm
/// leaves 1 ± 1e-9.
pub fn evolve(state: &CompositeState, h: &Operator, t: f64) -> Result<CompositeState> {
    if !h.is_hermitian() {
        return Err(Error::NonHermitian {
            deviation: hermitian_deviation(h.matrix()),
        });
    }
    let dev = hermitian_deviation(h.matrix());
    if dev > HERMITIAN_TOL {
        return Err(Error::NonHermitian { deviation: dev });
    }
    if h.dim() != state.amplitudes().len() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            got: state.amplitudes().len(),
        });
    }
    let a = h.matrix() * C64::new(0.0, -t);
    let u = matrix_exp(&a)?;
    let out = state.with_amplitudes(u.dot(state.amplitudes()));
    let norm = out.norm();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::NormDrift { norm });
    }
    Ok(out)
}

/// Reusable propagator for a fixed hermitian Hamiltonian, backed by one
/// eigendecomposition; sweeping many times `t` costs two dense mat-vecs per
/// point instead of one matrix exponential.
pub struct Propagator {
    eigenvalues: Array1<f64>,
    eigenvectors: Array2<C64>,
    adjoint: Array2<C64>,
}

impl Propagator {
    pub fn new(h: &Operator) -> Result<Self> {
        if !h.is_hermitian() {
            return Err(Error::NonHermitian {
                deviation: hermitian_deviation(h.matrix()),
            });
        }
        let (eigenvalues, eigenvectors) = eigh_hermitian(h.matrix())?;
        let adjoint = eigenvectors.t().mapv(|x| x.conj());
        Ok(Self {
            eigenvalues,
            eigenvectors,
            adjoint,
        })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// exp(−i·H·t)·ψ through the spectral decomposition.
    pub fn evolve(&self, state: &CompositeState, t: f64) -> Result<CompositeState> {
        if self.dim() != state.amplitudes().len() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: state.amplitudes().len(),
            });
        }
        let mut coeffs = self.adjoint.dot(state.amplitudes());
        for (c, &ev) in coeffs.iter_mut().zip(self.eigenvalues.iter()) {
            *c *= C64::from_polar(1.0, -ev * t);
        }
        let out = state.with_amplitudes(self.eigenvectors.dot(&coeffs));
        let norm = out.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NormDrift { norm });
        }
        Ok(out)
    }

    pub fn eigenvalues(&self) -> &Array1<f64> {
        &self.eigenvalues
    }
}

/// Global-phase-insensitive agreement |⟨a|b⟩|² / (‖a‖²‖b‖²) between two
/// vectors; 0 if either vanishes.
pub fn fidelity(a: ArrayView1<C64>, b: ArrayView1<C64>) -> f64 {
    let na: f64 = a.iter().map(|x| x.norm_sqr()).sum();
    let nb: f64 = b.iter().map(|x| x.norm_sqr()).sum();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    let ip: C64 = a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
    ip.norm_sqr() / (na * nb)
}
