//! Dense complex matrices and state vectors.
//!
//! Qubit `k` (1-based) of an `n`-qubit vector is bit `n - k` of the basis index,
//! so `A ⊗ B` acts with `A` on qubit 1.

use std::ops::{Add, Mul, Sub};

pub use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Tolerance for Hermiticity and reflection checks.
pub const OPERATOR_TOL: f64 = 1e-9;
/// Tolerance on the imaginary part of an expectation value.
pub const SCALAR_TOL: f64 = 1e-10;
/// Tolerance on the norm of a state vector.
pub const NORM_TOL: f64 = 1e-12;
/// Cap on the number of entries of a dense matrix (side `2^12`).
pub const MAX_ENTRIES: usize = 1 << 24;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    /// Row-major entries.
    pub fn from_entries(dim: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch { left: dim * dim, right: data.len() });
        }
        Ok(Self { dim, data })
    }

    pub fn from_real(dim: usize, data: &[f64]) -> Result<Self> {
        Self::from_entries(dim, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m.data[i * values.len() + i] = C64::new(v, 0.0);
        }
        m
    }

    /// Block-diagonal matrix from square blocks.
    pub fn direct_sum(blocks: &[ComplexMatrix]) -> Self {
        let dim = blocks.iter().map(|b| b.dim).sum();
        let mut out = Self::zeros(dim);
        let mut off = 0;
        for b in blocks {
            for r in 0..b.dim {
                for c in 0..b.dim {
                    out.data[(off + r) * dim + off + c] = b.get(r, c);
                }
            }
            off += b.dim;
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.dim + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        self.data[r * self.dim + c] = v;
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn dagger(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for c in 0..n {
                out.data[c * n + r] = self.data[r * n + c].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| z * s).collect() }
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// `‖M - M†‖_max`.
    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for r in 0..n {
            for c in r..n {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian_deviation() <= OPERATOR_TOL
    }

    /// `M ψ` without any normalization.
    pub fn apply(&self, psi: &StateVector) -> StateVector {
        assert_eq!(self.dim, psi.dim(), "dimension mismatch");
        let n = self.dim;
        let amps = (0..n)
            .map(|r| self.data[r * n..(r + 1) * n].iter().zip(&psi.amps).map(|(a, b)| a * b).sum())
            .collect();
        StateVector { amps }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.data[r * n + k];
                if a == ZERO {
                    continue;
                }
                let row = &rhs.data[k * n..(k + 1) * n];
                for (o, b) in out.data[r * n..(r + 1) * n].iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        out
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}

/// Kronecker product `a ⊗ b`.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let dim = a.dim * b.dim;
    if dim.checked_mul(dim).is_none_or(|n| n > MAX_ENTRIES) {
        return Err(Error::TooLarge { dim, cap: MAX_ENTRIES });
    }
    let mut out = ComplexMatrix::zeros(dim);
    for ar in 0..a.dim {
        for ac in 0..a.dim {
            let x = a.get(ar, ac);
            for br in 0..b.dim {
                for bc in 0..b.dim {
                    out.data[(ar * b.dim + br) * dim + ac * b.dim + bc] = x * b.get(br, bc);
                }
            }
        }
    }
    Ok(out)
}

/// `M^k` by repeated squaring; `k <= 64`.
pub fn matpow(m: &ComplexMatrix, k: u32) -> ComplexMatrix {
    assert!(k <= 64, "matrix power {k} above cap");
    let mut result = ComplexMatrix::identity(m.dim);
    let mut base = m.clone();
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            result = &result * &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    result
}

/// Hermitian with `M^2 = I`.
pub fn is_reflection(m: &ComplexMatrix) -> bool {
    m.is_hermitian() && (m * m).max_abs_diff(&ComplexMatrix::identity(m.dim)) <= OPERATOR_TOL
}

/// `⟨ψ|M|ψ⟩` for Hermitian `M`.
pub fn expectation(m: &ComplexMatrix, psi: &StateVector) -> Result<f64> {
    if m.dim != psi.dim() {
        return Err(Error::DimensionMismatch { left: m.dim, right: psi.dim() });
    }
    let dev = m.hermitian_deviation();
    if dev > OPERATOR_TOL {
        return Err(Error::NotHermitian(dev));
    }
    let z = psi.inner(&m.apply(psi));
    if z.im.abs() > SCALAR_TOL {
        return Err(Error::ImaginaryResidue(z.im));
    }
    Ok(z.re)
}

/// Amplitudes of a (possibly unnormalized) vector.
///
/// [`StateVector::new`] enforces unit norm; intermediate results of operator
/// application are not renormalized.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: Vec<C64>,
}

impl StateVector {
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        let s = Self { amps };
        let norm = s.norm_sqr().sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(s)
    }

    pub fn from_real(amps: &[f64]) -> Result<Self> {
        Self::new(amps.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// Rescales to unit norm; the input must be nonzero.
    pub fn normalized(amps: Vec<C64>) -> Result<Self> {
        let n = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::NotNormalized(n));
        }
        Self::new(amps.into_iter().map(|z| z / n).collect())
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn num_qubits(&self) -> Option<usize> {
        self.dim().is_power_of_two().then(|| self.dim().trailing_zeros() as usize)
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> C64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { amps: self.amps.iter().map(|z| z * s).collect() }
    }

    pub fn plus(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        Self { amps: self.amps.iter().zip(&other.amps).map(|(a, b)| a + b).collect() }
    }

    /// Applies a 2×2 operator to qubit `qubit` (1-based).
    pub fn apply_qubit(&self, op: &ComplexMatrix, qubit: usize) -> Self {
        assert_eq!(op.dim, 2, "single-qubit operator expected");
        let n = self.num_qubits().expect("power-of-two dimension");
        assert!(qubit >= 1 && qubit <= n, "qubit {qubit} out of range");
        let stride = 1usize << (n - qubit);
        let (a, b, c, d) = (op.get(0, 0), op.get(0, 1), op.get(1, 0), op.get(1, 1));
        let mut out = self.amps.clone();
        for base in 0..self.dim() {
            if base & stride != 0 {
                continue;
            }
            let (x0, x1) = (self.amps[base], self.amps[base | stride]);
            out[base] = a * x0 + b * x1;
            out[base | stride] = c * x0 + d * x1;
        }
        Self { amps: out }
    }

    /// `⟨ψ| ⊗_k O_k |ψ⟩` for single-qubit factors on distinct qubits, without building the full operator.
    pub fn product_expectation(&self, factors: &[(usize, &ComplexMatrix)]) -> C64 {
        let v = factors.iter().fold(self.clone(), |v, (q, op)| v.apply_qubit(op, *q));
        self.inner(&v)
    }
}
