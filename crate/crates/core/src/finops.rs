//! Operators on `C^N`: time-frequency shifts, parity, operator translation,
//! the finite STFT and a Hermitian eigensolver.
//!
//! The time-frequency shift is `pi(m, n) = M_n T_m`, translation first:
//!
//! ```text
//! (pi(m, n) psi)(t) = exp(2 pi i n t / N) psi(t - m)
//! ```
//!
//! With this order `pi(m, n) pi(m', n') = exp(-2 pi i m n' / N) pi(m + m', n + n')`.
//! Conjugation `alpha_z(S) = pi(z) S pi(z)*` kills the phase, so
//! `alpha_z . alpha_z' = alpha_{z + z'}` holds exactly.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{parse_csv_rows, PhaseSpaceFunction};
use crate::lattice::{LatticePoint, PhaseLattice};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Table of `exp(2 pi i k / N)` for `k in 0..N`.
pub(crate) fn unit_roots(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64))
        .collect()
}

/// In-place DFT of each length-`n` chunk of `buf`. `inverse` selects the
/// `exp(+2 pi i ...)` kernel; neither direction is normalized.
pub(crate) fn dft_chunks(buf: &mut [Complex64], n: usize, inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    fft.process(buf);
}

/// A vector in `C^N`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalVector(DVector<Complex64>);

impl SignalVector {
    pub fn new(entries: Vec<Complex64>) -> Self {
        assert!(!entries.is_empty(), "signal must be non-empty");
        Self(DVector::from_vec(entries))
    }

    pub fn from_real(entries: &[f64]) -> Self {
        Self::new(entries.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn zeros(lattice: PhaseLattice) -> Self {
        Self(DVector::from_element(lattice.n(), ZERO))
    }

    /// Standard basis vector `delta_t`.
    pub fn delta(lattice: PhaseLattice, t: usize) -> Self {
        let mut v = Self::zeros(lattice);
        v.0[t % lattice.n()] = Complex64::new(1.0, 0.0);
        v
    }

    /// Normalized complex Gaussian vector (Haar-distributed direction).
    pub fn random_unit<R: Rng + ?Sized>(lattice: PhaseLattice, rng: &mut R) -> Self {
        loop {
            let v = Self::new(
                (0..lattice.n())
                    .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                    .collect(),
            );
            if let Ok(u) = v.normalized() {
                return u;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn lattice(&self) -> PhaseLattice {
        PhaseLattice::new(self.len())
    }

    pub fn as_slice(&self) -> &[Complex64] {
        self.0.as_slice()
    }

    pub fn as_vector(&self) -> &DVector<Complex64> {
        &self.0
    }

    #[inline]
    pub fn get(&self, t: usize) -> Complex64 {
        self.0[t]
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> Result<Self> {
        let nrm = self.norm();
        if !(nrm > 0.0 && nrm.is_finite()) {
            return Err(Error::ZeroVector);
        }
        Ok(Self(self.0.map(|c| c / nrm)))
    }

    /// `<self, other>`, antilinear in `other`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b.conj()).sum()
    }

    /// `(P psi)(t) = psi(-t mod N)`.
    pub fn reflect(&self) -> Self {
        let n = self.len();
        Self::new((0..n).map(|t| self.0[(n - t) % n]).collect())
    }
}

/// A complex `N x N` matrix acting on `C^N`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix(DMatrix<Complex64>);

#[derive(Serialize, Deserialize)]
struct OperatorJson {
    #[serde(rename = "N")]
    n: usize,
    /// Row-major `[re, im]` pairs.
    data: Vec<[f64; 2]>,
}

impl OperatorMatrix {
    /// Panics on a non-square or empty matrix.
    pub fn from_matrix(m: DMatrix<Complex64>) -> Self {
        assert!(m.is_square() && m.nrows() > 0, "operator must be square and non-empty");
        Self(m)
    }

    pub fn from_fn<F>(lattice: PhaseLattice, f: F) -> Self
    where
        F: FnMut(usize, usize) -> Complex64,
    {
        Self(DMatrix::from_fn(lattice.n(), lattice.n(), f))
    }

    pub fn zeros(lattice: PhaseLattice) -> Self {
        Self(DMatrix::from_element(lattice.n(), lattice.n(), ZERO))
    }

    pub fn identity(lattice: PhaseLattice) -> Self {
        Self(DMatrix::identity(lattice.n(), lattice.n()))
    }

    /// `psi (x) phi`, i.e. `xi -> <xi, phi> psi`, the matrix `psi phi*`.
    pub fn rank_one(psi: &SignalVector, phi: &SignalVector) -> Self {
        Self(psi.as_vector() * phi.as_vector().adjoint())
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn lattice(&self) -> PhaseLattice {
        PhaseLattice::new(self.n())
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.0
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> Complex64 {
        self.0[(a, b)]
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        check_dims(self.n(), other.n())?;
        Ok(Self(&self.0 * &other.0))
    }

    pub fn apply(&self, psi: &SignalVector) -> Result<SignalVector> {
        check_dims(self.n(), psi.len())?;
        Ok(SignalVector(&self.0 * psi.as_vector()))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dims(self.n(), other.n())?;
        Ok(Self(&self.0 + &other.0))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_dims(self.n(), other.n())?;
        Ok(Self(&self.0 - &other.0))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self(&self.0 * s)
    }

    /// `max |A_ij|`.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |A - A*|`.
    pub fn hermitian_residual(&self) -> f64 {
        let n = self.n();
        let mut r: f64 = 0.0;
        for a in 0..n {
            for b in a..n {
                r = r.max((self.0[(a, b)] - self.0[(b, a)].conj()).norm());
            }
        }
        r
    }

    /// `(A + A*) / 2`.
    pub fn symmetrized(&self) -> Self {
        Self((&self.0 + self.0.adjoint()) * Complex64::new(0.5, 0.0))
    }

    /// JSON with row-major `[re, im]` pairs.
    pub fn to_json(&self) -> String {
        let n = self.n();
        let mut data = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                let c = self.0[(a, b)];
                data.push([c.re, c.im]);
            }
        }
        serde_json::to_string(&OperatorJson { n, data }).expect("operator serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: OperatorJson = serde_json::from_str(s)?;
        if doc.n == 0 || doc.data.len() != doc.n * doc.n {
            return Err(Error::Parse(format!(
                "operator JSON needs N*N entries, got {} for N = {}",
                doc.data.len(),
                doc.n
            )));
        }
        let n = doc.n;
        Ok(Self(DMatrix::from_fn(n, n, |a, b| {
            let [re, im] = doc.data[a * n + b];
            Complex64::new(re, im)
        })))
    }

    /// CSV with one matrix row per line, as `re,im` pairs.
    pub fn to_csv(&self) -> String {
        let n = self.n();
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|a| (0..n).flat_map(|b| [self.0[(a, b)].re, self.0[(a, b)].im]).collect())
            .collect();
        crate::grid::rows_to_csv(&rows)
    }

    pub fn from_csv(s: &str) -> Result<Self> {
        let rows = parse_csv_rows(s)?;
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != 2 * n) {
            return Err(Error::Parse("operator CSV must be N rows of 2N values".into()));
        }
        Ok(Self(DMatrix::from_fn(n, n, |a, b| Complex64::new(rows[a][2 * b], rows[a][2 * b + 1]))))
    }
}

fn check_dims(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

pub fn trace(a: &OperatorMatrix) -> Complex64 {
    a.trace()
}

pub fn adjoint(a: &OperatorMatrix) -> OperatorMatrix {
    a.adjoint()
}

pub fn matmul(a: &OperatorMatrix, b: &OperatorMatrix) -> Result<OperatorMatrix> {
    a.matmul(b)
}

pub fn apply(a: &OperatorMatrix, psi: &SignalVector) -> Result<SignalVector> {
    a.apply(psi)
}

/// The unitary matrix of `pi(m, n) = M_n T_m`.
pub fn tf_shift(lattice: PhaseLattice, m: usize, n: usize) -> OperatorMatrix {
    let size = lattice.n();
    let roots = unit_roots(size);
    let (m, n) = (m % size, n % size);
    OperatorMatrix::from_fn(lattice, |t, s| {
        if (s + m) % size == t {
            roots[(n * t) % size]
        } else {
            ZERO
        }
    })
}

/// `S^ = P S P` with `(P psi)(t) = psi(-t)`.
pub fn parity_conjugate(s: &OperatorMatrix) -> OperatorMatrix {
    let n = s.n();
    OperatorMatrix::from_fn(s.lattice(), |a, b| s.get((n - a) % n, (n - b) % n))
}

/// `alpha_z(S) = pi(z) S pi(z)*`, evaluated entrywise as
/// `exp(2 pi i n (a - b) / N) S[a - m, b - m]`.
pub fn translate_op(s: &OperatorMatrix, z: LatticePoint) -> OperatorMatrix {
    let size = s.n();
    let roots = unit_roots(size);
    let (m, n) = (z.m % size, z.n % size);
    OperatorMatrix::from_fn(s.lattice(), |a, b| {
        let phase = roots[(n * ((a + size - b) % size)) % size];
        phase * s.get((a + size - m) % size, (b + size - m) % size)
    })
}

/// `V_phi psi(m, n) = <psi, pi(m, n) phi>` on the whole lattice.
pub fn stft(psi: &SignalVector, phi: &SignalVector) -> Result<PhaseSpaceFunction> {
    check_dims(psi.len(), phi.len())?;
    let n = psi.len();
    let lattice = PhaseLattice::new(n);
    // row m: t -> psi(t) conj(phi(t - m)), then forward DFT over t
    let mut buf = Vec::with_capacity(n * n);
    for m in 0..n {
        for t in 0..n {
            buf.push(psi.get(t) * phi.get((t + n - m) % n).conj());
        }
    }
    dft_chunks(&mut buf, n, false);
    Ok(PhaseSpaceFunction::from_complex(lattice, buf))
}

/// Spectral decomposition of a Hermitian matrix, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    values: Vec<f64>,
    /// Column `k` pairs with `values[k]`.
    vectors: DMatrix<Complex64>,
}

impl EigenDecomposition {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vectors(&self) -> &DMatrix<Complex64> {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn vector(&self, k: usize) -> SignalVector {
        SignalVector(self.vectors.column(k).into_owned())
    }

    /// True when truncating after the first `k` eigenvalues splits a cluster,
    /// i.e. `|lambda_k - lambda_{k+1}| < tol` (1-based).
    pub fn split_is_degenerate(&self, k: usize, tol: f64) -> bool {
        if k == 0 || k >= self.values.len() {
            return false;
        }
        (self.values[k - 1] - self.values[k]).abs() < tol
    }

    /// `sum_k lambda_k v_k v_k*`.
    pub fn reconstruct(&self) -> OperatorMatrix {
        let n = self.values.len();
        let mut m = DMatrix::from_element(n, n, ZERO);
        for (k, &lam) in self.values.iter().enumerate() {
            let v = self.vectors.column(k);
            m += (v * v.adjoint()) * Complex64::new(lam, 0.0);
        }
        OperatorMatrix(m)
    }
}

pub const DEFAULT_HERMITIAN_TOL: f64 = 1e-8;

/// Eigendecomposition of a Hermitian matrix.
///
/// The input is symmetrized before decomposition. Eigenvalues come back in
/// non-increasing order; ties keep the solver's order, which is fixed for
/// fixed input.
pub fn eigh(a: &OperatorMatrix, hermitian_tol: f64) -> Result<EigenDecomposition> {
    let resid = a.hermitian_residual();
    if resid > hermitian_tol {
        return Err(Error::NotHermitian(resid));
    }
    let sym = a.symmetrized().into_matrix();
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(a.n(), a.n(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(EigenDecomposition { values, vectors })
}
