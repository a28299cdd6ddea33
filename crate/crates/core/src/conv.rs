//! Convolutions between functions and operators on the finite phase space.
//!
//! All integrals are `w`-weighted lattice sums:
//!
//! - `f * S = w sum_z f(z) alpha_z(S)` (an operator),
//! - `S * T (z) = tr(S alpha_z(T^))` (a function),
//! - `f * g (z) = w sum_z' f(z') g(z - z')` (a function).
//!
//! Since `sum_z alpha_z(S) = N tr(S) I`, the constant function `1` convolved
//! with `S` gives exactly `tr(S) I`.
//!
//! The operator translations are never formed as dense products; each
//! convolution is a phase-twisted index shift followed by a DFT along the
//! diagonal offset `d = a - b`, `O(N^3)` overall.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::finops::{dft_chunks, parity_conjugate, OperatorMatrix};
use crate::grid::PhaseSpaceFunction;
use crate::lattice::PhaseLattice;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

fn same_lattice(a: &PhaseLattice, b: &PhaseLattice) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch {
            expected: a.n(),
            got: b.n(),
        });
    }
    Ok(())
}

/// `f * S = w sum_z f(z) pi(z) S pi(z)*`.
pub fn fun_op_conv(f: &PhaseSpaceFunction, s: &OperatorMatrix) -> Result<OperatorMatrix> {
    let lat = s.lattice();
    same_lattice(f.lattice(), &lat)?;
    let n = lat.n();
    // kernel[m][d] = sum_n f(m, n) exp(2 pi i n d / N)
    let mut kernel = f.data().to_vec();
    dft_chunks(&mut kernel, n, true);
    let w = lat.weight();
    let rows: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|a| {
            (0..n)
                .map(|b| {
                    let d = (a + n - b) % n;
                    let mut acc = ZERO;
                    for m in 0..n {
                        let k = kernel[m * n + d];
                        if k != ZERO {
                            acc += k * s.get((a + n - m) % n, (b + n - m) % n);
                        }
                    }
                    acc * w
                })
                .collect()
        })
        .collect();
    Ok(OperatorMatrix::from_fn(lat, |a, b| rows[a][b]))
}

/// `S * T (z) = tr(S alpha_z(T^))` with `T^ = P T P`.
pub fn op_op_conv(s: &OperatorMatrix, t: &OperatorMatrix) -> Result<PhaseSpaceFunction> {
    if s.n() != t.n() {
        return Err(Error::DimensionMismatch {
            expected: s.n(),
            got: t.n(),
        });
    }
    Ok(trace_against_translates(s, &parity_conjugate(t)))
}

/// `z -> tr(S alpha_z(U))` for an already parity-conjugated `U`.
///
/// `tr(S alpha_z(U)) = sum_d exp(2 pi i n d / N) sum_b S[b, b+d] U[b+d-m, b-m]`.
fn trace_against_translates(s: &OperatorMatrix, u: &OperatorMatrix) -> PhaseSpaceFunction {
    let lat = s.lattice();
    let n = lat.n();
    let mut buf: Vec<Complex64> = (0..n)
        .into_par_iter()
        .flat_map_iter(|m| {
            (0..n).map(move |d| {
                let mut acc = ZERO;
                for b in 0..n {
                    let bd = (b + d) % n;
                    acc += s.get(b, bd) * u.get((bd + n - m) % n, (b + n - m) % n);
                }
                acc
            })
        })
        .collect();
    dft_chunks(&mut buf, n, true);
    PhaseSpaceFunction::from_complex(lat, buf)
}

/// The autocorrelation `S~ = S * S^`, i.e. `S~(z) = tr(S alpha_z(S))`.
///
/// Real for Hermitian `S`; the imaginary rounding residue is dropped.
pub fn s_tilde(s: &OperatorMatrix) -> PhaseSpaceFunction {
    trace_against_translates(s, s).into_real()
}

fn dft2(grid: &mut [Complex64], n: usize, inverse: bool) {
    dft_chunks(grid, n, inverse);
    let mut tr = vec![ZERO; n * n];
    for i in 0..n {
        for j in 0..n {
            tr[j * n + i] = grid[i * n + j];
        }
    }
    dft_chunks(&mut tr, n, inverse);
    for i in 0..n {
        for j in 0..n {
            grid[i * n + j] = tr[j * n + i];
        }
    }
}

/// Cyclic convolution `(f * g)(z) = w sum_z' f(z') g(z - z')`, via 2-D DFT.
pub fn fun_fun_conv(f: &PhaseSpaceFunction, g: &PhaseSpaceFunction) -> Result<PhaseSpaceFunction> {
    same_lattice(f.lattice(), g.lattice())?;
    let lat = *f.lattice();
    let n = lat.n();
    let mut a = f.data().to_vec();
    let mut b = g.data().to_vec();
    dft2(&mut a, n, false);
    dft2(&mut b, n, false);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y;
    }
    dft2(&mut a, n, true);
    // inverse DFT normalization 1/N^2 times the measure w = 1/N
    let scale = lat.weight() / (n * n) as f64;
    Ok(PhaseSpaceFunction::from_complex(lat, a.into_iter().map(|c| c * scale).collect()))
}
