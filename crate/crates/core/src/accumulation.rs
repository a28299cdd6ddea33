//! Cohen class distributions and accumulated distributions.
//!
//! For a state `S` the Cohen class distribution of `psi` is
//! `Q_S(psi)(z) = <S pi(z)* psi, pi(z)* psi>`; for `S = phi (x) phi` this is
//! the spectrogram `|V_phi psi|^2`. The accumulated distribution sums `Q_S`
//! over the top `A_Omega = ceil(|Omega|)` eigenvectors of `chi_Omega * S`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::conv::{fun_fun_conv, s_tilde};
use crate::error::{Error, Result};
use crate::finops::{dft_chunks, OperatorMatrix, SignalVector};
use crate::grid::PhaseSpaceFunction;
use crate::lattice::Domain;
use crate::spectra::{analyze, LocalizationResult};
use crate::states::DensityOperator;

/// `Q_S(psi)(z) = <S pi(z)* psi, pi(z)* psi>`.
///
/// Evaluated as a DFT along the diagonal offset `d`:
/// `Q(m, n) = sum_d exp(2 pi i n d / N) sum_b S[b+d, b] psi(b+m) conj(psi(b+d+m))`.
/// Only the real part is kept, which is the whole value for Hermitian `S`.
pub fn cohen_distribution(s: &OperatorMatrix, psi: &SignalVector) -> Result<PhaseSpaceFunction> {
    let n = s.n();
    if psi.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: psi.len(),
        });
    }
    let lat = s.lattice();
    let mut buf = Vec::with_capacity(n * n);
    for m in 0..n {
        for d in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for b in 0..n {
                acc += s.get((b + d) % n, b) * psi.get((b + m) % n) * psi.get((b + d + m) % n).conj();
            }
            buf.push(acc);
        }
    }
    dft_chunks(&mut buf, n, true);
    Ok(PhaseSpaceFunction::from_complex(lat, buf).into_real())
}

/// `rho_Omega^S` together with the data it was built from.
#[derive(Debug, Clone)]
pub struct AccumulatedDistribution {
    pub grid: PhaseSpaceFunction,
    pub domain: Domain,
    pub a_omega: usize,
    pub degenerate: bool,
    pub state_label: String,
}

impl AccumulatedDistribution {
    /// `|rho - chi_Omega|` pointwise.
    pub fn abs_diff(&self) -> PhaseSpaceFunction {
        let chi = self.domain.indicator();
        let lat = *self.grid.lattice();
        PhaseSpaceFunction::from_real_fn(lat, |p| (self.grid.re(p) - chi.re(p)).abs())
    }
}

/// Sum of `Q_S(h_k)` over terms `0..count`, reduced in index order.
fn sum_cohen_terms(s: &OperatorMatrix, result: &LocalizationResult, weights: &[f64]) -> Result<PhaseSpaceFunction> {
    let lat = s.lattice();
    let terms: Vec<PhaseSpaceFunction> = weights
        .par_iter()
        .enumerate()
        .map(|(k, &w)| cohen_distribution(s, &result.eig.vector(k)).map(|q| q.scale(w)))
        .collect::<Result<_>>()?;
    let mut acc = PhaseSpaceFunction::zeros(lat);
    for t in &terms {
        acc.add_assign(t);
    }
    Ok(acc)
}

/// `rho_Omega^S = sum_{k <= A_Omega} Q_S(h_k)`.
pub fn accumulate(result: &LocalizationResult, s: &DensityOperator) -> Result<AccumulatedDistribution> {
    if result.state_fingerprint != s.fingerprint() || result.domain.lattice().n() != s.lattice().n() {
        return Err(Error::MismatchedState);
    }
    let ones = vec![1.0; result.a_omega];
    let grid = sum_cohen_terms(s.matrix(), result, &ones)?;
    Ok(AccumulatedDistribution {
        grid,
        domain: result.domain.clone(),
        a_omega: result.a_omega,
        degenerate: result.degenerate,
        state_label: s.label().to_string(),
    })
}

/// `w sum_z |rho(z) - chi_Omega(z)|`.
pub fn l1_error(rho: &AccumulatedDistribution) -> f64 {
    rho.grid.l1_distance(&rho.domain.indicator())
}

/// `(|Omega| - sum_{k<=A} lambda_k) + (A - sum_{k<=A} lambda_k)`, the same
/// quantity as [`l1_error`] obtained from the spectrum alone.
pub fn l1_error_spectral(result: &LocalizationResult) -> f64 {
    let top = result.top_sum();
    (result.measure - top) + (result.a_omega as f64 - top)
}

/// `w * #{z : |rho(z) - chi_Omega(z)| > delta}`.
pub fn levelset_measure(rho: &AccumulatedDistribution, delta: f64) -> Result<f64> {
    if delta.is_nan() || delta <= 0.0 {
        return Err(Error::BadDelta(delta));
    }
    let chi = rho.domain.indicator();
    let lat = *rho.grid.lattice();
    let count = lat
        .points()
        .filter(|&p| (rho.grid.re(p) - chi.re(p)).abs() > delta)
        .count();
    Ok(count as f64 * lat.weight())
}

/// `chi_Omega * S~`.
pub fn smoothed_indicator(domain: &Domain, st: &PhaseSpaceFunction) -> Result<PhaseSpaceFunction> {
    Ok(fun_fun_conv(&domain.indicator(), st)?.into_real())
}

/// `sum_k lambda_k Q_S(h_k)` over the full spectrum.
pub fn weighted_cohen_expansion(result: &LocalizationResult, s: &DensityOperator) -> Result<PhaseSpaceFunction> {
    sum_cohen_terms(s.matrix(), result, result.eig.values())
}

/// Max pointwise deviation between `chi_Omega * S~` and
/// `sum_k lambda_k Q_S(h_k)`.
pub fn reconstruction_identity_check(domain: &Domain, s: &DensityOperator) -> Result<f64> {
    let result = analyze(domain, s)?;
    let left = smoothed_indicator(domain, &s_tilde(s.matrix()))?;
    let right = weighted_cohen_expansion(&result, s)?;
    Ok(left.max_abs_diff(&right))
}

/// Right side of `||rho - chi * S~||_1 <= 1 + 2 E(Omega) |Omega|`.
pub fn abreu_bound(deficiency: f64, measure: f64) -> f64 {
    1.0 + 2.0 * deficiency * measure
}

/// Right side of
/// `||rho - chi * S~||_1 / |Omega| <= 1/|Omega| + 4 ||S||_{M*} sqrt(|dOmega| / |Omega|)`.
pub fn relative_l1_bound(mstar_sq: f64, perimeter: f64, measure: f64) -> f64 {
    1.0 / measure + 4.0 * mstar_sq.sqrt() * (perimeter / measure).sqrt()
}

/// Right side of `||rho - chi||_1 <= (1/eps + 2 ||S||^2_{M*}) |dOmega|`,
/// valid when `|dOmega| >= eps`.
pub fn perimeter_bound(eps: f64, mstar_sq: f64, perimeter: f64) -> f64 {
    (1.0 / eps + 2.0 * mstar_sq) * perimeter
}

/// Constant in the level-set estimate
/// `|{|rho - chi| > delta}| <= C ||S||^2_{M*} |dOmega| / delta^2`.
///
/// Calibrated on disks and rectangles for N = 64 over Gaussian, thermal and
/// smoothed states (largest observed ratio 0.19) and frozen with headroom.
pub const LEVELSET_CONSTANT: f64 = 0.5;

/// Right side of the level-set estimate with [`LEVELSET_CONSTANT`].
pub fn levelset_bound(mstar_sq: f64, perimeter: f64, delta: f64) -> f64 {
    LEVELSET_CONSTANT * mstar_sq * perimeter / (delta * delta)
}
