//! Mixed-state localization operators `chi_Omega * S` and their spectra.

use serde::Serialize;

use crate::conv::{fun_op_conv, s_tilde};
use crate::error::{Error, Result};
use crate::finops::{eigh, EigenDecomposition, OperatorMatrix, DEFAULT_HERMITIAN_TOL};
use crate::grid::PhaseSpaceFunction;
use crate::lattice::Domain;
use crate::states::DensityOperator;

/// Distance from an integer below which `|Omega|` counts as that integer.
pub const INTEGER_GUARD: f64 = 1e-9;
/// Gap below which `lambda_A` and `lambda_{A+1}` are treated as tied.
pub const DEGENERACY_TOL: f64 = 1e-8;

/// `A_Omega = ceil(|Omega|)`, with values within [`INTEGER_GUARD`] of an
/// integer rounded to it.
pub fn a_omega(measure: f64) -> usize {
    let r = measure.round();
    if (measure - r).abs() <= INTEGER_GUARD {
        r.max(0.0) as usize
    } else {
        measure.ceil().max(0.0) as usize
    }
}

/// `chi_Omega * S = w sum_{z in Omega} alpha_z(S)`.
pub fn localization_operator(domain: &Domain, s: &DensityOperator) -> Result<OperatorMatrix> {
    fun_op_conv(&domain.indicator(), s.matrix())
}

/// A localization operator with its spectral data.
#[derive(Debug, Clone)]
pub struct LocalizationResult {
    pub operator: OperatorMatrix,
    pub domain: Domain,
    pub state_label: String,
    pub state_fingerprint: u64,
    pub eig: EigenDecomposition,
    pub measure: f64,
    pub a_omega: usize,
    /// `lambda_{A}` and `lambda_{A+1}` are numerically tied, so the
    /// truncated eigenspace is basis dependent.
    pub degenerate: bool,
}

impl LocalizationResult {
    pub fn eigenvalues(&self) -> &[f64] {
        self.eig.values()
    }

    /// `sum_{k <= A} lambda_k`.
    pub fn top_sum(&self) -> f64 {
        self.eig.values().iter().take(self.a_omega).sum()
    }

    /// `tr T`, spectrally.
    pub fn trace(&self) -> f64 {
        self.eig.values().iter().sum()
    }

    /// `tr T^2`, spectrally.
    pub fn trace_sq(&self) -> f64 {
        self.eig.values().iter().map(|l| l * l).sum()
    }

    /// Eigenvalue list as CSV with columns `k,lambda` (1-based).
    pub fn eigenvalues_csv(&self) -> String {
        let mut out = String::from("k,lambda\n");
        for (k, l) in self.eig.values().iter().enumerate() {
            out.push_str(&format!("{},{:e}\n", k + 1, l));
        }
        out
    }
}

pub fn analyze(domain: &Domain, s: &DensityOperator) -> Result<LocalizationResult> {
    let operator = localization_operator(domain, s)?;
    let eig = eigh(&operator, DEFAULT_HERMITIAN_TOL)?;
    let measure = domain.measure();
    let a = a_omega(measure);
    let degenerate = eig.split_is_degenerate(a, DEGENERACY_TOL);
    Ok(LocalizationResult {
        operator,
        domain: domain.clone(),
        state_label: s.label().to_string(),
        state_fingerprint: s.fingerprint(),
        eig,
        measure,
        a_omega: a,
        degenerate,
    })
}

/// `#{k : lambda_k > 1 - delta}`.
pub fn plunge_count(result: &LocalizationResult, delta: f64) -> Result<usize> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::BadDelta(delta));
    }
    Ok(result.eig.values().iter().filter(|&&l| l > 1.0 - delta).count())
}

/// `max(1/delta, 1/(1-delta)) * |second_moment - |Omega||`, the computable
/// bound on `|plunge_count - |Omega||`.
pub fn plunge_bound(measure: f64, second_moment: f64, delta: f64) -> f64 {
    (1.0 / delta).max(1.0 / (1.0 - delta)) * (second_moment - measure).abs()
}

/// `w^2 sum_{z, z' in Omega} S~(z - z')` for a precomputed `S~`.
pub fn second_moment_with(domain: &Domain, st: &PhaseSpaceFunction) -> f64 {
    cross_sum(domain, &domain.indices(), st)
}

/// `w^2 sum_{z, z' in Omega} S~(z - z')`, equal to `tr((chi_Omega * S)^2)`.
pub fn second_moment(domain: &Domain, s: &DensityOperator) -> f64 {
    second_moment_with(domain, &s_tilde(s.matrix()))
}

/// `w^2 sum_{z in Omega} sum_{z' in targets} S~(z - z')`.
fn cross_sum(domain: &Domain, targets: &[usize], st: &PhaseSpaceFunction) -> f64 {
    let lat = *domain.lattice();
    let n = lat.n();
    let vals = st.data();
    let mut total = 0.0;
    for p in domain.points() {
        let mut row = 0.0;
        for &j in targets {
            let q = lat.point(j);
            let dm = (p.m + n - q.m) % n;
            let dn = (p.n + n - q.n) % n;
            row += vals[dm * n + dn].re;
        }
        total += row;
    }
    total * lat.weight() * lat.weight()
}

/// Tolerance scale for the two-route projection functional: `1e-9 * N`.
pub fn projection_tolerance(n: usize) -> f64 {
    1e-9 * n as f64
}

/// Both routes of the projection functional `tr T - tr T^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProjectionFunctional {
    /// `sum lambda_k - sum lambda_k^2`.
    pub spectral: f64,
    /// `w^2 sum_{z in Omega} sum_{z' not in Omega} S~(z - z')`.
    pub cross_boundary: f64,
}

impl ProjectionFunctional {
    pub fn deviation(&self) -> f64 {
        (self.spectral - self.cross_boundary).abs()
    }
}

/// Evaluate both routes without checking agreement.
pub fn projection_functional_routes(result: &LocalizationResult, st: &PhaseSpaceFunction) -> ProjectionFunctional {
    let outside = result.domain.complement().indices();
    ProjectionFunctional {
        spectral: result.trace() - result.trace_sq(),
        cross_boundary: cross_sum(&result.domain, &outside, st),
    }
}

/// `tr T - tr T^2` for `T = chi_Omega * S`, cross-checked against the
/// boundary double sum. Returns the spectral value.
pub fn projection_functional_of(result: &LocalizationResult, st: &PhaseSpaceFunction) -> Result<f64> {
    let pf = projection_functional_routes(result, st);
    let tol = projection_tolerance(result.domain.lattice().n());
    if pf.deviation() > tol {
        return Err(Error::ConsistencyFailure {
            what: "projection functional",
            deviation: pf.deviation(),
            tol,
        });
    }
    Ok(pf.spectral)
}

pub fn projection_functional(domain: &Domain, s: &DensityOperator) -> Result<f64> {
    let result = analyze(domain, s)?;
    projection_functional_of(&result, &s_tilde(s.matrix()))
}

/// `E(Omega) = 1 - (sum_{k <= A} lambda_k) / |Omega|`.
pub fn deficiency(result: &LocalizationResult) -> Result<f64> {
    if result.measure <= 0.0 {
        return Err(Error::EmptyDomain);
    }
    Ok(1.0 - result.top_sum() / result.measure)
}

/// JSON-ready summary of a localization result.
#[derive(Debug, Clone, Serialize)]
pub struct LocalizationSummary {
    pub measure: f64,
    #[serde(rename = "A_Omega")]
    pub a_omega: usize,
    pub trace: f64,
    pub second_moment: f64,
    pub projection_functional: f64,
    pub degenerate: bool,
}

pub fn summarize(result: &LocalizationResult, st: &PhaseSpaceFunction) -> Result<LocalizationSummary> {
    Ok(LocalizationSummary {
        measure: result.measure,
        a_omega: result.a_omega,
        trace: result.trace(),
        second_moment: second_moment_with(&result.domain, st),
        projection_functional: projection_functional_of(result, st)?,
        degenerate: result.degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finops::{translate_op, SignalVector};
    use crate::lattice::{rasterize, LatticePoint, PhaseLattice, ShapeSpec};
    use crate::states::{gaussian_window, rank_one_state, thermal_state};
    use num_complex::Complex64;

    fn gaussian(n: usize) -> DensityOperator {
        rank_one_state(&gaussian_window(PhaseLattice::new(n))).unwrap()
    }

    #[test]
    fn a_omega_integer_guard() {
        assert_eq!(a_omega(2.0), 2);
        assert_eq!(a_omega(2.0 + 1e-12), 2);
        assert_eq!(a_omega(2.0 - 1e-12), 2);
        assert_eq!(a_omega(2.01), 3);
        assert_eq!(a_omega(0.0), 0);
        assert_eq!(a_omega(0.125), 1);
    }

    #[test]
    fn full_and_empty_domains() {
        let s = gaussian(8);
        let lat = s.lattice();
        let full = analyze(&Domain::full(lat), &s).unwrap();
        assert!(full.operator.max_abs_diff(&OperatorMatrix::identity(lat)) <= 1e-10);
        assert!(full.eigenvalues().iter().all(|l| (l - 1.0).abs() < 1e-10));
        assert_eq!(full.a_omega, 8);
        assert_eq!(plunge_count(&full, 0.3).unwrap(), 8);
        assert!(deficiency(&full).unwrap().abs() < 1e-10);
        assert!((second_moment(&Domain::full(lat), &s) - 8.0).abs() < 1e-10);
        assert!(projection_functional(&Domain::full(lat), &s).unwrap().abs() < 1e-9);

        let empty = analyze(&Domain::empty(lat), &s).unwrap();
        assert_eq!(empty.operator, OperatorMatrix::zeros(lat));
        assert_eq!(plunge_count(&empty, 0.5).unwrap(), 0);
        assert_eq!(second_moment(&Domain::empty(lat), &s), 0.0);
        assert_eq!(projection_functional(&Domain::empty(lat), &s).unwrap(), 0.0);
        assert!(matches!(deficiency(&empty), Err(Error::EmptyDomain)));
    }

    #[test]
    fn single_point_domain_with_delta_state() {
        let lat = PhaseLattice::new(8);
        let s = rank_one_state(&SignalVector::delta(lat, 0)).unwrap();
        let z0 = LatticePoint::new(5, 3);
        let dom = Domain::from_points(lat, [z0]).unwrap();
        let op = localization_operator(&dom, &s).unwrap();
        let expected = translate_op(s.matrix(), z0).scale(Complex64::new(1.0 / 8.0, 0.0));
        assert!(op.max_abs_diff(&expected) < 1e-15);
        assert!((op.trace().re - 1.0 / 8.0).abs() < 1e-15);
        let r = analyze(&dom, &s).unwrap();
        assert_eq!(r.a_omega, 1);
        let e = deficiency(&r).unwrap();
        assert!((e - (1.0 - r.eigenvalues()[0] / (1.0 / 8.0))).abs() < 1e-12);
    }

    #[test]
    fn bad_delta_is_rejected() {
        let s = gaussian(4);
        let r = analyze(&Domain::full(s.lattice()), &s).unwrap();
        for d in [0.0, 1.0, -0.5, 1.5, f64::NAN] {
            assert!(matches!(plunge_count(&r, d), Err(Error::BadDelta(_))));
        }
    }

    #[test]
    fn second_moment_matches_matrix_square() {
        let s = gaussian(32);
        let lat = s.lattice();
        let dom = rasterize(&ShapeSpec::ball([0.3, -0.2], 1.1), 1.0, lat).unwrap();
        let op = localization_operator(&dom, &s).unwrap();
        let oracle = op.matmul(&op).unwrap().trace().re;
        assert!((second_moment(&dom, &s) - oracle).abs() <= 1e-9);
    }

    #[test]
    fn disk_shows_plunge() {
        let s = gaussian(64);
        let lat = s.lattice();
        // |Omega| close to 4
        let r = (4.0 / std::f64::consts::PI).sqrt();
        let dom = rasterize(&ShapeSpec::ball([0.0, 0.0], r), 1.0, lat).unwrap();
        let res = analyze(&dom, &s).unwrap();
        assert!(res.eigenvalues()[0] > 0.9);
        let st = s_tilde(s.matrix());
        let sm = second_moment_with(&dom, &st);
        let count = plunge_count(&res, 0.5).unwrap() as f64;
        assert!((count - res.measure).abs() <= plunge_bound(res.measure, sm, 0.5) + 1e-9);
        // plunge width is of the order of the perimeter
        assert!((count - res.measure).abs() <= dom.perimeter());
    }

    #[test]
    fn projection_functional_routes_agree() {
        let lat = PhaseLattice::new(32);
        let s = thermal_state(lat, 0.5, 4).unwrap();
        let st = s_tilde(s.matrix());
        let dom = rasterize(&ShapeSpec::rectangle([-0.5, -0.7], [1.3, 0.9]), 1.0, lat).unwrap();
        let res = analyze(&dom, &s).unwrap();
        let pf = projection_functional_routes(&res, &st);
        assert!(pf.deviation() <= 1e-9 * 32.0);
        assert!(pf.spectral > 0.0);
    }

    #[test]
    fn projection_functional_grows_linearly_with_radius() {
        let s = gaussian(64);
        let lat = s.lattice();
        let st = s_tilde(s.matrix());
        let l = lat.unit();
        let ratios: Vec<f64> = (2..=8)
            .map(|k| {
                let radius = 2.0 * k as f64 * l;
                let dom = rasterize(&ShapeSpec::ball([0.0, 0.0], radius), 1.0, lat).unwrap();
                let res = analyze(&dom, &s).unwrap();
                projection_functional_of(&res, &st).unwrap() / radius
            })
            .collect();
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().cloned().fold(0.0, f64::max);
        assert!(lo > 0.0 && hi / lo < 2.0, "{ratios:?}");
    }

    #[test]
    fn deficiency_decreases_for_growing_disks() {
        let s = gaussian(64);
        let lat = s.lattice();
        let l = lat.unit();
        let es: Vec<f64> = [8.0, 12.0, 16.0, 20.0, 24.0]
            .iter()
            .map(|&k| {
                let dom = rasterize(&ShapeSpec::ball([0.0, 0.0], k * l), 1.0, lat).unwrap();
                deficiency(&analyze(&dom, &s).unwrap()).unwrap()
            })
            .collect();
        assert!(es.iter().all(|&e| e >= -1e-9));
        assert!(es.last().unwrap() < es.first().unwrap(), "{es:?}");
    }

    #[test]
    fn eigenvalue_csv_has_header_and_rows() {
        let s = gaussian(4);
        let r = analyze(&Domain::full(s.lattice()), &s).unwrap();
        let csv = r.eigenvalues_csv();
        assert!(csv.starts_with("k,lambda\n1,"));
        assert_eq!(csv.lines().count(), 5);
    }
}
