//! Density operators: construction, validation and the `M*` norm.

use std::path::Path;

use num_complex::Complex64;
use rand::Rng;

use crate::conv::{fun_op_conv, s_tilde};
use crate::error::{Error, Result};
use crate::finops::{eigh, OperatorMatrix, SignalVector};
use crate::grid::PhaseSpaceFunction;
use crate::lattice::{LatticePoint, PhaseLattice};

/// Tolerance used when constructors validate their output.
pub const CONSTRUCT_TOL: f64 = 1e-9;

/// A positive operator with unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: OperatorMatrix,
    label: String,
}

impl DensityOperator {
    /// Validate `matrix` at [`CONSTRUCT_TOL`] and wrap it.
    pub fn new(matrix: OperatorMatrix, label: impl Into<String>) -> Result<Self> {
        let report = validate_density(&matrix, CONSTRUCT_TOL);
        if !report.accepted() {
            return Err(Error::NotDensity(report.to_string()));
        }
        Ok(Self {
            matrix,
            label: label.into(),
        })
    }

    pub fn matrix(&self) -> &OperatorMatrix {
        &self.matrix
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn lattice(&self) -> PhaseLattice {
        self.matrix.lattice()
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Stable fingerprint of the matrix bytes.
    pub fn fingerprint(&self) -> u64 {
        use std::hash::{Hash, Hasher};
        let mut h = std::collections::hash_map::DefaultHasher::new();
        self.matrix.n().hash(&mut h);
        for c in self.matrix.as_matrix().iter() {
            c.re.to_bits().hash(&mut h);
            c.im.to_bits().hash(&mut h);
        }
        h.finish()
    }
}

/// Residuals of the three density-operator checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityReport {
    /// `max |S - S*|`.
    pub hermitian_residual: f64,
    /// Smallest eigenvalue of `(S + S*) / 2`.
    pub min_eigenvalue: f64,
    /// `|tr S - 1|`.
    pub trace_residual: f64,
    pub tol: f64,
}

impl DensityReport {
    pub fn hermitian_ok(&self) -> bool {
        self.hermitian_residual <= self.tol
    }

    pub fn positive_ok(&self) -> bool {
        self.min_eigenvalue >= -self.tol
    }

    pub fn trace_ok(&self) -> bool {
        self.trace_residual <= self.tol
    }

    pub fn accepted(&self) -> bool {
        self.hermitian_ok() && self.positive_ok() && self.trace_ok()
    }
}

impl std::fmt::Display for DensityReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "hermitian {:e} [{}], min eigenvalue {:e} [{}], trace residual {:e} [{}] at tol {:e}",
            self.hermitian_residual,
            ok(self.hermitian_ok()),
            self.min_eigenvalue,
            ok(self.positive_ok()),
            self.trace_residual,
            ok(self.trace_ok()),
            self.tol
        )
    }
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "FAIL"
    }
}

pub fn validate_density(s: &OperatorMatrix, tol: f64) -> DensityReport {
    let hermitian_residual = s.hermitian_residual();
    let min_eigenvalue = eigh(&s.symmetrized(), f64::INFINITY)
        .map(|e| e.values().last().copied().unwrap_or(0.0))
        .unwrap_or(f64::NEG_INFINITY);
    let tr = s.trace();
    let trace_residual = (tr - Complex64::new(1.0, 0.0)).norm();
    DensityReport {
        hermitian_residual,
        min_eigenvalue,
        trace_residual,
        tol,
    }
}

/// Ordered orthonormal window vectors.
#[derive(Debug, Clone)]
pub struct WindowFamily {
    vectors: Vec<SignalVector>,
}

impl WindowFamily {
    pub fn vectors(&self) -> &[SignalVector] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

// Number of periods on each side so the omitted Gaussian tail is below 1e-14.
fn periodization_range(n: usize) -> i64 {
    // exp(-pi N (J + 1/2)^2) < 1e-14  <=  pi N (J + 1/2)^2 > 33
    (33.0 / (std::f64::consts::PI * n as f64)).sqrt().ceil() as i64 + 1
}

/// Signed representative of `t` in `(-N/2, N/2]`.
fn centered_index(t: usize, n: usize) -> i64 {
    let t = t as i64;
    let n = n as i64;
    if 2 * t > n {
        t - n
    } else {
        t
    }
}

/// Periodized samples of the Hermite functions `h_0 .. h_{K-1}`, with
/// `h_0(x) = exp(-pi x^2)` up to normalization, at spacing `l`.
fn sampled_hermites(lattice: PhaseLattice, k: usize) -> Vec<Vec<f64>> {
    let n = lattice.n();
    let l = lattice.unit();
    let j_max = periodization_range(n) + (k as i64) / 2 + 1;
    let scale = (2.0 * std::f64::consts::PI).sqrt();
    let mut out = vec![vec![0.0; n]; k];
    for t in 0..n {
        let tc = centered_index(t, n);
        for j in -j_max..=j_max {
            let y = scale * l * (tc + j * n as i64) as f64;
            // normalized Hermite-function recurrence in y
            let mut prev = 0.0;
            let mut cur = std::f64::consts::PI.powf(-0.25) * (-0.5 * y * y).exp();
            for (order, row) in out.iter_mut().enumerate() {
                row[t] += cur;
                let kf = order as f64;
                let next = (2.0 / (kf + 1.0)).sqrt() * y * cur - (kf / (kf + 1.0)).sqrt() * prev;
                prev = cur;
                cur = next;
            }
        }
    }
    out
}

/// Periodized sampled Gaussian `exp(-pi l^2 t^2)`, unit norm and even.
pub fn gaussian_window(lattice: PhaseLattice) -> SignalVector {
    let n = lattice.n();
    let l2 = lattice.weight();
    let j_max = periodization_range(n);
    let g: Vec<f64> = (0..n)
        .map(|t| {
            let tc = centered_index(t, n);
            (-j_max..=j_max)
                .map(|j| {
                    let x = (tc + j * n as i64) as f64;
                    (-std::f64::consts::PI * l2 * x * x).exp()
                })
                .sum()
        })
        .collect();
    SignalVector::from_real(&g)
        .normalized()
        .expect("Gaussian samples are nonzero")
}

/// First `k` periodized sampled Hermite functions, Gram-Schmidt
/// orthonormalized in order.
pub fn hermite_family(lattice: PhaseLattice, k: usize) -> Result<WindowFamily> {
    let n = lattice.n();
    if k > n {
        return Err(Error::TooManyWindows { k, n });
    }
    let raw = sampled_hermites(lattice, k);
    let mut vectors: Vec<SignalVector> = Vec::with_capacity(k);
    for samples in raw {
        let mut v: Vec<Complex64> = samples.into_iter().map(|x| Complex64::new(x, 0.0)).collect();
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for q in &vectors {
                let c: Complex64 = v.iter().zip(q.as_slice()).map(|(a, b)| a * b.conj()).sum();
                for (a, b) in v.iter_mut().zip(q.as_slice()) {
                    *a -= c * b;
                }
            }
        }
        let sv = SignalVector::new(v);
        if sv.norm() < 1e-10 {
            return Err(Error::ZeroVector);
        }
        vectors.push(sv.normalized()?);
    }
    Ok(WindowFamily { vectors })
}

/// `phi (x) phi` for the normalized `phi`.
pub fn rank_one_state(phi: &SignalVector) -> Result<DensityOperator> {
    let u = phi.normalized()?;
    DensityOperator::new(OperatorMatrix::rank_one(&u, &u), "rankone")
}

/// Convex combination `sum_i w_i S_i`.
pub fn mixture(states: &[DensityOperator], weights: &[f64]) -> Result<DensityOperator> {
    if states.is_empty() || states.len() != weights.len() {
        return Err(Error::BadWeights(format!(
            "{} states with {} weights",
            states.len(),
            weights.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| w.is_nan() || **w < 0.0) {
        return Err(Error::BadWeights(format!("negative weight {w}")));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::BadWeights(format!("weights sum to {total}")));
    }
    let lat = states[0].lattice();
    let mut acc = OperatorMatrix::zeros(lat);
    for (s, &w) in states.iter().zip(weights) {
        acc = acc.add(&s.matrix().scale(Complex64::new(w, 0.0)))?;
    }
    let label = states
        .iter()
        .zip(weights)
        .map(|(s, w)| format!("{w}*{}", s.label()))
        .collect::<Vec<_>>()
        .join("+");
    DensityOperator::new(acc.symmetrized(), format!("mixture({label})"))
}

/// Thermal-type state `sum_k lambda^k h_k (x) h_k` over the first `k`
/// Hermite windows, normalized to unit trace.
pub fn thermal_state(lattice: PhaseLattice, lambda: f64, k: usize) -> Result<DensityOperator> {
    if !(lambda > 0.0 && lambda <= 1.0) || k == 0 {
        return Err(Error::BadWeights(format!("thermal lambda={lambda}, K={k}")));
    }
    let family = hermite_family(lattice, k)?;
    let raw: Vec<f64> = (0..k).map(|i| lambda.powi(i as i32)).collect();
    let total: f64 = raw.iter().sum();
    let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let states = family
        .vectors()
        .iter()
        .map(rank_one_state)
        .collect::<Result<Vec<_>>>()?;
    Ok(mixture(&states, &weights)?.with_label(format!("thermal:lambda={lambda},K={k}")))
}

/// `I / N`.
pub fn maximally_mixed(lattice: PhaseLattice) -> DensityOperator {
    let m = OperatorMatrix::identity(lattice).scale(Complex64::new(lattice.weight(), 0.0));
    DensityOperator::new(m, "mixed").expect("I/N is a density operator")
}

/// Mixture of `rank` projectors onto random unit vectors with random weights.
pub fn random_state<R: Rng + ?Sized>(lattice: PhaseLattice, rank: usize, rng: &mut R) -> Result<DensityOperator> {
    let rank = rank.max(1);
    let raw: Vec<f64> = (0..rank).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    // absorb rounding so the weights sum to one within 1e-15
    let drift: f64 = 1.0 - weights.iter().sum::<f64>();
    weights[0] += drift;
    let states = (0..rank)
        .map(|_| rank_one_state(&SignalVector::random_unit(lattice, rng)))
        .collect::<Result<Vec<_>>>()?;
    Ok(mixture(&states, &weights)?.with_label(format!("random:rank={rank}")))
}

/// `f * S` for a probability density `f` on the lattice.
pub fn smoothed_state(f: &PhaseSpaceFunction, s: &DensityOperator) -> Result<DensityOperator> {
    if f.max_abs_imag() > 0.0 {
        return Err(Error::BadSmoother("smoother must be real".into()));
    }
    if f.min_re() < 0.0 {
        return Err(Error::BadSmoother(format!("negative value {}", f.min_re())));
    }
    let mass = f.integral().re;
    if (mass - 1.0).abs() > 1e-10 {
        return Err(Error::BadSmoother(format!("mass {mass}")));
    }
    let m = fun_op_conv(f, s.matrix())?.symmetrized();
    DensityOperator::new(m, format!("smoothed({})", s.label()))
}

/// Periodized Gaussian probability density `~ exp(-pi |z|^2 / sigma^2)` on
/// the torus, normalized to unit mass.
pub fn gaussian_smoother(lattice: PhaseLattice, sigma: f64) -> Result<PhaseSpaceFunction> {
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(Error::BadSmoother(format!("sigma must be positive, got {sigma}")));
    }
    let raw = PhaseSpaceFunction::from_real_fn(lattice, |p| {
        let d = lattice.torus_distance(p, LatticePoint::ORIGIN);
        (-std::f64::consts::PI * d * d / (sigma * sigma)).exp()
    });
    let mass = raw.integral().re;
    Ok(raw.scale(1.0 / mass))
}

/// Uniform probability density on the lattice points within torus distance
/// `< radius` of `center`.
pub fn box_smoother(lattice: PhaseLattice, center: LatticePoint, radius: f64) -> Result<PhaseSpaceFunction> {
    let raw = PhaseSpaceFunction::from_real_fn(lattice, |p| {
        if lattice.torus_distance(p, center) < radius {
            1.0
        } else {
            0.0
        }
    });
    let mass = raw.integral().re;
    if mass <= 0.0 {
        return Err(Error::BadSmoother("box contains no lattice points".into()));
    }
    Ok(raw.scale(1.0 / mass))
}

/// The parity operator `P`, the Wigner-distribution kernel. Not a state.
pub fn parity_operator(lattice: PhaseLattice) -> OperatorMatrix {
    let n = lattice.n();
    OperatorMatrix::from_fn(lattice, |a, b| {
        if (a + b) % n == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// `||S||^2_{M*} = w sum_z S~(z) |z|` with `|z|` the torus distance to the
/// origin.
pub fn mstar_norm_sq(s: &DensityOperator) -> f64 {
    mstar_from_s_tilde(&s_tilde(s.matrix()))
}

pub(crate) fn mstar_from_s_tilde(st: &PhaseSpaceFunction) -> f64 {
    let lat = *st.lattice();
    let dist = lat.distance_to_origin_grid();
    st.data().iter().zip(&dist).map(|(v, d)| v.re * d).sum::<f64>() * lat.weight()
}

/// `w sum_z f(z) |z|`.
pub fn first_moment(f: &PhaseSpaceFunction) -> f64 {
    mstar_from_s_tilde(f)
}

/// Build a state from a textual spec.
///
/// Grammar:
///
/// - `rankone:gaussian`, `rankone:hermite=<k>`
/// - `thermal:lambda=<x>,K=<k>`
/// - `mixed` (the maximally mixed state `I/N`)
/// - `random:rank=<r>` (seeded)
/// - `file:<path>` (operator JSON)
/// - `mixture:<path>`: JSON `{"components": [{"state": <spec>, "weight": <w>}, ...]}`
/// - `smoothed:<f>,<base spec>` where `<f>` is a grid JSON/CSV path or
///   `gauss=<sigma>`
pub fn parse_state(spec: &str, lattice: PhaseLattice, seed: u64) -> Result<DensityOperator> {
    let bad = |reason: &str| Error::StateSpec {
        spec: spec.to_string(),
        reason: reason.to_string(),
    };
    let (kind, arg) = spec.split_once(':').unwrap_or((spec, ""));
    let state = match kind {
        "rankone" => {
            if arg == "gaussian" {
                rank_one_state(&gaussian_window(lattice))?
            } else if let Some(k) = arg.strip_prefix("hermite=") {
                let k: usize = k.parse().map_err(|_| bad("hermite index"))?;
                let fam = hermite_family(lattice, k + 1)?;
                rank_one_state(&fam.vectors()[k])?
            } else {
                return Err(bad("expected `gaussian` or `hermite=<k>`"));
            }
        }
        "thermal" => {
            let mut lambda = None;
            let mut k = None;
            for kv in arg.split(',') {
                match kv.split_once('=') {
                    Some(("lambda", v)) => lambda = v.parse::<f64>().ok(),
                    Some(("K", v)) => k = v.parse::<usize>().ok(),
                    _ => return Err(bad("expected lambda=<x>,K=<k>")),
                }
            }
            let (Some(lambda), Some(k)) = (lambda, k) else {
                return Err(bad("expected lambda=<x>,K=<k>"));
            };
            thermal_state(lattice, lambda, k)?
        }
        "mixed" => maximally_mixed(lattice),
        "random" => {
            let rank = arg
                .strip_prefix("rank=")
                .and_then(|r| r.parse::<usize>().ok())
                .ok_or_else(|| bad("expected rank=<r>"))?;
            let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
            random_state(lattice, rank, &mut rng)?
        }
        "file" => {
            let m = OperatorMatrix::from_json(&std::fs::read_to_string(arg)?)?;
            if m.n() != lattice.n() {
                return Err(Error::DimensionMismatch {
                    expected: lattice.n(),
                    got: m.n(),
                });
            }
            DensityOperator::new(m, "file")?
        }
        "mixture" => {
            #[derive(serde::Deserialize)]
            struct Component {
                state: String,
                weight: f64,
            }
            #[derive(serde::Deserialize)]
            struct MixtureFile {
                components: Vec<Component>,
            }
            let doc: MixtureFile = serde_json::from_str(&std::fs::read_to_string(arg)?)?;
            let states = doc
                .components
                .iter()
                .map(|c| parse_state(&c.state, lattice, seed))
                .collect::<Result<Vec<_>>>()?;
            let weights: Vec<f64> = doc.components.iter().map(|c| c.weight).collect();
            mixture(&states, &weights)?
        }
        "smoothed" => {
            let (f_spec, base) = arg.split_once(',').ok_or_else(|| bad("expected <f>,<base>"))?;
            let f = if let Some(sigma) = f_spec.strip_prefix("gauss=") {
                gaussian_smoother(lattice, sigma.parse().map_err(|_| bad("sigma"))?)?
            } else {
                load_grid(Path::new(f_spec))?
            };
            if f.lattice() != &lattice {
                return Err(Error::DimensionMismatch {
                    expected: lattice.n(),
                    got: f.lattice().n(),
                });
            }
            smoothed_state(&f, &parse_state(base, lattice, seed)?)?
        }
        _ => return Err(bad("unknown state kind")),
    };
    Ok(state.with_label(spec))
}

/// Load a grid from `.json` or `.csv` (real part only).
pub fn load_grid(path: &Path) -> Result<PhaseSpaceFunction> {
    let text = std::fs::read_to_string(path)?;
    if path.extension().is_some_and(|e| e == "csv") {
        PhaseSpaceFunction::from_csv(&text, None)
    } else {
        PhaseSpaceFunction::from_json(&text)
    }
}
