//! Seeded identity suite and parameter sweeps.
//!
//! Sweeps dilate one shape over an increasing list of scales `R`, compute a
//! [`SweepRow`] per scale and attach a list of [`Check`]s: the finite
//! inequalities every row must satisfy, plus trend checks across rows.
//! Rows are computed in parallel and collected in grid order, so outputs do
//! not depend on the thread count.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::accumulation::{
    abreu_bound, accumulate, l1_error, levelset_bound, levelset_measure, perimeter_bound, relative_l1_bound,
    smoothed_indicator, weighted_cohen_expansion,
};
use crate::conv::{fun_fun_conv, fun_op_conv, op_op_conv, s_tilde};
use crate::error::{Error, Result};
use crate::finops::{OperatorMatrix, SignalVector};
use crate::grid::PhaseSpaceFunction;
use crate::lattice::{rasterize, Domain, PhaseLattice, ShapeSpec};
use crate::spectra::{
    analyze, deficiency, plunge_bound, plunge_count, projection_functional_of, projection_functional_routes,
    second_moment_with,
};
use crate::states::{mstar_norm_sq, parse_state, random_state, DensityOperator};

/// Version tag of the sweep CSV column layout, echoed in every manifest.
pub const CSV_SCHEMA_VERSION: &str = "qha-sweep/1";

/// Tolerance used by the identity suite.
pub const IDENTITY_TOL: f64 = 1e-8;

/// Tolerance knobs; every field may be overridden from the config file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Additive slack on every finite inequality.
    pub bound_slack: f64,
    /// Upper slack on `rho <= 1`.
    pub rho_max_slack: f64,
    /// Allowed deviation of the mass of `rho` from `A_Omega`.
    pub mass: f64,
    /// Required ratio between the first and last relative L1 error.
    pub convergence_factor: f64,
    /// Allowed `max/min` of `l1_error / R` in the sharpness sweep.
    pub sharpness_band: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            bound_slack: 1e-8,
            rho_max_slack: 1e-10,
            mass: 1e-8,
            convergence_factor: 1.5,
            sharpness_band: 6.0,
        }
    }
}

fn default_deltas() -> Vec<f64> {
    vec![0.25, 0.5, 0.75]
}

/// Sweep configuration, read from JSON.
///
/// `r_grid` holds dilation factors applied to `shape` in continuous units;
/// on an `N` lattice the length unit is `1/sqrt(N)`, so for `N = 64` the
/// scale `1.0` is eight lattice steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    pub state: String,
    pub shape: ShapeSpec,
    pub r_grid: Vec<f64>,
    #[serde(default = "default_deltas")]
    pub deltas: Vec<f64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn lattice(&self) -> PhaseLattice {
        PhaseLattice::new(self.n)
    }

    /// Checks the grid and deltas and that every scale rasterizes to a
    /// non-empty domain.
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("n must be positive".into()));
        }
        if self.r_grid.is_empty() {
            return Err(Error::Config("r_grid is empty".into()));
        }
        if self.r_grid.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::Config("r_grid entries must be positive".into()));
        }
        if self.r_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("r_grid must be strictly increasing".into()));
        }
        if self.deltas.iter().any(|d| !(*d > 0.0 && *d < 1.0)) {
            return Err(Error::Config("deltas must lie in (0, 1)".into()));
        }
        let lat = self.lattice();
        for &r in &self.r_grid {
            if rasterize(&self.shape, r, lat)?.is_empty() {
                return Err(Error::Config(format!("shape is empty at scale {r}")));
            }
        }
        Ok(())
    }

    pub fn build_state(&self) -> Result<DensityOperator> {
        parse_state(&self.state, self.lattice(), self.seed)
    }
}

/// One scale of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub r: f64,
    pub measure: f64,
    pub perimeter: f64,
    pub a_omega: usize,
    pub second_moment: f64,
    pub plunge_counts: Vec<usize>,
    pub deficiency: f64,
    pub l1_error: f64,
    pub rel_l1: f64,
    /// `||rho - chi_Omega * S~||_1`.
    pub smoothed_l1: f64,
    pub levelsets: Vec<f64>,
    pub projection_functional: f64,
    pub mstar_sq: f64,
    pub rho_max: f64,
    pub rho_mass: f64,
    pub degenerate: bool,
}

struct StateData<'a> {
    s: &'a DensityOperator,
    st: PhaseSpaceFunction,
    mstar_sq: f64,
}

fn compute_row(cfg: &ExperimentConfig, data: &StateData<'_>, r: f64) -> Result<SweepRow> {
    let dom = rasterize(&cfg.shape, r, cfg.lattice())?;
    let res = analyze(&dom, data.s)?;
    let rho = accumulate(&res, data.s)?;
    let plunge_counts = cfg
        .deltas
        .iter()
        .map(|&d| plunge_count(&res, d))
        .collect::<Result<Vec<_>>>()?;
    let levelsets = cfg
        .deltas
        .iter()
        .map(|&d| levelset_measure(&rho, d))
        .collect::<Result<Vec<_>>>()?;
    let smooth = smoothed_indicator(&dom, &data.st)?;
    let l1 = l1_error(&rho);
    Ok(SweepRow {
        r,
        measure: res.measure,
        perimeter: dom.perimeter(),
        a_omega: res.a_omega,
        second_moment: second_moment_with(&dom, &data.st),
        plunge_counts,
        deficiency: deficiency(&res)?,
        l1_error: l1,
        rel_l1: l1 / res.measure,
        smoothed_l1: rho.grid.l1_distance(&smooth),
        levelsets,
        projection_functional: projection_functional_of(&res, &data.st)?,
        mstar_sq: data.mstar_sq,
        rho_max: rho.grid.max_re(),
        rho_mass: rho.grid.integral().re,
        degenerate: res.degenerate,
    })
}

/// Rows for every scale in the grid, in grid order.
pub fn sweep_rows(cfg: &ExperimentConfig, s: &DensityOperator) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    if s.lattice().n() != cfg.n {
        return Err(Error::MismatchedState);
    }
    let data = StateData {
        s,
        st: s_tilde(s.matrix()),
        mstar_sq: mstar_norm_sq(s),
    };
    cfg.r_grid.par_iter().map(|&r| compute_row(cfg, &data, r)).collect()
}

/// A single inequality or trend assertion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub row: Option<usize>,
    pub lhs: f64,
    pub rhs: f64,
    pub passed: bool,
    /// Advisory checks are reported but do not fail a run.
    pub required: bool,
}

impl Check {
    fn le(name: impl Into<String>, row: Option<usize>, lhs: f64, rhs: f64, slack: f64) -> Self {
        Self {
            name: name.into(),
            row,
            lhs,
            rhs,
            passed: lhs <= rhs + slack,
            required: true,
        }
    }

    fn advisory(mut self) -> Self {
        self.required = false;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepKind {
    Plunge,
    Converge,
    Sharpness,
}

impl SweepKind {
    pub fn name(self) -> &'static str {
        match self {
            SweepKind::Plunge => "plunge",
            SweepKind::Converge => "converge",
            SweepKind::Sharpness => "sharpness",
        }
    }
}

/// Rows, checks and summary numbers of one sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub kind: SweepKind,
    pub state: String,
    pub deltas: Vec<f64>,
    pub rows: Vec<SweepRow>,
    pub checks: Vec<Check>,
    pub summary: BTreeMap<String, f64>,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed || !c.required)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| c.required && !c.passed).collect()
    }

    pub fn rows_csv(&self) -> String {
        let mut out = String::from("r,measure,perimeter,a_omega,second_moment");
        for d in &self.deltas {
            let _ = write!(out, ",plunge_{d}");
        }
        out.push_str(",deficiency,l1_error,rel_l1,smoothed_l1");
        for d in &self.deltas {
            let _ = write!(out, ",levelset_{d}");
        }
        out.push_str(",projection_functional,mstar_sq,rho_max,rho_mass,degenerate\n");
        for r in &self.rows {
            let _ = write!(
                out,
                "{},{},{},{},{}",
                r.r, r.measure, r.perimeter, r.a_omega, r.second_moment
            );
            for c in &r.plunge_counts {
                let _ = write!(out, ",{c}");
            }
            let _ = write!(out, ",{},{},{},{}", r.deficiency, r.l1_error, r.rel_l1, r.smoothed_l1);
            for v in &r.levelsets {
                let _ = write!(out, ",{v}");
            }
            let _ = writeln!(
                out,
                ",{},{},{},{},{}",
                r.projection_functional, r.mstar_sq, r.rho_max, r.rho_mass, r.degenerate
            );
        }
        out
    }

    pub fn checks_csv(&self) -> String {
        let mut out = String::from("name,row,lhs,rhs,passed,required\n");
        for c in &self.checks {
            let row = c.row.map(|r| r.to_string()).unwrap_or_default();
            let _ = writeln!(out, "{},{},{},{},{},{}", c.name, row, c.lhs, c.rhs, c.passed, c.required);
        }
        out
    }
}

/// `#{k : lambda_k > 1 - delta} / |Omega|` per row, for the delta at `index`.
pub fn plunge_ratios(rows: &[SweepRow], index: usize) -> Vec<f64> {
    rows.iter().map(|r| r.plunge_counts[index] as f64 / r.measure).collect()
}

/// Number of decreasing steps in a sequence.
pub fn descents(values: &[f64]) -> usize {
    values.windows(2).filter(|w| w[1] < w[0]).count()
}

/// Trend test for plunge ratios: at most one decreasing step, and the last
/// ratio no further from 1 than the first.
pub fn plunge_trend_ok(ratios: &[f64]) -> bool {
    match (ratios.first(), ratios.last()) {
        (Some(first), Some(last)) => descents(ratios) <= 1 && (last - 1.0).abs() <= (first - 1.0).abs(),
        _ => true,
    }
}

fn delta_index(deltas: &[f64]) -> usize {
    deltas.iter().position(|&d| d == 0.5).unwrap_or(0)
}

fn report(kind: SweepKind, cfg: &ExperimentConfig, s: &DensityOperator, rows: Vec<SweepRow>) -> SweepReport {
    SweepReport {
        kind,
        state: s.label().to_string(),
        deltas: cfg.deltas.clone(),
        rows,
        checks: Vec::new(),
        summary: BTreeMap::new(),
    }
}

/// Plunge profile: per row and delta,
/// `|#{lambda_k > 1 - delta} - |Omega|| <= max(1/delta, 1/(1-delta)) |tr T^2 - |Omega||`.
/// The ratio trend across rows is reported as an advisory check.
pub fn run_plunge_sweep(cfg: &ExperimentConfig, s: &DensityOperator) -> Result<SweepReport> {
    let rows = sweep_rows(cfg, s)?;
    let tol = cfg.tolerances;
    let mut rep = report(SweepKind::Plunge, cfg, s, rows);
    for (i, row) in rep.rows.iter().enumerate() {
        for (j, &d) in cfg.deltas.iter().enumerate() {
            let lhs = (row.plunge_counts[j] as f64 - row.measure).abs();
            let rhs = plunge_bound(row.measure, row.second_moment, d);
            rep.checks
                .push(Check::le(format!("plunge_count_bound_{d}"), Some(i), lhs, rhs, tol.bound_slack));
        }
    }
    if !cfg.deltas.is_empty() && rep.rows.len() > 1 {
        let k = delta_index(&cfg.deltas);
        let ratios = plunge_ratios(&rep.rows, k);
        let ok = plunge_trend_ok(&ratios);
        let first = ratios[0];
        let last = ratios[ratios.len() - 1];
        rep.checks.push(
            Check {
                name: format!("plunge_ratio_trend_{}", cfg.deltas[k]),
                row: None,
                lhs: descents(&ratios) as f64,
                rhs: 1.0,
                passed: ok,
                required: true,
            }
            .advisory(),
        );
        rep.summary.insert("ratio_first".into(), first);
        rep.summary.insert("ratio_last".into(), last);
    }
    Ok(rep)
}

/// Convergence sweep: pointwise and mass checks on `rho`, the three finite
/// L1 bounds, the level-set estimate, and a relative-error reduction of at
/// least `convergence_factor` from the first to the last scale.
pub fn run_convergence_sweep(cfg: &ExperimentConfig, s: &DensityOperator) -> Result<SweepReport> {
    let rows = sweep_rows(cfg, s)?;
    let tol = cfg.tolerances;
    let mut rep = report(SweepKind::Converge, cfg, s, rows);
    let eps = rep.rows.iter().map(|r| r.perimeter).fold(f64::INFINITY, f64::min);
    for (i, r) in rep.rows.iter().enumerate() {
        let row = Some(i);
        rep.checks.push(Check::le("rho_max", row, r.rho_max, 1.0, tol.rho_max_slack));
        rep.checks.push(Check::le(
            "rho_mass",
            row,
            (r.rho_mass - r.a_omega as f64).abs(),
            0.0,
            tol.mass,
        ));
        rep.checks.push(Check::le(
            "smoothed_l1_deficiency_bound",
            row,
            r.smoothed_l1,
            abreu_bound(r.deficiency, r.measure),
            tol.bound_slack,
        ));
        rep.checks.push(Check::le(
            "smoothed_l1_perimeter_bound",
            row,
            r.smoothed_l1 / r.measure,
            relative_l1_bound(r.mstar_sq, r.perimeter, r.measure),
            tol.bound_slack,
        ));
        if r.perimeter >= eps {
            rep.checks.push(Check::le(
                "l1_perimeter_bound",
                row,
                r.l1_error,
                perimeter_bound(eps, r.mstar_sq, r.perimeter),
                tol.bound_slack,
            ));
        }
        for (j, &d) in cfg.deltas.iter().enumerate() {
            rep.checks.push(Check::le(
                format!("levelset_bound_{d}"),
                row,
                r.levelsets[j],
                levelset_bound(r.mstar_sq, r.perimeter, d),
                tol.bound_slack,
            ));
        }
    }
    if rep.rows.len() > 1 {
        let first = rep.rows[0].rel_l1;
        let last = rep.rows[rep.rows.len() - 1].rel_l1;
        rep.checks.push(Check {
            name: "rel_l1_reduction".into(),
            row: None,
            lhs: first / last,
            rhs: tol.convergence_factor,
            passed: first >= tol.convergence_factor * last,
            required: true,
        });
        rep.summary.insert("rel_l1_first".into(), first);
        rep.summary.insert("rel_l1_last".into(), last);
        rep.summary.insert("rel_l1_reduction".into(), first / last);
    }
    rep.summary.insert("perimeter_floor".into(), eps);
    Ok(rep)
}

/// Sharpness sweep on a centered ball: `l1_error >= tr T - tr T^2` per row
/// and `max/min` of `l1_error / radius` within `sharpness_band`.
pub fn run_sharpness(cfg: &ExperimentConfig, s: &DensityOperator) -> Result<SweepReport> {
    let base_radius = match &cfg.shape {
        ShapeSpec::Ball { radius, .. } if cfg.shape.is_centered_ball() => *radius,
        _ => return Err(Error::NotABall),
    };
    let rows = sweep_rows(cfg, s)?;
    let tol = cfg.tolerances;
    let mut rep = report(SweepKind::Sharpness, cfg, s, rows);
    let mut band = Vec::with_capacity(rep.rows.len());
    for (i, r) in rep.rows.iter().enumerate() {
        // l1 >= pf  written as  pf <= l1
        rep.checks.push(Check::le(
            "l1_projection_lower_bound",
            Some(i),
            r.projection_functional,
            r.l1_error,
            tol.bound_slack,
        ));
        band.push(r.l1_error / (base_radius * r.r));
    }
    let lo = band.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = band.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    rep.checks.push(Check {
        name: "l1_over_radius_band".into(),
        row: None,
        lhs: hi / lo,
        rhs: tol.sharpness_band,
        passed: hi <= tol.sharpness_band * lo,
        required: true,
    });
    rep.summary.insert("band_min".into(), lo);
    rep.summary.insert("band_max".into(), hi);
    rep.summary.insert("band_ratio".into(), hi / lo);
    Ok(rep)
}

/// Maximum residual of one identity over all sampled pairs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityResidual {
    pub name: &'static str,
    pub max_residual: f64,
    pub tol: f64,
}

impl IdentityResidual {
    pub fn passed(&self) -> bool {
        self.max_residual <= self.tol
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub n: usize,
    pub seed: u64,
    pub pairs: usize,
    pub residuals: Vec<IdentityResidual>,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.residuals.iter().all(IdentityResidual::passed)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("identity,max_residual,tol,passed\n");
        for r in &self.residuals {
            let _ = writeln!(out, "{},{:e},{:e},{}", r.name, r.max_residual, r.tol, r.passed());
        }
        out
    }
}

impl std::fmt::Display for IdentityReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "identities N={} seed={} pairs={}", self.n, self.seed, self.pairs)?;
        for r in &self.residuals {
            let mark = if r.passed() { "ok  " } else { "FAIL" };
            writeln!(f, "  {mark} {:<28} {:.3e} (tol {:.0e})", r.name, r.max_residual, r.tol)?;
        }
        Ok(())
    }
}

pub const IDENTITY_NAMES: [&str; 9] = [
    "integral",
    "resolution_of_identity",
    "basis_summation",
    "trace",
    "second_moment",
    "projection_functional",
    "reconstruction",
    "assoc_fun_op_op",
    "assoc_fun_fun_op",
];

fn random_real_grid(lat: PhaseLattice, rng: &mut ChaCha8Rng) -> PhaseSpaceFunction {
    PhaseSpaceFunction::from_real_fn(lat, |_| rng.random_range(-1.0..1.0))
}

fn identity_residuals(lat: PhaseLattice, seed: u64, pair: usize, corrupt: bool) -> Result<[f64; 9]> {
    let n = lat.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(pair as u64);
    let max_rank = n.min(3);
    let s = random_state(lat, rng.random_range(1..=max_rank), &mut rng)?;
    let t = random_state(lat, rng.random_range(1..=max_rank), &mut rng)?;
    let density = rng.random_range(0.1..0.7);
    let mask: Vec<bool> = (0..lat.num_points()).map(|_| rng.random_bool(density)).collect();
    let dom = Domain::from_mask(lat, mask)?;
    let f = random_real_grid(lat, &mut rng);
    let g = random_real_grid(lat, &mut rng);
    let (sm, tm) = (s.matrix(), t.matrix());
    let tr_s = sm.trace();

    let integral = (op_op_conv(sm, tm)?.integral() - tr_s * tm.trace()).norm();

    let probe = if corrupt {
        let mut bumped = sm.clone().into_matrix();
        bumped[(0, 0)] += Complex64::new(1e-3, 0.0);
        OperatorMatrix::from_matrix(bumped)
    } else {
        sm.clone()
    };
    let ones = PhaseSpaceFunction::constant(lat, 1.0);
    let resolution = fun_op_conv(&ones, &probe)?.max_abs_diff(&OperatorMatrix::identity(lat).scale(tr_s));

    let mut basis = PhaseSpaceFunction::zeros(lat);
    for k in 0..n {
        let e = SignalVector::delta(lat, k);
        basis.add_assign(&op_op_conv(sm, &OperatorMatrix::rank_one(&e, &e))?);
    }
    let basis_sum = basis.max_abs_diff(&PhaseSpaceFunction::from_fn(lat, |_| tr_s));

    let loc = fun_op_conv(&dom.indicator(), sm)?;
    let trace = (loc.trace().re - dom.measure()).abs();
    let st = s_tilde(sm);
    let second = (loc.matmul(&loc)?.trace().re - second_moment_with(&dom, &st)).abs();

    let res = analyze(&dom, &s)?;
    let pf = projection_functional_routes(&res, &st).deviation();
    let recon = smoothed_indicator(&dom, &st)?.max_abs_diff(&weighted_cohen_expansion(&res, &s)?);

    let assoc1 = op_op_conv(&fun_op_conv(&f, sm)?, tm)?.max_abs_diff(&fun_fun_conv(&f, &op_op_conv(sm, tm)?)?);
    let assoc2 = fun_op_conv(&f, &fun_op_conv(&g, sm)?)?.max_abs_diff(&fun_op_conv(&fun_fun_conv(&f, &g)?, sm)?);

    Ok([integral, resolution, basis_sum, trace, second, pf, recon, assoc1, assoc2])
}

/// Runs every exact identity on `pairs` seeded random (state, domain) pairs
/// and reports the largest residual of each. With `corrupt` a perturbed
/// state is fed into the resolution-of-identity check, which must then fail.
pub fn run_identities(n: usize, seed: u64, pairs: usize, corrupt: bool) -> Result<IdentityReport> {
    if n == 0 {
        return Err(Error::Config("n must be positive".into()));
    }
    let lat = PhaseLattice::new(n);
    let per_pair: Vec<[f64; 9]> = (0..pairs)
        .into_par_iter()
        .map(|k| identity_residuals(lat, seed, k, corrupt))
        .collect::<Result<_>>()?;
    let residuals = IDENTITY_NAMES
        .iter()
        .enumerate()
        .map(|(i, &name)| IdentityResidual {
            name,
            max_residual: per_pair.iter().map(|r| r[i]).fold(0.0, f64::max),
            tol: IDENTITY_TOL,
        })
        .collect();
    Ok(IdentityReport {
        n,
        seed,
        pairs,
        residuals,
    })
}

/// A written file and its SHA-256.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Artifact {
    pub file: String,
    pub sha256: String,
    pub bytes: usize,
}

/// Run record written next to the outputs of every command.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub csv_schema: &'static str,
    pub command: String,
    pub config: serde_json::Value,
    pub threads: usize,
    pub passed: bool,
    pub artifacts: Vec<Artifact>,
}

/// Collects output files in a directory and hashes them as they are written.
#[derive(Debug)]
pub struct OutputDir {
    dir: PathBuf,
    artifacts: Vec<Artifact>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            artifacts: Vec::new(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, contents)?;
        self.artifacts.push(Artifact {
            file: name.to_string(),
            sha256: hex::encode(Sha256::digest(contents.as_bytes())),
            bytes: contents.len(),
        });
        Ok(path)
    }

    /// Writes `manifest.json` listing everything written so far.
    pub fn finish(self, command: &str, config: serde_json::Value, passed: bool) -> Result<PathBuf> {
        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            csv_schema: CSV_SCHEMA_VERSION,
            command: command.to_string(),
            config,
            threads: rayon::current_num_threads(),
            passed,
            artifacts: self.artifacts,
        };
        let path = self.dir.join("manifest.json");
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Config(e.to_string()))?;
        fs::write(&path, text + "\n")?;
        Ok(path)
    }
}

/// Writes `<kind>.csv`, `<kind>_checks.csv` and the manifest.
pub fn write_sweep(rep: &SweepReport, cfg: &ExperimentConfig, dir: &Path) -> Result<PathBuf> {
    let mut out = OutputDir::create(dir)?;
    let kind = rep.kind.name();
    out.write(&format!("{kind}.csv"), &rep.rows_csv())?;
    out.write(&format!("{kind}_checks.csv"), &rep.checks_csv())?;
    let summary = serde_json::to_string_pretty(&rep.summary).map_err(|e| Error::Config(e.to_string()))?;
    out.write(&format!("{kind}_summary.json"), &(summary + "\n"))?;
    let config = serde_json::to_value(cfg).map_err(|e| Error::Config(e.to_string()))?;
    out.finish(kind, config, rep.passed())
}
