//! The discrete phase-space torus and domains on it.
//!
//! A point `(m, n)` has time index `m` and frequency index `n`, and sits at
//! the continuous coordinate `(l*m, l*n)` with `l = 1/sqrt(N)`. Each point
//! carries measure `w = 1/N = l^2`, so the whole torus has measure `N`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::PhaseSpaceFunction;

/// The lattice `Z_N x Z_N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PhaseLattice {
    n: usize,
}

/// A point of the lattice, both coordinates reduced mod `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticePoint {
    pub m: usize,
    pub n: usize,
}

impl LatticePoint {
    pub const ORIGIN: LatticePoint = LatticePoint { m: 0, n: 0 };

    pub fn new(m: usize, n: usize) -> Self {
        Self { m, n }
    }
}

impl PhaseLattice {
    /// Panics if `n == 0`.
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "lattice dimension must be positive");
        Self { n }
    }

    /// Signal dimension `N`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Measure of one lattice point, `1/N`.
    pub fn weight(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Length of one lattice step, `1/sqrt(N)`.
    pub fn unit(&self) -> f64 {
        (self.n as f64).sqrt().recip()
    }

    /// Side length of the torus in length units, `N * l = sqrt(N)`.
    pub fn side(&self) -> f64 {
        (self.n as f64).sqrt()
    }

    pub fn num_points(&self) -> usize {
        self.n * self.n
    }

    /// Total measure, `N^2 * w = N`.
    pub fn total_measure(&self) -> f64 {
        self.n as f64
    }

    /// Row-major index of a point.
    #[inline]
    pub fn index(&self, p: LatticePoint) -> usize {
        p.m * self.n + p.n
    }

    #[inline]
    pub fn point(&self, index: usize) -> LatticePoint {
        LatticePoint {
            m: index / self.n,
            n: index % self.n,
        }
    }

    /// Reduce an integer mod `N`.
    #[inline]
    pub fn wrap(&self, k: i64) -> usize {
        k.rem_euclid(self.n as i64) as usize
    }

    /// Minimal-image representative of `k mod N`, with magnitude at most `N/2`.
    #[inline]
    pub fn minimal_image(&self, k: i64) -> i64 {
        let n = self.n as i64;
        let r = k.rem_euclid(n);
        if 2 * r > n {
            r - n
        } else {
            r
        }
    }

    pub fn points(&self) -> impl Iterator<Item = LatticePoint> + '_ {
        (0..self.num_points()).map(move |i| self.point(i))
    }

    pub fn add(&self, a: LatticePoint, b: LatticePoint) -> LatticePoint {
        LatticePoint {
            m: (a.m + b.m) % self.n,
            n: (a.n + b.n) % self.n,
        }
    }

    pub fn sub(&self, a: LatticePoint, b: LatticePoint) -> LatticePoint {
        LatticePoint {
            m: (a.m + self.n - b.m % self.n) % self.n,
            n: (a.n + self.n - b.n % self.n) % self.n,
        }
    }

    pub fn neg(&self, a: LatticePoint) -> LatticePoint {
        self.sub(LatticePoint::ORIGIN, a)
    }

    /// Length-unit Euclidean distance between the minimal images of `a - b`.
    pub fn torus_distance(&self, a: LatticePoint, b: LatticePoint) -> f64 {
        let dm = self.minimal_image(a.m as i64 - b.m as i64) as f64;
        let dn = self.minimal_image(a.n as i64 - b.n as i64) as f64;
        self.unit() * dm.hypot(dn)
    }

    /// Distance of every point to the origin, row-major.
    pub fn distance_to_origin_grid(&self) -> Vec<f64> {
        self.points()
            .map(|p| self.torus_distance(p, LatticePoint::ORIGIN))
            .collect()
    }
}

/// Free-function form of [`PhaseLattice::torus_distance`].
pub fn torus_distance(a: LatticePoint, b: LatticePoint, lattice: &PhaseLattice) -> f64 {
    lattice.torus_distance(a, b)
}

/// A subset of the lattice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Domain {
    lattice: PhaseLattice,
    mask: Vec<bool>,
}

#[derive(Serialize, Deserialize)]
struct DomainJson {
    #[serde(rename = "N")]
    n: usize,
    points: Vec<[usize; 2]>,
}

impl Domain {
    pub fn empty(lattice: PhaseLattice) -> Self {
        Self {
            lattice,
            mask: vec![false; lattice.num_points()],
        }
    }

    pub fn full(lattice: PhaseLattice) -> Self {
        Self {
            lattice,
            mask: vec![true; lattice.num_points()],
        }
    }

    pub fn from_mask(lattice: PhaseLattice, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != lattice.num_points() {
            return Err(Error::DimensionMismatch {
                expected: lattice.num_points(),
                got: mask.len(),
            });
        }
        Ok(Self { lattice, mask })
    }

    pub fn from_points<I>(lattice: PhaseLattice, points: I) -> Result<Self>
    where
        I: IntoIterator<Item = LatticePoint>,
    {
        let mut dom = Self::empty(lattice);
        for p in points {
            if p.m >= lattice.n() || p.n >= lattice.n() {
                return Err(Error::InvalidShape(format!(
                    "point ({}, {}) outside Z_{}",
                    p.m,
                    p.n,
                    lattice.n()
                )));
            }
            dom.mask[lattice.index(p)] = true;
        }
        Ok(dom)
    }

    pub fn lattice(&self) -> &PhaseLattice {
        &self.lattice
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    #[inline]
    pub fn contains(&self, p: LatticePoint) -> bool {
        self.mask[self.lattice.index(p)]
    }

    #[inline]
    pub fn contains_index(&self, i: usize) -> bool {
        self.mask[i]
    }

    /// Number of lattice points in the domain.
    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&b| b)
    }

    /// Points in lexicographic order.
    pub fn points(&self) -> impl Iterator<Item = LatticePoint> + '_ {
        self.mask
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| self.lattice.point(i))
    }

    pub fn indices(&self) -> Vec<usize> {
        self.mask
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect()
    }

    pub fn complement(&self) -> Self {
        Self {
            lattice: self.lattice,
            mask: self.mask.iter().map(|b| !b).collect(),
        }
    }

    pub fn is_subset_of(&self, other: &Domain) -> bool {
        self.lattice == other.lattice && self.mask.iter().zip(&other.mask).all(|(&a, &b)| !a || b)
    }

    /// `w * #mask`.
    pub fn measure(&self) -> f64 {
        self.lattice.weight() * self.count() as f64
    }

    /// Discrete total variation of the indicator: `l` times the number of
    /// 4-neighbour periodic lattice edges joining a point inside to a point
    /// outside.
    pub fn perimeter(&self) -> f64 {
        let lat = self.lattice;
        let n = lat.n();
        let mut edges = 0usize;
        for i in 0..lat.num_points() {
            let p = lat.point(i);
            let right = LatticePoint::new(p.m, (p.n + 1) % n);
            let down = LatticePoint::new((p.m + 1) % n, p.n);
            let inside = self.mask[i];
            if inside != self.contains(right) {
                edges += 1;
            }
            if inside != self.contains(down) {
                edges += 1;
            }
        }
        lat.unit() * edges as f64
    }

    /// Indicator function `chi_Omega` as a real grid.
    pub fn indicator(&self) -> PhaseSpaceFunction {
        PhaseSpaceFunction::from_real(
            self.lattice,
            self.mask.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
        )
    }

    pub fn to_json(&self) -> String {
        let doc = DomainJson {
            n: self.lattice.n(),
            points: self.points().map(|p| [p.m, p.n]).collect(),
        };
        serde_json::to_string(&doc).expect("domain serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: DomainJson = serde_json::from_str(s)?;
        if doc.n == 0 {
            return Err(Error::Parse("N must be positive".into()));
        }
        let lattice = PhaseLattice::new(doc.n);
        Self::from_points(
            lattice,
            doc.points.into_iter().map(|[m, n]| LatticePoint::new(m, n)),
        )
    }
}

/// Continuous shape to be rasterized; coordinates in length units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ShapeSpec {
    Ball {
        center: [f64; 2],
        radius: f64,
    },
    Rectangle {
        corner: [f64; 2],
        widths: [f64; 2],
    },
    Explicit {
        points: Vec<[usize; 2]>,
    },
}

impl ShapeSpec {
    pub fn ball(center: [f64; 2], radius: f64) -> Self {
        ShapeSpec::Ball { center, radius }
    }

    pub fn rectangle(corner: [f64; 2], widths: [f64; 2]) -> Self {
        ShapeSpec::Rectangle { corner, widths }
    }

    /// Ball centered at the origin.
    pub fn is_centered_ball(&self) -> bool {
        matches!(self, ShapeSpec::Ball { center, .. } if center[0] == 0.0 && center[1] == 0.0)
    }
}

#[inline]
fn centered(d: f64, side: f64) -> f64 {
    (d + 0.5 * side).rem_euclid(side) - 0.5 * side
}

/// Rasterize `scale * shape` (dilated about the shape's center) onto the
/// lattice.
///
/// A point belongs to the domain when its minimal-image coordinate around the
/// center lies strictly inside the dilated shape. Zero radius therefore gives
/// the empty domain. The dilated shape's extent along each axis must be
/// strictly less than the torus side, otherwise it would overlap itself.
pub fn rasterize(shape: &ShapeSpec, scale: f64, lattice: PhaseLattice) -> Result<Domain> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::InvalidShape(format!("scale must be positive, got {scale}")));
    }
    let side = lattice.side();
    let unit = lattice.unit();
    let coords = |i: usize| {
        let p = lattice.point(i);
        (unit * p.m as f64, unit * p.n as f64)
    };
    match shape {
        ShapeSpec::Ball { center, radius } => {
            if !(radius.is_finite() && *radius >= 0.0) {
                return Err(Error::InvalidShape(format!("radius must be >= 0, got {radius}")));
            }
            let r = radius * scale;
            if 2.0 * r >= side {
                return Err(Error::ShapeTooLarge { extent: 2.0 * r, side });
            }
            let mask = (0..lattice.num_points())
                .map(|i| {
                    let (x, y) = coords(i);
                    let dx = centered(x - center[0], side);
                    let dy = centered(y - center[1], side);
                    dx * dx + dy * dy < r * r
                })
                .collect();
            Domain::from_mask(lattice, mask)
        }
        ShapeSpec::Rectangle { corner, widths } => {
            if !(widths[0] > 0.0 && widths[1] > 0.0) {
                return Err(Error::InvalidShape(format!("widths must be > 0, got {widths:?}")));
            }
            let cx = corner[0] + 0.5 * widths[0];
            let cy = corner[1] + 0.5 * widths[1];
            let hx = 0.5 * scale * widths[0];
            let hy = 0.5 * scale * widths[1];
            let extent = 2.0 * hx.max(hy);
            if extent >= side {
                return Err(Error::ShapeTooLarge { extent, side });
            }
            let mask = (0..lattice.num_points())
                .map(|i| {
                    let (x, y) = coords(i);
                    centered(x - cx, side).abs() < hx && centered(y - cy, side).abs() < hy
                })
                .collect();
            Domain::from_mask(lattice, mask)
        }
        ShapeSpec::Explicit { points } => {
            if (scale - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidShape(
                    "explicit masks can only be used at scale 1".into(),
                ));
            }
            Domain::from_points(lattice, points.iter().map(|&[m, n]| LatticePoint::new(m, n)))
        }
    }
}
