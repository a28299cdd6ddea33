//! Functions on the phase-space lattice.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{LatticePoint, PhaseLattice};

/// A complex-valued function on `Z_N x Z_N`, stored row-major with the time
/// index `m` selecting the row. Most grids in this crate are real; the
/// imaginary part is kept so that complex smoothers and cross terms fit the
/// same type.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceFunction {
    lattice: PhaseLattice,
    data: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct GridJson {
    #[serde(rename = "N")]
    n: usize,
    re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    im: Option<Vec<Vec<f64>>>,
}

impl PhaseSpaceFunction {
    pub fn zeros(lattice: PhaseLattice) -> Self {
        Self {
            lattice,
            data: vec![Complex64::new(0.0, 0.0); lattice.num_points()],
        }
    }

    pub fn constant(lattice: PhaseLattice, value: f64) -> Self {
        Self {
            lattice,
            data: vec![Complex64::new(value, 0.0); lattice.num_points()],
        }
    }

    /// Panics if `data.len() != N^2`.
    pub fn from_complex(lattice: PhaseLattice, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), lattice.num_points(), "grid size mismatch");
        Self { lattice, data }
    }

    /// Panics if `data.len() != N^2`.
    pub fn from_real(lattice: PhaseLattice, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), lattice.num_points(), "grid size mismatch");
        Self {
            lattice,
            data: data.into_iter().map(|x| Complex64::new(x, 0.0)).collect(),
        }
    }

    pub fn from_fn<F>(lattice: PhaseLattice, f: F) -> Self
    where
        F: FnMut(LatticePoint) -> Complex64,
    {
        Self {
            lattice,
            data: lattice.points().map(f).collect(),
        }
    }

    pub fn from_real_fn<F>(lattice: PhaseLattice, mut f: F) -> Self
    where
        F: FnMut(LatticePoint) -> f64,
    {
        Self::from_fn(lattice, |p| Complex64::new(f(p), 0.0))
    }

    /// Unit-mass impulse at `p`: value `1/w = N` there, zero elsewhere.
    pub fn impulse(lattice: PhaseLattice, p: LatticePoint) -> Self {
        let mut g = Self::zeros(lattice);
        g.data[lattice.index(p)] = Complex64::new(lattice.n() as f64, 0.0);
        g
    }

    pub fn lattice(&self) -> &PhaseLattice {
        &self.lattice
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, p: LatticePoint) -> Complex64 {
        self.data[self.lattice.index(p)]
    }

    #[inline]
    pub fn re(&self, p: LatticePoint) -> f64 {
        self.get(p).re
    }

    pub fn real_values(&self) -> Vec<f64> {
        self.data.iter().map(|c| c.re).collect()
    }

    /// Drop the imaginary part.
    pub fn into_real(mut self) -> Self {
        for c in &mut self.data {
            c.im = 0.0;
        }
        self
    }

    /// `w * sum_z f(z)`.
    pub fn integral(&self) -> Complex64 {
        self.data.iter().sum::<Complex64>() * self.lattice.weight()
    }

    pub fn min_re(&self) -> f64 {
        self.data.iter().map(|c| c.re).fold(f64::INFINITY, f64::min)
    }

    pub fn max_re(&self) -> f64 {
        self.data.iter().map(|c| c.re).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs_imag(&self) -> f64 {
        self.data.iter().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.lattice, other.lattice);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `w * sum_z |f(z) - g(z)|`.
    pub fn l1_distance(&self, other: &Self) -> f64 {
        assert_eq!(self.lattice, other.lattice);
        let s: f64 = self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).sum();
        s * self.lattice.weight()
    }

    /// The reflected function `z -> f(-z)`.
    pub fn reflect(&self) -> Self {
        let lat = self.lattice;
        Self::from_fn(lat, |p| self.get(lat.neg(p)))
    }

    pub fn scale(mut self, s: f64) -> Self {
        for c in &mut self.data {
            *c *= s;
        }
        self
    }

    pub fn add_assign(&mut self, other: &Self) {
        assert_eq!(self.lattice, other.lattice);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    fn to_rows(&self, part: impl Fn(&Complex64) -> f64) -> Vec<Vec<f64>> {
        self.data
            .chunks(self.lattice.n())
            .map(|row| row.iter().map(&part).collect())
            .collect()
    }

    /// Real part as CSV: `N` rows (time index) by `N` columns.
    pub fn to_csv_real(&self) -> String {
        rows_to_csv(&self.to_rows(|c| c.re))
    }

    /// Imaginary part as CSV, or `None` when it vanishes identically.
    pub fn to_csv_imag(&self) -> Option<String> {
        (self.max_abs_imag() > 0.0).then(|| rows_to_csv(&self.to_rows(|c| c.im)))
    }

    pub fn from_csv(re: &str, im: Option<&str>) -> Result<Self> {
        let re_rows = parse_csv_rows(re)?;
        let n = re_rows.len();
        if n == 0 || re_rows.iter().any(|r| r.len() != n) {
            return Err(Error::Parse("grid CSV must be N rows of N values".into()));
        }
        let im_rows = match im {
            Some(s) => {
                let rows = parse_csv_rows(s)?;
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(Error::Parse("imaginary grid shape mismatch".into()));
                }
                Some(rows)
            }
            None => None,
        };
        Ok(Self::from_rows(n, re_rows, im_rows))
    }

    fn from_rows(n: usize, re: Vec<Vec<f64>>, im: Option<Vec<Vec<f64>>>) -> Self {
        let lattice = PhaseLattice::new(n);
        let mut data: Vec<Complex64> = re.into_iter().flatten().map(|x| Complex64::new(x, 0.0)).collect();
        if let Some(im) = im {
            for (c, y) in data.iter_mut().zip(im.into_iter().flatten()) {
                c.im = y;
            }
        }
        Self { lattice, data }
    }

    pub fn to_json(&self) -> String {
        let doc = GridJson {
            n: self.lattice.n(),
            re: self.to_rows(|c| c.re),
            im: (self.max_abs_imag() > 0.0).then(|| self.to_rows(|c| c.im)),
        };
        serde_json::to_string(&doc).expect("grid serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: GridJson = serde_json::from_str(s)?;
        let n = doc.n;
        let shape_ok = |rows: &Vec<Vec<f64>>| rows.len() == n && rows.iter().all(|r| r.len() == n);
        if n == 0 || !shape_ok(&doc.re) || doc.im.as_ref().is_some_and(|im| !shape_ok(im)) {
            return Err(Error::Parse("grid JSON must hold N x N arrays".into()));
        }
        Ok(Self::from_rows(n, doc.re, doc.im))
    }
}

pub(crate) fn rows_to_csv(rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    for row in rows {
        let line: Vec<String> = row.iter().map(|x| format!("{x:e}")).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub(crate) fn parse_csv_rows(s: &str) -> Result<Vec<Vec<f64>>> {
    s.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Parse(format!("bad number `{t}`: {e}")))
                })
                .collect()
        })
        .collect()
}
