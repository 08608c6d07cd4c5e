//! Factorization-method imaging.
//!
//! From the discrete far-field operator `F` the positive operator
//! `F_# = |Re F| + |Im F|` is formed, with `Re F = (F + F*)/2` and
//! `Im F = (F − F*)/(2i)`. For a sampling point `y` and polarization `a` the
//! Picard indicator is
//!
//! ```text
//! W(y) = [ Σ_n |(g_n, φ_y)|² / ζ_n ]⁻¹
//! ```
//!
//! where `(ζ_n, g_n)` is the eigensystem of `F_#` and `φ_y` the far-field
//! pattern of a point source at `y` restricted to the data channel. `W` is
//! large on the scatterers and small elsewhere.

use nalgebra::linalg::SymmetricEigen;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::farfield::{Channel, DirectionGrid, FarFieldMatrix};
use crate::greens::{perp, ElasticMedium, Point};
use crate::linalg::{CMatrix, CVec};
use crate::{Error, Result};

/// `F_#` with its eigensystem, eigenvalues sorted in descending order.
#[derive(Debug, Clone)]
pub struct SelfadjointOperator {
    pub matrix: CMatrix,
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `eigenvalues`.
    pub eigenvectors: CMatrix,
    pub channel: Channel,
    pub grid: DirectionGrid,
    pub medium: ElasticMedium,
    pub delta: f64,
}

fn hermitian_eigen(h: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let n = h.nrows();
    let eig = SymmetricEigen::try_new(h.clone(), 1e-15, 10_000)
        .ok_or_else(|| Error::Numerical(format!("Hermitian eigensolver did not converge for a {n}x{n} matrix")))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("eigenvalues are not finite".into()));
    }
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

/// `|H| = V |Λ| V*` for Hermitian `H`.
pub fn hermitian_abs(h: &CMatrix) -> Result<CMatrix> {
    let (values, v) = hermitian_eigen(h)?;
    let scaled = CMatrix::from_fn(v.nrows(), v.ncols(), |r, c| v[(r, c)] * values[c].abs());
    Ok(scaled * v.adjoint())
}

/// Forms `F_#` from raw far-field data and diagonalizes it.
pub fn build_fsharp(data: &FarFieldMatrix) -> Result<SelfadjointOperator> {
    data.validate()?;
    let f = data.operator();
    let fh = f.adjoint();
    let re = (&f + &fh) * Complex64::new(0.5, 0.0);
    let im = (&f - &fh) * Complex64::new(0.0, -0.5);
    let mut matrix = hermitian_abs(&re)? + hermitian_abs(&im)?;
    // symmetrize round-off
    matrix = (&matrix + matrix.adjoint()) * Complex64::new(0.5, 0.0);
    let (eigenvalues, eigenvectors) = hermitian_eigen(&matrix)?;
    let top = eigenvalues.first().copied().unwrap_or(0.0);
    if let Some(low) = eigenvalues.last() {
        if *low < -1e-10 * top.abs() {
            return Err(Error::Numerical(format!(
                "F_# is not positive semidefinite: smallest eigenvalue {low:e}, largest {top:e}"
            )));
        }
    }
    Ok(SelfadjointOperator {
        matrix,
        eigenvalues,
        eigenvectors,
        channel: data.channel,
        grid: data.grid,
        medium: data.medium,
        delta: data.delta,
    })
}

impl SelfadjointOperator {
    /// Relative cutoff `max(1e-12, δ²)` used when none is given.
    pub fn default_cutoff(&self) -> f64 {
        (self.delta * self.delta).max(1e-12)
    }

    /// Number of eigenvalues `ζ_n ≥ cutoff·ζ₁` (the ones not raised to the floor).
    pub fn kept(&self, relative_cutoff: f64) -> usize {
        let top = self.eigenvalues.first().copied().unwrap_or(0.0);
        self.eigenvalues
            .iter()
            .take_while(|&&z| z > 0.0 && z >= relative_cutoff * top)
            .count()
    }
}

/// Rectangular sampling grid `[x_min, x_max] × [y_min, y_max]` with spacing `h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub h: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            x_min: -4.0,
            x_max: 4.0,
            y_min: -4.0,
            y_max: 4.0,
            h: 0.05,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.x_min, self.x_max, self.y_min, self.y_max, self.h]
            .iter()
            .all(|v| v.is_finite());
        if !finite || !(self.h > 0.0) || !(self.x_max >= self.x_min) || !(self.y_max >= self.y_min) {
            return Err(Error::Config(format!("invalid sampling grid {self:?}")));
        }
        Ok(())
    }

    pub fn nx(&self) -> usize {
        ((self.x_max - self.x_min) / self.h + 1e-9).floor() as usize + 1
    }

    pub fn ny(&self) -> usize {
        ((self.y_max - self.y_min) / self.h + 1e-9).floor() as usize + 1
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.h
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y_min + j as f64 * self.h
    }

    pub fn point(&self, i: usize, j: usize) -> Point<2> {
        Point::<2>::new(self.x(i), self.y(j))
    }
}

/// Indicator values, row `j` (increasing `y`) holding `nx` values of increasing `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorGrid {
    pub spec: GridSpec,
    pub values: Vec<f64>,
    pub polarization: Point<2>,
    pub channel: Channel,
    pub relative_cutoff: f64,
    pub kept: usize,
}

impl IndicatorGrid {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.spec.nx() + i]
    }

    /// Value at the grid node nearest to `p`.
    pub fn nearest(&self, p: &Point<2>) -> f64 {
        let s = &self.spec;
        let i = (((p[0] - s.x_min) / s.h).round().max(0.0) as usize).min(s.nx() - 1);
        let j = (((p[1] - s.y_min) / s.h).round().max(0.0) as usize).min(s.ny() - 1);
        self.get(i, j)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Samples of the point-source far field at `y` in the channel's coefficient layout:
/// `e^{−ik_p d·y}(a·d)` for `p` rows, `e^{−ik_s d·y}(a·d⊥)` for `s` rows.
pub fn test_function(
    medium: &ElasticMedium,
    grid: &DirectionGrid,
    channel: Channel,
    y: &Point<2>,
    a: &Point<2>,
) -> CVec {
    let n = grid.len();
    let (kp, ks) = (medium.k_p(), medium.k_s());
    let p_part = |d: &Point<2>| Complex64::from_polar(a.dot(d), -kp * d.dot(y));
    let s_part = |d: &Point<2>| Complex64::from_polar(a.dot(&perp(d)), -ks * d.dot(y));
    match channel {
        Channel::Pp => CVec::from_fn(n, |k, _| p_part(&grid.direction(k))),
        Channel::Ss => CVec::from_fn(n, |k, _| s_part(&grid.direction(k))),
        Channel::Ff => CVec::from_fn(2 * n, |k, _| {
            if k < n {
                p_part(&grid.direction(k))
            } else {
                s_part(&grid.direction(k - n))
            }
        }),
    }
}

/// Picard indicator `W(y)` over `spec` for polarization `a`. `relative_cutoff`
/// overrides the default spectral floor: eigenvalues below `cutoff·ζ₁` enter the
/// series as `cutoff·ζ₁`. Dropping them instead would discard the null-space
/// component of the test function, which is what makes `W` small away from the
/// scatterers when the data are exact and of finite rank.
pub fn indicator(
    op: &SelfadjointOperator,
    spec: &GridSpec,
    a: &Point<2>,
    relative_cutoff: Option<f64>,
) -> Result<IndicatorGrid> {
    spec.validate()?;
    let cutoff = relative_cutoff.unwrap_or_else(|| op.default_cutoff());
    if !(cutoff > 0.0) || !cutoff.is_finite() {
        return Err(Error::Config(format!("spectral cutoff must be positive, got {cutoff}")));
    }
    let kept = op.kept(cutoff);
    if kept == 0 {
        return Err(Error::Numerical("no eigenvalue of F_# is above the cutoff".into()));
    }
    let w = op.grid.weight();
    let floor = cutoff * op.eigenvalues[0];
    let vh = op.eigenvectors.adjoint();
    let inv_zeta: Vec<f64> = op.eigenvalues.iter().map(|z| w / z.max(floor)).collect();
    let (nx, ny) = (spec.nx(), spec.ny());
    let rows: Vec<Vec<f64>> = (0..ny)
        .into_par_iter()
        .map(|j| {
            let mut phi = CMatrix::zeros(vh.ncols(), nx);
            for i in 0..nx {
                phi.set_column(
                    i,
                    &test_function(&op.medium, &op.grid, op.channel, &spec.point(i, j), a),
                );
            }
            let coef = &vh * phi;
            (0..nx)
                .map(|i| {
                    let s: f64 = coef
                        .column(i)
                        .iter()
                        .zip(&inv_zeta)
                        .map(|(c, z)| c.norm_sqr() * z)
                        .sum();
                    1.0 / s
                })
                .collect()
        })
        .collect();
    Ok(IndicatorGrid {
        spec: *spec,
        values: rows.into_iter().flatten().collect(),
        polarization: *a,
        channel: op.channel,
        relative_cutoff: cutoff,
        kept,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub x: f64,
    pub y: f64,
    pub value: f64,
}

/// Result of peak search; `warning` is set when fewer maxima than requested exist.
#[derive(Debug, Clone, PartialEq)]
pub struct Located {
    pub peaks: Vec<Peak>,
    pub warning: Option<String>,
}

/// All strict local maxima over the 8-neighbourhood, sorted by decreasing value,
/// each refined by a separable parabolic fit.
pub fn local_maxima(grid: &IndicatorGrid) -> Vec<Peak> {
    let (nx, ny) = (grid.spec.nx(), grid.spec.ny());
    let h = grid.spec.h;
    let mut peaks = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let v = grid.get(i, j);
            let mut is_max = true;
            'nb: for dj in -1i64..=1 {
                for di in -1i64..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let (ii, jj) = (i as i64 + di, j as i64 + dj);
                    if ii < 0 || jj < 0 || ii >= nx as i64 || jj >= ny as i64 {
                        continue;
                    }
                    let u = grid.get(ii as usize, jj as usize);
                    // ties broken by scan order so plateaus yield one peak
                    if u > v || (u == v && (dj, di) < (0, 0)) {
                        is_max = false;
                        break 'nb;
                    }
                }
            }
            if !is_max {
                continue;
            }
            let refine = |lo: Option<f64>, hi: Option<f64>| match (lo, hi) {
                (Some(a), Some(b)) => {
                    let den = a - 2.0 * v + b;
                    if den < 0.0 {
                        (0.5 * (a - b) / den).clamp(-0.5, 0.5)
                    } else {
                        0.0
                    }
                }
                _ => 0.0,
            };
            let left = (i > 0).then(|| grid.get(i - 1, j));
            let right = (i + 1 < nx).then(|| grid.get(i + 1, j));
            let down = (j > 0).then(|| grid.get(i, j - 1));
            let up = (j + 1 < ny).then(|| grid.get(i, j + 1));
            peaks.push(Peak {
                x: grid.spec.x(i) + h * refine(left, right),
                y: grid.spec.y(j) + h * refine(down, up),
                value: v,
            });
        }
    }
    peaks.sort_by(|a, b| b.value.total_cmp(&a.value));
    peaks
}

/// The `count` strongest local maxima.
pub fn locate_points(grid: &IndicatorGrid, count: usize) -> Located {
    let mut peaks = local_maxima(grid);
    let warning = (peaks.len() < count).then(|| {
        let msg = format!("only {} local maxima found, {count} requested", peaks.len());
        log::warn!("{msg}");
        msg
    });
    peaks.truncate(count);
    Located { peaks, warning }
}
