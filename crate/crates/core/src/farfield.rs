//! Discrete far-field operators on equispaced direction grids.
//!
//! Directions are `d_j = (cos θ_j, sin θ_j)`, `θ_j = 2πj/N`, and every far
//! field is stored by its coefficients in the local frame `(d, d⊥)`. For
//! incidence `b ∈ {p, s}` from `d_j` and observation component `a ∈ {p, s}` at
//! `d_k` the raw data entry is
//!
//! ```text
//! F[(a, k), (b, j)] = u^∞(d_k; b, d_j) · e_a(d_k),   e_p(d) = d,  e_s(d) = d⊥.
//! ```
//!
//! The `PP` channel keeps the `(p, p)` block, `SS` the `(s, s)` block and `FF`
//! the whole `2N × 2N` matrix `[[pp, ps], [sp, ss]]`. The operator acting on
//! `L²(S¹)` samples is `(2π/N)·data`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::foldy::{farfield_points, InteractionMatrix};
use crate::greens::{perp, CVector, ElasticMedium, PlaneWave, Point, WaveKind};
use crate::linalg::{frobenius, CMatrix};
use crate::multiscale::MultiscaleSolver;
use crate::{Error, Result};

pub const DEFAULT_DIRECTIONS: usize = 64;

/// `N` equispaced unit directions on the circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DirectionGrid {
    n: usize,
}

impl DirectionGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 || !n.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "direction count must be even and positive, got {n}"
            )));
        }
        Ok(Self { n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn direction(&self, j: usize) -> Point<2> {
        let t = 2.0 * PI * j as f64 / self.n as f64;
        Point::<2>::new(t.cos(), t.sin())
    }

    pub fn directions(&self) -> Vec<Point<2>> {
        (0..self.n).map(|j| self.direction(j)).collect()
    }

    /// Trapezoid weight `2π/N`.
    pub fn weight(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    /// Index of `−d_j`.
    pub fn opposite(&self, j: usize) -> usize {
        (j + self.n / 2) % self.n
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Pp,
    Ss,
    Ff,
}

impl Channel {
    /// Incident wave kinds that make up the columns.
    pub fn incident_kinds(self) -> &'static [WaveKind] {
        match self {
            Channel::Pp => &[WaveKind::P],
            Channel::Ss => &[WaveKind::S],
            Channel::Ff => &[WaveKind::P, WaveKind::S],
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Channel::Pp => "pp",
            Channel::Ss => "ss",
            Channel::Ff => "ff",
        })
    }
}

impl FromStr for Channel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pp" => Ok(Channel::Pp),
            "ss" => Ok(Channel::Ss),
            "ff" => Ok(Channel::Ff),
            other => Err(Error::Config(format!(
                "unknown channel {other:?} (expected pp, ss or ff)"
            ))),
        }
    }
}

/// Raw far-field data for one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldMatrix {
    pub channel: Channel,
    pub medium: ElasticMedium,
    pub grid: DirectionGrid,
    pub delta: f64,
    pub seed: u64,
    pub data: CMatrix,
}

impl FarFieldMatrix {
    /// Checks that the data shape matches channel and grid.
    pub fn validate(&self) -> Result<()> {
        let size = self.expected_size();
        if self.data.nrows() != size || self.data.ncols() != size {
            return Err(Error::Config(format!(
                "{} data with {} directions must be {size}x{size}, got {}x{}",
                self.channel,
                self.grid.len(),
                self.data.nrows(),
                self.data.ncols()
            )));
        }
        if self.data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Numerical("far-field data has non-finite entries".into()));
        }
        Ok(())
    }

    pub fn expected_size(&self) -> usize {
        match self.channel {
            Channel::Ff => 2 * self.grid.len(),
            _ => self.grid.len(),
        }
    }

    /// `(2π/N)·data`.
    pub fn operator(&self) -> CMatrix {
        &self.data * Complex64::from(self.grid.weight())
    }

    /// Operator in flux-normalized coordinates: `p` rows and columns scaled by
    /// `k_p/k_s`. For real impedances this is the matrix that is normal.
    pub fn energy_weighted(&self) -> CMatrix {
        let n = self.grid.len();
        let q = self.medium.k_p() / self.medium.k_s();
        let scale = |i: usize| match self.channel {
            Channel::Ff if i < n => q,
            Channel::Ff => 1.0,
            _ => 1.0,
        };
        let w = self.grid.weight();
        CMatrix::from_fn(self.data.nrows(), self.data.ncols(), |i, j| {
            self.data[(i, j)] * (w * scale(i) * scale(j))
        })
    }

    /// Single-channel sub-block of `FF` data.
    pub fn extract(&self, channel: Channel) -> Result<FarFieldMatrix> {
        let n = self.grid.len();
        let offset = match (self.channel, channel) {
            (a, b) if a == b => return Ok(self.clone()),
            (Channel::Ff, Channel::Pp) => 0,
            (Channel::Ff, Channel::Ss) => n,
            (a, b) => return Err(Error::Config(format!("cannot extract {b} from {a} data"))),
        };
        Ok(FarFieldMatrix {
            channel,
            data: self.data.view((offset, offset), (n, n)).into_owned(),
            ..self.clone()
        })
    }
}

/// `‖AA* − A*A‖_F / ‖A‖_F²`.
pub fn normality_defect(a: &CMatrix) -> f64 {
    let ah = a.adjoint();
    frobenius(&(a * &ah - &ah * a)) / frobenius(a).powi(2).max(f64::MIN_POSITIVE)
}

/// `g_p(d) = (g·d)d` or `g_s(d) = (g·d⊥)d⊥` for samples `g(d_j)`.
pub fn project(g: &[CVector<2>], directions: &[Point<2>], kind: WaveKind) -> Vec<CVector<2>> {
    g.iter()
        .zip(directions)
        .map(|(v, d)| {
            let e = match kind {
                WaveKind::P => *d,
                WaveKind::S => perp(d),
            };
            let ec = e.map(Complex64::from);
            ec * (ec[0] * v[0] + ec[1] * v[1])
        })
        .collect()
}

/// Anything that can produce far-field patterns for a batch of plane waves.
pub trait FarFieldSolver: Sync {
    fn medium(&self) -> &ElasticMedium;

    /// `2·|directions| × |incidents|`, Cartesian components at each direction.
    fn farfield_patterns(&self, incidents: &[PlaneWave<2>], directions: &[Point<2>]) -> Result<CMatrix>;
}

impl FarFieldSolver for MultiscaleSolver {
    fn medium(&self) -> &ElasticMedium {
        MultiscaleSolver::medium(self)
    }

    fn farfield_patterns(&self, incidents: &[PlaneWave<2>], directions: &[Point<2>]) -> Result<CMatrix> {
        MultiscaleSolver::farfield_patterns(self, incidents, directions)
    }
}

impl FarFieldSolver for InteractionMatrix<2> {
    fn medium(&self) -> &ElasticMedium {
        InteractionMatrix::medium(self)
    }

    fn farfield_patterns(&self, incidents: &[PlaneWave<2>], directions: &[Point<2>]) -> Result<CMatrix> {
        let cols = incidents
            .par_iter()
            .map(|w| farfield_points(self, w, directions))
            .collect::<Result<Vec<_>>>()?;
        Ok(CMatrix::from_fn(2 * directions.len(), incidents.len(), |i, c| {
            cols[c][i / 2][i % 2]
        }))
    }
}

/// Samples the far-field operator of `solver` on `grid` for `channel`.
pub fn assemble_operator<S: FarFieldSolver + ?Sized>(
    solver: &S,
    grid: &DirectionGrid,
    channel: Channel,
) -> Result<FarFieldMatrix> {
    let medium = *solver.medium();
    let dirs = grid.directions();
    let n = dirs.len();
    let kinds = channel.incident_kinds();
    let incidents: Vec<_> = kinds
        .iter()
        .flat_map(|&kind| dirs.iter().map(move |d| PlaneWave::new(&medium, kind, *d)))
        .collect();
    let patterns = solver.farfield_patterns(&incidents, &dirs)?;
    let components: &[WaveKind] = match channel {
        Channel::Pp => &[WaveKind::P],
        Channel::Ss => &[WaveKind::S],
        Channel::Ff => &[WaveKind::P, WaveKind::S],
    };
    let mut data = DMatrix::zeros(components.len() * n, incidents.len());
    for (a, kind) in components.iter().enumerate() {
        for (k, d) in dirs.iter().enumerate() {
            let e = match kind {
                WaveKind::P => *d,
                WaveKind::S => perp(d),
            };
            for c in 0..incidents.len() {
                data[(a * n + k, c)] = patterns[(2 * k, c)] * e[0] + patterns[(2 * k + 1, c)] * e[1];
            }
        }
    }
    Ok(FarFieldMatrix {
        channel,
        medium,
        grid: *grid,
        delta: 0.0,
        seed: 0,
        data,
    })
}

/// Multiplies every entry by `1 + δξ` with `ξ ~ U[−1, 1]` drawn in
/// column-major order from a ChaCha8 stream seeded with `seed`.
pub fn add_noise(matrix: &FarFieldMatrix, delta: f64, seed: u64) -> Result<FarFieldMatrix> {
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(Error::Config(format!(
            "noise level must be a finite value ≥ 0, got {delta}"
        )));
    }
    let mut out = matrix.clone();
    out.delta = delta;
    out.seed = seed;
    if delta == 0.0 {
        return Ok(out);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for z in out.data.iter_mut() {
        let xi: f64 = rng.random_range(-1.0..=1.0);
        *z *= 1.0 + delta * xi;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::foldy::{build_interaction, PointCloud};

    fn medium() -> ElasticMedium {
        ElasticMedium::new(2.0, 1.0, 8.0).unwrap()
    }

    fn foldy_scene(points: Vec<Point<2>>) -> InteractionMatrix<2> {
        build_interaction(
            &medium(),
            &PointCloud::uniform(points, Complex64::new(0.1, 0.0)).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn grid_basics() {
        let g = DirectionGrid::new(8).unwrap();
        assert_eq!(g.len(), 8);
        assert!((g.direction(2) - Point::<2>::new(0.0, 1.0)).norm() < 1e-15);
        assert_eq!(g.opposite(6), 2);
        assert!(DirectionGrid::new(7).is_err());
    }

    #[test]
    fn channel_parsing() {
        assert_eq!("FF".parse::<Channel>().unwrap(), Channel::Ff);
        assert_eq!(Channel::Pp.to_string(), "pp");
        assert!("xx".parse::<Channel>().is_err());
    }

    #[test]
    fn projections_split_exactly() {
        let dirs = DirectionGrid::new(6).unwrap().directions();
        let g: Vec<_> = (0..6)
            .map(|k| CVector::<2>::new(Complex64::new(k as f64, 1.0), Complex64::new(-0.5, k as f64)))
            .collect();
        let p = project(&g, &dirs, WaveKind::P);
        let s = project(&g, &dirs, WaveKind::S);
        for k in 0..6 {
            assert!((p[k] + s[k] - g[k]).norm() < 1e-14);
        }
        let ps = project(&p, &dirs, WaveKind::S);
        assert!(ps.iter().all(|v| v.norm() < 1e-14));
        let dd: Vec<_> = dirs.iter().map(|d| d.map(Complex64::from)).collect();
        let pd = project(&dd, &dirs, WaveKind::P);
        assert!(pd.iter().zip(&dd).all(|(a, b)| (a - b).norm() < 1e-15));
    }

    #[test]
    fn empty_scene_gives_zero_matrix() {
        let f = assemble_operator(&foldy_scene(vec![]), &DirectionGrid::new(8).unwrap(), Channel::Ff).unwrap();
        assert_eq!(f.data.nrows(), 16);
        assert!(f.data.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn pp_and_ss_are_blocks_of_ff() {
        let s = foldy_scene(vec![Point::<2>::new(0.3, 0.1), Point::<2>::new(-0.5, 0.6)]);
        let g = DirectionGrid::new(16).unwrap();
        let ff = assemble_operator(&s, &g, Channel::Ff).unwrap();
        for ch in [Channel::Pp, Channel::Ss] {
            let direct = assemble_operator(&s, &g, ch).unwrap();
            assert_eq!(direct.data, ff.extract(ch).unwrap().data);
        }
    }

    #[test]
    fn single_point_is_normal() {
        let s = foldy_scene(vec![Point::<2>::new(0.3, -0.2)]);
        let g = DirectionGrid::new(32).unwrap();
        for ch in [Channel::Pp, Channel::Ss, Channel::Ff] {
            let f = assemble_operator(&s, &g, ch).unwrap();
            assert!(normality_defect(&f.operator()) < 1e-8, "{ch}");
        }
    }

    #[test]
    fn several_points_are_normal_after_energy_weighting() {
        let s = foldy_scene(vec![
            Point::<2>::new(0.3, -0.2),
            Point::<2>::new(-0.4, 0.5),
            Point::<2>::new(1.0, 1.0),
        ]);
        let f = assemble_operator(&s, &DirectionGrid::new(32).unwrap(), Channel::Ff).unwrap();
        assert!(normality_defect(&f.energy_weighted()) < 1e-8);
    }

    #[test]
    fn reciprocity() {
        let s = foldy_scene(vec![Point::<2>::new(0.3, -0.2), Point::<2>::new(-0.4, 0.5)]);
        let g = DirectionGrid::new(16).unwrap();
        let f = assemble_operator(&s, &g, Channel::Ff).unwrap();
        let n = g.len();
        let scale = f.data.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for a in 0..2 {
            for b in 0..2 {
                for k in 0..n {
                    for j in 0..n {
                        let lhs = f.data[(a * n + k, b * n + j)];
                        let rhs = f.data[(b * n + g.opposite(j), a * n + g.opposite(k))];
                        assert!((lhs - rhs).norm() <= 1e-8 * scale);
                    }
                }
            }
        }
    }

    #[test]
    fn noise_contract() {
        let s = foldy_scene(vec![Point::<2>::new(0.3, -0.2)]);
        let f = assemble_operator(&s, &DirectionGrid::new(8).unwrap(), Channel::Ss).unwrap();
        assert_eq!(add_noise(&f, 0.0, 1).unwrap().data, f.data);
        let a = add_noise(&f, 0.01, 42).unwrap();
        let b = add_noise(&f, 0.01, 42).unwrap();
        assert_eq!(a.data, b.data);
        assert_ne!(a.data, add_noise(&f, 0.01, 43).unwrap().data);
        for (x, y) in a.data.iter().zip(f.data.iter()) {
            assert!((x - y).norm() <= 0.01 * y.norm() * (1.0 + 1e-12));
        }
        assert!(add_noise(&f, -0.1, 1).is_err());
    }
}
