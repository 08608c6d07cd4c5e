//! Declarative scene descriptions (TOML) for the command-line tool.
//!
//! ```toml
//! spec_version = 1
//!
//! [medium]
//! lambda = 2.0
//! mu = 1.0
//! omega = 8.0
//!
//! [obstacle]
//! curve = "kite"        # kite | circle | none
//! n = 256
//!
//! [[points]]
//! y = [2.0, 0.4]
//! alpha = [0.1, 0.0]    # re, im
//!
//! [data]
//! channel = "ff"
//! n_dir = 64
//! delta = 0.01
//! seed = 7
//! ```
//!
//! Instead of `[[points]]` a `[random_points]` table draws `count` points with
//! `|x| ∈ x_abs` (random sign) and `y ∈ y`, rejecting draws closer than
//! `min_separation` to an earlier point.

use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bie::{BoundaryCurve, CurveShape};
use crate::farfield::{add_noise, assemble_operator, Channel, DirectionGrid, FarFieldMatrix, DEFAULT_DIRECTIONS};
use crate::foldy::PointCloud;
use crate::greens::{ElasticMedium, PlaneWave, Point, WaveKind};
use crate::imaging::GridSpec;
use crate::multiscale::{build_multiscale, MultiscaleSolver, MIN_BOUNDARY_DISTANCE};
use crate::{Error, Result};

pub const SPEC_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumConfig {
    pub lambda: f64,
    pub mu: f64,
    pub omega: f64,
    #[serde(default = "two")]
    pub dim: usize,
}

fn two() -> usize {
    2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveName {
    Kite,
    Circle,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleConfig {
    pub curve: CurveName,
    #[serde(default = "one")]
    pub scale: f64,
    #[serde(default)]
    pub center: [f64; 2],
    #[serde(default = "default_nodes")]
    pub n: usize,
}

fn one() -> f64 {
    1.0
}

fn default_nodes() -> usize {
    256
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointConfig {
    pub y: [f64; 2],
    /// `[re, im]`.
    pub alpha: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomPoints {
    pub count: usize,
    pub seed: u64,
    pub alpha: [f64; 2],
    pub x_abs: [f64; 2],
    pub y: [f64; 2],
    #[serde(default)]
    pub min_separation: f64,
}

/// Rejection draws allowed per requested point before giving up.
const MAX_DRAWS_PER_POINT: usize = 10_000;

impl RandomPoints {
    /// Draws the points. Each draw takes `|x|`, then the sign, then `y`.
    pub fn generate(&self) -> Result<Vec<Point<2>>> {
        let ok = |r: [f64; 2]| r[0].is_finite() && r[1].is_finite() && r[0] < r[1];
        if !ok(self.x_abs) || !ok(self.y) || self.x_abs[0] < 0.0 {
            return Err(Error::Config(format!(
                "invalid sampling box {:?} × {:?}",
                self.x_abs, self.y
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut pts: Vec<Point<2>> = Vec::with_capacity(self.count);
        let mut draws = 0;
        while pts.len() < self.count {
            draws += 1;
            if draws > MAX_DRAWS_PER_POINT * self.count.max(1) {
                return Err(Error::Config(format!(
                    "could not place {} points with separation {}",
                    self.count, self.min_separation
                )));
            }
            let x = rng.random_range(self.x_abs[0]..self.x_abs[1]) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let y = rng.random_range(self.y[0]..self.y[1]);
            let p = Point::<2>::new(x, y);
            if pts.iter().all(|q| (q - p).norm() >= self.min_separation) {
                pts.push(p);
            }
        }
        Ok(pts)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub channel: Channel,
    #[serde(default = "default_directions")]
    pub n_dir: usize,
    #[serde(default)]
    pub delta: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_directions() -> usize {
    DEFAULT_DIRECTIONS
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            channel: Channel::Ff,
            n_dir: DEFAULT_DIRECTIONS,
            delta: 0.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IncidentConfig {
    pub kind: WaveKind,
    /// Propagation direction angle in radians.
    #[serde(default)]
    pub angle: f64,
}

impl Default for IncidentConfig {
    fn default() -> Self {
        Self {
            kind: WaveKind::P,
            angle: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImagingConfig {
    /// Polarization angle: `a = (cos β, sin β)`.
    #[serde(default)]
    pub beta: f64,
    /// Relative spectral floor; defaults to `max(1e-12, δ²)`.
    pub cutoff: Option<f64>,
    /// Number of peaks reported; defaults to the number of points.
    pub peaks: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub spec_version: u32,
    pub medium: MediumConfig,
    pub obstacle: Option<ObstacleConfig>,
    #[serde(default)]
    pub points: Vec<PointConfig>,
    pub random_points: Option<RandomPoints>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub data: DataConfig,
    #[serde(default)]
    pub incident: IncidentConfig,
    #[serde(default)]
    pub imaging: ImagingConfig,
}

impl Scenario {
    /// Parses and validates.
    pub fn from_toml(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text).map_err(|e| {
            let line = e.span().map(|r| text[..r.start].lines().count().max(1)).unwrap_or(0);
            Error::Parse {
                line,
                message: e.message().to_string(),
            }
        })?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn medium(&self) -> Result<ElasticMedium> {
        let m = &self.medium;
        let medium = ElasticMedium::new(m.lambda, m.mu, m.omega).map_err(|e| Error::Config(e.to_string()))?;
        if m.dim != 2 {
            return Err(Error::Config(format!(
                "scenes are two-dimensional, got dim = {}",
                m.dim
            )));
        }
        Ok(medium)
    }

    pub fn curve(&self) -> Result<Option<BoundaryCurve>> {
        let Some(o) = &self.obstacle else { return Ok(None) };
        let shape = match o.curve {
            CurveName::Kite => CurveShape::Kite,
            CurveName::Circle => CurveShape::Circle,
            CurveName::None => return Ok(None),
        };
        BoundaryCurve::new(shape, o.scale, Point::<2>::new(o.center[0], o.center[1]), o.n)
            .map(Some)
            .map_err(|e| Error::Config(format!("obstacle: {e}")))
    }

    pub fn cloud(&self) -> Result<PointCloud<2>> {
        let mut pts: Vec<Point<2>> = self.points.iter().map(|p| Point::<2>::new(p.y[0], p.y[1])).collect();
        let mut alphas: Vec<Complex64> = self
            .points
            .iter()
            .map(|p| Complex64::new(p.alpha[0], p.alpha[1]))
            .collect();
        if let Some(r) = &self.random_points {
            let extra = r.generate()?;
            alphas.extend(std::iter::repeat_n(Complex64::new(r.alpha[0], r.alpha[1]), extra.len()));
            pts.extend(extra);
        }
        PointCloud::new(pts, alphas).map_err(|e| Error::Config(format!("points: {e}")))
    }

    pub fn polarization(&self) -> Point<2> {
        Point::<2>::new(self.imaging.beta.cos(), self.imaging.beta.sin())
    }

    pub fn direction_grid(&self) -> Result<DirectionGrid> {
        DirectionGrid::new(self.data.n_dir)
    }

    pub fn incident(&self) -> Result<PlaneWave<2>> {
        let t = self.incident.angle;
        Ok(PlaneWave::new(
            &self.medium()?,
            self.incident.kind,
            Point::<2>::new(t.cos(), t.sin()),
        ))
    }

    /// Checks every precondition that can be checked without solving.
    pub fn validate(&self) -> Result<()> {
        if self.spec_version != SPEC_VERSION {
            return Err(Error::Config(format!(
                "unsupported spec_version {} (expected {SPEC_VERSION})",
                self.spec_version
            )));
        }
        let medium = self.medium()?;
        let cloud = self.cloud()?;
        self.grid.validate()?;
        self.direction_grid()?;
        if !(self.data.delta >= 0.0) || !self.data.delta.is_finite() {
            return Err(Error::Config(format!(
                "data.delta must be finite and ≥ 0, got {}",
                self.data.delta
            )));
        }
        if !self.imaging.beta.is_finite() || !self.incident.angle.is_finite() {
            return Err(Error::Config("angles must be finite".into()));
        }
        if let Some(c) = self.imaging.cutoff {
            if !(c > 0.0) || !c.is_finite() {
                return Err(Error::Config(format!("imaging.cutoff must be positive, got {c}")));
            }
        }
        if let Some(curve) = self.curve()? {
            let min_dist = MIN_BOUNDARY_DISTANCE * medium.wavelength_s();
            for (k, y) in cloud.points().iter().enumerate() {
                if curve.contains(y) {
                    return Err(Error::Config(format!(
                        "point {k} at ({}, {}) lies inside the obstacle",
                        y[0], y[1]
                    )));
                }
                let d = curve.distance(y);
                if d < min_dist {
                    return Err(Error::Config(format!(
                        "point {k} at ({}, {}) is {d:.4} from the boundary, closer than {min_dist:.4}",
                        y[0], y[1]
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn build_solver(&self) -> Result<MultiscaleSolver> {
        build_multiscale(&self.medium()?, self.curve()?.as_ref(), &self.cloud()?)
    }

    /// Noisy far-field data as configured under `[data]`.
    pub fn farfield(&self, solver: &MultiscaleSolver) -> Result<FarFieldMatrix> {
        let clean = assemble_operator(solver, &self.direction_grid()?, self.data.channel)?;
        add_noise(&clean, self.data.delta, self.data.seed)
    }

    /// Peaks to report: `imaging.peaks` or the number of points.
    pub fn peak_count(&self) -> Result<usize> {
        Ok(self.imaging.peaks.unwrap_or(self.cloud()?.len()))
    }
}
