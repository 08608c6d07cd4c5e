//! Rigid (Dirichlet) obstacle in 2D via a single-layer ansatz
//!
//! ```text
//! u_sc(x) = ∫_{∂D} Γ(x, y) φ(y) ds(y),    S φ = −u_in on ∂D,
//! ```
//!
//! discretized with the Kussmaul-Martensen Nyström scheme. With `p(t)` a
//! `2π`-periodic parametrization the kernel is split as
//! `Γ(p(t), p(τ)) = Γ¹(t, τ) ln(4 sin²((t−τ)/2)) + Γ²(t, τ)` and the
//! logarithmic part is integrated exactly against trigonometric interpolants.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::foldy::{set_block, stack, unstack};
use crate::greens::{
    chi, dynamic_coefficients, farfield_kernel, radial_tensor, CTensor, CVector, ElasticMedium, Point, VectorField,
};
use crate::linalg::{CMatrix, CVec, Factorized};
use crate::special::bessel_j01;
use crate::{Error, Result};

/// Condition estimate above which an interior Dirichlet eigenvalue is suspected.
pub const EIGENVALUE_CONDITION: f64 = 1e13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveShape {
    /// `(cos t + 0.65 cos 2t − 0.65, 1.5 sin t)`
    Kite,
    /// `(cos t, sin t)`
    Circle,
}

/// Scaled and shifted analytic closed curve with `n` quadrature nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryCurve {
    shape: CurveShape,
    scale: f64,
    center: Point<2>,
    n: usize,
}

impl BoundaryCurve {
    pub fn new(shape: CurveShape, scale: f64, center: Point<2>, n: usize) -> Result<Self> {
        if n < 8 || !n.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "node count must be even and at least 8, got {n}"
            )));
        }
        if !(scale > 0.0) || !scale.is_finite() || center.iter().any(|c| !c.is_finite()) {
            return Err(Error::Config(
                "curve scale must be positive and the center finite".into(),
            ));
        }
        let curve = Self {
            shape,
            scale,
            center,
            n,
        };
        curve.check_simple()?;
        Ok(curve)
    }

    pub fn kite(n: usize) -> Result<Self> {
        Self::new(CurveShape::Kite, 1.0, Point::<2>::zeros(), n)
    }

    pub fn circle(radius: f64, n: usize) -> Result<Self> {
        Self::new(CurveShape::Circle, radius, Point::<2>::zeros(), n)
    }

    /// Same curve with a different node count.
    pub fn with_nodes(&self, n: usize) -> Result<Self> {
        Self::new(self.shape, self.scale, self.center, n)
    }

    pub fn shape(&self) -> CurveShape {
        self.shape
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn center(&self) -> Point<2> {
        self.center
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn point(&self, t: f64) -> Point<2> {
        let (s, c) = t.sin_cos();
        let local = match self.shape {
            CurveShape::Kite => Point::<2>::new(c + 0.65 * (2.0 * t).cos() - 0.65, 1.5 * s),
            CurveShape::Circle => Point::<2>::new(c, s),
        };
        self.center + local * self.scale
    }

    pub fn derivative(&self, t: f64) -> Point<2> {
        let (s, c) = t.sin_cos();
        let local = match self.shape {
            CurveShape::Kite => Point::<2>::new(-s - 1.3 * (2.0 * t).sin(), 1.5 * c),
            CurveShape::Circle => Point::<2>::new(-s, c),
        };
        local * self.scale
    }

    /// `t_j = 2πj/n`.
    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| 2.0 * PI * j as f64 / self.n as f64).collect()
    }

    fn polygon(&self, m: usize) -> Vec<Point<2>> {
        (0..m).map(|j| self.point(2.0 * PI * j as f64 / m as f64)).collect()
    }

    fn check_simple(&self) -> Result<()> {
        let poly = self.polygon(self.n);
        for t in self.nodes() {
            if !(self.derivative(t).norm() > 0.0) {
                return Err(Error::Config(format!("curve has a stationary point at t = {t}")));
            }
        }
        let m = poly.len();
        for i in 0..m {
            let (a, b) = (poly[i], poly[(i + 1) % m]);
            for j in i + 2..m {
                if i == 0 && j == m - 1 {
                    continue;
                }
                let (c, d) = (poly[j], poly[(j + 1) % m]);
                if segments_cross(&a, &b, &c, &d) {
                    return Err(Error::Config("curve is self-intersecting".into()));
                }
            }
        }
        Ok(())
    }

    /// Winding-number test against a fine polygon.
    pub fn contains(&self, x: &Point<2>) -> bool {
        let poly = self.polygon(4096);
        let mut inside = false;
        let m = poly.len();
        for i in 0..m {
            let (a, b) = (poly[i], poly[(i + 1) % m]);
            if (a[1] > x[1]) != (b[1] > x[1]) {
                let xi = a[0] + (x[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
                if x[0] < xi {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Distance from `x` to the curve (sampling followed by local refinement).
    pub fn distance(&self, x: &Point<2>) -> f64 {
        let m = 2048;
        let h = 2.0 * PI / m as f64;
        let (mut best_t, mut best) = (0.0, f64::INFINITY);
        for j in 0..m {
            let t = j as f64 * h;
            let d = (self.point(t) - x).norm();
            if d < best {
                best = d;
                best_t = t;
            }
        }
        // golden-section search on the bracketing interval
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let (mut lo, mut hi) = (best_t - h, best_t + h);
        let f = |t: f64| (self.point(t) - x).norm();
        for _ in 0..60 {
            let a = hi - g * (hi - lo);
            let b = lo + g * (hi - lo);
            if f(a) < f(b) {
                hi = b;
            } else {
                lo = a;
            }
        }
        best.min(f(0.5 * (lo + hi)))
    }
}

fn segments_cross(a: &Point<2>, b: &Point<2>, c: &Point<2>, d: &Point<2>) -> bool {
    let orient = |p: &Point<2>, q: &Point<2>, r: &Point<2>| (q - p).perp(&(r - p));
    let (d1, d2) = (orient(c, d, a), orient(c, d, b));
    let (d3, d4) = (orient(a, b, c), orient(a, b, d));
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

#[derive(Debug, Clone, Copy)]
struct Node {
    t: f64,
    p: Point<2>,
    speed: f64,
    tangent: Point<2>,
}

/// Coefficients of `Γ¹`, the factor multiplying `ln(4 sin²((t−τ)/2))`.
fn log_part(medium: &ElasticMedium, r: f64) -> (f64, f64) {
    let (kp, ks) = (medium.k_p(), medium.k_s());
    let w2 = medium.omega * medium.omega;
    let (j0s, j1s) = bessel_j01(ks * r);
    let (j0p, j1p) = bessel_j01(kp * r);
    let cross = (ks * j1s - kp * j1p) / r;
    let a = -(j0s / medium.mu - cross / w2) / (4.0 * PI);
    let b = -(-ks * ks * j0s + kp * kp * j0p + 2.0 * cross) / (4.0 * PI * w2);
    (a, b)
}

/// `(Γ¹, Γ²)` for a pair of parameters, with the diagonal limits at `t = τ`.
fn split_kernel(medium: &ElasticMedium, chi: Complex64, x: &Node, y: &Node) -> (CTensor<2>, CTensor<2>) {
    let diff = x.p - y.p;
    let r = diff.norm();
    if r <= 1e-13 * y.speed {
        let (a_st, b_st) = static_constants(medium);
        let g1 = CTensor::<2>::identity() * Complex64::from(-a_st / (8.0 * PI));
        let g2 = radial_tensor(
            chi - a_st * y.speed.ln() / (4.0 * PI),
            Complex64::from(b_st / (4.0 * PI)),
            &y.tangent,
        );
        return (g1, g2);
    }
    let xhat = diff / r;
    let (a1, b1) = log_part(medium, r);
    let g1 = radial_tensor(a1.into(), b1.into(), &xhat);
    let (a, b) = dynamic_coefficients::<2>(medium, r);
    let lg = (4.0 * (0.5 * (x.t - y.t)).sin().powi(2)).ln();
    let g2 = radial_tensor(a - a1 * lg, b - b1 * lg, &xhat);
    (g1, g2)
}

fn static_constants(medium: &ElasticMedium) -> (f64, f64) {
    let den = medium.mu * (medium.lambda + 2.0 * medium.mu);
    (
        (medium.lambda + 3.0 * medium.mu) / den,
        (medium.lambda + medium.mu) / den,
    )
}

/// Log-quadrature weight `R_j(t)` for the node `t_j`, with `n = 2m` nodes.
fn log_weight(m: usize, s: f64) -> f64 {
    let mf = m as f64;
    let (mut c_prev, mut c) = (1.0, s.cos());
    let two_cos = 2.0 * c;
    let mut sum = 0.0;
    for k in 1..m {
        sum += c / k as f64;
        let next = two_cos * c - c_prev;
        c_prev = c;
        c = next;
    }
    // c now holds cos(m s)
    -2.0 * PI / mf * sum - PI / (mf * mf) * c
}

/// Single-layer density at the quadrature nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerDensity {
    pub values: Vec<CVector<2>>,
}

impl LayerDensity {
    pub fn as_vector(&self) -> CVec {
        stack(&self.values)
    }

    fn from_vector(v: &CVec) -> Self {
        Self { values: unstack(v) }
    }
}

/// Assembled and factorized single-layer system for one curve.
#[derive(Debug, Clone)]
pub struct RigidSolver {
    medium: ElasticMedium,
    curve: BoundaryCurve,
    chi: Complex64,
    nodes: Vec<Node>,
    matrix: CMatrix,
    factor: Factorized,
}

fn make_nodes(curve: &BoundaryCurve) -> Vec<Node> {
    curve
        .nodes()
        .into_iter()
        .map(|t| {
            let dp = curve.derivative(t);
            let speed = dp.norm();
            Node {
                t,
                p: curve.point(t),
                speed,
                tangent: dp / speed,
            }
        })
        .collect()
}

/// Nyström matrix of the single-layer operator on `curve` (`2n × 2n`).
pub fn assemble_single_layer(medium: &ElasticMedium, curve: &BoundaryCurve) -> Result<CMatrix> {
    medium.check_dimension(2)?;
    let chi = chi::<2>(medium)?.chi;
    Ok(assemble(medium, chi, &make_nodes(curve)))
}

fn assemble(medium: &ElasticMedium, chi: Complex64, nodes: &[Node]) -> CMatrix {
    let n = nodes.len();
    let m = n / 2;
    let weights: Vec<f64> = (0..n).map(|k| log_weight(m, PI * k as f64 / m as f64)).collect();
    let h = PI / m as f64;
    let rows: Vec<Vec<CTensor<2>>> = nodes
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            nodes
                .iter()
                .enumerate()
                .map(|(j, y)| {
                    let (g1, g2) = split_kernel(medium, chi, x, y);
                    let r = weights[(i + n - j) % n];
                    (g1 * Complex64::from(r) + g2 * Complex64::from(h)) * Complex64::from(y.speed)
                })
                .collect()
        })
        .collect();
    let mut a = DMatrix::zeros(2 * n, 2 * n);
    for (i, row) in rows.iter().enumerate() {
        for (j, block) in row.iter().enumerate() {
            set_block(&mut a, i, j, block);
        }
    }
    a
}

/// Assembles and factorizes the single-layer system. An ill-conditioned system
/// (`ω²` near an interior Dirichlet eigenvalue) is reported as a warning; an
/// exactly singular one as an error.
pub fn build_rigid(medium: &ElasticMedium, curve: &BoundaryCurve) -> Result<RigidSolver> {
    medium.check_dimension(2)?;
    let chi = chi::<2>(medium)?.chi;
    let nodes = make_nodes(curve);
    let matrix = assemble(medium, chi, &nodes);
    let factor = Factorized::new(&matrix)?;
    if !factor.condition().is_finite() {
        return Err(Error::SingularMatrix("single-layer system is singular".into()));
    }
    if factor.condition() > EIGENVALUE_CONDITION {
        log::warn!(
            "single-layer system condition {:e} at ω = {}: possible interior Dirichlet eigenvalue",
            factor.condition(),
            medium.omega
        );
    }
    Ok(RigidSolver {
        medium: *medium,
        curve: *curve,
        chi,
        nodes,
        matrix,
        factor,
    })
}

impl RigidSolver {
    pub fn medium(&self) -> &ElasticMedium {
        &self.medium
    }

    pub fn curve(&self) -> &BoundaryCurve {
        &self.curve
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn condition(&self) -> f64 {
        self.factor.condition()
    }

    /// Node parameters, positions and `|p'(t_j)|`.
    pub fn node_points(&self) -> Vec<Point<2>> {
        self.nodes.iter().map(|n| n.p).collect()
    }

    /// Solves `S φ = g` for boundary data `g` at the nodes.
    pub fn solve_boundary_data(&self, data: &[CVector<2>]) -> Result<LayerDensity> {
        if data.len() != self.nodes.len() {
            return Err(Error::Config("one boundary value per node expected".into()));
        }
        Ok(LayerDensity::from_vector(&self.factor.solve_vec(&stack(data))?))
    }

    /// Solves `S Φ = G` for a `2n × m` block of boundary data.
    pub fn solve_batch(&self, data: &CMatrix) -> Result<CMatrix> {
        self.factor.solve(data)
    }

    /// Density for the rigid condition `u_sc = −u_in` on `∂D`.
    pub fn solve_rigid<F: VectorField<2> + ?Sized>(&self, incident: &F) -> Result<LayerDensity> {
        let data: Vec<_> = self.nodes.iter().map(|n| -incident.eval(&n.p)).collect();
        self.solve_boundary_data(&data)
    }

    /// Boundary data `−u_in(p_j)` stacked as a column for each incident field.
    pub fn rigid_data<F: VectorField<2>>(&self, incidents: &[F]) -> CMatrix {
        let n = self.nodes.len();
        let mut g = CMatrix::zeros(2 * n, incidents.len());
        for (c, inc) in incidents.iter().enumerate() {
            for (j, node) in self.nodes.iter().enumerate() {
                let v = inc.eval(&node.p);
                g[(2 * j, c)] = -v[0];
                g[(2 * j + 1, c)] = -v[1];
            }
        }
        g
    }

    fn quadrature_weight(&self) -> f64 {
        2.0 * PI / self.nodes.len() as f64
    }

    /// Rows `2i, 2i+1` map the stacked density to the field at `points[i]`
    /// (trapezoid rule, for points off the curve).
    pub fn field_matrix(&self, points: &[Point<2>]) -> Result<CMatrix> {
        let h = self.quadrature_weight();
        let n = self.nodes.len();
        let rows: Vec<Vec<CTensor<2>>> = points
            .par_iter()
            .map(|x| {
                self.nodes
                    .iter()
                    .map(|node| {
                        let diff = x - node.p;
                        let r = diff.norm();
                        if r == 0.0 {
                            return Err(Error::Singularity("field evaluated at a quadrature node".into()));
                        }
                        let (a, b) = dynamic_coefficients::<2>(&self.medium, r);
                        Ok(radial_tensor(a, b, &(diff / r)) * Complex64::from(h * node.speed))
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        let mut e = DMatrix::zeros(2 * points.len(), 2 * n);
        for (i, row) in rows.iter().enumerate() {
            for (j, block) in row.iter().enumerate() {
                set_block(&mut e, i, j, block);
            }
        }
        Ok(e)
    }

    /// Maps the stacked density to far-field patterns at `directions`.
    pub fn farfield_matrix(&self, directions: &[Point<2>]) -> CMatrix {
        let h = self.quadrature_weight();
        let n = self.nodes.len();
        let mut e = DMatrix::zeros(2 * directions.len(), 2 * n);
        for (i, d) in directions.iter().enumerate() {
            for (j, node) in self.nodes.iter().enumerate() {
                let k = farfield_kernel(&self.medium, &node.p, d) * Complex64::from(h * node.speed);
                set_block(&mut e, i, j, &k);
            }
        }
        e
    }

    /// Single-layer potential at `x` off the curve.
    pub fn field(&self, density: &LayerDensity, x: &Point<2>) -> Result<CVector<2>> {
        let v = self.field_matrix(std::slice::from_ref(x))? * density.as_vector();
        Ok(CVector::<2>::new(v[0], v[1]))
    }

    /// Single-layer potential on the curve at an arbitrary parameter `t`,
    /// using the log-quadrature weights centered at `t`.
    pub fn boundary_field(&self, density: &LayerDensity, t: f64) -> CVector<2> {
        let dp = self.curve.derivative(t);
        let x = Node {
            t,
            p: self.curve.point(t),
            speed: dp.norm(),
            tangent: dp / dp.norm(),
        };
        let m = self.nodes.len() / 2;
        let h = PI / m as f64;
        self.nodes
            .iter()
            .zip(&density.values)
            .fold(CVector::<2>::zeros(), |acc, (y, phi)| {
                let (g1, g2) = split_kernel(&self.medium, self.chi, &x, y);
                let r = log_weight(m, x.t - y.t);
                acc + (g1 * Complex64::from(r) + g2 * Complex64::from(h)) * phi * Complex64::from(y.speed)
            })
    }

    /// Far-field pattern `∫ Γ^∞_{φ(y), y}(x̂) ds(y)` by the trapezoid rule.
    pub fn farfield_density(&self, density: &LayerDensity, xhat: &Point<2>) -> CVector<2> {
        let h = self.quadrature_weight();
        self.nodes
            .iter()
            .zip(&density.values)
            .fold(CVector::<2>::zeros(), |acc, (y, phi)| {
                acc + farfield_kernel(&self.medium, &y.p, xhat) * phi * Complex64::from(h * y.speed)
            })
    }

    /// Densities `ψ(·; y, e_a)`, `a = 1, 2`, for the scattered part of the
    /// Dirichlet Green's tensor with source `y` (columns `2k`, `2k+1`).
    pub fn green_densities(&self, sources: &[Point<2>]) -> Result<CMatrix> {
        for y in sources {
            self.check_exterior(y)?;
        }
        let n = self.nodes.len();
        let mut g = CMatrix::zeros(2 * n, 2 * sources.len());
        for (k, y) in sources.iter().enumerate() {
            for (j, node) in self.nodes.iter().enumerate() {
                let diff = node.p - y;
                let r = diff.norm();
                let (a, b) = dynamic_coefficients::<2>(&self.medium, r);
                let block = -radial_tensor(a, b, &(diff / r));
                g.view_mut((2 * j, 2 * k), (2, 2)).copy_from(&block);
            }
        }
        self.solve_batch(&g)
    }

    fn check_exterior(&self, y: &Point<2>) -> Result<()> {
        if self.curve.contains(y) {
            return Err(Error::Domain(format!(
                "point {:?} lies inside the obstacle",
                y.as_slice()
            )));
        }
        Ok(())
    }

    /// Dirichlet Green's tensor `Γ_D(x, y) = Γ(x, y) + Γ_D^sc(x, y)`.
    pub fn gamma_d(&self, x: &Point<2>, y: &Point<2>) -> Result<CTensor<2>> {
        self.check_exterior(x)?;
        let psi = self.green_densities(std::slice::from_ref(y))?;
        let scattered = self.field_matrix(std::slice::from_ref(x))? * psi;
        let free = crate::greens::gamma_dynamic(&self.medium, x, y)?.value;
        Ok(free + CTensor::<2>::from_fn(|i, j| scattered[(i, j)]))
    }
}
