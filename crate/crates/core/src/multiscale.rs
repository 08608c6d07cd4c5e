//! Scattering by a rigid obstacle `D` together with point scatterers `Y`.
//!
//! With `Γ_D = Γ + Γ_D^sc` the Dirichlet Green's tensor of the exterior of `D`
//! and `u_D = u_in + u_D^sc` the field without the points,
//!
//! ```text
//! u(x) = u_D(x) + Σ_{k,l} Γ_D(x, y_k) [Λ^{α,D}]_{kl} u_D(y_l)
//! ```
//!
//! The inverse interaction matrix has off-diagonal blocks `−Γ_D(y_k, y_l)`
//! and diagonal blocks `(α_k − χ) I − Γ_D^sc(y_k, y_k)`. The self term is the
//! regular part of `Γ_D(·, y_k)` at `y_k` beyond `χ`; without it the field
//! would not satisfy the impedance condition `τ₂u = α_k τ₁u`.
//!
//! Without an obstacle the solver reduces to the free-space point system.

use nalgebra::DMatrix;

use crate::bie::{build_rigid, BoundaryCurve, LayerDensity, RigidSolver};
use crate::foldy::{set_block, stack, unstack, PointCloud, RESONANCE_CONDITION};
use crate::greens::{chi, dynamic_kernel, farfield_kernel, CTensor, CVector, ElasticMedium, Point, VectorField};
use crate::linalg::{CMatrix, CVec, Factorized};
use crate::{Error, Result};

/// Points closer than this many shear wavelengths to `∂D` are rejected.
pub const MIN_BOUNDARY_DISTANCE: f64 = 0.1;

#[derive(Debug, Clone)]
pub struct MultiscaleSolver {
    medium: ElasticMedium,
    cloud: PointCloud<2>,
    rigid: Option<RigidSolver>,
    /// Densities of `Γ_D^sc(·, y_k) e_a`, columns `2k + a`.
    psi: CMatrix,
    /// Density-to-field map at the points.
    at_points: CMatrix,
    inverse: CMatrix,
    factor: Factorized,
}

/// Builds the combined solver. `curve = None` gives the free-space point problem.
pub fn build_multiscale(
    medium: &ElasticMedium,
    curve: Option<&BoundaryCurve>,
    cloud: &PointCloud<2>,
) -> Result<MultiscaleSolver> {
    medium.check_dimension(2)?;
    let chi = chi::<2>(medium)?.chi;
    let pts = cloud.points();
    let n_pts = pts.len();
    let rigid = curve.map(|c| build_rigid(medium, c)).transpose()?;
    let (psi, at_points, self_scat) = match &rigid {
        Some(r) => {
            let min_dist = MIN_BOUNDARY_DISTANCE * medium.wavelength_s();
            for (k, y) in pts.iter().enumerate() {
                if r.curve().contains(y) {
                    return Err(Error::Domain(format!("point {k} lies inside the obstacle")));
                }
                let d = r.curve().distance(y);
                if d < min_dist {
                    return Err(Error::Domain(format!(
                        "point {k} is {d:.4} from the boundary, closer than {min_dist:.4}"
                    )));
                }
            }
            let psi = r.green_densities(pts)?;
            let at_points = r.field_matrix(pts)?;
            let self_scat = &at_points * &psi;
            (psi, at_points, self_scat)
        }
        None => (
            CMatrix::zeros(0, 2 * n_pts),
            CMatrix::zeros(2 * n_pts, 0),
            CMatrix::zeros(2 * n_pts, 2 * n_pts),
        ),
    };
    let mut inverse = -self_scat;
    for k in 0..n_pts {
        for i in 0..2 {
            inverse[(2 * k + i, 2 * k + i)] += cloud.alphas()[k] - chi;
        }
        for l in 0..n_pts {
            if l != k {
                let g = dynamic_kernel(medium, &(pts[k] - pts[l]));
                let block = -g + inverse.fixed_view::<2, 2>(2 * k, 2 * l);
                set_block(&mut inverse, k, l, &block);
            }
        }
    }
    let factor = Factorized::new(&inverse)?;
    if factor.condition() > RESONANCE_CONDITION {
        return Err(Error::Resonance {
            omega: medium.omega,
            condition: factor.condition(),
        });
    }
    Ok(MultiscaleSolver {
        medium: *medium,
        cloud: cloud.clone(),
        rigid,
        psi,
        at_points,
        inverse,
        factor,
    })
}

impl MultiscaleSolver {
    pub fn medium(&self) -> &ElasticMedium {
        &self.medium
    }

    pub fn cloud(&self) -> &PointCloud<2> {
        &self.cloud
    }

    pub fn rigid(&self) -> Option<&RigidSolver> {
        self.rigid.as_ref()
    }

    /// `[Λ^{α,D}]⁻¹`.
    pub fn inverse_matrix(&self) -> &CMatrix {
        &self.inverse
    }

    pub fn condition(&self) -> f64 {
        self.factor.condition()
    }

    /// `Γ_D(y_k, y_l)` for `k ≠ l`.
    pub fn gamma_d_between(&self, k: usize, l: usize) -> Result<CTensor<2>> {
        if k == l {
            return Err(Error::Singularity("Γ_D is singular on the diagonal".into()));
        }
        Ok(-self.inverse.fixed_view::<2, 2>(2 * k, 2 * l).into_owned())
    }

    /// Solves for one incident field.
    pub fn total_field<'a, F: VectorField<2>>(&'a self, incident: &'a F) -> Result<MultiscaleField<'a>> {
        let pts = self.cloud.points();
        let (phi, u_d) = match &self.rigid {
            Some(r) => {
                let phi = r.solve_rigid(incident)?.as_vector();
                let scat = unstack::<2>(&(&self.at_points * &phi));
                let u_d: Vec<_> = pts.iter().zip(scat).map(|(y, s)| incident.eval(y) + s).collect();
                (phi, u_d)
            }
            None => (CVec::zeros(0), pts.iter().map(|y| incident.eval(y)).collect()),
        };
        let x = self.factor.solve_vec(&stack(&u_d))?;
        let density = phi + &self.psi * &x;
        Ok(MultiscaleField {
            solver: self,
            incident,
            density: LayerDensity {
                values: unstack(&density),
            },
            amplitudes: unstack(&x),
        })
    }

    /// Far-field patterns for a batch of incident fields, `2·|directions| × |incidents|`
    /// with rows `(2i, 2i+1)` the Cartesian components at `directions[i]`.
    pub fn farfield_patterns<F: VectorField<2>>(&self, incidents: &[F], directions: &[Point<2>]) -> Result<CMatrix> {
        let pts = self.cloud.points();
        let mut u_d = CMatrix::zeros(2 * pts.len(), incidents.len());
        for (c, inc) in incidents.iter().enumerate() {
            for (k, y) in pts.iter().enumerate() {
                u_d.fixed_view_mut::<2, 1>(2 * k, c).copy_from(&inc.eval(y));
            }
        }
        let mut far = CMatrix::zeros(2 * directions.len(), incidents.len());
        let phi = match &self.rigid {
            Some(r) => {
                let phi = r.solve_batch(&r.rigid_data(incidents))?;
                u_d += &self.at_points * &phi;
                Some((r, phi))
            }
            None => None,
        };
        let x = self.factor.solve(&u_d)?;
        if let Some((r, phi)) = phi {
            far += r.farfield_matrix(directions) * (phi + &self.psi * &x);
        }
        let mut k_y = DMatrix::zeros(2 * directions.len(), 2 * pts.len());
        for (i, d) in directions.iter().enumerate() {
            for (k, y) in pts.iter().enumerate() {
                set_block(&mut k_y, i, k, &farfield_kernel(&self.medium, y, d));
            }
        }
        far += k_y * x;
        Ok(far)
    }
}

/// Solution of the combined problem for one incident field.
pub struct MultiscaleField<'a> {
    solver: &'a MultiscaleSolver,
    incident: &'a dyn VectorField<2>,
    /// Single-layer density `φ + Σ ψ_k X_k` of everything scattered by `D`.
    density: LayerDensity,
    amplitudes: Vec<CVector<2>>,
}

impl MultiscaleField<'_> {
    /// Source strengths `X = Λ^{α,D} u_D(Y)`.
    pub fn amplitudes(&self) -> &[CVector<2>] {
        &self.amplitudes
    }

    fn point_part(&self, x: &Point<2>) -> Result<CVector<2>> {
        let mut u = CVector::<2>::zeros();
        for (y, a) in self.solver.cloud.points().iter().zip(&self.amplitudes) {
            let diff = x - y;
            if diff.norm() == 0.0 {
                return Err(Error::Singularity("field evaluated at a scatterer".into()));
            }
            u += dynamic_kernel(&self.solver.medium, &diff) * a;
        }
        Ok(u)
    }

    /// Scattered field `u − u_in` at `x` outside `D ∪ Y`.
    pub fn scattered(&self, x: &Point<2>) -> Result<CVector<2>> {
        let mut u = self.point_part(x)?;
        if let Some(r) = &self.solver.rigid {
            if r.curve().contains(x) {
                return Err(Error::Domain(format!("{:?} lies inside the obstacle", x.as_slice())));
            }
            u += r.field(&self.density, x)?;
        }
        Ok(u)
    }

    /// Total field `u` at `x` outside `D ∪ Y`.
    pub fn eval(&self, x: &Point<2>) -> Result<CVector<2>> {
        Ok(self.incident.eval(x) + self.scattered(x)?)
    }

    /// Total field on `∂D` at parameter `t` (zero for an exact solution).
    pub fn boundary_value(&self, t: f64) -> Result<CVector<2>> {
        let r = self
            .solver
            .rigid
            .as_ref()
            .ok_or_else(|| Error::Config("scene has no obstacle".into()))?;
        let x = r.curve().point(t);
        Ok(self.incident.eval(&x) + r.boundary_field(&self.density, t) + self.point_part(&x)?)
    }

    /// Far-field pattern of the scattered field.
    pub fn farfield(&self, xhat: &Point<2>) -> CVector<2> {
        let mut f = CVector::<2>::zeros();
        for (y, a) in self.solver.cloud.points().iter().zip(&self.amplitudes) {
            f += farfield_kernel(&self.solver.medium, y, xhat) * a;
        }
        if let Some(r) = &self.solver.rigid {
            f += r.farfield_density(&self.density, xhat);
        }
        f
    }
}

impl std::fmt::Debug for MultiscaleField<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MultiscaleField")
            .field("amplitudes", &self.amplitudes)
            .finish_non_exhaustive()
    }
}
