//! Point-interaction forward solver in free space.
//!
//! For scatterers `y_1, …, y_N` with impedance coefficients `α_k` the
//! inverse interaction matrix has blocks
//!
//! ```text
//! [Λ^α]⁻¹_{kk}  = (α_k − χ) I
//! [Λ^α]⁻¹_{kk'} = −Γ(y_k − y_k'),  k ≠ k'
//! ```
//!
//! and the scattered field is `u_sc(x) = Σ_k Γ(x, y_k) X_k` with source
//! amplitudes `X = Λ^α u_in(Y)`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::greens::{
    chi, dynamic_kernel, farfield_kernel, gamma_static, CTensor, CVector, ElasticMedium, Point, VectorField,
};
use crate::linalg::{CMatrix, CVec, Factorized};
use crate::{Error, Result};

/// Condition estimate above which `ω` is treated as a resonance of the point system.
pub const RESONANCE_CONDITION: f64 = 1e12;

/// Scatterer positions with their impedance coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud<const D: usize> {
    points: Vec<Point<D>>,
    alphas: Vec<Complex64>,
}

impl<const D: usize> PointCloud<D> {
    pub fn new(points: Vec<Point<D>>, alphas: Vec<Complex64>) -> Result<Self> {
        if points.len() != alphas.len() {
            return Err(Error::Config(format!(
                "{} points but {} impedance coefficients",
                points.len(),
                alphas.len()
            )));
        }
        for (k, (p, a)) in points.iter().zip(&alphas).enumerate() {
            if p.iter().any(|c| !c.is_finite()) || !a.re.is_finite() || !a.im.is_finite() {
                return Err(Error::Config(format!("point {k} has non-finite data")));
            }
            if a.im > 0.0 {
                return Err(Error::Config(format!("point {k}: Im α = {} must be ≤ 0", a.im)));
            }
            for (l, q) in points[..k].iter().enumerate() {
                if (p - q).norm() == 0.0 {
                    return Err(Error::Domain(format!("points {l} and {k} coincide")));
                }
            }
        }
        Ok(Self { points, alphas })
    }

    /// All points share the same coefficient.
    pub fn uniform(points: Vec<Point<D>>, alpha: Complex64) -> Result<Self> {
        let alphas = vec![alpha; points.len()];
        Self::new(points, alphas)
    }

    pub fn empty() -> Self {
        Self {
            points: Vec::new(),
            alphas: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point<D>] {
        &self.points
    }

    pub fn alphas(&self) -> &[Complex64] {
        &self.alphas
    }
}

/// Copies `D×D` blocks into a dense matrix.
pub(crate) fn set_block<const D: usize>(m: &mut CMatrix, k: usize, l: usize, block: &CTensor<D>) {
    m.view_mut((k * D, l * D), (D, D)).copy_from(block);
}

pub(crate) fn stack<const D: usize>(values: &[CVector<D>]) -> CVec {
    CVec::from_iterator(values.len() * D, values.iter().flat_map(|v| v.iter().copied()))
}

pub(crate) fn unstack<const D: usize>(v: &CVec) -> Vec<CVector<D>> {
    (0..v.len() / D)
        .map(|k| CVector::<D>::from_fn(|i, _| v[k * D + i]))
        .collect()
}

/// Assembled and factorized inverse interaction matrix `[Λ^α]⁻¹`.
#[derive(Debug, Clone)]
pub struct InteractionMatrix<const D: usize> {
    medium: ElasticMedium,
    cloud: PointCloud<D>,
    chi: Complex64,
    inverse: CMatrix,
    factor: Factorized,
}

/// Assembles `[Λ^α]⁻¹` and factorizes it. Fails with [`Error::Resonance`]
/// when the condition estimate exceeds [`RESONANCE_CONDITION`].
pub fn build_interaction<const D: usize>(
    medium: &ElasticMedium,
    cloud: &PointCloud<D>,
) -> Result<InteractionMatrix<D>> {
    medium.check_dimension(D)?;
    let chi = chi::<D>(medium)?.chi;
    let n = cloud.len();
    let mut inverse = DMatrix::zeros(n * D, n * D);
    for k in 0..n {
        set_block(
            &mut inverse,
            k,
            k,
            &(CTensor::<D>::identity() * (cloud.alphas[k] - chi)),
        );
        for l in 0..k {
            let g = -dynamic_kernel(medium, &(cloud.points[k] - cloud.points[l]));
            set_block(&mut inverse, k, l, &g);
            set_block(&mut inverse, l, k, &g.transpose());
        }
    }
    let factor = Factorized::new(&inverse)?;
    if factor.condition() > RESONANCE_CONDITION {
        return Err(Error::Resonance {
            omega: medium.omega,
            condition: factor.condition(),
        });
    }
    Ok(InteractionMatrix {
        medium: *medium,
        cloud: cloud.clone(),
        chi,
        inverse,
        factor,
    })
}

impl<const D: usize> InteractionMatrix<D> {
    pub fn medium(&self) -> &ElasticMedium {
        &self.medium
    }

    pub fn cloud(&self) -> &PointCloud<D> {
        &self.cloud
    }

    pub fn chi(&self) -> Complex64 {
        self.chi
    }

    /// `[Λ^α]⁻¹` as assembled.
    pub fn inverse_matrix(&self) -> &CMatrix {
        &self.inverse
    }

    /// Dense `Λ^α`.
    pub fn lambda(&self) -> Result<CMatrix> {
        let n = self.inverse.nrows();
        self.factor.solve(&CMatrix::identity(n, n))
    }

    pub fn condition(&self) -> f64 {
        self.factor.condition()
    }

    /// `X = Λ^α v` for values `v_k` given at the scatterers.
    pub fn amplitudes(&self, values: &[CVector<D>]) -> Result<Vec<CVector<D>>> {
        if values.len() != self.cloud.len() {
            return Err(Error::Config("one value per scatterer expected".into()));
        }
        Ok(unstack(&self.factor.solve_vec(&stack(values))?))
    }

    /// Batched `Λ^α V` for a `(N·D) × m` right-hand side.
    pub fn apply_lambda(&self, rhs: &CMatrix) -> Result<CMatrix> {
        self.factor.solve(rhs)
    }
}

/// Scattered field radiated by point sources `X_k` at `y_k`.
#[derive(Debug, Clone)]
pub struct PointField<const D: usize> {
    medium: ElasticMedium,
    points: Vec<Point<D>>,
    amplitudes: Vec<CVector<D>>,
}

impl<const D: usize> PointField<D> {
    pub fn amplitudes(&self) -> &[CVector<D>] {
        &self.amplitudes
    }

    /// `u_sc(x) = Σ Γ(x, y_k) X_k`; `x` must not be a scatterer.
    pub fn scattered(&self, x: &Point<D>) -> Result<CVector<D>> {
        let mut u = CVector::<D>::zeros();
        for (y, a) in self.points.iter().zip(&self.amplitudes) {
            let diff = x - y;
            if diff.norm() == 0.0 {
                return Err(Error::Singularity("field evaluated at a scatterer".into()));
            }
            u += dynamic_kernel(&self.medium, &diff) * a;
        }
        Ok(u)
    }

    /// `u_in(x) + u_sc(x)`.
    pub fn total<F: VectorField<D> + ?Sized>(&self, incident: &F, x: &Point<D>) -> Result<CVector<D>> {
        Ok(incident.eval(x) + self.scattered(x)?)
    }

    /// Far-field pattern `Σ Γ^∞_{X_k, y_k}(x̂)`.
    pub fn farfield(&self, xhat: &Point<D>) -> CVector<D> {
        self.points
            .iter()
            .zip(&self.amplitudes)
            .fold(CVector::<D>::zeros(), |acc, (y, a)| {
                acc + farfield_kernel(&self.medium, y, xhat) * a
            })
    }
}

/// Solves the point-scattering problem for one incident field.
pub fn scatter_points<const D: usize, F: VectorField<D> + ?Sized>(
    system: &InteractionMatrix<D>,
    incident: &F,
) -> Result<PointField<D>> {
    let values: Vec<_> = system.cloud.points.iter().map(|y| incident.eval(y)).collect();
    Ok(PointField {
        medium: system.medium,
        points: system.cloud.points.clone(),
        amplitudes: system.amplitudes(&values)?,
    })
}

/// Far-field pattern of the scattered field at each direction.
pub fn farfield_points<const D: usize, F: VectorField<D> + ?Sized>(
    system: &InteractionMatrix<D>,
    incident: &F,
    directions: &[Point<D>],
) -> Result<Vec<CVector<D>>> {
    let field = scatter_points(system, incident)?;
    Ok(directions.iter().map(|d| field.farfield(d)).collect())
}

/// Boundary values `τ₁u`, `τ₂u` at one scatterer and the impedance residual `τ₂u − α τ₁u`.
#[derive(Debug, Clone, PartialEq)]
pub struct TauResidual<const D: usize> {
    pub point: Point<D>,
    pub tau1: CVector<D>,
    pub tau2: CVector<D>,
    pub residual: CVector<D>,
}

impl<const D: usize> TauResidual<D> {
    /// `‖τ₂ − ατ₁‖ / ‖τ₂‖`.
    pub fn relative(&self) -> f64 {
        self.residual.norm() / self.tau2.norm().max(f64::MIN_POSITIVE)
    }
}

/// Radii and convergence tolerance for the numerical `τ` limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauOptions {
    pub radii: [f64; 3],
    pub tolerance: f64,
}

impl Default for TauOptions {
    fn default() -> Self {
        Self {
            radii: [1e-2, 1e-3, 1e-4],
            tolerance: 1e-3,
        }
    }
}

fn sample_directions<const D: usize>() -> Vec<Point<D>> {
    let mut dirs = Vec::new();
    if D == 2 {
        for m in 0..8 {
            let t = std::f64::consts::PI * m as f64 / 4.0;
            let mut p = Point::<D>::zeros();
            p[0] = t.cos();
            p[1] = t.sin();
            dirs.push(p);
        }
    } else {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for i in 0..D {
            for sign in [1.0, -1.0] {
                let mut p = Point::<D>::zeros();
                p[i] = sign;
                dirs.push(p);
            }
            for j in i + 1..D {
                for (si, sj) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                    let mut p = Point::<D>::zeros();
                    p[i] = si * s;
                    p[j] = sj * s;
                    dirs.push(p);
                }
            }
        }
    }
    dirs
}

/// Least-squares fit `u(y + rθ) ≈ Γ₀(rθ)τ₁ + τ₂` over antipodally symmetric `θ`.
fn fit_tau<const D: usize, F>(
    medium: &ElasticMedium,
    y: &Point<D>,
    r: f64,
    field: &F,
) -> Result<(CVector<D>, CVector<D>)>
where
    F: Fn(&Point<D>) -> Result<CVector<D>>,
{
    let dirs = sample_directions::<D>();
    let mut a = CMatrix::zeros(dirs.len() * D, 2 * D);
    let mut b = CVec::zeros(dirs.len() * D);
    for (m, theta) in dirs.iter().enumerate() {
        let offset = theta * r;
        let g0 = gamma_static(medium, &offset, &Point::<D>::zeros())?.value;
        let u = field(&(y + offset))?;
        for i in 0..D {
            for j in 0..D {
                a[(m * D + i, j)] = g0[(i, j)];
            }
            a[(m * D + i, D + i)] = Complex64::new(1.0, 0.0);
            b[m * D + i] = u[i];
        }
    }
    let x = a
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::Numerical(format!("τ fit failed: {e}")))?;
    Ok((
        CVector::<D>::from_fn(|i, _| x[i]),
        CVector::<D>::from_fn(|i, _| x[D + i]),
    ))
}

/// Extracts `(τ₁u, τ₂u)` at `y` from samples of `u` near (not at) `y`,
/// with two levels of Richardson extrapolation (in `r²` for 2D, where the
/// remainder is `O(r² ln r)`, and in `r` for 3D).
pub fn extract_tau<const D: usize, F>(
    medium: &ElasticMedium,
    y: &Point<D>,
    field: &F,
    options: &TauOptions,
) -> Result<(CVector<D>, CVector<D>)>
where
    F: Fn(&Point<D>) -> Result<CVector<D>>,
{
    let fits = options
        .radii
        .iter()
        .map(|&r| fit_tau(medium, y, r, field))
        .collect::<Result<Vec<_>>>()?;
    let extrapolate = |f: &(CVector<D>, CVector<D>), c: &(CVector<D>, CVector<D>), rf: f64, rc: f64| {
        let q = Complex64::from((rc / rf).powi(if D == 2 { 2 } else { 1 }));
        let den = q - 1.0;
        ((f.0 * q - c.0) / den, (f.1 * q - c.1) / den)
    };
    let [r0, r1, r2] = options.radii;
    let e01 = extrapolate(&fits[1], &fits[0], r1, r0);
    let e12 = extrapolate(&fits[2], &fits[1], r2, r1);
    let scale = e12.0.norm() + e12.1.norm();
    let change = (e12.0 - e01.0).norm() + (e12.1 - e01.1).norm();
    if !(change <= options.tolerance * scale.max(f64::MIN_POSITIVE)) {
        let seq: Vec<String> = options
            .radii
            .iter()
            .zip(&fits)
            .map(|(r, (t1, t2))| format!("r={r:e}: |τ₁|={:.6e}, |τ₂|={:.6e}", t1.norm(), t2.norm()))
            .collect();
        return Err(Error::Numerical(format!(
            "τ extrapolation did not converge at {:?} (change {change:e}); {}",
            y.as_slice(),
            seq.join("; ")
        )));
    }
    Ok(e12)
}

/// Impedance residuals `τ₂u − α_k τ₁u` of a total field at every scatterer.
pub fn tau_residual<const D: usize, F>(
    medium: &ElasticMedium,
    cloud: &PointCloud<D>,
    total_field: &F,
    options: &TauOptions,
) -> Result<Vec<TauResidual<D>>>
where
    F: Fn(&Point<D>) -> Result<CVector<D>>,
{
    cloud
        .points
        .iter()
        .zip(&cloud.alphas)
        .map(|(y, alpha)| {
            let (tau1, tau2) = extract_tau(medium, y, total_field, options)?;
            Ok(TauResidual {
                point: *y,
                tau1,
                tau2,
                residual: tau2 - tau1 * *alpha,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::greens::PlaneWave;

    fn medium() -> ElasticMedium {
        ElasticMedium::new(2.0, 1.0, 8.0).unwrap()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn single_point_matrix() {
        let m = medium();
        let cloud = PointCloud::uniform(vec![Point::<2>::new(0.5, -0.2)], c(0.1)).unwrap();
        let sys = build_interaction(&m, &cloud).unwrap();
        let chi = chi::<2>(&m).unwrap().chi;
        let lam = sys.lambda().unwrap();
        let expect = 1.0 / (c(0.1) - chi);
        assert!((lam[(0, 0)] - expect).norm() < 1e-14);
        assert!((lam[(1, 1)] - expect).norm() < 1e-14);
        assert!(lam[(0, 1)].norm() < 1e-14);
    }

    #[test]
    fn three_point_inverse_product() {
        let m = medium();
        let pts = vec![
            Point::<2>::new(0.0, 0.0),
            Point::<2>::new(0.8, 0.1),
            Point::<2>::new(-0.3, 1.1),
        ];
        let sys = build_interaction(&m, &PointCloud::uniform(pts, c(0.1)).unwrap()).unwrap();
        let prod = sys.lambda().unwrap() * sys.inverse_matrix();
        let err = (prod - CMatrix::identity(6, 6))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-10);
    }

    #[test]
    fn cloud_validation() {
        let p = Point::<2>::new(1.0, 1.0);
        assert!(PointCloud::uniform(vec![p, p], c(0.1)).is_err());
        assert!(PointCloud::new(vec![p], vec![Complex64::new(0.1, 0.5)]).is_err());
        assert!(PointCloud::new(vec![p], vec![]).is_err());
        assert!(PointCloud::new(vec![p], vec![Complex64::new(0.1, -0.5)]).is_ok());
    }

    #[test]
    fn empty_cloud_scatters_nothing() {
        let m = medium();
        let sys = build_interaction::<2>(&m, &PointCloud::empty()).unwrap();
        let w = PlaneWave::compressional(&m, Point::<2>::new(1.0, 0.0));
        let f = scatter_points(&sys, &w).unwrap();
        assert_eq!(f.scattered(&Point::<2>::new(0.3, 0.2)).unwrap(), CVector::<2>::zeros());
    }

    #[test]
    fn large_alpha_suppresses_scattering() {
        let m = medium();
        let pts = vec![Point::<2>::new(0.0, 0.0), Point::<2>::new(0.8, 0.1)];
        let w = PlaneWave::compressional(&m, Point::<2>::new(0.6, 0.8));
        let x = Point::<2>::new(2.0, -1.0);
        let mut prev = f64::INFINITY;
        for alpha in [1e4, 1e8, 1e12] {
            let sys = build_interaction(&m, &PointCloud::uniform(pts.clone(), c(alpha)).unwrap()).unwrap();
            let u = scatter_points(&sys, &w).unwrap().scattered(&x).unwrap().norm();
            assert!(u * alpha < 10.0 && u * alpha > 1e-3, "α={alpha}: |u|={u}");
            assert!(u < prev);
            prev = u;
        }
    }

    #[test]
    fn relabeling_invariance() {
        let m = medium();
        let pts = vec![
            Point::<2>::new(0.0, 0.0),
            Point::<2>::new(0.8, 0.1),
            Point::<2>::new(-0.5, 0.4),
        ];
        let alphas = vec![c(0.1), c(0.3), Complex64::new(0.2, -0.1)];
        let a = PointCloud::new(pts.clone(), alphas.clone()).unwrap();
        let b = PointCloud::new(vec![pts[2], pts[0], pts[1]], vec![alphas[2], alphas[0], alphas[1]]).unwrap();
        let w = PlaneWave::shear(&m, Point::<2>::new(0.0, 1.0));
        let x = Point::<2>::new(1.5, 1.5);
        let ua = scatter_points(&build_interaction(&m, &a).unwrap(), &w)
            .unwrap()
            .scattered(&x)
            .unwrap();
        let ub = scatter_points(&build_interaction(&m, &b).unwrap(), &w)
            .unwrap()
            .scattered(&x)
            .unwrap();
        assert!((ua - ub).norm() < 1e-12 * ua.norm());
    }

    #[test]
    fn farfield_is_split_into_p_and_s() {
        let m = medium();
        let cloud = PointCloud::uniform(vec![Point::<2>::zeros()], c(0.1)).unwrap();
        let sys = build_interaction(&m, &cloud).unwrap();
        let w = PlaneWave::compressional(&m, Point::<2>::new(1.0, 0.0));
        let f = scatter_points(&sys, &w).unwrap();
        let v = f.amplitudes()[0];
        for k in 0..16 {
            let t = 0.4 * k as f64;
            let xh = Point::<2>::new(t.cos(), t.sin());
            let xc = xh.map(Complex64::from);
            // y = 0 so the pattern is exactly the amplitude
            assert!((f.farfield(&xh) - v).norm() < 1e-14);
            let p_part = xc * xc.dot(&v);
            assert!((p_part - xc * xc.dot(&f.farfield(&xh))).norm() < 1e-14);
        }
    }

    #[test]
    fn tau_of_incident_alone() {
        let m = medium();
        let w = PlaneWave::compressional(&m, Point::<2>::new(0.6, 0.8));
        let y = Point::<2>::new(0.3, -0.4);
        let (t1, t2) = extract_tau(&m, &y, &|x: &Point<2>| Ok(w.eval(x)), &TauOptions::default()).unwrap();
        assert!(t1.norm() < 1e-6);
        assert!((t2 - w.eval(&y)).norm() < 1e-6);
    }

    #[test]
    fn tau_of_green_column() {
        let m = medium();
        for a in [
            CVector::<2>::new(c(1.0), c(0.0)),
            CVector::<2>::new(Complex64::new(0.3, 0.2), c(-0.7)),
        ] {
            let y = Point::<2>::new(0.1, 0.2);
            let f = |x: &Point<2>| Ok(dynamic_kernel(&m, &(x - y)) * a);
            let (t1, t2) = extract_tau(&m, &y, &f, &TauOptions::default()).unwrap();
            assert!((t1 - a).norm() < 1e-6 * a.norm());
            let chi = chi::<2>(&m).unwrap().chi;
            assert!((t2 - a * chi).norm() < 1e-4 * a.norm());
        }
    }

    #[test]
    fn tau_residual_of_solution() {
        let m = medium();
        let pts = vec![
            Point::<2>::new(0.0, 0.0),
            Point::<2>::new(0.8, 0.1),
            Point::<2>::new(-0.3, 1.1),
        ];
        let cloud = PointCloud::uniform(pts, c(0.1)).unwrap();
        let sys = build_interaction(&m, &cloud).unwrap();
        let w = PlaneWave::shear(&m, Point::<2>::new(0.0, 1.0));
        let f = scatter_points(&sys, &w).unwrap();
        let res = tau_residual(&m, &cloud, &|x: &Point<2>| f.total(&w, x), &TauOptions::default()).unwrap();
        for r in res {
            assert!(r.relative() < 1e-3, "{}", r.relative());
        }
    }

    #[test]
    fn tau_residual_3d() {
        let m = medium();
        let pts = vec![Point::<3>::new(0.0, 0.0, 0.0), Point::<3>::new(0.5, 0.2, -0.3)];
        let cloud = PointCloud::uniform(pts, c(0.2)).unwrap();
        let sys = build_interaction(&m, &cloud).unwrap();
        let w = PlaneWave::compressional(&m, Point::<3>::new(0.0, 0.6, 0.8));
        let f = scatter_points(&sys, &w).unwrap();
        let res = tau_residual(&m, &cloud, &|x: &Point<3>| f.total(&w, x), &TauOptions::default()).unwrap();
        for r in res {
            assert!(r.relative() < 1e-3, "{}", r.relative());
        }
    }

    #[test]
    fn scattered_at_scatterer_is_error() {
        let m = medium();
        let y = Point::<2>::new(0.2, 0.2);
        let sys = build_interaction(&m, &PointCloud::uniform(vec![y], c(0.1)).unwrap()).unwrap();
        let f = scatter_points(&sys, &PlaneWave::shear(&m, Point::<2>::new(1.0, 0.0))).unwrap();
        assert!(f.scattered(&y).is_err());
    }
}
