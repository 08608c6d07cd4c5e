//! Elastic background medium and the free-space Green's tensors of the
//! Navier operator `Δ* + ω² = μΔ + (λ+μ)∇div + ω²`.
//!
//! The outgoing (Kupradze) tensor is
//!
//! ```text
//! Γ(x) = (1/μ) Φ_{k_s}(x) I + (1/ω²) ∇∇ᵀ (Φ_{k_s} − Φ_{k_p})(x)
//! ```
//!
//! with `Φ_k = (i/4) H₀⁽¹⁾(k|x|)` in 2D and `e^{ik|x|}/(4π|x|)` in 3D. Every
//! tensor here is radial, `Γ(x) = a(r) I + b(r) x̂x̂ᵀ`, so all kernels are
//! represented by the pair of radial coefficients `(a, b)`.
//!
//! Far-field convention: the far field of `x ↦ Γ(x, y) a` is exactly
//! `e^{−ik_s x̂·y}(I − x̂x̂ᵀ)a + e^{−ik_p x̂·y}(x̂·a)x̂`, i.e. the asymptotic
//! prefactors returned by [`farfield_prefactors`] are absorbed into the
//! pattern. All far fields in this crate use that single convention.

use nalgebra::{SMatrix, SVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::special::{bessel01, EULER_GAMMA};
use crate::{Error, Result};

pub type Point<const D: usize> = SVector<f64, D>;
pub type CVector<const D: usize> = SVector<Complex64, D>;
pub type CTensor<const D: usize> = SMatrix<Complex64, D, D>;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Homogeneous isotropic background (unit mass density).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElasticMedium {
    pub lambda: f64,
    pub mu: f64,
    pub omega: f64,
}

impl ElasticMedium {
    pub fn new(lambda: f64, mu: f64, omega: f64) -> Result<Self> {
        let medium = Self { lambda, mu, omega };
        medium.validate()?;
        Ok(medium)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0) {
            return Err(Error::Domain(format!(
                "shear modulus must be positive, got {}",
                self.mu
            )));
        }
        if !(self.lambda + 2.0 * self.mu > 0.0) {
            return Err(Error::Domain("λ + 2μ must be positive".into()));
        }
        if !(self.omega > 0.0) || !self.omega.is_finite() {
            return Err(Error::Domain(format!("frequency must be positive, got {}", self.omega)));
        }
        Ok(())
    }

    /// Strong ellipticity `dim·λ + 2μ > 0` for the given dimension.
    pub fn check_dimension(&self, dim: usize) -> Result<()> {
        if dim != 2 && dim != 3 {
            return Err(Error::Domain(format!("dimension must be 2 or 3, got {dim}")));
        }
        if !(dim as f64 * self.lambda + 2.0 * self.mu > 0.0) {
            return Err(Error::Domain(format!("{dim}λ + 2μ must be positive")));
        }
        Ok(())
    }

    /// Compressional wavenumber `ω / sqrt(λ + 2μ)`.
    pub fn k_p(&self) -> f64 {
        self.omega / (self.lambda + 2.0 * self.mu).sqrt()
    }

    /// Shear wavenumber `ω / sqrt(μ)`.
    pub fn k_s(&self) -> f64 {
        self.omega / self.mu.sqrt()
    }

    pub fn wavelength_p(&self) -> f64 {
        2.0 * PI / self.k_p()
    }

    pub fn wavelength_s(&self) -> f64 {
        2.0 * PI / self.k_s()
    }

    fn static_coefficients(&self) -> (f64, f64) {
        let den = self.mu * (self.lambda + 2.0 * self.mu);
        ((self.lambda + 3.0 * self.mu) / den, (self.lambda + self.mu) / den)
    }
}

/// Which kernel a [`GreenTensor`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Dynamic,
    Static,
    StaticInverse,
}

/// A Green's tensor evaluated for a source/target pair.
#[derive(Debug, Clone, PartialEq)]
pub struct GreenTensor<const D: usize> {
    pub value: CTensor<D>,
    pub source: Point<D>,
    pub target: Point<D>,
    pub kind: KernelKind,
}

/// Renormalisation constant `χ` with `Γ(x) − Γ₀(x) → χ I` as `x → 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenormConstant {
    pub chi: Complex64,
}

/// `a I + b x̂x̂ᵀ`.
pub fn radial_tensor<const D: usize>(a: Complex64, b: Complex64, xhat: &Point<D>) -> CTensor<D> {
    CTensor::<D>::from_fn(|i, j| {
        let d = if i == j { a } else { Complex64::new(0.0, 0.0) };
        d + b * (xhat[i] * xhat[j])
    })
}

fn separation<const D: usize>(x: &Point<D>, y: &Point<D>) -> Result<(f64, Point<D>)> {
    let diff = x - y;
    let r = diff.norm();
    if !(r > 0.0) {
        return Err(Error::Singularity(format!(
            "kernel evaluated at coincident points {:?}",
            x.as_slice()
        )));
    }
    Ok((r, diff / r))
}

/// Scalar Helmholtz fundamental solution `Φ_k(x − y)`.
pub fn phi<const D: usize>(k: f64, x: &Point<D>, y: &Point<D>) -> Result<Complex64> {
    let (r, _) = separation(x, y)?;
    match D {
        2 => Ok(0.25 * I * bessel01(k * r).h0()),
        3 => Ok(Complex64::from_polar(1.0, k * r) / (4.0 * PI * r)),
        _ => Err(Error::Domain(format!("unsupported dimension {D}"))),
    }
}

/// Radial coefficients `(a, b)` of the outgoing tensor `Γ_{ω²}` at distance `r > 0`.
pub fn dynamic_coefficients<const D: usize>(medium: &ElasticMedium, r: f64) -> (Complex64, Complex64) {
    let (kp, ks) = (medium.k_p(), medium.k_s());
    let w2 = medium.omega * medium.omega;
    if D == 2 {
        let bs = bessel01(ks * r);
        let bp = bessel01(kp * r);
        let (h0s, h1s) = (bs.h0(), bs.h1());
        let (h0p, h1p) = (bp.h0(), bp.h1());
        let cross = (ks * h1s - kp * h1p) / r;
        let a = 0.25 * I * (h0s / medium.mu - cross / w2);
        let b = 0.25 * I * (-ks * ks * h0s + kp * kp * h0p + 2.0 * cross) / w2;
        (a, b)
    } else {
        let fs = Complex64::from_polar(1.0, ks * r) / (4.0 * PI * r);
        let (g1, g2) = if ks * r < 1.0 {
            difference_series(kp, ks, r)
        } else {
            let fp = Complex64::from_polar(1.0, kp * r) / (4.0 * PI * r);
            let dr = |k: f64, f: Complex64| (I * k - 1.0 / r) * f / r;
            let dd = |k: f64, f: Complex64| (-k * k - 3.0 * I * k / r + 3.0 / (r * r)) * f;
            (dr(ks, fs) - dr(kp, fp), dd(ks, fs) - dd(kp, fp))
        };
        (fs / medium.mu + g1 / w2, g2 / w2)
    }
}

/// For `g = (e^{ik_s r} − e^{ik_p r})/(4πr)`, returns `(g'/r, g'' − g'/r)` from the
/// power series, avoiding the cancellation of the closed form at small `r`.
fn difference_series(kp: f64, ks: f64, r: f64) -> (Complex64, Complex64) {
    let mut g1 = Complex64::new(0.0, 0.0);
    let mut g2 = Complex64::new(0.0, 0.0);
    // c_m = i^m (k_s^m − k_p^m) / (4π m!)
    let mut ks_pow = ks;
    let mut kp_pow = kp;
    let mut fact = 1.0;
    let mut ipow = I;
    let mut rpow = 1.0 / r; // r^{m-3} starting at m = 2
    for m in 1..40 {
        if m >= 2 {
            let c = ipow * (ks_pow - kp_pow) / (4.0 * PI * fact);
            let mf = m as f64;
            let t1 = c * (mf - 1.0) * rpow;
            g1 += t1;
            g2 += t1 * (mf - 3.0);
            rpow *= r;
            if t1.norm() < 1e-18 * g1.norm() && m > 4 {
                break;
            }
        }
        let next = (m + 1) as f64;
        ks_pow *= ks;
        kp_pow *= kp;
        fact *= next;
        ipow *= I;
    }
    (g1, g2)
}

/// `Γ_{ω²}(x − y)` as a bare matrix. Requires `diff ≠ 0`.
pub fn dynamic_kernel<const D: usize>(medium: &ElasticMedium, diff: &Point<D>) -> CTensor<D> {
    let r = diff.norm();
    let (a, b) = dynamic_coefficients::<D>(medium, r);
    radial_tensor(a, b, &(diff / r))
}

/// Outgoing Kupradze tensor `Γ_{ω²}(x, y)`.
pub fn gamma_dynamic<const D: usize>(medium: &ElasticMedium, x: &Point<D>, y: &Point<D>) -> Result<GreenTensor<D>> {
    check_dim::<D>()?;
    let (r, xhat) = separation(x, y)?;
    let (a, b) = dynamic_coefficients::<D>(medium, r);
    Ok(GreenTensor {
        value: radial_tensor(a, b, &xhat),
        source: *y,
        target: *x,
        kind: KernelKind::Dynamic,
    })
}

fn check_dim<const D: usize>() -> Result<()> {
    if D == 2 || D == 3 {
        Ok(())
    } else {
        Err(Error::Domain(format!("unsupported dimension {D}")))
    }
}

/// Radial coefficients of the static tensor `Γ₀`.
pub fn static_coefficients<const D: usize>(medium: &ElasticMedium, r: f64) -> (f64, f64) {
    let (a, b) = medium.static_coefficients();
    if D == 2 {
        (-a * r.ln() / (4.0 * PI), b / (4.0 * PI))
    } else {
        (a / (8.0 * PI * r), b / (8.0 * PI * r))
    }
}

/// Static (zero-frequency) tensor `Γ₀(x − y)`.
pub fn gamma_static<const D: usize>(medium: &ElasticMedium, x: &Point<D>, y: &Point<D>) -> Result<GreenTensor<D>> {
    check_dim::<D>()?;
    let (r, xhat) = separation(x, y)?;
    let (a, b) = static_coefficients::<D>(medium, r);
    Ok(GreenTensor {
        value: radial_tensor(a.into(), b.into(), &xhat),
        source: *y,
        target: *x,
        kind: KernelKind::Static,
    })
}

/// Inverse static tensor `Γ₀⁻¹(x − y) = (1/a)(I − b/(a+b) x̂x̂ᵀ)`.
///
/// In 2D the static tensor is singular where `a = 0` (`|x−y| = 1`) and where
/// `a + b = 0` (`|x−y| = e^{(λ+μ)/(λ+3μ)}`); both raise `SingularMatrix`.
pub fn gamma_static_inverse<const D: usize>(
    medium: &ElasticMedium,
    x: &Point<D>,
    y: &Point<D>,
) -> Result<GreenTensor<D>> {
    check_dim::<D>()?;
    let (r, xhat) = separation(x, y)?;
    let (a, b) = static_coefficients::<D>(medium, r);
    let scale = a.abs() + b.abs();
    if a.abs() <= 1e-10 * scale || (a + b).abs() <= 1e-10 * scale {
        return Err(Error::SingularMatrix(format!(
            "static tensor is degenerate at |x - y| = {r}"
        )));
    }
    let ia = 1.0 / a;
    let ib = -b / (a * (a + b));
    Ok(GreenTensor {
        value: radial_tensor(ia.into(), ib.into(), &xhat),
        source: *y,
        target: *x,
        kind: KernelKind::StaticInverse,
    })
}

/// Renormalisation constant `χ_{ω²}` (branch `√z = ω`).
pub fn chi<const D: usize>(medium: &ElasticMedium) -> Result<RenormConstant> {
    check_dim::<D>()?;
    if !(medium.omega > 0.0) {
        return Err(Error::Domain("χ requires ω > 0".into()));
    }
    let (lam, mu) = (medium.lambda, medium.mu);
    let l2m = lam + 2.0 * mu;
    let chi = if D == 2 {
        let (a, b) = medium.static_coefficients();
        let log_term = Complex64::new((0.5 * medium.omega).ln() + EULER_GAMMA, -0.5 * PI);
        -(a * log_term + 0.5 * b - 0.5 * (mu.ln() / mu + l2m.ln() / l2m)) / (4.0 * PI)
    } else {
        I * (2.0 * medium.k_s() / mu + medium.k_p() / l2m) / (12.0 * PI)
    };
    Ok(RenormConstant { chi })
}

/// Orthogonal direction in 2D, `d⊥ = (−d₂, d₁)`.
pub fn perp(d: &Point<2>) -> Point<2> {
    Point::<2>::new(-d[1], d[0])
}

/// Matrix `K` with `Γ^∞_{a,y}(x̂) = K a`:
/// `K = e^{−ik_s x̂·y}(I − x̂x̂ᵀ) + e^{−ik_p x̂·y} x̂x̂ᵀ`.
pub fn farfield_kernel<const D: usize>(medium: &ElasticMedium, y: &Point<D>, xhat: &Point<D>) -> CTensor<D> {
    let t = xhat.dot(y);
    let es = Complex64::from_polar(1.0, -medium.k_s() * t);
    let ep = Complex64::from_polar(1.0, -medium.k_p() * t);
    radial_tensor(es, ep - es, xhat)
}

/// Far-field pattern of `x ↦ Γ(x, y) a` in direction `x̂`.
pub fn gamma_farfield<const D: usize>(
    medium: &ElasticMedium,
    a: &CVector<D>,
    y: &Point<D>,
    xhat: &Point<D>,
) -> Result<CVector<D>> {
    check_dim::<D>()?;
    if (xhat.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!(
            "direction must be a unit vector, |x̂| = {}",
            xhat.norm()
        )));
    }
    Ok(farfield_kernel(medium, y, xhat) * a)
}

/// Prefactors `(c_p, c_s)` with
/// `u(x) = c_p e^{ik_p r} r^{-(n-1)/2} u_p^∞(x̂) + c_s e^{ik_s r} r^{-(n-1)/2} u_s^∞(x̂) + …`.
pub fn farfield_prefactors<const D: usize>(medium: &ElasticMedium) -> (Complex64, Complex64) {
    let l2m = medium.lambda + 2.0 * medium.mu;
    if D == 2 {
        let e = Complex64::from_polar(1.0, 0.25 * PI);
        (
            e / (l2m * (8.0 * PI * medium.k_p()).sqrt()),
            e / (medium.mu * (8.0 * PI * medium.k_s()).sqrt()),
        )
    } else {
        ((1.0 / (4.0 * PI * l2m)).into(), (1.0 / (4.0 * PI * medium.mu)).into())
    }
}

/// Leading-order field `c_p e^{ik_p r}/r^{(n-1)/2} Π_p u^∞ + c_s e^{ik_s r}/r^{(n-1)/2} Π_s u^∞`
/// reconstructed from a far-field pattern at `x = r x̂`.
pub fn asymptotic_field<const D: usize>(
    medium: &ElasticMedium,
    pattern: &CVector<D>,
    r: f64,
    xhat: &Point<D>,
) -> CVector<D> {
    let (cp, cs) = farfield_prefactors::<D>(medium);
    let decay = r.powf(-0.5 * (D as f64 - 1.0));
    let along = xhat.map(Complex64::from) * xhat.map(Complex64::from).dot(pattern);
    let across = pattern - along;
    along * (cp * Complex64::from_polar(decay, medium.k_p() * r))
        + across * (cs * Complex64::from_polar(decay, medium.k_s() * r))
}

/// A vector field `ℝ^D → ℂ^D`.
pub trait VectorField<const D: usize>: Sync {
    fn eval(&self, x: &Point<D>) -> CVector<D>;
}

impl<F, const D: usize> VectorField<D> for F
where
    F: Fn(&Point<D>) -> CVector<D> + Sync,
{
    fn eval(&self, x: &Point<D>) -> CVector<D> {
        self(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WaveKind {
    P,
    S,
}

/// Plane wave `pol · e^{ik x·d}` with `k = k_p` (pol = d) or `k = k_s` (pol ⟂ d).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWave<const D: usize> {
    pub kind: WaveKind,
    pub direction: Point<D>,
    pub polarization: Point<D>,
    pub wavenumber: f64,
    pub amplitude: Complex64,
}

impl<const D: usize> PlaneWave<D> {
    /// Compressional wave `d e^{ik_p x·d}`.
    pub fn compressional(medium: &ElasticMedium, d: Point<D>) -> Self {
        Self {
            kind: WaveKind::P,
            direction: d,
            polarization: d,
            wavenumber: medium.k_p(),
            amplitude: Complex64::new(1.0, 0.0),
        }
    }

    /// Shear wave `pol e^{ik_s x·d}`, `pol` must be orthogonal to `d`.
    pub fn shear_polarized(medium: &ElasticMedium, d: Point<D>, pol: Point<D>) -> Result<Self> {
        if d.dot(&pol).abs() > 1e-12 {
            return Err(Error::Domain(
                "shear polarization must be orthogonal to the direction".into(),
            ));
        }
        Ok(Self {
            kind: WaveKind::S,
            direction: d,
            polarization: pol,
            wavenumber: medium.k_s(),
            amplitude: Complex64::new(1.0, 0.0),
        })
    }

    pub fn scaled(mut self, amplitude: Complex64) -> Self {
        self.amplitude *= amplitude;
        self
    }
}

impl PlaneWave<2> {
    /// Shear wave `d⊥ e^{ik_s x·d}` in 2D.
    pub fn shear(medium: &ElasticMedium, d: Point<2>) -> Self {
        Self {
            kind: WaveKind::S,
            direction: d,
            polarization: perp(&d),
            wavenumber: medium.k_s(),
            amplitude: Complex64::new(1.0, 0.0),
        }
    }

    pub fn new(medium: &ElasticMedium, kind: WaveKind, d: Point<2>) -> Self {
        match kind {
            WaveKind::P => Self::compressional(medium, d),
            WaveKind::S => Self::shear(medium, d),
        }
    }
}

impl<const D: usize> VectorField<D> for PlaneWave<D> {
    fn eval(&self, x: &Point<D>) -> CVector<D> {
        let phase = Complex64::from_polar(1.0, self.wavenumber * x.dot(&self.direction)) * self.amplitude;
        self.polarization.map(|c| phase * c)
    }
}

/// Plane wave of the given kind evaluated at `x` (2D).
pub fn plane_wave(medium: &ElasticMedium, kind: WaveKind, d: &Point<2>, x: &Point<2>) -> Result<CVector<2>> {
    if (d.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::Domain("plane-wave direction must be a unit vector".into()));
    }
    Ok(PlaneWave::new(medium, kind, *d).eval(x))
}

/// `(Δ* + ω²)u` at `x` by second-order central differences with step `h`.
pub fn navier_residual_fd<const D: usize, F: VectorField<D> + ?Sized>(
    medium: &ElasticMedium,
    field: &F,
    x: &Point<D>,
    h: f64,
) -> CVector<D> {
    let c = Complex64::from;
    let u0 = field.eval(x);
    let e = |i: usize| {
        let mut v = Point::<D>::zeros();
        v[i] = h;
        v
    };
    let mut lap = CVector::<D>::zeros();
    let mut grad_div = CVector::<D>::zeros();
    for i in 0..D {
        let up = field.eval(&(x + e(i)));
        let um = field.eval(&(x - e(i)));
        lap += (up + um - u0 * c(2.0)) * c(1.0 / (h * h));
        for j in 0..D {
            // ∂_i ∂_j u_j
            let d2 = if i == j {
                (up[j] + um[j] - u0[j] * 2.0) / (h * h)
            } else {
                let pp = field.eval(&(x + e(i) + e(j)))[j];
                let pm = field.eval(&(x + e(i) - e(j)))[j];
                let mp = field.eval(&(x - e(i) + e(j)))[j];
                let mm = field.eval(&(x - e(i) - e(j)))[j];
                (pp - pm - mp + mm) / (4.0 * h * h)
            };
            grad_div[i] += d2;
        }
    }
    lap * c(medium.mu) + grad_div * c(medium.lambda + medium.mu) + u0 * c(medium.omega * medium.omega)
}
