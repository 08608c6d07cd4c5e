//! Small dense complex linear-algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector, LU};
use num_complex::Complex64;

use crate::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

/// LU factorization together with a 1-norm condition estimate.
#[derive(Debug, Clone)]
pub struct Factorized {
    lu: LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>,
    condition: f64,
}

impl Factorized {
    /// Factorizes `a`. The condition number `‖A‖₁‖A⁻¹‖₁` is computed from the
    /// explicit inverse, which is affordable at the sizes used here.
    pub fn new(a: &CMatrix) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::Numerical(format!(
                "cannot factorize a {}x{} matrix",
                a.nrows(),
                a.ncols()
            )));
        }
        if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Numerical("matrix has non-finite entries".into()));
        }
        let lu = a.clone().lu();
        let n = a.nrows();
        let condition = if n == 0 {
            1.0
        } else {
            match lu.solve(&CMatrix::identity(n, n)) {
                Some(inv) if inv.iter().all(|z| z.re.is_finite() && z.im.is_finite()) => norm1(a) * norm1(&inv),
                _ => f64::INFINITY,
            }
        };
        Ok(Self { lu, condition })
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn dim(&self) -> usize {
        self.lu.l().nrows()
    }

    pub fn solve(&self, b: &CMatrix) -> Result<CMatrix> {
        if b.nrows() == 0 {
            return Ok(b.clone());
        }
        self.lu
            .solve(b)
            .ok_or_else(|| Error::SingularMatrix("LU factor has a zero pivot".into()))
    }

    pub fn solve_vec(&self, b: &CVec) -> Result<CVec> {
        if b.nrows() == 0 {
            return Ok(b.clone());
        }
        self.lu
            .solve(b)
            .ok_or_else(|| Error::SingularMatrix("LU factor has a zero pivot".into()))
    }
}

/// Maximum absolute column sum.
pub fn norm1(a: &CMatrix) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Frobenius norm.
pub fn frobenius(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
