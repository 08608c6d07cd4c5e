//! Scenes, oracles and the pinned recovery rules shared by the integration tests.
#![allow(dead_code)]

use std::collections::VecDeque;
use std::path::PathBuf;

use elastoscatter::bie::BoundaryCurve;
use elastoscatter::greens::{dynamic_kernel, CVector, ElasticMedium, Point};
use elastoscatter::imaging::{local_maxima, IndicatorGrid};
use elastoscatter::scenario::Scenario;
use elastoscatter::Complex64;

pub fn medium() -> ElasticMedium {
    ElasticMedium::new(2.0, 1.0, 8.0).unwrap()
}

pub fn scenario(name: &str) -> Scenario {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "scenarios", name]
        .iter()
        .collect();
    Scenario::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// Six points at `x = 2`, `y = −2 + 0.8k`.
pub fn example1_points() -> Vec<Point<2>> {
    (0..6).map(|k| Point::<2>::new(2.0, -2.0 + 0.8 * k as f64)).collect()
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

/// A point counts as recovered when a local maximum of `W` lies within one
/// grid cell (Chebyshev distance `h`) and is at least ten times the grid median.
pub fn recovered(grid: &IndicatorGrid, truth: &[Point<2>]) -> Vec<bool> {
    let floor = 10.0 * median(&grid.values);
    let h = grid.spec.h;
    let peaks = local_maxima(grid);
    truth
        .iter()
        .map(|t| {
            peaks
                .iter()
                .any(|p| p.value >= floor && (p.x - t[0]).abs() <= h + 1e-12 && (p.y - t[1]).abs() <= h + 1e-12)
        })
        .collect()
}

fn cell(grid: &IndicatorGrid, p: &Point<2>) -> (usize, usize) {
    let s = &grid.spec;
    let i = (((p[0] - s.x_min) / s.h).round().max(0.0) as usize).min(s.nx() - 1);
    let j = (((p[1] - s.y_min) / s.h).round().max(0.0) as usize).min(s.ny() - 1);
    (i, j)
}

/// Outcome of the obstacle-visibility check.
#[derive(Debug)]
pub struct BoundaryRegion {
    pub coverage: f64,
    pub contains_point: bool,
}

/// Takes the 8-connected component of `{W ≥ 0.2·W_max}` grown from the largest
/// `W` inside the curve's bounding box and reports how much of the curve it
/// covers (a sample counts if any cell within ±1 of it belongs to the
/// component) and whether it swallows any of the points.
pub fn boundary_region(grid: &IndicatorGrid, curve: &BoundaryCurve, points: &[Point<2>]) -> BoundaryRegion {
    let s = grid.spec;
    let (nx, ny) = (s.nx(), s.ny());
    let samples: Vec<Point<2>> = (0..400)
        .map(|k| curve.point(2.0 * std::f64::consts::PI * k as f64 / 400.0))
        .collect();
    let (lo, hi) = samples
        .iter()
        .fold(([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]), |(lo, hi), p| {
            ([lo[0].min(p[0]), lo[1].min(p[1])], [hi[0].max(p[0]), hi[1].max(p[1])])
        });
    let mut seed = (0, 0);
    let mut best = f64::NEG_INFINITY;
    for j in 0..ny {
        for i in 0..nx {
            let (x, y) = (s.x(i), s.y(j));
            if x >= lo[0] - s.h && x <= hi[0] + s.h && y >= lo[1] - s.h && y <= hi[1] + s.h && grid.get(i, j) > best {
                best = grid.get(i, j);
                seed = (i, j);
            }
        }
    }
    let threshold = 0.2 * grid.max();
    let mut inside = vec![false; nx * ny];
    let mut queue = VecDeque::from([seed]);
    inside[seed.1 * nx + seed.0] = grid.get(seed.0, seed.1) >= threshold;
    while let Some((i, j)) = queue.pop_front() {
        if !inside[j * nx + i] {
            continue;
        }
        for dj in -1i64..=1 {
            for di in -1i64..=1 {
                let (a, b) = (i as i64 + di, j as i64 + dj);
                if a < 0 || b < 0 || a >= nx as i64 || b >= ny as i64 {
                    continue;
                }
                let (a, b) = (a as usize, b as usize);
                if !inside[b * nx + a] && grid.get(a, b) >= threshold {
                    inside[b * nx + a] = true;
                    queue.push_back((a, b));
                }
            }
        }
    }
    let near = |(i, j): (usize, usize)| {
        (i.saturating_sub(1)..=(i + 1).min(nx - 1))
            .any(|a| (j.saturating_sub(1)..=(j + 1).min(ny - 1)).any(|b| inside[b * nx + a]))
    };
    let covered = samples.iter().filter(|p| near(cell(grid, p))).count();
    let contains_point = points.iter().any(|p| {
        let (i, j) = cell(grid, p);
        inside[j * nx + i]
    });
    BoundaryRegion {
        coverage: covered as f64 / samples.len() as f64,
        contains_point,
    }
}

/// Dense complex solve by Gaussian elimination with partial pivoting.
pub fn gauss_solve(mut a: Vec<Vec<Complex64>>, mut b: Vec<Complex64>) -> Vec<Complex64> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| a[i][c].norm().total_cmp(&a[j][c].norm()))
            .unwrap();
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            let (top, bottom) = a.split_at_mut(r);
            for (dst, src) in bottom[0][c..].iter_mut().zip(&top[c][c..]) {
                *dst -= f * src;
            }
            let v = b[c];
            b[r] -= f * v;
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for r in (0..n).rev() {
        let s: Complex64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

/// Source strengths from the Foldy form `X_k = a_k (u_in(y_k) + Σ_{l≠k} Γ(y_k − y_l) X_l)`,
/// `a_k = 1/(α_k − χ)`.
pub fn foldy_amplitudes<const D: usize>(
    medium: &ElasticMedium,
    chi: Complex64,
    points: &[Point<D>],
    alphas: &[Complex64],
    incident: &[CVector<D>],
) -> Vec<CVector<D>> {
    let n = points.len();
    let size = n * D;
    let mut a = vec![vec![Complex64::new(0.0, 0.0); size]; size];
    let mut b = vec![Complex64::new(0.0, 0.0); size];
    for k in 0..n {
        let ak = 1.0 / (alphas[k] - chi);
        for i in 0..D {
            a[k * D + i][k * D + i] = Complex64::new(1.0, 0.0);
            b[k * D + i] = ak * incident[k][i];
        }
        for l in 0..n {
            if l == k {
                continue;
            }
            let g = dynamic_kernel(medium, &(points[k] - points[l]));
            for i in 0..D {
                for j in 0..D {
                    a[k * D + i][l * D + j] = -ak * g[(i, j)];
                }
            }
        }
    }
    let x = gauss_solve(a, b);
    (0..n).map(|k| CVector::<D>::from_fn(|i, _| x[k * D + i])).collect()
}
