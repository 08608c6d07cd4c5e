//! Bessel functions of the first and second kind of orders 0 and 1 for real
//! positive arguments, and the Hankel function of the first kind built from
//! them.
//!
//! Three regimes are used:
//!
//! * `x <= 8`: ascending power series for `J_n` and `Y_n`.
//! * `8 < x < 25`: Miller backward recurrence for `J_n`, normalised with
//!   `J_0 + 2 Σ J_{2k} = 1`, and the Neumann series for `Y_0`, `Y_1`.
//! * `x >= 25`: Hankel asymptotic expansion.

use num_complex::Complex64;
use std::f64::consts::{FRAC_2_PI, FRAC_PI_4, PI};

use crate::{Error, Result};

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const SERIES_MAX: f64 = 8.0;
const ASYMPTOTIC_MIN: f64 = 25.0;

/// Values of `J_0, J_1, Y_0, Y_1` at a single argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bessel01 {
    pub j0: f64,
    pub j1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Bessel01 {
    pub fn h0(&self) -> Complex64 {
        Complex64::new(self.j0, self.y0)
    }

    pub fn h1(&self) -> Complex64 {
        Complex64::new(self.j1, self.y1)
    }
}

/// Evaluates `J_0, J_1, Y_0, Y_1` at `x > 0`.
pub fn bessel01(x: f64) -> Bessel01 {
    debug_assert!(x > 0.0);
    if x <= SERIES_MAX {
        ascending(x)
    } else if x < ASYMPTOTIC_MIN {
        miller_neumann(x)
    } else {
        asymptotic(x)
    }
}

/// `J_0(x)` and `J_1(x)` only; cheaper than [`bessel01`] for the series range.
pub fn bessel_j01(x: f64) -> (f64, f64) {
    if x == 0.0 {
        return (1.0, 0.0);
    }
    let x = x.abs();
    if x <= SERIES_MAX {
        ascending_j(x)
    } else {
        let b = bessel01(x);
        (b.j0, b.j1)
    }
}

/// Hankel function of the first kind `H^(1)_order(x) = J_order(x) + i Y_order(x)`
/// for `order ∈ {0, 1}` and real `x > 0`.
pub fn hankel1(order: u32, x: f64) -> Result<Complex64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!(
            "hankel1 requires a finite positive argument, got {x}"
        )));
    }
    let b = bessel01(x);
    match order {
        0 => Ok(b.h0()),
        1 => Ok(b.h1()),
        _ => Err(Error::Domain(format!("hankel1 order {order} not supported"))),
    }
}

fn ascending_j(x: f64) -> (f64, f64) {
    let q = 0.25 * x * x;
    // J0 = Σ (-q)^k / (k!)^2, J1 = (x/2) Σ (-q)^k / (k! (k+1)!)
    let mut t0 = 1.0;
    let mut t1 = 1.0;
    let mut j0 = 1.0;
    let mut j1 = 1.0;
    for k in 1..60 {
        let kf = k as f64;
        t0 *= -q / (kf * kf);
        t1 *= -q / (kf * (kf + 1.0));
        j0 += t0;
        j1 += t1;
        if t0.abs() < 1e-17 * j0.abs().max(1e-300) && t1.abs() < 1e-17 * j1.abs().max(1e-300) {
            break;
        }
    }
    (j0, 0.5 * x * j1)
}

fn ascending(x: f64) -> Bessel01 {
    let q = 0.25 * x * x;
    let lg = (0.5 * x).ln() + EULER_GAMMA;
    // Y0 = (2/π)[(ln(x/2)+γ) J0 + Σ_{k≥1} (-1)^{k+1} H_k q^k/(k!)^2]
    // Y1 = (2/π)(ln(x/2)+γ) J1 - 2/(πx)
    //      - (x/(2π)) Σ_{k≥0} (-1)^k (H_k + H_{k+1}) q^k/(k!(k+1)!) + (x/π)... collected below
    let mut t0 = 1.0;
    let mut t1 = 1.0;
    let mut j0 = 1.0;
    let mut j1 = 1.0;
    let mut s0 = 0.0;
    // k = 0 term of the Y1 sum: H_0 + H_1 = 1
    let mut s1 = 1.0;
    let mut harmonic = 0.0;
    for k in 1..80 {
        let kf = k as f64;
        t0 *= -q / (kf * kf);
        t1 *= -q / (kf * (kf + 1.0));
        harmonic += 1.0 / kf;
        let harmonic_next = harmonic + 1.0 / (kf + 1.0);
        j0 += t0;
        j1 += t1;
        s0 -= harmonic * t0;
        s1 += (harmonic + harmonic_next) * t1;
        if t0.abs() * (1.0 + harmonic) < 1e-18 && t1.abs() * (1.0 + harmonic_next) < 1e-18 {
            break;
        }
    }
    let j1 = 0.5 * x * j1;
    let y0 = FRAC_2_PI * (lg * j0 + s0);
    let y1 = FRAC_2_PI * lg * j1 - FRAC_2_PI / x - x / (2.0 * PI) * s1;
    Bessel01 { j0, j1, y0, y1 }
}

fn miller_neumann(x: f64) -> Bessel01 {
    // Start well above x so the recurrence is dominated by the minimal solution.
    let mut start = (x + 25.0 + 3.0 * x.sqrt()) as usize;
    start += start % 2;
    let mut vals = vec![0.0; start + 2];
    vals[start + 1] = 0.0;
    vals[start] = 1e-300;
    for n in (1..=start).rev() {
        vals[n - 1] = 2.0 * n as f64 / x * vals[n] - vals[n + 1];
        if vals[n - 1].abs() > 1e250 {
            for v in vals.iter_mut().skip(n - 1) {
                *v *= 1e-250;
            }
        }
    }
    let mut norm = vals[0];
    let mut k = 2;
    while k <= start {
        norm += 2.0 * vals[k];
        k += 2;
    }
    for v in vals.iter_mut() {
        *v /= norm;
    }
    let j = &vals;
    let lg = (0.5 * x).ln() + EULER_GAMMA;
    // Y0 = (2/π)(ln(x/2)+γ)J0 - (4/π) Σ_{k≥1} (-1)^k J_{2k}/k
    // Y1 = -Y0' = -(2/(πx))J0 + (2/π)(ln(x/2)+γ)J1 + (2/π) Σ_{k≥1} (-1)^k (J_{2k-1} - J_{2k+1})/k
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut kk = 1;
    while 2 * kk < start + 1 {
        let sign = if kk % 2 == 0 { 1.0 } else { -1.0 };
        let kf = kk as f64;
        s0 += sign * j[2 * kk] / kf;
        s1 += sign * (j[2 * kk - 1] - j[2 * kk + 1]) / kf;
        kk += 1;
    }
    let y0 = FRAC_2_PI * lg * j[0] - 2.0 * FRAC_2_PI * s0;
    let y1 = -FRAC_2_PI / x * j[0] + FRAC_2_PI * lg * j[1] + FRAC_2_PI * s1;
    Bessel01 {
        j0: j[0],
        j1: j[1],
        y0,
        y1,
    }
}

/// Hankel asymptotic expansion `H_n(x) ~ sqrt(2/(πx)) e^{i(x - nπ/2 - π/4)} Σ i^k a_k(n)/x^k`.
fn asymptotic_h(order: u32, x: f64) -> Complex64 {
    let mu = 4.0 * (order * order) as f64;
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut prev_mag = f64::INFINITY;
    for k in 1..40 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        term *= Complex64::new(0.0, 1.0) * (mu - odd * odd) / (8.0 * kf * x);
        let mag = term.norm();
        if mag > prev_mag {
            break;
        }
        sum += term;
        prev_mag = mag;
        if mag < 1e-17 {
            break;
        }
    }
    let phase = x - order as f64 * 0.5 * PI - FRAC_PI_4;
    (2.0 / (PI * x)).sqrt() * Complex64::from_polar(1.0, phase) * sum
}

fn asymptotic(x: f64) -> Bessel01 {
    let h0 = asymptotic_h(0, x);
    let h1 = asymptotic_h(1, x);
    Bessel01 {
        j0: h0.re,
        y0: h0.im,
        j1: h1.re,
        y1: h1.im,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    // High-precision reference values (40-digit arithmetic).
    const REFERENCE: &[(u32, f64, f64, f64)] = &[
        (0, 1e-6, 0.99999999999975, -8.869_031_481_659_444),
        (0, 1e-3, 0.999_999_750_000_015_6, -4.471_416_611_375_923),
        (0, 0.1, 0.997_501_562_066_04, -1.534_238_651_350_366_7),
        (0, 1.0, 0.765_197_686_557_966_6, 0.088_256_964_215_676_96),
        (0, 2.5, -0.048_383_776_468_198, 0.498_070_359_615_231_9),
        (0, 5.0, -0.177_596_771_314_338_3, -0.308_517_625_249_033_76),
        (0, 7.9, 0.194_361_844_841_278_33, 0.206_520_948_144_375_72),
        (0, 8.0, 0.171_650_807_137_553_9, 0.223_521_489_387_566_22),
        (0, 8.1, 0.147_517_454_044_377_58, 0.238_091_328_702_234_84),
        (0, 12.0, 0.047_689_310_796_833_535, -0.225_237_312_634_361_45),
        (0, 20.0, 0.167_024_664_340_583_16, 0.062_640_596_809_383_83),
        (0, 24.9, 0.083_245_968_353_015_68, -0.136_499_183_996_765_1),
        (0, 25.0, 0.096_266_783_275_958_11, -0.127_249_432_268_006_14),
        (0, 30.0, -0.086_367_983_581_040_21, -0.117_295_731_686_664_03),
        (0, 100.0, 0.019_985_850_304_223_122, -0.077_244_313_365_083_15),
        (0, 1000.0, 0.024_786_686_152_420_176, 0.004_715_917_977_622_813_5),
        (0, 10000.0, -0.007_096_160_353_388_801_5, 0.003_647_805_558_986_605_8),
        (1, 1e-6, 4.999999999999375e-7, -636_619.772_372_175),
        (1, 1e-3, 0.000_499_999_937_500_002_6, -636.622_167_231_139_4),
        (1, 0.1, 0.049_937_526_036_242, -6.458_951_094_702_026_6),
        (1, 1.0, 0.440_050_585_744_933_5, -0.781_212_821_300_288_7),
        (1, 2.5, 0.497_094_102_464_274_05, 0.145_918_137_966_785_8),
        (1, 5.0, -0.327_579_137_591_465_23, 0.147_863_143_391_226_83),
        (1, 7.9, 0.219_179_399_921_751_14, -0.181_721_077_280_573_2),
        (1, 8.0, 0.234_636_346_853_914_63, -0.158_060_461_731_247_5),
        (1, 8.1, 0.247_607_766_981_592_92, -0.133_148_795_952_495_85),
        (1, 12.0, -0.223_447_104_490_627_6, -0.057_099_218_260_896_52),
        (1, 20.0, 0.066_833_124_175_850_05, -0.165_511_614_362_521_3),
        (1, 24.9, -0.134_855_699_531_408_75, -0.086_002_557_595_554_45),
        (1, 25.0, -0.125_350_249_580_289_9, -0.098_829_964_783_237_41),
        (1, 30.0, -0.118_751_062_616_622_94, 0.084_425_570_661_747_23),
        (1, 100.0, -0.077_145_352_014_112_16, -0.020_372_312_002_759_792),
        (1, 1000.0, 0.004_728_311_907_089_524, -0.024_784_331_292_351_778),
        (1, 10000.0, 0.003_647_450_755_529_580_3, 0.007_096_342_752_536_495),
    ];

    #[test]
    fn matches_high_precision_reference() {
        for &(order, x, re, im) in REFERENCE {
            let h = hankel1(order, x).unwrap();
            let err = rel(h, Complex64::new(re, im));
            assert!(err <= 1e-12, "H{order}({x}) rel err {err:e}");
        }
    }

    #[test]
    fn order_zero_at_one() {
        let h = hankel1(0, 1.0).unwrap();
        assert!((h.re - 0.76519768656).abs() < 1e-11);
        assert!((h.im - 0.08825696421).abs() < 1e-11);
    }

    #[test]
    fn wronskian() {
        for &x in &[0.3, 2.5, 7.99, 8.01, 13.7, 24.99, 25.01, 80.0, 3000.0] {
            let b = bessel01(x);
            let w = b.j0 * b.y1 - b.j1 * b.y0;
            let expect = -2.0 / (PI * x);
            assert!((w - expect).abs() <= 1e-12 * expect.abs(), "x={x}: {w} vs {expect}");
        }
    }

    #[test]
    fn small_argument_order_one() {
        for &x in &[1e-4, 1e-6, 1e-8] {
            let h = hankel1(1, x).unwrap();
            let lead = Complex64::new(0.0, -2.0 / (PI * x));
            assert!(rel(h, lead) < 1e-6);
        }
    }

    #[test]
    fn rejects_non_positive() {
        assert!(hankel1(0, 0.0).is_err());
        assert!(hankel1(1, -1.0).is_err());
        assert!(hankel1(0, f64::NAN).is_err());
        assert!(hankel1(2, 1.0).is_err());
    }

    /// `J_n(x) = (1/π) ∫_0^π cos(nτ - x sin τ) dτ`, trapezoid on the periodic
    /// extension; converges geometrically.
    fn j_integral(n: u32, x: f64) -> f64 {
        let m = 2000;
        let h = 2.0 * PI / m as f64;
        let mut s = 0.0;
        for k in 0..m {
            let t = k as f64 * h;
            s += (n as f64 * t - x * t.sin()).cos();
        }
        s * h / (2.0 * PI)
    }

    #[test]
    fn regime_boundaries_are_continuous_against_integral() {
        for &x in &[0.5, 4.0, 7.999, 8.0, 8.001, 15.0, 24.999, 25.0, 25.001, 60.0] {
            let b = bessel01(x);
            assert!((b.j0 - j_integral(0, x)).abs() < 2e-14, "J0({x})");
            assert!((b.j1 - j_integral(1, x)).abs() < 2e-14, "J1({x})");
        }
    }

    #[test]
    fn j_only_path_agrees() {
        for &x in &[0.0, 1e-3, 3.0, 8.0, 11.0, 40.0] {
            let (j0, j1) = bessel_j01(x);
            if x == 0.0 {
                assert_eq!((j0, j1), (1.0, 0.0));
                continue;
            }
            let b = bessel01(x);
            assert!((j0 - b.j0).abs() < 1e-15 && (j1 - b.j1).abs() < 1e-15);
        }
    }
}
