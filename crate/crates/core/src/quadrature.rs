//! Adaptive Gauss-Kronrod (7, 15) quadrature for complex-valued integrands
//! on finite intervals.

use crate::error::{Error, Result};
use crate::quantum::{C64, ZERO};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

/// Gauss weights for Kronrod nodes 1, 3, 5 and the center.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Integral value with an absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: C64,
    pub error: f64,
    pub evaluations: usize,
}

/// One G7K15 rule on `[a, b]`: Kronrod value and |K15 − G7|.
pub fn gk15<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64) -> (C64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let sum = f(center - dx) + f(center + dx);
        kronrod += sum * WGK[j];
        if j % 2 == 1 {
            gauss += sum * WG[j / 2];
        }
    }
    let kronrod = kronrod * half;
    let gauss = gauss * half;
    (kronrod, (kronrod - gauss).norm())
}

/// Globally adaptive bisection: the interval with the largest error
/// estimate is split until the summed estimate meets
/// `max(abs_tol, rel_tol·|I|)` or `max_intervals` is reached.
pub fn integrate<F: Fn(f64) -> C64>(
    f: &F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Result<QuadResult> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Quadrature(format!("non-finite interval [{a}, {b}]")));
    }
    if a == b {
        return Ok(QuadResult {
            value: ZERO,
            error: 0.0,
            evaluations: 0,
        });
    }
    let (v, e) = gk15(f, a, b);
    let mut intervals = vec![(a, b, v, e)];
    let mut evaluations = 15;
    loop {
        let total: C64 = intervals.iter().map(|iv| iv.2).sum();
        let err: f64 = intervals.iter().map(|iv| iv.3).sum();
        if !total.re.is_finite() || !total.im.is_finite() {
            return Err(Error::Quadrature(format!(
                "non-finite integrand on [{a}, {b}]"
            )));
        }
        if err <= abs_tol.max(rel_tol * total.norm()) {
            return Ok(QuadResult {
                value: total,
                error: err,
                evaluations,
            });
        }
        if intervals.len() >= max_intervals {
            return Err(Error::Quadrature(format!(
                "error {err:e} above tolerance after {max_intervals} intervals on [{a}, {b}]"
            )));
        }
        let worst = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .expect("at least one interval");
        let (lo, hi, _, _) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Err(Error::Quadrature(format!("interval collapsed near {lo:e}")));
        }
        let (v1, e1) = gk15(f, lo, mid);
        let (v2, e2) = gk15(f, mid, hi);
        evaluations += 30;
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        // K15 integrates degree ≤ 22 exactly.
        let f = |x: f64| C64::new(x.powi(22), x.powi(3));
        let (v, _) = gk15(&f, -1.0, 2.0);
        let exact = (2f64.powi(23) + 1.0) / 23.0;
        assert!((v.re - exact).abs() < 1e-9 * exact);
        assert!((v.im - (16.0 - 1.0) / 4.0).abs() < 1e-12);
    }

    #[test]
    fn oscillatory_exponential() {
        let k = 40.0;
        let f = |x: f64| C64::from_polar(1.0, k * x);
        let r = integrate(&f, 0.0, 3.0, 1e-13, 0.0, 1000).unwrap();
        let exact = (C64::from_polar(1.0, 3.0 * k) - 1.0) / C64::new(0.0, k);
        assert!((r.value - exact).norm() < 1e-12);
        assert!(r.error <= 1e-13);
    }

    #[test]
    fn endpoint_singularity() {
        let f = |x: f64| C64::new(x.sqrt(), 0.0);
        let r = integrate(&f, 0.0, 1.0, 1e-12, 0.0, 2000).unwrap();
        assert!((r.value.re - 2.0 / 3.0).abs() < 1e-11);
    }
}
