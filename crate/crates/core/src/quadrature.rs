//! One-dimensional quadrature used for the analytic presets.
//!
//! [`integrate`] is an adaptive Gauss-Kronrod (7/15) rule driven by an
//! absolute tolerance. [`monotone_bracket`] gives guaranteed lower and upper
//! bounds for a non-decreasing integrand from endpoint values alone, and is
//! used to cross-check the adaptive result.

/// Kronrod abscissae on [-1, 1], positive half, descending.
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
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

/// Gauss weights for the odd Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_DEPTH: u32 = 48;

/// Default absolute tolerance for preset integrals.
pub const DEFAULT_TOL: f64 = 1e-13;

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, whole: f64, depth: u32) -> f64 {
    let (value, err) = gk15(f, a, b);
    if err <= tol || depth >= MAX_DEPTH || (b - a) <= f64::EPSILON * whole {
        return value;
    }
    let mid = 0.5 * (a + b);
    adapt(f, a, mid, 0.5 * tol, whole, depth + 1) + adapt(f, mid, b, 0.5 * tol, whole, depth + 1)
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    adapt(&f, a, b, tol, b - a, 0)
}

/// Guaranteed bounds on the integral of a non-decreasing `f` over `[a, b]`
/// using `cells` equal subintervals: on each cell `f(left)·h ≤ ∫ ≤ f(right)·h`.
pub fn monotone_bracket<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cells: usize) -> (f64, f64) {
    let cells = cells.max(1);
    let h = (b - a) / cells as f64;
    let mut lo = 0.0;
    let mut hi = 0.0;
    let mut left = f(a);
    for i in 1..=cells {
        let x = if i == cells { b } else { a + h * i as f64 };
        let right = f(x);
        lo += left * h;
        hi += right * h;
        left = right;
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let v = integrate(|x| x * x, 0.0, 1.0, 1e-14);
        assert!((v - 1.0 / 3.0).abs() < 1e-15);
        let v = integrate(|x| x.powi(5) - 2.0 * x, -1.0, 2.0, 1e-14);
        assert!((v - (64.0 - 1.0) / 6.0 + 3.0).abs() < 1e-12);
    }

    #[test]
    fn sqrt_endpoint_singularity_converges() {
        let v = integrate(f64::sqrt, 0.0, 1.0, 1e-13);
        assert!((v - 2.0 / 3.0).abs() < 1e-11, "{v}");
    }

    #[test]
    fn bracket_contains_integral() {
        let (lo, hi) = monotone_bracket(|x| x * x, 0.0, 1.0, 1000);
        assert!(lo <= 1.0 / 3.0 && 1.0 / 3.0 <= hi);
        assert!((hi - lo - 1e-3).abs() < 1e-12);
    }

    #[test]
    fn empty_interval_is_zero() {
        assert_eq!(integrate(|x| x, 0.5, 0.5, 1e-12), 0.0);
    }
}
