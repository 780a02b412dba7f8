//! Globally adaptive 15-point Gauss–Kronrod quadrature.
#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const MAX_INTERVALS: usize = 4000;

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub abs_err: f64,
    pub converged: bool,
}

fn kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = fc * WGK[7];
    let mut rg = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        rk += WGK[j] * s;
        if j % 2 == 1 {
            rg += WG[j / 2] * s;
        }
    }
    (rk * h, ((rk - rg) * h).abs())
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Integrates `f` over the panels delimited by `breaks` (sorted ascending),
/// refining the worst panel until the summed error estimate meets
/// `max(abs_tol, rel_tol * |I|)`.
pub fn integrate_breaks<F: FnMut(f64) -> f64>(mut f: F, breaks: &[f64], abs_tol: f64, rel_tol: f64) -> Quadrature {
    let mut heap = BinaryHeap::new();
    let (mut total, mut err) = (0.0, 0.0);
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if !(b > a) {
            continue;
        }
        let (v, e) = kronrod(&mut f, a, b);
        total += v;
        err += e;
        heap.push(Panel { a, b, value: v, err: e });
    }
    let mut converged = false;
    while heap.len() < MAX_INTERVALS {
        if err <= abs_tol.max(rel_tol * total.abs()) {
            converged = true;
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let m = 0.5 * (worst.a + worst.b);
        if !(m > worst.a && m < worst.b) {
            // cannot split further; keep it and stop
            heap.push(worst);
            break;
        }
        let (v1, e1) = kronrod(&mut f, worst.a, m);
        let (v2, e2) = kronrod(&mut f, m, worst.b);
        total += v1 + v2 - worst.value;
        err += e1 + e2 - worst.err;
        heap.push(Panel { a: worst.a, b: m, value: v1, err: e1 });
        heap.push(Panel { a: m, b: worst.b, value: v2, err: e2 });
    }
    // re-sum to shed accumulated cancellation in the running totals
    let (value, abs_err) = heap.iter().fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.err));
    Quadrature { value, abs_err, converged: converged || abs_err <= abs_tol.max(rel_tol * value.abs()) }
}

/// Integrates `f` on `[a, b]` to an absolute tolerance.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    if b < a {
        return -integrate(f, b, a, abs_tol);
    }
    integrate_breaks(f, &[a, b], abs_tol, 0.0).value
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let v = integrate(|x| 7.0 * x.powi(6) - x * x, 0.0, 2.0, 1e-14);
        assert!((v - (128.0 - 8.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn log_singularity() {
        let v = integrate(|x| x.ln(), 0.0, 1.0, 1e-12);
        assert!((v + 1.0).abs() < 1e-10);
    }

    #[test]
    fn step_with_break() {
        let q = integrate_breaks(|x| if x < 0.3 { 1.0 } else { 2.0 }, &[0.0, 0.3, 1.0], 1e-14, 0.0);
        assert!((q.value - 1.7).abs() < 1e-14);
        assert!(q.converged);
    }

    #[test]
    fn reversed_limits() {
        let v = integrate(|x| x, 1.0, 0.0, 1e-14);
        assert!((v + 0.5).abs() < 1e-15);
    }
}
