use crate::error::{Error, Result};

/// Residual tolerance targeted by the bracketed solvers.
pub const RESIDUAL_TOL: f64 = 1e-12;

const MAX_ITER: usize = 400;

fn not_bracketed(lo: f64, hi: f64, f_lo: f64, f_hi: f64) -> Error {
    Error::NotBracketed { lo, hi, f_lo, f_hi }
}

fn opposite(a: f64, b: f64) -> bool {
    (a <= 0.0 && b >= 0.0) || (a >= 0.0 && b <= 0.0)
}

/// Plain bisection until the bracket collapses to adjacent floats.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !opposite(fa, fb) {
        return Err(not_bracketed(lo, hi, fa, fb));
    }
    for _ in 0..MAX_ITER {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if opposite(fa, fm) {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    Ok(0.5 * (a + b))
}

/// Newton's method kept inside a sign-change bracket; falls back to
/// bisection whenever a step leaves the bracket or stalls.
///
/// `fdf` returns the value and derivative at a point.
pub fn newton_bracketed<F>(mut fdf: F, lo: f64, hi: f64) -> Result<f64>
where
    F: FnMut(f64) -> (f64, f64),
{
    let (f_lo, _) = fdf(lo);
    let (f_hi, _) = fdf(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if !opposite(f_lo, f_hi) {
        return Err(not_bracketed(lo, hi, f_lo, f_hi));
    }
    // orient so that f(xl) < 0 < f(xh)
    let (mut xl, mut xh) = if f_lo < 0.0 { (lo, hi) } else { (hi, lo) };
    let mut x = 0.5 * (lo + hi);
    let mut dx_old = (hi - lo).abs();
    let mut dx = dx_old;
    let (mut fx, mut dfx) = fdf(x);
    for _ in 0..MAX_ITER {
        if fx == 0.0 {
            return Ok(x);
        }
        let newton_out = ((x - xh) * dfx - fx) * ((x - xl) * dfx - fx) > 0.0;
        let slow = (2.0 * fx).abs() > (dx_old * dfx).abs();
        dx_old = dx;
        if newton_out || slow || !dfx.is_finite() || dfx == 0.0 {
            dx = 0.5 * (xh - xl);
            x = xl + dx;
        } else {
            dx = fx / dfx;
            x -= dx;
        }
        let width = (xh - xl).abs();
        if dx.abs() <= 4.0 * f64::EPSILON * x.abs().max(1e-300) || width <= 4.0 * f64::EPSILON * x.abs() {
            let (fv, _) = fdf(x);
            return finish(x, fv, width);
        }
        let (fv, dv) = fdf(x);
        fx = fv;
        dfx = dv;
        if fx < 0.0 {
            xl = x;
        } else {
            xh = x;
        }
    }
    Err(Error::NoConvergence(format!("bracketed Newton exhausted {MAX_ITER} iterations near {x}")))
}

fn finish(x: f64, fx: f64, width: f64) -> Result<f64> {
    if fx.abs() <= RESIDUAL_TOL || width <= 1e-13 * x.abs().max(1.0) {
        Ok(x)
    } else {
        Err(Error::NoConvergence(format!("residual {fx:e} above tolerance at {x}")))
    }
}

/// Brent's derivative-free method on a sign-change bracket.
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !opposite(fa, fb) {
        return Err(not_bracketed(lo, hi, fa, fb));
    }
    let (mut c, mut fc) = (b, fb);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..MAX_ITER {
        if (fb > 0.0 && fc > 0.0) || (fb < 0.0 && fc < 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 1e-300;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol || fb == 0.0 {
            return finish(b, fb, (c - b).abs());
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(xm) };
        fb = f(b);
    }
    Err(Error::NoConvergence(format!("Brent exhausted {MAX_ITER} iterations near {b}")))
}

/// Grows `hi` geometrically from `lo` until `f` changes sign against `f(lo)`.
pub fn expand_upper<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi0: f64) -> Result<f64> {
    let f_lo = f(lo);
    let mut hi = hi0;
    for _ in 0..200 {
        let f_hi = f(hi);
        if opposite(f_lo, f_hi) {
            return Ok(hi);
        }
        hi = lo + 2.0 * (hi - lo);
    }
    Err(not_bracketed(lo, hi, f_lo, f(hi)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn newton_cubic() {
        let r = newton_bracketed(|x| (x * x * x - x - 2.0, 3.0 * x * x - 1.0), 1.0, 2.0).unwrap();
        assert!((r * r * r - r - 2.0).abs() < 1e-14);
    }

    #[test]
    fn newton_handles_flat_start() {
        // derivative vanishes at the midpoint of [-1, 1]
        let r = newton_bracketed(|x| (x * x * x + 0.1, 3.0 * x * x), -1.0, 1.0).unwrap();
        assert!((r + 0.1f64.cbrt()).abs() < 1e-14);
    }

    #[test]
    fn brent_cos() {
        let r = brent(|x| x.cos() - x, 0.0, 1.0).unwrap();
        assert!((r.cos() - r).abs() < 1e-15);
    }

    #[test]
    fn unbracketed_is_an_error() {
        assert!(matches!(bisect(|x| x * x + 1.0, -1.0, 1.0), Err(Error::NotBracketed { .. })));
        assert!(brent(|x| x * x + 1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn expand_finds_far_root() {
        let hi = expand_upper(|x| 50.0 - x, 0.0, 1.0).unwrap();
        assert!(hi >= 50.0);
    }
}
