//! Partial sums and tails of the series `-log(1 - t) = sum_{i >= 1} t^i / i`.

/// `-log(1 - t)`, accurate for small `t`.
#[inline]
pub fn neg_log1m(t: f64) -> f64 {
    -(-t).ln_1p()
}

/// `(1 - t) * (1 - log(1 - t))`, with the limit 0 at `t = 1`.
#[inline]
pub fn one_minus_log(t: f64) -> f64 {
    if t >= 1.0 {
        return 0.0;
    }
    (1.0 - t) * (1.0 + neg_log1m(t))
}

/// `sum_{i=1}^{m} t^i / i`.
pub fn log_series(t: f64, m: usize) -> f64 {
    let mut pow = 1.0;
    let mut s = 0.0;
    for i in 1..=m {
        pow *= t;
        s += pow / i as f64;
    }
    s
}

const DIRECT_TAIL_CAP: usize = 20_000_000;

fn tail_direct(t: f64, n: usize) -> f64 {
    let mut pow = t.powi(n as i32);
    let mut s = 0.0;
    let mut i = n;
    while pow > 0.0 && i < n + DIRECT_TAIL_CAP {
        let term = pow / i as f64;
        s += term;
        if term <= 1e-18 * s {
            break;
        }
        pow *= t;
        i += 1;
    }
    s
}

/// `sum_{i >= n} t^i / i` for `t` in `[0, 1)` and `n >= 1`.
///
/// Summed directly when `t^n` is small (where subtracting from the
/// logarithm would cancel), otherwise as `-log(1 - t)` minus the head.
pub fn log_tail(t: f64, n: usize) -> f64 {
    assert!(n >= 1, "tail index starts at 1");
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return f64::INFINITY;
    }
    if n == 1 {
        return neg_log1m(t);
    }
    if t.powi(n as i32) < 0.5 {
        tail_direct(t, n)
    } else {
        neg_log1m(t) - log_series(t, n - 1)
    }
}

/// Same tail, parameterised by `u = -log(1 - t)` so that `t` close to 1
/// keeps full precision in the logarithm.
pub fn log_tail_u(u: f64, n: usize) -> f64 {
    assert!(n >= 1, "tail index starts at 1");
    if u <= 0.0 {
        return 0.0;
    }
    let t = -(-u).exp_m1();
    if n == 1 {
        return u;
    }
    if t.powi(n as i32) < 0.5 {
        tail_direct(t, n)
    } else {
        u - log_series(t, n - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn head_plus_tail_is_log() {
        for &t in &[0.01, 0.3, 0.7, 0.95, 0.999] {
            for n in [1usize, 2, 5, 40, 100, 700] {
                let whole = neg_log1m(t);
                let split = log_series(t, n - 1) + log_tail(t, n);
                assert!((whole - split).abs() < 1e-12 * whole.max(1.0), "t={t} n={n}");
            }
        }
    }

    #[test]
    fn small_tail_keeps_relative_precision() {
        let exact: f64 = (10..60).map(|i| 0.1f64.powi(i) / i as f64).sum();
        let got = log_tail(0.1, 10);
        assert!(((got - exact) / exact).abs() < 1e-14);
    }

    #[test]
    fn u_form_matches() {
        for &u in &[0.1f64, 1.0, 4.0, 9.0] {
            let t = 1.0 - (-u).exp();
            for n in [1usize, 3, 30] {
                let a = log_tail_u(u, n);
                let b = log_tail(t, n);
                assert!((a - b).abs() < 1e-9 * a.max(1.0), "u={u} n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn one_minus_log_limits() {
        assert_eq!(one_minus_log(1.0), 0.0);
        assert_eq!(one_minus_log(0.0), 1.0);
    }
}
