//! Seller-worst and buyer-optimal information structures.
//!
//! Both optima are two-point in virtual-value space: a mass `theta0` at
//! signal 0, a truncated Pareto segment with constant virtual value `k`,
//! and an atom of mass `1 - theta` at signal 1. Thresholds in `p` select
//! which of those parameters bind.
//!
//! Roots close to `theta = 1` are found in `u = -log(1 - theta)`, which
//! keeps precision when `1 - theta` is far below machine epsilon.

use serde::{Deserialize, Serialize};

use crate::dist::{DistBuilder, PiecewiseDistribution};
use crate::error::{check_buyers, check_prob, Error, Result};
use crate::myerson::{iron, optimal_symmetric, AuctionStats, Method};
use crate::numeric::{brent, expand_upper, log_series, log_tail, log_tail_u, neg_log1m, newton_bracketed};

/// Which welfare measure the designer optimises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    /// Minimise the seller's optimal revenue.
    SellerWorst,
    /// Maximise the buyers' surplus under the seller's optimal auction.
    BuyerOptimal,
}

impl Objective {
    pub fn as_str(&self) -> &'static str {
        match self {
            Objective::SellerWorst => "seller-worst",
            Objective::BuyerOptimal => "buyer-optimal",
        }
    }
}

impl std::str::FromStr for Objective {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "seller-worst" => Ok(Objective::SellerWorst),
            "buyer-optimal" => Ok(Objective::BuyerOptimal),
            other => Err(Error::Domain(format!("unknown objective {other:?}"))),
        }
    }
}

/// Which constraint pattern holds at the optimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Case {
    /// `theta0 > 0`, `k = 0`.
    MassAtZero,
    /// `theta0 = 0`, `k = 0`.
    ZeroK,
    /// `theta0 = 0`, `k > 0`.
    PositiveK,
}

impl Case {
    pub fn as_str(&self) -> &'static str {
        match self {
            Case::MassAtZero => "mass_at_zero",
            Case::ZeroK => "zero_k",
            Case::PositiveK => "positive_k",
        }
    }
}

/// Parameters of a two-point virtual-value distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPointSolution {
    pub theta0: f64,
    pub k: f64,
    pub theta: f64,
    /// `1 - theta`, kept separately for precision near `theta = 1`.
    pub one_minus_theta: f64,
    /// Start of the Pareto segment relative to `k`: `(1 - theta)(1 - k) / (1 - theta0)`.
    pub x_scale: f64,
    pub case: Case,
}

impl TwoPointSolution {
    /// Builds the parameters from `theta0`, `k` and `u = -log(1 - theta)`.
    pub fn from_u(theta0: f64, k: f64, u: f64, case: Case) -> Self {
        let one_minus_theta = (-u).exp();
        let theta = -(-u).exp_m1();
        TwoPointSolution {
            theta0,
            k,
            theta,
            one_minus_theta,
            x_scale: one_minus_theta * (1.0 - k) / (1.0 - theta0),
            case,
        }
    }

    /// Builds the parameters from `theta` directly.
    pub fn new(theta0: f64, k: f64, theta: f64, case: Case) -> Self {
        TwoPointSolution::from_u(theta0, k, neg_log1m(theta), case)
    }

    fn u(&self) -> f64 {
        if self.one_minus_theta <= 0.0 {
            f64::INFINITY
        } else {
            -self.one_minus_theta.ln()
        }
    }

    /// Virtual-value distribution `F` of these parameters.
    pub fn virtual_values(&self) -> VirtualValueDist {
        VirtualValueDist {
            below_zero: self.theta0,
            points: vec![(self.k, self.theta - self.theta0), (1.0, self.one_minus_theta)],
        }
    }
}

/// Threshold means for `n` buyers.
///
/// `p_s`: above it the seller-worst structure has `k > 0`.
/// `r_b`: below it the buyer-optimal structure puts mass at zero.
/// `p_b`: above it the buyer-optimal structure has `k > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub n: usize,
    pub p_s: f64,
    pub r_b: f64,
    pub p_b: f64,
    /// `-log(1 - theta*)` at the seller-worst kink, when `n >= 3`.
    pub u_star: Option<f64>,
    /// `-log(1 - theta_1)` defining `r_b`, when `n >= 2`.
    pub u_1: Option<f64>,
    /// `-log(1 - theta_2)` defining `p_b`, when `n >= 3`.
    pub u_2: Option<f64>,
}

fn theta_of(u: f64) -> f64 {
    -(-u).exp_m1()
}

/// `(1 - theta)(1 - log(1 - theta))` at `theta = 1 - e^{-u}`.
fn zero_k_mean(u: f64) -> f64 {
    (-u).exp() * (1.0 + u)
}

fn solve_u<F>(fdf: F, u_lo: f64) -> Result<f64>
where
    F: Fn(f64) -> (f64, f64),
{
    let hi = expand_upper(|u| fdf(u).0, u_lo, u_lo + 1.0)?;
    newton_bracketed(&fdf, u_lo, hi)
}

/// Seller-worst kink: root of `theta log(1-theta) + n(theta + (1-theta) log(1-theta))`.
fn u_star(n: usize) -> Result<f64> {
    let nf = n as f64;
    solve_u(
        |u| {
            let th = theta_of(u);
            let eps = (-u).exp();
            (-th * u + nf * th - nf * eps * u, (nf - 1.0) * eps * u - th)
        },
        (nf - 1.0).ln(),
    )
}

/// Root of `theta^{n-1} + sum_{i<n} theta^i / i + log(1 - theta)`.
fn u_one(n: usize) -> Result<f64> {
    let nf = n as f64;
    solve_u(
        |u| {
            let th = theta_of(u);
            let f = th.powi(n as i32 - 1) - log_tail_u(u, n);
            (f, th.powi(n as i32 - 2) * ((nf - 1.0) - nf * th))
        },
        nf.ln(),
    )
}

/// Root of `theta^{n-1} + sum_{i<n} theta^i / i + log(1 - theta)(1 + (1 - theta) theta^{n-2})`.
fn u_two(n: usize) -> Result<f64> {
    let nf = n as f64;
    solve_u(
        |u| {
            let th = theta_of(u);
            let eps = (-u).exp();
            let f = th.powi(n as i32 - 1) - log_tail_u(u, n) - eps * th.powi(n as i32 - 2) * u;
            let df = th.powi(n as i32 - 3) * ((nf - 1.0) * th - (nf - 2.0)) * (eps * u - th);
            (f, df)
        },
        (nf - 1.0).ln(),
    )
}

/// Regime thresholds for `n` buyers.
///
/// With one buyer the structure never changes (`r_b = 0`, `p_s = p_b = 1`).
/// With two buyers neither `k > 0` regime exists, so `p_s = p_b = 1`.
pub fn thresholds(n: usize) -> Result<Thresholds> {
    check_buyers(n)?;
    let mut t = Thresholds { n, p_s: 1.0, r_b: 0.0, p_b: 1.0, u_star: None, u_1: None, u_2: None };
    if n >= 2 {
        let u1 = u_one(n)?;
        t.u_1 = Some(u1);
        t.r_b = zero_k_mean(u1);
    }
    if n >= 3 {
        let us = u_star(n)?;
        let u2 = u_two(n)?;
        t.u_star = Some(us);
        t.u_2 = Some(u2);
        t.p_s = zero_k_mean(us);
        t.p_b = zero_k_mean(u2);
    }
    Ok(t)
}

/// `u` with `(1 - theta)(1 - log(1 - theta)) = p`.
fn u_for_zero_k(p: f64) -> Result<f64> {
    solve_u(|u| (zero_k_mean(u) - p, -u * (-u).exp()), 0.0)
}

/// Solves the mean constraint for `theta` given `theta0` and `k`:
/// `(1-k)(1-theta)(1 - log(1-theta) + log(1-theta0)) + k(1-theta0) = p`.
///
/// Returns `u = -log(1 - theta)`; infinite when all non-zero mass sits at `k`.
pub fn u_from_mean(p: f64, theta0: f64, k: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&theta0) || !(0.0..1.0).contains(&k) {
        return Err(Error::Domain(format!("need theta0, k in [0, 1), got {theta0}, {k}")));
    }
    let u0 = neg_log1m(theta0);
    let target = (p - k * (1.0 - theta0)) / (1.0 - k);
    let top = 1.0 - theta0;
    if target < -1e-15 || target > top + 1e-15 {
        return Err(Error::Domain(format!("mean {p} is infeasible with theta0 = {theta0}, k = {k}")));
    }
    if target <= 0.0 {
        return Ok(f64::INFINITY);
    }
    if target >= top {
        return Ok(u0);
    }
    solve_u(
        |u| {
            let e = (-u).exp();
            (e * (1.0 + u - u0) - target, -e * (u - u0))
        },
        u0,
    )
}

/// A virtual-value distribution with a possible mass below zero.
///
/// `F(k) = below_zero + sum of masses at points <= k`; points lie in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VirtualValueDist {
    pub below_zero: f64,
    pub points: Vec<(f64, f64)>,
}

impl VirtualValueDist {
    /// Intervals `[k_j, k_{j+1})` of `[0, 1]` with the constant value of `F` on each.
    fn steps(&self) -> Vec<(f64, f64, f64)> {
        let mut pts: Vec<(f64, f64)> = self.points.iter().copied().filter(|p| p.1 > 0.0).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out = Vec::new();
        let mut left = 0.0;
        let mut level = self.below_zero;
        for (k, m) in pts {
            if k > left {
                out.push((left, k, level));
            }
            left = left.max(k);
            level += m;
        }
        if left < 1.0 {
            out.push((left, 1.0, level.min(1.0)));
        }
        out
    }

    /// `F(k)`, right-continuous.
    pub fn cdf(&self, k: f64) -> f64 {
        if k < 0.0 {
            return 0.0;
        }
        let above: f64 = self.points.iter().filter(|p| p.0 <= k).map(|p| p.1).sum();
        (self.below_zero + above).min(1.0)
    }

    /// Total mass (should be one).
    pub fn total(&self) -> f64 {
        self.below_zero + self.points.iter().map(|p| p.1).sum::<f64>()
    }

    /// Optimal revenue `integral_0^1 (1 - F^n)`.
    pub fn revenue(&self, n: usize) -> f64 {
        self.steps().iter().map(|&(a, b, c)| (b - a) * (1.0 - c.powi(n as i32))).sum()
    }
}

/// Mean of the signal distribution induced by `F`:
/// `integral_0^1 (1 - F)(1 - log(1 - F) + log(1 - F(0-))) dk`.
pub fn mean_via_f(f: &VirtualValueDist) -> f64 {
    let u0 = neg_log1m(f.below_zero);
    f.steps()
        .iter()
        .map(|&(a, b, c)| if c >= 1.0 { 0.0 } else { (b - a) * (1.0 - c) * (1.0 + neg_log1m(c) - u0) })
        .sum()
}

/// `integral x dG^n` of the signal distribution induced by `F`.
pub fn surplus_via_f(f: &VirtualValueDist, n: usize) -> f64 {
    let t0 = log_tail(f.below_zero, n);
    let nf = n as f64;
    1.0 + f
        .steps()
        .iter()
        .map(|&(a, b, c)| {
            let spread = if c >= 1.0 { 0.0 } else { nf * (1.0 - c) * (log_tail(c, n) - t0) };
            (b - a) * (spread - c.powi(n as i32))
        })
        .sum::<f64>()
}

/// The designer's finite-dimensional objective at weight `alpha`
/// (`0`: minus revenue, `1`: buyer surplus).
pub fn finite_objective(s: &TwoPointSolution, n: usize, alpha: f64) -> f64 {
    let ni = n as i32;
    let tail_gap =
        if s.one_minus_theta <= 0.0 { 0.0 } else { s.one_minus_theta * (log_tail_u(s.u(), n) - log_tail(s.theta0, n)) };
    alpha * n as f64 * (1.0 - s.k) * tail_gap
        + (alpha - 1.0)
        + (1.0 - alpha) * (1.0 - s.k) * s.theta.powi(ni)
        + (1.0 - alpha) * s.k * s.theta0.powi(ni)
}

/// Signal distribution on `[0, 1]` for the given parameters.
pub fn two_point_distribution(s: &TwoPointSolution) -> Result<PiecewiseDistribution> {
    let b = DistBuilder::new(0.0, 1.0).atom(s.theta0);
    if s.one_minus_theta <= 0.0 || s.x_scale <= 0.0 {
        return b.flat_to(s.k).atom_rest().finish();
    }
    b.flat_to((s.x_scale + s.k).min(1.0)).pareto_to(1.0, s.k).finish()
}

/// A solved symmetric design: parameters, signal distribution and auction statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignSolution {
    pub objective: Objective,
    pub n: usize,
    pub p: f64,
    pub params: TwoPointSolution,
    pub distribution: PiecewiseDistribution,
    pub stats: AuctionStats,
}

/// Flat record of a [`DesignSolution`] used for JSON and CSV output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignSummary {
    pub objective: Objective,
    pub n: usize,
    pub p: f64,
    pub case: Case,
    pub theta0: f64,
    pub k: f64,
    pub theta: f64,
    pub x_scale: f64,
    pub revenue: f64,
    pub total_surplus: f64,
    pub buyer_surplus: f64,
    pub sale_probability: f64,
}

impl DesignSolution {
    fn assemble(objective: Objective, n: usize, p: f64, params: TwoPointSolution) -> Result<Self> {
        let distribution = two_point_distribution(&params)?;
        let stats = optimal_symmetric(&iron(&distribution)?, n, Method::ClosedForm)?;
        Ok(DesignSolution { objective, n, p, params, distribution, stats })
    }

    /// Revenue for the seller-worst objective, buyer surplus otherwise.
    pub fn objective_value(&self) -> f64 {
        match self.objective {
            Objective::SellerWorst => self.stats.revenue,
            Objective::BuyerOptimal => self.stats.buyer_surplus,
        }
    }

    pub fn summary(&self) -> DesignSummary {
        DesignSummary {
            objective: self.objective,
            n: self.n,
            p: self.p,
            case: self.params.case,
            theta0: self.params.theta0,
            k: self.params.k,
            theta: self.params.theta,
            x_scale: self.params.x_scale,
            revenue: self.stats.revenue,
            total_surplus: self.stats.total_surplus,
            buyer_surplus: self.stats.buyer_surplus,
            sale_probability: self.stats.sale_probability,
        }
    }
}

/// Seller-worst two-point parameters.
pub fn seller_worst_params(n: usize, p: f64) -> Result<TwoPointSolution> {
    check_buyers(n)?;
    check_prob("p", p)?;
    let th = thresholds(n)?;
    if p <= th.p_s {
        return Ok(TwoPointSolution::from_u(0.0, 0.0, u_for_zero_k(p)?, Case::ZeroK));
    }
    let us = th.u_star.expect("p_s < 1 implies n >= 3");
    let k = (p - th.p_s) / (1.0 - th.p_s);
    Ok(TwoPointSolution::from_u(0.0, k, us, Case::PositiveK))
}

/// Buyer-optimal two-point parameters.
pub fn buyer_optimal_params(n: usize, p: f64) -> Result<TwoPointSolution> {
    check_buyers(n)?;
    check_prob("p", p)?;
    let th = thresholds(n)?;
    if p > th.p_b {
        let u2 = th.u_2.expect("p_b < 1 implies n >= 3");
        let k = (p - th.p_b) / (1.0 - th.p_b);
        return Ok(TwoPointSolution::from_u(0.0, k, u2, Case::PositiveK));
    }
    if p >= th.r_b {
        return Ok(TwoPointSolution::from_u(0.0, 0.0, u_for_zero_k(p)?, Case::ZeroK));
    }
    let (u, u0) = mass_at_zero(n, p)?;
    Ok(TwoPointSolution::from_u(theta_of(u0), 0.0, u, Case::MassAtZero))
}

/// Joint first-order system for `p < r_b`, nested as a scalar root in `u`:
/// the mean constraint gives `u0 = 1 + u - p e^u` in closed form.
fn mass_at_zero(n: usize, p: f64) -> Result<(f64, f64)> {
    let m = n - 1;
    let u_lo = -p.ln();
    let u_hi = u_for_zero_k(p)?;
    let resid = |u: f64| {
        let th = theta_of(u);
        let c = p * u.exp();
        let u0 = (1.0 + u - c).clamp(0.0, u);
        let th0 = theta_of(u0);
        th.powi(m as i32) + (log_series(th, m) - log_series(th0, m)) + (1.0 - c) * (1.0 - th0.powi(m as i32))
    };
    let u = brent(resid, u_lo, u_hi)?;
    let u0 = (1.0 + u - p * u.exp()).clamp(0.0, u);
    Ok((u, u0))
}

/// Seller-worst design: minimises the seller's optimal revenue.
pub fn solve_seller_worst(n: usize, p: f64) -> Result<DesignSolution> {
    let params = seller_worst_params(n, p)?;
    DesignSolution::assemble(Objective::SellerWorst, n, p, params)
}

/// Buyer-optimal design: maximises buyer surplus under the optimal auction.
pub fn solve_buyer_optimal(n: usize, p: f64) -> Result<DesignSolution> {
    let params = buyer_optimal_params(n, p)?;
    DesignSolution::assemble(Objective::BuyerOptimal, n, p, params)
}

pub fn solve(objective: Objective, n: usize, p: f64) -> Result<DesignSolution> {
    match objective {
        Objective::SellerWorst => solve_seller_worst(n, p),
        Objective::BuyerOptimal => solve_buyer_optimal(n, p),
    }
}

/// Parameters for either objective.
pub fn solve_params(objective: Objective, n: usize, p: f64) -> Result<TwoPointSolution> {
    match objective {
        Objective::SellerWorst => seller_worst_params(n, p),
        Objective::BuyerOptimal => buyer_optimal_params(n, p),
    }
}

/// One row of [`limit_behavior`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitRow {
    pub n: usize,
    pub k_seller: f64,
    pub k_buyer: f64,
    pub top_atom_seller: f64,
    pub top_atom_buyer: f64,
}

/// Large-`n` behaviour of both designs at a fixed mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitReport {
    pub p: f64,
    pub rows: Vec<LimitRow>,
    /// Both `k` sequences are nondecreasing in `n`.
    pub k_monotone: bool,
    /// Both top-atom masses are nonincreasing in `n`.
    pub atoms_monotone: bool,
}

pub fn limit_behavior(p: f64, n_grid: &[usize]) -> Result<LimitReport> {
    check_prob("p", p)?;
    let mut ns = n_grid.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let mut rows = Vec::with_capacity(ns.len());
    for &n in &ns {
        let s = seller_worst_params(n, p)?;
        let b = buyer_optimal_params(n, p)?;
        rows.push(LimitRow {
            n,
            k_seller: s.k,
            k_buyer: b.k,
            top_atom_seller: s.one_minus_theta,
            top_atom_buyer: b.one_minus_theta,
        });
    }
    let k_monotone = rows.windows(2).all(|w| w[1].k_seller >= w[0].k_seller && w[1].k_buyer >= w[0].k_buyer);
    let atoms_monotone = rows
        .windows(2)
        .all(|w| w[1].top_atom_seller <= w[0].top_atom_seller && w[1].top_atom_buyer <= w[0].top_atom_buyer);
    Ok(LimitReport { p, rows, k_monotone, atoms_monotone })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seller_worst_two_buyers_half() {
        let s = solve_seller_worst(2, 0.5).unwrap();
        let a = s.params.x_scale;
        assert!((a - a * a.ln() - 0.5).abs() < 1e-13);
        assert!((s.stats.revenue - (2.0 * a - a * a)).abs() < 1e-12);
        assert_eq!(s.params.case, Case::ZeroK);
    }

    #[test]
    fn buyer_optimal_two_buyers() {
        let s = solve_buyer_optimal(2, 0.4).unwrap();
        assert_eq!(s.params.case, Case::MassAtZero);
        assert!((s.params.theta0 - 0.1251).abs() < 1e-3);
        assert!((s.params.theta - 0.8581).abs() < 1e-3);
        assert!((s.stats.buyer_surplus - 0.3082).abs() < 1e-3);
    }

    #[test]
    fn one_buyer_is_degenerate() {
        let t = thresholds(1).unwrap();
        assert_eq!((t.p_s, t.r_b, t.p_b), (1.0, 0.0, 1.0));
        for &p in &[0.1, 0.5, 0.9] {
            let b = buyer_optimal_params(1, p).unwrap();
            assert_eq!((b.theta0, b.k), (0.0, 0.0));
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-6;
        for n in [3usize, 5, 12] {
            let nf = n as f64;
            let l1 = |u: f64| theta_of(u).powi(n as i32 - 1) - log_tail_u(u, n);
            let u = nf.ln() + 0.3;
            let th = theta_of(u);
            let d1 = th.powi(n as i32 - 2) * ((nf - 1.0) - nf * th);
            assert!(((l1(u + h) - l1(u - h)) / (2.0 * h) - d1).abs() < 1e-6);
            let l2 = |u: f64| {
                let t = theta_of(u);
                t.powi(n as i32 - 1) - log_tail_u(u, n) - (-u).exp() * t.powi(n as i32 - 2) * u
            };
            let eps = (-u).exp();
            let d2 = th.powi(n as i32 - 3) * ((nf - 1.0) * th - (nf - 2.0)) * (eps * u - th);
            assert!(((l2(u + h) - l2(u - h)) / (2.0 * h) - d2).abs() < 1e-6);
        }
    }

    #[test]
    fn mean_from_parameters() {
        let s = TwoPointSolution::new(0.2, 0.1, 0.7, Case::MassAtZero);
        let g = two_point_distribution(&s).unwrap();
        assert!((g.mean() - mean_via_f(&s.virtual_values())).abs() < 1e-13);
    }

    #[test]
    fn degenerate_virtual_values_give_p() {
        let f = VirtualValueDist { below_zero: 0.0, points: vec![(0.37, 1.0)] };
        assert!((mean_via_f(&f) - 0.37).abs() < 1e-15);
        let s = TwoPointSolution::from_u(0.0, 0.37, f64::INFINITY, Case::PositiveK);
        let g = two_point_distribution(&s).unwrap();
        assert!((g.mean() - 0.37).abs() < 1e-15);
    }

    #[test]
    fn invalid_inputs() {
        assert!(solve_seller_worst(2, 1.5).is_err());
        assert!(solve_buyer_optimal(0, 0.5).is_err());
        assert!(u_from_mean(0.9, 0.5, 0.0).is_err());
    }
}
