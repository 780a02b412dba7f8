//! Asymmetric structures: averaging across buyers, two parametric
//! buyer-optimal improvements, asymmetric priors, and the consistency check
//! of an interdependent-value candidate.

use serde::{Deserialize, Serialize};

use crate::dist::PiecewiseDistribution;
use crate::error::{check_buyers, check_prob, Error, Result};
use crate::infodesign::{two_point_distribution, u_from_mean, Case, TwoPointSolution, VirtualValueDist};
use crate::myerson::{iron, optimal_asymmetric, optimal_auction_eval, AuctionStats, BuyerGroup, Method};
use crate::numeric::{brent, integrate_breaks, neg_log1m};
use crate::stream::SampleStream;

/// Mean constraints must hold to this tolerance for solved profiles.
pub const MEAN_TOL: f64 = 1e-10;

/// One buyer's design inside an asymmetric profile.
#[derive(Debug, Clone, PartialEq)]
pub struct BuyerDesign {
    pub p: f64,
    pub params: TwoPointSolution,
    pub distribution: PiecewiseDistribution,
}

impl BuyerDesign {
    /// Solves the buyer's mean constraint for `theta` given `theta0` and `k`.
    pub fn solve(p: f64, theta0: f64, k: f64) -> Result<Self> {
        check_prob("p", p)?;
        let u = u_from_mean(p, theta0, k)?;
        let case = match (theta0 > 0.0, k > 0.0) {
            (true, _) => Case::MassAtZero,
            (false, true) => Case::PositiveK,
            (false, false) => Case::ZeroK,
        };
        let params = TwoPointSolution::from_u(theta0, k, u, case);
        let distribution = two_point_distribution(&params)?;
        if (distribution.mean() - p).abs() > MEAN_TOL {
            return Err(Error::Domain(format!("mean constraint misses {p} by {:e}", distribution.mean() - p)));
        }
        Ok(BuyerDesign { p, params, distribution })
    }
}

/// Per-buyer designs plus the optimal-auction statistics of the profile.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymmetricProfile {
    pub buyers: Vec<BuyerDesign>,
    pub stats: AuctionStats,
}

/// Flat per-buyer record for JSON output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BuyerSummary {
    pub buyer: usize,
    pub p: f64,
    pub theta0: f64,
    pub k: f64,
    pub theta: f64,
    pub x_scale: f64,
}

impl AsymmetricProfile {
    fn evaluate(buyers: Vec<BuyerDesign>, method: Method) -> Result<Self> {
        let profiles = buyers.iter().map(|b| iron(&b.distribution)).collect::<Result<Vec<_>>>()?;
        let stats = optimal_asymmetric(&profiles, method)?;
        Ok(AsymmetricProfile { buyers, stats })
    }

    pub fn buyer_summaries(&self) -> Vec<BuyerSummary> {
        self.buyers
            .iter()
            .enumerate()
            .map(|(i, b)| BuyerSummary {
                buyer: i + 1,
                p: b.p,
                theta0: b.params.theta0,
                k: b.params.k,
                theta: b.params.theta,
                x_scale: b.params.x_scale,
            })
            .collect()
    }

    /// Re-evaluates the same designs with another method.
    pub fn reevaluate(&self, method: Method) -> Result<AuctionStats> {
        let profiles = self.buyers.iter().map(|b| iron(&b.distribution)).collect::<Result<Vec<_>>>()?;
        optimal_asymmetric(&profiles, method)
    }
}

/// Revenue lost by averaging: `integral_0^1 Fbar^n - F1^a F2^b dk` where the
/// first `a = ceil(n/2)` buyers use `f1`, the other `b` use `f2`, and `Fbar`
/// is their pointwise average.
///
/// Both inputs must have the same mean under the change of variables.
pub fn averaging_revenue_gap(f1: &TwoPointSolution, f2: &TwoPointSolution, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain("averaging needs at least two buyers".into()));
    }
    let (v1, v2) = (f1.virtual_values(), f2.virtual_values());
    let (m1, m2) = (crate::infodesign::mean_via_f(&v1), crate::infodesign::mean_via_f(&v2));
    if (m1 - m2).abs() > 1e-9 {
        return Err(Error::Domain(format!("inputs have different means {m1} and {m2}")));
    }
    Ok(averaging_gap_f(&v1, &v2, n))
}

fn averaging_gap_f(v1: &VirtualValueDist, v2: &VirtualValueDist, n: usize) -> f64 {
    let a = n.div_ceil(2);
    let b = n - a;
    let w = b as f64 / n as f64;
    let mut cuts: Vec<f64> = vec![0.0, 1.0];
    cuts.extend(v1.points.iter().chain(&v2.points).map(|p| p.0).filter(|k| (0.0..=1.0).contains(k)));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts.windows(2)
        .map(|c| {
            let (x1, x2) = (v1.cdf(c[0]), v2.cdf(c[0]));
            if x1 == x2 {
                return 0.0;
            }
            let avg = x1 + w * (x2 - x1);
            (c[1] - c[0]) * (avg.powi(n as i32) - x1.powi(a as i32) * x2.powi(b as i32))
        })
        .sum()
}

/// Buyers' surplus for two buyers with `{0, Pareto(0), 1}` designs, using the
/// closed form valid for `theta01 <= theta02`.
pub fn asym_surplus_closed_form(theta01: f64, theta02: f64, theta1: f64, theta2: f64) -> f64 {
    let (u01, u02, u1, u2) = (neg_log1m(theta01), neg_log1m(theta02), neg_log1m(theta1), neg_log1m(theta2));
    2.0 * (1.0 - theta1) * (theta02 - theta2)
        + theta02 * (1.0 - theta1) * (u1 - u01)
        + (2.0 - (1.0 - theta1) * theta02 - theta1 - theta2) * (u2 - u02)
}

/// Result of [`asym_buyer_search_n2`].
#[derive(Debug, Clone, PartialEq)]
pub struct AsymBuyerOutcome {
    pub profile: AsymmetricProfile,
    pub closed_form_surplus: f64,
}

/// Two buyers with masses `theta01 <= theta02` at signal 0 and zero
/// virtual value on the Pareto part; each `theta_i` is pinned by its mean.
pub fn asym_buyer_search_n2(p: f64, theta01: f64, theta02: f64) -> Result<AsymBuyerOutcome> {
    check_prob("p", p)?;
    if !(0.0..1.0).contains(&theta01) || !(0.0..1.0).contains(&theta02) || theta01 > theta02 {
        return Err(Error::Domain(format!("need 0 <= theta01 <= theta02 < 1, got {theta01}, {theta02}")));
    }
    let b1 = BuyerDesign::solve(p, theta01, 0.0)?;
    let b2 = BuyerDesign::solve(p, theta02, 0.0)?;
    let closed_form_surplus = asym_surplus_closed_form(theta01, theta02, b1.params.theta, b2.params.theta);
    let profile = AsymmetricProfile::evaluate(vec![b1, b2], Method::Quadrature)?;
    Ok(AsymBuyerOutcome { profile, closed_form_surplus })
}

/// Coarse random search over `(theta01, theta02)` in the two-buyer class.
///
/// Exploratory only: the class is not known to contain the optimum.
pub fn asym_buyer_random_search(p: f64, trials: usize, stream: &mut SampleStream) -> Result<(f64, f64, f64)> {
    check_prob("p", p)?;
    let top = 1.0 - p;
    let mut best = (0.0, 0.0, f64::NEG_INFINITY);
    for _ in 0..trials {
        let a = stream.uniform() * top;
        let b = stream.uniform() * top;
        let (t01, t02) = if a <= b { (a, b) } else { (b, a) };
        let (Ok(u1), Ok(u2)) = (u_from_mean(p, t01, 0.0), u_from_mean(p, t02, 0.0)) else {
            continue;
        };
        let s = asym_surplus_closed_form(t01, t02, -(-u1).exp_m1(), -(-u2).exp_m1());
        if s > best.2 {
            best = (t01, t02, s);
        }
    }
    Ok(best)
}

/// Result of [`asym_buyer_limit`].
#[derive(Debug, Clone, PartialEq)]
pub struct LimitOutcome {
    /// `theta` as supplied.
    pub theta_input: f64,
    /// `theta` re-solved from the mean constraint at the given `theta0`.
    pub buyer: BuyerDesign,
    /// Mean of the supplied parameters minus `p`.
    pub mean_residual: f64,
    /// `p (1 + theta0 - theta) - (1 - theta)` at the re-solved `theta`.
    pub closed_form_surplus: f64,
    pub stats: AuctionStats,
}

/// Tolerance on the mean of supplied `(theta0, theta)` before re-solving.
pub const LIMIT_INPUT_TOL: f64 = 1e-3;

/// Buyer 1 gets `{0, Pareto(p), 1}`, buyers `2..n` are degenerate at `p`.
///
/// Supplied parameters may be rounded: the mean may miss `p` by up to
/// [`LIMIT_INPUT_TOL`], after which `theta` is re-solved exactly.
pub fn asym_buyer_limit(p: f64, theta0: f64, theta: f64, n: usize) -> Result<LimitOutcome> {
    check_prob("p", p)?;
    check_buyers(n)?;
    if !(0.0..1.0).contains(&theta0) || !(theta0..=1.0).contains(&theta) {
        return Err(Error::Domain(format!("need 0 <= theta0 <= theta <= 1, got {theta0}, {theta}")));
    }
    let supplied = TwoPointSolution::new(theta0, p, theta, Case::MassAtZero);
    let mean_residual = crate::infodesign::mean_via_f(&supplied.virtual_values()) - p;
    if mean_residual.abs() > LIMIT_INPUT_TOL {
        return Err(Error::Domain(format!("mean constraint violated by {mean_residual:e}")));
    }
    let buyer = BuyerDesign::solve(p, theta0, p)?;
    let t = buyer.params.theta;
    let closed_form_surplus = p * (1.0 + theta0 - t) - buyer.params.one_minus_theta;
    let mut groups = vec![BuyerGroup::new(iron(&buyer.distribution)?, 1)];
    if n > 1 {
        let flat = PiecewiseDistribution::degenerate(p, [0.0, 1.0])?;
        groups.push(BuyerGroup::new(iron(&flat)?, n - 1));
    }
    let stats = optimal_auction_eval(&groups, Method::Quadrature)?;
    Ok(LimitOutcome { theta_input: theta, buyer, mean_residual, closed_form_surplus, stats })
}

/// `x` in `(0, 1]` with `x - x log x = p`.
pub fn pareto_scale(p: f64) -> Result<f64> {
    check_prob("p", p)?;
    brent(|x| x - x * x.ln() - p, f64::MIN_POSITIVE, 1.0)
}

/// Seller-worst design for two buyers with different prior means:
/// each buyer gets `k = 0` and a Pareto scale `x_i` with `x_i - x_i log x_i = p_i`.
pub fn asym_prior_seller_worst(p1: f64, p2: f64) -> Result<AsymmetricProfile> {
    let buyers = vec![BuyerDesign::solve(p1, 0.0, 0.0)?, BuyerDesign::solve(p2, 0.0, 0.0)?];
    AsymmetricProfile::evaluate(buyers, Method::Quadrature)
}

/// Revenue `1 - (1-k) theta1 theta2` of the common-`k` family, for each `k`
/// below `min(p1, p2)`.
pub fn asym_prior_k_scan(p1: f64, p2: f64, ks: &[f64]) -> Result<Vec<(f64, f64)>> {
    check_prob("p1", p1)?;
    check_prob("p2", p2)?;
    ks.iter()
        .filter(|&&k| k >= 0.0 && k < p1.min(p2))
        .map(|&k| {
            let t1 = -(-u_from_mean(p1, 0.0, k)?).exp_m1();
            let t2 = -(-u_from_mean(p2, 0.0, k)?).exp_m1();
            Ok((k, 1.0 - (1.0 - k) * t1 * t2))
        })
        .collect()
}

/// Consistency check of the interdependent-value candidate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub p: f64,
    /// Root of `a (1 - log a + log^2(a) / 2) = p`.
    pub a: f64,
    /// `a (a - 2 log a)`.
    pub lhs: f64,
    /// `p^2`.
    pub rhs: f64,
    /// The double integral behind `lhs`, by quadrature.
    pub lhs_quadrature: f64,
    pub violated: bool,
}

pub fn interdependence_consistency(p: f64) -> Result<ConsistencyReport> {
    check_prob("p", p)?;
    let g = |a: f64| {
        let l = a.ln();
        a * (1.0 - l + 0.5 * l * l) - p
    };
    let a = brent(g, 1e-300, 1.0)?;
    let lhs = a * (a - 2.0 * a.ln());
    let rhs = p * p;
    let inner = |t1: f64| {
        if t1 <= a {
            return 1.0;
        }
        let c = a / t1;
        integrate_breaks(|t2| (c / t2).min(1.0).powi(2), &[0.0, c, 1.0], 1e-15, 1e-14).value
    };
    let lhs_quadrature = integrate_breaks(inner, &[0.0, a, 1.0], 1e-14, 1e-13).value;
    Ok(ConsistencyReport { p, a, lhs, rhs, lhs_quadrature, violated: lhs > rhs + 1e-12 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn asym_n2_reference_point() {
        let o = asym_buyer_search_n2(0.4, 0.0, 0.3).unwrap();
        let b = &o.profile.buyers;
        assert!((b[0].params.theta - 0.8677).abs() < 1e-3);
        assert!((b[1].params.theta - 0.8374).abs() < 1e-3);
        assert!((o.closed_form_surplus - 0.3107).abs() < 1e-3);
        assert!((o.profile.stats.buyer_surplus - o.closed_form_surplus).abs() < 1e-9);
    }

    #[test]
    fn symmetric_input_matches_symmetric_solver() {
        let s = crate::infodesign::solve_buyer_optimal(2, 0.4).unwrap();
        let t0 = s.params.theta0;
        let o = asym_buyer_search_n2(0.4, t0, t0).unwrap();
        assert!((o.closed_form_surplus - s.stats.buyer_surplus).abs() < 1e-10);
    }

    #[test]
    fn limit_profile() {
        for n in [2usize, 10] {
            let o = asym_buyer_limit(0.4, 0.4751, 0.8661, n).unwrap();
            assert!((o.stats.buyer_surplus - o.closed_form_surplus).abs() < 1e-9, "{n}");
            assert!((o.closed_form_surplus - 0.1097).abs() < 1e-3);
        }
        assert!(asym_buyer_limit(0.4, 0.4751, 0.95, 3).is_err());
    }

    #[test]
    fn averaging_gap_zero_for_identical() {
        let f = TwoPointSolution::from_u(0.0, 0.2, u_from_mean(0.5, 0.0, 0.2).unwrap(), Case::PositiveK);
        assert_eq!(averaging_revenue_gap(&f, &f, 3).unwrap(), 0.0);
        let g = TwoPointSolution::from_u(0.0, 0.1, u_from_mean(0.5, 0.0, 0.1).unwrap(), Case::PositiveK);
        assert!(averaging_revenue_gap(&f, &g, 2).unwrap() > 0.0);
    }

    #[test]
    fn asym_prior_symmetric_reduces() {
        let a = asym_prior_seller_worst(0.5, 0.5).unwrap();
        let s = crate::infodesign::solve_seller_worst(2, 0.5).unwrap();
        assert!((a.stats.revenue - s.stats.revenue).abs() < 1e-10);
        let x = pareto_scale(0.5).unwrap();
        assert!((a.stats.revenue - (2.0 * x - x * x)).abs() < 1e-10);
    }

    #[test]
    fn consistency_violated() {
        let r = interdependence_consistency(0.5).unwrap();
        assert!(r.violated);
        assert!((r.lhs - r.lhs_quadrature).abs() < 1e-8);
    }
}
