//! Brute-force checks of the closed-form optima and of full revelation in
//! the second-price auction.
//!
//! The two-point grid oracle uses its own mean and objective code (bisection
//! in `theta`, quadrature of `G^n`) so it shares nothing with the solvers
//! beyond the problem statement.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{is_mps, PiecewiseDistribution, MPS_TOL};
use crate::error::{check_buyers, check_prob, Error, Result};
use crate::infodesign::{self, mean_via_f, surplus_via_f, Case, Objective, TwoPointSolution, VirtualValueDist};
use crate::myerson::{iron, second_price_eval};
use crate::numeric::{bisect, integrate};
use crate::stream::SampleStream;

/// Tolerance for "no improvement" in the random search.
pub const IMPROVEMENT_TOL: f64 = 1e-6;

/// Trials are spread over this many independent streams.
pub const PARTITIONS: u64 = 64;

/// Grid search settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Points per axis; at least 64.
    pub resolution: usize,
    /// Refinement rounds after the first pass, each shrinking the box tenfold.
    pub rounds: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { resolution: 64, rounds: 3 }
    }
}

/// Pass/fail record of one checked claim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub claim: String,
    pub status: Status,
    pub max_gap: f64,
    pub trials: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Confirmed,
    Violated,
}

impl VerificationReport {
    pub fn new(claim: impl Into<String>, ok: bool, max_gap: f64, trials: u64) -> Self {
        let status = if ok { Status::Confirmed } else { Status::Violated };
        VerificationReport { claim: claim.into(), status, max_gap, trials }
    }

    pub fn confirmed(&self) -> bool {
        self.status == Status::Confirmed
    }
}

/// `theta` solving the mean constraint by plain bisection, if feasible.
fn oracle_theta(p: f64, theta0: f64, k: f64) -> Option<f64> {
    let m = |t: f64| {
        if t >= 1.0 {
            return k * (1.0 - theta0) - p;
        }
        (1.0 - k) * (1.0 - t) * (1.0 - (1.0 - t).ln() + (1.0 - theta0).ln()) + k * (1.0 - theta0) - p
    };
    if m(theta0) < 0.0 || m(1.0) > 0.0 {
        return None;
    }
    bisect(m, theta0, 1.0).ok()
}

/// Revenue and buyer surplus of a two-point design, from `G` directly.
fn oracle_objectives(n: usize, theta0: f64, k: f64, theta: f64) -> (f64, f64) {
    let ni = n as i32;
    let revenue = 1.0 - k * theta0.powi(ni) - (1.0 - k) * theta.powi(ni);
    let c = (1.0 - theta) * (1.0 - k);
    let x1 = k + c / (1.0 - theta0);
    let pareto = if theta > theta0 {
        c * integrate(|w| w.powi(ni) / ((1.0 - w) * (1.0 - w)), theta0, theta, 1e-14)
    } else {
        0.0
    };
    let total = 1.0 - theta0.powi(ni) * x1.min(1.0) - pareto;
    (revenue, total - revenue)
}

/// Value the designer maximises: minus revenue or buyer surplus.
fn designer_value(objective: Objective, revenue: f64, buyer_surplus: f64) -> f64 {
    match objective {
        Objective::SellerWorst => -revenue,
        Objective::BuyerOptimal => buyer_surplus,
    }
}

/// Best grid point of the two-point class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridIncumbent {
    pub params: TwoPointSolution,
    /// Revenue for the seller-worst objective, buyer surplus otherwise.
    pub value: f64,
    /// Grid spacing of the last round along `theta0` and `k`.
    pub spacing: [f64; 2],
}

/// Grid search over `(theta0, k)` with `theta` eliminated by the mean constraint.
pub fn oracle_two_point(n: usize, p: f64, objective: Objective, spec: GridSpec) -> Result<GridIncumbent> {
    check_buyers(n)?;
    check_prob("p", p)?;
    if spec.resolution < 64 {
        return Err(Error::Domain(format!("grid resolution {} is below 64", spec.resolution)));
    }
    let r = spec.resolution;
    let mut lo = [0.0, 0.0];
    let mut hi = [1.0 - p, p];
    let mut best: Option<(f64, f64, f64, f64)> = None;
    let mut spacing = [0.0; 2];
    for _ in 0..=spec.rounds {
        spacing = [(hi[0] - lo[0]) / (r - 1) as f64, (hi[1] - lo[1]) / (r - 1) as f64];
        let round = (0..r * r)
            .into_par_iter()
            .filter_map(|idx| {
                let t0 = lo[0] + spacing[0] * (idx / r) as f64;
                let k = lo[1] + spacing[1] * (idx % r) as f64;
                let th = oracle_theta(p, t0, k)?;
                let (rev, bs) = oracle_objectives(n, t0, k, th);
                Some((designer_value(objective, rev, bs), t0, k, th))
            })
            .reduce_with(|a, b| if b.0 > a.0 { b } else { a });
        if let Some(c) = round {
            if best.is_none_or(|b| c.0 > b.0) {
                best = Some(c);
            }
        }
        let Some((_, t0, k, _)) = best else {
            return Err(Error::NoConvergence("no feasible grid point".into()));
        };
        let half = [(hi[0] - lo[0]) / 20.0, (hi[1] - lo[1]) / 20.0];
        lo = [(t0 - half[0]).max(0.0), (k - half[1]).max(0.0)];
        hi = [(t0 + half[0]).min(1.0 - p), (k + half[1]).min(p)];
    }
    let (v, t0, k, th) = best.expect("set above");
    let case = match (t0 > 0.0, k > 0.0) {
        (true, _) => Case::MassAtZero,
        (false, true) => Case::PositiveK,
        (false, false) => Case::ZeroK,
    };
    let value = match objective {
        Objective::SellerWorst => -v,
        Objective::BuyerOptimal => v,
    };
    Ok(GridIncumbent { params: TwoPointSolution::new(t0, k, th, case), value, spacing })
}

/// A discrete virtual-value distribution with a mass below zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteF {
    pub below_zero: f64,
    pub values: Vec<f64>,
    pub masses: Vec<f64>,
}

impl DiscreteF {
    pub fn to_virtual_values(&self) -> VirtualValueDist {
        VirtualValueDist {
            below_zero: self.below_zero,
            points: self.values.iter().copied().zip(self.masses.iter().copied()).collect(),
        }
    }

    fn from_params(s: &TwoPointSolution) -> Self {
        DiscreteF { below_zero: s.theta0, values: vec![s.k, 1.0], masses: vec![s.theta - s.theta0, s.one_minus_theta] }
    }

    /// Revenue and buyer surplus through the change of variables.
    pub fn objectives(&self, n: usize) -> (f64, f64) {
        let v = self.to_virtual_values();
        let rev = v.revenue(n);
        (rev, surplus_via_f(&v, n) - rev)
    }

    /// Random draw with `support_points` values, projected onto mean `p` by
    /// moving mass to the top value. `None` if the projection fails.
    fn random(p: f64, support_points: usize, s: &mut SampleStream) -> Option<Self> {
        let below_zero = if s.uniform() < 0.5 { 0.0 } else { s.uniform() * (1.0 - p) };
        let mut values: Vec<f64> = (0..support_points).map(|_| s.uniform()).collect();
        if s.uniform() < 0.5 {
            values[0] = 0.0;
        }
        if s.uniform() < 0.5 {
            values[support_points - 1] = 1.0;
        }
        values.sort_by(f64::total_cmp);
        let raw: Vec<f64> = (0..support_points - 1).map(|_| s.exponential()).collect();
        let raw_sum: f64 = raw.iter().sum();
        let free = 1.0 - below_zero;
        let build = |top: f64| {
            let mut masses: Vec<f64> = raw.iter().map(|m| m / raw_sum * (free - top)).collect();
            masses.push(top);
            DiscreteF { below_zero, values: values.clone(), masses }
        };
        let mean = |top: f64| mean_via_f(&build(top).to_virtual_values()) - p;
        if mean(0.0) > 0.0 || mean(free) < 0.0 {
            return None;
        }
        let top = bisect(mean, 0.0, free).ok()?;
        let f = build(top);
        let ok = (mean_via_f(&f.to_virtual_values()) - p).abs() < 1e-10 && f.masses.iter().all(|&m| m >= 0.0);
        ok.then_some(f)
    }
}

/// Outcome of [`oracle_random_f`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomFReport {
    /// Best feasible draw, or the closed-form incumbent if nothing was drawn.
    pub best: DiscreteF,
    /// Designer value (revenue or buyer surplus) of `best`.
    pub best_value: f64,
    pub incumbent_value: f64,
    /// How far the best draw beats the closed form (negative: it does not).
    pub max_improvement: f64,
    pub trials: u64,
    pub feasible: u64,
}

impl RandomFReport {
    pub fn report(&self, claim: &str) -> VerificationReport {
        VerificationReport::new(claim, self.max_improvement <= IMPROVEMENT_TOL, self.max_improvement, self.trials)
    }
}

/// Random search over richer discrete virtual-value distributions.
/// Trials, feasible draws and best draw of one partition.
type Partition = (u64, u64, Option<(f64, DiscreteF)>);

pub fn oracle_random_f(
    n: usize,
    p: f64,
    objective: Objective,
    trials: u64,
    support_points: usize,
    stream: &SampleStream,
) -> Result<RandomFReport> {
    if support_points < 3 {
        return Err(Error::Domain("support_points must be at least 3".into()));
    }
    let sol = infodesign::solve_params(objective, n, p)?;
    let incumbent = DiscreteF::from_params(&sol);
    let (r0, b0) = incumbent.objectives(n);
    let inc_v = designer_value(objective, r0, b0);
    let per = trials.div_ceil(PARTITIONS);
    let parts: Vec<Partition> = (0..PARTITIONS)
        .into_par_iter()
        .map(|part| {
            let mut s = stream.child(part);
            let start = part * per;
            let end = trials.min(start + per);
            let mut feasible = 0;
            let mut best: Option<(f64, DiscreteF)> = None;
            for _ in start..end {
                let Some(f) = DiscreteF::random(p, support_points, &mut s) else { continue };
                feasible += 1;
                let (r, b) = f.objectives(n);
                let v = designer_value(objective, r, b);
                if best.as_ref().is_none_or(|bb| v > bb.0) {
                    best = Some((v, f));
                }
            }
            (end.saturating_sub(start), feasible, best)
        })
        .collect();
    let mut feasible = 0;
    let mut best: Option<(f64, DiscreteF)> = None;
    for (_, f, b) in parts {
        feasible += f;
        if let Some(b) = b {
            if best.as_ref().is_none_or(|bb| b.0 > bb.0) {
                best = Some(b);
            }
        }
    }
    let sign = match objective {
        Objective::SellerWorst => -1.0,
        Objective::BuyerOptimal => 1.0,
    };
    let (best_v, best_f, improvement) = match best {
        Some((v, f)) => (v, f, v - inc_v),
        None => (inc_v, incumbent, f64::NEG_INFINITY),
    };
    Ok(RandomFReport {
        best: best_f,
        best_value: sign * best_v,
        incumbent_value: sign * inc_v,
        max_improvement: improvement,
        trials,
        feasible,
    })
}

/// Outcome of [`oracle_second_price_mps`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MpsReport {
    /// Ironed virtual values of the prior are nonnegative.
    pub precondition_met: bool,
    pub full_revelation_revenue: f64,
    pub min_garbled_revenue: f64,
    /// Largest amount by which a garbling undercuts full revelation.
    pub max_gap: f64,
    pub trials: u64,
}

impl MpsReport {
    pub fn report(&self, claim: &str, tol: f64) -> VerificationReport {
        VerificationReport::new(claim, self.precondition_met && self.max_gap <= tol, self.max_gap, self.trials)
    }
}

/// Random garbling of a discrete prior: a Markov kernel from atoms to
/// `signals` signals, each signal mapped to its posterior mean.
pub fn random_garbling(h: &PiecewiseDistribution, s: &mut SampleStream) -> Result<PiecewiseDistribution> {
    let atoms: Vec<(f64, f64)> = h.atoms().collect();
    if atoms.is_empty() || (atoms.iter().map(|a| a.1).sum::<f64>() - 1.0).abs() > 1e-12 {
        return Err(Error::Domain("garbling needs a purely discrete prior".into()));
    }
    let signals = 1 + s.index_below(2 * atoms.len());
    let mut q = vec![0.0; signals];
    let mut mu = vec![0.0; signals];
    for &(x, m) in &atoms {
        let row: Vec<f64> = (0..signals).map(|_| s.exponential().powi(2)).collect();
        let total: f64 = row.iter().sum();
        for (j, w) in row.iter().enumerate() {
            q[j] += m * w / total;
            mu[j] += m * w / total * x;
        }
    }
    let post: Vec<(f64, f64)> = q
        .iter()
        .zip(&mu)
        .filter(|(q, _)| **q > 0.0)
        .map(|(q, m)| ((m / q).clamp(atoms[0].0, atoms[atoms.len() - 1].0), *q))
        .collect();
    PiecewiseDistribution::discrete(h.support(), &post)
}

/// Checks that no random garbling lowers the reserve-0 second-price revenue
/// below full revelation.
pub fn oracle_second_price_mps(
    h: &PiecewiseDistribution,
    n: usize,
    trials: u64,
    stream: &SampleStream,
) -> Result<MpsReport> {
    let precondition_met = iron(h)?.min_value() >= -1e-12;
    let full = second_price_eval(h, n, 0.0)?.revenue;
    let per = trials.div_ceil(PARTITIONS);
    let parts = (0..PARTITIONS)
        .into_par_iter()
        .map(|part| -> Result<(f64, f64)> {
            let mut s = stream.child(part);
            let start = part * per;
            let end = trials.min(start + per);
            let mut min_rev = f64::INFINITY;
            let mut gap = f64::NEG_INFINITY;
            for _ in start..end {
                let g = random_garbling(h, &mut s)?;
                if !is_mps(h, &g, MPS_TOL)? {
                    return Err(Error::NoConvergence("garbling failed the spread test".into()));
                }
                let r = second_price_eval(&g, n, 0.0)?.revenue;
                min_rev = min_rev.min(r);
                gap = gap.max(full - r);
            }
            Ok((min_rev, gap))
        })
        .collect::<Result<Vec<_>>>()?;
    let min_garbled_revenue = parts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let max_gap = parts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    Ok(MpsReport { precondition_met, full_revelation_revenue: full, min_garbled_revenue, max_gap, trials })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_objectives_match_solver() {
        for (n, p) in [(2usize, 0.4), (3, 0.7), (5, 0.2)] {
            for obj in [Objective::SellerWorst, Objective::BuyerOptimal] {
                let s = infodesign::solve(obj, n, p).unwrap();
                let th = oracle_theta(p, s.params.theta0, s.params.k).unwrap();
                assert!((th - s.params.theta).abs() < 1e-12);
                let (r, b) = oracle_objectives(n, s.params.theta0, s.params.k, s.params.theta);
                assert!((r - s.stats.revenue).abs() < 1e-10);
                assert!((b - s.stats.buyer_surplus).abs() < 1e-10, "{n} {p} {b} {}", s.stats.buyer_surplus);
            }
        }
    }

    #[test]
    fn grid_finds_seller_worst() {
        let g = oracle_two_point(2, 0.5, Objective::SellerWorst, GridSpec::default()).unwrap();
        assert!(g.params.k < 1e-6);
        assert!((g.value - 0.3385).abs() < 1e-4);
    }

    #[test]
    fn zero_trials_keep_incumbent() {
        let r = oracle_random_f(2, 0.5, Objective::SellerWorst, 0, 3, &SampleStream::new(1, 0)).unwrap();
        assert_eq!(r.best_value, r.incumbent_value);
    }

    #[test]
    fn identity_garbling_is_spread() {
        let h = PiecewiseDistribution::discrete([0.0, 1.0], &[(0.5, 1.0 / 3.0), (0.75, 1.0 / 3.0), (1.0, 1.0 / 3.0)])
            .unwrap();
        let mut s = SampleStream::new(3, 0);
        for _ in 0..20 {
            let g = random_garbling(&h, &mut s).unwrap();
            assert!(is_mps(&h, &g, MPS_TOL).unwrap());
            assert!((g.mean() - h.mean()).abs() < 1e-12);
        }
    }
}
