//! Registry of checkable claims, each reduced to a [`VerificationReport`].

use rayon::prelude::*;

use crate::asymmetric::{
    asym_buyer_limit, asym_buyer_search_n2, asym_prior_k_scan, asym_prior_seller_worst, averaging_revenue_gap,
    interdependence_consistency, pareto_scale,
};
use crate::error::{Error, Result};
use crate::fixtures;
use crate::infodesign::{
    limit_behavior, mean_via_f, solve, solve_buyer_optimal, solve_seller_worst, surplus_via_f, thresholds,
    two_point_distribution, u_from_mean, Case, Objective, TwoPointSolution,
};
use crate::myerson::{iron, optimal_symmetric, second_price_eval, Method};
use crate::oracles::{oracle_random_f, oracle_second_price_mps, oracle_two_point, GridSpec, VerificationReport};
use crate::stream::SampleStream;

/// Settings shared by all claims.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Overrides the number of random trials in property claims.
    pub trials: Option<u64>,
    /// Shifts every golden constant so that the suite must fail.
    pub corrupt: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { seed: 2024, trials: None, corrupt: false }
    }
}

impl VerifyOptions {
    fn golden(&self, v: f64) -> f64 {
        if self.corrupt {
            v + 0.01
        } else {
            v
        }
    }

    fn trials_or(&self, default: u64) -> u64 {
        self.trials.unwrap_or(default)
    }

    fn stream(&self, tag: u64) -> SampleStream {
        SampleStream::new(self.seed, tag)
    }
}

/// Claim names in suite order.
pub const CLAIMS: &[&str] = &[
    "seller-worst-n2",
    "buyer-optimal-n2",
    "asym-n2",
    "asym-limit",
    "irexample",
    "above-full-revelation",
    "two-point-oracle",
    "random-f-oracle",
    "regimes",
    "change-of-variables",
    "limit",
    "averaging",
    "interdependence",
    "second-price-mps",
    "asym-prior",
    "asym-boundary",
];

pub fn run_claim(name: &str, opts: &VerifyOptions) -> Result<VerificationReport> {
    match name {
        "seller-worst-n2" => seller_worst_n2(opts),
        "buyer-optimal-n2" => buyer_optimal_n2(opts),
        "asym-n2" => asym_n2(opts),
        "asym-limit" => asym_limit(opts),
        "irexample" => irexample(opts),
        "above-full-revelation" => above_full_revelation(opts),
        "two-point-oracle" => two_point_grid(opts),
        "random-f-oracle" => random_f(opts),
        "regimes" => regimes(opts),
        "change-of-variables" => change_of_variables(opts),
        "limit" => limit(opts),
        "averaging" => averaging(opts),
        "interdependence" => interdependence(opts),
        "second-price-mps" => second_price_mps(opts),
        "asym-prior" => asym_prior(opts),
        "asym-boundary" => asym_boundary(opts),
        other => Err(Error::Domain(format!("unknown claim {other:?}; known: {}", CLAIMS.join(", ")))),
    }
}

pub fn run_all(opts: &VerifyOptions) -> Result<Vec<VerificationReport>> {
    CLAIMS.iter().map(|c| run_claim(c, opts)).collect()
}

fn seller_worst_n2(o: &VerifyOptions) -> Result<VerificationReport> {
    let s = solve_seller_worst(2, 0.5)?;
    let a = pareto_scale(0.5)?;
    let exact = 2.0 * a - a * a;
    let trials = o.trials_or(1_000_000);
    let mc = optimal_symmetric(&iron(&s.distribution)?, 2, Method::MonteCarlo { trials, seed: o.seed })?;
    let se = mc.std_error.map_or(f64::INFINITY, |e| e.revenue);
    let gap = (s.stats.revenue - o.golden(0.3385)).abs();
    let ok = (s.stats.revenue - exact).abs() < 1e-12 && gap <= 5e-4 && (mc.revenue - exact).abs() <= 3.0 * se;
    Ok(VerificationReport::new("seller-worst-n2", ok, gap, trials))
}

fn buyer_optimal_n2(o: &VerifyOptions) -> Result<VerificationReport> {
    let s = solve_buyer_optimal(2, 0.4)?;
    let gap = [
        (s.params.theta0 - o.golden(0.1251)).abs(),
        (s.params.theta - o.golden(0.8581)).abs(),
        (s.stats.buyer_surplus - o.golden(0.3082)).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    Ok(VerificationReport::new("buyer-optimal-n2", gap <= 1e-3, gap, 1))
}

fn asym_n2(o: &VerifyOptions) -> Result<VerificationReport> {
    let a = asym_buyer_search_n2(0.4, 0.0, 0.3)?;
    let sym = solve_buyer_optimal(2, 0.4)?.stats.buyer_surplus;
    let b = &a.profile.buyers;
    let gap = [
        (b[0].params.theta - o.golden(0.8677)).abs(),
        (b[1].params.theta - o.golden(0.8374)).abs(),
        (a.closed_form_surplus - o.golden(0.3107)).abs(),
        (a.closed_form_surplus - a.profile.stats.buyer_surplus).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    Ok(VerificationReport::new("asym-n2", gap <= 1e-3 && a.closed_form_surplus > sym, gap, 1))
}

fn asym_limit(o: &VerifyOptions) -> Result<VerificationReport> {
    let a = asym_buyer_limit(0.4, 0.4751, 0.8661, 10)?;
    let b = asym_buyer_limit(0.4, 0.4751, 0.8661, 10_000)?;
    let gap = (a.stats.buyer_surplus - o.golden(0.1097)).abs().max((b.stats.buyer_surplus - o.golden(0.1097)).abs());
    let same = (a.stats.buyer_surplus - b.stats.buyer_surplus).abs() < 1e-12;
    Ok(VerificationReport::new("asym-limit", gap <= 1e-3 && same, gap, 2))
}

fn irexample(o: &VerifyOptions) -> Result<VerificationReport> {
    let g = fixtures::irregular();
    let prof = iron(&g)?;
    let pointwise = (0..1000)
        .map(|i| {
            let t = (i as f64 + 0.5) / 1000.0;
            (prof.value_at_quantile(t) - fixtures::irregular_ironed_value(t)).abs()
        })
        .fold(0.0, f64::max);
    let opt = optimal_symmetric(&prof, 2, Method::ClosedForm)?.revenue;
    let sp = second_price_eval(&g, 2, 0.0)?.revenue;
    let gap =
        [pointwise, (opt - o.golden(19.0 / 16.0)).abs(), (sp - 32.0 / 27.0).abs(), (opt - sp - 1.0 / 432.0).abs()]
            .into_iter()
            .fold(0.0, f64::max);
    Ok(VerificationReport::new("irexample", gap <= 1e-9, gap, 1000))
}

fn above_full_revelation(o: &VerifyOptions) -> Result<VerificationReport> {
    let rev = solve_seller_worst(2, 0.5)?.stats.revenue;
    let full = o.golden(0.25);
    Ok(VerificationReport::new("above-full-revelation", rev > full, full - rev, 1))
}

/// The `n x p` grid used by the oracle and regime claims.
pub fn standard_grid() -> Vec<(usize, f64)> {
    (1..=5usize).flat_map(|n| (1..=19).map(move |i| (n, i as f64 * 0.05))).collect()
}

fn two_point_grid(_o: &VerifyOptions) -> Result<VerificationReport> {
    let spec = GridSpec::default();
    let cases: Vec<(usize, f64, Objective)> = standard_grid()
        .into_iter()
        .flat_map(|(n, p)| [(n, p, Objective::SellerWorst), (n, p, Objective::BuyerOptimal)])
        .collect();
    let gaps = cases
        .par_iter()
        .map(|&(n, p, obj)| -> Result<(f64, bool)> {
            let s = solve(obj, n, p)?;
            let g = oracle_two_point(n, p, obj, spec)?;
            let gap = (g.value - s.objective_value()).abs();
            let res = g.spacing[0].max(g.spacing[1]);
            let near =
                (g.params.theta0 - s.params.theta0).abs() <= 2.0 * res && (g.params.k - s.params.k).abs() <= 2.0 * res;
            Ok((gap, near && gap <= 1e-8))
        })
        .collect::<Result<Vec<_>>>()?;
    let max_gap = gaps.iter().map(|g| g.0).fold(0.0, f64::max);
    let ok = gaps.iter().all(|g| g.1);
    Ok(VerificationReport::new("two-point-oracle", ok, max_gap, cases.len() as u64))
}

fn random_f(o: &VerifyOptions) -> Result<VerificationReport> {
    let trials = o.trials_or(10_000);
    let configs = [
        (2, 0.5, Objective::SellerWorst),
        (2, 0.4, Objective::BuyerOptimal),
        (1, 0.3, Objective::BuyerOptimal),
        (3, 0.9, Objective::SellerWorst),
        (3, 0.95, Objective::BuyerOptimal),
        (4, 0.2, Objective::BuyerOptimal),
        (5, 0.6, Objective::SellerWorst),
    ];
    let mut worst = f64::NEG_INFINITY;
    let mut ok = true;
    for (i, &(n, p, obj)) in configs.iter().enumerate() {
        let r = oracle_random_f(n, p, obj, trials, 4, &o.stream(100 + i as u64))?.report("random-f-oracle");
        worst = worst.max(r.max_gap);
        ok &= r.confirmed();
    }
    Ok(VerificationReport::new("random-f-oracle", ok, worst, trials * configs.len() as u64))
}

fn regimes(_o: &VerifyOptions) -> Result<VerificationReport> {
    let mut ok = true;
    let mut bad = 0u64;
    for (n, p) in standard_grid() {
        let s = solve_seller_worst(n, p)?;
        let b = solve_buyer_optimal(n, p)?;
        let th = thresholds(n)?;
        let checks = [
            (s.stats.sale_probability - 1.0).abs() < 1e-12,
            (b.stats.sale_probability < 1.0 - 1e-12) == (n >= 2 && p < th.r_b),
            !(s.params.k > 0.0 && b.params.k > 0.0) || b.params.k < s.params.k,
            th.r_b <= th.p_b,
        ];
        for c in checks {
            ok &= c;
            bad += u64::from(!c);
        }
    }
    let ts = (3..=50).map(thresholds).collect::<Result<Vec<_>>>()?;
    for w in ts.windows(2) {
        let c = w[1].p_s < w[0].p_s && w[1].r_b < w[0].r_b && w[1].p_b < w[0].p_b && w[0].r_b <= w[0].p_b;
        ok &= c;
        bad += u64::from(!c);
    }
    Ok(VerificationReport::new("regimes", ok, bad as f64, standard_grid().len() as u64 + 48))
}

/// Random feasible two-point parameters; the mean is whatever they imply.
pub fn random_two_point(s: &mut SampleStream) -> TwoPointSolution {
    let theta0 = if s.uniform() < 0.3 { 0.0 } else { 0.9 * s.uniform() };
    let k = if s.uniform() < 0.3 { 0.0 } else { 0.9 * s.uniform() };
    let theta = theta0 + (1.0 - theta0) * s.uniform();
    let case = match (theta0 > 0.0, k > 0.0) {
        (true, _) => Case::MassAtZero,
        (false, true) => Case::PositiveK,
        (false, false) => Case::ZeroK,
    };
    TwoPointSolution::new(theta0, k, theta, case)
}

fn change_of_variables(o: &VerifyOptions) -> Result<VerificationReport> {
    let trials = o.trials_or(1000);
    let mut s = o.stream(200);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let params = random_two_point(&mut s);
        let n = 1 + s.index_below(6);
        let g = two_point_distribution(&params)?;
        let f = params.virtual_values();
        worst = worst.max((mean_via_f(&f) - g.mean_by_quadrature()).abs());
        worst = worst.max((surplus_via_f(&f, n) - g.expected_max(n)).abs());
    }
    Ok(VerificationReport::new("change-of-variables", worst <= 1e-10, worst, trials))
}

fn limit(_o: &VerifyOptions) -> Result<VerificationReport> {
    let grid = [3usize, 5, 10, 30, 100, 300, 1000];
    let r = limit_behavior(0.4, &grid)?;
    let last = r.rows.last().expect("nonempty grid");
    let gap = (0.4 - last.k_seller).abs().max((0.4 - last.k_buyer).abs());
    let to_zero = last.top_atom_seller < 1e-3 && last.top_atom_buyer < 1e-3;
    let ok = r.k_monotone && r.atoms_monotone && gap <= 0.05 && to_zero;
    Ok(VerificationReport::new("limit", ok, gap, grid.len() as u64))
}

fn averaging(o: &VerifyOptions) -> Result<VerificationReport> {
    let trials = o.trials_or(1000);
    let mut s = o.stream(300);
    let mut ok = true;
    let mut min_gap = f64::INFINITY;
    let mut done = 0;
    while done < trials {
        let p = 0.05 + 0.9 * s.uniform();
        let n = 2 + s.index_below(5);
        let draw = |s: &mut SampleStream| -> Option<TwoPointSolution> {
            let theta0 = if s.uniform() < 0.5 { 0.0 } else { s.uniform() * (1.0 - p) };
            let k = if s.uniform() < 0.5 { 0.0 } else { s.uniform() * p };
            let u = u_from_mean(p, theta0, k).ok()?;
            Some(TwoPointSolution::from_u(theta0, k, u, Case::ZeroK))
        };
        let (Some(a), Some(b)) = (draw(&mut s), draw(&mut s)) else { continue };
        done += 1;
        let g = averaging_revenue_gap(&a, &b, n)?;
        let same = averaging_revenue_gap(&a, &a, n)?;
        let distinct = (a.theta0 - b.theta0).abs() > 1e-9 || (a.k - b.k).abs() > 1e-9;
        ok &= same == 0.0 && if distinct { g > 0.0 } else { g.abs() <= 1e-12 };
        if distinct {
            min_gap = min_gap.min(g);
        }
    }
    Ok(VerificationReport::new("averaging", ok, -min_gap, trials))
}

fn interdependence(_o: &VerifyOptions) -> Result<VerificationReport> {
    let mut ok = true;
    let mut worst = 0.0f64;
    for i in 1..=19 {
        let r = interdependence_consistency(i as f64 * 0.05)?;
        ok &= r.violated;
        worst = worst.max((r.lhs - r.lhs_quadrature).abs());
    }
    Ok(VerificationReport::new("interdependence", ok && worst <= 1e-8, worst, 19))
}

fn second_price_mps(o: &VerifyOptions) -> Result<VerificationReport> {
    let trials = o.trials_or(1000);
    let mut ok = true;
    let mut worst = f64::NEG_INFINITY;
    for (i, h) in fixtures::regular_discrete_priors().iter().enumerate() {
        let r = oracle_second_price_mps(h, 2, trials, &o.stream(400 + i as u64))?;
        ok &= r.precondition_met && r.max_gap <= 1e-9;
        worst = worst.max(r.max_gap);
    }
    Ok(VerificationReport::new("second-price-mps", ok, worst, 3 * trials))
}

fn asym_prior(_o: &VerifyOptions) -> Result<VerificationReport> {
    let sym = asym_prior_seller_worst(0.5, 0.5)?.stats.revenue;
    let mut gap = (sym - solve_seller_worst(2, 0.5)?.stats.revenue).abs();
    let a = asym_prior_seller_worst(0.3, 0.6)?;
    let (x1, x2) = (pareto_scale(0.3)?, pareto_scale(0.6)?);
    gap = gap.max((a.stats.revenue - (1.0 - (1.0 - x1) * (1.0 - x2))).abs());
    let ks: Vec<f64> = (0..=50).map(|i| i as f64 * 0.01).collect();
    let scan = asym_prior_k_scan(0.3, 0.6, &ks)?;
    let k_zero_best = scan.iter().all(|&(_, r)| r >= scan[0].1 - 1e-12);
    Ok(VerificationReport::new("asym-prior", gap <= 1e-10 && k_zero_best, gap, scan.len() as u64))
}

fn asym_boundary(_o: &VerifyOptions) -> Result<VerificationReport> {
    let (p, t02) = (0.4, 0.3);
    let v = (0..=30)
        .map(|i| Ok(asym_buyer_search_n2(p, t02 * i as f64 / 30.0, t02)?.closed_form_surplus))
        .collect::<Result<Vec<f64>>>()?;
    let best = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let interior = v[1..v.len() - 1].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ok = best == v[0] || best == v[v.len() - 1];
    Ok(VerificationReport::new("asym-boundary", ok, interior - best, v.len() as u64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corrupt_constant_is_caught() {
        let o = VerifyOptions { corrupt: true, ..Default::default() };
        assert!(!run_claim("irexample", &o).unwrap().confirmed());
        assert!(run_claim("irexample", &VerifyOptions::default()).unwrap().confirmed());
    }

    #[test]
    fn unknown_claim() {
        assert!(run_claim("nope", &VerifyOptions::default()).is_err());
    }

    #[test]
    fn solve_dispatch() {
        let a = crate::infodesign::solve(Objective::SellerWorst, 3, 0.5).unwrap();
        assert_eq!(a.params.case, Case::PositiveK);
    }
}
