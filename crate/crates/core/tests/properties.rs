use auction_design::infodesign::two_point_distribution;
use auction_design::{
    iron, is_mps, optimal_symmetric, second_price_eval, solve, Case, Method, Objective, PiecewiseDistribution,
    SampleStream, TwoPointSolution,
};
use proptest::prelude::*;

fn two_point() -> impl Strategy<Value = TwoPointSolution> {
    (prop_oneof![Just(0.0), 0.0..0.9], prop_oneof![Just(0.0), 0.0..0.9], 0.0..1.0f64).prop_map(|(t0, k, w)| {
        let theta = t0 + (1.0 - t0) * w;
        let case = match (t0 > 0.0, k > 0.0) {
            (true, _) => Case::MassAtZero,
            (false, true) => Case::PositiveK,
            (false, false) => Case::ZeroK,
        };
        TwoPointSolution::new(t0, k, theta, case)
    })
}

/// Discrete distribution on `[0, 1]` with up to six atoms.
fn discrete() -> impl Strategy<Value = PiecewiseDistribution> {
    prop::collection::vec((0.0..=1.0f64, 0.05..1.0f64), 1..6).prop_map(|raw| {
        let total: f64 = raw.iter().map(|a| a.1).sum();
        let mut atoms: Vec<(f64, f64)> = raw.iter().map(|&(x, m)| (x, m / total)).collect();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        atoms.dedup_by(|b, a| {
            let same = (a.0 - b.0).abs() < 1e-6;
            if same {
                a.1 += b.1;
            }
            same
        });
        PiecewiseDistribution::discrete([0.0, 1.0], &atoms).unwrap()
    })
}

fn objective() -> impl Strategy<Value = Objective> {
    prop_oneof![Just(Objective::SellerWorst), Just(Objective::BuyerOptimal)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn cdf_is_a_distribution(s in two_point(), xs in prop::collection::vec(0.0..=1.0f64, 2..20)) {
        let g = two_point_distribution(&s).unwrap();
        prop_assert!(g.cdf(1.0) == 1.0);
        prop_assert!(g.cdf_left(0.0) == 0.0);
        let mut xs = xs;
        xs.sort_by(f64::total_cmp);
        for w in xs.windows(2) {
            prop_assert!(g.cdf(w[0]) <= g.cdf(w[1]) + 1e-15);
            prop_assert!(g.cdf_left(w[1]) <= g.cdf(w[1]) + 1e-15);
        }
        prop_assert!((g.mean() - g.mean_by_quadrature()).abs() < 1e-10);
    }

    #[test]
    fn quantile_inverts_cdf(s in two_point(), tau in 0.0..1.0f64) {
        let g = two_point_distribution(&s).unwrap();
        let x = g.quantile(tau);
        prop_assert!(g.cdf(x) >= tau - 1e-12);
        prop_assert!(g.cdf_left(x) <= tau + 1e-12);
    }

    #[test]
    fn samples_pass_ks(s in two_point(), seed in any::<u64>()) {
        let g = two_point_distribution(&s).unwrap();
        let m = 4000;
        let mut xs = g.sample(&mut SampleStream::new(seed, 0), m);
        xs.sort_by(f64::total_cmp);
        let mut d = 0.0f64;
        let mut i = 0;
        while i < xs.len() {
            let mut j = i;
            while j < xs.len() && xs[j] == xs[i] {
                j += 1;
            }
            d = d.max((g.cdf_left(xs[i]) - i as f64 / m as f64).abs());
            d = d.max((g.cdf(xs[i]) - j as f64 / m as f64).abs());
            i = j;
        }
        // 1e-4 level critical value; atoms only make the test conservative
        prop_assert!(d < 2.0 / (m as f64).sqrt(), "ks {d}");
    }

    #[test]
    fn mps_is_reflexive(s in two_point()) {
        let g = two_point_distribution(&s).unwrap();
        prop_assert!(is_mps(&g, &g, 1e-9).unwrap());
    }

    #[test]
    fn mps_chain_is_transitive(n in 1usize..8, p in 0.02..0.98f64, obj in objective()) {
        let g = solve(obj, n, p).unwrap().distribution;
        let full = PiecewiseDistribution::binary(p).unwrap();
        let none = PiecewiseDistribution::degenerate(p, [0.0, 1.0]).unwrap();
        prop_assert!(is_mps(&full, &g, 1e-9).unwrap());
        prop_assert!(is_mps(&g, &none, 1e-9).unwrap());
        prop_assert!(is_mps(&full, &none, 1e-9).unwrap());
        prop_assert!(!is_mps(&none, &full, 1e-9).unwrap());
    }

    #[test]
    fn solutions_are_feasible(n in 1usize..12, p in 0.01..0.99f64, obj in objective()) {
        let s = solve(obj, n, p).unwrap();
        prop_assert!((s.distribution.mean() - p).abs() < 1e-9);
        prop_assert!(s.params.theta0 >= 0.0 && s.params.k >= 0.0 && s.params.theta <= 1.0);
        prop_assert!(s.stats.revenue >= -1e-12);
        prop_assert!(s.stats.buyer_surplus >= -1e-12);
        prop_assert!((s.stats.revenue + s.stats.buyer_surplus - s.stats.total_surplus).abs() < 1e-9);
    }

    #[test]
    fn seller_worst_below_buyer_optimal_revenue(n in 1usize..8, p in 0.02..0.98f64) {
        let sw = solve(Objective::SellerWorst, n, p).unwrap().stats;
        let bo = solve(Objective::BuyerOptimal, n, p).unwrap().stats;
        prop_assert!(sw.revenue <= bo.revenue + 1e-9);
        prop_assert!(bo.buyer_surplus >= sw.buyer_surplus - 1e-9);
    }

    #[test]
    fn ironed_values_are_monotone(g in discrete()) {
        let prof = iron(&g).unwrap();
        let mut last = f64::NEG_INFINITY;
        for i in 0..200 {
            let v = prof.value_at_quantile((i as f64 + 0.5) / 200.0);
            prop_assert!(v >= last - 1e-12);
            last = v;
        }
        // the top type keeps its own value
        prop_assert!(prof.value_at_quantile(1.0 - 1e-12) <= g.quantile(1.0) + 1e-9);
    }

    #[test]
    fn optimal_beats_second_price(g in discrete(), n in 1usize..5) {
        let opt = optimal_symmetric(&iron(&g).unwrap(), n, Method::ClosedForm).unwrap();
        let sp = second_price_eval(&g, n, 0.0).unwrap();
        prop_assert!(opt.revenue >= sp.revenue - 1e-9);
        prop_assert!(opt.total_surplus <= sp.total_surplus + 1e-9);
    }

    #[test]
    fn spreading_raises_expected_max(s in two_point(), n in 1usize..8) {
        let g = two_point_distribution(&s).unwrap();
        let p = g.mean();
        let full = PiecewiseDistribution::binary(p).unwrap();
        prop_assert!(g.expected_max(n) <= full.expected_max(n) + 1e-10);
        prop_assert!(g.expected_max(n) >= p - 1e-10);
    }
}
