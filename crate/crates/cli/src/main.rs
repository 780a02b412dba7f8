use std::path::PathBuf;
use std::process::ExitCode;

use auction_design::asymmetric::{
    asym_buyer_limit, asym_buyer_random_search, asym_buyer_search_n2, asym_prior_k_scan, asym_prior_seller_worst,
    interdependence_consistency,
};
use auction_design::infodesign::{solve, thresholds, DesignSummary, Objective};
use auction_design::myerson::reserve_scan;
use auction_design::verify::{run_claim, VerifyOptions, CLAIMS};
use auction_design::{iron, optimal_symmetric, second_price_eval, Method, PiecewiseDistribution, SampleStream};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;

mod output;

use output::{Format, Sink};

#[derive(Parser)]
#[command(name = "auction-design", version, about = "Seller-worst and buyer-optimal information design for auctions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Clone)]
struct Common {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for every random stream.
    #[arg(long, global = true, env = "AUCTION_DESIGN_SEED", default_value_t = 2024)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    SellerWorst,
    BuyerOptimal,
}

impl From<ObjectiveArg> for Objective {
    fn from(o: ObjectiveArg) -> Self {
        match o {
            ObjectiveArg::SellerWorst => Objective::SellerWorst,
            ObjectiveArg::BuyerOptimal => Objective::BuyerOptimal,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve one symmetric design.
    Solve {
        #[arg(long, value_enum, default_value_t = ObjectiveArg::SellerWorst)]
        objective: ObjectiveArg,
        #[arg(short, long)]
        n: usize,
        #[arg(short, long)]
        p: f64,
    },
    /// Solve both designs over an (n, p) grid; one row per cell.
    Sweep {
        /// Restrict to one objective (default: both).
        #[arg(long, value_enum)]
        objective: Option<ObjectiveArg>,
        /// Buyer counts: `1,2,3` or `lo:hi`.
        #[arg(long, default_value = "1:5")]
        n_grid: String,
        /// Means as `lo:hi:step`.
        #[arg(long, default_value = "0.05:0.95:0.05")]
        p_grid: String,
    },
    /// Regime thresholds p_s, r_b and p_b.
    Thresholds {
        #[arg(long, default_value = "1:10")]
        n_grid: String,
    },
    /// Monte Carlo evaluation of a solved design next to its closed form.
    Simulate {
        #[arg(long, value_enum, default_value_t = ObjectiveArg::SellerWorst)]
        objective: ObjectiveArg,
        #[arg(short, long)]
        n: usize,
        #[arg(short, long)]
        p: f64,
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
    },
    /// Run the claim suite; exits 1 if any claim is violated.
    Verify {
        /// Only these claims (repeatable); default is all.
        #[arg(long)]
        claim: Vec<String>,
        /// Override the number of random trials.
        #[arg(long)]
        trials: Option<u64>,
        /// Shift golden constants (negative control).
        #[arg(long, hide = true)]
        corrupt_constants: bool,
        /// List claim names and exit.
        #[arg(long)]
        list: bool,
    },
    /// Revenue and surplus of seller-worst, buyer-optimal, full and no disclosure.
    Compare {
        #[arg(short, long)]
        n: usize,
        #[arg(short, long)]
        p: f64,
    },
    /// Asymmetric analyses.
    Asym {
        #[command(subcommand)]
        which: AsymCommand,
    },
    /// Evaluate a distribution given as JSON.
    Eval {
        /// JSON file with `support` and `pieces`.
        #[arg(long)]
        dist: PathBuf,
        #[arg(short, long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = AuctionArg::Optimal)]
        auction: AuctionArg,
        #[arg(long, value_enum, default_value_t = MethodArg::ClosedForm)]
        method: MethodArg,
        /// Reserve for the second-price auction.
        #[arg(long, default_value_t = 0.0)]
        reserve: f64,
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
    },
}

#[derive(Subcommand)]
enum AsymCommand {
    /// Two buyers with different masses at signal 0.
    N2 {
        #[arg(short, long)]
        p: f64,
        #[arg(long)]
        theta01: f64,
        #[arg(long)]
        theta02: f64,
        /// Also run a Monte Carlo check with this many auctions.
        #[arg(long)]
        trials: Option<u64>,
    },
    /// Exploratory random search over the two-buyer class.
    Search {
        #[arg(short, long)]
        p: f64,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
    },
    /// One spread buyer against n - 1 buyers degenerate at p.
    Limit {
        #[arg(short, long)]
        p: f64,
        #[arg(long)]
        theta0: f64,
        #[arg(long)]
        theta: f64,
        #[arg(short, long)]
        n: usize,
    },
    /// Seller-worst design for two buyers with different means.
    Prior {
        #[arg(long)]
        p1: f64,
        #[arg(long)]
        p2: f64,
    },
    /// Consistency check of the interdependent-value candidate.
    Consistency {
        #[arg(short, long)]
        p: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum AuctionArg {
    Optimal,
    SecondPrice,
    ReserveScan,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    ClosedForm,
    Quadrature,
    MonteCarlo,
}

/// Failures that map to exit code 2.
#[derive(Debug)]
struct InvalidInput(String);

impl std::fmt::Display for InvalidInput {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InvalidInput {}

fn core<T>(r: auction_design::Result<T>) -> anyhow::Result<T> {
    r.map_err(|e| match e {
        auction_design::Error::Domain(_) | auction_design::Error::InvalidDistribution(_) => {
            anyhow::Error::new(InvalidInput(e.to_string()))
        }
        other => anyhow::Error::new(other),
    })
}

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(InvalidInput(msg.into()))
}

fn parse_n_grid(s: &str) -> anyhow::Result<Vec<usize>> {
    let bad = || invalid(format!("bad n grid {s:?}"));
    if let Some((a, b)) = s.split_once(':') {
        let (a, b): (usize, usize) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect()
}

fn parse_p_grid(s: &str) -> anyhow::Result<Vec<f64>> {
    let bad = || invalid(format!("bad p grid {s:?}; expected lo:hi:step"));
    let parts: Vec<f64> = s.split(':').map(|t| t.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?;
    let [lo, hi, step] = parts[..] else { return Err(bad()) };
    if !(step > 0.0) || hi < lo {
        return Err(bad());
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize;
    // rounded to 12 digits so 0.05 * 3 prints as 0.15
    Ok((0..=count).map(|i| ((lo + step * i as f64) * 1e12).round() / 1e12).collect())
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let mut sink = Sink::open(cli.common.out.as_deref(), cli.common.format)?;
    let seed = cli.common.seed;
    match cli.command {
        Command::Solve { objective, n, p } => {
            let s = core(solve(objective.into(), n, p))?;
            match sink.format() {
                Format::Json => {
                    let mut v = serde_json::to_value(s.summary())?;
                    v["distribution"] = serde_json::to_value(&s.distribution)?;
                    sink.json(&v)?;
                }
                Format::Csv => sink.design_rows(&[s.summary()])?,
            }
        }
        Command::Sweep { objective, n_grid, p_grid } => {
            let ns = parse_n_grid(&n_grid)?;
            let ps = parse_p_grid(&p_grid)?;
            let objectives: Vec<Objective> = match objective {
                Some(o) => vec![o.into()],
                None => vec![Objective::SellerWorst, Objective::BuyerOptimal],
            };
            let cells: Vec<(Objective, usize, f64)> = objectives
                .iter()
                .flat_map(|&o| ns.iter().flat_map(|&n| ps.iter().map(move |&p| (o, n, p))).collect::<Vec<_>>())
                .collect();
            let rows = cells
                .par_iter()
                .map(|&(o, n, p)| core(solve(o, n, p)).map(|s| s.summary()))
                .collect::<anyhow::Result<Vec<DesignSummary>>>()?;
            match sink.format() {
                Format::Json => sink.json(&rows)?,
                Format::Csv => sink.design_rows(&rows)?,
            }
        }
        Command::Thresholds { n_grid } => {
            let rows =
                parse_n_grid(&n_grid)?.into_iter().map(|n| core(thresholds(n))).collect::<anyhow::Result<Vec<_>>>()?;
            match sink.format() {
                Format::Json => sink.json(&rows)?,
                Format::Csv => sink.rows(rows.iter().map(|t| output::ThresholdRow::from(*t)))?,
            }
        }
        Command::Simulate { objective, n, p, trials } => {
            let s = core(solve(objective.into(), n, p))?;
            let prof = core(iron(&s.distribution))?;
            let mc = core(optimal_symmetric(&prof, n, Method::MonteCarlo { trials, seed }))?;
            let se = mc.std_error.expect("Monte Carlo reports errors");
            let z = (mc.revenue - s.stats.revenue) / se.revenue;
            sink.json(&json!({
                "design": s.summary(),
                "closed_form": s.stats,
                "monte_carlo": mc,
                "revenue_z": z,
            }))?;
        }
        Command::Verify { claim, trials, corrupt_constants, list } => {
            if list {
                sink.json(&CLAIMS)?;
                return Ok(ExitCode::SUCCESS);
            }
            let names: Vec<String> =
                if claim.is_empty() { CLAIMS.iter().map(|s| s.to_string()).collect() } else { claim };
            let opts = VerifyOptions { seed, trials, corrupt: corrupt_constants };
            let reports = names.iter().map(|c| core(run_claim(c, &opts))).collect::<anyhow::Result<Vec<_>>>()?;
            match sink.format() {
                Format::Json => sink.json(&reports)?,
                Format::Csv => sink.rows(reports.iter().cloned())?,
            }
            sink.finish()?;
            let failed: Vec<&str> = reports.iter().filter(|r| !r.confirmed()).map(|r| r.claim.as_str()).collect();
            if !failed.is_empty() {
                eprintln!("violated: {}", failed.join(", "));
                return Ok(ExitCode::from(1));
            }
            return Ok(ExitCode::SUCCESS);
        }
        Command::Compare { n, p } => {
            let sw = core(solve(Objective::SellerWorst, n, p))?;
            let bo = core(solve(Objective::BuyerOptimal, n, p))?;
            let full = core(PiecewiseDistribution::binary(p))?;
            let full_opt = core(optimal_symmetric(&core(iron(&full))?, n, Method::ClosedForm))?;
            let full_sp = core(second_price_eval(&full, n, 0.0))?;
            let none = core(PiecewiseDistribution::degenerate(p, [0.0, 1.0]))?;
            let none_opt = core(optimal_symmetric(&core(iron(&none))?, n, Method::ClosedForm))?;
            sink.json(&json!([
                { "structure": "seller-worst", "auction": "optimal", "stats": sw.stats },
                { "structure": "buyer-optimal", "auction": "optimal", "stats": bo.stats },
                { "structure": "full-disclosure", "auction": "optimal", "stats": full_opt },
                { "structure": "full-disclosure", "auction": "second-price", "stats": full_sp },
                { "structure": "no-disclosure", "auction": "optimal", "stats": none_opt },
            ]))?;
        }
        Command::Asym { which } => asym(which, seed, &mut sink)?,
        Command::Eval { dist, n, auction, method, reserve, trials } => {
            let text = std::fs::read_to_string(&dist)?;
            let g = core(PiecewiseDistribution::from_json(&text))?;
            match auction {
                AuctionArg::Optimal => {
                    let m = match method {
                        MethodArg::ClosedForm => Method::ClosedForm,
                        MethodArg::Quadrature => Method::Quadrature,
                        MethodArg::MonteCarlo => Method::MonteCarlo { trials, seed },
                    };
                    let prof = core(iron(&g))?;
                    let stats = core(optimal_symmetric(&prof, n, m))?;
                    sink.json(&json!({
                        "stats": stats,
                        "regular": prof.is_regular(),
                        "ironed_intervals": prof.ironed_intervals(),
                    }))?;
                }
                AuctionArg::SecondPrice => sink.json(&core(second_price_eval(&g, n, reserve))?)?,
                AuctionArg::ReserveScan => {
                    let [lo, hi] = g.support();
                    let rs: Vec<f64> = (0..=200).map(|i| lo + (hi - lo) * i as f64 / 200.0).collect();
                    let (best, rows) = core(reserve_scan(&g, n, &rs))?;
                    let rows: Vec<_> = rows.into_iter().map(|(r, s)| json!({ "reserve": r, "stats": s })).collect();
                    sink.json(&json!({ "best_reserve": best, "rows": rows }))?;
                }
            }
        }
    }
    sink.finish()?;
    Ok(ExitCode::SUCCESS)
}

fn asym(which: AsymCommand, seed: u64, sink: &mut Sink) -> anyhow::Result<()> {
    match which {
        AsymCommand::N2 { p, theta01, theta02, trials } => {
            let o = core(asym_buyer_search_n2(p, theta01, theta02))?;
            let mc = match trials {
                Some(t) => Some(core(o.profile.reevaluate(Method::MonteCarlo { trials: t, seed }))?),
                None => None,
            };
            sink.json(&json!({
                "buyers": o.profile.buyer_summaries(),
                "closed_form_buyer_surplus": o.closed_form_surplus,
                "stats": o.profile.stats,
                "monte_carlo": mc,
            }))
        }
        AsymCommand::Search { p, trials } => {
            let mut s = SampleStream::new(seed, 0);
            let (t01, t02, surplus) = core(asym_buyer_random_search(p, trials, &mut s))?;
            sink.json(&json!({
                "exploratory": true,
                "theta01": t01,
                "theta02": t02,
                "buyer_surplus": surplus,
                "trials": trials,
            }))
        }
        AsymCommand::Limit { p, theta0, theta, n } => {
            let o = core(asym_buyer_limit(p, theta0, theta, n))?;
            sink.json(&json!({
                "theta_input": o.theta_input,
                "theta": o.buyer.params.theta,
                "mean_residual": o.mean_residual,
                "closed_form_buyer_surplus": o.closed_form_surplus,
                "stats": o.stats,
            }))
        }
        AsymCommand::Prior { p1, p2 } => {
            let a = core(asym_prior_seller_worst(p1, p2))?;
            let ks: Vec<f64> = (0..=50).map(|i| i as f64 * 0.01).collect();
            let scan: Vec<_> = core(asym_prior_k_scan(p1, p2, &ks))?
                .into_iter()
                .map(|(k, r)| json!({ "k": k, "revenue": r }))
                .collect();
            sink.json(&json!({ "buyers": a.buyer_summaries(), "stats": a.stats, "k_scan": scan }))
        }
        AsymCommand::Consistency { p } => sink.json(&core(interdependence_consistency(p))?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<InvalidInput>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
