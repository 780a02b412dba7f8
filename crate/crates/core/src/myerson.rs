//! Myerson's optimal auction for piecewise signal distributions.
//!
//! Ironing works in quantile space. With `x(t)` the right-continuous
//! quantile and `a = x(0)`, the cumulative virtual surplus is
//! `C(t) = a - (1 - t) x(t)`; the ironed virtual value is the slope of its
//! lower convex envelope. Each piece of the distribution maps to an arc of
//! `C` that is affine (atoms, Pareto pieces) or a convex quadratic (linear
//! CDF pieces), so the envelope is found on a grid and its bridges are then
//! refined to exact bitangents.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{Piece, PiecewiseDistribution};
use crate::error::{check_buyers, Error, Result};
use crate::numeric::{bisect, integrate_breaks, log_tail};
use crate::stream::SampleStream;

/// Default number of grid points per unit quantile used to locate bridges.
pub const HULL_GRID: usize = 4096;

/// Two ironed virtual values closer than this are treated as tied.
pub const TIE_TOL: f64 = 1e-12;

const MC_PARTITIONS: u64 = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
enum SignalShape {
    Const(f64),
    /// `x = d + t / slope`
    Linear {
        d: f64,
        inv_slope: f64,
    },
    /// `x = shift + scale / (1 - t)`
    Pareto {
        shift: f64,
        scale: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Arc {
    t0: f64,
    t1: f64,
    c0: f64,
    c1: f64,
    c2: f64,
    shape: SignalShape,
}

impl Arc {
    #[inline]
    fn value(&self, t: f64) -> f64 {
        self.c0 + t * (self.c1 + t * self.c2)
    }
}

fn build_arcs(g: &PiecewiseDistribution) -> Vec<Arc> {
    let a = g.upper_quantile(0.0);
    let mut arcs = Vec::new();
    let mut tau = 0.0;
    for piece in g.pieces() {
        match *piece {
            Piece::Atom { location, mass } => {
                let t1 = (tau + mass).min(1.0);
                if t1 > tau {
                    arcs.push(Arc {
                        t0: tau,
                        t1,
                        c0: a - location,
                        c1: location,
                        c2: 0.0,
                        shape: SignalShape::Const(location),
                    });
                }
                tau = t1;
            }
            Piece::Linear { lo, hi, cdf_lo, slope } => {
                let t1 = piece.cdf_formula(hi);
                if slope > 0.0 && t1 > cdf_lo {
                    let inv = 1.0 / slope;
                    let d = lo - cdf_lo * inv;
                    arcs.push(Arc {
                        t0: cdf_lo,
                        t1,
                        c0: a - d,
                        c1: d - inv,
                        c2: inv,
                        shape: SignalShape::Linear { d, inv_slope: inv },
                    });
                }
                tau = t1;
            }
            Piece::Pareto { lo, hi, scale, shift } => {
                let (t0, t1) = (piece.cdf_formula(lo), piece.cdf_formula(hi));
                if t1 > t0 {
                    arcs.push(Arc {
                        t0,
                        t1,
                        c0: a - shift - scale,
                        c1: shift,
                        c2: 0.0,
                        shape: SignalShape::Pareto { shift, scale },
                    });
                }
                tau = t1;
            }
        }
    }
    arcs
}

/// Minimum of `C(t) - s t` over `[r0, r1]`, with the rightmost or leftmost
/// minimiser on ties.
fn region_min(arcs: &[Arc], s: f64, r0: f64, r1: f64, prefer_right: bool) -> (f64, f64) {
    let mut best = (f64::INFINITY, f64::NAN);
    let mut consider = |v: f64, t: f64| {
        let tol = 1e-15 * (1.0 + v.abs());
        let better =
            v < best.0 - tol || ((v - best.0).abs() <= tol && if prefer_right { t > best.1 } else { t < best.1 });
        if better || best.1.is_nan() {
            best = (v, t);
        }
    };
    for arc in arcs {
        let lo = arc.t0.max(r0);
        let hi = arc.t1.min(r1);
        if lo > hi {
            continue;
        }
        let f = |t: f64| arc.value(t) - s * t;
        consider(f(lo), lo);
        consider(f(hi), hi);
        if arc.c2 > 0.0 {
            let v = (s - arc.c1) / (2.0 * arc.c2);
            if v > lo && v < hi {
                consider(f(v), v);
            }
        }
    }
    best
}

/// Exact bridge `(t_left, t_right, slope)` straddling `t_mid`.
fn refine_bridge(arcs: &[Arc], t_mid: f64, s0: f64) -> Option<(f64, f64, f64)> {
    let d = |s: f64| region_min(arcs, s, t_mid, 1.0, false).0 - region_min(arcs, s, 0.0, t_mid, true).0;
    let mut step = 1e-6 * (1.0 + s0.abs());
    let mut lo = s0 - step;
    let mut guard = 0;
    while d(lo) <= 0.0 && guard < 200 {
        lo -= step;
        step *= 2.0;
        guard += 1;
    }
    let mut step = 1e-6 * (1.0 + s0.abs());
    let mut hi = s0 + step;
    while d(hi) >= 0.0 && guard < 400 {
        hi += step;
        step *= 2.0;
        guard += 1;
    }
    let s = bisect(d, lo, hi).ok()?;
    let (_, tl) = region_min(arcs, s, 0.0, t_mid, true);
    let (_, tr) = region_min(arcs, s, t_mid, 1.0, false);
    (tr - tl > 1e-14).then_some((tl, tr, s))
}

/// Hull vertices and the index ranges they bridge.
type Hull = (Vec<(f64, f64)>, Vec<(usize, usize)>);

fn lower_hull_bridges(arcs: &[Arc], grid: usize) -> Hull {
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for arc in arcs {
        // interior samples on affine arcs expose downward jumps at their ends
        let m = (((arc.t1 - arc.t0) * grid as f64).ceil() as usize).max(2);
        for i in 0..=m {
            let t = if i == m { arc.t1 } else { arc.t0 + (arc.t1 - arc.t0) * i as f64 / m as f64 };
            let v = arc.value(t);
            match pts.last_mut() {
                Some(last) if last.0 == t => last.1 = last.1.min(v),
                _ => pts.push((t, v)),
            }
        }
    }
    let mut hull: Vec<usize> = Vec::new();
    for (k, &(t, v)) in pts.iter().enumerate() {
        while hull.len() >= 2 {
            let (ta, va) = pts[hull[hull.len() - 2]];
            let (tb, vb) = pts[hull[hull.len() - 1]];
            let chord = va + (v - va) * (tb - ta) / (t - ta);
            if vb > chord + 1e-13 * (1.0 + va.abs().max(vb.abs()).max(v.abs())) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(k);
    }
    let bridges = hull.windows(2).filter(|w| w[1] > w[0] + 1).map(|w| (w[0], w[1])).collect();
    (pts, bridges)
}

/// Piece of the ironed virtual value in quantile space: `intercept + slope * t` on `[tau_lo, tau_hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VirtualSegment {
    pub tau_lo: f64,
    pub tau_hi: f64,
    pub intercept: f64,
    pub slope: f64,
}

impl VirtualSegment {
    #[inline]
    pub fn at(&self, t: f64) -> f64 {
        self.intercept + self.slope * t
    }
}

/// A maximal interval on which ironing flattens the virtual value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IronedInterval {
    pub tau_lo: f64,
    pub tau_hi: f64,
    pub x_lo: f64,
    pub x_hi: f64,
    pub value: f64,
}

/// Ironed virtual values of a distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct IronedProfile {
    dist: PiecewiseDistribution,
    arcs: Vec<Arc>,
    segments: Vec<VirtualSegment>,
    ironed: Vec<IronedInterval>,
}

/// Irons `g` with the default grid.
pub fn iron(g: &PiecewiseDistribution) -> Result<IronedProfile> {
    iron_with_grid(g, HULL_GRID)
}

/// Irons `g`, locating bridges on a grid of `grid` points per unit quantile.
pub fn iron_with_grid(g: &PiecewiseDistribution, grid: usize) -> Result<IronedProfile> {
    let arcs = build_arcs(g);
    if arcs.is_empty() {
        return Err(Error::InvalidDistribution("distribution has no mass".into()));
    }
    let mut bridges: Vec<(f64, f64, f64)> = Vec::new();
    let (pts, candidates) = lower_hull_bridges(&arcs, grid.max(16));
    for (i, j) in candidates {
        let (ti, vi) = pts[i];
        let (tj, vj) = pts[j];
        let t_mid = pts[i + 1].0;
        if let Some(b) = refine_bridge(&arcs, t_mid, (vj - vi) / (tj - ti)) {
            bridges.push(b);
        }
    }
    bridges.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64, f64)> = Vec::new();
    for b in bridges {
        match merged.last_mut() {
            // bridges that only touch are separate hull edges unless collinear
            Some(last) if b.0 < last.1 - 1e-14 || (b.0 <= last.1 + 1e-14 && (b.2 - last.2).abs() <= 1e-12) => {
                if b.1 > last.1 {
                    last.1 = b.1;
                }
            }
            _ => merged.push(b),
        }
    }

    let mut segments = Vec::new();
    let mut bi = 0;
    for arc in &arcs {
        let mut t = arc.t0;
        while t < arc.t1 {
            while bi < merged.len() && merged[bi].1 <= t {
                bi += 1;
            }
            if bi < merged.len() && merged[bi].0 <= t {
                // inside a bridge: emit it once, when first reached
                let (bl, br, s) = merged[bi];
                if segments.last().is_none_or(|s: &VirtualSegment| s.tau_hi <= bl) {
                    segments.push(VirtualSegment { tau_lo: bl, tau_hi: br, intercept: s, slope: 0.0 });
                }
                t = br;
                continue;
            }
            let end = if bi < merged.len() { merged[bi].0.min(arc.t1) } else { arc.t1 };
            segments.push(VirtualSegment { tau_lo: t, tau_hi: end, intercept: arc.c1, slope: 2.0 * arc.c2 });
            t = end;
        }
    }
    let ironed = merged
        .iter()
        .map(|&(tl, tr, s)| IronedInterval {
            tau_lo: tl,
            tau_hi: tr,
            x_lo: g.upper_quantile(tl),
            x_hi: g.quantile(tr),
            value: s,
        })
        .collect();
    Ok(IronedProfile { dist: g.clone(), arcs, segments, ironed })
}

impl IronedProfile {
    pub fn distribution(&self) -> &PiecewiseDistribution {
        &self.dist
    }

    pub fn segments(&self) -> &[VirtualSegment] {
        &self.segments
    }

    pub fn ironed_intervals(&self) -> &[IronedInterval] {
        &self.ironed
    }

    /// Quantile breakpoints of the ironed virtual value.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.segments.iter().map(|s| s.tau_lo).collect();
        if let Some(last) = self.segments.last() {
            out.push(last.tau_hi);
        }
        out
    }

    /// True when no interval is ironed.
    pub fn is_regular(&self) -> bool {
        self.ironed.is_empty()
    }

    fn segment_at(&self, t: f64) -> &VirtualSegment {
        let k = self.segments.partition_point(|s| s.tau_lo <= t);
        &self.segments[k.saturating_sub(1)]
    }

    /// Ironed virtual value at quantile `t`, right-continuous.
    pub fn value_at_quantile(&self, t: f64) -> f64 {
        if t >= 1.0 {
            let s = self.segments.last().expect("nonempty");
            return s.at(s.tau_hi);
        }
        self.segment_at(t).at(t)
    }

    /// Ironed virtual value of signal `x`.
    pub fn value_at(&self, x: f64) -> f64 {
        let left = self.dist.cdf_left(x);
        let mass = self.dist.cdf(x) - left;
        self.value_at_quantile(if mass > 0.0 { left + 0.5 * mass } else { left })
    }

    /// Smallest ironed virtual value.
    pub fn min_value(&self) -> f64 {
        self.segments.iter().map(|s| s.at(s.tau_lo)).fold(f64::INFINITY, f64::min)
    }

    /// First quantile at which the ironed virtual value is nonnegative.
    pub fn zero_quantile(&self) -> f64 {
        for s in &self.segments {
            if s.at(s.tau_lo) >= 0.0 {
                return s.tau_lo;
            }
            if s.slope > 0.0 && s.at(s.tau_hi) >= 0.0 {
                return (-s.intercept / s.slope).clamp(s.tau_lo, s.tau_hi);
            }
        }
        1.0
    }

    /// `P(phi < v)`.
    pub fn value_cdf_strict(&self, v: f64) -> f64 {
        self.value_cdf_impl(v, true)
    }

    /// `P(phi <= v)`.
    pub fn value_cdf(&self, v: f64) -> f64 {
        self.value_cdf_impl(v, false)
    }

    fn value_cdf_impl(&self, v: f64, strict: bool) -> f64 {
        let mut acc = 0.0;
        for s in &self.segments {
            let len = s.tau_hi - s.tau_lo;
            if s.slope == 0.0 {
                let below = if strict { s.intercept < v - TIE_TOL } else { s.intercept <= v + TIE_TOL };
                if below {
                    acc += len;
                }
            } else {
                let cut = ((v - s.intercept) / s.slope).clamp(s.tau_lo, s.tau_hi);
                acc += cut - s.tau_lo;
            }
        }
        acc.min(1.0)
    }

    /// Quantile range on which the virtual value is flat at `v`, if any.
    pub fn level_set(&self, v: f64) -> Option<(f64, f64)> {
        let mut out: Option<(f64, f64)> = None;
        for s in &self.segments {
            if s.slope == 0.0 && (s.intercept - v).abs() <= TIE_TOL {
                out = Some(match out {
                    None => (s.tau_lo, s.tau_hi),
                    Some((a, b)) => (a.min(s.tau_lo), b.max(s.tau_hi)),
                });
            }
        }
        out
    }

    /// Signal at quantile `t`.
    #[inline]
    pub fn signal_at_quantile(&self, t: f64) -> f64 {
        self.dist.quantile(t)
    }

    /// Closed-form `integral_{t0}^{1} x(t) n t^{n-1} dt`.
    fn signal_moment_above(&self, t0: f64, n: usize) -> f64 {
        let ni = n as i32;
        let mut acc = 0.0;
        for arc in &self.arcs {
            let a = arc.t0.max(t0);
            let b = arc.t1;
            if a >= b {
                continue;
            }
            let pn = b.powi(ni) - a.powi(ni);
            acc += match arc.shape {
                SignalShape::Const(x) => x * pn,
                SignalShape::Linear { d, inv_slope } => {
                    let pn1 = b.powi(ni + 1) - a.powi(ni + 1);
                    d * pn + inv_slope * n as f64 / (n as f64 + 1.0) * pn1
                }
                SignalShape::Pareto { shift, scale } => {
                    shift * pn + scale * n as f64 * (log_tail(b, n) - log_tail(a, n))
                }
            };
        }
        acc
    }
}

/// Evaluation route for auction statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMethod {
    ClosedForm,
    Quadrature,
    MonteCarlo,
}

/// Requested evaluation route.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    Quadrature,
    MonteCarlo { trials: u64, seed: u64 },
}

/// Monte Carlo standard errors of each statistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StdErrors {
    pub revenue: f64,
    pub total_surplus: f64,
    pub buyer_surplus: f64,
    pub sale_probability: f64,
}

/// Revenue and surplus of an auction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuctionStats {
    pub revenue: f64,
    pub total_surplus: f64,
    pub buyer_surplus: f64,
    pub sale_probability: f64,
    pub method: EvalMethod,
    pub std_error: Option<StdErrors>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trials: Option<u64>,
}

impl AuctionStats {
    fn exact(revenue: f64, total: f64, sale: f64, method: EvalMethod) -> Self {
        AuctionStats {
            revenue,
            total_surplus: total,
            buyer_surplus: total - revenue,
            sale_probability: sale,
            method,
            std_error: None,
            trials: None,
        }
    }
}

/// `count` buyers sharing one signal distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct BuyerGroup {
    pub profile: IronedProfile,
    pub count: usize,
}

impl BuyerGroup {
    pub fn new(profile: IronedProfile, count: usize) -> Self {
        BuyerGroup { profile, count }
    }
}

/// Optimal auction with `n` symmetric buyers.
pub fn optimal_symmetric(profile: &IronedProfile, n: usize, method: Method) -> Result<AuctionStats> {
    check_buyers(n)?;
    optimal_auction_eval(&[BuyerGroup::new(profile.clone(), n)], method)
}

/// Optimal auction with one buyer per profile.
pub fn optimal_asymmetric(profiles: &[IronedProfile], method: Method) -> Result<AuctionStats> {
    let groups: Vec<BuyerGroup> = profiles.iter().map(|p| BuyerGroup::new(p.clone(), 1)).collect();
    optimal_auction_eval(&groups, method)
}

/// Expected revenue, surplus and sale probability of the optimal auction.
///
/// The object goes to the highest nonnegative ironed virtual value; ties go
/// to the highest signal, then split evenly.
pub fn optimal_auction_eval(groups: &[BuyerGroup], method: Method) -> Result<AuctionStats> {
    if groups.is_empty() || groups.iter().any(|g| g.count == 0) {
        return Err(Error::Domain("every buyer group needs at least one buyer".into()));
    }
    match method {
        Method::ClosedForm => {
            if groups.len() != 1 {
                return Err(Error::Unsupported(
                    "closed form covers symmetric buyers only; use quadrature or Monte Carlo".into(),
                ));
            }
            Ok(closed_form(&groups[0].profile, groups[0].count))
        }
        Method::Quadrature => Ok(quadrature(groups)),
        Method::MonteCarlo { trials, seed } => monte_carlo(groups, trials, seed),
    }
}

fn closed_form(p: &IronedProfile, n: usize) -> AuctionStats {
    let ni = n as i32;
    let nf = n as f64;
    let mut revenue = 0.0;
    for s in &p.segments {
        let (mut a, b) = (s.tau_lo, s.tau_hi);
        if s.at(b) <= 0.0 && s.at(a) <= 0.0 {
            continue;
        }
        if s.at(a) < 0.0 {
            a = (-s.intercept / s.slope).clamp(a, b);
        }
        revenue +=
            s.intercept * (b.powi(ni) - a.powi(ni)) + s.slope * nf / (nf + 1.0) * (b.powi(ni + 1) - a.powi(ni + 1));
    }
    let t0 = p.zero_quantile();
    let total = p.signal_moment_above(t0, n);
    AuctionStats::exact(revenue, total, 1.0 - t0.powi(ni), EvalMethod::ClosedForm)
}

/// Probability that a buyer of profile `q` scores below (or at) `(v, x)`.
fn score_below(q: &IronedProfile, v: f64, x: f64) -> (f64, f64) {
    let base = q.value_cdf_strict(v);
    match q.level_set(v) {
        None => (base, base),
        Some((t0, t1)) => {
            let lt = (q.dist.cdf_left(x).min(t1) - t0).max(0.0);
            let le = (q.dist.cdf(x).min(t1) - t0).max(0.0);
            (base + lt, base + le)
        }
    }
}

fn sum_geometric(a: f64, b: f64, c: usize) -> f64 {
    // sum_{r=0}^{c-1} a^r b^{c-1-r}
    if c == 1 {
        return 1.0;
    }
    if b - a > 1e-9 {
        (b.powi(c as i32) - a.powi(c as i32)) / (b - a)
    } else {
        let m = 0.5 * (a + b);
        c as f64 * m.powi(c as i32 - 1)
    }
}

fn quadrature(groups: &[BuyerGroup]) -> AuctionStats {
    let mut revenue = 0.0;
    let mut total = 0.0;
    let mut sale = 0.0;
    for (gi, grp) in groups.iter().enumerate() {
        let prof = &grp.profile;
        let t_zero = prof.zero_quantile();
        let mut breaks = vec![0.0, 1.0, t_zero];
        breaks.extend(prof.breakpoints());
        breaks.extend(prof.arcs.iter().flat_map(|a| [a.t0, a.t1]));
        for other in groups {
            let op = &other.profile;
            for s in &op.segments {
                for level in [s.at(s.tau_lo), s.at(s.tau_hi)] {
                    for own in &prof.segments {
                        if own.slope > 0.0 {
                            let t = (level - own.intercept) / own.slope;
                            if t > own.tau_lo && t < own.tau_hi {
                                breaks.push(t);
                            }
                        }
                    }
                }
            }
            for x in op.dist.breakpoints() {
                breaks.push(prof.dist.cdf_left(x));
                breaks.push(prof.dist.cdf(x));
            }
        }
        breaks.retain(|t| (0.0..=1.0).contains(t));
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let weight = |t: f64| -> f64 {
            let v = prof.value_at_quantile(t);
            if v < 0.0 {
                return 0.0;
            }
            let x = prof.signal_at_quantile(t);
            let mut w = 1.0;
            for (hi, h) in groups.iter().enumerate() {
                let (lt, le) = score_below(&h.profile, v, x);
                w *= match hi.cmp(&gi) {
                    std::cmp::Ordering::Less => lt.powi(h.count as i32),
                    std::cmp::Ordering::Greater => le.powi(h.count as i32),
                    std::cmp::Ordering::Equal => sum_geometric(lt, le, h.count),
                };
            }
            w
        };
        let tol = 1e-13;
        revenue += integrate_breaks(|t| prof.value_at_quantile(t).max(0.0) * weight(t), &breaks, tol, 1e-13).value;
        total += integrate_breaks(|t| prof.signal_at_quantile(t) * weight(t), &breaks, tol, 1e-13).value;
        sale += integrate_breaks(&weight, &breaks, tol, 1e-13).value;
    }
    AuctionStats::exact(revenue, total, sale, EvalMethod::Quadrature)
}

#[derive(Default, Clone, Copy)]
struct Moments {
    n: u64,
    rev: f64,
    rev2: f64,
    tot: f64,
    tot2: f64,
    bs: f64,
    bs2: f64,
    sold: f64,
}

impl Moments {
    fn add(&mut self, o: &Moments) {
        self.n += o.n;
        self.rev += o.rev;
        self.rev2 += o.rev2;
        self.tot += o.tot;
        self.tot2 += o.tot2;
        self.bs += o.bs;
        self.bs2 += o.bs2;
        self.sold += o.sold;
    }
}

fn std_err(sum: f64, sum2: f64, n: f64) -> f64 {
    let mean = sum / n;
    let var = (sum2 / n - mean * mean).max(0.0) * n / (n - 1.0).max(1.0);
    (var / n).sqrt()
}

fn monte_carlo(groups: &[BuyerGroup], trials: u64, seed: u64) -> Result<AuctionStats> {
    if trials < 2 {
        return Err(Error::Domain("Monte Carlo needs at least 2 trials".into()));
    }
    let buyers: Vec<&IronedProfile> = groups.iter().flat_map(|g| std::iter::repeat_n(&g.profile, g.count)).collect();
    let parts: Vec<Moments> = (0..MC_PARTITIONS)
        .into_par_iter()
        .map(|part| {
            let mut stream = SampleStream::new(seed, part);
            let count = trials / MC_PARTITIONS + u64::from(part < trials % MC_PARTITIONS);
            let mut m = Moments::default();
            for _ in 0..count {
                let mut best_v = f64::NEG_INFINITY;
                let mut best_x = f64::NEG_INFINITY;
                for prof in &buyers {
                    let t = stream.uniform();
                    let v = prof.value_at_quantile(t);
                    let x = prof.signal_at_quantile(t);
                    if v > best_v + TIE_TOL {
                        best_v = v;
                        best_x = x;
                    } else if (v - best_v).abs() <= TIE_TOL && x > best_x {
                        best_x = x;
                    }
                }
                m.n += 1;
                if best_v >= 0.0 {
                    let bs = best_x - best_v;
                    m.rev += best_v;
                    m.rev2 += best_v * best_v;
                    m.tot += best_x;
                    m.tot2 += best_x * best_x;
                    m.bs += bs;
                    m.bs2 += bs * bs;
                    m.sold += 1.0;
                }
            }
            m
        })
        .collect();
    let mut m = Moments::default();
    for p in &parts {
        m.add(p);
    }
    let n = m.n as f64;
    let sale = m.sold / n;
    Ok(AuctionStats {
        revenue: m.rev / n,
        total_surplus: m.tot / n,
        buyer_surplus: m.bs / n,
        sale_probability: sale,
        method: EvalMethod::MonteCarlo,
        std_error: Some(StdErrors {
            revenue: std_err(m.rev, m.rev2, n),
            total_surplus: std_err(m.tot, m.tot2, n),
            buyer_surplus: std_err(m.bs, m.bs2, n),
            sale_probability: (sale * (1.0 - sale) / n).sqrt(),
        }),
        trials: Some(m.n),
    })
}

/// Second-price auction with reserve `reserve` and `n` symmetric buyers,
/// by order-statistic integration.
pub fn second_price_eval(g: &PiecewiseDistribution, n: usize, reserve: f64) -> Result<AuctionStats> {
    check_buyers(n)?;
    if !reserve.is_finite() {
        return Err(Error::Domain(format!("reserve must be finite, got {reserve}")));
    }
    let [lo, hi] = g.support();
    if reserve > hi {
        return Ok(AuctionStats::exact(0.0, 0.0, 0.0, EvalMethod::Quadrature));
    }
    let r = reserve.max(lo);
    let ni = n as i32;
    let nf = n as f64;
    let below = g.cdf_left(r).powi(ni);
    let mut rev_tail = 0.0;
    let mut tot_tail = 0.0;
    for p in g.continuous() {
        let (a, b) = p.bounds();
        let a = a.max(r);
        if a >= b {
            continue;
        }
        let cdf = |x: f64| p.cdf_formula(x).clamp(0.0, 1.0);
        rev_tail += integrate_breaks(
            |x| {
                let gx = cdf(x);
                let gn1 = if n == 1 { 1.0 } else { gx.powi(ni - 1) };
                1.0 - nf * gn1 + (nf - 1.0) * gn1 * gx
            },
            &[a, b],
            1e-15,
            0.0,
        )
        .value;
        tot_tail += integrate_breaks(|x| 1.0 - cdf(x).powi(ni), &[a, b], 1e-15, 0.0).value;
    }
    let sale = 1.0 - below;
    Ok(AuctionStats::exact(r * sale + rev_tail, r * sale + tot_tail, sale, EvalMethod::Quadrature))
}

/// Second-price revenue over a grid of reserves, with the best one.
pub fn reserve_scan(g: &PiecewiseDistribution, n: usize, reserves: &[f64]) -> Result<(f64, Vec<(f64, AuctionStats)>)> {
    let mut rows = Vec::with_capacity(reserves.len());
    let mut best = (f64::NAN, f64::NEG_INFINITY);
    for &r in reserves {
        let st = second_price_eval(g, n, r)?;
        if st.revenue > best.1 {
            best = (r, st.revenue);
        }
        rows.push((r, st));
    }
    Ok((best.0, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::DistBuilder;

    fn irexample() -> PiecewiseDistribution {
        DistBuilder::new(1.0, 2.0).linear_to(4.0 / 3.0, 2.0 / 3.0).linear_to(2.0, 1.0).finish().unwrap()
    }

    #[test]
    fn irexample_bridge_is_exact() {
        let p = iron(&irexample()).unwrap();
        let iv = p.ironed_intervals();
        assert_eq!(iv.len(), 1);
        assert!((iv[0].tau_lo - 0.5).abs() < 1e-12);
        assert!((iv[0].tau_hi - 0.75).abs() < 1e-12);
        assert!((iv[0].x_lo - 1.25).abs() < 1e-12);
        assert!((iv[0].x_hi - 1.5).abs() < 1e-12);
        assert!((iv[0].value - 1.0).abs() < 1e-14);
    }

    #[test]
    fn uniform_is_regular() {
        let u = DistBuilder::new(0.0, 1.0).linear_to(1.0, 1.0).finish().unwrap();
        let p = iron(&u).unwrap();
        assert!(p.is_regular());
        for &x in &[0.1, 0.5, 0.9] {
            assert!((p.value_at(x) - (2.0 * x - 1.0)).abs() < 1e-14);
        }
        let st = optimal_symmetric(&p, 2, Method::ClosedForm).unwrap();
        assert!((st.revenue - 5.0 / 12.0).abs() < 1e-14);
    }

    #[test]
    fn binary_prior_irons_the_zero_atom() {
        let h = PiecewiseDistribution::binary(0.5).unwrap();
        let p = iron(&h).unwrap();
        assert!(p.value_at(0.0) < 0.0);
        assert_eq!(p.value_at(1.0), 1.0);
        let st = optimal_symmetric(&p, 2, Method::ClosedForm).unwrap();
        assert!((st.revenue - 0.75).abs() < 1e-14);
        assert!((st.total_surplus - 0.75).abs() < 1e-14);
    }

    #[test]
    fn second_price_binary() {
        let h = PiecewiseDistribution::binary(0.5).unwrap();
        let st = second_price_eval(&h, 2, 0.0).unwrap();
        assert!((st.revenue - 0.25).abs() < 1e-15);
        let above = second_price_eval(&h, 2, 1.5).unwrap();
        assert_eq!(above.revenue, 0.0);
        let below = second_price_eval(&irexample(), 2, -3.0).unwrap();
        let zero = second_price_eval(&irexample(), 2, 0.0).unwrap();
        assert!((below.revenue - zero.revenue).abs() < 1e-15);
    }

    #[test]
    fn closed_form_rejects_asymmetric() {
        let p = iron(&irexample()).unwrap();
        let r = optimal_asymmetric(&[p.clone(), p], Method::ClosedForm);
        assert!(matches!(r, Err(Error::Unsupported(_))));
    }

    #[test]
    fn quadrature_agrees_with_closed_form() {
        let p = iron(&irexample()).unwrap();
        for n in 1..5 {
            let a = optimal_symmetric(&p, n, Method::ClosedForm).unwrap();
            let b = optimal_symmetric(&p, n, Method::Quadrature).unwrap();
            assert!((a.revenue - b.revenue).abs() < 1e-11, "n={n}");
            assert!((a.total_surplus - b.total_surplus).abs() < 1e-11, "n={n}");
        }
    }

    #[test]
    fn touching_bridges_stay_separate() {
        let h = PiecewiseDistribution::discrete([0.0, 1.0], &[(0.5, 1.0 / 3.0), (0.75, 1.0 / 3.0), (1.0, 1.0 / 3.0)])
            .unwrap();
        let p = iron(&h).unwrap();
        for (x, v) in [(0.5, 0.0), (0.75, 0.5), (1.0, 1.0)] {
            assert!((p.value_at(x) - v).abs() < 1e-12, "{x}: {}", p.value_at(x));
        }
        assert_eq!(p.ironed_intervals().len(), 2);
    }

    #[test]
    fn irexample_revenues() {
        let g = irexample();
        let p = iron(&g).unwrap();
        let opt = optimal_symmetric(&p, 2, Method::ClosedForm).unwrap();
        let sp = second_price_eval(&g, 2, 0.0).unwrap();
        assert!((opt.revenue - 19.0 / 16.0).abs() < 1e-13, "{}", opt.revenue);
        assert!((sp.revenue - 32.0 / 27.0).abs() < 1e-13, "{}", sp.revenue);
    }

    #[test]
    fn monte_carlo_is_reproducible() {
        let p = iron(&irexample()).unwrap();
        let m = Method::MonteCarlo { trials: 20_000, seed: 9 };
        let a = optimal_symmetric(&p, 3, m).unwrap();
        let b = optimal_symmetric(&p, 3, m).unwrap();
        assert_eq!(a, b);
        let exact = optimal_symmetric(&p, 3, Method::ClosedForm).unwrap();
        let se = a.std_error.unwrap();
        assert!((a.revenue - exact.revenue).abs() < 4.0 * se.revenue);
        assert!((a.total_surplus - exact.total_surplus).abs() < 4.0 * se.total_surplus);
    }
}
