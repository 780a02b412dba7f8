//! Piecewise distributions on a bounded interval built from atoms,
//! truncated Pareto segments and linear-CDF segments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{bisect, integrate};
use crate::stream::SampleStream;

/// Tolerance on total probability and on CDF continuity at piece boundaries.
pub const PROB_TOL: f64 = 1e-12;

const POS_TOL: f64 = 1e-12;
const QUAD_TOL: f64 = 1e-15;

/// One piece of a [`PiecewiseDistribution`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Piece {
    /// Point mass.
    Atom { location: f64, mass: f64 },
    /// CDF `1 - scale / (x - shift)` on `[lo, hi)`. Its virtual value is `shift`.
    Pareto { lo: f64, hi: f64, scale: f64, shift: f64 },
    /// CDF `cdf_lo + slope * (x - lo)` on `[lo, hi)`.
    Linear { lo: f64, hi: f64, cdf_lo: f64, slope: f64 },
}

impl Piece {
    pub fn is_atom(&self) -> bool {
        matches!(self, Piece::Atom { .. })
    }

    /// `(lo, hi)` of a continuous piece, or `(location, location)` of an atom.
    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            Piece::Atom { location, .. } => (location, location),
            Piece::Pareto { lo, hi, .. } | Piece::Linear { lo, hi, .. } => (lo, hi),
        }
    }

    /// CDF formula of a continuous piece; NaN for atoms.
    #[inline]
    pub fn cdf_formula(&self, x: f64) -> f64 {
        match *self {
            Piece::Atom { .. } => f64::NAN,
            Piece::Pareto { scale, shift, .. } => 1.0 - scale / (x - shift),
            Piece::Linear { lo, cdf_lo, slope, .. } => cdf_lo + slope * (x - lo),
        }
    }

    /// Solves `cdf_formula(x) = tau` on a strictly increasing piece.
    #[inline]
    fn invert(&self, tau: f64) -> f64 {
        let (lo, hi) = self.bounds();
        let x = match *self {
            Piece::Atom { location, .. } => location,
            Piece::Pareto { scale, shift, .. } => shift + scale / (1.0 - tau),
            Piece::Linear { lo, cdf_lo, slope, .. } => lo + (tau - cdf_lo) / slope,
        };
        x.clamp(lo, hi)
    }

    /// `integral_lo^x cdf_formula(t) dt` for `x` inside the piece.
    fn cdf_integral(&self, x: f64) -> f64 {
        match *self {
            Piece::Atom { .. } => 0.0,
            Piece::Pareto { lo, scale, shift, .. } => (x - lo) - scale * ((x - shift) / (lo - shift)).ln(),
            Piece::Linear { lo, cdf_lo, slope, .. } => {
                let d = x - lo;
                cdf_lo * d + 0.5 * slope * d * d
            }
        }
    }

    /// Contribution of the piece to the mean.
    fn first_moment(&self) -> f64 {
        match *self {
            Piece::Atom { location, mass } => location * mass,
            Piece::Pareto { lo, hi, scale, shift } => {
                let (a, b) = (lo - shift, hi - shift);
                scale * ((b / a).ln() + shift / a - shift / b)
            }
            Piece::Linear { lo, hi, slope, .. } => 0.5 * slope * (hi * hi - lo * lo),
        }
    }

    fn fields(&self) -> [f64; 4] {
        match *self {
            Piece::Atom { location, mass } => [location, mass, 0.0, 0.0],
            Piece::Pareto { lo, hi, scale, shift } => [lo, hi, scale, shift],
            Piece::Linear { lo, hi, cdf_lo, slope } => [lo, hi, cdf_lo, slope],
        }
    }
}

#[derive(Serialize, Deserialize)]
struct RawDistribution {
    support: [f64; 2],
    pieces: Vec<Piece>,
}

/// A CDF on `[support[0], support[1]]` given by ordered pieces.
///
/// Continuous pieces tile the support; atoms sit at piece boundaries and
/// appear in the list before the piece that starts at their location.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDistribution", into = "RawDistribution")]
pub struct PiecewiseDistribution {
    support: [f64; 2],
    pieces: Vec<Piece>,
    cont: Vec<usize>,
    cum_int: Vec<f64>,
}

impl TryFrom<RawDistribution> for PiecewiseDistribution {
    type Error = Error;
    fn try_from(raw: RawDistribution) -> Result<Self> {
        PiecewiseDistribution::new(raw.support, raw.pieces)
    }
}

impl From<PiecewiseDistribution> for RawDistribution {
    fn from(d: PiecewiseDistribution) -> Self {
        RawDistribution { support: d.support, pieces: d.pieces }
    }
}

fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidDistribution(msg.into()))
}

impl PiecewiseDistribution {
    /// Validates and builds a distribution.
    pub fn new(support: [f64; 2], pieces: Vec<Piece>) -> Result<Self> {
        let [lo, hi] = support;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return invalid(format!("support [{lo}, {hi}] must be finite with lo < hi"));
        }
        let mut cursor = lo;
        let mut left = 0.0;
        let mut pending = 0.0;
        let mut atom_here = false;
        let mut cont = Vec::new();
        for (i, piece) in pieces.iter().enumerate() {
            if piece.fields().iter().any(|v| !v.is_finite()) {
                return invalid(format!("piece {i} has a non-finite field"));
            }
            match *piece {
                Piece::Atom { location, mass } => {
                    if !(mass > 0.0 && mass <= 1.0 + PROB_TOL) {
                        return invalid(format!("atom {i} has mass {mass} outside (0, 1]"));
                    }
                    if (location - cursor).abs() > POS_TOL {
                        return invalid(format!("atom {i} at {location} is not at the current boundary {cursor}"));
                    }
                    if atom_here {
                        return invalid(format!("two atoms at {location}"));
                    }
                    pending += mass;
                    atom_here = true;
                }
                Piece::Pareto { lo: a, hi: b, .. } | Piece::Linear { lo: a, hi: b, .. } => {
                    if (a - cursor).abs() > POS_TOL {
                        return invalid(format!("piece {i} starts at {a}, expected {cursor}"));
                    }
                    if !(b > a) {
                        return invalid(format!("piece {i} has empty span [{a}, {b})"));
                    }
                    match *piece {
                        Piece::Linear { cdf_lo, slope, .. } => {
                            if slope < 0.0 || !(-PROB_TOL..=1.0 + PROB_TOL).contains(&cdf_lo) {
                                return invalid(format!("linear piece {i} is not a valid CDF"));
                            }
                        }
                        Piece::Pareto { scale, shift, .. } => {
                            if !(scale > 0.0) || !(shift < a) {
                                return invalid(format!("pareto piece {i} needs scale > 0 and shift < lo"));
                            }
                        }
                        Piece::Atom { .. } => unreachable!(),
                    }
                    let start = piece.cdf_formula(a);
                    if (left + pending - start).abs() > PROB_TOL {
                        return invalid(format!("CDF jumps at {a}: left limit {left} plus atoms {pending} != {start}"));
                    }
                    let end = piece.cdf_formula(b);
                    if end > 1.0 + PROB_TOL {
                        return invalid(format!("piece {i} exceeds probability one"));
                    }
                    left = end;
                    cursor = b;
                    pending = 0.0;
                    atom_here = false;
                    cont.push(i);
                }
            }
        }
        if cont.is_empty() {
            return invalid("at least one continuous (possibly flat) piece is required");
        }
        if (cursor - hi).abs() > POS_TOL {
            return invalid(format!("pieces end at {cursor}, support ends at {hi}"));
        }
        if (left + pending - 1.0).abs() > PROB_TOL {
            return invalid(format!("total probability {} != 1", left + pending));
        }
        let mut cum_int = Vec::with_capacity(cont.len());
        let mut acc = 0.0;
        for &j in &cont {
            cum_int.push(acc);
            let (_, b) = pieces[j].bounds();
            acc += pieces[j].cdf_integral(b);
        }
        Ok(PiecewiseDistribution { support, pieces, cont, cum_int })
    }

    /// Point mass at `x` on the given support.
    pub fn degenerate(x: f64, support: [f64; 2]) -> Result<Self> {
        if !(x >= support[0] && x <= support[1]) {
            return invalid(format!("point {x} outside support {support:?}"));
        }
        DistBuilder::new(support[0], support[1]).flat_to(x).atom(1.0).finish()
    }

    /// Binary prior on `{0, 1}` with mean `p`.
    pub fn binary(p: f64) -> Result<Self> {
        crate::error::check_prob("p", p)?;
        DistBuilder::new(0.0, 1.0).atom(1.0 - p).flat_to(1.0).finish()
    }

    /// Finite discrete distribution on `support`; locations need not be sorted.
    pub fn discrete(support: [f64; 2], atoms: &[(f64, f64)]) -> Result<Self> {
        let mut pts: Vec<(f64, f64)> = atoms.iter().copied().filter(|a| a.1 > 0.0).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let total: f64 = pts.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > 1e-9 {
            return invalid(format!("atom masses sum to {total}"));
        }
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (x, m) in pts {
            let m = m / total;
            match merged.last_mut() {
                Some(last) if last.0 == x => last.1 += m,
                _ => merged.push((x, m)),
            }
        }
        let mut b = DistBuilder::new(support[0], support[1]);
        let last = merged.len() - 1;
        for (i, (x, m)) in merged.into_iter().enumerate() {
            b = b.flat_to(x);
            b = if i == last { b.atom_rest() } else { b.atom(m) };
        }
        b.finish()
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidDistribution(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("distribution serialises")
    }

    pub fn support(&self) -> [f64; 2] {
        self.support
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Continuous pieces in order.
    pub fn continuous(&self) -> impl Iterator<Item = &Piece> + '_ {
        self.cont.iter().map(move |&j| &self.pieces[j])
    }

    /// `(location, mass)` of every atom.
    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.pieces.iter().filter_map(|p| match *p {
            Piece::Atom { location, mass } => Some((location, mass)),
            _ => None,
        })
    }

    /// Sorted boundaries of the continuous pieces, including both support ends.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = vec![self.support[0]];
        for p in self.continuous() {
            out.push(p.bounds().1);
        }
        out
    }

    fn piece_at(&self, x: f64) -> &Piece {
        let k = self.cont.partition_point(|&j| self.pieces[j].bounds().0 <= x);
        &self.pieces[self.cont[k.saturating_sub(1)]]
    }

    /// `G(x) = P(X <= x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x < self.support[0] {
            return 0.0;
        }
        if x >= self.support[1] {
            return 1.0;
        }
        self.piece_at(x).cdf_formula(x).clamp(0.0, 1.0)
    }

    /// `G(x-) = P(X < x)`.
    pub fn cdf_left(&self, x: f64) -> f64 {
        if x <= self.support[0] {
            return 0.0;
        }
        if x > self.support[1] {
            return 1.0;
        }
        let k = self.cont.partition_point(|&j| self.pieces[j].bounds().1 < x);
        let k = k.min(self.cont.len() - 1);
        self.pieces[self.cont[k]].cdf_formula(x).clamp(0.0, 1.0)
    }

    /// Mass of the atom at exactly `x`, if any.
    pub fn atom_mass(&self, x: f64) -> f64 {
        self.atoms().filter(|a| a.0 == x).map(|a| a.1).sum()
    }

    /// Generalised inverse `inf{x : G(x) >= tau}`; flat regions map to their left end.
    pub fn quantile(&self, tau: f64) -> f64 {
        if tau <= 0.0 {
            return self.support[0];
        }
        for p in self.continuous() {
            let (a, b) = p.bounds();
            if tau <= p.cdf_formula(a) {
                return a;
            }
            if tau <= p.cdf_formula(b) {
                return p.invert(tau);
            }
        }
        self.support[1]
    }

    /// Right-continuous inverse `inf{x : G(x) > tau}`.
    pub fn upper_quantile(&self, tau: f64) -> f64 {
        if tau >= 1.0 {
            return self.support[1];
        }
        for p in self.continuous() {
            let (a, b) = p.bounds();
            if tau < p.cdf_formula(a) {
                return a;
            }
            if tau < p.cdf_formula(b) {
                return p.invert(tau);
            }
        }
        self.support[1]
    }

    /// Mean from the piece formulas.
    pub fn mean(&self) -> f64 {
        self.pieces.iter().map(Piece::first_moment).sum()
    }

    /// Mean as `lo + integral (1 - G)`, by adaptive quadrature.
    pub fn mean_by_quadrature(&self) -> f64 {
        let tail: f64 = self
            .continuous()
            .map(|p| {
                let (a, b) = p.bounds();
                integrate(|x| 1.0 - p.cdf_formula(x), a, b, QUAD_TOL)
            })
            .sum();
        self.support[0] + tail
    }

    /// `integral_{lo}^{x} G(t) dt`.
    pub fn integral_cdf(&self, x: f64) -> f64 {
        let [lo, hi] = self.support;
        if x <= lo {
            return 0.0;
        }
        let x = x.min(hi);
        let k = self.cont.partition_point(|&j| self.pieces[j].bounds().0 < x);
        let k = k.saturating_sub(1);
        self.cum_int[k] + self.pieces[self.cont[k]].cdf_integral(x)
    }

    /// `E[max of n draws] = integral x dG^n`, by quadrature of `1 - G^n`.
    pub fn expected_max(&self, n: usize) -> f64 {
        let [lo, _] = self.support;
        let tail: f64 = self
            .continuous()
            .map(|p| {
                let (a, b) = p.bounds();
                integrate(|x| 1.0 - p.cdf_formula(x).clamp(0.0, 1.0).powi(n as i32), a, b, QUAD_TOL)
            })
            .sum();
        lo + tail
    }

    /// One draw by inverse CDF.
    #[inline]
    pub fn draw(&self, stream: &mut SampleStream) -> f64 {
        self.quantile(stream.uniform())
    }

    /// `count` draws by inverse CDF.
    pub fn sample(&self, stream: &mut SampleStream, count: usize) -> Vec<f64> {
        (0..count).map(|_| self.draw(stream)).collect()
    }
}

/// Incremental constructor that keeps the CDF continuous between pieces.
#[derive(Debug, Clone)]
pub struct DistBuilder {
    lo: f64,
    hi: f64,
    cursor: f64,
    cdf: f64,
    pieces: Vec<Piece>,
}

impl DistBuilder {
    pub fn new(lo: f64, hi: f64) -> Self {
        DistBuilder { lo, hi, cursor: lo, cdf: 0.0, pieces: Vec::new() }
    }

    /// Current CDF value.
    pub fn cdf(&self) -> f64 {
        self.cdf
    }

    /// Current position.
    pub fn cursor(&self) -> f64 {
        self.cursor
    }

    /// Atom of the given mass at the current position; non-positive masses are skipped.
    pub fn atom(mut self, mass: f64) -> Self {
        if mass > 0.0 {
            self.pieces.push(Piece::Atom { location: self.cursor, mass });
            self.cdf += mass;
        }
        self
    }

    /// Atom carrying all remaining probability.
    pub fn atom_rest(self) -> Self {
        let m = 1.0 - self.cdf;
        self.atom(m)
    }

    /// Flat CDF up to `x`.
    pub fn flat_to(self, x: f64) -> Self {
        let cdf = self.cdf;
        self.linear_to(x, cdf)
    }

    /// Linear CDF reaching `cdf_end` at `x`.
    pub fn linear_to(mut self, x: f64, cdf_end: f64) -> Self {
        if x > self.cursor {
            let slope = (cdf_end - self.cdf) / (x - self.cursor);
            self.pieces.push(Piece::Linear { lo: self.cursor, hi: x, cdf_lo: self.cdf, slope });
            self.cursor = x;
            self.cdf = cdf_end;
        }
        self
    }

    /// Pareto CDF `1 - scale / (t - shift)` up to `x`, with the scale
    /// chosen to continue from the current CDF value.
    pub fn pareto_to(mut self, x: f64, shift: f64) -> Self {
        if x > self.cursor {
            let scale = (1.0 - self.cdf) * (self.cursor - shift);
            let p = Piece::Pareto { lo: self.cursor, hi: x, scale, shift };
            self.cdf = p.cdf_formula(x);
            self.pieces.push(p);
            self.cursor = x;
        }
        self
    }

    /// Extends flat to the support end, puts leftover mass there and validates.
    pub fn finish(self) -> Result<PiecewiseDistribution> {
        let hi = self.hi;
        let b = self.flat_to(hi).atom_rest();
        PiecewiseDistribution::new([b.lo, b.hi], b.pieces)
    }
}

/// Smallest value of `integral_lo^x (G_fine - G_coarse)` over the support.
///
/// `fine` is a mean-preserving spread of `coarse` exactly when this is
/// nonnegative and the means agree.
pub fn mps_gap(fine: &PiecewiseDistribution, coarse: &PiecewiseDistribution) -> Result<f64> {
    let (sf, sc) = (fine.support(), coarse.support());
    if (sf[0] - sc[0]).abs() > POS_TOL || (sf[1] - sc[1]).abs() > POS_TOL {
        return Err(Error::Domain(format!(
            "mean-preserving-spread check needs a common support, got {sf:?} and {sc:?}"
        )));
    }
    let mut pts = fine.breakpoints();
    pts.extend(coarse.breakpoints());
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let d = |x: f64| fine.integral_cdf(x) - coarse.integral_cdf(x);
    let g = |x: f64| fine.cdf(x) - coarse.cdf(x);
    let mut worst = f64::INFINITY;
    const SUB: usize = 32;
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mut prev_x = a;
        let mut prev_g = g(a);
        worst = worst.min(d(a));
        for s in 1..=SUB {
            let x = if s == SUB { b } else { a + (b - a) * s as f64 / SUB as f64 };
            worst = worst.min(d(x));
            // inside (a, b) both CDFs are smooth; D has an interior minimum
            // where G_fine - G_coarse crosses from negative to positive
            let gx = if s == SUB { fine.cdf_left(b) - coarse.cdf_left(b) } else { g(x) };
            if prev_g < 0.0 && gx > 0.0 {
                if let Ok(r) = bisect(g, prev_x, x) {
                    worst = worst.min(d(r));
                }
            }
            prev_x = x;
            prev_g = g(x);
        }
    }
    Ok(worst)
}

/// Whether `fine` is a mean-preserving spread of `coarse`, to tolerance `tol`.
pub fn is_mps(fine: &PiecewiseDistribution, coarse: &PiecewiseDistribution, tol: f64) -> Result<bool> {
    let gap = mps_gap(fine, coarse)?;
    Ok(gap >= -tol && (fine.mean() - coarse.mean()).abs() <= tol)
}

/// Default tolerance for [`is_mps`].
pub const MPS_TOL: f64 = 1e-9;
