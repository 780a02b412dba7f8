//! Information design for optimal auctions.
//!
//! Signals about a binary value with prior mean `p` induce posterior-mean
//! distributions `G` with `integral (1 - G) = p`. This crate evaluates
//! Myerson's optimal auction for such distributions (with ironing),
//! solves for the seller-worst and buyer-optimal symmetric structures in
//! closed form, and ships brute-force oracles that check the solutions.

pub mod asymmetric;
pub mod dist;
pub mod error;
pub mod fixtures;
pub mod infodesign;
pub mod myerson;
pub mod numeric;
pub mod oracles;
pub mod stream;
pub mod verify;

pub use dist::{is_mps, mps_gap, DistBuilder, Piece, PiecewiseDistribution, MPS_TOL, PROB_TOL};
pub use error::{Error, Result};
pub use stream::SampleStream;

pub use infodesign::{
    solve, solve_buyer_optimal, solve_seller_worst, thresholds, Case, DesignSolution, DesignSummary, Objective,
    Thresholds, TwoPointSolution, VirtualValueDist,
};
pub use myerson::{
    iron, optimal_asymmetric, optimal_auction_eval, optimal_symmetric, second_price_eval, AuctionStats, BuyerGroup,
    EvalMethod, IronedProfile, Method,
};
